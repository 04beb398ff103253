use super::{MapSpec, PieceSpec};
use crate::error::{Error, Result};
use crate::geometry::{Point, Polygon};

/// Belykh map on `[-1, 1]^2`, split by the line `x2 = k x1`.
///
/// Piece 1 lies above the line and uses
/// `(lambda x1 + (1 - lambda), gamma x2 - (gamma - 1))`; piece 2 lies below
/// and uses the mirrored translations.
pub fn preset_belykh(lambda: f64, gamma: f64, k: f64) -> Result<MapSpec> {
    if !(lambda > 0.0 && lambda < 1.0) {
        return Err(Error::Parameter(format!("lambda = {lambda} not in (0, 1)")));
    }
    if !(k.abs() < 1.0) {
        return Err(Error::Parameter(format!(
            "|k| = {} must be below 1",
            k.abs()
        )));
    }
    let gamma_cap = 2.0 / (1.0 + k.abs());
    if !(gamma > 1.0) || gamma > gamma_cap * (1.0 + 1e-12) {
        return Err(Error::Parameter(format!(
            "gamma = {gamma} not in (1, {gamma_cap}]; larger values push f(K) out of [-1,1]^2"
        )));
    }
    let upper = Polygon::new(
        vec![
            Point::new(-1.0, -k),
            Point::new(1.0, k),
            Point::new(1.0, 1.0),
            Point::new(-1.0, 1.0),
        ],
        1,
    )?;
    let lower = Polygon::new(
        vec![
            Point::new(-1.0, -1.0),
            Point::new(1.0, -1.0),
            Point::new(1.0, k),
            Point::new(-1.0, -k),
        ],
        2,
    )?;
    let pieces = vec![
        PieceSpec {
            region: upper,
            lambda,
            gamma,
            u: 1.0 - lambda,
            v: -(gamma - 1.0),
        },
        PieceSpec {
            region: lower,
            lambda,
            gamma,
            u: -(1.0 - lambda),
            v: gamma - 1.0,
        },
    ];
    MapSpec::new(
        format!("belykh(lambda={lambda}, gamma={gamma}, k={k})"),
        k.abs() + 1.0,
        pieces,
    )
}

/// Fat baker's transformation: the Belykh map with `gamma = 2`, `k = 0`.
pub fn preset_fat_baker(lambda: f64) -> Result<MapSpec> {
    let mut m = preset_belykh(lambda, 2.0, 0.0)?;
    m.name = format!("fat_baker(lambda={lambda})");
    Ok(m)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::geometry::intersect_polygons;

    #[test]
    fn belykh_translations() {
        let m = preset_belykh(0.5, 2.0, 0.0).unwrap();
        let p = m.pieces();
        assert_eq!((p[0].u, p[1].u), (0.5, -0.5));
        assert_eq!((p[0].v, p[1].v), (-1.0, 1.0));
        assert_eq!(m.slope_bound(), 1.0);
    }

    #[test]
    fn gamma_above_cap_is_rejected() {
        assert!(matches!(
            preset_belykh(0.5, 2.5, 0.0),
            Err(Error::Parameter(_))
        ));
        assert!(preset_belykh(0.5, 1.95, 0.1).is_err());
        assert!(preset_belykh(0.5, 1.0, 0.0).is_err());
        assert!(preset_belykh(1.0, 1.5, 0.0).is_err());
        assert!(preset_belykh(0.5, 1.5, 1.0).is_err());
    }

    #[test]
    fn tilted_images_stay_in_square() {
        let m = preset_belykh(0.61, 1.9, 0.05).unwrap();
        let square = Polygon::rect(-1.0, -1.0, 1.0, 1.0, 0).unwrap();
        for p in m.pieces() {
            let img = p.branch().image(&p.region).unwrap();
            for v in img.vertices() {
                assert!(
                    v.x.abs() <= 1.0 + 1e-12 && v.y.abs() <= 1.0 + 1e-12,
                    "{v:?}"
                );
            }
            let inside: f64 = intersect_polygons(&img, &square)
                .iter()
                .map(|c| c.area())
                .sum();
            assert!((inside - img.area()).abs() < 1e-12);
        }
    }

    #[test]
    fn fat_baker_is_belykh_with_gamma_two() {
        let m = preset_fat_baker(0.55).unwrap();
        assert_eq!(m.gamma_min(), 2.0);
        assert_eq!(m.pieces(), preset_belykh(0.55, 2.0, 0.0).unwrap().pieces());
    }
}
