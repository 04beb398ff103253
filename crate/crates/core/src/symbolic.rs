//! Itineraries, admissible words and the stable coordinate as a series in
//! the past symbols.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::fit::linear_fit;
use crate::geometry::Point;
use crate::map::MapSpec;
use crate::partition::{refine_once, Partition};

/// A finite word over the 1-based piece alphabet; `offset` is the index of
/// the first symbol.
#[derive(Clone, Debug, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub struct Word {
    pub symbols: Vec<u16>,
    pub offset: i64,
}

impl Word {
    pub fn new(symbols: Vec<u16>, offset: i64) -> Result<Self> {
        if symbols.is_empty() {
            return Err(Error::Parameter("empty word".into()));
        }
        if symbols.contains(&0) {
            return Err(Error::Parameter("word symbols start at 1".into()));
        }
        Ok(Word { symbols, offset })
    }

    /// A word at offset 0.
    pub fn from_symbols(symbols: Vec<u16>) -> Result<Self> {
        Word::new(symbols, 0)
    }

    pub fn len(&self) -> usize {
        self.symbols.len()
    }

    pub fn is_empty(&self) -> bool {
        self.symbols.is_empty()
    }

    fn check_alphabet(&self, a: usize) -> Result<()> {
        match self.symbols.iter().find(|&&s| s as usize > a) {
            Some(s) => Err(Error::Parameter(format!(
                "symbol {s} exceeds alphabet size {a}"
            ))),
            None => Ok(()),
        }
    }
}

/// Pieces visited by `p, f(p), ..., f^{length-1}(p)`.
pub fn itinerary_of(m: &MapSpec, p: Point, length: usize) -> Result<Word> {
    if length == 0 {
        return Err(Error::Parameter(
            "itinerary length must be at least 1".into(),
        ));
    }
    let mut symbols = Vec::with_capacity(length);
    let mut x = p;
    for step in 0..length {
        let (next, piece) = m.apply(x).map_err(|e| match e {
            Error::OnDiscontinuity(point) => Error::BoundaryAtStep { step, point },
            other => other,
        })?;
        symbols.push(piece as u16);
        x = next;
    }
    Ok(Word { symbols, offset: 0 })
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct WordCensus {
    pub length: usize,
    pub count: usize,
    /// Least-squares slope of `ln(count)` against length.
    pub fitted_rate: f64,
}

#[derive(Clone, Debug, PartialEq)]
pub struct WordEnumeration {
    pub census: WordCensus,
    /// `(length, count)` for lengths `1..=census.length`.
    pub counts: Vec<(usize, usize)>,
    /// Sorted words of the full length.
    pub words: Vec<Word>,
}

impl WordEnumeration {
    /// JSON array of symbol arrays.
    pub fn words_json(&self) -> Result<String> {
        let raw: Vec<&[u16]> = self.words.iter().map(|w| w.symbols.as_slice()).collect();
        Ok(serde_json::to_string(&raw)?)
    }

    /// CSV with header `length,count`.
    pub fn census_csv(&self) -> String {
        let mut s = String::from("length,count\n");
        for (l, c) in &self.counts {
            s.push_str(&format!("{l},{c}\n"));
        }
        s
    }
}

fn distinct_words(z: &Partition) -> Vec<Word> {
    let mut words: Vec<Word> = z
        .cells()
        .iter()
        .map(|c| Word {
            symbols: c.word.clone(),
            offset: 0,
        })
        .collect();
    words.dedup();
    words
}

/// Words realized by nonempty cells of the depth `length - 1` partition.
///
/// The growth rate is fitted on lengths `>= 3` when at least two are
/// available, otherwise on all lengths; a single length gives `ln(count)`.
pub fn enumerate_words(m: &MapSpec, length: usize) -> Result<WordEnumeration> {
    if length == 0 {
        return Err(Error::Parameter("word length must be at least 1".into()));
    }
    let mut z = Partition::initial(m);
    let mut counts = vec![(1, distinct_words(&z).len())];
    for l in 2..=length {
        z = refine_once(m, &z)?;
        counts.push((l, distinct_words(&z).len()));
    }
    let words = distinct_words(&z);

    let fit: Vec<(f64, f64)> = {
        let tail: Vec<_> = counts.iter().filter(|(l, _)| *l >= 3).collect();
        let chosen = if tail.len() >= 2 {
            tail
        } else {
            counts.iter().collect()
        };
        chosen
            .iter()
            .map(|&&(l, c)| (l as f64, (c as f64).ln()))
            .collect()
    };
    let fitted_rate = if fit.len() == 1 {
        fit[0].1
    } else {
        let (xs, ys): (Vec<f64>, Vec<f64>) = fit.into_iter().unzip();
        linear_fit(&xs, &ys).slope
    };
    Ok(WordEnumeration {
        census: WordCensus {
            length,
            count: words.len(),
            fitted_rate,
        },
        counts,
        words,
    })
}

/// A truncated stable coordinate with its tail bound.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct StableCoordinate {
    pub x1: f64,
    pub error_bound: f64,
}

fn check_branch_params(lambdas: &[f64], us: &[f64], t: f64) -> Result<f64> {
    if lambdas.is_empty() || lambdas.len() != us.len() {
        return Err(Error::Parameter(format!(
            "{} contraction rates for {} translations",
            lambdas.len(),
            us.len()
        )));
    }
    let scaled = t * lambdas.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    if !(t > 0.0 && scaled < 1.0 && lambdas.iter().all(|&l| l > 0.0)) {
        return Err(Error::Parameter(format!(
            "need t > 0 and t * lambda_max < 1, got {scaled}"
        )));
    }
    Ok(scaled)
}

/// `x1 = Σ_{n=1}^{T} (Π_{l<n} t λ_{s_l}) u_{s_n}` for the past
/// `s_1, s_2, ...` listed most recent first.
pub fn stable_coordinate(
    lambdas: &[f64],
    us: &[f64],
    t: f64,
    past: &Word,
    truncation: usize,
) -> Result<StableCoordinate> {
    let scaled = check_branch_params(lambdas, us, t)?;
    past.check_alphabet(lambdas.len())?;
    if past.len() < truncation {
        return Err(Error::Precondition(format!(
            "past has {} symbols, truncation needs {truncation}",
            past.len()
        )));
    }
    let mut acc = 0.0;
    for &s in past.symbols[..truncation].iter().rev() {
        let i = s as usize - 1;
        acc = us[i] + t * lambdas[i] * acc;
    }
    let u_max = us.iter().map(|u| u.abs()).fold(0.0, f64::max);
    Ok(StableCoordinate {
        x1: acc,
        error_bound: u_max * scaled.powi(truncation as i32) / (1.0 - scaled),
    })
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct Separation {
    pub value: f64,
    pub error_bound: f64,
    /// Number of leading symbols the pasts share; `None` if they agree on
    /// the whole truncation.
    pub shared: Option<usize>,
}

/// `|x1(past_a) - x1(past_b)|` for two pasts that share a prefix and then
/// branch into symbols with different translations.
pub fn separation_series(
    past_a: &Word,
    past_b: &Word,
    lambdas: &[f64],
    us: &[f64],
    t: f64,
    truncation: usize,
) -> Result<Separation> {
    let a = stable_coordinate(lambdas, us, t, past_a, truncation)?;
    let b = stable_coordinate(lambdas, us, t, past_b, truncation)?;
    let shared = past_a.symbols[..truncation]
        .iter()
        .zip(&past_b.symbols[..truncation])
        .position(|(x, y)| x != y);
    if let Some(l) = shared {
        let (i, j) = (
            past_a.symbols[l] as usize - 1,
            past_b.symbols[l] as usize - 1,
        );
        if us[i] == us[j] {
            return Err(Error::Precondition(format!(
                "pasts branch at position {} into symbols with equal translation",
                l + 1
            )));
        }
    }
    Ok(Separation {
        value: (a.x1 - b.x1).abs(),
        error_bound: a.error_bound + b.error_bound,
        shared,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::map::preset_belykh;

    fn belykh_params() -> (Vec<f64>, Vec<f64>) {
        (vec![0.5, 0.5], vec![0.5, -0.5])
    }

    #[test]
    fn fixed_point_itinerary() {
        let m = preset_belykh(0.5, 2.0, 0.0).unwrap();
        let w = itinerary_of(&m, Point::new(1.0, 1.0), 20).unwrap();
        assert!(w.symbols.iter().all(|&s| s == 1));
        let w1 = itinerary_of(&m, Point::new(0.3, -0.7), 1).unwrap();
        assert_eq!(w1.symbols, vec![2]);
    }

    #[test]
    fn itinerary_reports_failing_step() {
        let m = preset_belykh(0.5, 2.0, 0.0).unwrap();
        match itinerary_of(&m, Point::new(0.3, 0.75), 5) {
            Err(Error::BoundaryAtStep { step, .. }) => assert_eq!(step, 2),
            other => panic!("{other:?}"),
        }
    }

    #[test]
    fn single_length_census() {
        let m = preset_belykh(0.5, 2.0, 0.0).unwrap();
        let e = enumerate_words(&m, 1).unwrap();
        assert_eq!(e.census.count, 2);
        assert!((e.census.fitted_rate - 2f64.ln()).abs() < 1e-12);
    }

    #[test]
    fn full_shift_for_belykh() {
        let m = preset_belykh(0.5, 2.0, 0.0).unwrap();
        let e = enumerate_words(&m, 5).unwrap();
        assert_eq!(e.census.count, 32);
        assert!((e.census.fitted_rate - 2f64.ln()).abs() < 1e-12);
        assert_eq!(e.census_csv().lines().next(), Some("length,count"));
        assert!(e.words_json().unwrap().starts_with("[[1,1,1,1,1]"));
    }

    #[test]
    fn geometric_series_limit() {
        let past = Word::from_symbols(vec![1; 200]).unwrap();
        let c = stable_coordinate(&[0.5, 0.3], &[0.7, -0.2], 1.0, &past, 200).unwrap();
        assert!((c.x1 - 1.4).abs() < 1e-12);
    }

    #[test]
    fn fixed_point_stable_coordinate() {
        let (l, u) = belykh_params();
        let past = Word::from_symbols(vec![1; 60]).unwrap();
        let c = stable_coordinate(&l, &u, 1.0, &past, 60).unwrap();
        assert!((c.x1 - 1.0).abs() < 1e-15 + c.error_bound);
    }

    #[test]
    fn error_bound_halves() {
        let (l, u) = belykh_params();
        let past = Word::from_symbols(vec![2; 40]).unwrap();
        let a = stable_coordinate(&l, &u, 1.0, &past, 20).unwrap();
        let b = stable_coordinate(&l, &u, 1.0, &past, 21).unwrap();
        assert!((a.error_bound / b.error_bound - 2.0).abs() < 1e-12);
    }

    #[test]
    fn short_past_is_rejected() {
        let (l, u) = belykh_params();
        let past = Word::from_symbols(vec![1; 5]).unwrap();
        assert!(matches!(
            stable_coordinate(&l, &u, 1.0, &past, 6),
            Err(Error::Precondition(_))
        ));
        assert!(stable_coordinate(&l, &u, 2.0, &past, 5).is_err());
        let bad = Word::from_symbols(vec![3; 5]).unwrap();
        assert!(stable_coordinate(&l, &u, 1.0, &bad, 5).is_err());
    }

    #[test]
    fn separation_basics() {
        let (l, u) = belykh_params();
        let a = Word::from_symbols(vec![1; 50]).unwrap();
        let s = separation_series(&a, &a, &l, &u, 1.0, 50).unwrap();
        assert_eq!(s.value, 0.0);
        assert_eq!(s.shared, None);

        let mut bsym = vec![1; 50];
        bsym[0] = 2;
        let b = Word::from_symbols(bsym).unwrap();
        let s = separation_series(&a, &b, &l, &u, 1e-6, 50).unwrap();
        assert_eq!(s.shared, Some(0));
        assert!((s.value - 1.0).abs() < 1e-5);
    }

    #[test]
    fn equal_translations_at_branch_are_rejected() {
        let a = Word::from_symbols(vec![1, 1, 1]).unwrap();
        let b = Word::from_symbols(vec![1, 2, 1]).unwrap();
        assert!(matches!(
            separation_series(&a, &b, &[0.5, 0.5], &[0.3, 0.3], 1.0, 3),
            Err(Error::Precondition(_))
        ));
    }
}
