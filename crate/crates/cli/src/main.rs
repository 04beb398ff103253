mod args;
mod commands;
mod error;

use std::fs;
use std::path::Path;
use std::process::ExitCode;
use std::time::Instant;

use clap::Parser;
use serde::Serialize;

use crate::args::{Cli, Command, MapArgs};
use crate::error::{Failure, EXIT_CERTIFICATION};

#[derive(Serialize)]
struct Manifest<'a> {
    version: &'a str,
    seed: u64,
    threads: Option<usize>,
    map_source: &'a MapArgs,
    map: &'a hypaff_core::MapSpec,
    options: &'a Command,
    artifacts: Vec<&'a str>,
    certified: bool,
    wall_time_seconds: f64,
}

fn write(dir: &Path, name: &str, bytes: &[u8]) -> Result<(), Failure> {
    let path = dir.join(name);
    fs::write(&path, bytes).map_err(|e| Failure::Io(path, e))
}

fn run(cli: &Cli) -> Result<bool, Failure> {
    let g = &cli.global;
    if let Some(n) = g.threads {
        if n == 0 {
            return Err(Failure::Usage("--threads must be positive".into()));
        }
        rayon::ThreadPoolBuilder::new()
            .num_threads(n)
            .build_global()
            .map_err(|e| Failure::Usage(format!("cannot start {n} threads: {e}")))?;
    }
    let map = commands::resolve_map(&g.map)?;

    let start = Instant::now();
    let outcome = commands::execute(&cli.command, &map, g.seed)?;
    let wall = start.elapsed().as_secs_f64();

    fs::create_dir_all(&g.out).map_err(|e| Failure::Io(g.out.clone(), e))?;
    let manifest = Manifest {
        version: hypaff_core::VERSION,
        seed: g.seed,
        threads: g.threads,
        map_source: &g.map,
        map: &map,
        options: &cli.command,
        artifacts: outcome.artifacts.iter().map(|a| a.name).collect(),
        certified: outcome.certified,
        wall_time_seconds: wall,
    };
    let mut bytes = serde_json::to_vec_pretty(&manifest)?;
    bytes.push(b'\n');
    write(&g.out, "manifest.json", &bytes)?;
    for a in &outcome.artifacts {
        write(&g.out, a.name, &a.bytes)?;
    }

    println!("{}: {}", cli.command.name(), outcome.summary);
    Ok(outcome.certified)
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(&cli) {
        Ok(true) => ExitCode::SUCCESS,
        Ok(false) => {
            eprintln!("error: {} did not certify", cli.command.name());
            ExitCode::from(EXIT_CERTIFICATION)
        }
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(e.exit_code())
        }
    }
}
