//! Command-line front end for `dtqw-core`: configurations, figure presets
//! and deterministic output files.

pub mod config;
pub mod error;
pub mod output;
pub mod pipeline;
pub mod svg;

use std::path::PathBuf;

use clap::Parser;

pub use config::{parse_config, preset, ExperimentConfig, Overrides, Solver, Task, PRESETS};
pub use error::{CliError, Result};
pub use output::{execute, OutputDir};

#[derive(Debug, Parser)]
#[command(name = "dtqw", version, about = "Discrete-time quantum walk simulator")]
pub struct Args {
    /// A preset name, or `run` to take everything from `--config`.
    pub target: String,
    /// TOML file with one table per section, or a `meta.json` from an earlier run.
    #[arg(long)]
    pub config: Option<PathBuf>,
    /// Print the resolved configuration as TOML and exit.
    #[arg(long)]
    pub print_config: bool,
    #[arg(long)]
    pub out: Option<String>,
    #[arg(long)]
    pub seed: Option<u64>,
    /// Sets both lattice sides.
    #[arg(long = "L")]
    pub l: Option<usize>,
    #[arg(long)]
    pub lx: Option<usize>,
    #[arg(long)]
    pub ly: Option<usize>,
    #[arg(long, allow_hyphen_values = true)]
    pub theta_x: Option<String>,
    #[arg(long, allow_hyphen_values = true)]
    pub theta_y: Option<String>,
    #[arg(long = "T", alias = "t-max")]
    pub t_max: Option<usize>,
    #[arg(long)]
    pub stride: Option<usize>,
    #[arg(long, allow_hyphen_values = true)]
    pub shift_x: Option<i64>,
    #[arg(long, allow_hyphen_values = true)]
    pub shift_y: Option<i64>,
    #[arg(long, allow_hyphen_values = true)]
    pub kick_x: Option<String>,
    #[arg(long, allow_hyphen_values = true)]
    pub kick_y: Option<String>,
    #[arg(long)]
    pub refine: Option<usize>,
    #[arg(long)]
    pub ky_points: Option<usize>,
    #[arg(long)]
    pub states: Option<usize>,
    #[arg(long, value_parser = parse_solver)]
    pub solver: Option<Solver>,
    #[arg(long)]
    pub no_csv: bool,
    #[arg(long)]
    pub no_json: bool,
    #[arg(long)]
    pub no_svg: bool,
}

fn parse_solver(s: &str) -> std::result::Result<Solver, String> {
    match s {
        "auto" => Ok(Solver::Auto),
        "dense" => Ok(Solver::Dense),
        "chebyshev" => Ok(Solver::Chebyshev),
        _ => Err(format!("'{s}': expected auto, dense or chebyshev")),
    }
}

impl Args {
    pub fn overrides(&self) -> Overrides {
        Overrides {
            out_dir: self.out.clone(),
            seed: self.seed,
            lx: self.lx.or(self.l),
            ly: self.ly.or(self.l),
            theta_x: self.theta_x.clone(),
            theta_y: self.theta_y.clone(),
            t_max: self.t_max,
            stride: self.stride,
            shift_x: self.shift_x,
            shift_y: self.shift_y,
            kick_x: self.kick_x.clone(),
            kick_y: self.kick_y.clone(),
            refine: self.refine,
            ky_points: self.ky_points,
            states: self.states,
            solver: self.solver,
            no_csv: self.no_csv,
            no_json: self.no_json,
            no_svg: self.no_svg,
        }
    }

    pub fn resolve(&self) -> Result<ExperimentConfig> {
        let file = self.config.as_deref().map(config::read_config_file).transpose()?;
        if self.target == "run" && file.is_none() {
            return Err(CliError::Config("`run` needs --config".into()));
        }
        parse_config(&self.target, file.as_ref(), &self.overrides())
    }
}

/// Caps the global thread pool at `DTQW_THREADS` when set.
pub fn init_threads() -> Result<()> {
    if let Ok(v) = std::env::var("DTQW_THREADS") {
        let n: usize = v
            .trim()
            .parse()
            .ok()
            .filter(|&n| n > 0)
            .ok_or_else(|| CliError::Config(format!("DTQW_THREADS = '{v}': expected a positive integer")))?;
        rayon::ThreadPoolBuilder::new()
            .num_threads(n)
            .build_global()
            .map_err(|e| CliError::Config(e.to_string()))?;
    }
    Ok(())
}

/// Parses the arguments, runs the task and returns the exit code.
pub fn main_with(args: Args) -> i32 {
    let res = init_threads().and_then(|_| args.resolve()).and_then(|cfg| {
        if args.print_config {
            print!("{}", cfg.to_toml());
            return Ok(());
        }
        let mut out = OutputDir::create(&cfg.run.out_dir)?;
        execute(&cfg, &mut out)?;
        for p in out.written() {
            println!("{}", p.display());
        }
        Ok(())
    });
    match res {
        Ok(()) => 0,
        Err(e) => {
            eprintln!("dtqw: {e}");
            e.exit_code()
        }
    }
}
