//! `colehopf-lab <study> --config <file> [overrides]`
//!
//! Exit status: 0 when every gating check passes, 1 on a tolerance failure
//! or numerical breakdown, 2 on a configuration error.

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, ValueEnum};
use colehopf::experiments::{run_study, Overrides, RunConfig, Study};
use colehopf::Error;

#[derive(Clone, Copy, Debug, ValueEnum)]
enum StudyArg {
    Covariance,
    Correction,
    Stability,
    Residual,
    Section,
    Simulate,
}

impl From<StudyArg> for Study {
    fn from(s: StudyArg) -> Study {
        match s {
            StudyArg::Covariance => Study::Covariance,
            StudyArg::Correction => Study::Correction,
            StudyArg::Stability => Study::Stability,
            StudyArg::Residual => Study::Residual,
            StudyArg::Section => Study::Section,
            StudyArg::Simulate => Study::Simulate,
        }
    }
}

/// Numerical studies of the mollified stochastic Burgers equation.
#[derive(Debug, Parser)]
#[command(name = "colehopf-lab", version)]
struct Cli {
    study: StudyArg,
    /// JSON run configuration.
    #[arg(long)]
    config: PathBuf,
    /// Master seed.
    #[arg(long)]
    seed: Option<u64>,
    #[arg(long)]
    nx: Option<usize>,
    #[arg(long)]
    nt: Option<usize>,
    /// Mollifier scale n.
    #[arg(long = "n-scale")]
    n_scale: Option<u32>,
    /// Result file; trend and field files are written next to it.
    #[arg(long)]
    out: Option<PathBuf>,
    /// Worker threads.
    #[arg(long)]
    jobs: Option<usize>,
}

fn configure(cli: &Cli) -> colehopf::Result<RunConfig> {
    let mut cfg = RunConfig::load(&cli.config)?;
    let study: Study = cli.study.into();
    cfg.study = Some(study);
    cfg.apply(&Overrides {
        seed: cli.seed,
        nx: cli.nx,
        nt: cli.nt,
        n_scale: cli.n_scale,
        out: cli.out.clone(),
        jobs: cli.jobs,
    });
    if cfg.out.is_none() {
        cfg.out = Some(PathBuf::from(format!("results/{study}.json")));
    }
    Ok(cfg)
}

fn exit_code(e: &Error) -> u8 {
    if e.is_configuration() || matches!(e, Error::Json(_)) {
        2
    } else {
        1
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let cfg = match configure(&cli) {
        Ok(c) => c,
        Err(e) => {
            eprintln!("colehopf-lab: {e}");
            return ExitCode::from(exit_code(&e));
        }
    };
    match run_study(&cfg) {
        Ok(res) => {
            for c in &res.checks {
                let tag = match (c.gating, c.passed) {
                    (true, true) => "PASS",
                    (true, false) => "FAIL",
                    (false, true) => "info",
                    (false, false) => "warn",
                };
                println!("{tag} {:<28} {:>12.4e} (tol {:.1e})  {}", c.name, c.value, c.tolerance, c.detail);
            }
            if let Some(out) = &cfg.out {
                println!("wrote {}", out.display());
            }
            if res.passed {
                ExitCode::SUCCESS
            } else {
                ExitCode::from(1)
            }
        }
        Err(e) => {
            eprintln!("colehopf-lab: {e}");
            ExitCode::from(exit_code(&e))
        }
    }
}
