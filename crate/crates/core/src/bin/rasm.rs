use std::path::PathBuf;
use std::process::ExitCode;

use clap::Parser;

use rasm_core::cli::{parse_run_spec, run, Mode};
use rasm_core::montecarlo::THREADS_ENV;

/// Monte Carlo BER and analytical ABER bounds for RIS-assisted received
/// adaptive spatial modulation.
#[derive(Debug, Parser)]
#[command(name = "rasm", version, after_help = format!(
    "Set {THREADS_ENV} to fix the number of worker threads; results do not depend on it."
))]
struct Args {
    /// Run file (TOML).
    #[arg(long)]
    config: PathBuf,
    /// Overrides the run file's mode.
    #[arg(long, value_parser = ["simulate", "analyze", "compare"])]
    mode: Option<String>,
    /// Master seed for trial streams and, unless set per scheme, AC selection.
    #[arg(long)]
    seed: Option<u64>,
    /// Trials per SNR point.
    #[arg(long)]
    trials: Option<u64>,
    /// Output directory.
    #[arg(long)]
    out: Option<PathBuf>,
    /// Gauss-Legendre nodes for the PEP integral.
    #[arg(long)]
    quadrature_nodes: Option<usize>,
}

fn main() -> ExitCode {
    let args = Args::parse();
    match execute(&args) {
        Ok(files) => {
            for f in files {
                println!("{}", f.display());
            }
            ExitCode::SUCCESS
        }
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::FAILURE
        }
    }
}

fn execute(args: &Args) -> rasm_core::Result<Vec<PathBuf>> {
    let text = std::fs::read_to_string(&args.config).map_err(|e| {
        std::io::Error::new(e.kind(), format!("{}: {e}", args.config.display()))
    })?;
    let mut spec = parse_run_spec(&text).map_err(|e| match e {
        rasm_core::Error::Parse { line, message } => rasm_core::Error::Parse {
            line,
            message: format!("{}: {message}", args.config.display()),
        },
        other => other,
    })?;
    if let Some(m) = &args.mode {
        spec.mode = m.parse::<Mode>()?;
    }
    if let Some(s) = args.seed {
        spec.set_seed(s);
    }
    if let Some(t) = args.trials {
        if t == 0 {
            return Err(rasm_core::Error::InvalidConfig("--trials must be at least 1".into()));
        }
        spec.trials = t;
    }
    if let Some(o) = &args.out {
        spec.out = o.clone();
    }
    if let Some(n) = args.quadrature_nodes {
        if n == 0 {
            return Err(rasm_core::Error::InvalidConfig(
                "--quadrature-nodes must be at least 1".into(),
            ));
        }
        spec.quadrature_nodes = n;
    }
    run(&spec)
}
