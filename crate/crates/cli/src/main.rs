use std::path::PathBuf;
use std::process::ExitCode;

use clap::Parser;

use reglab_cli::{error_exit_code, run, ExperimentConfig, Overrides, EXIT_CONFIG};

/// Numerical experiments on loss of regularity for u_t = e^{iθ}Δu + λ|u|^α u.
#[derive(Parser, Debug)]
#[command(name = "reglab", version)]
struct Cli {
    /// verify-kernel | ode-defect | simulate | third-derivative-scan |
    /// duhamel-rate | scaling-report | inequality-suite
    #[arg(long)]
    experiment: Option<String>,
    #[arg(long, allow_negative_numbers = true)]
    alpha: Option<f64>,
    #[arg(long, allow_negative_numbers = true)]
    lambda_re: Option<f64>,
    #[arg(long, allow_negative_numbers = true)]
    lambda_im: Option<f64>,
    #[arg(long, allow_negative_numbers = true)]
    theta: Option<f64>,
    /// Grid points per axis (power of two).
    #[arg(long)]
    grid_n: Option<usize>,
    /// Half-length L of the periodic box [-L, L).
    #[arg(long, allow_negative_numbers = true)]
    domain_l: Option<f64>,
    #[arg(long, allow_negative_numbers = true)]
    dt: Option<f64>,
    #[arg(long, allow_negative_numbers = true)]
    t_final: Option<f64>,
    #[arg(long)]
    seed: Option<u64>,
    #[arg(long)]
    out_dir: Option<PathBuf>,
    /// Sectioned key = value file; flags override its entries.
    #[arg(long)]
    config: Option<PathBuf>,
}

fn configure_threads() -> Result<(), String> {
    let Ok(v) = std::env::var("REGLAB_THREADS") else {
        return Ok(());
    };
    let n: usize = v
        .parse()
        .ok()
        .filter(|n| *n > 0)
        .ok_or_else(|| format!("REGLAB_THREADS must be a positive integer, got {v:?}"))?;
    rayon::ThreadPoolBuilder::new()
        .num_threads(n)
        .build_global()
        .map_err(|e| e.to_string())
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    if let Err(e) = configure_threads() {
        eprintln!("error: {e}");
        return ExitCode::from(EXIT_CONFIG as u8);
    }
    let flags = Overrides {
        experiment: cli.experiment,
        alpha: cli.alpha,
        lambda_re: cli.lambda_re,
        lambda_im: cli.lambda_im,
        theta: cli.theta,
        grid_n: cli.grid_n,
        domain_l: cli.domain_l,
        dt: cli.dt,
        t_final: cli.t_final,
        seed: cli.seed,
        out_dir: cli.out_dir,
    };
    let result = ExperimentConfig::load(cli.config.as_deref(), &flags).and_then(|cfg| run(&cfg));
    match result {
        Ok(summary) => {
            for c in &summary.report.checks {
                println!(
                    "{} {} measured={} expected={} tol={} [{}]",
                    if c.pass { "PASS" } else { "FAIL" },
                    c.name,
                    c.measured,
                    c.expected,
                    c.tolerance,
                    serde_json::to_value(c.provenance).expect("tag").as_str().unwrap_or("")
                );
            }
            for f in &summary.files {
                println!("wrote {}", f.display());
            }
            ExitCode::from(summary.exit_code() as u8)
        }
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(error_exit_code(&e) as u8)
        }
    }
}
