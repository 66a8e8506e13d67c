use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Parser, Subcommand};
use serde::Serialize;

use stefan_core::eigen::eigen_report;
use stefan_core::io::{fit_rows, read_csv, write_outputs};
use stefan_core::pucci::{pucci_report, PucciParams};
use stefan_core::{sim, verify, Result, SimConfig};

#[derive(Parser)]
#[command(name = "stefan", about = "Harmonic-gauge Stefan simulator and diagnostics")]
struct Cli {
    /// Configuration file with dotted keys.
    #[arg(long, global = true)]
    config: Option<PathBuf>,
    /// Output directory.
    #[arg(long, global = true)]
    out: Option<PathBuf>,
    /// Steps between snapshot files.
    #[arg(long, global = true)]
    snapshot_stride: Option<usize>,
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Run the coupled problem and write the table, summary and snapshots.
    Simulate,
    /// First Dirichlet eigenpairs of the reference domain.
    Eig,
    /// Half-eigenvalues of the Pucci operator for one class.
    PucciEig {
        #[arg(long, default_value_t = 1.0)]
        mu1: f64,
        #[arg(long, default_value_t = 1.0)]
        mu2: f64,
        #[arg(long, default_value_t = 0.0)]
        gamma: f64,
        #[arg(long)]
        nr: Option<usize>,
        #[arg(long)]
        ntheta: Option<usize>,
    },
    /// Acceptance criteria A1–A9.
    Verify,
    /// Decay rates from a diagnostics table.
    Fit {
        /// Table to fit; defaults to `<out>/diagnostics.csv`.
        #[arg(long)]
        csv: Option<PathBuf>,
        #[arg(long)]
        from: Option<f64>,
        #[arg(long)]
        to: Option<f64>,
    },
}

fn load(cli: &Cli) -> Result<SimConfig> {
    let mut cfg = match &cli.config {
        Some(path) => SimConfig::from_path(path)?,
        None => SimConfig::default(),
    };
    if let Some(stride) = cli.snapshot_stride {
        cfg.output.snapshot_stride = stride;
    }
    cfg.validate()?;
    Ok(cfg)
}

fn emit(value: &impl Serialize, out: Option<&Path>, name: &str) -> Result<()> {
    let json = serde_json::to_string_pretty(value).expect("reports serialise");
    println!("{json}");
    if let Some(dir) = out {
        std::fs::create_dir_all(dir)?;
        std::fs::write(dir.join(name), json)?;
    }
    Ok(())
}

fn run(cli: &Cli) -> Result<ExitCode> {
    let cfg = load(cli)?;
    let out = cli.out.as_deref();
    match &cli.command {
        Command::Simulate => {
            let grid = cfg.grid()?;
            let result = sim::run(&cfg)?;
            let dir = out.unwrap_or(Path::new("out"));
            let summary = write_outputs(dir, &cfg, &grid, &result)?;
            println!(
                "{}: t = {}, {} steps, outputs in {}",
                summary.termination,
                summary.final_t,
                summary.steps,
                dir.display()
            );
        }
        Command::Eig => emit(&eigen_report(&cfg.grid()?)?, out, "eig.json")?,
        Command::PucciEig {
            mu1,
            mu2,
            gamma,
            nr,
            ntheta,
        } => {
            let mut cfg = cfg.clone();
            cfg.grid.nr = nr.unwrap_or(cfg.grid.nr);
            cfg.grid.ntheta = ntheta.unwrap_or(cfg.grid.ntheta);
            let params = PucciParams::with_drift(*mu1, *mu2, *gamma)?;
            emit(&pucci_report(&cfg.grid()?, &params)?, out, "pucci_eig.json")?;
        }
        Command::Verify => {
            let criteria = verify::verify(&cfg)?;
            for c in &criteria {
                println!("{}", c.line());
            }
            if let Some(dir) = out {
                std::fs::create_dir_all(dir)?;
                let json = serde_json::to_string_pretty(&criteria).expect("criteria serialise");
                std::fs::write(dir.join("verify.json"), json)?;
            }
            if criteria.iter().any(|c| !c.pass()) {
                return Ok(ExitCode::FAILURE);
            }
        }
        Command::Fit { csv, from, to } => {
            let path = match csv {
                Some(p) => p.clone(),
                None => out.unwrap_or(Path::new("out")).join("diagnostics.csv"),
            };
            emit(&fit_rows(&read_csv(&path)?, *from, *to), None, "")?;
        }
    }
    Ok(ExitCode::SUCCESS)
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(&cli) {
        Ok(code) => code,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(2)
        }
    }
}
