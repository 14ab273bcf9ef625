use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Parser, Subcommand};

use dualtilt::analysis::table_report;
use dualtilt::config::ScenarioConfig;
use dualtilt::error::{Error, Result};
use dualtilt::record::{compare_runs, load_record};
use dualtilt::runner::{configs_in, run_batch, run_config, Overrides, RunArtifacts, OUT_ENV, SUMMARY_FILE};

#[derive(Parser)]
#[command(name = "dualtilt", version, about = "Dual-tilt hexarotor simulator with dynamic control allocation")]
struct Cli {
    /// Output root; each scenario writes into <out>/<output.dir>.
    #[arg(long, global = true, env = OUT_ENV, default_value = "out")]
    out: PathBuf,
    /// Override the sample period [s].
    #[arg(long, global = true)]
    dt: Option<f64>,
    /// Override the simulated duration [s].
    #[arg(long, global = true)]
    duration: Option<f64>,
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Run one scenario config.
    Run { config: PathBuf },
    /// Run every *.toml config in a directory concurrently.
    Batch { dir: PathBuf },
    /// Amplitude/offset table from saved records.
    Tables {
        #[arg(required = true)]
        records: Vec<PathBuf>,
        /// Start of the steady-state window [s].
        #[arg(long, default_value_t = 10.0)]
        window: f64,
        /// Reference angular frequency [rad/s].
        #[arg(long, default_value_t = 0.8)]
        frequency: f64,
        /// Also write the table as CSV.
        #[arg(long)]
        csv: Option<PathBuf>,
    },
    /// Column-wise difference between two saved records.
    Compare {
        a: PathBuf,
        b: PathBuf,
        /// Also write per-column differences as CSV.
        #[arg(long)]
        csv: Option<PathBuf>,
    },
}

fn load(path: &Path, overrides: &Overrides) -> Result<ScenarioConfig> {
    let mut config = ScenarioConfig::load(path)?;
    overrides.apply(&mut config)?;
    Ok(config)
}

fn report(art: &RunArtifacts) {
    println!("{}: {} rows -> {}", art.record.name, art.record.len(), art.dir.display());
    if let Ok(text) = std::fs::read_to_string(art.dir.join(SUMMARY_FILE)) {
        print!("{text}");
    }
}

fn execute(cli: Cli) -> Result<()> {
    let overrides = Overrides { dt: cli.dt, duration: cli.duration };
    match cli.command {
        Command::Run { config } => {
            let config = load(&config, &overrides)?;
            report(&run_config(&config, &cli.out)?);
        }
        Command::Batch { dir } => {
            let paths = configs_in(&dir)?;
            if paths.is_empty() {
                return Err(Error::Config(format!("no *.toml configs in {}", dir.display())));
            }
            let configs = paths.iter().map(|p| load(p, &overrides)).collect::<Result<Vec<_>>>()?;
            let mut failed = 0;
            for (path, result) in paths.iter().zip(run_batch(&configs, &cli.out)) {
                match result {
                    Ok(art) => {
                        report(&art);
                        println!();
                    }
                    Err(e) => {
                        failed += 1;
                        eprintln!("{}: {e}", path.display());
                    }
                }
            }
            if failed > 0 {
                return Err(Error::Config(format!("{failed} of {} runs failed", paths.len())));
            }
        }
        Command::Tables { records, window, frequency, csv } => {
            let runs = records.iter().map(|p| load_record(p)).collect::<Result<Vec<_>>>()?;
            let table = table_report(&runs, window, frequency)?;
            print!("{}", table.to_text());
            if let Some(path) = csv {
                table.write_csv(std::io::BufWriter::new(std::fs::File::create(path)?))?;
            }
        }
        Command::Compare { a, b, csv } => {
            let diff = compare_runs(&load_record(&a)?, &load_record(&b)?)?;
            print!("{}", diff.to_text());
            if let Some(path) = csv {
                diff.write_csv(std::io::BufWriter::new(std::fs::File::create(path)?))?;
            }
        }
    }
    Ok(())
}

fn main() -> ExitCode {
    match execute(Cli::parse()) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::FAILURE
        }
    }
}
