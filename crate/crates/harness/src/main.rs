use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand};
use qicost::functions::sink_xor;
use qicost::quantum::alice_sends_input;
use qicost_harness::commands::{embed, measure, DistArg, LoadedProtocol, Quantity, SpecArg};
use qicost_harness::report::{write_csv, write_json};
use qicost_harness::{main_theorem_demo, run_checks, ExperimentConfig, HarnessError, Result};

/// Information-cost measurements and numerical checks for two-party protocols.
/// Set RAYON_NUM_THREADS to bound the worker threads.
#[derive(Parser)]
#[command(name = "qicost", version)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Run registered checks (all when no --check is given).
    Verify {
        #[arg(long = "check", value_name = "ID")]
        checks: Vec<String>,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        /// Samples per check, overriding each check's default.
        #[arg(long)]
        samples: Option<usize>,
        /// Largest graph size for the classical embedding checks.
        #[arg(long, default_value_t = 4)]
        m: usize,
        /// Largest input size per party for random quantum protocols.
        #[arg(long, default_value_t = 2)]
        k: usize,
        /// Largest round count for random quantum protocols.
        #[arg(long, default_value_t = 4)]
        rounds: usize,
        #[arg(long, value_name = "PATH")]
        json: Option<PathBuf>,
        #[arg(long, value_name = "PATH")]
        csv: Option<PathBuf>,
    },
    /// Measure one cost of a protocol file.
    Measure {
        #[arg(long)]
        protocol: PathBuf,
        /// `uniform` or a distribution file.
        #[arg(long, default_value = "uniform")]
        dist: DistArg,
        #[arg(long, value_enum)]
        quantity: Quantity,
    },
    /// Embed a protocol along a spec and write the result.
    Embed {
        #[arg(long)]
        protocol: PathBuf,
        /// `sink:m` or a spec file.
        #[arg(long)]
        spec: SpecArg,
        /// Distribution of one coordinate pair: `uniform` or a 2x2 distribution file.
        #[arg(long, default_value = "uniform")]
        coords: DistArg,
        #[arg(long)]
        out: PathBuf,
    },
    /// Measure the main chain for a Sink∘Xor protocol through its embedding.
    Demo {
        #[arg(long, default_value_t = 3)]
        m: usize,
        /// Quantum protocol file; defaults to Alice sending her whole input.
        #[arg(long)]
        protocol: Option<PathBuf>,
        #[arg(long, value_name = "PATH")]
        json: Option<PathBuf>,
    },
}

fn run(cli: Cli) -> Result<bool> {
    match cli.command {
        Command::Verify {
            checks,
            seed,
            samples,
            m,
            k,
            rounds,
            json,
            csv,
        } => {
            let config = ExperimentConfig {
                samples,
                m,
                k,
                rounds,
                ..ExperimentConfig::with_seed(seed)
            };
            let reports = run_checks(&checks, &config)?;
            for r in &reports {
                println!("{}", r.summary());
            }
            if let Some(path) = json {
                write_json(&reports, path)?;
            }
            if let Some(path) = csv {
                write_csv(&reports, path)?;
            }
            let passed = reports.iter().filter(|r| r.pass).count();
            println!("{passed}/{} checks passed", reports.len());
            Ok(passed == reports.len())
        }
        Command::Measure {
            protocol,
            dist,
            quantity,
        } => {
            let p = LoadedProtocol::read(protocol)?;
            let (xs, ys) = p.domain();
            let mu = dist.load(xs, ys)?;
            println!("{quantity} = {}", measure(&p, &mu, quantity)?);
            Ok(true)
        }
        Command::Embed {
            protocol,
            spec,
            coords,
            out,
        } => {
            let p = LoadedProtocol::read(protocol)?;
            let mu1 = coords.load(2, 2)?;
            std::fs::write(&out, embed(&p, &spec, &mu1)? + "\n")?;
            println!("wrote {}", out.display());
            Ok(true)
        }
        Command::Demo { m, protocol, json } => {
            let p = match protocol {
                Some(path) => match LoadedProtocol::read(path)? {
                    LoadedProtocol::Quantum(p, _) => p,
                    LoadedProtocol::Classical(..) => {
                        return Err(HarnessError::Config("demo needs a quantum protocol".into()))
                    }
                },
                None => alice_sends_input(&sink_xor(m)?)?,
            };
            let report = main_theorem_demo(&p, m, &ExperimentConfig::default().tolerances)?;
            for s in &report.steps {
                let mark = if s.holds { "ok  " } else { "FAIL" };
                println!("{mark} {}: {:.6e} <= {:.6e}", s.name, s.lhs, s.rhs);
            }
            println!("{}", report.summary());
            if let Some(path) = json {
                std::fs::write(path, serde_json::to_string_pretty(&report)? + "\n")?;
            }
            Ok(report.pass)
        }
    }
}

fn main() -> ExitCode {
    match run(Cli::parse()) {
        Ok(true) => ExitCode::SUCCESS,
        Ok(false) => ExitCode::FAILURE,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(2)
        }
    }
}
