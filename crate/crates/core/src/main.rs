use std::io::Read;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use anyhow::{bail, Context, Result};
use clap::{Parser, Subcommand};
use serde::Serialize;

use ccndtn::metrics::collect_metrics;
use ccndtn::scenario::{
    builtin, builtin_names, random_scenario, resolve_scenario, run_scenario_with_seed, RandomParams, Scenario,
    ScenarioError,
};
use ccndtn::sweep::{run_batch, run_batch_sequential, seed_variants};
use ccndtn::trace::Trace;
use ccndtn::wire::{decode_frame, dump_frame, parse_hex};

#[derive(Parser)]
#[command(name = "ccndtn", version, about = "CCN over DTN bundle protocol simulator")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Run one scenario (a built-in name or a TOML file).
    Run {
        #[arg(long)]
        scenario: String,
        /// Overrides the scenario's seed.
        #[arg(long)]
        seed: Option<u64>,
        /// Write the JSONL trace here.
        #[arg(long)]
        trace: Option<PathBuf>,
        /// Write metrics JSON here instead of stdout.
        #[arg(long)]
        metrics: Option<PathBuf>,
    },
    /// Parse and validate a scenario file.
    Validate { file: PathBuf },
    /// List built-in scenarios.
    ListScenarios,
    /// Wire-format tools.
    Wire {
        #[command(subcommand)]
        command: WireCommand,
    },
    /// Run many independent scenarios and print one JSON summary per run.
    Sweep {
        /// Scenario to re-run under each seed in `--seeds`.
        #[arg(long, conflicts_with = "random")]
        scenario: Option<String>,
        /// Seed range `FROM..TO` (exclusive end).
        #[arg(long, default_value = "0..10")]
        seeds: String,
        /// Generate this many random scenarios instead.
        #[arg(long)]
        random: Option<u64>,
        /// Hop limit for generated scenarios.
        #[arg(long, default_value_t = 8)]
        hop_limit: u64,
        /// Run on one thread.
        #[arg(long)]
        sequential: bool,
    },
    /// Recompute metrics from a saved trace.
    Metrics { trace: PathBuf },
}

#[derive(Subcommand)]
enum WireCommand {
    /// Decode a hex-encoded frame (`-` reads stdin) and print its fields.
    Dump { hexfile: String },
}

enum Failure {
    Validation(anyhow::Error),
    Runtime(anyhow::Error),
}

impl From<anyhow::Error> for Failure {
    fn from(e: anyhow::Error) -> Self {
        match e.downcast_ref::<ScenarioError>() {
            Some(ScenarioError::Parse(_) | ScenarioError::Invalid { .. } | ScenarioError::UnknownBuiltin(_)) => {
                Failure::Validation(e)
            }
            _ => Failure::Runtime(e),
        }
    }
}

fn write_or_print(path: Option<&Path>, text: &str) -> Result<()> {
    match path {
        Some(p) => std::fs::write(p, text).with_context(|| format!("writing {}", p.display())),
        None => {
            print!("{text}");
            Ok(())
        }
    }
}

fn parse_range(text: &str) -> Result<std::ops::Range<u64>> {
    let (a, b) = text.split_once("..").context("expected FROM..TO")?;
    let range = a.trim().parse()?..b.trim().parse()?;
    if range.is_empty() {
        bail!("empty seed range {text}");
    }
    Ok(range)
}

#[derive(Serialize)]
struct SweepLine<'a> {
    scenario: &'a str,
    seed: u64,
    requests: u64,
    delivered: u64,
    delivery_ratio: f64,
    mean_delivery_delay_ms: Option<f64>,
    interest_transmissions: u64,
    bundle_transmissions: u64,
}

fn run(cli: Cli) -> Result<(), Failure> {
    match cli.command {
        Command::Run {
            scenario,
            seed,
            trace,
            metrics,
        } => {
            let s = resolve_scenario(&scenario).map_err(anyhow::Error::from)?;
            let out = run_scenario_with_seed(&s, seed.unwrap_or(s.seed));
            if let Some(path) = &trace {
                std::fs::write(path, out.trace.to_jsonl())
                    .with_context(|| format!("writing {}", path.display()))?;
            }
            write_or_print(metrics.as_deref(), &out.metrics.to_json())?;
            eprintln!(
                "{}: {} events, {} trace records, delivery ratio {}",
                s.name,
                out.summary.executed,
                out.trace.len(),
                out.metrics.delivery_ratio
            );
        }
        Command::Validate { file } => {
            let s = resolve_scenario(&file.to_string_lossy()).map_err(anyhow::Error::from)?;
            println!(
                "ok: {} ({} nodes, {} links, {} routes, {} workload actions)",
                s.name,
                s.nodes.len(),
                s.links.len(),
                s.routes.len(),
                s.workload.len()
            );
        }
        Command::ListScenarios => {
            for name in builtin_names() {
                let s = Scenario::from_toml(builtin(name).expect("listed")).map_err(anyhow::Error::from)?;
                println!("{name:<14} {}", s.description);
            }
        }
        Command::Wire {
            command: WireCommand::Dump { hexfile },
        } => {
            let text = if hexfile == "-" {
                let mut s = String::new();
                std::io::stdin().read_to_string(&mut s).context("reading stdin")?;
                s
            } else {
                std::fs::read_to_string(&hexfile).with_context(|| format!("reading {hexfile}"))?
            };
            let bytes = parse_hex(&text).map_err(anyhow::Error::msg)?;
            let frame = decode_frame(&bytes).context("decoding frame")?;
            print!("{}", dump_frame(&frame));
        }
        Command::Sweep {
            scenario,
            seeds,
            random,
            hop_limit,
            sequential,
        } => {
            let scenarios: Vec<Scenario> = match (scenario, random) {
                (_, Some(count)) => (0..count)
                    .map(|seed| {
                        random_scenario(
                            seed,
                            RandomParams {
                                hop_limit,
                                ..RandomParams::default()
                            },
                        )
                    })
                    .collect(),
                (Some(name), None) => {
                    let base = resolve_scenario(&name).map_err(anyhow::Error::from)?;
                    seed_variants(&base, parse_range(&seeds)?)
                }
                (None, None) => return Err(Failure::Runtime(anyhow::anyhow!("pass --scenario or --random"))),
            };
            let outputs = if sequential {
                run_batch_sequential(&scenarios)
            } else {
                run_batch(&scenarios)
            };
            for (s, out) in scenarios.iter().zip(&outputs) {
                let m = &out.metrics;
                let line = SweepLine {
                    scenario: &s.name,
                    seed: s.seed,
                    requests: m.requests,
                    delivered: m.delivered,
                    delivery_ratio: m.delivery_ratio,
                    mean_delivery_delay_ms: m.mean_delivery_delay_ms,
                    interest_transmissions: m.interest_transmissions,
                    bundle_transmissions: m.bundle_transmissions,
                };
                println!("{}", serde_json::to_string(&line).context("encoding summary")?);
            }
        }
        Command::Metrics { trace } => {
            let text = std::fs::read_to_string(&trace).with_context(|| format!("reading {}", trace.display()))?;
            let parsed = Trace::from_jsonl(&text).map_err(anyhow::Error::msg)?;
            print!("{}", collect_metrics(&parsed).to_json());
        }
    }
    Ok(())
}

fn main() -> ExitCode {
    match run(Cli::parse()) {
        Ok(()) => ExitCode::SUCCESS,
        Err(Failure::Validation(e)) => {
            eprintln!("error: {e:#}");
            ExitCode::from(2)
        }
        Err(Failure::Runtime(e)) => {
            eprintln!("error: {e:#}");
            ExitCode::from(1)
        }
    }
}
