use std::fs;
use std::path::PathBuf;
use std::process::ExitCode;

use anyhow::{Context, Result};
use clap::{Parser, Subcommand};
use serde_json::json;

use supergraph::combinatorics::h_f_exact;
use supergraph::harness::{emit_outputs, run_campaign_with, verify_all, RunOptions};
use supergraph::limits::expected_polychromatic;
use supergraph::{CampaignConfig, Motif};

#[derive(Parser)]
#[command(name = "supergraph", version, about = "Motif counts in superpositions of random graphs")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Run a replicate campaign and write its artifacts.
    Run {
        #[arg(long)]
        config: PathBuf,
        /// Master seed; overrides the config.
        #[arg(long, env = "SUPERGRAPH_SEED")]
        seed: Option<u64>,
        #[arg(long)]
        threads: Option<usize>,
        /// Output directory; defaults to the config's `output_dir`, then `out`.
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Run the combinatorial verification battery.
    Verify,
    /// Print structural facts about a motif (built-in name or motif file).
    MotifInfo { motif: String },
    /// Evaluate the polychromatic overlap term for a config.
    Hf {
        #[arg(long)]
        config: PathBuf,
    },
}

fn load_config(path: &PathBuf) -> Result<CampaignConfig> {
    let text = fs::read_to_string(path).with_context(|| format!("reading {}", path.display()))?;
    Ok(CampaignConfig::from_json(&text)?)
}

fn main() -> ExitCode {
    match dispatch(Cli::parse()) {
        Ok(code) => code,
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::from(2)
        }
    }
}

fn dispatch(cli: Cli) -> Result<ExitCode> {
    match cli.command {
        Command::Run { config, seed, threads, out } => {
            let mut config = load_config(&config)?;
            if let Some(seed) = seed {
                config.seed = seed;
            }
            let dir = out.or_else(|| config.output_dir.clone()).unwrap_or_else(|| PathBuf::from("out"));
            let options = RunOptions { threads, incremental_csv: Some(dir.join("replicates.csv")) };
            let result = run_campaign_with(&config, &options)?;
            let manifest = emit_outputs(&result, &dir)?;
            for w in &result.summary.warnings {
                eprintln!("warning: {w}");
            }
            println!("{} replicates written to {}", result.records.len(), dir.display());
            for f in &manifest.files {
                println!("  {}  {}", f.sha256, f.path);
            }
            Ok(ExitCode::SUCCESS)
        }
        Command::Verify => {
            let report = verify_all();
            for c in &report.checks {
                println!("[{}] {}: {}", if c.passed { "PASS" } else { "FAIL" }, c.name, c.detail);
            }
            Ok(if report.passed() { ExitCode::SUCCESS } else { ExitCode::FAILURE })
        }
        Command::MotifInfo { motif } => {
            let parsed = match Motif::parse(&motif) {
                Ok(m) => m,
                Err(_) if fs::metadata(&motif).is_ok() => Motif::parse(&fs::read_to_string(&motif)?)?,
                Err(e) => return Err(e.into()),
            };
            println!("{}", serde_json::to_string_pretty(&parsed.summary())?);
            Ok(ExitCode::SUCCESS)
        }
        Command::Hf { config } => {
            let config = load_config(&config)?;
            config.validate()?;
            let motif = config.motif()?;
            let m = config.layers();
            let h_f = h_f_exact(&motif, config.n, m, &config.law)?;
            let out = json!({
                "n": config.n,
                "m": m,
                "h_f": h_f,
                "expected_polychromatic": expected_polychromatic(&motif, config.n, h_f),
            });
            println!("{}", serde_json::to_string_pretty(&out)?);
            Ok(ExitCode::SUCCESS)
        }
    }
}
