use std::path::PathBuf;

use anyhow::{bail, Result};
use clap::{Parser, Subcommand};
use esfv_core::cases::CASE_NAMES;

mod config;
mod run;
mod study;

use config::{Overrides, RunConfig};

/// Entropy-stable finite volumes for the barotropic Euler system.
#[derive(Debug, Parser)]
#[command(name = "esfv", version)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Run one case at one resolution.
    Run(Overrides),
    /// Run a resolution ladder and a Rusanov reference, then write report.csv.
    Study(Overrides),
    /// Rebuild report.csv of a finished study from its snapshots.
    Report {
        /// Study directory.
        #[arg(long)]
        out: PathBuf,
        /// Override the ensemble mode recorded in the study.
        #[arg(long)]
        ensemble: Option<String>,
    },
}

fn check_case_flag(o: &Overrides) -> Result<()> {
    if let Some(c) = &o.case {
        if !CASE_NAMES.contains(&c.as_str()) {
            bail!("unknown case '{c}' (expected one of {})", CASE_NAMES.join(", "));
        }
    }
    Ok(())
}

fn main() -> Result<()> {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("warn")).init();
    let cli = match Cli::try_parse() {
        Ok(c) => c,
        Err(e) => e.exit(),
    };
    match cli.command {
        Command::Run(o) => {
            check_case_flag(&o)?;
            let cfg = RunConfig::resolve(&o)?;
            let k = match cfg.k.as_slice() {
                [] => 64,
                [k] => *k,
                many => bail!("run takes a single resolution, got {many:?}"),
            };
            let case = cfg.case_spec()?;
            let dir = cfg.out.clone().unwrap_or_else(|| run::default_run_dir(&cfg, k));
            let out = run::execute(&cfg, &case, cfg.scheme, k, &dir)?;
            println!("{} steps to t = {}; output in {}", out.steps, out.state.time, dir.display());
        }
        Command::Study(o) => {
            check_case_flag(&o)?;
            let cfg = RunConfig::resolve(&o)?;
            let (dir, rows) = study::study(&cfg)?;
            print_rows(&rows);
            println!("report written to {}", dir.join(study::REPORT).display());
        }
        Command::Report { out, ensemble } => {
            let rows = study::report(&out, ensemble.as_deref())?;
            print_rows(&rows);
            println!("report written to {}", out.join(study::REPORT).display());
        }
    }
    Ok(())
}

fn print_rows(rows: &[esfv_core::analysis::ErrorRow]) {
    println!("{:>8} {:>6} {:>11} {:>11} {:>11} {:>11} {:>11} {:>11} {:>11}", "var", "k", "E1", "E2", "E3", "E4", "E5", "E6", "rel_ent_L1");
    for r in rows {
        print!("{:>8} {:>6}", r.variable, r.k);
        for e in r.errors {
            print!(" {e:>11.4e}");
        }
        println!(" {:>11.4e}", r.rel_entropy_l1);
    }
}
