//! A single run written to its own directory: `manifest.ini`, `log.csv`,
//! `snapshot_final.csv` and optional `snapshot_stepNNNNNN.csv`.

use std::fs::{self, File};
use std::io::BufWriter;
use std::path::{Path, PathBuf};

use anyhow::{Context, Result};
use esfv_core::cases::{boundary_disturbance, CaseSpec};
use esfv_core::driver::simulate;
use esfv_core::runlog::RunLogWriter;
use esfv_core::snapshot::{fmt_f64, read_snapshot_file, write_snapshot_file};
use esfv_core::state::State;
use ini::Ini;

use crate::config::{RunConfig, SchemeKind};

pub const MANIFEST: &str = "manifest.ini";
pub const LOG: &str = "log.csv";
pub const FINAL_SNAPSHOT: &str = "snapshot_final.csv";

/// Cells at each end of a 1D run watched for disturbances.
const BOUNDARY_WIDTH: usize = 4;
const BOUNDARY_TOLERANCE: f64 = 1e-6;

pub fn default_run_dir(cfg: &RunConfig, k: usize) -> PathBuf {
    PathBuf::from("runs").join(format!("{}-{}-k{k:04}", cfg.case, cfg.scheme.name()))
}

#[derive(Debug)]
pub struct RunOutput {
    pub state: State,
    pub steps: usize,
}

/// Runs `case` at resolution `k` with `kind` and writes everything to `dir`.
/// The manifest is written up front and the log is flushed on failure, so an
/// aborted run leaves what it had produced.
pub fn execute(cfg: &RunConfig, case: &CaseSpec, kind: SchemeKind, k: usize, dir: &Path) -> Result<RunOutput> {
    fs::create_dir_all(dir).with_context(|| format!("creating {}", dir.display()))?;
    let mut manifest = cfg.manifest(case, kind, k);
    let manifest_path = dir.join(MANIFEST);
    manifest.write_to_file(&manifest_path)?;

    let initial = case.initial_state(k)?;
    let mut log = RunLogWriter::new(BufWriter::new(File::create(dir.join(LOG))?))?;
    if cfg.snapshots > 0 {
        write_snapshot_file(&initial, &case.eos, &dir.join(step_snapshot_name(0)))?;
    }
    log::info!("{} {} k={k}: t_end {}", case.name, kind.name(), case.t_end);
    let result = simulate(initial, &case.eos, cfg.scheme_for(kind), case.t_end, |ev| {
        log.write(ev.step, ev.diagnostics)?;
        log::debug!("step {} t {} dt {:.3e} newton {}", ev.step, ev.new.time, ev.diagnostics.dt, ev.diagnostics.newton_iterations);
        if cfg.snapshots > 0 && ev.step % cfg.snapshots == 0 && ev.new.time < case.t_end {
            write_snapshot_file(ev.new, &case.eos, &dir.join(step_snapshot_name(ev.step)))?;
        }
        Ok(())
    });
    log.flush()?;
    let summary = result.with_context(|| format!("{} {} k={k} failed; partial log in {}", case.name, kind.name(), dir.display()))?;

    write_snapshot_file(&summary.state, &case.eos, &dir.join(FINAL_SNAPSHOT))?;
    manifest
        .with_section(Some("result"))
        .set("steps", summary.steps.to_string())
        .set("final_time", fmt_f64(summary.state.time))
        .set("snapshot", FINAL_SNAPSHOT);
    manifest.write_to_file(&manifest_path)?;

    if case.dim == 1 {
        let d = boundary_disturbance(case, &summary.state, BOUNDARY_WIDTH)?;
        if d > BOUNDARY_TOLERANCE {
            log::warn!(
                "{} k={k}: density near the periodic boundary changed by {:.2e} (relative); waves have reached or started at the wrap point",
                case.name,
                d
            );
        }
    }
    Ok(RunOutput { state: summary.state, steps: summary.steps })
}

fn step_snapshot_name(step: usize) -> String {
    format!("snapshot_step{step:06}.csv")
}

/// Loads the final state of a finished run directory together with the
/// configuration that produced it.
pub fn load_run(dir: &Path) -> Result<(RunConfig, CaseSpec, usize, State)> {
    let path = dir.join(MANIFEST);
    let ini = Ini::load_from_file(&path).with_context(|| format!("reading {}", path.display()))?;
    let mut cfg = RunConfig::default();
    cfg.apply_ini(&ini).with_context(|| format!("in {}", path.display()))?;
    let case = cfg.case_spec()?;
    let k = match cfg.k.as_slice() {
        [k] => *k,
        _ => anyhow::bail!("{} must name exactly one resolution", path.display()),
    };
    let snapshot = ini
        .section(Some("result"))
        .and_then(|s| s.get("snapshot"))
        .with_context(|| format!("{} has no finished result; the run did not complete", path.display()))?;
    let state = read_snapshot_file(&dir.join(snapshot), Some(case.mesh(k)?), case.t_end)
        .with_context(|| format!("reading snapshot in {}", dir.display()))?;
    Ok((cfg, case, k, state))
}
