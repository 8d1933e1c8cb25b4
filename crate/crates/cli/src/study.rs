//! Convergence studies: a ladder of runs against a Rusanov reference, and
//! the error report derived from them.

use std::fs;
use std::path::{Path, PathBuf};

use anyhow::{bail, Context, Result};
use esfv_core::analysis::{full_error_report, write_error_report_file, Ensemble, EnsembleMode, ErrorRow};
use esfv_core::state::State;
use ini::Ini;
use rayon::prelude::*;

use crate::config::{ensemble_name, parse_ensemble, RunConfig, SchemeKind};
use crate::run::{execute, load_run};

pub const STUDY_MANIFEST: &str = "study.ini";
pub const REPORT: &str = "report.csv";
pub const DEFAULT_LADDER: [usize; 3] = [32, 64, 128];

#[derive(Debug, Clone, PartialEq)]
pub struct StudyPlan {
    pub ladder: Vec<usize>,
    pub ref_k: usize,
    pub out: PathBuf,
}

impl StudyPlan {
    pub fn new(cfg: &RunConfig) -> Result<Self> {
        let ladder = if cfg.k.is_empty() { DEFAULT_LADDER.to_vec() } else { cfg.k.clone() };
        let max = *ladder.iter().max().expect("non-empty ladder");
        let ref_k = cfg.ref_k.unwrap_or(2 * max);
        if ladder.windows(2).any(|w| w[1] <= w[0]) {
            bail!("study resolutions must be strictly increasing, got {ladder:?}");
        }
        if ref_k < max {
            bail!("reference resolution {ref_k} is below the finest level {max}");
        }
        for &k in &ladder {
            if !ref_k.is_multiple_of(k) || !(ref_k / k).is_power_of_two() {
                bail!("resolution {k} does not divide the reference {ref_k} by a power of two");
            }
        }
        let out = cfg.out.clone().unwrap_or_else(|| PathBuf::from("studies").join(&cfg.case));
        Ok(StudyPlan { ladder, ref_k, out })
    }

    pub fn level_dir(k: usize) -> String {
        format!("k{k:04}")
    }

    pub fn reference_dir(&self) -> String {
        format!("ref{:04}", self.ref_k)
    }
}

fn study_manifest(cfg: &RunConfig, plan: &StudyPlan) -> Result<Ini> {
    let case = cfg.case_spec()?;
    let mut ini = cfg.manifest(&case, cfg.scheme, plan.ladder[0]);
    let ks: Vec<String> = plan.ladder.iter().map(|k| k.to_string()).collect();
    ini.with_section(Some("run")).set("k", ks.join(",")).set("ref_k", plan.ref_k.to_string());
    // the reference always runs the Rusanov scheme
    ini.with_section(Some("rusanov")).set("cfl", esfv_core::snapshot::fmt_f64(cfg.rusanov.cfl));
    ini.with_section(Some("run")).set("ensemble", ensemble_name(cfg.ensemble));
    let dirs: Vec<String> = plan.ladder.iter().map(|&k| StudyPlan::level_dir(k)).collect();
    ini.with_section(Some("layout")).set("levels", dirs.join(",")).set("reference", plan.reference_dir());
    Ok(ini)
}

/// Runs the ladder and the reference (in parallel on `threads` workers),
/// then writes `report.csv`. Finished run directories are kept if another run
/// fails.
pub fn study(cfg: &RunConfig) -> Result<(PathBuf, Vec<ErrorRow>)> {
    let plan = StudyPlan::new(cfg)?;
    let case = cfg.case_spec()?;
    fs::create_dir_all(&plan.out).with_context(|| format!("creating {}", plan.out.display()))?;
    study_manifest(cfg, &plan)?.write_to_file(plan.out.join(STUDY_MANIFEST))?;

    let mut jobs: Vec<(String, SchemeKind, usize)> =
        plan.ladder.iter().map(|&k| (StudyPlan::level_dir(k), cfg.scheme, k)).collect();
    jobs.push((plan.reference_dir(), SchemeKind::Rusanov, plan.ref_k));

    let pool = rayon::ThreadPoolBuilder::new().num_threads(cfg.threads).build()?;
    let results: Vec<Result<State>> = pool.install(|| {
        jobs.par_iter()
            .map(|(dir, kind, k)| execute(cfg, &case, *kind, *k, &plan.out.join(dir)).map(|o| o.state))
            .collect()
    });

    let mut states = Vec::with_capacity(results.len());
    let mut failures = Vec::new();
    for ((dir, _, _), r) in jobs.iter().zip(results) {
        match r {
            Ok(s) => states.push(s),
            Err(e) => failures.push(format!("{dir}: {e:#}")),
        }
    }
    if !failures.is_empty() {
        bail!(
            "{} of {} runs failed (finished runs kept in {}):\n  {}",
            failures.len(),
            jobs.len(),
            plan.out.display(),
            failures.join("\n  ")
        );
    }
    let reference = states.pop().expect("reference run");
    let levels = plan.ladder.iter().copied().zip(states).collect();
    let rows = report_from_states(levels, reference, cfg.ensemble, &case.eos)?;
    write_error_report_file(&rows, &plan.out.join(REPORT))?;
    Ok((plan.out, rows))
}

fn report_from_states(
    levels: Vec<(usize, State)>,
    reference: State,
    mode: EnsembleMode,
    eos: &esfv_core::Eos,
) -> Result<Vec<ErrorRow>> {
    let ensemble = Ensemble::new(levels, reference, mode)?;
    Ok(full_error_report(&ensemble, eos)?)
}

/// Re-derives `report.csv` of a finished study from its stored snapshots.
pub fn report(dir: &Path, mode_override: Option<&str>) -> Result<Vec<ErrorRow>> {
    let path = dir.join(STUDY_MANIFEST);
    let ini = Ini::load_from_file(&path).with_context(|| format!("reading {}", path.display()))?;
    let layout = ini.section(Some("layout")).with_context(|| format!("{} has no [layout] section", path.display()))?;
    let levels_spec = layout.get("levels").context("layout lacks 'levels'")?;
    let reference_dir = layout.get("reference").context("layout lacks 'reference'")?;
    let mode = match mode_override {
        Some(m) => parse_ensemble(m)?,
        None => parse_ensemble(ini.section(Some("run")).and_then(|s| s.get("ensemble")).unwrap_or("running"))?,
    };

    let (_, ref_case, _, reference) = load_run(&dir.join(reference_dir))?;
    let mut levels = Vec::new();
    for name in levels_spec.split(',').map(str::trim) {
        let (_, case, k, state) = load_run(&dir.join(name))?;
        if case.name != ref_case.name || case.kappa != ref_case.kappa {
            bail!("run {name} is a {} case but the reference is {}", case.name, ref_case.name);
        }
        levels.push((k, state));
    }
    let rows = report_from_states(levels, reference, mode, &ref_case.eos)?;
    write_error_report_file(&rows, &dir.join(REPORT))?;
    Ok(rows)
}
