//! Run and study configuration: built-in defaults, then an INI file, then
//! command-line flags.

use std::path::{Path, PathBuf};

use anyhow::{bail, Context, Result};
use esfv_core::analysis::EnsembleMode;
use esfv_core::cases::{self, CaseSpec};
use esfv_core::driver::Scheme;
use esfv_core::rusanov::RusanovParams;
use esfv_core::snapshot::fmt_f64;
use esfv_core::stab::StabParams;
use ini::Ini;

#[derive(Debug, Clone, Copy, PartialEq, Eq, clap::ValueEnum)]
pub enum SchemeKind {
    Stab,
    Rusanov,
}

impl SchemeKind {
    pub fn name(self) -> &'static str {
        match self {
            SchemeKind::Stab => "stab",
            SchemeKind::Rusanov => "rusanov",
        }
    }

    fn parse(s: &str) -> Result<Self> {
        match s {
            "stab" => Ok(SchemeKind::Stab),
            "rusanov" => Ok(SchemeKind::Rusanov),
            other => bail!("unknown scheme '{other}' (expected stab or rusanov)"),
        }
    }
}

pub fn ensemble_name(mode: EnsembleMode) -> &'static str {
    match mode {
        EnsembleMode::Running => "running",
        EnsembleMode::Single => "single",
    }
}

pub fn parse_ensemble(s: &str) -> Result<EnsembleMode> {
    match s {
        "running" => Ok(EnsembleMode::Running),
        "single" => Ok(EnsembleMode::Single),
        other => bail!("unknown ensemble mode '{other}' (expected running or single)"),
    }
}

/// Values given on the command line; `None` leaves the file or default value.
#[derive(Debug, Clone, Default, clap::Args)]
pub struct Overrides {
    /// INI file with the same keys as the flags (`eta_safety`, `ref_k`, ...).
    #[arg(long)]
    pub config: Option<PathBuf>,
    /// cylindrical-explosion, kelvin-helmholtz or delta-shock.
    #[arg(long)]
    pub case: Option<String>,
    /// Pressure scale of the delta-shock case.
    #[arg(long)]
    pub kappa: Option<f64>,
    /// Time-stepping scheme; a study always uses rusanov for its reference.
    #[arg(long, value_enum)]
    pub scheme: Option<SchemeKind>,
    /// Cells per axis; a comma-separated ladder for `study`.
    #[arg(long, value_delimiter = ',')]
    pub k: Option<Vec<usize>>,
    /// Reference resolution of a study.
    #[arg(long)]
    pub ref_k: Option<usize>,
    /// CFL number (rusanov) or safety factor on the admissible step (stab).
    #[arg(long)]
    pub cfl: Option<f64>,
    /// Factor on 1/min density giving the stabilization parameter (stab).
    #[arg(long)]
    pub eta_safety: Option<f64>,
    /// Newton stopping tolerance in density units (stab).
    #[arg(long)]
    pub newton_tol: Option<f64>,
    /// Final time; defaults to the case's.
    #[arg(long)]
    pub t_end: Option<f64>,
    /// Output directory.
    #[arg(long)]
    pub out: Option<PathBuf>,
    /// Write a snapshot every n steps besides the final one; 0 for final only.
    #[arg(long)]
    pub snapshots: Option<usize>,
    /// Worker threads for a study; 0 picks the number of cores.
    #[arg(long)]
    pub threads: Option<usize>,
    /// How a study builds its ensembles: running or single.
    #[arg(long)]
    pub ensemble: Option<String>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct RunConfig {
    pub case: String,
    pub kappa: Option<f64>,
    pub scheme: SchemeKind,
    pub k: Vec<usize>,
    pub ref_k: Option<usize>,
    pub stab: StabParams,
    pub rusanov: RusanovParams,
    pub t_end: Option<f64>,
    pub out: Option<PathBuf>,
    pub snapshots: usize,
    pub threads: usize,
    pub ensemble: EnsembleMode,
}

impl Default for RunConfig {
    fn default() -> Self {
        RunConfig {
            case: "delta-shock".into(),
            kappa: None,
            scheme: SchemeKind::Stab,
            k: Vec::new(),
            ref_k: None,
            stab: StabParams::default(),
            rusanov: RusanovParams::default(),
            t_end: None,
            out: None,
            snapshots: 0,
            threads: 0,
            ensemble: EnsembleMode::Running,
        }
    }
}

const GENERAL_SECTIONS: [Option<&str>; 3] = [None, Some("run"), Some("study")];
const IGNORED_SECTIONS: [&str; 4] = ["eos", "domain", "result", "layout"];

fn parse_num<T: std::str::FromStr>(key: &str, value: &str) -> Result<T> {
    value.trim().parse().ok().with_context(|| format!("key '{key}': cannot parse '{value}'"))
}

impl RunConfig {
    /// Defaults, overlaid with the INI file named by `--config`, then the flags.
    pub fn resolve(flags: &Overrides) -> Result<Self> {
        let mut cfg = RunConfig::default();
        if let Some(path) = &flags.config {
            cfg.apply_file(path)?;
        }
        cfg.apply_flags(flags)?;
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn apply_file(&mut self, path: &Path) -> Result<()> {
        let ini = Ini::load_from_file(path).with_context(|| format!("reading config {}", path.display()))?;
        self.apply_ini(&ini).with_context(|| format!("in config {}", path.display()))
    }

    pub fn apply_ini(&mut self, ini: &Ini) -> Result<()> {
        for (section, props) in ini.iter() {
            if section.is_some_and(|s| IGNORED_SECTIONS.contains(&s)) {
                continue;
            }
            for (key, value) in props.iter() {
                self.apply_key(section, key, value)?;
            }
        }
        Ok(())
    }

    fn apply_key(&mut self, section: Option<&str>, key: &str, value: &str) -> Result<()> {
        let v = value.trim();
        match (section, key) {
            (Some("stab") | None, "eta_safety") => self.stab.eta_safety = parse_num(key, v)?,
            (Some("stab") | None, "cfl_safety") => self.stab.cfl_safety = parse_num(key, v)?,
            (Some("stab") | None, "newton_tol") => self.stab.newton_tol = parse_num(key, v)?,
            (Some("stab") | None, "newton_max_iter") => self.stab.newton_max_iter = parse_num(key, v)?,
            (Some("stab") | None, "dt_retry_max") => self.stab.dt_retry_max = parse_num(key, v)?,
            (Some("rusanov"), "cfl") | (None, "rusanov_cfl") => self.rusanov.cfl = parse_num(key, v)?,
            (s, _) if GENERAL_SECTIONS.contains(&s) => match key {
                "case" => self.case = v.to_string(),
                "kappa" => self.kappa = if v.is_empty() { None } else { Some(parse_num(key, v)?) },
                "scheme" => self.scheme = SchemeKind::parse(v)?,
                "k" => {
                    self.k = v.split(',').map(|x| parse_num(key, x)).collect::<Result<_>>()?;
                }
                "ref_k" => self.ref_k = Some(parse_num(key, v)?),
                "t_end" => self.t_end = Some(parse_num(key, v)?),
                "out" => self.out = Some(PathBuf::from(v)),
                "snapshots" => self.snapshots = parse_num(key, v)?,
                "threads" => self.threads = parse_num(key, v)?,
                "ensemble" => self.ensemble = parse_ensemble(v)?,
                _ => bail!("unknown key '{key}'"),
            },
            (Some(s), _) => bail!("unknown key '{key}' in section [{s}]"),
            (None, _) => bail!("unknown key '{key}'"),
        }
        Ok(())
    }

    pub fn apply_flags(&mut self, f: &Overrides) -> Result<()> {
        if let Some(c) = &f.case {
            self.case = c.clone();
        }
        if f.kappa.is_some() {
            self.kappa = f.kappa;
        }
        if let Some(s) = f.scheme {
            self.scheme = s;
        }
        if let Some(k) = &f.k {
            self.k = k.clone();
        }
        if f.ref_k.is_some() {
            self.ref_k = f.ref_k;
        }
        if let Some(c) = f.cfl {
            match self.scheme {
                SchemeKind::Stab => self.stab.cfl_safety = c,
                SchemeKind::Rusanov => self.rusanov.cfl = c,
            }
        }
        if let Some(e) = f.eta_safety {
            self.stab.eta_safety = e;
        }
        if let Some(t) = f.newton_tol {
            self.stab.newton_tol = t;
        }
        if f.t_end.is_some() {
            self.t_end = f.t_end;
        }
        if f.out.is_some() {
            self.out = f.out.clone();
        }
        if let Some(n) = f.snapshots {
            self.snapshots = n;
        }
        if let Some(n) = f.threads {
            self.threads = n;
        }
        if let Some(e) = &f.ensemble {
            self.ensemble = parse_ensemble(e)?;
        }
        Ok(())
    }

    pub fn validate(&self) -> Result<()> {
        self.case_spec()?;
        self.stab.validate()?;
        self.rusanov.validate()?;
        if let Some(t) = self.t_end {
            if !(t > 0.0 && t.is_finite()) {
                bail!("t_end must be positive, got {t}");
            }
        }
        if self.k.contains(&0) || self.ref_k == Some(0) {
            bail!("resolutions must be positive");
        }
        Ok(())
    }

    /// The benchmark with the final-time override applied.
    pub fn case_spec(&self) -> Result<CaseSpec> {
        if self.kappa.is_some() && self.case != "delta-shock" {
            bail!("--kappa only applies to the delta-shock case");
        }
        let mut case = cases::by_name(&self.case, self.kappa)?;
        if let Some(t) = self.t_end {
            case.t_end = t;
        }
        Ok(case)
    }

    pub fn scheme_for(&self, kind: SchemeKind) -> Scheme {
        match kind {
            SchemeKind::Stab => Scheme::Stab(self.stab),
            SchemeKind::Rusanov => Scheme::Rusanov(self.rusanov),
        }
    }

    /// Everything needed to repeat a single run at resolution `k` with scheme
    /// `kind`; readable again through `--config`.
    pub fn manifest(&self, case: &CaseSpec, kind: SchemeKind, k: usize) -> Ini {
        let mut ini = Ini::new();
        ini.with_section(Some("run"))
            .set("case", case.name)
            .set("kappa", case.kappa.map(fmt_f64).unwrap_or_default())
            .set("scheme", kind.name())
            .set("k", k.to_string())
            .set("t_end", fmt_f64(case.t_end))
            .set("snapshots", self.snapshots.to_string());
        match kind {
            SchemeKind::Stab => {
                ini.with_section(Some("stab"))
                    .set("eta_safety", fmt_f64(self.stab.eta_safety))
                    .set("cfl_safety", fmt_f64(self.stab.cfl_safety))
                    .set("newton_tol", fmt_f64(self.stab.newton_tol))
                    .set("newton_max_iter", self.stab.newton_max_iter.to_string())
                    .set("dt_retry_max", self.stab.dt_retry_max.to_string());
            }
            SchemeKind::Rusanov => {
                ini.with_section(Some("rusanov")).set("cfl", fmt_f64(self.rusanov.cfl));
            }
        }
        ini.with_section(Some("eos")).set("a", fmt_f64(case.eos.a())).set("gamma", fmt_f64(case.eos.gamma()));
        ini.with_section(Some("domain"))
            .set("dim", case.dim.to_string())
            .set("lower", fmt_f64(case.lower))
            .set("upper", fmt_f64(case.upper));
        ini
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn flags_win_over_file() {
        let ini = Ini::load_from_str("case = kelvin-helmholtz\nk = 16\n[stab]\neta_safety = 2\n[rusanov]\ncfl = 0.3\n").unwrap();
        let mut cfg = RunConfig::default();
        cfg.apply_ini(&ini).unwrap();
        assert_eq!(cfg.case, "kelvin-helmholtz");
        assert_eq!(cfg.k, vec![16]);
        assert_eq!(cfg.stab.eta_safety, 2.0);
        assert_eq!(cfg.rusanov.cfl, 0.3);
        let flags = Overrides { k: Some(vec![32, 64]), eta_safety: Some(1.5), ..Default::default() };
        cfg.apply_flags(&flags).unwrap();
        assert_eq!(cfg.k, vec![32, 64]);
        assert_eq!(cfg.stab.eta_safety, 1.5);
    }

    #[test]
    fn cfl_follows_the_scheme() {
        let mut cfg = RunConfig::default();
        cfg.apply_flags(&Overrides { scheme: Some(SchemeKind::Rusanov), cfl: Some(0.2), ..Default::default() }).unwrap();
        assert_eq!(cfg.rusanov.cfl, 0.2);
        assert_eq!(cfg.stab.cfl_safety, StabParams::default().cfl_safety);
    }

    #[test]
    fn bad_keys_and_values_rejected() {
        let mut cfg = RunConfig::default();
        assert!(cfg.apply_ini(&Ini::load_from_str("kk = 1\n").unwrap()).is_err());
        assert!(cfg.apply_ini(&Ini::load_from_str("[stab]\ncase = x\n").unwrap()).is_err());
        assert!(cfg.apply_ini(&Ini::load_from_str("k = many\n").unwrap()).is_err());
        let mut cfg = RunConfig { case: "sod".into(), ..Default::default() };
        assert!(cfg.validate().is_err());
        cfg.case = "kelvin-helmholtz".into();
        cfg.kappa = Some(1.0);
        assert!(cfg.validate().is_err());
    }

    #[test]
    fn manifest_reads_back_as_config() {
        let cfg = RunConfig { case: "delta-shock".into(), kappa: Some(0.01), stab: StabParams { eta_safety: 1.3, ..Default::default() }, ..Default::default() };
        let case = cfg.case_spec().unwrap();
        let ini = cfg.manifest(&case, SchemeKind::Stab, 64);
        let mut back = RunConfig::default();
        back.apply_ini(&ini).unwrap();
        assert_eq!(back.kappa, Some(0.01));
        assert_eq!(back.k, vec![64]);
        assert_eq!(back.stab, cfg.stab);
        assert_eq!(back.t_end, Some(0.2));
    }
}
