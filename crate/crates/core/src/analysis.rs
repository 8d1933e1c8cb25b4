//! Multi-resolution comparison: injection onto a common grid, Cesàro
//! averages and first variances over the refinement sequence, per-cell
//! Wasserstein distances between the averaged Dirac measures, relative
//! entropy and the resulting E1-E6 error table.

use std::io::{Read, Write};
use std::path::Path;
use std::sync::Arc;

use crate::eos::Eos;
use crate::error::{invalid, Error, Result};
use crate::field::{CellField, CellVectorField};
use crate::mesh::StructuredMesh;
use crate::state::State;

/// Piecewise-constant prolongation of `coarse` onto the dyadic refinement `fine`.
pub fn inject_to_fine(coarse: &CellField, fine: &Arc<StructuredMesh>) -> Result<CellField> {
    let cm = coarse.mesh();
    let factors = match cm.refinement_factors(fine) {
        Some(f) => f,
        None => {
            return invalid(format!(
                "mesh {:?} is not a dyadic refinement of {:?}",
                fine.cells_per_axis(),
                cm.cells_per_axis()
            ))
        }
    };
    Ok(CellField::from_fn(fine.clone(), |cell| {
        let mut idx = fine.multi_index(cell);
        for d in 0..fine.dim() {
            idx[d] /= factors[d];
        }
        coarse[cm.linear_index(&idx[..fine.dim()])]
    }))
}

fn check_members(members: &[CellField]) -> Result<()> {
    let Some(first) = members.first() else {
        return invalid("empty ensemble prefix");
    };
    if members.iter().any(|m| m.mesh() != first.mesh()) {
        return invalid("ensemble members live on different meshes");
    }
    Ok(())
}

/// Arithmetic mean of `members`, cell by cell.
pub fn cesaro_average(members: &[CellField]) -> Result<CellField> {
    check_members(members)?;
    let n = members.len() as f64;
    Ok(CellField::from_fn(members[0].mesh().clone(), |k| {
        members.iter().map(|m| m[k]).sum::<f64>() / n
    }))
}

/// `Ũ_n = (1/n) Σ_{j≤n} |U_j - Ū_j|` with `Ū_j` the running Cesàro average.
pub fn first_variance_field(members: &[CellField]) -> Result<CellField> {
    check_members(members)?;
    let mesh = members[0].mesh().clone();
    let cells = mesh.n_cells();
    let mut running = vec![0.0; cells];
    let mut acc = vec![0.0; cells];
    for (j, member) in members.iter().enumerate() {
        let count = (j + 1) as f64;
        for k in 0..cells {
            running[k] += member[k];
            acc[k] += (member[k] - running[k] / count).abs();
        }
    }
    let n = members.len() as f64;
    CellField::new(mesh, acc.into_iter().map(|a| a / n).collect())
}

/// L1 norm of [`first_variance_field`].
pub fn first_variance(members: &[CellField]) -> Result<f64> {
    Ok(lp_norm(&first_variance_field(members)?, 1.0))
}

/// `(Σ_K |K| |q_K|^p)^(1/p)`
pub fn lp_norm(field: &CellField, p: f64) -> f64 {
    let vol = field.mesh().cell_volume();
    if p == 1.0 {
        return field.values().iter().map(|q| vol * q.abs()).sum();
    }
    let s: f64 = field.values().iter().map(|q| vol * q.abs().powf(p)).sum();
    s.powf(1.0 / p)
}

/// A probability measure on the line made of finitely many weighted atoms.
#[derive(Debug, Clone, PartialEq)]
pub struct AtomicMeasure {
    atoms: Vec<(f64, f64)>,
}

const WEIGHT_TOL: f64 = 1e-12;

impl AtomicMeasure {
    /// `atoms` as `(location, weight)`; weights must be non-negative and sum to one.
    pub fn new(atoms: Vec<(f64, f64)>) -> Result<Self> {
        if atoms.is_empty() {
            return invalid("atomic measure without atoms");
        }
        if let Some((x, w)) = atoms.iter().find(|(x, w)| !(*w >= 0.0) || !x.is_finite()) {
            return invalid(format!("invalid atom ({x}, {w})"));
        }
        let total: f64 = atoms.iter().map(|a| a.1).sum();
        if (total - 1.0).abs() > WEIGHT_TOL {
            return invalid(format!("weights sum to {total}, not 1"));
        }
        Ok(AtomicMeasure { atoms })
    }

    /// Equal-weight empirical measure `(1/n) Σ δ_{x_i}`.
    pub fn empirical(locations: &[f64]) -> Result<Self> {
        let w = 1.0 / locations.len() as f64;
        if locations.is_empty() {
            return invalid("atomic measure without atoms");
        }
        Ok(AtomicMeasure { atoms: locations.iter().map(|&x| (x, w)).collect() })
    }

    pub fn atoms(&self) -> &[(f64, f64)] {
        &self.atoms
    }

    fn sorted(&self) -> Vec<(f64, f64)> {
        let mut a: Vec<_> = self.atoms.iter().copied().filter(|a| a.1 > 0.0).collect();
        a.sort_by(|x, y| x.0.total_cmp(&y.0));
        a
    }
}

/// `W_s(μ, ν)` on the line, by integrating `|F_μ⁻¹ - F_ν⁻¹|^s` over `(0, 1)`.
pub fn wasserstein_1d(mu: &AtomicMeasure, nu: &AtomicMeasure, s: f64) -> Result<f64> {
    if !(s >= 1.0) {
        return invalid(format!("Wasserstein order must be >= 1, got {s}"));
    }
    let a = mu.sorted();
    let b = nu.sorted();
    let (mut i, mut j) = (0, 0);
    let (mut wa, mut wb) = (a[0].1, b[0].1);
    let mut total = 0.0;
    while i < a.len() && j < b.len() {
        let d = (a[i].0 - b[j].0).abs();
        let cost = if s == 1.0 { d } else { d.powf(s) };
        if wa <= wb {
            total += wa * cost;
            wb -= wa;
            i += 1;
            wa = a.get(i).map_or(0.0, |x| x.1);
            if wb == 0.0 {
                j += 1;
                wb = b.get(j).map_or(0.0, |x| x.1);
            }
        } else {
            total += wb * cost;
            wa -= wb;
            j += 1;
            wb = b.get(j).map_or(0.0, |x| x.1);
        }
    }
    Ok(if s == 1.0 { total } else { total.powf(1.0 / s) })
}

/// Sorted equal-weight samples; `W_1` between two of them.
fn empirical_w1(a: &mut [f64], b: &mut [f64]) -> f64 {
    a.sort_by(f64::total_cmp);
    b.sort_by(f64::total_cmp);
    let (na, nb) = (a.len() as f64, b.len() as f64);
    // merge on the common grid of breakpoints i/na and j/nb
    let (mut i, mut j) = (0, 0);
    let (mut t, mut total) = (0.0f64, 0.0);
    while i < a.len() && j < b.len() {
        let ta = (i + 1) as f64 / na;
        let tb = (j + 1) as f64 / nb;
        let next = ta.min(tb);
        total += (next - t) * (a[i] - b[j]).abs();
        t = next;
        if ta <= tb {
            i += 1;
        }
        if tb <= ta {
            j += 1;
        }
    }
    total
}

/// Per cell `½ρ|m/ρ - U|² + ψ(ρ) - ψ(r) - ψ'(r)(ρ - r)`.
pub fn relative_entropy_field(
    rho: &CellField,
    m: &CellVectorField,
    r: &CellField,
    u_ref: &CellVectorField,
    eos: &Eos,
) -> Result<CellField> {
    if rho.mesh() != r.mesh() || rho.mesh() != m.mesh() || rho.mesh() != u_ref.mesh() {
        return invalid("relative entropy arguments live on different meshes");
    }
    for f in [rho, r] {
        if let Some(cell) = f.values().iter().position(|&v| !(v > 0.0)) {
            return Err(Error::NegativeDensity { cell, value: f[cell] });
        }
    }
    let dim = m.dim();
    Ok(CellField::from_fn(rho.mesh().clone(), |k| {
        let kinetic: f64 = (0..dim).map(|d| (m.get(k, d) / rho[k] - u_ref.get(k, d)).powi(2)).sum();
        0.5 * rho[k] * kinetic + eos.pressure_potential(rho[k])
            - eos.pressure_potential(r[k])
            - eos.pressure_potential_derivative(r[k]) * (rho[k] - r[k])
    }))
}

/// How the reference side of E2-E4 is formed.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum EnsembleMode {
    /// `Ū_K`, `Ũ_K` and `V̄^K` run over every level followed by the reference.
    #[default]
    Running,
    /// Each side is its own single member: `Ū = U`, `V̄ = δ_U`, so E4 = E1.
    Single,
}

/// Variables compared in an error report.
pub fn variable_names(dim: usize) -> Vec<String> {
    let mut v = vec!["rho".to_string()];
    v.extend((1..=dim).map(|d| format!("m{d}")));
    v
}

/// Solutions at increasing resolutions plus a reference, all on the reference mesh.
#[derive(Debug, Clone)]
pub struct Ensemble {
    ks: Vec<usize>,
    members: Vec<State>,
    reference: State,
    mode: EnsembleMode,
}

fn inject_state(s: &State, fine: &Arc<StructuredMesh>) -> Result<State> {
    let rho = inject_to_fine(&s.rho, fine)?;
    let comps: Result<Vec<CellField>> = (0..s.u.dim()).map(|d| inject_to_fine(&s.u.component(d), fine)).collect();
    State::new(rho, CellVectorField::from_components(&comps?)?, s.time)
}

impl Ensemble {
    /// `levels` are `(k, solution)` with strictly increasing dyadic `k`.
    pub fn new(levels: Vec<(usize, State)>, reference: State, mode: EnsembleMode) -> Result<Self> {
        if levels.is_empty() {
            return invalid("ensemble needs at least one level");
        }
        for w in levels.windows(2) {
            if w[1].0 <= w[0].0 {
                return invalid("resolutions must be strictly increasing");
            }
        }
        let fine = reference.mesh().clone();
        let mut ks = Vec::with_capacity(levels.len());
        let mut members = Vec::with_capacity(levels.len());
        for (k, s) in levels {
            ks.push(k);
            members.push(inject_state(&s, &fine)?);
        }
        Ok(Ensemble { ks, members, reference, mode })
    }

    pub fn resolutions(&self) -> &[usize] {
        &self.ks
    }

    pub fn reference(&self) -> &State {
        &self.reference
    }

    pub fn mode(&self) -> EnsembleMode {
        self.mode
    }

    fn extract(s: &State, variable: &str) -> Result<CellField> {
        if variable == "rho" {
            return Ok(s.rho.clone());
        }
        let axis = variable
            .strip_prefix('m')
            .and_then(|d| d.parse::<usize>().ok())
            .filter(|&d| d >= 1 && d <= s.u.dim());
        match axis {
            Some(d) => Ok(s.momentum().component(d - 1)),
            None => invalid(format!("unknown variable '{variable}'")),
        }
    }

    /// `variable` of every level, in order.
    pub fn member_fields(&self, variable: &str) -> Result<Vec<CellField>> {
        self.members.iter().map(|s| Self::extract(s, variable)).collect()
    }

    pub fn reference_field(&self, variable: &str) -> Result<CellField> {
        Self::extract(&self.reference, variable)
    }

    /// L1 norm of the relative entropy of each level with respect to the reference.
    pub fn relative_entropy_l1(&self, eos: &Eos) -> Result<Vec<f64>> {
        let u_ref = &self.reference.u;
        self.members
            .iter()
            .map(|s| Ok(lp_norm(&relative_entropy_field(&s.rho, &s.momentum(), &self.reference.rho, u_ref, eos)?, 1.0)))
            .collect()
    }
}

/// One line of the error table.
#[derive(Debug, Clone, PartialEq)]
pub struct ErrorRow {
    pub variable: String,
    pub k: usize,
    /// `E1..E6`
    pub errors: [f64; 6],
    pub rel_entropy_l1: f64,
}

fn diff(a: &CellField, b: &CellField) -> CellField {
    CellField::from_fn(a.mesh().clone(), |k| a[k] - b[k])
}

/// E1-E6 of `variable` for every level of `ensemble`. The relative-entropy
/// column comes from `eos` and does not depend on the variable.
pub fn error_report(ensemble: &Ensemble, variable: &str, eos: &Eos) -> Result<Vec<ErrorRow>> {
    let levels = ensemble.member_fields(variable)?;
    let reference = ensemble.reference_field(variable)?;
    let rel = ensemble.relative_entropy_l1(eos)?;
    let cells = reference.len();

    let mut ref_seq = levels.clone();
    ref_seq.push(reference.clone());
    let (ref_mean, ref_var) = match ensemble.mode {
        EnsembleMode::Running => (cesaro_average(&ref_seq)?, first_variance_field(&ref_seq)?),
        EnsembleMode::Single => (reference.clone(), CellField::constant(reference.mesh().clone(), 0.0)),
    };

    let mut rows = Vec::with_capacity(levels.len());
    for (i, level) in levels.iter().enumerate() {
        let prefix = &levels[..=i];
        let (mean, var) = match ensemble.mode {
            EnsembleMode::Running => (cesaro_average(prefix)?, first_variance_field(prefix)?),
            EnsembleMode::Single => (level.clone(), CellField::constant(level.mesh().clone(), 0.0)),
        };
        let w1 = match ensemble.mode {
            EnsembleMode::Running => {
                let mut a = vec![0.0; prefix.len()];
                let mut b = vec![0.0; ref_seq.len()];
                let mut values = Vec::with_capacity(cells);
                for k in 0..cells {
                    for (slot, m) in a.iter_mut().zip(prefix) {
                        *slot = m[k];
                    }
                    for (slot, m) in b.iter_mut().zip(&ref_seq) {
                        *slot = m[k];
                    }
                    values.push(empirical_w1(&mut a, &mut b));
                }
                CellField::new(level.mesh().clone(), values)?
            }
            EnsembleMode::Single => CellField::from_fn(level.mesh().clone(), |k| (level[k] - reference[k]).abs()),
        };
        let mean_diff = diff(&mean, &ref_mean);
        rows.push(ErrorRow {
            variable: variable.to_string(),
            k: ensemble.ks[i],
            errors: [
                lp_norm(&diff(level, &reference), 1.0),
                lp_norm(&mean_diff, 1.0),
                lp_norm(&diff(&var, &ref_var), 1.0),
                lp_norm(&w1, 1.0),
                lp_norm(&mean_diff, 2.0),
                lp_norm(&w1, 2.0),
            ],
            rel_entropy_l1: rel[i],
        });
    }
    Ok(rows)
}

/// Error tables of every variable, `rho` first.
pub fn full_error_report(ensemble: &Ensemble, eos: &Eos) -> Result<Vec<ErrorRow>> {
    let dim = ensemble.reference.mesh().dim();
    let mut rows = Vec::new();
    for v in variable_names(dim) {
        rows.extend(error_report(ensemble, &v, eos)?);
    }
    Ok(rows)
}

pub const ERROR_REPORT_HEADER: [&str; 9] = ["variable", "k", "E1", "E2", "E3", "E4", "E5", "E6", "rel_entropy_L1"];

pub fn write_error_report<W: Write>(rows: &[ErrorRow], out: W) -> Result<()> {
    let mut w = csv::Writer::from_writer(out);
    w.write_record(ERROR_REPORT_HEADER)?;
    for r in rows {
        let mut rec = vec![r.variable.clone(), r.k.to_string()];
        rec.extend(r.errors.iter().map(|e| format!("{e:e}")));
        rec.push(format!("{:e}", r.rel_entropy_l1));
        w.write_record(&rec)?;
    }
    w.flush()?;
    Ok(())
}

pub fn write_error_report_file(rows: &[ErrorRow], path: &Path) -> Result<()> {
    write_error_report(rows, std::fs::File::create(path)?)
}

pub fn read_error_report<R: Read>(input: R) -> Result<Vec<ErrorRow>> {
    let mut rd = csv::Reader::from_reader(input);
    let header = rd.headers()?.clone();
    if header.iter().ne(ERROR_REPORT_HEADER.iter().copied()) {
        return invalid(format!("unexpected error report header: {header:?}"));
    }
    let mut rows = Vec::new();
    for rec in rd.records() {
        let rec = rec?;
        let num = |i: usize| -> Result<f64> {
            rec[i].parse::<f64>().map_err(|e| Error::InvalidInput(format!("column {}: {e}", ERROR_REPORT_HEADER[i])))
        };
        let k = rec[1].parse::<usize>().map_err(|e| Error::InvalidInput(format!("column k: {e}")))?;
        let mut errors = [0.0; 6];
        for (i, e) in errors.iter_mut().enumerate() {
            *e = num(i + 2)?;
        }
        rows.push(ErrorRow { variable: rec[0].to_string(), k, errors, rel_entropy_l1: num(8)? });
    }
    Ok(rows)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn line(k: usize) -> Arc<StructuredMesh> {
        Arc::new(StructuredMesh::uniform(1, k, 0.0, 1.0).unwrap())
    }

    #[test]
    fn injection_examples() {
        let coarse = CellField::new(line(2), vec![0.0, 1.0]).unwrap();
        let fine = inject_to_fine(&coarse, &line(4)).unwrap();
        assert_eq!(fine.values(), &[0.0, 0.0, 1.0, 1.0]);
        assert_eq!(fine.integral(), coarse.integral());
        assert!(inject_to_fine(&coarse, &line(6)).is_err());
    }

    #[test]
    fn variance_example() {
        let m = line(3);
        let members = [CellField::constant(m.clone(), 0.0), CellField::constant(m.clone(), 2.0)];
        let mean = cesaro_average(&members).unwrap();
        assert!(mean.values().iter().all(|&v| v == 1.0));
        let var = first_variance_field(&members).unwrap();
        assert!(var.values().iter().all(|&v| v == 0.5));
        assert!(cesaro_average(&[]).is_err());
    }

    #[test]
    fn wasserstein_examples() {
        let d = |x: f64| AtomicMeasure::new(vec![(x, 1.0)]).unwrap();
        assert_eq!(wasserstein_1d(&d(-1.5), &d(2.0), 1.0).unwrap(), 3.5);
        let mu = AtomicMeasure::new(vec![(0.0, 0.5), (2.0, 0.5)]).unwrap();
        assert_eq!(wasserstein_1d(&mu, &d(1.0), 1.0).unwrap(), 1.0);
        let mu = AtomicMeasure::new(vec![(0.0, 0.5), (1.0, 0.5)]).unwrap();
        let nu = AtomicMeasure::new(vec![(0.0, 0.5), (3.0, 0.5)]).unwrap();
        assert_eq!(wasserstein_1d(&mu, &nu, 1.0).unwrap(), 1.0);
        assert!(AtomicMeasure::new(vec![(0.0, 0.7)]).is_err());
    }

    #[test]
    fn empirical_w1_matches_general() {
        let mut a = vec![0.3, -1.0, 2.0];
        let mut b = vec![1.0, 0.5, 0.0, 4.0];
        let mu = AtomicMeasure::empirical(&a).unwrap();
        let nu = AtomicMeasure::empirical(&b).unwrap();
        let general = wasserstein_1d(&mu, &nu, 1.0).unwrap();
        assert!((empirical_w1(&mut a, &mut b) - general).abs() < 1e-14);
    }

    #[test]
    fn relative_entropy_examples() {
        let m = line(1);
        let eos = Eos::new(1.0, 2.0).unwrap();
        let one = CellField::constant(m.clone(), 1.0);
        let zero = CellVectorField::zeros(m.clone());
        let e = relative_entropy_field(&CellField::constant(m.clone(), 2.0), &zero, &one, &zero, &eos).unwrap();
        assert!((e[0] - 1.0).abs() < 1e-15);
        let mom = CellVectorField::constant(m.clone(), &[1.0]);
        let e = relative_entropy_field(&one, &mom, &one, &zero, &eos).unwrap();
        assert!((e[0] - 0.5).abs() < 1e-15);
    }

    #[test]
    fn norms() {
        let m = Arc::new(StructuredMesh::uniform(2, 4, -1.0, 1.0).unwrap());
        let c = CellField::constant(m, -3.0);
        assert!((lp_norm(&c, 1.0) - 12.0).abs() < 1e-13);
        assert!((lp_norm(&c, 2.0) - 6.0).abs() < 1e-13);
    }
}
