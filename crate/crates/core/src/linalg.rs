//! Sparse linear algebra for the Newton solves of the implicit mass balance.
//!
//! Two solvers sit behind [`solve`]: a banded LU factorisation applied after
//! a folded reordering (periodic neighbours become close in index), used
//! when the band is narrow enough, and ILU(0)-preconditioned restarted GMRES
//! for the rest.

use crate::error::{Error, Result};

/// Compressed sparse row matrix with sorted, duplicate-free columns per row.
#[derive(Debug, Clone, PartialEq)]
pub struct CsrMatrix {
    n: usize,
    row_ptr: Vec<usize>,
    cols: Vec<usize>,
    vals: Vec<f64>,
}

impl CsrMatrix {
    /// Builds an `n × n` matrix from `(row, col, value)` triplets, summing duplicates.
    pub fn from_triplets(n: usize, triplets: &[(usize, usize, f64)]) -> Self {
        let mut rows: Vec<Vec<(usize, f64)>> = vec![Vec::new(); n];
        for &(r, c, v) in triplets {
            rows[r].push((c, v));
        }
        let mut row_ptr = Vec::with_capacity(n + 1);
        let mut cols = Vec::new();
        let mut vals = Vec::new();
        row_ptr.push(0);
        for mut row in rows {
            row.sort_by_key(|e| e.0);
            let mut last: Option<usize> = None;
            for (c, v) in row {
                if last == Some(c) {
                    *vals.last_mut().unwrap() += v;
                } else {
                    cols.push(c);
                    vals.push(v);
                    last = Some(c);
                }
            }
            row_ptr.push(cols.len());
        }
        CsrMatrix { n, row_ptr, cols, vals }
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn nnz(&self) -> usize {
        self.vals.len()
    }

    pub fn row(&self, i: usize) -> impl Iterator<Item = (usize, f64)> + '_ {
        let range = self.row_ptr[i]..self.row_ptr[i + 1];
        self.cols[range.clone()].iter().copied().zip(self.vals[range].iter().copied())
    }

    pub fn get(&self, i: usize, j: usize) -> f64 {
        self.row(i).find(|e| e.0 == j).map_or(0.0, |e| e.1)
    }

    pub fn matvec(&self, x: &[f64], y: &mut [f64]) {
        for i in 0..self.n {
            let mut s = 0.0;
            for k in self.row_ptr[i]..self.row_ptr[i + 1] {
                s += self.vals[k] * x[self.cols[k]];
            }
            y[i] = s;
        }
    }

    fn permuted(&self, new_of_old: &[usize]) -> CsrMatrix {
        let mut triplets = Vec::with_capacity(self.nnz());
        for i in 0..self.n {
            for (j, v) in self.row(i) {
                triplets.push((new_of_old[i], new_of_old[j], v));
            }
        }
        CsrMatrix::from_triplets(self.n, &triplets)
    }

    /// Lower and upper bandwidths.
    pub fn bandwidths(&self) -> (usize, usize) {
        let (mut lo, mut up) = (0, 0);
        for i in 0..self.n {
            for (j, _) in self.row(i) {
                if j < i {
                    lo = lo.max(i - j);
                } else {
                    up = up.max(j - i);
                }
            }
        }
        (lo, up)
    }
}

/// Position of index `i` in the folded order `0, n-1, 1, n-2, …` interleaved
/// so that `i` and `i ± 1 (mod n)` are at most two apart.
pub fn fold_index(i: usize, n: usize) -> usize {
    if 2 * i < n {
        2 * i
    } else {
        2 * (n - 1 - i) + 1
    }
}

/// Folded ordering of a tensor grid with `cells` per axis (axis 0 fastest).
pub fn folded_ordering(cells: &[usize]) -> Vec<usize> {
    let total: usize = cells.iter().product();
    (0..total)
        .map(|cell| {
            let mut rest = cell;
            let mut new = 0;
            let mut stride = 1;
            for &n in cells {
                let i = rest % n;
                rest /= n;
                new += fold_index(i, n) * stride;
                stride *= n;
            }
            new
        })
        .collect()
}

/// Dense band LU without pivoting.
pub struct BandLu {
    n: usize,
    lower: usize,
    upper: usize,
    band: Vec<f64>,
}

impl BandLu {
    pub fn factor(a: &CsrMatrix) -> Result<Self> {
        let n = a.n();
        let (lower, upper) = a.bandwidths();
        let width = lower + upper + 1;
        let mut band = vec![0.0; n * width];
        let mut scale = 0.0f64;
        for i in 0..n {
            for (j, v) in a.row(i) {
                band[i * width + j + lower - i] = v;
                scale = scale.max(v.abs());
            }
        }
        let at = |i: usize, j: usize| i * width + j + lower - i;
        for k in 0..n {
            let pivot = band[at(k, k)];
            if !(pivot.abs() > 1e-300_f64.max(scale * 1e-15)) {
                return Err(Error::LinearSolve(format!("zero pivot at row {k}")));
            }
            let jmax = (k + upper).min(n - 1);
            for i in (k + 1)..=(k + lower).min(n - 1) {
                let l = band[at(i, k)] / pivot;
                band[at(i, k)] = l;
                if l != 0.0 {
                    for j in (k + 1)..=jmax {
                        band[at(i, j)] -= l * band[at(k, j)];
                    }
                }
            }
        }
        Ok(BandLu { n, lower, upper, band })
    }

    pub fn solve(&self, b: &[f64]) -> Vec<f64> {
        let width = self.lower + self.upper + 1;
        let at = |i: usize, j: usize| i * width + j + self.lower - i;
        let mut x = b.to_vec();
        for i in 0..self.n {
            let mut s = x[i];
            for k in i.saturating_sub(self.lower)..i {
                s -= self.band[at(i, k)] * x[k];
            }
            x[i] = s;
        }
        for i in (0..self.n).rev() {
            let mut s = x[i];
            for j in (i + 1)..=(i + self.upper).min(self.n - 1) {
                s -= self.band[at(i, j)] * x[j];
            }
            x[i] = s / self.band[at(i, i)];
        }
        x
    }
}

/// Incomplete LU factorisation with the sparsity pattern of `A`.
pub struct Ilu0 {
    lu: CsrMatrix,
    diag: Vec<usize>,
}

impl Ilu0 {
    pub fn factor(a: &CsrMatrix) -> Result<Self> {
        let mut lu = a.clone();
        let n = lu.n;
        let mut diag = vec![usize::MAX; n];
        for i in 0..n {
            for k in lu.row_ptr[i]..lu.row_ptr[i + 1] {
                if lu.cols[k] == i {
                    diag[i] = k;
                }
            }
            if diag[i] == usize::MAX {
                return Err(Error::LinearSolve(format!("missing diagonal in row {i}")));
            }
        }
        let mut marker = vec![usize::MAX; n];
        for i in 0..n {
            let (start, end) = (lu.row_ptr[i], lu.row_ptr[i + 1]);
            for k in start..end {
                marker[lu.cols[k]] = k;
            }
            for kk in start..end {
                let k = lu.cols[kk];
                if k >= i {
                    break;
                }
                let pivot = lu.vals[diag[k]];
                if pivot == 0.0 {
                    return Err(Error::LinearSolve(format!("zero ILU pivot at row {k}")));
                }
                let l = lu.vals[kk] / pivot;
                lu.vals[kk] = l;
                for jj in (diag[k] + 1)..lu.row_ptr[k + 1] {
                    let pos = marker[lu.cols[jj]];
                    if pos != usize::MAX {
                        lu.vals[pos] -= l * lu.vals[jj];
                    }
                }
            }
            for k in start..end {
                marker[lu.cols[k]] = usize::MAX;
            }
        }
        Ok(Ilu0 { lu, diag })
    }

    pub fn apply(&self, b: &[f64], x: &mut [f64]) {
        let n = self.lu.n;
        for i in 0..n {
            let mut s = b[i];
            for k in self.lu.row_ptr[i]..self.diag[i] {
                s -= self.lu.vals[k] * x[self.lu.cols[k]];
            }
            x[i] = s;
        }
        for i in (0..n).rev() {
            let mut s = x[i];
            for k in (self.diag[i] + 1)..self.lu.row_ptr[i + 1] {
                s -= self.lu.vals[k] * x[self.lu.cols[k]];
            }
            x[i] = s / self.lu.vals[self.diag[i]];
        }
    }
}

fn norm2(v: &[f64]) -> f64 {
    v.iter().map(|x| x * x).sum::<f64>().sqrt()
}

fn dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

#[derive(Debug, Clone, Copy)]
pub struct GmresOptions {
    pub restart: usize,
    pub max_iter: usize,
    pub rel_tol: f64,
    /// Relative residual still accepted when `max_iter` is exhausted.
    pub accept_tol: f64,
}

impl Default for GmresOptions {
    fn default() -> Self {
        GmresOptions { restart: 60, max_iter: 1200, rel_tol: 1e-13, accept_tol: 1e-9 }
    }
}

/// Right-preconditioned restarted GMRES with ILU(0).
pub fn gmres_ilu(a: &CsrMatrix, b: &[f64], opts: GmresOptions) -> Result<Vec<f64>> {
    let n = a.n();
    let prec = Ilu0::factor(a)?;
    let mut x = vec![0.0; n];
    let bnorm = norm2(b);
    if bnorm == 0.0 {
        return Ok(x);
    }
    let m = opts.restart.max(1);
    let mut r = vec![0.0; n];
    let mut w = vec![0.0; n];
    let mut z = vec![0.0; n];
    let mut total = 0;
    let mut rel = 1.0;
    while total < opts.max_iter {
        a.matvec(&x, &mut r);
        for i in 0..n {
            r[i] = b[i] - r[i];
        }
        let beta = norm2(&r);
        rel = beta / bnorm;
        if rel <= opts.rel_tol {
            return Ok(x);
        }
        let mut basis: Vec<Vec<f64>> = vec![r.iter().map(|v| v / beta).collect()];
        let mut h = vec![vec![0.0; m]; m + 1];
        let (mut cs, mut sn) = (vec![0.0; m], vec![0.0; m]);
        let mut g = vec![0.0; m + 1];
        g[0] = beta;
        let mut used = 0;
        for j in 0..m {
            prec.apply(&basis[j], &mut z);
            a.matvec(&z, &mut w);
            for (i, vi) in basis.iter().enumerate() {
                let hij = dot(&w, vi);
                h[i][j] = hij;
                for k in 0..n {
                    w[k] -= hij * vi[k];
                }
            }
            let hnext = norm2(&w);
            h[j + 1][j] = hnext;
            for i in 0..j {
                let t = cs[i] * h[i][j] + sn[i] * h[i + 1][j];
                h[i + 1][j] = -sn[i] * h[i][j] + cs[i] * h[i + 1][j];
                h[i][j] = t;
            }
            let denom = (h[j][j] * h[j][j] + h[j + 1][j] * h[j + 1][j]).sqrt();
            if denom == 0.0 {
                used = j;
                break;
            }
            cs[j] = h[j][j] / denom;
            sn[j] = h[j + 1][j] / denom;
            h[j][j] = denom;
            h[j + 1][j] = 0.0;
            g[j + 1] = -sn[j] * g[j];
            g[j] *= cs[j];
            used = j + 1;
            total += 1;
            if g[j + 1].abs() / bnorm <= opts.rel_tol || hnext == 0.0 || total >= opts.max_iter {
                break;
            }
            basis.push(w.iter().map(|v| v / hnext).collect());
        }
        // back substitution for the Krylov coefficients
        let mut y = vec![0.0; used];
        for i in (0..used).rev() {
            let mut s = g[i];
            for k in (i + 1)..used {
                s -= h[i][k] * y[k];
            }
            y[i] = s / h[i][i];
        }
        let mut update = vec![0.0; n];
        for (k, yk) in y.iter().enumerate() {
            for i in 0..n {
                update[i] += yk * basis[k][i];
            }
        }
        prec.apply(&update, &mut z);
        for i in 0..n {
            x[i] += z[i];
        }
        if used == 0 {
            break;
        }
    }
    a.matvec(&x, &mut r);
    for i in 0..n {
        r[i] = b[i] - r[i];
    }
    let final_rel = norm2(&r) / bnorm;
    if final_rel <= opts.accept_tol {
        Ok(x)
    } else {
        Err(Error::LinearSolve(format!(
            "GMRES stalled at relative residual {final_rel:.3e} (last cycle {rel:.3e})"
        )))
    }
}

/// Upper bound on `n · lower · upper` for which the banded LU is used.
pub const BAND_COST_LIMIT: f64 = 3.0e7;

/// Solves `A x = b` for a matrix whose unknowns live on a periodic tensor
/// grid with `cells` per axis.
pub fn solve(a: &CsrMatrix, b: &[f64], cells: &[usize]) -> Result<Vec<f64>> {
    let order = folded_ordering(cells);
    let pa = a.permuted(&order);
    let (lo, up) = pa.bandwidths();
    if (a.n() as f64) * (lo.max(1) as f64) * (up.max(1) as f64) <= BAND_COST_LIMIT {
        if let Ok(lu) = BandLu::factor(&pa) {
            let mut pb = vec![0.0; b.len()];
            for (old, &new) in order.iter().enumerate() {
                pb[new] = b[old];
            }
            let px = lu.solve(&pb);
            return Ok(order.iter().map(|&new| px[new]).collect());
        }
    }
    gmres_ilu(a, b, GmresOptions::default())
}
