//! Sparse symmetric solvers used by the resistance and exit-time code:
//! Jacobi-preconditioned conjugate gradients and an envelope (profile)
//! LDLᵀ factorization for many right-hand sides against one matrix.

use crate::error::{Error, Result};
use crate::graph::Graph;

/// Symmetric sparse matrix in CSR form with off-diagonals stored twice.
#[derive(Debug, Clone)]
pub struct SymCsr {
    pub diag: Vec<f64>,
    pub offsets: Vec<usize>,
    pub cols: Vec<usize>,
    pub vals: Vec<f64>,
}

impl SymCsr {
    pub fn dim(&self) -> usize {
        self.diag.len()
    }

    pub fn mul(&self, x: &[f64], y: &mut [f64]) {
        for i in 0..self.dim() {
            let mut acc = self.diag[i] * x[i];
            for k in self.offsets[i]..self.offsets[i + 1] {
                acc += self.vals[k] * x[self.cols[k]];
            }
            y[i] = acc;
        }
    }

    /// The graph Laplacian restricted to the vertices with `unknown[v] = Some(k)`.
    /// Row `k` has diagonal `μ_v` and off-diagonals `-c_vw` for unknown neighbours.
    pub fn dirichlet_laplacian(g: &Graph, unknown: &[Option<usize>], dim: usize) -> SymCsr {
        let mut rows: Vec<usize> = vec![usize::MAX; dim];
        for (v, u) in unknown.iter().enumerate() {
            if let Some(k) = *u {
                rows[k] = v;
            }
        }
        let mut diag = Vec::with_capacity(dim);
        let mut offsets = Vec::with_capacity(dim + 1);
        let mut cols = Vec::new();
        let mut vals = Vec::new();
        offsets.push(0);
        for &v in &rows {
            diag.push(g.measures()[v]);
            for (w, c) in g.neighbors(v) {
                if let Some(j) = unknown[w] {
                    cols.push(j);
                    vals.push(-c);
                }
            }
            offsets.push(cols.len());
        }
        SymCsr {
            diag,
            offsets,
            cols,
            vals,
        }
    }
}

#[derive(Debug, Clone)]
pub struct CgOutcome {
    pub x: Vec<f64>,
    pub iterations: usize,
    pub relative_residual: f64,
}

fn dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

/// Solves `A x = b` for symmetric positive-definite `A` to
/// `‖b - A x‖ ≤ tol · ‖b‖`. The true residual is recomputed before
/// accepting convergence.
pub fn conjugate_gradient(a: &SymCsr, b: &[f64], tol: f64, max_iter: usize) -> Result<CgOutcome> {
    let n = a.dim();
    let bnorm = dot(b, b).sqrt();
    if bnorm == 0.0 {
        return Ok(CgOutcome {
            x: vec![0.0; n],
            iterations: 0,
            relative_residual: 0.0,
        });
    }
    let inv_diag: Vec<f64> = a.diag.iter().map(|&d| 1.0 / d).collect();
    let mut x = vec![0.0; n];
    let mut r = b.to_vec();
    let mut z: Vec<f64> = r.iter().zip(&inv_diag).map(|(r, d)| r * d).collect();
    let mut p = z.clone();
    let mut ap = vec![0.0; n];
    let mut rz = dot(&r, &z);
    let mut iterations = 0;
    loop {
        let mut rnorm = dot(&r, &r).sqrt();
        if rnorm <= tol * bnorm {
            // guard against drift between recursive and true residual
            a.mul(&x, &mut ap);
            for i in 0..n {
                r[i] = b[i] - ap[i];
            }
            rnorm = dot(&r, &r).sqrt();
            if rnorm <= tol * bnorm {
                return Ok(CgOutcome {
                    x,
                    iterations,
                    relative_residual: rnorm / bnorm,
                });
            }
            for i in 0..n {
                z[i] = r[i] * inv_diag[i];
            }
            p.copy_from_slice(&z);
            rz = dot(&r, &z);
        }
        if iterations >= max_iter {
            return Err(Error::NotConverged {
                iterations,
                residual: rnorm / bnorm,
            });
        }
        a.mul(&p, &mut ap);
        let pap = dot(&p, &ap);
        if !(pap > 0.0) {
            return Err(Error::Singular(
                "conjugate gradient met a non-positive curvature direction".into(),
            ));
        }
        let alpha = rz / pap;
        for i in 0..n {
            x[i] += alpha * p[i];
            r[i] -= alpha * ap[i];
            z[i] = r[i] * inv_diag[i];
        }
        let rz_new = dot(&r, &z);
        let beta = rz_new / rz;
        rz = rz_new;
        for i in 0..n {
            p[i] = z[i] + beta * p[i];
        }
        iterations += 1;
    }
}

/// Envelope LDLᵀ factorization. Row `i` of `L` is stored densely on
/// columns `first[i]..i`; fill-in never leaves this envelope.
#[derive(Debug, Clone)]
pub struct ProfileLdl {
    first: Vec<usize>,
    start: Vec<usize>,
    lower: Vec<f64>,
    pivots: Vec<f64>,
}

impl ProfileLdl {
    /// Factors the symmetric matrix given by `diag` and, for each row, its
    /// strictly-lower entries `(col, value)`.
    pub fn factor(diag: &[f64], lower_rows: &[Vec<(usize, f64)>]) -> Result<Self> {
        let n = diag.len();
        let mut first = Vec::with_capacity(n);
        let mut start = Vec::with_capacity(n + 1);
        start.push(0);
        for (i, row) in lower_rows.iter().enumerate() {
            let f = row.iter().map(|&(j, _)| j).min().unwrap_or(i).min(i);
            first.push(f);
            start.push(start[i] + (i - f));
        }
        let mut lower = vec![0.0; start[n]];
        let mut pivots = vec![0.0; n];
        let mut w: Vec<f64> = Vec::new();
        for i in 0..n {
            let fi = first[i];
            w.clear();
            w.resize(i - fi, 0.0);
            for &(j, v) in &lower_rows[i] {
                w[j - fi] += v;
            }
            // w[j] becomes L_ij * D_j
            for j in fi..i {
                let fj = first[j];
                let lo = fi.max(fj);
                let lrow = &lower[start[j]..start[j + 1]];
                let mut s = 0.0;
                for k in lo..j {
                    s += w[k - fi] * lrow[k - fj];
                }
                w[j - fi] -= s;
            }
            let mut d = diag[i];
            let lrow = &mut lower[start[i]..start[i + 1]];
            for j in fi..i {
                let l = w[j - fi] / pivots[j];
                d -= w[j - fi] * l;
                lrow[j - fi] = l;
            }
            if !(d > 0.0) {
                return Err(Error::Singular(format!(
                    "non-positive pivot {d:e} at row {i} of profile factorization"
                )));
            }
            pivots[i] = d;
        }
        Ok(ProfileLdl {
            first,
            start,
            lower,
            pivots,
        })
    }

    pub fn dim(&self) -> usize {
        self.pivots.len()
    }

    fn row(&self, i: usize) -> &[f64] {
        &self.lower[self.start[i]..self.start[i + 1]]
    }

    pub fn solve(&self, b: &[f64]) -> Vec<f64> {
        let n = self.dim();
        let mut z = b.to_vec();
        for i in 0..n {
            let fi = self.first[i];
            let s: f64 = self.row(i).iter().zip(&z[fi..i]).map(|(l, z)| l * z).sum();
            z[i] -= s;
        }
        for i in 0..n {
            z[i] /= self.pivots[i];
        }
        for i in (0..n).rev() {
            let fi = self.first[i];
            let zi = z[i];
            let row = &self.lower[self.start[i]..self.start[i + 1]];
            for (k, l) in row.iter().enumerate() {
                z[fi + k] -= l * zi;
            }
        }
        z
    }

    /// `(A^{-1})_{pp}`, using only rows at and after `p`.
    pub fn inverse_diagonal_entry(&self, p: usize, scratch: &mut Vec<f64>) -> f64 {
        let n = self.dim();
        scratch.clear();
        scratch.resize(n - p, 0.0);
        scratch[0] = 1.0;
        let mut acc = 1.0 / self.pivots[p];
        for i in (p + 1)..n {
            let fi = self.first[i];
            let lo = fi.max(p);
            let row = self.row(i);
            let mut s = 0.0;
            for k in lo..i {
                s += row[k - fi] * scratch[k - p];
            }
            scratch[i - p] = -s;
            acc += s * s / self.pivots[i];
        }
        acc
    }
}
