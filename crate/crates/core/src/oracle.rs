//! Dense reference implementations for small graphs (at most
//! [`MAX_ORACLE_VERTICES`] vertices). Nothing here shares code with the
//! sparse solvers: every quantity comes from an explicit dense matrix and
//! Gaussian elimination or repeated dense products.

use crate::error::{Error, Result};
use crate::graph::{Graph, VertexId};

pub const MAX_ORACLE_VERTICES: usize = 200;

#[derive(Debug, Clone, PartialEq)]
pub struct DenseMatrix {
    n: usize,
    data: Vec<f64>,
}

impl DenseMatrix {
    pub fn zeros(n: usize) -> Self {
        DenseMatrix {
            n,
            data: vec![0.0; n * n],
        }
    }

    pub fn dim(&self) -> usize {
        self.n
    }

    pub fn get(&self, i: usize, j: usize) -> f64 {
        self.data[i * self.n + j]
    }

    pub fn set(&mut self, i: usize, j: usize, v: f64) {
        self.data[i * self.n + j] = v;
    }

    pub fn add(&mut self, i: usize, j: usize, v: f64) {
        self.data[i * self.n + j] += v;
    }

    pub fn is_symmetric(&self, tol: f64) -> bool {
        (0..self.n).all(|i| (0..i).all(|j| (self.get(i, j) - self.get(j, i)).abs() <= tol))
    }

    pub fn mul(&self, other: &DenseMatrix) -> DenseMatrix {
        let n = self.n;
        let mut out = DenseMatrix::zeros(n);
        for i in 0..n {
            for k in 0..n {
                let a = self.get(i, k);
                if a == 0.0 {
                    continue;
                }
                for j in 0..n {
                    out.data[i * n + j] += a * other.data[k * n + j];
                }
            }
        }
        out
    }

    /// Solves `self · x = b` by Gaussian elimination with partial pivoting.
    pub fn solve(&self, b: &[f64]) -> Result<Vec<f64>> {
        let n = self.n;
        let mut a = self.data.clone();
        let mut x = b.to_vec();
        let scale = a.iter().fold(0.0f64, |m, v| m.max(v.abs()));
        for col in 0..n {
            let piv = (col..n)
                .max_by(|&p, &q| a[p * n + col].abs().partial_cmp(&a[q * n + col].abs()).unwrap())
                .unwrap();
            if a[piv * n + col].abs() <= 1e-13 * scale {
                return Err(Error::Singular("dense system is singular".into()));
            }
            if piv != col {
                for j in 0..n {
                    a.swap(piv * n + j, col * n + j);
                }
                x.swap(piv, col);
            }
            let d = a[col * n + col];
            for row in (col + 1)..n {
                let f = a[row * n + col] / d;
                if f == 0.0 {
                    continue;
                }
                for j in col..n {
                    a[row * n + j] -= f * a[col * n + j];
                }
                x[row] -= f * x[col];
            }
        }
        for row in (0..n).rev() {
            let mut s = x[row];
            for j in (row + 1)..n {
                s -= a[row * n + j] * x[j];
            }
            x[row] = s / a[row * n + row];
        }
        Ok(x)
    }
}

fn check_size(g: &Graph) -> Result<()> {
    if g.len() > MAX_ORACLE_VERTICES {
        return Err(Error::invalid(format!(
            "oracle limited to {MAX_ORACLE_VERTICES} vertices, graph has {}",
            g.len()
        )));
    }
    Ok(())
}

/// Conductance matrix `C[x][y] = Σ c over bonds x~y`, summed from the raw bond list.
fn conductance_matrix(g: &Graph) -> DenseMatrix {
    let mut c = DenseMatrix::zeros(g.len());
    for b in g.bonds() {
        let i = g.index_of(b.u).unwrap();
        let j = g.index_of(b.v).unwrap();
        c.add(i, j, b.conductance);
        c.add(j, i, b.conductance);
    }
    c
}

fn row_sums(c: &DenseMatrix) -> Vec<f64> {
    (0..c.dim()).map(|i| (0..c.dim()).map(|j| c.get(i, j)).sum()).collect()
}

/// `R_eff(A, B)` as the net current out of `A` at unit voltage, from a dense
/// solve of the reduced Kirchhoff system.
pub fn dense_resistance(g: &Graph, a: &[VertexId], b: &[VertexId]) -> Result<f64> {
    check_size(g)?;
    let n = g.len();
    let c = conductance_matrix(g);
    let deg = row_sums(&c);
    let mut fixed: Vec<Option<f64>> = vec![None; n];
    for v in a {
        fixed[g.index_of(*v).ok_or_else(|| Error::invalid("vertex not in graph"))?] = Some(1.0);
    }
    for v in b {
        let i = g.index_of(*v).ok_or_else(|| Error::invalid("vertex not in graph"))?;
        if fixed[i].is_some() {
            return Err(Error::invalid("A and B must be disjoint"));
        }
        fixed[i] = Some(0.0);
    }
    let free: Vec<usize> = (0..n).filter(|&i| fixed[i].is_none()).collect();
    let mut volt: Vec<f64> = fixed.iter().map(|f| f.unwrap_or(0.0)).collect();
    if !free.is_empty() {
        let m = free.len();
        let mut lap = DenseMatrix::zeros(m);
        let mut rhs = vec![0.0; m];
        for (p, &i) in free.iter().enumerate() {
            lap.set(p, p, deg[i]);
            for (q, &j) in free.iter().enumerate() {
                if q != p {
                    lap.add(p, q, -c.get(i, j));
                }
            }
            for j in 0..n {
                if let Some(f) = fixed[j] {
                    rhs[p] += c.get(i, j) * f;
                }
            }
        }
        let sol = lap.solve(&rhs)?;
        for (p, &i) in free.iter().enumerate() {
            volt[i] = sol[p];
        }
    }
    let mut current = 0.0;
    for i in (0..n).filter(|&i| fixed[i] == Some(1.0)) {
        for j in 0..n {
            current += c.get(i, j) * (1.0 - volt[j]);
        }
    }
    Ok(1.0 / current)
}

/// One-step transition matrix `P[x][y] = C[x][y] / μ_x`.
pub fn transition_matrix(g: &Graph) -> DenseMatrix {
    let c = conductance_matrix(g);
    let deg = row_sums(&c);
    let mut p = c.clone();
    for i in 0..g.len() {
        for j in 0..g.len() {
            p.set(i, j, c.get(i, j) / deg[i]);
        }
    }
    p
}

/// `p_n(x, y) = P^n[x][y] / μ_y` for `n = 0..=horizon`, dense `table[n][x][y]`.
pub fn dense_heat_kernel(g: &Graph, horizon: usize) -> Result<Vec<DenseMatrix>> {
    check_size(g)?;
    let n = g.len();
    let p = transition_matrix(g);
    let deg = row_sums(&conductance_matrix(g));
    let mut power = DenseMatrix::zeros(n);
    for i in 0..n {
        power.set(i, i, 1.0);
    }
    let mut out = Vec::with_capacity(horizon + 1);
    for step in 0..=horizon {
        let mut k = power.clone();
        for i in 0..n {
            for j in 0..n {
                k.set(i, j, power.get(i, j) / deg[j]);
            }
        }
        out.push(k);
        if step < horizon {
            power = power.mul(&p);
        }
    }
    Ok(out)
}

/// `E^origin τ_B` from the absorbing-chain fundamental matrix
/// `N = (I - Q)^{-1}`, `Q` the transition matrix restricted to `B`.
pub fn dense_mean_exit(g: &Graph, origin: VertexId, domain: &[VertexId]) -> Result<f64> {
    check_size(g)?;
    let p = transition_matrix(g);
    let mut idx: Vec<usize> = domain
        .iter()
        .map(|v| g.index_of(*v).ok_or_else(|| Error::invalid("vertex not in graph")))
        .collect::<Result<_>>()?;
    idx.sort_unstable();
    idx.dedup();
    let o = g.index_of(origin).ok_or_else(|| Error::invalid("origin not in graph"))?;
    let Ok(start) = idx.binary_search(&o) else {
        return Ok(0.0);
    };
    let m = idx.len();
    let mut iq = DenseMatrix::zeros(m);
    for (a, &i) in idx.iter().enumerate() {
        for (b, &j) in idx.iter().enumerate() {
            iq.set(a, b, if a == b { 1.0 } else { 0.0 } - p.get(i, j));
        }
    }
    let t = iq.solve(&vec![1.0; m])?;
    Ok(t[start])
}
