//! Effective resistance, killed Green kernels and the long-bond projection.
//!
//! `R_eff(A, B)` is `1 / E(f, f)` for the potential `f` that equals 1 on
//! `A`, 0 on `B`, and is harmonic elsewhere. The potential comes from a
//! conjugate-gradient solve of the Laplacian restricted to the free
//! vertices. The Green kernel of the walk killed on leaving `B` is the
//! inverse of the Laplacian restricted to `B`.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::graph::{Graph, Metric, VertexId};
use crate::linalg::{conjugate_gradient, ProfileLdl, SymCsr};
use crate::scaling::GrowthFunction;

/// Relative residual demanded of every iterative solve.
pub const SOLVER_TOLERANCE: f64 = 1e-10;

fn iteration_cap(g: &Graph) -> usize {
    50 * g.len()
}

/// Solved Dirichlet potential, indexed like the graph's vertices.
#[derive(Debug, Clone)]
pub struct Potential {
    pub values: Vec<f64>,
    pub energy: f64,
}

impl Potential {
    pub fn effective_resistance(&self) -> f64 {
        1.0 / self.energy
    }
}

/// `E(f, f) = 1/2 Σ_{x,y} c_xy (f(x) - f(y))^2`.
pub fn energy(g: &Graph, f: &[f64]) -> f64 {
    let mut e = 0.0;
    for x in 0..g.len() {
        for (y, c) in g.neighbors(x) {
            if y > x {
                let d = f[x] - f[y];
                e += c * d * d;
            }
        }
    }
    e
}

fn index_set(g: &Graph, set: &[VertexId], what: &str) -> Result<Vec<usize>> {
    if set.is_empty() {
        return Err(Error::invalid(format!("{what} must be non-empty")));
    }
    let mut idx = set
        .iter()
        .map(|&v| g.require_index(v))
        .collect::<Result<Vec<_>>>()?;
    idx.sort_unstable();
    idx.dedup();
    Ok(idx)
}

/// Potential that is 1 on `a`, 0 on `b` and harmonic elsewhere.
pub fn dirichlet_potential(g: &Graph, a: &[VertexId], b: &[VertexId]) -> Result<Potential> {
    let ai = index_set(g, a, "A")?;
    let bi = index_set(g, b, "B")?;
    dirichlet_potential_idx(g, &ai, &bi)
}

pub(crate) fn dirichlet_potential_idx(g: &Graph, a: &[usize], b: &[usize]) -> Result<Potential> {
    let n = g.len();
    // 0 = free, 1 = on A, 2 = on B
    let mut tag = vec![0u8; n];
    for &i in a {
        tag[i] = 1;
    }
    for &i in b {
        if tag[i] == 1 {
            return Err(Error::invalid("A and B must be disjoint"));
        }
        tag[i] = 2;
    }
    let mut unknown = vec![None; n];
    let mut dim = 0;
    for i in 0..n {
        if tag[i] == 0 {
            unknown[i] = Some(dim);
            dim += 1;
        }
    }
    let mut values: Vec<f64> = tag.iter().map(|&t| if t == 1 { 1.0 } else { 0.0 }).collect();
    if dim > 0 {
        let lap = SymCsr::dirichlet_laplacian(g, &unknown, dim);
        let mut rhs = vec![0.0; dim];
        for &x in a {
            for (y, c) in g.neighbors(x) {
                if let Some(k) = unknown[y] {
                    rhs[k] += c;
                }
            }
        }
        let sol = conjugate_gradient(&lap, &rhs, SOLVER_TOLERANCE, iteration_cap(g))?;
        for (i, u) in unknown.iter().enumerate() {
            if let Some(k) = *u {
                values[i] = sol.x[k];
            }
        }
    }
    let energy = energy(g, &values);
    Ok(Potential { values, energy })
}

/// `R_eff(A, B)`. Overlapping sets are rejected; use
/// [`point_resistance`] for the `R_eff(x, x) = 0` convention.
pub fn effective_resistance(g: &Graph, a: &[VertexId], b: &[VertexId]) -> Result<f64> {
    Ok(dirichlet_potential(g, a, b)?.effective_resistance())
}

pub fn point_resistance(g: &Graph, x: VertexId, y: VertexId) -> Result<f64> {
    if x == y {
        g.require_index(x)?;
        return Ok(0.0);
    }
    effective_resistance(g, &[x], &[y])
}

/// `R_eff(center, B(center, radius)^c)`.
pub fn complement_resistance(g: &Graph, center: VertexId, radius: f64, metric: Metric) -> Result<f64> {
    g.check_radius(radius)?;
    let c = g.require_index(center)?;
    let dist = g.distances_from(center, metric)?;
    let outside: Vec<usize> = (0..g.len()).filter(|&i| !(dist[i] < radius)).collect();
    if outside.is_empty() {
        return Err(Error::invalid(format!(
            "ball of radius {radius} covers the whole graph"
        )));
    }
    Ok(dirichlet_potential_idx(g, &[c], &outside)?.effective_resistance())
}

fn domain_indices(g: &Graph, domain: &[VertexId]) -> Result<(Vec<Option<usize>>, Vec<usize>)> {
    let idx = index_set(g, domain, "domain")?;
    if idx.len() == g.len() {
        return Err(Error::invalid(
            "domain is the whole graph: there is no killing boundary",
        ));
    }
    let mut unknown = vec![None; g.len()];
    for (k, &i) in idx.iter().enumerate() {
        unknown[i] = Some(k);
    }
    Ok((unknown, idx))
}

/// One row `g_B(x, ·)` of the killed Green kernel: expected visits to `y`
/// before leaving `B`, divided by `μ_y`.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct GreenRow {
    pub source: VertexId,
    /// `(y, g_B(x, y))` for `y ∈ B`, ascending by label; zero elsewhere.
    pub values: Vec<(VertexId, f64)>,
}

impl GreenRow {
    pub fn get(&self, y: VertexId) -> f64 {
        self.values
            .binary_search_by_key(&y, |&(v, _)| v)
            .map(|k| self.values[k].1)
            .unwrap_or(0.0)
    }

    /// `E^x τ_B = Σ_y g_B(x, y) μ_y`.
    pub fn expected_exit_time(&self, g: &Graph) -> f64 {
        self.values
            .iter()
            .map(|&(y, v)| v * g.measure(y).unwrap_or(0.0))
            .sum()
    }
}

pub fn green_kernel(g: &Graph, domain: &[VertexId], x: VertexId) -> Result<GreenRow> {
    let xi = g.require_index(x)?;
    let (unknown, idx) = domain_indices(g, domain)?;
    let k = unknown[xi].ok_or_else(|| Error::invalid("source vertex must lie in the domain"))?;
    let lap = SymCsr::dirichlet_laplacian(g, &unknown, idx.len());
    let mut rhs = vec![0.0; idx.len()];
    rhs[k] = 1.0;
    let sol = conjugate_gradient(&lap, &rhs, SOLVER_TOLERANCE, iteration_cap(g))?;
    Ok(GreenRow {
        source: x,
        values: idx
            .iter()
            .zip(sol.x)
            .map(|(&i, v)| (VertexId(g.label(i)), v))
            .collect(),
    })
}

/// Full killed Green table `g_B(x, y)` for `x, y ∈ B`.
#[derive(Debug, Clone)]
pub struct GreenTable {
    pub domain: Vec<VertexId>,
    pub rows: Vec<GreenRow>,
}

impl GreenTable {
    pub fn compute(g: &Graph, domain: &[VertexId]) -> Result<Self> {
        let mut dom: Vec<VertexId> = domain.to_vec();
        dom.sort_unstable();
        dom.dedup();
        let rows = dom
            .iter()
            .map(|&x| green_kernel(g, &dom, x))
            .collect::<Result<Vec<_>>>()?;
        Ok(GreenTable { domain: dom, rows })
    }

    pub fn get(&self, x: VertexId, y: VertexId) -> f64 {
        match self.domain.binary_search(&x) {
            Ok(k) => self.rows[k].get(y),
            Err(_) => 0.0,
        }
    }
}

/// `E^x τ_B` for every `x ∈ B`, solving `L_B h = μ_B` once. Returned by
/// vertex index; zero off `B`.
pub fn mean_exit_times(g: &Graph, domain: &[VertexId]) -> Result<Vec<f64>> {
    let (unknown, idx) = domain_indices(g, domain)?;
    mean_exit_times_idx(g, &unknown, &idx)
}

fn mean_exit_times_idx(g: &Graph, unknown: &[Option<usize>], idx: &[usize]) -> Result<Vec<f64>> {
    let lap = SymCsr::dirichlet_laplacian(g, unknown, idx.len());
    let rhs: Vec<f64> = idx.iter().map(|&i| g.measures()[i]).collect();
    let sol = conjugate_gradient(&lap, &rhs, SOLVER_TOLERANCE, iteration_cap(g))?;
    let mut out = vec![0.0; g.len()];
    for (&i, v) in idx.iter().zip(sol.x) {
        out[i] = v;
    }
    Ok(out)
}

/// `E^origin τ_R`, the mean exit time of `B(origin, R)`.
pub fn mean_exit_time(g: &Graph, origin: VertexId, radius: f64, metric: Metric) -> Result<f64> {
    g.check_radius(radius)?;
    let o = g.require_index(origin)?;
    let ball = g.ball_indices(origin, radius, metric)?;
    if ball.len() == g.len() {
        return Err(Error::invalid("ball covers the whole graph"));
    }
    let mut unknown = vec![None; g.len()];
    for (k, &i) in ball.iter().enumerate() {
        unknown[i] = Some(k);
    }
    Ok(mean_exit_times_idx(g, &unknown, &ball)?[o])
}

/// Resistances `R_eff(origin, y)` for many `y`, from one envelope
/// factorization of the Laplacian grounded at `origin`.
///
/// Vertices are ordered by decreasing distance from the origin, so a ball
/// around the origin is a trailing block and each query only touches rows
/// inside the ball.
#[derive(Debug)]
pub struct PointResistances {
    origin: usize,
    position: Vec<usize>,
    factor: ProfileLdl,
}

impl PointResistances {
    pub fn new(g: &Graph, origin: VertexId, metric: Metric) -> Result<Self> {
        let o = g.require_index(origin)?;
        let dist = g.distances_from(origin, metric)?;
        let mut order: Vec<usize> = (0..g.len()).filter(|&i| i != o).collect();
        order.sort_by(|&a, &b| {
            dist[b]
                .partial_cmp(&dist[a])
                .unwrap()
                .then(g.label(a).cmp(&g.label(b)))
        });
        let mut position = vec![usize::MAX; g.len()];
        for (p, &i) in order.iter().enumerate() {
            position[i] = p;
        }
        let diag: Vec<f64> = order.iter().map(|&i| g.measures()[i]).collect();
        let lower: Vec<Vec<(usize, f64)>> = order
            .iter()
            .enumerate()
            .map(|(p, &i)| {
                g.neighbors(i)
                    .filter(|&(j, _)| j != o && position[j] < p)
                    .map(|(j, c)| (position[j], -c))
                    .collect()
            })
            .collect();
        let factor = ProfileLdl::factor(&diag, &lower)?;
        Ok(PointResistances {
            origin: o,
            position,
            factor,
        })
    }

    /// `R_eff(origin, y)` for a vertex index `y`.
    pub fn to_index(&self, y: usize, scratch: &mut Vec<f64>) -> f64 {
        if y == self.origin {
            return 0.0;
        }
        self.factor.inverse_diagonal_entry(self.position[y], scratch)
    }
}

/// Per-radius resistance observables.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ProfileRow {
    pub radius: f64,
    /// `R_eff(0, B(R)^c)`.
    pub reff_complement: f64,
    /// `max_{y ∈ B(R), y ≠ 0} R_eff(0, y) / r(d(0, y))`, 0 when the ball is `{0}`.
    pub max_ratio: f64,
    pub witness: Option<VertexId>,
}

pub fn resistance_profile(
    g: &Graph,
    radii: &[f64],
    metric: Metric,
    r: &GrowthFunction,
) -> Result<Vec<ProfileRow>> {
    let origin = g.marked();
    for &rad in radii {
        g.check_radius(rad)?;
    }
    let Some(rmax) = radii.iter().copied().reduce(f64::max) else {
        return Ok(Vec::new());
    };
    let dist = g.distances_from(origin, metric)?;
    let points = PointResistances::new(g, origin, metric)?;
    let mut scratch = Vec::new();
    let in_ball: Vec<(usize, f64)> = (0..g.len())
        .filter(|&i| dist[i] < rmax && dist[i] > 0.0)
        .map(|i| (i, points.to_index(i, &mut scratch) / r.eval(dist[i])))
        .collect();
    radii
        .iter()
        .map(|&rad| {
            let reff_complement = complement_resistance(g, origin, rad, metric)?;
            let (witness, max_ratio) = in_ball
                .iter()
                .filter(|&&(i, _)| dist[i] < rad)
                .fold((None, 0.0), |(w, m), &(i, ratio)| {
                    if ratio > m {
                        (Some(VertexId(g.label(i))), ratio)
                    } else {
                        (w, m)
                    }
                });
            Ok(ProfileRow {
                radius: rad,
                reff_complement,
                max_ratio,
                witness,
            })
        })
        .collect()
}

/// Conductances of the unit segments after every bond of length `ℓ` and
/// conductance `c` is split into `ℓ` unit segments of conductance `c·ℓ`
/// and laid on the line. Segment `i` spans `[i-1, i]`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ProjectedLine {
    /// Label of the left end of the first segment.
    pub lo: i64,
    /// `conductances[k]` belongs to segment `[lo + k, lo + k + 1]`.
    pub conductances: Vec<f64>,
}

pub fn project_long_bonds(g: &Graph) -> Result<ProjectedLine> {
    let w = g
        .window()
        .ok_or_else(|| Error::invalid("projection needs a line-labelled graph"))?;
    let len = (w.hi - w.lo) as usize;
    let mut diff = vec![0.0; len + 1];
    for b in g.bonds() {
        let (u, v) = (b.u.0.min(b.v.0), b.u.0.max(b.v.0));
        let weight = b.conductance * (v - u) as f64;
        diff[(u - w.lo) as usize] += weight;
        diff[(v - w.lo) as usize] -= weight;
    }
    let mut conductances = Vec::with_capacity(len);
    let mut acc = 0.0;
    for (k, d) in diff.iter().take(len).enumerate() {
        acc += d;
        if !(acc > 0.0) {
            return Err(Error::invalid(format!(
                "no bond crosses segment [{}, {}]",
                w.lo + k as i64,
                w.lo + k as i64 + 1
            )));
        }
        conductances.push(acc);
    }
    Ok(ProjectedLine {
        lo: w.lo,
        conductances,
    })
}

impl ProjectedLine {
    pub fn hi(&self) -> i64 {
        self.lo + self.conductances.len() as i64
    }

    /// Conductance of segment `[i-1, i]`.
    pub fn segment(&self, i: i64) -> Option<f64> {
        let k = i - 1 - self.lo;
        (k >= 0).then(|| self.conductances.get(k as usize).copied()).flatten()
    }

    /// Series resistance of the projected path between labels `a` and `b`.
    pub fn resistance(&self, a: i64, b: i64) -> Result<f64> {
        let (a, b) = (a.min(b), a.max(b));
        if a < self.lo || b > self.hi() {
            return Err(Error::invalid("segment range outside the projected window"));
        }
        Ok((a + 1..=b).map(|i| 1.0 / self.segment(i).unwrap()).sum())
    }

    /// Projected resistance from `origin` to `B(origin, R)^c`: the two
    /// one-sided series resistances combined in parallel.
    pub fn complement_resistance(&self, origin: i64, radius: i64) -> Result<f64> {
        let right = self.resistance(origin, origin + radius)?;
        let left = self.resistance(origin - radius, origin)?;
        Ok(1.0 / (1.0 / right + 1.0 / left))
    }
}
