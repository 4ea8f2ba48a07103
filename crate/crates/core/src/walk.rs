//! Discrete-time simple random walk: exact heat kernels by repeated
//! application of the one-step kernel `P(x, y) = c_xy / μ_x`, and Monte
//! Carlo trajectories with exit times, maximal displacement and range.

use std::io::Write;

use rand::Rng as _;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::generators::{rng_from_seed, stream_seed};
use crate::graph::{Graph, Metric, VertexId};

/// Boundary-contact probability above which a kernel is flagged.
pub const TRUNCATION_THRESHOLD: f64 = 1e-3;

/// Evolves `P^origin(X_n = ·)` one step at a time, alongside a copy of the
/// walk killed on entering the window's edge zone. The mass lost by the
/// killed copy is the probability of having touched the edge zone.
pub struct KernelEvolution<'g> {
    graph: &'g Graph,
    origin: usize,
    step: usize,
    dist: Vec<f64>,
    next: Vec<f64>,
    killed: Vec<f64>,
    killed_next: Vec<f64>,
    edge: Vec<bool>,
    has_edge: bool,
    absorbed: f64,
}

impl<'g> KernelEvolution<'g> {
    pub fn new(graph: &'g Graph, origin: VertexId) -> Result<Self> {
        let o = graph.require_index(origin)?;
        let n = graph.len();
        let edge = graph.edge_zone();
        let has_edge = edge.iter().any(|&e| e);
        let mut dist = vec![0.0; n];
        dist[o] = 1.0;
        let mut killed = vec![0.0; n];
        let mut absorbed = 0.0;
        if edge[o] {
            absorbed = 1.0;
        } else if has_edge {
            killed[o] = 1.0;
        }
        Ok(KernelEvolution {
            graph,
            origin: o,
            step: 0,
            dist,
            next: vec![0.0; n],
            killed,
            killed_next: vec![0.0; n],
            edge,
            has_edge,
            absorbed,
        })
    }

    pub fn step_count(&self) -> usize {
        self.step
    }

    /// `P^origin(X_n = y)` by vertex index.
    pub fn distribution(&self) -> &[f64] {
        &self.dist
    }

    /// `p_n(origin, y) = P^origin(X_n = y) / μ_y`.
    pub fn density(&self, y: usize) -> f64 {
        self.dist[y] / self.graph.measures()[y]
    }

    pub fn return_density(&self) -> f64 {
        self.density(self.origin)
    }

    /// `P^origin(X_k in the edge zone for some k <= n)`.
    pub fn boundary_mass(&self) -> f64 {
        self.absorbed
    }

    fn apply(g: &Graph, from: &[f64], to: &mut [f64]) {
        to.iter_mut().for_each(|v| *v = 0.0);
        let mu = g.measures();
        for (x, &q) in from.iter().enumerate() {
            if q == 0.0 {
                continue;
            }
            let t = q / mu[x];
            for (y, c) in g.neighbors(x) {
                to[y] += t * c;
            }
        }
    }

    pub fn advance(&mut self) {
        Self::apply(self.graph, &self.dist, &mut self.next);
        std::mem::swap(&mut self.dist, &mut self.next);
        if self.has_edge && self.absorbed < 1.0 {
            Self::apply(self.graph, &self.killed, &mut self.killed_next);
            for (v, e) in self.killed_next.iter_mut().zip(&self.edge) {
                if *e {
                    self.absorbed += *v;
                    *v = 0.0;
                }
            }
            std::mem::swap(&mut self.killed, &mut self.killed_next);
        }
        self.step += 1;
    }
}

/// `p_n(origin, ·)` for `n = 0..=horizon`, stored sparsely.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct HeatKernelTable {
    pub origin: VertexId,
    pub horizon: usize,
    /// `values[n]` lists `(y, p_n(origin, y))` over the support, ascending by label.
    pub values: Vec<Vec<(VertexId, f64)>>,
    pub boundary_mass: Vec<f64>,
    pub truncation_contaminated: bool,
}

impl HeatKernelTable {
    pub fn get(&self, n: usize, y: VertexId) -> f64 {
        self.values
            .get(n)
            .and_then(|row| {
                row.binary_search_by_key(&y, |&(v, _)| v)
                    .ok()
                    .map(|k| row[k].1)
            })
            .unwrap_or(0.0)
    }

    /// `Σ_y p_n(origin, y) μ_y`, which must be 1.
    pub fn total_mass(&self, g: &Graph, n: usize) -> f64 {
        self.values[n]
            .iter()
            .map(|&(y, p)| p * g.measure(y).unwrap_or(0.0))
            .sum()
    }
}

pub fn heat_kernel_exact(g: &Graph, origin: VertexId, horizon: usize) -> Result<HeatKernelTable> {
    let mut ev = KernelEvolution::new(g, origin)?;
    let mut values = Vec::with_capacity(horizon + 1);
    let mut boundary_mass = Vec::with_capacity(horizon + 1);
    loop {
        values.push(
            ev.distribution()
                .iter()
                .enumerate()
                .filter(|(_, &q)| q != 0.0)
                .map(|(y, &q)| (VertexId(g.label(y)), q / g.measures()[y]))
                .collect(),
        );
        boundary_mass.push(ev.boundary_mass());
        if ev.step_count() == horizon {
            break;
        }
        ev.advance();
    }
    let truncation_contaminated = boundary_mass.iter().any(|&m| m > TRUNCATION_THRESHOLD);
    Ok(HeatKernelTable {
        origin,
        horizon,
        values,
        boundary_mass,
        truncation_contaminated,
    })
}

/// Scalar summaries of the exact kernel at every step, for long horizons
/// where the full table is too large to keep.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct KernelSeries {
    /// `p_n(origin, origin)` for `n = 0..=horizon`.
    pub return_density: Vec<f64>,
    pub boundary_mass: Vec<f64>,
    /// `E^origin d(origin, X_n)`.
    pub mean_distance: Vec<f64>,
}

impl KernelSeries {
    pub fn horizon(&self) -> usize {
        self.return_density.len() - 1
    }

    /// `p_{2n}(origin, origin)`.
    pub fn p2n(&self, n: usize) -> f64 {
        self.return_density[2 * n]
    }

    /// `f_n = p_n + p_{n+1}`, insensitive to bipartite parity.
    pub fn f(&self, n: usize) -> f64 {
        self.return_density[n] + self.return_density[n + 1]
    }

    pub fn truncation_contaminated(&self) -> bool {
        self.boundary_mass.iter().any(|&m| m > TRUNCATION_THRESHOLD)
    }

    /// CSV `n,p2n,f_n,boundary_mass` for every `n` with `2n <= horizon`.
    pub fn write_csv<W: Write>(&self, mut out: W) -> std::io::Result<()> {
        writeln!(out, "n,p2n,f_n,boundary_mass")?;
        for n in 0..=(self.horizon() / 2) {
            let f = if n < self.horizon() { self.f(n) } else { f64::NAN };
            writeln!(out, "{},{:e},{:e},{:e}", n, self.p2n(n), f, self.boundary_mass[2 * n])?;
        }
        Ok(())
    }
}

pub fn kernel_series(g: &Graph, origin: VertexId, horizon: usize, metric: Metric) -> Result<KernelSeries> {
    let d = g.distances_from(origin, metric)?;
    let mut ev = KernelEvolution::new(g, origin)?;
    let mut out = KernelSeries {
        return_density: Vec::with_capacity(horizon + 1),
        boundary_mass: Vec::with_capacity(horizon + 1),
        mean_distance: Vec::with_capacity(horizon + 1),
    };
    loop {
        out.return_density.push(ev.return_density());
        out.boundary_mass.push(ev.boundary_mass());
        out.mean_distance
            .push(ev.distribution().iter().zip(&d).map(|(q, d)| q * d).sum());
        if ev.step_count() == horizon {
            break;
        }
        ev.advance();
    }
    Ok(out)
}

/// Monte Carlo settings.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct WalkConfig {
    pub n_steps: usize,
    pub n_trajectories: usize,
    pub seed: u64,
    /// Radii `R` whose exit times `τ_R` are recorded.
    pub radii: Vec<f64>,
    /// Times at which `Y_n`, `S_n`, `d(0, X_n)` and `X_n` are recorded.
    /// `n_steps` is always added.
    pub checkpoints: Vec<usize>,
    pub metric: Metric,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TrajectoryRecord {
    pub index: usize,
    /// `τ_R` per radius; `None` when the walk stayed in the ball for all
    /// `n_steps` (censored).
    pub exit_times: Vec<Option<usize>>,
    /// `Y_n = max_{k <= n} d(0, X_k)` per checkpoint.
    pub max_displacement: Vec<f64>,
    /// `S_n = μ({X_0, ..., X_n})` per checkpoint.
    pub range_measure: Vec<f64>,
    /// `d(0, X_n)` per checkpoint.
    pub displacement: Vec<f64>,
    pub position: Vec<VertexId>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct WalkStatistics {
    pub origin: VertexId,
    pub n_steps: usize,
    pub radii: Vec<f64>,
    pub checkpoints: Vec<usize>,
    pub trajectories: Vec<TrajectoryRecord>,
}

impl WalkStatistics {
    pub fn checkpoint_index(&self, n: usize) -> Option<usize> {
        self.checkpoints.iter().position(|&c| c == n)
    }

    /// Mean of uncensored `τ_R` and the number of censored trajectories.
    pub fn mean_exit_time(&self, radius_index: usize) -> (f64, usize) {
        let (sum, count, censored) =
            self.trajectories
                .iter()
                .fold((0.0, 0usize, 0usize), |(s, c, z), t| match t.exit_times[radius_index] {
                    Some(tau) => (s + tau as f64, c + 1, z),
                    None => (s, c, z + 1),
                });
        (sum / count.max(1) as f64, censored)
    }

    /// CSV `trajectory,tauR,censored,Yn,Sn,disp` for one radius, with
    /// `Y_n, S_n, disp` taken at `n_steps` and censored `τ_R` written as `n_steps`.
    pub fn write_csv<W: Write>(&self, radius_index: usize, mut out: W) -> std::io::Result<()> {
        writeln!(out, "trajectory,tauR,censored,Yn,Sn,disp")?;
        let last = self.checkpoints.len() - 1;
        for t in &self.trajectories {
            let (tau, censored) = match t.exit_times[radius_index] {
                Some(tau) => (tau, 0),
                None => (self.n_steps, 1),
            };
            writeln!(
                out,
                "{},{},{},{},{},{}",
                t.index, tau, censored, t.max_displacement[last], t.range_measure[last], t.displacement[last]
            )?;
        }
        Ok(())
    }
}

pub fn simulate(g: &Graph, origin: VertexId, config: &WalkConfig) -> Result<WalkStatistics> {
    let o = g.require_index(origin)?;
    if config.n_steps == 0 || config.n_trajectories == 0 {
        return Err(Error::invalid("need at least one step and one trajectory"));
    }
    if config.radii.iter().any(|&r| !(r > 0.0)) {
        return Err(Error::invalid("exit radii must be positive"));
    }
    let dist = g.distances_from(origin, config.metric)?;
    let mut checkpoints: Vec<usize> = config
        .checkpoints
        .iter()
        .copied()
        .filter(|&c| c <= config.n_steps)
        .chain(std::iter::once(config.n_steps))
        .collect();
    checkpoints.sort_unstable();
    checkpoints.dedup();

    let trajectories: Vec<TrajectoryRecord> = (0..config.n_trajectories)
        .into_par_iter()
        .map_init(
            || vec![usize::MAX; g.len()],
            |stamp, index| {
                run_trajectory(g, o, &dist, config, &checkpoints, index, stamp)
            },
        )
        .collect();
    Ok(WalkStatistics {
        origin,
        n_steps: config.n_steps,
        radii: config.radii.clone(),
        checkpoints,
        trajectories,
    })
}

fn run_trajectory(
    g: &Graph,
    origin: usize,
    dist: &[f64],
    config: &WalkConfig,
    checkpoints: &[usize],
    index: usize,
    stamp: &mut [usize],
) -> TrajectoryRecord {
    let mut rng = rng_from_seed(stream_seed(config.seed, index as u64));
    let mu = g.measures();
    let nc = checkpoints.len();
    let mut rec = TrajectoryRecord {
        index,
        exit_times: vec![None; config.radii.len()],
        max_displacement: Vec::with_capacity(nc),
        range_measure: Vec::with_capacity(nc),
        displacement: Vec::with_capacity(nc),
        position: Vec::with_capacity(nc),
    };
    let mut x = origin;
    let mut ymax = 0.0f64;
    stamp[x] = index;
    let mut range = mu[x];
    let mut next_cp = 0;
    let mut step = 0usize;
    loop {
        let d = dist[x];
        ymax = ymax.max(d);
        for (k, &r) in config.radii.iter().enumerate() {
            if rec.exit_times[k].is_none() && d >= r {
                rec.exit_times[k] = Some(step);
            }
        }
        while next_cp < nc && checkpoints[next_cp] == step {
            rec.max_displacement.push(ymax);
            rec.range_measure.push(range);
            rec.displacement.push(d);
            rec.position.push(VertexId(g.label(x)));
            next_cp += 1;
        }
        if step == config.n_steps {
            break;
        }
        x = step_from(g, x, &mut rng);
        if stamp[x] != index {
            stamp[x] = index;
            range += mu[x];
        }
        step += 1;
    }
    rec
}

/// One step of the walk from vertex index `x`.
fn step_from(g: &Graph, x: usize, rng: &mut crate::generators::Rng) -> usize {
    let mut u = rng.gen::<f64>() * g.measures()[x];
    let nbrs = g.neighbor_indices(x);
    let wts = g.neighbor_weights(x);
    for (&cand, &w) in nbrs.iter().zip(wts) {
        if u < w {
            return cand;
        }
        u -= w;
    }
    nbrs[nbrs.len() - 1]
}

/// Monte Carlo estimate of `P^x(T_A < T_B)` with its standard error.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct HittingEstimate {
    pub probability: f64,
    pub std_error: f64,
    pub trials: usize,
}

/// Races walks from `x` until they hit `a` or `b`; trial `i` uses stream
/// `(seed, i)`. Needs disjoint nonempty `a`, `b` with `x` in neither.
pub fn hitting_race(
    g: &Graph,
    x: VertexId,
    a: &[VertexId],
    b: &[VertexId],
    trials: usize,
    seed: u64,
) -> Result<HittingEstimate> {
    let start = g.require_index(x)?;
    let mut target = vec![0u8; g.len()];
    for (set, tag) in [(a, 1u8), (b, 2u8)] {
        for v in set {
            let i = g.require_index(*v)?;
            if target[i] != 0 && target[i] != tag {
                return Err(Error::invalid("target sets overlap"));
            }
            target[i] = tag;
        }
    }
    if a.is_empty() || b.is_empty() || trials == 0 {
        return Err(Error::invalid("need nonempty targets and at least one trial"));
    }
    if target[start] != 0 {
        return Err(Error::invalid("start vertex lies in a target set"));
    }
    let wins: usize = (0..trials)
        .into_par_iter()
        .map(|i| {
            let mut rng = rng_from_seed(stream_seed(seed, i as u64));
            let mut y = start;
            while target[y] == 0 {
                y = step_from(g, y, &mut rng);
            }
            (target[y] == 1) as usize
        })
        .sum();
    let p = wins as f64 / trials as f64;
    Ok(HittingEstimate {
        probability: p,
        std_error: (p * (1.0 - p) / trials as f64).sqrt(),
        trials,
    })
}

/// Exact `E^origin τ_R`; see [`crate::resistance::mean_exit_time`].
pub fn mean_exit_time_exact(g: &Graph, origin: VertexId, radius: f64, metric: Metric) -> Result<f64> {
    crate::resistance::mean_exit_time(g, origin, radius, metric)
}
