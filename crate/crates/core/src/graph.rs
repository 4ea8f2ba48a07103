//! Weighted undirected multigraphs on integer-labelled vertices.
//!
//! A [`Graph`] is immutable once built. Parallel bonds are kept as given
//! (the bond list is a multiset) and their conductances are summed in the
//! adjacency used by solvers and walks. The vertex measure `μ_x` is the
//! weighted degree, so for unit conductances it counts incident bonds with
//! multiplicity.

use std::collections::{HashMap, VecDeque};
use std::fmt;
use std::io::{BufRead, Write};
use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub struct VertexId(pub i64);

impl fmt::Display for VertexId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.0)
    }
}

impl From<i64> for VertexId {
    fn from(v: i64) -> Self {
        VertexId(v)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Bond {
    pub u: VertexId,
    pub v: VertexId,
    pub conductance: f64,
}

impl Bond {
    pub fn unit(u: i64, v: i64) -> Self {
        Bond {
            u: VertexId(u),
            v: VertexId(v),
            conductance: 1.0,
        }
    }

    /// Label distance `|u - v|`.
    pub fn length(&self) -> u64 {
        self.u.0.abs_diff(self.v.0)
    }
}

/// Label range of a finite window cut out of a model on the integer line.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct Window {
    pub lo: i64,
    pub hi: i64,
}

impl Window {
    pub fn contains(&self, x: i64) -> bool {
        self.lo <= x && x <= self.hi
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Metric {
    /// Breadth-first hop count.
    GraphDistance,
    /// `|x - y|` on labels; only defined for line-labelled graphs.
    LineDistance,
}

impl std::str::FromStr for Metric {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "graph" | "graph-distance" => Ok(Metric::GraphDistance),
            "line" | "line-distance" => Ok(Metric::LineDistance),
            other => Err(Error::invalid(format!("unknown metric `{other}`"))),
        }
    }
}

impl fmt::Display for Metric {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Metric::GraphDistance => "graph",
            Metric::LineDistance => "line",
        })
    }
}

#[derive(Debug, Clone)]
pub struct Graph {
    labels: Vec<i64>,
    /// Set when labels are exactly `labels[0]..=labels[n-1]`.
    contiguous: bool,
    index: HashMap<i64, usize>,
    bonds: Vec<Bond>,
    offsets: Vec<usize>,
    neighbors: Vec<usize>,
    weights: Vec<f64>,
    measure: Vec<f64>,
    marked: usize,
    window: Option<Window>,
}

impl Graph {
    /// Builds a graph from its bonds. The vertex set is the set of bond
    /// endpoints plus `marked`. A `window` marks the graph as line-labelled;
    /// every vertex must then lie inside it.
    pub fn new(bonds: Vec<Bond>, marked: VertexId, window: Option<Window>) -> Result<Self> {
        let mut labels: Vec<i64> = bonds
            .iter()
            .flat_map(|b| [b.u.0, b.v.0])
            .chain(std::iter::once(marked.0))
            .collect();
        labels.sort_unstable();
        labels.dedup();
        Self::with_vertices(labels, bonds, marked, window)
    }

    /// Like [`Graph::new`] but with an explicit vertex list.
    pub fn with_vertices(
        mut labels: Vec<i64>,
        bonds: Vec<Bond>,
        marked: VertexId,
        window: Option<Window>,
    ) -> Result<Self> {
        labels.sort_unstable();
        if labels.windows(2).any(|w| w[0] == w[1]) {
            return Err(Error::invalid("duplicate vertex label"));
        }
        if labels.len() < 2 {
            return Err(Error::invalid("a graph needs at least two vertices"));
        }
        let contiguous = (labels[labels.len() - 1] - labels[0]) as usize == labels.len() - 1;
        let index: HashMap<i64, usize> = if contiguous {
            HashMap::new()
        } else {
            labels.iter().enumerate().map(|(i, &l)| (l, i)).collect()
        };
        let lookup = |x: i64| -> Option<usize> {
            if contiguous {
                let lo = labels[0];
                (x >= lo && x <= labels[labels.len() - 1]).then(|| (x - lo) as usize)
            } else {
                index.get(&x).copied()
            }
        };
        if let Some(w) = window {
            if w.lo > w.hi || !labels.iter().all(|&x| w.contains(x)) {
                return Err(Error::invalid("vertex outside the declared window"));
            }
        }
        let marked_idx =
            lookup(marked.0).ok_or_else(|| Error::invalid("marked vertex not in graph"))?;

        let n = labels.len();
        let mut pairs: Vec<(usize, usize, f64)> = Vec::with_capacity(2 * bonds.len());
        for b in &bonds {
            if b.u == b.v {
                return Err(Error::invalid(format!("self-loop at {}", b.u)));
            }
            if !(b.conductance.is_finite() && b.conductance > 0.0) {
                return Err(Error::invalid(format!(
                    "bond {}-{} has non-positive conductance {}",
                    b.u, b.v, b.conductance
                )));
            }
            let iu = lookup(b.u.0).ok_or_else(|| Error::invalid("bond endpoint not a vertex"))?;
            let iv = lookup(b.v.0).ok_or_else(|| Error::invalid("bond endpoint not a vertex"))?;
            pairs.push((iu, iv, b.conductance));
            pairs.push((iv, iu, b.conductance));
        }
        pairs.sort_unstable_by(|a, b| (a.0, a.1).cmp(&(b.0, b.1)));

        let mut offsets = vec![0usize; n + 1];
        let mut neighbors = Vec::with_capacity(pairs.len());
        let mut weights: Vec<f64> = Vec::with_capacity(pairs.len());
        let mut measure = vec![0.0; n];
        let mut row = 0;
        for (a, b, c) in pairs {
            while row < a {
                row += 1;
                offsets[row] = neighbors.len();
            }
            measure[a] += c;
            if neighbors.len() > offsets[a] && *neighbors.last().unwrap() == b {
                *weights.last_mut().unwrap() += c;
            } else {
                neighbors.push(b);
                weights.push(c);
            }
        }
        while row < n {
            row += 1;
            offsets[row] = neighbors.len();
        }

        let g = Graph {
            labels,
            contiguous,
            index,
            bonds,
            offsets,
            neighbors,
            weights,
            measure,
            marked: marked_idx,
            window,
        };
        if g.measure.iter().any(|&m| m <= 0.0) || !g.is_connected() {
            return Err(Error::invalid("graph is not connected"));
        }
        Ok(g)
    }

    fn is_connected(&self) -> bool {
        let mut seen = vec![false; self.len()];
        let mut stack = vec![0usize];
        seen[0] = true;
        let mut count = 1;
        while let Some(x) = stack.pop() {
            for &y in self.neighbor_indices(x) {
                if !seen[y] {
                    seen[y] = true;
                    count += 1;
                    stack.push(y);
                }
            }
        }
        count == self.len()
    }

    pub fn len(&self) -> usize {
        self.labels.len()
    }

    pub fn is_empty(&self) -> bool {
        self.labels.is_empty()
    }

    pub fn bonds(&self) -> &[Bond] {
        &self.bonds
    }

    pub fn window(&self) -> Option<Window> {
        self.window
    }

    pub fn is_line_labeled(&self) -> bool {
        self.window.is_some()
    }

    pub fn marked(&self) -> VertexId {
        VertexId(self.labels[self.marked])
    }

    pub fn marked_index(&self) -> usize {
        self.marked
    }

    pub fn vertices(&self) -> impl ExactSizeIterator<Item = VertexId> + '_ {
        self.labels.iter().map(|&l| VertexId(l))
    }

    pub fn label(&self, idx: usize) -> i64 {
        self.labels[idx]
    }

    pub fn index_of(&self, v: VertexId) -> Option<usize> {
        if self.contiguous {
            let lo = self.labels[0];
            (v.0 >= lo && v.0 <= self.labels[self.len() - 1]).then(|| (v.0 - lo) as usize)
        } else {
            self.index.get(&v.0).copied()
        }
    }

    pub(crate) fn require_index(&self, v: VertexId) -> Result<usize> {
        self.index_of(v)
            .ok_or_else(|| Error::invalid(format!("vertex {v} is not in the graph")))
    }

    pub fn contains(&self, v: VertexId) -> bool {
        self.index_of(v).is_some()
    }

    /// The vertex measure `μ_x`.
    pub fn measure(&self, v: VertexId) -> Option<f64> {
        self.index_of(v).map(|i| self.measure[i])
    }

    pub fn measures(&self) -> &[f64] {
        &self.measure
    }

    pub fn neighbor_indices(&self, idx: usize) -> &[usize] {
        &self.neighbors[self.offsets[idx]..self.offsets[idx + 1]]
    }

    /// Aggregated conductances, parallel to [`Graph::neighbor_indices`].
    pub fn neighbor_weights(&self, idx: usize) -> &[f64] {
        &self.weights[self.offsets[idx]..self.offsets[idx + 1]]
    }

    pub fn neighbors(&self, idx: usize) -> impl Iterator<Item = (usize, f64)> + '_ {
        self.neighbor_indices(idx)
            .iter()
            .copied()
            .zip(self.neighbor_weights(idx).iter().copied())
    }

    /// Distance from the marked vertex to the nearer window end. `None` for
    /// graphs that are not windows.
    pub fn window_margin(&self) -> Option<i64> {
        self.window.map(|w| {
            let m = self.labels[self.marked];
            (m - w.lo).min(w.hi - m)
        })
    }

    /// Refuses radii that reach within three quarters of the window margin.
    pub fn check_radius(&self, radius: f64) -> Result<()> {
        if let Some(margin) = self.window_margin() {
            let limit = margin as f64 / 4.0;
            if radius > limit {
                return Err(Error::Truncation { radius, limit });
            }
        }
        Ok(())
    }

    /// Indices of vertices near the window ends: label within one eighth of
    /// the window width of `lo` or `hi`. Empty for graphs without a window.
    pub fn edge_zone(&self) -> Vec<bool> {
        match self.window {
            None => vec![false; self.len()],
            Some(w) => {
                let margin = (w.hi - w.lo) / 8;
                self.labels
                    .iter()
                    .map(|&x| x - w.lo < margin || w.hi - x < margin)
                    .collect()
            }
        }
    }

    /// Distances from `center` to every vertex, by vertex index.
    pub fn distances_from(&self, center: VertexId, metric: Metric) -> Result<Vec<f64>> {
        let c = self.require_index(center)?;
        match metric {
            Metric::LineDistance => {
                if !self.is_line_labeled() {
                    return Err(Error::invalid(
                        "line distance requires a line-labelled graph",
                    ));
                }
                Ok(self
                    .labels
                    .iter()
                    .map(|&x| x.abs_diff(center.0) as f64)
                    .collect())
            }
            Metric::GraphDistance => {
                let mut dist = vec![f64::INFINITY; self.len()];
                let mut queue = VecDeque::new();
                dist[c] = 0.0;
                queue.push_back(c);
                while let Some(x) = queue.pop_front() {
                    let next = dist[x] + 1.0;
                    for &y in self.neighbor_indices(x) {
                        if dist[y].is_infinite() {
                            dist[y] = next;
                            queue.push_back(y);
                        }
                    }
                }
                Ok(dist)
            }
        }
    }

    /// Indices of `B(center, radius) = {y : d(center, y) < radius}`, ascending.
    pub fn ball_indices(&self, center: VertexId, radius: f64, metric: Metric) -> Result<Vec<usize>> {
        if !(radius > 0.0) {
            return Err(Error::invalid(format!("radius must be positive, got {radius}")));
        }
        let dist = self.distances_from(center, metric)?;
        Ok(dist
            .iter()
            .enumerate()
            .filter(|(_, &d)| d < radius)
            .map(|(i, _)| i)
            .collect())
    }

    pub fn ball(&self, center: VertexId, radius: f64, metric: Metric) -> Result<Vec<VertexId>> {
        Ok(self
            .ball_indices(center, radius, metric)?
            .into_iter()
            .map(|i| VertexId(self.labels[i]))
            .collect())
    }

    /// `V(center, radius) = μ(B(center, radius))`.
    pub fn volume(&self, center: VertexId, radius: f64, metric: Metric) -> Result<f64> {
        Ok(self
            .ball_indices(center, radius, metric)?
            .into_iter()
            .map(|i| self.measure[i])
            .sum())
    }

    pub fn set_measure(&self, indices: &[usize]) -> f64 {
        indices.iter().map(|&i| self.measure[i]).sum()
    }

    /// Returns a copy with one more bond.
    pub fn with_bond(&self, bond: Bond) -> Result<Graph> {
        let mut bonds = self.bonds.clone();
        bonds.push(bond);
        Graph::with_vertices(self.labels.clone(), bonds, self.marked(), self.window)
    }

    pub fn write_edge_list<W: Write>(&self, mut out: W) -> std::io::Result<()> {
        match self.window {
            Some(w) => writeln!(out, "# marked={} window={},{}", self.marked(), w.lo, w.hi)?,
            None => writeln!(out, "# marked={} window=none", self.marked())?,
        }
        for b in &self.bonds {
            writeln!(out, "{} {} {}", b.u, b.v, b.conductance)?;
        }
        Ok(())
    }

    pub fn save(&self, path: &Path) -> Result<()> {
        let file = std::fs::File::create(path)?;
        let mut out = std::io::BufWriter::new(file);
        self.write_edge_list(&mut out)?;
        out.flush()?;
        Ok(())
    }

    pub fn read_edge_list<R: BufRead>(input: R, path: &Path) -> Result<Graph> {
        let perr = |line: usize, message: String| Error::Parse {
            path: path.to_path_buf(),
            line,
            message,
        };
        let mut header: Option<(i64, Option<Window>)> = None;
        let mut bonds = Vec::new();
        for (i, line) in input.lines().enumerate() {
            let line = line?;
            let lineno = i + 1;
            let trimmed = line.trim();
            if trimmed.is_empty() {
                continue;
            }
            if let Some(rest) = trimmed.strip_prefix('#') {
                if header.is_some() {
                    continue;
                }
                let mut marked = None;
                let mut window = None;
                for tok in rest.split_whitespace() {
                    if let Some(v) = tok.strip_prefix("marked=") {
                        marked = Some(v.parse::<i64>().map_err(|e| perr(lineno, e.to_string()))?);
                    } else if let Some(v) = tok.strip_prefix("window=") {
                        window = Some(if v == "none" {
                            None
                        } else {
                            let (lo, hi) = v
                                .split_once(',')
                                .ok_or_else(|| perr(lineno, format!("bad window `{v}`")))?;
                            Some(Window {
                                lo: lo.parse().map_err(|_| perr(lineno, format!("bad window `{v}`")))?,
                                hi: hi.parse().map_err(|_| perr(lineno, format!("bad window `{v}`")))?,
                            })
                        });
                    }
                }
                match (marked, window) {
                    (Some(m), Some(w)) => header = Some((m, w)),
                    _ => return Err(perr(lineno, "header needs marked= and window=".into())),
                }
                continue;
            }
            let fields: Vec<&str> = trimmed.split_whitespace().collect();
            if fields.len() != 3 {
                return Err(perr(lineno, "expected `u v conductance`".into()));
            }
            let u = fields[0].parse::<i64>().map_err(|e| perr(lineno, e.to_string()))?;
            let v = fields[1].parse::<i64>().map_err(|e| perr(lineno, e.to_string()))?;
            let c = fields[2].parse::<f64>().map_err(|e| perr(lineno, e.to_string()))?;
            bonds.push(Bond {
                u: VertexId(u),
                v: VertexId(v),
                conductance: c,
            });
        }
        let (marked, window) = header.ok_or_else(|| perr(1, "missing header line".into()))?;
        Graph::new(bonds, VertexId(marked), window)
    }

    pub fn load(path: &Path) -> Result<Graph> {
        let file = std::fs::File::open(path)?;
        Graph::read_edge_list(std::io::BufReader::new(file), path)
    }
}
