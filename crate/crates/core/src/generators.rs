//! Seeded samplers for long-range percolation on a window of the integer
//! line, plus small deterministic fixtures.
//!
//! Nearest-neighbour bonds are always present, so every sample is connected.
//! A bond of length `n >= 2` is present independently with probability
//! `p(n)`; pairs with an endpoint outside `[-L, L]` are never sampled.
//! Bonds of a fixed length are drawn with geometric skips, so the cost is
//! proportional to the number of bonds produced rather than to `L^2`.

use std::fmt;
use std::str::FromStr;

use rand::SeedableRng;
use rand::Rng as _;
use rand_xoshiro::Xoshiro256PlusPlus;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::graph::{Bond, Graph, VertexId, Window};

/// Upper cap on long-bond probabilities, keeping `p(n) < 1` for `n >= 2`.
pub const PROBABILITY_CAP: f64 = 1.0 - 1.0 / 4_294_967_296.0;

pub type Rng = Xoshiro256PlusPlus;

/// SplitMix64 finalizer.
pub fn splitmix64(mut z: u64) -> u64 {
    z = z.wrapping_add(0x9E37_79B9_7F4A_7C15);
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    z ^ (z >> 31)
}

/// Seed of stream `index` under `master`: `splitmix64(master ^ splitmix64(index))`.
/// Streams depend only on `(master, index)`, never on scheduling.
pub fn stream_seed(master: u64, index: u64) -> u64 {
    splitmix64(master ^ splitmix64(index))
}

pub fn rng_from_seed(seed: u64) -> Rng {
    Xoshiro256PlusPlus::seed_from_u64(seed)
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct LongRangeParams {
    pub half_width: u32,
    pub beta: f64,
    pub s: f64,
    pub seed: u64,
}

impl LongRangeParams {
    /// `p(1) = 1`, `p(n) = min(β n^{-s}, cap)` otherwise.
    pub fn probability(&self, n: u64) -> f64 {
        match n {
            0 => 0.0,
            1 => 1.0,
            _ => (self.beta * (n as f64).powf(-self.s)).min(PROBABILITY_CAP),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ExpTailParams {
    pub half_width: u32,
    pub rate: f64,
    pub seed: u64,
}

impl ExpTailParams {
    /// `p(1) = 1`, `p(n) = e^{-c n}` otherwise.
    pub fn probability(&self, n: u64) -> f64 {
        match n {
            0 => 0.0,
            1 => 1.0,
            _ => (-self.rate * n as f64).exp().min(PROBABILITY_CAP),
        }
    }
}

pub fn generate_long_range(params: &LongRangeParams) -> Result<Graph> {
    if params.half_width < 2 {
        return Err(Error::invalid("window half-width must be at least 2"));
    }
    if !(params.s > 2.0) {
        return Err(Error::invalid(format!(
            "long-range exponent s must exceed 2, got {}",
            params.s
        )));
    }
    if !(params.beta >= 0.0 && params.beta.is_finite()) {
        return Err(Error::invalid("beta must be finite and non-negative"));
    }
    sample_line_model(params.half_width, params.seed, |n| params.probability(n))
}

pub fn generate_exp_tail(params: &ExpTailParams) -> Result<Graph> {
    if params.half_width < 2 {
        return Err(Error::invalid("window half-width must be at least 2"));
    }
    if !(params.rate > 0.0 && params.rate.is_finite()) {
        return Err(Error::invalid("decay rate must be positive"));
    }
    sample_line_model(params.half_width, params.seed, |n| params.probability(n))
}

fn sample_line_model(half_width: u32, seed: u64, p: impl Fn(u64) -> f64) -> Result<Graph> {
    let l = half_width as i64;
    let mut rng = rng_from_seed(seed);
    let mut bonds: Vec<Bond> = (-l..l).map(|x| Bond::unit(x, x + 1)).collect();
    for n in 2..=(2 * l) {
        let prob = p(n as u64);
        if prob <= 0.0 {
            continue;
        }
        let last_start = l - n;
        // Failures before the next success, by inversion; exact for tiny `prob`.
        let log_q = (-prob).ln_1p();
        let mut x = -l;
        while x <= last_start {
            let u: f64 = 1.0 - rng.gen::<f64>();
            let skip = (u.ln() / log_q).floor();
            if skip > (last_start - x) as f64 {
                break;
            }
            x += skip as i64;
            bonds.push(Bond::unit(x, x + n));
            x += 1;
        }
    }
    Graph::new(bonds, VertexId(0), Some(Window { lo: -l, hi: l }))
}

/// Deterministic fixture graphs.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum Fixture {
    /// Vertices `0..=n`, marked `0`.
    Path(u32),
    /// Nearest-neighbour line on `-L..=L`, marked `0`.
    Line(u32),
    /// Vertices `0..n` joined in a ring.
    Cycle(u32),
    /// Two vertices joined by two unit bonds.
    ParallelPair,
    /// Complete binary tree of the given depth, heap-labelled from the root `0`.
    BinaryTree(u32),
    /// Two rails `0..n` and `n..2n` joined by rungs `i ~ i+n`.
    Ladder(u32),
}

impl FromStr for Fixture {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        let (name, arg) = match s.split_once(':') {
            Some((a, b)) => (a, Some(b)),
            None => (s, None),
        };
        let size = || -> Result<u32> {
            arg.ok_or_else(|| Error::invalid(format!("fixture `{name}` needs a size")))?
                .parse()
                .map_err(|_| Error::invalid(format!("bad fixture size in `{s}`")))
        };
        Ok(match name {
            "path" => Fixture::Path(size()?),
            "line" => Fixture::Line(size()?),
            "cycle" => Fixture::Cycle(size()?),
            "parallel-pair" => Fixture::ParallelPair,
            "binary-tree" => Fixture::BinaryTree(size()?),
            "ladder" => Fixture::Ladder(size()?),
            other => return Err(Error::invalid(format!("unknown fixture `{other}`"))),
        })
    }
}

impl fmt::Display for Fixture {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Fixture::Path(n) => write!(f, "path:{n}"),
            Fixture::Line(n) => write!(f, "line:{n}"),
            Fixture::Cycle(n) => write!(f, "cycle:{n}"),
            Fixture::ParallelPair => write!(f, "parallel-pair"),
            Fixture::BinaryTree(n) => write!(f, "binary-tree:{n}"),
            Fixture::Ladder(n) => write!(f, "ladder:{n}"),
        }
    }
}

pub fn fixture(which: Fixture) -> Result<Graph> {
    match which {
        Fixture::Path(n) => {
            let n = i64::from(n.max(1));
            let bonds = (0..n).map(|x| Bond::unit(x, x + 1)).collect();
            Graph::new(bonds, VertexId(0), Some(Window { lo: 0, hi: n }))
        }
        Fixture::Line(l) => {
            let l = i64::from(l.max(1));
            let bonds = (-l..l).map(|x| Bond::unit(x, x + 1)).collect();
            Graph::new(bonds, VertexId(0), Some(Window { lo: -l, hi: l }))
        }
        Fixture::Cycle(n) => {
            if n < 3 {
                return Err(Error::invalid("a cycle needs at least 3 vertices"));
            }
            let n = i64::from(n);
            let bonds = (0..n).map(|x| Bond::unit(x, (x + 1) % n)).collect();
            Graph::new(bonds, VertexId(0), None)
        }
        Fixture::ParallelPair => {
            Graph::new(vec![Bond::unit(0, 1), Bond::unit(0, 1)], VertexId(0), None)
        }
        Fixture::BinaryTree(depth) => {
            let depth = depth.clamp(1, 24);
            let count: i64 = (1 << (depth + 1)) - 1;
            let bonds = (1..count).map(|c| Bond::unit((c - 1) / 2, c)).collect();
            Graph::new(bonds, VertexId(0), None)
        }
        Fixture::Ladder(n) => {
            let n = i64::from(n.max(1));
            let mut bonds: Vec<Bond> = (0..n).map(|i| Bond::unit(i, i + n)).collect();
            for i in 0..n - 1 {
                bonds.push(Bond::unit(i, i + 1));
                bonds.push(Bond::unit(i + n, i + n + 1));
            }
            Graph::new(bonds, VertexId(0), None)
        }
    }
}

/// A random connected weighted graph on labels `0..n`: a random spanning
/// tree plus `extra` random bonds (parallel bonds allowed), conductances
/// uniform in `[0.5, 2)`. Used as a test substrate.
pub fn random_connected(n: usize, extra: usize, seed: u64) -> Result<Graph> {
    use rand::Rng as _;
    if n < 2 {
        return Err(Error::invalid("need at least two vertices"));
    }
    let mut rng = rng_from_seed(seed);
    let mut bonds = Vec::with_capacity(n - 1 + extra);
    let weight = |rng: &mut Rng| rng.gen_range(0.5..2.0);
    for v in 1..n {
        let u = rng.gen_range(0..v);
        let c = weight(&mut rng);
        bonds.push(Bond {
            u: VertexId(u as i64),
            v: VertexId(v as i64),
            conductance: c,
        });
    }
    let mut added = 0;
    while added < extra {
        let u = rng.gen_range(0..n);
        let v = rng.gen_range(0..n);
        if u == v {
            continue;
        }
        let c = weight(&mut rng);
        bonds.push(Bond {
            u: VertexId(u as i64),
            v: VertexId(v as i64),
            conductance: c,
        });
        added += 1;
    }
    Graph::new(bonds, VertexId(0), None)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn lrp(l: u32, beta: f64, s: f64, seed: u64) -> Graph {
        generate_long_range(&LongRangeParams {
            half_width: l,
            beta,
            s,
            seed,
        })
        .unwrap()
    }

    #[test]
    fn zero_beta_is_the_line() {
        let g = lrp(50, 0.0, 3.0, 1);
        assert_eq!(g.bonds().len(), 100);
        assert!(g.bonds().iter().all(|b| b.length() == 1));
    }

    #[test]
    fn nearest_bonds_always_present() {
        for seed in 0..20 {
            let g = lrp(100, 5.0, 2.5, seed);
            let mut seen = vec![false; 200];
            for b in g.bonds().iter().filter(|b| b.length() == 1) {
                seen[(b.u.0.min(b.v.0) + 100) as usize] = true;
            }
            assert!(seen.iter().all(|&s| s));
            let w = g.window().unwrap();
            assert!(g.bonds().iter().all(|b| w.contains(b.u.0) && w.contains(b.v.0)));
        }
    }

    #[test]
    fn rejects_small_exponent() {
        let p = LongRangeParams {
            half_width: 10,
            beta: 1.0,
            s: 2.0,
            seed: 0,
        };
        assert!(generate_long_range(&p).is_err());
    }

    #[test]
    fn same_seed_same_graph() {
        let a = lrp(300, 1.0, 2.5, 42);
        let b = lrp(300, 1.0, 2.5, 42);
        assert_eq!(a.bonds(), b.bonds());
        let c = lrp(300, 1.0, 2.5, 43);
        assert_ne!(a.bonds(), c.bonds());
    }

    #[test]
    fn probability_is_capped() {
        let p = LongRangeParams {
            half_width: 10,
            beta: 1e9,
            s: 3.0,
            seed: 0,
        };
        assert_eq!(p.probability(1), 1.0);
        assert_eq!(p.probability(2), PROBABILITY_CAP);
        assert!(p.probability(2) < 1.0);
    }

    #[test]
    fn fixtures_have_expected_shape() {
        let p = fixture(Fixture::Path(3)).unwrap();
        assert_eq!((p.len(), p.bonds().len()), (4, 3));
        let pp = fixture(Fixture::ParallelPair).unwrap();
        assert_eq!(pp.len(), 2);
        assert_eq!(pp.measure(VertexId(0)), Some(2.0));
        let c = fixture(Fixture::Cycle(4)).unwrap();
        assert!(c.measures().iter().all(|&m| m == 2.0));
        let t = fixture(Fixture::BinaryTree(3)).unwrap();
        assert_eq!(t.len(), 15);
        assert_eq!(t.measure(VertexId(0)), Some(2.0));
        let l = fixture(Fixture::Ladder(4)).unwrap();
        assert_eq!((l.len(), l.bonds().len()), (8, 10));
        assert!(fixture(Fixture::Cycle(2)).is_err());
    }

    #[test]
    fn fixture_names_parse() {
        for f in [
            Fixture::Path(3),
            Fixture::Line(10),
            Fixture::Cycle(5),
            Fixture::ParallelPair,
            Fixture::BinaryTree(2),
            Fixture::Ladder(3),
        ] {
            assert_eq!(f.to_string().parse::<Fixture>().unwrap(), f);
        }
        assert!("triangle".parse::<Fixture>().is_err());
    }

    #[test]
    fn stream_seeds_differ() {
        let seeds: std::collections::HashSet<u64> = (0..1000).map(|i| stream_seed(7, i)).collect();
        assert_eq!(seeds.len(), 1000);
    }
}
