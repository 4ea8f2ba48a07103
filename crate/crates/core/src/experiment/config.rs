//! Flat `key = value` experiment configuration.
//!
//! Every key is required unless it only applies to another model; unknown
//! or repeated keys are rejected. Lists are comma-separated. Serialization
//! writes every field, so a persisted config has no hidden defaults.

use std::collections::BTreeMap;
use std::fmt::Write as _;
use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::generators::Fixture;
use crate::graph::Metric;
use crate::scaling::GrowthFunction;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub enum ModelSpec {
    LongRange { half_width: u32, beta: f64, s: f64 },
    ExpTail { half_width: u32, rate: f64 },
    Fixture(Fixture),
}

impl ModelSpec {
    pub fn name(&self) -> &'static str {
        match self {
            ModelSpec::LongRange { .. } => "lrp",
            ModelSpec::ExpTail { .. } => "exp",
            ModelSpec::Fixture(_) => "fixture",
        }
    }

    /// Distance from the origin to the window edge, if windowed.
    pub fn margin(&self) -> Option<u32> {
        match self {
            ModelSpec::LongRange { half_width, .. } | ModelSpec::ExpTail { half_width, .. } => {
                Some(*half_width)
            }
            ModelSpec::Fixture(Fixture::Line(l)) => Some(*l),
            ModelSpec::Fixture(Fixture::Path(_)) => Some(0),
            ModelSpec::Fixture(_) => None,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ExperimentConfig {
    pub model: ModelSpec,
    pub ensemble: usize,
    pub seed: u64,
    /// Radius grid for volumes, complement resistances and exit times.
    pub radii: Vec<f64>,
    /// Radii at which `J(λ)` membership is evaluated.
    pub j_radii: Vec<f64>,
    /// Time grid `n`: kernels are read at `2n` (and `n`, `n+1`), walks at `n`.
    pub times: Vec<usize>,
    pub walk_steps: usize,
    pub walk_radii: Vec<f64>,
    pub trajectories: usize,
    pub metric: Metric,
    pub v_exponent: f64,
    pub v_log_power: f64,
    pub r_exponent: f64,
    pub r_log_power: f64,
    pub lambdas: Vec<f64>,
    pub thetas: Vec<f64>,
    pub theta_star: f64,
    pub output: PathBuf,
}

const COMMON_KEYS: &[&str] = &[
    "model",
    "ensemble",
    "seed",
    "radii",
    "j_radii",
    "times",
    "walk_steps",
    "walk_radii",
    "trajectories",
    "metric",
    "v_exponent",
    "v_log_power",
    "r_exponent",
    "r_log_power",
    "lambdas",
    "thetas",
    "theta_star",
    "output",
];

fn model_keys(model: &str) -> Result<&'static [&'static str]> {
    match model {
        "lrp" => Ok(&["half_width", "beta", "s"]),
        "exp" => Ok(&["half_width", "rate"]),
        "fixture" => Ok(&["fixture"]),
        other => Err(Error::Config(format!("unknown model `{other}`"))),
    }
}

fn join<T: std::fmt::Display>(xs: &[T]) -> String {
    xs.iter().map(|x| x.to_string()).collect::<Vec<_>>().join(",")
}

struct Fields<'a> {
    map: BTreeMap<&'a str, &'a str>,
}

impl Fields<'_> {
    fn raw(&self, key: &str) -> Result<&str> {
        self.map
            .get(key)
            .copied()
            .ok_or_else(|| Error::Config(format!("missing key `{key}`")))
    }

    fn parse<T: std::str::FromStr>(&self, key: &str) -> Result<T> {
        let raw = self.raw(key)?;
        raw.parse()
            .map_err(|_| Error::Config(format!("bad value `{raw}` for `{key}`")))
    }

    fn list<T: std::str::FromStr>(&self, key: &str) -> Result<Vec<T>> {
        let raw = self.raw(key)?;
        if raw.trim().is_empty() {
            return Ok(Vec::new());
        }
        raw.split(',')
            .map(|t| {
                t.trim()
                    .parse()
                    .map_err(|_| Error::Config(format!("bad list entry `{t}` for `{key}`")))
            })
            .collect()
    }
}

impl ExperimentConfig {
    pub fn parse(text: &str) -> Result<Self> {
        let mut map = BTreeMap::new();
        for (lineno, line) in text.lines().enumerate() {
            let line = line.split('#').next().unwrap().trim();
            if line.is_empty() {
                continue;
            }
            let (k, v) = line
                .split_once('=')
                .ok_or_else(|| Error::Config(format!("line {}: expected `key = value`", lineno + 1)))?;
            let k = k.trim();
            if map.insert(k, v.trim()).is_some() {
                return Err(Error::Config(format!("duplicate key `{k}`")));
            }
        }
        let fields = Fields { map };
        let model_name = fields.raw("model")?;
        let extra = model_keys(model_name)?;
        for k in fields.map.keys() {
            if !COMMON_KEYS.contains(k) && !extra.contains(k) {
                return Err(Error::Config(format!(
                    "unknown key `{k}` for model `{model_name}`"
                )));
            }
        }
        let model = match model_name {
            "lrp" => ModelSpec::LongRange {
                half_width: fields.parse("half_width")?,
                beta: fields.parse("beta")?,
                s: fields.parse("s")?,
            },
            "exp" => ModelSpec::ExpTail {
                half_width: fields.parse("half_width")?,
                rate: fields.parse("rate")?,
            },
            _ => ModelSpec::Fixture(
                fields
                    .raw("fixture")?
                    .parse()
                    .map_err(|e: Error| Error::Config(e.to_string()))?,
            ),
        };
        let cfg = ExperimentConfig {
            model,
            ensemble: fields.parse("ensemble")?,
            seed: fields.parse("seed")?,
            radii: fields.list("radii")?,
            j_radii: fields.list("j_radii")?,
            times: fields.list("times")?,
            walk_steps: fields.parse("walk_steps")?,
            walk_radii: fields.list("walk_radii")?,
            trajectories: fields.parse("trajectories")?,
            metric: fields
                .raw("metric")?
                .parse()
                .map_err(|e: Error| Error::Config(e.to_string()))?,
            v_exponent: fields.parse("v_exponent")?,
            v_log_power: fields.parse("v_log_power")?,
            r_exponent: fields.parse("r_exponent")?,
            r_log_power: fields.parse("r_log_power")?,
            lambdas: fields.list("lambdas")?,
            thetas: fields.list("thetas")?,
            theta_star: fields.parse("theta_star")?,
            output: PathBuf::from(fields.raw("output")?),
        };
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn load(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path)
            .map_err(|e| Error::Config(format!("cannot read {}: {e}", path.display())))?;
        Self::parse(&text)
    }

    pub fn serialize(&self) -> String {
        let mut s = String::new();
        let mut put = |k: &str, v: String| {
            let _ = writeln!(s, "{k} = {v}");
        };
        put("model", self.model.name().to_string());
        match &self.model {
            ModelSpec::LongRange { half_width, beta, s } => {
                put("half_width", half_width.to_string());
                put("beta", beta.to_string());
                put("s", s.to_string());
            }
            ModelSpec::ExpTail { half_width, rate } => {
                put("half_width", half_width.to_string());
                put("rate", rate.to_string());
            }
            ModelSpec::Fixture(f) => put("fixture", f.to_string()),
        }
        put("ensemble", self.ensemble.to_string());
        put("seed", self.seed.to_string());
        put("radii", join(&self.radii));
        put("j_radii", join(&self.j_radii));
        put("times", join(&self.times));
        put("walk_steps", self.walk_steps.to_string());
        put("walk_radii", join(&self.walk_radii));
        put("trajectories", self.trajectories.to_string());
        put("metric", self.metric.to_string());
        put("v_exponent", self.v_exponent.to_string());
        put("v_log_power", self.v_log_power.to_string());
        put("r_exponent", self.r_exponent.to_string());
        put("r_log_power", self.r_log_power.to_string());
        put("lambdas", join(&self.lambdas));
        put("thetas", join(&self.thetas));
        put("theta_star", self.theta_star.to_string());
        put("output", self.output.display().to_string());
        s
    }

    pub fn volume_growth(&self) -> Result<GrowthFunction> {
        GrowthFunction::volume(self.v_exponent, self.v_log_power)
            .map_err(|e| Error::Config(e.to_string()))
    }

    pub fn resistance_growth(&self) -> Result<GrowthFunction> {
        GrowthFunction::resistance(self.r_exponent, self.r_log_power)
            .map_err(|e| Error::Config(e.to_string()))
    }

    /// Kernel steps needed to read `p_{2n}` and `p_n + p_{n+1}` on the time grid.
    pub fn kernel_horizon(&self) -> usize {
        let max = self.times.iter().copied().max().unwrap_or(0);
        (2 * max).max(max + 1)
    }

    pub fn validate(&self) -> Result<()> {
        let bad = |m: String| Err(Error::Config(m));
        if self.ensemble == 0 {
            return bad("ensemble must be at least 1".into());
        }
        if self.trajectories == 0 || self.walk_steps == 0 {
            return bad("trajectories and walk_steps must be positive".into());
        }
        if self.radii.len() < 3 {
            return bad("radii needs at least 3 values for the exit-time fit".into());
        }
        if self.times.len() < 8 {
            return bad("times needs at least 8 values for the spectral-dimension fit".into());
        }
        if self.times.iter().any(|&n| n == 0 || n > self.walk_steps) {
            return bad("times must lie in 1..=walk_steps".into());
        }
        if self.times.windows(2).any(|w| w[0] >= w[1]) || self.radii.windows(2).any(|w| w[0] >= w[1])
        {
            return bad("radii and times must be strictly increasing".into());
        }
        if self
            .radii
            .iter()
            .chain(&self.j_radii)
            .chain(&self.walk_radii)
            .any(|&r| !(r >= 1.0))
        {
            return bad("radii must be at least 1".into());
        }
        if let Some(margin) = self.model.margin() {
            let limit = margin as f64 / 4.0;
            if let Some(r) = self.radii.iter().chain(&self.j_radii).find(|&&r| r > limit) {
                return bad(format!("radius {r} exceeds window/4 = {limit}"));
            }
        }
        if self.lambdas.iter().any(|&l| !(l > 1.0)) {
            return bad("lambdas must exceed 1".into());
        }
        if self.thetas.iter().any(|&t| !(t >= 1.0)) || !(self.theta_star >= 1.0) {
            return bad("thetas must be at least 1".into());
        }
        if self.metric == Metric::LineDistance
            && matches!(
                self.model,
                ModelSpec::Fixture(
                    Fixture::Cycle(_) | Fixture::ParallelPair | Fixture::BinaryTree(_) | Fixture::Ladder(_)
                )
            )
        {
            return bad("line metric needs a line-labelled model".into());
        }
        match self.model {
            ModelSpec::LongRange { half_width, beta, s } => {
                if half_width < 2 || !(s > 2.0) || !(beta >= 0.0) {
                    return bad("lrp needs half_width >= 2, beta >= 0, s > 2".into());
                }
            }
            ModelSpec::ExpTail { half_width, rate } => {
                if half_width < 2 || !(rate > 0.0) {
                    return bad("exp needs half_width >= 2 and rate > 0".into());
                }
            }
            ModelSpec::Fixture(_) => {}
        }
        self.volume_growth()?;
        self.resistance_growth()?;
        Ok(())
    }
}
