//! Growth functions, the `J(λ)` good-scale test, log-log exponent fits and
//! the ensemble (annealed) estimators built on per-graph observables.

use rand::Rng as _;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::generators::rng_from_seed;
use crate::graph::{Graph, Metric, VertexId};
use crate::resistance::resistance_profile;

/// `R ↦ R^exponent · (ln(e + R) / ln(e + 1))^log_power`, so `f(1) = 1`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct GrowthFunction {
    pub exponent: f64,
    pub log_power: f64,
    /// Lower and upper doubling exponents: `(R/R')^lower <= f(R)/f(R') <= (R/R')^upper`.
    pub lower_exponent: f64,
    pub upper_exponent: f64,
}

impl GrowthFunction {
    pub fn new(exponent: f64, log_power: f64) -> Result<Self> {
        if !(exponent > 0.0 && exponent.is_finite() && log_power.is_finite()) {
            return Err(Error::invalid("growth exponent must be positive and finite"));
        }
        // local exponent is exponent + log_power * h(R), h(R) = R / ((e+R) ln(e+R))
        let e = std::f64::consts::E;
        let h_max = (0..=4000)
            .map(|k| {
                let r = (-5.0 + 45.0 * k as f64 / 4000.0).exp();
                r / ((e + r) * (e + r).ln())
            })
            .fold(0.0, f64::max);
        let lower = exponent + (log_power * h_max).min(0.0);
        let upper = exponent + (log_power * h_max).max(0.0);
        if !(lower > 0.0) {
            return Err(Error::invalid("growth function is not strictly increasing"));
        }
        Ok(GrowthFunction {
            exponent,
            log_power,
            lower_exponent: lower,
            upper_exponent: upper,
        })
    }

    /// A volume profile `v`: exponent at least 1.
    pub fn volume(exponent: f64, log_power: f64) -> Result<Self> {
        if exponent < 1.0 {
            return Err(Error::invalid("volume growth exponent must be at least 1"));
        }
        Self::new(exponent, log_power)
    }

    /// A resistance profile `r`: exponent in `(0, 1]`.
    pub fn resistance(exponent: f64, log_power: f64) -> Result<Self> {
        if !(exponent > 0.0 && exponent <= 1.0) {
            return Err(Error::invalid("resistance growth exponent must lie in (0, 1]"));
        }
        Self::new(exponent, log_power)
    }

    pub fn identity() -> Self {
        Self::new(1.0, 0.0).unwrap()
    }

    pub fn eval(&self, r: f64) -> f64 {
        let base = r.powf(self.exponent);
        if self.log_power == 0.0 {
            return base;
        }
        let e = std::f64::consts::E;
        base * ((e + r).ln() / (e + 1.0).ln()).powf(self.log_power)
    }
}

/// `I(n)`: the inverse of `R ↦ v(R) r(R)`, by bisection to `1e-12` relative.
pub fn inverse_scale(v: &GrowthFunction, r: &GrowthFunction, n: f64) -> Result<f64> {
    if !(n >= 1.0) || !n.is_finite() {
        return Err(Error::invalid(format!("I(n) needs n >= 1, got {n}")));
    }
    let vr = |x: f64| v.eval(x) * r.eval(x);
    if vr(1.0) >= n {
        return Ok(1.0);
    }
    let mut lo = 1.0;
    let mut hi = 2.0;
    while vr(hi) < n {
        lo = hi;
        hi *= 2.0;
    }
    while (hi - lo) > 1e-12 * hi {
        let mid = 0.5 * (lo + hi);
        if vr(mid) < n {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    Ok(0.5 * (lo + hi))
}

/// The composite `v·r` with its inverse.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ScaleInverse {
    pub v: GrowthFunction,
    pub r: GrowthFunction,
}

impl ScaleInverse {
    pub fn forward(&self, radius: f64) -> f64 {
        self.v.eval(radius) * self.r.eval(radius)
    }

    pub fn inverse(&self, n: f64) -> Result<f64> {
        inverse_scale(&self.v, &self.r, n)
    }
}

/// Graph quantities entering the three `J(λ)` clauses at one radius.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct JObservables {
    pub radius: f64,
    pub volume: f64,
    pub reff_complement: f64,
    /// `max_{y ∈ B(R)} R_eff(0, y) / r(d(0, y))`.
    pub max_ratio: f64,
    pub witness: Option<VertexId>,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct JMembershipReport {
    pub radius: f64,
    pub lambda: f64,
    /// `λ⁻¹ v(R) <= V(R) <= λ v(R)`.
    pub volume_ok: bool,
    /// `R_eff(0, B(R)^c) >= λ⁻¹ r(R)`.
    pub complement_ok: bool,
    /// `R_eff(0, y) <= λ r(d(0, y))` for all `y ∈ B(R)`.
    pub pointwise_ok: bool,
    pub member: bool,
    pub witness: Option<VertexId>,
    pub observables: JObservables,
}

impl JObservables {
    pub fn verdict(&self, lambda: f64, v: &GrowthFunction, r: &GrowthFunction) -> JMembershipReport {
        let vr = v.eval(self.radius);
        let volume_ok = self.volume >= vr / lambda && self.volume <= lambda * vr;
        let complement_ok = self.reff_complement >= r.eval(self.radius) / lambda;
        let pointwise_ok = self.max_ratio <= lambda;
        JMembershipReport {
            radius: self.radius,
            lambda,
            volume_ok,
            complement_ok,
            pointwise_ok,
            member: volume_ok && complement_ok && pointwise_ok,
            witness: self.witness,
            observables: *self,
        }
    }
}

/// Computes the `J(λ)` observables at each radius, sharing one
/// factorization for every pointwise resistance.
pub fn j_observables(
    g: &Graph,
    radii: &[f64],
    metric: Metric,
    r: &GrowthFunction,
) -> Result<Vec<JObservables>> {
    let profile = resistance_profile(g, radii, metric, r)?;
    profile
        .into_iter()
        .map(|row| {
            Ok(JObservables {
                radius: row.radius,
                volume: g.volume(g.marked(), row.radius, metric)?,
                reff_complement: row.reff_complement,
                max_ratio: row.max_ratio,
                witness: row.witness,
            })
        })
        .collect()
}

pub fn check_j(
    g: &Graph,
    radius: f64,
    lambda: f64,
    v: &GrowthFunction,
    r: &GrowthFunction,
    metric: Metric,
) -> Result<JMembershipReport> {
    if !(lambda > 1.0) {
        return Err(Error::invalid(format!("lambda must exceed 1, got {lambda}")));
    }
    let obs = j_observables(g, &[radius], metric, r)?;
    Ok(obs[0].verdict(lambda, v, r))
}

/// Least-squares slope of `ln y` against `ln x`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct PowerFit {
    /// The reported exponent (the slope, possibly rescaled).
    pub exponent: f64,
    pub std_error: f64,
    /// Fitted range of `x` after dropping the smallest decade.
    pub window: (f64, f64),
    pub points: usize,
    /// Exponent fitted over all points.
    pub full_range_exponent: f64,
    /// Unscaled fitted line over the window: `ln y = intercept + slope · ln x`.
    pub slope: f64,
    pub intercept: f64,
}

fn ols(points: &[(f64, f64)]) -> (f64, f64, f64) {
    let m = points.len() as f64;
    let mx = points.iter().map(|p| p.0).sum::<f64>() / m;
    let my = points.iter().map(|p| p.1).sum::<f64>() / m;
    let sxx: f64 = points.iter().map(|p| (p.0 - mx).powi(2)).sum();
    let sxy: f64 = points.iter().map(|p| (p.0 - mx) * (p.1 - my)).sum();
    let slope = sxy / sxx;
    let se = if points.len() > 2 {
        let sse: f64 = points
            .iter()
            .map(|p| (p.1 - my - slope * (p.0 - mx)).powi(2))
            .sum();
        (sse / (m - 2.0) / sxx).sqrt()
    } else {
        f64::NAN
    };
    (slope, se, my - slope * mx)
}

/// Fits `y ~ x^slope` and returns `scale · slope`. Points with
/// `x < 10 · min x` are dropped from the windowed fit (keeping at least
/// three points).
pub fn fit_power_law(series: &[(f64, f64)], min_points: usize, scale: f64) -> Result<PowerFit> {
    if series.len() < min_points.max(3) {
        return Err(Error::invalid(format!(
            "need at least {} points, got {}",
            min_points.max(3),
            series.len()
        )));
    }
    if series.iter().any(|&(x, y)| !(x > 0.0 && y > 0.0)) {
        return Err(Error::invalid("power-law fit needs positive values"));
    }
    let mut sorted = series.to_vec();
    sorted.sort_by(|a, b| a.0.partial_cmp(&b.0).unwrap());
    let logs: Vec<(f64, f64)> = sorted.iter().map(|&(x, y)| (x.ln(), y.ln())).collect();
    let (full, _, _) = ols(&logs);
    let cut = logs[0].0 + 10f64.ln();
    let mut start = logs.iter().position(|p| p.0 >= cut - 1e-12).unwrap_or(logs.len());
    start = start.min(logs.len() - 3);
    let window = &logs[start..];
    let (slope, se, intercept) = ols(window);
    Ok(PowerFit {
        exponent: scale * slope,
        std_error: scale.abs() * se,
        window: (sorted[start].0, sorted[sorted.len() - 1].0),
        points: window.len(),
        full_range_exponent: scale * full,
        slope,
        intercept,
    })
}

/// `d_s = -2 · slope(ln p_{2n}, ln n)`.
pub fn fit_spectral_dimension(series: &[(f64, f64)]) -> Result<PowerFit> {
    fit_power_law(series, 8, -2.0)
}

/// Slope of `ln E τ_R` against `ln R`.
pub fn fit_exit_exponent(series: &[(f64, f64)]) -> Result<PowerFit> {
    fit_power_law(series, 3, 1.0)
}

/// Slope of `ln S_n` against `ln n`.
pub fn fit_range_exponent(series: &[(f64, f64)]) -> Result<PowerFit> {
    fit_power_law(series, 3, 1.0)
}

/// Slope of `ln E d(0, X_n)` against `ln n`.
pub fn fit_displacement_exponent(series: &[(f64, f64)]) -> Result<PowerFit> {
    fit_power_law(series, 3, 1.0)
}

/// Quenched observables of one ensemble member.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GraphObservables {
    pub index: usize,
    pub seed: u64,
    pub radii: Vec<f64>,
    /// `V(R)` per radius.
    pub volume: Vec<f64>,
    /// `R_eff(0, B(R)^c)` per radius.
    pub reff_complement: Vec<f64>,
    /// Exact `E^0 τ_R` per radius.
    pub exit_time: Vec<f64>,
    pub times: Vec<usize>,
    /// `p_{2n}(0, 0)` per time.
    pub p2n: Vec<f64>,
    /// `p_n(0, 0) + p_{n+1}(0, 0)` per time.
    pub f_n: Vec<f64>,
    /// Exact `E^0 d(0, X_n)` per time.
    pub mean_distance: Vec<f64>,
    /// Monte Carlo mean of `S_n` per time.
    pub mean_range: Vec<f64>,
    /// Monte Carlo samples of `d(0, X_n)`, one vector per time.
    pub distance_samples: Vec<Vec<f64>>,
    pub j: Vec<JObservables>,
    pub truncation_contaminated: bool,
}

/// `p̂(λ)` at one radius: the fraction of graphs with `R ∉ J(λ)`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct PHatRow {
    pub lambda: f64,
    pub radius: f64,
    pub p_hat: f64,
}

pub fn p_hat_table(
    ensemble: &[GraphObservables],
    lambdas: &[f64],
    v: &GrowthFunction,
    r: &GrowthFunction,
) -> Vec<PHatRow> {
    let Some(first) = ensemble.first() else {
        return Vec::new();
    };
    let m = ensemble.len() as f64;
    let mut rows = Vec::new();
    for k in 0..first.j.len() {
        let radius = first.j[k].radius;
        for &lambda in lambdas {
            let fails = ensemble
                .iter()
                .filter(|g| !g.j[k].verdict(lambda, v, r).member)
                .count();
            rows.push(PHatRow {
                lambda,
                radius,
                p_hat: fails as f64 / m,
            });
        }
    }
    rows
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct TightnessRow {
    pub theta: f64,
    /// `min_R 𝕡(θ⁻¹ <= E⁰τ_R / (v(R) r(R)) <= θ)`.
    pub exit_time: f64,
    /// `min_n 𝕡(θ⁻¹ <= v(I(n)) p_{2n}(0, 0) <= θ)`.
    pub heat_kernel: f64,
    /// `min_n P*(d(0, X_n) / I(n) < θ)`.
    pub displacement_upper: f64,
    /// `min_n P*(θ⁻¹ < (1 + d(0, X_n)) / I(n))`.
    pub displacement_lower: f64,
}

impl TightnessRow {
    pub fn min(&self) -> f64 {
        self.exit_time
            .min(self.heat_kernel)
            .min(self.displacement_upper)
            .min(self.displacement_lower)
    }
}

fn fraction<I: Iterator<Item = bool>>(it: I) -> f64 {
    let (hit, total) = it.fold((0usize, 0usize), |(h, t), b| (h + b as usize, t + 1));
    if total == 0 {
        1.0
    } else {
        hit as f64 / total as f64
    }
}

pub fn tightness_tables(
    ensemble: &[GraphObservables],
    thetas: &[f64],
    v: &GrowthFunction,
    r: &GrowthFunction,
) -> Result<Vec<TightnessRow>> {
    let Some(first) = ensemble.first() else {
        return Ok(Vec::new());
    };
    let scale = ScaleInverse { v: *v, r: *r };
    let inv: Vec<f64> = first
        .times
        .iter()
        .map(|&n| scale.inverse(n as f64))
        .collect::<Result<_>>()?;
    let within = |x: f64, theta: f64| x >= 1.0 / theta && x <= theta;
    Ok(thetas
        .iter()
        .map(|&theta| {
            let exit_time = (0..first.radii.len())
                .map(|k| {
                    let vr = scale.forward(first.radii[k]);
                    fraction(ensemble.iter().map(|g| within(g.exit_time[k] / vr, theta)))
                })
                .fold(1.0, f64::min);
            let heat_kernel = (0..first.times.len())
                .map(|k| {
                    let vi = v.eval(inv[k]);
                    fraction(ensemble.iter().map(|g| within(vi * g.p2n[k], theta)))
                })
                .fold(1.0, f64::min);
            let displacement_upper = (0..first.times.len())
                .map(|k| {
                    fraction(
                        ensemble
                            .iter()
                            .flat_map(|g| g.distance_samples[k].iter())
                            .map(|&d| d / inv[k] < theta),
                    )
                })
                .fold(1.0, f64::min);
            let displacement_lower = (0..first.times.len())
                .map(|k| {
                    fraction(
                        ensemble
                            .iter()
                            .flat_map(|g| g.distance_samples[k].iter())
                            .map(|&d| 1.0 / theta < (1.0 + d) / inv[k]),
                    )
                })
                .fold(1.0, f64::min);
            TightnessRow {
                theta,
                exit_time,
                heat_kernel,
                displacement_upper,
                displacement_lower,
            }
        })
        .collect())
}

/// Ensemble mean with a percentile bootstrap interval.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct MeanCi {
    pub mean: f64,
    pub ci_lo: f64,
    pub ci_hi: f64,
}

pub const BOOTSTRAP_RESAMPLES: usize = 1000;

/// Mean of `values` with a 95% percentile bootstrap interval.
pub fn bootstrap_mean(values: &[f64], seed: u64) -> MeanCi {
    let n = values.len();
    let mean = values.iter().sum::<f64>() / n as f64;
    if n < 2 {
        return MeanCi {
            mean,
            ci_lo: mean,
            ci_hi: mean,
        };
    }
    let mut rng = rng_from_seed(seed);
    let mut means: Vec<f64> = (0..BOOTSTRAP_RESAMPLES)
        .map(|_| (0..n).map(|_| values[rng.gen_range(0..n)]).sum::<f64>() / n as f64)
        .collect();
    means.sort_by(|a, b| a.partial_cmp(b).unwrap());
    let at = |q: f64| means[((q * (BOOTSTRAP_RESAMPLES - 1) as f64).round()) as usize];
    MeanCi {
        mean,
        ci_lo: at(0.025),
        ci_hi: at(0.975),
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct RadiusMeans {
    pub radius: f64,
    pub exit_time: MeanCi,
    /// `mean(E⁰τ_R) / (v(R) r(R))`.
    pub exit_ratio: f64,
    pub reff_volume: MeanCi,
    /// `mean(R_eff(0, B(R)^c) V(R)) / (v(R) r(R))`.
    pub reff_volume_ratio: f64,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct TimeMeans {
    pub n: usize,
    pub p2n: MeanCi,
    pub f_n: f64,
    /// `mean(p_{2n}) · v(I(n))`.
    pub p2n_ratio: f64,
    pub distance: MeanCi,
    /// `mean(E⁰ d(0, X_n)) / I(n)`.
    pub distance_ratio: f64,
    pub range: f64,
    pub scale: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AnnealedMeans {
    pub radii: Vec<RadiusMeans>,
    pub times: Vec<TimeMeans>,
}

pub fn annealed_means(
    ensemble: &[GraphObservables],
    v: &GrowthFunction,
    r: &GrowthFunction,
    seed: u64,
) -> Result<AnnealedMeans> {
    let Some(first) = ensemble.first() else {
        return Err(Error::invalid("empty ensemble"));
    };
    let scale = ScaleInverse { v: *v, r: *r };
    let column = |f: &dyn Fn(&GraphObservables) -> f64| -> Vec<f64> { ensemble.iter().map(f).collect() };
    let mut stream = 0u64;
    let mut next_seed = || {
        stream += 1;
        crate::generators::stream_seed(seed, stream)
    };
    let radii = (0..first.radii.len())
        .map(|k| {
            let radius = first.radii[k];
            let vr = scale.forward(radius);
            let exit_time = bootstrap_mean(&column(&|g| g.exit_time[k]), next_seed());
            let reff_volume =
                bootstrap_mean(&column(&|g| g.reff_complement[k] * g.volume[k]), next_seed());
            RadiusMeans {
                radius,
                exit_time,
                exit_ratio: exit_time.mean / vr,
                reff_volume,
                reff_volume_ratio: reff_volume.mean / vr,
            }
        })
        .collect();
    let times = (0..first.times.len())
        .map(|k| {
            let n = first.times[k];
            let inv = scale.inverse(n as f64)?;
            let p2n = bootstrap_mean(&column(&|g| g.p2n[k]), next_seed());
            let distance = bootstrap_mean(&column(&|g| g.mean_distance[k]), next_seed());
            let f_n = column(&|g| g.f_n[k]).iter().sum::<f64>() / ensemble.len() as f64;
            let range = column(&|g| g.mean_range[k]).iter().sum::<f64>() / ensemble.len() as f64;
            Ok(TimeMeans {
                n,
                p2n,
                f_n,
                p2n_ratio: p2n.mean * v.eval(inv),
                distance,
                distance_ratio: distance.mean / inv,
                range,
                scale: inv,
            })
        })
        .collect::<Result<_>>()?;
    Ok(AnnealedMeans { radii, times })
}

/// `max / min` of `ratio` over grid points `x >= x_max / 10`.
pub fn top_decade_spread(points: &[(f64, f64)]) -> f64 {
    let xmax = points.iter().map(|p| p.0).fold(f64::MIN, f64::max);
    let top: Vec<f64> = points
        .iter()
        .filter(|p| p.0 >= xmax / 10.0)
        .map(|p| p.1)
        .collect();
    let hi = top.iter().copied().fold(f64::MIN, f64::max);
    let lo = top.iter().copied().fold(f64::MAX, f64::min);
    hi / lo
}

/// Polynomial-decay fit of `p̂(λ)` at one radius over grid points with
/// `p̂ > 0`: `ln p̂ ≈ a − q ln λ`. `None` when fewer than two positive points.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct DecayFit {
    pub radius: f64,
    pub q: f64,
    pub positive_points: usize,
    /// Largest grid `λ` with `p̂ > 0`.
    pub last_positive: f64,
}

pub fn fit_decay(rows: &[PHatRow], radius: f64) -> Option<DecayFit> {
    let positive: Vec<&PHatRow> = rows
        .iter()
        .filter(|r| r.radius == radius && r.p_hat > 0.0)
        .collect();
    let pts: Vec<(f64, f64)> = positive.iter().map(|r| (r.lambda.ln(), r.p_hat.ln())).collect();
    if pts.len() < 2 {
        return None;
    }
    let (slope, _, _) = ols(&pts);
    Some(DecayFit {
        radius,
        q: -slope,
        positive_points: pts.len(),
        last_positive: positive.iter().map(|r| r.lambda).fold(f64::MIN, f64::max),
    })
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EnsembleSummary {
    pub graphs: usize,
    pub truncation_contaminated: usize,
    pub spectral_dimension: PowerFit,
    pub exit_exponent: PowerFit,
    pub range_exponent: PowerFit,
    pub displacement_exponent: PowerFit,
    pub p_hat: Vec<PHatRow>,
    pub tightness: Vec<TightnessRow>,
    pub annealed: AnnealedMeans,
}

impl EnsembleSummary {
    pub fn build(
        ensemble: &[GraphObservables],
        v: &GrowthFunction,
        r: &GrowthFunction,
        lambdas: &[f64],
        thetas: &[f64],
        seed: u64,
    ) -> Result<Self> {
        let annealed = annealed_means(ensemble, v, r, seed)?;
        let p2n: Vec<(f64, f64)> = annealed.times.iter().map(|t| (t.n as f64, t.p2n.mean)).collect();
        let exit: Vec<(f64, f64)> = annealed
            .radii
            .iter()
            .map(|m| (m.radius, m.exit_time.mean))
            .collect();
        let range: Vec<(f64, f64)> = annealed.times.iter().map(|t| (t.n as f64, t.range)).collect();
        let disp: Vec<(f64, f64)> = annealed
            .times
            .iter()
            .map(|t| (t.n as f64, t.distance.mean))
            .collect();
        Ok(EnsembleSummary {
            graphs: ensemble.len(),
            truncation_contaminated: ensemble.iter().filter(|g| g.truncation_contaminated).count(),
            spectral_dimension: fit_spectral_dimension(&p2n)?,
            exit_exponent: fit_exit_exponent(&exit)?,
            range_exponent: fit_range_exponent(&range)?,
            displacement_exponent: fit_displacement_exponent(&disp)?,
            p_hat: p_hat_table(ensemble, lambdas, v, r),
            tightness: tightness_tables(ensemble, thetas, v, r)?,
            annealed,
        })
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::generators::{fixture, Fixture};

    #[test]
    fn growth_normalized_and_monotone() {
        let v = GrowthFunction::new(2.0, 1.5).unwrap();
        assert!((v.eval(1.0) - 1.0).abs() < 1e-15);
        let mut prev = 0.0;
        for k in 1..200 {
            let x = k as f64 * 0.37;
            assert!(v.eval(x) > prev);
            prev = v.eval(x);
        }
        assert!(v.lower_exponent == 2.0 && v.upper_exponent > 2.0);
        assert!(GrowthFunction::new(0.1, -5.0).is_err());
        assert!(GrowthFunction::volume(0.5, 0.0).is_err());
        assert!(GrowthFunction::resistance(1.5, 0.0).is_err());
    }

    #[test]
    fn doubling_bounds_hold() {
        let v = GrowthFunction::new(1.0, -0.7).unwrap();
        for (a, b) in [(1.0, 2.0), (3.0, 300.0), (0.5, 1e6), (10.0, 11.0)] {
            let ratio = v.eval(b) / v.eval(a);
            let s: f64 = b / a;
            assert!(ratio >= s.powf(v.lower_exponent) * (1.0 - 1e-9));
            assert!(ratio <= s.powf(v.upper_exponent) * (1.0 + 1e-9));
        }
    }

    #[test]
    fn inverse_examples() {
        let id = GrowthFunction::identity();
        assert!((inverse_scale(&id, &id, 100.0).unwrap() - 10.0).abs() < 1e-9);
        let sq = GrowthFunction::new(2.0, 0.0).unwrap();
        assert!((inverse_scale(&sq, &id, 1000.0).unwrap() - 10.0).abs() < 1e-9);
        assert_eq!(inverse_scale(&id, &id, 1.0).unwrap(), 1.0);
        assert!(inverse_scale(&id, &id, 0.5).is_err());
    }

    #[test]
    fn line_j_membership() {
        let g = fixture(Fixture::Line(64)).unwrap();
        let id = GrowthFunction::identity();
        let rep = check_j(&g, 4.0, 4.0, &id, &id, Metric::LineDistance).unwrap();
        assert_eq!(rep.observables.volume, 14.0);
        assert!((rep.observables.reff_complement - 2.0).abs() < 1e-9);
        assert!(rep.member);
        let rep = check_j(&g, 4.0, 2.0, &id, &id, Metric::LineDistance).unwrap();
        assert!(!rep.member && !rep.volume_ok && rep.complement_ok && rep.pointwise_ok);
        assert!(check_j(&g, 4.0, 1.0, &id, &id, Metric::LineDistance).is_err());
    }

    #[test]
    fn synthetic_fits() {
        let ns: Vec<f64> = (0..12).map(|k| 2f64.powi(k)).collect();
        let half: Vec<(f64, f64)> = ns.iter().map(|&n| (n, n.powf(-0.5))).collect();
        assert!((fit_spectral_dimension(&half).unwrap().exponent - 1.0).abs() < 1e-12);
        let ao: Vec<(f64, f64)> = ns.iter().map(|&n| (n, 3.0 * n.powf(-2.0 / 3.0))).collect();
        assert!((fit_spectral_dimension(&ao).unwrap().exponent - 4.0 / 3.0).abs() < 1e-12);
        let sq: Vec<(f64, f64)> = ns.iter().map(|&n| (n, n * n)).collect();
        let fit = fit_exit_exponent(&sq).unwrap();
        assert!((fit.exponent - 2.0).abs() < 1e-12);
        assert_eq!(fit.window, (16.0, 2048.0));
        assert!(fit.std_error < 1e-12);
        let rt: Vec<(f64, f64)> = ns.iter().map(|&n| (n, n.sqrt())).collect();
        assert!((fit_range_exponent(&rt).unwrap().exponent - 0.5).abs() < 1e-12);
        assert!(fit_spectral_dimension(&half[..5]).is_err());
        let mut bad = half.clone();
        bad[3].1 = 0.0;
        assert!(fit_spectral_dimension(&bad).is_err());
    }

    #[test]
    fn bootstrap_brackets_mean() {
        let xs: Vec<f64> = (0..40).map(|k| (k as f64).sin() + 2.0).collect();
        let m = bootstrap_mean(&xs, 1);
        assert!(m.ci_lo <= m.mean && m.mean <= m.ci_hi);
        assert_eq!(m, bootstrap_mean(&xs, 1));
        let one = bootstrap_mean(&[3.0], 1);
        assert_eq!((one.ci_lo, one.ci_hi), (3.0, 3.0));
    }

    #[test]
    fn decay_fit() {
        let rows: Vec<PHatRow> = [1.0, 0.5, 0.25, 0.0]
            .iter()
            .zip([2.0, 4.0, 8.0, 16.0])
            .map(|(&p, l)| PHatRow {
                lambda: l,
                radius: 8.0,
                p_hat: p,
            })
            .collect();
        let fit = fit_decay(&rows, 8.0).unwrap();
        assert!((fit.q - 1.0).abs() < 1e-12);
        assert_eq!(fit.last_positive, 8.0);
        assert!(fit_decay(&rows[2..], 8.0).is_none());
    }
}
