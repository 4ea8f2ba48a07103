use std::fs;
use std::io::{BufWriter, Write};
use std::path::{Path, PathBuf};
use std::time::Instant;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use super::config::{ExperimentConfig, ModelSpec};
use crate::error::{Error, Result};
use crate::generators::{
    fixture, generate_exp_tail, generate_long_range, stream_seed, ExpTailParams, LongRangeParams,
};
use crate::graph::Graph;
use crate::resistance::{complement_resistance, mean_exit_time};
use crate::scaling::{
    fit_decay, j_observables, DecayFit, EnsembleSummary, GraphObservables, TightnessRow,
};
use crate::walk::{kernel_series, simulate, KernelSeries, WalkConfig, WalkStatistics};

/// Stream index reserved for Monte Carlo walks of a member graph.
const WALK_STREAM: u64 = 0x5741_4c4b;
/// Stream index reserved for bootstrap resampling.
const BOOTSTRAP_STREAM: u64 = 0x424f_4f54;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RunRecord {
    /// SHA-256 of the serialized config.
    pub config_hash: String,
    pub tool_version: String,
    pub workers: usize,
    pub wall_clock_seconds: f64,
    /// Observable files, relative to the output directory.
    pub files: Vec<String>,
    pub summary: String,
}

/// Everything written to `summary.json`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RunSummary {
    pub config_hash: String,
    pub model: String,
    pub ensemble: EnsembleSummary,
    pub theta_star: f64,
    pub tightness_at_theta_star: Option<TightnessRow>,
    /// Polynomial-decay fit of `p̂(λ)` per `J` radius.
    pub decay: Vec<Option<DecayFit>>,
}

#[derive(Debug, Clone)]
pub struct RunOutcome {
    pub dir: PathBuf,
    pub record: RunRecord,
    pub summary: RunSummary,
    pub observables: Vec<GraphObservables>,
}

pub fn config_hash(cfg: &ExperimentConfig) -> String {
    let digest = Sha256::digest(cfg.serialize().as_bytes());
    digest.iter().map(|b| format!("{b:02x}")).collect()
}

/// Graph number `index` of the ensemble and its seed.
pub fn member_graph(cfg: &ExperimentConfig, index: usize) -> Result<(Graph, u64)> {
    let seed = stream_seed(cfg.seed, index as u64);
    let g = match cfg.model {
        ModelSpec::LongRange { half_width, beta, s } => generate_long_range(&LongRangeParams {
            half_width,
            beta,
            s,
            seed,
        })?,
        ModelSpec::ExpTail { half_width, rate } => generate_exp_tail(&ExpTailParams {
            half_width,
            rate,
            seed,
        })?,
        ModelSpec::Fixture(f) => fixture(f)?,
    };
    Ok((g, seed))
}

/// All quenched observables of one member graph.
pub fn graph_observables(
    cfg: &ExperimentConfig,
    g: &Graph,
    index: usize,
    seed: u64,
) -> Result<(GraphObservables, KernelSeries, WalkStatistics)> {
    let origin = g.marked();
    let r = cfg.resistance_growth()?;
    let mut volume = Vec::with_capacity(cfg.radii.len());
    let mut reff = Vec::with_capacity(cfg.radii.len());
    let mut exit = Vec::with_capacity(cfg.radii.len());
    for &rad in &cfg.radii {
        volume.push(g.volume(origin, rad, cfg.metric)?);
        reff.push(complement_resistance(g, origin, rad, cfg.metric)?);
        exit.push(mean_exit_time(g, origin, rad, cfg.metric)?);
    }
    let series = kernel_series(g, origin, cfg.kernel_horizon(), cfg.metric)?;
    let walks = simulate(
        g,
        origin,
        &WalkConfig {
            n_steps: cfg.walk_steps,
            n_trajectories: cfg.trajectories,
            seed: stream_seed(seed, WALK_STREAM),
            radii: cfg.walk_radii.clone(),
            checkpoints: cfg.times.clone(),
            metric: cfg.metric,
        },
    )?;
    let mut mean_range = Vec::with_capacity(cfg.times.len());
    let mut distance_samples = Vec::with_capacity(cfg.times.len());
    for &n in &cfg.times {
        let c = walks.checkpoint_index(n).expect("time grid is within the walk horizon");
        let m = walks.trajectories.len() as f64;
        mean_range.push(walks.trajectories.iter().map(|t| t.range_measure[c]).sum::<f64>() / m);
        distance_samples.push(walks.trajectories.iter().map(|t| t.displacement[c]).collect());
    }
    let j = if cfg.j_radii.is_empty() {
        Vec::new()
    } else {
        j_observables(g, &cfg.j_radii, cfg.metric, &r)?
    };
    let obs = GraphObservables {
        index,
        seed,
        radii: cfg.radii.clone(),
        volume,
        reff_complement: reff,
        exit_time: exit,
        times: cfg.times.clone(),
        p2n: cfg.times.iter().map(|&n| series.p2n(n)).collect(),
        f_n: cfg.times.iter().map(|&n| series.f(n)).collect(),
        mean_distance: cfg.times.iter().map(|&n| series.mean_distance[n]).collect(),
        mean_range,
        distance_samples,
        j,
        truncation_contaminated: series.truncation_contaminated(),
    };
    Ok((obs, series, walks))
}

fn create(dir: &Path, rel: &str, files: &mut Vec<String>) -> Result<BufWriter<fs::File>> {
    files.push(rel.to_string());
    Ok(BufWriter::new(fs::File::create(dir.join(rel))?))
}

fn write_member(
    dir: &Path,
    obs: &GraphObservables,
    series: &KernelSeries,
    walks: &WalkStatistics,
    files: &mut Vec<String>,
) -> Result<()> {
    let stem = format!("graphs/graph_{:03}", obs.index);
    let mut f = create(dir, &format!("{stem}_kernel.csv"), files)?;
    series.write_csv(&mut f)?;
    f.flush()?;
    for (k, r) in walks.radii.iter().enumerate() {
        let mut f = create(dir, &format!("{stem}_walk_R{r}.csv"), files)?;
        walks.write_csv(k, &mut f)?;
        f.flush()?;
    }
    let mut f = create(dir, &format!("{stem}_radii.csv"), files)?;
    writeln!(f, "R,volume,reff_complement,exit_time")?;
    for k in 0..obs.radii.len() {
        writeln!(
            f,
            "{},{},{},{}",
            obs.radii[k], obs.volume[k], obs.reff_complement[k], obs.exit_time[k]
        )?;
    }
    f.flush()?;
    let mut f = create(dir, &format!("{stem}_profile.csv"), files)?;
    writeln!(f, "R,reff_complement,max_ratio")?;
    for j in &obs.j {
        writeln!(f, "{},{},{}", j.radius, j.reff_complement, j.max_ratio)?;
    }
    f.flush()?;
    Ok(())
}

fn write_tables(dir: &Path, s: &EnsembleSummary, files: &mut Vec<String>) -> Result<()> {
    let mut f = create(dir, "p_hat.csv", files)?;
    writeln!(f, "lambda,p_hat,R")?;
    for row in &s.p_hat {
        writeln!(f, "{},{},{}", row.lambda, row.p_hat, row.radius)?;
    }
    f.flush()?;
    let mut f = create(dir, "exit.csv", files)?;
    writeln!(f, "R,mean_tau,ci_lo,ci_hi")?;
    for m in &s.annealed.radii {
        writeln!(f, "{},{},{},{}", m.radius, m.exit_time.mean, m.exit_time.ci_lo, m.exit_time.ci_hi)?;
    }
    f.flush()?;
    let mut f = create(dir, "kernel.csv", files)?;
    writeln!(f, "n,mean_p2n,ci_lo,ci_hi")?;
    for t in &s.annealed.times {
        writeln!(f, "{},{},{},{}", t.n, t.p2n.mean, t.p2n.ci_lo, t.p2n.ci_hi)?;
    }
    f.flush()?;
    let mut f = create(dir, "tightness.csv", files)?;
    writeln!(f, "theta,exit_time,heat_kernel,displacement_upper,displacement_lower")?;
    for t in &s.tightness {
        writeln!(
            f,
            "{},{},{},{},{}",
            t.theta, t.exit_time, t.heat_kernel, t.displacement_upper, t.displacement_lower
        )?;
    }
    f.flush()?;
    let mut f = create(dir, "annealed_radii.csv", files)?;
    writeln!(f, "R,exit_ratio,reff_volume,reff_volume_ratio")?;
    for m in &s.annealed.radii {
        writeln!(f, "{},{},{},{}", m.radius, m.exit_ratio, m.reff_volume.mean, m.reff_volume_ratio)?;
    }
    f.flush()?;
    let mut f = create(dir, "annealed_times.csv", files)?;
    writeln!(f, "n,scale,p2n_ratio,f_n,mean_distance,distance_ratio,mean_range")?;
    for t in &s.annealed.times {
        writeln!(
            f,
            "{},{},{},{},{},{},{}",
            t.n, t.scale, t.p2n_ratio, t.f_n, t.distance.mean, t.distance_ratio, t.range
        )?;
    }
    f.flush()?;
    Ok(())
}

/// Runs the pipeline with the worker count from the environment.
pub fn run(cfg: &ExperimentConfig) -> Result<RunOutcome> {
    run_in_pool(cfg, super::workers_from_env()?)
}

/// Runs the full pipeline on a pool of `workers` threads (all cores when
/// `None`). Outputs depend only on the config.
pub fn run_in_pool(cfg: &ExperimentConfig, workers: Option<usize>) -> Result<RunOutcome> {
    cfg.validate()?;
    let started = Instant::now();
    let mut builder = rayon::ThreadPoolBuilder::new();
    if let Some(w) = workers {
        builder = builder.num_threads(w);
    }
    let pool = builder
        .build()
        .map_err(|e| Error::Config(format!("cannot build worker pool: {e}")))?;
    let workers = pool.current_num_threads();

    let dir = cfg.output.clone();
    fs::create_dir_all(dir.join("graphs"))?;
    let hash = config_hash(cfg);
    fs::write(dir.join("config.txt"), cfg.serialize())?;

    let members: Vec<(GraphObservables, KernelSeries, WalkStatistics)> = pool.install(|| {
        (0..cfg.ensemble)
            .into_par_iter()
            .map(|index| {
                let seed = stream_seed(cfg.seed, index as u64);
                let wrap = |e: Error| Error::Member {
                    index,
                    seed,
                    source: Box::new(e),
                };
                let (g, seed) = member_graph(cfg, index).map_err(wrap)?;
                graph_observables(cfg, &g, index, seed).map_err(wrap)
            })
            .collect::<Result<Vec<_>>>()
    })?;

    let mut files = vec!["config.txt".to_string()];
    for (obs, series, walks) in &members {
        write_member(&dir, obs, series, walks, &mut files)?;
    }
    let observables: Vec<GraphObservables> = members.into_iter().map(|m| m.0).collect();

    let v = cfg.volume_growth()?;
    let r = cfg.resistance_growth()?;
    let ensemble = EnsembleSummary::build(
        &observables,
        &v,
        &r,
        &cfg.lambdas,
        &cfg.thetas,
        stream_seed(cfg.seed, BOOTSTRAP_STREAM),
    )?;
    write_tables(&dir, &ensemble, &mut files)?;
    let tightness_at_theta_star = crate::scaling::tightness_tables(&observables, &[cfg.theta_star], &v, &r)?
        .into_iter()
        .next();
    let decay = cfg
        .j_radii
        .iter()
        .map(|&rad| fit_decay(&ensemble.p_hat, rad))
        .collect();
    let summary = RunSummary {
        config_hash: hash.clone(),
        model: cfg.model.name().to_string(),
        ensemble,
        theta_star: cfg.theta_star,
        tightness_at_theta_star,
        decay,
    };
    fs::write(dir.join("summary.json"), serde_json::to_string_pretty(&summary)?)?;
    files.push("summary.json".to_string());

    let record = RunRecord {
        config_hash: hash,
        tool_version: env!("CARGO_PKG_VERSION").to_string(),
        workers,
        wall_clock_seconds: started.elapsed().as_secs_f64(),
        files,
        summary: "summary.json".to_string(),
    };
    fs::write(dir.join("run.json"), serde_json::to_string_pretty(&record)?)?;
    Ok(RunOutcome {
        dir,
        record,
        summary,
        observables,
    })
}
