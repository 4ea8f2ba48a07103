//! Experiment orchestration: configuration, shipped presets, the ensemble
//! pipeline and plot-data reports.

mod config;
mod report;
mod run;

pub use config::{ExperimentConfig, ModelSpec};
pub use report::{report, ReportBundle};
pub use run::{
    config_hash, graph_observables, member_graph, run, run_in_pool, RunOutcome, RunRecord, RunSummary,
};

use crate::error::{Error, Result};

/// Presets shipped with the crate, as `(name, config text)`.
pub const PRESETS: &[(&str, &str)] = &[
    ("line-sanity", include_str!("../../presets/line-sanity.conf")),
    ("lrp-s3.0", include_str!("../../presets/lrp-s3.0.conf")),
    ("lrp-s3.5", include_str!("../../presets/lrp-s3.5.conf")),
    ("lrp-s2.2", include_str!("../../presets/lrp-s2.2.conf")),
    ("exp-c1", include_str!("../../presets/exp-c1.conf")),
];

pub fn preset(name: &str) -> Result<ExperimentConfig> {
    let (_, text) = PRESETS
        .iter()
        .find(|(n, _)| *n == name)
        .ok_or_else(|| Error::Config(format!("unknown preset `{name}`")))?;
    ExperimentConfig::parse(text)
}

/// Worker count from `RESISTIVE_WALK_WORKERS`, if set.
pub const WORKERS_ENV: &str = "RESISTIVE_WALK_WORKERS";

pub fn workers_from_env() -> Result<Option<usize>> {
    match std::env::var(WORKERS_ENV) {
        Ok(v) => v
            .parse::<usize>()
            .ok()
            .filter(|&n| n > 0)
            .map(Some)
            .ok_or_else(|| Error::Config(format!("{WORKERS_ENV} must be a positive integer, got `{v}`"))),
        Err(_) => Ok(None),
    }
}
