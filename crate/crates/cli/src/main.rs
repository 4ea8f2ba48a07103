use std::io::{self, Write};
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use anyhow::Context;
use clap::{Parser, Subcommand, ValueEnum};
use resistive_walk::experiment::{self, ExperimentConfig};
use resistive_walk::generators::{generate_exp_tail, generate_long_range, ExpTailParams, LongRangeParams};
use resistive_walk::resistance::{effective_resistance, resistance_profile};
use resistive_walk::scaling::{check_j, GrowthFunction};
use resistive_walk::walk::kernel_series;
use resistive_walk::{Error, Graph, Metric, VertexId};

#[derive(Parser)]
#[command(name = "resistive-walk", version, about = "Random walks and effective resistance on random media")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Clone, Copy, ValueEnum)]
enum Model {
    Lrp,
    Exp,
}

#[derive(Subcommand)]
enum Command {
    /// Run an experiment from a config file or a preset name.
    Run {
        config: String,
        /// Override the config's output directory.
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Emit plot data and a text summary for a finished run.
    Report { record: PathBuf },
    /// Sample a windowed random graph and write its edge list.
    Generate {
        #[arg(long, value_enum)]
        model: Model,
        #[arg(long = "L")]
        half_width: u32,
        #[arg(long, default_value_t = 1.0)]
        beta: f64,
        #[arg(long, default_value_t = 3.5)]
        s: f64,
        #[arg(long, default_value_t = 1.0)]
        c: f64,
        #[arg(long)]
        seed: u64,
        #[arg(long)]
        out: PathBuf,
    },
    /// Effective resistance between two vertex sets.
    Resistance {
        #[arg(long)]
        graph: PathBuf,
        #[arg(long = "A", value_delimiter = ',', allow_hyphen_values = true)]
        a: Vec<i64>,
        #[arg(long = "B", value_delimiter = ',', allow_hyphen_values = true)]
        b: Vec<i64>,
    },
    /// CSV `R,reff_complement,max_ratio` around the marked vertex.
    Profile {
        #[arg(long)]
        graph: PathBuf,
        #[arg(long, value_delimiter = ',', num_args = 1..)]
        radii: Vec<f64>,
        #[arg(long, default_value = "graph")]
        metric: Metric,
        #[arg(long, default_value_t = 1.0)]
        r_exponent: f64,
        #[arg(long, default_value_t = 0.0)]
        r_log_power: f64,
    },
    /// CSV `n,p2n,f_n,boundary_mass` of the exact kernel at the marked vertex.
    Heatkernel {
        #[arg(long)]
        graph: PathBuf,
        #[arg(long)]
        horizon: usize,
    },
    /// Evaluate `J(λ)` membership at one radius and print the report as JSON.
    Jcheck {
        #[arg(long)]
        graph: PathBuf,
        #[arg(long = "R")]
        radius: f64,
        #[arg(long)]
        lambda: f64,
        #[arg(long, default_value = "graph")]
        metric: Metric,
        #[arg(long, default_value_t = 1.0)]
        v_exponent: f64,
        #[arg(long, default_value_t = 0.0)]
        v_log_power: f64,
        #[arg(long, default_value_t = 1.0)]
        r_exponent: f64,
        #[arg(long, default_value_t = 0.0)]
        r_log_power: f64,
    },
}

fn load_config(arg: &str) -> anyhow::Result<ExperimentConfig> {
    let path = Path::new(arg);
    if path.exists() {
        return ExperimentConfig::load(path).with_context(|| format!("loading {arg}"));
    }
    Ok(experiment::preset(arg)?)
}

fn labels(xs: &[i64]) -> Vec<VertexId> {
    xs.iter().copied().map(VertexId).collect()
}

fn execute(cmd: Command) -> anyhow::Result<()> {
    let stdout = io::stdout();
    let mut out = stdout.lock();
    match cmd {
        Command::Run { config, out: dir } => {
            let mut cfg = load_config(&config)?;
            if let Some(dir) = dir {
                cfg.output = dir;
            }
            let outcome = experiment::run(&cfg)?;
            let e = &outcome.summary.ensemble;
            writeln!(out, "wrote {} ({} files)", outcome.dir.display(), outcome.record.files.len())?;
            writeln!(out, "d_s = {:.4} ± {:.4}", e.spectral_dimension.exponent, e.spectral_dimension.std_error)?;
            writeln!(out, "exit exponent = {:.4} ± {:.4}", e.exit_exponent.exponent, e.exit_exponent.std_error)?;
        }
        Command::Report { record } => {
            let bundle = experiment::report(&record)?;
            write!(out, "{}", bundle.summary_text)?;
        }
        Command::Generate { model, half_width, beta, s, c, seed, out: path } => {
            let g = match model {
                Model::Lrp => generate_long_range(&LongRangeParams { half_width, beta, s, seed })?,
                Model::Exp => generate_exp_tail(&ExpTailParams { half_width, rate: c, seed })?,
            };
            g.save(&path)?;
            writeln!(out, "{} vertices, {} bonds", g.len(), g.bonds().len())?;
        }
        Command::Resistance { graph, a, b } => {
            let g = Graph::load(&graph)?;
            writeln!(out, "{}", effective_resistance(&g, &labels(&a), &labels(&b))?)?;
        }
        Command::Profile { graph, radii, metric, r_exponent, r_log_power } => {
            let g = Graph::load(&graph)?;
            let r = GrowthFunction::resistance(r_exponent, r_log_power)?;
            writeln!(out, "R,reff_complement,max_ratio")?;
            for row in resistance_profile(&g, &radii, metric, &r)? {
                writeln!(out, "{},{},{}", row.radius, row.reff_complement, row.max_ratio)?;
            }
        }
        Command::Heatkernel { graph, horizon } => {
            let g = Graph::load(&graph)?;
            let metric = if g.is_line_labeled() { Metric::LineDistance } else { Metric::GraphDistance };
            kernel_series(&g, g.marked(), horizon, metric)?.write_csv(&mut out)?;
        }
        Command::Jcheck {
            graph,
            radius,
            lambda,
            metric,
            v_exponent,
            v_log_power,
            r_exponent,
            r_log_power,
        } => {
            let g = Graph::load(&graph)?;
            let v = GrowthFunction::volume(v_exponent, v_log_power)?;
            let r = GrowthFunction::resistance(r_exponent, r_log_power)?;
            let report = check_j(&g, radius, lambda, &v, &r, metric)?;
            writeln!(out, "{}", serde_json::to_string_pretty(&report)?)?;
        }
    }
    out.flush()?;
    Ok(())
}

fn exit_code(err: &anyhow::Error) -> u8 {
    match err.downcast_ref::<Error>() {
        Some(e) if e.is_config() => 2,
        Some(e) if e.is_numeric() => 3,
        _ => 1,
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match execute(cli.command) {
        Ok(()) => ExitCode::SUCCESS,
        Err(err) => {
            eprintln!("error: {err:#}");
            ExitCode::from(exit_code(&err))
        }
    }
}
