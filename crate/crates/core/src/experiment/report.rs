use std::fmt::Write as _;
use std::fs;
use std::path::{Path, PathBuf};

use super::run::{RunRecord, RunSummary};
use crate::error::{Error, Result};
use crate::scaling::PowerFit;

/// Plot data written by [`report`].
#[derive(Debug, Clone, PartialEq)]
pub struct ReportBundle {
    pub dir: PathBuf,
    pub files: Vec<PathBuf>,
    pub summary_text: String,
}

fn read_json<T: serde::de::DeserializeOwned>(path: &Path) -> Result<T> {
    let text = fs::read_to_string(path)
        .map_err(|e| Error::Config(format!("cannot read {}: {e}", path.display())))?;
    Ok(serde_json::from_str(&text)?)
}

/// Two-column `ln x  ln y` data, skipping non-positive values.
fn loglog(points: &[(f64, f64)]) -> String {
    let mut s = String::new();
    for &(x, y) in points {
        if x > 0.0 && y > 0.0 {
            let _ = writeln!(s, "{} {}", x.ln(), y.ln());
        }
    }
    s
}

fn fit_line(points: &[(f64, f64)], fit: &PowerFit) -> String {
    let mut s = String::new();
    for &(x, _) in points {
        if x >= fit.window.0 && x <= fit.window.1 {
            let lx = x.ln();
            let _ = writeln!(s, "{} {}", lx, fit.intercept + fit.slope * lx);
        }
    }
    s
}

fn describe(name: &str, fit: &PowerFit) -> String {
    format!(
        "{name}: {:.4} ± {:.4} over [{}, {}] ({} points; full range {:.4})\n",
        fit.exponent, fit.std_error, fit.window.0, fit.window.1, fit.points, fit.full_range_exponent
    )
}

/// Turns a finished run directory into gnuplot-ready data under `plots/`
/// and a human-readable `summary.txt`.
pub fn report(record_dir: &Path) -> Result<ReportBundle> {
    let record: RunRecord = read_json(&record_dir.join("run.json"))?;
    let summary: RunSummary = read_json(&record_dir.join(&record.summary))?;
    let e = &summary.ensemble;
    let plots = record_dir.join("plots");
    fs::create_dir_all(&plots)?;

    let p2n: Vec<(f64, f64)> = e.annealed.times.iter().map(|t| (t.n as f64, t.p2n.mean)).collect();
    let exit: Vec<(f64, f64)> = e.annealed.radii.iter().map(|m| (m.radius, m.exit_time.mean)).collect();
    let range: Vec<(f64, f64)> = e.annealed.times.iter().map(|t| (t.n as f64, t.range)).collect();
    let disp: Vec<(f64, f64)> = e.annealed.times.iter().map(|t| (t.n as f64, t.distance.mean)).collect();

    let mut files = Vec::new();
    let mut put = |name: &str, body: String| -> Result<()> {
        let path = plots.join(name);
        fs::write(&path, body)?;
        files.push(path);
        Ok(())
    };
    for (stem, pts, fit) in [
        ("p2n", &p2n, &e.spectral_dimension),
        ("exit", &exit, &e.exit_exponent),
        ("range", &range, &e.range_exponent),
        ("displacement", &disp, &e.displacement_exponent),
    ] {
        put(&format!("{stem}.dat"), loglog(pts))?;
        put(&format!("{stem}_fit.dat"), fit_line(pts, fit))?;
    }
    let mut radii: Vec<f64> = e.p_hat.iter().map(|r| r.radius).collect();
    radii.dedup();
    for &rad in &radii {
        let pts: Vec<(f64, f64)> = e
            .p_hat
            .iter()
            .filter(|r| r.radius == rad)
            .map(|r| (r.lambda, r.p_hat))
            .collect();
        put(&format!("p_hat_R{rad}.dat"), loglog(&pts))?;
    }

    let mut text = String::new();
    let _ = writeln!(text, "model: {}", summary.model);
    let _ = writeln!(text, "config sha256: {}", summary.config_hash);
    let _ = writeln!(
        text,
        "graphs: {} ({} truncation-contaminated)",
        e.graphs, e.truncation_contaminated
    );
    text.push_str(&describe("spectral dimension", &e.spectral_dimension));
    text.push_str(&describe("exit exponent", &e.exit_exponent));
    text.push_str(&describe("range exponent", &e.range_exponent));
    text.push_str(&describe("displacement exponent", &e.displacement_exponent));
    for d in summary.decay.iter().flatten() {
        let _ = writeln!(
            text,
            "p_hat decay at R={}: q = {:.4} over {} positive points (last positive λ = {})",
            d.radius, d.q, d.positive_points, d.last_positive
        );
    }
    if let Some(t) = &summary.tightness_at_theta_star {
        let _ = writeln!(
            text,
            "tightness at θ={}: exit {:.3}, kernel {:.3}, displacement {:.3}/{:.3}",
            summary.theta_star, t.exit_time, t.heat_kernel, t.displacement_upper, t.displacement_lower
        );
    }
    fs::write(record_dir.join("summary.txt"), &text)?;
    files.push(record_dir.join("summary.txt"));

    Ok(ReportBundle {
        dir: plots,
        files,
        summary_text: text,
    })
}
