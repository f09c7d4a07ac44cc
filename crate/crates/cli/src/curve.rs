use std::f64::consts::PI;
use std::path::Path;

use qobserver_core::{export, ndpa};

use crate::config::{Config, Source};
use crate::error::CliResult;
use crate::output::{ensure_dir, write_with, Outcome};

fn grid(cfg: &Config, src: &Source) -> CliResult<Vec<f64>> {
    let Some(c) = &cfg.curve else {
        return Ok(ndpa::default_theta_grid());
    };
    if let Some(g) = &c.grid {
        if c.start.is_some() || c.stop.is_some() || c.points.is_some() {
            return Err(src.invalid("curve.grid", "give either grid or start/stop/points, not both"));
        }
        if g.is_empty() {
            return Err(src.invalid("curve.grid", "grid is empty"));
        }
        return Ok(g.clone());
    }
    if c.start.is_none() && c.stop.is_none() && c.points.is_none() {
        return Ok(ndpa::default_theta_grid());
    }
    let start = c.start.unwrap_or(0.01);
    let stop = c.stop.unwrap_or(2.0 * PI - 0.01);
    let points = c.points.unwrap_or(1000);
    if points < 2 {
        return Err(src.invalid("curve.points", "need at least 2 points"));
    }
    if !(stop > start) {
        return Err(src.invalid("curve.stop", "stop must exceed start"));
    }
    Ok((0..points)
        .map(|i| start + (stop - start) * i as f64 / (points - 1) as f64)
        .collect())
}

/// Writes `curve.csv` (`theta,f`) and checks that `f` is strictly decreasing.
pub fn cmd_curve(cfg: &Config, src: &Source, out: &Path) -> CliResult<Outcome> {
    let grid = grid(cfg, src)?;
    let rows = ndpa::f_theta_curve(&grid).map_err(|e| src.invalid("curve", e))?;
    ensure_dir(out)?;
    let files = vec![write_with(&out.join("curve.csv"), |w| export::write_curve_csv(w, &rows))?];
    let sorted = grid.windows(2).all(|w| w[1] > w[0]);
    let monotone = ndpa::is_strictly_decreasing(&rows);
    let mut failed = Vec::new();
    if sorted && !monotone {
        failed.push("strictly decreasing".to_string());
    }
    let verdict = match (sorted, monotone) {
        (false, _) => "not checked (grid not increasing)",
        (true, true) => "pass",
        (true, false) => "FAIL",
    };
    let summary = format!(
        "points     = {}\ntheta      = [{:.6}, {:.6}]\nmonotone   = {verdict}\n",
        rows.len(),
        rows.first().map_or(f64::NAN, |r| r.0),
        rows.last().map_or(f64::NAN, |r| r.0),
    );
    Ok(Outcome {
        files,
        summary,
        failed,
    })
}
