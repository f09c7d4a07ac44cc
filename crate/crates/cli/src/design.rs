use std::fmt::Write as _;
use std::path::Path;

use serde::Serialize;

use qobserver_core::observer::{self, DesignReport, HomodyneDesign, ObserverSpec, PlantSpec};
use qobserver_core::Error;

use crate::config::{Config, ObserverConfig, PlantConfig, Source};
use crate::error::CliResult;
use crate::output::{ensure_dir, write_json, write_text, Outcome, SCHEMA_VERSION};

pub(crate) fn plant_spec(cfg: &Config, src: &Source, command: &str) -> CliResult<PlantSpec<f64>> {
    let p = cfg.plant.as_ref().ok_or_else(|| src.missing("plant", command))?;
    PlantSpec::new(p.c_p, p.x_p0_mean).map_err(|e| src.invalid("plant.c_p", e))
}

pub(crate) fn observer_spec(cfg: &Config, src: &Source, command: &str) -> CliResult<ObserverSpec<f64>> {
    let o = cfg.observer.as_ref().ok_or_else(|| src.missing("observer", command))?;
    ObserverSpec::new(o.beta, o.omega_o, o.kappa).map_err(|e| {
        let field = match e {
            Error::NonPositiveKappa(_) => "observer.kappa",
            Error::NegativeDetuning(_) => "observer.omega_o",
            _ => "observer",
        };
        src.invalid(field, e)
    })
}

pub(crate) fn homodyne(obs: &ObserverSpec<f64>, src: &Source) -> CliResult<HomodyneDesign<f64>> {
    observer::homodyne_design(obs).map_err(|e| src.invalid("observer.beta", e))
}

#[derive(Serialize)]
struct DesignOutput<'a> {
    schema_version: &'static str,
    command: &'static str,
    plant: &'a PlantConfig,
    observer: &'a ObserverConfig,
    #[serde(flatten)]
    report: &'a DesignReport<f64>,
}

fn summary(r: &DesignReport<f64>) -> String {
    let mut s = String::new();
    let pass = |b: bool| if b { "pass" } else { "FAIL" };
    let _ = writeln!(s, "e                        = [{:.12}, {:.12}]", r.e[0], r.e[1]);
    let _ = writeln!(s, "K                        = [{:.12}, {:.12}]", r.k[0], r.k[1]);
    let _ = writeln!(s, "noise intensity |K|^2    = {:.12e}", r.noise_intensity);
    let _ = writeln!(s, "time constant 2/kappa    = {:.12e}", r.time_constant);
    for l in &r.eigenvalues {
        let _ = writeln!(s, "eigenvalue               = {:.12} {:+.12}i", l[0], l[1]);
    }
    let _ = writeln!(
        s,
        "steady-state gain        = [{:.12}, {:.12}] per unit z_p",
        r.steady_state_gain[0], r.steady_state_gain[1]
    );
    let _ = writeln!(s, "all-pass residual        = {:.3e}", r.all_pass_residual);
    let _ = writeln!(s, "z_p invariance residual  = {:.3e}", r.zp_invariance_residual);
    for (name, rep) in [("observer", &r.realizability.observer), ("closed loop", &r.realizability.augmented)] {
        let _ = writeln!(
            s,
            "realizability ({name:<11}) = {} (drift {:.3e}, coupling {:.3e})",
            pass(rep.passed),
            rep.drift_residual,
            rep.coupling_residual
        );
    }
    s
}

/// Writes `report.json` and `report.txt` for the configured plant and observer.
pub fn cmd_design(cfg: &Config, src: &Source, out: &Path) -> CliResult<Outcome> {
    let plant = plant_spec(cfg, src, "design")?;
    let obs = observer_spec(cfg, src, "design")?;
    homodyne(&obs, src)?;
    let report = observer::design_report(&plant, &obs).map_err(|e| src.invalid("observer", e))?;

    ensure_dir(out)?;
    let doc = DesignOutput {
        schema_version: SCHEMA_VERSION,
        command: "design",
        plant: cfg.plant.as_ref().expect("validated above"),
        observer: cfg.observer.as_ref().expect("validated above"),
        report: &report,
    };
    let text = summary(&report);
    let files = vec![
        write_json(&out.join("report.json"), &doc)?,
        write_text(&out.join("report.txt"), &text)?,
    ];
    Ok(Outcome {
        files,
        summary: text,
        failed: Vec::new(),
    })
}
