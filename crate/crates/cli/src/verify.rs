use std::fmt::Write as _;
use std::path::Path;

use nalgebra::{DMatrix, Matrix2, RowVector2, Vector2};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::Serialize;

use qobserver_core::observer::{self, ObserverSpec, PlantSpec};
use qobserver_core::qls::{self, QuadratureSystem};
use qobserver_core::sim::{self, Integrator, SimConfig};

use crate::config::{Config, Source, SystemOverride, VerifyConfig};
use crate::design::{homodyne, observer_spec, plant_spec};
use crate::error::CliResult;
use crate::output::{ensure_dir, write_json, write_text, Outcome, SCHEMA_VERSION};
use crate::simulate::max_zp_drift;

/// Tolerance of the exact-arithmetic identities (`K e = 1`, norm ordering, closed forms).
const TIGHT: f64 = 1e-12;

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Check {
    pub name: String,
    pub value: f64,
    pub tolerance: f64,
    pub passed: bool,
    pub detail: String,
}

impl Check {
    fn at_most(name: &str, value: f64, tolerance: f64, detail: String) -> Self {
        Self {
            name: name.into(),
            value,
            tolerance,
            passed: value <= tolerance,
            detail,
        }
    }
}

#[derive(Serialize)]
struct VerifyOutput<'a> {
    schema_version: &'static str,
    command: &'static str,
    passed: bool,
    checks: &'a [Check],
}

fn to_dmatrix(rows: &[Vec<f64>], field: &str, src: &Source) -> CliResult<DMatrix<f64>> {
    let n = rows.len();
    let m = rows.first().map_or(0, Vec::len);
    if n == 0 || m == 0 || rows.iter().any(|r| r.len() != m) {
        return Err(src.invalid(field, "expected a non-empty rectangular matrix"));
    }
    Ok(DMatrix::from_fn(n, m, |i, j| rows[i][j]))
}

fn system_under_test(obs: &ObserverSpec<f64>, ov: Option<&SystemOverride>, src: &Source) -> CliResult<QuadratureSystem<f64>> {
    let base = obs.quadrature_system();
    let Some(ov) = ov else {
        return Ok(base);
    };
    let pick = |m: &Option<Vec<Vec<f64>>>, field: &str, fallback: &DMatrix<f64>| match m {
        Some(rows) => to_dmatrix(rows, field, src),
        None => Ok(fallback.clone()),
    };
    let a = pick(&ov.a, "verify.system.a", &base.a)?;
    let b = pick(&ov.b, "verify.system.b", &base.b)?;
    let c = pick(&ov.c, "verify.system.c", &base.c)?;
    QuadratureSystem::new(a, b, c).map_err(|e| src.invalid("verify.system", e))
}

fn realizability(name: &str, sys: &QuadratureSystem<f64>, tol: f64) -> Check {
    let r = qls::check_physical_realizability(sys, tol);
    Check::at_most(
        name,
        r.drift_residual.max(r.coupling_residual),
        tol,
        format!("drift {:.3e}, coupling {:.3e}", r.drift_residual, r.coupling_residual),
    )
}

/// Largest amount by which a random constraint-satisfying competitor beats `‖K‖`.
fn optimality_gap(e: Vector2<f64>, k: RowVector2<f64>, n: usize, seed: u64) -> f64 {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let norm = k.norm();
    let mut worst = f64::NEG_INFINITY;
    let mut drawn = 0;
    while drawn < n {
        let r = RowVector2::new(rng.gen_range(-1.0..1.0), rng.gen_range(-1.0..1.0));
        let re = (r * e)[0];
        if re.abs() < 1e-3 * r.norm() * e.norm() {
            continue;
        }
        worst = worst.max(norm - (r / re).norm());
        drawn += 1;
    }
    worst
}

fn zp_path_drift(plant: &PlantSpec<f64>, obs: &ObserverSpec<f64>, cfg: &VerifyConfig, c_p: [f64; 2]) -> CliResult<f64> {
    let design = observer::homodyne_design(obs).expect("observability checked before");
    let dt = SimConfig::step_limit(obs);
    let t_final = (20.0 * obs.time_constant()).min(5000.0 * dt);
    let mut sc = SimConfig::new(dt, t_final, cfg.seed, 8);
    sc.integrator = Integrator::Exact;
    sc.record_every = 10;
    sc.x_p0_cov = Some([[1.0, 0.0], [0.0, 1.0]]);
    let records = sim::simulate(plant, obs, &design, &sc)
        .map_err(|e| crate::error::CliError::Property(format!("z_p invariance simulation failed: {e}")))?;
    Ok(max_zp_drift(&records, c_p))
}

fn tradeoff(beta: [f64; 2], sweep: &[f64], src: &Source) -> CliResult<Check> {
    let mut noise = Vec::with_capacity(sweep.len());
    let mut tau = Vec::with_capacity(sweep.len());
    for &kappa in sweep {
        let obs = ObserverSpec::new(beta, 0.0, kappa).map_err(|e| src.invalid("verify.kappa_sweep", e))?;
        noise.push(homodyne(&obs, src)?.noise_intensity);
        tau.push(obs.time_constant());
    }
    let increasing = sweep.windows(2).all(|w| w[1] > w[0]);
    if !increasing {
        return Err(src.invalid("verify.kappa_sweep", "kappa values must be strictly increasing"));
    }
    let violations = noise.windows(2).filter(|w| !(w[1] > w[0])).count()
        + tau.windows(2).filter(|w| !(w[1] < w[0])).count();
    let fmt = |xs: &[f64]| xs.iter().map(|x| format!("{x:.4e}")).collect::<Vec<_>>().join(" < ");
    Ok(Check {
        name: "noise/convergence trade-off".into(),
        value: violations as f64,
        tolerance: 0.0,
        passed: violations == 0,
        detail: format!("|K|^2: {}; 2/kappa decreasing: {}", fmt(&noise), tau.windows(2).all(|w| w[1] < w[0])),
    })
}

fn table(checks: &[Check]) -> String {
    let mut s = String::new();
    let _ = writeln!(s, "{:<30} {:>12} {:>10}  {:<6} detail", "property", "value", "tolerance", "result");
    for c in checks {
        let _ = writeln!(
            s,
            "{:<30} {:>12.3e} {:>10.1e}  {:<6} {}",
            c.name,
            c.value,
            c.tolerance,
            if c.passed { "pass" } else { "FAIL" },
            c.detail
        );
    }
    s
}

/// Runs the property suite and writes `verify.json` and `verify.txt`.
pub fn cmd_verify(cfg: &Config, src: &Source, out: &Path) -> CliResult<Outcome> {
    let plant = plant_spec(cfg, src, "verify")?;
    let obs = observer_spec(cfg, src, "verify")?;
    let design = homodyne(&obs, src)?;
    let vc = cfg.verify.clone().unwrap_or_default();
    let tol = vc.tolerance;
    let c_p = cfg.plant.as_ref().expect("validated above").c_p;
    let beta = cfg.observer.as_ref().expect("validated above").beta;

    let mut checks = Vec::new();
    let sys = system_under_test(&obs, vc.system.as_ref(), src)?;
    checks.push(realizability("realizability", &sys, tol));
    let aug = observer::build_augmented(&plant, &obs).as_quadrature_system();
    checks.push(realizability("realizability (closed loop)", &aug, tol));

    let grid = observer::default_frequency_grid();
    checks.push(Check::at_most(
        "all-pass",
        observer::max_all_pass_residual(&obs, &grid),
        tol,
        format!("{} frequencies", grid.len()),
    ));

    let ke = ((design.k * design.e)[0] - 1.0).abs();
    checks.push(Check::at_most("K e = 1", ke, TIGHT, String::new()));
    let gap = optimality_gap(design.e, design.k, vc.competitors, vc.seed);
    checks.push(Check::at_most(
        "K minimal norm",
        gap.max(0.0),
        TIGHT,
        format!("{} competitors, best margin {:.3e}", vc.competitors, -gap),
    ));

    let closed = observer::steady_state_mean(&obs, 1.0).map_err(|e| src.invalid("observer", e))?;
    let forcing = Matrix2::new(0.0, 1.0, -1.0, 0.0) * obs.beta() * 2.0;
    let solved = obs.drift().lu().solve(&(-forcing)).expect("A_o is invertible for kappa > 0");
    checks.push(Check::at_most(
        "steady-state mean",
        (closed - solved).amax() / (1.0 + solved.amax()),
        TIGHT,
        "closed form vs linear solve".into(),
    ));

    let certificate = observer::zp_invariance_certificate(&plant, &obs);
    let path = zp_path_drift(&plant, &obs, &vc, c_p)?;
    checks.push(Check::at_most(
        "z_p invariance",
        certificate.max(path),
        tol,
        format!("certificate {certificate:.3e}, simulated drift {path:.3e}"),
    ));

    checks.push(tradeoff(beta, &vc.kappa_sweep, src)?);

    let passed = checks.iter().all(|c| c.passed);
    let text = table(&checks);
    ensure_dir(out)?;
    let doc = VerifyOutput {
        schema_version: SCHEMA_VERSION,
        command: "verify",
        passed,
        checks: &checks,
    };
    let files = vec![
        write_json(&out.join("verify.json"), &doc)?,
        write_text(&out.join("verify.txt"), &text)?,
    ];
    Ok(Outcome {
        files,
        summary: text,
        failed: checks.iter().filter(|c| !c.passed).map(|c| c.name.clone()).collect(),
    })
}
