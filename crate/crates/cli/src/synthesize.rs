use std::fmt::Write as _;
use std::path::Path;

use num_complex::Complex;
use serde::Serialize;

use qobserver_core::ndpa::{self, ComplexForms, SynthesisInput, SynthesisResult};
use qobserver_core::qls::RealizabilityReport;
use qobserver_core::Error;

use crate::config::{Config, NdpaConfig, Source};
use crate::error::{CliError, CliResult};
use crate::output::{ensure_dir, write_json, Outcome, SCHEMA_VERSION};

#[derive(Serialize)]
struct Residuals {
    modulus: f64,
    rank: f64,
    factor: f64,
    structure: f64,
    symmetry: f64,
    drift_elimination: f64,
}

#[derive(Serialize)]
struct SynthesisOutput<'a> {
    schema_version: &'static str,
    command: &'static str,
    inputs: &'a NdpaConfig,
    theta: f64,
    f_theta: f64,
    linearization_ratio: f64,
    gamma1: f64,
    gamma2: f64,
    /// `[re, im]`
    delta: [f64; 2],
    #[serde(rename = "R")]
    r: [[f64; 4]; 4],
    #[serde(rename = "R_c")]
    r_c: [[f64; 2]; 2],
    alpha: [f64; 2],
    beta: [f64; 2],
    e: [f64; 2],
    #[serde(rename = "K")]
    k: [f64; 2],
    noise_intensity: f64,
    /// Complex `e`/`K` forms and their reconciliation with the canonical pair; `ω_o = 0` only.
    complex_forms: Option<ComplexForms<f64>>,
    residuals: Residuals,
    realizability: RealizabilityReport<f64>,
    warnings: &'a [String],
}

fn c2(z: Complex<f64>) -> [f64; 2] {
    [z.re, z.im]
}

impl<'a> SynthesisOutput<'a> {
    fn new(inputs: &'a NdpaConfig, s: &'a SynthesisResult<f64>) -> Self {
        let p = &s.params;
        let mut r = [[0.0; 4]; 4];
        for (i, row) in r.iter_mut().enumerate() {
            for (j, v) in row.iter_mut().enumerate() {
                *v = s.r[(i, j)];
            }
        }
        Self {
            schema_version: SCHEMA_VERSION,
            command: "synthesize",
            inputs,
            theta: p.theta,
            f_theta: ndpa::f_theta(p.theta),
            linearization_ratio: p.linearization_ratio(),
            gamma1: p.gamma1(),
            gamma2: p.gamma2(),
            delta: c2(s.delta),
            r,
            r_c: [[s.r_c[(0, 0)], s.r_c[(0, 1)]], [s.r_c[(1, 0)], s.r_c[(1, 1)]]],
            alpha: [s.alpha[0], s.alpha[1]],
            beta: [s.beta[0], s.beta[1]],
            e: [s.e[0], s.e[1]],
            k: [s.k[0], s.k[1]],
            noise_intensity: s.noise_intensity,
            complex_forms: s.complex_forms,
            residuals: Residuals {
                modulus: s.modulus_residual,
                rank: s.rank_residual,
                factor: s.factor_residual,
                structure: s.structure_residual,
                symmetry: s.symmetry_residual,
                drift_elimination: s.drift_elimination_residual,
            },
            realizability: s.realizability,
            warnings: &s.warnings,
        }
    }
}

fn map_error(e: Error, src: &Source) -> CliError {
    match e {
        Error::ZeroSqueezing => src.invalid("ndpa.epsilon", e),
        Error::NonPositive(name) => src.invalid(&format!("ndpa.{name}"), e),
        Error::NegativeDetuning(_) => src.invalid("ndpa.omega_o", e),
        Error::SingularBeamsplitter => src.invalid("ndpa.theta", e),
        Error::RankCondition { .. }
        | Error::ZeroCoupling
        | Error::Unobservable
        | Error::NotDoubledUp { .. }
        | Error::ImaginaryResidue { .. } => CliError::Infeasible(e.to_string()),
        e => src.invalid("ndpa", e),
    }
}

/// Writes `synthesis.json` for the configured NDPA parameters.
pub fn cmd_synthesize(cfg: &Config, src: &Source, out: &Path) -> CliResult<Outcome> {
    let n = cfg.ndpa.as_ref().ok_or_else(|| src.missing("ndpa", "synthesize"))?;
    let input = SynthesisInput {
        epsilon: Complex::new(n.epsilon[0], n.epsilon[1]),
        phi: n.phi,
        kappa1: n.kappa1,
        kappa2: n.kappa2,
        kappa3: n.kappa3,
        omega_o: n.omega_o,
        theta: n.theta,
    };
    let s = ndpa::synthesize(&input).map_err(|e| map_error(e, src))?;

    ensure_dir(out)?;
    let doc = SynthesisOutput::new(n, &s);
    let files = vec![write_json(&out.join("synthesis.json"), &doc)?];

    let mut summary = String::new();
    let _ = writeln!(summary, "theta      = {:.15}", doc.theta);
    let _ = writeln!(summary, "delta      = {:.12} {:+.12}i", s.delta.re, s.delta.im);
    let _ = writeln!(summary, "alpha      = [{:.12}, {:.12}]", doc.alpha[0], doc.alpha[1]);
    let _ = writeln!(summary, "beta       = [{:.12}, {:.12}]", doc.beta[0], doc.beta[1]);
    let _ = writeln!(summary, "K          = [{:.12}, {:.12}]", doc.k[0], doc.k[1]);
    if let Some(cf) = &s.complex_forms {
        let _ = writeln!(summary, "reconciliation factor = {:.12}", cf.reconciliation_factor);
    }
    for w in &s.warnings {
        let _ = writeln!(summary, "warning: {w}");
    }
    Ok(Outcome {
        files,
        summary,
        failed: Vec::new(),
    })
}
