//! Reference values for the unit armed biped (all parameters 1, lengths in
//! units of θ) and a diff of the full pipeline against them.

use std::fmt::Write as _;
use std::time::Instant;

use nalgebra::{DMatrix, DVector};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::impact::{find_roots, scan_contour, solution_at, GridSpec, ImpactEquations, NewtonOptions, RootFilter};
use crate::model::{build_armed_biped, ArmedBipedParams};
use crate::spectral::analyze;

/// Reference values, as printed (five significant figures).
#[derive(Clone, Debug, PartialEq)]
pub struct Fixtures {
    pub lambda: Vec<f64>,
    pub lambda_prime: Vec<f64>,
    pub cauchy: Vec<f64>,
    pub modes: Vec<f64>,
    pub modes_prime: Vec<f64>,
    pub norm_const: f64,
    pub tau: f64,
    pub tau_prime: f64,
    pub q: Vec<f64>,
    pub q_prime: Vec<f64>,
}

#[allow(clippy::approx_constant)]
impl Default for Fixtures {
    fn default() -> Self {
        Fixtures {
            lambda: vec![-5.85028, -0.67319, 1.52348],
            lambda_prime: vec![-1.4142, 1.4142],
            cauchy: vec![-0.22542, -0.13766, 1.34949, -0.47906, 0.34040, 9.15225],
            modes: vec![
                -2.3698, 2.2804, 9.4927, //
                -9.3017, 3.0480, 2.2617, //
                6.5268, 2.6199, 1.0,
            ],
            modes_prime: vec![14.780, 86.146, 25.232, 25.232, 0.0, 0.0],
            norm_const: 0.019816,
            tau: 3.0795,
            tau_prime: 0.77785,
            q: vec![-0.000031265, -0.034423, 1.1687],
            q_prime: vec![-0.0087462, 0.1357027],
        }
    }
}

impl Fixtures {
    /// Every value multiplied by `1 + factor`.
    pub fn perturbed(&self, factor: f64) -> Self {
        let s = 1.0 + factor;
        let v = |x: &[f64]| x.iter().map(|a| a * s).collect::<Vec<_>>();
        Fixtures {
            lambda: v(&self.lambda),
            lambda_prime: v(&self.lambda_prime),
            cauchy: v(&self.cauchy),
            modes: v(&self.modes),
            modes_prime: v(&self.modes_prime),
            norm_const: self.norm_const * s,
            tau: self.tau * s,
            tau_prime: self.tau_prime * s,
            q: v(&self.q),
            q_prime: v(&self.q_prime),
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum ToleranceKind {
    Absolute,
    Relative,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "camelCase")]
pub struct ReproduceRow {
    pub quantity: String,
    pub computed: Vec<f64>,
    pub expected: Vec<f64>,
    /// Largest entrywise deviation, measured as `kind` prescribes.
    pub deviation: f64,
    pub tolerance: f64,
    pub kind: ToleranceKind,
    pub passed: bool,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "camelCase")]
pub struct ReproduceReport {
    pub target: String,
    pub rows: Vec<ReproduceRow>,
    pub passed: bool,
    pub wall_time_seconds: f64,
}

fn row(quantity: &str, computed: Vec<f64>, expected: &[f64], tolerance: f64, kind: ToleranceKind) -> ReproduceRow {
    let deviation = computed
        .iter()
        .zip(expected)
        .map(|(c, e)| match kind {
            ToleranceKind::Absolute => (c - e).abs(),
            ToleranceKind::Relative => (c - e).abs() / e.abs(),
        })
        .fold(0.0, f64::max);
    let passed = computed.len() == expected.len() && deviation <= tolerance;
    ReproduceRow {
        quantity: quantity.into(),
        computed,
        expected: expected.to_vec(),
        deviation,
        tolerance,
        kind,
        passed,
    }
}

fn row_major(m: &DMatrix<f64>) -> Vec<f64> {
    m.transpose().as_slice().to_vec()
}

fn vec_of(v: &DVector<f64>) -> Vec<f64> {
    v.as_slice().to_vec()
}

/// Runs spectral analysis, the default contour scan, Newton refinement and
/// the weight solve for the unit armed biped and compares the lowest-row
/// root with `fixtures`.
pub fn reproduce_reference(fixtures: &Fixtures) -> Result<ReproduceReport> {
    use ToleranceKind::{Absolute, Relative};
    let start = Instant::now();
    let model = build_armed_biped(ArmedBipedParams::default())?;
    let sd = analyze(&model)?;
    let eq = ImpactEquations::new(sd.spectrum_pair())?;
    let field = scan_contour(&eq, &GridSpec::default())?;
    let roots = find_roots(&eq, &field, &NewtonOptions::default(), &RootFilter::default());
    let times = *roots.lowest_row().ok_or(Error::NoConvergence {
        iterations: 0,
        residual: f64::NAN,
    })?;
    let sol = solution_at(&sd, &eq, times)?;
    let rows = vec![
        row("lambda", vec_of(&sd.lambda), &fixtures.lambda, 1e-4, Absolute),
        row(
            "lambda'",
            vec_of(&sd.lambda_prime),
            &fixtures.lambda_prime,
            1e-4,
            Absolute,
        ),
        row("M", row_major(&eq.cauchy().m), &fixtures.cauchy, 1e-4, Absolute),
        row("X", row_major(&sd.mode_matrix), &fixtures.modes, 1e-3, Absolute),
        row(
            "X'",
            row_major(&sd.mode_matrix_prime),
            &fixtures.modes_prime,
            1e-3,
            Absolute,
        ),
        row("c", vec![sd.norm_const], &[fixtures.norm_const], 1e-5, Absolute),
        row("tau", vec![times.tau], &[fixtures.tau], 5e-4, Absolute),
        row("tau'", vec![times.tau_prime], &[fixtures.tau_prime], 5e-5, Absolute),
        row("q", vec_of(&sol.q), &fixtures.q, 1e-4, Relative),
        row("q'", vec_of(&sol.q_prime), &fixtures.q_prime, 1e-4, Relative),
    ];
    Ok(ReproduceReport {
        target: "appendix-e".into(),
        passed: rows.iter().all(|r| r.passed),
        rows,
        wall_time_seconds: start.elapsed().as_secs_f64(),
    })
}

impl ReproduceReport {
    pub fn to_table(&self) -> String {
        let mut out = format!(
            "{:<9} {:>12} {:>10} {:>9}  result\n",
            "quantity", "deviation", "tolerance", "kind"
        );
        for r in &self.rows {
            let kind = match r.kind {
                ToleranceKind::Absolute => "abs",
                ToleranceKind::Relative => "rel",
            };
            let _ = writeln!(
                out,
                "{:<9} {:>12.3e} {:>10.1e} {:>9}  {}",
                r.quantity,
                r.deviation,
                r.tolerance,
                kind,
                if r.passed { "pass" } else { "FAIL" }
            );
        }
        let _ = writeln!(
            out,
            "{} ({:.2} s)",
            if self.passed {
                "all quantities match"
            } else {
                "mismatch"
            },
            self.wall_time_seconds
        );
        out
    }
}
