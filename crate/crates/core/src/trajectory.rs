//! The half-cycle of a collisionless solution from the unconstrained symmetry
//! point P to the constrained symmetry point P', and its physical checks.

use std::fmt::Write as _;
use std::path::Path;

use nalgebra::DVector;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::impact::{ImpactSolution, ModeVectors};
use crate::model::ModelSpec;
use crate::serde_mat;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Phase {
    Unconstrained,
    Constrained,
}

impl Phase {
    pub fn name(self) -> &'static str {
        match self {
            Phase::Unconstrained => "unconstrained",
            Phase::Constrained => "constrained",
        }
    }
}

type StateField = fn(&Sample) -> &DVector<f64>;

/// State of the system at one instant.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "camelCase")]
pub struct Sample {
    /// Time measured from P.
    pub t: f64,
    pub phase: Phase,
    #[serde(with = "serde_mat::vector")]
    pub x: DVector<f64>,
    #[serde(with = "serde_mat::vector")]
    pub xdot: DVector<f64>,
    #[serde(with = "serde_mat::vector")]
    pub xddot: DVector<f64>,
    pub energy: f64,
    /// `F_N = (m ẍ + k x)_N`, present in the constrained phase only.
    pub constraint_force: Option<f64>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "camelCase")]
pub struct Trajectory {
    pub model: String,
    pub samples: Vec<Sample>,
    /// Time of the impact.
    pub tau_mark: f64,
    pub solution: ImpactSolution,
}

/// Position, velocity and acceleration from the mode weights.
struct State {
    x: DVector<f64>,
    xdot: DVector<f64>,
    xddot: DVector<f64>,
}

fn unconstrained_state(sol: &ImpactSolution, t: f64) -> Result<State> {
    let sd = &sol.spectral;
    let modes = ModeVectors::eval(t, &sd.lambda, &sd.sigma)?;
    let x = &sd.mode_matrix;
    Ok(State {
        x: x * sol.q.component_mul(&modes.g),
        xdot: x * sol.q.component_mul(&modes.gd),
        xddot: x * sol.q.component_mul(&modes.gdd(&sd.lambda)),
    })
}

/// Constrained state at time `s` measured from P'; the stance spans `s ∈ [−τ', τ']`.
fn constrained_state(sol: &ImpactSolution, s: f64) -> Result<State> {
    let sd = &sol.spectral;
    let modes = ModeVectors::eval(s, &sd.lambda_prime, &sd.sigma_prime)?;
    let xp = &sd.mode_matrix_prime;
    Ok(State {
        x: xp * sol.q_prime.component_mul(&modes.g) + &sd.static_offset,
        xdot: xp * sol.q_prime.component_mul(&modes.gd),
        xddot: xp * sol.q_prime.component_mul(&modes.gdd(&sd.lambda_prime)),
    })
}

fn contact_force(model: &ModelSpec, st: &State) -> f64 {
    let n = model.n();
    (model.mass.row(n - 1) * &st.xddot)[(0, 0)] + (model.stiffness.row(n - 1) * &st.x)[(0, 0)]
}

/// `½ẋᵀmẋ + ½xᵀkx`, minus `(x_N − x⁰_N)F⁰_N` in the constrained phase.
fn energy(model: &ModelSpec, x0_n: f64, phase: Phase, st: &State) -> f64 {
    let kinetic = 0.5 * st.xdot.dot(&(&model.mass * &st.xdot));
    let potential = 0.5 * st.x.dot(&(&model.stiffness * &st.x));
    let work = match phase {
        Phase::Unconstrained => 0.0,
        Phase::Constrained => {
            let n = st.x.len();
            (st.x[n - 1] - x0_n) * model.static_force
        }
    };
    kinetic + potential - work
}

fn check_dims(model: &ModelSpec, sol: &ImpactSolution) -> Result<()> {
    let n = sol.spectral.n();
    if model.n() != n || sol.q.len() != n || sol.q_prime.len() != n - 1 {
        return Err(Error::Mismatch(format!(
            "model has {} degrees of freedom, solution has {}",
            model.n(),
            n
        )));
    }
    Ok(())
}

/// Samples the trajectory on `[0, τ]` (unconstrained, `samples_per_phase + 1`
/// points) and `(τ, τ + τ']` (constrained, `samples_per_phase` points).
pub fn synthesize(model: &ModelSpec, solution: &ImpactSolution, samples_per_phase: usize) -> Result<Trajectory> {
    if samples_per_phase == 0 {
        return Err(Error::invalid("samples_per_phase", "must be at least 1"));
    }
    check_dims(model, solution)?;
    let (tau, tau_p) = (solution.times.tau, solution.times.tau_prime);
    let x0_n = solution.spectral.static_offset[model.n() - 1];
    let s = samples_per_phase as f64;
    let mut samples = Vec::with_capacity(2 * samples_per_phase + 1);
    for k in 0..=samples_per_phase {
        let t = tau * k as f64 / s;
        let st = unconstrained_state(solution, t)?;
        samples.push(Sample {
            t,
            phase: Phase::Unconstrained,
            energy: energy(model, x0_n, Phase::Unconstrained, &st),
            x: st.x,
            xdot: st.xdot,
            xddot: st.xddot,
            constraint_force: None,
        });
    }
    for k in 1..=samples_per_phase {
        let local = tau_p * k as f64 / s;
        let st = constrained_state(solution, local - tau_p)?;
        samples.push(Sample {
            t: tau + local,
            phase: Phase::Constrained,
            energy: energy(model, x0_n, Phase::Constrained, &st),
            constraint_force: Some(contact_force(model, &st)),
            x: st.x,
            xdot: st.xdot,
            xddot: st.xddot,
        });
    }
    Ok(Trajectory {
        model: model.name.clone(),
        samples,
        tau_mark: tau,
        solution: solution.clone(),
    })
}

/// Thresholds for [`validate`]. Residuals are relative to the largest
/// sampled magnitude of the corresponding quantity.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "camelCase")]
pub struct Tolerances {
    pub impact: f64,
    pub continuity: f64,
    pub energy: f64,
    pub penetration: f64,
    pub contact_force: f64,
}

impl Default for Tolerances {
    fn default() -> Self {
        Tolerances {
            impact: 1e-8,
            continuity: 1e-10,
            energy: 1e-9,
            penetration: 1e-9,
            contact_force: 1e-9,
        }
    }
}

impl Tolerances {
    /// Every threshold set to `tol`.
    pub fn uniform(tol: f64) -> Self {
        Tolerances {
            impact: tol,
            continuity: tol,
            energy: tol,
            penetration: tol,
            contact_force: tol,
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "camelCase")]
pub struct ValidationReport {
    pub impact_velocity_residual: f64,
    pub impact_accel_residual: f64,
    pub continuity_residual: f64,
    /// `(max E − min E)` over the samples, relative to the energy scale.
    pub energy_variation: f64,
    /// Smallest `contactSign·(x_N − x⁰_N)` over the unconstrained phase
    /// `[−τ, τ]`, relative to the position scale.
    pub penetration_violation: f64,
    /// Smallest `contactSign·F_N` over the constrained phase `[−τ', τ']`,
    /// relative to the force scale.
    pub contact_force_violation: f64,
    pub tolerances: Tolerances,
    pub passed: bool,
}

fn max_abs<'a>(it: impl Iterator<Item = &'a DVector<f64>>) -> f64 {
    it.map(|v| v.amax()).fold(0.0, f64::max)
}

fn scale(v: f64) -> f64 {
    if v > 0.0 {
        v
    } else {
        1.0
    }
}

/// Checks the impact conditions, continuity at the impact, energy
/// conservation, and the absence of penetration and contact loss.
pub fn validate(traj: &Trajectory, model: &ModelSpec, tol: &Tolerances) -> Result<ValidationReport> {
    let sol = &traj.solution;
    check_dims(model, sol)?;
    if traj.samples.iter().any(|s| s.x.len() != model.n()) {
        return Err(Error::Mismatch("sample dimension differs from the model".into()));
    }
    let n = model.n();
    let x0_n = sol.spectral.static_offset[n - 1];
    let x_scale = scale(max_abs(traj.samples.iter().map(|s| &s.x)));
    let v_scale = scale(max_abs(traj.samples.iter().map(|s| &s.xdot)));
    let a_scale = scale(max_abs(traj.samples.iter().map(|s| &s.xddot)));

    let before = unconstrained_state(sol, sol.times.tau)?;
    let after = constrained_state(sol, -sol.times.tau_prime)?;
    let impact_velocity_residual = before.xdot[n - 1].abs() / v_scale;
    let impact_accel_residual = before.xddot[n - 1].abs() / a_scale;
    let continuity_residual =
        ((&before.x - &after.x).amax() / x_scale).max((&before.xdot - &after.xdot).amax() / v_scale);

    let mut e_min = f64::INFINITY;
    let mut e_max = f64::NEG_INFINITY;
    let mut e_scale = 0.0f64;
    for s in &traj.samples {
        let st = State {
            x: s.x.clone(),
            xdot: s.xdot.clone(),
            xddot: s.xddot.clone(),
        };
        let e = energy(model, x0_n, s.phase, &st);
        e_min = e_min.min(e);
        e_max = e_max.max(e);
        let kinetic = 0.5 * s.xdot.dot(&(&model.mass * &s.xdot));
        let potential = 0.5 * s.x.dot(&(&model.stiffness * &s.x));
        e_scale = e_scale.max(kinetic.abs() + potential.abs());
    }
    let energy_variation = (e_max - e_min) / scale(e_scale);

    // The sampled half-cycle ends at the symmetry points; the physical phases
    // extend symmetrically to t ∈ [−τ, τ] and s ∈ [−τ', τ'].
    let sign = model.contact_sign;
    let m = 2 * traj
        .samples
        .iter()
        .filter(|s| s.phase == Phase::Unconstrained)
        .count()
        .max(2);
    let span = |half: f64| (0..=m).map(move |k| half * (2.0 * k as f64 / m as f64 - 1.0));
    let mut penetration_violation = f64::INFINITY;
    for t in span(sol.times.tau) {
        let st = unconstrained_state(sol, t)?;
        penetration_violation = penetration_violation.min(sign * (st.x[n - 1] - x0_n) / x_scale);
    }
    let forces = span(sol.times.tau_prime)
        .map(|s| constrained_state(sol, s).map(|st| contact_force(model, &st)))
        .collect::<Result<Vec<f64>>>()?;
    let f_scale = scale(forces.iter().fold(model.static_force.abs(), |a, f| a.max(f.abs())));
    let contact_force_violation = forces.iter().map(|f| sign * f / f_scale).fold(f64::INFINITY, f64::min);

    let passed = impact_velocity_residual < tol.impact
        && impact_accel_residual < tol.impact
        && continuity_residual < tol.continuity
        && energy_variation < tol.energy
        && penetration_violation >= -tol.penetration
        && contact_force_violation >= -tol.contact_force;
    Ok(ValidationReport {
        impact_velocity_residual,
        impact_accel_residual,
        continuity_residual,
        energy_variation,
        penetration_violation,
        contact_force_violation,
        tolerances: *tol,
        passed,
    })
}

impl Trajectory {
    pub fn n(&self) -> usize {
        self.solution.spectral.n()
    }

    /// One row per sample: `t, phase, x1..xN, xd1..xdN, xdd1..xddN, energy,
    /// constraint_force` (the force is empty in the unconstrained phase).
    pub fn to_csv(&self) -> String {
        let n = self.n();
        let mut out = String::from("t,phase");
        for prefix in ["x", "xd", "xdd"] {
            for i in 1..=n {
                let _ = write!(out, ",{prefix}{i}");
            }
        }
        out.push_str(",energy,constraint_force\n");
        for s in &self.samples {
            let _ = write!(out, "{},{}", s.t, s.phase.name());
            for v in s.x.iter().chain(s.xdot.iter()).chain(s.xddot.iter()) {
                let _ = write!(out, ",{v}");
            }
            let _ = write!(out, ",{},", s.energy);
            if let Some(f) = s.constraint_force {
                let _ = write!(out, "{f}");
            }
            out.push('\n');
        }
        out
    }

    pub fn to_json(&self) -> Result<String> {
        Ok(serde_json::to_string_pretty(self)?)
    }

    pub fn from_json(text: &str) -> Result<Self> {
        Ok(serde_json::from_str(text)?)
    }

    pub fn load(path: impl AsRef<Path>) -> Result<Self> {
        Self::from_json(&std::fs::read_to_string(path)?)
    }

    /// Three stacked panels for `x`, `ẋ` and `ẍ`, one coloured line per
    /// coordinate, with the impact marked by a dashed vertical line.
    pub fn to_svg(&self) -> String {
        const COLOURS: [&str; 6] = ["#1f4e9c", "#c0392b", "#2e8b3a", "#8e44ad", "#d68910", "#17202a"];
        const DASHES: [&str; 3] = ["", "6 3", "2 2"];
        let n = self.n();
        let (width, panel, margin, gap) = (800.0, 180.0, 50.0, 30.0);
        let t_end = self.samples.last().map_or(1.0, |s| s.t).max(f64::MIN_POSITIVE);
        let sx = |t: f64| margin + t / t_end * width;
        let height = 3.0 * panel + 2.0 * gap + 2.0 * margin;
        let mut svg = String::new();
        let _ = writeln!(
            svg,
            r#"<svg xmlns="http://www.w3.org/2000/svg" width="{w}" height="{height}" viewBox="0 0 {w} {height}">"#,
            w = width + 2.0 * margin
        );
        let _ = writeln!(svg, r#"<rect width="100%" height="100%" fill="white"/>"#);
        let panels: [(&str, StateField); 3] = [("x", |s| &s.x), ("xdot", |s| &s.xdot), ("xddot", |s| &s.xddot)];
        for (p, (label, get)) in panels.iter().enumerate() {
            let top = margin + p as f64 * (panel + gap);
            let (lo, hi) = self
                .samples
                .iter()
                .flat_map(|s| get(s).iter().copied())
                .fold((f64::INFINITY, f64::NEG_INFINITY), |(lo, hi), v| (lo.min(v), hi.max(v)));
            let span = if hi > lo { hi - lo } else { 1.0 };
            let sy = |v: f64| top + panel - (v - lo) / span * panel;
            let _ = writeln!(
                svg,
                r#"<rect x="{margin}" y="{top}" width="{width}" height="{panel}" fill="none" stroke="black"/>"#
            );
            let _ = writeln!(
                svg,
                r#"<text x="{}" y="{}" font-size="13">{label}</text>"#,
                margin + 6.0,
                top + 16.0
            );
            for i in 0..n {
                let pts: Vec<String> = self
                    .samples
                    .iter()
                    .map(|s| format!("{:.2},{:.2}", sx(s.t), sy(get(s)[i])))
                    .collect();
                let _ = writeln!(
                    svg,
                    r#"<polyline fill="none" stroke="{}" stroke-width="1.3" stroke-dasharray="{}" points="{}"/>"#,
                    COLOURS[i % COLOURS.len()],
                    DASHES[p],
                    pts.join(" ")
                );
            }
        }
        let xi = sx(self.tau_mark);
        let _ = writeln!(
            svg,
            r#"<line x1="{xi:.2}" y1="{margin}" x2="{xi:.2}" y2="{}" stroke="gray" stroke-dasharray="4 4"/>"#,
            height - margin
        );
        let _ = writeln!(
            svg,
            r#"<text x="{}" y="{}" font-size="14" text-anchor="middle">t</text>"#,
            margin + width / 2.0,
            height - 12.0
        );
        svg.push_str("</svg>\n");
        svg
    }
}
