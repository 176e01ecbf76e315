//! Damped Newton refinement of impact phases.

use nalgebra::{Matrix2, Vector2};
use serde::{Deserialize, Serialize};

use super::equations::ImpactEquations;
use crate::error::{Error, Result};

/// Converged impact times and phases.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "camelCase")]
pub struct ImpactTimes {
    pub tau: f64,
    pub tau_prime: f64,
    pub o_n: f64,
    pub o_prime: f64,
    /// `μ = τ/τ'`.
    pub mu: f64,
    pub residual: [f64; 2],
    pub iterations: usize,
}

impl ImpactTimes {
    pub fn from_phases(eq: &ImpactEquations, o_n: f64, o_prime: f64) -> Result<Self> {
        let (tau, tau_prime) = eq.times(o_n, o_prime);
        Ok(ImpactTimes {
            tau,
            tau_prime,
            o_n,
            o_prime,
            mu: tau / tau_prime,
            residual: eq.determinants(o_n, o_prime)?,
            iterations: 0,
        })
    }

    pub fn residual_norm(&self) -> f64 {
        self.residual[0].abs().max(self.residual[1].abs())
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "camelCase")]
pub struct NewtonOptions {
    pub residual_tol: f64,
    pub step_tol: f64,
    pub max_iterations: usize,
    /// Finite-difference step in phase units.
    pub fd_step: f64,
    /// Largest Newton step, in phase units.
    pub max_step: f64,
    /// Relative mode amplitude below which a root is attributed to a zero of
    /// `ġ` or `g'` rather than to the impact equations.
    pub pole_tol: f64,
}

impl Default for NewtonOptions {
    fn default() -> Self {
        NewtonOptions {
            residual_tol: 1e-11,
            step_tol: 1e-12,
            max_iterations: 100,
            fd_step: 1e-6,
            max_step: 0.25,
            pole_tol: 1e-6,
        }
    }
}

fn norm(r: &[f64; 2]) -> f64 {
    r[0].abs().max(r[1].abs())
}

fn jacobian(eq: &ImpactEquations, o: Vector2<f64>, h: f64) -> Result<Matrix2<f64>> {
    let mut j = Matrix2::zeros();
    for k in 0..2 {
        let mut plus = o;
        let mut minus = o;
        plus[k] += h;
        minus[k] -= h;
        let rp = eq.determinants(plus[0], plus[1])?;
        let rm = eq.determinants(minus[0], minus[1])?;
        for r in 0..2 {
            j[(r, k)] = (rp[r] - rm[r]) / (2.0 * h);
        }
    }
    Ok(j)
}

/// Refines a seed `(o_N, o')` to a root of both normalized determinants.
///
/// Each step solves the finite-difference Newton system, caps its length,
/// and halves it until the residual decreases. The iteration stops when the
/// residual is below `residual_tol` and the step is below `step_tol` (relative
/// to the phase magnitude), or when the residual is below tolerance and no
/// step can reduce it further.
pub fn solve_impact(eq: &ImpactEquations, seed: (f64, f64), opts: &NewtonOptions) -> Result<ImpactTimes> {
    let mut o = Vector2::new(seed.0, seed.1);
    if !(o[0] > 0.0 && o[1] > 0.0) {
        return Err(Error::LeftQuadrant {
            o_n: o[0],
            o_prime: o[1],
        });
    }
    let mut r = eq.determinants(o[0], o[1])?;
    let mut iterations = 0;
    loop {
        let j = jacobian(eq, o, opts.fd_step)?;
        let rv = Vector2::new(r[0], r[1]);
        let Some(step) = j.lu().solve(&-rv) else {
            if norm(&r) < opts.residual_tol {
                break;
            }
            return Err(Error::NoConvergence {
                iterations,
                residual: norm(&r),
            });
        };
        let scale = o.amax().max(1.0);
        if norm(&r) < opts.residual_tol && step.amax() < opts.step_tol * scale {
            break;
        }
        if iterations == opts.max_iterations {
            return Err(Error::NoConvergence {
                iterations,
                residual: norm(&r),
            });
        }
        let mut step = step;
        if step.amax() > opts.max_step {
            step *= opts.max_step / step.amax();
        }
        let mut accepted = None;
        let mut alpha = 1.0;
        for _ in 0..40 {
            let trial = o + step * alpha;
            if !(trial[0] > 0.0 && trial[1] > 0.0) {
                alpha *= 0.5;
                continue;
            }
            let rt = eq.determinants(trial[0], trial[1])?;
            if norm(&rt) < norm(&r) {
                accepted = Some((trial, rt));
                break;
            }
            alpha *= 0.5;
        }
        iterations += 1;
        match accepted {
            Some((trial, rt)) => {
                o = trial;
                r = rt;
            }
            None if norm(&r) < opts.residual_tol => break,
            None => {
                let trial = o + step;
                if !(trial[0] > 0.0 && trial[1] > 0.0) {
                    return Err(Error::LeftQuadrant {
                        o_n: trial[0],
                        o_prime: trial[1],
                    });
                }
                return Err(Error::NoConvergence {
                    iterations,
                    residual: norm(&r),
                });
            }
        }
    }
    let modes = {
        let (tau, tau_prime) = eq.times(o[0], o[1]);
        eq.modes(tau, tau_prime)?
    };
    let gd_rel = modes.free.min_relative_gd(&eq.spectra().lambda);
    let gp_rel = modes.constrained.min_relative_g(&eq.spectra().lambda_prime);
    if gd_rel < opts.pole_tol || gp_rel < opts.pole_tol {
        return Err(Error::PoleCrossing {
            o_n: o[0],
            o_prime: o[1],
        });
    }
    let mut times = ImpactTimes::from_phases(eq, o[0], o[1])?;
    times.residual = r;
    times.iterations = iterations;
    Ok(times)
}
