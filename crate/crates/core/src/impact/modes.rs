//! Time dependence of a single normal mode.
//!
//! A mode with eigenvalue λ evolves as `g(t)` with `g̈ = −λ g`. Symmetric
//! (even) modes start from rest at the symmetry point, antisymmetric (odd)
//! modes start from zero displacement.

use nalgebra::DVector;

use crate::error::{Error, Result};
use crate::model::Symmetry;

/// Value and first derivative of a mode's time dependence.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct ModeValue {
    pub g: f64,
    pub gd: f64,
}

/// `g(t)` and `ġ(t)` for eigenvalue `lambda`.
///
/// | λ   | even        | odd         |
/// |-----|-------------|-------------|
/// | > 0 | cos(ωt)     | sin(ωt)     |
/// | < 0 | cosh(νt)    | sinh(νt)    |
pub fn g_eval(t: f64, lambda: f64, symmetry: Symmetry) -> Result<ModeValue> {
    if lambda == 0.0 {
        return Err(Error::ZeroMode { index: 0 });
    }
    let w = lambda.abs().sqrt();
    let x = w * t;
    let (g, gd) = match (lambda > 0.0, symmetry) {
        (true, Symmetry::Even) => (x.cos(), -w * x.sin()),
        (true, Symmetry::Odd) => (x.sin(), w * x.cos()),
        (false, Symmetry::Even) => (x.cosh(), w * x.sinh()),
        (false, Symmetry::Odd) => (x.sinh(), w * x.cosh()),
    };
    Ok(ModeValue { g, gd })
}

/// Second derivative, `g̈ = −λ g`.
pub fn g_ddot(t: f64, lambda: f64, symmetry: Symmetry) -> Result<f64> {
    Ok(-lambda * g_eval(t, lambda, symmetry)?.g)
}

/// Distance of the phase `ωτ` from the nearest pole of `w`, in radians.
///
/// Only trigonometric modes have poles: odd multiples of π/2 for odd modes
/// and multiples of π for even modes.
fn pole_distance(phase: f64, symmetry: Symmetry) -> f64 {
    use std::f64::consts::{FRAC_PI_2, PI};
    let shifted = match symmetry {
        Symmetry::Even => phase,
        Symmetry::Odd => phase - FRAC_PI_2,
    };
    let r = shifted.rem_euclid(PI);
    r.min(PI - r)
}

/// Phase distance under which `w` is reported as a pole.
pub const POLE_TOL: f64 = 1e-12;

/// `w = λ g/ġ = σ tan^σ(ωτ) ω` for λ > 0 and `−tanh^σ(ντ) ν` for λ < 0.
pub fn w_eval(tau: f64, lambda: f64, symmetry: Symmetry) -> Result<f64> {
    if lambda == 0.0 {
        return Err(Error::ZeroMode { index: 0 });
    }
    let w = lambda.abs().sqrt();
    let x = w * tau;
    if lambda > 0.0 {
        let distance = pole_distance(x, symmetry);
        if distance < POLE_TOL {
            return Err(Error::Pole { phase: x, distance });
        }
        Ok(match symmetry {
            Symmetry::Even => -w / x.tan(),
            Symmetry::Odd => w * x.tan(),
        })
    } else {
        if symmetry == Symmetry::Even && x.abs() < POLE_TOL {
            return Err(Error::Pole {
                phase: x,
                distance: x.abs(),
            });
        }
        Ok(match symmetry {
            Symmetry::Even => -w / x.tanh(),
            Symmetry::Odd => -w * x.tanh(),
        })
    }
}

/// `w` including the λ = 0 limit: `−1/τ` for even modes and `0` for odd ones.
pub fn w_eval_with_zero(tau: f64, lambda: f64, symmetry: Symmetry) -> Result<f64> {
    if lambda != 0.0 {
        return w_eval(tau, lambda, symmetry);
    }
    match symmetry {
        Symmetry::Even if tau == 0.0 => Err(Error::Pole {
            phase: 0.0,
            distance: 0.0,
        }),
        Symmetry::Even => Ok(-1.0 / tau),
        Symmetry::Odd => Ok(0.0),
    }
}

/// Values of all modes of a spectrum at time `t`.
#[derive(Clone, Debug, PartialEq)]
pub struct ModeVectors {
    pub g: DVector<f64>,
    pub gd: DVector<f64>,
}

impl ModeVectors {
    pub fn eval(t: f64, lambda: &DVector<f64>, symmetry: &[Symmetry]) -> Result<Self> {
        let n = lambda.len();
        let mut g = DVector::zeros(n);
        let mut gd = DVector::zeros(n);
        for i in 0..n {
            let v = g_eval(t, lambda[i], symmetry[i]).map_err(|e| match e {
                Error::ZeroMode { .. } => Error::ZeroMode { index: i },
                other => other,
            })?;
            g[i] = v.g;
            gd[i] = v.gd;
        }
        Ok(ModeVectors { g, gd })
    }

    /// `g̈ = −λ∘g`.
    pub fn gdd(&self, lambda: &DVector<f64>) -> DVector<f64> {
        -lambda.component_mul(&self.g)
    }

    /// Smallest of `|ġ_i| / hypot(ω_i g_i, ġ_i)` over all modes.
    ///
    /// For oscillating modes this is `|sin|` of the phase distance to the
    /// nearest zero of `ġ`, so it measures how close `g/ġ` is to a pole.
    pub fn min_relative_gd(&self, lambda: &DVector<f64>) -> f64 {
        (0..self.g.len())
            .map(|i| {
                let w = lambda[i].abs().sqrt();
                let h = (w * self.g[i]).hypot(self.gd[i]);
                if h == 0.0 {
                    0.0
                } else {
                    self.gd[i].abs() / h
                }
            })
            .fold(f64::INFINITY, f64::min)
    }

    /// Smallest of `|g_i| / hypot(g_i, ġ_i/ω_i)` over all modes.
    pub fn min_relative_g(&self, lambda: &DVector<f64>) -> f64 {
        (0..self.g.len())
            .map(|i| {
                let w = lambda[i].abs().sqrt();
                let h = self.g[i].hypot(self.gd[i] / w);
                if h == 0.0 {
                    0.0
                } else {
                    self.g[i].abs() / h
                }
            })
            .fold(f64::INFINITY, f64::min)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;
    use std::f64::consts::PI;

    #[test]
    fn cosine_at_zero() {
        let v = g_eval(0.0, 3.0, Symmetry::Even).unwrap();
        assert_eq!((v.g, v.gd), (1.0, 0.0));
    }

    #[test]
    fn hyperbolic_sine() {
        for t in [0.1, 0.7, 2.5] {
            let v = g_eval(t, -1.0, Symmetry::Odd).unwrap();
            assert_eq!(v.g, f64::sinh(t));
            assert_eq!(v.gd, f64::cosh(t));
        }
    }

    #[test]
    fn oscillator_equation_holds() {
        let mut rng = ChaCha8Rng::seed_from_u64(7);
        for _ in 0..100 {
            let t: f64 = rng.random_range(-3.0..3.0);
            let lambda: f64 = rng.random_range(-4.0..4.0);
            let sym = if rng.random_bool(0.5) {
                Symmetry::Even
            } else {
                Symmetry::Odd
            };
            let h = 1e-4;
            let gp = g_eval(t + h, lambda, sym).unwrap().g;
            let g0 = g_eval(t, lambda, sym).unwrap().g;
            let gm = g_eval(t - h, lambda, sym).unwrap().g;
            let fd = (gp - 2.0 * g0 + gm) / (h * h);
            let exact = g_ddot(t, lambda, sym).unwrap();
            assert!((fd - exact).abs() < 1e-5 * (1.0 + exact.abs()), "{fd} vs {exact}");
            let dfd = (gp - gm) / (2.0 * h);
            let gd = g_eval(t, lambda, sym).unwrap().gd;
            assert!((dfd - gd).abs() < 1e-6 * (1.0 + gd.abs()));
        }
    }

    #[test]
    fn time_reversal_parity() {
        for lambda in [2.0, -0.5] {
            let t = 0.83;
            let e = (
                g_eval(t, lambda, Symmetry::Even).unwrap(),
                g_eval(-t, lambda, Symmetry::Even).unwrap(),
            );
            assert_eq!(e.0.g, e.1.g);
            let o = (
                g_eval(t, lambda, Symmetry::Odd).unwrap(),
                g_eval(-t, lambda, Symmetry::Odd).unwrap(),
            );
            assert_eq!(o.0.g, -o.1.g);
        }
    }

    #[test]
    fn w_even_oscillator() {
        let w = w_eval(PI / 8.0, 4.0, Symmetry::Even).unwrap();
        assert!((w + 2.0).abs() < 1e-14);
    }

    #[test]
    fn w_matches_lambda_g_over_gdot() {
        for (lambda, sym) in [
            (2.3, Symmetry::Even),
            (2.3, Symmetry::Odd),
            (-0.7, Symmetry::Even),
            (-0.7, Symmetry::Odd),
        ] {
            let t = 0.61;
            let v = g_eval(t, lambda, sym).unwrap();
            let w = w_eval(t, lambda, sym).unwrap();
            assert!((w - lambda * v.g / v.gd).abs() < 1e-13);
        }
    }

    #[test]
    fn w_unstable_odd_saturates() {
        let w = w_eval(40.0, -1.0, Symmetry::Odd).unwrap();
        assert!((w + 1.0).abs() < 1e-15);
    }

    #[test]
    fn w_zero_mode_limits() {
        let tau = 0.9;
        let even = w_eval_with_zero(tau, 0.0, Symmetry::Even).unwrap();
        assert_eq!(even, -1.0 / tau);
        let near = w_eval(tau, 1e-10, Symmetry::Even).unwrap();
        assert!((near - even).abs() < 1e-8);
        assert_eq!(w_eval_with_zero(tau, 0.0, Symmetry::Odd).unwrap(), 0.0);
        assert!(w_eval(tau, 1e-10, Symmetry::Odd).unwrap().abs() < 1e-9);
    }

    #[test]
    fn poles_are_reported() {
        assert!(matches!(w_eval(PI, 1.0, Symmetry::Even), Err(Error::Pole { .. })));
        assert!(matches!(w_eval(PI / 2.0, 1.0, Symmetry::Odd), Err(Error::Pole { .. })));
        assert!(matches!(w_eval(0.0, -1.0, Symmetry::Even), Err(Error::Pole { .. })));
        assert!(w_eval(PI / 2.0, 1.0, Symmetry::Even).is_ok());
        assert!(matches!(g_eval(1.0, 0.0, Symmetry::Even), Err(Error::ZeroMode { .. })));
    }
}
