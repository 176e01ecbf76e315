//! Closed-form impact phases for two degrees of freedom.
//!
//! With N = 2 the impact equations reduce to `w₁ = w₂ = −w'₁`. Writing the
//! impact phases as `o₂ = ω₂τ` and `o'₁ = ω'₁τ'`, every family is solved by a
//! root of `tan y = a tanh(b y)` on one branch `[(n−1)π, nπ)` followed by an
//! arctangent for the constrained phase.

use std::f64::consts::{FRAC_PI_2, PI};

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::impact::w_eval_with_zero;
use crate::model::{N2Family, SpectrumPair};

/// Subintervals scanned per branch before bisection.
const SCAN: usize = 256;

/// `sin y − a tanh(by) cos y`: vanishes exactly where `tan y = a tanh(by)`
/// and, unlike the tangent form, has no poles.
fn branch_fn(a: f64, b: f64, y: f64) -> f64 {
    y.sin() - a * (b * y).tanh() * y.cos()
}

fn branch_deriv(a: f64, b: f64, y: f64) -> f64 {
    let t = (b * y).tanh();
    y.cos() - a * b * (1.0 - t * t) * y.cos() + a * t * y.sin()
}

/// First root of `f` in the open interval `(lo, hi)`, located by a sign
/// change on a uniform scan and refined by bisection to machine precision.
/// `f_lo` replaces `f(lo)` so callers can pass a limit value.
fn first_root(f: impl Fn(f64) -> f64, lo: f64, hi: f64, f_lo: f64) -> Option<f64> {
    let h = (hi - lo) / SCAN as f64;
    let (mut a, mut fa) = (lo, f_lo);
    for k in 1..=SCAN {
        let b = if k == SCAN { hi } else { lo + k as f64 * h };
        let fb = f(b);
        if fb == 0.0 && k < SCAN {
            return Some(b);
        }
        if fa != 0.0 && fb != 0.0 && (fa < 0.0) != (fb < 0.0) {
            let (mut l, mut r, mut fl) = (a, b, fa);
            loop {
                let m = 0.5 * (l + r);
                if m <= l || m >= r {
                    return Some(m);
                }
                let fm = f(m);
                if fm == 0.0 {
                    return Some(m);
                }
                if (fm < 0.0) == (fl < 0.0) {
                    l = m;
                    fl = fm;
                } else {
                    r = m;
                }
            }
        }
        a = b;
        fa = fb;
    }
    None
}

fn polish(f: impl Fn(f64) -> f64, df: impl Fn(f64) -> f64, mut y: f64, lo: f64, hi: f64) -> f64 {
    for _ in 0..3 {
        let d = df(y);
        if d == 0.0 {
            break;
        }
        let next = y - f(y) / d;
        if !(next >= lo && next < hi) || f(next).abs() > f(y).abs() {
            break;
        }
        if next == y {
            break;
        }
        y = next;
    }
    y
}

/// Root of `tan y = a tanh(b y)` in `[(n−1)π, nπ)`.
///
/// On the first branch the trivial root `y = 0` is skipped unless it is the
/// only solution of the degenerate equation `tan y = 0`.
pub fn y_root(a: f64, b: f64, n: usize) -> Result<f64> {
    if n == 0 || !a.is_finite() || !b.is_finite() {
        return Err(Error::invalid(
            "n",
            format!("branch index must be >= 1 with finite a, b (n={n}, a={a}, b={b})"),
        ));
    }
    let lo = (n - 1) as f64 * PI;
    let hi = n as f64 * PI;
    if a == 0.0 || b == 0.0 {
        return Ok(lo);
    }
    let no_root = Error::NoRoot { a, b, n };
    if n == 1 {
        // y = 0 always solves the equation; divide it out to expose positive roots
        let g = |y: f64| branch_fn(a, b, y) / y;
        let y = first_root(g, 0.0, hi, 1.0 - a * b).ok_or(no_root)?;
        return Ok(polish(|y| branch_fn(a, b, y), |y| branch_deriv(a, b, y), y, 0.0, hi));
    }
    let f = |y: f64| branch_fn(a, b, y);
    let y = first_root(f, lo, hi, f(lo)).ok_or(no_root)?;
    Ok(polish(f, |y| branch_deriv(a, b, y), y, lo, hi))
}

/// `α_n`: root of `tan y = y` in `[(n−1)π, nπ)`, the `ρ → 0⁺` limit of `γ_n(ρ)`.
///
/// The first branch holds only the trivial root, so `n = 1` is an error and
/// the lowest hopping solution has `n = 2`.
pub fn hopper_alpha(n: usize) -> Result<f64> {
    if n <= 1 {
        return Err(Error::NoRoot {
            a: f64::INFINITY,
            b: 0.0,
            n,
        });
    }
    let lo = (n - 1) as f64 * PI;
    let hi = n as f64 * PI;
    let f = |y: f64| y.sin() - y * y.cos();
    let df = |y: f64| y * y.sin();
    let y = first_root(f, lo, hi, f(lo)).ok_or(Error::NoRoot {
        a: f64::INFINITY,
        b: 0.0,
        n,
    })?;
    Ok(polish(f, df, y, lo, hi))
}

/// `β_n(ρ) = y_n(−ρ, ρ)`.
pub fn beta(rho: f64, n: usize) -> Result<f64> {
    y_root(-rho, rho, n)
}

/// `γ_n(ρ) = y_n(1/ρ, ρ)`.
pub fn gamma(rho: f64, n: usize) -> Result<f64> {
    if rho <= 0.0 {
        return Err(Error::invalid("rho", format!("must be positive, got {rho}")));
    }
    y_root(1.0 / rho, rho, n)
}

/// Impact phases of one branch of an N = 2 family.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "camelCase")]
pub struct N2Solution {
    pub family: N2Family,
    pub n: usize,
    pub o2: f64,
    pub o_prime1: f64,
    pub tau: f64,
    pub tau_prime: f64,
    pub mu: f64,
}

impl N2Solution {
    fn new(family: N2Family, n: usize, omega2: f64, omega_prime1: f64, o2: f64, o_prime1: f64) -> Self {
        let tau = o2 / omega2;
        let tau_prime = o_prime1 / omega_prime1;
        N2Solution {
            family,
            n,
            o2,
            o_prime1,
            tau,
            tau_prime,
            mu: tau / tau_prime,
        }
    }
}

fn positive(name: &'static str, v: f64) -> Result<()> {
    if v > 0.0 && v.is_finite() {
        Ok(())
    } else {
        Err(Error::invalid(name, format!("must be positive and finite, got {v}")))
    }
}

/// Hopping: `o₂ = α_n`, `o'₁ = π − arctan(α_n ω'₁/ω₂)`.
pub fn solve_hopper(omega2: f64, omega_prime1: f64, n: usize) -> Result<N2Solution> {
    positive("omega2", omega2)?;
    positive("omega_prime1", omega_prime1)?;
    let alpha = hopper_alpha(n)?;
    let op = PI - (alpha * omega_prime1 / omega2).atan();
    Ok(N2Solution::new(N2Family::Hopper, n, omega2, omega_prime1, alpha, op))
}

/// Juggling shares the hopping impact equations and therefore its phases.
pub fn solve_juggler(omega2: f64, omega_prime1: f64, n: usize) -> Result<N2Solution> {
    let mut s = solve_hopper(omega2, omega_prime1, n)?;
    s.family = N2Family::Juggler;
    Ok(s)
}

/// Extended rimless wheel: `o₂ = β_n(ν₁/ω₂)`, `o'₁ = −arctan((ω₂/ω'₁) tan β_n)`.
pub fn solve_rimless(nu1: f64, omega2: f64, omega_prime1: f64, n: usize) -> Result<N2Solution> {
    positive("nu1", nu1)?;
    positive("omega2", omega2)?;
    positive("omega_prime1", omega_prime1)?;
    let b = beta(nu1 / omega2, n)?;
    let mut op = -((omega2 / omega_prime1) * b.tan()).atan();
    if op <= 0.0 {
        op += PI;
    }
    Ok(N2Solution::new(N2Family::Rimless, n, omega2, omega_prime1, b, op))
}

/// Coronal rocking: `o₂ = γ_n(ν₁/ω₂)`, `o'₁ = arctan((ω₂/ω'₁) cot γ_n)`.
pub fn solve_rocker(nu1: f64, omega2: f64, omega_prime1: f64, n: usize) -> Result<N2Solution> {
    positive("nu1", nu1)?;
    positive("omega2", omega2)?;
    positive("omega_prime1", omega_prime1)?;
    let g = gamma(nu1 / omega2, n)?;
    let mut op = ((omega2 / omega_prime1) / g.tan()).atan();
    if op <= 0.0 {
        op += PI;
    }
    Ok(N2Solution::new(N2Family::Rocker, n, omega2, omega_prime1, g, op))
}

/// Dispatches on the family using the raw spectra `λ = [λ₁; λ₂]`, `λ' = [λ'₁]`.
pub fn solve_family(family: N2Family, spectra: &SpectrumPair, n: usize) -> Result<N2Solution> {
    if spectra.n() != 2 {
        return Err(Error::Dimension(format!(
            "closed forms need N = 2, got {}",
            spectra.n()
        )));
    }
    let (l1, l2, lp) = (spectra.lambda[0], spectra.lambda[1], spectra.lambda_prime[0]);
    if l2 <= 0.0 || lp <= 0.0 {
        return Err(Error::invalid(
            "lambda",
            "closed forms need lambda2 > 0 and lambda'1 > 0",
        ));
    }
    let (omega2, omega_p) = (l2.sqrt(), lp.sqrt());
    match family {
        N2Family::Hopper | N2Family::Juggler => {
            if l1 != 0.0 {
                return Err(Error::invalid("lambda1", "hopping and juggling need lambda1 = 0"));
            }
            if family == N2Family::Hopper {
                solve_hopper(omega2, omega_p, n)
            } else {
                solve_juggler(omega2, omega_p, n)
            }
        }
        N2Family::Rimless | N2Family::Rocker => {
            if l1 >= 0.0 {
                return Err(Error::invalid("lambda1", "rimless wheel and rocker need lambda1 < 0"));
            }
            let nu1 = (-l1).sqrt();
            if family == N2Family::Rimless {
                solve_rimless(nu1, omega2, omega_p, n)
            } else {
                solve_rocker(nu1, omega2, omega_p, n)
            }
        }
    }
}

/// Residuals of `w₁ = w₂` and `w₂ = −w'₁` at the given phases, each divided
/// by the largest magnitude involved (at least `ω₂`).
pub fn residuals(spectra: &SpectrumPair, o2: f64, o_prime1: f64) -> Result<[f64; 2]> {
    let s = spectra;
    let omega2 = s.lambda[1].abs().sqrt();
    let omega_p = s.lambda_prime[0].abs().sqrt();
    let tau = o2 / omega2;
    let tau_prime = o_prime1 / omega_p;
    let w1 = w_eval_with_zero(tau, s.lambda[0], s.sigma[0])?;
    let w2 = w_eval_with_zero(tau, s.lambda[1], s.sigma[1])?;
    let wp = w_eval_with_zero(tau_prime, s.lambda_prime[0], s.sigma_prime[0])?;
    let scale = w1.abs().max(w2.abs()).max(wp.abs()).max(omega2);
    Ok([(w1 - w2) / scale, (w2 + wp) / scale])
}

/// Large-`n` limit of the constrained phase.
pub fn asymptotic_o_prime(family: N2Family, nu1: f64, omega2: f64, omega_prime1: f64, n: usize) -> f64 {
    match family {
        N2Family::Hopper | N2Family::Juggler => {
            let q = (n as f64 - 0.5) * PI;
            FRAC_PI_2 + (omega2 / omega_prime1) / (q - 1.0 / q)
        }
        N2Family::Rimless | N2Family::Rocker => (nu1 / omega_prime1).atan(),
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::model::{n2_spectrum, N2Params};

    #[test]
    fn degenerate_equation_gives_branch_start() {
        for n in 1..5 {
            assert_eq!(y_root(0.0, 2.0, n).unwrap(), (n - 1) as f64 * PI);
        }
    }

    #[test]
    fn alpha_two() {
        let a = hopper_alpha(2).unwrap();
        assert!((a - 4.4934095).abs() < 1e-7);
        assert!((a / a.tan() - 1.0).abs() < 1e-13);
        assert!(hopper_alpha(1).is_err());
    }

    #[test]
    fn gamma_tends_to_alpha() {
        let g = gamma(1e-4, 2).unwrap();
        assert!((g - hopper_alpha(2).unwrap()).abs() < 1e-6);
    }

    #[test]
    fn rocker_first_branch_is_empty() {
        assert!(matches!(gamma(0.8, 1), Err(Error::NoRoot { .. })));
    }

    #[test]
    fn beta_asymptote() {
        let rho: f64 = 0.7;
        for n in [5usize, 10, 20] {
            let b = beta(rho, n).unwrap();
            let limit = n as f64 * PI - rho.atan();
            assert!((b - limit).abs() < 10.0 * (-2.0 * PI * n as f64 * rho).exp() + 1e-12);
        }
    }

    #[test]
    fn gamma_asymptote() {
        let rho: f64 = 0.9;
        let n = 12;
        let g = gamma(rho, n).unwrap();
        assert!((g - ((n - 1) as f64 * PI + (1.0 / rho).atan())).abs() < 1e-12);
    }

    #[test]
    fn hopper_equal_frequencies() {
        let s = solve_hopper(1.3, 1.3, 2).unwrap();
        assert!((s.o_prime1 - (PI - 4.4934095f64.atan())).abs() < 1e-7);
        let j = solve_juggler(1.3, 1.3, 2).unwrap();
        assert_eq!((s.o2, s.o_prime1), (j.o2, j.o_prime1));
    }

    #[test]
    fn hopper_large_n() {
        let s = solve_hopper(2.0, 1.0, 60).unwrap();
        let approx = asymptotic_o_prime(N2Family::Hopper, 0.0, 2.0, 1.0, 60);
        assert!((s.o_prime1 - approx).abs() < 1e-5);
    }

    #[test]
    fn rimless_limits() {
        let s = solve_rimless(1e-4, 1.0, 1.0, 3).unwrap();
        assert!((s.o2 - 3.0 * PI).abs() < 1e-6);
        assert!(s.o_prime1 > 0.0 && s.o_prime1 < 1e-6);
        let far = solve_rimless(0.8, 1.5, 1.1, 40).unwrap();
        assert!((far.o_prime1 - (0.8f64 / 1.1).atan()).abs() < 1e-12);
    }

    #[test]
    fn rocker_limit() {
        let far = solve_rocker(0.8, 1.5, 1.1, 40).unwrap();
        assert!((far.o_prime1 - (0.8f64 / 1.1).atan()).abs() < 1e-12);
    }

    #[test]
    fn closed_forms_satisfy_impact_equations() {
        let (nu, w2, wp) = (0.9, 2.0, 1.2);
        for n in 1..6 {
            let spectra = n2_spectrum(N2Family::Rimless, N2Params::unstable(nu, w2, wp)).unwrap();
            let s = solve_rimless(nu, w2, wp, n).unwrap();
            let r = residuals(&spectra, s.o2, s.o_prime1).unwrap();
            assert!(r[0].abs() < 1e-12 && r[1].abs() < 1e-12, "rimless {n}: {r:?}");
        }
        for n in 2..6 {
            let spectra = n2_spectrum(N2Family::Rocker, N2Params::unstable(nu, w2, wp)).unwrap();
            let s = solve_rocker(nu, w2, wp, n).unwrap();
            let r = residuals(&spectra, s.o2, s.o_prime1).unwrap();
            assert!(r[0].abs() < 1e-12 && r[1].abs() < 1e-12, "rocker {n}: {r:?}");
            let spectra = n2_spectrum(N2Family::Hopper, N2Params::hopper(w2, wp)).unwrap();
            let s = solve_hopper(w2, wp, n).unwrap();
            let r = residuals(&spectra, s.o2, s.o_prime1).unwrap();
            assert!(r[0].abs() < 1e-12 && r[1].abs() < 1e-12, "hopper {n}: {r:?}");
        }
    }
}
