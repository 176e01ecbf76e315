//! Behaviour of the impact equations as the top constrained eigenvalue
//! `λ'_{N−1}` approaches zero from above.
//!
//! In that limit `τ' → ∞` while `w'_{N−1} → c₀`, every hyperbolic constrained
//! mode saturates (`w'_j → −ν'_j`), and the impact equations decouple into a
//! scalar equation for `τ` and an expression for `c₀`.

use std::f64::consts::PI;

use nalgebra::{DMatrix, DVector, Matrix2};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::cauchy;
use crate::error::{Error, Result};
use crate::impact::{g_eval, w_eval};
use crate::linalg;
use crate::model::{SpectrumPair, Symmetry};

/// Solutions exist only when the constrained phase keeps an oscillating mode.
pub fn existence_gate(lambda_prime: &DVector<f64>) -> bool {
    lambda_prime.as_slice().last().is_some_and(|&v| v > 0.0)
}

/// Spectra with `λ'_{N−1}` replaced by its zero limit.
#[derive(Clone, Debug)]
pub struct CriticalSystem {
    spectra: SpectrumPair,
    m: DMatrix<f64>,
    eta_sum: f64,
    /// `ν'_j = √(−λ'_j)` for `j < N−1`, and 0 for the critical mode.
    nu_prime: DVector<f64>,
}

/// Row vectors that make up `K` at one `τ`: with `w_N` factored out,
/// `K = [a + w_N b; e]` and `K̃ = [r, r w_N; 0, 0]` where `r = −det Ū/λ_N²`.
#[derive(Clone, Copy, Debug)]
struct KParts {
    a: [f64; 2],
    b: [f64; 2],
    e: [f64; 2],
    r: f64,
}

impl KParts {
    fn k(&self, w_n: f64) -> Matrix2<f64> {
        Matrix2::new(
            self.a[0] + w_n * self.b[0],
            self.a[1] + w_n * self.b[1],
            self.e[0],
            self.e[1],
        )
    }

    /// `det(K + K̃) = α + w_N β`.
    fn affine_det(&self) -> (f64, f64) {
        let (a, b, e, r) = (self.a, self.b, self.e, self.r);
        (
            a[0] * e[1] - a[1] * e[0] + r * e[1],
            b[0] * e[1] - b[1] * e[0] - r * e[0],
        )
    }

    fn c0(&self) -> f64 {
        -self.e[1] / self.e[0]
    }
}

/// One root of `det(K + K̃) = 0`.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "camelCase")]
pub struct CriticalRoot {
    pub tau: f64,
    pub o_n: f64,
    pub w_n: f64,
    pub c0: f64,
}

impl CriticalSystem {
    /// Builds the limit system from spectra whose `λ'_{N−1}` is set to zero.
    /// Interlacing then forces `λ_i < 0` for `i < N` and `λ'_j < 0` for `j < N−1`.
    pub fn new(spectra: &SpectrumPair) -> Result<Self> {
        let spectra = spectra.with_top_constrained(0.0)?;
        let n = spectra.n();
        let m = cauchy::cauchy_matrix(&spectra.lambda, &spectra.lambda_prime)?;
        let eta_sum = cauchy::eta(&spectra.lambda, &spectra.lambda_prime)?.sum();
        let nu_prime = DVector::from_fn(n - 1, |j, _| (-spectra.lambda_prime[j]).max(0.0).sqrt());
        Ok(CriticalSystem {
            spectra,
            m,
            eta_sum,
            nu_prime,
        })
    }

    pub fn spectra(&self) -> &SpectrumPair {
        &self.spectra
    }

    pub fn n(&self) -> usize {
        self.spectra.n()
    }

    pub fn omega_n(&self) -> f64 {
        self.spectra.lambda[self.n() - 1].sqrt()
    }

    /// `Ū` from the unconstrained ratios `w̄`: `Ū_ij = M_ij (1 + w_i ν'_j/λ_i)`,
    /// whose last column reduces to `1/λ̄`.
    fn u_bar(&self, w_bar: &DVector<f64>) -> DMatrix<f64> {
        let n = self.n();
        let lambda = &self.spectra.lambda;
        DMatrix::from_fn(n - 1, n - 1, |i, j| {
            self.m[(i, j)] * (1.0 + w_bar[i] * self.nu_prime[j] / lambda[i])
        })
    }

    fn parts(&self, w_bar: &DVector<f64>) -> KParts {
        let n = self.n();
        let lambda = &self.spectra.lambda;
        let lambda_n = lambda[n - 1];
        let u_bar = self.u_bar(w_bar);
        let inv_sq = DVector::from_fn(n - 1, |i, _| 1.0 / (lambda[i] * lambda[i]));
        let p = linalg::scale_cols(&linalg::adjugate(&u_bar), &inv_sq);
        let right = DMatrix::from_fn(n - 1, 2, |i, k| if k == 0 { 1.0 } else { w_bar[i] });
        let pr = p * right;
        let m_n = self.m.row(n - 1).transpose();
        let row = |v: &DVector<f64>| {
            let out = v.transpose() * &pr;
            [out[(0, 0)], out[(0, 1)]]
        };
        KParts {
            a: row(&m_n),
            b: row(&(m_n.component_mul(&self.nu_prime) / lambda_n)),
            e: row(&DVector::from_element(n - 1, self.eta_sum)),
            r: -linalg::det(&u_bar) / (lambda_n * lambda_n),
        }
    }

    fn w_bar(&self, tau: f64) -> Result<DVector<f64>> {
        let n = self.n();
        let s = &self.spectra;
        (0..n - 1)
            .map(|i| w_eval(tau, s.lambda[i], s.sigma[i]))
            .collect::<Result<Vec<_>>>()
            .map(DVector::from_vec)
    }

    /// `(K, K̃)` at `τ`, with `K̃ = −[1; 0] det(Ū)/λ_N² [1, w_N]` so that the
    /// limit impact equations read `(K + K̃)[1; 1/c₀] = 0`. Neither matrix
    /// depends on `τ'`.
    pub fn k_matrices(&self, tau: f64) -> Result<(Matrix2<f64>, Matrix2<f64>)> {
        let n = self.n();
        let w_n = w_eval(tau, self.spectra.lambda[n - 1], self.spectra.sigma[n - 1])?;
        let parts = self.parts(&self.w_bar(tau)?);
        let kt = Matrix2::new(parts.r, parts.r * w_n, 0.0, 0.0);
        Ok((parts.k(w_n), kt))
    }

    /// `ġ_N(τ) det(K + K̃)`: the determinant is affine in `w_N = λ_N g_N/ġ_N`,
    /// so this product is free of the poles of `w_N`.
    pub fn scan_function(&self, tau: f64) -> Result<f64> {
        let n = self.n();
        let lambda_n = self.spectra.lambda[n - 1];
        let mode = g_eval(tau, lambda_n, self.spectra.sigma[n - 1])?;
        let (alpha, beta) = self.parts(&self.w_bar(tau)?).affine_det();
        Ok(mode.gd * alpha + lambda_n * mode.g * beta)
    }

    fn root_at(&self, tau: f64) -> Result<CriticalRoot> {
        let parts = self.parts(&self.w_bar(tau)?);
        let (alpha, beta) = parts.affine_det();
        Ok(CriticalRoot {
            tau,
            o_n: tau * self.omega_n(),
            w_n: -alpha / beta,
            c0: parts.c0(),
        })
    }

    /// All roots of `det(K + K̃) = 0` with `o_N` in `(0, o_max]`, bracketed on a
    /// grid of `steps_per_pi` points per π of `o_N` and refined by bisection.
    pub fn roots(&self, o_max: f64, steps_per_pi: usize) -> Result<Vec<CriticalRoot>> {
        let omega = self.omega_n();
        let h = PI / steps_per_pi as f64;
        let count = (o_max / h).ceil() as usize;
        let mut out = Vec::new();
        let f = |o: f64| self.scan_function(o / omega);
        let mut prev = (h, f(h)?);
        for k in 2..=count {
            let o = k as f64 * h;
            let v = f(o)?;
            if v == 0.0 {
                out.push(self.root_at(o / omega)?);
            } else if prev.1 != 0.0 && (prev.1 < 0.0) != (v < 0.0) {
                let (mut l, mut r, mut fl) = (prev.0, o, prev.1);
                loop {
                    let mid = 0.5 * (l + r);
                    if mid <= l || mid >= r {
                        break;
                    }
                    let fm = f(mid)?;
                    if fm == 0.0 {
                        l = mid;
                        r = mid;
                        break;
                    }
                    if (fm < 0.0) == (fl < 0.0) {
                        l = mid;
                        fl = fm;
                    } else {
                        r = mid;
                    }
                }
                out.push(self.root_at(0.5 * (l + r) / omega)?);
            }
            prev = (o, v);
        }
        Ok(out)
    }

    /// The lowest root of the critical equation within `o_N ≤ o_max`.
    pub fn solve(&self, o_max: f64) -> Result<CriticalRoot> {
        self.roots(o_max, 64)?.into_iter().next().ok_or(Error::NoBracket {
            tau_max: o_max / self.omega_n(),
        })
    }

    /// Large-`τ` solution of branch `n`: `(o_N, w_N, c₀)` with every
    /// hyperbolic mode saturated, `w̄ → −ν̄`.
    pub fn large_tau(&self, n: usize) -> Result<(f64, f64, f64)> {
        if n == 0 {
            return Err(Error::invalid("n", "branch index must be >= 1"));
        }
        let dim = self.n();
        let nu_bar = DVector::from_fn(dim - 1, |i, _| (-self.spectra.lambda[i]).sqrt());
        let parts = self.parts(&-nu_bar);
        let (alpha, beta) = parts.affine_det();
        let e = parts.e;
        if beta == 0.0 || e[0] == 0.0 {
            return Err(Error::invalid("spectra", "degenerate large-tau denominators"));
        }
        let w_n = -alpha / beta;
        let c0 = parts.c0();
        let sigma_n = self.spectra.sigma[dim - 1].sigma();
        let omega = self.omega_n();
        let o_n = (n as f64 - (1.0 - sigma_n) / 4.0) * PI + (w_n / omega).atan();
        Ok((o_n, w_n, c0))
    }
}

/// `o'_{N−1}` solving `w'_{N−1}(τ') = c₀` exactly on the first branch.
pub fn predicted_o_prime(c0: f64, omega_prime: f64, sigma_prime: Symmetry) -> f64 {
    match sigma_prime {
        Symmetry::Odd => (c0 / omega_prime).atan(),
        Symmetry::Even => PI / 2.0 + (c0 / omega_prime).atan(),
    }
}

/// First-order form `(3 − σ')π/4 − ω'/c₀` of [`predicted_o_prime`].
pub fn asymptotic_o_prime(c0: f64, omega_prime: f64, sigma_prime: Symmetry) -> f64 {
    (3.0 - sigma_prime.sigma()) / 4.0 * PI - omega_prime / c0
}

/// A large-`τ` grid point.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "camelCase")]
pub struct AsymptoticPoint {
    pub n: usize,
    pub o_n: f64,
    pub o_prime: f64,
    pub w_n: f64,
    pub c0: f64,
}

/// Large-`τ` solution of branch `n` for spectra near the critical point: the
/// limit system supplies `o_N` and `c₀`, and the actual `ω'_{N−1}` converts
/// `c₀` to a constrained phase.
pub fn large_tau_asymptote(n: usize, spectra: &SpectrumPair) -> Result<AsymptoticPoint> {
    let sys = CriticalSystem::new(spectra)?;
    let (o_n, w_n, c0) = sys.large_tau(n)?;
    let last = spectra.n() - 2;
    let omega_p = spectra.lambda_prime[last].max(0.0).sqrt();
    let o_prime = asymptotic_o_prime(c0, omega_p, spectra.sigma_prime[last]);
    Ok(AsymptoticPoint {
        n,
        o_n,
        o_prime,
        w_n,
        c0,
    })
}

/// Summary of a critical-region analysis.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "camelCase")]
pub struct CriticalReport {
    pub tau_critical: f64,
    pub o_n: f64,
    pub c0: f64,
    pub asymptotic_grid: Vec<AsymptoticPoint>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub sampling_summary: Option<SamplingSummary>,
}

/// Lowest critical root of `spectra` (with `λ'_{N−1}` sent to zero) and the
/// large-`τ` points of the given branches.
pub fn critical_report(
    spectra: &SpectrumPair,
    o_max: f64,
    branches: std::ops::RangeInclusive<usize>,
) -> Result<CriticalReport> {
    let sys = CriticalSystem::new(spectra)?;
    let root = sys.solve(o_max)?;
    let asymptotic_grid = branches
        .map(|n| large_tau_asymptote(n, spectra))
        .collect::<Result<_>>()?;
    Ok(CriticalReport {
        tau_critical: root.tau,
        o_n: root.o_n,
        c0: root.c0,
        asymptotic_grid,
        sampling_summary: None,
    })
}

/// Draws spectra with `λ'_{N−1} = 0`: the gaps `λ_N − λ'_{N−1}`,
/// `λ'_{N−1} − λ_{N−1}`, `λ_{N−1} − λ'_{N−2}`, … are independent
/// `Uniform(0.1, 1)` and the result is scaled so that `max |λ| = 1`.
pub fn sample_critical_spectra(
    rng: &mut impl Rng,
    n: usize,
    sigma: &[Symmetry],
    sigma_prime: &[Symmetry],
) -> Result<SpectrumPair> {
    let mut lambda = vec![0.0f64; n];
    let mut lambda_prime = vec![0.0; n - 1];
    lambda[n - 1] = rng.random_range(0.1..1.0);
    let mut level = 0.0;
    for j in (0..n - 1).rev() {
        if j < n - 2 {
            level -= rng.random_range(0.1..1.0);
            lambda_prime[j] = level;
        }
        level -= rng.random_range(0.1..1.0);
        lambda[j] = level;
    }
    let scale = lambda[n - 1].max(-lambda[0]);
    SpectrumPair::new(
        DVector::from_vec(lambda.iter().map(|v| v / scale).collect()),
        DVector::from_vec(lambda_prime.iter().map(|v| v / scale).collect()),
        sigma.to_vec(),
        sigma_prime.to_vec(),
    )
}

/// A near-critical spectrum: one draw of [`sample_critical_spectra`] with the
/// default signature, accepted once `λ_N ≥ max(0.5, 5ε)`, with `λ'_{N−1} = ε`.
pub fn sample_near_critical_spectra(seed: u64, n: usize, epsilon: f64) -> Result<SpectrumPair> {
    if !(epsilon > 0.0 && epsilon <= 0.2) {
        return Err(Error::invalid("epsilon", "must lie in (0, 0.2]"));
    }
    if n < 2 {
        return Err(Error::invalid("N", "need at least two degrees of freedom"));
    }
    let (sigma, sigma_prime) = default_study_signature(n);
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    loop {
        let s = sample_critical_spectra(&mut rng, n, &sigma, &sigma_prime)?;
        if s.lambda[n - 1] >= (5.0 * epsilon).max(0.5) {
            return s.with_top_constrained(epsilon);
        }
    }
}

/// Result of the randomized `c₀` study.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "camelCase")]
pub struct SamplingSummary {
    pub samples: usize,
    /// Samples whose critical equation had no root in the search window.
    pub failures: usize,
    /// Roots with `c₀ ≤ 0`.
    #[serde(rename = "nonPositive")]
    pub non_positive: usize,
    /// Number of critical roots examined over all samples.
    pub roots: usize,
    #[serde(rename = "minC0")]
    pub min_c0: f64,
    pub seed: u64,
    #[serde(rename = "N")]
    pub n: usize,
    /// Search window in units of `o_N`.
    #[serde(rename = "oMax")]
    pub o_max: f64,
    pub distribution: String,
}

/// Symmetry of the built-in study: every unconstrained mode even, every
/// constrained mode odd.
pub fn default_study_signature(n: usize) -> (Vec<Symmetry>, Vec<Symmetry>) {
    (vec![Symmetry::Even; n], vec![Symmetry::Odd; n - 1])
}

/// Samples `n_samples` critical spectra and records `c₀` at every root of
/// the critical equation with `o_N ≤ o_max`. Sample `i` draws from its own
/// generator (`seed`, stream `i`), so the summary does not depend on the
/// thread schedule.
pub fn c0_sampling_study(n_samples: usize, n: usize, seed: u64, o_max: f64) -> Result<SamplingSummary> {
    if n_samples == 0 {
        return Err(Error::invalid("samples", "need at least one sample"));
    }
    if n < 2 {
        return Err(Error::invalid("N", "need at least two degrees of freedom"));
    }
    let (sigma, sigma_prime) = default_study_signature(n);
    let per_sample: Vec<Option<Vec<f64>>> = (0..n_samples)
        .into_par_iter()
        .map(|i| {
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            rng.set_stream(i as u64);
            let spectra = sample_critical_spectra(&mut rng, n, &sigma, &sigma_prime).ok()?;
            let sys = CriticalSystem::new(&spectra).ok()?;
            let roots = sys.roots(o_max, 64).ok()?;
            (!roots.is_empty()).then(|| roots.iter().map(|r| r.c0).collect())
        })
        .collect();
    let failures = per_sample.iter().filter(|s| s.is_none()).count();
    let c0s: Vec<f64> = per_sample.into_iter().flatten().flatten().collect();
    Ok(SamplingSummary {
        samples: n_samples,
        failures,
        non_positive: c0s.iter().filter(|c| c.is_nan() || **c <= 0.0).count(),
        roots: c0s.len(),
        min_c0: c0s.iter().copied().fold(f64::INFINITY, f64::min),
        seed,
        n,
        o_max,
        distribution:
            "gaps ~ Uniform(0.1, 1), scaled to max|lambda| = 1, lambda'_{N-1} = 0; sigma all even, sigma' all odd"
                .into(),
    })
}
