//! The impact equations of a spectrum pair.
//!
//! Everything here depends on the spectra and the symmetry signatures only.
//! The solver works in the phase coordinates `o_N = |ω_N| τ` and
//! `o' = |ω'_{N−1}| τ'`; conversion to times happens at the boundary.

use nalgebra::{DMatrix, DVector};

use super::modes::{w_eval, ModeVectors};
use crate::cauchy::CauchyData;
use crate::error::{Error, Result};
use crate::linalg;
use crate::model::SpectrumPair;

/// Mode values entering the impact matrices: the unconstrained modes at `τ`
/// and the constrained modes at `−τ'`.
#[derive(Clone, Debug)]
pub struct ImpactModes {
    pub free: ModeVectors,
    pub constrained: ModeVectors,
}

#[derive(Clone, Debug)]
pub struct ImpactEquations {
    spectra: SpectrumPair,
    cauchy: CauchyData,
    eta_sum: f64,
    omega_n: f64,
    omega_prime: f64,
}

impl ImpactEquations {
    pub fn new(spectra: SpectrumPair) -> Result<Self> {
        if let Some(index) = spectra.lambda.iter().position(|l| *l == 0.0) {
            return Err(Error::ZeroMode { index });
        }
        if let Some(j) = spectra.lambda_prime.iter().position(|l| *l == 0.0) {
            return Err(Error::ZeroMode { index: j });
        }
        let cauchy = CauchyData::new(&spectra.lambda, &spectra.lambda_prime)?;
        let eta_sum = cauchy.eta_sum();
        let n = spectra.n();
        Ok(ImpactEquations {
            omega_n: spectra.lambda[n - 1].abs().sqrt(),
            omega_prime: spectra.lambda_prime[n - 2].abs().sqrt(),
            spectra,
            cauchy,
            eta_sum,
        })
    }

    pub fn spectra(&self) -> &SpectrumPair {
        &self.spectra
    }

    pub fn cauchy(&self) -> &CauchyData {
        &self.cauchy
    }

    pub fn eta_sum(&self) -> f64 {
        self.eta_sum
    }

    pub fn n(&self) -> usize {
        self.spectra.n()
    }

    /// `(|ω_N|, |ω'_{N−1}|)`.
    pub fn frequencies(&self) -> (f64, f64) {
        (self.omega_n, self.omega_prime)
    }

    pub fn times(&self, o_n: f64, o_prime: f64) -> (f64, f64) {
        (o_n / self.omega_n, o_prime / self.omega_prime)
    }

    pub fn phases(&self, tau: f64, tau_prime: f64) -> (f64, f64) {
        (tau * self.omega_n, tau_prime * self.omega_prime)
    }

    pub fn modes(&self, tau: f64, tau_prime: f64) -> Result<ImpactModes> {
        Ok(ImpactModes {
            free: ModeVectors::eval(tau, &self.spectra.lambda, &self.spectra.sigma)?,
            constrained: ModeVectors::eval(-tau_prime, &self.spectra.lambda_prime, &self.spectra.sigma_prime)?,
        })
    }

    /// `G_ij = −(w_i/λ_i)/(w'_j/λ'_j)`.
    pub fn g_matrix(&self, tau: f64, tau_prime: f64) -> Result<DMatrix<f64>> {
        let s = &self.spectra;
        let n = s.n();
        let a: Vec<f64> = (0..n)
            .map(|i| Ok(w_eval(tau, s.lambda[i], s.sigma[i])? / s.lambda[i]))
            .collect::<Result<_>>()?;
        let b: Vec<f64> = (0..n - 1)
            .map(|j| Ok(w_eval(tau_prime, s.lambda_prime[j], s.sigma_prime[j])? / s.lambda_prime[j]))
            .collect::<Result<_>>()?;
        if let Some(j) = b.iter().position(|v| *v == 0.0) {
            return Err(Error::Pole {
                phase: tau_prime * s.lambda_prime[j].abs().sqrt(),
                distance: 0.0,
            });
        }
        Ok(DMatrix::from_fn(n, n - 1, |i, j| -a[i] / b[j]))
    }

    /// `U = M − G∘M`.
    pub fn u_matrix(&self, tau: f64, tau_prime: f64) -> Result<DMatrix<f64>> {
        let g = self.g_matrix(tau, tau_prime)?;
        let m = &self.cauchy.m;
        Ok(m - linalg::hadamard(&g, m))
    }

    /// `B = [[U, 1/λ], [ηᵀ𝟙 𝟙ᵀ]]`, of size (N+1)×N.
    pub fn b_matrix(&self, tau: f64, tau_prime: f64) -> Result<DMatrix<f64>> {
        let n = self.n();
        let u = self.u_matrix(tau, tau_prime)?;
        let lambda = &self.spectra.lambda;
        Ok(DMatrix::from_fn(n + 1, n, |i, j| match (i < n, j < n - 1) {
            (true, true) => u[(i, j)],
            (true, false) => 1.0 / lambda[i],
            (false, _) => self.eta_sum,
        }))
    }

    /// The pole-free form `B̌ = diag(ġ, 1) · B · diag(g'(−τ'), 1)`, built
    /// directly so it stays finite for every `(τ, τ')`.
    pub fn b_check_from_modes(&self, modes: &ImpactModes) -> DMatrix<f64> {
        let n = self.n();
        let (g, gd) = (&modes.free.g, &modes.free.gd);
        let (gp, gpd) = (&modes.constrained.g, &modes.constrained.gd);
        let m = &self.cauchy.m;
        let lambda = &self.spectra.lambda;
        DMatrix::from_fn(n + 1, n, |i, j| match (i < n, j < n - 1) {
            (true, true) => (gd[i] * gp[j] - g[i] * gpd[j]) * m[(i, j)],
            (true, false) => gd[i] / lambda[i],
            (false, true) => self.eta_sum * gp[j],
            (false, false) => self.eta_sum,
        })
    }

    pub fn b_check(&self, tau: f64, tau_prime: f64) -> Result<DMatrix<f64>> {
        Ok(self.b_check_from_modes(&self.modes(tau, tau_prime)?))
    }

    /// Determinants of `B̌` with row N, respectively row N+1, removed, after
    /// scaling the columns of `B̌` and then the rows of each minor to unit norm.
    /// Both scalings are positive, so signs and zero sets are those of `B̌`.
    pub fn determinants_at_times(&self, tau: f64, tau_prime: f64) -> Result<[f64; 2]> {
        let b = self.b_check(tau, tau_prime)?;
        if b.iter().any(|v| !v.is_finite()) {
            return Err(Error::Overflow { tau, tau_prime });
        }
        let b = linalg::normalize_columns(&b);
        let n = self.n();
        Ok([
            linalg::row_normalized_det(&linalg::without_row(&b, n - 1)),
            linalg::row_normalized_det(&linalg::without_row(&b, n)),
        ])
    }

    /// The impact-equation residual in phase coordinates.
    pub fn determinants(&self, o_n: f64, o_prime: f64) -> Result<[f64; 2]> {
        let (tau, tau_prime) = self.times(o_n, o_prime);
        self.determinants_at_times(tau, tau_prime)
    }

    /// `φ = det B̌_(N) · det B̌_(N+1)`.
    pub fn phi(&self, o_n: f64, o_prime: f64) -> Result<f64> {
        let [a, b] = self.determinants(o_n, o_prime)?;
        Ok(a * b)
    }

    /// The bracketed form of the impact equations,
    /// `[λ_N U_N; ηᵀ𝟙 𝟙̄ᵀ] Ū⁻¹ (1/λ̄) − [1; ηᵀ𝟙]`, or `None` where `Ū` is singular.
    pub fn reduced_residual(&self, tau: f64, tau_prime: f64) -> Result<Option<[f64; 2]>> {
        let n = self.n();
        let u = self.u_matrix(tau, tau_prime)?;
        let u_bar = linalg::without_row(&u, n - 1);
        let inv_lambda_bar = DVector::from_fn(n - 1, |i, _| 1.0 / self.spectra.lambda[i]);
        let Some(y) = u_bar.lu().solve(&inv_lambda_bar) else {
            return Ok(None);
        };
        let lambda_n = self.spectra.lambda[n - 1];
        let first = lambda_n * (u.row(n - 1) * &y)[(0, 0)] - 1.0;
        let second = self.eta_sum * y.sum() - self.eta_sum;
        Ok(Some([first, second]))
    }
}
