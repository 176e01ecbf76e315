//! Normal modes of the unconstrained and constrained systems.
//!
//! `m⁻¹k` is diagonalized through the symmetric reduction `L⁻¹ k L⁻ᵀ` with
//! `m = L Lᵀ`, so the spectra are real. Columns of `X` are scaled by one
//! global constant `c` such that `c Xᵀ m X = I` and `X_{N,N} = 1`; each
//! column's sign is fixed so that its last entry is positive.

use nalgebra::{DMatrix, DVector, SymmetricEigen};
use serde::{Deserialize, Serialize};

use crate::cauchy;
use crate::error::{Error, Result};
use crate::linalg;
use crate::model::{check_interlacing, ModelSpec, SpectrumPair, Symmetry};
use crate::serde_mat;

/// Relative eigenvalue gap below which a spectrum counts as degenerate.
pub const DEGENERACY_TOL: f64 = 1e-9;
/// Relative magnitude below which an eigenvalue counts as zero.
pub const ZERO_MODE_TOL: f64 = 1e-12;

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "camelCase")]
pub struct SpectralData {
    #[serde(with = "serde_mat::vector")]
    pub lambda: DVector<f64>,
    /// X: columns are the unconstrained normal modes.
    #[serde(with = "serde_mat::matrix")]
    pub mode_matrix: DMatrix<f64>,
    /// c, the normalization constant.
    pub norm_const: f64,
    #[serde(with = "serde_mat::vector")]
    pub lambda_prime: DVector<f64>,
    /// X': N×(N−1), constrained modes embedded in the full coordinates.
    #[serde(with = "serde_mat::matrix")]
    pub mode_matrix_prime: DMatrix<f64>,
    /// x⁰ = (k⁻¹)ᴺ F⁰_N.
    #[serde(with = "serde_mat::vector")]
    pub static_offset: DVector<f64>,
    /// Column N of `k⁻¹`.
    #[serde(with = "serde_mat::vector")]
    pub stiffness_inv_column: DVector<f64>,
    pub sigma: Vec<Symmetry>,
    pub sigma_prime: Vec<Symmetry>,
}

impl SpectralData {
    pub fn n(&self) -> usize {
        self.lambda.len()
    }

    pub fn spectrum_pair(&self) -> SpectrumPair {
        SpectrumPair {
            lambda: self.lambda.clone(),
            lambda_prime: self.lambda_prime.clone(),
            sigma: self.sigma.clone(),
            sigma_prime: self.sigma_prime.clone(),
        }
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct NormalModes {
    pub lambda: DVector<f64>,
    pub x: DMatrix<f64>,
    pub c: f64,
}

/// Ascending eigenpairs of `m⁻¹k` with m-orthonormal eigenvectors.
fn generalized_symmetric_eigen(mass: &DMatrix<f64>, stiffness: &DMatrix<f64>) -> Result<(DVector<f64>, DMatrix<f64>)> {
    let chol = mass.clone().cholesky().ok_or(Error::MassNotPositiveDefinite)?;
    let l = chol.l();
    let linv_k = l
        .solve_lower_triangular(stiffness)
        .ok_or(Error::MassNotPositiveDefinite)?;
    let c = l
        .solve_lower_triangular(&linv_k.transpose())
        .ok_or(Error::MassNotPositiveDefinite)?;
    let c = (&c + c.transpose()) * 0.5;
    let eig = SymmetricEigen::new(c);
    let mut order: Vec<usize> = (0..eig.eigenvalues.len()).collect();
    order.sort_by(|&a, &b| eig.eigenvalues[a].total_cmp(&eig.eigenvalues[b]));
    let values = DVector::from_iterator(order.len(), order.iter().map(|&i| eig.eigenvalues[i]));
    let y = DMatrix::from_fn(order.len(), order.len(), |r, k| eig.eigenvectors[(r, order[k])]);
    // V = L⁻ᵀ Y, so Vᵀ m V = Yᵀ Y = I
    let v = l.tr_solve_lower_triangular(&y).ok_or(Error::MassNotPositiveDefinite)?;
    Ok((values, v))
}

fn check_nondegenerate(values: &DVector<f64>) -> Result<()> {
    let scale = linalg::max_abs_vec(values);
    for i in 1..values.len() {
        let gap = (values[i] - values[i - 1]).abs() / scale;
        if gap < DEGENERACY_TOL {
            return Err(Error::DegenerateSpectrum { i: i - 1, j: i, gap });
        }
    }
    Ok(())
}

pub fn normal_modes(model: &ModelSpec) -> Result<NormalModes> {
    let n = model.n();
    let (lambda, v) = generalized_symmetric_eigen(&model.mass, &model.stiffness)?;
    check_nondegenerate(&lambda)?;
    let scale = linalg::max_abs_vec(&lambda);
    if let Some(index) = lambda.iter().position(|l| l.abs() < ZERO_MODE_TOL * scale) {
        return Err(Error::ZeroMode { index });
    }
    let vmax = linalg::max_abs(&v);
    if v[(n - 1, n - 1)].abs() < 1e-12 * vmax {
        return Err(Error::NormalizationDegenerate { column: n - 1 });
    }
    let c = v[(n - 1, n - 1)].powi(2);
    let mut x = v / c.sqrt();
    for j in 0..n {
        let last = x[(n - 1, j)];
        let flip = if last.abs() > 1e-12 * vmax / c.sqrt() {
            last < 0.0
        } else {
            // decoupled from the contact coordinate: make the largest entry positive
            let (imax, _) =
                x.column(j).iter().enumerate().fold(
                    (0, 0.0_f64),
                    |acc, (i, v)| if v.abs() > acc.1 { (i, v.abs()) } else { acc },
                );
            x[(imax, j)] < 0.0
        };
        if flip {
            x.column_mut(j).neg_mut();
        }
    }
    x[(n - 1, n - 1)] = 1.0;
    Ok(NormalModes { lambda, x, c })
}

/// Spectrum of the system with the last coordinate held fixed, checked for
/// interlacing against the unconstrained `lambda`.
pub fn constrained_spectrum(model: &ModelSpec, lambda: &DVector<f64>) -> Result<DVector<f64>> {
    let n = model.n();
    let m = linalg::without_row_col(&model.mass, n - 1, n - 1);
    let k = linalg::without_row_col(&model.stiffness, n - 1, n - 1);
    let (lp, _) = generalized_symmetric_eigen(&m, &k)?;
    if lp.len() > 1 {
        check_nondegenerate(&lp)?;
    }
    check_interlacing(lambda.as_slice(), lp.as_slice())?;
    Ok(lp)
}

/// `X' = X·X_N M`: column j of `X` scaled by `X_{N,j}`, times the Cauchy matrix.
/// The contact row `(X_N·X_N)ᵀ M` vanishes identically and is stored as exact zeros.
pub fn constrained_modes(x: &DMatrix<f64>, m: &DMatrix<f64>) -> DMatrix<f64> {
    let n = x.nrows();
    let last = x.row(n - 1).transpose();
    let mut xp = linalg::scale_cols(x, &last) * m;
    xp.row_mut(n - 1).fill(0.0);
    xp
}

pub fn static_offset(model: &ModelSpec) -> Result<DVector<f64>> {
    Ok(stiffness_inv_last(model)? * model.static_force)
}

fn stiffness_inv_last(model: &ModelSpec) -> Result<DVector<f64>> {
    let n = model.n();
    let mut e = DVector::zeros(n);
    e[n - 1] = 1.0;
    let kdet = linalg::row_normalized_det(&model.stiffness);
    if kdet.abs() < 1e-12 {
        return Err(Error::SingularStiffness(kdet));
    }
    model
        .stiffness
        .clone()
        .lu()
        .solve(&e)
        .ok_or(Error::SingularStiffness(kdet))
}

/// Full spectral analysis of a model.
pub fn analyze(model: &ModelSpec) -> Result<SpectralData> {
    let modes = normal_modes(model)?;
    let n = model.n();
    let xmax = linalg::max_abs(&modes.x);
    if let Some(column) = (0..n).find(|&j| modes.x[(n - 1, j)].abs() < 1e-12 * xmax) {
        return Err(Error::NormalizationDegenerate { column });
    }
    let lambda_prime = constrained_spectrum(model, &modes.lambda)?;
    let m = cauchy::cauchy_matrix(&modes.lambda, &lambda_prime)?;
    let xp = constrained_modes(&modes.x, &m);
    let kinv = stiffness_inv_last(model)?;
    let x0 = &kinv * model.static_force;
    Ok(SpectralData {
        lambda: modes.lambda,
        mode_matrix: modes.x,
        norm_const: modes.c,
        lambda_prime,
        mode_matrix_prime: xp,
        static_offset: x0,
        stiffness_inv_column: kinv,
        sigma: model.sigma.clone(),
        sigma_prime: model.sigma_prime.clone(),
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::model::{build_armed_biped, ArmedBipedParams};

    fn diag_model(k: &[f64]) -> ModelSpec {
        let n = k.len();
        ModelSpec::new(
            "diag",
            DMatrix::identity(n, n),
            DMatrix::from_diagonal(&DVector::from_column_slice(k)),
            vec![Symmetry::Even; n],
            vec![Symmetry::Odd; n - 1],
            1.0,
            1.0,
        )
        .unwrap()
    }

    #[test]
    fn diagonal_system_is_its_own_basis() {
        let modes = normal_modes(&diag_model(&[1.0, 2.0, 3.0])).unwrap();
        assert_eq!(modes.lambda.as_slice(), &[1.0, 2.0, 3.0]);
        assert!((modes.c - 1.0).abs() < 1e-14);
        assert!(linalg::max_abs(&(modes.x - DMatrix::identity(3, 3))) < 1e-14);
    }

    #[test]
    fn decoupled_n2_constrained_spectrum() {
        let model = ModelSpec::new(
            "coupled",
            DMatrix::identity(2, 2),
            DMatrix::from_row_slice(2, 2, &[2.0, 0.5, 0.5, 3.0]),
            vec![Symmetry::Even; 2],
            vec![Symmetry::Odd],
            1.0,
            1.0,
        )
        .unwrap();
        let modes = normal_modes(&model).unwrap();
        let lp = constrained_spectrum(&model, &modes.lambda).unwrap();
        assert!((lp[0] - 2.0).abs() < 1e-14);
    }

    #[test]
    fn static_offset_diagonal() {
        let model = diag_model(&[1.0, 2.0, 4.0]);
        let x0 = static_offset(&model).unwrap();
        assert_eq!(x0.as_slice(), &[0.0, 0.0, 0.25]);
        let mut zero = model.clone();
        zero.static_force = 0.0;
        assert_eq!(static_offset(&zero).unwrap(), DVector::zeros(3));
    }

    #[test]
    fn armed_biped_normalization_invariants() {
        let model = build_armed_biped(ArmedBipedParams::default()).unwrap();
        let s = analyze(&model).unwrap();
        let x = &s.mode_matrix;
        let gram = (x.transpose() * &model.mass * x) * s.norm_const;
        assert!(linalg::max_abs(&(gram - DMatrix::identity(3, 3))) < 1e-10);
        assert_eq!(x[(2, 2)], 1.0);
        assert!(x.row(2).iter().all(|&v| v > 0.0));
        let minv_k = model.mass.clone().try_inverse().unwrap() * &model.stiffness;
        let resid = &minv_k * x - x * DMatrix::from_diagonal(&s.lambda);
        assert!(linalg::max_abs(&resid) < 1e-8 * 3.0);
        let xp_last = s.mode_matrix_prime.row(2);
        assert!(xp_last
            .iter()
            .all(|v| v.abs() < 1e-10 * linalg::max_abs(&s.mode_matrix_prime)));
        assert!((s.static_offset[2] + 5.0 / 3.0).abs() < 1e-12);
        assert!(s.static_offset[0].abs() < 1e-15 && s.static_offset[1].abs() < 1e-15);
        let eta = cauchy::eta(&s.lambda, &s.lambda_prime).unwrap();
        for i in 0..3 {
            assert!((eta[i] - x[(2, i)].powi(2)).abs() < 1e-10 * eta[i]);
        }
    }

    #[test]
    fn decoupled_contact_coordinate_rejected_by_pipeline() {
        assert!(matches!(
            analyze(&diag_model(&[1.0, 2.0, 3.0])),
            Err(Error::NormalizationDegenerate { column: 0 })
        ));
    }

    #[test]
    fn degenerate_spectrum_rejected() {
        let model = diag_model(&[1.0, 1.0, 3.0]);
        assert!(matches!(normal_modes(&model), Err(Error::DegenerateSpectrum { .. })));
    }
}
