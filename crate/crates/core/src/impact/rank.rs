//! The full linear system `A b = 0` for `b = [q; q'; F⁰_N]`, its rank test,
//! the block reduction to `Ã`, and the solve for the mode weights.

use nalgebra::{DMatrix, DVector};

use super::equations::{ImpactEquations, ImpactModes};
use crate::error::{Error, Result};
use crate::linalg;
use crate::spectral::SpectralData;

/// `(2N+1)×2N` matrix of the impact conditions: position and velocity
/// continuity plus vanishing contact acceleration.
pub fn assemble_a(sd: &SpectralData, modes: &ImpactModes) -> DMatrix<f64> {
    let n = sd.n();
    let x = &sd.mode_matrix;
    let xp = &sd.mode_matrix_prime;
    let (g, gd) = (&modes.free.g, &modes.free.gd);
    let (gp, gpd) = (&modes.constrained.g, &modes.constrained.gd);
    let gdd = modes.free.gdd(&sd.lambda);
    let mut a = DMatrix::zeros(2 * n + 1, 2 * n);
    a.view_mut((0, 0), (n, n)).copy_from(&linalg::scale_cols(x, g));
    a.view_mut((0, n), (n, n - 1)).copy_from(&-linalg::scale_cols(xp, gp));
    a.view_mut((0, 2 * n - 1), (n, 1)).copy_from(&-&sd.stiffness_inv_column);
    a.view_mut((n, 0), (n, n)).copy_from(&linalg::scale_cols(x, gd));
    a.view_mut((n, n), (n, n - 1)).copy_from(&-linalg::scale_cols(xp, gpd));
    for i in 0..n {
        a[(2 * n, i)] = x[(n - 1, i)] * gdd[i];
    }
    a
}

/// `σ_min/σ_max` of `A` after scaling its columns, then its rows, to unit
/// Euclidean norm. Diagonal scaling leaves the rank unchanged, so the value
/// vanishes where the impact equations hold.
pub fn rank_gap(a: &DMatrix<f64>) -> f64 {
    linalg::singular_value_gap(&linalg::equilibrate(a))
}

/// Reduction `S_L A S_R` with
/// `S_L = [[I,0,0],[I,I,0],[(η∘λ)ᵀ,0,1]] · diag(X_N⁻¹ X⁻¹, −(g/(ġ X_N)) X⁻¹, 1)` and
/// `S_R = diag(X_N/g, −1/g', −1/c)`, where vector factors act as diagonal matrices.
pub fn reduce_a(
    sd: &SpectralData,
    eq: &ImpactEquations,
    modes: &ImpactModes,
    a: &DMatrix<f64>,
) -> Result<DMatrix<f64>> {
    let n = sd.n();
    let xinv = sd
        .mode_matrix
        .clone()
        .try_inverse()
        .ok_or(Error::NormalizationDegenerate { column: 0 })?;
    let x_n = sd.mode_matrix.row(n - 1).transpose();
    let (g, gd) = (&modes.free.g, &modes.free.gd);
    let gp = &modes.constrained.g;
    let eta = &eq.cauchy().eta;

    let p = linalg::scale_rows(&xinv, &x_n.map(|v| 1.0 / v));
    let qf = DVector::from_fn(n, |i, _| -g[i] / (gd[i] * x_n[i]));
    let q = linalg::scale_rows(&xinv, &qf);
    let mut diag = DMatrix::zeros(2 * n + 1, 2 * n + 1);
    diag.view_mut((0, 0), (n, n)).copy_from(&p);
    diag.view_mut((n, n), (n, n)).copy_from(&q);
    diag[(2 * n, 2 * n)] = 1.0;

    let mut mix = DMatrix::identity(2 * n + 1, 2 * n + 1);
    for i in 0..n {
        mix[(n + i, i)] = 1.0;
        mix[(2 * n, i)] = eta[i] * sd.lambda[i];
    }
    let s_l = mix * diag;

    let mut s_r = DVector::zeros(2 * n);
    for i in 0..n {
        s_r[i] = x_n[i] / g[i];
    }
    for j in 0..n - 1 {
        s_r[n + j] = -1.0 / gp[j];
    }
    s_r[2 * n - 1] = -1.0 / sd.norm_const;
    Ok(linalg::scale_cols(&(s_l * a), &s_r))
}

/// `Ã = [[I, M, 1/λ], [0, B]]`.
pub fn reduced_form(eq: &ImpactEquations, tau: f64, tau_prime: f64) -> Result<DMatrix<f64>> {
    let n = eq.n();
    let b = eq.b_matrix(tau, tau_prime)?;
    let mut t = DMatrix::zeros(2 * n + 1, 2 * n);
    t.view_mut((0, 0), (n, n)).fill_with_identity();
    t.view_mut((0, n), (n, n - 1)).copy_from(&eq.cauchy().m);
    for i in 0..n {
        t[(i, 2 * n - 1)] = 1.0 / eq.spectra().lambda[i];
    }
    t.view_mut((n, n), (n + 1, n)).copy_from(&b);
    Ok(t)
}

/// Largest entry of `S_L A S_R − Ã` at `(τ, τ')`.
pub fn identity_deviation(sd: &SpectralData, eq: &ImpactEquations, tau: f64, tau_prime: f64) -> Result<f64> {
    let modes = eq.modes(tau, tau_prime)?;
    let a = assemble_a(sd, &modes);
    let reduced = reduce_a(sd, eq, &modes, &a)?;
    let target = reduced_form(eq, tau, tau_prime)?;
    Ok(linalg::max_abs(&(reduced - target)))
}

/// Mode weights from the leading `(2N−1)` rows and columns of `A`:
/// `[[X gᵀ, −X' g'ᵀ], [X̄ ġᵀ, −X̄' ġ'ᵀ]] [q; q'] = [x⁰; 0]`.
///
/// Returns `(q, q', residual)` where the residual is the max-norm of the
/// system residual.
pub fn solve_weights(sd: &SpectralData, modes: &ImpactModes) -> Result<(DVector<f64>, DVector<f64>, f64)> {
    let n = sd.n();
    let a = assemble_a(sd, modes);
    let sys = a.view((0, 0), (2 * n - 1, 2 * n - 1)).into_owned();
    let mut rhs = DVector::zeros(2 * n - 1);
    rhs.rows_mut(0, n).copy_from(&sd.static_offset);
    let scale = DVector::from_fn(2 * n - 1, |j, _| 1.0 / sys.column(j).norm());
    let scaled = linalg::scale_cols(&sys, &scale);
    if !scale.iter().all(|s| s.is_finite()) || linalg::singular_value_gap(&scaled) < 1e-13 {
        return Err(Error::SingularWeightSystem);
    }
    let sol = scaled
        .lu()
        .solve(&rhs)
        .ok_or(Error::SingularWeightSystem)?
        .component_mul(&scale);
    let residual = linalg::max_abs_vec(&(&sys * &sol - &rhs));
    Ok((sol.rows(0, n).into_owned(), sol.rows(n, n - 1).into_owned(), residual))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::model::{build_armed_biped, ArmedBipedParams};
    use crate::spectral::analyze;

    fn setup() -> (SpectralData, ImpactEquations) {
        let sd = analyze(&build_armed_biped(ArmedBipedParams::default()).unwrap()).unwrap();
        let eq = ImpactEquations::new(sd.spectrum_pair()).unwrap();
        (sd, eq)
    }

    #[test]
    fn reduction_identity_holds_pointwise() {
        let (sd, eq) = setup();
        for (tau, tp) in [(0.7, 0.3), (2.2, 1.9), (3.0794, 0.7778), (5.3, 2.1)] {
            let dev = identity_deviation(&sd, &eq, tau, tp).unwrap();
            assert!(dev < 1e-9, "deviation {dev} at ({tau}, {tp})");
        }
    }

    #[test]
    fn weight_system_is_linear() {
        let (sd, eq) = setup();
        let modes = eq.modes(3.0795, 0.77785).unwrap();
        let (q, qp, res) = solve_weights(&sd, &modes).unwrap();
        assert!(res < 1e-10 * linalg::max_abs_vec(&sd.static_offset));
        let mut doubled = sd.clone();
        doubled.static_offset *= 2.0;
        let (q2, qp2, _) = solve_weights(&doubled, &modes).unwrap();
        assert!(linalg::max_abs_vec(&(q2 - &q * 2.0)) < 1e-12);
        assert!(linalg::max_abs_vec(&(qp2 - &qp * 2.0)) < 1e-12);
        let mut zero = sd.clone();
        zero.static_offset.fill(0.0);
        let (q0, qp0, _) = solve_weights(&zero, &modes).unwrap();
        assert_eq!(linalg::max_abs_vec(&q0), 0.0);
        assert_eq!(linalg::max_abs_vec(&qp0), 0.0);
    }

    #[test]
    fn a_has_full_rank_away_from_roots() {
        let (sd, eq) = setup();
        for (t, tp) in [(1.3, 0.4), (0.5, 0.5), (2.0, 1.0), (4.0, 2.0), (1.0, 3.0), (6.0, 0.2)] {
            let a = assemble_a(&sd, &eq.modes(t, tp).unwrap());
            assert!(rank_gap(&a) > 1e-3, "({t}, {tp})");
        }
    }
}
