//! The Cauchy matrix `M_ij = 1/(λ_i − λ'_j)`, the explicit inverse of its
//! square part, and the squared last-row mode components η.

use nalgebra::{DMatrix, DVector};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::serde_mat;

/// Absolute node separation below which the Cauchy matrix is rejected,
/// relative to the spread of all nodes.
const NODE_TOL: f64 = 1e-12;
/// Relative minimum gap below which the explicit inverse gives way to LU.
const EXPLICIT_GAP_TOL: f64 = 1e-6;

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "camelCase")]
pub struct CauchyData {
    #[serde(with = "serde_mat::matrix")]
    pub m: DMatrix<f64>,
    #[serde(with = "serde_mat::vector")]
    pub eta: DVector<f64>,
}

impl CauchyData {
    pub fn new(lambda: &DVector<f64>, lambda_prime: &DVector<f64>) -> Result<Self> {
        Ok(CauchyData {
            m: cauchy_matrix(lambda, lambda_prime)?,
            eta: eta(lambda, lambda_prime)?,
        })
    }

    /// `ηᵀ𝟙`.
    pub fn eta_sum(&self) -> f64 {
        self.eta.sum()
    }
}

fn spread(x: &[f64], y: &[f64]) -> f64 {
    let (lo, hi) = x
        .iter()
        .chain(y)
        .fold((f64::INFINITY, f64::NEG_INFINITY), |(lo, hi), &v| {
            (lo.min(v), hi.max(v))
        });
    (hi - lo).max(f64::MIN_POSITIVE)
}

pub fn cauchy_matrix(lambda: &DVector<f64>, lambda_prime: &DVector<f64>) -> Result<DMatrix<f64>> {
    let tol = NODE_TOL * spread(lambda.as_slice(), lambda_prime.as_slice());
    let mut m = DMatrix::zeros(lambda.len(), lambda_prime.len());
    for i in 0..lambda.len() {
        for j in 0..lambda_prime.len() {
            let gap = lambda[i] - lambda_prime[j];
            if gap.abs() < tol {
                return Err(Error::NearSingularSpectrum { i, j, gap });
            }
            m[(i, j)] = 1.0 / gap;
        }
    }
    Ok(m)
}

/// Inverse of the square Cauchy matrix `C_ij = 1/(x_i − y_j)` by the product
/// formula `C⁻¹_ij = −P_i Q_j / ((x_j − y_i) a_j b_i)`, where
/// `P_i = Π_k (y_i − x_k)`, `Q_j = Π_k (x_j − y_k)`,
/// `a_j = Π_{k≠j} (x_j − x_k)` and `b_i = Π_{k≠i} (y_i − y_k)`.
pub fn cauchy_inverse_explicit(x: &[f64], y: &[f64]) -> Result<DMatrix<f64>> {
    let n = x.len();
    if y.len() != n {
        return Err(Error::Dimension(format!("{} x-nodes vs {} y-nodes", n, y.len())));
    }
    let tol = NODE_TOL * spread(x, y);
    for i in 0..n {
        for j in 0..n {
            if (x[i] - y[j]).abs() < tol {
                return Err(Error::NearSingularSpectrum { i, j, gap: x[i] - y[j] });
            }
            if i != j && ((x[i] - x[j]).abs() < tol || (y[i] - y[j]).abs() < tol) {
                return Err(Error::Interlacing(format!("repeated Cauchy node at {i},{j}")));
            }
        }
    }
    let p: Vec<f64> = (0..n).map(|i| x.iter().map(|xk| y[i] - xk).product()).collect();
    let q: Vec<f64> = (0..n).map(|j| y.iter().map(|yk| x[j] - yk).product()).collect();
    let a: Vec<f64> = (0..n)
        .map(|j| (0..n).filter(|&k| k != j).map(|k| x[j] - x[k]).product())
        .collect();
    let b: Vec<f64> = (0..n)
        .map(|i| (0..n).filter(|&k| k != i).map(|k| y[i] - y[k]).product())
        .collect();
    Ok(DMatrix::from_fn(n, n, |i, j| {
        -p[i] * q[j] / ((x[j] - y[i]) * a[j] * b[i])
    }))
}

/// Inverse of the square Cauchy matrix built from `x` and `y`, switching to a
/// dense LU inverse when the nodes come closer than `1e-6` of their spread.
pub fn cauchy_inverse(x: &[f64], y: &[f64]) -> Result<DMatrix<f64>> {
    let n = x.len();
    let s = spread(x, y);
    let min_gap = x
        .iter()
        .chain(y)
        .enumerate()
        .flat_map(|(i, a)| x.iter().chain(y).skip(i + 1).map(move |b| (a - b).abs()))
        .fold(f64::INFINITY, f64::min);
    if min_gap >= EXPLICIT_GAP_TOL * s {
        return cauchy_inverse_explicit(x, y);
    }
    let c = cauchy_matrix(&DVector::from_column_slice(x), &DVector::from_column_slice(y))?;
    c.try_inverse()
        .ok_or(Error::NearSingularSpectrum {
            i: 0,
            j: 0,
            gap: min_gap,
        })
        .and_then(|inv| {
            if inv.nrows() == n {
                Ok(inv)
            } else {
                Err(Error::Dimension("inverse shape".into()))
            }
        })
}

/// η with `η_N = 1` and `η̄ᵀ = −M_N M̄⁻¹`, computed from the spectra only.
///
/// `M_N` is the last row of the Cauchy matrix, so `−M_N` has entries
/// `1/(λ'_j − λ_N)`.
pub fn eta(lambda: &DVector<f64>, lambda_prime: &DVector<f64>) -> Result<DVector<f64>> {
    let n = lambda.len();
    if lambda_prime.len() + 1 != n {
        return Err(Error::Dimension("lambda' must have N-1 entries".into()));
    }
    let lam_bar = &lambda.as_slice()[..n - 1];
    let inv = cauchy_inverse(lam_bar, lambda_prime.as_slice())?;
    let rhs = DVector::from_fn(n - 1, |j, _| 1.0 / (lambda_prime[j] - lambda[n - 1]));
    let bar = inv.transpose() * rhs;
    let mut out = DVector::zeros(n);
    out.rows_mut(0, n - 1).copy_from(&bar);
    out[n - 1] = 1.0;
    Ok(out)
}
