#![allow(dead_code)]

use collisionless::model::{ModelSpec, Symmetry};
use collisionless::spectral::{analyze, SpectralData};
use nalgebra::{DMatrix, DVector};
use rand::Rng;

pub fn random_symmetry(rng: &mut impl Rng) -> Symmetry {
    if rng.random_bool(0.5) {
        Symmetry::Even
    } else {
        Symmetry::Odd
    }
}

/// Random model with a well-conditioned positive definite mass matrix and a
/// stiffness matrix of mixed inertia. Retries until the spectral analysis
/// succeeds and every `|λ_i − λ'_j|` is at least 1% of `max |λ|`, so that no
/// mode is nearly decoupled from the contact coordinate.
pub fn random_model(rng: &mut impl Rng, n: usize) -> (ModelSpec, SpectralData) {
    loop {
        let a = DMatrix::from_fn(n, n, |_, _| rng.random_range(-1.0..1.0));
        let mass = &a * a.transpose() + DMatrix::identity(n, n) * 0.5;
        let b = DMatrix::from_fn(n, n, |_, _| rng.random_range(-1.0..1.0));
        let q = b.qr().q();
        let d = DVector::from_fn(n, |_, _| {
            let mag = rng.random_range(0.2..2.0);
            if rng.random_bool(0.4) {
                -mag
            } else {
                mag
            }
        });
        let stiffness = &q * DMatrix::from_diagonal(&d) * q.transpose();
        let stiffness = (&stiffness + stiffness.transpose()) * 0.5;
        let sigma = (0..n).map(|_| random_symmetry(rng)).collect();
        let sigma_prime = (0..n - 1).map(|_| random_symmetry(rng)).collect();
        let Ok(model) = ModelSpec::new("random", mass, stiffness, sigma, sigma_prime, 1.0, 1.0) else {
            continue;
        };
        let Ok(sd) = analyze(&model) else { continue };
        let scale = sd.lambda.amax();
        let separated = sd
            .lambda
            .iter()
            .all(|l| sd.lambda_prime.iter().all(|lp| (l - lp).abs() >= 0.01 * scale));
        if separated {
            return (model, sd);
        }
    }
}

/// Strictly interlaced nodes `x_1 < y_1 < x_2 < … < y_{N−1} < x_N` with every
/// consecutive gap drawn from `[min_gap, 1]`, centred on zero.
pub fn random_interlaced(rng: &mut impl Rng, n: usize, min_gap: f64) -> (Vec<f64>, Vec<f64>) {
    let mut pts = vec![0.0];
    for _ in 0..2 * n - 2 {
        let last = *pts.last().unwrap();
        pts.push(last + rng.random_range(min_gap..1.0));
    }
    let mid = 0.5 * (pts[0] + pts[pts.len() - 1]);
    let x = pts.iter().step_by(2).map(|v| v - mid).collect();
    let y = pts.iter().skip(1).step_by(2).map(|v| v - mid).collect();
    (x, y)
}
