use nalgebra::DVector;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::contour::ContourField;
use super::equations::ImpactEquations;
use super::newton::{solve_impact, ImpactTimes, NewtonOptions};
use super::rank;
use crate::error::Result;
use crate::serde_mat;
use crate::spectral::SpectralData;

/// A converged root with its mode weights.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "camelCase")]
pub struct ImpactSolution {
    pub times: ImpactTimes,
    #[serde(with = "serde_mat::vector")]
    pub q: DVector<f64>,
    #[serde(with = "serde_mat::vector")]
    pub q_prime: DVector<f64>,
    pub spectral: SpectralData,
    pub rank_gap: f64,
    pub weight_residual: f64,
}

/// Rank test and weight solve at converged impact times.
pub fn solution_at(sd: &SpectralData, eq: &ImpactEquations, times: ImpactTimes) -> Result<ImpactSolution> {
    let modes = eq.modes(times.tau, times.tau_prime)?;
    let a = rank::assemble_a(sd, &modes);
    let (q, q_prime, weight_residual) = rank::solve_weights(sd, &modes)?;
    Ok(ImpactSolution {
        times,
        q,
        q_prime,
        spectral: sd.clone(),
        rank_gap: rank::rank_gap(&a),
        weight_residual,
    })
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "camelCase")]
pub struct RootFilter {
    /// Roots with either phase below this value sit on the degenerate axes.
    pub min_phase: f64,
    /// Roots closer than this in phase coordinates are merged.
    pub merge_distance: f64,
    /// A jump in `o'` larger than this between sorted roots starts a new row.
    pub row_gap: f64,
}

impl Default for RootFilter {
    fn default() -> Self {
        RootFilter {
            min_phase: 1e-3,
            merge_distance: 1e-6,
            row_gap: 0.5,
        }
    }
}

/// Distinct roots sorted by row and then by `o_N`.
#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "camelCase")]
pub struct RootSet {
    pub roots: Vec<ImpactTimes>,
    /// Row index of each root, counted upward in `o'` from 0.
    pub rows: Vec<usize>,
    /// Seeds whose refinement failed or was filtered out.
    pub rejected: usize,
}

impl RootSet {
    /// Leftmost root of the lowest row.
    pub fn lowest_row(&self) -> Option<&ImpactTimes> {
        self.roots.first()
    }

    pub fn row(&self, index: usize) -> impl Iterator<Item = &ImpactTimes> {
        self.roots
            .iter()
            .zip(&self.rows)
            .filter(move |(_, r)| **r == index)
            .map(|(t, _)| t)
    }

    pub fn nearest(&self, o_n: f64, o_prime: f64) -> Option<&ImpactTimes> {
        self.roots.iter().min_by(|a, b| {
            let da = (a.o_n - o_n).hypot(a.o_prime - o_prime);
            let db = (b.o_n - o_n).hypot(b.o_prime - o_prime);
            da.total_cmp(&db)
        })
    }
}

/// Refines every contour seed, drops failures and roots outside the scanned
/// window or on the degenerate axes, merges duplicates, and groups the rest
/// into rows.
pub fn find_roots(eq: &ImpactEquations, field: &ContourField, newton: &NewtonOptions, filter: &RootFilter) -> RootSet {
    let (x0, x1) = (field.o_n[0], *field.o_n.last().unwrap());
    let (y0, y1) = (field.o_prime[0], *field.o_prime.last().unwrap());
    let dx = field.o_n.get(1).map_or(0.0, |v| v - x0);
    let dy = field.o_prime.get(1).map_or(0.0, |v| v - y0);
    let inside = |t: &ImpactTimes| {
        t.o_n >= filter.min_phase
            && t.o_prime >= filter.min_phase
            && t.o_n >= x0 - dx
            && t.o_n <= x1 + dx
            && t.o_prime >= y0 - dy
            && t.o_prime <= y1 + dy
    };
    let refined: Vec<Option<ImpactTimes>> = field
        .seeds
        .par_iter()
        .map(|&seed| solve_impact(eq, seed, newton).ok().filter(inside))
        .collect();
    let rejected = refined.iter().filter(|r| r.is_none()).count();
    let mut roots: Vec<ImpactTimes> = refined.into_iter().flatten().collect();
    roots.sort_by(|a, b| a.o_prime.total_cmp(&b.o_prime).then(a.o_n.total_cmp(&b.o_n)));
    let mut distinct: Vec<ImpactTimes> = Vec::new();
    for r in roots {
        let dup = distinct
            .iter()
            .any(|d| (d.o_n - r.o_n).hypot(d.o_prime - r.o_prime) < filter.merge_distance);
        if !dup {
            distinct.push(r);
        }
    }
    let mut rows = Vec::with_capacity(distinct.len());
    let mut row = 0;
    for k in 0..distinct.len() {
        if k > 0 && distinct[k].o_prime - distinct[k - 1].o_prime > filter.row_gap {
            row += 1;
        }
        rows.push(row);
    }
    let mut order: Vec<usize> = (0..distinct.len()).collect();
    order.sort_by(|&a, &b| rows[a].cmp(&rows[b]).then(distinct[a].o_n.total_cmp(&distinct[b].o_n)));
    RootSet {
        roots: order.iter().map(|&k| distinct[k]).collect(),
        rows: order.iter().map(|&k| rows[k]).collect(),
        rejected,
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::impact::{scan_contour, GridSpec};
    use crate::model::{build_armed_biped, ArmedBipedParams};
    use crate::spectral::analyze;

    #[test]
    fn armed_biped_rows() {
        let sd = analyze(&build_armed_biped(ArmedBipedParams::default()).unwrap()).unwrap();
        let eq = ImpactEquations::new(sd.spectrum_pair()).unwrap();
        let field = scan_contour(&eq, &GridSpec::positive(12.0, 8.0, 0.05)).unwrap();
        let set = find_roots(&eq, &field, &NewtonOptions::default(), &RootFilter::default());
        let first = set.lowest_row().unwrap();
        assert!((first.tau - 3.0795).abs() < 5e-4, "{first:?}");
        let bottom: Vec<_> = set.row(0).collect();
        let second: Vec<_> = set.row(1).collect();
        assert_eq!(bottom.len(), 3, "{:?}", set.roots);
        assert!(bottom.iter().all(|t| (t.o_prime - 0.925).abs() < 0.01));
        assert!(second.iter().all(|t| (t.o_prime - 4.076).abs() < 0.01));
        assert!(!second.is_empty());
        let sol = solution_at(&sd, &eq, *first).unwrap();
        assert!(sol.rank_gap < 1e-6);
    }
}
