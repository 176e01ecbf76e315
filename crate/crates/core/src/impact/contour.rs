//! Grid evaluation of the two impact determinants and extraction of their
//! zero sets by marching squares.

use std::collections::HashMap;
use std::fmt::Write as _;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::equations::ImpactEquations;
use crate::error::{Error, Result};

/// A regular grid in phase coordinates. Both axes run from `min` to `max`
/// inclusive in steps of `step`.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "camelCase")]
pub struct GridSpec {
    pub o_n_min: f64,
    pub o_n_max: f64,
    pub o_n_step: f64,
    pub o_prime_min: f64,
    pub o_prime_max: f64,
    pub o_prime_step: f64,
}

impl GridSpec {
    /// The grid `(0, o_n_max] × (0, o_prime_max]` with a common step.
    pub fn positive(o_n_max: f64, o_prime_max: f64, step: f64) -> Self {
        GridSpec {
            o_n_min: step,
            o_n_max,
            o_n_step: step,
            o_prime_min: step,
            o_prime_max,
            o_prime_step: step,
        }
    }

    fn axis(name: &str, min: f64, max: f64, step: f64) -> Result<Vec<f64>> {
        if !(step > 0.0 && step.is_finite() && min.is_finite() && max.is_finite()) {
            return Err(Error::EmptyGrid(format!(
                "{name}: step must be positive and bounds finite"
            )));
        }
        if min <= 0.0 {
            return Err(Error::EmptyGrid(format!(
                "{name}: phases must be positive, got min {min}"
            )));
        }
        if max <= min {
            return Err(Error::EmptyGrid(format!("{name}: max {max} does not exceed min {min}")));
        }
        let count = ((max - min) / step + 1e-9).floor() as usize + 1;
        Ok((0..count).map(|k| min + k as f64 * step).collect())
    }

    pub fn axes(&self) -> Result<(Vec<f64>, Vec<f64>)> {
        Ok((
            Self::axis("o_N", self.o_n_min, self.o_n_max, self.o_n_step)?,
            Self::axis("o'", self.o_prime_min, self.o_prime_max, self.o_prime_step)?,
        ))
    }
}

impl Default for GridSpec {
    fn default() -> Self {
        use std::f64::consts::PI;
        GridSpec::positive(4.0 * PI, 2.0 * PI, 0.05)
    }
}

pub type Point = (f64, f64);
pub type Polyline = Vec<Point>;

/// Determinant values on a grid together with their zero curves.
///
/// Values are stored row-major with `o'` as the slow index:
/// `values[j * o_n.len() + i]` belongs to `(o_n[i], o_prime[j])`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "camelCase")]
pub struct ContourField {
    pub o_n: Vec<f64>,
    pub o_prime: Vec<f64>,
    pub det1: Vec<f64>,
    pub det2: Vec<f64>,
    pub phi: Vec<f64>,
    pub curves: [Vec<Polyline>; 2],
    pub seeds: Vec<Point>,
}

impl ContourField {
    fn idx(&self, i: usize, j: usize) -> usize {
        j * self.o_n.len() + i
    }

    pub fn value(&self, which: usize, i: usize, j: usize) -> f64 {
        let k = self.idx(i, j);
        if which == 0 {
            self.det1[k]
        } else {
            self.det2[k]
        }
    }

    /// One line per grid point: `o_N,o_prime,det1,det2,phi`.
    pub fn to_csv(&self) -> String {
        let mut out = String::from("oN,oPrimeN1,det1,det2,phi\n");
        for j in 0..self.o_prime.len() {
            for i in 0..self.o_n.len() {
                let k = self.idx(i, j);
                let _ = writeln!(
                    out,
                    "{},{},{:e},{:e},{:e}",
                    self.o_n[i], self.o_prime[j], self.det1[k], self.det2[k], self.phi[k]
                );
            }
        }
        out
    }

    /// Zero curves in two colours, seed markers and optional crosses.
    pub fn to_svg(&self, crosses: &[Point]) -> String {
        let (x0, x1) = (self.o_n[0], *self.o_n.last().unwrap());
        let (y0, y1) = (self.o_prime[0], *self.o_prime.last().unwrap());
        let width = 800.0;
        let height = (width * (y1 - y0) / (x1 - x0)).clamp(200.0, 1200.0);
        let margin = 40.0;
        let sx = |x: f64| margin + (x - x0) / (x1 - x0) * width;
        let sy = |y: f64| margin + height - (y - y0) / (y1 - y0) * height;
        let mut svg = String::new();
        let _ = writeln!(
            svg,
            r#"<svg xmlns="http://www.w3.org/2000/svg" width="{}" height="{}" viewBox="0 0 {} {}">"#,
            width + 2.0 * margin,
            height + 2.0 * margin,
            width + 2.0 * margin,
            height + 2.0 * margin
        );
        let _ = writeln!(svg, r#"<rect width="100%" height="100%" fill="white"/>"#);
        let _ = writeln!(
            svg,
            r#"<rect x="{margin}" y="{margin}" width="{width}" height="{height}" fill="none" stroke="black"/>"#
        );
        for (curves, colour) in self.curves.iter().zip(["#1f4e9c", "#2e8b3a"]) {
            for line in curves {
                let pts: Vec<String> = line
                    .iter()
                    .map(|&(x, y)| format!("{:.2},{:.2}", sx(x), sy(y)))
                    .collect();
                let _ = writeln!(
                    svg,
                    r#"<polyline fill="none" stroke="{colour}" stroke-width="1.2" points="{}"/>"#,
                    pts.join(" ")
                );
            }
        }
        for &(x, y) in crosses {
            let (cx, cy) = (sx(x), sy(y));
            let _ = writeln!(
                svg,
                r#"<path d="M{} {} L{} {} M{} {} L{} {}" stroke="black" stroke-width="1.5"/>"#,
                cx - 5.0,
                cy - 5.0,
                cx + 5.0,
                cy + 5.0,
                cx - 5.0,
                cy + 5.0,
                cx + 5.0,
                cy - 5.0
            );
        }
        for &(x, y) in &self.seeds {
            let _ = writeln!(
                svg,
                r##"<circle cx="{:.2}" cy="{:.2}" r="3" fill="none" stroke="#c0392b"/>"##,
                sx(x),
                sy(y)
            );
        }
        let _ = writeln!(
            svg,
            r#"<text x="{}" y="{}" font-size="14" text-anchor="middle">o_N</text>"#,
            margin + width / 2.0,
            height + 2.0 * margin - 8.0
        );
        let _ = writeln!(
            svg,
            r#"<text x="12" y="{}" font-size="14" transform="rotate(-90 12 {})" text-anchor="middle">o'_(N-1)</text>"#,
            margin + height / 2.0,
            margin + height / 2.0
        );
        svg.push_str("</svg>\n");
        svg
    }
}

/// Evaluates both normalized determinants on the grid and extracts their zero
/// sets. Grid evaluation runs in parallel; every value depends only on its own
/// grid point, so the result is independent of scheduling.
pub fn scan_contour(eq: &ImpactEquations, grid: &GridSpec) -> Result<ContourField> {
    let (o_n, o_prime) = grid.axes()?;
    let points: Vec<(f64, f64)> = o_prime.iter().flat_map(|&y| o_n.iter().map(move |&x| (x, y))).collect();
    let values: Vec<[f64; 2]> = points
        .par_iter()
        .map(|&(x, y)| eq.determinants(x, y))
        .collect::<Result<_>>()?;
    let det1: Vec<f64> = values.iter().map(|v| v[0]).collect();
    let det2: Vec<f64> = values.iter().map(|v| v[1]).collect();
    let phi: Vec<f64> = values.iter().map(|v| v[0] * v[1]).collect();
    let mut field = ContourField {
        o_n,
        o_prime,
        det1,
        det2,
        phi,
        curves: [Vec::new(), Vec::new()],
        seeds: Vec::new(),
    };
    field.curves = [0, 1].map(|w| marching_squares(&field, w));
    field.seeds = find_seeds(&field);
    Ok(field)
}

/// Edge identifiers: horizontal edge from `(i, j)` to `(i+1, j)` and vertical
/// edge from `(i, j)` to `(i, j+1)`.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
enum Edge {
    H(usize, usize),
    V(usize, usize),
}

fn crossing(field: &ContourField, which: usize, edge: Edge) -> Option<Point> {
    let (a, b, pa, pb) = match edge {
        Edge::H(i, j) => (
            field.value(which, i, j),
            field.value(which, i + 1, j),
            (field.o_n[i], field.o_prime[j]),
            (field.o_n[i + 1], field.o_prime[j]),
        ),
        Edge::V(i, j) => (
            field.value(which, i, j),
            field.value(which, i, j + 1),
            (field.o_n[i], field.o_prime[j]),
            (field.o_n[i], field.o_prime[j + 1]),
        ),
    };
    if (a >= 0.0) == (b >= 0.0) {
        return None;
    }
    let t = a / (a - b);
    Some((pa.0 + t * (pb.0 - pa.0), pa.1 + t * (pb.1 - pa.1)))
}

/// Segments of one determinant's zero set inside cell `(i, j)`, as pairs of edges.
fn cell_segments(field: &ContourField, which: usize, i: usize, j: usize) -> Vec<(Edge, Edge)> {
    // counter-clockwise: bottom, right, top, left
    let edges = [Edge::H(i, j), Edge::V(i + 1, j), Edge::H(i, j + 1), Edge::V(i, j)];
    let hits: Vec<Edge> = edges
        .iter()
        .copied()
        .filter(|&e| crossing(field, which, e).is_some())
        .collect();
    match hits.len() {
        2 => vec![(hits[0], hits[1])],
        4 => {
            let centre = 0.25
                * (field.value(which, i, j)
                    + field.value(which, i + 1, j)
                    + field.value(which, i, j + 1)
                    + field.value(which, i + 1, j + 1));
            let corner = field.value(which, i, j);
            // saddle: separate the corner whose sign differs from the centre
            if (centre >= 0.0) == (corner >= 0.0) {
                vec![(edges[0], edges[1]), (edges[2], edges[3])]
            } else {
                vec![(edges[3], edges[0]), (edges[1], edges[2])]
            }
        }
        _ => Vec::new(),
    }
}

fn marching_squares(field: &ContourField, which: usize) -> Vec<Polyline> {
    let (nx, ny) = (field.o_n.len(), field.o_prime.len());
    let mut segments: Vec<(Edge, Edge)> = Vec::new();
    for j in 0..ny.saturating_sub(1) {
        for i in 0..nx.saturating_sub(1) {
            segments.extend(cell_segments(field, which, i, j));
        }
    }
    let mut by_edge: HashMap<Edge, Vec<usize>> = HashMap::new();
    for (k, &(a, b)) in segments.iter().enumerate() {
        by_edge.entry(a).or_default().push(k);
        by_edge.entry(b).or_default().push(k);
    }
    let mut used = vec![false; segments.len()];
    let mut lines = Vec::new();
    for start in 0..segments.len() {
        if used[start] {
            continue;
        }
        used[start] = true;
        let (a, b) = segments[start];
        let mut chain = std::collections::VecDeque::from([a, b]);
        for forward in [true, false] {
            loop {
                let end = if forward {
                    *chain.back().unwrap()
                } else {
                    *chain.front().unwrap()
                };
                let next = by_edge[&end].iter().copied().find(|&k| !used[k]);
                let Some(k) = next else { break };
                used[k] = true;
                let (p, q) = segments[k];
                let other = if p == end { q } else { p };
                if forward {
                    chain.push_back(other);
                } else {
                    chain.push_front(other);
                }
            }
        }
        lines.push(
            chain
                .into_iter()
                .filter_map(|e| crossing(field, which, e))
                .collect::<Polyline>(),
        );
    }
    lines
}

fn segment_intersection(p: (Point, Point), q: (Point, Point)) -> Option<Point> {
    let (p0, p1) = p;
    let (q0, q1) = q;
    let r = (p1.0 - p0.0, p1.1 - p0.1);
    let s = (q1.0 - q0.0, q1.1 - q0.1);
    let denom = r.0 * s.1 - r.1 * s.0;
    if denom == 0.0 {
        return None;
    }
    let d = (q0.0 - p0.0, q0.1 - p0.1);
    let t = (d.0 * s.1 - d.1 * s.0) / denom;
    let u = (d.0 * r.1 - d.1 * r.0) / denom;
    ((-0.5..=1.5).contains(&t) && (-0.5..=1.5).contains(&u)).then_some((p0.0 + t * r.0, p0.1 + t * r.1))
}

/// Cells in which both determinants change sign and whose local zero
/// segments meet within half a cell. The seed is the segment intersection.
fn find_seeds(field: &ContourField) -> Vec<Point> {
    let (nx, ny) = (field.o_n.len(), field.o_prime.len());
    let mut seeds = Vec::new();
    for j in 0..ny.saturating_sub(1) {
        for i in 0..nx.saturating_sub(1) {
            let s1 = cell_segments(field, 0, i, j);
            let s2 = cell_segments(field, 1, i, j);
            if s1.is_empty() || s2.is_empty() {
                continue;
            }
            let to_pts =
                |which: usize, (a, b): (Edge, Edge)| Some((crossing(field, which, a)?, crossing(field, which, b)?));
            let hit = s1
                .iter()
                .filter_map(|&s| to_pts(0, s))
                .flat_map(|a| s2.iter().filter_map(|&s| to_pts(1, s)).map(move |b| (a, b)))
                .find_map(|(a, b)| segment_intersection(a, b));
            seeds.extend(hit);
        }
    }
    seeds
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::model::{build_armed_biped, ArmedBipedParams};
    use crate::spectral::analyze;

    fn synthetic(f: impl Fn(f64, f64) -> [f64; 2], grid: &GridSpec) -> ContourField {
        let (o_n, o_prime) = grid.axes().unwrap();
        let mut det1 = Vec::new();
        let mut det2 = Vec::new();
        for &y in &o_prime {
            for &x in &o_n {
                let [a, b] = f(x, y);
                det1.push(a);
                det2.push(b);
            }
        }
        let phi = det1.iter().zip(&det2).map(|(a, b)| a * b).collect();
        let mut field = ContourField {
            o_n,
            o_prime,
            det1,
            det2,
            phi,
            curves: [Vec::new(), Vec::new()],
            seeds: Vec::new(),
        };
        field.curves = [0, 1].map(|w| marching_squares(&field, w));
        field.seeds = find_seeds(&field);
        field
    }

    #[test]
    fn circle_is_one_closed_polyline() {
        let grid = GridSpec::positive(4.0, 4.0, 0.1);
        let f = synthetic(|x, y| [(x - 2.0).powi(2) + (y - 2.0).powi(2) - 1.0, x - 2.05], &grid);
        assert_eq!(f.curves[0].len(), 1);
        let line = &f.curves[0][0];
        assert_eq!(line.first(), line.last());
        for &(x, y) in line {
            let r = ((x - 2.0).powi(2) + (y - 2.0).powi(2)).sqrt();
            assert!((r - 1.0).abs() < 0.01);
        }
        // the vertical line meets the circle twice
        assert_eq!(f.seeds.len(), 2);
        for &(x, y) in &f.seeds {
            assert!((x - 2.05).abs() < 1e-9);
            assert!(((y - 2.0).abs() - (1.0f64 - 0.05 * 0.05).sqrt()).abs() < 0.01);
        }
    }

    #[test]
    fn refinement_keeps_seeds() {
        let f = |x: f64, y: f64| [(x * 1.3).sin() * (y * 0.7).cos() + 0.1, y - 0.4 * x - 0.3];
        let coarse = synthetic(f, &GridSpec::positive(8.0, 4.0, 0.1));
        let fine = synthetic(f, &GridSpec::positive(8.0, 4.0, 0.05));
        assert!(!coarse.seeds.is_empty());
        for &(x, y) in &coarse.seeds {
            assert!(fine
                .seeds
                .iter()
                .any(|&(a, b)| (a - x).abs() < 0.1 && (b - y).abs() < 0.1));
        }
    }

    #[test]
    fn rejects_bad_grids() {
        let eq = ImpactEquations::new(
            analyze(&build_armed_biped(ArmedBipedParams::default()).unwrap())
                .unwrap()
                .spectrum_pair(),
        )
        .unwrap();
        let mut g = GridSpec::positive(1.0, 1.0, 0.1);
        g.o_n_min = 0.0;
        assert!(matches!(scan_contour(&eq, &g), Err(Error::EmptyGrid(_))));
        assert!(matches!(
            scan_contour(&eq, &GridSpec::positive(0.05, 1.0, 0.1)),
            Err(Error::EmptyGrid(_))
        ));
    }

    #[test]
    fn armed_biped_has_a_seed_near_the_marked_solution() {
        let eq = ImpactEquations::new(
            analyze(&build_armed_biped(ArmedBipedParams::default()).unwrap())
                .unwrap()
                .spectrum_pair(),
        )
        .unwrap();
        let field = scan_contour(&eq, &GridSpec::positive(12.0, 8.0, 0.05)).unwrap();
        assert!(field.phi.iter().all(|v| v.is_finite()));
        assert!(field
            .seeds
            .iter()
            .any(|&(x, y)| (x - 3.801).abs() < 0.05 && (y - 0.925).abs() < 0.05));
        let csv = field.to_csv();
        assert_eq!(csv.lines().count(), 1 + field.o_n.len() * field.o_prime.len());
        assert!(field.to_svg(&[]).contains("<polyline"));
    }
}
