//! Chen-Stein bookkeeping for the exceedance count at `t = 1`: subdivision of
//! the observation window into sub-squares, Chebyshev neighborhoods of
//! sub-squares, the per-square exceedance probability, the `b1` bound, and a
//! Monte Carlo estimator for joint exceedances of two sub-squares.

use std::f64::consts::PI;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::extremes::{default_margin, threshold_v};
use crate::geometry::{ConvexPolygon, GeometryError, Point};
use crate::laws::cell_intensity;
use crate::rng::stream;
use crate::stit::{simulate, StitError};

/// Fewest replications accepted by [`estimate_pair_exceedance`].
pub const MIN_PAIR_REPLICATIONS: usize = 100;

#[derive(Debug, Error)]
pub enum ChenSteinError {
    #[error("rho must exceed e so that ln ln rho > 0, got {0}")]
    RhoTooSmall(f64),
    #[error("beta must lie in (0, 1), got {0}")]
    InvalidBeta(f64),
    #[error("tau must be positive, got {0}")]
    InvalidTau(f64),
    #[error("sub-square diagonal {diagonal:.6} is not below the threshold {threshold:.6}")]
    BelowRho0 { diagonal: f64, threshold: f64 },
    #[error("index ({0}, {1}) is outside the grid")]
    OutOfGrid(usize, usize),
    #[error("pair estimate needs two distinct squares")]
    SameSquare,
    #[error("at least {MIN_PAIR_REPLICATIONS} replications are needed, got {0}")]
    TooFewReplications(usize),
    #[error(transparent)]
    Geometry(#[from] GeometryError),
    #[error(transparent)]
    Stit(#[from] StitError),
}

/// 1-based position `(i1, i2)` of a sub-square in the grid.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub struct GridIndex {
    pub i1: usize,
    pub i2: usize,
}

impl GridIndex {
    pub const fn new(i1: usize, i2: usize) -> Self {
        Self { i1, i2 }
    }

    /// `max(|i1 - j1|, |i2 - j2|)`.
    pub fn chebyshev(self, other: GridIndex) -> usize {
        self.i1.abs_diff(other.i1).max(self.i2.abs_diff(other.i2))
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SubdivisionSpec {
    pub rho: f64,
    pub tau: f64,
    pub beta: f64,
    /// Sub-squares per side, `floor(sqrt(pi rho / ln ln rho))`.
    pub side_count: usize,
    /// Area of one sub-square, `pi rho / side_count^2`.
    pub cell_area: f64,
}

pub fn build_subdivision(rho: f64, tau: f64, beta: f64) -> Result<SubdivisionSpec, ChenSteinError> {
    if !(rho > std::f64::consts::E && rho.is_finite()) {
        return Err(ChenSteinError::RhoTooSmall(rho));
    }
    if !(beta > 0.0 && beta < 1.0) {
        return Err(ChenSteinError::InvalidBeta(beta));
    }
    if !(tau > 0.0 && tau.is_finite()) {
        return Err(ChenSteinError::InvalidTau(tau));
    }
    let ratio = PI * rho / rho.ln().ln();
    let side_count = (ratio.sqrt().floor() as usize).max(1);
    let cell_area = PI * rho / (side_count * side_count) as f64;
    Ok(SubdivisionSpec {
        rho,
        tau,
        beta,
        side_count,
        cell_area,
    })
}

impl SubdivisionSpec {
    pub fn square_count(&self) -> usize {
        self.side_count * self.side_count
    }

    pub fn window_side(&self) -> f64 {
        (PI * self.rho).sqrt()
    }

    pub fn sub_side(&self) -> f64 {
        self.window_side() / self.side_count as f64
    }

    pub fn diagonal(&self) -> f64 {
        std::f64::consts::SQRT_2 * self.sub_side()
    }

    pub fn threshold(&self) -> f64 {
        threshold_v(self.rho, self.tau, 1.0)
    }

    /// Neighborhood radius `rho^(beta/2)` in grid units.
    pub fn neighborhood_radius(&self) -> f64 {
        self.rho.powf(self.beta / 2.0)
    }

    pub fn contains(&self, i: GridIndex) -> bool {
        (1..=self.side_count).contains(&i.i1) && (1..=self.side_count).contains(&i.i2)
    }

    /// The closed sub-square with index `i`, in window coordinates centered
    /// at the origin.
    pub fn square(&self, i: GridIndex) -> Result<ConvexPolygon, ChenSteinError> {
        if !self.contains(i) {
            return Err(ChenSteinError::OutOfGrid(i.i1, i.i2));
        }
        let s = self.sub_side();
        let x0 = -self.window_side() / 2.0 + (i.i1 - 1) as f64 * s;
        let y0 = -self.window_side() / 2.0 + (i.i2 - 1) as f64 * s;
        Ok(ConvexPolygon::rectangle(x0, y0, x0 + s, y0 + s)?)
    }

    /// Sub-square containing `pt` (half-open cells, last row/column closed).
    pub fn locate(&self, pt: Point) -> Option<GridIndex> {
        let half = self.window_side() / 2.0;
        let s = self.sub_side();
        let coord = |x: f64| -> Option<usize> {
            if !(-half..=half).contains(&x) {
                return None;
            }
            let k = ((x + half) / s).floor() as usize;
            Some(k.min(self.side_count - 1) + 1)
        };
        Some(GridIndex::new(coord(pt.x)?, coord(pt.y)?))
    }
}

/// Whether the sub-square diagonal is strictly below the threshold, so that
/// a sub-square holds at most one incenter of an exceeding cell.
pub fn rho0_satisfied(spec: &SubdivisionSpec) -> bool {
    spec.threshold() > spec.diagonal()
}

/// `S(i, r)`: grid indices within Chebyshev distance `r` of `i`, row-major.
pub fn neighborhood(spec: &SubdivisionSpec, i: GridIndex, r: f64) -> Vec<GridIndex> {
    if !spec.contains(i) || r < 0.0 {
        return Vec::new();
    }
    let reach = r.floor() as usize;
    let lo1 = i.i1.saturating_sub(reach).max(1);
    let hi1 = (i.i1 + reach).min(spec.side_count);
    let lo2 = i.i2.saturating_sub(reach).max(1);
    let hi2 = (i.i2 + reach).min(spec.side_count);
    (lo1..=hi1)
        .flat_map(|a| (lo2..=hi2).map(move |b| GridIndex::new(a, b)))
        .collect()
}

/// `p_i = a(i) gamma_1 exp(-2 v)`, which equals `tau / |V|`.
pub fn p_i_analytic(spec: &SubdivisionSpec) -> Result<f64, ChenSteinError> {
    if !rho0_satisfied(spec) {
        return Err(ChenSteinError::BelowRho0 {
            diagonal: spec.diagonal(),
            threshold: spec.threshold(),
        });
    }
    Ok(spec.cell_area * cell_intensity(1.0) * (-2.0 * spec.threshold()).exp())
}

/// `tau^2 / |V| * (2 rho^(beta/2) + 1)^2`.
pub fn b1_bound(spec: &SubdivisionSpec) -> f64 {
    let reach = 2.0 * spec.neighborhood_radius() + 1.0;
    spec.tau * spec.tau / spec.square_count() as f64 * reach * reach
}

/// Number of exceedances (inradius above the threshold) per sub-square, for
/// a list of `(incenter, inradius)` pairs.
pub fn exceedances_per_square(
    spec: &SubdivisionSpec,
    records: impl IntoIterator<Item = (Point, f64)>,
) -> std::collections::BTreeMap<GridIndex, usize> {
    let v = spec.threshold();
    let mut out = std::collections::BTreeMap::new();
    for (c, r) in records {
        if r > v {
            if let Some(idx) = spec.locate(c) {
                *out.entry(idx).or_insert(0) += 1;
            }
        }
    }
    out
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct PairEstimate {
    /// Estimated `P(M_i > v, M_j > v)`.
    pub estimate: f64,
    pub stderr: f64,
    pub p_i: f64,
    pub p_j: f64,
    pub replications: usize,
}

/// Monte Carlo estimate of the joint exceedance probability of sub-squares
/// `i` and `j`. Each replication simulates the bounding box of the two
/// squares grown by `margin` (default `4 v + 2`) on its own random stream.
pub fn estimate_pair_exceedance(
    spec: &SubdivisionSpec,
    i: GridIndex,
    j: GridIndex,
    replications: usize,
    master_seed: u64,
    margin: Option<f64>,
) -> Result<PairEstimate, ChenSteinError> {
    if i == j {
        return Err(ChenSteinError::SameSquare);
    }
    if replications < MIN_PAIR_REPLICATIONS {
        return Err(ChenSteinError::TooFewReplications(replications));
    }
    let sq_i = spec.square(i)?;
    let sq_j = spec.square(j)?;
    let v = spec.threshold();
    let m = margin.unwrap_or_else(|| default_margin(v));
    let (lo_i, hi_i) = sq_i.bounding_box();
    let (lo_j, hi_j) = sq_j.bounding_box();
    let window = ConvexPolygon::rectangle(
        lo_i.x.min(lo_j.x) - m,
        lo_i.y.min(lo_j.y) - m,
        hi_i.x.max(hi_j.x) + m,
        hi_i.y.max(hi_j.y) + m,
    )?;

    let hits = (0..replications)
        .into_par_iter()
        .map(|rep| -> Result<(bool, bool), ChenSteinError> {
            let tess = simulate(&window, 1.0, &mut stream(master_seed, rep as u64))?;
            let exceeds_in = |sq: &ConvexPolygon| {
                tess.cells
                    .iter()
                    .any(|c| c.inradius > v && sq.contains(c.incenter))
            };
            Ok((exceeds_in(&sq_i), exceeds_in(&sq_j)))
        })
        .collect::<Result<Vec<_>, _>>()?;

    let n = replications as f64;
    let both = hits.iter().filter(|(a, b)| *a && *b).count() as f64 / n;
    let p_i = hits.iter().filter(|(a, _)| *a).count() as f64 / n;
    let p_j = hits.iter().filter(|(_, b)| *b).count() as f64 / n;
    Ok(PairEstimate {
        estimate: both,
        stderr: (both * (1.0 - both) / n).sqrt(),
        p_i,
        p_j,
        replications,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_abs_diff_eq;

    #[test]
    fn subdivision_example() {
        let spec = build_subdivision(100.0, 2.0, 0.5).unwrap();
        assert_eq!(spec.side_count, 14);
        assert_eq!(spec.square_count(), 196);
        assert_abs_diff_eq!(spec.cell_area, 1.602_853_394_688_67, epsilon = 1e-12);
        assert_abs_diff_eq!(spec.cell_area * 196.0, PI * 100.0, epsilon = 1e-10);

        let edge = build_subdivision(std::f64::consts::E.powf(std::f64::consts::E) + 1e-6, 1.0, 0.5).unwrap();
        assert!(edge.side_count >= 1);
        assert!(matches!(build_subdivision(2.0, 1.0, 0.5), Err(ChenSteinError::RhoTooSmall(_))));
        assert!(build_subdivision(100.0, 1.0, 1.0).is_err());
        assert!(build_subdivision(100.0, 0.0, 0.5).is_err());
    }

    #[test]
    fn rho0_examples() {
        let spec = build_subdivision(100.0, 2.0, 0.5).unwrap();
        assert_abs_diff_eq!(spec.threshold(), 1.956_011_502_714_073, epsilon = 1e-12);
        assert_abs_diff_eq!(spec.diagonal(), 1.790_448_767_593_572, epsilon = 1e-12);
        assert!(rho0_satisfied(&spec));
        assert!(!rho0_satisfied(&build_subdivision(100.0, 100.0, 0.5).unwrap()));
    }

    #[test]
    fn rho0_holds_for_all_large_rho() {
        // The floor in the side count makes the condition flicker for small
        // rho (true just above e, where ln ln rho vanishes, then false, then
        // true again); past a few hundred it stays true.
        for tau in [0.5, 1.0, 2.0, 5.0] {
            for k in 0..1400 {
                let rho = 1e3 * 1.005f64.powi(k * 2);
                assert!(
                    rho0_satisfied(&build_subdivision(rho, tau, 0.5).unwrap()),
                    "tau {tau}: fails at rho {rho}"
                );
            }
        }
        let at = |rho: f64| rho0_satisfied(&build_subdivision(rho, 1.0, 0.5).unwrap());
        assert_eq!([at(20.0), at(26.0), at(30.0), at(33.0)], [false, true, false, true]);
    }

    #[test]
    fn neighborhood_examples() {
        let spec = build_subdivision(100.0, 2.0, 0.5).unwrap();
        let i = GridIndex::new(5, 6);
        assert_eq!(neighborhood(&spec, i, 0.0), vec![i]);
        assert_eq!(neighborhood(&spec, i, 1.0).len(), 9);
        assert_eq!(neighborhood(&spec, GridIndex::new(1, 1), 1.0).len(), 4);
        for r in [0.0, 1.5, 2.0, 3.7, 20.0] {
            for a in 1..=14 {
                for b in 1..=14 {
                    let n = neighborhood(&spec, GridIndex::new(a, b), r);
                    let cap = 2 * r.floor() as usize + 1;
                    assert!(n.len() <= cap * cap);
                    assert!(n.iter().all(|j| j.chebyshev(GridIndex::new(a, b)) as f64 <= r));
                }
            }
        }
        assert_eq!(neighborhood(&spec, GridIndex::new(7, 7), 3.0).len(), 49);
    }

    #[test]
    fn p_i_examples() {
        let spec = build_subdivision(100.0, 2.0, 0.5).unwrap();
        let p = p_i_analytic(&spec).unwrap();
        assert_abs_diff_eq!(p, 2.0 / 196.0, epsilon = 1e-15);
        assert_abs_diff_eq!(p * spec.square_count() as f64, 2.0, epsilon = 1e-13);
        assert!(matches!(
            p_i_analytic(&build_subdivision(100.0, 60.0, 0.5).unwrap()),
            Err(ChenSteinError::BelowRho0 { .. })
        ));
    }

    #[test]
    fn b1_examples() {
        let spec = build_subdivision(100.0, 2.0, 0.5).unwrap();
        assert_abs_diff_eq!(b1_bound(&spec), 1.094_879_808_993_337, epsilon = 1e-12);
        let mut prev = f64::INFINITY;
        for rho in [1e3, 1e4, 1e5, 1e6] {
            let b = b1_bound(&build_subdivision(rho, 1.0, 0.5).unwrap());
            assert!(b < prev);
            prev = b;
        }
        assert!(prev < 0.004);
        let lo = b1_bound(&build_subdivision(1e4, 1.0, 0.3).unwrap());
        let hi = b1_bound(&build_subdivision(1e4, 1.0, 0.9).unwrap());
        assert!(hi > lo);
    }

    #[test]
    fn b1_dominates_exact_double_sum() {
        for (rho, tau, beta) in [(100.0, 2.0, 0.5), (500.0, 1.0, 0.3), (2000.0, 3.0, 0.7)] {
            let spec = build_subdivision(rho, tau, beta).unwrap();
            let p = p_i_analytic(&spec).unwrap();
            let r = spec.neighborhood_radius();
            let mut sum = 0.0;
            for a in 1..=spec.side_count {
                for b in 1..=spec.side_count {
                    sum += neighborhood(&spec, GridIndex::new(a, b), r).len() as f64 * p * p;
                }
            }
            assert!(b1_bound(&spec) >= sum);
        }
    }

    #[test]
    fn locate_and_square_agree() {
        let spec = build_subdivision(100.0, 2.0, 0.5).unwrap();
        let idx = GridIndex::new(3, 11);
        let sq = spec.square(idx).unwrap();
        assert_eq!(spec.locate(sq.centroid()), Some(idx));
        assert_eq!(spec.locate(Point::new(100.0, 0.0)), None);
        let half = spec.window_side() / 2.0;
        assert_eq!(spec.locate(Point::new(half, half)), Some(GridIndex::new(14, 14)));
        assert!(spec.square(GridIndex::new(0, 1)).is_err());
    }

    #[test]
    fn pair_estimator_preconditions_and_bounds() {
        let spec = build_subdivision(25.0, 5.0, 0.5).unwrap();
        let i = GridIndex::new(1, 1);
        assert!(matches!(
            estimate_pair_exceedance(&spec, i, i, 200, 0, None),
            Err(ChenSteinError::SameSquare)
        ));
        assert!(matches!(
            estimate_pair_exceedance(&spec, i, GridIndex::new(1, 2), 10, 0, None),
            Err(ChenSteinError::TooFewReplications(10))
        ));
        let est = estimate_pair_exceedance(&spec, i, GridIndex::new(1, 2), 400, 3, None).unwrap();
        assert!(est.estimate >= 0.0);
        assert!(est.estimate <= est.p_i.min(est.p_j));
    }
}
