//! Closed-form laws: typical-cell inradius, cell intensity, Poisson and
//! Gumbel limits, two-disk avoidance probability of the skeleton, total
//! variation distance and the Arratia-Goldstein-Gordon bound.

use std::f64::consts::PI;

use serde::{Deserialize, Serialize};

use crate::linemeasure::{
    lambda_conv_two_disks, lambda_disk, lambda_separating_disks, LineMeasureError,
};

/// Tail mass below which a Poisson pmf is truncated.
pub const PMF_TAIL_TOL: f64 = 1e-12;

/// Constant of the two-disk avoidance bound, `2 / (2 - 4/pi)`.
pub const AVOIDANCE_ETA: f64 = 2.0 / (2.0 - 4.0 / PI);

/// Inradius law of the typical cell at time `t`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct TypicalCellLaw {
    pub t: f64,
}

impl TypicalCellLaw {
    pub fn new(t: f64) -> Self {
        assert!(t > 0.0, "time must be positive");
        Self { t }
    }

    pub fn survival(&self, v: f64) -> f64 {
        typical_inradius_survival(self.t, v)
    }

    pub fn intensity(&self) -> f64 {
        cell_intensity(self.t)
    }
}

/// `P(R > v) = exp(-2 t v)` for the typical cell.
pub fn typical_inradius_survival(t: f64, v: f64) -> f64 {
    (-2.0 * t * v.max(0.0)).exp()
}

/// Mean number of cells per unit area, `t^2 / pi`.
pub fn cell_intensity(t: f64) -> f64 {
    t * t / PI
}

/// `exp(-tau) tau^r / r!`, evaluated in log space.
pub fn poisson_pmf(tau: f64, r: u64) -> f64 {
    if r == 0 {
        return (-tau).exp();
    }
    let rf = r as f64;
    (rf * tau.ln() - tau - ln_factorial(r)).exp()
}

/// `P(Poisson(tau) <= k)`.
pub fn poisson_cdf(tau: f64, k: u64) -> f64 {
    (0..=k).map(|r| poisson_pmf(tau, r)).sum()
}

fn ln_factorial(r: u64) -> f64 {
    if r < 64 {
        (2..=r).map(|k| (k as f64).ln()).sum()
    } else {
        // Stirling series, error below 1e-15 relative for r >= 64
        let x = r as f64;
        x * x.ln() - x + 0.5 * (2.0 * PI * x).ln() + 1.0 / (12.0 * x) - 1.0 / (360.0 * x.powi(3))
    }
}

/// A Poisson law with its adaptively truncated pmf.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PoissonPmf {
    pub tau: f64,
    pub probs: Vec<f64>,
    /// Mass beyond the last entry of `probs`.
    pub tail: f64,
}

impl PoissonPmf {
    /// Truncates where the remaining tail is below [`PMF_TAIL_TOL`], but never
    /// before index `min_len - 1`.
    pub fn truncated(tau: f64, min_len: usize) -> Self {
        assert!(tau > 0.0, "Poisson mean must be positive");
        let mut probs = Vec::new();
        let mut cum = 0.0;
        let mut r = 0u64;
        loop {
            let p = poisson_pmf(tau, r);
            probs.push(p);
            cum += p;
            r += 1;
            let past_mode = r as f64 > tau;
            if probs.len() >= min_len && past_mode && 1.0 - cum < PMF_TAIL_TOL {
                break;
            }
        }
        let tail = (1.0 - cum).max(0.0);
        Self { tau, probs, tail }
    }
}

/// `exp(-exp(-u))`.
pub fn gumbel_limit(u: f64) -> f64 {
    (-(-u).exp()).exp()
}

/// Probability that the time-1 skeleton misses two disks of radius `r` at
/// center distance `d >= 2r`.
///
/// With `L1 = L2` the single-disk masses, `Lc` the hull mass and `Ls` the
/// separating mass, the value is
/// `exp(-Lc) + Ls * (exp(-Lc) - exp(-L1 - L2)) / (L1 + L2 - Lc)`.
/// Writing `delta = L1 + L2 - Lc`, the fraction equals
/// `exp(-L1 - L2) * expm1(delta) / delta`, which is smooth through
/// `delta = 0` (where it tends to `exp(-L1 - L2)`).
pub fn two_disk_avoidance(r: f64, d: f64) -> Result<f64, LineMeasureError> {
    let sep = lambda_separating_disks(r, d)?.value();
    let conv = lambda_conv_two_disks(r, d).value();
    let single = lambda_disk(r).value();
    let delta = 2.0 * single - conv;
    let ratio = if delta.abs() < 1e-8 {
        1.0 + delta / 2.0 + delta * delta / 6.0
    } else {
        delta.exp_m1() / delta
    };
    Ok((-conv).exp() + sep * (-2.0 * single).exp() * ratio)
}

/// Upper bound `eta * exp(-2 (1 + 2/pi) r)` on [`two_disk_avoidance`].
pub fn two_disk_avoidance_bound(r: f64) -> f64 {
    AVOIDANCE_ETA * (-2.0 * (1.0 + 2.0 / PI) * r).exp()
}

/// `sum_r |p_r - q_r|`, the factor-2 total variation distance on the
/// naturals. Missing entries count as zero.
pub fn tv_distance(p: &[f64], q: &[f64]) -> f64 {
    let n = p.len().max(q.len());
    (0..n)
        .map(|r| {
            let a = p.get(r).copied().unwrap_or(0.0);
            let b = q.get(r).copied().unwrap_or(0.0);
            (a - b).abs()
        })
        .sum()
}

/// Total variation between an empirical pmf and a truncated Poisson law;
/// the Poisson tail mass is added as an error bound.
pub fn tv_to_poisson(empirical: &[f64], tau: f64) -> f64 {
    let poisson = PoissonPmf::truncated(tau, empirical.len());
    tv_distance(empirical, &poisson.probs) + poisson.tail
}

/// `2 ((b1 + b2) (1 - exp(-lambda)) / lambda + b3 min(1, 1.4 / sqrt(lambda)))`.
pub fn agg_bound(b1: f64, b2: f64, b3: f64, lambda: f64) -> f64 {
    assert!(lambda > 0.0, "lambda must be positive");
    2.0 * ((b1 + b2) * (-(-lambda).exp_m1()) / lambda + b3 * (1.4 / lambda.sqrt()).min(1.0))
}
