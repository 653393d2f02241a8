//! Monte Carlo harness: replication loops over simulated windows and the
//! summaries compared against the limit laws.
//!
//! Replication `rep` of the `k`-th configured setting draws from stream
//! `(k << 40) | rep` of the master seed (see [`crate::rng`]). Replications
//! run on the rayon pool and are collected in index order, so every result
//! is independent of the number of worker threads.

use std::time::Instant;

use rand::Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::extremes::{
    build_window, collect_records, default_margin, threshold_v, ExtremesError, InradiusRecordSet,
    ObservationWindow,
};
use crate::geometry::{ConvexPolygon, Disk, GeometryError, Point};
use crate::laws::{
    gumbel_limit, poisson_cdf, tv_to_poisson, two_disk_avoidance, two_disk_avoidance_bound,
    typical_inradius_survival,
};
use crate::linemeasure::LineMeasureError;
use crate::rng::{stream, BOOTSTRAP_STREAM};
use crate::stats::{
    binomial_stderr, empirical_pmf, ks_statistic, mean, ratio_estimate, stderr_of_mean, variance,
};
use crate::stit::{scale, simulate, StitError, Tessellation};

/// Bootstrap resamples for the TV confidence interval.
pub const BOOTSTRAP_RESAMPLES: usize = 1000;

/// Contamination rate above which a run is rejected.
pub const MAX_CONTAMINATION: f64 = 0.2;

#[derive(Debug, Error)]
pub enum ExperimentError {
    #[error("invalid configuration: {0}")]
    Config(String),
    #[error("margin {margin:.3} too small at rho = {rho}: {:.1}% of records touch the simulation boundary; use a larger margin", rate * 100.0)]
    MarginTooSmall { rho: f64, margin: f64, rate: f64 },
    #[error("order-statistic duality violated in replication {rep} (k = {k})")]
    DualityViolated { rep: usize, k: usize },
    #[error(transparent)]
    Stit(#[from] StitError),
    #[error(transparent)]
    Extremes(#[from] ExtremesError),
    #[error(transparent)]
    Geometry(#[from] GeometryError),
    #[error(transparent)]
    LineMeasure(#[from] LineMeasureError),
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub enum MarginRule {
    /// `4 v + 2` with `v` the largest threshold the experiment uses.
    Auto,
    Explicit(f64),
}

impl MarginRule {
    pub fn resolve(self, v: f64) -> f64 {
        match self {
            MarginRule::Auto => default_margin(v),
            MarginRule::Explicit(m) => m,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ExperimentConfig {
    pub rho_list: Vec<f64>,
    pub tau: f64,
    pub t: f64,
    pub replications: usize,
    pub master_seed: u64,
    pub margin_rule: MarginRule,
    pub beta: f64,
    pub filter_contaminated: bool,
}

impl Default for ExperimentConfig {
    fn default() -> Self {
        Self {
            rho_list: vec![25.0, 50.0, 100.0, 200.0],
            tau: 2.0,
            t: 1.0,
            replications: 2000,
            master_seed: 0,
            margin_rule: MarginRule::Auto,
            beta: 0.5,
            filter_contaminated: false,
        }
    }
}

impl ExperimentConfig {
    pub fn validate(&self) -> Result<(), ExperimentError> {
        let bad = |m: &str| Err(ExperimentError::Config(m.to_string()));
        if self.replications == 0 {
            return bad("replications must be at least 1");
        }
        if !(self.tau > 0.0 && self.t > 0.0) {
            return bad("tau and t must be positive");
        }
        if self.rho_list.is_empty() {
            return bad("rho list is empty");
        }
        if let Some(rho) = self.rho_list.iter().find(|&&r| !(r > self.tau)) {
            return bad(&format!("rho = {rho} must exceed tau = {}", self.tau));
        }
        if let MarginRule::Explicit(m) = self.margin_rule {
            if !(m >= 0.0) {
                return bad("margin must be non-negative");
            }
        }
        Ok(())
    }
}

fn stream_index(setting: usize, rep: usize) -> u64 {
    ((setting as u64) << 40) | rep as u64
}

/// Simulates `replications` independent windows `W_rho (+) margin` at time
/// `t` and maps each record set through `f`, in replication order.
pub fn replicate<T, F>(
    window: &ObservationWindow,
    margin: f64,
    replications: usize,
    master_seed: u64,
    setting: usize,
    f: F,
) -> Result<Vec<T>, ExperimentError>
where
    T: Send,
    F: Fn(usize, &InradiusRecordSet) -> T + Sync,
{
    let sim_window = window.with_margin(margin)?;
    (0..replications)
        .into_par_iter()
        .map(|rep| {
            let mut rng = stream(master_seed, stream_index(setting, rep));
            let tess = simulate(&sim_window, window.t, &mut rng)?;
            let records = collect_records(&tess, window)?;
            Ok(f(rep, &records))
        })
        .collect()
}

fn check_contamination(rho: f64, margin: f64, contaminated: usize, total: usize) -> Result<f64, ExperimentError> {
    let rate = if total == 0 { 0.0 } else { contaminated as f64 / total as f64 };
    if rate > MAX_CONTAMINATION {
        return Err(ExperimentError::MarginTooSmall { rho, margin, rate });
    }
    Ok(rate)
}

/// Distribution summary of the exceedance counts of one setting.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ExceedanceSummary {
    pub counts: Vec<usize>,
    pub pmf: Vec<f64>,
    pub mean: f64,
    pub mean_stderr: f64,
    pub variance: f64,
    /// Plug-in `sum |p_hat - q|` against Poisson(tau), Poisson tail included.
    pub tv: f64,
    pub tv_bootstrap_mean: f64,
    /// `2 tv - tv_bootstrap_mean`, clamped to `[0, 2]`.
    pub tv_bias_corrected: f64,
    /// `tv +- 1.96` bootstrap standard deviations, clamped to `[0, 2]`.
    pub tv_ci: (f64, f64),
}

fn summarize_counts<R: Rng>(counts: Vec<usize>, tau: f64, rng: &mut R) -> ExceedanceSummary {
    let as_f: Vec<f64> = counts.iter().map(|&c| c as f64).collect();
    let pmf = empirical_pmf(&counts);
    let tv = tv_to_poisson(&pmf, tau).min(2.0);
    let n = counts.len();
    let mut boot = Vec::with_capacity(BOOTSTRAP_RESAMPLES);
    let mut resample = vec![0usize; n];
    for _ in 0..BOOTSTRAP_RESAMPLES {
        for slot in resample.iter_mut() {
            *slot = counts[rng.random_range(0..n)];
        }
        boot.push(tv_to_poisson(&empirical_pmf(&resample), tau).min(2.0));
    }
    let boot_mean = mean(&boot);
    let boot_sd = variance(&boot).sqrt();
    ExceedanceSummary {
        mean: mean(&as_f),
        mean_stderr: stderr_of_mean(&as_f),
        variance: variance(&as_f),
        pmf,
        tv,
        tv_bootstrap_mean: boot_mean,
        tv_bias_corrected: (2.0 * tv - boot_mean).clamp(0.0, 2.0),
        tv_ci: ((tv - 1.96 * boot_sd).max(0.0), (tv + 1.96 * boot_sd).min(2.0)),
        counts,
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RhoExceedance {
    pub rho: f64,
    pub threshold: f64,
    pub margin: f64,
    /// All records with incenter in the window.
    pub all: ExceedanceSummary,
    /// Records whose cell does not touch the simulation boundary.
    pub clean: ExceedanceSummary,
    pub contamination_rate: f64,
    pub records_total: usize,
}

impl RhoExceedance {
    pub fn primary(&self, filter_contaminated: bool) -> &ExceedanceSummary {
        if filter_contaminated {
            &self.clean
        } else {
            &self.all
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ExperimentResult {
    pub tau: f64,
    pub t: f64,
    pub replications: usize,
    pub master_seed: u64,
    pub filter_contaminated: bool,
    pub per_rho: Vec<RhoExceedance>,
    /// Not deterministic; excluded from serialized output.
    #[serde(skip)]
    pub wall_seconds: f64,
}

/// Exceedance counts at `v_rho(tau)` for every configured `rho`, their
/// empirical pmf and total variation distance to Poisson(tau).
pub fn run_exceedance_experiment(cfg: &ExperimentConfig) -> Result<ExperimentResult, ExperimentError> {
    cfg.validate()?;
    let start = Instant::now();
    let mut per_rho = Vec::with_capacity(cfg.rho_list.len());
    for (k, &rho) in cfg.rho_list.iter().enumerate() {
        let window = build_window(rho, cfg.t)?;
        let v = threshold_v(rho, cfg.tau, cfg.t);
        let margin = cfg.margin_rule.resolve(v);
        let per_rep = replicate(&window, margin, cfg.replications, cfg.master_seed, k, |_, recs| {
            let all = recs.exceedance_count(v);
            let clean = recs.records.iter().filter(|r| !r.contaminated && r.inradius > v).count();
            (all, clean, recs.contaminated_count(), recs.len())
        })?;
        let contaminated: usize = per_rep.iter().map(|r| r.2).sum();
        let total: usize = per_rep.iter().map(|r| r.3).sum();
        let rate = check_contamination(rho, margin, contaminated, total)?;
        let mut boot_rng = stream(cfg.master_seed, BOOTSTRAP_STREAM - k as u64);
        let all = summarize_counts(per_rep.iter().map(|r| r.0).collect(), cfg.tau, &mut boot_rng);
        let clean = summarize_counts(per_rep.iter().map(|r| r.1).collect(), cfg.tau, &mut boot_rng);
        per_rho.push(RhoExceedance {
            rho,
            threshold: v,
            margin,
            all,
            clean,
            contamination_rate: rate,
            records_total: total,
        });
    }
    Ok(ExperimentResult {
        tau: cfg.tau,
        t: cfg.t,
        replications: cfg.replications,
        master_seed: cfg.master_seed,
        filter_contaminated: cfg.filter_contaminated,
        per_rho,
        wall_seconds: start.elapsed().as_secs_f64(),
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct OrderStatRow {
    pub rho: f64,
    pub k: usize,
    pub threshold: f64,
    /// Frequency of replications with `M^(k) <= v_rho`.
    pub empirical: f64,
    pub stderr: f64,
    /// `sum_{r < k} exp(-tau) tau^r / r!`.
    pub limit: f64,
}

/// Frequencies of `M^(k) <= v_rho` for `k = 1..=k_max`, checking in every
/// replication that `M^(k) <= v_rho` exactly when `N(v_rho) <= k - 1`.
pub fn run_order_statistics(cfg: &ExperimentConfig, k_max: usize) -> Result<Vec<OrderStatRow>, ExperimentError> {
    cfg.validate()?;
    if k_max == 0 {
        return Err(ExperimentError::Config("k_max must be at least 1".into()));
    }
    let mut rows = Vec::new();
    for (s, &rho) in cfg.rho_list.iter().enumerate() {
        let window = build_window(rho, cfg.t)?;
        let v = threshold_v(rho, cfg.tau, cfg.t);
        let margin = cfg.margin_rule.resolve(v);
        let per_rep = replicate(&window, margin, cfg.replications, cfg.master_seed, s, |_, recs| {
            let recs = if cfg.filter_contaminated { recs.clean() } else { recs.clone() };
            (recs.top_k(k_max), recs.exceedance_count(v), recs.contaminated_count(), recs.len())
        })?;
        check_contamination(
            rho,
            margin,
            per_rep.iter().map(|r| r.2).sum(),
            per_rep.iter().map(|r| r.3).sum(),
        )?;
        for k in 1..=k_max {
            let mut below = 0usize;
            for (rep, (top, n, _, _)) in per_rep.iter().enumerate() {
                let m_k = top[k - 1];
                if (m_k <= v) != (*n < k) {
                    return Err(ExperimentError::DualityViolated { rep, k });
                }
                below += usize::from(m_k <= v);
            }
            let p = below as f64 / cfg.replications as f64;
            rows.push(OrderStatRow {
                rho,
                k,
                threshold: v,
                empirical: p,
                stderr: binomial_stderr(p, cfg.replications),
                limit: poisson_cdf(cfg.tau, (k - 1) as u64),
            });
        }
    }
    Ok(rows)
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct GumbelRow {
    pub rho: f64,
    pub u: f64,
    /// `(ln rho + u) / (2t)`.
    pub threshold: f64,
    pub empirical: f64,
    pub stderr: f64,
    pub limit: f64,
}

/// Empirical law of the rescaled maximum against `exp(-exp(-u))`. One set of
/// replications per `rho` serves the whole grid. The configured `tau` is not
/// used; the auto margin follows the largest threshold on the grid.
pub fn run_gumbel_curve(cfg: &ExperimentConfig, u_grid: &[f64]) -> Result<Vec<GumbelRow>, ExperimentError> {
    if u_grid.is_empty() || u_grid.iter().any(|u| !u.is_finite()) {
        return Err(ExperimentError::Config("u grid must be finite and non-empty".into()));
    }
    if cfg.replications == 0 || !(cfg.t > 0.0) || cfg.rho_list.iter().any(|&r| !(r > 0.0)) {
        return Err(ExperimentError::Config("need replications >= 1, t > 0, rho > 0".into()));
    }
    let mut rows = Vec::new();
    for (s, &rho) in cfg.rho_list.iter().enumerate() {
        let window = build_window(rho, cfg.t)?;
        let thresholds: Vec<f64> = u_grid.iter().map(|u| (rho.ln() + u) / (2.0 * cfg.t)).collect();
        let v_max = thresholds.iter().copied().fold(f64::NEG_INFINITY, f64::max);
        let margin = cfg.margin_rule.resolve(v_max);
        let per_rep = replicate(&window, margin, cfg.replications, cfg.master_seed, s, |_, recs| {
            let recs = if cfg.filter_contaminated { recs.clean() } else { recs.clone() };
            (recs.order_statistic(1), recs.contaminated_count(), recs.len())
        })?;
        check_contamination(
            rho,
            margin,
            per_rep.iter().map(|r| r.1).sum(),
            per_rep.iter().map(|r| r.2).sum(),
        )?;
        for (&u, &v) in u_grid.iter().zip(&thresholds) {
            let below = per_rep.iter().filter(|r| r.0 <= v).count();
            let p = below as f64 / cfg.replications as f64;
            rows.push(GumbelRow {
                rho,
                u,
                threshold: v,
                empirical: p,
                stderr: binomial_stderr(p, cfg.replications),
                limit: gumbel_limit(u),
            });
        }
    }
    Ok(rows)
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SurvivalRow {
    pub v: f64,
    pub empirical: f64,
    pub stderr: f64,
    pub theory: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TypicalCheck {
    pub rho: f64,
    pub t: f64,
    pub rows: Vec<SurvivalRow>,
    /// KS distance of the pooled inradii to Exp(2t).
    pub ks_statistic: f64,
    pub records: usize,
    /// Pooled inradii, ascending.
    pub sample: Vec<f64>,
}

/// Pools the inradii of non-contaminated cells with incenter in `W_rho`
/// (first configured `rho`) and compares their survival with `exp(-2tv)`.
/// Standard errors treat replications as independent clusters.
pub fn run_typical_inradius_check(cfg: &ExperimentConfig, v_grid: &[f64]) -> Result<TypicalCheck, ExperimentError> {
    cfg.validate()?;
    let rho = cfg.rho_list[0];
    let window = build_window(rho, cfg.t)?;
    let margin = cfg.margin_rule.resolve(threshold_v(rho, cfg.tau, cfg.t));
    let per_rep = replicate(&window, margin, cfg.replications, cfg.master_seed, 0, |_, recs| {
        recs.clean().inradii()
    })?;
    let den: Vec<f64> = per_rep.iter().map(|r| r.len() as f64).collect();
    let rows = v_grid
        .iter()
        .map(|&v| {
            let num: Vec<f64> = per_rep.iter().map(|r| r.iter().filter(|&&x| x > v).count() as f64).collect();
            let (p, se) = ratio_estimate(&num, &den);
            SurvivalRow {
                v,
                empirical: p,
                stderr: se,
                theory: typical_inradius_survival(cfg.t, v),
            }
        })
        .collect();
    let mut sample: Vec<f64> = per_rep.into_iter().flatten().collect();
    sample.sort_by(f64::total_cmp);
    let rate = 2.0 * cfg.t;
    let ks = ks_statistic(&sample, |x| 1.0 - (-rate * x).exp());
    Ok(TypicalCheck {
        rho,
        t: cfg.t,
        rows,
        ks_statistic: ks,
        records: sample.len(),
        sample,
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct IntensityCheck {
    pub t: f64,
    pub density: f64,
    pub stderr: f64,
    pub theory: f64,
}

/// Density of cells with incenter at least `inner_margin` inside a square
/// window of side `side` and without boundary contact.
pub fn run_intensity_check(
    side: f64,
    t: f64,
    inner_margin: f64,
    replications: usize,
    master_seed: u64,
) -> Result<IntensityCheck, ExperimentError> {
    if !(side > 2.0 * inner_margin) || replications < 2 {
        return Err(ExperimentError::Config("need side > 2 inner_margin and >= 2 replications".into()));
    }
    let window = ConvexPolygon::square(Point::default(), side)?;
    let inner = ConvexPolygon::square(Point::default(), side - 2.0 * inner_margin)?;
    let densities = (0..replications)
        .into_par_iter()
        .map(|rep| -> Result<f64, ExperimentError> {
            let tess = simulate(&window, t, &mut stream(master_seed, rep as u64))?;
            let n = tess
                .cells
                .iter()
                .filter(|c| !c.touches_sim_boundary && inner.contains(c.incenter))
                .count();
            Ok(n as f64 / inner.area())
        })
        .collect::<Result<Vec<_>, _>>()?;
    Ok(IntensityCheck {
        t,
        density: mean(&densities),
        stderr: stderr_of_mean(&densities),
        theory: crate::laws::cell_intensity(t),
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ScalingRow {
    pub v: f64,
    /// Time-2 simulation scaled by 2.
    pub scaled: f64,
    pub scaled_stderr: f64,
    /// Time-1 simulation on the doubled window.
    pub reference: f64,
    pub reference_stderr: f64,
}

impl ScalingRow {
    pub fn z_score(&self) -> f64 {
        let se = self.scaled_stderr.hypot(self.reference_stderr);
        if se == 0.0 {
            0.0
        } else {
            (self.scaled - self.reference) / se
        }
    }
}

/// Compares inradius survival of `(simulate(W, t = 2), coordinates x 2)`
/// with `simulate(2W, t = 1)`, pooling non-contaminated cells with incenter
/// in the central half of the final window. `W` is the square of side `side`.
pub fn run_scaling_check(
    side: f64,
    replications: usize,
    master_seed: u64,
    v_grid: &[f64],
) -> Result<Vec<ScalingRow>, ExperimentError> {
    let small = ConvexPolygon::square(Point::default(), side)?;
    let large = ConvexPolygon::square(Point::default(), 2.0 * side)?;
    let core = ConvexPolygon::square(Point::default(), side)?;
    let pooled = |tess: &Tessellation| -> Vec<f64> {
        tess.cells
            .iter()
            .filter(|c| !c.touches_sim_boundary && core.contains(c.incenter))
            .map(|c| c.inradius)
            .collect()
    };
    let runs = (0..replications)
        .into_par_iter()
        .map(|rep| -> Result<(Vec<f64>, Vec<f64>), ExperimentError> {
            let fast = simulate(&small, 2.0, &mut stream(master_seed, stream_index(0, rep)))?;
            let slow = simulate(&large, 1.0, &mut stream(master_seed, stream_index(1, rep)))?;
            Ok((pooled(&scale(&fast, 2.0)?), pooled(&slow)))
        })
        .collect::<Result<Vec<_>, _>>()?;
    let survival = |samples: Vec<&Vec<f64>>, v: f64| {
        let num: Vec<f64> = samples.iter().map(|s| s.iter().filter(|&&x| x > v).count() as f64).collect();
        let den: Vec<f64> = samples.iter().map(|s| s.len() as f64).collect();
        ratio_estimate(&num, &den)
    };
    Ok(v_grid
        .iter()
        .map(|&v| {
            let (a, sa) = survival(runs.iter().map(|r| &r.0).collect(), v);
            let (b, sb) = survival(runs.iter().map(|r| &r.1).collect(), v);
            ScalingRow {
                v,
                scaled: a,
                scaled_stderr: sa,
                reference: b,
                reference_stderr: sb,
            }
        })
        .collect())
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct TwoDiskRow {
    pub r: f64,
    pub d: f64,
    pub empirical: f64,
    pub stderr: f64,
    pub ci: (f64, f64),
    /// Closed form at time 1 for the rescaled disks `(t r, t d)`.
    pub closed_form: f64,
    pub bound: f64,
}

/// Frequency with which the skeleton at time `t_sim` misses two disks of
/// radius `r` at center distance `d`, for each `d` in `d_list`. The window is
/// the bounding box of the disks grown by one unit.
pub fn run_two_disk_validation(
    r: f64,
    d_list: &[f64],
    t_sim: f64,
    replications: usize,
    master_seed: u64,
) -> Result<Vec<TwoDiskRow>, ExperimentError> {
    if !(r > 0.0 && t_sim > 0.0) || replications == 0 {
        return Err(ExperimentError::Config("need r > 0, t > 0, replications >= 1".into()));
    }
    let mut rows = Vec::new();
    for (s, &d) in d_list.iter().enumerate() {
        let closed_form = two_disk_avoidance(t_sim * r, t_sim * d)?;
        let pad = 1.0;
        let window = ConvexPolygon::rectangle(-d / 2.0 - r - pad, -r - pad, d / 2.0 + r + pad, r + pad)?;
        let disks = [
            Disk::new(Point::new(-d / 2.0, 0.0), r),
            Disk::new(Point::new(d / 2.0, 0.0), r),
        ];
        let misses = (0..replications)
            .into_par_iter()
            .map(|rep| -> Result<bool, ExperimentError> {
                let tess = simulate(&window, t_sim, &mut stream(master_seed, stream_index(s, rep)))?;
                Ok(disks.iter().all(|disk| !tess.skeleton_meets_disk(disk)))
            })
            .collect::<Result<Vec<_>, _>>()?;
        let p = misses.iter().filter(|&&m| m).count() as f64 / replications as f64;
        let se = binomial_stderr(p, replications);
        rows.push(TwoDiskRow {
            r,
            d,
            empirical: p,
            stderr: se,
            ci: ((p - 1.96 * se).max(0.0), (p + 1.96 * se).min(1.0)),
            closed_form,
            bound: two_disk_avoidance_bound(t_sim * r),
        });
    }
    Ok(rows)
}
