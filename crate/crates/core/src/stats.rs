//! Small Monte Carlo summaries used by the experiment harness.

pub fn mean(xs: &[f64]) -> f64 {
    if xs.is_empty() {
        return f64::NAN;
    }
    xs.iter().sum::<f64>() / xs.len() as f64
}

/// Unbiased sample variance; zero for fewer than two samples.
pub fn variance(xs: &[f64]) -> f64 {
    if xs.len() < 2 {
        return 0.0;
    }
    let m = mean(xs);
    xs.iter().map(|x| (x - m) * (x - m)).sum::<f64>() / (xs.len() - 1) as f64
}

/// Standard error of the sample mean.
pub fn stderr_of_mean(xs: &[f64]) -> f64 {
    (variance(xs) / xs.len() as f64).sqrt()
}

/// Ratio `sum(num) / sum(den)` over independent clusters (replications),
/// with its linearized standard error. Records within a replication are
/// dependent, so the replication is the sampling unit.
pub fn ratio_estimate(num: &[f64], den: &[f64]) -> (f64, f64) {
    assert_eq!(num.len(), den.len());
    let total: f64 = den.iter().sum();
    if total == 0.0 {
        return (f64::NAN, f64::NAN);
    }
    let ratio = num.iter().sum::<f64>() / total;
    let n = num.len() as f64;
    if num.len() < 2 {
        return (ratio, 0.0);
    }
    let resid: f64 = num
        .iter()
        .zip(den)
        .map(|(a, b)| (a - ratio * b).powi(2))
        .sum();
    (ratio, (resid * n / (n - 1.0)).sqrt() / total)
}

/// Binomial standard error of a frequency.
pub fn binomial_stderr(p: f64, n: usize) -> f64 {
    (p * (1.0 - p) / n as f64).sqrt()
}

/// Empirical pmf of non-negative integer counts.
pub fn empirical_pmf(counts: &[usize]) -> Vec<f64> {
    let max = counts.iter().copied().max().unwrap_or(0);
    let mut pmf = vec![0.0; max + 1];
    for &c in counts {
        pmf[c] += 1.0;
    }
    let n = counts.len() as f64;
    pmf.iter_mut().for_each(|p| *p /= n);
    pmf
}

/// One-sample Kolmogorov-Smirnov statistic of `sample` against `cdf`.
pub fn ks_statistic<F: Fn(f64) -> f64>(sample: &[f64], cdf: F) -> f64 {
    let mut sorted = sample.to_vec();
    sorted.sort_by(f64::total_cmp);
    let n = sorted.len() as f64;
    sorted
        .iter()
        .enumerate()
        .map(|(i, &x)| {
            let f = cdf(x);
            (f - i as f64 / n).max((i + 1) as f64 / n - f)
        })
        .fold(0.0, f64::max)
}

/// `q`-quantile by linear interpolation of the sorted sample.
pub fn quantile(sorted: &[f64], q: f64) -> f64 {
    if sorted.is_empty() {
        return f64::NAN;
    }
    let pos = q.clamp(0.0, 1.0) * (sorted.len() - 1) as f64;
    let lo = pos.floor() as usize;
    let hi = pos.ceil() as usize;
    sorted[lo] + (sorted[hi] - sorted[lo]) * (pos - lo as f64)
}
