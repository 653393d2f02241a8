#![allow(dead_code)]

use rand::Rng;
use statrs::distribution::{ChiSquared, ContinuousCDF};
use stit_extremes::{ConvexPolygon, Point};

/// Asymptotic Kolmogorov p-value of a one-sample KS distance `d` at sample
/// size `n`, with the usual small-sample correction of the argument.
pub fn ks_pvalue(d: f64, n: usize) -> f64 {
    let en = (n as f64).sqrt();
    let lambda = (en + 0.12 + 0.11 / en) * d;
    if lambda < 0.2 {
        return 1.0;
    }
    let mut sum = 0.0;
    let mut sign = 1.0;
    for j in 1..=100 {
        let term = (-2.0 * (j * j) as f64 * lambda * lambda).exp();
        sum += sign * term;
        if term < 1e-16 {
            break;
        }
        sign = -sign;
    }
    (2.0 * sum).clamp(0.0, 1.0)
}

/// Pearson goodness of fit of `observed` counts against expected
/// probabilities `probs`.
pub fn chi_square_pvalue(observed: &[usize], probs: &[f64]) -> f64 {
    assert_eq!(observed.len(), probs.len());
    let n: usize = observed.iter().sum();
    let stat: f64 = observed
        .iter()
        .zip(probs)
        .map(|(&o, &p)| {
            let e = p * n as f64;
            (o as f64 - e).powi(2) / e
        })
        .sum();
    let dist = ChiSquared::new((observed.len() - 1) as f64).unwrap();
    1.0 - dist.cdf(stat)
}

/// Two-sample z statistic of independent estimates.
pub fn z_score(a: f64, se_a: f64, b: f64, se_b: f64) -> f64 {
    (a - b) / se_a.hypot(se_b)
}

fn hull(mut pts: Vec<Point>) -> Vec<Point> {
    pts.sort_by(|a, b| a.x.total_cmp(&b.x).then(a.y.total_cmp(&b.y)));
    let turn = |o: Point, a: Point, b: Point| (a - o).cross(b - o);
    let mut lower: Vec<Point> = Vec::new();
    for &p in &pts {
        while lower.len() >= 2 && turn(lower[lower.len() - 2], lower[lower.len() - 1], p) <= 0.0 {
            lower.pop();
        }
        lower.push(p);
    }
    let mut upper: Vec<Point> = Vec::new();
    for &p in pts.iter().rev() {
        while upper.len() >= 2 && turn(upper[upper.len() - 2], upper[upper.len() - 1], p) <= 0.0 {
            upper.pop();
        }
        upper.push(p);
    }
    lower.pop();
    upper.pop();
    lower.extend(upper);
    lower
}

/// Convex hull of 4..24 uniform points in a random rectangle, randomly
/// placed and rotated.
pub fn random_convex_polygon<R: Rng>(rng: &mut R) -> ConvexPolygon {
    loop {
        let n = rng.random_range(4..24);
        let w = rng.random_range(0.5..4.0);
        let h = rng.random_range(0.5..4.0);
        let a = rng.random_range(0.0..std::f64::consts::PI);
        let c = Point::new(rng.random_range(-10.0..10.0), rng.random_range(-10.0..10.0));
        let pts = (0..n)
            .map(|_| {
                let x = rng.random_range(-w..w);
                let y = rng.random_range(-h..h);
                c + Point::new(x * a.cos() - y * a.sin(), x * a.sin() + y * a.cos())
            })
            .collect();
        if let Ok(p) = ConvexPolygon::new(hull(pts)) {
            if p.len() >= 3 {
                return p;
            }
        }
    }
}

/// Distance from `pt` to the complement of the polygon (negative outside).
/// Concave on the plane.
pub fn depth(poly: &ConvexPolygon, pt: Point) -> f64 {
    poly.edges()
        .map(|(a, b)| {
            let e = b - a;
            e.cross(pt - a) / e.norm()
        })
        .fold(f64::INFINITY, f64::min)
}

/// Largest inscribed disk by grid branch and bound. `depth` is 1-Lipschitz,
/// so a grid cell of half-diagonal `h` whose center is more than `h` below
/// the best node cannot hold the maximum. Surviving cells are split 2 x 2
/// until they are below `1e-10` of the diameter.
pub fn incircle_by_grid(poly: &ConvexPolygon) -> (Point, f64) {
    let (lo, hi) = poly.bounding_box();
    let side = (hi.x - lo.x).max(hi.y - lo.y);
    let n = 64;
    let mut half = side / (2.0 * n as f64);
    let mut cells: Vec<Point> = (0..n)
        .flat_map(|i| (0..n).map(move |j| (i, j)))
        .map(|(i, j)| lo + Point::new((2 * i + 1) as f64 * half, (2 * j + 1) as f64 * half))
        .collect();
    let stop = poly.diameter() * 1e-10;
    loop {
        let values: Vec<f64> = cells.iter().map(|&c| depth(poly, c)).collect();
        let (best, at) = values
            .iter()
            .zip(&cells)
            .fold((f64::NEG_INFINITY, cells[0]), |acc, (&v, &c)| if v > acc.0 { (v, c) } else { acc });
        if half < stop {
            return (at, best);
        }
        let reach = half * std::f64::consts::SQRT_2;
        let q = half / 2.0;
        cells = cells
            .iter()
            .zip(&values)
            .filter(|(_, &v)| v + reach >= best)
            .flat_map(|(&c, _)| {
                [(-q, -q), (-q, q), (q, -q), (q, q)].map(|(dx, dy)| c + Point::new(dx, dy))
            })
            .collect();
        assert!(cells.len() < 8_000_000, "grid search did not localize");
        half = q;
    }
}
