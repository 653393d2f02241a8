use stit_extremes::chenstein::{
    build_subdivision, estimate_pair_exceedance, exceedances_per_square, p_i_analytic, rho0_satisfied,
    GridIndex,
};
use stit_extremes::experiments::replicate;
use stit_extremes::extremes::{build_window, default_margin, threshold_v};

#[test]
fn per_square_exceedance_probability() {
    let spec = build_subdivision(100.0, 2.0, 0.5).unwrap();
    let p = p_i_analytic(&spec).unwrap();
    let reps = 10_000;
    let est = estimate_pair_exceedance(&spec, GridIndex::new(5, 5), GridIndex::new(6, 5), reps, 301, None).unwrap();
    let se = (p * (1.0 - p) / reps as f64).sqrt();
    for (name, got) in [("i", est.p_i), ("j", est.p_j)] {
        assert!((got - p).abs() < 3.0 * se, "p_{name}: {got} vs {p}");
    }
    // an incenter of an exceeding cell cannot sit in two adjacent squares,
    // but both squares can hold one
    assert!(est.estimate <= est.p_i.min(est.p_j));
}

#[test]
fn far_squares_look_independent() {
    let spec = build_subdivision(25.0, 5.0, 0.5).unwrap();
    assert!(spec.side_count >= 6);
    let last = spec.side_count;
    let est = estimate_pair_exceedance(&spec, GridIndex::new(1, 1), GridIndex::new(last, last), 4000, 302, None)
        .unwrap();
    let product = est.p_i * est.p_j;
    assert!(
        (est.estimate - product).abs() < 3.0 * est.stderr.max(1.0 / 4000.0),
        "joint {} vs product {product}",
        est.estimate
    );
}

#[test]
fn at_most_one_exceedance_per_sub_square() {
    for (rho, tau) in [(100.0, 2.0), (200.0, 1.0), (50.0, 0.5)] {
        let spec = build_subdivision(rho, tau, 0.5).unwrap();
        assert!(rho0_satisfied(&spec));
        let window = build_window(rho, 1.0).unwrap();
        let margin = default_margin(spec.threshold());
        let worst = replicate(&window, margin, 300, 303, 0, |_, recs| {
            let per = exceedances_per_square(&spec, recs.records.iter().map(|r| (r.incenter, r.inradius)));
            per.values().copied().max().unwrap_or(0)
        })
        .unwrap();
        assert!(worst.iter().all(|&m| m <= 1), "rho {rho}, tau {tau}");
        assert!(worst.contains(&1));
    }
}

#[test]
fn default_margin_keeps_contamination_below_one_percent() {
    let (rho, tau) = (100.0, 2.0);
    let window = build_window(rho, 1.0).unwrap();
    let margin = default_margin(threshold_v(rho, tau, 1.0));
    let per = replicate(&window, margin, 500, 304, 0, |_, recs| (recs.contaminated_count(), recs.len())).unwrap();
    let bad: usize = per.iter().map(|p| p.0).sum();
    let all: usize = per.iter().map(|p| p.1).sum();
    let rate = bad as f64 / all as f64;
    assert!(rate < 0.01, "contamination {rate}");
}
