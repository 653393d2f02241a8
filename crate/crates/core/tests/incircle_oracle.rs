mod common;

use common::{depth, incircle_by_grid, random_convex_polygon};
use stit_extremes::rng::stream;
use stit_extremes::{ConvexPolygon, Point};

#[test]
fn simplex_center_matches_grid_search() {
    let mut rng = stream(401, 0);
    for k in 0..200 {
        let poly = random_convex_polygon(&mut rng);
        let diam = poly.diameter();
        let inc = poly.incircle().unwrap();
        let (c, r) = incircle_by_grid(&poly);
        assert!((inc.radius - r).abs() < 1e-6 * diam, "polygon {k}: radius {} vs {r}", inc.radius);
        assert!(inc.center.distance(c) < 1e-3 * diam, "polygon {k}: center off by {}", inc.center.distance(c));
        // the reported disk fits
        assert!(depth(&poly, inc.center) >= inc.radius - 1e-9 * diam);
    }
}

#[test]
fn known_incircles() {
    // 3-4-5 triangle: r = (a + b - c) / 2 = 1, center (1, 1)
    let tri = ConvexPolygon::new(vec![Point::new(0.0, 0.0), Point::new(4.0, 0.0), Point::new(0.0, 3.0)]).unwrap();
    let inc = tri.incircle().unwrap();
    assert!((inc.radius - 1.0).abs() < 1e-12);
    assert!(inc.center.distance(Point::new(1.0, 1.0)) < 1e-12);

    let hex = ConvexPolygon::regular(6, Point::new(2.0, -3.0), 2.0).unwrap();
    let inc = hex.incircle().unwrap();
    assert!((inc.radius - 3f64.sqrt()).abs() < 1e-12);
    assert!(inc.center.distance(Point::new(2.0, -3.0)) < 1e-12);
}
