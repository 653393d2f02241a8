//! Planar convex geometry: points, lines in normal form, convex polygons,
//! halfplane clipping and the incircle (Chebyshev center) of a polygon.

use std::f64::consts::PI;
use std::ops::{Add, Mul, Sub};

use serde::{Deserialize, Serialize};
use thiserror::Error;

/// Relative tolerance for collinearity and degeneracy tests. Multiplied by a
/// characteristic length of the polygon under consideration.
pub const EPS_GEOM: f64 = 1e-9;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum GeometryError {
    #[error("polygon needs at least 3 distinct vertices, got {0}")]
    TooFewVertices(usize),
    #[error("polygon has non-finite coordinates")]
    NonFinite,
    #[error("polygon is not convex (reflex turn at vertex {0})")]
    NotConvex(usize),
    #[error("polygon has zero area")]
    ZeroArea,
    #[error("incircle program did not converge after {0} pivots")]
    SolverStalled(usize),
    #[error("incircle program is unbounded; polygon is corrupted")]
    Unbounded,
}

#[derive(Debug, Clone, Copy, PartialEq, Default, Serialize, Deserialize)]
pub struct Point {
    pub x: f64,
    pub y: f64,
}

impl Point {
    pub const fn new(x: f64, y: f64) -> Self {
        Self { x, y }
    }

    pub fn dot(self, other: Point) -> f64 {
        self.x * other.x + self.y * other.y
    }

    pub fn cross(self, other: Point) -> f64 {
        self.x * other.y - self.y * other.x
    }

    pub fn norm(self) -> f64 {
        self.x.hypot(self.y)
    }

    pub fn distance(self, other: Point) -> f64 {
        (self - other).norm()
    }

    pub fn is_finite(self) -> bool {
        self.x.is_finite() && self.y.is_finite()
    }
}

impl Add for Point {
    type Output = Point;
    fn add(self, o: Point) -> Point {
        Point::new(self.x + o.x, self.y + o.y)
    }
}

impl Sub for Point {
    type Output = Point;
    fn sub(self, o: Point) -> Point {
        Point::new(self.x - o.x, self.y - o.y)
    }
}

impl Mul<f64> for Point {
    type Output = Point;
    fn mul(self, s: f64) -> Point {
        Point::new(self.x * s, self.y * s)
    }
}

/// A line `{x : <n(phi), x> = p}` with unit normal `n(phi) = (cos phi, sin phi)`,
/// `phi` in `[0, pi)` and signed offset `p`. Every line has exactly one such
/// representation (up to the measure-zero seam at `phi = 0`).
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Line {
    phi: f64,
    p: f64,
}

impl Line {
    /// Builds a line from any angle, folding it into `[0, pi)` and flipping the
    /// offset sign when the normal is reversed.
    pub fn new(phi: f64, p: f64) -> Self {
        let mut phi = phi.rem_euclid(2.0 * PI);
        let mut p = p;
        if phi >= PI {
            phi -= PI;
            p = -p;
        }
        if phi >= PI {
            // rem_euclid can return values that round up to the period
            phi = 0.0;
        }
        Self { phi, p }
    }

    /// The line through two distinct points.
    pub fn through(a: Point, b: Point) -> Self {
        let dir = b - a;
        let phi = dir.y.atan2(dir.x) + PI / 2.0;
        let n = Point::new(phi.cos(), phi.sin());
        Line::new(phi, n.dot(a))
    }

    pub fn phi(&self) -> f64 {
        self.phi
    }

    pub fn p(&self) -> f64 {
        self.p
    }

    pub fn normal(&self) -> Point {
        Point::new(self.phi.cos(), self.phi.sin())
    }

    /// Positive on the side the normal points to.
    pub fn signed_distance(&self, pt: Point) -> f64 {
        self.normal().dot(pt) - self.p
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum Side {
    /// `<n, x> >= p`
    Positive,
    /// `<n, x> <= p`
    Negative,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Disk {
    pub center: Point,
    pub radius: f64,
}

impl Disk {
    pub fn new(center: Point, radius: f64) -> Self {
        debug_assert!(radius > 0.0);
        Self { center, radius }
    }

    /// Whether the closed segment `a-b` meets the closed disk.
    pub fn meets_segment(&self, a: Point, b: Point) -> bool {
        segment_distance(self.center, a, b) <= self.radius
    }
}

/// Euclidean distance from `pt` to the segment `a-b`.
pub fn segment_distance(pt: Point, a: Point, b: Point) -> f64 {
    let ab = b - a;
    let len2 = ab.dot(ab);
    if len2 == 0.0 {
        return pt.distance(a);
    }
    let s = ((pt - a).dot(ab) / len2).clamp(0.0, 1.0);
    pt.distance(a + ab * s)
}

/// Solution of the Chebyshev-center program of a polygon.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Incircle {
    pub center: Point,
    pub radius: f64,
    /// `min (1 + <a_i, a_j>)` over pairs of active edge normals, in `[0, 2]`.
    /// Values near zero mean two nearly parallel sides both touch the disk,
    /// so the center is ill-conditioned along their common direction.
    pub parallel_margin: f64,
}

impl Incircle {
    pub fn disk(&self) -> Disk {
        Disk::new(self.center, self.radius)
    }
}

/// A convex polygon with counterclockwise vertices.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "RawPolygon")]
pub struct ConvexPolygon {
    vertices: Vec<Point>,
}

#[derive(Deserialize)]
struct RawPolygon {
    vertices: Vec<Point>,
}

impl TryFrom<RawPolygon> for ConvexPolygon {
    type Error = GeometryError;
    fn try_from(raw: RawPolygon) -> Result<Self, Self::Error> {
        ConvexPolygon::new(raw.vertices)
    }
}

impl ConvexPolygon {
    /// Validates and normalizes a vertex list: clockwise input is reversed,
    /// repeated and collinear vertices are dropped.
    pub fn new(vertices: Vec<Point>) -> Result<Self, GeometryError> {
        if vertices.iter().any(|v| !v.is_finite()) {
            return Err(GeometryError::NonFinite);
        }
        let scale = characteristic_length(&vertices);
        let tol = EPS_GEOM * scale.max(f64::MIN_POSITIVE);
        let mut vs = dedup_ring(vertices, tol);
        if vs.len() < 3 {
            return Err(GeometryError::TooFewVertices(vs.len()));
        }
        if signed_area(&vs) < 0.0 {
            vs.reverse();
        }
        let vs = drop_collinear(vs, tol);
        if vs.len() < 3 {
            return Err(GeometryError::ZeroArea);
        }
        let n = vs.len();
        for i in 0..n {
            let a = vs[(i + n - 1) % n];
            let b = vs[i];
            let c = vs[(i + 1) % n];
            let turn = (b - a).cross(c - b);
            if turn < -tol * ((b - a).norm() + (c - b).norm()) {
                return Err(GeometryError::NotConvex(i));
            }
        }
        let area = signed_area(&vs);
        if area <= tol * tol {
            return Err(GeometryError::ZeroArea);
        }
        Ok(Self { vertices: vs })
    }

    /// Axis-aligned rectangle `[x0, x1] x [y0, y1]`.
    pub fn rectangle(x0: f64, y0: f64, x1: f64, y1: f64) -> Result<Self, GeometryError> {
        Self::new(vec![
            Point::new(x0, y0),
            Point::new(x1, y0),
            Point::new(x1, y1),
            Point::new(x0, y1),
        ])
    }

    /// Axis-aligned square of the given side centered at `center`.
    pub fn square(center: Point, side: f64) -> Result<Self, GeometryError> {
        let h = side / 2.0;
        Self::rectangle(center.x - h, center.y - h, center.x + h, center.y + h)
    }

    /// Regular `n`-gon inscribed in the circle of radius `circumradius`.
    pub fn regular(n: usize, center: Point, circumradius: f64) -> Result<Self, GeometryError> {
        let vs = (0..n)
            .map(|k| {
                let a = 2.0 * PI * k as f64 / n as f64;
                center + Point::new(a.cos(), a.sin()) * circumradius
            })
            .collect();
        Self::new(vs)
    }

    pub fn vertices(&self) -> &[Point] {
        &self.vertices
    }

    pub fn len(&self) -> usize {
        self.vertices.len()
    }

    pub fn is_empty(&self) -> bool {
        self.vertices.is_empty()
    }

    /// Directed edges `(v_i, v_{i+1})`.
    pub fn edges(&self) -> impl Iterator<Item = (Point, Point)> + '_ {
        let n = self.vertices.len();
        (0..n).map(move |i| (self.vertices[i], self.vertices[(i + 1) % n]))
    }

    pub fn area(&self) -> f64 {
        signed_area(&self.vertices)
    }

    pub fn perimeter(&self) -> f64 {
        self.edges().map(|(a, b)| a.distance(b)).sum()
    }

    /// Area centroid.
    pub fn centroid(&self) -> Point {
        let origin = self.vertices[0];
        let mut acc = Point::default();
        let mut area2 = 0.0;
        for (a, b) in self.edges() {
            let (a, b) = (a - origin, b - origin);
            let c = a.cross(b);
            area2 += c;
            acc = acc + (a + b) * c;
        }
        origin + acc * (1.0 / (3.0 * area2))
    }

    /// `(min, max)` corners of the bounding box.
    pub fn bounding_box(&self) -> (Point, Point) {
        let mut lo = Point::new(f64::INFINITY, f64::INFINITY);
        let mut hi = Point::new(f64::NEG_INFINITY, f64::NEG_INFINITY);
        for v in &self.vertices {
            lo = Point::new(lo.x.min(v.x), lo.y.min(v.y));
            hi = Point::new(hi.x.max(v.x), hi.y.max(v.y));
        }
        (lo, hi)
    }

    pub fn diameter(&self) -> f64 {
        let mut d: f64 = 0.0;
        for (i, a) in self.vertices.iter().enumerate() {
            for b in &self.vertices[i + 1..] {
                d = d.max(a.distance(*b));
            }
        }
        d
    }

    /// Scale used for absolute tolerances.
    pub fn characteristic_length(&self) -> f64 {
        characteristic_length(&self.vertices)
    }

    pub fn tolerance(&self) -> f64 {
        EPS_GEOM * self.characteristic_length()
    }

    /// A disk containing the polygon, centered at the bounding-box center.
    pub fn enclosing_disk(&self) -> Disk {
        let (lo, hi) = self.bounding_box();
        let center = (lo + hi) * 0.5;
        let radius = self
            .vertices
            .iter()
            .map(|v| v.distance(center))
            .fold(0.0, f64::max);
        Disk::new(center, radius)
    }

    /// Closed-set membership with tolerance.
    pub fn contains(&self, pt: Point) -> bool {
        let tol = self.tolerance();
        self.edges().all(|(a, b)| {
            let e = b - a;
            e.cross(pt - a) >= -tol * e.norm()
        })
    }

    pub fn contains_polygon(&self, other: &ConvexPolygon) -> bool {
        other.vertices.iter().all(|v| self.contains(*v))
    }

    /// Smallest distance from `pt` to the boundary; negative outside.
    pub fn boundary_distance(&self, pt: Point) -> f64 {
        self.edges()
            .map(|(a, b)| {
                let e = b - a;
                e.cross(pt - a) / e.norm()
            })
            .fold(f64::INFINITY, f64::min)
    }

    /// Range of offsets `p` for which `Line(phi, p)` meets the polygon.
    pub fn projection_interval(&self, phi: f64) -> (f64, f64) {
        let n = Point::new(phi.cos(), phi.sin());
        self.vertices
            .iter()
            .map(|v| n.dot(*v))
            .fold((f64::INFINITY, f64::NEG_INFINITY), |(lo, hi), s| {
                (lo.min(s), hi.max(s))
            })
    }

    pub fn hits(&self, line: &Line) -> bool {
        let (lo, hi) = self.projection_interval(line.phi());
        line.p() >= lo && line.p() <= hi
    }

    /// Intersection with the closed halfplane on `side` of `line`; `None`
    /// when the intersection has (numerically) zero area.
    pub fn clip_halfplane(&self, line: &Line, side: Side) -> Option<ConvexPolygon> {
        let tol = self.tolerance();
        let sign = match side {
            Side::Positive => 1.0,
            Side::Negative => -1.0,
        };
        let dist: Vec<f64> = self
            .vertices
            .iter()
            .map(|v| {
                let s = sign * line.signed_distance(*v);
                if s.abs() <= tol {
                    0.0
                } else {
                    s
                }
            })
            .collect();
        if dist.iter().all(|&s| s >= 0.0) {
            return Some(self.clone());
        }
        if dist.iter().all(|&s| s <= 0.0) {
            return None;
        }
        let n = self.vertices.len();
        let mut out = Vec::with_capacity(n + 2);
        for i in 0..n {
            let j = (i + 1) % n;
            let (a, b) = (self.vertices[i], self.vertices[j]);
            let (sa, sb) = (dist[i], dist[j]);
            if sa >= 0.0 {
                out.push(a);
            }
            if (sa > 0.0 && sb < 0.0) || (sa < 0.0 && sb > 0.0) {
                let t = sa / (sa - sb);
                out.push(a + (b - a) * t);
            }
        }
        let clipped = ConvexPolygon::new(out).ok()?;
        if clipped.area() < tol * tol {
            return None;
        }
        Some(clipped)
    }

    /// Both closed halves cut by `line` (positive first).
    pub fn split(&self, line: &Line) -> (Option<ConvexPolygon>, Option<ConvexPolygon>) {
        (
            self.clip_halfplane(line, Side::Positive),
            self.clip_halfplane(line, Side::Negative),
        )
    }

    /// The chord `line ∩ polygon`, if it has positive length.
    pub fn chord(&self, line: &Line) -> Option<(Point, Point)> {
        let n = line.normal();
        let dir = Point::new(-n.y, n.x);
        let base = n * line.p();
        let tol = self.tolerance();
        let (mut lo, mut hi) = (f64::NEG_INFINITY, f64::INFINITY);
        for (a, b) in self.edges() {
            // inside iff e x (x - a) >= 0, with x = base + s * dir
            let e = b - a;
            let c0 = e.cross(base - a);
            let c1 = e.cross(dir);
            if c1.abs() < 1e-300 {
                if c0 < -tol * e.norm() {
                    return None;
                }
                continue;
            }
            let s = -c0 / c1;
            if c1 > 0.0 {
                lo = lo.max(s);
            } else {
                hi = hi.min(s);
            }
        }
        if hi - lo <= tol {
            return None;
        }
        Some((base + dir * lo, base + dir * hi))
    }

    /// Intersection of two convex polygons, `None` if it has zero area.
    pub fn intersect(&self, other: &ConvexPolygon) -> Option<ConvexPolygon> {
        let inner = other.centroid();
        let mut acc = self.clone();
        for (a, b) in other.edges() {
            let line = Line::through(a, b);
            let side = if line.signed_distance(inner) > 0.0 {
                Side::Positive
            } else {
                Side::Negative
            };
            acc = acc.clip_halfplane(&line, side)?;
        }
        Some(acc)
    }

    /// Part of the segment `a-b` inside the polygon (Cyrus-Beck).
    pub fn clip_segment(&self, a: Point, b: Point) -> Option<(Point, Point)> {
        let dir = b - a;
        let tol = self.tolerance();
        let (mut lo, mut hi) = (0.0f64, 1.0f64);
        for (p, q) in self.edges() {
            let e = q - p;
            let c0 = e.cross(a - p);
            let c1 = e.cross(dir);
            if c1 == 0.0 {
                if c0 < -tol * e.norm() {
                    return None;
                }
                continue;
            }
            let s = -c0 / c1;
            if c1 > 0.0 {
                lo = lo.max(s);
            } else {
                hi = hi.min(s);
            }
        }
        if (hi - lo) * dir.norm() <= tol {
            return None;
        }
        Some((a + dir * lo, a + dir * hi))
    }

    pub fn translate(&self, offset: Point) -> ConvexPolygon {
        ConvexPolygon {
            vertices: self.vertices.iter().map(|v| *v + offset).collect(),
        }
    }

    /// Homothety about the origin, `factor > 0`.
    pub fn scale(&self, factor: f64) -> ConvexPolygon {
        assert!(factor > 0.0, "scale factor must be positive");
        ConvexPolygon {
            vertices: self.vertices.iter().map(|v| *v * factor).collect(),
        }
    }

    /// Largest inscribed disk.
    ///
    /// Solves `max r` subject to `<a_e, x> + r <= b_e` for every edge `e`,
    /// where `a_e` is the outward unit normal, with a dense simplex tableau
    /// and Bland's pivoting rule. Coordinates are shifted to the centroid so
    /// that the origin is strictly feasible.
    pub fn incircle(&self) -> Result<Incircle, GeometryError> {
        let origin = self.centroid();
        let mut normals = Vec::with_capacity(self.len());
        let mut rhs = Vec::with_capacity(self.len());
        for (a, b) in self.edges() {
            let e = b - a;
            let len = e.norm();
            let outward = Point::new(e.y / len, -e.x / len);
            normals.push(outward);
            rhs.push(outward.dot(a - origin));
        }
        if rhs.iter().any(|&d| d <= 0.0 || !d.is_finite()) {
            return Err(GeometryError::ZeroArea);
        }
        let sol = chebyshev_simplex(&normals, &rhs)?;
        let center = origin + Point::new(sol[0], sol[1]);
        let radius = sol[2];
        if radius <= 0.0 {
            return Err(GeometryError::ZeroArea);
        }

        let scale = self.characteristic_length();
        let active: Vec<Point> = normals
            .iter()
            .zip(&rhs)
            .filter(|(a, d)| (*d - a.dot(Point::new(sol[0], sol[1])) - radius).abs() <= 1e-9 * scale)
            .map(|(a, _)| *a)
            .collect();
        let mut parallel_margin: f64 = 2.0;
        for (i, a) in active.iter().enumerate() {
            for b in &active[i + 1..] {
                parallel_margin = parallel_margin.min(1.0 + a.dot(*b));
            }
        }

        Ok(Incircle {
            center,
            radius,
            parallel_margin,
        })
    }
}

fn signed_area(vs: &[Point]) -> f64 {
    if vs.len() < 3 {
        return 0.0;
    }
    let origin = vs[0];
    let n = vs.len();
    let mut acc = 0.0;
    for i in 1..n - 1 {
        acc += (vs[i] - origin).cross(vs[i + 1] - origin);
    }
    acc / 2.0
}

fn characteristic_length(vs: &[Point]) -> f64 {
    let mut lo = Point::new(f64::INFINITY, f64::INFINITY);
    let mut hi = Point::new(f64::NEG_INFINITY, f64::NEG_INFINITY);
    for v in vs {
        lo = Point::new(lo.x.min(v.x), lo.y.min(v.y));
        hi = Point::new(hi.x.max(v.x), hi.y.max(v.y));
    }
    (hi.x - lo.x).max(hi.y - lo.y).max(0.0)
}

fn dedup_ring(vs: Vec<Point>, tol: f64) -> Vec<Point> {
    let mut out: Vec<Point> = Vec::with_capacity(vs.len());
    for v in vs {
        if out.last().is_none_or(|last| last.distance(v) > tol) {
            out.push(v);
        }
    }
    while out.len() > 1 && out[0].distance(*out.last().unwrap()) <= tol {
        out.pop();
    }
    out
}

fn drop_collinear(mut vs: Vec<Point>, tol: f64) -> Vec<Point> {
    let mut changed = true;
    while changed && vs.len() >= 3 {
        changed = false;
        let n = vs.len();
        for i in 0..n {
            let a = vs[(i + n - 1) % n];
            let b = vs[i];
            let c = vs[(i + 1) % n];
            let ac = c - a;
            let len = ac.norm();
            // distance of b from chord a-c, and b must lie between a and c
            if len > 0.0 && ac.cross(b - a).abs() <= tol * len {
                let s = (b - a).dot(ac) / (len * len);
                if (0.0..=1.0).contains(&s) {
                    vs.remove(i);
                    changed = true;
                    break;
                }
            }
        }
    }
    vs
}

/// Dense simplex for `max r` s.t. `<a_e, u> + r <= d_e`, `d_e > 0`,
/// `u` free, `r >= 0`. Returns `[u_x, u_y, r]`.
fn chebyshev_simplex(normals: &[Point], rhs: &[f64]) -> Result<[f64; 3], GeometryError> {
    // columns: ux+, ux-, uy+, uy-, r, slack_0..slack_{m-1}, rhs
    let m = normals.len();
    let ncols = 5 + m;
    let width = ncols + 1;
    let mut tab = vec![0.0; (m + 1) * width];
    for (i, (a, d)) in normals.iter().zip(rhs).enumerate() {
        let row = &mut tab[i * width..(i + 1) * width];
        row[0] = a.x;
        row[1] = -a.x;
        row[2] = a.y;
        row[3] = -a.y;
        row[4] = 1.0;
        row[5 + i] = 1.0;
        row[ncols] = *d;
    }
    // objective row holds reduced costs c_j - z_j for maximization
    tab[m * width + 4] = 1.0;
    let mut basis: Vec<usize> = (0..m).map(|i| 5 + i).collect();

    let max_pivots = 50 * (m + 5);
    let pivot_tol = 1e-12;
    for _ in 0..max_pivots {
        let obj = &tab[m * width..(m + 1) * width];
        let Some(enter) = (0..ncols).find(|&j| obj[j] > pivot_tol) else {
            let mut x = [0.0; 5];
            for (i, &b) in basis.iter().enumerate() {
                if b < 5 {
                    x[b] = tab[i * width + ncols];
                }
            }
            return Ok([x[0] - x[1], x[2] - x[3], x[4]]);
        };
        let mut leave: Option<(usize, f64)> = None;
        for i in 0..m {
            let coef = tab[i * width + enter];
            if coef > pivot_tol {
                let ratio = tab[i * width + ncols] / coef;
                let better = match leave {
                    None => true,
                    Some((li, lr)) => {
                        ratio < lr - 1e-15 || (ratio <= lr + 1e-15 && basis[i] < basis[li])
                    }
                };
                if better {
                    leave = Some((i, ratio));
                }
            }
        }
        let Some((row, _)) = leave else {
            return Err(GeometryError::Unbounded);
        };
        let piv = tab[row * width + enter];
        for k in 0..width {
            tab[row * width + k] /= piv;
        }
        for i in 0..=m {
            if i == row {
                continue;
            }
            let f = tab[i * width + enter];
            if f != 0.0 {
                for k in 0..width {
                    tab[i * width + k] -= f * tab[row * width + k];
                }
            }
        }
        basis[row] = enter;
    }
    Err(GeometryError::SolverStalled(max_pivots))
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_abs_diff_eq;

    fn unit_square() -> ConvexPolygon {
        ConvexPolygon::rectangle(0.0, 0.0, 1.0, 1.0).unwrap()
    }

    fn right_triangle() -> ConvexPolygon {
        ConvexPolygon::new(vec![
            Point::new(0.0, 0.0),
            Point::new(3.0, 0.0),
            Point::new(0.0, 4.0),
        ])
        .unwrap()
    }

    #[test]
    fn line_normal_form_is_unique() {
        let a = Line::new(PI + 0.3, 2.0);
        assert_abs_diff_eq!(a.phi(), 0.3, epsilon = 1e-12);
        assert_abs_diff_eq!(a.p(), -2.0, epsilon = 1e-12);
        let b = Line::new(-0.2, 1.0);
        assert!(b.phi() >= 0.0 && b.phi() < PI);
        let through = Line::through(Point::new(0.5, -3.0), Point::new(0.5, 7.0));
        assert_abs_diff_eq!(through.phi(), 0.0, epsilon = 1e-12);
        assert_abs_diff_eq!(through.p(), 0.5, epsilon = 1e-12);
    }

    #[test]
    fn rejects_bad_polygons() {
        assert!(matches!(
            ConvexPolygon::new(vec![Point::new(0.0, 0.0), Point::new(1.0, 0.0)]),
            Err(GeometryError::TooFewVertices(2))
        ));
        let dart = vec![
            Point::new(0.0, 0.0),
            Point::new(2.0, 0.0),
            Point::new(1.0, 0.2),
            Point::new(1.0, 2.0),
        ];
        assert!(matches!(ConvexPolygon::new(dart), Err(GeometryError::NotConvex(_))));
        let flat = vec![Point::new(0.0, 0.0), Point::new(1.0, 0.0), Point::new(2.0, 0.0)];
        assert!(ConvexPolygon::new(flat).is_err());
        assert_eq!(
            ConvexPolygon::new(vec![Point::new(f64::NAN, 0.0); 3]),
            Err(GeometryError::NonFinite)
        );
    }

    #[test]
    fn clockwise_input_is_reoriented_and_collinear_dropped() {
        let p = ConvexPolygon::new(vec![
            Point::new(0.0, 0.0),
            Point::new(0.0, 1.0),
            Point::new(1.0, 1.0),
            Point::new(1.0, 0.5),
            Point::new(1.0, 0.0),
        ])
        .unwrap();
        assert_eq!(p.len(), 4);
        assert!(p.area() > 0.0);
    }

    #[test]
    fn clip_examples() {
        let sq = unit_square();
        let x_half = Line::new(0.0, 0.5);
        let left = sq.clip_halfplane(&x_half, Side::Negative).unwrap();
        assert_abs_diff_eq!(left.area(), 0.5, epsilon = 1e-15);
        let (lo, hi) = left.bounding_box();
        assert_eq!((lo, hi), (Point::new(0.0, 0.0), Point::new(0.5, 1.0)));

        let far = Line::new(0.0, 5.0);
        assert_eq!(sq.clip_halfplane(&far, Side::Negative).unwrap(), sq);
        assert!(sq.clip_halfplane(&far, Side::Positive).is_none());
    }

    #[test]
    fn clip_through_vertex_keeps_partition() {
        let sq = unit_square();
        let diag = Line::through(Point::new(0.0, 0.0), Point::new(1.0, 1.0));
        let (a, b) = sq.split(&diag);
        let (a, b) = (a.unwrap(), b.unwrap());
        assert_eq!(a.len(), 3);
        assert_eq!(b.len(), 3);
        assert_abs_diff_eq!(a.area() + b.area(), 1.0, epsilon = 1e-12);
    }

    #[test]
    fn perimeter_examples() {
        assert_abs_diff_eq!(unit_square().perimeter(), 4.0, epsilon = 1e-15);
        assert_abs_diff_eq!(right_triangle().perimeter(), 12.0, epsilon = 1e-14);
        let hex = ConvexPolygon::regular(6, Point::default(), 1.0).unwrap();
        assert_abs_diff_eq!(hex.perimeter(), 6.0, epsilon = 1e-14);
    }

    #[test]
    fn incircle_examples() {
        let c = unit_square().incircle().unwrap();
        assert_abs_diff_eq!(c.center.x, 0.5, epsilon = 1e-12);
        assert_abs_diff_eq!(c.center.y, 0.5, epsilon = 1e-12);
        assert_abs_diff_eq!(c.radius, 0.5, epsilon = 1e-12);

        let c = right_triangle().incircle().unwrap();
        assert_abs_diff_eq!(c.radius, 1.0, epsilon = 1e-12);
        assert_abs_diff_eq!(c.center.x, 1.0, epsilon = 1e-12);
        assert_abs_diff_eq!(c.center.y, 1.0, epsilon = 1e-12);
        assert!(c.parallel_margin > 0.1);
    }

    #[test]
    fn incircle_of_rectangle_flags_parallel_sides() {
        let r = ConvexPolygon::rectangle(0.0, 0.0, 4.0, 1.0).unwrap();
        let c = r.incircle().unwrap();
        assert_abs_diff_eq!(c.radius, 0.5, epsilon = 1e-12);
        assert_abs_diff_eq!(c.center.y, 0.5, epsilon = 1e-12);
        assert!(c.center.x >= 0.5 - 1e-12 && c.center.x <= 3.5 + 1e-12);
        assert!(c.parallel_margin < 1e-12);
    }

    #[test]
    fn projection_examples() {
        let sq = unit_square();
        let (lo, hi) = sq.projection_interval(0.0);
        assert_abs_diff_eq!(lo, 0.0);
        assert_abs_diff_eq!(hi, 1.0);
        let (lo, hi) = sq.projection_interval(PI / 4.0);
        assert_abs_diff_eq!(lo, 0.0, epsilon = 1e-15);
        assert_abs_diff_eq!(hi, 2f64.sqrt(), epsilon = 1e-15);

        // support function of the 64-gon lies between its inradius and 1
        let disk = ConvexPolygon::regular(64, Point::default(), 1.0).unwrap();
        let inner = (PI / 64.0).cos();
        for k in 0..17 {
            let phi = k as f64 * PI / 17.0;
            let (lo, hi) = disk.projection_interval(phi);
            assert!((-1.0 - 1e-12..=-inner + 1e-12).contains(&lo), "lo = {lo}");
            assert!((inner - 1e-12..=1.0 + 1e-12).contains(&hi), "hi = {hi}");
        }
    }

    #[test]
    fn contains_examples() {
        let sq = unit_square();
        assert!(sq.contains(Point::new(0.5, 0.5)));
        assert!(!sq.contains(Point::new(2.0, 0.0)));
        assert!(sq.contains(Point::new(1.0, 0.5)));
    }

    #[test]
    fn chord_of_square() {
        let sq = unit_square();
        let (a, b) = sq.chord(&Line::new(PI / 2.0, 0.25)).unwrap();
        assert_abs_diff_eq!(a.distance(b), 1.0, epsilon = 1e-12);
        assert_abs_diff_eq!(a.y, 0.25, epsilon = 1e-12);
        assert!(sq.chord(&Line::new(0.0, 3.0)).is_none());
    }

    #[test]
    fn intersect_and_segment_clip() {
        let a = unit_square();
        let b = ConvexPolygon::rectangle(0.5, 0.5, 2.0, 2.0).unwrap();
        let c = a.intersect(&b).unwrap();
        assert_abs_diff_eq!(c.area(), 0.25, epsilon = 1e-12);
        let far = ConvexPolygon::rectangle(3.0, 3.0, 4.0, 4.0).unwrap();
        assert!(a.intersect(&far).is_none());

        let (p, q) = a.clip_segment(Point::new(-1.0, 0.5), Point::new(2.0, 0.5)).unwrap();
        assert_abs_diff_eq!(p.x, 0.0, epsilon = 1e-12);
        assert_abs_diff_eq!(q.x, 1.0, epsilon = 1e-12);
        assert!(a.clip_segment(Point::new(-1.0, 2.0), Point::new(2.0, 2.0)).is_none());

        let disk = Disk::new(Point::new(0.0, 0.0), 1.0);
        assert!(disk.meets_segment(Point::new(-5.0, 1.0), Point::new(5.0, 1.0)));
        assert!(!disk.meets_segment(Point::new(2.0, 0.0), Point::new(5.0, 0.0)));
    }

    #[test]
    fn polygon_deserialization_validates() {
        let ok: ConvexPolygon =
            serde_json::from_str(r#"{"vertices":[{"x":0,"y":0},{"x":1,"y":0},{"x":0,"y":1}]}"#).unwrap();
        assert_eq!(ok.len(), 3);
        let bad: Result<ConvexPolygon, _> =
            serde_json::from_str(r#"{"vertices":[{"x":0,"y":0},{"x":1,"y":0}]}"#);
        assert!(bad.is_err());
    }

    #[test]
    fn centroid_and_enclosing_disk() {
        let t = right_triangle();
        let c = t.centroid();
        assert_abs_diff_eq!(c.x, 1.0, epsilon = 1e-12);
        assert_abs_diff_eq!(c.y, 4.0 / 3.0, epsilon = 1e-12);
        let d = t.enclosing_disk();
        assert!(t.vertices().iter().all(|v| v.distance(d.center) <= d.radius + 1e-12));
    }
}
