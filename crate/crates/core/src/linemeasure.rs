//! The motion-invariant measure on planar lines.
//!
//! In the `(phi, p)` chart of [`Line`] the measure is `dp dphi / pi` on
//! `[0, pi) x R`, normalized so that the lines hitting the unit disk have
//! mass 2. For a convex body the hitting mass is its perimeter over `pi`.

use std::f64::consts::PI;

use rand::Rng;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::geometry::{ConvexPolygon, Line};
use crate::quadrature::adaptive_simpson;

/// Hard cap on rejection attempts in [`sample_hitting_line`].
pub const MAX_REJECTIONS: usize = 1_000_000;

const SEPARATING_TOL: f64 = 1e-8;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum LineMeasureError {
    #[error("rejection sampler gave up after {0} attempts; polygon is degenerate")]
    RejectionCap(usize),
    #[error("disks overlap: center distance {d} < 2r = {}", 2.0 * r)]
    Overlapping { r: f64, d: f64 },
    #[error("invalid disk parameters r = {r}, d = {d}")]
    InvalidDisk { r: f64, d: f64 },
}

/// A mass of the line measure.
#[derive(Debug, Clone, Copy, PartialEq, PartialOrd, Serialize, Deserialize)]
pub struct LineMeasureValue(f64);

impl LineMeasureValue {
    pub fn new(value: f64) -> Self {
        debug_assert!(value >= 0.0);
        Self(value)
    }

    pub fn value(self) -> f64 {
        self.0
    }
}

/// Mass of the lines hitting a convex polygon.
pub fn lambda_hitting(poly: &ConvexPolygon) -> LineMeasureValue {
    LineMeasureValue(poly.perimeter() / PI)
}

/// Mass of the lines hitting a disk of radius `r`.
pub fn lambda_disk(r: f64) -> LineMeasureValue {
    LineMeasureValue(2.0 * r)
}

/// Draws a line from the normalized restriction of the measure to the lines
/// hitting `poly`, by rejection from the lines hitting an enclosing disk.
pub fn sample_hitting_line<R: Rng + ?Sized>(
    poly: &ConvexPolygon,
    rng: &mut R,
) -> Result<Line, LineMeasureError> {
    let disk = poly.enclosing_disk();
    for _ in 0..MAX_REJECTIONS {
        let phi = rng.random::<f64>() * PI;
        let n_dot_c = phi.cos() * disk.center.x + phi.sin() * disk.center.y;
        let p = n_dot_c + disk.radius * (2.0 * rng.random::<f64>() - 1.0);
        let (lo, hi) = poly.projection_interval(phi);
        if p >= lo && p <= hi {
            return Ok(Line::new(phi, p));
        }
    }
    Err(LineMeasureError::RejectionCap(MAX_REJECTIONS))
}

/// Mass of the lines separating two disks of radius `r` whose centers are
/// `d >= 2r` apart. In direction `phi` relative to the center axis the gap
/// between the projected disks has length `max(0, d |cos phi| - 2r)`.
pub fn lambda_separating_disks(r: f64, d: f64) -> Result<LineMeasureValue, LineMeasureError> {
    if !(r > 0.0 && d.is_finite()) {
        return Err(LineMeasureError::InvalidDisk { r, d });
    }
    if d < 2.0 * r {
        return Err(LineMeasureError::Overlapping { r, d });
    }
    let kink = (2.0 * r / d).min(1.0).acos();
    if kink == 0.0 {
        return Ok(LineMeasureValue(0.0));
    }
    let gap = |phi: f64| (d * phi.cos().abs() - 2.0 * r).max(0.0);
    // the integrand vanishes on [kink, pi - kink]
    let integral = adaptive_simpson(&gap, 0.0, kink, SEPARATING_TOL / 2.0)
        + adaptive_simpson(&gap, PI - kink, PI, SEPARATING_TOL / 2.0);
    Ok(LineMeasureValue((integral / PI).max(0.0)))
}

/// Mass of the lines hitting the convex hull of two radius-`r` disks at
/// center distance `d` (a stadium of perimeter `2 pi r + 2 d`).
pub fn lambda_conv_two_disks(r: f64, d: f64) -> LineMeasureValue {
    LineMeasureValue(2.0 * r + 2.0 * d / PI)
}

/// Mass of the lines hitting a segment of length `len`.
pub fn lambda_segment(len: f64) -> LineMeasureValue {
    LineMeasureValue(2.0 * len / PI)
}
