//! Observation windows, inradius records, exceedance counts and order
//! statistics.

use std::f64::consts::PI;
use std::io::Write;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::geometry::{ConvexPolygon, GeometryError, Point};
use crate::stit::Tessellation;

#[derive(Debug, Error)]
pub enum ExtremesError {
    #[error("rho and t must be positive, got rho = {rho}, t = {t}")]
    InvalidWindow { rho: f64, t: f64 },
    #[error("observation window is not covered by the simulation window")]
    NotCovered,
    #[error("margin must be non-negative, got {0}")]
    InvalidMargin(f64),
    #[error(transparent)]
    Geometry(#[from] GeometryError),
    #[error(transparent)]
    Csv(#[from] csv::Error),
    #[error(transparent)]
    Io(#[from] std::io::Error),
}

/// The square `t^-1 sqrt(pi rho) [-1/2, 1/2]^2`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ObservationWindow {
    pub rho: f64,
    pub t: f64,
    pub square: ConvexPolygon,
}

impl ObservationWindow {
    pub fn side(&self) -> f64 {
        window_side(self.rho, self.t)
    }

    /// Simulation window: the observation square grown by `margin` on every side.
    pub fn with_margin(&self, margin: f64) -> Result<ConvexPolygon, ExtremesError> {
        if !(margin >= 0.0 && margin.is_finite()) {
            return Err(ExtremesError::InvalidMargin(margin));
        }
        Ok(ConvexPolygon::square(Point::default(), self.side() + 2.0 * margin)?)
    }
}

fn window_side(rho: f64, t: f64) -> f64 {
    (PI * rho).sqrt() / t
}

pub fn build_window(rho: f64, t: f64) -> Result<ObservationWindow, ExtremesError> {
    if !(rho > 0.0 && t > 0.0 && rho.is_finite() && t.is_finite()) {
        return Err(ExtremesError::InvalidWindow { rho, t });
    }
    let square = ConvexPolygon::square(Point::default(), window_side(rho, t))?;
    Ok(ObservationWindow { rho, t, square })
}

/// Threshold `(ln rho - ln tau) / (2t)` at which the mean number of
/// exceedances in the window equals `tau`. Negative when `tau > rho`.
pub fn threshold_v(rho: f64, tau: f64, t: f64) -> f64 {
    (rho.ln() - tau.ln()) / (2.0 * t)
}

/// Default simulation margin `4 v + 2`.
pub fn default_margin(v: f64) -> f64 {
    4.0 * v.max(0.0) + 2.0
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct InradiusRecord {
    pub incenter: Point,
    pub inradius: f64,
    /// The cell touches the simulation window boundary, so its inradius may
    /// be smaller than that of the corresponding cell in the whole plane.
    pub contaminated: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct InradiusRecordSet {
    pub records: Vec<InradiusRecord>,
    pub window: ObservationWindow,
    /// Smallest gap between the observation square and the simulation window.
    pub margin: f64,
}

/// One record per cell whose incenter lies in the closed observation square.
pub fn collect_records(
    tess: &Tessellation,
    window: &ObservationWindow,
) -> Result<InradiusRecordSet, ExtremesError> {
    if !tess.sim_window.contains_polygon(&window.square) {
        return Err(ExtremesError::NotCovered);
    }
    let margin = window
        .square
        .vertices()
        .iter()
        .map(|v| tess.sim_window.boundary_distance(*v))
        .fold(f64::INFINITY, f64::min)
        .max(0.0);
    let records = tess
        .cells
        .iter()
        .filter(|c| window.square.contains(c.incenter))
        .map(|c| InradiusRecord {
            incenter: c.incenter,
            inradius: c.inradius,
            contaminated: c.touches_sim_boundary,
        })
        .collect();
    Ok(InradiusRecordSet {
        records,
        window: window.clone(),
        margin,
    })
}

impl InradiusRecordSet {
    pub fn len(&self) -> usize {
        self.records.len()
    }

    pub fn is_empty(&self) -> bool {
        self.records.is_empty()
    }

    pub fn contaminated_count(&self) -> usize {
        self.records.iter().filter(|r| r.contaminated).count()
    }

    /// Copy with the contaminated records removed.
    pub fn clean(&self) -> InradiusRecordSet {
        InradiusRecordSet {
            records: self.records.iter().filter(|r| !r.contaminated).copied().collect(),
            window: self.window.clone(),
            margin: self.margin,
        }
    }

    pub fn inradii(&self) -> Vec<f64> {
        self.records.iter().map(|r| r.inradius).collect()
    }

    pub fn exceedance_count(&self, v: f64) -> usize {
        exceedance_count(&self.inradii(), v)
    }

    pub fn order_statistic(&self, k: usize) -> f64 {
        order_statistic(&self.inradii(), k)
    }

    /// The `k` largest inradii, descending, padded with zeros.
    pub fn top_k(&self, k: usize) -> Vec<f64> {
        let mut r = self.inradii();
        r.sort_by(|a, b| b.total_cmp(a));
        r.resize(k, 0.0);
        r
    }

    /// Writes `rep,x,y,inradius,contaminated` rows (no header).
    pub fn write_csv_rows<W: Write>(
        &self,
        rep: usize,
        writer: &mut csv::Writer<W>,
    ) -> Result<(), ExtremesError> {
        for r in &self.records {
            writer.write_record([
                rep.to_string(),
                r.incenter.x.to_string(),
                r.incenter.y.to_string(),
                r.inradius.to_string(),
                r.contaminated.to_string(),
            ])?;
        }
        Ok(())
    }
}

pub const RECORD_CSV_HEADER: [&str; 5] = ["rep", "x", "y", "inradius", "contaminated"];

/// Number of inradii strictly above `v`.
pub fn exceedance_count(inradii: &[f64], v: f64) -> usize {
    inradii.iter().filter(|&&r| r > v).count()
}

/// `k`-th largest inradius (`k >= 1`), or 0 when there are fewer than `k`.
pub fn order_statistic(inradii: &[f64], k: usize) -> f64 {
    assert!(k >= 1, "order statistics are 1-based");
    if inradii.len() < k {
        return 0.0;
    }
    let mut sorted = inradii.to_vec();
    sorted.sort_by(|a, b| b.total_cmp(a));
    sorted[k - 1]
}
