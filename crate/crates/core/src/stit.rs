//! Event-driven simulation of the planar isotropic STIT process in a bounded
//! convex window.
//!
//! Every live cell `z` carries an exponential clock of rate `perimeter(z)/pi`.
//! Clocks sit in a min-priority queue; by memorylessness, popping the
//! earliest expiry and splitting that cell by a line drawn from the
//! normalized line measure on the cell reproduces the process exactly.

use std::cmp::Ordering;
use std::collections::BinaryHeap;

use rand::Rng;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::geometry::{ConvexPolygon, Disk, GeometryError, Line, Point, EPS_GEOM};
use crate::linemeasure::{lambda_hitting, sample_hitting_line, LineMeasureError};
use crate::rng::exponential;

/// Attempts at drawing a non-degenerate dividing line for one division.
pub const MAX_SPLIT_ATTEMPTS: usize = 100;

/// Default bound on the number of cells before the engine gives up.
pub const DEFAULT_MAX_CELLS: usize = 100_000_000;

#[derive(Debug, Error)]
pub enum StitError {
    #[error("time must be positive and finite, got {0}")]
    InvalidTime(f64),
    #[error("runaway division: more than {limit} cells at process time {time:.4}; check window size and t")]
    Runaway { limit: usize, time: f64 },
    #[error("no non-degenerate dividing line after {0} attempts")]
    DegenerateSplit(usize),
    #[error("sub-window is not contained in the simulation window")]
    NotContained,
    #[error("scale factor must be positive, got {0}")]
    InvalidScale(f64),
    #[error(transparent)]
    Geometry(#[from] GeometryError),
    #[error(transparent)]
    LineMeasure(#[from] LineMeasureError),
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Cell {
    pub polygon: ConvexPolygon,
    pub incenter: Point,
    pub inradius: f64,
    pub birth_time: f64,
    pub touches_sim_boundary: bool,
}

impl Cell {
    fn new(polygon: ConvexPolygon, birth_time: f64, window: &ConvexPolygon) -> Result<Self, StitError> {
        let inc = polygon.incircle()?;
        let touches_sim_boundary = touches_boundary(&polygon, window);
        Ok(Self {
            polygon,
            incenter: inc.center,
            inradius: inc.radius,
            birth_time,
            touches_sim_boundary,
        })
    }
}

/// A chord created by one division, with the time of that division.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct MaximalSegment {
    pub endpoints: (Point, Point),
    pub birth_time: f64,
}

impl MaximalSegment {
    pub fn length(&self) -> f64 {
        self.endpoints.0.distance(self.endpoints.1)
    }

    pub fn line(&self) -> Line {
        Line::through(self.endpoints.0, self.endpoints.1)
    }
}

/// State of the process at time `t_final`, restricted to `sim_window`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Tessellation {
    pub t_final: f64,
    pub sim_window: ConvexPolygon,
    pub cells: Vec<Cell>,
    pub segments: Vec<MaximalSegment>,
}

impl Tessellation {
    pub fn total_cell_area(&self) -> f64 {
        self.cells.iter().map(|c| c.polygon.area()).sum()
    }

    /// Whether the skeleton meets the closed disk. The window boundary counts
    /// as skeleton.
    pub fn skeleton_meets_disk(&self, disk: &Disk) -> bool {
        if self.sim_window.boundary_distance(disk.center) <= disk.radius {
            return true;
        }
        self.segments
            .iter()
            .any(|s| disk.meets_segment(s.endpoints.0, s.endpoints.1))
    }

    /// Time of the first division, if any happened before `t_final`.
    pub fn first_division(&self) -> Option<&MaximalSegment> {
        self.segments
            .iter()
            .min_by(|a, b| a.birth_time.total_cmp(&b.birth_time))
    }
}

#[derive(Debug, Clone, Copy)]
pub struct SimulationLimits {
    pub max_cells: usize,
}

impl Default for SimulationLimits {
    fn default() -> Self {
        Self {
            max_cells: DEFAULT_MAX_CELLS,
        }
    }
}

struct Pending {
    polygon: ConvexPolygon,
    birth_time: f64,
    division_time: f64,
    id: u64,
}

impl PartialEq for Pending {
    fn eq(&self, other: &Self) -> bool {
        self.cmp(other) == Ordering::Equal
    }
}

impl Eq for Pending {}

impl PartialOrd for Pending {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

impl Ord for Pending {
    // reversed: BinaryHeap is a max-heap and we want the earliest clock
    fn cmp(&self, other: &Self) -> Ordering {
        other
            .division_time
            .total_cmp(&self.division_time)
            .then_with(|| other.id.cmp(&self.id))
    }
}

/// Runs the process on `window` up to time `t`.
pub fn simulate<R: Rng + ?Sized>(
    window: &ConvexPolygon,
    t: f64,
    rng: &mut R,
) -> Result<Tessellation, StitError> {
    simulate_with_limits(window, t, rng, SimulationLimits::default())
}

pub fn simulate_with_limits<R: Rng + ?Sized>(
    window: &ConvexPolygon,
    t: f64,
    rng: &mut R,
    limits: SimulationLimits,
) -> Result<Tessellation, StitError> {
    if !(t > 0.0 && t.is_finite()) {
        return Err(StitError::InvalidTime(t));
    }
    let mut next_id = 0u64;
    let mut schedule = |polygon: ConvexPolygon, birth_time: f64, rng: &mut R| {
        let rate = lambda_hitting(&polygon).value();
        let pending = Pending {
            division_time: birth_time + exponential(rng, rate),
            polygon,
            birth_time,
            id: next_id,
        };
        next_id += 1;
        pending
    };

    let mut queue = BinaryHeap::new();
    queue.push(schedule(window.clone(), 0.0, rng));
    let mut segments = Vec::new();

    while let Some(top) = queue.peek() {
        if top.division_time > t {
            break;
        }
        let cell = queue.pop().expect("peeked");
        let now = cell.division_time;
        let (line, pos, neg) = split_cell(&cell.polygon, rng)?;
        let chord = cell
            .polygon
            .chord(&line)
            .expect("a line splitting a cell into two parts crosses it");
        segments.push(MaximalSegment {
            endpoints: chord,
            birth_time: now,
        });
        queue.push(schedule(pos, now, rng));
        queue.push(schedule(neg, now, rng));
        if queue.len() > limits.max_cells {
            return Err(StitError::Runaway {
                limit: limits.max_cells,
                time: now,
            });
        }
    }

    let mut alive = queue.into_vec();
    alive.sort_by_key(|p| p.id);
    let cells = alive
        .into_iter()
        .map(|p| Cell::new(p.polygon, p.birth_time, window))
        .collect::<Result<Vec<_>, _>>()?;

    Ok(Tessellation {
        t_final: t,
        sim_window: window.clone(),
        cells,
        segments,
    })
}

fn split_cell<R: Rng + ?Sized>(
    polygon: &ConvexPolygon,
    rng: &mut R,
) -> Result<(Line, ConvexPolygon, ConvexPolygon), StitError> {
    for _ in 0..MAX_SPLIT_ATTEMPTS {
        let line = sample_hitting_line(polygon, rng)?;
        if let (Some(pos), Some(neg)) = polygon.split(&line) {
            return Ok((line, pos, neg));
        }
    }
    Err(StitError::DegenerateSplit(MAX_SPLIT_ATTEMPTS))
}

/// A cell touches the window boundary iff one of its vertices lies within
/// the geometric tolerance of it.
pub fn touches_boundary(polygon: &ConvexPolygon, window: &ConvexPolygon) -> bool {
    let tol = EPS_GEOM * window.characteristic_length();
    polygon
        .vertices()
        .iter()
        .any(|v| window.boundary_distance(*v) <= tol)
}

/// Homothety of the whole tessellation about the origin; times are kept.
pub fn scale(tess: &Tessellation, factor: f64) -> Result<Tessellation, StitError> {
    if !(factor > 0.0 && factor.is_finite()) {
        return Err(StitError::InvalidScale(factor));
    }
    Ok(Tessellation {
        t_final: tess.t_final,
        sim_window: tess.sim_window.scale(factor),
        cells: tess
            .cells
            .iter()
            .map(|c| Cell {
                polygon: c.polygon.scale(factor),
                incenter: c.incenter * factor,
                inradius: c.inradius * factor,
                birth_time: c.birth_time,
                touches_sim_boundary: c.touches_sim_boundary,
            })
            .collect(),
        segments: tess
            .segments
            .iter()
            .map(|s| MaximalSegment {
                endpoints: (s.endpoints.0 * factor, s.endpoints.1 * factor),
                birth_time: s.birth_time,
            })
            .collect(),
    })
}

/// Restriction to a convex sub-window: cells are clipped, empty fragments
/// dropped, incircles recomputed and boundary contact re-flagged against the
/// sub-window.
pub fn restrict(tess: &Tessellation, sub_window: &ConvexPolygon) -> Result<Tessellation, StitError> {
    if !tess.sim_window.contains_polygon(sub_window) {
        return Err(StitError::NotContained);
    }
    let mut cells = Vec::new();
    for c in &tess.cells {
        if let Some(fragment) = c.polygon.intersect(sub_window) {
            cells.push(Cell::new(fragment, c.birth_time, sub_window)?);
        }
    }
    let segments = tess
        .segments
        .iter()
        .filter_map(|s| {
            sub_window
                .clip_segment(s.endpoints.0, s.endpoints.1)
                .map(|endpoints| MaximalSegment {
                    endpoints,
                    birth_time: s.birth_time,
                })
        })
        .collect();
    Ok(Tessellation {
        t_final: tess.t_final,
        sim_window: sub_window.clone(),
        cells,
        segments,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::rng::stream;
    use approx::assert_abs_diff_eq;

    fn square(side: f64) -> ConvexPolygon {
        ConvexPolygon::square(Point::default(), side).unwrap()
    }

    #[test]
    fn tiny_time_gives_window() {
        let w = square(1.0);
        let tess = simulate(&w, 1e-12, &mut stream(1, 0)).unwrap();
        assert_eq!(tess.cells.len(), 1);
        assert!(tess.segments.is_empty());
        assert_eq!(tess.cells[0].polygon, w);
        assert!(tess.cells[0].touches_sim_boundary);
    }

    #[test]
    fn deterministic_given_seed() {
        let w = square(12.0);
        let a = simulate(&w, 1.0, &mut stream(42, 7)).unwrap();
        let b = simulate(&w, 1.0, &mut stream(42, 7)).unwrap();
        assert_eq!(a, b);
        assert_eq!(serde_json::to_string(&a).unwrap(), serde_json::to_string(&b).unwrap());
    }

    #[test]
    fn partition_and_segment_count() {
        let w = square(20.0);
        for rep in 0..20 {
            let tess = simulate(&w, 1.0, &mut stream(3, rep)).unwrap();
            assert_eq!(tess.segments.len() + 1, tess.cells.len());
            let rel = (tess.total_cell_area() - w.area()).abs() / w.area();
            assert!(rel < 1e-6, "area deficit {rel}");
            for c in &tess.cells {
                assert!(c.inradius > 0.0);
                assert!(c.birth_time <= tess.t_final);
                assert!(c.polygon.contains(c.incenter));
                assert!(c.polygon.boundary_distance(c.incenter) >= c.inradius - 1e-9);
            }
        }
    }

    #[test]
    fn rejects_bad_time_and_runaway() {
        let w = square(1.0);
        assert!(matches!(simulate(&w, 0.0, &mut stream(0, 0)), Err(StitError::InvalidTime(_))));
        let err = simulate_with_limits(&square(50.0), 2.0, &mut stream(0, 0), SimulationLimits { max_cells: 100 });
        assert!(matches!(err, Err(StitError::Runaway { limit: 100, .. })));
    }

    #[test]
    fn scaling_is_linear() {
        let tess = simulate(&square(6.0), 1.0, &mut stream(5, 0)).unwrap();
        assert_eq!(scale(&tess, 1.0).unwrap(), tess);
        let doubled = scale(&tess, 2.0).unwrap();
        for (a, b) in tess.cells.iter().zip(&doubled.cells) {
            assert_abs_diff_eq!(b.inradius, 2.0 * a.inradius, epsilon = 1e-12);
            assert_eq!(a.birth_time, b.birth_time);
            let recomputed = b.polygon.incircle().unwrap().radius;
            assert_abs_diff_eq!(recomputed, b.inradius, epsilon = 1e-9);
        }
        assert!(scale(&tess, 0.0).is_err());
    }

    #[test]
    fn restrict_full_and_sub_window() {
        let w = square(10.0);
        let tess = simulate(&w, 1.0, &mut stream(9, 1)).unwrap();
        let same = restrict(&tess, &w).unwrap();
        assert_eq!(same.cells.len(), tess.cells.len());
        for (a, b) in tess.cells.iter().zip(&same.cells) {
            assert_abs_diff_eq!(a.inradius, b.inradius, epsilon = 1e-9);
            assert_abs_diff_eq!(a.polygon.area(), b.polygon.area(), epsilon = 1e-9);
        }

        let sub = ConvexPolygon::rectangle(-2.0, -3.0, 3.0, 1.0).unwrap();
        let part = restrict(&tess, &sub).unwrap();
        assert_abs_diff_eq!(part.total_cell_area(), sub.area(), epsilon = 1e-6);
        for frag in &part.cells {
            let parent = tess
                .cells
                .iter()
                .find(|c| c.polygon.contains(frag.polygon.centroid()))
                .unwrap();
            assert!(frag.inradius <= parent.inradius + 1e-9);
        }
        let outside = ConvexPolygon::rectangle(0.0, 0.0, 20.0, 1.0).unwrap();
        assert!(matches!(restrict(&tess, &outside), Err(StitError::NotContained)));
    }

    #[test]
    fn json_round_trip() {
        let tess = simulate(&square(5.0), 1.0, &mut stream(2, 2)).unwrap();
        let text = serde_json::to_string(&tess).unwrap();
        let back: Tessellation = serde_json::from_str(&text).unwrap();
        assert_eq!(back.cells.len(), tess.cells.len());
        assert_eq!(back.segments, tess.segments);
    }
}
