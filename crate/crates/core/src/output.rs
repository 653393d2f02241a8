//! File emission: SVG pictures of a tessellation and the JSON metadata
//! sidecar written next to every CLI output.

use std::fmt::Write as _;
use std::io;
use std::path::{Path, PathBuf};

use serde::Serialize;

use crate::geometry::ConvexPolygon;
use crate::stit::Tessellation;

/// Target width of the drawing in SVG user units.
const SVG_WIDTH: f64 = 800.0;

#[derive(Debug, Clone, Default)]
pub struct SvgStyle {
    /// Cells with inradius above this value get their incircle drawn.
    pub threshold: Option<f64>,
    /// Outline drawn dashed on top of the skeleton (the observation window).
    pub highlight: Option<ConvexPolygon>,
    pub draw_all_incircles: bool,
}

/// Skeleton (window boundary plus maximal segments) with highlighted
/// incircles. The y axis points up.
pub fn render_svg(tess: &Tessellation, style: &SvgStyle) -> String {
    let (lo, hi) = tess.sim_window.bounding_box();
    let w = (hi.x - lo.x).max(f64::MIN_POSITIVE);
    let h = (hi.y - lo.y).max(f64::MIN_POSITIVE);
    let k = SVG_WIDTH / w;
    let pad = 10.0;
    let tx = |x: f64| pad + (x - lo.x) * k;
    let ty = |y: f64| pad + (hi.y - y) * k;
    let stroke = 0.6;

    let mut s = String::new();
    let _ = writeln!(
        s,
        r#"<svg xmlns="http://www.w3.org/2000/svg" width="{:.0}" height="{:.0}" viewBox="0 0 {:.2} {:.2}">"#,
        w * k + 2.0 * pad,
        h * k + 2.0 * pad,
        w * k + 2.0 * pad,
        h * k + 2.0 * pad
    );
    let _ = writeln!(s, r#"<rect width="100%" height="100%" fill="white"/>"#);

    let polygon_points = |p: &ConvexPolygon| {
        p.vertices()
            .iter()
            .map(|v| format!("{:.3},{:.3}", tx(v.x), ty(v.y)))
            .collect::<Vec<_>>()
            .join(" ")
    };

    for c in &tess.cells {
        let hit = style.threshold.is_some_and(|v| c.inradius > v);
        if hit || style.draw_all_incircles {
            let (fill, edge) = if hit { ("#f4a3a3", "#c0392b") } else { ("none", "#7f8c8d") };
            let _ = writeln!(
                s,
                r#"<circle cx="{:.3}" cy="{:.3}" r="{:.3}" fill="{fill}" stroke="{edge}" stroke-width="{stroke:.2}"/>"#,
                tx(c.incenter.x),
                ty(c.incenter.y),
                c.inradius * k
            );
        }
    }
    let _ = writeln!(s, r#"<g stroke="black" stroke-width="{stroke:.2}" fill="none">"#);
    let _ = writeln!(s, r#"<polygon points="{}"/>"#, polygon_points(&tess.sim_window));
    for seg in &tess.segments {
        let (a, b) = seg.endpoints;
        let _ = writeln!(
            s,
            r#"<line x1="{:.3}" y1="{:.3}" x2="{:.3}" y2="{:.3}"/>"#,
            tx(a.x),
            ty(a.y),
            tx(b.x),
            ty(b.y)
        );
    }
    let _ = writeln!(s, "</g>");
    if let Some(obs) = &style.highlight {
        let _ = writeln!(
            s,
            r##"<polygon points="{}" fill="none" stroke="#2471a3" stroke-width="{:.2}" stroke-dasharray="6,4"/>"##,
            polygon_points(obs),
            2.0 * stroke
        );
    }
    s.push_str("</svg>\n");
    s
}

/// `<out>.meta.json`
pub fn meta_path(out: &Path) -> PathBuf {
    let mut name = out.as_os_str().to_owned();
    name.push(".meta.json");
    PathBuf::from(name)
}

/// Run description stored beside an output file. Holds nothing that varies
/// between identical invocations (no timings, no thread count), so repeated
/// runs produce identical bytes.
#[derive(Debug, Clone, Serialize)]
pub struct RunMeta<P: Serialize> {
    pub command: String,
    pub crate_name: &'static str,
    pub crate_version: &'static str,
    pub seed: Option<u64>,
    pub parameters: P,
}

impl<P: Serialize> RunMeta<P> {
    pub fn new(command: &str, seed: Option<u64>, parameters: P) -> Self {
        Self {
            command: command.to_string(),
            crate_name: env!("CARGO_PKG_NAME"),
            crate_version: env!("CARGO_PKG_VERSION"),
            seed,
            parameters,
        }
    }

    pub fn write_beside(&self, out: &Path) -> io::Result<PathBuf> {
        let path = meta_path(out);
        write_json(&path, self)?;
        Ok(path)
    }
}

pub fn write_json<T: Serialize + ?Sized>(path: &Path, value: &T) -> io::Result<()> {
    let mut text = serde_json::to_string_pretty(value).map_err(io::Error::other)?;
    text.push('\n');
    std::fs::write(path, text)
}

/// Shortest representation that parses back to the same float.
pub fn fmt_f64(x: f64) -> String {
    format!("{x:?}")
}
