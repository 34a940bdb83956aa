//! Static exports: the taxel layout as CSV, SVG renderings of one grasp per
//! finger channel, and plot-ready sweep curves.

use std::fmt::Write as _;
use std::str::FromStr;

use crate::dataset::{Finger, GraspSample};
use crate::error::{Error, Result};
use crate::experiments::Aggregate;
use crate::sensor_graph::{EdgeSet, Point3, TaxelLayout, FEATURE_SCALE, TAXEL_COUNT, TAXEL_POSITION_TEXT};

pub const LAYOUT_HEADER: &str = "electrode,x,y,z";

/// Layout table with the coordinates written exactly as tabulated.
pub fn layout_csv() -> String {
    let mut out = format!("{LAYOUT_HEADER}\n");
    for (i, [x, y, z]) in TAXEL_POSITION_TEXT.iter().enumerate() {
        writeln!(out, "{},{x},{y},{z}", i + 1).unwrap();
    }
    out
}

pub fn read_layout_csv(text: &str) -> Result<Vec<Point3>> {
    let mut rdr = csv::Reader::from_reader(text.as_bytes());
    if rdr.headers()?.iter().ne(LAYOUT_HEADER.split(',')) {
        return Err(Error::Format("unexpected layout header".into()));
    }
    let mut points = Vec::new();
    for (i, rec) in rdr.records().enumerate() {
        let rec = rec?;
        let num = |j: usize| {
            rec[j].parse::<f64>().map_err(|_| Error::Row {
                row: i + 2,
                msg: format!("bad number `{}`", &rec[j]),
            })
        };
        if rec[0].parse::<usize>().ok() != Some(i + 1) {
            return Err(Error::Row {
                row: i + 2,
                msg: format!("expected electrode {}", i + 1),
            });
        }
        points.push(Point3 {
            x: num(1)?,
            y: num(2)?,
            z: num(3)?,
        });
    }
    Ok(points)
}

/// Which two coordinates become the drawing plane.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum Projection {
    /// Mirror twins (electrodes `i` and `i + 10`) share x and y, so they
    /// overlap in this view.
    #[default]
    Xy,
    Xz,
}

impl FromStr for Projection {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "xy" => Ok(Projection::Xy),
            "xz" => Ok(Projection::Xz),
            _ => Err(Error::InvalidArgument(format!("projection `{s}`: expected `xy` or `xz`"))),
        }
    }
}

impl Projection {
    fn apply(self, p: &Point3) -> (f64, f64) {
        match self {
            Projection::Xy => (p.x, p.y),
            Projection::Xz => (p.x, p.z),
        }
    }
}

const CANVAS: f64 = 480.0;
const MARGIN: f64 = 48.0;
pub const MIN_RADIUS: f64 = 4.0;
pub const MAX_RADIUS: f64 = 18.0;
const HEAT_RADIUS: f64 = 40.0;

/// Node radius, affine in the raw reading.
pub fn node_radius(raw: i64) -> f64 {
    MIN_RADIUS + (MAX_RADIUS - MIN_RADIUS) * (raw as f64 / FEATURE_SCALE).clamp(0.0, 1.0)
}

// Samples of the viridis map at 0, 1/8, ..., 1.
const VIRIDIS: [(u8, u8, u8); 9] = [
    (68, 1, 84),
    (71, 44, 122),
    (59, 81, 139),
    (44, 113, 142),
    (33, 144, 141),
    (39, 173, 129),
    (92, 200, 99),
    (170, 220, 50),
    (253, 231, 37),
];

/// Hex color of a raw reading on a fixed `[0, 4096]` scale.
pub fn value_color(raw: i64) -> String {
    let t = (raw as f64 / FEATURE_SCALE).clamp(0.0, 1.0) * (VIRIDIS.len() - 1) as f64;
    let i = (t.floor() as usize).min(VIRIDIS.len() - 2);
    let f = t - i as f64;
    let (a, b) = (VIRIDIS[i], VIRIDIS[i + 1]);
    let mix = |x: u8, y: u8| (x as f64 + (y as f64 - x as f64) * f).round() as u8;
    format!("#{:02x}{:02x}{:02x}", mix(a.0, b.0), mix(a.1, b.1), mix(a.2, b.2))
}

/// One finger channel of a grasp: a color-mapped halo per taxel standing in
/// for the contour shading, edges as black lines, and semi-transparent blue
/// nodes sized by pressure. The output depends only on the arguments.
pub fn render_channel_svg(
    sample: &GraspSample,
    finger: Finger,
    edges: &EdgeSet,
    layout: &TaxelLayout,
    projection: Projection,
) -> String {
    let pts: Vec<(f64, f64)> = layout.positions().iter().map(|p| projection.apply(p)).collect();
    let (min_x, max_x) = bounds(pts.iter().map(|p| p.0));
    let (min_y, max_y) = bounds(pts.iter().map(|p| p.1));
    let span = (max_x - min_x).max(max_y - min_y).max(f64::EPSILON);
    let scale = (CANVAS - 2.0 * MARGIN) / span;
    // SVG y grows downwards.
    let to_canvas = |(x, y): (f64, f64)| (MARGIN + (x - min_x) * scale, CANVAS - MARGIN - (y - min_y) * scale);
    let readings = sample.finger_readings(finger);

    let mut svg = String::new();
    writeln!(
        svg,
        r#"<svg xmlns="http://www.w3.org/2000/svg" width="{CANVAS}" height="{CANVAS}" viewBox="0 0 {CANVAS} {CANVAS}">"#
    )
    .unwrap();
    writeln!(svg, "<title>{} finger, object {}, {}</title>", finger.name(), escape(&sample.object_id), sample.label).unwrap();
    svg.push_str("<defs>\n");
    for (i, &raw) in readings.iter().enumerate() {
        let c = value_color(raw);
        writeln!(
            svg,
            r#"<radialGradient id="heat{i}"><stop offset="0" stop-color="{c}" stop-opacity="0.9"/><stop offset="1" stop-color="{c}" stop-opacity="0"/></radialGradient>"#
        )
        .unwrap();
    }
    svg.push_str("</defs>\n");
    writeln!(svg, r#"<rect width="{CANVAS}" height="{CANVAS}" fill="{}"/>"#, value_color(0)).unwrap();

    svg.push_str("<g class=\"heat\">\n");
    for (i, p) in pts.iter().enumerate() {
        let (cx, cy) = to_canvas(*p);
        writeln!(svg, r#"<circle cx="{cx:.3}" cy="{cy:.3}" r="{HEAT_RADIUS}" fill="url(#heat{i})"/>"#).unwrap();
    }
    svg.push_str("</g>\n<g class=\"edges\" stroke=\"black\" stroke-width=\"1.5\">\n");
    for (s, d) in edges.drawable_segments() {
        let (x1, y1) = to_canvas(pts[s]);
        let (x2, y2) = to_canvas(pts[d]);
        writeln!(svg, r#"<line x1="{x1:.3}" y1="{y1:.3}" x2="{x2:.3}" y2="{y2:.3}"/>"#).unwrap();
    }
    svg.push_str("</g>\n<g class=\"nodes\" fill=\"#1f4fd8\" fill-opacity=\"0.5\">\n");
    for (i, p) in pts.iter().enumerate() {
        let (cx, cy) = to_canvas(*p);
        writeln!(
            svg,
            r#"<circle cx="{cx:.3}" cy="{cy:.3}" r="{:.3}" data-electrode="{}" data-value="{}"/>"#,
            node_radius(readings[i]),
            i + 1,
            readings[i]
        )
        .unwrap();
    }
    svg.push_str("</g>\n</svg>\n");
    debug_assert_eq!(pts.len(), TAXEL_COUNT);
    svg
}

fn bounds(values: impl Iterator<Item = f64>) -> (f64, f64) {
    values.fold((f64::INFINITY, f64::NEG_INFINITY), |(lo, hi), v| (lo.min(v), hi.max(v)))
}

fn escape(s: &str) -> String {
    s.replace('&', "&amp;").replace('<', "&lt;").replace('>', "&gt;")
}

/// A point of a sweep curve.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PlotPoint {
    pub x: usize,
    pub mean: f64,
    pub std: f64,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum PlotAxis {
    Depth,
    K,
}

/// Mean accuracy with its standard deviation for each aggregate, keyed by
/// depth or k.
pub fn plot_points(aggregates: &[Aggregate], axis: PlotAxis) -> Vec<PlotPoint> {
    aggregates
        .iter()
        .map(|a| PlotPoint {
            x: match axis {
                PlotAxis::Depth => a.depth,
                PlotAxis::K => a.k,
            },
            mean: a.accuracy.mean,
            std: a.accuracy.std,
        })
        .collect()
}

pub fn plot_csv(points: &[PlotPoint]) -> String {
    let mut out = String::from("x,mean,std\n");
    for p in points {
        writeln!(out, "{},{},{}", p.x, p.mean, p.std).unwrap();
    }
    out
}

pub fn read_plot_csv(text: &str) -> Result<Vec<PlotPoint>> {
    let mut rdr = csv::Reader::from_reader(text.as_bytes());
    if rdr.headers()?.iter().ne(["x", "mean", "std"]) {
        return Err(Error::Format("unexpected plot header".into()));
    }
    rdr.records()
        .enumerate()
        .map(|(i, rec)| {
            let rec = rec?;
            let bad = || Error::Row {
                row: i + 2,
                msg: "bad plot value".into(),
            };
            Ok(PlotPoint {
                x: rec[0].parse().map_err(|_| bad())?,
                mean: rec[1].parse().map_err(|_| bad())?,
                std: rec[2].parse().map_err(|_| bad())?,
            })
        })
        .collect()
}
