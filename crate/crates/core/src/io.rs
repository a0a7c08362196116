//! Text formats: point-cloud CSV, filtration and diagram TSV, SVG barcodes.
//!
//! Floats are written with Rust's shortest round-trip formatting, so every
//! reader recovers the exact `f64` that was written. Infinity is `inf`.

use std::fmt::Write as _;
use std::fs;
use std::path::Path;

use crate::error::{Error, Result};
use crate::filtration::{Filtration, FiltrationEntry, Flavor, Simplex};
use crate::geometry::PointCloud;
use crate::persistence::{DiagramPoint, PersistenceDiagram};

fn read_to_string(path: &Path) -> Result<String> {
    fs::read_to_string(path).map_err(|e| Error::io(path, e))
}

fn write_string(path: &Path, contents: &str) -> Result<()> {
    fs::write(path, contents).map_err(|e| Error::io(path, e))
}

/// Shortest text that parses back to the same `f64`, in exponent form for
/// very small or very large magnitudes.
pub fn format_float(v: f64) -> String {
    let a = v.abs();
    if v == f64::INFINITY {
        "inf".to_string()
    } else if a != 0.0 && !(1e-5..1e16).contains(&a) {
        format!("{v:e}")
    } else {
        format!("{v}")
    }
}

fn parse_float(field: &str) -> Option<f64> {
    match field.trim() {
        "inf" | "+inf" | "Infinity" => Some(f64::INFINITY),
        s => s.parse::<f64>().ok().filter(|v| !v.is_nan()),
    }
}

/// Reads `x1,...,xd,weight` rows; the weight column is last.
pub fn read_point_cloud(path: impl AsRef<Path>, has_header: bool) -> Result<PointCloud> {
    let path = path.as_ref();
    parse_point_cloud(&read_to_string(path)?, has_header, path)
}

pub fn parse_point_cloud(text: &str, has_header: bool, origin: &Path) -> Result<PointCloud> {
    let mut reader = csv::ReaderBuilder::new()
        .has_headers(has_header)
        .flexible(true)
        .trim(csv::Trim::All)
        .from_reader(text.as_bytes());
    let mut points = Vec::new();
    let mut weights = Vec::new();
    let mut dim = None;
    for record in reader.records() {
        let record = record.map_err(|e| {
            let line = e.position().map_or(0, |p| p.line() as usize);
            Error::parse(origin, line, e.to_string())
        })?;
        let line = record.position().map_or(0, |p| p.line() as usize);
        if record.len() == 1 && record[0].is_empty() {
            continue;
        }
        if record.len() < 2 {
            return Err(Error::parse(
                origin,
                line,
                "expected at least one coordinate and a weight",
            ));
        }
        let mut values = Vec::with_capacity(record.len());
        for (col, field) in record.iter().enumerate() {
            let v = parse_float(field)
                .filter(|v| v.is_finite())
                .ok_or_else(|| {
                    Error::parse(
                        origin,
                        line,
                        format!("field {}: not a finite number: {field:?}", col + 1),
                    )
                })?;
            values.push(v);
        }
        let weight = values.pop().expect("record has at least two fields");
        match dim {
            None => dim = Some(values.len()),
            Some(d) if d != values.len() => {
                return Err(Error::parse(
                    origin,
                    line,
                    format!(
                        "dimension mismatch: {} coordinates, expected {d}",
                        values.len()
                    ),
                ))
            }
            _ => {}
        }
        if !(weight > 0.0) {
            return Err(Error::parse(
                origin,
                line,
                format!("weight must be positive, got {weight}"),
            ));
        }
        points.push(values);
        weights.push(weight);
    }
    PointCloud::new(points, weights)
}

pub fn point_cloud_to_string(cloud: &PointCloud) -> String {
    let mut out = String::new();
    for (p, w) in cloud.points().iter().zip(cloud.weights()) {
        for c in p {
            out.push_str(&format_float(*c));
            out.push(',');
        }
        out.push_str(&format_float(*w));
        out.push('\n');
    }
    out
}

pub fn write_point_cloud(cloud: &PointCloud, path: impl AsRef<Path>) -> Result<()> {
    write_string(path.as_ref(), &point_cloud_to_string(cloud))
}

/// `dim<TAB>scale<TAB>v0,v1,...` per simplex, in filtration order.
pub fn filtration_to_string(filt: &Filtration) -> String {
    let mut out = String::new();
    for e in filt.entries() {
        let vertices: Vec<String> = e.simplex.vertices().iter().map(|v| v.to_string()).collect();
        let _ = writeln!(
            out,
            "{}\t{}\t{}",
            e.simplex.dim(),
            format_float(e.scale),
            vertices.join(",")
        );
    }
    out
}

pub fn write_filtration(filt: &Filtration, path: impl AsRef<Path>) -> Result<()> {
    write_string(path.as_ref(), &filtration_to_string(filt))
}

pub fn read_filtration(path: impl AsRef<Path>, flavor: Flavor) -> Result<Filtration> {
    let path = path.as_ref();
    parse_filtration(&read_to_string(path)?, flavor, path)
}

/// Parses a filtration dump. `max_dim` is the largest dimension present and
/// `t_max` is unbounded.
pub fn parse_filtration(text: &str, flavor: Flavor, origin: &Path) -> Result<Filtration> {
    let mut entries = Vec::new();
    for (idx, line) in text.lines().enumerate() {
        let lineno = idx + 1;
        if line.trim().is_empty() {
            continue;
        }
        let fields: Vec<&str> = line.split('\t').collect();
        if fields.len() != 3 {
            return Err(Error::parse(
                origin,
                lineno,
                "expected dim<TAB>scale<TAB>vertices",
            ));
        }
        let dim: usize = fields[0]
            .trim()
            .parse()
            .map_err(|_| Error::parse(origin, lineno, format!("bad dimension {:?}", fields[0])))?;
        let scale = parse_float(fields[1])
            .filter(|s| s.is_finite() && *s >= 0.0)
            .ok_or_else(|| Error::parse(origin, lineno, format!("bad scale {:?}", fields[1])))?;
        let vertices = fields[2]
            .split(',')
            .map(|v| v.trim().parse::<usize>())
            .collect::<std::result::Result<Vec<_>, _>>()
            .map_err(|_| {
                Error::parse(origin, lineno, format!("bad vertex list {:?}", fields[2]))
            })?;
        let simplex =
            Simplex::new(vertices).map_err(|e| Error::parse(origin, lineno, e.to_string()))?;
        if simplex.dim() != dim {
            return Err(Error::parse(
                origin,
                lineno,
                format!(
                    "dimension {dim} does not match {} vertices",
                    simplex.vertices().len()
                ),
            ));
        }
        entries.push(FiltrationEntry { simplex, scale });
    }
    let max_dim = entries.iter().map(|e| e.simplex.dim()).max().unwrap_or(0);
    Filtration::from_entries(entries, max_dim, f64::INFINITY, flavor)
}

/// `dim<TAB>birth<TAB>death` per point.
pub fn diagram_to_string(d: &PersistenceDiagram) -> String {
    let mut out = String::new();
    for p in d.points() {
        let _ = writeln!(
            out,
            "{}\t{}\t{}",
            p.dim,
            format_float(p.birth),
            format_float(p.death)
        );
    }
    out
}

pub fn write_diagram(d: &PersistenceDiagram, path: impl AsRef<Path>) -> Result<()> {
    write_string(path.as_ref(), &diagram_to_string(d))
}

pub fn read_diagram(path: impl AsRef<Path>) -> Result<PersistenceDiagram> {
    let path = path.as_ref();
    parse_diagram(&read_to_string(path)?, path)
}

pub fn parse_diagram(text: &str, origin: &Path) -> Result<PersistenceDiagram> {
    let mut points = Vec::new();
    for (idx, line) in text.lines().enumerate() {
        let lineno = idx + 1;
        if line.trim().is_empty() {
            continue;
        }
        let fields: Vec<&str> = line.split('\t').collect();
        if fields.len() != 3 {
            return Err(Error::parse(
                origin,
                lineno,
                "expected dim<TAB>birth<TAB>death",
            ));
        }
        let dim: usize = fields[0]
            .trim()
            .parse()
            .map_err(|_| Error::parse(origin, lineno, format!("bad dimension {:?}", fields[0])))?;
        let birth = parse_float(fields[1])
            .filter(|b| b.is_finite())
            .ok_or_else(|| Error::parse(origin, lineno, format!("bad birth {:?}", fields[1])))?;
        let death = parse_float(fields[2])
            .ok_or_else(|| Error::parse(origin, lineno, format!("bad death {:?}", fields[2])))?;
        if death < birth {
            return Err(Error::parse(origin, lineno, "death precedes birth"));
        }
        points.push(DiagramPoint::new(dim, birth, death));
    }
    PersistenceDiagram::new(points)
}

#[derive(Debug, Clone, PartialEq)]
pub struct SvgOptions {
    pub width: u32,
    pub bar_height: u32,
    pub bar_gap: u32,
    /// Right end of the scale axis; defaults to the largest finite value.
    pub scale_max: Option<f64>,
    /// Cycled by dimension.
    pub colors: Vec<String>,
    pub ticks: usize,
}

impl Default for SvgOptions {
    fn default() -> Self {
        SvgOptions {
            width: 640,
            bar_height: 6,
            bar_gap: 3,
            scale_max: None,
            colors: ["#1f77b4", "#d62728", "#2ca02c", "#9467bd"]
                .iter()
                .map(|c| c.to_string())
                .collect(),
            ticks: 5,
        }
    }
}

const MARGIN_LEFT: f64 = 48.0;
const MARGIN_RIGHT: f64 = 24.0;
const MARGIN_TOP: f64 = 16.0;
const BLOCK_GAP: f64 = 14.0;
const AXIS_HEIGHT: f64 = 32.0;

fn svg_number(v: f64) -> String {
    let s = format!("{v:.2}");
    let s = s.trim_end_matches('0').trim_end_matches('.');
    if s == "-0" {
        "0".to_string()
    } else {
        s.to_string()
    }
}

/// Renders positive-length bars stacked by dimension, each block sorted by
/// birth then length. Essential bars run to the right margin and end in an
/// arrowhead.
pub fn render_barcode_svg(d: &PersistenceDiagram, options: &SvgOptions) -> String {
    let bars = d.barcode();
    let blocks: Vec<(usize, Vec<(f64, f64)>)> = (0..bars.dims())
        .map(|dim| {
            let mut b = bars.in_dim(dim).to_vec();
            b.sort_by(|x, y| {
                x.0.total_cmp(&y.0)
                    .then_with(|| (x.1 - x.0).total_cmp(&(y.1 - y.0)))
            });
            (dim, b)
        })
        .filter(|(_, b)| !b.is_empty())
        .collect();

    let finite_max = blocks
        .iter()
        .flat_map(|(_, b)| b.iter())
        .flat_map(|&(birth, death)| [birth, death])
        .filter(|v| v.is_finite())
        .fold(0.0f64, f64::max);
    let scale_max = options
        .scale_max
        .filter(|m| *m > 0.0)
        .unwrap_or(if finite_max > 0.0 {
            finite_max * 1.05
        } else {
            1.0
        });

    let width = options.width as f64;
    let plot_right = width - MARGIN_RIGHT;
    let x_of = |v: f64| MARGIN_LEFT + (v.min(scale_max) / scale_max) * (plot_right - MARGIN_LEFT);
    let row = (options.bar_height + options.bar_gap) as f64;

    let mut body = String::new();
    let mut y = MARGIN_TOP;
    for (dim, block) in &blocks {
        let color = options
            .colors
            .get(dim % options.colors.len().max(1))
            .map_or("#000000", String::as_str);
        let block_height = block.len() as f64 * row;
        let _ = writeln!(
            body,
            r#"<text x="{}" y="{}" font-size="11" text-anchor="end">H{dim}</text>"#,
            svg_number(MARGIN_LEFT - 8.0),
            svg_number(y + block_height / 2.0 + 4.0)
        );
        for &(birth, death) in block {
            let x0 = x_of(birth);
            if death.is_finite() {
                let _ = writeln!(
                    body,
                    r#"<rect x="{}" y="{}" width="{}" height="{}" fill="{color}"/>"#,
                    svg_number(x0),
                    svg_number(y),
                    svg_number((x_of(death) - x0).max(0.5)),
                    options.bar_height
                );
            } else {
                let mid = y + options.bar_height as f64 / 2.0;
                let _ = writeln!(
                    body,
                    r#"<line x1="{}" y1="{}" x2="{}" y2="{}" stroke="{color}" stroke-width="{}" marker-end="url(#arrow)"/>"#,
                    svg_number(x0),
                    svg_number(mid),
                    svg_number(plot_right),
                    svg_number(mid),
                    options.bar_height
                );
            }
            y += row;
        }
        y += BLOCK_GAP;
    }

    let axis_y = y.max(MARGIN_TOP + BLOCK_GAP);
    let height = axis_y + AXIS_HEIGHT;
    let mut out = String::new();
    let _ = writeln!(out, r#"<?xml version="1.0" encoding="UTF-8"?>"#);
    let _ = writeln!(
        out,
        r#"<svg xmlns="http://www.w3.org/2000/svg" version="1.1" width="{}" height="{}" viewBox="0 0 {} {}">"#,
        options.width,
        svg_number(height),
        options.width,
        svg_number(height)
    );
    out.push_str(
        "<defs><marker id=\"arrow\" viewBox=\"0 0 10 10\" refX=\"8\" refY=\"5\" markerWidth=\"4\" markerHeight=\"4\" orient=\"auto\"><path d=\"M0,0 L10,5 L0,10 z\"/></marker></defs>\n",
    );
    out.push_str(&body);
    let _ = writeln!(
        out,
        r##"<line x1="{}" y1="{}" x2="{}" y2="{}" stroke="#000000" stroke-width="1"/>"##,
        svg_number(MARGIN_LEFT),
        svg_number(axis_y),
        svg_number(plot_right),
        svg_number(axis_y)
    );
    let ticks = options.ticks.max(1);
    for k in 0..=ticks {
        let v = scale_max * k as f64 / ticks as f64;
        let x = x_of(v);
        let _ = writeln!(
            out,
            r##"<line x1="{}" y1="{}" x2="{}" y2="{}" stroke="#000000" stroke-width="1"/>"##,
            svg_number(x),
            svg_number(axis_y),
            svg_number(x),
            svg_number(axis_y + 4.0)
        );
        let _ = writeln!(
            out,
            r#"<text x="{}" y="{}" font-size="10" text-anchor="middle">{}</text>"#,
            svg_number(x),
            svg_number(axis_y + 16.0),
            svg_number(v)
        );
    }
    out.push_str("</svg>\n");
    out
}
