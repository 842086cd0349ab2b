//! Self-contained SVG 1.1 rendering of a sunburst model.
//!
//! Byte-deterministic: geometry is formatted at fixed precision and
//! arcs are emitted in model order.

use std::fmt::Write;

use super::SunburstModel;

const SIZE: f64 = 1000.0;
const CENTER: f64 = SIZE / 2.0;
const OUTER_MAX: f64 = 480.0;

pub fn emit_svg(model: &SunburstModel) -> Vec<u8> {
    let rings = model.max_depth.max(1) as f64;
    let thickness = OUTER_MAX / rings;
    let mut out = String::new();
    let _ = writeln!(
        out,
        r##"<svg xmlns="http://www.w3.org/2000/svg" version="1.1" viewBox="0 0 {SIZE} {SIZE}" font-family="sans-serif">"##
    );
    let _ = writeln!(out, r##"<rect width="{SIZE}" height="{SIZE}" fill="#ffffff"/>"##);

    for arc in &model.arcs {
        let inner = arc.ring as f64 * thickness;
        let outer = inner + thickness;
        let fill = if arc.gray { gray() } else { intensity_color(arc.intensity) };
        let stroke = if arc.dashed {
            r##" stroke="#636363" stroke-width="2" stroke-dasharray="6 3""##.to_string()
        } else {
            r##" stroke="#ffffff" stroke-width="1""##.to_string()
        };
        let d = sector_path(inner, outer, arc.start_deg, arc.end_deg);
        let _ = writeln!(out, r##"<path d="{d}" fill="{fill}"{stroke}/>"##);
    }

    // Thin unlabeled bands marking collection groups.
    for band in &model.separators {
        let inner = band.ring as f64 * thickness;
        let outer = inner + thickness * 0.06;
        let d = sector_path(inner, outer, band.start_deg, band.end_deg);
        let _ = writeln!(out, r##"<path d="{d}" fill="#999999" fill-opacity="0.6"/>"##);
    }

    for arc in &model.arcs {
        if arc.span_deg() < model.label_threshold_deg {
            continue;
        }
        let inner = arc.ring as f64 * thickness;
        let radius = if arc.ring == 0 { thickness * 0.4 } else { inner + thickness / 2.0 };
        let mid = (arc.start_deg + arc.end_deg) / 2.0;
        let (x, y) = point(mid, radius);
        let pct = (arc.percent * 100.0).round() as i64;
        let label = format!("{} {}%", arc.title, pct);
        let _ = writeln!(
            out,
            r##"<text x="{}" y="{}" font-size="11" text-anchor="middle" dominant-baseline="middle">{}</text>"##,
            fmt(x),
            fmt(y),
            escape(&label)
        );
    }

    let _ = writeln!(out, "</svg>");
    out.into_bytes()
}

fn intensity_color(intensity: f64) -> String {
    // Linear ramp from near-white to dark blue.
    let t = intensity.clamp(0.0, 1.0);
    let lerp = |a: f64, b: f64| (a + (b - a) * t).round() as u8;
    format!("#{:02x}{:02x}{:02x}", lerp(247.0, 8.0), lerp(251.0, 48.0), lerp(255.0, 107.0))
}

fn gray() -> String {
    "#d4d4d4".to_string()
}

fn point(deg: f64, radius: f64) -> (f64, f64) {
    // 0 degrees at twelve o'clock, clockwise.
    let rad = (deg - 90.0).to_radians();
    (CENTER + radius * rad.cos(), CENTER + radius * rad.sin())
}

fn sector_path(inner: f64, outer: f64, start: f64, end: f64) -> String {
    let span = end - start;
    if span >= 359.999 {
        return full_annulus(inner, outer);
    }
    let large = if span > 180.0 { 1 } else { 0 };
    let (ox1, oy1) = point(start, outer);
    let (ox2, oy2) = point(end, outer);
    if inner <= 0.0 {
        return format!(
            "M {} {} L {} {} A {} {} 0 {} 1 {} {} Z",
            fmt(CENTER),
            fmt(CENTER),
            fmt(ox1),
            fmt(oy1),
            fmt(outer),
            fmt(outer),
            large,
            fmt(ox2),
            fmt(oy2)
        );
    }
    let (ix1, iy1) = point(start, inner);
    let (ix2, iy2) = point(end, inner);
    format!(
        "M {} {} A {} {} 0 {} 1 {} {} L {} {} A {} {} 0 {} 0 {} {} Z",
        fmt(ox1),
        fmt(oy1),
        fmt(outer),
        fmt(outer),
        large,
        fmt(ox2),
        fmt(oy2),
        fmt(ix2),
        fmt(iy2),
        fmt(inner),
        fmt(inner),
        large,
        fmt(ix1),
        fmt(iy1)
    )
}

fn full_annulus(inner: f64, outer: f64) -> String {
    if inner <= 0.0 {
        // Full disk as two half-circle arcs.
        let (x1, y1) = point(0.0, outer);
        let (x2, y2) = point(180.0, outer);
        return format!(
            "M {} {} A {} {} 0 1 1 {} {} A {} {} 0 1 1 {} {} Z",
            fmt(x1),
            fmt(y1),
            fmt(outer),
            fmt(outer),
            fmt(x2),
            fmt(y2),
            fmt(outer),
            fmt(outer),
            fmt(x1),
            fmt(y1)
        );
    }
    let (ox1, oy1) = point(0.0, outer);
    let (ox2, oy2) = point(180.0, outer);
    let (ix1, iy1) = point(0.0, inner);
    let (ix2, iy2) = point(180.0, inner);
    format!(
        "M {} {} A {} {} 0 1 1 {} {} A {} {} 0 1 1 {} {} Z M {} {} A {} {} 0 1 0 {} {} A {} {} 0 1 0 {} {} Z",
        fmt(ox1), fmt(oy1), fmt(outer), fmt(outer), fmt(ox2), fmt(oy2),
        fmt(outer), fmt(outer), fmt(ox1), fmt(oy1),
        fmt(ix1), fmt(iy1), fmt(inner), fmt(inner), fmt(ix2), fmt(iy2),
        fmt(inner), fmt(inner), fmt(ix1), fmt(iy1)
    )
}

fn fmt(v: f64) -> String {
    format!("{v:.3}")
}

fn escape(s: &str) -> String {
    s.replace('&', "&amp;").replace('<', "&lt;").replace('>', "&gt;")
}
