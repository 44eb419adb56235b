//! Hand-written SVG for workspace paths and braid diagrams.

use std::fmt::Write;

use crate::geometry::{CrossingSet, Point, Trajectory};
use crate::workspace::Rect;

const PALETTE: [&str; 10] =
    ["#1f77b4", "#ff7f0e", "#2ca02c", "#d62728", "#9467bd", "#8c564b", "#e377c2", "#7f7f7f", "#bcbd22", "#17becf"];
const SIZE: f64 = 600.0;
const MARGIN: f64 = 30.0;

fn color(i: usize) -> &'static str {
    PALETTE[i % PALETTE.len()]
}

fn header(out: &mut String, width: f64, height: f64) {
    let _ = writeln!(
        out,
        r#"<svg xmlns="http://www.w3.org/2000/svg" width="{width:.0}" height="{height:.0}" viewBox="0 0 {width:.0} {height:.0}">"#
    );
    let _ = writeln!(out, r#"<rect width="100%" height="100%" fill="white"/>"#);
}

/// Bounding box of the waypoints and markers, grown to a square with some
/// padding when no workspace is given.
fn bounds(trajs: &[Trajectory], extra: &[Point]) -> Rect {
    let pts = trajs.iter().flat_map(|t| t.waypoints().iter().map(|w| w.pos)).chain(extra.iter().copied());
    let mut r = Rect { xmin: f64::INFINITY, xmax: f64::NEG_INFINITY, ymin: f64::INFINITY, ymax: f64::NEG_INFINITY };
    for p in pts {
        r.xmin = r.xmin.min(p.x);
        r.xmax = r.xmax.max(p.x);
        r.ymin = r.ymin.min(p.y);
        r.ymax = r.ymax.max(p.y);
    }
    let side = (r.width().max(r.height()) + 2.0).max(1.0);
    let c = r.center();
    Rect { xmin: c.x - side / 2.0, xmax: c.x + side / 2.0, ymin: c.y - side / 2.0, ymax: c.y + side / 2.0 }
}

/// Top view of the workspace: one colored polyline per robot, bases as
/// squares, final positions as dots.
pub fn paths(trajs: &[Trajectory], bases: &[Point], region: Option<Rect>) -> String {
    let r = region.unwrap_or_else(|| bounds(trajs, bases));
    let scale = (SIZE - 2.0 * MARGIN) / r.width().max(r.height());
    let map = |p: Point| (MARGIN + (p.x - r.xmin) * scale, MARGIN + (r.ymax - p.y) * scale);
    let (w, h) = (2.0 * MARGIN + r.width() * scale, 2.0 * MARGIN + r.height() * scale);

    let mut out = String::new();
    header(&mut out, w, h);
    let _ = writeln!(
        out,
        r##"<rect class="workspace" x="{MARGIN}" y="{MARGIN}" width="{:.2}" height="{:.2}" fill="none" stroke="#444"/>"##,
        r.width() * scale,
        r.height() * scale
    );
    for (i, b) in bases.iter().enumerate() {
        let (x, y) = map(*b);
        let _ = writeln!(
            out,
            r#"<rect class="base" x="{:.2}" y="{:.2}" width="10" height="10" fill="{}"/>"#,
            x - 5.0,
            y - 5.0,
            color(i)
        );
    }
    for (i, t) in trajs.iter().enumerate() {
        let wps = t.waypoints();
        if wps.windows(2).any(|w| w[0].pos != w[1].pos) {
            let pts: Vec<String> = wps
                .iter()
                .map(|w| {
                    let (x, y) = map(w.pos);
                    format!("{x:.2},{y:.2}")
                })
                .collect();
            let _ = writeln!(
                out,
                r#"<polyline class="path" points="{}" fill="none" stroke="{}" stroke-width="2"/>"#,
                pts.join(" "),
                color(i)
            );
        }
        let (x, y) = map(t.end());
        let _ = writeln!(out, r#"<circle class="target" cx="{x:.2}" cy="{y:.2}" r="5" fill="{}"/>"#, color(i));
    }
    out.push_str("</svg>\n");
    out
}

/// Braid diagram of one axis: strands left to right by initial rank, one
/// level per crossing with time running upward, and a gap in the strand
/// passing behind.
pub fn braid(set: &CrossingSet) -> String {
    let n = set.initial_order.len();
    let levels = set.events.len().max(1);
    let dx = 60.0;
    let dy = 50.0;
    let (w, h) = (2.0 * MARGIN + dx * (n.max(2) - 1) as f64, 2.0 * MARGIN + dy * levels as f64);
    let x_of = |slot: usize| MARGIN + dx * slot as f64;
    let y_of = |level: usize| h - MARGIN - dy * level as f64;

    let mut out = String::new();
    header(&mut out, w, h);
    let mut order = set.initial_order.clone();
    let mut segments: Vec<String> = Vec::new();
    let mut line = |robot: usize, a: (f64, f64), b: (f64, f64)| {
        segments.push(format!(
            r#"<line class="strand" data-robot="{robot}" x1="{:.2}" y1="{:.2}" x2="{:.2}" y2="{:.2}" stroke="{}" stroke-width="3"/>"#,
            a.0,
            a.1,
            b.0,
            b.1,
            color(robot)
        ));
    };
    let mut crossings = Vec::new();
    for level in 0..levels {
        let (y0, y1) = (y_of(level), y_of(level + 1));
        let event = set.events.get(level);
        let pos = event.map(|e| usize::from(e.letter.index()) - 1);
        for (slot, &robot) in order.iter().enumerate() {
            match pos {
                Some(p) if slot == p || slot == p + 1 => {}
                _ => line(robot, (x_of(slot), y0), (x_of(slot), y1)),
            }
        }
        let (Some(e), Some(p)) = (event, pos) else { continue };
        let (left, right) = (order[p], order[p + 1]);
        let (xl, xr) = (x_of(p), x_of(p + 1));
        // a positive letter has the left strand deeper, so it passes behind
        let (under, over) = if e.letter.sign() > 0 { (left, right) } else { (right, left) };
        line(over, if over == right { (xr, y0) } else { (xl, y0) }, if over == right { (xl, y1) } else { (xr, y1) });
        let (ua, ub) = if under == left { ((xl, y0), (xr, y1)) } else { ((xr, y0), (xl, y1)) };
        let gap = 0.18;
        let lerp = |s: f64| (ua.0 + (ub.0 - ua.0) * s, ua.1 + (ub.1 - ua.1) * s);
        line(under, ua, lerp(0.5 - gap));
        line(under, lerp(0.5 + gap), ub);
        crossings.push(format!(
            r#"<circle class="crossing" data-letter="{}" data-time="{}" cx="{:.2}" cy="{:.2}" r="2" fill="none"/>"#,
            e.letter,
            e.time,
            (xl + xr) / 2.0,
            (y0 + y1) / 2.0
        ));
        order.swap(p, p + 1);
    }
    for s in segments.iter().chain(&crossings) {
        out.push_str(s);
        out.push('\n');
    }
    for (slot, robot) in set.initial_order.iter().enumerate() {
        let _ = writeln!(
            out,
            r#"<text x="{:.2}" y="{:.2}" text-anchor="middle" font-size="12">{robot}</text>"#,
            x_of(slot),
            h - MARGIN / 3.0
        );
    }
    out.push_str("</svg>\n");
    out
}
