//! Hand-written SVG: a curve overlay and an invariant time series.

use std::fmt::Write;

use lagflow_core::Vec2;

const WIDTH: f64 = 640.0;
const HEIGHT: f64 = 640.0;
const MARGIN: f64 = 48.0;

/// Axis-aligned bounds with a fallback for empty or flat data.
#[derive(Debug, Clone, Copy)]
struct Bounds {
    x0: f64,
    x1: f64,
    y0: f64,
    y1: f64,
}

impl Bounds {
    fn of(points: impl Iterator<Item = (f64, f64)>) -> Option<Self> {
        let mut b: Option<Bounds> = None;
        for (x, y) in points.filter(|(x, y)| x.is_finite() && y.is_finite()) {
            b = Some(match b {
                None => Bounds { x0: x, x1: x, y0: y, y1: y },
                Some(b) => Bounds { x0: b.x0.min(x), x1: b.x1.max(x), y0: b.y0.min(y), y1: b.y1.max(y) },
            });
        }
        b
    }

    fn padded(self) -> Self {
        let pad = |lo: f64, hi: f64| {
            let w = hi - lo;
            let p = if w > 0.0 { 0.05 * w } else { 0.5 * lo.abs().max(1.0) };
            (lo - p, hi + p)
        };
        let (x0, x1) = pad(self.x0, self.x1);
        let (y0, y1) = pad(self.y0, self.y1);
        Bounds { x0, x1, y0, y1 }
    }

    /// Equal scale on both axes.
    fn square(self) -> Self {
        let (cx, cy) = (0.5 * (self.x0 + self.x1), 0.5 * (self.y0 + self.y1));
        let half = 0.5 * (self.x1 - self.x0).max(self.y1 - self.y0);
        Bounds { x0: cx - half, x1: cx + half, y0: cy - half, y1: cy + half }
    }
}

/// Maps data coordinates into a pixel rectangle.
struct Frame {
    b: Bounds,
    left: f64,
    top: f64,
    w: f64,
    h: f64,
}

impl Frame {
    fn x(&self, x: f64) -> f64 {
        self.left + (x - self.b.x0) / (self.b.x1 - self.b.x0) * self.w
    }

    fn y(&self, y: f64) -> f64 {
        self.top + self.h - (y - self.b.y0) / (self.b.y1 - self.b.y0) * self.h
    }

    fn path(&self, pts: impl Iterator<Item = (f64, f64)>, closed: bool) -> String {
        let mut d = String::new();
        for (i, (x, y)) in pts.filter(|(x, y)| x.is_finite() && y.is_finite()).enumerate() {
            let _ = write!(d, "{}{:.2},{:.2}", if i == 0 { "M" } else { " L" }, self.x(x), self.y(y));
        }
        if closed && !d.is_empty() {
            d.push_str(" Z");
        }
        d
    }

    fn axes(&self, out: &mut String, x_label: &str, y_label: &str) {
        let (l, t, r, b) = (self.left, self.top, self.left + self.w, self.top + self.h);
        let _ = writeln!(out, r##"<rect x="{l:.2}" y="{t:.2}" width="{:.2}" height="{:.2}" fill="none" stroke="#444"/>"##, self.w, self.h);
        for (v, anchor, x, y) in [
            (self.b.x0, "start", l, b + 16.0),
            (self.b.x1, "end", r, b + 16.0),
        ] {
            let _ = writeln!(out, r#"<text x="{x:.2}" y="{y:.2}" text-anchor="{anchor}">{}</text>"#, tick(v));
        }
        for (v, y) in [(self.b.y0, b), (self.b.y1, t + 10.0)] {
            let _ = writeln!(out, r#"<text x="{:.2}" y="{y:.2}" text-anchor="end">{}</text>"#, l - 4.0, tick(v));
        }
        let _ = writeln!(out, r#"<text x="{:.2}" y="{:.2}" text-anchor="middle">{}</text>"#, l + 0.5 * self.w, b + 32.0, escape(x_label));
        let _ = writeln!(
            out,
            r#"<text x="{:.2}" y="{:.2}" text-anchor="middle" transform="rotate(-90 {:.2} {:.2})">{}</text>"#,
            l - 30.0,
            t + 0.5 * self.h,
            l - 30.0,
            t + 0.5 * self.h,
            escape(y_label)
        );
    }
}

fn tick(v: f64) -> String {
    if v == 0.0 || (1e-3..1e4).contains(&v.abs()) {
        format!("{v:.3}")
    } else {
        format!("{v:.2e}")
    }
}

fn escape(s: &str) -> String {
    s.replace('&', "&amp;").replace('<', "&lt;").replace('>', "&gt;")
}

fn header(w: f64, h: f64) -> String {
    format!(
        "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"{w}\" height=\"{h}\" viewBox=\"0 0 {w} {h}\" font-family=\"sans-serif\" font-size=\"11\">\n<rect width=\"100%\" height=\"100%\" fill=\"white\"/>\n"
    )
}

/// Blue at `s = 0` to red at `s = 1`.
fn ramp(s: f64) -> String {
    let s = s.clamp(0.0, 1.0);
    let r = (40.0 + 200.0 * s).round() as u8;
    let b = (220.0 - 190.0 * s).round() as u8;
    format!("#{r:02x}30{b:02x}")
}

/// Snapshots drawn over each other, coloured by time, with the origin marked.
pub fn curve_overlay(snapshots: &[(f64, &[Vec2])]) -> String {
    let all = snapshots.iter().flat_map(|(_, p)| p.iter().map(|q| (q.x, q.y))).chain([(0.0, 0.0)]);
    let b = Bounds::of(all).unwrap_or(Bounds { x0: -1.0, x1: 1.0, y0: -1.0, y1: 1.0 }).padded().square();
    let frame = Frame { b, left: MARGIN, top: MARGIN, w: WIDTH - 2.0 * MARGIN, h: HEIGHT - 2.0 * MARGIN };
    let mut out = header(WIDTH, HEIGHT);
    frame.axes(&mut out, "x", "y");
    let (t0, t1) = snapshots.iter().fold((f64::INFINITY, f64::NEG_INFINITY), |(a, c), (t, _)| (a.min(*t), c.max(*t)));
    for (t, pts) in snapshots {
        let s = if t1 > t0 { (t - t0) / (t1 - t0) } else { 0.0 };
        let d = frame.path(pts.iter().map(|p| (p.x, p.y)), true);
        let _ = writeln!(out, r#"<path d="{d}" fill="none" stroke="{}" stroke-width="1.2"><title>t = {t:.6e}</title></path>"#, ramp(s));
    }
    let (ox, oy) = (frame.x(0.0), frame.y(0.0));
    let _ = writeln!(out, r#"<path d="M{:.2},{oy:.2} L{:.2},{oy:.2} M{ox:.2},{:.2} L{ox:.2},{:.2}" stroke="black" stroke-width="1.5"/>"#, ox - 6.0, ox + 6.0, oy - 6.0, oy + 6.0);
    let _ = writeln!(out, r#"<text x="{:.2}" y="{:.2}">0</text>"#, ox + 5.0, oy - 5.0);
    out.push_str("</svg>\n");
    out
}

/// Data for [`time_series`].
#[derive(Debug, Clone, Copy, Default)]
pub struct Series<'a> {
    pub times: &'a [f64],
    pub area: &'a [f64],
    /// `A(z₀)` and the slope of the predicted line `A(z₀) + slope·t`.
    pub predicted: Option<(f64, f64)>,
    /// `m(t) = |A|²(T - t)`, aligned with `times`.
    pub m: Option<&'a [f64]>,
}

/// Area against its predicted line, and `m(t)` on a log scale below it.
pub fn time_series(s: &Series<'_>) -> String {
    let panel_h = 0.5 * (HEIGHT - 3.0 * MARGIN);
    let mut out = header(WIDTH, HEIGHT);
    let t_range = |b: Option<Bounds>| b.unwrap_or(Bounds { x0: 0.0, x1: 1.0, y0: 0.0, y1: 1.0 });

    let pred: Vec<(f64, f64)> = match (s.predicted, s.times.first(), s.times.last()) {
        (Some((a0, slope)), Some(&ta), Some(&tb)) => vec![(ta, a0 + slope * ta), (tb, a0 + slope * tb)],
        _ => Vec::new(),
    };
    let data = || s.times.iter().copied().zip(s.area.iter().copied());
    let b = t_range(Bounds::of(data().chain(pred.iter().copied()))).padded();
    let top = Frame { b, left: MARGIN + 16.0, top: MARGIN, w: WIDTH - 2.0 * MARGIN - 16.0, h: panel_h };
    top.axes(&mut out, "t", "area");
    if !pred.is_empty() {
        let _ = writeln!(out, r##"<path d="{}" fill="none" stroke="#d22" stroke-width="1.5" stroke-dasharray="6 4"><title>predicted</title></path>"##, top.path(pred.iter().copied(), false));
    }
    let _ = writeln!(out, r##"<path d="{}" fill="none" stroke="#24a" stroke-width="1.2"><title>area</title></path>"##, top.path(data(), false));

    let m_pts: Vec<(f64, f64)> = match s.m {
        Some(m) => s.times.iter().zip(m).filter(|(_, v)| **v > 0.0).map(|(t, v)| (*t, v.log10())).collect(),
        None => Vec::new(),
    };
    let b = t_range(Bounds::of(m_pts.iter().copied())).padded();
    let bottom = Frame { b, left: top.left, top: 2.0 * MARGIN + panel_h, w: top.w, h: panel_h };
    bottom.axes(&mut out, "t", "log10 m(t)");
    let _ = writeln!(out, r##"<path d="{}" fill="none" stroke="#282" stroke-width="1.2"><title>m(t)</title></path>"##, bottom.path(m_pts.iter().copied(), false));
    out.push_str("</svg>\n");
    out
}
