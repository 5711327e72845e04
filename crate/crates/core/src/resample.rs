//! Redistribution of nodes along a closed curve. The node sequence is
//! treated as samples of a periodic function of `φ`, refined by trigonometric
//! interpolation onto a fine grid and interpolated there with cubic Hermite
//! pieces. Only the parametrisation changes; the image is reproduced to the
//! accuracy of the interpolant.

use std::cell::RefCell;

use num_complex::Complex64;
use rustfft::FftPlanner;

use crate::curve::DiscreteCurve;
use crate::error::{Error, Result};
use crate::vec2::Vec2;

/// Equal-chord polishing stops once all chords agree to this relative level.
const CHORD_TOL: f64 = 1e-10;
const CHORD_SWEEPS: usize = 12;

/// Fine grid points per original node.
pub const REFINE_FACTOR: usize = 4;

thread_local! {
    // plans are cached per thread; the flow resamples at a fixed size
    static PLANNER: RefCell<FftPlanner<f64>> = RefCell::new(FftPlanner::new());
}

/// Trigonometric interpolant of a closed curve, tabulated on a grid
/// `REFINE_FACTOR` times finer than the nodes, with cumulative arclength.
#[derive(Debug, Clone)]
pub struct SpectralCurve {
    step: f64,
    z: Vec<Vec2>,
    dz: Vec<Vec2>,
    speed: Vec<f64>,
    /// Cumulative arclength at each fine node, `arc[M]` = total length.
    arc: Vec<f64>,
}

fn to_vec(c: Complex64) -> Vec2 {
    Vec2::new(c.re, c.im)
}

impl SpectralCurve {
    pub fn through(curve: &DiscreteCurve) -> Result<Self> {
        let seg = curve.segment_lengths();
        if let Some((index, &length)) = seg.iter().enumerate().find(|(_, l)| !(**l > 0.0)) {
            return Err(Error::DegenerateSegment { index, length });
        }
        let len = curve.len();
        let fine = REFINE_FACTOR * len;
        let (forward, inverse) = PLANNER.with(|p| {
            let mut p = p.borrow_mut();
            (p.plan_fft_forward(len), p.plan_fft_inverse(fine))
        });
        let mut spec: Vec<Complex64> = curve.points().iter().map(|p| Complex64::new(p.x, p.y)).collect();
        forward.process(&mut spec);

        // zero-padded spectrum; an even-length Nyquist mode is split evenly
        let scale = 1.0 / len as f64;
        let mut padded = [vec![Complex64::new(0.0, 0.0); fine], vec![Complex64::new(0.0, 0.0); fine], vec![Complex64::new(0.0, 0.0); fine]];
        let mut put = |slot: usize, freq: i64, c: Complex64| {
            let ik = Complex64::new(0.0, freq as f64);
            padded[0][slot] += c * scale;
            padded[1][slot] += c * ik * scale;
            padded[2][slot] += c * ik * ik * scale;
        };
        for (k, c) in spec.iter().enumerate() {
            let k = k as i64;
            let n = len as i64;
            if 2 * k < n {
                put(k as usize, k, *c);
            } else if 2 * k > n {
                put((fine as i64 + k - n) as usize, k - n, *c);
            } else {
                put(k as usize, k, *c * 0.5);
                put(fine - k as usize, -k, *c * 0.5);
            }
        }
        for p in padded.iter_mut() {
            inverse.process(p);
        }
        let z: Vec<Vec2> = padded[0].iter().map(|c| to_vec(*c)).collect();
        let dz: Vec<Vec2> = padded[1].iter().map(|c| to_vec(*c)).collect();
        let ddz: Vec<Vec2> = padded[2].iter().map(|c| to_vec(*c)).collect();
        let speed: Vec<f64> = dz.iter().map(|d| d.norm()).collect();
        if let Some(index) = speed.iter().position(|s| !(*s > 0.0)) {
            return Err(Error::DegenerateSegment { index: index / REFINE_FACTOR, length: 0.0 });
        }
        let dspeed: Vec<f64> = dz.iter().zip(&ddz).zip(&speed).map(|((d, dd), s)| d.dot(*dd) / s).collect();

        let step = std::f64::consts::TAU / fine as f64;
        let mut arc = Vec::with_capacity(fine + 1);
        arc.push(0.0);
        for m in 0..fine {
            let q = (m + 1) % fine;
            // trapezoid with endpoint derivative correction
            let piece = 0.5 * step * (speed[m] + speed[q]) + step * step / 12.0 * (dspeed[m] - dspeed[q]);
            arc.push(arc[m] + piece);
        }
        Ok(SpectralCurve { step, z, dz, speed, arc })
    }

    #[inline]
    fn fine_len(&self) -> usize {
        self.z.len()
    }

    /// Total length of the interpolant.
    pub fn length(&self) -> f64 {
        self.arc[self.fine_len()]
    }

    /// Arclength position of original node `j`.
    fn node_arc(&self, j: usize) -> f64 {
        self.arc[j * REFINE_FACTOR]
    }

    /// Point at arclength `sigma ∈ [0, length)`, periodic.
    pub fn at_arclength(&self, sigma: f64) -> Vec2 {
        let total = self.length();
        let fine = self.fine_len();
        let sigma = sigma.rem_euclid(total);
        let m = match self.arc.binary_search_by(|a| a.total_cmp(&sigma)) {
            Ok(i) => i.min(fine - 1),
            Err(i) => i - 1,
        };
        let q = (m + 1) % fine;
        let h = self.step;
        let (s0, s1, d0, d1) = (self.arc[m], self.arc[m + 1], self.speed[m], self.speed[q]);
        let hermite = |t: f64| {
            let t2 = t * t;
            let t3 = t2 * t;
            (2.0 * t3 - 3.0 * t2 + 1.0, t3 - 2.0 * t2 + t, -2.0 * t3 + 3.0 * t2, t3 - t2)
        };
        let arc_at = |t: f64| {
            let (a, b, c, d) = hermite(t);
            a * s0 + b * h * d0 + c * s1 + d * h * d1
        };
        let rate_at = |t: f64| {
            let t2 = t * t;
            (6.0 * t2 - 6.0 * t) / h * s0 + (3.0 * t2 - 4.0 * t + 1.0) * d0 + (6.0 * t - 6.0 * t2) / h * s1
                + (3.0 * t2 - 2.0 * t) * d1
        };
        // Newton with a bisection safeguard, t ∈ [0, 1]
        let (mut lo, mut hi) = (0.0, 1.0);
        let mut t = ((sigma - s0) / (s1 - s0)).clamp(0.0, 1.0);
        for _ in 0..60 {
            let err = arc_at(t) - sigma;
            if err == 0.0 {
                break;
            }
            if err > 0.0 {
                hi = t;
            } else {
                lo = t;
            }
            let next = t - err / (rate_at(t) * h);
            let next = if next > lo && next < hi { next } else { 0.5 * (lo + hi) };
            let moved = (next - t).abs();
            t = next;
            if moved <= 4.0 * f64::EPSILON {
                break;
            }
        }
        let (a, b, c, d) = hermite(t);
        self.z[m] * a + self.dz[m] * (b * h) + self.z[q] * c + self.dz[q] * (d * h)
    }

    /// Samples the interpolant at the given arclength positions.
    pub fn sample(&self, sigmas: &[f64]) -> Vec<Vec2> {
        sigmas.iter().map(|s| self.at_arclength(*s)).collect()
    }
}

/// Redistributes the nodes of `curve` so that all `N` chords have equal
/// length, keeping node 0 in place.
pub fn resample_arclength(curve: &DiscreteCurve) -> Result<DiscreteCurve> {
    resample_arclength_to(curve, curve.len())
}

/// As [`resample_arclength`], with a different node count.
pub fn resample_arclength_to(curve: &DiscreteCurve, nodes: usize) -> Result<DiscreteCurve> {
    if nodes == curve.len() && curve.max_segment() <= (1.0 + CHORD_TOL) * curve.min_segment() {
        // already equally spaced
        return Ok(curve.clone());
    }
    let spline = SpectralCurve::through(curve)?;
    let total = spline.length();
    let mut spacing = vec![total / nodes as f64; nodes];
    let mut points = Vec::new();
    for _ in 0..CHORD_SWEEPS {
        let sigmas = cumulative(&spacing);
        points = spline.sample(&sigmas);
        points[0] = curve.point(0);
        let chords: Vec<f64> = (0..nodes).map(|j| points[(j + 1) % nodes].dist(points[j])).collect();
        let mean = chords.iter().sum::<f64>() / nodes as f64;
        let worst = chords.iter().map(|c| (c / mean - 1.0).abs()).fold(0.0, f64::max);
        if worst < CHORD_TOL {
            break;
        }
        for (s, c) in spacing.iter_mut().zip(&chords) {
            *s *= mean / c;
        }
        let sum: f64 = spacing.iter().sum();
        spacing.iter_mut().for_each(|s| *s *= total / sum);
    }
    DiscreteCurve::new(points, curve.n())
}

/// Redistributes nodes so that each new segment carries an equal share of
/// `∫ density ds`, with `density` given per original node and interpolated
/// linearly in arclength. Node 0 stays in place.
pub fn resample_density(curve: &DiscreteCurve, nodes: usize, density: &[f64]) -> Result<DiscreteCurve> {
    let spline = SpectralCurve::through(curve)?;
    let len = curve.len();
    assert_eq!(density.len(), len, "density must be given per node");
    // cumulative mass at the original knots
    let mut mass = Vec::with_capacity(len + 1);
    mass.push(0.0);
    for i in 0..len {
        let ds = spline.node_arc(i + 1) - spline.node_arc(i);
        mass.push(mass[i] + 0.5 * (density[i] + density[(i + 1) % len]) * ds);
    }
    let total = mass[len];
    let sigmas: Vec<f64> = (0..nodes)
        .map(|j| {
            let target = total * j as f64 / nodes as f64;
            let i = match mass.binary_search_by(|m| m.total_cmp(&target)) {
                Ok(i) => i.min(len - 1),
                Err(i) => i - 1,
            };
            let (d0, d1) = (density[i], density[(i + 1) % len]);
            let ds = spline.node_arc(i + 1) - spline.node_arc(i);
            let rem = target - mass[i];
            // invert the trapezoid mass m(x) = d0 x + (d1 - d0) x² / (2 ds)
            let slope = (d1 - d0) / ds;
            let x = if slope.abs() < 1e-14 * d0.max(d1) / ds {
                rem / d0
            } else {
                (-d0 + (d0 * d0 + 2.0 * slope * rem).max(0.0).sqrt()) / slope
            };
            spline.node_arc(i) + x.clamp(0.0, ds)
        })
        .collect();
    let mut points = spline.sample(&sigmas);
    points[0] = curve.point(0);
    DiscreteCurve::new(points, curve.n())
}

fn cumulative(spacing: &[f64]) -> Vec<f64> {
    let mut acc = 0.0;
    spacing
        .iter()
        .map(|s| {
            let here = acc;
            acc += s;
            here
        })
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::geometry::geometry;
    use crate::topology::symplectic_area;
    use std::f64::consts::{PI, TAU};

    fn ellipse(nodes: usize) -> DiscreteCurve {
        DiscreteCurve::from_fn(nodes, 1, |p| Vec2::new(2.0 * p.cos(), p.sin())).unwrap()
    }

    fn seg_ratio(c: &DiscreteCurve) -> f64 {
        c.max_segment() / c.min_segment()
    }

    #[test]
    fn circle_unchanged() {
        let c = DiscreteCurve::from_fn(128, 2, |p| Vec2::from_polar(1.3, p)).unwrap();
        let r = resample_arclength(&c).unwrap();
        for (a, b) in c.points().iter().zip(r.points()) {
            assert!(a.dist(*b) < 1e-8);
        }
    }

    #[test]
    fn ellipse_equalised() {
        let c = ellipse(256);
        assert!(seg_ratio(&c) > 1.5);
        let r = resample_arclength(&c).unwrap();
        assert!(seg_ratio(&r) <= 1.0 + 1e-5, "ratio {}", seg_ratio(&r));
        assert_eq!(r.point(0), c.point(0));
        // nodes stay on the ellipse
        for p in r.points() {
            assert!(((p.x / 2.0).powi(2) + p.y * p.y - 1.0).abs() < 1e-7);
        }
    }

    #[test]
    fn length_and_area_preserved() {
        let c = ellipse(256);
        let r = resample_arclength(&c).unwrap();
        let (gc, gr) = (geometry(&c).unwrap(), geometry(&r).unwrap());
        let rel = |a: f64, b: f64| ((a - b) / a).abs();
        let (lc, lr) = (SpectralCurve::through(&c).unwrap().length(), SpectralCurve::through(&r).unwrap().length());
        assert!(rel(lc, lr) < 1e-8, "length {}", rel(lc, lr));
        // the quadrature length Σdμ is only as good as the difference stencil
        assert!(rel(gc.length(), gr.length()) < 1e-6);
        assert!(rel(symplectic_area(&c, &gc), symplectic_area(&r, &gr)) < 1e-6);
        assert!((symplectic_area(&r, &gr) - TAU).abs() < 1e-6);
    }

    #[test]
    fn interpolant_length_of_circle() {
        let c = DiscreteCurve::from_fn(64, 1, |p| Vec2::from_polar(1.0, p)).unwrap();
        let s = SpectralCurve::through(&c).unwrap();
        assert!((s.length() - TAU).abs() < 1e-12);
    }

    #[test]
    fn change_node_count() {
        let c = ellipse(100);
        let r = resample_arclength_to(&c, 333).unwrap();
        assert_eq!(r.len(), 333);
        assert!(seg_ratio(&r) < 1.0 + 1e-5);
    }

    #[test]
    fn density_concentrates_nodes() {
        let c = DiscreteCurve::from_fn(200, 1, |p| Vec2::from_polar(1.0, p)).unwrap();
        // twice the density on the upper half
        let density: Vec<f64> = c.points().iter().map(|p| if p.y > 0.0 { 2.0 } else { 1.0 }).collect();
        let r = resample_density(&c, 300, &density).unwrap();
        let upper = r.points().iter().filter(|p| p.y > 0.0).count();
        assert!((upper as f64 / 300.0 - 2.0 / 3.0).abs() < 0.02, "{upper}");
        let _ = PI;
    }
}
