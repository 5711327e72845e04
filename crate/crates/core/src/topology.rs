use std::f64::consts::{PI, TAU};

use serde::{Deserialize, Serialize};

use crate::curve::DiscreteCurve;
use crate::error::{Error, Result};
use crate::geometry::GeometryField;
use crate::vec2::Vec2;

/// Angle sums must land this close to a whole number of turns.
pub const TURN_TOLERANCE: f64 = 1e-6;

/// Largest admissible single angle increment. Principal values never exceed π,
/// so the cut-off sits well below it: an increment close to π could equally
/// have been one of the opposite sign.
pub const MAX_INCREMENT: f64 = 0.75 * PI;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct TopologyInfo {
    /// Winding number about the origin; `None` when the curve touches it.
    pub wind0: Option<i64>,
    /// Rotation number of the tangent.
    pub rot: i64,
    /// Signed symplectic area `½ ∮ ⟨z,ν⟩ dμ`.
    pub area: f64,
    /// `2π(rot + (n-1) wind₀) / A` when `A ≠ 0`.
    pub eps_monotone: Option<f64>,
    pub n: u32,
}

impl TopologyInfo {
    /// `rot + (n-1) wind₀`, the integer fixing `∮ f dμ = 2π q`. For `n = 1` the
    /// winding number is irrelevant and may be undefined.
    pub fn q(&self) -> Option<i64> {
        let m = i64::from(self.n) - 1;
        if m == 0 {
            Some(self.rot)
        } else {
            self.wind0.map(|w| self.rot + m * w)
        }
    }

    /// Slope of the area law, `dA/dt = -2π q`.
    pub fn area_slope(&self) -> Option<f64> {
        self.q().map(|q| -TAU * q as f64)
    }

    /// Monotone in the sense of a positive monotonicity constant.
    pub fn is_monotone(&self) -> bool {
        self.eps_monotone.is_some_and(|e| e > 0.0)
    }
}

fn count_turns(what: &'static str, increments: impl Iterator<Item = (usize, f64)>) -> Result<i64> {
    let mut total = 0.0;
    for (index, d) in increments {
        if d.abs() >= MAX_INCREMENT || !d.is_finite() {
            return Err(Error::RefineGrid { index, increment: d });
        }
        total += d;
    }
    let turns = total / TAU;
    let rounded = turns.round();
    if (turns - rounded).abs() > TURN_TOLERANCE {
        return Err(Error::NonIntegerWinding { what, turns });
    }
    Ok(rounded as i64)
}

#[inline]
fn angle_between(a: Vec2, b: Vec2) -> f64 {
    a.cross(b).atan2(a.dot(b))
}

/// Winding number about the origin from principal-value increments of `arg z`.
pub fn winding_number(points: &[Vec2]) -> Result<i64> {
    let len = points.len();
    if let Some((index, p)) = points.iter().enumerate().find(|(_, p)| p.norm() == 0.0) {
        return Err(Error::OriginContact { index, radius: p.norm() });
    }
    count_turns("winding", (0..len).map(|i| (i, angle_between(points[i], points[(i + 1) % len]))))
}

/// Rotation number from the turning of consecutive segment directions.
pub fn rotation_number(points: &[Vec2]) -> Result<i64> {
    let len = points.len();
    let seg = |i: usize| points[(i + 1) % len] - points[i % len];
    count_turns("rotation", (0..len).map(|i| (i, angle_between(seg(i + len - 1), seg(i)))))
}

/// Symplectic area `A(z) = ½ Σ ⟨z_j, ν_j⟩ dμ_j = ½ Σ z_j × z'_j Δφ`.
pub fn symplectic_area(curve: &DiscreteCurve, field: &GeometryField) -> f64 {
    0.5 * curve
        .points()
        .iter()
        .zip(&field.dz)
        .map(|(z, dz)| z.cross(*dz))
        .sum::<f64>()
        * field.dphi
}

/// Winding and rotation numbers, symplectic area and monotonicity constant.
///
/// The winding number is left undefined when the curve comes within
/// `1e-6 · max r` of the origin; that is an error only for `n ≥ 2`.
pub fn topology(curve: &DiscreteCurve, field: &GeometryField) -> Result<TopologyInfo> {
    let n = curve.n();
    let wind0 = if curve.near_origin() {
        if n >= 2 {
            let (index, radius) = curve
                .radii()
                .into_iter()
                .enumerate()
                .min_by(|a, b| a.1.total_cmp(&b.1))
                .expect("non-empty curve");
            return Err(Error::OriginContact { index, radius });
        }
        None
    } else {
        Some(winding_number(curve.points())?)
    };
    let rot = rotation_number(curve.points())?;
    let area = symplectic_area(curve, field);
    let mut info = TopologyInfo { wind0, rot, area, eps_monotone: None, n };
    if area != 0.0 {
        info.eps_monotone = info.q().map(|q| TAU * q as f64 / area);
    }
    Ok(info)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::geometry::geometry;

    fn info(curve: &DiscreteCurve) -> TopologyInfo {
        topology(curve, &geometry(curve).unwrap()).unwrap()
    }

    #[test]
    fn unit_circle_about_origin() {
        for n in 1..=3u32 {
            let c = DiscreteCurve::from_fn(256, n, |p| Vec2::from_polar(1.0, p)).unwrap();
            let t = info(&c);
            assert_eq!((t.wind0, t.rot), (Some(1), 1));
            assert!((t.area - PI).abs() < 1e-4);
            assert!((t.eps_monotone.unwrap() - 2.0 * f64::from(n)).abs() < 1e-4);
        }
    }

    #[test]
    fn offset_circle() {
        let c = DiscreteCurve::from_fn(256, 2, |p| Vec2::new(3.0, 0.0) + Vec2::from_polar(1.0, p)).unwrap();
        let t = info(&c);
        assert_eq!((t.wind0, t.rot), (Some(0), 1));
        assert!((t.area - PI).abs() < 1e-4);
        assert!((t.eps_monotone.unwrap() - 2.0).abs() < 1e-4);
    }

    #[test]
    fn doubly_wound_circle() {
        let c = DiscreteCurve::from_fn(256, 2, |p| Vec2::from_polar(1.0, 2.0 * p)).unwrap();
        let t = info(&c);
        assert_eq!((t.wind0, t.rot), (Some(2), 2));
        assert!((t.area - TAU).abs() < 1e-4);
    }

    #[test]
    fn lemniscate_has_zero_area_and_rotation() {
        let c = DiscreteCurve::from_fn(256, 1, |p| {
            let s = 1.0 + p.sin().powi(2);
            Vec2::new(p.cos() / s, p.sin() * p.cos() / s)
        })
        .unwrap();
        let t = info(&c);
        assert_eq!(t.rot, 0);
        assert_eq!(t.wind0, None);
        assert!(t.area.abs() < 1e-4);
        assert_eq!(t.eps_monotone.unwrap_or(0.0), 0.0);
        assert!(!t.is_monotone());
    }

    #[test]
    fn coarse_grid_around_origin_is_refused() {
        let pts = [Vec2::new(1.0, 0.0), Vec2::new(-1.0, 0.5), Vec2::new(-1.0, -0.5)];
        assert!(matches!(winding_number(&pts), Err(Error::RefineGrid { .. })));
    }

    #[test]
    fn area_matches_shoelace_for_smooth_curves() {
        let c = DiscreteCurve::from_fn(512, 2, |p| {
            Vec2::from_polar(1.0 + 0.3 * (2.0 * p).cos(), p) + Vec2::new(0.2, 0.0)
        })
        .unwrap();
        let t = info(&c);
        // shoelace is only second order, the quadrature is much better
        assert!((t.area - c.shoelace_area()).abs() < 1e-3 * t.area);
    }
}
