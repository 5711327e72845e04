use std::f64::consts::TAU;

use crate::error::{Error, Result};
use crate::vec2::Vec2;

/// Smallest node count accepted for a discrete curve.
pub const MIN_NODES: usize = 16;

/// Below this fraction of `max |z|` a node counts as touching the origin.
pub const ORIGIN_FLAG_RATIO: f64 = 1e-6;

/// A closed planar polyline `z_j = z(φ_j)`, `φ_j = 2πj/N`, standing in for a
/// profile curve in `ℂ*`, together with the ambient dimension `n` of the
/// equivariant Lagrangian it generates.
///
/// Indices wrap modulo `N`. Every segment has positive length, and for
/// `n ≥ 2` no node sits at the origin.
#[derive(Debug, Clone, PartialEq)]
pub struct DiscreteCurve {
    points: Vec<Vec2>,
    n: u32,
}

impl DiscreteCurve {
    pub fn new(points: Vec<Vec2>, n: u32) -> Result<Self> {
        if n == 0 {
            return Err(Error::BadDimension);
        }
        if points.len() < MIN_NODES {
            return Err(Error::TooFewNodes { min: MIN_NODES, got: points.len() });
        }
        let len = points.len();
        for (i, p) in points.iter().enumerate() {
            if !p.is_finite() {
                return Err(Error::NonFinite("curve construction"));
            }
            let next = if i + 1 == len { points[0] } else { points[i + 1] };
            if (next - *p).norm_sq() <= 0.0 {
                return Err(Error::DegenerateSegment { index: i, length: next.dist(*p) });
            }
            if n >= 2 && p.norm_sq() <= 0.0 {
                return Err(Error::OriginContact { index: i, radius: p.norm() });
            }
        }
        Ok(DiscreteCurve { points, n })
    }

    /// Samples `z(φ)` on the uniform grid.
    pub fn from_fn(nodes: usize, n: u32, z: impl Fn(f64) -> Vec2) -> Result<Self> {
        let dphi = TAU / nodes as f64;
        Self::new((0..nodes).map(|j| z(j as f64 * dphi)).collect(), n)
    }

    #[inline]
    pub fn points(&self) -> &[Vec2] {
        &self.points
    }

    pub fn into_points(self) -> Vec<Vec2> {
        self.points
    }

    #[inline]
    pub fn len(&self) -> usize {
        self.points.len()
    }

    #[inline]
    pub fn is_empty(&self) -> bool {
        self.points.is_empty()
    }

    /// Ambient dimension `n` of `ℂⁿ`.
    #[inline]
    pub fn n(&self) -> u32 {
        self.n
    }

    /// Same points, different ambient dimension.
    pub fn with_n(&self, n: u32) -> Result<Self> {
        Self::new(self.points.clone(), n)
    }

    /// Parameter spacing `Δφ = 2π/N`.
    #[inline]
    pub fn dphi(&self) -> f64 {
        TAU / self.points.len() as f64
    }

    #[inline]
    pub fn point(&self, j: usize) -> Vec2 {
        self.points[j % self.points.len()]
    }

    pub fn segment_lengths(&self) -> Vec<f64> {
        let len = self.len();
        (0..len).map(|i| self.points[(i + 1) % len].dist(self.points[i])).collect()
    }

    /// Length of the polyline itself.
    pub fn polyline_length(&self) -> f64 {
        self.segment_lengths().iter().sum()
    }

    fn segment_sq(&self) -> impl Iterator<Item = f64> + '_ {
        let pts = &self.points;
        pts.windows(2).map(|w| (w[1] - w[0]).norm_sq()).chain(std::iter::once((pts[0] - pts[pts.len() - 1]).norm_sq()))
    }

    pub fn min_segment(&self) -> f64 {
        self.segment_sq().fold(f64::INFINITY, f64::min).sqrt()
    }

    pub fn max_segment(&self) -> f64 {
        self.segment_sq().fold(0.0, f64::max).sqrt()
    }

    pub fn radii(&self) -> Vec<f64> {
        self.points.iter().map(|p| p.norm()).collect()
    }

    pub fn min_r(&self) -> f64 {
        self.points.iter().map(|p| p.norm_sq()).fold(f64::INFINITY, f64::min).sqrt()
    }

    pub fn max_r(&self) -> f64 {
        self.points.iter().map(|p| p.norm_sq()).fold(0.0, f64::max).sqrt()
    }

    /// True when some node is closer to the origin than
    /// [`ORIGIN_FLAG_RATIO`]` · max |z|`.
    pub fn near_origin(&self) -> bool {
        self.min_r() < ORIGIN_FLAG_RATIO * self.max_r()
    }

    /// Rigid rotation about the origin.
    pub fn rotated(&self, angle: f64) -> Self {
        DiscreteCurve {
            points: self.points.iter().map(|p| p.rotate(angle)).collect(),
            n: self.n,
        }
    }

    /// Dilation `z ↦ c z`.
    pub fn scaled(&self, c: f64) -> Result<Self> {
        Self::new(self.points.iter().map(|p| *p * c).collect(), self.n)
    }

    /// Pointwise reflection `z ↦ -z`.
    pub fn negated(&self) -> Self {
        DiscreteCurve { points: self.points.iter().map(|p| -*p).collect(), n: self.n }
    }

    /// Same image traversed the other way round, starting at node 0.
    pub fn reversed(&self) -> Self {
        let mut points = Vec::with_capacity(self.len());
        points.push(self.points[0]);
        points.extend(self.points[1..].iter().rev());
        DiscreteCurve { points, n: self.n }
    }

    /// Cyclic relabelling so that node `shift` becomes node 0.
    pub fn shifted(&self, shift: usize) -> Self {
        let len = self.len();
        DiscreteCurve {
            points: (0..len).map(|j| self.points[(j + shift) % len]).collect(),
            n: self.n,
        }
    }

    /// Shoelace area of the polygon. Only used as an independent cross-check
    /// of the smooth area quadrature.
    pub fn shoelace_area(&self) -> f64 {
        let len = self.len();
        0.5 * (0..len).map(|i| self.points[i].cross(self.points[(i + 1) % len])).sum::<f64>()
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn circle(nodes: usize) -> Vec<Vec2> {
        (0..nodes).map(|j| Vec2::from_polar(1.0, TAU * j as f64 / nodes as f64)).collect()
    }

    #[test]
    fn rejects_short_curves() {
        assert!(matches!(
            DiscreteCurve::new(circle(8), 2),
            Err(Error::TooFewNodes { min: 16, got: 8 })
        ));
    }

    #[test]
    fn rejects_repeated_nodes() {
        let mut pts = circle(32);
        pts[5] = pts[4];
        assert!(matches!(DiscreteCurve::new(pts, 1), Err(Error::DegenerateSegment { index: 4, .. })));
    }

    #[test]
    fn origin_only_forbidden_for_n_at_least_two() {
        let mut pts = circle(32);
        pts[3] = Vec2::ZERO;
        assert!(DiscreteCurve::new(pts.clone(), 1).is_ok());
        assert!(matches!(DiscreteCurve::new(pts, 2), Err(Error::OriginContact { index: 3, .. })));
    }

    #[test]
    fn reversed_keeps_the_start_node() {
        let c = DiscreteCurve::new(circle(32), 1).unwrap();
        let r = c.reversed();
        assert_eq!(r.point(0), c.point(0));
        assert_eq!(r.point(1), c.point(31));
        assert!((c.shoelace_area() + r.shoelace_area()).abs() < 1e-14);
    }
}
