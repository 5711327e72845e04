use serde::{Deserialize, Serialize};

use crate::curve::DiscreteCurve;
use crate::exec::{self, Mode};
use crate::geometry::GeometryField;
use crate::vec2::Vec2;

/// Relative tolerance of the orientation tests.
pub const ORIENT_TOL: f64 = 1e-12;

/// How the equivariant Lagrangian generated by an embedded profile curve sits
/// in `ℂⁿ`: it is embedded iff `γ ∩ (-γ) = ∅`, a double cover iff `γ = -γ`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum LagrangianEmbedding {
    Embedded,
    DoubleCover,
    NotEmbedded,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct Predicates {
    /// `⟨ν, e_r⟩ > 0` everywhere.
    pub starshaped: bool,
    /// `f > 0` everywhere.
    pub tamed: bool,
    /// `⟨ν, e_r⟩ > -1` everywhere.
    pub austere: bool,
    /// No two non-adjacent segments meet.
    pub embedded: bool,
    pub lagrangian_embedding: LagrangianEmbedding,
}

impl Predicates {
    pub fn evaluate(curve: &DiscreteCurve, field: &GeometryField) -> Self {
        Self::evaluate_with(Mode::default(), curve, field)
    }

    pub fn evaluate_with(mode: Mode, curve: &DiscreteCurve, field: &GeometryField) -> Self {
        let flags = PointwiseFlags::of(field);
        let embedded = is_embedded(mode, curve.points());
        let lagrangian_embedding = if embedded {
            lagrangian_embedding(mode, curve, field)
        } else {
            LagrangianEmbedding::NotEmbedded
        };
        Predicates {
            starshaped: flags.starshaped,
            tamed: flags.tamed,
            austere: flags.austere,
            embedded,
            lagrangian_embedding,
        }
    }
}

/// The three pointwise predicates, cheap enough to evaluate every step.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct PointwiseFlags {
    pub starshaped: bool,
    pub tamed: bool,
    pub austere: bool,
}

impl PointwiseFlags {
    pub fn of(field: &GeometryField) -> Self {
        let origin_ok = !field.near_origin;
        let min_c = field.min_nu_dot_er();
        PointwiseFlags {
            starshaped: origin_ok && min_c > 0.0,
            tamed: field.min_f() > 0.0,
            austere: origin_ok && min_c > -1.0,
        }
    }
}

#[inline]
fn orient(a: Vec2, b: Vec2, c: Vec2) -> f64 {
    (b - a).cross(c - a)
}

#[inline]
fn within_box(a: Vec2, b: Vec2, p: Vec2) -> bool {
    p.x >= a.x.min(b.x) && p.x <= a.x.max(b.x) && p.y >= a.y.min(b.y) && p.y <= a.y.max(b.y)
}

/// Closed-segment intersection with a relative tolerance on the orientation
/// tests; touching and collinear overlap both count.
pub fn segments_intersect(p1: Vec2, p2: Vec2, q1: Vec2, q2: Vec2) -> bool {
    if p1.x.max(p2.x) < q1.x.min(q2.x)
        || q1.x.max(q2.x) < p1.x.min(p2.x)
        || p1.y.max(p2.y) < q1.y.min(q2.y)
        || q1.y.max(q2.y) < p1.y.min(p2.y)
    {
        return false;
    }
    let scale = (p2 - p1).norm_sq().max((q2 - q1).norm_sq());
    let tol = ORIENT_TOL * scale;
    let sign = |v: f64| if v.abs() <= tol { 0 } else if v > 0.0 { 1 } else { -1 };
    let d1 = sign(orient(q1, q2, p1));
    let d2 = sign(orient(q1, q2, p2));
    let d3 = sign(orient(p1, p2, q1));
    let d4 = sign(orient(p1, p2, q2));
    if d1 * d2 < 0 && d3 * d4 < 0 {
        return true;
    }
    (d1 == 0 && within_box(q1, q2, p1))
        || (d2 == 0 && within_box(q1, q2, p2))
        || (d3 == 0 && within_box(p1, p2, q1))
        || (d4 == 0 && within_box(p1, p2, q2))
}

/// All-pairs test over non-adjacent segments of a closed polyline.
pub fn is_embedded(mode: Mode, pts: &[Vec2]) -> bool {
    let len = pts.len();
    let seg = |i: usize| (pts[i], pts[(i + 1) % len]);
    let crossing = exec::any_index(mode, len, |i| {
        let (a, b) = seg(i);
        // j = i + 1 shares a node; the last segment shares node 0 with segment 0
        let end = if i == 0 { len - 1 } else { len };
        (i + 2..end).any(|j| {
            let (c, d) = seg(j);
            segments_intersect(a, b, c, d)
        })
    });
    !crossing
}

/// Same answer as [`is_embedded`], found by sweeping segments sorted by their
/// left end so that only pairs with overlapping x-extent are tested.
pub fn is_embedded_sweep(pts: &[Vec2]) -> bool {
    let len = pts.len();
    let seg = |i: usize| (pts[i], pts[(i + 1) % len]);
    let mut order: Vec<(f64, f64, usize)> = (0..len)
        .map(|i| {
            let (a, b) = seg(i);
            (a.x.min(b.x), a.x.max(b.x), i)
        })
        .collect();
    order.sort_by(|p, q| p.0.total_cmp(&q.0));
    for (pos, &(_, hi, i)) in order.iter().enumerate() {
        let (a, b) = seg(i);
        for &(lo_j, _, j) in &order[pos + 1..] {
            if lo_j > hi {
                break;
            }
            let gap = i.abs_diff(j);
            if gap <= 1 || gap == len - 1 {
                continue;
            }
            let (c, d) = seg(j);
            if segments_intersect(a, b, c, d) {
                return false;
            }
        }
    }
    true
}

fn point_segment_distance(p: Vec2, a: Vec2, b: Vec2) -> f64 {
    let ab = b - a;
    let t = ((p - a).dot(ab) / ab.norm_sq()).clamp(0.0, 1.0);
    p.dist(a + ab * t)
}

/// Largest distance from a node of `from` to the closed polyline `to`.
fn directed_hausdorff(mode: Mode, from: &[Vec2], to: &[Vec2]) -> f64 {
    let len = to.len();
    exec::max_range(mode, from.len(), |i| {
        let p = from[i];
        (0..len)
            .map(|j| point_segment_distance(p, to[j], to[(j + 1) % len]))
            .fold(f64::INFINITY, f64::min)
    })
}

/// Hausdorff distance between two closed polylines, measured from the nodes
/// of each to the segments of the other.
pub fn hausdorff(mode: Mode, a: &[Vec2], b: &[Vec2]) -> f64 {
    directed_hausdorff(mode, a, b).max(directed_hausdorff(mode, b, a))
}

/// Hausdorff distance between the polyline `pts` and its reflection `-pts`,
/// measured from the nodes.
pub fn antipodal_hausdorff(mode: Mode, pts: &[Vec2]) -> f64 {
    let reflected: Vec<Vec2> = pts.iter().map(|p| -*p).collect();
    directed_hausdorff(mode, &reflected, pts)
}

/// Classifies the Lagrangian generated by an embedded curve by comparing `γ`
/// with `-γ`: equal up to the chord sagitta → double cover, disjoint →
/// embedded.
pub fn lagrangian_embedding(mode: Mode, curve: &DiscreteCurve, field: &GeometryField) -> LagrangianEmbedding {
    let pts = curve.points();
    let h = curve.max_segment();
    // twice the chord sagitta h²k/8, but never more than 1% of the size: a
    // barely resolved corner must not pass for a double cover
    let tol = (0.25 * h * h * field.max_abs_k()).min(1e-2 * curve.max_r()) + 1e-9 * curve.max_r();
    if antipodal_hausdorff(mode, pts) < tol {
        return LagrangianEmbedding::DoubleCover;
    }
    let len = pts.len();
    let meets = exec::any_index(mode, len, |i| {
        let (a, b) = (pts[i], pts[(i + 1) % len]);
        (0..len).any(|j| segments_intersect(a, b, -pts[j], -pts[(j + 1) % len]))
    });
    if meets {
        LagrangianEmbedding::NotEmbedded
    } else {
        LagrangianEmbedding::Embedded
    }
}
