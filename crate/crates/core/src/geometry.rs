use crate::curve::DiscreteCurve;
use crate::diff;
use crate::error::{Error, Result};
use crate::topology;
use crate::vec2::Vec2;

/// Below this parameter speed `|z'|` the discrete curve is considered singular.
pub const MIN_SPEED: f64 = 1e-14;

/// Pointwise geometry of one discrete curve.
///
/// With `z' = dz/dφ` computed by fourth-order centred differences:
/// `ν = -J z'/|z'|` (outer normal for counter-clockwise curves),
/// `k = (u'v'' - v'u'')/|z'|³`, `r = |z|`, `e_r = z/r` and
/// `f = k + (n-1)⟨ν,e_r⟩/r`.
#[derive(Debug, Clone)]
pub struct GeometryField {
    pub n: u32,
    pub dphi: f64,
    pub dz: Vec<Vec2>,
    pub tangent: Vec<Vec2>,
    pub nu: Vec<Vec2>,
    pub k: Vec<f64>,
    pub r: Vec<f64>,
    pub e_r: Vec<Vec2>,
    pub nu_dot_er: Vec<f64>,
    pub f: Vec<f64>,
    /// Induced metric `g = |z'|²`.
    pub g: Vec<f64>,
    /// Quadrature weight `√g Δφ`.
    pub dmu: Vec<f64>,
    /// `β = (1/ω₀) arctan(r'/(ω₀ r))` of the polar representation; only for
    /// starshaped curves.
    pub beta: Option<Vec<f64>>,
    /// Winding number about the origin used for `β`.
    pub omega0: Option<i64>,
    /// Some node is within `1e-6 · max r` of the origin (only possible for n = 1).
    pub near_origin: bool,
}

impl GeometryField {
    #[inline]
    pub fn len(&self) -> usize {
        self.k.len()
    }

    #[inline]
    pub fn is_empty(&self) -> bool {
        self.k.is_empty()
    }

    /// Parameter speed `|z'| = √g`.
    pub fn speed(&self) -> Vec<f64> {
        self.g.iter().map(|g| g.sqrt()).collect()
    }

    pub fn max_abs_f(&self) -> f64 {
        self.f.iter().fold(0.0, |m, v| m.max(v.abs()))
    }

    pub fn max_abs_k(&self) -> f64 {
        self.k.iter().fold(0.0, |m, v| m.max(v.abs()))
    }

    pub fn min_f(&self) -> f64 {
        self.f.iter().copied().fold(f64::INFINITY, f64::min)
    }

    pub fn min_nu_dot_er(&self) -> f64 {
        self.nu_dot_er.iter().copied().fold(f64::INFINITY, f64::min)
    }

    /// `k² + (n-1)(⟨ν,e_r⟩/r)²` per node: the squared norm of the second
    /// fundamental form of the equivariant Lagrangian up to constants.
    pub fn a_proxy_sq(&self) -> Vec<f64> {
        let m = f64::from(self.n - 1);
        self.k
            .iter()
            .zip(&self.nu_dot_er)
            .zip(&self.r)
            .map(|((k, c), r)| {
                let q = if *r > 0.0 { c / r } else { 0.0 };
                k * k + m * q * q
            })
            .collect()
    }

    pub fn max_a_proxy_sq(&self) -> f64 {
        self.a_proxy_sq().into_iter().fold(0.0, f64::max)
    }

    /// Total length `Σ dμ`.
    pub fn length(&self) -> f64 {
        self.dmu.iter().sum()
    }

    /// `sup |r'/r|` in the polar parameter `ψ` of a starshaped curve,
    /// `r_ψ/r = ω₀ tan(ω₀ β)`.
    pub fn max_polar_log_gradient(&self) -> Option<f64> {
        let (beta, w) = (self.beta.as_ref()?, self.omega0? as f64);
        Some(beta.iter().fold(0.0, |m, b| m.max((w * (w * b).tan()).abs())))
    }

    /// `∮ f dμ`.
    pub fn total_f(&self) -> f64 {
        self.f.iter().zip(&self.dmu).map(|(f, w)| f * w).sum()
    }
}

/// Computes the full [`GeometryField`] of `curve` for its ambient dimension.
pub fn geometry(curve: &DiscreteCurve) -> Result<GeometryField> {
    let n = curve.n();
    let pts = curve.points();
    let h = curve.dphi();
    let dz = diff::d1(pts, h);
    let ddz = diff::d2(pts, h);
    let near_origin = curve.near_origin();
    let m = f64::from(n - 1);

    let len = pts.len();
    let mut tangent = Vec::with_capacity(len);
    let mut nu = Vec::with_capacity(len);
    let mut k = Vec::with_capacity(len);
    let mut r = Vec::with_capacity(len);
    let mut e_r = Vec::with_capacity(len);
    let mut nu_dot_er = Vec::with_capacity(len);
    let mut f = Vec::with_capacity(len);
    let mut g = Vec::with_capacity(len);
    let mut dmu = Vec::with_capacity(len);

    for j in 0..len {
        let d = dz[j];
        let speed = d.norm();
        if !(speed >= MIN_SPEED) {
            if !speed.is_finite() {
                return Err(Error::NonFinite("geometry"));
            }
            return Err(Error::DegenerateSegment { index: j, length: speed });
        }
        let t = d / speed;
        let normal = Vec2::new(t.y, -t.x);
        let kj = d.cross(ddz[j]) / (speed * speed * speed);
        let rj = pts[j].norm();
        if n >= 2 && rj <= 0.0 {
            return Err(Error::OriginContact { index: j, radius: rj });
        }
        let (er, c) = if rj > 0.0 {
            let er = pts[j] / rj;
            (er, normal.dot(er))
        } else {
            (Vec2::ZERO, 0.0)
        };
        let fj = if rj > 0.0 { kj + m * c / rj } else { kj };
        tangent.push(t);
        nu.push(normal);
        k.push(kj);
        r.push(rj);
        e_r.push(er);
        nu_dot_er.push(c);
        f.push(fj);
        g.push(speed * speed);
        dmu.push(speed * h);
    }

    let starshaped = !near_origin && nu_dot_er.iter().all(|c| *c > 0.0);
    // an unresolved winding (e.g. a curve grazing the origin) leaves β undefined
    let winding = if starshaped { topology::winding_number(pts).ok() } else { None };
    let (beta, omega0) = if let Some(w) = winding {
        if w > 0 {
            let wf = w as f64;
            let beta = tangent
                .iter()
                .zip(&e_r)
                .zip(&nu_dot_er)
                .map(|((t, er), c)| (t.dot(*er) / c).atan() / wf)
                .collect();
            (Some(beta), Some(w))
        } else {
            (None, Some(w))
        }
    } else {
        (None, None)
    };

    Ok(GeometryField {
        n,
        dphi: h,
        dz,
        tangent,
        nu,
        k,
        r,
        e_r,
        nu_dot_er,
        f,
        g,
        dmu,
        beta,
        omega0,
        near_origin,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::f64::consts::{PI, TAU};

    fn circle(radius: f64, center: Vec2, nodes: usize, n: u32) -> DiscreteCurve {
        DiscreteCurve::from_fn(nodes, n, |p| center + Vec2::from_polar(radius, p)).unwrap()
    }

    #[test]
    fn unit_circle_n2() {
        let g = geometry(&circle(1.0, Vec2::ZERO, 256, 2)).unwrap();
        for j in 0..256 {
            assert!((g.k[j] - 1.0).abs() < 1e-3);
            assert!((g.nu[j] - g.e_r[j]).norm() < 1e-12);
            assert!((g.f[j] - 2.0).abs() < 1e-3);
        }
        assert!(g.beta.as_ref().unwrap().iter().all(|b| b.abs() < 1e-12));
        assert_eq!(g.omega0, Some(1));
    }

    #[test]
    fn radius_two_circle_n3() {
        let g = geometry(&circle(2.0, Vec2::ZERO, 256, 3)).unwrap();
        assert!(g.f.iter().all(|f| (f - 1.5).abs() < 1e-3));
    }

    #[test]
    fn ellipse_vertex_curvature() {
        let (a, b) = (2.0f64, 1.0f64);
        let c = DiscreteCurve::from_fn(256, 1, |p| Vec2::new(a * p.cos(), b * p.sin())).unwrap();
        let g = geometry(&c).unwrap();
        // ab / (b² cos²φ + a² sin²φ)^{3/2}
        let exact = |p: f64| a * b / (b * b * p.cos().powi(2) + a * a * p.sin().powi(2)).powf(1.5);
        assert!((g.k[0] - 2.0).abs() < 1e-3);
        for j in 0..256 {
            let p = TAU * j as f64 / 256.0;
            assert!((g.k[j] - exact(p)).abs() < 1e-3, "node {j}");
        }
    }

    #[test]
    fn field_invariants_on_a_wobbly_curve() {
        let c = DiscreteCurve::from_fn(200, 3, |p| {
            Vec2::from_polar(1.0 + 0.2 * (3.0 * p).cos() + 0.05 * (7.0 * p).sin(), p) + Vec2::new(0.1, -0.05)
        })
        .unwrap();
        let g = geometry(&c).unwrap();
        for j in 0..g.len() {
            assert!((g.nu[j].norm() - 1.0).abs() < 1e-12);
            assert!(g.nu[j].dot(g.tangent[j]).abs() < 1e-10);
            assert!(g.nu_dot_er[j].abs() <= 1.0 + 1e-10);
            assert_eq!(g.f[j], g.k[j] + 2.0 * g.nu_dot_er[j] / g.r[j]);
        }
    }

    #[test]
    fn max_radius_node_satisfies_lower_speed_bound() {
        // at the farthest node f·r ≥ n holds in the continuum
        for n in 1..=4u32 {
            let c = DiscreteCurve::from_fn(256, n, |p| {
                Vec2::from_polar(1.0 + 0.15 * (2.0 * p).cos(), p) + Vec2::new(0.2, 0.1)
            })
            .unwrap();
            let g = geometry(&c).unwrap();
            let jmax = (0..g.len()).max_by(|a, b| g.r[*a].total_cmp(&g.r[*b])).unwrap();
            assert!(g.f[jmax] * g.r[jmax] >= f64::from(n) - 0.05);
        }
    }

    #[test]
    fn clockwise_circle_has_inward_normal() {
        let c = DiscreteCurve::from_fn(64, 1, |p| Vec2::from_polar(1.0, -p)).unwrap();
        let g = geometry(&c).unwrap();
        assert!(g.k.iter().all(|k| (k + 1.0).abs() < 1e-3));
        assert!(g.nu_dot_er.iter().all(|c| (c + 1.0).abs() < 1e-12));
        assert!(g.beta.is_none());
    }

    #[test]
    fn origin_node_tolerated_for_n1() {
        // circle through the origin with a node exactly on it
        let mut pts: Vec<Vec2> =
            (0..64).map(|j| Vec2::new(1.0 + (TAU * j as f64 / 64.0 + PI).cos(), (TAU * j as f64 / 64.0 + PI).sin())).collect();
        pts[0] = Vec2::ZERO;
        let c = DiscreteCurve::new(pts, 1).unwrap();
        let g = geometry(&c).unwrap();
        assert!(g.near_origin);
        assert_eq!(g.nu_dot_er[0], 0.0);
        assert_eq!(g.f[0], g.k[0]);
    }
}
