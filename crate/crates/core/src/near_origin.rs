use serde::Serialize;

use crate::curve::DiscreteCurve;
use crate::geometry::GeometryField;

/// `⟨z,ν⟩/|z|²` sampled around the node closest to the origin, with the value
/// extrapolated to the point of closest approach.
///
/// For a smooth curve through the origin the extrapolated value approximates
/// half the curvature there.
#[derive(Debug, Clone, Serialize)]
pub struct NearOriginRatio {
    pub center: usize,
    pub indices: Vec<usize>,
    /// Signed arclength of each sample from the centre node.
    pub s: Vec<f64>,
    pub ratio: Vec<f64>,
    /// Arclength position of the closest approach (from a fit of `|z|²`).
    pub s_closest: f64,
    pub limit: f64,
}

/// Least-squares quadratic fit `y ≈ c0 + c1 x + c2 x²`.
fn quadratic_fit(x: &[f64], y: &[f64]) -> [f64; 3] {
    let mut m = [[0.0f64; 3]; 3];
    let mut rhs = [0.0f64; 3];
    for (xi, yi) in x.iter().zip(y) {
        let p = [1.0, *xi, xi * xi];
        for a in 0..3 {
            rhs[a] += p[a] * yi;
            for b in 0..3 {
                m[a][b] += p[a] * p[b];
            }
        }
    }
    // Gaussian elimination with partial pivoting on the 3x3 normal equations
    for col in 0..3 {
        let piv = (col..3).max_by(|a, b| m[*a][col].abs().total_cmp(&m[*b][col].abs())).unwrap();
        m.swap(col, piv);
        rhs.swap(col, piv);
        for row in col + 1..3 {
            let factor = m[row][col] / m[col][col];
            for k in col..3 {
                m[row][k] -= factor * m[col][k];
            }
            rhs[row] -= factor * rhs[col];
        }
    }
    let mut c = [0.0; 3];
    for row in (0..3).rev() {
        let tail: f64 = (row + 1..3).map(|k| m[row][k] * c[k]).sum();
        c[row] = (rhs[row] - tail) / m[row][row];
    }
    c
}

/// Samples the ratio on `2·window + 1` nodes centred at `argmin r` (nodes
/// sitting on the origin itself are skipped) and extrapolates it with a
/// quadratic fit in arclength to the closest approach.
pub fn near_origin_ratio(curve: &DiscreteCurve, field: &GeometryField, window: usize) -> NearOriginRatio {
    let window = window.max(3);
    let len = curve.len();
    let center = (0..len).min_by(|a, b| field.r[*a].total_cmp(&field.r[*b])).unwrap_or(0);
    let seg = curve.segment_lengths();
    let max_r = curve.max_r();

    let mut indices = Vec::new();
    let mut s = Vec::new();
    let mut ratio = Vec::new();
    let mut all_s = Vec::new();
    let mut r_sq = Vec::new();
    for off in -(window as isize)..=(window as isize) {
        let j = (center as isize + off).rem_euclid(len as isize) as usize;
        let sj = if off >= 0 {
            (0..off as usize).map(|q| seg[(center + q) % len]).sum::<f64>()
        } else {
            -(1..=(-off) as usize).map(|q| seg[(center + len - q) % len]).sum::<f64>()
        };
        let z = curve.point(j);
        all_s.push(sj);
        r_sq.push(z.norm_sq());
        if field.r[j] > 1e-9 * max_r {
            indices.push(j);
            s.push(sj);
            ratio.push(z.dot(field.nu[j]) / z.norm_sq());
        }
    }

    let rc = quadratic_fit(&all_s, &r_sq);
    let s_closest = if rc[2] > 0.0 { (-rc[1] / (2.0 * rc[2])).clamp(all_s[0], *all_s.last().unwrap()) } else { 0.0 };
    let fc = quadratic_fit(&s, &ratio);
    let limit = fc[0] + fc[1] * s_closest + fc[2] * s_closest * s_closest;

    NearOriginRatio { center, indices, s, ratio, s_closest, limit }
}
