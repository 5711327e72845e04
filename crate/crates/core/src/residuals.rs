//! Pointwise identities every smooth curve in `ℂ*` satisfies, evaluated with
//! the discrete arclength operators. Their size measures discretisation error.

use serde::{Deserialize, Serialize};

use crate::curve::DiscreteCurve;
use crate::diff;
use crate::error::{Error, Result};
use crate::geometry::GeometryField;

/// Max-norm residuals of the radial identities, with `c = ⟨ν,e_r⟩`:
///
/// * `res_10a`: `1 = |∇r|² + c²`
/// * `res_10b`: `Δr = c (c/r - k)`
/// * `res_10c`: `∇c = (k - c/r) ∇r`
/// * `res_curveeq11`: `f √g = ω₀ (n - β')` in the polar parameter (starshaped
///   curves only)
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct IdentityResiduals {
    pub res_10a: f64,
    pub res_10b: f64,
    pub res_10c: f64,
    pub res_curveeq11: Option<f64>,
}

fn max_abs(it: impl Iterator<Item = f64>) -> f64 {
    it.fold(0.0, |m, v| m.max(v.abs()))
}

pub fn identity_residuals(curve: &DiscreteCurve, field: &GeometryField) -> IdentityResiduals {
    let h = curve.dphi();
    let speed = field.speed();
    let r = &field.r;
    let c = &field.nu_dot_er;
    let k = &field.k;
    let dr = diff::d_ds(r, &speed, h);
    let lap_r = diff::laplace_s(r, &speed, h);
    let dc = diff::d_ds(c, &speed, h);
    let len = field.len();
    let res_10a = max_abs((0..len).map(|j| 1.0 - dr[j] * dr[j] - c[j] * c[j]));
    let res_10b = max_abs((0..len).map(|j| lap_r[j] - c[j] * (c[j] / r[j] - k[j])));
    let res_10c = max_abs((0..len).map(|j| dc[j] - (k[j] - c[j] / r[j]) * dr[j]));
    IdentityResiduals { res_10a, res_10b, res_10c, res_curveeq11: curveeq11_residual(curve, field).ok() }
}

/// Residual of `f √g = ω₀ (n - β')` where `√g` and `β'` refer to the polar
/// parameter `ψ` with `z = r(ψ) e^{i ω₀ ψ}`.
///
/// The grid parameter `φ` is converted through
/// `dψ/dφ = ⟨z', e_θ⟩ / (r ω₀)`.
pub fn curveeq11_residual(curve: &DiscreteCurve, field: &GeometryField) -> Result<f64> {
    let (Some(beta), Some(omega0)) = (&field.beta, field.omega0) else {
        return Err(Error::NotStarshaped);
    };
    let h = curve.dphi();
    let w = omega0 as f64;
    let n = f64::from(field.n);
    let dbeta = diff::d1(beta, h);
    Ok(max_abs((0..field.len()).map(|j| {
        let e_theta = field.e_r[j].perp();
        let dpsi = field.dz[j].dot(e_theta) / (field.r[j] * w);
        let sqrt_g = field.g[j].sqrt() / dpsi;
        let beta_psi = dbeta[j] / dpsi;
        field.f[j] * sqrt_g - w * (n - beta_psi)
    })))
}
