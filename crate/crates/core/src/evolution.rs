//! Consistency of the discrete flow with the evolution equations of the
//! geometric quantities along a normal motion `dz/dt = -f ν`.
//!
//! Each left side is a central difference in time over two equal steps taken
//! without resampling, so node `j` tracks one material point. Right sides are
//! evaluated at the middle state. With `c = ⟨ν,e_r⟩` and
//! `⟨∇q,e_r⟩ = q_s ⟨τ,e_r⟩`:
//!
//! * `d(dμ)/dt = -k f dμ`
//! * `dk/dt = Δf + f k²`
//! * `df/dt = Δf + (n-1)/r ⟨∇f,e_r⟩ + f (k² + (n-1)/r² (2c² - 1))`
//! * `dr/dt = Δr + (n-1)/r ⟨∇r,e_r⟩ - c²/r - (n-1)/r`
//! * `dc/dt = Δc + (n-1)/r ⟨∇c,e_r⟩ - 2n c (1 - c²)/r² + (k - c/r)² c`
//! * `dA/dt = -∮ f dμ`

use serde::{Deserialize, Serialize};

use crate::curve::DiscreteCurve;
use crate::diff;
use crate::error::{Error, Result};
use crate::flow::{step_fixed, step_size, FlowConfig, FlowState};
use crate::geometry::{geometry, GeometryField};
use crate::topology::symplectic_area;

/// Largest `max|f| · dt` at which the residuals are attempted.
pub const MAX_F_DT: f64 = 0.1;

/// Max-norm mismatch between both sides of each evolution equation.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct EvolutionResiduals {
    pub res_dmu: f64,
    pub res_k: f64,
    pub res_f: f64,
    pub res_r: f64,
    pub res_nuer: f64,
    #[serde(rename = "res_dA")]
    pub res_da: f64,
    /// Step used for the time differences.
    pub dt: f64,
}

fn max_abs(it: impl Iterator<Item = f64>) -> f64 {
    it.fold(0.0, |m, v| m.max(v.abs()))
}

fn rate(before: &[f64], after: &[f64], dt: f64) -> Vec<f64> {
    before.iter().zip(after).map(|(a, b)| (b - a) / (2.0 * dt)).collect()
}

/// Residuals from `state.curve` over two steps of the size `config` would
/// choose there.
pub fn evolution_residuals(state: &FlowState, config: &FlowConfig) -> Result<EvolutionResiduals> {
    config.validate()?;
    let start = state.curve.with_n(config.n)?;
    let (dt, max_f) = step_size(&start, config)?;
    if max_f * dt >= MAX_F_DT {
        return Err(Error::InvalidConfig(format!("max|f| dt = {:.3} is too close to blow-up", max_f * dt)));
    }
    let mid = step_fixed(&start, dt)?;
    let end = step_fixed(&mid, dt)?;
    let (g0, g1, g2) = (geometry(&start)?, geometry(&mid)?, geometry(&end)?);
    Ok(residuals_at(&mid, &g0, &g1, &g2, symplectic_area(&start, &g0), symplectic_area(&end, &g2), dt))
}

fn residuals_at(
    mid: &DiscreteCurve,
    g0: &GeometryField,
    g: &GeometryField,
    g2: &GeometryField,
    area0: f64,
    area2: f64,
    dt: f64,
) -> EvolutionResiduals {
    let h = mid.dphi();
    let m = f64::from(g.n) - 1.0;
    let nf = f64::from(g.n);
    let speed = g.speed();
    let (k, f, r, c) = (&g.k, &g.f, &g.r, &g.nu_dot_er);
    let tr: Vec<f64> = g.tangent.iter().zip(&g.e_r).map(|(t, e)| t.dot(*e)).collect();
    let ds = |q: &[f64]| diff::d_ds(q, &speed, h);
    let lap = |q: &[f64]| diff::laplace_s(q, &speed, h);
    let (lap_f, lap_r, lap_c) = (lap(f), lap(r), lap(c));
    let (f_s, r_s, c_s) = (ds(f), ds(r), ds(c));

    let dmu_t = rate(&g0.speed(), &g2.speed(), dt);
    let k_t = rate(&g0.k, &g2.k, dt);
    let f_t = rate(&g0.f, &g2.f, dt);
    let r_t = rate(&g0.r, &g2.r, dt);
    let c_t = rate(&g0.nu_dot_er, &g2.nu_dot_er, dt);

    let len = g.len();
    let res_dmu = max_abs((0..len).map(|j| dmu_t[j] + k[j] * f[j] * speed[j]));
    let res_k = max_abs((0..len).map(|j| k_t[j] - lap_f[j] - f[j] * k[j] * k[j]));
    let res_f = max_abs((0..len).map(|j| {
        let (rj, cj) = (r[j], c[j]);
        let rhs = lap_f[j]
            + m / rj * f_s[j] * tr[j]
            + f[j] * (k[j] * k[j] + m / (rj * rj) * (2.0 * cj * cj - 1.0));
        f_t[j] - rhs
    }));
    let res_r = max_abs((0..len).map(|j| {
        let (rj, cj) = (r[j], c[j]);
        r_t[j] - (lap_r[j] + m / rj * r_s[j] * tr[j] - cj * cj / rj - m / rj)
    }));
    let res_nuer = max_abs((0..len).map(|j| {
        let (rj, cj) = (r[j], c[j]);
        let bend = k[j] - cj / rj;
        let rhs = lap_c[j] + m / rj * c_s[j] * tr[j] - 2.0 * nf * cj * (1.0 - cj * cj) / (rj * rj) + bend * bend * cj;
        c_t[j] - rhs
    }));
    let res_da = ((area2 - area0) / (2.0 * dt) + g.total_f()).abs();
    EvolutionResiduals { res_dmu, res_k, res_f, res_r, res_nuer, res_da, dt }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::vec2::Vec2;

    fn residuals(curve: DiscreteCurve) -> EvolutionResiduals {
        let config = FlowConfig::with_n(curve.n());
        evolution_residuals(&FlowState::new(curve), &config).unwrap()
    }

    #[test]
    fn circle_residuals() {
        for n in [1u32, 2, 3] {
            let c = DiscreteCurve::from_fn(512, n, |p| Vec2::from_polar(1.0, p)).unwrap();
            let res = residuals(c);
            assert!(res.res_k < 1e-4, "n = {n}: {res:?}");
            assert!(res.res_da < 1e-6, "n = {n}: {res:?}");
            assert!(res.res_dmu < 1e-4 && res.res_f < 1e-4 && res.res_r < 1e-4 && res.res_nuer < 1e-4, "{res:?}");
        }
    }

    #[test]
    fn smooth_seed_converges() {
        for n in [1u32, 2, 3] {
            let seed = |nodes| {
                DiscreteCurve::from_fn(nodes, n, |p| {
                    Vec2::from_polar(1.0 + 0.1 * (3.0 * p).cos() + 0.05 * (2.0 * p).sin(), p)
                })
                .unwrap()
            };
            let a = residuals(seed(256));
            let b = residuals(seed(512));
            let pairs = [
                ("dmu", a.res_dmu, b.res_dmu),
                ("k", a.res_k, b.res_k),
                ("f", a.res_f, b.res_f),
                ("r", a.res_r, b.res_r),
                ("nuer", a.res_nuer, b.res_nuer),
            ];
            for (name, coarse, fine) in pairs {
                assert!(fine <= 0.25 * coarse, "n = {n}, {name}: {coarse:e} -> {fine:e}");
            }
        }
    }

    #[test]
    fn refuses_near_blowup() {
        let c = DiscreteCurve::from_fn(64, 2, |p| Vec2::from_polar(1.0, p)).unwrap();
        let config = FlowConfig { cfl: 50.0, ..FlowConfig::with_n(2) };
        assert!(evolution_residuals(&FlowState::new(c), &config).is_err());
    }
}
