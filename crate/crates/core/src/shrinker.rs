//! Self-similarly contracting profile curves, `f = (ε/2)⟨z,ν⟩`.
//!
//! Profiles are integrated in arclength, `z' = (cos θ, sin θ)`, `θ' = k`,
//! starting on the positive real axis with `θ = π/2`. The polar angle is
//! carried along so the return to the axis after `wind` turns is an event.
//! Along any solution `p = f e^{-ε|z|²/4} |z|^{n-1}` is constant.

use std::f64::consts::{FRAC_PI_2, TAU};
use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::curve::DiscreteCurve;
use crate::error::{Error, Result};
use crate::io;
use crate::vec2::Vec2;

/// Local error tolerance of the adaptive integrator.
pub const ODE_TOL: f64 = 1e-12;
/// Closure defect accepted by [`shoot_closed`].
pub const CLOSE_TOL: f64 = 1e-6;
pub const MAX_SHOOT_ITERATIONS: usize = 200;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ShrinkerSpec {
    pub n: u32,
    pub eps: f64,
    pub r_start: f64,
    /// Budget of accepted integrator steps.
    pub arc_steps: usize,
    /// `(rot, wind)` of the closed curve sought.
    pub target_rot_wind: (i64, i64),
}

impl ShrinkerSpec {
    pub fn new(n: u32, eps: f64, r_start: f64, target_rot_wind: (i64, i64)) -> Self {
        Self { n, eps, r_start, arc_steps: 200_000, target_rot_wind }
    }

    fn validate(&self) -> Result<()> {
        if self.n == 0 {
            return Err(Error::BadDimension);
        }
        if !(self.eps != 0.0 && self.eps.is_finite()) {
            return Err(Error::InvalidConfig(format!("eps must be finite and nonzero, got {}", self.eps)));
        }
        if !(self.r_start > 0.0 && self.r_start.is_finite()) {
            return Err(Error::InvalidConfig(format!("r_start must be positive, got {}", self.r_start)));
        }
        Ok(())
    }

    /// Radius of the round solution, `√(2n/ε)`.
    pub fn circle_radius(n: u32, eps: f64) -> f64 {
        (2.0 * f64::from(n) / eps).sqrt()
    }

    /// Radius where the curvature changes sign, `√(2(n-1)/ε)`.
    pub fn inflection_radius(&self) -> f64 {
        (2.0 * (f64::from(self.n) - 1.0) / self.eps).sqrt()
    }
}

/// `k = (1 - 2(n-1)/(ε|z|²)) (ε/2)⟨z,ν⟩`.
pub fn shrinker_curvature(z: Vec2, nu: Vec2, n: u32, eps: f64) -> Result<f64> {
    let r_sq = z.norm_sq();
    if !(r_sq > 0.0) {
        return Err(Error::OriginContact { index: 0, radius: r_sq.sqrt() });
    }
    let m = f64::from(n) - 1.0;
    Ok((1.0 - 2.0 * m / (eps * r_sq)) * 0.5 * eps * z.dot(nu))
}

/// The first integral `p = f e^{-ε|z|²/4} |z|^{n-1}` with `f = (ε/2)⟨z,ν⟩`.
pub fn first_integral(z: Vec2, nu: Vec2, n: u32, eps: f64) -> f64 {
    let r_sq = z.norm_sq();
    0.5 * eps * z.dot(nu) * (-0.25 * eps * r_sq).exp() * r_sq.sqrt().powi(n as i32 - 1)
}

/// ODE state: position, tangent angle and unwrapped polar angle.
#[derive(Debug, Clone, Copy, PartialEq)]
struct State([f64; 4]);

impl State {
    fn z(&self) -> Vec2 {
        Vec2::new(self.0[0], self.0[1])
    }

    fn nu(&self) -> Vec2 {
        Vec2::new(self.0[2].sin(), -self.0[2].cos())
    }

    fn axpy(&self, h: f64, terms: &[(f64, &[f64; 4])]) -> State {
        let mut out = self.0;
        for (c, k) in terms {
            for i in 0..4 {
                out[i] += h * c * k[i];
            }
        }
        State(out)
    }
}

struct Profiler {
    n: u32,
    eps: f64,
    /// Closer than this to the origin counts as contact.
    r_floor: f64,
}

impl Profiler {
    fn rhs(&self, y: &State) -> Result<[f64; 4]> {
        let [x, v, theta, _] = y.0;
        let r_sq = x * x + v * v;
        if !(r_sq > self.r_floor * self.r_floor) {
            return Err(Error::OriginContact { index: 0, radius: r_sq.sqrt() });
        }
        let (s, c) = theta.sin_cos();
        let k = shrinker_curvature(y.z(), y.nu(), self.n, self.eps)?;
        Ok([c, s, k, (x * s - v * c) / r_sq])
    }

    /// One Dormand–Prince 5(4) step; returns the fifth-order solution and the
    /// scaled error estimate.
    fn dp_step(&self, y: &State, h: f64) -> Result<(State, f64)> {
        let k1 = self.rhs(y)?;
        let k2 = self.rhs(&y.axpy(h, &[(1.0 / 5.0, &k1)]))?;
        let k3 = self.rhs(&y.axpy(h, &[(3.0 / 40.0, &k1), (9.0 / 40.0, &k2)]))?;
        let k4 = self.rhs(&y.axpy(h, &[(44.0 / 45.0, &k1), (-56.0 / 15.0, &k2), (32.0 / 9.0, &k3)]))?;
        let k5 = self.rhs(&y.axpy(
            h,
            &[(19372.0 / 6561.0, &k1), (-25360.0 / 2187.0, &k2), (64448.0 / 6561.0, &k3), (-212.0 / 729.0, &k4)],
        ))?;
        let k6 = self.rhs(&y.axpy(
            h,
            &[
                (9017.0 / 3168.0, &k1),
                (-355.0 / 33.0, &k2),
                (46732.0 / 5247.0, &k3),
                (49.0 / 176.0, &k4),
                (-5103.0 / 18656.0, &k5),
            ],
        ))?;
        let b = [35.0 / 384.0, 500.0 / 1113.0, 125.0 / 192.0, -2187.0 / 6784.0, 11.0 / 84.0];
        let next = y.axpy(h, &[(b[0], &k1), (b[1], &k3), (b[2], &k4), (b[3], &k5), (b[4], &k6)]);
        let k7 = self.rhs(&next)?;
        let e = [
            71.0 / 57600.0,
            -71.0 / 16695.0,
            71.0 / 1920.0,
            -17253.0 / 339200.0,
            22.0 / 525.0,
            -1.0 / 40.0,
        ];
        let mut err: f64 = 0.0;
        for i in 0..4 {
            let d = h * (e[0] * k1[i] + e[1] * k3[i] + e[2] * k4[i] + e[3] * k5[i] + e[4] * k6[i] + e[5] * k7[i]);
            let scale = ODE_TOL * (1.0 + y.0[i].abs().max(next.0[i].abs()));
            err = err.max((d / scale).abs());
        }
        Ok((next, err))
    }
}

/// Where an integration stops.
#[derive(Debug, Clone, Copy)]
enum Stop {
    /// The polar angle reaches this value.
    PolarAngle(f64),
    /// The arclength reaches this value.
    Arclength(f64),
    /// `r` turns (`dr/ds` changes sign), or the polar angle reaches the
    /// given limit first.
    RadialTurn(f64),
}

impl Stop {
    /// Event function; the event is a sign change from the start of a step
    /// to its end.
    fn event(self, y: &State) -> f64 {
        match self {
            Stop::PolarAngle(target) => y.0[3] - target,
            Stop::Arclength(_) => -1.0,
            Stop::RadialTurn(_) => {
                let [x, v, theta, _] = y.0;
                x * theta.cos() + v * theta.sin()
            }
        }
    }

    fn crossed(self, before: f64, after: f64) -> bool {
        match self {
            Stop::PolarAngle(_) => before < 0.0 && after >= 0.0,
            Stop::Arclength(_) => false,
            Stop::RadialTurn(_) => before != 0.0 && after.signum() != before.signum(),
        }
    }
}

/// An integrated profile with the first integral sampled at every step.
#[derive(Debug, Clone)]
pub struct Profile {
    pub points: Vec<Vec2>,
    pub arclength: Vec<f64>,
    pub p: Vec<f64>,
    /// Tangent angle at the end.
    pub theta_end: f64,
    /// Unwrapped polar angle at the end.
    pub polar_end: f64,
    /// The integration ended on its event rather than a limit.
    pub event: bool,
}

impl Profile {
    pub fn length(&self) -> f64 {
        *self.arclength.last().expect("non-empty profile")
    }

    pub fn end(&self) -> Vec2 {
        *self.points.last().expect("non-empty profile")
    }

    /// `max |p - p₀| / |p₀|`.
    pub fn p_drift(&self) -> f64 {
        let p0 = self.p[0];
        self.p.iter().fold(0.0f64, |m, p| m.max((p - p0).abs())) / p0.abs()
    }
}

fn integrate(spec: &ShrinkerSpec, stop: Stop, outputs: &[f64]) -> Result<(Profile, Vec<Vec2>)> {
    spec.validate()?;
    let prof = Profiler { n: spec.n, eps: spec.eps, r_floor: 1e-9 * spec.r_start };
    let mut y = State([spec.r_start, 0.0, FRAC_PI_2, 0.0]);
    let mut s = 0.0;
    let mut h = 1e-3 * spec.r_start.max(1e-3);
    let record = |y: &State| first_integral(y.z(), y.nu(), spec.n, spec.eps);
    let mut out = Profile {
        points: vec![y.z()],
        arclength: vec![0.0],
        p: vec![record(&y)],
        theta_end: 0.0,
        polar_end: 0.0,
        event: false,
    };
    let mut sampled = Vec::with_capacity(outputs.len());
    let mut next_out = 0;
    while next_out < outputs.len() && outputs[next_out] <= 0.0 {
        sampled.push(y.z());
        next_out += 1;
    }
    let mut g_prev = stop.event(&y);
    for _ in 0..spec.arc_steps {
        let mut step = h;
        if let Some(&o) = outputs.get(next_out) {
            step = step.min(o - s);
        }
        if let Stop::Arclength(end) = stop {
            step = step.min(end - s);
        }
        let (cand, err) = prof.dp_step(&y, step)?;
        if !(err <= 1.0) {
            if !err.is_finite() {
                return Err(Error::NonFinite("profile integration"));
            }
            h = step * (0.9 * err.powf(-0.2)).max(0.2);
            continue;
        }
        let g = stop.event(&cand);
        // the start of a radial turn search is itself a turning point
        let armed = s > 0.0 || !matches!(stop, Stop::RadialTurn(_));
        let (cand, step, done, event) = if armed && stop.crossed(g_prev, g) {
            // bisect the step length onto the event
            let (mut lo, mut hi) = (0.0, step);
            let mut hit = cand;
            for _ in 0..80 {
                let mid = 0.5 * (lo + hi);
                let (trial, _) = prof.dp_step(&y, mid)?;
                if stop.crossed(g_prev, stop.event(&trial)) {
                    hi = mid;
                    hit = trial;
                } else {
                    lo = mid;
                }
                if hi - lo <= f64::EPSILON * (s + hi) {
                    break;
                }
            }
            (hit, hi, true, true)
        } else {
            let done = match stop {
                Stop::Arclength(end) => s + step >= end,
                Stop::RadialTurn(limit) => cand.0[3] >= limit,
                Stop::PolarAngle(_) => false,
            };
            (cand, step, done, false)
        };
        s += step;
        y = cand;
        g_prev = g;
        out.points.push(y.z());
        out.arclength.push(s);
        out.p.push(record(&y));
        while next_out < outputs.len() && outputs[next_out] <= s * (1.0 + 4.0 * f64::EPSILON) {
            sampled.push(y.z());
            next_out += 1;
        }
        if done {
            out.theta_end = y.0[2];
            out.polar_end = y.0[3];
            out.event = event;
            return Ok((out, sampled));
        }
        h = step * (0.9 * err.max(1e-10).powf(-0.2)).min(5.0);
    }
    Err(Error::NoReturn { steps: spec.arc_steps, arclength: s })
}

/// Integrates from `(r_start, 0)` until the polar angle reaches
/// `2π · wind`, back on the positive real axis.
pub fn integrate_profile(spec: &ShrinkerSpec) -> Result<Profile> {
    let wind = spec.target_rot_wind.1;
    if wind < 1 {
        return Err(Error::InvalidConfig(format!("winding number must be positive, got {wind}")));
    }
    integrate(spec, Stop::PolarAngle(TAU * wind as f64), &[]).map(|(p, _)| p)
}

/// Integrates a fixed arclength without looking for a return; for expanders
/// and other open profiles.
pub fn integrate_arc(spec: &ShrinkerSpec, length: f64) -> Result<Profile> {
    integrate(spec, Stop::Arclength(length), &[]).map(|(p, _)| p)
}

/// Half an oscillation of `r`: the radius and polar angle at the first point
/// after the start where `dr/ds = 0`.
///
/// The start is itself a turning point, so the profile oscillates between
/// `r_start` and the returned radius. A profile that does not turn within
/// one full polar turn is reported at that polar angle.
pub fn half_oscillation(spec: &ShrinkerSpec) -> Result<(f64, f64)> {
    let (prof, _) = integrate(spec, Stop::RadialTurn(TAU), &[])?;
    Ok((prof.end().norm(), prof.polar_end))
}

/// Signed radial closure defect `r_end - r_start` after `wind` turns.
pub fn closure_defect(spec: &ShrinkerSpec) -> Result<f64> {
    Ok(integrate_profile(spec)?.end().x - spec.r_start)
}

/// A closed self-shrinker sampled at equal arclength.
#[derive(Debug, Clone)]
pub struct ClosedShrinker {
    pub spec: ShrinkerSpec,
    pub curve: DiscreteCurve,
    /// Number of radial oscillations; 0 for the round solution.
    pub lobes: u32,
    /// `r_end - r_start` after the full profile.
    pub defect: f64,
    pub p_value: f64,
    pub p_drift: f64,
    pub r_min: f64,
    pub r_max: f64,
}

/// Illinois regula falsi on a bracketed sign change of `defect`.
fn solve(mut defect: impl FnMut(f64) -> Result<f64>, bracket: (f64, f64)) -> Result<(f64, f64, usize)> {
    let (mut lo, mut hi) = (bracket.0.min(bracket.1), bracket.0.max(bracket.1));
    let (mut d_lo, mut d_hi) = (defect(lo)?, defect(hi)?);
    if d_lo == 0.0 {
        return Ok((lo, 0.0, 0));
    }
    if d_hi == 0.0 {
        return Ok((hi, 0.0, 0));
    }
    if d_lo.signum() == d_hi.signum() || !d_lo.is_finite() || !d_hi.is_finite() {
        return Err(Error::NoRoot { lo, hi, d_lo, d_hi });
    }
    let (mut r, mut d) = if d_lo.abs() < d_hi.abs() { (lo, d_lo) } else { (hi, d_hi) };
    let mut side = 0i8;
    let mut iterations = 0;
    while iterations < MAX_SHOOT_ITERATIONS && d != 0.0 && hi - lo > 4.0 * f64::EPSILON * hi {
        iterations += 1;
        let mut cand = (lo * d_hi - hi * d_lo) / (d_hi - d_lo);
        if !(cand > lo && cand < hi) {
            cand = 0.5 * (lo + hi);
        }
        r = cand;
        d = defect(r)?;
        if d.signum() == d_lo.signum() {
            lo = r;
            d_lo = d;
            if side == -1 {
                d_hi *= 0.5;
            }
            side = -1;
        } else {
            hi = r;
            d_hi = d;
            if side == 1 {
                d_lo *= 0.5;
            }
            side = 1;
        }
    }
    Ok((r, d, iterations))
}

fn check_target(eps: f64, target_rot_wind: (i64, i64)) -> Result<()> {
    let (rot, wind) = target_rot_wind;
    if rot != wind || wind < 1 {
        return Err(Error::InvalidConfig(format!("closed shrinkers are sought with rot = wind ≥ 1, got ({rot}, {wind})")));
    }
    if !(eps > 0.0) {
        return Err(Error::InvalidConfig(format!("closed shrinkers need eps > 0, got {eps}")));
    }
    Ok(())
}

/// Integrates the accepted shot around all `wind` turns, checks that it
/// closes with the requested turning and samples it at `nodes` equal
/// arclengths.
fn close(spec: ShrinkerSpec, lobes: u32, iterations: usize, nodes: usize) -> Result<ClosedShrinker> {
    let profile = integrate_profile(&spec)?;
    let defect = profile.end().x - spec.r_start;
    if !(defect.abs() <= CLOSE_TOL) {
        return Err(Error::NotClosed { defect, iterations });
    }
    let turning = profile.theta_end - FRAC_PI_2 - TAU * spec.target_rot_wind.0 as f64;
    if !(turning.abs() <= CLOSE_TOL) {
        return Err(Error::NotClosed { defect: turning, iterations });
    }
    let length = profile.length();
    let stations: Vec<f64> = (0..nodes).map(|j| length * j as f64 / nodes as f64).collect();
    let (_, points) = integrate(&spec, Stop::Arclength(length), &stations)?;
    let curve = DiscreteCurve::new(points, spec.n)?;
    let radii = profile.points.iter().map(|p| p.norm());
    let (r_min, r_max) = radii.fold((f64::INFINITY, 0.0f64), |(a, b), r| (a.min(r), b.max(r)));
    Ok(ClosedShrinker { spec, curve, lobes, defect, p_value: profile.p[0], p_drift: profile.p_drift(), r_min, r_max })
}

/// Shoots on `r_start ∈ bracket` for the round closed shrinker with the
/// requested `(rot, wind)` and samples it at `nodes` equally spaced
/// arclengths.
///
/// The defect is `r_start - r_turn`, the amplitude of the radial
/// oscillation; it changes sign exactly at the round solution. Only
/// starshaped targets (`rot == wind`) are admitted.
pub fn shoot_closed(n: u32, eps: f64, target_rot_wind: (i64, i64), bracket: (f64, f64), nodes: usize) -> Result<ClosedShrinker> {
    check_target(eps, target_rot_wind)?;
    let spec_at = |r: f64| ShrinkerSpec::new(n, eps, r, target_rot_wind);
    let (r, d, iterations) = solve(|r| Ok(r - half_oscillation(&spec_at(r))?.0), bracket)?;
    if !(d.abs() <= CLOSE_TOL) {
        return Err(Error::NotClosed { defect: d, iterations });
    }
    close(spec_at(r), 0, iterations, nodes)
}

/// Shoots for a non-round closed shrinker with `lobes` radial oscillations
/// over `wind` turns: the polar angle of half an oscillation must be
/// `π · wind / lobes`.
pub fn shoot_lobed(
    n: u32,
    eps: f64,
    wind: i64,
    lobes: u32,
    bracket: (f64, f64),
    nodes: usize,
) -> Result<ClosedShrinker> {
    check_target(eps, (wind, wind))?;
    if lobes == 0 {
        return Err(Error::InvalidConfig("a lobed shrinker needs at least one lobe".into()));
    }
    let target = std::f64::consts::PI * wind as f64 / f64::from(lobes);
    let spec_at = |r: f64| ShrinkerSpec::new(n, eps, r, (wind, wind));
    let (r, d, iterations) = solve(|r| Ok(half_oscillation(&spec_at(r))?.1 - target), bracket)?;
    if !(d.abs() <= CLOSE_TOL) {
        return Err(Error::NotClosed { defect: d, iterations });
    }
    close(spec_at(r), lobes, iterations, nodes)
}

pub const CATALOGUE_HEADER: [&str; 7] = ["n", "eps", "rot", "wind", "r_min", "r_max", "p_value"];

/// Catalogue CSV, one row per closed shrinker.
pub fn catalogue_csv(entries: &[ClosedShrinker]) -> Vec<u8> {
    let mut w = csv::Writer::from_writer(Vec::new());
    w.write_record(CATALOGUE_HEADER).expect("in-memory write");
    for e in entries {
        let (rot, wind) = e.spec.target_rot_wind;
        w.write_record([
            e.spec.n.to_string(),
            io::fmt_num(e.spec.eps),
            rot.to_string(),
            wind.to_string(),
            io::fmt_num(e.r_min),
            io::fmt_num(e.r_max),
            io::fmt_num(e.p_value),
        ])
        .expect("in-memory write");
    }
    w.into_inner().expect("in-memory flush")
}

pub fn write_catalogue(path: &Path, entries: &[ClosedShrinker]) -> Result<()> {
    io::atomic_write(path, &catalogue_csv(entries))
}

/// The closed curve in the curve JSON format with its `eps`.
pub fn write_shrinker_json(path: &Path, shrinker: &ClosedShrinker) -> Result<()> {
    io::write_curve_json(path, &shrinker.curve, Some(shrinker.spec.eps))
}
