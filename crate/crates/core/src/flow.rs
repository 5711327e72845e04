//! Explicit time integration of `dz/dt = -f ν`.
//!
//! Each step is classical RK4 with the parabolic step size
//! `dt = cfl · h²/(1 + max|f| h)`, `h` the shortest segment. Every
//! `resample_every` steps the nodes are redistributed along the curve, which
//! only changes the parametrisation.

use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::curve::DiscreteCurve;
use crate::error::{Error, Result};
use crate::geometry::{geometry, GeometryField, MIN_SPEED};
use crate::io;
use crate::predicates::{is_embedded_sweep, PointwiseFlags};
use crate::resample::{resample_arclength, resample_density};
use crate::singularity::{estimate_singularity, SingularityReport, DEFAULT_TAIL_FRACTION};
use crate::topology::{symplectic_area, topology, TopologyInfo};
use crate::vec2::Vec2;

/// Steps shorter than this abort the run.
pub const MIN_DT: f64 = 1e-15;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct FlowConfig {
    /// Ambient dimension; the initial curve is re-tagged with it.
    pub n: u32,
    pub cfl: f64,
    pub resample_every: usize,
    /// Stop once `min r` falls to this value (only for `n ≥ 2`). `None` means
    /// `1e-3 ·` initial `max r`.
    pub stop_min_r: Option<f64>,
    pub stop_max_f: f64,
    pub t_max: Option<f64>,
    pub record_every: usize,
    /// Keep a copy of the curve every this many records (0 = none); the final
    /// curve is always kept.
    pub snapshot_every: usize,
    /// Safety cap on the number of steps.
    pub max_steps: usize,
    /// Weight of `|A|` in the resampling density `1 + w |A| L / 2π`; 0 keeps
    /// equal spacing.
    pub curvature_density: f64,
}

impl Default for FlowConfig {
    fn default() -> Self {
        FlowConfig {
            n: 2,
            cfl: 0.2,
            resample_every: 5,
            stop_min_r: None,
            stop_max_f: 1e6,
            t_max: None,
            record_every: 20,
            snapshot_every: 0,
            max_steps: 50_000_000,
            curvature_density: 0.0,
        }
    }
}

impl FlowConfig {
    pub fn with_n(n: u32) -> Self {
        FlowConfig { n, ..Self::default() }
    }

    pub fn validate(&self) -> Result<()> {
        let bad = |m: &str| Err(Error::InvalidConfig(m.to_owned()));
        if self.n == 0 {
            return bad("n must be at least 1");
        }
        if !(self.cfl > 0.0 && self.cfl <= 0.5) {
            return bad("cfl must lie in (0, 0.5]");
        }
        if self.resample_every == 0 || self.record_every == 0 || self.max_steps == 0 {
            return bad("resample_every, record_every and max_steps must be positive");
        }
        if !(self.stop_max_f > 0.0) {
            return bad("stop_max_f must be positive");
        }
        if self.stop_min_r.is_some_and(|r| !(r > 0.0)) {
            return bad("stop_min_r must be positive");
        }
        if self.t_max.is_some_and(|t| !(t > 0.0)) {
            return bad("t_max must be positive");
        }
        if !(self.curvature_density >= 0.0) {
            return bad("curvature_density must be non-negative");
        }
        Ok(())
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct FlowState {
    pub curve: DiscreteCurve,
    pub t: f64,
    pub dt_last: f64,
    pub steps: usize,
}

impl FlowState {
    pub fn new(curve: DiscreteCurve) -> Self {
        FlowState { curve, t: 0.0, dt_last: 0.0, steps: 0 }
    }
}

/// Reusable RK4 buffers for one node count.
struct Stepper {
    n: u32,
    h: f64,
    k: [Vec<Vec2>; 4],
    stage: Vec<Vec2>,
}

impl Stepper {
    fn new(len: usize, n: u32) -> Self {
        let zero = vec![Vec2::ZERO; len];
        Stepper {
            n,
            h: std::f64::consts::TAU / len as f64,
            k: [zero.clone(), zero.clone(), zero.clone(), zero.clone()],
            stage: zero,
        }
    }

    /// Writes `-f ν` at every node into `out` and returns `max |f|`.
    fn velocity(n: u32, h: f64, pts: &[Vec2], out: &mut [Vec2]) -> Result<f64> {
        let len = pts.len();
        let m = f64::from(n - 1);
        let s1 = 1.0 / (12.0 * h);
        let s2 = 1.0 / (12.0 * h * h);
        let mut max_f: f64 = 0.0;
        let at = |j: usize, off: isize| -> Vec2 {
            let i = j as isize + off;
            if i < 0 {
                pts[(i + len as isize) as usize]
            } else if i >= len as isize {
                pts[(i - len as isize) as usize]
            } else {
                pts[i as usize]
            }
        };
        for j in 0..len {
            let (m2, m1, c, p1, p2) = if j >= 2 && j + 2 < len {
                (pts[j - 2], pts[j - 1], pts[j], pts[j + 1], pts[j + 2])
            } else {
                (at(j, -2), at(j, -1), pts[j], at(j, 1), at(j, 2))
            };
            let d = ((p1 - m1) * 8.0 - (p2 - m2)) * s1;
            let dd = ((p1 + m1) * 16.0 - (p2 + m2) - c * 30.0) * s2;
            let speed_sq = d.norm_sq();
            let speed = speed_sq.sqrt();
            if !(speed >= MIN_SPEED) {
                if !speed.is_finite() {
                    return Err(Error::NonFinite("velocity"));
                }
                return Err(Error::DegenerateSegment { index: j, length: speed });
            }
            let inv = 1.0 / speed;
            let nu = Vec2::new(d.y * inv, -d.x * inv);
            let k = d.cross(dd) * inv / speed_sq;
            let r_sq = c.norm_sq();
            let f = if r_sq > 0.0 {
                k + m * nu.dot(c) / r_sq
            } else if n >= 2 {
                return Err(Error::OriginContact { index: j, radius: 0.0 });
            } else {
                k
            };
            if !f.is_finite() {
                return Err(Error::NonFinite("velocity"));
            }
            max_f = max_f.max(f.abs());
            out[j] = nu * (-f);
        }
        Ok(max_f)
    }

    /// One RK4 step of at most `dt_cap`; returns the new points, the step
    /// taken and `max |f|` at the start.
    fn advance(&mut self, curve: &DiscreteCurve, config: &FlowConfig, dt_cap: f64) -> Result<(Vec<Vec2>, f64, f64)> {
        let pts = curve.points();
        let max_f = Self::velocity(self.n, self.h, pts, &mut self.k[0])?;
        if max_f > config.stop_max_f {
            return Err(Error::BlowUp { max_f, limit: config.stop_max_f });
        }
        let dt = stable_dt(curve, config.cfl, max_f).min(dt_cap);
        if !(dt >= MIN_DT) {
            return Err(Error::StepUnderflow { dt });
        }
        let next = self.finish(pts, dt)?;
        Ok((next, dt, max_f))
    }

    /// Remaining RK4 stages, with `k[0]` already holding the velocity at `pts`.
    fn finish(&mut self, pts: &[Vec2], dt: f64) -> Result<Vec<Vec2>> {
        let (n, h) = (self.n, self.h);
        let len = pts.len();
        for s in 1..4 {
            let w = if s == 3 { dt } else { 0.5 * dt };
            let (done, rest) = self.k.split_at_mut(s);
            let prev = &done[s - 1];
            for j in 0..len {
                self.stage[j] = pts[j] + prev[j] * w;
            }
            Self::velocity(n, h, &self.stage, &mut rest[0])?;
        }
        let [k1, k2, k3, k4] = &self.k;
        Ok((0..len).map(|j| pts[j] + (k1[j] + (k2[j] + k3[j]) * 2.0 + k4[j]) * (dt / 6.0)).collect())
    }
}

/// The step size [`step`] would take from `curve`, and `max |f|` there.
pub fn step_size(curve: &DiscreteCurve, config: &FlowConfig) -> Result<(f64, f64)> {
    let mut out = vec![Vec2::ZERO; curve.len()];
    let max_f = Stepper::velocity(curve.n(), curve.dphi(), curve.points(), &mut out)?;
    Ok((stable_dt(curve, config.cfl, max_f), max_f))
}

fn stable_dt(curve: &DiscreteCurve, cfl: f64, max_f: f64) -> f64 {
    let h_min = curve.min_segment();
    let dt = cfl * h_min * h_min / (1.0 + max_f * h_min);
    if curve.n() < 2 {
        return dt;
    }
    // the -(n-1)/r drift near the origin is stiff on the scale r²/(n-1)
    let r_min = curve.min_r();
    dt.min(cfl * r_min * r_min / f64::from(curve.n() - 1))
}

/// One RK4 step of exactly `dt` without resampling, so node `j` follows the
/// same material point.
pub fn step_fixed(curve: &DiscreteCurve, dt: f64) -> Result<DiscreteCurve> {
    let mut stepper = Stepper::new(curve.len(), curve.n());
    let pts = curve.points();
    Stepper::velocity(stepper.n, stepper.h, pts, &mut stepper.k[0])?;
    DiscreteCurve::new(stepper.finish(pts, dt)?, curve.n())
}

fn redistribute(curve: &DiscreteCurve, config: &FlowConfig) -> Result<DiscreteCurve> {
    if config.curvature_density > 0.0 {
        let field = geometry(curve)?;
        let scale = config.curvature_density * field.length() / std::f64::consts::TAU;
        let raw: Vec<f64> = field.a_proxy_sq().iter().map(|a| 1.0 + scale * a.sqrt()).collect();
        // light smoothing keeps neighbouring spacings comparable
        let len = raw.len();
        let mut density = raw.clone();
        for _ in 0..4 {
            let prev = density.clone();
            for j in 0..len {
                density[j] = 0.25 * prev[(j + len - 1) % len] + 0.5 * prev[j] + 0.25 * prev[(j + 1) % len];
            }
        }
        resample_density(curve, curve.len(), &density)
    } else {
        resample_arclength(curve)
    }
}

fn time_left(config: &FlowConfig, t: f64) -> f64 {
    config.t_max.map_or(f64::INFINITY, |tm| tm - t)
}

/// One step of the flow (see the module documentation), resampling when the
/// step count reaches a multiple of `resample_every`.
pub fn step(state: &FlowState, config: &FlowConfig) -> Result<FlowState> {
    let mut stepper = Stepper::new(state.curve.len(), state.curve.n());
    step_with(&mut stepper, state, config)
}

fn step_with(stepper: &mut Stepper, state: &FlowState, config: &FlowConfig) -> Result<FlowState> {
    let (pts, dt, _) = stepper.advance(&state.curve, config, time_left(config, state.t))?;
    let mut curve = DiscreteCurve::new(pts, state.curve.n())?;
    let steps = state.steps + 1;
    if steps % config.resample_every == 0 {
        curve = redistribute(&curve, config)?;
    }
    Ok(FlowState { curve, t: state.t + dt, dt_last: dt, steps })
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum StopReason {
    /// `min r` reached `stop_min_r`.
    MinRadius,
    /// `max |f|` exceeded `stop_max_f`.
    MaxSpeed,
    TimeLimit,
    StepUnderflow,
    StepLimit,
    /// A node landed on the origin.
    OriginContact,
    /// The discrete curve degenerated (coincident nodes, non-finite values).
    Breakdown,
}

/// Invariants sampled along a run, aligned by sample index.
#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
pub struct TrajectoryRecord {
    pub n: u32,
    pub times: Vec<f64>,
    pub steps: Vec<usize>,
    pub area: Vec<f64>,
    /// `2π q / A(z_t)`, NaN where undefined.
    pub eps_t: Vec<f64>,
    pub min_r: Vec<f64>,
    pub max_r: Vec<f64>,
    pub max_abs_f: Vec<f64>,
    pub max_abs_k: Vec<f64>,
    /// `max r / min r`.
    pub harnack_ratio: Vec<f64>,
    pub starshaped: Vec<bool>,
    pub tamed: Vec<bool>,
    pub austere: Vec<bool>,
    pub embedded: Vec<bool>,
    /// `max_j (k² + (n-1)(⟨ν,e_r⟩/r)²)`.
    pub a_proxy_sq: Vec<f64>,
}

pub const TRAJECTORY_HEADER: [&str; 13] = [
    "t", "area", "eps_t", "min_r", "max_r", "max_abs_f", "max_abs_k", "harnack", "starshaped", "tamed", "austere", "embedded",
    "a_proxy_sq",
];

impl TrajectoryRecord {
    pub fn len(&self) -> usize {
        self.times.len()
    }

    pub fn is_empty(&self) -> bool {
        self.times.is_empty()
    }

    fn push(&mut self, t: f64, steps: usize, curve: &DiscreteCurve, field: &GeometryField, q: Option<i64>) {
        let area = symplectic_area(curve, field);
        let flags = PointwiseFlags::of(field);
        let (min_r, max_r) = (curve.min_r(), curve.max_r());
        self.times.push(t);
        self.steps.push(steps);
        self.area.push(area);
        self.eps_t.push(match q {
            Some(q) if area != 0.0 => std::f64::consts::TAU * q as f64 / area,
            _ => f64::NAN,
        });
        self.min_r.push(min_r);
        self.max_r.push(max_r);
        self.max_abs_f.push(field.max_abs_f());
        self.max_abs_k.push(field.max_abs_k());
        self.harnack_ratio.push(if min_r > 0.0 { max_r / min_r } else { f64::INFINITY });
        self.starshaped.push(flags.starshaped);
        self.tamed.push(flags.tamed);
        self.austere.push(flags.austere);
        self.embedded.push(is_embedded_sweep(curve.points()));
        self.a_proxy_sq.push(field.max_a_proxy_sq());
    }

    /// CSV text with one row per sample; booleans as 0/1.
    pub fn to_csv(&self) -> Vec<u8> {
        let mut w = csv::Writer::from_writer(Vec::new());
        w.write_record(TRAJECTORY_HEADER).expect("in-memory write");
        let b = |v: bool| if v { "1".to_owned() } else { "0".to_owned() };
        for i in 0..self.len() {
            w.write_record([
                io::fmt_num(self.times[i]),
                io::fmt_num(self.area[i]),
                io::fmt_num(self.eps_t[i]),
                io::fmt_num(self.min_r[i]),
                io::fmt_num(self.max_r[i]),
                io::fmt_num(self.max_abs_f[i]),
                io::fmt_num(self.max_abs_k[i]),
                io::fmt_num(self.harnack_ratio[i]),
                b(self.starshaped[i]),
                b(self.tamed[i]),
                b(self.austere[i]),
                b(self.embedded[i]),
                io::fmt_num(self.a_proxy_sq[i]),
            ])
            .expect("in-memory write");
        }
        w.into_inner().expect("in-memory flush")
    }

    pub fn write_csv(&self, path: &Path) -> Result<()> {
        io::atomic_write(path, &self.to_csv())
    }
}

/// A stored copy of the curve.
#[derive(Debug, Clone, PartialEq)]
pub struct Snapshot {
    pub t: f64,
    pub curve: DiscreteCurve,
}

#[derive(Debug, Clone)]
pub struct RunOutcome {
    pub record: TrajectoryRecord,
    /// `None` when the trajectory does not support an estimate (see
    /// `report_error`).
    pub report: Option<SingularityReport>,
    pub report_error: Option<String>,
    pub final_state: FlowState,
    pub stop: StopReason,
    /// Error text behind `stop`, when the run ended on one.
    pub stop_detail: Option<String>,
    pub initial_topology: TopologyInfo,
    pub snapshots: Vec<Snapshot>,
}

/// Integrates from `initial` until a stop condition holds, sampling the
/// invariants every `record_every` steps and at the final state, then
/// estimates the singularity from the samples.
pub fn run(initial: &DiscreteCurve, config: &FlowConfig) -> Result<RunOutcome> {
    config.validate()?;
    let curve = if initial.n() == config.n { initial.clone() } else { initial.with_n(config.n)? };
    let n = config.n;
    let field0 = geometry(&curve)?;
    let initial_topology = topology(&curve, &field0)?;
    let q = initial_topology.q();
    let stop_min_r = config.stop_min_r.unwrap_or(1e-3 * curve.max_r());

    let mut stepper = Stepper::new(curve.len(), n);
    let mut record = TrajectoryRecord { n, ..Default::default() };
    let mut snapshots = Vec::new();
    let mut state = FlowState::new(curve);
    let mut last_recorded: Option<usize> = None;

    let sample = |state: &FlowState, record: &mut TrajectoryRecord, snapshots: &mut Vec<Snapshot>| -> Result<()> {
        let field = geometry(&state.curve)?;
        record.push(state.t, state.steps, &state.curve, &field, q);
        let index = record.len() - 1;
        if config.snapshot_every > 0 && index % config.snapshot_every == 0 {
            snapshots.push(Snapshot { t: state.t, curve: state.curve.clone() });
        }
        Ok(())
    };

    let (stop, stop_detail) = loop {
        if n >= 2 && state.curve.min_r() <= stop_min_r {
            break (StopReason::MinRadius, None);
        }
        if time_left(config, state.t) <= MIN_DT * state.t.max(1.0) {
            break (StopReason::TimeLimit, None);
        }
        if state.steps >= config.max_steps {
            break (StopReason::StepLimit, None);
        }
        if state.steps % config.record_every == 0 {
            sample(&state, &mut record, &mut snapshots)?;
            last_recorded = Some(state.steps);
        }
        match step_with(&mut stepper, &state, config) {
            Ok(next) => state = next,
            Err(e) => {
                let reason = match e {
                    Error::BlowUp { .. } => StopReason::MaxSpeed,
                    Error::StepUnderflow { .. } => StopReason::StepUnderflow,
                    Error::OriginContact { .. } => StopReason::OriginContact,
                    Error::DegenerateSegment { .. } | Error::NonFinite(_) => StopReason::Breakdown,
                    other => return Err(other),
                };
                break (reason, Some(e.to_string()));
            }
        }
    };
    if last_recorded != Some(state.steps) {
        // the final curve may fail geometry when the run broke down
        if geometry(&state.curve).is_ok() {
            sample(&state, &mut record, &mut snapshots)?;
        }
    }
    if snapshots.last().map(|s| s.t) != Some(state.t) {
        snapshots.push(Snapshot { t: state.t, curve: state.curve.clone() });
    }

    let (report, report_error) = match estimate_singularity(&record, DEFAULT_TAIL_FRACTION) {
        Ok(r) => (Some(r), None),
        Err(e) => (None, Some(e.to_string())),
    };
    Ok(RunOutcome { record, report, report_error, final_state: state, stop, stop_detail, initial_topology, snapshots })
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::f64::consts::{PI, TAU};

    fn circle(radius: f64, center: Vec2, nodes: usize, n: u32) -> DiscreteCurve {
        DiscreteCurve::from_fn(nodes, n, |p| center + Vec2::from_polar(radius, p)).unwrap()
    }

    fn mean_radius(c: &DiscreteCurve, center: Vec2) -> f64 {
        c.points().iter().map(|p| p.dist(center)).sum::<f64>() / c.len() as f64
    }

    #[test]
    fn one_step_of_the_unit_circle() {
        let cfg = FlowConfig::with_n(2);
        let s = step(&FlowState::new(circle(1.0, Vec2::ZERO, 256, 2)), &cfg).unwrap();
        let exact = (1.0 - 4.0 * s.dt_last).sqrt();
        assert!((mean_radius(&s.curve, Vec2::ZERO) - exact).abs() < 1e-8);
        assert_eq!(s.steps, 1);
        assert!(s.t == s.dt_last && s.t > 0.0);
    }

    #[test]
    fn one_step_classical_shortening() {
        let c = Vec2::new(3.0, 0.0);
        let s = step(&FlowState::new(circle(1.0, c, 256, 1)), &FlowConfig::with_n(1)).unwrap();
        let exact = (1.0 - 2.0 * s.dt_last).sqrt();
        for p in s.curve.points() {
            assert!((p.dist(c) - exact).abs() < 1e-8);
        }
    }

    #[test]
    fn step_commutes_with_rotation() {
        let c = DiscreteCurve::from_fn(128, 3, |p| Vec2::from_polar(1.0 + 0.2 * (2.0 * p).cos(), p) + Vec2::new(0.1, 0.0))
            .unwrap();
        let cfg = FlowConfig { n: 3, resample_every: 1, ..FlowConfig::default() };
        let angle = 0.7;
        let a = step(&FlowState::new(c.rotated(angle)), &cfg).unwrap();
        let b = step(&FlowState::new(c), &cfg).unwrap();
        assert!((a.dt_last - b.dt_last).abs() < 1e-12 * b.dt_last);
        for (p, q) in a.curve.points().iter().zip(b.curve.rotated(angle).points()) {
            assert!(p.dist(*q) < 1e-12);
        }
    }

    #[test]
    fn invalid_configs_rejected() {
        for cfg in [
            FlowConfig { cfl: 0.6, ..FlowConfig::default() },
            FlowConfig { cfl: 0.0, ..FlowConfig::default() },
            FlowConfig { record_every: 0, ..FlowConfig::default() },
            FlowConfig { t_max: Some(-1.0), ..FlowConfig::default() },
        ] {
            assert!(matches!(cfg.validate(), Err(Error::InvalidConfig(_))));
        }
    }

    #[test]
    fn blow_up_and_underflow_reported() {
        let c = circle(1.0, Vec2::ZERO, 64, 2);
        let cfg = FlowConfig { stop_max_f: 1.0, ..FlowConfig::with_n(2) };
        assert!(matches!(step(&FlowState::new(c.clone()), &cfg), Err(Error::BlowUp { .. })));
        let tiny = c.scaled(1e-7).unwrap();
        let cfg = FlowConfig { stop_max_f: 1e12, ..FlowConfig::with_n(2) };
        assert!(matches!(step(&FlowState::new(tiny), &cfg), Err(Error::StepUnderflow { .. })));
    }

    #[test]
    fn shrinking_circle_run() {
        let cfg = FlowConfig { record_every: 20, ..FlowConfig::with_n(2) };
        let out = run(&circle(1.0, Vec2::ZERO, 128, 2), &cfg).unwrap();
        assert_eq!(out.stop, StopReason::MinRadius);
        assert!((out.final_state.t - 0.25).abs() < 5e-3, "{}", out.final_state.t);
        let rec = &out.record;
        for i in 0..rec.len() {
            let predicted = PI - 4.0 * PI * rec.times[i];
            assert!((rec.area[i] - predicted).abs() < 1e-3);
        }
        assert!(*rec.min_r.last().unwrap() <= 1e-3);
    }

    #[test]
    fn time_limit_lands_exactly() {
        let cfg = FlowConfig { t_max: Some(0.01), ..FlowConfig::with_n(2) };
        let out = run(&circle(1.0, Vec2::ZERO, 64, 2), &cfg).unwrap();
        assert_eq!(out.stop, StopReason::TimeLimit);
        assert!((out.final_state.t - 0.01).abs() < 1e-15);
        assert_eq!(*out.record.times.last().unwrap(), out.final_state.t);
        assert!(out.report.is_none());
    }

    #[test]
    fn trajectory_csv_layout() {
        let cfg = FlowConfig { t_max: Some(1e-3), ..FlowConfig::with_n(2) };
        let out = run(&circle(1.0, Vec2::ZERO, 64, 2), &cfg).unwrap();
        let text = String::from_utf8(out.record.to_csv()).unwrap();
        let mut lines = text.lines();
        assert_eq!(lines.next().unwrap(), TRAJECTORY_HEADER.join(","));
        assert_eq!(lines.count(), out.record.len());
        let _ = TAU;
    }
}
