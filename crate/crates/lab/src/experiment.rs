//! One scenario through the whole pipeline: generate, flow, monitor,
//! classify, write artifacts.

use std::f64::consts::TAU;
use std::path::{Path, PathBuf};

use lagflow_core::exec::Mode;
use lagflow_core::geometry::geometry;
use lagflow_core::io::{atomic_write, write_curve_json};
use lagflow_core::monitor::invariant_monitor;
use lagflow_core::predicates::hausdorff;
use lagflow_core::singularity::rescale_huisken;
use lagflow_core::{flow, InvariantReport, Predicates, RunOutcome, SingularityReport, StopReason, TopologyInfo, Vec2};
use serde::Serialize;

use crate::config::RunConfig;
use crate::error::{LabError, LabResult, EXIT_NUMERIC, EXIT_OK, EXIT_VIOLATION};
use crate::scenario::generate;
use crate::svg;

/// Relative area-law tolerance.
pub const AREA_LAW_TOL: f64 = 1e-3;
/// Relative tolerance of the `ε` law.
pub const EPS_LAW_TOL: f64 = 1e-2;
/// Slack on `t_stop ≤ 1/ε₀`.
pub const LIFETIME_TOL: f64 = 1e-2;

/// One failed check, as written to `report.json`.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Breach {
    pub check: String,
    pub value: f64,
    pub limit: f64,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub t: Option<f64>,
}

#[derive(Debug, Clone, Serialize)]
pub struct InitialSummary {
    pub area: f64,
    pub rot: i64,
    pub wind0: Option<i64>,
    pub eps: Option<f64>,
    pub starshaped: bool,
    pub tamed: bool,
    pub austere: bool,
    pub embedded: bool,
    pub lagrangian_embedding: lagflow_core::LagrangianEmbedding,
}

#[derive(Debug, Clone, Serialize)]
pub struct StopSummary {
    pub reason: StopReason,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub detail: Option<String>,
    pub t: f64,
    pub steps: usize,
    pub area: f64,
    pub min_r: f64,
}

#[derive(Debug, Clone, Serialize)]
pub struct SingularitySummary {
    #[serde(rename = "T_est")]
    pub t_est: f64,
    pub fit_c: f64,
    pub class: lagflow_core::SingularityClass,
    pub type1: bool,
    /// `m(t)` over the tail samples.
    pub m_tail: Vec<f64>,
    pub m_median: f64,
    pub tail_spread: f64,
    pub tail_growth: f64,
}

impl From<&SingularityReport> for SingularitySummary {
    fn from(r: &SingularityReport) -> Self {
        SingularitySummary {
            t_est: r.t_est,
            fit_c: r.fit_c,
            class: r.class,
            type1: r.type1,
            m_tail: r.rescaled_sup[r.tail_start..].to_vec(),
            m_median: r.m_tail,
            tail_spread: r.tail_spread,
            tail_growth: r.tail_growth,
        }
    }
}

/// The final curve rescaled about the estimated singular time.
#[derive(Debug, Clone, Serialize)]
pub struct RescaledSummary {
    pub s: f64,
    pub min_r: f64,
    pub max_r: f64,
    /// Hausdorff distance to the circle of radius `√n` about the origin.
    pub to_round: f64,
}

#[derive(Debug, Clone, Serialize)]
pub struct SnapshotEntry {
    pub index: usize,
    pub t: f64,
}

/// Everything `report.json` holds.
#[derive(Debug, Clone, Serialize)]
pub struct Report {
    pub config: RunConfig,
    pub initial: InitialSummary,
    pub stop: StopSummary,
    pub singularity: Option<SingularitySummary>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub singularity_error: Option<String>,
    pub rescaled: Option<RescaledSummary>,
    pub invariants: InvariantReport,
    pub area_law_relative: Option<f64>,
    pub snapshots: Vec<SnapshotEntry>,
    pub violations: Vec<Breach>,
}

impl Report {
    /// 0 clean, 1 invariant violation, 3 abnormal stop.
    pub fn exit_code(&self) -> i32 {
        if !self.violations.is_empty() {
            EXIT_VIOLATION
        } else if abnormal(self.stop.reason) {
            EXIT_NUMERIC
        } else {
            EXIT_OK
        }
    }
}

fn abnormal(reason: StopReason) -> bool {
    matches!(reason, StopReason::StepUnderflow | StopReason::StepLimit | StopReason::Breakdown | StopReason::OriginContact)
}

pub struct Experiment {
    pub report: Report,
    pub outcome: RunOutcome,
}

impl Experiment {
    pub fn exit_code(&self) -> i32 {
        self.report.exit_code()
    }
}

/// Distance from `pts` to the circle of radius `√n` about the origin.
fn distance_to_round(pts: &[Vec2], n: u32) -> f64 {
    let radius = f64::from(n).sqrt();
    let nodes = (4 * pts.len()).max(1024);
    let round: Vec<Vec2> = (0..nodes).map(|j| Vec2::from_polar(radius, TAU * j as f64 / nodes as f64)).collect();
    hausdorff(Mode::Sequential, pts, &round)
}

fn breaches(cfg: &RunConfig, outcome: &RunOutcome, inv: &InvariantReport, initial: &Predicates, topo: &TopologyInfo) -> Vec<Breach> {
    let mut out = Vec::new();
    let breach = |check: &str, value: f64, limit: f64, t: Option<f64>| Breach { check: check.into(), value, limit, t };
    if let Some(rel) = inv.area_law_relative(topo).filter(|_| topo.area != 0.0) {
        if !(rel <= AREA_LAW_TOL) {
            out.push(breach("area_law", rel, AREA_LAW_TOL, None));
        }
    }
    if let Some(r) = inv.eps_law_residual {
        if !(r <= EPS_LAW_TOL) {
            out.push(breach("eps_law", r, EPS_LAW_TOL, None));
        }
    }
    for v in &inv.preservation_violations {
        out.push(breach(&format!("preserved_{}", v.property), v.index as f64, 0.0, Some(v.t)));
    }
    let t_stop = outcome.final_state.t;
    // a starshaped seed may only become singular at the origin
    if cfg.scenario.n >= 2 && initial.starshaped && outcome.stop == StopReason::MaxSpeed {
        out.push(breach("singular_locus", outcome.final_state.curve.min_r(), 0.0, Some(t_stop)));
    }
    if let Some(eps) = topo.eps_monotone.filter(|e| *e > 0.0) {
        let limit = (1.0 + LIFETIME_TOL) / eps;
        if initial.lagrangian_embedding == lagflow_core::LagrangianEmbedding::Embedded && t_stop > limit {
            out.push(breach("lifetime", t_stop, limit, None));
        }
    }
    out
}

/// Runs `cfg` and, when `out` is given, writes `trajectory.csv`,
/// `report.json`, `snap_{i}.json`, `curves.svg` and `invariants.svg` there.
pub fn experiment(cfg: &RunConfig, out: Option<&Path>) -> LabResult<Experiment> {
    cfg.validate()?;
    let curve = generate(&cfg.scenario)?;
    let field = geometry(&curve)?;
    let initial = Predicates::evaluate(&curve, &field);
    let outcome = flow::run(&curve, &cfg.flow)?;
    let topo = outcome.initial_topology.clone();
    let rep = outcome.report.as_ref();
    let inv = invariant_monitor(&outcome.record, &topo, rep.map(|r| r.t_est));
    let rescaled = rep.and_then(|r| rescale_huisken(&outcome.final_state, r.t_est).ok()).map(|(c, s)| RescaledSummary {
        s,
        min_r: c.min_r(),
        max_r: c.max_r(),
        to_round: distance_to_round(c.points(), cfg.scenario.n),
    });
    let snaps = pick_snapshots(&outcome, cfg.max_snapshots);
    let violations = breaches(cfg, &outcome, &inv, &initial, &topo);
    let last = outcome.record.len() - 1;
    let report = Report {
        config: cfg.clone(),
        initial: InitialSummary {
            area: topo.area,
            rot: topo.rot,
            wind0: topo.wind0,
            eps: topo.eps_monotone,
            starshaped: initial.starshaped,
            tamed: initial.tamed,
            austere: initial.austere,
            embedded: initial.embedded,
            lagrangian_embedding: initial.lagrangian_embedding,
        },
        stop: StopSummary {
            reason: outcome.stop,
            detail: outcome.stop_detail.clone(),
            t: outcome.final_state.t,
            steps: outcome.final_state.steps,
            area: outcome.record.area[last],
            min_r: outcome.record.min_r[last],
        },
        singularity: rep.map(SingularitySummary::from),
        singularity_error: outcome.report_error.clone(),
        rescaled,
        area_law_relative: inv.area_law_relative(&topo),
        invariants: inv,
        snapshots: snaps.iter().enumerate().map(|(index, s)| SnapshotEntry { index, t: outcome.snapshots[*s].t }).collect(),
        violations,
    };
    let exp = Experiment { report, outcome };
    if let Some(dir) = out {
        write_artifacts(dir, &exp, &snaps)?;
    }
    Ok(exp)
}

/// Indices of at most `max` snapshots, evenly spread, always keeping the
/// first and the last.
fn pick_snapshots(outcome: &RunOutcome, max: usize) -> Vec<usize> {
    let len = outcome.snapshots.len();
    if len <= max {
        return (0..len).collect();
    }
    if max < 2 {
        return if max == 1 { vec![len - 1] } else { Vec::new() };
    }
    let mut picked: Vec<usize> = (0..max).map(|i| (i * (len - 1) + (max - 1) / 2) / (max - 1)).collect();
    picked.dedup();
    picked
}

fn write_artifacts(dir: &Path, exp: &Experiment, snaps: &[usize]) -> LabResult<()> {
    std::fs::create_dir_all(dir).map_err(|e| LabError::io(dir, e))?;
    clear_snapshots(dir)?;
    let outcome = &exp.outcome;
    outcome.record.write_csv(&dir.join("trajectory.csv"))?;
    for (i, s) in snaps.iter().enumerate() {
        write_curve_json(&dir.join(format!("snap_{i}.json")), &outcome.snapshots[*s].curve, None)?;
    }
    let mut text = serde_json::to_string_pretty(&exp.report).expect("report serialises");
    text.push('\n');
    atomic_write(&dir.join("report.json"), text.as_bytes())?;
    let curves: Vec<(f64, &[Vec2])> = snaps.iter().map(|s| (outcome.snapshots[*s].t, outcome.snapshots[*s].curve.points())).collect();
    atomic_write(&dir.join("curves.svg"), svg::curve_overlay(&curves).as_bytes())?;
    let topo = &outcome.initial_topology;
    let series = svg::Series {
        times: &outcome.record.times,
        area: &outcome.record.area,
        predicted: topo.area_slope().map(|slope| (outcome.record.area[0], slope)),
        m: outcome.report.as_ref().map(|r| r.rescaled_sup.as_slice()),
    };
    atomic_write(&dir.join("invariants.svg"), svg::time_series(&series).as_bytes())?;
    Ok(())
}

/// Removes `snap_*.json` left by an earlier run in `dir`.
fn clear_snapshots(dir: &Path) -> LabResult<()> {
    for entry in std::fs::read_dir(dir).map_err(|e| LabError::io(dir, e))? {
        let path = entry.map_err(|e| LabError::io(dir, e))?.path();
        if is_snapshot(&path) {
            std::fs::remove_file(&path).map_err(|e| LabError::io(&path, e))?;
        }
    }
    Ok(())
}

fn is_snapshot(path: &Path) -> bool {
    let name = path.file_name().and_then(|n| n.to_str()).unwrap_or("");
    name.strip_prefix("snap_").and_then(|r| r.strip_suffix(".json")).is_some_and(|i| !i.is_empty() && i.bytes().all(|b| b.is_ascii_digit()))
}

/// `snap_{i}.json` files in `dir`, ordered by index.
pub fn snapshot_files(dir: &Path) -> LabResult<Vec<PathBuf>> {
    let mut found: Vec<(usize, PathBuf)> = Vec::new();
    for entry in std::fs::read_dir(dir).map_err(|e| LabError::io(dir, e))? {
        let path = entry.map_err(|e| LabError::io(dir, e))?.path();
        if is_snapshot(&path) {
            let name = path.file_stem().and_then(|n| n.to_str()).unwrap_or("");
            let index = name["snap_".len()..].parse().unwrap_or(usize::MAX);
            found.push((index, path));
        }
    }
    found.sort();
    Ok(found.into_iter().map(|(_, p)| p).collect())
}
