//! Parameter sweeps: every grid row is an independent experiment; rows run
//! on the worker pool and land in one summary CSV.

use std::path::Path;

use lagflow_core::exec::{self, Mode};
use lagflow_core::io::{atomic_write, fmt_num};
use serde::Deserialize;
use serde_json::Value;

use crate::config::{resolve_text, Overrides, RunConfig};
use crate::error::{LabError, LabResult};
use crate::experiment::experiment;
use crate::scenario::{ScenarioKind, ScenarioSpec};

pub const SUMMARY_HEADER: [&str; 9] =
    ["scenario", "params", "n", "T_est", "class", "type1", "area_law_residual", "eps_law_residual", "violations"];

/// Environment variable capping the worker pool.
pub const THREADS_VAR: &str = "LAGFLOW_THREADS";

/// One summary line. Fields left `None` are written empty.
#[derive(Debug, Clone, PartialEq)]
pub struct SweepRow {
    pub scenario: ScenarioKind,
    pub params: String,
    pub n: u32,
    pub t_est: Option<f64>,
    pub class: String,
    pub type1: Option<bool>,
    pub area_law_residual: Option<f64>,
    pub eps_law_residual: Option<f64>,
    /// Failed checks, or the error that ended the row.
    pub violations: Vec<String>,
}

/// The parameters that matter for `spec.kind`, as `key=value` pairs.
pub fn params_label(spec: &ScenarioSpec) -> String {
    let mut p = vec![format!("N={}", spec.nodes), format!("R={}", spec.radius)];
    match spec.kind {
        ScenarioKind::Circle | ScenarioKind::OffsetCircle => {
            let c = spec.center();
            if c.x != 0.0 || c.y != 0.0 {
                p.push(format!("center={}:{}", c.x, c.y));
            }
        }
        ScenarioKind::PerturbedSymmetric => {
            p.extend([format!("a={}", spec.a), format!("l={}", spec.l), format!("omega0={}", spec.omega0)]);
        }
        ScenarioKind::FigureEight => {}
        ScenarioKind::Dumbbell => {
            p.extend([format!("d={}", spec.separation), format!("w={}", spec.neck_width), format!("lambda={}", spec.blend)]);
        }
        ScenarioKind::Chekanov => p.push(format!("kappa={}", spec.kappa)),
    }
    p.join(";")
}

fn run_row(index: usize, cfg: &RunConfig, out: Option<&Path>) -> SweepRow {
    let row_dir = out.map(|d| d.join(format!("row_{index:03}")));
    let mut row = SweepRow {
        scenario: cfg.scenario.kind,
        params: params_label(&cfg.scenario),
        n: cfg.scenario.n,
        t_est: None,
        class: String::new(),
        type1: None,
        area_law_residual: None,
        eps_law_residual: None,
        violations: Vec::new(),
    };
    match experiment(cfg, row_dir.as_deref()) {
        Ok(exp) => {
            let r = &exp.report;
            if let Some(s) = &r.singularity {
                row.t_est = Some(s.t_est);
                row.class = serde_json::to_value(s.class).ok().and_then(|v| v.as_str().map(str::to_owned)).unwrap_or_default();
                row.type1 = Some(s.type1);
            }
            row.area_law_residual = r.area_law_relative;
            row.eps_law_residual = r.invariants.eps_law_residual;
            row.violations = r.violations.iter().map(|b| b.check.clone()).collect();
        }
        Err(e) => {
            row.class = "error".into();
            row.violations.push(format!("error: {e}"));
        }
    }
    row
}

/// A grid file: every scenario object is crossed with every flow object;
/// each is a partial config laid over the defaults of its scenario kind.
#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
struct GridFile {
    scenarios: Vec<Value>,
    #[serde(default)]
    flows: Vec<Value>,
}

pub fn grid_from_json(text: &str) -> LabResult<Vec<RunConfig>> {
    let file: GridFile = serde_json::from_str(text).map_err(|e| LabError::Config(e.to_string()))?;
    let flows = if file.flows.is_empty() { vec![Value::Object(Default::default())] } else { file.flows };
    let mut grid = Vec::new();
    for s in &file.scenarios {
        for f in &flows {
            let doc = serde_json::json!({ "scenario": s, "flow": f });
            grid.push(resolve_text(Some(&doc.to_string()), &Overrides::default())?);
        }
    }
    Ok(grid)
}

/// Value lists crossed into a grid; an empty list keeps the base value.
#[derive(Debug, Clone, Default)]
pub struct Axes {
    pub n: Vec<u32>,
    pub radius: Vec<f64>,
    pub a: Vec<f64>,
    pub l: Vec<u32>,
}

pub fn expand(base: &RunConfig, axes: &Axes) -> LabResult<Vec<RunConfig>> {
    fn or_base<T: Copy>(v: &[T], b: T) -> Vec<T> {
        if v.is_empty() {
            vec![b]
        } else {
            v.to_vec()
        }
    }
    let s = &base.scenario;
    let mut grid = Vec::new();
    for n in or_base(&axes.n, s.n) {
        for radius in or_base(&axes.radius, s.radius) {
            for a in or_base(&axes.a, s.a) {
                for l in or_base(&axes.l, s.l) {
                    let mut cfg = base.clone();
                    cfg.scenario = ScenarioSpec { n, radius, a, l, ..cfg.scenario };
                    cfg.flow.n = n;
                    cfg.validate()?;
                    grid.push(cfg);
                }
            }
        }
    }
    Ok(grid)
}

/// Runs every configuration in `grid`. Each row writes its artifacts to
/// `out/row_{i}` and the summary goes to `out/summary.csv`.
pub fn sweep(grid: &[RunConfig], out: Option<&Path>, mode: Mode) -> LabResult<Vec<SweepRow>> {
    if grid.is_empty() {
        return Err(LabError::ExitEmptyGrid);
    }
    let indexed: Vec<(usize, &RunConfig)> = grid.iter().enumerate().collect();
    let rows = exec::map(mode, &indexed, |(i, cfg)| run_row(*i, cfg, out));
    if let Some(dir) = out {
        atomic_write(&dir.join("summary.csv"), &summary_csv(&rows))?;
    }
    Ok(rows)
}

pub fn summary_csv(rows: &[SweepRow]) -> Vec<u8> {
    let opt = |x: Option<f64>| x.map(fmt_num).unwrap_or_default();
    let mut w = csv::Writer::from_writer(Vec::new());
    w.write_record(SUMMARY_HEADER).expect("in-memory write");
    for r in rows {
        w.write_record([
            r.scenario.name().to_owned(),
            r.params.clone(),
            r.n.to_string(),
            opt(r.t_est),
            r.class.clone(),
            r.type1.map(|b| b.to_string()).unwrap_or_default(),
            opt(r.area_law_residual),
            opt(r.eps_law_residual),
            r.violations.join(";"),
        ])
        .expect("in-memory write");
    }
    w.into_inner().expect("in-memory flush")
}

/// Caps the worker pool from `LAGFLOW_THREADS` when it holds a positive
/// integer. Returns the cap that was applied.
pub fn init_pool_from_env() -> LabResult<Option<usize>> {
    match std::env::var(THREADS_VAR) {
        Ok(v) => {
            let threads: usize =
                v.trim().parse().ok().filter(|t| *t > 0).ok_or_else(|| LabError::Config(format!("{THREADS_VAR} must be a positive integer, got {v:?}")))?;
            exec::init_threads(threads);
            Ok(Some(threads))
        }
        Err(_) => Ok(None),
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn empty_grid_is_an_error() {
        assert!(matches!(sweep(&[], None, Mode::Sequential), Err(LabError::ExitEmptyGrid)));
    }

    #[test]
    fn failing_rows_are_recorded() {
        let mut good = RunConfig::defaults(ScenarioKind::Circle);
        good.scenario.nodes = 48;
        let mut bad = good.clone();
        bad.scenario.radius = -1.0;
        let rows = sweep(&[good, bad], None, Mode::Parallel).unwrap();
        assert_eq!(rows.len(), 2);
        assert!(rows[0].violations.is_empty(), "{:?}", rows[0]);
        assert_eq!(rows[0].type1, Some(true));
        assert_eq!(rows[1].class, "error");
        let text = String::from_utf8(summary_csv(&rows)).unwrap();
        assert!(text.starts_with("scenario,params,n,T_est,class,type1,area_law_residual,eps_law_residual,violations\n"));
        assert_eq!(text.lines().count(), 3);
    }

    #[test]
    fn grids_cross_their_axes() {
        let text = r#"{"scenarios": [{"kind": "circle", "R": 0.5}, {"kind": "dumbbell"}], "flows": [{"cfl": 0.1}, {"cfl": 0.2}]}"#;
        let grid = grid_from_json(text).unwrap();
        assert_eq!(grid.len(), 4);
        assert_eq!(grid[1].flow.cfl, 0.2);
        assert_eq!(grid[2].flow.curvature_density, 1.0);
        assert!(grid_from_json(r#"{"scenarios": [], "extra": 1}"#).is_err());
        assert!(grid_from_json(r#"{"scenarios": []}"#).unwrap().is_empty());

        let base = RunConfig::defaults(ScenarioKind::PerturbedSymmetric);
        let grid = expand(&base, &Axes { l: vec![3, 9, 15], n: vec![2, 3], ..Default::default() }).unwrap();
        assert_eq!(grid.len(), 6);
        assert!(grid.iter().all(|c| c.flow.n == c.scenario.n));
        assert!(expand(&base, &Axes { a: vec![1.2], ..Default::default() }).is_err());
    }

    #[test]
    fn labels_name_the_kind_parameters() {
        let p = ScenarioSpec::of(ScenarioKind::PerturbedSymmetric);
        assert_eq!(params_label(&p), "N=512;R=1;a=0.1;l=9;omega0=1");
        assert_eq!(params_label(&ScenarioSpec::of(ScenarioKind::OffsetCircle)), "N=512;R=1;center=2:0");
    }
}
