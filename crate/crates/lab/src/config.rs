//! Run configuration: defaults per scenario, a JSON file on top, CLI flags on
//! top of that.

use std::path::Path;

use clap::Args;
use lagflow_core::singularity::DEFAULT_TAIL_FRACTION;
use lagflow_core::FlowConfig;
use serde::{Deserialize, Serialize};
use serde_json::Value;

use crate::error::{LabError, LabResult};
use crate::scenario::{ScenarioKind, ScenarioSpec};

/// Everything one `simulate` run needs.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct RunConfig {
    pub scenario: ScenarioSpec,
    /// `flow.n` is always replaced by `scenario.n`.
    pub flow: FlowConfig,
    pub tail_fraction: f64,
    /// Most snapshots written per run; the final curve is always among them.
    pub max_snapshots: usize,
    pub seed: u64,
}

impl Default for RunConfig {
    fn default() -> Self {
        Self::defaults(ScenarioKind::Circle)
    }
}

impl RunConfig {
    pub fn defaults(kind: ScenarioKind) -> Self {
        let scenario = ScenarioSpec::of(kind);
        let mut flow = FlowConfig { snapshot_every: 25, ..FlowConfig::with_n(scenario.n) };
        if kind == ScenarioKind::Dumbbell {
            // the neck collapses to a width far below the mean spacing
            flow.curvature_density = 1.0;
        }
        RunConfig { scenario, flow, tail_fraction: DEFAULT_TAIL_FRACTION, max_snapshots: 16, seed: 0 }
    }

    pub fn validate(&self) -> LabResult<()> {
        self.scenario.validate()?;
        self.flow.validate()?;
        if !(self.tail_fraction > 0.0 && self.tail_fraction <= 1.0) {
            return Err(LabError::Config(format!("tail_fraction must lie in (0, 1], got {}", self.tail_fraction)));
        }
        Ok(())
    }

    fn sync(mut self) -> Self {
        self.flow.n = self.scenario.n;
        self
    }

    pub fn to_json(&self) -> String {
        let mut text = serde_json::to_string_pretty(self).expect("config serialises");
        text.push('\n');
        text
    }
}

/// Flags shared by `simulate` and `validate`; each overrides the config file.
#[derive(Debug, Clone, Default, Args)]
pub struct Overrides {
    #[arg(long, value_enum)]
    pub scenario: Option<ScenarioKind>,
    /// Ambient dimension.
    #[arg(long)]
    pub n: Option<u32>,
    /// Number of nodes.
    #[arg(long = "N")]
    pub nodes: Option<usize>,
    #[arg(long = "R")]
    pub radius: Option<f64>,
    #[arg(long)]
    pub a: Option<f64>,
    #[arg(long)]
    pub l: Option<u32>,
    #[arg(long)]
    pub omega0: Option<u32>,
    #[arg(long)]
    pub cfl: Option<f64>,
    #[arg(long)]
    pub t_max: Option<f64>,
    #[arg(long)]
    pub seed: Option<u64>,
}

impl Overrides {
    pub fn apply(&self, cfg: &mut RunConfig) {
        let s = &mut cfg.scenario;
        if let Some(k) = self.scenario {
            s.kind = k;
        }
        if let Some(v) = self.n {
            s.n = v;
        }
        if let Some(v) = self.nodes {
            s.nodes = v;
        }
        if let Some(v) = self.radius {
            s.radius = v;
        }
        if let Some(v) = self.a {
            s.a = v;
        }
        if let Some(v) = self.l {
            s.l = v;
        }
        if let Some(v) = self.omega0 {
            s.omega0 = v;
        }
        if let Some(v) = self.cfl {
            cfg.flow.cfl = v;
        }
        if self.t_max.is_some() {
            cfg.flow.t_max = self.t_max;
        }
        if let Some(v) = self.seed {
            cfg.seed = v;
        }
    }
}

/// Overlays `top` onto `base`, recursing into objects.
fn merge(base: &mut Value, top: Value) {
    match (base, top) {
        (Value::Object(b), Value::Object(t)) => {
            for (k, v) in t {
                match b.get_mut(&k) {
                    Some(slot) => merge(slot, v),
                    None => {
                        b.insert(k, v);
                    }
                }
            }
        }
        (slot, v) => *slot = v,
    }
}

fn kind_of(value: &Value) -> LabResult<Option<ScenarioKind>> {
    match value.pointer("/scenario/kind") {
        Some(k) => serde_json::from_value(k.clone()).map(Some).map_err(|e| LabError::Config(format!("scenario.kind: {e}"))),
        None => Ok(None),
    }
}

/// Resolves a configuration from JSON text (may be empty) and flags. The
/// defaults follow the scenario kind named by the flags, else the file.
pub fn resolve_text(text: Option<&str>, flags: &Overrides) -> LabResult<RunConfig> {
    let file: Value = match text {
        Some(t) => serde_json::from_str(t).map_err(|e| LabError::Config(e.to_string()))?,
        None => Value::Object(Default::default()),
    };
    if !file.is_object() {
        return Err(LabError::Config("configuration must be a JSON object".into()));
    }
    let kind = flags.scenario.or(kind_of(&file)?).unwrap_or(ScenarioKind::Circle);
    let mut merged = serde_json::to_value(RunConfig::defaults(kind)).expect("config serialises");
    merge(&mut merged, file);
    let mut cfg: RunConfig = serde_json::from_value(merged).map_err(|e| LabError::Config(e.to_string()))?;
    flags.apply(&mut cfg);
    let cfg = cfg.sync();
    cfg.validate()?;
    Ok(cfg)
}

pub fn resolve(path: Option<&Path>, flags: &Overrides) -> LabResult<RunConfig> {
    let text = match path {
        Some(p) => Some(std::fs::read_to_string(p).map_err(|e| LabError::io(p, e))?),
        None => None,
    };
    resolve_text(text.as_deref(), flags)
}
