//! Conservation laws and preserved properties checked along a recorded run.

use std::f64::consts::TAU;

use serde::{Deserialize, Serialize};

use crate::flow::TrajectoryRecord;
use crate::topology::TopologyInfo;

/// The `ε` law is compared up to this fraction of `1/ε₀`; closer to the
/// singular time both sides diverge and the difference measures only timing.
pub const EPS_LAW_HORIZON: f64 = 0.9;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Property {
    Tamed,
    Starshaped,
    Austere,
    Embedded,
}

impl Property {
    pub const ALL: [Property; 4] = [Property::Tamed, Property::Starshaped, Property::Austere, Property::Embedded];

    fn flags(self, record: &TrajectoryRecord) -> &[bool] {
        match self {
            Property::Tamed => &record.tamed,
            Property::Starshaped => &record.starshaped,
            Property::Austere => &record.austere,
            Property::Embedded => &record.embedded,
        }
    }
}

impl std::fmt::Display for Property {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(match self {
            Property::Tamed => "tamed",
            Property::Starshaped => "starshaped",
            Property::Austere => "austere",
            Property::Embedded => "embedded",
        })
    }
}

/// A property that held initially and fails at sample `index`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Violation {
    pub property: Property,
    pub index: usize,
    pub t: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct InvariantReport {
    /// `max_t |A(z_t) - A(z₀) + 2π q t|`; `None` when `q` is undefined.
    pub area_law_residual: Option<f64>,
    /// `max |ε_t (1 - ε₀ t)/ε₀ - 1|` over `t < 0.9/ε₀`; `None` for
    /// non-monotone starts.
    pub eps_law_residual: Option<f64>,
    /// `max |2π q - 2Ã|` along the Huisken-rescaled trajectory, `t < T`.
    pub hamiltonian_residual: Option<f64>,
    pub preservation_violations: Vec<Violation>,
}

impl InvariantReport {
    /// Area law residual relative to `|A(z₀)|`.
    pub fn area_law_relative(&self, initial: &TopologyInfo) -> Option<f64> {
        self.area_law_residual.map(|r| r / initial.area.abs())
    }
}

fn max_of(it: impl Iterator<Item = f64>) -> Option<f64> {
    it.fold(None, |m: Option<f64>, v| Some(m.map_or(v, |m| m.max(v))))
}

pub fn invariant_monitor(record: &TrajectoryRecord, initial: &TopologyInfo, t_est: Option<f64>) -> InvariantReport {
    let q = initial.q().map(|q| q as f64);
    let t = &record.times;
    let a0 = initial.area;

    let area_law_residual = q.and_then(|q| {
        max_of(t.iter().zip(&record.area).map(|(ti, a)| (a - a0 + TAU * q * ti).abs()))
    });

    let eps_law_residual = initial.eps_monotone.filter(|e| *e > 0.0).and_then(|e0| {
        let horizon = EPS_LAW_HORIZON / e0;
        max_of(
            t.iter()
                .zip(&record.eps_t)
                .filter(|(ti, _)| **ti < horizon)
                .map(|(ti, e)| (e * (1.0 - e0 * ti) / e0 - 1.0).abs()),
        )
    });

    let hamiltonian_residual = match (q, t_est) {
        (Some(q), Some(big_t)) => max_of(
            t.iter()
                .zip(&record.area)
                .filter(|(ti, _)| **ti < big_t)
                .map(|(ti, a)| (TAU * q - a / (big_t - ti)).abs()),
        ),
        _ => None,
    };

    let mut preservation_violations = Vec::new();
    for property in Property::ALL {
        let flags = property.flags(record);
        if flags.first() == Some(&true) {
            preservation_violations.extend(
                flags
                    .iter()
                    .enumerate()
                    .filter(|(_, ok)| !**ok)
                    .map(|(index, _)| Violation { property, index, t: t[index] }),
            );
        }
    }
    preservation_violations.sort_by_key(|v| v.index);

    InvariantReport { area_law_residual, eps_law_residual, hamiltonian_residual, preservation_violations }
}
