//! Simulation and verification toolkit for the equivariant Lagrangian mean
//! curvature flow, reduced to the motion `dz/dt = -f ν` of closed profile
//! curves `z: S¹ → ℂ*` with driving speed `f = k + (n-1)⟨z,ν⟩/|z|²`.
//!
//! The crate is organised bottom-up:
//!
//! * [`curve`], [`geometry`], [`topology`], [`predicates`], [`residuals`],
//!   [`resample`] and [`near_origin`] describe one curve at one instant;
//! * [`flow`], [`singularity`], [`monitor`] and [`evolution`] integrate the
//!   flow and check what it is supposed to conserve;
//! * [`shrinker`] builds self-similarly contracting profiles by shooting.
//!
//! Batch work (sweeps, property suites, the all-pairs embeddedness test) goes
//! through [`exec`], which uses rayon when the `parallel` feature is on and
//! falls back to plain iterators otherwise.

pub mod curve;
pub mod diff;
pub mod error;
pub mod evolution;
pub mod exec;
pub mod flow;
pub mod geometry;
pub mod io;
pub mod monitor;
pub mod near_origin;
pub mod predicates;
pub mod resample;
pub mod residuals;
pub mod shrinker;
pub mod singularity;
pub mod topology;
pub mod vec2;

pub use curve::DiscreteCurve;
pub use error::{Error, Result};
pub use flow::{FlowConfig, FlowState, RunOutcome, StopReason, TrajectoryRecord};
pub use evolution::EvolutionResiduals;
pub use geometry::GeometryField;
pub use monitor::{InvariantReport, Property, Violation};
pub use predicates::{LagrangianEmbedding, Predicates};
pub use shrinker::{ClosedShrinker, ShrinkerSpec};
pub use singularity::{SingularityClass, SingularityReport};
pub use topology::TopologyInfo;
pub use vec2::Vec2;
