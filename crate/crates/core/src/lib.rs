//! Opinion dynamics on social graphs: DeGroot simulation, group-based
//! polarization metrics, and spectral predictions of their equilibrium values.

pub mod dynamics;
pub mod equilibrium;
pub mod error;
pub mod graph;
pub mod harness;
pub mod metrics;
pub mod seed;
pub mod spectral;

pub use dynamics::{DeviationDynamics, InitSpec, OpinionVector, Trajectory};
pub use error::{Error, Result};
pub use graph::{Graph, GraphKind, StructureReport};
pub use metrics::{Metric, MetricSeries, ProfileMatrix};
pub use spectral::{EigenOptions, SpectralSummary};
