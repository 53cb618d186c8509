//! Simulator for a socially-inspired semantic P2P overlay.
//!
//! Peers join with acquaintance links to random peers. Links are promoted
//! to temporary semantic links when queries pass through, and to full
//! semantic links when a peer answers. The crate measures whether the
//! resulting topology becomes a small world.
//!
//! Start with [`workload::run_experiment`] for a whole run, or drive the
//! pieces directly through [`overlay::OverlayNetwork`] and
//! [`routing::exec_query`]. The `examples/` directory has one runnable
//! program per capability.

pub mod cli;
pub mod config;
mod error;
pub mod knowledge;
pub mod metrics;
pub mod overlay;
pub mod routing;
pub mod workload;

pub use config::ExperimentConfig;
pub use error::{Error, Result};
pub use knowledge::{Document, TermVector};
pub use metrics::MetricsReport;
pub use overlay::{LabelKind, LinkLabel, OverlayNetwork, PeerId};
pub use routing::{exec_query, QueryMessage, QueryTrace, RoutingConfig, TraceEvent};
pub use workload::{run_experiment, sweep, Simulation};
