//! Discrete-event network simulation: scheduler, links, topology, static
//! name-based routing and the engine that connects nodes.

mod link;
pub mod metrics;
mod network;
mod routing;
mod scheduler;
mod topology;

pub use link::{tx_time, LinkDir, LinkDirStats, Transmission, TxError};
pub use metrics::{max_window_rate, provenance_between, LinkEvent, PacketKind, StrategySample, UtilSample};
pub use network::{AppKind, AppSpec, Network, NetworkConfig, NetworkError, RunSummary};
pub use routing::{announcement_routes, distances_to, RouteUpdate, UnknownNode};
pub use scheduler::{Scheduler, SchedulingInPast};
pub use topology::{Dir, LinkSpec, NodeRole, NodeSpec, Topology, TopologyError};
