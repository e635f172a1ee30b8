//! The nTorrent base library: catalogs, download tracking, statistics and
//! Interest pacing.

mod catalog;
mod manager;
mod pacing;
mod stats;

pub use catalog::*;
pub use manager::TorrentManager;
pub use pacing::InterestQueue;
pub use stats::{StatsError, StatsSummary, StatsTable};
