//! Deterministic discrete-event simulation of nTorrent peer-to-peer file
//! sharing over Named Data Networking.
//!
//! The crate is `no_std` (it needs `alloc`) and performs no IO. Scenario
//! files, CSV output and the command-line driver live in the `ntsim` crate.
//!
//! Layout:
//! - [`packets`]: names, Interest/Data/Nack and their wire framing.
//! - [`torrent`]: torrent-file and manifest catalogs, download tracking,
//!   statistics and Interest pacing.
//! - [`forwarder`]: per-node FIB, PIT and content store with the
//!   Interest/Data/Nack pipelines.
//! - [`strategy`]: the adaptive multipath forwarding strategy.
//! - [`sim`]: event scheduler, links, topology, routing and the network
//!   engine that ties nodes together.
//! - [`apps`]: producer (seeder) and consumer (leecher) applications.
#![no_std]
#![forbid(unsafe_code)]

extern crate alloc;

#[cfg(test)]
extern crate std;

pub mod apps;
pub mod forwarder;
pub mod packets;
pub mod sim;
pub mod strategy;
pub mod torrent;

mod time;

pub use packets::{Data, Interest, Nack, NackReason, Name, Packet};
pub use time::SimTime;

/// Identifier of a simulated node, dense from zero in topology order.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Default)]
pub struct NodeId(pub u32);

impl core::fmt::Display for NodeId {
    fn fmt(&self, f: &mut core::fmt::Formatter<'_>) -> core::fmt::Result {
        write!(f, "n{}", self.0)
    }
}

/// Identifier of a point-to-point link, dense from zero in topology order.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Default)]
pub struct LinkId(pub u32);

impl core::fmt::Display for LinkId {
    fn fmt(&self, f: &mut core::fmt::Formatter<'_>) -> core::fmt::Result {
        write!(f, "l{}", self.0)
    }
}
