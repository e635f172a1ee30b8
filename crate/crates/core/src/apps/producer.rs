use alloc::collections::BTreeMap;
use alloc::rc::Rc;
use alloc::vec;
use alloc::vec::Vec;

use rand_chacha::ChaCha8Rng;
use rand_core::{RngCore, SeedableRng};

use super::{AppAction, AppCtx};
use crate::packets::{Data, Interest, Name};
use crate::torrent::{build_torrent, classify, BuiltTorrent, NameKind, TorrentError};
use crate::NodeId;

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct TorrentShape {
    pub name: Name,
    pub num_files: usize,
    pub packets_per_file: usize,
    pub packet_payload_bytes: usize,
}

impl TorrentShape {
    pub fn total_packets(&self) -> usize {
        self.num_files * self.packets_per_file
    }
}

/// Builds the torrent with pseudo-random file contents drawn from `seed`.
pub fn generate_torrent(shape: &TorrentShape, seed: u64, origin: NodeId) -> Result<BuiltTorrent, TorrentError> {
    if shape.num_files == 0 {
        return Err(TorrentError::NoFiles);
    }
    if shape.packet_payload_bytes == 0 {
        return Err(TorrentError::ZeroPayload);
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let files: Vec<Vec<u8>> = (0..shape.num_files)
        .map(|_| {
            let mut f = vec![0u8; shape.packets_per_file * shape.packet_payload_bytes];
            rng.fill_bytes(&mut f);
            f
        })
        .collect();
    build_torrent(&shape.name, &files, shape.packet_payload_bytes, origin)
}

/// A seeder holding a complete torrent.
#[derive(Debug, Clone)]
pub struct ProducerApp {
    torrent_name: Name,
    store: Rc<BTreeMap<Name, Data>>,
    answered: u64,
    unanswered: u64,
}

impl ProducerApp {
    pub fn new(torrent_name: Name, built: &BuiltTorrent) -> Self {
        let store = built.all_data().map(|d| (d.name.clone(), d.clone())).collect();
        Self::with_store(torrent_name, Rc::new(store))
    }

    /// Shares an already built store between seeders of the same torrent.
    pub fn with_store(torrent_name: Name, store: Rc<BTreeMap<Name, Data>>) -> Self {
        ProducerApp { torrent_name, store, answered: 0, unanswered: 0 }
    }

    pub fn torrent_name(&self) -> &Name {
        &self.torrent_name
    }

    pub fn store(&self) -> &BTreeMap<Name, Data> {
        &self.store
    }

    pub fn answered(&self) -> u64 {
        self.answered
    }

    pub fn unanswered(&self) -> u64 {
        self.unanswered
    }

    pub fn start(&mut self, ctx: &mut AppCtx<'_>) {
        ctx.push(AppAction::Announce(self.torrent_name.clone()));
    }

    /// Answers exact matches; anything else is left to expire.
    pub fn respond(&self, i: &Interest, me: NodeId) -> Option<Data> {
        match classify(&self.torrent_name, &i.name) {
            NameKind::Unknown => None,
            NameKind::TorrentFileSegment | NameKind::ManifestSegment | NameKind::DataPacket => {
                self.store.get(&i.name).map(|d| d.restamped(me))
            }
        }
    }

    pub fn on_interest(&mut self, ctx: &mut AppCtx<'_>, i: &Interest) {
        match self.respond(i, ctx.node) {
            Some(d) => {
                self.answered += 1;
                ctx.push(AppAction::SendData(d));
            }
            None => self.unanswered += 1,
        }
    }
}
