//! nTorrent applications attached to a node's App face.
//!
//! Apps are driven by callbacks and describe their effects as a list of
//! [`AppAction`]s collected in an [`AppCtx`]; the network engine executes
//! them.

mod consumer;
mod producer;

use alloc::vec::Vec;

pub use consumer::{AbortReason, ConsumerApp, ConsumerConfig, DataArrival, Phase};
pub use producer::{generate_torrent, ProducerApp, TorrentShape};

use crate::packets::{Data, Interest, Nack, Name};
use crate::{NodeId, SimTime};

#[derive(Debug, Clone, PartialEq)]
pub enum AppAction {
    SendInterest(Interest),
    SendData(Data),
    SetTimer {
        at: SimTime,
        token: u64,
    },
    /// Ask routing to install FIB entries toward this node for the prefix.
    Announce(Name),
    Finished,
    Aborted(AbortReason),
}

/// Per-callback context handed to an app.
pub struct AppCtx<'a> {
    pub now: SimTime,
    pub node: NodeId,
    nonces: &'a mut u64,
    pub actions: Vec<AppAction>,
}

impl<'a> AppCtx<'a> {
    pub fn new(now: SimTime, node: NodeId, nonces: &'a mut u64) -> Self {
        AppCtx { now, node, nonces, actions: Vec::new() }
    }

    /// A nonce never handed out before by the same counter.
    pub fn next_nonce(&mut self) -> u64 {
        *self.nonces += 1;
        *self.nonces
    }

    pub fn push(&mut self, a: AppAction) {
        self.actions.push(a);
    }
}

#[derive(Debug, Clone)]
#[allow(clippy::large_enum_variant)]
pub enum App {
    Producer(ProducerApp),
    Consumer(ConsumerApp),
}

impl App {
    pub fn start(&mut self, ctx: &mut AppCtx<'_>) {
        match self {
            App::Producer(p) => p.start(ctx),
            App::Consumer(c) => c.start(ctx),
        }
    }

    pub fn on_interest(&mut self, ctx: &mut AppCtx<'_>, i: &Interest) {
        match self {
            App::Producer(p) => p.on_interest(ctx, i),
            App::Consumer(c) => c.on_interest(ctx, i),
        }
    }

    pub fn on_data(&mut self, ctx: &mut AppCtx<'_>, d: Data) {
        if let App::Consumer(c) = self {
            c.on_data(ctx, d);
        }
    }

    pub fn on_nack(&mut self, ctx: &mut AppCtx<'_>, n: &Nack) {
        if let App::Consumer(c) = self {
            c.on_nack(ctx, n);
        }
    }

    pub fn on_timer(&mut self, ctx: &mut AppCtx<'_>, token: u64) {
        if let App::Consumer(c) = self {
            c.on_timer(ctx, token);
        }
    }

    pub fn as_consumer(&self) -> Option<&ConsumerApp> {
        match self {
            App::Consumer(c) => Some(c),
            App::Producer(_) => None,
        }
    }

    pub fn as_producer(&self) -> Option<&ProducerApp> {
        match self {
            App::Producer(p) => Some(p),
            App::Consumer(_) => None,
        }
    }
}
