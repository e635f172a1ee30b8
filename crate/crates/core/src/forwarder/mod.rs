//! Per-node forwarding daemon.
//!
//! A [`Forwarder`] owns the node's FIB, PIT, content store and strategy
//! instance. Each pipeline method consumes one incoming packet and returns
//! the resulting [`Output`]s; it never schedules anything itself.

mod cs;
mod fib;
mod pit;

use alloc::vec::Vec;
use core::fmt;

pub use cs::ContentStore;
pub use fib::{Fib, FibEntry, NextHop};
pub use pit::{Downstream, Pit, PitEntry, Upstream};

use crate::packets::{Data, Interest, Nack, NackReason, Name, Packet};
use crate::strategy::{AdaptiveStrategy, Choice, FailureKind, StrategyConfig, SwitchDecision};
use crate::{LinkId, NodeId, SimTime};

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Default)]
pub struct FaceId(pub u32);

impl fmt::Display for FaceId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "f{}", self.0)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum FaceKind {
    Link { link: LinkId, neighbor: NodeId },
    App,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct Face {
    pub id: FaceId,
    pub kind: FaceKind,
}

#[derive(Debug, Clone, PartialEq)]
pub enum Output {
    Send { face: FaceId, packet: Packet },
    ArmPitTimer { name: Name, id: u64, at: SimTime },
}

#[derive(Debug, Clone, Copy, Default, PartialEq, Eq)]
pub struct Counters {
    pub interests_in: u64,
    pub interests_out: u64,
    pub data_in: u64,
    pub data_out: u64,
    pub nacks_in: u64,
    pub nacks_out: u64,
    pub cs_hits: u64,
    pub cs_inserts: u64,
    pub pit_timeouts: u64,
    pub aggregated: u64,
    /// Duplicate-nonce Interests, unsolicited Data and unmatched Nacks.
    pub drops: u64,
    pub unsolicited_data: u64,
    pub pit_peak: u64,
}

#[derive(Debug, Clone)]
pub struct Forwarder {
    node: NodeId,
    faces: Vec<Face>,
    pub fib: Fib,
    pit: Pit,
    cs: ContentStore,
    strategy: AdaptiveStrategy,
    counters: Counters,
    switches: Vec<(SimTime, Name, SwitchDecision)>,
}

impl Forwarder {
    pub fn new(node: NodeId, faces: Vec<Face>, cs: ContentStore, strategy: StrategyConfig) -> Self {
        Forwarder {
            node,
            faces,
            fib: Fib::new(),
            pit: Pit::new(),
            cs,
            strategy: AdaptiveStrategy::new(strategy),
            counters: Counters::default(),
            switches: Vec::new(),
        }
    }

    pub fn node(&self) -> NodeId {
        self.node
    }

    pub fn faces(&self) -> &[Face] {
        &self.faces
    }

    pub fn face(&self, id: FaceId) -> Option<&Face> {
        self.faces.get(id.0 as usize)
    }

    pub fn app_face(&self) -> Option<FaceId> {
        self.faces.iter().find(|f| f.kind == FaceKind::App).map(|f| f.id)
    }

    pub fn pit(&self) -> &Pit {
        &self.pit
    }

    pub fn cs(&self) -> &ContentStore {
        &self.cs
    }

    pub fn strategy(&self) -> &AdaptiveStrategy {
        &self.strategy
    }

    pub fn counters(&self) -> Counters {
        Counters { pit_peak: self.pit.peak() as u64, ..self.counters }
    }

    /// Forwarding switches made by the strategy, in order.
    pub fn switch_log(&self) -> &[(SimTime, Name, SwitchDecision)] {
        &self.switches
    }

    fn record_switch(&mut self, now: SimTime, prefix: &Name, d: Option<SwitchDecision>) {
        if let Some(d) = d {
            self.switches.push((now, prefix.clone(), d));
        }
    }

    fn send(&mut self, out: &mut Vec<Output>, face: FaceId, packet: Packet) {
        match &packet {
            Packet::Interest(_) => self.counters.interests_out += 1,
            Packet::Data(_) => self.counters.data_out += 1,
            Packet::Nack(_) => self.counters.nacks_out += 1,
        }
        out.push(Output::Send { face, packet });
    }

    fn nack(&mut self, out: &mut Vec<Output>, face: FaceId, name: &Name, nonce: u64, reason: NackReason) {
        let n = Nack { name: name.clone(), nonce, reason };
        self.send(out, face, n.into());
    }

    pub fn on_interest(&mut self, face_in: FaceId, i: Interest, now: SimTime) -> Vec<Output> {
        self.counters.interests_in += 1;
        let mut out = Vec::new();

        if let Some(e) = self.pit.get(&i.name) {
            if e.has_nonce(i.nonce) {
                self.counters.drops += 1;
                return out;
            }
        }

        if let Some(d) = self.cs.lookup(&i.name) {
            self.counters.cs_hits += 1;
            let served = d.restamped(self.node);
            self.send(&mut out, face_in, served.into());
            return out;
        }

        if let Some(e) = self.pit.get_mut(&i.name) {
            e.add_downstream(face_in, i.nonce);
            self.counters.aggregated += 1;
            return out;
        }

        let Some(entry) = self.fib.lookup(&i.name).cloned() else {
            self.nack(&mut out, face_in, &i.name, i.nonce, NackReason::NoRoute);
            return out;
        };
        let Choice::Forward { face, .. } = self.strategy.choose_face(&entry, &[face_in]) else {
            self.nack(&mut out, face_in, &i.name, i.nonce, NackReason::Exhausted);
            return out;
        };

        let expiry = now + SimTime::from_millis(u64::from(i.lifetime_ms));
        let e = self.pit.create(i.name.clone(), entry.prefix.clone(), face_in, i.nonce, i.lifetime_ms, expiry);
        e.upstreams.push(Upstream { face, nonce: i.nonce, send_time: now, nacked: false });
        let id = e.id;
        out.push(Output::ArmPitTimer { name: i.name.clone(), id, at: expiry });
        self.send(&mut out, face, i.into());
        out
    }

    pub fn on_data(&mut self, face_in: FaceId, d: Data, now: SimTime) -> Vec<Output> {
        self.counters.data_in += 1;
        let mut out = Vec::new();
        let Some(entry) = self.pit.remove(&d.name) else {
            self.counters.unsolicited_data += 1;
            self.counters.drops += 1;
            return out;
        };
        if let Some(up) = entry.upstream(face_in) {
            if let Some(fib) = self.fib.get(&entry.fib_prefix).cloned() {
                let rtt = now.saturating_sub(up.send_time).as_millis_f64();
                let sw = self.strategy.on_data(&fib, face_in, rtt);
                self.record_switch(now, &fib.prefix, sw);
            }
        }
        if self.cs.insert(d.clone()) {
            self.counters.cs_inserts += 1;
        }
        for ds in &entry.downstreams {
            if ds.face != face_in {
                self.send(&mut out, ds.face, d.clone().into());
            }
        }
        out
    }

    pub fn on_nack(&mut self, face_in: FaceId, n: Nack, now: SimTime) -> Vec<Output> {
        self.counters.nacks_in += 1;
        self.handle_nack(face_in, n, now)
    }

    /// An Interest sent on `face` was dropped by the local link queue. It is
    /// handled like a congestion Nack received on that face.
    pub fn on_local_drop(&mut self, face: FaceId, i: &Interest, now: SimTime) -> Vec<Output> {
        let n = Nack { name: i.name.clone(), nonce: i.nonce, reason: NackReason::Congestion };
        self.handle_nack(face, n, now)
    }

    fn handle_nack(&mut self, face_in: FaceId, n: Nack, now: SimTime) -> Vec<Output> {
        let mut out = Vec::new();
        let matched = self
            .pit
            .get(&n.name)
            .is_some_and(|e| e.upstreams.iter().any(|u| u.face == face_in && u.nonce == n.nonce && !u.nacked));
        if !matched {
            self.counters.drops += 1;
            return out;
        }
        let e = self.pit.get_mut(&n.name).expect("matched");
        for u in e.upstreams.iter_mut().filter(|u| u.face == face_in) {
            u.nacked = true;
        }
        let prefix = e.fib_prefix.clone();
        let excluded = e.excluded_faces();
        let lifetime_ms = e.lifetime_ms;

        let Some(fib) = self.fib.get(&prefix).cloned() else {
            return self.exhaust(&n.name);
        };
        let sw = self.strategy.on_failure(&fib, face_in, FailureKind::Nack);
        self.record_switch(now, &prefix, sw);

        match self.strategy.choose_face(&fib, &excluded) {
            Choice::Forward { face, .. } => {
                let e = self.pit.get_mut(&n.name).expect("matched");
                e.upstreams.push(Upstream { face, nonce: n.nonce, send_time: now, nacked: false });
                let i = Interest::new(n.name, n.nonce, lifetime_ms);
                self.send(&mut out, face, i.into());
                out
            }
            Choice::Exhausted => self.exhaust(&n.name),
        }
    }

    fn exhaust(&mut self, name: &Name) -> Vec<Output> {
        let mut out = Vec::new();
        if let Some(e) = self.pit.remove(name) {
            for ds in &e.downstreams {
                self.nack(&mut out, ds.face, name, ds.nonce, NackReason::Exhausted);
            }
        }
        out
    }

    /// Expires the entry created with `id`. A timer whose entry is already
    /// gone (or was replaced) is ignored.
    pub fn on_pit_timeout(&mut self, name: &Name, id: u64, now: SimTime) -> Vec<Output> {
        if self.pit.get(name).is_none_or(|e| e.id != id) {
            return Vec::new();
        }
        let e = self.pit.remove(name).expect("checked");
        self.counters.pit_timeouts += 1;
        if let Some(fib) = self.fib.get(&e.fib_prefix).cloned() {
            for u in e.upstreams.iter().filter(|u| !u.nacked) {
                let sw = self.strategy.on_failure(&fib, u.face, FailureKind::Timeout);
                self.record_switch(now, &fib.prefix, sw);
            }
        }
        Vec::new()
    }
}
