use alloc::collections::BTreeMap;
use alloc::vec::Vec;

use super::FaceId;
use crate::packets::Name;
use crate::SimTime;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct Downstream {
    pub face: FaceId,
    pub nonce: u64,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct Upstream {
    pub face: FaceId,
    pub nonce: u64,
    pub send_time: SimTime,
    /// A Nack came back on this face.
    pub nacked: bool,
}

#[derive(Debug, Clone, PartialEq)]
pub struct PitEntry {
    pub name: Name,
    /// Distinguishes this entry from earlier ones with the same name, so a
    /// stale expiry timer can be ignored.
    pub id: u64,
    /// FIB prefix whose strategy state handles this entry.
    pub fib_prefix: Name,
    pub lifetime_ms: u32,
    pub downstreams: Vec<Downstream>,
    pub upstreams: Vec<Upstream>,
    pub expiry: SimTime,
}

impl PitEntry {
    pub fn has_nonce(&self, nonce: u64) -> bool {
        self.downstreams.iter().any(|d| d.nonce == nonce) || self.upstreams.iter().any(|u| u.nonce == nonce)
    }

    /// Adds a downstream, or refreshes the nonce of an existing one on the
    /// same face.
    pub fn add_downstream(&mut self, face: FaceId, nonce: u64) {
        match self.downstreams.iter_mut().find(|d| d.face == face) {
            Some(d) => d.nonce = nonce,
            None => self.downstreams.push(Downstream { face, nonce }),
        }
    }

    pub fn upstream(&self, face: FaceId) -> Option<&Upstream> {
        self.upstreams.iter().rev().find(|u| u.face == face)
    }

    /// Faces that must not be used for (re-)forwarding.
    pub fn excluded_faces(&self) -> Vec<FaceId> {
        let mut v: Vec<FaceId> =
            self.downstreams.iter().map(|d| d.face).chain(self.upstreams.iter().map(|u| u.face)).collect();
        v.sort();
        v.dedup();
        v
    }
}

#[derive(Debug, Clone, Default)]
pub struct Pit {
    entries: BTreeMap<Name, PitEntry>,
    next_id: u64,
    peak: usize,
}

impl Pit {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn get(&self, name: &Name) -> Option<&PitEntry> {
        self.entries.get(name)
    }

    pub fn get_mut(&mut self, name: &Name) -> Option<&mut PitEntry> {
        self.entries.get_mut(name)
    }

    /// Creates an entry with one downstream and no upstreams.
    pub fn create(
        &mut self,
        name: Name,
        fib_prefix: Name,
        face: FaceId,
        nonce: u64,
        lifetime_ms: u32,
        expiry: SimTime,
    ) -> &mut PitEntry {
        self.next_id += 1;
        let entry = PitEntry {
            name: name.clone(),
            id: self.next_id,
            fib_prefix,
            lifetime_ms,
            downstreams: alloc::vec![Downstream { face, nonce }],
            upstreams: Vec::new(),
            expiry,
        };
        self.entries.insert(name.clone(), entry);
        self.peak = self.peak.max(self.entries.len());
        self.entries.get_mut(&name).expect("just inserted")
    }

    pub fn remove(&mut self, name: &Name) -> Option<PitEntry> {
        self.entries.remove(name)
    }

    pub fn len(&self) -> usize {
        self.entries.len()
    }

    pub fn is_empty(&self) -> bool {
        self.entries.is_empty()
    }

    /// Largest size reached so far.
    pub fn peak(&self) -> usize {
        self.peak
    }

    pub fn entries(&self) -> impl Iterator<Item = &PitEntry> {
        self.entries.values()
    }
}
