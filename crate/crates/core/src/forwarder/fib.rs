use alloc::collections::BTreeMap;
use alloc::vec::Vec;

use super::FaceId;
use crate::packets::Name;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct NextHop {
    pub face: FaceId,
    /// Path delay estimate toward the data, in milliseconds.
    pub cost_ms: f64,
}

/// A prefix with its candidate upstream faces, kept sorted by
/// `(cost_ms, face)`.
#[derive(Debug, Clone, PartialEq)]
pub struct FibEntry {
    pub prefix: Name,
    pub nexthops: Vec<NextHop>,
}

impl FibEntry {
    pub fn cost_of(&self, face: FaceId) -> Option<f64> {
        self.nexthops.iter().find(|h| h.face == face).map(|h| h.cost_ms)
    }

    pub fn contains(&self, face: FaceId) -> bool {
        self.nexthops.iter().any(|h| h.face == face)
    }
}

/// Forwarding information base with longest-prefix-match lookup.
#[derive(Debug, Clone, Default)]
pub struct Fib {
    entries: BTreeMap<Name, FibEntry>,
}

impl Fib {
    pub fn new() -> Self {
        Self::default()
    }

    /// Adds `face` as a nexthop for `prefix`, or updates its cost.
    pub fn insert(&mut self, prefix: &Name, face: FaceId, cost_ms: f64) {
        let entry = self
            .entries
            .entry(prefix.clone())
            .or_insert_with(|| FibEntry { prefix: prefix.clone(), nexthops: Vec::new() });
        match entry.nexthops.iter_mut().find(|h| h.face == face) {
            Some(h) => h.cost_ms = cost_ms,
            None => entry.nexthops.push(NextHop { face, cost_ms }),
        }
        entry.nexthops.sort_by(|a, b| a.cost_ms.total_cmp(&b.cost_ms).then(a.face.cmp(&b.face)));
    }

    pub fn lookup(&self, name: &Name) -> Option<&FibEntry> {
        (0..=name.len()).rev().find_map(|k| self.entries.get(&name.prefix(k)))
    }

    pub fn get(&self, prefix: &Name) -> Option<&FibEntry> {
        self.entries.get(prefix)
    }

    pub fn entries(&self) -> impl Iterator<Item = &FibEntry> {
        self.entries.values()
    }

    pub fn len(&self) -> usize {
        self.entries.len()
    }

    pub fn is_empty(&self) -> bool {
        self.entries.is_empty()
    }
}
