use alloc::collections::BTreeMap;
use alloc::vec;
use alloc::vec::Vec;

use crate::packets::{Data, Name};

/// Tracks which catalog packets a peer holds and which to fetch next.
#[derive(Debug, Clone)]
pub struct TorrentManager {
    catalog: Vec<Name>,
    index: BTreeMap<Name, usize>,
    have: Vec<bool>,
    have_count: usize,
    cursor: usize,
    verification_failures: u64,
}

impl TorrentManager {
    pub fn new(catalog: Vec<Name>) -> Self {
        let index = catalog.iter().enumerate().map(|(i, n)| (n.clone(), i)).collect();
        let have = vec![false; catalog.len()];
        TorrentManager { catalog, index, have, have_count: 0, cursor: 0, verification_failures: 0 }
    }

    pub fn catalog(&self) -> &[Name] {
        &self.catalog
    }

    /// First catalog entry not yet received, in catalog order.
    pub fn next_missing(&self) -> Option<&Name> {
        self.catalog.get(self.cursor)
    }

    pub fn cursor(&self) -> usize {
        self.cursor
    }

    pub fn index_of(&self, name: &Name) -> Option<usize> {
        self.index.get(name).copied()
    }

    pub fn has(&self, name: &Name) -> bool {
        self.index_of(name).is_some_and(|i| self.have[i])
    }

    pub fn has_index(&self, i: usize) -> bool {
        self.have.get(i).copied().unwrap_or(false)
    }

    /// Records `d` if it is a catalog packet not yet held and its signature
    /// verifies. Returns whether it was new and valid.
    pub fn record_received(&mut self, d: &Data) -> bool {
        let Some(i) = self.index_of(&d.name) else {
            return false;
        };
        if self.have[i] {
            return false;
        }
        if !d.verify() {
            self.verification_failures += 1;
            return false;
        }
        self.have[i] = true;
        self.have_count += 1;
        while self.cursor < self.have.len() && self.have[self.cursor] {
            self.cursor += 1;
        }
        true
    }

    pub fn received(&self) -> usize {
        self.have_count
    }

    pub fn is_complete(&self) -> bool {
        self.have_count == self.catalog.len()
    }

    pub fn verification_failures(&self) -> u64 {
        self.verification_failures
    }
}
