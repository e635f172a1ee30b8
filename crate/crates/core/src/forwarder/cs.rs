use alloc::collections::BTreeMap;

use crate::packets::{Data, Name};

/// Exact-name content store with least-recently-used eviction.
#[derive(Debug, Clone)]
pub struct ContentStore {
    capacity: usize,
    enabled: bool,
    entries: BTreeMap<Name, (Data, u64)>,
    order: BTreeMap<u64, Name>,
    tick: u64,
}

impl ContentStore {
    pub fn new(capacity: usize, enabled: bool) -> Self {
        ContentStore { capacity, enabled, entries: BTreeMap::new(), order: BTreeMap::new(), tick: 0 }
    }

    pub fn disabled() -> Self {
        Self::new(0, false)
    }

    pub fn enabled(&self) -> bool {
        self.enabled && self.capacity > 0
    }

    pub fn capacity(&self) -> usize {
        self.capacity
    }

    pub fn len(&self) -> usize {
        self.entries.len()
    }

    pub fn is_empty(&self) -> bool {
        self.entries.is_empty()
    }

    pub fn contains(&self, name: &Name) -> bool {
        self.entries.contains_key(name)
    }

    fn touch(&mut self, name: &Name) {
        self.tick += 1;
        if let Some((_, t)) = self.entries.get_mut(name) {
            self.order.remove(t);
            *t = self.tick;
            self.order.insert(self.tick, name.clone());
        }
    }

    /// Looks up `name`, refreshing its recency on a hit.
    pub fn lookup(&mut self, name: &Name) -> Option<Data> {
        if !self.enabled() || !self.entries.contains_key(name) {
            return None;
        }
        self.touch(name);
        self.entries.get(name).map(|(d, _)| d.clone())
    }

    /// Stores `data`, evicting the least-recently-used entry when full.
    /// Returns whether anything was stored.
    pub fn insert(&mut self, data: Data) -> bool {
        if !self.enabled() {
            return false;
        }
        if self.entries.contains_key(&data.name) {
            let name = data.name.clone();
            self.entries.get_mut(&name).expect("present").0 = data;
            self.touch(&name);
            return true;
        }
        if self.entries.len() >= self.capacity {
            if let Some((_, victim)) = self.order.pop_first() {
                self.entries.remove(&victim);
            }
        }
        self.tick += 1;
        self.order.insert(self.tick, data.name.clone());
        self.entries.insert(data.name.clone(), (data, self.tick));
        true
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::NodeId;
    use alloc::vec;

    fn d(uri: &str) -> Data {
        Data::new(Name::from_uri(uri).unwrap(), vec![1], NodeId(0))
    }

    #[test]
    fn capacity_one_evicts_previous() {
        let mut cs = ContentStore::new(1, true);
        cs.insert(d("/a"));
        cs.insert(d("/b"));
        assert_eq!(cs.len(), 1);
        assert!(cs.lookup(&d("/a").name).is_none());
        assert!(cs.lookup(&d("/b").name).is_some());
    }

    #[test]
    fn lookup_refreshes_recency() {
        let mut cs = ContentStore::new(2, true);
        cs.insert(d("/a"));
        cs.insert(d("/b"));
        cs.lookup(&d("/a").name);
        cs.insert(d("/c"));
        assert!(cs.contains(&d("/a").name));
        assert!(!cs.contains(&d("/b").name));
    }

    #[test]
    fn disabled_store_never_hits() {
        let mut cs = ContentStore::new(10, false);
        assert!(!cs.insert(d("/a")));
        assert!(cs.lookup(&d("/a").name).is_none());
        let mut zero = ContentStore::new(0, true);
        assert!(!zero.insert(d("/a")));
    }

    #[test]
    fn reinsert_does_not_grow() {
        let mut cs = ContentStore::new(2, true);
        cs.insert(d("/a"));
        cs.insert(d("/a"));
        assert_eq!(cs.len(), 1);
    }
}
