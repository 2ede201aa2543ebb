use std::collections::{BTreeMap, HashMap};

/// Fixed-capacity set of resident pages with least-recently-used replacement.
#[derive(Debug, Clone)]
pub struct PageCache {
    capacity: usize,
    clock: u64,
    stamp_of: HashMap<u64, u64>,
    by_stamp: BTreeMap<u64, u64>,
}

impl PageCache {
    pub fn new(capacity: usize) -> Self {
        PageCache {
            capacity,
            clock: 0,
            stamp_of: HashMap::new(),
            by_stamp: BTreeMap::new(),
        }
    }

    pub fn capacity(&self) -> usize {
        self.capacity
    }

    pub fn len(&self) -> usize {
        self.stamp_of.len()
    }

    pub fn is_empty(&self) -> bool {
        self.stamp_of.is_empty()
    }

    pub fn contains(&self, page: u64) -> bool {
        self.stamp_of.contains_key(&page)
    }

    /// Marks `page` most recently used. No-op if absent.
    pub fn touch(&mut self, page: u64) {
        if let Some(old) = self.stamp_of.get(&page).copied() {
            self.by_stamp.remove(&old);
            self.stamp(page);
        }
    }

    /// Inserts `page` as most recently used and returns the page displaced to
    /// stay within capacity, if any.
    pub fn insert(&mut self, page: u64) -> Option<u64> {
        if self.contains(page) {
            self.touch(page);
            return None;
        }
        let victim = if self.len() >= self.capacity {
            self.by_stamp.pop_first().map(|(_, victim)| {
                self.stamp_of.remove(&victim);
                victim
            })
        } else {
            None
        };
        self.stamp(page);
        victim
    }

    pub fn remove(&mut self, page: u64) -> bool {
        match self.stamp_of.remove(&page) {
            Some(stamp) => {
                self.by_stamp.remove(&stamp);
                true
            }
            None => false,
        }
    }

    /// Resident pages from least to most recently used.
    pub fn pages(&self) -> impl Iterator<Item = u64> + '_ {
        self.by_stamp.values().copied()
    }

    fn stamp(&mut self, page: u64) {
        self.clock += 1;
        self.stamp_of.insert(page, self.clock);
        self.by_stamp.insert(self.clock, page);
    }
}
