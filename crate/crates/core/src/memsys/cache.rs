use super::CacheConfig;

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Lookup {
    Hit,
    /// `evicted_dirty` carries the line address of a dirty victim.
    Miss { evicted_dirty: Option<u64> },
}

#[derive(Clone, Copy, Debug)]
struct Entry {
    line: u64,
    dirty: bool,
    stamp: u64,
}

/// Set-associative LRU tag store indexed by line address.
#[derive(Clone, Debug)]
pub struct Cache {
    sets: Vec<Vec<Entry>>,
    ways: usize,
    clock: u64,
}

impl Cache {
    pub fn new(config: &CacheConfig) -> Self {
        Self { sets: vec![Vec::with_capacity(config.ways); config.sets()], ways: config.ways, clock: 0 }
    }

    fn set_of(&self, line: u64) -> usize {
        (line % self.sets.len() as u64) as usize
    }

    pub fn probe(&self, line: u64) -> bool {
        self.sets[self.set_of(line)].iter().any(|e| e.line == line)
    }

    pub fn access(&mut self, line: u64, write: bool, allocate: bool) -> Lookup {
        self.clock += 1;
        let clock = self.clock;
        let ways = self.ways;
        let idx = self.set_of(line);
        let set = &mut self.sets[idx];
        if let Some(e) = set.iter_mut().find(|e| e.line == line) {
            e.stamp = clock;
            e.dirty |= write;
            return Lookup::Hit;
        }
        if !allocate {
            return Lookup::Miss { evicted_dirty: None };
        }
        let mut evicted_dirty = None;
        if set.len() == ways {
            let (victim, _) = set.iter().enumerate().min_by_key(|(_, e)| e.stamp).expect("full set");
            let old = set.swap_remove(victim);
            if old.dirty {
                evicted_dirty = Some(old.line);
            }
        }
        set.push(Entry { line, dirty: write, stamp: clock });
        Lookup::Miss { evicted_dirty }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn lru_victim() {
        let cfg = CacheConfig { size_bytes: 2 * 64, line_bytes: 64, ways: 2, banks: 1, hit_latency: 1 };
        let mut c = Cache::new(&cfg);
        assert_eq!(cfg.sets(), 1);
        c.access(1, false, true);
        c.access(2, true, true);
        assert_eq!(c.access(1, false, true), Lookup::Hit);
        // 2 is least recent and dirty
        assert_eq!(c.access(3, false, true), Lookup::Miss { evicted_dirty: Some(2) });
        assert!(c.probe(1) && c.probe(3) && !c.probe(2));
    }
}
