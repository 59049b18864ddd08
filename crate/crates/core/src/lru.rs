//! Chunk-level LRU: one fast-memory index entry per cached chunk, so the
//! number of cacheable chunks is bounded by the smaller of the two memories.

use std::collections::hash_map::DefaultHasher;
use std::collections::HashMap;
use std::fmt;
use std::hash::BuildHasherDefault;
use std::sync::Arc;

use crate::cache::{CachedRanks, ChunkCache, InsertOutcome, LookupResult, ObjectState};
use crate::chunk::{Chunk, ChunkId, MAX_RANK};
use crate::cost::{Cause, CostModel, Tier};
use crate::error::{Error, Result};
use crate::memory::Capacity;

const NIL: u32 = u32::MAX;

type FixedState = BuildHasherDefault<DefaultHasher>;

#[derive(Debug, Clone)]
struct Node {
    id: ChunkId,
    size_bytes: u32,
    payload: Option<Arc<[u8]>>,
    newer: u32,
    older: u32,
}

/// One line of the debug dump: `object,rank,lru_position`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct LruDumpRecord {
    pub id: ChunkId,
    pub lru_position: usize,
}

impl fmt::Display for LruDumpRecord {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{},{},{}", self.id.object, self.id.rank, self.lru_position)
    }
}

#[derive(Debug, Clone)]
pub struct LruChunkCache {
    capacity: Capacity,
    limit: usize,
    index: HashMap<ChunkId, u32, FixedState>,
    nodes: Vec<Option<Node>>,
    spare: Vec<u32>,
    head: u32,
    tail: u32,
    cost: CostModel,
}

impl LruChunkCache {
    /// The usable chunk count is `min(l1_slots, l2_slots)`.
    pub fn new(capacity: Capacity) -> Self {
        let limit = capacity.l1_slots.min(capacity.l2_slots);
        LruChunkCache {
            capacity: Capacity::new(capacity.l1_slots, limit),
            limit,
            index: HashMap::with_capacity_and_hasher(limit, FixedState::default()),
            nodes: vec![None; limit],
            spare: (0..limit as u32).rev().collect(),
            head: NIL,
            tail: NIL,
            cost: CostModel::new(),
        }
    }

    pub fn len(&self) -> usize {
        self.index.len()
    }

    pub fn is_empty(&self) -> bool {
        self.index.is_empty()
    }

    /// Cached chunks from most to least recently used.
    pub fn lru_order(&self) -> Vec<ChunkId> {
        let mut out = Vec::with_capacity(self.len());
        let mut n = self.head;
        while n != NIL {
            let node = self.node(n);
            out.push(node.id.clone());
            n = node.older;
        }
        out
    }

    pub fn dump(&self) -> Vec<LruDumpRecord> {
        self.lru_order()
            .into_iter()
            .enumerate()
            .map(|(lru_position, id)| LruDumpRecord { id, lru_position })
            .collect()
    }

    pub fn fetch(&mut self, id: &ChunkId) -> (LookupResult, Option<Chunk>) {
        let r = self.lookup(id);
        if !r.is_hit() {
            return (r, None);
        }
        let node = self.node(self.index[id]);
        let chunk = Chunk {
            id: node.id.clone(),
            size_bytes: node.size_bytes,
            payload: node.payload.clone(),
        };
        (r, Some(chunk))
    }

    fn node(&self, n: u32) -> &Node {
        self.nodes[n as usize].as_ref().expect("live node")
    }

    fn node_mut(&mut self, n: u32) -> &mut Node {
        self.nodes[n as usize].as_mut().expect("live node")
    }

    fn unlink(&mut self, n: u32) {
        let (newer, older) = {
            let node = self.node(n);
            (node.newer, node.older)
        };
        if newer == NIL {
            self.head = older;
        } else {
            self.node_mut(newer).older = older;
        }
        if older == NIL {
            self.tail = newer;
        } else {
            self.node_mut(older).newer = newer;
        }
    }

    fn push_front(&mut self, n: u32) {
        let old = self.head;
        {
            let node = self.node_mut(n);
            node.newer = NIL;
            node.older = old;
        }
        if old == NIL {
            self.tail = n;
        } else {
            self.node_mut(old).newer = n;
        }
        self.head = n;
    }

    fn evict_tail(&mut self) {
        let n = self.tail;
        self.unlink(n);
        let node = self.nodes[n as usize].take().unwrap();
        self.index.remove(&node.id);
        self.spare.push(n);
    }
}

impl ChunkCache for LruChunkCache {
    fn lookup(&mut self, id: &ChunkId) -> LookupResult {
        match self.index.get(id).copied() {
            Some(n) => {
                self.cost.record_access(Tier::Sram, Cause::Hit, 1);
                self.cost.record_access(Tier::Dram, Cause::Hit, 1);
                if self.head != n {
                    self.unlink(n);
                    self.push_front(n);
                }
                LookupResult::hit(1, 1)
            }
            None => {
                self.cost.record_access(Tier::Sram, Cause::MissLookup, 1);
                LookupResult::miss(1)
            }
        }
    }

    fn insert(&mut self, chunk: &Chunk) -> Result<InsertOutcome> {
        let rank = chunk.id.rank;
        if !(1..=MAX_RANK).contains(&rank) {
            return Err(Error::validation(format!("chunk rank {rank} out of range")));
        }
        if self.index.contains_key(&chunk.id) {
            return Ok(InsertOutcome::IgnoredDuplicate);
        }
        if self.limit == 0 {
            return Ok(InsertOutcome::IgnoredNoCapacity);
        }
        let evicted = if self.spare.is_empty() {
            self.evict_tail();
            true
        } else {
            false
        };
        let n = self.spare.pop().unwrap();
        self.nodes[n as usize] = Some(Node {
            id: chunk.id.clone(),
            size_bytes: chunk.size_bytes,
            payload: chunk.payload.clone(),
            newer: NIL,
            older: NIL,
        });
        self.index.insert(chunk.id.clone(), n);
        self.push_front(n);
        self.cost.record_access(Tier::Sram, Cause::Insert, 1);
        self.cost.record_access(Tier::Dram, Cause::Insert, 1);
        Ok(if evicted {
            InsertOutcome::StoredWithEviction
        } else {
            InsertOutcome::Stored
        })
    }

    fn contains(&self, id: &ChunkId) -> bool {
        self.index.contains_key(id)
    }

    fn cost(&self) -> &CostModel {
        &self.cost
    }

    fn capacity(&self) -> Capacity {
        self.capacity
    }

    fn occupied_slots(&self) -> usize {
        self.index.len()
    }

    fn contents(&self) -> Vec<ObjectState> {
        let mut ids: Vec<&ChunkId> = self.index.keys().collect();
        ids.sort();
        let mut out: Vec<ObjectState> = Vec::new();
        for id in ids {
            match out.last_mut() {
                Some(last) if last.object == id.object => {
                    if let CachedRanks::Ranks(r) = &mut last.ranks {
                        r.push(id.rank);
                    }
                }
                _ => out.push(ObjectState {
                    object: id.object.clone(),
                    ranks: CachedRanks::Ranks(vec![id.rank]),
                }),
            }
        }
        out
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::chunk::ObjectId;

    fn id(o: &str, r: u32) -> ChunkId {
        ChunkId::new(ObjectId::new(o).unwrap(), r).unwrap()
    }

    fn chunk(o: &str, r: u32) -> Chunk {
        Chunk::metadata(id(o, r), 1500)
    }

    #[test]
    fn hit_and_miss_charges() {
        let mut c = LruChunkCache::new(Capacity::new(4, 4));
        assert_eq!(c.lookup(&id("x", 1)), LookupResult::miss(1));
        c.insert(&chunk("x", 1)).unwrap();
        assert_eq!(c.lookup(&id("x", 1)), LookupResult::hit(1, 1));
        assert_eq!(c.lookup(&id("x", 2)), LookupResult::miss(1));
        let m = c.cost();
        assert_eq!(m.count(Tier::Sram, Cause::Insert), 1);
        assert_eq!(m.count(Tier::Dram, Cause::Insert), 1);
        assert_eq!(m.count(Tier::Dram, Cause::Hit), 1);
        assert_eq!(m.count(Tier::Sram, Cause::MissLookup), 2);
    }

    #[test]
    fn tail_eviction() {
        let mut c = LruChunkCache::new(Capacity::new(2, 2));
        assert_eq!(c.insert(&chunk("x", 1)).unwrap(), InsertOutcome::Stored);
        assert_eq!(c.insert(&chunk("x", 2)).unwrap(), InsertOutcome::Stored);
        assert_eq!(c.insert(&chunk("x", 3)).unwrap(), InsertOutcome::StoredWithEviction);
        assert!(!c.contains(&id("x", 1)));
        assert_eq!(c.lru_order(), vec![id("x", 3), id("x", 2)]);
    }

    #[test]
    fn duplicate_insert_is_noop() {
        let mut c = LruChunkCache::new(Capacity::new(3, 3));
        c.insert(&chunk("x", 1)).unwrap();
        c.insert(&chunk("x", 2)).unwrap();
        let cost = *c.cost();
        assert_eq!(c.insert(&chunk("x", 1)).unwrap(), InsertOutcome::IgnoredDuplicate);
        assert_eq!(c.lru_order(), vec![id("x", 2), id("x", 1)]);
        assert_eq!(*c.cost(), cost);
    }

    #[test]
    fn hit_promotes() {
        let mut c = LruChunkCache::new(Capacity::new(2, 2));
        c.insert(&chunk("x", 1)).unwrap();
        c.insert(&chunk("x", 2)).unwrap();
        c.lookup(&id("x", 1));
        c.insert(&chunk("x", 3)).unwrap();
        assert!(c.contains(&id("x", 1)));
        assert!(!c.contains(&id("x", 2)));
    }

    #[test]
    fn capacity_clamped_to_smaller_memory() {
        let c = LruChunkCache::new(Capacity::new(10, 1000));
        assert_eq!(c.capacity(), Capacity::new(10, 10));
        let c = LruChunkCache::new(Capacity::new(10, 3));
        assert_eq!(c.capacity().l2_slots, 3);
    }

    #[test]
    fn looped_replacement() {
        let (n, m) = (150u32, 100usize);
        let mut c = LruChunkCache::new(Capacity::new(m, m));
        let mut second_pass_hits = 0;
        for pass in 0..2 {
            for r in 1..=n {
                if c.lookup(&id("big", r)).is_hit() {
                    if pass == 1 {
                        second_pass_hits += 1;
                    }
                } else {
                    c.insert(&chunk("big", r)).unwrap();
                }
            }
        }
        assert_eq!(second_pass_hits, 0);
    }

    #[test]
    fn contents_and_dump() {
        let mut c = LruChunkCache::new(Capacity::new(8, 8));
        for (o, r) in [("b", 2), ("a", 1), ("b", 1)] {
            c.insert(&chunk(o, r)).unwrap();
        }
        let s = c.contents();
        assert_eq!(s.len(), 2);
        assert_eq!(s[0].ranks, CachedRanks::Ranks(vec![1]));
        assert_eq!(s[1].ranks, CachedRanks::Ranks(vec![1, 2]));
        let lines: Vec<String> = c.dump().iter().map(|d| d.to_string()).collect();
        assert_eq!(lines, vec!["b,1,0", "a,1,1", "b,2,2"]);
    }

    #[test]
    fn zero_capacity() {
        let mut c = LruChunkCache::new(Capacity::ZERO);
        assert_eq!(c.insert(&chunk("x", 1)).unwrap(), InsertOutcome::IgnoredNoCapacity);
        assert!(!c.lookup(&id("x", 1)).is_hit());
    }
}
