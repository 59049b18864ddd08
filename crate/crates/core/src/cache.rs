//! The behavioral contract shared by the chunk caches.

use std::fmt;

use crate::chunk::{Chunk, ChunkId, ObjectId};
use crate::cost::CostModel;
use crate::error::Result;
use crate::memory::Capacity;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Outcome {
    Hit,
    Miss,
}

/// Result of a chunk lookup together with the accesses it was charged.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct LookupResult {
    pub outcome: Outcome,
    pub sram_accesses: u64,
    pub dram_accesses: u64,
}

impl LookupResult {
    pub fn hit(sram_accesses: u64, dram_accesses: u64) -> Self {
        LookupResult {
            outcome: Outcome::Hit,
            sram_accesses,
            dram_accesses,
        }
    }

    pub fn miss(sram_accesses: u64) -> Self {
        LookupResult {
            outcome: Outcome::Miss,
            sram_accesses,
            dram_accesses: 0,
        }
    }

    pub fn is_hit(&self) -> bool {
        self.outcome == Outcome::Hit
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum InsertOutcome {
    /// First chunk of an object not previously indexed.
    StoredNew,
    /// Next-in-sequence chunk of an indexed object.
    StoredAppend,
    /// Chunk-level cache stored into a free slot.
    Stored,
    /// Chunk-level cache stored after evicting its LRU tail.
    StoredWithEviction,
    IgnoredOutOfSequence,
    IgnoredDuplicate,
    /// The only possible chunk donor was the inserting object itself.
    IgnoredSelfVictim,
    /// Fixed-partition allocator: the object's region is full.
    IgnoredOutOfSpace,
    /// The cache has no fast or slow slots at all.
    IgnoredNoCapacity,
}

impl InsertOutcome {
    pub fn is_stored(self) -> bool {
        matches!(
            self,
            InsertOutcome::StoredNew
                | InsertOutcome::StoredAppend
                | InsertOutcome::Stored
                | InsertOutcome::StoredWithEviction
        )
    }
}

/// Which ranks of an object a cache currently holds.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum CachedRanks {
    /// Ranks `1..=n` with no gaps.
    Prefix(u32),
    /// Arbitrary ranks, ascending.
    Ranks(Vec<u32>),
}

impl CachedRanks {
    pub fn count(&self) -> usize {
        match self {
            CachedRanks::Prefix(n) => *n as usize,
            CachedRanks::Ranks(r) => r.len(),
        }
    }

    pub fn contains(&self, rank: u32) -> bool {
        match self {
            CachedRanks::Prefix(n) => rank >= 1 && rank <= *n,
            CachedRanks::Ranks(r) => r.binary_search(&rank).is_ok(),
        }
    }

    pub fn iter(&self) -> Box<dyn Iterator<Item = u32> + '_> {
        match self {
            CachedRanks::Prefix(n) => Box::new(1..=*n),
            CachedRanks::Ranks(r) => Box::new(r.iter().copied()),
        }
    }
}

impl fmt::Display for CachedRanks {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            CachedRanks::Prefix(n) => write!(f, "{n}"),
            CachedRanks::Ranks(r) => {
                for (i, rank) in r.iter().enumerate() {
                    if i > 0 {
                        f.write_str(";")?;
                    }
                    write!(f, "{rank}")?;
                }
                Ok(())
            }
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ObjectState {
    pub object: ObjectId,
    pub ranks: CachedRanks,
}

pub trait ChunkCache {
    /// Look a chunk up, charging the cost model and updating recency on hits.
    fn lookup(&mut self, id: &ChunkId) -> LookupResult;

    fn insert(&mut self, chunk: &Chunk) -> Result<InsertOutcome>;

    /// Side-effect free membership test. Not charged.
    fn contains(&self, id: &ChunkId) -> bool;

    fn cost(&self) -> &CostModel;

    fn capacity(&self) -> Capacity;

    fn occupied_slots(&self) -> usize;

    /// Cached objects, ordered by object name.
    fn contents(&self) -> Vec<ObjectState>;
}
