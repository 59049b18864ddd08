//! Object-oriented packet cache.
//!
//! Two levels:
//!
//! * **L1** lives in fast memory: a fixed-capacity hash table with one entry
//!   per (partially) cached object, holding the object's `last_chunk_id` (the
//!   number of contiguously cached chunks, starting at rank 1) and a pointer to
//!   the slot holding that last chunk.
//! * **L2** lives in slow memory: an array of MSS-sized slots. In the default
//!   [`AllocatorMode::DynamicLinked`] mode every slot carries a back-link to
//!   the slot of the previous chunk of the same object, so each object is a
//!   singly-linked list headed by its last chunk. Free slots are chained
//!   through the same back-link field.
//!
//! Replacement works on whole objects: an object-level LRU list orders the L1
//! entries and an object moves to the head only when one of its chunks is
//! hit. A chunk is admitted only if it is rank 1 of an unindexed object or the
//! next rank after `last_chunk_id`, so an object is always cached as a gap-free
//! prefix. When L2 runs out of slots, the last chunk of the tail object is
//! stolen; when L1 runs out of entries, the tail object is evicted with all of
//! its chunks.

mod index;
mod integrity;

use std::fmt;
use std::sync::Arc;

use serde::{Deserialize, Serialize};

use crate::cache::{CachedRanks, ChunkCache, InsertOutcome, LookupResult, ObjectState};
use crate::chunk::{Chunk, ChunkId, ObjectId, MAX_RANK};
use crate::cost::{Cause, CostModel, Tier};
use crate::error::{Error, Result};
use crate::memory::Capacity;

use index::ObjectIndex;
pub use integrity::{IntegrityReport, Violation};

const NIL: u32 = u32::MAX;

/// Position in the L2 slot array.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct SlotIndex(pub u32);

/// How slow memory is handed out to objects.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum AllocatorMode {
    /// Per-object linked lists plus a global free list.
    #[default]
    DynamicLinked,
    /// Equal fixed-size regions of `l2_slots / l1_slots` slots per entry.
    FixedContiguous,
}

/// Where a newly indexed object enters the object LRU list.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum NewObjectPlacement {
    #[default]
    Head,
    Tail,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct OpcOptions {
    #[serde(default)]
    pub allocator: AllocatorMode,
    #[serde(default)]
    pub new_object_placement: NewObjectPlacement,
}

/// There was no object that could give up a chunk or be evicted.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct NoVictim;

impl fmt::Display for NoVictim {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str("no eligible eviction victim")
    }
}

#[derive(Debug, Clone)]
struct L1Entry {
    object: ObjectId,
    last_chunk_id: u32,
    tail_slot: u32,
    // object LRU links; `newer` points toward the head
    newer: u32,
    older: u32,
}

#[derive(Debug, Clone)]
struct StoredChunk {
    id: ChunkId,
    size_bytes: u32,
    payload: Option<Arc<[u8]>>,
}

#[derive(Debug, Clone)]
struct Slot {
    chunk: Option<StoredChunk>,
    /// Previous chunk of the same object, or the next free slot.
    prev: u32,
}

/// One line of the debug dump: `object,last_chunk_id,lru_position`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct DumpRecord {
    pub object: ObjectId,
    pub last_chunk_id: u32,
    /// 0 is the LRU head (most valuable).
    pub lru_position: usize,
}

impl fmt::Display for DumpRecord {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{},{},{}", self.object, self.last_chunk_id, self.lru_position)
    }
}

#[derive(Debug, Clone)]
pub struct OpcCache {
    capacity: Capacity,
    options: OpcOptions,
    index: ObjectIndex,
    entries: Vec<Option<L1Entry>>,
    // unused entry numbers, popped from the back
    spare_entries: Vec<u32>,
    slots: Vec<Slot>,
    free_head: u32,
    free_len: usize,
    occupied: usize,
    lru_head: u32,
    lru_tail: u32,
    region_slots: usize,
    cost: CostModel,
}

impl OpcCache {
    pub fn new(capacity: Capacity) -> Self {
        Self::with_options(capacity, OpcOptions::default())
    }

    pub fn with_options(capacity: Capacity, options: OpcOptions) -> Self {
        let Capacity { l1_slots, l2_slots } = capacity;
        assert!(l2_slots < NIL as usize && l1_slots < NIL as usize, "cache too large");
        let dynamic = options.allocator == AllocatorMode::DynamicLinked;
        let slots = (0..l2_slots)
            .map(|i| Slot {
                chunk: None,
                prev: if dynamic && i + 1 < l2_slots { i as u32 + 1 } else { NIL },
            })
            .collect();
        let (free_head, free_len) = if dynamic && l2_slots > 0 {
            (0, l2_slots)
        } else {
            (NIL, 0)
        };
        OpcCache {
            capacity,
            options,
            index: ObjectIndex::with_capacity(l1_slots),
            entries: vec![None; l1_slots],
            spare_entries: (0..l1_slots as u32).rev().collect(),
            slots,
            free_head,
            free_len,
            occupied: 0,
            lru_head: NIL,
            lru_tail: NIL,
            region_slots: l2_slots.checked_div(l1_slots).unwrap_or(0),
            cost: CostModel::new(),
        }
    }

    pub fn options(&self) -> OpcOptions {
        self.options
    }

    /// Number of L1 entries in use.
    pub fn len(&self) -> usize {
        self.index.len()
    }

    pub fn is_empty(&self) -> bool {
        self.index.len() == 0
    }

    pub fn free_slots(&self) -> usize {
        match self.options.allocator {
            AllocatorMode::DynamicLinked => self.free_len,
            AllocatorMode::FixedContiguous => self.capacity.l2_slots - self.occupied,
        }
    }

    /// Head of the free list, if any slot is free (dynamic mode only).
    pub fn free_head(&self) -> Option<SlotIndex> {
        (self.free_head != NIL).then_some(SlotIndex(self.free_head))
    }

    pub fn last_chunk_id(&self, object: &ObjectId) -> Option<u32> {
        self.index
            .get(object)
            .map(|e| self.entry(e).last_chunk_id)
    }

    /// Slot holding the object's last cached chunk.
    pub fn tail_slot(&self, object: &ObjectId) -> Option<SlotIndex> {
        self.index
            .get(object)
            .map(|e| SlotIndex(self.entry(e).tail_slot))
    }

    /// Objects from LRU head (most valuable) to tail.
    pub fn lru_order(&self) -> Vec<ObjectId> {
        let mut out = Vec::with_capacity(self.len());
        let mut e = self.lru_head;
        while e != NIL {
            let entry = self.entry(e);
            out.push(entry.object.clone());
            e = entry.older;
        }
        out
    }

    pub fn dump(&self) -> Vec<DumpRecord> {
        self.lru_order()
            .into_iter()
            .enumerate()
            .map(|(pos, object)| DumpRecord {
                last_chunk_id: self.last_chunk_id(&object).unwrap(),
                object,
                lru_position: pos,
            })
            .collect()
    }

    /// Look up a chunk and return a copy of it on a hit.
    pub fn fetch(&mut self, id: &ChunkId) -> (LookupResult, Option<Chunk>) {
        let result = self.lookup_inner(id);
        let chunk = match result.1 {
            Some(slot) => {
                let stored = self.slots[slot as usize].chunk.as_ref().expect("hit on empty slot");
                Some(Chunk {
                    id: stored.id.clone(),
                    size_bytes: stored.size_bytes,
                    payload: stored.payload.clone(),
                })
            }
            None => None,
        };
        (result.0, chunk)
    }

    fn lookup_inner(&mut self, id: &ChunkId) -> (LookupResult, Option<u32>) {
        let e = match self.index.get(&id.object) {
            Some(e) if self.entry(e).last_chunk_id >= id.rank => e,
            _ => {
                self.cost.record_access(Tier::Sram, Cause::MissLookup, 1);
                return (LookupResult::miss(1), None);
            }
        };
        let entry = self.entry(e);
        let (slot, dram) = match self.options.allocator {
            AllocatorMode::DynamicLinked => {
                let hops = entry.last_chunk_id - id.rank;
                let mut s = entry.tail_slot;
                for _ in 0..hops {
                    s = self.slots[s as usize].prev;
                }
                (s, 1 + hops as u64)
            }
            AllocatorMode::FixedContiguous => {
                let s = entry.tail_slot - (entry.last_chunk_id - id.rank);
                (s, 1)
            }
        };
        debug_assert_eq!(
            self.slots[slot as usize].chunk.as_ref().map(|c| &c.id),
            Some(id)
        );
        self.cost.record_access(Tier::Sram, Cause::Hit, 1);
        self.cost.record_access(Tier::Dram, Cause::Hit, dram);
        self.lru_move_to_front(e);
        (LookupResult::hit(1, dram), Some(slot))
    }

    /// Remove the last cached chunk of the object at the LRU tail, skipping
    /// `exclude`. The freed slot goes to the head of the free list and is
    /// returned.
    pub fn evict_tail_chunk(&mut self, exclude: Option<&ObjectId>) -> Result<SlotIndex, NoVictim> {
        let slot = self.steal_tail_chunk(exclude)?;
        self.release_slot(slot);
        Ok(SlotIndex(slot))
    }

    /// Evict the object at the LRU tail with all of its chunks. Returns the
    /// number of slots freed.
    pub fn evict_tail_object(&mut self) -> Result<usize, NoVictim> {
        if self.lru_tail == NIL {
            return Err(NoVictim);
        }
        Ok(self.evict_entry(self.lru_tail))
    }

    fn evict_entry(&mut self, e: u32) -> usize {
        let entry = self.remove_entry(e);
        let n = entry.last_chunk_id as usize;
        match self.options.allocator {
            AllocatorMode::DynamicLinked => {
                // walk to the rank-1 slot, then splice the chain onto the free list
                let mut s = entry.tail_slot;
                for _ in 1..n {
                    self.slots[s as usize].chunk = None;
                    s = self.slots[s as usize].prev;
                }
                self.slots[s as usize].chunk = None;
                self.slots[s as usize].prev = self.free_head;
                self.free_head = entry.tail_slot;
                self.free_len += n;
            }
            AllocatorMode::FixedContiguous => {
                let base = e as usize * self.region_slots;
                for s in &mut self.slots[base..base + n] {
                    s.chunk = None;
                }
            }
        }
        self.occupied -= n;
        self.cost.record_access(Tier::Dram, Cause::Evict, 1);
        self.cost.record_access(Tier::Sram, Cause::Evict, n as u64);
        n
    }

    /// Detach the tail slot of the LRU-tail object (skipping `exclude`) and
    /// hand it to the caller. The slot is neither occupied nor free afterwards.
    fn steal_tail_chunk(&mut self, exclude: Option<&ObjectId>) -> Result<u32, NoVictim> {
        let mut victim = self.lru_tail;
        if victim != NIL && Some(&self.entry(victim).object) == exclude {
            victim = self.entry(victim).newer;
        }
        if victim == NIL {
            return Err(NoVictim);
        }
        let dynamic = self.options.allocator == AllocatorMode::DynamicLinked;
        let entry = self.entries[victim as usize].as_mut().unwrap();
        let slot = entry.tail_slot;
        entry.last_chunk_id -= 1;
        if dynamic {
            entry.tail_slot = self.slots[slot as usize].prev;
        } else {
            entry.tail_slot = entry.tail_slot.wrapping_sub(1);
        }
        if entry.last_chunk_id == 0 {
            self.remove_entry(victim);
        }
        self.slots[slot as usize].chunk = None;
        self.slots[slot as usize].prev = NIL;
        self.occupied -= 1;
        self.cost.record_access(Tier::Dram, Cause::Evict, 1);
        self.cost.record_access(Tier::Sram, Cause::Evict, 1);
        Ok(slot)
    }

    fn release_slot(&mut self, slot: u32) {
        if self.options.allocator == AllocatorMode::DynamicLinked {
            self.slots[slot as usize].prev = self.free_head;
            self.free_head = slot;
            self.free_len += 1;
        }
    }

    fn pop_free(&mut self) -> Option<u32> {
        if self.free_head == NIL {
            return None;
        }
        let s = self.free_head;
        self.free_head = self.slots[s as usize].prev;
        self.slots[s as usize].prev = NIL;
        self.free_len -= 1;
        Some(s)
    }

    fn store(&mut self, slot: u32, chunk: &Chunk) {
        let s = &mut self.slots[slot as usize];
        debug_assert!(s.chunk.is_none());
        s.chunk = Some(StoredChunk {
            id: chunk.id.clone(),
            size_bytes: chunk.size_bytes,
            payload: chunk.payload.clone(),
        });
        self.occupied += 1;
        self.cost.record_access(Tier::Sram, Cause::Insert, 1);
        self.cost.record_access(Tier::Dram, Cause::Insert, 1);
    }

    fn ignore(&mut self, outcome: InsertOutcome) -> Result<InsertOutcome> {
        self.cost.record_access(Tier::Sram, Cause::Insert, 1);
        Ok(outcome)
    }

    fn insert_new(&mut self, chunk: &Chunk) -> Result<InsertOutcome> {
        if self.options.allocator == AllocatorMode::FixedContiguous && self.region_slots == 0 {
            return self.ignore(InsertOutcome::IgnoredNoCapacity);
        }
        if self.index.is_full() {
            self.evict_tail_object().expect("full index has a tail");
        }
        let e = self.spare_entries.pop().expect("index below capacity has a spare entry");
        let slot = match self.options.allocator {
            AllocatorMode::DynamicLinked => match self.pop_free() {
                Some(s) => s,
                // the new object is not indexed yet, so it cannot be the victim
                None => self.steal_tail_chunk(None).expect("occupied L2 has an owner"),
            },
            AllocatorMode::FixedContiguous => (e as usize * self.region_slots) as u32,
        };
        self.store(slot, chunk);
        let object = chunk.id.object.clone();
        self.entries[e as usize] = Some(L1Entry {
            object: object.clone(),
            last_chunk_id: 1,
            tail_slot: slot,
            newer: NIL,
            older: NIL,
        });
        let placed = self.index.insert(object, e);
        debug_assert!(placed);
        match self.options.new_object_placement {
            NewObjectPlacement::Head => self.lru_push_front(e),
            NewObjectPlacement::Tail => self.lru_push_back(e),
        }
        Ok(InsertOutcome::StoredNew)
    }

    fn insert_append(&mut self, e: u32, chunk: &Chunk) -> Result<InsertOutcome> {
        let slot = match self.options.allocator {
            AllocatorMode::DynamicLinked => match self.pop_free() {
                Some(s) => s,
                None => match self.steal_tail_chunk(Some(&chunk.id.object)) {
                    Ok(s) => s,
                    Err(NoVictim) => return self.ignore(InsertOutcome::IgnoredSelfVictim),
                },
            },
            AllocatorMode::FixedContiguous => {
                let entry = self.entry(e);
                if entry.last_chunk_id as usize >= self.region_slots {
                    return self.ignore(InsertOutcome::IgnoredOutOfSpace);
                }
                entry.tail_slot + 1
            }
        };
        self.store(slot, chunk);
        let old_tail = self.entry(e).tail_slot;
        if self.options.allocator == AllocatorMode::DynamicLinked {
            self.slots[slot as usize].prev = old_tail;
        }
        let entry = self.entries[e as usize].as_mut().unwrap();
        entry.tail_slot = slot;
        entry.last_chunk_id += 1;
        Ok(InsertOutcome::StoredAppend)
    }

    fn entry(&self, e: u32) -> &L1Entry {
        self.entries[e as usize].as_ref().expect("live L1 entry")
    }

    fn remove_entry(&mut self, e: u32) -> L1Entry {
        self.lru_unlink(e);
        let entry = self.entries[e as usize].take().expect("live L1 entry");
        self.index.remove(&entry.object);
        self.spare_entries.push(e);
        entry
    }

    fn lru_unlink(&mut self, e: u32) {
        let (newer, older) = {
            let en = self.entry(e);
            (en.newer, en.older)
        };
        if newer == NIL {
            self.lru_head = older;
        } else {
            self.entries[newer as usize].as_mut().unwrap().older = older;
        }
        if older == NIL {
            self.lru_tail = newer;
        } else {
            self.entries[older as usize].as_mut().unwrap().newer = newer;
        }
        let en = self.entries[e as usize].as_mut().unwrap();
        en.newer = NIL;
        en.older = NIL;
    }

    fn lru_push_front(&mut self, e: u32) {
        let old_head = self.lru_head;
        {
            let en = self.entries[e as usize].as_mut().unwrap();
            en.newer = NIL;
            en.older = old_head;
        }
        if old_head == NIL {
            self.lru_tail = e;
        } else {
            self.entries[old_head as usize].as_mut().unwrap().newer = e;
        }
        self.lru_head = e;
    }

    fn lru_push_back(&mut self, e: u32) {
        let old_tail = self.lru_tail;
        {
            let en = self.entries[e as usize].as_mut().unwrap();
            en.older = NIL;
            en.newer = old_tail;
        }
        if old_tail == NIL {
            self.lru_head = e;
        } else {
            self.entries[old_tail as usize].as_mut().unwrap().older = e;
        }
        self.lru_tail = e;
    }

    fn lru_move_to_front(&mut self, e: u32) {
        if self.lru_head != e {
            self.lru_unlink(e);
            self.lru_push_front(e);
        }
    }

    pub fn verify_integrity(&self) -> IntegrityReport {
        integrity::verify(self)
    }
}

impl ChunkCache for OpcCache {
    fn lookup(&mut self, id: &ChunkId) -> LookupResult {
        self.lookup_inner(id).0
    }

    fn insert(&mut self, chunk: &Chunk) -> Result<InsertOutcome> {
        let rank = chunk.id.rank;
        if !(1..=MAX_RANK).contains(&rank) {
            return Err(Error::validation(format!("chunk rank {rank} out of range")));
        }
        // no memory to consult, so nothing is charged
        if self.capacity.l1_slots == 0 || self.capacity.l2_slots == 0 {
            return Ok(InsertOutcome::IgnoredNoCapacity);
        }
        match self.index.get(&chunk.id.object) {
            None if rank == 1 => self.insert_new(chunk),
            None => self.ignore(InsertOutcome::IgnoredOutOfSequence),
            Some(e) => {
                let last = self.entry(e).last_chunk_id;
                if rank <= last {
                    self.ignore(InsertOutcome::IgnoredDuplicate)
                } else if rank == last + 1 {
                    self.insert_append(e, chunk)
                } else {
                    self.ignore(InsertOutcome::IgnoredOutOfSequence)
                }
            }
        }
    }

    fn contains(&self, id: &ChunkId) -> bool {
        self.last_chunk_id(&id.object).is_some_and(|last| id.rank >= 1 && id.rank <= last)
    }

    fn cost(&self) -> &CostModel {
        &self.cost
    }

    fn capacity(&self) -> Capacity {
        self.capacity
    }

    fn occupied_slots(&self) -> usize {
        self.occupied
    }

    fn contents(&self) -> Vec<ObjectState> {
        let mut out: Vec<ObjectState> = self
            .index
            .iter()
            .map(|(object, e)| ObjectState {
                object: object.clone(),
                ranks: CachedRanks::Prefix(self.entry(e).last_chunk_id),
            })
            .collect();
        out.sort_by(|a, b| a.object.cmp(&b.object));
        out
    }
}
