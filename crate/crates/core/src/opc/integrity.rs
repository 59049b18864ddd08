//! Structural self-check of an [`OpcCache`](super::OpcCache).

use std::collections::HashSet;
use std::fmt;

use super::{AllocatorMode, OpcCache, NIL};
use crate::chunk::ObjectId;

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum Violation {
    /// occupied + free != l2_slots
    SlotConservation { occupied: usize, free: usize, l2_slots: usize },
    /// Cached counter disagrees with the number of non-empty slots.
    OccupiedCount { counted: usize, recorded: usize },
    FreeListCycle,
    FreeListLength { walked: usize, recorded: usize },
    FreeSlotNotEmpty { slot: u32 },
    ChainCycle { object: ObjectId },
    /// Walking back from the tail did not find `expected_rank` of `object`.
    ChainGap { object: ObjectId, expected_rank: u32 },
    /// Rank-1 slot links onward instead of terminating the chain.
    ChainTooLong { object: ObjectId },
    SlotShared { slot: u32 },
    OrphanSlot { slot: u32 },
    SumOfLastMismatch { sum_last: usize, occupied: usize },
    TooManyEntries { entries: usize, l1_slots: usize },
    IndexMismatch { object: ObjectId },
    LruMismatch { reason: String },
}

impl fmt::Display for Violation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{self:?}")
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct IntegrityReport {
    pub occupied: usize,
    pub free: usize,
    pub entries: usize,
    pub violations: Vec<Violation>,
}

impl IntegrityReport {
    pub fn is_ok(&self) -> bool {
        self.violations.is_empty()
    }
}

pub(super) fn verify(cache: &OpcCache) -> IntegrityReport {
    let mut v = Vec::new();
    let l2 = cache.capacity.l2_slots;
    let counted = cache.slots.iter().filter(|s| s.chunk.is_some()).count();
    if counted != cache.occupied {
        v.push(Violation::OccupiedCount {
            counted,
            recorded: cache.occupied,
        });
    }

    let dynamic = cache.options.allocator == AllocatorMode::DynamicLinked;
    let mut seen = vec![false; l2];

    // free list
    let free = if dynamic {
        let mut walked = 0usize;
        let mut s = cache.free_head;
        while s != NIL {
            if seen[s as usize] {
                v.push(Violation::FreeListCycle);
                break;
            }
            seen[s as usize] = true;
            if cache.slots[s as usize].chunk.is_some() {
                v.push(Violation::FreeSlotNotEmpty { slot: s });
            }
            walked += 1;
            s = cache.slots[s as usize].prev;
        }
        if walked != cache.free_len {
            v.push(Violation::FreeListLength {
                walked,
                recorded: cache.free_len,
            });
        }
        walked
    } else {
        l2 - counted
    };
    if counted + free != l2 {
        v.push(Violation::SlotConservation {
            occupied: counted,
            free,
            l2_slots: l2,
        });
    }

    // entries and their chains
    let mut sum_last = 0usize;
    let mut live = 0usize;
    let mut owner = vec![NIL; l2];
    for (e, entry) in cache.entries.iter().enumerate() {
        let Some(entry) = entry else { continue };
        live += 1;
        sum_last += entry.last_chunk_id as usize;
        if cache.index.get(&entry.object) != Some(e as u32) {
            v.push(Violation::IndexMismatch {
                object: entry.object.clone(),
            });
        }
        let mut s = entry.tail_slot;
        for expected in (1..=entry.last_chunk_id).rev() {
            if s == NIL || s as usize >= l2 {
                v.push(Violation::ChainGap {
                    object: entry.object.clone(),
                    expected_rank: expected,
                });
                break;
            }
            if owner[s as usize] == e as u32 {
                v.push(Violation::ChainCycle {
                    object: entry.object.clone(),
                });
                break;
            }
            if owner[s as usize] != NIL {
                v.push(Violation::SlotShared { slot: s });
                break;
            }
            owner[s as usize] = e as u32;
            let ok = cache.slots[s as usize]
                .chunk
                .as_ref()
                .is_some_and(|c| c.id.object == entry.object && c.id.rank == expected);
            if !ok {
                v.push(Violation::ChainGap {
                    object: entry.object.clone(),
                    expected_rank: expected,
                });
                break;
            }
            if expected > 1 {
                s = if dynamic {
                    cache.slots[s as usize].prev
                } else {
                    s.wrapping_sub(1)
                };
            } else if dynamic && cache.slots[s as usize].prev != NIL {
                let next = cache.slots[s as usize].prev;
                if (next as usize) < l2 && owner[next as usize] == e as u32 {
                    v.push(Violation::ChainCycle {
                        object: entry.object.clone(),
                    });
                } else {
                    v.push(Violation::ChainTooLong {
                        object: entry.object.clone(),
                    });
                }
            }
        }
        if !dynamic {
            let base = e * cache.region_slots;
            if entry.tail_slot as usize != base + entry.last_chunk_id as usize - 1 {
                v.push(Violation::ChainGap {
                    object: entry.object.clone(),
                    expected_rank: entry.last_chunk_id,
                });
            }
        }
    }
    for (i, s) in cache.slots.iter().enumerate() {
        if s.chunk.is_some() && owner[i] == NIL {
            v.push(Violation::OrphanSlot { slot: i as u32 });
        }
        if owner[i] != NIL && seen[i] {
            v.push(Violation::SlotShared { slot: i as u32 });
        }
    }
    if sum_last != counted {
        v.push(Violation::SumOfLastMismatch {
            sum_last,
            occupied: counted,
        });
    }
    if live > cache.capacity.l1_slots {
        v.push(Violation::TooManyEntries {
            entries: live,
            l1_slots: cache.capacity.l1_slots,
        });
    }
    if cache.index.len() != live {
        v.push(Violation::LruMismatch {
            reason: format!("index holds {} keys, {} live entries", cache.index.len(), live),
        });
    }

    // object LRU must be a doubly linked list over exactly the live entries
    let mut on_list = HashSet::new();
    let mut prev = NIL;
    let mut e = cache.lru_head;
    while e != NIL {
        let Some(entry) = cache.entries.get(e as usize).and_then(|x| x.as_ref()) else {
            v.push(Violation::LruMismatch {
                reason: format!("list references dead entry {e}"),
            });
            break;
        };
        if !on_list.insert(e) {
            v.push(Violation::LruMismatch {
                reason: "cycle in object LRU".into(),
            });
            break;
        }
        if entry.newer != prev {
            v.push(Violation::LruMismatch {
                reason: format!("back link of {} is broken", entry.object),
            });
        }
        prev = e;
        e = entry.older;
    }
    if prev != cache.lru_tail {
        v.push(Violation::LruMismatch {
            reason: "tail pointer does not match list end".into(),
        });
    }
    if on_list.len() != live {
        v.push(Violation::LruMismatch {
            reason: format!("{} objects on the list, {} indexed", on_list.len(), live),
        });
    }

    IntegrityReport {
        occupied: counted,
        free,
        entries: live,
        violations: v,
    }
}
