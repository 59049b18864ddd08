//! Memory-access cost accounting.
//!
//! Latency is modeled, never measured: every cache operation charges a
//! number of fast (SRAM) and slow (DRAM) memory accesses, and latency is
//! derived from the counters. Totals are kept in integer picoseconds so
//! replayed counters reproduce them exactly.

use std::fmt;

use serde::{Deserialize, Serialize};

/// SRAM access latency, picoseconds (0.45 ns).
pub const SRAM_ACCESS_PS: u64 = 450;
/// DRAM access latency, picoseconds (55 ns).
pub const DRAM_ACCESS_PS: u64 = 55_000;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub enum Tier {
    Sram,
    Dram,
}

impl Tier {
    pub const ALL: [Tier; 2] = [Tier::Sram, Tier::Dram];

    pub fn access_ps(self) -> u64 {
        match self {
            Tier::Sram => SRAM_ACCESS_PS,
            Tier::Dram => DRAM_ACCESS_PS,
        }
    }

    pub fn as_str(self) -> &'static str {
        match self {
            Tier::Sram => "sram",
            Tier::Dram => "dram",
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub enum Cause {
    Insert,
    Evict,
    Hit,
    MissLookup,
}

impl Cause {
    pub const ALL: [Cause; 4] = [Cause::Insert, Cause::Evict, Cause::Hit, Cause::MissLookup];

    pub fn as_str(self) -> &'static str {
        match self {
            Cause::Insert => "insert",
            Cause::Evict => "evict",
            Cause::Hit => "hit",
            Cause::MissLookup => "miss_lookup",
        }
    }

    fn index(self) -> usize {
        self as usize
    }
}

/// Access counters keyed by (tier, cause).
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct CostModel {
    counters: [[u64; 4]; 2],
}

impl CostModel {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn record_access(&mut self, tier: Tier, cause: Cause, count: u64) {
        self.counters[tier as usize][cause.index()] += count;
    }

    pub fn count(&self, tier: Tier, cause: Cause) -> u64 {
        self.counters[tier as usize][cause.index()]
    }

    pub fn tier_total(&self, tier: Tier) -> u64 {
        self.counters[tier as usize].iter().sum()
    }

    pub fn sram_accesses(&self) -> u64 {
        self.tier_total(Tier::Sram)
    }

    pub fn dram_accesses(&self) -> u64 {
        self.tier_total(Tier::Dram)
    }

    /// DRAM accesses charged to insertions and evictions.
    pub fn dram_insert_evict(&self) -> u64 {
        self.count(Tier::Dram, Cause::Insert) + self.count(Tier::Dram, Cause::Evict)
    }

    pub fn total_latency_ps(&self) -> u64 {
        Tier::ALL
            .iter()
            .map(|&t| self.tier_total(t) * t.access_ps())
            .sum()
    }

    pub fn total_latency_ns(&self) -> f64 {
        self.total_latency_ps() as f64 / 1000.0
    }

    /// Element-wise sum, for aggregating routers.
    pub fn merge(&mut self, other: &CostModel) {
        for t in 0..2 {
            for c in 0..4 {
                self.counters[t][c] += other.counters[t][c];
            }
        }
    }

    /// Iterate `(tier, cause, count)` in a fixed order.
    pub fn iter(&self) -> impl Iterator<Item = (Tier, Cause, u64)> + '_ {
        Tier::ALL
            .into_iter()
            .flat_map(move |t| Cause::ALL.into_iter().map(move |c| (t, c, self.count(t, c))))
    }
}

impl fmt::Display for CostModel {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let mut first = true;
        for (t, c, n) in self.iter() {
            if !first {
                f.write_str(" ")?;
            }
            first = false;
            write!(f, "{}_{}={}", t.as_str(), c.as_str(), n)?;
        }
        write!(f, " latency_ns={}", self.total_latency_ns())
    }
}

/// Charge `count` accesses to `tier` under `cause`, returning the updated model.
pub fn record_access(mut model: CostModel, tier: Tier, cause: Cause, count: u64) -> CostModel {
    model.record_access(tier, cause, count);
    model
}
