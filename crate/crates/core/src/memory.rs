//! Router memory sizing: how many index entries fit in fast memory and how
//! many chunk slots fit in slow memory.

use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::chunk::DEFAULT_MSS;
use crate::error::{Error, Result};

/// Fast-memory bytes per chunk-level LRU entry.
pub const LRU_ENTRY_BYTES: u64 = 40;
/// Fast-memory bytes per object-level entry (LRU entry plus a 2-byte chunk counter).
pub const OPC_ENTRY_BYTES: u64 = 42;

/// 210 Mbit of SRAM, counting a megabit as 2^20 bits.
pub const REFERENCE_SRAM_BYTES: u64 = 210 * (1 << 20) / 8;
/// 10 GiB of DRAM.
pub const REFERENCE_DRAM_BYTES: u64 = 10 * (1 << 30);

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Scheme {
    Lru,
    Opc,
}

impl Scheme {
    pub fn entry_bytes(self) -> u64 {
        match self {
            Scheme::Lru => LRU_ENTRY_BYTES,
            Scheme::Opc => OPC_ENTRY_BYTES,
        }
    }

    pub fn as_str(self) -> &'static str {
        match self {
            Scheme::Lru => "lru",
            Scheme::Opc => "opc",
        }
    }
}

impl fmt::Display for Scheme {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for Scheme {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.to_ascii_lowercase().as_str() {
            "lru" => Ok(Scheme::Lru),
            "opc" => Ok(Scheme::Opc),
            other => Err(Error::validation(format!("unknown scheme `{other}`"))),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct MemoryConfig {
    pub sram_bytes: u64,
    pub dram_bytes: u64,
    pub entry_bytes: u64,
    pub mss_bytes: u64,
}

impl MemoryConfig {
    /// Memory sized for `scheme`, with the scheme's entry size and the default MSS.
    pub fn for_scheme(scheme: Scheme, sram_bytes: u64, dram_bytes: u64) -> Self {
        MemoryConfig {
            sram_bytes,
            dram_bytes,
            entry_bytes: scheme.entry_bytes(),
            mss_bytes: DEFAULT_MSS as u64,
        }
    }

    /// The most capable commodity router: 210 Mbit SRAM and 10 GiB DRAM.
    pub fn reference_router(scheme: Scheme) -> Self {
        Self::for_scheme(scheme, REFERENCE_SRAM_BYTES, REFERENCE_DRAM_BYTES)
    }
}

/// Slot counts derived from a [`MemoryConfig`].
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Default, Serialize, Deserialize)]
pub struct Capacity {
    /// Fast-memory index entries.
    pub l1_slots: usize,
    /// Slow-memory chunk slots.
    pub l2_slots: usize,
}

impl Capacity {
    pub const ZERO: Capacity = Capacity {
        l1_slots: 0,
        l2_slots: 0,
    };

    pub fn new(l1_slots: usize, l2_slots: usize) -> Self {
        Capacity { l1_slots, l2_slots }
    }
}

/// Slot counts for `scheme`, allowing zero. For LRU the slow slots are
/// clamped to the index size, as each cached chunk needs its own entry.
pub fn slots_for(cfg: &MemoryConfig, scheme: Scheme) -> Result<Capacity> {
    if cfg.entry_bytes == 0 || cfg.mss_bytes == 0 {
        return Err(Error::validation("entry_bytes and mss_bytes must be positive"));
    }
    let l1 = cfg.sram_bytes / cfg.entry_bytes;
    let mut l2 = cfg.dram_bytes / cfg.mss_bytes;
    if scheme == Scheme::Lru {
        l2 = l2.min(l1);
    }
    Ok(Capacity {
        l1_slots: l1 as usize,
        l2_slots: l2 as usize,
    })
}

pub fn capacity_from_config(cfg: &MemoryConfig, scheme: Scheme) -> Result<Capacity> {
    let Capacity { l1_slots: l1, l2_slots: l2 } = slots_for(cfg, scheme)?;
    if l1 == 0 || l2 == 0 {
        return Err(Error::validation(format!(
            "memory config yields zero capacity (l1 = {l1}, l2 = {l2})"
        )));
    }
    Ok(Capacity::new(l1, l2))
}
