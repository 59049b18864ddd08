//! Object-oriented packet caching for ICN routers.
//!
//! The crate provides two chunk caches behind the [`ChunkCache`] trait:
//!
//! * [`OpcCache`], a two-level cache that indexes whole objects in fast
//!   memory and stores their chunks as gap-free prefixes in slow memory;
//! * [`LruChunkCache`], the chunk-level LRU baseline with one fast-memory
//!   entry per cached chunk.
//!
//! Around them sit a memory cost model, scale-free topology generation with
//! cache placement policies, a parametric workload generator, a
//! deterministic discrete-event simulator and sweep/analysis helpers.

pub mod analysis;
pub mod cache;
pub mod chunk;
pub mod config;
pub mod cost;
pub mod error;
pub mod lru;
pub mod memory;
pub mod opc;
pub mod sim;
pub mod topology;
pub mod workload;

pub use cache::{CachedRanks, ChunkCache, InsertOutcome, LookupResult, ObjectState, Outcome};
pub use chunk::{make_chunk_id, Chunk, ChunkId, ObjectId, MAX_RANK};
pub use cost::{record_access, Cause, CostModel, Tier};
pub use error::{Error, Result};
pub use lru::LruChunkCache;
pub use memory::{capacity_from_config, Capacity, MemoryConfig, Scheme};
pub use opc::OpcCache;
