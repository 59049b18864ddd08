//! Chunk naming: an object name plus a 1-based rank.

use std::fmt;
use std::sync::Arc;

use crate::error::{Error, Result};

/// Highest rank an object may have; the per-object counter is two bytes wide.
pub const MAX_RANK: u32 = 1 << 16;

/// Default maximum segment size in bytes.
pub const DEFAULT_MSS: u32 = 1500;

/// Name of a content object. Cheap to clone.
#[derive(Clone, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct ObjectId(Arc<str>);

impl ObjectId {
    pub fn new(name: impl AsRef<str>) -> Result<Self> {
        let name = name.as_ref();
        if name.is_empty() {
            return Err(Error::validation("object name must not be empty"));
        }
        Ok(ObjectId(Arc::from(name)))
    }

    pub fn as_str(&self) -> &str {
        &self.0
    }
}

impl fmt::Debug for ObjectId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{:?}", &*self.0)
    }
}

impl fmt::Display for ObjectId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.0)
    }
}

/// Self-identifying chunk name.
#[derive(Clone, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct ChunkId {
    pub object: ObjectId,
    pub rank: u32,
}

impl ChunkId {
    pub fn new(object: ObjectId, rank: u32) -> Result<Self> {
        if rank < 1 {
            return Err(Error::validation("chunk rank is 1-based"));
        }
        if rank > MAX_RANK {
            return Err(Error::validation(format!(
                "chunk rank {rank} exceeds the {MAX_RANK} chunk limit"
            )));
        }
        Ok(ChunkId { object, rank })
    }
}

impl fmt::Debug for ChunkId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}#{}", self.object, self.rank)
    }
}

impl fmt::Display for ChunkId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}, {}", self.object, self.rank)
    }
}

/// Build a chunk id from a name and a rank.
pub fn make_chunk_id(object: ObjectId, rank: u32) -> Result<ChunkId> {
    ChunkId::new(object, rank)
}

/// A data chunk. Simulation runs carry metadata only (`payload` = `None`).
#[derive(Clone, PartialEq, Eq)]
pub struct Chunk {
    pub id: ChunkId,
    pub size_bytes: u32,
    pub payload: Option<Arc<[u8]>>,
}

impl Chunk {
    pub fn metadata(id: ChunkId, size_bytes: u32) -> Self {
        Chunk {
            id,
            size_bytes,
            payload: None,
        }
    }

    pub fn with_payload(id: ChunkId, payload: impl Into<Arc<[u8]>>) -> Self {
        let payload = payload.into();
        Chunk {
            id,
            size_bytes: payload.len() as u32,
            payload: Some(payload),
        }
    }

    pub fn validate(&self, mss: u32) -> Result<()> {
        if self.id.rank < 1 || self.id.rank > MAX_RANK {
            return Err(Error::validation(format!("chunk rank {} out of range", self.id.rank)));
        }
        if self.size_bytes < 1 || self.size_bytes > mss {
            return Err(Error::validation(format!(
                "chunk size {} outside [1, {mss}]",
                self.size_bytes
            )));
        }
        if let Some(p) = &self.payload {
            if p.len() != self.size_bytes as usize {
                return Err(Error::validation("payload length differs from size_bytes"));
            }
        }
        Ok(())
    }
}

impl fmt::Debug for Chunk {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("Chunk")
            .field("id", &self.id)
            .field("size_bytes", &self.size_bytes)
            .field("payload", &self.payload.as_ref().map(|p| p.len()))
            .finish()
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn obj(s: &str) -> ObjectId {
        ObjectId::new(s).unwrap()
    }

    #[test]
    fn chunk_id_examples() {
        let id = make_chunk_id(obj("file/a"), 45).unwrap();
        assert_eq!(id.object.as_str(), "file/a");
        assert_eq!(id.rank, 45);
        assert_eq!(make_chunk_id(obj("x"), 1).unwrap().rank, 1);
        assert!(make_chunk_id(obj("x"), 0).is_err());
        assert!(make_chunk_id(obj("x"), MAX_RANK).is_ok());
        assert!(make_chunk_id(obj("x"), MAX_RANK + 1).is_err());
    }

    #[test]
    fn empty_name_rejected() {
        assert!(ObjectId::new("").is_err());
    }

    #[test]
    fn chunk_validation() {
        let id = make_chunk_id(obj("x"), 1).unwrap();
        assert!(Chunk::metadata(id.clone(), 1500).validate(1500).is_ok());
        assert!(Chunk::metadata(id.clone(), 1501).validate(1500).is_err());
        assert!(Chunk::metadata(id.clone(), 0).validate(1500).is_err());
        let c = Chunk::with_payload(id.clone(), vec![7u8; 10]);
        assert!(c.validate(1500).is_ok());
        let bad = Chunk {
            id,
            size_bytes: 11,
            payload: Some(Arc::from(vec![0u8; 10])),
        };
        assert!(bad.validate(1500).is_err());
    }
}
