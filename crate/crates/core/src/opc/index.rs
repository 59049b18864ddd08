//! Fixed-capacity open-addressing table mapping object names to L1 entry
//! numbers. Linear probing; deletion by backward shift, so there are no
//! tombstones and a probe sequence always ends at an empty bucket.

use std::collections::hash_map::DefaultHasher;
use std::hash::{Hash, Hasher};

use crate::chunk::ObjectId;

#[derive(Debug, Clone)]
pub(crate) struct ObjectIndex {
    buckets: Vec<Option<(ObjectId, u32)>>,
    mask: usize,
    len: usize,
    capacity: usize,
}

fn hash_of(key: &ObjectId) -> u64 {
    // SipHash with fixed keys: identical placement on every run.
    let mut h = DefaultHasher::new();
    key.hash(&mut h);
    h.finish()
}

impl ObjectIndex {
    /// Room for `capacity` keys. The bucket array is kept at most half full.
    pub(crate) fn with_capacity(capacity: usize) -> Self {
        let buckets = (capacity.max(1) * 2).next_power_of_two();
        ObjectIndex {
            buckets: vec![None; buckets],
            mask: buckets - 1,
            len: 0,
            capacity,
        }
    }

    pub(crate) fn len(&self) -> usize {
        self.len
    }

    pub(crate) fn is_full(&self) -> bool {
        self.len >= self.capacity
    }

    fn home(&self, key: &ObjectId) -> usize {
        hash_of(key) as usize & self.mask
    }

    fn find_bucket(&self, key: &ObjectId) -> Option<usize> {
        let mut i = self.home(key);
        loop {
            match &self.buckets[i] {
                None => return None,
                Some((k, _)) if k == key => return Some(i),
                Some(_) => i = (i + 1) & self.mask,
            }
        }
    }

    pub(crate) fn get(&self, key: &ObjectId) -> Option<u32> {
        self.find_bucket(key).map(|b| self.buckets[b].as_ref().unwrap().1)
    }

    /// Insert a key known to be absent. Returns false when the table is at capacity.
    pub(crate) fn insert(&mut self, key: ObjectId, value: u32) -> bool {
        if self.is_full() {
            return false;
        }
        debug_assert!(self.find_bucket(&key).is_none());
        let mut i = self.home(&key);
        while self.buckets[i].is_some() {
            i = (i + 1) & self.mask;
        }
        self.buckets[i] = Some((key, value));
        self.len += 1;
        true
    }

    pub(crate) fn remove(&mut self, key: &ObjectId) -> Option<u32> {
        let mut hole = self.find_bucket(key)?;
        let (_, value) = self.buckets[hole].take().unwrap();
        self.len -= 1;
        // shift back any entry whose probe path crosses the hole
        let mut j = hole;
        loop {
            j = (j + 1) & self.mask;
            let home = match &self.buckets[j] {
                None => break,
                Some((k, _)) => self.home(k),
            };
            let dist_home = j.wrapping_sub(home) & self.mask;
            let dist_hole = j.wrapping_sub(hole) & self.mask;
            if dist_home >= dist_hole {
                self.buckets[hole] = self.buckets[j].take();
                hole = j;
            }
        }
        Some(value)
    }

    pub(crate) fn iter(&self) -> impl Iterator<Item = (&ObjectId, u32)> {
        self.buckets.iter().flatten().map(|(k, v)| (k, *v))
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::collections::HashMap;

    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    #[test]
    fn matches_hashmap_under_churn() {
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        let mut idx = ObjectIndex::with_capacity(37);
        let mut model: HashMap<ObjectId, u32> = HashMap::new();
        for step in 0..50_000u32 {
            let key = ObjectId::new(format!("o{}", rng.gen_range(0..80))).unwrap();
            if rng.gen_bool(0.5) {
                if model.contains_key(&key) {
                    continue;
                }
                let ok = idx.insert(key.clone(), step);
                assert_eq!(ok, model.len() < 37);
                if ok {
                    model.insert(key, step);
                }
            } else {
                assert_eq!(idx.remove(&key), model.remove(&key));
            }
            assert_eq!(idx.len(), model.len());
        }
        for (k, v) in &model {
            assert_eq!(idx.get(k), Some(*v));
        }
        assert_eq!(idx.iter().count(), model.len());
    }

    #[test]
    fn zero_capacity_rejects() {
        let mut idx = ObjectIndex::with_capacity(0);
        assert!(!idx.insert(ObjectId::new("a").unwrap(), 0));
        assert_eq!(idx.get(&ObjectId::new("a").unwrap()), None);
    }
}
