use std::collections::{BTreeMap, HashMap};
use std::fmt::Write;

use crate::chunk::ObjectId;
use crate::error::{Error, Result};
use crate::sim::CacheStateLog;
use crate::workload::{Catalog, Trace};

#[derive(Debug, Clone, PartialEq)]
pub struct ObjectStats {
    pub object: ObjectId,
    /// Share of (snapshot, router) samples holding at least one chunk.
    pub caching_frequency: f64,
    /// Requests in the trace, when one was supplied.
    pub popularity: Option<u64>,
    pub size_chunks: Option<u32>,
    /// Stored chunks summed over all samples.
    pub occupied_total: u64,
    /// Cumulative hits at the last snapshot, over all routers.
    pub hits: u64,
    /// `hits / occupied_total`, 0 when either is 0.
    pub caching_efficiency: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct BehavioralStats {
    /// Sorted by object name.
    pub objects: Vec<ObjectStats>,
    /// Number of (snapshot, router) samples.
    pub samples: usize,
    /// `(rank, F(rank))` of cache hits over chunk rank.
    pub hit_cdf: Vec<(u32, f64)>,
    /// `(rank, F(rank))` of stored chunks over chunk rank.
    pub stored_cdf: Vec<(u32, f64)>,
}

impl BehavioralStats {
    pub fn object(&self, id: &ObjectId) -> Option<&ObjectStats> {
        self.objects
            .binary_search_by(|o| o.object.cmp(id))
            .ok()
            .map(|i| &self.objects[i])
    }

    /// Adds request counts and sizes from the workload.
    pub fn with_workload(mut self, catalog: &Catalog, trace: &Trace) -> Self {
        let pop = trace.popularity();
        for o in &mut self.objects {
            o.popularity = Some(pop.get(&o.object).copied().unwrap_or(0));
            o.size_chunks = catalog.size_of(&o.object);
        }
        self
    }

    pub fn objects_csv(&self) -> String {
        let mut s = String::from(
            "object,caching_frequency,popularity,size_chunks,occupied_total,hits,caching_efficiency\n",
        );
        let opt = |v: Option<u64>| v.map(|x| x.to_string()).unwrap_or_default();
        for o in &self.objects {
            let _ = writeln!(
                s,
                "{},{},{},{},{},{},{}",
                o.object,
                o.caching_frequency,
                opt(o.popularity),
                opt(o.size_chunks.map(u64::from)),
                o.occupied_total,
                o.hits,
                o.caching_efficiency
            );
        }
        s
    }
}

fn cdf(weights: &BTreeMap<u32, u64>) -> Vec<(u32, f64)> {
    let total: u64 = weights.values().sum();
    if total == 0 {
        return Vec::new();
    }
    let mut acc = 0;
    weights
        .iter()
        .map(|(&x, &w)| {
            acc += w;
            (x, acc as f64 / total as f64)
        })
        .collect()
}

/// Two-column `x,F(x)` text.
pub fn cdf_text(points: &[(u32, f64)]) -> String {
    let mut s = String::from("x,F(x)\n");
    for (x, f) in points {
        let _ = writeln!(s, "{x},{f}");
    }
    s
}

/// Per-object occupancy and hit statistics over a series of snapshots.
pub fn behavioral_stats(logs: &[CacheStateLog]) -> Result<BehavioralStats> {
    let last = logs.last().ok_or_else(|| Error::validation("no snapshots"))?;
    let samples: usize = logs.iter().map(|l| l.routers.len()).sum();

    #[derive(Default)]
    struct Acc {
        present: u64,
        occupied: u64,
        hits: u64,
    }
    let mut per: HashMap<ObjectId, Acc> = HashMap::new();
    let mut stored_by_rank: BTreeMap<u32, u64> = BTreeMap::new();
    for log in logs {
        for r in &log.routers {
            for o in &r.objects {
                let n = o.ranks.count() as u64;
                if n == 0 {
                    continue;
                }
                let a = per.entry(o.object.clone()).or_default();
                a.present += 1;
                a.occupied += n;
                for rank in o.ranks.iter() {
                    *stored_by_rank.entry(rank).or_insert(0) += 1;
                }
            }
        }
    }
    let mut hits_by_rank: BTreeMap<u32, u64> = BTreeMap::new();
    for r in &last.routers {
        for ((o, rank), n) in &r.hits {
            per.entry(o.clone()).or_default().hits += n;
            *hits_by_rank.entry(*rank).or_insert(0) += n;
        }
    }

    let mut objects: Vec<ObjectStats> = per
        .into_iter()
        .map(|(object, a)| ObjectStats {
            object,
            caching_frequency: if samples == 0 { 0.0 } else { a.present as f64 / samples as f64 },
            popularity: None,
            size_chunks: None,
            occupied_total: a.occupied,
            hits: a.hits,
            caching_efficiency: if a.hits == 0 || a.occupied == 0 {
                0.0
            } else {
                a.hits as f64 / a.occupied as f64
            },
        })
        .collect();
    objects.sort_by(|a, b| a.object.cmp(&b.object));
    Ok(BehavioralStats {
        objects,
        samples,
        hit_cdf: cdf(&hits_by_rank),
        stored_cdf: cdf(&stored_by_rank),
    })
}
