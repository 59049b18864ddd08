//! Synthetic traffic: a catalog of objects drawn per traffic class, and
//! per-receiver object request schedules with Zipf popularity.

mod files;
mod zipf;

use std::collections::HashMap;
use std::fmt;
use std::str::FromStr;

use rand::distributions::{Distribution, WeightedIndex};
use rand::seq::SliceRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::LogNormal;
use serde::{Deserialize, Serialize};

use crate::chunk::{ObjectId, MAX_RANK};
use crate::error::{Error, Result};

pub use zipf::{zipf_sample, ZipfTable};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum TrafficClass {
    Web,
    P2p,
    Video,
    Other,
}

impl TrafficClass {
    pub fn as_str(self) -> &'static str {
        match self {
            TrafficClass::Web => "web",
            TrafficClass::P2p => "p2p",
            TrafficClass::Video => "video",
            TrafficClass::Other => "other",
        }
    }
}

impl fmt::Display for TrafficClass {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for TrafficClass {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "web" => Ok(TrafficClass::Web),
            "p2p" => Ok(TrafficClass::P2p),
            "video" => Ok(TrafficClass::Video),
            "other" => Ok(TrafficClass::Other),
            other => Err(Error::validation(format!("unknown traffic class `{other}`"))),
        }
    }
}

/// Object size in chunks.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum SizeDistribution {
    Fixed { fixed: u32 },
    /// Log-normal with the given median and standard deviation, truncated
    /// to `[1, max]`.
    LogNormal { median: f64, max: u32, std_dev: f64 },
}

impl SizeDistribution {
    fn validate(&self) -> Result<()> {
        match *self {
            SizeDistribution::Fixed { fixed } if !(1..=MAX_RANK).contains(&fixed) => {
                Err(Error::validation(format!("fixed size {fixed} outside [1, {MAX_RANK}]")))
            }
            SizeDistribution::LogNormal { median, max, std_dev } => {
                if median.is_nan() || median < 1.0 || std_dev < 0.0 || !std_dev.is_finite() {
                    Err(Error::validation(format!("bad size distribution median {median}, sd {std_dev}")))
                } else if median > max as f64 {
                    Err(Error::validation(format!("size median {median} exceeds max {max}")))
                } else if max > MAX_RANK {
                    Err(Error::validation(format!("size max {max} exceeds {MAX_RANK} chunks")))
                } else {
                    Ok(())
                }
            }
            _ => Ok(()),
        }
    }

    /// Log-normal `(mu, sigma)` matching the median and standard deviation.
    fn lognormal_params(median: f64, std_dev: f64) -> (f64, f64) {
        // sd^2 = (x - 1) x median^2 with x = exp(sigma^2)
        let r = std_dev / median;
        let x = (1.0 + (1.0 + 4.0 * r * r).sqrt()) / 2.0;
        (median.ln(), x.ln().sqrt())
    }

    fn sample(&self, rng: &mut ChaCha8Rng) -> u32 {
        match *self {
            SizeDistribution::Fixed { fixed } => fixed,
            SizeDistribution::LogNormal { median, max, std_dev } => {
                let (mu, sigma) = Self::lognormal_params(median, std_dev);
                if sigma == 0.0 {
                    return (median.round() as u32).clamp(1, max);
                }
                let dist = LogNormal::new(mu, sigma).expect("finite parameters");
                for _ in 0..1000 {
                    let v = dist.sample(rng).round();
                    if v >= 1.0 && v <= max as f64 {
                        return v as u32;
                    }
                }
                median.round() as u32
            }
        }
    }
}

/// Request popularity summary. Only `alpha` drives sampling; the other fields
/// scale the class's share of requests.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Popularity {
    pub mean: f64,
    #[serde(default)]
    pub max: f64,
    #[serde(default)]
    pub std_dev: f64,
    pub alpha: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct TrafficClassParams {
    pub class: TrafficClass,
    pub object_count: usize,
    pub size: SizeDistribution,
    pub popularity: Popularity,
    /// Relative share of requests; defaults to `object_count * popularity.mean`.
    #[serde(default)]
    pub request_weight: Option<f64>,
}

impl TrafficClassParams {
    pub fn weight(&self) -> f64 {
        self.request_weight
            .unwrap_or(self.object_count as f64 * self.popularity.mean)
    }

    fn validate(&self) -> Result<()> {
        if self.object_count == 0 {
            return Err(Error::validation(format!("{} class has no objects", self.class)));
        }
        if self.popularity.alpha < 0.0 || self.weight() < 0.0 {
            return Err(Error::validation(format!("{} class has negative popularity", self.class)));
        }
        self.size.validate()
    }
}

/// The GlobeTraff-like mix, with object counts multiplied by `scale`.
///
/// A class whose scaled count drops below one object keeps a single object
/// whose sizes shrink by the remaining factor instead, so the class keeps its
/// share of the catalog volume. Object sizes are capped at the 2^16 chunk
/// limit.
pub fn default_classes(scale: f64) -> Vec<TrafficClassParams> {
    struct Row {
        class: TrafficClass,
        objects: f64,
        median: f64,
        max: f64,
        std_dev: f64,
        req_mean: f64,
        req_max: f64,
        req_sd: f64,
        alpha: f64,
    }
    let rows = [
        Row { class: TrafficClass::Web, objects: 195_386.0, median: 6.0, max: 19_929.0, std_dev: 56.6, req_mean: 10_984.0, req_max: 658_686.0, req_sd: 53.8, alpha: 0.8 },
        // median and max are listed one apart for the single P2P object
        Row { class: TrafficClass::P2p, objects: 1.0, median: 687_168.0, max: 687_168.0, std_dev: 0.0, req_mean: 2.0, req_max: 2.0, req_sd: 0.0, alpha: 0.0 },
        Row { class: TrafficClass::Video, objects: 176.0, median: 8_133.0, max: 16_977.0, std_dev: 5_261.2, req_mean: 17.0, req_max: 326.0, req_sd: 2.33, alpha: 0.1 },
        Row { class: TrafficClass::Other, objects: 10_485.0, median: 4.0, max: 5_120.0, std_dev: 0.0, req_mean: 1_106.0, req_max: 22_352.0, req_sd: 15.3, alpha: 0.8 },
    ];
    rows.iter()
        .map(|r| {
            let scaled = r.objects * scale;
            let (count, size_factor) = if scaled.round() >= 1.0 {
                (scaled.round() as usize, 1.0)
            } else {
                (1, scaled)
            };
            let cap = |v: f64| (v * size_factor).round().clamp(1.0, MAX_RANK as f64);
            let median = cap(r.median);
            let max = cap(r.max).max(median) as u32;
            let size = if r.std_dev == 0.0 {
                SizeDistribution::Fixed { fixed: median as u32 }
            } else {
                SizeDistribution::LogNormal {
                    median,
                    max,
                    std_dev: r.std_dev * size_factor,
                }
            };
            TrafficClassParams {
                class: r.class,
                object_count: count,
                size,
                popularity: Popularity {
                    mean: r.req_mean,
                    max: r.req_max,
                    std_dev: r.req_sd,
                    alpha: r.alpha,
                },
                request_weight: None,
            }
        })
        .collect()
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct CatalogObject {
    pub id: ObjectId,
    pub class: TrafficClass,
    pub size_chunks: u32,
}

/// Distinct objects of a workload. Within a class, objects are stored in
/// popularity order (most popular first).
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Catalog {
    objects: Vec<CatalogObject>,
    by_name: HashMap<ObjectId, usize>,
    total_chunks: u64,
}

impl Catalog {
    pub fn from_objects(objects: Vec<CatalogObject>) -> Result<Self> {
        let mut by_name = HashMap::with_capacity(objects.len());
        let mut total = 0u64;
        for (i, o) in objects.iter().enumerate() {
            if o.size_chunks < 1 || o.size_chunks > MAX_RANK {
                return Err(Error::validation(format!("object {} has size {}", o.id, o.size_chunks)));
            }
            if by_name.insert(o.id.clone(), i).is_some() {
                return Err(Error::validation(format!("duplicate object {}", o.id)));
            }
            total += o.size_chunks as u64;
        }
        Ok(Catalog {
            objects,
            by_name,
            total_chunks: total,
        })
    }

    pub fn objects(&self) -> &[CatalogObject] {
        &self.objects
    }

    pub fn len(&self) -> usize {
        self.objects.len()
    }

    pub fn is_empty(&self) -> bool {
        self.objects.is_empty()
    }

    /// Number of distinct chunks.
    pub fn total_chunks(&self) -> u64 {
        self.total_chunks
    }

    pub fn get(&self, id: &ObjectId) -> Option<&CatalogObject> {
        self.by_name.get(id).map(|&i| &self.objects[i])
    }

    pub fn size_of(&self, id: &ObjectId) -> Option<u32> {
        self.get(id).map(|o| o.size_chunks)
    }

    fn class_members(&self, class: TrafficClass) -> Vec<usize> {
        (0..self.objects.len())
            .filter(|&i| self.objects[i].class == class)
            .collect()
    }
}

pub fn generate_catalog(params: &[TrafficClassParams], seed: u64) -> Result<Catalog> {
    if params.is_empty() {
        return Err(Error::validation("no traffic classes"));
    }
    for p in params {
        p.validate()?;
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut objects = Vec::new();
    for p in params {
        for i in 0..p.object_count {
            objects.push(CatalogObject {
                id: ObjectId::new(format!("{}/{}", p.class, i))?,
                class: p.class,
                size_chunks: p.size.sample(&mut rng),
            });
        }
    }
    Catalog::from_objects(objects)
}

/// Object-level request schedules, one per receiver.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Trace {
    pub receivers: Vec<Vec<ObjectId>>,
    pub seed: u64,
}

impl Trace {
    pub fn new(receivers: Vec<Vec<ObjectId>>) -> Self {
        Trace { receivers, seed: 0 }
    }

    pub fn receiver_count(&self) -> usize {
        self.receivers.len()
    }

    pub fn request_count(&self) -> usize {
        self.receivers.iter().map(Vec::len).sum()
    }

    /// Every requested object must be in the catalog.
    pub fn validate(&self, catalog: &Catalog) -> Result<()> {
        for reqs in &self.receivers {
            for o in reqs {
                if catalog.get(o).is_none() {
                    return Err(Error::validation(format!("trace requests unknown object {o}")));
                }
            }
        }
        Ok(())
    }

    /// Requests per object.
    pub fn popularity(&self) -> HashMap<ObjectId, u64> {
        let mut m = HashMap::new();
        for o in self.receivers.iter().flatten() {
            *m.entry(o.clone()).or_insert(0) += 1;
        }
        m
    }
}

/// Draw `receiver_count * requests_per_receiver` object requests. A class is
/// chosen by its request weight, then an object within the class by Zipf
/// rank. The combined list is shuffled and dealt out to receivers in
/// contiguous blocks.
pub fn generate_requests(
    catalog: &Catalog,
    params: &[TrafficClassParams],
    receiver_count: usize,
    requests_per_receiver: usize,
    seed: u64,
) -> Result<Trace> {
    if catalog.is_empty() {
        return Err(Error::validation("empty catalog"));
    }
    let mut classes = Vec::new();
    let mut weights = Vec::new();
    for p in params {
        let members = catalog.class_members(p.class);
        if members.is_empty() || p.weight() <= 0.0 {
            continue;
        }
        let table = ZipfTable::new(members.len(), p.popularity.alpha);
        classes.push((members, table));
        weights.push(p.weight());
    }
    if classes.is_empty() {
        // no usable class parameters: uniform over the catalog
        let all: Vec<usize> = (0..catalog.len()).collect();
        let table = ZipfTable::new(all.len(), 0.0);
        classes.push((all, table));
        weights.push(1.0);
    }
    let picker = WeightedIndex::new(&weights).map_err(|e| Error::validation(e.to_string()))?;
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let total = receiver_count * requests_per_receiver;
    let mut all: Vec<ObjectId> = Vec::with_capacity(total);
    for _ in 0..total {
        let (members, table) = &classes[picker.sample(&mut rng)];
        let rank = table.sample(&mut rng);
        all.push(catalog.objects()[members[rank - 1]].id.clone());
    }
    all.shuffle(&mut rng);
    let receivers = if requests_per_receiver == 0 {
        vec![Vec::new(); receiver_count]
    } else {
        all.chunks(requests_per_receiver).map(<[_]>::to_vec).collect()
    };
    Ok(Trace { receivers, seed })
}

#[cfg(test)]
mod tests;
