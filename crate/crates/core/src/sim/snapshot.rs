use std::fmt::Write;

use crate::cache::{CachedRanks, ObjectState};
use crate::chunk::ObjectId;
use crate::error::{Error, Result};
use crate::topology::NodeId;

pub const HEADER: &str = "time_ps,router,object,last_or_ranks,hits";

/// One router's content store at a point in time.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct RouterSnapshot {
    pub router: NodeId,
    /// Cached objects, sorted by name.
    pub objects: Vec<ObjectState>,
    /// Cumulative hits per (object, rank) since the start, sorted.
    pub hits: Vec<((ObjectId, u32), u64)>,
}

impl RouterSnapshot {
    pub fn occupied_chunks(&self) -> usize {
        self.objects.iter().map(|o| o.ranks.count()).sum()
    }

    pub fn cached(&self, object: &ObjectId) -> Option<&CachedRanks> {
        self.objects
            .binary_search_by(|o| o.object.cmp(object))
            .ok()
            .map(|i| &self.objects[i].ranks)
    }
}

/// State of every caching router at one simulated instant.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct CacheStateLog {
    pub time_ps: u64,
    pub routers: Vec<RouterSnapshot>,
}

fn ranks_field(r: &CachedRanks) -> String {
    match r {
        CachedRanks::Prefix(n) => format!("last={n}"),
        CachedRanks::Ranks(_) => format!("ranks={r}"),
    }
}

impl CacheStateLog {
    /// Appends one line per (router, object). A router with nothing cached
    /// and no hits gets a line with empty object fields so it still counts
    /// as a sample.
    pub fn write_records(&self, out: &mut String) {
        for r in &self.routers {
            let mut objects: Vec<&ObjectId> = r.objects.iter().map(|o| &o.object).collect();
            objects.extend(r.hits.iter().map(|((o, _), _)| o));
            objects.sort();
            objects.dedup();
            if objects.is_empty() {
                let _ = writeln!(out, "{},{},,,", self.time_ps, r.router);
                continue;
            }
            for o in objects {
                let ranks = r.cached(o).map(ranks_field).unwrap_or_default();
                let mut hits = String::new();
                for ((_, rank), n) in r.hits.iter().filter(|((x, _), _)| x == o) {
                    if !hits.is_empty() {
                        hits.push(';');
                    }
                    let _ = write!(hits, "{rank}:{n}");
                }
                let _ = writeln!(out, "{},{},{},{},{}", self.time_ps, r.router, o, ranks, hits);
            }
        }
    }

    pub fn to_text(&self) -> String {
        let mut s = String::from(HEADER);
        s.push('\n');
        self.write_records(&mut s);
        s
    }

    /// Parses records written by [`write_records`](Self::write_records),
    /// with or without the header line.
    pub fn parse_many(text: &str) -> Result<Vec<CacheStateLog>> {
        let mut logs: Vec<CacheStateLog> = Vec::new();
        for (i, line) in text.lines().enumerate() {
            let ln = i + 1;
            let line = line.trim_end();
            if line.is_empty() || line == HEADER {
                continue;
            }
            let mut left = line.splitn(3, ',');
            let time = left.next().unwrap_or_default();
            let router = left.next().ok_or_else(|| Error::parse(ln, "missing router"))?;
            let rest = left.next().ok_or_else(|| Error::parse(ln, "missing object"))?;
            let mut right = rest.rsplitn(3, ',');
            let hits = right.next().unwrap_or_default();
            let ranks = right.next().ok_or_else(|| Error::parse(ln, "missing last_or_ranks"))?;
            let object = right.next().ok_or_else(|| Error::parse(ln, "missing hits"))?;

            let time_ps: u64 = time.parse().map_err(|_| Error::parse(ln, "bad time"))?;
            let router: NodeId = router.parse().map_err(|_| Error::parse(ln, "bad router"))?;
            if logs.last().map(|l| l.time_ps) != Some(time_ps) {
                logs.push(CacheStateLog {
                    time_ps,
                    routers: Vec::new(),
                });
            }
            let log = logs.last_mut().unwrap();
            if log.routers.last().map(|r| r.router) != Some(router) {
                log.routers.push(RouterSnapshot {
                    router,
                    objects: Vec::new(),
                    hits: Vec::new(),
                });
            }
            let snap = log.routers.last_mut().unwrap();
            if object.is_empty() {
                continue;
            }
            let id = ObjectId::new(object)?;
            if let Some(n) = ranks.strip_prefix("last=") {
                let n = n.parse().map_err(|_| Error::parse(ln, "bad last_chunk_id"))?;
                snap.objects.push(ObjectState {
                    object: id.clone(),
                    ranks: CachedRanks::Prefix(n),
                });
            } else if let Some(list) = ranks.strip_prefix("ranks=") {
                let r = list
                    .split(';')
                    .map(|x| x.parse::<u32>())
                    .collect::<std::result::Result<Vec<_>, _>>()
                    .map_err(|_| Error::parse(ln, "bad rank list"))?;
                snap.objects.push(ObjectState {
                    object: id.clone(),
                    ranks: CachedRanks::Ranks(r),
                });
            } else if !ranks.is_empty() {
                return Err(Error::parse(ln, format!("unrecognised cache state `{ranks}`")));
            }
            if !hits.is_empty() {
                for pair in hits.split(';') {
                    let (rank, n) = pair
                        .split_once(':')
                        .ok_or_else(|| Error::parse(ln, "hit entry must be rank:count"))?;
                    let rank = rank.parse().map_err(|_| Error::parse(ln, "bad hit rank"))?;
                    let n = n.parse().map_err(|_| Error::parse(ln, "bad hit count"))?;
                    snap.hits.push(((id.clone(), rank), n));
                }
            }
        }
        Ok(logs)
    }
}
