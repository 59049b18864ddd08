//! Deterministic discrete-event simulation of receiver-driven, stop-and-wait
//! chunk transfer over a network of caching routers.
//!
//! Each receiver hangs off one access node and pulls its objects one chunk
//! at a time, in ascending rank, with a single outstanding request. Requests
//! climb the shortest path toward the origin and are answered by the first
//! router that hits; data retraces the path and is offered for insertion at
//! the routers selected by the placement policy. Links are reliable and only
//! propagation delay and cache memory latency advance the clock.

mod report;
mod snapshot;

use std::cmp::Ordering;
use std::collections::{BTreeMap, BinaryHeap};
use std::sync::Arc;

use serde::{Deserialize, Serialize};

use crate::cache::{ChunkCache, InsertOutcome, LookupResult, ObjectState};
use crate::chunk::{Chunk, ChunkId, ObjectId, DEFAULT_MSS};
use crate::cost::CostModel;
use crate::error::{Error, Result};
use crate::lru::LruChunkCache;
use crate::memory::{slots_for, Capacity, MemoryConfig, Scheme, LRU_ENTRY_BYTES};
use crate::opc::{OpcCache, OpcOptions};
use crate::topology::{
    betweenness, caching_nodes_for, lookup_nodes_for, Graph, NodeId, PlacementPolicy, Role, Routes,
};
use crate::workload::{Catalog, Trace};

pub use report::{MetricsReport, ReceiverMetrics, RouterMetrics};
pub use snapshot::{CacheStateLog, RouterSnapshot};

pub const DEFAULT_LINK_DELAY_MS: f64 = 5.0;

const PS_PER_MS: f64 = 1e9;

/// Per-router memory, identical for every caching router.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case", deny_unknown_fields)]
pub enum MemorySpec {
    /// Raw memory sizes; entry size follows the scheme.
    Bytes { sram_bytes: u64, dram_bytes: u64 },
    /// Slot counts given directly.
    Slots { l1_slots: usize, l2_slots: usize },
    /// Fast memory holds `fast_fraction` of the catalog's chunks as LRU
    /// entries; slow memory holds `slow_ratio` chunks per such entry.
    CatalogFraction { fast_fraction: f64, slow_ratio: f64 },
}

impl MemorySpec {
    /// Memory sizes in bytes for `scheme`, given the catalog size in chunks.
    pub fn memory_config(&self, scheme: Scheme, catalog_chunks: u64) -> Result<MemoryConfig> {
        match *self {
            MemorySpec::Bytes {
                sram_bytes,
                dram_bytes,
            } => Ok(MemoryConfig::for_scheme(scheme, sram_bytes, dram_bytes)),
            MemorySpec::Slots { l1_slots, l2_slots } => Ok(MemoryConfig::for_scheme(
                scheme,
                l1_slots as u64 * scheme.entry_bytes(),
                l2_slots as u64 * DEFAULT_MSS as u64,
            )),
            MemorySpec::CatalogFraction {
                fast_fraction,
                slow_ratio,
            } => {
                if !(fast_fraction >= 0.0 && fast_fraction.is_finite()) {
                    return Err(Error::config("memory.fast_fraction", "must be a non-negative number"));
                }
                if !(slow_ratio >= 0.0 && slow_ratio.is_finite()) {
                    return Err(Error::config("memory.slow_ratio", "must be a non-negative number"));
                }
                let entries = (fast_fraction * catalog_chunks as f64).round() as u64;
                let slow = (slow_ratio * entries as f64).round() as u64;
                Ok(MemoryConfig::for_scheme(
                    scheme,
                    entries * LRU_ENTRY_BYTES,
                    slow * DEFAULT_MSS as u64,
                ))
            }
        }
    }

    pub fn capacity(&self, scheme: Scheme, catalog_chunks: u64) -> Result<Capacity> {
        if let MemorySpec::Slots { l1_slots, l2_slots } = *self {
            let l2 = if scheme == Scheme::Lru { l2_slots.min(l1_slots) } else { l2_slots };
            return Ok(Capacity::new(l1_slots, l2));
        }
        slots_for(&self.memory_config(scheme, catalog_chunks)?, scheme)
    }
}

/// Which routers are consulted by passing requests.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum LookupScope {
    /// Every router running a cache module.
    #[default]
    CacheModules,
    /// Only routers that would store data fetched from the origin.
    StoringNodes,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case", deny_unknown_fields)]
pub enum SnapshotSchedule {
    /// Simulated time between snapshots, in milliseconds.
    IntervalMs(f64),
    /// Processed events between snapshots.
    EveryEvents(u64),
}

#[derive(Debug, Clone)]
pub struct SimConfig {
    pub graph: Arc<Graph>,
    pub placement: PlacementPolicy,
    pub scheme: Scheme,
    pub memory: MemorySpec,
    pub catalog: Arc<Catalog>,
    pub trace: Arc<Trace>,
    pub link_delay_ms: f64,
    /// Snapshots are taken on this schedule and once more at the end.
    pub snapshots: Option<SnapshotSchedule>,
    pub lookup_scope: LookupScope,
    pub opc: OpcOptions,
    pub seed: u64,
}

impl SimConfig {
    pub fn new(
        graph: Arc<Graph>,
        placement: PlacementPolicy,
        scheme: Scheme,
        memory: MemorySpec,
        catalog: Arc<Catalog>,
        trace: Arc<Trace>,
    ) -> Self {
        SimConfig {
            graph,
            placement,
            scheme,
            memory,
            catalog,
            trace,
            link_delay_ms: DEFAULT_LINK_DELAY_MS,
            snapshots: None,
            lookup_scope: LookupScope::default(),
            opc: OpcOptions::default(),
            seed: 0,
        }
    }

    pub fn validate(&self) -> Result<()> {
        self.graph
            .validate()
            .map_err(|e| Error::config("graph", e.to_string()))?;
        self.trace.validate(&self.catalog)?;
        if !(self.link_delay_ms >= 0.0 && self.link_delay_ms.is_finite()) {
            return Err(Error::config("link_delay_ms", "must be a non-negative number"));
        }
        match self.snapshots {
            Some(SnapshotSchedule::IntervalMs(ms)) if !(ms > 0.0 && ms.is_finite()) => {
                return Err(Error::config("snapshots.interval_ms", "must be positive"));
            }
            Some(SnapshotSchedule::EveryEvents(0)) => {
                return Err(Error::config("snapshots.every_events", "must be positive"));
            }
            _ => {}
        }
        Ok(())
    }
}

/// A router's content store.
#[derive(Debug, Clone)]
pub enum RouterCache {
    Lru(LruChunkCache),
    Opc(OpcCache),
}

impl RouterCache {
    fn new(scheme: Scheme, capacity: Capacity, opc: OpcOptions) -> Self {
        match scheme {
            Scheme::Lru => RouterCache::Lru(LruChunkCache::new(capacity)),
            Scheme::Opc => RouterCache::Opc(OpcCache::with_options(capacity, opc)),
        }
    }

    fn inner(&self) -> &dyn ChunkCache {
        match self {
            RouterCache::Lru(c) => c,
            RouterCache::Opc(c) => c,
        }
    }

    fn inner_mut(&mut self) -> &mut dyn ChunkCache {
        match self {
            RouterCache::Lru(c) => c,
            RouterCache::Opc(c) => c,
        }
    }

    pub fn as_opc(&self) -> Option<&OpcCache> {
        match self {
            RouterCache::Opc(c) => Some(c),
            RouterCache::Lru(_) => None,
        }
    }
}

impl ChunkCache for RouterCache {
    fn lookup(&mut self, id: &ChunkId) -> LookupResult {
        self.inner_mut().lookup(id)
    }

    fn insert(&mut self, chunk: &Chunk) -> Result<InsertOutcome> {
        self.inner_mut().insert(chunk)
    }

    fn contains(&self, id: &ChunkId) -> bool {
        self.inner().contains(id)
    }

    fn cost(&self) -> &CostModel {
        self.inner().cost()
    }

    fn capacity(&self) -> Capacity {
        self.inner().capacity()
    }

    fn occupied_slots(&self) -> usize {
        self.inner().occupied_slots()
    }

    fn contents(&self) -> Vec<ObjectState> {
        self.inner().contents()
    }
}

#[derive(Debug, Clone, Default)]
struct Router {
    cache: Option<RouterCache>,
    lookups: u64,
    hits: u64,
    stored: u64,
    ignored: u64,
    /// Cumulative hits per (object, rank); kept only when snapshots are on.
    hit_counts: BTreeMap<(ObjectId, u32), u64>,
}

/// Forwarding plan shared by all receivers attached to one access node.
#[derive(Debug, Clone)]
struct RoutePlan {
    /// Access node first, origin last.
    path: Vec<NodeId>,
    lookup: Vec<bool>,
    /// `storing[r][i]`: path[i] stores data answered from position `r`.
    storing: Vec<Vec<bool>>,
}

#[derive(Debug, Clone)]
struct Receiver {
    plan: usize,
    access: NodeId,
    object: usize,
    rank: u32,
    size: u32,
    chunks: u64,
    propagation_ps: u64,
    memory_ps: u64,
    finish_ps: u64,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
enum Action {
    Issue { rx: u32 },
    Request { rx: u32, pos: u32 },
    Data { rx: u32, pos: u32, responder: u32 },
    Deliver { rx: u32, responder: u32 },
    Snapshot,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
struct Event {
    time_ps: u64,
    seq: u64,
    action: Action,
}

impl Ord for Event {
    fn cmp(&self, other: &Self) -> Ordering {
        // BinaryHeap is a max-heap
        (other.time_ps, other.seq).cmp(&(self.time_ps, self.seq))
    }
}

impl PartialOrd for Event {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

/// A simulation in progress. [`run`] drives one to completion; the stepwise
/// interface exists for inspection between events.
#[derive(Debug)]
pub struct Simulation {
    cfg: SimConfig,
    delay_ps: u64,
    plans: Vec<RoutePlan>,
    routers: Vec<Router>,
    receivers: Vec<Receiver>,
    queue: BinaryHeap<Event>,
    seq: u64,
    now_ps: u64,
    events: u64,
    network_load: u64,
    server_load: u64,
    cache_requests: u64,
    cache_hits: u64,
    chunk_requests: u64,
    chunks_delivered: u64,
    snapshots: Vec<CacheStateLog>,
    track_hits: bool,
}

impl Simulation {
    pub fn new(cfg: SimConfig) -> Result<Self> {
        cfg.validate()?;
        let g = &*cfg.graph;
        let roles = g.roles();
        let origin = g.origin().expect("validated");
        let routes = Routes::compute(g).map_err(|e| Error::config("graph", e.to_string()))?;
        let scores = if cfg.placement == PlacementPolicy::Betweenness {
            betweenness(g)
        } else {
            vec![0.0; g.node_count()]
        };

        let access = g.access_nodes();
        let mut plans = Vec::with_capacity(access.len());
        for &a in &access {
            let path = routes.path(a, origin);
            if path.last() != Some(&origin) {
                return Err(Error::config("graph", format!("origin unreachable from node {a}")));
            }
            let mut storing = vec![vec![false; path.len()]];
            for r in 1..path.len() {
                let mut mask = vec![false; path.len()];
                for u in caching_nodes_for(cfg.placement, &path[..r], &scores, roles)? {
                    let i = path[..r].iter().position(|&x| x == u).expect("on path");
                    mask[i] = true;
                }
                storing.push(mask);
            }
            let lookup = match cfg.lookup_scope {
                LookupScope::CacheModules => {
                    let nodes = lookup_nodes_for(cfg.placement, &path, roles);
                    path.iter().map(|u| nodes.contains(u)).collect()
                }
                LookupScope::StoringNodes => storing[path.len() - 1].clone(),
            };
            plans.push(RoutePlan {
                path,
                lookup,
                storing,
            });
        }

        let catalog_chunks = cfg.catalog.total_chunks();
        let capacity = cfg.memory.capacity(cfg.scheme, catalog_chunks)?;
        let mut routers = vec![Router::default(); g.node_count()];
        for (u, router) in routers.iter_mut().enumerate() {
            let has_module = match cfg.placement {
                PlacementPolicy::Edge => roles[u] == Role::Access,
                _ => roles[u] != Role::Origin,
            };
            if has_module {
                router.cache = Some(RouterCache::new(cfg.scheme, capacity, cfg.opc));
            }
        }

        let mut receivers = Vec::with_capacity(cfg.trace.receiver_count());
        for r in 0..cfg.trace.receiver_count() {
            let plan = r % access.len();
            receivers.push(Receiver {
                plan,
                access: access[plan],
                object: 0,
                rank: 0,
                size: 0,
                chunks: 0,
                propagation_ps: 0,
                memory_ps: 0,
                finish_ps: 0,
            });
        }

        let delay_ps = (cfg.link_delay_ms * PS_PER_MS).round() as u64;
        let track_hits = cfg.snapshots.is_some();
        let mut sim = Simulation {
            cfg,
            delay_ps,
            plans,
            routers,
            receivers,
            queue: BinaryHeap::new(),
            seq: 0,
            now_ps: 0,
            events: 0,
            network_load: 0,
            server_load: 0,
            cache_requests: 0,
            cache_hits: 0,
            chunk_requests: 0,
            chunks_delivered: 0,
            snapshots: Vec::new(),
            track_hits,
        };
        for rx in 0..sim.receivers.len() {
            if sim.start_object(rx) {
                sim.schedule(0, Action::Issue { rx: rx as u32 });
            }
        }
        if let Some(SnapshotSchedule::IntervalMs(ms)) = sim.cfg.snapshots {
            let t = sim.interval_ps(ms);
            sim.schedule(t, Action::Snapshot);
        }
        Ok(sim)
    }

    pub fn config(&self) -> &SimConfig {
        &self.cfg
    }

    pub fn now_ms(&self) -> f64 {
        self.now_ps as f64 / PS_PER_MS
    }

    pub fn is_finished(&self) -> bool {
        !self.queue.iter().any(|e| e.action != Action::Snapshot)
    }

    /// The cache of router `u`, if it runs one.
    pub fn cache(&self, u: NodeId) -> Option<&RouterCache> {
        self.routers.get(u).and_then(|r| r.cache.as_ref())
    }

    /// Current per-router state. Does not advance the simulation.
    pub fn snapshot(&self) -> CacheStateLog {
        let routers = self
            .routers
            .iter()
            .enumerate()
            .filter_map(|(u, r)| {
                let cache = r.cache.as_ref()?;
                Some(RouterSnapshot {
                    router: u,
                    objects: cache.contents(),
                    hits: r.hit_counts.iter().map(|(k, &v)| (k.clone(), v)).collect(),
                })
            })
            .collect();
        CacheStateLog {
            time_ps: self.now_ps,
            routers,
        }
    }

    /// Processes the next event. Returns false once nothing is left.
    pub fn step(&mut self) -> Result<bool> {
        let Some(ev) = self.queue.pop() else {
            return Ok(false);
        };
        if ev.action == Action::Snapshot {
            if self.is_finished() {
                // the final snapshot is taken by finish()
                self.queue.clear();
                return Ok(false);
            }
            self.now_ps = ev.time_ps;
            self.snapshots.push(self.snapshot());
            if let Some(SnapshotSchedule::IntervalMs(ms)) = self.cfg.snapshots {
                let t = self.now_ps + self.interval_ps(ms);
                self.schedule(t, Action::Snapshot);
            }
            return Ok(true);
        }
        self.now_ps = ev.time_ps;
        self.events += 1;
        self.handle(ev.action)?;
        if let Some(SnapshotSchedule::EveryEvents(n)) = self.cfg.snapshots {
            if self.events.is_multiple_of(n) {
                self.snapshots.push(self.snapshot());
            }
        }
        Ok(true)
    }

    /// Runs to completion and produces the report.
    pub fn finish(mut self) -> Result<MetricsReport> {
        while self.step()? {}
        if self.cfg.snapshots.is_some() {
            let last = self.snapshot();
            if self.snapshots.last() != Some(&last) {
                self.snapshots.push(last);
            }
        }
        Ok(self.into_report())
    }

    fn interval_ps(&self, ms: f64) -> u64 {
        ((ms * PS_PER_MS).round() as u64).max(1)
    }

    fn schedule(&mut self, time_ps: u64, action: Action) {
        self.queue.push(Event {
            time_ps,
            seq: self.seq,
            action,
        });
        self.seq += 1;
    }

    /// Moves receiver `rx` to its next non-empty object. False when done.
    fn start_object(&mut self, rx: usize) -> bool {
        let list = &self.cfg.trace.receivers[rx];
        let r = &mut self.receivers[rx];
        while r.object < list.len() {
            let size = self.cfg.catalog.size_of(&list[r.object]).expect("validated trace");
            if size > 0 {
                r.rank = 1;
                r.size = size;
                return true;
            }
            r.object += 1;
        }
        false
    }

    fn chunk_id(&self, rx: usize) -> ChunkId {
        let r = &self.receivers[rx];
        let object = self.cfg.trace.receivers[rx][r.object].clone();
        ChunkId { object, rank: r.rank }
    }

    fn handle(&mut self, action: Action) -> Result<()> {
        let now = self.now_ps;
        let d = self.delay_ps;
        match action {
            Action::Issue { rx } => {
                self.chunk_requests += 1;
                self.network_load += 1;
                self.schedule(now + d, Action::Request { rx, pos: 0 });
            }
            Action::Request { rx, pos } => {
                let plan = &self.plans[self.receivers[rx as usize].plan];
                let last = plan.path.len() as u32 - 1;
                let node = plan.path[pos as usize];
                let consult = plan.lookup[pos as usize];
                let mut mem = 0;
                let answered = if pos == last {
                    self.server_load += 1;
                    true
                } else if consult {
                    let id = self.chunk_id(rx as usize);
                    let router = &mut self.routers[node];
                    let cache = router.cache.as_mut().expect("lookup node has a cache");
                    let before = cache.cost().total_latency_ps();
                    let hit = cache.lookup(&id).is_hit();
                    mem = cache.cost().total_latency_ps() - before;
                    router.lookups += 1;
                    self.cache_requests += 1;
                    if hit {
                        router.hits += 1;
                        self.cache_hits += 1;
                        if self.track_hits {
                            *router.hit_counts.entry((id.object, id.rank)).or_insert(0) += 1;
                        }
                    }
                    hit
                } else {
                    false
                };
                self.receivers[rx as usize].memory_ps += mem;
                let t = now + mem + d;
                if answered {
                    self.send_down(t, rx, pos, pos);
                } else {
                    self.network_load += 1;
                    self.schedule(t, Action::Request { rx, pos: pos + 1 });
                }
            }
            Action::Data { rx, pos, responder } => {
                let plan = &self.plans[self.receivers[rx as usize].plan];
                let mut mem = 0;
                if plan.storing[responder as usize][pos as usize] {
                    let node = plan.path[pos as usize];
                    let chunk = Chunk::metadata(self.chunk_id(rx as usize), DEFAULT_MSS);
                    let router = &mut self.routers[node];
                    let cache = router.cache.as_mut().expect("storing node has a cache");
                    let before = cache.cost().total_latency_ps();
                    if cache.insert(&chunk)?.is_stored() {
                        router.stored += 1;
                    } else {
                        router.ignored += 1;
                    }
                    mem = cache.cost().total_latency_ps() - before;
                }
                self.receivers[rx as usize].memory_ps += mem;
                self.send_down(now + mem + d, rx, pos, responder);
            }
            Action::Deliver { rx, responder } => {
                self.chunks_delivered += 1;
                let i = rx as usize;
                let r = &mut self.receivers[i];
                r.chunks += 1;
                r.propagation_ps += 2 * (responder as u64 + 1) * d;
                r.finish_ps = now;
                let more = if r.rank < r.size {
                    r.rank += 1;
                    true
                } else {
                    r.object += 1;
                    self.start_object(i)
                };
                if more {
                    self.handle(Action::Issue { rx })?;
                }
            }
            Action::Snapshot => unreachable!("handled in step"),
        }
        Ok(())
    }

    /// Data leaving position `pos` toward the receiver.
    fn send_down(&mut self, t: u64, rx: u32, pos: u32, responder: u32) {
        if pos == 0 {
            self.schedule(t, Action::Deliver { rx, responder });
        } else {
            self.schedule(
                t,
                Action::Data {
                    rx,
                    pos: pos - 1,
                    responder,
                },
            );
        }
    }

    fn into_report(self) -> MetricsReport {
        let roles = self.cfg.graph.roles();
        let routers = self
            .routers
            .iter()
            .enumerate()
            .filter_map(|(u, r)| {
                let cache = r.cache.as_ref()?;
                Some(RouterMetrics {
                    node: u,
                    role: roles[u],
                    capacity: cache.capacity(),
                    cost: *cache.cost(),
                    lookups: r.lookups,
                    hits: r.hits,
                    inserts_stored: r.stored,
                    inserts_ignored: r.ignored,
                    occupied_slots: cache.occupied_slots() as u64,
                })
            })
            .collect();
        let receivers = self
            .receivers
            .iter()
            .enumerate()
            .map(|(i, r)| ReceiverMetrics {
                receiver: i,
                access: r.access,
                objects: self.cfg.trace.receivers[i].len() as u64,
                chunks: r.chunks,
                completion_ps: r.finish_ps,
                propagation_ps: r.propagation_ps,
                memory_ps: r.memory_ps,
            })
            .collect();
        MetricsReport {
            scheme: self.cfg.scheme,
            placement: self.cfg.placement,
            network_load: self.network_load,
            server_load: self.server_load,
            cache_requests: self.cache_requests,
            cache_hits: self.cache_hits,
            chunk_requests: self.chunk_requests,
            chunks_delivered: self.chunks_delivered,
            events: self.events,
            end_time_ps: self.now_ps,
            receivers,
            routers,
            snapshots: self.snapshots,
        }
    }
}

/// Runs a simulation to completion.
pub fn run(cfg: &SimConfig) -> Result<MetricsReport> {
    Simulation::new(cfg.clone())?.finish()
}
