use std::fmt::Write;

use crate::cost::{Cause, CostModel, Tier};
use crate::memory::{Capacity, Scheme};
use crate::topology::{NodeId, PlacementPolicy, Role};

use super::snapshot::CacheStateLog;

const PS_PER_MS: f64 = 1e9;
const PS_PER_NS: f64 = 1e3;

#[derive(Debug, Clone, PartialEq)]
pub struct RouterMetrics {
    pub node: NodeId,
    pub role: Role,
    pub capacity: Capacity,
    pub cost: CostModel,
    pub lookups: u64,
    pub hits: u64,
    pub inserts_stored: u64,
    pub inserts_ignored: u64,
    /// Slow-memory slots in use at the end of the run.
    pub occupied_slots: u64,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ReceiverMetrics {
    pub receiver: usize,
    pub access: NodeId,
    pub objects: u64,
    pub chunks: u64,
    /// Time of the last delivery.
    pub completion_ps: u64,
    pub propagation_ps: u64,
    pub memory_ps: u64,
}

impl ReceiverMetrics {
    pub fn completion_ms(&self) -> f64 {
        self.completion_ps as f64 / PS_PER_MS
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct MetricsReport {
    pub scheme: Scheme,
    pub placement: PlacementPolicy,
    /// Hop-by-hop request transmissions, including receiver to access node.
    pub network_load: u64,
    /// Requests that reached the origin.
    pub server_load: u64,
    pub cache_requests: u64,
    pub cache_hits: u64,
    pub chunk_requests: u64,
    pub chunks_delivered: u64,
    pub events: u64,
    pub end_time_ps: u64,
    pub receivers: Vec<ReceiverMetrics>,
    pub routers: Vec<RouterMetrics>,
    pub snapshots: Vec<CacheStateLog>,
}

impl MetricsReport {
    pub fn hit_ratio(&self) -> f64 {
        if self.cache_requests == 0 {
            0.0
        } else {
            self.cache_hits as f64 / self.cache_requests as f64
        }
    }

    pub fn mean_completion_ms(&self) -> f64 {
        if self.receivers.is_empty() {
            return 0.0;
        }
        let total: u64 = self.receivers.iter().map(|r| r.completion_ps).sum();
        total as f64 / self.receivers.len() as f64 / PS_PER_MS
    }

    pub fn max_completion_ms(&self) -> f64 {
        self.receivers.iter().map(|r| r.completion_ps).max().unwrap_or(0) as f64 / PS_PER_MS
    }

    pub fn propagation_ps(&self) -> u64 {
        self.receivers.iter().map(|r| r.propagation_ps).sum()
    }

    /// Memory latency on the receivers' critical paths.
    pub fn memory_ps(&self) -> u64 {
        self.receivers.iter().map(|r| r.memory_ps).sum()
    }

    /// All routers' counters added up.
    pub fn total_cost(&self) -> CostModel {
        let mut total = CostModel::new();
        for r in &self.routers {
            total.merge(&r.cost);
        }
        total
    }

    /// Scalar metrics in a fixed order.
    pub fn scalars(&self) -> Vec<(&'static str, String)> {
        let cost = self.total_cost();
        let mut out = vec![
            ("scheme", self.scheme.to_string()),
            ("placement", self.placement.to_string()),
            ("network_load", self.network_load.to_string()),
            ("server_load", self.server_load.to_string()),
            ("cache_requests", self.cache_requests.to_string()),
            ("cache_hits", self.cache_hits.to_string()),
            ("hit_ratio", self.hit_ratio().to_string()),
            ("chunk_requests", self.chunk_requests.to_string()),
            ("chunks_delivered", self.chunks_delivered.to_string()),
            ("receivers", self.receivers.len().to_string()),
            ("completion_time_mean_ms", self.mean_completion_ms().to_string()),
            ("completion_time_max_ms", self.max_completion_ms().to_string()),
            ("propagation_ms_total", (self.propagation_ps() as f64 / PS_PER_MS).to_string()),
            ("memory_ns_total", (self.memory_ps() as f64 / PS_PER_NS).to_string()),
            ("sram_accesses", cost.sram_accesses().to_string()),
            ("dram_accesses", cost.dram_accesses().to_string()),
            ("dram_hit", cost.count(Tier::Dram, Cause::Hit).to_string()),
            ("dram_insert_evict", cost.dram_insert_evict().to_string()),
            ("memory_latency_ns", cost.total_latency_ns().to_string()),
        ];
        out.push(("end_time_ms", (self.end_time_ps as f64 / PS_PER_MS).to_string()));
        out.push(("events", self.events.to_string()));
        out
    }

    /// Flat `key=value` record, one per line.
    pub fn to_kv(&self) -> String {
        let mut s = String::new();
        for (k, v) in self.scalars() {
            let _ = writeln!(s, "{k}={v}");
        }
        s
    }

    pub fn routers_csv(&self) -> String {
        let mut s = String::from(
            "node,role,l1_slots,l2_slots,lookups,hits,inserts_stored,inserts_ignored,occupied_slots",
        );
        for t in Tier::ALL {
            for c in Cause::ALL {
                let _ = write!(s, ",{}_{}", t.as_str(), c.as_str());
            }
        }
        s.push_str(",memory_ns\n");
        for r in &self.routers {
            let _ = write!(
                s,
                "{},{},{},{},{},{},{},{},{}",
                r.node,
                r.role,
                r.capacity.l1_slots,
                r.capacity.l2_slots,
                r.lookups,
                r.hits,
                r.inserts_stored,
                r.inserts_ignored,
                r.occupied_slots
            );
            for (_, _, n) in r.cost.iter() {
                let _ = write!(s, ",{n}");
            }
            let _ = writeln!(s, ",{}", r.cost.total_latency_ns());
        }
        s
    }

    pub fn receivers_csv(&self) -> String {
        let mut s = String::from("receiver,access,objects,chunks,completion_ms,propagation_ms,memory_ns\n");
        for r in &self.receivers {
            let _ = writeln!(
                s,
                "{},{},{},{},{},{},{}",
                r.receiver,
                r.access,
                r.objects,
                r.chunks,
                r.completion_ms(),
                r.propagation_ps as f64 / PS_PER_MS,
                r.memory_ps as f64 / PS_PER_NS
            );
        }
        s
    }

    /// All snapshots as line records.
    pub fn snapshots_text(&self) -> String {
        let mut s = String::from(super::snapshot::HEADER);
        s.push('\n');
        for log in &self.snapshots {
            log.write_records(&mut s);
        }
        s
    }
}
