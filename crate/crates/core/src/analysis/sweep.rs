use std::collections::BTreeMap;
use std::fmt::Write;
use std::path::Path;
use std::sync::Arc;

use rayon::prelude::*;

use crate::config::{RunConfig, SweepSpec};
use crate::error::{Error, Result};
use crate::memory::{Capacity, Scheme};
use crate::sim::{run, MemorySpec, MetricsReport};
use crate::topology::PlacementPolicy;

/// Which way a metric improves.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Direction {
    LowerIsBetter,
    HigherIsBetter,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Metric {
    NetworkLoad,
    ServerLoad,
    CacheRequests,
    CacheHits,
    HitRatio,
    CompletionTimeMeanMs,
    PropagationMsTotal,
    MemoryNsTotal,
    SramAccesses,
    DramAccesses,
    DramHit,
    DramInsertEvict,
}

impl Metric {
    pub const ALL: [Metric; 12] = [
        Metric::NetworkLoad,
        Metric::ServerLoad,
        Metric::CacheRequests,
        Metric::CacheHits,
        Metric::HitRatio,
        Metric::CompletionTimeMeanMs,
        Metric::PropagationMsTotal,
        Metric::MemoryNsTotal,
        Metric::SramAccesses,
        Metric::DramAccesses,
        Metric::DramHit,
        Metric::DramInsertEvict,
    ];

    pub fn name(self) -> &'static str {
        match self {
            Metric::NetworkLoad => "network_load",
            Metric::ServerLoad => "server_load",
            Metric::CacheRequests => "cache_requests",
            Metric::CacheHits => "cache_hits",
            Metric::HitRatio => "hit_ratio",
            Metric::CompletionTimeMeanMs => "completion_time_mean_ms",
            Metric::PropagationMsTotal => "propagation_ms_total",
            Metric::MemoryNsTotal => "memory_ns_total",
            Metric::SramAccesses => "sram_accesses",
            Metric::DramAccesses => "dram_accesses",
            Metric::DramHit => "dram_hit",
            Metric::DramInsertEvict => "dram_insert_evict",
        }
    }

    pub fn direction(self) -> Direction {
        match self {
            Metric::CacheHits | Metric::HitRatio => Direction::HigherIsBetter,
            _ => Direction::LowerIsBetter,
        }
    }

    fn index(self) -> usize {
        self as usize
    }
}

/// Metrics that get a gain column in the summary.
pub const GAIN_METRICS: [Metric; 5] = [
    Metric::NetworkLoad,
    Metric::ServerLoad,
    Metric::HitRatio,
    Metric::CompletionTimeMeanMs,
    Metric::DramInsertEvict,
];

/// Scalar metrics of one run, indexed by [`Metric`].
#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub struct RunMetrics([f64; 12]);

impl RunMetrics {
    pub fn from_report(r: &MetricsReport) -> Self {
        let cost = r.total_cost();
        let mut m = RunMetrics::default();
        m.set(Metric::NetworkLoad, r.network_load as f64);
        m.set(Metric::ServerLoad, r.server_load as f64);
        m.set(Metric::CacheRequests, r.cache_requests as f64);
        m.set(Metric::CacheHits, r.cache_hits as f64);
        m.set(Metric::HitRatio, r.hit_ratio());
        m.set(Metric::CompletionTimeMeanMs, r.mean_completion_ms());
        m.set(Metric::PropagationMsTotal, r.propagation_ps() as f64 / 1e9);
        m.set(Metric::MemoryNsTotal, r.memory_ps() as f64 / 1e3);
        m.set(Metric::SramAccesses, cost.sram_accesses() as f64);
        m.set(Metric::DramAccesses, cost.dram_accesses() as f64);
        m.set(Metric::DramHit, cost.count(crate::cost::Tier::Dram, crate::cost::Cause::Hit) as f64);
        m.set(Metric::DramInsertEvict, cost.dram_insert_evict() as f64);
        m
    }

    pub fn get(&self, m: Metric) -> f64 {
        self.0[m.index()]
    }

    pub fn set(&mut self, m: Metric, v: f64) {
        self.0[m.index()] = v;
    }
}

/// Normalized gain of `candidate` over `baseline`, in percent. Above 100
/// means the candidate is better. Two zeros compare as equal.
pub fn gain(metric: Metric, candidate: f64, baseline: f64) -> f64 {
    let (num, den) = match metric.direction() {
        Direction::LowerIsBetter => (baseline, candidate),
        Direction::HigherIsBetter => (candidate, baseline),
    };
    if num == 0.0 && den == 0.0 {
        100.0
    } else {
        num / den * 100.0
    }
}

/// One run of a sweep.
#[derive(Debug, Clone, PartialEq)]
pub struct SweepRow {
    pub scheme: Scheme,
    pub placement: PlacementPolicy,
    /// Seed index within the sweep, not the seed value.
    pub seed: u64,
    pub fast_fraction: f64,
    pub slow_ratio: f64,
    pub capacity: Capacity,
    pub metrics: RunMetrics,
}

impl SweepRow {
    /// Identifies the run in logs and file names.
    pub fn label(&self) -> String {
        format!(
            "{}-{}-s{}-f{}-r{}",
            self.scheme, self.placement, self.seed, self.fast_fraction, self.slow_ratio
        )
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct SweepResult {
    pub rows: Vec<SweepRow>,
    /// Reports of the simulations actually executed, keyed by row label of
    /// the first row that used them.
    pub reports: Vec<(String, MetricsReport)>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
struct DedupKey {
    scheme: Scheme,
    placement: PlacementPolicy,
    seed: u64,
    capacity: Capacity,
}

/// Runs every configuration of `spec` on a pool of `threads` workers.
/// Configurations that resolve to identical cache capacities share a run.
pub fn run_sweep(spec: &SweepSpec, base_dir: &Path, threads: usize) -> Result<SweepResult> {
    spec.validate()?;
    let base = &spec.base;
    let (catalog, trace) = base.workload.build(base.seed, base_dir)?;
    let (catalog, trace) = (Arc::new(catalog), Arc::new(trace));
    let chunks = catalog.total_chunks();

    let mut graphs = Vec::new();
    for s in 0..spec.seeds {
        let mut topo = base.topology.clone();
        if let crate::config::TopologySpec::Ba { seed, .. } = &mut topo {
            *seed = Some(seed.unwrap_or(base.seed) + s);
        }
        graphs.push(Arc::new(topo.build(base.seed + s, base_dir)?));
    }

    let mut rows = Vec::new();
    let mut unique: Vec<(DedupKey, RunConfig, String)> = Vec::new();
    let mut seen = BTreeMap::new();
    for &placement in &spec.placements {
        for &fast_fraction in &spec.fast_fractions {
            for &slow_ratio in &spec.slow_ratios {
                for &scheme in &spec.schemes {
                    for seed in 0..spec.seeds {
                        let memory = MemorySpec::CatalogFraction {
                            fast_fraction,
                            slow_ratio,
                        };
                        let capacity = memory.capacity(scheme, chunks)?;
                        let row = SweepRow {
                            scheme,
                            placement,
                            seed,
                            fast_fraction,
                            slow_ratio,
                            capacity,
                            metrics: RunMetrics::default(),
                        };
                        let key = DedupKey {
                            scheme,
                            placement,
                            seed,
                            capacity,
                        };
                        if let std::collections::btree_map::Entry::Vacant(e) = seen.entry(key) {
                            e.insert(unique.len());
                            let mut cfg = RunConfig::from_base(base, scheme, placement, memory);
                            cfg.seed = base.seed + seed;
                            unique.push((key, cfg, row.label()));
                        }
                        rows.push((key, row));
                    }
                }
            }
        }
    }

    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(threads.max(1))
        .build()
        .map_err(|e| Error::validation(format!("thread pool: {e}")))?;
    let results: Vec<Result<MetricsReport>> = pool.install(|| {
        unique
            .par_iter()
            .map(|(key, cfg, label)| {
                let sim = cfg
                    .with_inputs(graphs[key.seed as usize].clone(), catalog.clone(), trace.clone())
                    .and_then(|c| run(&c));
                sim.map_err(|e| Error::Run {
                    run: label.clone(),
                    message: e.to_string(),
                })
            })
            .collect()
    });
    let mut reports = Vec::with_capacity(results.len());
    for (r, (_, _, label)) in results.into_iter().zip(&unique) {
        reports.push((label.clone(), r?));
    }
    let rows = rows
        .into_iter()
        .map(|(key, mut row)| {
            row.metrics = RunMetrics::from_report(&reports[seen[&key]].1);
            row
        })
        .collect();
    Ok(SweepResult { rows, reports })
}

const RUN_COLUMNS: &str = "scheme,placement,seed,fast_fraction,slow_ratio,l1_slots,l2_slots";

pub fn runs_csv(rows: &[SweepRow]) -> String {
    let mut s = String::from(RUN_COLUMNS);
    for m in Metric::ALL {
        s.push(',');
        s.push_str(m.name());
    }
    s.push('\n');
    for r in rows {
        let _ = write!(
            s,
            "{},{},{},{},{},{},{}",
            r.scheme,
            r.placement,
            r.seed,
            r.fast_fraction,
            r.slow_ratio,
            r.capacity.l1_slots,
            r.capacity.l2_slots
        );
        for m in Metric::ALL {
            let _ = write!(s, ",{}", r.metrics.get(m));
        }
        s.push('\n');
    }
    s
}

pub fn parse_runs_csv(text: &str) -> Result<Vec<SweepRow>> {
    let mut lines = text.lines().enumerate();
    let (_, header) = lines.next().ok_or_else(|| Error::parse(1, "empty file"))?;
    let cols: Vec<&str> = header.trim().split(',').collect();
    let pos = |name: &str| {
        cols.iter()
            .position(|c| *c == name)
            .ok_or_else(|| Error::parse(1, format!("missing column `{name}`")))
    };
    let fixed: Vec<usize> = RUN_COLUMNS.split(',').map(pos).collect::<Result<_>>()?;
    let metric_pos: Vec<usize> = Metric::ALL.iter().map(|m| pos(m.name())).collect::<Result<_>>()?;
    let mut rows = Vec::new();
    for (i, line) in lines {
        let ln = i + 1;
        if line.trim().is_empty() {
            continue;
        }
        let f: Vec<&str> = line.trim().split(',').collect();
        if f.len() != cols.len() {
            return Err(Error::parse(ln, format!("expected {} fields, found {}", cols.len(), f.len())));
        }
        let num = |j: usize| -> Result<f64> {
            f[j].parse::<f64>()
                .map_err(|_| Error::parse(ln, format!("bad number `{}`", f[j])))
        };
        let int = |j: usize| -> Result<u64> {
            f[j].parse::<u64>()
                .map_err(|_| Error::parse(ln, format!("bad integer `{}`", f[j])))
        };
        let mut metrics = RunMetrics::default();
        for (m, &j) in Metric::ALL.iter().zip(&metric_pos) {
            metrics.set(*m, num(j)?);
        }
        rows.push(SweepRow {
            scheme: f[fixed[0]].parse().map_err(|e: Error| Error::parse(ln, e.to_string()))?,
            placement: f[fixed[1]].parse().map_err(|e: Error| Error::parse(ln, e.to_string()))?,
            seed: int(fixed[2])?,
            fast_fraction: num(fixed[3])?,
            slow_ratio: num(fixed[4])?,
            capacity: Capacity::new(int(fixed[5])? as usize, int(fixed[6])? as usize),
            metrics,
        });
    }
    Ok(rows)
}

/// Per-configuration means over seeds and the OPC-over-LRU gains.
#[derive(Debug, Clone, PartialEq)]
pub struct SummaryRow {
    pub placement: PlacementPolicy,
    pub fast_fraction: f64,
    pub slow_ratio: f64,
    pub seeds: usize,
    /// Mean metrics per scheme present.
    pub means: BTreeMap<Scheme, RunMetrics>,
}

impl SummaryRow {
    /// Gain of OPC over LRU. A scheme missing from the sweep is compared
    /// with itself.
    pub fn gain(&self, metric: Metric) -> f64 {
        let lru = self.means.get(&Scheme::Lru).or_else(|| self.means.get(&Scheme::Opc));
        let opc = self.means.get(&Scheme::Opc).or(lru);
        match (opc, lru) {
            (Some(o), Some(l)) => gain(metric, o.get(metric), l.get(metric)),
            _ => 100.0,
        }
    }
}

/// Groups rows by (placement, fast fraction, slow ratio) in first-seen order.
pub fn summarize(rows: &[SweepRow]) -> Vec<SummaryRow> {
    type Key = (PlacementPolicy, u64, u64);
    let mut order: Vec<Key> = Vec::new();
    let mut groups: BTreeMap<Key, BTreeMap<Scheme, Vec<&SweepRow>>> = BTreeMap::new();
    for r in rows {
        let k = (r.placement, r.fast_fraction.to_bits(), r.slow_ratio.to_bits());
        if !groups.contains_key(&k) {
            order.push(k);
        }
        groups.entry(k).or_default().entry(r.scheme).or_default().push(r);
    }
    order
        .into_iter()
        .map(|k| {
            let by_scheme = &groups[&k];
            let mut means = BTreeMap::new();
            let mut seeds = 0;
            for (&scheme, rs) in by_scheme {
                seeds = seeds.max(rs.len());
                let mut m = RunMetrics::default();
                for metric in Metric::ALL {
                    let total: f64 = rs.iter().map(|r| r.metrics.get(metric)).sum();
                    m.set(metric, total / rs.len() as f64);
                }
                means.insert(scheme, m);
            }
            SummaryRow {
                placement: k.0,
                fast_fraction: f64::from_bits(k.1),
                slow_ratio: f64::from_bits(k.2),
                seeds,
                means,
            }
        })
        .collect()
}

fn gain_header(m: Metric) -> String {
    match m.direction() {
        Direction::LowerIsBetter => format!("{}_gain_pct(lru/opc)", m.name()),
        Direction::HigherIsBetter => format!("{}_gain_pct(opc/lru)", m.name()),
    }
}

pub fn summary_csv(rows: &[SummaryRow]) -> String {
    let mut s = String::from("placement,fast_fraction,slow_ratio,seeds");
    for scheme in [Scheme::Lru, Scheme::Opc] {
        for m in Metric::ALL {
            let _ = write!(s, ",{}_{}", scheme, m.name());
        }
    }
    for m in GAIN_METRICS {
        let _ = write!(s, ",{}", gain_header(m));
    }
    s.push('\n');
    for r in rows {
        let _ = write!(s, "{},{},{},{}", r.placement, r.fast_fraction, r.slow_ratio, r.seeds);
        for scheme in [Scheme::Lru, Scheme::Opc] {
            for m in Metric::ALL {
                match r.means.get(&scheme) {
                    Some(v) => {
                        let _ = write!(s, ",{}", v.get(m));
                    }
                    None => s.push(','),
                }
            }
        }
        for m in GAIN_METRICS {
            let _ = write!(s, ",{}", r.gain(m));
        }
        s.push('\n');
    }
    s
}
