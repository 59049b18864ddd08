//! Acceptance suite. Prints one PASS/FAIL line per criterion and exits
//! non-zero if any criterion fails.

use std::collections::{BTreeMap, VecDeque};
use std::path::Path;
use std::sync::Arc;
use std::time::Instant;

use opc_core::analysis::{behavioral_stats, run_sweep, summarize, Metric, SummaryRow, SweepResult};
use opc_core::config::{BaseConfig, SweepSpec, TopologySpec, WorkloadSpec};
use opc_core::memory::{capacity_from_config, MemoryConfig, Scheme};
use opc_core::sim::{run, LookupScope, MemorySpec, SimConfig, SnapshotSchedule};
use opc_core::topology::{Graph, PlacementPolicy};
use opc_core::workload::{Catalog, CatalogObject, Trace, TrafficClass, ZipfTable};
use opc_core::{
    Capacity, Cause, Chunk, ChunkCache, ChunkId, LruChunkCache, ObjectId, OpcCache, Tier,
};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

type Check = Result<String, String>;

fn ensure(cond: bool, msg: impl FnOnce() -> String) -> Result<(), String> {
    if cond {
        Ok(())
    } else {
        Err(msg())
    }
}

fn oid(s: &str) -> ObjectId {
    ObjectId::new(s).unwrap()
}

fn cid(o: &ObjectId, r: u32) -> ChunkId {
    ChunkId::new(o.clone(), r).unwrap()
}

fn chunk(o: &ObjectId, r: u32) -> Chunk {
    Chunk::metadata(cid(o, r), 1500)
}

// ---------------------------------------------------------------- 1

fn memory_sizing() -> Check {
    let lru = capacity_from_config(&MemoryConfig::reference_router(Scheme::Lru), Scheme::Lru).unwrap();
    let opc = capacity_from_config(&MemoryConfig::reference_router(Scheme::Opc), Scheme::Opc).unwrap();
    ensure(lru.l1_slots == 688_128, || format!("LRU entries {}", lru.l1_slots))?;
    ensure(opc.l1_slots == 655_360, || format!("OPC entries {}", opc.l1_slots))?;
    let ratio = opc.l2_slots as f64 / opc.l1_slots as f64;
    ensure((ratio - 10.9).abs() <= 0.05, || format!("fast:slow ratio 1:{ratio:.3}"))?;
    Ok(format!(
        "LRU {} entries, OPC {} entries, OPC fast:slow 1:{ratio:.2}",
        lru.l1_slots, opc.l1_slots
    ))
}

// ---------------------------------------------------------------- 2

fn looped_pass(cache: &mut dyn ChunkCache, n: u32) -> u64 {
    let o = oid("big");
    let mut hits = 0;
    for r in 1..=n {
        if cache.lookup(&cid(&o, r)).is_hit() {
            hits += 1;
        } else {
            cache.insert(&chunk(&o, r)).unwrap();
        }
    }
    hits
}

fn looped_replacement() -> Check {
    let (n, m) = (150, 100);
    let mut lru = LruChunkCache::new(Capacity::new(m, m));
    let mut opc = OpcCache::new(Capacity::new(m, m));
    looped_pass(&mut lru, n);
    looped_pass(&mut opc, n);
    let lru_hits = looped_pass(&mut lru, n);
    let opc_hits = looped_pass(&mut opc, n);
    ensure(lru_hits == 0 && opc_hits == 100, || {
        format!("second pass hits: LRU {lru_hits}, OPC {opc_hits}")
    })?;
    Ok(format!("second pass hits: LRU {lru_hits}, OPC {opc_hits}"))
}

// ---------------------------------------------------------------- 3

/// Random operation biased toward in-sequence inserts so caches fill up.
fn random_op(rng: &mut ChaCha8Rng, objects: &[ObjectId], sizes: &[u32], cache: &OpcCache) -> (bool, ChunkId) {
    let i = rng.gen_range(0..objects.len());
    let o = &objects[i];
    let last = cache.last_chunk_id(o).unwrap_or(0);
    let rank = if rng.gen_bool(0.6) && last < sizes[i] {
        last + 1
    } else {
        rng.gen_range(1..=sizes[i])
    };
    (rng.gen_bool(0.5), cid(o, rank))
}

fn no_gap_invariant() -> Check {
    let ops_per_capacity = 1_000_000;
    let mut total = 0;
    for (k, &l2) in [10usize, 100, 1000].iter().enumerate() {
        let l1 = (l2 / 4).max(2);
        let mut rng = ChaCha8Rng::seed_from_u64(k as u64);
        let n_objects = l1 * 3;
        let objects: Vec<ObjectId> = (0..n_objects).map(|i| oid(&format!("o{i}"))).collect();
        let sizes: Vec<u32> = (0..n_objects).map(|_| rng.gen_range(1..=(l2 as u32 / 2).max(2))).collect();
        let mut c = OpcCache::new(Capacity::new(l1, l2));
        for step in 0..ops_per_capacity {
            let (is_insert, id) = random_op(&mut rng, &objects, &sizes, &c);
            if is_insert {
                c.insert(&Chunk::metadata(id, 1500)).unwrap();
            } else {
                c.lookup(&id);
            }
            // cheap check every step, full walk on a stride for the large case
            if l2 <= 100 || step % 16 == 0 {
                let report = c.verify_integrity();
                ensure(report.is_ok(), || {
                    format!("capacity {l2}, op {step}: {:?}", report.violations)
                })?;
                for o in c.lru_order() {
                    let last = c.last_chunk_id(&o).unwrap();
                    ensure((1..=last).all(|r| c.contains(&cid(&o, r))), || {
                        format!("capacity {l2}, op {step}: gap in {o}")
                    })?;
                    ensure(!c.contains(&cid(&o, last + 1)), || {
                        format!("capacity {l2}, op {step}: rank past last cached for {o}")
                    })?;
                }
            }
            total += 1;
        }
    }
    Ok(format!("{total} operations over capacities 10/100/1000, no violations"))
}

// ---------------------------------------------------------------- 4

/// Object-level OPC described directly: an ordered list of (object, last)
/// pairs and a slot counter.
struct NaiveOpc {
    l1: usize,
    l2: usize,
    list: VecDeque<(ObjectId, u32)>,
}

impl NaiveOpc {
    fn used(&self) -> usize {
        self.list.iter().map(|(_, n)| *n as usize).sum()
    }

    fn pos(&self, o: &ObjectId) -> Option<usize> {
        self.list.iter().position(|(x, _)| x == o)
    }

    fn lookup(&mut self, id: &ChunkId) -> bool {
        match self.pos(&id.object) {
            Some(p) if self.list[p].1 >= id.rank => {
                let e = self.list.remove(p).unwrap();
                self.list.push_front(e);
                true
            }
            _ => false,
        }
    }

    /// Takes one chunk from the least recent object other than `keep`.
    fn steal(&mut self, keep: Option<&ObjectId>) -> bool {
        let mut p = self.list.len();
        while p > 0 {
            p -= 1;
            if Some(&self.list[p].0) != keep {
                self.list[p].1 -= 1;
                if self.list[p].1 == 0 {
                    self.list.remove(p);
                }
                return true;
            }
            // only the tail may be skipped
            if p + 1 < self.list.len() {
                break;
            }
        }
        false
    }

    fn insert(&mut self, id: &ChunkId) {
        match self.pos(&id.object) {
            None if id.rank == 1 && self.l1 > 0 && self.l2 > 0 => {
                if self.list.len() == self.l1 {
                    self.list.pop_back();
                }
                if self.used() == self.l2 {
                    self.steal(None);
                }
                self.list.push_front((id.object.clone(), 1));
            }
            Some(p) if self.list[p].1 + 1 == id.rank => {
                if self.used() == self.l2 && !self.steal(Some(&id.object)) {
                    return;
                }
                let p = self.pos(&id.object).unwrap();
                self.list[p].1 += 1;
            }
            _ => {}
        }
    }
}

/// Chunk-level LRU as a plain recency vector.
struct NaiveLru {
    cap: usize,
    list: Vec<ChunkId>,
}

impl NaiveLru {
    fn lookup(&mut self, id: &ChunkId) -> bool {
        match self.list.iter().position(|x| x == id) {
            Some(p) => {
                let x = self.list.remove(p);
                self.list.insert(0, x);
                true
            }
            None => false,
        }
    }

    fn insert(&mut self, id: &ChunkId) {
        if self.cap == 0 || self.list.contains(id) {
            return;
        }
        if self.list.len() == self.cap {
            self.list.pop();
        }
        self.list.insert(0, id.clone());
    }
}

fn oracle_equivalence() -> Check {
    let ops = 100_000;
    let mut hits = (0u64, 0u64);
    for seed in 0..20u64 {
        let mut rng = ChaCha8Rng::seed_from_u64(1000 + seed);
        let l1 = rng.gen_range(1..=12);
        let l2 = rng.gen_range(1..=60);
        let objects: Vec<ObjectId> = (0..30).map(|i| oid(&format!("o{i}"))).collect();
        let sizes: Vec<u32> = (0..30).map(|_| rng.gen_range(1..=25)).collect();

        let mut opc = OpcCache::new(Capacity::new(l1, l2));
        let mut naive = NaiveOpc {
            l1,
            l2,
            list: VecDeque::new(),
        };
        for step in 0..ops {
            let (is_insert, id) = random_op(&mut rng, &objects, &sizes, &opc);
            if is_insert {
                opc.insert(&Chunk::metadata(id.clone(), 1500)).unwrap();
                naive.insert(&id);
            } else {
                let a = opc.lookup(&id).is_hit();
                let b = naive.lookup(&id);
                ensure(a == b, || format!("OPC seed {seed} op {step}: {id} hit {a} vs reference {b}"))?;
                hits.0 += a as u64;
            }
        }
        let mut want: Vec<(ObjectId, u32)> = naive.list.iter().cloned().collect();
        want.sort();
        let mut got: Vec<(ObjectId, u32)> = opc
            .lru_order()
            .into_iter()
            .map(|o| {
                let n = opc.last_chunk_id(&o).unwrap();
                (o, n)
            })
            .collect();
        got.sort();
        ensure(got == want, || format!("OPC seed {seed}: final last_chunk_id differs"))?;

        let cap = rng.gen_range(0..=40);
        let mut lru = LruChunkCache::new(Capacity::new(cap, cap));
        let mut naive = NaiveLru { cap, list: Vec::new() };
        for step in 0..ops {
            let i = rng.gen_range(0..objects.len());
            let id = cid(&objects[i], rng.gen_range(1..=sizes[i]));
            if rng.gen_bool(0.5) {
                lru.insert(&Chunk::metadata(id.clone(), 1500)).unwrap();
                naive.insert(&id);
            } else {
                let a = lru.lookup(&id).is_hit();
                let b = naive.lookup(&id);
                ensure(a == b, || format!("LRU seed {seed} op {step}: {id} hit {a} vs reference {b}"))?;
                hits.1 += a as u64;
            }
        }
        ensure(lru.lru_order() == naive.list, || format!("LRU seed {seed}: final order differs"))?;
    }
    Ok(format!(
        "20 seeds x {ops} ops each for OPC and LRU, identical outcomes ({} / {} hits)",
        hits.0, hits.1
    ))
}

// ---------------------------------------------------------------- 5

fn line_config(scheme: Scheme) -> SimConfig {
    let cat = Catalog::from_objects(vec![CatalogObject {
        id: oid("o"),
        class: TrafficClass::Web,
        size_chunks: 2,
    }])
    .unwrap();
    SimConfig::new(
        Arc::new(Graph::line(3).unwrap()),
        PlacementPolicy::Universal,
        scheme,
        MemorySpec::Slots {
            l1_slots: 10,
            l2_slots: 10,
        },
        Arc::new(cat),
        Arc::new(Trace::new(vec![vec![oid("o"), oid("o")]])),
    )
}

fn cost_identities() -> Check {
    // DRAM hit charge equals 1 + last - rank for every hit
    let mut rng = ChaCha8Rng::seed_from_u64(5);
    let objects: Vec<ObjectId> = (0..20).map(|i| oid(&format!("o{i}"))).collect();
    let sizes: Vec<u32> = (0..20).map(|_| rng.gen_range(1..=30)).collect();
    let mut c = OpcCache::new(Capacity::new(8, 120));
    let mut expected = 0u64;
    for _ in 0..200_000 {
        let (is_insert, id) = random_op(&mut rng, &objects, &sizes, &c);
        if is_insert {
            c.insert(&Chunk::metadata(id, 1500)).unwrap();
        } else {
            let last = c.last_chunk_id(&id.object);
            if c.lookup(&id).is_hit() {
                expected += 1 + last.unwrap() as u64 - id.rank as u64;
            }
        }
    }
    let got = c.cost().count(Tier::Dram, Cause::Hit);
    ensure(got == expected, || format!("DRAM hit accesses {got}, expected {expected}"))?;

    // object eviction: 1 DRAM + n SRAM
    let mut c = OpcCache::new(Capacity::new(2, 20));
    let a = oid("a");
    for r in 1..=7 {
        c.insert(&chunk(&a, r)).unwrap();
    }
    c.insert(&chunk(&oid("b"), 1)).unwrap();
    let before = *c.cost();
    let freed = c.evict_tail_object().unwrap();
    let d_dram = c.cost().count(Tier::Dram, Cause::Evict) - before.count(Tier::Dram, Cause::Evict);
    let d_sram = c.cost().count(Tier::Sram, Cause::Evict) - before.count(Tier::Sram, Cause::Evict);
    ensure(freed == 7 && d_dram == 1 && d_sram == 7, || {
        format!("evicting 7 chunks charged {d_dram} DRAM + {d_sram} SRAM")
    })?;

    // line scenario counters, enumerated by hand
    let rep = run(&line_config(Scheme::Opc)).unwrap();
    let node = |u: usize| rep.routers.iter().find(|r| r.node == u).unwrap().cost;
    let acc = node(2);
    let r1 = node(1);
    let want_acc = [
        (Tier::Sram, Cause::MissLookup, 2),
        (Tier::Sram, Cause::Insert, 2),
        (Tier::Dram, Cause::Insert, 2),
        (Tier::Sram, Cause::Hit, 2),
        (Tier::Dram, Cause::Hit, 3),
        (Tier::Sram, Cause::Evict, 0),
        (Tier::Dram, Cause::Evict, 0),
        (Tier::Dram, Cause::MissLookup, 0),
    ];
    let want_r1 = [
        (Tier::Sram, Cause::MissLookup, 2),
        (Tier::Sram, Cause::Insert, 2),
        (Tier::Dram, Cause::Insert, 2),
        (Tier::Sram, Cause::Hit, 0),
        (Tier::Dram, Cause::Hit, 0),
    ];
    for (name, model, want) in [("acc", acc, &want_acc[..]), ("r1", r1, &want_r1[..])] {
        for &(t, c, n) in want {
            let got = model.count(t, c);
            ensure(got == n, || format!("{name} {t:?}/{c:?}: {got}, expected {n}"))?;
        }
    }
    ensure(acc.total_latency_ps() == 277_700 && r1.total_latency_ps() == 111_800, || {
        format!("latency acc {} ps, r1 {} ps", acc.total_latency_ps(), r1.total_latency_ps())
    })?;
    ensure(rep.receivers[0].completion_ps == 80_000_389_500, || {
        format!("completion {} ps", rep.receivers[0].completion_ps)
    })?;
    Ok(format!(
        "{expected} DRAM hit reads match; eviction 1 DRAM + 7 SRAM; line scenario exact (acc {} ns, r1 {} ns)",
        acc.total_latency_ns(),
        r1.total_latency_ns()
    ))
}

// ---------------------------------------------------------------- 6-9

const FRACTIONS: [f64; 3] = [0.0001, 0.001, 0.01];
const SEEDS: u64 = 5;

fn desk_base() -> BaseConfig {
    BaseConfig {
        seed: 1,
        link_delay_ms: 5.0,
        lookup_scope: LookupScope::CacheModules,
        opc: Default::default(),
        snapshots: None,
        topology: TopologySpec::Ba {
            nodes: 20,
            m: 2,
            seed: None,
        },
        workload: WorkloadSpec::Generated {
            scale: 1.0 / 60.0,
            classes: None,
            receivers: 20,
            requests_per_receiver: 100,
            seed: Some(7),
        },
    }
}

fn sweep(fractions: &[f64], ratios: &[f64]) -> SweepResult {
    let spec = SweepSpec {
        seeds: SEEDS,
        fast_fractions: fractions.to_vec(),
        slow_ratios: ratios.to_vec(),
        placements: PlacementPolicy::ALL.to_vec(),
        schemes: vec![Scheme::Lru, Scheme::Opc],
        base: desk_base(),
    };
    run_sweep(&spec, Path::new("."), 0).expect("sweep runs")
}

fn find(summary: &[SummaryRow], p: PlacementPolicy, f: f64, r: f64) -> &SummaryRow {
    summary
        .iter()
        .find(|s| s.placement == p && s.fast_fraction == f && s.slow_ratio == r)
        .expect("configuration present")
}

fn network_gains(size_sweep: &SweepResult) -> Check {
    let catalog_chunks = {
        let (c, _) = desk_base().workload.build(0, Path::new(".")).unwrap();
        c.total_chunks()
    };
    ensure((50_000..=200_000).contains(&catalog_chunks), || {
        format!("catalog has {catalog_chunks} chunks")
    })?;
    // every point, every seed
    for row in &size_sweep.rows {
        if row.scheme != Scheme::Opc {
            continue;
        }
        let lru = size_sweep
            .rows
            .iter()
            .find(|l| {
                l.scheme == Scheme::Lru
                    && l.placement == row.placement
                    && l.seed == row.seed
                    && l.fast_fraction == row.fast_fraction
            })
            .unwrap();
        let (oh, lh) = (row.metrics.get(Metric::HitRatio), lru.metrics.get(Metric::HitRatio));
        let (os, ls) = (row.metrics.get(Metric::ServerLoad), lru.metrics.get(Metric::ServerLoad));
        ensure(oh >= lh && os <= ls, || {
            format!(
                "{} seed {} fraction {}: hit ratio OPC {oh:.4} vs LRU {lh:.4}, server load {os} vs {ls}",
                row.placement, row.seed, row.fast_fraction
            )
        })?;
    }
    let summary = summarize(&size_sweep.rows);
    let mut notes = Vec::new();
    for p in PlacementPolicy::ALL {
        for m in [Metric::NetworkLoad, Metric::ServerLoad, Metric::HitRatio] {
            let g: Vec<f64> = FRACTIONS.iter().map(|&f| find(&summary, p, f, 11.0).gain(m)).collect();
            ensure(g.iter().all(|&x| x >= 100.0), || format!("{p} {}: gains {g:.1?}", m.name()))?;
            ensure(g[0] > g[2], || format!("{p} {}: gain at 0.01% {:.1} <= at 1% {:.1}", m.name(), g[0], g[2]))?;
        }
        let g: Vec<f64> = FRACTIONS
            .iter()
            .map(|&f| find(&summary, p, f, 11.0).gain(Metric::NetworkLoad))
            .collect();
        notes.push(format!("{p} {:.0}/{:.0}/{:.0}%", g[0], g[1], g[2]));
    }
    Ok(format!("catalog {catalog_chunks} chunks; network-load gains {}", notes.join(", ")))
}

fn ratio_trend(ratio_sweep: &SweepResult) -> Check {
    let summary = summarize(&ratio_sweep.rows);
    let mut notes = Vec::new();
    for p in PlacementPolicy::ALL {
        for m in [Metric::NetworkLoad, Metric::ServerLoad, Metric::HitRatio] {
            let g: BTreeMap<u32, f64> = [1.0, 2.0, 5.0, 10.0, 20.0]
                .iter()
                .map(|&r| (r as u32, find(&summary, p, 0.001, r).gain(m)))
                .collect();
            ensure(g[&1] >= 100.0, || format!("{p} {} gain at 1:1 is {:.1}", m.name(), g[&1]))?;
            ensure(g[&1] <= g[&2] && g[&2] <= g[&5], || {
                format!("{p} {}: not non-decreasing 1:1..1:5 {:.1}/{:.1}/{:.1}", m.name(), g[&1], g[&2], g[&5])
            })?;
            ensure((g[&20] - g[&10]).abs() < 10.0, || {
                format!("{p} {}: 1:10 {:.1} vs 1:20 {:.1}", m.name(), g[&10], g[&20])
            })?;
            if m == Metric::NetworkLoad {
                notes.push(format!(
                    "{p} {:.0}/{:.0}/{:.0}/{:.0}/{:.0}%",
                    g[&1], g[&2], g[&5], g[&10], g[&20]
                ));
            }
        }
    }
    Ok(format!("network-load gains at 1:1..1:20: {}", notes.join(", ")))
}

fn dram_reduction(size_sweep: &SweepResult) -> Check {
    let f = FRACTIONS[0];
    let mut worst: f64 = 0.0;
    for o in size_sweep.rows.iter().filter(|r| r.scheme == Scheme::Opc && r.fast_fraction == f) {
        let l = size_sweep
            .rows
            .iter()
            .find(|l| l.scheme == Scheme::Lru && l.placement == o.placement && l.seed == o.seed && l.fast_fraction == f)
            .unwrap();
        let (a, b) = (o.metrics.get(Metric::DramInsertEvict), l.metrics.get(Metric::DramInsertEvict));
        ensure(a < b, || format!("{} seed {}: OPC {a} vs LRU {b} insert/evict DRAM accesses", o.placement, o.seed))?;
        worst = worst.max(a / b);
    }
    Ok(format!("OPC insert+evict DRAM at most {:.0}% of LRU's", worst * 100.0))
}

fn order(v: &[f64]) -> Vec<usize> {
    let mut idx: Vec<usize> = (0..v.len()).collect();
    idx.sort_by(|&a, &b| v[a].partial_cmp(&v[b]).unwrap());
    idx
}

fn completion_consistency(size_sweep: &SweepResult) -> Check {
    let summary = summarize(&size_sweep.rows);
    let mut notes = Vec::new();
    for p in PlacementPolicy::ALL {
        let net: Vec<f64> = FRACTIONS.iter().map(|&f| find(&summary, p, f, 11.0).gain(Metric::NetworkLoad)).collect();
        let ct: Vec<f64> = FRACTIONS
            .iter()
            .map(|&f| find(&summary, p, f, 11.0).gain(Metric::CompletionTimeMeanMs))
            .collect();
        ensure(order(&net) == order(&ct), || {
            format!("{p}: network-load gains {net:.1?} vs completion gains {ct:.1?}")
        })?;
        notes.push(format!("{p} {:.0}/{:.0}/{:.0}%", ct[0], ct[1], ct[2]));
    }
    let mut worst: f64 = 0.0;
    for r in &size_sweep.rows {
        let share = r.metrics.get(Metric::MemoryNsTotal) * 1e-6 / r.metrics.get(Metric::PropagationMsTotal);
        worst = worst.max(share);
    }
    ensure(worst < 1e-3, || format!("memory latency reaches {:.4}% of propagation", worst * 100.0))?;
    Ok(format!(
        "completion gains {}; memory share at most {:.5}%",
        notes.join(", "),
        worst * 100.0
    ))
}

// ---------------------------------------------------------------- 10

fn poisoning() -> Check {
    let huge = oid("huge");
    let small: Vec<ObjectId> = (0..400).map(|i| oid(&format!("s{i}"))).collect();
    let mut objects = vec![CatalogObject {
        id: huge.clone(),
        class: TrafficClass::Video,
        size_chunks: 2000,
    }];
    for s in &small {
        objects.push(CatalogObject {
            id: s.clone(),
            class: TrafficClass::Web,
            size_chunks: 4,
        });
    }
    let catalog = Arc::new(Catalog::from_objects(objects).unwrap());
    let popularity = ZipfTable::new(small.len(), 0.8);
    let mut rng = ChaCha8Rng::seed_from_u64(10);
    let mut list = Vec::new();
    for i in 0..3000 {
        if i == 200 {
            list.push(huge.clone());
        }
        list.push(small[popularity.sample(&mut rng) - 1].clone());
    }
    let trace = Arc::new(Trace::new(vec![list]));

    // equal fast-memory bytes: 120 LRU entries
    let sram = 120 * 40;
    let mut results = BTreeMap::new();
    for scheme in [Scheme::Lru, Scheme::Opc] {
        let mut cfg = SimConfig::new(
            Arc::new(Graph::line(2).unwrap()),
            PlacementPolicy::Universal,
            scheme,
            MemorySpec::Bytes {
                sram_bytes: sram,
                dram_bytes: 11 * 120 * 1500,
            },
            catalog.clone(),
            trace.clone(),
        );
        cfg.snapshots = Some(SnapshotSchedule::IntervalMs(500.0));
        results.insert(scheme, run(&cfg).unwrap());
    }
    let (lru, opc) = (&results[&Scheme::Lru], &results[&Scheme::Opc]);
    ensure(opc.hit_ratio() > lru.hit_ratio(), || {
        format!("hit ratio OPC {:.4} vs LRU {:.4}", opc.hit_ratio(), lru.hit_ratio())
    })?;
    let stats = behavioral_stats(&opc.snapshots).unwrap();
    let h = stats.object(&huge).ok_or("huge object never cached under OPC")?;
    ensure(h.caching_efficiency == 0.0, || format!("huge object efficiency {}", h.caching_efficiency))?;
    // present at some point, then gone for good
    let held: Vec<bool> = opc
        .snapshots
        .iter()
        .map(|s| s.routers.iter().any(|r| r.cached(&huge).is_some()))
        .collect();
    let first = held.iter().position(|&x| x).ok_or("huge object absent from every snapshot")?;
    let gone = held[first..].iter().position(|&x| !x).map(|i| i + first);
    let gone = gone.ok_or("huge object still cached at the end")?;
    ensure(held[gone..].iter().all(|&x| !x), || "huge object came back".to_string())?;
    Ok(format!(
        "hit ratio OPC {:.3} vs LRU {:.3}; huge object efficiency 0, cached in snapshots {first}..{gone}, none after",
        opc.hit_ratio(),
        lru.hit_ratio()
    ))
}

// ---------------------------------------------------------------- 11

fn determinism() -> Check {
    let base = desk_base();
    let mut run_cfg = opc_core::config::RunConfig::from_base(
        &base,
        Scheme::Opc,
        PlacementPolicy::Betweenness,
        MemorySpec::CatalogFraction {
            fast_fraction: 0.001,
            slow_ratio: 11.0,
        },
    );
    run_cfg.snapshots = Some(SnapshotSchedule::IntervalMs(2000.0));
    let a = run(&run_cfg.build(Path::new(".")).unwrap()).unwrap();
    let b = run(&run_cfg.build(Path::new(".")).unwrap()).unwrap();
    let same = a.to_kv() == b.to_kv()
        && a.routers_csv() == b.routers_csv()
        && a.receivers_csv() == b.receivers_csv()
        && a.snapshots_text() == b.snapshots_text();
    ensure(same, || "reports differ between identical runs".into())?;
    Ok(format!(
        "two runs byte-identical ({} snapshot lines)",
        a.snapshots_text().lines().count()
    ))
}

fn main() {
    let mut failures = 0;
    let mut report = |n: u32, name: &str, f: &dyn Fn() -> Check| {
        let t = Instant::now();
        let result = f();
        let secs = t.elapsed().as_secs_f64();
        match result {
            Ok(msg) => println!("criterion {n:>2} PASS  {name}: {msg} [{secs:.1}s]"),
            Err(msg) => {
                failures += 1;
                println!("criterion {n:>2} FAIL  {name}: {msg} [{secs:.1}s]");
            }
        }
    };
    report(1, "memory sizing", &memory_sizing);
    report(2, "looped replacement", &looped_replacement);
    report(3, "no-gap invariant", &no_gap_invariant);
    report(4, "oracle equivalence", &oracle_equivalence);
    report(5, "cost-model identities", &cost_identities);
    let t = Instant::now();
    let size_sweep = sweep(&FRACTIONS, &[11.0]);
    let ratio_sweep = sweep(&[0.001], &[1.0, 2.0, 5.0, 10.0, 20.0]);
    println!(
        "(desk sweeps: {} runs executed in {:.1}s)",
        size_sweep.reports.len() + ratio_sweep.reports.len(),
        t.elapsed().as_secs_f64()
    );
    report(6, "directional network gains", &|| network_gains(&size_sweep));
    report(7, "fast:slow ratio trend", &|| ratio_trend(&ratio_sweep));
    report(8, "insert/evict DRAM reduction", &|| dram_reduction(&size_sweep));
    report(9, "completion-time consistency", &|| completion_consistency(&size_sweep));
    report(10, "large-object poisoning", &poisoning);
    report(11, "determinism", &determinism);
    if failures > 0 {
        println!("{failures} criteria failed");
        std::process::exit(1);
    }
    println!("all criteria passed");
}
