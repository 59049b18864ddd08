//! TOML run configurations and sweep specifications.
//!
//! Unknown keys are rejected. Relative file paths are resolved against the
//! directory holding the config file. [`RunConfig::resolved`] fills in every
//! defaulted seed so the emitted config reproduces the run exactly.

use std::path::{Path, PathBuf};
use std::sync::Arc;

use serde::de::DeserializeOwned;
use serde::{Deserialize, Serialize};

use crate::chunk::ObjectId;
use crate::error::{Error, Result};
use crate::memory::Scheme;
use crate::opc::OpcOptions;
use crate::sim::{LookupScope, MemorySpec, SimConfig, SnapshotSchedule, DEFAULT_LINK_DELAY_MS};
use crate::topology::{generate_ba, Graph, PlacementPolicy};
use crate::workload::{
    generate_catalog, generate_requests, default_classes, Catalog, CatalogObject, Trace, TrafficClass,
    TrafficClassParams,
};

fn default_delay() -> f64 {
    DEFAULT_LINK_DELAY_MS
}

fn default_scale() -> f64 {
    0.001
}

fn default_placement() -> PlacementPolicy {
    PlacementPolicy::Universal
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case", deny_unknown_fields)]
pub enum TopologySpec {
    /// Scale-free graph; roles assigned by degree.
    Ba {
        nodes: usize,
        m: usize,
        /// Defaults to the run seed.
        #[serde(default, skip_serializing_if = "Option::is_none")]
        seed: Option<u64>,
    },
    /// Origin at node 0, a single access node at the far end.
    Line { nodes: usize },
    /// Edge-list file with a roles section.
    File { path: PathBuf },
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ObjectSpec {
    pub name: String,
    pub size_chunks: u32,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case", deny_unknown_fields)]
pub enum WorkloadSpec {
    /// Parametric catalog and request stream. Without `classes` the built-in
    /// web/p2p/video/other mix is used with object counts times `scale`
    /// (default 0.001).
    Generated {
        #[serde(default = "default_scale")]
        scale: f64,
        #[serde(default, skip_serializing_if = "Option::is_none")]
        classes: Option<Vec<TrafficClassParams>>,
        receivers: usize,
        requests_per_receiver: usize,
        #[serde(default, skip_serializing_if = "Option::is_none")]
        seed: Option<u64>,
    },
    /// Objects and per-receiver request lists spelled out.
    Explicit {
        objects: Vec<ObjectSpec>,
        requests: Vec<Vec<String>>,
    },
    /// Catalog and trace CSV files.
    Files { catalog: PathBuf, trace: PathBuf },
}

/// Everything a sweep varies is left out here.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct BaseConfig {
    #[serde(default)]
    pub seed: u64,
    #[serde(default = "default_delay")]
    pub link_delay_ms: f64,
    #[serde(default)]
    pub lookup_scope: LookupScope,
    #[serde(default)]
    pub opc: OpcOptions,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub snapshots: Option<SnapshotSchedule>,
    pub topology: TopologySpec,
    pub workload: WorkloadSpec,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RunConfig {
    #[serde(default)]
    pub seed: u64,
    pub scheme: Scheme,
    #[serde(default = "default_placement")]
    pub placement: PlacementPolicy,
    #[serde(default = "default_delay")]
    pub link_delay_ms: f64,
    #[serde(default)]
    pub lookup_scope: LookupScope,
    #[serde(default)]
    pub opc: OpcOptions,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub snapshots: Option<SnapshotSchedule>,
    pub memory: MemorySpec,
    pub topology: TopologySpec,
    pub workload: WorkloadSpec,
}

fn parse_toml<T: DeserializeOwned>(text: &str) -> Result<T> {
    toml::from_str(text).map_err(|e| {
        let key = e
            .span()
            .and_then(|s| text.get(s))
            .map(|s| s.trim().trim_matches('"').to_string())
            .filter(|s| !s.is_empty() && s.len() <= 64 && !s.contains('\n'))
            .unwrap_or_else(|| "<document>".into());
        Error::config(key, e.message().trim().to_string())
    })
}

fn read(path: &Path) -> Result<String> {
    std::fs::read_to_string(path).map_err(|e| Error::Io(format!("{}: {e}", path.display())))
}

fn resolve(base_dir: &Path, p: &Path) -> PathBuf {
    if p.is_absolute() {
        p.to_path_buf()
    } else {
        base_dir.join(p)
    }
}

impl TopologySpec {
    pub fn build(&self, run_seed: u64, base_dir: &Path) -> Result<Graph> {
        match self {
            TopologySpec::Ba { nodes, m, seed } => {
                if *m == 0 || *nodes <= *m {
                    return Err(Error::config("topology.m", "need 1 <= m < nodes"));
                }
                let seed = seed.unwrap_or(run_seed);
                let mut g = generate_ba(*nodes, *m, seed).map_err(|e| Error::config("topology", e.to_string()))?;
                g.assign_default_roles(seed);
                Ok(g)
            }
            TopologySpec::Line { nodes } => {
                Graph::line(*nodes).map_err(|e| Error::config("topology.nodes", e.to_string()))
            }
            TopologySpec::File { path } => {
                let text = read(&resolve(base_dir, path))?;
                Graph::from_edge_list(&text)
            }
        }
    }
}

impl WorkloadSpec {
    pub fn build(&self, run_seed: u64, base_dir: &Path) -> Result<(Catalog, Trace)> {
        match self {
            WorkloadSpec::Generated {
                scale,
                classes,
                receivers,
                requests_per_receiver,
                seed,
            } => {
                if !(*scale > 0.0 && scale.is_finite()) {
                    return Err(Error::config("workload.scale", "must be positive"));
                }
                if *receivers == 0 {
                    return Err(Error::config("workload.receivers", "must be positive"));
                }
                let params = classes.clone().unwrap_or_else(|| default_classes(*scale));
                let seed = seed.unwrap_or(run_seed);
                let catalog =
                    generate_catalog(&params, seed).map_err(|e| Error::config("workload.classes", e.to_string()))?;
                let trace = generate_requests(&catalog, &params, *receivers, *requests_per_receiver, seed)
                    .map_err(|e| Error::config("workload", e.to_string()))?;
                Ok((catalog, trace))
            }
            WorkloadSpec::Explicit { objects, requests } => {
                let objects = objects
                    .iter()
                    .map(|o| {
                        Ok(CatalogObject {
                            id: ObjectId::new(&o.name).map_err(|e| Error::config("workload.objects.name", e.to_string()))?,
                            class: TrafficClass::Other,
                            size_chunks: o.size_chunks,
                        })
                    })
                    .collect::<Result<Vec<_>>>()?;
                let catalog =
                    Catalog::from_objects(objects).map_err(|e| Error::config("workload.objects", e.to_string()))?;
                let lists = requests
                    .iter()
                    .map(|l| l.iter().map(ObjectId::new).collect::<Result<Vec<_>>>())
                    .collect::<Result<Vec<_>>>()
                    .map_err(|e| Error::config("workload.requests", e.to_string()))?;
                let trace = Trace::new(lists);
                trace
                    .validate(&catalog)
                    .map_err(|e| Error::config("workload.requests", e.to_string()))?;
                Ok((catalog, trace))
            }
            WorkloadSpec::Files { catalog, trace } => {
                let c = Catalog::from_csv(&read(&resolve(base_dir, catalog))?)?;
                let t = Trace::from_csv(&read(&resolve(base_dir, trace))?)?;
                t.validate(&c).map_err(|e| Error::config("workload.trace", e.to_string()))?;
                Ok((c, t))
            }
        }
    }

    fn resolved(&self, run_seed: u64) -> Self {
        let mut w = self.clone();
        if let WorkloadSpec::Generated { seed, .. } = &mut w {
            seed.get_or_insert(run_seed);
        }
        w
    }
}

impl TopologySpec {
    fn resolved(&self, run_seed: u64) -> Self {
        let mut t = self.clone();
        if let TopologySpec::Ba { seed, .. } = &mut t {
            seed.get_or_insert(run_seed);
        }
        t
    }
}

impl RunConfig {
    pub fn from_toml_str(text: &str) -> Result<Self> {
        parse_toml(text)
    }

    pub fn load(path: &Path) -> Result<Self> {
        Self::from_toml_str(&read(path)?)
    }

    pub fn from_base(base: &BaseConfig, scheme: Scheme, placement: PlacementPolicy, memory: MemorySpec) -> Self {
        RunConfig {
            seed: base.seed,
            scheme,
            placement,
            link_delay_ms: base.link_delay_ms,
            lookup_scope: base.lookup_scope,
            opc: base.opc,
            snapshots: base.snapshots,
            memory,
            topology: base.topology.clone(),
            workload: base.workload.clone(),
        }
    }

    /// Same run with every defaulted seed written out.
    pub fn resolved(&self) -> Self {
        let mut c = self.clone();
        c.topology = self.topology.resolved(self.seed);
        c.workload = self.workload.resolved(self.seed);
        c
    }

    pub fn to_toml(&self) -> String {
        toml::to_string(self).expect("config serializes")
    }

    /// Builds the topology and workload and assembles a simulation config.
    pub fn build(&self, base_dir: &Path) -> Result<SimConfig> {
        let graph = self.topology.build(self.seed, base_dir)?;
        let (catalog, trace) = self.workload.build(self.seed, base_dir)?;
        self.with_inputs(Arc::new(graph), Arc::new(catalog), Arc::new(trace))
    }

    /// Assembles a simulation config around prebuilt inputs.
    pub fn with_inputs(&self, graph: Arc<Graph>, catalog: Arc<Catalog>, trace: Arc<Trace>) -> Result<SimConfig> {
        let mut cfg = SimConfig::new(graph, self.placement, self.scheme, self.memory, catalog, trace);
        cfg.link_delay_ms = self.link_delay_ms;
        cfg.lookup_scope = self.lookup_scope;
        cfg.opc = self.opc;
        cfg.snapshots = self.snapshots;
        cfg.seed = self.seed;
        cfg.validate()?;
        Ok(cfg)
    }
}

fn default_seeds() -> u64 {
    10
}

fn default_fractions() -> Vec<f64> {
    vec![0.0001, 0.001, 0.01]
}

fn default_ratios() -> Vec<f64> {
    vec![1.0, 2.0, 5.0, 10.0, 20.0]
}

fn default_placements() -> Vec<PlacementPolicy> {
    PlacementPolicy::ALL.to_vec()
}

fn default_schemes() -> Vec<Scheme> {
    vec![Scheme::Lru, Scheme::Opc]
}

/// Cartesian sweep over memory sizes, placements and schemes, repeated over
/// `seeds` topology seeds (`base.seed`, `base.seed + 1`, ...).
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SweepSpec {
    #[serde(default = "default_seeds")]
    pub seeds: u64,
    /// Fast memory as a fraction of the catalog's chunks (LRU entries).
    #[serde(default = "default_fractions")]
    pub fast_fractions: Vec<f64>,
    /// Slow-memory chunks per fast-memory LRU entry.
    #[serde(default = "default_ratios")]
    pub slow_ratios: Vec<f64>,
    #[serde(default = "default_placements")]
    pub placements: Vec<PlacementPolicy>,
    #[serde(default = "default_schemes")]
    pub schemes: Vec<Scheme>,
    pub base: BaseConfig,
}

impl SweepSpec {
    pub fn from_toml_str(text: &str) -> Result<Self> {
        let spec: SweepSpec = parse_toml(text)?;
        spec.validate()?;
        Ok(spec)
    }

    pub fn load(path: &Path) -> Result<Self> {
        Self::from_toml_str(&read(path)?)
    }

    pub fn validate(&self) -> Result<()> {
        let axes = [
            ("seeds", self.seeds == 0),
            ("fast_fractions", self.fast_fractions.is_empty()),
            ("slow_ratios", self.slow_ratios.is_empty()),
            ("placements", self.placements.is_empty()),
            ("schemes", self.schemes.is_empty()),
        ];
        for (key, empty) in axes {
            if empty {
                return Err(Error::config(key, "axis must not be empty"));
            }
        }
        for &f in &self.fast_fractions {
            if !(f >= 0.0 && f.is_finite()) {
                return Err(Error::config("fast_fractions", format!("bad fraction {f}")));
            }
        }
        for &r in &self.slow_ratios {
            if !(r >= 0.0 && r.is_finite()) {
                return Err(Error::config("slow_ratios", format!("bad ratio {r}")));
            }
        }
        Ok(())
    }

    pub fn to_toml(&self) -> String {
        toml::to_string(self).expect("spec serializes")
    }
}
