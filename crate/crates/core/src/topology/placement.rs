use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use super::{NodeId, Role};
use crate::error::{Error, Result};

/// Which on-path routers store passing chunks.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum PlacementPolicy {
    /// Every router caches.
    Universal,
    /// Only access routers cache.
    Edge,
    /// Every router runs a cache, but chunks are stored only at the on-path
    /// router(s) of highest betweenness.
    Betweenness,
}

impl PlacementPolicy {
    pub const ALL: [PlacementPolicy; 3] = [
        PlacementPolicy::Universal,
        PlacementPolicy::Edge,
        PlacementPolicy::Betweenness,
    ];

    pub fn as_str(self) -> &'static str {
        match self {
            PlacementPolicy::Universal => "universal",
            PlacementPolicy::Edge => "edge",
            PlacementPolicy::Betweenness => "betweenness",
        }
    }
}

impl fmt::Display for PlacementPolicy {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for PlacementPolicy {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.to_ascii_lowercase().as_str() {
            "universal" => Ok(PlacementPolicy::Universal),
            "edge" => Ok(PlacementPolicy::Edge),
            "betweenness" => Ok(PlacementPolicy::Betweenness),
            other => Err(Error::validation(format!("unknown placement `{other}`"))),
        }
    }
}

/// On-path nodes that store a chunk travelling along `path`, in path order.
/// The origin never caches.
pub fn caching_nodes_for(
    policy: PlacementPolicy,
    path: &[NodeId],
    scores: &[f64],
    roles: &[Role],
) -> Result<Vec<NodeId>> {
    if path.is_empty() {
        return Err(Error::validation("empty path"));
    }
    let routers = path.iter().copied().filter(|&u| roles[u] != Role::Origin);
    Ok(match policy {
        PlacementPolicy::Universal => routers.collect(),
        PlacementPolicy::Edge => routers.filter(|&u| roles[u] == Role::Access).collect(),
        PlacementPolicy::Betweenness => {
            let routers: Vec<NodeId> = routers.collect();
            let Some(best) = routers.iter().map(|&u| scores[u]).reduce(f64::max) else {
                return Ok(Vec::new());
            };
            // Brandes sums are not bit-exact across symmetric nodes
            let tol = 1e-9 * best.abs().max(1.0);
            routers
                .into_iter()
                .filter(|&u| best - scores[u] <= tol)
                .collect()
        }
    })
}

/// On-path nodes that run a cache module and are therefore consulted by
/// passing requests, in path order.
pub fn lookup_nodes_for(policy: PlacementPolicy, path: &[NodeId], roles: &[Role]) -> Vec<NodeId> {
    path.iter()
        .copied()
        .filter(|&u| match policy {
            PlacementPolicy::Universal | PlacementPolicy::Betweenness => roles[u] != Role::Origin,
            PlacementPolicy::Edge => roles[u] == Role::Access,
        })
        .collect()
}
