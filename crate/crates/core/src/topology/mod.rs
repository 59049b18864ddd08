//! Router topologies: scale-free generation, shortest-path routing,
//! betweenness centrality and cache placement.

mod ba;
mod betweenness;
mod io;
mod placement;
mod routes;

use std::fmt;
use std::str::FromStr;

use rand::seq::SliceRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

pub use ba::generate_ba;
pub use betweenness::betweenness;
pub use placement::{caching_nodes_for, lookup_nodes_for, PlacementPolicy};
pub use routes::{shortest_paths, Routes};

pub type NodeId = usize;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Role {
    Core,
    /// Hosts receivers.
    Access,
    /// Hosts the content origin; never caches.
    Origin,
}

impl Role {
    pub fn as_str(self) -> &'static str {
        match self {
            Role::Core => "core",
            Role::Access => "access",
            Role::Origin => "origin",
        }
    }
}

impl fmt::Display for Role {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for Role {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "core" => Ok(Role::Core),
            "access" => Ok(Role::Access),
            "origin" => Ok(Role::Origin),
            other => Err(Error::validation(format!("unknown role `{other}`"))),
        }
    }
}

/// Undirected simple graph with per-node roles.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Graph {
    adj: Vec<Vec<NodeId>>,
    roles: Vec<Role>,
}

impl Graph {
    /// `n` isolated core nodes.
    pub fn new(n: usize) -> Self {
        Graph {
            adj: vec![Vec::new(); n],
            roles: vec![Role::Core; n],
        }
    }

    /// Line `0 - 1 - ... - (n-1)` with the origin at node 0 and the only
    /// access node at `n-1`.
    pub fn line(n: usize) -> Result<Self> {
        if n < 2 {
            return Err(Error::Topology("a line needs at least two nodes".into()));
        }
        let mut g = Graph::new(n);
        for i in 1..n {
            g.add_edge(i - 1, i)?;
        }
        g.roles[0] = Role::Origin;
        g.roles[n - 1] = Role::Access;
        Ok(g)
    }

    pub fn node_count(&self) -> usize {
        self.adj.len()
    }

    pub fn edge_count(&self) -> usize {
        self.adj.iter().map(Vec::len).sum::<usize>() / 2
    }

    /// Adds `u - v`; self loops are rejected and parallel edges ignored.
    pub fn add_edge(&mut self, u: NodeId, v: NodeId) -> Result<()> {
        let n = self.node_count();
        if u >= n || v >= n {
            return Err(Error::Topology(format!("edge {u}-{v} references a missing node")));
        }
        if u == v {
            return Err(Error::Topology(format!("self loop at {u}")));
        }
        if let Err(pos) = self.adj[u].binary_search(&v) {
            self.adj[u].insert(pos, v);
            let pos = self.adj[v].binary_search(&u).unwrap_err();
            self.adj[v].insert(pos, u);
        }
        Ok(())
    }

    pub fn has_edge(&self, u: NodeId, v: NodeId) -> bool {
        self.adj.get(u).is_some_and(|a| a.binary_search(&v).is_ok())
    }

    /// Neighbors in ascending order.
    pub fn neighbors(&self, u: NodeId) -> &[NodeId] {
        &self.adj[u]
    }

    pub fn degree(&self, u: NodeId) -> usize {
        self.adj[u].len()
    }

    /// Edges as `(u, v)` with `u < v`, sorted.
    pub fn edges(&self) -> Vec<(NodeId, NodeId)> {
        let mut out = Vec::with_capacity(self.edge_count());
        for (u, nb) in self.adj.iter().enumerate() {
            for &v in nb {
                if u < v {
                    out.push((u, v));
                }
            }
        }
        out
    }

    pub fn role(&self, u: NodeId) -> Role {
        self.roles[u]
    }

    pub fn roles(&self) -> &[Role] {
        &self.roles
    }

    pub fn set_role(&mut self, u: NodeId, role: Role) {
        self.roles[u] = role;
    }

    pub fn origin(&self) -> Option<NodeId> {
        self.roles.iter().position(|&r| r == Role::Origin)
    }

    pub fn access_nodes(&self) -> Vec<NodeId> {
        (0..self.node_count())
            .filter(|&u| self.roles[u] == Role::Access)
            .collect()
    }

    pub fn is_connected(&self) -> bool {
        let n = self.node_count();
        if n == 0 {
            return false;
        }
        let mut seen = vec![false; n];
        let mut stack = vec![0];
        seen[0] = true;
        let mut count = 1;
        while let Some(u) = stack.pop() {
            for &v in &self.adj[u] {
                if !seen[v] {
                    seen[v] = true;
                    count += 1;
                    stack.push(v);
                }
            }
        }
        count == n
    }

    /// Default role assignment: nodes whose degree is at most the median
    /// degree are edge nodes. One of them, picked with `seed`, hosts the
    /// origin and the others become access nodes; everything else is core.
    pub fn assign_default_roles(&mut self, seed: u64) {
        let n = self.node_count();
        let mut degrees: Vec<usize> = (0..n).map(|u| self.degree(u)).collect();
        degrees.sort_unstable();
        let median = degrees[(n - 1) / 2];
        let edge: Vec<NodeId> = (0..n).filter(|&u| self.degree(u) <= median).collect();
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let origin = *edge.choose(&mut rng).expect("graph has nodes");
        for u in 0..n {
            self.roles[u] = if u == origin {
                Role::Origin
            } else if self.degree(u) <= median {
                Role::Access
            } else {
                Role::Core
            };
        }
    }

    /// Connected, exactly one origin, at least one access node.
    pub fn validate(&self) -> Result<()> {
        if !self.is_connected() {
            return Err(Error::Topology("graph is not connected".into()));
        }
        let origins = self.roles.iter().filter(|&&r| r == Role::Origin).count();
        if origins != 1 {
            return Err(Error::Topology(format!("expected one origin node, found {origins}")));
        }
        if !self.roles.contains(&Role::Access) {
            return Err(Error::Topology("no access node".into()));
        }
        Ok(())
    }
}
