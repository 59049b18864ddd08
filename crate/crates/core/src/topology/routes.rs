use std::collections::VecDeque;

use super::{Graph, NodeId};
use crate::error::{Error, Result};

const UNREACHABLE: u32 = u32::MAX;

/// All-pairs hop distances and next hops. Among equally short routes the
/// smallest-numbered neighbor is taken at every step.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Routes {
    n: usize,
    dist: Vec<u32>,
    next: Vec<NodeId>,
}

pub fn shortest_paths(g: &Graph) -> Result<Routes> {
    Routes::compute(g)
}

impl Routes {
    pub fn compute(g: &Graph) -> Result<Self> {
        let n = g.node_count();
        let mut dist = vec![UNREACHABLE; n * n];
        let mut queue = VecDeque::new();
        for src in 0..n {
            let row = &mut dist[src * n..(src + 1) * n];
            row[src] = 0;
            queue.push_back(src);
            while let Some(u) = queue.pop_front() {
                for &v in g.neighbors(u) {
                    if row[v] == UNREACHABLE {
                        row[v] = row[u] + 1;
                        queue.push_back(v);
                    }
                }
            }
            if row.contains(&UNREACHABLE) {
                return Err(Error::Topology("graph is not connected".into()));
            }
        }
        let mut next = vec![0; n * n];
        for u in 0..n {
            for t in 0..n {
                next[u * n + t] = if u == t {
                    u
                } else {
                    let want = dist[u * n + t] - 1;
                    // distances are symmetric, so dist[w][t] == dist[t][w]
                    *g.neighbors(u)
                        .iter()
                        .find(|&&w| dist[t * n + w] == want)
                        .expect("a shortest-path neighbor exists")
                };
            }
        }
        Ok(Routes { n, dist, next })
    }

    pub fn node_count(&self) -> usize {
        self.n
    }

    pub fn distance(&self, from: NodeId, to: NodeId) -> u32 {
        self.dist[from * self.n + to]
    }

    pub fn next_hop(&self, from: NodeId, to: NodeId) -> NodeId {
        self.next[from * self.n + to]
    }

    /// Nodes on the route, both ends included.
    pub fn path(&self, from: NodeId, to: NodeId) -> Vec<NodeId> {
        let mut p = Vec::with_capacity(self.distance(from, to) as usize + 1);
        let mut u = from;
        p.push(u);
        while u != to {
            u = self.next_hop(u, to);
            p.push(u);
        }
        p
    }
}
