use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use super::{Graph, NodeId};
use crate::error::{Error, Result};

/// Barabási–Albert graph: a clique of `m + 1` nodes, then each further node
/// attaches to `m` distinct existing nodes chosen with probability
/// proportional to their current degree. Roles are assigned with
/// [`Graph::assign_default_roles`] using the same seed.
pub fn generate_ba(n: usize, m: usize, seed: u64) -> Result<Graph> {
    if m < 1 || n <= m {
        return Err(Error::validation(format!("need n > m >= 1, got n = {n}, m = {m}")));
    }
    let mut g = Graph::new(n);
    // every edge endpoint appears once; sampling uniformly from this list
    // is sampling proportionally to degree
    let mut endpoints: Vec<NodeId> = Vec::with_capacity(2 * m * n);
    for u in 0..=m {
        for v in (u + 1)..=m {
            g.add_edge(u, v)?;
            endpoints.push(u);
            endpoints.push(v);
        }
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut targets: Vec<NodeId> = Vec::with_capacity(m);
    for u in (m + 1)..n {
        targets.clear();
        while targets.len() < m {
            let t = endpoints[rng.gen_range(0..endpoints.len())];
            if !targets.contains(&t) {
                targets.push(t);
            }
        }
        for &t in &targets {
            g.add_edge(u, t)?;
            endpoints.push(u);
            endpoints.push(t);
        }
    }
    g.assign_default_roles(seed);
    Ok(g)
}
