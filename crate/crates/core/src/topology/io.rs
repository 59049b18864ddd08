//! Edge-list text format.
//!
//! ```text
//! # comment
//! 0 1
//! 1 2
//! [roles]
//! 0 origin
//! 2 access
//! ```
//!
//! Nodes are numbered from 0; the node count is one more than the largest id
//! mentioned. Nodes without a role line are core routers.

use std::fmt::Write;

use super::{Graph, NodeId, Role};
use crate::error::{Error, Result};

impl Graph {
    pub fn to_edge_list(&self) -> String {
        let mut out = String::new();
        let _ = writeln!(out, "# nodes {}", self.node_count());
        for (u, v) in self.edges() {
            let _ = writeln!(out, "{u} {v}");
        }
        out.push_str("[roles]\n");
        for (u, role) in self.roles().iter().enumerate() {
            if *role != Role::Core {
                let _ = writeln!(out, "{u} {role}");
            }
        }
        out
    }

    pub fn from_edge_list(text: &str) -> Result<Graph> {
        let mut edges: Vec<(NodeId, NodeId)> = Vec::new();
        let mut roles: Vec<(NodeId, Role)> = Vec::new();
        let mut in_roles = false;
        let mut max_id: Option<NodeId> = None;
        for (i, raw) in text.lines().enumerate() {
            let line_no = i + 1;
            let line = raw.trim();
            if line.is_empty() || line.starts_with('#') {
                continue;
            }
            if line == "[roles]" {
                in_roles = true;
                continue;
            }
            let mut parts = line.split_whitespace();
            let (Some(a), Some(b), None) = (parts.next(), parts.next(), parts.next()) else {
                return Err(Error::parse(line_no, format!("expected two fields, got `{line}`")));
            };
            let u: NodeId = a
                .parse()
                .map_err(|_| Error::parse(line_no, format!("bad node id `{a}`")))?;
            max_id = Some(max_id.map_or(u, |m| m.max(u)));
            if in_roles {
                let role = b.parse().map_err(|e: Error| Error::parse(line_no, e.to_string()))?;
                roles.push((u, role));
            } else {
                let v: NodeId = b
                    .parse()
                    .map_err(|_| Error::parse(line_no, format!("bad node id `{b}`")))?;
                max_id = Some(max_id.map_or(v, |m| m.max(v)));
                edges.push((u, v));
            }
        }
        let n = max_id.map_or(0, |m| m + 1);
        let mut g = Graph::new(n);
        for (u, v) in edges {
            g.add_edge(u, v)?;
        }
        for (u, r) in roles {
            g.set_role(u, r);
        }
        Ok(g)
    }
}
