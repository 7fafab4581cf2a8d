//! Analytic models of the two baseline datapaths.
//!
//! * Fully tiled: one dedicated unit per operation, replicated `R` times,
//!   followed by a synchronisation barrier. Latency is the weighted longest
//!   path through the dataflow graph.
//! * Fully sequential: the degenerate `1-1-1` vector core. Only its
//!   resource base differs (see [`crate::resource::estimate_sequential`]).

use std::collections::BTreeMap;
use std::fmt;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::isa::OpClass;
use crate::vectorcore::{CoreConfig, FuMix};

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum GraphError {
    #[error("dataflow graph contains a cycle")]
    Cyclic,
    #[error("edge {0} -> {1} names an unknown node")]
    UnknownNode(usize, usize),
    #[error("duplicate node id {0}")]
    DuplicateNode(usize),
    #[error("node {0} has non-arithmetic class {1}")]
    NotArithmetic(usize, OpClass),
    #[error("replication must be at least 1")]
    ZeroReplication,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct Node {
    pub id: usize,
    pub class: OpClass,
}

/// An unrolled loop body: operations and their data dependencies.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct DataflowKernel {
    nodes: Vec<Node>,
    edges: Vec<(usize, usize)>,
    replication: usize,
}

impl DataflowKernel {
    /// Builds a graph, rejecting dangling edges and non-arithmetic nodes.
    /// Cycles are reported lazily by the analyses that need an ordering.
    pub fn new(nodes: Vec<Node>, edges: Vec<(usize, usize)>, replication: usize) -> Result<Self, GraphError> {
        if replication == 0 {
            return Err(GraphError::ZeroReplication);
        }
        let mut seen = BTreeMap::new();
        for n in &nodes {
            if !matches!(n.class, OpClass::AddClass | OpClass::MulClass | OpClass::DivClass | OpClass::Convert) {
                return Err(GraphError::NotArithmetic(n.id, n.class));
            }
            if seen.insert(n.id, ()).is_some() {
                return Err(GraphError::DuplicateNode(n.id));
            }
        }
        for &(from, to) in &edges {
            if !seen.contains_key(&from) || !seen.contains_key(&to) {
                return Err(GraphError::UnknownNode(from, to));
            }
        }
        Ok(Self { nodes, edges, replication })
    }

    pub fn nodes(&self) -> &[Node] {
        &self.nodes
    }

    pub fn edges(&self) -> &[(usize, usize)] {
        &self.edges
    }

    pub fn replication(&self) -> usize {
        self.replication
    }

    pub fn with_replication(&self, replication: usize) -> Result<Self, GraphError> {
        Self::new(self.nodes.clone(), self.edges.clone(), replication)
    }

    pub fn op_counts(&self) -> BTreeMap<OpClass, usize> {
        let mut counts = BTreeMap::new();
        for n in &self.nodes {
            *counts.entry(n.class).or_insert(0) += 1;
        }
        counts
    }

    /// Node positions (into `nodes`) in a topological order (Kahn).
    pub fn topological_order(&self) -> Result<Vec<usize>, GraphError> {
        let pos: BTreeMap<usize, usize> = self.nodes.iter().enumerate().map(|(i, n)| (n.id, i)).collect();
        let mut indegree = vec![0usize; self.nodes.len()];
        let mut succ = vec![Vec::new(); self.nodes.len()];
        for &(from, to) in &self.edges {
            succ[pos[&from]].push(pos[&to]);
            indegree[pos[&to]] += 1;
        }
        let mut ready: Vec<usize> = (0..self.nodes.len()).filter(|&i| indegree[i] == 0).rev().collect();
        let mut order = Vec::with_capacity(self.nodes.len());
        while let Some(i) = ready.pop() {
            order.push(i);
            for &j in &succ[i] {
                indegree[j] -= 1;
                if indegree[j] == 0 {
                    ready.push(j);
                }
            }
        }
        if order.len() == self.nodes.len() {
            Ok(order)
        } else {
            Err(GraphError::Cyclic)
        }
    }

    /// Heaviest source-to-sink path where each node weighs `weight(class)`,
    /// returned with the node ids along it.
    pub fn critical_path(&self, weight: impl Fn(OpClass) -> u64) -> Result<(u64, Vec<usize>), GraphError> {
        let order = self.topological_order()?;
        let pos: BTreeMap<usize, usize> = self.nodes.iter().enumerate().map(|(i, n)| (n.id, i)).collect();
        let mut preds = vec![Vec::new(); self.nodes.len()];
        for &(from, to) in &self.edges {
            preds[pos[&to]].push(pos[&from]);
        }
        let mut finish = vec![0u64; self.nodes.len()];
        let mut via: Vec<Option<usize>> = vec![None; self.nodes.len()];
        for &i in &order {
            let best = preds[i].iter().copied().max_by_key(|&p| (finish[p], std::cmp::Reverse(p)));
            let start = best.map_or(0, |p| finish[p]);
            via[i] = best;
            finish[i] = start + weight(self.nodes[i].class);
        }
        let Some(end) = (0..self.nodes.len()).max_by_key(|&i| (finish[i], std::cmp::Reverse(i))) else {
            return Ok((0, Vec::new()));
        };
        let mut path = vec![self.nodes[end].id];
        let mut cur = end;
        while let Some(p) = via[cur] {
            path.push(self.nodes[p].id);
            cur = p;
        }
        path.reverse();
        Ok((finish[end], path))
    }
}

/// Latency (cycles) and resource (slices) of one architecture.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct LatencyResource {
    pub latency_cycles: u64,
    pub slices: u64,
}

/// The three compared datapath styles.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Architecture {
    Tiled,
    Sequential,
    Vector,
}

impl fmt::Display for Architecture {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Architecture::Tiled => "tiled",
            Architecture::Sequential => "sequential",
            Architecture::Vector => "vector",
        })
    }
}

/// Fully tiled latency: critical path weighted by class latencies, plus
/// the barrier. No issue cost (there is no controller) and replicas run in
/// parallel, so replication does not matter.
pub fn tiled_latency(k: &DataflowKernel, cfg: &CoreConfig, barrier_cost: u64) -> Result<u64, GraphError> {
    let (path, _) = k.critical_path(|c| cfg.class_latency(c))?;
    Ok(path + barrier_cost)
}

/// Fully sequential latency of a dataflow kernel: every node issues once
/// and streams all `R` replicas through a single unit.
pub fn sequential_latency(k: &DataflowKernel, cfg: &CoreConfig) -> u64 {
    let r = k.replication() as u64;
    k.nodes().iter().map(|n| cfg.issue_cost + r * cfg.class_latency(n.class)).sum()
}

/// The single-unit-per-class machine: the base config at `1-1-1`.
pub fn sequential_config(base: &CoreConfig) -> CoreConfig {
    base.with_mix(FuMix::symmetric(1))
}
