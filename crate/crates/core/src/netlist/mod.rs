//! And-Inverter Graph netlists with explicit inverter nodes.
//!
//! A [`Netlist`] is immutable once built. Node `0` is always the constant-false
//! node and every gate's children have smaller ids than the gate itself, so the
//! node vector is already a topological order.

mod aiger;
mod builder;
mod gen;
mod perturb;
pub(crate) mod sim;

use std::collections::{BTreeMap, BinaryHeap};
use std::cmp::Reverse;
use std::fmt;

use serde::{Deserialize, Serialize};
use thiserror::Error;

pub use aiger::{emit_aiger, emit_aiger_binary, parse_aiger};
pub use builder::NetlistBuilder;
pub use gen::{
    gen_booth_multiplier, gen_csa_multiplier, AdderCell, Architecture, CellKind, GenMeta,
    Generated,
};
pub use perturb::{perturb, perturb_with_stats, PerturbStats};
pub use sim::{equiv_check, EquivMode, Verdict};

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum NetlistError {
    #[error("parse error at {location}: {message}")]
    Parse { location: String, message: String },
    #[error("sequential AIGER is not supported ({0} latches)")]
    Latches(u64),
    #[error("invalid argument: {0}")]
    Argument(String),
    #[error("structural error: {0}")]
    Structure(String),
}

pub type Result<T, E = NetlistError> = std::result::Result<T, E>;

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(transparent)]
pub struct NodeId(pub u32);

impl NodeId {
    pub const CONST_FALSE: NodeId = NodeId(0);

    #[inline]
    pub fn index(self) -> usize {
        self.0 as usize
    }
}

impl fmt::Display for NodeId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "n{}", self.0)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum NodeKind {
    ConstFalse,
    /// Primary input with its dense ordinal.
    Input(u32),
    Not(NodeId),
    And(NodeId, NodeId),
}

impl NodeKind {
    pub fn children(&self) -> impl Iterator<Item = NodeId> {
        let (a, b) = match *self {
            NodeKind::ConstFalse | NodeKind::Input(_) => (None, None),
            NodeKind::Not(c) => (Some(c), None),
            NodeKind::And(l, r) => (Some(l), Some(r)),
        };
        a.into_iter().chain(b)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub struct Output {
    pub node: NodeId,
    pub inverted: bool,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Netlist {
    nodes: Vec<NodeKind>,
    inputs: Vec<NodeId>,
    outputs: Vec<Output>,
    names: BTreeMap<NodeId, String>,
}

impl Netlist {
    /// Validates and wraps raw parts. Children must precede their parents.
    pub fn new(
        nodes: Vec<NodeKind>,
        inputs: Vec<NodeId>,
        outputs: Vec<Output>,
        names: BTreeMap<NodeId, String>,
    ) -> Result<Self> {
        if nodes.first() != Some(&NodeKind::ConstFalse) {
            return Err(NetlistError::Structure("node 0 must be the constant".into()));
        }
        let mut seen_inputs = 0u32;
        for (i, kind) in nodes.iter().enumerate() {
            match *kind {
                NodeKind::ConstFalse if i != 0 => {
                    return Err(NetlistError::Structure(format!(
                        "second constant node at {i}"
                    )))
                }
                NodeKind::Input(ord) => {
                    let declared = inputs.get(ord as usize).copied();
                    if declared != Some(NodeId(i as u32)) {
                        return Err(NetlistError::Structure(format!(
                            "input node {i} has ordinal {ord} not matching the input list"
                        )));
                    }
                    seen_inputs += 1;
                }
                _ => {}
            }
            for c in kind.children() {
                if c.index() >= i {
                    return Err(NetlistError::Structure(format!(
                        "node {i} references child {} which does not precede it",
                        c.0
                    )));
                }
            }
        }
        if seen_inputs as usize != inputs.len() {
            return Err(NetlistError::Structure("input list has undeclared entries".into()));
        }
        for o in &outputs {
            if o.node.index() >= nodes.len() {
                return Err(NetlistError::Structure(format!(
                    "output references missing node {}",
                    o.node.0
                )));
            }
        }
        Ok(Netlist {
            nodes,
            inputs,
            outputs,
            names,
        })
    }

    pub fn nodes(&self) -> &[NodeKind] {
        &self.nodes
    }

    pub fn node(&self, id: NodeId) -> NodeKind {
        self.nodes[id.index()]
    }

    pub fn len(&self) -> usize {
        self.nodes.len()
    }

    pub fn is_empty(&self) -> bool {
        self.nodes.len() <= 1
    }

    pub fn inputs(&self) -> &[NodeId] {
        &self.inputs
    }

    pub fn outputs(&self) -> &[Output] {
        &self.outputs
    }

    pub fn names(&self) -> &BTreeMap<NodeId, String> {
        &self.names
    }

    pub fn and_count(&self) -> usize {
        self.nodes
            .iter()
            .filter(|k| matches!(k, NodeKind::And(..)))
            .count()
    }

    /// Fanout count of every node, including output references.
    pub fn fanouts(&self) -> Vec<u32> {
        let mut counts = vec![0u32; self.nodes.len()];
        for kind in &self.nodes {
            for c in kind.children() {
                counts[c.index()] += 1;
            }
        }
        for o in &self.outputs {
            counts[o.node.index()] += 1;
        }
        counts
    }

    /// Copy of this netlist with every inverted output replaced by an explicit
    /// NOT node, so each output is a plain node id.
    pub fn with_materialized_outputs(&self) -> Netlist {
        if self.outputs.iter().all(|o| !o.inverted) {
            return self.clone();
        }
        let mut b = NetlistBuilder::from_netlist(self);
        let outputs: Vec<_> = self
            .outputs
            .iter()
            .map(|o| if o.inverted { b.not(o.node) } else { o.node })
            .collect();
        for o in outputs {
            b.add_output(o, false);
        }
        b.finish()
    }

    /// Drops nodes that no output depends on. Inputs are always kept.
    pub fn swept(&self) -> Netlist {
        let mut live = vec![false; self.nodes.len()];
        live[0] = true;
        for &i in &self.inputs {
            live[i.index()] = true;
        }
        for o in &self.outputs {
            live[o.node.index()] = true;
        }
        for i in (0..self.nodes.len()).rev() {
            if live[i] {
                for c in self.nodes[i].children() {
                    live[c.index()] = true;
                }
            }
        }
        let mut remap = vec![NodeId(u32::MAX); self.nodes.len()];
        let mut nodes = Vec::new();
        for (i, kind) in self.nodes.iter().enumerate() {
            if !live[i] {
                continue;
            }
            remap[i] = NodeId(nodes.len() as u32);
            nodes.push(match *kind {
                NodeKind::Not(c) => NodeKind::Not(remap[c.index()]),
                NodeKind::And(l, r) => NodeKind::And(remap[l.index()], remap[r.index()]),
                other => other,
            });
        }
        let inputs = self.inputs.iter().map(|i| remap[i.index()]).collect();
        let outputs = self
            .outputs
            .iter()
            .map(|o| Output {
                node: remap[o.node.index()],
                inverted: o.inverted,
            })
            .collect();
        let names = self
            .names
            .iter()
            .map(|(k, v)| (remap[k.index()], v.clone()))
            .collect();
        Netlist {
            nodes,
            inputs,
            outputs,
            names,
        }
    }
}

/// Leaves first (constant, then inputs by ordinal), then gates in an order
/// where every child precedes its parent; ties broken by smallest id.
pub fn topo_order(netlist: &Netlist) -> Result<Vec<NodeId>> {
    topo_sort_kinds(netlist.nodes())
}

pub(crate) fn topo_sort_kinds(nodes: &[NodeKind]) -> Result<Vec<NodeId>> {
    let n = nodes.len();
    let mut pending = vec![0u32; n];
    let mut users: Vec<Vec<u32>> = vec![Vec::new(); n];
    for (i, kind) in nodes.iter().enumerate() {
        for c in kind.children() {
            if c.index() >= n {
                return Err(NetlistError::Structure(format!(
                    "node {i} references missing node {}",
                    c.0
                )));
            }
            pending[i] += 1;
            users[c.index()].push(i as u32);
        }
    }
    let mut order = Vec::with_capacity(n);
    let mut leaves: Vec<(u8, u32, u32)> = nodes
        .iter()
        .enumerate()
        .filter_map(|(i, k)| match *k {
            NodeKind::ConstFalse => Some((0, 0, i as u32)),
            NodeKind::Input(ord) => Some((1, ord, i as u32)),
            _ => None,
        })
        .collect();
    leaves.sort_unstable();
    let mut ready: BinaryHeap<Reverse<u32>> = BinaryHeap::new();
    let release = |id: u32, ready: &mut BinaryHeap<Reverse<u32>>, pending: &mut [u32]| {
        for &u in &users[id as usize] {
            pending[u as usize] -= 1;
            if pending[u as usize] == 0 {
                ready.push(Reverse(u));
            }
        }
    };
    for &(_, _, id) in &leaves {
        order.push(NodeId(id));
        release(id, &mut ready, &mut pending);
    }
    while let Some(Reverse(id)) = ready.pop() {
        order.push(NodeId(id));
        release(id, &mut ready, &mut pending);
    }
    if order.len() != n {
        return Err(NetlistError::Structure(format!(
            "cycle detected: {} of {n} nodes could not be ordered",
            n - order.len()
        )));
    }
    Ok(order)
}
