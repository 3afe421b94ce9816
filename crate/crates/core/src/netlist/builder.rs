use std::collections::BTreeMap;

use rustc_hash::FxHashMap;

use super::{Netlist, NodeId, NodeKind, Output};

/// Structurally hashed netlist construction.
///
/// AND children are stored sorted, double inversions collapse, and the
/// trivial identities (`x & 0`, `x & 1`, `x & x`, `x & !x`) fold away.
#[derive(Debug, Clone)]
pub struct NetlistBuilder {
    nodes: Vec<NodeKind>,
    inputs: Vec<NodeId>,
    outputs: Vec<Output>,
    names: BTreeMap<NodeId, String>,
    strash: FxHashMap<NodeKind, NodeId>,
}

impl Default for NetlistBuilder {
    fn default() -> Self {
        Self::new()
    }
}

impl NetlistBuilder {
    pub fn new() -> Self {
        NetlistBuilder {
            nodes: vec![NodeKind::ConstFalse],
            inputs: Vec::new(),
            outputs: Vec::new(),
            names: BTreeMap::new(),
            strash: FxHashMap::default(),
        }
    }

    /// Starts from the nodes and inputs of `netlist`, without its outputs.
    pub fn from_netlist(netlist: &Netlist) -> Self {
        let mut b = NetlistBuilder {
            nodes: netlist.nodes().to_vec(),
            inputs: netlist.inputs().to_vec(),
            outputs: Vec::new(),
            names: netlist.names().clone(),
            strash: FxHashMap::default(),
        };
        for (i, kind) in b.nodes.iter().enumerate() {
            if matches!(kind, NodeKind::Not(_) | NodeKind::And(..)) {
                b.strash.entry(*kind).or_insert(NodeId(i as u32));
            }
        }
        b
    }

    pub fn const_true(&mut self) -> NodeId {
        self.not(NodeId::CONST_FALSE)
    }

    pub fn input(&mut self) -> NodeId {
        let id = NodeId(self.nodes.len() as u32);
        self.nodes.push(NodeKind::Input(self.inputs.len() as u32));
        self.inputs.push(id);
        id
    }

    pub fn named_input(&mut self, name: impl Into<String>) -> NodeId {
        let id = self.input();
        self.names.insert(id, name.into());
        id
    }

    pub fn kind(&self, id: NodeId) -> NodeKind {
        self.nodes[id.index()]
    }

    pub fn len(&self) -> usize {
        self.nodes.len()
    }

    pub fn nodes(&self) -> &[NodeKind] {
        &self.nodes
    }

    pub fn is_empty(&self) -> bool {
        self.nodes.len() <= 1
    }

    fn push(&mut self, kind: NodeKind) -> NodeId {
        if let Some(&id) = self.strash.get(&kind) {
            return id;
        }
        let id = NodeId(self.nodes.len() as u32);
        self.nodes.push(kind);
        self.strash.insert(kind, id);
        id
    }

    /// If `id` is a NOT node, its child.
    pub fn negated_child(&self, id: NodeId) -> Option<NodeId> {
        match self.nodes[id.index()] {
            NodeKind::Not(c) => Some(c),
            _ => None,
        }
    }

    fn is_true(&self, id: NodeId) -> bool {
        self.negated_child(id) == Some(NodeId::CONST_FALSE)
    }

    pub fn not(&mut self, a: NodeId) -> NodeId {
        if let Some(c) = self.negated_child(a) {
            return c;
        }
        self.push(NodeKind::Not(a))
    }

    pub fn and(&mut self, a: NodeId, b: NodeId) -> NodeId {
        if a == NodeId::CONST_FALSE || b == NodeId::CONST_FALSE {
            return NodeId::CONST_FALSE;
        }
        if self.is_true(a) {
            return b;
        }
        if self.is_true(b) {
            return a;
        }
        if a == b {
            return a;
        }
        if self.negated_child(a) == Some(b) || self.negated_child(b) == Some(a) {
            return NodeId::CONST_FALSE;
        }
        let (l, r) = if a <= b { (a, b) } else { (b, a) };
        self.push(NodeKind::And(l, r))
    }

    pub fn or(&mut self, a: NodeId, b: NodeId) -> NodeId {
        let na = self.not(a);
        let nb = self.not(b);
        let n = self.and(na, nb);
        self.not(n)
    }

    /// `(a | b) & !(a & b)`, rooted at a positive AND.
    pub fn xor(&mut self, a: NodeId, b: NodeId) -> NodeId {
        let both = self.and(a, b);
        let nboth = self.not(both);
        let either = self.or(a, b);
        self.and(either, nboth)
    }

    /// `(a | b) & (c | (a & b))`, rooted at a positive AND.
    pub fn maj(&mut self, a: NodeId, b: NodeId, c: NodeId) -> NodeId {
        let ab = self.and(a, b);
        let aorb = self.or(a, b);
        let c_or_ab = self.or(c, ab);
        self.and(aorb, c_or_ab)
    }

    /// Full-adder cell; returns `(sum, carry)`.
    pub fn full_adder(&mut self, a: NodeId, b: NodeId, c: NodeId) -> (NodeId, NodeId) {
        let x = self.xor(a, b);
        let sum = self.xor(x, c);
        let carry = self.maj(a, b, c);
        (sum, carry)
    }

    /// Half-adder cell; returns `(sum, carry)`.
    pub fn half_adder(&mut self, a: NodeId, b: NodeId) -> (NodeId, NodeId) {
        (self.xor(a, b), self.and(a, b))
    }

    pub fn add_output(&mut self, node: NodeId, inverted: bool) {
        self.outputs.push(Output { node, inverted });
    }

    pub fn finish(self) -> Netlist {
        Netlist::new(self.nodes, self.inputs, self.outputs, self.names)
            .expect("builder maintains netlist invariants")
    }
}
