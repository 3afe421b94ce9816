//! Hash-consed e-graph over Boolean operators.
//!
//! Classes are merged through a union-find; congruence is restored by
//! [`EGraph::rebuild`] using per-class parent lists. `XOR3` and `MAJ3` are
//! fully symmetric, so their children are kept sorted.

mod audit;
mod pattern;

use std::fmt;

use rustc_hash::FxHashMap;
use serde::Serialize;
use smallvec::SmallVec;
use thiserror::Error;

use crate::netlist::{topo_order, Netlist, NodeKind};

pub use audit::{congruence_audit, semantic_audit, to_dot, AuditError};
pub use pattern::{Pattern, PatternNode, Subst};
pub(crate) use pattern::child_orders;

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum EGraphError {
    #[error("operator {op} takes {expected} children, got {got}")]
    Arity {
        op: Op,
        expected: usize,
        got: usize,
    },
    #[error("unknown e-class {0}")]
    UnknownClass(u32),
    #[error("pattern parse error: {0}")]
    Pattern(String),
}

pub type Result<T> = std::result::Result<T, EGraphError>;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Default, Serialize)]
#[serde(transparent)]
pub struct Id(pub u32);

impl Id {
    pub fn index(self) -> usize {
        self.0 as usize
    }
}

impl fmt::Display for Id {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "c{}", self.0)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Op {
    Const0,
    Var(u32),
    Not,
    And,
    Or,
    Xor3,
    Maj3,
    Fa,
    Fst,
    Snd,
    Roots,
}

impl Op {
    /// `None` for the variadic `ROOTS`.
    pub fn arity(self) -> Option<usize> {
        Some(match self {
            Op::Const0 | Op::Var(_) => 0,
            Op::Not | Op::Fst | Op::Snd => 1,
            Op::And | Op::Or => 2,
            Op::Xor3 | Op::Maj3 | Op::Fa => 3,
            Op::Roots => return None,
        })
    }

    pub fn is_symmetric3(self) -> bool {
        matches!(self, Op::Xor3 | Op::Maj3 | Op::Fa)
    }

    pub fn parse(s: &str) -> Option<Op> {
        Some(match s {
            "0" => Op::Const0,
            "not" => Op::Not,
            "and" => Op::And,
            "or" => Op::Or,
            "xor3" => Op::Xor3,
            "maj3" => Op::Maj3,
            "fa" => Op::Fa,
            "fst" => Op::Fst,
            "snd" => Op::Snd,
            "roots" => Op::Roots,
            _ => {
                let n = s.strip_prefix('v')?;
                Op::Var(n.parse().ok()?)
            }
        })
    }
}

impl fmt::Display for Op {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Op::Const0 => write!(f, "0"),
            Op::Var(n) => write!(f, "v{n}"),
            Op::Not => write!(f, "not"),
            Op::And => write!(f, "and"),
            Op::Or => write!(f, "or"),
            Op::Xor3 => write!(f, "xor3"),
            Op::Maj3 => write!(f, "maj3"),
            Op::Fa => write!(f, "fa"),
            Op::Fst => write!(f, "fst"),
            Op::Snd => write!(f, "snd"),
            Op::Roots => write!(f, "roots"),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct ENode {
    pub op: Op,
    pub children: SmallVec<[Id; 3]>,
}

impl ENode {
    pub fn new(op: Op, children: &[Id]) -> Self {
        ENode {
            op,
            children: SmallVec::from_slice(children),
        }
    }

    pub fn leaf(op: Op) -> Self {
        ENode {
            op,
            children: SmallVec::new(),
        }
    }

    fn canonicalize(&mut self, uf: &UnionFind) {
        for c in self.children.iter_mut() {
            *c = uf.find(*c);
        }
        if self.op.is_symmetric3() {
            self.children.sort_unstable();
        }
    }
}

impl fmt::Display for ENode {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.children.is_empty() {
            return write!(f, "{}", self.op);
        }
        write!(f, "({}", self.op)?;
        for c in &self.children {
            write!(f, " {c}")?;
        }
        write!(f, ")")
    }
}

#[derive(Debug, Clone, Default)]
struct UnionFind {
    parent: Vec<u32>,
}

impl UnionFind {
    fn make(&mut self) -> Id {
        let id = self.parent.len() as u32;
        self.parent.push(id);
        Id(id)
    }

    fn find(&self, mut id: Id) -> Id {
        while self.parent[id.index()] != id.0 {
            id = Id(self.parent[id.index()]);
        }
        id
    }

    fn find_compress(&mut self, id: Id) -> Id {
        let root = self.find(id);
        let mut cur = id;
        while cur != root {
            let next = Id(self.parent[cur.index()]);
            self.parent[cur.index()] = root.0;
            cur = next;
        }
        root
    }
}

#[derive(Debug, Clone, Default)]
pub struct EClass {
    pub nodes: Vec<ENode>,
    parents: Vec<(ENode, Id)>,
}

#[derive(Debug, Clone, Default)]
pub struct EGraph {
    uf: UnionFind,
    classes: Vec<Option<EClass>>,
    memo: FxHashMap<ENode, Id>,
    worklist: Vec<Id>,
    live_classes: usize,
}

impl EGraph {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn find(&self, id: Id) -> Id {
        self.uf.find(id)
    }

    /// Number of canonical classes.
    pub fn class_count(&self) -> usize {
        self.live_classes
    }

    /// Total e-nodes across classes.
    pub fn node_count(&self) -> usize {
        self.classes.iter().flatten().map(|c| c.nodes.len()).sum()
    }

    /// Hashcons entries; an upper bound on distinct e-nodes ever inserted.
    pub fn memo_len(&self) -> usize {
        self.memo.len()
    }

    /// Ids ever allocated, canonical or not.
    pub fn id_bound(&self) -> usize {
        self.classes.len()
    }

    pub fn class_ids(&self) -> impl Iterator<Item = Id> + '_ {
        self.classes
            .iter()
            .enumerate()
            .filter(|(_, c)| c.is_some())
            .map(|(i, _)| Id(i as u32))
    }

    pub fn class(&self, id: Id) -> &EClass {
        self.classes[self.find(id).index()]
            .as_ref()
            .expect("canonical class is live")
    }

    pub fn nodes(&self, id: Id) -> &[ENode] {
        &self.class(id).nodes
    }

    /// Parent e-nodes of a class with the class each belongs to; may contain
    /// stale (non-canonical) entries until the next rebuild.
    pub fn parents(&self, id: Id) -> impl Iterator<Item = (&ENode, Id)> + '_ {
        self.class(id).parents.iter().map(|(n, c)| (n, self.find(*c)))
    }

    pub fn is_clean(&self) -> bool {
        self.worklist.is_empty()
    }

    pub fn canonical(&self, node: &ENode) -> ENode {
        let mut n = node.clone();
        n.canonicalize(&self.uf);
        n
    }

    /// Class of an e-node already present, if any.
    pub fn lookup(&self, node: &ENode) -> Option<Id> {
        self.memo.get(&self.canonical(node)).map(|&id| self.find(id))
    }

    pub fn add(&mut self, op: Op, children: &[Id]) -> Result<Id> {
        if let Some(expected) = op.arity() {
            if expected != children.len() {
                return Err(EGraphError::Arity {
                    op,
                    expected,
                    got: children.len(),
                });
            }
        }
        for c in children {
            if c.index() >= self.classes.len() {
                return Err(EGraphError::UnknownClass(c.0));
            }
        }
        Ok(self.add_node(ENode::new(op, children)))
    }

    /// Inserts a node whose arity is known to be correct.
    pub fn add_node(&mut self, mut node: ENode) -> Id {
        node.canonicalize(&self.uf);
        if let Some(&id) = self.memo.get(&node) {
            return self.find(id);
        }
        let id = self.uf.make();
        for &c in &node.children {
            let class = self.classes[c.index()].as_mut().expect("canonical child");
            class.parents.push((node.clone(), id));
        }
        self.memo.insert(node.clone(), id);
        self.classes.push(Some(EClass {
            nodes: vec![node],
            parents: Vec::new(),
        }));
        self.live_classes += 1;
        id
    }

    /// Unions two classes; returns the canonical id. Congruence is restored
    /// lazily by [`EGraph::rebuild`].
    pub fn merge(&mut self, a: Id, b: Id) -> Id {
        let a = self.uf.find_compress(a);
        let b = self.uf.find_compress(b);
        if a == b {
            return a;
        }
        let size = |id: Id| {
            let c = self.classes[id.index()].as_ref().unwrap();
            c.parents.len() + c.nodes.len()
        };
        // Larger class stays root; ties keep the smaller id.
        let (root, child) = match size(a).cmp(&size(b)) {
            std::cmp::Ordering::Less => (b, a),
            std::cmp::Ordering::Greater => (a, b),
            std::cmp::Ordering::Equal => (a.min(b), a.max(b)),
        };
        self.uf.parent[child.index()] = root.0;
        let moved = self.classes[child.index()].take().unwrap();
        let r = self.classes[root.index()].as_mut().unwrap();
        r.nodes.extend(moved.nodes);
        r.parents.extend(moved.parents);
        self.live_classes -= 1;
        self.worklist.push(root);
        root
    }

    /// Restores the congruence invariant; returns the number of unions it
    /// performed.
    pub fn rebuild(&mut self) -> usize {
        let mut unions = 0;
        while !self.worklist.is_empty() {
            let mut todo = std::mem::take(&mut self.worklist);
            for id in todo.iter_mut() {
                *id = self.uf.find_compress(*id);
            }
            todo.sort_unstable();
            todo.dedup();
            for id in todo {
                unions += self.repair(id);
            }
        }
        self.rebuild_classes();
        unions
    }

    fn repair(&mut self, id: Id) -> usize {
        let id = self.find(id);
        let Some(class) = self.classes[id.index()].as_mut() else {
            return 0;
        };
        let mut parents = std::mem::take(&mut class.parents);
        for (node, pclass) in parents.iter_mut() {
            self.memo.remove(node);
            node.canonicalize(&self.uf);
            *pclass = self.uf.find(*pclass);
        }
        parents.sort_unstable();
        let mut unions = 0;
        let mut kept: Vec<(ENode, Id)> = Vec::with_capacity(parents.len());
        for (node, pclass) in parents {
            if let Some((last, lclass)) = kept.last() {
                if *last == node {
                    if self.find(*lclass) != self.find(pclass) {
                        self.merge(*lclass, pclass);
                        unions += 1;
                    }
                    continue;
                }
            }
            match self.memo.get(&node).copied() {
                Some(existing) if self.find(existing) != self.find(pclass) => {
                    self.merge(existing, pclass);
                    unions += 1;
                }
                _ => {}
            }
            let c = self.find(pclass);
            self.memo.insert(node.clone(), c);
            kept.push((node, c));
        }
        let id = self.find(id);
        if let Some(class) = self.classes[id.index()].as_mut() {
            class.parents.extend(kept);
        }
        unions
    }

    fn rebuild_classes(&mut self) {
        let uf = &self.uf;
        for class in self.classes.iter_mut().flatten() {
            for n in class.nodes.iter_mut() {
                n.canonicalize(uf);
            }
            class.nodes.sort_unstable();
            class.nodes.dedup();
        }
    }

    /// Removes `node` from class `id`, leaving the hashcons entry in place so
    /// the node is not re-created. Refuses to empty a class.
    pub fn remove_node(&mut self, id: Id, node: &ENode) -> bool {
        let id = self.find(id);
        let class = self.classes[id.index()].as_mut().unwrap();
        if class.nodes.len() <= 1 {
            return false;
        }
        let before = class.nodes.len();
        class.nodes.retain(|n| n != node);
        class.nodes.len() != before
    }

    /// Inserts the instantiation of `pat` under `subst`.
    pub fn instantiate(&mut self, pat: &Pattern, subst: &Subst) -> Id {
        let mut ids: Vec<Id> = Vec::with_capacity(pat.nodes().len());
        for p in pat.nodes() {
            let id = match p {
                PatternNode::Var(v) => subst.get(*v),
                PatternNode::Node(op, ch) => {
                    let children: SmallVec<[Id; 3]> = ch.iter().map(|&i| ids[i]).collect();
                    self.add_node(ENode { op: *op, children })
                }
            };
            ids.push(id);
        }
        *ids.last().expect("non-empty pattern")
    }

    /// Class holding the unique `ROOTS` node, if any.
    pub fn roots_class(&self) -> Option<Id> {
        self.class_ids()
            .find(|&id| self.nodes(id).iter().any(|n| n.op == Op::Roots))
    }

    /// Canonical classes grouped by the operators their nodes carry.
    pub fn classes_by_op(&self) -> FxHashMap<std::mem::Discriminant<Op>, Vec<Id>> {
        let mut map: FxHashMap<std::mem::Discriminant<Op>, Vec<Id>> = FxHashMap::default();
        for id in self.class_ids() {
            let mut last = None;
            for n in self.nodes(id) {
                let d = std::mem::discriminant(&n.op);
                if last != Some(d) {
                    let v = map.entry(d).or_default();
                    if v.last() != Some(&id) {
                        v.push(id);
                    }
                    last = Some(d);
                }
            }
        }
        map
    }
}

/// All matches of `pat`, sorted by class then substitution.
pub fn match_pattern(egraph: &EGraph, pat: &Pattern) -> Vec<(Id, Subst)> {
    pat.search(egraph)
}

/// Result of converting a netlist into an e-graph.
#[derive(Debug, Clone)]
pub struct FromNetlist {
    pub egraph: EGraph,
    pub root: Id,
    /// Class of each netlist node, by node index.
    pub node_map: Vec<Id>,
    /// Class of each output, in output order.
    pub outputs: Vec<Id>,
}

pub fn egraph_from_netlist(netlist: &Netlist) -> FromNetlist {
    let mut eg = EGraph::new();
    let order = topo_order(netlist).expect("netlist is acyclic by construction");
    let mut node_map = vec![Id(u32::MAX); netlist.len()];
    let const_used = netlist.fanouts()[0] > 0;
    for id in order {
        let class = match netlist.node(id) {
            NodeKind::ConstFalse if !const_used => continue,
            NodeKind::ConstFalse => eg.add_node(ENode::leaf(Op::Const0)),
            NodeKind::Input(ord) => eg.add_node(ENode::leaf(Op::Var(ord))),
            NodeKind::Not(c) => eg.add_node(ENode::new(Op::Not, &[node_map[c.index()]])),
            NodeKind::And(a, b) => eg.add_node(ENode::new(
                Op::And,
                &[node_map[a.index()], node_map[b.index()]],
            )),
        };
        node_map[id.index()] = class;
    }
    let outputs: Vec<Id> = netlist
        .outputs()
        .iter()
        .map(|o| {
            let c = node_map[o.node.index()];
            if o.inverted {
                eg.add_node(ENode::new(Op::Not, &[c]))
            } else {
                c
            }
        })
        .collect();
    let root = eg.add_node(ENode::new(Op::Roots, &outputs));
    FromNetlist {
        egraph: eg,
        root,
        node_map,
        outputs,
    }
}
