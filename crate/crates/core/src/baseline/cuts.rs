//! K-feasible cut enumeration over the AND structure of a netlist.
//!
//! NOT nodes are treated as complemented edges, the way an AIG package sees
//! them: cuts are rooted at AND nodes (or inputs) and their leaves are AND
//! nodes, inputs or the constant. A NOT node owns no cuts of its own.

use smallvec::SmallVec;

use crate::netlist::{Netlist, NetlistError, NodeId, NodeKind, Result};

/// Largest supported cut size; truth tables are 8 bits wide.
pub const MAX_LEAVES: usize = 3;
/// Cuts kept per node besides the trivial one, smallest leaf sets first.
pub const CUT_CAP: usize = 16;

#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct Cut {
    pub root: NodeId,
    /// Sorted, at most three.
    pub leaves: SmallVec<[NodeId; 3]>,
}

impl Cut {
    pub fn is_trivial(&self) -> bool {
        self.leaves.len() == 1 && self.leaves[0] == self.root
    }
}

/// 8-bit truth table over three leaves, index `l0 + 2*l1 + 4*l2`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct TruthTable8(pub u8);

/// Projection tables of the three leaf positions.
pub const LEAF_TABLES: [u8; 3] = [0xAA, 0xCC, 0xF0];

/// Strips NOT nodes; returns the structural node and whether it is complemented.
pub fn resolve(nodes: &[NodeKind], mut id: NodeId) -> (NodeId, bool) {
    let mut inverted = false;
    while let NodeKind::Not(c) = nodes[id.index()] {
        inverted = !inverted;
        id = c;
    }
    (id, inverted)
}

fn merge_leaves(a: &[NodeId], b: &[NodeId], k: usize) -> Option<SmallVec<[NodeId; 3]>> {
    let mut out: SmallVec<[NodeId; 3]> = SmallVec::new();
    let (mut i, mut j) = (0, 0);
    while i < a.len() || j < b.len() {
        let next = match (a.get(i), b.get(j)) {
            (Some(&x), Some(&y)) if x == y => {
                i += 1;
                j += 1;
                x
            }
            (Some(&x), Some(&y)) if x < y => {
                i += 1;
                x
            }
            (Some(_), Some(&y)) => {
                j += 1;
                y
            }
            (Some(&x), None) => {
                i += 1;
                x
            }
            (None, Some(&y)) => {
                j += 1;
                y
            }
            (None, None) => unreachable!(),
        };
        if out.len() == k {
            return None;
        }
        out.push(next);
    }
    Some(out)
}

/// Incremental bottom-up cut enumeration. Nodes are processed in id order,
/// so a growing node list (as in a builder) can be extended in place.
#[derive(Debug, Clone)]
pub struct CutEnumerator {
    k: usize,
    cap: usize,
    cuts: Vec<Vec<SmallVec<[NodeId; 3]>>>,
}

impl CutEnumerator {
    pub fn new(k: usize, cap: usize) -> Self {
        assert!((1..=MAX_LEAVES).contains(&k));
        CutEnumerator {
            k,
            cap,
            cuts: Vec::new(),
        }
    }

    /// Computes cut sets for every node not yet seen.
    pub fn extend(&mut self, nodes: &[NodeKind]) {
        for i in self.cuts.len()..nodes.len() {
            let id = NodeId(i as u32);
            let set = match nodes[i] {
                NodeKind::Not(_) => Vec::new(),
                NodeKind::ConstFalse | NodeKind::Input(_) => vec![SmallVec::from_slice(&[id])],
                NodeKind::And(l, r) => {
                    let (l, _) = resolve(nodes, l);
                    let (r, _) = resolve(nodes, r);
                    let mut merged: Vec<SmallVec<[NodeId; 3]>> = Vec::new();
                    for a in &self.cuts[l.index()] {
                        for b in &self.cuts[r.index()] {
                            if let Some(m) = merge_leaves(a, b, self.k) {
                                merged.push(m);
                            }
                        }
                    }
                    merged.sort_unstable_by(|x, y| x.len().cmp(&y.len()).then_with(|| x.cmp(y)));
                    merged.dedup();
                    merged.truncate(self.cap);
                    let mut set = Vec::with_capacity(merged.len() + 1);
                    set.push(SmallVec::from_slice(&[id]));
                    set.extend(merged);
                    set
                }
            };
            self.cuts.push(set);
        }
    }

    pub fn cuts_of(&self, id: NodeId) -> impl Iterator<Item = Cut> + '_ {
        self.cuts[id.index()].iter().map(move |leaves| Cut {
            root: id,
            leaves: leaves.clone(),
        })
    }

    pub fn leaf_sets(&self, id: NodeId) -> &[SmallVec<[NodeId; 3]>] {
        &self.cuts[id.index()]
    }
}

/// Per-node cut sets; entry `i` belongs to node `i` (empty for NOT nodes).
pub fn enumerate_cuts(netlist: &Netlist, k: usize) -> Vec<Vec<Cut>> {
    let mut e = CutEnumerator::new(k, CUT_CAP);
    e.extend(netlist.nodes());
    (0..netlist.len())
        .map(|i| e.cuts_of(NodeId(i as u32)).collect())
        .collect()
}

/// Function of `root` over `leaves` (sorted), simulated on all 8 leaf patterns.
pub(crate) fn cone_table(nodes: &[NodeKind], root: NodeId, leaves: &[NodeId]) -> Result<u8> {
    let mut memo: rustc_hash::FxHashMap<NodeId, u8> = rustc_hash::FxHashMap::default();
    for (i, &l) in leaves.iter().enumerate() {
        memo.insert(l, LEAF_TABLES[i]);
    }
    // Iterative post-order evaluation.
    let mut stack = vec![(root, false)];
    while let Some((id, expanded)) = stack.pop() {
        if memo.contains_key(&id) {
            continue;
        }
        let kind = nodes[id.index()];
        if expanded {
            let v = match kind {
                NodeKind::ConstFalse => 0,
                NodeKind::Not(c) => !memo[&c],
                NodeKind::And(a, b) => memo[&a] & memo[&b],
                NodeKind::Input(_) => unreachable!(),
            };
            memo.insert(id, v);
            continue;
        }
        match kind {
            NodeKind::Input(ord) => {
                return Err(NetlistError::Structure(format!(
                    "cone of {root} reaches input {ord} outside the cut leaves"
                )))
            }
            NodeKind::ConstFalse => {
                memo.insert(id, 0);
            }
            _ => {
                stack.push((id, true));
                for c in kind.children() {
                    if !memo.contains_key(&c) {
                        stack.push((c, false));
                    }
                }
            }
        }
    }
    Ok(memo[&root])
}

pub fn cut_truth_table(netlist: &Netlist, cut: &Cut) -> Result<TruthTable8> {
    if cut.leaves.is_empty() || cut.leaves.len() > MAX_LEAVES {
        return Err(NetlistError::Argument(format!(
            "cut must have 1..={MAX_LEAVES} leaves"
        )));
    }
    // Unassigned leaf positions act as dummy variables: the projection
    // patterns of the used positions already repeat across them.
    Ok(TruthTable8(cone_table(netlist.nodes(), cut.root, &cut.leaves)?))
}

/// Number of structural (AND) nodes strictly inside the cone of `root`
/// bounded by `leaves`, the root included.
pub(crate) fn cone_volume(nodes: &[NodeKind], root: NodeId, leaves: &[NodeId]) -> usize {
    let mut seen = rustc_hash::FxHashSet::default();
    let mut stack = vec![root];
    let mut count = 0;
    while let Some(id) = stack.pop() {
        if leaves.contains(&id) && id != root || !seen.insert(id) {
            continue;
        }
        match nodes[id.index()] {
            NodeKind::And(a, b) => {
                count += 1;
                stack.push(a);
                stack.push(b);
            }
            NodeKind::Not(c) => stack.push(c),
            _ => {}
        }
    }
    count
}
