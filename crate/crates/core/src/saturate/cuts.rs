//! Three-leaf cuts over the e-graph, used to propose where identification
//! rules may fire.
//!
//! A cut of class `c` is a set of at most three classes such that some choice
//! of NOT/AND/OR e-nodes below `c` bottoms out in exactly those classes. All
//! derivations of one cut compute the same function, so each cut carries one
//! truth table. Only e-nodes whose children sit strictly lower in a fixed
//! level order are followed, which keeps enumeration acyclic.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rustc_hash::FxHashMap;
use smallvec::SmallVec;

use crate::egraph::{EGraph, ENode, Id, Op, Pattern, PatternNode, Subst};

const MAX_LEAVES: usize = 3;
const CUTS_PER_CLASS: usize = 32;
const SWEEPS: usize = 2;
const VAR_TABLES: [u8; 3] = [0xAA, 0xCC, 0xF0];

pub(crate) type Leaves = SmallVec<[Id; 3]>;

#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord)]
struct Cut {
    leaves: Leaves,
    table: u8,
}

/// Level of each class: 0 for leaves, else one more than the children of its
/// lowest evaluable node. `None` for classes with no acyclic derivation.
pub(crate) fn levels(eg: &EGraph) -> Vec<Option<u32>> {
    let mut level: Vec<Option<u32>> = vec![None; eg.id_bound()];
    let ids: Vec<Id> = eg.class_ids().collect();
    loop {
        let mut changed = false;
        for &id in &ids {
            let mut best = level[id.index()];
            for n in eg.nodes(id) {
                let l = match n.op {
                    Op::Var(_) | Op::Const0 => Some(0),
                    Op::Not | Op::And | Op::Or | Op::Xor3 | Op::Maj3 => n
                        .children
                        .iter()
                        .map(|&c| level[eg.find(c).index()])
                        .try_fold(0u32, |m, l| l.map(|l| m.max(l + 1))),
                    _ => None,
                };
                if let Some(l) = l {
                    if best.is_none_or(|b| l < b) {
                        best = Some(l);
                    }
                }
            }
            if best != level[id.index()] {
                level[id.index()] = best;
                changed = true;
            }
        }
        if !changed {
            return level;
        }
    }
}

/// Classes with a level, lowest level first.
fn level_order(eg: &EGraph, level: &[Option<u32>]) -> Vec<Id> {
    let mut order: Vec<Id> = eg.class_ids().filter(|id| level[id.index()].is_some()).collect();
    order.sort_by_key(|id| (level[id.index()], *id));
    order
}

/// One random simulation word per class, `None` where no evaluable node
/// exists.
pub(crate) fn signatures(eg: &EGraph, level: &[Option<u32>], seed: u64) -> Vec<Option<u64>> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut sig: Vec<Option<u64>> = vec![None; eg.id_bound()];
    let mut var_words: FxHashMap<u32, u64> = FxHashMap::default();
    let mut vars: Vec<u32> = eg
        .class_ids()
        .flat_map(|id| eg.nodes(id).iter().filter_map(|n| match n.op {
            Op::Var(v) => Some(v),
            _ => None,
        }))
        .collect();
    vars.sort_unstable();
    for v in vars {
        var_words.insert(v, rng.gen());
    }
    for id in level_order(eg, level) {
        let lid = level[id.index()];
        for n in eg.nodes(id) {
            let ch = |k: usize| -> Option<u64> {
                let c = eg.find(n.children[k]);
                if level[c.index()]? >= lid? {
                    return None;
                }
                sig[c.index()]
            };
            let v = match n.op {
                Op::Var(v) => var_words.get(&v).copied(),
                Op::Const0 => Some(0),
                Op::Not => ch(0).map(|a| !a),
                Op::And => ch(0).zip(ch(1)).map(|(a, b)| a & b),
                Op::Or => ch(0).zip(ch(1)).map(|(a, b)| a | b),
                Op::Xor3 => ch(0).zip(ch(1)).zip(ch(2)).map(|((a, b), c)| a ^ b ^ c),
                Op::Maj3 => ch(0).zip(ch(1)).zip(ch(2)).map(|((a, b), c)| (a & b) | (a & c) | (b & c)),
                _ => None,
            };
            if v.is_some() {
                sig[id.index()] = v;
                break;
            }
        }
    }
    sig
}

/// Re-expresses `table` over `from` as a table over `to`, a superset.
fn expand(table: u8, from: &[Id], to: &[Id]) -> u8 {
    let pos: SmallVec<[usize; 3]> = from
        .iter()
        .map(|f| to.iter().position(|t| t == f).expect("superset"))
        .collect();
    let mut out = 0u8;
    for row in 0..8u8 {
        let mut r = 0u8;
        for (j, &p) in pos.iter().enumerate() {
            r |= ((row >> p) & 1) << j;
        }
        out |= ((table >> r) & 1) << row;
    }
    out
}

fn merge_leaves(a: &[Id], b: &[Id]) -> Option<Leaves> {
    let mut out = Leaves::new();
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
        if out.len() == MAX_LEAVES {
            return None;
        }
        out.push(next);
    }
    Some(out)
}

/// A class shown by one of its cuts to compute XOR3 or MAJ3 of its leaves,
/// possibly with some leaves or the output complemented.
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord)]
pub(crate) struct AdderCandidate {
    pub class: Id,
    /// Sorted.
    pub leaves: Leaves,
    pub op: Op,
    /// Bit `i` set: leaf `i` enters complemented.
    pub negated: u8,
    pub output_negated: bool,
}

/// Table of `table` with the inputs in `mask` complemented.
fn negate_inputs(table: u8, mask: u8) -> u8 {
    (0..8u8).fold(0, |out, row| out | (((table >> (row ^ mask)) & 1) << row))
}

/// Matches a three-leaf table against XOR3 and MAJ3 up to input and output
/// complementation. XOR3 absorbs every complement into the output; MAJ3 is
/// self-dual, so at most one leaf needs complementing.
fn classify(table: u8) -> Option<(Op, u8, bool)> {
    match table {
        0x96 => return Some((Op::Xor3, 0, false)),
        0x69 => return Some((Op::Xor3, 0, true)),
        _ => {}
    }
    let m = (0..8u8).find(|&m| negate_inputs(table, m) == 0xE8)?;
    Some(if m.count_ones() > 1 {
        (Op::Maj3, m ^ 7, true)
    } else {
        (Op::Maj3, m, false)
    })
}

/// Classes that some three-leaf cut shows to compute an adder function of
/// its leaves.
///
/// Cut sets are recomputed over a few sweeps in level order so that e-nodes
/// closing a cycle still contribute; every cut found this way stems from a
/// finite derivation and is therefore sound.
pub(crate) fn adder_candidates(eg: &EGraph, level: &[Option<u32>]) -> Vec<AdderCandidate> {
    let mut cuts: Vec<Vec<Cut>> = vec![Vec::new(); eg.id_bound()];
    let order = level_order(eg, level);
    let mut found = Vec::new();
    for _ in 0..SWEEPS {
        for &id in &order {
            let set = class_cuts(eg, id, &cuts);
            for c in &set {
                if c.leaves.len() != 3 {
                    continue;
                }
                if let Some((op, negated, output_negated)) = classify(c.table) {
                    found.push(AdderCandidate {
                        class: id,
                        leaves: c.leaves.clone(),
                        op,
                        negated,
                        output_negated,
                    });
                }
            }
            cuts[id.index()] = set;
        }
    }
    found.sort();
    found.dedup();
    found
}

fn class_cuts(eg: &EGraph, id: Id, cuts: &[Vec<Cut>]) -> Vec<Cut> {
    if super::is_constant(eg, id) {
        let table = if eg.nodes(id).iter().any(|n| n.op == Op::Const0) { 0 } else { 0xFF };
        return vec![Cut {
            leaves: Leaves::new(),
            table,
        }];
    }
    let mut set = vec![Cut {
        leaves: SmallVec::from_slice(&[id]),
        table: VAR_TABLES[0],
    }];
    for n in eg.nodes(id) {
        if !matches!(n.op, Op::Not | Op::And | Op::Or) {
            continue;
        }
        let ch: SmallVec<[Id; 2]> = n.children.iter().map(|&c| eg.find(c)).collect();
        match n.op {
            Op::Not => {
                for c in &cuts[ch[0].index()] {
                    set.push(Cut {
                        leaves: c.leaves.clone(),
                        table: !c.table,
                    });
                }
            }
            _ => {
                for x in &cuts[ch[0].index()] {
                    for y in &cuts[ch[1].index()] {
                        let Some(leaves) = merge_leaves(&x.leaves, &y.leaves) else {
                            continue;
                        };
                        let tx = expand(x.table, &x.leaves, &leaves);
                        let ty = expand(y.table, &y.leaves, &leaves);
                        let table = if n.op == Op::And { tx & ty } else { tx | ty };
                        set.push(Cut { leaves, table });
                    }
                }
            }
        }
    }
    set.sort_by(|a, b| a.leaves.cmp(&b.leaves));
    set.dedup_by(|a, b| a.leaves == b.leaves);
    // Small cuts over old classes first: classes created by rewriting get
    // larger ids, so this favours the structure of the input netlist.
    set.sort_by(|a, b| {
        (a.leaves.len(), a.leaves.iter().rev().cmp(b.leaves.iter().rev()))
            .cmp(&(b.leaves.len(), b.leaves.iter().rev().cmp(a.leaves.iter().rev())))
    });
    set.truncate(CUTS_PER_CLASS);
    set
}

/// Whether `pat` matches at `class` with its variables bound by `subst`,
/// modulo commutativity. Pattern nodes whose simulated value differs from
/// the class signature are rejected early.
pub(crate) fn matches_bound(
    eg: &EGraph,
    pat: &Pattern,
    subst: &Subst,
    sigs: &[Option<u64>],
    class: Id,
) -> bool {
    let words: Vec<u64> = subst
        .ids()
        .iter()
        .map(|&i| sigs[eg.find(i).index()].unwrap_or(0))
        .collect();
    let vals = pat.eval_nodes(&words);
    let mut memo: FxHashMap<(usize, Id), bool> = FxHashMap::default();
    go(eg, pat, subst, sigs, &vals, pat.nodes().len() - 1, eg.find(class), &mut memo)
}

#[allow(clippy::too_many_arguments)]
fn go(
    eg: &EGraph,
    pat: &Pattern,
    subst: &Subst,
    sigs: &[Option<u64>],
    vals: &[u64],
    pi: usize,
    class: Id,
    memo: &mut FxHashMap<(usize, Id), bool>,
) -> bool {
    if let Some(&r) = memo.get(&(pi, class)) {
        return r;
    }
    let r = match &pat.nodes()[pi] {
        PatternNode::Var(v) => eg.find(subst.get(*v)) == class,
        PatternNode::Node(op, pch) => {
            if sigs[class.index()].is_some_and(|s| s != vals[pi]) {
                false
            } else {
                eg.nodes(class).iter().filter(|n| n.op == *op).any(|n: &ENode| {
                    crate::egraph::child_orders(n, true).iter().any(|order| {
                        pch.iter()
                            .zip(order)
                            .all(|(&pc, &c)| go(eg, pat, subst, sigs, vals, pc, eg.find(c), memo))
                    })
                })
            }
        }
    };
    memo.insert((pi, class), r);
    r
}
