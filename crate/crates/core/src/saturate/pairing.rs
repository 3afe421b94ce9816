use std::collections::BTreeMap;

use serde::Serialize;

use super::is_constant;
use crate::egraph::{EGraph, ENode, Id, Op};

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Serialize)]
pub struct FaPairing {
    /// Sorted canonical input classes.
    pub inputs: [Id; 3],
    pub fa: Id,
    /// Carry class, holding the MAJ3 node.
    pub fst: Id,
    /// Sum class, holding the XOR3 node.
    pub snd: Id,
}

/// The class computing the complement of `c`, if one exists.
fn complement_of(eg: &EGraph, c: Id) -> Option<Id> {
    eg.lookup(&ENode::new(Op::Not, &[c])).or_else(|| {
        eg.nodes(c)
            .iter()
            .find(|n| n.op == Op::Not)
            .map(|n| eg.find(n.children[0]))
    })
}

/// Polarity-free representative of a class: the smaller of it and its
/// complement, and whether `c` is the complemented one.
fn base(eg: &EGraph, c: Id) -> (Id, bool) {
    match complement_of(eg, c) {
        Some(n) if n < c => (n, true),
        _ => (c, false),
    }
}

type Key = [Id; 3];

/// Sorted representatives and complement flags of a triple, or `None` for
/// degenerate triples.
fn key_of(eg: &EGraph, n: &ENode) -> Option<(Key, [Id; 3], u8)> {
    let mut t = [n.children[0], n.children[1], n.children[2]].map(|c| eg.find(c));
    t.sort_unstable();
    if t.iter().any(|&c| is_constant(eg, c)) {
        return None;
    }
    let mut b: Vec<(Id, bool)> = t.iter().map(|&c| base(eg, c)).collect();
    b.sort_unstable();
    if b[0].0 == b[1].0 || b[1].0 == b[2].0 {
        return None;
    }
    let flags = b.iter().enumerate().fold(0u8, |f, (i, &(_, neg))| f | (u8::from(neg) << i));
    Some(([b[0].0, b[1].0, b[2].0], t, flags))
}

struct Candidates {
    /// Per key: the first XOR3 class and the parity of its complemented inputs.
    xors: BTreeMap<Key, (Id, u32)>,
    /// Per key and complement pattern up to global complement: a MAJ3 class
    /// and its input triple.
    majs: BTreeMap<(Key, u8), (Id, [Id; 3], u8)>,
}

fn candidates(eg: &EGraph) -> Candidates {
    let mut c = Candidates {
        xors: BTreeMap::new(),
        majs: BTreeMap::new(),
    };
    for id in eg.class_ids() {
        for n in eg.nodes(id) {
            if !matches!(n.op, Op::Xor3 | Op::Maj3) {
                continue;
            }
            let Some((key, t, flags)) = key_of(eg, n) else {
                continue;
            };
            if n.op == Op::Xor3 {
                c.xors.entry(key).or_insert((id, flags.count_ones() % 2));
            } else {
                // maj(!a, !b, !c) is the complement of maj(a, b, c): both
                // describe one adder, keep the smaller triple.
                let e = c.majs.entry((key, flags.min(flags ^ 7))).or_insert((id, t, flags));
                if t < e.1 {
                    *e = (id, t, flags);
                }
            }
        }
    }
    c
}

/// Pairs XOR3 and MAJ3 nodes over the same three inputs, up to complemented
/// inputs, under a new FA node, merging its FST projection into the carry
/// class and SND into the sum class. The FA takes the MAJ3 inputs; where the
/// XOR3 sees an odd number of complements relative to them, the sum class is
/// the complement of the XOR3 class. Returns the pairings created by this
/// call.
pub fn insert_fa_nodes(eg: &mut EGraph) -> Vec<FaPairing> {
    eg.rebuild();
    let cands = candidates(eg);
    let mut out = Vec::new();
    for (&(key, _), &(maj, t, flags)) in &cands.majs {
        let Some(&(xor, parity)) = cands.xors.get(&key) else {
            continue;
        };
        let existing = eg
            .lookup(&ENode::new(Op::Fa, &t))
            .and_then(|fa| eg.lookup(&ENode::new(Op::Fst, &[fa])));
        if existing.is_some() {
            continue;
        }
        let sum = if parity == flags.count_ones() % 2 {
            xor
        } else {
            let n = eg.add_node(ENode::new(Op::Not, &[xor]));
            // Keep the double negation explicit so consumers of the XOR3
            // class can still reach the sum projection.
            let nn = eg.add_node(ENode::new(Op::Not, &[n]));
            eg.merge(nn, xor);
            n
        };
        let fa = eg.add_node(ENode::new(Op::Fa, &t));
        let fst = eg.add_node(ENode::new(Op::Fst, &[fa]));
        let snd = eg.add_node(ENode::new(Op::Snd, &[fa]));
        eg.merge(fst, maj);
        eg.merge(snd, sum);
        out.push(FaPairing {
            inputs: t,
            fa,
            fst: maj,
            snd: sum,
        });
    }
    eg.rebuild();
    for p in out.iter_mut() {
        *p = canonical_pairing(eg, p);
    }
    out
}

fn canonical_pairing(eg: &EGraph, p: &FaPairing) -> FaPairing {
    let mut inputs = p.inputs.map(|c| eg.find(c));
    inputs.sort_unstable();
    FaPairing {
        inputs,
        fa: eg.find(p.fa),
        fst: eg.find(p.fst),
        snd: eg.find(p.snd),
    }
}

/// Every FA node currently in the e-graph with its projection classes.
pub fn fa_pairings(eg: &EGraph) -> Vec<FaPairing> {
    let mut out = Vec::new();
    for id in eg.class_ids() {
        for n in eg.nodes(id) {
            if n.op != Op::Fa {
                continue;
            }
            let fst = eg.lookup(&ENode::new(Op::Fst, &[id]));
            let snd = eg.lookup(&ENode::new(Op::Snd, &[id]));
            if let (Some(fst), Some(snd)) = (fst, snd) {
                let mut inputs = [n.children[0], n.children[1], n.children[2]].map(|c| eg.find(c));
                inputs.sort_unstable();
                out.push(FaPairing {
                    inputs,
                    fa: id,
                    fst,
                    snd,
                });
            }
        }
    }
    out.sort_unstable();
    out
}
