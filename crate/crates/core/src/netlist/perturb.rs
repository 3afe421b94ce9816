//! Randomized function-preserving restructuring.
//!
//! Each pass rebuilds the netlist gate by gate. A gate is left alone or, with
//! some probability, replaced by one of three local rewrites:
//!
//! * cone resynthesis: the function of the gate over one of its 2- or 3-leaf
//!   cuts is rebuilt from scratch by Shannon expansion, with random variable
//!   order and random output polarity of each multiplexer;
//! * AND-tree rebalancing: `(a & b) & c` becomes `a & (b & c)`;
//! * distributive reshaping: `(!a | !b) & c` becomes `(!a & c) | (!b & c)`.
//!
//! Like a technology mapper, the pass never restructures through a node with
//! more than one fanout: such nodes stay as cone leaves, so only the logic
//! between fanout points changes shape and polarity.

use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rustc_hash::FxHashSet;
use serde::Serialize;

use super::{Netlist, NetlistBuilder, NodeId, NodeKind};
use crate::baseline::cuts::{cone_table, cone_volume, resolve, CutEnumerator, LEAF_TABLES};

/// Probability that a gate is rewritten in a pass.
const REWRITE_PROB: f64 = 0.4;
/// Probability that a resynthesized multiplexer is built in OR form
/// (rooted at an inverter) rather than AND form.
const OR_FORM_PROB: f64 = 0.75;
const CUT_CAP: usize = 12;

#[derive(Debug, Clone, Default, PartialEq, Eq, Serialize)]
pub struct PerturbStats {
    pub passes: u32,
    pub resynthesized: u64,
    pub rebalanced: u64,
    pub distributed: u64,
    pub and_before: u64,
    pub and_after: u64,
}

pub fn perturb(netlist: &Netlist, seed: u64, n_passes: u32) -> Netlist {
    perturb_with_stats(netlist, seed, n_passes).0
}

pub fn perturb_with_stats(netlist: &Netlist, seed: u64, n_passes: u32) -> (Netlist, PerturbStats) {
    let mut stats = PerturbStats {
        passes: n_passes,
        and_before: netlist.and_count() as u64,
        ..Default::default()
    };
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut current = netlist.clone();
    for _ in 0..n_passes {
        current = pass(&current, &mut rng, &mut stats);
    }
    stats.and_after = current.and_count() as u64;
    (current, stats)
}

struct Pass<'a> {
    b: NetlistBuilder,
    cuts: CutEnumerator,
    rng: &'a mut ChaCha8Rng,
    /// Builder nodes standing for multi-fanout source nodes.
    boundary: FxHashSet<NodeId>,
}

fn pass(netlist: &Netlist, rng: &mut ChaCha8Rng, stats: &mut PerturbStats) -> Netlist {
    let mut p = Pass {
        b: NetlistBuilder::new(),
        cuts: CutEnumerator::new(3, CUT_CAP),
        rng,
        boundary: FxHashSet::default(),
    };
    let mut fanout = vec![0u32; netlist.len()];
    for kind in netlist.nodes() {
        match *kind {
            NodeKind::Not(c) => fanout[c.index()] += 1,
            NodeKind::And(x, y) => {
                fanout[x.index()] += 1;
                fanout[y.index()] += 1;
            }
            _ => {}
        }
    }
    for o in netlist.outputs() {
        fanout[o.node.index()] += 1;
    }
    let mut map = vec![NodeId::CONST_FALSE; netlist.len()];
    for (i, kind) in netlist.nodes().iter().enumerate() {
        map[i] = match *kind {
            NodeKind::ConstFalse => NodeId::CONST_FALSE,
            NodeKind::Input(_) => match netlist.names().get(&NodeId(i as u32)) {
                Some(name) => p.b.named_input(name.clone()),
                None => p.b.input(),
            },
            NodeKind::Not(c) => p.b.not(map[c.index()]),
            NodeKind::And(x, y) => {
                let (x, y) = (map[x.index()], map[y.index()]);
                if p.rng.gen_bool(REWRITE_PROB) {
                    p.rewrite(x, y, stats)
                } else {
                    p.b.and(x, y)
                }
            }
        };
        if fanout[i] > 1 {
            p.boundary.insert(map[i]);
        }
    }
    for o in netlist.outputs() {
        p.b.add_output(map[o.node.index()], o.inverted);
    }
    p.b.finish().swept()
}

impl Pass<'_> {
    fn rewrite(&mut self, x: NodeId, y: NodeId, stats: &mut PerturbStats) -> NodeId {
        let roll: f64 = self.rng.gen();
        let done = if roll < 0.5 {
            self.resynthesize(x, y).inspect(|_| stats.resynthesized += 1)
        } else if roll < 0.75 {
            self.rebalance(x, y).inspect(|_| stats.rebalanced += 1)
        } else {
            self.distribute(x, y).inspect(|_| stats.distributed += 1)
        };
        done.unwrap_or_else(|| self.b.and(x, y))
    }

    fn resynthesize(&mut self, x: NodeId, y: NodeId) -> Option<NodeId> {
        let g = self.b.and(x, y);
        self.cuts.extend(self.b.nodes());
        let nodes = self.b.nodes();
        let (root, inverted) = resolve(nodes, g);
        if !matches!(nodes[root.index()], NodeKind::And(..)) {
            return None;
        }
        let mut best: Option<(usize, usize)> = None;
        for (i, leaves) in self.cuts.leaf_sets(root).iter().enumerate() {
            if leaves.len() < 2 {
                continue;
            }
            if !self.inside_fanout_free(root, leaves) {
                continue;
            }
            let v = cone_volume(nodes, root, leaves);
            if v >= 2 && best.is_none_or(|(_, bv)| v > bv) {
                best = Some((i, v));
            }
        }
        let leaves = self.cuts.leaf_sets(root)[best?.0].clone();
        let table = cone_table(nodes, root, &leaves).ok()?;
        let rebuilt = self.synth(table, &leaves);
        Some(if inverted { self.b.not(rebuilt) } else { rebuilt })
    }

    /// Whether every node strictly between `root` and `leaves` is free of
    /// extra fanout.
    fn inside_fanout_free(&self, root: NodeId, leaves: &[NodeId]) -> bool {
        let nodes = self.b.nodes();
        let mut stack = vec![root];
        let mut seen = FxHashSet::default();
        while let Some(id) = stack.pop() {
            if leaves.contains(&id) || !seen.insert(id) {
                continue;
            }
            if id != root && self.boundary.contains(&id) {
                return false;
            }
            match nodes[id.index()] {
                NodeKind::And(a, b) => stack.extend([a, b]),
                NodeKind::Not(c) => stack.push(c),
                _ => {}
            }
        }
        true
    }

    /// Builds `table` over `leaves` by recursive Shannon expansion.
    fn synth(&mut self, table: u8, leaves: &[NodeId]) -> NodeId {
        if table == 0 {
            return NodeId::CONST_FALSE;
        }
        if table == 0xFF {
            return self.b.const_true();
        }
        for (i, &leaf) in leaves.iter().enumerate() {
            if table == LEAF_TABLES[i] {
                return leaf;
            }
            if table == !LEAF_TABLES[i] {
                return self.b.not(leaf);
            }
        }
        let support: Vec<usize> = (0..leaves.len())
            .filter(|&k| cofactor(table, k, true) != cofactor(table, k, false))
            .collect();
        let k = *support.choose(self.rng).expect("non-constant table has support");
        let hi = self.synth(cofactor(table, k, true), leaves);
        let lo = self.synth(cofactor(table, k, false), leaves);
        self.mux(leaves[k], hi, lo)
    }

    fn mux(&mut self, s: NodeId, hi: NodeId, lo: NodeId) -> NodeId {
        let ns = self.b.not(s);
        if self.rng.gen_bool(OR_FORM_PROB) {
            let t = self.b.and(s, hi);
            let e = self.b.and(ns, lo);
            self.b.or(t, e)
        } else {
            let nhi = self.b.not(hi);
            let nlo = self.b.not(lo);
            let t = self.b.and(s, nhi);
            let e = self.b.and(ns, nlo);
            let n = self.b.or(t, e);
            self.b.not(n)
        }
    }

    fn rebalance(&mut self, x: NodeId, y: NodeId) -> Option<NodeId> {
        let free = |id: NodeId| !self.boundary.contains(&id);
        let (inner, other) = match (self.b.kind(x), self.b.kind(y)) {
            (NodeKind::And(a, b), _) if free(x) => ((a, b), y),
            (_, NodeKind::And(a, b)) if free(y) => ((a, b), x),
            _ => return None,
        };
        let (keep, moved) = if self.rng.gen() { inner } else { (inner.1, inner.0) };
        let t = self.b.and(moved, other);
        Some(self.b.and(keep, t))
    }

    fn distribute(&mut self, x: NodeId, y: NodeId) -> Option<NodeId> {
        let nand = |p: &Self, id: NodeId| {
            let c = p.b.negated_child(id)?;
            match p.b.kind(c) {
                NodeKind::And(u, v) if !p.boundary.contains(&id) && !p.boundary.contains(&c) => Some((u, v)),
                _ => None,
            }
        };
        let ((u, v), c) = match (nand(self, x), nand(self, y)) {
            (Some(uv), _) => (uv, y),
            (_, Some(uv)) => (uv, x),
            _ => return None,
        };
        let nu = self.b.not(u);
        let nv = self.b.not(v);
        let l = self.b.and(nu, c);
        let r = self.b.and(nv, c);
        Some(self.b.or(l, r))
    }
}

/// Cofactor of a 3-input table with leaf `k` fixed, replicated over leaf `k`.
fn cofactor(table: u8, k: usize, value: bool) -> u8 {
    let mut out = 0u8;
    for i in 0..8 {
        let j = if value { i | (1 << k) } else { i & !(1 << k) };
        out |= ((table >> j) & 1) << i;
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::netlist::{equiv_check, gen_csa_multiplier, EquivMode};

    #[test]
    fn zero_passes_is_identity() {
        let n = gen_csa_multiplier(4).unwrap().netlist;
        let (p, stats) = perturb_with_stats(&n, 9, 0);
        assert_eq!(p, n);
        assert_eq!(stats.resynthesized + stats.rebalanced + stats.distributed, 0);
    }

    #[test]
    fn csa6_three_passes_equivalent() {
        let n = gen_csa_multiplier(6).unwrap().netlist;
        let (p, stats) = perturb_with_stats(&n, 1, 3);
        assert!(stats.resynthesized > 0 && stats.rebalanced > 0 && stats.distributed > 0);
        assert_ne!(p, n);
        let v = equiv_check(&n, &p, EquivMode::Exhaustive).unwrap();
        assert_eq!(v, crate::netlist::Verdict::Equal { vectors: 4096, proven: true });
    }

    #[test]
    fn deterministic_under_seed() {
        let n = gen_csa_multiplier(5).unwrap().netlist;
        assert_eq!(perturb(&n, 4, 2), perturb(&n, 4, 2));
        assert_ne!(perturb(&n, 4, 2), perturb(&n, 5, 2));
    }

    #[test]
    fn cofactors() {
        // Majority: fixing c=1 gives a|b, c=0 gives a&b.
        assert_eq!(cofactor(0xE8, 2, true), 0xEE);
        assert_eq!(cofactor(0xE8, 2, false), 0x88);
        // Parity with a=1 is the complement of b^c (0x3C).
        assert_eq!(cofactor(0x96, 0, true), 0xC3);
        assert_eq!(cofactor(0x96, 0, false), 0x3C);
    }
}
