//! Cut-enumeration adder detector used as the comparison point.
//!
//! Full adders are found as pairs of 3-leaf cuts on the same leaf set whose
//! functions fall into the XOR3 and MAJ3 NPN classes. A pair is exact only if
//! both roots compute the literal tables `0x96` and `0xE8`, with no inverted
//! leaves or outputs. Half adders are 2-leaf XOR/AND pairs.

pub mod cuts;
pub mod npn;

use std::collections::BTreeMap;

use serde::Serialize;
use smallvec::SmallVec;

pub use cuts::{cut_truth_table, enumerate_cuts, Cut, CutEnumerator, TruthTable8, CUT_CAP};
pub use npn::{npn_canonical, NpnClass, NpnTransform};

use crate::fa::{Detector, FaCell, FaReport};
use crate::netlist::{Netlist, NodeId, NodeKind};

pub const XOR3: u8 = 0x96;
pub const MAJ3: u8 = 0xE8;
const XOR2: u8 = 0x66;
const AND2: u8 = 0x88;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum BlockKind {
    Fa,
    Ha,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct Block {
    pub kind: BlockKind,
    pub exact: bool,
    pub leaves: Vec<NodeId>,
    pub sum: NodeId,
    pub carry: NodeId,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct BaselineResult {
    pub exact_fa: u64,
    pub npn_fa: u64,
    pub ha: u64,
    pub blocks: Vec<Block>,
}

impl BaselineResult {
    pub fn to_report(&self) -> FaReport {
        let cells: Vec<FaCell> = self
            .blocks
            .iter()
            .filter(|b| b.kind == BlockKind::Fa && b.exact)
            .map(|b| FaCell {
                inputs: b.leaves.iter().map(|l| l.0).collect(),
                carry: b.carry.0,
                sum: b.sum.0,
            })
            .collect();
        let triples: std::collections::BTreeSet<&Vec<u32>> = cells.iter().map(|c| &c.inputs).collect();
        FaReport {
            detector: Detector::Baseline,
            exact_fa_count: self.exact_fa,
            distinct_triples: triples.len() as u64,
            npn_fa_count: Some(self.npn_fa),
            ha_count: Some(self.ha),
            dag_nodes: None,
            cells,
        }
    }
}

#[derive(Default)]
struct Candidates {
    sums: Vec<(NodeId, bool)>,
    carries: Vec<(NodeId, bool)>,
}

pub fn detect_fa_baseline(netlist: &Netlist) -> BaselineResult {
    let xor3 = npn_canonical(XOR3).canonical;
    let maj3 = npn_canonical(MAJ3).canonical;
    let xor2 = npn_canonical(XOR2).canonical;
    let and2 = npn_canonical(AND2).canonical;

    let mut e = CutEnumerator::new(3, CUT_CAP);
    e.extend(netlist.nodes());
    let nodes = netlist.nodes();
    let mut three: BTreeMap<SmallVec<[NodeId; 3]>, Candidates> = BTreeMap::new();
    let mut two: BTreeMap<SmallVec<[NodeId; 3]>, Candidates> = BTreeMap::new();
    for (i, kind) in nodes.iter().enumerate() {
        if !matches!(kind, NodeKind::And(..)) {
            continue;
        }
        let root = NodeId(i as u32);
        for leaves in e.leaf_sets(root) {
            if leaves.len() < 2 || leaves.contains(&NodeId::CONST_FALSE) {
                continue;
            }
            let Ok(table) = cuts::cone_table(nodes, root, leaves) else {
                continue;
            };
            let class = npn_canonical(table).canonical;
            let (map, sum_class, carry_class, sum_t, carry_t) = if leaves.len() == 3 {
                (&mut three, xor3, maj3, XOR3, MAJ3)
            } else {
                (&mut two, xor2, and2, XOR2, AND2)
            };
            if class == sum_class {
                map.entry(leaves.clone()).or_default().sums.push((root, table == sum_t));
            } else if class == carry_class {
                map.entry(leaves.clone()).or_default().carries.push((root, table == carry_t));
            }
        }
    }

    let mut used = vec![false; nodes.len()];
    let mut blocks = Vec::new();
    let mut select = |map: &BTreeMap<SmallVec<[NodeId; 3]>, Candidates>, kind: BlockKind, exact_pass: bool| {
        for (leaves, c) in map {
            for &(s, se) in &c.sums {
                for &(k, ke) in &c.carries {
                    let exact = se && ke;
                    if exact != exact_pass || s == k || used[s.index()] || used[k.index()] {
                        continue;
                    }
                    used[s.index()] = true;
                    used[k.index()] = true;
                    blocks.push(Block {
                        kind,
                        exact,
                        leaves: leaves.to_vec(),
                        sum: s,
                        carry: k,
                    });
                }
            }
        }
    };
    select(&three, BlockKind::Fa, true);
    select(&three, BlockKind::Fa, false);
    select(&two, BlockKind::Ha, true);
    select(&two, BlockKind::Ha, false);

    let count = |pred: &dyn Fn(&Block) -> bool| blocks.iter().filter(|b| pred(b)).count() as u64;
    BaselineResult {
        exact_fa: count(&|b| b.kind == BlockKind::Fa && b.exact),
        npn_fa: count(&|b| b.kind == BlockKind::Fa),
        ha: count(&|b| b.kind == BlockKind::Ha),
        blocks,
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::netlist::{gen_csa_multiplier, perturb, NetlistBuilder};

    #[test]
    fn single_fa_cell_is_exact() {
        let mut b = NetlistBuilder::new();
        let (x, y, z) = (b.input(), b.input(), b.input());
        let (s, c) = b.full_adder(x, y, z);
        b.add_output(s, false);
        b.add_output(c, false);
        let r = detect_fa_baseline(&b.finish());
        assert_eq!((r.exact_fa, r.npn_fa), (1, 1));
    }

    #[test]
    fn complemented_carry_cone_is_npn_only() {
        // Carry realised as !(!maj): the AND cone computes the complement of
        // majority and the output edge restores it.
        let mut b = NetlistBuilder::new();
        let (x, y, z) = (b.input(), b.input(), b.input());
        let s = {
            let t = b.xor(x, y);
            b.xor(t, z)
        };
        let xy = b.and(x, y);
        let xz = b.and(x, z);
        let yz = b.and(y, z);
        let t = b.or(xy, xz);
        let carry = b.or(t, yz);
        b.add_output(s, false);
        b.add_output(carry, false);
        let n = b.finish();
        let r = detect_fa_baseline(&n);
        assert_eq!((r.exact_fa, r.npn_fa), (0, 1));
    }

    #[test]
    fn csa3_has_three_exact() {
        let g = gen_csa_multiplier(3).unwrap();
        let r = detect_fa_baseline(&g.netlist);
        assert_eq!(r.exact_fa, 3);
        assert_eq!(r.exact_fa, g.meta.fa_count);
    }

    #[test]
    fn csa_exact_matches_metadata() {
        for n in [4, 6, 8] {
            let g = gen_csa_multiplier(n).unwrap();
            assert_eq!(detect_fa_baseline(&g.netlist).exact_fa, g.meta.fa_count, "n={n}");
        }
    }

    #[test]
    fn half_adder_detected() {
        let mut b = NetlistBuilder::new();
        let (x, y) = (b.input(), b.input());
        let (s, c) = b.half_adder(x, y);
        b.add_output(s, false);
        b.add_output(c, false);
        let r = detect_fa_baseline(&b.finish());
        assert_eq!((r.exact_fa, r.ha), (0, 1));
    }

    #[test]
    fn perturbation_destroys_exact_shapes() {
        let g = gen_csa_multiplier(8).unwrap();
        let p = perturb(&g.netlist, 7, 3);
        let r = detect_fa_baseline(&p);
        assert!(r.exact_fa < 48, "exact={}", r.exact_fa);
    }

    #[test]
    fn report_counts() {
        let g = gen_csa_multiplier(4).unwrap();
        let rep = detect_fa_baseline(&g.netlist).to_report();
        assert_eq!(rep.exact_fa_count, 8);
        assert_eq!(rep.cells.len(), 8);
        assert_eq!(rep.distinct_triples, 8);
        assert_eq!(rep.detector, Detector::Baseline);
    }
}
