use proptest::prelude::*;

use super::*;
use crate::egraph::{congruence_audit, egraph_from_netlist, semantic_audit, Pattern};
use crate::netlist::{gen_csa_multiplier, perturb, CellKind, Netlist, NetlistBuilder, NodeId};
use crate::rules::{build_r1, synthesize_r2, Profile, DEFAULT_MAX_GATES};

fn var(eg: &mut EGraph, n: u32) -> Id {
    eg.add_node(ENode::leaf(Op::Var(n)))
}

fn r1() -> RuleSet {
    build_r1(Profile::Full)
}

fn r2() -> RuleSet {
    synthesize_r2(DEFAULT_MAX_GATES).unwrap()
}

fn single_fa() -> Netlist {
    let mut b = NetlistBuilder::new();
    let x = b.input();
    let y = b.input();
    let z = b.input();
    let (s, c) = b.full_adder(x, y, z);
    b.add_output(s, false);
    b.add_output(c, false);
    b.finish()
}

fn audits(eg: &EGraph) {
    congruence_audit(eg).unwrap();
    semantic_audit(eg, 11).unwrap();
}

#[test]
fn empty_ruleset_saturates_at_once() {
    let mut eg = egraph_from_netlist(&single_fa()).egraph;
    let s = saturate(&mut eg, &RuleSet::default(), 10, &SaturationLimits::default());
    assert_eq!(s.iterations.len(), 1);
    assert_eq!(s.iterations[0].merges, 0);
    assert_eq!(s.stop(), StopReason::Saturated);
}

#[test]
fn double_negation_collapses() {
    let mut eg = EGraph::new();
    let a = var(&mut eg, 0);
    let na = eg.add(Op::Not, &[a]).unwrap();
    let nna = eg.add(Op::Not, &[na]).unwrap();
    let rules = RuleSet::parse("[r1] dn: (not (not ?x)) => ?x", Profile::Full).unwrap();
    let s = saturate(&mut eg, &rules, 10, &SaturationLimits::default());
    assert_eq!(eg.find(nna), eg.find(a));
    assert_eq!(s.stop(), StopReason::Saturated);
    assert_eq!(s.iterations[0].merges, 1);
}

#[test]
fn iteration_cap_is_reported() {
    let mut eg = egraph_from_netlist(&gen_csa_multiplier(3).unwrap().netlist).egraph;
    let s = saturate(&mut eg, &r1(), 1, &SaturationLimits::default());
    assert_eq!(s.phases[0].stop, StopReason::IterLimit);
    assert_eq!(s.iterations.len(), 1);
}

#[test]
fn node_limit_stops_the_phase() {
    let mut eg = egraph_from_netlist(&gen_csa_multiplier(4).unwrap().netlist).egraph;
    let limits = SaturationLimits {
        node_limit: 200,
        ..SaturationLimits::default()
    };
    let s = saturate(&mut eg, &r1(), 10, &limits);
    assert_eq!(s.stop(), StopReason::NodeLimit);
    assert!(s.iterations.len() < 10);
    audits(&eg);
}

#[test]
fn limits_validate() {
    assert!(SaturationLimits::default().validate().is_ok());
    let bad = SaturationLimits {
        r2_iters: 0,
        ..SaturationLimits::default()
    };
    assert!(bad.validate().is_err());
    let bad = SaturationLimits {
        time_limit: 0.0,
        ..SaturationLimits::default()
    };
    assert!(bad.validate().is_err());
}

#[test]
fn once_rules_fire_once_per_class() {
    let mut eg = EGraph::new();
    var(&mut eg, 0);
    let rules = RuleSet::parse("[r1] di: ?a => (not (not ?a)) @once", Profile::Full).unwrap();
    saturate(&mut eg, &rules, 10, &SaturationLimits::default());
    // a and not(a); not(not(a)) lives in a's class.
    assert_eq!(eg.class_count(), 2);
    audits(&eg);
}

#[test]
fn r2_skips_repeated_and_constant_inputs() {
    let mut eg = EGraph::new();
    let a = var(&mut eg, 0);
    let b = var(&mut eg, 1);
    let zero = eg.add_node(ENode::leaf(Op::Const0));
    let maj = Pattern::parse("(or (or (and ?a ?b) (and ?a ?c)) (and ?b ?c))").unwrap();
    let rep = eg.instantiate(&maj, &crate::egraph::Subst::from_ids(&[a, a, b]));
    let con = eg.instantiate(&maj, &crate::egraph::Subst::from_ids(&[a, b, zero]));
    saturate(&mut eg, &r2(), 3, &SaturationLimits::default());
    for id in [rep, con] {
        assert!(eg.nodes(id).iter().all(|n| n.op != Op::Maj3), "{id}");
    }
}

#[test]
fn prune_drops_commuted_duplicates() {
    let mut eg = EGraph::new();
    let a = var(&mut eg, 0);
    let b = var(&mut eg, 1);
    let ab = eg.add(Op::And, &[a, b]).unwrap();
    let ba = eg.add(Op::And, &[b, a]).unwrap();
    eg.merge(ab, ba);
    eg.rebuild();
    assert_eq!(eg.nodes(ab).len(), 2);
    assert_eq!(prune_redundant(&mut eg), 1);
    assert_eq!(eg.nodes(ab), &[ENode::new(Op::And, &[a, b])]);
    assert_eq!(prune_redundant(&mut eg), 0);
    // Single-node classes stay put.
    assert_eq!(eg.nodes(a).len(), 1);
    audits(&eg);
}

#[test]
fn prune_after_r1_shrinks_csa8() {
    let mut eg = egraph_from_netlist(&gen_csa_multiplier(8).unwrap().netlist).egraph;
    let limits = SaturationLimits::default();
    saturate(&mut eg, &r1(), limits.r1_iters, &limits);
    let before = eg.node_count();
    let removed = prune_redundant(&mut eg);
    assert!(removed > 0);
    assert_eq!(eg.node_count(), before - removed);
    audits(&eg);
}

#[test]
fn pairing_on_handmade_graph() {
    let mut eg = EGraph::new();
    let (a, b, c) = (var(&mut eg, 0), var(&mut eg, 1), var(&mut eg, 2));
    let x = eg.add(Op::Xor3, &[c, a, b]).unwrap();
    assert!(insert_fa_nodes(&mut eg).is_empty(), "no MAJ3 yet");
    let m = eg.add(Op::Maj3, &[b, c, a]).unwrap();
    let p = insert_fa_nodes(&mut eg);
    assert_eq!(p.len(), 1);
    let p = p[0];
    assert_eq!(p.inputs, [a, b, c]);
    assert_eq!(p.fst, eg.find(m));
    assert_eq!(p.snd, eg.find(x));
    assert!(eg.nodes(m).iter().any(|n| n.op == Op::Fst));
    assert!(eg.nodes(x).iter().any(|n| n.op == Op::Snd));
    assert!(insert_fa_nodes(&mut eg).is_empty(), "idempotent");
    assert_eq!(fa_pairings(&eg), vec![p]);
    audits(&eg);
}

#[test]
fn pairing_skips_complement_triple() {
    let mut eg = EGraph::new();
    let (a, b, c) = (var(&mut eg, 0), var(&mut eg, 1), var(&mut eg, 2));
    let n: Vec<Id> = [a, b, c].iter().map(|&v| eg.add(Op::Not, &[v]).unwrap()).collect();
    eg.add(Op::Xor3, &[a, b, c]).unwrap();
    eg.add(Op::Maj3, &[a, b, c]).unwrap();
    eg.add(Op::Xor3, &n).unwrap();
    eg.add(Op::Maj3, &n).unwrap();
    assert_eq!(insert_fa_nodes(&mut eg).len(), 1);
    audits(&eg);
}

/// FST/SND agree with MAJ3/XOR3 on the eight rows of the triple.
#[test]
fn projection_semantics() {
    let mut eg = EGraph::new();
    let (a, b, c) = (var(&mut eg, 0), var(&mut eg, 1), var(&mut eg, 2));
    let fa = eg.add(Op::Fa, &[a, b, c]).unwrap();
    let fst = eg.add(Op::Fst, &[fa]).unwrap();
    let snd = eg.add(Op::Snd, &[fa]).unwrap();
    let maj = eg.add(Op::Maj3, &[a, b, c]).unwrap();
    let xor = eg.add(Op::Xor3, &[a, b, c]).unwrap();
    eg.merge(fst, maj);
    eg.merge(snd, xor);
    eg.rebuild();
    semantic_audit(&eg, 0).unwrap();
    let mut wrong = eg.clone();
    wrong.merge(fst, xor);
    wrong.rebuild();
    assert!(semantic_audit(&wrong, 0).is_err());
}

#[test]
fn identity_netlist_gets_no_adders() {
    let mut b = NetlistBuilder::new();
    let x = b.input();
    b.add_output(x, false);
    let mut eg = egraph_from_netlist(&b.finish()).egraph;
    let (stats, pairs) = run_phases(&mut eg, &r1(), &r2(), &SaturationLimits::default());
    assert!(pairs.is_empty());
    assert_eq!(stats.fa_pairings, 0);
    for id in eg.class_ids() {
        assert!(eg
            .nodes(id)
            .iter()
            .all(|n| !matches!(n.op, Op::Xor3 | Op::Maj3 | Op::Fa)));
    }
}

/// Complemented variants of the same adder may pair too; the plain one must
/// be among them.
#[test]
fn single_fa_pairs_its_outputs() {
    let n = single_fa();
    let fe = egraph_from_netlist(&n);
    let mut eg = fe.egraph;
    let (stats, pairs) = run_phases(&mut eg, &r1(), &r2(), &SaturationLimits::default());
    assert_eq!(stats.phases.len(), 2);
    let cls = |id: NodeId| eg.find(fe.node_map[id.index()]);
    let mut ins = [cls(n.inputs()[0]), cls(n.inputs()[1]), cls(n.inputs()[2])];
    ins.sort_unstable();
    let (sum, carry) = (cls(n.outputs()[0].node), cls(n.outputs()[1].node));
    assert!(
        pairs.iter().any(|p| p.inputs == ins && p.fst == carry && p.snd == sum),
        "{pairs:?}"
    );
    audits(&eg);
}

/// Class of each netlist node, for looking up generator cells.
fn node_classes(n: &Netlist) -> (EGraph, Vec<Id>) {
    let fe = egraph_from_netlist(n);
    (fe.egraph, fe.node_map)
}

/// R2 on its own identifies every cell of an unrewritten generator netlist.
#[test]
fn r2_alone_finds_every_cell() {
    for n in [3u32, 4, 6] {
        let g = gen_csa_multiplier(n).unwrap();
        let (mut eg, map) = node_classes(&g.netlist);
        let limits = SaturationLimits::default();
        saturate(&mut eg, &r2(), limits.r2_iters, &limits);
        audits(&eg);
        let cls = |id: NodeId| eg.find(map[id.index()]);
        for cell in g.meta.cells.iter().filter(|c| c.kind == CellKind::Full) {
            let mut ins: Vec<Id> = cell.inputs.iter().map(|&i| cls(i)).collect();
            ins.sort_unstable();
            let has = |class: Id, op: Op| {
                eg.nodes(class).iter().any(|m| {
                    let mut ch: Vec<Id> = m.children.iter().map(|&c| eg.find(c)).collect();
                    ch.sort_unstable();
                    m.op == op && ch == ins
                })
            };
            assert!(has(cls(cell.sum), Op::Xor3), "n = {n}: sum of {cell:?}");
            assert!(has(cls(cell.carry), Op::Maj3), "n = {n}: carry of {cell:?}");
        }
    }
}

/// Every generator cell ends up with a pairing on its own classes.
#[test]
fn csa_cells_are_all_paired() {
    for n in 3..=6u32 {
        let g = gen_csa_multiplier(n).unwrap();
        let (mut eg, map) = node_classes(&g.netlist);
        let (stats, pairs) = run_phases(&mut eg, &r1(), &r2(), &SaturationLimits::default());
        let cls = |id: NodeId| eg.find(map[id.index()]);
        let full: Vec<_> = g.meta.cells.iter().filter(|c| c.kind == CellKind::Full).collect();
        assert_eq!(full.len(), (n as usize - 1).pow(2) - 1);
        assert!(pairs.len() >= full.len());
        assert_eq!(stats.fa_pairings, pairs.len());
        for cell in full {
            let mut ins: Vec<Id> = cell.inputs.iter().map(|&i| cls(i)).collect();
            ins.sort_unstable();
            assert!(
                pairs
                    .iter()
                    .any(|p| p.inputs[..] == ins[..] && p.fst == cls(cell.carry) && p.snd == cls(cell.sum)),
                "n = {n}: {cell:?}"
            );
        }
    }
}

#[test]
fn run_phases_is_deterministic() {
    let g = gen_csa_multiplier(4).unwrap();
    let n = perturb(&g.netlist, 3, 2);
    let run = || {
        let mut eg = egraph_from_netlist(&n).egraph;
        run_phases(&mut eg, &r1(), &r2(), &SaturationLimits::default())
    };
    assert_eq!(run(), run());
}

#[test]
fn phases_stay_sound_on_perturbed_csa() {
    let g = gen_csa_multiplier(4).unwrap();
    let n = perturb(&g.netlist, 5, 2);
    let mut eg = egraph_from_netlist(&n).egraph;
    let limits = SaturationLimits::default();
    saturate(&mut eg, &r1(), limits.r1_iters, &limits);
    audits(&eg);
    prune_redundant(&mut eg);
    audits(&eg);
    saturate(&mut eg, &r2(), limits.r2_iters, &limits);
    audits(&eg);
    insert_fa_nodes(&mut eg);
    audits(&eg);
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(6))]

    #[test]
    fn pairings_grow_with_r2_iters(seed in 0u64..1000) {
        let g = gen_csa_multiplier(4).unwrap();
        let n = perturb(&g.netlist, seed, 1);
        let count = |iters: usize| {
            let mut eg = egraph_from_netlist(&n).egraph;
            let limits = SaturationLimits { r2_iters: iters, ..SaturationLimits::default() };
            run_phases(&mut eg, &r1(), &r2(), &limits).1.len()
        };
        let one = count(1);
        let three = count(3);
        prop_assert!(one <= three, "{} > {}", one, three);
    }
}
