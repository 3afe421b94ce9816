//! DAG extraction that maximizes the number of full adders kept in the
//! netlist, and lowering of the result back to an AIG.
//!
//! A full adder counts once it is in the DAG with both its carry (`FST`) and
//! its sum (`SND`) projection selected. An FA reached through one projection
//! only costs nothing, so ties fall back to the plain XOR3/MAJ3 or gate-level
//! nodes.

mod exact;
mod lower;

use std::collections::{BTreeMap, BTreeSet};

use rustc_hash::{FxHashMap, FxHashSet};
use thiserror::Error;

use crate::egraph::{EGraph, ENode, Id, Op};
use crate::fa::{Detector, FaCell, FaReport};

pub use lower::{dag_to_netlist, AnnotatedCell, FaAnnotation, InputMap, Lowered};

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum ExtractError {
    #[error("root class {0} is not in the e-graph")]
    MissingRoot(Id),
    #[error("e-graph must be rebuilt before extraction")]
    Dirty,
    #[error("variable {0} has no netlist input")]
    UnmappedVar(u32),
    #[error("invalid selection: {0}")]
    Invalid(String),
}

pub type Result<T> = std::result::Result<T, ExtractError>;

/// E-graphs with at most this many classes are extracted exhaustively.
pub const EXACT_CLASS_LIMIT: usize = 16;
/// Upper bound on the number of full selections the exhaustive search may face.
const EXACT_SPACE_LIMIT: f64 = 4e6;

/// Projection bits in cost sets.
const CARRY: u8 = 1;
const SUM: u8 = 2;

/// One chosen e-node per class reachable from the root.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ExtractedDag {
    root: Id,
    choices: BTreeMap<Id, ENode>,
    /// Children before parents.
    order: Vec<Id>,
    exhaustive: bool,
}

impl ExtractedDag {
    /// Restricts `choices` to the classes reachable from `root` and checks
    /// that the result is closed, acyclic and FA-atomic.
    pub fn new(root: Id, choices: BTreeMap<Id, ENode>) -> Result<Self> {
        let mut dag = ExtractedDag {
            root,
            choices: BTreeMap::new(),
            order: Vec::new(),
            exhaustive: false,
        };
        // 0 unseen, 1 open, 2 closed.
        let mut state: FxHashMap<Id, u8> = FxHashMap::default();
        let mut stack: Vec<(Id, usize)> = vec![(root, 0)];
        state.insert(root, 1);
        while let Some(&mut (id, ref mut next)) = stack.last_mut() {
            let node = choices
                .get(&id)
                .ok_or_else(|| ExtractError::Invalid(format!("no choice for {id}")))?;
            if let Some(&c) = node.children.get(*next) {
                *next += 1;
                match state.get(&c).copied().unwrap_or(0) {
                    0 => {
                        state.insert(c, 1);
                        stack.push((c, 0));
                    }
                    1 => return Err(ExtractError::Invalid(format!("cycle through {c}"))),
                    _ => {}
                }
            } else {
                stack.pop();
                state.insert(id, 2);
                dag.order.push(id);
                dag.choices.insert(id, node.clone());
            }
        }
        dag.check_atomicity()?;
        Ok(dag)
    }

    pub fn root(&self) -> Id {
        self.root
    }

    pub fn choice(&self, id: Id) -> Option<&ENode> {
        self.choices.get(&id)
    }

    pub fn choices(&self) -> &BTreeMap<Id, ENode> {
        &self.choices
    }

    /// Classes in topological order, children first.
    pub fn order(&self) -> &[Id] {
        &self.order
    }

    pub fn len(&self) -> usize {
        self.choices.len()
    }

    pub fn is_empty(&self) -> bool {
        self.choices.is_empty()
    }

    /// Whether the selection came from the exhaustive search.
    pub fn is_exhaustive(&self) -> bool {
        self.exhaustive
    }

    fn check_atomicity(&self) -> Result<()> {
        let mut projected: FxHashSet<Id> = FxHashSet::default();
        for (id, n) in &self.choices {
            if matches!(n.op, Op::Fst | Op::Snd) {
                let fa = n.children[0];
                if self.choices.get(&fa).map(|m| m.op) != Some(Op::Fa) {
                    return Err(ExtractError::Invalid(format!(
                        "projection in {id} without its FA node"
                    )));
                }
                projected.insert(fa);
            }
        }
        for (id, n) in &self.choices {
            if n.op == Op::Fa && !projected.contains(id) {
                return Err(ExtractError::Invalid(format!("FA {id} has no projection")));
            }
        }
        Ok(())
    }

    /// Projection bits used per FA class: 1 for the carry, 2 for the sum.
    pub fn fa_usage(&self) -> BTreeMap<Id, u8> {
        let mut usage: BTreeMap<Id, u8> = BTreeMap::new();
        for n in self.choices.values() {
            match n.op {
                Op::Fst => *usage.entry(n.children[0]).or_default() |= CARRY,
                Op::Snd => *usage.entry(n.children[0]).or_default() |= SUM,
                _ => {}
            }
        }
        usage
    }

    /// FA classes with both projections selected.
    pub fn complete_fas(&self) -> Vec<Id> {
        self.fa_usage()
            .into_iter()
            .filter(|&(_, m)| m == CARRY | SUM)
            .map(|(id, _)| id)
            .collect()
    }
}

/// Cost bookkeeping of one class of a DAG.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct CostSet {
    /// FA classes in the cone of this class, with the projections the cone
    /// uses: bit 0 carry, bit 1 sum. Shared sub-DAGs contribute once.
    pub results: BTreeMap<Id, u8>,
    /// Minus the number of entries with both projections.
    pub total: i64,
    pub chosen: ENode,
}

/// Cost sets of every class of `dag`, computed bottom-up.
pub fn cost_sets(dag: &ExtractedDag) -> BTreeMap<Id, CostSet> {
    let mut out: BTreeMap<Id, CostSet> = BTreeMap::new();
    for &id in dag.order() {
        let node = &dag.choices[&id];
        let mut results: BTreeMap<Id, u8> = BTreeMap::new();
        for c in &node.children {
            for (&k, &m) in &out[c].results {
                *results.entry(k).or_default() |= m;
            }
        }
        match node.op {
            Op::Fst => *results.entry(node.children[0]).or_default() |= CARRY,
            Op::Snd => *results.entry(node.children[0]).or_default() |= SUM,
            _ => {}
        }
        let total = -(results.values().filter(|&&m| m == CARRY | SUM).count() as i64);
        out.insert(
            id,
            CostSet {
                results,
                total,
                chosen: node.clone(),
            },
        );
    }
    out
}

/// Minus the number of full adders whose two projections are both in `dag`.
pub fn cost_of(dag: &ExtractedDag) -> i64 {
    -(dag.complete_fas().len() as i64)
}

pub fn fa_report(dag: &ExtractedDag) -> FaReport {
    let mut carry: FxHashMap<Id, Id> = FxHashMap::default();
    let mut sum: FxHashMap<Id, Id> = FxHashMap::default();
    for (&id, n) in dag.choices() {
        match n.op {
            Op::Fst => {
                carry.insert(n.children[0], id);
            }
            Op::Snd => {
                sum.insert(n.children[0], id);
            }
            _ => {}
        }
    }
    let mut cells: Vec<FaCell> = dag
        .complete_fas()
        .into_iter()
        .map(|fa| {
            let mut inputs: Vec<u32> = dag.choices[&fa].children.iter().map(|c| c.0).collect();
            inputs.sort_unstable();
            FaCell {
                inputs,
                carry: carry[&fa].0,
                sum: sum[&fa].0,
            }
        })
        .collect();
    cells.sort();
    let triples: BTreeSet<&Vec<u32>> = cells.iter().map(|c| &c.inputs).collect();
    FaReport {
        detector: Detector::Pipeline,
        exact_fa_count: cells.len() as u64,
        distinct_triples: triples.len() as u64,
        npn_fa_count: None,
        ha_count: None,
        dag_nodes: Some(dag.len() as u64),
        cells,
    }
}

/// Extracts a DAG rooted at `root`, maximizing complete full adders.
pub fn extract(eg: &EGraph, root: Id) -> Result<ExtractedDag> {
    extract_guided(eg, root, &[])
}

/// Like [`extract`], but where no full adder is at stake the selection keeps
/// the e-nodes of `preferred` (typically the input netlist) when it can.
pub fn extract_guided(eg: &EGraph, root: Id, preferred: &[ENode]) -> Result<ExtractedDag> {
    if !eg.is_clean() {
        return Err(ExtractError::Dirty);
    }
    if root.index() >= eg.id_bound() {
        return Err(ExtractError::MissingRoot(root));
    }
    let root = eg.find(root);
    if eg.class_count() <= EXACT_CLASS_LIMIT {
        let space: f64 = eg.class_ids().map(|id| eg.nodes(id).len() as f64).product();
        if space <= EXACT_SPACE_LIMIT {
            let choices = exact::search(eg, root)
                .ok_or_else(|| ExtractError::Invalid("no acyclic selection".into()))?;
            let mut dag = ExtractedDag::new(root, choices)?;
            dag.exhaustive = true;
            return Ok(dag);
        }
    }
    heuristic(eg, root, preferred)
}

/// Selection by a backtracking walk from the root, re-run without the adders
/// it left half-used until none remain.
fn heuristic(eg: &EGraph, root: Id, preferred: &[ENode]) -> Result<ExtractedDag> {
    let original: FxHashSet<Id> = preferred.iter().filter_map(|n| eg.lookup(n)).collect();
    let preferred: FxHashSet<ENode> = preferred.iter().map(|n| sorted_key(&eg.canonical(n))).collect();
    let level = levels(eg);
    let mut dropped: FxHashSet<Id> = FxHashSet::default();
    loop {
        let banned = rival_adders(eg, &original, &dropped);
        let choices = Selector::new(eg, &level, &preferred, &banned)
            .run(root)
            .unwrap_or_else(|| min_level_choices(eg, &level));
        let dag = ExtractedDag::new(root, choices)?;
        let incomplete: Vec<Id> = dag
            .fa_usage()
            .into_iter()
            .filter(|&(_, m)| m != CARRY | SUM)
            .map(|(id, _)| id)
            .collect();
        if incomplete.is_empty() {
            return Ok(dag);
        }
        log::debug!("extraction: dropping {} half-used adders", incomplete.len());
        dropped.extend(incomplete);
    }
}

/// The class computing the complement of `c`, if any.
fn complement(eg: &EGraph, c: Id) -> Option<Id> {
    eg.lookup(&ENode::new(Op::Not, &[c])).map(|n| eg.find(n)).or_else(|| {
        eg.nodes(c)
            .iter()
            .find(|n| n.op == Op::Not)
            .map(|n| eg.find(n.children[0]))
    })
}

/// Adders to leave out of a selection round: those in `dropped`, and those
/// losing an output class (up to complement) to a preferred rival. Adders
/// whose outputs are `original` classes win, then older classes.
fn rival_adders(eg: &EGraph, original: &FxHashSet<Id>, dropped: &FxHashSet<Id>) -> FxHashSet<Id> {
    let slot = |c: Id| {
        let c = eg.find(c);
        complement(eg, c).map_or(c, |n| n.min(c))
    };
    let is_original = |c: Id| {
        let c = eg.find(c);
        original.contains(&c) || complement(eg, c).is_some_and(|n| original.contains(&n))
    };
    let mut adders: Vec<(bool, Id, Id, [Id; 2])> = Vec::new();
    for id in eg.class_ids() {
        if !eg.nodes(id).iter().any(|n| n.op == Op::Fa) || dropped.contains(&id) {
            continue;
        }
        let fst = eg.lookup(&ENode::new(Op::Fst, &[id]));
        let snd = eg.lookup(&ENode::new(Op::Snd, &[id]));
        let (Some(fst), Some(snd)) = (fst, snd) else {
            continue;
        };
        let slots = [slot(fst), slot(snd)];
        let orig = is_original(fst) && is_original(snd);
        adders.push((!orig, slots[0].max(slots[1]), id, slots));
    }
    adders.sort_unstable();
    let mut taken: FxHashSet<Id> = FxHashSet::default();
    let mut banned = dropped.clone();
    for (_, _, id, slots) in adders {
        if slots.iter().any(|s| taken.contains(s)) {
            banned.insert(id);
        } else {
            taken.extend(slots);
        }
    }
    banned
}

/// Node with operands of `and`/`or` sorted, for order-insensitive lookups.
fn sorted_key(n: &ENode) -> ENode {
    let mut n = n.clone();
    if matches!(n.op, Op::And | Op::Or) {
        n.children.sort_unstable();
    }
    n
}

/// Smallest depth of an acyclic derivation of each class, over all operators.
fn levels(eg: &EGraph) -> Vec<Option<u32>> {
    let mut level: Vec<Option<u32>> = vec![None; eg.id_bound()];
    let ids: Vec<Id> = eg.class_ids().collect();
    loop {
        let mut changed = false;
        for &id in &ids {
            let best = eg
                .nodes(id)
                .iter()
                .filter_map(|n| node_level(eg, n, &level))
                .min();
            if best.is_some() && best < level[id.index()].or(Some(u32::MAX)) {
                level[id.index()] = best;
                changed = true;
            }
        }
        if !changed {
            return level;
        }
    }
}

fn node_level(eg: &EGraph, n: &ENode, level: &[Option<u32>]) -> Option<u32> {
    n.children
        .iter()
        .map(|&c| level[eg.find(c).index()])
        .try_fold(0u32, |m, l| l.map(|l| m.max(l + 1)))
}

/// Every class picks a node of least level; children sit strictly lower, so
/// the selection is acyclic.
fn min_level_choices(eg: &EGraph, level: &[Option<u32>]) -> BTreeMap<Id, ENode> {
    let mut out = BTreeMap::new();
    for id in eg.class_ids() {
        let Some(l) = level[id.index()] else {
            continue;
        };
        let n = eg
            .nodes(id)
            .iter()
            .filter(|n| node_level(eg, n, level) == Some(l))
            .min_by_key(|n| fa_related(n))
            .expect("level witness");
        out.insert(id, n.clone());
    }
    out
}

fn fa_related(n: &ENode) -> bool {
    matches!(n.op, Op::Fa | Op::Fst | Op::Snd)
}

/// Depth-first selection with backtracking: each class tries its nodes in
/// preference order and skips any node that would close a cycle through a
/// class still being decided.
struct Selector<'a> {
    eg: &'a EGraph,
    level: &'a [Option<u32>],
    preferred: &'a FxHashSet<ENode>,
    banned: &'a FxHashSet<Id>,
    /// Classes holding a projection of a usable FA.
    holds_projection: FxHashSet<Id>,
}

struct Frame {
    class: Id,
    cands: Vec<ENode>,
    ci: usize,
    child: usize,
}

const OPEN: u8 = 1;
const DONE: u8 = 2;

impl<'a> Selector<'a> {
    fn new(
        eg: &'a EGraph,
        level: &'a [Option<u32>],
        preferred: &'a FxHashSet<ENode>,
        banned: &'a FxHashSet<Id>,
    ) -> Self {
        let holds_projection = eg
            .class_ids()
            .filter(|&id| {
                eg.nodes(id).iter().any(|n| {
                    matches!(n.op, Op::Fst | Op::Snd) && !banned.contains(&eg.find(n.children[0]))
                })
            })
            .collect();
        Selector {
            eg,
            level,
            preferred,
            banned,
            holds_projection,
        }
    }

    fn rank(&self, class: Id, n: &ENode, committed: &FxHashSet<Id>) -> u8 {
        match n.op {
            Op::Fa => 0,
            Op::Fst | Op::Snd => {
                let fa = self.eg.find(n.children[0]);
                if self.banned.contains(&fa) {
                    5
                } else if committed.contains(&fa) {
                    0
                } else {
                    1
                }
            }
            Op::Not if {
                let k = self.eg.find(n.children[0]);
                k != class && self.holds_projection.contains(&k)
            } =>
            {
                let k = self.eg.find(n.children[0]);
                let committed_here = self.eg.nodes(k).iter().any(|m| {
                    matches!(m.op, Op::Fst | Op::Snd) && committed.contains(&self.eg.find(m.children[0]))
                });
                if committed_here {
                    0
                } else {
                    2
                }
            }
            _ if self.preferred.contains(&sorted_key(n)) => 3,
            _ => 4,
        }
    }

    /// Nodes of `class` in preference order. Projections of an adder whose
    /// other projection is already selected come first, so both land in the
    /// DAG together.
    fn candidates(&self, class: Id, committed: &FxHashSet<Id>) -> Vec<ENode> {
        let mut c: Vec<(u8, u32, &ENode)> = self
            .eg
            .nodes(class)
            .iter()
            .filter_map(|n| Some((self.rank(class, n, committed), node_level(self.eg, n, self.level)?, n)))
            .collect();
        c.sort();
        c.into_iter().map(|(_, _, n)| n.clone()).collect()
    }

    fn run(&self, root: Id) -> Option<BTreeMap<Id, ENode>> {
        let eg = self.eg;
        let budget = 64 * eg.node_count() + 1024;
        let mut steps = 0usize;
        let mut state: Vec<u8> = vec![0; eg.id_bound()];
        let mut choice: BTreeMap<Id, ENode> = BTreeMap::new();
        let mut committed: FxHashSet<Id> = FxHashSet::default();
        state[root.index()] = OPEN;
        let mut stack = vec![Frame {
            class: root,
            cands: self.candidates(root, &committed),
            ci: 0,
            child: 0,
        }];
        while let Some(top) = stack.last_mut() {
            steps += 1;
            if steps > budget {
                log::debug!("extraction: selection budget exhausted");
                return None;
            }
            let Some(node) = top.cands.get(top.ci) else {
                // Every node of this class closes a cycle from here: reopen it
                // for later attempts and make the parent try its next node.
                state[top.class.index()] = 0;
                stack.pop();
                let parent = stack.last_mut()?;
                parent.ci += 1;
                parent.child = 0;
                continue;
            };
            if let Some(&c) = node.children.get(top.child) {
                let c = eg.find(c);
                match state[c.index()] {
                    DONE => top.child += 1,
                    OPEN => {
                        top.ci += 1;
                        top.child = 0;
                    }
                    _ => {
                        state[c.index()] = OPEN;
                        let cands = self.candidates(c, &committed);
                        stack.push(Frame {
                            class: c,
                            cands,
                            ci: 0,
                            child: 0,
                        });
                    }
                }
            } else {
                let mut n = node.clone();
                for c in n.children.iter_mut() {
                    *c = eg.find(*c);
                }
                state[top.class.index()] = DONE;
                if matches!(n.op, Op::Fst | Op::Snd) {
                    committed.insert(n.children[0]);
                }
                choice.insert(top.class, n);
                stack.pop();
                if let Some(parent) = stack.last_mut() {
                    parent.child += 1;
                }
            }
        }
        Some(choice)
    }
}
