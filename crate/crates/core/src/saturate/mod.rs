//! Two-phase saturation, redundant node pruning and full-adder pairing.

mod cuts;
mod pairing;

use std::collections::HashSet;
use std::time::{Duration, Instant};

use serde::Serialize;

use crate::egraph::{EGraph, ENode, Id, Op, Subst};
use crate::rules::{Phase, Rule, RuleSet};

pub use pairing::{fa_pairings, insert_fa_nodes, FaPairing};

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SaturationLimits {
    pub r1_iters: usize,
    pub r2_iters: usize,
    /// Stop a phase once the e-graph holds more e-nodes than this.
    pub node_limit: usize,
    /// Wall-clock budget per phase, in seconds.
    pub time_limit: f64,
    /// Matches a rule may produce in one iteration before the R1 scheduler
    /// bans it for a while.
    pub match_limit: usize,
    pub ban_length: usize,
    pub witness: Witness,
}

/// What licenses an identification rewrite at a class.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum Witness {
    /// A three-leaf cut of the class whose truth table is XOR3 or MAJ3 of
    /// its leaves, up to complemented leaves and output.
    Cut,
    /// Additionally, the left-hand side of an identification rule must
    /// match structurally with its variables bound to the cut leaves.
    Template,
}

impl Default for SaturationLimits {
    fn default() -> Self {
        SaturationLimits {
            r1_iters: 10,
            r2_iters: 3,
            node_limit: 400_000,
            time_limit: 300.0,
            match_limit: 1_000,
            ban_length: 5,
            witness: Witness::Cut,
        }
    }
}

impl SaturationLimits {
    pub fn validate(&self) -> Result<(), String> {
        if self.r1_iters == 0 || self.r2_iters == 0 {
            return Err("iteration limits must be positive".into());
        }
        if self.node_limit == 0 || self.match_limit == 0 {
            return Err("node and match limits must be positive".into());
        }
        if !(self.time_limit > 0.0) {
            return Err("time limit must be positive".into());
        }
        Ok(())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum StopReason {
    Saturated,
    IterLimit,
    NodeLimit,
    TimeLimit,
}

impl StopReason {
    pub fn is_limit(self) -> bool {
        matches!(self, StopReason::NodeLimit | StopReason::TimeLimit)
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct IterationStats {
    pub phase: Phase,
    pub iteration: usize,
    pub matches: usize,
    pub merges: usize,
    pub classes: usize,
    pub nodes: usize,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct PhaseStats {
    pub phase: Phase,
    pub stop: StopReason,
    pub iterations: usize,
    /// Nodes removed by the prune that followed the phase.
    pub pruned: usize,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Default)]
pub struct SaturationStats {
    pub iterations: Vec<IterationStats>,
    pub phases: Vec<PhaseStats>,
    pub fa_pairings: usize,
    pub peak_nodes: usize,
    pub peak_classes: usize,
}

impl SaturationStats {
    /// The most severe stop reason: a tripped limit wins over iteration caps.
    pub fn stop(&self) -> StopReason {
        let reasons: Vec<StopReason> = self.phases.iter().map(|p| p.stop).collect();
        for r in [StopReason::TimeLimit, StopReason::NodeLimit, StopReason::IterLimit] {
            if reasons.contains(&r) {
                return r;
            }
        }
        StopReason::Saturated
    }

    pub fn limit_tripped(&self) -> bool {
        self.stop().is_limit()
    }

    fn observe(&mut self, eg: &EGraph) {
        self.peak_nodes = self.peak_nodes.max(eg.node_count());
        self.peak_classes = self.peak_classes.max(eg.class_count());
    }
}

#[derive(Debug, Clone, Default)]
struct Backoff {
    times_banned: u32,
    banned_until: usize,
}

/// Saturates with the rules of `rules` for at most `iter_limit` iterations.
///
/// Each iteration searches every rule against the same e-graph, applies all
/// matches in rule then match order and rebuilds once. R1 rules run under a
/// backoff scheduler; R2 rules match modulo commutativity and only fire on
/// three distinct non-constant classes.
pub fn saturate(
    eg: &mut EGraph,
    rules: &RuleSet,
    iter_limit: usize,
    limits: &SaturationLimits,
) -> SaturationStats {
    saturate_seeded(eg, rules, iter_limit, limits, &[])
}

/// As [`saturate`], with extra adder candidates (found on an earlier state
/// of the same e-graph) offered to the identification rules.
fn saturate_seeded(
    eg: &mut EGraph,
    rules: &RuleSet,
    iter_limit: usize,
    limits: &SaturationLimits,
    seeds: &[cuts::AdderCandidate],
) -> SaturationStats {
    let (ident, directed): (Vec<Rule>, Vec<Rule>) =
        rules.directed().into_iter().partition(is_identification);
    let phase = if rules.rules().iter().any(|r| r.phase == Phase::R2) {
        Phase::R2
    } else {
        Phase::R1
    };
    let start = Instant::now();
    let budget = Duration::from_secs_f64(limits.time_limit);
    let mut stats = SaturationStats::default();
    stats.observe(eg);
    eg.rebuild();

    let mut backoff = vec![Backoff::default(); directed.len()];
    let mut applied_once: HashSet<(usize, Id)> = HashSet::new();
    let mut stop = StopReason::IterLimit;
    let mut iterations = 0;
    for iter in 0..iter_limit {
        iterations = iter + 1;
        let before = (eg.node_count(), eg.class_count());
        let by_op = eg.classes_by_op();
        // Rules rooted at a bare variable only see Boolean-valued classes.
        let all: Vec<Id> = eg
            .class_ids()
            .filter(|&id| !eg.nodes(id).iter().any(|n| matches!(n.op, Op::Roots | Op::Fa)))
            .collect();
        let mut found: Vec<(usize, Vec<(Id, Subst)>)> = Vec::new();
        let mut matches = 0;
        let mut banned_any = false;
        let mut timed_out = false;
        for (ri, rule) in directed.iter().enumerate() {
            if start.elapsed() > budget {
                timed_out = true;
                break;
            }
            let b = &mut backoff[ri];
            if rule.phase == Phase::R1 && b.banned_until > iter {
                banned_any = true;
                continue;
            }
            let classes = match rule.lhs.root_op() {
                Some(op) => by_op
                    .get(&std::mem::discriminant(&op))
                    .map(Vec::as_slice)
                    .unwrap_or(&[]),
                None => &all[..],
            };
            let comm = rule.phase == Phase::R2;
            let ms = rule.lhs.search_classes(eg, classes, comm);
            if rule.phase == Phase::R1 {
                let threshold = limits.match_limit << b.times_banned.min(16);
                if ms.len() > threshold {
                    b.banned_until = iter + (limits.ban_length << b.times_banned.min(16));
                    b.times_banned += 1;
                    banned_any = true;
                    log::debug!("banning {} after {} matches", rule.name, ms.len());
                    continue;
                }
            }
            matches += ms.len();
            found.push((ri, ms));
        }

        let mut pending: Vec<(Id, Id)> = Vec::new();
        if !ident.is_empty() && !timed_out {
            let (n, p) = identify(eg, &ident, limits.witness, seeds);
            matches += n;
            pending = p;
        }

        let mut merges = 0;
        for (class, rhs) in pending {
            let rhs = eg.find(rhs);
            if eg.find(class) != rhs {
                eg.merge(class, rhs);
                merges += 1;
            }
        }
        for (ri, ms) in found {
            let rule = &directed[ri];
            for (class, subst) in ms {
                if rule.phase == Phase::R2 && !r2_applicable(eg, &subst) {
                    continue;
                }
                if rule.once && !applied_once.insert((ri, eg.find(class))) {
                    continue;
                }
                merges += apply(eg, rule, class, &subst);
            }
        }
        merges += eg.rebuild();
        stats.iterations.push(IterationStats {
            phase,
            iteration: iter,
            matches,
            merges,
            classes: eg.class_count(),
            nodes: eg.node_count(),
        });
        stats.observe(eg);
        log::debug!(
            "{phase:?} iteration {iter}: {matches} matches, {merges} merges, {} classes, {} nodes",
            eg.class_count(),
            eg.node_count()
        );

        if timed_out || start.elapsed() > budget {
            stop = StopReason::TimeLimit;
            break;
        }
        if eg.node_count() > limits.node_limit {
            stop = StopReason::NodeLimit;
            break;
        }
        if merges == 0 && before == (eg.node_count(), eg.class_count()) {
            if banned_any {
                // Nothing left to do but banned rules: let them run now.
                for b in backoff.iter_mut() {
                    b.banned_until = 0;
                }
                continue;
            }
            stop = StopReason::Saturated;
            break;
        }
    }
    stats.phases.push(PhaseStats {
        phase,
        stop,
        iterations,
        pruned: 0,
    });
    stats
}

/// R2-style rules `lhs => (xor3|maj3 ?a ?b ?c)` over three variables.
fn is_identification(rule: &Rule) -> bool {
    rule.phase == Phase::R2
        && rule.lhs.vars().len() == 3
        && rule.rhs.nodes().len() == 4
        && matches!(rule.rhs.root_op(), Some(Op::Xor3 | Op::Maj3))
}

const SIGNATURE_SEED: u64 = 0x5eed;

/// Finds classes where an identification rule applies, using three-leaf
/// cuts with an adder truth table as candidate bindings. Returns the match
/// count and `(class, rhs class)` pairs to merge.
fn identify(
    eg: &mut EGraph,
    rules: &[Rule],
    witness: Witness,
    seeds: &[cuts::AdderCandidate],
) -> (usize, Vec<(Id, Id)>) {
    let level = cuts::levels(eg);
    let mut candidates = cuts::adder_candidates(eg, &level);
    for s in seeds {
        let mut s = s.clone();
        s.class = eg.find(s.class);
        for l in s.leaves.iter_mut() {
            *l = eg.find(*l);
        }
        if s.leaves[0] != s.leaves[1] && s.leaves[1] != s.leaves[2] && s.leaves[0] != s.leaves[2] {
            candidates.push(s);
        }
    }
    let sigs = match witness {
        Witness::Template => cuts::signatures(eg, &level, SIGNATURE_SEED),
        Witness::Cut => Vec::new(),
    };
    const PERMS: [[usize; 3]; 6] = [[0, 1, 2], [0, 2, 1], [1, 0, 2], [1, 2, 0], [2, 0, 1], [2, 1, 0]];
    let mut pairs = Vec::new();
    for cand in candidates {
        if !rules.iter().any(|r| r.rhs.root_op() == Some(cand.op)) {
            continue;
        }
        if witness == Witness::Template {
            if cand.negated != 0 || cand.output_negated {
                continue;
            }
            let l = &cand.leaves;
            let confirmed = rules.iter().filter(|r| r.rhs.root_op() == Some(cand.op)).any(|r| {
                PERMS.iter().any(|p| {
                    let subst = Subst::from_ids(&[l[p[0]], l[p[1]], l[p[2]]]);
                    cuts::matches_bound(eg, &r.lhs, &subst, &sigs, cand.class)
                })
            });
            if !confirmed {
                continue;
            }
        }
        if adder_term(eg, &cand, false) == Some(eg.find(cand.class)) {
            continue;
        }
        let new = adder_term(eg, &cand, true).expect("added");
        pairs.push((cand.class, new));
    }
    (pairs.len(), pairs)
}

/// The class of the adder term a candidate describes: looked up only, or
/// built when `add` is set.
fn adder_term(eg: &mut EGraph, cand: &cuts::AdderCandidate, add: bool) -> Option<Id> {
    let get = |eg: &mut EGraph, n: ENode| if add { Some(eg.add_node(n)) } else { eg.lookup(&n) };
    let mut args = [Id(0); 3];
    for (i, (a, &leaf)) in args.iter_mut().zip(&cand.leaves).enumerate() {
        *a = if cand.negated >> i & 1 == 1 {
            get(eg, ENode::new(Op::Not, &[leaf]))?
        } else {
            leaf
        };
    }
    args.sort_unstable();
    let t = get(eg, ENode::new(cand.op, &args))?;
    if cand.output_negated {
        get(eg, ENode::new(Op::Not, &[t]))
    } else {
        Some(t)
    }
}

fn apply(eg: &mut EGraph, rule: &Rule, class: Id, subst: &Subst) -> usize {
    let new = eg.instantiate(&rule.rhs, subst);
    if eg.find(new) != eg.find(class) {
        eg.merge(new, class);
        1
    } else {
        0
    }
}

/// Identification rules need three distinct classes none of which is a
/// constant.
fn r2_applicable(eg: &EGraph, subst: &Subst) -> bool {
    let ids: Vec<Id> = subst.ids().iter().map(|&i| eg.find(i)).collect();
    for (i, a) in ids.iter().enumerate() {
        if ids[..i].contains(a) || is_constant(eg, *a) {
            return false;
        }
    }
    true
}

pub(crate) fn is_constant(eg: &EGraph, id: Id) -> bool {
    eg.nodes(id).iter().any(|n| match n.op {
        Op::Const0 => true,
        Op::Not => eg.nodes(n.children[0]).iter().any(|m| m.op == Op::Const0),
        _ => false,
    })
}

/// Drops, in every class, `and`/`or` nodes that duplicate another node of the
/// class up to operand order, keeping the sorted one. Returns nodes removed.
pub fn prune_redundant(eg: &mut EGraph) -> usize {
    eg.rebuild();
    let mut removed = 0;
    let ids: Vec<Id> = eg.class_ids().collect();
    for id in ids {
        let doomed: Vec<ENode> = eg
            .nodes(id)
            .iter()
            .filter(|n| {
                matches!(n.op, Op::And | Op::Or) && n.children[0] > n.children[1] && {
                    let swapped = ENode::new(n.op, &[n.children[1], n.children[0]]);
                    eg.nodes(id).contains(&swapped)
                }
            })
            .cloned()
            .collect();
        for n in doomed {
            if eg.remove_node(id, &n) {
                removed += 1;
            }
        }
    }
    removed
}

/// R1 phase, prune, R2 phase, prune, then full-adder pairing.
pub fn run_phases(
    eg: &mut EGraph,
    r1: &RuleSet,
    r2: &RuleSet,
    limits: &SaturationLimits,
) -> (SaturationStats, Vec<FaPairing>) {
    let mut stats = SaturationStats::default();
    // Cuts of the unrewritten graph: R1 can bloat classes past the per-class
    // cut cap and hide the input structure.
    eg.rebuild();
    let seeds = if limits.witness == Witness::Cut {
        cuts::adder_candidates(eg, &cuts::levels(eg))
    } else {
        Vec::new()
    };
    for (rules, iters, seeds) in [(r1, limits.r1_iters, &[][..]), (r2, limits.r2_iters, &seeds[..])] {
        let s = saturate_seeded(eg, rules, iters, limits, seeds);
        let pruned = prune_redundant(eg);
        stats.iterations.extend(s.iterations);
        stats.phases.extend(s.phases.into_iter().map(|mut p| {
            p.pruned = pruned;
            p
        }));
        stats.peak_nodes = stats.peak_nodes.max(s.peak_nodes);
        stats.peak_classes = stats.peak_classes.max(s.peak_classes);
    }
    let pairings = insert_fa_nodes(eg);
    eg.rebuild();
    stats.fa_pairings = pairings.len();
    stats.observe(eg);
    (stats, pairings)
}

#[cfg(test)]
mod tests;
