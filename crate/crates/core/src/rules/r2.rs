//! XOR3/MAJ3 identification rules.
//!
//! Three sources, deduplicated together modulo variable renaming and operand
//! order of `and`/`or`:
//!
//! * a short curated list of textbook sum-of-products shapes;
//! * bottom-up enumeration of small NOT/AND(/OR) circuits over three
//!   variables, keeping circuits computing parity or majority;
//! * adder cells harvested from the in-repo multiplier generators.
//!
//! Enumeration keeps, per intermediate function, only circuits within one
//! gate of the smallest one found, which keeps the search space tiny while
//! still covering multiplexer-style (Shannon) realisations of the targets.

use std::collections::{BTreeMap, BTreeSet, HashMap};
use std::sync::{Mutex, OnceLock};

use super::{Phase, Profile, Result, Rule, RuleError, RuleSet};
use crate::netlist::{
    gen_booth_multiplier, gen_csa_multiplier, CellKind, Generated, NodeId, NodeKind,
};

pub const DEFAULT_MAX_GATES: usize = 9;
const MIN_GATES: usize = 4;
const MAX_GATES: usize = 12;
/// Extra gates allowed over the best known circuit of an intermediate function.
const SLACK: usize = 1;
/// Circuits kept per intermediate function and basis.
const PER_FUNCTION: usize = 6;
/// Smallest enumerated circuits kept per target and basis.
const XOR_PER_BASIS: usize = 45;
const MAJ_PER_BASIS: usize = 20;

const XOR3: u8 = 0x96;
const MAJ3: u8 = 0xE8;
const VAR_TABLES: [u8; 3] = [0xAA, 0xCC, 0xF0];

const CURATED: &[(&str, &str)] = &[
    (
        "maj-sop",
        "(or (or (and ?a ?b) (and ?a ?c)) (and ?b ?c))",
    ),
    (
        "maj-nand",
        "(and (not (and (not ?a) (not (and ?b ?c)))) (not (and (not ?b) (not ?c))))",
    ),
    (
        "xor-minterms",
        "(or (or (or (and (and ?a (not ?b)) (not ?c)) (and (and (not ?a) ?b) (not ?c))) \
         (and (and (not ?a) (not ?b)) ?c)) (and (and ?a ?b) ?c))",
    ),
    (
        "xor-mux-pos",
        "(not (and (or (or ?a (and ?b ?c)) (not (or ?b ?c))) \
         (or (not ?a) (and (not (and ?b ?c)) (or ?b ?c)))))",
    ),
];

/// Literal: term index and complement flag.
type Lit = (u32, bool);

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
enum Term {
    Var(u8),
    And(Lit, Lit),
    Or(Lit, Lit),
}

#[derive(Debug, Default)]
struct Arena {
    terms: Vec<Term>,
    funcs: Vec<u8>,
    /// Sorted gate terms in the cone, the term itself included.
    gates: Vec<Vec<u32>>,
    index: HashMap<Term, u32>,
}

impl Arena {
    fn intern(&mut self, t: Term) -> u32 {
        if let Some(&i) = self.index.get(&t) {
            return i;
        }
        let i = self.terms.len() as u32;
        let (func, gates) = match t {
            Term::Var(v) => (VAR_TABLES[v as usize], Vec::new()),
            Term::And(x, y) | Term::Or(x, y) => {
                let (fx, fy) = (self.lit_func(x), self.lit_func(y));
                let f = if matches!(t, Term::And(..)) { fx & fy } else { fx | fy };
                let mut g = union(&self.gates[x.0 as usize], &self.gates[y.0 as usize]);
                g.push(i);
                (f, g)
            }
        };
        self.terms.push(t);
        self.funcs.push(func);
        self.gates.push(gates);
        self.index.insert(t, i);
        i
    }

    fn lit_func(&self, l: Lit) -> u8 {
        let f = self.funcs[l.0 as usize];
        if l.1 {
            !f
        } else {
            f
        }
    }

    /// S-expression of a literal under a variable renaming, with commutative
    /// operands sorted so equal shapes print identically.
    fn canon(&self, l: Lit, perm: &[u8; 3], memo: &mut HashMap<u32, String>) -> String {
        let inner = if let Some(s) = memo.get(&l.0) {
            s.clone()
        } else {
            let s = match self.terms[l.0 as usize] {
                Term::Var(v) => format!("?{}", ['a', 'b', 'c'][perm[v as usize] as usize]),
                Term::And(x, y) | Term::Or(x, y) => {
                    let op = if matches!(self.terms[l.0 as usize], Term::And(..)) { "and" } else { "or" };
                    let mut xs = self.canon(x, perm, memo);
                    let mut ys = self.canon(y, perm, memo);
                    if ys < xs {
                        std::mem::swap(&mut xs, &mut ys);
                    }
                    format!("({op} {xs} {ys})")
                }
            };
            memo.insert(l.0, s.clone());
            s
        };
        if l.1 {
            format!("(not {inner})")
        } else {
            inner
        }
    }

    /// Canonical text over all variable renamings; the lexicographically
    /// smallest rendering wins.
    fn canonical(&self, l: Lit) -> String {
        PERMS
            .iter()
            .map(|p| self.canon(l, p, &mut HashMap::new()))
            .min()
            .expect("six permutations")
    }
}

const PERMS: [[u8; 3]; 6] = [
    [0, 1, 2],
    [0, 2, 1],
    [1, 0, 2],
    [1, 2, 0],
    [2, 0, 1],
    [2, 1, 0],
];

fn union(a: &[u32], b: &[u32]) -> Vec<u32> {
    let mut out = Vec::with_capacity(a.len() + b.len());
    let (mut i, mut j) = (0, 0);
    while i < a.len() && j < b.len() {
        match a[i].cmp(&b[j]) {
            std::cmp::Ordering::Less => {
                out.push(a[i]);
                i += 1;
            }
            std::cmp::Ordering::Greater => {
                out.push(b[j]);
                j += 1;
            }
            std::cmp::Ordering::Equal => {
                out.push(a[i]);
                i += 1;
                j += 1;
            }
        }
    }
    out.extend_from_slice(&a[i..]);
    out.extend_from_slice(&b[j..]);
    out
}

fn union_len(a: &[u32], b: &[u32]) -> usize {
    let (mut i, mut j, mut n) = (0, 0, 0);
    while i < a.len() && j < b.len() {
        match a[i].cmp(&b[j]) {
            std::cmp::Ordering::Less => i += 1,
            std::cmp::Ordering::Greater => j += 1,
            std::cmp::Ordering::Equal => {
                i += 1;
                j += 1;
            }
        }
        n += 1;
    }
    n + (a.len() - i) + (b.len() - j)
}

/// Enumerates circuits in one basis; returns target literals found.
fn enumerate(arena: &mut Arena, max_gates: usize, with_or: bool) -> Vec<Lit> {
    let mut best: [usize; 256] = [usize::MAX; 256];
    let mut kept: Vec<Vec<u32>> = vec![Vec::new(); 256];
    let mut pool: Vec<u32> = Vec::new();
    for v in 0..3u8 {
        let t = arena.intern(Term::Var(v));
        best[arena.funcs[t as usize] as usize] = 0;
        best[!arena.funcs[t as usize] as usize] = 0;
        pool.push(t);
    }
    let mut fresh = pool.clone();
    let mut targets: Vec<Lit> = Vec::new();
    let mut seen_targets: BTreeSet<u32> = BTreeSet::new();
    let ops: &[bool] = if with_or { &[false, true] } else { &[false] };
    while !fresh.is_empty() {
        let mut next: Vec<u32> = Vec::new();
        let fresh_set: BTreeSet<u32> = fresh.iter().copied().collect();
        let snapshot = pool.clone();
        for (ii, &i) in snapshot.iter().enumerate() {
            for &j in &snapshot[ii..] {
                if !fresh_set.contains(&i) && !fresh_set.contains(&j) {
                    continue;
                }
                if i == j {
                    continue;
                }
                let (si, sj) = (arena.gates[i as usize].len(), arena.gates[j as usize].len());
                if si.max(sj) + 1 > max_gates {
                    continue;
                }
                for ni in [false, true] {
                    for nj in [false, true] {
                        for &is_or in ops {
                            let (x, y) = ((i, ni), (j, nj));
                            let (fx, fy) = (arena.lit_func(x), arena.lit_func(y));
                            let f = if is_or { fx | fy } else { fx & fy };
                            if f == 0 || f == 0xFF || f == fx || f == fy {
                                continue;
                            }
                            let target = [XOR3, !XOR3, MAJ3, !MAJ3].contains(&f);
                            let lower = si.max(sj) + 1;
                            let fi = f as usize;
                            if !target && lower > best[fi].min(best[!f as usize]).saturating_add(SLACK) {
                                continue;
                            }
                            let size = union_len(&arena.gates[i as usize], &arena.gates[j as usize]) + 1;
                            if size > max_gates {
                                continue;
                            }
                            if target {
                                let t = intern_gate(arena, x, y, is_or);
                                if seen_targets.insert(t) {
                                    targets.push((t, f == !XOR3 || f == !MAJ3));
                                }
                                continue;
                            }
                            // Complements share a budget: a circuit for f is a
                            // circuit for !f behind an inverter.
                            let b = best[fi].min(best[!f as usize]);
                            if size > b.saturating_add(SLACK) || size >= max_gates {
                                continue;
                            }
                            if kept[fi].len() >= PER_FUNCTION {
                                continue;
                            }
                            let t = intern_gate(arena, x, y, is_or);
                            if kept[fi].contains(&t) {
                                continue;
                            }
                            best[fi] = best[fi].min(size);
                            kept[fi].push(t);
                            next.push(t);
                        }
                    }
                }
            }
        }
        pool.extend(next.iter().copied());
        fresh = next;
    }
    targets
}

fn intern_gate(arena: &mut Arena, x: Lit, y: Lit, is_or: bool) -> u32 {
    let (x, y) = if x <= y { (x, y) } else { (y, x) };
    arena.intern(if is_or { Term::Or(x, y) } else { Term::And(x, y) })
}

/// Converts the cone of an adder-cell output into an arena literal, with the
/// cell's inputs as variables in sorted order.
fn cone_literal(arena: &mut Arena, nodes: &[NodeKind], root: NodeId, leaves: &[NodeId]) -> Option<Lit> {
    let mut memo: HashMap<NodeId, Lit> = HashMap::new();
    fn go(
        arena: &mut Arena,
        nodes: &[NodeKind],
        id: NodeId,
        leaves: &[NodeId],
        memo: &mut HashMap<NodeId, Lit>,
    ) -> Option<Lit> {
        if let Some(pos) = leaves.iter().position(|&l| l == id) {
            return Some((arena.intern(Term::Var(pos as u8)), false));
        }
        if let Some(&l) = memo.get(&id) {
            return Some(l);
        }
        let lit = match nodes[id.index()] {
            NodeKind::Not(c) => {
                let (t, n) = go(arena, nodes, c, leaves, memo)?;
                (t, !n)
            }
            NodeKind::And(a, b) => {
                let x = go(arena, nodes, a, leaves, memo)?;
                let y = go(arena, nodes, b, leaves, memo)?;
                (intern_gate(arena, x, y, false), false)
            }
            _ => return None,
        };
        memo.insert(id, lit);
        Some(lit)
    }
    go(arena, nodes, root, leaves, &mut memo)
}

/// Sum and carry shapes of every full-adder cell in `generated`.
fn harvest(arena: &mut Arena, generated: &Generated) -> Vec<(Lit, u8)> {
    let nodes = generated.netlist.nodes();
    let mut out = Vec::new();
    for cell in &generated.meta.cells {
        if cell.kind != CellKind::Full {
            continue;
        }
        let mut leaves = cell.inputs.clone();
        leaves.sort_unstable();
        for (root, want) in [(cell.sum, XOR3), (cell.carry, MAJ3)] {
            if let Some(l) = cone_literal(arena, nodes, root, &leaves) {
                if arena.lit_func(l) == want {
                    out.push((l, want));
                }
            }
        }
    }
    out
}

fn templates() -> Vec<Generated> {
    vec![
        gen_csa_multiplier(8).expect("valid width"),
        gen_booth_multiplier(8).expect("valid width"),
    ]
}

/// Identification rules harvested from the adder cells of `generated`.
pub fn harvest_templates(generated: &Generated) -> Vec<Rule> {
    let mut arena = Arena::default();
    let mut seen = BTreeSet::new();
    let mut rules = Vec::new();
    for (l, f) in harvest(&mut arena, generated) {
        let text = arena.canonical(l);
        if seen.insert(text.clone()) {
            rules.push(make_rule(&format!("harvest-{}", rules.len()), &text, f));
        }
    }
    rules
}

fn make_rule(name: &str, lhs: &str, f: u8) -> Rule {
    let rhs = if f == XOR3 { "(xor3 ?a ?b ?c)" } else { "(maj3 ?a ?b ?c)" };
    Rule::new(Phase::R2, name, lhs, rhs, false).expect("generated rule parses")
}

/// Arena literal of a NOT/AND/OR pattern over at most three variables.
fn pattern_literal(arena: &mut Arena, pat: &crate::egraph::Pattern) -> Lit {
    use crate::egraph::{Op, PatternNode};
    let mut lits: Vec<Lit> = Vec::with_capacity(pat.nodes().len());
    for n in pat.nodes() {
        let l = match n {
            PatternNode::Var(v) => (arena.intern(Term::Var(*v as u8)), false),
            PatternNode::Node(Op::Not, ch) => {
                let (t, neg) = lits[ch[0]];
                (t, !neg)
            }
            PatternNode::Node(op @ (Op::And | Op::Or), ch) => {
                (intern_gate(arena, lits[ch[0]], lits[ch[1]], *op == Op::Or), false)
            }
            PatternNode::Node(op, _) => panic!("operator {op} not allowed in templates"),
        };
        lits.push(l);
    }
    *lits.last().expect("non-empty pattern")
}

fn build(max_gates: usize) -> RuleSet {
    let mut arena = Arena::default();
    // Canonical lhs text -> (name or source tag, function), first source wins.
    let mut found: BTreeMap<String, (String, bool, u8)> = BTreeMap::new();
    let mut order: Vec<String> = Vec::new();
    let mut add = |text: String, label: &str, named: bool, f: u8| -> bool {
        if found.contains_key(&text) {
            return false;
        }
        order.push(text.clone());
        found.insert(text, (label.to_string(), named, f));
        true
    };
    for (name, lhs) in CURATED {
        let pat = crate::egraph::Pattern::parse(lhs).expect("curated pattern parses");
        let l = pattern_literal(&mut arena, &pat);
        let f = arena.lit_func(l);
        add(arena.canonical(l), name, true, f);
    }
    for g in templates() {
        for (l, f) in harvest(&mut arena, &g) {
            add(arena.canonical(l), "harvest", false, f);
        }
    }
    for (with_or, tag) in [(false, "aig"), (true, "aoi")] {
        let mut cands: Vec<(usize, String, u8)> = enumerate(&mut arena, max_gates, with_or)
            .into_iter()
            .map(|l| (arena.gates[l.0 as usize].len(), arena.canonical(l), arena.lit_func(l)))
            .collect();
        cands.sort();
        let (mut xors, mut majs) = (0, 0);
        for (_, text, f) in cands {
            let n = if f == XOR3 { &mut xors } else { &mut majs };
            let cap = if f == XOR3 { XOR_PER_BASIS } else { MAJ_PER_BASIS };
            if *n < cap && add(text, tag, false, f) {
                *n += 1;
            }
        }
    }

    let mut rules = Vec::new();
    let mut counters: BTreeMap<(String, &str), usize> = BTreeMap::new();
    for text in order {
        let (label, named, f) = &found[&text];
        let name = if *named {
            label.clone()
        } else {
            let kind = if *f == XOR3 { "xor" } else { "maj" };
            let k = counters.entry((label.clone(), kind)).or_insert(0);
            *k += 1;
            format!("{kind}-{label}-{k}")
        };
        rules.push(make_rule(&name, &text, *f));
    }
    RuleSet::new(rules, Profile::Full).expect("synthesized rules verify")
}

/// R2 rules for circuits of at most `max_gates` AND/OR gates.
pub fn synthesize_r2(max_gates: usize) -> Result<RuleSet> {
    if !(MIN_GATES..=MAX_GATES).contains(&max_gates) {
        return Err(RuleError::Config(format!(
            "max_gates must be in {MIN_GATES}..={MAX_GATES}, got {max_gates}"
        )));
    }
    static CACHE: OnceLock<Mutex<HashMap<usize, RuleSet>>> = OnceLock::new();
    let cache = CACHE.get_or_init(|| Mutex::new(HashMap::new()));
    if let Some(rs) = cache.lock().expect("cache lock").get(&max_gates) {
        return Ok(rs.clone());
    }
    let rs = build(max_gates);
    cache.lock().expect("cache lock").insert(max_gates, rs.clone());
    Ok(rs)
}
