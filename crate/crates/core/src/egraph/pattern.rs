//! Patterns over e-graph operators and top-down e-matching.
//!
//! Patterns are written as s-expressions: `(and ?a (not ?b))`, `0`, `v3`.
//! Matching is literal by default: children bind in stored order. The
//! commutative mode also tries swapped `and`/`or` children and every
//! permutation of `xor3`/`maj3`/`fa` children.

use std::fmt;

use smallvec::SmallVec;

use super::{EGraph, EGraphError, ENode, Id, Op, Result};

const UNSET: Id = Id(u32::MAX);

#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub enum PatternNode {
    Var(usize),
    /// Operator and indices of its children in the node list.
    Node(Op, SmallVec<[usize; 3]>),
}

/// Operator tree in post-order; the last node is the root.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct Pattern {
    nodes: Vec<PatternNode>,
    vars: Vec<String>,
    /// Bit `v` of `masks[i]` is set when variable `v` occurs under node `i`.
    masks: Vec<u64>,
}

/// Class bound to each pattern variable, indexed like [`Pattern::vars`].
#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct Subst(SmallVec<[Id; 6]>);

impl Subst {
    pub fn new(n: usize) -> Self {
        Subst(SmallVec::from_elem(UNSET, n))
    }

    pub fn from_ids(ids: &[Id]) -> Self {
        Subst(SmallVec::from_slice(ids))
    }

    pub fn get(&self, v: usize) -> Id {
        self.0[v]
    }

    pub fn ids(&self) -> &[Id] {
        &self.0
    }
}

impl Pattern {
    pub fn nodes(&self) -> &[PatternNode] {
        &self.nodes
    }

    pub fn vars(&self) -> &[String] {
        &self.vars
    }

    pub fn var_index(&self, name: &str) -> Option<usize> {
        self.vars.iter().position(|v| v == name)
    }

    pub fn root_op(&self) -> Option<Op> {
        match self.nodes.last()? {
            PatternNode::Node(op, _) => Some(*op),
            PatternNode::Var(_) => None,
        }
    }

    /// Number of operator nodes.
    pub fn size(&self) -> usize {
        self.nodes
            .iter()
            .filter(|n| matches!(n, PatternNode::Node(..)))
            .count()
    }

    pub fn parse(text: &str) -> Result<Pattern> {
        Self::parse_with_vars(text, Vec::new())
    }

    /// Parses `text`, numbering variables after those already in `vars`.
    /// Used to give a rule's right-hand side the numbering of its left side.
    pub fn parse_with_vars(text: &str, vars: Vec<String>) -> Result<Pattern> {
        let tokens = tokenize(text);
        let mut p = Pattern {
            nodes: Vec::new(),
            vars,
            masks: Vec::new(),
        };
        let mut pos = 0;
        p.parse_expr(&tokens, &mut pos)?;
        if pos != tokens.len() {
            return Err(EGraphError::Pattern(format!(
                "trailing input after expression in `{text}`"
            )));
        }
        Ok(p)
    }

    fn parse_expr(&mut self, tokens: &[&str], pos: &mut usize) -> Result<usize> {
        let tok = *tokens
            .get(*pos)
            .ok_or_else(|| EGraphError::Pattern("unexpected end of pattern".into()))?;
        *pos += 1;
        if tok == "(" {
            let head = *tokens
                .get(*pos)
                .ok_or_else(|| EGraphError::Pattern("missing operator".into()))?;
            *pos += 1;
            let op = Op::parse(head)
                .ok_or_else(|| EGraphError::Pattern(format!("unknown operator `{head}`")))?;
            let mut children = SmallVec::new();
            loop {
                match tokens.get(*pos) {
                    Some(&")") => {
                        *pos += 1;
                        break;
                    }
                    Some(_) => children.push(self.parse_expr(tokens, pos)?),
                    None => return Err(EGraphError::Pattern("unbalanced parentheses".into())),
                }
            }
            if let Some(expected) = op.arity() {
                if expected != children.len() {
                    return Err(EGraphError::Arity {
                        op,
                        expected,
                        got: children.len(),
                    });
                }
            }
            let mask = children.iter().fold(0, |m, &c| m | self.masks[c]);
            self.nodes.push(PatternNode::Node(op, children));
            self.masks.push(mask);
        } else if tok == ")" {
            return Err(EGraphError::Pattern("unexpected `)`".into()));
        } else if let Some(name) = tok.strip_prefix('?') {
            if name.is_empty() {
                return Err(EGraphError::Pattern("empty variable name".into()));
            }
            let v = match self.var_index(name) {
                Some(v) => v,
                None => {
                    self.vars.push(name.to_string());
                    self.vars.len() - 1
                }
            };
            if v >= 64 {
                return Err(EGraphError::Pattern("too many pattern variables".into()));
            }
            self.nodes.push(PatternNode::Var(v));
            self.masks.push(1 << v);
        } else {
            let op = Op::parse(tok)
                .filter(|op| op.arity() == Some(0))
                .ok_or_else(|| EGraphError::Pattern(format!("unknown leaf `{tok}`")))?;
            self.nodes.push(PatternNode::Node(op, SmallVec::new()));
            self.masks.push(0);
        }
        Ok(self.nodes.len() - 1)
    }

    fn write_node(&self, i: usize, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match &self.nodes[i] {
            PatternNode::Var(v) => write!(f, "?{}", self.vars[*v]),
            PatternNode::Node(op, ch) if ch.is_empty() => write!(f, "{op}"),
            PatternNode::Node(op, ch) => {
                write!(f, "({op}")?;
                for &c in ch {
                    write!(f, " ")?;
                    self.write_node(c, f)?;
                }
                write!(f, ")")
            }
        }
    }

    /// Evaluates the pattern on bit-parallel variable values.
    pub fn eval(&self, vars: &[u64]) -> u64 {
        *self.eval_nodes(vars).last().expect("non-empty pattern")
    }

    /// Value of every pattern node, in node order.
    pub fn eval_nodes(&self, vars: &[u64]) -> Vec<u64> {
        let mut vals: Vec<u64> = Vec::with_capacity(self.nodes.len());
        for n in &self.nodes {
            let v = match n {
                PatternNode::Var(v) => vars[*v],
                PatternNode::Node(op, ch) => {
                    let c = |k: usize| vals[ch[k]];
                    match op {
                        Op::Const0 => 0,
                        Op::Not => !c(0),
                        Op::And => c(0) & c(1),
                        Op::Or => c(0) | c(1),
                        Op::Xor3 => c(0) ^ c(1) ^ c(2),
                        Op::Maj3 => (c(0) & c(1)) | (c(0) & c(2)) | (c(1) & c(2)),
                        other => panic!("operator {other} has no single-output semantics"),
                    }
                }
            };
            vals.push(v);
        }
        vals
    }

    /// Finds all matches, sorted by class then substitution.
    pub fn search(&self, egraph: &EGraph) -> Vec<(Id, Subst)> {
        self.search_all(egraph, false)
    }

    /// Like [`Pattern::search`], matching modulo commutativity.
    pub fn search_commutative(&self, egraph: &EGraph) -> Vec<(Id, Subst)> {
        self.search_all(egraph, true)
    }

    fn search_all(&self, egraph: &EGraph, comm: bool) -> Vec<(Id, Subst)> {
        let classes: Vec<Id> = match self.root_op() {
            Some(op) => egraph
                .classes_by_op()
                .remove(&std::mem::discriminant(&op))
                .unwrap_or_default(),
            None => egraph.class_ids().collect(),
        };
        self.search_classes(egraph, &classes, comm)
    }

    pub fn search_classes(&self, egraph: &EGraph, classes: &[Id], comm: bool) -> Vec<(Id, Subst)> {
        let mut out = Vec::new();
        for &c in classes {
            for s in self.search_class(egraph, c, comm) {
                out.push((c, s));
            }
        }
        out
    }

    pub fn search_class(&self, egraph: &EGraph, class: Id, comm: bool) -> Vec<Subst> {
        let root = self.nodes.len() - 1;
        let start = vec![Subst::new(self.vars.len())];
        let mut found = self.match_at(egraph, root, egraph.find(class), start, comm);
        found.sort_unstable();
        found.dedup();
        found
    }

    fn match_at(&self, eg: &EGraph, pi: usize, class: Id, substs: Vec<Subst>, comm: bool) -> Vec<Subst> {
        match &self.nodes[pi] {
            PatternNode::Var(v) => substs
                .into_iter()
                .filter_map(|mut s| {
                    let cur = s.0[*v];
                    if cur == UNSET {
                        s.0[*v] = class;
                        Some(s)
                    } else if eg.find(cur) == class {
                        Some(s)
                    } else {
                        None
                    }
                })
                .collect(),
            PatternNode::Node(op, pch) => {
                let mut out = Vec::new();
                let mut open = Vec::new();
                for s in substs {
                    if self.is_ground(pi, &s) {
                        if self.lookup_ground(eg, pi, &s, comm) == Some(class) {
                            out.push(s);
                        }
                    } else {
                        open.push(s);
                    }
                }
                if open.is_empty() {
                    return out;
                }
                let substs = open;
                for node in eg.nodes(class) {
                    if node.op != *op || node.children.len() != pch.len() {
                        continue;
                    }
                    for order in child_orders(node, comm) {
                        let mut cur = substs.clone();
                        for (k, &pc) in pch.iter().enumerate() {
                            cur = self.match_at(eg, pc, eg.find(order[k]), cur, comm);
                            if cur.is_empty() {
                                break;
                            }
                        }
                        out.extend(cur);
                    }
                }
                out
            }
        }
    }
}

impl Pattern {
    fn is_ground(&self, pi: usize, s: &Subst) -> bool {
        let mut m = self.masks[pi];
        while m != 0 {
            let v = m.trailing_zeros() as usize;
            if s.0[v] == UNSET {
                return false;
            }
            m &= m - 1;
        }
        true
    }

    /// Class of a fully bound subpattern, if the e-graph already holds it.
    fn lookup_ground(&self, eg: &EGraph, pi: usize, s: &Subst, comm: bool) -> Option<Id> {
        match &self.nodes[pi] {
            PatternNode::Var(v) => Some(eg.find(s.0[*v])),
            PatternNode::Node(op, pch) => {
                let mut ch: SmallVec<[Id; 3]> = SmallVec::new();
                for &c in pch {
                    ch.push(self.lookup_ground(eg, c, s, comm)?);
                }
                let node = ENode { op: *op, children: ch };
                if let Some(id) = eg.lookup(&node) {
                    return Some(id);
                }
                if comm && matches!(op, Op::And | Op::Or) {
                    return eg.lookup(&ENode::new(*op, &[node.children[1], node.children[0]]));
                }
                None
            }
        }
    }
}

/// Child orders a pattern may bind against.
pub(crate) fn child_orders(node: &ENode, comm: bool) -> SmallVec<[SmallVec<[Id; 3]>; 6]> {
    let c = &node.children;
    let mut orders: SmallVec<[SmallVec<[Id; 3]>; 6]> = SmallVec::new();
    orders.push(c.clone());
    if !comm {
        return orders;
    }
    match node.op {
        Op::And | Op::Or if c[0] != c[1] => {
            orders.push(SmallVec::from_slice(&[c[1], c[0]]));
        }
        op if op.is_symmetric3() => {
            for p in [[0, 2, 1], [1, 0, 2], [1, 2, 0], [2, 0, 1], [2, 1, 0]] {
                let o: SmallVec<[Id; 3]> = p.iter().map(|&i| c[i]).collect();
                if !orders.contains(&o) {
                    orders.push(o);
                }
            }
        }
        _ => {}
    }
    orders
}

fn tokenize(text: &str) -> Vec<&str> {
    let mut out = Vec::new();
    let mut start = None;
    for (i, ch) in text.char_indices() {
        match ch {
            '(' | ')' => {
                if let Some(s) = start.take() {
                    out.push(&text[s..i]);
                }
                out.push(&text[i..i + 1]);
            }
            c if c.is_whitespace() => {
                if let Some(s) = start.take() {
                    out.push(&text[s..i]);
                }
            }
            _ => {
                start.get_or_insert(i);
            }
        }
    }
    if let Some(s) = start {
        out.push(&text[s..]);
    }
    out
}

impl fmt::Display for Pattern {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        self.write_node(self.nodes.len() - 1, f)
    }
}

impl std::str::FromStr for Pattern {
    type Err = EGraphError;

    fn from_str(s: &str) -> Result<Pattern> {
        Pattern::parse(s)
    }
}
