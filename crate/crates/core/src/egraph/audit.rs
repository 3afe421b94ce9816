//! Consistency checks and DOT export.

use std::fmt::Write as _;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rustc_hash::FxHashMap;
use thiserror::Error;

use super::{EGraph, ENode, Id, Op};
use crate::netlist::sim::exhaustive_word;

/// Inputs up to this count are audited on every assignment.
const EXHAUSTIVE_INPUTS: usize = 16;
const RANDOM_WORDS: usize = 4;

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum AuditError {
    #[error("e-node {node} is in both {a} and {b}")]
    Congruence { node: String, a: Id, b: Id },
    #[error("e-node {node} references dead class {child}")]
    DeadChild { node: String, child: Id },
    #[error("e-node {node} disagrees with the value of its class {class}")]
    Semantic { node: String, class: Id },
    #[error("class {0} has no evaluable e-node")]
    Unevaluable(Id),
}

/// No two classes may hold the same canonical e-node.
pub fn congruence_audit(eg: &EGraph) -> Result<(), AuditError> {
    let mut seen: FxHashMap<ENode, Id> = FxHashMap::default();
    for id in eg.class_ids() {
        for n in eg.nodes(id) {
            for &c in &n.children {
                if eg.find(c) != c {
                    return Err(AuditError::DeadChild {
                        node: n.to_string(),
                        child: c,
                    });
                }
            }
            let canon = eg.canonical(n);
            if let Some(&other) = seen.get(&canon) {
                if other != id {
                    return Err(AuditError::Congruence {
                        node: canon.to_string(),
                        a: other,
                        b: id,
                    });
                }
            }
            seen.insert(canon, id);
        }
    }
    Ok(())
}

fn eval_node(n: &ENode, vals: &[Option<Vec<u64>>], inputs: &[Vec<u64>], w: usize) -> Option<Vec<u64>> {
    let ch = |k: usize| vals[n.children[k].index()].as_deref();
    Some(match n.op {
        Op::Const0 => vec![0; w],
        Op::Var(ord) => inputs.get(ord as usize)?.clone(),
        Op::Not => ch(0)?.iter().map(|x| !x).collect(),
        Op::And => zip2(ch(0)?, ch(1)?, |a, b| a & b),
        Op::Or => zip2(ch(0)?, ch(1)?, |a, b| a | b),
        Op::Xor3 => zip3(ch(0)?, ch(1)?, ch(2)?, |a, b, c| a ^ b ^ c),
        Op::Maj3 => zip3(ch(0)?, ch(1)?, ch(2)?, maj),
        Op::Fa => {
            let (a, b, c) = (ch(0)?, ch(1)?, ch(2)?);
            let mut v = zip3(a, b, c, maj);
            v.extend(zip3(a, b, c, |a, b, c| a ^ b ^ c));
            v
        }
        Op::Fst => ch(0)?.get(..w)?.to_vec(),
        Op::Snd => ch(0)?.get(w..)?.to_vec(),
        Op::Roots => return None,
    })
}

fn maj(a: u64, b: u64, c: u64) -> u64 {
    (a & b) | (a & c) | (b & c)
}

fn zip2(a: &[u64], b: &[u64], f: impl Fn(u64, u64) -> u64) -> Vec<u64> {
    a.iter().zip(b).map(|(&x, &y)| f(x, y)).collect()
}

fn zip3(a: &[u64], b: &[u64], c: &[u64], f: impl Fn(u64, u64, u64) -> u64) -> Vec<u64> {
    a.iter()
        .zip(b)
        .zip(c)
        .map(|((&x, &y), &z)| f(x, y, z))
        .collect()
}

/// Evaluates every class on shared input vectors and checks that all e-nodes
/// of a class agree. Exhaustive up to 16 variables, random vectors beyond.
pub fn semantic_audit(eg: &EGraph, seed: u64) -> Result<(), AuditError> {
    let n_vars = eg
        .class_ids()
        .flat_map(|id| eg.nodes(id).iter())
        .filter_map(|n| match n.op {
            Op::Var(o) => Some(o as usize + 1),
            _ => None,
        })
        .max()
        .unwrap_or(0);
    let inputs: Vec<Vec<u64>> = if n_vars <= EXHAUSTIVE_INPUTS {
        let blocks = (1usize << n_vars).div_ceil(64);
        (0..n_vars)
            .map(|i| (0..blocks).map(|b| exhaustive_word(i, b as u64)).collect())
            .collect()
    } else {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        (0..n_vars)
            .map(|_| (0..RANDOM_WORDS).map(|_| rng.gen()).collect())
            .collect()
    };
    let w = inputs.first().map_or(1, Vec::len);

    let mut vals: Vec<Option<Vec<u64>>> = vec![None; eg.id_bound()];
    let mut queue: Vec<Id> = Vec::new();
    for id in eg.class_ids() {
        if let Some(v) = eg.nodes(id).iter().find_map(|n| {
            if n.children.is_empty() {
                eval_node(n, &vals, &inputs, w)
            } else {
                None
            }
        }) {
            vals[id.index()] = Some(v);
            queue.push(id);
        }
    }
    while let Some(id) = queue.pop() {
        for (_, pclass) in eg.parents(id) {
            if vals[pclass.index()].is_some() {
                continue;
            }
            let found = eg
                .nodes(pclass)
                .iter()
                .find_map(|n| eval_node(&eg.canonical(n), &vals, &inputs, w));
            if let Some(v) = found {
                vals[pclass.index()] = Some(v);
                queue.push(pclass);
            }
        }
    }
    for id in eg.class_ids() {
        let Some(expected) = vals[id.index()].as_ref() else {
            if eg.nodes(id).iter().any(|n| n.op == Op::Roots) {
                continue;
            }
            return Err(AuditError::Unevaluable(id));
        };
        for n in eg.nodes(id) {
            if let Some(v) = eval_node(&eg.canonical(n), &vals, &inputs, w) {
                if &v != expected {
                    return Err(AuditError::Semantic {
                        node: n.to_string(),
                        class: id,
                    });
                }
            }
        }
    }
    Ok(())
}

/// Graphviz rendering: one cluster per class, one record per e-node.
pub fn to_dot(eg: &EGraph) -> String {
    let mut s = String::from("digraph egraph {\n  compound=true;\n  node [shape=record];\n");
    for id in eg.class_ids() {
        let _ = writeln!(s, "  subgraph cluster_{} {{\n    label=\"{}\";", id.0, id);
        for (k, n) in eg.nodes(id).iter().enumerate() {
            let _ = writeln!(s, "    n{}_{} [label=\"{}\"];", id.0, k, n.op);
        }
        s.push_str("  }\n");
    }
    for id in eg.class_ids() {
        for (k, n) in eg.nodes(id).iter().enumerate() {
            for &c in &n.children {
                let c = eg.find(c);
                let _ = writeln!(
                    s,
                    "  n{}_{} -> n{}_0 [lhead=cluster_{}];",
                    id.0, k, c.0, c.0
                );
            }
        }
    }
    s.push_str("}\n");
    s
}
