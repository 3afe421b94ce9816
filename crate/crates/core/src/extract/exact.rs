//! Exhaustive extraction for tiny e-graphs.
//!
//! Classes are assigned lazily, only once reached from the root, so the
//! search covers every valid selection of the reachable part. Among equal
//! costs the smaller DAG wins, then the one with fewer FA-related nodes, then
//! the first in enumeration order.

use std::collections::BTreeMap;

use rustc_hash::FxHashMap;

use crate::egraph::{EGraph, ENode, Id, Op};

type Key = (i64, usize, usize);

struct Search {
    root: Id,
    nodes: FxHashMap<Id, Vec<ENode>>,
    assign: FxHashMap<Id, usize>,
    best: Option<(Key, BTreeMap<Id, ENode>)>,
}

pub(super) fn search(eg: &EGraph, root: Id) -> Option<BTreeMap<Id, ENode>> {
    let nodes = eg
        .class_ids()
        .map(|id| {
            let ns = eg
                .nodes(id)
                .iter()
                .map(|n| {
                    let mut n = n.clone();
                    for c in n.children.iter_mut() {
                        *c = eg.find(*c);
                    }
                    n
                })
                .collect();
            (id, ns)
        })
        .collect();
    let mut s = Search {
        root: eg.find(root),
        nodes,
        assign: FxHashMap::default(),
        best: None,
    };
    s.go();
    s.best.map(|(_, c)| c)
}

enum Reach {
    Cycle,
    /// The smallest reached class without a choice.
    Open(Id),
    Complete(Vec<Id>),
}

impl Search {
    fn node(&self, id: Id) -> &ENode {
        &self.nodes[&id][self.assign[&id]]
    }

    fn reach(&self) -> Reach {
        let mut state: FxHashMap<Id, u8> = FxHashMap::default();
        let mut order = Vec::new();
        let mut open: Option<Id> = None;
        let mut stack: Vec<(Id, usize)> = vec![(self.root, 0)];
        state.insert(self.root, 1);
        while let Some(&mut (id, ref mut next)) = stack.last_mut() {
            if !self.assign.contains_key(&id) {
                open = Some(open.map_or(id, |o: Id| o.min(id)));
                state.insert(id, 2);
                stack.pop();
                continue;
            }
            let node = self.node(id);
            if let Some(&c) = node.children.get(*next) {
                *next += 1;
                match state.get(&c) {
                    None => {
                        state.insert(c, 1);
                        stack.push((c, 0));
                    }
                    Some(1) => return Reach::Cycle,
                    _ => {}
                }
            } else {
                state.insert(id, 2);
                order.push(id);
                stack.pop();
            }
        }
        match open {
            Some(id) => Reach::Open(id),
            None => Reach::Complete(order),
        }
    }

    fn go(&mut self) {
        match self.reach() {
            Reach::Cycle => {}
            Reach::Open(id) => {
                for i in 0..self.nodes[&id].len() {
                    self.assign.insert(id, i);
                    self.go();
                }
                self.assign.remove(&id);
            }
            Reach::Complete(order) => self.evaluate(&order),
        }
    }

    fn evaluate(&mut self, order: &[Id]) {
        let mut usage: FxHashMap<Id, u8> = FxHashMap::default();
        let mut fa_nodes = 0;
        for &id in order {
            let n = self.node(id);
            match n.op {
                Op::Fst => *usage.entry(n.children[0]).or_default() |= 1,
                Op::Snd => *usage.entry(n.children[0]).or_default() |= 2,
                _ => {}
            }
            if matches!(n.op, Op::Fst | Op::Snd) {
                let fa = n.children[0];
                if self.node(fa).op != Op::Fa {
                    return;
                }
            }
            if matches!(n.op, Op::Fa | Op::Fst | Op::Snd) {
                fa_nodes += 1;
            }
        }
        for &id in order {
            if self.node(id).op == Op::Fa && !usage.contains_key(&id) {
                return;
            }
        }
        let cost = -(usage.values().filter(|&&m| m == 3).count() as i64);
        let key = (cost, order.len(), fa_nodes);
        if self.best.as_ref().is_some_and(|(b, _)| *b <= key) {
            return;
        }
        let choices = order.iter().map(|&id| (id, self.node(id).clone())).collect();
        self.best = Some((key, choices));
    }
}
