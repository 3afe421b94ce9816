//! Lowering of an extracted DAG back to an AIG.

use rustc_hash::FxHashMap;
use serde::{Deserialize, Serialize};

use super::{ExtractError, ExtractedDag, Result};
use crate::egraph::{Id, Op};
use crate::netlist::{Netlist, NetlistBuilder, NodeId};

/// Netlist inputs that `VAR` ordinals stand for.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct InputMap {
    names: Vec<Option<String>>,
}

impl InputMap {
    pub fn from_netlist(netlist: &Netlist) -> Self {
        InputMap {
            names: netlist
                .inputs()
                .iter()
                .map(|id| netlist.names().get(id).cloned())
                .collect(),
        }
    }

    pub fn anonymous(count: usize) -> Self {
        InputMap {
            names: vec![None; count],
        }
    }

    pub fn len(&self) -> usize {
        self.names.len()
    }

    pub fn is_empty(&self) -> bool {
        self.names.is_empty()
    }
}

/// One full-adder macro cell of a lowered netlist, as netlist node ids.
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Serialize, Deserialize)]
pub struct AnnotatedCell {
    pub inputs: [u32; 3],
    pub carry: u32,
    pub sum: u32,
}

/// Sidecar listing the full-adder cells of a lowered netlist.
#[derive(Debug, Clone, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct FaAnnotation {
    pub cells: Vec<AnnotatedCell>,
}

#[derive(Debug, Clone)]
pub struct Lowered {
    pub netlist: Netlist,
    pub annotation: FaAnnotation,
}

/// Rebuilds `dag` as an AIG. FA nodes become a fixed macro cell (sum as two
/// chained XORs, carry as a majority) recorded in the annotation. A `ROOTS`
/// root yields one output per child; any other root is the single output.
pub fn dag_to_netlist(dag: &ExtractedDag, inputs: &InputMap) -> Result<Lowered> {
    let mut b = NetlistBuilder::new();
    let pins: Vec<NodeId> = inputs
        .names
        .iter()
        .map(|n| match n {
            Some(name) => b.named_input(name.clone()),
            None => b.input(),
        })
        .collect();
    let mut sig: FxHashMap<Id, NodeId> = FxHashMap::default();
    let mut adders: FxHashMap<Id, (NodeId, NodeId)> = FxHashMap::default();
    let mut cells = Vec::new();
    for &id in dag.order() {
        let n = dag.choice(id).expect("ordered class has a choice");
        let ch = |k: usize| sig[&n.children[k]];
        let out = match n.op {
            Op::Const0 => NodeId::CONST_FALSE,
            Op::Var(v) => *pins.get(v as usize).ok_or(ExtractError::UnmappedVar(v))?,
            Op::Not => b.not(ch(0)),
            Op::And => b.and(ch(0), ch(1)),
            Op::Or => b.or(ch(0), ch(1)),
            Op::Xor3 => {
                let x = b.xor(ch(0), ch(1));
                b.xor(x, ch(2))
            }
            Op::Maj3 => b.maj(ch(0), ch(1), ch(2)),
            Op::Fa => {
                let (x, y, z) = (ch(0), ch(1), ch(2));
                let (sum, carry) = b.full_adder(x, y, z);
                cells.push(AnnotatedCell {
                    inputs: [x.0, y.0, z.0],
                    carry: carry.0,
                    sum: sum.0,
                });
                adders.insert(id, (carry, sum));
                // An FA class carries no single signal of its own.
                continue;
            }
            Op::Fst => adders[&n.children[0]].0,
            Op::Snd => adders[&n.children[0]].1,
            Op::Roots => {
                for &c in &n.children {
                    b.add_output(sig[&c], false);
                }
                continue;
            }
        };
        sig.insert(id, out);
    }
    if let Some(&s) = sig.get(&dag.root()) {
        b.add_output(s, false);
    }
    cells.sort();
    Ok(Lowered {
        netlist: b.finish(),
        annotation: FaAnnotation { cells },
    })
}
