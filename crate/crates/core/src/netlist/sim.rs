//! Bit-parallel simulation and simulation-based equivalence checking.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::Serialize;

use super::{Netlist, NetlistError, NodeKind, Result};

/// Inputs beyond this count are refused by exhaustive checking.
pub const EXHAUSTIVE_LIMIT: usize = 20;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case", tag = "mode")]
pub enum EquivMode {
    Exhaustive,
    Random { vectors: u64, seed: u64 },
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case", tag = "verdict")]
pub enum Verdict {
    /// `proven` is true only for exhaustive runs.
    Equal { vectors: u64, proven: bool },
    Counterexample {
        assignment: Vec<bool>,
        left: Vec<bool>,
        right: Vec<bool>,
    },
}

impl Verdict {
    pub fn is_equal(&self) -> bool {
        matches!(self, Verdict::Equal { .. })
    }
}

impl Netlist {
    /// Evaluates all nodes on 64 assignments at once; `inputs[k]` carries the
    /// 64 values of input ordinal `k`.
    pub fn simulate_nodes(&self, inputs: &[u64]) -> Vec<u64> {
        let mut values = vec![0u64; self.len()];
        for (i, kind) in self.nodes().iter().enumerate() {
            values[i] = match *kind {
                NodeKind::ConstFalse => 0,
                NodeKind::Input(ord) => inputs[ord as usize],
                NodeKind::Not(c) => !values[c.index()],
                NodeKind::And(a, b) => values[a.index()] & values[b.index()],
            };
        }
        values
    }

    /// Output words for 64 parallel assignments.
    pub fn simulate_words(&self, inputs: &[u64]) -> Result<Vec<u64>> {
        if inputs.len() != self.inputs().len() {
            return Err(NetlistError::Argument(format!(
                "expected {} input words, got {}",
                self.inputs().len(),
                inputs.len()
            )));
        }
        let values = self.simulate_nodes(inputs);
        Ok(self
            .outputs()
            .iter()
            .map(|o| {
                let v = values[o.node.index()];
                if o.inverted {
                    !v
                } else {
                    v
                }
            })
            .collect())
    }

    pub fn simulate(&self, assignment: &[bool]) -> Result<Vec<bool>> {
        let words: Vec<u64> = assignment.iter().map(|&b| if b { !0 } else { 0 }).collect();
        Ok(self
            .simulate_words(&words)?
            .into_iter()
            .map(|w| w & 1 == 1)
            .collect())
    }

    /// Simulates with inputs packed little-endian from `value`; output bit `k`
    /// of the result is output `k`. Only for netlists with at most 64 of each.
    pub fn simulate_u64(&self, value: u64) -> Result<u64> {
        let n = self.inputs().len();
        if n > 64 || self.outputs().len() > 64 {
            return Err(NetlistError::Argument("more than 64 inputs or outputs".into()));
        }
        let bits: Vec<bool> = (0..n).map(|i| (value >> i) & 1 == 1).collect();
        Ok(self
            .simulate(&bits)?
            .iter()
            .enumerate()
            .fold(0u64, |acc, (i, &b)| acc | (u64::from(b) << i)))
    }
}

/// Word `block` of the exhaustive enumeration for input `index`: assignment
/// number `64 * block + lane` sets input `index` to bit `index` of that number.
pub(crate) fn exhaustive_word(index: usize, block: u64) -> u64 {
    const PATTERNS: [u64; 6] = [
        0xAAAA_AAAA_AAAA_AAAA,
        0xCCCC_CCCC_CCCC_CCCC,
        0xF0F0_F0F0_F0F0_F0F0,
        0xFF00_FF00_FF00_FF00,
        0xFFFF_0000_FFFF_0000,
        0xFFFF_FFFF_0000_0000,
    ];
    if index < 6 {
        PATTERNS[index]
    } else if (block >> (index - 6)) & 1 == 1 {
        !0
    } else {
        0
    }
}

fn lane_assignment(words: &[u64], lane: u32) -> Vec<bool> {
    words.iter().map(|w| (w >> lane) & 1 == 1).collect()
}

fn compare_block(a: &Netlist, b: &Netlist, words: &[u64], lanes: u64) -> Result<Option<Verdict>> {
    let oa = a.simulate_words(words)?;
    let ob = b.simulate_words(words)?;
    let mask = if lanes >= 64 { !0 } else { (1u64 << lanes) - 1 };
    let diff = oa
        .iter()
        .zip(&ob)
        .fold(0u64, |acc, (x, y)| acc | (x ^ y))
        & mask;
    if diff == 0 {
        return Ok(None);
    }
    let lane = diff.trailing_zeros();
    Ok(Some(Verdict::Counterexample {
        assignment: lane_assignment(words, lane),
        left: lane_assignment(&oa, lane),
        right: lane_assignment(&ob, lane),
    }))
}

pub fn equiv_check(a: &Netlist, b: &Netlist, mode: EquivMode) -> Result<Verdict> {
    let n = a.inputs().len();
    if n != b.inputs().len() || a.outputs().len() != b.outputs().len() {
        return Err(NetlistError::Argument(format!(
            "arity mismatch: {}x{} vs {}x{}",
            n,
            a.outputs().len(),
            b.inputs().len(),
            b.outputs().len()
        )));
    }
    match mode {
        EquivMode::Exhaustive => {
            if n > EXHAUSTIVE_LIMIT {
                return Err(NetlistError::Argument(format!(
                    "exhaustive check limited to {EXHAUSTIVE_LIMIT} inputs, netlist has {n}"
                )));
            }
            let total = 1u64 << n;
            let blocks = total.div_ceil(64);
            let mut words = vec![0u64; n];
            for block in 0..blocks {
                for (i, w) in words.iter_mut().enumerate() {
                    *w = exhaustive_word(i, block);
                }
                let lanes = (total - block * 64).min(64);
                if let Some(cex) = compare_block(a, b, &words, lanes)? {
                    return Ok(cex);
                }
            }
            Ok(Verdict::Equal {
                vectors: total,
                proven: true,
            })
        }
        EquivMode::Random { vectors, seed } => {
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            let mut words = vec![0u64; n];
            let mut done = 0u64;
            while done < vectors {
                for w in words.iter_mut() {
                    *w = rng.gen();
                }
                let lanes = (vectors - done).min(64);
                if let Some(cex) = compare_block(a, b, &words, lanes)? {
                    return Ok(cex);
                }
                done += lanes;
            }
            Ok(Verdict::Equal {
                vectors,
                proven: false,
            })
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::netlist::NetlistBuilder;

    fn and2() -> Netlist {
        let mut b = NetlistBuilder::new();
        let x = b.input();
        let y = b.input();
        let g = b.and(x, y);
        b.add_output(g, false);
        b.finish()
    }

    #[test]
    fn de_morgan_dual_is_equal() {
        let mut b = NetlistBuilder::new();
        let x = b.input();
        let y = b.input();
        let nx = b.not(x);
        let ny = b.not(y);
        let or = b.or(nx, ny);
        b.add_output(or, true);
        let dual = b.finish();
        let v = equiv_check(&and2(), &dual, EquivMode::Exhaustive).unwrap();
        assert_eq!(v, Verdict::Equal { vectors: 4, proven: true });
    }

    #[test]
    fn reflexive() {
        let n = and2();
        assert!(equiv_check(&n, &n, EquivMode::Exhaustive).unwrap().is_equal());
        assert!(equiv_check(&n, &n, EquivMode::Random { vectors: 100, seed: 3 })
            .unwrap()
            .is_equal());
    }

    #[test]
    fn counterexample_reported() {
        let mut b = NetlistBuilder::new();
        let x = b.input();
        let y = b.input();
        let g = b.or(x, y);
        b.add_output(g, false);
        let or = b.finish();
        match equiv_check(&and2(), &or, EquivMode::Exhaustive).unwrap() {
            Verdict::Counterexample { assignment, left, right } => {
                assert_eq!(assignment, vec![true, false]);
                assert_eq!(left, vec![false]);
                assert_eq!(right, vec![true]);
            }
            v => panic!("expected counterexample, got {v:?}"),
        }
    }

    #[test]
    fn arity_and_length_errors() {
        let mut b = NetlistBuilder::new();
        let x = b.input();
        b.add_output(x, false);
        let id = b.finish();
        assert!(equiv_check(&and2(), &id, EquivMode::Exhaustive).is_err());
        assert!(and2().simulate(&[true]).is_err());
    }

    #[test]
    fn xor3_parity() {
        let mut b = NetlistBuilder::new();
        let (x, y, z) = (b.input(), b.input(), b.input());
        let (s, c) = b.full_adder(x, y, z);
        b.add_output(s, false);
        b.add_output(c, false);
        let n = b.finish();
        assert_eq!(n.simulate(&[true, true, true]).unwrap(), vec![true, true]);
        for v in 0..8u64 {
            let ones = v.count_ones() as u64;
            assert_eq!(n.simulate_u64(v).unwrap(), (ones & 1) | (u64::from(ones >= 2) << 1));
        }
    }

    #[test]
    fn exhaustive_words_enumerate_every_assignment() {
        let n = 8;
        let mut seen = std::collections::BTreeSet::new();
        for block in 0..4u64 {
            let words: Vec<u64> = (0..n).map(|i| exhaustive_word(i, block)).collect();
            for lane in 0..64 {
                let v = (0..n).fold(0u64, |acc, i| acc | (((words[i] >> lane) & 1) << i));
                assert_eq!(v, block * 64 + lane);
                seen.insert(v);
            }
        }
        assert_eq!(seen.len(), 256);
    }
}
