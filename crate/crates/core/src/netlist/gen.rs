//! Multiplier benchmark generators.
//!
//! Both generators name their inputs `a0..a{n-1}` then `b0..b{n-1}` and
//! produce the `2n` product bits LSB first. Every adder cell they instantiate
//! is recorded in the metadata so FA counts are known by construction.

use std::collections::BTreeSet;

use serde::{Deserialize, Serialize};

use super::{Netlist, NetlistBuilder, NetlistError, NodeId, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Architecture {
    Csa,
    Booth,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum CellKind {
    Full,
    Half,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct AdderCell {
    pub kind: CellKind,
    /// Three operands for a full adder, two for a half adder.
    pub inputs: Vec<NodeId>,
    pub sum: NodeId,
    pub carry: NodeId,
}

/// Sidecar metadata written next to generated benchmarks.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct GenMeta {
    pub bits: u32,
    pub architecture: Architecture,
    pub fa_count: u64,
    pub ha_count: u64,
    #[serde(skip)]
    pub cells: Vec<AdderCell>,
}

#[derive(Debug, Clone)]
pub struct Generated {
    pub netlist: Netlist,
    pub meta: GenMeta,
}

struct CellRecorder {
    cells: Vec<AdderCell>,
    seen: BTreeSet<Vec<NodeId>>,
}

impl CellRecorder {
    fn new() -> Self {
        CellRecorder {
            cells: Vec::new(),
            seen: BTreeSet::new(),
        }
    }

    fn full(&mut self, b: &mut NetlistBuilder, x: NodeId, y: NodeId, z: NodeId) -> (NodeId, NodeId) {
        let (sum, carry) = b.full_adder(x, y, z);
        let mut key = vec![x, y, z];
        key.sort_unstable();
        if self.seen.insert(key.clone()) {
            self.cells.push(AdderCell {
                kind: CellKind::Full,
                inputs: key,
                sum,
                carry,
            });
        }
        (sum, carry)
    }

    fn half(&mut self, b: &mut NetlistBuilder, x: NodeId, y: NodeId) -> (NodeId, NodeId) {
        let (sum, carry) = b.half_adder(x, y);
        let mut key = vec![x, y];
        key.sort_unstable();
        if self.seen.insert(key.clone()) {
            self.cells.push(AdderCell {
                kind: CellKind::Half,
                inputs: key,
                sum,
                carry,
            });
        }
        (sum, carry)
    }

    fn finish(self, netlist: Netlist, bits: u32, architecture: Architecture) -> Generated {
        let fa_count = self.cells.iter().filter(|c| c.kind == CellKind::Full).count() as u64;
        let ha_count = self.cells.len() as u64 - fa_count;
        Generated {
            netlist,
            meta: GenMeta {
                bits,
                architecture,
                fa_count,
                ha_count,
                cells: self.cells,
            },
        }
    }
}

fn operand_inputs(b: &mut NetlistBuilder, n: u32) -> (Vec<NodeId>, Vec<NodeId>) {
    let a = (0..n).map(|i| b.named_input(format!("a{i}"))).collect();
    let y = (0..n).map(|i| b.named_input(format!("b{i}"))).collect();
    (a, y)
}

/// Unsigned `n x n` carry-save array multiplier.
///
/// Row 1 is a line of half adders, rows `2..n` are carry-save rows of `n - 1`
/// full adders, and a ripple-carry vector-merge adder (one half adder, `n - 2`
/// full adders) produces the upper half: `n(n-2) = (n-1)^2 - 1` full adders.
pub fn gen_csa_multiplier(n: u32) -> Result<Generated> {
    if n < 2 {
        return Err(NetlistError::Argument(format!("CSA multiplier needs n >= 2, got {n}")));
    }
    let width = 2 * n as usize;
    let mut b = NetlistBuilder::new();
    let mut rec = CellRecorder::new();
    let (a, y) = operand_inputs(&mut b, n);
    let pp = |b: &mut NetlistBuilder, i: usize, j: usize| b.and(a[j], y[i]);

    let mut product = vec![NodeId::CONST_FALSE; width];
    // Pending sum and carry bits indexed by weight.
    let mut sum: Vec<Option<NodeId>> = vec![None; width + 1];
    let mut carry: Vec<Option<NodeId>> = vec![None; width + 1];
    for j in 0..n as usize {
        sum[j] = Some(pp(&mut b, 0, j));
    }
    product[0] = sum[0].take().expect("weight 0 partial product");

    for i in 1..n as usize {
        let mut next_sum = vec![None; width + 1];
        let mut next_carry = vec![None; width + 1];
        for j in 0..n as usize {
            let w = i + j;
            let x = pp(&mut b, i, j);
            match (sum[w].take(), carry[w].take()) {
                (None, None) => next_sum[w] = Some(x),
                (Some(s), None) | (None, Some(s)) => {
                    let (s, c) = rec.half(&mut b, x, s);
                    next_sum[w] = Some(s);
                    next_carry[w + 1] = Some(c);
                }
                (Some(s), Some(c0)) => {
                    let (s, c) = rec.full(&mut b, x, s, c0);
                    next_sum[w] = Some(s);
                    next_carry[w + 1] = Some(c);
                }
            }
        }
        product[i] = next_sum[i].take().expect("row output bit");
        sum = next_sum;
        carry = next_carry;
    }

    let mut ripple: Option<NodeId> = None;
    for w in n as usize..width {
        let bits: Vec<NodeId> = [sum[w], carry[w], ripple].into_iter().flatten().collect();
        ripple = None;
        product[w] = match bits.as_slice() {
            [] => NodeId::CONST_FALSE,
            [x] => *x,
            [x, z] => {
                let (s, c) = rec.half(&mut b, *x, *z);
                ripple = Some(c);
                s
            }
            [x, z, c0] => {
                let (s, c) = rec.full(&mut b, *x, *z, *c0);
                ripple = Some(c);
                s
            }
            _ => unreachable!(),
        };
    }
    debug_assert!(ripple.is_none(), "carry out of the top product bit");
    for p in product {
        b.add_output(p, false);
    }
    Ok(rec.finish(b.finish(), n, Architecture::Csa))
}

/// Signed `n x n` radix-4 Booth multiplier with replicated sign extension,
/// reduced column by column with full and half adders.
pub fn gen_booth_multiplier(n: u32) -> Result<Generated> {
    if n < 4 || n % 2 != 0 {
        return Err(NetlistError::Argument(format!(
            "Booth multiplier needs an even n >= 4, got {n}"
        )));
    }
    let width = 2 * n as usize;
    let nu = n as usize;
    let mut b = NetlistBuilder::new();
    let mut rec = CellRecorder::new();
    let (a, y) = operand_inputs(&mut b, n);
    let mut columns: Vec<Vec<NodeId>> = vec![Vec::new(); width];

    for digit in 0..nu / 2 {
        let hi = y[2 * digit + 1];
        let mid = y[2 * digit];
        let (one, two) = if digit == 0 {
            let nmid = b.not(mid);
            (mid, b.and(hi, nmid))
        } else {
            let lo = y[2 * digit - 1];
            let one = b.xor(mid, lo);
            let nhi = b.not(hi);
            let both = b.and(mid, lo);
            let nmid = b.not(mid);
            let nlo = b.not(lo);
            let neither = b.and(nmid, nlo);
            let up = b.and(hi, neither);
            let down = b.and(nhi, both);
            (one, b.or(up, down))
        };
        let neg = hi;
        let shift = 2 * digit;
        // Partial product bits j = 0..=n over the sign-extended multiplicand.
        let mut row = Vec::with_capacity(nu + 1);
        for j in 0..=nu {
            let aj = a[j.min(nu - 1)];
            let single = b.and(one, aj);
            let sel = if j == 0 {
                single
            } else {
                let double = b.and(two, a[j - 1]);
                b.or(single, double)
            };
            row.push(b.xor(sel, neg));
        }
        let sign = row[nu];
        for (j, bit) in row.into_iter().enumerate() {
            if shift + j < width {
                columns[shift + j].push(bit);
            }
        }
        for col in (shift + nu + 1)..width {
            columns[col].push(sign);
        }
        columns[shift].push(neg);
    }

    let mut product = Vec::with_capacity(width);
    for k in 0..width {
        let top = k + 1 == width;
        let mut col = std::mem::take(&mut columns[k]);
        loop {
            // x + x = 2x: move duplicate pairs up a column without gates.
            if let Some((i, j)) = first_duplicate(&col) {
                let x = col[i];
                col.remove(j);
                col.remove(i);
                if !top {
                    columns[k + 1].push(x);
                }
                continue;
            }
            if col.len() >= 3 {
                let (x, z, w) = (col.remove(0), col.remove(0), col.remove(0));
                if top {
                    let t = b.xor(x, z);
                    let s = b.xor(t, w);
                    col.push(s);
                } else {
                    let (s, c) = rec.full(&mut b, x, z, w);
                    col.push(s);
                    columns[k + 1].push(c);
                }
                continue;
            }
            if col.len() == 2 {
                let (x, z) = (col[0], col[1]);
                col.clear();
                if top {
                    let s = b.xor(x, z);
                    col.push(s);
                } else {
                    let (s, c) = rec.half(&mut b, x, z);
                    col.push(s);
                    columns[k + 1].push(c);
                }
                continue;
            }
            break;
        }
        product.push(col.first().copied().unwrap_or(NodeId::CONST_FALSE));
    }
    for p in product {
        b.add_output(p, false);
    }
    Ok(rec.finish(b.finish(), n, Architecture::Booth))
}

fn first_duplicate(col: &[NodeId]) -> Option<(usize, usize)> {
    for j in 1..col.len() {
        for i in 0..j {
            if col[i] == col[j] {
                return Some((i, j));
            }
        }
    }
    None
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::netlist::{equiv_check, EquivMode};
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    fn mul_inputs(n: u32, a: u64, b: u64) -> u64 {
        a | (b << n)
    }

    fn signed(v: u64, bits: u32) -> i64 {
        let shift = 64 - bits;
        ((v << shift) as i64) >> shift
    }

    #[test]
    fn csa_fa_counts_match_closed_form() {
        for n in 2..=24u32 {
            let g = gen_csa_multiplier(n).unwrap();
            let expect = u64::from((n - 1) * (n - 1) - 1);
            assert_eq!(g.meta.fa_count, expect, "n = {n}");
            assert_eq!(g.meta.ha_count, u64::from(n), "n = {n}");
        }
        assert_eq!(gen_csa_multiplier(3).unwrap().meta.fa_count, 3);
        assert_eq!(gen_csa_multiplier(8).unwrap().meta.fa_count, 48);
        assert!(gen_csa_multiplier(1).is_err());
    }

    #[test]
    fn csa3_computes_15_for_3_times_5() {
        // 5 does not fit in 3 bits; 3 * 5 uses the 4-bit instance and 3 * 3 the 3-bit one.
        let g3 = gen_csa_multiplier(3).unwrap();
        assert_eq!(g3.netlist.simulate_u64(mul_inputs(3, 3, 5)).unwrap(), 15);
        let g4 = gen_csa_multiplier(4).unwrap();
        assert_eq!(g4.netlist.simulate_u64(mul_inputs(4, 3, 5)).unwrap(), 15);
    }

    #[test]
    fn csa_exhaustive_small_widths() {
        for n in 2..=6u32 {
            let g = gen_csa_multiplier(n).unwrap();
            let mask = (1u64 << (2 * n)) - 1;
            for a in 0..(1u64 << n) {
                for b in 0..(1u64 << n) {
                    let got = g.netlist.simulate_u64(mul_inputs(n, a, b)).unwrap();
                    assert_eq!(got, (a * b) & mask, "n={n} a={a} b={b}");
                }
            }
        }
    }

    #[test]
    fn csa_random_wide() {
        let mut rng = ChaCha8Rng::seed_from_u64(11);
        for n in [16u32, 32] {
            let g = gen_csa_multiplier(n).unwrap();
            let mask = (1u64 << n) - 1;
            let product_mask = if n >= 32 { u64::MAX } else { (1u64 << (2 * n)) - 1 };
            for _ in 0..200 {
                let a = rng.gen::<u64>() & mask;
                let b = rng.gen::<u64>() & mask;
                let got = g.netlist.simulate_u64(mul_inputs(n, a, b)).unwrap();
                assert_eq!(got, a.wrapping_mul(b) & product_mask);
            }
        }
    }

    #[test]
    fn booth_signed_products() {
        let g = gen_booth_multiplier(4).unwrap();
        // -3 * 2 = -6
        let out = g.netlist.simulate_u64(mul_inputs(4, 0b1101, 0b0010)).unwrap();
        assert_eq!(signed(out, 8), -6);
        for x in 0..16u64 {
            assert_eq!(g.netlist.simulate_u64(mul_inputs(4, 0, x)).unwrap(), 0);
        }
        for n in [4u32, 6] {
            let g = gen_booth_multiplier(n).unwrap();
            for a in 0..(1u64 << n) {
                for b in 0..(1u64 << n) {
                    let want = (signed(a, n) * signed(b, n)) as u64 & ((1u64 << (2 * n)) - 1);
                    let got = g.netlist.simulate_u64(mul_inputs(n, a, b)).unwrap();
                    assert_eq!(got, want, "n={n} a={a} b={b}");
                }
            }
        }
    }

    /// Independent reference: signed shift-add over two's-complement bits.
    fn shift_add_signed(n: u32) -> Netlist {
        let mut b = NetlistBuilder::new();
        let (a, y) = operand_inputs(&mut b, n);
        let width = 2 * n as usize;
        let ext = |v: &[NodeId], k: usize| v[k.min(v.len() - 1)];
        let mut acc: Vec<NodeId> = vec![NodeId::CONST_FALSE; width];
        for i in 0..n as usize {
            // Row i: a sign-extended, shifted by i, gated by y[i]; the last
            // row has negative weight so it is subtracted.
            let row: Vec<NodeId> = (0..width)
                .map(|k| if k < i { NodeId::CONST_FALSE } else { ext(&a, k - i) })
                .map(|bit| b.and(bit, y[i]))
                .collect();
            let subtract = i + 1 == n as usize;
            let mut carry = if subtract { b.const_true() } else { NodeId::CONST_FALSE };
            for k in 0..width {
                let r = if subtract { b.not(row[k]) } else { row[k] };
                let t = b.xor(acc[k], r);
                let s = b.xor(t, carry);
                let c = b.maj(acc[k], r, carry);
                acc[k] = s;
                carry = c;
            }
        }
        for bit in acc {
            b.add_output(bit, false);
        }
        b.finish()
    }

    #[test]
    fn booth8_matches_shift_add_exhaustively() {
        let g = gen_booth_multiplier(8).unwrap();
        let reference = shift_add_signed(8);
        let v = equiv_check(&g.netlist, &reference, EquivMode::Exhaustive).unwrap();
        assert!(v.is_equal(), "{v:?}");
        assert!(g.meta.fa_count > 0);
    }

    #[test]
    fn booth_rejects_bad_widths() {
        assert!(gen_booth_multiplier(3).is_err());
        assert!(gen_booth_multiplier(2).is_err());
        assert!(gen_booth_multiplier(7).is_err());
    }
}
