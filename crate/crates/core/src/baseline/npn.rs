//! NPN canonicalization of 3-input truth tables.

use serde::Serialize;

/// Input permutation, input negation mask and output negation.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize)]
pub struct NpnTransform {
    /// Position `i` of the transformed function reads original input `perm[i]`.
    pub perm: [u8; 3],
    pub neg_mask: u8,
    pub out_neg: bool,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize)]
pub struct NpnClass {
    pub canonical: u8,
    pub transform: NpnTransform,
}

const PERMS: [[u8; 3]; 6] = [
    [0, 1, 2],
    [0, 2, 1],
    [1, 0, 2],
    [1, 2, 0],
    [2, 0, 1],
    [2, 1, 0],
];

/// `g(y) = out_neg ^ f(x)` where `x[perm[i]] = y[i] ^ neg[i]`.
pub fn apply_transform(table: u8, t: NpnTransform) -> u8 {
    let mut out = 0u8;
    for y in 0..8u8 {
        let mut x = 0u8;
        for i in 0..3 {
            let bit = ((y >> i) & 1) ^ ((t.neg_mask >> i) & 1);
            x |= bit << t.perm[i];
        }
        let v = ((table >> x) & 1) ^ u8::from(t.out_neg);
        out |= v << y;
    }
    out
}

pub fn all_transforms() -> impl Iterator<Item = NpnTransform> {
    PERMS.iter().flat_map(|&perm| {
        (0..8u8).flat_map(move |neg_mask| {
            [false, true].into_iter().map(move |out_neg| NpnTransform {
                perm,
                neg_mask,
                out_neg,
            })
        })
    })
}

pub fn npn_canonical(table: u8) -> NpnClass {
    let mut best: Option<NpnClass> = None;
    for t in all_transforms() {
        let v = apply_transform(table, t);
        if best.is_none_or(|b| v < b.canonical) {
            best = Some(NpnClass {
                canonical: v,
                transform: t,
            });
        }
    }
    best.expect("96 transforms")
}
