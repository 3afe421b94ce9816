//! AIGER 1.9, combinational subset: ASCII `aag` and binary `aig`.
//!
//! Complemented AND fanins become explicit NOT nodes (one per complemented
//! variable); output literals keep their complement bit as the output's
//! inversion flag.

use std::collections::BTreeMap;
use std::fmt::Write as _;

use super::{topo_sort_kinds, Netlist, NetlistError, NodeId, NodeKind, Output, Result};

fn err(location: impl Into<String>, message: impl Into<String>) -> NetlistError {
    NetlistError::Parse {
        location: location.into(),
        message: message.into(),
    }
}

struct Header {
    max_var: u64,
    inputs: u64,
    outputs: u64,
    ands: u64,
    binary: bool,
}

fn parse_header(line: &str) -> Result<Header> {
    let loc = "line 1";
    let mut fields = line.split_ascii_whitespace();
    let binary = match fields.next() {
        Some("aag") => false,
        Some("aig") => true,
        Some(other) => return Err(err(loc, format!("unknown format tag {other:?}"))),
        None => return Err(err(loc, "empty header")),
    };
    let nums: Vec<u64> = fields
        .map(|f| {
            f.parse::<u64>()
                .map_err(|_| err(loc, format!("bad header field {f:?}")))
        })
        .collect::<Result<_>>()?;
    if nums.len() < 5 {
        return Err(err(loc, "header needs M I L O A"));
    }
    let (m, i, l, o, a) = (nums[0], nums[1], nums[2], nums[3], nums[4]);
    if l > 0 {
        return Err(NetlistError::Latches(l));
    }
    // B C J F extensions must be empty for a combinational netlist.
    if nums[5..].iter().any(|&x| x != 0) {
        return Err(err(loc, "bad-state, constraint, justice and fairness sections are unsupported"));
    }
    if m < i + a {
        return Err(err(loc, format!("M = {m} is smaller than I + A = {}", i + a)));
    }
    Ok(Header {
        max_var: m,
        inputs: i,
        outputs: o,
        ands: a,
        binary,
    })
}

/// Raw literal-level contents before lowering into a [`Netlist`].
struct RawAig {
    max_var: u64,
    input_vars: Vec<u64>,
    output_lits: Vec<u64>,
    /// `(lhs var, rhs0 lit, rhs1 lit)` in file order.
    ands: Vec<(u64, u64, u64)>,
    input_names: BTreeMap<usize, String>,
}

pub fn parse_aiger(bytes: &[u8]) -> Result<Netlist> {
    let header_end = bytes
        .iter()
        .position(|&b| b == b'\n')
        .ok_or_else(|| err("line 1", "missing header line"))?;
    let header_line = std::str::from_utf8(&bytes[..header_end])
        .map_err(|_| err("line 1", "header is not ASCII"))?;
    let header = parse_header(header_line)?;
    let raw = if header.binary {
        parse_binary_body(&header, bytes, header_end + 1)?
    } else {
        parse_ascii_body(&header, bytes, header_end + 1)?
    };
    lower(raw)
}

struct Lines<'a> {
    text: &'a [u8],
    pos: usize,
    line_no: usize,
}

impl<'a> Lines<'a> {
    fn next_line(&mut self) -> Option<(usize, &'a str)> {
        if self.pos >= self.text.len() {
            return None;
        }
        let rest = &self.text[self.pos..];
        let end = rest.iter().position(|&b| b == b'\n').unwrap_or(rest.len());
        let line = std::str::from_utf8(&rest[..end]).unwrap_or("\u{FFFD}");
        self.pos += end + 1;
        self.line_no += 1;
        Some((self.line_no, line.trim_end_matches('\r')))
    }

    fn expect_numbers(&mut self, count: usize, what: &str) -> Result<(usize, Vec<u64>)> {
        let (no, line) = self
            .next_line()
            .ok_or_else(|| err(format!("line {}", self.line_no + 1), format!("missing {what} line")))?;
        let nums: Vec<u64> = line
            .split_ascii_whitespace()
            .map(|f| {
                f.parse::<u64>()
                    .map_err(|_| err(format!("line {no}"), format!("bad {what} field {f:?}")))
            })
            .collect::<Result<_>>()?;
        if nums.len() != count {
            return Err(err(
                format!("line {no}"),
                format!("{what} line needs {count} fields, found {}", nums.len()),
            ));
        }
        Ok((no, nums))
    }
}

fn parse_ascii_body(h: &Header, bytes: &[u8], start: usize) -> Result<RawAig> {
    let mut lines = Lines {
        text: bytes,
        pos: start,
        line_no: 1,
    };
    let mut input_vars = Vec::with_capacity(h.inputs as usize);
    for _ in 0..h.inputs {
        let (no, n) = lines.expect_numbers(1, "input")?;
        if n[0] < 2 || n[0] & 1 == 1 {
            return Err(err(format!("line {no}"), format!("input literal {} must be even and non-constant", n[0])));
        }
        input_vars.push(n[0] >> 1);
    }
    let mut output_lits = Vec::with_capacity(h.outputs as usize);
    for _ in 0..h.outputs {
        output_lits.push(lines.expect_numbers(1, "output")?.1[0]);
    }
    let mut ands = Vec::with_capacity(h.ands as usize);
    for _ in 0..h.ands {
        let (no, n) = lines.expect_numbers(3, "and")?;
        if n[0] < 2 || n[0] & 1 == 1 {
            return Err(err(format!("line {no}"), format!("and lhs {} must be even and non-constant", n[0])));
        }
        ands.push((n[0] >> 1, n[1], n[2]));
    }
    let input_names = parse_symbols(&mut lines, h.inputs as usize);
    Ok(RawAig {
        max_var: h.max_var,
        input_vars,
        output_lits,
        ands,
        input_names,
    })
}

fn parse_symbols(lines: &mut Lines<'_>, inputs: usize) -> BTreeMap<usize, String> {
    let mut names = BTreeMap::new();
    while let Some((_, line)) = lines.next_line() {
        if line.starts_with('c') {
            break;
        }
        if let Some(rest) = line.strip_prefix('i') {
            if let Some((idx, name)) = rest.split_once(' ') {
                if let Ok(idx) = idx.parse::<usize>() {
                    if idx < inputs {
                        names.insert(idx, name.to_string());
                    }
                }
            }
        }
    }
    names
}

fn read_varint(bytes: &[u8], pos: &mut usize) -> Result<u64> {
    let mut value = 0u64;
    let mut shift = 0;
    loop {
        let b = *bytes
            .get(*pos)
            .ok_or_else(|| err(format!("byte {}", *pos), "truncated delta encoding"))?;
        *pos += 1;
        value |= u64::from(b & 0x7f) << shift;
        if b & 0x80 == 0 {
            return Ok(value);
        }
        shift += 7;
        if shift > 63 {
            return Err(err(format!("byte {}", *pos), "delta encoding overflows"));
        }
    }
}

fn parse_binary_body(h: &Header, bytes: &[u8], start: usize) -> Result<RawAig> {
    if h.max_var != h.inputs + h.ands {
        return Err(err("line 1", "binary AIGER requires M = I + L + A"));
    }
    let mut lines = Lines {
        text: bytes,
        pos: start,
        line_no: 1,
    };
    let mut output_lits = Vec::with_capacity(h.outputs as usize);
    for _ in 0..h.outputs {
        output_lits.push(lines.expect_numbers(1, "output")?.1[0]);
    }
    let mut pos = lines.pos;
    let mut ands = Vec::with_capacity(h.ands as usize);
    for i in 0..h.ands {
        let at = pos;
        let lhs = 2 * (h.inputs + i + 1);
        let d0 = read_varint(bytes, &mut pos)?;
        let d1 = read_varint(bytes, &mut pos)?;
        if d0 == 0 || d0 > lhs {
            return Err(err(format!("byte {at}"), "first delta out of range"));
        }
        let rhs0 = lhs - d0;
        if d1 > rhs0 {
            return Err(err(format!("byte {at}"), "second delta out of range"));
        }
        ands.push((lhs >> 1, rhs0, rhs0 - d1));
    }
    let mut sym = Lines {
        text: bytes,
        pos,
        line_no: lines.line_no,
    };
    let input_names = parse_symbols(&mut sym, h.inputs as usize);
    Ok(RawAig {
        max_var: h.max_var,
        input_vars: (1..=h.inputs).collect(),
        output_lits,
        ands,
        input_names,
    })
}

/// Lowers literal-level AIGER into a netlist, topologically normalized.
fn lower(raw: RawAig) -> Result<Netlist> {
    const UNDEF: u32 = u32::MAX;
    let var_count = raw.max_var as usize + 1;
    // Variable -> index into `kinds` for the raw, unordered graph.
    let mut var_node = vec![UNDEF; var_count];
    let mut kinds = vec![NodeKind::ConstFalse];
    var_node[0] = 0;
    for (ord, &v) in raw.input_vars.iter().enumerate() {
        let v = v as usize;
        if v >= var_count {
            return Err(err(format!("input {ord}"), format!("variable {v} exceeds M")));
        }
        if var_node[v] != UNDEF {
            return Err(err(format!("input {ord}"), format!("variable {v} defined twice")));
        }
        var_node[v] = kinds.len() as u32;
        kinds.push(NodeKind::Input(ord as u32));
    }
    for (i, &(lhs, _, _)) in raw.ands.iter().enumerate() {
        let v = lhs as usize;
        if v >= var_count {
            return Err(err(format!("and {i}"), format!("variable {v} exceeds M")));
        }
        if var_node[v] != UNDEF {
            return Err(err(format!("and {i}"), format!("variable {v} defined twice")));
        }
        var_node[v] = kinds.len() as u32;
        // Placeholder; fanins resolved below once every variable is known.
        kinds.push(NodeKind::ConstFalse);
    }
    // Complemented literals map to shared NOT nodes appended after all vars.
    let mut not_node = vec![UNDEF; var_count];
    let mut lit_node = |lit: u64, kinds: &mut Vec<NodeKind>, what: &str| -> Result<NodeId> {
        let v = (lit >> 1) as usize;
        if v >= var_count || var_node[v] == UNDEF {
            return Err(err(what.to_string(), format!("dangling literal {lit}")));
        }
        let base = NodeId(var_node[v]);
        if lit & 1 == 0 {
            return Ok(base);
        }
        if not_node[v] == UNDEF {
            not_node[v] = kinds.len() as u32;
            kinds.push(NodeKind::Not(base));
        }
        Ok(NodeId(not_node[v]))
    };
    for (i, &(lhs, r0, r1)) in raw.ands.iter().enumerate() {
        let what = format!("and {i}");
        let a = lit_node(r0, &mut kinds, &what)?;
        let b = lit_node(r1, &mut kinds, &what)?;
        kinds[var_node[lhs as usize] as usize] = NodeKind::And(a, b);
    }
    let mut outputs = Vec::with_capacity(raw.output_lits.len());
    for (i, &lit) in raw.output_lits.iter().enumerate() {
        let v = (lit >> 1) as usize;
        if v >= var_count || var_node[v] == UNDEF {
            return Err(err(format!("output {i}"), format!("dangling literal {lit}")));
        }
        outputs.push((NodeId(var_node[v]), lit & 1 == 1));
    }

    let order = topo_sort_kinds(&kinds).map_err(|e| err("and section", e.to_string()))?;
    let mut remap = vec![NodeId(0); kinds.len()];
    for (new, old) in order.iter().enumerate() {
        remap[old.index()] = NodeId(new as u32);
    }
    let nodes: Vec<NodeKind> = order
        .iter()
        .map(|old| match kinds[old.index()] {
            NodeKind::Not(c) => NodeKind::Not(remap[c.index()]),
            NodeKind::And(a, b) => NodeKind::And(remap[a.index()], remap[b.index()]),
            k => k,
        })
        .collect();
    let mut inputs = vec![NodeId(0); raw.input_vars.len()];
    for (i, k) in nodes.iter().enumerate() {
        if let NodeKind::Input(ord) = k {
            inputs[*ord as usize] = NodeId(i as u32);
        }
    }
    let outputs = outputs
        .into_iter()
        .map(|(n, inv)| Output {
            node: remap[n.index()],
            inverted: inv,
        })
        .collect();
    let names = raw
        .input_names
        .into_iter()
        .map(|(ord, name)| (inputs[ord], name))
        .collect();
    Netlist::new(nodes, inputs, outputs, names)
}

/// Literal assignment shared by the two writers: inputs take variables
/// `1..=I` by ordinal, AND nodes follow in id order, NOT nodes reuse their
/// child's variable with the complement bit set.
fn literal_map(netlist: &Netlist) -> (Vec<u64>, Vec<usize>) {
    let mut lits = vec![0u64; netlist.len()];
    for (ord, id) in netlist.inputs().iter().enumerate() {
        lits[id.index()] = 2 * (ord as u64 + 1);
    }
    let mut next_var = netlist.inputs().len() as u64 + 1;
    let mut and_nodes = Vec::new();
    for (i, kind) in netlist.nodes().iter().enumerate() {
        match *kind {
            NodeKind::ConstFalse | NodeKind::Input(_) => {}
            NodeKind::Not(c) => lits[i] = lits[c.index()] ^ 1,
            NodeKind::And(..) => {
                lits[i] = 2 * next_var;
                next_var += 1;
                and_nodes.push(i);
            }
        }
    }
    (lits, and_nodes)
}

fn and_fanins(netlist: &Netlist, lits: &[u64], i: usize) -> (u64, u64) {
    let NodeKind::And(a, b) = netlist.nodes()[i] else {
        unreachable!()
    };
    let (x, y) = (lits[a.index()], lits[b.index()]);
    if x >= y {
        (x, y)
    } else {
        (y, x)
    }
}

fn write_symbols(netlist: &Netlist, out: &mut String) {
    for (ord, id) in netlist.inputs().iter().enumerate() {
        if let Some(name) = netlist.names().get(id) {
            let _ = writeln!(out, "i{ord} {name}");
        }
    }
}

/// ASCII AIGER (`aag`).
pub fn emit_aiger(netlist: &Netlist) -> Vec<u8> {
    let (lits, and_nodes) = literal_map(netlist);
    let i = netlist.inputs().len();
    let a = and_nodes.len();
    let mut out = String::new();
    let _ = writeln!(out, "aag {} {i} 0 {} {a}", i + a, netlist.outputs().len());
    for id in netlist.inputs() {
        let _ = writeln!(out, "{}", lits[id.index()]);
    }
    for o in netlist.outputs() {
        let _ = writeln!(out, "{}", lits[o.node.index()] ^ u64::from(o.inverted));
    }
    for &n in &and_nodes {
        let (x, y) = and_fanins(netlist, &lits, n);
        let _ = writeln!(out, "{} {x} {y}", lits[n]);
    }
    write_symbols(netlist, &mut out);
    out.into_bytes()
}

fn write_varint(out: &mut Vec<u8>, mut x: u64) {
    while x >= 0x80 {
        out.push((x as u8 & 0x7f) | 0x80);
        x >>= 7;
    }
    out.push(x as u8);
}

/// Binary AIGER (`aig`).
pub fn emit_aiger_binary(netlist: &Netlist) -> Vec<u8> {
    let (lits, and_nodes) = literal_map(netlist);
    let i = netlist.inputs().len();
    let a = and_nodes.len();
    let mut text = String::new();
    let _ = writeln!(text, "aig {} {i} 0 {} {a}", i + a, netlist.outputs().len());
    for o in netlist.outputs() {
        let _ = writeln!(text, "{}", lits[o.node.index()] ^ u64::from(o.inverted));
    }
    let mut out = text.into_bytes();
    for &n in &and_nodes {
        let (x, y) = and_fanins(netlist, &lits, n);
        write_varint(&mut out, lits[n] - x);
        write_varint(&mut out, x - y);
    }
    let mut sym = String::new();
    write_symbols(netlist, &mut sym);
    out.extend_from_slice(sym.as_bytes());
    out
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::netlist::{equiv_check, gen_csa_multiplier, EquivMode, NetlistBuilder, Verdict};

    #[test]
    fn identity_round_trip_bytes() {
        let n = parse_aiger(b"aag 1 1 0 1 0\n2\n2\n").unwrap();
        assert_eq!(n.inputs().len(), 1);
        assert_eq!(n.outputs(), &[Output { node: n.inputs()[0], inverted: false }]);
        assert_eq!(emit_aiger(&n), b"aag 1 1 0 1 0\n2\n2\n");
    }

    #[test]
    fn and_gate_ascii() {
        let n = parse_aiger(b"aag 3 2 0 1 1\n2\n4\n6\n6 2 4\n").unwrap();
        assert_eq!(n.simulate(&[true, true]).unwrap(), vec![true]);
        assert_eq!(n.simulate(&[true, false]).unwrap(), vec![false]);
        assert_eq!(n.simulate(&[false, true]).unwrap(), vec![false]);
        let text = String::from_utf8(emit_aiger(&n)).unwrap();
        assert_eq!(text, "aag 3 2 0 1 1\n2\n4\n6\n6 4 2\n");
    }

    #[test]
    fn binary_matches_ascii() {
        let ascii = parse_aiger(b"aag 3 2 0 1 1\n2\n4\n6\n6 4 2\n").unwrap();
        let bin = emit_aiger_binary(&ascii);
        assert!(bin.starts_with(b"aig 3 2 0 1 1\n6\n"));
        assert_eq!(parse_aiger(&bin).unwrap(), ascii);

        let csa = gen_csa_multiplier(4).unwrap().netlist;
        let from_ascii = parse_aiger(&emit_aiger(&csa)).unwrap();
        let from_binary = parse_aiger(&emit_aiger_binary(&csa)).unwrap();
        assert_eq!(from_ascii, from_binary);
    }

    #[test]
    fn complemented_fanins_become_not_nodes() {
        // o = !(a & !b)
        let n = parse_aiger(b"aag 3 2 0 1 1\n2\n4\n7\n6 2 5\n").unwrap();
        let nots = n.nodes().iter().filter(|k| matches!(k, NodeKind::Not(_))).count();
        assert_eq!(nots, 1);
        assert!(n.outputs()[0].inverted);
        assert_eq!(n.simulate(&[true, false]).unwrap(), vec![false]);
        assert_eq!(n.simulate(&[true, true]).unwrap(), vec![true]);
    }

    #[test]
    fn csa4_round_trip_is_equivalent() {
        let csa = gen_csa_multiplier(4).unwrap().netlist;
        let back = parse_aiger(&emit_aiger(&csa)).unwrap();
        let v = equiv_check(&csa, &back, EquivMode::Exhaustive).unwrap();
        assert!(matches!(v, Verdict::Equal { vectors: 256, .. }));
    }

    #[test]
    fn unordered_ascii_ands_are_normalized() {
        // Gate 8 uses gate 6, listed afterwards.
        let n = parse_aiger(b"aag 4 2 0 1 2\n2\n4\n8\n8 6 2\n6 2 4\n").unwrap();
        assert_eq!(n.simulate(&[true, true]).unwrap(), vec![true]);
        assert_eq!(n.simulate(&[true, false]).unwrap(), vec![false]);
    }

    #[test]
    fn symbols_are_kept() {
        let mut b = NetlistBuilder::new();
        let a = b.named_input("a0");
        b.add_output(a, true);
        let n = b.finish();
        let text = emit_aiger(&n);
        assert_eq!(text, b"aag 1 1 0 1 0\n2\n3\ni0 a0\n");
        assert_eq!(parse_aiger(&text).unwrap(), n);
    }

    #[test]
    fn malformed_inputs_are_rejected() {
        assert!(matches!(
            parse_aiger(b"aag 1 0 1 0 0\n2 3\n"),
            Err(NetlistError::Latches(1))
        ));
        assert!(matches!(parse_aiger(b"xyz 1 1 0 1 0\n2\n2\n"), Err(NetlistError::Parse { .. })));
        assert!(matches!(parse_aiger(b"aag 1 1 0 1\n"), Err(NetlistError::Parse { .. })));
        // output refers to undefined variable 2
        let e = parse_aiger(b"aag 2 1 0 1 0\n2\n4\n").unwrap_err();
        assert!(e.to_string().contains("dangling"), "{e}");
        // missing and line
        let e = parse_aiger(b"aag 3 2 0 1 1\n2\n4\n6\n").unwrap_err();
        assert!(e.to_string().contains("line 5"), "{e}");
        // combinational cycle
        let e = parse_aiger(b"aag 4 1 0 1 2\n2\n6\n6 8 2\n8 6 2\n").unwrap_err();
        assert!(e.to_string().contains("cycle"), "{e}");
    }

    #[test]
    fn constant_outputs() {
        let n = parse_aiger(b"aag 0 0 0 2 0\n0\n1\n").unwrap();
        assert_eq!(n.simulate(&[]).unwrap(), vec![false, true]);
        assert_eq!(emit_aiger(&n), b"aag 0 0 0 2 0\n0\n1\n");
    }
}
