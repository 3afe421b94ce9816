//! End-to-end acceptance suite. Prints one PASS/FAIL line per criterion and
//! fails if any criterion fails.

use std::collections::BTreeMap;
use std::path::{Path, PathBuf};
use std::process::Command;
use std::time::Instant;

use fasat_core::egraph::{EGraph, ENode, Id, Op};
use fasat_core::extract::{cost_of, extract, fa_report, ExtractedDag};
use fasat_core::netlist::gen_csa_multiplier;
use fasat_core::pipeline::{run_pipeline, PipelineConfig};
use fasat_core::rules::{default_rules, verify_rule, Profile};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde_json::Value;

const BIN: &str = env!("CARGO_BIN_EXE_fasat");
const PERTURB_PASSES: &str = "3";
const SEEDS: u64 = 5;

/// Upper-bound column of the published table: bits -> full adders.
const TABLE_II: [(u32, u64); 10] = [
    (8, 48),
    (12, 120),
    (16, 224),
    (20, 360),
    (24, 528),
    (28, 728),
    (32, 960),
    (64, 3968),
    (96, 9024),
    (128, 16128),
];

struct Ctx {
    dir: PathBuf,
}

/// One `fasat run` on a generated (optionally perturbed) multiplier.
struct Run {
    input: PathBuf,
    output: PathBuf,
    report: Value,
    seconds: f64,
}

impl Run {
    fn det(&self) -> &Value {
        &self.report["deterministic"]
    }
    fn exact(&self) -> u64 {
        self.det()["pipeline"]["exact_fa_count"].as_u64().unwrap()
    }
    fn baseline(&self) -> u64 {
        self.det()["baseline"]["exact_fa_count"].as_u64().unwrap()
    }
}

fn fasat(args: &[&str]) -> (i32, String) {
    let out = Command::new(BIN).args(args).output().expect("binary runs");
    let mut text = String::from_utf8_lossy(&out.stdout).into_owned();
    text.push_str(&String::from_utf8_lossy(&out.stderr));
    (out.status.code().unwrap_or(-1), text)
}

fn s(p: &Path) -> &str {
    p.to_str().unwrap()
}

impl Ctx {
    fn generated(&self, bits: u32) -> PathBuf {
        let p = self.dir.join(format!("csa{bits}.aag"));
        if !p.exists() {
            let (code, text) = fasat(&["gen", "csa", "--bits", &bits.to_string(), "--out", s(&p)]);
            assert_eq!(code, 0, "{text}");
        }
        p
    }

    fn perturbed(&self, bits: u32, seed: u64) -> PathBuf {
        let p = self.dir.join(format!("csa{bits}_p{seed}.aag"));
        if !p.exists() {
            let src = self.generated(bits);
            let (code, text) = fasat(&[
                "perturb",
                "--input",
                s(&src),
                "--output",
                s(&p),
                "--seed",
                &seed.to_string(),
                "--passes",
                PERTURB_PASSES,
            ]);
            assert_eq!(code, 0, "{text}");
        }
        p
    }

    fn run(&self, input: &Path, tag: &str) -> Run {
        let output = self.dir.join(format!("{tag}.out.aag"));
        let report = self.dir.join(format!("{tag}.json"));
        let t = Instant::now();
        let (code, text) = fasat(&[
            "run",
            "--input",
            s(input),
            "--output",
            s(&output),
            "--report",
            s(&report),
            "--with-baseline",
        ]);
        let seconds = t.elapsed().as_secs_f64();
        assert_eq!(code, 0, "{text}");
        let report = serde_json::from_str(&std::fs::read_to_string(&report).unwrap()).unwrap();
        Run {
            input: input.to_path_buf(),
            output,
            report,
            seconds,
        }
    }
}

fn expected(n: u32) -> u64 {
    ((n - 1) * (n - 1) - 1) as u64
}

type Verdict = (bool, String);

fn criterion1(ctx: &Ctx, runs: &mut Vec<Run>) -> Verdict {
    let t = Instant::now();
    let mut detail = Vec::new();
    let mut ok = true;
    for n in [3u32, 4, 6, 8, 10, 12] {
        let r = ctx.run(&ctx.generated(n), &format!("c1_{n}"));
        ok &= r.exact() == expected(n);
        detail.push(format!("{n}:{}/{}", r.exact(), expected(n)));
        runs.push(r);
    }
    let secs = t.elapsed().as_secs_f64();
    ok &= secs <= 300.0;
    (ok, format!("{} in {secs:.1}s", detail.join(" ")))
}

fn criterion2() -> Verdict {
    let t = Instant::now();
    let mut ok = true;
    for (bits, fa) in TABLE_II {
        let g = gen_csa_multiplier(bits).unwrap();
        ok &= g.meta.fa_count == fa && expected(bits) == fa;
    }
    let secs = t.elapsed().as_secs_f64();
    (ok && secs < 1.0, format!("{} widths in {secs:.2}s", TABLE_II.len()))
}

fn criterion3(ctx: &Ctx, tag: &str) -> (Verdict, Vec<Run>) {
    let t = Instant::now();
    let mut runs = Vec::new();
    let (mut ge, mut gt, mut floor) = (true, 0, true);
    let mut detail = Vec::new();
    for n in [6u32, 8, 10] {
        for seed in 0..SEEDS {
            let r = ctx.run(&ctx.perturbed(n, seed), &format!("{tag}_{n}_{seed}"));
            ge &= r.exact() >= r.baseline();
            gt += usize::from(r.exact() > r.baseline());
            floor &= r.exact() as f64 >= 0.8 * expected(n) as f64;
            detail.push(format!("{n}/{seed}:{}v{}", r.exact(), r.baseline()));
            runs.push(r);
        }
    }
    let secs = t.elapsed().as_secs_f64();
    let ok = ge && gt * 10 >= runs.len() * 8 && floor && secs <= 1200.0;
    let msg = format!("strictly better {gt}/{} [{}] in {secs:.1}s", runs.len(), detail.join(" "));
    ((ok, msg), runs)
}

fn criterion4(runs: &[&Run]) -> Verdict {
    let mut rules = 0;
    let mut bad_rules = 0;
    for profile in [Profile::Full, Profile::Lightweight] {
        for r in default_rules(profile).directed() {
            rules += 1;
            if !matches!(verify_rule(&r), Ok(Ok(_))) {
                bad_rules += 1;
            }
        }
    }
    let mut bad_runs = 0;
    for r in runs {
        let (code, _) = fasat(&["verify", s(&r.input), s(&r.output)]);
        let proven = r.det()["equivalence"]["verdict"] == "equal";
        if code != 0 || !proven {
            bad_runs += 1;
        }
    }
    (
        bad_rules == 0 && bad_runs == 0,
        format!("{rules} rules, {bad_rules} unsound; {} equivalence checks, {bad_runs} failed", runs.len()),
    )
}

fn criterion5() -> Verdict {
    let mut graphs = 0;
    let mut mismatches = 0;
    for seed in 0..1000u64 {
        let Some((eg, root)) = random_egraph(seed) else {
            continue;
        };
        let dag = extract(&eg, root).unwrap();
        let valid = ExtractedDag::new(dag.root(), dag.choices().clone()).is_ok();
        if !valid || Some(cost_of(&dag)) != brute_force(&eg, root) {
            mismatches += 1;
        }
        graphs += 1;
        if graphs == 60 {
            break;
        }
    }
    (graphs >= 50 && mismatches == 0, format!("{graphs} graphs, {mismatches} mismatches"))
}

fn criterion6() -> Verdict {
    let mut eg = EGraph::new();
    let v: Vec<Id> = (0..4).map(|i| eg.add_node(ENode::leaf(Op::Var(i)))).collect();
    let (_, carry, sum) = adder(&mut eg, [v[0], v[1], v[2]]);
    let p = eg.add(Op::And, &[carry, v[3]]).unwrap();
    let q = eg.add(Op::Or, &[carry, sum]).unwrap();
    let root = eg.add(Op::Roots, &[p, q]).unwrap();
    eg.rebuild();
    let dag = extract(&eg, root).unwrap();
    let shared = cost_of(&dag);
    let mut ok = shared == -1 && fa_report(&dag).exact_fa_count == 1;
    let mut runs = 0;
    for n in [3u32, 4, 6] {
        let out = run_pipeline(&gen_csa_multiplier(n).unwrap().netlist, &PipelineConfig::default()).unwrap();
        ok &= out.report.exact_fa_count as i64 == -cost_of(&out.dag);
        runs += 1;
    }
    (ok, format!("shared FA cost {shared}; report = -cost on {runs} pipeline runs"))
}

fn criterion7(ctx: &Ctx) -> Verdict {
    let mut pts = Vec::new();
    let mut detail = Vec::new();
    let mut ok = true;
    for n in [6u32, 8, 12, 16] {
        let r = ctx.run(&ctx.perturbed(n, 0), &format!("c7_{n}"));
        let nodes = r.det()["input"]["and_nodes"].as_f64().unwrap();
        ok &= r.det()["peak_nodes"].as_u64().unwrap_or(0) > 0;
        if n == 16 {
            ok &= r.seconds <= 1800.0 && r.exact() > 0;
        }
        detail.push(format!("{n}:{nodes}n/{:.2}s", r.seconds));
        pts.push((nodes.ln(), r.seconds.ln()));
    }
    let k = pts.len() as f64;
    let (mx, my) = (pts.iter().map(|p| p.0).sum::<f64>() / k, pts.iter().map(|p| p.1).sum::<f64>() / k);
    let slope = pts.iter().map(|p| (p.0 - mx) * (p.1 - my)).sum::<f64>()
        / pts.iter().map(|p| (p.0 - mx).powi(2)).sum::<f64>();
    (ok && slope < 2.0, format!("slope {slope:.2} [{}]", detail.join(" ")))
}

fn criterion8(first: &[Run], second: &[Run]) -> Verdict {
    let mut same = 0;
    for (a, b) in first.iter().zip(second) {
        let outputs = std::fs::read(&a.output).unwrap() == std::fs::read(&b.output).unwrap();
        if a.report["digest"] == b.report["digest"] && outputs {
            same += 1;
        }
    }
    (
        same == first.len() && first.len() == second.len(),
        format!("{same}/{} identical digests and netlists", first.len()),
    )
}

fn adder(eg: &mut EGraph, t: [Id; 3]) -> (Id, Id, Id) {
    let x = eg.add(Op::Xor3, &t).unwrap();
    let m = eg.add(Op::Maj3, &t).unwrap();
    let fa = eg.add(Op::Fa, &t).unwrap();
    let fst = eg.add(Op::Fst, &[fa]).unwrap();
    let snd = eg.add(Op::Snd, &[fa]).unwrap();
    eg.merge(fst, m);
    eg.merge(snd, x);
    eg.rebuild();
    (eg.find(fa), eg.find(m), eg.find(x))
}

fn random_egraph(seed: u64) -> Option<(EGraph, Id)> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed ^ 0xACCE);
    let mut eg = EGraph::new();
    let mut pool: Vec<Id> = (0..3).map(|i| eg.add_node(ENode::leaf(Op::Var(i)))).collect();
    let mut inner = Vec::new();
    for _ in 0..rng.gen_range(1..=2) {
        let t: Vec<Id> = (0..3).map(|_| pool[rng.gen_range(0..pool.len())]).collect();
        if t[0] == t[1] || t[1] == t[2] || t[0] == t[2] {
            continue;
        }
        let (_, c, x) = adder(&mut eg, [t[0], t[1], t[2]]);
        pool.extend([c, x]);
        inner.extend([c, x]);
    }
    for _ in 0..rng.gen_range(1..=3) {
        let a = pool[rng.gen_range(0..pool.len())];
        let b = pool[rng.gen_range(0..pool.len())];
        let id = match rng.gen_range(0..3) {
            0 => eg.add(Op::Not, &[a]).unwrap(),
            1 => eg.add(Op::And, &[a, b]).unwrap(),
            _ => eg.add(Op::Or, &[a, b]).unwrap(),
        };
        pool.push(id);
        inner.push(id);
    }
    for _ in 0..rng.gen_range(0..=3) {
        let target = inner[rng.gen_range(0..inner.len())];
        let a = pool[rng.gen_range(0..pool.len())];
        let b = pool[rng.gen_range(0..pool.len())];
        let alt = if rng.gen_bool(0.5) {
            eg.add(Op::And, &[a, b]).unwrap()
        } else {
            eg.add(Op::Not, &[a]).unwrap()
        };
        if eg.nodes(eg.find(alt)).iter().any(|n| matches!(n.op, Op::Var(_))) {
            continue;
        }
        eg.merge(target, alt);
        eg.rebuild();
    }
    let outs: Vec<Id> = (0..rng.gen_range(1..=3))
        .map(|_| eg.find(pool[rng.gen_range(3..pool.len())]))
        .collect();
    let root = eg.add(Op::Roots, &outs).unwrap();
    eg.rebuild();
    let has_fa = eg.class_ids().any(|id| eg.nodes(id).iter().any(|n| n.op == Op::Fa));
    let space: f64 = eg.class_ids().map(|id| eg.nodes(id).len() as f64).product();
    (has_fa && eg.class_count() <= 12 && space <= 2e5).then_some((eg, root))
}

/// Best cost over every one-node-per-class choice whose reachable part is
/// acyclic and keeps projections together with their FA node.
fn brute_force(eg: &EGraph, root: Id) -> Option<i64> {
    let ids: Vec<Id> = eg.class_ids().collect();
    let pos: BTreeMap<Id, usize> = ids.iter().enumerate().map(|(i, &c)| (c, i)).collect();
    let nodes: Vec<Vec<ENode>> = ids
        .iter()
        .map(|&c| eg.nodes(c).iter().map(|n| eg.canonical(n)).collect())
        .collect();
    let mut pick = vec![0usize; ids.len()];
    let mut best: Option<i64> = None;
    'outer: loop {
        let node = |c: Id| &nodes[pos[&c]][pick[pos[&c]]];
        // Iterative colouring DFS from the root.
        let mut colour = vec![0u8; ids.len()];
        let mut stack = vec![(eg.find(root), 0usize)];
        colour[pos[&eg.find(root)]] = 1;
        let mut valid = true;
        while let Some(&mut (c, ref mut k)) = stack.last_mut() {
            if let Some(&ch) = node(c).children.get(*k) {
                *k += 1;
                match colour[pos[&ch]] {
                    0 => {
                        colour[pos[&ch]] = 1;
                        stack.push((ch, 0));
                    }
                    1 => {
                        valid = false;
                        break;
                    }
                    _ => {}
                }
            } else {
                colour[pos[&c]] = 2;
                stack.pop();
            }
        }
        if valid {
            let mut used: BTreeMap<Id, u8> = BTreeMap::new();
            for &c in ids.iter().filter(|c| colour[pos[c]] == 2) {
                let n = node(c);
                if matches!(n.op, Op::Fst | Op::Snd) {
                    if node(n.children[0]).op != Op::Fa {
                        valid = false;
                    }
                    *used.entry(n.children[0]).or_default() |= if n.op == Op::Fst { 1 } else { 2 };
                }
            }
            for &c in ids.iter().filter(|c| colour[pos[c]] == 2) {
                if node(c).op == Op::Fa && !used.contains_key(&c) {
                    valid = false;
                }
            }
            if valid {
                let cost = -(used.values().filter(|&&m| m == 3).count() as i64);
                best = Some(best.map_or(cost, |b| b.min(cost)));
            }
        }
        for i in 0..pick.len() {
            pick[i] += 1;
            if pick[i] < nodes[i].len() {
                continue 'outer;
            }
            pick[i] = 0;
        }
        return best;
    }
}

fn main() {
    let tmp = tempfile::tempdir().unwrap();
    let ctx = Ctx {
        dir: tmp.path().to_path_buf(),
    };
    let mut results: Vec<(u32, Verdict)> = Vec::new();
    let mut report = |n: u32, v: Verdict| {
        println!("criterion {n}: {} ({})", if v.0 { "PASS" } else { "FAIL" }, v.1);
        results.push((n, v));
    };

    let mut unperturbed = Vec::new();
    report(1, criterion1(&ctx, &mut unperturbed));
    report(2, criterion2());
    let (v3, matrix) = criterion3(&ctx, "c3a");
    report(3, v3);
    let all: Vec<&Run> = unperturbed.iter().chain(&matrix).collect();
    report(4, criterion4(&all));
    report(5, criterion5());
    report(6, criterion6());
    report(7, criterion7(&ctx));
    let (_, again) = criterion3(&ctx, "c3b");
    report(8, criterion8(&matrix, &again));

    let failed: Vec<u32> = results.iter().filter(|r| !r.1 .0).map(|r| r.0).collect();
    if !failed.is_empty() {
        eprintln!("failed criteria: {failed:?}");
        std::process::exit(1);
    }
}
