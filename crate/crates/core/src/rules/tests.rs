use super::*;
use crate::egraph::Op;
use crate::egraph::PatternNode;

fn rule(lhs: &str, rhs: &str) -> Rule {
    Rule::new(Phase::R1, "t", lhs, rhs, false).unwrap()
}

/// Truth table of a three-variable pattern, computed one row at a time.
fn table3(p: &Pattern) -> u8 {
    let mut t = 0u8;
    for row in 0..8u8 {
        let vars: Vec<u64> = (0..p.vars().len())
            .map(|i| if (row >> i) & 1 == 1 { !0 } else { 0 })
            .collect();
        if p.eval(&vars) & 1 == 1 {
            t |= 1 << row;
        }
    }
    t
}

#[test]
fn demorgan_certifies_over_four_assignments() {
    let r = rule("(not (and ?a ?b))", "(or (not ?a) (not ?b))");
    assert_eq!(verify_rule(&r).unwrap(), Ok(Certificate { assignments: 4 }));
}

#[test]
fn maj_sop_certifies_over_eight() {
    let r = rule("(or (or (and ?a ?b) (and ?a ?c)) (and ?b ?c))", "(maj3 ?a ?b ?c)");
    assert_eq!(verify_rule(&r).unwrap(), Ok(Certificate { assignments: 8 }));
}

#[test]
fn unsound_rule_gives_counterexample() {
    let r = rule("(or ?a ?b)", "(and ?a ?b)");
    let cex = verify_rule(&r).unwrap().unwrap_err();
    assert_eq!(cex.assignment, vec![("a".to_string(), true), ("b".to_string(), false)]);
    assert!(cex.lhs && !cex.rhs);
    let err = RuleSet::new(vec![r], Profile::Full).unwrap_err();
    assert!(matches!(err, RuleError::Unsound { .. }));
}

#[test]
fn too_many_vars_is_an_error() {
    let lhs = "(and ?a (and ?b (and ?c (and ?d (and ?e (and ?f (and ?g (and ?h ?i))))))))";
    let r = rule(lhs, lhs);
    assert!(matches!(verify_rule(&r), Err(RuleError::TooManyVars { vars: 9, .. })));
}

#[test]
fn unbound_rhs_var_rejected() {
    let e = Rule::new(Phase::R1, "bad", "(and ?a ?b)", "?c", false).unwrap_err();
    assert_eq!(e, RuleError::UnboundVar("bad".into()));
    let e = Rule::new(Phase::R1, "bad", "(and ?a (not ?a))", "0", true).unwrap_err();
    assert_eq!(e, RuleError::UnboundVar("bad".into()));
}

#[test]
fn r1_contents() {
    let full = build_r1(Profile::Full);
    let names: Vec<&str> = full.rules().iter().map(|r| r.name.as_str()).collect();
    for n in ["and-comm", "or-comm", "demorgan-and", "or-consensus", "dneg-intro", "and-over-or"] {
        assert!(names.contains(&n), "{n} missing");
    }
    assert!(full.rules().iter().find(|r| r.name == "dneg-intro").unwrap().once);
    assert!(full.rules().iter().all(|r| r.phase == Phase::R1));
    let directed = full.directed().len();
    assert!((55..=75).contains(&directed), "{directed} directed rules");

    let light = build_r1(Profile::Lightweight);
    assert!(light.len() < full.len());
    for r in light.rules() {
        assert!(full.rules().contains(r), "{} not in full", r.name);
    }
}

#[test]
fn reversed_swaps_sides() {
    let r = Rule::new(Phase::R1, "d", "(not (and ?a ?b))", "(or (not ?a) (not ?b))", true).unwrap();
    let rev = r.reversed().unwrap();
    assert_eq!(rev.name, "d-rev");
    assert_eq!(rev.lhs.to_string(), "(or (not ?a) (not ?b))");
    assert_eq!(rev.rhs.to_string(), "(not (and ?a ?b))");
    assert!(rule("?a", "(not (not ?a))").reversed().is_none());
}

#[test]
fn text_round_trip() {
    let rs = default_rules(Profile::Full);
    let text = rs.to_text();
    let back = RuleSet::parse(&text, Profile::Full).unwrap();
    assert_eq!(back, rs);
}

#[test]
fn parse_comments_and_errors() {
    let rs = RuleSet::parse(
        "# header\n\n[r1] x: (and ?a ?b) => (and ?b ?a)  # trailing\n[r1] y: ?a => (not (not ?a)) @once\n",
        Profile::Full,
    )
    .unwrap();
    assert_eq!(rs.len(), 2);
    assert!(rs.rules()[1].once);

    let cases = [
        ("x: (and ?a ?b) => ?a", 1),
        ("[r1] x (and ?a ?b) => ?a", 1),
        ("\n[r1] x: (and ?a ?b) ?a", 2),
        ("[r1] x: (and ?a => ?a", 1),
        ("[r2] x: (frob ?a) => ?a", 1),
    ];
    for (text, line) in cases {
        match RuleSet::parse(text, Profile::Full) {
            Err(RuleError::Parse { line: l, .. }) => assert_eq!(l, line, "{text}"),
            other => panic!("{text}: {other:?}"),
        }
    }
    let dup = "[r1] x: (and ?a ?b) => (and ?b ?a)\n[r1] x: (or ?a ?b) => (or ?b ?a)";
    assert_eq!(
        RuleSet::parse(dup, Profile::Full).unwrap_err(),
        RuleError::Duplicate("x".into())
    );
}

#[test]
fn r2_bounds() {
    assert!(matches!(synthesize_r2(3), Err(RuleError::Config(_))));
    assert!(matches!(synthesize_r2(13), Err(RuleError::Config(_))));
}

#[test]
fn r2_rules_are_identification_rules() {
    let r2 = synthesize_r2(DEFAULT_MAX_GATES).unwrap();
    let mut xor = 0;
    let mut maj = 0;
    for r in r2.rules() {
        assert_eq!(r.phase, Phase::R2);
        assert_eq!(r.lhs.vars().len(), 3, "{r}");
        for n in r.lhs.nodes() {
            if let PatternNode::Node(op, _) = n {
                assert!(matches!(op, Op::Not | Op::And | Op::Or), "{r}");
            }
        }
        match r.rhs.root_op() {
            Some(Op::Xor3) => {
                xor += 1;
                assert_eq!(table3(&r.lhs), 0x96, "{r}");
            }
            Some(Op::Maj3) => {
                maj += 1;
                assert_eq!(table3(&r.lhs), 0xE8, "{r}");
            }
            other => panic!("unexpected rhs {other:?}"),
        }
    }
    println!("r2: {xor} xor, {maj} maj");
    assert!((60..=120).contains(&xor) && (25..=60).contains(&maj), "{xor} xor, {maj} maj");
    let names: Vec<&str> = r2.rules().iter().map(|r| r.name.as_str()).collect();
    for n in ["maj-sop", "maj-nand", "xor-minterms", "xor-mux-pos"] {
        assert!(names.contains(&n), "{n} missing");
    }
}

/// Shape key independent of the synthesizer: sorted children of and/or,
/// minimised over variable renamings.
fn shape(p: &Pattern, perm: &[usize]) -> String {
    fn go(p: &Pattern, i: usize, perm: &[usize]) -> String {
        match &p.nodes()[i] {
            PatternNode::Var(v) => format!("v{}", perm[*v]),
            PatternNode::Node(op, ch) => {
                let mut parts: Vec<String> = ch.iter().map(|&c| go(p, c, perm)).collect();
                if matches!(op, Op::And | Op::Or) {
                    parts.sort();
                }
                format!("({op} {})", parts.join(" "))
            }
        }
    }
    go(p, p.nodes().len() - 1, perm)
}

#[test]
fn r2_has_no_duplicate_shapes() {
    let r2 = synthesize_r2(DEFAULT_MAX_GATES).unwrap();
    let perms = [[0, 1, 2], [0, 2, 1], [1, 0, 2], [1, 2, 0], [2, 0, 1], [2, 1, 0]];
    let mut seen = std::collections::HashSet::new();
    for r in r2.rules() {
        let key = perms.iter().map(|p| shape(&r.lhs, p)).min().unwrap();
        assert!(seen.insert(key), "duplicate shape {}", r.lhs);
    }
}

#[test]
fn r2_is_cached_and_grows_with_bound() {
    let small = synthesize_r2(6).unwrap();
    let again = synthesize_r2(6).unwrap();
    assert_eq!(small, again);
    let big = synthesize_r2(DEFAULT_MAX_GATES).unwrap();
    assert!(big.len() >= small.len());
}

#[test]
fn harvest_finds_csa_cells() {
    let g = crate::netlist::gen_csa_multiplier(4).unwrap();
    let rules = harvest_templates(&g);
    assert!(!rules.is_empty());
    for r in &rules {
        assert!(verify_rule(r).unwrap().is_ok());
    }
}

