//! Basic Boolean algebra over NOT/AND/OR.

use super::{Phase, Profile, Rule, RuleSet};

/// (name, lhs, rhs, bidirectional, in the lightweight profile)
const R1: &[(&str, &str, &str, bool, bool)] = &[
    ("and-comm", "(and ?a ?b)", "(and ?b ?a)", false, true),
    ("or-comm", "(or ?a ?b)", "(or ?b ?a)", false, true),
    ("and-assoc", "(and ?a (and ?b ?c))", "(and (and ?a ?b) ?c)", true, true),
    ("or-assoc", "(or ?a (or ?b ?c))", "(or (or ?a ?b) ?c)", true, true),
    ("and-over-or", "(and ?a (or ?b ?c))", "(or (and ?a ?b) (and ?a ?c))", true, false),
    ("or-over-and", "(or ?a (and ?b ?c))", "(and (or ?a ?b) (or ?a ?c))", true, false),
    ("and-over-or-right", "(and (or ?b ?c) ?a)", "(or (and ?b ?a) (and ?c ?a))", true, false),
    ("or-over-and-right", "(or (and ?b ?c) ?a)", "(and (or ?b ?a) (or ?c ?a))", true, false),
    ("demorgan-and", "(not (and ?a ?b))", "(or (not ?a) (not ?b))", true, true),
    ("demorgan-or", "(not (or ?a ?b))", "(and (not ?a) (not ?b))", true, true),
    ("or-as-and", "(or ?a ?b)", "(not (and (not ?a) (not ?b)))", true, true),
    ("and-as-or", "(and ?a ?b)", "(not (or (not ?a) (not ?b)))", true, false),
    ("nand-of-nots", "(not (and (not ?a) (not ?b)))", "(or ?a ?b)", false, true),
    ("nor-of-nots", "(not (or (not ?a) (not ?b)))", "(and ?a ?b)", false, false),
    ("and-true", "(and ?a (not 0))", "?a", false, true),
    ("and-true-left", "(and (not 0) ?a)", "?a", false, false),
    ("or-false", "(or ?a 0)", "?a", false, true),
    ("or-false-left", "(or 0 ?a)", "?a", false, false),
    ("and-false", "(and ?a 0)", "0", false, true),
    ("and-false-left", "(and 0 ?a)", "0", false, false),
    ("or-true", "(or ?a (not 0))", "(not 0)", false, true),
    ("or-true-left", "(or (not 0) ?a)", "(not 0)", false, false),
    ("and-idem", "(and ?a ?a)", "?a", false, true),
    ("or-idem", "(or ?a ?a)", "?a", false, true),
    ("and-absorb", "(and ?a (or ?a ?b))", "?a", false, false),
    ("and-absorb-2", "(and ?a (or ?b ?a))", "?a", false, false),
    ("and-absorb-3", "(and (or ?a ?b) ?a)", "?a", false, false),
    ("and-absorb-4", "(and (or ?b ?a) ?a)", "?a", false, false),
    ("or-absorb", "(or ?a (and ?a ?b))", "?a", false, false),
    ("or-absorb-2", "(or ?a (and ?b ?a))", "?a", false, false),
    ("or-absorb-3", "(or (and ?a ?b) ?a)", "?a", false, false),
    ("or-absorb-4", "(or (and ?b ?a) ?a)", "?a", false, false),
    ("and-compl", "(and ?a (not ?a))", "0", false, true),
    ("and-compl-left", "(and (not ?a) ?a)", "0", false, true),
    ("or-compl", "(or ?a (not ?a))", "(not 0)", false, true),
    ("or-compl-left", "(or (not ?a) ?a)", "(not 0)", false, true),
    ("not-false", "(not (not 0))", "0", false, false),
    ("and-neg-absorb", "(and ?a (or (not ?a) ?b))", "(and ?a ?b)", false, false),
    ("or-neg-absorb", "(or ?a (and (not ?a) ?b))", "(or ?a ?b)", false, false),
    (
        "or-consensus",
        "(or (and ?a ?b) (and (not ?a) ?c))",
        "(or (or (and ?a ?b) (and (not ?a) ?c)) (and ?b ?c))",
        false,
        false,
    ),
    (
        "and-consensus",
        "(and (or ?a ?b) (or (not ?a) ?c))",
        "(and (and (or ?a ?b) (or (not ?a) ?c)) (or ?b ?c))",
        false,
        false,
    ),
    ("and-nand-compl", "(and ?a (not (and ?a ?b)))", "(and ?a (not ?b))", true, false),
    ("or-nor-compl", "(or ?a (not (or ?a ?b)))", "(or ?a (not ?b))", true, false),
    (
        "nand-distrib",
        "(and (not (and ?a ?b)) ?c)",
        "(or (and (not ?a) ?c) (and (not ?b) ?c))",
        true,
        false,
    ),
];

pub fn build_r1(profile: Profile) -> RuleSet {
    let mut rules = Vec::new();
    for &(name, lhs, rhs, bidi, light) in R1 {
        if profile == Profile::Lightweight && !light {
            continue;
        }
        rules.push(Rule::new(Phase::R1, name, lhs, rhs, bidi).expect("built-in rule parses"));
    }
    rules.push(
        Rule::new(Phase::R1, "dneg-intro", "?a", "(not (not ?a))", false)
            .expect("built-in rule parses")
            .once(),
    );
    RuleSet::new(rules, profile).expect("built-in rules verify")
}
