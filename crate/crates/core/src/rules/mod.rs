//! Rewrite rules: representation, text format and exhaustive certification.
//!
//! The text format has one rule per line:
//!
//! ```text
//! [r1] and-comm: (and ?a ?b) => (and ?b ?a)
//! [r1] demorgan-and: (not (and ?a ?b)) <=> (or (not ?a) (not ?b))
//! [r1] dneg-intro: ?a => (not (not ?a)) @once
//! ```
//!
//! `<=>` marks a rule applied in both directions; `@once` limits a rule to one
//! application per e-class. Blank lines and `#` comments are ignored.

mod r1;
mod r2;

use std::fmt;

use serde::Serialize;
use thiserror::Error;

use crate::egraph::{EGraphError, Pattern, PatternNode};

pub use r1::build_r1;
pub use r2::{harvest_templates, synthesize_r2, DEFAULT_MAX_GATES};

/// Largest variable count [`verify_rule`] will enumerate.
pub const MAX_VERIFY_VARS: usize = 8;

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum RuleError {
    #[error("line {line}: {message}")]
    Parse { line: usize, message: String },
    #[error(transparent)]
    Pattern(#[from] EGraphError),
    #[error("rule `{0}`: right-hand side uses variables not bound on the left")]
    UnboundVar(String),
    #[error("rule `{name}` has {vars} variables; verification is limited to {MAX_VERIFY_VARS}")]
    TooManyVars { name: String, vars: usize },
    #[error("rule `{name}` is unsound: {counterexample:?}")]
    Unsound {
        name: String,
        counterexample: Counterexample,
    },
    #[error("duplicate rule name `{0}`")]
    Duplicate(String),
    #[error("configuration error: {0}")]
    Config(String),
}

pub type Result<T> = std::result::Result<T, RuleError>;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum Phase {
    R1,
    R2,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Default)]
#[serde(rename_all = "lowercase")]
pub enum Profile {
    #[default]
    Full,
    Lightweight,
}

impl std::str::FromStr for Profile {
    type Err = String;

    fn from_str(s: &str) -> std::result::Result<Self, String> {
        match s {
            "full" => Ok(Profile::Full),
            "lightweight" => Ok(Profile::Lightweight),
            other => Err(format!("unknown profile `{other}`")),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Rule {
    pub name: String,
    pub lhs: Pattern,
    pub rhs: Pattern,
    pub bidirectional: bool,
    pub phase: Phase,
    /// Apply at most once per e-class.
    pub once: bool,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct Certificate {
    pub assignments: u64,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct Counterexample {
    /// Variable name and value.
    pub assignment: Vec<(String, bool)>,
    pub lhs: bool,
    pub rhs: bool,
}

impl Rule {
    pub fn new(phase: Phase, name: &str, lhs: &str, rhs: &str, bidirectional: bool) -> Result<Rule> {
        let lhs = Pattern::parse(lhs)?;
        let rhs = Pattern::parse_with_vars(rhs, lhs.vars().to_vec())?;
        if rhs.vars().len() != lhs.vars().len() {
            return Err(RuleError::UnboundVar(name.to_string()));
        }
        if bidirectional && used_vars(&rhs) != lhs.vars().len() {
            return Err(RuleError::UnboundVar(name.to_string()));
        }
        Ok(Rule {
            name: name.to_string(),
            lhs,
            rhs,
            bidirectional,
            phase,
            once: false,
        })
    }

    pub fn once(mut self) -> Rule {
        self.once = true;
        self
    }

    /// The rule with sides swapped, if it is bidirectional.
    pub fn reversed(&self) -> Option<Rule> {
        if !self.bidirectional {
            return None;
        }
        let rhs_text = self.rhs.to_string();
        let lhs_text = self.lhs.to_string();
        let lhs = Pattern::parse(&rhs_text).ok()?;
        let rhs = Pattern::parse_with_vars(&lhs_text, lhs.vars().to_vec()).ok()?;
        Some(Rule {
            name: format!("{}-rev", self.name),
            lhs,
            rhs,
            bidirectional: false,
            phase: self.phase,
            once: self.once,
        })
    }
}

fn used_vars(p: &Pattern) -> usize {
    let mut seen: Vec<usize> = p
        .nodes()
        .iter()
        .filter_map(|n| match n {
            PatternNode::Var(v) => Some(*v),
            _ => None,
        })
        .collect();
    seen.sort_unstable();
    seen.dedup();
    seen.len()
}

impl fmt::Display for Rule {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let phase = match self.phase {
            Phase::R1 => "r1",
            Phase::R2 => "r2",
        };
        let arrow = if self.bidirectional { "<=>" } else { "=>" };
        write!(f, "[{phase}] {}: {} {arrow} {}", self.name, self.lhs, self.rhs)?;
        if self.once {
            write!(f, " @once")?;
        }
        Ok(())
    }
}

/// Exhaustively compares both sides on every assignment of the variables.
pub fn verify_rule(rule: &Rule) -> Result<std::result::Result<Certificate, Counterexample>> {
    let n = rule.lhs.vars().len();
    if n > MAX_VERIFY_VARS {
        return Err(RuleError::TooManyVars {
            name: rule.name.clone(),
            vars: n,
        });
    }
    let total = 1u64 << n;
    let blocks = total.div_ceil(64);
    for block in 0..blocks {
        let vars: Vec<u64> = (0..n)
            .map(|i| crate::netlist::sim::exhaustive_word(i, block))
            .collect();
        let mask = if total - block * 64 >= 64 {
            !0
        } else {
            (1u64 << (total - block * 64)) - 1
        };
        let l = rule.lhs.eval(&vars);
        let r = rule.rhs.eval(&vars);
        let diff = (l ^ r) & mask;
        if diff != 0 {
            let lane = diff.trailing_zeros();
            return Ok(Err(Counterexample {
                assignment: rule
                    .lhs
                    .vars()
                    .iter()
                    .zip(&vars)
                    .map(|(name, w)| (name.clone(), (w >> lane) & 1 == 1))
                    .collect(),
                lhs: (l >> lane) & 1 == 1,
                rhs: (r >> lane) & 1 == 1,
            }));
        }
    }
    Ok(Ok(Certificate { assignments: total }))
}

#[derive(Debug, Clone, PartialEq, Eq, Default)]
pub struct RuleSet {
    rules: Vec<Rule>,
    pub profile: Profile,
}

impl RuleSet {
    /// Builds a set after checking names are unique and every rule verifies.
    pub fn new(rules: Vec<Rule>, profile: Profile) -> Result<RuleSet> {
        let mut names = std::collections::HashSet::new();
        for r in &rules {
            if !names.insert(r.name.as_str()) {
                return Err(RuleError::Duplicate(r.name.clone()));
            }
            if let Err(cex) = verify_rule(r)? {
                return Err(RuleError::Unsound {
                    name: r.name.clone(),
                    counterexample: cex,
                });
            }
        }
        Ok(RuleSet { rules, profile })
    }

    pub fn rules(&self) -> &[Rule] {
        &self.rules
    }

    pub fn len(&self) -> usize {
        self.rules.len()
    }

    pub fn is_empty(&self) -> bool {
        self.rules.is_empty()
    }

    pub fn phase(&self, phase: Phase) -> RuleSet {
        RuleSet {
            rules: self.rules.iter().filter(|r| r.phase == phase).cloned().collect(),
            profile: self.profile,
        }
    }

    /// Rules in application order, bidirectional ones expanded into both
    /// directions.
    pub fn directed(&self) -> Vec<Rule> {
        let mut out = Vec::new();
        for r in &self.rules {
            let mut fwd = r.clone();
            fwd.bidirectional = false;
            out.push(fwd);
            if let Some(rev) = r.reversed() {
                out.push(rev);
            }
        }
        out
    }

    pub fn to_text(&self) -> String {
        let mut s = String::new();
        for r in &self.rules {
            s.push_str(&r.to_string());
            s.push('\n');
        }
        s
    }

    pub fn parse(text: &str, profile: Profile) -> Result<RuleSet> {
        let mut rules = Vec::new();
        for (i, raw) in text.lines().enumerate() {
            let line = raw.split('#').next().unwrap_or("").trim();
            if line.is_empty() {
                continue;
            }
            let err = |message: &str| RuleError::Parse {
                line: i + 1,
                message: message.to_string(),
            };
            let (phase, rest) = if let Some(r) = line.strip_prefix("[r1]") {
                (Phase::R1, r)
            } else if let Some(r) = line.strip_prefix("[r2]") {
                (Phase::R2, r)
            } else {
                return Err(err("expected `[r1]` or `[r2]`"));
            };
            let (name, body) = rest.split_once(':').ok_or_else(|| err("missing `:` after name"))?;
            let (body, once) = match body.trim().strip_suffix("@once") {
                Some(b) => (b, true),
                None => (body, false),
            };
            let (lhs, rhs, bidi) = if let Some((l, r)) = body.split_once("<=>") {
                (l, r, true)
            } else if let Some((l, r)) = body.split_once("=>") {
                (l, r, false)
            } else {
                return Err(err("missing `=>` or `<=>`"));
            };
            let rule = Rule::new(phase, name.trim(), lhs.trim(), rhs.trim(), bidi).map_err(|e| match e {
                RuleError::Pattern(p) => err(&p.to_string()),
                other => other,
            })?;
            rules.push(if once { rule.once() } else { rule });
        }
        RuleSet::new(rules, profile)
    }
}

/// R1 for `profile` followed by R2 synthesized at the default size bound.
pub fn default_rules(profile: Profile) -> RuleSet {
    let r1 = build_r1(profile);
    let r2 = synthesize_r2(DEFAULT_MAX_GATES).expect("default bound is valid");
    let mut rules = r1.rules;
    rules.extend(r2.rules);
    RuleSet { rules, profile }
}

#[cfg(test)]
mod tests;
