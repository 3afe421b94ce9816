//! The end-to-end flow: netlist to e-graph, two saturation phases, FA
//! pairing, extraction and lowering, plus an equivalence check of the result.

use std::time::Instant;

use serde::Serialize;
use thiserror::Error;

use crate::egraph::{egraph_from_netlist, semantic_audit, to_dot, AuditError, ENode, Op};
use crate::extract::{dag_to_netlist, extract_guided, fa_report, ExtractError, ExtractedDag, InputMap};
use crate::fa::FaReport;
use crate::netlist::{equiv_check, EquivMode, Netlist, NetlistError, NodeKind, Verdict};
use crate::rules::{build_r1, synthesize_r2, Profile, RuleError, DEFAULT_MAX_GATES};
use crate::saturate::{run_phases, SaturationLimits, SaturationStats};

/// Inputs up to which the final equivalence check is exhaustive.
pub const EXHAUSTIVE_INPUTS: usize = 16;
pub const RANDOM_VECTORS: u64 = 10_000;

#[derive(Debug, Error)]
pub enum PipelineError {
    #[error("invalid limits: {0}")]
    Limits(String),
    #[error(transparent)]
    Rules(#[from] RuleError),
    #[error(transparent)]
    Extract(#[from] ExtractError),
    #[error(transparent)]
    Netlist(#[from] NetlistError),
    #[error("e-graph audit failed: {0}")]
    Audit(#[from] AuditError),
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct PipelineConfig {
    pub limits: SaturationLimits,
    pub profile: Profile,
    /// Seeds the random-vector audit and equivalence check.
    pub seed: u64,
    /// Run the random-simulation audit of every e-class after saturation.
    pub audit: bool,
    /// Keep a DOT rendering of the saturated e-graph.
    #[serde(skip)]
    pub emit_dot: bool,
}

impl Default for PipelineConfig {
    fn default() -> Self {
        PipelineConfig {
            limits: SaturationLimits::default(),
            profile: Profile::Full,
            seed: 0,
            audit: true,
            emit_dot: false,
        }
    }
}

#[derive(Debug, Clone, Default, PartialEq, Serialize)]
pub struct Timings {
    pub saturation: f64,
    pub extraction: f64,
    pub verification: f64,
    pub total: f64,
}

#[derive(Debug, Clone)]
pub struct PipelineOutput {
    pub stats: SaturationStats,
    pub dag: ExtractedDag,
    pub report: FaReport,
    pub netlist: Netlist,
    pub annotation: crate::extract::FaAnnotation,
    pub verdict: Verdict,
    pub timings: Timings,
    pub dot: Option<String>,
}

/// The equivalence mode used against `netlist`.
pub fn check_mode(netlist: &Netlist, seed: u64) -> EquivMode {
    if netlist.inputs().len() <= EXHAUSTIVE_INPUTS {
        EquivMode::Exhaustive
    } else {
        EquivMode::Random {
            vectors: RANDOM_VECTORS,
            seed,
        }
    }
}

pub fn run_pipeline(netlist: &Netlist, config: &PipelineConfig) -> Result<PipelineOutput, PipelineError> {
    config.limits.validate().map_err(PipelineError::Limits)?;
    let start = Instant::now();
    let from = egraph_from_netlist(netlist);
    let mut eg = from.egraph;
    let r1 = build_r1(config.profile);
    let r2 = synthesize_r2(DEFAULT_MAX_GATES)?;
    let (stats, _) = run_phases(&mut eg, &r1, &r2, &config.limits);
    if config.audit {
        semantic_audit(&eg, config.seed)?;
    }
    let dot = config.emit_dot.then(|| to_dot(&eg));
    let saturation = start.elapsed().as_secs_f64();

    let t = Instant::now();
    let preferred: Vec<ENode> = netlist
        .nodes()
        .iter()
        .filter_map(|kind| {
            let m = |c: crate::netlist::NodeId| from.node_map[c.index()];
            match *kind {
                NodeKind::Not(c) => Some(ENode::new(Op::Not, &[m(c)])),
                NodeKind::And(a, b) => Some(ENode::new(Op::And, &[m(a), m(b)])),
                _ => None,
            }
        })
        .collect();
    let dag = extract_guided(&eg, from.root, &preferred)?;
    let report = fa_report(&dag);
    let lowered = dag_to_netlist(&dag, &InputMap::from_netlist(netlist))?;
    let extraction = t.elapsed().as_secs_f64();

    let t = Instant::now();
    let verdict = equiv_check(netlist, &lowered.netlist, check_mode(netlist, config.seed))?;
    let verification = t.elapsed().as_secs_f64();
    Ok(PipelineOutput {
        stats,
        dag,
        report,
        netlist: lowered.netlist,
        annotation: lowered.annotation,
        verdict,
        timings: Timings {
            saturation,
            extraction,
            verification,
            total: start.elapsed().as_secs_f64(),
        },
        dot,
    })
}
