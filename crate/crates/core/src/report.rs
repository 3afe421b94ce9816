//! JSON run reports. Everything reproducible lives in `deterministic`, whose
//! SHA-256 over its serialized form is stored in `digest`; wall-clock data
//! sits outside it.

use serde::Serialize;
use sha2::{Digest, Sha256};

use crate::fa::FaReport;
use crate::netlist::{emit_aiger, EquivMode, Netlist, Verdict};
use crate::pipeline::{PipelineConfig, PipelineOutput, Timings};
use crate::saturate::SaturationStats;

pub const SCHEMA: &str = "fasat-report";
pub const SCHEMA_VERSION: u32 = 1;

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct NetlistSummary {
    pub inputs: usize,
    pub outputs: usize,
    pub and_nodes: usize,
    /// SHA-256 of the ASCII AIGER text.
    pub sha256: String,
}

impl NetlistSummary {
    pub fn of(netlist: &Netlist) -> Self {
        NetlistSummary {
            inputs: netlist.inputs().len(),
            outputs: netlist.outputs().len(),
            and_nodes: netlist.and_count(),
            sha256: hex::encode(Sha256::digest(emit_aiger(netlist))),
        }
    }
}

#[derive(Debug, Clone, Serialize)]
pub struct RunSection {
    pub input: NetlistSummary,
    pub config: PipelineConfig,
    pub saturation: SaturationStats,
    /// Some phase stopped on a node or time limit.
    pub limit_tripped: bool,
    pub peak_nodes: usize,
    pub peak_classes: usize,
    pub pipeline: FaReport,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub baseline: Option<FaReport>,
    pub check: EquivMode,
    pub equivalence: Verdict,
    pub output: NetlistSummary,
}

impl RunSection {
    pub fn new(
        input: &Netlist,
        config: &PipelineConfig,
        out: &PipelineOutput,
        check: EquivMode,
        baseline: Option<FaReport>,
    ) -> Self {
        RunSection {
            input: NetlistSummary::of(input),
            config: config.clone(),
            limit_tripped: out.stats.limit_tripped(),
            peak_nodes: out.stats.peak_nodes,
            peak_classes: out.stats.peak_classes,
            saturation: out.stats.clone(),
            pipeline: out.report.clone(),
            baseline,
            check,
            equivalence: out.verdict.clone(),
            output: NetlistSummary::of(&out.netlist),
        }
    }
}

#[derive(Debug, Clone, Serialize)]
pub struct BaselineSection {
    pub input: NetlistSummary,
    pub baseline: FaReport,
}

#[derive(Debug, Clone, Serialize)]
pub struct Report<T> {
    pub schema: &'static str,
    pub schema_version: u32,
    pub tool_version: &'static str,
    pub deterministic: T,
    /// Hex SHA-256 of `deterministic` as compact JSON with sorted keys.
    pub digest: String,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub timings: Option<Timings>,
}

impl<T: Serialize> Report<T> {
    pub fn new(deterministic: T, timings: Option<Timings>) -> Self {
        let digest = digest(&deterministic);
        Report {
            schema: SCHEMA,
            schema_version: SCHEMA_VERSION,
            tool_version: env!("CARGO_PKG_VERSION"),
            deterministic,
            digest,
            timings,
        }
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("report serializes")
    }
}

pub fn digest<T: Serialize>(value: &T) -> String {
    // Going through `Value` sorts object keys, so readers can re-hash the
    // parsed section.
    let value = serde_json::to_value(value).expect("report serializes");
    let bytes = serde_json::to_vec(&value).expect("report serializes");
    hex::encode(Sha256::digest(bytes))
}
