//! Adder-block reports shared by the e-graph pipeline and the baseline detector.

use serde::{Deserialize, Serialize};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Detector {
    Pipeline,
    Baseline,
}

/// One full adder. Ids are e-class ids for the pipeline and netlist node ids
/// for the baseline.
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Serialize, Deserialize)]
pub struct FaCell {
    pub inputs: Vec<u32>,
    pub carry: u32,
    pub sum: u32,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct FaReport {
    pub detector: Detector,
    pub exact_fa_count: u64,
    pub distinct_triples: u64,
    /// Baseline only: FAs matched up to NPN equivalence (exact ones included).
    #[serde(skip_serializing_if = "Option::is_none", default)]
    pub npn_fa_count: Option<u64>,
    /// Baseline only.
    #[serde(skip_serializing_if = "Option::is_none", default)]
    pub ha_count: Option<u64>,
    /// Pipeline only: e-nodes in the extracted DAG.
    #[serde(skip_serializing_if = "Option::is_none", default)]
    pub dag_nodes: Option<u64>,
    pub cells: Vec<FaCell>,
}
