//! Full-adder recovery from gate-level multiplier netlists by equality
//! saturation over Boolean e-graphs.

pub mod baseline;
pub mod egraph;
pub mod extract;
pub mod fa;
pub mod netlist;
pub mod pipeline;
pub mod report;
pub mod rules;
pub mod saturate;
