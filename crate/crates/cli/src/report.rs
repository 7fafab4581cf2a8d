//! JSON reports written by `run`, `compare` and `project`.
//!
//! Every report carries `schema_version`; values held in Q32.32 are
//! written as decimal reals. Maps are keyed by class name (`ADD_CLASS`,
//! `MUL_CLASS`, ...) and ordered alphabetically, so output is byte-stable.

use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};

use vproc_core::vectorcore::ExecReport;

pub const SCHEMA_VERSION: u32 = 1;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Flags {
    pub overflow: bool,
    pub div_by_zero: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Observed {
    /// Word address of `values[0]`.
    pub start: usize,
    pub values: Vec<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RunReport {
    pub schema_version: u32,
    pub total_cycles: u64,
    pub instr_count: u64,
    pub halted: bool,
    pub flags: Flags,
    pub busy_cycles: BTreeMap<String, u64>,
    pub utilization: BTreeMap<String, f64>,
    pub observe: Observed,
}

impl From<&ExecReport> for RunReport {
    fn from(r: &ExecReport) -> Self {
        Self {
            schema_version: SCHEMA_VERSION,
            total_cycles: r.total_cycles,
            instr_count: r.instr_count,
            halted: r.halted,
            flags: Flags { overflow: r.flags.overflow, div_by_zero: r.flags.div_by_zero },
            busy_cycles: r.busy_cycles.iter().map(|(c, &v)| (c.name().to_string(), v)).collect(),
            utilization: r.utilization.iter().map(|(c, &v)| (c.name().to_string(), v)).collect(),
            observe: Observed { start: r.observe_start, values: r.memory.iter().map(|v| v.to_real()).collect() },
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CompareRow {
    /// `tiled`, `sequential` or `vector`.
    pub architecture: String,
    /// Unit mix for the vector row, absent otherwise.
    #[serde(skip_serializing_if = "Option::is_none")]
    pub mix: Option<String>,
    pub latency_cycles: u64,
    pub slices: u64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CompareRatios {
    pub latency_sequential_over_vector: f64,
    pub slices_vector_over_sequential: f64,
    pub latency_sequential_over_tiled: f64,
    pub slices_tiled_over_sequential: f64,
    pub latency_vector_over_tiled: f64,
    pub slices_tiled_over_vector: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CompareReport {
    pub schema_version: u32,
    pub rows: Vec<CompareRow>,
    pub ratios: CompareRatios,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Throughput {
    pub latency_cycles: u64,
    pub slices: u64,
    pub slices_budget: u64,
    pub cores: u64,
    pub clock_mhz: f64,
    pub calls_per_second: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Speedup {
    pub fraction: f64,
    /// `null` stands for an infinitely fast kernel.
    pub kernel_speedup: Option<f64>,
    pub overall_speedup: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ProjectReport {
    pub schema_version: u32,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub throughput: Option<Throughput>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub amdahl: Option<Speedup>,
}

pub fn to_json<T: Serialize>(value: &T) -> String {
    let mut s = serde_json::to_string_pretty(value).expect("reports serialize");
    s.push('\n');
    s
}
