//! JSON report shapes emitted on stdout. All reports carry `schema: 1`;
//! fields whose names start with `wall_time` are the only ones that vary
//! between identical runs.

use serde::Serialize;
use tmm_core::{DseRow, HwParams, PerfEstimate, TileConfig, TrafficReport};

pub const SCHEMA_VERSION: u32 = 1;

#[derive(Serialize)]
pub struct Dims {
    pub n: usize,
    pub k: usize,
    pub m: usize,
}

/// Report for `gemm` and `bench`.
#[derive(Serialize)]
pub struct RunReport {
    pub schema: u32,
    pub command: String,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub case: Option<String>,
    pub dims: Dims,
    pub config: TileConfig,
    pub hw: HwParams,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub wall_time_trials_seconds: Option<Vec<f64>>,
    pub wall_time_seconds: f64,
    pub checksum_fnv1a64: String,
    pub perf: PerfEstimate,
    pub traffic: TrafficReport,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub passed: Option<bool>,
}

#[derive(Serialize)]
pub struct VerifyFailure {
    pub trial: u64,
    pub n: usize,
    pub k: usize,
    pub m: usize,
    pub t: usize,
    pub block_m: usize,
    pub a_seed: u64,
    pub b_seed: u64,
}

#[derive(Serialize)]
pub struct VerifyReport {
    pub schema: u32,
    pub command: String,
    pub trials: u64,
    pub completed: u64,
    pub passed: bool,
    pub first_failure: Option<VerifyFailure>,
    pub wall_time_seconds: f64,
}

#[derive(Serialize)]
pub struct DseReport {
    pub schema: u32,
    pub command: String,
    pub hw: HwParams,
    pub device: String,
    pub rows: Vec<DseRow>,
}

#[derive(Serialize)]
pub struct TrafficRow {
    pub kind: &'static str,
    pub traffic: TrafficReport,
    pub total_bytes: u64,
    pub reuse_factor: f64,
}

#[derive(Serialize)]
pub struct TrafficComparison {
    pub schema: u32,
    pub command: String,
    pub dims: Dims,
    pub calls_sharing_a: u64,
    pub block_m: usize,
    pub dataflows: Vec<TrafficRow>,
}

#[derive(Serialize)]
pub struct AttnDims {
    pub seq: usize,
    pub hidden: usize,
    pub out_features: usize,
}

#[derive(Serialize)]
pub struct RelativeErrors {
    pub q: f64,
    pub k: f64,
    pub v: f64,
    pub max: f64,
}

#[derive(Serialize)]
pub struct AttnDemoReport {
    pub schema: u32,
    pub command: String,
    pub dims: AttnDims,
    pub config: TileConfig,
    pub wall_time_seconds: f64,
    pub relative_error: RelativeErrors,
    pub error_bound: f64,
    pub a_loads: u64,
    pub traffic: TrafficReport,
    pub passed: bool,
}

/// Render a report as pretty JSON with a trailing newline.
pub fn to_json<T: Serialize>(report: &T) -> String {
    let mut text = serde_json::to_string_pretty(report).expect("report serialization");
    text.push('\n');
    text
}
