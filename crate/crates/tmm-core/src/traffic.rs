//! Closed-form external-memory traffic for the modeled dataflow and two
//! degenerate baselines, quantifying what the on-chip reuse saves.

use serde::Serialize;

use crate::engine::TrafficReport;

/// How operands move between external memory and the chip.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum DataflowKind {
    /// A loaded once and kept resident; B streamed in column blocks.
    PersistentTiled,
    /// Same blocking, but A is reloaded on every call.
    NoPersistence,
    /// No on-chip reuse at all: every operand element is fetched once per
    /// MAC that consumes it. An idealized worst case that makes reuse
    /// factors well-defined, not a claim about any real CPU.
    UntiledNaive,
}

impl DataflowKind {
    pub const ALL: [DataflowKind; 3] = [
        DataflowKind::PersistentTiled,
        DataflowKind::NoPersistence,
        DataflowKind::UntiledNaive,
    ];

    pub fn name(self) -> &'static str {
        match self {
            DataflowKind::PersistentTiled => "persistent_tiled",
            DataflowKind::NoPersistence => "no_persistence",
            DataflowKind::UntiledNaive => "untiled_naive",
        }
    }
}

/// Analytic traffic for `calls_sharing_a` GEMM calls of shape
/// `(n x k) x (k x m)` that share one A matrix. `block_m` only affects the
/// block counter, never the byte totals.
///
/// For the persistent dataflow the result matches the engine's instrumented
/// [`TrafficReport`] counter for counter.
pub fn traffic_for(
    kind: DataflowKind,
    n: usize,
    k: usize,
    m: usize,
    calls_sharing_a: u64,
    block_m: usize,
) -> TrafficReport {
    assert!(n >= 1 && k >= 1 && m >= 1, "dimensions must be at least 1");
    assert!(calls_sharing_a >= 1, "calls_sharing_a must be at least 1");
    assert!(block_m >= 1, "block_m must be at least 1");
    let (n, k, m) = (n as u64, k as u64, m as u64);
    let calls = calls_sharing_a;
    let blocks_per_call = m.div_ceil(block_m as u64);

    match kind {
        DataflowKind::PersistentTiled => TrafficReport {
            a_bytes_read: n * k,
            b_bytes_read: calls * k * m,
            c_bytes_written: calls * 4 * n * m,
            a_loads: 1,
            b_blocks_streamed: calls * blocks_per_call,
        },
        DataflowKind::NoPersistence => TrafficReport {
            a_bytes_read: calls * n * k,
            b_bytes_read: calls * k * m,
            c_bytes_written: calls * 4 * n * m,
            a_loads: calls,
            b_blocks_streamed: calls * blocks_per_call,
        },
        DataflowKind::UntiledNaive => TrafficReport {
            a_bytes_read: calls * n * k * m,
            b_bytes_read: calls * k * m * n,
            c_bytes_written: calls * 4 * n * m,
            a_loads: calls,
            b_blocks_streamed: 0,
        },
    }
}

/// Total bytes of the no-reuse baseline divided by the given dataflow's
/// total bytes. At least 1.0 for the structured dataflows.
pub fn reuse_factor(
    kind: DataflowKind,
    n: usize,
    k: usize,
    m: usize,
    calls_sharing_a: u64,
    block_m: usize,
) -> f64 {
    let baseline = traffic_for(
        DataflowKind::UntiledNaive,
        n,
        k,
        m,
        calls_sharing_a,
        block_m,
    );
    let own = traffic_for(kind, n, k, m, calls_sharing_a, block_m);
    baseline.total_bytes() as f64 / own.total_bytes() as f64
}
