//! Functional and analytic model of a tiled int8 matrix-multiplication
//! accelerator for transformer Q/K/V projections.
//!
//! The crate has three layers:
//!
//! * exact functional behavior — [`engine`] executes the two-level tiled
//!   int8 GEMM bit-identically to the [`matrix::naive_gemm`] reference,
//!   with a persistent activation buffer and instrumented external-memory
//!   traffic;
//! * analytic models — [`perf`] estimates cycles, latency, throughput, and
//!   device resources for a configuration, and [`traffic`] gives closed-form
//!   data-movement totals for the modeled dataflow and degenerate baselines;
//! * integration — [`quant`] and [`attention`] wrap the engine into a
//!   symmetric-int8 quantized linear layer and a Q/K/V projection pipeline.
//!
//! Matrices, the binary file format, and deterministic generators live in
//! [`matrix`] and [`io`].

pub mod attention;
pub mod engine;
pub mod error;
pub mod io;
pub mod matrix;
pub mod perf;
pub mod quant;
pub mod traffic;

pub use attention::{qkv_project, QkvResult, QuantizedLinear};
pub use engine::{AcceleratorState, TileConfig, TrafficReport};
pub use error::{Error, Result};
pub use matrix::{
    fnv1a64, naive_gemm, naive_gemm_f32, relative_frobenius_error, AnyMatrix, Dtype, F32Matrix,
    Int32Matrix, Int8Matrix, Matrix,
};
pub use perf::{
    dse_sweep, estimate_cycles, estimate_resources, DeviceProfile, DseRow, HwParams, PerfEstimate,
    ResourceEstimate, SweepGrid,
};
pub use quant::{calibrate, dequantize, dequantize_gemm_output, quantize, QuantParams};
pub use traffic::{reuse_factor, traffic_for, DataflowKind};
