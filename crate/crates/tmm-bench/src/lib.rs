//! Shared fixtures for the criterion benchmarks.

use tmm_core::{AcceleratorState, Int8Matrix, TileConfig};

/// The two workload shapes the benchmarks exercise.
pub const CASES: [(&str, usize, usize, usize); 2] = [
    ("attn_64x768x768", 64, 768, 768),
    ("ffn_64x768x3072", 64, 768, 3072),
];

pub fn operands(n: usize, k: usize, m: usize) -> (Int8Matrix, Int8Matrix) {
    (
        Int8Matrix::random(n, k, 1).expect("valid dims"),
        Int8Matrix::random(k, m, 2).expect("valid dims"),
    )
}

pub fn device_state(tile_size: usize) -> AcceleratorState {
    let config = TileConfig {
        tile_size,
        ..TileConfig::default()
    };
    AcceleratorState::new(config).expect("valid config")
}
