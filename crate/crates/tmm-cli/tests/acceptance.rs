//! Acceptance suite: one test per numbered criterion from the project
//! contract (see the Acceptance section of the README). Each test prints a
//! `[PASS]`/`[FAIL]` line; run with `--nocapture` to see them all:
//!
//! ```text
//! cargo test -p tmm-cli --test acceptance -- --nocapture
//! ```
//!
//! Criterion 7 is currently expected to fail; per-tensor max-abs int8
//! quantization of Gaussian operands cannot reach the contracted 0.5%
//! bound (it floors near 1.5%). The test asserts the contract as written
//! rather than a loosened stand-in.

use std::process::Command;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde_json::Value;

use tmm_core::{
    calibrate, dequantize_gemm_output, estimate_cycles, estimate_resources, naive_gemm,
    naive_gemm_f32, qkv_project, quantize, relative_frobenius_error, traffic_for, AcceleratorState,
    DataflowKind, DeviceProfile, F32Matrix, HwParams, Int8Matrix, QuantizedLinear, TileConfig,
};

fn pass(criterion: u32, message: &str) {
    println!("[PASS] criterion {criterion}: {message}");
}

fn fail(criterion: u32, message: &str) -> ! {
    println!("[FAIL] criterion {criterion}: {message}");
    panic!("criterion {criterion} failed: {message}");
}

// -------------------------------------------------------------------------
// 1. Oracle equivalence: tiled output bit-identical to the reference GEMM
//    over 500 randomized trials plus exhaustive tile-boundary corners.
//    Tolerance: zero.
// -------------------------------------------------------------------------
#[test]
fn criterion_1_oracle_equivalence() {
    const TRIALS: u64 = 500;
    const CONFIGS: [(usize, usize); 6] =
        [(8, 32), (8, 256), (16, 32), (16, 256), (32, 32), (32, 256)];

    let mut rng = ChaCha8Rng::seed_from_u64(2024);
    let mut checked = 0u64;

    for trial in 0..TRIALS {
        let (t, block_m) = CONFIGS[(trial % 6) as usize];
        let n = rng.random_range(1..=64usize);
        let k = rng.random_range(1..=768usize);
        let m = rng.random_range(1..=3072usize);
        let a = Int8Matrix::random(n, k, rng.random()).unwrap();
        let b = Int8Matrix::random(k, m, rng.random()).unwrap();

        let mut state =
            AcceleratorState::new(TileConfig::new(t, block_m, 64, 768).unwrap()).unwrap();
        let tiled = state.tiled_gemm(Some(&a), &b, true).unwrap();
        let oracle = naive_gemm(&a, &b).unwrap();
        if tiled != oracle {
            fail(
                1,
                &format!("mismatch at n={n} k={k} m={m} t={t} block_m={block_m} trial={trial}"),
            );
        }
        checked += 1;
    }

    // Exhaustive corners {1, T-1, T, T+1, 2T-1}^3 for every swept tile size.
    for (idx, &(t, block_m)) in [(8, 32), (16, 256), (32, 32)].iter().enumerate() {
        let corners = [1, t - 1, t, t + 1, 2 * t - 1];
        for &n in &corners {
            for &k in &corners {
                for &m in &corners {
                    let seed = (idx * 31 + n * 7 + k * 3 + m) as u64;
                    let a = Int8Matrix::random(n, k, seed).unwrap();
                    let b = Int8Matrix::random(k, m, seed + 1).unwrap();
                    let mut state =
                        AcceleratorState::new(TileConfig::new(t, block_m, 64, 768).unwrap())
                            .unwrap();
                    let tiled = state.tiled_gemm(Some(&a), &b, true).unwrap();
                    if tiled != naive_gemm(&a, &b).unwrap() {
                        fail(1, &format!("corner mismatch at n={n} k={k} m={m} t={t}"));
                    }
                    checked += 1;
                }
            }
        }
    }

    pass(
        1,
        &format!("{checked} tiled GEMMs bit-identical to the reference (500 random + corners)"),
    );
}

// -------------------------------------------------------------------------
// 2. MAC accounting: exact operation counts for the two model workloads.
// -------------------------------------------------------------------------
#[test]
fn criterion_2_mac_accounting() {
    let config = TileConfig::default();
    let hw = HwParams::default();
    let attn = estimate_cycles(64, 768, 768, &config, &hw, true);
    let ffn = estimate_cycles(64, 768, 3072, &config, &hw, true);
    if attn.mac_count != 37_748_736 {
        fail(2, &format!("attn mac_count {} != 37748736", attn.mac_count));
    }
    if ffn.mac_count != 150_994_944 {
        fail(2, &format!("ffn mac_count {} != 150994944", ffn.mac_count));
    }
    pass(
        2,
        "mac counts exactly 37,748,736 (attn) and 150,994,944 (ffn)",
    );
}

// -------------------------------------------------------------------------
// 3. Throughput model: 204.8 GFLOPs peak, 202.7 +/- 0.1 compute-only on the
//    ffn case, serial-total strictly inside (1, 204.8) and monotone in bus
//    width.
// -------------------------------------------------------------------------
#[test]
fn criterion_3_throughput_model() {
    let config = TileConfig::default();
    let hw = HwParams::default();
    let est = estimate_cycles(64, 768, 3072, &config, &hw, true);

    if (est.peak_gflops - 204.8).abs() > 1e-9 {
        fail(3, &format!("peak {} != 204.8", est.peak_gflops));
    }
    if (est.gflops_compute - 202.7).abs() > 0.1 {
        fail(
            3,
            &format!(
                "compute throughput {} outside 202.7 +/- 0.1",
                est.gflops_compute
            ),
        );
    }
    if !(est.gflops_serial > 1.0 && est.gflops_serial < 204.8) {
        fail(
            3,
            &format!(
                "serial throughput {} not strictly inside (1, 204.8)",
                est.gflops_serial
            ),
        );
    }

    let mut last = 0.0;
    for bus in [4u64, 8, 16, 32, 64, 128, 256] {
        let hw = HwParams {
            bus_bytes_per_cycle: bus,
            ..HwParams::default()
        };
        let est = estimate_cycles(64, 768, 3072, &config, &hw, true);
        if est.gflops_serial < last {
            fail(
                3,
                &format!("serial throughput fell when bus widened to {bus}"),
            );
        }
        last = est.gflops_serial;
    }

    pass(
        3,
        &format!(
            "peak 204.8, compute {:.1}, serial {:.1} GFLOPs, monotone in bus width",
            est.gflops_compute, est.gflops_serial
        ),
    );
}

// -------------------------------------------------------------------------
// 4. Buffer arithmetic: 49,152-byte A buffer; full-width B residency is
//    589,824 bytes and infeasible under the 88% BRAM margin, while the
//    256-wide block (196,608 bytes) is feasible.
// -------------------------------------------------------------------------
#[test]
fn criterion_4_buffer_arithmetic() {
    let device = DeviceProfile::default();

    let default_res = estimate_resources(&TileConfig::default(), &device);
    if default_res.a_buffer_bytes != 49_152 {
        fail(
            4,
            &format!("A buffer {} != 49152 bytes", default_res.a_buffer_bytes),
        );
    }
    if default_res.b_block_bytes != 196_608 || !default_res.feasible {
        fail(
            4,
            "block_m=256 configuration should be feasible at 196,608 block bytes",
        );
    }

    let full_b = estimate_resources(&TileConfig::new(32, 768, 64, 768).unwrap(), &device);
    if full_b.b_block_bytes != 589_824 {
        fail(
            4,
            &format!("full-B block {} != 589824 bytes", full_b.b_block_bytes),
        );
    }
    if full_b.feasible {
        fail(
            4,
            "full-B residency must be infeasible under the 88% BRAM margin",
        );
    }

    pass(
        4,
        "A buffer 49,152 B; full-B 589,824 B infeasible at 88% margin; 196,608 B block feasible",
    );
}

// -------------------------------------------------------------------------
// 5. DSE regression: T=32 multiplier count within 2% of the measured 1040
//    DSPs; T=64 infeasible; T=16 feasible with >= 3.9x the T=32 compute
//    cycles at ffn dims.
// -------------------------------------------------------------------------
#[test]
fn criterion_5_dse_regression() {
    let device = DeviceProfile::default();
    let hw = HwParams::default();

    let r32 = estimate_resources(&TileConfig::default(), &device);
    if (r32.dsp_estimate as f64 - 1040.0).abs() / 1040.0 > 0.02 {
        fail(
            5,
            &format!(
                "T=32 dsp estimate {} not within 2% of 1040",
                r32.dsp_estimate
            ),
        );
    }

    let r64 = estimate_resources(&TileConfig::new(64, 256, 64, 768).unwrap(), &device);
    if r64.feasible || r64.dsp_estimate != 4096 {
        fail(
            5,
            "T=64 must be infeasible with 4096 multipliers > 1248 DSPs",
        );
    }

    let r16 = estimate_resources(&TileConfig::new(16, 256, 64, 768).unwrap(), &device);
    if !r16.feasible {
        fail(5, "T=16 must be feasible");
    }
    let c16 = estimate_cycles(
        64,
        768,
        3072,
        &TileConfig::new(16, 256, 64, 768).unwrap(),
        &hw,
        true,
    );
    let c32 = estimate_cycles(64, 768, 3072, &TileConfig::default(), &hw, true);
    let ratio = c16.compute_cycles as f64 / c32.compute_cycles as f64;
    if ratio < 3.9 {
        fail(
            5,
            &format!("T=16/T=32 compute-cycle ratio {ratio:.3} below 3.9"),
        );
    }

    pass(
        5,
        &format!("T=32 -> 1024 DSP (within 2% of 1040), T=64 infeasible, T=16 ratio {ratio:.2}x"),
    );
}

// -------------------------------------------------------------------------
// 6. Persistence: a Q/K/V projection over three 768-wide layers records one
//    A load of 49,152 bytes, and the analytic three-call traffic matches the
//    instrumented counters exactly.
// -------------------------------------------------------------------------
#[test]
fn criterion_6_persistence_traffic() {
    let x = F32Matrix::random(64, 768, 600).unwrap();
    let layers: Vec<QuantizedLinear> = (0..3)
        .map(|i| {
            let w = F32Matrix::random(768, 768, 601 + i).unwrap();
            QuantizedLinear::from_f32(&w, None).unwrap()
        })
        .collect();

    let mut state = AcceleratorState::new(TileConfig::default()).unwrap();
    let result = qkv_project(&x, &layers[0], &layers[1], &layers[2], &mut state).unwrap();

    if result.traffic_delta.a_loads != 1 {
        fail(
            6,
            &format!(
                "{} A loads recorded, expected 1",
                result.traffic_delta.a_loads
            ),
        );
    }
    if result.traffic_delta.a_bytes_read != 49_152 {
        fail(
            6,
            &format!(
                "{} A bytes read, expected 49152",
                result.traffic_delta.a_bytes_read
            ),
        );
    }
    let analytic = traffic_for(DataflowKind::PersistentTiled, 64, 768, 768, 3, 256);
    if analytic != result.traffic_delta {
        fail(
            6,
            &format!(
                "analytic {analytic:?} != instrumented {:?}",
                result.traffic_delta
            ),
        );
    }
    pass(
        6,
        "one 49,152-byte A load; analytic and instrumented traffic agree exactly",
    );
}

// -------------------------------------------------------------------------
// 7. Quantization accuracy: 20 seeded Gaussian trials at (64,768)x(768,768)
//    with relative Frobenius error vs the float GEMM below 0.5% each.
//
//    KNOWN RED: max-abs/127 per-tensor int8 of standard-normal operands has
//    ~1% RMS quantization noise per operand (max |x| is 4-5 sigma), and two
//    quantized operands add in quadrature to ~1.5% GEMM error regardless of
//    seed or K. The bound is asserted as contracted; see the README's
//    acceptance notes.
// -------------------------------------------------------------------------
#[test]
fn criterion_7_quantization_accuracy() {
    let mut errors = Vec::with_capacity(20);
    for trial in 0..20u64 {
        let x = F32Matrix::random(64, 768, 700 + 2 * trial).unwrap();
        let w = F32Matrix::random(768, 768, 701 + 2 * trial).unwrap();
        let qx = calibrate(&x).unwrap();
        let qw = calibrate(&w).unwrap();
        let accum = naive_gemm(&quantize(&x, &qx), &quantize(&w, &qw)).unwrap();
        let approx = dequantize_gemm_output(&accum, &qx, &qw, None).unwrap();
        let reference = naive_gemm_f32(&x, &w).unwrap();
        errors.push(relative_frobenius_error(&approx, &reference).unwrap());
    }
    let worst = errors.iter().cloned().fold(0.0, f64::max);
    println!(
        "criterion 7 measured relative Frobenius errors: min {:.4}, max {:.4}",
        errors.iter().cloned().fold(f64::INFINITY, f64::min),
        worst
    );
    if errors.iter().any(|&e| e >= 0.005) {
        fail(
            7,
            &format!(
                "relative Frobenius error up to {worst:.4} exceeds the contracted 0.5%; \
                 per-tensor max-abs int8 on Gaussian operands floors near 1.5%"
            ),
        );
    }
    pass(7, "all 20 trials below 0.5% relative Frobenius error");
}

// -------------------------------------------------------------------------
// 8. Partial-tile overhead: modeled compute cycles for (63,767,3071) within
//    5% of (64,768,3072) at T=32.
// -------------------------------------------------------------------------
#[test]
fn criterion_8_partial_tile_overhead() {
    let config = TileConfig::default();
    let hw = HwParams::default();
    let full = estimate_cycles(64, 768, 3072, &config, &hw, true);
    let ragged = estimate_cycles(63, 767, 3071, &config, &hw, true);
    let ratio = ragged.compute_cycles as f64 / full.compute_cycles as f64;
    if !(0.95..1.05).contains(&ratio) {
        fail(
            8,
            &format!("compute-cycle ratio {ratio:.4} outside the 5% bound"),
        );
    }
    pass(
        8,
        &format!("ragged/full compute-cycle ratio {ratio:.4} within 5%"),
    );
}

// -------------------------------------------------------------------------
// 9. CLI contract: verify exits 0 on 50 clean trials, 1 under the corrupted
//    engine fixture, and identical seeds yield byte-identical reports
//    excluding wall-time fields.
// -------------------------------------------------------------------------
#[test]
fn criterion_9_cli_contract() {
    let run = |args: &[&str]| {
        Command::new(env!("CARGO_BIN_EXE_tmm"))
            .args(args)
            .output()
            .expect("binary runs")
    };

    let clean = run(&["verify", "--trials", "50", "--seed", "7"]);
    if clean.status.code() != Some(0) {
        fail(
            9,
            &format!("verify --trials 50 exited {:?}", clean.status.code()),
        );
    }

    let fault = run(&["verify", "--trials", "5", "--seed", "7", "--inject-fault"]);
    if fault.status.code() != Some(1) {
        fail(
            9,
            &format!(
                "corrupted-engine fixture exited {:?}, expected 1",
                fault.status.code()
            ),
        );
    }

    let strip = |bytes: &[u8]| -> String {
        let mut v: Value = serde_json::from_slice(bytes).expect("report JSON");
        if let Value::Object(map) = &mut v {
            map.retain(|key, _| !key.starts_with("wall_time"));
        }
        serde_json::to_string(&v).unwrap()
    };
    let first = run(&[
        "gemm", "--n", "33", "--k", "65", "--m", "129", "--seed", "9",
    ]);
    let second = run(&[
        "gemm", "--n", "33", "--k", "65", "--m", "129", "--seed", "9",
    ]);
    if strip(&first.stdout) != strip(&second.stdout) {
        fail(
            9,
            "identical seeds produced different reports outside wall-time fields",
        );
    }

    pass(
        9,
        "verify exit codes 0/1 as contracted; reports deterministic modulo wall time",
    );
}
