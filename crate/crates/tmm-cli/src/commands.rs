//! Subcommand implementations.

use std::fmt;
use std::fs;
use std::io::Write;
use std::path::PathBuf;
use std::time::Instant;

use clap::{Args, ValueEnum};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use tmm_core::{
    dse_sweep, estimate_cycles, fnv1a64, io as matio, naive_gemm, naive_gemm_f32, qkv_project,
    relative_frobenius_error, traffic_for, AcceleratorState, AnyMatrix, DataflowKind,
    DeviceProfile, F32Matrix, HwParams, Int8Matrix, PerfEstimate, QuantizedLinear, SweepGrid,
    TileConfig,
};

use crate::report::{
    self, AttnDemoReport, AttnDims, Dims, DseReport, RelativeErrors, RunReport, TrafficComparison,
    TrafficRow, VerifyFailure, VerifyReport, SCHEMA_VERSION,
};

/// Errors mapped onto the process exit codes.
#[derive(Debug)]
pub enum CliError {
    /// Bad flag combination the parser cannot catch itself (exit 2).
    Usage(String),
    /// File, shape, capacity, or protocol failure (exit 1).
    Runtime(String),
    /// A verification-style command did not meet its pass condition (exit 1).
    Failed(String),
    /// The model violated one of its own invariants (exit 3).
    Internal(String),
}

impl CliError {
    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Usage(_) => 2,
            CliError::Runtime(_) | CliError::Failed(_) => 1,
            CliError::Internal(_) => 3,
        }
    }
}

impl fmt::Display for CliError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            CliError::Usage(msg) => write!(f, "usage: {msg}"),
            CliError::Runtime(msg) => write!(f, "{msg}"),
            CliError::Failed(msg) => write!(f, "{msg}"),
            CliError::Internal(msg) => write!(f, "internal invariant breached: {msg}"),
        }
    }
}

impl From<tmm_core::Error> for CliError {
    fn from(err: tmm_core::Error) -> Self {
        CliError::Runtime(err.to_string())
    }
}

type Result<T> = std::result::Result<T, CliError>;

/// Engine and model knobs shared by most commands.
#[derive(Args, Debug, Clone)]
pub struct EngineOpts {
    /// Tile edge size T (the compute array is T x T)
    #[arg(long = "t", default_value_t = 32, value_parser = clap::value_parser!(u64).range(1..))]
    pub tile_size: u64,

    /// Width of one streamed B column block
    #[arg(long, default_value_t = 256, value_parser = clap::value_parser!(u64).range(1..))]
    pub block_m: u64,

    /// Row capacity of the persistent A buffer
    #[arg(long, default_value_t = 64, value_parser = clap::value_parser!(u64).range(1..))]
    pub max_n: u64,

    /// Column capacity of the persistent A buffer
    #[arg(long, default_value_t = 768, value_parser = clap::value_parser!(u64).range(1..))]
    pub max_k: u64,

    /// Fabric clock in Hz
    #[arg(long, default_value_t = 1e8)]
    pub clock_hz: f64,

    /// External-bus bytes per clock cycle
    #[arg(long = "bus-bytes", default_value_t = 16, value_parser = clap::value_parser!(u64).range(1..))]
    pub bus_bytes: u64,

    /// Pipeline fill/drain cycles per output tile
    #[arg(long, default_value_t = 8)]
    pub fill: u64,
}

impl EngineOpts {
    fn tile_config(&self) -> Result<TileConfig> {
        TileConfig::new(
            self.tile_size as usize,
            self.block_m as usize,
            self.max_n as usize,
            self.max_k as usize,
        )
        .map_err(|e| CliError::Usage(e.to_string()))
    }

    fn hw(&self) -> Result<HwParams> {
        let hw = HwParams {
            clock_hz: self.clock_hz,
            bus_bytes_per_cycle: self.bus_bytes,
            pipeline_fill: self.fill,
        };
        hw.validate().map_err(|e| CliError::Usage(e.to_string()))?;
        Ok(hw)
    }
}

/// Write `text` to `--out FILE` when given, else to stdout.
fn emit(text: &str, out: Option<&PathBuf>) -> Result<()> {
    match out {
        Some(path) => fs::write(path, text)
            .map_err(|e| CliError::Runtime(format!("cannot write {}: {e}", path.display()))),
        None => std::io::stdout()
            .write_all(text.as_bytes())
            .map_err(|e| CliError::Runtime(format!("cannot write stdout: {e}"))),
    }
}

/// Cheap self-checks on a fresh estimate; a violation means the model code
/// itself is broken, not the user's input.
fn check_estimate(est: &PerfEstimate) -> Result<()> {
    let floor = est.mac_count.div_ceil(est.macs_per_cycle);
    if est.compute_cycles < floor {
        return Err(CliError::Internal(format!(
            "compute_cycles {} below the MAC-array floor {floor}",
            est.compute_cycles
        )));
    }
    if est.total_cycles_overlapped > est.total_cycles_serial {
        return Err(CliError::Internal(
            "overlapped total exceeds serial total".into(),
        ));
    }
    if est.gflops_compute > est.peak_gflops * (1.0 + 1e-9) {
        return Err(CliError::Internal(format!(
            "compute throughput {} exceeds peak {}",
            est.gflops_compute, est.peak_gflops
        )));
    }
    Ok(())
}

fn checksum_hex(bytes: &[u8]) -> String {
    format!("{:016x}", fnv1a64(bytes))
}

// ---------------------------------------------------------------------------
// gemm
// ---------------------------------------------------------------------------

#[derive(Args, Debug)]
pub struct GemmArgs {
    /// Rows of A (random-operand mode)
    #[arg(long, value_parser = clap::value_parser!(u64).range(1..))]
    n: Option<u64>,
    /// Columns of A / rows of B (random-operand mode)
    #[arg(long, value_parser = clap::value_parser!(u64).range(1..))]
    k: Option<u64>,
    /// Columns of B (random-operand mode)
    #[arg(long, value_parser = clap::value_parser!(u64).range(1..))]
    m: Option<u64>,
    /// Seed for random operands: A uses SEED, B uses SEED+1
    #[arg(long, default_value_t = 0)]
    seed: u64,
    /// Read operand A from an int8 matrix file
    #[arg(long)]
    a: Option<PathBuf>,
    /// Read operand B from an int8 matrix file
    #[arg(long)]
    b: Option<PathBuf>,
    /// Write the int32 result to a matrix file
    #[arg(long)]
    out: Option<PathBuf>,
    #[command(flatten)]
    engine: EngineOpts,
}

fn load_int8(path: &PathBuf, role: &str) -> Result<Int8Matrix> {
    match matio::read_matrix_file(path)? {
        AnyMatrix::Int8(m) => Ok(m),
        other => Err(CliError::Runtime(format!(
            "operand {role} in {} must be int8, found {}",
            path.display(),
            other.dtype().name()
        ))),
    }
}

pub fn gemm(args: GemmArgs) -> Result<()> {
    let (a, b) = match (&args.a, &args.b, args.n, args.k, args.m) {
        (Some(a_path), Some(b_path), None, None, None) => {
            (load_int8(a_path, "A")?, load_int8(b_path, "B")?)
        }
        (None, None, Some(n), Some(k), Some(m)) => (
            Int8Matrix::random(n as usize, k as usize, args.seed)?,
            Int8Matrix::random(k as usize, m as usize, args.seed.wrapping_add(1))?,
        ),
        _ => {
            return Err(CliError::Usage(
                "provide either --a FILE --b FILE or all of --n --k --m".into(),
            ))
        }
    };

    let (n, k) = a.shape();
    let m = b.cols();
    let config = args.engine.tile_config()?;
    let hw = args.engine.hw()?;

    let mut state = AcceleratorState::new(config)?;
    let start = Instant::now();
    let c = state.tiled_gemm(Some(&a), &b, true)?;
    let wall_time_seconds = start.elapsed().as_secs_f64();

    let perf = estimate_cycles(n, k, m, &config, &hw, true);
    check_estimate(&perf)?;

    if let Some(path) = &args.out {
        matio::write_matrix_file(path, &c)?;
    }

    let report = RunReport {
        schema: SCHEMA_VERSION,
        command: "gemm".into(),
        case: None,
        dims: Dims { n, k, m },
        config,
        hw,
        wall_time_trials_seconds: None,
        wall_time_seconds,
        checksum_fnv1a64: checksum_hex(&c.to_le_bytes()),
        perf,
        traffic: *state.traffic(),
        passed: None,
    };
    emit(&report::to_json(&report), None)
}

// ---------------------------------------------------------------------------
// verify
// ---------------------------------------------------------------------------

#[derive(Args, Debug)]
pub struct VerifyArgs {
    /// Number of randomized trials
    #[arg(long, value_parser = clap::value_parser!(u64).range(1..))]
    trials: u64,
    /// Seed for the trial generator
    #[arg(long, default_value_t = 0)]
    seed: u64,
    /// Pin the tile size instead of rotating through {8, 16, 32}
    #[arg(long = "t", value_parser = clap::value_parser!(u64).range(1..))]
    tile_size: Option<u64>,
    /// Pin the block width instead of rotating through {32, 256}
    #[arg(long, value_parser = clap::value_parser!(u64).range(1..))]
    block_m: Option<u64>,
    /// Largest sampled N (also the A-buffer row capacity)
    #[arg(long, default_value_t = 64, value_parser = clap::value_parser!(u64).range(1..))]
    max_n: u64,
    /// Largest sampled K (also the A-buffer column capacity)
    #[arg(long, default_value_t = 768, value_parser = clap::value_parser!(u64).range(1..))]
    max_k: u64,
    /// Largest sampled M
    #[arg(long, default_value_t = 3072, value_parser = clap::value_parser!(u64).range(1..))]
    max_m: u64,
    /// Write the JSON report to a file instead of stdout
    #[arg(long)]
    out: Option<PathBuf>,
    /// Test fixture: corrupt one output element per trial so every
    /// comparison fails.
    #[arg(long, hide = true)]
    inject_fault: bool,
}

/// Dims that force partial tiles on every axis for tile size `t`.
fn boundary_dims(t: usize, max_n: usize, max_k: usize, max_m: usize) -> Vec<(usize, usize, usize)> {
    let clamp = |v: usize, hi: usize| v.clamp(1, hi);
    [
        (1, 1, 1),
        (t - 1, t - 1, t - 1),
        (t, t, t),
        (t + 1, t + 1, t + 1),
        (2 * t - 1, 2 * t - 1, 2 * t - 1),
        (1, t, 2 * t + 1),
        (t + 1, 2 * t - 1, t.saturating_sub(1)),
        (max_n, max_k, max_m),
    ]
    .iter()
    .map(|&(n, k, m)| (clamp(n, max_n), clamp(k, max_k), clamp(m, max_m)))
    .collect()
}

pub fn verify(args: VerifyArgs) -> Result<()> {
    const CONFIG_ROTATION: [(u64, u64); 6] =
        [(8, 32), (8, 256), (16, 32), (16, 256), (32, 32), (32, 256)];

    let (max_n, max_k, max_m) = (
        args.max_n as usize,
        args.max_k as usize,
        args.max_m as usize,
    );
    let mut rng = ChaCha8Rng::seed_from_u64(args.seed);
    let start = Instant::now();
    let mut first_failure = None;
    let mut completed = 0u64;

    for trial in 0..args.trials {
        let (rot_t, rot_bm) = CONFIG_ROTATION[(trial % 6) as usize];
        let t = args.tile_size.unwrap_or(rot_t) as usize;
        let block_m = args.block_m.unwrap_or(rot_bm) as usize;

        let boundary = boundary_dims(t, max_n, max_k, max_m);
        let (n, k, m) = if (trial as usize) < boundary.len() {
            boundary[trial as usize]
        } else {
            (
                rng.random_range(1..=max_n),
                rng.random_range(1..=max_k),
                rng.random_range(1..=max_m),
            )
        };
        let a_seed: u64 = rng.random();
        let b_seed: u64 = rng.random();

        let a = Int8Matrix::random(n, k, a_seed)?;
        let b = Int8Matrix::random(k, m, b_seed)?;
        let config = TileConfig::new(t, block_m, max_n, max_k)
            .map_err(|e| CliError::Usage(e.to_string()))?;
        let mut state = AcceleratorState::new(config)?;

        let mut tiled = state.tiled_gemm(Some(&a), &b, true)?;
        if args.inject_fault {
            let mut data = tiled.data().to_vec();
            data[0] = data[0].wrapping_add(1);
            tiled = tmm_core::Int32Matrix::from_vec(tiled.rows(), tiled.cols(), data)?;
        }
        let expected = naive_gemm(&a, &b)?;
        let ok = tiled == expected;
        completed += 1;
        eprintln!(
            "trial {trial:4}: n={n:4} k={k:4} m={m:4} t={t:2} block_m={block_m:3} {}",
            if ok { "ok" } else { "MISMATCH" }
        );
        if !ok {
            first_failure = Some(VerifyFailure {
                trial,
                n,
                k,
                m,
                t,
                block_m,
                a_seed,
                b_seed,
            });
            break;
        }
    }

    let passed = first_failure.is_none();
    let report = VerifyReport {
        schema: SCHEMA_VERSION,
        command: "verify".into(),
        trials: args.trials,
        completed,
        passed,
        first_failure,
        wall_time_seconds: start.elapsed().as_secs_f64(),
    };
    emit(&report::to_json(&report), args.out.as_ref())?;
    if passed {
        Ok(())
    } else {
        Err(CliError::Failed(
            "tiled output diverged from the reference GEMM".into(),
        ))
    }
}

// ---------------------------------------------------------------------------
// bench
// ---------------------------------------------------------------------------

#[derive(Clone, Copy, Debug, ValueEnum)]
pub enum BenchCase {
    /// Attention projection dims: (64, 768) x (768, 768)
    Attn,
    /// Feed-forward dims: (64, 768) x (768, 3072)
    Ffn,
}

impl BenchCase {
    fn dims(self) -> (usize, usize, usize) {
        match self {
            BenchCase::Attn => (64, 768, 768),
            BenchCase::Ffn => (64, 768, 3072),
        }
    }

    fn name(self) -> &'static str {
        match self {
            BenchCase::Attn => "attn",
            BenchCase::Ffn => "ffn",
        }
    }
}

#[derive(Args, Debug)]
pub struct BenchArgs {
    /// Workload case to run
    #[arg(long, value_enum)]
    case: BenchCase,
    /// Host timing repetitions (the report carries the median)
    #[arg(long, default_value_t = 3, value_parser = clap::value_parser!(u64).range(1..))]
    trials: u64,
    /// Seed for the operands: A uses SEED, B uses SEED+1
    #[arg(long, default_value_t = 0)]
    seed: u64,
    /// Write the JSON report to a file instead of stdout
    #[arg(long)]
    out: Option<PathBuf>,
    #[command(flatten)]
    engine: EngineOpts,
}

fn median(samples: &mut [f64]) -> f64 {
    samples.sort_by(|a, b| a.partial_cmp(b).expect("finite wall times"));
    let mid = samples.len() / 2;
    if samples.len() % 2 == 1 {
        samples[mid]
    } else {
        (samples[mid - 1] + samples[mid]) / 2.0
    }
}

pub fn bench(args: BenchArgs) -> Result<()> {
    let (n, k, m) = args.case.dims();
    let config = args.engine.tile_config()?;
    let hw = args.engine.hw()?;

    let a = Int8Matrix::random(n, k, args.seed)?;
    let b = Int8Matrix::random(k, m, args.seed.wrapping_add(1))?;

    let mut wall_times = Vec::with_capacity(args.trials as usize);
    let mut checksum = String::new();
    let mut traffic = tmm_core::TrafficReport::default();
    for _ in 0..args.trials {
        let mut state = AcceleratorState::new(config)?;
        let start = Instant::now();
        let c = state.tiled_gemm(Some(&a), &b, true)?;
        wall_times.push(start.elapsed().as_secs_f64());
        checksum = checksum_hex(&c.to_le_bytes());
        traffic = *state.traffic();
    }

    let perf = estimate_cycles(n, k, m, &config, &hw, true);
    check_estimate(&perf)?;

    let report = RunReport {
        schema: SCHEMA_VERSION,
        command: "bench".into(),
        case: Some(args.case.name().into()),
        dims: Dims { n, k, m },
        config,
        hw,
        wall_time_seconds: median(&mut wall_times.clone()),
        wall_time_trials_seconds: Some(wall_times),
        checksum_fnv1a64: checksum,
        perf,
        traffic,
        passed: None,
    };
    // One report per case run, list-shaped for downstream tooling.
    emit(&report::to_json(&[report]), args.out.as_ref())
}

// ---------------------------------------------------------------------------
// dse
// ---------------------------------------------------------------------------

fn parse_dims(text: &str) -> std::result::Result<(usize, usize, usize), String> {
    let parts: Vec<_> = text.split(',').collect();
    if parts.len() != 3 {
        return Err(format!("expected N,K,M, got '{text}'"));
    }
    let parse = |s: &str| -> std::result::Result<usize, String> {
        let v = s.trim().parse::<usize>().map_err(|e| e.to_string())?;
        if v == 0 {
            return Err("dimensions must be at least 1".into());
        }
        Ok(v)
    };
    Ok((parse(parts[0])?, parse(parts[1])?, parse(parts[2])?))
}

#[derive(Args, Debug)]
pub struct DseArgs {
    /// Tile sizes to sweep, comma separated
    #[arg(long = "t", value_delimiter = ',', default_values_t = [16u64, 32, 64])]
    tile_sizes: Vec<u64>,
    /// Block widths to sweep, comma separated
    #[arg(long, value_delimiter = ',', default_values_t = [256u64])]
    block_m: Vec<u64>,
    /// Problem dims as N,K,M; repeat the flag for several
    #[arg(long, value_parser = parse_dims, default_values = ["64,768,3072"])]
    dims: Vec<(usize, usize, usize)>,
    /// A-buffer row capacity used for the BRAM estimate
    #[arg(long, default_value_t = 64, value_parser = clap::value_parser!(u64).range(1..))]
    max_n: u64,
    /// A-buffer column capacity used for the BRAM estimate
    #[arg(long, default_value_t = 768, value_parser = clap::value_parser!(u64).range(1..))]
    max_k: u64,
    /// Fabric clock in Hz
    #[arg(long, default_value_t = 1e8)]
    clock_hz: f64,
    /// External-bus bytes per clock cycle
    #[arg(long = "bus-bytes", default_value_t = 16, value_parser = clap::value_parser!(u64).range(1..))]
    bus_bytes: u64,
    /// Pipeline fill/drain cycles per output tile
    #[arg(long, default_value_t = 8)]
    fill: u64,
    /// Emit CSV instead of JSON
    #[arg(long)]
    csv: bool,
    /// Emit JSON (the default)
    #[arg(long, conflicts_with = "csv")]
    json: bool,
    /// Write the table to a file instead of stdout
    #[arg(long)]
    out: Option<PathBuf>,
}

pub fn dse(args: DseArgs) -> Result<()> {
    if args.tile_sizes.is_empty() || args.block_m.is_empty() || args.dims.is_empty() {
        return Err(CliError::Usage(
            "sweep axes --t, --block-m, and --dims must be non-empty".into(),
        ));
    }
    if args.tile_sizes.contains(&0) || args.block_m.contains(&0) {
        return Err(CliError::Usage("sweep values must be at least 1".into()));
    }
    let hw = HwParams {
        clock_hz: args.clock_hz,
        bus_bytes_per_cycle: args.bus_bytes,
        pipeline_fill: args.fill,
    };
    hw.validate().map_err(|e| CliError::Usage(e.to_string()))?;
    let device = DeviceProfile::default();
    let grid = SweepGrid {
        dims: args.dims.clone(),
        tile_sizes: args.tile_sizes.iter().map(|&t| t as usize).collect(),
        block_ms: args.block_m.iter().map(|&b| b as usize).collect(),
        max_n: args.max_n as usize,
        max_k: args.max_k as usize,
    };
    let rows = dse_sweep(&grid, &hw, &device).map_err(|e| CliError::Usage(e.to_string()))?;

    let text = if args.csv {
        tmm_core::perf::dse_rows_to_csv(&rows)
    } else {
        report::to_json(&DseReport {
            schema: SCHEMA_VERSION,
            command: "dse".into(),
            hw,
            device: device.name.clone(),
            rows,
        })
    };
    emit(&text, args.out.as_ref())
}

// ---------------------------------------------------------------------------
// traffic
// ---------------------------------------------------------------------------

#[derive(Args, Debug)]
pub struct TrafficArgs {
    /// Rows of A
    #[arg(long, default_value_t = 64, value_parser = clap::value_parser!(u64).range(1..))]
    n: u64,
    /// Columns of A / rows of B
    #[arg(long, default_value_t = 768, value_parser = clap::value_parser!(u64).range(1..))]
    k: u64,
    /// Columns of B
    #[arg(long, default_value_t = 768, value_parser = clap::value_parser!(u64).range(1..))]
    m: u64,
    /// Number of calls sharing one A matrix
    #[arg(long, default_value_t = 1, value_parser = clap::value_parser!(u64).range(1..))]
    calls: u64,
    /// Block width for the block-stream counter
    #[arg(long, default_value_t = 256, value_parser = clap::value_parser!(u64).range(1..))]
    block_m: u64,
    /// Emit CSV instead of JSON
    #[arg(long)]
    csv: bool,
    /// Emit JSON (the default)
    #[arg(long, conflicts_with = "csv")]
    json: bool,
    /// Write the report to a file instead of stdout
    #[arg(long)]
    out: Option<PathBuf>,
}

pub fn traffic(args: TrafficArgs) -> Result<()> {
    let (n, k, m) = (args.n as usize, args.k as usize, args.m as usize);
    let block_m = args.block_m as usize;

    let rows: Vec<TrafficRow> = DataflowKind::ALL
        .iter()
        .map(|&kind| {
            let t = traffic_for(kind, n, k, m, args.calls, block_m);
            TrafficRow {
                kind: kind.name(),
                total_bytes: t.total_bytes(),
                reuse_factor: tmm_core::reuse_factor(kind, n, k, m, args.calls, block_m),
                traffic: t,
            }
        })
        .collect();

    let text = if args.csv {
        let mut out = String::from(
            "kind,a_bytes_read,b_bytes_read,c_bytes_written,a_loads,b_blocks_streamed,total_bytes,reuse_factor\n",
        );
        for row in &rows {
            out.push_str(&format!(
                "{},{},{},{},{},{},{},{}\n",
                row.kind,
                row.traffic.a_bytes_read,
                row.traffic.b_bytes_read,
                row.traffic.c_bytes_written,
                row.traffic.a_loads,
                row.traffic.b_blocks_streamed,
                row.total_bytes,
                row.reuse_factor
            ));
        }
        out
    } else {
        report::to_json(&TrafficComparison {
            schema: SCHEMA_VERSION,
            command: "traffic".into(),
            dims: Dims { n, k, m },
            calls_sharing_a: args.calls,
            block_m,
            dataflows: rows,
        })
    };
    emit(&text, args.out.as_ref())
}

// ---------------------------------------------------------------------------
// attn-demo
// ---------------------------------------------------------------------------

#[derive(Args, Debug)]
pub struct AttnDemoArgs {
    /// Sequence length (rows of the activation)
    #[arg(long, default_value_t = 64, value_parser = clap::value_parser!(u64).range(1..))]
    seq: u64,
    /// Hidden width (columns of the activation)
    #[arg(long, default_value_t = 768, value_parser = clap::value_parser!(u64).range(1..))]
    hidden: u64,
    /// Output features of each projection
    #[arg(long, default_value_t = 768, value_parser = clap::value_parser!(u64).range(1..))]
    out_features: u64,
    /// Seed; activation and the three weight/bias sets derive from it
    #[arg(long, default_value_t = 0)]
    seed: u64,
    /// Pass threshold on the max relative Frobenius error vs the float
    /// reference. Per-tensor int8 on Gaussian data floors near 1.5%.
    #[arg(long, default_value_t = 0.02)]
    error_bound: f64,
    /// Write the JSON report to a file instead of stdout
    #[arg(long)]
    out: Option<PathBuf>,
    #[command(flatten)]
    engine: EngineOpts,
}

pub fn attn_demo(args: AttnDemoArgs) -> Result<()> {
    let (seq, hidden, out_features) = (
        args.seq as usize,
        args.hidden as usize,
        args.out_features as usize,
    );
    let config = args.engine.tile_config()?;

    let x = F32Matrix::random(seq, hidden, args.seed)?;
    let mut weights = Vec::with_capacity(3);
    let mut layers = Vec::with_capacity(3);
    for i in 0..3u64 {
        let w = F32Matrix::random(hidden, out_features, args.seed.wrapping_add(1 + i))?;
        let bias = F32Matrix::random(1, out_features, args.seed.wrapping_add(4 + i))?
            .data()
            .to_vec();
        layers.push(QuantizedLinear::from_f32(&w, Some(bias.clone()))?);
        weights.push((w, bias));
    }

    let mut state = AcceleratorState::new(config)?;
    let start = Instant::now();
    let result = qkv_project(&x, &layers[0], &layers[1], &layers[2], &mut state)?;
    let wall_time_seconds = start.elapsed().as_secs_f64();

    let mut errors = [0f64; 3];
    for (i, output) in [&result.q, &result.k, &result.v].iter().enumerate() {
        let (w, bias) = &weights[i];
        let product = naive_gemm_f32(&x, w)?;
        let with_bias: Vec<f32> = product
            .data()
            .iter()
            .enumerate()
            .map(|(idx, &v)| v + bias[idx % out_features])
            .collect();
        let reference = F32Matrix::from_vec(seq, out_features, with_bias)?;
        errors[i] = relative_frobenius_error(output, &reference)?;
    }
    let max_error = errors.iter().cloned().fold(0f64, f64::max);
    let a_loads = result.traffic_delta.a_loads;
    let passed = a_loads == 1 && max_error < args.error_bound;

    let report = AttnDemoReport {
        schema: SCHEMA_VERSION,
        command: "attn-demo".into(),
        dims: AttnDims {
            seq,
            hidden,
            out_features,
        },
        config,
        wall_time_seconds,
        relative_error: RelativeErrors {
            q: errors[0],
            k: errors[1],
            v: errors[2],
            max: max_error,
        },
        error_bound: args.error_bound,
        a_loads,
        traffic: result.traffic_delta,
        passed,
    };
    emit(&report::to_json(&report), args.out.as_ref())?;
    if passed {
        Ok(())
    } else {
        Err(CliError::Failed(format!(
            "projection check failed: max relative error {max_error:.6}, bound {}, a_loads {a_loads}",
            args.error_bound
        )))
    }
}
