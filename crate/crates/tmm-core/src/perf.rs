//! Analytic cycle, latency, throughput, and resource estimation.
//!
//! The compute model assumes a `T x T` multiplier array that retires `T*T`
//! int8 MACs per clock: each output tile pipelines its K-long accumulation
//! at one iteration per cycle plus a constant pipeline fill, giving
//!
//! ```text
//! compute_cycles = ceil(N/T) * ceil(M/T) * (K + pipeline_fill)
//! ```
//!
//! Transfers are modeled as a flat bus moving `bus_bytes_per_cycle` per
//! clock. The serial total (load A, load B, compute, store C back to back)
//! is the default reported latency; the overlapped total, which overlaps
//! compute with the B stream, exists to quantify what double buffering
//! would buy. One MAC counts as two FLOPs throughout.

use serde::Serialize;

use crate::engine::TileConfig;
use crate::error::{Error, Result};

/// Bytes per on-chip RAM block (36 Kbit).
pub const BRAM_BLOCK_BYTES: u64 = 4608;

/// Clock, bus, and pipeline knobs of the modeled device.
#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct HwParams {
    /// Fabric clock in Hz.
    pub clock_hz: f64,
    /// External-bus payload per clock cycle.
    pub bus_bytes_per_cycle: u64,
    /// Fill/drain cycles added to each pipelined accumulation.
    pub pipeline_fill: u64,
}

impl Default for HwParams {
    fn default() -> Self {
        Self {
            clock_hz: 100e6,
            bus_bytes_per_cycle: 16,
            pipeline_fill: 8,
        }
    }
}

impl HwParams {
    pub fn validate(&self) -> Result<()> {
        if !(self.clock_hz.is_finite() && self.clock_hz > 0.0) {
            return Err(Error::Config(format!(
                "clock_hz must be positive, got {}",
                self.clock_hz
            )));
        }
        if self.bus_bytes_per_cycle == 0 {
            return Err(Error::Config(
                "bus_bytes_per_cycle must be at least 1".into(),
            ));
        }
        Ok(())
    }
}

/// MACs retired per cycle by a `t x t` array.
pub fn macs_per_cycle(tile_size: usize) -> u64 {
    (tile_size * tile_size) as u64
}

/// Modeled cycles, latencies, and throughputs for one GEMM call.
#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct PerfEstimate {
    pub mac_count: u64,
    pub macs_per_cycle: u64,
    /// Hard compute ceiling of the array: `2 * T^2 * clock / 1e9` GFLOPs.
    pub peak_gflops: f64,
    pub compute_cycles: u64,
    pub a_load_cycles: u64,
    pub b_load_cycles: u64,
    pub c_store_cycles: u64,
    pub total_cycles_serial: u64,
    pub total_cycles_overlapped: u64,
    pub latency_compute_s: f64,
    pub latency_serial_s: f64,
    pub latency_overlapped_s: f64,
    pub gflops_compute: f64,
    pub gflops_serial: f64,
    pub gflops_overlapped: f64,
}

/// Closed-form cycle model for a `(n x k) x (k x m)` call.
///
/// `update_a` controls whether the A transfer is charged, matching the
/// engine's persistent-buffer protocol.
pub fn estimate_cycles(
    n: usize,
    k: usize,
    m: usize,
    config: &TileConfig,
    hw: &HwParams,
    update_a: bool,
) -> PerfEstimate {
    let t = config.tile_size as u64;
    let (n, k, m) = (n as u64, k as u64, m as u64);
    let bus = hw.bus_bytes_per_cycle;

    let tiles = n.div_ceil(t) * m.div_ceil(t);
    let compute_cycles = tiles * (k + hw.pipeline_fill);
    let a_load_cycles = if update_a { (n * k).div_ceil(bus) } else { 0 };
    let b_load_cycles = (k * m).div_ceil(bus);
    let c_store_cycles = (4 * n * m).div_ceil(bus);

    let total_cycles_serial = compute_cycles + a_load_cycles + b_load_cycles + c_store_cycles;
    let total_cycles_overlapped =
        a_load_cycles + compute_cycles.max(b_load_cycles) + c_store_cycles;

    let mac_count = n * k * m;
    let flops = 2.0 * mac_count as f64;
    let seconds = |cycles: u64| cycles as f64 / hw.clock_hz;
    let gflops = |latency: f64| flops / latency / 1e9;

    let latency_compute_s = seconds(compute_cycles);
    let latency_serial_s = seconds(total_cycles_serial);
    let latency_overlapped_s = seconds(total_cycles_overlapped);

    PerfEstimate {
        mac_count,
        macs_per_cycle: macs_per_cycle(config.tile_size),
        peak_gflops: 2.0 * macs_per_cycle(config.tile_size) as f64 * hw.clock_hz / 1e9,
        compute_cycles,
        a_load_cycles,
        b_load_cycles,
        c_store_cycles,
        total_cycles_serial,
        total_cycles_overlapped,
        latency_compute_s,
        latency_serial_s,
        latency_overlapped_s,
        gflops_compute: gflops(latency_compute_s),
        gflops_serial: gflops(latency_serial_s),
        gflops_overlapped: gflops(latency_overlapped_s),
    }
}

/// Resource envelope of the target device.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct DeviceProfile {
    pub name: String,
    pub dsp_total: u64,
    pub bram_blocks_total: u64,
    /// Informational; the model does not budget LUTs or FFs.
    pub lut_total: u64,
    pub ff_total: u64,
    /// Fraction of BRAM considered routable in practice. Feasibility checks
    /// compare against `bram_margin * bram_blocks_total`.
    pub bram_margin: f64,
}

impl Default for DeviceProfile {
    fn default() -> Self {
        // KV260-class part (XCK26 fabric).
        Self {
            name: "kv260".into(),
            dsp_total: 1248,
            bram_blocks_total: 144,
            lut_total: 118_800,
            ff_total: 237_600,
            bram_margin: 0.88,
        }
    }
}

/// Modeled resource usage of a tile configuration.
#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct ResourceEstimate {
    /// Multipliers in the array, one per DSP slice: `T^2`.
    pub dsp_estimate: u64,
    /// Multipliers that exceed the device's DSP count and would fall back
    /// to LUT fabric.
    pub lut_spill_muls: u64,
    /// Persistent A buffer bytes (`max_n * max_k`).
    pub a_buffer_bytes: u64,
    /// One B block's bytes (`max_k * block_m`).
    pub b_block_bytes: u64,
    pub bram_bytes: u64,
    pub bram_blocks: u64,
    /// Whether the raw byte count fits the device's total BRAM.
    pub bram_fits_raw: bool,
    /// DSP fit and BRAM fit under the device's utilization margin.
    pub feasible: bool,
}

/// Buffer and multiplier-array resource estimate for a configuration.
pub fn estimate_resources(config: &TileConfig, device: &DeviceProfile) -> ResourceEstimate {
    let dsp_estimate = macs_per_cycle(config.tile_size);
    let a_buffer_bytes = config.a_buffer_bytes();
    let b_block_bytes = config.b_block_bytes();
    let bram_bytes = a_buffer_bytes + b_block_bytes;
    let bram_blocks = bram_bytes.div_ceil(BRAM_BLOCK_BYTES);
    let bram_fits_raw = bram_blocks <= device.bram_blocks_total;
    let bram_fits_margin =
        bram_blocks as f64 <= device.bram_margin * device.bram_blocks_total as f64;
    ResourceEstimate {
        dsp_estimate,
        lut_spill_muls: dsp_estimate.saturating_sub(device.dsp_total),
        a_buffer_bytes,
        b_block_bytes,
        bram_bytes,
        bram_blocks,
        bram_fits_raw,
        feasible: dsp_estimate <= device.dsp_total && bram_fits_margin,
    }
}

/// Axes of a design-space sweep. Tile capacity (`max_n`, `max_k`) is held
/// fixed while tile size and block width vary.
#[derive(Clone, Debug)]
pub struct SweepGrid {
    pub dims: Vec<(usize, usize, usize)>,
    pub tile_sizes: Vec<usize>,
    pub block_ms: Vec<usize>,
    pub max_n: usize,
    pub max_k: usize,
}

/// One sweep point: configuration plus the two estimates.
#[derive(Clone, Debug, Serialize)]
pub struct DseRow {
    pub t: usize,
    pub block_m: usize,
    pub n: usize,
    pub k: usize,
    pub m: usize,
    pub perf: PerfEstimate,
    pub resources: ResourceEstimate,
}

/// Evaluate every (tile size, block width, dims) combination.
pub fn dse_sweep(grid: &SweepGrid, hw: &HwParams, device: &DeviceProfile) -> Result<Vec<DseRow>> {
    if grid.tile_sizes.is_empty() {
        return Err(Error::EmptySweep("tile_sizes"));
    }
    if grid.block_ms.is_empty() {
        return Err(Error::EmptySweep("block_ms"));
    }
    if grid.dims.is_empty() {
        return Err(Error::EmptySweep("dims"));
    }
    hw.validate()?;

    let mut rows =
        Vec::with_capacity(grid.tile_sizes.len() * grid.block_ms.len() * grid.dims.len());
    for &t in &grid.tile_sizes {
        for &block_m in &grid.block_ms {
            let config = TileConfig::new(t, block_m, grid.max_n, grid.max_k)?;
            let resources = estimate_resources(&config, device);
            for &(n, k, m) in &grid.dims {
                let perf = estimate_cycles(n, k, m, &config, hw, true);
                rows.push(DseRow {
                    t,
                    block_m,
                    n,
                    k,
                    m,
                    perf,
                    resources,
                });
            }
        }
    }
    Ok(rows)
}

/// Fixed CSV column order for sweep exports.
pub const DSE_CSV_HEADER: &str =
    "t,block_m,n,k,m,compute_cycles,total_cycles,latency_s,gflops,dsp,bram_blocks,feasible";

/// Render sweep rows as CSV with the stable [`DSE_CSV_HEADER`] column order.
/// Latency and throughput columns report the serial-total mode.
pub fn dse_rows_to_csv(rows: &[DseRow]) -> String {
    let mut out = String::with_capacity(64 * (rows.len() + 1));
    out.push_str(DSE_CSV_HEADER);
    out.push('\n');
    for row in rows {
        out.push_str(&format!(
            "{},{},{},{},{},{},{},{},{},{},{},{}\n",
            row.t,
            row.block_m,
            row.n,
            row.k,
            row.m,
            row.perf.compute_cycles,
            row.perf.total_cycles_serial,
            row.perf.latency_serial_s,
            row.perf.gflops_serial,
            row.resources.dsp_estimate,
            row.resources.bram_blocks,
            row.resources.feasible
        ));
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;

    #[test]
    fn ffn_case_closed_form() {
        let config = TileConfig::default();
        let hw = HwParams::default();
        let est = estimate_cycles(64, 768, 3072, &config, &hw, true);

        assert_eq!(est.mac_count, 150_994_944);
        assert_eq!(est.macs_per_cycle, 1024);
        assert_eq!(est.compute_cycles, 2 * 96 * 776); // 148,992
        assert_relative_eq!(est.latency_compute_s, 1.48992e-3, max_relative = 1e-12);
        assert_relative_eq!(est.peak_gflops, 204.8, max_relative = 1e-12);
        assert!((est.gflops_compute - 202.7).abs() < 0.1);

        // Serial mode stacks the bus transfers on top of compute.
        assert_eq!(est.a_load_cycles, 3072);
        assert_eq!(est.b_load_cycles, 147_456);
        assert_eq!(est.c_store_cycles, 49_152);
        assert_eq!(est.total_cycles_serial, 348_672);
        assert!(est.total_cycles_overlapped <= est.total_cycles_serial);
    }

    #[test]
    fn attn_case_mac_count() {
        let est = estimate_cycles(
            64,
            768,
            768,
            &TileConfig::default(),
            &HwParams::default(),
            true,
        );
        assert_eq!(est.mac_count, 37_748_736);
    }

    #[test]
    fn single_tile_with_wide_bus() {
        let t = 16;
        let config = TileConfig::new(t, 256, t, t).unwrap();
        let hw = HwParams {
            clock_hz: 100e6,
            bus_bytes_per_cycle: 1 << 40,
            pipeline_fill: 0,
        };
        let est = estimate_cycles(t, t, t, &config, &hw, true);
        assert_eq!(est.compute_cycles, t as u64);
        assert_eq!(est.a_load_cycles, 1);
        assert_eq!(est.b_load_cycles, 1);
        assert_eq!(est.c_store_cycles, 1);
    }

    #[test]
    fn default_resources_fit_the_device() {
        let res = estimate_resources(&TileConfig::default(), &DeviceProfile::default());
        assert_eq!(res.dsp_estimate, 1024);
        assert_eq!(res.lut_spill_muls, 0);
        assert_eq!(res.a_buffer_bytes, 49_152);
        assert_eq!(res.b_block_bytes, 196_608);
        assert_eq!(res.bram_bytes, 245_760);
        assert_eq!(res.bram_blocks, 54);
        assert!(res.bram_fits_raw);
        assert!(res.feasible);
    }

    #[test]
    fn full_width_b_block_fails_the_margin() {
        let config = TileConfig::new(32, 768, 64, 768).unwrap();
        let res = estimate_resources(&config, &DeviceProfile::default());
        assert_eq!(res.b_block_bytes, 589_824);
        assert_eq!(res.bram_bytes, 638_976);
        assert!(res.bram_fits_raw); // raw bytes would fit...
        assert!(!res.feasible); // ...but not under the 88% margin
    }

    #[test]
    fn t64_exceeds_dsp_budget() {
        let config = TileConfig::new(64, 256, 64, 768).unwrap();
        let res = estimate_resources(&config, &DeviceProfile::default());
        assert_eq!(res.dsp_estimate, 4096);
        assert_eq!(res.lut_spill_muls, 4096 - 1248);
        assert!(!res.feasible);
    }

    #[test]
    fn sweep_rows_cover_the_grid_in_stable_order() {
        let grid = SweepGrid {
            dims: vec![(64, 768, 3072)],
            tile_sizes: vec![16, 32, 64],
            block_ms: vec![256],
            max_n: 64,
            max_k: 768,
        };
        let rows = dse_sweep(&grid, &HwParams::default(), &DeviceProfile::default()).unwrap();
        assert_eq!(rows.len(), 3);
        assert_eq!(rows[0].perf.compute_cycles, 4 * 192 * 776);
        assert_eq!(rows[1].perf.compute_cycles, 2 * 96 * 776);
        assert_eq!(rows[2].perf.compute_cycles, 48 * 776);
        assert!(rows[0].perf.compute_cycles > rows[1].perf.compute_cycles);
        assert!(rows[1].perf.compute_cycles > rows[2].perf.compute_cycles);
        assert!(rows[0].resources.feasible);
        assert!(rows[1].resources.feasible);
        assert!(!rows[2].resources.feasible);

        let csv = dse_rows_to_csv(&rows);
        assert!(csv.starts_with(DSE_CSV_HEADER));
        assert_eq!(csv.lines().count(), 4);
    }

    #[test]
    fn empty_axes_are_rejected() {
        let grid = SweepGrid {
            dims: vec![],
            tile_sizes: vec![32],
            block_ms: vec![256],
            max_n: 64,
            max_k: 768,
        };
        assert!(matches!(
            dse_sweep(&grid, &HwParams::default(), &DeviceProfile::default()),
            Err(Error::EmptySweep("dims"))
        ));
    }
}
