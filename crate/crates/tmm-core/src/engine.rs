//! Functional model of the tiled matrix-multiplication accelerator.
//!
//! The device multiplies an int8 activation matrix A (N x K) against an int8
//! matrix B (K x M) into an int32 output C, with a two-level dataflow:
//!
//! * A is copied once from external memory into a persistent on-chip buffer
//!   of fixed capacity (`max_n` x `max_k`) and stays resident across calls.
//!   The `update_a` flag on each call chooses between reloading A and reusing
//!   the resident copy.
//! * B streams through in column blocks of width `block_m`; each block is
//!   held on chip while it is consumed, so every B element is fetched from
//!   external memory exactly once per call.
//! * Within a block, computation proceeds in `tile_size` x `tile_size` tiles:
//!   a local output tile is zeroed, the K dimension is accumulated tile by
//!   tile in int32, and the finished tile is written out. Edge tiles smaller
//!   than `tile_size` are handled by clamping loop bounds.
//!
//! [`TrafficReport`] counts the external-memory bytes this dataflow moves,
//! which is what makes the reuse measurable. Results are bit-identical to
//! [`crate::matrix::naive_gemm`] for every configuration; only traffic and
//! modeled cost depend on the tile parameters.
//!
//! A state models one physical device: it needs exclusive access per call,
//! while independent states may run concurrently.

use serde::Serialize;

use crate::error::{Error, Result};
use crate::matrix::{fnv1a64_iter, Int32Matrix, Int8Matrix};

/// Dataflow parameters: inner tile edge, B block width, and the capacity of
/// the persistent A buffer.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
pub struct TileConfig {
    pub tile_size: usize,
    pub block_m: usize,
    pub max_n: usize,
    pub max_k: usize,
}

impl TileConfig {
    pub fn new(tile_size: usize, block_m: usize, max_n: usize, max_k: usize) -> Result<Self> {
        let config = Self {
            tile_size,
            block_m,
            max_n,
            max_k,
        };
        config.validate()?;
        Ok(config)
    }

    pub fn validate(&self) -> Result<()> {
        if self.tile_size == 0 || self.block_m == 0 || self.max_n == 0 || self.max_k == 0 {
            return Err(Error::Config(format!(
                "tile config fields must be at least 1: {self:?}"
            )));
        }
        Ok(())
    }

    /// Bytes of the persistent A buffer.
    pub fn a_buffer_bytes(&self) -> u64 {
        (self.max_n * self.max_k) as u64
    }

    /// Bytes of one full-width B block.
    pub fn b_block_bytes(&self) -> u64 {
        (self.max_k * self.block_m) as u64
    }
}

impl Default for TileConfig {
    fn default() -> Self {
        Self {
            tile_size: 32,
            block_m: 256,
            max_n: 64,
            max_k: 768,
        }
    }
}

/// Cumulative external-memory traffic observed by one accelerator state.
/// All counters are monotonically non-decreasing until [`AcceleratorState::reset`].
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize)]
pub struct TrafficReport {
    /// Bytes of A fetched from external memory (int8, one byte per element).
    pub a_bytes_read: u64,
    /// Bytes of B fetched from external memory.
    pub b_bytes_read: u64,
    /// Bytes of C written back (int32, four bytes per element).
    pub c_bytes_written: u64,
    /// Number of A-load events (calls with `update_a = true`).
    pub a_loads: u64,
    /// Number of B column blocks streamed on chip.
    pub b_blocks_streamed: u64,
}

impl TrafficReport {
    pub fn total_bytes(&self) -> u64 {
        self.a_bytes_read + self.b_bytes_read + self.c_bytes_written
    }

    /// Counter increase since an earlier snapshot of the same state.
    pub fn delta_since(&self, baseline: &TrafficReport) -> TrafficReport {
        TrafficReport {
            a_bytes_read: self.a_bytes_read - baseline.a_bytes_read,
            b_bytes_read: self.b_bytes_read - baseline.b_bytes_read,
            c_bytes_written: self.c_bytes_written - baseline.c_bytes_written,
            a_loads: self.a_loads - baseline.a_loads,
            b_blocks_streamed: self.b_blocks_streamed - baseline.b_blocks_streamed,
        }
    }
}

/// One accelerator device: configuration, the persistent A buffer, the
/// dimensions of the resident A (if any), and cumulative traffic.
#[derive(Clone, Debug)]
pub struct AcceleratorState {
    config: TileConfig,
    a_buffer: Vec<i8>,
    loaded_dims: Option<(usize, usize)>,
    traffic: TrafficReport,
}

impl AcceleratorState {
    pub fn new(config: TileConfig) -> Result<Self> {
        config.validate()?;
        Ok(Self {
            a_buffer: vec![0; config.max_n * config.max_k],
            config,
            loaded_dims: None,
            traffic: TrafficReport::default(),
        })
    }

    pub fn config(&self) -> &TileConfig {
        &self.config
    }

    /// Dimensions (N, K) of the resident A matrix, if one is loaded.
    pub fn loaded_dims(&self) -> Option<(usize, usize)> {
        self.loaded_dims
    }

    pub fn traffic(&self) -> &TrafficReport {
        &self.traffic
    }

    /// FNV-1a 64 over the raw persistent-buffer bytes; lets callers verify
    /// that reuse calls leave the resident A untouched.
    pub fn a_buffer_checksum(&self) -> u64 {
        fnv1a64_iter(self.a_buffer.iter().map(|&v| v as u8))
    }

    /// Clear the loaded-A record and zero the traffic counters, modeling a
    /// device reset. Idempotent.
    pub fn reset(&mut self) {
        self.loaded_dims = None;
        self.traffic = TrafficReport::default();
    }

    /// Run one accelerator call: `C = A x B` with the two-level tiled
    /// dataflow.
    ///
    /// With `update_a = true`, `a` must be provided and is copied into the
    /// persistent buffer (charged to `a_bytes_read`). With `update_a = false`
    /// the resident A from a previous call is reused and `a` is ignored (a
    /// warning is logged if one is passed anyway, mirroring a host driver
    /// that skips the A transfer).
    ///
    /// Errors leave the state unchanged.
    pub fn tiled_gemm(
        &mut self,
        a: Option<&Int8Matrix>,
        b: &Int8Matrix,
        update_a: bool,
    ) -> Result<Int32Matrix> {
        if update_a {
            let a = a.ok_or_else(|| {
                Error::Protocol("update_a requested but no A operand was provided".into())
            })?;
            if a.rows() > self.config.max_n || a.cols() > self.config.max_k {
                return Err(Error::Capacity {
                    n: a.rows(),
                    k: a.cols(),
                    max_n: self.config.max_n,
                    max_k: self.config.max_k,
                });
            }
            if a.cols() != b.rows() {
                return Err(Error::Shape {
                    context: format!(
                        "A is {}x{} but B is {}x{}",
                        a.rows(),
                        a.cols(),
                        b.rows(),
                        b.cols()
                    ),
                });
            }
            self.load_a(a);
        } else {
            if a.is_some() {
                log::warn!("A operand ignored: update_a is false, reusing the resident matrix");
            }
            let (_, k) = self.loaded_dims.ok_or_else(|| {
                Error::Protocol("update_a is false but no A matrix is resident".into())
            })?;
            if b.rows() != k {
                return Err(Error::Shape {
                    context: format!("resident A has K = {k} but B is {}x{}", b.rows(), b.cols()),
                });
            }
        }

        let (n, k) = self.loaded_dims.expect("A resident after load checks");
        let m = b.cols();
        Ok(self.run_blocks(n, k, m, b))
    }

    fn load_a(&mut self, a: &Int8Matrix) {
        let (n, k) = a.shape();
        for i in 0..n {
            let dst = &mut self.a_buffer[i * self.config.max_k..i * self.config.max_k + k];
            dst.copy_from_slice(&a.data()[i * k..(i + 1) * k]);
        }
        self.loaded_dims = Some((n, k));
        self.traffic.a_bytes_read += (n * k) as u64;
        self.traffic.a_loads += 1;
    }

    fn run_blocks(&mut self, n: usize, k: usize, m: usize, b: &Int8Matrix) -> Int32Matrix {
        let t = self.config.tile_size;
        let block_m = self.config.block_m;
        let max_k = self.config.max_k;

        let mut c = vec![0i32; n * m];
        let mut b_block = vec![0i8; k * block_m.min(m)];
        let mut local_a = vec![0i8; t * t];
        let mut local_b = vec![0i8; t * t];
        let mut local_c = vec![0i32; t * t];

        for j_block in (0..m).step_by(block_m) {
            let cur_block_m = block_m.min(m - j_block);

            // Stream this column block of B from external memory on chip.
            for row in 0..k {
                let src = &b.data()[row * m + j_block..row * m + j_block + cur_block_m];
                b_block[row * cur_block_m..(row + 1) * cur_block_m].copy_from_slice(src);
            }
            self.traffic.b_bytes_read += (k * cur_block_m) as u64;
            self.traffic.b_blocks_streamed += 1;

            for i0 in (0..n).step_by(t) {
                let tile_n = t.min(n - i0);
                for j0 in (0..cur_block_m).step_by(t) {
                    let tile_m = t.min(cur_block_m - j0);

                    local_c[..t * t].fill(0);

                    for k0 in (0..k).step_by(t) {
                        let tile_k = t.min(k - k0);

                        // Tile loads come from the on-chip buffers, so they
                        // are not charged as external traffic.
                        for ii in 0..tile_n {
                            let src = &self.a_buffer
                                [(i0 + ii) * max_k + k0..(i0 + ii) * max_k + k0 + tile_k];
                            local_a[ii * t..ii * t + tile_k].copy_from_slice(src);
                        }
                        for kk in 0..tile_k {
                            let src = &b_block[(k0 + kk) * cur_block_m + j0
                                ..(k0 + kk) * cur_block_m + j0 + tile_m];
                            local_b[kk * t..kk * t + tile_m].copy_from_slice(src);
                        }

                        for ii in 0..tile_n {
                            for kk in 0..tile_k {
                                let a_val = local_a[ii * t + kk] as i32;
                                let b_row = &local_b[kk * t..kk * t + tile_m];
                                let c_row = &mut local_c[ii * t..ii * t + tile_m];
                                for (cv, &bv) in c_row.iter_mut().zip(b_row) {
                                    *cv += a_val * bv as i32;
                                }
                            }
                        }
                    }

                    // Write the finished tile back to external memory.
                    for ii in 0..tile_n {
                        let dst_base = (i0 + ii) * m + j_block + j0;
                        c[dst_base..dst_base + tile_m]
                            .copy_from_slice(&local_c[ii * t..ii * t + tile_m]);
                    }
                    self.traffic.c_bytes_written += (tile_n * tile_m * 4) as u64;
                }
            }
        }

        Int32Matrix::from_vec(n, m, c).expect("output shape is n x m")
    }
}
