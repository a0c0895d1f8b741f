//! Quantized linear projection routed through the accelerator, and the
//! Q/K/V projection pipeline that exercises activation persistence.
//!
//! A forward pass quantizes the float activations, offloads the int8 GEMM
//! to the engine, and rescales the int32 result back to float, adding bias
//! if present. The activation sits in the engine's persistent buffer, so
//! the three Q/K/V projections of one input pay for its transfer once.

use std::path::Path;

use crate::engine::{AcceleratorState, TrafficReport};
use crate::error::{Error, Result};
use crate::io::read_matrix_file;
use crate::matrix::{AnyMatrix, F32Matrix, Int8Matrix};
use crate::quant::{calibrate, dequantize_gemm_output, quantize, QuantParams};

/// A linear layer with statically quantized int8 weights.
///
/// Weights are stored pre-transposed as `in_features x out_features`, so the
/// projection is a plain `activation x weight` GEMM. Quantization happens
/// once at construction; activations are calibrated per call.
#[derive(Clone, Debug)]
pub struct QuantizedLinear {
    weight_q: Int8Matrix,
    weight_scale: QuantParams,
    bias: Option<Vec<f32>>,
}

impl QuantizedLinear {
    /// Quantize float weights (`in_features x out_features`) into a layer.
    pub fn from_f32(weights: &F32Matrix, bias: Option<Vec<f32>>) -> Result<Self> {
        if let Some(bias) = &bias {
            if bias.len() != weights.cols() {
                return Err(Error::Shape {
                    context: format!(
                        "bias length {} does not match out_features {}",
                        bias.len(),
                        weights.cols()
                    ),
                });
            }
        }
        let weight_scale = calibrate(weights)?;
        Ok(Self {
            weight_q: quantize(weights, &weight_scale),
            weight_scale,
            bias,
        })
    }

    /// Load a layer from matrix files: one f32 weight matrix plus an
    /// optional f32 bias stored as a 1 x out_features row vector.
    pub fn from_files(weight_path: impl AsRef<Path>, bias_path: Option<&Path>) -> Result<Self> {
        let weights = match read_matrix_file(weight_path)? {
            AnyMatrix::F32(m) => m,
            other => {
                return Err(Error::Dtype {
                    expected: "f32",
                    found: other.dtype().name(),
                })
            }
        };
        let bias = match bias_path {
            None => None,
            Some(path) => match read_matrix_file(path)? {
                AnyMatrix::F32(b) => {
                    if b.rows() != 1 || b.cols() != weights.cols() {
                        return Err(Error::Shape {
                            context: format!(
                                "bias file is {}x{}, expected 1x{}",
                                b.rows(),
                                b.cols(),
                                weights.cols()
                            ),
                        });
                    }
                    Some(b.data().to_vec())
                }
                other => {
                    return Err(Error::Dtype {
                        expected: "f32",
                        found: other.dtype().name(),
                    })
                }
            },
        };
        Self::from_f32(&weights, bias)
    }

    pub fn in_features(&self) -> usize {
        self.weight_q.rows()
    }

    pub fn out_features(&self) -> usize {
        self.weight_q.cols()
    }

    pub fn weight_scale(&self) -> &QuantParams {
        &self.weight_scale
    }

    pub fn bias(&self) -> Option<&[f32]> {
        self.bias.as_deref()
    }

    /// Run the projection on the accelerator.
    ///
    /// With `reuse_activation = true` the engine's resident matrix is used
    /// and the caller must guarantee it is the quantization of `x` from a
    /// previous call; the activation transfer is skipped entirely, which is
    /// the point of the persistence protocol.
    pub fn forward(
        &self,
        x: &F32Matrix,
        state: &mut AcceleratorState,
        reuse_activation: bool,
    ) -> Result<F32Matrix> {
        let activation_scale = calibrate(x)?;
        self.forward_with_scale(x, state, reuse_activation, &activation_scale)
    }

    /// [`forward`](Self::forward) with a caller-chosen activation scale
    /// instead of per-call max-abs calibration.
    pub fn forward_with_scale(
        &self,
        x: &F32Matrix,
        state: &mut AcceleratorState,
        reuse_activation: bool,
        activation_scale: &QuantParams,
    ) -> Result<F32Matrix> {
        if x.cols() != self.in_features() {
            return Err(Error::Shape {
                context: format!(
                    "activation is {}x{} but the layer expects {} input features",
                    x.rows(),
                    x.cols(),
                    self.in_features()
                ),
            });
        }
        let accum = if reuse_activation {
            state.tiled_gemm(None, &self.weight_q, false)?
        } else {
            let x_q = quantize(x, activation_scale);
            state.tiled_gemm(Some(&x_q), &self.weight_q, true)?
        };
        dequantize_gemm_output(&accum, activation_scale, &self.weight_scale, self.bias())
    }
}

/// The three projection outputs plus the traffic the calls generated.
#[derive(Clone, Debug)]
pub struct QkvResult {
    pub q: F32Matrix,
    pub k: F32Matrix,
    pub v: F32Matrix,
    /// Traffic-counter increase across the three projections.
    pub traffic_delta: TrafficReport,
}

/// Project one activation through the Q, K, and V layers.
///
/// The first projection loads the quantized activation into the persistent
/// buffer; the other two reuse it, so the whole pipeline records exactly one
/// A load. Outputs are bit-identical to three independent forward calls.
pub fn qkv_project(
    x: &F32Matrix,
    wq: &QuantizedLinear,
    wk: &QuantizedLinear,
    wv: &QuantizedLinear,
    state: &mut AcceleratorState,
) -> Result<QkvResult> {
    let in_features = x.cols();
    for (name, layer) in [("q", wq), ("k", wk), ("v", wv)] {
        if layer.in_features() != in_features {
            return Err(Error::Shape {
                context: format!(
                    "{name} projection expects {} input features but activation has {in_features}",
                    layer.in_features()
                ),
            });
        }
    }
    if wk.out_features() != wq.out_features() || wv.out_features() != wq.out_features() {
        return Err(Error::Shape {
            context: format!(
                "projection widths differ: q={}, k={}, v={}",
                wq.out_features(),
                wk.out_features(),
                wv.out_features()
            ),
        });
    }

    let baseline = *state.traffic();
    let q = wq.forward(x, state, false)?;
    let k = wk.forward(x, state, true)?;
    let v = wv.forward(x, state, true)?;
    let traffic_delta = state.traffic().delta_since(&baseline);
    Ok(QkvResult {
        q,
        k,
        v,
        traffic_delta,
    })
}
