//! Symmetric per-tensor int8 quantization.
//!
//! Real values map to int8 codes as `code = clamp(round(x / scale), -127, 127)`
//! with a zero-point fixed at 0, so negation symmetry is preserved and no
//! code ever lands on -128. Rounding is half-away-from-zero.

use serde::Serialize;

use crate::error::{Error, Result};
use crate::matrix::{F32Matrix, Int32Matrix, Int8Matrix};

/// Symmetric quantization parameters: one positive scale per tensor,
/// zero-point always 0.
#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct QuantParams {
    scale: f32,
    zero_point: i32,
}

impl QuantParams {
    pub fn new(scale: f32) -> Result<Self> {
        if !(scale.is_finite() && scale > 0.0) {
            return Err(Error::Config(format!(
                "quantization scale must be positive and finite, got {scale}"
            )));
        }
        Ok(Self {
            scale,
            zero_point: 0,
        })
    }

    pub fn scale(&self) -> f32 {
        self.scale
    }

    pub fn zero_point(&self) -> i32 {
        self.zero_point
    }
}

/// Max-abs calibration: `scale = max(|x|) / 127`, or 1.0 for an all-zero
/// tensor so the scale stays usable.
pub fn calibrate(x: &F32Matrix) -> Result<QuantParams> {
    let max_abs = x.data().iter().fold(0f32, |acc, &v| acc.max(v.abs()));
    if !max_abs.is_finite() {
        return Err(Error::NonFinite { index: 0 });
    }
    if max_abs == 0.0 {
        QuantParams::new(1.0)
    } else {
        QuantParams::new(max_abs / 127.0)
    }
}

/// Quantize to int8 codes: round half away from zero, clamp to [-127, 127].
pub fn quantize(x: &F32Matrix, params: &QuantParams) -> Int8Matrix {
    let scale = params.scale();
    let data = x
        .data()
        .iter()
        .map(|&v| (v / scale).round().clamp(-127.0, 127.0) as i8)
        .collect();
    Int8Matrix::from_vec(x.rows(), x.cols(), data).expect("shape preserved")
}

/// Elementwise dequantization: `code * scale`.
pub fn dequantize(x: &Int8Matrix, params: &QuantParams) -> F32Matrix {
    let scale = params.scale();
    let data = x.data().iter().map(|&v| v as f32 * scale).collect();
    F32Matrix::from_vec(x.rows(), x.cols(), data).expect("shape preserved")
}

/// Rescale an int32 GEMM accumulator back to float and add an optional
/// per-column bias: `out[i][j] = c[i][j] * scale_a * scale_b (+ bias[j])`.
pub fn dequantize_gemm_output(
    c: &Int32Matrix,
    activation: &QuantParams,
    weight: &QuantParams,
    bias: Option<&[f32]>,
) -> Result<F32Matrix> {
    if let Some(bias) = bias {
        if bias.len() != c.cols() {
            return Err(Error::Shape {
                context: format!(
                    "bias length {} does not match output columns {}",
                    bias.len(),
                    c.cols()
                ),
            });
        }
    }
    let combined = activation.scale() * weight.scale();
    let (rows, cols) = c.shape();
    let mut data = Vec::with_capacity(rows * cols);
    for i in 0..rows {
        for j in 0..cols {
            let mut v = c.get(i, j) as f32 * combined;
            if let Some(bias) = bias {
                v += bias[j];
            }
            data.push(v);
        }
    }
    F32Matrix::from_vec(rows, cols, data)
}
