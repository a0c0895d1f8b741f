//! Dense row-major matrices, deterministic random generation, and the
//! reference GEMM everything else is verified against.
//!
//! Three element types circulate in the model: int8 operands, int32
//! accumulator outputs, and f32 reference values. All are stored row-major
//! and immutable after construction.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, StandardNormal};
use serde::Serialize;

use crate::error::{Error, Result};

/// Element dtype tag used by the binary file format.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum Dtype {
    Int8,
    Int32,
    F32,
}

impl Dtype {
    pub fn code(self) -> u8 {
        match self {
            Dtype::Int8 => 0,
            Dtype::Int32 => 1,
            Dtype::F32 => 2,
        }
    }

    pub fn from_code(code: u8) -> Option<Self> {
        match code {
            0 => Some(Dtype::Int8),
            1 => Some(Dtype::Int32),
            2 => Some(Dtype::F32),
            _ => None,
        }
    }

    pub fn byte_width(self) -> usize {
        match self {
            Dtype::Int8 => 1,
            Dtype::Int32 | Dtype::F32 => 4,
        }
    }

    pub fn name(self) -> &'static str {
        match self {
            Dtype::Int8 => "int8",
            Dtype::Int32 => "int32",
            Dtype::F32 => "f32",
        }
    }
}

/// Matrix element. Implemented for `i8`, `i32` and `f32` only.
pub trait Element: Copy + PartialEq + std::fmt::Debug + Send + Sync + 'static {
    const DTYPE: Dtype;

    fn append_le(self, out: &mut Vec<u8>);
    /// Decode one element from exactly `Dtype::byte_width` little-endian bytes.
    fn from_le_slice(bytes: &[u8]) -> Self;
    /// Element-level validity; only f32 restricts this (finite values).
    fn is_valid(self) -> bool {
        true
    }
}

impl Element for i8 {
    const DTYPE: Dtype = Dtype::Int8;

    fn append_le(self, out: &mut Vec<u8>) {
        out.push(self as u8);
    }

    fn from_le_slice(bytes: &[u8]) -> Self {
        bytes[0] as i8
    }
}

impl Element for i32 {
    const DTYPE: Dtype = Dtype::Int32;

    fn append_le(self, out: &mut Vec<u8>) {
        out.extend_from_slice(&self.to_le_bytes());
    }

    fn from_le_slice(bytes: &[u8]) -> Self {
        i32::from_le_bytes(bytes.try_into().expect("4-byte slice"))
    }
}

impl Element for f32 {
    const DTYPE: Dtype = Dtype::F32;

    fn append_le(self, out: &mut Vec<u8>) {
        out.extend_from_slice(&self.to_le_bytes());
    }

    fn from_le_slice(bytes: &[u8]) -> Self {
        f32::from_le_bytes(bytes.try_into().expect("4-byte slice"))
    }

    fn is_valid(self) -> bool {
        self.is_finite()
    }
}

/// Dense row-major matrix. Immutable after construction; safe to share
/// across threads.
#[derive(Clone, Debug, PartialEq)]
pub struct Matrix<T> {
    rows: usize,
    cols: usize,
    data: Vec<T>,
}

pub type Int8Matrix = Matrix<i8>;
pub type Int32Matrix = Matrix<i32>;
pub type F32Matrix = Matrix<f32>;

impl<T: Element> Matrix<T> {
    /// Build a matrix from row-major data, validating dimensions, length,
    /// and (for floats) finiteness.
    pub fn from_vec(rows: usize, cols: usize, data: Vec<T>) -> Result<Self> {
        if rows == 0 || cols == 0 {
            return Err(Error::EmptyDimensions { rows, cols });
        }
        let expected = rows
            .checked_mul(cols)
            .ok_or_else(|| Error::Config(format!("matrix size {rows}x{cols} overflows")))?;
        if data.len() != expected {
            return Err(Error::LengthMismatch {
                rows,
                cols,
                expected,
                actual: data.len(),
            });
        }
        if let Some(index) = data.iter().position(|e| !e.is_valid()) {
            return Err(Error::NonFinite { index });
        }
        Ok(Self { rows, cols, data })
    }

    pub fn rows(&self) -> usize {
        self.rows
    }

    pub fn cols(&self) -> usize {
        self.cols
    }

    pub fn shape(&self) -> (usize, usize) {
        (self.rows, self.cols)
    }

    pub fn data(&self) -> &[T] {
        &self.data
    }

    #[inline]
    pub fn get(&self, row: usize, col: usize) -> T {
        self.data[row * self.cols + col]
    }

    /// Row-major little-endian byte image of the payload (the exact bytes
    /// stored in the matrix file format; also what checksums run over).
    pub fn to_le_bytes(&self) -> Vec<u8> {
        let mut out = Vec::with_capacity(self.data.len() * T::DTYPE.byte_width());
        for &e in &self.data {
            e.append_le(&mut out);
        }
        out
    }

    /// FNV-1a 64 checksum of `to_le_bytes`.
    pub fn checksum(&self) -> u64 {
        fnv1a64(&self.to_le_bytes())
    }
}

impl Int8Matrix {
    /// Deterministic random int8 matrix, uniform over the full [-128, 127]
    /// range. The same (rows, cols, seed) always yields the same matrix.
    pub fn random(rows: usize, cols: usize, seed: u64) -> Result<Self> {
        if rows == 0 || cols == 0 {
            return Err(Error::EmptyDimensions { rows, cols });
        }
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let data = (0..rows * cols).map(|_| rng.random::<i8>()).collect();
        Self::from_vec(rows, cols, data)
    }
}

impl F32Matrix {
    /// Deterministic random f32 matrix with standard-normal entries.
    pub fn random(rows: usize, cols: usize, seed: u64) -> Result<Self> {
        if rows == 0 || cols == 0 {
            return Err(Error::EmptyDimensions { rows, cols });
        }
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let data = (0..rows * cols)
            .map(|_| StandardNormal.sample(&mut rng))
            .collect();
        Self::from_vec(rows, cols, data)
    }
}

/// A matrix of any supported dtype, as read back from a file.
#[derive(Clone, Debug, PartialEq)]
pub enum AnyMatrix {
    Int8(Int8Matrix),
    Int32(Int32Matrix),
    F32(F32Matrix),
}

impl AnyMatrix {
    pub fn dtype(&self) -> Dtype {
        match self {
            AnyMatrix::Int8(_) => Dtype::Int8,
            AnyMatrix::Int32(_) => Dtype::Int32,
            AnyMatrix::F32(_) => Dtype::F32,
        }
    }

    pub fn shape(&self) -> (usize, usize) {
        match self {
            AnyMatrix::Int8(m) => m.shape(),
            AnyMatrix::Int32(m) => m.shape(),
            AnyMatrix::F32(m) => m.shape(),
        }
    }
}

/// Reference int8 GEMM with int32 accumulation: `C[i][j] = sum_k A[i][k]*B[k][j]`.
///
/// Every product and partial sum is carried in 32-bit signed arithmetic with
/// no saturation. Worst-case |sum| is K*128*128, so results are exact for
/// K up to 131,071. This is the independent oracle the tiled engine is
/// checked against; it must stay free of tiling or buffering logic.
pub fn naive_gemm(a: &Int8Matrix, b: &Int8Matrix) -> Result<Int32Matrix> {
    if a.cols() != b.rows() {
        return Err(Error::Shape {
            context: format!(
                "gemm inner dimensions: A is {}x{}, B is {}x{}",
                a.rows(),
                a.cols(),
                b.rows(),
                b.cols()
            ),
        });
    }
    let (n, k, m) = (a.rows(), a.cols(), b.cols());
    let mut c = vec![0i32; n * m];
    for i in 0..n {
        for p in 0..k {
            let a_ip = a.data()[i * k + p] as i32;
            let b_row = &b.data()[p * m..(p + 1) * m];
            let c_row = &mut c[i * m..(i + 1) * m];
            for (cv, &bv) in c_row.iter_mut().zip(b_row) {
                *cv += a_ip * bv as i32;
            }
        }
    }
    Int32Matrix::from_vec(n, m, c)
}

/// Reference f32 GEMM, used as the accuracy baseline for the quantized path.
pub fn naive_gemm_f32(a: &F32Matrix, b: &F32Matrix) -> Result<F32Matrix> {
    if a.cols() != b.rows() {
        return Err(Error::Shape {
            context: format!(
                "gemm inner dimensions: A is {}x{}, B is {}x{}",
                a.rows(),
                a.cols(),
                b.rows(),
                b.cols()
            ),
        });
    }
    let (n, k, m) = (a.rows(), a.cols(), b.cols());
    let mut c = vec![0f32; n * m];
    for i in 0..n {
        for p in 0..k {
            let a_ip = a.data()[i * k + p];
            let b_row = &b.data()[p * m..(p + 1) * m];
            let c_row = &mut c[i * m..(i + 1) * m];
            for (cv, &bv) in c_row.iter_mut().zip(b_row) {
                *cv += a_ip * bv;
            }
        }
    }
    F32Matrix::from_vec(n, m, c)
}

/// Relative Frobenius error ||approx - reference||_F / ||reference||_F,
/// accumulated in f64.
pub fn relative_frobenius_error(approx: &F32Matrix, reference: &F32Matrix) -> Result<f64> {
    if approx.shape() != reference.shape() {
        return Err(Error::Shape {
            context: format!(
                "frobenius error over {:?} vs {:?}",
                approx.shape(),
                reference.shape()
            ),
        });
    }
    let mut diff_sq = 0f64;
    let mut ref_sq = 0f64;
    for (&x, &r) in approx.data().iter().zip(reference.data()) {
        let d = x as f64 - r as f64;
        diff_sq += d * d;
        ref_sq += (r as f64) * (r as f64);
    }
    if ref_sq == 0.0 {
        return Ok(if diff_sq == 0.0 { 0.0 } else { f64::INFINITY });
    }
    Ok((diff_sq / ref_sq).sqrt())
}

/// FNV-1a 64-bit hash, used for output checksums and buffer-integrity checks.
pub fn fnv1a64(bytes: &[u8]) -> u64 {
    fnv1a64_iter(bytes.iter().copied())
}

pub(crate) fn fnv1a64_iter(bytes: impl IntoIterator<Item = u8>) -> u64 {
    const OFFSET: u64 = 0xcbf2_9ce4_8422_2325;
    const PRIME: u64 = 0x0000_0100_0000_01b3;
    bytes.into_iter().fold(OFFSET, |hash, byte| {
        (hash ^ byte as u64).wrapping_mul(PRIME)
    })
}
