//! Binary matrix file format.
//!
//! Layout, little-endian throughout:
//!
//! | offset | size | field                                  |
//! |--------|------|----------------------------------------|
//! | 0      | 4    | magic `"TMM1"`                         |
//! | 4      | 1    | dtype code: 0 = int8, 1 = int32, 2 = f32 |
//! | 5      | 3    | reserved, written as zero              |
//! | 8      | 4    | rows (u32)                             |
//! | 12     | 4    | cols (u32)                             |
//! | 16     | ...  | rows*cols elements, row-major          |
//!
//! Round trips are bit-exact for all three dtypes.

use std::fs::File;
use std::io::{BufReader, BufWriter, Read, Write};
use std::path::Path;

use crate::error::{Error, Result};
use crate::matrix::{AnyMatrix, Dtype, Element, Matrix};

pub const MAGIC: [u8; 4] = *b"TMM1";
const HEADER_LEN: usize = 16;

/// Encode a matrix to a writer.
pub fn write_matrix<T: Element, W: Write>(writer: &mut W, matrix: &Matrix<T>) -> Result<()> {
    let mut header = [0u8; HEADER_LEN];
    header[..4].copy_from_slice(&MAGIC);
    header[4] = T::DTYPE.code();
    // bytes 5..8 reserved, zero
    header[8..12].copy_from_slice(&(matrix.rows() as u32).to_le_bytes());
    header[12..16].copy_from_slice(&(matrix.cols() as u32).to_le_bytes());
    writer.write_all(&header)?;
    writer.write_all(&matrix.to_le_bytes())?;
    Ok(())
}

/// Decode a matrix of any dtype from a reader.
pub fn read_matrix<R: Read>(reader: &mut R) -> Result<AnyMatrix> {
    let header = read_exact_or_truncated(reader, HEADER_LEN)?;
    let mut found = [0u8; 4];
    found.copy_from_slice(&header[..4]);
    if found != MAGIC {
        return Err(Error::BadMagic {
            found,
            expected: MAGIC,
        });
    }
    let dtype = Dtype::from_code(header[4]).ok_or(Error::UnknownDtype { code: header[4] })?;
    let rows = u32::from_le_bytes(header[8..12].try_into().unwrap()) as usize;
    let cols = u32::from_le_bytes(header[12..16].try_into().unwrap()) as usize;
    if rows == 0 || cols == 0 {
        return Err(Error::EmptyDimensions { rows, cols });
    }
    let payload_len = rows * cols * dtype.byte_width();
    let payload = read_exact_or_truncated(reader, payload_len)?;
    Ok(match dtype {
        Dtype::Int8 => AnyMatrix::Int8(decode_payload(rows, cols, &payload)?),
        Dtype::Int32 => AnyMatrix::Int32(decode_payload(rows, cols, &payload)?),
        Dtype::F32 => AnyMatrix::F32(decode_payload(rows, cols, &payload)?),
    })
}

pub fn write_matrix_file<T: Element>(path: impl AsRef<Path>, matrix: &Matrix<T>) -> Result<()> {
    let mut writer = BufWriter::new(File::create(path)?);
    write_matrix(&mut writer, matrix)?;
    writer.flush()?;
    Ok(())
}

pub fn read_matrix_file(path: impl AsRef<Path>) -> Result<AnyMatrix> {
    let mut reader = BufReader::new(File::open(path)?);
    read_matrix(&mut reader)
}

fn read_exact_or_truncated<R: Read>(reader: &mut R, expected: usize) -> Result<Vec<u8>> {
    let mut buf = Vec::with_capacity(expected.min(1 << 20));
    reader
        .by_ref()
        .take(expected as u64)
        .read_to_end(&mut buf)?;
    if buf.len() < expected {
        return Err(Error::Truncated {
            expected,
            actual: buf.len(),
        });
    }
    Ok(buf)
}

fn decode_payload<T: Element>(rows: usize, cols: usize, payload: &[u8]) -> Result<Matrix<T>> {
    let width = T::DTYPE.byte_width();
    let data = payload
        .chunks_exact(width)
        .map(T::from_le_slice)
        .collect::<Vec<_>>();
    Matrix::from_vec(rows, cols, data)
}
