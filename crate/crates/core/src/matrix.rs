//! Dense row-major matrices, seeded generation and the raw binary format.
//!
//! Binary layout (all little-endian):
//!
//! | offset | size | field                       |
//! |--------|------|-----------------------------|
//! | 0      | 4    | magic `SKMX`                |
//! | 4      | 4    | dtype tag (1 i64, 2 f32, 3 f64) |
//! | 8      | 4    | rows (u32)                  |
//! | 12     | 4    | cols (u32)                  |
//! | 16     | ...  | `rows * cols` elements, row-major |

use std::io::{Read, Write};

use rand_core::SeedableRng;
use rand_xoshiro::SplitMix64;

use crate::domain::DType;
use crate::error::{Error, Result};
use crate::scalar::Element;

pub const MAGIC: [u8; 4] = *b"SKMX";
pub const HEADER_LEN: usize = 16;

#[derive(Clone, Debug, PartialEq)]
pub struct Matrix<E> {
    rows: usize,
    cols: usize,
    data: Vec<E>,
}

impl<E: Element> Matrix<E> {
    pub fn zeros(rows: usize, cols: usize) -> Self {
        Self { rows, cols, data: vec![E::zero(); rows * cols] }
    }

    pub fn from_vec(rows: usize, cols: usize, data: Vec<E>) -> Result<Self> {
        if data.len() != rows * cols {
            return Err(Error::InvalidShape(format!(
                "buffer of {} elements cannot be {rows}x{cols}",
                data.len()
            )));
        }
        Ok(Self { rows, cols, data })
    }

    pub fn from_fn(rows: usize, cols: usize, mut f: impl FnMut(usize, usize) -> E) -> Self {
        let mut data = Vec::with_capacity(rows * cols);
        for r in 0..rows {
            for c in 0..cols {
                data.push(f(r, c));
            }
        }
        Self { rows, cols, data }
    }

    pub fn identity(n: usize) -> Self {
        Self::from_fn(n, n, |r, c| if r == c { E::one() } else { E::zero() })
    }

    /// Fills row-major from a SplitMix64 stream seeded with `seed`, one draw
    /// per element (see [`Element::sample`]).
    pub fn random(rows: usize, cols: usize, seed: u64) -> Self {
        let mut rng = SplitMix64::seed_from_u64(seed);
        let data = (0..rows * cols).map(|_| E::sample(&mut rng)).collect();
        Self { rows, cols, data }
    }

    pub fn rows(&self) -> usize {
        self.rows
    }

    pub fn cols(&self) -> usize {
        self.cols
    }

    pub fn as_slice(&self) -> &[E] {
        &self.data
    }

    pub fn as_mut_slice(&mut self) -> &mut [E] {
        &mut self.data
    }

    pub fn get(&self, r: usize, c: usize) -> E {
        self.data[r * self.cols + c]
    }

    pub fn set(&mut self, r: usize, c: usize, v: E) {
        self.data[r * self.cols + c] = v;
    }

    pub fn row(&self, r: usize) -> &[E] {
        &self.data[r * self.cols..(r + 1) * self.cols]
    }

    pub fn to_bytes(&self) -> Vec<u8> {
        let mut out = Vec::with_capacity(HEADER_LEN + self.data.len() * E::BYTES);
        out.extend_from_slice(&MAGIC);
        out.extend_from_slice(&E::DTYPE.tag().to_le_bytes());
        out.extend_from_slice(&(self.rows as u32).to_le_bytes());
        out.extend_from_slice(&(self.cols as u32).to_le_bytes());
        for &v in &self.data {
            v.write_le(&mut out);
        }
        out
    }

    pub fn from_bytes(bytes: &[u8]) -> Result<Self> {
        let header = read_header(bytes)?;
        if header.dtype != E::DTYPE {
            return Err(Error::Parse(format!(
                "matrix holds {} elements, expected {}",
                header.dtype,
                E::DTYPE
            )));
        }
        let body = &bytes[HEADER_LEN..];
        let expected = header.rows * header.cols * E::BYTES;
        if body.len() != expected {
            return Err(Error::Parse(format!(
                "matrix body is {} bytes, expected {expected}",
                body.len()
            )));
        }
        let data = body.chunks_exact(E::BYTES).map(E::read_le).collect();
        Ok(Self { rows: header.rows, cols: header.cols, data })
    }

    pub fn write_to<W: Write>(&self, mut w: W) -> Result<()> {
        w.write_all(&self.to_bytes())?;
        Ok(())
    }

    pub fn read_from<R: Read>(mut r: R) -> Result<Self> {
        let mut bytes = Vec::new();
        r.read_to_end(&mut bytes)?;
        Self::from_bytes(&bytes)
    }
}

/// Decoded fixed-size header of the binary format.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct MatrixHeader {
    pub dtype: DType,
    pub rows: usize,
    pub cols: usize,
}

pub fn read_header(bytes: &[u8]) -> Result<MatrixHeader> {
    if bytes.len() < HEADER_LEN {
        return Err(Error::Parse("matrix file shorter than its header".into()));
    }
    if bytes[..4] != MAGIC {
        return Err(Error::Parse("bad matrix magic".into()));
    }
    let word = |i: usize| u32::from_le_bytes(bytes[i..i + 4].try_into().unwrap());
    let dtype = DType::from_tag(word(4))
        .ok_or_else(|| Error::Parse(format!("unknown dtype tag {}", word(4))))?;
    Ok(MatrixHeader { dtype, rows: word(8) as usize, cols: word(12) as usize })
}
