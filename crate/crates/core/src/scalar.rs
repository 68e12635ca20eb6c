//! Scalar traits: matrix elements for the executor and time values for the
//! cost model and simulator.

use std::fmt::{Debug, Display};
use std::ops::AddAssign;

use num_traits::{FromPrimitive, Num, NumCast, ToPrimitive};
use rand_core::RngCore;

use crate::domain::DType;

/// Matrix element type the executor can multiply.
///
/// `i64` is the exact element: every reduction order gives the same bits,
/// which is what the equivalence tests lean on. `f32`/`f64` exercise
/// rounding under reassociation.
pub trait Element:
    Num + NumCast + AddAssign + Copy + Send + Sync + Debug + Display + PartialOrd + 'static
{
    const DTYPE: DType;
    /// Width in bytes of the little-endian encoding.
    const BYTES: usize;

    /// Machine epsilon, `None` for exact types.
    fn epsilon() -> Option<f64>;

    /// Draws one element from a seeded stream.
    ///
    /// Integers are uniform on `[-8, 8]`; floats are uniform on `[-1, 1)`
    /// built from the top 53 bits of one 64-bit draw.
    fn sample<R: RngCore>(rng: &mut R) -> Self;

    fn write_le(self, out: &mut Vec<u8>);
    fn read_le(bytes: &[u8]) -> Self;

    fn as_f64(self) -> f64 {
        self.to_f64().unwrap_or(f64::NAN)
    }
}

fn unit_interval<R: RngCore>(rng: &mut R) -> f64 {
    (rng.next_u64() >> 11) as f64 * (1.0 / (1u64 << 53) as f64) * 2.0 - 1.0
}

impl Element for i64 {
    const DTYPE: DType = DType::Int64;
    const BYTES: usize = 8;

    fn epsilon() -> Option<f64> {
        None
    }

    fn sample<R: RngCore>(rng: &mut R) -> Self {
        ((rng.next_u64() >> 33) % 17) as i64 - 8
    }

    fn write_le(self, out: &mut Vec<u8>) {
        out.extend_from_slice(&self.to_le_bytes());
    }

    fn read_le(bytes: &[u8]) -> Self {
        i64::from_le_bytes(bytes.try_into().expect("8-byte element"))
    }
}

impl Element for f32 {
    const DTYPE: DType = DType::Float32;
    const BYTES: usize = 4;

    fn epsilon() -> Option<f64> {
        Some(f32::EPSILON as f64)
    }

    fn sample<R: RngCore>(rng: &mut R) -> Self {
        unit_interval(rng) as f32
    }

    fn write_le(self, out: &mut Vec<u8>) {
        out.extend_from_slice(&self.to_le_bytes());
    }

    fn read_le(bytes: &[u8]) -> Self {
        f32::from_le_bytes(bytes.try_into().expect("4-byte element"))
    }
}

impl Element for f64 {
    const DTYPE: DType = DType::Float64;
    const BYTES: usize = 8;

    fn epsilon() -> Option<f64> {
        Some(f64::EPSILON)
    }

    fn sample<R: RngCore>(rng: &mut R) -> Self {
        unit_interval(rng)
    }

    fn write_le(self, out: &mut Vec<u8>) {
        out.extend_from_slice(&self.to_le_bytes());
    }

    fn read_le(bytes: &[u8]) -> Self {
        f64::from_le_bytes(bytes.try_into().expect("8-byte element"))
    }
}

/// Time/cost value for the analytical model and the simulator.
///
/// Implemented for `f64` and for exact rationals such as
/// `Ratio<i64>`, which keeps utilization figures exact.
pub trait TimeScalar:
    Num + FromPrimitive + ToPrimitive + Copy + PartialOrd + Debug + Display + Send + Sync + 'static
{
    fn from_count(n: usize) -> Self {
        Self::from_usize(n).expect("count representable in time scalar")
    }
}

impl<T> TimeScalar for T where
    T: Num + FromPrimitive + ToPrimitive + Copy + PartialOrd + Debug + Display + Send + Sync + 'static
{
}
