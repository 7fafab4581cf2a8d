//! Signed two's-complement fixed-point words with saturating arithmetic.
//!
//! [`Fixed<FRAC>`] stores a raw `i64` interpreted as `raw / 2^FRAC`. The
//! simulator uses the Q32.32 instantiation, [`Fixed64`]. Every operation
//! clamps into `[i64::MIN, i64::MAX]` raw and reports saturation through
//! [`ArithFlags`] instead of panicking.

use std::fmt;
use std::ops::{Add, Div, Mul, Neg, Sub};

use serde::{Deserialize, Serialize};
use thiserror::Error;

/// Sticky arithmetic status bits accumulated over an execution.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct ArithFlags {
    pub overflow: bool,
    pub div_by_zero: bool,
}

impl ArithFlags {
    pub fn merge(&mut self, other: ArithFlags) {
        self.overflow |= other.overflow;
        self.div_by_zero |= other.div_by_zero;
    }

    pub fn any(&self) -> bool {
        self.overflow || self.div_by_zero
    }

    pub fn clear(&mut self) {
        *self = ArithFlags::default();
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Error)]
pub enum FixedError {
    #[error("cannot convert non-finite value {0} to fixed point")]
    NonFinite(f64),
}

/// Fixed-point number with `FRAC` fractional bits in a 64-bit signed word.
#[derive(Clone, Copy, Default, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(transparent)]
pub struct Fixed<const FRAC: u32> {
    raw: i64,
}

impl<const FRAC: u32> Fixed<FRAC> {
    const FRAC_OK: () = assert!(FRAC >= 1 && FRAC <= 62, "fractional bits must be in 1..=62");

    pub const ZERO: Self = Self { raw: 0 };
    pub const ONE: Self = Self { raw: 1 << FRAC };
    pub const MAX: Self = Self { raw: i64::MAX };
    pub const MIN: Self = Self { raw: i64::MIN };
    /// Smallest positive step, `2^-FRAC`.
    pub const EPSILON: Self = Self { raw: 1 };

    pub const fn from_raw(raw: i64) -> Self {
        #[allow(clippy::let_unit_value)]
        let _ = Self::FRAC_OK;
        Self { raw }
    }

    pub const fn raw(self) -> i64 {
        self.raw
    }

    pub fn is_zero(self) -> bool {
        self.raw == 0
    }

    fn scale() -> f64 {
        (FRAC as f64).exp2()
    }

    /// Nearest representable value to `x`, ties to even, clamped into range.
    pub fn from_real(x: f64) -> Result<Self, FixedError> {
        let mut flags = ArithFlags::default();
        if !x.is_finite() {
            return Err(FixedError::NonFinite(x));
        }
        Ok(Self::from_real_flagged(x, &mut flags))
    }

    /// Hardware converter semantics: out-of-range and infinite inputs
    /// saturate, NaN converts to zero, and both raise the overflow flag.
    pub fn from_real_flagged(x: f64, flags: &mut ArithFlags) -> Self {
        if x.is_nan() {
            flags.overflow = true;
            return Self::ZERO;
        }
        // Scaling by a power of two is exact, so only the final rounding
        // step loses information.
        let scaled = (x * Self::scale()).round_ties_even();
        // 2^63 is exactly representable; anything at or above it saturates.
        let limit = 9_223_372_036_854_775_808.0_f64;
        if scaled >= limit {
            flags.overflow = true;
            Self::MAX
        } else if scaled < -limit {
            flags.overflow = true;
            Self::MIN
        } else {
            Self::from_raw(scaled as i64)
        }
    }

    /// Nearest `f64` to the exact value. Values with more than 53
    /// significant bits are rounded.
    pub fn to_real(self) -> f64 {
        self.raw as f64 / Self::scale()
    }

    fn saturate(wide: i128, flags: &mut ArithFlags) -> Self {
        if wide > i64::MAX as i128 {
            flags.overflow = true;
            Self::MAX
        } else if wide < i64::MIN as i128 {
            flags.overflow = true;
            Self::MIN
        } else {
            Self::from_raw(wide as i64)
        }
    }

    pub fn add(self, rhs: Self, flags: &mut ArithFlags) -> Self {
        Self::saturate(self.raw as i128 + rhs.raw as i128, flags)
    }

    pub fn sub(self, rhs: Self, flags: &mut ArithFlags) -> Self {
        Self::saturate(self.raw as i128 - rhs.raw as i128, flags)
    }

    /// Full 128-bit product shifted right by `FRAC` (floor), then saturated.
    pub fn mul(self, rhs: Self, flags: &mut ArithFlags) -> Self {
        Self::saturate((self.raw as i128 * rhs.raw as i128) >> FRAC, flags)
    }

    /// `(a << FRAC) / b`, truncating toward zero. A zero divisor saturates
    /// toward the sign of the dividend (positive for a zero dividend).
    pub fn div(self, rhs: Self, flags: &mut ArithFlags) -> Self {
        if rhs.raw == 0 {
            flags.div_by_zero = true;
            return if self.raw >= 0 { Self::MAX } else { Self::MIN };
        }
        Self::saturate(((self.raw as i128) << FRAC) / rhs.raw as i128, flags)
    }

    pub fn inv(self, flags: &mut ArithFlags) -> Self {
        Self::ONE.div(self, flags)
    }
}

impl<const FRAC: u32> Add for Fixed<FRAC> {
    type Output = Self;
    fn add(self, rhs: Self) -> Self {
        Fixed::add(self, rhs, &mut ArithFlags::default())
    }
}

impl<const FRAC: u32> Sub for Fixed<FRAC> {
    type Output = Self;
    fn sub(self, rhs: Self) -> Self {
        Fixed::sub(self, rhs, &mut ArithFlags::default())
    }
}

impl<const FRAC: u32> Mul for Fixed<FRAC> {
    type Output = Self;
    fn mul(self, rhs: Self) -> Self {
        Fixed::mul(self, rhs, &mut ArithFlags::default())
    }
}

impl<const FRAC: u32> Div for Fixed<FRAC> {
    type Output = Self;
    fn div(self, rhs: Self) -> Self {
        Fixed::div(self, rhs, &mut ArithFlags::default())
    }
}

impl<const FRAC: u32> Neg for Fixed<FRAC> {
    type Output = Self;
    fn neg(self) -> Self {
        Self::ZERO - self
    }
}

impl<const FRAC: u32> fmt::Debug for Fixed<FRAC> {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "Fixed({} = {:#018x})", self.to_real(), self.raw as u64)
    }
}

impl<const FRAC: u32> fmt::Display for Fixed<FRAC> {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        fmt::Display::fmt(&self.to_real(), f)
    }
}
