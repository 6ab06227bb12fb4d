//! Two's-complement fixed-point emulation in the style of `ap_fixed<T, I>`.
//!
//! Values carry their format at runtime. Quantization is round-half-up
//! (ties go towards +inf) and overflow saturates at the range bounds; both
//! happen after every operation. Addition and subtraction never round, so
//! sums are associative as long as no partial sum saturates.

use core::cmp::Ordering;
use core::fmt;
use core::ops::{Add, Mul, Neg, Sub};
use core::str::FromStr;

use thiserror::Error;

/// Format of a fixed-point number: `total_bits` including the sign bit,
/// `int_bits` of which sit left of the binary point (sign included).
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub struct FixedSpec {
    total_bits: u32,
    int_bits: u32,
}

#[derive(Clone, Debug, PartialEq, Eq, Error)]
pub enum FixedError {
    #[error("invalid fixed-point format <{total},{int}>: need 2 <= T <= 64 and 1 <= I <= T")]
    InvalidSpec { total: u32, int: u32 },
    #[error("cannot parse fixed-point format `{0}`, expected `T,I`")]
    Parse(alloc::string::String),
    #[error("operands have different formats <{0}> and <{1}>")]
    SpecMismatch(FixedSpec, FixedSpec),
    #[error("fixed-point division by zero")]
    DivisionByZero,
}

impl FixedSpec {
    pub const fn new(total_bits: u32, int_bits: u32) -> Result<Self, FixedError> {
        if total_bits < 2 || total_bits > 64 || int_bits < 1 || int_bits > total_bits {
            return Err(FixedError::InvalidSpec {
                total: total_bits,
                int: int_bits,
            });
        }
        Ok(Self {
            total_bits,
            int_bits,
        })
    }

    /// `<50,20>`, the format used throughout the hardware experiments.
    pub const fn default_hw() -> Self {
        Self {
            total_bits: 50,
            int_bits: 20,
        }
    }

    pub const fn total_bits(self) -> u32 {
        self.total_bits
    }

    pub const fn int_bits(self) -> u32 {
        self.int_bits
    }

    pub const fn frac_bits(self) -> u32 {
        self.total_bits - self.int_bits
    }

    pub const fn max_raw(self) -> i64 {
        ((1i128 << (self.total_bits - 1)) - 1) as i64
    }

    pub const fn min_raw(self) -> i64 {
        (-(1i128 << (self.total_bits - 1))) as i64
    }

    /// Weight of the least significant bit, `2^-F`.
    pub fn ulp(self) -> f64 {
        crate::math::pow2(-(self.frac_bits() as i32))
    }

    pub fn max_value(self) -> f64 {
        self.max_raw() as f64 * self.ulp()
    }

    pub fn min_value(self) -> f64 {
        self.min_raw() as f64 * self.ulp()
    }

    fn clamp(self, raw: i128) -> (i64, bool) {
        let (lo, hi) = (self.min_raw() as i128, self.max_raw() as i128);
        if raw > hi {
            (hi as i64, true)
        } else if raw < lo {
            (lo as i64, true)
        } else {
            (raw as i64, false)
        }
    }
}

impl fmt::Display for FixedSpec {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{},{}", self.total_bits, self.int_bits)
    }
}

impl FromStr for FixedSpec {
    type Err = FixedError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        let bad = || FixedError::Parse(s.into());
        let (t, i) = s.split_once(',').ok_or_else(bad)?;
        let t = t.trim().parse::<u32>().map_err(|_| bad())?;
        let i = i.trim().parse::<u32>().map_err(|_| bad())?;
        Self::new(t, i)
    }
}

/// A fixed-point number: `raw * 2^-F` in the format `spec`.
///
/// `saturated` records whether the operation that produced this value had to
/// clamp. It does not take part in equality.
#[derive(Clone, Copy, Debug)]
pub struct FixedValue {
    raw: i64,
    spec: FixedSpec,
    saturated: bool,
}

impl PartialEq for FixedValue {
    fn eq(&self, other: &Self) -> bool {
        self.raw == other.raw && self.spec == other.spec
    }
}

impl Eq for FixedValue {}

impl PartialOrd for FixedValue {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        (self.spec == other.spec).then(|| self.raw.cmp(&other.raw))
    }
}

/// Round `v / 2^k` half-up, i.e. `floor(v / 2^k + 1/2)`.
fn shr_round_half_up(v: i128, k: u32) -> i128 {
    if k == 0 {
        v
    } else if k >= 127 {
        // |v| < 2^126 here, so the quotient rounds to zero either way.
        0
    } else {
        (v + (1i128 << (k - 1))) >> k
    }
}

impl FixedValue {
    pub fn zero(spec: FixedSpec) -> Self {
        Self::from_raw(0, spec)
    }

    /// Builds a value from a raw mantissa, saturating it into range.
    pub fn from_raw(raw: i64, spec: FixedSpec) -> Self {
        let (raw, saturated) = spec.clamp(raw as i128);
        Self {
            raw,
            spec,
            saturated,
        }
    }

    /// Quantizes `x` exactly: round-half-up of `x * 2^F`, then saturate.
    ///
    /// The conversion works on the binary expansion of `x`, so no intermediate
    /// floating-point rounding occurs. NaN maps to zero and is flagged as
    /// saturated; infinities clamp to the matching bound.
    pub fn from_real(x: f64, spec: FixedSpec) -> Self {
        if x.is_nan() {
            return Self {
                raw: 0,
                spec,
                saturated: true,
            };
        }
        if x.is_infinite() {
            let raw = if x > 0.0 {
                spec.max_raw()
            } else {
                spec.min_raw()
            };
            return Self {
                raw,
                spec,
                saturated: true,
            };
        }
        let (mantissa, exp) = crate::math::decompose(x);
        let shift = exp + spec.frac_bits() as i32;
        let raw = if mantissa == 0 {
            0
        } else if shift >= 0 {
            // |mantissa| < 2^54; anything shifted past 2^70 saturates anyway.
            let s = shift.min(70) as u32;
            (mantissa as i128) << s
        } else {
            shr_round_half_up(mantissa as i128, (-shift) as u32)
        };
        let (raw, saturated) = spec.clamp(raw);
        Self {
            raw,
            spec,
            saturated,
        }
    }

    pub fn to_real(self) -> f64 {
        self.raw as f64 * self.spec.ulp()
    }

    pub fn raw(self) -> i64 {
        self.raw
    }

    pub fn spec(self) -> FixedSpec {
        self.spec
    }

    pub fn is_saturated(self) -> bool {
        self.saturated
    }

    fn same_spec(self, rhs: Self) -> Result<FixedSpec, FixedError> {
        if self.spec == rhs.spec {
            Ok(self.spec)
        } else {
            Err(FixedError::SpecMismatch(self.spec, rhs.spec))
        }
    }

    fn with_raw(spec: FixedSpec, raw: i128) -> Self {
        let (raw, saturated) = spec.clamp(raw);
        Self {
            raw,
            spec,
            saturated,
        }
    }

    pub fn try_add(self, rhs: Self) -> Result<Self, FixedError> {
        let spec = self.same_spec(rhs)?;
        Ok(Self::with_raw(spec, self.raw as i128 + rhs.raw as i128))
    }

    pub fn try_sub(self, rhs: Self) -> Result<Self, FixedError> {
        let spec = self.same_spec(rhs)?;
        Ok(Self::with_raw(spec, self.raw as i128 - rhs.raw as i128))
    }

    /// Full 2T-bit product, shifted back by F bits with round-half-up.
    pub fn try_mul(self, rhs: Self) -> Result<Self, FixedError> {
        let spec = self.same_spec(rhs)?;
        let wide = self.raw as i128 * rhs.raw as i128;
        Ok(Self::with_raw(
            spec,
            shr_round_half_up(wide, spec.frac_bits()),
        ))
    }

    /// `(a << F) / b`, rounded half-up on the exact rational quotient.
    pub fn try_div(self, rhs: Self) -> Result<Self, FixedError> {
        let spec = self.same_spec(rhs)?;
        if rhs.raw == 0 {
            return Err(FixedError::DivisionByZero);
        }
        let (mut num, mut den) = ((self.raw as i128) << spec.frac_bits(), rhs.raw as i128);
        if den < 0 {
            num = -num;
            den = -den;
        }
        // floor(num/den + 1/2) == floor((2 num + den) / (2 den)) for den > 0.
        let q = (2 * num + den).div_euclid(2 * den);
        Ok(Self::with_raw(spec, q))
    }
}

fn expect_same<T>(r: Result<T, FixedError>) -> T {
    match r {
        Ok(v) => v,
        Err(e) => panic!("{e}"),
    }
}

/// Panics if the formats differ; use [`FixedValue::try_add`] to get an error.
impl Add for FixedValue {
    type Output = Self;
    fn add(self, rhs: Self) -> Self {
        expect_same(self.try_add(rhs))
    }
}

/// Panics if the formats differ; use [`FixedValue::try_sub`] to get an error.
impl Sub for FixedValue {
    type Output = Self;
    fn sub(self, rhs: Self) -> Self {
        expect_same(self.try_sub(rhs))
    }
}

/// Panics if the formats differ; use [`FixedValue::try_mul`] to get an error.
impl Mul for FixedValue {
    type Output = Self;
    fn mul(self, rhs: Self) -> Self {
        expect_same(self.try_mul(rhs))
    }
}

impl Neg for FixedValue {
    type Output = Self;
    fn neg(self) -> Self {
        Self::with_raw(self.spec, -(self.raw as i128))
    }
}

impl fmt::Display for FixedValue {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.to_real())
    }
}
