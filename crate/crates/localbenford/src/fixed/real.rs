//! Dyadic fixed-point reals with certified error bounds.
//!
//! A [`FixedReal`] is `mantissa * 2^-frac_bits` together with a conservative
//! bound on the absolute distance to the true real value it stands for. Every
//! operation propagates the bound: operand bounds are combined and a rounding
//! ulp is added wherever a mantissa is truncated. Bounds live in log2 domain
//! (see [`ErrBound`]) so they stay meaningful far below the smallest `f64`.

use num_bigint::{BigInt, Sign};
use num_integer::Integer;
use num_rational::BigRational;
use num_traits::{Signed, ToPrimitive, Zero};

use super::frac::{Frac192, FracValue, FRAC_BITS};
use crate::error::{Error, Result};

/// A conservative absolute error bound, stored as `log2(bound)`.
///
/// `NEG_INFINITY` means exactly zero error. Combining bounds rounds up by a
/// hair so the result is always a valid upper bound despite f64 rounding.
#[derive(Copy, Clone, PartialEq, PartialOrd, Debug)]
pub struct ErrBound(f64);

const LOG2_SLACK: f64 = 1e-9;

impl ErrBound {
    pub const ZERO: ErrBound = ErrBound(f64::NEG_INFINITY);

    /// `2^-bits`, one unit in the last place at the given scale.
    pub fn ulp(bits: u32) -> ErrBound {
        ErrBound(-(bits as f64))
    }

    pub fn from_log2(log2: f64) -> ErrBound {
        ErrBound(log2)
    }

    pub fn log2(self) -> f64 {
        self.0
    }

    pub fn is_zero(self) -> bool {
        self.0 == f64::NEG_INFINITY
    }

    /// Upper bound on the sum of two bounds.
    pub fn plus(self, other: ErrBound) -> ErrBound {
        if self.is_zero() {
            return other;
        }
        if other.is_zero() {
            return self;
        }
        let (hi, lo) = if self.0 >= other.0 { (self.0, other.0) } else { (other.0, self.0) };
        ErrBound(hi + (1.0 + (lo - hi).exp2()).log2() + LOG2_SLACK)
    }

    /// Multiply the bound by `2^k`.
    pub fn times_pow2(self, k: f64) -> ErrBound {
        if self.is_zero() {
            return self;
        }
        ErrBound(self.0 + k + LOG2_SLACK)
    }

    pub fn max(self, other: ErrBound) -> ErrBound {
        if self.0 >= other.0 { self } else { other }
    }

    /// Does the bound fit under `2^-bits`?
    pub fn within_bits(self, bits: u32) -> bool {
        self.0 <= -(bits as f64)
    }

    pub fn to_f64(self) -> f64 {
        self.0.exp2()
    }
}

impl std::fmt::Display for ErrBound {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        if self.is_zero() {
            f.write_str("0")
        } else {
            write!(f, "2^{:.1}", self.0)
        }
    }
}

/// A signed dyadic real `mantissa * 2^-frac_bits` with a certified error bound.
#[derive(Clone, Debug)]
pub struct FixedReal {
    mantissa: BigInt,
    frac_bits: u32,
    err: ErrBound,
}

/// Truncate `m * 2^-s` toward zero (drop `s` low bits).
fn shr_trunc(m: &BigInt, s: u32) -> (BigInt, bool) {
    if s == 0 {
        return (m.clone(), false);
    }
    let q = if m.is_negative() { -((-m) >> s) } else { m >> s };
    let exact = (&q << s) == *m;
    (q, !exact)
}

impl FixedReal {
    pub fn zero() -> FixedReal {
        FixedReal { mantissa: BigInt::zero(), frac_bits: 0, err: ErrBound::ZERO }
    }

    pub fn from_int(v: impl Into<BigInt>) -> FixedReal {
        FixedReal { mantissa: v.into(), frac_bits: 0, err: ErrBound::ZERO }
    }

    pub fn from_parts(mantissa: BigInt, frac_bits: u32, err: ErrBound) -> FixedReal {
        FixedReal { mantissa, frac_bits, err }
    }

    /// Nearest representation of `r` at `frac_bits`, truncated toward zero.
    pub fn from_ratio(r: &BigRational, frac_bits: u32) -> FixedReal {
        let scaled = r.numer() << frac_bits;
        let (q, rem) = scaled.div_rem(r.denom());
        let err = if rem.is_zero() { ErrBound::ZERO } else { ErrBound::ulp(frac_bits) };
        FixedReal { mantissa: q, frac_bits, err }
    }

    pub fn mantissa(&self) -> &BigInt {
        &self.mantissa
    }

    pub fn frac_bits(&self) -> u32 {
        self.frac_bits
    }

    pub fn err(&self) -> ErrBound {
        self.err
    }

    pub fn is_zero_exact(&self) -> bool {
        self.mantissa.is_zero() && self.err.is_zero()
    }

    /// log2 of an upper bound on |value|.
    pub fn mag_log2_upper(&self) -> f64 {
        let m = self.mantissa.bits() as f64 - self.frac_bits as f64;
        let e = self.err.log2() + 1.0;
        if self.mantissa.is_zero() { e } else { m.max(e) + 1.0 }
    }

    /// log2 of a lower bound on |value|, `None` if the interval contains 0.
    fn mag_log2_lower(&self) -> Option<f64> {
        if self.mantissa.is_zero() {
            return None;
        }
        let m = self.mantissa.bits() as f64 - 1.0 - self.frac_bits as f64;
        // |value| >= 2^m; subtract err if it bites
        if self.err.log2() >= m - 1.0 {
            None
        } else {
            Some(m - 1.0)
        }
    }

    /// Re-represent at `bits` fractional bits (truncating toward zero when
    /// dropping bits; the truncation ulp is added to the bound).
    pub fn rescale(&self, bits: u32) -> FixedReal {
        if bits >= self.frac_bits {
            FixedReal {
                mantissa: &self.mantissa << (bits - self.frac_bits),
                frac_bits: bits,
                err: self.err,
            }
        } else {
            let (q, inexact) = shr_trunc(&self.mantissa, self.frac_bits - bits);
            let err = if inexact { self.err.plus(ErrBound::ulp(bits)) } else { self.err };
            FixedReal { mantissa: q, frac_bits: bits, err }
        }
    }

    pub fn add(&self, other: &FixedReal) -> FixedReal {
        let bits = self.frac_bits.max(other.frac_bits);
        let a = &self.mantissa << (bits - self.frac_bits);
        let b = &other.mantissa << (bits - other.frac_bits);
        FixedReal { mantissa: a + b, frac_bits: bits, err: self.err.plus(other.err) }
    }

    pub fn sub(&self, other: &FixedReal) -> FixedReal {
        self.add(&other.neg())
    }

    pub fn neg(&self) -> FixedReal {
        FixedReal { mantissa: -&self.mantissa, frac_bits: self.frac_bits, err: self.err }
    }

    /// Product, truncated back to `max(frac_bits)` fractional bits.
    pub fn mul(&self, other: &FixedReal) -> FixedReal {
        let bits = self.frac_bits.max(other.frac_bits);
        let raw = &self.mantissa * &other.mantissa;
        let (q, inexact) = shr_trunc(&raw, self.frac_bits + other.frac_bits - bits);
        let mut err = self
            .err
            .times_pow2(other.mag_log2_upper())
            .plus(other.err.times_pow2(self.mag_log2_upper()));
        if inexact {
            err = err.plus(ErrBound::ulp(bits));
        }
        FixedReal { mantissa: q, frac_bits: bits, err }
    }

    /// Exact product with an integer.
    pub fn mul_int(&self, k: &BigInt) -> FixedReal {
        let kb = k.bits() as f64;
        FixedReal {
            mantissa: &self.mantissa * k,
            frac_bits: self.frac_bits,
            err: self.err.times_pow2(kb),
        }
    }

    /// Quotient at `max(frac_bits)` fractional bits, truncated toward zero.
    ///
    /// Fails if the divisor's certified interval comes too close to zero.
    pub fn div(&self, other: &FixedReal) -> Result<FixedReal> {
        let b_low = other.mag_log2_lower().ok_or_else(|| {
            Error::Internal("division by a value whose error interval contains 0".into())
        })?;
        let bits = self.frac_bits.max(other.frac_bits);
        // a / b = (ma * 2^(bits + fb_b - fa)) / mb, scaled 2^-bits
        let num = &self.mantissa << (bits + other.frac_bits - self.frac_bits);
        let (q, _r) = num.div_rem(&other.mantissa);
        let ab_upper = self.mag_log2_upper() - b_low;
        let err = self
            .err
            .plus(other.err.times_pow2(ab_upper))
            .times_pow2(1.0 - b_low)
            .plus(ErrBound::ulp(bits));
        Ok(FixedReal { mantissa: q, frac_bits: bits, err })
    }

    /// Quotient by a positive machine integer, truncated toward zero.
    pub fn div_u64(&self, k: u64) -> FixedReal {
        debug_assert!(k > 0);
        let (q, _) = self.mantissa.div_rem(&BigInt::from(k));
        let e = self.err.times_pow2(-((k.ilog2()) as f64)).plus(ErrBound::ulp(self.frac_bits));
        FixedReal { mantissa: q, frac_bits: self.frac_bits, err: e }
    }

    /// Floor of the represented value (ignores the error bound).
    pub fn floor_int(&self) -> BigInt {
        self.mantissa.div_floor(&(BigInt::from(1) << self.frac_bits))
    }

    /// Signed integer part, truncated toward zero.
    pub fn integer_part(&self) -> BigInt {
        let (q, _) = shr_trunc(&self.mantissa, self.frac_bits);
        q
    }

    /// Reduce modulo 1 onto the 128-bit grid, truncating toward zero.
    ///
    /// The returned bound covers truncation but is a *linear* bound: if the
    /// true value sits within `err` of an integer the residue may wrap by a
    /// full unit, so callers must treat residues circularly.
    pub fn frac_value(&self) -> (FracValue, ErrBound) {
        let modulus = BigInt::from(1) << self.frac_bits;
        let residue = self.mantissa.mod_floor(&modulus); // in [0, 2^frac_bits)
        let (bits128, err) = if self.frac_bits >= FRAC_BITS {
            let (q, inexact) = shr_trunc(&residue, self.frac_bits - FRAC_BITS);
            let e = if inexact { self.err.plus(ErrBound::ulp(FRAC_BITS)) } else { self.err };
            (q, e)
        } else {
            (residue << (FRAC_BITS - self.frac_bits), self.err)
        };
        let v = bits128.to_u128().unwrap_or(0);
        (FracValue::from_bits(v), err)
    }

    /// Low 192 bits of the mod-1 residue (value must already be at >= 192
    /// fractional bits for this to be exact).
    pub fn frac192(&self) -> Frac192 {
        let scaled = self.rescale(192.max(self.frac_bits));
        let modulus = BigInt::from(1) << scaled.frac_bits;
        let mut residue = scaled.mantissa.mod_floor(&modulus);
        if scaled.frac_bits > 192 {
            residue >>= scaled.frac_bits - 192;
        }
        let digits = residue.to_u64_digits().1;
        let mut limbs = [0u64; 3];
        for (i, d) in digits.into_iter().take(3).enumerate() {
            limbs[i] = d;
        }
        Frac192(limbs)
    }

    pub fn to_f64(&self) -> f64 {
        let b = self.mantissa.bits();
        if b <= 1000 {
            self.mantissa.to_f64().unwrap_or(f64::NAN) * 2f64.powi(-(self.frac_bits as i32))
        } else {
            // avoid overflow: use the top bits and an exponent
            let shift = b - 64;
            let top = (&self.mantissa >> shift).to_f64().unwrap_or(f64::NAN);
            top * 2f64.powf(shift as f64 - self.frac_bits as f64)
        }
    }

    /// Compare with certified interval awareness.
    pub fn cmp_certified(&self, other: &FixedReal) -> CertifiedOrdering {
        let d = self.sub(other);
        if d.mantissa.is_zero() && d.err.is_zero() {
            return CertifiedOrdering::Equal;
        }
        match d.mag_log2_lower() {
            Some(_) => {
                if d.mantissa.is_negative() {
                    CertifiedOrdering::Less
                } else {
                    CertifiedOrdering::Greater
                }
            }
            None => CertifiedOrdering::Overlapping,
        }
    }
}

#[derive(Copy, Clone, PartialEq, Eq, Debug)]
pub enum CertifiedOrdering {
    Less,
    Greater,
    Equal,
    /// The certified intervals overlap; the comparison is undecided.
    Overlapping,
}

impl std::fmt::Display for FixedReal {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        // integer part plus 30 decimals, sign-aware
        let neg = self.mantissa.is_negative();
        let abs = self.mantissa.abs();
        let modulus = BigInt::from(1) << self.frac_bits;
        let (int, mut rem) = abs.div_rem(&modulus);
        let mut s = String::new();
        if neg {
            s.push('-');
        }
        s.push_str(&int.to_string());
        s.push('.');
        for _ in 0..30 {
            rem *= 10;
            let (d, r) = rem.div_rem(&modulus);
            s.push_str(&d.to_string());
            rem = r;
        }
        write!(f, "{s} (err {})", self.err)
    }
}
