//! High-precision logarithmic constants with certified error bounds.
//!
//! Everything here reduces to the atanh series on arguments in `[0, 1/3]`:
//! `ln m = 2 atanh((m-1)/(m+1))` for the mantissa in `[1, 2)`, plus exact
//! exponent bookkeeping with a cached `ln 2`. Errors ride along automatically
//! through [`FixedReal`] arithmetic; each public constant is re-computed with
//! more guard bits until its certified bound meets the request.

use std::collections::HashMap;
use std::sync::RwLock;

use num_bigint::{BigInt, BigUint};
use num_integer::{Integer, Roots};
use num_rational::BigRational;
use num_traits::{One, Signed, ToPrimitive, Zero};

use super::real::{ErrBound, FixedReal};
use crate::error::{Error, Result};

const GUARD_BITS: u32 = 32;
const MAX_RETRIES: u32 = 5;

/// `atanh(z)` for a non-negative `z <= 0.35` at the working scale of `z`.
fn atanh_series(z: &FixedReal) -> FixedReal {
    let w = z.frac_bits();
    let z2 = z.mul(z);
    let z2f = z2.to_f64().min(0.125);
    let mut acc = z.clone();
    let mut term = z.clone();
    let mut k = 1u64;
    loop {
        term = term.mul(&z2);
        let t = term.div_u64(2 * k + 1);
        acc = acc.add(&t);
        k += 1;
        if term.mag_log2_upper() < -((w + 2) as f64) || k > 4 * w as u64 {
            break;
        }
    }
    // geometric tail: |sum of remaining terms| <= |term| * z^2 / (1 - z^2)
    let tail = term.mag_log2_upper() + z2f.log2() - (1.0 - z2f).log2();
    FixedReal::from_parts(
        acc.mantissa().clone(),
        acc.frac_bits(),
        acc.err().plus(ErrBound::from_log2(tail)),
    )
}

/// `atan(1/q)` for an integer `q >= 2`, at `w` fractional bits.
fn atan_recip(q: u64, w: u32) -> FixedReal {
    let x = FixedReal::from_ratio(&BigRational::new(BigInt::one(), BigInt::from(q)), w);
    let x2 = x.mul(&x);
    let mut acc = x.clone();
    let mut term = x.clone();
    let mut k = 1u64;
    let mut sign_neg = true;
    loop {
        term = term.mul(&x2);
        let t = term.div_u64(2 * k + 1);
        acc = if sign_neg { acc.sub(&t) } else { acc.add(&t) };
        sign_neg = !sign_neg;
        k += 1;
        if term.mag_log2_upper() < -((w + 2) as f64) || k > 4 * w as u64 {
            break;
        }
    }
    // alternating series: tail bounded by the first omitted term
    FixedReal::from_parts(
        acc.mantissa().clone(),
        acc.frac_bits(),
        acc.err().plus(ErrBound::from_log2(term.mag_log2_upper())),
    )
}

fn ln2_raw(w: u32) -> FixedReal {
    // ln 2 = 2 atanh(1/3)
    let third = FixedReal::from_ratio(&BigRational::new(BigInt::one(), BigInt::from(3)), w);
    atanh_series(&third).mul_int(&BigInt::from(2))
}

static LN2_CACHE: RwLock<Option<(u32, FixedReal)>> = RwLock::new(None);
static PI_CACHE: RwLock<Option<(u32, FixedReal)>> = RwLock::new(None);

/// `ln 2` with certified error at most `2^-bits`.
pub fn ln2(bits: u32) -> FixedReal {
    if let Some((b, v)) = LN2_CACHE.read().unwrap().as_ref() {
        if *b >= bits {
            return v.rescale(bits + GUARD_BITS);
        }
    }
    let mut w = bits + GUARD_BITS;
    for _ in 0..MAX_RETRIES {
        let v = ln2_raw(w);
        if v.err().within_bits(bits) {
            let mut guard = LN2_CACHE.write().unwrap();
            let stale = guard.as_ref().map(|(b, _)| *b < bits).unwrap_or(true);
            if stale {
                *guard = Some((bits, v.clone()));
            }
            return v;
        }
        w += 64;
    }
    unreachable!("ln2 failed to converge at {w} bits");
}

/// `pi` with certified error at most `2^-bits` (Machin's formula).
pub fn pi(bits: u32) -> FixedReal {
    if let Some((b, v)) = PI_CACHE.read().unwrap().as_ref() {
        if *b >= bits {
            return v.rescale(bits + GUARD_BITS);
        }
    }
    let mut w = bits + GUARD_BITS;
    for _ in 0..MAX_RETRIES {
        let v = atan_recip(5, w)
            .mul_int(&BigInt::from(16))
            .sub(&atan_recip(239, w).mul_int(&BigInt::from(4)));
        if v.err().within_bits(bits) {
            let mut guard = PI_CACHE.write().unwrap();
            let stale = guard.as_ref().map(|(b, _)| *b < bits).unwrap_or(true);
            if stale {
                *guard = Some((bits, v.clone()));
            }
            return v;
        }
        w += 64;
    }
    unreachable!("pi failed to converge");
}

/// Natural log of a positive integer at `w` working fractional bits.
///
/// Splits `n = m * 2^e` with `m` in `[1, 2)` and runs the atanh series on
/// `(m-1)/(m+1) <= 1/3`.
pub fn ln_biguint(n: &BigUint, w: u32) -> FixedReal {
    debug_assert!(!n.is_zero());
    if n.is_one() {
        return FixedReal::zero();
    }
    let e = (n.bits() - 1) as u32;
    // m at scale w: n * 2^(w - e), truncating if n is wider than w bits
    let m = if e <= w {
        FixedReal::from_parts(BigInt::from(n.clone()) << (w - e), w, ErrBound::ZERO)
    } else {
        let q = BigInt::from(n >> (e - w));
        FixedReal::from_parts(q, w, ErrBound::ulp(w))
    };
    let one = FixedReal::from_int(1).rescale(w);
    let z = m.sub(&one).div(&m.add(&one)).expect("m + 1 > 0");
    let ln_m = atanh_series(&z).mul_int(&BigInt::from(2));
    ln_m.add(&ln2(w).mul_int(&BigInt::from(e)))
}

/// Natural log of a positive rational at `w` working fractional bits.
pub fn ln_rational(x: &BigRational, w: u32) -> Result<FixedReal> {
    if !x.is_positive() {
        return Err(Error::InvalidInput(format!("ln of a non-positive value {x}")));
    }
    let num = x.numer().to_biguint().expect("positive");
    let den = x.denom().to_biguint().expect("positive");
    Ok(ln_biguint(&num, w).sub(&ln_biguint(&den, w)))
}

/// Is `x` an exact integer power of `base`? Returns the exponent.
fn exact_power_of(x: &BigRational, base: u32) -> Option<i64> {
    if x.is_one() {
        return Some(0);
    }
    let b = BigInt::from(base);
    let check = |mut v: BigInt| -> Option<i64> {
        let mut k = 0i64;
        while v > BigInt::one() {
            let (q, r) = v.div_rem(&b);
            if !r.is_zero() {
                return None;
            }
            v = q;
            k += 1;
        }
        Some(k)
    };
    if x.denom().is_one() {
        check(x.numer().clone())
    } else if x.numer().is_one() {
        check(x.denom().clone()).map(|k| -k)
    } else {
        None
    }
}

type LogKey = (BigRational, u32, u32);
static LOG_CACHE: RwLock<Option<HashMap<LogKey, FixedReal>>> = RwLock::new(None);

/// `log_base(x)` with certified error at most `2^-bits`; exact (zero error)
/// when `x` is an integer power of the base.
///
/// Results are cached per `(x, base, bits)`; concurrent insertion is
/// idempotent because the computation is deterministic.
pub fn log_const(x: &BigRational, base: u32, bits: u32) -> Result<FixedReal> {
    if !x.is_positive() {
        return Err(Error::InvalidInput(format!("log of non-positive value {x}")));
    }
    if base < 2 {
        return Err(Error::InvalidInput(format!("base {base} must be >= 2")));
    }
    if let Some(k) = exact_power_of(x, base) {
        return Ok(FixedReal::from_int(k));
    }
    let key = (x.clone(), base, bits);
    if let Some(map) = LOG_CACHE.read().unwrap().as_ref() {
        if let Some(v) = map.get(&key) {
            return Ok(v.clone());
        }
    }
    let mut w = bits + GUARD_BITS;
    for _ in 0..MAX_RETRIES {
        let lnx = ln_rational(x, w)?;
        let lnb = ln_biguint(&BigUint::from(base), w);
        let q = lnx.div(&lnb)?;
        if q.err().within_bits(bits) {
            let mut guard = LOG_CACHE.write().unwrap();
            guard.get_or_insert_with(HashMap::new).insert(key, q.clone());
            return Ok(q);
        }
        w += 64;
    }
    Err(Error::Internal(format!("log_const({x}, {base}) failed to reach 2^-{bits}")))
}

/// `ln(base)` with certified error at most `2^-bits` (cached via log path).
pub fn ln_base(base: u32, bits: u32) -> FixedReal {
    let mut w = bits + GUARD_BITS;
    loop {
        let v = ln_biguint(&BigUint::from(base), w);
        if v.err().within_bits(bits) {
            return v;
        }
        w += 64;
    }
}

/// `n^(p/q)` for `n >= 1` at `w` fractional bits via an exact integer root:
/// `floor((n^p << q*w)^(1/q)) * 2^-w`, error at most one ulp.
pub fn pow_rational(n: u64, p: &BigInt, q: u64, w: u32) -> Result<FixedReal> {
    if n == 0 {
        return Err(Error::InvalidInput("0^beta is not supported".into()));
    }
    let (p_abs, neg) = (p.abs().to_biguint().expect("abs"), p.is_negative());
    let p_u32 = p_abs
        .to_u32()
        .ok_or_else(|| Error::InvalidInput(format!("exponent numerator {p} too large")))?;
    let base = BigUint::from(n).pow(p_u32);
    let shifted = base << (q as usize * w as usize);
    let root = shifted.nth_root(q as u32);
    let v = FixedReal::from_parts(BigInt::from(root), w, ErrBound::ulp(w));
    if neg {
        FixedReal::from_int(1).rescale(w).div(&v)
    } else {
        Ok(v)
    }
}

/// Natural log of the top bits of a large positive integer: truncating `n`
/// to its top `keep` bits perturbs `ln n` by at most `2^(1-keep)`.
pub fn ln_biguint_truncated(n: &BigUint, keep: u32, w: u32) -> FixedReal {
    if n.bits() <= keep as u64 {
        return ln_biguint(n, w);
    }
    let drop = n.bits() - keep as u64;
    let top = n >> drop;
    let ln_top = ln_biguint(&top, w);
    let shift = ln2(w).mul_int(&BigInt::from(drop));
    let v = ln_top.add(&shift);
    FixedReal::from_parts(
        v.mantissa().clone(),
        v.frac_bits(),
        v.err().plus(ErrBound::from_log2(1.0 - keep as f64)),
    )
}
