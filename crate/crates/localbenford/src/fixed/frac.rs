//! Exact residues modulo 1 in 128-bit fixed point.
//!
//! A [`FracValue`] holds a real number in `[0, 1)` as an unsigned 128-bit
//! integer scaled by `2^-128`. Addition and integer scaling wrap modulo 1 and
//! are exact: wrapping arithmetic on the raw bits *is* arithmetic mod 1, so no
//! rounding ever occurs after construction.

use num_bigint::BigInt;
use num_traits::{Signed, ToPrimitive};

/// Fractional bits of a [`FracValue`]. Fixed at two 64-bit words.
pub const FRAC_BITS: u32 = 128;

/// An exact element of the circle group R/Z at resolution `2^-128`.
#[derive(Copy, Clone, PartialEq, Eq, PartialOrd, Ord, Hash, Default)]
pub struct FracValue(u128);

impl FracValue {
    pub const ZERO: FracValue = FracValue(0);
    /// One half, exactly.
    pub const HALF: FracValue = FracValue(1u128 << 127);

    #[inline]
    pub const fn from_bits(bits: u128) -> Self {
        FracValue(bits)
    }

    #[inline]
    pub const fn bits(self) -> u128 {
        self.0
    }

    /// `(self + other) mod 1`, exact.
    #[inline]
    pub const fn add_mod1(self, other: FracValue) -> FracValue {
        FracValue(self.0.wrapping_add(other.0))
    }

    /// `(-self) mod 1`, exact.
    #[inline]
    pub const fn neg_mod1(self) -> FracValue {
        FracValue(self.0.wrapping_neg())
    }

    /// `(self - other) mod 1`, exact.
    #[inline]
    pub const fn sub_mod1(self, other: FracValue) -> FracValue {
        FracValue(self.0.wrapping_sub(other.0))
    }

    /// `(m * self) mod 1`, exact for any machine-word integer `m`.
    ///
    /// Wrapping multiplication of the raw bits computes `m * a mod 2^128`,
    /// which is exactly `m * (a/2^128) mod 1` rescaled.
    #[inline]
    pub const fn scale_mod1(self, m: i64) -> FracValue {
        let mag = self.0.wrapping_mul(m.unsigned_abs() as u128);
        if m < 0 {
            FracValue(mag.wrapping_neg())
        } else {
            FracValue(mag)
        }
    }

    /// `(m * self) mod 1` for an arbitrary-precision integer `m`, exact.
    pub fn scale_mod1_big(self, m: &BigInt) -> FracValue {
        let mask = BigInt::from(u128::MAX);
        let red = (m.abs() & mask).to_u128().expect("masked to 128 bits");
        let mag = self.0.wrapping_mul(red);
        if m.is_negative() {
            FracValue(mag.wrapping_neg())
        } else {
            FracValue(mag)
        }
    }

    /// Circular distance to `other` in raw ulps: `min(d, 2^128 - d)`.
    #[inline]
    pub fn circ_dist_bits(self, other: FracValue) -> u128 {
        let d = self.0.wrapping_sub(other.0);
        d.min(d.wrapping_neg())
    }

    /// Distance to 0 on the circle, as a real in `[0, 1/2]`.
    pub fn dist_to_zero(self) -> f64 {
        let d = self.0.min(self.0.wrapping_neg());
        frac_bits_to_f64(d)
    }

    /// Approximate value in `[0, 1)` (rounded to double precision).
    pub fn to_f64(self) -> f64 {
        frac_bits_to_f64(self.0)
    }

    /// Test helper: nearest representable value to an `f64` in `[0, 1)`.
    pub fn from_f64(x: f64) -> Self {
        let x = x.rem_euclid(1.0);
        let hi = (x * 18446744073709551616.0).floor(); // x * 2^64
        let lo = ((x * 18446744073709551616.0) - hi) * 18446744073709551616.0;
        FracValue(((hi as u128) << 64) | (lo as u128 & (u64::MAX as u128)))
    }
}

#[inline]
fn frac_bits_to_f64(v: u128) -> f64 {
    ((v >> 64) as u64 as f64) * 2f64.powi(-64) + (v as u64 as f64) * 2f64.powi(-128)
}

impl std::fmt::Debug for FracValue {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        write!(f, "FracValue({:#034x} ~ {:.18})", self.0, self.to_f64())
    }
}

impl std::fmt::Display for FracValue {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        // 30 exact decimal digits of v / 2^128, by long multiplication.
        let mut hi = (self.0 >> 64) as u64;
        let mut lo = self.0 as u64;
        let mut s = String::with_capacity(32);
        s.push_str("0.");
        for _ in 0..30 {
            // (hi, lo) *= 10, capturing the overflow digit
            let lo10 = (lo as u128) * 10;
            let hi10 = (hi as u128) * 10 + (lo10 >> 64);
            lo = lo10 as u64;
            hi = hi10 as u64;
            let digit = (hi10 >> 64) as u8;
            s.push((b'0' + digit) as char);
        }
        f.write_str(&s)
    }
}

/// A 192-bit residue modulo 1: three little-endian 64-bit limbs.
///
/// Used as the internal accumulator for cumulative-log streams, where the
/// published error budget is tighter than the 128-bit emission grid.
#[derive(Copy, Clone, PartialEq, Eq, Debug, Default)]
pub struct Frac192(pub [u64; 3]);

impl Frac192 {
    pub const ZERO: Frac192 = Frac192([0; 3]);

    /// `(self + other) mod 1`, exact.
    pub fn add(self, other: Frac192) -> Frac192 {
        let mut limbs = [0u64; 3];
        let mut carry = 0u64;
        for i in 0..3 {
            let s = self.0[i] as u128 + other.0[i] as u128 + carry as u128;
            limbs[i] = s as u64;
            carry = (s >> 64) as u64;
        }
        Frac192(limbs)
    }

    /// `(m * self) mod 1`, exact.
    pub fn scale_u64(self, m: u64) -> Frac192 {
        let mut limbs = [0u64; 3];
        let mut carry = 0u64;
        for i in 0..3 {
            let p = self.0[i] as u128 * m as u128 + carry as u128;
            limbs[i] = p as u64;
            carry = (p >> 64) as u64;
        }
        Frac192(limbs)
    }

    /// Truncate to the 128-bit emission grid (drops the low limb).
    pub fn to_frac_value(self) -> FracValue {
        FracValue(((self.0[2] as u128) << 64) | self.0[1] as u128)
    }

    /// `(-self) mod 1`, exact.
    pub fn neg(self) -> Frac192 {
        let mut limbs = [0u64; 3];
        let mut carry = 1u64; // two's complement: !x + 1
        for i in 0..3 {
            let s = (!self.0[i]) as u128 + carry as u128;
            limbs[i] = s as u64;
            carry = (s >> 64) as u64;
        }
        Frac192(limbs)
    }

    /// `(m * self) mod 1` for an arbitrary-precision integer `m`, exact.
    pub fn scale_big(self, m: &BigInt) -> Frac192 {
        use num_bigint::BigUint;
        let mask = (BigUint::from(1u8) << 192) - 1u8;
        let v = BigUint::new(
            self.0
                .iter()
                .flat_map(|&l| [l as u32, (l >> 32) as u32])
                .collect(),
        );
        let prod = (v * m.magnitude()) & mask;
        let mut limbs = [0u64; 3];
        for (i, d) in prod.iter_u64_digits().take(3).enumerate() {
            limbs[i] = d;
        }
        let out = Frac192(limbs);
        if m.is_negative() {
            out.neg()
        } else {
            out
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn fv(x: f64) -> FracValue {
        FracValue::from_f64(x)
    }

    #[test]
    fn wraparound_add() {
        // 0.75 + 0.5 -> 0.25, exactly on dyadics
        let a = FracValue::from_bits(3u128 << 126);
        let b = FracValue::HALF;
        assert_eq!(a.add_mod1(b), FracValue::from_bits(1u128 << 126));
    }

    #[test]
    fn add_identity() {
        let x = fv(0.30103);
        assert_eq!(x.add_mod1(FracValue::ZERO), x);
    }

    #[test]
    fn scale_by_zero_and_dyadic() {
        assert_eq!(fv(0.7313).scale_mod1(0), FracValue::ZERO);
        // 7 * 1/4 mod 1 = 3/4
        let quarter = FracValue::from_bits(1u128 << 126);
        assert_eq!(quarter.scale_mod1(7), FracValue::from_bits(3u128 << 126));
    }

    #[test]
    fn scale_matches_repeated_add_exhaustive() {
        // scale_mod1(a, m) == m-fold repeated addition for |m| <= 10^4
        let a = FracValue::from_bits(0x4d104d427de7fbcc47c4acd605be48bc);
        let mut acc = FracValue::ZERO;
        for m in 0..=10_000i64 {
            assert_eq!(a.scale_mod1(m), acc, "m = {m}");
            assert_eq!(a.scale_mod1(-m), acc.neg_mod1(), "m = -{m}");
            acc = acc.add_mod1(a);
        }
    }

    #[test]
    fn scale_big_matches_small() {
        let a = FracValue::from_bits(0x9a209a84fbcff7988f8959ac0b7c9178);
        for m in [-37i64, -1, 0, 1, 5, 987654321] {
            assert_eq!(a.scale_mod1_big(&BigInt::from(m)), a.scale_mod1(m));
        }
        // reduction mod 2^128 of a large multiplier
        let big = BigInt::from(123u8) << 150;
        assert_eq!(a.scale_mod1_big(&big), FracValue::ZERO.add_mod1(a.scale_mod1_big(&big)));
    }

    #[test]
    fn frac192_roundtrip_and_scale() {
        let x = Frac192([0xdead_beef, 0x0123_4567_89ab_cdef, 0xfedc_ba98_7654_3210]);
        assert_eq!(x.add(Frac192::ZERO), x);
        // scaling by 2 equals doubling
        assert_eq!(x.scale_u64(2), x.add(x));
        let mut acc = Frac192::ZERO;
        for _ in 0..1000 {
            acc = acc.add(x);
        }
        assert_eq!(acc, x.scale_u64(1000));
        assert_eq!(x.scale_big(&BigInt::from(1000)), acc);
        assert_eq!(x.scale_big(&BigInt::from(-1000)), acc.neg());
        assert_eq!(x.add(x.neg()), Frac192::ZERO);
        // reduction of a huge multiplier mod 2^192
        let big = (BigInt::from(1) << 192) + 7;
        assert_eq!(x.scale_big(&big), x.scale_u64(7));
    }

    #[test]
    fn display_exact_decimal() {
        assert_eq!(format!("{}", FracValue::HALF), format!("0.5{}", "0".repeat(29)));
    }

    proptest! {
        #[test]
        fn group_laws(a: u128, b: u128, c: u128) {
            let (a, b, c) = (FracValue(a), FracValue(b), FracValue(c));
            prop_assert_eq!(a.add_mod1(b), b.add_mod1(a));
            prop_assert_eq!(a.add_mod1(b).add_mod1(c), a.add_mod1(b.add_mod1(c)));
            prop_assert_eq!(a.add_mod1(FracValue::ZERO), a);
            prop_assert_eq!(a.add_mod1(a.neg_mod1()), FracValue::ZERO);
        }

        #[test]
        fn scale_distributes(a: u128, m in -1000i64..1000, k in -1000i64..1000) {
            let a = FracValue(a);
            prop_assert_eq!(
                a.scale_mod1(m).add_mod1(a.scale_mod1(k)),
                a.scale_mod1(m + k)
            );
        }

        #[test]
        fn circ_dist_symmetric(a: u128, b: u128) {
            let (a, b) = (FracValue(a), FracValue(b));
            prop_assert_eq!(a.circ_dist_bits(b), b.circ_dist_bits(a));
            prop_assert!(a.circ_dist_bits(b) <= 1u128 << 127);
        }
    }
}
