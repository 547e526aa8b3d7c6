//! Direct high-precision evaluation of `log_base a_n` per family.
//!
//! This is the slow, certified path: used for digit-threshold escalation, for
//! seeding difference tables, and as the input to the difference-operator
//! classifier. Streams cover the fast path.

use std::sync::Mutex;

use num_bigint::{BigInt, BigUint};
use num_rational::BigRational;
use num_traits::{One, Signed, ToPrimitive, Zero};

use super::partition::PartitionTable;
use super::primes::nth_prime;
use super::spec::{PartitionMode, SequenceSpec, Theta};
use super::GenConfig;
use crate::error::{Error, Result};
use crate::fixed::{
    ln2, ln_base, ln_biguint, ln_biguint_truncated, log_const, pi, pow_rational, ErrBound,
    FixedReal,
};

/// Evaluates `n -> log_base(a_n)` as a [`FixedReal`] with a certified bound.
///
/// Precision is configurable per call; the `bits` argument requests roughly
/// `2^-bits` accuracy and the returned bound is authoritative.
pub struct RealEvaluator {
    spec: SequenceSpec,
    base: u32,
    cfg: GenConfig,
    partition_cache: Mutex<PartitionTable>,
}

impl RealEvaluator {
    pub fn new(spec: SequenceSpec, base: u32, cfg: GenConfig) -> Result<RealEvaluator> {
        spec.validate()?;
        if base < 2 {
            return Err(Error::InvalidInput(format!("base {base} must be >= 2")));
        }
        Ok(RealEvaluator { spec, base, cfg, partition_cache: Mutex::new(PartitionTable::new()) })
    }

    pub fn spec(&self) -> &SequenceSpec {
        &self.spec
    }

    pub fn base(&self) -> u32 {
        self.base
    }

    /// `log_base(a_n)` with a certified error bound.
    pub fn eval(&self, n: u64, bits: u32) -> Result<FixedReal> {
        if n == 0 {
            return Err(Error::InvalidInput("sequence indices start at n = 1".into()));
        }
        eval_spec(&self.spec, self.base, n, bits, &self.cfg, Some(&self.partition_cache))
    }
}

fn ilog2_ceil(n: u64) -> u32 {
    64 - n.saturating_sub(1).leading_zeros()
}

fn eval_spec(
    spec: &SequenceSpec,
    base: u32,
    n: u64,
    bits: u32,
    cfg: &GenConfig,
    ptable: Option<&Mutex<PartitionTable>>,
) -> Result<FixedReal> {
    use SequenceSpec::*;
    match spec {
        Geometric { ratio } => {
            let w = bits + ilog2_ceil(n) + 16;
            let c = log_const(ratio, base, w)?;
            Ok(c.mul_int(&BigInt::from(n)))
        }
        PolyExp { base_val, poly } => {
            let p_n = poly.eval(&BigInt::from(n));
            let mag = (p_n.numer().bits() as u32).saturating_sub(p_n.denom().bits() as u32);
            let w = bits + mag + 24;
            let c = log_const(base_val, base, w)?;
            Ok(FixedReal::from_ratio(&p_n, w).mul(&c))
        }
        PowerExp { lambda, gamma, coeff, beta } => {
            let beta_f = beta.to_f64().unwrap_or(1.0);
            let mag = (beta_f * (n as f64).log2()).ceil() as u32 + 8;
            let w = bits + mag + 32;
            let log_lambda = log_const(lambda, base, w)?;
            let log_n = log_const(&BigRational::from(BigInt::from(n)), base, w)?;
            let q = beta
                .denom()
                .to_u64()
                .ok_or_else(|| Error::InvalidInput("beta denominator too large".into()))?;
            let n_beta = pow_rational(n, beta.numer(), q, w)?;
            let exp_term = n_beta
                .mul(&FixedReal::from_ratio(coeff, w))
                .div(&ln_base(base, w))?;
            Ok(log_lambda.add(&FixedReal::from_ratio(gamma, w).mul(&log_n)).add(&exp_term))
        }
        Factorial => {
            let w = bits + ilog2_ceil(n.max(2)) * 2 + 32;
            if n <= cfg.factorial_exact_max {
                let mut f = BigUint::one();
                for m in 2..=n {
                    f *= m;
                }
                let lnf = ln_biguint_truncated(&f, w, w);
                lnf.div(&ln_base(base, w)).map_err(Into::into)
            } else {
                // cumulative: sum of per-term logs at the working precision
                let mut stepper = LnStepper::new(w);
                let mut acc = FixedReal::zero().rescale(w);
                for m in 1..=n {
                    acc = acc.add(stepper.advance_to(m));
                }
                acc.div(&ln_base(base, w)).map_err(Into::into)
            }
        }
        NPowerN => {
            let w = bits + 2 * ilog2_ceil(n.max(2)) + 24;
            let lnn = ln_biguint(&BigUint::from(n), w);
            lnn.mul_int(&BigInt::from(n)).div(&ln_base(base, w)).map_err(Into::into)
        }
        Partition { mode: PartitionMode::Exact } => {
            if n > cfg.partition_max {
                return Err(Error::ExceedsMaximum {
                    what: "exact partition table",
                    n,
                    max: cfg.partition_max,
                });
            }
            let w = bits + ilog2_ceil(n.max(2)) + 24;
            let p = match ptable {
                Some(cache) => cache.lock().unwrap().get(n).clone(),
                None => {
                    let mut t = PartitionTable::new();
                    t.get(n).clone()
                }
            };
            ln_biguint_truncated(&p, w, w).div(&ln_base(base, w)).map_err(Into::into)
        }
        Partition { mode: PartitionMode::Asymptotic } => {
            // log_b p(n) ~ (pi sqrt(2n/3) - ln(4 sqrt(3) n)) / ln b
            let w = bits + ilog2_ceil(n.max(2)) + 40;
            let six_n = 6u64
                .checked_mul(n)
                .ok_or_else(|| Error::UnsupportedRange {
                    family: "partition (asymptotic)",
                    msg: format!("n = {n} overflows the square-root argument"),
                })?;
            let sqrt_term = pow_rational(six_n, &BigInt::one(), 2, w)?.div_u64(3);
            let main = pi(w).mul(&sqrt_term);
            let ln3 = ln_biguint(&BigUint::from(3u32), w);
            let correction = ln2(w)
                .mul_int(&BigInt::from(2))
                .add(&ln3.div_u64(2))
                .add(&ln_biguint(&BigUint::from(n), w));
            main.sub(&correction).div(&ln_base(base, w)).map_err(Into::into)
        }
        FibonacciExp { base_val } => {
            let f_n = super::spec::fib_pair(n).1;
            let w = bits + f_n.bits() as u32 + 16;
            let c = log_const(base_val, base, w)?;
            Ok(c.mul_int(&BigInt::from(f_n)))
        }
        IteratedProduct { inner, height } => {
            eval_iterprod(inner, *height, base, n, bits, cfg)
        }
        DoublyExp { base_val, theta } => doubly_exp_real(base_val, theta, base, n, bits, cfg),
        PrimeExp { base_val } => {
            let p = nth_prime(n);
            let w = bits + ilog2_ceil(p) + 16;
            let c = log_const(base_val, base, w)?;
            Ok(c.mul_int(&BigInt::from(p)))
        }
    }
}

/// Incremental natural log: `ln m` from `ln (m-1)` via `2 atanh(1/(2m-1))`.
pub(crate) struct LnStepper {
    w: u32,
    m: u64,
    ln_m: FixedReal,
}

impl LnStepper {
    pub fn new(w: u32) -> LnStepper {
        LnStepper { w, m: 1, ln_m: FixedReal::zero().rescale(w) }
    }

    pub fn current(&self) -> &FixedReal {
        &self.ln_m
    }

    /// Step to `ln m`; `m` must be the current index or the next one.
    pub fn advance_to(&mut self, m: u64) -> &FixedReal {
        assert!(m == self.m || m == self.m + 1, "LnStepper must advance by one");
        if m == self.m + 1 {
            let delta = atanh_recip(2 * m - 1, self.w).mul_int(&BigInt::from(2));
            self.ln_m = self.ln_m.add(&delta);
            self.m = m;
        }
        &self.ln_m
    }
}

/// `atanh(1/q)` for integer `q >= 3` at `w` fractional bits, by the direct
/// series over integer divisions.
pub(crate) fn atanh_recip(q: u64, w: u32) -> FixedReal {
    let q = BigUint::from(q);
    let q2 = &q * &q;
    let mut term = (BigUint::one() << w) / &q;
    let mut acc = BigInt::from(term.clone());
    let mut k = 1u64;
    let mut ops = 1u64;
    while !term.is_zero() {
        term /= &q2;
        if term.is_zero() {
            break;
        }
        acc += BigInt::from(&term / BigUint::from(2 * k + 1));
        k += 1;
        ops += 1;
    }
    // each truncated division contributes at most one ulp; the dropped tail
    // is below one ulp as well
    let err = ErrBound::from_log2((ops + 2) as f64).times_pow2(-(w as f64));
    FixedReal::from_parts(acc, w, err)
}

fn eval_iterprod(
    inner: &SequenceSpec,
    height: u32,
    base: u32,
    n: u64,
    bits: u32,
    cfg: &GenConfig,
) -> Result<FixedReal> {
    if height == 1 {
        return eval_spec(inner, base, n, bits, cfg, None);
    }
    if n > cfg.iterprod_eval_max {
        return Err(Error::UnsupportedRange {
            family: "iterated-product",
            msg: format!(
                "direct evaluation capped at n = {} (requested {n})",
                cfg.iterprod_eval_max
            ),
        });
    }
    // f^(h)(n) = sum_{m<=n} C(n-m+h-2, h-2) f(m)
    let r = height - 2;
    let weight_bits = ((r as f64 + 1.0) * (n as f64).log2()).ceil() as u32 + 8;
    let w = bits + weight_bits + 48;

    // weights descending in m: j = n-m, weight C(j+r, r)
    let mut weight = BigUint::one(); // j = 0
    let mut acc = FixedReal::zero().rescale(w);

    match inner {
        SequenceSpec::Factorial => {
            // joint incremental pass in the ln domain, divided by ln b once
            let mut stepper = LnStepper::new(w);
            let mut lnfact = FixedReal::zero().rescale(w);
            let mut weights: Vec<BigUint> = Vec::with_capacity(n as usize);
            for j in 0..n {
                if j > 0 {
                    weight = weight * BigUint::from(j + r as u64) / BigUint::from(j);
                }
                weights.push(weight.clone());
            }
            for m in 1..=n {
                lnfact = lnfact.add(stepper.advance_to(m));
                let wgt = &weights[(n - m) as usize];
                acc = acc.add(&lnfact.mul_int(&BigInt::from(wgt.clone())));
            }
            acc.div(&ln_base(base, w)).map_err(Into::into)
        }
        other => {
            let sub = RealEvaluator::new(other.clone(), base, cfg.clone())?;
            for m in (1..=n).rev() {
                let j = n - m;
                if j > 0 {
                    weight = weight * BigUint::from(j + r as u64) / BigUint::from(j);
                }
                let f_m = sub.eval(m, bits + weight_bits + 16)?;
                acc = acc.add(&f_m.mul_int(&BigInt::from(weight.clone())));
            }
            Ok(acc)
        }
    }
}

/// `{theta^n * log_base a}` support: the full real value `theta^n log_base a`.
pub(crate) fn doubly_exp_real(
    base_val: &BigRational,
    theta: &Theta,
    base: u32,
    n: u64,
    bits: u32,
    cfg: &GenConfig,
) -> Result<FixedReal> {
    let log2_theta = theta.approx_f64().log2();
    let needed = (n as f64 * log2_theta).ceil() as u64 + bits as u64 + 64;
    if needed > cfg.dexp_max_bits {
        return Err(Error::DepthExceeded { needed, ceiling: cfg.dexp_max_bits });
    }
    let w = needed as u32;
    let alpha = log_const(base_val, base, w)?;
    match theta {
        Theta::Rational(r) => {
            let n32 = u32::try_from(n).map_err(|_| Error::DepthExceeded {
                needed: n,
                ceiling: u32::MAX as u64,
            })?;
            let num = r.numer().pow(n32);
            let den = r.denom().pow(n32);
            let theta_n = BigRational::new(num, den);
            Ok(FixedReal::from_ratio(&theta_n, w).mul(&alpha))
        }
        Theta::Algebraic { min_poly, approx: _ } => {
            // theta^n as a rational-coefficient combination of theta^0..theta^(k-1)
            let coeffs = theta_power_coeffs(min_poly, n)?;
            let theta_val = theta.value(w)?;
            let mut acc = FixedReal::zero().rescale(w);
            let mut pw = FixedReal::from_int(1).rescale(w);
            for c in &coeffs {
                acc = acc.add(&FixedReal::from_ratio(c, w).mul(&pw));
                pw = pw.mul(&theta_val);
            }
            Ok(acc.mul(&alpha))
        }
    }
}

/// Coefficients of `theta^n` in the basis `1, theta, ..., theta^(k-1)` given
/// the integer polynomial `p` with `p(theta) = 0` (coefficients ascending).
fn theta_power_coeffs(min_poly: &[BigInt], n: u64) -> Result<Vec<BigRational>> {
    let k = min_poly.len() - 1;
    if k == 0 {
        return Err(Error::InvalidInput("minimal polynomial must be non-constant".into()));
    }
    let lead = BigRational::from(min_poly[k].clone());
    if lead.is_zero() {
        return Err(Error::InvalidInput("leading coefficient must be nonzero".into()));
    }
    // reduction: theta^k = -(a_0 + a_1 theta + ... + a_{k-1} theta^{k-1}) / a_k
    let red: Vec<BigRational> = min_poly[..k]
        .iter()
        .map(|a| -BigRational::from(a.clone()) / lead.clone())
        .collect();
    let mut cur = vec![BigRational::zero(); k];
    cur[0] = BigRational::one(); // theta^0
    for _ in 0..n {
        // multiply by theta: shift, then reduce the overflow term
        let overflow = cur[k - 1].clone();
        for i in (1..k).rev() {
            cur[i] = cur[i - 1].clone();
        }
        cur[0] = BigRational::zero();
        if !overflow.is_zero() {
            for i in 0..k {
                let add = &red[i] * &overflow;
                cur[i] = &cur[i] + add;
            }
        }
    }
    Ok(cur)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::generators::spec::parse_spec;

    fn ev(s: &str) -> RealEvaluator {
        RealEvaluator::new(parse_spec(s).unwrap(), 10, GenConfig::default()).unwrap()
    }

    #[test]
    fn factorial_log_at_10() {
        // 10! = 3628800; frozen oracle digits of log10(3628800)
        let v = ev("n!").eval(10, 128).unwrap();
        let s = format!("{v}");
        assert!(s.starts_with("6.55976303287679375117476123996"), "{s}");
    }

    #[test]
    fn npowern_at_1_is_zero() {
        let v = ev("n^n").eval(1, 128).unwrap();
        assert!(v.mantissa().is_zero());
    }

    #[test]
    fn powerexp_e_squared() {
        // lambda=1, gamma=0, c=1, beta=1/2 at n=4: log10(e^2) = 2/ln 10
        let v = ev("powerexp(1,0,1,1/2)").eval(4, 128).unwrap();
        let s = format!("{v}");
        assert!(s.starts_with("0.86858896380650365530225783783"), "{s}");
    }

    #[test]
    fn geometric_scales_linearly() {
        let v = ev("2^n").eval(1_000_000, 128).unwrap();
        // frozen: frac(10^6 log10 2) = 0.99566398119521373889...
        let (fr, _) = v.frac_value();
        let want = 0.995663981195213738894724493026768;
        assert!((fr.to_f64() - want).abs() < 1e-12);
    }

    #[test]
    fn fibonacci_exp_small() {
        // F_10 = 55: log10(2^55) = 55 log10 2 = 16.556649...
        let v = ev("fib-exp(2)").eval(10, 128).unwrap();
        assert_eq!(v.integer_part(), BigInt::from(16));
    }

    #[test]
    fn superfact_matches_exact_integers() {
        // superfactorials 1, 2, 12, 288: frozen frac(log10 288) = 0.4593924877592...
        let e = ev("superfact(2)");
        for (n, sf) in [(1u64, 1u64), (2, 2), (3, 12), (4, 288)] {
            let v = e.eval(n, 160).unwrap();
            let direct = ln_biguint(&BigUint::from(sf), 256)
                .div(&ln_base(10, 256))
                .unwrap();
            let d = v.sub(&direct).to_f64().abs();
            assert!(d <= v.err().plus(direct.err()).to_f64(), "n = {n}: {v} vs {direct}");
        }
        let (fr, _) = e.eval(4, 160).unwrap().frac_value();
        assert!((fr.to_f64() - 0.4593924877592308506587502801).abs() < 1e-12);
    }

    #[test]
    fn doubly_exp_examples() {
        // a=2, theta=2, n=3: frac(8 log10 2) ~ 0.40823996531
        let e = ev("dexp(2,2)");
        let (fr, _) = e.eval(3, 128).unwrap().frac_value();
        assert!((fr.to_f64() - 0.40823996531184956170991115779).abs() < 1e-12);

        // a = base: {theta^n * 1} = 0 exactly
        let eb = RealEvaluator::new(
            parse_spec("dexp(10,2)").unwrap(),
            10,
            GenConfig::default(),
        )
        .unwrap();
        let v = eb.eval(5, 128).unwrap();
        assert!(v.err().is_zero());
        assert_eq!(v.frac_value().0.bits(), 0);

        // theta = phi at n=2: phi^2 = phi + 1; frozen frac(phi^2 log10 2)
        let ephi = ev("dexp(2,phi)");
        let (fr, _) = ephi.eval(2, 128).unwrap().frac_value();
        assert!((fr.to_f64() - 0.78810676028153623936589996226).abs() < 1e-12);
    }

    #[test]
    fn doubly_exp_depth_refusal() {
        let mut cfg = GenConfig::default();
        cfg.dexp_max_bits = 4096;
        let e = RealEvaluator::new(parse_spec("dexp(2,2)").unwrap(), 10, cfg).unwrap();
        assert!(matches!(e.eval(5000, 128), Err(Error::DepthExceeded { .. })));
    }

    #[test]
    fn prime_exp_small() {
        // p_5 = 11: 11 log10 2 = 3.311...
        let v = ev("2^prime(n)").eval(5, 128).unwrap();
        assert_eq!(v.integer_part(), BigInt::from(3));
    }

    #[test]
    fn theta_power_reduction_phi() {
        // phi^10 = 55 phi + 34 (Fibonacci coefficients)
        let poly = vec![BigInt::from(-1), BigInt::from(-1), BigInt::from(1)];
        let c = theta_power_coeffs(&poly, 10).unwrap();
        assert_eq!(c[0], BigRational::from(BigInt::from(34)));
        assert_eq!(c[1], BigRational::from(BigInt::from(55)));
    }

    #[test]
    fn ln_stepper_matches_direct() {
        let mut s = LnStepper::new(192);
        for m in 2..=50u64 {
            s.advance_to(m);
        }
        let direct = ln_biguint(&BigUint::from(50u32), 192);
        let d = s.current().sub(&direct).to_f64().abs();
        assert!(d <= s.current().err().plus(direct.err()).to_f64());
    }
}
