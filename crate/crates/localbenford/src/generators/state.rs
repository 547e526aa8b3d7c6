//! Seekable generator states producing `{log_base a_n}` streams.
//!
//! Families with cheap recurrences (geometric, polynomial exponents,
//! cumulative logs, Fibonacci exponents below the cutover) advance in O(1)
//! exact mod-1 operations per term; the rest evaluate each term directly at
//! the configured per-term precision. Every state tracks a conservative
//! accumulated error bound and faults rather than emitting a value whose
//! bound exceeds the family budget.

use num_bigint::{BigInt, BigUint};
use num_integer::binomial;
use num_traits::One;

use super::evaluator::{atanh_recip, RealEvaluator};
use super::partition::PartitionTable;
use super::primes::PrimeStream;
use super::spec::{fib_pair, PartitionMode, SequenceSpec};
use super::GenConfig;
use crate::error::{Error, Result};
use crate::fixed::{ln_base, log_const, ErrBound, FixedReal, Frac192, FracValue};

/// How `seek_seed` may position a state at `n0 > 1`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub enum SeekPolicy {
    /// Only families with direct O(polylog) positioning.
    DirectOnly,
    /// Replay-only families may re-stream from n = 1 (or advance a sieve).
    AllowReplay,
}

/// A positioned, single-owner stream of `(n, {log_base a_n})`.
pub struct GeneratorState {
    spec: SequenceSpec,
    base: u32,
    cfg: GenConfig,
    next_n: u64,
    kind: Kind,
}

enum Kind {
    Geo {
        step: FracValue,
        step_err: ErrBound,
        cur: FracValue,
        err: ErrBound,
    },
    Poly {
        regs: Vec<FracValue>,
        errs: Vec<ErrBound>,
    },
    /// Per-term direct evaluation (PowerExp, NPowerN, Partition-asymptotic,
    /// DoublyExp, and FibonacciExp past the recurrence cutover).
    Direct {
        eval: RealEvaluator,
    },
    Factorial {
        m: u64,
        ln_m: FixedReal,
        lnb: FixedReal,
        acc: Frac192,
        acc_err: ErrBound,
    },
    PartitionExact {
        table: PartitionTable,
        lnb: FixedReal,
    },
    FibRecur {
        prev: FracValue,
        cur: FracValue,
        prev_err: ErrBound,
        cur_err: ErrBound,
        eval: RealEvaluator,
    },
    IterProd {
        inner: Box<GeneratorState>,
        accs: Vec<FracValue>,
        errs: Vec<ErrBound>,
    },
    PrimeExp {
        primes: PrimeStream,
        c192: Frac192,
        c_err: ErrBound,
    },
}

impl GeneratorState {
    /// Fresh state positioned at n = 1.
    pub fn new(spec: SequenceSpec, base: u32, cfg: GenConfig) -> Result<GeneratorState> {
        spec.validate()?;
        if base < 2 {
            return Err(Error::InvalidInput(format!("base {base} must be >= 2")));
        }
        let kind = Kind::build(&spec, base, &cfg)?;
        Ok(GeneratorState { spec, base, cfg, next_n: 1, kind })
    }

    /// Position at `n0`, bit-identical to streaming from n = 1 and
    /// discarding the first `n0 - 1` terms.
    pub fn seek(
        spec: SequenceSpec,
        base: u32,
        cfg: GenConfig,
        n0: u64,
        policy: SeekPolicy,
    ) -> Result<GeneratorState> {
        if n0 == 0 {
            return Err(Error::InvalidInput("indices start at n = 1".into()));
        }
        let mut st = GeneratorState::new(spec, base, cfg)?;
        if n0 == 1 {
            return Ok(st);
        }
        match (&mut st.kind, &policy) {
            (Kind::Geo { step, step_err, cur, err }, _) => {
                *cur = step.scale_mod1_big(&BigInt::from(n0));
                *err = step_err.times_pow2((n0 as f64).log2() + 1e-9);
                st.next_n = n0;
            }
            (Kind::Poly { regs, errs }, _) => {
                // registers at n0 are exact binomial combinations of the
                // n = 1 seeds, matching the mod-1 additions of streaming
                let seeds = regs.clone();
                let seed_errs = errs.clone();
                let d = regs.len() - 1;
                let shift = BigInt::from(n0 - 1);
                for j in 0..=d {
                    let mut v = FracValue::ZERO;
                    let mut e = ErrBound::ZERO;
                    for (i, seed) in seeds.iter().enumerate().skip(j).take(d - j + 1) {
                        let c = binomial(shift.clone(), BigInt::from(i - j));
                        v = v.add_mod1(seed.scale_mod1_big(&c));
                        e = e.plus(seed_errs[i].times_pow2(c.bits() as f64));
                    }
                    regs[j] = v;
                    errs[j] = e;
                }
                st.next_n = n0;
            }
            (Kind::Direct { .. }, _) => {
                st.next_n = n0;
            }
            (Kind::FibRecur { .. }, _) if n0 > st.cfg.fib_cutover => {
                // direct evaluation regime: the recurrence registers are
                // never consulted past the cutover
                st.next_n = n0;
            }
            (Kind::PrimeExp { primes, .. }, SeekPolicy::AllowReplay) => {
                primes.skip_to(n0 - 1);
                st.next_n = n0;
            }
            (_, SeekPolicy::AllowReplay) => {
                for _ in 1..n0 {
                    st.step()?;
                }
            }
            (_, SeekPolicy::DirectOnly) => {
                return Err(Error::NotSeekable { family: st.spec.family_name() });
            }
        }
        Ok(st)
    }

    pub fn spec(&self) -> &SequenceSpec {
        &self.spec
    }

    pub fn base(&self) -> u32 {
        self.base
    }

    pub fn config(&self) -> &GenConfig {
        &self.cfg
    }

    /// Index of the next term to be emitted.
    pub fn peek_index(&self) -> u64 {
        self.next_n
    }

    /// Does the stream carry an unquantified model error (asymptotic modes)?
    pub fn is_approximate(&self) -> bool {
        matches!(
            self.spec,
            SequenceSpec::Partition { mode: PartitionMode::Asymptotic }
        )
    }

    /// Emit the next `(n, {log_base a_n})`, checking the error budget.
    pub fn next_term(&mut self) -> Result<(u64, FracValue)> {
        let (n, v, e) = self.step()?;
        if !e.within_bits(self.cfg.budget_bits) {
            return Err(Error::PrecisionBudget {
                family: self.spec.family_name(),
                n,
                bound_log2: e.log2(),
                budget_bits: self.cfg.budget_bits,
            });
        }
        Ok((n, v))
    }

    /// Re-evaluate a single term at the given precision, independently of the
    /// stream registers (used for digit-threshold escalation).
    pub fn reevaluate(&self, n: u64, bits: u32) -> Result<FixedReal> {
        RealEvaluator::new(self.spec.clone(), self.base, self.cfg.clone())?.eval(n, bits)
    }

    pub(crate) fn step(&mut self) -> Result<(u64, FracValue, ErrBound)> {
        let n = self.next_n;
        let per_term_bits = self.cfg.per_term_bits;
        let out = match &mut self.kind {
            Kind::Geo { step, step_err, cur, err } => {
                let v = *cur;
                let e = *err;
                *cur = cur.add_mod1(*step);
                *err = err.plus(*step_err);
                (v, e)
            }
            Kind::Poly { regs, errs } => {
                let v = regs[0];
                let e = errs[0];
                for j in 0..regs.len() - 1 {
                    regs[j] = regs[j].add_mod1(regs[j + 1]);
                    errs[j] = errs[j].plus(errs[j + 1]);
                }
                (v, e)
            }
            Kind::Direct { eval } => {
                let v = eval.eval(n, per_term_bits)?;
                let (fr, e) = v.frac_value();
                (fr, e)
            }
            Kind::Factorial { m, ln_m, lnb, acc, acc_err } => {
                debug_assert_eq!(*m + 1, n);
                if n > 1 {
                    let delta = atanh_recip(2 * n - 1, ln_m.frac_bits())
                        .mul_int(&BigInt::from(2));
                    *ln_m = ln_m.add(&delta);
                }
                *m = n;
                let q = ln_m.div(lnb)?;
                acc.0 = acc.add(q.frac192()).0;
                *acc_err = acc_err.plus(q.err()).plus(ErrBound::ulp(192));
                (acc.to_frac_value(), acc_err.plus(ErrBound::ulp(128)))
            }
            Kind::PartitionExact { table, lnb } => {
                if n > self.cfg.partition_max {
                    return Err(Error::ExceedsMaximum {
                        what: "exact partition table",
                        n,
                        max: self.cfg.partition_max,
                    });
                }
                let w = lnb.frac_bits();
                let p = table.get(n);
                let lnp = crate::fixed::ln_biguint_truncated(p, w, w);
                let q = lnp.div(lnb)?;
                let (fr, e) = q.frac_value();
                (fr, e)
            }
            Kind::FibRecur { prev, cur, prev_err, cur_err, eval } => {
                if n <= self.cfg.fib_cutover {
                    let v = *cur;
                    let e = *cur_err;
                    let nxt = cur.add_mod1(*prev);
                    let nxt_err = cur_err.plus(*prev_err);
                    *prev = v;
                    *prev_err = e;
                    *cur = nxt;
                    *cur_err = nxt_err;
                    (v, e)
                } else {
                    let v = eval.eval(n, per_term_bits)?;
                    let (fr, e) = v.frac_value();
                    (fr, e)
                }
            }
            Kind::IterProd { inner, accs, errs } => {
                let (in_n, x, xe) = inner.step()?;
                if in_n != n {
                    return Err(Error::Internal(format!(
                        "iterated product misaligned: inner at {in_n}, outer at {n}"
                    )));
                }
                let mut v = x;
                let mut ve = xe;
                for (acc, err) in accs.iter_mut().zip(errs.iter_mut()) {
                    *acc = acc.add_mod1(v);
                    *err = err.plus(ve);
                    v = *acc;
                    ve = *err;
                }
                (v, ve)
            }
            Kind::PrimeExp { primes, c192, c_err } => {
                let p = primes.next_prime();
                let fr = c192.scale_u64(p).to_frac_value();
                let e = c_err
                    .times_pow2((p as f64).log2() + 1e-9)
                    .plus(ErrBound::ulp(128));
                (fr, e)
            }
        };
        self.next_n += 1;
        Ok((n, out.0, out.1))
    }
}

impl Kind {
    fn build(spec: &SequenceSpec, base: u32, cfg: &GenConfig) -> Result<Kind> {
        use SequenceSpec::*;
        Ok(match spec {
            Geometric { ratio } => {
                let c = log_const(ratio, base, cfg.const_bits)?;
                let (step, step_err) = c.frac_value();
                Kind::Geo { step, step_err, cur: step, err: step_err }
            }
            PolyExp { base_val, poly } => {
                let c = log_const(base_val, base, cfg.const_bits)?;
                let d = poly.degree();
                let diffs = poly.diffs_at(&BigInt::one(), d);
                let mut regs = Vec::with_capacity(d + 1);
                let mut errs = Vec::with_capacity(d + 1);
                for dj in &diffs {
                    let seed = FixedReal::from_ratio(dj, cfg.const_bits).mul(&c);
                    let (fr, e) = seed.frac_value();
                    regs.push(fr);
                    errs.push(e);
                }
                Kind::Poly { regs, errs }
            }
            PowerExp { .. } | NPowerN | DoublyExp { .. }
            | Partition { mode: PartitionMode::Asymptotic } => Kind::Direct {
                eval: RealEvaluator::new(spec.clone(), base, cfg.clone())?,
            },
            Factorial => Kind::Factorial {
                m: 0,
                ln_m: FixedReal::zero().rescale(cfg.const_bits),
                lnb: ln_base(base, cfg.const_bits),
                acc: Frac192::ZERO,
                acc_err: ErrBound::ZERO,
            },
            Partition { mode: PartitionMode::Exact } => Kind::PartitionExact {
                table: PartitionTable::new(),
                lnb: ln_base(base, 256),
            },
            FibonacciExp { base_val } => {
                let c = log_const(base_val, base, cfg.const_bits)?;
                let (x1, e1) = c.frac_value();
                Kind::FibRecur {
                    prev: FracValue::ZERO, // x_0: F_0 = 0
                    cur: x1,
                    prev_err: ErrBound::ZERO,
                    cur_err: e1,
                    eval: RealEvaluator::new(spec.clone(), base, cfg.clone())?,
                }
            }
            IteratedProduct { inner, height } => {
                let inner_state = GeneratorState::new(inner.as_ref().clone(), base, cfg.clone())?;
                let lifts = (*height - 1) as usize;
                Kind::IterProd {
                    inner: Box::new(inner_state),
                    accs: vec![FracValue::ZERO; lifts],
                    errs: vec![ErrBound::ZERO; lifts],
                }
            }
            PrimeExp { base_val } => {
                let c = log_const(base_val, base, cfg.const_bits)?;
                let c192 = c.frac192();
                let c_err = c.err().plus(ErrBound::ulp(192));
                Kind::PrimeExp { primes: PrimeStream::new(), c192, c_err }
            }
        })
    }
}

// --- register serialization (checkpoint bodies; see checkpoint.rs) ---

pub(crate) struct RegWriter(pub Vec<u8>);

impl RegWriter {
    fn u8(&mut self, v: u8) {
        self.0.push(v);
    }
    fn u32(&mut self, v: u32) {
        self.0.extend_from_slice(&v.to_le_bytes());
    }
    fn u64(&mut self, v: u64) {
        self.0.extend_from_slice(&v.to_le_bytes());
    }
    fn u128(&mut self, v: u128) {
        self.0.extend_from_slice(&v.to_le_bytes());
    }
    fn err(&mut self, e: ErrBound) {
        self.u64(e.log2().to_bits());
    }
    fn biguint(&mut self, v: &BigUint) {
        let limbs = v.to_u64_digits();
        self.u32(limbs.len() as u32);
        for l in limbs {
            self.u64(l);
        }
    }
    fn fixed(&mut self, v: &FixedReal) {
        let m = v.mantissa();
        self.u8(if m.sign() == num_bigint::Sign::Minus { 1 } else { 0 });
        self.biguint(m.magnitude());
        self.u32(v.frac_bits());
        self.err(v.err());
    }
}

pub(crate) struct RegReader<'a> {
    buf: &'a [u8],
    pos: usize,
}

impl<'a> RegReader<'a> {
    pub fn new(buf: &'a [u8]) -> RegReader<'a> {
        RegReader { buf, pos: 0 }
    }
    fn take(&mut self, n: usize) -> Result<&'a [u8]> {
        if self.pos + n > self.buf.len() {
            return Err(Error::Checkpoint("truncated register section".into()));
        }
        let s = &self.buf[self.pos..self.pos + n];
        self.pos += n;
        Ok(s)
    }
    fn u8(&mut self) -> Result<u8> {
        Ok(self.take(1)?[0])
    }
    fn u32(&mut self) -> Result<u32> {
        Ok(u32::from_le_bytes(self.take(4)?.try_into().unwrap()))
    }
    fn u64(&mut self) -> Result<u64> {
        Ok(u64::from_le_bytes(self.take(8)?.try_into().unwrap()))
    }
    fn u128(&mut self) -> Result<u128> {
        Ok(u128::from_le_bytes(self.take(16)?.try_into().unwrap()))
    }
    fn err(&mut self) -> Result<ErrBound> {
        Ok(ErrBound::from_log2(f64::from_bits(self.u64()?)))
    }
    fn biguint(&mut self) -> Result<BigUint> {
        let len = self.u32()? as usize;
        let bytes = self.take(len * 8)?;
        Ok(BigUint::from_bytes_le(bytes))
    }
    fn fixed(&mut self) -> Result<FixedReal> {
        let neg = self.u8()? == 1;
        let mag = self.biguint()?;
        let bits = self.u32()?;
        let err = self.err()?;
        let m = if neg { -BigInt::from(mag) } else { BigInt::from(mag) };
        Ok(FixedReal::from_parts(m, bits, err))
    }
    pub fn finished(&self) -> bool {
        self.pos == self.buf.len()
    }
}

impl GeneratorState {
    /// Serialize the family registers (little-endian raw words).
    pub(crate) fn save_registers(&self, w: &mut RegWriter) {
        match &self.kind {
            Kind::Geo { step, step_err, cur, err } => {
                w.u8(1);
                w.u128(step.bits());
                w.err(*step_err);
                w.u128(cur.bits());
                w.err(*err);
            }
            Kind::Poly { regs, errs } => {
                w.u8(2);
                w.u32(regs.len() as u32);
                for r in regs {
                    w.u128(r.bits());
                }
                for e in errs {
                    w.err(*e);
                }
            }
            Kind::Direct { .. } => w.u8(3),
            Kind::Factorial { m, ln_m, acc, acc_err, .. } => {
                w.u8(4);
                w.u64(*m);
                w.fixed(ln_m);
                for limb in acc.0 {
                    w.u64(limb);
                }
                w.err(*acc_err);
            }
            Kind::PartitionExact { table, .. } => {
                w.u8(5);
                w.u64(table.len() as u64);
                for v in table.values() {
                    w.biguint(v);
                }
            }
            Kind::FibRecur { prev, cur, prev_err, cur_err, .. } => {
                w.u8(6);
                w.u128(prev.bits());
                w.u128(cur.bits());
                w.err(*prev_err);
                w.err(*cur_err);
            }
            Kind::IterProd { inner, accs, errs } => {
                w.u8(7);
                w.u32(accs.len() as u32);
                for a in accs {
                    w.u128(a.bits());
                }
                for e in errs {
                    w.err(*e);
                }
                inner.save_registers(w);
            }
            Kind::PrimeExp { primes, .. } => {
                w.u8(8);
                w.u64(primes.count());
            }
        }
    }

    /// Rebuild a state from serialized registers, positioned at `next_n`.
    pub(crate) fn load_registers(
        spec: SequenceSpec,
        base: u32,
        cfg: GenConfig,
        next_n: u64,
        r: &mut RegReader<'_>,
    ) -> Result<GeneratorState> {
        let mut st = GeneratorState::new(spec, base, cfg)?;
        st.next_n = next_n;
        st.restore_kind(r)?;
        Ok(st)
    }

    fn restore_kind(&mut self, r: &mut RegReader<'_>) -> Result<()> {
        let tag = r.u8()?;
        let mismatch =
            || Error::Checkpoint("register tag does not match the spec's family".into());
        match (&mut self.kind, tag) {
            (Kind::Geo { step, step_err, cur, err }, 1) => {
                *step = FracValue::from_bits(r.u128()?);
                *step_err = r.err()?;
                *cur = FracValue::from_bits(r.u128()?);
                *err = r.err()?;
            }
            (Kind::Poly { regs, errs }, 2) => {
                let len = r.u32()? as usize;
                if len != regs.len() {
                    return Err(Error::Checkpoint(format!(
                        "difference table width {len} does not match degree {}",
                        regs.len() - 1
                    )));
                }
                for reg in regs.iter_mut() {
                    *reg = FracValue::from_bits(r.u128()?);
                }
                for e in errs.iter_mut() {
                    *e = r.err()?;
                }
            }
            (Kind::Direct { .. }, 3) => {}
            (Kind::Factorial { m, ln_m, acc, acc_err, .. }, 4) => {
                *m = r.u64()?;
                *ln_m = r.fixed()?;
                for limb in acc.0.iter_mut() {
                    *limb = r.u64()?;
                }
                *acc_err = r.err()?;
            }
            (Kind::PartitionExact { table, .. }, 5) => {
                let len = r.u64()? as usize;
                let mut values = Vec::with_capacity(len);
                for _ in 0..len {
                    values.push(r.biguint()?);
                }
                if values.is_empty() {
                    return Err(Error::Checkpoint("empty partition table".into()));
                }
                *table = PartitionTable::from_values(values);
            }
            (Kind::FibRecur { prev, cur, prev_err, cur_err, .. }, 6) => {
                *prev = FracValue::from_bits(r.u128()?);
                *cur = FracValue::from_bits(r.u128()?);
                *prev_err = r.err()?;
                *cur_err = r.err()?;
            }
            (Kind::IterProd { inner, accs, errs }, 7) => {
                let len = r.u32()? as usize;
                if len != accs.len() {
                    return Err(Error::Checkpoint("prefix register count mismatch".into()));
                }
                for a in accs.iter_mut() {
                    *a = FracValue::from_bits(r.u128()?);
                }
                for e in errs.iter_mut() {
                    *e = r.err()?;
                }
                let next = self.next_n;
                inner.restore_kind(r)?;
                inner.next_n = next;
            }
            (Kind::PrimeExp { primes, .. }, 8) => {
                let emitted = r.u64()?;
                primes.skip_to(emitted);
            }
            _ => return Err(mismatch()),
        }
        Ok(())
    }
}

/// Ordered stream of `(n, {log_base a_n})` over `[n0, n1)`.
pub struct FracStream {
    state: GeneratorState,
    end: u64,
}

impl FracStream {
    pub fn state(&self) -> &GeneratorState {
        &self.state
    }

    pub fn into_state(self) -> GeneratorState {
        self.state
    }
}

impl Iterator for FracStream {
    type Item = Result<(u64, FracValue)>;

    fn next(&mut self) -> Option<Self::Item> {
        if self.state.peek_index() >= self.end {
            return None;
        }
        Some(self.state.next_term())
    }
}

/// Stream `{log_base a_n}` for `n` in `[n0, n1)`.
///
/// Deterministic for a fixed `(spec, base, range, config)`; replay-only
/// families are replayed transparently when `n0 > 1`.
pub fn frac_stream(
    spec: &SequenceSpec,
    base: u32,
    range: std::ops::Range<u64>,
    cfg: &GenConfig,
) -> Result<FracStream> {
    if range.start == 0 {
        return Err(Error::InvalidInput("stream ranges start at n = 1".into()));
    }
    let state = GeneratorState::seek(
        spec.clone(),
        base,
        cfg.clone(),
        range.start,
        SeekPolicy::AllowReplay,
    )?;
    Ok(FracStream { state, end: range.end })
}

/// Lift a fractional stream to the `h`-fold iterated product sequence:
/// `(h-1)`-fold prefix sums mod 1. Exact given exact inputs. The inner
/// stream must start at n = 1.
pub fn iterated_lift<I>(inner: I, h: u32) -> impl Iterator<Item = Result<(u64, FracValue)>>
where
    I: Iterator<Item = Result<(u64, FracValue)>>,
{
    let mut accs = vec![FracValue::ZERO; h.saturating_sub(1) as usize];
    let mut checked_start = false;
    inner.map(move |item| {
        let (n, x) = item?;
        if !checked_start {
            if n != 1 {
                return Err(Error::InvalidInput(
                    "iterated_lift requires the inner stream to start at n = 1".into(),
                ));
            }
            checked_start = true;
        }
        let mut v = x;
        for acc in accs.iter_mut() {
            *acc = acc.add_mod1(v);
            v = *acc;
        }
        Ok((n, v))
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::generators::spec::parse_spec;

    fn cfg() -> GenConfig {
        GenConfig::default()
    }

    fn collect(spec: &str, base: u32, n: u64) -> Vec<FracValue> {
        frac_stream(&parse_spec(spec).unwrap(), base, 1..n + 1, &cfg())
            .unwrap()
            .map(|r| r.unwrap().1)
            .collect()
    }

    #[test]
    fn geometric_matches_direct_scale() {
        let vals = collect("2^n", 10, 100);
        let c = vals[0];
        for (i, v) in vals.iter().enumerate() {
            assert_eq!(*v, c.scale_mod1(i as i64 + 1), "n = {}", i + 1);
        }
    }

    #[test]
    fn seek_soundness_bit_identical() {
        for spec in ["2^n", "2^(n^2)", "2^(n^3)", "(3/2)^n", "n^n", "powerexp(1,0,1,1/2)"] {
            let s = parse_spec(spec).unwrap();
            let fresh: Vec<_> = frac_stream(&s, 10, 1..120, &cfg())
                .unwrap()
                .map(|r| r.unwrap())
                .collect();
            for n0 in [1u64, 2, 17, 64, 100] {
                let mut sought =
                    GeneratorState::seek(s.clone(), 10, cfg(), n0, SeekPolicy::DirectOnly)
                        .unwrap();
                for k in 0..10 {
                    let (n, v) = sought.next_term().unwrap();
                    let idx = (n0 - 1 + k) as usize;
                    assert_eq!(n, fresh[idx].0);
                    assert_eq!(v, fresh[idx].1, "{spec} at n = {n}");
                }
            }
        }
    }

    #[test]
    fn replay_only_families_refuse_direct_seek() {
        for spec in ["n!", "p(n)", "superfact(2)", "fib-exp(2)", "2^prime(n)"] {
            let s = parse_spec(spec).unwrap();
            let r = GeneratorState::seek(s, 10, cfg(), 40, SeekPolicy::DirectOnly);
            if spec == "fib-exp(2)" {
                // below the cutover it is replay-only
                assert!(r.is_err(), "{spec}");
            } else {
                assert!(matches!(r, Err(Error::NotSeekable { .. })), "{spec}");
            }
        }
        // fib-exp past the cutover is directly positionable
        let s = parse_spec("fib-exp(2)").unwrap();
        assert!(GeneratorState::seek(s, 10, cfg(), 65, SeekPolicy::DirectOnly).is_ok());
    }

    #[test]
    fn replay_seek_matches_fresh() {
        for spec in ["n!", "p(n)", "superfact(2)", "fib-exp(2)", "2^prime(n)"] {
            let s = parse_spec(spec).unwrap();
            let fresh: Vec<_> = frac_stream(&s, 10, 1..60, &cfg())
                .unwrap()
                .map(|r| r.unwrap())
                .collect();
            let mut sought =
                GeneratorState::seek(s.clone(), 10, cfg(), 31, SeekPolicy::AllowReplay).unwrap();
            for item in fresh.iter().skip(30) {
                let (n, v) = sought.next_term().unwrap();
                assert_eq!((n, v), *item, "{spec} at n = {n}");
            }
        }
    }

    #[test]
    fn fib_recurrence_additive_law_exact() {
        let vals = collect("fib-exp(2)", 10, 64);
        for n in 2..64usize {
            assert_eq!(
                vals[n],
                vals[n - 1].add_mod1(vals[n - 2]),
                "additive law broken at n = {}",
                n + 1
            );
        }
    }

    #[test]
    fn iterated_lift_identity_and_composition() {
        let s = parse_spec("n!").unwrap();
        let base: Vec<_> =
            frac_stream(&s, 10, 1..40, &cfg()).unwrap().map(|r| r.unwrap()).collect();
        // h = 1 is the identity
        let lifted1: Vec<_> = iterated_lift(base.iter().cloned().map(Ok), 1)
            .map(|r| r.unwrap())
            .collect();
        assert_eq!(base, lifted1);
        // lift(lift(s, h1), h2) = lift(s, h1 + h2 - 1), bitwise
        let l2: Vec<_> =
            iterated_lift(base.iter().cloned().map(Ok), 2).collect::<Result<_>>().unwrap();
        let l2_then_3: Vec<_> =
            iterated_lift(l2.iter().cloned().map(Ok), 3).collect::<Result<_>>().unwrap();
        let l4: Vec<_> =
            iterated_lift(base.iter().cloned().map(Ok), 4).collect::<Result<_>>().unwrap();
        assert_eq!(l2_then_3, l4);
    }

    #[test]
    fn iterprod_stream_matches_lift_of_inner() {
        let sf: Vec<_> = collect("superfact(3)", 10, 50);
        let inner = frac_stream(&parse_spec("n!").unwrap(), 10, 1..51, &cfg()).unwrap();
        let lifted: Vec<_> =
            iterated_lift(inner, 3).map(|r| r.unwrap().1).collect();
        assert_eq!(sf, lifted[..49]);
    }

    #[test]
    fn lift_of_geometric_matches_polyexp_triangle() {
        // h = 2 on a^n gives a^{n(n+1)/2}
        let geo = frac_stream(&parse_spec("2^n").unwrap(), 10, 1..200, &cfg()).unwrap();
        let lifted: Vec<_> = iterated_lift(geo, 2).map(|r| r.unwrap().1).collect();
        let tri: Vec<_> = collect("2^((1/2)*n^2+(1/2)*n)", 10, 199);
        for (i, (a, b)) in lifted.iter().zip(tri.iter()).enumerate() {
            // different rounding paths: equal to well under the error budget
            assert!(
                a.circ_dist_bits(*b) < 1u128 << 40,
                "n = {}: {:?} vs {:?}",
                i + 1,
                a,
                b
            );
        }
    }

    #[test]
    fn budget_fault_instead_of_corruption() {
        // geometric error grows ~ n 2^-128; near n = 2^63 it passes 2^-64
        let s = parse_spec("2^n").unwrap();
        let mut st =
            GeneratorState::seek(s, 10, cfg(), 1u64 << 63, SeekPolicy::DirectOnly).unwrap();
        match st.next_term() {
            Err(Error::PrecisionBudget { .. }) => {}
            other => panic!("expected a budget fault, got {other:?}"),
        }
    }

    #[test]
    fn partition_cap_faults() {
        let mut c = cfg();
        c.partition_max = 30;
        let s = parse_spec("p(n)").unwrap();
        let mut st = GeneratorState::new(s, 10, c).unwrap();
        for _ in 0..30 {
            st.next_term().unwrap();
        }
        assert!(matches!(st.next_term(), Err(Error::ExceedsMaximum { .. })));
    }
}
