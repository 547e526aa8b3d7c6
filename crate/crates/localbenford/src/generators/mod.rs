//! Streams of `{log_base a_n}` for the supported sequence families, with
//! seekable state for parallel chunked evaluation.

pub mod checkpoint;
mod evaluator;
mod partition;
pub mod poly;
mod primes;
mod spec;
mod state;

use num_bigint::BigUint;
use num_rational::BigRational;

use crate::error::Result;
use crate::fixed::FracValue;

pub use evaluator::RealEvaluator;
pub use partition::PartitionTable;
pub use poly::RatPoly;
pub use primes::{nth_prime, PrimeStream};
pub use spec::{fib_pair, parse_spec, PartitionMode, SequenceSpec, Theta};
pub use state::{frac_stream, iterated_lift, FracStream, GeneratorState, SeekPolicy};

/// Precision and range policy for generators.
#[derive(Clone, Debug)]
pub struct GenConfig {
    /// Target accuracy (bits) for per-term direct evaluations.
    pub per_term_bits: u32,
    /// Working fractional bits for seed constants (the guard-extended G).
    pub const_bits: u32,
    /// Streams fault once their accumulated bound passes `2^-budget_bits`.
    pub budget_bits: u32,
    /// Ceiling of the exact partition table.
    pub partition_max: u64,
    /// Ceiling on working precision for doubly exponential terms.
    pub dexp_max_bits: u64,
    /// A digit decision within `2^-ambiguity_bits` of a threshold escalates.
    pub ambiguity_bits: u32,
    /// Fibonacci exponents switch from the exact mod-1 recurrence to direct
    /// big-integer evaluation past this index (seed error grows like F_n).
    pub fib_cutover: u64,
    /// Direct (non-streaming) evaluation cap for iterated products.
    pub iterprod_eval_max: u64,
    /// Below this index, factorial re-evaluation uses the exact big integer.
    pub factorial_exact_max: u64,
}

impl Default for GenConfig {
    fn default() -> GenConfig {
        GenConfig {
            per_term_bits: 160,
            const_bits: 192,
            budget_bits: 64,
            partition_max: 100_000,
            dexp_max_bits: 1 << 20,
            ambiguity_bits: 60,
            fib_cutover: 64,
            iterprod_eval_max: 200_000,
            factorial_exact_max: 20_000,
        }
    }
}

/// Exact `p(n)` via the pentagonal recurrence (default cap from `GenConfig`).
pub fn partition_exact(n: u64, max_n: u64) -> Result<BigUint> {
    partition::partition_exact(n, max_n)
}

/// High-precision evaluator of `n -> log_base a_n`.
pub fn real_evaluator(spec: &SequenceSpec, base: u32, cfg: &GenConfig) -> Result<RealEvaluator> {
    RealEvaluator::new(spec.clone(), base, cfg.clone())
}

/// `{theta^n log_base a}` to within `2^-output_bits`.
pub fn doubly_exp_frac(
    a: &BigRational,
    theta: &Theta,
    base: u32,
    n: u64,
    output_bits: u32,
    cfg: &GenConfig,
) -> Result<FracValue> {
    let v = evaluator::doubly_exp_real(a, theta, base, n, output_bits, cfg)?;
    let (fr, err) = v.frac_value();
    if !err.within_bits(output_bits) {
        return Err(crate::error::Error::PrecisionBudget {
            family: "doubly-exp",
            n,
            bound_log2: err.log2(),
            budget_bits: output_bits,
        });
    }
    Ok(fr)
}

/// Position a stream at `n0` under the given seek policy.
pub fn seek_seed(
    spec: &SequenceSpec,
    base: u32,
    cfg: &GenConfig,
    n0: u64,
    policy: SeekPolicy,
) -> Result<GeneratorState> {
    GeneratorState::seek(spec.clone(), base, cfg.clone(), n0, policy)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::fixed::FixedReal;
    use num_bigint::BigInt;

    #[test]
    fn doubly_exp_frac_examples() {
        let cfg = GenConfig::default();
        let two = BigRational::from(BigInt::from(2));
        // {8 log10 2}, frozen oracle value
        let fr =
            doubly_exp_frac(&two, &Theta::Rational(two.clone()), 10, 3, 128, &cfg).unwrap();
        assert!((fr.to_f64() - 0.40823996531184956170991115779).abs() < 1e-15);
        // a = base: exactly zero at any depth
        let ten = BigRational::from(BigInt::from(10));
        let fr =
            doubly_exp_frac(&ten, &Theta::Rational(two.clone()), 10, 7, 128, &cfg).unwrap();
        assert_eq!(fr, FracValue::ZERO);
        // phi^2 = phi + 1
        let fr = doubly_exp_frac(&two, &Theta::golden_ratio(), 10, 2, 128, &cfg).unwrap();
        assert!((fr.to_f64() - 0.78810676028153623936589996226).abs() < 1e-15);
    }

    #[test]
    fn geometric_seek_example() {
        // seek 2^n to n0 = 10^6: next frac is {10^6 log10 2}
        let spec = parse_spec("2^n").unwrap();
        let mut st =
            seek_seed(&spec, 10, &GenConfig::default(), 1_000_000, SeekPolicy::DirectOnly)
                .unwrap();
        let (n, v) = st.next_term().unwrap();
        assert_eq!(n, 1_000_000);
        // within n0 ulps of the frozen oracle value
        assert!((v.to_f64() - 0.995663981195213738894724493).abs() < 1e-18);
    }

    #[test]
    fn polyexp_seek_example() {
        // 2^(n^2) at n0 = 10^3: next frac is {10^6 log10 2}
        let spec = parse_spec("2^(n^2)").unwrap();
        let mut st =
            seek_seed(&spec, 10, &GenConfig::default(), 1000, SeekPolicy::DirectOnly).unwrap();
        let (_, v) = st.next_term().unwrap();
        assert!((v.to_f64() - 0.995663981195213738894724493).abs() < 1e-18);
    }

    #[test]
    fn recurrence_matches_direct_evaluation() {
        // streamed PolyExp/Geometric vs direct {P(n) log_b a} at random n
        use crate::fixed::FRAC_BITS;
        let mut rng: u64 = 0x243f6a8885a308d3;
        let mut next_rand = move || {
            rng ^= rng << 13;
            rng ^= rng >> 7;
            rng ^= rng << 17;
            rng
        };
        for spec_str in ["2^n", "2^(n^2)"] {
            let spec = parse_spec(spec_str).unwrap();
            let ev = real_evaluator(&spec, 10, &GenConfig::default()).unwrap();
            for _ in 0..25 {
                let n = next_rand() % 1_000_000 + 1;
                let mut st = seek_seed(&spec, 10, &GenConfig::default(), n, SeekPolicy::DirectOnly)
                    .unwrap();
                let (_, streamed) = st.next_term().unwrap();
                let direct = ev.eval(n, 256).unwrap();
                let (df, _) = direct.frac_value();
                let dist = streamed.circ_dist_bits(df);
                assert!(
                    dist < 1u128 << (FRAC_BITS - 100),
                    "{spec_str} at n = {n}: stream {streamed:?} vs direct {df:?}"
                );
            }
        }
    }

    #[test]
    fn partition_exact_convention() {
        assert_eq!(partition_exact(0, 10).unwrap(), BigUint::from(1u32));
        let six: Vec<u64> = (1..=6)
            .map(|n| u64::try_from(&partition_exact(n, 10).unwrap()).unwrap())
            .collect();
        assert_eq!(six, [1, 2, 3, 5, 7, 11]);
    }

    #[test]
    fn factorial_real_evaluator_magnitudes() {
        let spec = parse_spec("n!").unwrap();
        let ev = real_evaluator(&spec, 10, &GenConfig::default()).unwrap();
        let v = ev.eval(10, 160).unwrap();
        assert_eq!(v.integer_part(), BigInt::from(6)); // log10(3628800) = 6.55...
        // stream agrees with direct evaluation within bounds
        let stream_v = frac_stream(&spec, 10, 1..11, &GenConfig::default())
            .unwrap()
            .last()
            .unwrap()
            .unwrap()
            .1;
        let (df, _) = v.frac_value();
        assert!(stream_v.circ_dist_bits(df) < 1u128 << 40);
    }
}
