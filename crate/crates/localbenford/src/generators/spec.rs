//! Sequence family descriptions and their canonical text form.

use num_bigint::{BigInt, BigUint};
use num_integer::Integer;
use num_rational::BigRational;
use num_traits::{One, Signed, ToPrimitive, Zero};

use super::poly::RatPoly;
use crate::error::{Error, Result};
use crate::fixed::{ErrBound, FixedReal};

/// How exact `p(n)` values are produced.
#[derive(Copy, Clone, PartialEq, Eq, Debug)]
pub enum PartitionMode {
    /// Pentagonal-number recurrence over big integers (the default).
    Exact,
    /// Leading Hardy-Ramanujan growth shape; fractional parts are only as
    /// good as the asymptotic, so digit statistics from this mode carry an
    /// unquantified model error. Clearly labeled wherever reported.
    Asymptotic,
}

/// A real algebraic number `theta > 1` for doubly exponential sequences.
#[derive(Clone, PartialEq, Debug)]
pub enum Theta {
    Rational(BigRational),
    /// Root of an integer polynomial near `approx`; coefficients ascending.
    Algebraic { min_poly: Vec<BigInt>, approx: f64 },
}

impl Theta {
    /// The golden ratio, root of `x^2 - x - 1`.
    pub fn golden_ratio() -> Theta {
        Theta::Algebraic {
            min_poly: vec![BigInt::from(-1), BigInt::from(-1), BigInt::from(1)],
            approx: 1.618033988749895,
        }
    }

    pub fn approx_f64(&self) -> f64 {
        match self {
            Theta::Rational(r) => r.to_f64().unwrap_or(f64::NAN),
            Theta::Algebraic { approx, .. } => *approx,
        }
    }

    /// Degree of the defining polynomial (1 for rationals).
    pub fn degree(&self) -> usize {
        match self {
            Theta::Rational(_) => 1,
            Theta::Algebraic { min_poly, .. } => min_poly.len().saturating_sub(1),
        }
    }

    /// Evaluate to a `FixedReal` with error at most `2^-bits`
    /// (Newton iteration from `approx` for algebraic roots).
    pub fn value(&self, bits: u32) -> Result<FixedReal> {
        match self {
            Theta::Rational(r) => Ok(FixedReal::from_ratio(r, bits + 8)),
            Theta::Algebraic { min_poly, approx } => newton_root(min_poly, *approx, bits),
        }
    }
}

fn poly_eval_fixed(coeffs: &[BigInt], x: &FixedReal) -> FixedReal {
    let mut acc = FixedReal::zero();
    for c in coeffs.iter().rev() {
        acc = acc.mul(x).add(&FixedReal::from_int(c.clone()));
    }
    acc
}

fn newton_root(coeffs: &[BigInt], approx: f64, bits: u32) -> Result<FixedReal> {
    if coeffs.len() < 2 {
        return Err(Error::InvalidInput("minimal polynomial must have degree >= 1".into()));
    }
    let deriv: Vec<BigInt> =
        coeffs.iter().enumerate().skip(1).map(|(i, c)| c * BigInt::from(i)).collect();
    let w = bits + 64;
    let mut x = FixedReal::from_ratio(
        &BigRational::from_float(approx)
            .ok_or_else(|| Error::InvalidInput("non-finite root approximation".into()))?,
        w,
    );
    // quadratic convergence; stop once the step is below target or stalls
    // (iterating past convergence only inflates the error bound)
    let target = -(bits as f64) - 8.0;
    let mut prev_mag = f64::INFINITY;
    for _ in 0..200 {
        let f = poly_eval_fixed(coeffs, &x);
        if f.mantissa().is_zero() {
            break;
        }
        let fp = poly_eval_fixed(&deriv, &x);
        let step = f.div(&fp)?;
        let mag = step.mag_log2_upper();
        if mag >= prev_mag {
            break;
        }
        x = x.sub(&step).rescale(w);
        prev_mag = mag;
        if mag < target {
            break;
        }
    }
    // certify: |f(x)| / |f'(x)| bounds the distance to the root near a simple root
    let f = poly_eval_fixed(coeffs, &x);
    let fp = poly_eval_fixed(&deriv, &x);
    let resid = f.div(&fp)?;
    let err = ErrBound::from_log2(resid.mag_log2_upper() + 1.0);
    if !err.within_bits(bits) {
        return Err(Error::Internal(format!(
            "Newton root refinement stalled at bound {err}"
        )));
    }
    Ok(FixedReal::from_parts(x.mantissa().clone(), x.frac_bits(), x.err().plus(err)))
}

/// A tagged description of a sequence family `a_n`.
#[derive(Clone, PartialEq, Debug)]
pub enum SequenceSpec {
    /// `a^n` for rational `a > 0`.
    Geometric { ratio: BigRational },
    /// `a^{P(n)}` for rational `a > 1` and rational-coefficient `P`.
    PolyExp { base_val: BigRational, poly: RatPoly },
    /// `lambda * n^gamma * e^(c n^beta)`, `beta > 0` not an integer.
    PowerExp {
        lambda: BigRational,
        gamma: BigRational,
        coeff: BigRational,
        beta: BigRational,
    },
    /// `n!`
    Factorial,
    /// `n^n`
    NPowerN,
    /// The partition function `p(n)`.
    Partition { mode: PartitionMode },
    /// `a^{F_n}` with `F_n` the Fibonacci numbers, rational `a > 1`.
    FibonacciExp { base_val: BigRational },
    /// `h`-fold iterated cumulative products of the inner sequence.
    IteratedProduct { inner: Box<SequenceSpec>, height: u32 },
    /// `a^{theta^n}` with `a > 1`, `theta > 1`.
    DoublyExp { base_val: BigRational, theta: Theta },
    /// `a^{p_n}` with `p_n` the n-th prime, rational `a > 1`.
    PrimeExp { base_val: BigRational },
}

impl SequenceSpec {
    /// Validate the family's parameter constraints.
    pub fn validate(&self) -> Result<()> {
        use SequenceSpec::*;
        let positive = |r: &BigRational, what: &str| -> Result<()> {
            if r.is_positive() {
                Ok(())
            } else {
                Err(Error::InvalidInput(format!("{what} must be > 0, got {r}")))
            }
        };
        let above_one = |r: &BigRational, what: &str| -> Result<()> {
            if *r > BigRational::one() {
                Ok(())
            } else {
                Err(Error::InvalidInput(format!("{what} must be > 1, got {r}")))
            }
        };
        match self {
            Geometric { ratio } => positive(ratio, "geometric ratio"),
            PolyExp { base_val, poly } => {
                above_one(base_val, "exponential base")?;
                if poly.is_zero() || poly.degree() == 0 {
                    return Err(Error::InvalidInput(
                        "polynomial exponent must be non-constant".into(),
                    ));
                }
                Ok(())
            }
            PowerExp { lambda, coeff, beta, .. } => {
                positive(lambda, "lambda")?;
                positive(coeff, "c")?;
                positive(beta, "beta")?;
                if beta.denom().is_one() {
                    return Err(Error::InvalidInput(format!(
                        "beta must not be an integer, got {beta}"
                    )));
                }
                Ok(())
            }
            Factorial | NPowerN | Partition { .. } => Ok(()),
            FibonacciExp { base_val } => above_one(base_val, "fib-exp base"),
            IteratedProduct { inner, height } => {
                if *height < 1 {
                    return Err(Error::InvalidInput("iterated product needs h >= 1".into()));
                }
                inner.validate()
            }
            DoublyExp { base_val, theta } => {
                above_one(base_val, "dexp base")?;
                if theta.approx_f64() <= 1.0 {
                    return Err(Error::InvalidInput("dexp theta must be > 1".into()));
                }
                Ok(())
            }
            PrimeExp { base_val } => above_one(base_val, "prime-exp base"),
        }
    }

    /// Family name used in error messages and reports.
    pub fn family_name(&self) -> &'static str {
        use SequenceSpec::*;
        match self {
            Geometric { .. } => "geometric",
            PolyExp { .. } => "poly-exp",
            PowerExp { .. } => "power-exp",
            Factorial => "factorial",
            NPowerN => "n^n",
            Partition { .. } => "partition",
            FibonacciExp { .. } => "fibonacci-exp",
            IteratedProduct { .. } => "iterated-product",
            DoublyExp { .. } => "doubly-exp",
            PrimeExp { .. } => "prime-exp",
        }
    }

    /// The known degree of the difference-operator class of `log_b a_n`,
    /// when the family pins it down; used as the default order hint.
    pub fn known_class_degree(&self) -> Option<u32> {
        use SequenceSpec::*;
        match self {
            Geometric { .. } => Some(1),
            PolyExp { poly, .. } => Some(poly.degree() as u32),
            PowerExp { beta, .. } => {
                // ceil(beta)
                let c = beta.ceil();
                c.numer().to_u32()
            }
            Factorial | NPowerN => Some(1),
            Partition { .. } => Some(1),
            FibonacciExp { .. } => Some(1),
            IteratedProduct { inner, height } => {
                inner.known_class_degree().map(|k| k + height - 1)
            }
            DoublyExp { .. } => None, // degree of theta only bounds the order
            PrimeExp { .. } => None,  // open: prime gaps are not smooth
        }
    }

    /// Canonical text form; `parse_spec` inverts it exactly.
    pub fn render(&self) -> String {
        use SequenceSpec::*;
        match self {
            Geometric { ratio } => format!("{}^n", rat_str(ratio)),
            PolyExp { base_val, poly } => format!("{}^({})", rat_str(base_val), poly),
            PowerExp { lambda, gamma, coeff, beta } => format!(
                "powerexp({},{},{},{})",
                rat_plain(lambda),
                rat_plain(gamma),
                rat_plain(coeff),
                rat_plain(beta)
            ),
            Factorial => "n!".into(),
            NPowerN => "n^n".into(),
            Partition { mode: PartitionMode::Exact } => "p(n)".into(),
            Partition { mode: PartitionMode::Asymptotic } => "p~(n)".into(),
            FibonacciExp { base_val } => format!("fib-exp({})", rat_plain(base_val)),
            IteratedProduct { inner, height } => match inner.as_ref() {
                Factorial => format!("superfact({height})"),
                other => format!("iterprod({},{height})", other.render()),
            },
            DoublyExp { base_val, theta } => {
                let t = match theta {
                    Theta::Rational(r) => rat_plain(r),
                    Theta::Algebraic { min_poly, approx } => {
                        if *theta == Theta::golden_ratio() {
                            "phi".into()
                        } else {
                            let cs: Vec<String> =
                                min_poly.iter().map(|c| c.to_string()).collect();
                            format!("algebraic({};{approx})", cs.join(","))
                        }
                    }
                };
                format!("dexp({},{t})", rat_plain(base_val))
            }
            PrimeExp { base_val } => format!("{}^prime(n)", rat_str(base_val)),
        }
    }
}

fn rat_plain(r: &BigRational) -> String {
    if r.denom().is_one() {
        r.numer().to_string()
    } else {
        format!("{}/{}", r.numer(), r.denom())
    }
}

/// Rational as a spec prefix: parenthesized when it needs it.
fn rat_str(r: &BigRational) -> String {
    if r.denom().is_one() && !r.numer().is_negative() {
        r.numer().to_string()
    } else {
        format!("({}/{})", r.numer(), r.denom())
    }
}

// ---------------------------------------------------------------------------
// Parsing
// ---------------------------------------------------------------------------

struct Cursor<'a> {
    s: &'a [u8],
    pos: usize,
}

impl<'a> Cursor<'a> {
    fn new(s: &'a str) -> Cursor<'a> {
        Cursor { s: s.as_bytes(), pos: 0 }
    }

    fn err(&self, msg: impl Into<String>) -> Error {
        Error::Parse { pos: self.pos, msg: msg.into() }
    }

    fn peek(&self) -> Option<u8> {
        self.s.get(self.pos).copied()
    }

    fn eat(&mut self, c: u8) -> bool {
        if self.peek() == Some(c) {
            self.pos += 1;
            true
        } else {
            false
        }
    }

    fn expect(&mut self, c: u8) -> Result<()> {
        if self.eat(c) {
            Ok(())
        } else {
            Err(self.err(format!("expected '{}'", c as char)))
        }
    }

    fn eat_str(&mut self, word: &str) -> bool {
        if self.s[self.pos..].starts_with(word.as_bytes()) {
            self.pos += word.len();
            true
        } else {
            false
        }
    }

    fn parse_uint(&mut self) -> Result<u64> {
        let start = self.pos;
        while self.peek().map(|c| c.is_ascii_digit()).unwrap_or(false) {
            self.pos += 1;
        }
        if start == self.pos {
            return Err(self.err("expected an integer"));
        }
        std::str::from_utf8(&self.s[start..self.pos])
            .unwrap()
            .parse()
            .map_err(|e| self.err(format!("integer out of range: {e}")))
    }

    fn parse_bigint(&mut self) -> Result<BigInt> {
        let neg = self.eat(b'-');
        let start = self.pos;
        while self.peek().map(|c| c.is_ascii_digit()).unwrap_or(false) {
            self.pos += 1;
        }
        if start == self.pos {
            return Err(self.err("expected an integer"));
        }
        let v = BigInt::parse_bytes(&self.s[start..self.pos], 10)
            .ok_or_else(|| self.err("bad integer"))?;
        Ok(if neg { -v } else { v })
    }

    /// integer, p/q, or decimal like 1.5 (exact: 15/10)
    fn parse_rational(&mut self) -> Result<BigRational> {
        let num = self.parse_bigint()?;
        if self.eat(b'/') {
            let den = self.parse_bigint()?;
            if den.is_zero() {
                return Err(self.err("zero denominator"));
            }
            Ok(BigRational::new(num, den))
        } else if self.eat(b'.') {
            let start = self.pos;
            while self.peek().map(|c| c.is_ascii_digit()).unwrap_or(false) {
                self.pos += 1;
            }
            if start == self.pos {
                return Err(self.err("expected digits after '.'"));
            }
            let digits = std::str::from_utf8(&self.s[start..self.pos]).unwrap();
            let frac = BigInt::parse_bytes(digits.as_bytes(), 10).unwrap();
            let scale = BigInt::from(10u32).pow(digits.len() as u32);
            let whole = BigRational::from(num.clone());
            let part = BigRational::new(frac, scale);
            Ok(if num.is_negative() { whole - part } else { whole + part })
        } else {
            Ok(BigRational::from(num))
        }
    }

    /// `(p/q)` or bare rational
    fn parse_base_rational(&mut self) -> Result<BigRational> {
        if self.eat(b'(') {
            let r = self.parse_rational()?;
            self.expect(b')')?;
            Ok(r)
        } else {
            self.parse_rational()
        }
    }

    /// Polynomial in n: sum of `[coeff*]n[^k]` and constant terms.
    fn parse_poly(&mut self) -> Result<RatPoly> {
        let mut acc = RatPoly::zero();
        let mut first = true;
        loop {
            let sign = if self.eat(b'+') {
                1
            } else if self.eat(b'-') {
                -1
            } else if first {
                1
            } else {
                break;
            };
            first = false;
            let term = self.parse_poly_term()?;
            let term = if sign < 0 {
                RatPoly::new(term.coeffs().iter().map(|c| -c).collect())
            } else {
                term
            };
            acc = acc.add(&term);
            if !matches!(self.peek(), Some(b'+') | Some(b'-')) {
                break;
            }
        }
        Ok(acc)
    }

    fn parse_poly_term(&mut self) -> Result<RatPoly> {
        // [ '(' rat ')' | rat ] [ '*' ] [ 'n' [ '^' k ] ]
        let coeff = if self.peek() == Some(b'(') {
            self.pos += 1;
            let r = self.parse_rational()?;
            self.expect(b')')?;
            Some(r)
        } else if self.peek().map(|c| c.is_ascii_digit() || c == b'-').unwrap_or(false) {
            Some(self.parse_rational()?)
        } else {
            None
        };
        self.eat(b'*');
        if self.eat(b'n') {
            let k = if self.eat(b'^') { self.parse_uint()? as usize } else { 1 };
            Ok(RatPoly::monomial(coeff.unwrap_or_else(BigRational::one), k))
        } else {
            match coeff {
                Some(c) => Ok(RatPoly::monomial(c, 0)),
                None => Err(self.err("expected a polynomial term")),
            }
        }
    }

    fn parse_spec(&mut self) -> Result<SequenceSpec> {
        if self.eat_str("n!") {
            return Ok(SequenceSpec::Factorial);
        }
        if self.eat_str("n^n") {
            return Ok(SequenceSpec::NPowerN);
        }
        if self.eat_str("p(n)") {
            return Ok(SequenceSpec::Partition { mode: PartitionMode::Exact });
        }
        if self.eat_str("p~(n)") {
            return Ok(SequenceSpec::Partition { mode: PartitionMode::Asymptotic });
        }
        if self.eat_str("fib-exp(") {
            let a = self.parse_rational()?;
            self.expect(b')')?;
            return Ok(SequenceSpec::FibonacciExp { base_val: a });
        }
        if self.eat_str("superfact(") {
            let h = self.parse_uint()?;
            self.expect(b')')?;
            return Ok(SequenceSpec::IteratedProduct {
                inner: Box::new(SequenceSpec::Factorial),
                height: h as u32,
            });
        }
        if self.eat_str("iterprod(") {
            let inner = self.parse_spec()?;
            self.expect(b',')?;
            let h = self.parse_uint()?;
            self.expect(b')')?;
            return Ok(SequenceSpec::IteratedProduct {
                inner: Box::new(inner),
                height: h as u32,
            });
        }
        if self.eat_str("dexp(") {
            let a = self.parse_rational()?;
            self.expect(b',')?;
            let theta = if self.eat_str("phi") {
                Theta::golden_ratio()
            } else if self.eat_str("algebraic(") {
                let mut coeffs = vec![self.parse_bigint()?];
                while self.eat(b',') {
                    coeffs.push(self.parse_bigint()?);
                }
                self.expect(b';')?;
                let start = self.pos;
                while self
                    .peek()
                    .map(|c| c.is_ascii_digit() || c == b'.' || c == b'-' || c == b'e')
                    .unwrap_or(false)
                {
                    self.pos += 1;
                }
                let approx: f64 = std::str::from_utf8(&self.s[start..self.pos])
                    .unwrap()
                    .parse()
                    .map_err(|e| self.err(format!("bad approx: {e}")))?;
                self.expect(b')')?;
                Theta::Algebraic { min_poly: coeffs, approx }
            } else {
                Theta::Rational(self.parse_rational()?)
            };
            self.expect(b')')?;
            return Ok(SequenceSpec::DoublyExp { base_val: a, theta });
        }
        if self.eat_str("powerexp(") {
            let lambda = self.parse_rational()?;
            self.expect(b',')?;
            let gamma = self.parse_rational()?;
            self.expect(b',')?;
            let coeff = self.parse_rational()?;
            self.expect(b',')?;
            let beta = self.parse_rational()?;
            self.expect(b')')?;
            return Ok(SequenceSpec::PowerExp { lambda, gamma, coeff, beta });
        }
        // a^n | a^(P(n)) | a^prime(n)
        let a = self.parse_base_rational()?;
        self.expect(b'^')?;
        if self.eat_str("prime(n)") {
            return Ok(SequenceSpec::PrimeExp { base_val: a });
        }
        if self.eat(b'(') {
            let poly = self.parse_poly()?;
            self.expect(b')')?;
            return Ok(SequenceSpec::PolyExp { base_val: a, poly });
        }
        if self.eat(b'n') {
            // bare exponent n, or n^k
            if self.eat(b'^') {
                let k = self.parse_uint()? as usize;
                return Ok(SequenceSpec::PolyExp {
                    base_val: a,
                    poly: RatPoly::monomial(BigRational::one(), k),
                });
            }
            return Ok(SequenceSpec::Geometric { ratio: a });
        }
        Err(self.err("expected an exponent: n, n^k, (P(n)), or prime(n)"))
    }
}

/// Parse the sequence mini-language; see the CLI docs for the grammar.
pub fn parse_spec(s: &str) -> Result<SequenceSpec> {
    let compact: String = s.chars().filter(|c| !c.is_whitespace()).collect();
    let mut cur = Cursor::new(&compact);
    let spec = cur.parse_spec()?;
    if cur.pos != compact.len() {
        return Err(Error::Parse {
            pos: cur.pos,
            msg: format!("trailing input: {:?}", &compact[cur.pos..]),
        });
    }
    spec.validate()?;
    Ok(spec)
}

/// Fibonacci pair `(F_{n-1}, F_n)` by fast doubling.
pub fn fib_pair(n: u64) -> (BigUint, BigUint) {
    // helper(k) = (F_k, F_{k+1})
    fn helper(k: u64) -> (BigUint, BigUint) {
        if k == 0 {
            return (BigUint::zero(), BigUint::one());
        }
        let (a, b) = helper(k / 2);
        // F_{2m} = F_m (2 F_{m+1} - F_m); F_{2m+1} = F_m^2 + F_{m+1}^2
        let c = &a * ((&b << 1) - &a);
        let d = &a * &a + &b * &b;
        if k % 2 == 0 {
            (c, d)
        } else {
            let e = &c + &d;
            (d, e)
        }
    }
    if n == 0 {
        return (BigUint::one(), BigUint::zero()); // (F_{-1}, F_0)
    }
    helper(n - 1)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn roundtrip(s: &str) {
        let spec = parse_spec(s).unwrap();
        assert_eq!(spec.render(), s, "canonical form changed");
        assert_eq!(parse_spec(&spec.render()).unwrap(), spec);
    }

    #[test]
    fn parse_render_roundtrip() {
        for s in [
            "2^n",
            "(3/2)^n",
            "2^(n^2)",
            "2^(n^3)",
            "2^((1/2)*n^2+(1/2)*n)",
            "n!",
            "n^n",
            "p(n)",
            "p~(n)",
            "fib-exp(2)",
            "superfact(2)",
            "iterprod(2^n,3)",
            "dexp(2,2)",
            "dexp(2,phi)",
            "2^prime(n)",
            "powerexp(1,0,1,1/2)",
        ] {
            roundtrip(s);
        }
    }

    #[test]
    fn parse_variants() {
        assert_eq!(parse_spec("2^(n^2)").unwrap(), parse_spec("2 ^ ( n^2 )").unwrap());
        // decimal coefficient
        let p = parse_spec("2^(0.5*n^2+0.5*n)").unwrap();
        assert_eq!(p, parse_spec("2^((1/2)*n^2+(1/2)*n)").unwrap());
    }

    #[test]
    fn rejects_bad_input() {
        assert!(parse_spec("1^n").is_ok()); // geometric allows a = 1 (constant 1)
        assert!(parse_spec("0^n").is_err());
        assert!(parse_spec("2^(3)").is_err()); // constant exponent polynomial
        assert!(parse_spec("junk").is_err());
        assert!(parse_spec("2^n extra").is_err());
        assert!(parse_spec("powerexp(1,0,1,2)").is_err()); // integer beta
        assert!(parse_spec("dexp(1,2)").is_err()); // a must be > 1
    }

    #[test]
    fn fib_pair_values() {
        let (a, b) = fib_pair(10);
        assert_eq!(a, BigUint::from(34u32)); // F_9
        assert_eq!(b, BigUint::from(55u32)); // F_10
        let (a, b) = fib_pair(1);
        assert_eq!(a, BigUint::from(0u32)); // F_0
        assert_eq!(b, BigUint::from(1u32)); // F_1
        // iterative oracle
        let (mut x, mut y) = (BigUint::from(0u32), BigUint::from(1u32));
        for n in 1..=300u64 {
            assert_eq!(fib_pair(n), (x.clone(), y.clone()), "n = {n}");
            let z = &x + &y;
            x = y;
            y = z;
        }
    }

    #[test]
    fn theta_value_phi() {
        let phi = Theta::golden_ratio();
        let v = phi.value(160).unwrap();
        let s = format!("{v}");
        assert!(s.starts_with("1.61803398874989484820458683436"), "{s}");
        assert!(v.err().within_bits(160));
    }

    #[test]
    fn class_degree_hints() {
        assert_eq!(parse_spec("2^n").unwrap().known_class_degree(), Some(1));
        assert_eq!(parse_spec("2^(n^3)").unwrap().known_class_degree(), Some(3));
        assert_eq!(parse_spec("n!").unwrap().known_class_degree(), Some(1));
        assert_eq!(parse_spec("superfact(2)").unwrap().known_class_degree(), Some(2));
        assert_eq!(parse_spec("p(n)").unwrap().known_class_degree(), Some(1));
        assert_eq!(parse_spec("powerexp(1,0,1,1/2)").unwrap().known_class_degree(), Some(1));
        assert_eq!(parse_spec("2^prime(n)").unwrap().known_class_degree(), None);
    }
}
