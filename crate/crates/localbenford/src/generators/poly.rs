//! Polynomials with exact rational coefficients.

use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{One, Signed, Zero};

/// A polynomial over Q, coefficients ascending by degree, no trailing zeros.
#[derive(Clone, PartialEq, Eq, Debug)]
pub struct RatPoly {
    coeffs: Vec<BigRational>,
}

impl RatPoly {
    pub fn new(mut coeffs: Vec<BigRational>) -> RatPoly {
        while coeffs.last().map(|c| c.is_zero()).unwrap_or(false) {
            coeffs.pop();
        }
        RatPoly { coeffs }
    }

    pub fn zero() -> RatPoly {
        RatPoly { coeffs: vec![] }
    }

    /// The monomial `c * n^k`.
    pub fn monomial(c: BigRational, k: usize) -> RatPoly {
        if c.is_zero() {
            return RatPoly::zero();
        }
        let mut coeffs = vec![BigRational::zero(); k + 1];
        coeffs[k] = c;
        RatPoly { coeffs }
    }

    pub fn coeffs(&self) -> &[BigRational] {
        &self.coeffs
    }

    pub fn is_zero(&self) -> bool {
        self.coeffs.is_empty()
    }

    pub fn degree(&self) -> usize {
        self.coeffs.len().saturating_sub(1)
    }

    pub fn leading_coeff(&self) -> Option<&BigRational> {
        self.coeffs.last()
    }

    pub fn eval(&self, n: &BigInt) -> BigRational {
        let mut acc = BigRational::zero();
        for c in self.coeffs.iter().rev() {
            acc = acc * BigRational::from(n.clone()) + c;
        }
        acc
    }

    pub fn add(&self, other: &RatPoly) -> RatPoly {
        let len = self.coeffs.len().max(other.coeffs.len());
        let mut out = Vec::with_capacity(len);
        for i in 0..len {
            let a = self.coeffs.get(i).cloned().unwrap_or_else(BigRational::zero);
            let b = other.coeffs.get(i).cloned().unwrap_or_else(BigRational::zero);
            out.push(a + b);
        }
        RatPoly::new(out)
    }

    /// Exact forward differences `Δ^j P(n0)` for `j = 0..=k`, via the
    /// alternating binomial expansion.
    pub fn diffs_at(&self, n0: &BigInt, k: usize) -> Vec<BigRational> {
        // table[i] = P(n0 + i)
        let mut table: Vec<BigRational> =
            (0..=k).map(|i| self.eval(&(n0 + BigInt::from(i)))).collect();
        let mut out = Vec::with_capacity(k + 1);
        out.push(table[0].clone());
        for _j in 1..=k {
            for i in 0..table.len() - 1 {
                table[i] = &table[i + 1] - &table[i];
            }
            table.pop();
            out.push(table[0].clone());
        }
        out
    }

    /// Does every coefficient have denominator 1?
    pub fn is_integer_coeff(&self) -> bool {
        self.coeffs.iter().all(|c| c.denom().is_one())
    }
}

impl std::fmt::Display for RatPoly {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        if self.coeffs.is_empty() {
            return f.write_str("0");
        }
        let mut first = true;
        for (k, c) in self.coeffs.iter().enumerate().rev() {
            if c.is_zero() {
                continue;
            }
            let mag = c.abs();
            if first {
                if c.is_negative() {
                    f.write_str("-")?;
                }
                first = false;
            } else if c.is_negative() {
                f.write_str("-")?;
            } else {
                f.write_str("+")?;
            }
            let coeff_str = if mag.denom().is_one() {
                mag.numer().to_string()
            } else {
                format!("({}/{})", mag.numer(), mag.denom())
            };
            match k {
                0 => write!(f, "{coeff_str}")?,
                _ => {
                    if mag.is_one() {
                        // bare n^k
                    } else {
                        write!(f, "{coeff_str}*")?;
                    }
                    if k == 1 {
                        f.write_str("n")?;
                    } else {
                        write!(f, "n^{k}")?;
                    }
                }
            }
        }
        Ok(())
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn rp(coeffs: &[(i64, i64)]) -> RatPoly {
        RatPoly::new(
            coeffs
                .iter()
                .map(|&(p, q)| BigRational::new(BigInt::from(p), BigInt::from(q)))
                .collect(),
        )
    }

    #[test]
    fn eval_and_diffs() {
        // P(n) = n^2
        let p = rp(&[(0, 1), (0, 1), (1, 1)]);
        assert_eq!(p.eval(&BigInt::from(7)), BigRational::from(BigInt::from(49)));
        let d = p.diffs_at(&BigInt::from(1), 2);
        assert_eq!(d[0], BigRational::from(BigInt::from(1)));
        assert_eq!(d[1], BigRational::from(BigInt::from(3)));
        assert_eq!(d[2], BigRational::from(BigInt::from(2)));
    }

    #[test]
    fn degree_collapse_to_zero() {
        // Δ^(d+1) P is identically zero for degree d
        let p = rp(&[(5, 3), (-7, 2), (1, 1), (11, 4)]);
        for n0 in [1i64, 17, 1000] {
            let d = p.diffs_at(&BigInt::from(n0), 5);
            assert!(d[4].is_zero() && d[5].is_zero());
            assert!(!d[3].is_zero());
        }
    }

    #[test]
    fn display_canonical() {
        let p = rp(&[(0, 1), (1, 2), (1, 2)]);
        assert_eq!(p.to_string(), "(1/2)*n^2+(1/2)*n");
        let q = rp(&[(0, 1), (0, 1), (1, 1)]);
        assert_eq!(q.to_string(), "n^2");
        let r = rp(&[(3, 1), (-1, 1)]);
        assert_eq!(r.to_string(), "-n+3");
    }
}
