//! Exact partition numbers via the Euler pentagonal-number recurrence.

use num_bigint::BigUint;
use num_traits::{One, Zero};

use crate::error::{Error, Result};

/// Incrementally extensible table of p(0), p(1), ..., over big integers.
///
/// p(n) = Σ_{k≥1} (-1)^{k+1} [ p(n - k(3k-1)/2) + p(n - k(3k+1)/2) ].
#[derive(Clone, Debug, Default)]
pub struct PartitionTable {
    values: Vec<BigUint>,
}

impl PartitionTable {
    pub fn new() -> PartitionTable {
        PartitionTable { values: vec![BigUint::one()] } // p(0) = 1
    }

    pub fn len(&self) -> usize {
        self.values.len()
    }

    pub fn is_empty(&self) -> bool {
        self.values.is_empty()
    }

    pub fn from_values(values: Vec<BigUint>) -> PartitionTable {
        assert!(!values.is_empty());
        PartitionTable { values }
    }

    pub fn values(&self) -> &[BigUint] {
        &self.values
    }

    /// Extend the table so `p(n)` is available, then return it.
    pub fn get(&mut self, n: u64) -> &BigUint {
        while (self.values.len() as u64) <= n {
            let i = self.values.len() as u64;
            let mut acc_pos = BigUint::zero();
            let mut acc_neg = BigUint::zero();
            let mut k = 1u64;
            loop {
                let g1 = k * (3 * k - 1) / 2;
                if g1 > i {
                    break;
                }
                let positive = k % 2 == 1;
                let t1 = &self.values[(i - g1) as usize];
                if positive {
                    acc_pos += t1;
                } else {
                    acc_neg += t1;
                }
                let g2 = k * (3 * k + 1) / 2;
                if g2 <= i {
                    let t2 = &self.values[(i - g2) as usize];
                    if positive {
                        acc_pos += t2;
                    } else {
                        acc_neg += t2;
                    }
                }
                k += 1;
            }
            self.values.push(acc_pos - acc_neg);
        }
        &self.values[n as usize]
    }
}

/// Exact `p(n)` by the pentagonal recurrence, refusing past `max_n`.
pub fn partition_exact(n: u64, max_n: u64) -> Result<BigUint> {
    if n > max_n {
        return Err(Error::ExceedsMaximum { what: "exact partition table", n, max: max_n });
    }
    let mut t = PartitionTable::new();
    Ok(t.get(n).clone())
}

#[cfg(test)]
mod tests {
    use super::*;

    /// Independent oracle: dynamic programming over parts
    /// (number of partitions of n into parts <= m).
    fn partition_dp(n: usize) -> BigUint {
        let mut table = vec![BigUint::zero(); n + 1];
        table[0] = BigUint::one();
        for part in 1..=n {
            for total in part..=n {
                let add = table[total - part].clone();
                table[total] += add;
            }
        }
        table[n].clone()
    }

    #[test]
    fn small_values() {
        let mut t = PartitionTable::new();
        let got: Vec<u64> = (0..=10)
            .map(|n| u64::try_from(t.get(n)).unwrap())
            .collect();
        assert_eq!(got, [1, 1, 2, 3, 5, 7, 11, 15, 22, 30, 42]);
    }

    #[test]
    fn p50_is_204226() {
        assert_eq!(partition_exact(50, 100).unwrap(), BigUint::from(204226u64));
    }

    #[test]
    fn matches_dp_oracle_to_200() {
        let mut t = PartitionTable::new();
        t.get(200);
        for n in 0..=200usize {
            assert_eq!(t.values()[n], partition_dp(n), "p({n}) mismatch");
        }
    }

    #[test]
    fn refuses_past_cap() {
        assert!(matches!(partition_exact(11, 10), Err(Error::ExceedsMaximum { .. })));
    }
}
