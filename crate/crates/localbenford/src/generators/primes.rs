//! Segmented sieve of Eratosthenes, streaming primes in order.

const SEGMENT_BITS: u64 = 1 << 18;

/// Streams the primes 2, 3, 5, ... with bounded memory.
///
/// Base primes are grown lazily as segments advance past the square of the
/// current base-prime ceiling.
#[derive(Clone, Debug)]
pub struct PrimeStream {
    base_primes: Vec<u64>,
    base_limit: u64,
    segment_start: u64,
    segment: Vec<bool>, // segment[i] = (segment_start + i) is composite
    cursor: usize,
    emitted: u64,
}

impl PrimeStream {
    pub fn new() -> PrimeStream {
        let mut s = PrimeStream {
            base_primes: Vec::new(),
            base_limit: 1,
            segment_start: 2,
            segment: Vec::new(),
            cursor: 0,
            emitted: 0,
        };
        s.fill_segment();
        s
    }

    /// Number of primes already produced (`n` after the n-th call).
    pub fn count(&self) -> u64 {
        self.emitted
    }

    fn grow_base_primes(&mut self, limit: u64) {
        if limit <= self.base_limit {
            return;
        }
        let mut sieve = vec![true; (limit + 1) as usize];
        let mut p = 2u64;
        while p * p <= limit {
            if sieve[p as usize] {
                let mut j = p * p;
                while j <= limit {
                    sieve[j as usize] = false;
                    j += p;
                }
            }
            p += 1;
        }
        self.base_primes = (2..=limit).filter(|&i| sieve[i as usize]).collect();
        self.base_limit = limit;
    }

    fn fill_segment(&mut self) {
        let start = self.segment_start;
        let end = start + SEGMENT_BITS; // exclusive
        let need = (end as f64).sqrt() as u64 + 2;
        if need > self.base_limit {
            self.grow_base_primes(need.max(1 << 10));
        }
        self.segment.clear();
        self.segment.resize(SEGMENT_BITS as usize, false);
        for &p in &self.base_primes {
            if p * p >= end {
                break;
            }
            let mut j = (start + p - 1) / p * p;
            if j < p * p {
                j = p * p;
            }
            while j < end {
                self.segment[(j - start) as usize] = true;
                j += p;
            }
        }
        self.cursor = 0;
    }

    /// The next prime in order.
    pub fn next_prime(&mut self) -> u64 {
        loop {
            while self.cursor < self.segment.len() {
                let i = self.cursor;
                self.cursor += 1;
                if !self.segment[i] {
                    let v = self.segment_start + i as u64;
                    if v >= 2 {
                        self.emitted += 1;
                        return v;
                    }
                }
            }
            self.segment_start += SEGMENT_BITS;
            self.fill_segment();
        }
    }

    /// Skip ahead so the next call to `next_prime` returns the (n+1)-th prime.
    pub fn skip_to(&mut self, n: u64) {
        while self.emitted < n {
            self.next_prime();
        }
    }
}

impl Default for PrimeStream {
    fn default() -> Self {
        Self::new()
    }
}

/// The n-th prime (1-indexed: `nth_prime(1) = 2`).
pub fn nth_prime(n: u64) -> u64 {
    let mut s = PrimeStream::new();
    let mut p = 0;
    for _ in 0..n {
        p = s.next_prime();
    }
    p
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn first_primes() {
        let mut s = PrimeStream::new();
        let got: Vec<u64> = (0..15).map(|_| s.next_prime()).collect();
        assert_eq!(got, [2, 3, 5, 7, 11, 13, 17, 19, 23, 29, 31, 37, 41, 43, 47]);
    }

    #[test]
    fn nth_prime_known_values() {
        assert_eq!(nth_prime(1), 2);
        assert_eq!(nth_prime(25), 97);
        assert_eq!(nth_prime(1000), 7919);
        assert_eq!(nth_prime(10000), 104729);
    }

    #[test]
    fn crosses_segment_boundaries() {
        // trial division oracle on a window far past the first segment
        let mut s = PrimeStream::new();
        let mut last = 0;
        for _ in 0..30000 {
            last = s.next_prime();
        }
        assert_eq!(last, 350377); // 30000th prime
        let is_prime = |v: u64| {
            let mut d = 2;
            while d * d <= v {
                if v % d == 0 {
                    return false;
                }
                d += 1;
            }
            v >= 2
        };
        assert!(is_prime(last));
    }

    #[test]
    fn skip_matches_replay() {
        let mut a = PrimeStream::new();
        a.skip_to(500);
        let mut b = PrimeStream::new();
        for _ in 0..500 {
            b.next_prime();
        }
        assert_eq!(a.next_prime(), b.next_prime());
    }
}
