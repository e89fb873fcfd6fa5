use std::collections::HashMap;

use num_traits::One;

use super::{BigRat, Poly};

/// Euler's totient by trial division.
pub fn euler_phi(mut k: u64) -> u64 {
    let mut phi = k;
    let mut p = 2;
    while p * p <= k {
        if k % p == 0 {
            while k % p == 0 {
                k /= p;
            }
            phi -= phi / p;
        }
        p += 1;
    }
    if k > 1 {
        phi -= phi / k;
    }
    phi
}

/// Memoized cyclotomic polynomials, built by dividing `x^k - 1` by the
/// cyclotomic polynomials of the proper divisors of `k`.
#[derive(Debug, Default)]
pub struct CyclotomicTable {
    cache: HashMap<u64, Poly>,
}

impl CyclotomicTable {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn get(&mut self, k: u64) -> &Poly {
        assert!(k >= 1, "cyclotomic index must be positive");
        if !self.cache.contains_key(&k) {
            let mut acc = &Poly::monomial(BigRat::one(), k as usize) - &Poly::one();
            for d in (1..k).filter(|d| k % d == 0) {
                let phi_d = self.get(d).clone();
                acc = acc.exact_div(&phi_d);
            }
            self.cache.insert(k, acc);
        }
        &self.cache[&k]
    }
}

/// The `k`-th cyclotomic polynomial. Panics if `k == 0`.
pub fn cyclotomic(k: u64) -> Poly {
    CyclotomicTable::new().get(k).clone()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn small_indices() {
        assert_eq!(cyclotomic(1), Poly::from_ints(&[-1, 1]));
        assert_eq!(cyclotomic(2), Poly::from_ints(&[1, 1]));
        assert_eq!(cyclotomic(4), Poly::from_ints(&[1, 0, 1]));
        assert_eq!(cyclotomic(6), Poly::from_ints(&[1, -1, 1]));
        assert_eq!(cyclotomic(12), Poly::from_ints(&[1, 0, -1, 0, 1]));
    }

    #[test]
    fn degree_is_totient_and_integral() {
        let mut t = CyclotomicTable::new();
        for k in 1..=60u64 {
            let f = t.get(k);
            assert_eq!(f.degree(), Some(euler_phi(k) as usize), "k = {k}");
            assert!(f.is_integral() && f.is_monic());
        }
        // 105 is the first index with a coefficient outside {-1, 0, 1}
        assert!(t.get(105).coeffs().iter().any(|c| c.numer().magnitude() == &2u32.into()));
    }

    #[test]
    fn totient_values() {
        let expected = [1, 1, 2, 2, 4, 2, 6, 4, 6, 4, 10, 4];
        for (k, &phi) in (1..=12).zip(&expected) {
            assert_eq!(euler_phi(k), phi);
        }
    }
}
