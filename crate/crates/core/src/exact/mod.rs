//! Exact arithmetic substrate: rationals, dense univariate polynomials,
//! fraction-free determinants, resultants, squarefree decomposition and
//! cyclotomic polynomials.
//!
//! Polynomial coefficients are always stored in ascending-degree order.

mod cyclotomic;
mod matrix;
mod poly;
mod resultant;
mod squarefree;

use num_bigint::BigInt;
use num_integer::Integer;
use num_traits::{One, Signed, Zero};

use crate::error::{Error, Result};

pub use cyclotomic::{cyclotomic, euler_phi, CyclotomicTable};
pub use matrix::{bareiss_det, bareiss_det_int, solve_exact, Matrix};
pub use poly::Poly;
pub use resultant::{resultant, sylvester_matrix};
pub use squarefree::{yun_squarefree, SquarefreeDecomposition};

/// Canonical rational: reduced, positive denominator, zero is `0/1`.
pub type BigRat = num_rational::BigRational;

pub fn rat(n: i64) -> BigRat {
    BigRat::from_integer(BigInt::from(n))
}

pub fn ratio(n: i64, d: i64) -> BigRat {
    BigRat::new(BigInt::from(n), BigInt::from(d))
}

pub fn is_integer(q: &BigRat) -> bool {
    q.denom().is_one()
}

/// Integer power with a signed exponent; `0^0 = 1`. Panics on `0^(-k)`.
pub fn pow_rat(base: &BigRat, exp: i64) -> BigRat {
    if exp >= 0 {
        num_traits::pow::pow(base.clone(), exp as usize)
    } else {
        num_traits::pow::pow(base.recip(), exp.unsigned_abs() as usize)
    }
}

/// Parses `"p"`, `"-p"`, `"p/q"` (surrounding whitespace allowed).
pub fn parse_rat(s: &str) -> Result<BigRat> {
    let t = s.trim();
    let bad = || Error::InvalidRational(s.to_string());
    let (num, den) = match t.split_once('/') {
        Some((n, d)) => (n.trim(), d.trim()),
        None => (t, "1"),
    };
    let num: BigInt = num.parse().map_err(|_| bad())?;
    let den: BigInt = den.parse().map_err(|_| bad())?;
    if den.is_zero() {
        return Err(bad());
    }
    Ok(BigRat::new(num, den))
}

/// Canonical rendering: `"p"` for integers, `"p/q"` otherwise, full decimal digits.
pub fn format_rat(q: &BigRat) -> String {
    if is_integer(q) {
        q.numer().to_string()
    } else {
        format!("{}/{}", q.numer(), q.denom())
    }
}

/// Divisibility in the integers with the ring convention `0 | x <=> x = 0`.
pub fn int_divides(d: &BigInt, x: &BigInt) -> bool {
    if d.is_zero() {
        x.is_zero()
    } else {
        x.is_multiple_of(d)
    }
}

/// Least common multiple of the denominators of `qs` (1 for an empty slice).
pub fn denominator_lcm<'a>(qs: impl IntoIterator<Item = &'a BigRat>) -> BigInt {
    qs.into_iter()
        .fold(BigInt::one(), |acc, q| acc.lcm(q.denom()))
}

/// Floor and ceiling of `q * 2^bits`, as integers.
pub(crate) fn scaled_floor_ceil(q: &BigRat, bits: u64) -> (BigInt, BigInt) {
    let scaled = q.numer() << bits;
    let (f, r) = scaled.div_mod_floor(q.denom());
    let c = if r.is_zero() { f.clone() } else { &f + 1 };
    (f, c)
}

pub(crate) fn dyadic(m: BigInt, bits: u64) -> BigRat {
    BigRat::new(m, BigInt::one() << bits)
}

/// Nearest dyadic rational with `bits` fractional bits (ties toward +inf).
pub(crate) fn round_dyadic(q: &BigRat, bits: u64) -> BigRat {
    let scaled: BigInt = (q.numer() << (bits + 1)).div_floor(q.denom());
    // floor((2x + 1) / 2) on the doubled value
    let m = (scaled + BigInt::one()) >> 1u32;
    dyadic(m, bits)
}

/// Rational upper bound for `sqrt(q)`, `q >= 0`, tight to roughly `2^-bits`.
pub(crate) fn sqrt_upper(q: &BigRat, bits: u64) -> BigRat {
    assert!(!q.is_negative(), "sqrt of a negative rational");
    // ceil(sqrt(ceil(q * 4^bits))) / 2^bits
    let (_, c) = scaled_floor_ceil(q, 2 * bits);
    let mut s = c.sqrt();
    if &s * &s < c {
        s += 1;
    }
    dyadic(s, bits)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn parse_and_format() {
        assert_eq!(parse_rat(" -6/4 ").unwrap(), ratio(-3, 2));
        assert_eq!(format_rat(&ratio(-3, 2)), "-3/2");
        assert_eq!(format_rat(&ratio(8, 4)), "2");
        assert!(parse_rat("1/0").is_err());
        assert!(parse_rat("1.5").is_err());
        assert!(parse_rat("").is_err());
    }

    #[test]
    fn divisibility_convention() {
        let z = BigInt::zero();
        assert!(int_divides(&z, &z));
        assert!(!int_divides(&z, &BigInt::from(3)));
        assert!(int_divides(&BigInt::from(-3), &BigInt::from(12)));
        assert!(!int_divides(&BigInt::from(5), &BigInt::from(12)));
    }

    #[test]
    fn sqrt_bounds_bracket() {
        let two = rat(2);
        let hi = sqrt_upper(&two, 40);
        assert!(&hi * &hi >= two);
        assert!(&hi * &hi - &two <= dyadic(BigInt::from(4), 40));
        assert_eq!(sqrt_upper(&rat(9), 10), rat(3));
    }

    #[test]
    fn rounding() {
        assert_eq!(round_dyadic(&ratio(1, 3), 2), ratio(1, 4));
        assert_eq!(round_dyadic(&ratio(-1, 3), 2), ratio(-1, 4));
        assert_eq!(pow_rat(&rat(2), -3), ratio(1, 8));
        assert_eq!(pow_rat(&rat(0), 0), rat(1));
    }
}
