//! Dense univariate polynomials over the rationals.

use std::fmt;
use std::ops::{Add, Mul, Neg, Sub};

use num_bigint::BigInt;
use num_integer::Integer;
use num_traits::{One, Signed, Zero};

use super::{denominator_lcm, rat, BigRat};
use crate::error::{Error, Result};

/// Polynomial with rational coefficients in ascending-degree order.
///
/// The coefficient vector never has trailing zeros, so the zero polynomial is
/// the empty vector and equality is structural.
#[derive(Clone, PartialEq, Eq, Hash, Default)]
pub struct Poly {
    coeffs: Vec<BigRat>,
}

impl Poly {
    pub fn new(mut coeffs: Vec<BigRat>) -> Self {
        while coeffs.last().is_some_and(|c| c.is_zero()) {
            coeffs.pop();
        }
        Poly { coeffs }
    }

    pub fn from_ints(coeffs: &[i64]) -> Self {
        Poly::new(coeffs.iter().map(|&c| rat(c)).collect())
    }

    pub fn zero() -> Self {
        Poly { coeffs: Vec::new() }
    }

    pub fn one() -> Self {
        Poly::constant(BigRat::one())
    }

    pub fn constant(c: BigRat) -> Self {
        Poly::new(vec![c])
    }

    /// `c * x^d`
    pub fn monomial(c: BigRat, d: usize) -> Self {
        let mut coeffs = vec![BigRat::zero(); d + 1];
        coeffs[d] = c;
        Poly::new(coeffs)
    }

    /// `x - a`
    pub fn linear_root(a: &BigRat) -> Self {
        Poly::new(vec![-a.clone(), BigRat::one()])
    }

    pub fn coeffs(&self) -> &[BigRat] {
        &self.coeffs
    }

    pub fn into_coeffs(self) -> Vec<BigRat> {
        self.coeffs
    }

    pub fn coeff(&self, i: usize) -> BigRat {
        self.coeffs.get(i).cloned().unwrap_or_else(BigRat::zero)
    }

    pub fn is_zero(&self) -> bool {
        self.coeffs.is_empty()
    }

    pub fn is_one(&self) -> bool {
        self.coeffs.len() == 1 && self.coeffs[0].is_one()
    }

    /// `None` for the zero polynomial.
    pub fn degree(&self) -> Option<usize> {
        self.coeffs.len().checked_sub(1)
    }

    pub fn leading_coeff(&self) -> Option<&BigRat> {
        self.coeffs.last()
    }

    pub fn is_monic(&self) -> bool {
        self.leading_coeff().is_some_and(|c| c.is_one())
    }

    pub fn is_integral(&self) -> bool {
        self.coeffs.iter().all(|c| c.denom().is_one())
    }

    pub fn eval(&self, x: &BigRat) -> BigRat {
        self.coeffs
            .iter()
            .rev()
            .fold(BigRat::zero(), |acc, c| acc * x + c)
    }

    pub fn derivative(&self) -> Poly {
        Poly::new(
            self.coeffs
                .iter()
                .enumerate()
                .skip(1)
                .map(|(i, c)| c * rat(i as i64))
                .collect(),
        )
    }

    pub fn scale(&self, c: &BigRat) -> Poly {
        Poly::new(self.coeffs.iter().map(|a| a * c).collect())
    }

    /// `p(c x)`
    pub fn compose_scale(&self, c: &BigRat) -> Poly {
        let mut pw = BigRat::one();
        let mut out = Vec::with_capacity(self.coeffs.len());
        for a in &self.coeffs {
            out.push(a * &pw);
            pw *= c;
        }
        Poly::new(out)
    }

    /// Divides by the leading coefficient; the zero polynomial stays zero.
    pub fn monic(&self) -> Poly {
        match self.leading_coeff() {
            Some(lc) => self.scale(&lc.recip()),
            None => Poly::zero(),
        }
    }

    pub fn pow(&self, e: u32) -> Poly {
        let mut acc = Poly::one();
        for _ in 0..e {
            acc = &acc * self;
        }
        acc
    }

    /// Euclidean division: `self = q * g + r` with `deg r < deg g`.
    pub fn divrem(&self, g: &Poly) -> Result<(Poly, Poly)> {
        let dg = g.degree().ok_or(Error::DivisionByZero)?;
        let lc_inv = g.coeffs[dg].recip();
        let mut rem = self.coeffs.clone();
        if rem.len() <= dg {
            return Ok((Poly::zero(), self.clone()));
        }
        let mut quot = vec![BigRat::zero(); rem.len() - dg];
        for i in (0..quot.len()).rev() {
            let c = &rem[i + dg] * &lc_inv;
            if !c.is_zero() {
                for (j, gj) in g.coeffs.iter().enumerate() {
                    rem[i + j] -= &c * gj;
                }
            }
            quot[i] = c;
        }
        rem.truncate(dg);
        Ok((Poly::new(quot), Poly::new(rem)))
    }

    pub fn rem(&self, g: &Poly) -> Result<Poly> {
        self.divrem(g).map(|(_, r)| r)
    }

    /// Quotient of a division expected to be exact.
    pub(crate) fn exact_div(&self, g: &Poly) -> Poly {
        let (q, r) = self.divrem(g).expect("exact_div by zero polynomial");
        debug_assert!(r.is_zero(), "exact_div left a remainder");
        q
    }

    /// Pseudo-remainder: `lc(g)^(deg f - deg g + 1) * f mod g`.
    pub fn pseudo_rem(&self, g: &Poly) -> Result<Poly> {
        let dg = g.degree().ok_or(Error::DivisionByZero)?;
        let df = match self.degree() {
            Some(d) if d >= dg => d,
            _ => return Ok(self.clone()),
        };
        let lc = &g.coeffs[dg];
        let scaled = self.scale(&super::pow_rat(lc, (df - dg + 1) as i64));
        scaled.rem(g)
    }

    /// Monic greatest common divisor; `gcd(0, 0) = 0`.
    pub fn gcd(&self, g: &Poly) -> Poly {
        let (mut a, mut b) = (self.monic(), g.monic());
        while !b.is_zero() {
            let r = a.rem(&b).expect("nonzero divisor");
            a = b;
            b = r.monic();
        }
        a
    }

    /// Splits off the rational content: `self = content * prim` where `prim`
    /// has coprime integer coefficients and a positive leading coefficient.
    pub fn primitive_part(&self) -> (BigRat, Poly) {
        if self.is_zero() {
            return (BigRat::zero(), Poly::zero());
        }
        let den = denominator_lcm(&self.coeffs);
        let ints: Vec<BigInt> = self
            .coeffs
            .iter()
            .map(|c| c.numer() * (&den / c.denom()))
            .collect();
        let mut g = ints.iter().fold(BigInt::zero(), |acc, c| acc.gcd(c));
        if ints.last().unwrap().is_negative() {
            g = -g;
        }
        let prim = Poly::new(
            ints.iter()
                .map(|c| BigRat::from_integer(c / &g))
                .collect(),
        );
        (BigRat::new(g, den), prim)
    }

    /// Lagrange interpolation through `(xs[i], ys[i])`; the nodes must be
    /// pairwise distinct.
    pub fn interpolate(xs: &[BigRat], ys: &[BigRat]) -> Poly {
        assert_eq!(xs.len(), ys.len(), "interpolation needs matching lengths");
        let mut acc = Poly::zero();
        for (i, (xi, yi)) in xs.iter().zip(ys).enumerate() {
            if yi.is_zero() {
                continue;
            }
            let mut basis = Poly::one();
            let mut denom = BigRat::one();
            for (j, xj) in xs.iter().enumerate() {
                if j != i {
                    basis = &basis * &Poly::linear_root(xj);
                    denom *= xi - xj;
                }
            }
            acc = &acc + &basis.scale(&(yi / denom));
        }
        acc
    }

    /// Integer coefficients of the primitive part.
    pub fn primitive_int_coeffs(&self) -> Vec<BigInt> {
        self.primitive_part()
            .1
            .coeffs
            .into_iter()
            .map(|c| c.to_integer())
            .collect()
    }
}

impl fmt::Debug for Poly {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "Poly({self})")
    }
}

impl fmt::Display for Poly {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.is_zero() {
            return write!(f, "0");
        }
        let mut first = true;
        for (i, c) in self.coeffs.iter().enumerate().rev() {
            if c.is_zero() {
                continue;
            }
            let neg = c.is_negative();
            let mag = c.abs();
            if first {
                if neg {
                    write!(f, "-")?;
                }
            } else {
                write!(f, " {} ", if neg { '-' } else { '+' })?;
            }
            first = false;
            let show_coeff = !mag.is_one() || i == 0;
            if show_coeff {
                write!(f, "{}", super::format_rat(&mag))?;
            }
            match i {
                0 => {}
                1 => write!(f, "{}x", if show_coeff { "*" } else { "" })?,
                _ => write!(f, "{}x^{i}", if show_coeff { "*" } else { "" })?,
            }
        }
        Ok(())
    }
}

impl Add<&Poly> for &Poly {
    type Output = Poly;
    fn add(self, rhs: &Poly) -> Poly {
        let len = self.coeffs.len().max(rhs.coeffs.len());
        Poly::new((0..len).map(|i| self.coeff(i) + rhs.coeff(i)).collect())
    }
}

impl Sub<&Poly> for &Poly {
    type Output = Poly;
    fn sub(self, rhs: &Poly) -> Poly {
        let len = self.coeffs.len().max(rhs.coeffs.len());
        Poly::new((0..len).map(|i| self.coeff(i) - rhs.coeff(i)).collect())
    }
}

impl Mul<&Poly> for &Poly {
    type Output = Poly;
    fn mul(self, rhs: &Poly) -> Poly {
        if self.is_zero() || rhs.is_zero() {
            return Poly::zero();
        }
        let mut out = vec![BigRat::zero(); self.coeffs.len() + rhs.coeffs.len() - 1];
        for (i, a) in self.coeffs.iter().enumerate() {
            if a.is_zero() {
                continue;
            }
            for (j, b) in rhs.coeffs.iter().enumerate() {
                out[i + j] += a * b;
            }
        }
        Poly::new(out)
    }
}

impl Neg for &Poly {
    type Output = Poly;
    fn neg(self) -> Poly {
        Poly::new(self.coeffs.iter().map(|c| -c).collect())
    }
}

macro_rules! forward_owned {
    ($($tr:ident $m:ident),*) => {$(
        impl $tr for Poly {
            type Output = Poly;
            fn $m(self, rhs: Poly) -> Poly { (&self).$m(&rhs) }
        }
        impl $tr<&Poly> for Poly {
            type Output = Poly;
            fn $m(self, rhs: &Poly) -> Poly { (&self).$m(rhs) }
        }
    )*};
}
forward_owned!(Add add, Sub sub, Mul mul);

impl Neg for Poly {
    type Output = Poly;
    fn neg(self) -> Poly {
        -&self
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::exact::ratio;

    fn p(c: &[i64]) -> Poly {
        Poly::from_ints(c)
    }

    #[test]
    fn trims_and_degree() {
        assert_eq!(p(&[1, 2, 0, 0]).degree(), Some(1));
        assert!(p(&[0, 0]).is_zero());
        assert_eq!(Poly::zero().degree(), None);
    }

    #[test]
    fn gcd_shared_factor() {
        assert_eq!(p(&[-1, 0, 1]).gcd(&p(&[-1, 1])), p(&[-1, 1]));
    }

    #[test]
    fn gcd_coprime() {
        // x^2 - x - 1 = 1 * (x^2 + 1) + (-x - 2); x^2 + 1 = (-x + 2)(-x - 2) + 5
        assert_eq!(p(&[-1, -1, 1]).gcd(&p(&[1, 0, 1])), Poly::one());
    }

    #[test]
    fn exact_divrem() {
        let (q, r) = p(&[2, -3, 1]).divrem(&p(&[-1, 1])).unwrap();
        assert_eq!(q, p(&[-2, 1]));
        assert!(r.is_zero());
    }

    #[test]
    fn divrem_by_zero_errors() {
        assert_eq!(p(&[1, 1]).divrem(&Poly::zero()), Err(Error::DivisionByZero));
    }

    #[test]
    fn divrem_with_remainder() {
        let f = p(&[1, 0, 0, 2]);
        let g = p(&[0, 3, 1]);
        let (q, r) = f.divrem(&g).unwrap();
        assert_eq!(&(&q * &g) + &r, f);
        assert!(r.degree().unwrap() < 2);
    }

    #[test]
    fn primitive_part_clears_content() {
        let f = Poly::new(vec![ratio(-3, 2), ratio(3, 4)]);
        let (c, prim) = f.primitive_part();
        assert_eq!(prim, p(&[-2, 1]));
        assert_eq!(prim.scale(&c), f);
        let (c, prim) = p(&[4, -6]).primitive_part();
        assert_eq!(prim, p(&[-2, 3]));
        assert_eq!(c, rat(-2));
    }

    #[test]
    fn display() {
        assert_eq!(p(&[2, -3, 1]).to_string(), "x^2 - 3*x + 2");
        assert_eq!(p(&[-1, 0, -2]).to_string(), "-2*x^2 - 1");
        assert_eq!(Poly::zero().to_string(), "0");
    }

    #[test]
    fn interpolation_recovers_polynomial() {
        let f = p(&[3, 0, -2, 1]);
        let xs: Vec<BigRat> = (0..4).map(rat).collect();
        let ys: Vec<BigRat> = xs.iter().map(|x| f.eval(x)).collect();
        assert_eq!(Poly::interpolate(&xs, &ys), f);
    }

    #[test]
    fn compose_scale_and_eval() {
        let f = p(&[1, 2, 3]);
        let g = f.compose_scale(&rat(2));
        assert_eq!(g.eval(&rat(5)), f.eval(&rat(10)));
    }
}
