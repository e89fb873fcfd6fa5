//! Exact complex rationals and outward-rounded rectangular complex intervals.
//!
//! Interval endpoints are rationals; after each multiplication or division the
//! caller rounds outward to a dyadic grid with a chosen number of fractional
//! bits, which keeps endpoint sizes bounded while preserving enclosure.

use std::fmt;
use std::ops::{Add, Mul, Neg, Sub};

use num_traits::{One, Signed, Zero};

use crate::exact::{dyadic, round_dyadic, scaled_floor_ceil, sqrt_upper, BigRat, Matrix};

#[derive(Clone, PartialEq, Eq, Hash, Default)]
pub struct ComplexRat {
    pub re: BigRat,
    pub im: BigRat,
}

impl ComplexRat {
    pub fn new(re: BigRat, im: BigRat) -> Self {
        ComplexRat { re, im }
    }

    pub fn real(re: BigRat) -> Self {
        ComplexRat { re, im: BigRat::zero() }
    }

    pub fn zero() -> Self {
        Self::default()
    }

    pub fn one() -> Self {
        Self::real(BigRat::one())
    }

    pub fn is_zero(&self) -> bool {
        self.re.is_zero() && self.im.is_zero()
    }

    pub fn conj(&self) -> Self {
        ComplexRat::new(self.re.clone(), -&self.im)
    }

    pub fn norm_sqr(&self) -> BigRat {
        &self.re * &self.re + &self.im * &self.im
    }

    /// Panics on division by zero.
    pub fn div(&self, rhs: &ComplexRat) -> ComplexRat {
        let n = rhs.norm_sqr();
        assert!(!n.is_zero(), "complex division by zero");
        let num = self * &rhs.conj();
        ComplexRat::new(num.re / &n, num.im / n)
    }

    pub fn scale(&self, c: &BigRat) -> ComplexRat {
        ComplexRat::new(&self.re * c, &self.im * c)
    }

    /// Nearest point of the dyadic grid with `bits` fractional bits.
    pub fn round(&self, bits: u64) -> ComplexRat {
        ComplexRat::new(round_dyadic(&self.re, bits), round_dyadic(&self.im, bits))
    }

    pub fn to_f64(&self) -> (f64, f64) {
        (to_f64(&self.re), to_f64(&self.im))
    }
}

pub(crate) fn to_f64(q: &BigRat) -> f64 {
    num_traits::ToPrimitive::to_f64(q).unwrap_or(f64::NAN)
}

impl fmt::Debug for ComplexRat {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let (re, im) = self.to_f64();
        write!(f, "{re:.12}{im:+.12}i")
    }
}

impl Add<&ComplexRat> for &ComplexRat {
    type Output = ComplexRat;
    fn add(self, rhs: &ComplexRat) -> ComplexRat {
        ComplexRat::new(&self.re + &rhs.re, &self.im + &rhs.im)
    }
}

impl Sub<&ComplexRat> for &ComplexRat {
    type Output = ComplexRat;
    fn sub(self, rhs: &ComplexRat) -> ComplexRat {
        ComplexRat::new(&self.re - &rhs.re, &self.im - &rhs.im)
    }
}

impl Mul<&ComplexRat> for &ComplexRat {
    type Output = ComplexRat;
    fn mul(self, rhs: &ComplexRat) -> ComplexRat {
        ComplexRat::new(
            &self.re * &rhs.re - &self.im * &rhs.im,
            &self.re * &rhs.im + &self.im * &rhs.re,
        )
    }
}

impl Neg for &ComplexRat {
    type Output = ComplexRat;
    fn neg(self) -> ComplexRat {
        ComplexRat::new(-&self.re, -&self.im)
    }
}

/// Closed real interval `[lo, hi]`.
#[derive(Clone, PartialEq, Eq, Hash)]
pub struct RatInterval {
    pub lo: BigRat,
    pub hi: BigRat,
}

impl RatInterval {
    pub fn new(lo: BigRat, hi: BigRat) -> Self {
        debug_assert!(lo <= hi, "inverted interval");
        RatInterval { lo, hi }
    }

    pub fn point(x: BigRat) -> Self {
        RatInterval { lo: x.clone(), hi: x }
    }

    pub fn around(center: &BigRat, radius: &BigRat) -> Self {
        RatInterval::new(center - radius, center + radius)
    }

    pub fn width(&self) -> BigRat {
        &self.hi - &self.lo
    }

    pub fn is_point(&self) -> bool {
        self.lo == self.hi
    }

    pub fn contains(&self, x: &BigRat) -> bool {
        &self.lo <= x && x <= &self.hi
    }

    pub fn contains_zero(&self) -> bool {
        !self.lo.is_positive() && !self.hi.is_negative()
    }

    pub fn midpoint(&self) -> BigRat {
        (&self.lo + &self.hi) / BigRat::from_integer(2.into())
    }

    pub fn mag(&self) -> BigRat {
        self.lo.abs().max(self.hi.abs())
    }

    pub fn square(&self) -> RatInterval {
        let (a, b) = (&self.lo * &self.lo, &self.hi * &self.hi);
        if self.contains_zero() {
            RatInterval::new(BigRat::zero(), a.max(b))
        } else if a <= b {
            RatInterval::new(a, b)
        } else {
            RatInterval::new(b, a)
        }
    }

    /// `None` when the interval contains zero.
    pub fn recip(&self) -> Option<RatInterval> {
        if self.contains_zero() {
            None
        } else {
            Some(RatInterval::new(self.hi.recip(), self.lo.recip()))
        }
    }

    /// Outward rounding to the dyadic grid with `bits` fractional bits.
    pub fn round_out(&self, bits: u64) -> RatInterval {
        if self.lo.denom().bits() <= bits + 1 && self.hi.denom().bits() <= bits + 1 {
            return self.clone();
        }
        let (lo, _) = scaled_floor_ceil(&self.lo, bits);
        let (_, hi) = scaled_floor_ceil(&self.hi, bits);
        RatInterval::new(dyadic(lo, bits), dyadic(hi, bits))
    }
}

impl fmt::Debug for RatInterval {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "[{:e}, {:e}]", to_f64(&self.lo), to_f64(&self.hi))
    }
}

impl Add<&RatInterval> for &RatInterval {
    type Output = RatInterval;
    fn add(self, rhs: &RatInterval) -> RatInterval {
        RatInterval::new(&self.lo + &rhs.lo, &self.hi + &rhs.hi)
    }
}

impl Sub<&RatInterval> for &RatInterval {
    type Output = RatInterval;
    fn sub(self, rhs: &RatInterval) -> RatInterval {
        RatInterval::new(&self.lo - &rhs.hi, &self.hi - &rhs.lo)
    }
}

impl Mul<&RatInterval> for &RatInterval {
    type Output = RatInterval;
    fn mul(self, rhs: &RatInterval) -> RatInterval {
        if self.is_point() && rhs.is_point() {
            return RatInterval::point(&self.lo * &rhs.lo);
        }
        let ps = [
            &self.lo * &rhs.lo,
            &self.lo * &rhs.hi,
            &self.hi * &rhs.lo,
            &self.hi * &rhs.hi,
        ];
        let lo = ps.iter().min().unwrap().clone();
        let hi = ps.iter().max().unwrap().clone();
        RatInterval::new(lo, hi)
    }
}

impl Neg for &RatInterval {
    type Output = RatInterval;
    fn neg(self) -> RatInterval {
        RatInterval::new(-&self.hi, -&self.lo)
    }
}

/// Rectangle `re x im` in the complex plane.
#[derive(Clone, PartialEq, Eq, Hash)]
pub struct ComplexInterval {
    pub re: RatInterval,
    pub im: RatInterval,
}

impl ComplexInterval {
    pub fn new(re: RatInterval, im: RatInterval) -> Self {
        ComplexInterval { re, im }
    }

    pub fn point(z: &ComplexRat) -> Self {
        ComplexInterval::new(RatInterval::point(z.re.clone()), RatInterval::point(z.im.clone()))
    }

    pub fn real_point(x: BigRat) -> Self {
        Self::point(&ComplexRat::real(x))
    }

    pub fn one() -> Self {
        Self::real_point(BigRat::one())
    }

    pub fn zero() -> Self {
        Self::real_point(BigRat::zero())
    }

    /// Smallest axis-aligned square containing the closed disk.
    pub fn from_disk(center: &ComplexRat, radius: &BigRat) -> Self {
        ComplexInterval::new(
            RatInterval::around(&center.re, radius),
            RatInterval::around(&center.im, radius),
        )
    }

    pub fn is_point(&self) -> bool {
        self.re.is_point() && self.im.is_point()
    }

    pub fn width(&self) -> BigRat {
        self.re.width().max(self.im.width())
    }

    pub fn contains(&self, z: &ComplexRat) -> bool {
        self.re.contains(&z.re) && self.im.contains(&z.im)
    }

    pub fn contains_zero(&self) -> bool {
        self.re.contains_zero() && self.im.contains_zero()
    }

    pub fn midpoint(&self) -> ComplexRat {
        ComplexRat::new(self.re.midpoint(), self.im.midpoint())
    }

    pub fn round_out(&self, bits: u64) -> Self {
        ComplexInterval::new(self.re.round_out(bits), self.im.round_out(bits))
    }

    pub fn norm_sqr(&self) -> RatInterval {
        &self.re.square() + &self.im.square()
    }

    /// `None` when the divisor rectangle contains zero.
    pub fn div(&self, rhs: &ComplexInterval, bits: u64) -> Option<ComplexInterval> {
        let inv = rhs.norm_sqr().recip()?.round_out(bits);
        let conj = ComplexInterval::new(rhs.re.clone(), -&rhs.im);
        let num = (self * &conj).round_out(bits);
        Some(
            ComplexInterval::new(&num.re * &inv, &num.im * &inv).round_out(bits),
        )
    }

    /// Binary powering, rounding after every product.
    pub fn pow(&self, mut e: u64, bits: u64) -> ComplexInterval {
        let mut acc = ComplexInterval::one();
        let mut base = self.clone();
        while e > 0 {
            if e & 1 == 1 {
                acc = (&acc * &base).round_out(bits);
            }
            e >>= 1;
            if e > 0 {
                base = (&base * &base).round_out(bits);
            }
        }
        acc
    }

    /// Upper bound on the modulus of every point in the rectangle.
    pub fn mag_upper(&self) -> BigRat {
        let m = &self.re.mag() * &self.re.mag() + &self.im.mag() * &self.im.mag();
        sqrt_upper(&m, 64)
    }
}

impl fmt::Debug for ComplexInterval {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{:?} + {:?}i", self.re, self.im)
    }
}

impl Add<&ComplexInterval> for &ComplexInterval {
    type Output = ComplexInterval;
    fn add(self, rhs: &ComplexInterval) -> ComplexInterval {
        ComplexInterval::new(&self.re + &rhs.re, &self.im + &rhs.im)
    }
}

impl Sub<&ComplexInterval> for &ComplexInterval {
    type Output = ComplexInterval;
    fn sub(self, rhs: &ComplexInterval) -> ComplexInterval {
        ComplexInterval::new(&self.re - &rhs.re, &self.im - &rhs.im)
    }
}

impl Mul<&ComplexInterval> for &ComplexInterval {
    type Output = ComplexInterval;
    fn mul(self, rhs: &ComplexInterval) -> ComplexInterval {
        let re = &(&self.re * &rhs.re) - &(&self.im * &rhs.im);
        let im = &(&self.re * &rhs.im) + &(&self.im * &rhs.re);
        ComplexInterval::new(re, im)
    }
}

impl Neg for &ComplexInterval {
    type Output = ComplexInterval;
    fn neg(self) -> ComplexInterval {
        ComplexInterval::new(-&self.re, -&self.im)
    }
}

/// Row with the pivot whose modulus is certifiably largest, or `None` when
/// every candidate might be zero.
fn pick_pivot(a: &Matrix<ComplexInterval>, k: usize) -> Option<usize> {
    (k..a.rows())
        .map(|i| (i, a[(i, k)].norm_sqr().lo))
        .filter(|(_, lo)| lo.is_positive())
        .max_by(|x, y| x.1.cmp(&y.1))
        .map(|(i, _)| i)
}

fn eliminate(
    a: &mut Matrix<ComplexInterval>,
    rhs: Option<&mut Matrix<ComplexInterval>>,
    bits: u64,
) -> Option<(bool, Vec<ComplexInterval>)> {
    let n = a.rows();
    let mut negate = false;
    let mut pivots = Vec::with_capacity(n);
    let mut rhs = rhs;
    for k in 0..n {
        let p = pick_pivot(a, k)?;
        if p != k {
            a.swap_rows(k, p);
            if let Some(b) = rhs.as_deref_mut() {
                b.swap_rows(k, p);
            }
            negate = !negate;
        }
        let pivot = a[(k, k)].clone();
        for i in 0..n {
            if i == k || (rhs.is_none() && i < k) {
                continue;
            }
            let factor = a[(i, k)].div(&pivot, bits)?;
            for j in k..n {
                let v = (&a[(i, j)] - &(&factor * &a[(k, j)])).round_out(bits);
                a[(i, j)] = v;
            }
            if let Some(b) = rhs.as_deref_mut() {
                for j in 0..b.cols() {
                    let v = (&b[(i, j)] - &(&factor * &b[(k, j)])).round_out(bits);
                    b[(i, j)] = v;
                }
            }
        }
        pivots.push(pivot);
    }
    Some((negate, pivots))
}

/// Determinant by Gaussian elimination with certified pivots.
pub fn interval_det(m: &Matrix<ComplexInterval>, bits: u64) -> Option<ComplexInterval> {
    assert!(m.is_square(), "determinant of a non-square matrix");
    let mut a = m.clone();
    let (negate, pivots) = eliminate(&mut a, None, bits)?;
    let det = pivots
        .iter()
        .fold(ComplexInterval::one(), |acc, p| (&acc * p).round_out(bits));
    Some(if negate { -&det } else { det })
}

/// Solves `m * x = rhs` by Gauss–Jordan elimination.
pub fn interval_solve(
    m: &Matrix<ComplexInterval>,
    rhs: &Matrix<ComplexInterval>,
    bits: u64,
) -> Option<Matrix<ComplexInterval>> {
    assert!(m.is_square() && m.rows() == rhs.rows(), "shape mismatch");
    let mut a = m.clone();
    let mut b = rhs.clone();
    eliminate(&mut a, Some(&mut b), bits)?;
    let mut out = b;
    for i in 0..out.rows() {
        for j in 0..out.cols() {
            out[(i, j)] = out[(i, j)].div(&a[(i, i)], bits)?;
        }
    }
    Some(out)
}
