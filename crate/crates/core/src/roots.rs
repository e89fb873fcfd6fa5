//! Certified complex root isolation.
//!
//! Each squarefree factor of the input is split into its rational roots,
//! which are found exactly and reported as radius-zero boxes, and an
//! irrational remainder. The remainder's roots are approximated by
//! Aberth–Ehrlich iteration on dyadic complex rationals and certified with
//! the Braess–Hadeler inclusion disks: for a monic degree-`d` polynomial with
//! pairwise distinct approximations `z_i`, if the disks of radius
//! `d * |p(z_i) / prod_{j != i} (z_i - z_j)|` are pairwise disjoint then each
//! contains exactly one root.

use std::sync::atomic::{AtomicU64, Ordering};

use num_bigint::BigInt;
use num_integer::Integer;
use num_traits::{One, Signed, Zero};

use crate::error::{Error, Result};
use crate::exact::{rat, sqrt_upper, yun_squarefree, BigRat, Poly, SquarefreeDecomposition};
use crate::interval::{to_f64, ComplexInterval, ComplexRat};

/// Default ceiling on the working precision: ten doublings past 1024 bits.
pub const DEFAULT_MAX_WORKING_BITS: u64 = 1024 << 10;

static MAX_WORKING_BITS: AtomicU64 = AtomicU64::new(DEFAULT_MAX_WORKING_BITS);

/// Process-wide cap on working precision used by every certified routine.
pub fn set_max_working_bits(bits: u64) {
    MAX_WORKING_BITS.store(bits.max(64), Ordering::Relaxed);
}

pub fn max_working_bits() -> u64 {
    MAX_WORKING_BITS.load(Ordering::Relaxed)
}

/// Closed disk containing exactly one distinct root.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct RootBox {
    pub center: ComplexRat,
    pub radius: BigRat,
    pub multiplicity: u32,
}

impl RootBox {
    pub fn is_exact(&self) -> bool {
        self.radius.is_zero()
    }

    pub fn interval(&self) -> ComplexInterval {
        ComplexInterval::from_disk(&self.center, &self.radius)
    }

    pub fn contains(&self, z: &ComplexRat) -> bool {
        (z - &self.center).norm_sqr() <= &self.radius * &self.radius
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct RootStructure {
    pub source: Poly,
    pub decomposition: SquarefreeDecomposition,
    pub boxes: Vec<RootBox>,
}

impl RootStructure {
    /// Degree of the source polynomial.
    pub fn order(&self) -> usize {
        self.source.degree().unwrap_or(0)
    }

    /// Number of distinct roots.
    pub fn distinct(&self) -> usize {
        self.boxes.len()
    }

    pub fn all_exact(&self) -> bool {
        self.boxes.iter().all(RootBox::is_exact)
    }

    pub fn max_radius(&self) -> BigRat {
        self.boxes
            .iter()
            .map(|b| b.radius.clone())
            .max()
            .unwrap_or_else(BigRat::zero)
    }
}

/// Rational roots with multiplicities, ascending by value.
pub fn rational_roots(f: &Poly) -> Vec<(BigRat, u32)> {
    assert!(!f.is_zero(), "rational roots of the zero polynomial");
    let mut out: Vec<(BigRat, u32)> = yun_squarefree(f)
        .factors
        .iter()
        .flat_map(|(g, e)| split_rational_roots(g).0.into_iter().map(move |q| (q, *e)))
        .collect();
    out.sort();
    out
}

/// Rational roots of a squarefree polynomial and the deflated remainder.
fn split_rational_roots(g: &Poly) -> (Vec<BigRat>, Poly) {
    let mut rest = g.monic();
    let mut found = Vec::new();
    if rest.coeff(0).is_zero() && rest.degree() > Some(0) {
        found.push(BigRat::zero());
        rest = rest.exact_div(&Poly::from_ints(&[0, 1]));
    }
    if rest.degree().unwrap_or(0) == 0 {
        return (found, rest);
    }
    let ints = rest.primitive_int_coeffs();
    let num_divs = divisors(&ints[0]);
    let den_divs = divisors(ints.last().unwrap());
    for p in &num_divs {
        for q in &den_divs {
            if rest.degree() == Some(0) {
                break;
            }
            for cand in [BigRat::new(p.clone(), q.clone()), BigRat::new(-p.clone(), q.clone())] {
                if !found.contains(&cand) && rest.eval(&cand).is_zero() {
                    rest = rest.exact_div(&Poly::linear_root(&cand));
                    found.push(cand);
                }
            }
        }
    }
    found.sort();
    (found, rest)
}

/// Positive divisors of `|n|`, `n != 0`.
fn divisors(n: &BigInt) -> Vec<BigInt> {
    let n = n.abs();
    let mut small = Vec::new();
    let mut large = Vec::new();
    let mut d = BigInt::one();
    while &d * &d <= n {
        if n.is_multiple_of(&d) {
            let other = &n / &d;
            if other != d {
                large.push(other);
            }
            small.push(d.clone());
        }
        d += 1;
    }
    small.extend(large.into_iter().rev());
    small
}

fn horner(p: &Poly, z: &ComplexRat) -> ComplexRat {
    p.coeffs().iter().rev().fold(ComplexRat::zero(), |acc, c| {
        let mut v = &acc * z;
        v.re += c;
        v
    })
}

fn horner_interval(p: &Poly, z: &ComplexInterval, bits: u64) -> ComplexInterval {
    p.coeffs().iter().rev().fold(ComplexInterval::zero(), |acc, c| {
        let v = (&acc * z).round_out(bits);
        &v + &ComplexInterval::real_point(c.clone())
    })
}

/// Interval evaluation of `p` over the box; used by tests and diagnostics.
pub fn eval_over_box(p: &Poly, b: &RootBox, bits: u64) -> ComplexInterval {
    horner_interval(p, &b.interval(), bits)
}

fn pow2_neg(bits: u64) -> BigRat {
    BigRat::new(BigInt::one(), BigInt::one() << bits)
}

/// Working bits for a target radius: roughly `log2(1 / precision) + 16`.
fn start_bits(precision: &BigRat) -> u64 {
    let need = precision.denom().bits() as i64 - precision.numer().bits() as i64 + 16;
    need.max(64) as u64
}

/// Aberth iterate for the roots of one monic squarefree factor.
#[derive(Debug, Clone)]
struct Cluster {
    poly: Poly,
    deriv: Poly,
    multiplicity: u32,
    zs: Vec<ComplexRat>,
    /// Boxes from a previous certification, matched by index.
    previous: Option<Vec<RootBox>>,
}

impl Cluster {
    fn fresh(poly: Poly, multiplicity: u32) -> Self {
        let d = poly.degree().expect("nonconstant factor");
        // power of two above the Fujiwara bound max |a_(d-k)|^(1/k)
        let exponent = (1..=d)
            .filter(|&k| !poly.coeff(d - k).is_zero())
            .map(|k| (log2_abs(&poly.coeff(d - k)) / k as f64).ceil())
            .fold(0.0f64, f64::max);
        let radius = 2f64.powi(exponent as i32);
        let zs = (0..d)
            .map(|k| {
                let theta = std::f64::consts::TAU * k as f64 / d as f64 + 0.7;
                let (s, c) = sin_cos(theta);
                ComplexRat::new(
                    BigRat::from_float(radius * c).unwrap_or_else(BigRat::zero),
                    BigRat::from_float(radius * s).unwrap_or_else(BigRat::zero),
                )
                .round(64)
            })
            .collect();
        let deriv = poly.derivative();
        Cluster { poly, deriv, multiplicity, zs, previous: None }
    }

    fn seeded(poly: Poly, multiplicity: u32, previous: Vec<RootBox>) -> Self {
        let deriv = poly.derivative();
        let zs = previous.iter().map(|b| b.center.clone()).collect();
        Cluster { poly, deriv, multiplicity, zs, previous: Some(previous) }
    }

    /// One Jacobi-style Aberth sweep; returns the largest squared correction.
    fn sweep(&mut self, bits: u64) -> BigRat {
        let n = self.zs.len();
        let mut next = Vec::with_capacity(n);
        let mut worst = BigRat::zero();
        for i in 0..n {
            let z = &self.zs[i];
            let pz = horner(&self.poly, z);
            if pz.is_zero() {
                next.push(z.clone());
                continue;
            }
            let dpz = horner(&self.deriv, z);
            let mut sum = ComplexRat::zero();
            let mut collided = false;
            for (j, zj) in self.zs.iter().enumerate() {
                if j != i {
                    let diff = z - zj;
                    if diff.is_zero() {
                        collided = true;
                        break;
                    }
                    sum = &sum + &ComplexRat::one().div(&diff);
                }
            }
            let step = if collided || dpz.is_zero() {
                // nudge off a degenerate point
                ComplexRat::new(pow2_neg(bits / 2), pow2_neg(bits / 2 + 1))
            } else {
                let w = pz.div(&dpz);
                let denom = &ComplexRat::one() - &(&w * &sum);
                if denom.is_zero() {
                    w
                } else {
                    w.div(&denom)
                }
            };
            let step = step.round(bits);
            let ns = step.norm_sqr();
            if ns > worst {
                worst = ns;
            }
            next.push((z - &step).round(bits));
        }
        self.zs = next;
        worst
    }

    fn polish(&mut self, bits: u64, max_sweeps: usize) {
        // stop once corrections fall below 2^-(bits - 8)
        let tol = pow2_neg(2 * bits.saturating_sub(8));
        for _ in 0..max_sweeps {
            if self.sweep(bits) <= tol {
                break;
            }
        }
    }

    /// Mirror-symmetric centers for a real polynomial: near-conjugate pairs
    /// are snapped to exact conjugates, unpaired iterates onto the real axis.
    fn symmetric_centers(&self) -> Vec<ComplexRat> {
        let mut out = self.zs.clone();
        let n = out.len();
        let mut paired = vec![false; n];
        for i in 0..n {
            if paired[i] || !self.zs[i].im.is_positive() {
                continue;
            }
            let target = self.zs[i].conj();
            let best = (0..n)
                .filter(|&j| !paired[j] && j != i && self.zs[j].im.is_negative())
                .min_by_key(|&j| (&self.zs[j] - &target).norm_sqr());
            if let Some(j) = best {
                let gap = (&self.zs[j] - &target).norm_sqr();
                if gap * rat(4) < &self.zs[i].im * &self.zs[i].im {
                    out[j] = target;
                    paired[i] = true;
                    paired[j] = true;
                }
            }
        }
        for (z, p) in out.iter_mut().zip(&paired) {
            if !p {
                z.im = BigRat::zero();
            }
        }
        out
    }

    /// Inclusion disks, or `None` if they are not yet certifiably disjoint
    /// and within `target`.
    fn certify(&self, target: &BigRat, bits: u64) -> Option<Vec<RootBox>> {
        let centers = self.symmetric_centers();
        let n = centers.len();
        let d2 = rat((n * n) as i64);
        let mut boxes = Vec::with_capacity(n);
        for i in 0..n {
            let mut prod = ComplexRat::one();
            for j in 0..n {
                if j != i {
                    let diff = &centers[i] - &centers[j];
                    if diff.is_zero() {
                        return None;
                    }
                    prod = &prod * &diff;
                }
            }
            let w = horner(&self.poly, &centers[i]).div(&prod);
            let radius = sqrt_upper(&(&d2 * w.norm_sqr()), bits + 8);
            if &radius > target {
                return None;
            }
            if let Some(prev) = &self.previous {
                if !prev[i].contains(&centers[i]) {
                    return None;
                }
            }
            boxes.push(RootBox {
                center: centers[i].clone(),
                radius,
                multiplicity: self.multiplicity,
            });
        }
        Some(boxes)
    }
}

fn pairwise_disjoint(boxes: &[RootBox]) -> bool {
    for (i, a) in boxes.iter().enumerate() {
        for b in &boxes[i + 1..] {
            let reach = &a.radius + &b.radius;
            if (&a.center - &b.center).norm_sqr() <= &reach * &reach {
                return false;
            }
        }
    }
    true
}

fn sort_boxes(boxes: &mut [RootBox]) {
    boxes.sort_by(|a, b| {
        (&a.center.re, &a.center.im).cmp(&(&b.center.re, &b.center.im))
    });
}

fn run_certification(
    exact: Vec<RootBox>,
    mut clusters: Vec<Cluster>,
    precision: &BigRat,
) -> Result<Vec<RootBox>> {
    let cap = max_working_bits();
    let mut bits = start_bits(precision).min(cap);
    let mut first = true;
    loop {
        for c in clusters.iter_mut() {
            c.polish(bits, if first { 400 } else { 12 });
        }
        first = false;
        let mut boxes = exact.clone();
        let mut ok = true;
        for c in &clusters {
            match c.certify(precision, bits) {
                Some(b) => boxes.extend(b),
                None => {
                    ok = false;
                    break;
                }
            }
        }
        if ok && pairwise_disjoint(&boxes) {
            sort_boxes(&mut boxes);
            return Ok(boxes);
        }
        if bits >= cap {
            return Err(Error::PrecisionExhausted { bits });
        }
        bits = (bits * 2).min(cap);
    }
}

fn check_precision(precision: &BigRat) -> Result<()> {
    if precision.is_positive() {
        Ok(())
    } else {
        Err(Error::InvalidPrecision)
    }
}

/// One certified disk per distinct root of `f`, each of radius at most
/// `precision`; rational roots are exact with radius zero.
pub fn isolate_roots(f: &Poly, precision: &BigRat) -> Result<RootStructure> {
    check_precision(precision)?;
    let deg = f.degree().unwrap_or(0);
    if deg < 1 {
        return Err(Error::DegreeTooSmall { min: 1, got: deg });
    }
    let decomposition = yun_squarefree(f);
    let mut exact = Vec::new();
    let mut clusters = Vec::new();
    for (g, e) in &decomposition.factors {
        let (qs, rest) = split_rational_roots(g);
        exact.extend(qs.into_iter().map(|q| RootBox {
            center: ComplexRat::real(q),
            radius: BigRat::zero(),
            multiplicity: *e,
        }));
        if rest.degree().unwrap_or(0) > 0 {
            clusters.push(Cluster::fresh(rest, *e));
        }
    }
    let boxes = run_certification(exact, clusters, precision)?;
    Ok(RootStructure {
        source: f.clone(),
        decomposition,
        boxes,
    })
}

/// Shrinks every box to radius at most `precision`. New centers lie inside
/// the old boxes; a structure that is already tight enough is returned as is.
pub fn refine(rs: &RootStructure, precision: &BigRat) -> Result<RootStructure> {
    check_precision(precision)?;
    if &rs.max_radius() <= precision {
        return Ok(rs.clone());
    }
    let exact: Vec<RootBox> = rs.boxes.iter().filter(|b| b.is_exact()).cloned().collect();
    let mut clusters = Vec::new();
    for (g, e) in &rs.decomposition.factors {
        let (_, rest) = split_rational_roots(g);
        if rest.degree().unwrap_or(0) > 0 {
            let previous: Vec<RootBox> = rs
                .boxes
                .iter()
                .filter(|b| !b.is_exact() && b.multiplicity == *e)
                .cloned()
                .collect();
            clusters.push(Cluster::seeded(rest, *e, previous));
        }
    }
    let boxes = run_certification(exact, clusters, precision)?;
    Ok(RootStructure {
        source: rs.source.clone(),
        decomposition: rs.decomposition.clone(),
        boxes,
    })
}

/// Refines `rs` with doubling working precision until `attempt` succeeds.
///
/// `attempt` receives roots refined to radius `2^-bits` and a matching
/// working precision for interval arithmetic.
pub(crate) fn with_refinement<T>(
    rs: &RootStructure,
    initial_bits: u64,
    mut attempt: impl FnMut(&RootStructure, u64) -> Option<T>,
) -> Result<(T, RootStructure)> {
    let cap = max_working_bits();
    let mut bits = initial_bits.clamp(64, cap);
    loop {
        let current = refine(rs, &pow2_neg(bits))?;
        if let Some(t) = attempt(&current, bits + 32) {
            return Ok((t, current));
        }
        if bits >= cap {
            return Err(Error::PrecisionExhausted { bits });
        }
        bits = (bits * 2).min(cap);
    }
}

/// Working bits needed to resolve absolute width `precision`.
pub(crate) fn bits_for(precision: &BigRat) -> u64 {
    start_bits(precision)
}

/// Approximate `log2 |z|` for sizing working precision.
///
/// Uses only correctly rounded float operations so the result, and every
/// precision schedule derived from it, is identical on all platforms.
pub(crate) fn log2_abs(q: &BigRat) -> f64 {
    if q.is_zero() {
        return f64::NEG_INFINITY;
    }
    let n = q.numer().abs();
    let d = q.denom();
    let shift = n.bits() as i64 - d.bits() as i64;
    let scaled = if shift >= 0 {
        BigRat::new(n, d << shift as u64)
    } else {
        BigRat::new(n << (-shift) as u64, d.clone())
    };
    // scaled lies in (1/2, 2); ln x = 2 atanh((x - 1) / (x + 1))
    let x = to_f64(&scaled);
    let t = (x - 1.0) / (x + 1.0);
    let t2 = t * t;
    let mut term = t;
    let mut acc = 0.0;
    for k in 0..40 {
        acc += term / (2 * k + 1) as f64;
        term *= t2;
    }
    shift as f64 + 2.0 * acc / std::f64::consts::LN_2
}

/// Taylor-series sine and cosine built from basic float operations only.
fn sin_cos(theta: f64) -> (f64, f64) {
    let x = theta - std::f64::consts::PI;
    let (mut s, mut c) = (0.0, 0.0);
    let mut term = 1.0;
    for k in 0..40 {
        if k % 2 == 0 {
            c += term;
        } else {
            s += term;
        }
        term *= x / (k + 1) as f64;
        if k % 2 == 1 {
            term = -term;
        }
    }
    // shifted by pi
    (-s, -c)
}
