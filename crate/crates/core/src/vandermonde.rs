//! The impulse determinant `D(n) = det[X^(k)_{hn}]_{h,k = 1..r-1}` and its
//! closed form
//!
//! ```text
//! D(n) = n^(sum C(m_l, 2)) * prod_l alpha_l^(C(m_l, 2) (n - 1))
//!        * prod_{i<j} ((alpha_j^n - alpha_i^n) / (alpha_j - alpha_i))^(m_i m_j)
//! ```
//!
//! evaluated along independent routes: exact Bareiss elimination on impulse
//! terms, the product formula (exact for rational roots, certified intervals
//! otherwise), and the confluent Vandermonde ratio `det W(n) / det W(1)`.

use std::sync::Mutex;

use num_bigint::BigInt;
use num_traits::{One, Signed, Zero};

use crate::error::{Error, Result};
use crate::exact::{
    bareiss_det, pow_rat, rat, yun_squarefree, BigRat, Matrix, Poly,
};
use crate::interval::{interval_det, ComplexInterval, ComplexRat};
use crate::recurrence::{impulse_basis, require_nondegenerate, ImpulseBasis};
use crate::roots::{bits_for, isolate_roots, log2_abs, rational_roots, with_refinement, RootBox, RootStructure};

fn binom2(m: u64) -> u64 {
    m * m.saturating_sub(1) / 2
}

/// `(hn)^c * alpha^(hn)` for `h` in `0..rows` and each node's columns
/// `c = 0..m-1`, blocks in node order; `0^0 = 1`. At `n = 1` this is the
/// Flowe–Harris block matrix `[B_m1(X_1) ... B_ms(X_s)]`.
pub fn confluent_matrix_exact(nodes: &[(BigRat, u32)], rows: usize, n: u64) -> Matrix<BigRat> {
    let mut cols: Vec<Vec<BigRat>> = Vec::new();
    for (alpha, m) in nodes {
        let step = pow_rat(alpha, n as i64);
        let mut alpha_hn = BigRat::one();
        let mut entries: Vec<Vec<BigRat>> = vec![Vec::with_capacity(rows); *m as usize];
        for h in 0..rows {
            let hn = rat((h as u64 * n) as i64);
            let mut pw = BigRat::one();
            for col in entries.iter_mut() {
                col.push(&pw * &alpha_hn);
                pw *= &hn;
            }
            alpha_hn *= &step;
        }
        cols.extend(entries);
    }
    Matrix::from_fn(rows, cols.len(), |i, j| cols[j][i].clone())
}

/// Interval version of [`confluent_matrix_exact`] over root boxes.
pub fn confluent_matrix_interval(boxes: &[RootBox], rows: usize, n: u64, bits: u64) -> Matrix<ComplexInterval> {
    let mut cols: Vec<Vec<ComplexInterval>> = Vec::new();
    for b in boxes {
        let step = b.interval().pow(n, bits);
        let mut alpha_hn = ComplexInterval::one();
        let mut entries: Vec<Vec<ComplexInterval>> = vec![Vec::with_capacity(rows); b.multiplicity as usize];
        for h in 0..rows {
            let hn = rat((h as u64 * n) as i64);
            let mut pw = BigRat::one();
            for col in entries.iter_mut() {
                col.push((&alpha_hn * &ComplexInterval::real_point(pw.clone())).round_out(bits));
                pw *= &hn;
            }
            alpha_hn = (&alpha_hn * &step).round_out(bits);
        }
        cols.extend(entries);
    }
    Matrix::from_fn(rows, cols.len(), |i, j| cols[j][i].clone())
}

fn check_nodes(nodes: &[(BigRat, u32)]) -> Result<()> {
    for (i, (x, _)) in nodes.iter().enumerate() {
        if x.is_zero() {
            return Err(Error::ZeroNode);
        }
        if nodes[..i].iter().any(|(y, _)| y == x) {
            return Err(Error::DuplicateNode);
        }
    }
    Ok(())
}

/// The explicit block matrix `[B_m1(X_1) ... B_ms(X_s)]`, entry `t^c X^t`.
pub fn flowe_harris_matrix(nodes: &[(BigRat, u32)]) -> Result<Matrix<BigRat>> {
    check_nodes(nodes)?;
    let r: usize = nodes.iter().map(|(_, m)| *m as usize).sum();
    Ok(confluent_matrix_exact(nodes, r, 1))
}

/// Closed form of the determinant of [`flowe_harris_matrix`]:
/// `prod_l prod_{j<m_l} j! * X_l^C(m_l,2) * prod_{i<j} (X_j - X_i)^(m_i m_j)`.
pub fn flowe_harris(nodes: &[(BigRat, u32)]) -> Result<BigRat> {
    check_nodes(nodes)?;
    let mut acc = BigRat::one();
    for (x, m) in nodes {
        let m = *m as u64;
        for j in 1..m {
            acc *= factorial(j);
        }
        acc *= pow_rat(x, binom2(m) as i64);
    }
    for (i, (xi, mi)) in nodes.iter().enumerate() {
        for (xj, mj) in &nodes[i + 1..] {
            acc *= pow_rat(&(xj - xi), (mi * mj) as i64);
        }
    }
    Ok(acc)
}

fn factorial(j: u64) -> BigRat {
    BigRat::from_integer((1..=j).map(BigInt::from).product())
}

/// Exponents of the closed form, obtained from the squarefree decomposition
/// alone.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ExponentStructure {
    /// `sum_l C(m_l, 2)`
    pub n_exponent: u64,
    pub factor_constants: Vec<FactorConstant>,
}

/// The product of the roots of one squarefree factor `g_e`, which is the
/// base of `prod alpha_l^C(e,2)` over those roots.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct FactorConstant {
    pub factor: Poly,
    pub multiplicity: u32,
    /// `(-1)^deg g * g(0) / lc(g)`
    pub root_product: BigRat,
    /// `C(multiplicity, 2)`
    pub exponent: u64,
}

impl ExponentStructure {
    /// `prod_l alpha_l^(C(m_l, 2) * k)`, exactly.
    pub fn alpha_power(&self, k: i64) -> BigRat {
        self.factor_constants.iter().fold(BigRat::one(), |acc, fc| {
            acc * pow_rat(&fc.root_product, fc.exponent as i64 * k)
        })
    }

    /// `prod_l prod_{j=1}^{m_l - 1} j!`
    pub fn factorial_product(&self) -> BigRat {
        self.factor_constants.iter().fold(BigRat::one(), |acc, fc| {
            let sf: BigRat = (1..fc.multiplicity as u64).map(factorial).product();
            let deg = fc.factor.degree().unwrap_or(0) as i64;
            acc * pow_rat(&sf, deg)
        })
    }
}

pub fn exponent_structure(char_poly: &Poly) -> Result<ExponentStructure> {
    if char_poly.is_zero() {
        return Err(Error::DegreeTooSmall { min: 1, got: 0 });
    }
    if char_poly.coeff(0).is_zero() {
        return Err(Error::ZeroRoot);
    }
    let dec = yun_squarefree(char_poly);
    let mut n_exponent = 0;
    let mut factor_constants = Vec::new();
    for (g, e) in dec.factors {
        let deg = g.degree().unwrap_or(0);
        let sign = if deg % 2 == 0 { rat(1) } else { rat(-1) };
        let root_product = sign * g.coeff(0) / g.leading_coeff().expect("nonzero factor");
        let exponent = binom2(e as u64);
        n_exponent += deg as u64 * exponent;
        factor_constants.push(FactorConstant { factor: g, multiplicity: e, root_product, exponent });
    }
    Ok(ExponentStructure { n_exponent, factor_constants })
}

/// `(h, k)` entry `X^(k)_{hn}`, `h, k = 1 .. r-1`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct GvMatrix {
    pub n: u64,
    pub entries: Matrix<BigRat>,
}

/// A value that is either exact or a certified complex rectangle.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum Certified {
    Exact(BigRat),
    Interval(ComplexInterval),
}

impl Certified {
    pub fn contains(&self, x: &BigRat) -> bool {
        match self {
            Certified::Exact(v) => v == x,
            Certified::Interval(iv) => iv.contains(&ComplexRat::real(x.clone())),
        }
    }

    pub fn width(&self) -> BigRat {
        match self {
            Certified::Exact(_) => BigRat::zero(),
            Certified::Interval(iv) => iv.width(),
        }
    }

    pub fn as_exact(&self) -> Option<&BigRat> {
        match self {
            Certified::Exact(v) => Some(v),
            Certified::Interval(_) => None,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Agreement {
    Exact,
    IntervalContains,
    Mismatch,
}

impl Agreement {
    pub fn as_str(&self) -> &'static str {
        match self {
            Agreement::Exact => "Exact",
            Agreement::IntervalContains => "IntervalContains",
            Agreement::Mismatch => "Mismatch",
        }
    }
}

/// Both sides of the determinant identity at one `n`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct GvResult {
    pub n: u64,
    pub d_exact: BigRat,
    pub closed_form: Certified,
    pub agreement: Agreement,
}

fn compare(d_exact: &BigRat, closed: &Certified) -> Agreement {
    match closed {
        Certified::Exact(v) if v == d_exact => Agreement::Exact,
        Certified::Interval(iv) if iv.contains(&ComplexRat::real(d_exact.clone())) => {
            Agreement::IntervalContains
        }
        _ => Agreement::Mismatch,
    }
}

/// Determinant `det W(n)` and the matrix itself.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ConfluentW {
    pub n: u64,
    pub matrix: Matrix<ComplexInterval>,
    pub determinant: Certified,
}

/// `prod_{i<j} ((a_j^n - a_i^n) / (a_j - a_i))^(m_i m_j)` over exact nodes.
pub(crate) fn pairwise_product_exact(nodes: &[(BigRat, u32)], n: u64) -> BigRat {
    let mut acc = BigRat::one();
    for (i, (ai, mi)) in nodes.iter().enumerate() {
        for (aj, mj) in &nodes[i + 1..] {
            let q = (pow_rat(aj, n as i64) - pow_rat(ai, n as i64)) / (aj - ai);
            acc *= pow_rat(&q, (mi * mj) as i64);
        }
    }
    acc
}

/// Interval version of [`pairwise_product_exact`]; `None` if some difference
/// of root boxes is not certifiably nonzero.
pub(crate) fn pairwise_product_interval(boxes: &[RootBox], n: u64, bits: u64) -> Option<ComplexInterval> {
    let powers: Vec<ComplexInterval> = boxes.iter().map(|b| b.interval().pow(n, bits)).collect();
    let mut acc = ComplexInterval::one();
    for i in 0..boxes.len() {
        for j in i + 1..boxes.len() {
            let num = &powers[j] - &powers[i];
            let den = &boxes[j].interval() - &boxes[i].interval();
            let q = num.div(&den, bits)?;
            let e = (boxes[i].multiplicity * boxes[j].multiplicity) as u64;
            acc = (&acc * &q.pow(e, bits)).round_out(bits);
        }
    }
    Some(acc)
}

/// Rough `log2` of the magnitude of the pairwise product, for sizing the
/// initial working precision.
fn magnitude_estimate(boxes: &[RootBox], n: u64) -> f64 {
    let mut est = 0.0;
    for i in 0..boxes.len() {
        for j in i + 1..boxes.len() {
            let (ai, aj) = (&boxes[i].center, &boxes[j].center);
            let big = log2_abs(&ai.norm_sqr()).max(log2_abs(&aj.norm_sqr())) / 2.0;
            let gap = log2_abs(&(aj - ai).norm_sqr()) / 2.0;
            let e = (boxes[i].multiplicity * boxes[j].multiplicity) as f64;
            est += e * (n as f64 * big.max(0.0) + 1.0 - gap.min(0.0));
        }
    }
    est
}

fn to_interval(q: &BigRat) -> ComplexInterval {
    ComplexInterval::real_point(q.clone())
}

/// Determinant and closed form evaluator for one characteristic polynomial.
///
/// Construction validates the polynomial (monic, nonzero constant term,
/// non-degenerate). Root boxes are isolated lazily and the tightest set seen
/// so far is cached, so repeated evaluations at growing `n` reuse work.
#[derive(Debug)]
pub struct GvEvaluator {
    char_poly: Poly,
    order: usize,
    basis: ImpulseBasis,
    structure: ExponentStructure,
    /// All roots with multiplicity, when every root is rational.
    rational_nodes: Option<Vec<(BigRat, u32)>>,
    roots: Mutex<Option<RootStructure>>,
}

impl GvEvaluator {
    pub fn new(char_poly: &Poly) -> Result<Self> {
        let basis = impulse_basis(char_poly)?;
        require_nondegenerate(char_poly)?;
        let order = basis.order();
        let structure = exponent_structure(char_poly)?;
        let nodes = rational_roots(char_poly);
        let rational_nodes =
            (nodes.iter().map(|(_, m)| *m as usize).sum::<usize>() == order).then_some(nodes);
        Ok(GvEvaluator {
            char_poly: char_poly.clone(),
            order,
            basis,
            structure,
            rational_nodes,
            roots: Mutex::new(None),
        })
    }

    pub fn char_poly(&self) -> &Poly {
        &self.char_poly
    }

    pub fn order(&self) -> usize {
        self.order
    }

    pub fn basis(&self) -> &ImpulseBasis {
        &self.basis
    }

    pub fn exponent_structure(&self) -> &ExponentStructure {
        &self.structure
    }

    /// Every root rational, so all closed-form routes are exact.
    pub fn is_rational(&self) -> bool {
        self.rational_nodes.is_some()
    }

    /// Current root boxes (isolated on first use).
    pub fn roots(&self) -> Result<RootStructure> {
        let mut guard = self.roots.lock().expect("root cache poisoned");
        if guard.is_none() {
            *guard = Some(isolate_roots(&self.char_poly, &BigRat::new(1.into(), (1u64 << 32).into()))?);
        }
        Ok(guard.clone().expect("just set"))
    }

    fn store_roots(&self, rs: RootStructure) {
        let mut guard = self.roots.lock().expect("root cache poisoned");
        let tighter = guard.as_ref().is_none_or(|old| rs.max_radius() < old.max_radius());
        if tighter {
            *guard = Some(rs);
        }
    }

    /// Impulse terms `X^(k)_{hn}` for `h, k = 1 .. r-1`.
    pub fn impulse_matrix(&self, n: u64) -> GvMatrix {
        let r = self.order;
        let table = self.basis.table((r.saturating_sub(1)) * n as usize);
        let entries = Matrix::from_fn(r - 1, r - 1, |h, k| table[k + 1][(h + 1) * n as usize].clone());
        GvMatrix { n, entries }
    }

    pub fn det_exact(&self, n: u64) -> BigRat {
        bareiss_det(&self.impulse_matrix(n).entries)
    }

    /// The closed form at `n`; intervals are refined until narrower than `precision`.
    pub fn closed_form(&self, n: u64, precision: &BigRat) -> Result<Certified> {
        if !precision.is_positive() {
            return Err(Error::InvalidPrecision);
        }
        let e = self.structure.n_exponent;
        if n == 0 && e > 0 {
            return Ok(Certified::Exact(BigRat::zero()));
        }
        let n_power = pow_rat(&rat(n as i64), e as i64);
        let alpha_exp = n as i64 - 1;
        if let Some(nodes) = &self.rational_nodes {
            let mut acc = n_power;
            let distinct = distinct_nodes(nodes);
            for (a, m) in &distinct {
                acc *= pow_rat(a, binom2(*m as u64) as i64 * alpha_exp);
            }
            acc *= pairwise_product_exact(&distinct, n);
            return Ok(Certified::Exact(acc));
        }
        let scalar = &n_power * self.structure.alpha_power(alpha_exp);
        let rs = self.roots()?;
        let est = magnitude_estimate(&rs.boxes, n) + log2_abs(&scalar).max(0.0);
        let initial = bits_for(precision) + est.ceil() as u64 + 2 * (64 - n.leading_zeros() as u64);
        let (value, tight) = with_refinement(&rs, initial, |cur, bits| {
            let pw = pairwise_product_interval(&cur.boxes, n, bits)?;
            let v = (&pw * &to_interval(&scalar)).round_out(bits);
            (&v.width() < precision).then_some(v)
        })?;
        self.store_roots(tight);
        Ok(Certified::Interval(value))
    }

    /// Exact determinant, closed form and their agreement.
    pub fn evaluate(&self, n: u64, precision: &BigRat) -> Result<GvResult> {
        let d_exact = self.det_exact(n);
        let closed_form = self.closed_form(n, precision)?;
        let agreement = compare(&d_exact, &closed_form);
        Ok(GvResult { n, d_exact, closed_form, agreement })
    }

    /// `W(n)` and its determinant, certified narrower than `precision`.
    pub fn confluent_w(&self, n: u64, precision: &BigRat) -> Result<ConfluentW> {
        let r = self.order;
        if let Some(nodes) = &self.rational_nodes {
            let m = confluent_matrix_exact(&distinct_nodes(nodes), r, n);
            let det = bareiss_det(&m);
            let matrix = Matrix::from_fn(r, r, |i, j| to_interval(&m[(i, j)]));
            return Ok(ConfluentW { n, matrix, determinant: Certified::Exact(det) });
        }
        let rs = self.roots()?;
        let est = magnitude_estimate(&rs.boxes, n) * 2.0;
        let initial = bits_for(precision) + est.ceil() as u64 + 8 * r as u64;
        let ((matrix, det), tight) = with_refinement(&rs, initial, |cur, bits| {
            let m = confluent_matrix_interval(&cur.boxes, r, n, bits);
            let det = interval_det(&m, bits)?;
            (&det.width() < precision).then_some((m, det))
        })?;
        self.store_roots(tight);
        Ok(ConfluentW { n, matrix, determinant: Certified::Interval(det) })
    }

    /// `det W(n) / det W(1)`, which equals `D(n)`.
    pub fn w_ratio(&self, n: u64, precision: &BigRat) -> Result<Certified> {
        let r = self.order;
        if let Some(nodes) = &self.rational_nodes {
            let distinct = distinct_nodes(nodes);
            let num = bareiss_det(&confluent_matrix_exact(&distinct, r, n));
            let den = bareiss_det(&confluent_matrix_exact(&distinct, r, 1));
            return Ok(Certified::Exact(num / den));
        }
        let rs = self.roots()?;
        let est = magnitude_estimate(&rs.boxes, n) * 2.0;
        let initial = bits_for(precision) + est.ceil() as u64 + 8 * r as u64;
        let (ratio, tight) = with_refinement(&rs, initial, |cur, bits| {
            let num = interval_det(&confluent_matrix_interval(&cur.boxes, r, n, bits), bits)?;
            let den = interval_det(&confluent_matrix_interval(&cur.boxes, r, 1, bits), bits)?;
            let q = num.div(&den, bits)?;
            (&q.width() < precision).then_some(q)
        })?;
        self.store_roots(tight);
        Ok(Certified::Interval(ratio))
    }

    /// Product formula for `det W(n)`:
    /// `n^(sum C(m_l,2)) * prod j! * prod alpha_l^(C(m_l,2) n) * prod_{i<j} (alpha_j^n - alpha_i^n)^(m_i m_j)`.
    pub fn det_w_closed_form(&self, n: u64, precision: &BigRat) -> Result<Certified> {
        let scalar = pow_rat(&rat(n as i64), self.structure.n_exponent as i64)
            * self.structure.factorial_product()
            * self.structure.alpha_power(n as i64);
        if let Some(nodes) = &self.rational_nodes {
            let distinct = distinct_nodes(nodes);
            let mut acc = scalar;
            for (i, (ai, mi)) in distinct.iter().enumerate() {
                for (aj, mj) in &distinct[i + 1..] {
                    let d = pow_rat(aj, n as i64) - pow_rat(ai, n as i64);
                    acc *= pow_rat(&d, (mi * mj) as i64);
                }
            }
            return Ok(Certified::Exact(acc));
        }
        let rs = self.roots()?;
        let est = magnitude_estimate(&rs.boxes, n) + log2_abs(&scalar).max(0.0);
        let initial = bits_for(precision) + est.ceil() as u64;
        let (value, tight) = with_refinement(&rs, initial, |cur, bits| {
            let powers: Vec<ComplexInterval> = cur.boxes.iter().map(|b| b.interval().pow(n, bits)).collect();
            let mut acc = to_interval(&scalar);
            for i in 0..powers.len() {
                for j in i + 1..powers.len() {
                    let e = (cur.boxes[i].multiplicity * cur.boxes[j].multiplicity) as u64;
                    acc = (&acc * &(&powers[j] - &powers[i]).pow(e, bits)).round_out(bits);
                }
            }
            (&acc.width() < precision).then_some(acc)
        })?;
        self.store_roots(tight);
        Ok(Certified::Interval(value))
    }
}

/// The root list with multiplicities, in box order (ascending value).
fn distinct_nodes(nodes: &[(BigRat, u32)]) -> Vec<(BigRat, u32)> {
    let mut v = nodes.to_vec();
    v.sort();
    v
}

pub fn impulse_matrix(char_poly: &Poly, n: u64) -> Result<GvMatrix> {
    Ok(GvEvaluator::new(char_poly)?.impulse_matrix(n))
}

pub fn gv_det_exact(char_poly: &Poly, n: u64) -> Result<BigRat> {
    Ok(GvEvaluator::new(char_poly)?.det_exact(n))
}

pub fn gv_det_closed_form(char_poly: &Poly, n: u64, precision: &BigRat) -> Result<Certified> {
    GvEvaluator::new(char_poly)?.closed_form(n, precision)
}

pub fn confluent_w(char_poly: &Poly, n: u64, precision: &BigRat) -> Result<ConfluentW> {
    GvEvaluator::new(char_poly)?.confluent_w(n, precision)
}
