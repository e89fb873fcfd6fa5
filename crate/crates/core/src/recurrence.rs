//! Linear recurrences, impulse bases and non-degeneracy.
//!
//! A recurrence of order `r` is given by its monic characteristic polynomial
//! `x^r + c_{r-1} x^{r-1} + ... + c_0` and initial terms `a_0 .. a_{r-1}`;
//! later terms follow `a_n = -(c_0 a_{n-r} + ... + c_{r-1} a_{n-1})`.

use std::fmt;

use num_traits::{One, Zero};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::exact::{
    euler_phi, is_integer, rat, resultant, solve_exact, yun_squarefree, BigRat,
    CyclotomicTable, Matrix, Poly,
};
use crate::interval::{interval_solve, ComplexInterval, ComplexRat};
use crate::roots::{bits_for, isolate_roots, rational_roots, with_refinement, RootStructure};
use crate::vandermonde::{confluent_matrix_exact, confluent_matrix_interval};

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct LinearRecurrence {
    char_poly: Poly,
    init: Vec<BigRat>,
}

fn validate_char_poly(char_poly: &Poly) -> Result<usize> {
    let r = char_poly.degree().unwrap_or(0);
    if r < 1 {
        return Err(Error::DegreeTooSmall { min: 1, got: r });
    }
    if !char_poly.is_monic() {
        return Err(Error::NotMonic);
    }
    if char_poly.coeff(0).is_zero() {
        return Err(Error::ZeroRoot);
    }
    Ok(r)
}

impl LinearRecurrence {
    pub fn new(char_poly: Poly, init: Vec<BigRat>) -> Result<Self> {
        let r = validate_char_poly(&char_poly)?;
        if init.len() != r {
            return Err(Error::LengthMismatch { expected: r, got: init.len() });
        }
        Ok(LinearRecurrence { char_poly, init })
    }

    pub fn char_poly(&self) -> &Poly {
        &self.char_poly
    }

    pub fn init(&self) -> &[BigRat] {
        &self.init
    }

    pub fn order(&self) -> usize {
        self.init.len()
    }

    /// The first `count` terms.
    pub fn terms(&self, count: usize) -> Vec<BigRat> {
        let r = self.order();
        let c = self.char_poly.coeffs();
        let mut out: Vec<BigRat> = self.init.iter().take(count).cloned().collect();
        while out.len() < count {
            let base = out.len() - r;
            let next = -(0..r)
                .map(|i| &c[i] * &out[base + i])
                .fold(BigRat::zero(), |acc, t| acc + t);
            out.push(next);
        }
        out
    }

    pub fn term(&self, n: u64) -> BigRat {
        self.terms(n as usize + 1).pop().expect("at least one term")
    }

    /// True when every term is an integer, i.e. integral coefficients and
    /// integral initial terms.
    pub fn is_integral(&self) -> bool {
        self.char_poly.is_integral() && self.init.iter().all(is_integer)
    }
}

pub fn new_recurrence(char_poly: Poly, init: Vec<BigRat>) -> Result<LinearRecurrence> {
    LinearRecurrence::new(char_poly, init)
}

pub fn term(rec: &LinearRecurrence, n: u64) -> BigRat {
    rec.term(n)
}

/// The `r` impulse sequences of a characteristic polynomial: the `k`-th has
/// initial terms `delta_{jk}`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ImpulseBasis {
    pub char_poly: Poly,
    pub sequences: Vec<LinearRecurrence>,
}

impl ImpulseBasis {
    pub fn order(&self) -> usize {
        self.sequences.len()
    }

    /// `table[k][n]` for `n <= max_index`.
    pub fn table(&self, max_index: usize) -> Vec<Vec<BigRat>> {
        self.sequences.iter().map(|s| s.terms(max_index + 1)).collect()
    }
}

pub fn impulse_basis(char_poly: &Poly) -> Result<ImpulseBasis> {
    let r = validate_char_poly(char_poly)?;
    let sequences = (0..r)
        .map(|k| {
            let init = (0..r).map(|j| if j == k { BigRat::one() } else { BigRat::zero() }).collect();
            LinearRecurrence::new(char_poly.clone(), init)
        })
        .collect::<Result<Vec<_>>>()?;
    Ok(ImpulseBasis { char_poly: char_poly.clone(), sequences })
}

/// Coefficients of `rec` in its impulse basis: `a_n = sum_k a_k X^(k)_n`.
///
/// The coefficient of `X^(k)` is read off at index `k`, where every other
/// impulse sequence vanishes; it is therefore the initial term `a_k`.
pub fn decompose(rec: &LinearRecurrence) -> Vec<BigRat> {
    rec.init().to_vec()
}

/// `sum_k coeffs[k] * X^(k)_n` for `n < count`.
pub fn recompose(basis: &ImpulseBasis, coeffs: &[BigRat], count: usize) -> Vec<BigRat> {
    assert_eq!(coeffs.len(), basis.order(), "one coefficient per impulse sequence");
    let table = basis.table(count.saturating_sub(1));
    (0..count)
        .map(|n| {
            coeffs
                .iter()
                .zip(&table)
                .map(|(c, xs)| c * &xs[n])
                .fold(BigRat::zero(), |acc, t| acc + t)
        })
        .collect()
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(tag = "status", content = "witness")]
pub enum NondegeneracyVerdict {
    NonDegenerate,
    ZeroRoot,
    /// Some ratio of distinct roots is a primitive root of unity of this order.
    UnityRatio(u64),
}

impl NondegeneracyVerdict {
    pub fn is_nondegenerate(&self) -> bool {
        matches!(self, NondegeneracyVerdict::NonDegenerate)
    }
}

impl fmt::Display for NondegeneracyVerdict {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            NondegeneracyVerdict::NonDegenerate => write!(f, "NonDegenerate"),
            NondegeneracyVerdict::ZeroRoot => write!(f, "ZeroRoot"),
            NondegeneracyVerdict::UnityRatio(k) => write!(f, "UnityRatio({k})"),
        }
    }
}

/// `Res_y(f(y), f(x y))` as a primitive integer polynomial in `x`; its roots
/// are the ratios of all root pairs of `f`, counted with multiplicity.
///
/// Computed by evaluating the resultant at `deg(f)^2 + 1` integer points and
/// interpolating. `f` is made monic first so the resultant at every point is
/// `prod_i f(x0 * alpha_i)`, independent of degree drops at `x0 = 0`.
pub fn ratio_polynomial(f: &Poly) -> Poly {
    let f = f.monic();
    let r = f.degree().expect("nonzero polynomial");
    let points: Vec<BigRat> = (0..=(r * r) as i64).map(rat).collect();
    let values: Vec<BigRat> = points
        .iter()
        .map(|x0| resultant(&f, &f.compose_scale(x0)))
        .collect();
    Poly::interpolate(&points, &values).primitive_part().1
}

/// Multiplicity of `x - 1` as a factor of `p`.
fn unit_root_multiplicity(p: &Poly) -> usize {
    let lin = Poly::from_ints(&[-1, 1]);
    let mut p = p.clone();
    let mut m = 0;
    while !p.is_zero() && p.eval(&BigRat::one()).is_zero() {
        p = p.exact_div(&lin);
        m += 1;
    }
    m
}

/// Detects a zero root or a root-of-unity ratio between distinct roots.
///
/// Ratio 1 appears in the ratio polynomial `sum m_l^2` times from pairs of
/// equal roots; any excess means two distinct roots coincide, which cannot
/// happen but is checked. Every other unity ratio of order `k` makes the
/// irreducible `Phi_k` a factor, and `phi(k) <= deg R` bounds the search.
pub fn nondegeneracy_check(char_poly: &Poly) -> NondegeneracyVerdict {
    assert!(!char_poly.is_zero(), "non-degeneracy of the zero polynomial");
    if char_poly.coeff(0).is_zero() {
        return NondegeneracyVerdict::ZeroRoot;
    }
    if char_poly.degree() == Some(0) {
        return NondegeneracyVerdict::NonDegenerate;
    }
    let structural: usize = yun_squarefree(char_poly)
        .multiplicity_profile()
        .iter()
        .map(|&m| (m * m) as usize)
        .sum();
    let ratios = ratio_polynomial(char_poly);
    if unit_root_multiplicity(&ratios) > structural {
        return NondegeneracyVerdict::UnityRatio(1);
    }
    let deg = ratios.degree().unwrap_or(0) as u64;
    // phi(k) >= sqrt(k / 2), so phi(k) <= deg forces k <= 2 deg^2
    let mut table = CyclotomicTable::new();
    for k in 2..=(2 * deg * deg).max(2) {
        if euler_phi(k) > deg {
            continue;
        }
        if ratios.rem(table.get(k)).expect("cyclotomic is nonzero").is_zero() {
            return NondegeneracyVerdict::UnityRatio(k);
        }
    }
    NondegeneracyVerdict::NonDegenerate
}

/// `Ok` for non-degenerate polynomials, otherwise an error naming the verdict.
pub fn require_nondegenerate(char_poly: &Poly) -> Result<()> {
    match nondegeneracy_check(char_poly) {
        NondegeneracyVerdict::NonDegenerate => Ok(()),
        NondegeneracyVerdict::ZeroRoot => Err(Error::ZeroRoot),
        v => Err(Error::Degenerate(v.to_string())),
    }
}

/// Coefficients `c^(k)_{i,j}` expressing each impulse sequence as
/// `X^(k)_t = sum_j sum_i c^(k)_{i,j} t^i alpha_j^t`.
#[derive(Debug, Clone)]
pub struct SpectralCoefficients {
    pub roots: RootStructure,
    /// `columns[k][col]`, `col` running over `(root j, power i)` block by
    /// block in the order of `roots.boxes`.
    columns: Vec<Vec<ComplexInterval>>,
    offsets: Vec<usize>,
    pub exact: bool,
}

impl SpectralCoefficients {
    pub fn order(&self) -> usize {
        self.columns.len()
    }

    /// `c^(k)_{i,j}` for sequence `k`, root index `j` (0-based, box order) and power `i`.
    pub fn get(&self, k: usize, j: usize, i: usize) -> &ComplexInterval {
        assert!(i < self.roots.boxes[j].multiplicity as usize, "power exceeds multiplicity");
        &self.columns[k][self.offsets[j] + i]
    }

    /// Interval value of `sum_j sum_i c^(k)_{i,j} t^i alpha_j^t` (`0^0 = 1`).
    pub fn reconstruct(&self, k: usize, t: u64, bits: u64) -> ComplexInterval {
        let mut acc = ComplexInterval::zero();
        for (j, b) in self.roots.boxes.iter().enumerate() {
            let alpha_t = b.interval().pow(t, bits);
            let mut t_pow = BigRat::one();
            for i in 0..b.multiplicity as usize {
                let term = (&(self.get(k, j, i) * &alpha_t).round_out(bits)
                    * &ComplexInterval::real_point(t_pow.clone()))
                    .round_out(bits);
                acc = &acc + &term;
                t_pow *= rat(t as i64);
            }
        }
        acc
    }

    /// Largest width over all coefficients.
    pub fn max_width(&self) -> BigRat {
        self.columns
            .iter()
            .flatten()
            .map(ComplexInterval::width)
            .max()
            .unwrap_or_else(BigRat::zero)
    }
}

fn block_offsets(rs: &RootStructure) -> Vec<usize> {
    rs.boxes
        .iter()
        .scan(0usize, |acc, b| {
            let o = *acc;
            *acc += b.multiplicity as usize;
            Some(o)
        })
        .collect()
}

/// Solves the confluent Vandermonde systems for the spectral coefficients of
/// every impulse sequence, exactly when all roots are rational, otherwise in
/// certified interval arithmetic with every coefficient narrower than
/// `precision` and reconstruction at `t = 0 .. r-1` enclosing `delta_{kt}`.
pub fn spectral_coefficients(char_poly: &Poly, precision: &BigRat) -> Result<SpectralCoefficients> {
    let r = validate_char_poly(char_poly)?;
    require_nondegenerate(char_poly)?;
    let rs = isolate_roots(char_poly, &BigRat::new(1.into(), 1024.into()))?;
    let offsets = block_offsets(&rs);

    if rs.all_exact() {
        let nodes: Vec<(BigRat, u32)> = rational_roots(char_poly);
        let w1 = confluent_matrix_exact(&nodes, r, 1);
        let ident = Matrix::from_fn(r, r, |i, j| if i == j { BigRat::one() } else { BigRat::zero() });
        let c = solve_exact(&w1, &ident).ok_or_else(|| Error::Degenerate("singular W(1)".into()))?;
        let columns = (0..r)
            .map(|k| (0..r).map(|row| ComplexInterval::real_point(c[(row, k)].clone())).collect())
            .collect();
        return Ok(SpectralCoefficients { roots: rs, columns, offsets, exact: true });
    }

    let ident = Matrix::from_fn(r, r, |i, j| {
        ComplexInterval::real_point(if i == j { BigRat::one() } else { BigRat::zero() })
    });
    let initial = bits_for(precision) + 8 * r as u64;
    let (sc, _) = with_refinement(&rs, initial, |cur, bits| {
        let w1 = confluent_matrix_interval(&cur.boxes, r, 1, bits);
        let c = interval_solve(&w1, &ident, bits)?;
        let columns: Vec<Vec<ComplexInterval>> =
            (0..r).map(|k| (0..r).map(|row| c[(row, k)].clone()).collect()).collect();
        let sc = SpectralCoefficients {
            roots: cur.clone(),
            columns,
            offsets: offsets.clone(),
            exact: false,
        };
        if &sc.max_width() >= precision {
            return None;
        }
        for k in 0..r {
            for t in 0..r {
                let want = ComplexRat::real(if k == t { BigRat::one() } else { BigRat::zero() });
                if !sc.reconstruct(k, t as u64, bits).contains(&want) {
                    return None;
                }
            }
        }
        Some(sc)
    })?;
    Ok(sc)
}

/// Midpoint of an interval coefficient as `(re, im)` floats.
pub fn approx(z: &ComplexInterval) -> (f64, f64) {
    z.midpoint().to_f64()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::exact::ratio;
    use num_traits::Signed;
    use proptest::prelude::*;

    fn p(c: &[i64]) -> Poly {
        Poly::from_ints(c)
    }

    fn ints(xs: &[i64]) -> Vec<BigRat> {
        xs.iter().map(|&x| rat(x)).collect()
    }

    fn fib() -> LinearRecurrence {
        LinearRecurrence::new(p(&[-1, -1, 1]), ints(&[0, 1])).unwrap()
    }

    #[test]
    fn validation_errors() {
        assert_eq!(LinearRecurrence::new(p(&[0, -1, 1]), ints(&[0, 1])), Err(Error::ZeroRoot));
        assert_eq!(LinearRecurrence::new(p(&[1, 1, 2]), ints(&[0, 1])), Err(Error::NotMonic));
        assert_eq!(
            LinearRecurrence::new(p(&[-1, -1, 1]), ints(&[0])),
            Err(Error::LengthMismatch { expected: 2, got: 1 })
        );
        assert!(matches!(LinearRecurrence::new(p(&[1]), vec![]), Err(Error::DegreeTooSmall { .. })));
    }

    #[test]
    fn fibonacci_and_lucas_terms() {
        assert_eq!(fib().term(10), rat(55));
        let lucas = LinearRecurrence::new(p(&[-1, -1, 1]), ints(&[2, 1])).unwrap();
        assert_eq!(lucas.term(0), rat(2));
        assert_eq!(lucas.terms(6), ints(&[2, 1, 3, 4, 7, 11]));
    }

    #[test]
    fn double_root_terms() {
        let rec = LinearRecurrence::new(p(&[4, -4, 1]), ints(&[0, 1])).unwrap();
        assert_eq!(rec.term(5), rat(80));
    }

    #[test]
    fn impulse_sequences() {
        let b = impulse_basis(&p(&[-1, -1, 1])).unwrap();
        let t = b.table(6);
        assert_eq!(t[0], ints(&[1, 0, 1, 1, 2, 3, 5]));
        assert_eq!(t[1], ints(&[0, 1, 1, 2, 3, 5, 8]));

        let b = impulse_basis(&p(&[4, -4, 1])).unwrap();
        let t = b.table(10);
        for n in 1..=10i64 {
            assert_eq!(t[1][n as usize], rat(n * (1 << (n - 1))));
        }
    }

    #[test]
    fn lucas_decomposition() {
        let lucas = LinearRecurrence::new(p(&[-1, -1, 1]), ints(&[2, 1])).unwrap();
        let coeffs = decompose(&lucas);
        assert_eq!(coeffs, ints(&[2, 1]));
        let basis = impulse_basis(lucas.char_poly()).unwrap();
        // L_2 = 2 X^(0)_2 + 1 X^(1)_2 = 2 + 1
        assert_eq!(recompose(&basis, &coeffs, 3)[2], rat(3));
        assert_eq!(recompose(&basis, &coeffs, 20), lucas.terms(20));
    }

    #[test]
    fn impulse_self_decomposition() {
        let basis = impulse_basis(&p(&[1, -2, -2, 1])).unwrap();
        for (k, s) in basis.sequences.iter().enumerate() {
            let c = decompose(s);
            for (j, v) in c.iter().enumerate() {
                assert_eq!(*v, rat((j == k) as i64));
            }
        }
    }

    #[test]
    fn ratio_polynomial_of_x2_plus_1() {
        // roots +-i: ratios 1, 1, -1, -1
        assert_eq!(ratio_polynomial(&p(&[1, 0, 1])), p(&[1, 0, -2, 0, 1]));
    }

    #[test]
    fn nondegeneracy_examples() {
        assert_eq!(nondegeneracy_check(&p(&[-1, 0, 1])), NondegeneracyVerdict::UnityRatio(2));
        assert_eq!(nondegeneracy_check(&p(&[1, 0, 1])), NondegeneracyVerdict::UnityRatio(2));
        assert_eq!(nondegeneracy_check(&p(&[-1, -1, 1])), NondegeneracyVerdict::NonDegenerate);
        assert_eq!(nondegeneracy_check(&p(&[4, -4, 1])), NondegeneracyVerdict::NonDegenerate);
        assert_eq!(nondegeneracy_check(&p(&[0, -1, 1])), NondegeneracyVerdict::ZeroRoot);
        // x^2 + x + 1: roots are primitive cube roots of unity, ratio of order 3
        assert_eq!(nondegeneracy_check(&p(&[1, 1, 1])), NondegeneracyVerdict::UnityRatio(3));
        // x^4 + 1: ratios include i
        assert_eq!(nondegeneracy_check(&p(&[1, 0, 0, 0, 1])), NondegeneracyVerdict::UnityRatio(2));
        // (x - 2)(x^2 + 2): i sqrt 2 / (-i sqrt 2) = -1
        assert_eq!(
            nondegeneracy_check(&(&p(&[-2, 1]) * &p(&[2, 0, 1]))),
            NondegeneracyVerdict::UnityRatio(2)
        );
    }

    #[test]
    fn nondegenerate_has_structural_unit_multiplicity() {
        for f in [p(&[-1, -1, 1]), p(&[4, -4, 1]), &p(&[-1, 1]) * &p(&[-2, 1]).pow(2)] {
            assert_eq!(nondegeneracy_check(&f), NondegeneracyVerdict::NonDegenerate);
            let r = ratio_polynomial(&f);
            let structural: u32 = yun_squarefree(&f).multiplicity_profile().iter().map(|m| m * m).sum();
            assert_eq!(unit_root_multiplicity(&r), structural as usize);
            let mut t = CyclotomicTable::new();
            for k in 2..=40 {
                assert!(!r.rem(t.get(k)).unwrap().is_zero() || euler_phi(k) > 9);
            }
        }
    }

    #[test]
    fn spectral_exact_distinct_roots() {
        // X^(1)_n = 2^n - 1
        let sc = spectral_coefficients(&p(&[2, -3, 1]), &ratio(1, 1000)).unwrap();
        assert!(sc.exact);
        assert_eq!(sc.get(1, 0, 0), &ComplexInterval::real_point(rat(-1)));
        assert_eq!(sc.get(1, 1, 0), &ComplexInterval::real_point(rat(1)));
    }

    #[test]
    fn spectral_exact_double_root() {
        // X^(1)_n = n 2^(n-1) = (1/2) n 2^n
        let sc = spectral_coefficients(&p(&[4, -4, 1]), &ratio(1, 1000)).unwrap();
        assert_eq!(sc.get(1, 0, 0), &ComplexInterval::real_point(rat(0)));
        assert_eq!(sc.get(1, 0, 1), &ComplexInterval::real_point(ratio(1, 2)));
    }

    #[test]
    fn spectral_interval_reconstructs_delta() {
        let eps = BigRat::new(1.into(), num_bigint::BigInt::from(10u32).pow(20));
        let sc = spectral_coefficients(&p(&[1, -2, -2, 1]), &eps).unwrap();
        assert!(!sc.exact);
        assert!(sc.max_width() < eps);
        for k in 0..3 {
            for t in 0..3u64 {
                let v = sc.reconstruct(k, t, 200);
                let want = ComplexRat::real(rat((k as u64 == t) as i64));
                assert!(v.contains(&want));
            }
        }
        // Fibonacci: X^(1)_n = (phi^n - psi^n) / sqrt 5, so c = +-1/sqrt 5
        let sc = spectral_coefficients(&p(&[-1, -1, 1]), &eps).unwrap();
        let (c_psi, _) = approx(sc.get(1, 0, 0));
        let (c_phi, _) = approx(sc.get(1, 1, 0));
        assert!((c_phi - 1.0 / 5f64.sqrt()).abs() < 1e-12);
        assert!((c_psi + 1.0 / 5f64.sqrt()).abs() < 1e-12);
    }

    #[test]
    fn spectral_rejects_degenerate() {
        assert!(matches!(
            spectral_coefficients(&p(&[-1, 0, 1]), &ratio(1, 10)),
            Err(Error::Degenerate(_))
        ));
    }

    proptest! {
        #[test]
        fn decomposition_round_trip(
            tail in prop::collection::vec(-5i64..=5, 1..6),
            c0 in prop::sample::select(vec![-3i64, -2, -1, 1, 2, 3]),
            init_seed in prop::collection::vec(-9i64..=9, 6),
        ) {
            let mut coeffs = vec![c0];
            coeffs.extend(&tail);
            coeffs.push(1);
            let f = p(&coeffs);
            let r = f.degree().unwrap();
            let rec = LinearRecurrence::new(f.clone(), ints(&init_seed[..r])).unwrap();
            let basis = impulse_basis(&f).unwrap();
            let terms = rec.terms(3 * r + 1);
            prop_assert_eq!(recompose(&basis, &decompose(&rec), 3 * r + 1), terms.clone());
            prop_assert!(terms.iter().all(is_integer));
            for (k, s) in basis.sequences.iter().enumerate() {
                for (j, v) in s.terms(r).iter().enumerate() {
                    prop_assert_eq!(v.clone(), rat((j == k) as i64));
                }
            }
        }
    }

    #[test]
    fn negative_rational_terms_stay_exact() {
        let rec = LinearRecurrence::new(Poly::new(vec![ratio(1, 2), rat(-1), rat(1)]), vec![rat(1), ratio(1, 3)]).unwrap();
        // a_2 = a_1 - a_0 / 2
        assert_eq!(rec.term(2), ratio(1, 3) - ratio(1, 2));
        assert!(!rec.is_integral());
        assert!(rec.term(7).abs() < rat(10));
    }
}
