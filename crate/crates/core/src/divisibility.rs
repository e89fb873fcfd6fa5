//! Divisibility-sequence checks: the prefix test `S_0 = 0, S_1 = 1,
//! S_n | S_mn`, the divisibility `S_n | D(n)`, its Cramer-rule certificate,
//! and the pairwise product for squarefree characteristic polynomials.

use num_bigint::BigInt;
use num_traits::{One, Signed};

use crate::error::{Error, Result};
use crate::exact::{bareiss_det, format_rat, int_divides, is_integer, yun_squarefree, BigRat, Poly};
use crate::recurrence::{require_nondegenerate, LinearRecurrence};
use crate::roots::{bits_for, isolate_roots, rational_roots, with_refinement};
use crate::vandermonde::{
    pairwise_product_exact, pairwise_product_interval, Agreement, Certified, GvEvaluator,
};

/// `10^-30`, the default width bound for certified intervals.
pub fn default_precision() -> BigRat {
    BigRat::new(BigInt::one(), BigInt::from(10u32).pow(30))
}

/// A failed condition of the divisibility-sequence definition.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum DefViolation {
    /// `S_index` should equal `expected`.
    InitialTerm { index: u64, expected: BigRat, got: BigRat },
    /// `S_n` does not divide `S_mn`.
    Divides { n: u64, m: u64 },
}

/// `S_n`, `D(n)` and the closed-form cross-check at one `n`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct TheoremRow {
    pub n: u64,
    pub s_n: BigRat,
    pub d: BigRat,
    pub divides: bool,
    pub closed_form: Certified,
    pub agreement: Agreement,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct DivisibilityReport {
    pub checked_up_to: u64,
    pub is_divisibility_prefix: bool,
    pub def_violations: Vec<DefViolation>,
    /// Empty for a prefix-only check.
    pub theorem_results: Vec<TheoremRow>,
    pub theorem_violations: Vec<u64>,
}

impl DivisibilityReport {
    /// A clean prefix together with some `S_n` not dividing `D(n)`.
    pub fn is_finding(&self) -> bool {
        self.is_divisibility_prefix && !self.theorem_violations.is_empty()
    }
}

fn integral_terms(rec: &LinearRecurrence, count: usize) -> Result<Vec<BigInt>> {
    rec.terms(count)
        .into_iter()
        .enumerate()
        .map(|(i, t)| {
            if is_integer(&t) {
                Ok(t.to_integer())
            } else {
                Err(Error::NonIntegralSequence { index: i as u64, value: format_rat(&t) })
            }
        })
        .collect()
}

fn prefix_violations(terms: &[BigInt], n_max: u64) -> Vec<DefViolation> {
    let mut out = Vec::new();
    for (index, expected) in [(0u64, 0i64), (1, 1)] {
        if let Some(t) = terms.get(index as usize) {
            if *t != BigInt::from(expected) {
                out.push(DefViolation::InitialTerm {
                    index,
                    expected: BigRat::from_integer(expected.into()),
                    got: BigRat::from_integer(t.clone()),
                });
            }
        }
    }
    for n in 1..=n_max {
        for m in 2..=n_max / n {
            if !int_divides(&terms[n as usize], &terms[(m * n) as usize]) {
                out.push(DefViolation::Divides { n, m });
            }
        }
    }
    out
}

/// Checks `S_0 = 0`, `S_1 = 1` and `S_n | S_mn` for `1 <= n, m` and `mn <= n_max`.
pub fn check_divisibility_prefix(rec: &LinearRecurrence, n_max: u64) -> Result<DivisibilityReport> {
    let terms = integral_terms(rec, n_max as usize + 1)?;
    let def_violations = prefix_violations(&terms, n_max);
    Ok(DivisibilityReport {
        checked_up_to: n_max,
        is_divisibility_prefix: def_violations.is_empty(),
        def_violations,
        theorem_results: Vec::new(),
        theorem_violations: Vec::new(),
    })
}

/// [`verify_theorem_with`] at the default precision.
pub fn verify_theorem(rec: &LinearRecurrence, n_max: u64) -> Result<DivisibilityReport> {
    verify_theorem_with(rec, n_max, &default_precision())
}

/// Prefix check plus `S_n | D(n)` for `n = 0 ..= n_max`, each `D(n)` also
/// checked against the closed form. A disagreement between the two is an
/// [`Error::Mismatch`].
pub fn verify_theorem_with(rec: &LinearRecurrence, n_max: u64, precision: &BigRat) -> Result<DivisibilityReport> {
    let terms = integral_terms(rec, n_max as usize + 1)?;
    let eval = GvEvaluator::new(rec.char_poly())?;
    let def_violations = prefix_violations(&terms, n_max);
    let mut theorem_results = Vec::with_capacity(n_max as usize + 1);
    let mut theorem_violations = Vec::new();
    for n in 0..=n_max {
        let res = eval.evaluate(n, precision)?;
        if res.agreement == Agreement::Mismatch {
            return Err(mismatch(n, &res.d_exact, &res.closed_form));
        }
        let s = &terms[n as usize];
        let divides = is_integer(&res.d_exact) && int_divides(s, &res.d_exact.to_integer());
        if !divides {
            theorem_violations.push(n);
        }
        theorem_results.push(TheoremRow {
            n,
            s_n: BigRat::from_integer(s.clone()),
            d: res.d_exact,
            divides,
            closed_form: res.closed_form,
            agreement: res.agreement,
        });
    }
    Ok(DivisibilityReport {
        checked_up_to: n_max,
        is_divisibility_prefix: def_violations.is_empty(),
        def_violations,
        theorem_results,
        theorem_violations,
    })
}

fn mismatch(n: u64, exact: &BigRat, closed: &Certified) -> Error {
    let closed = match closed {
        Certified::Exact(v) => format_rat(v),
        Certified::Interval(iv) => format!(
            "[{}, {}] + i[{}, {}]",
            format_rat(&iv.re.lo),
            format_rat(&iv.re.hi),
            format_rat(&iv.im.lo),
            format_rat(&iv.im.hi)
        ),
    };
    Error::Mismatch { n, exact: format_rat(exact), closed }
}

/// The impulse matrix at `n` with its first column replaced by
/// `(S_n, S_2n, ..., S_(r-1)n)`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct CramerCertificate {
    pub n: u64,
    pub s_n: BigRat,
    /// `S_hn` for `h = 1 .. r-1`.
    pub column: Vec<BigRat>,
    pub numerator_det: BigRat,
    pub d_value: BigRat,
    /// `S_n` divides every entry of `column`.
    pub column_divisibility: bool,
}

pub fn cramer_certificate(rec: &LinearRecurrence, n: u64) -> Result<CramerCertificate> {
    let r = rec.order();
    if r < 2 {
        return Err(Error::DegreeTooSmall { min: 2, got: r });
    }
    if n == 0 {
        return Err(Error::CertificateFailure { n, reason: "n must be positive".into() });
    }
    let eval = GvEvaluator::new(rec.char_poly())?;
    let matrix = eval.impulse_matrix(n).entries;
    let terms = integral_terms(rec, (r - 1) * n as usize + 1)?;
    let s_n = terms[n as usize].clone();
    let column: Vec<BigInt> = (1..r).map(|h| terms[h * n as usize].clone()).collect();
    let column_rat: Vec<BigRat> = column.iter().cloned().map(BigRat::from_integer).collect();
    let numerator_det = bareiss_det(&matrix.with_column(0, &column_rat));
    let d_value = bareiss_det(&matrix);
    if numerator_det != d_value {
        return Err(Error::CertificateFailure {
            n,
            reason: format!(
                "numerator {} differs from D(n) = {}",
                format_rat(&numerator_det),
                format_rat(&d_value)
            ),
        });
    }
    if !is_integer(&numerator_det) || !int_divides(&s_n, &numerator_det.to_integer()) {
        return Err(Error::CertificateFailure {
            n,
            reason: format!("S_n = {s_n} does not divide {}", format_rat(&numerator_det)),
        });
    }
    let column_divisibility = column.iter().all(|x| int_divides(&s_n, x));
    Ok(CramerCertificate {
        n,
        s_n: BigRat::from_integer(s_n),
        column: column_rat,
        numerator_det,
        d_value,
        column_divisibility,
    })
}

/// `prod_{i<j} (alpha_j^n - alpha_i^n) / (alpha_j - alpha_i)` over the
/// (distinct) roots of a squarefree characteristic polynomial.
pub fn remark_product(char_poly: &Poly, n: u64, precision: &BigRat) -> Result<Certified> {
    if !precision.is_positive() {
        return Err(Error::InvalidPrecision);
    }
    if char_poly.is_zero() || !yun_squarefree(char_poly).is_squarefree() {
        return Err(Error::NotSquarefree);
    }
    require_nondegenerate(char_poly)?;
    let deg = char_poly.degree().unwrap_or(0);
    let nodes = rational_roots(char_poly);
    if nodes.len() == deg {
        return Ok(Certified::Exact(pairwise_product_exact(&nodes, n)));
    }
    let rs = isolate_roots(char_poly, &BigRat::new(BigInt::one(), BigInt::from(1u64 << 32)))?;
    let initial = bits_for(precision) + (n + 1) * deg as u64 * 2;
    let (value, _) = with_refinement(&rs, initial, |cur, bits| {
        let v = pairwise_product_interval(&cur.boxes, n, bits)?;
        (&v.width() < precision).then_some(v)
    })?;
    Ok(Certified::Interval(value))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::exact::rat;

    fn rec(c: &[i64], init: &[i64]) -> LinearRecurrence {
        LinearRecurrence::new(Poly::from_ints(c), init.iter().map(|&v| rat(v)).collect()).unwrap()
    }

    fn fib() -> LinearRecurrence {
        rec(&[-1, -1, 1], &[0, 1])
    }

    fn fib_sq() -> LinearRecurrence {
        rec(&[1, -2, -2, 1], &[0, 1, 1])
    }

    fn eps6() -> BigRat {
        BigRat::new(BigInt::one(), BigInt::from(1_000_000))
    }

    #[test]
    fn prefix_examples() {
        assert!(check_divisibility_prefix(&fib(), 100).unwrap().is_divisibility_prefix);
        assert!(check_divisibility_prefix(&rec(&[2, -3, 1], &[0, 1]), 60).unwrap().is_divisibility_prefix);
        let lucas = check_divisibility_prefix(&rec(&[-1, -1, 1], &[2, 1]), 10).unwrap();
        assert!(!lucas.is_divisibility_prefix);
        assert_eq!(
            lucas.def_violations[0],
            DefViolation::InitialTerm { index: 0, expected: rat(0), got: rat(2) }
        );
    }

    #[test]
    fn prefix_rejects_rational_terms() {
        let r = LinearRecurrence::new(Poly::from_ints(&[-1, 1]), vec![BigRat::new(1.into(), 2.into())]).unwrap();
        assert!(matches!(check_divisibility_prefix(&r, 3), Err(Error::NonIntegralSequence { index: 0, .. })));
    }

    #[test]
    fn zero_divides_only_zero() {
        // 0, 1, 0, -1, 0, 1, ...: S_n = 0 exactly at even n, and S_2m = 0 too
        let r = rec(&[1, 0, 1], &[0, 1]);
        let rep = check_divisibility_prefix(&r, 30).unwrap();
        assert!(rep.is_divisibility_prefix, "{:?}", rep.def_violations);
    }

    #[test]
    fn theorem_examples() {
        let rep = verify_theorem_with(&fib(), 50, &eps6()).unwrap();
        assert!(rep.is_divisibility_prefix && rep.theorem_violations.is_empty());
        assert_eq!(rep.theorem_results[0].s_n, rat(0));
        assert_eq!(rep.theorem_results[0].d, rat(0));
        assert!(rep.theorem_results[0].divides);
        let rep = verify_theorem_with(&fib_sq(), 40, &eps6()).unwrap();
        assert!(rep.is_divisibility_prefix && rep.theorem_violations.is_empty());
        assert!(!rep.is_finding());
    }

    #[test]
    fn lucas_is_not_a_finding() {
        let rep = verify_theorem_with(&rec(&[-1, -1, 1], &[2, 1]), 10, &eps6()).unwrap();
        assert!(!rep.is_divisibility_prefix);
        assert!(!rep.is_finding());
    }

    #[test]
    fn certificate_examples() {
        let c = cramer_certificate(&fib(), 7).unwrap();
        assert_eq!((c.numerator_det.clone(), c.d_value.clone()), (rat(13), rat(13)));
        let c = cramer_certificate(&fib_sq(), 3).unwrap();
        assert_eq!(c.s_n, rat(4));
        assert_eq!(c.column, vec![rat(4), rat(64)]);
        assert_eq!(c.numerator_det, c.d_value);
        assert!(c.column_divisibility);
        let c = cramer_certificate(&fib_sq(), 1).unwrap();
        assert_eq!(c.numerator_det, rat(1));
    }

    #[test]
    fn certificate_rejects_lucas() {
        assert!(matches!(
            cramer_certificate(&rec(&[-1, -1, 1], &[2, 1]), 3),
            Err(Error::CertificateFailure { n: 3, .. })
        ));
    }

    #[test]
    fn remark_examples() {
        let f = remark_product(&Poly::from_ints(&[-1, -1, 1]), 6, &eps6()).unwrap();
        assert!(f.contains(&rat(8)));
        assert_eq!(remark_product(&Poly::from_ints(&[2, -3, 1]), 5, &eps6()).unwrap(), Certified::Exact(rat(31)));
        assert!(remark_product(&Poly::from_ints(&[1, -2, -2, 1]), 1, &eps6()).unwrap().contains(&rat(1)));
        assert_eq!(remark_product(&Poly::from_ints(&[4, -4, 1]), 2, &eps6()), Err(Error::NotSquarefree));
    }

    #[test]
    fn remark_matches_closed_form() {
        for c in [&[-1, -1, 1][..], &[1, -2, -2, 1], &[2, -3, 1], &[-3, 1, 0, 1]] {
            let f = Poly::from_ints(c);
            let eval = GvEvaluator::new(&f).unwrap();
            for n in 0..=25 {
                let d = eval.det_exact(n);
                let rp = remark_product(&f, n, &eps6()).unwrap();
                assert!(rp.contains(&d), "{f} n = {n}");
            }
        }
    }
}
