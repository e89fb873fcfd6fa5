use num_traits::Zero;

use super::{BigRat, Poly};

/// `unit * prod(g_e ^ e)` with monic, squarefree, pairwise coprime `g_e`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct SquarefreeDecomposition {
    /// `(g_e, e)` pairs, multiplicities strictly increasing.
    pub factors: Vec<(Poly, u32)>,
    pub unit: BigRat,
}

impl SquarefreeDecomposition {
    /// Number of distinct roots, i.e. the sum of the factor degrees.
    pub fn distinct_roots(&self) -> usize {
        self.factors.iter().map(|(g, _)| g.degree().unwrap_or(0)).sum()
    }

    /// Root multiplicities, one entry per distinct root, ascending.
    pub fn multiplicity_profile(&self) -> Vec<u32> {
        self.factors
            .iter()
            .flat_map(|(g, e)| std::iter::repeat_n(*e, g.degree().unwrap_or(0)))
            .collect()
    }

    pub fn is_squarefree(&self) -> bool {
        self.factors.iter().all(|(_, e)| *e == 1)
    }

    /// Product of the distinct factors.
    pub fn radical(&self) -> Poly {
        self.factors
            .iter()
            .fold(Poly::one(), |acc, (g, _)| &acc * g)
    }

    pub fn reconstruct(&self) -> Poly {
        self.factors
            .iter()
            .fold(Poly::constant(self.unit.clone()), |acc, (g, e)| &acc * &g.pow(*e))
    }
}

/// Yun's squarefree decomposition over the rationals. Panics on the zero
/// polynomial.
pub fn yun_squarefree(f: &Poly) -> SquarefreeDecomposition {
    assert!(!f.is_zero(), "squarefree decomposition of the zero polynomial");
    let unit = f.leading_coeff().cloned().unwrap_or_else(BigRat::zero);
    let mut factors = Vec::new();
    if f.degree() == Some(0) {
        return SquarefreeDecomposition { factors, unit };
    }
    let f = f.monic();
    let df = f.derivative();
    let a0 = f.gcd(&df);
    let mut b = f.exact_div(&a0);
    let c = df.exact_div(&a0);
    let mut d = &c - &b.derivative();
    let mut e = 1u32;
    while !b.is_one() {
        let a = b.gcd(&d);
        b = b.exact_div(&a);
        let c = d.exact_div(&a);
        d = &c - &b.derivative();
        if !a.is_one() {
            factors.push((a, e));
        }
        e += 1;
    }
    SquarefreeDecomposition { factors, unit }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::exact::rat;
    use proptest::prelude::*;

    fn p(c: &[i64]) -> Poly {
        Poly::from_ints(c)
    }

    #[test]
    fn already_squarefree() {
        let d = yun_squarefree(&p(&[2, -3, 1]));
        assert_eq!(d.factors, vec![(p(&[2, -3, 1]), 1)]);
        assert_eq!(d.unit, rat(1));
    }

    #[test]
    fn perfect_square() {
        let d = yun_squarefree(&p(&[4, -4, 1]));
        assert_eq!(d.factors, vec![(p(&[-2, 1]), 2)]);
    }

    #[test]
    fn mixed_multiplicities() {
        // (x - 1)(x - 2)^2 = x^3 - 5x^2 + 8x - 4
        let d = yun_squarefree(&p(&[-4, 8, -5, 1]));
        assert_eq!(d.factors, vec![(p(&[-1, 1]), 1), (p(&[-2, 1]), 2)]);
        assert_eq!(d.distinct_roots(), 2);
        assert_eq!(d.multiplicity_profile(), vec![1, 2]);
    }

    #[test]
    fn non_monic_and_constant() {
        let f = p(&[-12, 12, -3]); // -3 (x - 2)^2
        let d = yun_squarefree(&f);
        assert_eq!(d.unit, rat(-3));
        assert_eq!(d.reconstruct(), f);
        let c = yun_squarefree(&p(&[7]));
        assert!(c.factors.is_empty());
        assert_eq!(c.reconstruct(), p(&[7]));
    }

    proptest! {
        #[test]
        fn reconstructs_products_of_powers(
            roots in prop::collection::vec((-4i64..=4, 1u32..=3), 1..4),
            lead in prop::sample::select(vec![-3i64, -1, 1, 2, 5]),
        ) {
            let f = roots.iter().fold(p(&[lead]), |acc, &(a, e)| &acc * &p(&[-a, 1]).pow(e));
            let d = yun_squarefree(&f);
            prop_assert_eq!(d.reconstruct(), f);
            for w in d.factors.windows(2) {
                prop_assert!(w[0].1 < w[1].1);
            }
            for (g, _) in &d.factors {
                prop_assert!(g.gcd(&g.derivative()).is_one());
            }
        }
    }
}
