use num_traits::{One, Zero};

use super::{pow_rat, BigRat, Matrix, Poly};

/// Resultant by the subresultant pseudo-remainder sequence.
///
/// Degrees are the true degrees of the arguments; `Res(f, c) = c^deg(f)` for
/// a nonzero constant `c` and the result is 0 if either argument is zero.
pub fn resultant(f: &Poly, g: &Poly) -> BigRat {
    let (Some(df), Some(dg)) = (f.degree(), g.degree()) else {
        return BigRat::zero();
    };
    let (mut a, mut b) = (f.clone(), g.clone());
    let mut negate = false;
    if df < dg {
        std::mem::swap(&mut a, &mut b);
        negate = df % 2 == 1 && dg % 2 == 1;
    }
    let deg = |p: &Poly| p.degree().expect("nonzero") as i64;
    let lc = |p: &Poly| p.leading_coeff().expect("nonzero").clone();

    if deg(&b) == 0 {
        let v = pow_rat(&lc(&b), deg(&a));
        return if negate { -v } else { v };
    }

    let (ca, pa) = a.primitive_part();
    let (cb, pb) = b.primitive_part();
    let t = pow_rat(&ca, deg(&pb)) * pow_rat(&cb, deg(&pa));
    a = pa;
    b = pb;
    let mut g_acc = BigRat::one();
    let mut h = BigRat::one();
    loop {
        let (da, db) = (deg(&a), deg(&b));
        let delta = da - db;
        if da % 2 == 1 && db % 2 == 1 {
            negate = !negate;
        }
        let r = a.pseudo_rem(&b).expect("nonzero divisor");
        if r.is_zero() {
            return BigRat::zero();
        }
        a = b;
        b = r.scale(&(&g_acc * pow_rat(&h, delta)).recip());
        g_acc = lc(&a);
        h = pow_rat(&h, 1 - delta) * pow_rat(&g_acc, delta);
        if deg(&b) == 0 {
            break;
        }
    }
    let h = pow_rat(&h, 1 - deg(&a)) * pow_rat(&lc(&b), deg(&a));
    let v = t * h;
    if negate {
        -v
    } else {
        v
    }
}

/// Sylvester matrix of `f` (degree m) and `g` (degree n): `n` shifted rows of
/// `f` followed by `m` shifted rows of `g`, coefficients in descending order.
pub fn sylvester_matrix(f: &Poly, g: &Poly) -> Matrix<BigRat> {
    let m = f.degree().unwrap_or(0);
    let n = g.degree().unwrap_or(0);
    let size = m + n;
    Matrix::from_fn(size, size, |i, j| {
        let (p, shift, d) = if i < n { (f, i, m) } else { (g, i - n, n) };
        if j < shift || j > shift + d {
            BigRat::zero()
        } else {
            p.coeff(d - (j - shift))
        }
    })
}
