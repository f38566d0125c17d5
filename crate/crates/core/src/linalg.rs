//! Thin helpers over nalgebra's dense complex matrices.

use nalgebra::DMatrix;
use num_complex::Complex64;

pub type CMat = DMatrix<Complex64>;

pub const ZERO: Complex64 = Complex64::new(0.0, 0.0);
pub const ONE: Complex64 = Complex64::new(1.0, 0.0);

pub fn c(re: f64, im: f64) -> Complex64 {
    Complex64::new(re, im)
}

pub fn identity(n: usize) -> CMat {
    CMat::identity(n, n)
}

pub fn zeros(n: usize) -> CMat {
    CMat::zeros(n, n)
}

/// Determinant by partially pivoted LU. Exactly singular input gives 0.
pub fn det(m: &CMat) -> Complex64 {
    if m.nrows() == 0 {
        return ONE;
    }
    m.clone().lu().determinant()
}

/// Log-determinant accumulated from the LU diagonal, with the branch of each
/// factor's principal logarithm. Returns `None` when a pivot vanishes.
pub fn log_det(m: &CMat) -> Option<Complex64> {
    let lu = m.clone().lu();
    let u = lu.u();
    let mut acc = ZERO;
    for i in 0..u.nrows() {
        let d = u[(i, i)];
        if d == ZERO {
            return None;
        }
        acc += d.ln();
    }
    let parity: f64 = lu.p().determinant();
    if parity < 0.0 {
        acc += Complex64::new(0.0, std::f64::consts::PI);
    }
    Some(acc)
}

pub fn inverse(m: &CMat) -> Option<CMat> {
    m.clone().try_inverse()
}

/// 2-norm condition number from singular values; infinite when singular.
pub fn cond2(m: &CMat) -> f64 {
    let sv = m.clone().singular_values();
    let mx = sv.iter().cloned().fold(0.0, f64::max);
    let mn = sv.iter().cloned().fold(f64::INFINITY, f64::min);
    if mn == 0.0 {
        f64::INFINITY
    } else {
        mx / mn
    }
}

pub fn max_abs(m: &CMat) -> f64 {
    m.iter().map(|z| z.norm()).fold(0.0, f64::max)
}

pub fn frob2(m: &CMat) -> f64 {
    m.iter().map(|z| z.norm_sqr()).sum()
}

pub fn max_abs_diff(a: &CMat, b: &CMat) -> f64 {
    a.iter()
        .zip(b.iter())
        .map(|(x, y)| (x - y).norm())
        .fold(0.0, f64::max)
}
