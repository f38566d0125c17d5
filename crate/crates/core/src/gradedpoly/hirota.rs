use num_complex::Complex64;

use super::{GradedPoly, Monomial};

/// (D₁⁴ − 4D₁D₃)τ·τ expanded as
/// 2(ττ₁₁₁₁ − 4τ₁τ₁₁₁ + 3τ₁₁² − 4ττ₁₃ + 4τ₁τ₃), kept to degree Q − 4 where
/// every term is exact.
pub fn hirota_kdv_residual(tau: &GradedPoly) -> GradedPoly {
    assert!(tau.num_times() >= 3, "the KdV residual needs t₁ and t₃");
    let q = tau.cutoff();
    let budget = q.saturating_sub(4);
    let t1 = tau.derivative(1);
    let t11 = t1.derivative(1);
    let t111 = t11.derivative(1);
    let t1111 = t111.derivative(1);
    let t3 = tau.derivative(3);
    let t13 = t3.derivative(1);
    let r = |x: f64| Complex64::new(x, 0.0);
    let res = tau
        .mul(&t1111)
        .sub(&t1.mul(&t111).scale(r(4.0)))
        .add(&t11.mul(&t11).scale(r(3.0)))
        .sub(&tau.mul(&t13).scale(r(4.0)))
        .add(&t1.mul(&t3).scale(r(4.0)))
        .scale(r(2.0));
    if q < 4 {
        return GradedPoly::zero(tau.num_times(), 0);
    }
    res.truncate(budget)
}

/// Coefficients of z⁰, z⁻¹, …, z^{−orders} in τ(t − [z⁻¹]), i.e. after
/// t_i ↦ t_i − z^{−i}/i for every active time. The z^{−r} coefficient is exact
/// through degree Q − r.
pub fn sato_shift(tau: &GradedPoly, orders: usize) -> Vec<GradedPoly> {
    let k = tau.num_times();
    let q = tau.cutoff();
    let mut out: Vec<Vec<(Monomial, Complex64)>> = vec![Vec::new(); orders + 1];
    for (m, c) in tau.terms() {
        // expand Π_i (t_i − u^i/i)^{e_i} as a list of (u-power, monomial, coeff)
        let mut partial: Vec<(usize, Vec<u32>, Complex64)> = vec![(0, m.exponents(k), *c)];
        for i in 1..=k {
            let e = m.exp(i);
            if e == 0 {
                continue;
            }
            let mut next = Vec::new();
            for (upow, exps, coef) in &partial {
                let mut binom = 1.0f64;
                for a in 0..=e {
                    if a > 0 {
                        binom *= (e - a + 1) as f64 / a as f64;
                    }
                    let up = upow + i * a as usize;
                    if up > orders {
                        break;
                    }
                    let mut ex = exps.clone();
                    ex[i - 1] = e - a;
                    let f = binom * (-1.0 / i as f64).powi(a as i32);
                    next.push((up, ex, coef * f));
                }
            }
            partial = next;
        }
        for (up, ex, coef) in partial {
            out[up].push((Monomial::from_exponents(&ex), coef));
        }
    }
    out.into_iter()
        .map(|terms| GradedPoly::from_terms(k, q, terms))
        .collect()
}
