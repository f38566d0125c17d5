//! Truncated graded polynomials in the times t₁..t_K, with weight(t_i) = i.

mod hirota;
mod schur;

pub use hirota::{hirota_kdv_residual, sato_shift};
pub use schur::{
    character, jacobi_trudi, jacobi_trudi_with, miwa_times, partitions_up_to, schur_sequence, schur_values,
    Partition, SchurSequence,
};

use std::collections::BTreeMap;
use std::fmt;

use num_complex::Complex64;

use crate::error::{Error, Result};

/// Largest number of times a monomial can carry.
pub const MAX_TIMES: usize = 16;

/// Relative threshold below which coefficients are dropped.
pub const PRUNE_REL: f64 = 1e-14;

/// Default coefficientwise tolerance for comparisons.
pub const DEFAULT_EQ_TOL: f64 = 1e-10;

/// Exponent vector packed one byte per time: byte `i` holds the power of t_{i+1}.
#[derive(Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Default)]
pub struct Monomial(u128);

impl Monomial {
    pub const ONE: Monomial = Monomial(0);

    pub fn from_exponents(e: &[u32]) -> Monomial {
        assert!(e.len() <= MAX_TIMES, "at most {MAX_TIMES} times");
        let mut packed = 0u128;
        for (i, &x) in e.iter().enumerate() {
            assert!(x < 256, "exponent overflow");
            packed |= (x as u128) << (8 * i);
        }
        Monomial(packed)
    }

    /// t_i as a monomial, `i` one-based.
    pub fn var(i: usize) -> Monomial {
        assert!((1..=MAX_TIMES).contains(&i));
        Monomial(1u128 << (8 * (i - 1)))
    }

    /// Exponent of t_i, `i` one-based.
    pub fn exp(&self, i: usize) -> u32 {
        ((self.0 >> (8 * (i - 1))) & 0xff) as u32
    }

    pub fn exponents(&self, k: usize) -> Vec<u32> {
        (1..=k).map(|i| self.exp(i)).collect()
    }

    pub fn weight(&self) -> usize {
        let mut w = 0;
        let mut v = self.0;
        let mut i = 1;
        while v != 0 {
            w += i * (v & 0xff) as usize;
            v >>= 8;
            i += 1;
        }
        w
    }

    fn times(self, o: Monomial) -> Monomial {
        Monomial(self.0 + o.0)
    }

    fn lower(self, i: usize) -> Monomial {
        Monomial(self.0 - (1u128 << (8 * (i - 1))))
    }

    fn highest_time(&self) -> usize {
        if self.0 == 0 {
            0
        } else {
            (128 - self.0.leading_zeros() as usize).div_ceil(8)
        }
    }
}

impl fmt::Debug for Monomial {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let k = self.highest_time();
        let e: Vec<String> = (1..=k).map(|i| self.exp(i).to_string()).collect();
        write!(f, "[{}]", e.join(":"))
    }
}

/// Polynomial in t₁..t_K truncated at weighted degree `cutoff`.
#[derive(Clone, PartialEq)]
pub struct GradedPoly {
    num_times: usize,
    cutoff: usize,
    terms: BTreeMap<Monomial, Complex64>,
}

impl fmt::Debug for GradedPoly {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "GradedPoly(K={}, Q={}) {{", self.num_times, self.cutoff)?;
        for (m, c) in &self.terms {
            write!(f, " {:?}:{}", m, c)?;
        }
        write!(f, " }}")
    }
}

impl GradedPoly {
    pub fn zero(num_times: usize, cutoff: usize) -> Self {
        assert!(num_times <= MAX_TIMES, "at most {MAX_TIMES} times");
        GradedPoly {
            num_times,
            cutoff,
            terms: BTreeMap::new(),
        }
    }

    pub fn constant(num_times: usize, cutoff: usize, c: Complex64) -> Self {
        let mut p = Self::zero(num_times, cutoff);
        if c != Complex64::new(0.0, 0.0) {
            p.terms.insert(Monomial::ONE, c);
        }
        p
    }

    pub fn one(num_times: usize, cutoff: usize) -> Self {
        Self::constant(num_times, cutoff, Complex64::new(1.0, 0.0))
    }

    /// The time t_i (one-based); zero if its weight exceeds the cutoff.
    pub fn var(num_times: usize, cutoff: usize, i: usize) -> Self {
        assert!(i >= 1 && i <= num_times, "time index out of range");
        let mut p = Self::zero(num_times, cutoff);
        if i <= cutoff {
            p.terms.insert(Monomial::var(i), Complex64::new(1.0, 0.0));
        }
        p
    }

    pub fn from_terms<I>(num_times: usize, cutoff: usize, terms: I) -> Self
    where
        I: IntoIterator<Item = (Monomial, Complex64)>,
    {
        let mut p = Self::zero(num_times, cutoff);
        for (m, c) in terms {
            assert!(m.highest_time() <= num_times, "monomial uses inactive time");
            if m.weight() <= cutoff {
                *p.terms.entry(m).or_insert(Complex64::new(0.0, 0.0)) += c;
            }
        }
        p.canonicalize();
        p
    }

    pub fn num_times(&self) -> usize {
        self.num_times
    }

    pub fn cutoff(&self) -> usize {
        self.cutoff
    }

    pub fn terms(&self) -> impl Iterator<Item = (&Monomial, &Complex64)> {
        self.terms.iter()
    }

    pub fn len(&self) -> usize {
        self.terms.len()
    }

    pub fn is_empty(&self) -> bool {
        self.terms.is_empty()
    }

    pub fn coeff(&self, m: &Monomial) -> Complex64 {
        self.terms.get(m).copied().unwrap_or_default()
    }

    pub fn constant_term(&self) -> Complex64 {
        self.coeff(&Monomial::ONE)
    }

    pub fn max_abs(&self) -> f64 {
        self.terms.values().map(|c| c.norm()).fold(0.0, f64::max)
    }

    /// Largest weighted degree carrying a stored term.
    pub fn degree(&self) -> Option<usize> {
        self.terms.keys().map(|m| m.weight()).max()
    }

    fn canonicalize(&mut self) {
        let cutoff = self.cutoff;
        self.terms.retain(|m, c| m.weight() <= cutoff && *c != Complex64::new(0.0, 0.0));
        let mx = self.max_abs();
        if mx > 0.0 {
            let floor = PRUNE_REL * mx;
            self.terms.retain(|_, c| c.norm() >= floor);
        }
    }

    fn check_compatible(&self, o: &GradedPoly) {
        assert_eq!(self.num_times, o.num_times, "mismatched number of times");
    }

    /// Sum; the cutoff of a mixed-cutoff result is the smaller one.
    pub fn add(&self, o: &GradedPoly) -> GradedPoly {
        self.check_compatible(o);
        let mut r = self.clone();
        r.cutoff = self.cutoff.min(o.cutoff);
        for (m, c) in &o.terms {
            *r.terms.entry(*m).or_default() += c;
        }
        r.canonicalize();
        r
    }

    pub fn sub(&self, o: &GradedPoly) -> GradedPoly {
        self.add(&o.scale(Complex64::new(-1.0, 0.0)))
    }

    pub fn scale(&self, s: Complex64) -> GradedPoly {
        let mut r = self.clone();
        for c in r.terms.values_mut() {
            *c *= s;
        }
        r.canonicalize();
        r
    }

    pub fn mul(&self, o: &GradedPoly) -> GradedPoly {
        self.check_compatible(o);
        let cutoff = self.cutoff.min(o.cutoff);
        let a: Vec<(Monomial, usize, Complex64)> =
            self.terms.iter().map(|(m, c)| (*m, m.weight(), *c)).collect();
        let mut b: Vec<(Monomial, usize, Complex64)> =
            o.terms.iter().map(|(m, c)| (*m, m.weight(), *c)).collect();
        b.sort_by_key(|x| x.1);
        let mut terms: BTreeMap<Monomial, Complex64> = BTreeMap::new();
        for (ma, wa, ca) in &a {
            if *wa > cutoff {
                continue;
            }
            for (mb, wb, cb) in &b {
                if wa + wb > cutoff {
                    break;
                }
                *terms.entry(ma.times(*mb)).or_default() += ca * cb;
            }
        }
        let mut r = GradedPoly {
            num_times: self.num_times,
            cutoff,
            terms,
        };
        r.canonicalize();
        r
    }

    /// ∂/∂t_i. Terms of weight w lose i units of weight, so the result is
    /// exact only through weighted degree Q − i.
    pub fn derivative(&self, i: usize) -> GradedPoly {
        assert!(i >= 1, "times are one-based");
        let mut r = GradedPoly::zero(self.num_times, self.cutoff);
        if i > self.num_times {
            return r;
        }
        for (m, c) in &self.terms {
            let e = m.exp(i);
            if e > 0 {
                r.terms.insert(m.lower(i), c * e as f64);
            }
        }
        r.canonicalize();
        r
    }

    /// Graded inverse mod degree Q: a = a₀(1 + u) gives a⁻¹ = a₀⁻¹ Σ (−u)^k.
    pub fn invert(&self) -> Result<GradedPoly> {
        let a0 = self.constant_term();
        if a0.norm() == 0.0 {
            return Err(Error::DegenerateInput(
                "graded inverse needs a nonzero constant term".into(),
            ));
        }
        let inv0 = a0.inv();
        let mut u = self.scale(-inv0);
        u.terms.remove(&Monomial::ONE);
        let one = GradedPoly::one(self.num_times, self.cutoff);
        let mut acc = one.clone();
        let mut power = one;
        for _ in 0..self.cutoff {
            power = power.mul(&u);
            if power.is_empty() {
                break;
            }
            acc = acc.add(&power);
        }
        Ok(acc.scale(inv0))
    }

    /// exp of the series; the constant term contributes a scalar factor.
    pub fn exp(&self) -> GradedPoly {
        let a0 = self.constant_term();
        let mut u = self.clone();
        u.terms.remove(&Monomial::ONE);
        let mut acc = GradedPoly::one(self.num_times, self.cutoff);
        let mut power = acc.clone();
        for k in 1..=self.cutoff {
            power = power.mul(&u).scale(Complex64::new(1.0 / k as f64, 0.0));
            if power.is_empty() {
                break;
            }
            acc = acc.add(&power);
        }
        acc.scale(a0.exp())
    }

    /// Drops terms above weighted degree `q` and lowers the cutoff to `q`.
    pub fn truncate(&self, q: usize) -> GradedPoly {
        let mut r = self.clone();
        r.cutoff = r.cutoff.min(q);
        r.canonicalize();
        r
    }

    /// Returns a copy with a larger cutoff. The stored terms are kept as they
    /// are, so this is only meaningful for data known exactly to the new degree.
    pub fn with_cutoff(&self, q: usize) -> GradedPoly {
        let mut r = self.clone();
        r.cutoff = q;
        r.canonicalize();
        r
    }

    /// Sets the configured times to zero (t_i ↦ 0 when `frozen(i)`).
    pub fn freeze(&self, frozen: impl Fn(usize) -> bool) -> GradedPoly {
        let mut r = self.clone();
        r.terms
            .retain(|m, _| (1..=self.num_times).all(|i| !frozen(i) || m.exp(i) == 0));
        r
    }

    /// Homogeneous component of weighted degree `d`.
    pub fn homogeneous(&self, d: usize) -> GradedPoly {
        let mut r = self.clone();
        r.terms.retain(|m, _| m.weight() == d);
        r
    }

    pub fn evaluate(&self, t: &[Complex64]) -> Complex64 {
        let mut acc = Complex64::new(0.0, 0.0);
        for (m, c) in &self.terms {
            let mut v = *c;
            for i in 1..=self.num_times {
                let e = m.exp(i);
                if e > 0 {
                    let ti = t.get(i - 1).copied().unwrap_or_default();
                    v *= ti.powu(e);
                }
            }
            acc += v;
        }
        acc
    }

    /// Restriction to the line t = base + x·e₁ as coefficients of 1, x, x², ….
    pub fn restrict_line(&self, base: &[Complex64], order: usize) -> Vec<Complex64> {
        let mut out = vec![Complex64::new(0.0, 0.0); order + 1];
        for (m, c) in &self.terms {
            let mut rest = *c;
            for i in 2..=self.num_times {
                let e = m.exp(i);
                if e > 0 {
                    rest *= base.get(i - 1).copied().unwrap_or_default().powu(e);
                }
            }
            let e1 = m.exp(1) as usize;
            let b1 = base.first().copied().unwrap_or_default();
            // (b1 + x)^{e1}
            let mut binom = 1.0f64;
            for a in 0..=e1.min(order) {
                if a > 0 {
                    binom *= (e1 - a + 1) as f64 / a as f64;
                }
                out[a] += rest * binom * b1.powu((e1 - a) as u32);
            }
        }
        out
    }

    /// Largest coefficientwise difference.
    pub fn max_diff(&self, o: &GradedPoly) -> f64 {
        let mut d: f64 = 0.0;
        for (m, c) in &self.terms {
            d = d.max((c - o.coeff(m)).norm());
        }
        for (m, c) in &o.terms {
            if !self.terms.contains_key(m) {
                d = d.max(c.norm());
            }
        }
        d
    }

    pub fn approx_eq(&self, o: &GradedPoly, tol: f64) -> bool {
        self.max_diff(o) <= tol
    }

    /// Dump as CSV rows `multi-index,re,im` with `:`-separated exponents.
    pub fn to_csv(&self) -> String {
        let mut s = String::from("multi_index,re,im\n");
        for (m, c) in &self.terms {
            let e: Vec<String> = m
                .exponents(self.num_times)
                .iter()
                .map(|x| x.to_string())
                .collect();
            s.push_str(&format!(
                "{},{},{}\n",
                e.join(":"),
                crate::report::fmt_f64(c.re),
                crate::report::fmt_f64(c.im)
            ));
        }
        s
    }
}

/// Ring operation selector for [`gp_arith`].
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum ArithOp {
    Add,
    Mul,
    /// ∂/∂t_i, one-based.
    Derivative(usize),
    Invert,
}

/// Dispatches a ring operation. Binary operations need `b`.
pub fn gp_arith(a: &GradedPoly, b: Option<&GradedPoly>, op: ArithOp) -> Result<GradedPoly> {
    let need_b = || {
        b.ok_or_else(|| Error::DegenerateInput("binary operation needs a second operand".into()))
    };
    match op {
        ArithOp::Add => {
            let b = need_b()?;
            if a.num_times != b.num_times {
                return Err(Error::DegenerateInput("mismatched number of times".into()));
            }
            Ok(a.add(b))
        }
        ArithOp::Mul => {
            let b = need_b()?;
            if a.num_times != b.num_times {
                return Err(Error::DegenerateInput("mismatched number of times".into()));
            }
            Ok(a.mul(b))
        }
        ArithOp::Derivative(i) => Ok(a.derivative(i)),
        ArithOp::Invert => a.invert(),
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn c(x: f64) -> Complex64 {
        Complex64::new(x, 0.0)
    }

    #[test]
    fn difference_of_squares() {
        let one = GradedPoly::one(2, 2);
        let t1 = GradedPoly::var(2, 2, 1);
        let p = one.add(&t1).mul(&one.sub(&t1));
        let expect = one.sub(&t1.mul(&t1));
        assert!(p.approx_eq(&expect, 1e-15));
    }

    #[test]
    fn geometric_inverse() {
        let one = GradedPoly::one(1, 2);
        let t1 = GradedPoly::var(1, 2, 1);
        let inv = gp_arith(&one.add(&t1), None, ArithOp::Invert).unwrap();
        let expect = one.sub(&t1).add(&t1.mul(&t1));
        assert!(inv.approx_eq(&expect, 1e-15));
    }

    #[test]
    fn derivative_of_p2_like() {
        let t1 = GradedPoly::var(2, 4, 1);
        let t2 = GradedPoly::var(2, 4, 2);
        let p = t1.mul(&t1).scale(c(0.5)).add(&t2);
        assert!(p.derivative(1).approx_eq(&t1, 1e-15));
        assert!(p.derivative(2).approx_eq(&GradedPoly::one(2, 4), 1e-15));
    }

    #[test]
    fn invert_zero_constant_fails() {
        let t1 = GradedPoly::var(1, 3, 1);
        assert!(matches!(t1.invert(), Err(Error::DegenerateInput(_))));
    }

    #[test]
    fn truncation_discards_heavy_terms() {
        let t2 = GradedPoly::var(3, 3, 2);
        assert!(t2.mul(&t2).is_empty());
        assert_eq!(GradedPoly::var(3, 1, 2).len(), 0);
    }

    #[test]
    fn monomial_weight_and_packing() {
        let m = Monomial::from_exponents(&[2, 0, 1]);
        assert_eq!(m.weight(), 5);
        assert_eq!(m.exp(3), 1);
        assert_eq!(format!("{:?}", m), "[2:0:1]");
    }

    #[test]
    fn line_restriction_of_product() {
        // t1^2 t2 at base (1, 2): (1+x)^2 * 2
        let p = GradedPoly::from_terms(2, 6, [(Monomial::from_exponents(&[2, 1]), c(1.0))]);
        let l = p.restrict_line(&[c(1.0), c(2.0)], 4);
        let expect = [2.0, 4.0, 2.0, 0.0, 0.0];
        for (a, b) in l.iter().zip(expect) {
            assert!((a - c(b)).norm() < 1e-15);
        }
    }

    #[test]
    fn exp_of_linear_form() {
        let t1 = GradedPoly::var(1, 5, 1);
        let e = t1.scale(c(2.0)).exp();
        for k in 0..=5u32 {
            let m = Monomial::from_exponents(&[k]);
            let expect = 2f64.powi(k as i32) / (1..=k).product::<u32>().max(1) as f64;
            assert!((e.coeff(&m) - c(expect)).norm() < 1e-14);
        }
    }
}
