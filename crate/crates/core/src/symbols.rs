//! Gelfand-Dickey symbols 𝒲(t;z) = exp(ξ(t,Λ))𝒲(z), the built-in families,
//! the Ξ map and the big-cell test.

use std::f64::consts::PI;

use num_complex::Complex64;

use crate::error::{Error, Result};
use crate::gradedpoly::{schur_values, GradedPoly, SchurSequence};
use crate::laurent::{lm_mul, LaurentMatrix};
use crate::linalg::{self, CMat, ONE, ZERO};

/// Schur tail magnitude accepted at the edge of a requested band.
pub const SCHUR_TAIL_TOL: f64 = 1e-14;
/// Depth of 𝒲 coefficient tables for families with infinitely many modes.
pub const DEFAULT_W_DEPTH: usize = 64;

/// Times t₁..t_K. With `gd_reduced`, entries whose index is a multiple of n
/// are forced to zero.
#[derive(Clone, Debug, PartialEq)]
pub struct TimeVector {
    values: Vec<Complex64>,
    gd_reduced: bool,
    n: usize,
}

impl TimeVector {
    pub fn new(values: &[Complex64], n: usize, gd_reduced: bool) -> TimeVector {
        let mut v = values.to_vec();
        if gd_reduced {
            for (i, x) in v.iter_mut().enumerate() {
                if (i + 1) % n == 0 {
                    *x = ZERO;
                }
            }
        }
        TimeVector {
            values: v,
            gd_reduced,
            n,
        }
    }

    pub fn real(values: &[f64], n: usize, gd_reduced: bool) -> TimeVector {
        let v: Vec<Complex64> = values.iter().map(|x| Complex64::new(*x, 0.0)).collect();
        TimeVector::new(&v, n, gd_reduced)
    }

    pub fn zero(k: usize, n: usize) -> TimeVector {
        TimeVector::new(&vec![ZERO; k], n, true)
    }

    pub fn values(&self) -> &[Complex64] {
        &self.values
    }

    pub fn len(&self) -> usize {
        self.values.len()
    }

    pub fn is_empty(&self) -> bool {
        self.values.is_empty()
    }

    pub fn gd_reduced(&self) -> bool {
        self.gd_reduced
    }

    pub fn neg(&self) -> TimeVector {
        TimeVector {
            values: self.values.iter().map(|x| -x).collect(),
            gd_reduced: self.gd_reduced,
            n: self.n,
        }
    }

    /// ξ(t, ζ) = Σ t_i ζ^i.
    pub fn xi(&self, zeta: Complex64) -> Complex64 {
        let mut acc = ZERO;
        let mut p = ONE;
        for t in &self.values {
            p *= zeta;
            acc += t * p;
        }
        acc
    }
}

/// Λ with Λ[0][n−1] = z and ones on the subdiagonal, as a band-[0,1] series.
pub fn lambda_matrix(n: usize) -> LaurentMatrix {
    lambda_power(n, 1)
}

/// Λ^k by index bookkeeping: column c maps to row (c+k) mod n carrying
/// z^{⌊(c+k)/n⌋}. Negative k gives the inverse powers.
pub fn lambda_power(n: usize, k: i64) -> LaurentMatrix {
    assert!(n >= 1);
    let n_i = n as i64;
    let mut entries = Vec::with_capacity(n);
    for c in 0..n_i {
        let s = (c + k).div_euclid(n_i);
        let r = (c + k).rem_euclid(n_i);
        entries.push((r as usize, c as usize, s));
    }
    let lo = entries.iter().map(|e| e.2).min().unwrap().min(0);
    let hi = entries.iter().map(|e| e.2).max().unwrap().max(0);
    let mut m = LaurentMatrix::zeros(n, lo, hi);
    for (r, c, s) in entries {
        m.block_mut(s)[(r, c)] = ONE;
    }
    m
}

/// Σ_k p_k(t)Λ^k as a series on modes [0, hi]: entry (r,c) of mode s is
/// p_{sn+r−c}(t).
pub fn exp_xi_lambda(t: &TimeVector, n: usize, hi: i64) -> Result<LaurentMatrix> {
    assert!(hi >= 0);
    let kmax = n * (hi as usize + 2) + n;
    let p = schur_values(t.values(), kmax);
    let tail = ((n * hi as usize + 1)..=kmax)
        .map(|k| p[k].norm())
        .fold(0.0, f64::max);
    if tail >= SCHUR_TAIL_TOL {
        return Err(Error::Truncation(format!(
            "Schur tail {tail:.3e} beyond mode {hi}; widen the band"
        )));
    }
    let mut m = LaurentMatrix::zeros(n, 0, hi);
    for s in 0..=hi {
        let b = m.block_mut(s);
        for r in 0..n {
            for c in 0..n {
                let idx = s * n as i64 + r as i64 - c as i64;
                if idx >= 0 {
                    b[(r, c)] = p[idx as usize];
                }
            }
        }
    }
    Ok(m)
}

/// exp(ξ(t,Λ(z))) at a point, via Λ = V⁻¹ diag(ζ_i) V with ζ_i the n-th roots
/// of z in the fixed order ζ₁·e^{2πi(i−1)/n}.
pub fn exp_xi_eval(t: &TimeVector, n: usize, z: Complex64) -> CMat {
    if n == 1 {
        return CMat::from_element(1, 1, t.xi(z).exp());
    }
    let roots = nth_roots(z, n);
    let v = vandermonde(&roots);
    let vinv = linalg::inverse(&v).expect("distinct roots of a nonzero z");
    let d = CMat::from_diagonal(&nalgebra::DVector::from_iterator(
        n,
        roots.iter().map(|r| t.xi(*r).exp()),
    ));
    vinv * d * v
}

/// ζ₁·e^{2πi(i−1)/n} with ζ₁ the principal n-th root.
pub fn nth_roots(z: Complex64, n: usize) -> Vec<Complex64> {
    let z1 = (z.ln() / n as f64).exp();
    (0..n)
        .map(|i| z1 * Complex64::from_polar(1.0, 2.0 * PI * i as f64 / n as f64))
        .collect()
}

/// Rows (1, ζ_i, …, ζ_i^{n−1}).
pub fn vandermonde(roots: &[Complex64]) -> CMat {
    let n = roots.len();
    CMat::from_fn(n, n, |i, k| roots[i].powu(k as u32))
}

/// Symbol family of a [`SymbolSpec`].
#[derive(Clone, Debug, PartialEq)]
pub enum Family {
    /// 𝒲(z) = diag(1 − c_i² z⁻¹).
    Rational { c: Vec<Complex64> },
    /// 𝒲(z) = diag(w₁..w_n) built from the roots of a symmetric n-covering.
    Covering { a: Vec<Complex64>, k: usize },
    /// Band-limited 𝒲(z) given by its coefficients.
    Custom { w: LaurentMatrix },
}

/// Declarative description of 𝒲(z) with its analyticity margin ρ (every
/// singularity lies in |z| ≤ ρ < 1).
#[derive(Clone, Debug, PartialEq)]
pub struct SymbolSpec {
    n: usize,
    family: Family,
    rho: f64,
}

pub fn rational_spec(c: &[Complex64]) -> Result<SymbolSpec> {
    if c.is_empty() {
        return Err(Error::Spec("rational family needs at least one parameter".into()));
    }
    if let Some(bad) = c.iter().find(|x| x.norm() >= 1.0) {
        return Err(Error::Analyticity(format!("|c| = {} is not below 1", bad.norm())));
    }
    let rho = c.iter().map(|x| x.norm_sqr()).fold(0.0, f64::max);
    Ok(SymbolSpec {
        n: c.len(),
        family: Family::Rational { c: c.to_vec() },
        rho,
    })
}

pub fn covering_spec(a: &[Complex64], n: usize) -> Result<SymbolSpec> {
    if n < 1 || a.is_empty() || a.len() % n != 1 % n {
        return Err(Error::Spec(format!(
            "covering of order {n} needs nk+1 roots, got {}",
            a.len()
        )));
    }
    if let Some(bad) = a.iter().find(|x| x.norm() >= 1.0) {
        return Err(Error::Analyticity(format!("|a| = {} is not below 1", bad.norm())));
    }
    for i in 0..a.len() {
        for j in i + 1..a.len() {
            if (a[i] - a[j]).norm() < 1e-12 {
                return Err(Error::Spec(format!("roots {i} and {j} coincide")));
            }
        }
    }
    let k = (a.len() - 1) / n;
    let rho = a.iter().map(|x| x.norm()).fold(0.0, f64::max);
    Ok(SymbolSpec {
        n,
        family: Family::Covering { a: a.to_vec(), k },
        rho,
    })
}

pub fn custom_spec(w: LaurentMatrix, rho: f64) -> Result<SymbolSpec> {
    if !(0.0..1.0).contains(&rho) {
        return Err(Error::Analyticity(format!("margin {rho} must lie in [0, 1)")));
    }
    if w.lo() > 0 {
        return Err(Error::Spec("custom symbol band must reach mode 0".into()));
    }
    if w.max_abs_in(1, w.hi()) > 0.0 {
        return Err(Error::Spec("custom symbol must have no positive modes".into()));
    }
    let w0 = w.block(0);
    let n = w.n();
    for r in 0..n {
        if (w0[(r, r)] - ONE).norm() > 1e-12 {
            return Err(Error::Spec(format!("mode-0 diagonal entry {r} is not 1")));
        }
        for c in r + 1..n {
            if w0[(r, c)].norm() > 1e-12 {
                return Err(Error::Spec(format!(
                    "mode-0 block is not lower triangular at ({r}, {c})"
                )));
            }
        }
    }
    let w = w.rebanded(w.lo(), 0);
    Ok(SymbolSpec {
        n,
        family: Family::Custom { w },
        rho,
    })
}

/// Coefficients of Π_j (1 − a_j u)^{α_j} in u = z⁻¹ up to u^B.
fn binomial_product(factors: &[(Complex64, Complex64)], b: usize) -> Vec<Complex64> {
    let mut acc = vec![ZERO; b + 1];
    acc[0] = ONE;
    for (a, alpha) in factors {
        // (1 − a u)^α = Σ_m binom(α, m) (−a)^m u^m
        let mut s = vec![ZERO; b + 1];
        let mut coef = ONE;
        for (m, slot) in s.iter_mut().enumerate() {
            if m > 0 {
                coef *= (alpha - (m - 1) as f64) / m as f64 * (-a);
            }
            *slot = coef;
        }
        let mut next = vec![ZERO; b + 1];
        for i in 0..=b {
            if acc[i] == ZERO {
                continue;
            }
            for j in 0..=(b - i) {
                next[i + j] += acc[i] * s[j];
            }
        }
        acc = next;
    }
    acc
}

impl SymbolSpec {
    pub fn n(&self) -> usize {
        self.n
    }

    pub fn rho(&self) -> f64 {
        self.rho
    }

    pub fn family(&self) -> &Family {
        &self.family
    }

    pub fn family_name(&self) -> &'static str {
        match self.family {
            Family::Rational { .. } => "rational",
            Family::Covering { .. } => "covering",
            Family::Custom { .. } => "custom",
        }
    }

    /// True when 𝒲(z) has finitely many modes.
    pub fn is_band_limited(&self) -> bool {
        !matches!(self.family, Family::Covering { .. })
    }

    /// Factor list (a, α) for w_i of the covering family, i one-based.
    fn covering_factors(a: &[Complex64], n: usize, k: usize, i: usize) -> Vec<(Complex64, Complex64)> {
        let alpha = Complex64::new((i - 1) as f64 / n as f64, 0.0);
        let mut f: Vec<(Complex64, Complex64)> = a.iter().map(|aj| (*aj, alpha)).collect();
        for aj in a.iter().take((i - 1) * k) {
            f.push((*aj, -ONE));
        }
        f
    }

    /// 𝒲(z) coefficients on modes [−depth, 0]; a band-limited family uses its
    /// own band when that is narrower.
    pub fn w_coeffs(&self, depth: usize) -> LaurentMatrix {
        match &self.family {
            Family::Rational { c } => {
                let mut m = LaurentMatrix::zeros(self.n, -1, 0);
                for (i, ci) in c.iter().enumerate() {
                    m.block_mut(0)[(i, i)] = ONE;
                    m.block_mut(-1)[(i, i)] = -ci * ci;
                }
                m
            }
            Family::Covering { a, k } => {
                let mut m = LaurentMatrix::zeros(self.n, -(depth as i64), 0);
                for i in 1..=self.n {
                    let s = binomial_product(&Self::covering_factors(a, self.n, *k, i), depth);
                    for (mm, v) in s.iter().enumerate() {
                        m.block_mut(-(mm as i64))[(i - 1, i - 1)] = *v;
                    }
                }
                m
            }
            Family::Custom { w } => w.clone(),
        }
    }

    /// Depth at which ρ^depth drops below 1e−16, at least [`DEFAULT_W_DEPTH`]
    /// and at most 1024.
    pub fn default_depth(&self) -> usize {
        if self.rho <= 0.0 {
            return DEFAULT_W_DEPTH;
        }
        let d = (-16.0 * std::f64::consts::LN_10 / self.rho.ln()).ceil();
        (d as usize).clamp(DEFAULT_W_DEPTH, 1024)
    }

    /// Lowest mode a coefficient table of depth `depth` can populate.
    pub fn w_lo(&self, depth: usize) -> i64 {
        self.w_coeffs(depth).lo()
    }

    /// 𝒲(z) in closed form at |z| > ρ.
    pub fn w_eval(&self, z: Complex64) -> CMat {
        match &self.family {
            Family::Rational { c } => CMat::from_diagonal(&nalgebra::DVector::from_iterator(
                self.n,
                c.iter().map(|ci| ONE - ci * ci / z),
            )),
            Family::Covering { a, k } => CMat::from_diagonal(&nalgebra::DVector::from_iterator(
                self.n,
                (1..=self.n).map(|i| {
                    Self::covering_factors(a, self.n, *k, i)
                        .iter()
                        .map(|(aj, al)| (al * (ONE - aj / z).ln()).exp())
                        .product::<Complex64>()
                }),
            )),
            Family::Custom { w } => w.eval(z),
        }
    }

    /// 𝒲(t;z) = exp(ξ(t,Λ))𝒲(z) evaluated in closed form.
    pub fn gd_eval(&self, t: &TimeVector, z: Complex64) -> CMat {
        exp_xi_eval(t, self.n, z) * self.w_eval(z)
    }

    /// 𝒲(t;z)⁻¹ = 𝒲(z)⁻¹ exp(−ξ(t,Λ)) evaluated in closed form.
    pub fn gd_inv_eval(&self, t: &TimeVector, z: Complex64) -> Option<CMat> {
        let wi = linalg::inverse(&self.w_eval(z))?;
        Some(wi * exp_xi_eval(&t.neg(), self.n, z))
    }
}

/// exp(ξ(t,Λ))·𝒲(z) on modes [lo_W, hi], with 𝒲 taken to depth `depth`.
pub fn gd_symbol(spec: &SymbolSpec, t: &TimeVector, depth: usize, hi: i64) -> Result<LaurentMatrix> {
    let e = exp_xi_lambda(t, spec.n(), hi)?;
    let w = spec.w_coeffs(depth);
    Ok(lm_mul(&e, &w, w.lo(), hi))
}

/// exp(ξ(t,Λ)) on the narrowest band [0, hi] (hi doubling from 8) whose
/// Schur tail is below [`SCHUR_TAIL_TOL`].
pub fn exp_xi_auto(t: &TimeVector, n: usize) -> Result<LaurentMatrix> {
    let mut hi = 8;
    loop {
        match exp_xi_lambda(t, n, hi) {
            Err(Error::Truncation(_)) if hi < 1024 => hi *= 2,
            r => return r,
        }
    }
}

/// [`gd_symbol`] with the positive band chosen by [`exp_xi_auto`].
pub fn gd_symbol_auto(spec: &SymbolSpec, t: &TimeVector, depth: usize) -> Result<LaurentMatrix> {
    let e = exp_xi_auto(t, spec.n())?;
    let w = spec.w_coeffs(depth);
    Ok(lm_mul(&e, &w, w.lo(), e.hi()))
}

/// Symbol whose z-coefficient blocks are graded polynomials in the times.
#[derive(Clone, Debug)]
pub struct GradedSymbol {
    pub n: usize,
    pub lo: i64,
    pub hi: i64,
    /// `blocks[s - lo][r][c]` is entry (r, c) of mode s.
    pub blocks: Vec<Vec<Vec<GradedPoly>>>,
}

impl GradedSymbol {
    pub fn entry(&self, s: i64, r: usize, c: usize) -> Option<&GradedPoly> {
        if s < self.lo || s > self.hi {
            None
        } else {
            Some(&self.blocks[(s - self.lo) as usize][r][c])
        }
    }

    /// Numeric symbol at a point t (evaluating every graded coefficient).
    pub fn evaluate(&self, t: &[Complex64]) -> LaurentMatrix {
        let blocks = self
            .blocks
            .iter()
            .map(|b| CMat::from_fn(self.n, self.n, |r, c| b[r][c].evaluate(t)))
            .collect();
        LaurentMatrix::from_blocks(self.lo, blocks)
    }
}

/// Graded variant of [`gd_symbol`] on modes [lo, hi]: mode s of
/// exp(ξ(t,Λ))𝒲(z) is Σ_a E^{(a)}(t)𝒲^{(s−a)} with E^{(a)}_{rq} = p_{an+r−q}(t).
pub fn gd_symbol_graded(
    spec: &SymbolSpec,
    schur: &SchurSequence,
    lo: i64,
    hi: i64,
) -> GradedSymbol {
    let n = spec.n();
    let k = schur.get(0).num_times();
    let q = schur.get(0).cutoff();
    let a_max = (q + n) / n;
    let depth = (-lo).max(0) as usize + a_max + 1;
    let w = spec.w_coeffs(depth);
    let mut blocks = Vec::with_capacity((hi - lo + 1) as usize);
    for s in lo..=hi {
        let mut b = vec![vec![GradedPoly::zero(k, q); n]; n];
        for a in 0..=(a_max as i64) {
            let Some(wb) = w.get(s - a) else { continue };
            for r in 0..n {
                for qq in 0..n {
                    let idx = a * n as i64 + r as i64 - qq as i64;
                    let p = schur.get(idx);
                    if p.is_empty() {
                        continue;
                    }
                    for c in 0..n {
                        let wv = wb[(qq, c)];
                        if wv != ZERO {
                            b[r][c] = b[r][c].add(&p.scale(wv));
                        }
                    }
                }
            }
        }
        blocks.push(b);
    }
    GradedSymbol { n, lo, hi, blocks }
}

/// Ξ(f)(z) = f₀(zⁿ) + z f₁(zⁿ) + … + z^{n−1} f_{n−1}(zⁿ) for scalar series f_i.
pub fn xi_map(f: &[LaurentMatrix]) -> LaurentMatrix {
    let n = f.len() as i64;
    assert!(n >= 1 && f.iter().all(|x| x.n() == 1));
    let lo = f.iter().enumerate().map(|(i, x)| n * x.lo() + i as i64).min().unwrap();
    let hi = f.iter().enumerate().map(|(i, x)| n * x.hi() + i as i64).max().unwrap();
    let mut g = LaurentMatrix::zeros(1, lo.min(0), hi.max(0));
    for (i, x) in f.iter().enumerate() {
        for k in x.lo()..=x.hi() {
            g.block_mut(n * k + i as i64)[(0, 0)] += x.entry(k, 0, 0);
        }
    }
    g
}

/// Inverse of [`xi_map`]: f_i^{(k)} = g^{(nk+i)}.
pub fn xi_inverse(g: &LaurentMatrix, n: usize) -> Vec<LaurentMatrix> {
    assert_eq!(g.n(), 1);
    let n_i = n as i64;
    (0..n_i)
        .map(|i| {
            let lo = (g.lo() - i).div_euclid(n_i);
            let hi = (g.hi() - i).div_euclid(n_i);
            let mut f = LaurentMatrix::zeros(1, lo.min(0), hi.max(0));
            for k in lo..=hi {
                f.block_mut(k)[(0, 0)] = g.entry(n_i * k + i, 0, 0);
            }
            f
        })
        .collect()
}

/// Ξ-image of column j of a matrix symbol: Σ_i z^i 𝒲_{ij}(zⁿ).
pub fn xi_column(w: &LaurentMatrix, j: usize) -> LaurentMatrix {
    let comps: Vec<LaurentMatrix> = (0..w.n())
        .map(|i| {
            let blocks = (w.lo()..=w.hi())
                .map(|k| CMat::from_element(1, 1, w.entry(k, i, j)))
                .collect();
            LaurentMatrix::from_blocks(w.lo(), blocks)
        })
        .collect();
    xi_map(&comps)
}

/// One failed big-cell condition.
#[derive(Clone, Debug, PartialEq)]
pub struct BigCellViolation {
    pub row: usize,
    pub col: usize,
    pub mode: i64,
    pub magnitude: f64,
    pub rule: &'static str,
}

#[derive(Clone, Debug, PartialEq)]
pub struct BigCellReport {
    pub violations: Vec<BigCellViolation>,
}

impl BigCellReport {
    pub fn passed(&self) -> bool {
        self.violations.is_empty()
    }
}

/// Checks w_ii = 1 + O(1/z), w_ij = O(1/z) above the diagonal and w_ij = O(1)
/// below it (mode-0 block unit lower triangular, no positive modes).
pub fn big_cell_check(w: &LaurentMatrix) -> BigCellReport {
    let tol = 1e-12;
    let mut violations = Vec::new();
    for r in 0..w.n() {
        for c in 0..w.n() {
            for k in 1..=w.hi() {
                let v = w.entry(k, r, c).norm();
                if v > tol {
                    violations.push(BigCellViolation {
                        row: r,
                        col: c,
                        mode: k,
                        magnitude: v,
                        rule: "positive mode",
                    });
                }
            }
            let v0 = w.entry(0, r, c);
            if r == c && (v0 - ONE).norm() > tol {
                violations.push(BigCellViolation {
                    row: r,
                    col: c,
                    mode: 0,
                    magnitude: (v0 - ONE).norm(),
                    rule: "diagonal constant term must be 1",
                });
            }
            if r < c && v0.norm() > tol {
                violations.push(BigCellViolation {
                    row: r,
                    col: c,
                    mode: 0,
                    magnitude: v0.norm(),
                    rule: "upper entry must vanish at infinity",
                });
            }
        }
    }
    BigCellReport { violations }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::laurent::{inverse_transform, transform};
    use crate::linalg::c;

    #[test]
    fn lambda_for_two() {
        let l = lambda_matrix(2);
        assert_eq!(l.band(), (0, 1));
        assert_eq!(l.entry(1, 0, 1), ONE);
        assert_eq!(l.entry(0, 1, 0), ONE);
        assert_eq!(l.entry(0, 0, 0), ZERO);
        assert_eq!(l.entry(1, 1, 0), ZERO);
    }

    #[test]
    fn lambda_n_is_z() {
        for n in 1..5 {
            let p = lambda_power(n, n as i64);
            assert_eq!(p.band(), (0, 1));
            assert!(linalg::max_abs_diff(&p.block(1), &linalg::identity(n)) == 0.0);
            assert!(linalg::max_abs(&p.block(0)) == 0.0);
            let p0 = lambda_power(n, 0);
            assert!(linalg::max_abs_diff(&p0.block(0), &linalg::identity(n)) == 0.0);
        }
    }

    #[test]
    fn lambda_inverse_power() {
        let n = 3;
        let p = lambda_power(n, 2);
        let q = lambda_power(n, -2);
        let prod = lm_mul(&p, &q, -2, 2);
        assert!(linalg::max_abs_diff(&prod.block(0), &linalg::identity(n)) < 1e-15);
        assert!(prod.max_abs_in(-2, -1) == 0.0 && prod.max_abs_in(1, 2) == 0.0);
    }

    #[test]
    fn exp_xi_at_zero_and_scalar() {
        let e = exp_xi_lambda(&TimeVector::zero(5, 2), 2, 8).unwrap();
        assert!(linalg::max_abs_diff(&e.block(0), &linalg::identity(2)) == 0.0);
        assert!(e.max_abs_in(1, 8) == 0.0);
        let t = TimeVector::real(&[0.4, 0.1], 1, false);
        let e = exp_xi_lambda(&t, 1, 30).unwrap();
        let p = schur_values(t.values(), 30);
        for k in 0..=30 {
            assert!((e.entry(k, 0, 0) - p[k as usize]).norm() < 1e-16);
        }
    }

    #[test]
    fn exp_xi_matches_cosh_closed_form() {
        let t = TimeVector::real(&[0.5, 0.3, 0.1], 2, true);
        let e = exp_xi_lambda(&t, 2, 40).unwrap();
        let z = c(0.3, 0.7);
        let direct = e.eval(z);
        let sq = z.sqrt();
        let arg = sq * (t.values()[0] + t.values()[2] * z);
        assert!((direct[(0, 0)] - arg.cosh()).norm() < 1e-13);
        assert!((direct[(0, 1)] - sq * arg.sinh()).norm() < 1e-13);
        assert!((direct[(1, 0)] - arg.sinh() / sq).norm() < 1e-13);
        let closed = exp_xi_eval(&t, 2, z);
        assert!(linalg::max_abs_diff(&direct, &closed) < 1e-13);
    }

    #[test]
    fn schur_tail_guard() {
        let t = TimeVector::real(&[30.0], 1, false);
        assert!(matches!(exp_xi_lambda(&t, 1, 4), Err(Error::Truncation(_))));
    }

    #[test]
    fn rational_gd_symbol_modes() {
        let spec = rational_spec(&[c(0.3, 0.0), c(0.6, 0.0)]).unwrap();
        let w = spec.w_coeffs(8);
        assert_eq!(w.band(), (-1, 0));
        assert!(big_cell_check(&w).passed());
        let t0 = gd_symbol(&spec, &TimeVector::zero(5, 2), 8, 10).unwrap();
        assert!(linalg::max_abs_diff(&t0.block(-1), &w.block(-1)) == 0.0);
        let t = TimeVector::real(&[0.5, 0.0, 0.1], 2, true);
        let g = gd_symbol(&spec, &t, 8, 40).unwrap();
        assert_eq!(g.lo(), -1);
    }

    #[test]
    fn spec_validation() {
        assert!(matches!(rational_spec(&[c(1.2, 0.0)]), Err(Error::Analyticity(_))));
        assert!(matches!(covering_spec(&[c(0.1, 0.0), c(0.2, 0.0)], 2), Err(Error::Spec(_))));
        assert!(matches!(
            covering_spec(&[c(0.1, 0.0), c(0.2, 0.0), c(1.5, 0.0)], 2),
            Err(Error::Analyticity(_))
        ));
    }

    #[test]
    fn covering_k0_is_square_root() {
        let a = 0.4;
        let spec = covering_spec(&[c(a, 0.0)], 2).unwrap();
        let w = spec.w_coeffs(20);
        assert!((w.entry(0, 0, 0) - ONE).norm() == 0.0 && w.max_abs_in(-20, -1) > 0.0);
        assert!(w.entry(-1, 0, 0).norm() == 0.0);
        // binomial series of (1 − a/z)^{1/2}
        assert!((w.entry(-1, 1, 1) - c(-0.5 * a, 0.0)).norm() < 1e-15);
        assert!((w.entry(-2, 1, 1) - c(-0.125 * a * a, 0.0)).norm() < 1e-15);
        let z = c(0.2, -0.9);
        let closed = spec.w_eval(z)[(1, 1)];
        assert!((closed - (ONE - a / z).sqrt()).norm() < 1e-14);
        assert!((w.eval(z)[(1, 1)] - closed).norm() < 1e-6);
    }

    #[test]
    fn covering_big_cell_and_closed_form() {
        let spec = covering_spec(&[c(0.5, 0.0), c(-0.3, 0.2), c(0.1, -0.4)], 2).unwrap();
        let w = spec.w_coeffs(80);
        assert!(big_cell_check(&w).passed());
        let z = Complex64::from_polar(1.0, 0.7);
        assert!(linalg::max_abs_diff(&w.eval(z), &spec.w_eval(z)) < 1e-14);
    }

    #[test]
    fn big_cell_negative_control() {
        let mut w = LaurentMatrix::zeros(2, -1, 1);
        w.block_mut(1)[(0, 0)] = ONE;
        w.block_mut(-1)[(1, 1)] = ONE;
        let rep = big_cell_check(&w);
        assert!(!rep.passed());
        assert!(rep.violations.iter().any(|v| v.rule == "positive mode" && v.row == 0));
        assert!(big_cell_check(&LaurentMatrix::identity(3)).passed());
    }

    #[test]
    fn xi_examples() {
        let one = LaurentMatrix::scalar(0, &[ONE]);
        let zero = LaurentMatrix::scalar(0, &[ZERO]);
        assert_eq!(xi_map(&[one.clone(), zero.clone()]).entry(0, 0, 0), ONE);
        let z = LaurentMatrix::scalar(1, &[ONE]);
        let g = xi_map(&[zero, z]);
        assert_eq!(g.entry(3, 0, 0), ONE);
        assert_eq!(g.total_energy(), 1.0);
    }

    #[test]
    fn gd_symbol_matches_closed_form_on_circle() {
        let spec = covering_spec(&[c(0.5, 0.0), c(-0.3, 0.2), c(0.1, -0.4)], 2).unwrap();
        let t = TimeVector::real(&[0.7, 0.0, -0.4, 0.0, 0.2], 2, true);
        let g = gd_symbol(&spec, &t, 64, 64).unwrap();
        let x = inverse_transform(&g, 512).unwrap();
        for j in [0, 17, 100, 511] {
            let z = x.point(j);
            assert!(linalg::max_abs_diff(x.value(j), &spec.gd_eval(&t, z)) < 1e-12);
        }
        let back = transform(&x, -64, 64).unwrap();
        assert!(linalg::max_abs_diff(&back.block(-3), &g.block(-3)) < 1e-14);
    }
}
