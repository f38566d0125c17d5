//! Differential rings over ∂ = ∂/∂t₁ and the determinant, Wronskian and
//! operator machinery that runs generically over them.
//!
//! Two rings are provided: [`GradedPoly`] (truncated in weighted degree) and
//! [`Jet`] (truncated Taylor series in one variable x along a line
//! t = t* + x·e₁, so that ∂ = d/dx).

use num_complex::Complex64;

use crate::error::{Error, Result};
use crate::gradedpoly::GradedPoly;

pub trait DiffRing: Clone {
    fn zero_like(&self) -> Self;
    fn one_like(&self) -> Self;
    fn add(&self, o: &Self) -> Self;
    fn sub(&self, o: &Self) -> Self;
    fn mul(&self, o: &Self) -> Self;
    fn scale(&self, s: Complex64) -> Self;
    /// ∂/∂t₁.
    fn d(&self) -> Self;
    fn constant_term(&self) -> Complex64;
    fn try_invert(&self) -> Result<Self>;
    fn max_abs(&self) -> f64;

    fn d_n(&self, k: usize) -> Self {
        let mut r = self.clone();
        for _ in 0..k {
            r = r.d();
        }
        r
    }
}

impl DiffRing for GradedPoly {
    fn zero_like(&self) -> Self {
        GradedPoly::zero(self.num_times(), self.cutoff())
    }
    fn one_like(&self) -> Self {
        GradedPoly::one(self.num_times(), self.cutoff())
    }
    fn add(&self, o: &Self) -> Self {
        GradedPoly::add(self, o)
    }
    fn sub(&self, o: &Self) -> Self {
        GradedPoly::sub(self, o)
    }
    fn mul(&self, o: &Self) -> Self {
        GradedPoly::mul(self, o)
    }
    fn scale(&self, s: Complex64) -> Self {
        GradedPoly::scale(self, s)
    }
    fn d(&self) -> Self {
        self.derivative(1)
    }
    fn constant_term(&self) -> Complex64 {
        GradedPoly::constant_term(self)
    }
    fn try_invert(&self) -> Result<Self> {
        self.invert()
    }
    fn max_abs(&self) -> f64 {
        GradedPoly::max_abs(self)
    }
}

/// Truncated power series Σ_{k≤L} a_k x^k.
#[derive(Clone, Debug, PartialEq)]
pub struct Jet {
    pub coeffs: Vec<Complex64>,
}

impl Jet {
    pub fn new(coeffs: Vec<Complex64>) -> Jet {
        assert!(!coeffs.is_empty());
        Jet { coeffs }
    }

    pub fn order(&self) -> usize {
        self.coeffs.len() - 1
    }

    pub fn from_graded(p: &GradedPoly, base: &[Complex64], order: usize) -> Jet {
        Jet::new(p.restrict_line(base, order))
    }

    /// The first `len` coefficients; after k derivatives of an order-L jet
    /// only the first L + 1 − k are meaningful.
    pub fn head(&self, len: usize) -> Jet {
        Jet::new(self.coeffs.iter().take(len.max(1)).cloned().collect())
    }
}

impl DiffRing for Jet {
    fn zero_like(&self) -> Self {
        Jet::new(vec![Complex64::default(); self.coeffs.len()])
    }
    fn one_like(&self) -> Self {
        let mut j = self.zero_like();
        j.coeffs[0] = Complex64::new(1.0, 0.0);
        j
    }
    fn add(&self, o: &Self) -> Self {
        let l = self.coeffs.len().min(o.coeffs.len());
        Jet::new((0..l).map(|k| self.coeffs[k] + o.coeffs[k]).collect())
    }
    fn sub(&self, o: &Self) -> Self {
        let l = self.coeffs.len().min(o.coeffs.len());
        Jet::new((0..l).map(|k| self.coeffs[k] - o.coeffs[k]).collect())
    }
    fn mul(&self, o: &Self) -> Self {
        let l = self.coeffs.len().min(o.coeffs.len());
        let mut r = vec![Complex64::default(); l];
        for (i, a) in self.coeffs.iter().take(l).enumerate() {
            for (j, b) in o.coeffs.iter().take(l - i).enumerate() {
                r[i + j] += a * b;
            }
        }
        Jet::new(r)
    }
    fn scale(&self, s: Complex64) -> Self {
        Jet::new(self.coeffs.iter().map(|c| c * s).collect())
    }
    fn d(&self) -> Self {
        let l = self.coeffs.len();
        let mut r = vec![Complex64::default(); l];
        for k in 1..l {
            r[k - 1] = self.coeffs[k] * k as f64;
        }
        Jet::new(r)
    }
    fn constant_term(&self) -> Complex64 {
        self.coeffs[0]
    }
    fn try_invert(&self) -> Result<Self> {
        let a0 = self.coeffs[0];
        if a0.norm() == 0.0 {
            return Err(Error::DegenerateInput("jet inverse needs a nonzero value".into()));
        }
        let l = self.coeffs.len();
        let mut r = vec![Complex64::default(); l];
        r[0] = a0.inv();
        for k in 1..l {
            let mut s = Complex64::default();
            for j in 1..=k {
                s += self.coeffs[j] * r[k - j];
            }
            r[k] = -s * r[0];
        }
        Ok(Jet::new(r))
    }
    fn max_abs(&self) -> f64 {
        self.coeffs.iter().map(|c| c.norm()).fold(0.0, f64::max)
    }
}

/// Division-free determinant by dynamic programming over column subsets.
/// Cost n·2ⁿ ring multiplications; intended for n ≤ 16.
pub fn det_subsets<R: DiffRing>(m: &[Vec<R>]) -> R {
    let n = m.len();
    assert!(n > 0 && n <= 20, "subset determinant supports 1..=20 rows");
    let size = 1usize << n;
    let mut dp: Vec<Option<R>> = vec![None; size];
    dp[0] = Some(m[0][0].one_like());
    for mask in 0..size {
        let Some(cur) = dp[mask].take() else { continue };
        let row = mask.count_ones() as usize;
        if row == n {
            dp[mask] = Some(cur);
            continue;
        }
        for (j, entry) in m[row].iter().enumerate() {
            if mask & (1 << j) != 0 {
                continue;
            }
            // sign: number of already-used columns to the right of j
            let above = (mask >> (j + 1)).count_ones();
            let mut term = cur.mul(entry);
            if above % 2 == 1 {
                term = term.scale(Complex64::new(-1.0, 0.0));
            }
            let slot = &mut dp[mask | (1 << j)];
            *slot = Some(match slot.take() {
                Some(s) => s.add(&term),
                None => term,
            });
        }
    }
    dp[size - 1].take().unwrap()
}

/// Gaussian elimination pivoting on the largest constant term. Fails when the
/// constant-term matrix is singular.
pub fn det_pivoted<R: DiffRing>(m: &[Vec<R>]) -> Result<R> {
    let n = m.len();
    let mut a: Vec<Vec<R>> = m.to_vec();
    let mut acc = a[0][0].one_like();
    let scale = a
        .iter()
        .flat_map(|r| r.iter().map(|x| x.constant_term().norm()))
        .fold(0.0, f64::max)
        .max(1e-300);
    for k in 0..n {
        let (p, pv) = (k..n)
            .map(|i| (i, a[i][k].constant_term().norm()))
            .fold((k, -1.0), |best, x| if x.1 > best.1 { x } else { best });
        if pv <= 1e-12 * scale {
            return Err(Error::DegenerateInput(
                "constant part of the matrix is singular".into(),
            ));
        }
        if p != k {
            a.swap(p, k);
            acc = acc.scale(Complex64::new(-1.0, 0.0));
        }
        let piv_inv = a[k][k].try_invert()?;
        acc = acc.mul(&a[k][k]);
        for i in k + 1..n {
            let f = a[i][k].mul(&piv_inv);
            for j in k + 1..n {
                let upd = f.mul(&a[k][j]);
                a[i][j] = a[i][j].sub(&upd);
            }
        }
    }
    Ok(acc)
}

/// Determinant over a differential ring: elimination when the constant part
/// is invertible, otherwise the division-free expansion.
pub fn det<R: DiffRing>(m: &[Vec<R>]) -> Result<R> {
    match det_pivoted(m) {
        Ok(d) => Ok(d),
        Err(_) if m.len() <= 16 => Ok(det_subsets(m)),
        Err(e) => Err(e),
    }
}

/// Wr(f₁,…,f_m) = det[∂^{m−j} f_i]_{i,j}.
pub fn wronskian<R: DiffRing>(fs: &[R]) -> Result<R> {
    let m = fs.len();
    if m == 0 {
        return Err(Error::DegenerateInput("empty Wronskian".into()));
    }
    let rows: Vec<Vec<R>> = fs.iter().map(|f| derivative_row(f, m)).collect();
    det(&rows)
}

/// [∂^{m−1} f, …, ∂f, f].
fn derivative_row<R: DiffRing>(f: &R, m: usize) -> Vec<R> {
    let mut ds = Vec::with_capacity(m);
    let mut cur = f.clone();
    ds.push(cur.clone());
    for _ in 1..m {
        cur = cur.d();
        ds.push(cur.clone());
    }
    ds.reverse();
    ds
}

/// Σ_k a_k ∂^k.
#[derive(Clone, Debug)]
pub struct DiffOperator<R> {
    pub coeffs: Vec<R>,
}

impl<R: DiffRing> DiffOperator<R> {
    pub fn order(&self) -> usize {
        self.coeffs.len() - 1
    }

    pub fn apply(&self, u: &R) -> R {
        let mut acc = u.zero_like();
        let mut du = u.clone();
        for (k, a) in self.coeffs.iter().enumerate() {
            if k > 0 {
                du = du.d();
            }
            acc = acc.add(&a.mul(&du));
        }
        acc
    }
}

/// The monic operator u ↦ Wr(u, g₁…g_m)/Wr(g₁…g_m), whose kernel is spanned
/// by the g_i.
pub fn monic_from_kernel<R: DiffRing>(gs: &[R]) -> Result<DiffOperator<R>> {
    let m = gs.len();
    let rows: Vec<Vec<R>> = gs.iter().map(|g| derivative_row(g, m + 1)).collect();
    // column j of the (m+1)-wide matrix carries ∂^{m−j}
    let minor = |skip: usize| -> Result<R> {
        let sub: Vec<Vec<R>> = rows
            .iter()
            .map(|r| {
                r.iter()
                    .enumerate()
                    .filter(|(j, _)| *j != skip)
                    .map(|(_, x)| x.clone())
                    .collect()
            })
            .collect();
        det(&sub)
    };
    let w = minor(0)?;
    let w_inv = w.try_invert()?;
    let mut coeffs = vec![w.zero_like(); m + 1];
    for j in 0..=m {
        let mut cof = if j == 0 { w.clone() } else { minor(j)? };
        if j % 2 == 1 {
            cof = cof.scale(Complex64::new(-1.0, 0.0));
        }
        coeffs[m - j] = cof.mul(&w_inv);
    }
    Ok(DiffOperator { coeffs })
}

/// Factors T_j = ∂ log(Wr(g₁…g_{j−1}) / Wr(g₁…g_j)) of
/// (∂+T_m)…(∂+T₁), which annihilates every g_i.
pub fn factor_potentials<R: DiffRing>(gs: &[R]) -> Result<Vec<R>> {
    let mut ws = Vec::with_capacity(gs.len() + 1);
    ws.push(gs[0].one_like());
    for j in 1..=gs.len() {
        ws.push(wronskian(&gs[..j])?);
    }
    let mut ts = Vec::with_capacity(gs.len());
    for j in 1..=gs.len() {
        let a = ws[j - 1].d().mul(&ws[j - 1].try_invert()?);
        let b = ws[j].d().mul(&ws[j].try_invert()?);
        ts.push(a.sub(&b));
    }
    Ok(ts)
}

/// (∂+T_m)…(∂+T₁) u, with T₁ applied first.
pub fn apply_factored<R: DiffRing>(ts: &[R], u: &R) -> R {
    let mut cur = u.clone();
    for t in ts {
        cur = cur.d().add(&t.mul(&cur));
    }
    cur
}
