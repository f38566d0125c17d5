//! Burchnall-Chaundy spectral matrices.
//!
//! A branch b(ζ) = ζ^m(1 + Σ l_j ζ^{−j}) of an algebraic curve p(λ, z) = 0
//! with z = ζⁿ gives B(z) = b(Λ), and C(z) = 𝒲⁻¹B𝒲 is polynomial exactly
//! when b(z) preserves the point W. Going back, the eigenvectors of C(z)
//! recover 𝒲 up to the right action of constant upper-triangular matrices.

use std::f64::consts::PI;

use num_complex::Complex64;

use crate::error::{Error, Result};
use crate::laurent::{inverse_transform, lm_mul, point, transform, CircleSamples, LaurentMatrix};
use crate::linalg::{self, CMat, ONE, ZERO};
use crate::symbols::{big_cell_check, lambda_power, nth_roots, vandermonde, BigCellReport, SymbolSpec};

/// Relative size below which a polynomial coefficient counts as zero.
pub const COEFF_TOL: f64 = 1e-9;
/// Relative negative-band energy accepted as polynomial.
pub const POLY_TOL: f64 = 1e-9;
pub const DEFAULT_BRANCH_TERMS: usize = 128;
pub const DEFAULT_BAND: usize = 64;

/// p(λ, z) = λⁿ + c₁(z)λ^{n−1} + … + c_n(z), each c_s by ascending powers of z.
#[derive(Clone, Debug, PartialEq)]
pub struct CharPoly {
    n: usize,
    coeffs: Vec<Vec<Complex64>>,
}

fn poly_mul(a: &[Complex64], b: &[Complex64]) -> Vec<Complex64> {
    if a.is_empty() || b.is_empty() {
        return Vec::new();
    }
    let mut r = vec![ZERO; a.len() + b.len() - 1];
    for (i, x) in a.iter().enumerate() {
        for (j, y) in b.iter().enumerate() {
            r[i + j] += x * y;
        }
    }
    r
}

fn poly_eval(p: &[Complex64], z: Complex64) -> Complex64 {
    p.iter().rev().fold(ZERO, |acc, c| acc * z + c)
}

/// Π (z − a_j).
pub fn poly_from_roots(a: &[Complex64]) -> Vec<Complex64> {
    a.iter().fold(vec![ONE], |p, aj| poly_mul(&p, &[-aj, ONE]))
}

fn matrix_trace(m: &LaurentMatrix) -> Vec<Complex64> {
    (m.lo()..=m.hi()).map(|k| m.block(k).trace()).collect()
}

impl CharPoly {
    pub fn new(n: usize, coeffs: Vec<Vec<Complex64>>) -> Result<CharPoly> {
        if n == 0 || coeffs.len() != n {
            return Err(Error::Spec(format!(
                "a degree-{n} polynomial in λ needs {n} coefficient functions, got {}",
                coeffs.len()
            )));
        }
        Ok(CharPoly { n, coeffs })
    }

    /// λⁿ − P(z).
    pub fn curve(n: usize, p: &[Complex64]) -> Result<CharPoly> {
        let mut coeffs = vec![Vec::new(); n];
        coeffs[n - 1] = p.iter().map(|v| -v).collect();
        CharPoly::new(n, coeffs)
    }

    /// λⁿ − Π(z − a_j), the curve of a covering symbol.
    pub fn covering(a: &[Complex64], n: usize) -> Result<CharPoly> {
        CharPoly::curve(n, &poly_from_roots(a))
    }

    /// det(λ − C(z)) by Faddeev-LeVerrier over polynomial matrices. Modes of C
    /// below 0 are ignored.
    pub fn from_matrix(c: &LaurentMatrix) -> Result<CharPoly> {
        let n = c.n();
        let deg = c.hi().max(0);
        let c = c.rebanded(0, deg);
        let mut m = LaurentMatrix::identity(n);
        let mut coeffs = Vec::with_capacity(n);
        for k in 1..=n {
            let cm = lm_mul(&c, &m, 0, c.hi() + m.hi());
            let ck: Vec<Complex64> = matrix_trace(&cm).iter().map(|v| -v / k as f64).collect();
            let mut shift = LaurentMatrix::zeros(n, 0, (ck.len() as i64 - 1).max(0));
            for (s, v) in ck.iter().enumerate() {
                for i in 0..n {
                    shift.block_mut(s as i64)[(i, i)] = *v;
                }
            }
            m = cm.add(&shift);
            coeffs.push(ck);
        }
        CharPoly::new(n, coeffs)
    }

    pub fn n(&self) -> usize {
        self.n
    }

    /// c_s for s in 1..=n.
    pub fn coeff(&self, s: usize) -> &[Complex64] {
        &self.coeffs[s - 1]
    }

    /// deg c_s with coefficients below [`COEFF_TOL`] of the largest one
    /// treated as zero; `None` for c_s ≡ 0.
    pub fn degree(&self, s: usize) -> Option<usize> {
        let scale = self
            .coeffs
            .iter()
            .flatten()
            .map(|v| v.norm())
            .fold(0.0, f64::max)
            .max(1.0);
        self.coeffs[s - 1].iter().rposition(|v| v.norm() > COEFF_TOL * scale)
    }

    pub fn eval(&self, lambda: Complex64, z: Complex64) -> Complex64 {
        self.coeffs
            .iter()
            .fold(ONE, |acc, cs| acc * lambda + poly_eval(cs, z))
    }

    /// Largest coefficient difference, padding the shorter side with zeros.
    pub fn max_diff(&self, o: &CharPoly) -> f64 {
        assert_eq!(self.n, o.n);
        let mut worst: f64 = 0.0;
        for (a, b) in self.coeffs.iter().zip(&o.coeffs) {
            for k in 0..a.len().max(b.len()) {
                let x = a.get(k).copied().unwrap_or(ZERO);
                let y = b.get(k).copied().unwrap_or(ZERO);
                worst = worst.max((x - y).norm());
            }
        }
        worst
    }

    /// m = deg c_n after checking n·deg c_s < m·s for s < n, gcd(n, m) = 1
    /// and a monic leading term −z^m.
    pub fn order(&self) -> Result<usize> {
        let n = self.n;
        let m = self
            .degree(n)
            .ok_or_else(|| Error::Spec("c_n vanishes identically".into()))?;
        if gcd(n, m) != 1 {
            return Err(Error::Spec(format!("n = {n} and m = deg c_n = {m} are not coprime")));
        }
        for s in 1..n {
            if let Some(d) = self.degree(s) {
                if n * d >= m * s {
                    return Err(Error::Spec(format!(
                        "degree bound fails for c_{s}: n·deg = {} ≥ m·s = {}",
                        n * d,
                        m * s
                    )));
                }
            }
        }
        let lead = self.coeffs[n - 1][m];
        if (lead + ONE).norm() > 1e-10 {
            return Err(Error::Spec(format!(
                "leading coefficient of c_n is {lead}, expected −1"
            )));
        }
        Ok(m)
    }
}

fn gcd(a: usize, b: usize) -> usize {
    if b == 0 {
        a
    } else {
        gcd(b, a % b)
    }
}

/// b(ζ) = ζ^m(1 + Σ_{j=1}^{J} l_j ζ^{−j}).
#[derive(Clone, Debug, PartialEq)]
pub struct BranchSeries {
    n: usize,
    m: usize,
    l: Vec<Complex64>,
    traceless: bool,
    curve: CharPoly,
}

/// Truncated power series product in x, keeping J + 1 terms.
fn series_mul(a: &[Complex64], b: &[Complex64], len: usize) -> Vec<Complex64> {
    let mut r = vec![ZERO; len];
    for (i, x) in a.iter().enumerate().take(len) {
        if *x == ZERO {
            continue;
        }
        for (j, y) in b.iter().enumerate().take(len - i) {
            r[i + j] += x * y;
        }
    }
    r
}

/// Solves p(b(ζ), ζⁿ) = 0 for b(ζ) = ζ^m u(1/ζ), u(0) = 1, one power of 1/ζ
/// at a time. With x = 1/ζ the equation reads uⁿ + Σ_s a_s(x)u^{n−s} = 0
/// where a_s(x) = Σ_k c_{s,k} x^{ms−nk}.
pub fn branch_series(cp: &CharPoly, terms: usize, traceless: bool) -> Result<BranchSeries> {
    let n = cp.n();
    let m = cp.order()?;
    let len = terms + 1;
    let a: Vec<Vec<Complex64>> = (1..=n)
        .map(|s| {
            let mut series = vec![ZERO; len];
            for (k, v) in cp.coeff(s).iter().enumerate() {
                if m * s >= n * k && m * s - n * k < len {
                    series[m * s - n * k] += v;
                }
            }
            series
        })
        .collect();
    // F_u(1, 0) = n + Σ_{s<n} (n − s) a_s(0); the degree bounds make a_s(0) = 0.
    let slope = (1..n).fold(Complex64::new(n as f64, 0.0), |acc, s| {
        acc + a[s - 1][0] * (n - s) as f64
    });
    if slope.norm() < 1e-14 {
        return Err(Error::Branch("vanishing derivative at the leading term".into()));
    }
    let mut u = vec![ZERO; len];
    u[0] = ONE;
    for j in 1..len {
        // Horner in u with series coefficients; only order j matters.
        let mut f = vec![ZERO; j + 1];
        f[0] = ONE;
        for s in 1..=n {
            f = series_mul(&f, &u, j + 1);
            for (k, v) in a[s - 1].iter().enumerate().take(j + 1) {
                f[k] += v;
            }
        }
        u[j] = -f[j] / slope;
    }
    if (u[0] - ONE).norm() > 0.0 {
        return Err(Error::Branch("leading coefficient drifted".into()));
    }
    Ok(BranchSeries {
        n,
        m,
        l: u[1..].to_vec(),
        traceless,
        curve: cp.clone(),
    })
}

impl BranchSeries {
    pub fn n(&self) -> usize {
        self.n
    }

    pub fn m(&self) -> usize {
        self.m
    }

    pub fn terms(&self) -> usize {
        self.l.len()
    }

    pub fn traceless(&self) -> bool {
        self.traceless
    }

    pub fn curve(&self) -> &CharPoly {
        &self.curve
    }

    /// l_1..l_J of the full root of p.
    pub fn coefficients(&self) -> &[Complex64] {
        &self.l
    }

    fn removed(&self, j: usize) -> bool {
        self.traceless && j <= self.m && (self.m - j) % self.n == 0
    }

    /// Coefficients of b by mode: (mode m − j, l_j) with l_0 = 1, skipping the
    /// modes ≡ 0 mod n at or above 0 under the trace-free reduction.
    pub fn modes(&self) -> Vec<(i64, Complex64)> {
        std::iter::once(ONE)
            .chain(self.l.iter().copied())
            .enumerate()
            .filter(|(j, _)| !self.removed(*j))
            .map(|(j, v)| (self.m as i64 - j as i64, v))
            .collect()
    }

    /// q(z) with b_full(ζ) = b(ζ) + q(ζⁿ): the part removed by the reduction.
    pub fn removed_poly(&self) -> Vec<Complex64> {
        let mut q = vec![ZERO; self.m / self.n + 1];
        for j in 1..=self.l.len().min(self.m) {
            if self.removed(j) {
                q[(self.m - j) / self.n] += self.l[j - 1];
            }
        }
        q
    }

    pub fn eval(&self, zeta: Complex64) -> Complex64 {
        self.modes().iter().map(|(k, v)| v * zeta.powi(*k as i32)).sum()
    }

    /// The root of p itself, ignoring the reduction.
    pub fn eval_root(&self, zeta: Complex64) -> Complex64 {
        let x = zeta.inv();
        let u = self.l.iter().rev().fold(ZERO, |acc, v| (acc + v) * x) + ONE;
        zeta.powu(self.m as u32) * u
    }

    /// max |p(b(ζ), ζⁿ)|/|ζ|^{mn} over `count` points of |ζ| = radius.
    pub fn residual(&self, radius: f64, count: usize) -> f64 {
        (0..count)
            .map(|j| {
                let zeta = Complex64::from_polar(radius, 2.0 * PI * (j as f64 + 0.5) / count as f64);
                let z = zeta.powu(self.n as u32);
                self.curve.eval(self.eval_root(zeta), z).norm()
                    / radius.powi((self.m * self.n) as i32)
            })
            .fold(0.0, f64::max)
    }

    /// B(z) = b(Λ) = Σ_j l_j Λ^{m−j}.
    pub fn b_matrix(&self) -> LaurentMatrix {
        self.modes()
            .iter()
            .fold(LaurentMatrix::zeros(self.n, 0, 0), |acc, (k, v)| {
                acc.add(&lambda_power(self.n, *k).scale(*v))
            })
    }
}

/// The spectral matrices of a point together with Prop. C style checks.
#[derive(Clone, Debug)]
pub struct BcMatrices {
    pub b: LaurentMatrix,
    /// C(z) on modes [0, deg C].
    pub c: LaurentMatrix,
    /// Relative energy of C on its negative modes.
    pub negative_energy: f64,
    pub trace_max: f64,
    /// det(λ − C(z) − q(z)) against p(λ, z) at sample points, relative.
    pub charpoly_residual: f64,
    /// deg C_ij, `None` for a vanishing entry.
    pub degrees: Vec<Vec<Option<usize>>>,
    /// max_i (i − j + n·deg C_ij) for each column j.
    pub column_orders: Vec<Option<i64>>,
    pub m: usize,
}

impl BcMatrices {
    pub fn is_polynomial(&self) -> bool {
        self.negative_energy <= POLY_TOL
    }

    pub fn degree_pattern_holds(&self) -> bool {
        self.column_orders
            .iter()
            .all(|o| o.map_or(true, |v| v == self.m as i64))
    }
}

fn sample_count(band: usize) -> usize {
    (4 * (2 * band + 1)).next_power_of_two()
}

fn degree_of(c: &LaurentMatrix, r: usize, col: usize, scale: f64) -> Option<usize> {
    (0..=c.hi().max(0))
        .rev()
        .find(|k| c.entry(*k, r, col).norm() > COEFF_TOL * scale)
        .map(|k| k as usize)
}

/// B = b(Λ) and C = 𝒲⁻¹B𝒲 from samples of 𝒲 on the unit circle, with C
/// resolved on modes [−band, band].
pub fn bc_matrices(spec: &SymbolSpec, bs: &BranchSeries, band: usize) -> Result<BcMatrices> {
    let n = spec.n();
    if bs.n() != n {
        return Err(Error::Spec(format!(
            "branch series of degree {} for an n = {n} symbol",
            bs.n()
        )));
    }
    let b = bs.b_matrix();
    let m_s = sample_count(band).max((b.hi() - b.lo() + 1) as usize).next_power_of_two();
    let bz = inverse_transform(&b, m_s)?;
    let mut values = Vec::with_capacity(m_s);
    for j in 0..m_s {
        let w = spec.w_eval(point(j, m_s));
        let w_inv = linalg::inverse(&w)
            .ok_or(Error::NearSingularSymbol { index: j, cond: f64::INFINITY })?;
        values.push(&w_inv * bz.value(j) * &w);
    }
    let cz = CircleSamples::new(values)?;
    let h = band as i64;
    let full = transform(&cz, -h, h)?;
    let total = full.total_energy();
    let negative_energy = if total == 0.0 {
        0.0
    } else {
        full.band_energy(-h, -1) / total
    };
    let scale = full.max_abs_in(0, h).max(f64::MIN_POSITIVE);
    let deg = (0..n)
        .flat_map(|r| (0..n).map(move |c| (r, c)))
        .filter_map(|(r, c)| degree_of(&full, r, c, scale))
        .max()
        .unwrap_or(0);
    let c = full.rebanded(0, deg as i64);
    let trace_max = cz.values().iter().map(|v| v.trace().norm()).fold(0.0, f64::max);

    let degrees: Vec<Vec<Option<usize>>> = (0..n)
        .map(|r| (0..n).map(|col| degree_of(&c, r, col, scale)).collect())
        .collect();
    let column_orders = (0..n)
        .map(|col| {
            (0..n)
                .filter_map(|r| degrees[r][col].map(|d| r as i64 - col as i64 + (n * d) as i64))
                .max()
        })
        .collect();

    let q = bs.removed_poly();
    let mut worst: f64 = 0.0;
    let lambdas = [
        Complex64::new(0.7, 0.0),
        Complex64::new(-0.4, 1.1),
        Complex64::new(0.0, -1.3),
    ];
    for j in (0..m_s).step_by((m_s / 16).max(1)) {
        let z = point(j, m_s);
        let shifted = cz.value(j) + CMat::identity(n, n) * poly_eval(&q, z);
        for lam in lambdas {
            let lhs = linalg::det(&(CMat::identity(n, n) * lam - &shifted));
            let rhs = bs.curve().eval(lam, z);
            worst = worst.max((lhs - rhs).norm() / rhs.norm().max(1.0));
        }
    }

    Ok(BcMatrices {
        b,
        c,
        negative_energy,
        trace_max,
        charpoly_residual: worst,
        degrees,
        column_orders,
        m: bs.m(),
    })
}

/// 𝒲 recovered from C(z), in big-cell form.
#[derive(Clone, Debug)]
pub struct Reconstruction {
    pub w: LaurentMatrix,
    /// Constant upper-triangular U with 𝒲 = 𝒲_raw U⁻¹.
    pub u: CMat,
    pub branches: BranchSeries,
    /// max ‖𝒲⁻¹B𝒲 − U C U⁻¹‖ over samples.
    pub conj_residual: f64,
    /// Coefficient change of 𝒲 when the grid is doubled.
    pub grid_residual: f64,
    /// Relative energy of 𝒲 on positive modes before truncation.
    pub positive_energy: f64,
    pub big_cell: BigCellReport,
}

/// Eigenvalues of C(z) matched to the branch values b(ζ_i), nearest first.
/// Returns the left eigenvectors as rows, each scaled to first entry 1.
fn left_eigenrows(cz: &CMat, bvals: &[Complex64], index: usize) -> Result<CMat> {
    let n = cz.nrows();
    let mu: Vec<Complex64> = match cz.clone().schur().eigenvalues() {
        Some(v) => v.iter().copied().collect(),
        None => {
            return Err(Error::BranchMatch(format!("no eigenvalues at sample {index}")));
        }
    };
    let scale = bvals.iter().map(|v| v.norm()).fold(1.0, f64::max);
    let mut gap = f64::INFINITY;
    for i in 0..n {
        for k in 0..i {
            gap = gap.min((bvals[i] - bvals[k]).norm());
        }
    }
    if gap < 1e-8 * scale {
        return Err(Error::BranchMatch(format!(
            "branches collide at sample {index} (gap {gap:.3e})"
        )));
    }
    let mut used = vec![false; n];
    let mut rows = CMat::zeros(n, n);
    for (i, bi) in bvals.iter().enumerate() {
        let (k, dist) = mu
            .iter()
            .enumerate()
            .map(|(k, v)| (k, (v - bi).norm()))
            .min_by(|a, b| a.1.total_cmp(&b.1))
            .expect("nonempty spectrum");
        if used[k] || dist > gap / 4.0 {
            return Err(Error::BranchMatch(format!(
                "eigenvalue of C(z) at sample {index} is {dist:.3e} from branch {i}, gap {gap:.3e}"
            )));
        }
        used[k] = true;
        // yᵀC = μyᵀ, so y spans the kernel of Cᵀ − μ.
        let a = cz.transpose() - CMat::identity(n, n) * mu[k];
        let svd = a.svd(false, true);
        let v_t = svd.v_t.expect("requested V");
        let smallest = svd
            .singular_values
            .iter()
            .enumerate()
            .min_by(|a, b| a.1.total_cmp(b.1))
            .map(|(r, _)| r)
            .expect("nonempty");
        let y: Vec<Complex64> = (0..n).map(|c| v_t[(smallest, c)].conj()).collect();
        if y[0].norm() < 1e-10 {
            return Err(Error::BranchMatch(format!(
                "eigenvector of branch {i} at sample {index} has no first component"
            )));
        }
        for c in 0..n {
            rows[(i, c)] = y[c] / y[0];
        }
    }
    Ok(rows)
}

fn w_samples(c: &LaurentMatrix, bs: &BranchSeries, m_s: usize) -> Result<(CircleSamples, CircleSamples)> {
    let cz = inverse_transform(c, m_s)?;
    let mut ws = Vec::with_capacity(m_s);
    for j in 0..m_s {
        let z = point(j, m_s);
        let roots = nth_roots(z, bs.n());
        let bvals: Vec<Complex64> = roots.iter().map(|r| bs.eval(*r)).collect();
        let rows = left_eigenrows(cz.value(j), &bvals, j)?;
        let v = vandermonde(&roots);
        let v_inv = linalg::inverse(&v).ok_or(Error::SingularVandermonde(0, 1))?;
        ws.push(v_inv * rows);
    }
    Ok((CircleSamples::new(ws)?, cz))
}

/// Unit lower L and upper U with a = LU, no pivoting.
fn lu_unpivoted(a: &CMat) -> Result<CMat> {
    let n = a.nrows();
    let mut u = a.clone();
    for k in 0..n {
        let p = u[(k, k)];
        if p.norm() < 1e-12 {
            return Err(Error::Analyticity(
                "constant term of 𝒲 has no LU factorization: outside the big cell".into(),
            ));
        }
        for r in k + 1..n {
            let f = u[(r, k)] / p;
            for c in 0..n {
                let d = f * u[(k, c)];
                u[(r, c)] -= d;
            }
        }
    }
    Ok(u)
}

/// 𝒲 = V⁻¹Υ built pointwise from the left eigenvectors of C(z), then moved
/// into big-cell form by a constant upper-triangular right factor.
///
/// The eigenvectors are scaled to first entry 1, which makes the first column
/// of 𝒲 exactly e₁. Without such a choice, f(Λ)𝒲 gives the same C for any
/// scalar f(ζ).
pub fn reconstruct_w(c: &LaurentMatrix, terms: usize, band: usize) -> Result<Reconstruction> {
    let n = c.n();
    let cp = CharPoly::from_matrix(c)?;
    let bs = branch_series(&cp, terms, false)?;
    let m_s = sample_count(band);
    let h = band as i64;
    let (ws, cz) = w_samples(c, &bs, m_s)?;
    let raw = transform(&ws, -h, h)?;
    let total = raw.total_energy();
    let positive_energy = if total == 0.0 { 0.0 } else { raw.band_energy(1, h) / total };

    let (ws2, _) = w_samples(c, &bs, 2 * m_s)?;
    let raw2 = transform(&ws2, -h, h)?;
    let grid_residual = raw.sub(&raw2).max_abs_in(-h, h);

    let u = lu_unpivoted(&raw.block(0))?;
    let u_inv = linalg::inverse(&u).ok_or_else(|| Error::Analyticity("singular U".into()))?;
    let w_full = LaurentMatrix::from_blocks(-h, (-h..=h).map(|k| raw.block(k) * &u_inv).collect());
    let w = w_full.rebanded(-h, 0);

    let bz = inverse_transform(&bs.b_matrix(), m_s.max((bs.b_matrix().hi() - bs.b_matrix().lo() + 1) as usize).next_power_of_two())?;
    let step = bz.m() / m_s;
    let mut conj_residual: f64 = 0.0;
    for j in 0..m_s {
        let wj = ws.value(j) * &u_inv;
        let wj_inv = linalg::inverse(&wj)
            .ok_or(Error::NearSingularSymbol { index: j, cond: f64::INFINITY })?;
        let lhs = &wj_inv * bz.value(j * step) * &wj;
        let rhs = &u * cz.value(j) * &u_inv;
        conj_residual = conj_residual.max(linalg::max_abs_diff(&lhs, &rhs));
    }
    let big_cell = big_cell_check(&w);
    debug_assert_eq!(w.n(), n);
    Ok(Reconstruction {
        w,
        u,
        branches: bs,
        conj_residual,
        grid_residual,
        positive_energy,
        big_cell,
    })
}

/// min over constant K of max |a − bK| on common modes, with K = b₀⁻¹a₀.
/// Zero when a and b span the same point of the Grassmannian by a constant
/// change of basis.
pub fn column_span_residual(a: &LaurentMatrix, b: &LaurentMatrix) -> Result<f64> {
    let k = linalg::inverse(&b.block(0))
        .ok_or_else(|| Error::DegenerateInput("singular constant term".into()))?
        * a.block(0);
    let lo = a.lo().min(b.lo());
    let hi = a.hi().max(b.hi());
    Ok((lo..=hi)
        .map(|s| linalg::max_abs_diff(&a.block(s), &(b.block(s) * &k)))
        .fold(0.0, f64::max))
}
