//! Block Toeplitz truncations, the Plemelj operator T(γ)T(γ⁻¹) in Fourier
//! and quadrature form, Fredholm determinants and the limit theorems built
//! on them.

use std::f64::consts::PI;

use num_complex::Complex64;

use crate::error::{Error, Result};
use crate::factorization::{FactorizationResult, OppositeFactorization};
use crate::laurent::{
    geometric_mean, inverse_transform, invert_symbol, lm_mul, transform, winding_number,
    CircleSamples, LaurentMatrix, DEFAULT_SAMPLES,
};
use crate::linalg::{self, CMat, ONE};

/// Default Cauchy tolerance for finite-section determinants.
pub const DEFAULT_FREDHOLM_TOL: f64 = 1e-10;
/// Default block truncation of Plemelj operators.
pub const DEFAULT_PLEMELJ_BLOCKS: usize = 64;
/// Default tail bound accepted by [`plemelj_fourier`].
pub const DEFAULT_TAIL_TOL: f64 = 1e-12;

/// N×N arrangement of n×n blocks with block (i,j) = γ^{(i−j)}.
#[derive(Clone, Debug)]
pub struct BlockToeplitz {
    pub n: usize,
    pub blocks: usize,
    pub entries: CMat,
}

pub fn build_tn(lm: &LaurentMatrix, nb: usize) -> BlockToeplitz {
    assert!(nb >= 1);
    BlockToeplitz {
        n: lm.n(),
        blocks: nb,
        entries: toeplitz_section(lm, 0, nb),
    }
}

/// Rows/columns start..start+len of the semi-infinite T(γ).
fn toeplitz_section(lm: &LaurentMatrix, start: usize, len: usize) -> CMat {
    let n = lm.n();
    let mut m = CMat::zeros(n * len, n * len);
    for i in 0..len {
        for j in 0..len {
            let k = i as i64 - j as i64;
            if let Some(b) = lm.get(k) {
                m.view_mut((i * n, j * n), (n, n)).copy_from(b);
            }
        }
    }
    let _ = start;
    m
}

impl BlockToeplitz {
    pub fn det(&self) -> Complex64 {
        linalg::det(&self.entries)
    }

    pub fn log_det(&self) -> Option<Complex64> {
        linalg::log_det(&self.entries)
    }

    pub fn block(&self, i: usize, j: usize) -> CMat {
        self.entries
            .view((i * self.n, j * self.n), (self.n, self.n))
            .into_owned()
    }

    pub fn solve(&self, rhs: &CMat) -> Option<CMat> {
        self.entries.clone().lu().solve(rhs)
    }
}

pub fn det_dn(bt: &BlockToeplitz) -> Complex64 {
    bt.det()
}

/// Σ_{k≥1} a^{(i+k)} b^{(−j−k)} over the stored bands.
fn hankel_product(a: &LaurentMatrix, b: &LaurentMatrix, i: usize, j: usize) -> CMat {
    let mut acc = linalg::zeros(a.n());
    let k_hi = (a.hi() - i as i64).min(-b.lo() - j as i64);
    for k in 1..=k_hi {
        acc += a.block(i as i64 + k) * b.block(-(j as i64) - k);
    }
    acc
}

/// max over i,j < M of ‖[T(ab) − T(a)T(b)]_{ij} − Σ_{k≥1} a^{(i+k)} b^{(−j−k)}‖.
pub fn hankel_identity_check(a: &LaurentMatrix, b: &LaurentMatrix, m: usize) -> f64 {
    let ab = lm_mul(a, b, a.lo() + b.lo(), a.hi() + b.hi());
    let mut worst: f64 = 0.0;
    for i in 0..m {
        for j in 0..m {
            let mut tt = linalg::zeros(a.n());
            let l_hi = i as i64 - a.lo();
            for l in 0..=l_hi.max(0) {
                tt += a.block(i as i64 - l) * b.block(l - j as i64);
            }
            let lhs = ab.block(i as i64 - j as i64) - tt;
            let rhs = hankel_product(a, b, i, j);
            worst = worst.max(linalg::max_abs_diff(&lhs, &rhs));
        }
    }
    worst
}

/// Finite block section of 𝒫_γ = T(γ)T(γ⁻¹).
#[derive(Clone, Debug)]
pub struct PlemeljOperator {
    pub n: usize,
    pub blocks: usize,
    pub entries: CMat,
    /// Estimated size of the series terms not represented in the stored bands.
    pub tail_bound: f64,
    /// Hilbert-Schmidt norms of the two Hankel factors (NaN when unknown).
    pub hs_norms: (f64, f64),
}

impl PlemeljOperator {
    pub fn identity(n: usize, blocks: usize) -> PlemeljOperator {
        PlemeljOperator {
            n,
            blocks,
            entries: CMat::identity(n * blocks, n * blocks),
            tail_bound: 0.0,
            hs_norms: (0.0, 0.0),
        }
    }

    pub fn block(&self, i: usize, j: usize) -> CMat {
        self.entries
            .view((i * self.n, j * self.n), (self.n, self.n))
            .into_owned()
    }

    /// Leading m×m block section.
    pub fn section(&self, m: usize) -> CMat {
        let s = m.min(self.blocks) * self.n;
        self.entries.view((0, 0), (s, s)).into_owned()
    }

    /// Blocks from `start` on (the compression to modes ≥ start).
    pub fn compression(&self, start: usize) -> CMat {
        let s = start * self.n;
        let len = self.entries.nrows() - s;
        self.entries.view((s, s), (len, len)).into_owned()
    }

    pub fn max_entry_diff(&self, o: &PlemeljOperator) -> f64 {
        let m = self.blocks.min(o.blocks);
        linalg::max_abs_diff(&self.section(m), &o.section(m))
    }
}

/// Entries δ_{ij} − Σ_{k≥1} γ^{(i+k)}(γ⁻¹)^{(−j−k)} for i,j < M.
pub fn plemelj_fourier(
    lm: &LaurentMatrix,
    lm_inv: &LaurentMatrix,
    m: usize,
    tail_tol: f64,
) -> Result<PlemeljOperator> {
    let n = lm.n();
    let mut entries = CMat::identity(n * m, n * m);
    for i in 0..m {
        for j in 0..m {
            let h = hankel_product(lm, lm_inv, i, j);
            let mut v = entries.view_mut((i * n, j * n), (n, n));
            v -= h;
        }
    }
    let edge = |x: &LaurentMatrix, a: i64, b: i64| x.max_abs_in(a, b);
    // the outermost stored modes stand in for the first omitted ones
    let pos_edge = edge(lm, lm.hi().max(1), lm.hi());
    let neg_edge = edge(lm_inv, lm_inv.lo(), lm_inv.lo().min(-1));
    let sum_abs = |x: &LaurentMatrix, a: i64, b: i64| -> f64 {
        (a.max(x.lo())..=b.min(x.hi()))
            .map(|k| linalg::frob2(&x.block(k)).sqrt())
            .sum()
    };
    let tail_bound = if lm.hi() < 1 || lm_inv.lo() > -1 {
        0.0
    } else {
        pos_edge * sum_abs(lm_inv, lm_inv.lo(), -1) + neg_edge * sum_abs(lm, 1, lm.hi())
    };
    if tail_bound > tail_tol {
        return Err(Error::Truncation(format!(
            "Plemelj tail bound {tail_bound:.3e} exceeds {tail_tol:.1e}; widen the bands"
        )));
    }
    let hs = |x: &LaurentMatrix, sign: i64| -> f64 {
        let range: Vec<i64> = if sign > 0 {
            (1..=x.hi()).collect()
        } else {
            (x.lo()..=-1).collect()
        };
        range
            .into_iter()
            .map(|k| k.unsigned_abs() as f64 * linalg::frob2(&x.block(k)))
            .sum::<f64>()
            .sqrt()
    };
    Ok(PlemeljOperator {
        n,
        blocks: m,
        entries,
        tail_bound,
        hs_norms: (hs(lm, 1), hs(lm_inv, -1)),
    })
}

/// Values of γ⁻¹ at ζ_b = r·e^{2πi(b+½)/M}, b = 0..M−1.
#[derive(Clone, Debug)]
pub struct RadialSamples {
    pub radius: f64,
    pub values: Vec<CMat>,
}

impl RadialSamples {
    pub fn from_fn(radius: f64, m: usize, f: impl Fn(Complex64) -> CMat) -> RadialSamples {
        RadialSamples {
            radius,
            values: (0..m).map(|b| f(radial_point(radius, b, m))).collect(),
        }
    }

    pub fn m(&self) -> usize {
        self.values.len()
    }
}

fn radial_point(r: f64, b: usize, m: usize) -> Complex64 {
    Complex64::from_polar(r, 2.0 * PI * (b as f64 + 0.5) / m as f64)
}

/// Inner and outer contour radii 1 ∓ ε with ε = (1−ρ)/2.
pub fn quadrature_radii(rho: f64) -> (f64, f64) {
    let eps = (1.0 - rho) / 2.0;
    (1.0 - eps, 1.0 + eps)
}

fn quadrature_operator(
    x: &CircleSamples,
    xi: &RadialSamples,
    m: usize,
    z_stride: usize,
    zeta_stride: usize,
) -> CMat {
    let n = x.n();
    let mz = x.m() / z_stride;
    let mq = xi.m() / zeta_stride;
    let ident = linalg::identity(n);
    let zs: Vec<Complex64> = (0..mz).map(|a| x.point(a * z_stride)).collect();
    let zetas: Vec<Complex64> = (0..mq)
        .map(|b| radial_point(xi.radius, b * zeta_stride, xi.m()))
        .collect();
    // F_s(z_a) = (1/M)Σ_b (γ(z_a)γ⁻¹(ζ_b) − I)/(ζ_b − z_a) ζ_b^{s+1}
    let mut f = vec![vec![linalg::zeros(n); mz]; m];
    for (a, za) in zs.iter().enumerate() {
        let ga = x.value(a * z_stride);
        for (b, zb) in zetas.iter().enumerate() {
            let kern = (ga * &xi.values[b * zeta_stride] - &ident) / (zb - za);
            let mut w = *zb / mq as f64;
            for fs in f.iter_mut() {
                fs[a] += &kern * w;
                w *= zb;
            }
        }
    }
    let mut out = CMat::identity(n * m, n * m);
    for (s, fs) in f.iter().enumerate() {
        for t in 0..m {
            let mut acc = linalg::zeros(n);
            for (a, za) in zs.iter().enumerate() {
                acc += &fs[a] * za.powi(-(t as i32));
            }
            acc /= Complex64::new(mz as f64, 0.0);
            let mut v = out.view_mut((t * n, s * n), (n, n));
            v += acc;
        }
    }
    out
}

/// Plemelj operator from the Cauchy-kernel integral, with γ on the unit circle
/// and γ⁻¹ on a circle of radius ≠ 1. Refinement is checked by halving both
/// grids.
pub fn plemelj_quadrature(
    x: &CircleSamples,
    x_inv: &RadialSamples,
    m: usize,
    tol: f64,
) -> Result<PlemeljOperator> {
    if x.m() < 4 * m || x_inv.m() < 4 * m {
        return Err(Error::Alias {
            lo: 0,
            hi: m as i64,
            needed: 4 * m,
            samples: x.m().min(x_inv.m()),
        });
    }
    let fine = quadrature_operator(x, x_inv, m, 1, 1);
    let coarse = quadrature_operator(x, x_inv, m, 2, 2);
    let change = linalg::max_abs_diff(&fine, &coarse);
    if change > tol {
        return Err(Error::Quadrature(format!(
            "entries moved by {change:.3e} under grid refinement"
        )));
    }
    Ok(PlemeljOperator {
        n: x.n(),
        blocks: m,
        entries: fine,
        tail_bound: change,
        hs_norms: (f64::NAN, f64::NAN),
    })
}

/// Finite-section Fredholm determinant.
#[derive(Clone, Debug, PartialEq)]
pub struct FredholmDet {
    pub value: Complex64,
    pub m_used: usize,
    pub est_error: f64,
}

/// det of growing leading sections (2, 4, 8, … blocks) until successive
/// values differ by less than `tol`.
pub fn fredholm_det(p: &PlemeljOperator, tol: f64) -> Result<FredholmDet> {
    let mut m = 2usize.min(p.blocks);
    let mut prev = linalg::det(&p.section(m));
    loop {
        if m >= p.blocks {
            return Err(Error::Convergence(format!(
                "finite sections did not settle within {} blocks",
                p.blocks
            )));
        }
        let next_m = (2 * m).min(p.blocks);
        let cur = linalg::det(&p.section(next_m));
        let delta = (cur - prev).norm();
        if delta < tol {
            return Ok(FredholmDet {
                value: cur,
                m_used: next_m,
                est_error: delta,
            });
        }
        prev = cur;
        m = next_m;
    }
}

/// One row of a convergence table.
#[derive(Clone, Debug, PartialEq)]
pub struct ConvergenceRow {
    pub n: usize,
    pub d_n: Complex64,
    pub g_n: Complex64,
    pub ratio: Complex64,
    pub abs_delta: f64,
}

#[derive(Clone, Debug)]
pub struct SzegoWidom {
    /// lim D_N/G^N from the direct sequence.
    pub d_inf_direct: Complex64,
    /// det 𝒫_γ.
    pub d_inf_plemelj: FredholmDet,
    pub g: Complex64,
    pub n_used: usize,
    pub rows: Vec<ConvergenceRow>,
    /// Geometric rate fitted to the Cauchy differences above the noise floor.
    pub fitted_ratio: Option<f64>,
}

impl SzegoWidom {
    pub fn discrepancy(&self) -> f64 {
        (self.d_inf_direct - self.d_inf_plemelj.value).norm()
    }

    pub fn to_csv(&self) -> String {
        use crate::report::{fmt_f64, Csv};
        let mut csv = Csv::new(&[
            "N", "D_N_re", "D_N_im", "G^N_re", "G^N_im", "ratio_re", "ratio_im", "abs_delta",
        ]);
        for r in &self.rows {
            csv.row(&[
                r.n.to_string(),
                fmt_f64(r.d_n.re),
                fmt_f64(r.d_n.im),
                fmt_f64(r.g_n.re),
                fmt_f64(r.g_n.im),
                fmt_f64(r.ratio.re),
                fmt_f64(r.ratio.im),
                fmt_f64(r.abs_delta),
            ]);
        }
        csv.finish()
    }
}

/// Least-squares rate r in |Δ_N| ≈ C r^N over differences above `floor`.
pub fn fit_ratio(deltas: &[(usize, f64)], floor: f64) -> Option<f64> {
    let pts: Vec<(f64, f64)> = deltas
        .iter()
        .filter(|(_, d)| *d > floor)
        .map(|(n, d)| (*n as f64, d.ln()))
        .collect();
    if pts.len() < 2 {
        return None;
    }
    let mx = pts.iter().map(|p| p.0).sum::<f64>() / pts.len() as f64;
    let my = pts.iter().map(|p| p.1).sum::<f64>() / pts.len() as f64;
    let sxy: f64 = pts.iter().map(|p| (p.0 - mx) * (p.1 - my)).sum();
    let sxx: f64 = pts.iter().map(|p| (p.0 - mx).powi(2)).sum();
    Some((sxy / sxx).exp())
}

/// Both routes to D_∞: the D_N/G^N sequence (stopped on Cauchy differences
/// below `tol`, at most `n_max`) and det 𝒫_γ.
pub fn szego_widom(
    lm: &LaurentMatrix,
    x: &CircleSamples,
    tol: f64,
    n_max: usize,
) -> Result<SzegoWidom> {
    let w = winding_number(x)?;
    if w != 0 {
        return Err(Error::Hypothesis(format!("det γ winds {w} times")));
    }
    let g = geometric_mean(x)?;
    let log_g = g.ln();
    let mut rows: Vec<ConvergenceRow> = Vec::new();
    let mut prev: Option<Complex64> = None;
    let mut converged_at = None;
    for nb in 1..=n_max {
        let bt = build_tn(lm, nb);
        let ld = bt.log_det();
        let (d_n, ratio) = match ld {
            Some(l) => (l.exp(), (l - log_g * nb as f64).exp()),
            None => (Complex64::default(), Complex64::default()),
        };
        let g_n = (log_g * nb as f64).exp();
        let abs_delta = prev.map(|p| (ratio - p).norm()).unwrap_or(f64::NAN);
        rows.push(ConvergenceRow {
            n: nb,
            d_n,
            g_n,
            ratio,
            abs_delta,
        });
        if abs_delta < tol && converged_at.is_none() {
            converged_at = Some(nb);
            break;
        }
        prev = Some(ratio);
    }
    let n_used = converged_at.ok_or_else(|| {
        Error::Convergence(format!("D_N/G^N not Cauchy to {tol:.1e} by N = {n_max}"))
    })?;
    let (inv, _) = invert_symbol(x)?;
    let depth = (x.m() / 4 - 1) as i64;
    let lm_inv = transform(&inv, -depth, depth)?;
    let p = plemelj_fourier(lm, &lm_inv, DEFAULT_PLEMELJ_BLOCKS, DEFAULT_TAIL_TOL)?;
    let d_inf_plemelj = fredholm_det(&p, tol)?;
    let deltas: Vec<(usize, f64)> = rows
        .iter()
        .filter(|r| r.abs_delta.is_finite())
        .map(|r| (r.n, r.abs_delta))
        .collect();
    Ok(SzegoWidom {
        d_inf_direct: rows.last().unwrap().ratio,
        d_inf_plemelj,
        g,
        n_used,
        rows,
        fitted_ratio: fit_ratio(&deltas, 1e-13),
    })
}

/// Largest one-sided mode count the shortcut accepts.
pub const MAX_SHORTCUT_SIDE: i64 = 32;

/// D_∞ = D_j(γ⁻¹)·G(γ)^j, where j is the number of modes on the finite side
/// of γ's band (modes ≥ −j, or modes ≤ j).
pub fn half_truncated_shortcut(lm: &LaurentMatrix) -> Result<Complex64> {
    let neg = (-lm.lo()).max(0);
    let pos = lm.hi().max(0);
    let j = neg.min(pos);
    if j > MAX_SHORTCUT_SIDE {
        return Err(Error::Spec(format!(
            "symbol has {neg} negative and {pos} positive modes; neither side is short"
        )));
    }
    let width = (lm.hi() - lm.lo() + 1) as usize;
    let m = DEFAULT_SAMPLES.max((8 * width).next_power_of_two());
    let x = inverse_transform(lm, m)?;
    let g = geometric_mean(&x)?;
    if j == 0 {
        return Ok(ONE);
    }
    let (inv, _) = invert_symbol(&x)?;
    let lm_inv = transform(&inv, -(j - 1), j - 1)?;
    Ok(build_tn(&lm_inv, j as usize).det() * g.powi(j as i32))
}

/// Borodin-Okounkov data at level N.
#[derive(Clone, Debug)]
pub struct BorodinOkounkov {
    pub k_matrix: CMat,
    pub det_correction: Complex64,
    pub d_n: Complex64,
    pub d_inf: Complex64,
    pub residual: f64,
    pub k_norm: f64,
    pub sections: usize,
}

/// Coefficients of a loop given by samples, on modes [lo, hi].
fn coefficients(x: &CircleSamples, lo: i64, hi: i64) -> Result<LaurentMatrix> {
    transform(x, lo, hi)
}

/// Kernel K_{ij} = Σ_{k≥1} φ^{(i+k)} (φ⁻¹)^{(−j−k)} for i,j ≥ N, with
/// φ = γ₋θ₊⁻¹ and φ⁻¹ = θ₋⁻¹γ₊, and the identity D_N = D_∞ det(I−K).
pub fn borodin_okounkov(
    lm: &LaurentMatrix,
    theta: &FactorizationResult,
    opposite: &OppositeFactorization,
    d_inf: Complex64,
    nb: usize,
    tol: f64,
) -> Result<BorodinOkounkov> {
    let m = theta.samples_m();
    let gm = inverse_transform(&opposite.minus, m)?;
    let gp = inverse_transform(&opposite.plus, m)?;
    let tm = inverse_transform(&theta.t_minus, m)?;
    let tp = inverse_transform(&theta.t_plus, m)?;
    let (tp_inv, _) = invert_symbol(&tp)?;
    let (tm_inv, _) = invert_symbol(&tm)?;
    let phi = gm.zip_map(&tp_inv, |a, b| a * b);
    let phi_inv = tm_inv.zip_map(&gp, |a, b| a * b);
    let half = (m / 4 - 1) as i64;
    let phi_c = coefficients(&phi, -half, half)?;
    let phi_inv_c = coefficients(&phi_inv, -half, half)?;
    let d_n = build_tn(lm, nb).det();
    let kernel = |len: usize| -> CMat {
        let n = lm.n();
        let mut k = CMat::zeros(n * len, n * len);
        for i in 0..len {
            for j in 0..len {
                let h = hankel_product(&phi_c, &phi_inv_c, nb + i, nb + j);
                k.view_mut((i * n, j * n), (n, n)).copy_from(&h);
            }
        }
        k
    };
    let mut len = 4usize;
    let mut prev = {
        let k = kernel(len);
        linalg::det(&(CMat::identity(k.nrows(), k.nrows()) - k))
    };
    loop {
        let next = 2 * len;
        let k = kernel(next);
        let cur = linalg::det(&(CMat::identity(k.nrows(), k.nrows()) - &k));
        if (cur - prev).norm() < tol || next >= half as usize {
            let residual = (d_n - d_inf * cur).norm();
            let k_norm = linalg::frob2(&k).sqrt();
            return Ok(BorodinOkounkov {
                k_matrix: k,
                det_correction: cur,
                d_n,
                d_inf,
                residual,
                k_norm,
                sections: next,
            });
        }
        prev = cur;
        len = next;
    }
}

/// Result of comparing (d/dx) log D_∞ by finite differences with the contour
/// formula built from both factorizations of γ⁻¹.
#[derive(Clone, Debug)]
pub struct WidomDerivative {
    pub finite_difference: Complex64,
    pub contour: Complex64,
    pub residual: f64,
}

/// A one-parameter family of symbols sampled on a fixed grid.
pub trait SymbolFamily {
    fn samples(&self, x: f64) -> Result<CircleSamples>;
    /// Exact ∂_xγ at x if available; central differences are used otherwise.
    fn derivative(&self, _x: f64) -> Option<Result<CircleSamples>> {
        None
    }
}

/// log D_∞ of sampled γ via the Fourier Plemelj operator.
pub fn log_d_inf(x: &CircleSamples, tol: f64) -> Result<Complex64> {
    let depth = (x.m() / 4 - 1) as i64;
    let lm = transform(x, -depth, depth)?;
    let (inv, _) = invert_symbol(x)?;
    let lm_inv = transform(&inv, -depth, depth)?;
    let p = plemelj_fourier(&lm, &lm_inv, DEFAULT_PLEMELJ_BLOCKS, DEFAULT_TAIL_TOL)?;
    Ok(fredholm_det(&p, tol)?.value.ln())
}

/// (i/2π)∮ tr[((∂_z t₊)t₋ − (∂_z s₋)s₊)∂_xγ] dz with γ⁻¹ = t₊t₋ = s₋s₊, i.e.
/// t₊ = T₊⁻¹, t₋ = T₋⁻¹ from γ = T₋T₊ and s₋ = γ₋⁻¹, s₊ = γ₊⁻¹ from γ = γ₊γ₋.
pub fn widom_contour(
    theta: &FactorizationResult,
    opposite: &OppositeFactorization,
    dgamma: &CircleSamples,
) -> Result<Complex64> {
    let m = dgamma.m();
    let tp = inverse_transform(&theta.t_plus, m)?;
    let dtp = inverse_transform(&theta.t_plus.dz(), m)?;
    let tm = inverse_transform(&theta.t_minus, m)?;
    let gm = inverse_transform(&opposite.minus, m)?;
    let dgm = inverse_transform(&opposite.minus.dz(), m)?;
    let gp = inverse_transform(&opposite.plus, m)?;
    let mut acc = Complex64::default();
    for j in 0..m {
        let z = dgamma.point(j);
        let tp_inv = linalg::inverse(tp.value(j)).ok_or(Error::NearSingularSymbol {
            index: j,
            cond: f64::INFINITY,
        })?;
        let tm_inv = linalg::inverse(tm.value(j)).ok_or(Error::NearSingularSymbol {
            index: j,
            cond: f64::INFINITY,
        })?;
        let gm_inv = linalg::inverse(gm.value(j)).ok_or(Error::NearSingularSymbol {
            index: j,
            cond: f64::INFINITY,
        })?;
        let gp_inv = linalg::inverse(gp.value(j)).ok_or(Error::NearSingularSymbol {
            index: j,
            cond: f64::INFINITY,
        })?;
        let d_tplus = -(&tp_inv * dtp.value(j) * &tp_inv);
        let d_sminus = -(&gm_inv * dgm.value(j) * &gm_inv);
        let f = (d_tplus * &tm_inv - d_sminus * &gp_inv) * dgamma.value(j);
        acc += f.trace() * z;
    }
    Ok(-acc / m as f64)
}

/// Compares both sides of the Widom derivative formula at parameter x.
pub fn widom_derivative_check(
    family: &dyn SymbolFamily,
    x: f64,
    h: f64,
    band: usize,
    tol: f64,
) -> Result<WidomDerivative> {
    let plus = family.samples(x + h)?;
    let minus = family.samples(x - h)?;
    let fd = (log_d_inf(&plus, tol)? - log_d_inf(&minus, tol)?) / (2.0 * h);
    let at = family.samples(x)?;
    let dgamma = match family.derivative(x) {
        Some(d) => d?,
        None => plus.zip_map(&minus, |a, b| (a - b) / Complex64::new(2.0 * h, 0.0)),
    };
    let theta = crate::factorization::wiener_hopf(&at, band, crate::factorization::DEFAULT_TOL)?;
    let opposite =
        crate::factorization::opposite_factorization(&at, band, crate::factorization::DEFAULT_TOL)?;
    let contour = widom_contour(&theta, &opposite, &dgamma)?;
    Ok(WidomDerivative {
        finite_difference: fd,
        contour,
        residual: (fd - contour).norm(),
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::linalg::c;

    fn diag2(a: Complex64, b: Complex64) -> CMat {
        CMat::from_row_slice(2, 2, &[a, c(0.0, 0.0), c(0.0, 0.0), b])
    }

    #[test]
    fn identity_determinants() {
        for nb in 1..5 {
            assert!((build_tn(&LaurentMatrix::identity(2), nb).det() - ONE).norm() < 1e-15);
        }
    }

    #[test]
    fn lower_triangular_symbol_has_unit_determinants() {
        let mut lm = LaurentMatrix::zeros(2, -3, 0);
        *lm.block_mut(0) = CMat::from_row_slice(2, 2, &[ONE, c(0.0, 0.0), c(0.7, -0.2), ONE]);
        *lm.block_mut(-1) = CMat::from_row_slice(2, 2, &[c(0.3, 0.0), c(1.0, 0.0), c(-2.0, 0.1), c(0.5, 0.0)]);
        *lm.block_mut(-3) = diag2(c(4.0, 0.0), c(-1.0, 0.0));
        for nb in 1..8 {
            assert!((build_tn(&lm, nb).det() - ONE).norm() < 1e-12);
        }
        let s = LaurentMatrix::scalar(-1, &[c(-0.36, 0.0), ONE]);
        assert!((build_tn(&s, 10).det() - ONE).norm() < 1e-15);
    }

    #[test]
    fn singular_section_has_zero_determinant() {
        let s = LaurentMatrix::scalar(-1, &[ONE, c(0.0, 0.0)]);
        assert_eq!(build_tn(&s, 3).det(), c(0.0, 0.0));
    }

    #[test]
    fn hankel_identity_trivial_cases() {
        let a = LaurentMatrix::scalar(-2, &[c(0.1, 0.0), c(0.5, 0.2), ONE, c(0.3, 0.0), c(-0.2, 0.0)]);
        assert!(hankel_identity_check(&a, &LaurentMatrix::identity(1), 8) < 1e-15);
        assert!(hankel_identity_check(&LaurentMatrix::identity(1), &a, 8) < 1e-15);
        let p = LaurentMatrix::scalar(0, &[ONE, c(0.5, 0.0), c(0.25, 0.0)]);
        let q = LaurentMatrix::scalar(0, &[c(2.0, 0.0), c(-1.0, 0.0)]);
        assert!(hankel_identity_check(&p, &q, 6) < 1e-15);
        assert!(hankel_product(&p, &q, 0, 0).norm() == 0.0);
    }

    #[test]
    fn plemelj_of_identity() {
        let i = LaurentMatrix::identity(2);
        let p = plemelj_fourier(&i, &i, 6, 1e-12).unwrap();
        assert!(linalg::max_abs_diff(&p.entries, &CMat::identity(12, 12)) == 0.0);
        let f = fredholm_det(&p, 1e-12).unwrap();
        assert_eq!(f.value, ONE);
    }

    #[test]
    fn plemelj_rational_against_geometric_series() {
        // γ = diag(1 − c²/z, 1 − d²/z) with explicit γ⁻¹ = Σ c^{2k} z^{−k}
        let (cc, d) = (0.6f64, 0.3f64);
        let mut g = LaurentMatrix::zeros(2, -1, 0);
        *g.block_mut(0) = linalg::identity(2);
        *g.block_mut(-1) = diag2(c(-cc * cc, 0.0), c(-d * d, 0.0));
        let b = 60;
        let mut gi = LaurentMatrix::zeros(2, -b, 0);
        for k in 0..=b {
            *gi.block_mut(-k) = diag2(c((cc * cc).powi(k as i32), 0.0), c((d * d).powi(k as i32), 0.0));
        }
        let p = plemelj_fourier(&g, &gi, 8, 1e-12).unwrap();
        // γ has no positive modes, so the Hankel sum vanishes
        assert!(linalg::max_abs_diff(&p.entries, &CMat::identity(16, 16)) < 1e-15);
        assert!((fredholm_det(&p, 1e-12).unwrap().value - ONE).norm() < 1e-15);
    }

    #[test]
    fn scalar_triangular_szego_widom() {
        let s = LaurentMatrix::scalar(-1, &[c(-0.36, 0.0), ONE]);
        let x = inverse_transform(&s, 512).unwrap();
        let sw = szego_widom(&s, &x, 1e-12, 32).unwrap();
        assert!((sw.g - ONE).norm() < 1e-12);
        assert!((sw.d_inf_direct - ONE).norm() < 1e-12);
        assert!((sw.d_inf_plemelj.value - ONE).norm() < 1e-12);
    }

    #[test]
    fn szego_widom_needs_zero_winding() {
        let s = LaurentMatrix::scalar(1, &[ONE]);
        let x = inverse_transform(&s, 64).unwrap();
        assert!(matches!(szego_widom(&s, &x, 1e-10, 8), Err(Error::Hypothesis(_))));
    }

    #[test]
    fn shortcut_for_scalar_band_symbol() {
        // γ = 1 + a z⁻¹ + b z + c z² (modes ≥ −1), random-ish coefficients
        let s = LaurentMatrix::scalar(
            -1,
            &[c(0.2, 0.1), ONE, c(0.3, -0.2), c(0.1, 0.05)],
        );
        let x = inverse_transform(&s, 512).unwrap();
        let g = geometric_mean(&x).unwrap();
        let mut brute = Complex64::default();
        let lg = g.ln();
        for nb in [60usize, 64] {
            brute = (build_tn(&s, nb).log_det().unwrap() - lg * nb as f64).exp();
        }
        let short = half_truncated_shortcut(&s).unwrap();
        assert!((short - brute).norm() < 1e-10, "{short} vs {brute}");
        assert!((half_truncated_shortcut(&LaurentMatrix::identity(2)).unwrap() - ONE).norm() < 1e-15);
    }

    #[test]
    fn quadrature_identity() {
        let x = CircleSamples::from_fn(64, |_| linalg::identity(2)).unwrap();
        let xi = RadialSamples::from_fn(0.7, 64, |_| linalg::identity(2));
        let p = plemelj_quadrature(&x, &xi, 8, 1e-12).unwrap();
        assert!(linalg::max_abs_diff(&p.entries, &CMat::identity(16, 16)) < 1e-15);
    }

    #[test]
    fn ratio_fit() {
        let d: Vec<(usize, f64)> = (1..10).map(|n| (n, 0.5f64.powi(n as i32))).collect();
        assert!((fit_ratio(&d, 1e-13).unwrap() - 0.5).abs() < 1e-12);
        assert!(fit_ratio(&[(1, 1e-15)], 1e-13).is_none());
    }
}
