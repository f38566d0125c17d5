//! Wiener-Hopf factorization γ = T₋T₊ on the circle, the opposite order
//! γ = γ₊γ₋, the wave matrix Ψ_W and the τ-ratio check.

use num_complex::Complex64;

use crate::error::{Error, Result};
use crate::laurent::{
    inverse_transform, invert_symbol, lm_mul, tail_fraction, transform, winding_number,
    CircleSamples, LaurentMatrix,
};
use crate::linalg::{self, CMat};
use crate::symbols::{exp_xi_auto, SymbolSpec, TimeVector};
use crate::toeplitz::{plemelj_fourier, DEFAULT_TAIL_TOL};

/// Residual and leakage accepted by the solver.
pub const DEFAULT_TOL: f64 = 1e-8;
/// Extra negative modes beyond the symbol band given to T₋.
pub const BAND_MARGIN: usize = 16;
/// Condition number past which the mode system is treated as singular.
pub const MAX_SYSTEM_COND: f64 = 1e12;

/// γ = T₋T₊ with T₋ on modes [−B, 0], T₋^{(0)} = I, and T₊ on modes ≥ 0.
#[derive(Clone, Debug)]
pub struct FactorizationResult {
    pub t_minus: LaurentMatrix,
    pub t_plus: LaurentMatrix,
    /// sup_j ‖γ(z_j) − T₋(z_j)T₊(z_j)‖ with T₊ as stored.
    pub residual: f64,
    /// Energy fraction of T₊ samples on negative modes.
    pub leakage: f64,
    /// 2-norm condition number of the mode system.
    pub cond: f64,
    m: usize,
}

impl FactorizationResult {
    pub fn band(&self) -> usize {
        (-self.t_minus.lo()) as usize
    }

    /// Size of the sample grid the factors were computed on.
    pub fn samples_m(&self) -> usize {
        self.m
    }

    /// max_j |det T₊(z_j) − 1|.
    pub fn det_plus_deviation(&self) -> Result<f64> {
        let tp = inverse_transform(&self.t_plus, self.m)?;
        Ok(tp
            .dets()
            .iter()
            .map(|d| (d - linalg::ONE).norm())
            .fold(0.0, f64::max))
    }

    /// max_j |det T₋(z_j) − det γ(z_j)|.
    pub fn det_minus_deviation(&self, x: &CircleSamples) -> Result<f64> {
        let tm = inverse_transform(&self.t_minus, x.m())?;
        Ok(tm
            .dets()
            .iter()
            .zip(x.dets())
            .map(|(a, b)| (a - b).norm())
            .fold(0.0, f64::max))
    }

    /// Certificate block appended to reports.
    pub fn certificate(&self) -> String {
        format!(
            "{{ band: {}, residual: {:.6e}, leakage: {:.6e}, cond: {:.6e} }}",
            self.band(),
            self.residual,
            self.leakage,
            self.cond
        )
    }
}

/// γ⁻¹T₋ has no modes −1..−B: Σ_{k=1}^B (γ⁻¹)^{(k−r)} T₋^{(−k)} = −(γ⁻¹)^{(−r)}.
pub fn wiener_hopf(x: &CircleSamples, band: usize, tol: f64) -> Result<FactorizationResult> {
    let w = winding_number(x)?;
    if w != 0 {
        return Err(Error::Hypothesis(format!("det γ winds {w} times")));
    }
    let n = x.n();
    let m = x.m();
    let b = band.max(1);
    let (inv, _) = invert_symbol(x)?;
    let gi = transform(&inv, -(b as i64), b as i64 - 1)?;
    let mut a = CMat::zeros(n * b, n * b);
    let mut rhs = CMat::zeros(n * b, n);
    for r in 1..=b {
        for k in 1..=b {
            a.view_mut(((r - 1) * n, (k - 1) * n), (n, n))
                .copy_from(&gi.block(k as i64 - r as i64));
        }
        rhs.view_mut(((r - 1) * n, 0), (n, n))
            .copy_from(&(-gi.block(-(r as i64))));
    }
    let cond = linalg::cond2(&a);
    if !(cond <= MAX_SYSTEM_COND) {
        return Err(Error::Factorization(format!(
            "mode system condition {cond:.3e}; symbol is near the τ zero locus"
        )));
    }
    let sol = a
        .lu()
        .solve(&rhs)
        .ok_or_else(|| Error::Factorization("mode system is singular".into()))?;
    let mut t_minus = LaurentMatrix::zeros(n, -(b as i64), 0);
    *t_minus.block_mut(0) = linalg::identity(n);
    for k in 1..=b {
        *t_minus.block_mut(-(k as i64)) = sol.view(((k - 1) * n, 0), (n, n)).into_owned();
    }
    let tm = inverse_transform(&t_minus, m)?;
    let (tm_inv, _) = invert_symbol(&tm)?;
    let tp = tm_inv.zip_map(x, |a, g| a * g);
    let hi = (m / 2 - 1) as i64;
    let leakage = tail_fraction(&tp, 0, hi);
    let t_plus = transform(&tp, 0, hi)?;
    let tp_trunc = inverse_transform(&t_plus, m)?;
    let residual = (0..m)
        .map(|j| linalg::max_abs_diff(x.value(j), &(tm.value(j) * tp_trunc.value(j))))
        .fold(0.0, f64::max);
    if !(residual <= tol) || !(leakage <= tol) {
        return Err(Error::Factorization(format!(
            "band {b}: residual {residual:.3e}, leakage {leakage:.3e} above {tol:.1e}"
        )));
    }
    Ok(FactorizationResult {
        t_minus,
        t_plus,
        residual,
        leakage,
        cond,
        m,
    })
}

/// Starts from `symbol_band` + [`BAND_MARGIN`] and doubles B while the
/// certificates fail and B stays below M/8.
pub fn wiener_hopf_auto(x: &CircleSamples, symbol_band: usize, tol: f64) -> Result<FactorizationResult> {
    let mut b = symbol_band + BAND_MARGIN;
    loop {
        match wiener_hopf(x, b, tol) {
            Err(Error::Factorization(msg)) if 2 * b <= x.m() / 8 && !msg.contains("condition") => {
                b *= 2
            }
            r => return r,
        }
    }
}

/// γ = γ₊γ₋ with γ₊ on modes ≥ 0, γ₊^{(0)} = I, and γ₋ on modes ≤ 0.
#[derive(Clone, Debug)]
pub struct OppositeFactorization {
    pub plus: LaurentMatrix,
    pub minus: LaurentMatrix,
    pub residual: f64,
    pub leakage: f64,
}

/// Samples of γ(1/z): z_j⁻¹ = z_{M−j}.
pub fn reflect_samples(x: &CircleSamples) -> CircleSamples {
    let m = x.m();
    CircleSamples::new((0..m).map(|j| x.value((m - j) % m).clone()).collect())
        .expect("reflection keeps the grid size")
}

/// Runs [`wiener_hopf`] on γ(1/z) = T̂₋T̂₊ and maps back:
/// γ₊(z) = T̂₋(1/z), γ₋(z) = T̂₊(1/z).
pub fn opposite_factorization(x: &CircleSamples, band: usize, tol: f64) -> Result<OppositeFactorization> {
    let f = wiener_hopf(&reflect_samples(x), band, tol)?;
    Ok(OppositeFactorization {
        plus: f.t_minus.reflect(),
        minus: f.t_plus.reflect(),
        residual: f.residual,
        leakage: f.leakage,
    })
}

/// Ψ_W(−t̃;z) = exp(−ξ(t̃,Λ))T₋(t̃;z).
#[derive(Clone, Debug)]
pub struct WaveMatrix {
    pub psi: LaurentMatrix,
    /// Relative energy of exp(ξ)Ψ on positive modes (T₋ has none).
    pub positive_leak: f64,
}

pub fn wave_matrix(spec: &SymbolSpec, t: &TimeVector, fact: &FactorizationResult) -> Result<WaveMatrix> {
    let n = spec.n();
    let e_minus = exp_xi_auto(&t.neg(), n)?;
    let e_plus = exp_xi_auto(t, n)?;
    let tm = &fact.t_minus;
    let psi = lm_mul(&e_minus, tm, tm.lo(), e_minus.hi());
    let back = lm_mul(&e_plus, &psi, psi.lo(), psi.hi() + e_plus.hi());
    let total = back.total_energy();
    let positive_leak = if total == 0.0 {
        0.0
    } else {
        back.band_energy(1, back.hi()) / total
    };
    Ok(WaveMatrix { psi, positive_leak })
}

/// The τ-ratio corollary at level N, compared three ways.
#[derive(Clone, Debug)]
pub struct TauRatio {
    /// τ_{W,N}/τ_{W,N+1} from determinants of the GD symbol.
    pub ratio: Complex64,
    /// det of block (N,N) of T(Ψ)T(Ψ⁻¹).
    pub literal: Complex64,
    pub literal_residual: f64,
    /// det A_{≥N}/det A_{≥N+1} for A the compression of T(Ψ)T(Ψ⁻¹).
    pub schur: Complex64,
    pub schur_residual: f64,
    /// τ_W·det(I − K_N) with K from (Ψ, Ψ⁻¹).
    pub bo_tau: Complex64,
    pub tau_n: Complex64,
    pub bo_residual: f64,
}

/// Blocks kept beyond N when compressing T(Ψ)T(Ψ⁻¹).
const RATIO_SECTION: usize = 48;

pub fn tau_ratio_check(spec: &SymbolSpec, t: &TimeVector, nb: usize) -> Result<TauRatio> {
    let tau_n = crate::tau::tau_numeric(spec, t, nb)?;
    let tau_n1 = crate::tau::tau_numeric(spec, t, nb + 1)?;
    if tau_n1.norm() < 1e-12 {
        return Err(Error::DegenerateInput(format!(
            "τ_{{W,{}}} = {tau_n1:.3e} vanishes",
            nb + 1
        )));
    }
    let ratio = tau_n / tau_n1;
    let depth = spec.default_depth();
    let sym = crate::symbols::gd_symbol_auto(spec, t, depth)?;
    let m = crate::laurent::DEFAULT_SAMPLES
        .max((4 * (sym.hi() - sym.lo() + 1) as usize).next_power_of_two());
    let x = inverse_transform(&sym, m)?;
    let fact = wiener_hopf_auto(&x, (-sym.lo()) as usize, DEFAULT_TOL)?;
    let wave = wave_matrix(spec, t, &fact)?;
    let mw = m.max((4 * (wave.psi.hi() - wave.psi.lo() + 1) as usize).next_power_of_two());
    let psi_s = inverse_transform(&wave.psi, mw)?;
    let (psi_inv_s, _) = invert_symbol(&psi_s)?;
    let half = (mw / 4 - 1) as i64;
    let psi_c = transform(&psi_s, -half, half)?;
    let psi_inv = transform(&psi_inv_s, -half, half)?;
    let p = plemelj_fourier(&psi_c, &psi_inv, nb + 1 + RATIO_SECTION, DEFAULT_TAIL_TOL)?;
    let literal = linalg::det(&p.block(nb, nb));
    let schur = linalg::det(&p.compression(nb)) / linalg::det(&p.compression(nb + 1));
    let tau_w = crate::tau::tau_stable(spec, t, 1e-12)?.value;
    let bo_tau = tau_w * linalg::det(&p.compression(nb));
    let scale = ratio.norm().max(1.0);
    Ok(TauRatio {
        ratio,
        literal,
        literal_residual: (literal - ratio).norm() / scale,
        schur,
        schur_residual: (schur - ratio).norm() / scale,
        bo_tau,
        tau_n,
        bo_residual: (bo_tau - tau_n).norm() / tau_n.norm().max(1.0),
    })
}
