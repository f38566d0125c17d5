//! τ_{W,N} as D_N of the GD symbol, numerically and in the graded ring; its
//! character expansion, stabilization in N and the stable limit τ_W.

mod wave;
mod wronskian;

pub use wave::{wave_function, wave_function_at_zero};
pub use wronskian::{
    delta_action, f_family, f_family_exact, generic_base, kernel_facts_check, lemma_wronsky_residual,
    recursion_check, wronskian_tau, FFamily, KernelFacts, RecursionReport,
};

use std::collections::BTreeMap;

use num_complex::Complex64;

use crate::error::{Error, Result};
use crate::gradedpoly::{jacobi_trudi_with, GradedPoly, Partition, SchurSequence};
use crate::laurent::{adaptive_transform, LaurentMatrix};
use crate::linalg::ZERO;
use crate::report::{fmt_f64, Csv};
use crate::ring;
use crate::symbols::{gd_symbol_auto, gd_symbol_graded, xi_column, SymbolSpec, TimeVector};
use crate::toeplitz::{build_tn, fredholm_det, plemelj_fourier, FredholmDet, DEFAULT_TAIL_TOL};

/// Which times the graded engine keeps.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct GradedOptions {
    /// t₁..t_K are kept; K ≤ 16.
    pub num_times: usize,
    /// Freeze t_{kn} to zero.
    pub gd_reduced: bool,
}

impl GradedOptions {
    pub fn for_degree(q: usize, gd_reduced: bool) -> GradedOptions {
        GradedOptions {
            num_times: q.clamp(1, crate::gradedpoly::MAX_TIMES),
            gd_reduced,
        }
    }

    pub fn schur(&self, n: usize, q: usize) -> SchurSequence {
        let reduced = self.gd_reduced;
        SchurSequence::with_frozen(self.num_times, q, |i| reduced && i % n == 0)
    }
}

/// A τ_{W,N} either sampled at points or held as a graded polynomial.
#[derive(Clone, Debug)]
pub enum TauRepresentation {
    Numeric(Vec<(Vec<Complex64>, Complex64)>),
    Graded(GradedPoly),
}

#[derive(Clone, Debug)]
pub struct TauSeries {
    pub spec: SymbolSpec,
    pub blocks: usize,
    pub repr: TauRepresentation,
}

/// det T_N(𝒲(t;z)).
pub fn tau_numeric(spec: &SymbolSpec, t: &TimeVector, nb: usize) -> Result<Complex64> {
    let lm = gd_symbol_auto(spec, t, spec.default_depth().max(nb + 1))?;
    Ok(build_tn(&lm, nb).det())
}

/// Graded blocks of T_N(𝒲(t;z)) as an nN × nN matrix.
fn graded_section(spec: &SymbolSpec, nb: usize, schur: &SchurSequence) -> Vec<Vec<GradedPoly>> {
    let n = spec.n();
    let span = nb as i64 - 1;
    let sym = gd_symbol_graded(spec, schur, -span, span);
    let mut m = vec![vec![GradedPoly::zero(schur.get(0).num_times(), schur.get(0).cutoff()); n * nb]; n * nb];
    for i in 0..nb {
        for j in 0..nb {
            let s = i as i64 - j as i64;
            for r in 0..n {
                for c in 0..n {
                    if let Some(p) = sym.entry(s, r, c) {
                        m[i * n + r][j * n + c] = p.clone();
                    }
                }
            }
        }
    }
    m
}

/// τ_{W,N} to weighted degree Q by elimination in the graded ring.
pub fn tau_graded(spec: &SymbolSpec, nb: usize, q: usize, opts: GradedOptions) -> Result<GradedPoly> {
    let schur = opts.schur(spec.n(), q);
    ring::det(&graded_section(spec, nb, &schur))
}

/// ω₁..ω_{nN}: ω_{ns+j}(z) = z^{ns} Ξ(column j of 𝒲)(z).
pub fn omegas(spec: &SymbolSpec, nb: usize, depth: usize) -> Vec<LaurentMatrix> {
    let n = spec.n();
    let w = spec.w_coeffs(depth);
    let cols: Vec<LaurentMatrix> = (0..n).map(|j| xi_column(&w, j)).collect();
    let mut out = Vec::with_capacity(n * nb);
    for s in 0..nb {
        for col in &cols {
            let shift = (n * s) as i64;
            let blocks = (col.lo()..=col.hi()).map(|k| col.block(k)).collect();
            out.push(LaurentMatrix::from_blocks(col.lo() + shift, blocks));
        }
    }
    out
}

fn omega_coeff(w: &LaurentMatrix, k: i64) -> Complex64 {
    w.get(k).map(|b| b[(0, 0)]).unwrap_or(ZERO)
}

/// sign and partition of the alternant with exponents l_j + m − j; None when
/// two exponents coincide.
pub fn straighten(l: &[usize]) -> Option<(f64, Partition)> {
    let m = l.len();
    let mut a: Vec<i64> = l
        .iter()
        .enumerate()
        .map(|(j, lj)| *lj as i64 + (m - 1 - j) as i64)
        .collect();
    let mut sign = 1.0;
    // insertion sort into decreasing order, counting transpositions
    for i in 1..m {
        let mut j = i;
        while j > 0 && a[j - 1] < a[j] {
            a.swap(j - 1, j);
            sign = -sign;
            j -= 1;
        }
    }
    if a.windows(2).any(|w| w[0] == w[1]) {
        return None;
    }
    let parts: Vec<usize> = a
        .iter()
        .enumerate()
        .map(|(k, ak)| (*ak - (m - 1 - k) as i64) as usize)
        .collect();
    Some((sign, Partition::new(&parts).expect("sorted exponents give a partition")))
}

fn tuples(m: usize, q: usize, f: &mut impl FnMut(&[usize])) {
    fn rec(cur: &mut Vec<usize>, m: usize, left: usize, f: &mut impl FnMut(&[usize])) {
        if cur.len() == m {
            f(cur);
            return;
        }
        for v in 0..=left {
            cur.push(v);
            rec(cur, m, left - v, f);
            cur.pop();
        }
    }
    rec(&mut Vec::with_capacity(m), m, q, f);
}

/// Σ over l-tuples of Π_i ω_i^{(−l_i+i−1)}, collected by the partition of
/// the straightened character χ_l.
pub fn character_expansion(spec: &SymbolSpec, nb: usize, q: usize) -> BTreeMap<Partition, Complex64> {
    let om = omegas(spec, nb, q + 2);
    let m = om.len();
    let mut out: BTreeMap<Partition, Complex64> = BTreeMap::new();
    tuples(m, q, &mut |l| {
        let mut coeff = Complex64::new(1.0, 0.0);
        for (i, li) in l.iter().enumerate() {
            coeff *= omega_coeff(&om[i], i as i64 - *li as i64);
            if coeff == ZERO {
                return;
            }
        }
        if let Some((sign, p)) = straighten(l) {
            *out.entry(p).or_insert(ZERO) += coeff * sign;
        }
    });
    out.retain(|_, v| v.norm() > 0.0);
    out
}

/// Σ_λ c_λ s_λ(t) via Jacobi-Trudi.
pub fn reassemble(chars: &BTreeMap<Partition, Complex64>, schur: &SchurSequence) -> GradedPoly {
    let z = schur.get(0);
    let mut acc = GradedPoly::zero(z.num_times(), z.cutoff());
    for (p, c) in chars {
        if p.weight() <= z.cutoff() {
            acc = acc.add(&jacobi_trudi_with(p, schur).scale(*c));
        }
    }
    acc
}

/// Coefficientwise comparison of τ_{W,N} and τ_{W,N+1}.
#[derive(Clone, Debug)]
pub struct StabilityReport {
    pub n_blocks: usize,
    pub q: usize,
    /// Largest coefficient difference in each weighted degree 0..=Q.
    pub by_degree: Vec<f64>,
}

impl StabilityReport {
    /// Largest difference over degrees ≤ min(N, Q).
    pub fn stable_part(&self) -> f64 {
        self.by_degree[..=self.n_blocks.min(self.q)]
            .iter()
            .cloned()
            .fold(0.0, f64::max)
    }
}

pub fn stability_check(spec: &SymbolSpec, nb: usize, q: usize, opts: GradedOptions) -> Result<StabilityReport> {
    let a = tau_graded(spec, nb, q, opts)?;
    let b = tau_graded(spec, nb + 1, q, opts)?;
    let by_degree = (0..=q)
        .map(|d| a.homogeneous(d).max_diff(&b.homogeneous(d)))
        .collect();
    Ok(StabilityReport {
        n_blocks: nb,
        q,
        by_degree,
    })
}

/// τ_W(t̃) = det 𝒫 together with the tail of the D_N sequence.
#[derive(Clone, Debug)]
pub struct StableTau {
    pub value: Complex64,
    pub fredholm: FredholmDet,
    pub tail: Vec<(usize, Complex64)>,
}

/// Blocks of the Plemelj section used for τ_W.
pub const STABLE_BLOCKS: usize = 64;

pub fn tau_stable(spec: &SymbolSpec, t: &TimeVector, tol: f64) -> Result<StableTau> {
    let n = spec.n();
    if t.values()
        .iter()
        .enumerate()
        .any(|(i, v)| (i + 1) % n == 0 && *v != ZERO)
    {
        return Err(Error::Hypothesis(format!(
            "times t_k with n = {n} dividing k must vanish"
        )));
    }
    let depth = spec.default_depth();
    let lm = gd_symbol_auto(spec, t, depth)?;
    let (lm_inv, _) = adaptive_transform(
        |z| {
            spec.gd_inv_eval(t, z)
                .unwrap_or_else(|| crate::linalg::zeros(n))
        },
        -(depth as i64),
        lm.hi(),
    )?;
    let p = plemelj_fourier(&lm, &lm_inv, STABLE_BLOCKS, DEFAULT_TAIL_TOL)?;
    let fredholm = fredholm_det(&p, tol)?;
    let tail = (1..=8).map(|nb| (nb, build_tn(&lm, nb).det())).collect();
    Ok(StableTau {
        value: fredholm.value,
        fredholm,
        tail,
    })
}

/// Closed-form 2-soliton value cosh θ_d cosh θ_c − (d/c) sinh θ_d sinh θ_c
/// with θ_x = Σ_i t_{2i+1} x^{2i+1}.
pub fn two_soliton(d: Complex64, c: Complex64, t: &[Complex64]) -> Complex64 {
    let theta = |x: Complex64| -> Complex64 {
        t.iter()
            .enumerate()
            .filter(|(i, _)| i % 2 == 0)
            .map(|(i, ti)| ti * x.powu(i as u32 + 1))
            .sum()
    };
    let (td, tc) = (theta(d), theta(c));
    td.cosh() * tc.cosh() - d / c * td.sinh() * tc.sinh()
}

/// One row of the tau table; `blocks` is `None` for the stable limit τ_W.
#[derive(Clone, Debug, PartialEq)]
pub struct TauRow {
    pub t: Vec<Complex64>,
    pub blocks: Option<usize>,
    pub tau: Complex64,
    pub est_error: f64,
}

/// Rows (t₁, t₂, …, N, tau_re, tau_im, est_error) with the times t_k,
/// n | k, left out since the reduction freezes them. The stable row has
/// N = inf. Times are written by their real parts.
pub fn tau_table_csv(num_times: usize, n: usize, rows: &[TauRow]) -> String {
    let kept: Vec<usize> = (1..=num_times).filter(|i| i % n != 0).collect();
    let mut header: Vec<String> = kept.iter().map(|i| format!("t{i}")).collect();
    header.extend(["N", "tau_re", "tau_im", "est_error"].map(String::from));
    let h: Vec<&str> = header.iter().map(|s| s.as_str()).collect();
    let mut csv = Csv::new(&h);
    for row in rows {
        let mut cells: Vec<String> = kept
            .iter()
            .map(|i| fmt_f64(row.t.get(i - 1).map_or(0.0, |x| x.re)))
            .collect();
        cells.push(row.blocks.map_or_else(|| "inf".to_string(), |nb| nb.to_string()));
        cells.push(fmt_f64(row.tau.re));
        cells.push(fmt_f64(row.tau.im));
        cells.push(fmt_f64(row.est_error));
        csv.row(&cells);
    }
    csv.finish()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::linalg::c;
    use crate::symbols::{covering_spec, rational_spec};

    fn rational() -> SymbolSpec {
        rational_spec(&[c(0.3, 0.0), c(0.6, 0.0)]).unwrap()
    }

    #[test]
    fn tau_at_zero_is_one() {
        let specs = [
            rational(),
            covering_spec(&[c(0.2, 0.0), c(-0.3, 0.1), c(0.1, -0.4)], 2).unwrap(),
        ];
        for s in &specs {
            for nb in 1..=4 {
                let t = TimeVector::zero(6, s.n());
                assert!((tau_numeric(s, &t, nb).unwrap() - 1.0).norm() < 1e-12);
            }
        }
    }

    #[test]
    fn straighten_rules() {
        assert_eq!(straighten(&[0, 0, 0]).unwrap().1, Partition::empty());
        // l = (0, 1): exponents (1, 1) repeat
        assert!(straighten(&[0, 1]).is_none());
        // l = (0, 2): exponents (1, 2) → (2, 1), partition (1, 1), sign −1
        let (s, p) = straighten(&[0, 2]).unwrap();
        assert_eq!(s, -1.0);
        assert_eq!(p, Partition::new(&[1, 1]).unwrap());
    }

    #[test]
    fn graded_matches_numeric_at_small_times() {
        let s = rational();
        let q = 8;
        let opts = GradedOptions::for_degree(q, true);
        let g = tau_graded(&s, 1, q, opts).unwrap();
        let tv = [c(0.01, 0.0), ZERO, c(-0.02, 0.0)];
        let t = TimeVector::new(&tv, 2, true);
        let num = tau_numeric(&s, &t, 1).unwrap();
        let mut pt = tv.to_vec();
        pt.resize(q, ZERO);
        assert!((g.evaluate(&pt) - num).norm() < 1e-10);
    }

    #[test]
    fn two_soliton_oracle_value() {
        let t = [c(0.5, 0.0), ZERO, c(0.1, 0.0)];
        let v = two_soliton(c(0.3, 0.0), c(0.6, 0.0), &t);
        assert!((v.re - 1.0393743479762088).abs() < 1e-15);
    }

    #[test]
    fn tau_stable_rejects_unreduced_times() {
        let t = TimeVector::new(&[ZERO, c(0.1, 0.0)], 2, false);
        assert!(matches!(tau_stable(&rational(), &t, 1e-10), Err(Error::Hypothesis(_))));
    }
}
