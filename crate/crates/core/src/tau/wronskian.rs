//! f_{s,N}, the Wronskian form of τ_{W,N}, the operator Δ_{W,N} and the
//! kernel and recursion facts around it.

use num_complex::Complex64;

use super::{omega_coeff, omegas, GradedOptions};
use crate::error::{Error, Result};
use crate::gradedpoly::{GradedPoly, MAX_TIMES};
use crate::ring::{
    apply_factored, factor_potentials, monic_from_kernel, wronskian, DiffOperator, DiffRing, Jet,
};
use crate::symbols::SymbolSpec;

/// f_{1,N}..f_{nN,N} held to weighted degree `q_ext`; results derived from
/// them are reported to degree `q`.
#[derive(Clone, Debug)]
pub struct FFamily {
    pub n: usize,
    pub blocks: usize,
    pub q: usize,
    pub q_ext: usize,
    pub opts: GradedOptions,
    pub fs: Vec<GradedPoly>,
}

impl FFamily {
    pub fn len(&self) -> usize {
        self.fs.len()
    }

    pub fn is_empty(&self) -> bool {
        self.fs.is_empty()
    }

    /// f_{s,N}, one-based.
    pub fn f(&self, s: usize) -> &GradedPoly {
        &self.fs[s - 1]
    }

    pub fn num_times(&self) -> usize {
        self.opts.num_times
    }

    pub fn delta_operator(&self) -> Result<DiffOperator<GradedPoly>> {
        monic_from_kernel(&self.fs)
    }

    /// A graded polynomial at this family's cutoff.
    pub fn lift(&self, g: &GradedPoly) -> GradedPoly {
        g.with_cutoff(self.q_ext)
    }

    pub fn jets(&self, base: &[Complex64], order: usize) -> Vec<Jet> {
        self.fs.iter().map(|f| Jet::from_graded(f, base, order)).collect()
    }
}

/// f_{s,N} = Σ_k ω_s^{(−k)} p_{k+nN−1}, built to degree `q_ext`.
pub fn f_family_to(spec: &SymbolSpec, nb: usize, q: usize, q_ext: usize, opts: GradedOptions) -> FFamily {
    let n = spec.n();
    let m = n * nb;
    let om = omegas(spec, nb, q_ext + 2);
    let schur = opts.schur(n, q_ext);
    let mut fs = Vec::with_capacity(m);
    for w in &om {
        let mut f = GradedPoly::zero(opts.num_times, q_ext);
        let k_lo = 1 - m as i64;
        let k_hi = q_ext as i64 + 1 - m as i64;
        for k in k_lo..=k_hi {
            let c = omega_coeff(w, -k);
            if c != Complex64::default() {
                f = f.add(&schur.get(k + m as i64 - 1).scale(c));
            }
        }
        fs.push(f);
    }
    FFamily {
        n,
        blocks: nb,
        q,
        q_ext,
        opts,
        fs,
    }
}

/// Margin n(N+2) over Q, enough for Δ_{W,N}, Δ_{W,N}Dⁿ and the step to N+1.
pub fn f_family(spec: &SymbolSpec, nb: usize, q: usize, opts: GradedOptions) -> FFamily {
    f_family_to(spec, nb, q, q + spec.n() * (nb + 2), opts)
}

/// For band-limited 𝒲 the f's are polynomials; this builds them exactly,
/// with every time up to their top weight kept.
pub fn f_family_exact(spec: &SymbolSpec, nb: usize, gd_reduced: bool) -> Result<FFamily> {
    if !spec.is_band_limited() {
        return Err(Error::Spec(format!(
            "{} family has infinitely many modes; f's are not polynomials",
            spec.family_name()
        )));
    }
    let n = spec.n();
    let m = n * nb;
    let om = omegas(spec, nb, 0);
    let top = om
        .iter()
        .map(|w| (-w.lo()) as usize)
        .max()
        .unwrap_or(0)
        + m
        - 1;
    if top > MAX_TIMES {
        return Err(Error::Spec(format!("f's reach weight {top}, above {MAX_TIMES} times")));
    }
    let opts = GradedOptions {
        num_times: top.max(1),
        gd_reduced,
    };
    Ok(f_family_to(spec, nb, top, top, opts))
}

/// Wr(f_{1,N},…,f_{nN,N}) to degree Q.
pub fn wronskian_tau(ff: &FFamily) -> Result<GradedPoly> {
    Ok(wronskian(&ff.fs)?.truncate(ff.q))
}

/// Δ_{W,N}(g) = Wr(g, f₁…f_{nN})/Wr(f₁…f_{nN}) to degree Q.
pub fn delta_action(ff: &FFamily, g: &GradedPoly) -> Result<GradedPoly> {
    Ok(ff.delta_operator()?.apply(&ff.lift(g)).truncate(ff.q))
}

fn max_abs_head(j: &Jet, len: usize) -> f64 {
    j.head(len).max_abs()
}

/// Largest |(D+T_m)…(D+T₁) g_i| with T_j from [`factor_potentials`].
pub fn lemma_wronsky_residual<R: DiffRing>(gs: &[R], measure: impl Fn(&R) -> f64) -> Result<f64> {
    let ts = factor_potentials(gs)?;
    Ok(gs
        .iter()
        .map(|g| measure(&apply_factored(&ts, g)))
        .fold(0.0, f64::max))
}

#[derive(Clone, Debug)]
pub struct KernelFacts {
    /// max_i |Δ_{W,N} f_{i,N}| over i ≤ nN.
    pub kernel: f64,
    /// max_i |Δ_{W,N} Dⁿ f_{i,N}| over n < i ≤ nN.
    pub dn_kernel: f64,
    /// f_{s,N+1} = f_{s−n,N} and Dⁿ f_{s+n,N} = f_{s,N}.
    pub symmetry1: f64,
    pub symmetry2: f64,
    /// Constant terms of Wr(f_{n+1..nN}, f_1..f_j), j = 1..n; zero means
    /// K_{j,N} has a pole at t = 0.
    pub denominators_at_zero: Vec<Complex64>,
    /// K_{j,N} as jets along t* + x e₁ (band-limited families only).
    pub k_jets: Option<Vec<Jet>>,
    /// (D+K_n)…(D+K_1) applied to Wr(f_{n+1..nN}, f_j)/Wr(f_{n+1..nN}).
    pub k_factor_residual: Option<f64>,
}

impl KernelFacts {
    pub fn worst(&self) -> f64 {
        [
            self.kernel,
            self.dn_kernel,
            self.symmetry1,
            self.symmetry2,
            self.k_factor_residual.unwrap_or(0.0),
        ]
        .into_iter()
        .fold(0.0, f64::max)
    }
}

/// Jet order used along the line through t*.
pub const JET_ORDER: usize = 24;

/// Base point t₁ = 1, t_i = 1/10 for the jet checks. Jets are Taylor
/// expansions along t₁, so the base must keep the Wronskians away from
/// zero; near t = 0 they vanish.
pub fn generic_base(num_times: usize) -> Vec<Complex64> {
    (0..num_times)
        .map(|i| Complex64::new(if i == 0 { 1.0 } else { 0.1 }, 0.0))
        .collect()
}

fn reordered<T: Clone>(fs: &[T], n: usize) -> Vec<T> {
    fs[n..].iter().chain(fs[..n].iter()).cloned().collect()
}

pub fn kernel_facts_check(
    spec: &SymbolSpec,
    nb: usize,
    q: usize,
    opts: GradedOptions,
    base: &[Complex64],
) -> Result<KernelFacts> {
    let n = spec.n();
    let m = n * nb;
    let ff = f_family(spec, nb, q, opts);
    let op = ff.delta_operator()?;
    let kernel = ff
        .fs
        .iter()
        .map(|f| op.apply(f).truncate(q).max_abs())
        .fold(0.0, f64::max);
    let dn_kernel = ff.fs[n..]
        .iter()
        .map(|f| op.apply(&f.d_n(n)).truncate(q).max_abs())
        .fold(0.0, f64::max);
    let next = f_family_to(spec, nb + 1, q, ff.q_ext, opts);
    let symmetry1 = (n + 1..=n * (nb + 1))
        .map(|s| next.f(s).max_diff(ff.f(s - n)))
        .fold(0.0, f64::max);
    let valid = ff.q_ext - n;
    let symmetry2 = (1..=m.saturating_sub(n))
        .map(|s| {
            ff.f(s + n)
                .d_n(n)
                .truncate(valid)
                .max_diff(&ff.f(s).truncate(valid))
        })
        .fold(0.0, f64::max);
    let order = reordered(&ff.fs, n);
    let mut denominators_at_zero = Vec::with_capacity(n);
    for j in 1..=n {
        denominators_at_zero.push(wronskian(&order[..m - n + j])?.constant_term());
    }
    let (k_jets, k_factor_residual) = if spec.is_band_limited() {
        let exact = f_family_exact(spec, nb, opts.gd_reduced)?;
        let jets = reordered(&exact.jets(base, JET_ORDER), n);
        let ts = factor_potentials(&jets)?;
        let ks: Vec<Jet> = ts[m - n..].to_vec();
        let prefix = &jets[..m - n];
        let mut worst: f64 = 0.0;
        for j in 0..n {
            let u = if prefix.is_empty() {
                jets[m - n + j].clone()
            } else {
                monic_from_kernel(prefix)?.apply(&jets[m - n + j])
            };
            let r = apply_factored(&ks, &u);
            worst = worst.max(max_abs_head(&r, JET_ORDER + 1 - 2 * m));
        }
        (Some(ks), Some(worst))
    } else {
        (None, None)
    };
    Ok(KernelFacts {
        kernel,
        dn_kernel,
        symmetry1,
        symmetry2,
        denominators_at_zero,
        k_jets,
        k_factor_residual,
    })
}

#[derive(Clone, Debug)]
pub struct RecursionReport {
    /// |Δ_{W,N+1} g − 𝒯_N Δ_{W,N} g| per basket entry, graded, 𝒯_N monic.
    pub graded: Vec<f64>,
    /// Same with 𝒯_N = (D+T_n)…(D+T_1) on jets at t*.
    pub factored: Option<Vec<f64>>,
    /// max_i |Δ_{W,N+1} f_{i,N+1}| and |𝒯_N Δ_{W,N} f_{i,N+1}|.
    pub kernel: f64,
    /// |Δ_{W,N+1}(1)| (generically nonzero).
    pub one_magnitude: f64,
}

impl RecursionReport {
    pub fn worst(&self) -> f64 {
        self.graded
            .iter()
            .chain(self.factored.iter().flatten())
            .cloned()
            .fold(self.kernel, f64::max)
    }
}

/// Checks Δ_{W,N+1} = 𝒯_N Δ_{W,N} on the basket `gs` (given to any cutoff
/// at least Q; they are treated as exact polynomials).
pub fn recursion_check(
    spec: &SymbolSpec,
    nb: usize,
    q: usize,
    opts: GradedOptions,
    gs: &[GradedPoly],
    base: &[Complex64],
) -> Result<RecursionReport> {
    let n = spec.n();
    let ff = f_family(spec, nb, q, opts);
    let ff1 = f_family_to(spec, nb + 1, q, ff.q_ext, opts);
    let d_n = ff.delta_operator()?;
    let d_n1 = ff1.delta_operator()?;
    let hs: Vec<GradedPoly> = ff1.fs[..n].iter().map(|f| d_n.apply(f)).collect();
    let t_op = monic_from_kernel(&hs)?;
    let both = |g: &GradedPoly| -> (GradedPoly, GradedPoly) {
        let g = ff.lift(g);
        (
            d_n1.apply(&g).truncate(q),
            t_op.apply(&d_n.apply(&g)).truncate(q),
        )
    };
    let graded = gs
        .iter()
        .map(|g| {
            let (a, b) = both(g);
            a.max_diff(&b)
        })
        .collect();
    let mut kernel: f64 = 0.0;
    for f in &ff1.fs {
        let (a, b) = both(f);
        kernel = kernel.max(a.max_abs()).max(b.max_abs());
    }
    let one = GradedPoly::one(ff.num_times(), ff.q_ext);
    let one_magnitude = both(&one).0.max_abs();
    let factored = if spec.is_band_limited() {
        let e = f_family_exact(spec, nb, opts.gd_reduced)?;
        let e1 = f_family_exact(spec, nb + 1, opts.gd_reduced)?;
        let jn = e.jets(base, JET_ORDER);
        let jn1 = e1.jets(base, JET_ORDER);
        let dj = monic_from_kernel(&jn)?;
        let dj1 = monic_from_kernel(&jn1)?;
        let hj: Vec<Jet> = jn1[..n].iter().map(|f| dj.apply(f)).collect();
        let ts = factor_potentials(&hj)?;
        let valid = JET_ORDER + 1 - n * (nb + 1) - n * (nb + 1);
        Some(
            gs.iter()
                .map(|g| {
                    let gj = Jet::from_graded(g, base, JET_ORDER);
                    let a = dj1.apply(&gj);
                    let b = apply_factored(&ts, &dj.apply(&gj));
                    max_abs_head(&a.sub(&b), valid)
                })
                .collect(),
        )
    } else {
        None
    };
    Ok(RecursionReport {
        graded,
        factored,
        kernel,
        one_magnitude,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::linalg::c;
    use crate::symbols::rational_spec;
    use crate::tau::tau_graded;

    fn rational() -> SymbolSpec {
        rational_spec(&[c(0.3, 0.0), c(0.6, 0.0)]).unwrap()
    }

    #[test]
    fn identity_symbol_gives_shifted_schur() {
        let s = rational_spec(&[c(0.0, 0.0), c(0.0, 0.0)]).unwrap();
        let opts = GradedOptions::for_degree(6, false);
        let ff = f_family(&s, 2, 6, opts);
        let schur = opts.schur(2, ff.q_ext);
        for sidx in 1..=4 {
            assert!(ff.f(sidx).max_diff(schur.get(4 - sidx as i64)) < 1e-15);
        }
        assert!((wronskian_tau(&ff).unwrap().max_diff(&GradedPoly::one(6, 6))) < 1e-15);
    }

    #[test]
    fn wronskian_equals_graded_tau() {
        let s = rational();
        let opts = GradedOptions::for_degree(6, true);
        let ff = f_family(&s, 2, 6, opts);
        let w = wronskian_tau(&ff).unwrap();
        let t = tau_graded(&s, 2, 6, opts).unwrap();
        assert!(w.max_diff(&t) < 1e-10, "{}", w.max_diff(&t));
    }

    #[test]
    fn delta_kills_generators() {
        let s = rational();
        let opts = GradedOptions::for_degree(6, true);
        let ff = f_family(&s, 1, 6, opts);
        for f in &ff.fs {
            assert!(delta_action(&ff, f).unwrap().max_abs() < 1e-10);
        }
    }

    #[test]
    fn exact_family_has_polynomial_degree() {
        let ff = f_family_exact(&rational(), 1, true).unwrap();
        assert_eq!(ff.q_ext, 3);
        assert!(f_family_exact(
            &crate::symbols::covering_spec(&[c(0.1, 0.0), c(0.2, 0.0), c(0.3, 0.0)], 2).unwrap(),
            1,
            true
        )
        .is_err());
    }
}
