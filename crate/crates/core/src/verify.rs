//! The invariant suite behind `gdtau verify`: one row per invariant of every
//! module, evaluated in parallel and reported in a fixed order.

use std::collections::BTreeSet;

use num_complex::Complex64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;

use crate::algebro::{
    bc_matrices, branch_series, column_span_residual, reconstruct_w, CharPoly, DEFAULT_BAND,
    DEFAULT_BRANCH_TERMS,
};
use crate::config::RunConfig;
use crate::error::Result;
use crate::factorization::{opposite_factorization, wiener_hopf, wiener_hopf_auto, DEFAULT_TOL};
use crate::gradedpoly::{
    character, hirota_kdv_residual, jacobi_trudi, miwa_times, partitions_up_to, schur_sequence,
    GradedPoly, Monomial,
};
use crate::laurent::{
    admissibility, adaptive_transform, geometric_mean, inverse_transform, invert_symbol, lm_mul,
    transform, CircleSamples, LaurentMatrix,
};
use crate::linalg::{self, c, CMat, ONE};
use crate::report::{fmt_f64, Csv};
use crate::symbols::{
    covering_spec, exp_xi_auto, lambda_power, rational_spec, xi_column, SymbolSpec, TimeVector,
};
use crate::tau::{
    character_expansion, f_family, reassemble, stability_check, tau_graded, tau_numeric,
    tau_stable, two_soliton, wronskian_tau, GradedOptions,
};
use crate::toeplitz::{
    borodin_okounkov, fredholm_det, plemelj_fourier, plemelj_quadrature, quadrature_radii,
    szego_widom, RadialSamples, DEFAULT_TAIL_TOL,
};

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Status {
    Pass,
    Fail,
    /// Measured and printed, not asserted.
    Report,
}

impl Status {
    pub fn label(self) -> &'static str {
        match self {
            Status::Pass => "PASS",
            Status::Fail => "FAIL",
            Status::Report => "REPORT",
        }
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct CheckRow {
    pub module: &'static str,
    pub invariant: &'static str,
    pub value: f64,
    pub tol: Option<f64>,
    pub status: Status,
    pub detail: String,
}

/// Inputs of a suite run. Checks tied to a named family use the reference
/// symbols below; the rest use the configured symbol and times.
#[derive(Clone, Debug)]
pub struct Suite {
    pub config: RunConfig,
    pub seed: u64,
    /// Replaces every row tolerance when set.
    pub tol_override: Option<f64>,
}

struct Outcome {
    value: f64,
    detail: String,
}

fn outcome(value: f64, detail: impl Into<String>) -> Result<Outcome> {
    Ok(Outcome {
        value,
        detail: detail.into(),
    })
}

struct CheckDef {
    module: &'static str,
    invariant: &'static str,
    /// `None` marks a report-only row.
    tol: Option<f64>,
    run: fn(&Suite, &mut ChaCha8Rng) -> Result<Outcome>,
}

const CHECKS: &[CheckDef] = &[
    CheckDef { module: "gradedpoly", invariant: "ring axioms on random triples, Q = 10", tol: Some(1e-12), run: ring_axioms },
    CheckDef { module: "gradedpoly", invariant: "d/dt_i p_k = p_{k-i}, 1 <= i <= k <= Q", tol: Some(1e-12), run: schur_derivative },
    CheckDef { module: "gradedpoly", invariant: "character = jacobi_trudi o miwa_times, weight <= 6", tol: Some(1e-10), run: character_vs_jacobi_trudi },
    CheckDef { module: "gradedpoly", invariant: "a * invert(a) = 1 mod degree Q", tol: Some(1e-12), run: graded_inverse },
    CheckDef { module: "laurent", invariant: "transform o inverse_transform = identity", tol: Some(1e-12), run: transform_round_trip },
    CheckDef { module: "laurent", invariant: "norm_2half invariant under z -> 1/z", tol: Some(1e-12), run: norm_reflection },
    CheckDef { module: "laurent", invariant: "geometric_mean multiplicative", tol: Some(1e-10), run: geometric_mean_product },
    CheckDef { module: "symbols", invariant: "Lambda^a Lambda^b = Lambda^{a+b}, a, b <= 2n", tol: Some(1e-14), run: lambda_powers },
    CheckDef { module: "symbols", invariant: "exp_xi(t) exp_xi(-t) = I on the band interior", tol: Some(1e-10), run: exp_xi_inverse },
    CheckDef { module: "symbols", invariant: "det gd_symbol = det W on samples", tol: Some(1e-10), run: unimodular_flow },
    CheckDef { module: "symbols", invariant: "xi_map(Lambda f) = z xi_map(f)", tol: Some(1e-14), run: xi_intertwining },
    CheckDef { module: "toeplitz", invariant: "plemelj_fourier = plemelj_quadrature, |t_i| <= 1", tol: Some(1e-8), run: plemelj_equality },
    CheckDef { module: "toeplitz", invariant: "D_N/G^N Cauchy ratio < 1", tol: Some(1.0), run: cauchy_ratio },
    CheckDef { module: "toeplitz", invariant: "Borodin-Okounkov residual, rational, N <= 4", tol: Some(1e-8), run: borodin_okounkov_residual },
    CheckDef { module: "toeplitz", invariant: "fredholm_det invariant under M and band doubling", tol: Some(1e-9), run: fredholm_doubling },
    CheckDef { module: "tau", invariant: "tau_N(0) = 1, N <= 4", tol: Some(1e-12), run: tau_at_zero },
    CheckDef { module: "tau", invariant: "graded = character = Wronskian, N <= 3, Q = 6", tol: Some(1e-10), run: triple_route },
    CheckDef { module: "tau", invariant: "stability N vs N+1 to degree min(N, Q)", tol: Some(1e-12), run: stability },
    CheckDef { module: "tau", invariant: "KdV bilinear residual, Q = 8", tol: Some(1e-8), run: kdv_residual },
    CheckDef { module: "tau", invariant: "tau_stable = 2-soliton on a 5x5 grid (relative)", tol: Some(1e-6), run: two_soliton_grid },
    CheckDef { module: "factorization", invariant: "gamma - T_- T_+ sample residual", tol: Some(1e-8), run: factorization_residual },
    CheckDef { module: "factorization", invariant: "T_- agrees between bands B and 2B", tol: Some(1e-9), run: band_uniqueness },
    CheckDef { module: "factorization", invariant: "det T_+ = 1 and det T_- = det gamma", tol: Some(1e-8), run: factor_determinants },
    CheckDef { module: "factorization", invariant: "condition growth toward a tau zero", tol: None, run: condition_growth },
    CheckDef { module: "algebro", invariant: "p(b(zeta)) residual at 64 points / |zeta|^{mn}", tol: Some(1e-8), run: branch_residual },
    CheckDef { module: "algebro", invariant: "branch matching stable under grid doubling", tol: Some(1e-8), run: grid_doubling },
    CheckDef { module: "algebro", invariant: "round trip C -> W -> C'", tol: Some(1e-8), run: reconstruction_round_trip },
    CheckDef { module: "cli", invariant: "byte-identical tau CSV on rerun", tol: Some(0.5), run: determinism },
    CheckDef { module: "cli", invariant: "each invariant appears once in this table", tol: Some(0.5), run: unique_rows },
];

pub fn reference_rational() -> SymbolSpec {
    rational_spec(&[c(0.3, 0.0), c(0.6, 0.0)]).expect("valid reference parameters")
}

pub fn reference_covering() -> SymbolSpec {
    covering_spec(&elliptic_roots(), 2).expect("valid reference parameters")
}

fn elliptic_roots() -> Vec<Complex64> {
    vec![c(0.5, 0.0), c(-0.2, 0.3), c(0.1, -0.45)]
}

/// (module, invariant) of every row, in table order.
pub fn invariant_names() -> Vec<(&'static str, &'static str)> {
    CHECKS.iter().map(|d| (d.module, d.invariant)).collect()
}

pub fn run_suite(suite: &Suite) -> Vec<CheckRow> {
    CHECKS
        .par_iter()
        .enumerate()
        .map(|(i, def)| {
            let mut rng = ChaCha8Rng::seed_from_u64(suite.seed.wrapping_add(i as u64));
            let tol = def.tol.map(|t| suite.tol_override.unwrap_or(t));
            let (value, detail) = match (def.run)(suite, &mut rng) {
                Ok(o) => (o.value, o.detail),
                Err(e) => (f64::NAN, format!("error: {e}")),
            };
            let status = match tol {
                None => Status::Report,
                Some(t) if value < t => Status::Pass,
                Some(_) => Status::Fail,
            };
            CheckRow {
                module: def.module,
                invariant: def.invariant,
                value,
                tol,
                status,
                detail,
            }
        })
        .collect()
}

pub fn table_csv(rows: &[CheckRow]) -> String {
    let mut csv = Csv::new(&["module", "invariant", "value", "tol", "status"]);
    for r in rows {
        csv.row(&[
            r.module.to_string(),
            format!("\"{}\"", r.invariant),
            fmt_f64(r.value),
            r.tol.map_or_else(|| "-".to_string(), fmt_f64),
            r.status.label().to_string(),
        ]);
    }
    csv.finish()
}

/// Aligned text version of the table for the terminal and report.txt.
pub fn table_text(rows: &[CheckRow]) -> String {
    let w_mod = rows.iter().map(|r| r.module.len()).max().unwrap_or(6).max(6);
    let w_inv = rows.iter().map(|r| r.invariant.chars().count()).max().unwrap_or(9).max(9);
    let mut out = format!(
        "{:<w_mod$}  {:<w_inv$}  {:>10}  {:>8}  {}\n",
        "module", "invariant", "value", "tol", "status"
    );
    for r in rows {
        let pad = w_inv - r.invariant.chars().count();
        out.push_str(&format!(
            "{:<w_mod$}  {}{}  {:>10.3e}  {:>8}  {}",
            r.module,
            r.invariant,
            " ".repeat(pad),
            r.value,
            r.tol.map_or_else(|| "-".to_string(), |t| format!("{t:.0e}")),
            r.status.label()
        ));
        if !r.detail.is_empty() {
            out.push_str(&format!("  {}", r.detail));
        }
        out.push('\n');
    }
    out
}

fn rand_c(rng: &mut ChaCha8Rng, scale: f64) -> Complex64 {
    c(rng.gen_range(-scale..scale), rng.gen_range(-scale..scale))
}

fn random_poly(rng: &mut ChaCha8Rng, k: usize, q: usize, terms: usize) -> GradedPoly {
    let mut out = Vec::with_capacity(terms);
    for _ in 0..terms {
        let mut e = vec![0u32; k];
        let mut weight = 0;
        loop {
            let i = rng.gen_range(1..=k);
            if weight + i > q || rng.gen_bool(0.3) {
                break;
            }
            e[i - 1] += 1;
            weight += i;
        }
        out.push((Monomial::from_exponents(&e), rand_c(rng, 1.0)));
    }
    GradedPoly::from_terms(k, q, out)
}

fn random_lm(rng: &mut ChaCha8Rng, n: usize, lo: i64, hi: i64, scale: f64) -> LaurentMatrix {
    let blocks = (lo..=hi)
        .map(|_| CMat::from_fn(n, n, |_, _| rand_c(rng, scale)))
        .collect();
    LaurentMatrix::from_blocks(lo, blocks)
}

/// Samples and coefficients of the GD symbol on a grid wide enough for the
/// factorization and Plemelj routes.
fn sampled(spec: &SymbolSpec, t: &TimeVector, min_m: usize) -> Result<(LaurentMatrix, CircleSamples)> {
    let lm = gd_symbol(spec, t)?;
    let m = (4 * (lm.hi() - lm.lo() + 1) as usize)
        .next_power_of_two()
        .max(min_m);
    let x = inverse_transform(&lm, m)?;
    Ok((lm, x))
}

fn gd_symbol(spec: &SymbolSpec, t: &TimeVector) -> Result<LaurentMatrix> {
    crate::symbols::gd_symbol_auto(spec, t, spec.default_depth())
}

fn det_plemelj(x: &CircleSamples) -> Result<Complex64> {
    let half = (x.m() / 4 - 1) as i64;
    let lm = transform(x, -half, half)?;
    let (inv, _) = invert_symbol(x)?;
    let lm_inv = transform(&inv, -half, half)?;
    let p = plemelj_fourier(&lm, &lm_inv, 64, DEFAULT_TAIL_TOL)?;
    Ok(fredholm_det(&p, 1e-13)?.value)
}

fn ring_axioms(_: &Suite, rng: &mut ChaCha8Rng) -> Result<Outcome> {
    let (k, q) = (5, 10);
    let mut worst: f64 = 0.0;
    for _ in 0..4 {
        let a = random_poly(rng, k, q, 12);
        let b = random_poly(rng, k, q, 12);
        let cc = random_poly(rng, k, q, 12);
        let assoc = a.mul(&b).mul(&cc).max_diff(&a.mul(&b.mul(&cc)));
        let dist = a.mul(&b.add(&cc)).max_diff(&a.mul(&b).add(&a.mul(&cc)));
        let comm = a.mul(&b).max_diff(&b.mul(&a));
        worst = worst.max(assoc).max(dist).max(comm);
    }
    outcome(worst, "4 triples, 5 times")
}

fn schur_derivative(_: &Suite, _: &mut ChaCha8Rng) -> Result<Outcome> {
    let q = 10;
    let p = schur_sequence(q, q);
    let mut worst: f64 = 0.0;
    for k in 1..=q as i64 {
        for i in 1..=k as usize {
            worst = worst.max(p.get(k).derivative(i).max_diff(p.get(k - i as i64)));
        }
    }
    outcome(worst, format!("Q = {q}"))
}

fn character_vs_jacobi_trudi(_: &Suite, rng: &mut ChaCha8Rng) -> Result<Outcome> {
    let mut worst: f64 = 0.0;
    for len in 1..=4 {
        let x: Vec<Complex64> = (0..len).map(|_| rand_c(rng, 0.7)).collect();
        let t = miwa_times(&x, 6);
        for l in partitions_up_to(6, len) {
            let direct = character(&l, &x)?;
            let jt = jacobi_trudi(&l, 6, 6).evaluate(&t);
            worst = worst.max((direct - jt).norm());
        }
    }
    outcome(worst, "|X| = 1..4")
}

fn graded_inverse(_: &Suite, rng: &mut ChaCha8Rng) -> Result<Outcome> {
    let (k, q) = (5, 10);
    let mut worst: f64 = 0.0;
    for _ in 0..4 {
        let u = random_poly(rng, k, q, 10);
        let a = u.sub(&GradedPoly::constant(k, q, u.constant_term())).add(&GradedPoly::one(k, q));
        let prod = a.mul(&a.invert()?);
        worst = worst.max(prod.max_diff(&GradedPoly::one(k, q)));
    }
    outcome(worst, format!("Q = {q}"))
}

fn transform_round_trip(_: &Suite, rng: &mut ChaCha8Rng) -> Result<Outcome> {
    let lm = random_lm(rng, 2, -3, 3, 1.0);
    let back = transform(&inverse_transform(&lm, 16)?, -3, 3)?;
    outcome(back.sub(&lm).max_abs_in(-3, 3), "n = 2, band [-3, 3], M = 16")
}

fn norm_reflection(_: &Suite, rng: &mut ChaCha8Rng) -> Result<Outcome> {
    let lm = LaurentMatrix::identity(2).add(&random_lm(rng, 2, -4, 4, 0.05));
    let a = admissibility(&lm)?.norm_2half;
    let b = admissibility(&lm.reflect())?.norm_2half;
    outcome((a - b).abs() / a.max(1e-300), "relative")
}

fn geometric_mean_product(_: &Suite, _: &mut ChaCha8Rng) -> Result<Outcome> {
    let a = |z: Complex64| c(1.0, 0.0) + c(0.3, 0.1) / z + c(0.2, 0.0) * z;
    let b = |z: Complex64| c(2.0, 0.0) - c(0.4, 0.0) * z + c(0.1, -0.2) / (z * z);
    let one = |f: &dyn Fn(Complex64) -> Complex64| {
        CircleSamples::from_fn(256, |z| CMat::from_element(1, 1, f(z)))
    };
    let ga = geometric_mean(&one(&a)?)?;
    let gb = geometric_mean(&one(&b)?)?;
    let gab = geometric_mean(&one(&|z| a(z) * b(z))?)?;
    outcome((gab - ga * gb).norm() / gab.norm(), "relative")
}

fn lambda_powers(s: &Suite, _: &mut ChaCha8Rng) -> Result<Outcome> {
    let n = s.config.spec.n();
    let mut worst: f64 = 0.0;
    for a in 0..=2 * n as i64 {
        for b in 0..=2 * n as i64 {
            let hi = (a + b) / n as i64 + 1;
            let prod = lm_mul(&lambda_power(n, a), &lambda_power(n, b), 0, hi);
            worst = worst.max(prod.sub(&lambda_power(n, a + b)).max_abs_in(0, hi));
        }
    }
    outcome(worst, format!("n = {n}"))
}

fn exp_xi_inverse(s: &Suite, _: &mut ChaCha8Rng) -> Result<Outcome> {
    let n = s.config.spec.n();
    let t = &s.config.times;
    let a = exp_xi_auto(t, n)?;
    let b = exp_xi_auto(&t.neg(), n)?;
    let hi = a.hi().min(b.hi());
    let prod = lm_mul(&a, &b, 0, hi);
    let interior = hi / 2;
    let worst = prod
        .sub(&LaurentMatrix::identity(n))
        .max_abs_in(0, interior);
    outcome(worst, format!("modes 0..{interior} of {hi}"))
}

fn unimodular_flow(s: &Suite, _: &mut ChaCha8Rng) -> Result<Outcome> {
    let spec = &s.config.spec;
    let t = &s.config.times;
    let mut worst: f64 = 0.0;
    for j in 0..64 {
        let z = Complex64::from_polar(1.0, 2.0 * std::f64::consts::PI * j as f64 / 64.0);
        let dw = linalg::det(&spec.w_eval(z));
        let dg = linalg::det(&spec.gd_eval(t, z));
        worst = worst.max((dg - dw).norm() / dw.norm().max(1e-300));
    }
    outcome(worst, "relative, 64 samples")
}

fn xi_intertwining(s: &Suite, rng: &mut ChaCha8Rng) -> Result<Outcome> {
    let n = s.config.spec.n();
    let mut f = LaurentMatrix::zeros(n, -3, 3);
    for k in -3..=3 {
        for r in 0..n {
            f.block_mut(k)[(r, 0)] = rand_c(rng, 1.0);
        }
    }
    let lf = lm_mul(&lambda_power(n, 1), &f, -3, 4);
    let lhs = xi_column(&lf, 0);
    let base = xi_column(&f, 0);
    let blocks = (base.lo()..=base.hi()).map(|k| base.block(k)).collect();
    let rhs = LaurentMatrix::from_blocks(base.lo() + 1, blocks);
    let diff = lhs.sub(&rhs);
    outcome(diff.max_abs_in(diff.lo(), diff.hi()), format!("n = {n}"))
}

fn plemelj_equality(_: &Suite, rng: &mut ChaCha8Rng) -> Result<Outcome> {
    let mut worst: f64 = 0.0;
    for spec in [reference_rational(), reference_covering()] {
        for _ in 0..2 {
            let t = TimeVector::real(&[rng.gen_range(-1.0..1.0), 0.0, rng.gen_range(-1.0..1.0)], 2, true);
            let lm = gd_symbol(&spec, &t)?;
            let depth = spec.default_depth() as i64;
            let (lm_inv, _) = adaptive_transform(
                |z| spec.gd_inv_eval(&t, z).unwrap_or_else(|| linalg::zeros(spec.n())),
                -depth,
                lm.hi(),
            )?;
            let fourier = plemelj_fourier(&lm, &lm_inv, 12, DEFAULT_TAIL_TOL)?;
            let m = (4 * (lm.hi() - lm.lo() + 1) as usize).next_power_of_two().max(512);
            let x = CircleSamples::from_fn(m, |z| spec.gd_eval(&t, z))?;
            let (_, outer) = quadrature_radii(spec.rho());
            let xi = RadialSamples::from_fn(outer, m, |z| {
                spec.gd_inv_eval(&t, z).unwrap_or_else(|| linalg::zeros(spec.n()))
            });
            let quad = plemelj_quadrature(&x, &xi, 12, 1e-9)?;
            worst = worst.max(fourier.max_entry_diff(&quad));
        }
    }
    outcome(worst, "rational and covering, 2 draws each, 12 blocks")
}

fn cauchy_ratio(s: &Suite, _: &mut ChaCha8Rng) -> Result<Outcome> {
    let (lm, x) = sampled(&s.config.spec, &s.config.times, 512)?;
    let sw = szego_widom(&lm, &x, 1e-9, 48)?;
    match sw.fitted_ratio {
        Some(r) => outcome(r, format!("N used {}", sw.n_used)),
        None => outcome(0.0, format!("differences below the noise floor by N = {}", sw.n_used)),
    }
}

fn borodin_okounkov_residual(_: &Suite, _: &mut ChaCha8Rng) -> Result<Outcome> {
    let spec = reference_rational();
    let t = TimeVector::real(&[0.5, 0.0, 0.1], 2, true);
    let (lm, x) = sampled(&spec, &t, 512)?;
    let theta = wiener_hopf_auto(&x, (-lm.lo()) as usize, DEFAULT_TOL)?;
    let opposite = opposite_factorization(&x, theta.band(), DEFAULT_TOL)?;
    let d_inf = det_plemelj(&x)?;
    let mut worst: f64 = 0.0;
    for nb in 1..=4 {
        worst = worst.max(borodin_okounkov(&lm, &theta, &opposite, d_inf, nb, 1e-8)?.residual);
    }
    outcome(worst, "N = 1..4")
}

fn fredholm_doubling(s: &Suite, _: &mut ChaCha8Rng) -> Result<Outcome> {
    let (_, x) = sampled(&s.config.spec, &s.config.times, 512)?;
    let m = x.m();
    let x2 = CircleSamples::from_fn(2 * m, |z| s.config.spec.gd_eval(&s.config.times, z))?;
    let a = det_plemelj(&x)?;
    let b = det_plemelj(&x2)?;
    outcome((a - b).norm(), format!("M = {m} vs {}", 2 * m))
}

fn builtin_specs(s: &Suite) -> Vec<SymbolSpec> {
    let mut specs = vec![reference_rational(), reference_covering()];
    if !specs.contains(&s.config.spec) {
        specs.push(s.config.spec.clone());
    }
    specs
}

fn tau_at_zero(s: &Suite, _: &mut ChaCha8Rng) -> Result<Outcome> {
    let mut worst: f64 = 0.0;
    for spec in builtin_specs(s) {
        let t = TimeVector::zero(3, spec.n());
        for nb in 1..=4 {
            worst = worst.max((tau_numeric(&spec, &t, nb)? - ONE).norm());
        }
    }
    outcome(worst, "reference and configured symbols")
}

fn triple_route(_: &Suite, _: &mut ChaCha8Rng) -> Result<Outcome> {
    let q = 6;
    let opts = GradedOptions::for_degree(q, true);
    let mut worst: f64 = 0.0;
    for spec in [reference_rational(), reference_covering()] {
        for nb in 1..=3 {
            let graded = tau_graded(&spec, nb, q, opts)?;
            let chars = reassemble(&character_expansion(&spec, nb, q), &opts.schur(spec.n(), q));
            let wr = wronskian_tau(&f_family(&spec, nb, q, opts))?.truncate(q);
            worst = worst
                .max(graded.max_diff(&chars))
                .max(graded.max_diff(&wr))
                .max(chars.max_diff(&wr));
        }
    }
    outcome(worst, "pairwise, rational and covering")
}

fn stability(_: &Suite, _: &mut ChaCha8Rng) -> Result<Outcome> {
    let q = 4;
    let opts = GradedOptions::for_degree(q, true);
    let mut worst: f64 = 0.0;
    for spec in [reference_rational(), reference_covering()] {
        for nb in 1..=3 {
            worst = worst.max(stability_check(&spec, nb, q, opts)?.stable_part());
        }
    }
    outcome(worst, format!("N = 1..3, Q = {q}"))
}

fn kdv_residual(_: &Suite, _: &mut ChaCha8Rng) -> Result<Outcome> {
    let q = 8;
    let tau = tau_graded(&reference_rational(), q, q, GradedOptions::for_degree(q, true))?;
    outcome(hirota_kdv_residual(&tau).max_abs(), "rational")
}

fn two_soliton_grid(_: &Suite, _: &mut ChaCha8Rng) -> Result<Outcome> {
    let spec = reference_rational();
    let mut worst: f64 = 0.0;
    for i in 0..5 {
        for j in 0..5 {
            let t = [-0.5 + 0.25 * i as f64, 0.0, -0.5 + 0.25 * j as f64];
            let tv = TimeVector::real(&t, 2, true);
            let tau = tau_stable(&spec, &tv, 1e-12)?.value;
            let expect = two_soliton(c(0.3, 0.0), c(0.6, 0.0), tv.values());
            worst = worst.max((tau - expect).norm() / expect.norm());
        }
    }
    outcome(worst, "(d, c) = (0.3, 0.6)")
}

fn factorization_residual(s: &Suite, _: &mut ChaCha8Rng) -> Result<Outcome> {
    let (lm, x) = sampled(&s.config.spec, &s.config.times, 512)?;
    let f = wiener_hopf_auto(&x, (-lm.lo()) as usize, DEFAULT_TOL)?;
    outcome(f.residual, format!("band {}", f.band()))
}

fn band_uniqueness(s: &Suite, _: &mut ChaCha8Rng) -> Result<Outcome> {
    let (lm, x) = sampled(&s.config.spec, &s.config.times, 512)?;
    let f1 = wiener_hopf_auto(&x, (-lm.lo()) as usize, DEFAULT_TOL)?;
    let b = f1.band();
    let x2 = if x.m() < 16 * b {
        inverse_transform(&lm, (16 * b).next_power_of_two())?
    } else {
        x
    };
    let f2 = wiener_hopf(&x2, 2 * b, DEFAULT_TOL)?;
    let worst = (-(b as i64)..=0)
        .map(|k| linalg::max_abs_diff(&f1.t_minus.block(k), &f2.t_minus.block(k)))
        .fold(0.0, f64::max);
    outcome(worst, format!("B = {b}"))
}

fn factor_determinants(s: &Suite, _: &mut ChaCha8Rng) -> Result<Outcome> {
    let (lm, x) = sampled(&s.config.spec, &s.config.times, 512)?;
    let f = wiener_hopf_auto(&x, (-lm.lo()) as usize, DEFAULT_TOL)?;
    let plus = f.det_plus_deviation()?;
    let minus = f.det_minus_deviation(&x)?;
    outcome(plus.max(minus), format!("det T_+ {plus:.2e}, det T_- {minus:.2e}"))
}

/// Walks t₁ = i·s toward a zero of τ_W for the rational reference symbol
/// and records the condition number of the mode system on the way. The
/// certificate is loosened to 1e-6 since accuracy degrades with the
/// conditioning.
fn condition_growth(_: &Suite, _: &mut ChaCha8Rng) -> Result<Outcome> {
    let spec = reference_rational();
    let at = |s: f64| TimeVector::new(&[c(0.0, s)], 2, true);
    let tau = |s: f64| -> Result<f64> { Ok(tau_stable(&spec, &at(s), 1e-12)?.value.re) };
    let (mut lo, mut hi) = (4.0, 5.5);
    let (mut f_lo, f_hi) = (tau(lo)?, tau(hi)?);
    if f_lo.signum() == f_hi.signum() {
        return outcome(f64::NAN, "no sign change of tau on the ray");
    }
    for _ in 0..40 {
        let mid = 0.5 * (lo + hi);
        let f_mid = tau(mid)?;
        if f_mid.abs() < 1e-3 {
            lo = mid;
            break;
        }
        if f_mid.signum() == f_lo.signum() {
            lo = mid;
            f_lo = f_mid;
        } else {
            hi = mid;
        }
    }
    let target = lo;
    let mut conds = Vec::new();
    for j in 0..6 {
        let s = target - 2.0 * 0.5f64.powi(j);
        let (lm, x) = sampled(&spec, &at(s), 512)?;
        match wiener_hopf_auto(&x, (-lm.lo()) as usize, 1e-6) {
            Ok(f) => conds.push(f.cond),
            Err(e) => {
                let shown: Vec<String> = conds.iter().map(|v| format!("{v:.2e}")).collect();
                return outcome(
                    conds.last().copied().unwrap_or(f64::NAN),
                    format!("cond [{}], solver stopped at s = {s:.4}: {e}", shown.join(", ")),
                );
            }
        }
    }
    let monotone = conds.windows(2).all(|w| w[1] >= w[0]);
    let shown: Vec<String> = conds.iter().map(|v| format!("{v:.2e}")).collect();
    outcome(
        *conds.last().unwrap(),
        format!(
            "zero near s = {target:.4}, cond [{}], monotone: {}",
            shown.join(", "),
            if monotone { "yes" } else { "no" }
        ),
    )
}

fn curves() -> Result<Vec<CharPoly>> {
    Ok(vec![
        CharPoly::covering(&elliptic_roots(), 2)?,
        CharPoly::covering(&[c(0.4, 0.0), c(0.0, -0.3)], 3)?,
    ])
}

fn branch_residual(_: &Suite, _: &mut ChaCha8Rng) -> Result<Outcome> {
    let mut worst: f64 = 0.0;
    for cp in curves()? {
        let bs = branch_series(&cp, DEFAULT_BRANCH_TERMS, false)?;
        worst = worst.max(bs.residual(1.0, 64));
    }
    outcome(worst, "elliptic n = 2 and a cubic cover n = 3, |zeta| = 1")
}

fn elliptic_reconstruction() -> Result<(SymbolSpec, crate::algebro::Reconstruction)> {
    let spec = reference_covering();
    let bs = branch_series(&CharPoly::covering(&elliptic_roots(), 2)?, DEFAULT_BRANCH_TERMS, true)?;
    let bc = bc_matrices(&spec, &bs, DEFAULT_BAND)?;
    let rec = reconstruct_w(&bc.c, DEFAULT_BRANCH_TERMS, DEFAULT_BAND)?;
    Ok((spec, rec))
}

fn grid_doubling(_: &Suite, _: &mut ChaCha8Rng) -> Result<Outcome> {
    let (_, rec) = elliptic_reconstruction()?;
    outcome(rec.grid_residual, "coefficient change of W")
}

fn reconstruction_round_trip(_: &Suite, _: &mut ChaCha8Rng) -> Result<Outcome> {
    let (spec, rec) = elliptic_reconstruction()?;
    let span = column_span_residual(&rec.w, &spec.w_coeffs(DEFAULT_BAND))?;
    outcome(
        rec.conj_residual.max(span),
        format!("conjugation {:.2e}, column span {span:.2e}", rec.conj_residual),
    )
}

fn determinism(s: &Suite, _: &mut ChaCha8Rng) -> Result<Outcome> {
    let a = crate::cli::tau_table(&s.config)?;
    let b = crate::cli::tau_table(&s.config)?;
    let same = a.csv == b.csv;
    outcome(if same { 0.0 } else { 1.0 }, format!("{} bytes", a.csv.len()))
}

fn unique_rows(_: &Suite, _: &mut ChaCha8Rng) -> Result<Outcome> {
    let names = invariant_names();
    let distinct: BTreeSet<_> = names.iter().collect();
    let dupes = names.len() - distinct.len();
    outcome(dupes as f64, format!("{} rows", names.len()))
}
