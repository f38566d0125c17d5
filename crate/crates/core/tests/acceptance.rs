//! One line per acceptance criterion: `criterion k: PASS|FAIL ...`.

use std::time::Instant;

use gdtau::algebro::{
    bc_matrices, branch_series, column_span_residual, reconstruct_w, CharPoly, DEFAULT_BAND,
    DEFAULT_BRANCH_TERMS,
};
use gdtau::factorization::{
    opposite_factorization, tau_ratio_check, wiener_hopf_auto, DEFAULT_TOL,
};
use gdtau::gradedpoly::GradedPoly;
use gdtau::laurent::{inverse_transform, invert_symbol, transform, CircleSamples, LaurentMatrix};
use gdtau::linalg::{self, c};
use gdtau::symbols::{covering_spec, gd_symbol_auto, rational_spec, SymbolSpec, TimeVector};
use gdtau::tau::{
    character_expansion, f_family, generic_base, kernel_facts_check, reassemble, recursion_check,
    stability_check, tau_graded, tau_stable, wronskian_tau, GradedOptions,
};
use gdtau::toeplitz::{
    borodin_okounkov, fredholm_det, plemelj_fourier, plemelj_quadrature, quadrature_radii,
    szego_widom, RadialSamples, DEFAULT_TAIL_TOL,
};
use num_complex::Complex64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

fn report(k: usize, pass: bool, detail: String) {
    println!(
        "criterion {k}: {} {detail}",
        if pass { "PASS" } else { "FAIL" }
    );
    assert!(pass, "criterion {k} failed: {detail}");
}

fn rational() -> SymbolSpec {
    rational_spec(&[c(0.3, 0.0), c(0.6, 0.0)]).unwrap()
}

fn elliptic_roots() -> Vec<Complex64> {
    vec![c(0.5, 0.0), c(-0.2, 0.3), c(0.1, -0.45)]
}

fn covering() -> SymbolSpec {
    covering_spec(&elliptic_roots(), 2).unwrap()
}

fn times(t1: f64, t3: f64) -> TimeVector {
    TimeVector::real(&[t1, 0.0, t3], 2, true)
}

fn draws(seed: u64, count: usize) -> Vec<TimeVector> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    (0..count)
        .map(|_| times(rng.gen_range(-0.5..0.5), rng.gen_range(-0.2..0.2)))
        .collect()
}

/// Samples and coefficients of the GD symbol on a grid wide enough for the
/// factorization and Plemelj routes.
fn sampled(spec: &SymbolSpec, t: &TimeVector) -> (LaurentMatrix, CircleSamples) {
    let lm = gd_symbol_auto(spec, t, spec.default_depth()).unwrap();
    let m = (4 * (lm.hi() - lm.lo() + 1) as usize).next_power_of_two().max(512);
    let x = inverse_transform(&lm, m).unwrap();
    (lm, x)
}

fn det_plemelj(x: &CircleSamples) -> Complex64 {
    let half = (x.m() / 4 - 1) as i64;
    let lm = transform(x, -half, half).unwrap();
    let (inv, _) = invert_symbol(x).unwrap();
    let lm_inv = transform(&inv, -half, half).unwrap();
    let p = plemelj_fourier(&lm, &lm_inv, 64, DEFAULT_TAIL_TOL).unwrap();
    fredholm_det(&p, 1e-13).unwrap().value
}

#[test]
fn criterion_01_two_soliton_oracle() {
    let (d, cc) = (0.3f64, 0.6f64);
    let spec = rational();
    // cosh θ_d cosh θ_c − (d/c) sinh θ_d sinh θ_c, θ_x = t₁x + t₃x³
    let closed = |t1: f64, t3: f64| {
        let td = t1 * d + t3 * d.powi(3);
        let tc = t1 * cc + t3 * cc.powi(3);
        td.cosh() * tc.cosh() - d / cc * td.sinh() * tc.sinh()
    };
    let start = Instant::now();
    let mut worst: f64 = 0.0;
    for i in 0..5 {
        for j in 0..5 {
            let t1 = -0.5 + 0.25 * i as f64;
            let t3 = -0.5 + 0.25 * j as f64;
            let tau = tau_stable(&spec, &times(t1, t3), 1e-12).unwrap().value;
            let expect = closed(t1, t3);
            worst = worst.max((tau - c(expect, 0.0)).norm() / expect.abs());
        }
    }
    let secs = start.elapsed().as_secs_f64();
    report(
        1,
        worst <= 1e-6 && secs <= 60.0,
        format!("max relative error {worst:.3e} (tol 1e-6), {secs:.2} s (limit 60 s)"),
    );
}

#[test]
fn criterion_02_plemelj_fourier_equals_quadrature() {
    let start = Instant::now();
    let mut worst: f64 = 0.0;
    for spec in [rational(), covering()] {
        for t in draws(2, 3) {
            let lm = gd_symbol_auto(&spec, &t, spec.default_depth()).unwrap();
            let depth = spec.default_depth() as i64;
            let (lm_inv, _) = gdtau::laurent::adaptive_transform(
                |z| spec.gd_inv_eval(&t, z).unwrap(),
                -depth,
                lm.hi(),
            )
            .unwrap();
            let fourier = plemelj_fourier(&lm, &lm_inv, 12, DEFAULT_TAIL_TOL).unwrap();
            let x = CircleSamples::from_fn(512, |z| spec.gd_eval(&t, z)).unwrap();
            let (_, outer) = quadrature_radii(spec.rho());
            let xi = RadialSamples::from_fn(outer, 512, |z| spec.gd_inv_eval(&t, z).unwrap());
            let quad = plemelj_quadrature(&x, &xi, 12, 1e-9).unwrap();
            worst = worst.max(fourier.max_entry_diff(&quad));
        }
    }
    let secs = start.elapsed().as_secs_f64();
    report(
        2,
        worst <= 1e-8 && secs <= 30.0,
        format!("max entry difference {worst:.3e} (tol 1e-8), {secs:.2} s (limit 30 s)"),
    );
}

#[test]
fn criterion_03_szego_widom_two_routes() {
    let t = times(0.5, 0.1);
    let mut lines = Vec::new();
    let mut pass = true;
    for spec in [rational(), covering()] {
        let (lm, x) = sampled(&spec, &t);
        let sw = szego_widom(&lm, &x, 1e-9, 24).unwrap();
        let gap = sw.discrepancy();
        let ratio = sw.fitted_ratio;
        let ok = gap <= 1e-6 && ratio.is_some_and(|r| r < 0.9);
        pass &= ok;
        lines.push(format!(
            "{}: |D_N/G^N − det 𝒫| = {gap:.3e} at N = {}, ratio {:?}",
            spec.family_name(),
            sw.n_used,
            ratio
        ));
    }
    report(3, pass, format!("{} (tol 1e-6, ratio < 0.9)", lines.join("; ")));
}

#[test]
fn criterion_04_borodin_okounkov() {
    let spec = rational();
    let t = times(0.5, 0.1);
    let (lm, x) = sampled(&spec, &t);
    let band = (-lm.lo()) as usize;
    let theta = wiener_hopf_auto(&x, band, DEFAULT_TOL).unwrap();
    let opposite = opposite_factorization(&x, theta.band(), DEFAULT_TOL).unwrap();
    let d_inf = det_plemelj(&x);
    let mut worst: f64 = 0.0;
    for nb in 1..=4 {
        let bo = borodin_okounkov(&lm, &theta, &opposite, d_inf, nb, 1e-8).unwrap();
        worst = worst.max(bo.residual);
    }
    report(4, worst <= 1e-8, format!("max residual over N = 1..4: {worst:.3e} (tol 1e-8)"));
}

#[test]
fn criterion_05_stabilization() {
    let opts = GradedOptions::for_degree(3, true);
    let mut worst: f64 = 0.0;
    for spec in [rational(), covering()] {
        for nb in [2, 3] {
            let r = stability_check(&spec, nb, 3, opts).unwrap();
            worst = worst.max(r.stable_part());
        }
    }
    report(5, worst <= 1e-12, format!("max coefficient difference {worst:.3e} (tol 1e-12)"));
}

#[test]
fn criterion_06_triple_route() {
    let spec = rational();
    let (nb, q) = (2, 6);
    let opts = GradedOptions::for_degree(q, true);
    let graded = tau_graded(&spec, nb, q, opts).unwrap();
    let chars = reassemble(&character_expansion(&spec, nb, q), &opts.schur(2, q));
    let wr = wronskian_tau(&f_family(&spec, nb, q, opts)).unwrap().truncate(q);
    let d = [
        graded.max_diff(&chars),
        graded.max_diff(&wr),
        chars.max_diff(&wr),
    ];
    let worst = d.iter().cloned().fold(0.0, f64::max);
    report(
        6,
        worst <= 1e-10,
        format!(
            "graded/character {:.3e}, graded/Wronskian {:.3e}, character/Wronskian {:.3e} (tol 1e-10)",
            d[0], d[1], d[2]
        ),
    );
}

#[test]
fn criterion_07_kernel_and_recursion() {
    let spec = rational();
    let q = 6;
    let opts = GradedOptions::for_degree(q, true);
    let k = opts.num_times;
    let base = generic_base(k);
    let var = |i: usize| GradedPoly::var(k, q, i);
    let gs = vec![
        var(1).mul(&var(1)),
        var(1).mul(&var(3)).add(&var(5)),
        var(1).mul(&var(1)).mul(&var(1)).mul(&var(1)),
    ];
    let facts = kernel_facts_check(&spec, 1, q, opts, &base).unwrap();
    let rec = recursion_check(&spec, 1, q, opts, &gs, &base).unwrap();
    let worst = facts.worst().max(rec.worst());
    report(
        7,
        worst <= 1e-9,
        format!(
            "kernel facts {:.3e}, recursion {:.3e} (tol 1e-9)",
            facts.worst(),
            rec.worst()
        ),
    );
}

/// (D₁⁴ − 4D₁D₃ + 3D₂²)τ·τ expanded by hand.
fn kdv_bilinear(tau: &GradedPoly) -> GradedPoly {
    let d = |p: &GradedPoly, i: usize| p.derivative(i);
    let t1 = d(tau, 1);
    let t11 = d(&t1, 1);
    let t111 = d(&t11, 1);
    let t1111 = d(&t111, 1);
    let t2 = d(tau, 2);
    let t22 = d(&t2, 2);
    let t3 = d(tau, 3);
    let t13 = d(&t1, 3);
    let two = |p: GradedPoly| p.scale(c(2.0, 0.0));
    let d4 = two(tau.mul(&t1111).sub(&t1.mul(&t111).scale(c(4.0, 0.0))).add(&t11.mul(&t11).scale(c(3.0, 0.0))));
    let d13 = two(tau.mul(&t13).sub(&t1.mul(&t3)));
    let d22 = two(tau.mul(&t22).sub(&t2.mul(&t2)));
    d4.sub(&d13.scale(c(4.0, 0.0))).add(&d22.scale(c(3.0, 0.0)))
}

#[test]
fn criterion_08_kdv_bilinear() {
    let spec = rational();
    let q = 8;
    let opts = GradedOptions::for_degree(q, true);
    let tau = tau_graded(&spec, q, q, opts).unwrap();
    // the bilinear form lowers weight by 4, so degrees ≤ Q − 4 are exact
    let res = kdv_bilinear(&tau).truncate(q - 4);
    let lib = gdtau::gradedpoly::hirota_kdv_residual(&tau);
    let worst = res.max_abs().max(lib.max_abs());
    report(8, worst <= 1e-8, format!("max bilinear coefficient {worst:.3e} (tol 1e-8)"));
}

#[test]
fn criterion_09_wiener_hopf_certificates() {
    let spec = rational();
    let mut worst_res: f64 = 0.0;
    let mut worst_det: f64 = 0.0;
    for t in draws(9, 3) {
        let (lm, x) = sampled(&spec, &t);
        let f = wiener_hopf_auto(&x, (-lm.lo()) as usize, DEFAULT_TOL).unwrap();
        // independent residual: rebuild T₋T₊ pointwise
        let tm = inverse_transform(&f.t_minus, x.m()).unwrap();
        let tp = inverse_transform(&f.t_plus, x.m()).unwrap();
        for j in 0..x.m() {
            let prod = tm.value(j) * tp.value(j);
            worst_res = worst_res.max(linalg::max_abs_diff(&prod, x.value(j)));
            worst_det = worst_det.max((linalg::det(tp.value(j)) - c(1.0, 0.0)).norm());
        }
    }
    report(
        9,
        worst_res <= 1e-8 && worst_det <= 1e-8,
        format!("γ − T₋T₊ {worst_res:.3e}, |det T₊ − 1| {worst_det:.3e} (tol 1e-8)"),
    );
}

#[test]
fn criterion_10_burchnall_chaundy() {
    let a = elliptic_roots();
    let spec = covering();
    let bs = branch_series(&CharPoly::covering(&a, 2).unwrap(), DEFAULT_BRANCH_TERMS, true).unwrap();
    let bc = bc_matrices(&spec, &bs, DEFAULT_BAND).unwrap();
    let rec = reconstruct_w(&bc.c, DEFAULT_BRANCH_TERMS, DEFAULT_BAND).unwrap();
    let span = column_span_residual(&rec.w, &spec.w_coeffs(DEFAULT_BAND)).unwrap();
    let round = span.max(rec.conj_residual);
    report(
        10,
        bc.negative_energy <= 1e-9 && round <= 1e-8,
        format!(
            "negative-band energy {:.3e} (tol 1e-9), round trip {round:.3e} (tol 1e-8)",
            bc.negative_energy
        ),
    );
}

#[test]
fn criterion_11_tau_ratio() {
    let spec = rational();
    let t = times(0.5, 0.1);
    let mut worst: f64 = 0.0;
    let mut parts = Vec::new();
    for nb in [1, 2] {
        let r = tau_ratio_check(&spec, &t, nb).unwrap();
        worst = worst.max(r.literal_residual);
        parts.push(format!(
            "N = {nb}: block-determinant residual {:.3e} (compression form {:.3e})",
            r.literal_residual, r.schur_residual
        ));
    }
    report(11, worst <= 1e-7, format!("{} (tol 1e-7)", parts.join("; ")));
}
