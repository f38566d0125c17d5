//! Matrix-valued Laurent series on S¹ and their samples on the unit circle.

use std::f64::consts::PI;

use num_complex::Complex64;
use rustfft::FftPlanner;

use crate::error::{Error, Result};
use crate::linalg::{self, CMat};
use crate::report::fmt_f64;

/// Default sample count for circle grids.
pub const DEFAULT_SAMPLES: usize = 512;
/// Largest grid the adaptive sampler will try.
pub const MAX_SAMPLES: usize = 1 << 16;
/// Relative out-of-band energy below which a transform is accepted.
pub const TAIL_TOL: f64 = 1e-12;
/// Worst accepted sample condition number in [`invert_symbol`].
pub const MAX_SAMPLE_COND: f64 = 1e12;

/// γ(z) = Σ_{k=lo}^{hi} γ^{(k)} z^k with n×n blocks.
#[derive(Clone, Debug, PartialEq)]
pub struct LaurentMatrix {
    n: usize,
    lo: i64,
    hi: i64,
    coeffs: Vec<CMat>,
}

impl LaurentMatrix {
    pub fn zeros(n: usize, lo: i64, hi: i64) -> LaurentMatrix {
        assert!(lo <= hi, "empty band");
        LaurentMatrix {
            n,
            lo,
            hi,
            coeffs: vec![linalg::zeros(n); (hi - lo + 1) as usize],
        }
    }

    pub fn identity(n: usize) -> LaurentMatrix {
        let mut m = LaurentMatrix::zeros(n, 0, 0);
        m.coeffs[0] = linalg::identity(n);
        m
    }

    /// Scalar (1×1) series from coefficients starting at mode `lo`.
    pub fn scalar(lo: i64, coeffs: &[Complex64]) -> LaurentMatrix {
        let hi = lo + coeffs.len() as i64 - 1;
        let mut m = LaurentMatrix::zeros(1, lo, hi);
        for (i, c) in coeffs.iter().enumerate() {
            m.coeffs[i][(0, 0)] = *c;
        }
        m
    }

    pub fn from_blocks(lo: i64, blocks: Vec<CMat>) -> LaurentMatrix {
        assert!(!blocks.is_empty());
        let n = blocks[0].nrows();
        assert!(blocks.iter().all(|b| b.nrows() == n && b.ncols() == n));
        LaurentMatrix {
            n,
            lo,
            hi: lo + blocks.len() as i64 - 1,
            coeffs: blocks,
        }
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn lo(&self) -> i64 {
        self.lo
    }

    pub fn hi(&self) -> i64 {
        self.hi
    }

    pub fn band(&self) -> (i64, i64) {
        (self.lo, self.hi)
    }

    /// γ^{(k)} if stored.
    pub fn get(&self, k: i64) -> Option<&CMat> {
        if k < self.lo || k > self.hi {
            None
        } else {
            Some(&self.coeffs[(k - self.lo) as usize])
        }
    }

    /// γ^{(k)}, zero outside the band.
    pub fn block(&self, k: i64) -> CMat {
        self.get(k).cloned().unwrap_or_else(|| linalg::zeros(self.n))
    }

    pub fn block_mut(&mut self, k: i64) -> &mut CMat {
        assert!(k >= self.lo && k <= self.hi, "mode {k} outside band");
        &mut self.coeffs[(k - self.lo) as usize]
    }

    pub fn entry(&self, k: i64, r: usize, c: usize) -> Complex64 {
        self.get(k).map(|b| b[(r, c)]).unwrap_or_default()
    }

    /// Σ_{k∈[a,b]} ‖γ^{(k)}‖_F².
    pub fn band_energy(&self, a: i64, b: i64) -> f64 {
        (a.max(self.lo)..=b.min(self.hi))
            .map(|k| linalg::frob2(&self.coeffs[(k - self.lo) as usize]))
            .sum()
    }

    pub fn total_energy(&self) -> f64 {
        self.band_energy(self.lo, self.hi)
    }

    /// Copy re-banded to [lo, hi], dropping or zero-padding modes.
    pub fn rebanded(&self, lo: i64, hi: i64) -> LaurentMatrix {
        let mut r = LaurentMatrix::zeros(self.n, lo, hi);
        for k in lo..=hi {
            if let Some(b) = self.get(k) {
                *r.block_mut(k) = b.clone();
            }
        }
        r
    }

    pub fn eval(&self, z: Complex64) -> CMat {
        let mut acc = linalg::zeros(self.n);
        // Horner in z over [lo, hi], then scale by z^lo
        for k in (self.lo..=self.hi).rev() {
            acc = acc * z + &self.coeffs[(k - self.lo) as usize];
        }
        acc * z.powi(self.lo as i32)
    }

    /// z ↦ 1/z, i.e. γ̂^{(k)} = γ^{(−k)}.
    pub fn reflect(&self) -> LaurentMatrix {
        let mut blocks = self.coeffs.clone();
        blocks.reverse();
        LaurentMatrix::from_blocks(-self.hi, blocks)
    }

    /// Blockwise transpose γ^{(k)} ↦ (γ^{(k)})ᵀ.
    pub fn transpose(&self) -> LaurentMatrix {
        LaurentMatrix::from_blocks(self.lo, self.coeffs.iter().map(|b| b.transpose()).collect())
    }

    /// ∂_z γ = Σ k γ^{(k)} z^{k−1}.
    pub fn dz(&self) -> LaurentMatrix {
        let mut r = LaurentMatrix::zeros(self.n, self.lo - 1, self.hi - 1);
        for k in self.lo..=self.hi {
            *r.block_mut(k - 1) = &self.coeffs[(k - self.lo) as usize] * Complex64::new(k as f64, 0.0);
        }
        r
    }

    pub fn scale(&self, s: Complex64) -> LaurentMatrix {
        LaurentMatrix::from_blocks(self.lo, self.coeffs.iter().map(|b| b * s).collect())
    }

    pub fn add(&self, o: &LaurentMatrix) -> LaurentMatrix {
        let lo = self.lo.min(o.lo);
        let hi = self.hi.max(o.hi);
        let mut r = self.rebanded(lo, hi);
        for k in o.lo..=o.hi {
            *r.block_mut(k) += o.block(k);
        }
        r
    }

    pub fn sub(&self, o: &LaurentMatrix) -> LaurentMatrix {
        self.add(&o.scale(Complex64::new(-1.0, 0.0)))
    }

    /// Largest block entry magnitude over modes in [a, b].
    pub fn max_abs_in(&self, a: i64, b: i64) -> f64 {
        (a.max(self.lo)..=b.min(self.hi))
            .map(|k| linalg::max_abs(&self.coeffs[(k - self.lo) as usize]))
            .fold(0.0, f64::max)
    }

    /// CSV rows (k, row, col, re, im) for every stored entry.
    pub fn to_csv(&self) -> String {
        let mut s = String::from("k,row,col,re,im\n");
        for k in self.lo..=self.hi {
            let b = &self.coeffs[(k - self.lo) as usize];
            for r in 0..self.n {
                for c in 0..self.n {
                    s.push_str(&format!(
                        "{},{},{},{},{}\n",
                        k,
                        r,
                        c,
                        fmt_f64(b[(r, c)].re),
                        fmt_f64(b[(r, c)].im)
                    ));
                }
            }
        }
        s
    }

    /// Parses the format written by [`LaurentMatrix::to_csv`].
    pub fn from_csv(text: &str) -> Result<LaurentMatrix> {
        let mut rows = Vec::new();
        for (ln, line) in text.lines().enumerate().skip(1) {
            if line.trim().is_empty() {
                continue;
            }
            let f: Vec<&str> = line.split(',').collect();
            if f.len() != 5 {
                return Err(Error::Config(format!("line {}: expected 5 fields", ln + 1)));
            }
            let perr = |_| Error::Config(format!("line {}: bad number", ln + 1));
            let k: i64 = f[0].trim().parse().map_err(|_| Error::Config(format!("line {}: bad mode", ln + 1)))?;
            let r: usize = f[1].trim().parse().map_err(|_| Error::Config(format!("line {}: bad row", ln + 1)))?;
            let c: usize = f[2].trim().parse().map_err(|_| Error::Config(format!("line {}: bad col", ln + 1)))?;
            let re: f64 = f[3].trim().parse().map_err(perr)?;
            let im: f64 = f[4].trim().parse().map_err(perr)?;
            rows.push((k, r, c, Complex64::new(re, im)));
        }
        if rows.is_empty() {
            return Err(Error::Config("empty coefficient table".into()));
        }
        let lo = rows.iter().map(|r| r.0).min().unwrap();
        let hi = rows.iter().map(|r| r.0).max().unwrap();
        let n = rows.iter().map(|r| r.1.max(r.2)).max().unwrap() + 1;
        let mut m = LaurentMatrix::zeros(n, lo, hi);
        for (k, r, c, v) in rows {
            m.block_mut(k)[(r, c)] = v;
        }
        Ok(m)
    }
}

/// Values of an n×n loop at z_j = exp(2πij/M), j = 0..M−1.
#[derive(Clone, Debug)]
pub struct CircleSamples {
    n: usize,
    values: Vec<CMat>,
}

impl CircleSamples {
    pub fn new(values: Vec<CMat>) -> Result<CircleSamples> {
        let m = values.len();
        if m == 0 || !m.is_power_of_two() {
            return Err(Error::DegenerateInput(format!(
                "sample count must be a power of two, got {m}"
            )));
        }
        let n = values[0].nrows();
        Ok(CircleSamples { n, values })
    }

    /// Samples f(z_j) of a function given in closed form.
    pub fn from_fn(m: usize, f: impl Fn(Complex64) -> CMat) -> Result<CircleSamples> {
        CircleSamples::new((0..m).map(|j| f(point(j, m))).collect())
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn m(&self) -> usize {
        self.values.len()
    }

    pub fn values(&self) -> &[CMat] {
        &self.values
    }

    pub fn value(&self, j: usize) -> &CMat {
        &self.values[j]
    }

    pub fn point(&self, j: usize) -> Complex64 {
        point(j, self.m())
    }

    pub fn map(&self, f: impl Fn(&CMat) -> CMat) -> CircleSamples {
        CircleSamples {
            n: self.n,
            values: self.values.iter().map(f).collect(),
        }
    }

    pub fn zip_map(&self, o: &CircleSamples, f: impl Fn(&CMat, &CMat) -> CMat) -> CircleSamples {
        assert_eq!(self.m(), o.m(), "sample grids differ");
        CircleSamples {
            n: self.n,
            values: self.values.iter().zip(&o.values).map(|(a, b)| f(a, b)).collect(),
        }
    }

    pub fn dets(&self) -> Vec<Complex64> {
        self.values.iter().map(linalg::det).collect()
    }
}

pub fn point(j: usize, m: usize) -> Complex64 {
    Complex64::from_polar(1.0, 2.0 * PI * j as f64 / m as f64)
}

/// All M discrete Fourier modes, index r ↔ mode r (r < M/2) or r − M.
fn spectrum(x: &CircleSamples) -> Vec<CMat> {
    let m = x.m();
    let n = x.n;
    let fft = FftPlanner::new().plan_fft_forward(m);
    let mut out = vec![linalg::zeros(n); m];
    let mut buf = vec![Complex64::default(); m];
    for r in 0..n {
        for c in 0..n {
            for (j, v) in x.values.iter().enumerate() {
                buf[j] = v[(r, c)];
            }
            fft.process(&mut buf);
            for (k, v) in buf.iter().enumerate() {
                out[k][(r, c)] = v / m as f64;
            }
        }
    }
    out
}

fn mode_slot(k: i64, m: usize) -> usize {
    k.rem_euclid(m as i64) as usize
}

/// γ^{(k)} = (1/M)Σ_j x_j z_j^{−k} for k in [lo, hi].
pub fn transform(x: &CircleSamples, lo: i64, hi: i64) -> Result<LaurentMatrix> {
    let needed = 2 * (hi - lo + 1) as usize;
    if x.m() < needed {
        return Err(Error::Alias {
            lo,
            hi,
            needed,
            samples: x.m(),
        });
    }
    let spec = spectrum(x);
    let blocks = (lo..=hi).map(|k| spec[mode_slot(k, x.m())].clone()).collect();
    Ok(LaurentMatrix::from_blocks(lo, blocks))
}

/// Fraction of the sample energy lying outside [lo, hi].
pub fn tail_fraction(x: &CircleSamples, lo: i64, hi: i64) -> f64 {
    let m = x.m();
    let spec = spectrum(x);
    let total: f64 = spec.iter().map(linalg::frob2).sum();
    if total == 0.0 {
        return 0.0;
    }
    let inside: f64 = (lo..=hi)
        .filter(|k| (k - lo) < m as i64)
        .map(|k| linalg::frob2(&spec[mode_slot(k, m)]))
        .sum();
    ((total - inside) / total).max(0.0)
}

/// Σ_k γ^{(k)} z_j^k at M points.
pub fn inverse_transform(lm: &LaurentMatrix, m: usize) -> Result<CircleSamples> {
    let width = (lm.hi - lm.lo + 1) as usize;
    if !m.is_power_of_two() || m < width {
        return Err(Error::Alias {
            lo: lm.lo,
            hi: lm.hi,
            needed: width.next_power_of_two(),
            samples: m,
        });
    }
    let n = lm.n;
    let fft = FftPlanner::new().plan_fft_inverse(m);
    let mut values = vec![linalg::zeros(n); m];
    let mut buf = vec![Complex64::default(); m];
    for r in 0..n {
        for c in 0..n {
            buf.iter_mut().for_each(|v| *v = Complex64::default());
            for k in lm.lo..=lm.hi {
                buf[mode_slot(k, m)] += lm.entry(k, r, c);
            }
            fft.process(&mut buf);
            for (j, v) in buf.iter().enumerate() {
                values[j][(r, c)] = *v;
            }
        }
    }
    CircleSamples::new(values)
}

/// Samples `f` on grids of growing size until the energy outside [lo, hi]
/// is below [`TAIL_TOL`], then transforms.
pub fn adaptive_transform(
    f: impl Fn(Complex64) -> CMat,
    lo: i64,
    hi: i64,
) -> Result<(LaurentMatrix, CircleSamples)> {
    let mut m = DEFAULT_SAMPLES.max((2 * (hi - lo + 1) as usize).next_power_of_two());
    loop {
        let x = CircleSamples::from_fn(m, &f)?;
        let tail = tail_fraction(&x, lo, hi);
        if tail < TAIL_TOL {
            return Ok((transform(&x, lo, hi)?, x));
        }
        if m >= MAX_SAMPLES {
            return Err(Error::Truncation(format!(
                "out-of-band energy {tail:.3e} at M = {m} for band [{lo}, {hi}]"
            )));
        }
        m *= 2;
    }
}

/// (ab)^{(k)} = Σ_j a^{(j)} b^{(k−j)} for k in [lo, hi].
pub fn lm_mul(a: &LaurentMatrix, b: &LaurentMatrix, lo: i64, hi: i64) -> LaurentMatrix {
    assert_eq!(a.n, b.n, "block sizes differ");
    let mut r = LaurentMatrix::zeros(a.n, lo, hi);
    for k in lo..=hi {
        let out = r.block_mut(k);
        let j_lo = a.lo.max(k - b.hi);
        let j_hi = a.hi.min(k - b.lo);
        for j in j_lo..=j_hi {
            *out += &a.coeffs[(j - a.lo) as usize] * &b.coeffs[(k - j - b.lo) as usize];
        }
    }
    r
}

/// Pointwise inverse together with the worst sample condition number.
pub fn invert_symbol(x: &CircleSamples) -> Result<(CircleSamples, f64)> {
    let mut worst: f64 = 1.0;
    let mut values = Vec::with_capacity(x.m());
    for (j, v) in x.values.iter().enumerate() {
        let cond = linalg::cond2(v);
        if !(cond <= MAX_SAMPLE_COND) {
            return Err(Error::NearSingularSymbol { index: j, cond });
        }
        worst = worst.max(cond);
        let inv = linalg::inverse(v).ok_or(Error::NearSingularSymbol {
            index: j,
            cond: f64::INFINITY,
        })?;
        values.push(inv);
    }
    Ok((CircleSamples { n: x.n, values }, worst))
}

/// Norms of the L_{1/2} loop group and the winding of det γ.
#[derive(Clone, Debug, PartialEq)]
pub struct Admissibility {
    pub norm_inf: f64,
    pub norm_2half: f64,
    pub winding: i64,
}

/// Winding number of det γ about 0 by phase accumulation between samples.
pub fn winding_number(x: &CircleSamples) -> Result<i64> {
    let (_, w) = unwrapped_log_det(x)?;
    Ok(w)
}

/// Continuously unwrapped log det on the grid and the winding it accrues.
fn unwrapped_log_det(x: &CircleSamples) -> Result<(Vec<Complex64>, i64)> {
    let d = x.dets();
    let scale = d.iter().map(|v| v.norm()).fold(0.0, f64::max);
    for (j, v) in d.iter().enumerate() {
        if v.norm() <= 1e-14 * scale.max(1e-300) || v.norm() == 0.0 {
            return Err(Error::WindingUndefined(j));
        }
    }
    let mut logs = Vec::with_capacity(d.len());
    let mut cur = d[0].ln();
    logs.push(cur);
    let mut total_phase = 0.0;
    for j in 0..d.len() {
        let next = d[(j + 1) % d.len()];
        let step = (next / d[j]).ln();
        if step.im.abs() > PI / 2.0 {
            return Err(Error::Branch(format!(
                "phase jump {:.3} between samples {} and {} exceeds pi/2; refine the grid",
                step.im,
                j,
                (j + 1) % d.len()
            )));
        }
        total_phase += step.im;
        if j + 1 < d.len() {
            cur += step;
            logs.push(cur);
        }
    }
    Ok((logs, (total_phase / (2.0 * PI)).round() as i64))
}

pub fn admissibility(lm: &LaurentMatrix) -> Result<Admissibility> {
    let width = (lm.hi - lm.lo + 1) as usize;
    let mut m = DEFAULT_SAMPLES.max((4 * width).next_power_of_two());
    let norm_2half = (lm.lo..=lm.hi)
        .map(|k| ((k.unsigned_abs() as f64) * linalg::frob2(&lm.block(k))).sqrt())
        .sum();
    loop {
        let x = inverse_transform(lm, m)?;
        let norm_inf = x
            .values
            .iter()
            .map(|v| v.clone().singular_values().iter().cloned().fold(0.0, f64::max))
            .fold(0.0, f64::max);
        match winding_number(&x) {
            Ok(winding) => {
                return Ok(Admissibility {
                    norm_inf,
                    norm_2half,
                    winding,
                })
            }
            Err(Error::Branch(_)) if m < MAX_SAMPLES => m *= 2,
            Err(e) => return Err(e),
        }
    }
}

/// G(γ) = exp of the mean of the unwrapped log det over the grid.
pub fn geometric_mean(x: &CircleSamples) -> Result<Complex64> {
    let (logs, w) = unwrapped_log_det(x)?;
    if w != 0 {
        return Err(Error::Branch(format!("det has winding {w}")));
    }
    let mean = logs.iter().sum::<Complex64>() / logs.len() as f64;
    Ok(mean.exp())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::linalg::c;

    fn diag(a: Complex64, b: Complex64) -> CMat {
        CMat::from_row_slice(2, 2, &[a, c(0.0, 0.0), c(0.0, 0.0), b])
    }

    #[test]
    fn constant_and_monomial_transforms() {
        let x = CircleSamples::from_fn(8, |_| linalg::identity(2)).unwrap();
        let lm = transform(&x, -2, 1).unwrap();
        assert!(linalg::max_abs_diff(&lm.block(0), &linalg::identity(2)) < 1e-15);
        assert!(lm.max_abs_in(-2, -1) < 1e-15 && lm.max_abs_in(1, 1) < 1e-15);

        let x = CircleSamples::from_fn(8, |z| linalg::identity(2) * z).unwrap();
        let lm = transform(&x, -1, 2).unwrap();
        assert!(linalg::max_abs_diff(&lm.block(1), &linalg::identity(2)) < 1e-15);
        assert!(lm.max_abs_in(-1, 0) < 1e-15 && lm.max_abs_in(2, 2) < 1e-15);
    }

    #[test]
    fn wide_band_is_an_alias_error() {
        let x = CircleSamples::from_fn(8, |_| linalg::identity(1)).unwrap();
        assert!(matches!(transform(&x, -3, 1), Err(Error::Alias { .. })));
    }

    #[test]
    fn geometric_series_inverse() {
        let (cc, d) = (0.6f64, 0.3f64);
        let x = CircleSamples::from_fn(64, |z| {
            diag(c(1.0, 0.0) - cc * cc / z, c(1.0, 0.0) - d * d / z)
        })
        .unwrap();
        let (inv, cond) = invert_symbol(&x).unwrap();
        assert!(cond < 10.0);
        let lm = transform(&inv, -20, 0).unwrap();
        for k in 0..=20 {
            let e0 = (cc * cc).powi(k as i32);
            let e1 = (d * d).powi(k as i32);
            assert!((lm.entry(-k, 0, 0) - e0).norm() < 1e-12);
            assert!((lm.entry(-k, 1, 1) - e1).norm() < 1e-12);
        }
    }

    #[test]
    fn singular_sample_is_rejected() {
        let x = CircleSamples::from_fn(8, |z| diag(c(1.0, 0.0) - z, c(1.0, 0.0))).unwrap();
        assert!(matches!(invert_symbol(&x), Err(Error::NearSingularSymbol { index: 0, .. })));
    }

    #[test]
    fn admissibility_examples() {
        let a = admissibility(&LaurentMatrix::identity(2)).unwrap();
        assert!((a.norm_inf - 1.0).abs() < 1e-14 && a.norm_2half == 0.0 && a.winding == 0);
        let z = LaurentMatrix::scalar(1, &[c(1.0, 0.0)]);
        assert_eq!(admissibility(&z).unwrap().winding, 1);
    }

    #[test]
    fn geometric_mean_examples() {
        let x = CircleSamples::from_fn(16, |_| linalg::identity(3)).unwrap();
        assert!((geometric_mean(&x).unwrap() - 1.0).norm() < 1e-15);
        let x = CircleSamples::from_fn(16, |_| linalg::identity(1) * c(2.5, 0.0)).unwrap();
        assert!((geometric_mean(&x).unwrap() - 2.5).norm() < 1e-14);
        let x = CircleSamples::from_fn(16, |z| linalg::identity(1) * z).unwrap();
        assert!(matches!(geometric_mean(&x), Err(Error::Branch(_))));
    }

    #[test]
    fn shifted_geometric_series_product() {
        let cc = 0.6f64;
        let b = 30i64;
        let a = LaurentMatrix::scalar(-1, &[c(-cc * cc, 0.0), c(1.0, 0.0)]);
        let geo: Vec<Complex64> = (0..=b).rev().map(|k| c((cc * cc).powi(k as i32), 0.0)).collect();
        let g = LaurentMatrix::scalar(-b, &geo);
        let p = lm_mul(&a, &g, -b, 0);
        assert!((p.entry(0, 0, 0) - 1.0).norm() < 1e-15);
        for k in -b + 1..0 {
            assert!(p.entry(k, 0, 0).norm() < 1e-15);
        }
        // the only tail term sits just below the band
        let tail = lm_mul(&a, &g, -b - 1, -b - 1).entry(-b - 1, 0, 0);
        assert!((tail.norm() - (cc * cc).powi(b as i32 + 1)).abs() < 1e-15);
    }

    #[test]
    fn csv_round_trip() {
        let lm = LaurentMatrix::from_blocks(
            -1,
            vec![diag(c(0.5, 0.25), c(-1.0, 0.0)), linalg::identity(2)],
        );
        let back = LaurentMatrix::from_csv(&lm.to_csv()).unwrap();
        assert_eq!(back, lm);
    }
}
