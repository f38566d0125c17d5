use std::fmt;

use num_complex::Complex64;

use super::GradedPoly;
use crate::error::{Error, Result};
use crate::linalg::{self, CMat};
use crate::ring;

/// Weakly decreasing sequence of nonnegative parts; trailing zeros dropped.
#[derive(Clone, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct Partition(Vec<usize>);

impl Partition {
    pub fn new(parts: &[usize]) -> Result<Partition> {
        if parts.windows(2).any(|w| w[0] < w[1]) {
            return Err(Error::Spec(format!(
                "partition parts must be weakly decreasing: {parts:?}"
            )));
        }
        let mut v = parts.to_vec();
        while v.last() == Some(&0) {
            v.pop();
        }
        Ok(Partition(v))
    }

    pub fn empty() -> Partition {
        Partition(Vec::new())
    }

    pub fn parts(&self) -> &[usize] {
        &self.0
    }

    /// Number of nonzero parts.
    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    pub fn weight(&self) -> usize {
        self.0.iter().sum()
    }

    pub fn padded(&self, len: usize) -> Vec<usize> {
        let mut v = self.0.clone();
        v.resize(len.max(v.len()), 0);
        v
    }
}

impl fmt::Debug for Partition {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{:?}", self.0)
    }
}

impl fmt::Display for Partition {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let s: Vec<String> = self.0.iter().map(|p| p.to_string()).collect();
        write!(f, "({})", s.join(","))
    }
}

/// All partitions of weight ≤ `max_weight` with at most `max_len` parts,
/// in lexicographic order of weight then parts.
pub fn partitions_up_to(max_weight: usize, max_len: usize) -> Vec<Partition> {
    fn rec(rem: usize, cap: usize, len_left: usize, cur: &mut Vec<usize>, out: &mut Vec<Vec<usize>>) {
        out.push(cur.clone());
        if len_left == 0 {
            return;
        }
        for p in (1..=cap.min(rem)).rev() {
            cur.push(p);
            rec(rem - p, p, len_left - 1, cur, out);
            cur.pop();
        }
    }
    let mut out = Vec::new();
    rec(max_weight, max_weight, max_len, &mut Vec::new(), &mut out);
    let mut parts: Vec<Partition> = out.into_iter().map(Partition).collect();
    parts.sort_by(|a, b| a.weight().cmp(&b.weight()).then_with(|| b.0.cmp(&a.0)));
    parts
}

/// p₀..p_Q with Σ p_k z^k = exp(Σ t_i z^i); indices outside 0..=Q read as zero.
#[derive(Clone, Debug)]
pub struct SchurSequence {
    polys: Vec<GradedPoly>,
    zero: GradedPoly,
}

impl SchurSequence {
    /// Schur polynomials with the times selected by `frozen` set to zero.
    pub fn with_frozen(k: usize, q: usize, frozen: impl Fn(usize) -> bool) -> SchurSequence {
        let zero = GradedPoly::zero(k, q);
        let mut polys = vec![GradedPoly::one(k, q)];
        let vars: Vec<GradedPoly> = (1..=k)
            .map(|i| {
                if frozen(i) {
                    GradedPoly::zero(k, q)
                } else {
                    GradedPoly::var(k, q, i)
                }
            })
            .collect();
        for m in 1..=q {
            let mut acc = GradedPoly::zero(k, q);
            for i in 1..=m.min(k) {
                let term = vars[i - 1].mul(&polys[m - i]).scale(Complex64::new(i as f64, 0.0));
                acc = acc.add(&term);
            }
            polys.push(acc.scale(Complex64::new(1.0 / m as f64, 0.0)));
        }
        SchurSequence { polys, zero }
    }

    pub fn get(&self, k: i64) -> &GradedPoly {
        if k < 0 || k as usize >= self.polys.len() {
            &self.zero
        } else {
            &self.polys[k as usize]
        }
    }

    pub fn len(&self) -> usize {
        self.polys.len()
    }

    pub fn is_empty(&self) -> bool {
        false
    }
}

pub fn schur_sequence(k: usize, q: usize) -> SchurSequence {
    SchurSequence::with_frozen(k, q, |_| false)
}

/// Numeric values p₀(t)..p_kmax(t); `t[i-1]` is t_i.
pub fn schur_values(t: &[Complex64], kmax: usize) -> Vec<Complex64> {
    let mut p = vec![Complex64::new(1.0, 0.0)];
    for m in 1..=kmax {
        let mut acc = Complex64::default();
        for i in 1..=m.min(t.len()) {
            acc += t[i - 1] * i as f64 * p[m - i];
        }
        p.push(acc / m as f64);
    }
    p
}

/// Ratio det[x_i^{l_j+M−j}] / det[x_i^{M−j}] with M = |X|.
pub fn character(l: &Partition, x: &[Complex64]) -> Result<Complex64> {
    let m = x.len();
    if l.len() > m {
        return Err(Error::Spec(format!(
            "partition of length {} needs at least that many nodes, got {m}",
            l.len()
        )));
    }
    let scale = x.iter().map(|v| v.norm()).fold(1.0, f64::max);
    for i in 0..m {
        for j in i + 1..m {
            if (x[i] - x[j]).norm() <= 1e-14 * scale {
                return Err(Error::SingularVandermonde(i, j));
            }
        }
    }
    if m == 0 {
        return Ok(Complex64::new(1.0, 0.0));
    }
    let lp = l.padded(m);
    let num = CMat::from_fn(m, m, |i, j| x[i].powu((lp[j] + m - 1 - j) as u32));
    let den = CMat::from_fn(m, m, |i, j| x[i].powu((m - 1 - j) as u32));
    Ok(linalg::det(&num) / linalg::det(&den))
}

/// det[p_{l_j−j+i}(t)] over the nonzero parts.
pub fn jacobi_trudi(l: &Partition, k: usize, q: usize) -> GradedPoly {
    let s = schur_sequence(k, q);
    jacobi_trudi_with(l, &s)
}

/// [`jacobi_trudi`] over a prebuilt (possibly frozen) Schur sequence.
pub fn jacobi_trudi_with(l: &Partition, s: &SchurSequence) -> GradedPoly {
    let len = l.len();
    if len == 0 {
        return s.get(0).clone();
    }
    let parts = l.parts();
    let m: Vec<Vec<GradedPoly>> = (1..=len)
        .map(|i| {
            (1..=len)
                .map(|j| s.get(parts[j - 1] as i64 - j as i64 + i as i64).clone())
                .collect()
        })
        .collect();
    ring::det_subsets(&m)
}

/// t_k = (Σ_i x_i^k)/k for k = 1..K.
pub fn miwa_times(x: &[Complex64], k: usize) -> Vec<Complex64> {
    (1..=k)
        .map(|kk| x.iter().map(|v| v.powu(kk as u32)).sum::<Complex64>() / kk as f64)
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::gradedpoly::Monomial;

    fn c(x: f64) -> Complex64 {
        Complex64::new(x, 0.0)
    }

    #[test]
    fn low_schur_polynomials() {
        let s = schur_sequence(3, 4);
        assert!(s.get(0).approx_eq(&GradedPoly::one(3, 4), 0.0));
        let p2 = GradedPoly::from_terms(
            3,
            4,
            [
                (Monomial::from_exponents(&[0, 1]), c(1.0)),
                (Monomial::from_exponents(&[2]), c(0.5)),
            ],
        );
        assert!(s.get(2).approx_eq(&p2, 1e-15));
        let p3 = GradedPoly::from_terms(
            3,
            4,
            [
                (Monomial::from_exponents(&[0, 0, 1]), c(1.0)),
                (Monomial::from_exponents(&[1, 1]), c(1.0)),
                (Monomial::from_exponents(&[3]), c(1.0 / 6.0)),
            ],
        );
        assert!(s.get(3).approx_eq(&p3, 1e-15));
        assert!(s.get(-1).is_empty());
    }

    #[test]
    fn trivial_characters() {
        let x = [c(0.3), c(-1.2), Complex64::new(0.1, 0.7)];
        let e = character(&Partition::empty(), &x).unwrap();
        assert!((e - c(1.0)).norm() < 1e-14);
        let one = character(&Partition::new(&[1, 0, 0]).unwrap(), &x).unwrap();
        assert!((one - x.iter().sum::<Complex64>()).norm() < 1e-13);
        let jt = jacobi_trudi(&Partition::new(&[1]).unwrap(), 3, 3);
        assert!(jt.approx_eq(&GradedPoly::var(3, 3, 1), 1e-15));
    }

    #[test]
    fn repeated_nodes_are_rejected() {
        let x = [c(0.5), c(0.5)];
        assert!(matches!(
            character(&Partition::new(&[1]).unwrap(), &x),
            Err(Error::SingularVandermonde(0, 1))
        ));
    }

    #[test]
    fn character_equals_jacobi_trudi_at_miwa_times() {
        let x = [c(0.4), Complex64::new(-0.2, 0.5), c(0.9)];
        let l = Partition::new(&[2, 1, 0]).unwrap();
        let t = miwa_times(&x, 3);
        let jt = jacobi_trudi(&l, 3, 3).evaluate(&t);
        let ch = character(&l, &x).unwrap();
        assert!((jt - ch).norm() < 1e-12, "{jt} vs {ch}");
    }

    #[test]
    fn miwa_examples() {
        assert!(miwa_times(&[c(0.0), c(0.0)], 4).iter().all(|t| t.norm() == 0.0));
        let t = miwa_times(&[c(1.0)], 4);
        for (k, v) in t.iter().enumerate() {
            assert!((v - c(1.0 / (k + 1) as f64)).norm() < 1e-15);
        }
        let t = miwa_times(&[c(0.7), c(-0.7)], 5);
        assert!(t[0].norm() < 1e-15 && t[2].norm() < 1e-15 && t[4].norm() < 1e-15);
    }

    #[test]
    fn partition_enumeration_counts() {
        // p(0..=4) = 1,1,2,3,5
        assert_eq!(partitions_up_to(4, 4).len(), 12);
        assert_eq!(partitions_up_to(4, 2).len(), 1 + 1 + 2 + 2 + 3);
        assert!(Partition::new(&[1, 2]).is_err());
        assert_eq!(Partition::new(&[2, 1, 0, 0]).unwrap(), Partition::new(&[2, 1]).unwrap());
    }

    #[test]
    fn numeric_schur_matches_graded() {
        let t = [c(0.3), c(-0.1), c(0.25)];
        let v = schur_values(&t, 6);
        let s = schur_sequence(3, 6);
        for k in 0..=6 {
            assert!((s.get(k as i64).evaluate(&t) - v[k]).norm() < 1e-14);
        }
    }
}
