//! ψ e^{−ξ} = τ(t − [z⁻¹])/τ(t) = 1 + Σ_r w_r(t) z^{−r}.

use num_complex::Complex64;

use super::{tau_graded, GradedOptions};
use crate::error::Result;
use crate::gradedpoly::{sato_shift, GradedPoly};
use crate::symbols::SymbolSpec;

/// w_0..w_orders to degree Q. τ is built to degree Q + orders so that each
/// shifted coefficient is exact through Q.
pub fn wave_function(
    spec: &SymbolSpec,
    nb: usize,
    q: usize,
    orders: usize,
    opts: GradedOptions,
) -> Result<Vec<GradedPoly>> {
    let tau = tau_graded(spec, nb, q + orders, opts)?;
    let inv = tau.invert()?;
    Ok(sato_shift(&tau, orders)
        .iter()
        .map(|s| s.mul(&inv).truncate(q))
        .collect())
}

/// w_r(0) for r ≤ orders. Every time t₁..t_orders is kept active, since the
/// value at 0 sees each direction of the shift.
pub fn wave_function_at_zero(spec: &SymbolSpec, nb: usize, orders: usize) -> Result<Vec<Complex64>> {
    let opts = GradedOptions::for_degree(orders.max(1), false);
    Ok(wave_function(spec, nb, 0, orders, opts)?
        .iter()
        .map(|w| w.constant_term())
        .collect())
}
