//! Continuity checks: `∂Q/∂t + ∇·J = σ`.

use ndarray::Array2;
use num_complex::Complex64 as C64;

use super::FlowEngine;
use crate::algebra::{binomial, NormalOrderedHamiltonian};
use crate::error::{Error, Result};
use crate::grid::PhaseSpaceGrid;
use crate::husimi::{husimi_field, z_derivative_stack_with, DerivativeStack, PositionWavefunction};
use crate::propagator::{split_step, PotentialSpec};
use crate::spectral::Spectral2D;

/// ∂Q/∂t straight from the evolution equation of Q,
/// `iħ ∂Q/∂t = Σ h_{mn} z*^m (∂_{z*} + z)^n Q − c.c.`,
/// without going through the currents.
pub fn continuity_oracle(h: &NormalOrderedHamiltonian, stack: &DerivativeStack) -> Result<Array2<f64>> {
    let n_max = h.n_max() as usize;
    if stack.depth() < n_max {
        return Err(Error::Argument(format!("oracle needs stack depth {n_max}, got {}", stack.depth())));
    }
    let g = stack.grid();
    let hbar = g.params.hbar;
    let mut f = Array2::<C64>::zeros(g.shape());
    for ((i, j), out) in f.indexed_iter_mut() {
        let z = g.z(i, j);
        let zs = z.conj();
        for (m, n, c) in h.iter() {
            let mut inner = C64::new(0.0, 0.0);
            for l in 0..=n {
                inner += binomial(n, l) as f64 * z.powu(n - l) * stack.dz(l as usize)[[i, j]].conj();
            }
            *out += c * zs.powu(m) * inner;
        }
    }
    Ok(f.mapv(|v| 2.0 / hbar * v.im))
}

/// Pointwise residual of the continuity equation along a propagated state.
#[derive(Clone, Debug)]
pub struct Residual {
    pub field: Array2<f64>,
    /// RMS(R) / RMS(∇·J).
    pub rel_l2: f64,
    /// max|R| / max|∇·J|.
    pub rel_linf: f64,
}

/// Residual of `∂Q/∂t + ∇·J_exact − σ` at the time of `wf`, with ∂Q/∂t taken
/// as a central difference between one propagator step of `±dt`.
pub fn continuity_residual(
    engine: &FlowEngine,
    wf: &PositionWavefunction,
    potential: &PotentialSpec,
    grid: &PhaseSpaceGrid,
    dt: f64,
) -> Result<Residual> {
    if !(dt.is_finite() && dt > 0.0) {
        return Err(Error::Argument(format!("difference step {dt} must be positive")));
    }
    let spectral = Spectral2D::new(grid);
    let plus = split_step(wf, potential, dt)?;
    let minus = split_step(wf, potential, -dt)?;
    let qp = husimi_field(&plus, grid)?.q;
    let qm = husimi_field(&minus, grid)?.q;
    let dqdt = (qp - qm) / (2.0 * dt);

    let field = husimi_field(wf, grid)?;
    let stack = z_derivative_stack_with(&field, engine.required_depth(), &spectral)?;
    let j = engine.exact_current(&stack)?;
    let div = spectral.divergence(&j.jx, &j.jp);
    let sigma = engine.source_field(&field).sigma;
    let r = &dqdt + &div - &sigma;

    let rms = |a: &Array2<f64>| (a.iter().map(|v| v * v).sum::<f64>() / a.len() as f64).sqrt();
    let max = |a: &Array2<f64>| a.iter().fold(0.0f64, |m, v| m.max(v.abs()));
    Ok(Residual { rel_l2: rms(&r) / rms(&div), rel_linf: max(&r) / max(&div), field: r })
}
