//! Coherent-state overlaps and the Husimi field `Q = |⟨z|ψ⟩|²`.
//!
//! The position kernel of the coherent state is
//!
//! ```text
//! ⟨x|z⟩ = (γ²/πħ)^{1/4} exp[−γ²(x − x_z)²/(2ħ) + i p_z x/ħ − i p_z x_z/(2ħ)]
//! ```
//!
//! which coincides with `e^{−|z|²/2} e^{z a†}|0⟩` in the Hermite-function
//! basis, so `⟨z|n⟩ = e^{−|z|²/2} z*^n/√n!`.

use std::sync::Arc;

use ndarray::{Array1, Array2};
use num_complex::Complex64 as C64;

use crate::error::{Error, Result};
use crate::grid::{PhaseSpaceGrid, PositionGrid};
use crate::params::OscillatorParams;
use crate::spectral::{boundary_ratio, Spectral2D};

/// Edge magnitude allowed for a contained wavepacket, relative to its peak.
pub const CONTAINMENT_TOL: f64 = 1e-10;
/// Edge value of Q allowed before spectral derivatives are refused.
pub const SPECTRAL_DECAY_TOL: f64 = 1e-12;
/// Deepest derivative the stack will build.
pub const MAX_STACK_DEPTH: usize = 6;

#[derive(Clone, Debug)]
pub struct PositionWavefunction {
    pub grid: PositionGrid,
    pub values: Array1<C64>,
    pub params: OscillatorParams,
}

impl PositionWavefunction {
    pub fn new(grid: PositionGrid, values: Array1<C64>, params: OscillatorParams) -> Result<Self> {
        grid.validate()?;
        if values.len() != grid.n {
            return Err(Error::Argument(format!("{} samples for a grid of {}", values.len(), grid.n)));
        }
        Ok(PositionWavefunction { grid, values, params })
    }

    pub fn zeros(grid: PositionGrid, params: OscillatorParams) -> Self {
        PositionWavefunction { grid, values: Array1::zeros(grid.n), params }
    }

    /// ∫|ψ|² dx (Riemann sum, spectrally accurate on a periodic grid).
    pub fn norm_sqr(&self) -> f64 {
        self.values.iter().map(|v| v.norm_sqr()).sum::<f64>() * self.grid.dx()
    }

    pub fn normalized(mut self) -> Self {
        let n = self.norm_sqr().sqrt();
        if n > 0.0 {
            self.values.mapv_inplace(|v| v / n);
        }
        self
    }

    pub fn is_normalized(&self) -> bool {
        (self.norm_sqr() - 1.0).abs() <= 1e-10
    }

    /// ⟨self|other⟩.
    pub fn inner(&self, other: &Self) -> C64 {
        self.values.iter().zip(other.values.iter()).map(|(a, b)| a.conj() * b).sum::<C64>() * self.grid.dx()
    }

    /// L² distance ‖self − other‖.
    pub fn distance(&self, other: &Self) -> f64 {
        (self.values.iter().zip(other.values.iter()).map(|(a, b)| (a - b).norm_sqr()).sum::<f64>()
            * self.grid.dx())
        .sqrt()
    }

    pub fn mean_position(&self) -> f64 {
        let dx = self.grid.dx();
        self.values.iter().enumerate().map(|(i, v)| v.norm_sqr() * self.grid.x(i)).sum::<f64>() * dx
            / self.norm_sqr()
    }

    pub fn position_variance(&self) -> f64 {
        let mean = self.mean_position();
        let dx = self.grid.dx();
        self.values
            .iter()
            .enumerate()
            .map(|(i, v)| v.norm_sqr() * (self.grid.x(i) - mean).powi(2))
            .sum::<f64>()
            * dx
            / self.norm_sqr()
    }

    /// Edge magnitude relative to the peak magnitude.
    pub fn edge_ratio(&self) -> f64 {
        let peak = self.values.iter().fold(0.0f64, |m, v| m.max(v.norm()));
        if peak == 0.0 {
            return 0.0;
        }
        let n = self.values.len();
        self.values[0].norm().max(self.values[n - 1].norm()) / peak
    }

    pub fn check_contained(&self) -> Result<()> {
        let r = self.edge_ratio();
        if r < CONTAINMENT_TOL {
            Ok(())
        } else {
            Err(Error::Containment(format!("edge/peak amplitude ratio {r:.3e} ≥ {CONTAINMENT_TOL:.0e}")))
        }
    }
}

/// ⟨x|z⟩ sampled on the grid.
pub fn coherent_state_values(z: C64, grid: &PositionGrid, params: &OscillatorParams) -> Array1<C64> {
    let (xz, pz) = params.xp_of(z);
    let g2 = params.gamma().powi(2);
    let h = params.hbar;
    let norm = (g2 / (std::f64::consts::PI * h)).powf(0.25);
    Array1::from_shape_fn(grid.n, |i| {
        let x = grid.x(i);
        let phase = pz * x / h - pz * xz / (2.0 * h);
        norm * (-g2 * (x - xz).powi(2) / (2.0 * h)).exp() * C64::from_polar(1.0, phase)
    })
}

pub fn coherent_state(z: C64, grid: PositionGrid, params: OscillatorParams) -> PositionWavefunction {
    PositionWavefunction { values: coherent_state_values(z, &grid, &params), grid, params }
}

/// Normalized Hermite functions ⟨x|n⟩ for n = 0..count.
pub fn fock_state_values(count: usize, grid: &PositionGrid, params: &OscillatorParams) -> Vec<Array1<C64>> {
    let scale = params.gamma() / params.hbar.sqrt();
    let pref = scale.sqrt() * std::f64::consts::PI.powf(-0.25);
    let mut out: Vec<Array1<f64>> = Vec::with_capacity(count);
    let xi = Array1::from_shape_fn(grid.n, |i| scale * grid.x(i));
    for n in 0..count {
        let next = match n {
            0 => xi.mapv(|s| pref * (-s * s / 2.0).exp()),
            1 => &xi * &out[0] * 2f64.sqrt(),
            _ => {
                let a = (2.0 / n as f64).sqrt();
                let b = ((n - 1) as f64 / n as f64).sqrt();
                &xi * &out[n - 1] * a - &out[n - 2] * b
            }
        };
        out.push(next);
    }
    out.into_iter().map(|v| v.mapv(C64::from)).collect()
}

/// Σ c_n |n⟩ on the grid (not renormalized).
pub fn fock_superposition(coeffs: &[C64], grid: PositionGrid, params: OscillatorParams) -> PositionWavefunction {
    let basis = fock_state_values(coeffs.len(), &grid, &params);
    let mut values = Array1::zeros(grid.n);
    for (c, b) in coeffs.iter().zip(basis) {
        values = values + b * *c;
    }
    PositionWavefunction { grid, values, params }
}

/// ⟨z|ψ⟩ by direct quadrature over the position grid.
pub fn coherent_overlap(z: C64, wf: &PositionWavefunction) -> C64 {
    let kernel = coherent_state_values(z, &wf.grid, &wf.params);
    kernel.iter().zip(wf.values.iter()).map(|(k, v)| k.conj() * v).sum::<C64>() * wf.grid.dx()
}

/// ⟨z|ψ⟩ for ψ = Σ c_n |n⟩, from the Bargmann series.
pub fn fock_amplitude(coeffs: &[C64], z: C64) -> C64 {
    let zc = z.conj();
    let mut term = C64::new(1.0, 0.0);
    let mut acc = C64::new(0.0, 0.0);
    for (n, c) in coeffs.iter().enumerate() {
        if n > 0 {
            term *= zc / (n as f64).sqrt();
        }
        acc += c * term;
    }
    acc * (-z.norm_sqr() / 2.0).exp()
}

/// Amplitude ⟨z|ψ⟩ and Husimi function Q on a phase-space grid.
#[derive(Clone, Debug)]
pub struct HusimiField {
    pub grid: PhaseSpaceGrid,
    pub amplitude: Array2<C64>,
    pub q: Array2<f64>,
    pub t: f64,
    /// Wavefunction the field was computed from, kept for off-grid evaluation.
    pub source: Option<Arc<PositionWavefunction>>,
}

impl HusimiField {
    pub fn from_amplitude(grid: PhaseSpaceGrid, amplitude: Array2<C64>, t: f64) -> Result<Self> {
        if amplitude.dim() != grid.shape() {
            return Err(Error::GridMismatch(format!("amplitude {:?} vs grid {:?}", amplitude.dim(), grid.shape())));
        }
        let q = amplitude.mapv(|a| a.norm_sqr());
        Ok(HusimiField { grid, amplitude, q, t, source: None })
    }

    /// Exact field of the Fock superposition Σ c_n |n⟩.
    pub fn from_fock(grid: PhaseSpaceGrid, coeffs: &[C64]) -> Self {
        let amplitude = Array2::from_shape_fn(grid.shape(), |(i, j)| fock_amplitude(coeffs, grid.z(i, j)));
        Self::from_amplitude(grid, amplitude, 0.0).expect("shape matches by construction")
    }

    pub fn at_time(mut self, t: f64) -> Self {
        self.t = t;
        self
    }

    /// Amplitude at an arbitrary z, from the source wavefunction when present.
    pub fn amplitude_at(&self, z: C64) -> Option<C64> {
        self.source.as_ref().map(|wf| coherent_overlap(z, wf))
    }

    pub fn max_q(&self) -> f64 {
        self.q.iter().fold(0.0, |m, &v| m.max(v))
    }
}

/// Husimi field of a wavefunction.
///
/// For each phase-space row `x_z` the overlap is a Gaussian-windowed Fourier
/// integral in `x`; all rows and momenta are evaluated together as one dense
/// product `window(x_z, x)·ψ(x) × e^{−i p x/ħ}`.
pub fn husimi_field(wf: &PositionWavefunction, grid: &PhaseSpaceGrid) -> Result<HusimiField> {
    wf.check_contained()?;
    if wf.params != grid.params {
        return Err(Error::GridMismatch("wavefunction and phase-space grid use different parameters".into()));
    }
    let params = &grid.params;
    let g2 = params.gamma().powi(2);
    let h = params.hbar;
    let n = wf.grid.n;
    let dx = wf.grid.dx();
    let norm = (g2 / (std::f64::consts::PI * h)).powf(0.25) * dx;
    let xs = wf.grid.nodes();

    let window = Array2::from_shape_fn((grid.nx, n), |(i, k)| {
        let d = xs[k] - grid.x(i);
        wf.values[k] * (norm * (-g2 * d * d / (2.0 * h)).exp())
    });
    let waves = Array2::from_shape_fn((n, grid.np), |(k, j)| C64::from_polar(1.0, -grid.p(j) * xs[k] / h));
    let mut amplitude = window.dot(&waves);
    for ((i, j), a) in amplitude.indexed_iter_mut() {
        *a *= C64::from_polar(1.0, grid.p(j) * grid.x(i) / (2.0 * h));
    }
    let mut field = HusimiField::from_amplitude(*grid, amplitude, 0.0)?;
    field.source = Some(Arc::new(wf.clone()));
    Ok(field)
}

/// ∫Q dx dp/(2πħ) over the grid.
pub fn normalization_integral(field: &HusimiField) -> f64 {
    field.q.sum() * field.grid.cell_measure()
}

/// `dq[j] = ∂^j Q/∂z^j`; the z* derivatives are the complex conjugates.
#[derive(Clone, Debug)]
pub struct DerivativeStack {
    pub base: HusimiField,
    pub dq: Vec<Array2<C64>>,
}

impl DerivativeStack {
    pub fn depth(&self) -> usize {
        self.dq.len() - 1
    }

    /// ∂^j Q/∂z^j.
    pub fn dz(&self, j: usize) -> &Array2<C64> {
        &self.dq[j]
    }

    /// ∂^j Q/∂z*^j.
    pub fn dzs(&self, j: usize) -> Array2<C64> {
        self.dq[j].mapv(|v| v.conj())
    }

    pub fn grid(&self) -> &PhaseSpaceGrid {
        &self.base.grid
    }
}

/// Spectral z-derivatives of Q up to order `j_max`.
pub fn z_derivative_stack(field: &HusimiField, j_max: usize) -> Result<DerivativeStack> {
    z_derivative_stack_with(field, j_max, &Spectral2D::new(&field.grid))
}

pub fn z_derivative_stack_with(field: &HusimiField, j_max: usize, spectral: &Spectral2D) -> Result<DerivativeStack> {
    if j_max > MAX_STACK_DEPTH {
        return Err(Error::Argument(format!("stack depth {j_max} exceeds {MAX_STACK_DEPTH}")));
    }
    let ratio = boundary_ratio(&field.q);
    if ratio > SPECTRAL_DECAY_TOL {
        return Err(Error::SpectralValidity(format!(
            "Q at the grid edge is {ratio:.3e} of its maximum (limit {SPECTRAL_DECAY_TOL:.0e})"
        )));
    }
    let mut dq = spectral.z_derivatives(&field.q.mapv(C64::from), j_max);
    dq[0] = field.q.mapv(C64::from);
    Ok(DerivativeStack { base: field.clone(), dq })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn unit_params() -> OscillatorParams {
        OscillatorParams::new(1.0, 1.0, 1.0).unwrap()
    }

    fn pgrid() -> PositionGrid {
        PositionGrid::new(-16.0, 16.0, 512).unwrap()
    }

    #[test]
    fn coherent_state_is_normalized_and_centered() {
        let params = OscillatorParams::new(0.5, 2.0, 1.0).unwrap();
        let z0 = C64::new(-0.866, 0.9228);
        let wf = coherent_state(z0, pgrid(), params);
        assert!((wf.norm_sqr() - 1.0).abs() < 1e-12);
        assert!((wf.mean_position() - (-0.866 * 2f64.sqrt())).abs() < 1e-12);
        assert!((coherent_overlap(z0, &wf) - C64::new(1.0, 0.0)).norm() < 1e-8);
    }

    #[test]
    fn coherent_overlap_is_gaussian() {
        let params = OscillatorParams::new(0.7, 1.8, 0.6).unwrap();
        let z0 = C64::new(0.4, -0.3);
        let wf = coherent_state(z0, pgrid(), params);
        for z in [C64::new(1.0, 0.5), C64::new(-0.7, -1.1), C64::new(0.0, 2.0)] {
            let o = coherent_overlap(z, &wf);
            assert!((o.norm_sqr() - (-(z - z0).norm_sqr()).exp()).abs() < 1e-8);
        }
    }

    #[test]
    fn ground_state_overlap() {
        let params = unit_params();
        let wf = fock_superposition(&[C64::new(1.0, 0.0)], pgrid(), params);
        for z in [C64::new(0.3, 0.9), C64::new(-1.4, 0.2)] {
            let o = coherent_overlap(z, &wf);
            assert!((o - C64::from((-z.norm_sqr() / 2.0).exp())).norm() < 1e-10);
        }
    }

    #[test]
    fn fock_states_match_bargmann_series() {
        let params = OscillatorParams::new(1.3, 0.9, 0.8).unwrap();
        let coeffs = [C64::new(0.3, 0.1), C64::new(-0.2, 0.5), C64::new(0.0, 0.0), C64::new(0.4, -0.2), C64::new(0.1, 0.1)];
        let wf = fock_superposition(&coeffs, pgrid(), params);
        for z in [C64::new(0.5, -0.2), C64::new(-1.0, 1.2)] {
            assert!((coherent_overlap(z, &wf) - fock_amplitude(&coeffs, z)).norm() < 1e-10);
        }
        let basis = fock_state_values(6, &pgrid(), &params);
        for a in 0..6 {
            for b in 0..6 {
                let ip: C64 = basis[a].iter().zip(basis[b].iter()).map(|(u, v)| u.conj() * v).sum::<C64>() * pgrid().dx();
                let expect = if a == b { 1.0 } else { 0.0 };
                assert!((ip - C64::from(expect)).norm() < 1e-12);
            }
        }
    }

    #[test]
    fn husimi_field_of_coherent_state() {
        let params = OscillatorParams::new(0.5, 2.0, 1.0).unwrap();
        let z0 = C64::new(-0.866, 0.9228);
        let wf = coherent_state(z0, pgrid(), params);
        let grid = PhaseSpaceGrid::square(4.0, 256, params).unwrap();
        let field = husimi_field(&wf, &grid).unwrap();
        let mut err: f64 = 0.0;
        let mut best = (0, 0);
        for ((i, j), &q) in field.q.indexed_iter() {
            err = err.max((q - (-(grid.z(i, j) - z0).norm_sqr()).exp()).abs());
            if q > field.q[best] {
                best = (i, j);
            }
        }
        assert!(err < 1e-6, "L∞ error {err}");
        assert!(field.max_q() <= 1.0 + 1e-9 && field.max_q() > 0.99);
        let (x0, p0) = params.xp_of(z0);
        assert!((grid.x(best.0) - x0).abs() <= grid.dx());
        assert!((grid.p(best.1) - p0).abs() <= grid.dp());
        assert!(field.q.iter().all(|&q| q >= 0.0));
    }

    #[test]
    fn zero_and_excited_states() {
        let params = unit_params();
        let grid = PhaseSpaceGrid::square(6.0, 64, params).unwrap();
        let zero = husimi_field(&PositionWavefunction::zeros(pgrid(), params), &grid).unwrap();
        assert!(zero.q.iter().all(|&q| q == 0.0));
        assert_eq!(normalization_integral(&zero), 0.0);

        let one = fock_superposition(&[C64::from(0.0), C64::from(1.0)], pgrid(), params);
        let field = husimi_field(&one, &grid).unwrap();
        for ((i, j), &q) in field.q.indexed_iter() {
            let z = grid.z(i, j);
            assert!((q - z.norm_sqr() * (-z.norm_sqr()).exp()).abs() < 1e-10);
        }
        // node (32, 32) is the origin
        assert!(field.q[[32, 32]] < 1e-20);
    }

    #[test]
    fn containment_is_enforced() {
        let params = unit_params();
        let wf = coherent_state(C64::new(10.0, 0.0), PositionGrid::new(-8.0, 8.0, 256).unwrap(), params);
        let grid = PhaseSpaceGrid::square(4.0, 32, params).unwrap();
        assert!(matches!(husimi_field(&wf, &grid), Err(Error::Containment(_))));
    }

    #[test]
    fn normalization_examples() {
        let params = OscillatorParams::new(0.5, 2.0, 1.0).unwrap();
        let grid = PhaseSpaceGrid::square(10.0, 128, params).unwrap();
        let coh = husimi_field(&coherent_state(C64::new(-0.866, 0.9228), pgrid(), params), &grid).unwrap();
        assert!((normalization_integral(&coh) - 1.0).abs() < 1e-3);
        let s = std::f64::consts::FRAC_1_SQRT_2;
        let sup = HusimiField::from_fock(grid, &[C64::from(s), C64::from(s)]);
        assert!((normalization_integral(&sup) - 1.0).abs() < 1e-3);
    }

    fn coherent_field(grid: &PhaseSpaceGrid, z0: C64) -> HusimiField {
        let amp = Array2::from_shape_fn(grid.shape(), |(i, j)| {
            fock_amplitude(&[C64::from(1.0)], grid.z(i, j) - z0)
        });
        HusimiField::from_amplitude(*grid, amp, 0.0).unwrap()
    }

    #[test]
    fn first_z_derivative_of_coherent_q() {
        let params = OscillatorParams::new(0.5, 2.0, 1.0).unwrap();
        let grid = PhaseSpaceGrid::square(10.0, 256, params).unwrap();
        let z0 = C64::new(-0.866, 0.9228);
        let field = coherent_field(&grid, z0);
        let stack = z_derivative_stack(&field, 2).unwrap();
        for ((i, j), &q) in field.q.indexed_iter() {
            if q > 1e-6 {
                let expect = -(grid.z(i, j) - z0).conj() * q;
                assert!((stack.dz(1)[[i, j]] - expect).norm() <= 1e-6 * q.max(expect.norm()));
            }
        }
        for j in 0..=2 {
            let s = stack.dzs(j);
            assert!(s.iter().zip(stack.dz(j).iter()).all(|(a, b)| (a - b.conj()).norm() == 0.0));
        }
    }

    #[test]
    fn stack_depth_zero_and_limits() {
        let params = unit_params();
        let grid = PhaseSpaceGrid::square(10.0, 64, params).unwrap();
        let field = coherent_field(&grid, C64::new(0.2, 0.1));
        let stack = z_derivative_stack(&field, 0).unwrap();
        assert_eq!(stack.depth(), 0);
        assert!(stack.dz(0).iter().zip(field.q.iter()).all(|(a, &b)| *a == C64::from(b)));
        assert!(matches!(z_derivative_stack(&field, 7), Err(Error::Argument(_))));
        let narrow = PhaseSpaceGrid::square(3.0, 64, params).unwrap();
        assert!(matches!(
            z_derivative_stack(&coherent_field(&narrow, C64::default()), 2),
            Err(Error::SpectralValidity(_))
        ));
    }
}
