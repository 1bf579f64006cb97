//! Two-dimensional periodic spectral differentiation on a phase-space grid.

use std::sync::Arc;

use ndarray::{Array2, Axis};
use num_complex::Complex64 as C64;
use rustfft::{Fft, FftPlanner};

use crate::grid::{fft_wavenumbers, PhaseSpaceGrid};

/// FFT plans and wavenumbers for one phase-space grid.
pub struct Spectral2D {
    fwd_x: Arc<dyn Fft<f64>>,
    inv_x: Arc<dyn Fft<f64>>,
    fwd_p: Arc<dyn Fft<f64>>,
    inv_p: Arc<dyn Fft<f64>>,
    kx: Vec<f64>,
    kp: Vec<f64>,
    a: f64,
    b: f64,
}

impl Spectral2D {
    pub fn new(grid: &PhaseSpaceGrid) -> Self {
        let mut planner = FftPlanner::new();
        // derivative symbols drop the unpaired Nyquist mode
        let mut kx = fft_wavenumbers(grid.nx, grid.x_max - grid.x_min);
        kx[grid.nx / 2] = 0.0;
        let mut kp = fft_wavenumbers(grid.np, grid.p_max - grid.p_min);
        kp[grid.np / 2] = 0.0;
        Spectral2D {
            fwd_x: planner.plan_fft_forward(grid.nx),
            inv_x: planner.plan_fft_inverse(grid.nx),
            fwd_p: planner.plan_fft_forward(grid.np),
            inv_p: planner.plan_fft_inverse(grid.np),
            kx,
            kp,
            a: grid.params.x_scale(),
            b: grid.params.p_scale(),
        }
    }

    fn transform(&self, data: &mut Array2<C64>, forward: bool) {
        let (px, pp) = if forward { (&self.fwd_x, &self.fwd_p) } else { (&self.inv_x, &self.inv_p) };
        for mut row in data.axis_iter_mut(Axis(0)) {
            let mut buf = row.to_vec();
            pp.process(&mut buf);
            row.iter_mut().zip(buf).for_each(|(d, v)| *d = v);
        }
        for mut col in data.axis_iter_mut(Axis(1)) {
            let mut buf = col.to_vec();
            px.process(&mut buf);
            col.iter_mut().zip(buf).for_each(|(d, v)| *d = v);
        }
        if !forward {
            let norm = 1.0 / data.len() as f64;
            data.mapv_inplace(|v| v * norm);
        }
    }

    pub fn forward(&self, data: &Array2<C64>) -> Array2<C64> {
        let mut out = data.clone();
        self.transform(&mut out, true);
        out
    }

    pub fn inverse(&self, spectrum: &Array2<C64>) -> Array2<C64> {
        let mut out = spectrum.clone();
        self.transform(&mut out, false);
        out
    }

    /// Applies the Fourier multiplier `symbol(kx, kp)` to a spectrum and
    /// returns the result in real space.
    pub fn apply<F: Fn(f64, f64) -> C64>(&self, spectrum: &Array2<C64>, symbol: F) -> Array2<C64> {
        let mut out = spectrum.clone();
        for ((i, j), v) in out.indexed_iter_mut() {
            *v *= symbol(self.kx[i], self.kp[j]);
        }
        self.transform(&mut out, false);
        out
    }

    /// Fourier symbol of ∂/∂z = (√(ħ/2)/γ)∂/∂x − iγ√(ħ/2)∂/∂p.
    pub fn dz_symbol(&self, kx: f64, kp: f64) -> C64 {
        C64::new(self.b * kp, self.a * kx)
    }

    pub fn d_dx(&self, data: &Array2<C64>) -> Array2<C64> {
        self.apply(&self.forward(data), |kx, _| C64::new(0.0, kx))
    }

    pub fn d_dp(&self, data: &Array2<C64>) -> Array2<C64> {
        self.apply(&self.forward(data), |_, kp| C64::new(0.0, kp))
    }

    /// ∂^j f/∂z^j for j = 0..=j_max, from a single forward transform.
    pub fn z_derivatives(&self, data: &Array2<C64>, j_max: usize) -> Vec<Array2<C64>> {
        let spectrum = self.forward(data);
        (0..=j_max)
            .map(|j| {
                if j == 0 {
                    data.clone()
                } else {
                    self.apply(&spectrum, |kx, kp| self.dz_symbol(kx, kp).powu(j as u32))
                }
            })
            .collect()
    }

    /// ∂f_x/∂x + ∂f_p/∂p for real component arrays.
    pub fn divergence(&self, fx: &Array2<f64>, fp: &Array2<f64>) -> Array2<f64> {
        let dx = self.d_dx(&fx.mapv(C64::from));
        let dp = self.d_dp(&fp.mapv(C64::from));
        (dx + dp).mapv(|v| v.re)
    }
}

/// Largest |f| over the outermost ring of nodes, relative to the largest |f|.
pub fn boundary_ratio(data: &Array2<f64>) -> f64 {
    let (nx, np) = data.dim();
    let max = data.iter().fold(0.0f64, |m, v| m.max(v.abs()));
    if max == 0.0 {
        return 0.0;
    }
    let mut edge: f64 = 0.0;
    for i in 0..nx {
        edge = edge.max(data[[i, 0]].abs()).max(data[[i, np - 1]].abs());
    }
    for j in 0..np {
        edge = edge.max(data[[0, j]].abs()).max(data[[nx - 1, j]].abs());
    }
    edge / max
}
