//! Uniform periodic grids in position and in phase space.

use num_complex::Complex64 as C64;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::params::OscillatorParams;

/// Uniform periodic grid `x_i = x_min + i·dx`, `i < n`.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct PositionGrid {
    pub x_min: f64,
    pub x_max: f64,
    pub n: usize,
}

impl PositionGrid {
    pub fn new(x_min: f64, x_max: f64, n: usize) -> Result<Self> {
        let g = PositionGrid { x_min, x_max, n };
        g.validate()?;
        Ok(g)
    }

    pub fn validate(&self) -> Result<()> {
        if self.n < 8 || !self.n.is_power_of_two() {
            return Err(Error::Validation(format!("grid size {} must be a power of two ≥ 8", self.n)));
        }
        if !(self.x_min.is_finite() && self.x_max.is_finite() && self.x_max > self.x_min) {
            return Err(Error::Validation(format!(
                "grid bounds [{}, {}] are not an increasing finite interval",
                self.x_min, self.x_max
            )));
        }
        Ok(())
    }

    pub fn dx(&self) -> f64 {
        (self.x_max - self.x_min) / self.n as f64
    }

    pub fn x(&self, i: usize) -> f64 {
        self.x_min + i as f64 * self.dx()
    }

    pub fn nodes(&self) -> Vec<f64> {
        (0..self.n).map(|i| self.x(i)).collect()
    }

    /// Angular wavenumbers in FFT order.
    pub fn wavenumbers(&self) -> Vec<f64> {
        fft_wavenumbers(self.n, self.x_max - self.x_min)
    }
}

impl Default for PositionGrid {
    fn default() -> Self {
        PositionGrid { x_min: -32.0, x_max: 32.0, n: 1024 }
    }
}

/// Angular wavenumbers `2π·fftfreq(n)/dx` for a periodic box of length `len`.
pub(crate) fn fft_wavenumbers(n: usize, len: f64) -> Vec<f64> {
    let base = 2.0 * std::f64::consts::PI / len;
    (0..n)
        .map(|i| {
            let k = if i <= n / 2 { i as isize } else { i as isize - n as isize };
            base * k as f64
        })
        .collect()
}

/// Periodic phase-space grid; node `(i, j)` sits at `(x_i, p_j)` with
/// `x` the slow (row) index.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct PhaseSpaceGrid {
    pub x_min: f64,
    pub x_max: f64,
    pub nx: usize,
    pub p_min: f64,
    pub p_max: f64,
    pub np: usize,
    pub params: OscillatorParams,
}

impl PhaseSpaceGrid {
    pub fn new(x: (f64, f64, usize), p: (f64, f64, usize), params: OscillatorParams) -> Result<Self> {
        let g = PhaseSpaceGrid { x_min: x.0, x_max: x.1, nx: x.2, p_min: p.0, p_max: p.1, np: p.2, params };
        g.validate()?;
        Ok(g)
    }

    /// Square grid `[-half, half)²` with `n` nodes per axis.
    pub fn square(half: f64, n: usize, params: OscillatorParams) -> Result<Self> {
        Self::new((-half, half, n), (-half, half, n), params)
    }

    pub fn validate(&self) -> Result<()> {
        self.params.validate()?;
        for (name, lo, hi, n) in [("x", self.x_min, self.x_max, self.nx), ("p", self.p_min, self.p_max, self.np)] {
            if n < 8 || !n.is_power_of_two() {
                return Err(Error::Validation(format!("{name} count {n} must be a power of two ≥ 8")));
            }
            if !(lo.is_finite() && hi.is_finite() && hi > lo) {
                return Err(Error::Validation(format!("{name} range [{lo}, {hi}] is invalid")));
            }
        }
        Ok(())
    }

    pub fn dx(&self) -> f64 {
        (self.x_max - self.x_min) / self.nx as f64
    }

    pub fn dp(&self) -> f64 {
        (self.p_max - self.p_min) / self.np as f64
    }

    pub fn shape(&self) -> (usize, usize) {
        (self.nx, self.np)
    }

    pub fn x(&self, i: usize) -> f64 {
        self.x_min + i as f64 * self.dx()
    }

    pub fn p(&self, j: usize) -> f64 {
        self.p_min + j as f64 * self.dp()
    }

    pub fn z(&self, i: usize, j: usize) -> C64 {
        self.params.z_of(self.x(i), self.p(j))
    }

    /// Fractional grid coordinates of a phase-space point.
    pub fn locate(&self, x: f64, p: f64) -> (f64, f64) {
        ((x - self.x_min) / self.dx(), (p - self.p_min) / self.dp())
    }

    /// Distance measured in grid cells (each axis scaled by its spacing).
    pub fn cell_distance(&self, a: (f64, f64), b: (f64, f64)) -> f64 {
        (((a.0 - b.0) / self.dx()).powi(2) + ((a.1 - b.1) / self.dp()).powi(2)).sqrt()
    }

    /// Phase-space volume element in units of 2πħ.
    pub fn cell_measure(&self) -> f64 {
        self.dx() * self.dp() / (2.0 * std::f64::consts::PI * self.params.hbar)
    }

    pub fn same_as(&self, other: &Self) -> Result<()> {
        if self == other {
            Ok(())
        } else {
            Err(Error::GridMismatch(format!("{self:?} vs {other:?}")))
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn position_grid_validation() {
        assert!(PositionGrid::new(-1.0, 1.0, 100).is_err());
        assert!(PositionGrid::new(-1.0, 1.0, 4).is_err());
        assert!(PositionGrid::new(1.0, -1.0, 16).is_err());
        let g = PositionGrid::new(-8.0, 8.0, 1024).unwrap();
        assert_eq!(g.dx(), 1.0 / 64.0);
        assert_eq!(g.x(512), 0.0);
    }

    #[test]
    fn wavenumbers_in_fft_order() {
        let k = fft_wavenumbers(8, 2.0 * std::f64::consts::PI);
        assert_eq!(k, vec![0.0, 1.0, 2.0, 3.0, 4.0, -3.0, -2.0, -1.0]);
    }

    #[test]
    fn nodes_follow_z_map() {
        let params = OscillatorParams::new(2.0, 0.5, 0.3).unwrap();
        let g = PhaseSpaceGrid::square(4.0, 16, params).unwrap();
        let (x, p) = (g.x(3), g.p(11));
        let g2 = params.gamma();
        let z = C64::new(g2 * x, p / g2) / (2.0 * params.hbar).sqrt();
        assert_eq!(g.z(3, 11), z);
    }
}
