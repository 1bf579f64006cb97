//! Oscillator parameters fixing the coherent-state family and the map
//! between phase-space points `(x, p)` and coherent labels `z`.

use num_complex::Complex64 as C64;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct OscillatorParams {
    pub mass: f64,
    pub omega: f64,
    pub hbar: f64,
}

impl OscillatorParams {
    pub fn new(mass: f64, omega: f64, hbar: f64) -> Result<Self> {
        let p = OscillatorParams { mass, omega, hbar };
        p.validate()?;
        Ok(p)
    }

    pub fn validate(&self) -> Result<()> {
        for (name, v) in [("mass", self.mass), ("omega", self.omega), ("hbar", self.hbar)] {
            if !(v.is_finite() && v > 0.0) {
                return Err(Error::Validation(format!("{name} must be positive and finite, got {v}")));
            }
        }
        Ok(())
    }

    /// γ = √(mΩ).
    pub fn gamma(&self) -> f64 {
        (self.mass * self.omega).sqrt()
    }

    /// Scale of x̂ in units of (a + a†): √(ħ/2)/γ.
    pub fn x_scale(&self) -> f64 {
        (self.hbar / 2.0).sqrt() / self.gamma()
    }

    /// Scale of p̂ in units of i(a† − a): γ√(ħ/2).
    pub fn p_scale(&self) -> f64 {
        self.gamma() * (self.hbar / 2.0).sqrt()
    }

    /// z = (γx + ip/γ)/√(2ħ).
    pub fn z_of(&self, x: f64, p: f64) -> C64 {
        let g = self.gamma();
        C64::new(g * x, p / g) / (2.0 * self.hbar).sqrt()
    }

    /// Inverse of [`z_of`](Self::z_of).
    pub fn xp_of(&self, z: C64) -> (f64, f64) {
        let s = (2.0 * self.hbar).sqrt();
        let g = self.gamma();
        (s * z.re / g, s * z.im * g)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn rejects_nonpositive() {
        assert!(OscillatorParams::new(0.0, 1.0, 1.0).is_err());
        assert!(OscillatorParams::new(1.0, -1.0, 1.0).is_err());
        assert!(OscillatorParams::new(1.0, 1.0, f64::NAN).is_err());
    }

    #[test]
    fn z_map_round_trips() {
        let p = OscillatorParams::new(0.5, 2.0, 1.0).unwrap();
        assert_eq!(p.gamma(), 1.0);
        let z = C64::new(-0.866, 0.9228);
        let (x, q) = p.xp_of(z);
        assert!((x + 0.866 * 2f64.sqrt()).abs() < 1e-14);
        assert!((q - 0.9228 * 2f64.sqrt()).abs() < 1e-14);
        let back = p.z_of(x, q);
        assert!((back - z).norm() < 1e-14);
    }
}
