//! Split-operator (Strang) propagation of position wavefunctions
//!
//! One step applies `e^{−iV dt/2ħ} · e^{−iT dt/ħ} · e^{−iV dt/2ħ}`, the
//! kinetic factor multiplying in momentum space between FFTs.

use std::sync::Arc;

use num_complex::Complex64 as C64;
use rustfft::{Fft, FftPlanner};
use serde::{Deserialize, Serialize};

use crate::algebra::XPPolynomial;
use crate::error::{Error, Result};
use crate::grid::PositionGrid;
use crate::husimi::{coherent_state, PositionWavefunction};
use crate::params::OscillatorParams;

pub const MAX_POTENTIAL_DEGREE: usize = 8;

/// `H = p²/2m + V(x)` with `V(x) = Σ (real[i] + i·imag[i]) x^i`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct PotentialSpec {
    pub real: Vec<f64>,
    #[serde(default)]
    pub imag: Vec<f64>,
    pub mass: f64,
}

impl PotentialSpec {
    pub fn new(real: Vec<f64>, imag: Vec<f64>, mass: f64) -> Result<Self> {
        let spec = PotentialSpec { real, imag, mass };
        spec.validate()?;
        Ok(spec)
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.mass.is_finite() && self.mass > 0.0) {
            return Err(Error::Validation(format!("kinetic mass {} must be positive", self.mass)));
        }
        if self.real.len().max(self.imag.len()) > MAX_POTENTIAL_DEGREE + 1 {
            return Err(Error::Validation(format!("potential degree exceeds {MAX_POTENTIAL_DEGREE}")));
        }
        if self.real.iter().chain(&self.imag).any(|c| !c.is_finite()) {
            return Err(Error::Validation("potential coefficients must be finite".into()));
        }
        Ok(())
    }

    /// Splits an x̂–p̂ polynomial into `p²/2m + V(x)`; any other momentum
    /// dependence is rejected.
    pub fn from_hamiltonian(poly: &XPPolynomial) -> Result<Self> {
        let mut real = Vec::new();
        let mut kinetic = 0.0;
        for t in &poly.terms {
            match (t.x_power, t.p_power) {
                (a, 0) => {
                    let a = a as usize;
                    if real.len() <= a {
                        real.resize(a + 1, 0.0);
                    }
                    real[a] += t.coeff;
                }
                (0, 2) => kinetic += t.coeff,
                (a, b) => {
                    return Err(Error::Validation(format!(
                        "the propagator handles p²/2m + V(x) only; found x^{a} p^{b}"
                    )))
                }
            }
        }
        if kinetic <= 0.0 {
            return Err(Error::Validation("Hamiltonian needs a positive p² term".into()));
        }
        Self::new(real, Vec::new(), 0.5 / kinetic)
    }

    pub fn with_imaginary(mut self, imag: Vec<f64>) -> Result<Self> {
        self.imag = imag;
        self.validate()?;
        Ok(self)
    }

    pub fn value(&self, x: f64) -> C64 {
        let horner = |c: &[f64]| c.iter().rev().fold(0.0, |acc, &a| acc * x + a);
        C64::new(horner(&self.real), horner(&self.imag))
    }

    pub fn is_real(&self) -> bool {
        self.imag.iter().all(|&c| c == 0.0)
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct PropagationConfig {
    pub dt: f64,
    pub n_steps: usize,
    pub grid: PositionGrid,
    pub record_times: Vec<f64>,
}

impl PropagationConfig {
    /// Steps of `dt` up to the last record time.
    pub fn until(dt: f64, grid: PositionGrid, record_times: Vec<f64>) -> Self {
        let last = record_times.iter().cloned().fold(0.0, f64::max);
        PropagationConfig { dt, n_steps: (last / dt).round() as usize, grid, record_times }
    }
}

/// Kinetic phase per step relative to π; must stay below one.
pub fn kinetic_phase_ratio(grid: &PositionGrid, mass: f64, hbar: f64, dt: f64) -> f64 {
    let p_max = hbar * std::f64::consts::PI / grid.dx();
    p_max * p_max * dt.abs() / (2.0 * mass * hbar) / std::f64::consts::PI
}

/// Precomputed Strang step for a fixed grid, potential and dt.
pub struct Propagator {
    fwd: Arc<dyn Fft<f64>>,
    inv: Arc<dyn Fft<f64>>,
    half_potential: Vec<C64>,
    kinetic: Vec<C64>,
    grid: PositionGrid,
    dt: f64,
}

impl Propagator {
    pub fn new(grid: PositionGrid, potential: &PotentialSpec, hbar: f64, dt: f64) -> Result<Self> {
        grid.validate()?;
        potential.validate()?;
        if !dt.is_finite() {
            return Err(Error::Validation(format!("time step {dt} is not finite")));
        }
        let ratio = kinetic_phase_ratio(&grid, potential.mass, hbar, dt);
        if ratio >= 1.0 {
            return Err(Error::Validation(format!(
                "max|p|²dt/(2mħ) = {:.3}π exceeds π; coarsen the grid or shrink dt",
                ratio
            )));
        }
        let mut planner = FftPlanner::new();
        let half_potential = grid
            .nodes()
            .iter()
            .map(|&x| (C64::new(0.0, -dt / (2.0 * hbar)) * potential.value(x)).exp())
            .collect();
        let kinetic = grid
            .wavenumbers()
            .iter()
            .map(|&k| C64::from_polar(1.0, -hbar * k * k * dt / (2.0 * potential.mass)))
            .collect();
        Ok(Propagator {
            fwd: planner.plan_fft_forward(grid.n),
            inv: planner.plan_fft_inverse(grid.n),
            half_potential,
            kinetic,
            grid,
            dt,
        })
    }

    pub fn dt(&self) -> f64 {
        self.dt
    }

    /// One Strang step in place.
    pub fn step(&self, values: &mut [C64]) -> Result<()> {
        if self.dt == 0.0 {
            return Ok(());
        }
        let n = self.grid.n as f64;
        values.iter_mut().zip(&self.half_potential).for_each(|(v, f)| *v *= f);
        self.fwd.process(values);
        values.iter_mut().zip(&self.kinetic).for_each(|(v, f)| *v *= f / n);
        self.inv.process(values);
        values.iter_mut().zip(&self.half_potential).for_each(|(v, f)| *v *= f);
        if values.iter().any(|v| !(v.re.is_finite() && v.im.is_finite())) {
            return Err(Error::NumericalBlowup("non-finite amplitude after a split step".into()));
        }
        Ok(())
    }
}

pub fn initial_coherent_state(z0: C64, grid: PositionGrid, params: OscillatorParams) -> Result<PositionWavefunction> {
    grid.validate()?;
    let wf = coherent_state(z0, grid, params);
    wf.check_contained()?;
    Ok(wf.normalized())
}

pub fn split_step(wf: &PositionWavefunction, potential: &PotentialSpec, dt: f64) -> Result<PositionWavefunction> {
    let prop = Propagator::new(wf.grid, potential, wf.params.hbar, dt)?;
    let mut out = wf.clone();
    prop.step(out.values.as_slice_mut().expect("contiguous"))?;
    Ok(out)
}

#[derive(Clone, Debug)]
pub struct Snapshot {
    pub t: f64,
    pub state: PositionWavefunction,
}

#[derive(Clone, Debug)]
pub struct Propagation {
    pub snapshots: Vec<Snapshot>,
    pub final_state: PositionWavefunction,
    pub final_time: f64,
}

impl Propagation {
    /// Snapshot recorded closest to `t`.
    pub fn at(&self, t: f64) -> Option<&Snapshot> {
        self.snapshots
            .iter()
            .min_by(|a, b| (a.t - t).abs().total_cmp(&(b.t - t).abs()))
            .filter(|s| (s.t - t).abs() < 1e-9 * t.abs().max(1.0))
    }
}

pub fn propagate(wf0: &PositionWavefunction, potential: &PotentialSpec, config: &PropagationConfig) -> Result<Propagation> {
    if config.grid != wf0.grid {
        return Err(Error::GridMismatch("propagation grid differs from the wavefunction grid".into()));
    }
    if config.dt.is_nan() || config.dt <= 0.0 {
        return Err(Error::Validation(format!("dt = {} must be positive", config.dt)));
    }
    let mut record: Vec<(usize, f64)> = Vec::with_capacity(config.record_times.len());
    for &t in &config.record_times {
        let idx = (t / config.dt).round();
        if idx < 0.0 || (idx * config.dt - t).abs() > 1e-9 * t.abs().max(1.0) {
            return Err(Error::Validation(format!("record time {t} is not a multiple of dt = {}", config.dt)));
        }
        let idx = idx as usize;
        if idx > config.n_steps {
            return Err(Error::Validation(format!("record time {t} lies beyond {} steps", config.n_steps)));
        }
        record.push((idx, t));
    }
    record.sort_by_key(|r| r.0);

    let prop = Propagator::new(config.grid, potential, wf0.params.hbar, config.dt)?;
    let mut state = wf0.clone();
    let mut snapshots = Vec::with_capacity(record.len());
    let mut pending = record.iter().peekable();
    for step in 0..=config.n_steps {
        while let Some(&&(idx, t)) = pending.peek() {
            if idx != step {
                break;
            }
            snapshots.push(Snapshot { t, state: state.clone() });
            pending.next();
        }
        if step < config.n_steps {
            prop.step(state.values.as_slice_mut().expect("contiguous"))?;
        }
    }
    Ok(Propagation { snapshots, final_state: state, final_time: config.n_steps as f64 * config.dt })
}

/// ⟨ψ|H|ψ⟩/⟨ψ|ψ⟩ with the kinetic term evaluated spectrally.
pub fn energy(wf: &PositionWavefunction, potential: &PotentialSpec) -> C64 {
    let n = wf.grid.n;
    let mut spectrum = wf.values.to_vec();
    FftPlanner::new().plan_fft_forward(n).process(&mut spectrum);
    let hbar = wf.params.hbar;
    let norm_k: f64 = spectrum.iter().map(|v| v.norm_sqr()).sum();
    let kinetic: f64 = spectrum
        .iter()
        .zip(wf.grid.wavenumbers())
        .map(|(v, k)| v.norm_sqr() * (hbar * k).powi(2) / (2.0 * potential.mass))
        .sum::<f64>()
        / norm_k;
    let norm_x: f64 = wf.values.iter().map(|v| v.norm_sqr()).sum();
    let pot: C64 = wf
        .values
        .iter()
        .enumerate()
        .map(|(i, v)| potential.value(wf.grid.x(i)) * v.norm_sqr())
        .sum::<C64>()
        / norm_x;
    pot + kinetic
}
