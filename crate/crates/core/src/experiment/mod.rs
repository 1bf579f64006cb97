//! Experiment drivers: configuration, the propagate → transform → flow →
//! topology pipeline, output bundles and the analytic check suite.

pub mod analytic;

use std::fs;
use std::path::{Path, PathBuf};

use num_complex::Complex64 as C64;
use serde::{Deserialize, Serialize};

use crate::algebra::{normal_order, NormalOrderedHamiltonian, XPPolynomial};
use crate::error::{Error, Result};
use crate::flow::{classical_current, continuity_residual, CurrentField, FlowEngine, OrderTag};
use crate::grid::{PhaseSpaceGrid, PositionGrid};
use crate::husimi::{husimi_field, normalization_integral, z_derivative_stack, DerivativeStack, HusimiField, PositionWavefunction};
use crate::io::{self, HamiltonianSpec};
use crate::params::OscillatorParams;
use crate::propagator::{energy, initial_coherent_state, propagate, Propagation, PotentialSpec, PropagationConfig};
use crate::topology::{
    find_husimi_zeros, find_stagnation_points, momentum_inversion_mask, zero_saddle_center_report, FlowClass,
    HusimiZero, InversionMask, PairingReport, StagnationPoint, TopologyConfig, TopologyRecord, Window,
};

pub use analytic::{run_analytic_suite, Verdict};

/// Phase-space grid extents, without the oscillator parameters.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct PhaseWindow {
    pub x_min: f64,
    pub x_max: f64,
    pub nx: usize,
    pub p_min: f64,
    pub p_max: f64,
    pub np: usize,
}

impl PhaseWindow {
    pub fn grid(&self, params: OscillatorParams) -> Result<PhaseSpaceGrid> {
        PhaseSpaceGrid::new((self.x_min, self.x_max, self.nx), (self.p_min, self.p_max, self.np), params)
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ExperimentConfig {
    pub name: String,
    pub hamiltonian: HamiltonianSpec,
    /// Re z₀, Im z₀ of the initial coherent state.
    pub initial_z: [f64; 2],
    pub position_grid: PositionGrid,
    pub phase_grid: PhaseWindow,
    pub dt: f64,
    pub record_times: Vec<f64>,
    pub out_dir: PathBuf,
    /// Current dumps per slice, as order tags (`0`, `1`, `only2`, `exact`, `classical`).
    pub orders: Vec<String>,
    pub topology: TopologyConfig,
    /// Q threshold, relative to max Q, of the momentum-inversion mask.
    pub inversion_threshold: f64,
    /// Central-difference step of the continuity residual.
    pub residual_dt: f64,
}

pub const DOUBLE_WELL_LAMBDA: f64 = 1.0 / 3.0;
pub const DOUBLE_WELL_Z0: [f64; 2] = [-0.866, 0.9228];

impl ExperimentConfig {
    /// Symmetric double well with 2m = 3λ = Ω/2 = ħ = 1.
    pub fn double_well() -> Self {
        let params = OscillatorParams { mass: 0.5, omega: 2.0, hbar: 1.0 };
        let poly = XPPolynomial::double_well(&params, DOUBLE_WELL_LAMBDA);
        ExperimentConfig {
            name: "double-well".into(),
            hamiltonian: HamiltonianSpec::new(&poly, &params),
            initial_z: DOUBLE_WELL_Z0,
            position_grid: PositionGrid::default(),
            phase_grid: PhaseWindow { x_min: -10.0, x_max: 10.0, nx: 256, p_min: -28.0, p_max: 28.0, np: 512 },
            dt: 1e-3,
            record_times: vec![1.0, 2.0, 3.0, 3.5, 4.0],
            out_dir: PathBuf::from("out"),
            orders: ["0", "1", "2", "exact", "classical"].map(String::from).to_vec(),
            topology: TopologyConfig { search_box: Some([-4.0, 4.0, -4.0, 4.0]), ..TopologyConfig::default() },
            inversion_threshold: 1e-3,
            residual_dt: 1e-3,
        }
    }

    /// Reads a JSON config; the literal `default` selects [`Self::double_well`].
    pub fn load(source: &str) -> Result<Self> {
        let config = if source == "default" {
            Self::double_well()
        } else {
            serde_json::from_str(&fs::read_to_string(source)?)?
        };
        config.validate()?;
        Ok(config)
    }

    pub fn validate(&self) -> Result<()> {
        let params = self.hamiltonian.params()?;
        self.hamiltonian.polynomial()?;
        self.position_grid.validate()?;
        self.phase_grid.grid(params)?;
        for (name, v) in [("dt", self.dt), ("residual_dt", self.residual_dt), ("inversion_threshold", self.inversion_threshold)] {
            if !(v.is_finite() && v > 0.0) {
                return Err(Error::Validation(format!("{name} must be positive, got {v}")));
            }
        }
        if self.record_times.iter().any(|t| !(t.is_finite() && *t >= 0.0)) {
            return Err(Error::Validation("record times must be finite and non-negative".into()));
        }
        if self.initial_z.iter().any(|v| !v.is_finite()) {
            return Err(Error::Validation("initial z is not finite".into()));
        }
        self.order_tags()?;
        Ok(())
    }

    pub fn order_tags(&self) -> Result<Vec<OrderTag>> {
        self.orders.iter().map(|s| s.parse()).collect()
    }

    pub fn to_json(&self) -> Result<String> {
        Ok(serde_json::to_string_pretty(self)?)
    }
}

/// Everything derived once from a config.
pub struct Pipeline {
    pub config: ExperimentConfig,
    pub params: OscillatorParams,
    pub poly: XPPolynomial,
    pub h: NormalOrderedHamiltonian,
    pub potential: PotentialSpec,
    pub grid: PhaseSpaceGrid,
    pub engine: FlowEngine,
    pub orders: Vec<OrderTag>,
}

/// Continuity residual at the configured step and at half of it.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct ResidualSummary {
    pub t: f64,
    pub dt: f64,
    pub rel_l2: f64,
    pub rel_linf: f64,
    pub half_dt_rel_l2: f64,
    /// rel_l2 at dt over rel_l2 at dt/2.
    pub ratio: f64,
}

/// Full analysis of one recorded time.
pub struct Slice {
    pub t: f64,
    pub state: PositionWavefunction,
    pub field: HusimiField,
    pub currents: Vec<CurrentField>,
    pub exact: CurrentField,
    pub classical: CurrentField,
    pub zeros: Vec<HusimiZero>,
    pub points: Vec<StagnationPoint>,
    pub classical_points: Vec<StagnationPoint>,
    pub report: PairingReport,
    pub inversion: InversionMask,
    pub classical_inversion: InversionMask,
    pub residual: Option<ResidualSummary>,
    pub norm: f64,
    pub energy: f64,
}

/// Per-slice numbers collected in `summary.json`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SliceSummary {
    pub t: f64,
    pub norm: f64,
    pub husimi_integral: f64,
    pub energy: f64,
    pub zeros: usize,
    pub saddles: usize,
    pub centers: usize,
    pub spirals: usize,
    pub nodes: usize,
    pub degenerate: usize,
    pub zeros_without_saddle: usize,
    pub unpaired_zeros: usize,
    pub orphan_saddles: usize,
    pub inversion_nodes: usize,
    pub classical_inversion_nodes: usize,
    pub residual: Option<ResidualSummary>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct RunSummary {
    pub name: String,
    pub q_max: u32,
    pub initial_energy: f64,
    pub slices: Vec<SliceSummary>,
}

impl Pipeline {
    pub fn new(config: ExperimentConfig) -> Result<Self> {
        config.validate()?;
        let params = config.hamiltonian.params()?;
        let poly = config.hamiltonian.polynomial()?;
        let h = normal_order(&poly, &params)?;
        let potential = PotentialSpec::from_hamiltonian(&poly)?;
        let grid = config.phase_grid.grid(params)?;
        let engine = FlowEngine::new(&h, params.hbar)?;
        let orders = config.order_tags()?;
        Ok(Pipeline { config, params, poly, h, potential, grid, engine, orders })
    }

    pub fn initial_state(&self) -> Result<PositionWavefunction> {
        let [re, im] = self.config.initial_z;
        initial_coherent_state(C64::new(re, im), self.config.position_grid, self.params)
    }

    /// Propagates the initial state and records `times` (the config's record
    /// times when `None`).
    pub fn propagate(&self, times: Option<Vec<f64>>) -> Result<Propagation> {
        let times = times.unwrap_or_else(|| self.config.record_times.clone());
        let run = PropagationConfig::until(self.config.dt, self.config.position_grid, times);
        propagate(&self.initial_state()?, &self.potential, &run)
    }

    pub fn state_at(&self, t: f64) -> Result<PositionWavefunction> {
        let run = self.propagate(Some(vec![t]))?;
        run.at(t)
            .map(|s| s.state.clone())
            .ok_or_else(|| Error::Validation(format!("time {t} was not recorded")))
    }

    pub fn field(&self, wf: &PositionWavefunction, t: f64) -> Result<HusimiField> {
        Ok(husimi_field(wf, &self.grid)?.at_time(t))
    }

    pub fn stack(&self, field: &HusimiField) -> Result<DerivativeStack> {
        z_derivative_stack(field, self.engine.required_depth())
    }

    pub fn current(&self, stack: &DerivativeStack, tag: OrderTag) -> Result<CurrentField> {
        let mut j = match tag {
            OrderTag::Exact => self.engine.exact_current(stack)?,
            OrderTag::Cumulative(q) => self.engine.cumulative_current(stack, q)?,
            OrderTag::Contribution(q) => self.engine.current_order(stack, q)?,
            OrderTag::Classical => classical_current(&self.h, &stack.base),
        };
        j.t = stack.base.t;
        Ok(j)
    }

    pub fn residual(&self, wf: &PositionWavefunction, t: f64) -> Result<ResidualSummary> {
        let dt = self.config.residual_dt;
        let full = continuity_residual(&self.engine, wf, &self.potential, &self.grid, dt)?;
        let half = continuity_residual(&self.engine, wf, &self.potential, &self.grid, dt / 2.0)?;
        Ok(ResidualSummary {
            t,
            dt,
            rel_l2: full.rel_l2,
            rel_linf: full.rel_linf,
            half_dt_rel_l2: half.rel_l2,
            ratio: full.rel_l2 / half.rel_l2,
        })
    }

    pub fn analyze(&self, wf: &PositionWavefunction, t: f64, with_residual: bool) -> Result<Slice> {
        let field = self.field(wf, t)?;
        let stack = self.stack(&field)?;
        let currents = self.orders.iter().map(|&tag| self.current(&stack, tag)).collect::<Result<Vec<_>>>()?;
        let exact = self.current(&stack, OrderTag::Exact)?;
        let classical = self.current(&stack, OrderTag::Classical)?;
        let cfg = &self.config.topology;
        let window = Window::from_field(&field, cfg);
        let zeros = find_husimi_zeros(&field, &window, cfg);
        let points = find_stagnation_points(&exact, &window, cfg);
        let classical_points = find_stagnation_points(&classical, &window, cfg);
        let report = zero_saddle_center_report(&zeros, &points, &self.grid, cfg.pairing_radius);
        let inversion = momentum_inversion_mask(&exact, &field, self.config.inversion_threshold)?;
        let classical_inversion = momentum_inversion_mask(&classical, &field, self.config.inversion_threshold)?;
        let residual = if with_residual { Some(self.residual(wf, t)?) } else { None };
        Ok(Slice {
            t,
            norm: wf.norm_sqr(),
            energy: energy(wf, &self.potential).re,
            state: wf.clone(),
            field,
            currents,
            exact,
            classical,
            zeros,
            points,
            classical_points,
            report,
            inversion,
            classical_inversion,
            residual,
        })
    }
}

impl Slice {
    /// Zeros and exact-flow points, followed by the classical-flow points
    /// with kinds prefixed `classical_`.
    pub fn records(&self) -> Vec<TopologyRecord> {
        let mut out = self.report.records(&self.zeros, &self.points);
        out.extend(self.classical_points.iter().map(|pt| TopologyRecord {
            t: pt.t,
            kind: format!("classical_{}", pt.class.name()),
            x: pt.x,
            p: pt.p,
            index: pt.index,
            eigenvalues: pt.eigenvalues.iter().map(|&(re, im)| [re, im]).collect(),
            paired_with: None,
        }));
        out
    }

    pub fn summary(&self) -> SliceSummary {
        let count = |c: FlowClass| self.points.iter().filter(|p| p.class == c).count();
        SliceSummary {
            t: self.t,
            norm: self.norm,
            husimi_integral: normalization_integral(&self.field),
            energy: self.energy,
            zeros: self.zeros.len(),
            saddles: count(FlowClass::Saddle),
            centers: count(FlowClass::Center),
            spirals: count(FlowClass::Spiral),
            nodes: count(FlowClass::Node),
            degenerate: count(FlowClass::Degenerate),
            zeros_without_saddle: self.report.zeros_without_saddle,
            unpaired_zeros: self.report.unpaired_zeros,
            orphan_saddles: self.report.orphan_saddles.len(),
            inversion_nodes: self.inversion.count,
            classical_inversion_nodes: self.classical_inversion.count,
            residual: self.residual,
        }
    }

    /// Writes the slice bundle into `dir`.
    pub fn write(&self, dir: &Path, config: &ExperimentConfig) -> Result<()> {
        fs::create_dir_all(dir)?;
        io::write_json(&dir.join("config.json"), config)?;
        io::with_file(&dir.join("psi.csv"), |w| io::write_snapshot_csv(w, &self.state, self.t))?;
        io::with_file(&dir.join("husimi.csv"), |w| io::write_field_csv(w, &self.field, None, "none"))?;
        for (j, tag) in self.currents.iter().zip(&config.orders) {
            let tag = tag.trim();
            io::with_file(&dir.join(format!("current_{tag}.csv")), |w| io::write_field_csv(w, &self.field, Some(j), tag))?;
        }
        let records = self.records();
        io::write_json(&dir.join("topology.json"), &records)?;
        io::with_file(&dir.join("topology.csv"), |w| io::write_topology_csv(w, &records))?;
        io::write_json(&dir.join("pairing.json"), &self.report)?;
        io::with_file(&dir.join("inversion.csv"), |w| {
            io::write_mask_csv(w, &self.field.grid, &self.inversion.mask, &self.classical_inversion.mask, self.t)
        })?;
        if let Some(r) = &self.residual {
            io::write_json(&dir.join("residual.json"), r)?;
        }
        Ok(())
    }
}

/// Directory name of a recorded time, e.g. `3.5` or `1`.
pub fn time_dir(t: f64) -> String {
    format!("{t}")
}

/// Runs the configured experiment and writes `out/<name>/<t>/…` plus
/// `out/<name>/summary.json`. Slices are analysed concurrently.
pub fn run_experiment(config: &ExperimentConfig) -> Result<RunSummary> {
    let pipeline = Pipeline::new(config.clone())?;
    let run = pipeline.propagate(None)?;
    let root = config.out_dir.join(&config.name);
    fs::create_dir_all(&root)?;
    io::write_json(&root.join("config.json"), config)?;

    let slices: Vec<Result<SliceSummary>> = std::thread::scope(|scope| {
        let handles: Vec<_> = config
            .record_times
            .iter()
            .map(|&t| {
                let pipeline = &pipeline;
                let run = &run;
                let root = &root;
                scope.spawn(move || -> Result<SliceSummary> {
                    let snap = run.at(t).ok_or_else(|| Error::Validation(format!("time {t} was not recorded")))?;
                    let slice = pipeline
                        .analyze(&snap.state, t, true)
                        .map_err(|e| context(e, &format!("t = {t}")))?;
                    slice.write(&root.join(time_dir(t)), &pipeline.config)?;
                    Ok(slice.summary())
                })
            })
            .collect();
        handles.into_iter().map(|h| h.join().expect("slice worker panicked")).collect()
    });
    let summary = RunSummary {
        name: config.name.clone(),
        q_max: pipeline.engine.q_max(),
        initial_energy: energy(&pipeline.initial_state()?, &pipeline.potential).re,
        slices: slices.into_iter().collect::<Result<_>>()?,
    };
    io::write_json(&root.join("summary.json"), &summary)?;
    Ok(summary)
}

/// The double-well run; `config` defaults to [`ExperimentConfig::double_well`].
pub fn run_double_well(config: Option<&ExperimentConfig>) -> Result<RunSummary> {
    match config {
        Some(c) => run_experiment(c),
        None => run_experiment(&ExperimentConfig::double_well()),
    }
}

/// Prefixes the message of an error with `what`, keeping its kind.
pub fn context(e: Error, what: &str) -> Error {
    match e {
        Error::Argument(m) => Error::Argument(format!("{what}: {m}")),
        Error::Capacity(m) => Error::Capacity(format!("{what}: {m}")),
        Error::Containment(m) => Error::Containment(format!("{what}: {m}")),
        Error::SpectralValidity(m) => Error::SpectralValidity(format!("{what}: {m}")),
        Error::NumericalBlowup(m) => Error::NumericalBlowup(format!("{what}: {m}")),
        Error::GridMismatch(m) => Error::GridMismatch(format!("{what}: {m}")),
        Error::LoopInvalid(m) => Error::LoopInvalid(format!("{what}: {m}")),
        Error::Validation(m) => Error::Validation(format!("{what}: {m}")),
        other => other,
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::algebra::DoubleWellParams;

    #[test]
    fn default_config_round_trips() {
        let c = ExperimentConfig::double_well();
        let back: ExperimentConfig = serde_json::from_str(&c.to_json().unwrap()).unwrap();
        assert_eq!(back, c);
        assert_eq!(ExperimentConfig::load("default").unwrap(), c);
        assert_eq!(c.order_tags().unwrap()[3], OrderTag::Exact);
    }

    #[test]
    fn default_parameters_match_the_well_relations() {
        let c = ExperimentConfig::double_well();
        let params = c.hamiltonian.params().unwrap();
        assert_eq!(params.gamma(), 1.0);
        let dw = DoubleWellParams::new(params, DOUBLE_WELL_LAMBDA);
        assert!((dw.k - 4.0).abs() < 1e-14);
        assert!((dw.v0 - 0.25).abs() < 1e-14);
        assert!((dw.center_re_z() - 0.75f64.sqrt()).abs() < 1e-14);
    }

    #[test]
    fn invalid_configs_are_rejected() {
        let mut c = ExperimentConfig::double_well();
        c.dt = 0.0;
        assert!(matches!(c.validate(), Err(Error::Validation(_))));
        let mut c = ExperimentConfig::double_well();
        c.orders.push("half".into());
        assert!(c.validate().is_err());
        let mut c = ExperimentConfig::double_well();
        c.hamiltonian.mass = -1.0;
        assert!(c.validate().is_err());
        assert!(ExperimentConfig::load("/nonexistent/config.json").is_err());
    }

    #[test]
    fn context_keeps_the_error_kind() {
        let e = context(Error::NumericalBlowup("nan".into()), "t = 1");
        assert!(e.is_numerical());
        assert_eq!(e.to_string(), "numerical blowup: t = 1: nan");
    }
}
