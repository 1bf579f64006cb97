//! Husimi currents: exact, order by order in ħ, classical and first-order
//! semiclassical, plus the source term of non-Hermitian generators and the
//! continuity checks tying them to the time evolution.

pub mod continuity;
pub mod series;

use std::fmt;

use ndarray::Array2;
use num_complex::Complex64 as C64;
use serde::{Deserialize, Serialize};

use crate::algebra::reorder::r_coefficient;
use crate::algebra::NormalOrderedHamiltonian;
use crate::error::{Error, Result};
use crate::grid::PhaseSpaceGrid;
use crate::husimi::{DerivativeStack, HusimiField};
use series::{evaluate_terms, CurrentSeries, PowerTable};

pub use continuity::{continuity_oracle, continuity_residual, Residual};

/// Which part of the ħ-series a [`CurrentField`] holds.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub enum OrderTag {
    /// The ħ^q contribution alone.
    Contribution(u32),
    /// All contributions with order ≤ q.
    Cumulative(u32),
    /// The full series.
    Exact,
    /// (∂H̃/∂p · Q, −∂H̃/∂x · Q).
    Classical,
}

impl fmt::Display for OrderTag {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            OrderTag::Contribution(q) => write!(f, "only{q}"),
            OrderTag::Cumulative(q) => write!(f, "{q}"),
            OrderTag::Exact => write!(f, "exact"),
            OrderTag::Classical => write!(f, "classical"),
        }
    }
}

impl std::str::FromStr for OrderTag {
    type Err = Error;

    /// Inverse of `Display`: `exact`, `classical`, `only<q>` or `<q>`.
    fn from_str(s: &str) -> Result<Self> {
        let bad = || Error::Validation(format!("unknown order '{s}'"));
        match s.trim() {
            "exact" => Ok(OrderTag::Exact),
            "classical" => Ok(OrderTag::Classical),
            t => match t.strip_prefix("only") {
                Some(q) => q.parse().map(OrderTag::Contribution).map_err(|_| bad()),
                None => t.parse().map(OrderTag::Cumulative).map_err(|_| bad()),
            },
        }
    }
}

/// Real phase-space currents on a grid.
#[derive(Clone, Debug)]
pub struct CurrentField {
    pub grid: PhaseSpaceGrid,
    pub jx: Array2<f64>,
    pub jp: Array2<f64>,
    pub tag: OrderTag,
    pub t: f64,
    /// Largest imaginary part dropped when forming (J_x, J_p), relative to max|J|.
    pub imag_residue: f64,
}

impl CurrentField {
    pub fn zeros(grid: PhaseSpaceGrid, tag: OrderTag, t: f64) -> Self {
        CurrentField { grid, jx: Array2::zeros(grid.shape()), jp: Array2::zeros(grid.shape()), tag, t, imag_residue: 0.0 }
    }

    pub fn max_norm(&self) -> f64 {
        self.jx.iter().zip(self.jp.iter()).fold(0.0, |m, (a, b)| m.max(a.hypot(*b)))
    }

    /// L∞ distance to another field, relative to the larger of the two maxima.
    pub fn relative_difference(&self, other: &CurrentField) -> f64 {
        let diff = self
            .jx
            .iter()
            .zip(self.jp.iter())
            .zip(other.jx.iter().zip(other.jp.iter()))
            .fold(0.0f64, |m, ((a, b), (c, d))| m.max((a - c).hypot(b - d)));
        let scale = self.max_norm().max(other.max_norm());
        if scale == 0.0 {
            diff
        } else {
            diff / scale
        }
    }

    pub fn plus(mut self, other: &CurrentField, tag: OrderTag) -> Self {
        self.jx += &other.jx;
        self.jp += &other.jp;
        self.imag_residue = self.imag_residue.max(other.imag_residue);
        self.tag = tag;
        self
    }
}

/// ħ-order bookkeeping: `q ∈ [0, q_max]` with `q_max = n_max − 1`.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct FlowOrder {
    pub q: u32,
    pub q_max: u32,
}

impl FlowOrder {
    pub fn new(q: u32, h: &NormalOrderedHamiltonian) -> Self {
        FlowOrder { q, q_max: h.q_max() }
    }
}

/// Source σ of the continuity equation.
#[derive(Clone, Debug)]
pub struct SourceField {
    pub grid: PhaseSpaceGrid,
    pub sigma: Array2<f64>,
    pub t: f64,
}

/// Complex currents before recombination into (J_x, J_p).
pub struct ComplexCurrents {
    pub jz: Array2<C64>,
    pub jzs: Array2<C64>,
}

impl ComplexCurrents {
    /// J_x = (√(ħ/2)/γ)(J_z* + J_z), J_p = iγ√(ħ/2)(J_z* − J_z).
    pub fn recombine(&self, grid: &PhaseSpaceGrid, tag: OrderTag, t: f64) -> CurrentField {
        let a = grid.params.x_scale();
        let b = grid.params.p_scale();
        let cx = (&self.jzs + &self.jz) * C64::from(a);
        let cp = (&self.jzs - &self.jz) * C64::new(0.0, b);
        let jx = cx.mapv(|v| v.re);
        let jp = cp.mapv(|v| v.re);
        let scale = jx.iter().zip(jp.iter()).fold(0.0f64, |m, (x, p)| m.max(x.hypot(*p)));
        let imag = cx.iter().chain(cp.iter()).fold(0.0f64, |m, v| m.max(v.im.abs()));
        let imag_residue = if scale > 0.0 { imag / scale } else { imag };
        CurrentField { grid: *grid, jx, jp, tag, t, imag_residue }
    }

    /// Largest |J_z* − conj(J_z)| relative to max|J_z|.
    pub fn conjugacy_defect(&self) -> f64 {
        let scale = self.jz.iter().fold(0.0f64, |m, v| m.max(v.norm()));
        let d = self.jz.iter().zip(self.jzs.iter()).fold(0.0f64, |m, (a, b)| m.max((a.conj() - b).norm()));
        if scale > 0.0 {
            d / scale
        } else {
            d
        }
    }
}

/// Precomputed current series for one Hamiltonian.
#[derive(Clone, Debug)]
pub struct FlowEngine {
    pub h: NormalOrderedHamiltonian,
    pub hbar: f64,
    jz: CurrentSeries,
    jzs: CurrentSeries,
    /// Σ_k r(m,n,k) h_{mn} z*^{m−k} z^{n−k}: σ = (2/ħ) Im(·) Q.
    source_poly: NormalOrderedHamiltonian,
}

impl FlowEngine {
    pub fn new(h: &NormalOrderedHamiltonian, hbar: f64) -> Result<Self> {
        if !(hbar.is_finite() && hbar > 0.0) {
            return Err(Error::Argument(format!("ħ = {hbar} must be positive")));
        }
        let mut terms = Vec::new();
        for (m, n, c) in h.iter() {
            for k in 0..=m.min(n) {
                terms.push(((m - k, n - k), c * r_coefficient(m, n, k)? as f64));
            }
        }
        Ok(FlowEngine {
            h: h.clone(),
            hbar,
            jz: CurrentSeries::build(h, hbar, false)?,
            jzs: CurrentSeries::build(h, hbar, true)?,
            source_poly: NormalOrderedHamiltonian::from_terms(terms)?,
        })
    }

    pub fn q_max(&self) -> u32 {
        self.h.q_max()
    }

    /// Stack depth needed by the current series.
    pub fn required_depth(&self) -> usize {
        self.jz.required_depth()
    }

    pub fn series(&self) -> (&CurrentSeries, &CurrentSeries) {
        (&self.jz, &self.jzs)
    }

    fn check_stack(&self, stack: &DerivativeStack, q_hi: u32) -> Result<()> {
        let need = (0..=q_hi as usize)
            .flat_map(|q| self.jz.terms(q).iter().map(|t| t.deriv))
            .max()
            .unwrap_or(0);
        if stack.depth() < need {
            return Err(Error::Argument(format!("derivative stack depth {} < {need}", stack.depth())));
        }
        Ok(())
    }

    /// J_z and J_z* summed over orders `lo..=hi`.
    pub fn complex_currents(&self, stack: &DerivativeStack, lo: u32, hi: u32) -> Result<ComplexCurrents> {
        self.check_stack(stack, hi.min(self.q_max()))?;
        let shape = stack.grid().shape();
        let powers = PowerTable::new(stack, self.h.n_max());
        let mut jz = Array2::zeros(shape);
        let mut jzs = Array2::zeros(shape);
        for q in lo..=hi {
            evaluate_terms(self.jz.terms(q as usize), stack, &powers, false, &mut jz);
            evaluate_terms(self.jzs.terms(q as usize), stack, &powers, true, &mut jzs);
        }
        Ok(ComplexCurrents { jz, jzs })
    }

    /// The ħ^q contribution alone; zero beyond `q_max`.
    pub fn current_order(&self, stack: &DerivativeStack, q: u32) -> Result<CurrentField> {
        let c = self.complex_currents(stack, q, q)?;
        Ok(c.recombine(stack.grid(), OrderTag::Contribution(q), stack.base.t))
    }

    /// Orders 0..=q summed.
    pub fn cumulative_current(&self, stack: &DerivativeStack, q: u32) -> Result<CurrentField> {
        let c = self.complex_currents(stack, 0, q)?;
        let tag = if q >= self.q_max() { OrderTag::Exact } else { OrderTag::Cumulative(q) };
        Ok(c.recombine(stack.grid(), tag, stack.base.t))
    }

    pub fn exact_current(&self, stack: &DerivativeStack) -> Result<CurrentField> {
        self.cumulative_current(stack, self.q_max())
    }

    pub fn source_field(&self, field: &HusimiField) -> SourceField {
        let g = &field.grid;
        let sigma = Array2::from_shape_fn(g.shape(), |(i, j)| {
            2.0 / self.hbar * self.source_poly.symbol(g.z(i, j)).im * field.q[[i, j]]
        });
        SourceField { grid: *g, sigma, t: field.t }
    }
}

pub fn current_order(h: &NormalOrderedHamiltonian, stack: &DerivativeStack, q: FlowOrder) -> Result<CurrentField> {
    FlowEngine::new(h, stack.grid().params.hbar)?.current_order(stack, q.q)
}

pub fn exact_current(h: &NormalOrderedHamiltonian, stack: &DerivativeStack) -> Result<CurrentField> {
    FlowEngine::new(h, stack.grid().params.hbar)?.exact_current(stack)
}

pub fn source_field(h: &NormalOrderedHamiltonian, field: &HusimiField) -> Result<SourceField> {
    Ok(FlowEngine::new(h, field.grid.params.hbar)?.source_field(field))
}

/// J_x = (∂H̃/∂p) Q, J_p = −(∂H̃/∂x) Q, with H̃(x, p) = H(z*, z) and the
/// gradient taken through the chain rule on z and z*.
pub fn classical_current(h: &NormalOrderedHamiltonian, field: &HusimiField) -> CurrentField {
    let g = &field.grid;
    let params = g.params;
    let dz = h.partial(0, 1);
    let dzs = h.partial(1, 0);
    let s = (2.0 * params.hbar).sqrt();
    let gamma = params.gamma();
    let mut out = CurrentField::zeros(*g, OrderTag::Classical, field.t);
    for ((i, j), &q) in field.q.indexed_iter() {
        let z = g.z(i, j);
        let (hz, hzs) = (dz.symbol(z), dzs.symbol(z));
        let hx = (gamma / s) * (hz + hzs);
        let hp = C64::new(0.0, 1.0 / (gamma * s)) * (hz - hzs);
        out.jx[[i, j]] = hp.re * q;
        out.jp[[i, j]] = -hx.re * q;
    }
    out
}

/// Closed first-order form
/// `J_z = (1/iħ)[∂H/∂z* Q + ½ ∂²H/∂z*² ∂Q/∂z − ½ ∂³H/∂z*²∂z Q]`, with J_z* its
/// conjugate. For non-Hermitian `h` the symbol of `h†` is used, as in the
/// full series.
pub fn semiclassical_q1_current(h: &NormalOrderedHamiltonian, stack: &DerivativeStack) -> Result<CurrentField> {
    if stack.depth() < 1 {
        return Err(Error::Argument("semiclassical current needs ∂Q/∂z".into()));
    }
    let g = stack.grid();
    let hd = h.adjoint();
    let d1 = hd.partial(1, 0);
    let d2 = hd.partial(2, 0);
    let d3 = hd.partial(2, 1);
    let inv = C64::new(0.0, -1.0 / g.params.hbar);
    let jz = Array2::from_shape_fn(g.shape(), |(i, j)| {
        let z = g.z(i, j);
        let q = stack.dz(0)[[i, j]];
        let dq = stack.dz(1)[[i, j]];
        inv * (d1.symbol(z) * q + 0.5 * d2.symbol(z) * dq - 0.5 * d3.symbol(z) * q)
    });
    let jzs = jz.mapv(|v| v.conj());
    let tag = if h.q_max() <= 1 { OrderTag::Exact } else { OrderTag::Cumulative(1) };
    Ok(ComplexCurrents { jz, jzs }.recombine(g, tag, stack.base.t))
}
