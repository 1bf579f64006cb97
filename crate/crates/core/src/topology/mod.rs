//! Critical-point skeleton of the Husimi flow: zeros of the Husimi
//! amplitude, stagnation points of the current, Poincaré indices and the
//! zero–saddle–center pairing.

mod interp;
pub mod index;
pub mod inversion;
pub mod report;
pub mod stagnation;
pub mod zeros;

use ndarray::Array2;
use serde::{Deserialize, Serialize};

use crate::grid::PhaseSpaceGrid;
use crate::husimi::HusimiField;

pub use index::{poincare_index, rectangle_loop};
pub use inversion::{momentum_inversion_mask, InversionMask};
pub use report::{track_points, zero_saddle_center_report, PairingReport, TopologyRecord, ZeroPairing};
pub use stagnation::{classify, find_stagnation_points, FlowClass, StagnationPoint};
pub use zeros::{find_husimi_zeros, HusimiZero};

/// Thresholds shared by the topology searches.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct TopologyConfig {
    /// Nodes whose local Q envelope is below `q_floor · max Q` are outside the search window.
    pub q_floor: f64,
    /// Half-width, in cells, of the block over which the Q envelope is taken.
    pub envelope_radius: usize,
    /// Cells next to the grid edge excluded from every search.
    pub boundary_band: usize,
    /// Pairing radius in grid cells.
    pub pairing_radius: f64,
    /// An eigenvalue pair counts as purely imaginary when |Re λ| < tol·|λ|.
    pub classification_tol: f64,
    pub newton_max_iter: usize,
    /// Optional analysis box `[x_min, x_max, p_min, p_max]` inside the grid.
    #[serde(default)]
    pub search_box: Option<[f64; 4]>,
}

impl Default for TopologyConfig {
    fn default() -> Self {
        TopologyConfig {
            q_floor: 1e-8,
            envelope_radius: 3,
            boundary_band: 3,
            pairing_radius: 5.0,
            classification_tol: 1e-6,
            newton_max_iter: 50,
            search_box: None,
        }
    }
}

/// Nodes where critical points are searched for.
#[derive(Clone, Debug)]
pub struct Window {
    pub mask: Array2<bool>,
}

impl Window {
    /// Every node except the boundary band.
    pub fn interior(grid: &PhaseSpaceGrid, band: usize) -> Self {
        let (nx, np) = grid.shape();
        let mask = Array2::from_shape_fn((nx, np), |(i, j)| {
            i >= band && j >= band && i + band < nx && j + band < np
        });
        Window { mask }
    }

    /// Interior nodes inside the search box.
    pub fn boxed(grid: &PhaseSpaceGrid, cfg: &TopologyConfig) -> Self {
        let mut w = Self::interior(grid, cfg.boundary_band);
        if let Some([x0, x1, p0, p1]) = cfg.search_box {
            for ((i, j), m) in w.mask.indexed_iter_mut() {
                let (x, p) = (grid.x(i), grid.p(j));
                *m &= x >= x0 && x <= x1 && p >= p0 && p <= p1;
            }
        }
        w
    }

    /// Boxed interior nodes whose Q envelope clears the floor.
    pub fn from_field(field: &HusimiField, cfg: &TopologyConfig) -> Self {
        let mut w = Self::boxed(&field.grid, cfg);
        let floor = cfg.q_floor * field.max_q();
        let (nx, np) = field.grid.shape();
        let r = cfg.envelope_radius;
        // separable running maximum
        let mut rows = Array2::<f64>::zeros((nx, np));
        for i in 0..nx {
            for j in 0..np {
                let lo = j.saturating_sub(r);
                let hi = (j + r).min(np - 1);
                rows[[i, j]] = (lo..=hi).map(|k| field.q[[i, k]]).fold(0.0, f64::max);
            }
        }
        for ((i, j), m) in w.mask.indexed_iter_mut() {
            if *m {
                let lo = i.saturating_sub(r);
                let hi = (i + r).min(nx - 1);
                *m = (lo..=hi).map(|k| rows[[k, j]]).fold(0.0, f64::max) > floor;
            }
        }
        w
    }

    pub fn contains_node(&self, i: usize, j: usize) -> bool {
        self.mask.get((i, j)).copied().unwrap_or(false)
    }

    /// All four corners of plaquette `(i, j)` lie in the window.
    pub fn contains_plaquette(&self, i: usize, j: usize) -> bool {
        self.contains_node(i, j)
            && self.contains_node(i + 1, j)
            && self.contains_node(i, j + 1)
            && self.contains_node(i + 1, j + 1)
    }

    /// Whether the node nearest to `(x, p)` is in the window.
    pub fn contains(&self, grid: &PhaseSpaceGrid, x: f64, p: f64) -> bool {
        let (u, v) = grid.locate(x, p);
        if u < 0.0 || v < 0.0 {
            return false;
        }
        self.contains_node(u.round() as usize, v.round() as usize)
    }

    pub fn count(&self) -> usize {
        self.mask.iter().filter(|&&m| m).count()
    }
}

/// Sum of wrapped phase increments around a closed sequence of complex
/// values, in turns.
pub(crate) fn winding<I: IntoIterator<Item = (f64, f64)>>(values: I) -> f64 {
    let v: Vec<(f64, f64)> = values.into_iter().collect();
    let mut total = 0.0;
    for k in 0..v.len() {
        let (a, b) = (v[k], v[(k + 1) % v.len()]);
        let d = (a.0 * b.1 - a.1 * b.0).atan2(a.0 * b.0 + a.1 * b.1);
        total += d;
    }
    total / std::f64::consts::TAU
}
