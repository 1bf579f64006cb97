//! Zeros of the Husimi amplitude.
//!
//! The amplitude is a Gaussian times an antiholomorphic function of z, so its
//! zeros are isolated and carry a quantized phase winding; a scan over grid
//! plaquettes finds every zero resolved by the grid.

use num_complex::Complex64 as C64;
use serde::{Deserialize, Serialize};

use super::interp::{bicubic, newton2};
use super::{winding, TopologyConfig, Window};
use crate::husimi::HusimiField;

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct HusimiZero {
    pub x: f64,
    pub p: f64,
    /// Phase winding of the amplitude, counterclockwise in (x, p).
    pub winding: i32,
    pub t: f64,
    /// |⟨z|ψ⟩| at the reported location over max|⟨z|ψ⟩|.
    pub residual: f64,
    pub refined: bool,
}

impl HusimiZero {
    pub fn z(&self, field: &HusimiField) -> C64 {
        field.grid.params.z_of(self.x, self.p)
    }
}

/// Near-zero corner magnitude, relative to the peak, below which a plaquette
/// is resolved on the ring of neighbours instead.
const CORNER_FLOOR: f64 = 1e-14;

/// All zeros of the amplitude inside `window`, refined by Newton on the exact
/// overlap when the source wavefunction is known and on a bicubic
/// interpolant of the amplitude otherwise.
pub fn find_husimi_zeros(field: &HusimiField, window: &Window, cfg: &TopologyConfig) -> Vec<HusimiZero> {
    let g = &field.grid;
    let a = &field.amplitude;
    let (nx, np) = g.shape();
    let amax = a.iter().fold(0.0f64, |m, v| m.max(v.norm()));
    if amax == 0.0 {
        return Vec::new();
    }
    let pair = |v: C64| (v.re, v.im);
    let mut candidates: Vec<((f64, f64), i32)> = Vec::new();
    for i in 0..nx - 1 {
        for j in 0..np - 1 {
            if !window.contains_plaquette(i, j) {
                continue;
            }
            let ring = [a[[i, j]], a[[i + 1, j]], a[[i + 1, j + 1]], a[[i, j + 1]]];
            if let Some(k) = ring.iter().position(|v| v.norm() <= CORNER_FLOOR * amax) {
                let (ci, cj) = [(i, j), (i + 1, j), (i + 1, j + 1), (i, j + 1)][k];
                if ci == 0 || cj == 0 || ci + 1 >= nx || cj + 1 >= np {
                    continue;
                }
                let w = winding(node_ring(ci, cj).iter().map(|&(u, v)| pair(a[[u, v]]))).round() as i32;
                if w != 0 {
                    candidates.push(((ci as f64, cj as f64), w));
                }
                continue;
            }
            let w = winding(ring.iter().map(|&v| pair(v))).round() as i32;
            if w != 0 {
                candidates.push(((i as f64 + 0.5, j as f64 + 0.5), w));
            }
        }
    }

    let re = a.mapv(|v| v.re);
    let im = a.mapv(|v| v.im);
    let eval = |x: f64, p: f64| -> Option<(f64, f64)> {
        match &field.source {
            Some(_) => field.amplitude_at(g.params.z_of(x, p)).map(|v| (v.re / amax, v.im / amax)),
            None => {
                let (u, v) = g.locate(x, p);
                Some((bicubic(&re, u, v)? / amax, bicubic(&im, u, v)? / amax))
            }
        }
    };

    let mut out: Vec<HusimiZero> = Vec::new();
    for ((u, v), w) in candidates {
        let start = (g.x_min + u * g.dx(), g.p_min + v * g.dp());
        let solved = newton2(eval, start, (g.dx(), g.dp()), 1e-13, cfg.newton_max_iter)
            .filter(|s| s.converged && g.cell_distance((s.x, s.p), start) < 1.5);
        let zero = match solved {
            Some(s) => HusimiZero { x: s.x, p: s.p, winding: w, t: field.t, residual: s.residual, refined: true },
            None => {
                let r = eval(start.0, start.1).map(|(a, b)| a.hypot(b)).unwrap_or(f64::NAN);
                HusimiZero { x: start.0, p: start.1, winding: w, t: field.t, residual: r, refined: false }
            }
        };
        if !out.iter().any(|o| g.cell_distance((o.x, o.p), (zero.x, zero.p)) < 0.5) {
            out.push(zero);
        }
    }
    out
}

/// The eight neighbours of a node, counterclockwise in (x, p).
pub(crate) fn node_ring(i: usize, j: usize) -> [(usize, usize); 8] {
    [
        (i - 1, j - 1),
        (i, j - 1),
        (i + 1, j - 1),
        (i + 1, j),
        (i + 1, j + 1),
        (i, j + 1),
        (i - 1, j + 1),
        (i - 1, j),
    ]
}
