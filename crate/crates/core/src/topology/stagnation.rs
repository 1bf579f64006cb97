//! Stagnation points of a current field and their linear classification.

use serde::{Deserialize, Serialize};

use super::interp::{bicubic, newton2};
use super::zeros::node_ring;
use super::{winding, TopologyConfig, Window};
use crate::flow::CurrentField;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum FlowClass {
    Saddle,
    Center,
    Spiral,
    Node,
    Degenerate,
}

impl FlowClass {
    pub fn name(&self) -> &'static str {
        match self {
            FlowClass::Saddle => "saddle",
            FlowClass::Center => "center",
            FlowClass::Spiral => "spiral",
            FlowClass::Node => "node",
            FlowClass::Degenerate => "degenerate",
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct StagnationPoint {
    pub x: f64,
    pub p: f64,
    /// ∂(J_x, J_p)/∂(x, p), row-major.
    pub jacobian: [[f64; 2]; 2],
    /// Eigenvalues as (re, im).
    pub eigenvalues: [(f64, f64); 2],
    pub class: FlowClass,
    pub index: i32,
    pub t: f64,
    /// |J| at the location over max|J|.
    pub residual: f64,
    pub converged: bool,
}

/// Class, eigenvalues and Poincaré index of a linearized flow.
pub fn classify(jac: [[f64; 2]; 2], tol: f64) -> (FlowClass, [(f64, f64); 2], i32) {
    let [[a, b], [c, d]] = jac;
    let tr = a + d;
    let det = a * d - b * c;
    let frob2 = a * a + b * b + c * c + d * d;
    let disc = tr * tr / 4.0 - det;
    let eig = if disc >= 0.0 {
        let s = disc.sqrt();
        [(tr / 2.0 + s, 0.0), (tr / 2.0 - s, 0.0)]
    } else {
        let s = (-disc).sqrt();
        [(tr / 2.0, s), (tr / 2.0, -s)]
    };
    if frob2 == 0.0 || det.abs() <= 1e-12 * frob2 {
        return (FlowClass::Degenerate, eig, 0);
    }
    if det < 0.0 {
        return (FlowClass::Saddle, eig, -1);
    }
    if disc < 0.0 {
        let modulus = det.sqrt();
        let class = if (tr / 2.0).abs() < tol * modulus { FlowClass::Center } else { FlowClass::Spiral };
        return (class, eig, 1);
    }
    (FlowClass::Node, eig, 1)
}

/// Near-zero corner magnitude, relative to max|J|, below which a plaquette is
/// resolved on the ring of neighbours instead.
const CORNER_FLOOR: f64 = 1e-14;

/// Newton target for |J| relative to max|J|.
const STAGNATION_TOL: f64 = 1e-11;

/// Stagnation points inside `window`: plaquettes across which the direction
/// of J winds, refined by Newton on a bicubic interpolant of J.
pub fn find_stagnation_points(current: &CurrentField, window: &Window, cfg: &TopologyConfig) -> Vec<StagnationPoint> {
    let g = &current.grid;
    let (nx, np) = g.shape();
    let scale = current.max_norm();
    if scale == 0.0 {
        return Vec::new();
    }
    let jx = current.jx.mapv(|v| v / scale);
    let jp = current.jp.mapv(|v| v / scale);
    let at = |i: usize, j: usize| (jx[[i, j]], jp[[i, j]]);
    let mut candidates = Vec::new();
    for i in 0..nx - 1 {
        for j in 0..np - 1 {
            if !window.contains_plaquette(i, j) {
                continue;
            }
            let corners = [(i, j), (i + 1, j), (i + 1, j + 1), (i, j + 1)];
            if let Some(&(ci, cj)) = corners.iter().find(|&&(u, v)| {
                let (a, b) = at(u, v);
                a.hypot(b) <= CORNER_FLOOR
            }) {
                if ci == 0 || cj == 0 || ci + 1 >= nx || cj + 1 >= np {
                    continue;
                }
                if winding(node_ring(ci, cj).iter().map(|&(u, v)| at(u, v))).round() != 0.0 {
                    candidates.push((ci as f64, cj as f64));
                }
                continue;
            }
            if winding(corners.iter().map(|&(u, v)| at(u, v))).round() != 0.0 {
                candidates.push((i as f64 + 0.5, j as f64 + 0.5));
            }
        }
    }

    let eval = |x: f64, p: f64| -> Option<(f64, f64)> {
        let (u, v) = g.locate(x, p);
        Some((bicubic(&jx, u, v)?, bicubic(&jp, u, v)?))
    };
    let cell = (g.dx(), g.dp());
    let mut out: Vec<StagnationPoint> = Vec::new();
    for (u, v) in candidates {
        let start = (g.x_min + u * g.dx(), g.p_min + v * g.dp());
        let solved = newton2(eval, start, cell, STAGNATION_TOL, cfg.newton_max_iter)
            .filter(|s| s.converged && g.cell_distance((s.x, s.p), start) < 1.5);
        let point = match solved {
            Some(s) => {
                let jac = jacobian(&eval, (s.x, s.p), cell, scale);
                let (class, eigenvalues, index) = classify(jac, cfg.classification_tol);
                StagnationPoint { x: s.x, p: s.p, jacobian: jac, eigenvalues, class, index, t: current.t, residual: s.residual, converged: true }
            }
            None => {
                let r = eval(start.0, start.1).map(|(a, b)| a.hypot(b)).unwrap_or(f64::NAN);
                let jac = jacobian(&eval, start, cell, scale);
                let (_, eigenvalues, _) = classify(jac, cfg.classification_tol);
                StagnationPoint {
                    x: start.0,
                    p: start.1,
                    jacobian: jac,
                    eigenvalues,
                    class: FlowClass::Degenerate,
                    index: 0,
                    t: current.t,
                    residual: r,
                    converged: false,
                }
            }
        };
        if !out.iter().any(|o| g.cell_distance((o.x, o.p), (point.x, point.p)) < 0.5) {
            out.push(point);
        }
    }
    out
}

fn jacobian<F>(eval: &F, at: (f64, f64), cell: (f64, f64), scale: f64) -> [[f64; 2]; 2]
where
    F: Fn(f64, f64) -> Option<(f64, f64)>,
{
    let (hx, hp) = (1e-3 * cell.0, 1e-3 * cell.1);
    let f = |x: f64, p: f64| eval(x, p).unwrap_or((f64::NAN, f64::NAN));
    let (xp, xm) = (f(at.0 + hx, at.1), f(at.0 - hx, at.1));
    let (pp, pm) = (f(at.0, at.1 + hp), f(at.0, at.1 - hp));
    [
        [scale * (xp.0 - xm.0) / (2.0 * hx), scale * (pp.0 - pm.0) / (2.0 * hp)],
        [scale * (xp.1 - xm.1) / (2.0 * hx), scale * (pp.1 - pm.1) / (2.0 * hp)],
    ]
}
