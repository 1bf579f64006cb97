//! Poincaré index of a current field along a closed loop of grid nodes.

use super::winding;
use crate::error::{Error, Result};
use crate::flow::CurrentField;

/// Nodes where |J| is below this fraction of max|J| cannot lie on a loop.
pub const LOOP_FLOOR: f64 = 1e-12;

/// Winding number of the direction of (J_x, J_p) along `path`, a closed loop
/// of grid-adjacent nodes (the first node is not repeated at the end).
pub fn poincare_index(current: &CurrentField, path: &[(usize, usize)]) -> Result<i32> {
    if path.len() < 3 {
        return Err(Error::LoopInvalid(format!("a loop needs at least 3 nodes, got {}", path.len())));
    }
    let (nx, np) = current.grid.shape();
    let scale = current.max_norm();
    for (k, &(i, j)) in path.iter().enumerate() {
        if i >= nx || j >= np {
            return Err(Error::LoopInvalid(format!("node ({i}, {j}) is outside the grid")));
        }
        let (ni, nj) = path[(k + 1) % path.len()];
        if i.abs_diff(ni) > 1 || j.abs_diff(nj) > 1 || (i, j) == (ni, nj) {
            return Err(Error::LoopInvalid(format!("nodes ({i}, {j}) and ({ni}, {nj}) are not adjacent")));
        }
        if current.jx[[i, j]].hypot(current.jp[[i, j]]) <= LOOP_FLOOR * scale {
            return Err(Error::LoopInvalid(format!("|J| vanishes at loop node ({i}, {j})")));
        }
    }
    let w = winding(path.iter().map(|&(i, j)| (current.jx[[i, j]], current.jp[[i, j]])));
    Ok(w.round() as i32)
}

/// Counterclockwise boundary of the node rectangle `[i0, i1] × [j0, j1]`.
pub fn rectangle_loop(i0: usize, j0: usize, i1: usize, j1: usize) -> Vec<(usize, usize)> {
    let mut path = Vec::new();
    for i in i0..i1 {
        path.push((i, j0));
    }
    for j in j0..j1 {
        path.push((i1, j));
    }
    for i in (i0 + 1..=i1).rev() {
        path.push((i, j1));
    }
    for j in (j0 + 1..=j1).rev() {
        path.push((i0, j));
    }
    path
}
