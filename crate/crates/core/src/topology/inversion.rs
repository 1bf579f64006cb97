//! Regions where the position current points against the momentum.

use ndarray::Array2;

use crate::error::Result;
use crate::flow::CurrentField;
use crate::husimi::HusimiField;

#[derive(Clone, Debug)]
pub struct InversionMask {
    pub mask: Array2<bool>,
    pub count: usize,
    /// Masked nodes over nodes with Q above the threshold.
    pub area_fraction: f64,
}

/// Nodes with `Q > q_threshold · max Q`, `p ≠ 0` and `sign(J_x) ≠ sign(p)`.
pub fn momentum_inversion_mask(current: &CurrentField, field: &HusimiField, q_threshold: f64) -> Result<InversionMask> {
    current.grid.same_as(&field.grid)?;
    let g = &current.grid;
    let floor = q_threshold * field.max_q();
    let mut support = 0usize;
    let mask = Array2::from_shape_fn(g.shape(), |(i, j)| {
        let q = field.q[[i, j]];
        if q.is_nan() || q <= floor {
            return false;
        }
        support += 1;
        let p = g.p(j);
        let jx = current.jx[[i, j]];
        p != 0.0 && jx != 0.0 && (jx > 0.0) != (p > 0.0)
    });
    let count = mask.iter().filter(|&&m| m).count();
    let area_fraction = if support == 0 { 0.0 } else { count as f64 / support as f64 };
    Ok(InversionMask { mask, count, area_fraction })
}
