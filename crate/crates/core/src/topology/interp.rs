//! Local 4×4 Lagrange interpolation on grid-index coordinates.

use ndarray::Array2;

fn weights(t: f64) -> [f64; 4] {
    // nodes at −1, 0, 1, 2
    [
        -t * (t - 1.0) * (t - 2.0) / 6.0,
        (t + 1.0) * (t - 1.0) * (t - 2.0) / 2.0,
        -(t + 1.0) * t * (t - 2.0) / 2.0,
        (t + 1.0) * t * (t - 1.0) / 6.0,
    ]
}

fn stencil(u: f64, n: usize) -> (usize, f64) {
    let base = (u.floor() as isize - 1).clamp(0, n as isize - 4) as usize;
    (base, u - (base as f64 + 1.0))
}

/// Value of `data` at fractional index `(u, v)`; `None` outside the grid.
pub(crate) fn bicubic(data: &Array2<f64>, u: f64, v: f64) -> Option<f64> {
    let (nx, np) = data.dim();
    if !(u >= 0.0 && v >= 0.0 && u <= (nx - 1) as f64 && v <= (np - 1) as f64) {
        return None;
    }
    let (bi, tu) = stencil(u, nx);
    let (bj, tv) = stencil(v, np);
    let (wu, wv) = (weights(tu), weights(tv));
    let mut acc = 0.0;
    for (a, wa) in wu.iter().enumerate() {
        for (b, wb) in wv.iter().enumerate() {
            acc += wa * wb * data[[bi + a, bj + b]];
        }
    }
    Some(acc)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn reproduces_cubics_exactly() {
        let f = |u: f64, v: f64| 1.0 + u - 0.5 * v + 0.1 * u * u * v - 0.02 * v.powi(3) + 0.01 * u.powi(3);
        let data = Array2::from_shape_fn((12, 10), |(i, j)| f(i as f64, j as f64));
        for &(u, v) in &[(3.3, 4.7), (0.2, 0.9), (10.9, 8.5), (5.0, 5.0)] {
            assert!((bicubic(&data, u, v).unwrap() - f(u, v)).abs() < 1e-12);
        }
        assert!(bicubic(&data, -0.1, 2.0).is_none());
    }
}

/// Outcome of a two-dimensional Newton solve.
#[derive(Clone, Copy, Debug)]
pub(crate) struct Newton {
    pub x: f64,
    pub p: f64,
    pub residual: f64,
    pub converged: bool,
}

/// Newton iteration for `f(x, p) = 0` with a central-difference Jacobian.
/// Steps are capped at one grid cell; `None` from `f` means the iterate left
/// the domain.
pub(crate) fn newton2<F>(f: F, start: (f64, f64), cell: (f64, f64), tol: f64, max_iter: usize) -> Option<Newton>
where
    F: Fn(f64, f64) -> Option<(f64, f64)>,
{
    let (mut x, mut p) = start;
    let (hx, hp) = (1e-4 * cell.0, 1e-4 * cell.1);
    let mut val = f(x, p)?;
    for _ in 0..max_iter {
        let res = val.0.hypot(val.1);
        if res <= tol {
            return Some(Newton { x, p, residual: res, converged: true });
        }
        let fxp = f(x + hx, p)?;
        let fxm = f(x - hx, p)?;
        let fpp = f(x, p + hp)?;
        let fpm = f(x, p - hp)?;
        let a = (fxp.0 - fxm.0) / (2.0 * hx);
        let c = (fxp.1 - fxm.1) / (2.0 * hx);
        let b = (fpp.0 - fpm.0) / (2.0 * hp);
        let d = (fpp.1 - fpm.1) / (2.0 * hp);
        let det = a * d - b * c;
        if det == 0.0 || !det.is_finite() {
            break;
        }
        let mut dx = -(d * val.0 - b * val.1) / det;
        let mut dp = -(-c * val.0 + a * val.1) / det;
        let len = (dx / cell.0).hypot(dp / cell.1);
        if len > 1.0 {
            dx /= len;
            dp /= len;
        }
        x += dx;
        p += dp;
        val = f(x, p)?;
        if len < 1e-12 {
            let res = val.0.hypot(val.1);
            return Some(Newton { x, p, residual: res, converged: res <= tol });
        }
    }
    let res = val.0.hypot(val.1);
    Some(Newton { x, p, residual: res, converged: res <= tol })
}
