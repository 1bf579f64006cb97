//! Truncated Fock-space matrices, used as an independent check of normal
//! ordering.

use ndarray::Array2;
use num_complex::Complex64 as C64;

use super::normal::{NormalOrderedHamiltonian, XPPolynomial};
use super::reorder::binomial;
use crate::error::{Error, Result};
use crate::params::OscillatorParams;

/// Annihilation operator on the first `dim` Fock states.
pub fn annihilation(dim: usize) -> Array2<C64> {
    let mut a = Array2::zeros((dim, dim));
    for n in 1..dim {
        a[[n - 1, n]] = C64::new((n as f64).sqrt(), 0.0);
    }
    a
}

fn dagger(m: &Array2<C64>) -> Array2<C64> {
    m.t().mapv(|c| c.conj())
}

fn matrix_power(m: &Array2<C64>, k: u32) -> Array2<C64> {
    let mut out = Array2::eye(m.nrows());
    for _ in 0..k {
        out = out.dot(m);
    }
    out
}

/// Σ h_{mn} (a†)^m a^n with truncated ladder matrices.
pub fn fock_matrix_oracle(h: &NormalOrderedHamiltonian, dim: usize) -> Result<Array2<C64>> {
    if dim < h.n_max() as usize + 2 {
        return Err(Error::Argument(format!(
            "Fock dimension {dim} is below n_max + 2 = {}",
            h.n_max() + 2
        )));
    }
    let a = annihilation(dim);
    let ad = dagger(&a);
    let mut out = Array2::zeros((dim, dim));
    for (m, n, c) in h.iter() {
        out = out + matrix_power(&ad, m).dot(&matrix_power(&a, n)) * c;
    }
    Ok(out)
}

/// The operator of an x̂–p̂ polynomial assembled directly from truncated
/// x̂ and p̂ matrices, with the same Weyl convention for mixed terms.
pub fn xp_fock_matrix(poly: &XPPolynomial, params: &OscillatorParams, dim: usize) -> Result<Array2<C64>> {
    if dim < poly.degree() as usize + 2 {
        return Err(Error::Argument(format!("Fock dimension {dim} too small for degree {}", poly.degree())));
    }
    let a = annihilation(dim);
    let ad = dagger(&a);
    let x = (&a + &ad) * C64::new(params.x_scale(), 0.0);
    let p = (&ad - &a) * C64::new(0.0, params.p_scale());
    let mut out = Array2::zeros((dim, dim));
    for t in &poly.terms {
        let (ax, bp) = (t.x_power, t.p_power);
        let op = if ax == 0 || bp == 0 {
            matrix_power(&x, ax).dot(&matrix_power(&p, bp))
        } else {
            let mut acc = Array2::zeros((dim, dim));
            for k in 0..=ax {
                let w = binomial(ax, k) as f64 / 2f64.powi(ax as i32);
                acc = acc
                    + matrix_power(&x, k).dot(&matrix_power(&p, bp)).dot(&matrix_power(&x, ax - k))
                        * C64::new(w, 0.0);
            }
            acc
        };
        out = out + op * C64::new(t.coeff, 0.0);
    }
    Ok(out)
}

/// Largest entrywise difference on the top-left `block × block` corner,
/// relative to the largest entry of `b` there.
pub fn block_relative_difference(a: &Array2<C64>, b: &Array2<C64>, block: usize) -> f64 {
    let mut diff: f64 = 0.0;
    let mut scale: f64 = 0.0;
    for i in 0..block {
        for j in 0..block {
            diff = diff.max((a[[i, j]] - b[[i, j]]).norm());
            scale = scale.max(b[[i, j]].norm());
        }
    }
    if scale == 0.0 {
        diff
    } else {
        diff / scale
    }
}
