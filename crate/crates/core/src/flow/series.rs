//! Symbolic expansion of the current series into pointwise sums over the
//! derivative stack.
//!
//! With `D = ∂/∂z* + z` and `X = z*`, reordering `X^m D^n` and expanding
//! `D^{n−k}` binomially gives, per ħ-order `q = k + l − 1`,
//!
//! ```text
//! J_z  =  (1/iħ) Σ h*_{mn} r(m,n,k) C(n−k,l) ∂_z^{l−1} [ z*^{n−k−l} z^{m−k} Q ]
//! J_z* = −(1/iħ) Σ h_{mn}  r(m,n,k) C(n−k,l) ∂_{z*}^{l−1}[ z^{n−k−l} z*^{m−k} Q ]
//! ```
//!
//! and the Leibniz rule turns each derivative into
//! `Σ_i C(s,i) b!/(b−i)! z^{b−i} ∂^{s−i} Q`.

use std::collections::BTreeMap;

use ndarray::Array2;
use num_complex::Complex64 as C64;

use crate::algebra::reorder::{binomial, falling_factorial, r_coefficient};
use crate::algebra::NormalOrderedHamiltonian;
use crate::error::Result;
use crate::husimi::DerivativeStack;

/// `coeff · conj_pow-power · plain_pow-power · ∂^deriv Q`.
///
/// For a J_z term the "plain" variable is z and the "conjugate" one z*; for
/// J_z* terms the roles swap and the derivative is taken in z*.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct SeriesTerm {
    pub coeff: C64,
    pub conj_pow: u32,
    pub plain_pow: u32,
    pub deriv: usize,
}

/// Terms of one complex current, grouped by ħ-order.
#[derive(Clone, Debug, Default)]
pub struct CurrentSeries {
    pub orders: Vec<Vec<SeriesTerm>>,
}

impl CurrentSeries {
    /// J_z series when `conjugate == false`, J_z* series otherwise.
    pub fn build(h: &NormalOrderedHamiltonian, hbar: f64, conjugate: bool) -> Result<Self> {
        let q_max = h.q_max() as usize;
        let mut grouped: Vec<BTreeMap<(u32, u32, usize), C64>> = vec![BTreeMap::new(); q_max + 1];
        let prefactor = if conjugate { -C64::new(0.0, -1.0 / hbar) } else { C64::new(0.0, -1.0 / hbar) };
        for (m, n, c) in h.iter() {
            let c = if conjugate { c } else { c.conj() };
            for k in 0..=m.min(n) {
                let r = r_coefficient(m, n, k)? as f64;
                for l in 1..=(n - k) {
                    let q = (k + l - 1) as usize;
                    let outer = prefactor * c * r * binomial(n - k, l) as f64;
                    let s = l - 1;
                    let conj_pow = n - k - l;
                    let plain = m - k;
                    for i in 0..=s.min(plain) {
                        let w = (binomial(s, i) * falling_factorial(plain, i)) as f64;
                        let key = (conj_pow, plain - i, (s - i) as usize);
                        *grouped[q].entry(key).or_default() += outer * w;
                    }
                }
            }
        }
        let orders = grouped
            .into_iter()
            .map(|g| {
                g.into_iter()
                    .filter(|(_, c)| c.norm() > 0.0)
                    .map(|((conj_pow, plain_pow, deriv), coeff)| SeriesTerm { coeff, conj_pow, plain_pow, deriv })
                    .collect()
            })
            .collect();
        Ok(CurrentSeries { orders })
    }

    pub fn q_max(&self) -> usize {
        self.orders.len().saturating_sub(1)
    }

    /// Deepest stack entry any term needs.
    pub fn required_depth(&self) -> usize {
        self.orders.iter().flatten().map(|t| t.deriv).max().unwrap_or(0)
    }

    pub fn terms(&self, q: usize) -> &[SeriesTerm] {
        self.orders.get(q).map(|v| v.as_slice()).unwrap_or(&[])
    }
}

/// Powers `z^k` and `z*^k` at every node.
pub struct PowerTable {
    pub z: Vec<Array2<C64>>,
    pub zs: Vec<Array2<C64>>,
}

impl PowerTable {
    pub fn new(stack: &DerivativeStack, max_pow: u32) -> Self {
        let grid = stack.grid();
        let z1 = Array2::from_shape_fn(grid.shape(), |(i, j)| grid.z(i, j));
        let mut z = vec![Array2::from_elem(grid.shape(), C64::new(1.0, 0.0))];
        for k in 1..=max_pow as usize {
            let next = &z[k - 1] * &z1;
            z.push(next);
        }
        let zs = z.iter().map(|a| a.mapv(|v| v.conj())).collect();
        PowerTable { z, zs }
    }
}

/// Evaluates `Σ terms` for J_z (`conjugate == false`) or J_z*.
pub fn evaluate_terms(
    terms: &[SeriesTerm],
    stack: &DerivativeStack,
    powers: &PowerTable,
    conjugate: bool,
    out: &mut Array2<C64>,
) {
    let (plain, conj) = if conjugate { (&powers.zs, &powers.z) } else { (&powers.z, &powers.zs) };
    for t in terms {
        let d = stack.dz(t.deriv);
        let a = &conj[t.conj_pow as usize];
        let b = &plain[t.plain_pow as usize];
        ndarray::Zip::from(&mut *out).and(d).and(a).and(b).for_each(|o, &dq, &pa, &pb| {
            let dq = if conjugate { dq.conj() } else { dq };
            *o += t.coeff * pa * pb * dq;
        });
    }
}
