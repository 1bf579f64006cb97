//! Normal-ordered power series `Σ h_{mn} a†^m a^n` and their construction
//! from polynomials in x̂ and p̂.

use std::collections::BTreeMap;

use num_complex::Complex64 as C64;
use serde::{Deserialize, Serialize};

use super::reorder::{binomial, falling_factorial, POWER_CAP};
use crate::error::{Error, Result};
use crate::params::OscillatorParams;

/// Relative tolerance of the hermiticity check.
pub const HERMITIAN_TOL: f64 = 1e-12;

/// Coefficients `h_{mn}` of `Σ h_{mn} a†^m a^n`, keyed by `(m, n)`.
///
/// Only nonzero entries are stored. The same type doubles as the coefficient
/// map of the phase-space symbol `H(z'*, z) = Σ h_{mn} z'*^m z^n` and of its
/// derivatives.
#[derive(Clone, Debug, Default, PartialEq)]
pub struct NormalOrderedHamiltonian {
    coeffs: BTreeMap<(u32, u32), C64>,
}

impl NormalOrderedHamiltonian {
    pub fn zero() -> Self {
        Self::default()
    }

    pub fn from_terms<I: IntoIterator<Item = ((u32, u32), C64)>>(terms: I) -> Result<Self> {
        let mut h = Self::zero();
        for ((m, n), c) in terms {
            if m > POWER_CAP || n > POWER_CAP {
                return Err(Error::Capacity(format!("term a†^{m} a^{n} exceeds the power cap")));
            }
            if !(c.re.is_finite() && c.im.is_finite()) {
                return Err(Error::Argument(format!("coefficient of a†^{m} a^{n} is not finite")));
            }
            h.add_term(m, n, c);
        }
        Ok(h)
    }

    fn add_term(&mut self, m: u32, n: u32, c: C64) {
        let entry = self.coeffs.entry((m, n)).or_insert(C64::new(0.0, 0.0));
        *entry += c;
        if *entry == C64::new(0.0, 0.0) {
            self.coeffs.remove(&(m, n));
        }
    }

    /// h_{mn}, zero when absent.
    pub fn get(&self, m: u32, n: u32) -> C64 {
        self.coeffs.get(&(m, n)).copied().unwrap_or_default()
    }

    pub fn iter(&self) -> impl Iterator<Item = (u32, u32, C64)> + '_ {
        self.coeffs.iter().map(|(&(m, n), &c)| (m, n, c))
    }

    pub fn len(&self) -> usize {
        self.coeffs.len()
    }

    pub fn is_empty(&self) -> bool {
        self.coeffs.is_empty()
    }

    /// Largest of `m` and `n` over the nonzero entries.
    pub fn n_max(&self) -> u32 {
        self.coeffs.keys().map(|&(m, n)| m.max(n)).max().unwrap_or(0)
    }

    /// Highest power of ħ in the current series, `n_max − 1` (0 for constants).
    pub fn q_max(&self) -> u32 {
        self.n_max().saturating_sub(1)
    }

    fn scale(&self) -> f64 {
        self.coeffs.values().map(|c| c.norm()).fold(0.0, f64::max)
    }

    /// `h_{mn} = conj(h_{nm})` for every pair, relative to the largest coefficient.
    pub fn is_hermitian(&self) -> bool {
        let tol = HERMITIAN_TOL * self.scale().max(f64::MIN_POSITIVE);
        self.coeffs
            .iter()
            .all(|(&(m, n), &c)| (c - self.get(n, m).conj()).norm() <= tol)
    }

    /// Coefficient-wise sum.
    pub fn plus(&self, other: &Self) -> Self {
        let mut out = self.clone();
        for (m, n, c) in other.iter() {
            out.add_term(m, n, c);
        }
        out
    }

    pub fn scaled(&self, s: C64) -> Self {
        let mut out = Self::zero();
        for (m, n, c) in self.iter() {
            out.add_term(m, n, c * s);
        }
        out
    }

    /// Operator product, re-expressed in normal order using
    /// `a^n a†^p = Σ_k k! C(n,k) C(p,k) a†^{p−k} a^{n−k}`.
    pub fn operator_product(&self, other: &Self) -> Self {
        let mut out = Self::zero();
        for (m, n, c1) in self.iter() {
            for (p, q, c2) in other.iter() {
                for k in 0..=n.min(p) {
                    let w = (binomial(n, k) * binomial(p, k) * falling_factorial(k, k)) as f64;
                    out.add_term(m + p - k, n + q - k, c1 * c2 * w);
                }
            }
        }
        out
    }

    /// Hermitian adjoint: `h†_{mn} = conj(h_{nm})`.
    pub fn adjoint(&self) -> Self {
        let mut out = Self::zero();
        for (m, n, c) in self.iter() {
            out.add_term(n, m, c.conj());
        }
        out
    }

    /// H(z'*, z) = Σ h_{mn} z'*^m z^n.
    pub fn evaluate(&self, zprime_conj: C64, z: C64) -> C64 {
        self.iter()
            .map(|(m, n, c)| c * zprime_conj.powu(m) * z.powu(n))
            .sum()
    }

    /// Diagonal symbol H(z*, z).
    pub fn symbol(&self, z: C64) -> C64 {
        self.evaluate(z.conj(), z)
    }

    /// Coefficient map of ∂^{a+b} H / ∂z*^a ∂z^b.
    pub fn partial(&self, a: u32, b: u32) -> Self {
        let mut out = Self::zero();
        for (m, n, c) in self.iter() {
            if m >= a && n >= b {
                let w = (falling_factorial(m, a) * falling_factorial(n, b)) as f64;
                out.add_term(m - a, n - b, c * w);
            }
        }
        out
    }
}

/// One monomial `coeff · x^x_power p^p_power` of an [`XPPolynomial`].
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct XPTerm {
    pub x_power: u32,
    pub p_power: u32,
    pub coeff: f64,
}

/// Real polynomial in x̂ and p̂. Mixed monomials x̂^a p̂^b are read as their
/// Weyl-symmetrized operator.
#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
pub struct XPPolynomial {
    pub terms: Vec<XPTerm>,
}

impl XPPolynomial {
    pub fn new(terms: Vec<XPTerm>) -> Self {
        XPPolynomial { terms }
    }

    pub fn term(mut self, x_power: u32, p_power: u32, coeff: f64) -> Self {
        self.terms.push(XPTerm { x_power, p_power, coeff });
        self
    }

    pub fn validate(&self) -> Result<()> {
        for t in &self.terms {
            if !t.coeff.is_finite() {
                return Err(Error::Validation(format!(
                    "coefficient of x^{} p^{} is not finite",
                    t.x_power, t.p_power
                )));
            }
            if t.x_power + t.p_power > POWER_CAP {
                return Err(Error::Capacity(format!(
                    "term x^{} p^{} exceeds the power cap",
                    t.x_power, t.p_power
                )));
            }
        }
        Ok(())
    }

    /// Classical value at the phase-space point `(x, p)`.
    pub fn classical(&self, x: f64, p: f64) -> f64 {
        self.terms
            .iter()
            .map(|t| t.coeff * x.powi(t.x_power as i32) * p.powi(t.p_power as i32))
            .sum()
    }

    /// Highest total degree.
    pub fn degree(&self) -> u32 {
        self.terms.iter().map(|t| t.x_power + t.p_power).max().unwrap_or(0)
    }

    /// Harmonic oscillator p̂²/2m + mΩ²x̂²/2.
    pub fn harmonic_oscillator(params: &OscillatorParams) -> Self {
        Self::default()
            .term(0, 2, 0.5 / params.mass)
            .term(2, 0, 0.5 * params.mass * params.omega * params.omega)
    }

    pub fn free_particle(params: &OscillatorParams) -> Self {
        Self::default().term(0, 2, 0.5 / params.mass)
    }

    /// p̂²/2m + λx̂⁴ − (k/2)x̂² + V₀ with the well parameters chosen so the
    /// normal-ordered symbol keeps only z², z*² and (z + z*)⁴ terms:
    /// k = mΩ² + 6λħ/(mΩ), V₀ = 3λħ²/(4m²Ω²).
    pub fn double_well(params: &OscillatorParams, lambda: f64) -> Self {
        let dw = DoubleWellParams::new(*params, lambda);
        Self::default()
            .term(0, 2, 0.5 / params.mass)
            .term(4, 0, lambda)
            .term(2, 0, -0.5 * dw.k)
            .term(0, 0, dw.v0)
    }
}

/// Derived constants of the symmetric double well.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct DoubleWellParams {
    pub params: OscillatorParams,
    pub lambda: f64,
    pub k: f64,
    pub v0: f64,
}

impl DoubleWellParams {
    pub fn new(params: OscillatorParams, lambda: f64) -> Self {
        let OscillatorParams { mass: m, omega: w, hbar: h } = params;
        DoubleWellParams {
            params,
            lambda,
            k: m * w * w + 6.0 * lambda * h / (m * w),
            v0: 3.0 * lambda * h * h / (4.0 * m * m * w * w),
        }
    }

    /// |Re z| of the two classical centers, √(m²Ω³/(8λħ)).
    pub fn center_re_z(&self) -> f64 {
        let OscillatorParams { mass: m, omega: w, hbar: h } = self.params;
        (m * m * w.powi(3) / (8.0 * self.lambda * h)).sqrt()
    }
}

/// x̂ = √(ħ/2)(a + a†)/γ.
pub fn position_operator(params: &OscillatorParams) -> NormalOrderedHamiltonian {
    let s = C64::new(params.x_scale(), 0.0);
    NormalOrderedHamiltonian { coeffs: [((0, 1), s), ((1, 0), s)].into_iter().collect() }
}

/// p̂ = −iγ√(ħ/2)(a − a†).
pub fn momentum_operator(params: &OscillatorParams) -> NormalOrderedHamiltonian {
    let s = params.p_scale();
    NormalOrderedHamiltonian {
        coeffs: [((0, 1), C64::new(0.0, -s)), ((1, 0), C64::new(0.0, s))].into_iter().collect(),
    }
}

fn identity() -> NormalOrderedHamiltonian {
    NormalOrderedHamiltonian { coeffs: [((0, 0), C64::new(1.0, 0.0))].into_iter().collect() }
}

fn power(op: &NormalOrderedHamiltonian, k: u32) -> NormalOrderedHamiltonian {
    (0..k).fold(identity(), |acc, _| acc.operator_product(op))
}

/// Normal-ordered form of an x̂–p̂ polynomial.
///
/// Mixed monomials use the Weyl (McCoy) form
/// `W(x̂^a p̂^b) = 2^{−a} Σ_k C(a,k) x̂^k p̂^b x̂^{a−k}`.
pub fn normal_order(poly: &XPPolynomial, params: &OscillatorParams) -> Result<NormalOrderedHamiltonian> {
    poly.validate()?;
    params.validate()?;
    let x = position_operator(params);
    let p = momentum_operator(params);
    let max_x = poly.terms.iter().map(|t| t.x_power).max().unwrap_or(0);
    let max_p = poly.terms.iter().map(|t| t.p_power).max().unwrap_or(0);
    let x_pows: Vec<_> = (0..=max_x).map(|k| power(&x, k)).collect();
    let p_pows: Vec<_> = (0..=max_p).map(|k| power(&p, k)).collect();

    let mut out = NormalOrderedHamiltonian::zero();
    for t in &poly.terms {
        let (a, b) = (t.x_power, t.p_power);
        let op = if a == 0 || b == 0 {
            x_pows[a as usize].operator_product(&p_pows[b as usize])
        } else {
            let mut acc = NormalOrderedHamiltonian::zero();
            for k in 0..=a {
                let w = binomial(a, k) as f64 / 2f64.powi(a as i32);
                let term = x_pows[k as usize]
                    .operator_product(&p_pows[b as usize])
                    .operator_product(&x_pows[(a - k) as usize]);
                acc = acc.plus(&term.scaled(C64::new(w, 0.0)));
            }
            acc
        };
        out = out.plus(&op.scaled(C64::new(t.coeff, 0.0)));
    }
    Ok(out.pruned())
}

impl NormalOrderedHamiltonian {
    /// Drops entries that are pure rounding residue relative to the largest one.
    fn pruned(mut self) -> Self {
        let tol = 1e-15 * self.scale();
        self.coeffs.retain(|_, c| c.norm() > tol);
        // imaginary parts left over from i·(−i) products of real operators
        for c in self.coeffs.values_mut() {
            if c.im.abs() <= tol {
                c.im = 0.0;
            }
            if c.re.abs() <= tol {
                c.re = 0.0;
            }
        }
        self
    }
}
