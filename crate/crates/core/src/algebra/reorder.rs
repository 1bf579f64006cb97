//! Combinatorial coefficients for swapping powers of two symbols obeying
//! `XD = DX − 1`:
//!
//! ```text
//! X^i D^j = Σ_{k=0}^{min(i,j)} r(i,j,k) D^{j−k} X^{i−k},
//! r(i,j,k) = (−1)^k i! j! / (k! (i−k)! (j−k)!)
//! ```

use std::collections::BTreeMap;

use crate::error::{Error, Result};

/// Largest power accepted by the exact integer routines.
pub const POWER_CAP: u32 = 32;

/// Binomial coefficient with exact 128-bit arithmetic.
pub fn binomial(n: u32, k: u32) -> i128 {
    if k > n {
        return 0;
    }
    let k = k.min(n - k);
    let mut acc: i128 = 1;
    for t in 0..k {
        // exact at every step: acc * (n - t) is divisible by (t + 1)
        acc = acc * (n - t) as i128 / (t + 1) as i128;
    }
    acc
}

/// n (n−1) ⋯ (n−k+1); zero when k > n.
pub fn falling_factorial(n: u32, k: u32) -> i128 {
    if k > n {
        return 0;
    }
    (0..k).fold(1i128, |acc, t| acc * (n - t) as i128)
}

pub fn factorial(n: u32) -> i128 {
    falling_factorial(n, n)
}

/// The reordering coefficient r(i, j, k).
pub fn r_coefficient(i: u32, j: u32, k: u32) -> Result<i128> {
    if k > i.min(j) {
        return Err(Error::Argument(format!("k = {k} exceeds min(i, j) = {}", i.min(j))));
    }
    if i > POWER_CAP || j > POWER_CAP {
        return Err(Error::Capacity(format!(
            "powers ({i}, {j}) exceed the cap of {POWER_CAP}"
        )));
    }
    let magnitude = binomial(i, k)
        .checked_mul(binomial(j, k))
        .and_then(|v| v.checked_mul(factorial(k)))
        .ok_or_else(|| Error::Capacity(format!("r({i}, {j}, {k}) overflows i128")))?;
    Ok(if k.is_multiple_of(2) { magnitude } else { -magnitude })
}

/// Full expansion of X^i D^j as `(power of D, power of X, coefficient)`.
pub fn reorder_expansion(i: u32, j: u32) -> Result<Vec<(u32, u32, i128)>> {
    (0..=i.min(j))
        .map(|k| Ok((j - k, i - k, r_coefficient(i, j, k)?)))
        .collect()
}

/// Brute-force expansion by rewriting words over {X, D} with XD → DX − 1
/// until every D sits left of every X.
pub fn commutation_oracle(i: usize, j: usize) -> BTreeMap<(u32, u32), i128> {
    let mut pending: Vec<(Vec<bool>, i128)> = vec![(
        std::iter::repeat_n(false, i).chain(std::iter::repeat_n(true, j)).collect(),
        1,
    )];
    let mut out = BTreeMap::new();
    // false = X, true = D
    while let Some((word, c)) = pending.pop() {
        match word.windows(2).position(|w| !w[0] && w[1]) {
            Some(pos) => {
                let mut swapped = word.clone();
                swapped.swap(pos, pos + 1);
                pending.push((swapped, c));
                let mut dropped = word;
                dropped.drain(pos..pos + 2);
                pending.push((dropped, -c));
            }
            None => {
                let d = word.iter().filter(|&&s| s).count() as u32;
                let x = word.len() as u32 - d;
                *out.entry((d, x)).or_insert(0) += c;
            }
        }
    }
    out.retain(|_, v| *v != 0);
    out
}
