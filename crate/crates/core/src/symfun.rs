//! Elementary symmetric polynomials and the linear combinations
//! `F(p) = sum_k c_k sigma_k(p)` built from them.
//!
//! Indices `i` into a tuple are zero-based throughout the crate.

use std::ops::Deref;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// An ordered tuple `(p_1, ..., p_n)` of finite reals, `n >= 1`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "Vec<f64>", into = "Vec<f64>")]
pub struct EigenTuple(Vec<f64>);

impl EigenTuple {
    pub fn new(values: Vec<f64>) -> Result<Self> {
        if values.is_empty() {
            return Err(Error::InvalidInput("eigen tuple must be non-empty".into()));
        }
        if values.iter().any(|v| !v.is_finite()) {
            return Err(Error::InvalidInput("eigen tuple entries must be finite".into()));
        }
        Ok(Self(values))
    }

    pub fn into_inner(self) -> Vec<f64> {
        self.0
    }
}

impl Deref for EigenTuple {
    type Target = [f64];
    fn deref(&self) -> &[f64] {
        &self.0
    }
}

impl TryFrom<Vec<f64>> for EigenTuple {
    type Error = Error;
    fn try_from(v: Vec<f64>) -> Result<Self> {
        Self::new(v)
    }
}

impl From<EigenTuple> for Vec<f64> {
    fn from(t: EigenTuple) -> Self {
        t.0
    }
}

/// All of `sigma_0, ..., sigma_n` in one sweep: the coefficients of
/// `prod_j (t + p_j) = sum_k t^(n-k) sigma_k`.
pub fn elem_sym_all(p: &[f64]) -> Vec<f64> {
    let mut e = vec![0.0; p.len() + 1];
    e[0] = 1.0;
    for (m, &x) in p.iter().enumerate() {
        for k in (1..=m + 1).rev() {
            e[k] += x * e[k - 1];
        }
    }
    e
}

/// `sigma_k(p)`, with `sigma_k = 0` for `k < 0` or `k > n`.
pub fn elem_sym(p: &[f64], k: isize) -> f64 {
    if k < 0 || k as usize > p.len() {
        return 0.0;
    }
    elem_sym_all(p)[k as usize]
}

/// `sigma_0(p|i), ..., sigma_{n-1}(p|i)`, the symmetric functions with `p_i` removed.
pub fn elem_sym_excl_all(p: &[f64], i: usize) -> Result<Vec<f64>> {
    if i >= p.len() {
        return Err(Error::InvalidIndex { index: i, len: p.len() });
    }
    let mut e = vec![0.0; p.len()];
    e[0] = 1.0;
    let mut m = 0;
    for (j, &x) in p.iter().enumerate() {
        if j == i {
            continue;
        }
        for k in (1..=m + 1).rev() {
            e[k] += x * e[k - 1];
        }
        m += 1;
    }
    Ok(e)
}

/// `sigma_k(p|i)`; zero for `k = -1` and `k >= n`.
pub fn elem_sym_excl(p: &[f64], k: isize, i: usize) -> Result<f64> {
    let e = elem_sym_excl_all(p, i)?;
    if k < 0 || k as usize >= p.len() {
        return Ok(0.0);
    }
    Ok(e[k as usize])
}

/// Value and gradient of `F(p) = sum_{k=0}^n c_k sigma_k(p)`.
///
/// The gradient uses `dF/dp_i = sum_k c_k sigma_{k-1}(p|i)`.
pub fn poly_eval(c: &[f64], p: &[f64]) -> Result<(f64, Vec<f64>)> {
    let n = p.len();
    if c.len() != n + 1 {
        return Err(Error::InvalidInput(format!(
            "expected {} coefficients for n = {n}, got {}",
            n + 1,
            c.len()
        )));
    }
    let sig = elem_sym_all(p);
    let value = c.iter().zip(&sig).map(|(a, b)| a * b).sum();
    let mut grad = Vec::with_capacity(n);
    for i in 0..n {
        let ex = elem_sym_excl_all(p, i)?;
        grad.push((1..=n).map(|k| c[k] * ex[k - 1]).sum());
    }
    Ok((value, grad))
}

/// Value of `sum_k c_k sigma_k(p)` without the gradient.
pub fn poly_value(c: &[f64], p: &[f64]) -> f64 {
    c.iter().zip(elem_sym_all(p)).map(|(a, b)| a * b).sum()
}
