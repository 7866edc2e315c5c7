//! Hermitian arrowhead matrices
//!
//! ```text
//! [ P_1            Q_1 ]
//! [      ...       ... ]
//! [           P_n  Q_n ]
//! [ Q_1* ...  Q_n*  R  ]
//! ```
//!
//! which is the shape of every Hessian produced by the ansatz.

use num_complex::Complex64;

use crate::error::{Error, Result};
use crate::poly;
use crate::symfun::{elem_sym_all, elem_sym_excl_all};

#[derive(Debug, Clone, PartialEq)]
pub struct ArrowheadMatrix {
    pub p: Vec<f64>,
    pub q: Vec<Complex64>,
    pub r: f64,
}

impl ArrowheadMatrix {
    pub fn new(p: Vec<f64>, q: Vec<Complex64>, r: f64) -> Result<Self> {
        if p.len() != q.len() {
            return Err(Error::InvalidInput(format!(
                "diagonal has {} entries but border has {}",
                p.len(),
                q.len()
            )));
        }
        Ok(Self { p, q, r })
    }

    /// Arrowhead with a real border.
    pub fn real(p: Vec<f64>, q: Vec<f64>, r: f64) -> Result<Self> {
        Self::new(p, q.into_iter().map(|v| Complex64::new(v, 0.0)).collect(), r)
    }

    /// Number of diagonal entries before the corner; the matrix is `(n+1) x (n+1)`.
    pub fn n(&self) -> usize {
        self.p.len()
    }

    fn weights(&self) -> Vec<f64> {
        self.q.iter().map(|z| z.norm_sqr()).collect()
    }

    /// Ascending coefficients of `det(lambda I - H)`, expanded along the
    /// bordering column:
    /// `prod (lambda - P_j)(lambda - R) - sum_i |Q_i|^2 prod_{j != i}(lambda - P_j)`.
    pub fn char_poly(&self) -> Vec<f64> {
        let n = self.n();
        let base = poly::from_roots(&self.p);
        let mut out = poly::mul(&base, &[-self.r, 1.0]);
        for (i, w) in self.weights().into_iter().enumerate() {
            if w == 0.0 {
                continue;
            }
            let others: Vec<f64> =
                self.p.iter().enumerate().filter(|&(j, _)| j != i).map(|(_, &v)| v).collect();
            let minor = poly::from_roots(&others);
            for (k, c) in minor.iter().enumerate() {
                out[k] -= w * c;
            }
        }
        debug_assert_eq!(out.len(), n + 2);
        out
    }

    /// `sigma_0(H), ..., sigma_{n+1}(H)` of the eigenvalues, without solving for them:
    /// `sigma_k(H) = sigma_k(P) + R sigma_{k-1}(P) - sum_i |Q_i|^2 sigma_{k-2}(P|i)`.
    pub fn sigmas(&self) -> Vec<f64> {
        let n = self.n();
        let sp = elem_sym_all(&self.p);
        let mut out = vec![0.0; n + 2];
        for k in 0..=n {
            out[k] += sp[k];
            out[k + 1] += self.r * sp[k];
        }
        for (i, w) in self.weights().into_iter().enumerate() {
            if w == 0.0 {
                continue;
            }
            let ex = elem_sym_excl_all(&self.p, i).expect("index in range");
            for (k, e) in ex.iter().enumerate() {
                out[k + 2] -= w * e;
            }
        }
        out
    }

    /// `sigma_k(H)` for `0 <= k <= n+1`, zero otherwise.
    pub fn sigma(&self, k: isize) -> f64 {
        if k < 0 || k as usize > self.n() + 1 {
            return 0.0;
        }
        self.sigmas()[k as usize]
    }

    /// Eigenvalues in increasing order, from the secular equation
    /// `lambda - R = sum |Q_i|^2 / (lambda - P_i)` after deflation.
    pub fn eigenvalues(&self) -> Vec<f64> {
        let w = self.weights();
        let scale = self
            .p
            .iter()
            .chain(std::iter::once(&self.r))
            .map(|v| v.abs())
            .chain(w.iter().map(|v| v.sqrt()))
            .fold(0.0, f64::max);
        let pole_tol = 8.0 * f64::EPSILON * scale;
        let weight_tol = (f64::EPSILON * scale).powi(2);

        let mut order: Vec<usize> = (0..self.n()).collect();
        order.sort_by(|&a, &b| self.p[a].total_cmp(&self.p[b]));

        let mut eig = Vec::with_capacity(self.n() + 1);
        let mut poles: Vec<(f64, f64)> = Vec::new();
        for &i in &order {
            let (d, wi) = (self.p[i], w[i]);
            if wi <= weight_tol {
                eig.push(d);
                continue;
            }
            match poles.last_mut() {
                // Equal poles: one eigenvalue stays at d, the weights combine.
                Some(last) if (d - last.0).abs() <= pole_tol => {
                    eig.push(d);
                    last.1 += wi;
                }
                _ => poles.push((d, wi)),
            }
        }

        let radius: f64 = poles.iter().map(|(_, w)| w.sqrt()).sum::<f64>() + 1.0;
        let lo = poles.iter().map(|p| p.0).fold(self.r, f64::min) - radius;
        let hi = poles.iter().map(|p| p.0).fold(self.r, f64::max) + radius;
        let mut knots = Vec::with_capacity(poles.len() + 2);
        knots.push(lo);
        knots.extend(poles.iter().map(|p| p.0));
        knots.push(hi);
        for win in knots.windows(2) {
            eig.push(secular_root(&poles, self.r, win[0], win[1]));
        }
        eig.sort_by(f64::total_cmp);
        eig
    }

    /// `sum_j arctan(lambda_j)`.
    pub fn phase(&self) -> f64 {
        self.eigenvalues().iter().map(|l| l.atan()).sum()
    }

    /// Dense row-major copy, mainly for tests and diagnostics.
    pub fn to_dense(&self) -> Vec<Vec<Complex64>> {
        let m = self.n() + 1;
        let mut a = vec![vec![Complex64::new(0.0, 0.0); m]; m];
        for i in 0..self.n() {
            a[i][i] = self.p[i].into();
            a[i][m - 1] = self.q[i];
            a[m - 1][i] = self.q[i].conj();
        }
        a[m - 1][m - 1] = self.r.into();
        a
    }
}

// Root of the increasing function g(l) = l - R - sum w/(l - d) on (a, b),
// where g -> -inf at a and +inf at b (or a, b are outer bounds).
fn secular_root(poles: &[(f64, f64)], r: f64, mut a: f64, mut b: f64) -> f64 {
    let g = |l: f64| -> (f64, f64) {
        let mut v = l - r;
        let mut dv = 1.0;
        for &(d, w) in poles {
            let t = 1.0 / (l - d);
            v -= w * t;
            dv += w * t * t;
        }
        (v, dv)
    };
    let mut x = 0.5 * (a + b);
    for _ in 0..300 {
        let (v, dv) = g(x);
        if v == 0.0 {
            return x;
        }
        if v < 0.0 {
            a = x;
        } else {
            b = x;
        }
        let newton = x - v / dv;
        let next = if newton > a && newton < b { newton } else { 0.5 * (a + b) };
        if (next - x).abs() <= 2.0 * f64::EPSILON * x.abs().max(f64::MIN_POSITIVE)
            || b - a <= 2.0 * f64::EPSILON * a.abs().max(b.abs())
        {
            return next;
        }
        x = next;
    }
    x
}

/// Point data of the ansatz at one value of `s`.
#[derive(Debug, Clone, PartialEq, Default)]
pub struct AnsatzPoint {
    pub p: Vec<f64>,
    pub dp: Vec<f64>,
    pub ddp: Vec<f64>,
    /// First derivatives of the linear coefficients; empty means zero.
    pub dq: Vec<f64>,
    pub ddq: Vec<f64>,
    pub rpp: f64,
}

/// Hessian of the ansatz at `x`: `P = p`, `Q_j = x_j p'_j + q'_j` and
/// `R = sum_j (x_j^2 p''_j / 2 + q''_j x_j) + r''`.
pub fn assemble(pt: &AnsatzPoint, x: &[f64]) -> Result<ArrowheadMatrix> {
    let n = pt.p.len();
    let opt_ok = |v: &Vec<f64>| v.is_empty() || v.len() == n;
    if pt.dp.len() != n || pt.ddp.len() != n || x.len() != n || !opt_ok(&pt.dq) || !opt_ok(&pt.ddq) {
        return Err(Error::InvalidInput("inconsistent lengths in ansatz point".into()));
    }
    let at = |v: &Vec<f64>, j: usize| if v.is_empty() { 0.0 } else { v[j] };
    let q: Vec<f64> = (0..n).map(|j| x[j] * pt.dp[j] + at(&pt.dq, j)).collect();
    let r = (0..n).map(|j| 0.5 * x[j] * x[j] * pt.ddp[j] + at(&pt.ddq, j) * x[j]).sum::<f64>() + pt.rpp;
    ArrowheadMatrix::real(pt.p.clone(), q, r)
}
