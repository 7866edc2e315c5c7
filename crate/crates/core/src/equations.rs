//! Hessian equations `c_n sigma_{n+1}(H) + ... + c_0 sigma_1(H) + c_{-1} = 0`,
//! the recursion `c_{k-1} = a_1 c_k - a_0 c_{k+1}` and its classification.

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::symfun::{elem_sym_all, poly_eval};

/// Coefficients `(c_{-1}, c_0, ..., c_n)` of a constant-coefficient Hessian equation.
///
/// `F = sum_{k=0}^n c_k sigma_k(p)` and `G = sum_{k=0}^n c_{k-1} sigma_k(p)`.
#[derive(Debug, Clone, PartialEq)]
pub struct HessianCoefficients {
    c_m1: f64,
    c: Vec<f64>,
}

impl HessianCoefficients {
    /// `c` holds `c_0..=c_n`, so `n = c.len() - 1 >= 1`.
    pub fn new(c_m1: f64, c: Vec<f64>) -> Result<Self> {
        if c.len() < 2 {
            return Err(Error::InvalidInput("need at least c_0 and c_1 (n >= 1)".into()));
        }
        if !c_m1.is_finite() || c.iter().any(|v| !v.is_finite()) {
            return Err(Error::InvalidInput("coefficients must be finite".into()));
        }
        if c.iter().all(|&v| v == 0.0) {
            return Err(Error::ZeroPolynomial);
        }
        Ok(Self { c_m1, c })
    }

    pub fn n(&self) -> usize {
        self.c.len() - 1
    }

    pub fn c_m1(&self) -> f64 {
        self.c_m1
    }

    /// `c_0..=c_n`, the coefficients of F.
    pub fn f_coeffs(&self) -> &[f64] {
        &self.c
    }

    /// Coefficients of G in the same layout as F: `(c_{-1}, c_0, ..., c_{n-1})`.
    pub fn g_coeffs(&self) -> Vec<f64> {
        let mut g = Vec::with_capacity(self.c.len());
        g.push(self.c_m1);
        g.extend_from_slice(&self.c[..self.c.len() - 1]);
        g
    }

    /// Coefficient `c_k` for `k = -1..=n`.
    pub fn coeff(&self, k: isize) -> f64 {
        match k {
            -1 => self.c_m1,
            k if k >= 0 && (k as usize) < self.c.len() => self.c[k as usize],
            _ => 0.0,
        }
    }

    pub fn max_abs(&self) -> f64 {
        self.c.iter().fold(self.c_m1.abs(), |m, v| m.max(v.abs()))
    }

    /// Same equation with every coefficient multiplied by `factor`.
    pub fn scaled(&self, factor: f64) -> Result<Self> {
        Self::new(self.c_m1 * factor, self.c.iter().map(|v| v * factor).collect())
    }

    /// F(p) and its gradient.
    pub fn f_eval(&self, p: &[f64]) -> Result<(f64, Vec<f64>)> {
        poly_eval(&self.c, p)
    }

    /// G(p).
    pub fn g_value(&self, p: &[f64]) -> f64 {
        let sig = elem_sym_all(p);
        self.g_coeffs().iter().zip(sig).map(|(a, b)| a * b).sum()
    }
}

/// Which branch of the factorization applies.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum RecursiveCase {
    DistinctRoots,
    RepeatedNonzeroRoot,
    RepeatedZeroRoot,
}

/// Recursive type `(a_0, a_1)` together with the two top coefficients that
/// seed the recursion.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct RecursiveSpec {
    pub n: usize,
    pub a0: f64,
    pub a1: f64,
    pub c_nm1: f64,
    pub c_n: f64,
}

/// Factored form of a recursive-type F.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Factorization {
    /// `A prod (p_j + r1) + B prod (p_j + r2)` with real, distinct roots.
    DistinctReal { r1: f64, r2: f64, a: f64, b: f64 },
    /// Conjugate roots `r1, conj(r1)` and `B = conj(A)`, so `F = 2 Re(A prod (p_j + r1))`.
    ComplexPair { r1: Complex64, a: Complex64 },
    /// `A prod (p_j + u) + B u d/du prod (p_j + u)`.
    Repeated { u: f64, a: f64, b: f64 },
    /// `c_n sigma_n + c_{n-1} sigma_{n-1}`.
    Monomial { c_nm1: f64, c_n: f64 },
}

impl Factorization {
    pub fn case(&self) -> RecursiveCase {
        match self {
            Self::DistinctReal { .. } | Self::ComplexPair { .. } => RecursiveCase::DistinctRoots,
            Self::Repeated { .. } => RecursiveCase::RepeatedNonzeroRoot,
            Self::Monomial { .. } => RecursiveCase::RepeatedZeroRoot,
        }
    }

    /// The pair (A, B) as complex numbers (zero for the monomial case).
    pub fn ab(&self) -> (Complex64, Complex64) {
        match *self {
            Self::DistinctReal { a, b, .. } | Self::Repeated { a, b, .. } => (a.into(), b.into()),
            Self::ComplexPair { a, .. } => (a, a.conj()),
            Self::Monomial { .. } => (Complex64::new(0.0, 0.0), Complex64::new(0.0, 0.0)),
        }
    }

    /// Coefficients `c_0..=c_n` obtained by expanding the factored form.
    pub fn expand(&self, n: usize) -> Vec<f64> {
        (0..=n)
            .map(|k| {
                let m = (n - k) as i32;
                match *self {
                    Self::DistinctReal { r1, r2, a, b } => a * r1.powi(m) + b * r2.powi(m),
                    Self::ComplexPair { r1, a } => 2.0 * (a * r1.powi(m)).re,
                    Self::Repeated { u, a, b } => (a + b * m as f64) * u.powi(m),
                    Self::Monomial { c_nm1, c_n } => match m {
                        0 => c_n,
                        1 => c_nm1,
                        _ => 0.0,
                    },
                }
            })
            .collect()
    }

    /// F(p) evaluated through the product form.
    pub fn evaluate(&self, p: &[f64]) -> f64 {
        match *self {
            Self::DistinctReal { r1, r2, a, b } => {
                a * p.iter().map(|x| x + r1).product::<f64>()
                    + b * p.iter().map(|x| x + r2).product::<f64>()
            }
            Self::ComplexPair { r1, a } => {
                2.0 * (a * p.iter().map(|&x| r1 + x).product::<Complex64>()).re
            }
            Self::Repeated { u, a, b } => {
                let prod: f64 = p.iter().map(|x| x + u).product();
                // u d/du prod(p_j + u) = u * sum_i prod_{j != i}(p_j + u)
                let dprod: f64 = (0..p.len())
                    .map(|i| {
                        p.iter()
                            .enumerate()
                            .filter(|&(j, _)| j != i)
                            .map(|(_, x)| x + u)
                            .product::<f64>()
                    })
                    .sum();
                a * prod + b * u * dprod
            }
            Self::Monomial { c_nm1, c_n } => {
                let s = elem_sym_all(p);
                let n = p.len();
                c_n * s[n] + c_nm1 * s[n - 1]
            }
        }
    }
}

impl RecursiveSpec {
    pub fn new(n: usize, a0: f64, a1: f64, c_nm1: f64, c_n: f64) -> Result<Self> {
        if n == 0 {
            return Err(Error::InvalidInput("n must be at least 1".into()));
        }
        if ![a0, a1, c_nm1, c_n].iter().all(|v| v.is_finite()) {
            return Err(Error::InvalidInput("recursive parameters must be finite".into()));
        }
        Ok(Self { n, a0, a1, c_nm1, c_n })
    }

    pub fn discriminant(&self) -> f64 {
        self.a1 * self.a1 - 4.0 * self.a0
    }

    /// `c_{n-1}^2 - a_1 c_{n-1} c_n + a_0 c_n^2`.
    pub fn top_form(&self) -> f64 {
        self.c_nm1 * self.c_nm1 - self.a1 * self.c_nm1 * self.c_n + self.a0 * self.c_n * self.c_n
    }

    /// `q(x) = x^2 + a_1 x + a_0`.
    pub fn q(&self, x: f64) -> f64 {
        x * x + self.a1 * x + self.a0
    }

    pub fn dq(&self, x: f64) -> f64 {
        2.0 * x + self.a1
    }

    fn is_repeated(&self) -> bool {
        let d = self.discriminant();
        d.abs() <= 1e-12 * (self.a1 * self.a1 + 4.0 * self.a0.abs())
    }

    /// Roots of `r^2 - a_1 r + a_0 = 0`.
    pub fn roots(&self) -> (Complex64, Complex64) {
        if self.is_repeated() {
            let u = Complex64::new(0.5 * self.a1, 0.0);
            return (u, u);
        }
        let d = self.discriminant();
        if d > 0.0 {
            let big = 0.5 * (self.a1 + self.a1.signum() * d.sqrt());
            let big = if self.a1 == 0.0 { 0.5 * d.sqrt() } else { big };
            let small = self.a0 / big;
            (Complex64::new(big, 0.0), Complex64::new(small, 0.0))
        } else {
            let r = Complex64::new(0.5 * self.a1, 0.5 * (-d).sqrt());
            (r, r.conj())
        }
    }

    pub fn case(&self) -> RecursiveCase {
        self.classify().case()
    }

    /// Coefficients `c_0..=c_n` generated downward from `c_n, c_{n-1}`.
    pub fn coefficients(&self) -> Vec<f64> {
        let n = self.n;
        let mut c = vec![0.0; n + 1];
        c[n] = self.c_n;
        c[n - 1] = self.c_nm1;
        for k in (1..n).rev() {
            c[k - 1] = self.a1 * c[k] - self.a0 * c[k + 1];
        }
        c
    }

    /// The equation with these coefficients and the free constant `c_m1`.
    pub fn build(&self, c_m1: f64) -> Result<HessianCoefficients> {
        HessianCoefficients::new(c_m1, self.coefficients())
    }

    /// The factored form of F.
    pub fn classify(&self) -> Factorization {
        let (c_nm1, c_n) = (self.c_nm1, self.c_n);
        if self.is_repeated() {
            let u = 0.5 * self.a1;
            if u == 0.0 {
                return Factorization::Monomial { c_nm1, c_n };
            }
            return Factorization::Repeated { u, a: c_n, b: c_nm1 / u - c_n };
        }
        let (r1, r2) = self.roots();
        let a = (c_nm1 - c_n * r2) / (r1 - r2);
        if r1.im != 0.0 {
            Factorization::ComplexPair { r1, a }
        } else {
            let b = -(c_nm1 - c_n * r1) / (r1 - r2);
            Factorization::DistinctReal { r1: r1.re, r2: r2.re, a: a.re, b: b.re }
        }
    }
}

/// Outcome of searching for a recursion among given coefficients.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum Recursion {
    Unique { a0: f64, a1: f64, residual: f64 },
    /// A `dimension`-parameter family; `(a0, a1)` is its minimum-norm member.
    Family { a0: f64, a1: f64, dimension: usize, residual: f64 },
    NotRecursive { residual: f64 },
}

impl Recursion {
    pub fn pair(&self) -> Option<(f64, f64)> {
        match *self {
            Self::Unique { a0, a1, .. } | Self::Family { a0, a1, .. } => Some((a0, a1)),
            Self::NotRecursive { .. } => None,
        }
    }
}

/// Least-squares solve of `c_{k-1} = a_1 c_k - a_0 c_{k+1}` for `k = 1..n-1`.
///
/// The two-column system is orthogonalized with a single one-sided Jacobi
/// rotation; rank is decided by singular values `>= 1e-12 sigma_max` and
/// consistency by a max-norm residual below `1e-9 ||c||_inf`.
pub fn detect_recursive(h: &HessianCoefficients) -> Result<Recursion> {
    recursion_of(h.f_coeffs())
}

/// [`detect_recursive`] on a bare coefficient list `c_0..=c_n`.
pub fn recursion_of(c: &[f64]) -> Result<Recursion> {
    let n = c.len() - 1;
    if n < 2 {
        return Err(Error::Underdetermined(n));
    }
    let col0: Vec<f64> = (1..n).map(|k| -c[k + 1]).collect();
    let col1: Vec<f64> = (1..n).map(|k| c[k]).collect();
    let rhs: Vec<f64> = (1..n).map(|k| c[k - 1]).collect();
    let dot = |x: &[f64], y: &[f64]| x.iter().zip(y).map(|(a, b)| a * b).sum::<f64>();

    let (alpha, beta, gamma) = (dot(&col0, &col0), dot(&col1, &col1), dot(&col0, &col1));
    let (cs, sn) = if gamma != 0.0 {
        let zeta = (beta - alpha) / (2.0 * gamma);
        let t = zeta.signum() / (zeta.abs() + (1.0 + zeta * zeta).sqrt());
        let cs = 1.0 / (1.0 + t * t).sqrt();
        (cs, cs * t)
    } else {
        (1.0, 0.0)
    };
    let u1: Vec<f64> = col0.iter().zip(&col1).map(|(a, b)| cs * a - sn * b).collect();
    let u2: Vec<f64> = col0.iter().zip(&col1).map(|(a, b)| sn * a + cs * b).collect();
    let basis = [(u1, [cs, -sn]), (u2, [sn, cs])];
    let sig: Vec<f64> = basis.iter().map(|(u, _)| dot(u, u).sqrt()).collect();
    let smax = sig.iter().copied().fold(0.0, f64::max);

    let mut x = [0.0, 0.0];
    let mut rank = 0;
    for ((u, v), &s) in basis.iter().zip(&sig) {
        if smax > 0.0 && s >= 1e-12 * smax {
            rank += 1;
            let coef = dot(u, &rhs) / (s * s);
            x[0] += coef * v[0];
            x[1] += coef * v[1];
        }
    }
    let residual = (0..n - 1)
        .map(|j| (col0[j] * x[0] + col1[j] * x[1] - rhs[j]).abs())
        .fold(0.0, f64::max);
    let scale = c.iter().fold(0.0_f64, |m, v| m.max(v.abs()));
    if residual >= 1e-9 * scale {
        return Ok(Recursion::NotRecursive { residual });
    }
    Ok(if rank == 2 {
        Recursion::Unique { a0: x[0], a1: x[1], residual }
    } else {
        Recursion::Family { a0: x[0], a1: x[1], dimension: 2 - rank, residual }
    })
}

/// Both sides of the quadratic structure identity at one point, plus the
/// intermediate linear identity it is derived from.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct StructureIdentity {
    /// `q'(p_i) F - 2 q(p_i) dF/dp_i`
    pub linear_lhs: f64,
    /// `-a_1 F + 2 sum_k c~_{k-1} sigma_k` with `c~_{-1} = a_1 c_0 - a_0 c_1`
    pub linear_rhs: f64,
    /// `(a_1^2 - 4 a_0) F^2 + 4 (c_{n-1}^2 - a_1 c_{n-1} c_n + a_0 c_n^2) prod q(p_j)`
    pub quadratic_rhs: f64,
}

impl StructureIdentity {
    pub fn residual(&self) -> f64 {
        self.linear_lhs * self.linear_lhs - self.quadratic_rhs
    }

    /// Magnitude used to scale [`Self::residual`].
    pub fn scale(&self, spec: &RecursiveSpec, f: f64, prod_q: f64) -> f64 {
        self.linear_lhs * self.linear_lhs
            + (spec.discriminant() * f * f).abs()
            + (4.0 * spec.top_form() * prod_q).abs()
    }

    pub fn linear_residual(&self) -> f64 {
        self.linear_lhs - self.linear_rhs
    }
}

/// Evaluates the structure identity for `spec` at `p`, coordinate `i`.
pub fn quadratic_identity(spec: &RecursiveSpec, p: &[f64], i: usize) -> Result<StructureIdentity> {
    if p.len() != spec.n {
        return Err(Error::InvalidInput(format!("expected {} values, got {}", spec.n, p.len())));
    }
    if i >= p.len() {
        return Err(Error::InvalidIndex { index: i, len: p.len() });
    }
    let c = spec.coefficients();
    let (f, grad) = poly_eval(&c, p)?;
    let linear_lhs = spec.dq(p[i]) * f - 2.0 * spec.q(p[i]) * grad[i];

    // Shifted list c~_{k-1}, k = 0..n, with the proof-local c~_{-1}.
    let c_tilde_m1 = spec.a1 * c[0] - spec.a0 * c[1];
    let sig = elem_sym_all(p);
    let shifted: f64 = sig
        .iter()
        .enumerate()
        .map(|(k, s)| if k == 0 { c_tilde_m1 * s } else { c[k - 1] * s })
        .sum();
    let linear_rhs = -spec.a1 * f + 2.0 * shifted;

    let prod_q: f64 = p.iter().map(|&x| spec.q(x)).product();
    let quadratic_rhs = spec.discriminant() * f * f + 4.0 * spec.top_form() * prod_q;
    Ok(StructureIdentity { linear_lhs, linear_rhs, quadratic_rhs })
}

/// Residual of the quadratic identity divided by its natural scale.
pub fn quadratic_identity_residual(spec: &RecursiveSpec, p: &[f64], i: usize) -> Result<(f64, f64)> {
    let id = quadratic_identity(spec, p, i)?;
    let f = poly_eval(&spec.coefficients(), p)?.0;
    let prod_q: f64 = p.iter().map(|&x| spec.q(x)).product();
    let scale = id.scale(spec, f, prod_q).max(f64::MIN_POSITIVE);
    let lin_scale = id.linear_lhs.abs() + id.linear_rhs.abs() + f64::MIN_POSITIVE;
    Ok((id.residual() / scale, id.linear_residual() / lin_scale))
}

/// Recursive form of an equation file.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct RecursiveFile {
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub n: Option<usize>,
    pub a0: f64,
    pub a1: f64,
    pub c_nm1: f64,
    pub c_n: f64,
    #[serde(default)]
    pub c_m1: f64,
}

/// On-disk equation description, either raw coefficients
/// `{"n": 2, "c": [c_-1, c_0, ..., c_n]}` or
/// `{"n": 2, "recursive": {"a0": .., "a1": .., "c_nm1": .., "c_n": .., "c_m1": ..}}`;
/// in the recursive form `n` may also sit inside the `recursive` object.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum EquationFile {
    Raw { n: usize, c: Vec<f64> },
    Recursive {
        #[serde(default, skip_serializing_if = "Option::is_none")]
        n: Option<usize>,
        recursive: RecursiveFile,
    },
}

impl EquationFile {
    pub fn from_json(text: &str) -> std::result::Result<Self, serde_json::Error> {
        serde_json::from_str(text)
    }

    pub fn coefficients(&self) -> Result<HessianCoefficients> {
        match self {
            Self::Raw { n, c } => {
                if c.len() != n + 2 {
                    return Err(Error::InvalidInput(format!(
                        "n = {n} needs {} coefficients c_-1..c_n, got {}",
                        n + 2,
                        c.len()
                    )));
                }
                HessianCoefficients::new(c[0], c[1..].to_vec())
            }
            Self::Recursive { recursive: r, .. } => self.recursive_spec()?.build(r.c_m1),
        }
    }

    /// The recursive spec of the recursive form; `None` for raw coefficients.
    pub fn recursive_spec(&self) -> Result<RecursiveSpec> {
        match self {
            Self::Recursive { n, recursive: r } => {
                let n = n.or(r.n).ok_or_else(|| Error::InvalidInput("recursive form needs n".into()))?;
                RecursiveSpec::new(n, r.a0, r.a1, r.c_nm1, r.c_n)
            }
            Self::Raw { .. } => Err(Error::NotApplicable("raw coefficient form".into())),
        }
    }
}

/// Recursive spec of an equation, if it has one with a unique or canonical `(a0, a1)`.
pub fn spec_of(h: &HessianCoefficients) -> Option<RecursiveSpec> {
    let n = h.n();
    let c = h.f_coeffs();
    let (a0, a1) = if n == 1 { (0.0, 0.0) } else { detect_recursive(h).ok()?.pair()? };
    RecursiveSpec::new(n, a0, a1, c[n - 1], c[n]).ok()
}

#[cfg(test)]
mod tests {
    use super::*;

    fn close(a: f64, b: f64, tol: f64) -> bool {
        (a - b).abs() <= tol * (1.0 + b.abs())
    }

    #[test]
    fn build_examples() {
        let s = RecursiveSpec::new(2, 1.0, 0.0, 0.0, -1.0).unwrap();
        assert_eq!(s.coefficients(), vec![1.0, 0.0, -1.0]);
        let s = RecursiveSpec::new(3, 0.0, 0.0, 1.0, 1.0).unwrap();
        assert_eq!(s.coefficients(), vec![0.0, 0.0, 1.0, 1.0]);
        let s = RecursiveSpec::new(3, 1.0, 2.0, 3.0, 1.0).unwrap();
        assert_eq!(s.coefficients(), vec![7.0, 5.0, 3.0, 1.0]);
        assert_eq!(s.build(0.0).unwrap().c_m1(), 0.0);
        let zero = RecursiveSpec::new(3, 1.0, 2.0, 0.0, 0.0).unwrap();
        assert_eq!(zero.build(1.0), Err(Error::ZeroPolynomial));
    }

    #[test]
    fn detect_examples() {
        let h = HessianCoefficients::new(0.0, vec![1.0, 0.0, -1.0]).unwrap();
        match detect_recursive(&h).unwrap() {
            Recursion::Family { a0, a1, dimension, .. } => {
                assert_eq!((a0, a1, dimension), (1.0, 0.0, 1));
            }
            other => panic!("{other:?}"),
        }
        let h = HessianCoefficients::new(0.0, vec![0.0, 0.0, 1.0, 1.0]).unwrap();
        match detect_recursive(&h).unwrap() {
            Recursion::Unique { a0, a1, .. } => assert!(a0.abs() < 1e-15 && a1.abs() < 1e-15),
            other => panic!("{other:?}"),
        }
        let h = HessianCoefficients::new(0.0, vec![1.0, 0.0, 0.0, 1.0]).unwrap();
        assert!(matches!(detect_recursive(&h).unwrap(), Recursion::NotRecursive { .. }));
        let h = HessianCoefficients::new(0.0, vec![1.0, 2.0, 3.0, 1.0]).unwrap();
        match detect_recursive(&h).unwrap() {
            Recursion::Unique { a0, a1, .. } => {
                assert!(close(a0, 1.0 / 7.0, 1e-14) && close(a1, 5.0 / 7.0, 1e-14));
            }
            other => panic!("{other:?}"),
        }
        let h = HessianCoefficients::new(0.0, vec![1.0, 2.0]).unwrap();
        assert_eq!(detect_recursive(&h), Err(Error::Underdetermined(1)));
    }

    #[test]
    fn classify_examples() {
        let s = RecursiveSpec::new(2, 1.0, 0.0, 0.0, -1.0).unwrap();
        let f = s.classify();
        assert_eq!(f.case(), RecursiveCase::DistinctRoots);
        let (r1, r2) = s.roots();
        assert!((r1 - Complex64::i()).norm() < 1e-15 && (r2 + Complex64::i()).norm() < 1e-15);
        let (a, b) = f.ab();
        assert!((a - Complex64::new(-0.5, 0.0)).norm() < 1e-15);
        assert!((b - Complex64::new(-0.5, 0.0)).norm() < 1e-15);
        assert_eq!(f.expand(2), vec![1.0, 0.0, -1.0]);

        // Repeated root u = 1 with c_{n-1} = c_n u gives B = 0 and F = prod (p_j + 1).
        let s = RecursiveSpec::new(2, 1.0, 2.0, 1.0, 1.0).unwrap();
        let f = s.classify();
        assert_eq!(f, Factorization::Repeated { u: 1.0, a: 1.0, b: 0.0 });
        assert_eq!(f.expand(2), s.coefficients());
        assert_eq!(s.coefficients(), vec![1.0, 1.0, 1.0]);
        assert!(close(f.evaluate(&[0.5, 2.0]), 1.5 * 3.0, 1e-15));

        let s = RecursiveSpec::new(3, 0.0, 0.0, 5.0, 2.0).unwrap();
        assert_eq!(s.classify(), Factorization::Monomial { c_nm1: 5.0, c_n: 2.0 });
        assert_eq!(s.classify().expand(3), vec![0.0, 0.0, 5.0, 2.0]);
    }

    #[test]
    fn g_polynomial_examples() {
        let h = HessianCoefficients::new(0.0, vec![1.0, 0.0, -1.0]).unwrap();
        assert_eq!(h.g_coeffs(), vec![0.0, 1.0, 0.0]);
        assert_eq!(h.g_value(&[1.5, 2.0]), 3.5);
        let h = HessianCoefficients::new(0.0, vec![0.0, 0.0, 0.0, 1.0]).unwrap();
        assert_eq!(h.g_coeffs(), vec![0.0; 4]);
        let h = HessianCoefficients::new(3.0, vec![4.0, 5.0]).unwrap();
        assert_eq!(h.g_coeffs(), vec![3.0, 4.0]);
        assert_eq!(h.g_value(&[2.0]), 11.0);
    }

    #[test]
    fn structure_identity_examples() {
        let s = RecursiveSpec::new(2, 1.0, 0.0, 0.0, -1.0).unwrap();
        let id = quadratic_identity(&s, &[1.0, 2.0], 0).unwrap();
        assert!(close(id.linear_lhs * id.linear_lhs, 36.0, 1e-14));
        assert!(close(id.quadratic_rhs, 36.0, 1e-14));
        assert!(id.linear_residual().abs() < 1e-14);

        // Double root of q at p_i = -1 (a1 = 2, a0 = 1): q(p_i) = q'(p_i) = 0.
        let s = RecursiveSpec::new(3, 1.0, 2.0, 0.7, -1.3).unwrap();
        let id = quadratic_identity(&s, &[-1.0, 0.4, 2.0], 0).unwrap();
        assert!(id.linear_lhs.abs() < 1e-14 && id.residual().abs() < 1e-13);

        let s = RecursiveSpec::new(3, 0.0, 0.0, 0.0, 1.0).unwrap();
        let id = quadratic_identity(&s, &[1.0, 1.0, 1.0], 2).unwrap();
        assert_eq!((id.linear_lhs, id.quadratic_rhs), (0.0, 0.0));
    }

    #[test]
    fn equation_files() {
        let f = EquationFile::from_json(r#"{"n": 2, "c": [0, 1, 0, -1]}"#).unwrap();
        let h = f.coefficients().unwrap();
        assert_eq!((h.c_m1(), h.f_coeffs().to_vec()), (0.0, vec![1.0, 0.0, -1.0]));
        let f = EquationFile::from_json(
            r#"{"n": 3, "recursive": {"a0": 1, "a1": 2, "c_nm1": 3, "c_n": 1, "c_m1": 0.5}}"#,
        )
        .unwrap();
        let h = f.coefficients().unwrap();
        assert_eq!(h.f_coeffs(), &[7.0, 5.0, 3.0, 1.0]);
        assert_eq!(h.c_m1(), 0.5);
        let g = EquationFile::from_json(r#"{"recursive": {"n": 3, "a0": 1, "a1": 2, "c_nm1": 3, "c_n": 1}}"#).unwrap();
        assert_eq!(g.coefficients().unwrap().f_coeffs(), &[7.0, 5.0, 3.0, 1.0]);
        let g = EquationFile::from_json(r#"{"recursive": {"a0": 1, "a1": 2, "c_nm1": 3, "c_n": 1}}"#).unwrap();
        assert!(matches!(g.coefficients(), Err(Error::InvalidInput(_))));
        assert!(EquationFile::from_json(r#"{"n": 2, "c": [0, 1]}"#).unwrap().coefficients().is_err());
        assert!(EquationFile::from_json("{").is_err());
    }
}
