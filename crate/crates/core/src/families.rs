//! Closed-form solution families, used as exact samplers and as oracles.
//!
//! Each family gives `p_j(s)`, linear coefficients `q_j(s)` and `r(s)` for
//! the complex potential `u = sum (2 p_j x_j^2 + 4 q_j x_j) + 4 r`, or equally
//! the real potential `f = sum (p_j x_j^2 / 2 + q_j x_j) + r`.

use serde::{Deserialize, Serialize};

use crate::arrowhead::AnsatzPoint;
use crate::error::{Error, Result};
use crate::ode::SystemState;

/// Everything the ansatz needs at one value of s.
#[derive(Debug, Clone, PartialEq, Default)]
pub struct AnsatzData {
    pub s: f64,
    pub p: Vec<f64>,
    pub dp: Vec<f64>,
    pub ddp: Vec<f64>,
    pub q: Vec<f64>,
    pub dq: Vec<f64>,
    pub ddq: Vec<f64>,
    pub r: f64,
    pub rp: f64,
    pub rpp: f64,
}

impl AnsatzData {
    pub fn point(&self) -> AnsatzPoint {
        AnsatzPoint {
            p: self.p.clone(),
            dp: self.dp.clone(),
            ddp: self.ddp.clone(),
            dq: self.dq.clone(),
            ddq: self.ddq.clone(),
            rpp: self.rpp,
        }
    }

    /// State of the first-order system; needs every `p_j' != 0`.
    pub fn state(&self) -> Result<SystemState> {
        if self.dp.contains(&0.0) {
            return Err(Error::NotApplicable("some p_j' vanishes identically".into()));
        }
        Ok(SystemState {
            s: self.s,
            p: self.p.clone(),
            big_r: self.dp.iter().map(|d| 1.0 / d).collect(),
            r: self.r,
            rprime: self.rp,
        })
    }
}

/// Anything that can produce ansatz data along s.
pub trait Sampler: Sync {
    fn n(&self) -> usize;
    fn at(&self, s: f64) -> Result<AnsatzData>;
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum Variant {
    N2Hyperbolic,
    N2Trig,
    HighDimLinear,
    SubcriticalEntire,
    BoxedExample,
}

/// On-disk family description.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FamilySpec {
    pub variant: Variant,
    pub n: usize,
    #[serde(default = "one")]
    pub alpha: f64,
    #[serde(default = "one")]
    pub beta: f64,
    #[serde(default)]
    pub psi: Vec<f64>,
    #[serde(default)]
    pub gamma: Vec<f64>,
    /// Phase for the boxed example; ignored (derived) otherwise.
    #[serde(default)]
    pub theta: Option<f64>,
    /// Ask for an entire solution; inadmissible parameters are then rejected.
    #[serde(default)]
    pub entire: Option<bool>,
    #[serde(default)]
    pub r_lin: f64,
    #[serde(default)]
    pub r_const: f64,
}

fn one() -> f64 {
    1.0
}

/// Maximal interval of s around 0 on which the family is defined.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum Domain {
    Entire,
    Interval { lo: f64, hi: f64 },
}

impl Domain {
    pub fn contains(&self, s: f64) -> bool {
        match *self {
            Self::Entire => s.is_finite(),
            Self::Interval { lo, hi } => lo < s && s < hi,
        }
    }

    pub fn is_entire(&self) -> bool {
        matches!(self, Self::Entire)
    }
}

/// A closed-form family with validated parameters.
#[derive(Debug, Clone, PartialEq)]
pub struct Family {
    pub variant: Variant,
    pub n: usize,
    pub alpha: f64,
    pub beta: f64,
    /// All n angles; entries past the second are the constant-p directions.
    pub psi: Vec<f64>,
    /// `gamma_3 .. gamma_n` (length n - 2, or empty for n = 2).
    pub gamma: Vec<f64>,
    pub theta: f64,
    pub r_lin: f64,
    pub r_const: f64,
}

// Denominators A cosh(t) - B sinh(t) (hyperbolic) or A cos(t) - B sin(t) (trig),
// t = s / (alpha beta).
#[derive(Debug, Clone, Copy)]
struct Denom {
    a: f64,
    b: f64,
}

impl Denom {
    fn zeros_hyp(&self) -> (f64, f64) {
        // Zero iff |A/B| < 1, at tanh t = A/B.
        if self.b != 0.0 && (self.a / self.b).abs() < 1.0 {
            let t = (self.a / self.b).atanh();
            if t > 0.0 {
                return (f64::NEG_INFINITY, t);
            }
            return (t, f64::INFINITY);
        }
        (f64::NEG_INFINITY, f64::INFINITY)
    }

    fn zeros_trig(&self) -> (f64, f64) {
        // A cos t - B sin t = rho cos(t + d), d = atan2(B, A)
        let d = self.b.atan2(self.a);
        let up = (std::f64::consts::FRAC_PI_2 - d).rem_euclid(std::f64::consts::PI);
        (up - std::f64::consts::PI, up)
    }
}

impl Family {
    pub fn from_spec(spec: &FamilySpec) -> Result<Self> {
        let n = spec.n;
        let bad = |m: &str| Err(Error::InvalidInput(m.to_string()));
        if !(spec.alpha > 0.0 && spec.beta > 0.0) || !spec.alpha.is_finite() || !spec.beta.is_finite() {
            return bad("alpha and beta must be positive and finite");
        }
        let fam = match spec.variant {
            Variant::N2Hyperbolic | Variant::N2Trig => {
                if n != 2 || spec.psi.len() != 2 {
                    return bad("n2 variants need n = 2 and two angles");
                }
                Self::base(spec, spec.psi.clone(), vec![])
            }
            Variant::HighDimLinear => {
                if n < 3 || spec.psi.len() != 2 || spec.gamma.len() != n - 2 {
                    return bad("high-dimensional variant needs n >= 3, two angles and n - 2 gammas");
                }
                let mut psi = spec.psi.clone();
                psi.resize(n, 0.0);
                Self::base(spec, psi, spec.gamma.clone())
            }
            Variant::SubcriticalEntire => {
                if n < 3 || spec.psi.len() != n {
                    return bad("subcritical variant needs n >= 3 and n angles");
                }
                let gamma = if spec.gamma.is_empty() { vec![0.0; n - 2] } else { spec.gamma.clone() };
                if gamma.len() != n - 2 {
                    return bad("subcritical variant needs n - 2 gammas");
                }
                Self::base(spec, spec.psi.clone(), gamma)
            }
            Variant::BoxedExample => {
                let big = spec.theta.ok_or_else(|| Error::InvalidInput("boxed example needs theta".into()))?;
                if n < 3 {
                    return bad("boxed example needs n >= 3");
                }
                let psi = big / n as f64;
                Self {
                    variant: Variant::BoxedExample,
                    n,
                    alpha: 1.0,
                    beta: 1.0,
                    psi: vec![psi; n],
                    gamma: vec![0.0; n - 2],
                    theta: big,
                    r_lin: spec.r_lin,
                    r_const: spec.r_const,
                }
            }
        };
        if fam.psi.iter().chain(&fam.gamma).any(|v| !v.is_finite()) {
            return bad("angles and gammas must be finite");
        }
        if fam.d1().a == 0.0 || fam.d2().a == 0.0 {
            return Err(Error::DomainBoundary { s: 0.0 });
        }
        let violated = fam.violations();
        if spec.entire == Some(true) && !violated.is_empty() {
            return Err(Error::NotApplicable(violated.join("; ")));
        }
        Ok(fam)
    }

    fn base(spec: &FamilySpec, psi: Vec<f64>, gamma: Vec<f64>) -> Self {
        let theta = psi.iter().sum();
        Self {
            variant: spec.variant,
            n: spec.n,
            alpha: spec.alpha,
            beta: spec.beta,
            psi,
            gamma,
            theta,
            r_lin: spec.r_lin,
            r_const: spec.r_const,
        }
    }

    pub fn n2_hyperbolic(alpha: f64, beta: f64, psi1: f64, psi2: f64) -> Result<Self> {
        Self::from_spec(&FamilySpec {
            variant: Variant::N2Hyperbolic,
            n: 2,
            alpha,
            beta,
            psi: vec![psi1, psi2],
            gamma: vec![],
            theta: None,
            entire: None,
            r_lin: 0.0,
            r_const: 0.0,
        })
    }

    pub fn n2_trig(alpha: f64, beta: f64, psi1: f64, psi2: f64) -> Result<Self> {
        let mut f = Self::n2_hyperbolic(alpha, beta, psi1, psi2)?;
        f.variant = Variant::N2Trig;
        Ok(f)
    }

    pub fn highdim_linear(alpha: f64, beta: f64, psi1: f64, psi2: f64, gamma: Vec<f64>) -> Result<Self> {
        Self::from_spec(&FamilySpec {
            variant: Variant::HighDimLinear,
            n: gamma.len() + 2,
            alpha,
            beta,
            psi: vec![psi1, psi2],
            gamma,
            theta: None,
            entire: None,
            r_lin: 0.0,
            r_const: 0.0,
        })
    }

    pub fn subcritical_entire(alpha: f64, beta: f64, psi: Vec<f64>, gamma: Vec<f64>) -> Result<Self> {
        Self::from_spec(&FamilySpec {
            variant: Variant::SubcriticalEntire,
            n: psi.len(),
            alpha,
            beta,
            psi,
            gamma,
            theta: None,
            entire: None,
            r_lin: 0.0,
            r_const: 0.0,
        })
    }

    pub fn boxed_example(n: usize, big_theta: f64) -> Result<Self> {
        Self::from_spec(&FamilySpec {
            variant: Variant::BoxedExample,
            n,
            alpha: 1.0,
            beta: 1.0,
            psi: vec![],
            gamma: vec![],
            theta: Some(big_theta),
            entire: None,
            r_lin: 0.0,
            r_const: 0.0,
        })
    }

    /// Subcritical parameters for a target phase: `alpha = beta = 1`,
    /// `psi_1 = psi_2 = clamp(Theta / n, -pi/4, pi/4)` and the rest equal.
    pub fn subcritical_for_phase(n: usize, big_theta: f64, gamma: Vec<f64>) -> Result<Self> {
        if n < 3 {
            return Err(Error::InvalidInput("need n >= 3".into()));
        }
        let q = std::f64::consts::FRAC_PI_4;
        let head = (big_theta / n as f64).clamp(-q, q);
        let rest = (big_theta - 2.0 * head) / (n - 2) as f64;
        let mut psi = vec![head, head];
        psi.extend(std::iter::repeat_n(rest, n - 2));
        let gamma = if gamma.is_empty() { vec![0.0; n - 2] } else { gamma };
        Self::subcritical_entire(1.0, 1.0, psi, gamma)
    }

    fn trig(&self) -> bool {
        self.variant == Variant::N2Trig
    }

    fn d1(&self) -> Denom {
        let (s1, c1) = self.psi[0].sin_cos();
        Denom { a: self.alpha * c1, b: self.beta * s1 }
    }

    fn d2(&self) -> Denom {
        let (s2, c2) = self.psi[1].sin_cos();
        if self.trig() {
            Denom { a: self.beta * c2, b: -self.alpha * s2 }
        } else {
            Denom { a: self.beta * c2, b: self.alpha * s2 }
        }
    }

    /// Constraints for an entire solution that these parameters break.
    pub fn violations(&self) -> Vec<String> {
        let mut out = Vec::new();
        if self.trig() {
            out.push("trig variant is never entire".to_string());
            return out;
        }
        let (a, b) = (self.alpha, self.beta);
        if self.psi[0].tan().abs() > a / b * (1.0 + 1e-14) {
            out.push(format!("alpha/beta >= |tan psi_1| fails: {} < {}", a / b, self.psi[0].tan().abs()));
        }
        if self.psi[1].tan().abs() > b / a * (1.0 + 1e-14) {
            out.push(format!("beta/alpha >= |tan psi_2| fails: {} < {}", b / a, self.psi[1].tan().abs()));
        }
        for (k, &p) in self.psi.iter().enumerate().skip(2) {
            if matches!(self.variant, Variant::SubcriticalEntire | Variant::BoxedExample)
                && p.abs() >= std::f64::consts::FRAC_PI_2
            {
                out.push(format!("|psi_{}| < pi/2 fails: {}", k + 1, p.abs()));
            }
        }
        let crit = (self.n as f64 - 1.0) * std::f64::consts::FRAC_PI_2;
        if matches!(self.variant, Variant::SubcriticalEntire | Variant::BoxedExample) && self.theta.abs() >= crit {
            out.push(format!("subcritical phase |Theta| < {crit} fails: {}", self.theta.abs()));
        }
        out
    }

    pub fn domain(&self) -> Domain {
        let ab = self.alpha * self.beta;
        let (z1, z2) = if self.trig() {
            (self.d1().zeros_trig(), self.d2().zeros_trig())
        } else {
            (self.d1().zeros_hyp(), self.d2().zeros_hyp())
        };
        let lo = z1.0.max(z2.0) * ab;
        let hi = z1.1.min(z2.1) * ab;
        if lo == f64::NEG_INFINITY && hi == f64::INFINITY {
            Domain::Entire
        } else {
            Domain::Interval { lo, hi }
        }
    }

    /// `kappa = prod p' / F^2` of the two-dimensional core, `+-(alpha beta)^{-2}`.
    pub fn kappa(&self) -> f64 {
        let k = 1.0 / (self.alpha * self.beta).powi(2);
        if self.trig() {
            -k
        } else {
            k
        }
    }

    /// `(F_theta, F_{theta+pi/2})` of the two-dimensional core `(p_1, p_2)`.
    pub fn core_f(&self, s: f64) -> Result<(f64, f64)> {
        let c = self.core(s)?;
        Ok((c.f, c.f_perp))
    }

    fn core(&self, s: f64) -> Result<Core> {
        if !self.domain().contains(s) {
            return Err(Error::DomainBoundary { s });
        }
        self.core_formula(s)
    }

    fn core_formula(&self, s: f64) -> Result<Core> {
        let (a, b) = (self.alpha, self.beta);
        let ab = a * b;
        let tau = s / ab;
        let (d1, d2) = (self.d1(), self.d2());
        let (s1, c1) = self.psi[0].sin_cos();
        let (s2, c2) = self.psi[1].sin_cos();
        let k = a * a + b * b;
        if self.trig() {
            let (sn, cs) = tau.sin_cos();
            let den1 = d1.a * cs - d1.b * sn;
            let num1 = a * s1 * cs + b * c1 * sn;
            let dden1 = (-d1.a * sn - d1.b * cs) / ab;
            let den2 = b * c2 * cs + a * s2 * sn;
            let num2 = b * s2 * cs - a * c2 * sn;
            let dden2 = (-b * c2 * sn + a * s2 * cs) / ab;
            let m = a * a - b * b;
            let f = ab / (den1 * den2);
            Ok(Core {
                p: [num1 / den1, num2 / den2],
                dp: [1.0 / (den1 * den1), -1.0 / (den2 * den2)],
                ddp: [-2.0 * dden1 / den1.powi(3), 2.0 * dden2 / den2.powi(3)],
                r: -(ab * m / 8.0) * (2.0 * tau).sin(),
                rp: -(m / 4.0) * (2.0 * tau).cos(),
                rpp: (m / (2.0 * ab)) * (2.0 * tau).sin(),
                f,
                f_perp: -(m / 2.0) * (2.0 * tau).sin() / (den1 * den2),
            })
        } else {
            let (sh, ch) = (tau.sinh(), tau.cosh());
            let den1 = d1.a * ch - d1.b * sh;
            let num1 = a * s1 * ch + b * c1 * sh;
            let dden1 = (d1.a * sh - d1.b * ch) / ab;
            let den2 = d2.a * ch - d2.b * sh;
            let num2 = b * s2 * ch + a * c2 * sh;
            let dden2 = (d2.a * sh - d2.b * ch) / ab;
            let f = ab / (den1 * den2);
            let x = k / (2.0 * ab) * (2.0 * tau).sinh();
            Ok(Core {
                p: [num1 / den1, num2 / den2],
                dp: [1.0 / (den1 * den1), 1.0 / (den2 * den2)],
                ddp: [-2.0 * dden1 / den1.powi(3), -2.0 * dden2 / den2.powi(3)],
                r: -(ab * k / 8.0) * (2.0 * tau).sinh(),
                rp: -(k / 4.0) * (2.0 * tau).cosh(),
                rpp: -x,
                f,
                f_perp: x * f,
            })
        }
    }

    /// Exact `(F_Theta, F_{Theta+pi/2}, dF_Theta/dp_1)` of the boxed example, from its displayed formulas.
    pub fn boxed_formulas(n: usize, big_theta: f64, s: f64) -> (f64, f64, f64) {
        let psi = big_theta / n as f64;
        let (sp, cp) = psi.sin_cos();
        let (sh, ch) = (s.sinh(), s.cosh());
        let den = cp * ch - sp * sh;
        let sec = (1.0 / cp).powi(n as i32 - 2);
        (sec / (den * den), sec * (2.0 * s).sinh() / (den * den), sec * (sp * ch - cp * sh) / den)
    }
}

struct Core {
    p: [f64; 2],
    dp: [f64; 2],
    ddp: [f64; 2],
    r: f64,
    rp: f64,
    rpp: f64,
    f: f64,
    f_perp: f64,
}

impl Sampler for Family {
    fn n(&self) -> usize {
        self.n
    }

    fn at(&self, s: f64) -> Result<AnsatzData> {
        self.assemble(s, self.core(s)?)
    }
}

/// The closed-form expressions of a family evaluated at any s where they are finite,
/// including beyond a pole that ends the maximal interval around 0.
#[derive(Debug, Clone, Copy)]
pub struct Formula<'a>(pub &'a Family);

impl Sampler for Formula<'_> {
    fn n(&self) -> usize {
        self.0.n
    }

    fn at(&self, s: f64) -> Result<AnsatzData> {
        let c = self.0.core_formula(s)?;
        if !c.p.iter().chain(&c.dp).chain(&c.ddp).all(|v| v.is_finite()) {
            return Err(Error::DomainBoundary { s });
        }
        self.0.assemble(s, c)
    }
}

impl Family {
    fn assemble(&self, s: f64, c: Core) -> Result<AnsatzData> {
        let n = self.n;
        let mut d = AnsatzData {
            s,
            p: c.p.to_vec(),
            dp: c.dp.to_vec(),
            ddp: c.ddp.to_vec(),
            q: vec![0.0; n],
            dq: vec![0.0; n],
            ddq: vec![0.0; n],
            r: c.r,
            rp: c.rp,
            rpp: c.rpp,
        };
        if n > 2 {
            let g2: f64 = self.gamma.iter().map(|g| g * g).sum();
            d.r *= 1.0 + g2;
            d.rp *= 1.0 + g2;
            d.rpp *= 1.0 + g2;
            for k in 2..n {
                let g = self.gamma[k - 2];
                let (tp, sec) = match self.variant {
                    Variant::HighDimLinear => (0.0, 1.0),
                    _ => (self.psi[k].tan(), 1.0 / self.psi[k].cos()),
                };
                d.p.push(tp);
                d.dp.push(0.0);
                d.ddp.push(0.0);
                d.q[k] = sec * g * s;
                d.dq[k] = sec * g;
                d.r += 0.5 * tp * (g * s).powi(2);
                d.rp += tp * g * g * s;
                d.rpp += tp * g * g;
            }
        }
        d.r += self.r_lin * s + self.r_const;
        d.rp += self.r_lin;
        Ok(d)
    }
}

/// Sampler for constant `p` with `r'' = tan(theta - sum atan p_j)`, the quadratic solutions.
#[derive(Debug, Clone, PartialEq)]
pub struct Quadratic {
    pub p: Vec<f64>,
    pub theta: f64,
}

impl Sampler for Quadratic {
    fn n(&self) -> usize {
        self.p.len()
    }

    fn at(&self, s: f64) -> Result<AnsatzData> {
        let n = self.p.len();
        let rpp = (self.theta - self.p.iter().map(|x| x.atan()).sum::<f64>()).tan();
        Ok(AnsatzData {
            s,
            p: self.p.clone(),
            dp: vec![0.0; n],
            ddp: vec![0.0; n],
            q: vec![0.0; n],
            dq: vec![0.0; n],
            ddq: vec![0.0; n],
            r: 0.5 * rpp * s * s,
            rp: rpp * s,
            rpp,
        })
    }
}
