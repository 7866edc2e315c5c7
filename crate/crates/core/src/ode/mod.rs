//! The reduced system of the ansatz in first-order form
//!
//! ```text
//! p_i' = 1 / R_i,   R_i' = -2 dF/dp_i / F,   r'' = -G / F
//! ```
//!
//! with numerical integration, first integrals and trajectory export.

pub mod integrator;
pub mod quadrature;

use std::fmt::Write as _;
use std::ops::ControlFlow;

use serde::{Deserialize, Serialize};

use crate::equations::{HessianCoefficients, RecursiveSpec};
use crate::error::{Error, Result};
use crate::symfun::poly_eval;

pub use integrator::Options;

/// Blow-up threshold on `max(|p|, |R|)`.
pub const BLOWUP: f64 = 1e12;
/// Integration also stops once `|F|` falls below this fraction of `sum |c_k| sigma_k(|p|)`;
/// past it F carries no correct digits and `R' = -2 dF/F` is noise.
pub const F_FLOOR: f64 = 1e-8;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SystemState {
    pub s: f64,
    pub p: Vec<f64>,
    /// `R_i = 1 / p_i'`
    #[serde(rename = "R")]
    pub big_r: Vec<f64>,
    pub r: f64,
    pub rprime: f64,
}

impl SystemState {
    pub fn n(&self) -> usize {
        self.p.len()
    }

    pub fn validate(&self, n: usize) -> Result<()> {
        if self.p.len() != n || self.big_r.len() != n {
            return Err(Error::InvalidInput(format!("state must have {n} entries in p and R")));
        }
        let finite = self.p.iter().chain(&self.big_r).chain([&self.s, &self.r, &self.rprime]).all(|v| v.is_finite());
        if !finite {
            return Err(Error::InvalidInput("state must be finite".into()));
        }
        if self.big_r.contains(&0.0) {
            return Err(Error::InvalidInput("R_i = 0 (p_i' would be infinite)".into()));
        }
        Ok(())
    }

    fn pack(&self) -> Vec<f64> {
        let mut y = Vec::with_capacity(2 * self.n() + 2);
        y.extend_from_slice(&self.p);
        y.extend_from_slice(&self.big_r);
        y.push(self.r);
        y.push(self.rprime);
        y
    }

    fn unpack(s: f64, y: &[f64]) -> Self {
        let n = (y.len() - 2) / 2;
        Self { s, p: y[..n].to_vec(), big_r: y[n..2 * n].to_vec(), r: y[2 * n], rprime: y[2 * n + 1] }
    }
}

/// Derivatives of `(p, R, r, r')` at a state, with `F`, `G` attached.
#[derive(Debug, Clone, PartialEq)]
pub struct FieldValue {
    pub dp: Vec<f64>,
    pub d_big_r: Vec<f64>,
    pub dr: f64,
    /// `r'' = -G/F`
    pub rpp: f64,
    pub f: f64,
    pub g: f64,
    pub grad_f: Vec<f64>,
}

pub fn vector_field(h: &HessianCoefficients, st: &SystemState) -> Result<FieldValue> {
    st.validate(h.n())?;
    let (f, grad_f) = poly_eval(h.f_coeffs(), &st.p)?;
    if f == 0.0 || !f.is_finite() {
        return Err(Error::SingularField { s: st.s });
    }
    let g = h.g_value(&st.p);
    Ok(FieldValue {
        dp: st.big_r.iter().map(|r| 1.0 / r).collect(),
        d_big_r: grad_f.iter().map(|d| -2.0 * d / f).collect(),
        dr: st.rprime,
        rpp: -g / f,
        f,
        g,
        grad_f,
    })
}

fn raw_field(h: &HessianCoefficients, y: &[f64], dy: &mut [f64]) -> std::result::Result<(), integrator::Fault> {
    let n = h.n();
    let (p, big_r) = (&y[..n], &y[n..2 * n]);
    if big_r.contains(&0.0) {
        return Err(integrator::Fault);
    }
    let (f, grad) = poly_eval(h.f_coeffs(), p).map_err(|_| integrator::Fault)?;
    if f == 0.0 || !f.is_finite() {
        return Err(integrator::Fault);
    }
    for i in 0..n {
        dy[i] = 1.0 / big_r[i];
        dy[n + i] = -2.0 * grad[i] / f;
    }
    dy[2 * n] = y[2 * n + 1];
    dy[2 * n + 1] = -h.g_value(p) / f;
    Ok(())
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum Termination {
    ReachedEnd,
    BlowUp { s: f64 },
    FVanished { s: f64 },
    StepUnderflow { s: f64 },
}

impl Termination {
    /// The finite end of the trajectory, if it stopped early.
    pub fn s_star(&self) -> Option<f64> {
        match *self {
            Self::ReachedEnd => None,
            Self::BlowUp { s } | Self::FVanished { s } | Self::StepUnderflow { s } => Some(s),
        }
    }
}

/// Accepted integration steps with endpoint derivatives for dense output.
#[derive(Debug, Clone, PartialEq)]
pub struct Trajectory {
    pub n: usize,
    pub s: Vec<f64>,
    ys: Vec<Vec<f64>>,
    dys: Vec<Vec<f64>>,
    pub termination: Termination,
}

impl Trajectory {
    pub fn len(&self) -> usize {
        self.s.len()
    }

    pub fn is_empty(&self) -> bool {
        self.s.is_empty()
    }

    pub fn state(&self, k: usize) -> SystemState {
        SystemState::unpack(self.s[k], &self.ys[k])
    }

    pub fn states(&self) -> impl Iterator<Item = SystemState> + '_ {
        (0..self.len()).map(|k| self.state(k))
    }

    pub fn last(&self) -> SystemState {
        self.state(self.len() - 1)
    }

    /// Dense output at `s` inside the sampled range.
    pub fn at(&self, s: f64) -> Option<SystemState> {
        let (lo, hi) = (self.s[0].min(*self.s.last()?), self.s[0].max(*self.s.last()?));
        if s < lo || s > hi {
            return None;
        }
        let forward = self.s.len() < 2 || self.s[1] > self.s[0];
        let k = self.s.partition_point(|&t| if forward { t < s } else { t > s });
        if k == 0 {
            return Some(self.state(0));
        }
        let (a, b) = (k - 1, k.min(self.len() - 1));
        let y = integrator::hermite(self.s[a], &self.ys[a], &self.dys[a], self.s[b], &self.ys[b], &self.dys[b], s);
        Some(SystemState::unpack(s, &y))
    }

    /// Trajectory through the given states, with derivatives from the full field.
    pub fn from_states(h: &HessianCoefficients, states: &[SystemState], termination: Termination) -> Result<Self> {
        let first = states.first().ok_or_else(|| Error::InvalidInput("no states".into()))?;
        let mut traj = Trajectory { n: first.n(), s: vec![], ys: vec![], dys: vec![], termination };
        for st in states {
            let y = st.pack();
            let mut dy = vec![0.0; y.len()];
            raw_field(h, &y, &mut dy).map_err(|_| Error::SingularField { s: st.s })?;
            traj.s.push(st.s);
            traj.ys.push(y);
            traj.dys.push(dy);
        }
        Ok(traj)
    }

    /// Largest deviations of the first integrals from their initial values.
    pub fn drift(&self, h: &HessianCoefficients, spec: Option<&RecursiveSpec>) -> Drift {
        let first = first_integrals(spec, h, &self.state(0));
        let mut d = Drift::default();
        for st in self.states() {
            let fi = first_integrals(spec, h, &st);
            d.kappa_rel = d.kappa_rel.max((fi.kappa / first.kappa - 1.0).abs());
            d.hamiltonian = d.hamiltonian.max((fi.hamiltonian - first.hamiltonian).abs());
            if let (Some(x0), Some(x)) = (&first.xi, &fi.xi) {
                let scale = 1.0 + x0[0].abs();
                for i in 1..x.len() {
                    let dd = ((x[i] - x[0]) - (x0[i] - x0[0])).abs() / scale;
                    d.xi_differences = d.xi_differences.max(dd);
                }
            }
            if let Some(sp) = spec {
                if let Ok(c) = xi_rhs_check(sp, &st) {
                    d.xi_rhs = d.xi_rhs.max(c.scaled());
                }
            }
        }
        d
    }
}

/// Maximal deviations along a trajectory. `xi_differences` is scaled by `1 + |xi_1(0)|`
/// and `xi_rhs` by the magnitude of the terms.
#[derive(Debug, Clone, Copy, PartialEq, Default, Serialize, Deserialize)]
pub struct Drift {
    pub kappa_rel: f64,
    pub xi_differences: f64,
    pub hamiltonian: f64,
    pub xi_rhs: f64,
}

/// Integrates from `init` to `s_end`, stopping at blow-up (`max(|p|, |R|) > 1e12`
/// or step underflow), at a sign change of F (bisected to `1e-10` in s) or when F reaches
/// [`F_FLOOR`] without changing sign.
pub fn integrate(h: &HessianCoefficients, init: &SystemState, s_end: f64, opts: &Options) -> Result<Trajectory> {
    init.validate(h.n())?;
    if !s_end.is_finite() {
        return Err(Error::InvalidInput("s_end must be finite".into()));
    }
    vector_field(h, init)?;
    let n = h.n();
    let y0 = init.pack();
    let mut dy0 = vec![0.0; y0.len()];
    raw_field(h, &y0, &mut dy0).map_err(|_| Error::SingularField { s: init.s })?;

    let mut traj = Trajectory {
        n,
        s: vec![init.s],
        ys: vec![y0.clone()],
        dys: vec![dy0],
        termination: Termination::ReachedEnd,
    };
    let mut last_fault = false;
    let f_of = |y: &[f64]| crate::symfun::poly_value(h.f_coeffs(), &y[..n]);
    let f_scale = |y: &[f64]| {
        let abs: Vec<f64> = y[..n].iter().map(|v| v.abs()).collect();
        let e = crate::symfun::elem_sym_all(&abs);
        h.f_coeffs().iter().zip(&e).map(|(c, e)| c.abs() * e).sum::<f64>()
    };
    let outcome = integrator::solve(
        |_, y, dy| {
            let r = raw_field(h, y, dy);
            last_fault = r.is_err();
            r
        },
        init.s,
        &y0,
        s_end,
        opts,
        |step| {
            let (f0, f1) = (f_of(step.y0), f_of(step.y1));
            if (f0 > 0.0) != (f1 > 0.0) {
                let (mut a, mut b) = (step.t0, step.t1);
                while (b - a).abs() > 1e-10 {
                    let m = 0.5 * (a + b);
                    if (f_of(&step.interpolate(m)) > 0.0) == (f0 > 0.0) {
                        a = m;
                    } else {
                        b = m;
                    }
                }
                return ControlFlow::Break(Termination::FVanished { s: 0.5 * (a + b) });
            }
            traj.s.push(step.t1);
            traj.ys.push(step.y1.to_vec());
            traj.dys.push(step.f1.to_vec());
            let big = step.y1[..2 * n].iter().fold(0.0_f64, |m, v| m.max(v.abs()));
            if big > BLOWUP {
                return ControlFlow::Break(Termination::BlowUp { s: step.t1 });
            }
            if f1.abs() <= F_FLOOR * f_scale(step.y1) {
                return ControlFlow::Break(Termination::FVanished { s: step.t1 });
            }
            ControlFlow::Continue(())
        },
    );
    traj.termination = match outcome {
        integrator::Outcome::Reached => Termination::ReachedEnd,
        integrator::Outcome::Stopped(t) => t,
        integrator::Outcome::Underflow { t } if last_fault => Termination::StepUnderflow { s: t },
        integrator::Outcome::Underflow { t } => Termination::BlowUp { s: t },
        integrator::Outcome::Fault { t } => return Err(Error::SingularField { s: t }),
    };
    Ok(traj)
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FirstIntegrals {
    /// `prod p_i' / F^2`
    pub kappa: f64,
    /// `sum log|R_i| + 2 log|F|`
    pub hamiltonian: f64,
    /// `xi_i = (p_i^2 + a1 p_i + a0) R_i`, present for recursive equations.
    pub xi: Option<Vec<f64>>,
}

impl FirstIntegrals {
    /// `kappa_j = xi_1 - xi_j`, with `kappa_1 = 0`.
    pub fn shifts(&self) -> Option<Vec<f64>> {
        self.xi.as_ref().map(|x| x.iter().map(|v| x[0] - v).collect())
    }
}

pub fn first_integrals(spec: Option<&RecursiveSpec>, h: &HessianCoefficients, st: &SystemState) -> FirstIntegrals {
    let f = crate::symfun::poly_value(h.f_coeffs(), &st.p);
    let prod_dp: f64 = st.big_r.iter().map(|r| 1.0 / r).product();
    let hamiltonian = st.big_r.iter().map(|r| r.abs().ln()).sum::<f64>() + 2.0 * f.abs().ln();
    let xi = spec.map(|sp| st.p.iter().zip(&st.big_r).map(|(&p, &r)| sp.q(p) * r).collect());
    FirstIntegrals { kappa: prod_dp / (f * f), hamiltonian, xi }
}

/// `xi_i'` for every i, by the chain rule: `q'(p_i) - 2 q(p_i) dF/dp_i / F`.
pub fn xi_derivatives(spec: &RecursiveSpec, st: &SystemState) -> Result<Vec<f64>> {
    let (f, grad) = poly_eval(&spec.coefficients(), &st.p)?;
    if f == 0.0 {
        return Err(Error::SingularField { s: st.s });
    }
    Ok(st.p.iter().zip(&grad).map(|(&p, &g)| spec.dq(p) - 2.0 * spec.q(p) * g / f).collect())
}

/// `(xi_1')^2 - k1 - k2 prod xi_j` together with the magnitude of its terms, where
/// `xi_1'` counts through the two parts of the chain rule.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct XiCheck {
    pub residual: f64,
    pub scale: f64,
}

impl XiCheck {
    pub fn scaled(&self) -> f64 {
        self.residual.abs() / self.scale.max(f64::MIN_POSITIVE)
    }
}

/// Residual of `(xi')^2 = (a1^2 - 4 a0) + 4 (c_{n-1}^2 - a1 c_{n-1} c_n + a0 c_n^2) kappa prod xi_j`.
pub fn xi_rhs_check(spec: &RecursiveSpec, st: &SystemState) -> Result<XiCheck> {
    let (f, grad) = poly_eval(&spec.coefficients(), &st.p)?;
    if f == 0.0 {
        return Err(Error::SingularField { s: st.s });
    }
    let p0 = st.p[0];
    let (a, b) = (spec.dq(p0), 2.0 * spec.q(p0) * grad[0] / f);
    let dxi = a - b;
    let kappa: f64 = st.big_r.iter().map(|r| 1.0 / r).product::<f64>() / (f * f);
    let prod_xi: f64 = st.p.iter().zip(&st.big_r).map(|(&p, &r)| spec.q(p) * r).product();
    let k1 = spec.discriminant();
    let k2 = 4.0 * spec.top_form() * kappa;
    // xi' is a difference of two terms, so its square is only known relative to their size.
    let terms = a.abs() + b.abs();
    Ok(XiCheck { residual: dxi * dxi - k1 - k2 * prod_xi, scale: terms * terms + k1.abs() + (k2 * prod_xi).abs() })
}

/// CSV with header `s,p1..pn,R1..Rn,r,rprime,rpp,F,kappa,xi1..xin`; xi columns are NaN without a spec.
pub fn trajectory_csv(traj: &Trajectory, h: &HessianCoefficients, spec: Option<&RecursiveSpec>) -> String {
    let n = traj.n;
    let mut out = String::from("s");
    for prefix in ["p", "R"] {
        for i in 1..=n {
            let _ = write!(out, ",{prefix}{i}");
        }
    }
    out.push_str(",r,rprime,rpp,F,kappa");
    for i in 1..=n {
        let _ = write!(out, ",xi{i}");
    }
    out.push('\n');
    for st in traj.states() {
        let f = crate::symfun::poly_value(h.f_coeffs(), &st.p);
        let rpp = -h.g_value(&st.p) / f;
        let fi = first_integrals(spec, h, &st);
        let xi = fi.xi.unwrap_or_else(|| vec![f64::NAN; n]);
        let row: Vec<f64> = std::iter::once(st.s)
            .chain(st.p.iter().copied())
            .chain(st.big_r.iter().copied())
            .chain([st.r, st.rprime, rpp, f, fi.kappa])
            .chain(xi)
            .collect();
        let cells: Vec<String> = row.iter().map(|v| format!("{v:.16e}")).collect();
        out.push_str(&cells.join(","));
        out.push('\n');
    }
    out
}

/// Summary record `{termination, s_star, invariant_drift}`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Summary {
    pub termination: Termination,
    pub s_star: Option<f64>,
    pub invariant_drift: Drift,
}

impl Summary {
    pub fn new(traj: &Trajectory, h: &HessianCoefficients, spec: Option<&RecursiveSpec>) -> Self {
        Self { termination: traj.termination, s_star: traj.termination.s_star(), invariant_drift: traj.drift(h, spec) }
    }
}
