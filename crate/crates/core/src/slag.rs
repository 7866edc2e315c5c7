//! Special Lagrangian side of the ansatz: the graph of the gradient of the real
//! potential, Joyce's evolving quadrics, and the map between them.
//!
//! The Joyce quadric coordinates are called `zeta` here, to keep them apart from
//! the first integrals `xi` of the ODE.

use std::f64::consts::{FRAC_PI_2, TAU};
use std::fmt::Write as _;
use std::ops::ControlFlow;

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::dhym::ThetaSystem;
use crate::error::{Error, Result};
use crate::families::{AnsatzData, Sampler};
use crate::ode::integrator::{self, Options, Outcome};

pub use crate::verify::slag_residual;

const I: Complex64 = Complex64::new(0.0, 1.0);

/// `((1 + i p_j) x_j + i q_j, s + i (sum p_j' x_j^2 / 2 + sum q_j' x_j + r'))`, the graph of
/// the gradient of `f = sum (p_j x_j^2 / 2 + q_j x_j) + r`.
pub fn graph_map(d: &AnsatzData, x: &[f64]) -> Vec<Complex64> {
    let n = d.p.len();
    let mut out: Vec<Complex64> = (0..n).map(|j| Complex64::new(x[j], d.p[j] * x[j] + d.q[j])).collect();
    let df_ds: f64 = (0..n).map(|j| 0.5 * d.dp[j] * x[j] * x[j] + d.dq[j] * x[j]).sum::<f64>() + d.rp;
    out.push(Complex64::new(d.s, df_ds));
    out
}

/// Sum over coordinates of `dx ^ dy` on two tangent vectors.
pub fn symplectic_pairing(u: &[Complex64], v: &[Complex64]) -> f64 {
    u.iter().zip(v).map(|(a, b)| a.re * b.im - a.im * b.re).sum()
}

/// Largest `|omega(d_a G, d_b G)|` over pairs of coordinate directions at `(x, s)`, with
/// fourth-order central differences of step `h`.
pub fn lagrangian_defect<S: Sampler + ?Sized>(sampler: &S, x: &[f64], s: f64, h: f64) -> Result<f64> {
    let n = x.len();
    let eval = |dx: &[f64], ds: f64| -> Result<Vec<Complex64>> {
        let y: Vec<f64> = x.iter().zip(dx).map(|(a, b)| a + b).collect();
        Ok(graph_map(&sampler.at(s + ds)?, &y))
    };
    let mut tangents = Vec::with_capacity(n + 1);
    for k in 0..=n {
        let shift = |m: f64| -> Result<Vec<Complex64>> {
            let mut dx = vec![0.0; n];
            if k < n {
                dx[k] = m * h;
                eval(&dx, 0.0)
            } else {
                eval(&dx, m * h)
            }
        };
        let (p1, m1, p2, m2) = (shift(1.0)?, shift(-1.0)?, shift(2.0)?, shift(-2.0)?);
        tangents.push(
            (0..=n).map(|j| (8.0 * (p1[j] - m1[j]) - (p2[j] - m2[j])) / (12.0 * h)).collect::<Vec<_>>(),
        );
    }
    let mut worst = 0.0_f64;
    for a in 0..=n {
        for b in a + 1..=n {
            worst = worst.max(symplectic_pairing(&tangents[a], &tangents[b]).abs());
        }
    }
    Ok(worst)
}

/// Joyce's data `(t, w, beta)`; all `w_j` are nonzero.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct JoyceState {
    pub t: f64,
    pub w: Vec<Complex64>,
    pub beta: Complex64,
}

/// The angle with `e^{i theta} i^n = -i`, in `[0, 2 pi)`.
pub fn required_theta(n: usize) -> f64 {
    (-FRAC_PI_2 - n as f64 * FRAC_PI_2).rem_euclid(TAU)
}

fn check_angle(n: usize, theta: f64) -> Result<()> {
    let lhs = Complex64::from_polar(1.0, theta) * I.powu(n as u32);
    if (lhs + I).norm() > 1e-12 {
        return Err(Error::AngleMismatch { required: required_theta(n) });
    }
    Ok(())
}

fn check_signature(d: &AnsatzData, kappa: f64) -> Result<()> {
    if !(kappa > 0.0) {
        return Err(Error::NotApplicable(format!("needs kappa > 0, got {kappa}")));
    }
    if let Some(j) = d.dp.iter().position(|&v| !(v > 0.0)) {
        return Err(Error::NotApplicable(format!("needs p_j' > 0, got p_{}' = {}", j + 1, d.dp[j])));
    }
    if d.dq.iter().chain(&d.q).any(|&v| v != 0.0) {
        return Err(Error::NotApplicable("linear terms are not part of the correspondence".into()));
    }
    Ok(())
}

/// `t = sqrt(kappa) s`, `w_j = i (1 + i p_j) / sqrt(p_j')`, `beta = i (s + i r')`.
pub fn joyce_map(d: &AnsatzData, kappa: f64, theta: f64) -> Result<JoyceState> {
    check_signature(d, kappa)?;
    check_angle(d.p.len(), theta)?;
    Ok(JoyceState {
        t: kappa.sqrt() * d.s,
        w: d.p.iter().zip(&d.dp).map(|(&p, &dp)| I * Complex64::new(1.0, p) / dp.sqrt()).collect(),
        beta: I * Complex64::new(d.s, d.rp),
    })
}

/// `zeta_j = sqrt(p_j') x_j`.
pub fn zeta(d: &AnsatzData, x: &[f64]) -> Vec<f64> {
    d.dp.iter().zip(x).map(|(dp, x)| dp.sqrt() * x).collect()
}

/// `(w_1 zeta_1, ..., w_n zeta_n, beta - |zeta|^2 / 2)`.
pub fn quadric_point(js: &JoyceState, zeta: &[f64]) -> Vec<Complex64> {
    let mut out: Vec<Complex64> = js.w.iter().zip(zeta).map(|(w, z)| w * z).collect();
    out.push(js.beta - 0.5 * zeta.iter().map(|z| z * z).sum::<f64>());
    out
}

/// `max_k |quadric_point - i graph_map|` at `(x, s)`.
pub fn correspondence_defect(d: &AnsatzData, kappa: f64, theta: f64, x: &[f64]) -> Result<f64> {
    let js = joyce_map(d, kappa, theta)?;
    let a = quadric_point(&js, &zeta(d, x));
    let b = graph_map(d, x);
    Ok(a.iter().zip(&b).map(|(u, v)| (u - I * v).norm()).fold(0.0, f64::max))
}

/// `(dw_j/ds, dbeta/ds)` by the chain rule, with `p''` and `r''` taken from the
/// angle system at `(p, p')`.
pub fn joyce_derivatives(d: &AnsatzData, theta: f64) -> Result<(Vec<Complex64>, Complex64)> {
    let ts = ThetaSystem::new(d.p.len(), theta)?;
    let v = ts.f_theta(&d.p);
    if v.f == 0.0 {
        return Err(Error::SingularField { s: d.s });
    }
    let dw = (0..d.p.len())
        .map(|j| {
            let (p, dp) = (d.p[j], d.dp[j]);
            let ddp = 2.0 * v.grad[j] * dp * dp / v.f;
            let root = dp.sqrt();
            I * (I * dp / root - 0.5 * Complex64::new(1.0, p) * ddp / (dp * root))
        })
        .collect();
    let rpp = -v.f_perp / v.f;
    Ok((dw, Complex64::new(-rpp, 1.0)))
}

/// Right-hand side of Joyce's system: `dw_j/dt = conj(prod_{k != j} w_k)`, `dbeta/dt = conj(prod w)`.
pub fn joyce_rhs(w: &[Complex64]) -> (Vec<Complex64>, Complex64) {
    let dw = (0..w.len())
        .map(|j| w.iter().enumerate().filter(|&(k, _)| k != j).map(|(_, z)| z).product::<Complex64>().conj())
        .collect();
    (dw, w.iter().product::<Complex64>().conj())
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct JoyceResidual {
    pub max_abs: f64,
    /// `max_abs / (1 + max |prod w|)`
    pub scaled: f64,
}

/// Largest defect of Joyce's system along the sampler at the given s values.
pub fn joyce_residual<S: Sampler + ?Sized>(sampler: &S, kappa: f64, theta: f64, s: &[f64]) -> Result<JoyceResidual> {
    let root = kappa.sqrt();
    let mut worst = 0.0_f64;
    let mut size = 0.0_f64;
    for &si in s {
        let d = sampler.at(si)?;
        let js = joyce_map(&d, kappa, theta)?;
        let (dw, db) = joyce_derivatives(&d, theta)?;
        let (rw, rb) = joyce_rhs(&js.w);
        for (a, b) in dw.iter().zip(&rw) {
            worst = worst.max((a / root - b).norm());
        }
        worst = worst.max((db / root - rb).norm());
        size = size.max(rb.norm());
    }
    Ok(JoyceResidual { max_abs: worst, scaled: worst / (1.0 + size) })
}

fn pack(js: &JoyceState) -> Vec<f64> {
    let mut y: Vec<f64> = js.w.iter().flat_map(|z| [z.re, z.im]).collect();
    y.extend([js.beta.re, js.beta.im]);
    y
}

fn unpack(t: f64, y: &[f64]) -> JoyceState {
    let n = y.len() / 2 - 1;
    JoyceState {
        t,
        w: (0..n).map(|j| Complex64::new(y[2 * j], y[2 * j + 1])).collect(),
        beta: Complex64::new(y[2 * n], y[2 * n + 1]),
    }
}

fn rhs(y: &[f64], dy: &mut [f64]) {
    let js = unpack(0.0, y);
    let (dw, db) = joyce_rhs(&js.w);
    for (j, z) in dw.iter().enumerate() {
        dy[2 * j] = z.re;
        dy[2 * j + 1] = z.im;
    }
    let m = dw.len();
    dy[2 * m] = db.re;
    dy[2 * m + 1] = db.im;
}

/// Solution of Joyce's system, stored at the accepted steps.
#[derive(Debug, Clone, PartialEq)]
pub struct JoyceCurve {
    pub nodes: Vec<JoyceState>,
    opts: Options,
}

/// Integrates Joyce's system from `init` to `t_end`. The quadrics stay defined where the
/// graph chart degenerates, so this continues the solution past blow-up of `p`.
pub fn joyce_integrate(init: &JoyceState, t_end: f64, opts: &Options) -> Result<JoyceCurve> {
    if init.w.iter().any(|z| z.norm() == 0.0) {
        return Err(Error::InvalidStart("w_j must be nonzero".into()));
    }
    let mut nodes = vec![init.clone()];
    let out: Outcome<()> = integrator::solve(
        |_, y, dy| {
            rhs(y, dy);
            Ok(())
        },
        init.t,
        &pack(init),
        t_end,
        opts,
        |st| {
            nodes.push(unpack(st.t1, st.y1));
            ControlFlow::Continue(())
        },
    );
    match out {
        Outcome::Reached => Ok(JoyceCurve { nodes, opts: *opts }),
        Outcome::Stopped(()) => unreachable!(),
        Outcome::Underflow { t } | Outcome::Fault { t } => Err(Error::SingularField { s: t }),
    }
}

impl JoyceCurve {
    pub fn t_range(&self) -> (f64, f64) {
        let (a, b) = (self.nodes[0].t, self.nodes[self.nodes.len() - 1].t);
        (a.min(b), a.max(b))
    }

    /// State at `t`, integrated from the nearest stored node.
    pub fn at(&self, t: f64) -> Result<JoyceState> {
        let (lo, hi) = self.t_range();
        if !(lo..=hi).contains(&t) {
            return Err(Error::DomainBoundary { s: t });
        }
        let near = self
            .nodes
            .iter()
            .min_by(|a, b| (a.t - t).abs().total_cmp(&(b.t - t).abs()))
            .expect("at least one node");
        if near.t == t {
            return Ok(near.clone());
        }
        let mut last = pack(near);
        let _: Outcome<()> = integrator::solve(
            |_, y, dy| {
                rhs(y, dy);
                Ok(())
            },
            near.t,
            &pack(near),
            t,
            &self.opts,
            |st| {
                last = st.y1.to_vec();
                ControlFlow::Continue(())
            },
        );
        Ok(unpack(t, &last))
    }

    /// Point of the quadric at `(t, zeta)`.
    pub fn point(&self, t: f64, zeta: &[f64]) -> Result<Vec<Complex64>> {
        Ok(quadric_point(&self.at(t)?, zeta))
    }

    /// Columns `d/dzeta_k` (exact) and `d/dt` (fourth-order central difference, step `h`).
    pub fn tangent_frame(&self, t: f64, zeta: &[f64], h: f64) -> Result<Vec<Vec<Complex64>>> {
        let js = self.at(t)?;
        let n = js.w.len();
        let mut cols = Vec::with_capacity(n + 1);
        for k in 0..n {
            let mut c = vec![Complex64::new(0.0, 0.0); n + 1];
            c[k] = js.w[k];
            c[n] = Complex64::new(-zeta[k], 0.0);
            cols.push(c);
        }
        let pts: Vec<Vec<Complex64>> =
            [h, -h, 2.0 * h, -2.0 * h].iter().map(|d| self.point(t + d, zeta)).collect::<Result<_>>()?;
        cols.push((0..=n).map(|j| (8.0 * (pts[0][j] - pts[1][j]) - (pts[2][j] - pts[3][j])) / (12.0 * h)).collect());
        Ok(cols)
    }

    /// `Im(e^{-i phase} det(frame))` at `(t, zeta)`.
    pub fn phase_defect(&self, phase: f64, t: f64, zeta: &[f64], h: f64) -> Result<f64> {
        let frame = self.tangent_frame(t, zeta, h)?;
        Ok((Complex64::from_polar(1.0, -phase) * det(frame)).im)
    }
}

/// Phase of the quadrics: the graph phase turned by `i^{n+1}`.
pub fn quadric_phase(n: usize, theta: f64) -> f64 {
    (theta + (n + 1) as f64 * FRAC_PI_2).rem_euclid(TAU)
}

/// Determinant by Gaussian elimination with partial pivoting; `cols` are the columns.
pub fn det(mut cols: Vec<Vec<Complex64>>) -> Complex64 {
    let m = cols.len();
    let mut out = Complex64::new(1.0, 0.0);
    for k in 0..m {
        let piv = (k..m).max_by(|&a, &b| cols[a][k].norm().total_cmp(&cols[b][k].norm())).expect("nonempty");
        if cols[piv][k].norm() == 0.0 {
            return Complex64::new(0.0, 0.0);
        }
        if piv != k {
            cols.swap(piv, k);
            out = -out;
        }
        out *= cols[k][k];
        for c in k + 1..m {
            let f = cols[c][k] / cols[k][k];
            for r in k..m {
                let v = cols[k][r];
                cols[c][r] -= f * v;
            }
        }
    }
    out
}

/// CSV `re(z_1),im(z_1),...,re(z_{n+1}),im(z_{n+1})`.
pub fn point_cloud_csv(points: &[Vec<Complex64>]) -> String {
    let mut out = String::new();
    if let Some(first) = points.first() {
        let head: Vec<String> = (1..=first.len()).flat_map(|k| [format!("re_z{k}"), format!("im_z{k}")]).collect();
        out.push_str(&head.join(","));
        out.push('\n');
    }
    for p in points {
        let row: Vec<String> = p.iter().flat_map(|z| [format!("{:.16e}", z.re), format!("{:.16e}", z.im)]).collect();
        let _ = writeln!(out, "{}", row.join(","));
    }
    out
}
