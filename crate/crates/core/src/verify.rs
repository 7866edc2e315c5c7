//! PDE residuals of candidate solutions on sample grids.
//!
//! Every check rebuilds the arrowhead Hessian from sampler data and evaluates
//! the equation from its characteristic polynomial, independently of the ODE
//! that produced the sampler.

use num_complex::Complex64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::arrowhead::{assemble, ArrowheadMatrix};
use crate::dhym::{det_i_plus_ih, det_i_plus_ih_sigmas};
use crate::equations::HessianCoefficients;
use crate::error::{Error, Result};
use crate::families::{AnsatzData, Sampler};
use crate::ode::{vector_field, Trajectory};

/// Largest number of axes swept as a full tensor grid.
pub const FULL_SWEEP_AXES: usize = 6;
/// Monte Carlo sample size beyond that.
pub const MONTE_CARLO_POINTS: usize = 10_000;
/// Allowed disagreement between the two determinant evaluations.
pub const METHOD_TOLERANCE: f64 = 1e-9;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Axis {
    pub min: f64,
    pub max: f64,
    pub count: usize,
}

impl Axis {
    pub fn new(min: f64, max: f64, count: usize) -> Self {
        Self { min, max, count }
    }

    pub fn value(&self, i: usize) -> f64 {
        if self.count <= 1 {
            return self.min;
        }
        self.min + (self.max - self.min) * i as f64 / (self.count - 1) as f64
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum Sampling {
    Tensor,
    MonteCarlo { points: usize, seed: u64 },
}

/// Box in `(x_1, ..., x_n, s)`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Grid {
    pub x: Vec<Axis>,
    pub s: Axis,
    pub sampling: Sampling,
}

impl Grid {
    /// `|x_j| <= x_half`, `s in [s_min, s_max]`, `count` points per axis;
    /// switches to Monte Carlo when there are more than six axes.
    pub fn cube(n: usize, x_half: f64, s_min: f64, s_max: f64, count: usize, seed: u64) -> Self {
        let sampling = if n < FULL_SWEEP_AXES {
            Sampling::Tensor
        } else {
            Sampling::MonteCarlo { points: MONTE_CARLO_POINTS, seed }
        };
        Self { x: vec![Axis::new(-x_half, x_half, count); n], s: Axis::new(s_min, s_max, count), sampling }
    }

    pub fn n(&self) -> usize {
        self.x.len()
    }

    pub fn len(&self) -> usize {
        match self.sampling {
            Sampling::Tensor => self.x.iter().chain([&self.s]).map(|a| a.count).product(),
            Sampling::MonteCarlo { points, .. } => points,
        }
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    /// Points grouped by s, each group as `(s, flat x coordinates)`.
    fn slices(&self) -> Vec<(f64, Vec<f64>)> {
        match self.sampling {
            Sampling::Tensor => {
                let mut xs = vec![Vec::new()];
                for ax in &self.x {
                    xs = xs
                        .into_iter()
                        .flat_map(|pre: Vec<f64>| {
                            (0..ax.count).map(move |i| {
                                let mut v = pre.clone();
                                v.push(ax.value(i));
                                v
                            })
                        })
                        .collect();
                }
                let flat: Vec<f64> = xs.concat();
                (0..self.s.count).map(|i| (self.s.value(i), flat.clone())).collect()
            }
            Sampling::MonteCarlo { points, seed } => {
                let mut rng = ChaCha8Rng::seed_from_u64(seed);
                let mut draw = |a: &Axis| if a.max > a.min { rng.gen_range(a.min..=a.max) } else { a.min };
                (0..points)
                    .map(|_| {
                        let x: Vec<f64> = self.x.iter().map(&mut draw).collect();
                        (draw(&self.s), x)
                    })
                    .collect()
            }
        }
    }
}

/// A point of the grid where an extreme was attained.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GridPoint {
    pub x: Vec<f64>,
    pub s: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ResidualReport {
    pub grid: Grid,
    /// Signed residual per point, in grid order (s outermost).
    pub residuals: Vec<f64>,
    pub max_abs_residual: f64,
    /// Max of `|residual| / (1 + sum_k |c_{k-1} sigma_k|)`.
    pub scaled_max: f64,
    pub worst: Option<GridPoint>,
    /// `Re(e^{-i theta} det(I + i H)) > 0` everywhere; only for the determinant form.
    pub positivity_ok: Option<bool>,
    pub phase_min: Option<f64>,
    pub phase_max: Option<f64>,
    /// Largest scaled coefficient of the x-expansion (`Xi_0`, `Xi_i` and the linear terms).
    pub xi_split_max: Option<f64>,
    /// Largest scaled gap between the two determinant evaluations.
    pub method_gap: Option<f64>,
}

#[derive(Debug, Clone, Copy, Default)]
struct PointEval {
    residual: f64,
    scaled: f64,
    phase: Option<f64>,
    positive: Option<bool>,
    gap: Option<f64>,
}

struct SliceEval {
    points: Vec<PointEval>,
    xi: Option<f64>,
}

fn sweep<S, E, X>(sampler: &S, grid: &Grid, eval: E, split: X) -> Result<(Vec<SliceEval>, Vec<(f64, Vec<f64>)>)>
where
    S: Sampler + ?Sized,
    E: Fn(&ArrowheadMatrix) -> PointEval + Sync,
    X: Fn(&AnsatzData) -> Option<f64> + Sync,
{
    let n = grid.n();
    if sampler.n() != n {
        return Err(Error::InvalidInput(format!("grid has {n} x-axes but the sampler has n = {}", sampler.n())));
    }
    let slices = grid.slices();
    let out: Vec<Result<SliceEval>> = slices
        .par_iter()
        .map(|(s, xs)| {
            let d = sampler.at(*s)?;
            let pt = d.point();
            let mut points = Vec::with_capacity(xs.len() / n.max(1));
            for x in xs.chunks(n.max(1)) {
                let x = if n == 0 { &[][..] } else { x };
                points.push(eval(&assemble(&pt, x)?));
            }
            Ok(SliceEval { points, xi: split(&d) })
        })
        .collect();
    Ok((out.into_iter().collect::<Result<Vec<_>>>()?, slices))
}

fn reduce(grid: &Grid, evals: Vec<SliceEval>, slices: &[(f64, Vec<f64>)]) -> ResidualReport {
    let n = grid.n().max(1);
    let mut rep = ResidualReport {
        grid: grid.clone(),
        residuals: Vec::with_capacity(grid.len()),
        max_abs_residual: 0.0,
        scaled_max: 0.0,
        worst: None,
        positivity_ok: None,
        phase_min: None,
        phase_max: None,
        xi_split_max: None,
        method_gap: None,
    };
    let upd = |slot: &mut Option<f64>, v: f64, f: fn(f64, f64) -> f64| *slot = Some(slot.map_or(v, |o| f(o, v)));
    for (ev, (s, xs)) in evals.into_iter().zip(slices) {
        if let Some(x) = ev.xi {
            upd(&mut rep.xi_split_max, x, f64::max);
        }
        for (k, pe) in ev.points.into_iter().enumerate() {
            rep.residuals.push(pe.residual);
            rep.max_abs_residual = rep.max_abs_residual.max(pe.residual.abs());
            if pe.scaled > rep.scaled_max || rep.worst.is_none() || pe.scaled.is_nan() {
                rep.scaled_max = if pe.scaled.is_nan() { f64::NAN } else { pe.scaled.max(rep.scaled_max) };
                rep.worst = Some(GridPoint { x: xs.get(k * n..(k + 1) * n).map_or(vec![], |v| v.to_vec()), s: *s });
            }
            if let Some(ph) = pe.phase {
                upd(&mut rep.phase_min, ph, f64::min);
                upd(&mut rep.phase_max, ph, f64::max);
            }
            if let Some(p) = pe.positive {
                rep.positivity_ok = Some(rep.positivity_ok.unwrap_or(true) && p);
            }
            if let Some(g) = pe.gap {
                upd(&mut rep.method_gap, g, f64::max);
            }
        }
    }
    rep
}

/// Coefficients of the x-expansion of the equation at one s, each scaled by its terms:
/// `Xi_0 = G + r'' F - sum q_i'^2 dF_i`, `Xi_i = p_i'' F / 2 - p_i'^2 dF_i` and
/// the linear ones `q_i'' F - 2 p_i' q_i' dF_i`.
pub fn xi_split(h: &HessianCoefficients, d: &AnsatzData) -> Result<Vec<f64>> {
    let (f, grad) = h.f_eval(&d.p)?;
    let g = h.g_value(&d.p);
    let n = d.p.len();
    let mut out = Vec::with_capacity(2 * n + 1);
    let mut xi0 = g + d.rpp * f;
    let mut sc0 = 1.0 + g.abs() + (d.rpp * f).abs();
    for i in 0..n {
        let t = d.dq[i] * d.dq[i] * grad[i];
        xi0 -= t;
        sc0 += t.abs();
    }
    out.push(xi0 / sc0);
    for i in 0..n {
        let (a, b) = (0.5 * d.ddp[i] * f, d.dp[i] * d.dp[i] * grad[i]);
        out.push((a - b) / (1.0 + a.abs() + b.abs()));
        let (a, b) = (d.ddq[i] * f, 2.0 * d.dp[i] * d.dq[i] * grad[i]);
        out.push((a - b) / (1.0 + a.abs() + b.abs()));
    }
    Ok(out)
}

/// `sum_k c_{k-1} sigma_k(H)` on the grid, with the Xi split.
pub fn hessian_residual<S: Sampler + ?Sized>(h: &HessianCoefficients, sampler: &S, grid: &Grid) -> Result<ResidualReport> {
    if h.n() != grid.n() {
        return Err(Error::InvalidInput("equation and grid dimensions differ".into()));
    }
    let eval = |m: &ArrowheadMatrix| {
        let sig = m.sigmas();
        let mut res = 0.0;
        let mut scale = 1.0;
        for (k, s) in sig.iter().enumerate() {
            let t = h.coeff(k as isize - 1) * s;
            res += t;
            scale += t.abs();
        }
        PointEval { residual: res, scaled: res.abs() / scale, ..Default::default() }
    };
    let split = |d: &AnsatzData| xi_split(h, d).ok().map(|v| v.iter().fold(0.0, |a: f64, b| a.max(b.abs())));
    let (ev, slices) = sweep(sampler, grid, eval, split)?;
    Ok(reduce(grid, ev, &slices))
}

fn sigma_scale(m: &ArrowheadMatrix) -> f64 {
    1.0 + m.sigmas().iter().map(|s| s.abs()).sum::<f64>()
}

/// `Im(e^{-i theta} det(I + i H))` from the product formula, cross-checked against
/// `sum_k i^k sigma_k(H)`; also the positivity branch and the phase `sum arctan lambda`.
pub fn lyz_residual<S: Sampler + ?Sized>(theta: f64, sampler: &S, grid: &Grid) -> Result<ResidualReport> {
    let rot = Complex64::from_polar(1.0, -theta);
    let eval = |m: &ArrowheadMatrix| {
        let a = rot * det_i_plus_ih(m);
        let b = rot * det_i_plus_ih_sigmas(m);
        let scale = sigma_scale(m);
        PointEval {
            residual: a.im,
            scaled: a.im.abs() / scale,
            phase: Some(m.phase()),
            positive: Some(a.re > 0.0),
            gap: Some((a - b).norm() / scale),
        }
    };
    let (ev, slices) = sweep(sampler, grid, eval, |_| None)?;
    let rep = reduce(grid, ev, &slices);
    if let Some(g) = rep.method_gap {
        if !(g <= METHOD_TOLERANCE) {
            return Err(Error::InternalInconsistency(format!(
                "determinant evaluations differ by {g:e} (scaled)"
            )));
        }
    }
    Ok(rep)
}

/// Special Lagrangian residual `Im(e^{-i theta} det(I + i D^2 f))` of the real potential
/// `f = sum (p_j x_j^2 / 2 + q_j x_j) + r`, from the characteristic polynomial alone.
pub fn slag_residual<S: Sampler + ?Sized>(theta: f64, sampler: &S, grid: &Grid) -> Result<ResidualReport> {
    let rot = Complex64::from_polar(1.0, -theta);
    let eval = |m: &ArrowheadMatrix| {
        let z = rot * det_i_plus_ih_sigmas(m);
        PointEval {
            residual: z.im,
            scaled: z.im.abs() / sigma_scale(m),
            positive: Some(z.re > 0.0),
            ..Default::default()
        }
    };
    let (ev, slices) = sweep(sampler, grid, eval, |_| None)?;
    Ok(reduce(grid, ev, &slices))
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PhaseScan {
    pub min: f64,
    pub max: f64,
    pub argmin: GridPoint,
    pub argmax: GridPoint,
}

/// Range of `sum_j arctan lambda_j(H)` over the grid.
pub fn phase_scan<S: Sampler + ?Sized>(sampler: &S, grid: &Grid) -> Result<PhaseScan> {
    let eval = |m: &ArrowheadMatrix| PointEval { phase: Some(m.phase()), ..Default::default() };
    let (ev, slices) = sweep(sampler, grid, eval, |_| None)?;
    let n = grid.n().max(1);
    let mut best: Option<PhaseScan> = None;
    for (e, (s, xs)) in ev.into_iter().zip(&slices) {
        for (k, pe) in e.points.into_iter().enumerate() {
            let ph = pe.phase.unwrap_or(f64::NAN);
            let gp = || GridPoint { x: xs.get(k * n..(k + 1) * n).map_or(vec![], |v| v.to_vec()), s: *s };
            match &mut best {
                None => best = Some(PhaseScan { min: ph, max: ph, argmin: gp(), argmax: gp() }),
                Some(b) => {
                    if ph < b.min {
                        b.min = ph;
                        b.argmin = gp();
                    }
                    if ph > b.max {
                        b.max = ph;
                        b.argmax = gp();
                    }
                }
            }
        }
    }
    best.ok_or_else(|| Error::InvalidInput("empty grid".into()))
}

/// Ansatz data along an integrated trajectory: dense output for the state, the field for
/// `p''` and `r''`. The linear coefficients vanish.
pub struct TrajectorySampler<'a> {
    pub h: &'a HessianCoefficients,
    pub traj: &'a Trajectory,
}

impl Sampler for TrajectorySampler<'_> {
    fn n(&self) -> usize {
        self.traj.n
    }

    fn at(&self, s: f64) -> Result<AnsatzData> {
        let st = self.traj.at(s).ok_or(Error::DomainBoundary { s })?;
        let fv = vector_field(self.h, &st)?;
        let n = st.n();
        Ok(AnsatzData {
            s,
            dp: st.big_r.iter().map(|r| 1.0 / r).collect(),
            ddp: (0..n).map(|j| -fv.d_big_r[j] / (st.big_r[j] * st.big_r[j])).collect(),
            q: vec![0.0; n],
            dq: vec![0.0; n],
            ddq: vec![0.0; n],
            r: st.r,
            rp: st.rprime,
            rpp: fv.rpp,
            p: st.p,
        })
    }
}
