//! Dormand–Prince 5(4) with cubic Hermite dense output.

use std::ops::ControlFlow;

/// Signals that the right-hand side cannot be evaluated at a stage.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct Fault;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Options {
    pub rtol: f64,
    pub atol: f64,
    pub max_step: f64,
}

impl Default for Options {
    fn default() -> Self {
        Self { rtol: 1e-10, atol: 1e-12, max_step: 0.05 }
    }
}

/// One accepted step, with endpoint values and derivatives.
#[derive(Debug, Clone, Copy)]
pub struct Step<'a> {
    pub t0: f64,
    pub y0: &'a [f64],
    pub f0: &'a [f64],
    pub t1: f64,
    pub y1: &'a [f64],
    pub f1: &'a [f64],
}

impl Step<'_> {
    pub fn interpolate(&self, t: f64) -> Vec<f64> {
        hermite(self.t0, self.y0, self.f0, self.t1, self.y1, self.f1, t)
    }
}

/// Cubic Hermite interpolant through `(t0, y0, f0)` and `(t1, y1, f1)`.
pub fn hermite(t0: f64, y0: &[f64], f0: &[f64], t1: f64, y1: &[f64], f1: &[f64], t: f64) -> Vec<f64> {
    let h = t1 - t0;
    if h == 0.0 {
        return y0.to_vec();
    }
    let th = (t - t0) / h;
    let h00 = (1.0 + 2.0 * th) * (1.0 - th) * (1.0 - th);
    let h10 = th * (1.0 - th) * (1.0 - th);
    let h01 = th * th * (3.0 - 2.0 * th);
    let h11 = th * th * (th - 1.0);
    (0..y0.len())
        .map(|i| h00 * y0[i] + h10 * h * f0[i] + h01 * y1[i] + h11 * h * f1[i])
        .collect()
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Outcome<B> {
    Reached,
    Stopped(B),
    /// Step size fell below `1e-14 (1 + |t|)`.
    Underflow { t: f64 },
    /// The right-hand side failed at the initial point.
    Fault { t: f64 },
}

const C: [f64; 7] = [0.0, 1.0 / 5.0, 3.0 / 10.0, 4.0 / 5.0, 8.0 / 9.0, 1.0, 1.0];
const A: [[f64; 6]; 7] = [
    [0.0; 6],
    [1.0 / 5.0, 0.0, 0.0, 0.0, 0.0, 0.0],
    [3.0 / 40.0, 9.0 / 40.0, 0.0, 0.0, 0.0, 0.0],
    [44.0 / 45.0, -56.0 / 15.0, 32.0 / 9.0, 0.0, 0.0, 0.0],
    [19372.0 / 6561.0, -25360.0 / 2187.0, 64448.0 / 6561.0, -212.0 / 729.0, 0.0, 0.0],
    [9017.0 / 3168.0, -355.0 / 33.0, 46732.0 / 5247.0, 49.0 / 176.0, -5103.0 / 18656.0, 0.0],
    [35.0 / 384.0, 0.0, 500.0 / 1113.0, 125.0 / 192.0, -2187.0 / 6784.0, 11.0 / 84.0],
];
const E: [f64; 7] = [
    71.0 / 57600.0,
    0.0,
    -71.0 / 16695.0,
    71.0 / 1920.0,
    -17253.0 / 339200.0,
    22.0 / 525.0,
    -1.0 / 40.0,
];

/// Integrates `y' = f(t, y)` from `t0` to `t_end` (either direction).
///
/// `observe` sees every accepted step and may stop the integration.
/// Stage faults shrink the step; the run ends with `Underflow` if they persist.
pub fn solve<F, O, B>(mut f: F, t0: f64, y0: &[f64], t_end: f64, opts: &Options, mut observe: O) -> Outcome<B>
where
    F: FnMut(f64, &[f64], &mut [f64]) -> Result<(), Fault>,
    O: FnMut(&Step) -> ControlFlow<B>,
{
    let m = y0.len();
    let dir = if t_end >= t0 { 1.0 } else { -1.0 };
    let mut t = t0;
    let mut y = y0.to_vec();
    let mut k: Vec<Vec<f64>> = vec![vec![0.0; m]; 7];
    if f(t, &y, &mut k[0]).is_err() || k[0].iter().any(|v| !v.is_finite()) {
        return Outcome::Fault { t };
    }
    if t == t_end {
        return Outcome::Reached;
    }

    let norm = |v: &[f64]| v.iter().fold(0.0_f64, |acc, x| acc.max(x.abs()));
    let d0 = norm(&y);
    let d1 = norm(&k[0]);
    let mut h = if d0 > 1e-5 && d1 > 1e-5 { 0.01 * d0 / d1 } else { 1e-4 };
    h = h.min(opts.max_step).min((t_end - t).abs());

    let mut ytmp = vec![0.0; m];
    let mut ynew = vec![0.0; m];
    loop {
        if h < 1e-14 * (1.0 + t.abs()) {
            return Outcome::Underflow { t };
        }
        let last = (t + dir * h - t_end) * dir >= 0.0;
        let hs = if last { t_end - t } else { dir * h };

        let mut ok = true;
        for s in 1..7 {
            for i in 0..m {
                let mut acc = 0.0;
                for (j, kj) in k.iter().enumerate().take(s) {
                    acc += A[s][j] * kj[i];
                }
                ytmp[i] = y[i] + hs * acc;
            }
            if f(t + C[s] * hs, &ytmp, &mut k[s]).is_err() {
                ok = false;
                break;
            }
            if s == 6 {
                ynew.copy_from_slice(&ytmp);
            }
        }

        let err = if ok {
            let mut e = 0.0_f64;
            for i in 0..m {
                let mut acc = 0.0;
                for (j, kj) in k.iter().enumerate() {
                    acc += E[j] * kj[i];
                }
                let sc = opts.atol + opts.rtol * y[i].abs().max(ynew[i].abs());
                e = e.max((hs * acc).abs() / sc);
            }
            if e.is_finite() && ynew.iter().all(|v| v.is_finite()) {
                e
            } else {
                f64::INFINITY
            }
        } else {
            f64::INFINITY
        };

        if err <= 1.0 {
            // FSAL: the seventh stage is f(t + h, ynew).
            let t1 = if last { t_end } else { t + hs };
            let step = Step { t0: t, y0: &y, f0: &k[0], t1, y1: &ynew, f1: &k[6] };
            if let ControlFlow::Break(b) = observe(&step) {
                return Outcome::Stopped(b);
            }
            t = t1;
            y.copy_from_slice(&ynew);
            let (first, rest) = k.split_at_mut(1);
            first[0].copy_from_slice(&rest[5]);
            if last {
                return Outcome::Reached;
            }
            let factor = if err == 0.0 { 5.0 } else { (0.9 * err.powf(-0.2)).clamp(0.2, 5.0) };
            h = (h * factor).min(opts.max_step);
        } else {
            let factor = if err.is_finite() { (0.9 * err.powf(-0.2)).clamp(0.2, 1.0) } else { 0.25 };
            h *= factor;
        }
    }
}
