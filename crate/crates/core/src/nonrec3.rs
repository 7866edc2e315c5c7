//! Three-dimensional equations that are not of recursive type, `c_3 c_1 = c_2^2`.
//!
//! Two extra first integrals exist: `(p_1 + a) R_1 - (p_j + a) R_j` when `c_3 != 0`
//! (with `a = c_2 / c_3`), and `R_1 - R_j` when `c_3 = 0`. Together with
//! `R_1 R_2 R_3 F^2 = c` they pin the remaining unknown to a root of a cubic, and the
//! system reduces to three autonomous equations for `p`.

use std::cell::Cell;
use std::ops::ControlFlow;

use serde::{Deserialize, Serialize};

use crate::equations::{detect_recursive, HessianCoefficients, Recursion};
use crate::error::{Error, Result};
use crate::ode::integrator::{self, Fault, Options, Outcome};
use crate::ode::{SystemState, Termination, Trajectory, BLOWUP};
use crate::poly;
use crate::symfun::poly_value;

/// Relative tolerance on `c_3 c_1 - c_2^2`.
pub const DEGENERACY_TOL: f64 = 1e-12;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum Kind {
    /// `F = c_3 (p_1 + a)(p_2 + a)(p_3 + a) + (c_0 - c_3 a^3)`
    CubicShift { a: f64 },
    /// `F = c_1 (p_1 + p_2 + p_3) + c_0`
    Linear,
}

#[derive(Debug, Clone, PartialEq)]
pub struct NonRec3Case {
    pub kind: Kind,
    pub h: HessianCoefficients,
}

#[derive(Debug, Clone, PartialEq)]
pub enum Detect3 {
    Recursive(Recursion),
    NonRecursive(NonRec3Case),
}

pub fn detect3(h: &HessianCoefficients) -> Result<Detect3> {
    if h.n() != 3 {
        return Err(Error::InvalidInput(format!("need n = 3, got {}", h.n())));
    }
    let c = h.f_coeffs();
    let scale = c.iter().fold(0.0_f64, |m, v| m.max(v.abs()));
    if scale == 0.0 {
        return Err(Error::InvalidInput("F vanishes identically".into()));
    }
    if (c[3] * c[1] - c[2] * c[2]).abs() > DEGENERACY_TOL * scale * scale {
        return Ok(Detect3::Recursive(detect_recursive(h)?));
    }
    let kind = if c[3] != 0.0 { Kind::CubicShift { a: c[2] / c[3] } } else { Kind::Linear };
    Ok(Detect3::NonRecursive(NonRec3Case { kind, h: h.clone() }))
}

/// `c`, `kappa_2`, `kappa_3` fixed by a seed.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Constants3 {
    pub c: f64,
    pub kappa: [f64; 2],
}

/// The tracked root and its rate of change with s.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Branch {
    pub s: f64,
    pub root: f64,
    pub rate: f64,
}

impl NonRec3Case {
    fn coeffs(&self) -> &[f64] {
        self.h.f_coeffs()
    }

    /// F in the factored form of the case.
    pub fn f(&self, p: &[f64]) -> f64 {
        let c = self.coeffs();
        match self.kind {
            Kind::CubicShift { a } => c[3] * p.iter().map(|x| x + a).product::<f64>() + (c[0] - c[3] * a * a * a),
            Kind::Linear => c[1] * p.iter().sum::<f64>() + c[0],
        }
    }

    fn weight(&self, x: f64) -> f64 {
        match self.kind {
            Kind::CubicShift { a } => x + a,
            Kind::Linear => 1.0,
        }
    }

    /// `xi_j = (p_j + a) R_j`, or `R_j` in the linear case.
    pub fn xi(&self, st: &SystemState) -> [f64; 3] {
        [0, 1, 2].map(|j| self.weight(st.p[j]) * st.big_r[j])
    }

    /// Right side of the cubic: `c prod (p_j + a) / F^2`, or `c / F^2`.
    pub fn cubic_rhs(&self, k: &Constants3, p: &[f64]) -> f64 {
        let f = self.f(p);
        k.c * p.iter().map(|&x| self.weight(x)).product::<f64>() / (f * f)
    }

    /// Ascending coefficients of `y (y - kappa_2)(y - kappa_3) - rhs`.
    pub fn cubic(&self, k: &Constants3, p: &[f64]) -> [f64; 4] {
        let [k2, k3] = k.kappa;
        [-self.cubic_rhs(k, p), k2 * k3, -(k2 + k3), 1.0]
    }

    /// `d root / ds`: `1 - 2 c_3 prod (p + a) / F` or `-2 c_1 / F`.
    pub fn root_rate(&self, p: &[f64]) -> f64 {
        let c = self.coeffs();
        let f = self.f(p);
        match self.kind {
            Kind::CubicShift { a } => 1.0 - 2.0 * c[3] * p.iter().map(|x| x + a).product::<f64>() / f,
            Kind::Linear => -2.0 * c[1] / f,
        }
    }

    /// Cubic residual at a root, relative to the size of its terms.
    pub fn cubic_residual(&self, k: &Constants3, p: &[f64], root: f64) -> f64 {
        let [k2, k3] = k.kappa;
        let lhs = root * (root - k2) * (root - k3);
        let rhs = self.cubic_rhs(k, p);
        (lhs - rhs).abs() / (1.0 + lhs.abs() + rhs.abs())
    }

    pub fn constants(&self, st: &SystemState) -> Result<Constants3> {
        st.validate(3)?;
        let f = poly_value(self.coeffs(), &st.p);
        if f == 0.0 {
            return Err(Error::SingularField { s: st.s });
        }
        let [i2, i3] = first_integrals3(self, st);
        Ok(Constants3 { c: st.big_r.iter().product::<f64>() * f * f, kappa: [i2, i3] })
    }
}

/// `xi_1 - xi_j` for `j = 2, 3`.
pub fn first_integrals3(case: &NonRec3Case, st: &SystemState) -> [f64; 2] {
    let x = case.xi(st);
    [x[0] - x[1], x[0] - x[2]]
}

/// The real root of the cubic at `p` closest to `prev.root`. Fails if it moved further
/// than `10 |rate| |ds|` (plus a small floor) or sits within `1e-8` of another root.
pub fn track_root(case: &NonRec3Case, k: &Constants3, p: &[f64], s: f64, prev: &Branch) -> Result<Branch> {
    let roots = poly::real_roots(&case.cubic(k, p));
    let (idx, best) = roots
        .iter()
        .enumerate()
        .min_by(|a, b| (a.1.value - prev.root).abs().total_cmp(&(b.1.value - prev.root).abs()))
        .ok_or(Error::BranchLoss { s })?;
    let root = best.value;
    let ds = (s - prev.s).abs();
    let rate = case.root_rate(p);
    let window = 10.0 * prev.rate.abs().max(rate.abs()) * ds + 1e-9 * (1.0 + prev.root.abs());
    if (root - prev.root).abs() > window {
        return Err(Error::BranchLoss { s });
    }
    let gap = roots
        .iter()
        .enumerate()
        .filter(|&(j, _)| j != idx)
        .map(|(_, r)| (r.value - root).abs())
        .fold(f64::INFINITY, f64::min);
    if best.touching || gap < 1e-8 * (1.0 + root.abs()) {
        return Err(Error::BranchCollision { s, gap: if best.touching { 0.0 } else { gap } });
    }
    Ok(Branch { s, root, rate })
}

/// Result of the reduced integration.
#[derive(Debug, Clone, PartialEq)]
pub struct Reduced3 {
    /// Full states rebuilt from `p` and the tracked root.
    pub traj: Trajectory,
    pub roots: Vec<f64>,
    pub constants: Constants3,
    pub max_cubic_residual: f64,
}

/// Integrates `p_1' = w(p_1) / y`, `p_j' = w(p_j) / (y - kappa_j)` with `y` the tracked root,
/// together with `r'' = -G / F`.
pub fn integrate3(case: &NonRec3Case, init: &SystemState, s_end: f64, opts: &Options) -> Result<Reduced3> {
    let k = case.constants(init)?;
    if let Some(j) = (0..3).find(|&j| case.weight(init.p[j]) == 0.0) {
        return Err(Error::Degenerate { s: init.s, reason: format!("p_{} = -a", j + 1) });
    }
    let root0 = case.xi(init)[0];
    let mut branch = Branch { s: init.s, root: root0, rate: case.root_rate(&init.p) };
    // Confirms the seed is a simple root of its own cubic.
    branch = track_root(case, &k, &init.p, init.s, &Branch { rate: 0.0, ..branch })?;
    let witness = Cell::new(branch.root);
    let [k2, k3] = k.kappa;
    let g = case.h.g_coeffs();

    let field = |y: &[f64], dy: &mut [f64]| -> std::result::Result<f64, Fault> {
        let p = &y[..3];
        let roots = poly::real_roots(&case.cubic(&k, p));
        let w = witness.get();
        let root = roots
            .iter()
            .map(|r| r.value)
            .min_by(|a, b| (a - w).abs().total_cmp(&(b - w).abs()))
            .ok_or(Fault)?;
        let den = [root, root - k2, root - k3];
        let f = case.f(p);
        if den.contains(&0.0) || f == 0.0 || !f.is_finite() {
            return Err(Fault);
        }
        for j in 0..3 {
            dy[j] = case.weight(p[j]) / den[j];
        }
        dy[3] = y[4];
        dy[4] = -poly_value(&g, p) / f;
        Ok(root)
    };

    let state_of = |s: f64, y: &[f64], root: f64| SystemState {
        s,
        p: y[..3].to_vec(),
        big_r: [root, root - k2, root - k3].iter().zip(&y[..3]).map(|(d, &p)| d / case.weight(p)).collect(),
        r: y[3],
        rprime: y[4],
    };

    let mut states = vec![init.clone()];
    let mut roots = vec![branch.root];
    let mut worst = case.cubic_residual(&k, &init.p, branch.root);
    let last_fault = Cell::new(false);
    let y0 = [init.p[0], init.p[1], init.p[2], init.r, init.rprime];
    let out = integrator::solve(
        |_, y, dy| {
            let r = field(y, dy).map(|_| ());
            last_fault.set(r.is_err());
            r
        },
        init.s,
        &y0,
        s_end,
        opts,
        |step| {
            let next = match track_root(case, &k, &step.y1[..3], step.t1, &branch) {
                Ok(b) => b,
                Err(e) => return ControlFlow::Break(Err(e)),
            };
            branch = next;
            witness.set(next.root);
            worst = worst.max(case.cubic_residual(&k, &step.y1[..3], next.root));
            let st = state_of(step.t1, step.y1, next.root);
            let big = st.p.iter().chain(&st.big_r).fold(0.0_f64, |m, v| m.max(v.abs()));
            states.push(st);
            roots.push(next.root);
            if big > BLOWUP {
                return ControlFlow::Break(Ok(Termination::BlowUp { s: step.t1 }));
            }
            ControlFlow::Continue(())
        },
    );
    let termination = match out {
        Outcome::Reached => Termination::ReachedEnd,
        Outcome::Stopped(t) => t?,
        Outcome::Underflow { t } if last_fault.get() => Termination::StepUnderflow { s: t },
        Outcome::Underflow { t } => Termination::BlowUp { s: t },
        Outcome::Fault { t } => return Err(Error::SingularField { s: t }),
    };
    let traj = Trajectory::from_states(&case.h, &states, termination)?;
    Ok(Reduced3 { traj, roots, constants: k, max_cubic_residual: worst })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::ode::integrate;

    fn h(c: [f64; 4]) -> HessianCoefficients {
        HessianCoefficients::new(0.5, c.to_vec()).unwrap()
    }

    fn case_of(c: [f64; 4]) -> NonRec3Case {
        match detect3(&h(c)).unwrap() {
            Detect3::NonRecursive(k) => k,
            other => panic!("{other:?}"),
        }
    }

    #[test]
    fn detection() {
        assert_eq!(case_of([0.0, 0.0, 0.0, 1.0]).kind, Kind::CubicShift { a: 0.0 });
        assert_eq!(case_of([1.0, 2.0, 0.0, 0.0]).kind, Kind::Linear);
        assert!(matches!(detect3(&h([1.0, 2.0, 3.0, 1.0])).unwrap(), Detect3::Recursive(_)));
        assert!(matches!(HessianCoefficients::new(1.0, vec![0.0; 4]), Err(Error::ZeroPolynomial)));
        assert!(detect3(&HessianCoefficients::new(0.0, vec![1.0, 1.0]).unwrap()).is_err());
    }

    #[test]
    fn factored_form_matches() {
        let (c3, a, c0) = (1.7, -0.4, 0.3);
        let k = case_of([c0, c3 * a * a, c3 * a, c3]);
        for p in [[0.1, 0.2, 0.3], [-1.0, 2.0, 0.5]] {
            let raw = poly_value(k.h.f_coeffs(), &p);
            assert!((k.f(&p) - raw).abs() <= 1e-12 * (1.0 + raw.abs()));
        }
    }

    #[test]
    fn first_integral_examples() {
        let k = case_of([0.0, 0.0, 0.0, 1.0]);
        let st = SystemState { s: 0.0, p: vec![1.0, 2.0, 3.0], big_r: vec![6.0, 3.0, 2.0], r: 0.0, rprime: 0.0 };
        assert_eq!(first_integrals3(&k, &st), [0.0, 0.0]);
        let l = case_of([1.0, 2.0, 0.0, 0.0]);
        let st = SystemState { big_r: vec![5.0; 3], ..st };
        assert_eq!(first_integrals3(&l, &st), [0.0, 0.0]);
    }

    #[test]
    fn zero_offsets_give_cube_root() {
        let k = case_of([0.0, 0.0, 0.0, 1.0]);
        let st = SystemState { s: 0.0, p: vec![1.0, 2.0, 3.0], big_r: vec![6.0, 3.0, 2.0], r: 0.0, rprime: 0.0 };
        let c = k.constants(&st).unwrap();
        let p = [1.1, 1.9, 2.5];
        let b = track_root(&k, &c, &p, 0.1, &Branch { s: 0.0, root: 6.0, rate: 100.0 }).unwrap();
        assert!((b.root - k.cubic_rhs(&c, &p).cbrt()).abs() < 1e-12);
    }

    fn compare(case: &NonRec3Case, init: &SystemState) -> (f64, Reduced3) {
        let opts = Options::default();
        let red = integrate3(case, init, 1.0, &opts).unwrap();
        let full = integrate(&case.h, init, 1.0, &opts).unwrap();
        let mut worst = 0.0_f64;
        for st in red.traj.states() {
            if let Some(fs) = full.at(st.s) {
                for j in 0..3 {
                    worst = worst.max((st.p[j] - fs.p[j]).abs() / (1.0 + fs.p[j].abs()));
                }
            }
        }
        (worst, red)
    }

    #[test]
    fn symmetric_seeds_match_full_system() {
        let lin = case_of([0.0, 1.0, 0.0, 0.0]);
        let st = SystemState { s: 0.0, p: vec![1.0; 3], big_r: vec![2.0; 3], r: 0.0, rprime: 0.0 };
        let (d, red) = compare(&lin, &st);
        assert!(d < 1e-7, "{d}");
        assert!(red.max_cubic_residual < 1e-8);
        for s in red.traj.states() {
            assert!((s.p[0] - s.p[1]).abs() < 1e-12 && (s.p[1] - s.p[2]).abs() < 1e-12);
        }
        let cub = case_of([0.0, 0.0, 0.0, 1.0]);
        let st = SystemState { s: 0.0, p: vec![1.0; 3], big_r: vec![3.0; 3], r: 0.0, rprime: 0.0 };
        let (d, red) = compare(&cub, &st);
        assert!(d < 1e-7, "{d}");
        assert!(red.max_cubic_residual < 1e-8);
    }

    #[test]
    fn asymmetric_seed() {
        let case = case_of([0.4, 1.5 * 0.81, 1.5 * 0.9, 1.5]);
        let st = SystemState { s: 0.0, p: vec![0.2, -0.1, 0.4], big_r: vec![2.0, 2.5, 3.0], r: 0.0, rprime: 0.1 };
        let (d, red) = compare(&case, &st);
        assert!(d < 1e-7, "{d}");
        let k0 = first_integrals3(&case, &st);
        for s in red.traj.states() {
            let k = first_integrals3(&case, &s);
            assert!((k[0] - k0[0]).abs() < 1e-6 && (k[1] - k0[1]).abs() < 1e-6);
        }
    }

    #[test]
    fn degenerate_seed_halts() {
        let case = case_of([0.0, 0.0, 0.0, 1.0]);
        let st = SystemState { s: 0.0, p: vec![0.0, 1.0, 2.0], big_r: vec![1.0; 3], r: 0.0, rprime: 0.0 };
        assert!(matches!(integrate3(&case, &st, 1.0, &Options::default()), Err(Error::SingularField { .. } | Error::Degenerate { .. })));
    }
}
