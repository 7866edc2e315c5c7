//! The theta-angle system: `F_theta = Re(e^{-i theta} prod_j (1 + i p_j))`,
//! its coefficient form and the isotropic reduction.

use std::ops::ControlFlow;

use num_complex::Complex64;

use crate::arrowhead::ArrowheadMatrix;
use crate::equations::{HessianCoefficients, RecursiveSpec};
use crate::error::{Error, Result};
use crate::ode::integrator::{self, Fault, Options, Outcome};
use crate::ode::SystemState;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ThetaSystem {
    pub n: usize,
    pub theta: f64,
}

/// `F_theta`, `F_{theta + pi/2}` and the gradient of `F_theta` at one point.
#[derive(Debug, Clone, PartialEq)]
pub struct ThetaValues {
    pub f: f64,
    pub f_perp: f64,
    pub grad: Vec<f64>,
}

impl ThetaSystem {
    pub fn new(n: usize, theta: f64) -> Result<Self> {
        if n == 0 || !theta.is_finite() {
            return Err(Error::InvalidInput("need n >= 1 and finite theta".into()));
        }
        Ok(Self { n, theta })
    }

    /// `c_k = cos(theta - k pi / 2)`, exact in the quarter-turn part.
    pub fn coeff(&self, k: isize) -> f64 {
        match k.rem_euclid(4) {
            0 => self.theta.cos(),
            1 => self.theta.sin(),
            2 => -self.theta.cos(),
            _ => -self.theta.sin(),
        }
    }

    /// Coefficients `c_{-1}, c_0, ..., c_n`; `c_{-1}` is the constant term of `F_{theta + pi/2}`.
    pub fn coefficients(&self) -> HessianCoefficients {
        let c = (0..=self.n as isize).map(|k| self.coeff(k)).collect();
        HessianCoefficients::new(self.coeff(-1), c).expect("cos/sin never vanish together")
    }

    /// Recursive type `(a0, a1) = (1, 0)` with the top two coefficients.
    pub fn recursive_spec(&self) -> RecursiveSpec {
        let n = self.n as isize;
        RecursiveSpec::new(self.n, 1.0, 0.0, self.coeff(n - 1), self.coeff(n)).expect("valid")
    }

    fn rotation(&self) -> Complex64 {
        Complex64::from_polar(1.0, -self.theta)
    }

    /// One complex product, then real parts.
    pub fn f_theta(&self, p: &[f64]) -> ThetaValues {
        let w = self.rotation() * p.iter().map(|&x| Complex64::new(1.0, x)).product::<Complex64>();
        let grad = p
            .iter()
            .map(|&x| (Complex64::i() * w / Complex64::new(1.0, x)).re)
            .collect();
        ThetaValues { f: w.re, f_perp: w.im, grad }
    }

    /// Residuals of `F_t + F_{t+pi} = 0`, `F_t^2 + F_{t+pi/2}^2 = prod (1 + p_j^2)` and
    /// `p_j F_t - (1 + p_j^2) dF_t/dp_j - F_{t+pi/2} = 0` (max over j), each relative.
    pub fn lemma_residuals(&self, p: &[f64]) -> [f64; 3] {
        let a = self.f_theta(p);
        let b = Self { theta: self.theta + std::f64::consts::PI, ..*self }.f_theta(p);
        let prod: f64 = p.iter().map(|x| 1.0 + x * x).product();
        let r1 = (a.f + b.f).abs() / (1.0 + a.f.abs());
        let r2 = (a.f * a.f + a.f_perp * a.f_perp - prod).abs() / (1.0 + prod);
        let r3 = p
            .iter()
            .zip(&a.grad)
            .map(|(&x, &g)| {
                let terms = (x * a.f).abs() + ((1.0 + x * x) * g).abs() + a.f_perp.abs();
                (x * a.f - (1.0 + x * x) * g - a.f_perp).abs() / (1.0 + terms)
            })
            .fold(0.0, f64::max);
        [r1, r2, r3]
    }

    /// The field written directly in angle form:
    /// `R_j' = -2 (p_j F_t - F_{t+pi/2}) / ((1 + p_j^2) F_t)` and `r'' = -F_{t+pi/2}/F_t`.
    /// Returns `(p', R', r'')`.
    pub fn angle_field(&self, st: &SystemState) -> Result<(Vec<f64>, Vec<f64>, f64)> {
        let v = self.f_theta(&st.p);
        if v.f == 0.0 {
            return Err(Error::SingularField { s: st.s });
        }
        let dr = st.p.iter().map(|&x| -2.0 * (x - v.f_perp / v.f) / (1.0 + x * x)).collect();
        Ok((st.big_r.iter().map(|r| 1.0 / r).collect(), dr, -v.f_perp / v.f))
    }

    /// `xi_j' = 2 F_{t+pi/2} / F_t`, common to every j.
    pub fn xi_derivative(&self, p: &[f64]) -> f64 {
        let v = self.f_theta(p);
        2.0 * v.f_perp / v.f
    }

    /// `e^{-i theta} det(I + i H)`; its imaginary part is the equation, its real part the positivity branch.
    pub fn rotated_det(&self, h: &ArrowheadMatrix) -> Complex64 {
        self.rotation() * det_i_plus_ih(h)
    }
}

/// `det(I + i H) = Phi (1 + i R) - i sum |Q_j|^2 dPhi/dp_j`, `Phi = prod (1 + i P_j)`.
pub fn det_i_plus_ih(h: &ArrowheadMatrix) -> Complex64 {
    let factors: Vec<Complex64> = h.p.iter().map(|&x| Complex64::new(1.0, x)).collect();
    let phi: Complex64 = factors.iter().product();
    let mut out = phi * Complex64::new(1.0, h.r);
    for (j, q) in h.q.iter().enumerate() {
        let w = q.norm_sqr();
        if w == 0.0 {
            continue;
        }
        // |Q_j|^2 prod_{k != j} (1 + i P_k)
        let minor: Complex64 = factors.iter().enumerate().filter(|&(k, _)| k != j).map(|(_, z)| z).product();
        out += minor * w;
    }
    out
}

/// `sum_k i^k sigma_k(H)`, the expansion of `det(I + i H)` from the characteristic polynomial.
pub fn det_i_plus_ih_sigmas(h: &ArrowheadMatrix) -> Complex64 {
    let units = [
        Complex64::new(1.0, 0.0),
        Complex64::new(0.0, 1.0),
        Complex64::new(-1.0, 0.0),
        Complex64::new(0.0, -1.0),
    ];
    h.sigmas().iter().enumerate().map(|(k, s)| units[k % 4] * s).sum()
}

/// Solution of `u' = kappa' cos(u)^{2/n}` for `u = n phi - theta`.
#[derive(Debug, Clone)]
pub struct IsotropicFlow {
    pub n: usize,
    pub theta: f64,
    pub kappa_prime: f64,
    /// Samples `(s, u, u')` in increasing s.
    samples: Vec<(f64, f64, f64)>,
    /// First s > 0 (resp. < 0) where `cos u` reaches zero inside the requested range.
    pub hit_forward: Option<f64>,
    pub hit_backward: Option<f64>,
}

impl IsotropicFlow {
    pub fn phi(&self, s: f64) -> Option<f64> {
        self.u(s).map(|u| (u + self.theta) / self.n as f64)
    }

    pub fn u(&self, s: f64) -> Option<f64> {
        let k = self.samples.partition_point(|x| x.0 < s);
        if k < self.samples.len() && self.samples[k].0 == s {
            return Some(self.samples[k].1);
        }
        if k == 0 || k == self.samples.len() {
            return None;
        }
        let (a, b) = (self.samples[k - 1], self.samples[k]);
        Some(integrator::hermite(a.0, &[a.1], &[a.2], b.0, &[b.1], &[b.2], s)[0])
    }

    /// `r'' = tan(theta - n phi) = -tan u`.
    pub fn rpp(&self, s: f64) -> Option<f64> {
        self.u(s).map(|u| -u.tan())
    }

    pub fn samples(&self) -> &[(f64, f64, f64)] {
        &self.samples
    }
}

/// `(n phi - theta)' = kappa' cos(n phi - theta)^{2/n}` on `[s_min, s_max]` (containing 0),
/// halting where `cos(n phi - theta)` reaches zero.
pub fn isotropic_flow(n: usize, theta: f64, phi0: f64, kappa_prime: f64, s_min: f64, s_max: f64, opts: &Options) -> Result<IsotropicFlow> {
    if n == 0 {
        return Err(Error::InvalidInput("n must be at least 1".into()));
    }
    if !(s_min <= 0.0 && s_max >= 0.0) {
        return Err(Error::InvalidInput("s range must contain 0".into()));
    }
    let u0 = n as f64 * phi0 - theta;
    if u0.cos() <= 0.0 {
        return Err(Error::InvalidStart(format!("cos(n phi0 - theta) = {} <= 0", u0.cos())));
    }
    let expo = 2.0 / n as f64;
    let rhs = |_: f64, y: &[f64], dy: &mut [f64]| {
        let c = y[0].cos();
        if c < 0.0 {
            return Err(Fault);
        }
        dy[0] = kappa_prime * c.powf(expo);
        Ok(())
    };
    let run = |end: f64| -> (Vec<(f64, f64, f64)>, Option<f64>) {
        let mut out = vec![(0.0, u0, kappa_prime * u0.cos().powf(expo))];
        let res: Outcome<f64> = integrator::solve(rhs, 0.0, &[u0], end, opts, |st| {
            out.push((st.t1, st.y1[0], st.f1[0]));
            if st.y1[0].cos() <= 1e-14 {
                return ControlFlow::Break(st.t1);
            }
            ControlFlow::Continue(())
        });
        let hit = match res {
            Outcome::Reached => None,
            Outcome::Stopped(t) | Outcome::Underflow { t } | Outcome::Fault { t } => Some(t),
        };
        (out, hit)
    };
    let (fwd, hit_forward) = run(s_max);
    let (mut bwd, hit_backward) = run(s_min);
    bwd.reverse();
    bwd.pop();
    bwd.extend(fwd);
    Ok(IsotropicFlow { n, theta, kappa_prime, samples: bwd, hit_forward, hit_backward })
}

/// Closed form for n = 2: `u(s) = gd(kappa' s + gd^{-1}(u0))` with `gd(x) = atan(sinh x)`.
pub fn isotropic_n2_exact(theta: f64, phi0: f64, kappa_prime: f64, s: f64) -> f64 {
    let u0 = 2.0 * phi0 - theta;
    let x = kappa_prime * s + u0.tan().asinh();
    (x.sinh().atan() + theta) / 2.0
}

/// Time for `u` to reach `+-pi/2` from `u0`, by quadrature of `du / (kappa' cos^{2/n} u)`;
/// infinite for `n <= 2`.
pub fn isotropic_hitting_time(n: usize, u0: f64, kappa_prime: f64) -> f64 {
    if n <= 2 || kappa_prime == 0.0 {
        return f64::INFINITY;
    }
    let target = std::f64::consts::FRAC_PI_2 * kappa_prime.signum();
    // Substitute v = (target - u)^{1 - 2/n} to remove the endpoint singularity:
    // cos u ~ |target - u| near the end.
    let e = 1.0 - 2.0 / n as f64;
    let d0 = (target - u0).abs();
    let vmax = d0.powf(e);
    let sg = (target - u0).signum();
    let q = crate::quad::integrate(
        |v| {
            if v == 0.0 {
                return 1.0 / e;
            }
            let d = v.powf(1.0 / e);
            let u = target - sg * d;
            // du = d^{2/n} dv / e (in magnitude)
            let ratio = d / u.cos();
            ratio.powf(2.0 / n as f64) / e
        },
        0.0,
        vmax,
        1e-14,
        1e-13,
        2000,
    );
    q.value / kappa_prime.abs()
}
