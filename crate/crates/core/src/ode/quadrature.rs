//! Quadrature for the scalar equation `(xi')^2 = k1 + k2 prod_j (xi - kappa_j)`
//! satisfied by the first coordinate `xi_1` in the recursive case.
//!
//! The motion splits into monotone legs between simple zeros of the radicand
//! (turning points), double zeros (approached asymptotically) and infinity.
//! Leg times are improper integrals of `1/sqrt(P)`; endpoint singularities are
//! removed by substitution before Gauss–Kronrod is applied.

use crate::equations::RecursiveSpec;
use crate::error::{Error, Result};
use crate::poly::{self, RealRoot};
use crate::quad;

const ABS_TOL: f64 = 1e-15;
const REL_TOL: f64 = 1e-13;
const PANELS: usize = 4000;

#[derive(Debug, Clone, Copy, PartialEq)]
enum End {
    Turn(f64),
    Touch(f64),
    Infinity,
}

#[derive(Debug, Clone, Copy, PartialEq)]
enum Weight {
    One,
    /// `1 / |xi - kappa|`
    InvDistance(f64),
}

impl Weight {
    fn at(self, xi: f64) -> f64 {
        match self {
            Self::One => 1.0,
            Self::InvDistance(k) => 1.0 / (xi - k).abs(),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
struct Leg {
    start: f64,
    from_root: bool,
    /// +1 when xi increases along the leg.
    heading: f64,
    end: End,
}

/// Solution of the `xi_1` quadrature from a given start.
#[derive(Debug, Clone)]
pub struct XiQuadrature {
    radicand: Vec<f64>,
    roots: Vec<RealRoot>,
    shifts: Vec<f64>,
    xi0: f64,
    branch: f64,
    start_on_root: bool,
}

impl XiQuadrature {
    /// `shifts` are `kappa_1 = 0, kappa_2, ..., kappa_n`; `branch` picks the sign of `xi'` at `s = 0`.
    pub fn new(k1: f64, k2: f64, shifts: Vec<f64>, xi0: f64, branch: f64) -> Result<Self> {
        if shifts.is_empty() || ![k1, k2, xi0, branch].iter().all(|v| v.is_finite()) {
            return Err(Error::InvalidInput("quadrature data must be finite and non-empty".into()));
        }
        let mut radicand: Vec<f64> = poly::from_roots(&shifts).iter().map(|c| k2 * c).collect();
        radicand[0] += k1;
        let roots = poly::real_roots(&radicand);
        let p0 = poly::eval(&radicand, xi0);
        let tol = 1e-12 * poly::eval_scale(&radicand, xi0);
        if p0 < -tol {
            return Err(Error::InvalidStart(format!("radicand {p0:e} < 0 at xi = {xi0}")));
        }
        let start_on_root = p0 <= tol;
        if start_on_root {
            let dp = poly::eval(&poly::derivative(&radicand), xi0);
            if dp.abs() <= 1e-9 * poly::eval_scale(&poly::derivative(&radicand), xi0) {
                return Err(Error::Degenerate { s: 0.0, reason: "xi starts at a double zero (equilibrium)".into() });
            }
        }
        let branch = if branch < 0.0 { -1.0 } else { 1.0 };
        Ok(Self { radicand, roots, shifts, xi0, branch, start_on_root })
    }

    /// Uses `k1 = a1^2 - 4 a0` and `k2 = 4 (c_{n-1}^2 - a1 c_{n-1} c_n + a0 c_n^2) kappa`.
    pub fn from_spec(spec: &RecursiveSpec, kappa: f64, shifts: Vec<f64>, xi0: f64, branch: f64) -> Result<Self> {
        Self::new(spec.discriminant(), 4.0 * spec.top_form() * kappa, shifts, xi0, branch)
    }

    pub fn radicand(&self, xi: f64) -> f64 {
        poly::eval(&self.radicand, xi)
    }

    pub fn radicand_coeffs(&self) -> &[f64] {
        &self.radicand
    }

    fn degree(&self) -> usize {
        let mut d = self.radicand.len() - 1;
        while d > 0 && self.radicand[d] == 0.0 {
            d -= 1;
        }
        d
    }

    fn first_leg(&self, dir: f64) -> Leg {
        let heading = if self.start_on_root {
            let dp = poly::eval(&poly::derivative(&self.radicand), self.xi0);
            dp.signum()
        } else {
            dir * self.branch
        };
        self.leg_from(self.xi0, self.start_on_root, heading)
    }

    fn leg_from(&self, start: f64, from_root: bool, heading: f64) -> Leg {
        let gap = |r: f64| (r - start) * heading;
        let tol = 1e-9 * (1.0 + start.abs());
        let next = self
            .roots
            .iter()
            .filter(|r| gap(r.value) > if from_root { tol } else { 0.0 })
            .min_by(|a, b| gap(a.value).total_cmp(&gap(b.value)));
        let end = match next {
            Some(r) if r.touching => End::Touch(r.value),
            Some(r) => End::Turn(r.value),
            None => End::Infinity,
        };
        Leg { start, from_root, heading, end }
    }

    fn next_leg(&self, leg: &Leg) -> Option<Leg> {
        match leg.end {
            End::Turn(r) => Some(self.leg_from(r, true, -leg.heading)),
            _ => None,
        }
    }

    // Scale for the tail substitution.
    fn length_scale(&self, a: f64) -> f64 {
        self.shifts.iter().chain(self.roots.iter().map(|r| &r.value)).fold(1.0 + a.abs(), |m, v| m.max(v.abs()))
    }

    /// `int |dxi| w.at(xi) / sqrt(P)` between finite `x` and `y`; `*_root` marks a simple zero at that end.
    fn span(&self, w: Weight, x: f64, x_root: bool, y: f64, y_root: bool) -> f64 {
        if x == y {
            return 0.0;
        }
        if x_root && y_root {
            let m = 0.5 * (x + y);
            return self.span(w, x, true, m, false) + self.span(w, m, false, y, true);
        }
        if y_root {
            return self.span(w, y, true, x, false);
        }
        if x_root {
            let quot = poly::deflate(&self.radicand, x);
            let sg = (y - x).signum();
            let umax = (y - x).abs().sqrt();
            return quad::integrate(
                |u| {
                    let xi = x + sg * u * u;
                    2.0 * w.at(xi) / poly::eval(&quot, xi).abs().sqrt()
                },
                0.0,
                umax,
                ABS_TOL,
                REL_TOL,
                PANELS,
            )
            .value;
        }
        let (lo, hi) = if x < y { (x, y) } else { (y, x) };
        quad::integrate(|xi| w.at(xi) / self.radicand(xi).max(0.0).sqrt(), lo, hi, ABS_TOL, REL_TOL, PANELS).value
    }

    /// `int |dxi| w / sqrt(P)` from regular `a` to infinity in direction `heading`.
    fn tail(&self, w: Weight, a: f64, heading: f64) -> f64 {
        let d = self.degree();
        if d < 3 && !(matches!(w, Weight::InvDistance(_)) && d >= 1) {
            return f64::INFINITY;
        }
        let l = self.length_scale(a);
        quad::integrate(
            |t| {
                if t == 0.0 {
                    return 0.0;
                }
                let xi = a + heading * l * (1.0 - t * t) / (t * t);
                let v = w.at(xi) / self.radicand(xi).sqrt() * 2.0 * l / (t * t * t);
                if v.is_finite() {
                    v
                } else {
                    0.0
                }
            },
            0.0,
            1.0,
            ABS_TOL,
            REL_TOL,
            PANELS,
        )
        .value
    }

    fn inf_mid(&self, leg: &Leg) -> f64 {
        leg.start + leg.heading * self.length_scale(leg.start)
    }

    /// Integral of `w` over the whole leg.
    fn leg_total(&self, w: Weight, leg: &Leg) -> f64 {
        match leg.end {
            End::Turn(b) => self.span(w, leg.start, leg.from_root, b, true),
            End::Touch(_) => f64::INFINITY,
            End::Infinity => {
                let m = self.inf_mid(leg);
                let t = self.tail(w, m, leg.heading);
                if t.is_infinite() {
                    return t;
                }
                self.span(w, leg.start, leg.from_root, m, false) + t
            }
        }
    }

    /// Point on the leg at which the integral of `w` from the start equals `target`.
    fn invert(&self, w: Weight, leg: &Leg, target: f64) -> f64 {
        let at = |d: f64| leg.start + leg.heading * d;
        let g = |d: f64| self.span(w, leg.start, leg.from_root, at(d), false) - target;
        let mut lo = 0.0;
        let mut hi = match leg.end {
            End::Turn(b) | End::Touch(b) => (b - leg.start).abs(),
            End::Infinity => {
                let mut h = self.length_scale(leg.start);
                while g(h) < 0.0 && h < 1e300 {
                    lo = h;
                    h *= 4.0;
                }
                h
            }
        };
        let mut d = 0.5 * (lo + hi);
        for _ in 0..200 {
            let v = g(d);
            if v == 0.0 {
                return at(d);
            }
            if v < 0.0 {
                lo = d;
            } else {
                hi = d;
            }
            let slope = w.at(at(d)) / self.radicand(at(d)).max(0.0).sqrt();
            let newton = d - v / slope;
            let next = if slope.is_finite() && slope > 0.0 && newton > lo && newton < hi {
                newton
            } else {
                0.5 * (lo + hi)
            };
            if (next - d).abs() <= 1e-15 * (1.0 + d.abs()) || hi - lo <= 1e-15 * (1.0 + hi.abs()) {
                return at(next);
            }
            d = next;
        }
        at(d)
    }

    /// Time for `xi_1` to reach infinity in the direction `dir = +1` (s increasing) or `-1`.
    pub fn escape_time(&self, dir: f64) -> f64 {
        let one = Weight::One;
        let mut leg = self.first_leg(dir);
        let mut elapsed = 0.0;
        for _ in 0..4 {
            match leg.end {
                End::Infinity => return elapsed + self.leg_total(one, &leg),
                End::Touch(_) => return f64::INFINITY,
                End::Turn(_) => {
                    elapsed += self.leg_total(one, &leg);
                    leg = self.next_leg(&leg).expect("turning point");
                }
            }
        }
        // Bounded oscillation between two simple zeros.
        f64::INFINITY
    }

    /// `xi_1(s)`; errors with `DomainBoundary` beyond the escape time.
    pub fn sample(&self, s: f64) -> Result<f64> {
        if s == 0.0 {
            return Ok(self.xi0);
        }
        let one = Weight::One;
        let dir = s.signum();
        let mut left = s.abs();
        let mut leg = self.first_leg(dir);
        for k in 0..8 {
            let total = self.leg_total(one, &leg);
            if left <= total {
                return Ok(self.invert(one, &leg, left));
            }
            left -= total;
            leg = match self.next_leg(&leg) {
                Some(l) => l,
                None => return Err(Error::DomainBoundary { s }),
            };
            if k == 1 {
                // Periodic regime: skip whole periods.
                let period = total + self.leg_total(one, &leg);
                if period.is_finite() && period > 0.0 {
                    left -= (left / period).floor() * period;
                }
            }
        }
        Err(Error::InternalInconsistency("quadrature leg walk did not converge".into()))
    }

    /// Time until `p_i` reaches infinity, from `dp/ds = q(p)/xi_i` with
    /// `xi_i = xi_1 - kappa_i`; infinite when a zero of `q` blocks the way.
    pub fn p_blowup_time(&self, spec: &RecursiveSpec, dir: f64, i: usize, p0: f64) -> Result<f64> {
        let kappa_i = *self.shifts.get(i).ok_or(Error::InvalidIndex { index: i, len: self.shifts.len() })?;
        let xi_i0 = self.xi0 - kappa_i;
        if xi_i0 == 0.0 {
            return Err(Error::Degenerate { s: 0.0, reason: format!("xi_{} vanishes", i + 1) });
        }
        let rate = dir * xi_i0.signum();
        let q0 = spec.q(p0);
        if q0 == 0.0 {
            return Ok(f64::INFINITY);
        }
        let heading = rate * q0.signum();
        let target = q_escape_integral(spec.a0, spec.a1, p0, heading).abs();
        if !target.is_finite() {
            return Ok(f64::INFINITY);
        }
        let one = Weight::One;
        let w = Weight::InvDistance(kappa_i);
        let mut phi = 0.0;
        let mut time = 0.0;
        let mut leg = self.first_leg(dir);
        for k in 0..8 {
            let leg_phi = self.leg_total(w, &leg);
            if phi + leg_phi >= target {
                let xi = self.invert(w, &leg, target - phi);
                return Ok(time + self.span(one, leg.start, leg.from_root, xi, false));
            }
            phi += leg_phi;
            time += self.leg_total(one, &leg);
            leg = match self.next_leg(&leg) {
                Some(l) => l,
                None => return Ok(f64::INFINITY),
            };
            if k == 1 {
                let dphi = leg_phi + self.leg_total(w, &leg);
                let dtime = self.leg_total(one, &leg) * 2.0;
                if dphi > 0.0 {
                    let whole = ((target - phi) / dphi).floor().max(0.0);
                    phi += whole * dphi;
                    time += whole * dtime;
                }
            }
        }
        Err(Error::InternalInconsistency("p blow-up walk did not converge".into()))
    }

    /// Predicted end of the maximal interval in direction `dir`: the first of
    /// `xi_1` escaping and any `p_i` escaping.
    pub fn predicted_blowup(&self, spec: &RecursiveSpec, dir: f64, p0: &[f64]) -> Result<f64> {
        let mut best = self.escape_time(dir);
        for (i, &p) in p0.iter().enumerate() {
            best = best.min(self.p_blowup_time(spec, dir, i, p)?);
        }
        Ok(best)
    }
}

/// `int_{p0}^{heading * inf} dp / (p^2 + a1 p + a0)`, infinite if a real zero
/// of the quadratic lies on the way.
pub fn q_escape_integral(a0: f64, a1: f64, p0: f64, heading: f64) -> f64 {
    let d = a1 * a1 - 4.0 * a0;
    let x = p0 + 0.5 * a1;
    if d < 0.0 {
        let w = (-d).sqrt();
        let at = (2.0 * x / w).atan();
        return 2.0 / w * (heading * std::f64::consts::FRAC_PI_2 - at);
    }
    let h = 0.5 * d.max(0.0).sqrt();
    // Zeros at x = +-h in the shifted variable.
    if heading > 0.0 && x <= h || heading < 0.0 && x >= -h {
        return f64::INFINITY;
    }
    if h == 0.0 {
        return 1.0 / x;
    }
    // int dx/((x-h)(x+h)) = (1/2h) ln|(x-h)/(x+h)|, which tends to 0 at infinity.
    -(1.0 / (2.0 * h)) * ((x - h) / (x + h)).abs().ln()
}
