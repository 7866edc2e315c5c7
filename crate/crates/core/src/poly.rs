//! Dense real polynomials in ascending-power coefficient form.

/// `c[0] + c[1] x + ... + c[d] x^d`.
pub fn eval(c: &[f64], x: f64) -> f64 {
    c.iter().rev().fold(0.0, |acc, &a| acc * x + a)
}

/// Sum of `|c_k x^k|`, the natural rounding scale of [`eval`].
pub fn eval_scale(c: &[f64], x: f64) -> f64 {
    let ax = x.abs();
    c.iter().rev().fold(0.0, |acc, &a| acc * ax + a.abs())
}

pub fn derivative(c: &[f64]) -> Vec<f64> {
    c.iter().enumerate().skip(1).map(|(k, &a)| k as f64 * a).collect()
}

pub fn mul(a: &[f64], b: &[f64]) -> Vec<f64> {
    if a.is_empty() || b.is_empty() {
        return Vec::new();
    }
    let mut out = vec![0.0; a.len() + b.len() - 1];
    for (i, &x) in a.iter().enumerate() {
        for (j, &y) in b.iter().enumerate() {
            out[i + j] += x * y;
        }
    }
    out
}

/// Product of linear factors `prod_j (x - roots_j)`.
pub fn from_roots(roots: &[f64]) -> Vec<f64> {
    roots.iter().fold(vec![1.0], |acc, &r| mul(&acc, &[-r, 1.0]))
}

/// Quotient of `c` by `(x - r)`, discarding the remainder.
pub fn deflate(c: &[f64], r: f64) -> Vec<f64> {
    let d = c.len() - 1;
    let mut q = vec![0.0; d];
    let mut acc = 0.0;
    for k in (1..=d).rev() {
        acc = acc * r + c[k];
        q[k - 1] = acc;
    }
    q
}

fn trimmed(c: &[f64]) -> &[f64] {
    let mut d = c.len();
    while d > 0 && c[d - 1].abs() <= 1e-300 {
        d -= 1;
    }
    &c[..d]
}

/// A real root. `touching` marks a numerically double root (tangency),
/// found at a critical point rather than at a sign change.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct RealRoot {
    pub value: f64,
    pub touching: bool,
}

fn bisect(c: &[f64], mut a: f64, mut b: f64) -> f64 {
    let mut fa = eval(c, a);
    for _ in 0..400 {
        let m = 0.5 * (a + b);
        if m <= a || m >= b {
            break;
        }
        let fm = eval(c, m);
        if fm == 0.0 {
            return m;
        }
        if (fm < 0.0) == (fa < 0.0) {
            a = m;
            fa = fm;
        } else {
            b = m;
        }
    }
    0.5 * (a + b)
}

/// All real roots in increasing order, via the critical points of the
/// derivative (each monotone piece holds at most one root).
pub fn real_roots(c: &[f64]) -> Vec<RealRoot> {
    let c = trimmed(c);
    if c.len() <= 1 {
        return Vec::new();
    }
    if c.len() == 2 {
        return vec![RealRoot { value: -c[0] / c[1], touching: false }];
    }
    let lead = c[c.len() - 1];
    let bound = 1.0 + c[..c.len() - 1].iter().map(|a| (a / lead).abs()).fold(0.0, f64::max);
    let crit: Vec<f64> = real_roots(&derivative(c))
        .into_iter()
        .map(|r| r.value)
        .filter(|x| x.abs() < bound)
        .collect();
    let mut knots = Vec::with_capacity(crit.len() + 2);
    knots.push(-bound);
    knots.extend(crit.iter().copied());
    knots.push(bound);

    let mut roots: Vec<RealRoot> = Vec::new();
    let near_zero = |x: f64| eval(c, x).abs() <= 64.0 * f64::EPSILON * eval_scale(c, x);
    for w in knots.windows(2) {
        let (a, b) = (w[0], w[1]);
        let (fa, fb) = (eval(c, a), eval(c, b));
        if fa != 0.0 && fb != 0.0 && (fa < 0.0) != (fb < 0.0) {
            roots.push(RealRoot { value: bisect(c, a, b), touching: false });
        }
    }
    for &x in &crit {
        if near_zero(x) && !roots.iter().any(|r| (r.value - x).abs() <= 1e-7 * (1.0 + x.abs())) {
            roots.push(RealRoot { value: x, touching: true });
        } else if near_zero(x) {
            for r in roots.iter_mut() {
                if (r.value - x).abs() <= 1e-7 * (1.0 + x.abs()) {
                    r.touching = true;
                }
            }
        }
    }
    roots.sort_by(|a, b| a.value.total_cmp(&b.value));
    roots
}
