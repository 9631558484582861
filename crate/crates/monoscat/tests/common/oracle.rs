//! Independent ΔW for the Lorentzian a/(1 + (b r)²): closed-form turning point and
//! tanh-sinh quadrature refined until two successive step sizes agree.

use std::f64::consts::FRAC_PI_2;

pub struct Lorentzian {
    pub a: f64,
    pub b: f64,
    pub mu: f64,
}

impl Lorentzian {
    fn v(&self, r: f64) -> f64 {
        self.a / (1.0 + (self.b * r).powi(2))
    }

    /// Largest root of p² − l²/r² − 2μV(r), from the quadratic in z = r².
    pub fn turning_point(&self, l: f64, p: f64) -> f64 {
        let (b2, l2, p2) = (self.b * self.b, l * l, p * p);
        let qa = p2 * b2;
        let qb = p2 - 2.0 * self.mu * self.a - l2 * b2;
        let qc = -l2;
        let disc = (qb * qb - 4.0 * qa * qc).sqrt();
        let z = if qb > 0.0 { -2.0 * qc / (qb + disc) } else { (disc - qb) / (2.0 * qa) };
        z.sqrt()
    }

    /// ΔW = 2∫_{r₀}^∞ (√A − √B) dr − 2∫_{|l|/p}^{r₀} √B dr with A = B − 2μV, B = p² − l²/r².
    pub fn delta_w(&self, l: f64, p: f64, rel_tol: f64) -> f64 {
        let r0 = self.turning_point(l, p);
        let b = |r: f64| p * p - l * l / (r * r);
        let a = |r: f64| b(r) - 2.0 * self.mu * self.v(r);
        let rc = r0 + 1.0;
        let near = tanh_sinh(|r| a(r).max(0.0).sqrt() - b(r).max(0.0).sqrt(), r0, rc, rel_tol);
        let far = tanh_sinh(
            |t| {
                // V(rc/t)·rc/t² written without forming 1/t²
                let r = rc / t;
                let vt = self.a * rc / (t * t + (self.b * rc).powi(2));
                let (sa, sb) = if t == 0.0 { (p, p) } else { (a(r).sqrt(), b(r).sqrt()) };
                -2.0 * self.mu * vt / (sa + sb)
            },
            0.0,
            1.0,
            rel_tol,
        );
        let free = tanh_sinh(|r| b(r).max(0.0).sqrt(), l.abs() / p, r0, rel_tol);
        2.0 * (near + far) - 2.0 * free
    }
}

/// ∫_lo^hi f by the tanh-sinh rule, halving the step until successive sums agree to `rel_tol`.
pub fn tanh_sinh<F: Fn(f64) -> f64>(f: F, lo: f64, hi: f64, rel_tol: f64) -> f64 {
    if hi <= lo {
        return 0.0;
    }
    let half = 0.5 * (hi - lo);
    let mid = 0.5 * (hi + lo);
    let sum_at = |h: f64, offset_only: bool| {
        let mut s = 0.0;
        let mut j: i64 = if offset_only { 1 } else { 0 };
        let step = if offset_only { 2 } else { 1 };
        loop {
            let t = j as f64 * h;
            let u = FRAC_PI_2 * t.sinh();
            let w = FRAC_PI_2 * t.cosh() / u.cosh().powi(2);
            // distance of the node from the nearer endpoint, without rounding through x = tanh u
            let d = half * 2.0 / (1.0 + (2.0 * u.abs()).exp());
            if w < 1e-300 || d == 0.0 {
                break;
            }
            let term = if j == 0 {
                w * f(mid)
            } else {
                w * (f(lo + d) + f(hi - d))
            };
            s += term;
            j += step;
        }
        s
    };
    let mut h = 1.0;
    let mut sum = sum_at(h, false);
    let mut prev = sum * h * half;
    for _ in 0..12 {
        h *= 0.5;
        sum += sum_at(h, true);
        let est = sum * h * half;
        if (est - prev).abs() <= rel_tol * est.abs() {
            return est;
        }
        prev = est;
    }
    prev
}
