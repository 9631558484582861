//! Bracketed scalar root finding.

use crate::error::{Error, Result};

/// Result of a bracketed solve: the best root estimate and the final bracket.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Root {
    pub x: f64,
    /// Final bracket `[lo, hi]`, ordered, with `f(lo)` and `f(hi)` of opposite sign (or zero).
    pub lo: f64,
    pub hi: f64,
    pub f_lo: f64,
    pub f_hi: f64,
}

impl Root {
    /// The bracket end where `f >= 0`.
    pub fn nonnegative_side(&self) -> f64 {
        if self.f_hi >= 0.0 && (self.f_lo < 0.0 || self.f_hi <= self.f_lo) {
            self.hi
        } else {
            self.lo
        }
    }
}

/// Brent's method on `[a, b]` with `f(a)`, `f(b)` of opposite sign.
///
/// Stops when the bracket is narrower than `xtol + 4 eps |x|`; `xtol = 0` runs to machine
/// precision.
pub fn brent<F: FnMut(f64) -> f64>(mut f: F, a: f64, b: f64, xtol: f64, max_iter: usize) -> Result<Root> {
    let fa = f(a);
    let fb = f(b);
    brent_with_values(&mut f, a, fa, b, fb, xtol, max_iter)
}

pub(crate) fn brent_with_values<F: FnMut(f64) -> f64>(
    f: &mut F,
    a: f64,
    fa: f64,
    b: f64,
    fb: f64,
    xtol: f64,
    max_iter: usize,
) -> Result<Root> {
    if fa.is_nan() || fb.is_nan() {
        return Err(Error::numerical("root function is NaN at a bracket end"));
    }
    if fa == 0.0 {
        return Ok(Root { x: a, lo: a, hi: a, f_lo: 0.0, f_hi: 0.0 });
    }
    if fb == 0.0 {
        return Ok(Root { x: b, lo: b, hi: b, f_lo: 0.0, f_hi: 0.0 });
    }
    if fa.signum() == fb.signum() {
        return Err(Error::numerical("root is not bracketed"));
    }

    // `b` is the best estimate, `c` the other end of the bracket.
    let (mut a, mut fa, mut b, mut fb) = (a, fa, b, fb);
    let (mut c, mut fc) = (a, fa);
    let mut d = b - a;
    let mut e = d;
    for _ in 0..max_iter {
        if fb.signum() == fc.signum() {
            c = a;
            fc = fa;
            d = b - a;
            e = d;
        }
        if fc.abs() < fb.abs() {
            a = b;
            b = c;
            c = a;
            fa = fb;
            fb = fc;
            fc = fa;
        }
        let tol = 2.0 * f64::EPSILON * b.abs() + 0.5 * xtol;
        let m = 0.5 * (c - b);
        if m.abs() <= tol || fb == 0.0 {
            let (lo, hi, f_lo, f_hi) = if b < c { (b, c, fb, fc) } else { (c, b, fc, fb) };
            return Ok(Root { x: b, lo, hi, f_lo, f_hi });
        }
        if e.abs() >= tol && fa.abs() > fb.abs() {
            let s = fb / fa;
            let (mut p, mut q);
            if a == c {
                p = 2.0 * m * s;
                q = 1.0 - s;
            } else {
                let qa = fa / fc;
                let r = fb / fc;
                p = s * (2.0 * m * qa * (qa - r) - (b - a) * (r - 1.0));
                q = (qa - 1.0) * (r - 1.0) * (s - 1.0);
            }
            if p > 0.0 {
                q = -q;
            } else {
                p = -p;
            }
            if 2.0 * p < (3.0 * m * q - (tol * q).abs()).min((e * q).abs()) {
                e = d;
                d = p / q;
            } else {
                d = m;
                e = m;
            }
        } else {
            d = m;
            e = m;
        }
        a = b;
        fa = fb;
        b += if d.abs() > tol { d } else { tol.copysign(m) };
        fb = f(b);
        if fb.is_nan() {
            return Err(Error::numerical("root function returned NaN inside the bracket"));
        }
    }
    Err(Error::numerical("root finder did not converge"))
}

/// Doubles `hi` (starting from `start > lo`) until `f(hi) > 0`. Returns `(hi, f(hi))`.
pub fn expand_upward<F: FnMut(f64) -> f64>(mut f: F, start: f64, max_doublings: usize) -> Result<(f64, f64)> {
    let mut hi = start;
    for _ in 0..max_doublings {
        let v = f(hi);
        if v > 0.0 {
            return Ok((hi, v));
        }
        hi *= 2.0;
    }
    Err(Error::numerical("failed to bracket the root from above"))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn sqrt_two() {
        let r = brent(|x| x * x - 2.0, 0.0, 2.0, 0.0, 100).unwrap();
        assert!((r.x - core::f64::consts::SQRT_2).abs() < 4e-16);
        assert!(r.f_lo <= 0.0 && r.f_hi >= 0.0);
        assert!(r.nonnegative_side() * r.nonnegative_side() - 2.0 >= 0.0);
    }

    #[test]
    fn decreasing_function() {
        let r = brent(|x| 1.0 - x * x * x, 0.0, 3.0, 1e-12, 100).unwrap();
        assert!((r.x - 1.0).abs() < 1e-12);
        let z = r.nonnegative_side();
        assert!(1.0 - z * z * z >= 0.0);
    }

    #[test]
    fn unbracketed_is_rejected() {
        assert!(brent(|x| x * x + 1.0, -1.0, 1.0, 0.0, 50).is_err());
    }

    #[test]
    fn expand() {
        let (hi, v) = expand_upward(|x| x - 100.0, 1.0, 20).unwrap();
        assert_eq!(hi, 128.0);
        assert!(v > 0.0);
    }
}
