//! Smooth repulsive central potentials and their critical data.
//!
//! A potential is admissible when `V(r) > 0` and `V'(r) < 0` for all `r > 0`, with a
//! maximum `E_c = V(0)` whose Taylor expansion reads `E_c − μα²r²/2 + O(r⁴)`, and when
//! `V` decays at least like `r^{-3/2}`. Monotonicity makes the classical turning point
//! unique. The decay bound is what the tail of the action difference needs to converge;
//! the built-in Lorentzian decays like `r^{-2}`.

use alloc::format;
use alloc::sync::Arc;
use core::fmt;

use crate::error::{Error, Result};
use crate::math::sqrt;
use crate::roots;

/// User-supplied radial profile `V(r)` with its first two derivatives.
pub trait RadialProfile: fmt::Debug + Send + Sync {
    fn value(&self, r: f64) -> f64;
    fn slope(&self, r: f64) -> f64;
    fn curvature(&self, r: f64) -> f64;

    /// Characteristic length over which `V` varies.
    fn length_scale(&self) -> f64 {
        1.0
    }

    /// Coefficient `C` of an inverse-square tail `V(r) = C/r² + O(r⁻⁴)`, zero if `V` decays
    /// faster. The exact radial solver absorbs this part into the order of the free waves.
    fn inverse_square_tail(&self) -> f64 {
        0.0
    }
}

#[derive(Debug, Clone)]
pub enum PotentialKind {
    /// `V(r) = a / (1 + (b r)²)`.
    Lorentzian { a: f64, b: f64 },
    /// `V ≡ 0`. Only meaningful as the free reference; it has no critical point.
    Zero,
    Custom(Arc<dyn RadialProfile>),
}

impl PartialEq for PotentialKind {
    fn eq(&self, other: &Self) -> bool {
        match (self, other) {
            (Self::Lorentzian { a, b }, Self::Lorentzian { a: a2, b: b2 }) => a == a2 && b == b2,
            (Self::Zero, Self::Zero) => true,
            (Self::Custom(x), Self::Custom(y)) => Arc::ptr_eq(x, y),
            _ => false,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CriticalData {
    pub e_c: f64,
    pub p_c: f64,
    pub alpha: f64,
}

/// A validated potential with mass `μ` and its derived critical constants.
#[derive(Debug, Clone, PartialEq)]
pub struct PotentialModel {
    kind: PotentialKind,
    mu: f64,
    e_c: f64,
    p_c: f64,
    alpha: f64,
}

impl PotentialModel {
    pub fn lorentzian(a: f64, b: f64, mu: f64) -> Result<Self> {
        if !(a > 0.0 && a.is_finite()) {
            return Err(Error::InvalidPotential(format!("Lorentzian height a must be positive, got {a}")));
        }
        if !(b > 0.0 && b.is_finite()) {
            return Err(Error::InvalidPotential(format!("Lorentzian inverse width b must be positive, got {b}")));
        }
        Self::build(PotentialKind::Lorentzian { a, b }, mu)
    }

    pub fn zero(mu: f64) -> Result<Self> {
        check_mass(mu)?;
        Ok(PotentialModel { kind: PotentialKind::Zero, mu, e_c: 0.0, p_c: 0.0, alpha: 0.0 })
    }

    pub fn custom(profile: Arc<dyn RadialProfile>, mu: f64) -> Result<Self> {
        Self::build(PotentialKind::Custom(profile), mu)
    }

    fn build(kind: PotentialKind, mu: f64) -> Result<Self> {
        check_mass(mu)?;
        let mut model = PotentialModel { kind, mu, e_c: 0.0, p_c: 0.0, alpha: 0.0 };
        model.validate_shape()?;
        let e_c = model.value(0.0);
        let v2 = model.curvature(0.0);
        if v2 > 0.0 {
            return Err(Error::InvalidPotential(format!("V''(0) = {v2} > 0: the origin is not a maximum")));
        }
        model.e_c = e_c;
        model.p_c = sqrt(2.0 * mu * e_c);
        model.alpha = sqrt(-v2 / mu);
        Ok(model)
    }

    fn validate_shape(&self) -> Result<()> {
        let scale = self.length_scale();
        if !(scale > 0.0 && scale.is_finite()) {
            return Err(Error::InvalidPotential("length scale must be positive".into()));
        }
        let v0 = self.value(0.0);
        if !(v0 > 0.0 && v0.is_finite()) {
            return Err(Error::InvalidPotential(format!("V(0) = {v0} must be positive (repulsive barrier)")));
        }
        // Log-spaced samples from 1e-4 to 1e6 length scales.
        let mut prev_decay = f64::INFINITY;
        for i in 0..=400 {
            let r = scale * libm::pow(10.0, -4.0 + 10.0 * f64::from(i) / 400.0);
            let v = self.value(r);
            let dv = self.slope(r);
            if v >= 0.0 && v < 1e-250 {
                // Underflowed tail of a fast-decaying profile.
                break;
            }
            if !(v > 0.0) || !v.is_finite() {
                return Err(Error::InvalidPotential(format!("V({r:e}) = {v:e} is not positive")));
            }
            if !(dv < 0.0) || !dv.is_finite() {
                return Err(Error::InvalidPotential(format!("V'({r:e}) = {dv:e} is not negative")));
            }
            if r >= 10.0 * scale {
                let decay = v * r * sqrt(r);
                if decay > prev_decay * (1.0 + 1e-9) {
                    return Err(Error::InvalidPotential(format!(
                        "V decays slower than r^(-3/2) near r = {r:e}"
                    )));
                }
                prev_decay = decay;
            }
        }
        Ok(())
    }

    pub fn kind(&self) -> &PotentialKind {
        &self.kind
    }

    pub fn mu(&self) -> f64 {
        self.mu
    }

    pub fn e_c(&self) -> f64 {
        self.e_c
    }

    pub fn p_c(&self) -> f64 {
        self.p_c
    }

    pub fn alpha(&self) -> f64 {
        self.alpha
    }

    pub fn is_zero(&self) -> bool {
        matches!(self.kind, PotentialKind::Zero)
    }

    /// `V(r)` without argument checks.
    #[inline]
    pub fn value(&self, r: f64) -> f64 {
        match &self.kind {
            PotentialKind::Lorentzian { a, b } => a / (1.0 + (b * r) * (b * r)),
            PotentialKind::Zero => 0.0,
            PotentialKind::Custom(p) => p.value(r),
        }
    }

    #[inline]
    pub fn slope(&self, r: f64) -> f64 {
        match &self.kind {
            PotentialKind::Lorentzian { a, b } => {
                let d = 1.0 + (b * r) * (b * r);
                -2.0 * a * b * b * r / (d * d)
            }
            PotentialKind::Zero => 0.0,
            PotentialKind::Custom(p) => p.slope(r),
        }
    }

    #[inline]
    pub fn curvature(&self, r: f64) -> f64 {
        match &self.kind {
            PotentialKind::Lorentzian { a, b } => {
                let x = (b * r) * (b * r);
                let d = 1.0 + x;
                2.0 * a * b * b * (3.0 * x - 1.0) / (d * d * d)
            }
            PotentialKind::Zero => 0.0,
            PotentialKind::Custom(p) => p.curvature(r),
        }
    }

    /// `−V'(r)/r`, the radial force per unit length, continuous at `r = 0`.
    #[inline]
    pub fn force_over_r(&self, r: f64) -> f64 {
        match &self.kind {
            PotentialKind::Lorentzian { a, b } => {
                let d = 1.0 + (b * r) * (b * r);
                2.0 * a * b * b / (d * d)
            }
            PotentialKind::Zero => 0.0,
            PotentialKind::Custom(p) => {
                if r < 1e-6 * p.length_scale() {
                    -p.curvature(r)
                } else {
                    -p.slope(r) / r
                }
            }
        }
    }

    pub fn length_scale(&self) -> f64 {
        match &self.kind {
            PotentialKind::Lorentzian { b, .. } => 1.0 / b,
            PotentialKind::Zero => 1.0,
            PotentialKind::Custom(p) => p.length_scale(),
        }
    }

    /// Coefficient of the `1/r²` part of the far tail.
    pub fn inverse_square_tail(&self) -> f64 {
        match &self.kind {
            PotentialKind::Lorentzian { a, b } => a / (b * b),
            PotentialKind::Zero => 0.0,
            PotentialKind::Custom(p) => p.inverse_square_tail(),
        }
    }

    /// `V(r)`, rejecting negative or non-finite radii.
    pub fn evaluate(&self, r: f64) -> Result<f64> {
        if !(r >= 0.0) || r.is_nan() {
            return Err(Error::domain(format!("radius must be non-negative, got {r}")));
        }
        if r == f64::INFINITY {
            return Ok(0.0);
        }
        Ok(self.value(r))
    }

    /// `(E_c, p_c, α)`. The free reference has no barrier and is rejected.
    pub fn critical_data(&self) -> Result<CriticalData> {
        if !(self.e_c > 0.0) {
            return Err(Error::InvalidPotential("no repulsive barrier: E_c <= 0".into()));
        }
        Ok(CriticalData { e_c: self.e_c, p_c: self.p_c, alpha: self.alpha })
    }

    /// Smallest radius (a power-of-two multiple of the length scale) beyond which
    /// `|V| < fraction * energy`.
    pub fn decay_radius(&self, fraction: f64, energy: f64) -> f64 {
        let threshold = fraction * energy;
        let mut r = self.length_scale();
        for _ in 0..200 {
            if self.value(r).abs() < threshold {
                return r;
            }
            r *= 2.0;
        }
        r
    }

    /// The classical turning point `r₀` for `pt`: the largest non-negative root of
    /// `h(r) = r²p² − l² − 2μr²V(r)`, or zero when `l = 0` and `p > p_c`.
    ///
    /// The returned value satisfies `h(r₀) ≥ 0` (up to rounding) so that integrals starting
    /// at `r₀` never see a negative radicand.
    pub fn turning_point(&self, pt: ScatterPoint) -> Result<f64> {
        if pt.is_critical(self) {
            return Err(Error::CriticalPoint);
        }
        let (l, p) = (pt.l, pt.p);
        let l_abs = l.abs();
        let two_mu = 2.0 * self.mu;
        if l == 0.0 {
            if p > self.p_c {
                return Ok(0.0);
            }
            // Barrier reflection: root of g(r) = p² − 2μV(r), with g(0) < 0.
            let mut g = |r: f64| p * p - two_mu * self.value(r);
            let (hi, g_hi) = roots::expand_upward(g, self.length_scale(), 200)?;
            let g0 = g(0.0);
            let root = roots::brent_with_values(&mut g, 0.0, g0, hi, g_hi, 0.0, 300)?;
            return Ok(root.nonnegative_side());
        }
        let mut h = |r: f64| r * r * (p * p - two_mu * self.value(r)) - l * l;
        // V > 0 puts the root at or beyond the free turning point |l|/p.
        let lo = l_abs / p;
        let h_lo = h(lo);
        if h_lo >= 0.0 || self.is_zero() {
            return Ok(lo);
        }
        let (hi, h_hi) = roots::expand_upward(h, lo.max(self.length_scale()), 200)?;
        let root = roots::brent_with_values(&mut h, lo, h_lo, hi, h_hi, 0.0, 300)?;
        Ok(root.nonnegative_side())
    }
}

fn check_mass(mu: f64) -> Result<()> {
    if mu > 0.0 && mu.is_finite() {
        Ok(())
    } else {
        Err(Error::InvalidPotential(format!("mass must be positive, got {mu}")))
    }
}

/// A point `(l, p)` of angular momentum and asymptotic momentum.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ScatterPoint {
    pub l: f64,
    pub p: f64,
}

impl ScatterPoint {
    pub fn new(l: f64, p: f64) -> Result<Self> {
        if !l.is_finite() {
            return Err(Error::domain(format!("angular momentum must be finite, got {l}")));
        }
        if !(p > 0.0 && p.is_finite()) {
            return Err(Error::domain(format!("momentum must be positive, got {p}")));
        }
        Ok(ScatterPoint { l, p })
    }

    /// Builds the point from an energy `E = p²/(2μ)`.
    pub fn from_energy(l: f64, e: f64, mu: f64) -> Result<Self> {
        if !(e > 0.0) {
            return Err(Error::domain(format!("energy must be positive, got {e}")));
        }
        Self::new(l, sqrt(2.0 * mu * e))
    }

    pub fn energy(&self, mu: f64) -> f64 {
        self.p * self.p / (2.0 * mu)
    }

    pub fn mirrored(self) -> Self {
        ScatterPoint { l: -self.l, p: self.p }
    }

    /// `l = 0` and `p = p_c` up to a few ulps of `p_c`.
    pub fn is_critical(&self, pot: &PotentialModel) -> bool {
        self.l == 0.0 && pot.p_c > 0.0 && (self.p - pot.p_c).abs() <= 4.0 * f64::EPSILON * pot.p_c
    }
}
