//! Radial action difference `ΔW(l, p)` and the quantities derived from it.
//!
//! `ΔW = W − W′` compares the radial action with and without the potential. Both actions
//! diverge at large `r`; their difference does not. It is evaluated as
//!
//! ```text
//! ΔW = −2 F(r₀) − 4μ ∫_{r₀}^∞ V / (√A + √B) dr,
//! A = p² − l²/r² − 2μV,   B = p² − l²/r²,
//! ```
//!
//! where `F(r) = √(p²r² − l²) − |l| arccos(|l|/(pr))` is the closed-form free action from
//! the free turning point `|l|/p` up to `r`. Since `V > 0` the scattered turning point `r₀`
//! lies beyond the free one, so the free action between them is exactly `F(r₀)`. On
//! `[r₀, r_cut]` the substitution `r = r₀ + s²` removes the square-root behaviour at the
//! turning point. Beyond `r_cut` the substitution `r = r_cut / t` maps the tail to a finite
//! interval. Neither piece subtracts large numbers.

use alloc::vec::Vec;

use crate::error::{Error, Result};
use crate::math::{atan, sqrt, PI, TAU};
use crate::potential::{PotentialModel, ScatterPoint};
use crate::quadrature::{geometric_breakpoints, integrate, Estimate, QuadratureSpec};

pub type ActionValue = Estimate;

/// Which continuation of `ΔW` across `l = 0` to use.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Branch {
    /// `ΔW` itself: smooth across `l = 0` for `p > p_c`, kinked for `p < p_c`.
    Raw,
    /// `ΔW̃ = ΔW − 2πl` for `l > 0`: smooth across `l = 0` for `p < p_c`, kinked above.
    Smoothed,
}

/// Direction from which `l → 0` is approached.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Side {
    /// `l → 0⁻`
    FromBelow,
    /// `l → 0⁺`
    FromAbove,
}

impl Side {
    fn sign(self) -> f64 {
        match self {
            Side::FromBelow => -1.0,
            Side::FromAbove => 1.0,
        }
    }
}

pub(crate) fn check_regular(pot: &PotentialModel, pt: ScatterPoint) -> Result<()> {
    if pt.is_critical(pot) {
        Err(Error::CriticalPoint)
    } else {
        Ok(())
    }
}

/// Radius separating the turning-point region from the tail.
pub(crate) fn cut_radius(pot: &PotentialModel, r0: f64, quad: &QuadratureSpec) -> Result<f64> {
    match quad.r_cut {
        Some(rc) if rc > r0 => Ok(rc),
        Some(rc) => Err(Error::domain(alloc::format!("r_cut = {rc} does not exceed the turning point {r0}"))),
        None => Ok(r0 + 4.0 * r0.max(pot.length_scale())),
    }
}

/// `∫_{|l|/p}^{r} √(p² − l²/ρ²) dρ` in closed form, for `r ≥ |l|/p`.
///
/// Evaluated as `|l| (u − atan u)` with `u = √(p²r² − l²)/|l|`, which stays accurate at the
/// turning point where the textbook form `√(p²r² − l²) − |l| acos(|l|/pr)` cancels.
pub fn free_radial_action(l: f64, p: f64, r: f64) -> f64 {
    let l = l.abs();
    if l == 0.0 {
        return p * r;
    }
    let x = p * r;
    let u = sqrt(((x - l) * (x + l)).max(0.0)) / l;
    if u < 0.05 {
        // u − atan u = u³/3 − u⁵/5 + u⁷/7 − …
        let u2 = u * u;
        let mut term = u * u2;
        let mut sum = 0.0;
        for k in 0..8 {
            let n = f64::from(2 * k + 3);
            sum += if k % 2 == 0 { term / n } else { -term / n };
            term *= u2;
        }
        l * sum
    } else {
        l * (u - atan(u))
    }
}

/// `ΔW(l, p)`.
pub fn delta_w(pot: &PotentialModel, pt: ScatterPoint, quad: &QuadratureSpec) -> Result<ActionValue> {
    quad.validate()?;
    check_regular(pot, pt)?;
    let r0 = pot.turning_point(pt)?;
    let rc = cut_radius(pot, r0, quad)?;
    let (l2, p2, two_mu) = (pt.l * pt.l, pt.p * pt.p, 2.0 * pot.mu());

    let integrand = |r: f64| {
        let v = pot.value(r);
        let b = p2 - l2 / (r * r);
        let a = b - two_mu * v;
        -2.0 * two_mu * v / (sqrt(a.max(0.0)) + sqrt(b.max(0.0)))
    };

    let s_max = sqrt(rc - r0);
    let near = integrate(
        |s| integrand(r0 + s * s) * 2.0 * s,
        0.0,
        s_max,
        &geometric_breakpoints(s_max, 4.0, 1e-4),
        quad,
    )?;
    let tail = integrate(|t| integrand(rc / t) * rc / (t * t), 0.0, 1.0, &[], quad)?;
    Ok(near.add(tail).shift(-2.0 * free_radial_action(pt.l, pt.p, r0)))
}

/// `∂ΔW/∂l` for `l ≠ 0`, from the `z = r²` form
/// `l ∫_{z₀}^∞ −dz / (z √(zp² − l² − 2μzU(z))) + sgn(l) π`, `U(z) = V(√z)`.
///
/// The second term is the free contribution `−∂W′/∂l`.
pub fn d_delta_w_dl(pot: &PotentialModel, pt: ScatterPoint, quad: &QuadratureSpec) -> Result<ActionValue> {
    quad.validate()?;
    if pt.l == 0.0 {
        return Err(Error::domain("∂ΔW/∂l is not defined at l = 0; use limit_dl"));
    }
    let r0 = pot.turning_point(pt)?;
    let rc = cut_radius(pot, r0, quad)?;
    let (l, p2, two_mu) = (pt.l, pt.p * pt.p, 2.0 * pot.mu());
    let z0 = r0 * r0;
    let zc = rc * rc;
    let g = |z: f64| p2 - two_mu * pot.value(sqrt(z));
    let v0 = pot.value(r0);
    let close = 1e-5 * pot.length_scale().min(r0.max(f64::MIN_POSITIVE));

    // With z = z₀ + s² and r₀ taken as the exact root, zp² − l² − 2μzU(z) equals
    // s²g(z) + 2μz₀(V(r₀) − V(r)). Both terms are non-negative for a monotone potential;
    // the potential difference is taken from the slope when r is too close to r₀ for a
    // plain subtraction. Keeping the rounding residual of the root would cut off an
    // O(√residual) piece of the integral.
    let radicand = |s2: f64, z: f64| {
        let r = sqrt(z);
        let h = s2 / (r + r0);
        let dv = if h < close { pot.slope(r0 + 0.5 * h) * h } else { pot.value(r) - v0 };
        let head = s2 * g(z);
        (head - two_mu * z0 * dv).max(head)
    };

    // The result carries the ±π free part, so judge accuracy on that scale.
    let quad = &QuadratureSpec { abs_tol: quad.abs_tol.max(quad.rel_tol * PI), ..*quad };
    let s_max = sqrt(zc - z0);
    let near = integrate(
        |s| {
            let s2 = s * s;
            let z = z0 + s2;
            -l * 2.0 * s / (z * sqrt(radicand(s2, z)))
        },
        0.0,
        s_max,
        &geometric_breakpoints(s_max, 4.0, 1e-9),
        quad,
    )?;
    let tail = integrate(
        |t| {
            let z = zc / (t * t);
            let d = z * g(z) - l * l;
            -l / (z * sqrt(d)) * 2.0 * zc / (t * t * t)
        },
        0.0,
        1.0,
        &[],
        quad,
    )?;
    Ok(near.add(tail).shift(PI.copysign(l)))
}

/// One-sided limit of `∂ΔW/∂l` as `l → 0`, extrapolated from `l = ±10^{-j}`, `j = 2..6`.
///
/// The limit is `sgn π` with `sgn = +1` from above and `−1` from below when `p < p_c`,
/// and `0` from either side when `p > p_c`.
pub fn limit_dl(pot: &PotentialModel, p: f64, side: Side, quad: &QuadratureSpec) -> Result<Estimate> {
    if !(p > 0.0 && p.is_finite()) {
        return Err(Error::domain(alloc::format!("momentum must be positive, got {p}")));
    }
    if ScatterPoint::new(0.0, p)?.is_critical(pot) {
        return Err(Error::CriticalPoint);
    }
    let mut values = Vec::with_capacity(5);
    for j in 2..=6 {
        let l = side.sign() * libm::pow(10.0, -f64::from(j));
        values.push(d_delta_w_dl(pot, ScatterPoint::new(l, p)?, quad)?.value);
    }
    // Leading error is linear in l; eliminate it with step ratio 10.
    let richardson: Vec<f64> = values.windows(2).map(|w| (10.0 * w[1] - w[0]) / 9.0).collect();
    let n = richardson.len();
    let value = richardson[n - 1];
    let err = (richardson[n - 1] - richardson[n - 2]).abs();
    Ok(Estimate::new(value, err))
}

/// `ΔW̃(l, p)`: `ΔW` for `l ≤ 0`, `ΔW − 2πl` for `l > 0`.
pub fn delta_w_smoothed(pot: &PotentialModel, pt: ScatterPoint, quad: &QuadratureSpec) -> Result<ActionValue> {
    let raw = delta_w(pot, pt, quad)?;
    Ok(smooth(raw, pt.l))
}

pub(crate) fn smooth(raw: Estimate, l: f64) -> Estimate {
    if l > 0.0 {
        raw.shift(-TAU * l)
    } else {
        raw
    }
}

/// `ΔW` on the requested branch.
pub fn delta_w_on(pot: &PotentialModel, pt: ScatterPoint, branch: Branch, quad: &QuadratureSpec) -> Result<ActionValue> {
    match branch {
        Branch::Raw => delta_w(pot, pt, quad),
        Branch::Smoothed => delta_w_smoothed(pot, pt, quad),
    }
}

/// WKB phase shift `δ = ΔW / 2ħ`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PhaseShift {
    pub value: f64,
    pub err_estimate: f64,
}

impl PhaseShift {
    /// Representative of `δ mod π` in `[−π/2, π/2)`.
    pub fn reduced(&self) -> f64 {
        reduce_mod_pi(self.value)
    }
}

/// Reduces a phase to `[−π/2, π/2)`.
pub fn reduce_mod_pi(delta: f64) -> f64 {
    crate::math::wrap_half_pi(delta)
}

pub fn wkb_phase_shift(pot: &PotentialModel, pt: ScatterPoint, hbar: f64, quad: &QuadratureSpec) -> Result<PhaseShift> {
    if !(hbar > 0.0 && hbar.is_finite()) {
        return Err(Error::domain(alloc::format!("hbar must be positive, got {hbar}")));
    }
    let dw = delta_w(pot, pt, quad)?;
    Ok(PhaseShift { value: dw.value / (2.0 * hbar), err_estimate: dw.err_estimate / (2.0 * hbar) })
}

/// Classical time delay `ΔT = ∂ΔW/∂E` at fixed `l`, by Richardson-extrapolated central
/// differences with step `10⁻⁶ max(1, |E|)`.
pub fn time_delay(pot: &PotentialModel, l: f64, e: f64, quad: &QuadratureSpec) -> Result<Estimate> {
    if !(e > 0.0 && e.is_finite()) {
        return Err(Error::domain(alloc::format!("energy must be positive, got {e}")));
    }
    let h = 1e-6 * e.abs().max(1.0);
    if e - h <= 0.0 {
        return Err(Error::domain("energy too close to zero for the difference stencil"));
    }
    if l == 0.0 && pot.e_c() > 0.0 && (e - pot.e_c()).abs() <= h {
        return Err(Error::domain("difference stencil at l = 0 crosses the barrier energy E_c"));
    }
    let mu = pot.mu();
    let w = |energy: f64| delta_w(pot, ScatterPoint::from_energy(l, energy, mu)?, quad);
    let central = |step: f64| -> Result<(f64, f64)> {
        let up = w(e + step)?;
        let down = w(e - step)?;
        Ok(((up.value - down.value) / (2.0 * step), (up.err_estimate + down.err_estimate) / (2.0 * step)))
    };
    let (coarse, e1) = central(h)?;
    let (fine, e2) = central(0.5 * h)?;
    let value = (4.0 * fine - coarse) / 3.0;
    Ok(Estimate::new(value, (value - fine).abs() + e1 + e2))
}

/// Rectangular `(l, p)` grid, stored row-major with `p` as the row index.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct GridSpec {
    pub l_min: f64,
    pub l_max: f64,
    pub nl: usize,
    pub p_min: f64,
    pub p_max: f64,
    pub np: usize,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct GridRow {
    pub l: f64,
    pub p: f64,
    /// `None` where the point could not be evaluated (e.g. the critical point).
    pub value: Option<f64>,
}

fn linspace(lo: f64, hi: f64, n: usize, i: usize) -> f64 {
    if n == 1 {
        lo
    } else {
        lo + (hi - lo) * (i as f64) / ((n - 1) as f64)
    }
}

impl GridSpec {
    pub fn validate(&self) -> Result<()> {
        if self.nl == 0 || self.np == 0 {
            return Err(Error::domain("grid needs at least one point per axis"));
        }
        let finite = [self.l_min, self.l_max, self.p_min, self.p_max].iter().all(|x| x.is_finite());
        if !finite || self.l_min > self.l_max || self.p_min > self.p_max {
            return Err(Error::domain("grid ranges must be finite and ordered"));
        }
        if !(self.p_min > 0.0) {
            return Err(Error::domain("grid momenta must be positive"));
        }
        Ok(())
    }

    pub fn len(&self) -> usize {
        self.nl * self.np
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    /// The `(l, p)` of the `index`-th row-major point.
    pub fn point(&self, index: usize) -> (f64, f64) {
        let (row, col) = (index / self.nl, index % self.nl);
        (linspace(self.l_min, self.l_max, self.nl, col), linspace(self.p_min, self.p_max, self.np, row))
    }
}

/// Value of one grid point; failures become `None`.
pub fn grid_value(pot: &PotentialModel, l: f64, p: f64, branch: Branch, quad: &QuadratureSpec) -> GridRow {
    let value = ScatterPoint::new(l, p)
        .and_then(|pt| delta_w_on(pot, pt, branch, quad))
        .ok()
        .map(|v| v.value);
    GridRow { l, p, value }
}

/// `ΔW` or `ΔW̃` on every point of `grid`, row-major.
pub fn grid_scan(pot: &PotentialModel, grid: &GridSpec, branch: Branch, quad: &QuadratureSpec) -> Result<Vec<GridRow>> {
    grid.validate()?;
    quad.validate()?;
    Ok((0..grid.len())
        .map(|i| {
            let (l, p) = grid.point(i);
            grid_value(pot, l, p, branch, quad)
        })
        .collect())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::quadrature::integrate as quad_integrate;

    fn model() -> PotentialModel {
        PotentialModel::lorentzian(20.0, 1.0, 1.0).unwrap()
    }

    fn pt(l: f64, p: f64) -> ScatterPoint {
        ScatterPoint::new(l, p).unwrap()
    }

    #[test]
    fn free_action_closed_form_matches_quadrature() {
        let spec = QuadratureSpec { rel_tol: 1e-12, abs_tol: 1e-14, ..QuadratureSpec::default() };
        for &(l, p, r) in &[(1.0, 6f64.sqrt(), 3.0), (-2.5, 0.7, 40.0), (0.0, 3.0, 2.0), (1e-3, 9.0, 0.5)] {
            let r0 = f64::abs(l) / p;
            let s_max = sqrt(r - r0);
            let numeric = quad_integrate(
                |s| {
                    let rr = r0 + s * s;
                    sqrt((p * p - l * l / (rr * rr)).max(0.0)) * 2.0 * s
                },
                0.0,
                s_max,
                &[],
                &spec,
            )
            .unwrap();
            let closed = free_radial_action(l, p, r);
            assert!((numeric.value - closed).abs() < 1e-10 * (1.0 + closed), "{l} {p} {r}: {} vs {closed}", numeric.value);
        }
    }

    #[test]
    fn zero_potential_has_no_action_difference() {
        let free = PotentialModel::zero(1.0).unwrap();
        let q = QuadratureSpec::default();
        for &(l, p) in &[(0.0, 1.0), (2.0, 0.5), (-1.0, 6.0)] {
            let v = delta_w(&free, pt(l, p), &q).unwrap();
            assert!(v.value.abs() < 1e-14, "{v:?}");
            if l != 0.0 {
                assert!(d_delta_w_dl(&free, pt(l, p), &q).unwrap().value.abs() < 1e-12);
            }
        }
    }

    #[test]
    fn negative_and_even() {
        let pot = model();
        let q = QuadratureSpec::default();
        for &(l, p) in &[(0.0, 1.0), (0.0, 9.0), (1.0, 6f64.sqrt()), (2.5, 4.0), (0.3, 6.5), (7.0, 1.2)] {
            let a = delta_w(&pot, pt(l, p), &q).unwrap();
            let b = delta_w(&pot, pt(-l, p), &q).unwrap();
            assert!(a.value < 0.0);
            assert!((a.value - b.value).abs() <= 10.0 * q.rel_tol * (1.0 + a.value.abs()));
            assert!(a.err_estimate <= 10.0 * q.rel_tol * (1.0 + a.value.abs()));
        }
    }

    #[test]
    fn critical_point_and_bad_inputs_rejected() {
        let pot = model();
        let q = QuadratureSpec::default();
        let crit = pt(0.0, pot.p_c());
        assert_eq!(delta_w(&pot, crit, &q), Err(Error::CriticalPoint));
        assert!(matches!(d_delta_w_dl(&pot, pt(0.0, 3.0), &q), Err(Error::Domain(_))));
        assert_eq!(limit_dl(&pot, pot.p_c(), Side::FromAbove, &q), Err(Error::CriticalPoint));
        let bad_cut = q.with_r_cut(0.5);
        assert!(matches!(delta_w(&pot, pt(1.0, 6f64.sqrt()), &bad_cut), Err(Error::Domain(_))));
        assert!(wkb_phase_shift(&pot, pt(1.0, 2.0), 0.0, &q).is_err());
    }

    #[test]
    fn free_part_of_the_derivative_is_minus_sign_pi() {
        // With V ≡ 0 the W-part of the z-integral must equal −sgn(l)π on its own.
        let free = PotentialModel::zero(1.0).unwrap();
        let q = QuadratureSpec::default();
        for &l in &[0.2, -3.0] {
            let total = d_delta_w_dl(&free, pt(l, 2.0), &q).unwrap().value;
            let w_part = total - PI.copysign(l);
            assert!((w_part + PI.copysign(l)).abs() < 1e-12);
        }
    }

    #[test]
    fn derivative_antisymmetric() {
        let pot = model();
        let q = QuadratureSpec::default();
        for &(l, p) in &[(1.0, 6f64.sqrt()), (0.05, 8.0), (3.0, 2.0)] {
            let a = d_delta_w_dl(&pot, pt(l, p), &q).unwrap().value;
            let b = d_delta_w_dl(&pot, pt(-l, p), &q).unwrap().value;
            assert!((a + b).abs() < 1e-10);
        }
    }

    #[test]
    fn smoothed_branch_definition() {
        let pot = model();
        let q = QuadratureSpec::default();
        let p = 6f64.sqrt();
        let raw = delta_w(&pot, pt(1.0, p), &q).unwrap().value;
        let sm = delta_w_smoothed(&pot, pt(1.0, p), &q).unwrap().value;
        assert!((sm - (raw - TAU)).abs() < 1e-15 * raw.abs().max(1.0) * 10.0);
        let raw_neg = delta_w(&pot, pt(-0.4, p), &q).unwrap().value;
        assert_eq!(delta_w_smoothed(&pot, pt(-0.4, p), &q).unwrap().value, raw_neg);
        assert_eq!(delta_w_smoothed(&pot, pt(0.0, p), &q).unwrap().value, delta_w(&pot, pt(0.0, p), &q).unwrap().value);
    }

    #[test]
    fn phase_shift_reduction() {
        let pot = model();
        let q = QuadratureSpec::default();
        let d = wkb_phase_shift(&pot, pt(1.0, 6f64.sqrt()), 0.25, &q).unwrap();
        assert!(d.value < 0.0);
        let red = d.reduced();
        assert!((-core::f64::consts::FRAC_PI_2..core::f64::consts::FRAC_PI_2).contains(&red));
        assert!(libm::sin(d.value - red).abs() < 1e-12);
    }

    #[test]
    fn time_delay_rejects_barrier_energy_at_zero_l() {
        let pot = model();
        let q = QuadratureSpec::default();
        assert!(time_delay(&pot, 0.0, 20.0 + 1e-7, &q).is_err());
        assert!(time_delay(&pot, 0.0, -1.0, &q).is_err());
        assert!(time_delay(&pot, 0.5, 20.0, &q).unwrap().value.is_finite());
    }

    #[test]
    fn grid_layout_is_row_major_in_p() {
        let g = GridSpec { l_min: -1.0, l_max: 1.0, nl: 3, p_min: 1.0, p_max: 2.0, np: 2 };
        assert_eq!(g.point(0), (-1.0, 1.0));
        assert_eq!(g.point(2), (1.0, 1.0));
        assert_eq!(g.point(3), (-1.0, 2.0));
        assert!(GridSpec { p_min: 0.0, ..g }.validate().is_err());
    }

    #[test]
    fn grid_records_critical_point_as_missing() {
        let pot = model();
        let pc = pot.p_c();
        let g = GridSpec { l_min: -1.0, l_max: 1.0, nl: 3, p_min: pc, p_max: pc, np: 1 };
        let rows = grid_scan(&pot, &g, Branch::Raw, &QuadratureSpec::default()).unwrap();
        assert_eq!(rows.len(), 3);
        assert!(rows[0].value.is_some() && rows[2].value.is_some());
        assert_eq!(rows[1].value, None);
    }
}
