//! Exact partial-wave phase shifts from the planar radial wave equation.
//!
//! Writing `ψ(r, φ) = r^{−1/2} u(r) e^{imφ}` turns the 2D Schrödinger equation into
//!
//! ```text
//! u″ + [κ² − (m² − 1/4)/r² − 2μV(r)/ħ²] u = 0,   κ = p/ħ,
//! ```
//!
//! with `u ~ r^{|m|+1/2}` at the origin. When `V` has a `C/r²` tail it is folded into the
//! centrifugal term, so far out `u` is a combination of `√r J_ν(κr)` and `√r Y_ν(κr)` with
//! `ν² = m² + 2μC/ħ²`. The phase `δ_ν` read off against order `ν` converts to the phase
//! against the free order `|m|` as `δ = δ_ν + (|m| − ν)π/2`.
//!
//! The equation is integrated with Numerov's method in `x = r/s + ln r` (logarithmic near
//! the origin, linear far out), on three successively halved meshes combined by Richardson
//! extrapolation. The short-range remainder `V − C/r²` beyond the matching radius is
//! accounted for to first order.

use alloc::vec::Vec;

use crate::actions::wkb_phase_shift;
use crate::bessel::{hankel_jy, hankel_min_argument};
use crate::error::{Error, Result};
use crate::math::{atan2, cos, exp, log, round, sin, sqrt, wrap_half_pi, FRAC_PI_2, TAU};
use crate::potential::{PotentialModel, ScatterPoint};
use crate::quadrature::{integrate, QuadratureSpec};

/// Mesh and matching controls for [`solve_radial`].
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct MeshSpec {
    /// Numerov steps per asymptotic wavelength on the coarsest mesh.
    pub points_per_wavelength: f64,
    /// Number of meshes (each halving the step) combined by Richardson extrapolation.
    pub levels: usize,
    /// Start radius in units of the potential's length scale.
    pub r_start: f64,
    /// Outer matching radius; `None` chooses it from `tail_tol` and the Bessel order.
    pub match_radius: Option<f64>,
    /// Size allowed for the first-order phase contribution of `V − C/r²` beyond the
    /// matching radius.
    pub tail_tol: f64,
}

impl Default for MeshSpec {
    fn default() -> Self {
        MeshSpec { points_per_wavelength: 40.0, levels: 3, r_start: 1e-6, match_radius: None, tail_tol: 1e-6 }
    }
}

impl MeshSpec {
    pub fn validate(&self) -> Result<()> {
        let ok = self.points_per_wavelength >= 8.0
            && self.points_per_wavelength.is_finite()
            && (1..=5).contains(&self.levels)
            && self.r_start > 0.0
            && self.r_start < 1e-2
            && self.tail_tol > 0.0;
        if !ok {
            return Err(Error::domain("invalid mesh specification"));
        }
        if let Some(r) = self.match_radius {
            if !(r > 0.0 && r.is_finite()) {
                return Err(Error::domain("match radius must be positive"));
            }
        }
        Ok(())
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct RadialSolution {
    pub m: i32,
    pub k_wave: f64,
    /// Bessel order used for matching.
    pub nu: f64,
    /// Radii of the coarsest mesh.
    pub grid: Vec<f64>,
    /// `u` on `grid`, scaled to unit maximum.
    pub u: Vec<f64>,
    /// Matching radii.
    pub r1: f64,
    pub r2: f64,
    /// Phase against order `ν`, including the tail correction, in `[−π/2, π/2)`.
    pub delta_nu: f64,
    /// First-order phase of `V − C/r²` beyond `r2`.
    pub tail_correction: f64,
    /// Exact phase shift against the free wave, in `[−π/2, π/2)`.
    pub delta_exact: f64,
    /// Difference between the last two Richardson stages.
    pub err_estimate: f64,
}

struct Equation<'a> {
    pot: &'a PotentialModel,
    k2: f64,
    m2: f64,
    scale: f64,
    coupling: f64,
}

impl Equation<'_> {
    /// `Q(r)` of `u″ + Q u = 0`.
    fn q(&self, r: f64) -> f64 {
        self.k2 - (self.m2 - 0.25) / (r * r) - self.coupling * self.pot.value(r)
    }

    /// `F(x)` of `w″ + F w = 0` for `u = √(dr/dx) w`.
    fn f(&self, r: f64) -> f64 {
        let s = self.scale;
        let g = r * s / (r + s);
        let rs = r + s;
        g * g * self.q(r) - s * s * s * (0.25 * s + r) / (rs * rs * rs * rs)
    }

    fn g(&self, r: f64) -> f64 {
        r * self.scale / (r + self.scale)
    }

    fn x_of(&self, r: f64) -> f64 {
        r / self.scale + log(r)
    }

    /// Inverse of `x(r)` by Newton's method from `guess`.
    fn r_of(&self, x: f64, guess: f64) -> f64 {
        let mut r = guess;
        for _ in 0..50 {
            let f = self.x_of(r) - x;
            let step = f / (1.0 / self.scale + 1.0 / r);
            let next = if r - step > 0.0 { r - step } else { 0.5 * r };
            if (next - r).abs() <= 4.0 * f64::EPSILON * r {
                return next;
            }
            r = next;
        }
        r
    }
}

/// Result of one Numerov sweep: `u` at the two matching grid points.
struct Sweep {
    u1: f64,
    u2: f64,
    grid: Vec<f64>,
    u: Vec<f64>,
}

fn sweep(eq: &Equation<'_>, alpha: f64, c: f64, x0: f64, h: f64, i1: usize, i2: usize, keep: bool) -> Sweep {
    let r0 = eq.r_of(x0, exp(x0).min(1.0));
    let u_start = |r: f64| libm::pow(r / r0, alpha) * (1.0 + c * r * r);
    let mut grid = Vec::new();
    let mut u = Vec::new();

    let mut r_prev = r0;
    let mut r_cur = eq.r_of(x0 + h, r0);
    let mut w_prev = u_start(r_prev) / sqrt(eq.g(r_prev));
    let mut w_cur = u_start(r_cur) / sqrt(eq.g(r_cur));
    let h2 = h * h / 12.0;
    let mut f_prev = eq.f(r_prev);
    let mut f_cur = eq.f(r_cur);
    if keep {
        grid.extend([r_prev, r_cur]);
        u.extend([w_prev * sqrt(eq.g(r_prev)), w_cur * sqrt(eq.g(r_cur))]);
    }
    let (mut u1, mut u2) = (0.0, 0.0);
    for i in 2..=i2 {
        let x = x0 + h * i as f64;
        let r_next = eq.r_of(x, r_cur + (r_cur - r_prev));
        let f_next = eq.f(r_next);
        let w_next = (2.0 * w_cur * (1.0 - 5.0 * h2 * f_cur) - w_prev * (1.0 + h2 * f_prev)) / (1.0 + h2 * f_next);
        w_prev = w_cur;
        w_cur = w_next;
        f_prev = f_cur;
        f_cur = f_next;
        r_prev = r_cur;
        r_cur = r_next;
        if w_cur.abs() > 1e150 {
            w_prev *= 1e-150;
            w_cur *= 1e-150;
            u1 *= 1e-150;
            for v in &mut u {
                *v *= 1e-150;
            }
        }
        let u_here = w_cur * sqrt(eq.g(r_cur));
        if i == i1 {
            u1 = u_here;
        }
        if i == i2 {
            u2 = u_here;
        }
        if keep {
            grid.push(r_cur);
            u.push(u_here);
        }
    }
    Sweep { u1, u2, grid, u }
}

/// Phase of `u` against `√r (J_ν cos δ − Y_ν sin δ)` from its values at two radii.
fn match_phase(nu: f64, k: f64, r1: f64, u1: f64, r2: f64, u2: f64) -> Result<f64> {
    let (j1, y1) = hankel_jy(nu, k * r1)?;
    let (j2, y2) = hankel_jy(nu, k * r2)?;
    let (f1, g1) = (sqrt(r1) * j1, sqrt(r1) * y1);
    let (f2, g2) = (sqrt(r2) * j2, sqrt(r2) * y2);
    let num = u2 * f1 - u1 * f2;
    let den = u2 * g1 - u1 * g2;
    Ok(wrap_half_pi(atan2(num, den)))
}

/// First-order phase of the short-range remainder `U = 2μ(V − C/r²)/ħ²` beyond `r2`:
/// `−(π/2) ∫ U r (J_ν cos δ − Y_ν sin δ)² dr`. The oscillating factor is integrated exactly
/// over twenty wavelengths and replaced by its mean `(J_ν² + Y_ν²)/2` beyond.
fn tail_phase(pot: &PotentialModel, coupling: f64, nu: f64, k: f64, r2: f64, delta: f64) -> Result<f64> {
    let c_tail = pot.inverse_square_tail();
    let u_rest = |r: f64| coupling * (pot.value(r) - c_tail / (r * r));
    let (cd, sd) = (cos(delta), sin(delta));
    let spec = QuadratureSpec { rel_tol: 1e-8, abs_tol: 1e-14, r_cut: None, max_subdivisions: 20_000 };
    let wavelength = TAU / k;
    let r3 = r2 + 20.0 * wavelength;
    let breaks: Vec<f64> = (1..40).map(|i| r2 + 0.5 * wavelength * i as f64).collect();
    let mut failure = None;
    let mut record = |e: Error| {
        failure.get_or_insert(e);
        0.0
    };
    let near = integrate(
        |r| match hankel_jy(nu, k * r) {
            Ok((j, y)) => {
                let w = j * cd - y * sd;
                u_rest(r) * r * w * w
            }
            Err(e) => record(e),
        },
        r2,
        r3,
        &breaks,
        &spec,
    );
    let far = integrate(
        |t| {
            let r = r3 / t;
            match hankel_jy(nu, k * r) {
                Ok((j, y)) => 0.5 * u_rest(r) * r * (j * j + y * y) * r3 / (t * t),
                Err(_) => 0.0,
            }
        },
        0.0,
        1.0,
        &[],
        &spec,
    );
    if let Some(e) = failure {
        return Err(e);
    }
    Ok(-FRAC_PI_2 * (near?.value + far?.value))
}

/// Integrates the radial equation for partial wave `m` at wavenumber `k_wave` and extracts
/// the exact phase shift.
pub fn solve_radial(pot: &PotentialModel, m: i32, k_wave: f64, hbar: f64, mesh: &MeshSpec) -> Result<RadialSolution> {
    mesh.validate()?;
    if !(k_wave > 0.0 && k_wave.is_finite()) {
        return Err(Error::domain(alloc::format!("wavenumber must be positive, got {k_wave}")));
    }
    if !(hbar > 0.0 && hbar.is_finite()) {
        return Err(Error::domain(alloc::format!("hbar must be positive, got {hbar}")));
    }
    let mu = pot.mu();
    let coupling = 2.0 * mu / (hbar * hbar);
    let m_abs = f64::from(m.unsigned_abs());
    let m2 = m_abs * m_abs;
    let nu = sqrt(m2 + coupling * pot.inverse_square_tail());
    let scale = pot.length_scale();
    let eq = Equation { pot, k2: k_wave * k_wave, m2, scale, coupling };

    // Matching radius: Hankel's expansion must be valid and the remainder beyond small.
    let c_tail = pot.inverse_square_tail();
    let r_min = 1.05 * hankel_min_argument(nu) / k_wave;
    let r_match = match mesh.match_radius {
        Some(r) if r >= r_min => r,
        Some(r) => {
            return Err(Error::domain(alloc::format!(
                "match radius {r} is inside the region where the Bessel asymptotics hold (r ≥ {r_min})"
            )))
        }
        None => {
            let mut r = r_min.max(20.0 * scale);
            let mut guard = 0;
            while coupling * (pot.value(r) - c_tail / (r * r)).abs() * r / k_wave > mesh.tail_tol {
                r *= 1.25;
                guard += 1;
                if guard > 200 {
                    return Err(Error::numerical("matching radius unreachable: the potential decays too slowly"));
                }
            }
            r
        }
    };

    let alpha = m_abs + 0.5;
    let q0 = eq.k2 - coupling * pot.value(0.0);
    let c = -q0 / (4.0 * alpha + 2.0);
    let x0 = eq.x_of(mesh.r_start * scale);
    let wavelength = TAU / k_wave;
    let h_far = wavelength / (mesh.points_per_wavelength * scale);
    let h_near = TAU / (mesh.points_per_wavelength * (m_abs + 1.0));
    let h = h_far.min(h_near);
    let x2 = eq.x_of(r_match);
    let i2 = libm::ceil((x2 - x0) / h) as usize;
    let quarter = round((0.25 * wavelength / scale) / h).max(1.0) as usize;
    let i1 = i2 - quarter;
    if i2 > 50_000_000 {
        return Err(Error::numerical("mesh too large; lower points_per_wavelength or the match radius"));
    }

    let mut phases = Vec::with_capacity(mesh.levels);
    let mut coarse = None;
    let (mut r1, mut r2) = (0.0, 0.0);
    for level in 0..mesh.levels {
        let factor = 1usize << level;
        let hl = h / factor as f64;
        let s = sweep(&eq, alpha, c, x0, hl, i1 * factor, i2 * factor, level == 0);
        r1 = eq.r_of(x0 + hl * (i1 * factor) as f64, r_match);
        r2 = eq.r_of(x0 + hl * (i2 * factor) as f64, r_match);
        if !(s.u1.is_finite() && s.u2.is_finite()) || (s.u1 == 0.0 && s.u2 == 0.0) {
            return Err(Error::numerical("radial solution is not finite at the matching radii"));
        }
        let phase = match_phase(nu, k_wave, r1, s.u1, r2, s.u2)?;
        // Keep consecutive levels on the same branch mod π.
        let phase = match phases.last() {
            Some(&prev) => prev + wrap_half_pi(phase - prev),
            None => phase,
        };
        phases.push(phase);
        if level == 0 {
            coarse = Some(s);
        }
    }

    // Richardson: Numerov's phase error expands in h⁴, h⁶, ...
    let mut table = phases.clone();
    let mut order = 4;
    let mut err_estimate = f64::NAN;
    for _ in 1..mesh.levels {
        let ratio = f64::from(1u32 << order);
        let next: Vec<f64> = table.windows(2).map(|w| w[1] + (w[1] - w[0]) / (ratio - 1.0)).collect();
        err_estimate = (next[next.len() - 1] - table[table.len() - 1]).abs();
        table = next;
        order += 2;
    }
    let delta_matched = table[table.len() - 1];
    if mesh.levels == 1 {
        err_estimate = f64::NAN;
    }

    let tail_correction = tail_phase(pot, coupling, nu, k_wave, r2, delta_matched)?;
    let delta_nu = delta_matched + tail_correction;
    let delta_exact = wrap_half_pi(delta_nu + FRAC_PI_2 * (m_abs - nu));

    let s = coarse.expect("at least one level");
    let peak = s.u.iter().fold(0.0f64, |a, v| a.max(v.abs()));
    let u = if peak > 0.0 { s.u.iter().map(|v| v / peak).collect() } else { s.u };
    Ok(RadialSolution {
        m,
        k_wave,
        nu,
        grid: s.grid,
        u,
        r1,
        r2,
        delta_nu: wrap_half_pi(delta_nu),
        tail_correction,
        delta_exact,
        err_estimate,
    })
}

/// One row of a WKB-versus-exact comparison.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ComparisonRow {
    pub m: i32,
    pub k: f64,
    /// `ΔW / 2ħ`, not reduced.
    pub delta_wkb: f64,
    /// The representative of the exact phase mod π closest to `delta_wkb`.
    pub delta_exact: f64,
    pub abs_err: f64,
    /// `abs_err / |delta_exact|`.
    pub rel_err: f64,
}

/// Compares the WKB and exact phase shifts at one lattice point `(l, p) = (mħ, kħ)`.
pub fn compare_point(pot: &PotentialModel, m: i32, k: f64, hbar: f64, quad: &QuadratureSpec, mesh: &MeshSpec) -> Result<ComparisonRow> {
    let pt = ScatterPoint::new(f64::from(m) * hbar, k * hbar)?;
    let wkb = wkb_phase_shift(pot, pt, hbar, quad)?.value;
    let exact = solve_radial(pot, m, k, hbar, mesh)?.delta_exact;
    let diff = wrap_half_pi(exact - wkb);
    let aligned = wkb + diff;
    let abs_err = diff.abs();
    let rel_err = if aligned == 0.0 { f64::INFINITY } else { abs_err / aligned.abs() };
    Ok(ComparisonRow { m, k, delta_wkb: wkb, delta_exact: aligned, abs_err, rel_err })
}

/// [`compare_point`] over the grid `m_list × k_list`, row-major in `m`.
pub fn compare_wkb(
    pot: &PotentialModel,
    m_list: &[i32],
    k_list: &[f64],
    hbar: f64,
    quad: &QuadratureSpec,
    mesh: &MeshSpec,
) -> Vec<(i32, f64, Result<ComparisonRow>)> {
    let mut out = Vec::with_capacity(m_list.len() * k_list.len());
    for &m in m_list {
        for &k in k_list {
            out.push((m, k, compare_point(pot, m, k, hbar, quad, mesh)));
        }
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;

    fn model() -> PotentialModel {
        PotentialModel::lorentzian(20.0, 1.0, 1.0).unwrap()
    }

    #[test]
    fn free_waves_have_no_phase_shift() {
        let free = PotentialModel::zero(1.0).unwrap();
        for &(m, k) in &[(0, 5.0), (3, 12.0), (-7, 30.0)] {
            let s = solve_radial(&free, m, k, 0.25, &MeshSpec::default()).unwrap();
            assert!(s.delta_exact.abs() < 1e-8, "m={m} k={k}: {}", s.delta_exact);
        }
    }

    #[test]
    fn mapping_is_inverted() {
        let pot = model();
        let eq = Equation { pot: &pot, k2: 1.0, m2: 0.0, scale: 1.0, coupling: 1.0 };
        for &r in &[1e-6, 0.3, 1.0, 17.0, 900.0] {
            let x = eq.x_of(r);
            assert!((eq.r_of(x, 1.0) - r).abs() <= 1e-13 * r);
        }
    }

    #[test]
    fn symmetric_in_m() {
        let pot = model();
        let a = solve_radial(&pot, 4, 9.8, 0.25, &MeshSpec::default()).unwrap();
        let b = solve_radial(&pot, -4, 9.8, 0.25, &MeshSpec::default()).unwrap();
        assert_eq!(a.delta_exact, b.delta_exact);
    }

    #[test]
    fn wkb_within_one_percent_at_m4_k_sqrt6() {
        let pot = model();
        let row = compare_point(&pot, 4, 6f64.sqrt() / 0.25, 0.25, &QuadratureSpec::default(), &MeshSpec::default()).unwrap();
        assert!(row.rel_err < 0.01, "{row:?}");
    }
}
