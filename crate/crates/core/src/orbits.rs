//! Classical scattering: deflection angles and their holonomy around the critical point.
//!
//! Sign conventions: the deflection `Δφ` is the counter-clockwise rotation of the velocity
//! between the incoming and outgoing asymptotes, reduced to `(−π, π]`. It satisfies
//! `Δφ = −∂ΔW/∂l`. A particle with `l > 0` passes the centre on the `+x` side, is pushed
//! further towards `+x`, and therefore has `Δφ < 0`.

use alloc::vec::Vec;

use crate::actions::{check_regular, cut_radius, d_delta_w_dl, Branch};
use crate::error::{Error, Result};
use crate::math::{atan2, round, sqrt, wrap_pi, PI, TAU};
use crate::ode::{self, StepControl};
use crate::potential::{PotentialModel, ScatterPoint};
use crate::quadrature::{geometric_breakpoints, integrate, Estimate, QuadratureSpec};

/// Deflection angle `Δφ = φ − sgn(l)π` from the orbit equation
/// `φ = 2∫_{r₀}^∞ l dr / (r √(p²r² − l² − 2μr²V))`.
///
/// Evaluated in `u = 1/r`, which is a different route from [`d_delta_w_dl`]; the two agree
/// up to sign.
pub fn deflection_integral(pot: &PotentialModel, pt: ScatterPoint, quad: &QuadratureSpec) -> Result<Estimate> {
    quad.validate()?;
    check_regular(pot, pt)?;
    if pt.l == 0.0 {
        return Err(Error::domain("deflection_integral needs l ≠ 0; integrate the orbit instead"));
    }
    let quad = &QuadratureSpec { abs_tol: quad.abs_tol.max(quad.rel_tol * PI), ..*quad };
    let r0 = pot.turning_point(pt)?;
    let (l, p2, two_mu) = (pt.l, pt.p * pt.p, 2.0 * pot.mu());
    let l2 = l * l;
    let u0 = 1.0 / r0;
    let v0 = pot.value(r0);
    let close = 1e-5 * pot.length_scale().min(r0);
    let v_at = |u: f64| if u == 0.0 { 0.0 } else { pot.value(1.0 / u) };

    // Far part, u ∈ [0, u₀/2]: no singularity.
    let u_mid = 0.5 * u0;
    let far = integrate(
        |u| l / sqrt(p2 - l2 * u * u - two_mu * v_at(u)),
        0.0,
        u_mid,
        &geometric_breakpoints(u_mid, 4.0, 1e-9),
        quad,
    )?;

    // Near part, u = u₀ − s²: with r₀ taken as the exact root the radicand is
    // l²s²(2u₀ − s²) + 2μ(V(r₀) − V(r)), both terms non-negative.
    let s_max = sqrt(u0 - u_mid);
    let near = integrate(
        |s| {
            let s2 = s * s;
            let u = u0 - s2;
            let r = 1.0 / u;
            let h = s2 / (u * u0);
            let dv = if h < close { pot.slope(r0 + 0.5 * h) * h } else { pot.value(r) - v0 };
            let head = l2 * s2 * (2.0 * u0 - s2);
            let radicand = (head - two_mu * dv).max(head);
            2.0 * l * s / sqrt(radicand)
        },
        0.0,
        s_max,
        &geometric_breakpoints(s_max, 4.0, 1e-9),
        quad,
    )?;
    Ok(far.add(near).scale(2.0).shift(-PI.copysign(l)))
}

/// Initial conditions and integration controls for [`integrate_orbit`].
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ImpactSetup {
    /// Start and stop radius. `None` picks the radius beyond which `|V| < 1e−12 E`.
    pub r_far: Option<f64>,
    pub control: StepControl,
    /// Keep every accepted step; otherwise only the end points are stored.
    pub record: bool,
}

impl Default for ImpactSetup {
    fn default() -> Self {
        ImpactSetup {
            r_far: None,
            control: StepControl { rel_tol: 1e-12, abs_tol: 1e-14, initial_step: 1e-3, max_steps: 2_000_000 },
            record: true,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PhaseSample {
    pub t: f64,
    pub x: f64,
    pub y: f64,
    pub px: f64,
    pub py: f64,
}

impl PhaseSample {
    pub fn energy(&self, pot: &PotentialModel) -> f64 {
        let r = sqrt(self.x * self.x + self.y * self.y);
        (self.px * self.px + self.py * self.py) / (2.0 * pot.mu()) + pot.value(r)
    }

    pub fn angular_momentum(&self) -> f64 {
        self.x * self.py - self.y * self.px
    }
}

/// A planar orbit coming in from `y = −∞` along `+y`.
#[derive(Debug, Clone, PartialEq)]
pub struct Trajectory {
    pub samples: Vec<PhaseSample>,
    pub l: f64,
    pub e: f64,
    /// CCW rotation of the velocity, in `(−π, π]`.
    pub deflection: f64,
}

impl Trajectory {
    pub fn last(&self) -> &PhaseSample {
        self.samples.last().expect("a trajectory has at least two samples")
    }

    /// Largest `|H − E| / (1 + |E|)` over the samples.
    pub fn max_energy_error(&self, pot: &PotentialModel) -> f64 {
        self.samples.iter().map(|s| (s.energy(pot) - self.e).abs()).fold(0.0, f64::max) / (1.0 + self.e.abs())
    }

    /// Largest `|L − l| / (1 + |l|)` over the samples.
    pub fn max_angular_momentum_error(&self) -> f64 {
        self.samples.iter().map(|s| (s.angular_momentum() - self.l).abs()).fold(0.0, f64::max) / (1.0 + self.l.abs())
    }

    /// Whether the particle left towards `y = +∞` (transmitted) rather than back towards `y = −∞`.
    pub fn escaped_forward(&self) -> bool {
        self.last().y > 0.0
    }
}

/// Integrates Hamilton's equations in Cartesian coordinates.
///
/// The particle starts at `(l/p, −R)` with momentum `(0, p)`, so that `x p_y − y p_x = l`,
/// and is followed until it is outside `R` again and moving outwards.
pub fn integrate_orbit(pot: &PotentialModel, pt: ScatterPoint, setup: &ImpactSetup) -> Result<Trajectory> {
    check_regular(pot, pt)?;
    let mu = pot.mu();
    let e = pt.energy(mu);
    let r_far = match setup.r_far {
        Some(r) if r > 0.0 && r.is_finite() => r,
        Some(r) => return Err(Error::domain(alloc::format!("r_far must be positive, got {r}"))),
        None => pot.decay_radius(1e-12, e),
    };
    let x0 = pt.l / pt.p;
    if x0.abs() >= r_far {
        return Err(Error::domain("impact parameter exceeds the start radius"));
    }
    let y0 = -sqrt(r_far * r_far - x0 * x0);
    let speed = pt.p / mu;
    // Generous bound: ten straight crossings of the start circle.
    let t_max = 20.0 * r_far / speed + 1e4 * pot.length_scale() / speed;

    let rhs = |_t: f64, s: &[f64; 4]| {
        let r = sqrt(s[0] * s[0] + s[1] * s[1]);
        let f = pot.force_over_r(r);
        [s[2] / mu, s[3] / mu, f * s[0], f * s[1]]
    };
    let mut samples = Vec::new();
    let record = setup.record;
    let r2_far = r_far * r_far;
    let (_, end) = ode::integrate(rhs, 0.0, [x0, y0, 0.0, pt.p], t_max, &setup.control, |t, s| {
        let sample = PhaseSample { t, x: s[0], y: s[1], px: s[2], py: s[3] };
        let outward = s[0] * s[2] + s[1] * s[3] > 0.0;
        let done = t > 0.0 && outward && s[0] * s[0] + s[1] * s[1] >= r2_far;
        if record || t == 0.0 || done {
            samples.push(sample);
        }
        done
    })?;
    // Reduce −π to π: the head-on reflection has vx = −0.0 and must report +π.
    let deflection = wrap_pi(atan2(-end[2], end[3]));
    Ok(Trajectory { samples, l: pt.l, e, deflection })
}

/// A polygonal path in the `(l, p)` plane, sampled uniformly along each leg.
#[derive(Debug, Clone, PartialEq)]
pub struct LoopPath {
    pub waypoints: Vec<(f64, f64)>,
    /// Whether the last waypoint connects back to the first.
    pub closed: bool,
    pub samples_per_leg: usize,
}

impl LoopPath {
    pub fn new(waypoints: Vec<(f64, f64)>, closed: bool, samples_per_leg: usize) -> Self {
        LoopPath { waypoints, closed, samples_per_leg }
    }

    /// Axis-aligned rectangle `[l_min, l_max] × [p_min, p_max]`, counter-clockwise with `l`
    /// horizontal and `p` vertical, starting at `(l_max, p_min)`.
    pub fn rectangle(l_min: f64, l_max: f64, p_min: f64, p_max: f64, samples_per_leg: usize) -> Self {
        LoopPath::new(alloc::vec![(l_max, p_min), (l_max, p_max), (l_min, p_max), (l_min, p_min)], true, samples_per_leg)
    }

    pub fn reversed(&self) -> Self {
        let mut waypoints = self.waypoints.clone();
        waypoints.reverse();
        if self.closed && !waypoints.is_empty() {
            waypoints.rotate_right(1);
        }
        LoopPath { waypoints, ..self.clone() }
    }

    /// Traverses `self` and then `other`; both must be closed and share their start point.
    pub fn concat(&self, other: &LoopPath) -> Result<Self> {
        if !(self.closed && other.closed) || self.waypoints.first() != other.waypoints.first() {
            return Err(Error::domain("only closed loops with a common start point can be concatenated"));
        }
        let mut waypoints = self.waypoints.clone();
        waypoints.push(self.waypoints[0]);
        waypoints.extend(other.waypoints.iter().skip(1).copied());
        Ok(LoopPath { waypoints, closed: true, samples_per_leg: self.samples_per_leg.max(other.samples_per_leg) })
    }

    /// Legs as `(start, end)` pairs.
    pub fn legs(&self) -> Vec<((f64, f64), (f64, f64))> {
        let w = &self.waypoints;
        let mut legs: Vec<_> = w.windows(2).map(|p| (p[0], p[1])).collect();
        if self.closed && w.len() > 1 && w[w.len() - 1] != w[0] {
            legs.push((w[w.len() - 1], w[0]));
        }
        legs
    }

    /// Validates the path against a potential: at least one leg, positive momenta, no leg
    /// through `(0, p_c)`, no leg running along `l = 0`.
    pub fn validate(&self, pot: &PotentialModel) -> Result<()> {
        if self.samples_per_leg == 0 {
            return Err(Error::domain("samples_per_leg must be positive"));
        }
        let legs = self.legs();
        if legs.is_empty() {
            return Err(Error::domain("a path needs at least two distinct waypoints"));
        }
        let pc = pot.p_c();
        for (i, &((l0, p0), (l1, p1))) in legs.iter().enumerate() {
            if !(p0 > 0.0 && p1 > 0.0) || ![l0, l1, p0, p1].iter().all(|x| x.is_finite()) {
                return Err(Error::domain(alloc::format!("leg {i} leaves the region p > 0")));
            }
            if l0 == 0.0 && l1 == 0.0 {
                return Err(Error::domain(alloc::format!("leg {i} runs along l = 0")));
            }
            if let Some(p) = zero_crossing(l0, p0, l1, p1) {
                if pc > 0.0 && (p - pc).abs() <= 1e-12 * pc {
                    return Err(Error::CriticalPoint);
                }
            }
        }
        Ok(())
    }

    /// Sample points of every leg, each leg including its start and excluding its end; an
    /// open path also includes its final waypoint.
    pub fn samples(&self) -> Vec<(usize, f64, f64)> {
        let n = self.samples_per_leg;
        let mut out = Vec::new();
        let legs = self.legs();
        for (i, &((l0, p0), (l1, p1))) in legs.iter().enumerate() {
            for j in 0..n {
                let t = j as f64 / n as f64;
                out.push((i, l0 + (l1 - l0) * t, p0 + (p1 - p0) * t));
            }
        }
        if !self.closed {
            if let Some(&(l, p)) = self.waypoints.last() {
                out.push((legs.len() - 1, l, p));
            }
        }
        out
    }
}

/// `p` where the segment crosses `l = 0`, if it does (touching counts).
fn zero_crossing(l0: f64, p0: f64, l1: f64, p1: f64) -> Option<f64> {
    if l0 == 0.0 {
        Some(p0)
    } else if l1 == 0.0 {
        Some(p1)
    } else if (l0 < 0.0) != (l1 < 0.0) {
        Some(p0 + (p1 - p0) * (l0 / (l0 - l1)))
    } else {
        None
    }
}

/// Passage of a path through `l = 0`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Crossing {
    pub leg: usize,
    pub p: f64,
    /// `+1` for `l: − → +`, `−1` for `l: + → −`.
    pub direction: i32,
    /// Branch on which `ΔW` is smooth at the crossing.
    pub branch: Branch,
}

#[derive(Debug, Clone, PartialEq)]
pub struct HolonomyReport {
    /// Change of the continuously tracked `Δφ` over the path.
    pub holonomy: f64,
    /// Winding number of the path around `(0, p_c)` (closed paths only; zero otherwise).
    pub winding: i32,
    pub crossings: Vec<Crossing>,
    /// Largest change of the tracked angle between neighbouring samples.
    pub max_step: f64,
}

/// Tracks `Δφ = −∂ΔW/∂l` along `path` and returns its total change.
///
/// Between samples on the same side of `l = 0` the tracked value is the deflection itself.
/// Across `l = 0` it continues on the branch that is smooth there: `ΔW̃` below `p_c`, which
/// shifts the raw deflection by `2π`, and `ΔW` above `p_c`, which does not.
pub fn loop_holonomy(pot: &PotentialModel, path: &LoopPath, quad: &QuadratureSpec) -> Result<HolonomyReport> {
    path.validate(pot)?;
    let points: Vec<(usize, f64, f64)> = path.samples().into_iter().filter(|s| s.1 != 0.0).collect();
    if points.len() < 2 {
        return Err(Error::domain("path has too few samples off l = 0"));
    }
    let mut values = Vec::with_capacity(points.len());
    for &(_, l, p) in &points {
        values.push(-d_delta_w_dl(pot, ScatterPoint::new(l, p)?, quad)?.value);
    }

    let pc = pot.p_c();
    let n = points.len();
    let pairs = if path.closed { n } else { n - 1 };
    let mut crossings = Vec::new();
    let mut total = 0.0;
    let mut max_step: f64 = 0.0;
    for i in 0..pairs {
        let j = (i + 1) % n;
        let (leg_a, la, pa) = points[i];
        let (leg_b, lb, pb) = points[j];
        let mut step = values[j] - values[i];
        if (la < 0.0) != (lb < 0.0) {
            let p = crossing_momentum(path, leg_a, leg_b, (la, pa), (lb, pb));
            if pc > 0.0 && (p - pc).abs() <= 1e-12 * pc {
                return Err(Error::CriticalPoint);
            }
            let direction = if lb > 0.0 { 1 } else { -1 };
            let branch = if p < pc { Branch::Smoothed } else { Branch::Raw };
            if branch == Branch::Smoothed {
                // Raw Δφ jumps from ±π to ∓π here; the smooth continuation does not.
                step += TAU * f64::from(direction);
            }
            crossings.push(Crossing { leg: leg_b, p, direction, branch });
        }
        if step.abs() > core::f64::consts::FRAC_PI_2 {
            return Err(Error::CoarseSampling { leg: leg_a, jump: step.abs() });
        }
        max_step = max_step.max(step.abs());
        total += step;
    }
    let winding = if path.closed { winding_number(path, pc)? } else { 0 };
    Ok(HolonomyReport { holonomy: total, winding, crossings, max_step })
}

/// Momentum at which the path passes `l = 0` between two consecutive off-axis samples.
fn crossing_momentum(path: &LoopPath, leg_a: usize, leg_b: usize, a: (f64, f64), b: (f64, f64)) -> f64 {
    if leg_a == leg_b {
        return zero_crossing(a.0, a.1, b.0, b.1).unwrap_or(a.1);
    }
    // The samples straddle a waypoint; the crossing lies on one of the two legs, or at the
    // waypoint itself.
    let legs = path.legs();
    let (_, corner) = legs[leg_a];
    for &(s, e) in &[(a, corner), (corner, b)] {
        if let Some(p) = zero_crossing(s.0, s.1, e.0, e.1) {
            return p;
        }
    }
    corner.1
}

/// Winding number of a closed path around `(0, center_p)`.
pub fn winding_number(path: &LoopPath, center_p: f64) -> Result<i32> {
    if !path.closed {
        return Err(Error::domain("winding number needs a closed path"));
    }
    let mut total = 0.0;
    for ((l0, p0), (l1, p1)) in path.legs() {
        if zero_crossing(l0, p0 - center_p, l1, p1 - center_p).is_some() && segment_hits_origin(l0, p0 - center_p, l1, p1 - center_p) {
            return Err(Error::CriticalPoint);
        }
        let a0 = atan2(p0 - center_p, l0);
        let a1 = atan2(p1 - center_p, l1);
        total += wrap_pi(a1 - a0);
    }
    Ok(round(total / TAU) as i32)
}

fn segment_hits_origin(x0: f64, y0: f64, x1: f64, y1: f64) -> bool {
    let cross = x0 * y1 - x1 * y0;
    let dot = x0 * x1 + y0 * y1;
    cross == 0.0 && dot <= 0.0
}

/// Where the default tail split of the action integrals falls for `pt`; exposed for
/// diagnostics.
pub fn cut_radius_for(pot: &PotentialModel, pt: ScatterPoint, quad: &QuadratureSpec) -> Result<f64> {
    let r0 = pot.turning_point(pt)?;
    cut_radius(pot, r0, quad)
}
