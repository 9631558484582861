// Transcendental functions are not available in `core`; route them through libm.
pub(crate) use libm::{atan, atan2, cos, exp, floor, log, round, sin, sqrt};

pub(crate) use core::f64::consts::{FRAC_PI_2, PI, TAU};

/// Reduces an angle to `[-π/2, π/2)`.
pub(crate) fn wrap_half_pi(x: f64) -> f64 {
    let r = x - PI * floor(x / PI + 0.5);
    if r >= FRAC_PI_2 {
        r - PI
    } else if r < -FRAC_PI_2 {
        r + PI
    } else {
        r
    }
}

/// Reduces an angle to `(-π, π]`.
pub(crate) fn wrap_pi(x: f64) -> f64 {
    let r = x - TAU * floor(x / TAU + 0.5);
    if r <= -PI {
        r + TAU
    } else if r > PI {
        r - TAU
    } else {
        r
    }
}
