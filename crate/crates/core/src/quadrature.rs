//! Globally adaptive Gauss–Kronrod quadrature.
//!
//! Every integral in the crate goes through [`integrate`]: the interval is split at the
//! supplied breakpoints, each piece is evaluated with the 21-point Kronrod extension of the
//! 10-point Gauss rule, and the piece with the largest error estimate is bisected until the
//! summed error meets `max(abs_tol, rel_tol * |I|)`. Integrable endpoint singularities are
//! expected to be removed by the caller through a change of variables; the rule never
//! evaluates the endpoints themselves.

use alloc::collections::BinaryHeap;
use alloc::vec::Vec;
use core::cmp::Ordering;

use crate::error::{Error, Result};

/// Tolerances and limits shared by every improper integral.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct QuadratureSpec {
    pub rel_tol: f64,
    pub abs_tol: f64,
    /// Radius separating the turning-point region from the far tail. `None` picks one from
    /// the turning point and the potential's length scale.
    pub r_cut: Option<f64>,
    pub max_subdivisions: usize,
}

impl Default for QuadratureSpec {
    fn default() -> Self {
        QuadratureSpec { rel_tol: 1e-10, abs_tol: 1e-12, r_cut: None, max_subdivisions: 4000 }
    }
}

impl QuadratureSpec {
    pub fn with_rel_tol(mut self, rel_tol: f64) -> Self {
        self.rel_tol = rel_tol;
        self
    }

    pub fn with_r_cut(mut self, r_cut: f64) -> Self {
        self.r_cut = Some(r_cut);
        self
    }

    pub fn validate(&self) -> Result<()> {
        let ok = self.rel_tol > 0.0
            && self.abs_tol > 0.0
            && self.rel_tol.is_finite()
            && self.abs_tol.is_finite()
            && self.max_subdivisions > 0;
        if !ok {
            return Err(Error::domain("quadrature tolerances must be positive and finite"));
        }
        if let Some(r) = self.r_cut {
            if !(r > 0.0 && r.is_finite()) {
                return Err(Error::domain("r_cut must be positive and finite"));
            }
        }
        Ok(())
    }
}

/// A value together with an absolute error estimate.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Estimate {
    pub value: f64,
    pub err_estimate: f64,
}

impl Estimate {
    pub fn new(value: f64, err_estimate: f64) -> Self {
        Estimate { value, err_estimate }
    }

    pub(crate) fn add(self, other: Estimate) -> Estimate {
        Estimate::new(self.value + other.value, self.err_estimate + other.err_estimate)
    }

    pub(crate) fn scale(self, c: f64) -> Estimate {
        Estimate::new(c * self.value, c.abs() * self.err_estimate)
    }

    pub(crate) fn shift(self, c: f64) -> Estimate {
        Estimate::new(self.value + c, self.err_estimate)
    }
}

const XGK: [f64; 11] = [
    0.995_657_163_025_808_080_735_527_280_689_003,
    0.973_906_528_517_171_720_077_964_012_084_452,
    0.930_157_491_355_708_226_001_207_180_059_508,
    0.865_063_366_688_984_510_732_096_688_423_493,
    0.780_817_726_586_416_897_063_717_578_345_042,
    0.679_409_568_299_024_406_234_327_365_114_874,
    0.562_757_134_668_604_683_339_000_099_272_694,
    0.433_395_394_129_247_190_799_265_943_165_784,
    0.294_392_862_701_460_198_131_126_603_103_866,
    0.148_874_338_981_631_210_884_826_001_129_720,
    0.0,
];

const WG: [f64; 5] = [
    0.066_671_344_308_688_137_593_568_809_893_332,
    0.149_451_349_150_580_593_145_776_339_657_697,
    0.219_086_362_515_982_043_995_534_934_228_163,
    0.269_266_719_309_996_355_091_226_921_569_469,
    0.295_524_224_714_752_870_173_892_994_651_338,
];

const WGK: [f64; 11] = [
    0.011_694_638_867_371_874_278_064_396_062_192,
    0.032_558_162_307_964_727_478_818_972_459_390,
    0.054_755_896_574_351_996_031_381_300_244_580,
    0.075_039_674_810_919_952_767_043_140_916_190,
    0.093_125_454_583_697_605_535_065_465_083_366,
    0.109_387_158_802_297_641_899_210_590_325_805,
    0.123_491_976_262_065_851_077_958_109_831_074,
    0.134_709_217_311_473_325_928_054_001_771_707,
    0.142_775_938_577_060_080_797_094_273_138_717,
    0.147_739_104_901_338_491_374_841_515_972_068,
    0.149_445_554_002_916_905_664_936_468_389_821,
];

fn gk21<F: FnMut(f64) -> f64>(f: &mut F, a: f64, b: f64) -> (f64, f64) {
    let center = 0.5 * (a + b);
    let half = 0.5 * (b - a);
    let fc = f(center);
    let mut kronrod = fc * WGK[10];
    let mut gauss = 0.0;
    let mut abs_sum = fc.abs() * WGK[10];
    let mut fv1 = [0.0; 10];
    let mut fv2 = [0.0; 10];
    for j in 0..10 {
        let dx = half * XGK[j];
        let f1 = f(center - dx);
        let f2 = f(center + dx);
        fv1[j] = f1;
        fv2[j] = f2;
        kronrod += WGK[j] * (f1 + f2);
        abs_sum += WGK[j] * (f1.abs() + f2.abs());
        if j % 2 == 1 {
            gauss += WG[j / 2] * (f1 + f2);
        }
    }
    let mean = 0.5 * kronrod;
    let mut asc = WGK[10] * (fc - mean).abs();
    for j in 0..10 {
        asc += WGK[j] * ((fv1[j] - mean).abs() + (fv2[j] - mean).abs());
    }
    let result = kronrod * half;
    let res_abs = abs_sum * half.abs();
    let res_asc = asc * half.abs();
    let mut err = ((kronrod - gauss) * half).abs();
    if res_asc != 0.0 && err != 0.0 {
        let scale = 200.0 * err / res_asc;
        err = res_asc * if scale < 1.0 { scale * libm::sqrt(scale) } else { 1.0 };
    }
    if res_abs > f64::MIN_POSITIVE / (50.0 * f64::EPSILON) {
        err = err.max(50.0 * f64::EPSILON * res_abs);
    }
    (result, err)
}

#[derive(Debug, Clone, Copy)]
struct Piece {
    a: f64,
    b: f64,
    value: f64,
    err: f64,
}

impl PartialEq for Piece {
    fn eq(&self, other: &Self) -> bool {
        self.cmp(other) == Ordering::Equal
    }
}

impl Eq for Piece {}

impl PartialOrd for Piece {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

impl Ord for Piece {
    fn cmp(&self, other: &Self) -> Ordering {
        self.err.total_cmp(&other.err).then(other.a.total_cmp(&self.a))
    }
}

/// Integrates `f` over `[a, b]`, seeding the subdivision with `breakpoints` (which must lie
/// strictly inside the interval; others are ignored).
pub fn integrate<F>(
    mut f: F,
    a: f64,
    b: f64,
    breakpoints: &[f64],
    spec: &QuadratureSpec,
) -> Result<Estimate>
where
    F: FnMut(f64) -> f64,
{
    if !(a.is_finite() && b.is_finite()) {
        return Err(Error::domain("integration bounds must be finite"));
    }
    if a == b {
        return Ok(Estimate::new(0.0, 0.0));
    }
    let (lo, hi, sign) = if a < b { (a, b, 1.0) } else { (b, a, -1.0) };

    let mut cuts: Vec<f64> = Vec::with_capacity(breakpoints.len() + 2);
    cuts.push(lo);
    let mut inner: Vec<f64> = breakpoints.iter().copied().filter(|&x| x > lo && x < hi).collect();
    inner.sort_by(f64::total_cmp);
    inner.dedup();
    cuts.extend(inner);
    cuts.push(hi);

    let mut heap = BinaryHeap::with_capacity(cuts.len() + 64);
    let mut settled: Vec<Piece> = Vec::new();
    for w in cuts.windows(2) {
        let (value, err) = gk21(&mut f, w[0], w[1]);
        heap.push(Piece { a: w[0], b: w[1], value, err });
    }

    let total = |heap: &BinaryHeap<Piece>, settled: &[Piece]| -> (f64, f64) {
        let mut parts: Vec<&Piece> = heap.iter().chain(settled.iter()).collect();
        parts.sort_by(|x, y| x.a.total_cmp(&y.a));
        parts.iter().fold((0.0, 0.0), |(v, e), p| (v + p.value, e + p.err))
    };

    let mut pieces = heap.len();
    let (mut value, mut err) = total(&heap, &settled);
    loop {
        if !value.is_finite() || !err.is_finite() {
            return Err(Error::numerical("integrand produced a non-finite value"));
        }
        let target = spec.abs_tol.max(spec.rel_tol * value.abs());
        if err <= target {
            return Ok(Estimate::new(sign * value, err));
        }
        if pieces >= spec.max_subdivisions {
            return Err(Error::Tolerance { estimate: sign * value, error: err });
        }
        let Some(worst) = heap.pop() else {
            // Every remaining piece is at the resolution limit.
            return Err(Error::Tolerance { estimate: sign * value, error: err });
        };
        let mid = 0.5 * (worst.a + worst.b);
        if !(mid > worst.a && mid < worst.b) || (worst.b - worst.a) < 64.0 * f64::EPSILON * worst.a.abs().max(worst.b.abs()) {
            settled.push(worst);
            continue;
        }
        let (v1, e1) = gk21(&mut f, worst.a, mid);
        let (v2, e2) = gk21(&mut f, mid, worst.b);
        heap.push(Piece { a: worst.a, b: mid, value: v1, err: e1 });
        heap.push(Piece { a: mid, b: worst.b, value: v2, err: e2 });
        pieces += 1;
        value += v1 + v2 - worst.value;
        err += e1 + e2 - worst.err;
        if pieces % 64 == 0 {
            // Re-sum from scratch so the running totals do not drift.
            (value, err) = total(&heap, &settled);
        }
    }
}

/// Breakpoints `top * ratio^-j`, `j = 1..`, down to `top * floor_fraction`.
pub(crate) fn geometric_breakpoints(top: f64, ratio: f64, floor_fraction: f64) -> Vec<f64> {
    let mut out = Vec::new();
    let mut x = top / ratio;
    while x > top * floor_fraction {
        out.push(x);
        x /= ratio;
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::math::{exp, sqrt, PI};

    fn spec(rel: f64) -> QuadratureSpec {
        QuadratureSpec { rel_tol: rel, abs_tol: 1e-15, ..QuadratureSpec::default() }
    }

    #[test]
    fn polynomial_is_exact() {
        let r = integrate(|x| 3.0 * x * x - x + 1.0, -1.0, 2.0, &[], &spec(1e-12)).unwrap();
        assert!((r.value - 10.5).abs() < 1e-13);
    }

    #[test]
    fn gaussian() {
        let r = integrate(|x| exp(-x * x), -8.0, 8.0, &[], &spec(1e-13)).unwrap();
        assert!((r.value - sqrt(PI)).abs() < 1e-13, "{}", r.value);
    }

    #[test]
    fn reversed_bounds_flip_sign() {
        let f = |x: f64| libm::sin(x);
        let a = integrate(f, 0.0, 2.0, &[], &spec(1e-12)).unwrap();
        let b = integrate(f, 2.0, 0.0, &[], &spec(1e-12)).unwrap();
        assert!((a.value + b.value).abs() < 1e-15);
    }

    #[test]
    fn substitution_removes_sqrt_endpoint() {
        // ∫_0^1 sqrt(1 - x) dx = 2/3, with x = 1 - s^2.
        let r = integrate(|s| sqrt(s * s) * 2.0 * s, 0.0, 1.0, &[], &spec(1e-13)).unwrap();
        assert!((r.value - 2.0 / 3.0).abs() < 1e-14);
    }

    #[test]
    fn narrow_peak_with_breakpoints() {
        // ∫_0^10 eps / (eps^2 + x^2) dx = atan(10 / eps)
        let eps = 1e-7;
        let bps = geometric_breakpoints(10.0, 4.0, 1e-10);
        let r = integrate(|x| eps / (eps * eps + x * x), 0.0, 10.0, &bps, &spec(1e-12)).unwrap();
        assert!((r.value - libm::atan(10.0 / eps)).abs() < 1e-11, "{}", r.value);
    }

    #[test]
    fn budget_exhaustion_reports_best_estimate() {
        let tight = QuadratureSpec { rel_tol: 1e-14, abs_tol: 1e-300, max_subdivisions: 3, r_cut: None };
        match integrate(|x| 1.0 / sqrt(x), 0.0, 1.0, &[], &tight) {
            Err(Error::Tolerance { estimate, error }) => {
                assert!((estimate - 2.0).abs() < 0.1);
                assert!(error > 0.0);
            }
            other => panic!("expected tolerance error, got {other:?}"),
        }
    }
}
