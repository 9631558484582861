mod common;

use common::oracle::{tanh_sinh, Lorentzian};
use monoscat_core::actions::{d_delta_w_dl, delta_w, free_radial_action};
use monoscat_core::{PotentialModel, QuadratureSpec, ScatterPoint};
use rand::rngs::StdRng;
use rand::{Rng, SeedableRng};

const MODEL: Lorentzian = Lorentzian { a: 20.0, b: 1.0, mu: 1.0 };

fn model() -> PotentialModel {
    PotentialModel::lorentzian(20.0, 1.0, 1.0).unwrap()
}

#[test]
fn tanh_sinh_handles_endpoint_singularities() {
    let v = tanh_sinh(|x| (1.0 - x * x).sqrt(), -1.0, 1.0, 1e-14);
    assert!((v - std::f64::consts::FRAC_PI_2).abs() < 1e-13, "{v}");
    let v = tanh_sinh(|x| 1.0 / x.sqrt(), 0.0, 4.0, 1e-14);
    assert!((v - 4.0).abs() < 1e-12, "{v}");
}

#[test]
fn oracle_turning_point_is_a_root() {
    for &(l, p) in &[(0.0, 3.0), (1.0, 5.0), (-2.5, 8.0), (4.0, 2.0)] {
        let r = MODEL.turning_point(l, p);
        let h = p * p - l * l / (r * r) - 40.0 / (1.0 + r * r);
        assert!(h.abs() < 1e-12 * p * p, "h({r}) = {h}");
        let core = model().turning_point(ScatterPoint::new(l, p).unwrap()).unwrap();
        assert!((core - r).abs() < 1e-10 * r, "{core} vs {r}");
    }
}

#[test]
fn oracle_free_part_matches_closed_form() {
    let (l, p, r) = (1.5, 4.0, 2.0);
    let q = tanh_sinh(|x| (p * p - l * l / (x * x)).sqrt(), l / p, r, 1e-14);
    assert!((q - free_radial_action(l, p, r)).abs() < 1e-13);
}

#[test]
fn delta_w_matches_oracle_at_random_points() {
    let pot = model();
    let quad = QuadratureSpec::default();
    let pc = pot.p_c();
    let mut rng = StdRng::seed_from_u64(7);
    let mut n = 0;
    while n < 12 {
        let l: f64 = rng.gen_range(-6.0..6.0);
        let p: f64 = rng.gen_range(1.0..12.0);
        if l.abs() < 0.05 && (p - pc).abs() < 0.3 {
            continue;
        }
        let want = MODEL.delta_w(l, p, 1e-13);
        let got = delta_w(&pot, ScatterPoint::new(l, p).unwrap(), &quad).unwrap().value;
        assert!((got - want).abs() <= 1e-8 * want.abs(), "({l}, {p}): {got} vs {want}");
        n += 1;
    }
}

#[test]
fn derivative_matches_oracle_differences() {
    let pot = model();
    let quad = QuadratureSpec::default();
    for &(l, p) in &[(0.7, 3.0), (-1.3, 5.5), (2.0, 9.0), (-0.4, 7.5)] {
        let h = 1e-4;
        let fd = (MODEL.delta_w(l + h, p, 1e-14) - MODEL.delta_w(l - h, p, 1e-14)) / (2.0 * h);
        let got = d_delta_w_dl(&pot, ScatterPoint::new(l, p).unwrap(), &quad).unwrap().value;
        assert!((got - fd).abs() < 1e-6 * (1.0 + fd.abs()), "({l}, {p}): {got} vs {fd}");
    }
}
