use monoscat_core::potential::PotentialModel;
use monoscat_core::quadrature::QuadratureSpec;
use monoscat_core::quantum::*;

const HBAR: f64 = 0.25;

fn model() -> PotentialModel {
    PotentialModel::lorentzian(20.0, 1.0, 1.0).unwrap()
}

#[test]
fn free_waves_are_not_shifted() {
    let free = PotentialModel::zero(1.0).unwrap();
    for &(m, k) in &[(0, 3.0), (1, 9.0), (-5, 20.0), (12, 40.0)] {
        let s = solve_radial(&free, m, k, HBAR, &MeshSpec::default()).unwrap();
        assert_eq!(s.nu, f64::from(m.abs()));
        assert!(s.delta_exact.abs() < 1e-8, "m={m} k={k}: {}", s.delta_exact);
    }
}

#[test]
fn mesh_and_matching_radius_do_not_matter() {
    let pot = model();
    let base = MeshSpec::default();
    for &(m, k) in &[(0, 12.0), (4, 6f64.sqrt() / HBAR), (-9, 30.0), (15, 40.0)] {
        let s = solve_radial(&pot, m, k, HBAR, &base).unwrap();
        let fine = solve_radial(&pot, m, k, HBAR, &MeshSpec { points_per_wavelength: 2.0 * base.points_per_wavelength, ..base }).unwrap();
        let far = solve_radial(&pot, m, k, HBAR, &MeshSpec { match_radius: Some(2.0 * s.r2), ..base }).unwrap();
        assert!((s.delta_exact - fine.delta_exact).abs() < 1e-7, "m={m} k={k} mesh");
        assert!((s.delta_exact - far.delta_exact).abs() < 1e-7, "m={m} k={k} radius");
        assert!(s.r1 < s.r2);
    }
}

#[test]
fn solution_is_regular_and_normalised() {
    let pot = model();
    let s = solve_radial(&pot, 3, 10.0, HBAR, &MeshSpec::default()).unwrap();
    assert_eq!(s.grid.len(), s.u.len());
    assert!(s.grid.windows(2).all(|w| w[0] < w[1]));
    let peak = s.u.iter().fold(0.0f64, |a, v| a.max(v.abs()));
    assert!((peak - 1.0).abs() < 1e-15);
    // u ~ r^{|m|+1/2} near the origin.
    let (r0, r1) = (s.grid[0], s.grid[10]);
    let slope = (s.u[10] / s.u[0]).ln() / (r1 / r0).ln();
    assert!((slope - 3.5).abs() < 1e-6, "{slope}");
}

#[test]
fn equation_residual_is_small() {
    let pot = model();
    let (m, k) = (2, 15.0);
    let s = solve_radial(&pot, m, k, HBAR, &MeshSpec::default()).unwrap();
    let q = |r: f64| k * k - (f64::from(m * m) - 0.25) / (r * r) - 2.0 * pot.value(r) / (HBAR * HBAR);
    let mut worst: f64 = 0.0;
    for i in (200..s.grid.len() - 1).step_by(997) {
        let (ra, rb, rc) = (s.grid[i - 1], s.grid[i], s.grid[i + 1]);
        let (ua, ub, uc) = (s.u[i - 1], s.u[i], s.u[i + 1]);
        let second = 2.0 * (ua * (rc - rb) - ub * (rc - ra) + uc * (rb - ra)) / ((rb - ra) * (rc - rb) * (rc - ra));
        let scale = q(rb).abs().max(k * k);
        worst = worst.max((second + q(rb) * ub).abs() / scale);
    }
    // Three-point differences are second order; the step is about a fortieth of a wavelength.
    assert!(worst < 1e-2, "{worst}");
}

#[test]
fn phase_vanishes_at_large_wavenumber() {
    let pot = model();
    let shifts: Vec<f64> = [200.0, 800.0, 3200.0]
        .iter()
        .map(|&k| {
            let row = compare_point(&pot, 0, k, HBAR, &QuadratureSpec::default(), &MeshSpec::default()).unwrap();
            row.delta_exact.abs()
        })
        .collect();
    assert!(shifts[0] > shifts[1] && shifts[1] > shifts[2], "{shifts:?}");
}

#[test]
fn wkb_error_shrinks_with_wavenumber() {
    let pot = model();
    for m in [2, 6] {
        let errs: Vec<f64> = [30.0, 45.0, 60.0]
            .iter()
            .map(|&k| compare_point(&pot, m, k, HBAR, &QuadratureSpec::default(), &MeshSpec::default()).unwrap().abs_err)
            .collect();
        assert!(errs[0] > errs[1] && errs[1] > errs[2], "m={m}: {errs:?}");
    }
}

#[test]
fn wkb_is_within_one_percent() {
    let pot = model();
    let rows = compare_wkb(&pot, &[-6, -1, 4, 9], &[8.0, 6f64.sqrt() / HBAR, 18.0, 34.0, 50.0], HBAR, &QuadratureSpec::default(), &MeshSpec::default());
    for (m, k, row) in rows {
        let row = row.unwrap();
        assert_eq!((row.m, row.k), (m, k));
        assert!(row.rel_err < 0.01, "{row:?}");
    }
}

#[test]
fn symmetric_in_m() {
    let pot = model();
    for &(m, k) in &[(1, 7.0), (8, 33.0)] {
        let a = solve_radial(&pot, m, k, HBAR, &MeshSpec::default()).unwrap();
        let b = solve_radial(&pot, -m, k, HBAR, &MeshSpec::default()).unwrap();
        assert_eq!(a.delta_exact, b.delta_exact);
    }
}

#[test]
fn bad_inputs_are_rejected() {
    let pot = model();
    assert!(solve_radial(&pot, 0, -1.0, HBAR, &MeshSpec::default()).is_err());
    assert!(solve_radial(&pot, 0, 5.0, 0.0, &MeshSpec::default()).is_err());
    assert!(solve_radial(&pot, 0, 5.0, HBAR, &MeshSpec { levels: 0, ..MeshSpec::default() }).is_err());
    assert!(solve_radial(&pot, 0, 5.0, HBAR, &MeshSpec { match_radius: Some(1.0), ..MeshSpec::default() }).is_err());
}
