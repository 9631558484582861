use monoscat_core::lattice::*;
use monoscat_core::orbits::LoopPath;
use monoscat_core::potential::PotentialModel;
use monoscat_core::quadrature::QuadratureSpec;
use monoscat_core::Branch;

fn default_zeros() -> ZeroSet {
    let pot = PotentialModel::lorentzian(20.0, 1.0, 1.0).unwrap();
    zero_curves(&pot, 0.25, (-7, 7), (2.0, 70.0), &QuadratureSpec::default()).unwrap()
}

fn rectangle(anchor_k: f64, kc: f64) -> LoopPath {
    LoopPath::new(vec![(3.0, anchor_k), (3.0, kc + 9.0), (-4.0, kc + 9.0), (-4.0, kc - 4.0), (3.0, kc - 4.0)], true, 40)
}

fn diamond(anchor_k: f64, kc: f64) -> LoopPath {
    LoopPath::new(vec![(3.0, anchor_k), (0.0, kc + 12.0), (-3.0, kc), (0.0, kc - 4.5)], true, 40)
}

#[test]
fn singular_wavenumber() {
    let z = default_zeros();
    assert!((z.k_c - 40f64.sqrt() / 0.25).abs() < 1e-12);
    assert!((z.k_c - 25.298).abs() < 1e-3);
}

#[test]
fn labels_count_down_along_columns() {
    let z = default_zeros();
    for col in &z.columns {
        assert!(col.zeros.windows(2).all(|w| w[0].k < w[1].k && w[0].label == w[1].label + 1), "column {}", col.m);
        assert!(col.zeros.iter().all(|p| p.branch == Branch::Raw));
    }
}

#[test]
fn monodromy_is_independent_of_the_loop_shape() {
    let z = default_zeros();
    let start = LatticeCell::unit(&z, 3, 8).unwrap();
    let a = start.vertices[0].k;
    let rect = transport_cell(&z, &start, &rectangle(a, z.k_c)).unwrap();
    let dia = transport_cell(&z, &start, &diamond(a, z.k_c)).unwrap();
    assert_eq!(rect.winding, 1);
    assert_eq!(dia.winding, 1);
    assert_eq!(rect.matrix, dia.matrix);
    assert_eq!(rect.matrix.det(), 1);
    assert!(rect.matrix.is_unipotent());
    let off = rect.matrix.0[0][1].abs() + rect.matrix.0[1][0].abs();
    assert_eq!(off, 1);
    assert!(rect.worst_margin < 0.5 && dia.worst_margin < 0.5);
    // One crossing below and one above the singularity, each on its smooth branch.
    assert_eq!(rect.crossings.len(), 2);
    for c in &rect.crossings {
        assert_eq!(c.branch_used, if c.below_singularity { Branch::Smoothed } else { Branch::Raw });
    }
}

#[test]
fn reversed_and_repeated_loops() {
    let z = default_zeros();
    let start = LatticeCell::unit(&z, 3, 8).unwrap();
    let path = rectangle(start.vertices[0].k, z.k_c);
    let once = transport_cell(&z, &start, &path).unwrap().matrix;
    let back = transport_cell(&z, &start, &path.reversed()).unwrap();
    assert_eq!(back.winding, -1);
    assert_eq!(back.matrix, once.inverse().unwrap());
    // After one turn the cell is sheared and reaches closer to the singularity, so the
    // second turn needs a loop that keeps further away from it.
    let wide = LoopPath::new(vec![(3.0, start.vertices[0].k), (3.0, z.k_c + 14.0), (-4.0, z.k_c + 14.0), (-4.0, z.k_c - 5.5), (3.0, z.k_c - 5.5)], true, 40);
    assert_eq!(transport_cell(&z, &start, &wide).unwrap().matrix, once);
    let twice = transport_cell(&z, &start, &wide.concat(&wide).unwrap()).unwrap();
    assert_eq!(twice.winding, 2);
    assert_eq!(twice.matrix, once.mul(&once));
}

#[test]
fn loops_away_from_the_singularity_are_trivial() {
    let z = default_zeros();
    let start = LatticeCell::unit(&z, -5, 6).unwrap();
    let k0 = start.vertices[0].k;
    let path = LoopPath::new(vec![(-5.0, k0), (-2.0, k0), (-2.0, k0 + 10.0), (-5.0, k0 + 10.0)], true, 30);
    let rep = transport_cell(&z, &start, &path).unwrap();
    assert_eq!(rep.winding, 0);
    assert_eq!(rep.matrix, MonodromyMatrix::IDENTITY);
    assert_eq!(rep.end, start);
}
