//! Parallel versions of the scan operations. Each work item is computed independently and
//! results are collected in input order.

use monoscat_core::actions::{grid_value, GridRow, GridSpec};
use monoscat_core::error::{Error, Result};
use monoscat_core::lattice::{zero_column, ZeroSet};
use monoscat_core::quadrature::QuadratureSpec;
use monoscat_core::quantum::{compare_point, ComparisonRow, MeshSpec};
use monoscat_core::{Branch, PotentialModel};
use rayon::prelude::*;

/// [`monoscat_core::actions::grid_scan`] over all cores.
pub fn grid_scan(pot: &PotentialModel, grid: &GridSpec, branch: Branch, quad: &QuadratureSpec) -> Result<Vec<GridRow>> {
    grid.validate()?;
    quad.validate()?;
    Ok((0..grid.len())
        .into_par_iter()
        .map(|i| {
            let (l, p) = grid.point(i);
            grid_value(pot, l, p, branch, quad)
        })
        .collect())
}

/// [`monoscat_core::lattice::zero_curves`] with one column per task.
pub fn zero_curves(pot: &PotentialModel, hbar: f64, m_range: (i32, i32), k_range: (f64, f64), quad: &QuadratureSpec) -> Result<ZeroSet> {
    if m_range.0 > m_range.1 {
        return Err(Error::Domain("m range must be increasing".into()));
    }
    let results = (m_range.0..=m_range.1)
        .into_par_iter()
        .map(|m| (m, zero_column(pot, hbar, m, k_range, quad)))
        .collect();
    Ok(ZeroSet::from_columns(hbar, pot.p_c() / hbar, k_range, results))
}

/// [`monoscat_core::quantum::compare_wkb`] with one `(m, k)` point per task.
pub fn compare_wkb(
    pot: &PotentialModel,
    m_list: &[i32],
    k_list: &[f64],
    hbar: f64,
    quad: &QuadratureSpec,
    mesh: &MeshSpec,
) -> Vec<(i32, f64, Result<ComparisonRow>)> {
    let points: Vec<(i32, f64)> = m_list.iter().flat_map(|&m| k_list.iter().map(move |&k| (m, k))).collect();
    points
        .into_par_iter()
        .map(|(m, k)| (m, k, compare_point(pot, m, k, hbar, quad, mesh)))
        .collect()
}
