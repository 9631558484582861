//! The lattice of WKB phase-shift zeros and its monodromy.
//!
//! With `l = mħ` and `p = kħ` the phase shift vanishes mod π where
//! `N(m, k) = −ΔW(mħ, kħ) / (2πħ)` is an integer. On each column `m` the zeros are labelled
//! by that integer. `N` is single valued, but it is not smooth across `m = 0` below the
//! barrier, where `Ñ = N + m` (for `m > 0`) is the smooth function instead. Rows of the
//! lattice are level sets of whichever of the two is smooth; following them around
//! `(0, p_c/ħ)` shears a unit cell.
//!
//! A cell is carried in one of two label charts: [`Branch::Raw`] labels a zero by `N`,
//! [`Branch::Smoothed`] by `Ñ`. The charts agree for `m ≤ 0` and differ by the shear
//! `ℓ ↦ ℓ + m` for `m ≥ 0`.

use alloc::format;
use alloc::vec::Vec;

use crate::actions::{delta_w, Branch};
use crate::error::{Error, Result};
use crate::math::{floor, round, PI};
use crate::orbits::{winding_number, LoopPath};
use crate::potential::{PotentialModel, ScatterPoint};
use crate::quadrature::QuadratureSpec;
use crate::roots::brent;

/// A zero of `δ(mħ, kħ) mod π`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct LatticePoint {
    pub m: i32,
    pub k: f64,
    /// Label in the chart given by `branch`.
    pub label: i64,
    pub branch: Branch,
}

impl LatticePoint {
    /// The label of this zero in another chart.
    pub fn label_on(&self, branch: Branch) -> i64 {
        let raw = to_raw(self.branch, self.m, self.label);
        from_raw(branch, self.m, raw)
    }
}

fn shear(m: i32) -> i64 {
    i64::from(m.max(0))
}

fn to_raw(chart: Branch, m: i32, label: i64) -> i64 {
    match chart {
        Branch::Raw => label,
        Branch::Smoothed => label - shear(m),
    }
}

fn from_raw(chart: Branch, m: i32, raw: i64) -> i64 {
    match chart {
        Branch::Raw => raw,
        Branch::Smoothed => raw + shear(m),
    }
}

/// Zeros of one column, in increasing `k` (decreasing label).
#[derive(Debug, Clone, PartialEq)]
pub struct Column {
    pub m: i32,
    pub zeros: Vec<LatticePoint>,
}

impl Column {
    fn by_raw_label(&self, raw: i64) -> Option<&LatticePoint> {
        // Labels decrease strictly along the column.
        let first = self.zeros.first()?.label;
        let idx = usize::try_from(first - raw).ok()?;
        self.zeros.get(idx).filter(|z| z.label == raw)
    }
}

/// `N(m, k) = −ΔW(mħ, kħ) / (2πħ)`.
pub fn zero_count(pot: &PotentialModel, hbar: f64, m: i32, k: f64, quad: &QuadratureSpec) -> Result<f64> {
    let pt = ScatterPoint::new(f64::from(m) * hbar, k * hbar)?;
    Ok(-delta_w(pot, pt, quad)?.value / (2.0 * PI * hbar))
}

/// All zeros of column `m` with `k` in `k_range`, located to `1e−10` in `k`.
///
/// `N` must be monotone in `k` on the range; a column where it is not is rejected.
pub fn zero_column(pot: &PotentialModel, hbar: f64, m: i32, k_range: (f64, f64), quad: &QuadratureSpec) -> Result<Column> {
    let (k_lo, k_hi) = k_range;
    if !(hbar > 0.0 && hbar.is_finite()) {
        return Err(Error::domain(format!("hbar must be positive, got {hbar}")));
    }
    if !(k_lo > 0.0 && k_hi > k_lo && k_hi.is_finite()) {
        return Err(Error::domain("k range must be positive and increasing"));
    }
    let k_c = pot.p_c() / hbar;
    // N is continuous through the critical point; just never evaluate exactly on it.
    let nudge = |k: f64| if m == 0 && (k - k_c).abs() <= 1e-12 * k_c { k + 1e-9 * k_c } else { k };
    let count = |k: f64| zero_count(pot, hbar, m, nudge(k), quad);

    const SAMPLES: usize = 256;
    let mut ks = Vec::with_capacity(SAMPLES + 1);
    let mut ns = Vec::with_capacity(SAMPLES + 1);
    for i in 0..=SAMPLES {
        let k = k_lo + (k_hi - k_lo) * (i as f64) / (SAMPLES as f64);
        ks.push(k);
        ns.push(count(k)?);
    }
    if ns.windows(2).any(|w| w[1] > w[0]) {
        return Err(Error::numerical(format!("N(m = {m}, k) is not monotone on the requested k range")));
    }

    let mut zeros = Vec::new();
    for i in 0..SAMPLES {
        let (n_a, n_b) = (ns[i], ns[i + 1]);
        // Integers in (n_b, n_a]; a zero landing exactly on a sample belongs to the interval
        // on its right, except at the top end.
        let hi = floor(n_a) as i64;
        let lo = floor(n_b) as i64 + 1;
        for n in (lo..=hi).rev() {
            let target = n as f64;
            let k = if n_a == target {
                ks[i]
            } else {
                let mut failure = None;
                let root = brent(
                    |k| match count(k) {
                        Ok(v) => v - target,
                        Err(e) => {
                            failure.get_or_insert(e);
                            f64::NAN
                        }
                    },
                    ks[i],
                    ks[i + 1],
                    1e-10,
                    200,
                );
                match (root, failure) {
                    (_, Some(e)) => return Err(e),
                    (r, None) => r?.x,
                }
            };
            zeros.push(LatticePoint { m, k, label: n, branch: Branch::Raw });
        }
    }
    if i64::try_from(zeros.len()).is_err() {
        return Err(Error::numerical("too many zeros in one column"));
    }
    Ok(Column { m, zeros })
}

/// Zeros of a rectangular window of columns.
#[derive(Debug, Clone, PartialEq)]
pub struct ZeroSet {
    pub hbar: f64,
    pub k_c: f64,
    pub k_range: (f64, f64),
    pub columns: Vec<Column>,
    /// Columns that could not be computed.
    pub failures: Vec<(i32, Error)>,
}

impl ZeroSet {
    pub fn column(&self, m: i32) -> Option<&Column> {
        let first = self.columns.first()?.m;
        let idx = usize::try_from(m - first).ok()?;
        self.columns.get(idx).filter(|c| c.m == m)
    }

    pub fn points(&self) -> impl Iterator<Item = &LatticePoint> {
        self.columns.iter().flat_map(|c| c.zeros.iter())
    }

    /// The zero with chart label `label` in column `m`.
    pub fn resolve(&self, chart: Branch, m: i32, label: i64) -> Result<LatticePoint> {
        let raw = to_raw(chart, m, label);
        self.column(m)
            .and_then(|c| c.by_raw_label(raw))
            .map(|z| LatticePoint { label, branch: chart, ..*z })
            .ok_or_else(|| Error::domain(format!("no zero with label {label} ({chart:?}) in column {m}; widen the lattice window")))
    }

    /// Assembles a zero set from columns computed elsewhere (e.g. in parallel).
    ///
    /// Columns must be contiguous in `m`; failed columns break contiguity and are kept
    /// in `failures`.
    pub fn from_columns(hbar: f64, k_c: f64, k_range: (f64, f64), results: Vec<(i32, Result<Column>)>) -> Self {
        let mut columns = Vec::new();
        let mut failures = Vec::new();
        for (m, r) in results {
            match r {
                Ok(c) => columns.push(c),
                Err(e) => failures.push((m, e)),
            }
        }
        columns.sort_by_key(|c| c.m);
        // Keep the contiguous run containing the first column.
        if let Some(first) = columns.first().map(|c| c.m) {
            let run = columns.iter().enumerate().take_while(|(i, c)| c.m == first + *i as i32).count();
            for c in columns.drain(run..) {
                failures.push((c.m, Error::numerical("column not contiguous with the rest of the window")));
            }
        }
        ZeroSet { hbar, k_c, k_range, columns, failures }
    }
}

/// Zeros for every integer `m` in `m_range` (inclusive) and `k` in `k_range`.
pub fn zero_curves(
    pot: &PotentialModel,
    hbar: f64,
    m_range: (i32, i32),
    k_range: (f64, f64),
    quad: &QuadratureSpec,
) -> Result<ZeroSet> {
    if m_range.0 > m_range.1 {
        return Err(Error::domain("m range must be increasing"));
    }
    let results = (m_range.0..=m_range.1).map(|m| (m, zero_column(pot, hbar, m, k_range, quad))).collect();
    Ok(ZeroSet::from_columns(hbar, pot.p_c() / hbar, k_range, results))
}

/// A unit cell: anchor plus two integer basis vectors in chart coordinates `(Δm, Δℓ)`.
#[derive(Debug, Clone, PartialEq)]
pub struct LatticeCell {
    pub chart: Branch,
    pub anchor: (i32, i64),
    pub u: (i32, i64),
    pub v: (i32, i64),
    /// `anchor`, `anchor + u`, `anchor + u + v`, `anchor + v`.
    pub vertices: [LatticePoint; 4],
}

fn add(a: (i32, i64), b: (i32, i64)) -> (i32, i64) {
    (a.0 + b.0, a.1 + b.1)
}

fn det(u: (i32, i64), v: (i32, i64)) -> i64 {
    i64::from(u.0) * v.1 - u.1 * i64::from(v.0)
}

impl LatticeCell {
    pub fn new(zeros: &ZeroSet, chart: Branch, anchor: (i32, i64), u: (i32, i64), v: (i32, i64)) -> Result<Self> {
        if det(u, v).abs() != 1 {
            return Err(Error::domain("cell basis must be unimodular"));
        }
        let corners = [anchor, add(anchor, u), add(add(anchor, u), v), add(anchor, v)];
        let mut vertices = [LatticePoint { m: 0, k: 0.0, label: 0, branch: chart }; 4];
        for (slot, &(m, l)) in vertices.iter_mut().zip(corners.iter()) {
            *slot = zeros.resolve(chart, m, l)?;
        }
        Ok(LatticeCell { chart, anchor, u, v, vertices })
    }

    /// The cell spanned by the next column and the next label, anchored at the raw zero
    /// `(m, label)`.
    pub fn unit(zeros: &ZeroSet, m: i32, label: i64) -> Result<Self> {
        LatticeCell::new(zeros, Branch::Raw, (m, label), (1, 0), (0, 1))
    }

    fn columns(&self) -> (i32, i32) {
        let ms = self.vertices.iter().map(|v| v.m);
        (ms.clone().min().unwrap_or(0), ms.max().unwrap_or(0))
    }

    /// The same cell in the other chart. The cell must lie on one side of `m = 0`.
    pub fn to_chart(&self, zeros: &ZeroSet, chart: Branch) -> Result<Self> {
        if chart == self.chart {
            return Ok(self.clone());
        }
        let (lo, hi) = self.columns();
        if lo < 0 && hi > 0 {
            return Err(Error::domain("a cell straddling m = 0 cannot change chart"));
        }
        // On m ≥ 0 the charts differ by ℓ ↦ ℓ ± m; on m ≤ 0 they coincide.
        let sign = if chart == Branch::Smoothed { 1 } else { -1 };
        let map_vec = |w: (i32, i64)| if lo >= 0 { (w.0, w.1 + sign * i64::from(w.0)) } else { w };
        let anchor = (self.anchor.0, from_raw(chart, self.anchor.0, to_raw(self.chart, self.anchor.0, self.anchor.1)));
        LatticeCell::new(zeros, chart, anchor, map_vec(self.u), map_vec(self.v))
    }

    /// Basis vectors in the raw chart, valid for a cell with all columns `≥ 0` or all `≤ 0`.
    fn raw_basis(&self, zeros: &ZeroSet) -> Result<[(i32, i64); 2]> {
        let raw = self.to_chart(zeros, Branch::Raw)?;
        Ok([raw.u, raw.v])
    }
}

/// A 2×2 integer matrix acting on `(Δm, Δℓ)` column vectors.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct MonodromyMatrix(pub [[i64; 2]; 2]);

impl MonodromyMatrix {
    pub const IDENTITY: MonodromyMatrix = MonodromyMatrix([[1, 0], [0, 1]]);

    pub fn det(&self) -> i64 {
        let a = self.0;
        a[0][0] * a[1][1] - a[0][1] * a[1][0]
    }

    pub fn mul(&self, other: &MonodromyMatrix) -> MonodromyMatrix {
        let (a, b) = (self.0, other.0);
        let mut out = [[0; 2]; 2];
        for (i, row) in out.iter_mut().enumerate() {
            for (j, x) in row.iter_mut().enumerate() {
                *x = a[i][0] * b[0][j] + a[i][1] * b[1][j];
            }
        }
        MonodromyMatrix(out)
    }

    /// Inverse of a unimodular matrix.
    pub fn inverse(&self) -> Option<MonodromyMatrix> {
        let d = self.det();
        if d.abs() != 1 {
            return None;
        }
        let a = self.0;
        Some(MonodromyMatrix([[a[1][1] * d, -a[0][1] * d], [-a[1][0] * d, a[0][0] * d]]))
    }

    /// `(M − I)² = 0`.
    pub fn is_unipotent(&self) -> bool {
        let a = self.0;
        let n = MonodromyMatrix([[a[0][0] - 1, a[0][1]], [a[1][0], a[1][1] - 1]]);
        n.mul(&n) == MonodromyMatrix([[0, 0], [0, 0]])
    }

    fn from_columns(u: (i32, i64), v: (i32, i64)) -> MonodromyMatrix {
        MonodromyMatrix([[i64::from(u.0), i64::from(v.0)], [u.1, v.1]])
    }
}

/// One passage of the cell across `m = 0`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CellCrossing {
    /// `k` of the cell's vertices on `m = 0`, averaged.
    pub k: f64,
    pub below_singularity: bool,
    /// `+1` for a move towards `+m`, `−1` towards `−m`.
    pub direction: i32,
    pub branch_used: Branch,
}

#[derive(Debug, Clone, PartialEq)]
pub struct TransportReport {
    pub start: LatticeCell,
    pub end: LatticeCell,
    /// Final basis in terms of the initial one: `[u′ v′] = [u v] M`, both in the start chart.
    pub matrix: MonodromyMatrix,
    pub winding: i32,
    pub crossings: Vec<CellCrossing>,
    pub moves: usize,
    /// Largest `|k − k_predicted| / (distance to the runner-up zero)` over all row steps.
    pub worst_margin: f64,
}

/// A row step is accepted only if the predicted position is this much closer to the chosen
/// zero than to any other zero of the column.
const MARGIN: f64 = 0.5;

/// Transports `start` around `path`, whose waypoints are `(m, k)` pairs.
///
/// The cell's anchor follows the path by single lattice moves: one column along a row of
/// the current chart, or one label along a column. A move that carries the cell across
/// `m = 0` first puts it in the chart that is smooth there ([`Branch::Smoothed`] below the
/// singularity, [`Branch::Raw`] above); on the `m > 0` side, moves whose row check does not
/// reach across the axis are made in the Raw chart. Each vertex moved along a row is checked
/// geometrically: the zero it lands on must be the unique nearest zero to the quadratic
/// extrapolation of the row from the three previous columns (linear if only two exist).
pub fn transport_cell(zeros: &ZeroSet, start: &LatticeCell, path: &LoopPath) -> Result<TransportReport> {
    if !path.closed {
        return Err(Error::domain("transport needs a closed loop"));
    }
    if path.samples_per_leg == 0 || path.legs().is_empty() {
        return Err(Error::domain("loop has no legs"));
    }
    let k_c = zeros.k_c;
    let winding = winding_number(path, k_c)?;
    let (lo, hi) = start.columns();
    if lo < 0 && hi > 0 {
        return Err(Error::domain("the start cell must not straddle m = 0"));
    }

    let mut cell = start.clone();
    let mut crossings = Vec::new();
    let mut moves = 0usize;
    let mut worst_margin: f64 = 0.0;
    let budget = 64 * path.samples().len() + 1024;

    let mut samples = path.samples();
    samples.push((0, path.waypoints[0].0, path.waypoints[0].1));
    for (_, m_t, k_t) in samples {
        let target_m = round(m_t) as i32;
        if target_m == 0 && ((k_t - k_c).abs() < 0.5) {
            return Err(Error::domain("loop passes through the singular point (0, p_c/ħ)"));
        }
        loop {
            let Some(step) = next_move(zeros, &cell, target_m, k_t)? else { break };
            moves += 1;
            if moves > budget {
                return Err(Error::numerical("cell transport did not settle"));
            }
            cell = apply_move(zeros, cell, step, &mut crossings, &mut worst_margin)?;
        }
    }

    // Back in the start chart, on the start side.
    let end = cell.to_chart(zeros, start.chart)?;
    let b0 = MonodromyMatrix::from_columns(start.u, start.v);
    let b1 = MonodromyMatrix::from_columns(end.u, end.v);
    let matrix = b0.inverse().ok_or_else(|| Error::domain("start basis is not unimodular"))?.mul(&b1);
    let _ = end.raw_basis(zeros)?;
    Ok(TransportReport { start: start.clone(), end, matrix, winding, crossings, moves, worst_margin })
}

#[derive(Debug, Clone, Copy)]
enum Move {
    /// One column along a row of the current chart.
    Column(i32),
    /// One label within the columns.
    Label(i64),
}

fn next_move(zeros: &ZeroSet, cell: &LatticeCell, target_m: i32, target_k: f64) -> Result<Option<Move>> {
    // Follow the target in k first, so that row drift never carries the cell far away.
    let anchor = &cell.vertices[0];
    let column = zeros.column(anchor.m).ok_or_else(|| Error::domain(format!("column {} outside the lattice window", anchor.m)))?;
    let nearest = column
        .zeros
        .iter()
        .min_by(|a, b| (a.k - target_k).abs().total_cmp(&(b.k - target_k).abs()))
        .ok_or_else(|| Error::domain(format!("column {} has no zeros", anchor.m)))?;
    let raw_anchor = to_raw(cell.chart, anchor.m, anchor.label);
    if nearest.label != raw_anchor {
        return Ok(Some(Move::Label((nearest.label - raw_anchor).signum())));
    }
    if anchor.m != target_m {
        return Ok(Some(Move::Column((target_m - anchor.m).signum())));
    }
    Ok(None)
}

fn apply_move(
    zeros: &ZeroSet,
    mut cell: LatticeCell,
    step: Move,
    crossings: &mut Vec<CellCrossing>,
    worst_margin: &mut f64,
) -> Result<LatticeCell> {
    match step {
        Move::Label(d) => LatticeCell::new(zeros, cell.chart, (cell.anchor.0, cell.anchor.1 + d), cell.u, cell.v),
        Move::Column(d) => {
            let (lo, hi) = cell.columns();
            let crosses = (d > 0 && lo < 0 && hi + d > 0) || (d < 0 && hi > 0 && lo + d < 0);
            if crosses {
                let on_axis: Vec<f64> = cell.vertices.iter().filter(|v| v.m == 0).map(|v| v.k).collect();
                let ks: Vec<f64> = if on_axis.is_empty() { cell.vertices.iter().map(|v| v.k).collect() } else { on_axis };
                let below = ks.iter().all(|&k| k < zeros.k_c);
                let above = ks.iter().all(|&k| k > zeros.k_c);
                if !(below || above) {
                    return Err(Error::domain("the cell would cross m = 0 around the singular point; enlarge the loop"));
                }
                let branch = if below { Branch::Smoothed } else { Branch::Raw };
                cell = cell.to_chart(zeros, branch)?;
                let k = ks.iter().sum::<f64>() / ks.len() as f64;
                crossings.push(CellCrossing { k, below_singularity: below, direction: d, branch_used: branch });
            } else if (d > 0 && lo >= 2) || (d < 0 && lo + d >= 0) {
                // Once the row check no longer reaches across the axis both charts describe
                // the same cell; Raw rows are the flatter ones, which keeps the check well
                // conditioned.
                cell = cell.to_chart(zeros, Branch::Raw)?;
            }
            let moved = LatticeCell::new(zeros, cell.chart, (cell.anchor.0 + d, cell.anchor.1), cell.u, cell.v)?;
            for (old, new) in cell.vertices.iter().zip(moved.vertices.iter()) {
                let margin = check_row_step(zeros, cell.chart, old, new, d)?;
                *worst_margin = worst_margin.max(margin);
            }
            Ok(moved)
        }
    }
}

/// Checks that `new` is the unique nearest zero of its column to the continuation of the
/// row through `old` and its predecessors (quadratic when three points are available,
/// linear otherwise). Returns the margin ratio.
fn check_row_step(zeros: &ZeroSet, chart: Branch, old: &LatticePoint, new: &LatticePoint, d: i32) -> Result<f64> {
    let Ok(prev) = zeros.resolve(chart, old.m - d, old.label) else {
        // Row starts at the window edge; nothing to extrapolate from.
        return Ok(0.0);
    };
    let predicted = match zeros.resolve(chart, old.m - 2 * d, old.label) {
        Ok(prev2) => 3.0 * old.k - 3.0 * prev.k + prev2.k,
        Err(_) => 2.0 * old.k - prev.k,
    };
    let column = zeros.column(new.m).ok_or_else(|| Error::domain("column outside the lattice window"))?;
    let own = (new.k - predicted).abs();
    let runner_up = column
        .zeros
        .iter()
        .filter(|z| z.k != new.k)
        .map(|z| (z.k - predicted).abs())
        .fold(f64::INFINITY, f64::min);
    let ratio = own / runner_up;
    if ratio >= 1.0 {
        return Err(Error::numerical(format!(
            "row step from column {} to {} lands off the smooth continuation (k = {:.6}, predicted {:.6})",
            old.m, new.m, new.k, predicted
        )));
    }
    if ratio > MARGIN {
        return Err(Error::numerical(format!(
            "ambiguous row step from column {} to {}: nearest-zero margin {ratio:.3} (k = {:.6}, predicted {:.6}, chart {chart:?}, label {})",
            old.m, new.m, new.k, predicted, new.label
        )));
    }
    Ok(ratio)
}
