//! Knot grids, cubic B-spline and monotone I-spline bases, the curvature
//! penalty and its Demmler–Reinsch reparameterization.
//!
//! Cubic B-splines live on the clamped sequence
//! `L,L,L,L, ψ_1..ψ_M, U,U,U,U` and number `M+4`. I-splines are running
//! integrals of the `M+2` piecewise-linear normalized M-splines on the same
//! interior knots, so each one rises from 0 at `L` to 1 at `U`.

use nalgebra::{DMatrix, DVector, SymmetricEigen};

use crate::error::{Error, Result};

/// How interior knots are placed by [`place_knots_with`].
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum KnotPlacement {
    /// Empirical quantiles at `k/(M+1)`.
    #[default]
    Quantile,
    /// Equally spaced between the data extremes.
    Equispaced,
}

/// Boundary and interior knots of a spline space.
#[derive(Debug, Clone, PartialEq)]
pub struct KnotGrid {
    lower: f64,
    upper: f64,
    interior: Vec<f64>,
}

impl KnotGrid {
    pub fn new(lower: f64, upper: f64, interior: Vec<f64>) -> Result<Self> {
        if !(lower.is_finite() && upper.is_finite()) || lower >= upper {
            return Err(Error::DegenerateData(format!(
                "boundary knots must satisfy L < U, got [{lower}, {upper}]"
            )));
        }
        if interior.is_empty() {
            return Err(Error::DegenerateData("at least one interior knot is required".into()));
        }
        if interior.iter().any(|k| !k.is_finite() || *k <= lower || *k >= upper) {
            return Err(Error::DegenerateData("interior knots must lie strictly inside (L, U)".into()));
        }
        if interior.windows(2).any(|w| w[1] < w[0]) {
            return Err(Error::DegenerateData("interior knots must be sorted".into()));
        }
        Ok(Self { lower, upper, interior })
    }

    pub fn lower(&self) -> f64 {
        self.lower
    }

    pub fn upper(&self) -> f64 {
        self.upper
    }

    pub fn interior(&self) -> &[f64] {
        &self.interior
    }

    /// Number of interior knots `M`.
    pub fn n_interior(&self) -> usize {
        self.interior.len()
    }

    /// The `M+8` clamped knot sequence of the cubic B-spline space.
    pub fn full_sequence(&self) -> Vec<f64> {
        self.clamped(4)
    }

    /// Knot sequence with `order`-fold boundary knots.
    fn clamped(&self, order: usize) -> Vec<f64> {
        let mut seq = Vec::with_capacity(self.interior.len() + 2 * order);
        seq.extend(std::iter::repeat_n(self.lower, order));
        seq.extend_from_slice(&self.interior);
        seq.extend(std::iter::repeat_n(self.upper, order));
        seq
    }

    pub fn contains(&self, x: f64) -> bool {
        x >= self.lower && x <= self.upper
    }

    fn check_domain(&self, xs: &[f64]) -> Result<()> {
        match xs.iter().find(|x| !self.contains(**x)) {
            Some(&value) => Err(Error::OutOfDomain { value, lower: self.lower, upper: self.upper }),
            None => Ok(()),
        }
    }

    /// `n` equispaced points from `L` to `U` inclusive.
    pub fn linspace(&self, n: usize) -> Vec<f64> {
        linspace(self.lower, self.upper, n)
    }
}

pub(crate) fn linspace(lo: f64, hi: f64, n: usize) -> Vec<f64> {
    match n {
        0 => Vec::new(),
        1 => vec![lo],
        _ => {
            let step = (hi - lo) / (n - 1) as f64;
            let mut out: Vec<f64> = (0..n).map(|i| lo + step * i as f64).collect();
            out[n - 1] = hi;
            out
        }
    }
}

/// Interior knots at the `k/(M+1)` empirical quantiles of `x`.
pub fn place_knots(x: &[f64], m: usize) -> Result<KnotGrid> {
    place_knots_with(x, m, KnotPlacement::Quantile)
}

pub fn place_knots_with(x: &[f64], m: usize, placement: KnotPlacement) -> Result<KnotGrid> {
    if m == 0 {
        return Err(Error::DegenerateData("interior knot count must be at least 1".into()));
    }
    if x.iter().any(|v| !v.is_finite()) {
        return Err(Error::DegenerateData("knot placement requires finite data".into()));
    }
    let mut sorted = x.to_vec();
    sorted.sort_by(f64::total_cmp);
    let mut distinct = sorted.clone();
    distinct.dedup();
    if distinct.len() < m + 2 {
        return Err(Error::DegenerateData(format!(
            "need at least {} distinct values for {m} interior knots, found {}",
            m + 2,
            distinct.len()
        )));
    }
    let lower = sorted[0];
    let upper = sorted[sorted.len() - 1];
    let candidates: Vec<f64> = (1..=m)
        .map(|k| {
            let p = k as f64 / (m + 1) as f64;
            match placement {
                KnotPlacement::Quantile => quantile_linear(&sorted, p),
                KnotPlacement::Equispaced => lower + p * (upper - lower),
            }
        })
        .collect();
    let mut interior: Vec<f64> = candidates.into_iter().filter(|k| *k > lower && *k < upper).collect();
    interior.dedup();
    if interior.len() < m {
        return Err(Error::DegenerateData(format!(
            "only {} distinct interior quantiles survive out of {m}",
            interior.len()
        )));
    }
    KnotGrid::new(lower, upper, interior)
}

/// Linear-interpolation sample quantile of sorted data.
fn quantile_linear(sorted: &[f64], p: f64) -> f64 {
    let h = (sorted.len() - 1) as f64 * p;
    let lo = h.floor() as usize;
    let hi = (lo + 1).min(sorted.len() - 1);
    sorted[lo] + (h - lo as f64) * (sorted[hi] - sorted[lo])
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum BasisKind {
    BSpline,
    ISpline,
    DemmlerReinsch,
}

/// Basis functions evaluated at a set of points, one row per point.
#[derive(Debug, Clone)]
pub struct BasisMatrix {
    pub values: DMatrix<f64>,
    pub kind: BasisKind,
    pub grid: KnotGrid,
    pub points: Vec<f64>,
}

impl BasisMatrix {
    pub fn ncols(&self) -> usize {
        self.values.ncols()
    }

    pub fn nrows(&self) -> usize {
        self.values.nrows()
    }

    /// Column means of the basis.
    pub fn column_means(&self) -> Vec<f64> {
        let n = self.values.nrows().max(1) as f64;
        self.values.column_iter().map(|c| c.sum() / n).collect()
    }

    /// Copy of the basis with `shift[j]` subtracted from column `j`.
    pub fn shifted(&self, shift: &[f64]) -> BasisMatrix {
        let mut values = self.values.clone();
        for (j, mut col) in values.column_iter_mut().enumerate() {
            col.add_scalar_mut(-shift[j]);
        }
        BasisMatrix { values, ..self.clone() }
    }

    /// Column-centered copy together with the subtracted means.
    pub fn centered(&self) -> (BasisMatrix, Vec<f64>) {
        let means = self.column_means();
        (self.shifted(&means), means)
    }
}

/// Index `μ` of the knot span containing `x`, i.e. `t[μ] <= x < t[μ+1]`,
/// with the right boundary assigned to the last nonempty span.
fn find_span(knots: &[f64], order: usize, x: f64) -> usize {
    let n = knots.len() - order;
    let last = knots[n];
    if x >= last {
        let mut mu = n - 1;
        while mu > 0 && knots[mu] >= last {
            mu -= 1;
        }
        return mu;
    }
    // Largest μ with knots[μ] <= x.
    let mut lo = order - 1;
    let mut hi = n;
    while hi - lo > 1 {
        let mid = (lo + hi) / 2;
        if knots[mid] <= x {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    lo
}

/// The `order` possibly-nonzero B-splines at `x`: returns the span `μ` and
/// the values of `B_{μ-order+1} … B_μ`.
fn nonzero_basis(knots: &[f64], order: usize, x: f64) -> (usize, Vec<f64>) {
    let mu = find_span(knots, order, x);
    let mut values = vec![0.0; order];
    values[0] = 1.0;
    let mut left = vec![0.0; order];
    let mut right = vec![0.0; order];
    for j in 1..order {
        left[j] = x - knots[mu + 1 - j];
        right[j] = knots[mu + j] - x;
        let mut saved = 0.0;
        for r in 0..j {
            let denom = right[r + 1] + left[j - r];
            let temp = if denom == 0.0 { 0.0 } else { values[r] / denom };
            values[r] = saved + right[r + 1] * temp;
            saved = left[j - r] * temp;
        }
        values[j] = saved;
    }
    (mu, values)
}

/// All `knots.len() - order` B-splines of the given order at `x`.
pub(crate) fn all_basis(knots: &[f64], order: usize, x: f64) -> Vec<f64> {
    let n = knots.len() - order;
    let mut out = vec![0.0; n];
    let (mu, values) = nonzero_basis(knots, order, x);
    for (r, v) in values.into_iter().enumerate() {
        let j = mu + 1 + r - order;
        if j < n {
            out[j] = v;
        }
    }
    out
}

/// Clamped cubic B-spline basis, `N × (M+4)`.
pub fn eval_bspline_basis(grid: &KnotGrid, x: &[f64]) -> Result<BasisMatrix> {
    grid.check_domain(x)?;
    let knots = grid.full_sequence();
    let k = grid.n_interior() + 4;
    let mut values = DMatrix::zeros(x.len(), k);
    for (i, &xi) in x.iter().enumerate() {
        for (j, v) in all_basis(&knots, 4, xi).into_iter().enumerate() {
            values[(i, j)] = v;
        }
    }
    Ok(BasisMatrix { values, kind: BasisKind::BSpline, grid: grid.clone(), points: x.to_vec() })
}

/// Quadratic I-spline basis, `N × (M+2)`, before any centering.
///
/// Column `i` equals the tail sum `Σ_{j≥i} B_{j,3}` of the order-3
/// B-splines on the triple-clamped knots, which is the integral of the
/// i-th normalized piecewise-linear M-spline.
pub fn eval_ispline_basis(grid: &KnotGrid, x: &[f64]) -> Result<BasisMatrix> {
    grid.check_domain(x)?;
    let knots = grid.clamped(3);
    let n3 = knots.len() - 3;
    let k = n3 - 1;
    let mut values = DMatrix::zeros(x.len(), k);
    for (i, &xi) in x.iter().enumerate() {
        let (mu, b) = nonzero_basis(&knots, 3, xi);
        // Nonzero functions are B_{mu-2..=mu}. Columns left of that window
        // are exactly 1 and columns right of it exactly 0, so rounding in
        // the partition of unity cannot break monotonicity across points.
        let first = mu - 2;
        let mut tail = 0.0;
        for j in (1..n3).rev() {
            values[(i, j - 1)] = if j > mu {
                0.0
            } else if j <= first {
                1.0
            } else {
                tail += b[j - first];
                tail.min(1.0)
            };
        }
    }
    Ok(BasisMatrix { values, kind: BasisKind::ISpline, grid: grid.clone(), points: x.to_vec() })
}

/// Coefficient map taking cubic B-spline coefficients to the coefficients
/// of their second derivative in the order-2 basis on the same knots.
fn second_derivative_map(knots: &[f64]) -> DMatrix<f64> {
    // Differentiating Σ c_j B_{j,k} gives Σ (k-1)(c_i - c_{i-1})/(t_{i+k-1} - t_i) B_{i,k-1}.
    fn diff(knots: &[f64], order: usize) -> DMatrix<f64> {
        let n = knots.len() - order;
        let mut d = DMatrix::zeros(n + 1, n);
        for i in 0..=n {
            let h = knots[i + order - 1] - knots[i];
            if h == 0.0 {
                continue;
            }
            let scale = (order - 1) as f64 / h;
            if i < n {
                d[(i, i)] += scale;
            }
            if i >= 1 {
                d[(i, i - 1)] -= scale;
            }
        }
        d
    }
    diff(knots, 3) * diff(knots, 4)
}

/// Curvature penalty `[Λ]_{mm'} = ∫ B''_m B''_{m'}` over `[L, U]`.
///
/// Second derivatives of cubic B-splines are piecewise linear, so a
/// 2-point Gauss–Legendre rule per knot interval is exact.
pub fn penalty_matrix(grid: &KnotGrid) -> DMatrix<f64> {
    let knots = grid.full_sequence();
    let k = grid.n_interior() + 4;
    let d2 = second_derivative_map(&knots);
    let gl = 1.0 / 3f64.sqrt();
    let mut penalty = DMatrix::zeros(k, k);
    for w in knots.windows(2) {
        let (a, b) = (w[0], w[1]);
        if b <= a {
            continue;
        }
        let half = 0.5 * (b - a);
        let mid = 0.5 * (a + b);
        for node in [mid - half * gl, mid + half * gl] {
            let b2 = DVector::from_vec(all_basis(&knots, 2, node));
            let dd = d2.tr_mul(&b2);
            penalty.ger(half, &dd, &dd, 1.0);
        }
    }
    // Symmetrize away rounding.
    let sym = (&penalty + penalty.transpose()) * 0.5;
    sym
}

/// Eigen-structure of the curvature penalty.
#[derive(Debug, Clone)]
pub struct PenaltyDecomposition {
    pub penalty: DMatrix<f64>,
    /// Orthogonal eigenvectors, null-space columns first.
    pub eigenvectors: DMatrix<f64>,
    /// Eigenvalues `(0, 0, d_1, …, d_{M+2})`, ascending.
    pub eigenvalues: DVector<f64>,
    /// `diag(1, 1, √d_1, …, √d_{M+2})`.
    pub scale: DVector<f64>,
    /// `X_Λ`: the two null-space eigenvectors.
    pub null_block: DMatrix<f64>,
    /// `Z_Λ`: the `M+2` range-space eigenvectors.
    pub range_block: DMatrix<f64>,
}

impl PenaltyDecomposition {
    pub fn new(penalty: &DMatrix<f64>) -> Result<Self> {
        let k = penalty.nrows();
        if k < 3 || penalty.ncols() != k {
            return Err(Error::NumericalFailure("penalty must be square with at least 3 rows".into()));
        }
        if penalty.iter().any(|v| !v.is_finite()) {
            return Err(Error::NumericalFailure("penalty has non-finite entries".into()));
        }
        let eig = SymmetricEigen::try_new(penalty.clone(), f64::EPSILON, 10_000)
            .ok_or_else(|| Error::NumericalFailure("symmetric eigensolver did not converge".into()))?;
        let mut order: Vec<usize> = (0..k).collect();
        order.sort_by(|&a, &b| eig.eigenvalues[a].total_cmp(&eig.eigenvalues[b]));

        let norm = eig.eigenvalues.iter().fold(0.0f64, |m, v| m.max(v.abs()));
        let tol = k as f64 * 100.0 * f64::EPSILON * norm;
        let n_null = eig.eigenvalues.iter().filter(|v| v.abs() < tol).count();
        if n_null != 2 {
            return Err(Error::NumericalFailure(format!(
                "penalty null space has dimension {n_null}, expected 2"
            )));
        }
        if eig.eigenvalues.iter().any(|v| *v <= -tol) {
            return Err(Error::NumericalFailure("penalty is not positive semidefinite".into()));
        }

        let mut eigenvectors = DMatrix::zeros(k, k);
        let mut eigenvalues = DVector::zeros(k);
        for (dst, &src) in order.iter().enumerate() {
            let mut col = eig.eigenvectors.column(src).clone_owned();
            // Deterministic sign: largest-magnitude entry positive.
            let pivot = col.iter().copied().fold(0.0f64, |m, v| if v.abs() > m.abs() { v } else { m });
            if pivot < 0.0 {
                col.neg_mut();
            }
            eigenvectors.set_column(dst, &col);
            eigenvalues[dst] = if dst < 2 { 0.0 } else { eig.eigenvalues[src] };
        }
        let scale = eigenvalues.map(|d| if d == 0.0 { 1.0 } else { d.sqrt() });
        let null_block = eigenvectors.columns(0, 2).clone_owned();
        let range_block = eigenvectors.columns(2, k - 2).clone_owned();
        Ok(Self { penalty: penalty.clone(), eigenvectors, eigenvalues, scale, null_block, range_block })
    }

    /// `Z_Λ · diag(d^{-1/2})`, mapping random-effect coefficients back to
    /// B-spline coefficients.
    pub fn random_transform(&self) -> DMatrix<f64> {
        let mut t = self.range_block.clone();
        for (j, mut col) in t.column_iter_mut().enumerate() {
            col /= self.eigenvalues[j + 2].sqrt();
        }
        t
    }

    /// `P D Pᵀ`.
    pub fn reconstruct(&self) -> DMatrix<f64> {
        &self.eigenvectors * DMatrix::from_diagonal(&self.eigenvalues) * self.eigenvectors.transpose()
    }
}

/// Mixed-model form of a penalized cubic B-spline.
#[derive(Debug, Clone)]
pub struct SpectralReparam {
    pub decomposition: PenaltyDecomposition,
    /// `[1, x]`, standing in for `X_B = B X_Λ` (same column span).
    pub fixed: DMatrix<f64>,
    /// `X_B = B X_Λ`.
    pub null_design: DMatrix<f64>,
    /// Demmler–Reinsch block `Z_B = B Z_Λ diag(d^{-1/2})`.
    pub random: BasisMatrix,
}

pub fn spectral_reparam(basis: &BasisMatrix, penalty: &DMatrix<f64>) -> Result<SpectralReparam> {
    if basis.kind != BasisKind::BSpline {
        return Err(Error::ContractViolation("spectral reparameterization needs a B-spline basis".into()));
    }
    if penalty.nrows() != basis.ncols() {
        return Err(Error::ContractViolation("penalty and basis dimensions differ".into()));
    }
    let decomposition = PenaltyDecomposition::new(penalty)?;
    let n = basis.nrows();
    let mut fixed = DMatrix::from_element(n, 2, 1.0);
    for (i, &x) in basis.points.iter().enumerate() {
        fixed[(i, 1)] = x;
    }
    let null_design = &basis.values * &decomposition.null_block;
    let random = BasisMatrix {
        values: &basis.values * decomposition.random_transform(),
        kind: BasisKind::DemmlerReinsch,
        grid: basis.grid.clone(),
        points: basis.points.clone(),
    };
    Ok(SpectralReparam { decomposition, fixed, null_design, random })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn grid3() -> KnotGrid {
        KnotGrid::new(0.0, 10.0, vec![2.0, 5.0, 7.5]).unwrap()
    }

    #[test]
    fn median_knot_of_symmetric_grid() {
        let x: Vec<f64> = (0..=10).map(f64::from).collect();
        let g = place_knots(&x, 1).unwrap();
        assert_eq!(g.interior(), &[5.0]);
        assert_eq!((g.lower(), g.upper()), (0.0, 10.0));
    }

    #[test]
    fn constant_data_is_degenerate() {
        let x = vec![3.0; 50];
        assert!(matches!(place_knots(&x, 2), Err(Error::DegenerateData(_))));
    }

    #[test]
    fn heavy_ties_collapse_knots() {
        let mut x = vec![1.0; 40];
        x.extend([0.0, 2.0, 3.0, 4.0]);
        assert!(matches!(place_knots(&x, 3), Err(Error::DegenerateData(_))));
    }

    #[test]
    fn equispaced_placement() {
        let x = [0.0, 1.0, 3.0, 8.0, 12.0];
        let g = place_knots_with(&x, 3, KnotPlacement::Equispaced).unwrap();
        assert_eq!(g.interior(), &[3.0, 6.0, 9.0]);
    }

    #[test]
    fn full_sequence_layout() {
        let seq = grid3().full_sequence();
        assert_eq!(seq.len(), 3 + 8);
        assert_eq!(&seq[..4], &[0.0; 4]);
        assert_eq!(&seq[7..], &[10.0; 4]);
    }

    #[test]
    fn out_of_domain_is_rejected() {
        let g = grid3();
        assert!(matches!(eval_bspline_basis(&g, &[10.5]), Err(Error::OutOfDomain { .. })));
        assert!(matches!(eval_ispline_basis(&g, &[-0.1]), Err(Error::OutOfDomain { .. })));
    }

    #[test]
    fn bspline_boundaries_are_clamped() {
        let g = grid3();
        let b = eval_bspline_basis(&g, &[0.0, 10.0]).unwrap();
        assert_eq!(b.ncols(), 7);
        assert_eq!(b.values[(0, 0)], 1.0);
        assert!(b.values.row(0).iter().skip(1).all(|v| *v == 0.0));
        assert!((b.values[(1, 6)] - 1.0).abs() < 1e-15);
    }

    #[test]
    fn ispline_endpoints() {
        let g = grid3();
        let b = eval_ispline_basis(&g, &[0.0, 10.0]).unwrap();
        assert_eq!(b.ncols(), 5);
        assert!(b.values.row(0).iter().all(|v| *v == 0.0));
        assert!(b.values.row(1).iter().all(|v| (*v - 1.0).abs() < 1e-15));
    }

    #[test]
    fn centering_removes_column_means() {
        let g = grid3();
        let x: Vec<f64> = (0..40).map(|i| i as f64 * 0.25).collect();
        let (c, means) = eval_ispline_basis(&g, &x).unwrap().centered();
        assert_eq!(means.len(), 5);
        for col in c.values.column_iter() {
            assert!(col.sum().abs() < 1e-12);
        }
    }

    #[test]
    fn penalty_rank_is_m_plus_two() {
        for m in 1..=12 {
            let interior: Vec<f64> = (1..=m).map(|k| k as f64 / (m + 1) as f64 * 7.0 + 0.3 * (k % 2) as f64 / (m + 1) as f64).collect();
            let g = KnotGrid::new(0.0, 7.0, interior).unwrap();
            let dec = PenaltyDecomposition::new(&penalty_matrix(&g)).unwrap();
            assert_eq!(dec.eigenvalues.iter().filter(|d| **d == 0.0).count(), 2);
            assert!(dec.eigenvalues.iter().skip(2).all(|d| *d > 0.0));
        }
    }

    #[test]
    fn spectral_reparam_requires_bspline() {
        let g = grid3();
        let i = eval_ispline_basis(&g, &[1.0, 2.0]).unwrap();
        assert!(spectral_reparam(&i, &penalty_matrix(&g)).is_err());
    }

    #[test]
    fn quadratic_curvature_energy() {
        // f(x) = x² on [0, 10]: ∫ f''² = 40.
        let g = grid3();
        let x = g.linspace(60);
        let b = eval_bspline_basis(&g, &x).unwrap().values;
        let f = DVector::from_iterator(x.len(), x.iter().map(|v| v * v));
        let coef = (b.transpose() * &b).cholesky().unwrap().solve(&(b.transpose() * f));
        let energy = (coef.transpose() * penalty_matrix(&g) * &coef)[(0, 0)];
        assert!((energy - 40.0).abs() < 1e-8, "{energy}");
    }
}
