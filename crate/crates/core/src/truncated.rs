//! Truncated gamma and linearly constrained (truncated) multivariate normal
//! distributions.
//!
//! Infinite bounds are always represented by `f64::INFINITY` /
//! `f64::NEG_INFINITY`, never by large finite numbers.

use nalgebra::{DMatrix, DVector, SymmetricEigen};
use rand::Rng;
use rand_distr::{Distribution, Exp1, Open01};
use statrs::function::erf::{erfc, erfc_inv};
use statrs::function::gamma::{gamma_lr, gamma_ur, ln_gamma};

use crate::error::{Error, Result};

/// Relative tolerance applied only to equality rows (`lower == upper`),
/// which floating-point arithmetic cannot hit exactly after a move.
pub const EQUALITY_TOLERANCE: f64 = 1e-9;

/// `{u : lower ≤ R u ≤ upper}` with `R` stored row-major.
#[derive(Debug, Clone, PartialEq)]
pub struct LinearConstraintSet {
    dim: usize,
    coefs: Vec<f64>,
    lower: Vec<f64>,
    upper: Vec<f64>,
    witness: Option<Vec<f64>>,
}

impl LinearConstraintSet {
    /// No rows: the whole of `R^dim`.
    pub fn unconstrained(dim: usize) -> Self {
        Self { dim, coefs: Vec::new(), lower: Vec::new(), upper: Vec::new(), witness: None }
    }

    pub fn new(dim: usize, rows: Vec<Vec<f64>>, lower: Vec<f64>, upper: Vec<f64>) -> Result<Self> {
        let mut set = Self::unconstrained(dim);
        if rows.len() != lower.len() || rows.len() != upper.len() {
            return Err(Error::ContractViolation("constraint rows and bounds differ in length".into()));
        }
        for ((row, lo), hi) in rows.iter().zip(lower).zip(upper) {
            set.push_row(row, lo, hi)?;
        }
        Ok(set)
    }

    /// `u_j ≥ 0` for every `j` in `coords`.
    pub fn nonnegative(dim: usize, coords: impl IntoIterator<Item = usize>) -> Self {
        let mut set = Self::unconstrained(dim);
        for j in coords {
            let mut row = vec![0.0; dim];
            row[j] = 1.0;
            set.push_row(&row, 0.0, f64::INFINITY).expect("valid unit row");
        }
        set
    }

    pub fn push_row(&mut self, row: &[f64], lower: f64, upper: f64) -> Result<()> {
        if row.len() != self.dim {
            return Err(Error::ContractViolation(format!(
                "constraint row has length {}, expected {}",
                row.len(),
                self.dim
            )));
        }
        if row.iter().any(|v| !v.is_finite()) || lower.is_nan() || upper.is_nan() {
            return Err(Error::ContractViolation("constraint entries must be finite numbers".into()));
        }
        if lower > upper || lower == f64::INFINITY || upper == f64::NEG_INFINITY {
            return Err(Error::ContractViolation(format!("empty constraint bounds [{lower}, {upper}]")));
        }
        self.coefs.extend_from_slice(row);
        self.lower.push(lower);
        self.upper.push(upper);
        Ok(())
    }

    /// Rows of `other` appended below the rows of `self`.
    pub fn stacked(&self, other: &LinearConstraintSet) -> Result<Self> {
        if self.dim != other.dim {
            return Err(Error::ContractViolation("stacking constraint sets of different dimension".into()));
        }
        let mut out = self.clone();
        out.coefs.extend_from_slice(&other.coefs);
        out.lower.extend_from_slice(&other.lower);
        out.upper.extend_from_slice(&other.upper);
        out.witness = None;
        Ok(out)
    }

    /// Merge pairs of rows with opposite coefficients, e.g. `1ᵀβ ≥ 1` and
    /// `-1ᵀβ ≥ -1`, into a single two-sided row.
    pub fn canonicalize(&self) -> Result<Self> {
        let mut out = Self::unconstrained(self.dim);
        let mut used = vec![false; self.n_rows()];
        for i in 0..self.n_rows() {
            if used[i] {
                continue;
            }
            let (mut lo, mut hi) = (self.lower[i], self.upper[i]);
            for j in (i + 1)..self.n_rows() {
                if !used[j] && self.row(j).iter().zip(self.row(i)).all(|(a, b)| *a == -*b) {
                    lo = lo.max(-self.upper[j]);
                    hi = hi.min(-self.lower[j]);
                    used[j] = true;
                }
            }
            out.push_row(self.row(i), lo, hi)?;
        }
        out.witness = self.witness.clone();
        Ok(out)
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn n_rows(&self) -> usize {
        self.lower.len()
    }

    pub fn row(&self, i: usize) -> &[f64] {
        &self.coefs[i * self.dim..(i + 1) * self.dim]
    }

    pub fn lower(&self) -> &[f64] {
        &self.lower
    }

    pub fn upper(&self) -> &[f64] {
        &self.upper
    }

    pub fn set_bounds(&mut self, i: usize, lower: f64, upper: f64) {
        debug_assert!(lower <= upper);
        self.lower[i] = lower;
        self.upper[i] = upper;
    }

    pub fn is_equality(&self, i: usize) -> bool {
        self.lower[i] == self.upper[i]
    }

    pub fn witness(&self) -> Option<&[f64]> {
        self.witness.as_deref()
    }

    /// Record a feasible point; rejected if it violates any row.
    pub fn set_witness(&mut self, u: Vec<f64>) -> Result<()> {
        let bad = self.violations(&u);
        if !bad.is_empty() {
            return Err(Error::InfeasibleStart { rows: bad });
        }
        self.witness = Some(u);
        Ok(())
    }

    /// `R u` evaluated row by row.
    pub fn apply(&self, u: &[f64]) -> Vec<f64> {
        (0..self.n_rows()).map(|i| dot(self.row(i), u)).collect()
    }

    fn row_satisfied(&self, i: usize, value: f64, u: &[f64]) -> bool {
        if self.is_equality(i) {
            let scale: f64 = 1.0 + self.lower[i].abs() + self.row(i).iter().zip(u).map(|(r, x)| (r * x).abs()).sum::<f64>();
            (value - self.lower[i]).abs() <= EQUALITY_TOLERANCE * scale
        } else {
            value >= self.lower[i] && value <= self.upper[i]
        }
    }

    /// Indices of rows violated at `u`. Inequality rows are checked
    /// exactly; equality rows to a relative [`EQUALITY_TOLERANCE`].
    pub fn violations(&self, u: &[f64]) -> Vec<usize> {
        (0..self.n_rows())
            .filter(|&i| !self.row_satisfied(i, dot(self.row(i), u), u))
            .collect()
    }

    pub fn is_satisfied(&self, u: &[f64]) -> bool {
        (0..self.n_rows()).all(|i| self.row_satisfied(i, dot(self.row(i), u), u))
    }

    /// Least-squares projection of `start` onto the constraint set with a
    /// small inward margin on inequality rows (Dykstra's alternating
    /// projections). Returns a strictly feasible point or `InfeasibleStart`
    /// naming the rows still violated.
    pub fn project_feasible(&self, start: &[f64], margin: f64) -> Result<Vec<f64>> {
        let k = self.n_rows();
        let mut u = start.to_vec();
        let mut corrections = vec![vec![0.0; self.dim]; k];
        let shrunk: Vec<(f64, f64)> = (0..k)
            .map(|i| {
                if self.is_equality(i) {
                    (self.lower[i], self.upper[i])
                } else {
                    let (lo, hi) = (self.lower[i], self.upper[i]);
                    let m = if lo.is_finite() && hi.is_finite() { margin.min(0.25 * (hi - lo)) } else { margin };
                    (lo + m, hi - m)
                }
            })
            .collect();
        for _ in 0..20_000 {
            let mut moved = 0.0f64;
            for i in 0..k {
                let row = self.row(i);
                let norm2 = dot(row, row);
                if norm2 == 0.0 {
                    continue;
                }
                let y: Vec<f64> = u.iter().zip(&corrections[i]).map(|(a, c)| a + c).collect();
                let v = dot(row, &y);
                let (lo, hi) = shrunk[i];
                let target = v.clamp(lo, hi);
                let step = (target - v) / norm2;
                let next: Vec<f64> = y.iter().zip(row).map(|(a, r)| a + step * r).collect();
                for j in 0..self.dim {
                    corrections[i][j] = y[j] - next[j];
                    moved = moved.max((next[j] - u[j]).abs());
                }
                u = next;
            }
            if moved < 1e-13 * (1.0 + u.iter().fold(0.0f64, |m, v| m.max(v.abs()))) {
                break;
            }
        }
        let bad = self.violations(&u);
        if bad.is_empty() {
            Ok(u)
        } else {
            Err(Error::InfeasibleStart { rows: bad })
        }
    }
}

#[inline]
pub(crate) fn dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

/// Parameters of `TG(a, b, τ₀)`: a gamma law with shape `a`, rate `b`,
/// conditioned on `τ ≥ τ₀`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TruncGammaParams {
    pub shape: f64,
    pub rate: f64,
    pub floor: f64,
}

impl TruncGammaParams {
    pub fn new(shape: f64, rate: f64, floor: f64) -> Result<Self> {
        if !(shape > 0.0 && shape.is_finite()) || !(rate > 0.0 && rate.is_finite()) || !(floor >= 0.0 && floor.is_finite()) {
            return Err(Error::ContractViolation(format!(
                "truncated gamma needs a > 0, b > 0, τ₀ ≥ 0; got ({shape}, {rate}, {floor})"
            )));
        }
        Ok(Self { shape, rate, floor })
    }

    /// Regularized lower and upper incomplete gamma at the scaled floor.
    fn floor_tails(&self) -> (f64, f64) {
        let x0 = self.rate * self.floor;
        if x0 == 0.0 {
            (0.0, 1.0)
        } else {
            (gamma_lr(self.shape, x0), gamma_ur(self.shape, x0))
        }
    }

    /// `log c₁(τ₀, a, b) = log ∫_{τ₀}^∞ τ^{a-1} e^{-bτ} dτ`.
    pub fn log_normalizer(&self) -> f64 {
        let (_, q0) = self.floor_tails();
        ln_gamma(self.shape) - self.shape * self.rate.ln() + q0.ln()
    }

    /// Distribution function of the truncated law.
    pub fn cdf(&self, tau: f64) -> f64 {
        if tau <= self.floor {
            return 0.0;
        }
        let (_, q0) = self.floor_tails();
        let q = gamma_ur(self.shape, self.rate * tau);
        ((q0 - q) / q0).clamp(0.0, 1.0)
    }
}

/// One draw from `TG(a, b, τ₀)` by inverting the renormalized upper tail.
pub fn sample_trunc_gamma<R: Rng + ?Sized>(p: &TruncGammaParams, rng: &mut R) -> Result<f64> {
    let (p0, q0) = p.floor_tails();
    if !(q0 >= 1e-300) {
        return Err(Error::NumericalFailure(format!(
            "truncated gamma tail mass {q0:e} underflows for (a={}, b={}, τ₀={})",
            p.shape, p.rate, p.floor
        )));
    }
    let v: f64 = Open01.sample(rng);
    let a = p.shape;
    let x0 = p.rate * p.floor;
    // Solve on whichever tail keeps relative precision.
    let q_target = (1.0 - v) * q0;
    let p_target = p0 + v * q0;
    let use_upper = q_target < 0.5;
    // g(x) increasing in x; root of g(x) = 0.
    let g = |x: f64| -> f64 {
        if x <= 0.0 {
            return if use_upper { q_target - 1.0 } else { -p_target };
        }
        if use_upper {
            q_target - gamma_ur(a, x)
        } else {
            gamma_lr(a, x) - p_target
        }
    };
    let ln_gamma_a = ln_gamma(a);
    let density = |x: f64| ((a - 1.0) * x.ln() - x - ln_gamma_a).exp();

    let mut lo = x0;
    let mut hi = x0.max(a).max(1.0);
    let mut iters = 0;
    while g(hi) < 0.0 {
        lo = hi;
        hi *= 2.0;
        iters += 1;
        if iters > 2000 || !hi.is_finite() {
            return Err(Error::NumericalFailure("truncated gamma inversion failed to bracket".into()));
        }
    }
    let mut x = 0.5 * (lo + hi);
    for _ in 0..200 {
        let gx = g(x);
        if gx == 0.0 {
            break;
        }
        if gx < 0.0 {
            lo = x;
        } else {
            hi = x;
        }
        let f = density(x);
        let mut next = if f > 0.0 && f.is_finite() { x - gx / f } else { f64::NAN };
        if !(next > lo && next < hi) {
            next = 0.5 * (lo + hi);
        }
        if (next - x).abs() <= 1e-15 * x.abs() || hi - lo <= 1e-15 * hi {
            x = next;
            break;
        }
        x = next;
    }
    Ok((x / p.rate).max(p.floor))
}

/// Log density of `TG(a, b, τ₀)`; `-∞` outside the support.
pub fn log_pdf_trunc_gamma(p: &TruncGammaParams, tau: f64) -> f64 {
    if !(tau >= p.floor) || tau <= 0.0 {
        return f64::NEG_INFINITY;
    }
    (p.shape - 1.0) * tau.ln() - p.rate * tau - p.log_normalizer()
}

/// Unnormalized log kernel `-(u-μ)ᵀA(u-μ)/2` on the constraint set,
/// `-∞` outside it.
pub fn log_kernel_trunc_mvn(mean: &[f64], precision: &DMatrix<f64>, cons: &LinearConstraintSet, u: &[f64]) -> f64 {
    if !cons.is_satisfied(u) {
        return f64::NEG_INFINITY;
    }
    let diff = DVector::from_iterator(u.len(), u.iter().zip(mean).map(|(a, b)| a - b));
    -0.5 * (diff.transpose() * precision * &diff)[(0, 0)]
}

const TAIL_START: f64 = 5.0;

#[inline]
fn std_normal_upper(x: f64) -> f64 {
    0.5 * erfc(x / std::f64::consts::SQRT_2)
}

#[inline]
fn std_normal_upper_inv(q: f64) -> f64 {
    std::f64::consts::SQRT_2 * erfc_inv(2.0 * q)
}

/// Standard normal truncated to `[a, b]`, either end possibly infinite.
///
/// Narrow intervals use uniform rejection, tails beyond 5 SD use
/// exponential rejection, and the body uses inverse-CDF on whichever tail
/// keeps precision.
pub fn sample_truncated_std_normal<R: Rng + ?Sized>(a: f64, b: f64, rng: &mut R) -> f64 {
    debug_assert!(a <= b, "empty interval [{a}, {b}]");
    if a == b {
        return a;
    }
    let width = b - a;
    let reach = a.abs().max(b.abs());
    if width.is_finite() && width * reach <= 1.0 {
        let floor = if a <= 0.0 && b >= 0.0 { 0.0 } else { a.abs().min(b.abs()) };
        loop {
            let u: f64 = rng.random();
            let z = (a + u * width).clamp(a, b);
            let accept: f64 = rng.random();
            if accept <= (0.5 * (floor * floor - z * z)).exp() {
                return z;
            }
        }
    }
    if a >= TAIL_START {
        return exponential_tail(a, b, rng);
    }
    if b <= -TAIL_START {
        return -exponential_tail(-b, -a, rng);
    }
    let u: f64 = Open01.sample(rng);
    let z = if a >= 0.0 {
        let (qa, qb) = (std_normal_upper(a), std_normal_upper(b));
        std_normal_upper_inv(qb + u * (qa - qb))
    } else if b <= 0.0 {
        let (qa, qb) = (std_normal_upper(-b), std_normal_upper(-a));
        -std_normal_upper_inv(qa + u * (qb - qa))
    } else {
        let (pa, pb) = (std_normal_upper(-a), std_normal_upper(-b));
        // Lower-tail probabilities Φ(a), Φ(b).
        let p = pa + u * (pb - pa);
        if p < 0.5 {
            -std_normal_upper_inv(p)
        } else {
            std_normal_upper_inv(1.0 - p)
        }
    };
    z.clamp(a, b)
}

/// Robert (1995) translated-exponential rejection for `[a, b]`, `a ≥ 5`.
fn exponential_tail<R: Rng + ?Sized>(a: f64, b: f64, rng: &mut R) -> f64 {
    let lambda = 0.5 * (a + (a * a + 4.0).sqrt());
    loop {
        let e: f64 = Exp1.sample(rng);
        let z = a + e / lambda;
        if z > b {
            continue;
        }
        let u: f64 = rng.random();
        if u <= (-0.5 * (z - lambda) * (z - lambda)).exp() {
            return z;
        }
    }
}

/// Normal law `exp(-uᵀAu/2 + hᵀu)` restricted to a [`LinearConstraintSet`],
/// sampled by coordinate Gibbs along a fixed set of whitened directions.
///
/// The directions are orthonormal with respect to a metric `H` (by default
/// `H = A`) and span the null space of the equality rows. Any fixed `H`
/// leaves the target invariant; a metric closer to the shape of the
/// feasible region mixes faster.
#[derive(Debug, Clone)]
pub struct TruncatedNormal {
    precision: DMatrix<f64>,
    linear: DVector<f64>,
    directions: DMatrix<f64>,
    /// `A v_j` per column.
    a_dirs: DMatrix<f64>,
    /// `v_jᵀ A v_j`.
    curvature: Vec<f64>,
}

impl TruncatedNormal {
    /// Canonical form: precision `A` and linear term `h = A μ`.
    pub fn from_canonical(precision: DMatrix<f64>, linear: DVector<f64>, cons: &LinearConstraintSet) -> Result<Self> {
        let metric = precision.clone();
        Self::with_metric(precision, linear, cons, &metric)
    }

    /// Canonical form with directions whitened against `metric` (SPD).
    pub fn with_metric(
        precision: DMatrix<f64>,
        linear: DVector<f64>,
        cons: &LinearConstraintSet,
        metric: &DMatrix<f64>,
    ) -> Result<Self> {
        let d = precision.nrows();
        if precision.ncols() != d || linear.len() != d || cons.dim() != d || metric.shape() != (d, d) {
            return Err(Error::ContractViolation("truncated normal dimensions disagree".into()));
        }
        let directions = whitened_directions(metric, cons)?;
        let a_dirs = &precision * &directions;
        let curvature: Vec<f64> = (0..directions.ncols())
            .map(|j| directions.column(j).dot(&a_dirs.column(j)))
            .collect();
        if curvature.iter().any(|c| !(*c > 0.0)) {
            return Err(Error::NumericalFailure("precision matrix is not positive definite".into()));
        }
        Ok(Self { precision, linear, directions, a_dirs, curvature })
    }

    pub fn from_mean(mean: &[f64], precision: DMatrix<f64>, cons: &LinearConstraintSet) -> Result<Self> {
        let linear = &precision * DVector::from_column_slice(mean);
        Self::from_canonical(precision, linear, cons)
    }

    pub fn n_directions(&self) -> usize {
        self.directions.ncols()
    }

    /// `sweeps` passes of single-direction conditional updates started at
    /// `init`. Every returned point satisfies `cons`.
    pub fn sample<R: Rng + ?Sized>(
        &self,
        cons: &LinearConstraintSet,
        init: &[f64],
        sweeps: usize,
        rng: &mut R,
    ) -> Result<Vec<f64>> {
        if cons.dim() != self.precision.nrows() || init.len() != cons.dim() {
            return Err(Error::ContractViolation("truncated normal dimensions disagree".into()));
        }
        let violated = cons.violations(init);
        if !violated.is_empty() {
            return Err(Error::InfeasibleStart { rows: violated });
        }
        let d = init.len();
        let k = cons.n_rows();
        let q = self.directions.ncols();
        let mut u = init.to_vec();
        // Residual r = A u - h; along v_j the step t is N(-v_jᵀr / c_j, 1 / c_j).
        let mut resid = &self.precision * DVector::from_column_slice(&u) - &self.linear;
        // rv[j*k + i] = r_i · v_j
        let mut rv = vec![0.0; q * k];
        let mut dir = vec![0.0; d];
        for j in 0..q {
            dir.iter_mut().zip(self.directions.column(j).iter()).for_each(|(a, b)| *a = *b);
            for i in 0..k {
                rv[j * k + i] = dot(cons.row(i), &dir);
            }
        }
        let mut ru = cons.apply(&u);
        let mut candidate = vec![0.0; d];
        let mut ru_candidate = vec![0.0; k];

        for _ in 0..sweeps {
            for j in 0..q {
                let column = self.directions.column(j);
                let (mut t_lo, mut t_hi) = (f64::NEG_INFINITY, f64::INFINITY);
                for i in 0..k {
                    let a = rv[j * k + i];
                    if a == 0.0 || cons.is_equality(i) {
                        continue;
                    }
                    let lo = (cons.lower()[i] - ru[i]) / a;
                    let hi = (cons.upper()[i] - ru[i]) / a;
                    let (lo, hi) = if a > 0.0 { (lo, hi) } else { (hi, lo) };
                    t_lo = t_lo.max(lo);
                    t_hi = t_hi.min(hi);
                }
                if !(t_lo <= t_hi) {
                    return Err(Error::InfeasibleRegion { coordinate: j });
                }
                let c = self.curvature[j];
                let sd = c.sqrt().recip();
                let mean = -column.dot(&resid) / c;
                let z = sample_truncated_std_normal((t_lo - mean) / sd, (t_hi - mean) / sd, rng);
                let mut t = (mean + sd * z).clamp(t_lo, t_hi);
                // Rounding may push a boundary draw out by an ulp; shrink toward
                // the current (feasible) point until every row holds exactly.
                let mut accepted = false;
                for _ in 0..64 {
                    for (cand, (ui, vi)) in candidate.iter_mut().zip(u.iter().zip(column.iter())) {
                        *cand = ui + t * vi;
                    }
                    let mut ok = true;
                    for i in 0..k {
                        let value = dot(cons.row(i), &candidate);
                        ru_candidate[i] = value;
                        if ok && !cons.row_satisfied(i, value, &candidate) {
                            ok = false;
                        }
                    }
                    if ok {
                        accepted = true;
                        break;
                    }
                    t *= 0.5;
                }
                if accepted {
                    std::mem::swap(&mut u, &mut candidate);
                    std::mem::swap(&mut ru, &mut ru_candidate);
                    resid.axpy(t, &self.a_dirs.column(j), 1.0);
                }
            }
        }
        if !cons.is_satisfied(&u) {
            return Err(Error::EngineBug("truncated normal draw left the constraint set".into()));
        }
        Ok(u)
    }
}

/// `H`-orthonormal directions spanning `{v : E v = 0}` for the equality
/// rows `E` of `cons` (all of `R^d` when there are none).
fn whitened_directions(metric: &DMatrix<f64>, cons: &LinearConstraintSet) -> Result<DMatrix<f64>> {
    let d = metric.nrows();
    let eq_rows: Vec<usize> = (0..cons.n_rows()).filter(|&i| cons.is_equality(i)).collect();
    let basis = if eq_rows.is_empty() {
        DMatrix::identity(d, d)
    } else {
        let e = DMatrix::from_fn(eq_rows.len(), d, |r, c| cons.row(eq_rows[r])[c]);
        let gram = e.transpose() * &e;
        let eig = SymmetricEigen::new(gram);
        let top = eig.eigenvalues.iter().fold(0.0f64, |m, v| m.max(v.abs()));
        let tol = d as f64 * 100.0 * f64::EPSILON * top.max(1.0);
        let null: Vec<usize> = (0..d).filter(|&i| eig.eigenvalues[i].abs() <= tol).collect();
        if null.is_empty() {
            return Err(Error::InfeasibleRegion { coordinate: 0 });
        }
        DMatrix::from_fn(d, null.len(), |r, c| eig.eigenvectors[(r, null[c])])
    };
    let restricted = basis.transpose() * metric * &basis;
    let chol = restricted
        .cholesky()
        .ok_or_else(|| Error::NumericalFailure("direction metric is not positive definite".into()))?;
    // basis · L^{-T}
    let l_t_inv = chol
        .l()
        .transpose()
        .solve_upper_triangular(&DMatrix::identity(basis.ncols(), basis.ncols()))
        .ok_or_else(|| Error::NumericalFailure("triangular solve failed".into()))?;
    Ok(basis * l_t_inv)
}

/// Draw from `TN(μ, A⁻¹, R, c, d)` via `sweeps` whitened coordinate-Gibbs
/// passes started at `init`.
pub fn sample_trunc_mvn<R: Rng + ?Sized>(
    mean: &[f64],
    precision: &DMatrix<f64>,
    cons: &LinearConstraintSet,
    init: &[f64],
    sweeps: usize,
    rng: &mut R,
) -> Result<Vec<f64>> {
    TruncatedNormal::from_mean(mean, precision.clone(), cons)?.sample(cons, init, sweeps, rng)
}
