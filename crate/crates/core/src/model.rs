//! Model specification and assembly of the design `M = [X | Z_α | Z_B]`,
//! the prior precision `A(τ)`, and the base and slice-augmented constraint
//! sets consumed by the Gibbs engine.

use std::ops::Range;

use nalgebra::{DMatrix, DVector};
use rand::Rng;
use rand_distr::{Distribution, Exp1};

use crate::data::{ColumnKind, DataTable};
use crate::error::{Error, Result};
use crate::splinebasis::{
    eval_bspline_basis, eval_ispline_basis, penalty_matrix, place_knots_with, spectral_reparam, KnotGrid,
    KnotPlacement, PenaltyDecomposition,
};
use crate::truncated::{dot, LinearConstraintSet};

/// Canonical exponential-family link, identified by its cumulant `ξ`.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum LinkFamily {
    /// `ξ(v) = log(1 + eᵛ)`
    Logistic,
    /// `ξ(v) = eᵛ`
    Poisson,
    /// `ξ(v) = v²/2` (unit error variance)
    Gaussian,
    /// `ξ(v, t) = exp(log t + v)`: Poisson with offset `log t`.
    ExponentialPH,
}

impl LinkFamily {
    pub fn parse(name: &str) -> Result<Self> {
        match name.trim().to_ascii_lowercase().as_str() {
            "logistic" | "binomial" | "logit" => Ok(Self::Logistic),
            "poisson" => Ok(Self::Poisson),
            "gaussian" | "normal" => Ok(Self::Gaussian),
            "exponential_ph" | "exponential-ph" | "exp_ph" => Ok(Self::ExponentialPH),
            other => Err(Error::Usage(format!("unknown family '{other}'"))),
        }
    }

    pub fn name(&self) -> &'static str {
        match self {
            Self::Logistic => "logistic",
            Self::Poisson => "poisson",
            Self::Gaussian => "gaussian",
            Self::ExponentialPH => "exponential_ph",
        }
    }

    pub fn offset_required(&self) -> bool {
        matches!(self, Self::ExponentialPH)
    }

    /// `ξ(v)`, where `v` already includes any offset.
    pub fn xi(&self, v: f64) -> f64 {
        match self {
            Self::Logistic => {
                if v > 0.0 {
                    v + (-v).exp().ln_1p()
                } else {
                    v.exp().ln_1p()
                }
            }
            Self::Poisson | Self::ExponentialPH => v.exp(),
            Self::Gaussian => 0.5 * v * v,
        }
    }

    /// `{v : ξ(v) ≤ s}` as a closed interval.
    pub fn slice_bound(&self, s: f64) -> Result<(f64, f64)> {
        let empty = || Error::NumericalFailure(format!("empty slice for height {s} under {}", self.name()));
        match self {
            Self::Logistic => {
                if !(s > 0.0) {
                    return Err(empty());
                }
                // log(eˢ - 1), stable at both ends.
                let hi = if s > 1.0 { s + (-(-s).exp()).ln_1p() } else { s.exp_m1().ln() };
                Ok((f64::NEG_INFINITY, hi))
            }
            Self::Poisson | Self::ExponentialPH => {
                if !(s > 0.0) {
                    return Err(empty());
                }
                Ok((f64::NEG_INFINITY, s.ln()))
            }
            Self::Gaussian => {
                if !(s >= 0.0) {
                    return Err(empty());
                }
                let r = (2.0 * s).sqrt();
                Ok((-r, r))
            }
        }
    }

    fn check_response(&self, y: &[f64]) -> Result<()> {
        let bad = |what: &str| Error::Schema(format!("response does not match {} family: {what}", self.name()));
        match self {
            Self::Logistic | Self::ExponentialPH => {
                if y.iter().any(|v| *v != 0.0 && *v != 1.0) {
                    return Err(bad("values must be 0 or 1"));
                }
            }
            Self::Poisson => {
                if y.iter().any(|v| *v < 0.0 || v.fract() != 0.0) {
                    return Err(bad("values must be nonnegative integers"));
                }
            }
            Self::Gaussian => {}
        }
        Ok(())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum Direction {
    #[default]
    Increasing,
    Decreasing,
}

/// Shape-constrained effect `α(t) = Σ u_m I_m(t)`, `u ≥ 0`.
#[derive(Debug, Clone, PartialEq)]
pub struct MonotoneTerm {
    pub name: String,
    pub variable: String,
    pub knots: usize,
    pub direction: Direction,
    pub placement: KnotPlacement,
}

impl MonotoneTerm {
    pub fn new(name: impl Into<String>, variable: impl Into<String>, knots: usize) -> Self {
        Self {
            name: name.into(),
            variable: variable.into(),
            knots,
            direction: Direction::Increasing,
            placement: KnotPlacement::Quantile,
        }
    }

    pub fn decreasing(mut self) -> Self {
        self.direction = Direction::Decreasing;
        self
    }
}

/// Penalized cubic B-spline effect in Demmler–Reinsch form.
#[derive(Debug, Clone, PartialEq)]
pub struct SmoothTerm {
    pub name: String,
    pub variable: String,
    pub knots: usize,
    pub placement: KnotPlacement,
}

impl SmoothTerm {
    pub fn new(name: impl Into<String>, variable: impl Into<String>, knots: usize) -> Self {
        Self { name: name.into(), variable: variable.into(), knots, placement: KnotPlacement::Quantile }
    }
}

/// Priors: `β ~ N(μ, Σ)`, `τ_j ~ TG(a₀, b₀, τ₀)`.
#[derive(Debug, Clone, PartialEq)]
pub struct Priors {
    /// Defaults to zero.
    pub beta_mean: Option<Vec<f64>>,
    /// Defaults to `100·I`.
    pub beta_cov: Option<DMatrix<f64>>,
    pub a0: f64,
    pub b0: f64,
    pub tau0: f64,
}

impl Default for Priors {
    fn default() -> Self {
        Self { beta_mean: None, beta_cov: None, a0: 0.01, b0: 0.01, tau0: 1e-3 }
    }
}

pub const DEFAULT_BETA_VARIANCE: f64 = 100.0;

/// `lower ≤ Σ coef·β[name] ≤ upper` over named fixed-effect coefficients.
#[derive(Debug, Clone, PartialEq)]
pub struct BetaConstraint {
    pub coefficients: Vec<(String, f64)>,
    pub lower: f64,
    pub upper: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct SamplerSettings {
    pub iterations: usize,
    pub burn_in: usize,
    pub thin: usize,
    pub seed: u64,
    /// Coordinate-Gibbs passes of the truncated normal per iteration.
    pub tn_sweeps: usize,
    /// When false every `τ_j` stays at its initial value.
    pub update_tau: bool,
    /// Initial `τ_j`; defaults to `max(1, τ₀)`.
    pub init_tau: Option<f64>,
    /// Starting `β`; defaults to the prior mean.
    pub init_beta: Option<Vec<f64>>,
    /// Project an infeasible starting point onto the constraint set
    /// instead of failing.
    pub repair_init: bool,
    pub metric: DirectionMetric,
}

/// Metric whose orthonormal axes are the truncated-normal move directions.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum DirectionMetric {
    /// `A(τ)` alone.
    Prior,
    /// `A(τ) + Mᵀ W M` with fixed weights `W` computed from the response.
    #[default]
    DataInformed,
}

impl Default for SamplerSettings {
    fn default() -> Self {
        Self {
            iterations: 10_000,
            burn_in: 5_000,
            thin: 1,
            seed: 0,
            tn_sweeps: 1,
            update_tau: true,
            init_tau: None,
            init_beta: None,
            repair_init: false,
            metric: DirectionMetric::default(),
        }
    }
}

impl SamplerSettings {
    /// `iterations` with the default half burn-in.
    pub fn with_iterations(iterations: usize) -> Self {
        Self { iterations, burn_in: iterations / 2, ..Self::default() }
    }

    pub fn kept(&self) -> usize {
        if self.iterations <= self.burn_in || self.thin == 0 {
            0
        } else {
            (self.iterations - self.burn_in).div_ceil(self.thin)
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct ModelSpec {
    pub family: LinkFamily,
    pub response: String,
    /// Follow-up time column; required by [`LinkFamily::ExponentialPH`].
    pub time: Option<String>,
    pub fixed: Vec<String>,
    pub monotone: Option<MonotoneTerm>,
    pub smooths: Vec<SmoothTerm>,
    pub priors: Priors,
    pub constraints: Vec<BetaConstraint>,
    pub sampler: SamplerSettings,
}

impl ModelSpec {
    pub fn new(family: LinkFamily, response: impl Into<String>) -> Self {
        Self {
            family,
            response: response.into(),
            time: None,
            fixed: Vec::new(),
            monotone: None,
            smooths: Vec::new(),
            priors: Priors::default(),
            constraints: Vec::new(),
            sampler: SamplerSettings::default(),
        }
    }

    pub fn with_fixed(mut self, name: impl Into<String>) -> Self {
        self.fixed.push(name.into());
        self
    }

    pub fn with_monotone(mut self, term: MonotoneTerm) -> Self {
        self.monotone = Some(term);
        self
    }

    pub fn with_smooth(mut self, term: SmoothTerm) -> Self {
        self.smooths.push(term);
        self
    }

    pub fn with_time(mut self, column: impl Into<String>) -> Self {
        self.time = Some(column.into());
        self
    }

    pub fn with_constraint(mut self, c: BetaConstraint) -> Self {
        self.constraints.push(c);
        self
    }

    pub fn with_sampler(mut self, sampler: SamplerSettings) -> Self {
        self.sampler = sampler;
        self
    }

    /// Number of fixed-effect coefficients `p` (intercept, covariates,
    /// and one linear column per smooth term).
    pub fn n_beta(&self) -> usize {
        1 + self.fixed.len() + self.smooths.len()
    }

    /// Check prior and sampler settings. Returns non-fatal warnings.
    pub fn validate(&self) -> Result<Vec<String>> {
        let p = &self.priors;
        if !(p.tau0 > 0.0 && p.tau0.is_finite()) {
            return Err(Error::ContractViolation(format!("τ₀ must be positive, got {}", p.tau0)));
        }
        if !(p.a0 > 0.0 && p.b0 > 0.0 && p.a0.is_finite() && p.b0.is_finite()) {
            return Err(Error::ContractViolation(format!("a₀ and b₀ must be positive, got {} and {}", p.a0, p.b0)));
        }
        let n_beta = self.n_beta();
        if let Some(m) = &p.beta_mean {
            if m.len() != n_beta || m.iter().any(|v| !v.is_finite()) {
                return Err(Error::ContractViolation(format!("prior mean must have {n_beta} finite entries")));
            }
        }
        if let Some(cov) = &p.beta_cov {
            if cov.nrows() != n_beta || cov.ncols() != n_beta {
                return Err(Error::ContractViolation(format!("prior covariance must be {n_beta}×{n_beta}")));
            }
            if (cov - cov.transpose()).amax() > 1e-12 * cov.amax().max(1.0) || cov.clone().cholesky().is_none() {
                return Err(Error::ContractViolation("prior covariance must be symmetric positive definite".into()));
            }
        }
        let s = &self.sampler;
        if s.iterations <= s.burn_in {
            return Err(Error::ContractViolation("iterations must exceed burn-in".into()));
        }
        if s.thin == 0 || s.tn_sweeps == 0 {
            return Err(Error::ContractViolation("thinning and TN sweeps must be positive".into()));
        }
        if let Some(t) = s.init_tau {
            if !(t >= p.tau0) {
                return Err(Error::ContractViolation("initial τ must be at least τ₀".into()));
            }
        }
        if self.family.offset_required() && self.time.is_none() {
            return Err(Error::ContractViolation("exponential PH family needs a time column".into()));
        }
        let mut names: Vec<&str> = self.smooths.iter().map(|t| t.name.as_str()).collect();
        if let Some(m) = &self.monotone {
            names.push(&m.name);
        }
        if let Some(bad) = names.iter().find(|n| n.is_empty() || !n.chars().all(|c| c.is_ascii_alphanumeric() || c == '_')) {
            return Err(Error::ContractViolation(format!("term name '{bad}' must use letters, digits or '_'")));
        }
        let mut sorted = names.clone();
        sorted.sort_unstable();
        sorted.dedup();
        if sorted.len() != names.len() {
            return Err(Error::ContractViolation("term names must be unique".into()));
        }
        let mut warnings = Vec::new();
        let dims = self.monotone.iter().map(|m| m.knots).chain(self.smooths.iter().map(|s| s.knots));
        for m in dims {
            if p.a0 + (m as f64 + 2.0) / 2.0 < 1.0 {
                warnings.push(format!("a₀ + (M+2)/2 = {} is below 1", p.a0 + (m as f64 + 2.0) / 2.0));
            }
        }
        Ok(warnings)
    }
}

/// Evaluation recipe for one nonparametric term on new points.
#[derive(Debug, Clone, PartialEq)]
pub enum TermLayout {
    Monotone {
        name: String,
        variable: String,
        grid: KnotGrid,
        /// Column means subtracted from the raw I-spline basis.
        column_means: Vec<f64>,
        /// `+1` increasing, `-1` decreasing.
        sign: f64,
        coefs: Range<usize>,
        /// Index of the intercept in `η`.
        intercept: usize,
    },
    Smooth {
        name: String,
        variable: String,
        grid: KnotGrid,
        /// `Z_Λ diag(d^{-1/2})`, B-spline coefficients per random effect.
        transform: DMatrix<f64>,
        /// Mean subtracted from the covariate in the linear column.
        center: f64,
        linear: usize,
        coefs: Range<usize>,
        /// Present when no monotone term carries the intercept.
        intercept: Option<usize>,
    },
}

impl TermLayout {
    pub fn name(&self) -> &str {
        match self {
            TermLayout::Monotone { name, .. } | TermLayout::Smooth { name, .. } => name,
        }
    }

    pub fn grid(&self) -> &KnotGrid {
        match self {
            TermLayout::Monotone { grid, .. } | TermLayout::Smooth { grid, .. } => grid,
        }
    }

    pub fn coefs(&self) -> Range<usize> {
        match self {
            TermLayout::Monotone { coefs, .. } | TermLayout::Smooth { coefs, .. } => coefs.clone(),
        }
    }

    /// Rows `f(x_g)` as a linear map of `η`: a `G × dim` matrix `E` with
    /// `f(grid) = E η`.
    pub fn evaluation_matrix(&self, points: &[f64], dim: usize) -> Result<DMatrix<f64>> {
        let mut e = DMatrix::zeros(points.len(), dim);
        match self {
            TermLayout::Monotone { grid, column_means, sign, coefs, intercept, .. } => {
                let basis = eval_ispline_basis(grid, points)?.shifted(column_means);
                for g in 0..points.len() {
                    e[(g, *intercept)] = 1.0;
                    for (j, c) in coefs.clone().enumerate() {
                        e[(g, c)] = sign * basis.values[(g, j)];
                    }
                }
            }
            TermLayout::Smooth { grid, transform, center, linear, coefs, intercept, .. } => {
                let z = eval_bspline_basis(grid, points)?.values * transform;
                for (g, x) in points.iter().enumerate() {
                    if let Some(i) = intercept {
                        e[(g, *i)] = 1.0;
                    }
                    e[(g, *linear)] = x - center;
                    for (j, c) in coefs.clone().enumerate() {
                        e[(g, c)] = z[(g, j)];
                    }
                }
            }
        }
        Ok(e)
    }
}

/// A penalized block `u_j ~ N(0, τ_j⁻¹ I)` of `η`.
#[derive(Debug, Clone, PartialEq)]
pub struct PenalizedBlock {
    pub name: String,
    pub range: Range<usize>,
}

/// Where each coefficient group sits inside `η`.
#[derive(Debug, Clone, PartialEq)]
pub struct IndexMap {
    pub beta: Range<usize>,
    pub blocks: Vec<PenalizedBlock>,
    pub names: Vec<String>,
}

impl IndexMap {
    pub fn dim(&self) -> usize {
        self.names.len()
    }

    pub fn position(&self, name: &str) -> Option<usize> {
        self.names.iter().position(|n| n == name)
    }
}

/// Everything the sampler needs, fixed for the whole run.
#[derive(Debug, Clone)]
pub struct DesignBundle {
    pub family: LinkFamily,
    /// `N × dim` design ordered `[X | Z_α | Z_B]`.
    pub design: DMatrix<f64>,
    pub y: Vec<f64>,
    pub offset: Vec<f64>,
    pub index: IndexMap,
    pub base_constraints: LinearConstraintSet,
    pub terms: Vec<TermLayout>,
    pub penalties: Vec<PenaltyDecomposition>,
    /// `Σ⁻¹`
    pub beta_precision: DMatrix<f64>,
    /// Prior mean `b = [μ, 0, 0]`.
    pub prior_mean: Vec<f64>,
    /// `Mᵀ y + A(τ) b` without the `τ` part (which multiplies zeros).
    pub linear_term: DVector<f64>,
    pub tau0: f64,
    /// Design rows, row-major, for exact per-row products.
    rows: Vec<f64>,
}

impl DesignBundle {
    pub fn n_obs(&self) -> usize {
        self.y.len()
    }

    pub fn dim(&self) -> usize {
        self.index.dim()
    }

    pub fn row(&self, i: usize) -> &[f64] {
        let d = self.dim();
        &self.rows[i * d..(i + 1) * d]
    }

    /// `m_iᵀη + offset_i`.
    pub fn linear_predictor(&self, i: usize, eta: &[f64]) -> f64 {
        dot(self.row(i), eta) + self.offset[i]
    }

    pub fn term(&self, name: &str) -> Option<&TermLayout> {
        self.terms.iter().find(|t| t.name() == name)
    }
}

fn centered(values: &[f64]) -> (Vec<f64>, f64) {
    let mean = values.iter().sum::<f64>() / values.len() as f64;
    (values.iter().map(|v| v - mean).collect(), mean)
}

/// Assemble design, index maps and base constraints from data.
pub fn build_design(spec: &ModelSpec, data: &DataTable) -> Result<DesignBundle> {
    spec.validate()?;
    let y = data.values(&spec.response)?.to_vec();
    let n = y.len();
    if n == 0 {
        return Err(Error::Data("data table has no rows".into()));
    }
    if y.iter().any(|v| !v.is_finite()) {
        return Err(Error::Data("response has non-finite values".into()));
    }
    spec.family.check_response(&y)?;

    let offset = match (spec.family, &spec.time) {
        (LinkFamily::ExponentialPH, Some(col)) => {
            let t = data.values(col)?;
            if t.iter().any(|v| !(*v > 0.0)) {
                return Err(Error::Schema("exponential PH times must be positive".into()));
            }
            t.iter().map(|v| v.ln()).collect()
        }
        _ => vec![0.0; n],
    };

    // Fixed effects: intercept, covariates, then one linear column per smooth.
    let mut names = vec!["intercept".to_string()];
    let mut x_cols: Vec<Vec<f64>> = vec![vec![1.0; n]];
    for name in &spec.fixed {
        let col = data.column(name).ok_or_else(|| Error::Schema(format!("missing column '{name}'")))?;
        let values = match col.kind {
            ColumnKind::Binary => col.values.clone(),
            ColumnKind::Numeric => centered(&col.values).0,
        };
        names.push(name.clone());
        x_cols.push(values);
    }
    let mut smooth_centers = Vec::new();
    for term in &spec.smooths {
        let (values, mean) = centered(data.values(&term.variable)?);
        names.push(format!("{}.linear", term.name));
        x_cols.push(values);
        smooth_centers.push(mean);
    }
    let p = x_cols.len();

    let mut blocks = Vec::new();
    let mut z_cols: Vec<Vec<f64>> = Vec::new();
    let mut terms = Vec::new();
    let mut penalties = Vec::new();
    let mut base = Vec::new();

    if let Some(term) = &spec.monotone {
        let t = data.values(&term.variable)?;
        let grid = place_knots_with(t, term.knots, term.placement)?;
        let (basis, means) = eval_ispline_basis(&grid, t)?.centered();
        let sign = if term.direction == Direction::Increasing { 1.0 } else { -1.0 };
        let start = p + z_cols.len();
        for j in 0..basis.ncols() {
            z_cols.push(basis.values.column(j).iter().map(|v| sign * v).collect());
            names.push(format!("{}[{}]", term.name, j + 1));
            base.push(start + j);
        }
        let range = start..start + basis.ncols();
        blocks.push(PenalizedBlock { name: term.name.clone(), range: range.clone() });
        terms.push(TermLayout::Monotone {
            name: term.name.clone(),
            variable: term.variable.clone(),
            grid,
            column_means: means,
            sign,
            coefs: range,
            intercept: 0,
        });
    }
    for (k, term) in spec.smooths.iter().enumerate() {
        let x = data.values(&term.variable)?;
        let grid = place_knots_with(x, term.knots, term.placement)?;
        let basis = eval_bspline_basis(&grid, x)?;
        let reparam = spectral_reparam(&basis, &penalty_matrix(&grid))?;
        let start = p + z_cols.len();
        let q = reparam.random.ncols();
        for j in 0..q {
            z_cols.push(reparam.random.values.column(j).iter().copied().collect());
            names.push(format!("{}[{}]", term.name, j + 1));
        }
        let range = start..start + q;
        blocks.push(PenalizedBlock { name: term.name.clone(), range: range.clone() });
        let intercept = if spec.monotone.is_none() && k == 0 { Some(0) } else { None };
        terms.push(TermLayout::Smooth {
            name: term.name.clone(),
            variable: term.variable.clone(),
            grid,
            transform: reparam.decomposition.random_transform(),
            center: smooth_centers[k],
            linear: 1 + spec.fixed.len() + k,
            coefs: range,
            intercept,
        });
        penalties.push(reparam.decomposition);
    }

    let dim = p + z_cols.len();
    let design = DMatrix::from_fn(n, dim, |i, j| if j < p { x_cols[j][i] } else { z_cols[j - p][i] });
    let rows: Vec<f64> = (0..n).flat_map(|i| design.row(i).iter().copied().collect::<Vec<_>>()).collect();

    let mut base_constraints = LinearConstraintSet::nonnegative(dim, base);
    let mut user = LinearConstraintSet::unconstrained(dim);
    for c in &spec.constraints {
        let mut row = vec![0.0; dim];
        for (name, coef) in &c.coefficients {
            let j = names[..p]
                .iter()
                .position(|n| n == name)
                .ok_or_else(|| Error::Schema(format!("constraint names unknown coefficient '{name}'")))?;
            row[j] += coef;
        }
        user.push_row(&row, c.lower, c.upper)?;
    }
    base_constraints = base_constraints.stacked(&user.canonicalize()?)?;

    let beta_mean = spec.priors.beta_mean.clone().unwrap_or_else(|| vec![0.0; p]);
    let beta_cov = spec
        .priors
        .beta_cov
        .clone()
        .unwrap_or_else(|| DMatrix::identity(p, p) * DEFAULT_BETA_VARIANCE);
    let beta_precision = beta_cov
        .cholesky()
        .ok_or_else(|| Error::ContractViolation("prior covariance is not positive definite".into()))?
        .inverse();
    let mut prior_mean = vec![0.0; dim];
    prior_mean[..p].copy_from_slice(&beta_mean);

    let y_vec = DVector::from_column_slice(&y);
    let mut linear_term = design.tr_mul(&y_vec);
    let prior_shift = &beta_precision * DVector::from_column_slice(&beta_mean);
    for j in 0..p {
        linear_term[j] += prior_shift[j];
    }

    Ok(DesignBundle {
        family: spec.family,
        design,
        y,
        offset,
        index: IndexMap { beta: 0..p, blocks, names },
        base_constraints,
        terms,
        penalties,
        beta_precision,
        prior_mean,
        linear_term,
        tau0: spec.priors.tau0,
        rows,
    })
}

/// `A(τ) = Σ⁻¹ ⊕ τ_1 I ⊕ τ_2 I ⊕ …` in design order.
pub fn build_prior_precision(bundle: &DesignBundle, tau: &[f64]) -> Result<DMatrix<f64>> {
    if tau.len() != bundle.index.blocks.len() {
        return Err(Error::ContractViolation(format!(
            "expected {} precision parameters, got {}",
            bundle.index.blocks.len(),
            tau.len()
        )));
    }
    if let Some(t) = tau.iter().find(|t| !(**t >= bundle.tau0)) {
        return Err(Error::ContractViolation(format!("τ = {t} is below the floor τ₀ = {}", bundle.tau0)));
    }
    let d = bundle.dim();
    let p = bundle.index.beta.len();
    let mut a = DMatrix::zeros(d, d);
    a.view_mut((0, 0), (p, p)).copy_from(&bundle.beta_precision);
    for (block, t) in bundle.index.blocks.iter().zip(tau) {
        for j in block.range.clone() {
            a[(j, j)] = *t;
        }
    }
    Ok(a)
}

/// Current state of the slice-sampler Gibbs chain.
#[derive(Debug, Clone, PartialEq)]
pub struct ChainState {
    pub eta: Vec<f64>,
    /// Log slice heights `s_i = -log ω_i`.
    pub log_slice: Vec<f64>,
    /// One precision per penalized block.
    pub tau: Vec<f64>,
}

/// Slice interval for observation `i` at height `s`, shifted by the offset
/// and widened (if rounding demands) to contain the current predictor.
pub(crate) fn slice_row_bounds(bundle: &DesignBundle, i: usize, s: f64, eta: &[f64]) -> Result<(f64, f64)> {
    let (lo, hi) = bundle.family.slice_bound(s)?;
    let current = dot(bundle.row(i), eta);
    let lo = (lo - bundle.offset[i]).min(current);
    let hi = (hi - bundle.offset[i]).max(current);
    Ok((lo, hi))
}

/// Per-observation slice rows `lo_i ≤ m_iᵀη ≤ hi_i` stacked on top of the
/// base constraints. Two-sided families use both bounds of the same row.
pub fn slice_constraints(state: &ChainState, bundle: &DesignBundle) -> Result<LinearConstraintSet> {
    let mut set = slice_template(bundle)?;
    update_slice_bounds(&mut set, state, bundle)?;
    Ok(set)
}

pub(crate) fn slice_template(bundle: &DesignBundle) -> Result<LinearConstraintSet> {
    let mut rows = LinearConstraintSet::unconstrained(bundle.dim());
    for i in 0..bundle.n_obs() {
        rows.push_row(bundle.row(i), f64::NEG_INFINITY, f64::INFINITY)?;
    }
    rows.stacked(&bundle.base_constraints)
}

pub(crate) fn update_slice_bounds(set: &mut LinearConstraintSet, state: &ChainState, bundle: &DesignBundle) -> Result<()> {
    for i in 0..bundle.n_obs() {
        let (lo, hi) = slice_row_bounds(bundle, i, state.log_slice[i], &state.eta)?;
        set.set_bounds(i, lo, hi);
    }
    Ok(())
}

/// `s_i = ξ(m_iᵀη + offset_i) + E_i`, `E_i ~ Exp(1)`; equivalent to
/// `ω_i ~ U(0, e^{-ξ})` on the log scale.
pub fn draw_log_slices<R: Rng + ?Sized>(bundle: &DesignBundle, eta: &[f64], out: &mut [f64], rng: &mut R) {
    for (i, s) in out.iter_mut().enumerate() {
        let e: f64 = Exp1.sample(rng);
        *s = bundle.family.xi(bundle.linear_predictor(i, eta)) + e;
    }
}

/// Starting state: `β = μ` (or the user's start), `u_α = 0.01`, `u_B = 0`,
/// `τ = max(1, τ₀)`, and slice heights drawn at that point.
pub fn init_state<R: Rng + ?Sized>(bundle: &DesignBundle, spec: &ModelSpec, rng: &mut R) -> Result<ChainState> {
    let d = bundle.dim();
    let p = bundle.index.beta.len();
    let mut eta = bundle.prior_mean.clone();
    if let Some(b) = &spec.sampler.init_beta {
        if b.len() != p {
            return Err(Error::ContractViolation(format!("initial β must have {p} entries")));
        }
        eta[..p].copy_from_slice(b);
    }
    for term in &bundle.terms {
        if let TermLayout::Monotone { coefs, .. } = term {
            for j in coefs.clone() {
                eta[j] = 0.01;
            }
        }
    }
    debug_assert_eq!(eta.len(), d);
    let violated = bundle.base_constraints.violations(&eta);
    if !violated.is_empty() {
        if spec.sampler.repair_init {
            eta = bundle.base_constraints.project_feasible(&eta, 1e-6)?;
        } else {
            return Err(Error::InfeasibleStart { rows: violated });
        }
    }
    let tau_start = spec.sampler.init_tau.unwrap_or(1.0f64.max(bundle.tau0));
    let tau = vec![tau_start; bundle.index.blocks.len()];
    let mut log_slice = vec![0.0; bundle.n_obs()];
    draw_log_slices(bundle, &eta, &mut log_slice, rng);
    Ok(ChainState { eta, log_slice, tau })
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    fn poisson_table(n: usize) -> DataTable {
        let t: Vec<f64> = (0..n).map(|i| 20.0 * (i as f64 + 0.5) / n as f64).collect();
        let y: Vec<f64> = t.iter().map(|v| (v / 4.0).floor()).collect();
        DataTable::new().with_column("t", t).unwrap().with_column("y", y).unwrap()
    }

    #[test]
    fn glm_only_design_is_x() {
        let data = poisson_table(30).with_column("x", (0..30).map(|i| i as f64 * 0.1).collect()).unwrap();
        let spec = ModelSpec::new(LinkFamily::Poisson, "y").with_fixed("x");
        let b = build_design(&spec, &data).unwrap();
        assert_eq!(b.dim(), 2);
        assert!(b.index.blocks.is_empty());
        assert!(b.design.column(0).iter().all(|v| *v == 1.0));
        assert!(b.design.column(1).sum().abs() < 1e-12);
    }

    #[test]
    fn monotone_term_has_m_plus_two_columns() {
        let spec = ModelSpec::new(LinkFamily::Poisson, "y").with_monotone(MonotoneTerm::new("alpha", "t", 5));
        let b = build_design(&spec, &poisson_table(60)).unwrap();
        assert_eq!(b.index.blocks[0].range, 1..8);
        assert_eq!(b.base_constraints.n_rows(), 7);
    }

    #[test]
    fn missing_column_and_bad_response() {
        let spec = ModelSpec::new(LinkFamily::Poisson, "y").with_fixed("nope");
        assert!(matches!(build_design(&spec, &poisson_table(10)), Err(Error::Schema(_))));
        let spec = ModelSpec::new(LinkFamily::Logistic, "y");
        assert!(matches!(build_design(&spec, &poisson_table(40)), Err(Error::Schema(_))));
        let spec = ModelSpec::new(LinkFamily::Poisson, "t");
        assert!(matches!(build_design(&spec, &poisson_table(40)), Err(Error::Schema(_))));
    }

    #[test]
    fn prior_precision_examples() {
        let data = poisson_table(40).with_column("x", (0..40).map(|i| (i % 7) as f64).collect()).unwrap();
        let mut spec = ModelSpec::new(LinkFamily::Poisson, "y")
            .with_fixed("x")
            .with_monotone(MonotoneTerm::new("alpha", "t", 1));
        spec.priors.beta_cov = Some(DMatrix::from_diagonal_element(2, 2, 100.0));
        let b = build_design(&spec, &data).unwrap();
        let a = build_prior_precision(&b, &[3.0]).unwrap();
        let expected = DMatrix::from_diagonal(&DVector::from_vec(vec![0.01, 0.01, 3.0, 3.0, 3.0]));
        assert!((a - expected).amax() < 1e-15);
        assert!(matches!(build_prior_precision(&b, &[1e-4]), Err(Error::ContractViolation(_))));
    }

    #[test]
    fn unit_prior_gives_identity() {
        let mut spec = ModelSpec::new(LinkFamily::Poisson, "y").with_smooth(SmoothTerm::new("s", "t", 3));
        spec.priors.beta_cov = Some(DMatrix::identity(2, 2));
        let b = build_design(&spec, &poisson_table(40)).unwrap();
        let a = build_prior_precision(&b, &[1.0]).unwrap();
        assert!((a - DMatrix::identity(b.dim(), b.dim())).amax() < 1e-12);
    }

    #[test]
    fn logistic_slice_at_half() {
        let (lo, hi) = LinkFamily::Logistic.slice_bound(2f64.ln()).unwrap();
        assert_eq!(lo, f64::NEG_INFINITY);
        assert!(hi.abs() < 1e-15);
    }

    #[test]
    fn poisson_slice_at_inverse_e() {
        let (_, hi) = LinkFamily::Poisson.slice_bound(1.0).unwrap();
        assert_eq!(hi, 0.0);
    }

    #[test]
    fn gaussian_slice_is_two_sided() {
        let (lo, hi) = LinkFamily::Gaussian.slice_bound(2.0).unwrap();
        assert_eq!((lo, hi), (-2.0, 2.0));
        assert_eq!(LinkFamily::Gaussian.xi(hi), 2.0);
        assert_eq!(LinkFamily::Gaussian.xi(lo), 2.0);
    }

    #[test]
    fn slice_endpoints_hit_the_height() {
        for s in [1e-8, 0.01, 0.7, 3.0, 40.0, 700.0] {
            let (_, hi) = LinkFamily::Logistic.slice_bound(s).unwrap();
            assert!((LinkFamily::Logistic.xi(hi) - s).abs() <= 1e-10 * s.max(1.0));
            let (_, hi) = LinkFamily::Poisson.slice_bound(s).unwrap();
            assert!((LinkFamily::Poisson.xi(hi) - s).abs() <= 1e-10 * s.max(1.0));
        }
        assert!(LinkFamily::Logistic.slice_bound(0.0).is_err());
        assert!(LinkFamily::Poisson.slice_bound(-1.0).is_err());
    }

    #[test]
    fn user_constraint_conflicting_with_start() {
        let spec = ModelSpec::new(LinkFamily::Poisson, "y").with_constraint(BetaConstraint {
            coefficients: vec![("intercept".into(), 1.0)],
            lower: 5.0,
            upper: f64::INFINITY,
        });
        let b = build_design(&spec, &poisson_table(20)).unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(0);
        match init_state(&b, &spec, &mut rng) {
            Err(Error::InfeasibleStart { rows }) => assert_eq!(rows, vec![0]),
            other => panic!("unexpected {other:?}"),
        }
        let mut spec = spec;
        spec.sampler.repair_init = true;
        let st = init_state(&b, &spec, &mut rng).unwrap();
        assert!(st.eta[0] >= 5.0);
    }

    #[test]
    fn unknown_constraint_coefficient() {
        let spec = ModelSpec::new(LinkFamily::Poisson, "y").with_constraint(BetaConstraint {
            coefficients: vec![("zeta".into(), 1.0)],
            lower: 0.0,
            upper: 1.0,
        });
        assert!(matches!(build_design(&spec, &poisson_table(20)), Err(Error::Schema(_))));
    }

    #[test]
    fn exponential_ph_offsets_are_log_times() {
        let data = DataTable::new()
            .with_column("time", vec![0.5, 1.0, 2.0, 4.0])
            .unwrap()
            .with_column("event", vec![1.0, 0.0, 1.0, 1.0])
            .unwrap();
        let spec = ModelSpec::new(LinkFamily::ExponentialPH, "event").with_time("time");
        let b = build_design(&spec, &data).unwrap();
        assert_eq!(b.offset, vec![0.5f64.ln(), 0.0, 2f64.ln(), 4f64.ln()]);
        let spec = ModelSpec::new(LinkFamily::ExponentialPH, "event");
        assert!(build_design(&spec, &data).is_err());
    }

    #[test]
    fn validation_rejects_bad_priors() {
        let mut spec = ModelSpec::new(LinkFamily::Poisson, "y");
        spec.priors.tau0 = 0.0;
        assert!(spec.validate().is_err());
        let mut spec = ModelSpec::new(LinkFamily::Poisson, "y");
        spec.priors.a0 = -1.0;
        assert!(spec.validate().is_err());
        let mut spec = ModelSpec::new(LinkFamily::Poisson, "y");
        spec.priors.beta_cov = Some(DMatrix::from_row_slice(1, 1, &[-1.0]));
        assert!(spec.validate().is_err());
    }
}
