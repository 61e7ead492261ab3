//! Posterior summaries: batch-means standard errors, joint credible bands,
//! SimBaS scores and global Bayesian p-values.
//!
//! Standardized deviations use the convention `0/0 = 0`. Every quantile is
//! an inverse-ECDF (type 1) order statistic.

use nalgebra::DMatrix;

use crate::error::{Error, Result};
use crate::gibbs::PosteriorDraws;
use crate::splinebasis::linspace;

pub const DEFAULT_GRID_POINTS: usize = 201;
pub const MIN_MCSE_DRAWS: usize = 100;

/// `R × G` draws of a function on a grid, with column mean and SD.
#[derive(Debug, Clone, PartialEq)]
pub struct FunctionDraws {
    pub term: String,
    pub grid: Vec<f64>,
    pub draws: DMatrix<f64>,
    pub mean: Vec<f64>,
    pub sd: Vec<f64>,
}

impl FunctionDraws {
    /// Wrap a draw matrix, computing column means and SDs (`R − 1` divisor).
    pub fn new(term: impl Into<String>, grid: Vec<f64>, draws: DMatrix<f64>) -> Result<Self> {
        if draws.ncols() != grid.len() {
            return Err(Error::ContractViolation("draw columns must match the grid".into()));
        }
        let (mean, sd) = (0..draws.ncols()).map(|g| mean_sd(draws.column(g).as_slice())).unzip();
        Ok(Self { term: term.into(), grid, draws, mean, sd })
    }

    pub fn n_draws(&self) -> usize {
        self.draws.nrows()
    }

    fn require_draws(&self, needed: usize) -> Result<()> {
        if self.n_draws() < needed {
            return Err(Error::InsufficientDraws { needed, got: self.n_draws() });
        }
        Ok(())
    }

    /// `Z⁽ʳ⁾ = max_t |(f⁽ʳ⁾(t) − f̂(t)) / SD(t)|`.
    pub fn max_deviations(&self) -> Vec<f64> {
        (0..self.n_draws())
            .map(|r| {
                (0..self.grid.len())
                    .map(|g| standardize(self.draws[(r, g)] - self.mean[g], self.sd[g]))
                    .fold(0.0f64, f64::max)
            })
            .collect()
    }
}

/// `|num| / sd` with `0/0 = 0`.
fn standardize(num: f64, sd: f64) -> f64 {
    if num == 0.0 {
        0.0
    } else {
        num.abs() / sd
    }
}

/// Sample mean and SD (`n − 1` divisor). A constant sample returns its
/// value and exactly zero.
pub fn mean_sd(x: &[f64]) -> (f64, f64) {
    let n = x.len();
    if n == 0 {
        return (f64::NAN, f64::NAN);
    }
    if x.iter().all(|v| *v == x[0]) {
        return (x[0], 0.0);
    }
    let mean = x.iter().sum::<f64>() / n as f64;
    if n == 1 {
        return (mean, 0.0);
    }
    let ss: f64 = x.iter().map(|v| (v - mean) * (v - mean)).sum();
    (mean, (ss / (n - 1) as f64).sqrt())
}

/// Inverse-ECDF quantile: the `⌈n p⌉`-th smallest value (the smallest for `p = 0`).
pub fn quantile_type1(sorted: &[f64], p: f64) -> f64 {
    let n = sorted.len();
    let rank = ceil_count(n as f64 * p).clamp(1, n);
    sorted[rank - 1]
}

/// `⌈x⌉` for a count product such as `n·p`, snapping values within rounding
/// error of an integer so that e.g. `200 · (1 − 0.95)/2` gives 5, not 6.
fn ceil_count(x: f64) -> usize {
    let r = x.round();
    if (x - r).abs() <= 1e-9 * x.abs().max(1.0) {
        r as usize
    } else {
        x.ceil() as usize
    }
}

fn sorted_copy(x: &[f64]) -> Vec<f64> {
    let mut s = x.to_vec();
    s.sort_by(f64::total_cmp);
    s
}

/// Default evaluation grid over the term's knot range.
pub fn default_grid(draws: &PosteriorDraws, term: &str, points: usize) -> Result<Vec<f64>> {
    let layout = draws.term(term).ok_or_else(|| Error::Usage(format!("unknown term '{term}'")))?;
    if points < 2 {
        return Err(Error::Usage("grid needs at least two points".into()));
    }
    Ok(linspace(layout.grid().lower(), layout.grid().upper(), points))
}

/// Evaluate a term at `grid` for every stored draw. Monotone terms, and the
/// smooth term that carries the intercept, include `β₀`.
pub fn function_draws(draws: &PosteriorDraws, term: &str, grid: &[f64]) -> Result<FunctionDraws> {
    let layout = draws.term(term).ok_or_else(|| Error::Usage(format!("unknown term '{term}'")))?;
    let e = layout.evaluation_matrix(grid, draws.dim())?;
    // Plain dot products in a fixed order: rounding is then monotone in each
    // basis value, so nonnegative monotone coefficients give exactly
    // monotone rows.
    let values = DMatrix::from_fn(draws.n_draws(), grid.len(), |r, g| {
        (0..draws.dim()).fold(0.0, |acc, c| acc + draws.eta[(r, c)] * e[(g, c)])
    });
    FunctionDraws::new(term, grid.to_vec(), values)
}

/// Joint band, SimBaS scores and GBPV at level `u`.
#[derive(Debug, Clone, PartialEq)]
pub struct BandResult {
    pub level: f64,
    /// Critical value `q` multiplying `SD(t)`.
    pub critical: f64,
    pub lower: Vec<f64>,
    pub upper: Vec<f64>,
    pub simbas: Vec<f64>,
    pub gbpv: f64,
    pub z_draws: Vec<f64>,
}

/// Order-statistic rank of the band critical value: `R − m` where `m` is
/// the largest count with `m / R < u`. With this choice the band excludes
/// zero at `t` exactly when `P_SimBaS(t) < u`.
fn band_rank(r: usize, u: f64) -> usize {
    let m = ceil_count(u * r as f64).saturating_sub(1).min(r - 1);
    r - m
}

fn check_level(u: f64) -> Result<()> {
    if !(u > 0.0 && u < 1.0) {
        return Err(Error::Usage(format!("band level must lie in (0, 1), got {u}")));
    }
    Ok(())
}

/// `mean ± q·SD` with `q` the `(1 − u)` quantile of the max deviations.
pub fn joint_band(fd: &FunctionDraws, u: f64) -> Result<BandResult> {
    check_level(u)?;
    fd.require_draws(2)?;
    let z = fd.max_deviations();
    let sorted = sorted_copy(&z);
    let q = sorted[band_rank(z.len(), u) - 1];
    let lower = fd.mean.iter().zip(&fd.sd).map(|(m, s)| m - q * s).collect();
    let upper = fd.mean.iter().zip(&fd.sd).map(|(m, s)| m + q * s).collect();
    let scores = simbas_with(fd, &z);
    let gbpv = gbpv(&scores, u)?.gbpv;
    Ok(BandResult { level: u, critical: q, lower, upper, simbas: scores, gbpv, z_draws: z })
}

fn simbas_with(fd: &FunctionDraws, z: &[f64]) -> Vec<f64> {
    let r = z.len() as f64;
    fd.mean
        .iter()
        .zip(&fd.sd)
        .map(|(m, s)| {
            let stat = standardize(*m, *s);
            z.iter().filter(|zr| stat <= **zr).count() as f64 / r
        })
        .collect()
}

/// `P(t) = (1/R) Σ_r 1{|f̂(t)/SD(t)| ≤ Z⁽ʳ⁾}`.
pub fn simbas(fd: &FunctionDraws) -> Result<Vec<f64>> {
    fd.require_draws(2)?;
    Ok(simbas_with(fd, &fd.max_deviations()))
}

#[derive(Debug, Clone, PartialEq)]
pub struct Gbpv {
    pub gbpv: f64,
    /// Grid indices with `P(t) < u`.
    pub flagged: Vec<usize>,
}

/// `min_t P(t)` and the locations flagged at level `u`.
pub fn gbpv(simbas: &[f64], u: f64) -> Result<Gbpv> {
    if simbas.is_empty() {
        return Err(Error::InsufficientDraws { needed: 1, got: 0 });
    }
    let min = simbas.iter().copied().fold(f64::INFINITY, f64::min);
    let flagged = simbas.iter().enumerate().filter(|(_, p)| **p < u).map(|(i, _)| i).collect();
    Ok(Gbpv { gbpv: min, flagged })
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Mcse {
    pub mcse: f64,
    pub ess: f64,
}

/// Nonoverlapping batch means with batch size `⌊√R⌋`. Trailing draws that
/// do not fill a batch are dropped.
pub fn batch_means_mcse(x: &[f64]) -> Result<Mcse> {
    let r = x.len();
    if r < MIN_MCSE_DRAWS {
        return Err(Error::InsufficientDraws { needed: MIN_MCSE_DRAWS, got: r });
    }
    let b = (r as f64).sqrt().floor() as usize;
    let a = r / b;
    let means: Vec<f64> = (0..a).map(|k| x[k * b..(k + 1) * b].iter().sum::<f64>() / b as f64).collect();
    let (_, sd_bm) = mean_sd(&means);
    let (_, sd) = mean_sd(x);
    let mcse = sd_bm / (a as f64).sqrt();
    let ess = if sd_bm == 0.0 { r as f64 } else { r as f64 * sd * sd / (b as f64 * sd_bm * sd_bm) };
    Ok(Mcse { mcse, ess })
}

#[derive(Debug, Clone, PartialEq)]
pub struct ParamSummary {
    pub name: String,
    pub mean: f64,
    pub sd: f64,
    pub median: f64,
    pub lower: f64,
    pub upper: f64,
    /// `NaN` when fewer than [`MIN_MCSE_DRAWS`] draws are available.
    pub mcse: f64,
    pub ess: f64,
}

/// Summary of one sample with an equal-tailed interval at `level`.
pub fn summarize_values(name: impl Into<String>, x: &[f64], level: f64) -> Result<ParamSummary> {
    if x.is_empty() {
        return Err(Error::InsufficientDraws { needed: 1, got: 0 });
    }
    if !(level > 0.0 && level < 1.0) {
        return Err(Error::Usage(format!("credible level must lie in (0, 1), got {level}")));
    }
    let (mean, sd) = mean_sd(x);
    let sorted = sorted_copy(x);
    let tail = (1.0 - level) / 2.0;
    let m = batch_means_mcse(x).unwrap_or(Mcse { mcse: f64::NAN, ess: f64::NAN });
    Ok(ParamSummary {
        name: name.into(),
        mean,
        sd,
        median: quantile_type1(&sorted, 0.5),
        lower: quantile_type1(&sorted, tail),
        upper: quantile_type1(&sorted, 1.0 - tail),
        mcse: m.mcse,
        ess: m.ess,
    })
}

/// One row per coefficient of `η`, then one per `τ` block (`tau.<term>`).
pub fn summarize(draws: &PosteriorDraws, level: f64) -> Result<Vec<ParamSummary>> {
    let mut out = Vec::with_capacity(draws.dim() + draws.tau.ncols());
    for (j, name) in draws.index.names.iter().enumerate() {
        out.push(summarize_values(name.clone(), draws.eta.column(j).as_slice(), level)?);
    }
    for (j, block) in draws.index.blocks.iter().enumerate() {
        out.push(summarize_values(format!("tau.{}", block.name), draws.tau.column(j).as_slice(), level)?);
    }
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn fd(rows: &[&[f64]]) -> FunctionDraws {
        let g = rows[0].len();
        let m = DMatrix::from_fn(rows.len(), g, |r, c| rows[r][c]);
        FunctionDraws::new("f", (0..g).map(|i| i as f64).collect(), m).unwrap()
    }

    #[test]
    fn identical_draws_collapse_the_band() {
        let f = fd(&[&[0.3, 0.1], &[0.3, 0.1], &[0.3, 0.1]]);
        let b = joint_band(&f, 0.05).unwrap();
        assert!(b.z_draws.iter().all(|z| *z == 0.0));
        assert_eq!(b.lower, f.mean);
        assert_eq!(b.upper, f.mean);
    }

    #[test]
    fn zero_mean_gives_unit_simbas() {
        let f = fd(&[&[1.0, -2.0], &[-1.0, 2.0]]);
        assert_eq!(simbas(&f).unwrap(), vec![1.0, 1.0]);
    }

    #[test]
    fn gbpv_definition() {
        let g = gbpv(&[0.8, 0.03, 0.5], 0.05).unwrap();
        assert_eq!(g.gbpv, 0.03);
        assert_eq!(g.flagged, vec![1]);
        assert_eq!(gbpv(&[0.4; 5], 0.05).unwrap().gbpv, 0.4);
    }

    #[test]
    fn band_rank_matches_count_rule() {
        // R = 100, u = 0.05: m = 4, so the 96th smallest.
        assert_eq!(band_rank(100, 0.05), 96);
        assert_eq!(band_rank(4, 0.5), 3);
        assert_eq!(band_rank(4, 0.01), 4);
        assert_eq!(band_rank(10, 0.999), 1);
    }

    #[test]
    fn constant_chain_has_zero_mcse() {
        let m = batch_means_mcse(&[2.5; 400]).unwrap();
        assert_eq!(m.mcse, 0.0);
        assert_eq!(m.ess, 400.0);
        assert!(matches!(batch_means_mcse(&[1.0; 99]), Err(Error::InsufficientDraws { .. })));
    }

    #[test]
    fn degenerate_summary() {
        let s = summarize_values("b", &[1.5; 10], 0.95).unwrap();
        assert_eq!((s.lower, s.upper, s.mean, s.sd), (1.5, 1.5, 1.5, 0.0));
        assert!(s.mcse.is_nan());
    }

    #[test]
    fn type1_quantile_ranks() {
        let x = [1.0, 2.0, 3.0, 4.0];
        assert_eq!(quantile_type1(&x, 0.0), 1.0);
        assert_eq!(quantile_type1(&x, 0.25), 1.0);
        assert_eq!(quantile_type1(&x, 0.26), 2.0);
        assert_eq!(quantile_type1(&x, 1.0), 4.0);
    }
}
