//! Three-block slice-sampler Gibbs iteration and chain drivers.
//!
//! One iteration updates, in order: `η | s, τ` (truncated normal under the
//! slice and base constraints), the log slice heights `s | η`, and each
//! `τ_j | η` (truncated gamma).

use std::time::{Duration, Instant};

use nalgebra::{DMatrix, DVector};
use rand::Rng;
use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::model::{
    build_prior_precision, draw_log_slices, init_state, slice_template, update_slice_bounds, ChainState,
    DesignBundle, DirectionMetric, IndexMap, LinkFamily, ModelSpec, TermLayout,
};
use crate::rng::chain_rng;
use crate::truncated::{sample_trunc_gamma, LinearConstraintSet, TruncGammaParams, TruncatedNormal};

/// Reproducibility metadata stored with each chain.
#[derive(Debug, Clone, PartialEq)]
pub struct DrawMeta {
    pub family: LinkFamily,
    pub iterations: usize,
    pub burn_in: usize,
    pub thin: usize,
    pub seed: u64,
    pub chain: u64,
    /// Kept in memory only; never written to artifacts.
    pub wall_time: Duration,
}

/// Retained draws of one chain.
#[derive(Debug, Clone)]
pub struct PosteriorDraws {
    /// `R × dim`, one stored `η` per row.
    pub eta: DMatrix<f64>,
    /// `R × n_blocks`, one stored `τ` per row.
    pub tau: DMatrix<f64>,
    pub index: IndexMap,
    pub terms: Vec<TermLayout>,
    pub tau0: f64,
    pub meta: DrawMeta,
}

impl PosteriorDraws {
    pub fn n_draws(&self) -> usize {
        self.eta.nrows()
    }

    pub fn dim(&self) -> usize {
        self.eta.ncols()
    }

    pub fn term(&self, name: &str) -> Option<&TermLayout> {
        self.terms.iter().find(|t| t.name() == name)
    }

    /// Draws of the coefficient called `name`.
    pub fn coefficient(&self, name: &str) -> Option<Vec<f64>> {
        self.index.position(name).map(|j| self.eta.column(j).iter().copied().collect())
    }

    /// Stack several chains (same model) into one set of draws.
    pub fn pooled(chains: &[PosteriorDraws]) -> Result<PosteriorDraws> {
        let first = chains.first().ok_or(Error::InsufficientDraws { needed: 1, got: 0 })?;
        if chains.iter().any(|c| c.index != first.index) {
            return Err(Error::ContractViolation("chains come from different models".into()));
        }
        let rows: usize = chains.iter().map(|c| c.n_draws()).sum();
        let mut eta = DMatrix::zeros(rows, first.dim());
        let mut tau = DMatrix::zeros(rows, first.tau.ncols());
        let mut at = 0;
        for c in chains {
            eta.rows_mut(at, c.n_draws()).copy_from(&c.eta);
            tau.rows_mut(at, c.n_draws()).copy_from(&c.tau);
            at += c.n_draws();
        }
        let mut meta = first.meta.clone();
        meta.wall_time = chains.iter().map(|c| c.meta.wall_time).sum();
        Ok(PosteriorDraws { eta, tau, index: first.index.clone(), terms: first.terms.clone(), tau0: first.tau0, meta })
    }
}

/// Per-observation Fisher weights at a pilot fit read off the response.
fn pilot_weights(bundle: &DesignBundle) -> Vec<f64> {
    match bundle.family {
        LinkFamily::Gaussian => vec![1.0; bundle.n_obs()],
        LinkFamily::Poisson | LinkFamily::ExponentialPH => bundle.y.iter().map(|y| y.max(0.5)).collect(),
        LinkFamily::Logistic => {
            let mean = bundle.y.iter().sum::<f64>() / bundle.n_obs() as f64;
            let p = mean.clamp(0.05, 0.95);
            vec![p * (1.0 - p); bundle.n_obs()]
        }
    }
}

/// Reusable state for repeated Gibbs steps on one bundle.
pub struct GibbsKernel<'a> {
    bundle: &'a DesignBundle,
    a0: f64,
    b0: f64,
    sweeps: usize,
    update_tau: bool,
    cons: LinearConstraintSet,
    /// `Mᵀ W M`, added to `A(τ)` to orient the move directions.
    information: Option<DMatrix<f64>>,
}

impl<'a> GibbsKernel<'a> {
    pub fn new(bundle: &'a DesignBundle, spec: &ModelSpec) -> Result<Self> {
        let information = match spec.sampler.metric {
            DirectionMetric::Prior => None,
            DirectionMetric::DataInformed => {
                let w = pilot_weights(bundle);
                let mut wm = bundle.design.clone();
                for (i, wi) in w.iter().enumerate() {
                    wm.row_mut(i).scale_mut(*wi);
                }
                Some(bundle.design.tr_mul(&wm))
            }
        };
        Ok(Self {
            bundle,
            a0: spec.priors.a0,
            b0: spec.priors.b0,
            sweeps: spec.sampler.tn_sweeps,
            update_tau: spec.sampler.update_tau,
            cons: slice_template(bundle)?,
            information,
        })
    }

    /// Constraint rows of the current `η` block: slices first, then base rows.
    pub fn constraints(&self) -> &LinearConstraintSet {
        &self.cons
    }

    pub fn step<R: Rng + ?Sized>(&mut self, state: &mut ChainState, rng: &mut R) -> Result<()> {
        let bundle = self.bundle;
        // η | s, τ
        update_slice_bounds(&mut self.cons, state, bundle)?;
        let precision = build_prior_precision(bundle, &state.tau)?;
        let linear: DVector<f64> = bundle.linear_term.clone();
        let tn = match &self.information {
            None => TruncatedNormal::from_canonical(precision, linear, &self.cons)?,
            Some(info) => {
                let metric = &precision + info;
                TruncatedNormal::with_metric(precision, linear, &self.cons, &metric)?
            }
        };
        state.eta = tn.sample(&self.cons, &state.eta, self.sweeps, rng)?;

        // s | η
        draw_log_slices(bundle, &state.eta, &mut state.log_slice, rng);

        // τ | η
        if self.update_tau {
            for (block, tau) in bundle.index.blocks.iter().zip(state.tau.iter_mut()) {
                let u = &state.eta[block.range.clone()];
                let ss: f64 = u.iter().map(|v| v * v).sum();
                let p = TruncGammaParams::new(self.a0 + u.len() as f64 / 2.0, self.b0 + ss / 2.0, bundle.tau0)?;
                *tau = sample_trunc_gamma(&p, rng)?;
            }
        }
        Ok(())
    }
}

/// One Gibbs iteration from `state`.
pub fn gibbs_step<R: Rng + ?Sized>(
    state: &ChainState,
    bundle: &DesignBundle,
    spec: &ModelSpec,
    rng: &mut R,
) -> Result<ChainState> {
    let mut next = state.clone();
    GibbsKernel::new(bundle, spec)?.step(&mut next, rng)?;
    Ok(next)
}

/// Run one chain; iteration `it` is kept when `it ≥ burn_in` and
/// `(it − burn_in)` is a multiple of `thin`.
pub fn run_chain<R: Rng + ?Sized>(spec: &ModelSpec, bundle: &DesignBundle, rng: &mut R) -> Result<PosteriorDraws> {
    run_chain_labeled(spec, bundle, rng, spec.sampler.seed, 0)
}

fn run_chain_labeled<R: Rng + ?Sized>(
    spec: &ModelSpec,
    bundle: &DesignBundle,
    rng: &mut R,
    seed: u64,
    chain: u64,
) -> Result<PosteriorDraws> {
    spec.validate()?;
    let start = Instant::now();
    let s = &spec.sampler;
    let kept = s.kept();
    let d = bundle.dim();
    let n_tau = bundle.index.blocks.len();
    let mut eta = DMatrix::zeros(kept, d);
    let mut tau = DMatrix::zeros(kept, n_tau);
    let mut state = init_state(bundle, spec, rng)?;
    let mut kernel = GibbsKernel::new(bundle, spec)?;
    let mut row = 0;
    for it in 0..s.iterations {
        kernel.step(&mut state, rng)?;
        if it >= s.burn_in && (it - s.burn_in) % s.thin == 0 {
            if !bundle.base_constraints.is_satisfied(&state.eta) {
                return Err(Error::EngineBug(format!("stored draw {row} violates the base constraints")));
            }
            if state.tau.iter().any(|t| !(*t >= bundle.tau0)) {
                return Err(Error::EngineBug(format!("stored draw {row} has τ below τ₀")));
            }
            eta.row_mut(row).copy_from_slice(&state.eta);
            tau.row_mut(row).copy_from_slice(&state.tau);
            row += 1;
        }
    }
    debug_assert_eq!(row, kept);
    Ok(PosteriorDraws {
        eta,
        tau,
        index: bundle.index.clone(),
        terms: bundle.terms.clone(),
        tau0: bundle.tau0,
        meta: DrawMeta {
            family: bundle.family,
            iterations: s.iterations,
            burn_in: s.burn_in,
            thin: s.thin,
            seed,
            chain,
            wall_time: start.elapsed(),
        },
    })
}

/// One chain on stream `chain` of `seed`.
pub fn run_seeded_chain(spec: &ModelSpec, bundle: &DesignBundle, seed: u64, chain: u64) -> Result<PosteriorDraws> {
    let mut rng = chain_rng(seed, chain);
    run_chain_labeled(spec, bundle, &mut rng, seed, chain)
}

/// `n_chains` chains in parallel; chain `c` uses stream `c` of `seed`.
pub fn run_parallel_chains(
    spec: &ModelSpec,
    bundle: &DesignBundle,
    n_chains: usize,
    seed: u64,
) -> Result<Vec<PosteriorDraws>> {
    if n_chains == 0 {
        return Err(Error::ContractViolation("need at least one chain".into()));
    }
    (0..n_chains as u64)
        .into_par_iter()
        .map(|c| run_seeded_chain(spec, bundle, seed, c))
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::data::DataTable;
    use crate::model::{build_design, MonotoneTerm, SamplerSettings};

    fn small_poisson() -> (ModelSpec, DesignBundle) {
        let t: Vec<f64> = (0..40).map(|i| i as f64 * 0.5).collect();
        let y: Vec<f64> = t.iter().map(|v| (1.0 + v / 5.0).round()).collect();
        let data = DataTable::new().with_column("t", t).unwrap().with_column("y", y).unwrap();
        let spec = ModelSpec::new(LinkFamily::Poisson, "y")
            .with_monotone(MonotoneTerm::new("alpha", "t", 3))
            .with_sampler(SamplerSettings { iterations: 100, burn_in: 50, thin: 5, seed: 3, ..Default::default() });
        let bundle = build_design(&spec, &data).unwrap();
        (spec, bundle)
    }

    #[test]
    fn thinning_keeps_ten() {
        let (spec, bundle) = small_poisson();
        let d = run_seeded_chain(&spec, &bundle, 3, 0).unwrap();
        assert_eq!(d.n_draws(), 10);
        assert_eq!(d.tau.ncols(), 1);
    }

    #[test]
    fn same_seed_same_draws() {
        let (spec, bundle) = small_poisson();
        let a = run_seeded_chain(&spec, &bundle, 11, 0).unwrap();
        let b = run_seeded_chain(&spec, &bundle, 11, 0).unwrap();
        assert_eq!(a.eta, b.eta);
        assert_eq!(a.tau, b.tau);
    }

    #[test]
    fn single_parallel_chain_matches_sequential() {
        let (spec, bundle) = small_poisson();
        let par = run_parallel_chains(&spec, &bundle, 1, 5).unwrap();
        let seq = run_seeded_chain(&spec, &bundle, 5, 0).unwrap();
        assert_eq!(par[0].eta, seq.eta);
    }

    #[test]
    fn step_keeps_slices_valid() {
        let (spec, bundle) = small_poisson();
        let mut rng = chain_rng(1, 0);
        let mut state = init_state(&bundle, &spec, &mut rng).unwrap();
        let mut kernel = GibbsKernel::new(&bundle, &spec).unwrap();
        for _ in 0..50 {
            kernel.step(&mut state, &mut rng).unwrap();
            for i in 0..bundle.n_obs() {
                assert!(bundle.family.xi(bundle.linear_predictor(i, &state.eta)) <= state.log_slice[i]);
            }
            assert!(bundle.base_constraints.is_satisfied(&state.eta));
            assert!(state.tau[0] >= bundle.tau0);
        }
    }
}
