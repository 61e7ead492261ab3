//! Several independent chains from one seed, pooled for summaries, with
//! per-chain and pooled Monte Carlo standard errors.

use slicegam::gibbs::{run_parallel_chains, PosteriorDraws};
use slicegam::inference::{batch_means_mcse, summarize_values};
use slicegam::model::{build_design, LinkFamily, ModelSpec, MonotoneTerm, SamplerSettings};
use slicegam::simulate::{simulate, Scenario};

fn main() -> slicegam::Result<()> {
    let data = simulate(Scenario::Monotone, 200, 2)?;
    let spec = ModelSpec::new(LinkFamily::Poisson, "y")
        .with_monotone(MonotoneTerm::new("alpha", "t", 5))
        .with_sampler(SamplerSettings { seed: 99, ..SamplerSettings::with_iterations(10_000) });
    let bundle = build_design(&spec, &data)?;
    let chains = run_parallel_chains(&spec, &bundle, 4, 99)?;

    println!("{:<7} {:>9} {:>9} {:>7}", "chain", "mean", "MCSE", "ESS");
    for (c, d) in chains.iter().enumerate() {
        let x = d.coefficient("intercept").expect("intercept present");
        let m = batch_means_mcse(&x)?;
        println!("{c:<7} {:>9.4} {:>9.4} {:>7.0}", x.iter().sum::<f64>() / x.len() as f64, m.mcse, m.ess);
    }
    let pooled = PosteriorDraws::pooled(&chains)?;
    let s = summarize_values("intercept", &pooled.coefficient("intercept").expect("intercept present"), 0.95)?;
    println!("pooled  {:>9.4} {:>9.4} {:>7.0}   95% interval ({:.3}, {:.3})", s.mean, s.mcse, s.ess, s.lower, s.upper);
    Ok(())
}
