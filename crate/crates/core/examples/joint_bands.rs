//! Joint credible bands, SimBaS scores and the global Bayesian p-value,
//! computed from posterior draws of a monotone time effect.

use slicegam::gibbs::run_seeded_chain;
use slicegam::inference::{default_grid, function_draws, gbpv, joint_band, simbas};
use slicegam::model::{build_design, LinkFamily, ModelSpec, MonotoneTerm, SamplerSettings};
use slicegam::simulate::{simulate, Scenario};

fn main() -> slicegam::Result<()> {
    let data = simulate(Scenario::Monotone, 150, 21)?;
    let spec = ModelSpec::new(LinkFamily::Poisson, "y")
        .with_monotone(MonotoneTerm::new("alpha", "t", 4))
        .with_sampler(SamplerSettings { seed: 21, thin: 4, ..SamplerSettings::with_iterations(20_000) });
    let bundle = build_design(&spec, &data)?;
    let draws = run_seeded_chain(&spec, &bundle, 21, 0)?;

    let grid = default_grid(&draws, "alpha", 101)?;
    let fd = function_draws(&draws, "alpha", &grid)?;
    for u in [0.01, 0.05, 0.2] {
        let band = joint_band(&fd, u)?;
        let width = band.upper.iter().zip(&band.lower).map(|(h, l)| h - l).sum::<f64>() / grid.len() as f64;
        println!("u = {u:<5} critical value {:.3}, mean width {width:.3}", band.critical);
    }

    // SimBaS of the curve with its intercept removed: where does time matter?
    let mut centered = fd.draws.clone();
    for r in 0..centered.nrows() {
        let level = draws.eta[(r, 0)];
        centered.row_mut(r).add_scalar_mut(-level);
    }
    let effect = slicegam::inference::FunctionDraws::new("alpha - intercept", grid.clone(), centered)?;
    let scores = simbas(&effect)?;
    let test = gbpv(&scores, 0.05)?;
    println!("GBPV of the time effect: {:.4}", test.gbpv);
    println!("{} of {} grid points flagged at u = 0.05", test.flagged.len(), grid.len());
    println!("{:>8} {:>9} {:>8}", "t", "effect", "SimBaS");
    for g in (0..grid.len()).step_by(10) {
        println!("{:>8.2} {:>9.3} {:>8.4}", grid[g], effect.mean[g], scores[g]);
    }
    Ok(())
}
