//! Exponential proportional-hazards regression: event indicators with
//! log follow-up time as offset, a linear covariate and a smooth one.

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Exp, Uniform};
use slicegam::data::DataTable;
use slicegam::gibbs::run_seeded_chain;
use slicegam::inference::{default_grid, function_draws, summarize};
use slicegam::model::{build_design, LinkFamily, ModelSpec, SamplerSettings, SmoothTerm};

fn main() -> slicegam::Result<()> {
    let mut rng = ChaCha8Rng::seed_from_u64(8);
    let unit = Uniform::new(0.0, 1.0).expect("valid range");
    let n = 300;
    let (mut x, mut age, mut time, mut event) = (Vec::new(), Vec::new(), Vec::new(), Vec::new());
    for _ in 0..n {
        let xi: f64 = unit.sample(&mut rng) * 2.0 - 1.0;
        let ai: f64 = 20.0 + 50.0 * unit.sample(&mut rng);
        let hazard = (-1.0 + 0.8 * xi + 0.6 * ((ai - 45.0) / 10.0).sin()).exp();
        let t_event = Exp::new(hazard).expect("positive rate").sample(&mut rng);
        let t_censor = 4.0 * unit.sample(&mut rng);
        x.push(xi);
        age.push(ai);
        time.push(t_event.min(t_censor));
        event.push(if t_event <= t_censor { 1.0 } else { 0.0 });
    }
    let data = DataTable::new()
        .with_column("x", x)?
        .with_column("age", age)?
        .with_column("time", time)?
        .with_column("event", event)?;

    let spec = ModelSpec::new(LinkFamily::ExponentialPH, "event")
        .with_time("time")
        .with_fixed("x")
        .with_smooth(SmoothTerm::new("age", "age", 6))
        .with_sampler(SamplerSettings { seed: 8, thin: 2, ..SamplerSettings::with_iterations(20_000) });
    let bundle = build_design(&spec, &data)?;
    let draws = run_seeded_chain(&spec, &bundle, 8, 0)?;

    let x_row = summarize(&draws, 0.95)?.into_iter().find(|r| r.name == "x").expect("x present");
    println!("log hazard ratio for x: {:.3} ({:.3}, {:.3}), truth 0.8", x_row.mean, x_row.lower, x_row.upper);
    let grid = default_grid(&draws, "age", 11)?;
    let fd = function_draws(&draws, "age", &grid)?;
    let shift = fd.mean.iter().sum::<f64>() / fd.mean.len() as f64;
    let truth: Vec<f64> = grid.iter().map(|a| 0.6 * ((a - 45.0) / 10.0).sin()).collect();
    let truth_shift = truth.iter().sum::<f64>() / truth.len() as f64;
    println!("{:>6} {:>9} {:>9}", "age", "fit", "truth");
    for g in 0..grid.len() {
        println!("{:>6.1} {:>9.3} {:>9.3}", grid[g], fd.mean[g] - shift, truth[g] - truth_shift);
    }
    Ok(())
}
