//! Gaussian regression whose three slopes are mixture weights: each is
//! nonnegative and together they sum to one.

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Normal, Uniform};
use slicegam::data::DataTable;
use slicegam::gibbs::run_seeded_chain;
use slicegam::inference::summarize;
use slicegam::model::{build_design, BetaConstraint, LinkFamily, ModelSpec, SamplerSettings};

fn main() -> slicegam::Result<()> {
    let mut rng = ChaCha8Rng::seed_from_u64(5);
    let x = Uniform::new(0.0, 4.0).expect("valid range");
    let noise = Normal::new(0.0, 1.0).expect("valid sd");
    let weights = [0.7, 0.3, 0.0];
    let n = 150;
    let cols: Vec<Vec<f64>> = (0..3).map(|_| (0..n).map(|_| x.sample(&mut rng)).collect()).collect();
    let y: Vec<f64> =
        (0..n).map(|i| 1.0 + (0..3).map(|k| weights[k] * cols[k][i]).sum::<f64>() + noise.sample(&mut rng)).collect();
    let mut data = DataTable::new();
    for (k, c) in cols.into_iter().enumerate() {
        data.push_column(format!("x{}", k + 1), c)?;
    }
    data.push_column("y", y)?;

    let third = 1.0 / 3.0;
    let mut spec = ModelSpec::new(LinkFamily::Gaussian, "y")
        .with_sampler(SamplerSettings {
            seed: 5,
            init_beta: Some(vec![0.0, third, third, third]),
            ..SamplerSettings::with_iterations(20_000)
        })
        .with_constraint(BetaConstraint {
            coefficients: (1..=3).map(|k| (format!("x{k}"), 1.0)).collect(),
            lower: 1.0,
            upper: 1.0,
        });
    for k in 1..=3 {
        spec = spec.with_fixed(format!("x{k}")).with_constraint(BetaConstraint {
            coefficients: vec![(format!("x{k}"), 1.0)],
            lower: 0.0,
            upper: f64::INFINITY,
        });
    }
    let bundle = build_design(&spec, &data)?;
    let draws = run_seeded_chain(&spec, &bundle, 5, 0)?;

    let worst = (0..draws.n_draws())
        .map(|r| ((1..4).map(|j| draws.eta[(r, j)]).sum::<f64>() - 1.0).abs())
        .fold(0.0f64, f64::max);
    println!("largest |sum of weights - 1| over {} draws: {worst:.2e}", draws.n_draws());
    println!("{:<12} {:>8} {:>8} {:>8} {:>8}", "coefficient", "mean", "2.5%", "97.5%", "truth");
    for (row, truth) in summarize(&draws, 0.95)?.iter().skip(1).zip(weights) {
        println!("{:<12} {:>8.3} {:>8.3} {:>8.3} {:>8.3}", row.name, row.mean, row.lower, row.upper, truth);
    }
    Ok(())
}
