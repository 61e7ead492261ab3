//! Direct use of the truncated samplers: a bivariate normal restricted to a
//! wedge, and a gamma law truncated below.

use nalgebra::DMatrix;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use slicegam::truncated::{sample_trunc_gamma, LinearConstraintSet, TruncGammaParams, TruncatedNormal};

fn main() -> slicegam::Result<()> {
    let mut rng = ChaCha8Rng::seed_from_u64(1);

    // N(μ, P⁻¹) on {u₁ ≥ 0, u₁ + u₂ ≥ 1}.
    let precision = DMatrix::from_row_slice(2, 2, &[2.0, 0.8, 0.8, 1.0]);
    let cons =
        LinearConstraintSet::new(2, vec![vec![1.0, 0.0], vec![1.0, 1.0]], vec![0.0, 1.0], vec![f64::INFINITY; 2])?;
    let tn = TruncatedNormal::from_mean(&[-0.5, 0.0], precision, &cons)?;
    let mut u = vec![1.0, 1.0];
    let (mut sum, n) = ([0.0; 2], 50_000);
    for _ in 0..n {
        u = tn.sample(&cons, &u, 1, &mut rng)?;
        assert!(cons.is_satisfied(&u));
        sum[0] += u[0];
        sum[1] += u[1];
    }
    println!("wedge mean: ({:.3}, {:.3}) from {n} feasible draws", sum[0] / n as f64, sum[1] / n as f64);

    // TG(a, b, τ₀) as used for penalty precisions.
    for (a, b, floor) in [(3.5, 0.02, 1e-3), (3.5, 2.0, 4.0), (0.5, 0.01, 1.0)] {
        let p = TruncGammaParams::new(a, b, floor)?;
        let draws: Vec<f64> = (0..20_000).map(|_| sample_trunc_gamma(&p, &mut rng)).collect::<Result<_, _>>()?;
        let min = draws.iter().copied().fold(f64::INFINITY, f64::min);
        let mean = draws.iter().sum::<f64>() / draws.len() as f64;
        println!("TG({a}, {b}, {floor}): mean {mean:.4}, smallest draw {min:.4}, P(τ ≤ 2τ₀) = {:.4}", p.cdf(2.0 * floor));
    }
    Ok(())
}
