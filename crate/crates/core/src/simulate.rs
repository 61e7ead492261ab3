//! Synthetic data generators.
//!
//! * `a`: `t ~ U(0, 20)`, `y ~ Poisson(0.005 (t − 10)³ + 10)`.
//! * `b`: `t ~ U(0, 2π k)`, `y ~ Poisson(exp(sin t))`.
//! * `c`: current-status data with `logit F(t | x) = log(t / 10) + x'β`.
//! * `null`: `t ~ U(0, 20)`, `y ~ Poisson(1)`.

use std::f64::consts::PI;

use rand::Rng;
use rand_distr::{Bernoulli, Distribution, Normal, Poisson, Uniform};

use crate::data::DataTable;
use crate::error::{Error, Result};
use crate::rng::chain_rng;

pub const MIN_SIMULATED_ROWS: usize = 20;

/// Pain-score and binary covariate effects of scenario `c`.
pub const SCENARIO_C_BETA: [f64; 2] = [-1.0, 0.5];

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Scenario {
    Monotone,
    Periodic { periods: u32 },
    CurrentStatus,
    Null,
}

impl Scenario {
    pub fn parse(name: &str, periods: u32) -> Result<Self> {
        match name.trim().to_ascii_lowercase().as_str() {
            "a" | "monotone" => Ok(Scenario::Monotone),
            "b" | "periodic" => {
                if periods == 0 {
                    return Err(Error::Usage("periods must be positive".into()));
                }
                Ok(Scenario::Periodic { periods })
            }
            "c" | "current-status" | "current_status" => Ok(Scenario::CurrentStatus),
            "null" | "flat" => Ok(Scenario::Null),
            other => Err(Error::Usage(format!("unknown scenario '{other}'"))),
        }
    }

    /// Upper end of the time domain.
    pub fn t_max(&self) -> f64 {
        match self {
            Scenario::Periodic { periods } => 2.0 * PI * *periods as f64,
            _ => 20.0,
        }
    }
}

/// Poisson mean of scenario `a`.
pub fn scenario_a_mean(t: f64) -> f64 {
    0.005 * (t - 10.0).powi(3) + 10.0
}

/// Log mean of scenario `b`.
pub fn scenario_b_log_mean(t: f64) -> f64 {
    t.sin()
}

/// True baseline log-odds of scenario `c`.
pub fn scenario_c_baseline(t: f64) -> f64 {
    (t / 10.0).ln()
}

fn poisson_draw<R: Rng + ?Sized>(mean: f64, rng: &mut R) -> Result<f64> {
    let d = Poisson::new(mean).map_err(|e| Error::NumericalFailure(format!("Poisson({mean}): {e}")))?;
    Ok(d.sample(rng))
}

/// Generate `n` rows of `scenario` from stream 0 of `seed`.
pub fn simulate(scenario: Scenario, n: usize, seed: u64) -> Result<DataTable> {
    if n < MIN_SIMULATED_ROWS {
        return Err(Error::Usage(format!("need at least {MIN_SIMULATED_ROWS} rows, got {n}")));
    }
    let mut rng = chain_rng(seed, 0);
    let time = Uniform::new(0.0, scenario.t_max()).expect("valid range");
    match scenario {
        Scenario::Monotone | Scenario::Periodic { .. } | Scenario::Null => {
            let mut t = Vec::with_capacity(n);
            let mut y = Vec::with_capacity(n);
            for _ in 0..n {
                let ti: f64 = time.sample(&mut rng);
                let mean = match scenario {
                    Scenario::Monotone => scenario_a_mean(ti),
                    Scenario::Periodic { .. } => scenario_b_log_mean(ti).exp(),
                    _ => 1.0,
                };
                t.push(ti);
                y.push(poisson_draw(mean, &mut rng)?);
            }
            DataTable::new().with_column("t", t)?.with_column("y", y)
        }
        Scenario::CurrentStatus => {
            let monitor = Uniform::new(0.5, 20.0).expect("valid range");
            let pain_dist = Normal::new(0.0, 1.0).expect("valid sd");
            let coin = Bernoulli::new(0.5).expect("valid p");
            let (mut t, mut y, mut pain, mut kd) = (Vec::new(), Vec::new(), Vec::new(), Vec::new());
            for _ in 0..n {
                let ti: f64 = monitor.sample(&mut rng);
                let p: f64 = pain_dist.sample(&mut rng);
                let k = if coin.sample(&mut rng) { 1.0 } else { 0.0 };
                let logit = scenario_c_baseline(ti) + SCENARIO_C_BETA[0] * p + SCENARIO_C_BETA[1] * k;
                let prob = 1.0 / (1.0 + (-logit).exp());
                let event = rng.random::<f64>() < prob;
                t.push(ti);
                y.push(if event { 1.0 } else { 0.0 });
                pain.push(p);
                kd.push(k);
            }
            DataTable::new()
                .with_column("t", t)?
                .with_column("y", y)?
                .with_column("pain", pain)?
                .with_column("kd", kd)
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn scenario_a_reference_values() {
        assert_eq!(scenario_a_mean(10.0), 10.0);
        assert_eq!(scenario_a_mean(20.0), 15.0);
    }

    #[test]
    fn unknown_scenario_and_small_n() {
        assert!(matches!(Scenario::parse("z", 2), Err(Error::Usage(_))));
        assert!(matches!(simulate(Scenario::Monotone, 5, 0), Err(Error::Usage(_))));
    }

    #[test]
    fn columns_and_ranges() {
        let d = simulate(Scenario::Periodic { periods: 2 }, 50, 1).unwrap();
        assert_eq!(d.n_rows(), 50);
        assert!(d.values("t").unwrap().iter().all(|t| *t >= 0.0 && *t < 4.0 * PI));
        let c = simulate(Scenario::CurrentStatus, 40, 2).unwrap();
        assert_eq!(c.n_cols(), 4);
        assert!(c.values("y").unwrap().iter().all(|v| *v == 0.0 || *v == 1.0));
    }

    #[test]
    fn deterministic_per_seed() {
        assert_eq!(simulate(Scenario::Monotone, 30, 9).unwrap(), simulate(Scenario::Monotone, 30, 9).unwrap());
    }
}
