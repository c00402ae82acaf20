//! Null-calibration experiments: resimulate perfectly calibrated responses
//! for a fixed set of scores and weights, and check that the resulting
//! Monte Carlo P-values look uniform.

use rand::Rng;

use crate::aggregate::aggregate_ties;
use crate::cumulative::cumulative_differences;
use crate::data::ValidatedDataset;
use crate::error::Result;
use crate::null::calibration_null;
use crate::rng;
use crate::summary::{pvalues_monte_carlo, scalar_statistics};

const RESPONSE_DOMAIN: u64 = 1;
const TRIAL_DOMAIN: u64 = 2;

/// Copy of `dataset` whose responses are redrawn as Bernoulli(score), from
/// substream `replicate` of `seed`.
pub fn bernoulli_replicate(
    dataset: &ValidatedDataset,
    seed: u64,
    replicate: u64,
) -> Result<ValidatedDataset> {
    let mut rng = rng::stream(rng::derive_seed(seed, RESPONSE_DOMAIN, 0), replicate);
    let responses: Vec<f64> = dataset
        .records()
        .iter()
        .map(|r| {
            if rng.random::<f64>() < r.score {
                1.0
            } else {
                0.0
            }
        })
        .collect();
    dataset.with_responses(&responses)
}

#[derive(Debug, Clone, PartialEq)]
pub struct NullCalibration {
    pub pvalues_max_abs: Vec<f64>,
    pub pvalues_range: Vec<f64>,
    pub trials: u64,
    pub seed: u64,
}

/// Runs `replicates` Bernoulli-null replicates of `dataset` and computes both
/// Monte Carlo P-values for each, with `trials` simulated curves apiece.
pub fn null_calibration_experiment(
    dataset: &ValidatedDataset,
    replicates: u64,
    trials: u64,
    seed: u64,
) -> Result<NullCalibration> {
    let mut pvalues_max_abs = Vec::with_capacity(replicates as usize);
    let mut pvalues_range = Vec::with_capacity(replicates as usize);
    for i in 0..replicates {
        let replicate = bernoulli_replicate(dataset, seed, i)?;
        let agg = aggregate_ties(&replicate);
        let null = calibration_null(&agg);
        let curve = cumulative_differences(&agg, &null)?;
        let (max_abs, range) = scalar_statistics(&curve);
        let trial_seed = rng::derive_seed(seed, TRIAL_DOMAIN, i);
        let (p_max, p_range) =
            pvalues_monte_carlo(max_abs, range, &agg, &null, trials, trial_seed)?;
        pvalues_max_abs.push(p_max);
        pvalues_range.push(p_range);
    }
    Ok(NullCalibration {
        pvalues_max_abs,
        pvalues_range,
        trials,
        seed,
    })
}

/// How close a sample of P-values is to uniform on `[0, 1]`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Uniformity {
    pub mean: f64,
    /// Empirical CDF at `0.1, 0.2, ..., 0.9`.
    pub decile_cdf: [f64; 9],
    /// `max_d |F(d) - d|` over the deciles.
    pub max_decile_error: f64,
}

pub fn uniformity(pvalues: &[f64]) -> Uniformity {
    let n = pvalues.len() as f64;
    let mean = crate::kahan::sum(pvalues.iter().copied()) / n;
    let mut decile_cdf = [0.0; 9];
    let mut max_decile_error: f64 = 0.0;
    for (i, slot) in decile_cdf.iter_mut().enumerate() {
        let d = (i + 1) as f64 / 10.0;
        *slot = pvalues.iter().filter(|&&p| p <= d).count() as f64 / n;
        max_decile_error = max_decile_error.max((*slot - d).abs());
    }
    Uniformity {
        mean,
        decile_cdf,
        max_decile_error,
    }
}
