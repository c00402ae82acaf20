//! Scalar statistics of a cumulative curve and their P-values.
//!
//! Under the null the normalized curve `C_ℓ / σ_n`, plotted against the
//! null variance fraction, is asymptotically a standard Brownian motion on
//! `[0, 1]`, so
//!
//! * `max_abs = max_ℓ |C_ℓ| / σ_n` is compared against `sup |B|`, which has a
//!   closed-form tail ([`pvalue_max_abs_asymptotic`]);
//! * `range = (max_ℓ C_ℓ - min_ℓ C_ℓ) / σ_n` (Kuiper-style) is compared
//!   only by simulation.
//!
//! The Monte Carlo P-values simulate the null exactly term by term: each group
//! contributes an independent centered Gaussian increment with variance
//! `v(R_k) W_k² / (Σ W)²`. Trial `t` always draws from substream `t` of the
//! seed, so the result is the same however the trials are scheduled.

use std::f64::consts::{FRAC_1_SQRT_2, PI};
use std::fmt;

use rand::Rng;
use rand_distr::StandardNormal;
use rayon::prelude::*;

use crate::aggregate::AggregatedDataset;
use crate::cumulative::CumulativeCurve;
use crate::data::{Mode, ValidatedDataset};
use crate::error::{Error, Result};
use crate::kahan::NeumaierSum;
use crate::null::{calibration_null, NullModel};
use crate::rng;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum StatKind {
    MaxAbs,
    Range,
}

impl fmt::Display for StatKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            StatKind::MaxAbs => "max-abs",
            StatKind::Range => "range",
        })
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SummaryReport {
    pub max_abs: f64,
    pub range: f64,
    pub p_max_abs_asymptotic: f64,
    pub p_max_abs_mc: f64,
    pub p_range_mc: f64,
    pub mc_trials: u64,
    pub seed: u64,
}

/// Running extrema of a curve that starts at the origin.
#[derive(Debug, Clone, Copy)]
struct Extrema {
    max: f64,
    min: f64,
}

impl Extrema {
    const ORIGIN: Extrema = Extrema { max: 0.0, min: 0.0 };

    #[inline]
    fn push(&mut self, c: f64) {
        self.max = self.max.max(c);
        self.min = self.min.min(c);
    }

    #[inline]
    fn max_abs(&self) -> f64 {
        self.max.max(-self.min)
    }

    #[inline]
    fn range(&self) -> f64 {
        self.max - self.min
    }

    fn stat(&self, kind: StatKind) -> f64 {
        match kind {
            StatKind::MaxAbs => self.max_abs(),
            StatKind::Range => self.range(),
        }
    }
}

/// `(max_abs, range)` of a curve, both including the origin.
pub fn scalar_statistics(curve: &CumulativeCurve) -> (f64, f64) {
    let mut e = Extrema::ORIGIN;
    curve.ordinates().iter().for_each(|&c| e.push(c));
    let s = curve.sigma_n();
    (e.max_abs() / s, e.range() / s)
}

/// `P(sup_{0≤t≤1} |B_t| ≥ x)` for a standard Brownian motion `B`.
///
/// Uses the theta-function series
/// `1 - (4/π) Σ_j (-1)^j/(2j+1) exp(-π²(2j+1)²/(8x²))` for `x ≤ 1`, where it
/// converges in a handful of terms, and the method-of-images series
/// `4 Σ_k (-1)^(k+1) Φc((2k-1)x)` above that, where the theta series would
/// need many terms and lose its precision to cancellation.
pub fn pvalue_max_abs_asymptotic(x: f64) -> Result<f64> {
    if x.is_nan() || x < 0.0 {
        return Err(Error::InvalidArgument(format!(
            "statistic must be nonnegative, got {x}"
        )));
    }
    if x == 0.0 {
        return Ok(1.0);
    }
    let p = if x <= 1.0 {
        let mut sum = 0.0;
        for j in 0u32.. {
            let odd = f64::from(2 * j + 1);
            let term = (-PI * PI * odd * odd / (8.0 * x * x)).exp() / odd;
            sum += if j % 2 == 0 { term } else { -term };
            if term < 1e-16 {
                break;
            }
        }
        1.0 - 4.0 / PI * sum
    } else {
        let mut sum = 0.0;
        for k in 0u32.. {
            let term = 0.5 * libm::erfc(f64::from(2 * k + 1) * x * FRAC_1_SQRT_2);
            sum += if k % 2 == 0 { term } else { -term };
            if term <= 1e-17 * sum {
                break;
            }
        }
        4.0 * sum
    };
    Ok(p.clamp(0.0, 1.0))
}

/// Per-group standard deviations of the null increments and their `σ_n`.
fn increment_scales(agg: &AggregatedDataset, null: &NullModel) -> Result<(Vec<f64>, f64)> {
    null.check_matches(agg)?;
    let total = agg.total_weight();
    let total_sq = total * total;
    let mut var = NeumaierSum::new();
    let scales = agg
        .groups()
        .iter()
        .zip(null.variances())
        .map(|(g, &v)| {
            let w2 = g.group_weight * g.group_weight;
            var += v * w2;
            (v * w2 / total_sq).sqrt()
        })
        .collect();
    let sigma_n = (var.value() / total_sq).sqrt();
    if sigma_n.is_nan() || sigma_n <= 0.0 {
        return Err(Error::DegenerateNull);
    }
    Ok((scales, sigma_n))
}

fn check_trials(trials: u64) -> Result<()> {
    if trials == 0 {
        return Err(Error::InvalidArgument(
            "Monte Carlo trials must be at least 1".into(),
        ));
    }
    Ok(())
}

fn check_observed(observed: f64) -> Result<()> {
    if observed.is_nan() {
        return Err(Error::InvalidArgument("observed statistic is NaN".into()));
    }
    Ok(())
}

fn add_one(count: usize, trials: u64) -> f64 {
    (1.0 + count as f64) / (trials as f64 + 1.0)
}

/// Simulated-null extrema for one Gaussian trial, already divided by `σ_n`.
fn gaussian_trial(scales: &[f64], sigma_n: f64, seed: u64, trial: u64) -> Extrema {
    let mut rng = rng::stream(seed, trial);
    let mut c = 0.0;
    let mut e = Extrema::ORIGIN;
    for &s in scales {
        let z: f64 = rng.sample(StandardNormal);
        c += s * z;
        e.push(c);
    }
    Extrema {
        max: e.max / sigma_n,
        min: e.min / sigma_n,
    }
}

/// Add-one Monte Carlo P-value of an observed statistic against the
/// Gaussian-increment null.
pub fn pvalue_monte_carlo(
    kind: StatKind,
    observed: f64,
    agg: &AggregatedDataset,
    null: &NullModel,
    trials: u64,
    seed: u64,
) -> Result<f64> {
    check_trials(trials)?;
    check_observed(observed)?;
    let (scales, sigma_n) = increment_scales(agg, null)?;
    let count = (0..trials)
        .into_par_iter()
        .filter(|&t| gaussian_trial(&scales, sigma_n, seed, t).stat(kind) >= observed)
        .count();
    Ok(add_one(count, trials))
}

/// Both Monte Carlo P-values `(max_abs, range)` from one set of simulated
/// curves.
pub fn pvalues_monte_carlo(
    observed_max_abs: f64,
    observed_range: f64,
    agg: &AggregatedDataset,
    null: &NullModel,
    trials: u64,
    seed: u64,
) -> Result<(f64, f64)> {
    check_trials(trials)?;
    check_observed(observed_max_abs)?;
    check_observed(observed_range)?;
    let (scales, sigma_n) = increment_scales(agg, null)?;
    let (a, b) = (0..trials)
        .into_par_iter()
        .map(|t| {
            let e = gaussian_trial(&scales, sigma_n, seed, t);
            (
                usize::from(e.max_abs() >= observed_max_abs),
                usize::from(e.range() >= observed_range),
            )
        })
        .reduce(|| (0, 0), |x, y| (x.0 + y.0, x.1 + y.1));
    Ok((add_one(a, trials), add_one(b, trials)))
}

/// Add-one Monte Carlo P-value under exact calibration: every original
/// response is redrawn as Bernoulli with success probability equal to its
/// score, then aggregated as usual.
pub fn pvalue_bernoulli(
    kind: StatKind,
    observed: f64,
    dataset: &ValidatedDataset,
    agg: &AggregatedDataset,
    trials: u64,
    seed: u64,
) -> Result<f64> {
    check_trials(trials)?;
    check_observed(observed)?;
    if dataset.mode() != Mode::Calibration {
        return Err(Error::InvalidArgument(
            "Bernoulli resimulation needs a calibration dataset".into(),
        ));
    }
    let (_, sigma_n) = increment_scales(agg, &calibration_null(agg))?;
    let records = dataset.records();
    let total = agg.total_weight();
    let count = (0..trials)
        .into_par_iter()
        .filter(|&t| {
            let mut rng = rng::stream(seed, t);
            let mut acc = NeumaierSum::new();
            let mut e = Extrema::ORIGIN;
            for (g, range) in agg.groups().iter().zip(agg.source_ranges()) {
                for rec in &records[range.clone()] {
                    let y = if rng.random::<f64>() < g.score {
                        1.0
                    } else {
                        0.0
                    };
                    acc += (y - g.score) * rec.weight;
                }
                e.push(acc.value() / total);
            }
            e.stat(kind) / sigma_n >= observed
        })
        .count();
    Ok(add_one(count, trials))
}

/// Statistics, the asymptotic max-abs P-value and both Monte Carlo P-values.
pub fn summarize(
    curve: &CumulativeCurve,
    agg: &AggregatedDataset,
    null: &NullModel,
    trials: u64,
    seed: u64,
) -> Result<SummaryReport> {
    let (max_abs, range) = scalar_statistics(curve);
    let (p_max_abs_mc, p_range_mc) = pvalues_monte_carlo(max_abs, range, agg, null, trials, seed)?;
    Ok(SummaryReport {
        max_abs,
        range,
        p_max_abs_asymptotic: pvalue_max_abs_asymptotic(max_abs)?,
        p_max_abs_mc,
        p_range_mc,
        mc_trials: trials,
        seed,
    })
}
