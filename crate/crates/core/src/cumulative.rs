//! The cumulative-difference curve and its randomized-perturbation baseline.
//!
//! For tie groups `k = 1..n` with weights `W_k`, mean responses `R_k` and
//! null values `r(S_k)`, `v(R_k)`:
//!
//! ```text
//! A_ℓ = Σ_{k≤ℓ} W_k / Σ_k W_k
//! C_ℓ = Σ_{k≤ℓ} (R_k - r(S_k)) W_k / Σ_k W_k
//! σ_ℓ² = Σ_{k≤ℓ} v(R_k) W_k² / (Σ_k W_k)²
//! ```
//!
//! with `A_0 = C_0 = 0`. The curve is displayed as `(A_ℓ, C_ℓ / σ_n)`.
//!
//! The baseline instead walks through every original record, shuffling the
//! records inside each tie group as if the tied scores had been perturbed by
//! an infinitesimal random amount. At the end of each group its running sum
//! equals `C_ℓ` regardless of the shuffle.

use rand::seq::SliceRandom;

use crate::aggregate::AggregatedDataset;
use crate::data::ValidatedDataset;
use crate::error::{Error, Result};
use crate::kahan::NeumaierSum;
use crate::null::NullModel;
use crate::rng;

#[derive(Debug, Clone, PartialEq)]
pub struct CumulativeCurve {
    abscissae: Vec<f64>,
    ordinates: Vec<f64>,
    sigma: Vec<f64>,
}

impl CumulativeCurve {
    /// `A_0..A_n`.
    pub fn abscissae(&self) -> &[f64] {
        &self.abscissae
    }

    /// `C_0..C_n`.
    pub fn ordinates(&self) -> &[f64] {
        &self.ordinates
    }

    /// `σ_1..σ_n`.
    pub fn sigma(&self) -> &[f64] {
        &self.sigma
    }

    /// `σ_n`, the normalizer; always positive.
    pub fn sigma_n(&self) -> f64 {
        *self.sigma.last().expect("curve has at least one group")
    }

    /// `C_ℓ / σ_n` for `ℓ = 0..n`.
    pub fn normalized(&self) -> Vec<f64> {
        let s = self.sigma_n();
        self.ordinates.iter().map(|c| c / s).collect()
    }

    /// Number of groups `n`.
    pub fn len(&self) -> usize {
        self.sigma.len()
    }

    pub fn is_empty(&self) -> bool {
        self.sigma.is_empty()
    }
}

/// `A_0..A_n` for an aggregated dataset.
pub fn abscissae(agg: &AggregatedDataset) -> Vec<f64> {
    let total = agg.total_weight();
    let mut acc = NeumaierSum::new();
    let mut out = Vec::with_capacity(agg.len() + 1);
    out.push(0.0);
    for g in agg.groups() {
        acc += g.group_weight;
        out.push(acc.value() / total);
    }
    out
}

/// Builds `A`, `C` and `σ` for an aggregated dataset under a null model.
pub fn cumulative_differences(
    agg: &AggregatedDataset,
    null: &NullModel,
) -> Result<CumulativeCurve> {
    null.check_matches(agg)?;
    let total = agg.total_weight();
    let total_sq = total * total;

    let mut ordinates = Vec::with_capacity(agg.len() + 1);
    let mut sigma = Vec::with_capacity(agg.len());
    ordinates.push(0.0);
    let mut diffs = NeumaierSum::new();
    let mut var = NeumaierSum::new();
    for ((g, &r), &v) in agg
        .groups()
        .iter()
        .zip(null.regression_values())
        .zip(null.variances())
    {
        diffs += (g.mean_response - r) * g.group_weight;
        var += v * g.group_weight * g.group_weight;
        ordinates.push(diffs.value() / total);
        sigma.push((var.value() / total_sq).sqrt());
    }

    let sigma_n = sigma.last().copied().unwrap_or(0.0);
    if sigma_n.is_nan() || sigma_n <= 0.0 {
        return Err(Error::DegenerateNull);
    }
    Ok(CumulativeCurve {
        abscissae: abscissae(agg),
        ordinates,
        sigma,
    })
}

/// Cumulative differences over the original records, one point per record,
/// with records inside each tie group visited in a seeded random order.
#[derive(Debug, Clone, PartialEq)]
pub struct BaselineCurve {
    abscissae: Vec<f64>,
    ordinates: Vec<f64>,
    group_boundaries: Vec<usize>,
    seed: u64,
}

impl BaselineCurve {
    /// One entry per record plus the origin.
    pub fn abscissae(&self) -> &[f64] {
        &self.abscissae
    }

    pub fn ordinates(&self) -> &[f64] {
        &self.ordinates
    }

    /// For `ℓ = 1..n`, the index into [`Self::ordinates`] where group `ℓ` ends.
    pub fn group_boundaries(&self) -> &[usize] {
        &self.group_boundaries
    }

    pub fn seed(&self) -> u64 {
        self.seed
    }

    /// `B_0..B_n`, the ordinates at the origin and each group boundary.
    pub fn boundary_ordinates(&self) -> Vec<f64> {
        std::iter::once(self.ordinates[0])
            .chain(self.group_boundaries.iter().map(|&i| self.ordinates[i]))
            .collect()
    }
}

/// The per-record curve under a seeded shuffle of each tie group.
pub fn baseline_curve(
    dataset: &ValidatedDataset,
    agg: &AggregatedDataset,
    null: &NullModel,
    seed: u64,
) -> Result<BaselineCurve> {
    null.check_matches(agg)?;
    if agg.record_count() != dataset.len() {
        return Err(Error::CurveMismatch(format!(
            "aggregate covers {} records, dataset has {}",
            agg.record_count(),
            dataset.len()
        )));
    }
    let records = dataset.records();
    let total = agg.total_weight();
    let mut rng = rng::stream(seed, 0);

    let mut abscissae = Vec::with_capacity(records.len() + 1);
    let mut ordinates = Vec::with_capacity(records.len() + 1);
    let mut group_boundaries = Vec::with_capacity(agg.len());
    abscissae.push(0.0);
    ordinates.push(0.0);

    let mut weight = NeumaierSum::new();
    let mut diffs = NeumaierSum::new();
    let mut order: Vec<usize> = Vec::new();
    for (range, &r) in agg.source_ranges().iter().zip(null.regression_values()) {
        order.clear();
        order.extend(range.clone());
        if order.len() > 1 {
            order.shuffle(&mut rng);
        }
        for &i in &order {
            let rec = records[i];
            weight += rec.weight;
            diffs += (rec.response - r) * rec.weight;
            abscissae.push(weight.value() / total);
            ordinates.push(diffs.value() / total);
        }
        group_boundaries.push(ordinates.len() - 1);
    }

    Ok(BaselineCurve {
        abscissae,
        ordinates,
        group_boundaries,
        seed,
    })
}

/// Largest `|B_ℓ - C_ℓ|` over `ℓ = 0..n`.
///
/// Errors if the curves have different group counts or their group-boundary
/// abscissae disagree (a sign they come from different datasets).
pub fn equivalence_report(curve: &CumulativeCurve, baseline: &BaselineCurve) -> Result<f64> {
    if baseline.group_boundaries().len() != curve.len() {
        return Err(Error::LengthMismatch(format!(
            "baseline has {} groups, curve has {}",
            baseline.group_boundaries().len(),
            curve.len()
        )));
    }
    let boundary_abscissae = std::iter::once(0.0).chain(
        baseline
            .group_boundaries()
            .iter()
            .map(|&i| baseline.abscissae()[i]),
    );
    for (l, (b, c)) in boundary_abscissae.zip(curve.abscissae()).enumerate() {
        if (b - c).abs() > 1e-9 {
            return Err(Error::CurveMismatch(format!(
                "abscissa {l} is {b} in the baseline and {c} in the curve"
            )));
        }
    }
    Ok(baseline
        .boundary_ordinates()
        .iter()
        .zip(curve.ordinates())
        .map(|(b, c)| (b - c).abs())
        .fold(0.0, f64::max))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::aggregate::aggregate_ties;
    use crate::data::{validate_and_sort, Mode, ScoredRecord};
    use crate::null::{calibration_null, NullKind};

    fn ds(recs: &[(f64, f64, f64)]) -> ValidatedDataset {
        let records = recs
            .iter()
            .map(|&(s, r, w)| ScoredRecord::new(s, r, w))
            .collect();
        validate_and_sort(records, Mode::Calibration).unwrap()
    }

    const WORKED: [(f64, f64, f64); 3] = [(0.3, 1.0, 1.0), (0.3, 0.0, 3.0), (0.7, 1.0, 2.0)];

    #[test]
    fn abscissae_examples() {
        let agg = aggregate_ties(&ds(&WORKED));
        let a = abscissae(&agg);
        assert_eq!(a.len(), 3);
        assert_eq!(a[0], 0.0);
        assert!((a[1] - 2.0 / 3.0).abs() < 1e-15);
        assert_eq!(a[2], 1.0);

        assert_eq!(
            abscissae(&aggregate_ties(&ds(&[(0.5, 1.0, 3.0)]))),
            vec![0.0, 1.0]
        );
        let uniform = ds(&[
            (0.1, 0.0, 1.0),
            (0.2, 0.0, 1.0),
            (0.3, 0.0, 1.0),
            (0.4, 0.0, 1.0),
        ]);
        assert_eq!(
            abscissae(&aggregate_ties(&uniform)),
            vec![0.0, 0.25, 0.5, 0.75, 1.0]
        );
    }

    #[test]
    fn worked_example_curve() {
        let agg = aggregate_ties(&ds(&WORKED));
        let curve = cumulative_differences(&agg, &calibration_null(&agg)).unwrap();
        let c = curve.ordinates();
        assert_eq!(c[0], 0.0);
        assert!((c[1] + 1.0 / 30.0).abs() < 1e-15);
        assert!((c[2] - 1.0 / 15.0).abs() < 1e-15);
        // σ₁² = 7/120, σ₂² = 49/600 by exact rational evaluation.
        assert!((curve.sigma()[0] - (7.0f64 / 120.0).sqrt()).abs() < 1e-15);
        assert!((curve.sigma_n() - 0.2857738033247041).abs() < 1e-15);
    }

    #[test]
    fn single_group() {
        let agg = aggregate_ties(&ds(&[(0.5, 1.0, 1.0)]));
        let curve = cumulative_differences(&agg, &calibration_null(&agg)).unwrap();
        assert_eq!(curve.ordinates(), &[0.0, 0.5]);
        assert_eq!(curve.sigma(), &[0.5]);
    }

    #[test]
    fn responses_equal_to_regression_give_flat_curve() {
        let agg = aggregate_ties(&ds(&[(0.2, 0.2, 1.0), (0.2, 0.2, 2.0), (0.6, 0.6, 1.5)]));
        let curve = cumulative_differences(&agg, &calibration_null(&agg)).unwrap();
        assert!(curve.ordinates().iter().all(|&c| c == 0.0));
    }

    #[test]
    fn zero_variance_null_is_an_error() {
        let agg = aggregate_ties(&ds(&[(0.0, 0.0, 1.0), (1.0, 1.0, 1.0)]));
        let err = cumulative_differences(&agg, &calibration_null(&agg)).unwrap_err();
        assert_eq!(err.to_string(), "degenerate null: zero variance");
    }

    #[test]
    fn null_length_checked() {
        let agg = aggregate_ties(&ds(&WORKED));
        let null = NullModel::new(vec![0.5], vec![0.25], NullKind::Calibration).unwrap();
        assert!(matches!(
            cumulative_differences(&agg, &null),
            Err(Error::NullLength {
                expected: 2,
                got: 1
            })
        ));
    }

    #[test]
    fn baseline_final_boundary() {
        let dataset = ds(&[(0.3, 1.0, 1.0), (0.3, 0.0, 3.0)]);
        let agg = aggregate_ties(&dataset);
        let null = calibration_null(&agg);
        for seed in 0..8 {
            let b = baseline_curve(&dataset, &agg, &null, seed).unwrap();
            assert_eq!(b.ordinates().len(), 3);
            assert_eq!(b.group_boundaries(), &[2]);
            assert!((b.boundary_ordinates()[1] + 0.05).abs() < 1e-16);
        }
    }

    #[test]
    fn baseline_interiors_depend_on_seed_boundaries_do_not() {
        let recs: Vec<_> = (0..12)
            .map(|j| (0.4, (j % 2) as f64, 1.0 + j as f64))
            .collect();
        let dataset = ds(&recs);
        let agg = aggregate_ties(&dataset);
        let null = calibration_null(&agg);
        let a = baseline_curve(&dataset, &agg, &null, 1).unwrap();
        let b = baseline_curve(&dataset, &agg, &null, 2).unwrap();
        assert_ne!(a.ordinates(), b.ordinates());
        let (ba, bb) = (a.boundary_ordinates(), b.boundary_ordinates());
        assert!((ba[1] - bb[1]).abs() < 1e-15);
        assert_eq!(a, baseline_curve(&dataset, &agg, &null, 1).unwrap());
    }

    #[test]
    fn tie_free_equivalence_is_exact() {
        let dataset = ds(&[
            (0.1, 0.0, 0.7),
            (0.35, 1.0, 1.3),
            (0.6, 1.0, 2.9),
            (0.95, 0.0, 0.1),
        ]);
        let agg = aggregate_ties(&dataset);
        let null = calibration_null(&agg);
        let curve = cumulative_differences(&agg, &null).unwrap();
        let b = baseline_curve(&dataset, &agg, &null, 99).unwrap();
        assert_eq!(equivalence_report(&curve, &b).unwrap(), 0.0);
    }

    #[test]
    fn equivalence_rejects_mismatched_curves() {
        let one = ds(&WORKED);
        let agg = aggregate_ties(&one);
        let null = calibration_null(&agg);
        let curve = cumulative_differences(&agg, &null).unwrap();

        let other = ds(&[(0.3, 1.0, 1.0)]);
        let agg_o = aggregate_ties(&other);
        let b = baseline_curve(&other, &agg_o, &calibration_null(&agg_o), 0).unwrap();
        assert!(matches!(
            equivalence_report(&curve, &b),
            Err(Error::LengthMismatch(_))
        ));

        let shifted = ds(&[(0.3, 1.0, 5.0), (0.7, 1.0, 1.0)]);
        let agg_s = aggregate_ties(&shifted);
        let b = baseline_curve(&shifted, &agg_s, &calibration_null(&agg_s), 0).unwrap();
        assert!(matches!(
            equivalence_report(&curve, &b),
            Err(Error::CurveMismatch(_))
        ));
    }
}
