//! Collapsing runs of tied scores into single weighted records.
//!
//! A run of `n` records sharing score `s`, with responses `y_j` and weights
//! `w_j`, becomes one [`TieGroup`] carrying
//!
//! * weight `W = Σ w_j`,
//! * response `R = Σ y_j w_j / W`,
//! * concentration `f = Σ w_j² / W²`.
//!
//! `f` is the factor by which the variance of one response shrinks when the
//! run is replaced by its weighted mean; it equals `1/n` for equal weights and
//! `1` for a singleton.

use std::ops::Range;

use crate::data::ValidatedDataset;
use crate::error::{Error, Result};
use crate::kahan::NeumaierSum;

/// One aggregated record with a score unique within its dataset.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TieGroup {
    pub score: f64,
    pub mean_response: f64,
    pub group_weight: f64,
    pub concentration: f64,
    pub multiplicity: usize,
}

/// Tie groups in strictly increasing score order.
#[derive(Debug, Clone, PartialEq)]
pub struct AggregatedDataset {
    groups: Vec<TieGroup>,
    total_weight: f64,
    source_ranges: Vec<Range<usize>>,
}

impl AggregatedDataset {
    pub fn groups(&self) -> &[TieGroup] {
        &self.groups
    }

    pub fn len(&self) -> usize {
        self.groups.len()
    }

    pub fn is_empty(&self) -> bool {
        self.groups.is_empty()
    }

    pub fn total_weight(&self) -> f64 {
        self.total_weight
    }

    /// For each group, the contiguous range of indices into the source
    /// dataset's sorted records that it aggregates.
    pub fn source_ranges(&self) -> &[Range<usize>] {
        &self.source_ranges
    }

    /// Number of original records, `Σ n_k`.
    pub fn record_count(&self) -> usize {
        self.source_ranges.last().map_or(0, |r| r.end)
    }
}

/// `Σ w² / (Σ w)²` for a nonempty set of strictly positive weights.
pub fn concentration_factor(weights: &[f64]) -> Result<f64> {
    if weights.is_empty() || weights.iter().any(|w| !(w.is_finite() && *w > 0.0)) {
        return Err(Error::InvalidWeights);
    }
    if weights.len() == 1 {
        return Ok(1.0);
    }
    Ok(concentration_unchecked(weights.iter().copied()))
}

fn concentration_unchecked(weights: impl Iterator<Item = f64> + Clone) -> f64 {
    let total = weights.clone().collect::<NeumaierSum>().value();
    let squares = weights.map(|w| w * w).collect::<NeumaierSum>().value();
    // Rounding may push the ratio marginally past its bounds.
    let n = 1.0 / (total * total);
    (squares * n).min(1.0)
}

/// Groups maximal runs of bit-equal scores.
pub fn aggregate_ties(dataset: &ValidatedDataset) -> AggregatedDataset {
    let records = dataset.records();
    let mut groups = Vec::new();
    let mut source_ranges = Vec::new();
    let mut total = NeumaierSum::new();

    let mut start = 0;
    while start < records.len() {
        let score = records[start].score;
        let end = start
            + records[start..]
                .iter()
                .take_while(|r| r.score == score)
                .count();
        let run = &records[start..end];

        let group = if run.len() == 1 {
            let r = run[0];
            TieGroup {
                score,
                mean_response: r.response,
                group_weight: r.weight,
                concentration: 1.0,
                multiplicity: 1,
            }
        } else {
            // Sum in a canonical order so the result does not depend on how
            // the tied records happened to be arranged.
            let mut run = run.to_vec();
            run.sort_by(|a, b| {
                a.response
                    .total_cmp(&b.response)
                    .then(a.weight.total_cmp(&b.weight))
            });
            let weight = run
                .iter()
                .map(|r| r.weight)
                .collect::<NeumaierSum>()
                .value();
            let weighted = run
                .iter()
                .map(|r| r.response * r.weight)
                .collect::<NeumaierSum>()
                .value();
            let (lo, hi) = run
                .iter()
                .fold((f64::INFINITY, f64::NEG_INFINITY), |(lo, hi), r| {
                    (lo.min(r.response), hi.max(r.response))
                });
            let concentration =
                concentration_unchecked(run.iter().map(|r| r.weight)).max(1.0 / run.len() as f64);
            TieGroup {
                score,
                mean_response: (weighted / weight).clamp(lo, hi),
                group_weight: weight,
                concentration,
                multiplicity: run.len(),
            }
        };
        total += group.group_weight;
        groups.push(group);
        source_ranges.push(start..end);
        start = end;
    }

    AggregatedDataset {
        groups,
        total_weight: total.value(),
        source_ranges,
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::data::{validate_and_sort, Mode, ScoredRecord};

    fn dataset(recs: &[(f64, f64, f64)]) -> ValidatedDataset {
        let records = recs
            .iter()
            .map(|&(s, r, w)| ScoredRecord::new(s, r, w))
            .collect();
        validate_and_sort(records, Mode::Calibration).unwrap()
    }

    #[test]
    fn worked_example() {
        let agg = aggregate_ties(&dataset(&[
            (0.3, 1.0, 1.0),
            (0.3, 0.0, 3.0),
            (0.7, 1.0, 2.0),
        ]));
        assert_eq!(
            agg.groups(),
            &[
                TieGroup {
                    score: 0.3,
                    mean_response: 0.25,
                    group_weight: 4.0,
                    concentration: 0.625,
                    multiplicity: 2
                },
                TieGroup {
                    score: 0.7,
                    mean_response: 1.0,
                    group_weight: 2.0,
                    concentration: 1.0,
                    multiplicity: 1
                },
            ]
        );
        assert_eq!(agg.total_weight(), 6.0);
        assert_eq!(agg.source_ranges(), &[0..2, 2..3]);
        assert_eq!(agg.record_count(), 3);
    }

    #[test]
    fn no_ties_is_identity() {
        let agg = aggregate_ties(&dataset(&[(0.1, 0.0, 1.0), (0.9, 1.0, 1.0)]));
        let g = agg.groups();
        assert_eq!(g.len(), 2);
        assert_eq!(
            (g[0].score, g[0].mean_response, g[0].group_weight),
            (0.1, 0.0, 1.0)
        );
        assert_eq!(
            (g[1].score, g[1].mean_response, g[1].group_weight),
            (0.9, 1.0, 1.0)
        );
        assert!(g
            .iter()
            .all(|g| g.concentration == 1.0 && g.multiplicity == 1));
    }

    #[test]
    fn symmetric_pair() {
        let agg = aggregate_ties(&dataset(&[(0.5, 0.0, 1.0), (0.5, 1.0, 1.0)]));
        assert_eq!(
            agg.groups(),
            &[TieGroup {
                score: 0.5,
                mean_response: 0.5,
                group_weight: 2.0,
                concentration: 0.5,
                multiplicity: 2
            }]
        );
    }

    #[test]
    fn single_record() {
        let agg = aggregate_ties(&dataset(&[(0.4, 1.0, 2.5)]));
        assert_eq!(agg.len(), 1);
        assert_eq!(agg.groups()[0].concentration, 1.0);
    }

    #[test]
    fn concentration_examples() {
        assert_eq!(concentration_factor(&[1.0]).unwrap(), 1.0);
        assert_eq!(concentration_factor(&[1.0, 1.0, 1.0, 1.0]).unwrap(), 0.25);
        assert_eq!(concentration_factor(&[1.0, 3.0]).unwrap(), 0.625);
    }

    #[test]
    fn concentration_rejects_bad_input() {
        assert!(concentration_factor(&[]).is_err());
        assert!(concentration_factor(&[1.0, 0.0]).is_err());
        assert!(concentration_factor(&[1.0, -2.0]).is_err());
        assert!(concentration_factor(&[f64::NAN]).is_err());
    }
}
