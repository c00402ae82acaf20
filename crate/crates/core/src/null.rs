//! Null hypotheses: the regression function `r(S_k)` each group is compared
//! against, and the variance `v(R_k)` of each group's mean response.

use std::fmt;

use crate::aggregate::AggregatedDataset;
use crate::data::ValidatedDataset;
use crate::error::{Error, Result};
use crate::kahan::NeumaierSum;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum NullKind {
    Calibration,
    Subpopulation,
}

/// A condition worth surfacing that does not invalidate the null model.
#[derive(Debug, Clone, PartialEq)]
pub enum NullWarning {
    /// Only one full-population record is nearest to this subpopulation
    /// score, so its variance estimate is zero.
    SingletonCell { score: f64 },
}

impl fmt::Display for NullWarning {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            NullWarning::SingletonCell { score } => write!(
                f,
                "subpopulation score {score}: a single full-population neighbor, variance estimate is 0"
            ),
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct NullModel {
    regression_values: Vec<f64>,
    variances: Vec<f64>,
    kind: NullKind,
    warnings: Vec<NullWarning>,
}

impl NullModel {
    /// Builds a null model from explicit values. Variances must be finite and
    /// nonnegative, and both sequences the same length.
    pub fn new(regression_values: Vec<f64>, variances: Vec<f64>, kind: NullKind) -> Result<Self> {
        if regression_values.len() != variances.len() {
            return Err(Error::NullLength {
                expected: regression_values.len(),
                got: variances.len(),
            });
        }
        if variances.iter().any(|v| !(v.is_finite() && *v >= 0.0))
            || regression_values.iter().any(|r| !r.is_finite())
        {
            return Err(Error::InvalidArgument(
                "null regression values must be finite and variances finite and nonnegative".into(),
            ));
        }
        Ok(Self {
            regression_values,
            variances,
            kind,
            warnings: Vec::new(),
        })
    }

    pub fn regression_values(&self) -> &[f64] {
        &self.regression_values
    }

    pub fn variances(&self) -> &[f64] {
        &self.variances
    }

    pub fn kind(&self) -> NullKind {
        self.kind
    }

    pub fn warnings(&self) -> &[NullWarning] {
        &self.warnings
    }

    pub fn len(&self) -> usize {
        self.variances.len()
    }

    pub fn is_empty(&self) -> bool {
        self.variances.is_empty()
    }

    pub(crate) fn check_matches(&self, agg: &AggregatedDataset) -> Result<()> {
        if self.len() != agg.len() {
            return Err(Error::NullLength {
                expected: agg.len(),
                got: self.len(),
            });
        }
        Ok(())
    }
}

/// Perfect calibration with Bernoulli responses: `r(s) = s` and
/// `v(R_k) = S_k (1 - S_k) f_k`.
pub fn calibration_null(agg: &AggregatedDataset) -> NullModel {
    let regression_values = agg.groups().iter().map(|g| g.score).collect();
    let variances = agg
        .groups()
        .iter()
        .map(|g| g.score * (1.0 - g.score) * g.concentration)
        .collect();
    NullModel {
        regression_values,
        variances,
        kind: NullKind::Calibration,
        warnings: Vec::new(),
    }
}

/// The full population a subpopulation is compared against.
#[derive(Debug, Clone, PartialEq)]
pub struct FullPopulationReference {
    records: ValidatedDataset,
}

impl FullPopulationReference {
    pub fn new(records: ValidatedDataset) -> Self {
        Self { records }
    }

    pub fn records(&self) -> &ValidatedDataset {
        &self.records
    }
}

/// Index of the cell (subpopulation group) each full-population record falls
/// into: the nearest group score, with exact midpoints going to the lower one.
///
/// `scores` is strictly increasing and `points` nondecreasing, so this is a
/// single merge pass.
pub fn assign_cells(scores: &[f64], points: impl IntoIterator<Item = f64>) -> Vec<usize> {
    let mut k = 0;
    points
        .into_iter()
        .map(|x| {
            while k + 1 < scores.len() && scores[k + 1] - x < x - scores[k] {
                k += 1;
            }
            k
        })
        .collect()
}

/// Compares a subpopulation against a full population.
///
/// Each subpopulation group `k` owns the full-population records whose scores
/// are closer to `S_k` than to any other subpopulation score. Then `r(S_k)` is
/// the weighted mean of those records' responses and `v(R_k)` their weighted
/// (population-form) variance times `f_k`.
pub fn subpopulation_null(
    agg: &AggregatedDataset,
    full: &FullPopulationReference,
) -> Result<NullModel> {
    let scores: Vec<f64> = agg.groups().iter().map(|g| g.score).collect();
    let population = full.records().records();
    let cells = assign_cells(&scores, population.iter().map(|r| r.score));

    let mut regression_values = Vec::with_capacity(scores.len());
    let mut variances = Vec::with_capacity(scores.len());
    let mut warnings = Vec::new();

    // Cells are contiguous runs because both sides are sorted.
    let mut start = 0;
    for (k, group) in agg.groups().iter().enumerate() {
        let end = start + cells[start..].iter().take_while(|&&c| c == k).count();
        let cell = &population[start..end];
        if cell.is_empty() {
            return Err(Error::EmptyCell { score: group.score });
        }
        let weight = cell
            .iter()
            .map(|r| r.weight)
            .collect::<NeumaierSum>()
            .value();
        let (lo, hi) = cell
            .iter()
            .fold((f64::INFINITY, f64::NEG_INFINITY), |(lo, hi), r| {
                (lo.min(r.response), hi.max(r.response))
            });
        let mean = (cell
            .iter()
            .map(|r| r.response * r.weight)
            .collect::<NeumaierSum>()
            .value()
            / weight)
            .clamp(lo, hi);
        let variance = if cell.len() == 1 {
            warnings.push(NullWarning::SingletonCell { score: group.score });
            0.0
        } else {
            cell.iter()
                .map(|r| {
                    let d = r.response - mean;
                    r.weight * d * d
                })
                .collect::<NeumaierSum>()
                .value()
                / weight
        };
        regression_values.push(mean);
        variances.push(variance * group.concentration);
        start = end;
    }

    Ok(NullModel {
        regression_values,
        variances,
        kind: NullKind::Subpopulation,
        warnings,
    })
}
