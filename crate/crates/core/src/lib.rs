//! Cumulative-difference statistics for weighted scored data with tied scores.
//!
//! Records sharing exactly the same score are collapsed into a single weighted
//! record (summed weight, weighted-mean response, and a concentration factor
//! that carries the within-group weight spread into the null variance). The
//! collapsed data set has unique scores, so the usual cumulative-difference
//! curve, its null standard deviations and its scalar summaries apply without
//! randomly perturbing the scores.
//!
//! The pipeline is:
//!
//! 1. [`data::parse_records`] and [`data::validate_and_sort`]
//! 2. [`aggregate::aggregate_ties`]
//! 3. [`null::calibration_null`] or [`null::subpopulation_null`]
//! 4. [`cumulative::cumulative_differences`]
//! 5. [`summary::scalar_statistics`] and the P-value functions
//!
//! ```
//! use cumdiff::prelude::*;
//!
//! let records = vec![
//!     ScoredRecord::new(0.3, 1.0, 1.0),
//!     ScoredRecord::new(0.3, 0.0, 3.0),
//!     ScoredRecord::new(0.7, 1.0, 2.0),
//! ];
//! let dataset = validate_and_sort(records, Mode::Calibration).unwrap();
//! let agg = aggregate_ties(&dataset);
//! let null = calibration_null(&agg);
//! let curve = cumulative_differences(&agg, &null).unwrap();
//! assert_eq!(curve.abscissae().len(), 3);
//! assert!((curve.ordinates()[2] - 1.0 / 15.0).abs() < 1e-15);
//! ```

pub mod aggregate;
pub mod cli;
pub mod cumulative;
pub mod data;
pub mod error;
pub mod experiment;
pub mod kahan;
pub mod null;
pub mod report;
pub mod rng;
pub mod summary;

pub use error::{Error, Result};

pub mod prelude {
    pub use crate::aggregate::{aggregate_ties, concentration_factor, AggregatedDataset, TieGroup};
    pub use crate::cumulative::{
        abscissae, baseline_curve, cumulative_differences, equivalence_report, BaselineCurve,
        CumulativeCurve,
    };
    pub use crate::data::{
        parse_records, validate_and_sort, ColumnSpec, Mode, ScoredRecord, ValidatedDataset,
    };
    pub use crate::error::{Error, Result};
    pub use crate::null::{
        calibration_null, subpopulation_null, FullPopulationReference, NullKind, NullModel,
    };
    pub use crate::summary::{
        pvalue_bernoulli, pvalue_max_abs_asymptotic, pvalue_monte_carlo, scalar_statistics,
        StatKind, SummaryReport,
    };
}

// The guide's code listings are compiled and run as doctests so they cannot
// drift from the library.
#[cfg(doctest)]
mod book {
    #[doc = include_str!("../../../book/src/introduction.md")]
    mod introduction {}
    #[doc = include_str!("../../../book/src/ties.md")]
    mod ties {}
    #[doc = include_str!("../../../book/src/cumulative.md")]
    mod cumulative {}
    #[doc = include_str!("../../../book/src/null_models.md")]
    mod null_models {}
    #[doc = include_str!("../../../book/src/statistics.md")]
    mod statistics {}
    #[doc = include_str!("../../../book/src/reports.md")]
    mod reports {}
}
