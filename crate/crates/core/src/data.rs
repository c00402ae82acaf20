//! Input records, delimited-text ingestion and validation.

use std::fmt;

use crate::error::{Error, Result};
use crate::kahan::NeumaierSum;

/// One observation: a score (covariate), a response and a sampling weight.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ScoredRecord {
    pub score: f64,
    pub response: f64,
    pub weight: f64,
}

impl ScoredRecord {
    pub const fn new(score: f64, response: f64, weight: f64) -> Self {
        Self {
            score,
            response,
            weight,
        }
    }
}

/// Which hypothesis the data is analyzed under.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Mode {
    /// Responses are probabilities of outcomes in `[0, 1]`, tested against
    /// their own scores.
    Calibration,
    /// Responses are arbitrary reals, tested against a full population.
    Subpopulation,
}

impl Mode {
    pub fn as_str(self) -> &'static str {
        match self {
            Mode::Calibration => "calibration",
            Mode::Subpopulation => "subpopulation",
        }
    }
}

impl fmt::Display for Mode {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

/// Names of the columns holding each field. Without a weight column every
/// record gets weight 1.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ColumnSpec {
    pub score: String,
    pub response: String,
    pub weight: Option<String>,
}

impl Default for ColumnSpec {
    fn default() -> Self {
        Self {
            score: "score".into(),
            response: "response".into(),
            weight: None,
        }
    }
}

impl ColumnSpec {
    pub fn new(
        score: impl Into<String>,
        response: impl Into<String>,
        weight: Option<String>,
    ) -> Self {
        Self {
            score: score.into(),
            response: response.into(),
            weight,
        }
    }
}

/// Parses comma-separated text with a header line into records, in file order.
///
/// Errors name the 1-based line number of a malformed row, or the missing
/// column.
pub fn parse_records(text: &str, spec: &ColumnSpec) -> Result<Vec<ScoredRecord>> {
    let mut reader = csv::ReaderBuilder::new()
        .has_headers(true)
        .flexible(true)
        .trim(csv::Trim::All)
        .from_reader(text.as_bytes());

    let header = reader
        .headers()
        .map_err(|e| Error::MalformedRow {
            line: 1,
            reason: e.to_string(),
        })?
        .clone();
    let column = |name: &str| {
        header
            .iter()
            .position(|h| h == name)
            .ok_or_else(|| Error::MissingColumn(name.to_string()))
    };
    let score_col = column(&spec.score)?;
    let response_col = column(&spec.response)?;
    let weight_col = spec.weight.as_deref().map(column).transpose()?;

    let mut records = Vec::new();
    for row in reader.records() {
        let row = row.map_err(|e| Error::MalformedRow {
            line: e.position().map_or(0, |p| p.line()),
            reason: e.to_string(),
        })?;
        let line = row.position().map_or(0, |p| p.line());
        if row.len() != header.len() {
            return Err(Error::MalformedRow {
                line,
                reason: format!("expected {} fields, found {}", header.len(), row.len()),
            });
        }
        let field = |col: usize| -> Result<f64> {
            let raw = &row[col];
            raw.parse::<f64>().map_err(|_| Error::MalformedRow {
                line,
                reason: format!(
                    "cannot parse `{raw}` in column `{}` as a number",
                    &header[col]
                ),
            })
        };
        let weight = match weight_col {
            Some(col) => field(col)?,
            None => 1.0,
        };
        records.push(ScoredRecord::new(
            field(score_col)?,
            field(response_col)?,
            weight,
        ));
    }
    Ok(records)
}

/// Records sorted ascending by score (stable, so ties keep file order) that
/// passed validation for a given [`Mode`].
#[derive(Debug, Clone, PartialEq)]
pub struct ValidatedDataset {
    records: Vec<ScoredRecord>,
    mode: Mode,
    total_weight: f64,
}

impl ValidatedDataset {
    pub fn records(&self) -> &[ScoredRecord] {
        &self.records
    }

    pub fn mode(&self) -> Mode {
        self.mode
    }

    pub fn total_weight(&self) -> f64 {
        self.total_weight
    }

    pub fn len(&self) -> usize {
        self.records.len()
    }

    pub fn is_empty(&self) -> bool {
        self.records.is_empty()
    }

    /// Same scores and weights, new responses (used to resimulate a null).
    pub fn with_responses(&self, responses: &[f64]) -> Result<ValidatedDataset> {
        if responses.len() != self.records.len() {
            return Err(Error::LengthMismatch(format!(
                "{} responses for {} records",
                responses.len(),
                self.records.len()
            )));
        }
        let records = self
            .records
            .iter()
            .zip(responses)
            .map(|(r, &response)| ScoredRecord { response, ..*r })
            .collect();
        validate_and_sort(records, self.mode)
    }
}

/// Validates records and sorts them by score.
pub fn validate_and_sort(mut records: Vec<ScoredRecord>, mode: Mode) -> Result<ValidatedDataset> {
    if records.is_empty() {
        return Err(Error::Empty);
    }
    for (index, r) in records.iter().enumerate() {
        if !r.score.is_finite() {
            return Err(Error::NonFinite {
                index,
                field: "score",
            });
        }
        if !r.response.is_finite() {
            return Err(Error::NonFinite {
                index,
                field: "response",
            });
        }
        if r.weight.is_nan() || r.weight <= 0.0 {
            return Err(Error::NonpositiveWeight {
                index,
                weight: r.weight,
            });
        }
        if !r.weight.is_finite() {
            return Err(Error::NonFinite {
                index,
                field: "weight",
            });
        }
        if mode == Mode::Calibration {
            for (field, value) in [("score", r.score), ("response", r.response)] {
                if !(0.0..=1.0).contains(&value) {
                    return Err(Error::OutsideUnitInterval {
                        index,
                        field,
                        value,
                    });
                }
            }
        }
    }
    // total_cmp would separate -0.0 from 0.0, which compare equal as scores.
    records.sort_by(|a, b| a.score.partial_cmp(&b.score).expect("scores are finite"));
    let total_weight = records
        .iter()
        .map(|r| r.weight)
        .collect::<NeumaierSum>()
        .value();
    Ok(ValidatedDataset {
        records,
        mode,
        total_weight,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn rec(s: f64, r: f64, w: f64) -> ScoredRecord {
        ScoredRecord::new(s, r, w)
    }

    #[test]
    fn default_weight_is_one() {
        let got = parse_records("score,response\n0.5,1\n", &ColumnSpec::default()).unwrap();
        assert_eq!(got, vec![rec(0.5, 1.0, 1.0)]);
    }

    #[test]
    fn explicit_columns() {
        let spec = ColumnSpec::new("s", "r", Some("w".into()));
        let got = parse_records("s,r,w\n0.3,0,3\n", &spec).unwrap();
        assert_eq!(got, vec![rec(0.3, 0.0, 3.0)]);
    }

    #[test]
    fn columns_in_any_order_with_extras() {
        let spec = ColumnSpec::new("s", "r", Some("w".into()));
        let got = parse_records("id,w,r,s\na,2,1e-1,0.25\n", &spec).unwrap();
        assert_eq!(got, vec![rec(0.25, 0.1, 2.0)]);
    }

    #[test]
    fn unparsable_number_names_line() {
        let err =
            parse_records("score,response,w\n0.3,zebra,1\n", &ColumnSpec::default()).unwrap_err();
        match err {
            Error::MalformedRow { line, .. } => assert_eq!(line, 2),
            other => panic!("unexpected {other:?}"),
        }
    }

    #[test]
    fn wrong_field_count_names_line() {
        let text = "score,response\n0.1,0\n0.2\n";
        let err = parse_records(text, &ColumnSpec::default()).unwrap_err();
        assert!(
            matches!(err, Error::MalformedRow { line: 3, .. }),
            "{err:?}"
        );
    }

    #[test]
    fn missing_column_named() {
        let spec = ColumnSpec::new("score", "response", Some("weight".into()));
        let err = parse_records("score,response\n0.1,0\n", &spec).unwrap_err();
        assert!(matches!(err, Error::MissingColumn(ref c) if c == "weight"));
        assert!(err.to_string().contains("weight"));
    }

    #[test]
    fn textual_variants_parse_equal() {
        let got = parse_records(
            "score,response\n0.50,1\n0.5,0\n5e-1,1\n",
            &ColumnSpec::default(),
        )
        .unwrap();
        assert!(got.iter().all(|r| r.score == 0.5));
    }

    #[test]
    fn stable_sort_and_total() {
        let ds = validate_and_sort(
            vec![rec(0.7, 1.0, 2.0), rec(0.3, 1.0, 1.0), rec(0.3, 0.0, 3.0)],
            Mode::Calibration,
        )
        .unwrap();
        assert_eq!(
            ds.records(),
            &[rec(0.3, 1.0, 1.0), rec(0.3, 0.0, 3.0), rec(0.7, 1.0, 2.0)]
        );
        assert_eq!(ds.total_weight(), 6.0);
    }

    #[test]
    fn rejects_nonpositive_weight() {
        let err = validate_and_sort(vec![rec(0.5, 1.0, -1.0)], Mode::Calibration).unwrap_err();
        assert!(err.to_string().contains("nonpositive weight"));
        assert!(matches!(err, Error::NonpositiveWeight { index: 0, .. }));
        let err = validate_and_sort(
            vec![rec(0.5, 1.0, 1.0), rec(0.5, 1.0, 0.0)],
            Mode::Subpopulation,
        )
        .unwrap_err();
        assert!(matches!(err, Error::NonpositiveWeight { index: 1, .. }));
    }

    #[test]
    fn rejects_nan_weight_and_infinite_fields() {
        let err =
            validate_and_sort(vec![rec(0.5, 1.0, f64::NAN)], Mode::Subpopulation).unwrap_err();
        assert!(matches!(err, Error::NonpositiveWeight { index: 0, .. }));
        let err =
            validate_and_sort(vec![rec(0.5, 1.0, f64::INFINITY)], Mode::Subpopulation).unwrap_err();
        assert!(matches!(
            err,
            Error::NonFinite {
                field: "weight",
                ..
            }
        ));
        let err =
            validate_and_sort(vec![rec(f64::NAN, 1.0, 1.0)], Mode::Subpopulation).unwrap_err();
        assert!(matches!(err, Error::NonFinite { field: "score", .. }));
    }

    #[test]
    fn calibration_domain() {
        let err = validate_and_sort(vec![rec(1.5, 1.0, 1.0)], Mode::Calibration).unwrap_err();
        assert!(err.to_string().contains("score outside [0,1]"), "{err}");
        let err = validate_and_sort(vec![rec(0.5, 2.0, 1.0)], Mode::Calibration).unwrap_err();
        assert!(err.to_string().contains("response outside [0,1]"));
        assert!(validate_and_sort(vec![rec(1.5, -3.0, 1.0)], Mode::Subpopulation).is_ok());
    }

    #[test]
    fn empty_rejected() {
        assert!(matches!(
            validate_and_sort(vec![], Mode::Calibration),
            Err(Error::Empty)
        ));
    }

    #[test]
    fn duplicates_kept() {
        let ds = validate_and_sort(vec![rec(0.5, 1.0, 1.0); 3], Mode::Calibration).unwrap();
        assert_eq!(ds.len(), 3);
    }
}
