//! Random dataset generators shared by the integration tests.
#![allow(dead_code)]

use cumdiff::prelude::*;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Responses {
    Bernoulli,
    Continuous,
}

/// One generated case: the (sub)population and, in subpopulation mode, a
/// full population that contains it.
#[derive(Debug, Clone)]
pub struct Case {
    pub records: Vec<ScoredRecord>,
    pub full: Option<Vec<ScoredRecord>>,
    pub mode: Mode,
}

impl Case {
    pub fn dataset(&self) -> ValidatedDataset {
        validate_and_sort(self.records.clone(), self.mode).unwrap()
    }

    pub fn null(&self, agg: &AggregatedDataset) -> NullModel {
        match &self.full {
            None => calibration_null(agg),
            Some(full) => {
                let full = validate_and_sort(full.clone(), Mode::Subpopulation).unwrap();
                subpopulation_null(agg, &FullPopulationReference::new(full)).unwrap()
            }
        }
    }
}

pub fn log_uniform(rng: &mut impl Rng, lo: f64, hi: f64) -> f64 {
    (rng.random_range(lo.ln()..hi.ln())).exp()
}

/// Up to `max_scores` distinct scores in (0, 1), each repeated 1 to
/// `max_multiplicity` times, with log-uniform weights in [0.1, 10]. Records
/// come out shuffled.
pub fn random_records(
    rng: &mut impl Rng,
    max_scores: usize,
    max_multiplicity: usize,
    responses: Responses,
    continuous: impl Fn(&mut ChaCha8Rng, f64) -> f64,
    inner: &mut ChaCha8Rng,
) -> Vec<ScoredRecord> {
    let n = rng.random_range(1..=max_scores);
    let mut scores: Vec<f64> = (0..n).map(|_| rng.random_range(0.01..0.99)).collect();
    scores.sort_by(f64::total_cmp);
    scores.dedup();
    let mut records = Vec::new();
    for &s in &scores {
        for _ in 0..rng.random_range(1..=max_multiplicity) {
            let w = log_uniform(rng, 0.1, 10.0);
            let r = match responses {
                Responses::Bernoulli => f64::from(u8::from(rng.random::<f64>() < s)),
                Responses::Continuous => continuous(inner, s),
            };
            records.push(ScoredRecord::new(s, r, w));
        }
    }
    use rand::seq::SliceRandom;
    records.shuffle(rng);
    records
}

/// Case `index` of the acceptance corpus: cycles through calibration and
/// subpopulation modes with Bernoulli and continuous responses.
pub fn corpus_case(index: u64, max_scores: usize, max_multiplicity: usize) -> Case {
    let mut rng = ChaCha8Rng::seed_from_u64(0xC0FFEE ^ index);
    let mut inner = ChaCha8Rng::seed_from_u64(0xBEEF ^ index);
    let responses = if index.is_multiple_of(2) {
        Responses::Bernoulli
    } else {
        Responses::Continuous
    };
    if index % 4 < 2 {
        let records = random_records(
            &mut rng,
            max_scores,
            max_multiplicity,
            responses,
            |r, _| r.random::<f64>(),
            &mut inner,
        );
        Case {
            records,
            full: None,
            mode: Mode::Calibration,
        }
    } else {
        let normal = |r: &mut ChaCha8Rng, s: f64| {
            let z: f64 = r.sample(rand_distr::StandardNormal);
            3.0 * s + z
        };
        let records = random_records(
            &mut rng,
            max_scores,
            max_multiplicity,
            responses,
            normal,
            &mut inner,
        );
        let mut full = records.clone();
        full.extend(random_records(
            &mut rng,
            max_scores,
            max_multiplicity,
            responses,
            normal,
            &mut inner,
        ));
        Case {
            records,
            full: Some(full),
            mode: Mode::Subpopulation,
        }
    }
}
