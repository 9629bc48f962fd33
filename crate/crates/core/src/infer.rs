//! Exact MAP inference by exhaustive enumeration.
//!
//! The a-posteriori log-objective of a configuration `E` is
//!
//! ```text
//! Σ_i [E_i log p_i^(1) + (1 − E_i) log p_i^(0)] + α [Σ_i θ_i E_i + Σ_{i<j} θ_ij E_i E_j]
//! ```
//!
//! which differs from the reduced form `Σ_i E_i log(p_i^(1) / p_i^(0)) + α[...]` only by the
//! configuration-independent constant `Σ_i log p_i^(0)`. The full form is what gets reported.
//!
//! Ties in the objective go to the configuration with fewer active labels, then to the
//! lexicographically smallest bit pattern in declared label order.

use std::cmp::Ordering;

use serde::Serialize;

use crate::error::{Error, Result};
use crate::label::{configurations, LabelSpace, LabelVector};
use crate::likelihood::{likelihood_mask, threshold_decode, LikelihoodRecord};
use crate::prior::IsingPrior;

/// Prior weight and label space for a run of inference.
#[derive(Debug, Clone, PartialEq)]
pub struct InferenceConfig {
    alpha: f64,
    space: LabelSpace,
}

impl InferenceConfig {
    pub fn new(alpha: f64, space: LabelSpace) -> Result<Self> {
        check_alpha(alpha)?;
        Ok(Self { alpha, space })
    }

    pub fn alpha(&self) -> f64 {
        self.alpha
    }

    pub fn space(&self) -> &LabelSpace {
        &self.space
    }
}

pub(crate) fn check_alpha(alpha: f64) -> Result<()> {
    if alpha.is_finite() && alpha >= 0.0 {
        Ok(())
    } else {
        Err(Error::NegativeAlpha(alpha))
    }
}

/// `true` when `candidate` should replace `incumbent` among equal objectives.
fn wins_tie(candidate: &LabelVector, incumbent: &LabelVector) -> bool {
    match candidate.count_ones().cmp(&incumbent.count_ones()) {
        Ordering::Less => true,
        Ordering::Greater => false,
        Ordering::Equal => candidate.lex_cmp(incumbent) == Ordering::Less,
    }
}

/// Maximizes `objective` over all `2^len` masks, applying the global tie rule.
pub(crate) fn exhaustive_argmax<F>(len: usize, objective: F) -> (LabelVector, f64)
where
    F: Fn(u32) -> f64,
{
    let mut best = LabelVector::zeros(len);
    let mut best_value = objective(0);
    for candidate in configurations(len).skip(1) {
        let value = objective(candidate.mask());
        if value > best_value || (value == best_value && wins_tie(&candidate, &best)) {
            best = candidate;
            best_value = value;
        }
    }
    (best, best_value)
}

struct Objective<'a> {
    log_p1: Vec<f64>,
    log_p0: Vec<f64>,
    prior: &'a IsingPrior,
    alpha: f64,
}

impl<'a> Objective<'a> {
    fn new(rec: &LikelihoodRecord, prior: &'a IsingPrior, alpha: f64) -> Result<Self> {
        check_alpha(alpha)?;
        rec.space().check_same(prior.space())?;
        let (log_p1, log_p0) = rec.log_terms();
        Ok(Self {
            log_p1,
            log_p0,
            prior,
            alpha,
        })
    }

    fn eval(&self, mask: u32) -> f64 {
        likelihood_mask(&self.log_p1, &self.log_p0, mask) + self.alpha * self.prior.score_mask(mask)
    }
}

/// Likelihood log-score plus `alpha` times the prior log-score.
pub fn posterior_log_objective(
    labels: &LabelVector,
    rec: &LikelihoodRecord,
    prior: &IsingPrior,
    alpha: f64,
) -> Result<f64> {
    let objective = Objective::new(rec, prior, alpha)?;
    rec.space().check_vector(labels)?;
    Ok(objective.eval(labels.mask()))
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct MapResult {
    pub id: String,
    pub map_vector: LabelVector,
    /// Full log-objective at `map_vector` (a log-posterior up to `log Z`).
    pub objective: f64,
    /// Independent per-label decision, for reporting what the prior changed.
    pub baseline_vector: LabelVector,
}

impl MapResult {
    /// Labels switched on by inference relative to the baseline.
    pub fn added(&self) -> Vec<usize> {
        self.map_vector
            .active()
            .filter(|&i| !self.baseline_vector.get(i))
            .collect()
    }

    /// Labels switched off by inference relative to the baseline.
    pub fn removed(&self) -> Vec<usize> {
        self.baseline_vector
            .active()
            .filter(|&i| !self.map_vector.get(i))
            .collect()
    }
}

/// Exact MAP label vector for one record.
pub fn map_infer(rec: &LikelihoodRecord, prior: &IsingPrior, alpha: f64) -> Result<MapResult> {
    let objective = Objective::new(rec, prior, alpha)?;
    let (map_vector, value) = exhaustive_argmax(rec.len(), |mask| objective.eval(mask));
    Ok(MapResult {
        id: rec.id.clone(),
        map_vector,
        objective: value,
        baseline_vector: threshold_decode(rec),
    })
}

/// [`map_infer`] over every record, preserving input order.
pub fn infer_batch(records: &[LikelihoodRecord], prior: &IsingPrior, alpha: f64) -> Result<Vec<MapResult>> {
    check_alpha(alpha)?;
    records
        .iter()
        .map(|rec| map_infer(rec, prior, alpha).map_err(|e| Error::for_record(&rec.id, e)))
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::likelihood::{likelihood_log_score, PairHandling};
    use crate::prior::prior_log_score;

    fn space(n: usize) -> LabelSpace {
        LabelSpace::new((0..n).map(|i| format!("l{i}"))).unwrap()
    }

    fn v(bits: &[u8]) -> LabelVector {
        LabelVector::from_bits(bits).unwrap()
    }

    fn pairs(rec: &[(f64, f64)]) -> LikelihoodRecord {
        LikelihoodRecord::from_pairs("r", space(rec.len()), rec, PairHandling::Normalize).unwrap()
    }

    fn coupled_pair_fixture() -> (LikelihoodRecord, IsingPrior) {
        let rec = pairs(&[(0.9, 0.1), (0.45, 0.55)]);
        let prior = IsingPrior::from_parameters(space(2), vec![0.0, 0.0], &[(0, 1, 1.0)]).unwrap();
        (rec, prior)
    }

    #[test]
    fn alpha_zero_is_likelihood() {
        let (rec, prior) = coupled_pair_fixture();
        for e in configurations(2) {
            assert_eq!(
                posterior_log_objective(&e, &rec, &prior, 0.0).unwrap(),
                likelihood_log_score(&e, &rec).unwrap()
            );
        }
    }

    #[test]
    fn all_zero_objective_is_sum_log_p0() {
        let (rec, prior) = coupled_pair_fixture();
        let expected: f64 = rec.p0().iter().map(|p| p.ln()).sum();
        for alpha in [0.0, 1.0, 7.5] {
            let got = posterior_log_objective(&v(&[0, 0]), &rec, &prior, alpha).unwrap();
            assert!((got - expected).abs() < 1e-15);
        }
    }

    #[test]
    fn coupling_flips_second_label() {
        let (rec, prior) = coupled_pair_fixture();
        let base = posterior_log_objective(&v(&[0, 0]), &rec, &prior, 1.0).unwrap();
        let rel: Vec<f64> = configurations(2)
            .map(|e| posterior_log_objective(&e, &rec, &prior, 1.0).unwrap() - base)
            .collect();
        let expected = [
            0.0,
            9f64.ln(),
            (0.45f64 / 0.55).ln(),
            9f64.ln() + (0.45f64 / 0.55).ln() + 1.0,
        ];
        for (got, want) in rel.iter().zip(expected) {
            assert!((got - want).abs() < 1e-12);
        }
        assert!((rel[3] - 2.996).abs() < 1e-3);
        assert!((rel[1] - 2.197).abs() < 5e-4);
        assert!((rel[2] + 0.201).abs() < 5e-4);

        let result = map_infer(&rec, &prior, 1.0).unwrap();
        assert_eq!(result.map_vector, v(&[1, 1]));
        assert_eq!(result.baseline_vector, v(&[1, 0]));
        assert_eq!(result.added(), vec![1]);
        assert!(result.removed().is_empty());
        assert_eq!(
            result.objective,
            posterior_log_objective(&result.map_vector, &rec, &prior, 1.0).unwrap()
        );
    }

    #[test]
    fn alpha_zero_reduces_to_threshold() {
        let rec = pairs(&[(0.9, 0.1), (0.2, 0.8)]);
        let prior = IsingPrior::from_parameters(space(2), vec![3.0, 3.0], &[(0, 1, 5.0)]).unwrap();
        assert_eq!(map_infer(&rec, &prior, 0.0).unwrap().map_vector, v(&[1, 0]));
    }

    #[test]
    fn huge_alpha_follows_prior_mode() {
        let prior = IsingPrior::from_parameters(
            space(4),
            vec![-0.5, -0.5, -1.0, -1.0],
            &[(0, 1, 2.0)],
        )
        .unwrap();
        let rec = pairs(&[(0.01, 0.99), (0.2, 0.8), (0.99, 0.01), (0.7, 0.3)]);
        let r = map_infer(&rec, &prior, 1e9).unwrap();
        assert_eq!(r.map_vector, v(&[1, 1, 0, 0]));
    }

    #[test]
    fn ties_prefer_fewer_labels_then_lexicographic() {
        // Flat objective: every configuration ties, all-zero wins.
        let rec = pairs(&[(0.5, 0.5); 3]);
        let prior = IsingPrior::uninformative(space(3));
        assert_eq!(map_infer(&rec, &prior, 1.0).unwrap().map_vector, v(&[0, 0, 0]));

        // (1,0) and (0,1) tie above (0,0) and (1,1); lexicographic order picks (0,1).
        let prior = IsingPrior::from_parameters(space(2), vec![1.0, 1.0], &[(0, 1, -5.0)]).unwrap();
        let rec = pairs(&[(0.5, 0.5), (0.5, 0.5)]);
        assert_eq!(map_infer(&rec, &prior, 1.0).unwrap().map_vector, v(&[0, 1]));
    }

    #[test]
    fn rejects_bad_inputs() {
        let (rec, prior) = coupled_pair_fixture();
        assert!(matches!(map_infer(&rec, &prior, -0.1), Err(Error::NegativeAlpha(_))));
        assert!(matches!(map_infer(&rec, &prior, f64::NAN), Err(Error::NegativeAlpha(_))));
        let other = IsingPrior::uninformative(space(3));
        assert!(matches!(map_infer(&rec, &other, 1.0), Err(Error::SpaceMismatch)));
        assert!(matches!(
            posterior_log_objective(&v(&[1, 0, 0]), &rec, &prior, 1.0),
            Err(Error::DimensionMismatch { .. })
        ));
        assert!(InferenceConfig::new(-1.0, space(2)).is_err());
        assert_eq!(InferenceConfig::new(0.25, space(2)).unwrap().alpha(), 0.25);
    }

    #[test]
    fn batch_matches_single_calls() {
        let (rec, prior) = coupled_pair_fixture();
        assert!(infer_batch(&[], &prior, 1.0).unwrap().is_empty());

        let mut records = vec![rec.clone(), rec.clone(), pairs(&[(0.3, 0.7), (0.6, 0.4)])];
        records[2].id = "other".into();
        let batch = infer_batch(&records, &prior, 1.0).unwrap();
        assert_eq!(batch[0], batch[1]);
        for (r, out) in records.iter().zip(&batch) {
            assert_eq!(out, &map_infer(r, &prior, 1.0).unwrap());
        }

        let mut bad = records.clone();
        bad.push(LikelihoodRecord::from_p1("wide", space(3), &[0.5; 3]).unwrap());
        match infer_batch(&bad, &prior, 1.0) {
            Err(Error::Record { id, .. }) => assert_eq!(id, "wide"),
            other => panic!("unexpected {other:?}"),
        }
    }

    #[test]
    fn reduced_form_has_same_argmax() {
        let rec = pairs(&[(0.7, 0.3), (0.4, 0.6), (0.52, 0.48)]);
        let prior = IsingPrior::from_parameters(
            space(3),
            vec![-0.3, 0.4, -1.0],
            &[(0, 1, 0.8), (1, 2, -1.5), (0, 2, 0.6)],
        )
        .unwrap();
        let reduced = |e: &LabelVector| -> f64 {
            let lik: f64 = e.active().map(|i| (rec.p1()[i] / rec.p0()[i]).ln()).sum();
            lik + 0.75 * prior_log_score(e, &prior).unwrap()
        };
        let best = configurations(3)
            .max_by(|a, b| reduced(a).partial_cmp(&reduced(b)).unwrap())
            .unwrap();
        assert_eq!(map_infer(&rec, &prior, 0.75).unwrap().map_vector, best);
    }

    proptest::proptest! {
        #[test]
        fn map_is_optimal(
            p in proptest::collection::vec(0.001f64..0.999, 5),
            bias in proptest::collection::vec(-2.0f64..2.0, 5),
            coupling in proptest::collection::vec(-2.0f64..2.0, 10),
            alpha in 0.0f64..5.0,
        ) {
            let rec = LikelihoodRecord::from_p1("r", space(5), &p).unwrap();
            let mut prior = IsingPrior::uninformative(space(5));
            for (i, b) in bias.iter().enumerate() {
                prior.set_bias(i, *b).unwrap();
            }
            let mut k = 0;
            for i in 0..5 {
                for j in i + 1..5 {
                    prior.set_coupling(i, j, coupling[k]).unwrap();
                    k += 1;
                }
            }
            let r = map_infer(&rec, &prior, alpha).unwrap();
            for e in configurations(5) {
                proptest::prop_assert!(r.objective >= posterior_log_objective(&e, &rec, &prior, alpha).unwrap());
            }
        }

        #[test]
        fn scaling_pairs_keeps_map(
            pairs_in in proptest::collection::vec((0.01f64..1.0, 0.01f64..1.0), 4),
            c in 0.05f64..20.0,
            alpha in 0.0f64..3.0,
        ) {
            let prior = IsingPrior::from_parameters(space(4), vec![0.2, -0.4, 0.1, -0.8], &[(0, 1, 1.1), (2, 3, -0.7), (1, 3, 0.5)]).unwrap();
            let scaled: Vec<_> = pairs_in.iter().map(|&(a, b)| (a * c, b * c)).collect();
            let r = LikelihoodRecord::from_pairs("r", space(4), &pairs_in, PairHandling::Preserve).unwrap();
            let s = LikelihoodRecord::from_pairs("r", space(4), &scaled, PairHandling::Preserve).unwrap();
            proptest::prop_assert_eq!(
                map_infer(&r, &prior, alpha).unwrap().map_vector,
                map_infer(&s, &prior, alpha).unwrap().map_vector
            );
        }
    }
}
