//! Per-label Bernoulli likelihoods built from classifier yes/no scores.

use crate::error::{Error, Result};
use crate::label::{LabelSpace, LabelVector};

/// Probability floor applied before taking logs.
pub const PROBABILITY_FLOOR: f64 = 1e-9;

fn clamp_probability(p: f64) -> f64 {
    p.clamp(PROBABILITY_FLOOR, 1.0 - PROBABILITY_FLOOR)
}

/// Two-way softmax of a yes/no logit pair, clamped into `[δ, 1 − δ]`.
pub fn logits_to_probs(yes_logit: f64, no_logit: f64) -> Result<(f64, f64)> {
    if !yes_logit.is_finite() || !no_logit.is_finite() {
        return Err(Error::NonFiniteLogit {
            label: String::new(),
        });
    }
    let d = yes_logit - no_logit;
    let p1 = if d >= 0.0 {
        1.0 / (1.0 + (-d).exp())
    } else {
        let e = d.exp();
        e / (1.0 + e)
    };
    let p0 = 1.0 - p1;
    Ok((clamp_probability(p1), clamp_probability(p0)))
}

/// How a record's `(p1, p0)` pairs are obtained from raw scores.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum PairHandling {
    /// Rescale each pair to sum to one.
    #[default]
    Normalize,
    /// Keep pairs as given (only floored). Argmax decisions are unaffected.
    Preserve,
}

/// Likelihood terms `p_i^(1)` and `p_i^(0)` for one instance.
#[derive(Debug, Clone, PartialEq)]
pub struct LikelihoodRecord {
    pub id: String,
    space: LabelSpace,
    p1: Vec<f64>,
    p0: Vec<f64>,
    /// Parsed 1-5 confidence per label, when the source carried one. Not used in inference.
    pub confidence: Vec<Option<u8>>,
}

impl LikelihoodRecord {
    fn build(id: String, space: LabelSpace, p1: Vec<f64>, p0: Vec<f64>) -> Self {
        let l = space.len();
        Self {
            id,
            space,
            p1,
            p0,
            confidence: vec![None; l],
        }
    }

    fn check_len(space: &LabelSpace, got: usize) -> Result<()> {
        if got == space.len() {
            Ok(())
        } else {
            Err(Error::DimensionMismatch {
                expected: space.len(),
                got,
            })
        }
    }

    /// From `(yes_logit, no_logit)` per label.
    pub fn from_logits(id: impl Into<String>, space: LabelSpace, logits: &[(f64, f64)]) -> Result<Self> {
        Self::check_len(&space, logits.len())?;
        let mut p1 = Vec::with_capacity(logits.len());
        let mut p0 = Vec::with_capacity(logits.len());
        for (i, &(yes, no)) in logits.iter().enumerate() {
            let (a, b) = logits_to_probs(yes, no).map_err(|_| Error::NonFiniteLogit {
                label: space.names()[i].clone(),
            })?;
            p1.push(a);
            p0.push(b);
        }
        Ok(Self::build(id.into(), space, p1, p0))
    }

    /// From the "yes" probability alone, with `p0 = 1 − p1`.
    pub fn from_p1(id: impl Into<String>, space: LabelSpace, p1: &[f64]) -> Result<Self> {
        Self::check_len(&space, p1.len())?;
        let mut yes = Vec::with_capacity(p1.len());
        let mut no = Vec::with_capacity(p1.len());
        for (i, &p) in p1.iter().enumerate() {
            if !(0.0..=1.0).contains(&p) {
                return Err(Error::InvalidProbability {
                    label: space.names()[i].clone(),
                    value: p,
                });
            }
            yes.push(clamp_probability(p));
            no.push(clamp_probability(1.0 - p));
        }
        Ok(Self::build(id.into(), space, yes, no))
    }

    /// From explicit `(p1, p0)` pairs. Entries must be finite and non-negative with a positive sum.
    pub fn from_pairs(
        id: impl Into<String>,
        space: LabelSpace,
        pairs: &[(f64, f64)],
        handling: PairHandling,
    ) -> Result<Self> {
        Self::check_len(&space, pairs.len())?;
        let mut p1 = Vec::with_capacity(pairs.len());
        let mut p0 = Vec::with_capacity(pairs.len());
        for (i, &(a, b)) in pairs.iter().enumerate() {
            for value in [a, b] {
                if !value.is_finite() || value < 0.0 {
                    return Err(Error::InvalidProbability {
                        label: space.names()[i].clone(),
                        value,
                    });
                }
            }
            if a + b <= 0.0 {
                return Err(Error::InvalidProbability {
                    label: space.names()[i].clone(),
                    value: 0.0,
                });
            }
            match handling {
                PairHandling::Normalize => {
                    let s = a + b;
                    p1.push(clamp_probability(a / s));
                    p0.push(clamp_probability(b / s));
                }
                PairHandling::Preserve => {
                    p1.push(a.max(PROBABILITY_FLOOR));
                    p0.push(b.max(PROBABILITY_FLOOR));
                }
            }
        }
        Ok(Self::build(id.into(), space, p1, p0))
    }

    pub fn space(&self) -> &LabelSpace {
        &self.space
    }

    pub fn p1(&self) -> &[f64] {
        &self.p1
    }

    pub fn p0(&self) -> &[f64] {
        &self.p0
    }

    pub fn len(&self) -> usize {
        self.p1.len()
    }

    pub fn is_empty(&self) -> bool {
        self.p1.is_empty()
    }

    pub fn with_confidence(mut self, confidence: Vec<Option<u8>>) -> Self {
        debug_assert_eq!(confidence.len(), self.len());
        self.confidence = confidence;
        self
    }

    pub(crate) fn log_terms(&self) -> (Vec<f64>, Vec<f64>) {
        (
            self.p1.iter().map(|p| p.ln()).collect(),
            self.p0.iter().map(|p| p.ln()).collect(),
        )
    }
}

pub(crate) fn likelihood_mask(log_p1: &[f64], log_p0: &[f64], mask: u32) -> f64 {
    let mut total = 0.0;
    for i in 0..log_p1.len() {
        total += if mask >> i & 1 == 1 { log_p1[i] } else { log_p0[i] };
    }
    total
}

/// `Σ_i [E_i log p_i^(1) + (1 − E_i) log p_i^(0)]`.
pub fn likelihood_log_score(labels: &LabelVector, rec: &LikelihoodRecord) -> Result<f64> {
    rec.space.check_vector(labels)?;
    let (lp1, lp0) = rec.log_terms();
    Ok(likelihood_mask(&lp1, &lp0, labels.mask()))
}

/// Independent per-label decision: label `i` is active iff `p1[i] > p0[i]`.
pub fn threshold_decode(rec: &LikelihoodRecord) -> LabelVector {
    let mut v = LabelVector::zeros(rec.len());
    for (i, (a, b)) in rec.p1.iter().zip(&rec.p0).enumerate() {
        v.set(i, a > b);
    }
    v
}
