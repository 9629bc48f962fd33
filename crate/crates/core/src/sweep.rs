//! Evaluation across a grid of prior weights.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::infer::{check_alpha, infer_batch};
use crate::label::{LabelVector, LabeledDataset};
use crate::likelihood::LikelihoodRecord;
use crate::metrics::{evaluate, EvalReport, ZeroDivision};
use crate::prior::IsingPrior;

/// Prior weights evaluated when the caller supplies none.
pub const DEFAULT_ALPHAS: [f64; 8] = [0.0, 0.1, 0.25, 0.5, 0.75, 1.0, 2.0, 5.0];

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SweepPoint {
    pub alpha: f64,
    pub report: EvalReport,
}

/// Best α per metric; ties go to the smaller α.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BestAlphas {
    pub lexical_accuracy: f64,
    pub vector_accuracy: f64,
    pub hamming_loss: f64,
    pub macro_f1: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SweepReport {
    pub points: Vec<SweepPoint>,
    pub best: BestAlphas,
}

impl SweepReport {
    pub fn point(&self, alpha: f64) -> Option<&SweepPoint> {
        self.points.iter().find(|p| p.alpha == alpha)
    }
}

fn best_by<F>(points: &[SweepPoint], key: F, maximize: bool) -> f64
where
    F: Fn(&EvalReport) -> f64,
{
    let mut best: Option<(f64, f64)> = None;
    for p in points {
        let value = key(&p.report);
        let better = match best {
            None => true,
            Some((alpha, current)) => {
                let improves = if maximize { value > current } else { value < current };
                improves || (value == current && p.alpha < alpha)
            }
        };
        if better {
            best = Some((p.alpha, value));
        }
    }
    best.map(|(alpha, _)| alpha).expect("sweep has at least one point")
}

/// Runs inference and evaluation for each α (the default grid when `alphas` is `None`).
pub fn alpha_sweep(
    records: &[LikelihoodRecord],
    gold: &LabeledDataset,
    prior: &IsingPrior,
    alphas: Option<&[f64]>,
    policy: ZeroDivision,
) -> Result<SweepReport> {
    let alphas = alphas.unwrap_or(&DEFAULT_ALPHAS);
    if alphas.is_empty() {
        return Err(Error::EmptyAlphaGrid);
    }
    for &alpha in alphas {
        check_alpha(alpha)?;
    }
    gold.space().check_same(prior.space())?;
    let gold_vectors: Vec<LabelVector> = records
        .iter()
        .map(|r| {
            gold.get(&r.id)
                .copied()
                .ok_or_else(|| Error::MissingGold(r.id.clone()))
        })
        .collect::<Result<_>>()?;

    let mut points = Vec::with_capacity(alphas.len());
    for &alpha in alphas {
        let results = infer_batch(records, prior, alpha)?;
        let pred: Vec<LabelVector> = results.iter().map(|r| r.map_vector).collect();
        points.push(SweepPoint {
            alpha,
            report: evaluate(&pred, &gold_vectors, gold.space(), policy)?,
        });
    }
    let best = BestAlphas {
        lexical_accuracy: best_by(&points, |r| r.lexical_accuracy, true),
        vector_accuracy: best_by(&points, |r| r.vector_accuracy, true),
        hamming_loss: best_by(&points, |r| r.hamming_loss, false),
        macro_f1: best_by(&points, |r| r.macro_f1, true),
    };
    Ok(SweepReport { points, best })
}
