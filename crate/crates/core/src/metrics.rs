//! Multi-label evaluation metrics.
//!
//! Library functions return fractions. [`EvalReport::render_table`] formats accuracies and
//! Hamming loss as percentages with two decimals and F1 as a three-decimal fraction.

use std::fmt::Write as _;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::label::{CooccurrenceCounts, LabelSpace, LabelVector, LabeledDataset};

/// Value assigned to precision, recall or F1 when its denominator is zero.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(into = "u8", try_from = "u8")]
pub enum ZeroDivision {
    #[default]
    Zero,
    One,
}

impl ZeroDivision {
    pub fn value(self) -> f64 {
        match self {
            ZeroDivision::Zero => 0.0,
            ZeroDivision::One => 1.0,
        }
    }
}

impl From<ZeroDivision> for u8 {
    fn from(z: ZeroDivision) -> u8 {
        z.value() as u8
    }
}

impl TryFrom<u8> for ZeroDivision {
    type Error = String;

    fn try_from(v: u8) -> std::result::Result<Self, String> {
        match v {
            0 => Ok(ZeroDivision::Zero),
            1 => Ok(ZeroDivision::One),
            other => Err(format!("zero-division policy must be 0 or 1, got {other}")),
        }
    }
}

fn check_pair(pred: &[LabelVector], gold: &[LabelVector]) -> Result<usize> {
    if pred.len() != gold.len() {
        return Err(Error::LengthMismatch {
            pred: pred.len(),
            gold: gold.len(),
        });
    }
    let first = gold.first().ok_or(Error::EmptyInput)?;
    let l = first.len();
    for v in pred.iter().chain(gold) {
        if v.len() != l {
            return Err(Error::DimensionMismatch {
                expected: l,
                got: v.len(),
            });
        }
    }
    Ok(l)
}

/// Fraction of `(instance, label)` cells where prediction and gold differ.
pub fn hamming_loss(pred: &[LabelVector], gold: &[LabelVector]) -> Result<f64> {
    let l = check_pair(pred, gold)?;
    let wrong: usize = pred
        .iter()
        .zip(gold)
        .map(|(p, g)| (p.mask() ^ g.mask()).count_ones() as usize)
        .sum();
    Ok(wrong as f64 / (pred.len() * l) as f64)
}

/// Fraction of `(instance, label)` cells predicted correctly.
pub fn lexical_accuracy(pred: &[LabelVector], gold: &[LabelVector]) -> Result<f64> {
    let l = check_pair(pred, gold)?;
    let right: usize = pred
        .iter()
        .zip(gold)
        .map(|(p, g)| (0..l).filter(|&i| p.get(i) == g.get(i)).count())
        .sum();
    Ok(right as f64 / (pred.len() * l) as f64)
}

/// Fraction of instances whose whole vector matches.
pub fn vector_accuracy(pred: &[LabelVector], gold: &[LabelVector]) -> Result<f64> {
    check_pair(pred, gold)?;
    let exact = pred.iter().zip(gold).filter(|(p, g)| p == g).count();
    Ok(exact as f64 / pred.len() as f64)
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LabelMetrics {
    pub label: String,
    pub accuracy: f64,
    pub precision: f64,
    pub recall: f64,
    pub f1: f64,
    pub tp: usize,
    pub fp: usize,
    #[serde(rename = "fn")]
    pub fn_: usize,
    pub tn: usize,
}

fn ratio(num: usize, den: usize, policy: ZeroDivision) -> f64 {
    if den == 0 {
        policy.value()
    } else {
        num as f64 / den as f64
    }
}

/// Confusion counts and derived scores for every label of `space`.
pub fn per_label_metrics(
    pred: &[LabelVector],
    gold: &[LabelVector],
    space: &LabelSpace,
    policy: ZeroDivision,
) -> Result<Vec<LabelMetrics>> {
    let l = check_pair(pred, gold)?;
    if l != space.len() {
        return Err(Error::DimensionMismatch {
            expected: space.len(),
            got: l,
        });
    }
    let n = pred.len();
    Ok((0..l)
        .map(|i| {
            let (mut tp, mut fp, mut fn_) = (0, 0, 0);
            for (p, g) in pred.iter().zip(gold) {
                match (p.get(i), g.get(i)) {
                    (true, true) => tp += 1,
                    (true, false) => fp += 1,
                    (false, true) => fn_ += 1,
                    (false, false) => {}
                }
            }
            let tn = n - tp - fp - fn_;
            LabelMetrics {
                label: space.names()[i].clone(),
                accuracy: (tp + tn) as f64 / n as f64,
                precision: ratio(tp, tp + fp, policy),
                recall: ratio(tp, tp + fn_, policy),
                f1: ratio(2 * tp, 2 * tp + fp + fn_, policy),
                tp,
                fp,
                fn_,
                tn,
            }
        })
        .collect())
}

/// Unweighted mean of per-label F1.
pub fn macro_f1(
    pred: &[LabelVector],
    gold: &[LabelVector],
    space: &LabelSpace,
    policy: ZeroDivision,
) -> Result<f64> {
    let per_label = per_label_metrics(pred, gold, space, policy)?;
    Ok(per_label.iter().map(|m| m.f1).sum::<f64>() / per_label.len() as f64)
}

/// Co-occurrence counts among predicted labels; `len` is the label count.
pub fn predicted_cooccurrence(pred: &[LabelVector], len: usize) -> Vec<Vec<usize>> {
    CooccurrenceCounts::from_vectors(len, pred).joint
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EvalReport {
    pub n: usize,
    pub lexical_accuracy: f64,
    pub vector_accuracy: f64,
    pub hamming_loss: f64,
    pub macro_f1: f64,
    pub zero_division_policy: ZeroDivision,
    pub per_label: Vec<LabelMetrics>,
}

/// Full report comparing aligned prediction and gold vectors.
pub fn evaluate(
    pred: &[LabelVector],
    gold: &[LabelVector],
    space: &LabelSpace,
    policy: ZeroDivision,
) -> Result<EvalReport> {
    let per_label = per_label_metrics(pred, gold, space, policy)?;
    let lexical = lexical_accuracy(pred, gold)?;
    let hamming = hamming_loss(pred, gold)?;
    debug_assert_eq!(lexical + hamming, 1.0);
    Ok(EvalReport {
        n: pred.len(),
        lexical_accuracy: lexical,
        vector_accuracy: vector_accuracy(pred, gold)?,
        hamming_loss: hamming,
        macro_f1: per_label.iter().map(|m| m.f1).sum::<f64>() / per_label.len() as f64,
        zero_division_policy: policy,
        per_label,
    })
}

/// Aligns predictions with gold by id (gold may hold extra ids) and evaluates.
pub fn evaluate_datasets(
    pred: &LabeledDataset,
    gold: &LabeledDataset,
    policy: ZeroDivision,
) -> Result<EvalReport> {
    pred.space().check_same(gold.space())?;
    let mut p = Vec::with_capacity(pred.len());
    let mut g = Vec::with_capacity(pred.len());
    for item in pred.items() {
        let gold_vec = gold
            .get(&item.id)
            .ok_or_else(|| Error::MissingGold(item.id.clone()))?;
        p.push(item.labels);
        g.push(*gold_vec);
    }
    evaluate(&p, &g, pred.space(), policy)
}

fn pct(x: f64) -> String {
    format!("{:.2}", 100.0 * x)
}

impl EvalReport {
    pub fn render_table(&self) -> String {
        let mut out = String::new();
        let _ = writeln!(out, "instances         {}", self.n);
        let _ = writeln!(out, "lexical accuracy  {}", pct(self.lexical_accuracy));
        let _ = writeln!(out, "vector accuracy   {}", pct(self.vector_accuracy));
        let _ = writeln!(out, "hamming loss      {}", pct(self.hamming_loss));
        let _ = writeln!(out, "macro f1          {:.3}", self.macro_f1);
        let _ = writeln!(out);
        let width = self.per_label.iter().map(|m| m.label.len()).max().unwrap_or(5).max(5);
        let _ = writeln!(
            out,
            "{:<width$}  {:>8}  {:>9}  {:>6}  {:>5}  {:>6} {:>6} {:>6} {:>6}",
            "label", "accuracy", "precision", "recall", "f1", "tp", "fp", "fn", "tn"
        );
        for m in &self.per_label {
            let _ = writeln!(
                out,
                "{:<width$}  {:>8}  {:>9.3}  {:>6.3}  {:>5.3}  {:>6} {:>6} {:>6} {:>6}",
                m.label,
                pct(m.accuracy),
                m.precision,
                m.recall,
                m.f1,
                m.tp,
                m.fp,
                m.fn_,
                m.tn
            );
        }
        out
    }
}
