//! Multi-annotator aggregation and agreement.
//!
//! Agreement statistics pool every `(item, label)` decision into one binary rating problem.
//! A per-label breakdown is reported alongside.

use serde::Serialize;

use crate::error::{Error, Result};
use crate::label::{LabelSpace, LabelVector, LabeledDataset};

#[derive(Debug, Clone, PartialEq)]
pub struct AnnotatedItem {
    pub id: String,
    pub annotations: Vec<LabelVector>,
}

/// Items with one label vector per annotator, annotators in a stable order.
#[derive(Debug, Clone)]
pub struct AnnotationSet {
    space: LabelSpace,
    items: Vec<AnnotatedItem>,
}

impl AnnotationSet {
    pub fn new(space: LabelSpace) -> Self {
        Self {
            space,
            items: Vec::new(),
        }
    }

    pub fn push(&mut self, id: impl Into<String>, annotations: Vec<LabelVector>) -> Result<()> {
        let id = id.into();
        if annotations.len() < 2 {
            return Err(Error::IncompleteAnnotation {
                id,
                reason: format!("{} annotator(s), need at least 2", annotations.len()),
            });
        }
        for a in &annotations {
            self.space.check_vector(a)?;
        }
        if self.items.iter().any(|item| item.id == id) {
            return Err(Error::DuplicateId(id));
        }
        self.items.push(AnnotatedItem { id, annotations });
        Ok(())
    }

    pub fn space(&self) -> &LabelSpace {
        &self.space
    }

    pub fn items(&self) -> &[AnnotatedItem] {
        &self.items
    }

    pub fn len(&self) -> usize {
        self.items.len()
    }

    pub fn is_empty(&self) -> bool {
        self.items.is_empty()
    }

    /// Annotator count shared by every item.
    pub fn uniform_annotator_count(&self) -> Result<usize> {
        let first = self.items.first().ok_or_else(|| Error::IncompleteAnnotation {
            id: String::new(),
            reason: "no annotated items".into(),
        })?;
        let a = first.annotations.len();
        for item in &self.items {
            if item.annotations.len() != a {
                return Err(Error::IncompleteAnnotation {
                    id: item.id.clone(),
                    reason: format!("{} annotators, expected {a}", item.annotations.len()),
                });
            }
        }
        Ok(a)
    }

    /// Majority-vote gold labels for every item.
    pub fn majority_gold(&self) -> Result<LabeledDataset> {
        let mut gold = LabeledDataset::new(self.space.clone());
        for item in &self.items {
            gold.push(item.id.clone(), majority_vote(&item.annotations)?)?;
        }
        Ok(gold)
    }

    /// `(annotator, label)`-indexed decisions flattened per `(item, label)` subject.
    fn subjects(&self, label: Option<usize>) -> impl Iterator<Item = Vec<bool>> + '_ {
        let labels: Vec<usize> = match label {
            Some(i) => vec![i],
            None => (0..self.space.len()).collect(),
        };
        self.items.iter().flat_map(move |item| {
            labels
                .clone()
                .into_iter()
                .map(move |i| item.annotations.iter().map(|a| a.get(i)).collect())
        })
    }
}

/// Per-label strict majority; an exact tie gives 0.
pub fn majority_vote(annotations: &[LabelVector]) -> Result<LabelVector> {
    if annotations.len() < 2 {
        return Err(Error::IncompleteAnnotation {
            id: String::new(),
            reason: format!("{} annotator(s), need at least 2", annotations.len()),
        });
    }
    let l = annotations[0].len();
    if let Some(bad) = annotations.iter().find(|a| a.len() != l) {
        return Err(Error::DimensionMismatch {
            expected: l,
            got: bad.len(),
        });
    }
    let a = annotations.len();
    let mut out = LabelVector::zeros(l);
    for i in 0..l {
        let yes = annotations.iter().filter(|v| v.get(i)).count();
        out.set(i, 2 * yes > a);
    }
    Ok(out)
}

/// Cohen's κ between two binary raters; 1 when chance agreement is already perfect.
pub fn cohen_kappa(a: &[bool], b: &[bool]) -> Result<f64> {
    if a.len() != b.len() {
        return Err(Error::LengthMismatch {
            pred: a.len(),
            gold: b.len(),
        });
    }
    if a.is_empty() {
        return Err(Error::EmptyInput);
    }
    let n = a.len() as f64;
    let agree = a.iter().zip(b).filter(|(x, y)| x == y).count() as f64;
    let pa = a.iter().filter(|&&x| x).count() as f64 / n;
    let pb = b.iter().filter(|&&x| x).count() as f64 / n;
    let po = agree / n;
    let pe = pa * pb + (1.0 - pa) * (1.0 - pb);
    if pe == 1.0 {
        return Ok(1.0);
    }
    Ok((po - pe) / (1.0 - pe))
}

fn rater_columns(subjects: &[Vec<bool>], raters: usize) -> Vec<Vec<bool>> {
    (0..raters)
        .map(|r| subjects.iter().map(|s| s[r]).collect())
        .collect()
}

fn pairwise_matrix(subjects: &[Vec<bool>], raters: usize) -> Result<Vec<Vec<f64>>> {
    let cols = rater_columns(subjects, raters);
    let mut m = vec![vec![1.0; raters]; raters];
    for a in 0..raters {
        for b in a + 1..raters {
            let k = cohen_kappa(&cols[a], &cols[b])?;
            m[a][b] = k;
            m[b][a] = k;
        }
    }
    Ok(m)
}

fn mean_off_diagonal(m: &[Vec<f64>]) -> f64 {
    let r = m.len();
    let mut sum = 0.0;
    for a in 0..r {
        for b in a + 1..r {
            sum += m[a][b];
        }
    }
    sum / (r * (r - 1) / 2) as f64
}

fn fleiss_binary(subjects: &[Vec<bool>], raters: usize) -> Result<f64> {
    if subjects.is_empty() {
        return Err(Error::EmptyInput);
    }
    let a = raters as f64;
    let mut agreement = 0.0;
    let mut yes_total = 0usize;
    for s in subjects {
        let yes = s.iter().filter(|&&x| x).count();
        let no = raters - yes;
        yes_total += yes;
        agreement += (yes * yes.saturating_sub(1) + no * no.saturating_sub(1)) as f64 / (a * (a - 1.0));
    }
    let n = subjects.len() as f64;
    let p_bar = agreement / n;
    let p_yes = yes_total as f64 / (n * a);
    let p_e = p_yes * p_yes + (1.0 - p_yes) * (1.0 - p_yes);
    if p_e == 1.0 {
        // Every rating falls in one category, so observed agreement is perfect as well.
        return Ok(1.0);
    }
    Ok((p_bar - p_e) / (1.0 - p_e))
}

/// Pairwise Cohen's κ between annotators over pooled `(item, label)` decisions.
pub fn cohen_kappa_pairwise(set: &AnnotationSet) -> Result<Vec<Vec<f64>>> {
    let raters = set.uniform_annotator_count()?;
    let subjects: Vec<_> = set.subjects(None).collect();
    pairwise_matrix(&subjects, raters)
}

/// Fleiss' κ over pooled `(item, label)` decisions with yes/no categories.
pub fn fleiss_kappa(set: &AnnotationSet) -> Result<f64> {
    let raters = set.uniform_annotator_count()?;
    let subjects: Vec<_> = set.subjects(None).collect();
    fleiss_binary(&subjects, raters)
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct LabelAgreement {
    pub label: String,
    pub fleiss_kappa: f64,
    pub mean_pairwise_cohen_kappa: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct AgreementReport {
    pub items: usize,
    pub annotators: usize,
    pub decisions: usize,
    pub fleiss_kappa: f64,
    pub pairwise_cohen_kappa: Vec<Vec<f64>>,
    pub mean_pairwise_cohen_kappa: f64,
    pub interpretation: &'static str,
    pub per_label: Vec<LabelAgreement>,
}

/// Landis-Koch style reading of a κ value.
pub fn interpret_kappa(kappa: f64) -> &'static str {
    if kappa < 0.0 {
        "poor"
    } else if kappa <= 0.20 {
        "slight"
    } else if kappa <= 0.40 {
        "fair"
    } else if kappa <= 0.60 {
        "moderate"
    } else if kappa <= 0.80 {
        "substantial"
    } else {
        "almost perfect"
    }
}

pub fn agreement_report(set: &AnnotationSet) -> Result<AgreementReport> {
    let raters = set.uniform_annotator_count()?;
    let pooled: Vec<_> = set.subjects(None).collect();
    let fleiss = fleiss_binary(&pooled, raters)?;
    let pairwise = pairwise_matrix(&pooled, raters)?;
    let mut per_label = Vec::with_capacity(set.space.len());
    for (i, name) in set.space.names().iter().enumerate() {
        let subjects: Vec<_> = set.subjects(Some(i)).collect();
        per_label.push(LabelAgreement {
            label: name.clone(),
            fleiss_kappa: fleiss_binary(&subjects, raters)?,
            mean_pairwise_cohen_kappa: mean_off_diagonal(&pairwise_matrix(&subjects, raters)?),
        });
    }
    Ok(AgreementReport {
        items: set.len(),
        annotators: raters,
        decisions: pooled.len(),
        fleiss_kappa: fleiss,
        mean_pairwise_cohen_kappa: mean_off_diagonal(&pairwise),
        pairwise_cohen_kappa: pairwise,
        interpretation: interpret_kappa(fleiss),
        per_label,
    })
}
