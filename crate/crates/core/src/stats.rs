//! Corpus-level label statistics.

use serde::Serialize;

use crate::error::Result;
use crate::label::{cooccurrence_counts, LabeledDataset};

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct LabelCount {
    pub label: String,
    pub count: usize,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct StatsReport {
    pub n: usize,
    pub label_counts: Vec<LabelCount>,
    /// Items with no active label.
    pub empty_count: usize,
    pub single_label_count: usize,
    pub multi_label_count: usize,
    pub multi_label_fraction: f64,
    pub mean_cardinality: f64,
}

pub fn dataset_statistics(data: &LabeledDataset) -> Result<StatsReport> {
    let counts = cooccurrence_counts(data)?;
    let n = data.len();
    let (mut empty, mut single, mut multi) = (0, 0, 0);
    for v in data.vectors() {
        match v.count_ones() {
            0 => empty += 1,
            1 => single += 1,
            _ => multi += 1,
        }
    }
    let total_active: usize = counts.marginals.iter().sum();
    Ok(StatsReport {
        n,
        label_counts: data
            .space()
            .names()
            .iter()
            .zip(&counts.marginals)
            .map(|(label, &count)| LabelCount {
                label: label.clone(),
                count,
            })
            .collect(),
        empty_count: empty,
        single_label_count: single,
        multi_label_count: multi,
        multi_label_fraction: multi as f64 / n as f64,
        mean_cardinality: total_active as f64 / n as f64,
    })
}
