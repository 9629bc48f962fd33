//! Maximum-entropy Ising prior over label vectors.
//!
//! The prior scores a configuration `E` with the unnormalized exponent
//!
//! ```text
//! s(E) = Σ_i θ_i E_i + Σ_{i<j} θ_ij E_i E_j
//! ```
//!
//! Parameters come from closed-form moment matching on a labeled corpus: `θ_i` is the
//! log-odds of label `i` and `θ_ij` the log ratio between the joint frequency of `(i, j)`
//! and the product of their marginals. The partition function is never stored; only
//! [`sample_prior`] normalizes, and only transiently.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::infer::exhaustive_argmax;
use crate::label::{cooccurrence_counts, configurations, LabelSpace, LabelVector, LabeledDataset};

/// Default add-ε pseudo-count used during estimation.
pub const DEFAULT_EPSILON: f64 = 0.5;

#[derive(Debug, Clone, PartialEq)]
pub struct IsingPrior {
    space: LabelSpace,
    bias: Vec<f64>,
    /// Strict upper triangle, row-major: (0,1), (0,2), ..., (1,2), ...
    coupling: Vec<f64>,
    epsilon: f64,
    source: Option<String>,
}

fn pair_index(len: usize, i: usize, j: usize) -> usize {
    debug_assert!(i < j && j < len);
    i * (2 * len - i - 1) / 2 + (j - i - 1)
}

impl IsingPrior {
    /// Prior with every parameter zero.
    pub fn uninformative(space: LabelSpace) -> Self {
        let l = space.len();
        Self {
            bias: vec![0.0; l],
            coupling: vec![0.0; l * (l - 1) / 2],
            space,
            epsilon: 0.0,
            source: None,
        }
    }

    /// Builds a prior from biases and a list of `(i, j, θ_ij)` couplings; unlisted pairs are zero.
    pub fn from_parameters(
        space: LabelSpace,
        bias: Vec<f64>,
        couplings: &[(usize, usize, f64)],
    ) -> Result<Self> {
        if bias.len() != space.len() {
            return Err(Error::DimensionMismatch {
                expected: space.len(),
                got: bias.len(),
            });
        }
        let mut prior = Self::uninformative(space);
        prior.bias = bias;
        for &(i, j, value) in couplings {
            prior.set_coupling(i, j, value)?;
        }
        Ok(prior)
    }

    pub fn space(&self) -> &LabelSpace {
        &self.space
    }

    pub fn bias(&self) -> &[f64] {
        &self.bias
    }

    pub fn set_bias(&mut self, i: usize, value: f64) -> Result<()> {
        self.space.check_index(i)?;
        self.bias[i] = value;
        Ok(())
    }

    /// Symmetric view of the coupling; zero on the diagonal.
    pub fn coupling(&self, i: usize, j: usize) -> f64 {
        let l = self.space.len();
        assert!(i < l && j < l, "label index out of range");
        match i.cmp(&j) {
            std::cmp::Ordering::Less => self.coupling[pair_index(l, i, j)],
            std::cmp::Ordering::Greater => self.coupling[pair_index(l, j, i)],
            std::cmp::Ordering::Equal => 0.0,
        }
    }

    pub fn set_coupling(&mut self, i: usize, j: usize, value: f64) -> Result<()> {
        self.space.check_index(i)?;
        self.space.check_index(j)?;
        if i == j {
            return Err(Error::SameIndex(i));
        }
        let l = self.space.len();
        let (a, b) = if i < j { (i, j) } else { (j, i) };
        self.coupling[pair_index(l, a, b)] = value;
        Ok(())
    }

    /// `(i, j, θ_ij)` for every `i < j`.
    pub fn couplings(&self) -> impl Iterator<Item = (usize, usize, f64)> + '_ {
        let l = self.space.len();
        (0..l).flat_map(move |i| (i + 1..l).map(move |j| (i, j, self.coupling(i, j))))
    }

    pub fn epsilon(&self) -> f64 {
        self.epsilon
    }

    /// File the prior was estimated from, when known.
    pub fn source(&self) -> Option<&str> {
        self.source.as_deref()
    }

    pub fn with_source(mut self, source: impl Into<String>) -> Self {
        self.source = Some(source.into());
        self
    }

    /// Unnormalized log-score of a configuration mask.
    pub(crate) fn score_mask(&self, mask: u32) -> f64 {
        let l = self.space.len();
        let mut linear = 0.0;
        for i in 0..l {
            if mask >> i & 1 == 1 {
                linear += self.bias[i];
            }
        }
        let mut pairwise = 0.0;
        let mut k = 0;
        for i in 0..l {
            let on_i = mask >> i & 1 == 1;
            for j in i + 1..l {
                if on_i && mask >> j & 1 == 1 {
                    pairwise += self.coupling[k];
                }
                k += 1;
            }
        }
        linear + pairwise
    }

    fn all_finite(&self) -> bool {
        self.bias.iter().chain(&self.coupling).all(|x| x.is_finite())
    }
}

fn check_epsilon(epsilon: f64) -> Result<()> {
    if epsilon.is_finite() && epsilon >= 0.0 {
        Ok(())
    } else {
        Err(Error::InvalidEpsilon(epsilon))
    }
}

/// Estimates the prior by closed-form moment matching with add-ε smoothing.
///
/// Marginals use `(c_i + ε) / (N + 2ε)` and pairwise joints `(C_ij + ε) / (N + 4ε)`. With
/// `ε = 0` a label that is always or never active, or a pair that never co-occurs, is an error.
pub fn estimate_prior(data: &LabeledDataset, epsilon: f64) -> Result<IsingPrior> {
    check_epsilon(epsilon)?;
    let counts = cooccurrence_counts(data)?;
    let space = data.space().clone();
    let n = counts.n as f64;
    let l = space.len();

    if epsilon == 0.0 {
        for (i, &c) in counts.marginals.iter().enumerate() {
            if c == 0 || c == counts.n {
                return Err(Error::DegenerateMarginal {
                    label: space.names()[i].clone(),
                    count: c,
                    n: counts.n,
                });
            }
        }
        for i in 0..l {
            for j in i + 1..l {
                if counts.joint[i][j] == 0 {
                    return Err(Error::DegenerateJoint {
                        first: space.names()[i].clone(),
                        second: space.names()[j].clone(),
                    });
                }
            }
        }
    }

    let marginal: Vec<f64> = counts
        .marginals
        .iter()
        .map(|&c| (c as f64 + epsilon) / (n + 2.0 * epsilon))
        .collect();
    let mut prior = IsingPrior::uninformative(space);
    prior.epsilon = epsilon;
    for (i, &p) in marginal.iter().enumerate() {
        prior.bias[i] = (p / (1.0 - p)).ln();
    }
    for i in 0..l {
        for j in i + 1..l {
            let joint = (counts.joint[i][j] as f64 + epsilon) / (n + 4.0 * epsilon);
            prior.coupling[pair_index(l, i, j)] = (joint / (marginal[i] * marginal[j])).ln();
        }
    }
    debug_assert!(prior.all_finite());
    Ok(prior)
}

/// Unnormalized prior log-score `Σ θ_i E_i + Σ_{i<j} θ_ij E_i E_j`.
pub fn prior_log_score(labels: &LabelVector, prior: &IsingPrior) -> Result<f64> {
    prior.space.check_vector(labels)?;
    Ok(prior.score_mask(labels.mask()))
}

/// Most probable configuration under the prior alone.
pub fn prior_mode(prior: &IsingPrior) -> LabelVector {
    let l = prior.space.len();
    exhaustive_argmax(l, |mask| prior.score_mask(mask)).0
}

fn normalized_distribution(prior: &IsingPrior) -> Vec<f64> {
    let scores: Vec<f64> = configurations(prior.space.len())
        .map(|v| prior.score_mask(v.mask()))
        .collect();
    let max = scores.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    let weights: Vec<f64> = scores.iter().map(|s| (s - max).exp()).collect();
    let z: f64 = weights.iter().sum();
    weights.into_iter().map(|w| w / z).collect()
}

/// Draws `n` i.i.d. configurations from the normalized prior by inverse-CDF sampling.
///
/// Items are named `s0`, `s1`, ...; a given seed always yields the same dataset.
pub fn sample_prior(prior: &IsingPrior, n: usize, seed: u64) -> Result<LabeledDataset> {
    if n == 0 {
        return Err(Error::EmptyDataset);
    }
    let l = prior.space.len();
    let mut cdf = normalized_distribution(prior);
    let mut acc = 0.0;
    for p in cdf.iter_mut() {
        acc += *p;
        *p = acc;
    }
    let total = acc;
    let last = cdf.len() - 1;

    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let vectors = (0..n).map(|_| {
        let u = rng.gen::<f64>() * total;
        let k = cdf.partition_point(|&c| c <= u).min(last);
        LabelVector::from_mask(k as u32, l)
    });
    let items = vectors
        .enumerate()
        .map(|(i, v)| (format!("s{i}"), v))
        .collect::<Vec<_>>();
    LabeledDataset::from_items(prior.space.clone(), items)
}

/// Exact marginals `P(E_i = 1)` and pairwise joints `P(E_i = 1, E_j = 1)` of the normalized prior.
pub fn exact_moments(prior: &IsingPrior) -> (Vec<f64>, Vec<Vec<f64>>) {
    let l = prior.space.len();
    let dist = normalized_distribution(prior);
    let mut joint = vec![vec![0.0; l]; l];
    for (mask, p) in dist.iter().enumerate() {
        for i in 0..l {
            if mask >> i & 1 == 0 {
                continue;
            }
            for j in 0..l {
                if mask >> j & 1 == 1 {
                    joint[i][j] += p;
                }
            }
        }
    }
    let marginal = (0..l).map(|i| joint[i][i]).collect();
    (marginal, joint)
}

/// Parameters that [`estimate_prior`] converges to when fed unlimited samples from `prior`.
///
/// Coincides with `prior` only when every coupling is zero; with non-zero couplings the
/// log-odds of a marginal absorbs contributions from the labels it is coupled to.
pub fn limiting_estimate(prior: &IsingPrior) -> IsingPrior {
    let (marginal, joint) = exact_moments(prior);
    let l = prior.space.len();
    let mut out = IsingPrior::uninformative(prior.space.clone());
    for i in 0..l {
        out.bias[i] = (marginal[i] / (1.0 - marginal[i])).ln();
        for j in i + 1..l {
            out.coupling[pair_index(l, i, j)] = (joint[i][j] / (marginal[i] * marginal[j])).ln();
        }
    }
    out
}

/// Mutual information (nats) between labels `i` and `j` over the add-ε smoothed 2×2 table.
pub fn mutual_information(data: &LabeledDataset, i: usize, j: usize, epsilon: f64) -> Result<f64> {
    data.space().check_index(i)?;
    data.space().check_index(j)?;
    if i == j {
        return Err(Error::SameIndex(i));
    }
    check_epsilon(epsilon)?;
    data.require_non_empty()?;

    let mut table = [[0usize; 2]; 2];
    for v in data.vectors() {
        table[usize::from(v.get(i))][usize::from(v.get(j))] += 1;
    }
    let total = data.len() as f64 + 4.0 * epsilon;
    let p = table.map(|row| row.map(|c| (c as f64 + epsilon) / total));
    let row = [p[0][0] + p[0][1], p[1][0] + p[1][1]];
    let col = [p[0][0] + p[1][0], p[0][1] + p[1][1]];
    let mut mi = 0.0;
    for a in 0..2 {
        for b in 0..2 {
            if p[a][b] > 0.0 {
                mi += p[a][b] * (p[a][b] / (row[a] * col[b])).ln();
            }
        }
    }
    Ok(mi)
}

/// Symmetric matrix of pairwise mutual information (nats); zero diagonal.
pub fn mutual_information_matrix(data: &LabeledDataset, epsilon: f64) -> Result<Vec<Vec<f64>>> {
    let l = data.space().len();
    let mut out = vec![vec![0.0; l]; l];
    for i in 0..l {
        for j in i + 1..l {
            let mi = mutual_information(data, i, j, epsilon)?;
            out[i][j] = mi;
            out[j][i] = mi;
        }
    }
    Ok(out)
}

pub fn nats_to_bits(nats: f64) -> f64 {
    nats / std::f64::consts::LN_2
}

#[derive(Debug, Serialize, Deserialize)]
struct CouplingEntry {
    i: String,
    j: String,
    value: f64,
}

#[derive(Debug, Serialize, Deserialize)]
struct PriorFile {
    labels: Vec<String>,
    epsilon: f64,
    theta_i: Vec<f64>,
    theta_ij: Vec<CouplingEntry>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    source: Option<String>,
}

impl IsingPrior {
    pub fn to_json(&self) -> Result<String> {
        let names = self.space.names();
        let file = PriorFile {
            labels: names.to_vec(),
            epsilon: self.epsilon,
            theta_i: self.bias.clone(),
            theta_ij: self
                .couplings()
                .map(|(i, j, value)| CouplingEntry {
                    i: names[i].clone(),
                    j: names[j].clone(),
                    value,
                })
                .collect(),
            source: self.source.clone(),
        };
        Ok(serde_json::to_string_pretty(&file)?)
    }

    pub fn from_json(text: &str) -> Result<Self> {
        let file: PriorFile = serde_json::from_str(text)?;
        let space = LabelSpace::new(file.labels)?;
        check_epsilon(file.epsilon)?;
        let mut pairs = Vec::with_capacity(file.theta_ij.len());
        for entry in &file.theta_ij {
            pairs.push((space.index_of(&entry.i)?, space.index_of(&entry.j)?, entry.value));
        }
        let mut prior = Self::from_parameters(space, file.theta_i, &pairs)?;
        prior.epsilon = file.epsilon;
        prior.source = file.source;
        Ok(prior)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn close(a: f64, b: f64, tol: f64) -> bool {
        (a - b).abs() <= tol
    }

    fn space(n: usize) -> LabelSpace {
        LabelSpace::new((0..n).map(|i| format!("l{i}"))).unwrap()
    }

    fn data(rows: &[&[u8]]) -> LabeledDataset {
        LabeledDataset::from_vectors(
            space(rows[0].len()),
            rows.iter().map(|r| LabelVector::from_bits(r).unwrap()),
        )
        .unwrap()
    }

    fn v(bits: &[u8]) -> LabelVector {
        LabelVector::from_bits(bits).unwrap()
    }

    #[test]
    fn pair_index_is_dense() {
        let l = 5;
        let mut k = 0;
        for i in 0..l {
            for j in i + 1..l {
                assert_eq!(pair_index(l, i, j), k);
                k += 1;
            }
        }
    }

    #[test]
    fn estimate_by_hand() {
        let d = data(&[&[1, 1], &[1, 0], &[0, 1], &[1, 1]]);
        let p = estimate_prior(&d, 0.0).unwrap();
        assert!(close(p.bias()[0], 3f64.ln(), 1e-12));
        assert!(close(p.bias()[1], 3f64.ln(), 1e-12));
        assert!(close(p.coupling(0, 1), (0.5f64 / 0.5625).ln(), 1e-12));
        assert!(close(p.coupling(0, 1), -0.1178, 5e-5));
    }

    #[test]
    fn estimate_factorizing_data_is_zero() {
        let d = data(&[&[0, 0], &[0, 1], &[1, 0], &[1, 1]]);
        let p = estimate_prior(&d, 0.0).unwrap();
        assert_eq!(p.bias(), &[0.0, 0.0]);
        assert_eq!(p.coupling(0, 1), 0.0);
    }

    #[test]
    fn estimate_degenerate_without_smoothing() {
        let d = data(&[&[1, 1]]);
        assert!(matches!(
            estimate_prior(&d, 0.0),
            Err(Error::DegenerateMarginal { count: 1, n: 1, .. })
        ));
        let d = data(&[&[1, 0], &[0, 1]]);
        assert!(matches!(estimate_prior(&d, 0.0), Err(Error::DegenerateJoint { .. })));
        let p = estimate_prior(&d, DEFAULT_EPSILON).unwrap();
        assert!(p.all_finite());
        assert!(matches!(estimate_prior(&d, -1.0), Err(Error::InvalidEpsilon(_))));
        assert!(matches!(
            estimate_prior(&LabeledDataset::new(space(2)), 0.5),
            Err(Error::EmptyDataset)
        ));
    }

    #[test]
    fn smoothing_keeps_single_item_finite() {
        let p = estimate_prior(&data(&[&[1, 1, 1]]), 0.5).unwrap();
        assert!(p.all_finite());
        assert_eq!(p.epsilon(), 0.5);
    }

    #[test]
    fn score_examples() {
        let mut p = IsingPrior::uninformative(space(2));
        p.set_bias(0, 1.0986).unwrap();
        p.set_bias(1, 1.0986).unwrap();
        p.set_coupling(0, 1, -0.1178).unwrap();
        assert_eq!(prior_log_score(&v(&[0, 0]), &p).unwrap(), 0.0);
        assert!(close(prior_log_score(&v(&[1, 1]), &p).unwrap(), 2.0794, 1e-12));
        assert!(matches!(
            prior_log_score(&v(&[1, 1, 0]), &p),
            Err(Error::DimensionMismatch { .. })
        ));
    }

    #[test]
    fn decoupled_score_is_linear() {
        let p = IsingPrior::from_parameters(space(3), vec![0.5, -1.0, 2.0], &[]).unwrap();
        assert_eq!(prior_log_score(&v(&[1, 0, 1]), &p).unwrap(), 2.5);
    }

    #[test]
    fn coupling_is_symmetric() {
        let p = IsingPrior::from_parameters(space(3), vec![0.0; 3], &[(2, 0, 0.7)]).unwrap();
        assert_eq!(p.coupling(0, 2), 0.7);
        assert_eq!(p.coupling(2, 0), 0.7);
        assert_eq!(p.coupling(1, 1), 0.0);
    }

    #[test]
    fn mode_examples() {
        let p = IsingPrior::from_parameters(space(3), vec![-0.1, -2.0, -0.5], &[]).unwrap();
        assert_eq!(prior_mode(&p), v(&[0, 0, 0]));
        let p = IsingPrior::from_parameters(space(2), vec![0.0, 0.0], &[(0, 1, 2.0)]).unwrap();
        assert_eq!(prior_mode(&p), v(&[1, 1]));
        let p = IsingPrior::from_parameters(space(2), vec![-1.0, -1.0], &[(0, 1, 1.0)]).unwrap();
        assert_eq!(prior_mode(&p), v(&[0, 0]));
    }

    #[test]
    fn sampling_is_deterministic() {
        let p = IsingPrior::from_parameters(space(3), vec![0.3, -0.2, 0.1], &[(0, 2, 1.0)]).unwrap();
        let a = sample_prior(&p, 500, 7).unwrap();
        let b = sample_prior(&p, 500, 7).unwrap();
        assert_eq!(a.items(), b.items());
        let c = sample_prior(&p, 500, 8).unwrap();
        assert_ne!(a.items(), c.items());
        assert!(matches!(sample_prior(&p, 0, 1), Err(Error::EmptyDataset)));
    }

    #[test]
    fn uniform_prior_samples_half_marginals() {
        let p = IsingPrior::uninformative(space(4));
        let d = sample_prior(&p, 40_000, 3).unwrap();
        let counts = cooccurrence_counts(&d).unwrap();
        for &c in &counts.marginals {
            assert!(close(c as f64 / 40_000.0, 0.5, 0.01));
        }
    }

    #[test]
    fn strong_coupling_joint_frequency() {
        let p = IsingPrior::from_parameters(space(2), vec![0.0, 0.0], &[(0, 1, 3.0)]).unwrap();
        let d = sample_prior(&p, 100_000, 11).unwrap();
        let both = d.vectors().filter(|v| v.count_ones() == 2).count() as f64 / 1e5;
        let expected = 3f64.exp() / (3.0 + 3f64.exp());
        assert!(close(expected, 0.870, 5e-4));
        assert!(close(both, expected, 0.01), "{both}");
    }

    #[test]
    fn moments_of_two_label_prior_by_hand() {
        let p = IsingPrior::from_parameters(space(2), vec![0.0, 0.0], &[(0, 1, 3.0)]).unwrap();
        let (m, j) = exact_moments(&p);
        let z = 3.0 + 3f64.exp();
        assert!(close(m[0], (1.0 + 3f64.exp()) / z, 1e-12));
        assert!(close(j[0][1], 3f64.exp() / z, 1e-12));
    }

    #[test]
    fn limiting_estimate_recovers_decoupled_prior() {
        let p = IsingPrior::from_parameters(space(3), vec![0.4, -1.2, 0.9], &[]).unwrap();
        let q = limiting_estimate(&p);
        for i in 0..3 {
            assert!(close(q.bias()[i], p.bias()[i], 1e-12));
        }
        for (_, _, c) in q.couplings() {
            assert!(close(c, 0.0, 1e-12));
        }
    }

    #[test]
    fn mutual_information_examples() {
        let d = data(&[&[0, 0], &[0, 1], &[1, 0], &[1, 1]]);
        assert!(close(mutual_information(&d, 0, 1, 0.0).unwrap(), 0.0, 1e-15));

        let d = data(&[&[0, 0], &[1, 1], &[0, 0], &[1, 1], &[0, 0], &[1, 1]]);
        let mi = mutual_information(&d, 0, 1, 0.0).unwrap();
        assert!(close(mi, std::f64::consts::LN_2, 1e-12));
        assert!(close(nats_to_bits(mi), 1.0, 1e-12));

        assert!(matches!(mutual_information(&d, 1, 1, 0.0), Err(Error::SameIndex(1))));
    }

    #[test]
    fn json_round_trip_is_exact() {
        let d = data(&[&[1, 1, 0], &[1, 0, 0], &[0, 1, 1], &[1, 1, 1], &[0, 0, 1]]);
        let p = estimate_prior(&d, 0.5).unwrap().with_source("gold.jsonl");
        let text = p.to_json().unwrap();
        let q = IsingPrior::from_json(&text).unwrap();
        assert_eq!(p, q);
        for (a, b) in p.bias().iter().zip(q.bias()) {
            assert_eq!(a.to_bits(), b.to_bits());
        }
    }

    #[test]
    fn json_rejects_unknown_label() {
        let text = r#"{"labels":["a","b"],"epsilon":0.5,"theta_i":[0,0],
            "theta_ij":[{"i":"a","j":"c","value":1.0}]}"#;
        assert!(matches!(IsingPrior::from_json(text), Err(Error::UnknownLabel(n)) if n == "c"));
    }

    proptest::proptest! {
        #[test]
        fn mutual_information_is_nonnegative_and_symmetric(
            masks in proptest::collection::vec(0u32..8, 1..80),
            eps in 0.0f64..2.0,
        ) {
            let d = LabeledDataset::from_vectors(space(3), masks.iter().map(|&m| LabelVector::from_mask(m, 3))).unwrap();
            for i in 0..3 {
                for j in 0..3 {
                    if i == j { continue; }
                    let a = mutual_information(&d, i, j, eps).unwrap();
                    let b = mutual_information(&d, j, i, eps).unwrap();
                    proptest::prop_assert!(a >= -1e-12);
                    proptest::prop_assert!((a - b).abs() <= 1e-15);
                }
            }
        }

        #[test]
        fn mode_attains_maximum(
            bias in proptest::collection::vec(-2.0f64..2.0, 6),
            coupling in proptest::collection::vec(-2.0f64..2.0, 15),
        ) {
            let mut p = IsingPrior::uninformative(space(6));
            p.bias = bias;
            p.coupling = coupling;
            let mode = prior_mode(&p);
            let best = prior_log_score(&mode, &p).unwrap();
            for e in configurations(6) {
                proptest::prop_assert!(best >= prior_log_score(&e, &p).unwrap());
            }
        }
    }

    #[test]
    fn zero_coupling_when_joint_factorizes() {
        // 2x2 counts 2,4 / 6,12 factorize exactly.
        let mut rows: Vec<&[u8]> = Vec::new();
        rows.extend(std::iter::repeat(&[0u8, 0][..]).take(2));
        rows.extend(std::iter::repeat(&[0u8, 1][..]).take(4));
        rows.extend(std::iter::repeat(&[1u8, 0][..]).take(6));
        rows.extend(std::iter::repeat(&[1u8, 1][..]).take(12));
        let p = estimate_prior(&data(&rows), 0.0).unwrap();
        assert!(close(p.coupling(0, 1), 0.0, 1e-15));
    }
}
