//! Python bindings for `entangle-core`.
//!
//! Label vectors cross the boundary as lists of 0/1 ints in label order; reports come back as
//! plain dicts. Omitting `labels` selects the eight Plutchik emotions.

use pyo3::exceptions::{PyOSError, PyValueError};
use pyo3::prelude::*;

use entangle_core as core;
use entangle_core::{LabelSpace, LabelVector, LikelihoodRecord, PairHandling, ZeroDivision};

fn to_py_err(e: core::Error) -> PyErr {
    if e.is_io() {
        PyOSError::new_err(e.to_string())
    } else {
        PyValueError::new_err(e.to_string())
    }
}

fn space_of(labels: Option<Vec<String>>) -> PyResult<LabelSpace> {
    match labels {
        Some(names) => LabelSpace::new(names).map_err(to_py_err),
        None => Ok(LabelSpace::plutchik()),
    }
}

fn vector(space: &LabelSpace, bits: &[u8]) -> PyResult<LabelVector> {
    let v = LabelVector::from_bits(bits).map_err(to_py_err)?;
    if v.len() != space.len() {
        return Err(PyValueError::new_err(format!(
            "expected {} labels, got {}",
            space.len(),
            v.len()
        )));
    }
    Ok(v)
}

fn ints(v: LabelVector) -> Vec<u32> {
    v.iter().map(u32::from).collect()
}

fn vectors(space: &LabelSpace, rows: &[Vec<u8>]) -> PyResult<Vec<LabelVector>> {
    rows.iter().map(|r| vector(space, r)).collect()
}

fn record(space: &LabelSpace, p1: &[f64], p0: Option<Vec<f64>>) -> PyResult<LikelihoodRecord> {
    match p0 {
        Some(p0) => {
            if p0.len() != p1.len() {
                return Err(PyValueError::new_err("p1 and p0 differ in length"));
            }
            let pairs: Vec<(f64, f64)> = p1.iter().copied().zip(p0).collect();
            LikelihoodRecord::from_pairs("", space.clone(), &pairs, PairHandling::Normalize)
        }
        None => LikelihoodRecord::from_p1("", space.clone(), p1),
    }
    .map_err(to_py_err)
}

fn policy(zero_division: u8) -> PyResult<ZeroDivision> {
    ZeroDivision::try_from(zero_division).map_err(PyValueError::new_err)
}

fn to_dict<T: serde::Serialize>(py: Python<'_>, value: &T) -> PyResult<Py<PyAny>> {
    let text = serde_json::to_string(value).map_err(|e| PyValueError::new_err(e.to_string()))?;
    Ok(py.import("json")?.call_method1("loads", (text,))?.unbind())
}

/// Maximum-entropy Ising prior over label vectors.
#[pyclass(name = "IsingPrior", module = "entangle", skip_from_py_object)]
#[derive(Clone)]
struct PyIsingPrior {
    inner: core::IsingPrior,
}

#[pymethods]
impl PyIsingPrior {
    /// Build a prior from biases and `(i, j, value)` couplings.
    #[new]
    #[pyo3(signature = (theta_i, theta_ij=Vec::new(), labels=None))]
    fn new(theta_i: Vec<f64>, theta_ij: Vec<(usize, usize, f64)>, labels: Option<Vec<String>>) -> PyResult<Self> {
        let space = space_of(labels)?;
        let inner = core::IsingPrior::from_parameters(space, theta_i, &theta_ij).map_err(to_py_err)?;
        Ok(Self { inner })
    }

    /// Estimate from gold label vectors with add-epsilon smoothing.
    #[staticmethod]
    #[pyo3(signature = (gold, epsilon=core::DEFAULT_EPSILON, labels=None))]
    fn estimate(gold: Vec<Vec<u8>>, epsilon: f64, labels: Option<Vec<String>>) -> PyResult<Self> {
        let space = space_of(labels)?;
        let data = core::LabeledDataset::from_vectors(space.clone(), vectors(&space, &gold)?).map_err(to_py_err)?;
        let inner = core::estimate_prior(&data, epsilon).map_err(to_py_err)?;
        Ok(Self { inner })
    }

    #[staticmethod]
    fn from_json(text: &str) -> PyResult<Self> {
        let inner = core::IsingPrior::from_json(text).map_err(to_py_err)?;
        Ok(Self { inner })
    }

    fn to_json(&self) -> PyResult<String> {
        self.inner.to_json().map_err(to_py_err)
    }

    #[getter]
    fn labels(&self) -> Vec<String> {
        self.inner.space().names().to_vec()
    }

    #[getter]
    fn theta_i(&self) -> Vec<f64> {
        self.inner.bias().to_vec()
    }

    #[getter]
    fn epsilon(&self) -> f64 {
        self.inner.epsilon()
    }

    fn coupling(&self, i: usize, j: usize) -> PyResult<f64> {
        let l = self.inner.space().len();
        if i >= l || j >= l {
            return Err(PyValueError::new_err("label index out of range"));
        }
        Ok(self.inner.coupling(i, j))
    }

    /// Unnormalized log-score of a label vector.
    fn score(&self, labels: Vec<u8>) -> PyResult<f64> {
        let v = vector(self.inner.space(), &labels)?;
        core::prior_log_score(&v, &self.inner).map_err(to_py_err)
    }

    fn mode(&self) -> Vec<u32> {
        ints(core::prior_mode(&self.inner))
    }

    /// Draw `n` label vectors with a seeded generator.
    #[pyo3(signature = (n, seed=0))]
    fn sample(&self, n: usize, seed: u64) -> PyResult<Vec<Vec<u32>>> {
        let data = core::sample_prior(&self.inner, n, seed).map_err(to_py_err)?;
        Ok(data.vectors().map(|v| ints(*v)).collect())
    }

    fn __repr__(&self) -> String {
        format!(
            "IsingPrior(labels={:?}, epsilon={})",
            self.inner.space().names(),
            self.inner.epsilon()
        )
    }
}

/// Two-way softmax of a yes/no logit pair.
#[pyfunction]
fn logits_to_probs(yes_logit: f64, no_logit: f64) -> PyResult<(f64, f64)> {
    core::logits_to_probs(yes_logit, no_logit).map_err(to_py_err)
}

#[pyfunction]
#[pyo3(signature = (p1, p0=None))]
fn threshold_decode(p1: Vec<f64>, p0: Option<Vec<f64>>) -> PyResult<Vec<u32>> {
    let space = LabelSpace::new((0..p1.len()).map(|i| format!("l{i}"))).map_err(to_py_err)?;
    Ok(ints(core::threshold_decode(&record(&space, &p1, p0)?)))
}

/// Exact MAP label vector; returns `(map, objective, baseline)`.
#[pyfunction]
#[pyo3(signature = (prior, p1, p0=None, alpha=1.0))]
fn map_infer(prior: &PyIsingPrior, p1: Vec<f64>, p0: Option<Vec<f64>>, alpha: f64) -> PyResult<(Vec<u32>, f64, Vec<u32>)> {
    let rec = record(prior.inner.space(), &p1, p0)?;
    let r = core::map_infer(&rec, &prior.inner, alpha).map_err(to_py_err)?;
    Ok((ints(r.map_vector), r.objective, ints(r.baseline_vector)))
}

#[pyfunction]
#[pyo3(signature = (labels, prior, p1, p0=None, alpha=1.0))]
fn posterior_log_objective(
    labels: Vec<u8>,
    prior: &PyIsingPrior,
    p1: Vec<f64>,
    p0: Option<Vec<f64>>,
    alpha: f64,
) -> PyResult<f64> {
    let space = prior.inner.space();
    let rec = record(space, &p1, p0)?;
    core::posterior_log_objective(&vector(space, &labels)?, &rec, &prior.inner, alpha).map_err(to_py_err)
}

/// Full evaluation report as a dict.
#[pyfunction]
#[pyo3(signature = (pred, gold, labels=None, zero_division=0))]
fn evaluate(
    py: Python<'_>,
    pred: Vec<Vec<u8>>,
    gold: Vec<Vec<u8>>,
    labels: Option<Vec<String>>,
    zero_division: u8,
) -> PyResult<Py<PyAny>> {
    let space = space_of(labels)?;
    let report = core::evaluate(
        &vectors(&space, &pred)?,
        &vectors(&space, &gold)?,
        &space,
        policy(zero_division)?,
    )
    .map_err(to_py_err)?;
    to_dict(py, &report)
}

#[pyfunction]
#[pyo3(signature = (gold, labels=None))]
fn dataset_statistics(py: Python<'_>, gold: Vec<Vec<u8>>, labels: Option<Vec<String>>) -> PyResult<Py<PyAny>> {
    let space = space_of(labels)?;
    let data = core::LabeledDataset::from_vectors(space.clone(), vectors(&space, &gold)?).map_err(to_py_err)?;
    to_dict(py, &core::dataset_statistics(&data).map_err(to_py_err)?)
}

/// Mutual information in nats between labels `i` and `j`.
#[pyfunction]
#[pyo3(signature = (gold, i, j, epsilon=0.0, labels=None))]
fn mutual_information(gold: Vec<Vec<u8>>, i: usize, j: usize, epsilon: f64, labels: Option<Vec<String>>) -> PyResult<f64> {
    let space = space_of(labels)?;
    let data = core::LabeledDataset::from_vectors(space.clone(), vectors(&space, &gold)?).map_err(to_py_err)?;
    core::mutual_information(&data, i, j, epsilon).map_err(to_py_err)
}

#[pyfunction]
fn majority_vote(annotations: Vec<Vec<u8>>) -> PyResult<Vec<u32>> {
    let vs = annotations
        .iter()
        .map(|a| LabelVector::from_bits(a).map_err(to_py_err))
        .collect::<PyResult<Vec<_>>>()?;
    Ok(ints(core::majority_vote(&vs).map_err(to_py_err)?))
}

fn annotation_set(items: &[Vec<Vec<u8>>], labels: Option<Vec<String>>) -> PyResult<core::AnnotationSet> {
    let space = space_of(labels)?;
    let mut set = core::AnnotationSet::new(space.clone());
    for (k, item) in items.iter().enumerate() {
        set.push(k.to_string(), vectors(&space, item)?).map_err(to_py_err)?;
    }
    Ok(set)
}

/// Fleiss' kappa over pooled (item, label) decisions; `items[k][annotator]` is a label vector.
#[pyfunction]
#[pyo3(signature = (items, labels=None))]
fn fleiss_kappa(items: Vec<Vec<Vec<u8>>>, labels: Option<Vec<String>>) -> PyResult<f64> {
    core::fleiss_kappa(&annotation_set(&items, labels)?).map_err(to_py_err)
}

#[pyfunction]
#[pyo3(signature = (items, labels=None))]
fn cohen_kappa_pairwise(items: Vec<Vec<Vec<u8>>>, labels: Option<Vec<String>>) -> PyResult<Vec<Vec<f64>>> {
    core::cohen_kappa_pairwise(&annotation_set(&items, labels)?).map_err(to_py_err)
}

/// Returns `(answer, confidence, status)` from a tagged model response.
#[pyfunction]
fn parse_response(text: &str) -> (Option<&'static str>, Option<u8>, &'static str) {
    let p = core::parse_response(text);
    let answer = p.answer.map(|a| match a {
        core::response::Answer::Yes => "yes",
        core::response::Answer::No => "no",
    });
    let status = match p.status {
        core::response::ParseStatus::Ok => "ok",
        core::response::ParseStatus::MissingAnswer => "missing_answer",
        core::response::ParseStatus::MalformedConfidence => "malformed_confidence",
    };
    (answer, p.confidence, status)
}

/// Adds every class, function and constant to `m`.
pub fn register(m: &Bound<'_, PyModule>) -> PyResult<()> {
    m.add_class::<PyIsingPrior>()?;
    m.add_function(wrap_pyfunction!(logits_to_probs, m)?)?;
    m.add_function(wrap_pyfunction!(threshold_decode, m)?)?;
    m.add_function(wrap_pyfunction!(map_infer, m)?)?;
    m.add_function(wrap_pyfunction!(posterior_log_objective, m)?)?;
    m.add_function(wrap_pyfunction!(evaluate, m)?)?;
    m.add_function(wrap_pyfunction!(dataset_statistics, m)?)?;
    m.add_function(wrap_pyfunction!(mutual_information, m)?)?;
    m.add_function(wrap_pyfunction!(majority_vote, m)?)?;
    m.add_function(wrap_pyfunction!(fleiss_kappa, m)?)?;
    m.add_function(wrap_pyfunction!(cohen_kappa_pairwise, m)?)?;
    m.add_function(wrap_pyfunction!(parse_response, m)?)?;
    m.add("PLUTCHIK_EMOTIONS", core::PLUTCHIK_EMOTIONS.to_vec())?;
    m.add("DEFAULT_ALPHAS", core::DEFAULT_ALPHAS.to_vec())?;
    Ok(())
}

#[pymodule]
fn entangle(m: &Bound<'_, PyModule>) -> PyResult<()> {
    register(m)
}
