//! Entanglement-aware correction of independent multi-label predictions.
//!
//! A maximum-entropy Ising prior estimated from gold label vectors is combined with per-label
//! Bernoulli likelihoods from a classifier's yes/no scores, and the jointly most probable label
//! vector is found by exhaustive enumeration. The crate also provides evaluation metrics,
//! annotator agreement, response parsing and the `entangle` command-line tool.

pub mod annotation;
pub mod cli;
pub mod error;
pub mod infer;
pub mod io;
pub mod label;
pub mod likelihood;
pub mod metrics;
pub mod prior;
pub mod response;
pub mod stats;
pub mod sweep;

pub use annotation::{
    agreement_report, cohen_kappa, cohen_kappa_pairwise, fleiss_kappa, majority_vote, AgreementReport,
    AnnotationSet,
};
pub use error::{Error, Result};
pub use infer::{infer_batch, map_infer, posterior_log_objective, InferenceConfig, MapResult};
pub use label::{
    cooccurrence_counts, enumerate_configurations, CooccurrenceCounts, LabelSpace, LabelVector,
    LabeledDataset, MAX_LABELS, PLUTCHIK_EMOTIONS,
};
pub use likelihood::{
    likelihood_log_score, logits_to_probs, threshold_decode, LikelihoodRecord, PairHandling,
    PROBABILITY_FLOOR,
};
pub use metrics::{
    evaluate, hamming_loss, lexical_accuracy, macro_f1, per_label_metrics, predicted_cooccurrence,
    vector_accuracy, EvalReport, LabelMetrics, ZeroDivision,
};
pub use prior::{
    estimate_prior, mutual_information, prior_log_score, prior_mode, sample_prior, IsingPrior,
    DEFAULT_EPSILON,
};
pub use response::{parse_response, responses_to_records, FillPolicy, ParsedAnswer, RawResponse};
pub use stats::{dataset_statistics, StatsReport};
pub use sweep::{alpha_sweep, SweepReport, DEFAULT_ALPHAS};
