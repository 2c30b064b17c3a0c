//! Classification of location words as literal or metonymic.
//!
//! The pipeline: annotated samples come in as JSONL ([`corpus`]), lexical
//! resources are loaded from flat TSV files ([`lexicons`]), each sample is
//! turned into a sparse feature vector over a dictionary space frozen on the
//! training data ([`features`]), and a soft-margin kernel SVM trained by
//! sequential minimal optimization does the classification ([`svm`]).
//! [`eval`] holds the metrics, the two reference baselines and the feature
//! ablation runner; [`selpref`] computes person/location selectional
//! preference ratios for verbs from aggregated subject counts.

pub mod corpus;
pub mod eval;
pub mod features;
pub mod lexicons;
pub mod selpref;
pub mod svm;
