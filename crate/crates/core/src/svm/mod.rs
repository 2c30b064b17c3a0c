//! Binary soft-margin kernel SVM trained by sequential minimal optimization.
//!
//! The decision function is f(x) = Σᵢ αᵢyᵢK(xᵢ,x) + b over the support
//! vectors; training solves the dual with the solver in [`smo`]. The
//! operating point is C = 1 with an RBF kernel and γ = 1/k (k the feature
//! dimension), but both are parameters.

mod smo;

use serde::{Deserialize, Serialize};

use crate::features::SparseVector;

pub use smo::{StepRecord, TrainTrace};

#[derive(Debug, thiserror::Error)]
pub enum SvmError {
    #[error("dimension mismatch: {left} vs {right}")]
    DimensionMismatch { left: usize, right: usize },
    #[error("training set is empty")]
    EmptyTrainingSet,
    #[error("training data contains only one class")]
    SingleClass,
    #[error("label {0} is not +1 or -1")]
    InvalidLabel(f64),
    #[error("training vectors have dimension 0")]
    ZeroDimension,
    #[error("kernel value is not finite (examples {0} and {1})")]
    NonFiniteKernel(usize, usize),
    #[error("invalid parameter: {0}")]
    InvalidParams(String),
    #[error("unsupported model file version {0}")]
    VersionMismatch(u32),
    #[error("model file: {0}")]
    Format(#[from] serde_json::Error),
    #[error("model file: {0}")]
    BadModel(String),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum KernelKind {
    Rbf,
    Linear,
}

/// RBF bandwidth: either fixed or `auto` = 1/k resolved against the data
/// dimension at training (or evaluation) time.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum GammaSpec {
    Auto,
    Fixed(f64),
}

impl GammaSpec {
    pub fn resolve(&self, dim: usize) -> f64 {
        match self {
            GammaSpec::Fixed(g) => *g,
            GammaSpec::Auto => {
                if dim == 0 {
                    1.0
                } else {
                    1.0 / dim as f64
                }
            }
        }
    }
}

impl Serialize for GammaSpec {
    fn serialize<S: serde::Serializer>(&self, serializer: S) -> Result<S::Ok, S::Error> {
        match self {
            GammaSpec::Auto => serializer.serialize_str("auto"),
            GammaSpec::Fixed(g) => serializer.serialize_f64(*g),
        }
    }
}

impl<'de> Deserialize<'de> for GammaSpec {
    fn deserialize<D: serde::Deserializer<'de>>(deserializer: D) -> Result<Self, D::Error> {
        #[derive(Deserialize)]
        #[serde(untagged)]
        enum Repr {
            Num(f64),
            Str(String),
        }
        match Repr::deserialize(deserializer)? {
            Repr::Num(g) => Ok(GammaSpec::Fixed(g)),
            Repr::Str(s) if s == "auto" => Ok(GammaSpec::Auto),
            Repr::Str(s) => Err(serde::de::Error::custom(format!(
                "gamma must be a number or \"auto\", got {s:?}"
            ))),
        }
    }
}

/// Optional per-class penalty scaling; off by default (the training data is
/// left imbalanced, roughly 1:5 metonym to literal).
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum ClassWeight {
    /// Scale each class's penalty by n / (2 · n_class).
    Balanced,
    /// Explicit multipliers for the +1 and -1 classes.
    Custom { positive: f64, negative: f64 },
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SvmParams {
    pub c: f64,
    pub kernel: KernelKind,
    pub gamma: GammaSpec,
    /// KKT tolerance used both as the working-pair selection threshold and
    /// the convergence criterion.
    pub tol: f64,
    /// Safety bound on outer solver sweeps.
    pub max_passes: usize,
    /// Minimum meaningful alpha change; smaller steps are skipped.
    pub eps: f64,
    /// Seed for the randomized fallback order in second-example choice.
    pub seed: u64,
    #[serde(skip_serializing_if = "Option::is_none", default)]
    pub class_weight: Option<ClassWeight>,
}

impl Default for SvmParams {
    fn default() -> Self {
        SvmParams {
            c: 1.0,
            kernel: KernelKind::Rbf,
            gamma: GammaSpec::Auto,
            tol: 1e-3,
            max_passes: 100,
            eps: 1e-8,
            seed: 42,
            class_weight: None,
        }
    }
}

impl SvmParams {
    fn validate(&self) -> Result<(), SvmError> {
        if !self.c.is_finite() || self.c <= 0.0 {
            return Err(SvmError::InvalidParams(format!(
                "C must be positive, got {}",
                self.c
            )));
        }
        if let GammaSpec::Fixed(g) = self.gamma {
            if !g.is_finite() || g <= 0.0 {
                return Err(SvmError::InvalidParams(format!(
                    "gamma must be positive, got {g}"
                )));
            }
        }
        if !self.tol.is_finite() || self.tol <= 0.0 {
            return Err(SvmError::InvalidParams(format!(
                "tol must be positive, got {}",
                self.tol
            )));
        }
        if self.max_passes == 0 {
            return Err(SvmError::InvalidParams(
                "max_passes must be positive".into(),
            ));
        }
        Ok(())
    }
}

/// Kernel value for a pair of sparse vectors. RBF values lie in (0,1];
/// `auto` gamma resolves to 1/dim.
pub fn kernel_eval(
    x: &SparseVector,
    y: &SparseVector,
    params: &SvmParams,
) -> Result<f64, SvmError> {
    if x.dim() != y.dim() {
        return Err(SvmError::DimensionMismatch {
            left: x.dim(),
            right: y.dim(),
        });
    }
    Ok(kernel_raw(
        x,
        y,
        params.kernel,
        params.gamma.resolve(x.dim()),
    ))
}

pub(crate) fn kernel_raw(
    x: &SparseVector,
    y: &SparseVector,
    kernel: KernelKind,
    gamma: f64,
) -> f64 {
    match kernel {
        KernelKind::Linear => x.dot(y),
        KernelKind::Rbf => (-gamma * x.squared_distance(y)).exp(),
    }
}

/// Decision-to-class mapping: +1 is the non-literal reading, -1 literal.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct LabelMap {
    pub positive: String,
    pub negative: String,
}

impl Default for LabelMap {
    fn default() -> Self {
        LabelMap {
            positive: "non-literal".into(),
            negative: "literal".into(),
        }
    }
}

/// Trained classifier: support vectors with their signed dual coefficients
/// αᵢyᵢ, the bias, and the (gamma-resolved) parameters it was trained with.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SvmModel {
    pub support_vectors: Vec<SparseVector>,
    pub dual_coefs: Vec<f64>,
    pub bias: f64,
    pub dim: usize,
    pub params: SvmParams,
    pub label_map: LabelMap,
}

impl SvmModel {
    fn gamma(&self) -> f64 {
        self.params.gamma.resolve(self.dim)
    }
}

/// Train on ±1-labelled sparse vectors. Requires at least one example of
/// each class and a shared dimension; deterministic for a given seed.
pub fn train(xs: &[SparseVector], ys: &[f64], params: &SvmParams) -> Result<SvmModel, SvmError> {
    smo::solve(xs, ys, params, false).map(|(model, _)| model)
}

/// [`train`] plus a per-accepted-step record of the solver invariants
/// (box bounds, Σαy, dual objective). Used by verification tests; the trace
/// makes each step O(n²), so keep it off the production path.
pub fn train_traced(
    xs: &[SparseVector],
    ys: &[f64],
    params: &SvmParams,
) -> Result<(SvmModel, TrainTrace), SvmError> {
    smo::solve(xs, ys, params, true).map(|(model, trace)| (model, trace.expect("trace requested")))
}

/// Raw decision value f(x).
pub fn decision(model: &SvmModel, x: &SparseVector) -> Result<f64, SvmError> {
    if x.dim() != model.dim {
        return Err(SvmError::DimensionMismatch {
            left: model.dim,
            right: x.dim(),
        });
    }
    let gamma = model.gamma();
    let mut sum = model.bias;
    for (sv, coef) in model.support_vectors.iter().zip(&model.dual_coefs) {
        sum += coef * kernel_raw(sv, x, model.params.kernel, gamma);
    }
    Ok(sum)
}

/// Signed prediction: +1 when the decision value is strictly positive, -1
/// otherwise (a tie at exactly zero goes to -1, the majority class).
pub fn predict(model: &SvmModel, x: &SparseVector) -> Result<f64, SvmError> {
    Ok(if decision(model, x)? > 0.0 { 1.0 } else { -1.0 })
}

const MODEL_FILE_VERSION: u32 = 1;

#[derive(Serialize, Deserialize)]
struct ModelFile {
    version: u32,
    #[serde(flatten)]
    model: SvmModel,
}

/// Write the model as JSON. serde_json emits shortest-round-trip decimals,
/// so stored reals reload bit-for-bit.
pub fn save_model<W: std::io::Write>(model: &SvmModel, writer: W) -> Result<(), SvmError> {
    serde_json::to_writer(
        writer,
        &ModelFile {
            version: MODEL_FILE_VERSION,
            model: model.clone(),
        },
    )?;
    Ok(())
}

pub fn load_model<R: std::io::Read>(reader: R) -> Result<SvmModel, SvmError> {
    let file: ModelFile = serde_json::from_reader(reader)?;
    if file.version != MODEL_FILE_VERSION {
        return Err(SvmError::VersionMismatch(file.version));
    }
    let model = file.model;
    if model.dual_coefs.len() != model.support_vectors.len() {
        return Err(SvmError::BadModel(format!(
            "{} dual coefficients for {} support vectors",
            model.dual_coefs.len(),
            model.support_vectors.len()
        )));
    }
    if let Some(sv) = model
        .support_vectors
        .iter()
        .find(|sv| sv.dim() != model.dim)
    {
        return Err(SvmError::BadModel(format!(
            "support vector dimension {} does not match model dimension {}",
            sv.dim(),
            model.dim
        )));
    }
    if model.dual_coefs.iter().any(|c| !c.is_finite()) || !model.bias.is_finite() {
        return Err(SvmError::BadModel("non-finite coefficient".into()));
    }
    if model.dual_coefs.contains(&0.0) {
        return Err(SvmError::BadModel(
            "support vector with zero coefficient".into(),
        ));
    }
    Ok(model)
}
