//! Feature space construction and sample vectorization.
//!
//! Nine feature groups can be switched on independently: one-hot GRW surface
//! (OH), one-hot grammatical relation (DP), Brown cluster prefix (BC), N-hot
//! Levin verb categories (LV), preposition/stopword indicators (PR),
//! first-synset one-hot (WN), word embedding (EM), distributional vector
//! (VS) and abstractness/imaginability degrees (AI). Categorical
//! dictionaries are frozen on the training data; every sample is then mapped
//! onto the concatenated space as a sparse vector. A GRW unknown to a
//! resource contributes a zero block for that group, never an error.

use std::collections::BTreeMap;
use std::fmt;

use serde::{Deserialize, Serialize};

use crate::corpus::Sample;
use crate::lexicons::LexiconBundle;

#[derive(Debug, thiserror::Error)]
pub enum FeatureError {
    #[error("training set is empty")]
    EmptyTrainingSet,
    #[error("no feature group enabled")]
    NoFeatureFlags,
    #[error("unknown feature flag {0:?}")]
    UnknownFlag(String),
    #[error("unsupported feature space file version {0}")]
    VersionMismatch(u32),
    #[error("feature space file: {0}")]
    Format(#[from] serde_json::Error),
}

/// The feature groups, in vector layout order.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum Group {
    Oh,
    Dp,
    Bc,
    Lv,
    Pr,
    Wn,
    Em,
    Vs,
    Ai,
    /// Optional extra indicator: GRW is on an injected selectional-preference
    /// verb list. Appended after the nine standard groups when configured.
    Sp,
}

/// Index layout order of the groups within the concatenated vector.
pub const LAYOUT_ORDER: [Group; 10] = [
    Group::Oh,
    Group::Dp,
    Group::Bc,
    Group::Lv,
    Group::Pr,
    Group::Wn,
    Group::Em,
    Group::Vs,
    Group::Ai,
    Group::Sp,
];

/// Which groups are active plus the knobs that change their values.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FeatureConfig {
    pub oh: bool,
    pub dp: bool,
    pub bc: bool,
    pub lv: bool,
    pub pr: bool,
    pub wn: bool,
    pub em: bool,
    pub vs: bool,
    pub ai: bool,
    /// Brown path prefix length; 4 is the operating point but sweepable.
    pub brown_prefix_len: usize,
    /// Fill the imaginability slot of the AI block (the abstractness slot is
    /// always filled for covered words).
    pub ai_use_imaginability: bool,
    /// Value for a covered word whose abstractness or imaginability degree
    /// is missing. A word absent from the lexicon entirely still gets a zero
    /// block regardless of this setting.
    pub ai_missing_value: f64,
    /// L2-normalize each final vector. Off by default: indicator features
    /// and raw embedding reals co-exist unscaled.
    pub normalize: bool,
    /// Verbs whose presence as the GRW raises an extra one-wide indicator
    /// group (SP). `None` leaves the group out entirely.
    pub selpref_verbs: Option<std::collections::BTreeSet<String>>,
}

impl Default for FeatureConfig {
    /// All nine standard groups on, Brown prefix 4, imaginability used.
    fn default() -> Self {
        FeatureConfig {
            oh: true,
            dp: true,
            bc: true,
            lv: true,
            pr: true,
            wn: true,
            em: true,
            vs: true,
            ai: true,
            brown_prefix_len: 4,
            ai_use_imaginability: true,
            ai_missing_value: 0.0,
            normalize: false,
            selpref_verbs: None,
        }
    }
}

impl FeatureConfig {
    /// A config with no groups enabled; switch on what you need.
    pub fn none() -> Self {
        FeatureConfig {
            oh: false,
            dp: false,
            bc: false,
            lv: false,
            pr: false,
            wn: false,
            em: false,
            vs: false,
            ai: false,
            ..FeatureConfig::default()
        }
    }

    /// Parse a comma-separated flag list using the legend tokens
    /// `OH,DP,BC,LV,PR,WN,EM,VS,A&I` (case-insensitive; `AI` accepted for
    /// `A&I`).
    pub fn from_flag_str(flags: &str) -> Result<Self, FeatureError> {
        let mut cfg = FeatureConfig::none();
        for token in flags.split(',') {
            let token = token.trim();
            if token.is_empty() {
                continue;
            }
            match token.to_ascii_uppercase().as_str() {
                "OH" => cfg.oh = true,
                "DP" => cfg.dp = true,
                "BC" => cfg.bc = true,
                "LV" => cfg.lv = true,
                "PR" => cfg.pr = true,
                "WN" => cfg.wn = true,
                "EM" => cfg.em = true,
                "VS" => cfg.vs = true,
                "A&I" | "AI" => cfg.ai = true,
                _ => return Err(FeatureError::UnknownFlag(token.to_string())),
            }
        }
        if !cfg.any_enabled() {
            return Err(FeatureError::NoFeatureFlags);
        }
        Ok(cfg)
    }

    /// Legend-order flag string, e.g. `OH,DP,BC,LV,PR,WN,EM,A&I,VS`.
    pub fn flag_string(&self) -> String {
        let mut parts = Vec::new();
        for (on, token) in [
            (self.oh, "OH"),
            (self.dp, "DP"),
            (self.bc, "BC"),
            (self.lv, "LV"),
            (self.pr, "PR"),
            (self.wn, "WN"),
            (self.em, "EM"),
            (self.ai, "A&I"),
            (self.vs, "VS"),
        ] {
            if on {
                parts.push(token);
            }
        }
        let mut s = parts.join(",");
        if self.selpref_verbs.is_some() {
            s.push_str("+SP");
        }
        s
    }

    pub fn enabled(&self, group: Group) -> bool {
        match group {
            Group::Oh => self.oh,
            Group::Dp => self.dp,
            Group::Bc => self.bc,
            Group::Lv => self.lv,
            Group::Pr => self.pr,
            Group::Wn => self.wn,
            Group::Em => self.em,
            Group::Vs => self.vs,
            Group::Ai => self.ai,
            Group::Sp => self.selpref_verbs.is_some(),
        }
    }

    pub fn any_enabled(&self) -> bool {
        self.oh
            || self.dp
            || self.bc
            || self.lv
            || self.pr
            || self.wn
            || self.em
            || self.vs
            || self.ai
    }
}

impl fmt::Display for FeatureConfig {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.flag_string())
    }
}

/// Sparse vector over the concatenated feature space: strictly increasing
/// indices, finite nonzero values.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SparseVector {
    dim: usize,
    indices: Vec<usize>,
    values: Vec<f64>,
}

impl SparseVector {
    /// Build from (index, value) entries. Exact zeros are dropped, entries
    /// are sorted by index; duplicate indices, out-of-range indices and
    /// non-finite values are rejected.
    pub fn new(dim: usize, mut entries: Vec<(usize, f64)>) -> Result<Self, String> {
        entries.retain(|&(_, v)| v != 0.0);
        entries.sort_unstable_by_key(|&(i, _)| i);
        let mut indices = Vec::with_capacity(entries.len());
        let mut values = Vec::with_capacity(entries.len());
        for (index, value) in entries {
            if index >= dim {
                return Err(format!("index {index} out of range for dimension {dim}"));
            }
            if !value.is_finite() {
                return Err(format!("non-finite value at index {index}"));
            }
            if indices.last() == Some(&index) {
                return Err(format!("duplicate index {index}"));
            }
            indices.push(index);
            values.push(value);
        }
        Ok(SparseVector {
            dim,
            indices,
            values,
        })
    }

    pub fn zeros(dim: usize) -> Self {
        SparseVector {
            dim,
            indices: Vec::new(),
            values: Vec::new(),
        }
    }

    pub fn from_dense(dense: &[f64]) -> Self {
        let entries = dense
            .iter()
            .enumerate()
            .filter(|(_, &v)| v != 0.0)
            .map(|(i, &v)| (i, v))
            .collect();
        SparseVector::new(dense.len(), entries).expect("dense source is finite")
    }

    pub fn to_dense(&self) -> Vec<f64> {
        let mut dense = vec![0.0; self.dim];
        for (&i, &v) in self.indices.iter().zip(&self.values) {
            dense[i] = v;
        }
        dense
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn nnz(&self) -> usize {
        self.indices.len()
    }

    pub fn iter(&self) -> impl Iterator<Item = (usize, f64)> + '_ {
        self.indices.iter().zip(&self.values).map(|(&i, &v)| (i, v))
    }

    /// Sparse dot product by index merge.
    pub fn dot(&self, other: &SparseVector) -> f64 {
        let mut sum = 0.0;
        let (mut a, mut b) = (0, 0);
        while a < self.indices.len() && b < other.indices.len() {
            match self.indices[a].cmp(&other.indices[b]) {
                std::cmp::Ordering::Less => a += 1,
                std::cmp::Ordering::Greater => b += 1,
                std::cmp::Ordering::Equal => {
                    sum += self.values[a] * other.values[b];
                    a += 1;
                    b += 1;
                }
            }
        }
        sum
    }

    pub fn squared_norm(&self) -> f64 {
        self.values.iter().map(|v| v * v).sum()
    }

    /// ‖self − other‖².
    pub fn squared_distance(&self, other: &SparseVector) -> f64 {
        self.squared_norm() + other.squared_norm() - 2.0 * self.dot(other)
    }

    fn scale(&mut self, factor: f64) {
        for v in &mut self.values {
            *v *= factor;
        }
    }
}

/// Contiguous index range of one enabled group.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct GroupSpan {
    pub group: Group,
    pub offset: usize,
    pub width: usize,
}

impl GroupSpan {
    pub fn contains(&self, index: usize) -> bool {
        index >= self.offset && index < self.offset + self.width
    }
}

/// Frozen feature space: categorical dictionaries (mapping values to global
/// vector indices), the enabled group spans and the total dimension. Built
/// once on training data and reused verbatim at prediction time.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FeatureSpace {
    config: FeatureConfig,
    oh_dict: BTreeMap<String, usize>,
    dp_dict: BTreeMap<String, usize>,
    bc_dict: BTreeMap<String, usize>,
    lv_dict: BTreeMap<String, usize>,
    wn_dict: BTreeMap<String, usize>,
    groups: Vec<GroupSpan>,
    total_dim: usize,
}

const SPACE_FILE_VERSION: u32 = 1;

#[derive(Serialize, Deserialize)]
struct SpaceFile {
    version: u32,
    space: FeatureSpace,
}

/// Categorical values a sample contributes to one dictionary-backed group.
fn dict_values(
    group: Group,
    sample: &Sample,
    lex: &LexiconBundle,
    cfg: &FeatureConfig,
) -> Vec<String> {
    let grw = sample.grw();
    match group {
        Group::Oh => vec![grw.surface.clone()],
        Group::Dp => vec![grw.relation.clone()],
        Group::Bc => lex
            .brown
            .prefix(&grw.surface, cfg.brown_prefix_len)
            .map(str::to_string)
            .into_iter()
            .collect(),
        Group::Lv => lex
            .levin
            .categories_of(&grw.surface)
            .map(|cats| cats.iter().cloned().collect())
            .unwrap_or_default(),
        Group::Wn => lex
            .synsets
            .first_synset(&grw.surface)
            .map(str::to_string)
            .into_iter()
            .collect(),
        _ => Vec::new(),
    }
}

/// Freeze dictionaries and group layout from training data.
///
/// Dictionary indices are assigned in first-seen order over the training
/// samples and stored as global vector indices, so the construction is
/// deterministic for a given corpus. Word-level groups key off each sample's
/// first GRW.
pub fn build_feature_space(
    train: &[Sample],
    lex: &LexiconBundle,
    cfg: FeatureConfig,
) -> Result<FeatureSpace, FeatureError> {
    if train.is_empty() {
        return Err(FeatureError::EmptyTrainingSet);
    }
    if !cfg.any_enabled() {
        return Err(FeatureError::NoFeatureFlags);
    }

    let build_dict = |group: Group| -> Vec<String> {
        let mut seen = std::collections::HashSet::new();
        let mut ordered = Vec::new();
        for sample in train {
            for value in dict_values(group, sample, lex, &cfg) {
                if seen.insert(value.clone()) {
                    ordered.push(value);
                }
            }
        }
        ordered
    };

    let mut dicts: BTreeMap<&'static str, Vec<String>> = BTreeMap::new();
    for (name, group) in [
        ("oh", Group::Oh),
        ("dp", Group::Dp),
        ("bc", Group::Bc),
        ("lv", Group::Lv),
        ("wn", Group::Wn),
    ] {
        if cfg.enabled(group) {
            dicts.insert(name, build_dict(group));
        }
    }

    let width_of = |group: Group| -> usize {
        match group {
            Group::Oh => dicts["oh"].len(),
            Group::Dp => dicts["dp"].len(),
            Group::Bc => dicts["bc"].len(),
            Group::Lv => dicts["lv"].len(),
            Group::Pr => 2,
            Group::Wn => dicts["wn"].len(),
            Group::Em => lex.embeddings.dim(),
            Group::Vs => lex.vs_vectors.dim(),
            Group::Ai => 2,
            Group::Sp => 1,
        }
    };

    let mut groups = Vec::new();
    let mut offset = 0;
    for group in LAYOUT_ORDER {
        if cfg.enabled(group) {
            let width = width_of(group);
            groups.push(GroupSpan {
                group,
                offset,
                width,
            });
            offset += width;
        }
    }

    let globalize = |values: Option<&Vec<String>>, group: Group| -> BTreeMap<String, usize> {
        let Some(values) = values else {
            return BTreeMap::new();
        };
        let base = groups
            .iter()
            .find(|s| s.group == group)
            .map(|s| s.offset)
            .unwrap_or(0);
        values
            .iter()
            .enumerate()
            .map(|(i, v)| (v.clone(), base + i))
            .collect()
    };

    Ok(FeatureSpace {
        oh_dict: globalize(dicts.get("oh"), Group::Oh),
        dp_dict: globalize(dicts.get("dp"), Group::Dp),
        bc_dict: globalize(dicts.get("bc"), Group::Bc),
        lv_dict: globalize(dicts.get("lv"), Group::Lv),
        wn_dict: globalize(dicts.get("wn"), Group::Wn),
        config: cfg,
        groups,
        total_dim: offset,
    })
}

impl FeatureSpace {
    /// Total dimension k of the concatenated space (feeds γ = 1/k).
    pub fn dimension(&self) -> usize {
        self.total_dim
    }

    pub fn config(&self) -> &FeatureConfig {
        &self.config
    }

    pub fn group_spans(&self) -> &[GroupSpan] {
        &self.groups
    }

    pub fn group_span(&self, group: Group) -> Option<GroupSpan> {
        self.groups.iter().copied().find(|s| s.group == group)
    }

    pub fn oh_dict(&self) -> &BTreeMap<String, usize> {
        &self.oh_dict
    }

    pub fn dp_dict(&self) -> &BTreeMap<String, usize> {
        &self.dp_dict
    }

    pub fn save<W: std::io::Write>(&self, writer: W) -> Result<(), FeatureError> {
        serde_json::to_writer(
            writer,
            &SpaceFile {
                version: SPACE_FILE_VERSION,
                space: self.clone(),
            },
        )?;
        Ok(())
    }

    pub fn load<R: std::io::Read>(reader: R) -> Result<Self, FeatureError> {
        let file: SpaceFile = serde_json::from_reader(reader)?;
        if file.version != SPACE_FILE_VERSION {
            return Err(FeatureError::VersionMismatch(file.version));
        }
        Ok(file.space)
    }
}

/// Free-function form of [`FeatureSpace::dimension`].
pub fn dimension(space: &FeatureSpace) -> usize {
    space.dimension()
}

/// Map one sample onto the feature space.
///
/// The first listed GRW drives all word-level groups; a GRW unknown to a
/// resource leaves that group's block zero. Pure: vectorizing the same
/// sample twice gives identical vectors.
pub fn vectorize(sample: &Sample, space: &FeatureSpace, lex: &LexiconBundle) -> SparseVector {
    let cfg = &space.config;
    let grw = sample.grw();
    let mut entries: Vec<(usize, f64)> = Vec::new();

    for span in &space.groups {
        match span.group {
            Group::Oh => {
                if let Some(&idx) = space.oh_dict.get(&grw.surface) {
                    entries.push((idx, 1.0));
                }
            }
            Group::Dp => {
                if let Some(&idx) = space.dp_dict.get(&grw.relation) {
                    entries.push((idx, 1.0));
                }
            }
            Group::Bc => {
                if let Some(prefix) = lex.brown.prefix(&grw.surface, cfg.brown_prefix_len) {
                    if let Some(&idx) = space.bc_dict.get(prefix) {
                        entries.push((idx, 1.0));
                    }
                }
            }
            Group::Lv => {
                if let Some(cats) = lex.levin.categories_of(&grw.surface) {
                    for cat in cats {
                        if let Some(&idx) = space.lv_dict.get(cat) {
                            entries.push((idx, 1.0));
                        }
                    }
                }
            }
            Group::Pr => {
                if grw.is_preposition {
                    entries.push((span.offset, 1.0));
                }
                if lex.stopwords.contains(&grw.surface) {
                    entries.push((span.offset + 1, 1.0));
                }
            }
            Group::Wn => {
                if let Some(synset) = lex.synsets.first_synset(&grw.surface) {
                    if let Some(&idx) = space.wn_dict.get(synset) {
                        entries.push((idx, 1.0));
                    }
                }
            }
            Group::Em => {
                if let Some(vec) = lex.embeddings.vector(&grw.surface) {
                    if vec.len() == span.width {
                        entries.extend(vec.iter().enumerate().map(|(i, &v)| (span.offset + i, v)));
                    }
                }
            }
            Group::Vs => {
                if let Some(vec) = lex.vs_vectors.vector(&grw.surface) {
                    if vec.len() == span.width {
                        entries.extend(vec.iter().enumerate().map(|(i, &v)| (span.offset + i, v)));
                    }
                }
            }
            Group::Ai => {
                if let Some((abstractness, imaginability)) = lex.ai.lookup(&grw.surface) {
                    entries.push((span.offset, abstractness.unwrap_or(cfg.ai_missing_value)));
                    let imag = if cfg.ai_use_imaginability {
                        imaginability.unwrap_or(cfg.ai_missing_value)
                    } else {
                        0.0
                    };
                    entries.push((span.offset + 1, imag));
                }
            }
            Group::Sp => {
                if let Some(verbs) = &cfg.selpref_verbs {
                    if verbs.contains(&grw.surface) {
                        entries.push((span.offset, 1.0));
                    }
                }
            }
        }
    }

    let mut vector = SparseVector::new(space.total_dim, entries).expect("group spans are disjoint");
    if cfg.normalize {
        let norm = vector.squared_norm().sqrt();
        if norm > 0.0 {
            vector.scale(1.0 / norm);
        }
    }
    vector
}

/// Vectorize a whole corpus in order.
pub fn vectorize_corpus(
    samples: &[Sample],
    space: &FeatureSpace,
    lex: &LexiconBundle,
) -> Vec<SparseVector> {
    samples.iter().map(|s| vectorize(s, space, lex)).collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::corpus::{Grw, Label, Sample};
    use crate::lexicons;

    fn sample(id: &str, surface: &str, relation: &str, is_preposition: bool) -> Sample {
        Sample {
            id: id.into(),
            tokens: vec!["Britain".into()],
            pmw_index: 0,
            pmw_surface: "Britain".into(),
            grws: vec![Grw {
                surface: surface.into(),
                relation: relation.into(),
                is_preposition,
            }],
            label: Label::literal(),
        }
    }

    fn toy_bundle() -> LexiconBundle {
        LexiconBundle {
            ai: lexicons::load_ai("play\t0.6\t0.8\nwant\t0.9\t-\n".as_bytes()).unwrap(),
            brown: lexicons::load_brown("play\t0110110\nwant\t01\n".as_bytes()).unwrap(),
            levin: lexicons::load_levin("provide\t13.4.1\nprovide\t29.1\nplay\t26.7\n".as_bytes())
                .unwrap(),
            synsets: lexicons::load_synsets("play\tn#1022\nwant\tv#99\n".as_bytes()).unwrap(),
            embeddings: lexicons::load_embeddings("play\t0.1\t0.0\t-0.3\n".as_bytes(), 3).unwrap(),
            vs_vectors: lexicons::load_embeddings("play\t1.0\t2.0\n".as_bytes(), 2).unwrap(),
            stopwords: lexicons::load_wordlist("of\nthe\n".as_bytes()).unwrap(),
            prepositions: lexicons::load_wordlist("of\nin\nto\n".as_bytes()).unwrap(),
        }
    }

    fn flags(s: &str) -> FeatureConfig {
        FeatureConfig::from_flag_str(s).unwrap()
    }

    #[test]
    fn single_sample_oh_dp_space() {
        let train = vec![sample("s1", "play", "subj", false)];
        let space = build_feature_space(&train, &LexiconBundle::default(), flags("OH,DP")).unwrap();
        assert_eq!(space.dimension(), 2);
        assert_eq!(space.oh_dict.get("play"), Some(&0));
        assert_eq!(space.dp_dict.get("subj"), Some(&1));
    }

    #[test]
    fn em_only_space_has_embedding_width() {
        let train = vec![sample("s1", "play", "subj", false)];
        let space = build_feature_space(&train, &LexiconBundle::default(), flags("EM")).unwrap();
        assert_eq!(space.dimension(), 25);
    }

    #[test]
    fn full_space_dimension_is_dicts_plus_fixed_widths() {
        let train = vec![sample("s1", "play", "subj", false)];
        let lex = LexiconBundle::default();
        let space = build_feature_space(&train, &lex, FeatureConfig::default()).unwrap();
        // 25 + 64 + 2 + 2 fixed plus the dictionary widths
        assert!(space.dimension() >= 93);
        let dict_total = space.oh_dict.len()
            + space.dp_dict.len()
            + space.bc_dict.len()
            + space.lv_dict.len()
            + space.wn_dict.len();
        assert_eq!(space.dimension(), dict_total + 93);
    }

    #[test]
    fn empty_training_set_is_an_error() {
        assert!(matches!(
            build_feature_space(&[], &LexiconBundle::default(), FeatureConfig::default()),
            Err(FeatureError::EmptyTrainingSet)
        ));
    }

    #[test]
    fn no_flags_is_an_error() {
        let train = vec![sample("s1", "play", "subj", false)];
        assert!(matches!(
            build_feature_space(&train, &LexiconBundle::default(), FeatureConfig::none()),
            Err(FeatureError::NoFeatureFlags)
        ));
        assert!(matches!(
            FeatureConfig::from_flag_str(""),
            Err(FeatureError::NoFeatureFlags)
        ));
    }

    #[test]
    fn unknown_grw_yields_zero_vector() {
        let train = vec![sample("s1", "play", "subj", false)];
        let lex = toy_bundle();
        let space = build_feature_space(&train, &lex, flags("OH,EM")).unwrap();
        let unseen = sample("t1", "zzz", "subj", false);
        let vec = vectorize(&unseen, &space, &lex);
        assert_eq!(vec.nnz(), 0);
        assert_eq!(vec.dim(), space.oh_dict.len() + 3);

        // with the conventional 25-dim table the dimension is |oh_dict| + 25
        let default_lex = LexiconBundle::default();
        let space = build_feature_space(&train, &default_lex, flags("OH,EM")).unwrap();
        let vec = vectorize(&unseen, &space, &default_lex);
        assert_eq!(vec.nnz(), 0);
        assert_eq!(vec.dim(), space.oh_dict.len() + 25);
    }

    #[test]
    fn levin_block_is_n_hot() {
        let train = vec![sample("s1", "provide", "obj", false)];
        let lex = toy_bundle();
        let space = build_feature_space(&train, &lex, flags("LV")).unwrap();
        let vec = vectorize(&train[0], &space, &lex);
        assert_eq!(vec.nnz(), 2);
        assert!(vec.iter().all(|(_, v)| v == 1.0));
    }

    #[test]
    fn vectorize_is_deterministic() {
        let train = vec![
            sample("s1", "play", "subj", false),
            sample("s2", "provide", "obj", true),
        ];
        let lex = toy_bundle();
        let space = build_feature_space(&train, &lex, FeatureConfig::default()).unwrap();
        for s in &train {
            assert_eq!(vectorize(s, &space, &lex), vectorize(s, &space, &lex));
        }
    }

    #[test]
    fn pr_block_uses_annotation_and_stopword_list() {
        let train = vec![sample("s1", "of", "prep", true)];
        let lex = toy_bundle();
        let space = build_feature_space(&train, &lex, flags("PR")).unwrap();
        let vec = vectorize(&train[0], &space, &lex);
        assert_eq!(vec.to_dense(), vec![1.0, 1.0]);

        let plain = sample("s2", "play", "subj", false);
        assert_eq!(vectorize(&plain, &space, &lex).nnz(), 0);
    }

    #[test]
    fn ai_block_fills_missing_degree_with_configured_value() {
        let train = vec![sample("s1", "want", "subj", false)];
        let lex = toy_bundle();

        let space = build_feature_space(&train, &lex, flags("A&I")).unwrap();
        // want has abstractness 0.9, imaginability missing -> 0.0 slot dropped
        let vec = vectorize(&train[0], &space, &lex);
        assert_eq!(vec.to_dense(), vec![0.9, 0.0]);

        let mut cfg = flags("A&I");
        cfg.ai_missing_value = 0.5;
        let space = build_feature_space(&train, &lex, cfg).unwrap();
        assert_eq!(
            vectorize(&train[0], &space, &lex).to_dense(),
            vec![0.9, 0.5]
        );

        // absent word: zero block even with a nonzero missing value
        let mut cfg = flags("A&I");
        cfg.ai_missing_value = 0.5;
        let space = build_feature_space(&train, &lex, cfg).unwrap();
        let unseen = sample("t1", "zzz", "subj", false);
        assert_eq!(vectorize(&unseen, &space, &lex).nnz(), 0);
    }

    #[test]
    fn ai_imaginability_switch() {
        let train = vec![sample("s1", "play", "subj", false)];
        let lex = toy_bundle();
        let mut cfg = flags("A&I");
        cfg.ai_use_imaginability = false;
        let space = build_feature_space(&train, &lex, cfg).unwrap();
        assert_eq!(
            vectorize(&train[0], &space, &lex).to_dense(),
            vec![0.6, 0.0]
        );
    }

    #[test]
    fn brown_prefix_length_is_configurable() {
        let train = vec![
            sample("s1", "play", "subj", false),
            sample("s2", "want", "obj", false),
        ];
        let lex = toy_bundle();
        let mut cfg = flags("BC");
        cfg.brown_prefix_len = 2;
        let space = build_feature_space(&train, &lex, cfg).unwrap();
        // play -> "01", want -> "01" (whole path shorter than... equal to prefix)
        assert_eq!(space.bc_dict.len(), 1);
        let v1 = vectorize(&train[0], &space, &lex);
        let v2 = vectorize(&train[1], &space, &lex);
        assert_eq!(v1, v2);
    }

    #[test]
    fn selpref_verbs_add_indicator_group() {
        let train = vec![sample("s1", "want", "subj", false)];
        let lex = toy_bundle();
        let mut cfg = flags("OH");
        cfg.selpref_verbs = Some(["want".to_string()].into_iter().collect());
        let space = build_feature_space(&train, &lex, cfg).unwrap();
        assert_eq!(space.dimension(), 2);
        let vec = vectorize(&train[0], &space, &lex);
        assert_eq!(vec.to_dense(), vec![1.0, 1.0]);
    }

    #[test]
    fn group_spans_are_disjoint_and_cover_dim() {
        let train = vec![
            sample("s1", "play", "subj", false),
            sample("s2", "provide", "obj", true),
        ];
        let lex = toy_bundle();
        let space = build_feature_space(&train, &lex, FeatureConfig::default()).unwrap();
        let mut expected_offset = 0;
        for span in space.group_spans() {
            assert_eq!(span.offset, expected_offset);
            expected_offset += span.width;
        }
        assert_eq!(expected_offset, space.dimension());
    }

    #[test]
    fn one_hot_blocks_have_at_most_one_unit_entry() {
        let train: Vec<Sample> = vec![
            sample("s1", "play", "subj", false),
            sample("s2", "provide", "obj", true),
            sample("s3", "want", "prep", true),
        ];
        let lex = toy_bundle();
        let space = build_feature_space(&train, &lex, FeatureConfig::default()).unwrap();
        for s in &train {
            let vec = vectorize(s, &space, &lex);
            for group in [Group::Oh, Group::Bc, Group::Wn, Group::Dp] {
                let span = space.group_span(group).unwrap();
                let in_block: Vec<f64> = vec
                    .iter()
                    .filter(|(i, _)| span.contains(*i))
                    .map(|(_, v)| v)
                    .collect();
                assert!(
                    in_block.len() <= 1,
                    "{group:?} block of {} has {in_block:?}",
                    s.id
                );
                assert!(in_block.iter().all(|&v| v == 1.0));
            }
        }
    }

    #[test]
    fn dimension_is_monotone_in_flags() {
        let train = vec![
            sample("s1", "play", "subj", false),
            sample("s2", "provide", "obj", true),
        ];
        let lex = toy_bundle();
        // adding one more group never shrinks k
        let base = build_feature_space(&train, &lex, flags("OH,DP"))
            .unwrap()
            .dimension();
        for extra in [
            "OH,DP,BC",
            "OH,DP,LV",
            "OH,DP,PR",
            "OH,DP,WN",
            "OH,DP,EM",
            "OH,DP,VS",
            "OH,DP,A&I",
        ] {
            let k = build_feature_space(&train, &lex, flags(extra))
                .unwrap()
                .dimension();
            assert!(k >= base, "{extra}: {k} < {base}");
        }
    }

    #[test]
    fn space_roundtrips_through_json() {
        let train = vec![
            sample("s1", "play", "subj", false),
            sample("s2", "provide", "obj", true),
        ];
        let lex = toy_bundle();
        let space = build_feature_space(&train, &lex, FeatureConfig::default()).unwrap();
        let mut buf = Vec::new();
        space.save(&mut buf).unwrap();
        let loaded = FeatureSpace::load(buf.as_slice()).unwrap();
        assert_eq!(space, loaded);

        let mut buf2 = Vec::new();
        loaded.save(&mut buf2).unwrap();
        assert_eq!(buf, buf2);
    }

    #[test]
    fn flag_string_uses_legend_order() {
        assert_eq!(
            FeatureConfig::default().flag_string(),
            "OH,DP,BC,LV,PR,WN,EM,A&I,VS"
        );
        assert_eq!(flags("VS,A&I,OH").flag_string(), "OH,A&I,VS");
        assert_eq!(flags("ai").flag_string(), "A&I");
    }

    #[test]
    fn unknown_flag_is_an_error() {
        assert!(matches!(
            FeatureConfig::from_flag_str("OH,XX"),
            Err(FeatureError::UnknownFlag(_))
        ));
    }

    #[test]
    fn normalize_produces_unit_vectors() {
        let train = vec![sample("s1", "play", "subj", false)];
        let lex = toy_bundle();
        let mut cfg = flags("OH,DP,EM");
        cfg.normalize = true;
        let space = build_feature_space(&train, &lex, cfg).unwrap();
        let vec = vectorize(&train[0], &space, &lex);
        assert!((vec.squared_norm() - 1.0).abs() < 1e-12);
    }

    #[test]
    fn sparse_vector_rejects_bad_entries() {
        assert!(SparseVector::new(2, vec![(2, 1.0)]).is_err());
        assert!(SparseVector::new(2, vec![(0, 1.0), (0, 2.0)]).is_err());
        assert!(SparseVector::new(2, vec![(0, f64::NAN)]).is_err());
        let v = SparseVector::new(3, vec![(1, 0.0), (2, 5.0)]).unwrap();
        assert_eq!(v.nnz(), 1);
    }

    #[test]
    fn sparse_dot_matches_dense() {
        let a = SparseVector::from_dense(&[1.0, 0.0, 2.0, -1.0]);
        let b = SparseVector::from_dense(&[0.5, 3.0, 0.0, 2.0]);
        assert_eq!(a.dot(&b), 1.0 * 0.5 + -2.0);
        assert_eq!(a.dot(&b), b.dot(&a));
    }

    proptest::proptest! {
        #[test]
        fn dense_roundtrip_and_dot_symmetry(
            a in proptest::collection::vec(-5.0f64..5.0, 1..24),
            b in proptest::collection::vec(-5.0f64..5.0, 1..24),
        ) {
            let sa = SparseVector::from_dense(&a);
            proptest::prop_assert_eq!(&sa.to_dense(), &a);

            let n = a.len().min(b.len());
            let sa = SparseVector::from_dense(&a[..n]);
            let sb = SparseVector::from_dense(&b[..n]);
            proptest::prop_assert_eq!(sa.dot(&sb), sb.dot(&sa));
            let naive: f64 = a[..n].iter().zip(&b[..n]).map(|(x, y)| x * y).sum();
            proptest::prop_assert!((sa.dot(&sb) - naive).abs() <= 1e-9 * (1.0 + naive.abs()));
            proptest::prop_assert!(sa.squared_distance(&sa).abs() <= 1e-12);
        }
    }
}
