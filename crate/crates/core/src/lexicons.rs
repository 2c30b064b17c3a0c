//! Loaders for the lexical resources backing the feature groups.
//!
//! All resources are UTF-8 TSV with `#` comment lines:
//! abstractness/imaginability scores (`word<TAB>a<TAB>i`, `-` for a missing
//! degree), Brown cluster bit paths (`word<TAB>bitpath`), Levin verb
//! categories (`verb<TAB>categoryID`, one pair per line), first-synset
//! indexes (`word<TAB>synsetID`), embedding tables
//! (`word<TAB>v1<TAB>…<TAB>vdim`) and plain word lists (one word per line).
//!
//! Keys are lowercased at load and lookups lowercase the query, so lookups
//! never miss on casing. A word absent from a resource is a value (`None`),
//! never an error; the missing-word feature policy lives in
//! [`crate::features`].

use std::collections::{BTreeMap, BTreeSet, HashMap, HashSet};
use std::io::BufRead;

#[derive(Debug, thiserror::Error)]
pub enum LexiconError {
    #[error("line {line}: {reason}")]
    Parse { line: usize, reason: String },
    #[error("line {line}: word {word:?}: {reason}")]
    Entry {
        line: usize,
        word: String,
        reason: String,
    },
    #[error("word list is empty")]
    EmptyWordList,
    #[error("line {0}: {1}")]
    Io(usize, #[source] std::io::Error),
}

fn parse_err(line: usize, reason: impl Into<String>) -> LexiconError {
    LexiconError::Parse {
        line,
        reason: reason.into(),
    }
}

/// Iterate non-empty, non-comment lines with 1-based line numbers.
fn data_lines<R: BufRead>(
    reader: R,
) -> impl Iterator<Item = Result<(usize, String), LexiconError>> {
    reader.lines().enumerate().filter_map(|(idx, line)| {
        let lineno = idx + 1;
        match line {
            Err(e) => Some(Err(LexiconError::Io(lineno, e))),
            Ok(line) => {
                let trimmed = line.trim_end_matches(['\r', '\n']);
                if trimmed.trim().is_empty() || trimmed.starts_with('#') {
                    None
                } else {
                    Some(Ok((lineno, trimmed.to_string())))
                }
            }
        }
    })
}

/// Abstractness and imaginability degrees per word, each in [0,1] and each
/// independently optional, with at least one present per entry.
#[derive(Debug, Clone, Default)]
pub struct AiLexicon {
    entries: HashMap<String, (Option<f64>, Option<f64>)>,
    duplicates: usize,
}

impl AiLexicon {
    /// Degrees for a word, or `None` when the word is not covered.
    pub fn lookup(&self, word: &str) -> Option<(Option<f64>, Option<f64>)> {
        self.entries.get(&word.to_lowercase()).copied()
    }

    pub fn len(&self) -> usize {
        self.entries.len()
    }

    pub fn is_empty(&self) -> bool {
        self.entries.is_empty()
    }

    /// Number of duplicate words seen at load (last entry won).
    pub fn duplicates(&self) -> usize {
        self.duplicates
    }
}

/// Standalone lookup mirroring [`AiLexicon::lookup`].
pub fn lookup_ai(lex: &AiLexicon, word: &str) -> Option<(Option<f64>, Option<f64>)> {
    lex.lookup(word)
}

fn parse_degree(field: &str, line: usize, mrc_raw: bool) -> Result<Option<f64>, LexiconError> {
    if field == "-" {
        return Ok(None);
    }
    let raw: f64 = field
        .parse()
        .map_err(|_| parse_err(line, format!("bad degree {field:?}")))?;
    if !raw.is_finite() {
        return Err(parse_err(line, format!("degree {field:?} is not finite")));
    }
    let value = if mrc_raw {
        (raw / 700.0).clamp(0.0, 1.0)
    } else {
        raw
    };
    if !(0.0..=1.0).contains(&value) {
        return Err(parse_err(line, format!("degree {value} outside [0,1]")));
    }
    Ok(Some(value))
}

/// Load abstractness/imaginability scores. `word<TAB>a<TAB>i`, with `-` for
/// a missing degree; a line with both degrees missing is an error. With
/// `mrc_raw` set, raw MRC ratings are divided by 700 and clamped to [0,1]
/// instead of being range-checked.
pub fn load_ai_with<R: BufRead>(reader: R, mrc_raw: bool) -> Result<AiLexicon, LexiconError> {
    let mut lex = AiLexicon::default();
    for item in data_lines(reader) {
        let (lineno, line) = item?;
        let fields: Vec<&str> = line.split('\t').collect();
        if fields.len() != 3 {
            return Err(parse_err(
                lineno,
                format!("expected 3 tab-separated fields, got {}", fields.len()),
            ));
        }
        let abstractness = parse_degree(fields[1], lineno, mrc_raw)?;
        let imaginability = parse_degree(fields[2], lineno, mrc_raw)?;
        if abstractness.is_none() && imaginability.is_none() {
            return Err(parse_err(lineno, "both degrees missing"));
        }
        if lex
            .entries
            .insert(fields[0].to_lowercase(), (abstractness, imaginability))
            .is_some()
        {
            lex.duplicates += 1;
            log::warn!(
                "ai lexicon line {lineno}: duplicate word {:?}, last entry wins",
                fields[0]
            );
        }
    }
    Ok(lex)
}

pub fn load_ai<R: BufRead>(reader: R) -> Result<AiLexicon, LexiconError> {
    load_ai_with(reader, false)
}

/// Brown cluster bit-string paths per word.
#[derive(Debug, Clone, Default)]
pub struct BrownLexicon {
    paths: HashMap<String, String>,
    duplicates: usize,
}

impl BrownLexicon {
    pub fn path(&self, word: &str) -> Option<&str> {
        self.paths.get(&word.to_lowercase()).map(String::as_str)
    }

    /// Cluster path truncated to `prefix_len`; shorter paths are used whole.
    pub fn prefix(&self, word: &str, prefix_len: usize) -> Option<&str> {
        self.path(word).map(|p| &p[..p.len().min(prefix_len)])
    }

    pub fn len(&self) -> usize {
        self.paths.len()
    }

    pub fn is_empty(&self) -> bool {
        self.paths.is_empty()
    }

    pub fn duplicates(&self) -> usize {
        self.duplicates
    }
}

/// Load Brown cluster paths, `word<TAB>bitpath` with path characters in {0,1}.
pub fn load_brown<R: BufRead>(reader: R) -> Result<BrownLexicon, LexiconError> {
    let mut lex = BrownLexicon::default();
    for item in data_lines(reader) {
        let (lineno, line) = item?;
        let fields: Vec<&str> = line.split('\t').collect();
        if fields.len() != 2 {
            return Err(parse_err(
                lineno,
                format!("expected 2 tab-separated fields, got {}", fields.len()),
            ));
        }
        let path = fields[1];
        if path.is_empty() {
            return Err(LexiconError::Entry {
                line: lineno,
                word: fields[0].into(),
                reason: "empty path".into(),
            });
        }
        if !path.bytes().all(|b| b == b'0' || b == b'1') {
            return Err(LexiconError::Entry {
                line: lineno,
                word: fields[0].into(),
                reason: format!("path {path:?} has characters outside {{0,1}}"),
            });
        }
        if lex
            .paths
            .insert(fields[0].to_lowercase(), path.to_string())
            .is_some()
        {
            lex.duplicates += 1;
            log::warn!(
                "brown lexicon line {lineno}: duplicate word {:?}, last entry wins",
                fields[0]
            );
        }
    }
    Ok(lex)
}

/// Levin verb categories: a verb can belong to several, so entries are sets,
/// encoded N-hot downstream. The category dictionary covers every ID seen.
#[derive(Debug, Clone, Default)]
pub struct LevinLexicon {
    verbs: HashMap<String, BTreeSet<String>>,
    categories: BTreeSet<String>,
    duplicates: usize,
}

impl LevinLexicon {
    pub fn categories_of(&self, verb: &str) -> Option<&BTreeSet<String>> {
        self.verbs.get(&verb.to_lowercase())
    }

    pub fn category_dictionary(&self) -> &BTreeSet<String> {
        &self.categories
    }

    pub fn len(&self) -> usize {
        self.verbs.len()
    }

    pub fn is_empty(&self) -> bool {
        self.verbs.is_empty()
    }

    pub fn duplicates(&self) -> usize {
        self.duplicates
    }
}

/// Load Levin categories, `verb<TAB>categoryID` one pair per line; repeated
/// verbs union their categories.
pub fn load_levin<R: BufRead>(reader: R) -> Result<LevinLexicon, LexiconError> {
    let mut lex = LevinLexicon::default();
    for item in data_lines(reader) {
        let (lineno, line) = item?;
        let fields: Vec<&str> = line.split('\t').collect();
        if fields.len() != 2 {
            return Err(parse_err(
                lineno,
                format!("expected 2 tab-separated fields, got {}", fields.len()),
            ));
        }
        let category = fields[1];
        if category.is_empty() {
            return Err(LexiconError::Entry {
                line: lineno,
                word: fields[0].into(),
                reason: "empty category ID".into(),
            });
        }
        lex.categories.insert(category.to_string());
        let inserted = lex
            .verbs
            .entry(fields[0].to_lowercase())
            .or_default()
            .insert(category.to_string());
        if !inserted {
            lex.duplicates += 1;
            log::warn!(
                "levin lexicon line {lineno}: duplicate pair {:?}/{category:?}",
                fields[0]
            );
        }
    }
    Ok(lex)
}

/// First WordNet synset ID per word, part of speech disregarded.
#[derive(Debug, Clone, Default)]
pub struct SynsetIndex {
    synsets: HashMap<String, String>,
    duplicates: usize,
}

impl SynsetIndex {
    pub fn first_synset(&self, word: &str) -> Option<&str> {
        self.synsets.get(&word.to_lowercase()).map(String::as_str)
    }

    pub fn len(&self) -> usize {
        self.synsets.len()
    }

    pub fn is_empty(&self) -> bool {
        self.synsets.is_empty()
    }

    pub fn duplicates(&self) -> usize {
        self.duplicates
    }
}

/// Load the synset index, `word<TAB>synsetID`.
pub fn load_synsets<R: BufRead>(reader: R) -> Result<SynsetIndex, LexiconError> {
    let mut lex = SynsetIndex::default();
    for item in data_lines(reader) {
        let (lineno, line) = item?;
        let fields: Vec<&str> = line.split('\t').collect();
        if fields.len() != 2 {
            return Err(parse_err(
                lineno,
                format!("expected 2 tab-separated fields, got {}", fields.len()),
            ));
        }
        if fields[1].is_empty() {
            return Err(LexiconError::Entry {
                line: lineno,
                word: fields[0].into(),
                reason: "empty synset ID".into(),
            });
        }
        if lex
            .synsets
            .insert(fields[0].to_lowercase(), fields[1].to_string())
            .is_some()
        {
            lex.duplicates += 1;
            log::warn!(
                "synset index line {lineno}: duplicate word {:?}, last entry wins",
                fields[0]
            );
        }
    }
    Ok(lex)
}

/// Fixed-dimension real vectors per word.
#[derive(Debug, Clone)]
pub struct EmbeddingTable {
    dim: usize,
    vectors: HashMap<String, Vec<f64>>,
    duplicates: usize,
}

impl EmbeddingTable {
    /// An empty table of the given dimension.
    pub fn empty(dim: usize) -> Self {
        EmbeddingTable {
            dim,
            vectors: HashMap::new(),
            duplicates: 0,
        }
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn vector(&self, word: &str) -> Option<&[f64]> {
        self.vectors.get(&word.to_lowercase()).map(Vec::as_slice)
    }

    pub fn len(&self) -> usize {
        self.vectors.len()
    }

    pub fn is_empty(&self) -> bool {
        self.vectors.is_empty()
    }

    pub fn duplicates(&self) -> usize {
        self.duplicates
    }
}

/// Load an embedding table, `word<TAB>v1<TAB>…<TAB>vdim`, enforcing `dim`
/// values per line and finite entries.
pub fn load_embeddings<R: BufRead>(reader: R, dim: usize) -> Result<EmbeddingTable, LexiconError> {
    let mut table = EmbeddingTable::empty(dim);
    for item in data_lines(reader) {
        let (lineno, line) = item?;
        let mut fields = line.split('\t');
        let word = fields.next().expect("split yields at least one field");
        let values: Vec<f64> = fields
            .map(|f| {
                f.parse::<f64>().map_err(|_| LexiconError::Entry {
                    line: lineno,
                    word: word.into(),
                    reason: format!("bad value {f:?}"),
                })
            })
            .collect::<Result<_, _>>()?;
        if values.len() != dim {
            return Err(LexiconError::Entry {
                line: lineno,
                word: word.into(),
                reason: format!("expected {dim} values, got {}", values.len()),
            });
        }
        if let Some(bad) = values.iter().find(|v| !v.is_finite()) {
            return Err(LexiconError::Entry {
                line: lineno,
                word: word.into(),
                reason: format!("non-finite value {bad}"),
            });
        }
        if table.vectors.insert(word.to_lowercase(), values).is_some() {
            table.duplicates += 1;
            log::warn!("embedding table line {lineno}: duplicate word {word:?}, last entry wins");
        }
    }
    Ok(table)
}

/// A stopword or preposition list.
#[derive(Debug, Clone, Default)]
pub struct WordList {
    words: HashSet<String>,
    duplicates: usize,
}

impl WordList {
    pub fn contains(&self, word: &str) -> bool {
        self.words.contains(&word.to_lowercase())
    }

    pub fn len(&self) -> usize {
        self.words.len()
    }

    pub fn is_empty(&self) -> bool {
        self.words.is_empty()
    }

    pub fn duplicates(&self) -> usize {
        self.duplicates
    }

    pub fn iter(&self) -> impl Iterator<Item = &str> {
        self.words.iter().map(String::as_str)
    }
}

impl FromIterator<String> for WordList {
    fn from_iter<I: IntoIterator<Item = String>>(iter: I) -> Self {
        let mut list = WordList::default();
        for word in iter {
            list.words.insert(word.to_lowercase());
        }
        list
    }
}

/// Load a word list, one word per line; an empty list is an error.
pub fn load_wordlist<R: BufRead>(reader: R) -> Result<WordList, LexiconError> {
    let mut list = WordList::default();
    for item in data_lines(reader) {
        let (lineno, line) = item?;
        let word = line.trim();
        if !list.words.insert(word.to_lowercase()) {
            list.duplicates += 1;
            log::warn!("word list line {lineno}: duplicate word {word:?}");
        }
    }
    if list.words.is_empty() {
        return Err(LexiconError::EmptyWordList);
    }
    Ok(list)
}

/// All loaded resources in one place: feature code takes the bundle and
/// consults whichever resources its configuration needs. Every field
/// defaults to empty, so a bundle can be assembled from whatever files are
/// on hand; absent resources simply yield zero blocks downstream.
#[derive(Debug, Clone)]
pub struct LexiconBundle {
    pub ai: AiLexicon,
    pub brown: BrownLexicon,
    pub levin: LevinLexicon,
    pub synsets: SynsetIndex,
    /// Word embedding table (the `EM` group), conventionally 25-dimensional.
    pub embeddings: EmbeddingTable,
    /// Distributional vector table (the `VS` group), conventionally 64-dimensional.
    pub vs_vectors: EmbeddingTable,
    pub stopwords: WordList,
    pub prepositions: WordList,
}

pub const DEFAULT_EM_DIM: usize = 25;
pub const DEFAULT_VS_DIM: usize = 64;

impl Default for LexiconBundle {
    fn default() -> Self {
        LexiconBundle {
            ai: AiLexicon::default(),
            brown: BrownLexicon::default(),
            levin: LevinLexicon::default(),
            synsets: SynsetIndex::default(),
            embeddings: EmbeddingTable::empty(DEFAULT_EM_DIM),
            vs_vectors: EmbeddingTable::empty(DEFAULT_VS_DIM),
            stopwords: WordList::default(),
            prepositions: WordList::default(),
        }
    }
}

/// Fraction of samples whose first GRW is covered by each resource.
#[derive(Debug, Clone, serde::Serialize)]
pub struct CoverageReport {
    pub n_samples: usize,
    /// resource name → (hits, fraction of samples covered)
    pub resources: BTreeMap<&'static str, (usize, f64)>,
}

/// Count how many first GRWs each resource knows about.
pub fn grw_coverage(samples: &[crate::corpus::Sample], bundle: &LexiconBundle) -> CoverageReport {
    let n = samples.len();
    let mut resources = BTreeMap::new();
    let mut tally = |name: &'static str, hits: usize| {
        let frac = if n == 0 { 0.0 } else { hits as f64 / n as f64 };
        resources.insert(name, (hits, frac));
    };
    let grws: Vec<&str> = samples.iter().map(|s| s.grw().surface.as_str()).collect();
    tally(
        "ai",
        grws.iter()
            .filter(|w| bundle.ai.lookup(w).is_some())
            .count(),
    );
    tally(
        "brown",
        grws.iter()
            .filter(|w| bundle.brown.path(w).is_some())
            .count(),
    );
    tally(
        "levin",
        grws.iter()
            .filter(|w| bundle.levin.categories_of(w).is_some())
            .count(),
    );
    tally(
        "synsets",
        grws.iter()
            .filter(|w| bundle.synsets.first_synset(w).is_some())
            .count(),
    );
    tally(
        "embeddings",
        grws.iter()
            .filter(|w| bundle.embeddings.vector(w).is_some())
            .count(),
    );
    tally(
        "vs_vectors",
        grws.iter()
            .filter(|w| bundle.vs_vectors.vector(w).is_some())
            .count(),
    );
    tally(
        "stopwords",
        grws.iter().filter(|w| bundle.stopwords.contains(w)).count(),
    );
    tally(
        "prepositions",
        grws.iter()
            .filter(|w| bundle.prepositions.contains(w))
            .count(),
    );
    CoverageReport {
        n_samples: n,
        resources,
    }
}
