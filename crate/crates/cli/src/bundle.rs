//! Lexicon directory layout: a single `--lex-dir` holds every resource under
//! a fixed name, all optional. Missing files leave the corresponding
//! resource empty, which downstream feature code treats as "no coverage"
//! (zero blocks), never an error.
//!
//!   ai.tsv            word<TAB>abstractness<TAB>imaginability (- = missing)
//!   brown.tsv         word<TAB>bitpath
//!   levin.tsv         verb<TAB>categoryID (one pair per line)
//!   synsets.tsv       word<TAB>synsetID
//!   em.tsv            word<TAB>v1..vN  word embeddings (25-dim convention)
//!   vs.tsv            word<TAB>v1..vN  distributional vectors (64-dim)
//!   stopwords.txt     one word per line
//!   prepositions.txt  one word per line

use std::collections::BTreeMap;
use std::fs::File;
use std::io::{BufRead, BufReader};
use std::path::Path;

use anyhow::Context;
use metonym_core::lexicons::{self, LexiconBundle};

use crate::manifest::display_path;

pub struct LoadedBundle {
    pub bundle: LexiconBundle,
    /// resource name -> resolved path, for the manifest.
    pub paths: BTreeMap<String, String>,
}

fn open(path: &Path) -> anyhow::Result<BufReader<File>> {
    Ok(BufReader::new(
        File::open(path).with_context(|| format!("opening {}", path.display()))?,
    ))
}

/// Count the value columns of the first data line to size an embedding table.
fn sniff_dim(path: &Path) -> anyhow::Result<usize> {
    let reader = open(path)?;
    for line in reader.lines() {
        let line = line?;
        let trimmed = line.trim_end();
        if trimmed.trim().is_empty() || trimmed.starts_with('#') {
            continue;
        }
        return Ok(trimmed.split('\t').count().saturating_sub(1));
    }
    Ok(0)
}

pub fn load_bundle(dir: Option<&Path>) -> anyhow::Result<LoadedBundle> {
    let mut bundle = LexiconBundle::default();
    let mut paths = BTreeMap::new();
    let Some(dir) = dir else {
        return Ok(LoadedBundle { bundle, paths });
    };

    let mut record = |name: &str, path: &Path| {
        paths.insert(name.to_string(), display_path(path));
    };

    let ai = dir.join("ai.tsv");
    if ai.is_file() {
        bundle.ai =
            lexicons::load_ai(open(&ai)?).with_context(|| format!("loading {}", ai.display()))?;
        record("ai", &ai);
    }
    let brown = dir.join("brown.tsv");
    if brown.is_file() {
        bundle.brown = lexicons::load_brown(open(&brown)?)
            .with_context(|| format!("loading {}", brown.display()))?;
        record("brown", &brown);
    }
    let levin = dir.join("levin.tsv");
    if levin.is_file() {
        bundle.levin = lexicons::load_levin(open(&levin)?)
            .with_context(|| format!("loading {}", levin.display()))?;
        record("levin", &levin);
    }
    let synsets = dir.join("synsets.tsv");
    if synsets.is_file() {
        bundle.synsets = lexicons::load_synsets(open(&synsets)?)
            .with_context(|| format!("loading {}", synsets.display()))?;
        record("synsets", &synsets);
    }
    let em = dir.join("em.tsv");
    if em.is_file() {
        let dim = sniff_dim(&em)?;
        bundle.embeddings = lexicons::load_embeddings(open(&em)?, dim)
            .with_context(|| format!("loading {}", em.display()))?;
        record("embeddings", &em);
    }
    let vs = dir.join("vs.tsv");
    if vs.is_file() {
        let dim = sniff_dim(&vs)?;
        bundle.vs_vectors = lexicons::load_embeddings(open(&vs)?, dim)
            .with_context(|| format!("loading {}", vs.display()))?;
        record("vs_vectors", &vs);
    }
    let stopwords = dir.join("stopwords.txt");
    if stopwords.is_file() {
        bundle.stopwords = lexicons::load_wordlist(open(&stopwords)?)
            .with_context(|| format!("loading {}", stopwords.display()))?;
        record("stopwords", &stopwords);
    }
    let prepositions = dir.join("prepositions.txt");
    if prepositions.is_file() {
        bundle.prepositions = lexicons::load_wordlist(open(&prepositions)?)
            .with_context(|| format!("loading {}", prepositions.display()))?;
        record("prepositions", &prepositions);
    }

    Ok(LoadedBundle { bundle, paths })
}
