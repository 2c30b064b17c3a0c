//! Selectional-preference ratios for verbs.
//!
//! From aggregated subject counts (how often each verb took a person
//! subject versus a location subject) two conditional probabilities are
//! formed per verb, P(verb|person) = count(person,verb)/count(person) and
//! P(verb|location) = count(location,verb)/count(location), and their ratio
//! ranks verbs by how strongly they select for person subjects. A location
//! subject under a strongly person-selecting verb is a metonymy signal. The
//! resulting verb list is a standalone artifact; it is not wired into the
//! classifier unless explicitly injected.

use std::collections::BTreeMap;
use std::io::BufRead;

use serde::Serialize;

#[derive(Debug, thiserror::Error)]
pub enum SelprefError {
    #[error("line {line}: {reason}")]
    Parse { line: usize, reason: String },
    #[error("missing {0} header")]
    MissingTotal(&'static str),
    #[error("verb {verb:?}: {kind} counts sum to {sum}, exceeding the total {total}")]
    CountsExceedTotal {
        verb: String,
        kind: &'static str,
        sum: u64,
        total: u64,
    },
    #[error("{0} total is zero")]
    ZeroTotal(&'static str),
    #[error("line {0}: {1}")]
    Io(usize, #[source] std::io::Error),
}

fn parse_err(line: usize, reason: impl Into<String>) -> SelprefError {
    SelprefError::Parse {
        line,
        reason: reason.into(),
    }
}

/// Aggregated subject counts: per-verb person/location occurrence counts and
/// the overall person/location subject totals (which may include verbs not
/// in the maps).
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct NgramCounts {
    pub count_person_verb: BTreeMap<String, u64>,
    pub count_loc_verb: BTreeMap<String, u64>,
    pub count_person: u64,
    pub count_location: u64,
}

/// Parse a count file: `#PERSON_TOTAL n` and `#LOCATION_TOTAL m` headers
/// plus `verb<TAB>person_count<TAB>location_count` lines. Other `#` lines
/// are comments.
pub fn parse_counts<R: BufRead>(reader: R) -> Result<NgramCounts, SelprefError> {
    let mut person_total: Option<u64> = None;
    let mut location_total: Option<u64> = None;
    let mut count_person_verb = BTreeMap::new();
    let mut count_loc_verb = BTreeMap::new();

    for (idx, line) in reader.lines().enumerate() {
        let lineno = idx + 1;
        let line = line.map_err(|e| SelprefError::Io(lineno, e))?;
        let line = line.trim_end_matches(['\r', '\n']);
        if line.trim().is_empty() {
            continue;
        }
        if let Some(rest) = line.strip_prefix("#PERSON_TOTAL") {
            let value = parse_total(rest, lineno)?;
            if person_total.replace(value).is_some() {
                return Err(parse_err(lineno, "duplicate #PERSON_TOTAL header"));
            }
            continue;
        }
        if let Some(rest) = line.strip_prefix("#LOCATION_TOTAL") {
            let value = parse_total(rest, lineno)?;
            if location_total.replace(value).is_some() {
                return Err(parse_err(lineno, "duplicate #LOCATION_TOTAL header"));
            }
            continue;
        }
        if line.starts_with('#') {
            continue;
        }
        let fields: Vec<&str> = line.split('\t').collect();
        if fields.len() != 3 {
            return Err(parse_err(
                lineno,
                format!("expected 3 tab-separated fields, got {}", fields.len()),
            ));
        }
        let verb = fields[0].to_lowercase();
        let person = parse_count(fields[1], lineno)?;
        let location = parse_count(fields[2], lineno)?;
        if count_person_verb.insert(verb.clone(), person).is_some() {
            log::warn!("count file line {lineno}: duplicate verb {verb:?}, last entry wins");
        }
        count_loc_verb.insert(verb, location);
    }

    let count_person = person_total.ok_or(SelprefError::MissingTotal("#PERSON_TOTAL"))?;
    let count_location = location_total.ok_or(SelprefError::MissingTotal("#LOCATION_TOTAL"))?;

    let person_sum: u64 = count_person_verb.values().sum();
    if person_sum > count_person {
        let verb = heaviest(&count_person_verb);
        return Err(SelprefError::CountsExceedTotal {
            verb,
            kind: "person",
            sum: person_sum,
            total: count_person,
        });
    }
    let loc_sum: u64 = count_loc_verb.values().sum();
    if loc_sum > count_location {
        let verb = heaviest(&count_loc_verb);
        return Err(SelprefError::CountsExceedTotal {
            verb,
            kind: "location",
            sum: loc_sum,
            total: count_location,
        });
    }

    Ok(NgramCounts {
        count_person_verb,
        count_loc_verb,
        count_person,
        count_location,
    })
}

fn heaviest(map: &BTreeMap<String, u64>) -> String {
    map.iter()
        .max_by_key(|(_, &v)| v)
        .map(|(k, _)| k.clone())
        .unwrap_or_default()
}

fn parse_total(rest: &str, line: usize) -> Result<u64, SelprefError> {
    parse_count(rest.trim(), line)
}

fn parse_count(field: &str, line: usize) -> Result<u64, SelprefError> {
    let signed: i64 = field
        .trim()
        .parse()
        .map_err(|_| parse_err(line, format!("bad count {field:?}")))?;
    u64::try_from(signed).map_err(|_| parse_err(line, format!("negative count {signed}")))
}

/// Probabilities and their ratio for one verb. The ratio is +∞ when the
/// location probability is zero and the person probability positive.
#[derive(Debug, Clone, PartialEq)]
pub struct VerbRatioRow {
    pub verb: String,
    pub p_verb_given_person: f64,
    pub p_verb_given_location: f64,
    pub ratio: f64,
}

impl Serialize for VerbRatioRow {
    fn serialize<S: serde::Serializer>(&self, serializer: S) -> Result<S::Ok, S::Error> {
        use serde::ser::SerializeStruct;
        let mut s = serializer.serialize_struct("VerbRatioRow", 4)?;
        s.serialize_field("verb", &self.verb)?;
        s.serialize_field("p_verb_given_person", &self.p_verb_given_person)?;
        s.serialize_field("p_verb_given_location", &self.p_verb_given_location)?;
        // JSON has no Infinity; emit the string "inf" instead of null
        if self.ratio.is_finite() {
            s.serialize_field("ratio", &self.ratio)?;
        } else {
            s.serialize_field("ratio", "inf")?;
        }
        s.end()
    }
}

/// One row per verb that occurred at all, sorted by ratio descending with
/// lexicographic tie-break. Verbs with a zero count on both sides have an
/// undefined ratio and are omitted.
pub fn verb_ratios(counts: &NgramCounts) -> Result<Vec<VerbRatioRow>, SelprefError> {
    if counts.count_person == 0 {
        return Err(SelprefError::ZeroTotal("person"));
    }
    if counts.count_location == 0 {
        return Err(SelprefError::ZeroTotal("location"));
    }
    let verbs: std::collections::BTreeSet<&String> = counts
        .count_person_verb
        .keys()
        .chain(counts.count_loc_verb.keys())
        .collect();

    let mut rows = Vec::new();
    for verb in verbs {
        let person = counts.count_person_verb.get(verb).copied().unwrap_or(0);
        let location = counts.count_loc_verb.get(verb).copied().unwrap_or(0);
        if person == 0 && location == 0 {
            continue;
        }
        let p_person = person as f64 / counts.count_person as f64;
        let p_location = location as f64 / counts.count_location as f64;
        let ratio = if p_location > 0.0 {
            p_person / p_location
        } else {
            f64::INFINITY
        };
        rows.push(VerbRatioRow {
            verb: verb.clone(),
            p_verb_given_person: p_person,
            p_verb_given_location: p_location,
            ratio,
        });
    }
    rows.sort_by(|a, b| {
        b.ratio
            .partial_cmp(&a.ratio)
            .expect("ratios are never NaN")
            .then_with(|| a.verb.cmp(&b.verb))
    });
    Ok(rows)
}

/// Verbs whose ratio meets the threshold, in ranked order.
pub fn select_restricted(rows: &[VerbRatioRow], threshold: f64) -> Vec<String> {
    rows.iter()
        .filter(|r| r.ratio >= threshold)
        .map(|r| r.verb.clone())
        .collect()
}

/// Write rows as `verb<TAB>p_person<TAB>p_location<TAB>ratio` (infinite
/// ratios print as `inf`).
pub fn write_ratios<W: std::io::Write>(
    rows: &[VerbRatioRow],
    mut writer: W,
) -> std::io::Result<()> {
    for row in rows {
        writeln!(
            writer,
            "{}\t{}\t{}\t{}",
            row.verb, row.p_verb_given_person, row.p_verb_given_location, row.ratio
        )?;
    }
    Ok(())
}
