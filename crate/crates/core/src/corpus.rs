//! Citation corpus ingestion and environment extraction.
//!
//! A [`CitationCorpus`] holds one time slice of aggregated journal-journal
//! citation counts plus a registry of journal metadata. An [`Environment`]
//! is the focal journal together with the journals selected by citation
//! direction and a count threshold.

use std::collections::BTreeMap;
use std::io::{Read, Write};

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Journal registry entry. `name` defaults to the id until metadata is merged.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct JournalRef {
    pub id: String,
    pub name: String,
    pub impact_factor: Option<f64>,
}

impl JournalRef {
    fn from_id(id: &str) -> Self {
        JournalRef {
            id: id.to_owned(),
            name: id.to_owned(),
            impact_factor: None,
        }
    }
}

/// One directed, weighted citation record: `citing` journal cites `cited`
/// journal `count` times within the corpus slice.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct CitationRecord {
    pub citing: String,
    pub cited: String,
    pub count: u64,
}

/// Citation flow direction relative to the focal journal.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Direction {
    /// Journals the focal journal cites (its intellectual imports).
    Import,
    /// Journals citing the focal journal (its intellectual exports).
    Export,
}

impl Direction {
    pub fn as_str(self) -> &'static str {
        match self {
            Direction::Import => "import",
            Direction::Export => "export",
        }
    }
}

impl std::fmt::Display for Direction {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(self.as_str())
    }
}

impl std::str::FromStr for Direction {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.to_ascii_lowercase().as_str() {
            "import" => Ok(Direction::Import),
            "export" => Ok(Direction::Export),
            other => Err(Error::InvalidParameter(format!(
                "unknown direction '{other}' (expected 'import' or 'export')"
            ))),
        }
    }
}

/// One time slice of journal-journal citation data.
///
/// Journals and records are kept in sorted maps so that iteration order, and
/// therefore every downstream artifact, is deterministic.
#[derive(Debug, Clone, PartialEq, Default)]
pub struct CitationCorpus {
    label: String,
    journals: BTreeMap<String, JournalRef>,
    records: BTreeMap<(String, String), u64>,
}

const CITATION_HEADER: [&str; 3] = ["citing", "cited", "count"];
const METADATA_HEADER: [&str; 3] = ["id", "name", "impact_factor"];

impl CitationCorpus {
    pub fn new(label: impl Into<String>) -> Self {
        CitationCorpus {
            label: label.into(),
            ..Default::default()
        }
    }

    pub fn label(&self) -> &str {
        &self.label
    }

    pub fn set_label(&mut self, label: impl Into<String>) {
        self.label = label.into();
    }

    pub fn journal(&self, id: &str) -> Option<&JournalRef> {
        self.journals.get(id)
    }

    pub fn journals(&self) -> impl Iterator<Item = &JournalRef> {
        self.journals.values()
    }

    pub fn journal_map(&self) -> &BTreeMap<String, JournalRef> {
        &self.journals
    }

    pub fn journal_count(&self) -> usize {
        self.journals.len()
    }

    pub fn record_count(&self) -> usize {
        self.records.len()
    }

    /// Citation count for the ordered pair, 0 when no record exists.
    pub fn count(&self, citing: &str, cited: &str) -> u64 {
        self.records
            .get(&(citing.to_owned(), cited.to_owned()))
            .copied()
            .unwrap_or(0)
    }

    pub fn records(&self) -> impl Iterator<Item = CitationRecord> + '_ {
        self.records.iter().map(|((citing, cited), count)| CitationRecord {
            citing: citing.clone(),
            cited: cited.clone(),
            count: *count,
        })
    }

    pub(crate) fn register(&mut self, id: &str) {
        self.journals
            .entry(id.to_owned())
            .or_insert_with(|| JournalRef::from_id(id));
    }

    /// Insert a record, registering both endpoints. Duplicate (citing, cited)
    /// pairs are rejected, never summed.
    pub fn insert_record(&mut self, citing: &str, cited: &str, count: u64) -> Result<()> {
        if count < 1 {
            return Err(Error::InvalidParameter(format!(
                "citation count must be >= 1, got {count} for {citing} -> {cited}"
            )));
        }
        let key = (citing.to_owned(), cited.to_owned());
        if self.records.contains_key(&key) {
            return Err(Error::DuplicateRecord {
                line: 0,
                citing: citing.to_owned(),
                cited: cited.to_owned(),
            });
        }
        self.register(citing);
        self.register(cited);
        self.records.insert(key, count);
        Ok(())
    }

    /// Register a journal with metadata, overwriting name and impact factor.
    pub fn upsert_journal(&mut self, journal: JournalRef) {
        self.journals.insert(journal.id.clone(), journal);
    }

    /// Parse a citation edge list in the `citing,cited,count` CSV dialect.
    pub fn parse_citations<R: Read>(reader: R, label: impl Into<String>) -> Result<Self> {
        let mut csv_reader = csv::ReaderBuilder::new()
            .has_headers(true)
            .flexible(false)
            .from_reader(reader);

        check_header(&mut csv_reader, &CITATION_HEADER)?;

        let mut corpus = CitationCorpus::new(label);
        let mut record = csv::StringRecord::new();
        loop {
            match csv_reader.read_record(&mut record) {
                Ok(false) => break,
                Ok(true) => {}
                Err(e) => return Err(csv_error(e)),
            }
            let line = record.position().map(|p| p.line()).unwrap_or(0);
            if record.len() != 3 {
                return Err(Error::Parse {
                    line,
                    message: format!("expected 3 fields, found {}", record.len()),
                });
            }
            let citing = non_empty(&record[0], line, "citing")?;
            let cited = non_empty(&record[1], line, "cited")?;
            let count: u64 = record[2].trim().parse().map_err(|_| Error::Parse {
                line,
                message: format!("count '{}' is not a positive integer", &record[2]),
            })?;
            if count < 1 {
                return Err(Error::Parse {
                    line,
                    message: "count must be >= 1".to_owned(),
                });
            }
            let key = (citing.to_owned(), cited.to_owned());
            if corpus.records.contains_key(&key) {
                return Err(Error::DuplicateRecord {
                    line,
                    citing: citing.to_owned(),
                    cited: cited.to_owned(),
                });
            }
            corpus.register(citing);
            corpus.register(cited);
            corpus.records.insert(key, count);
        }
        Ok(corpus)
    }

    /// Merge a companion `id,name,impact_factor` metadata table. Journals not
    /// yet seen in any record are registered.
    pub fn merge_metadata<R: Read>(&mut self, reader: R) -> Result<()> {
        let mut csv_reader = csv::ReaderBuilder::new()
            .has_headers(true)
            .flexible(false)
            .from_reader(reader);

        check_header(&mut csv_reader, &METADATA_HEADER)?;

        let mut seen = std::collections::BTreeSet::new();
        let mut record = csv::StringRecord::new();
        loop {
            match csv_reader.read_record(&mut record) {
                Ok(false) => break,
                Ok(true) => {}
                Err(e) => return Err(csv_error(e)),
            }
            let line = record.position().map(|p| p.line()).unwrap_or(0);
            let id = non_empty(&record[0], line, "id")?;
            if !seen.insert(id.to_owned()) {
                return Err(Error::Parse {
                    line,
                    message: format!("duplicate metadata row for journal '{id}'"),
                });
            }
            let name = record[1].trim();
            let impact_factor = match record[2].trim() {
                "" => None,
                raw => {
                    let value: f64 = raw.parse().map_err(|_| Error::Parse {
                        line,
                        message: format!("impact_factor '{raw}' is not a number"),
                    })?;
                    if value < 0.0 {
                        return Err(Error::Parse {
                            line,
                            message: format!("impact_factor must be >= 0, got {value}"),
                        });
                    }
                    Some(value)
                }
            };
            let entry = self
                .journals
                .entry(id.to_owned())
                .or_insert_with(|| JournalRef::from_id(id));
            if !name.is_empty() {
                entry.name = name.to_owned();
            }
            entry.impact_factor = impact_factor;
        }
        Ok(())
    }

    /// Serialize the edge list in the canonical sorted order. Re-parsing the
    /// output yields an identical corpus.
    pub fn write_citations<W: Write>(&self, mut writer: W) -> Result<()> {
        writeln!(writer, "citing,cited,count")?;
        let mut csv_writer = csv::WriterBuilder::new()
            .has_headers(false)
            .from_writer(&mut writer);
        for ((citing, cited), count) in &self.records {
            csv_writer
                .write_record([citing.as_str(), cited.as_str(), &count.to_string()])
                .map_err(csv_error)?;
        }
        csv_writer.flush()?;
        Ok(())
    }

    /// Serialize the journal metadata table in id order.
    pub fn write_metadata<W: Write>(&self, mut writer: W) -> Result<()> {
        writeln!(writer, "id,name,impact_factor")?;
        let mut csv_writer = csv::WriterBuilder::new()
            .has_headers(false)
            .from_writer(&mut writer);
        for journal in self.journals.values() {
            let impact = journal
                .impact_factor
                .map(|v| v.to_string())
                .unwrap_or_default();
            csv_writer
                .write_record([journal.id.as_str(), journal.name.as_str(), &impact])
                .map_err(csv_error)?;
        }
        csv_writer.flush()?;
        Ok(())
    }

    /// Select the focal journal's citation environment.
    ///
    /// Membership: every journal `m != focal` with `count(focal -> m) >=
    /// min_count` (Import) or `count(m -> focal) >= min_count` (Export).
    /// Ordering: focal first, then descending qualifying count, ties broken
    /// by ascending id.
    pub fn extract_environment(
        &self,
        focal: &str,
        direction: Direction,
        min_count: u64,
    ) -> Result<Environment> {
        if min_count < 1 {
            return Err(Error::InvalidParameter(format!(
                "min_count must be >= 1, got {min_count}"
            )));
        }
        if !self.journals.contains_key(focal) {
            return Err(Error::MissingJournal(focal.to_owned()));
        }

        let mut qualified: Vec<(&str, u64)> = Vec::new();
        for ((citing, cited), count) in &self.records {
            let member = match direction {
                Direction::Import if citing == focal && cited != focal => cited.as_str(),
                Direction::Export if cited == focal && citing != focal => citing.as_str(),
                _ => continue,
            };
            if *count >= min_count {
                qualified.push((member, *count));
            }
        }
        if qualified.is_empty() {
            return Err(Error::DegenerateEnvironment {
                focal: focal.to_owned(),
                min_count,
            });
        }
        qualified.sort_by(|a, b| b.1.cmp(&a.1).then_with(|| a.0.cmp(b.0)));

        let mut members = Vec::with_capacity(qualified.len() + 1);
        members.push(focal.to_owned());
        members.extend(qualified.into_iter().map(|(id, _)| id.to_owned()));

        Ok(Environment {
            focal: focal.to_owned(),
            direction,
            min_count,
            members,
        })
    }
}

/// The focal journal plus its threshold-selected citation partners,
/// in the canonical member order (focal first).
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Environment {
    focal: String,
    direction: Direction,
    min_count: u64,
    members: Vec<String>,
}

impl Environment {
    /// Assemble an environment from an explicit member list. The first member
    /// is the focal journal; duplicates are rejected.
    pub fn from_members(direction: Direction, min_count: u64, members: Vec<String>) -> Result<Self> {
        let focal = members
            .first()
            .cloned()
            .ok_or_else(|| Error::InvalidParameter("environment member list is empty".into()))?;
        let mut seen = std::collections::BTreeSet::new();
        for m in &members {
            if !seen.insert(m.as_str()) {
                return Err(Error::InvalidParameter(format!(
                    "duplicate environment member '{m}'"
                )));
            }
        }
        Ok(Environment {
            focal,
            direction,
            min_count,
            members,
        })
    }

    pub fn focal(&self) -> &str {
        &self.focal
    }

    pub fn direction(&self) -> Direction {
        self.direction
    }

    pub fn min_count(&self) -> u64 {
        self.min_count
    }

    pub fn members(&self) -> &[String] {
        &self.members
    }

    pub fn len(&self) -> usize {
        self.members.len()
    }

    pub fn is_empty(&self) -> bool {
        self.members.is_empty()
    }

    /// Member list as a one-column CSV document, focal first.
    pub fn to_csv_string(&self) -> String {
        let mut out = String::from("id\n");
        for member in &self.members {
            out.push_str(&csv_escape(member));
            out.push('\n');
        }
        out
    }

    /// Parse the one-column member CSV written by [`Environment::to_csv_string`].
    pub fn from_csv<R: Read>(reader: R, direction: Direction, min_count: u64) -> Result<Self> {
        let mut csv_reader = csv::ReaderBuilder::new()
            .has_headers(true)
            .from_reader(reader);
        check_header(&mut csv_reader, &["id"])?;
        let mut members = Vec::new();
        for row in csv_reader.records() {
            let row = row.map_err(csv_error)?;
            let line = row.position().map(|p| p.line()).unwrap_or(0);
            members.push(non_empty(&row[0], line, "id")?.to_owned());
        }
        Environment::from_members(direction, min_count, members)
    }
}

/// Quote a CSV field only when needed.
pub(crate) fn csv_escape(field: &str) -> String {
    if field.contains([',', '"', '\n', '\r']) {
        format!("\"{}\"", field.replace('"', "\"\""))
    } else {
        field.to_owned()
    }
}

pub(crate) fn csv_error(e: csv::Error) -> Error {
    let line = e.position().map(|p| p.line()).unwrap_or(0);
    Error::Parse {
        line,
        message: e.to_string(),
    }
}

pub(crate) fn check_header<R: Read>(
    reader: &mut csv::Reader<R>,
    expected: &[&str],
) -> Result<()> {
    let headers = reader.headers().map_err(csv_error)?;
    let found: Vec<&str> = headers.iter().map(str::trim).collect();
    if found != expected {
        return Err(Error::Parse {
            line: 1,
            message: format!(
                "expected header '{}', found '{}'",
                expected.join(","),
                found.join(",")
            ),
        });
    }
    Ok(())
}

pub(crate) fn non_empty<'a>(raw: &'a str, line: u64, field: &str) -> Result<&'a str> {
    let trimmed = raw.trim();
    if trimmed.is_empty() {
        return Err(Error::Parse {
            line,
            message: format!("{field} id must not be empty"),
        });
    }
    Ok(trimmed)
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn corpus_from(rows: &str) -> CitationCorpus {
        let text = format!("citing,cited,count\n{rows}");
        CitationCorpus::parse_citations(text.as_bytes(), "test").unwrap()
    }

    #[test]
    fn header_only_input_is_empty_corpus() {
        let corpus = CitationCorpus::parse_citations("citing,cited,count\n".as_bytes(), "t").unwrap();
        assert_eq!(corpus.record_count(), 0);
        assert_eq!(corpus.journal_count(), 0);
    }

    #[test]
    fn missing_trailing_newline_is_accepted() {
        let corpus = CitationCorpus::parse_citations("citing,cited,count\nA,B,3".as_bytes(), "t").unwrap();
        assert_eq!(corpus.count("A", "B"), 3);
    }

    #[test]
    fn single_row_registers_both_journals() {
        let corpus = corpus_from("A,B,3\n");
        assert_eq!(corpus.count("A", "B"), 3);
        assert_eq!(corpus.journal_count(), 2);
        assert!(corpus.journal("A").is_some());
        assert!(corpus.journal("B").is_some());
    }

    #[test]
    fn duplicate_pair_errors_with_line_number() {
        let err = CitationCorpus::parse_citations("citing,cited,count\nA,B,2\nA,B,5\n".as_bytes(), "t")
            .unwrap_err();
        match err {
            Error::DuplicateRecord { line, citing, cited } => {
                assert_eq!(line, 3);
                assert_eq!(citing, "A");
                assert_eq!(cited, "B");
            }
            other => panic!("expected DuplicateRecord, got {other:?}"),
        }
    }

    #[test]
    fn malformed_rows_error_with_line_number() {
        for (rows, expect_line) in [
            ("A,B\n", 2),
            ("A,B,x\n", 2),
            ("A,B,0\n", 2),
            ("A,B,3\nC,D,-1\n", 3),
            (",B,3\n", 2),
        ] {
            let text = format!("citing,cited,count\n{rows}");
            let err = CitationCorpus::parse_citations(text.as_bytes(), "t").unwrap_err();
            match err {
                Error::Parse { line, .. } => assert_eq!(line, expect_line, "rows: {rows:?}"),
                other => panic!("expected Parse error for {rows:?}, got {other:?}"),
            }
        }
    }

    #[test]
    fn wrong_header_is_rejected() {
        let err = CitationCorpus::parse_citations("from,to,n\nA,B,3\n".as_bytes(), "t").unwrap_err();
        assert!(matches!(err, Error::Parse { line: 1, .. }));
    }

    #[test]
    fn self_citation_is_permitted() {
        let corpus = corpus_from("A,A,4\n");
        assert_eq!(corpus.count("A", "A"), 4);
        assert_eq!(corpus.journal_count(), 1);
    }

    #[test]
    fn metadata_merges_names_and_impact_factors() {
        let mut corpus = corpus_from("A,B,3\n");
        corpus
            .merge_metadata("id,name,impact_factor\nA,Alpha Journal,2.5\nB,Beta Journal,\n".as_bytes())
            .unwrap();
        assert_eq!(corpus.journal("A").unwrap().name, "Alpha Journal");
        assert_eq!(corpus.journal("A").unwrap().impact_factor, Some(2.5));
        assert_eq!(corpus.journal("B").unwrap().impact_factor, None);
    }

    #[test]
    fn metadata_rejects_negative_impact_factor() {
        let mut corpus = corpus_from("A,B,3\n");
        let err = corpus
            .merge_metadata("id,name,impact_factor\nA,Alpha,-1\n".as_bytes())
            .unwrap_err();
        assert!(matches!(err, Error::Parse { line: 2, .. }));
    }

    #[test]
    fn metadata_registers_unseen_journals() {
        let mut corpus = corpus_from("A,B,3\n");
        corpus
            .merge_metadata("id,name,impact_factor\nC,Gamma,1.0\n".as_bytes())
            .unwrap();
        assert_eq!(corpus.journal_count(), 3);
    }

    #[test]
    fn import_environment_thresholds_and_orders_members() {
        let corpus = corpus_from("F,A,3\nF,B,1\nF,C,2\n");
        let env = corpus
            .extract_environment("F", Direction::Import, 2)
            .unwrap();
        assert_eq!(env.members(), ["F", "A", "C"]);
    }

    #[test]
    fn export_environment_orders_by_incoming_count() {
        let corpus = corpus_from("F,A,3\nF,B,1\nF,C,2\nA,F,2\nB,F,7\n");
        let env = corpus
            .extract_environment("F", Direction::Export, 2)
            .unwrap();
        assert_eq!(env.members(), ["F", "B", "A"]);
    }

    #[test]
    fn min_count_one_admits_single_citations() {
        let corpus = corpus_from("F,A,3\nF,B,1\nF,C,2\n");
        let env = corpus
            .extract_environment("F", Direction::Import, 1)
            .unwrap();
        assert_eq!(env.members(), ["F", "A", "C", "B"]);
    }

    #[test]
    fn count_ties_break_by_id() {
        let corpus = corpus_from("F,B,2\nF,A,2\nF,C,5\n");
        let env = corpus
            .extract_environment("F", Direction::Import, 2)
            .unwrap();
        assert_eq!(env.members(), ["F", "C", "A", "B"]);
    }

    #[test]
    fn unknown_focal_errors() {
        let corpus = corpus_from("A,B,3\n");
        let err = corpus
            .extract_environment("Z", Direction::Import, 2)
            .unwrap_err();
        assert!(matches!(err, Error::MissingJournal(id) if id == "Z"));
    }

    #[test]
    fn empty_environment_errors() {
        let corpus = corpus_from("F,A,1\nB,F,1\n");
        let err = corpus
            .extract_environment("F", Direction::Import, 2)
            .unwrap_err();
        assert!(matches!(err, Error::DegenerateEnvironment { .. }));
    }

    #[test]
    fn focal_self_citation_never_qualifies_as_member() {
        let corpus = corpus_from("F,F,9\nF,A,2\n");
        let env = corpus
            .extract_environment("F", Direction::Import, 2)
            .unwrap();
        assert_eq!(env.members(), ["F", "A"]);
    }

    #[test]
    fn symmetric_corpus_gives_identical_environments() {
        let corpus = corpus_from("F,A,3\nA,F,3\nF,B,2\nB,F,2\n");
        let import = corpus
            .extract_environment("F", Direction::Import, 2)
            .unwrap();
        let export = corpus
            .extract_environment("F", Direction::Export, 2)
            .unwrap();
        assert_eq!(import.members(), export.members());
    }

    #[test]
    fn metadata_csv_round_trips() {
        let mut corpus = corpus_from("A,B,3\nB,C,2\n");
        corpus
            .merge_metadata(
                "id,name,impact_factor\nA,\"Alpha, Applied\",2.5\nB,Beta Journal,\nC,Gamma,0.9\n"
                    .as_bytes(),
            )
            .unwrap();
        let mut buffer = Vec::new();
        corpus.write_metadata(&mut buffer).unwrap();
        let mut reparsed = corpus_from("A,B,3\nB,C,2\n");
        reparsed.merge_metadata(buffer.as_slice()).unwrap();
        assert_eq!(reparsed, corpus);
        assert_eq!(reparsed.journal("A").unwrap().name, "Alpha, Applied");
    }

    #[test]
    fn ids_with_commas_survive_csv_round_trips() {
        let mut corpus = CitationCorpus::new("t");
        corpus.insert_record("weird,id", "o\"ther", 3).unwrap();
        corpus.insert_record("weird,id", "plain", 2).unwrap();
        let mut buffer = Vec::new();
        corpus.write_citations(&mut buffer).unwrap();
        let reparsed = CitationCorpus::parse_citations(buffer.as_slice(), "t").unwrap();
        assert_eq!(reparsed, corpus);

        let env = corpus
            .extract_environment("weird,id", Direction::Import, 2)
            .unwrap();
        let parsed =
            Environment::from_csv(env.to_csv_string().as_bytes(), Direction::Import, 2).unwrap();
        assert_eq!(parsed, env);
    }

    #[test]
    fn environment_csv_round_trips() {
        let corpus = corpus_from("F,A,3\nF,C,2\n");
        let env = corpus
            .extract_environment("F", Direction::Import, 2)
            .unwrap();
        let text = env.to_csv_string();
        let parsed = Environment::from_csv(text.as_bytes(), Direction::Import, 2).unwrap();
        assert_eq!(parsed, env);
    }

    proptest! {
        #[test]
        fn raising_min_count_never_adds_members(
            edges in proptest::collection::btree_map(
                ("[a-e]", "[a-e]"),
                1u64..20,
                1..20,
            ),
            min_count in 1u64..5,
        ) {
            let mut corpus = CitationCorpus::new("prop");
            corpus.register("f");
            for ((citing, cited), count) in &edges {
                let _ = corpus.insert_record(citing, cited, *count);
                let _ = corpus.insert_record("f", citing, *count);
            }
            let lower = corpus.extract_environment("f", Direction::Import, min_count);
            let higher = corpus.extract_environment("f", Direction::Import, min_count + 1);
            if let Ok(higher) = higher {
                let lower = lower.expect("lower threshold must also succeed");
                for m in higher.members() {
                    prop_assert!(lower.members().contains(m));
                }
                prop_assert!(higher.len() <= lower.len());
            }
        }

        #[test]
        fn corpus_csv_round_trips(
            edges in proptest::collection::btree_map(
                ("[a-e]", "[a-e]"),
                1u64..1000,
                0..30,
            ),
        ) {
            let mut corpus = CitationCorpus::new("prop");
            for ((citing, cited), count) in &edges {
                corpus.insert_record(citing, cited, *count).unwrap();
            }
            let mut buffer = Vec::new();
            corpus.write_citations(&mut buffer).unwrap();
            let reparsed = CitationCorpus::parse_citations(buffer.as_slice(), "prop").unwrap();
            prop_assert_eq!(reparsed, corpus);
        }
    }
}
