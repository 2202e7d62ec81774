//! Square asymmetric citation matrices over an environment.

use std::io::Read;

use serde::{Deserialize, Serialize};

use crate::corpus::{csv_error, csv_escape, CitationCorpus, Environment};
use crate::error::{Error, Result};

/// Which reading of the matrix a journal's profile vector uses.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum ProfileOrientation {
    /// Row i: the citations journal i gives.
    #[serde(rename = "row")]
    RowProfiles,
    /// Column j: the citations journal j receives.
    #[serde(rename = "column")]
    ColumnProfiles,
}

impl ProfileOrientation {
    pub fn as_str(self) -> &'static str {
        match self {
            ProfileOrientation::RowProfiles => "row",
            ProfileOrientation::ColumnProfiles => "column",
        }
    }
}

impl std::fmt::Display for ProfileOrientation {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(self.as_str())
    }
}

/// Square matrix of citation counts; `cell(i, j)` is citations from
/// `journals[i]` to `journals[j]`. Journal order matches the generating
/// environment (or the post-drop order).
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct CitationMatrix {
    journals: Vec<String>,
    cells: Vec<u64>,
}

impl CitationMatrix {
    pub fn from_cells(journals: Vec<String>, cells: Vec<u64>) -> Result<Self> {
        if cells.len() != journals.len() * journals.len() {
            return Err(Error::InvalidParameter(format!(
                "cell count {} does not match {} journals",
                cells.len(),
                journals.len()
            )));
        }
        Ok(CitationMatrix { journals, cells })
    }

    pub fn size(&self) -> usize {
        self.journals.len()
    }

    pub fn journals(&self) -> &[String] {
        &self.journals
    }

    pub fn index_of(&self, id: &str) -> Option<usize> {
        self.journals.iter().position(|j| j == id)
    }

    pub fn cell(&self, row: usize, col: usize) -> u64 {
        self.cells[row * self.journals.len() + col]
    }

    pub fn total(&self) -> u64 {
        self.cells.iter().sum()
    }

    pub fn transposed(&self) -> CitationMatrix {
        let n = self.size();
        let mut cells = vec![0u64; n * n];
        for i in 0..n {
            for j in 0..n {
                cells[j * n + i] = self.cell(i, j);
            }
        }
        CitationMatrix {
            journals: self.journals.clone(),
            cells,
        }
    }

    /// Copy with all diagonal (self-citation) cells set to zero.
    pub fn with_zero_diagonal(&self) -> CitationMatrix {
        let n = self.size();
        let mut cells = self.cells.clone();
        for i in 0..n {
            cells[i * n + i] = 0;
        }
        CitationMatrix {
            journals: self.journals.clone(),
            cells,
        }
    }

    /// Profile vectors under `orientation`, one per journal, as floats.
    pub fn profiles(&self, orientation: ProfileOrientation) -> Vec<Vec<f64>> {
        let n = self.size();
        (0..n)
            .map(|a| {
                (0..n)
                    .map(|i| match orientation {
                        ProfileOrientation::RowProfiles => self.cell(a, i) as f64,
                        ProfileOrientation::ColumnProfiles => self.cell(i, a) as f64,
                    })
                    .collect()
            })
            .collect()
    }

    /// CSV rendering: header `id,<j1>,...`, one row per journal.
    pub fn to_csv_string(&self) -> String {
        let mut out = String::from("id");
        for j in &self.journals {
            out.push(',');
            out.push_str(&csv_escape(j));
        }
        out.push('\n');
        for (i, j) in self.journals.iter().enumerate() {
            out.push_str(&csv_escape(j));
            for col in 0..self.size() {
                out.push(',');
                out.push_str(&self.cell(i, col).to_string());
            }
            out.push('\n');
        }
        out
    }

    /// Parse the CSV layout written by [`CitationMatrix::to_csv_string`].
    pub fn from_csv<R: Read>(reader: R) -> Result<Self> {
        let (journals, cells) = parse_square_csv(reader, |raw, line| {
            raw.trim().parse::<u64>().map_err(|_| Error::Parse {
                line,
                message: format!("cell '{raw}' is not a nonnegative integer"),
            })
        })?;
        Ok(CitationMatrix { journals, cells })
    }
}

/// Build the citation matrix over the environment members, in member order.
/// Absent pairs become 0; the diagonal holds self-citations.
pub fn build_matrix(corpus: &CitationCorpus, env: &Environment) -> Result<CitationMatrix> {
    for member in env.members() {
        if corpus.journal(member).is_none() {
            return Err(Error::MissingJournal(member.clone()));
        }
    }
    let members = env.members();
    let n = members.len();
    let mut cells = vec![0u64; n * n];
    for (i, citing) in members.iter().enumerate() {
        for (j, cited) in members.iter().enumerate() {
            cells[i * n + j] = corpus.count(citing, cited);
        }
    }
    Ok(CitationMatrix {
        journals: members.to_vec(),
        cells,
    })
}

/// Remove every non-focal journal whose profile under `orientation`, with the
/// focal journal's contribution zeroed, is all-zero. Removal is iterated to a
/// fixed point so the operation is idempotent: dropping a journal can zero
/// another journal's remaining profile.
pub fn drop_isolates(
    matrix: &CitationMatrix,
    orientation: ProfileOrientation,
    focal: &str,
) -> Result<CitationMatrix> {
    let focal_idx = matrix
        .index_of(focal)
        .ok_or_else(|| Error::MissingJournal(focal.to_owned()))?;
    let n = matrix.size();
    let mut alive = vec![true; n];

    loop {
        let mut dropped_any = false;
        for j in 0..n {
            if !alive[j] || j == focal_idx {
                continue;
            }
            let has_signal = (0..n).any(|i| {
                if !alive[i] || i == focal_idx {
                    return false;
                }
                match orientation {
                    ProfileOrientation::ColumnProfiles => matrix.cell(i, j) > 0,
                    ProfileOrientation::RowProfiles => matrix.cell(j, i) > 0,
                }
            });
            if !has_signal {
                alive[j] = false;
                dropped_any = true;
            }
        }
        if !dropped_any {
            break;
        }
    }

    let survivors: Vec<usize> = (0..n).filter(|&i| alive[i]).collect();
    if survivors.len() < 3 {
        return Err(Error::DegenerateMatrix {
            remaining: survivors.len(),
        });
    }
    if survivors.len() == n {
        return Ok(matrix.clone());
    }

    let m = survivors.len();
    let mut cells = vec![0u64; m * m];
    for (new_i, &old_i) in survivors.iter().enumerate() {
        for (new_j, &old_j) in survivors.iter().enumerate() {
            cells[new_i * m + new_j] = matrix.cell(old_i, old_j);
        }
    }
    let journals = survivors
        .iter()
        .map(|&i| matrix.journals[i].clone())
        .collect();
    Ok(CitationMatrix { journals, cells })
}

/// Shared CSV parser for the square id-bordered layouts (counts and cosines).
pub(crate) fn parse_square_csv<R: Read, T, F>(reader: R, parse_cell: F) -> Result<(Vec<String>, Vec<T>)>
where
    F: Fn(&str, u64) -> Result<T>,
{
    let mut csv_reader = csv::ReaderBuilder::new()
        .has_headers(true)
        .flexible(false)
        .from_reader(reader);
    let headers = csv_reader.headers().map_err(csv_error)?.clone();
    if headers.len() < 2 || headers.get(0).map(str::trim) != Some("id") {
        return Err(Error::Parse {
            line: 1,
            message: "expected header 'id,<journal ids...>'".to_owned(),
        });
    }
    let journals: Vec<String> = headers.iter().skip(1).map(|s| s.trim().to_owned()).collect();
    let mut seen = std::collections::BTreeSet::new();
    for journal in &journals {
        if !seen.insert(journal.as_str()) {
            return Err(Error::Parse {
                line: 1,
                message: format!("duplicate journal id '{journal}' in header"),
            });
        }
    }
    let n = journals.len();

    let mut cells = Vec::with_capacity(n * n);
    let mut row_index = 0usize;
    let mut record = csv::StringRecord::new();
    loop {
        match csv_reader.read_record(&mut record) {
            Ok(false) => break,
            Ok(true) => {}
            Err(e) => return Err(csv_error(e)),
        }
        let line = record.position().map(|p| p.line()).unwrap_or(0);
        if row_index >= n {
            return Err(Error::Parse {
                line,
                message: format!("expected {n} rows, found more"),
            });
        }
        if record[0].trim() != journals[row_index] {
            return Err(Error::Parse {
                line,
                message: format!(
                    "row id '{}' does not match header order (expected '{}')",
                    &record[0], journals[row_index]
                ),
            });
        }
        for value in record.iter().skip(1) {
            cells.push(parse_cell(value, line)?);
        }
        row_index += 1;
    }
    if row_index != n {
        return Err(Error::Parse {
            line: 0,
            message: format!("expected {n} rows, found {row_index}"),
        });
    }
    Ok((journals, cells))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::corpus::Direction;
    use proptest::prelude::*;

    fn corpus_from(rows: &str) -> CitationCorpus {
        let text = format!("citing,cited,count\n{rows}");
        CitationCorpus::parse_citations(text.as_bytes(), "test").unwrap()
    }

    fn env(members: &[&str]) -> Environment {
        Environment::from_members(
            Direction::Import,
            2,
            members.iter().map(|s| s.to_string()).collect(),
        )
        .unwrap()
    }

    #[test]
    fn transcribes_counts_in_member_order() {
        let corpus = corpus_from("F,A,3\n");
        let matrix = build_matrix(&corpus, &env(&["F", "A"])).unwrap();
        assert_eq!(matrix.cell(0, 0), 0);
        assert_eq!(matrix.cell(0, 1), 3);
        assert_eq!(matrix.cell(1, 0), 0);
        assert_eq!(matrix.cell(1, 1), 0);
    }

    #[test]
    fn diagonal_holds_self_citations() {
        let corpus = corpus_from("F,A,3\nA,F,2\nA,A,4\n");
        let matrix = build_matrix(&corpus, &env(&["F", "A"])).unwrap();
        assert_eq!(matrix.cell(0, 1), 3);
        assert_eq!(matrix.cell(1, 0), 2);
        assert_eq!(matrix.cell(1, 1), 4);
    }

    #[test]
    fn absent_pairs_are_zero() {
        let corpus = corpus_from("X,Y,9\n");
        let mut corpus = corpus;
        corpus.insert_record("F", "A", 2).unwrap();
        corpus.insert_record("F", "B", 2).unwrap();
        let matrix = build_matrix(&corpus, &env(&["F", "A", "B"])).unwrap();
        assert_eq!(matrix.cell(1, 2), 0);
        assert_eq!(matrix.cell(2, 1), 0);
    }

    #[test]
    fn unregistered_member_errors() {
        let corpus = corpus_from("F,A,3\n");
        let err = build_matrix(&corpus, &env(&["F", "A", "Z"])).unwrap_err();
        assert!(matches!(err, Error::MissingJournal(id) if id == "Z"));
    }

    #[test]
    fn zero_diagonal_clears_self_citations_only() {
        let corpus = corpus_from("F,A,3\nA,A,4\n");
        let matrix = build_matrix(&corpus, &env(&["F", "A"])).unwrap();
        let zeroed = matrix.with_zero_diagonal();
        assert_eq!(zeroed.cell(1, 1), 0);
        assert_eq!(zeroed.cell(0, 1), 3);
    }

    #[test]
    fn drops_journal_cited_only_by_focal() {
        let corpus = corpus_from("F,A,3\nF,B,2\nF,C,2\nA,B,1\nB,A,2\n");
        let matrix = build_matrix(&corpus, &env(&["F", "A", "B", "C"])).unwrap();
        let dropped = drop_isolates(&matrix, ProfileOrientation::ColumnProfiles, "F").unwrap();
        assert_eq!(dropped.journals(), ["F", "A", "B"]);
        assert_eq!(dropped.cell(1, 2), 1);
    }

    #[test]
    fn no_zero_profiles_is_a_no_op() {
        let corpus = corpus_from("F,A,3\nA,B,2\nB,A,2\nC,B,1\nA,C,1\nF,B,2\nF,C,2\n");
        let matrix = build_matrix(&corpus, &env(&["F", "A", "B", "C"])).unwrap();
        let dropped = drop_isolates(&matrix, ProfileOrientation::ColumnProfiles, "F").unwrap();
        assert_eq!(dropped, matrix);
    }

    #[test]
    fn cascading_drops_reach_a_fixed_point() {
        // C is cited only by B; B is cited only by F. Dropping B must also drop C.
        let corpus = corpus_from("F,A,3\nF,B,2\nF,C,2\nF,D,2\nB,C,5\nA,D,1\nD,A,1\n");
        let matrix = build_matrix(&corpus, &env(&["F", "A", "B", "C", "D"])).unwrap();
        let dropped = drop_isolates(&matrix, ProfileOrientation::ColumnProfiles, "F").unwrap();
        assert_eq!(dropped.journals(), ["F", "A", "D"]);
        let again = drop_isolates(&dropped, ProfileOrientation::ColumnProfiles, "F").unwrap();
        assert_eq!(again, dropped);
    }

    #[test]
    fn row_orientation_drops_journals_citing_nobody_else() {
        // B cites only the focal; under row profiles it is an isolate.
        let corpus = corpus_from("A,F,2\nB,F,2\nC,F,2\nA,C,1\nC,A,2\n");
        let matrix = build_matrix(&corpus, &env(&["F", "A", "B", "C"])).unwrap();
        let dropped = drop_isolates(&matrix, ProfileOrientation::RowProfiles, "F").unwrap();
        assert_eq!(dropped.journals(), ["F", "A", "C"]);
    }

    #[test]
    fn dropping_below_three_journals_errors() {
        let corpus = corpus_from("F,A,3\nF,B,2\n");
        let matrix = build_matrix(&corpus, &env(&["F", "A", "B"])).unwrap();
        let err = drop_isolates(&matrix, ProfileOrientation::ColumnProfiles, "F").unwrap_err();
        assert!(matches!(err, Error::DegenerateMatrix { remaining: 1 }));
    }

    #[test]
    fn self_citation_alone_keeps_a_journal() {
        // B receives citations only from F and itself; spec formalizes the rule
        // as zeroing the focal contribution only, so the diagonal keeps B alive.
        let corpus = corpus_from("F,A,3\nF,B,2\nB,B,4\nA,F,1\nF,C,2\nC,A,1\nA,C,1\n");
        let matrix = build_matrix(&corpus, &env(&["F", "A", "B", "C"])).unwrap();
        let dropped = drop_isolates(&matrix, ProfileOrientation::ColumnProfiles, "F").unwrap();
        assert!(dropped.journals().contains(&"B".to_owned()));
    }

    #[test]
    fn duplicate_header_ids_are_rejected() {
        let err = CitationMatrix::from_csv("id,A,A\nA,0,1\nA,1,0\n".as_bytes()).unwrap_err();
        assert!(matches!(err, Error::Parse { line: 1, .. }));
    }

    #[test]
    fn matrix_csv_round_trips() {
        let corpus = corpus_from("F,A,3\nA,F,2\nA,A,4\n");
        let matrix = build_matrix(&corpus, &env(&["F", "A"])).unwrap();
        let text = matrix.to_csv_string();
        let parsed = CitationMatrix::from_csv(text.as_bytes()).unwrap();
        assert_eq!(parsed, matrix);
    }

    proptest! {
        #[test]
        fn cell_sum_matches_corpus_counts_over_member_pairs(
            edges in proptest::collection::btree_map(
                ("[a-d]", "[a-d]"),
                1u64..50,
                0..16,
            ),
        ) {
            let mut corpus = CitationCorpus::new("prop");
            corpus.register("f");
            for ((citing, cited), count) in &edges {
                corpus.insert_record(citing, cited, *count).unwrap();
            }
            let mut members: Vec<String> = vec!["f".to_owned()];
            members.extend(corpus.journals().map(|j| j.id.clone()).filter(|id| id != "f"));
            let env = Environment::from_members(Direction::Import, 1, members.clone()).unwrap();
            let matrix = build_matrix(&corpus, &env).unwrap();

            let expected: u64 = corpus
                .records()
                .filter(|r| members.contains(&r.citing) && members.contains(&r.cited))
                .map(|r| r.count)
                .sum();
            prop_assert_eq!(matrix.total(), expected);
        }

        #[test]
        fn row_profiles_equal_column_profiles_of_transpose(
            cells in proptest::collection::vec(0u64..10, 16),
        ) {
            let journals: Vec<String> = (0..4).map(|i| format!("j{i}")).collect();
            let matrix = CitationMatrix::from_cells(journals, cells).unwrap();
            let rows = matrix.profiles(ProfileOrientation::RowProfiles);
            let cols_of_t = matrix.transposed().profiles(ProfileOrientation::ColumnProfiles);
            prop_assert_eq!(rows, cols_of_t);
        }
    }
}
