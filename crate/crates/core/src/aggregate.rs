//! Macro-journal aggregation: cumulative citation counts between the focal
//! journal and each factor-defined category.

use std::collections::BTreeMap;
use std::io::Read;

use serde::Serialize;

use crate::corpus::{csv_error, csv_escape, Direction};
use crate::error::{Error, Result};
use crate::factors::FactorAssignment;
use crate::matrix::CitationMatrix;

/// One factor category with its members and cumulative citation count.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct FactorFlow {
    pub factor: usize,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub label: Option<String>,
    pub members: Vec<String>,
    pub citations: u64,
}

/// Citation flow between the focal journal and every factor category.
/// The focal journal belongs to no category; its self-citations are never
/// counted.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct MacroAggregate {
    pub direction: Direction,
    pub focal: String,
    pub corpus_label: String,
    pub entries: Vec<FactorFlow>,
}

impl MacroAggregate {
    pub fn total(&self) -> u64 {
        self.entries.iter().map(|e| e.citations).sum()
    }

    /// CSV rendering: `direction,factor,label,members,citations`.
    pub fn to_csv_string(&self) -> String {
        let mut out = String::from("direction,factor,label,members,citations\n");
        for e in &self.entries {
            out.push_str(&format!(
                "{},{},{},{},{}\n",
                self.direction,
                e.factor,
                csv_escape(e.label.as_deref().unwrap_or("")),
                e.members.len(),
                e.citations
            ));
        }
        out
    }
}

/// Sum the focal journal's citation flow into (Import) or out of (Export)
/// each factor category. Every non-focal matrix journal must be assigned.
pub fn macro_aggregate(
    matrix: &CitationMatrix,
    assignment: &FactorAssignment,
    focal: &str,
    direction: Direction,
    labels: &BTreeMap<usize, String>,
    corpus_label: &str,
) -> Result<MacroAggregate> {
    let focal_idx = matrix
        .index_of(focal)
        .ok_or_else(|| Error::MissingJournal(focal.to_owned()))?;

    let k = assignment.factor_count();
    let mut members: Vec<Vec<String>> = vec![Vec::new(); k + 1];
    let mut citations = vec![0u64; k + 1];
    for (j, journal) in matrix.journals().iter().enumerate() {
        if j == focal_idx {
            continue;
        }
        let (factor, _) = assignment
            .get(journal)
            .ok_or_else(|| Error::IncompleteAssignment(journal.clone()))?;
        // Factor 0 is the reserved "unclassified" partition; only the focal
        // journal may carry it, and the focal is excluded above.
        if factor == 0 {
            return Err(Error::IncompleteAssignment(journal.clone()));
        }
        if factor > k {
            return Err(Error::InvalidParameter(format!(
                "journal '{journal}' is assigned factor {factor}, but the assignment has {k} factors"
            )));
        }
        members[factor].push(journal.clone());
        citations[factor] += match direction {
            Direction::Import => matrix.cell(focal_idx, j),
            Direction::Export => matrix.cell(j, focal_idx),
        };
    }

    let entries = (1..=k)
        .map(|factor| FactorFlow {
            factor,
            label: labels.get(&factor).cloned(),
            members: std::mem::take(&mut members[factor]),
            citations: citations[factor],
        })
        .collect();
    Ok(MacroAggregate {
        direction,
        focal: focal.to_owned(),
        corpus_label: corpus_label.to_owned(),
        entries,
    })
}

/// Parse the CSV written by [`MacroAggregate::to_csv_string`] back into
/// (factor, citations) pairs, used by tests and downstream tooling.
pub fn read_aggregate_csv<R: Read>(reader: R) -> Result<Vec<(usize, u64)>> {
    let mut csv_reader = csv::ReaderBuilder::new()
        .has_headers(true)
        .from_reader(reader);
    crate::corpus::check_header(
        &mut csv_reader,
        &["direction", "factor", "label", "members", "citations"],
    )?;
    let mut rows = Vec::new();
    for row in csv_reader.records() {
        let row = row.map_err(csv_error)?;
        let line = row.position().map(|p| p.line()).unwrap_or(0);
        let factor: usize = row[1].trim().parse().map_err(|_| Error::Parse {
            line,
            message: format!("factor '{}' is not an integer", &row[1]),
        })?;
        let citations: u64 = row[4].trim().parse().map_err(|_| Error::Parse {
            line,
            message: format!("citations '{}' is not an integer", &row[4]),
        })?;
        rows.push((factor, citations));
    }
    Ok(rows)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::corpus::{CitationCorpus, Environment};
    use crate::matrix::build_matrix;

    fn fixture() -> (CitationMatrix, FactorAssignment) {
        let text = "citing,cited,count\nF,A,3\nF,B,2\nF,C,5\nA,F,1\nC,F,4\n";
        let corpus = CitationCorpus::parse_citations(text.as_bytes(), "t").unwrap();
        let env = Environment::from_members(
            Direction::Import,
            1,
            vec!["F".into(), "A".into(), "B".into(), "C".into()],
        )
        .unwrap();
        let matrix = build_matrix(&corpus, &env).unwrap();
        let mut map = BTreeMap::new();
        map.insert("F".to_owned(), (1, 0.9));
        map.insert("A".to_owned(), (1, 0.8));
        map.insert("B".to_owned(), (1, 0.7));
        map.insert("C".to_owned(), (2, 0.6));
        (matrix, FactorAssignment::from_map(map, 2))
    }

    #[test]
    fn import_sums_focal_row_by_factor() {
        let (matrix, assignment) = fixture();
        let agg = macro_aggregate(
            &matrix,
            &assignment,
            "F",
            Direction::Import,
            &BTreeMap::new(),
            "t",
        )
        .unwrap();
        assert_eq!(agg.entries[0].citations, 5); // A + B
        assert_eq!(agg.entries[1].citations, 5); // C
        assert_eq!(agg.entries[0].members, vec!["A", "B"]);
        assert_eq!(agg.entries[1].members, vec!["C"]);
    }

    #[test]
    fn export_sums_focal_column_by_factor() {
        let (matrix, assignment) = fixture();
        let agg = macro_aggregate(
            &matrix,
            &assignment,
            "F",
            Direction::Export,
            &BTreeMap::new(),
            "t",
        )
        .unwrap();
        assert_eq!(agg.entries[0].citations, 1);
        assert_eq!(agg.entries[1].citations, 4);
    }

    #[test]
    fn factor_without_flow_counts_zero() {
        let (matrix, mut_assignment) = fixture();
        // Reassign C to factor 1; factor 2 keeps no members and no flow.
        let mut map = BTreeMap::new();
        for (id, &(f, l)) in mut_assignment.iter() {
            map.insert(id.clone(), if id == "C" { (1, l) } else { (f, l) });
        }
        let assignment = FactorAssignment::from_map(map, 2);
        let agg = macro_aggregate(
            &matrix,
            &assignment,
            "F",
            Direction::Import,
            &BTreeMap::new(),
            "t",
        )
        .unwrap();
        assert_eq!(agg.entries[1].citations, 0);
        assert!(agg.entries[1].members.is_empty());
    }

    #[test]
    fn reserved_factor_zero_on_a_non_focal_journal_errors() {
        let (matrix, assignment) = fixture();
        let mut map = BTreeMap::new();
        for (id, &(f, l)) in assignment.iter() {
            map.insert(id.clone(), if id == "B" { (0, l) } else { (f, l) });
        }
        let err = macro_aggregate(
            &matrix,
            &FactorAssignment::from_map(map, 2),
            "F",
            Direction::Import,
            &BTreeMap::new(),
            "t",
        )
        .unwrap_err();
        assert!(matches!(err, Error::IncompleteAssignment(id) if id == "B"));
    }

    #[test]
    fn missing_journal_in_assignment_errors() {
        let (matrix, _) = fixture();
        let mut map = BTreeMap::new();
        map.insert("A".to_owned(), (1, 0.8));
        let assignment = FactorAssignment::from_map(map, 2);
        let err = macro_aggregate(
            &matrix,
            &assignment,
            "F",
            Direction::Import,
            &BTreeMap::new(),
            "t",
        )
        .unwrap_err();
        assert!(matches!(err, Error::IncompleteAssignment(id) if id == "B"));
    }

    #[test]
    fn conservation_totals_match_focal_flows() {
        let (matrix, assignment) = fixture();
        for direction in [Direction::Import, Direction::Export] {
            let agg = macro_aggregate(
                &matrix,
                &assignment,
                "F",
                direction,
                &BTreeMap::new(),
                "t",
            )
            .unwrap();
            let focal_idx = matrix.index_of("F").unwrap();
            let expected: u64 = (0..matrix.size())
                .filter(|&j| j != focal_idx)
                .map(|j| match direction {
                    Direction::Import => matrix.cell(focal_idx, j),
                    Direction::Export => matrix.cell(j, focal_idx),
                })
                .sum();
            assert_eq!(agg.total(), expected);
        }
    }

    #[test]
    fn merging_factors_adds_their_counts() {
        let (matrix, assignment) = fixture();
        let split = macro_aggregate(
            &matrix,
            &assignment,
            "F",
            Direction::Import,
            &BTreeMap::new(),
            "t",
        )
        .unwrap();
        let mut merged_map = BTreeMap::new();
        for (id, &(_, l)) in assignment.iter() {
            merged_map.insert(id.clone(), (1, l));
        }
        let merged_assignment = FactorAssignment::from_map(merged_map, 1);
        let merged = macro_aggregate(
            &matrix,
            &merged_assignment,
            "F",
            Direction::Import,
            &BTreeMap::new(),
            "t",
        )
        .unwrap();
        assert_eq!(
            merged.entries[0].citations,
            split.entries[0].citations + split.entries[1].citations
        );
    }

    #[test]
    fn labels_attach_to_entries_without_affecting_counts() {
        let (matrix, assignment) = fixture();
        let mut labels = BTreeMap::new();
        labels.insert(1, "psychology".to_owned());
        let agg = macro_aggregate(
            &matrix,
            &assignment,
            "F",
            Direction::Import,
            &labels,
            "t",
        )
        .unwrap();
        assert_eq!(agg.entries[0].label.as_deref(), Some("psychology"));
        assert_eq!(agg.entries[1].label, None);
        assert_eq!(agg.entries[0].citations, 5);
    }

    #[test]
    fn csv_round_trips_counts() {
        let (matrix, assignment) = fixture();
        let agg = macro_aggregate(
            &matrix,
            &assignment,
            "F",
            Direction::Import,
            &BTreeMap::new(),
            "t",
        )
        .unwrap();
        let rows = read_aggregate_csv(agg.to_csv_string().as_bytes()).unwrap();
        assert_eq!(rows, vec![(1, 5), (2, 5)]);
    }
}
