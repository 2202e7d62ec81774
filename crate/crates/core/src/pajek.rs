//! Pajek `.net` / `.clu` text formats: the export target for network
//! visualization, plus a reader so stage outputs can be piped back in.
//!
//! Network layout: `*Vertices N`, one line `i "label"` per node (1-indexed,
//! insertion order), `*Edges`, one line `i j w` per edge with `i < j` and the
//! weight formatted to 6 significant digits. Partition layout: `*Vertices N`
//! then one class number per line in the same node order.

use std::collections::BTreeMap;
use std::io::{BufRead, BufReader, Read};

use crate::corpus::JournalRef;
use crate::error::{Error, Result};
use crate::factors::FactorAssignment;
use crate::similarity::SimilarityGraph;

/// Format a weight with 6 significant digits, trimmed of trailing zeros.
pub fn format_weight(value: f64) -> String {
    if value == 0.0 {
        return "0".to_owned();
    }
    let magnitude = value.abs().log10().floor() as i32;
    let factor = 10f64.powi(5 - magnitude);
    ((value * factor).round() / factor).to_string()
}

fn render_net(labels: &[String], graph: &SimilarityGraph) -> Result<String> {
    let mut out = format!("*Vertices {}\n", labels.len());
    for (i, label) in labels.iter().enumerate() {
        if label.contains('"') {
            return Err(Error::InvalidParameter(format!(
                "node label {label:?} contains a double quote, which the Pajek format cannot carry"
            )));
        }
        out.push_str(&format!("{} \"{}\"\n", i + 1, label));
    }
    out.push_str("*Edges\n");
    for e in graph.edges() {
        out.push_str(&format!(
            "{} {} {}\n",
            e.a + 1,
            e.b + 1,
            format_weight(e.weight)
        ));
    }
    Ok(out)
}

/// Network file with node ids as labels; the form consumed by the
/// `centrality` stage.
pub fn render_network_ids(graph: &SimilarityGraph) -> Result<String> {
    render_net(graph.nodes(), graph)
}

/// Network and partition files for visualization.
///
/// Labels come from the journal metadata (display name, falling back to the
/// id). When `min_impact_factor` is set, only journals with an impact factor
/// strictly greater than the cutoff keep their label; the rest are emitted
/// with an empty label, mirroring unnumbered low-impact nodes in published
/// maps. The partition lists each node's assigned factor.
pub fn write_pajek(
    graph: &SimilarityGraph,
    assignment: &FactorAssignment,
    journals: &BTreeMap<String, JournalRef>,
    min_impact_factor: Option<f64>,
) -> Result<(String, String)> {
    let labels: Vec<String> = graph
        .nodes()
        .iter()
        .map(|id| {
            let journal = journals.get(id);
            let name = journal.map(|j| j.name.clone()).unwrap_or_else(|| id.clone());
            match min_impact_factor {
                Some(cutoff) => {
                    let impact = journal.and_then(|j| j.impact_factor);
                    if impact.is_some_and(|f| f > cutoff) {
                        name
                    } else {
                        String::new()
                    }
                }
                None => name,
            }
        })
        .collect();
    let net = render_net(&labels, graph)?;

    let mut clu = format!("*Vertices {}\n", graph.node_count());
    for id in graph.nodes() {
        let (factor, _) = assignment
            .get(id)
            .ok_or_else(|| Error::IncompleteAssignment(id.clone()))?;
        clu.push_str(&format!("{factor}\n"));
    }
    Ok((net, clu))
}

/// Parsed network file: node labels in order plus weighted edges (0-based).
#[derive(Debug, Clone, PartialEq)]
pub struct Network {
    pub labels: Vec<String>,
    pub edges: Vec<(usize, usize, f64)>,
}

impl Network {
    /// View the parsed network as a similarity graph. The threshold is not
    /// representable in the format, so the caller supplies it (0.0 when the
    /// graph is only used for topology).
    pub fn into_graph(self, threshold: f64) -> Result<SimilarityGraph> {
        SimilarityGraph::from_parts(self.labels, self.edges, threshold)
    }
}

fn parse_vertex_count(line: &str, line_no: u64) -> Result<usize> {
    let rest = line
        .strip_prefix("*Vertices")
        .or_else(|| line.strip_prefix("*vertices"))
        .ok_or(Error::Parse {
            line: line_no,
            message: format!("expected '*Vertices N', found {line:?}"),
        })?;
    rest.trim().parse().map_err(|_| Error::Parse {
        line: line_no,
        message: format!("invalid vertex count in {line:?}"),
    })
}

/// Parse a `.net` document produced by [`render_network_ids`] or
/// [`write_pajek`].
pub fn read_network<R: Read>(reader: R) -> Result<Network> {
    let mut lines = BufReader::new(reader).lines();
    let mut line_no = 0u64;
    let next_line = |lines: &mut std::io::Lines<BufReader<R>>, line_no: &mut u64| -> Result<Option<String>> {
        *line_no += 1;
        match lines.next() {
            Some(Ok(l)) => Ok(Some(l)),
            Some(Err(e)) => Err(Error::Io(e)),
            None => Ok(None),
        }
    };

    let header = next_line(&mut lines, &mut line_no)?.ok_or(Error::Parse {
        line: 1,
        message: "empty network file".to_owned(),
    })?;
    let n = parse_vertex_count(&header, line_no)?;

    let mut labels = Vec::with_capacity(n);
    for _ in 0..n {
        let line = next_line(&mut lines, &mut line_no)?.ok_or(Error::Parse {
            line: line_no,
            message: "unexpected end of vertex section".to_owned(),
        })?;
        let trimmed = line.trim();
        let (index_part, label_part) = trimmed.split_once(' ').ok_or(Error::Parse {
            line: line_no,
            message: format!("expected 'i \"label\"', found {trimmed:?}"),
        })?;
        let index: usize = index_part.parse().map_err(|_| Error::Parse {
            line: line_no,
            message: format!("invalid vertex index {index_part:?}"),
        })?;
        if index != labels.len() + 1 {
            return Err(Error::Parse {
                line: line_no,
                message: format!("vertex index {index} out of order"),
            });
        }
        let label = label_part.trim();
        if !(label.starts_with('"') && label.ends_with('"') && label.len() >= 2) {
            return Err(Error::Parse {
                line: line_no,
                message: format!("vertex label must be quoted, found {label:?}"),
            });
        }
        labels.push(label[1..label.len() - 1].to_owned());
    }

    let edges_header = next_line(&mut lines, &mut line_no)?.ok_or(Error::Parse {
        line: line_no,
        message: "missing '*Edges' section".to_owned(),
    })?;
    if edges_header.trim() != "*Edges" && edges_header.trim() != "*edges" {
        return Err(Error::Parse {
            line: line_no,
            message: format!("expected '*Edges', found {edges_header:?}"),
        });
    }

    let mut edges = Vec::new();
    while let Some(line) = next_line(&mut lines, &mut line_no)? {
        let trimmed = line.trim();
        if trimmed.is_empty() {
            continue;
        }
        let mut parts = trimmed.split_whitespace();
        let (a, b, w) = match (parts.next(), parts.next(), parts.next(), parts.next()) {
            (Some(a), Some(b), Some(w), None) => (a, b, w),
            _ => {
                return Err(Error::Parse {
                    line: line_no,
                    message: format!("expected 'i j w', found {trimmed:?}"),
                })
            }
        };
        let a: usize = a.parse().map_err(|_| Error::Parse {
            line: line_no,
            message: format!("invalid edge endpoint {a:?}"),
        })?;
        let b: usize = b.parse().map_err(|_| Error::Parse {
            line: line_no,
            message: format!("invalid edge endpoint {b:?}"),
        })?;
        let w: f64 = w.parse().map_err(|_| Error::Parse {
            line: line_no,
            message: format!("invalid edge weight {w:?}"),
        })?;
        if a < 1 || a > n || b < 1 || b > n {
            return Err(Error::Parse {
                line: line_no,
                message: format!("edge endpoint out of range in {trimmed:?}"),
            });
        }
        edges.push((a - 1, b - 1, w));
    }
    Ok(Network { labels, edges })
}

/// Render a partition: one class per node in node order.
pub fn render_partition(classes: &[usize]) -> String {
    let mut out = format!("*Vertices {}\n", classes.len());
    for class in classes {
        out.push_str(&format!("{class}\n"));
    }
    out
}

/// Parse a `.clu` document.
pub fn read_partition<R: Read>(reader: R) -> Result<Vec<usize>> {
    let mut lines = BufReader::new(reader).lines();
    let header = match lines.next() {
        Some(Ok(l)) => l,
        Some(Err(e)) => return Err(Error::Io(e)),
        None => {
            return Err(Error::Parse {
                line: 1,
                message: "empty partition file".to_owned(),
            })
        }
    };
    let n = parse_vertex_count(&header, 1)?;
    let mut classes = Vec::with_capacity(n);
    for (offset, line) in lines.enumerate() {
        let line = line.map_err(Error::Io)?;
        let trimmed = line.trim();
        if trimmed.is_empty() {
            continue;
        }
        let class: usize = trimmed.parse().map_err(|_| Error::Parse {
            line: offset as u64 + 2,
            message: format!("invalid partition class {trimmed:?}"),
        })?;
        classes.push(class);
    }
    if classes.len() != n {
        return Err(Error::Parse {
            line: 0,
            message: format!("expected {n} partition entries, found {}", classes.len()),
        });
    }
    Ok(classes)
}
