//! Betweenness centrality on the thresholded similarity graph.
//!
//! Shortest paths are hop-count based; edge weights play no role in path
//! length. Raw betweenness of v sums, over unordered pairs {s, t} with
//! s != v != t, the fraction of shortest s-t paths passing through v; pairs
//! in different components contribute nothing. Normalization divides by
//! (n-1)(n-2)/2, the number of pairs that could route through a node.
//!
//! Per-source dependency accumulation (Brandes 1977-style) runs one BFS per
//! source. Sources are independent, so the `parallel` feature fans them out
//! on rayon; contributions are collected per source and reduced in source
//! order, which keeps the result bit-identical to the sequential path.

use std::collections::VecDeque;

#[cfg(feature = "parallel")]
use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::similarity::SimilarityGraph;

/// Betweenness of one journal.
#[derive(Debug, Clone, PartialEq, serde::Serialize)]
pub struct CentralityEntry {
    pub id: String,
    pub raw: f64,
    pub normalized: f64,
}

/// Betweenness ranking over the whole graph, sorted by descending normalized
/// value, ties by id.
#[derive(Debug, Clone, PartialEq, serde::Serialize)]
pub struct CentralityReport {
    pub entries: Vec<CentralityEntry>,
    pub graph_size: usize,
    pub component_count: usize,
}

impl CentralityReport {
    pub fn entry(&self, id: &str) -> Option<&CentralityEntry> {
        self.entries.iter().find(|e| e.id == id)
    }

    /// CSV rendering: `id,raw,normalized,percent`; percent is the normalized
    /// value × 100 rounded to one decimal, for display only.
    pub fn to_csv_string(&self) -> String {
        let mut out = String::from("id,raw,normalized,percent\n");
        for e in &self.entries {
            out.push_str(&crate::corpus::csv_escape(&e.id));
            out.push_str(&format!(",{},{},{:.1}\n", e.raw, e.normalized, e.normalized * 100.0));
        }
        out
    }
}

/// Dependency contributions of a single BFS source: delta[v] summed into
/// raw betweenness for every v != source.
fn source_dependencies(adjacency: &[Vec<usize>], source: usize) -> Vec<f64> {
    let n = adjacency.len();
    let mut order = Vec::with_capacity(n);
    let mut predecessors: Vec<Vec<usize>> = vec![Vec::new(); n];
    let mut sigma = vec![0.0f64; n];
    let mut dist = vec![usize::MAX; n];
    sigma[source] = 1.0;
    dist[source] = 0;

    let mut queue = VecDeque::new();
    queue.push_back(source);
    while let Some(v) = queue.pop_front() {
        order.push(v);
        for &w in &adjacency[v] {
            if dist[w] == usize::MAX {
                dist[w] = dist[v] + 1;
                queue.push_back(w);
            }
            if dist[w] == dist[v] + 1 {
                sigma[w] += sigma[v];
                predecessors[w].push(v);
            }
        }
    }

    let mut delta = vec![0.0f64; n];
    for &w in order.iter().rev() {
        for &v in &predecessors[w] {
            delta[v] += (sigma[v] / sigma[w]) * (1.0 + delta[w]);
        }
    }
    delta[source] = 0.0;
    delta
}

fn accumulate(adjacency: &[Vec<usize>], per_source: Vec<Vec<f64>>) -> Vec<f64> {
    let n = adjacency.len();
    let mut raw = vec![0.0f64; n];
    for delta in per_source {
        for (v, d) in delta.into_iter().enumerate() {
            raw[v] += d;
        }
    }
    // Each unordered pair was visited from both endpoints.
    for value in &mut raw {
        *value /= 2.0;
    }
    raw
}

fn raw_betweenness_seq(adjacency: &[Vec<usize>]) -> Vec<f64> {
    let per_source: Vec<Vec<f64>> = (0..adjacency.len())
        .map(|s| source_dependencies(adjacency, s))
        .collect();
    accumulate(adjacency, per_source)
}

#[cfg(feature = "parallel")]
fn raw_betweenness_par(adjacency: &[Vec<usize>]) -> Vec<f64> {
    let per_source: Vec<Vec<f64>> = (0..adjacency.len())
        .into_par_iter()
        .map(|s| source_dependencies(adjacency, s))
        .collect();
    accumulate(adjacency, per_source)
}

fn component_count(adjacency: &[Vec<usize>]) -> usize {
    let n = adjacency.len();
    let mut seen = vec![false; n];
    let mut components = 0;
    for start in 0..n {
        if seen[start] {
            continue;
        }
        components += 1;
        let mut queue = VecDeque::from([start]);
        seen[start] = true;
        while let Some(v) = queue.pop_front() {
            for &w in &adjacency[v] {
                if !seen[w] {
                    seen[w] = true;
                    queue.push_back(w);
                }
            }
        }
    }
    components
}

fn report_from_raw(graph: &SimilarityGraph, raw: Vec<f64>) -> CentralityReport {
    let n = graph.node_count();
    let denom = (n - 1) as f64 * (n - 2) as f64 / 2.0;
    let mut entries: Vec<CentralityEntry> = graph
        .nodes()
        .iter()
        .zip(&raw)
        .map(|(id, &value)| CentralityEntry {
            id: id.clone(),
            raw: value,
            normalized: value / denom,
        })
        .collect();
    entries.sort_by(|a, b| {
        b.normalized
            .total_cmp(&a.normalized)
            .then_with(|| a.id.cmp(&b.id))
    });
    CentralityReport {
        entries,
        graph_size: n,
        component_count: component_count(&graph.adjacency()),
    }
}

fn check_size(graph: &SimilarityGraph) -> Result<()> {
    if graph.node_count() < 3 {
        return Err(Error::DegenerateGraph(graph.node_count()));
    }
    Ok(())
}

/// Normalized betweenness for every node, sequential over sources.
pub fn betweenness_seq(graph: &SimilarityGraph) -> Result<CentralityReport> {
    check_size(graph)?;
    Ok(report_from_raw(graph, raw_betweenness_seq(&graph.adjacency())))
}

/// Normalized betweenness for every node, sources fanned out on rayon.
#[cfg(feature = "parallel")]
pub fn betweenness_par(graph: &SimilarityGraph) -> Result<CentralityReport> {
    check_size(graph)?;
    Ok(report_from_raw(graph, raw_betweenness_par(&graph.adjacency())))
}

/// Normalized betweenness for every node. Uses the parallel path when the
/// `parallel` feature is enabled.
pub fn betweenness(graph: &SimilarityGraph) -> Result<CentralityReport> {
    #[cfg(feature = "parallel")]
    {
        betweenness_par(graph)
    }
    #[cfg(not(feature = "parallel"))]
    {
        betweenness_seq(graph)
    }
}
