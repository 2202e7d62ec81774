//! Cosine similarity of citation profiles and the thresholded graph built
//! from it.
//!
//! The pairwise kernel is shared with the Pearson computation in
//! [`crate::factors`]: Pearson is the same normalized dot product applied to
//! mean-centered profiles. Both a sequential and (with the `parallel`
//! feature) a rayon-backed row-parallel path are provided; the two produce
//! bit-identical matrices because every cell is computed independently.

use std::io::Read;

#[cfg(feature = "parallel")]
use rayon::prelude::*;

use crate::corpus::csv_escape;
use crate::error::{Error, Result};
use crate::matrix::{parse_square_csv, CitationMatrix, ProfileOrientation};

/// Symmetric cosine matrix with unit diagonal.
#[derive(Debug, Clone, PartialEq)]
pub struct SimilarityMatrix {
    journals: Vec<String>,
    cells: Vec<f64>,
}

impl SimilarityMatrix {
    /// Build from raw symmetric cells (used by tests and the graph stage).
    pub fn from_cells(journals: Vec<String>, cells: Vec<f64>) -> Result<Self> {
        if cells.len() != journals.len() * journals.len() {
            return Err(Error::InvalidParameter(format!(
                "cell count {} does not match {} journals",
                cells.len(),
                journals.len()
            )));
        }
        Ok(SimilarityMatrix { journals, cells })
    }

    pub fn size(&self) -> usize {
        self.journals.len()
    }

    pub fn journals(&self) -> &[String] {
        &self.journals
    }

    pub fn cell(&self, row: usize, col: usize) -> f64 {
        self.cells[row * self.journals.len() + col]
    }

    /// CSV rendering mirroring the citation-matrix layout, full precision.
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

    pub fn from_csv<R: Read>(reader: R) -> Result<Self> {
        let (journals, cells) = parse_square_csv(reader, |raw, line| {
            raw.trim().parse::<f64>().map_err(|_| Error::Parse {
                line,
                message: format!("cell '{raw}' is not a number"),
            })
        })?;
        Ok(SimilarityMatrix { journals, cells })
    }
}

/// How an all-zero profile is reported by the shared kernel.
#[derive(Debug, Clone, Copy)]
pub(crate) enum ZeroProfileError {
    Cosine,
    Correlation,
}

impl ZeroProfileError {
    fn build(self, journal: &str) -> Error {
        match self {
            ZeroProfileError::Cosine => Error::UndefinedCosine(journal.to_owned()),
            ZeroProfileError::Correlation => Error::UndefinedCorrelation(journal.to_owned()),
        }
    }
}

fn profile_norms(
    journals: &[String],
    profiles: &[Vec<f64>],
    kind: ZeroProfileError,
) -> Result<Vec<f64>> {
    let mut norms = Vec::with_capacity(profiles.len());
    for (journal, profile) in journals.iter().zip(profiles) {
        let norm_sq: f64 = profile.iter().map(|x| x * x).sum();
        if norm_sq == 0.0 {
            return Err(kind.build(journal));
        }
        norms.push(norm_sq.sqrt());
    }
    Ok(norms)
}

fn upper_strip(a: usize, profiles: &[Vec<f64>], norms: &[f64]) -> Vec<f64> {
    let n = profiles.len();
    let pa = &profiles[a];
    (a + 1..n)
        .map(|b| {
            let dot: f64 = pa.iter().zip(&profiles[b]).map(|(x, y)| x * y).sum();
            dot / (norms[a] * norms[b])
        })
        .collect()
}

fn assemble(journals: &[String], strips: Vec<Vec<f64>>) -> Vec<f64> {
    let n = journals.len();
    let mut cells = vec![0.0f64; n * n];
    for a in 0..n {
        cells[a * n + a] = 1.0;
        for (offset, value) in strips[a].iter().enumerate() {
            let b = a + 1 + offset;
            cells[a * n + b] = *value;
            cells[b * n + a] = *value;
        }
    }
    cells
}

pub(crate) fn kernel_seq(
    journals: &[String],
    profiles: &[Vec<f64>],
    kind: ZeroProfileError,
) -> Result<Vec<f64>> {
    let norms = profile_norms(journals, profiles, kind)?;
    let strips: Vec<Vec<f64>> = (0..profiles.len())
        .map(|a| upper_strip(a, profiles, &norms))
        .collect();
    Ok(assemble(journals, strips))
}

#[cfg(feature = "parallel")]
pub(crate) fn kernel_par(
    journals: &[String],
    profiles: &[Vec<f64>],
    kind: ZeroProfileError,
) -> Result<Vec<f64>> {
    let norms = profile_norms(journals, profiles, kind)?;
    let strips: Vec<Vec<f64>> = (0..profiles.len())
        .into_par_iter()
        .map(|a| upper_strip(a, profiles, &norms))
        .collect();
    Ok(assemble(journals, strips))
}

/// Cosine matrix of arbitrary profile vectors, sequential rows.
pub fn cosine_from_profiles_seq(
    journals: &[String],
    profiles: &[Vec<f64>],
) -> Result<SimilarityMatrix> {
    Ok(SimilarityMatrix {
        journals: journals.to_vec(),
        cells: kernel_seq(journals, profiles, ZeroProfileError::Cosine)?,
    })
}

/// Cosine matrix of arbitrary profile vectors, rows fanned out on rayon.
#[cfg(feature = "parallel")]
pub fn cosine_from_profiles_par(
    journals: &[String],
    profiles: &[Vec<f64>],
) -> Result<SimilarityMatrix> {
    Ok(SimilarityMatrix {
        journals: journals.to_vec(),
        cells: kernel_par(journals, profiles, ZeroProfileError::Cosine)?,
    })
}

/// Cosine matrix of arbitrary profile vectors. Uses the parallel path when
/// the `parallel` feature is enabled.
pub fn cosine_from_profiles(journals: &[String], profiles: &[Vec<f64>]) -> Result<SimilarityMatrix> {
    #[cfg(feature = "parallel")]
    {
        cosine_from_profiles_par(journals, profiles)
    }
    #[cfg(not(feature = "parallel"))]
    {
        cosine_from_profiles_seq(journals, profiles)
    }
}

/// Cosine similarity over the citation profiles of `matrix` under
/// `orientation`.
pub fn cosine_matrix(
    matrix: &CitationMatrix,
    orientation: ProfileOrientation,
) -> Result<SimilarityMatrix> {
    let profiles = matrix.profiles(orientation);
    cosine_from_profiles(matrix.journals(), &profiles)
}

/// Undirected edge in a similarity graph; `a < b` index into the node list.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Edge {
    pub a: usize,
    pub b: usize,
    pub weight: f64,
}

/// Thresholded undirected similarity network. Isolated nodes are retained.
#[derive(Debug, Clone, PartialEq)]
pub struct SimilarityGraph {
    nodes: Vec<String>,
    edges: Vec<Edge>,
    threshold: f64,
}

impl SimilarityGraph {
    /// Assemble a graph directly from parts (used when reading Pajek files).
    /// Edges are canonicalized to `a < b` and sorted; self-loops are rejected.
    pub fn from_parts(nodes: Vec<String>, edges: Vec<(usize, usize, f64)>, threshold: f64) -> Result<Self> {
        let mut canonical = Vec::with_capacity(edges.len());
        for (a, b, weight) in edges {
            if a == b {
                return Err(Error::InvalidParameter(format!(
                    "self-loop on node index {a}"
                )));
            }
            if a >= nodes.len() || b >= nodes.len() {
                return Err(Error::InvalidParameter(format!(
                    "edge ({a}, {b}) references a node out of range"
                )));
            }
            let (a, b) = if a < b { (a, b) } else { (b, a) };
            canonical.push(Edge { a, b, weight });
        }
        canonical.sort_by_key(|e| (e.a, e.b));
        canonical.dedup_by_key(|e| (e.a, e.b));
        Ok(SimilarityGraph {
            nodes,
            edges: canonical,
            threshold,
        })
    }

    pub fn nodes(&self) -> &[String] {
        &self.nodes
    }

    pub fn edges(&self) -> &[Edge] {
        &self.edges
    }

    pub fn threshold(&self) -> f64 {
        self.threshold
    }

    pub fn node_count(&self) -> usize {
        self.nodes.len()
    }

    pub fn edge_count(&self) -> usize {
        self.edges.len()
    }

    /// Adjacency lists in node order.
    pub fn adjacency(&self) -> Vec<Vec<usize>> {
        let mut adj = vec![Vec::new(); self.nodes.len()];
        for e in &self.edges {
            adj[e.a].push(e.b);
            adj[e.b].push(e.a);
        }
        adj
    }
}

/// Keep the edge (a, b) iff `sim(a, b) > threshold`, strictly. All journals
/// stay as nodes even when isolated.
pub fn build_graph(sim: &SimilarityMatrix, threshold: f64) -> Result<SimilarityGraph> {
    if !(0.0..1.0).contains(&threshold) {
        return Err(Error::InvalidParameter(format!(
            "threshold must satisfy 0 <= t < 1, got {threshold}"
        )));
    }
    let n = sim.size();
    let mut edges = Vec::new();
    for a in 0..n {
        for b in a + 1..n {
            let weight = sim.cell(a, b);
            if weight > threshold {
                edges.push(Edge { a, b, weight });
            }
        }
    }
    Ok(SimilarityGraph {
        nodes: sim.journals().to_vec(),
        edges,
        threshold,
    })
}
