//! Factor analysis of citation profiles: Pearson correlation, principal
//! component extraction, varimax rotation, and max-loading classification.
//!
//! Extraction is principal components on the Pearson correlation matrix.
//! Pearson reuses the cosine kernel from [`crate::similarity`] on
//! mean-centered profiles, so it inherits the same sequential/parallel paths
//! and their bit-identical determinism.

use std::collections::BTreeMap;
use std::io::Read;

use nalgebra::{DMatrix, SymmetricEigen};

use crate::corpus::{csv_error, csv_escape};
use crate::error::{Error, Result};
use crate::matrix::{CitationMatrix, ProfileOrientation};
use crate::similarity::ZeroProfileError;

/// Symmetric Pearson correlation matrix with unit diagonal.
#[derive(Debug, Clone, PartialEq)]
pub struct CorrelationMatrix {
    journals: Vec<String>,
    cells: Vec<f64>,
}

impl CorrelationMatrix {
    /// Build from raw symmetric cells (used by tests and the pipeline).
    pub fn from_cells(journals: Vec<String>, cells: Vec<f64>) -> Result<Self> {
        if cells.len() != journals.len() * journals.len() {
            return Err(Error::InvalidParameter(format!(
                "cell count {} does not match {} journals",
                cells.len(),
                journals.len()
            )));
        }
        Ok(CorrelationMatrix { journals, cells })
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
}

fn center(profiles: &[Vec<f64>]) -> Vec<Vec<f64>> {
    profiles
        .iter()
        .map(|p| {
            let mean = p.iter().sum::<f64>() / p.len() as f64;
            p.iter().map(|x| x - mean).collect()
        })
        .collect()
}

/// Pearson correlation of arbitrary profile vectors, sequential rows.
pub fn pearson_from_profiles_seq(
    journals: &[String],
    profiles: &[Vec<f64>],
) -> Result<CorrelationMatrix> {
    let centered = center(profiles);
    Ok(CorrelationMatrix {
        journals: journals.to_vec(),
        cells: crate::similarity::kernel_seq(journals, &centered, ZeroProfileError::Correlation)?,
    })
}

/// Pearson correlation of arbitrary profile vectors, rows fanned out on rayon.
#[cfg(feature = "parallel")]
pub fn pearson_from_profiles_par(
    journals: &[String],
    profiles: &[Vec<f64>],
) -> Result<CorrelationMatrix> {
    let centered = center(profiles);
    Ok(CorrelationMatrix {
        journals: journals.to_vec(),
        cells: crate::similarity::kernel_par(journals, &centered, ZeroProfileError::Correlation)?,
    })
}

/// Pearson correlation of arbitrary profile vectors. Uses the parallel path
/// when the `parallel` feature is enabled.
pub fn pearson_from_profiles(
    journals: &[String],
    profiles: &[Vec<f64>],
) -> Result<CorrelationMatrix> {
    #[cfg(feature = "parallel")]
    {
        pearson_from_profiles_par(journals, profiles)
    }
    #[cfg(not(feature = "parallel"))]
    {
        pearson_from_profiles_seq(journals, profiles)
    }
}

/// Pearson correlation over the citation profiles of `matrix` under
/// `orientation`. Constant profiles yield an undefined-correlation error
/// naming the journal.
pub fn pearson_matrix(
    matrix: &CitationMatrix,
    orientation: ProfileOrientation,
) -> Result<CorrelationMatrix> {
    let profiles = matrix.profiles(orientation);
    pearson_from_profiles(matrix.journals(), &profiles)
}

/// Loadings of `p` journals on `k` factors plus the derived per-factor and
/// per-journal statistics. After rotation the `eigenvalues` field holds the
/// post-rotation sums of squared loadings, sorted descending.
#[derive(Debug, Clone, PartialEq)]
pub struct FactorModel {
    journals: Vec<String>,
    k: usize,
    loadings: Vec<f64>,
    eigenvalues: Vec<f64>,
    variance_proportions: Vec<f64>,
    communalities: Vec<f64>,
}

impl FactorModel {
    /// Build a model from raw loadings, deriving the summary fields.
    pub fn from_loadings(journals: Vec<String>, k: usize, loadings: Vec<f64>) -> Result<Self> {
        let p = journals.len();
        if loadings.len() != p * k {
            return Err(Error::InvalidParameter(format!(
                "loading count {} does not match {p} journals x {k} factors",
                loadings.len()
            )));
        }
        if k == 0 {
            return Err(Error::InvalidParameter("factor count must be >= 1".into()));
        }
        let eigenvalues = column_sums_of_squares(&loadings, p, k);
        let variance_proportions = eigenvalues.iter().map(|ss| ss / p as f64).collect();
        let communalities = row_sums_of_squares(&loadings, p, k);
        Ok(FactorModel {
            journals,
            k,
            loadings,
            eigenvalues,
            variance_proportions,
            communalities,
        })
    }

    pub fn journals(&self) -> &[String] {
        &self.journals
    }

    pub fn journal_count(&self) -> usize {
        self.journals.len()
    }

    pub fn factor_count(&self) -> usize {
        self.k
    }

    /// Loading of journal `i` on factor column `f` (0-based).
    pub fn loading(&self, i: usize, f: usize) -> f64 {
        self.loadings[i * self.k + f]
    }

    pub fn loadings_row(&self, i: usize) -> &[f64] {
        &self.loadings[i * self.k..(i + 1) * self.k]
    }

    pub fn eigenvalues(&self) -> &[f64] {
        &self.eigenvalues
    }

    pub fn variance_proportions(&self) -> &[f64] {
        &self.variance_proportions
    }

    pub fn communalities(&self) -> &[f64] {
        &self.communalities
    }
}

fn column_sums_of_squares(loadings: &[f64], p: usize, k: usize) -> Vec<f64> {
    (0..k)
        .map(|f| (0..p).map(|i| loadings[i * k + f].powi(2)).sum())
        .collect()
}

fn row_sums_of_squares(loadings: &[f64], p: usize, k: usize) -> Vec<f64> {
    (0..p)
        .map(|i| (0..k).map(|f| loadings[i * k + f].powi(2)).sum())
        .collect()
}

/// Flip each column so its largest-magnitude entry is positive (first such
/// entry wins on magnitude ties).
fn apply_sign_convention(loadings: &mut [f64], p: usize, k: usize) {
    for f in 0..k {
        let mut best = 0usize;
        let mut best_mag = 0.0f64;
        for i in 0..p {
            let mag = loadings[i * k + f].abs();
            if mag > best_mag {
                best_mag = mag;
                best = i;
            }
        }
        if loadings[best * k + f] < 0.0 {
            for i in 0..p {
                loadings[i * k + f] = -loadings[i * k + f];
            }
        }
    }
}

/// Principal-component extraction: loadings column f is the f-th eigenvector
/// scaled by the square root of its eigenvalue, eigenvalues descending.
/// Negative eigenvalues are clamped to zero with a warning.
pub fn principal_components(corr: &CorrelationMatrix, k: usize) -> Result<FactorModel> {
    let p = corr.size();
    if k < 1 || k > p {
        return Err(Error::InvalidParameter(format!(
            "factor count k={k} must satisfy 1 <= k <= {p}"
        )));
    }
    let dense = DMatrix::from_fn(p, p, |i, j| corr.cell(i, j));
    let eigen = SymmetricEigen::try_new(dense, f64::EPSILON, 100_000).ok_or(Error::EigenFailure)?;

    let mut order: Vec<usize> = (0..p).collect();
    order.sort_by(|&a, &b| eigen.eigenvalues[b].total_cmp(&eigen.eigenvalues[a]));

    let mut eigenvalues = Vec::with_capacity(k);
    let mut loadings = vec![0.0f64; p * k];
    for (f, &col) in order.iter().take(k).enumerate() {
        let mut lambda = eigen.eigenvalues[col];
        if lambda < 0.0 {
            log::warn!("clamping negative eigenvalue {lambda:.3e} to 0");
            lambda = 0.0;
        }
        let scale = lambda.sqrt();
        for i in 0..p {
            loadings[i * k + f] = eigen.eigenvectors[(i, col)] * scale;
        }
        eigenvalues.push(lambda);
    }
    apply_sign_convention(&mut loadings, p, k);

    let variance_proportions = (0..k)
        .map(|f| (0..p).map(|i| loadings[i * k + f].powi(2)).sum::<f64>() / p as f64)
        .collect();
    let communalities = row_sums_of_squares(&loadings, p, k);
    Ok(FactorModel {
        journals: corr.journals().to_vec(),
        k,
        loadings,
        eigenvalues,
        variance_proportions,
        communalities,
    })
}

/// Number of eigenvalues greater than 1 (at least 1), the usual automatic
/// factor-count rule.
pub fn kaiser_k(corr: &CorrelationMatrix) -> Result<usize> {
    let full = principal_components(corr, corr.size())?;
    let count = full.eigenvalues().iter().filter(|&&l| l > 1.0).count();
    Ok(count.max(1))
}

fn varimax_criterion(loadings: &[f64], p: usize, k: usize) -> f64 {
    let pf = p as f64;
    (0..k)
        .map(|f| {
            let mut s2 = 0.0;
            let mut s4 = 0.0;
            for i in 0..p {
                let sq = loadings[i * k + f] * loadings[i * k + f];
                s2 += sq;
                s4 += sq * sq;
            }
            s4 / pf - (s2 / pf).powi(2)
        })
        .sum()
}

/// Closed-form planar rotation maximizing the varimax criterion for one
/// factor pair.
fn rotate_pair(loadings: &mut [f64], p: usize, k: usize, f: usize, g: usize) {
    let pf = p as f64;
    let (mut a, mut b, mut c, mut d) = (0.0f64, 0.0f64, 0.0f64, 0.0f64);
    for i in 0..p {
        let x = loadings[i * k + f];
        let y = loadings[i * k + g];
        let u = x * x - y * y;
        let v = 2.0 * x * y;
        a += u;
        b += v;
        c += u * u - v * v;
        d += 2.0 * u * v;
    }
    let numerator = d - 2.0 * a * b / pf;
    let denominator = c - (a * a - b * b) / pf;
    let angle = 0.25 * numerator.atan2(denominator);
    if angle.abs() < 1e-15 {
        return;
    }
    let (sin, cos) = angle.sin_cos();
    for i in 0..p {
        let x = loadings[i * k + f];
        let y = loadings[i * k + g];
        loadings[i * k + f] = cos * x + sin * y;
        loadings[i * k + g] = -sin * x + cos * y;
    }
}

/// Varimax rotation, returning the rotated model and the criterion value
/// before the first sweep and after each sweep. The criterion is the sum
/// over factors of the variance of squared loadings, computed in the
/// (optionally Kaiser-normalized) working space.
pub fn varimax_with_trace(
    model: &FactorModel,
    kaiser_normalize: bool,
    tolerance: f64,
    max_sweeps: usize,
) -> Result<(FactorModel, Vec<f64>)> {
    if tolerance <= 0.0 {
        return Err(Error::InvalidParameter(format!(
            "varimax tolerance must be > 0, got {tolerance}"
        )));
    }
    let p = model.journal_count();
    let k = model.factor_count();
    let mut working = model.loadings.clone();
    if k < 2 {
        let trace = vec![varimax_criterion(&working, p, k)];
        return Ok((model.clone(), trace));
    }

    let weights: Vec<f64> = if kaiser_normalize {
        row_sums_of_squares(&working, p, k)
            .into_iter()
            .map(f64::sqrt)
            .collect()
    } else {
        vec![1.0; p]
    };
    if kaiser_normalize {
        for i in 0..p {
            if weights[i] > 0.0 {
                for f in 0..k {
                    working[i * k + f] /= weights[i];
                }
            }
        }
    }

    let mut trace = vec![varimax_criterion(&working, p, k)];
    for sweep in 0..max_sweeps {
        for f in 0..k - 1 {
            for g in f + 1..k {
                rotate_pair(&mut working, p, k, f, g);
            }
        }
        let criterion = varimax_criterion(&working, p, k);
        // Each pair rotation applies the closed-form maximizer, so a sweep
        // can lower the criterion only by floating-point rounding.
        debug_assert!(criterion >= trace[sweep] - 1e-12);
        trace.push(criterion);
        if criterion - trace[sweep] < tolerance {
            break;
        }
    }

    if kaiser_normalize {
        for i in 0..p {
            if weights[i] > 0.0 {
                for f in 0..k {
                    working[i * k + f] *= weights[i];
                }
            }
        }
    }

    // Re-order factors by explained variance and fix signs, as after extraction.
    let ss = column_sums_of_squares(&working, p, k);
    let mut order: Vec<usize> = (0..k).collect();
    order.sort_by(|&x, &y| ss[y].total_cmp(&ss[x]));
    let mut rotated = vec![0.0f64; p * k];
    for (new_f, &old_f) in order.iter().enumerate() {
        for i in 0..p {
            rotated[i * k + new_f] = working[i * k + old_f];
        }
    }
    apply_sign_convention(&mut rotated, p, k);

    let eigenvalues = column_sums_of_squares(&rotated, p, k);
    let variance_proportions = eigenvalues.iter().map(|ss| ss / p as f64).collect();
    let communalities = row_sums_of_squares(&rotated, p, k);
    let rotated_model = FactorModel {
        journals: model.journals.clone(),
        k,
        loadings: rotated,
        eigenvalues,
        variance_proportions,
        communalities,
    };
    Ok((rotated_model, trace))
}

/// Varimax rotation with the default reporting (trace discarded).
pub fn varimax(
    model: &FactorModel,
    kaiser_normalize: bool,
    tolerance: f64,
    max_sweeps: usize,
) -> Result<FactorModel> {
    varimax_with_trace(model, kaiser_normalize, tolerance, max_sweeps).map(|(m, _)| m)
}

/// Per-journal factor membership. Factor numbers are 1-based; 0 is reserved
/// for callers that deliberately leave a journal (usually the focal) out of
/// every factor.
#[derive(Debug, Clone, PartialEq)]
pub struct FactorAssignment {
    assignments: BTreeMap<String, (usize, f64)>,
    factor_count: usize,
}

impl FactorAssignment {
    pub fn from_map(assignments: BTreeMap<String, (usize, f64)>, factor_count: usize) -> Self {
        FactorAssignment {
            assignments,
            factor_count,
        }
    }

    /// Assigned (factor, loading value used) for a journal.
    pub fn get(&self, id: &str) -> Option<(usize, f64)> {
        self.assignments.get(id).copied()
    }

    pub fn factor_count(&self) -> usize {
        self.factor_count
    }

    pub fn len(&self) -> usize {
        self.assignments.len()
    }

    pub fn is_empty(&self) -> bool {
        self.assignments.is_empty()
    }

    pub fn iter(&self) -> impl Iterator<Item = (&String, &(usize, f64))> {
        self.assignments.iter()
    }
}

/// Assign each journal the factor with the greatest loading: greatest
/// absolute loading by default, greatest signed loading when `signed`.
/// Ties go to the lower factor index (the higher-variance factor).
pub fn classify_by_max_loading(model: &FactorModel, signed: bool) -> FactorAssignment {
    let k = model.factor_count();
    let mut assignments = BTreeMap::new();
    for (i, journal) in model.journals().iter().enumerate() {
        let mut best_f = 0usize;
        let mut best_key = if signed {
            model.loading(i, 0)
        } else {
            model.loading(i, 0).abs()
        };
        for f in 1..k {
            let key = if signed {
                model.loading(i, f)
            } else {
                model.loading(i, f).abs()
            };
            if key > best_key {
                best_key = key;
                best_f = f;
            }
        }
        assignments.insert(journal.clone(), (best_f + 1, model.loading(i, best_f)));
    }
    FactorAssignment {
        assignments,
        factor_count: k,
    }
}

/// Factor report CSV: one row per journal (id, assigned factor, loadings,
/// communality), then a footer block with eigenvalues and variance
/// proportions.
pub fn render_factor_csv(model: &FactorModel, assignment: &FactorAssignment) -> String {
    let k = model.factor_count();
    let mut out = String::from("id,factor");
    for f in 1..=k {
        out.push_str(&format!(",loading_{f}"));
    }
    out.push_str(",communality\n");
    for (i, journal) in model.journals().iter().enumerate() {
        let (factor, _) = assignment.get(journal).unwrap_or((0, 0.0));
        out.push_str(&csv_escape(journal));
        out.push_str(&format!(",{factor}"));
        for f in 0..k {
            out.push_str(&format!(",{}", model.loading(i, f)));
        }
        out.push_str(&format!(",{}\n", model.communalities()[i]));
    }
    for (label, values) in [
        ("eigenvalues", model.eigenvalues()),
        ("variance_proportions", model.variance_proportions()),
    ] {
        out.push_str(label);
        out.push(',');
        for v in values {
            out.push_str(&format!(",{v}"));
        }
        out.push_str(",\n");
    }
    out
}

/// Recover the factor assignment (id and factor columns) from a factor
/// report CSV.
pub fn read_factor_csv<R: Read>(reader: R) -> Result<FactorAssignment> {
    let mut csv_reader = csv::ReaderBuilder::new()
        .has_headers(true)
        .flexible(false)
        .from_reader(reader);
    let headers = csv_reader.headers().map_err(csv_error)?.clone();
    let fields: Vec<&str> = headers.iter().collect();
    if fields.len() < 4
        || fields[0] != "id"
        || fields[1] != "factor"
        || fields[fields.len() - 1] != "communality"
    {
        return Err(Error::Parse {
            line: 1,
            message: "expected header 'id,factor,loading_1,...,communality'".to_owned(),
        });
    }
    let k = fields.len() - 3;
    let mut assignments = BTreeMap::new();
    for row in csv_reader.records() {
        let row = row.map_err(csv_error)?;
        let line = row.position().map(|p| p.line()).unwrap_or(0);
        let id = row[0].trim();
        if id == "eigenvalues" || id == "variance_proportions" {
            continue;
        }
        let factor: usize = row[1].trim().parse().map_err(|_| Error::Parse {
            line,
            message: format!("factor '{}' is not an integer", &row[1]),
        })?;
        if factor > k {
            return Err(Error::Parse {
                line,
                message: format!("factor {factor} exceeds factor count {k}"),
            });
        }
        let loading: f64 = if factor == 0 {
            0.0
        } else {
            row[1 + factor].trim().parse().map_err(|_| Error::Parse {
                line,
                message: format!("loading '{}' is not a number", &row[1 + factor]),
            })?
        };
        assignments.insert(id.to_owned(), (factor, loading));
    }
    Ok(FactorAssignment {
        assignments,
        factor_count: k,
    })
}
