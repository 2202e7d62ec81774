//! End-to-end orchestration: parse -> environment -> matrix -> hygiene ->
//! {factors, cosine network -> betweenness} -> macro aggregate -> reports.

use std::collections::BTreeMap;
use std::fs;
use std::path::{Path, PathBuf};
use std::time::{SystemTime, UNIX_EPOCH};

use crate::aggregate::{macro_aggregate, MacroAggregate};
use crate::centrality::{betweenness, CentralityReport};
use crate::corpus::{CitationCorpus, Direction, Environment};
use crate::error::{stage, Error, Result};
use crate::factors::{
    classify_by_max_loading, kaiser_k, pearson_matrix, principal_components, render_factor_csv,
    varimax, FactorAssignment, FactorModel,
};
use crate::matrix::{build_matrix, drop_isolates, CitationMatrix, ProfileOrientation};
use crate::pajek::{render_network_ids, write_pajek};
use crate::report::{
    emit_report, ConfigEcho, EnvironmentSummary, FactorSummary, PipelineReport,
};
use crate::similarity::{build_graph, cosine_matrix, SimilarityGraph, SimilarityMatrix};

/// Factor count selection: a fixed k or the eigenvalue-greater-than-one rule.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum KChoice {
    Fixed(usize),
    Auto,
}

impl KChoice {
    pub fn mode(&self) -> &'static str {
        match self {
            KChoice::Fixed(_) => "fixed",
            KChoice::Auto => "auto",
        }
    }
}

impl std::str::FromStr for KChoice {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        if s.eq_ignore_ascii_case("auto") {
            return Ok(KChoice::Auto);
        }
        let k: usize = s.parse().map_err(|_| {
            Error::InvalidParameter(format!("k must be a positive integer or 'auto', got '{s}'"))
        })?;
        if k == 0 {
            return Err(Error::InvalidParameter("k must be >= 1".into()));
        }
        Ok(KChoice::Fixed(k))
    }
}

/// Profile orientation selection; `Auto` derives it from the direction:
/// Import environments read cited-by (column) profiles, Export environments
/// read citing (row) profiles.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum OrientationChoice {
    Auto,
    Row,
    Column,
}

impl OrientationChoice {
    pub fn resolve(self, direction: Direction) -> ProfileOrientation {
        match self {
            OrientationChoice::Row => ProfileOrientation::RowProfiles,
            OrientationChoice::Column => ProfileOrientation::ColumnProfiles,
            OrientationChoice::Auto => match direction {
                Direction::Import => ProfileOrientation::ColumnProfiles,
                Direction::Export => ProfileOrientation::RowProfiles,
            },
        }
    }
}

impl std::str::FromStr for OrientationChoice {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.to_ascii_lowercase().as_str() {
            "auto" => Ok(OrientationChoice::Auto),
            "row" => Ok(OrientationChoice::Row),
            "column" => Ok(OrientationChoice::Column),
            other => Err(Error::InvalidParameter(format!(
                "unknown orientation '{other}' (expected 'auto', 'row' or 'column')"
            ))),
        }
    }
}

/// In-memory analysis configuration. Defaults follow the published parameter
/// choices: count threshold 2, five factors, cosine threshold 0.2.
#[derive(Debug, Clone, PartialEq)]
pub struct AnalysisConfig {
    pub focal: String,
    pub direction: Direction,
    pub min_count: u64,
    pub k: KChoice,
    pub threshold: f64,
    pub orientation: OrientationChoice,
    pub zero_diagonal: bool,
    pub signed_classification: bool,
    pub kaiser_normalize: bool,
    pub varimax_tolerance: f64,
    pub varimax_max_sweeps: usize,
    pub factor_labels: BTreeMap<usize, String>,
}

impl AnalysisConfig {
    pub fn new(focal: impl Into<String>, direction: Direction) -> Self {
        AnalysisConfig {
            focal: focal.into(),
            direction,
            min_count: 2,
            k: KChoice::Fixed(5),
            threshold: 0.2,
            orientation: OrientationChoice::Auto,
            zero_diagonal: false,
            signed_classification: false,
            kaiser_normalize: true,
            varimax_tolerance: 1e-6,
            varimax_max_sweeps: 100,
            factor_labels: BTreeMap::new(),
        }
    }

    pub fn classification_mode(&self) -> &'static str {
        if self.signed_classification {
            "signed"
        } else {
            "absolute"
        }
    }
}

/// Every intermediate product of one analysis run.
#[derive(Debug, Clone)]
pub struct Analysis {
    pub environment: Environment,
    pub matrix: CitationMatrix,
    pub dropped: Vec<String>,
    pub orientation: ProfileOrientation,
    pub k: usize,
    pub extraction: FactorModel,
    pub model: FactorModel,
    pub assignment: FactorAssignment,
    pub cosine: SimilarityMatrix,
    pub graph: SimilarityGraph,
    pub centrality: CentralityReport,
    pub aggregate: MacroAggregate,
}

/// Run the full analysis over an in-memory corpus.
pub fn analyze(corpus: &CitationCorpus, config: &AnalysisConfig) -> Result<Analysis> {
    let environment = stage(
        "environment",
        corpus.extract_environment(&config.focal, config.direction, config.min_count),
    )?;

    let orientation = config.orientation.resolve(config.direction);
    let raw_matrix = stage("matrix", build_matrix(corpus, &environment))?;
    let raw_matrix = if config.zero_diagonal {
        raw_matrix.with_zero_diagonal()
    } else {
        raw_matrix
    };
    let matrix = stage(
        "drop_isolates",
        drop_isolates(&raw_matrix, orientation, &config.focal),
    )?;
    let dropped: Vec<String> = environment
        .members()
        .iter()
        .filter(|m| matrix.index_of(m).is_none())
        .cloned()
        .collect();

    let correlation = stage("pearson", pearson_matrix(&matrix, orientation))?;
    let k = match config.k {
        KChoice::Fixed(k) => k,
        KChoice::Auto => stage("extraction", kaiser_k(&correlation))?,
    };
    let extraction = stage("extraction", principal_components(&correlation, k))?;
    let model = stage(
        "varimax",
        varimax(
            &extraction,
            config.kaiser_normalize,
            config.varimax_tolerance,
            config.varimax_max_sweeps,
        ),
    )?;
    let assignment = classify_by_max_loading(&model, config.signed_classification);

    let cosine = stage("cosine", cosine_matrix(&matrix, orientation))?;
    let graph = stage("graph", build_graph(&cosine, config.threshold))?;
    let centrality = stage("centrality", betweenness(&graph))?;

    let aggregate = stage(
        "aggregate",
        macro_aggregate(
            &matrix,
            &assignment,
            &config.focal,
            config.direction,
            &config.factor_labels,
            corpus.label(),
        ),
    )?;

    Ok(Analysis {
        environment,
        matrix,
        dropped,
        orientation,
        k,
        extraction,
        model,
        assignment,
        cosine,
        graph,
        centrality,
        aggregate,
    })
}

/// File names written into the output directory by [`run_pipeline`] and by
/// the stage subcommands.
pub mod files {
    pub const ENVIRONMENT: &str = "env.csv";
    pub const MATRIX: &str = "matrix.csv";
    pub const FACTORS: &str = "factors.csv";
    pub const COSINE: &str = "cosine.csv";
    pub const GRAPH: &str = "graph.net";
    pub const CENTRALITY: &str = "centrality.csv";
    pub const AGGREGATE: &str = "aggregate.csv";
    pub const NETWORK: &str = "network.net";
    pub const PARTITION: &str = "network.clu";
    pub const REPORT: &str = "report.json";
}

/// Full filesystem-level run configuration.
#[derive(Debug, Clone)]
pub struct RunConfig {
    pub corpus_path: PathBuf,
    pub metadata_path: Option<PathBuf>,
    pub analysis: AnalysisConfig,
    pub impact_factor_cutoff: Option<f64>,
    pub corpus_label: Option<String>,
    pub timestamp: bool,
    pub out_dir: PathBuf,
}

impl RunConfig {
    pub fn new(corpus_path: impl Into<PathBuf>, analysis: AnalysisConfig, out_dir: impl Into<PathBuf>) -> Self {
        RunConfig {
            corpus_path: corpus_path.into(),
            metadata_path: None,
            analysis,
            impact_factor_cutoff: Some(1.4),
            corpus_label: None,
            timestamp: false,
            out_dir: out_dir.into(),
        }
    }
}

/// Load a corpus from disk, merging metadata when supplied. The label
/// defaults to the corpus file stem.
pub fn load_corpus(
    corpus_path: &Path,
    metadata_path: Option<&Path>,
    label: Option<&str>,
) -> Result<CitationCorpus> {
    let file = fs::File::open(corpus_path)?;
    let label = label
        .map(str::to_owned)
        .or_else(|| {
            corpus_path
                .file_stem()
                .map(|s| s.to_string_lossy().into_owned())
        })
        .unwrap_or_default();
    let mut corpus = stage("parse", CitationCorpus::parse_citations(file, label))?;
    if let Some(path) = metadata_path {
        let file = fs::File::open(path)?;
        stage("metadata", corpus.merge_metadata(file))?;
    }
    Ok(corpus)
}

fn build_notes(config: &AnalysisConfig, analysis: &Analysis) -> Vec<String> {
    let mut notes = vec![
        "profiles are restricted to environment members on both matrix axes".to_owned(),
        format!(
            "betweenness uses hop-count shortest paths on the thresholded graph, normalized by (n-1)(n-2)/2 with n = {}",
            analysis.centrality.graph_size
        ),
        format!(
            "diagonal self-citation cells {}",
            if config.zero_diagonal { "zeroed" } else { "retained" }
        ),
        format!(
            "classification by {} loading, ties to the lower factor index",
            config.classification_mode()
        ),
    ];
    if config.k == KChoice::Auto {
        notes.push(format!(
            "factor count {} selected automatically (eigenvalues > 1)",
            analysis.k
        ));
    }
    notes
}

/// Assemble the report document for a completed analysis.
pub fn build_report(
    corpus: &CitationCorpus,
    config: &AnalysisConfig,
    analysis: &Analysis,
    impact_factor_cutoff: Option<f64>,
    timestamp: bool,
) -> PipelineReport {
    let generated_at = timestamp.then(|| {
        SystemTime::now()
            .duration_since(UNIX_EPOCH)
            .map(|d| d.as_secs().to_string())
            .unwrap_or_default()
    });
    PipelineReport {
        tool_version: env!("CARGO_PKG_VERSION").to_owned(),
        generated_at,
        corpus_label: corpus.label().to_owned(),
        focal: config.focal.clone(),
        direction: config.direction,
        environment: EnvironmentSummary {
            size_before_drop: analysis.environment.len(),
            size_after_drop: analysis.matrix.size(),
            dropped: analysis.dropped.clone(),
        },
        config: ConfigEcho {
            min_count: config.min_count,
            k_mode: config.k.mode().to_owned(),
            k: analysis.k,
            threshold: config.threshold,
            orientation: analysis.orientation,
            zero_diagonal: config.zero_diagonal,
            kaiser_normalize: config.kaiser_normalize,
            classification: config.classification_mode().to_owned(),
            varimax_tolerance: config.varimax_tolerance,
            varimax_max_sweeps: config.varimax_max_sweeps,
            impact_factor_cutoff,
            factor_labels: config.factor_labels.clone(),
        },
        factors: FactorSummary::from_models(&analysis.extraction, &analysis.model, &analysis.assignment),
        aggregate: analysis.aggregate.clone(),
        centrality: analysis.centrality.clone(),
        notes: build_notes(config, analysis),
    }
}

/// Execute the full pipeline: load, analyze, and write every artifact plus
/// the report into the output directory.
pub fn run_pipeline(run: &RunConfig) -> Result<PipelineReport> {
    let corpus = load_corpus(
        &run.corpus_path,
        run.metadata_path.as_deref(),
        run.corpus_label.as_deref(),
    )?;
    let analysis = analyze(&corpus, &run.analysis)?;

    fs::create_dir_all(&run.out_dir)?;
    let write = |name: &str, contents: &str| -> Result<()> {
        fs::write(run.out_dir.join(name), contents)?;
        Ok(())
    };

    write(files::ENVIRONMENT, &analysis.environment.to_csv_string())?;
    write(files::MATRIX, &analysis.matrix.to_csv_string())?;
    write(files::COSINE, &analysis.cosine.to_csv_string())?;
    write(
        files::FACTORS,
        &render_factor_csv(&analysis.model, &analysis.assignment),
    )?;
    write(files::GRAPH, &stage("export", render_network_ids(&analysis.graph))?)?;
    write(files::CENTRALITY, &analysis.centrality.to_csv_string())?;
    write(files::AGGREGATE, &analysis.aggregate.to_csv_string())?;
    let (net, clu) = stage(
        "export",
        write_pajek(
            &analysis.graph,
            &analysis.assignment,
            corpus.journal_map(),
            run.impact_factor_cutoff,
        ),
    )?;
    write(files::NETWORK, &net)?;
    write(files::PARTITION, &clu)?;

    let report = build_report(
        &corpus,
        &run.analysis,
        &analysis,
        run.impact_factor_cutoff,
        run.timestamp,
    );
    write(files::REPORT, &emit_report(&report))?;
    Ok(report)
}
