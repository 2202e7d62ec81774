//! Command-line front end: the full pipeline under `run`, plus one
//! subcommand per stage so every step can be exercised and composed from the
//! shell. Composed stage outputs are byte-identical to a full run.
//!
//! Exit codes: 0 success, 1 usage error, 2 data error, 3 numerical failure.

mod config;

use std::collections::BTreeMap;
use std::fs;
use std::path::{Path, PathBuf};

use clap::{Args, Parser, Subcommand};

use citenv::centrality::betweenness;
use citenv::corpus::{CitationCorpus, Direction, Environment};
use citenv::error::{stage, Error, Result};
use citenv::factors::{
    classify_by_max_loading, kaiser_k, pearson_matrix, principal_components, read_factor_csv,
    render_factor_csv, varimax,
};
use citenv::matrix::{build_matrix, drop_isolates, CitationMatrix};
use citenv::pajek::{read_network, render_network_ids, write_pajek};
use citenv::pipeline::{
    load_corpus, run_pipeline, AnalysisConfig, KChoice, OrientationChoice, RunConfig,
};
use citenv::similarity::{build_graph, cosine_matrix, SimilarityMatrix};

use config::{parse_factor_label, FileConfig};

#[derive(Parser)]
#[command(
    name = "citenv",
    version,
    about = "Citation environment analysis: factor clusters, macro-journal flows, and bridging centrality for a focal journal"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Run the full pipeline and write every artifact plus report.json
    Run(Box<RunArgs>),
    /// Extract the focal journal's environment member list
    Env(EnvArgs),
    /// Build the citation matrix over an environment (isolates dropped)
    Matrix(MatrixArgs),
    /// Factor-analyze a citation matrix (Pearson, extraction, varimax)
    Factors(FactorsArgs),
    /// Cosine similarity matrix of citation profiles
    Cosine(CosineArgs),
    /// Threshold a cosine matrix into a network file
    Graph(GraphArgs),
    /// Betweenness centrality ranking of a network file
    Centrality(CentralityArgs),
    /// Macro-journal citation flows per factor
    Aggregate(AggregateArgs),
    /// Pajek network and partition files for visualization
    Export(ExportArgs),
}

#[derive(Args)]
struct RunArgs {
    /// Citation edge list CSV (citing,cited,count)
    #[arg(long)]
    corpus: Option<PathBuf>,
    /// Journal metadata CSV (id,name,impact_factor)
    #[arg(long)]
    metadata: Option<PathBuf>,
    /// Focal journal id
    #[arg(long)]
    focal: Option<String>,
    /// import (journals the focal cites) or export (journals citing it)
    #[arg(long)]
    direction: Option<Direction>,
    /// Minimum citation count for environment membership
    #[arg(long)]
    min_count: Option<u64>,
    /// Factor count, or 'auto' for the eigenvalue > 1 rule
    #[arg(long)]
    k: Option<KChoice>,
    /// Cosine edge threshold (strictly greater than)
    #[arg(long)]
    threshold: Option<f64>,
    /// Profile orientation: auto, row, or column
    #[arg(long)]
    orientation: Option<OrientationChoice>,
    /// Zero the diagonal (self-citation) cells
    #[arg(long)]
    zero_diagonal: bool,
    /// Classify by greatest signed loading instead of absolute loading
    #[arg(long)]
    signed: bool,
    /// Disable Kaiser row normalization in the varimax rotation
    #[arg(long)]
    no_kaiser: bool,
    #[arg(long)]
    varimax_tolerance: Option<f64>,
    #[arg(long)]
    varimax_max_sweeps: Option<usize>,
    /// Impact-factor cutoff for labeling nodes in network.net
    #[arg(long)]
    impact_cutoff: Option<f64>,
    /// Label every node in network.net regardless of impact factor
    #[arg(long)]
    no_impact_cutoff: bool,
    /// Corpus label recorded in the report (defaults to the file stem)
    #[arg(long)]
    label: Option<String>,
    /// Factor label as FACTOR=LABEL; repeatable
    #[arg(long = "factor-label")]
    factor_labels: Vec<String>,
    /// Record a generation timestamp in the report
    #[arg(long)]
    timestamp: bool,
    /// Output directory
    #[arg(long)]
    out_dir: Option<PathBuf>,
    /// Optional TOML configuration file; flags win over file values
    #[arg(long)]
    config: Option<PathBuf>,
}

#[derive(Args)]
struct EnvArgs {
    #[arg(long)]
    corpus: PathBuf,
    #[arg(long)]
    focal: String,
    #[arg(long, default_value = "import")]
    direction: Direction,
    #[arg(long, default_value_t = 2)]
    min_count: u64,
    #[arg(long)]
    out: PathBuf,
}

#[derive(Args)]
struct MatrixArgs {
    #[arg(long)]
    corpus: PathBuf,
    /// Environment member CSV from the env stage (focal first)
    #[arg(long)]
    env: PathBuf,
    #[arg(long, default_value = "import")]
    direction: Direction,
    #[arg(long, default_value = "auto")]
    orientation: OrientationChoice,
    #[arg(long)]
    zero_diagonal: bool,
    #[arg(long)]
    out: PathBuf,
}

#[derive(Args)]
struct FactorsArgs {
    /// Citation matrix CSV from the matrix stage
    #[arg(long)]
    matrix: PathBuf,
    #[arg(long, default_value = "5")]
    k: KChoice,
    #[arg(long, default_value = "import")]
    direction: Direction,
    #[arg(long, default_value = "auto")]
    orientation: OrientationChoice,
    #[arg(long)]
    no_kaiser: bool,
    #[arg(long)]
    signed: bool,
    #[arg(long, default_value_t = 1e-6)]
    varimax_tolerance: f64,
    #[arg(long, default_value_t = 100)]
    varimax_max_sweeps: usize,
    #[arg(long)]
    out: PathBuf,
}

#[derive(Args)]
struct CosineArgs {
    #[arg(long)]
    matrix: PathBuf,
    #[arg(long, default_value = "import")]
    direction: Direction,
    #[arg(long, default_value = "auto")]
    orientation: OrientationChoice,
    #[arg(long)]
    out: PathBuf,
}

#[derive(Args)]
struct GraphArgs {
    /// Cosine matrix CSV from the cosine stage
    #[arg(long)]
    cosine: PathBuf,
    #[arg(long, default_value_t = 0.2)]
    threshold: f64,
    #[arg(long)]
    out: PathBuf,
}

#[derive(Args)]
struct CentralityArgs {
    /// Network file from the graph stage
    #[arg(long)]
    graph: PathBuf,
    #[arg(long)]
    out: PathBuf,
}

#[derive(Args)]
struct AggregateArgs {
    #[arg(long)]
    matrix: PathBuf,
    /// Factor report CSV from the factors stage
    #[arg(long)]
    factors: PathBuf,
    #[arg(long, default_value = "import")]
    direction: Direction,
    /// Factor label as FACTOR=LABEL; repeatable
    #[arg(long = "factor-label")]
    factor_labels: Vec<String>,
    #[arg(long)]
    out: PathBuf,
}

#[derive(Args)]
struct ExportArgs {
    #[arg(long)]
    graph: PathBuf,
    #[arg(long)]
    factors: PathBuf,
    #[arg(long)]
    metadata: Option<PathBuf>,
    #[arg(long, default_value_t = 1.4)]
    impact_cutoff: f64,
    #[arg(long)]
    no_impact_cutoff: bool,
    #[arg(long)]
    out_net: PathBuf,
    #[arg(long)]
    out_clu: PathBuf,
}

fn write_output(path: &Path, contents: &str) -> Result<()> {
    if let Some(parent) = path.parent() {
        if !parent.as_os_str().is_empty() {
            fs::create_dir_all(parent)?;
        }
    }
    fs::write(path, contents)?;
    Ok(())
}

fn collect_factor_labels(
    flag_values: &[String],
    base: BTreeMap<usize, String>,
) -> Result<BTreeMap<usize, String>> {
    let mut labels = base;
    for raw in flag_values {
        let (factor, label) = parse_factor_label(raw)?;
        labels.insert(factor, label);
    }
    Ok(labels)
}

fn build_run_config(args: RunArgs) -> Result<RunConfig> {
    let file = match &args.config {
        Some(path) => FileConfig::load(path)?,
        None => FileConfig::default(),
    };
    let file_factor_labels = file.parsed_factor_labels()?;

    let corpus_path = args
        .corpus
        .or(file.corpus)
        .ok_or_else(|| Error::InvalidParameter("--corpus is required".into()))?;
    let focal = args
        .focal
        .or(file.focal)
        .ok_or_else(|| Error::InvalidParameter("--focal is required".into()))?;
    let out_dir = args
        .out_dir
        .or(file.out_dir)
        .ok_or_else(|| Error::InvalidParameter("--out-dir is required".into()))?;

    let direction = match args.direction {
        Some(d) => d,
        None => match &file.direction {
            Some(raw) => raw.parse()?,
            None => Direction::Import,
        },
    };
    let orientation = match args.orientation {
        Some(o) => o,
        None => match &file.orientation {
            Some(raw) => raw.parse()?,
            None => OrientationChoice::Auto,
        },
    };
    let k = match args.k {
        Some(k) => k,
        None => match &file.k {
            Some(value) => value.parse()?,
            None => KChoice::Fixed(5),
        },
    };

    let mut analysis = AnalysisConfig::new(focal, direction);
    analysis.min_count = args.min_count.or(file.min_count).unwrap_or(2);
    analysis.k = k;
    analysis.threshold = args.threshold.or(file.threshold).unwrap_or(0.2);
    analysis.orientation = orientation;
    analysis.zero_diagonal = args.zero_diagonal || file.zero_diagonal.unwrap_or(false);
    analysis.signed_classification = args.signed || file.signed.unwrap_or(false);
    analysis.kaiser_normalize = if args.no_kaiser {
        false
    } else {
        file.kaiser.unwrap_or(true)
    };
    analysis.varimax_tolerance = args
        .varimax_tolerance
        .or(file.varimax_tolerance)
        .unwrap_or(1e-6);
    analysis.varimax_max_sweeps = args
        .varimax_max_sweeps
        .or(file.varimax_max_sweeps)
        .unwrap_or(100);
    analysis.factor_labels = collect_factor_labels(&args.factor_labels, file_factor_labels)?;

    let impact_factor_cutoff = if args.no_impact_cutoff {
        None
    } else {
        Some(args.impact_cutoff.or(file.impact_cutoff).unwrap_or(1.4))
    };

    Ok(RunConfig {
        corpus_path,
        metadata_path: args.metadata.or(file.metadata),
        analysis,
        impact_factor_cutoff,
        corpus_label: args.label.or(file.label),
        timestamp: args.timestamp || file.timestamp.unwrap_or(false),
        out_dir,
    })
}

fn cmd_run(args: RunArgs) -> Result<()> {
    let run = build_run_config(args)?;
    let report = run_pipeline(&run)?;
    println!("wrote 10 artifacts to {}", run.out_dir.display());
    println!(
        "environment of '{}' ({}): {} members, {} after isolate drop",
        report.focal,
        report.direction,
        report.environment.size_before_drop,
        report.environment.size_after_drop
    );
    if let Some(top) = report.centrality.entries.first() {
        println!(
            "highest betweenness: {} ({:.1}%)",
            top.id,
            top.normalized * 100.0
        );
    }
    Ok(())
}

fn cmd_env(args: EnvArgs) -> Result<()> {
    let corpus = load_corpus(&args.corpus, None, None)?;
    let environment = stage(
        "environment",
        corpus.extract_environment(&args.focal, args.direction, args.min_count),
    )?;
    write_output(&args.out, &environment.to_csv_string())
}

fn cmd_matrix(args: MatrixArgs) -> Result<()> {
    let corpus = load_corpus(&args.corpus, None, None)?;
    let environment = Environment::from_csv(fs::File::open(&args.env)?, args.direction, 1)?;
    let focal = environment.focal().to_owned();
    let orientation = args.orientation.resolve(args.direction);
    let matrix = stage("matrix", build_matrix(&corpus, &environment))?;
    let matrix = if args.zero_diagonal {
        matrix.with_zero_diagonal()
    } else {
        matrix
    };
    let matrix = stage("drop_isolates", drop_isolates(&matrix, orientation, &focal))?;
    write_output(&args.out, &matrix.to_csv_string())
}

fn cmd_factors(args: FactorsArgs) -> Result<()> {
    let matrix = CitationMatrix::from_csv(fs::File::open(&args.matrix)?)?;
    let orientation = args.orientation.resolve(args.direction);
    let correlation = stage("pearson", pearson_matrix(&matrix, orientation))?;
    let k = match args.k {
        KChoice::Fixed(k) => k,
        KChoice::Auto => stage("extraction", kaiser_k(&correlation))?,
    };
    let extraction = stage("extraction", principal_components(&correlation, k))?;
    let model = stage(
        "varimax",
        varimax(
            &extraction,
            !args.no_kaiser,
            args.varimax_tolerance,
            args.varimax_max_sweeps,
        ),
    )?;
    let assignment = classify_by_max_loading(&model, args.signed);
    write_output(&args.out, &render_factor_csv(&model, &assignment))
}

fn cmd_cosine(args: CosineArgs) -> Result<()> {
    let matrix = CitationMatrix::from_csv(fs::File::open(&args.matrix)?)?;
    let orientation = args.orientation.resolve(args.direction);
    let cosine = stage("cosine", cosine_matrix(&matrix, orientation))?;
    write_output(&args.out, &cosine.to_csv_string())
}

fn cmd_graph(args: GraphArgs) -> Result<()> {
    let cosine = SimilarityMatrix::from_csv(fs::File::open(&args.cosine)?)?;
    let graph = stage("graph", build_graph(&cosine, args.threshold))?;
    write_output(&args.out, &stage("export", render_network_ids(&graph))?)
}

fn cmd_centrality(args: CentralityArgs) -> Result<()> {
    let network = read_network(fs::File::open(&args.graph)?)?;
    let graph = network.into_graph(0.0)?;
    let report = stage("centrality", betweenness(&graph))?;
    write_output(&args.out, &report.to_csv_string())
}

fn cmd_aggregate(args: AggregateArgs) -> Result<()> {
    let matrix = CitationMatrix::from_csv(fs::File::open(&args.matrix)?)?;
    let assignment = read_factor_csv(fs::File::open(&args.factors)?)?;
    let focal = matrix
        .journals()
        .first()
        .cloned()
        .ok_or_else(|| Error::InvalidParameter("matrix has no journals".into()))?;
    let labels = collect_factor_labels(&args.factor_labels, BTreeMap::new())?;
    let aggregate = stage(
        "aggregate",
        citenv::aggregate::macro_aggregate(
            &matrix,
            &assignment,
            &focal,
            args.direction,
            &labels,
            "",
        ),
    )?;
    write_output(&args.out, &aggregate.to_csv_string())
}

fn cmd_export(args: ExportArgs) -> Result<()> {
    let network = read_network(fs::File::open(&args.graph)?)?;
    let graph = network.into_graph(0.0)?;
    let assignment = read_factor_csv(fs::File::open(&args.factors)?)?;
    let journals = match &args.metadata {
        Some(path) => {
            let mut registry = CitationCorpus::new("metadata");
            registry.merge_metadata(fs::File::open(path)?)?;
            registry.journal_map().clone()
        }
        None => BTreeMap::new(),
    };
    let cutoff = if args.no_impact_cutoff {
        None
    } else {
        Some(args.impact_cutoff)
    };
    let (net, clu) = stage(
        "export",
        write_pajek(&graph, &assignment, &journals, cutoff),
    )?;
    write_output(&args.out_net, &net)?;
    write_output(&args.out_clu, &clu)
}

fn dispatch(cli: Cli) -> Result<()> {
    match cli.command {
        Command::Run(args) => cmd_run(*args),
        Command::Env(args) => cmd_env(args),
        Command::Matrix(args) => cmd_matrix(args),
        Command::Factors(args) => cmd_factors(args),
        Command::Cosine(args) => cmd_cosine(args),
        Command::Graph(args) => cmd_graph(args),
        Command::Centrality(args) => cmd_centrality(args),
        Command::Aggregate(args) => cmd_aggregate(args),
        Command::Export(args) => cmd_export(args),
    }
}

fn main() {
    env_logger::init();
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let code = match e.kind() {
                clap::error::ErrorKind::DisplayHelp | clap::error::ErrorKind::DisplayVersion => 0,
                _ => 1,
            };
            let _ = e.print();
            std::process::exit(code);
        }
    };
    if let Err(e) = dispatch(cli) {
        eprintln!("error: {e}");
        std::process::exit(e.class().exit_code());
    }
}
