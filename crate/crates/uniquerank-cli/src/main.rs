//! Command-line front end for the uniquerank library: rank nodes, run the
//! removal-disruption grid, and export scatter, histogram, and synthetic
//! graph files. Every output embeds a manifest header that reproduces it.

mod commands;
mod manifest;

use std::path::PathBuf;

use clap::{Args, Parser, Subcommand};

#[derive(Parser)]
#[command(name = "uniquerank", version, about = "Rank nodes of attributed graphs by structural importance and attribute uniqueness")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Score every node and write a ranking CSV
    Rank(RankArgs),
    /// Remove top-ranked nodes per method and tabulate the disruption grid
    Evaluate(EvaluateArgs),
    /// Export the importance / log-uniqueness plane with the selected set
    Scatter(ScatterArgs),
    /// Generate a symmetric graph, optionally perturbing some nodes
    Synth(SynthArgs),
    /// Bin attribute values over all nodes versus a selected subset
    Histogram(HistogramArgs),
}

/// Graph input shared by every subcommand that reads one.
#[derive(Args)]
struct InputArgs {
    /// Edge list file (CSV or TSV, `#` comments allowed)
    #[arg(long)]
    edges: PathBuf,
    /// Node attribute table; row order defines node ids
    #[arg(long)]
    attributes: PathBuf,
    /// Treat edges as directed
    #[arg(long)]
    directed: bool,
    /// Attribute normalization applied after loading
    #[arg(long, default_value = "min_max")]
    normalize: String,
}

/// Similarity-kernel bandwidth selection.
#[derive(Args)]
struct KernelArgs {
    /// Fixed RBF bandwidth
    #[arg(long, conflicts_with = "gamma_median")]
    gamma: Option<f64>,
    /// Pick the bandwidth by the seeded median heuristic (the default)
    #[arg(long)]
    gamma_median: bool,
}

/// Markov-chain parameters.
#[derive(Args)]
struct ChainArgs {
    /// Weight of the structural walk against the attribute walk
    #[arg(long, default_value_t = 0.85)]
    d: f64,
    /// Floor mixed into the destination weights
    #[arg(long, default_value_t = 0.5)]
    alpha: f64,
    /// L1 convergence tolerance
    #[arg(long, default_value_t = 1e-10)]
    tolerance: f64,
    #[arg(long, default_value_t = 1000)]
    max_iterations: usize,
}

#[derive(Args)]
struct RankArgs {
    #[command(flatten)]
    input: InputArgs,
    #[command(flatten)]
    kernel: KernelArgs,
    #[command(flatten)]
    chain: ChainArgs,
    /// Scoring method: uniquerank, attrirank, pagerank, degree, closeness,
    /// or eigenvector
    #[arg(long, default_value = "uniquerank")]
    method: String,
    /// Size of the final selected set (the `refined` column)
    #[arg(long, default_value_t = 10)]
    top_k: usize,
    /// Size of the chain top set feeding refinement (defaults to --top-k)
    #[arg(long)]
    seed_k: Option<usize>,
    /// Mark the plain chain top-k instead of running refinement
    #[arg(long)]
    no_refine: bool,
    #[arg(long)]
    output: PathBuf,
}

#[derive(Args)]
struct EvaluateArgs {
    #[command(flatten)]
    input: InputArgs,
    #[command(flatten)]
    kernel: KernelArgs,
    #[command(flatten)]
    chain: ChainArgs,
    /// Comma-separated methods to compare
    #[arg(
        long,
        default_value = "uniquerank,attrirank,pagerank,degree,closeness,eigenvector"
    )]
    methods: String,
    /// Comma-separated top-k sizes
    #[arg(long, default_value = "5,10")]
    top_k: String,
    /// Comma-separated replacement similarity thresholds
    #[arg(long, default_value = "0.5,0.7")]
    thresholds: String,
    /// start:end:step sweep adding naive(t) baseline methods
    #[arg(long)]
    baseline_thresholds: Option<String>,
    /// Replacement search radius in hops
    #[arg(long, default_value_t = 2)]
    search_hops: usize,
    /// Distance-study saturation cap
    #[arg(long, default_value_t = 10)]
    distance_cap: usize,
    /// Count the removed node itself in the efficiency pair set
    #[arg(long)]
    include_removed_in_pairs: bool,
    /// Output CSV for the efficiency-reduction metric
    #[arg(long)]
    output_reduction: PathBuf,
    /// Output CSV for the replacement-distance metric
    #[arg(long)]
    output_distance: PathBuf,
}

#[derive(Args)]
struct ScatterArgs {
    #[command(flatten)]
    input: InputArgs,
    #[command(flatten)]
    kernel: KernelArgs,
    #[command(flatten)]
    chain: ChainArgs,
    /// Size of the selected set to mark
    #[arg(long, default_value_t = 10)]
    top_k: usize,
    /// Size of the chain top set feeding refinement (defaults to --top-k)
    #[arg(long)]
    seed_k: Option<usize>,
    /// Mark the plain chain top-k instead of running refinement
    #[arg(long)]
    no_refine: bool,
    #[arg(long)]
    output: PathBuf,
}

#[derive(Args)]
struct SynthArgs {
    /// Topology: cycle, complete, or hypercube
    kind: String,
    /// Cycle and complete node count, or hypercube dimension
    #[arg(long)]
    n: usize,
    /// Attribute dimensions of the emitted rows
    #[arg(long, default_value_t = 2)]
    dims: usize,
    /// Number of nodes to perturb (0 leaves all attributes at the base)
    #[arg(long, default_value_t = 0)]
    perturb: usize,
    /// Perturbation seed
    #[arg(long, default_value_t = 0)]
    seed: u64,
    #[arg(long)]
    output_edges: PathBuf,
    #[arg(long)]
    output_attributes: PathBuf,
}

#[derive(Args)]
struct HistogramArgs {
    #[command(flatten)]
    input: InputArgs,
    /// Ranking or scatter CSV whose refined/selected column marks the subset
    #[arg(long)]
    selected_from: PathBuf,
    #[arg(long, default_value_t = 10)]
    bins: usize,
    #[arg(long)]
    output: PathBuf,
}

fn main() {
    init_thread_pool();
    let cli = Cli::parse();
    if let Err(e) = commands::run(cli.command) {
        eprintln!("error: {e:#}");
        std::process::exit(1);
    }
}

/// UNIQUERANK_THREADS caps the rayon pool before any parallel work starts.
fn init_thread_pool() {
    let Ok(raw) = std::env::var("UNIQUERANK_THREADS") else {
        return;
    };
    match raw.parse::<usize>() {
        Ok(threads) if threads > 0 => {
            let _ = rayon::ThreadPoolBuilder::new()
                .num_threads(threads)
                .build_global();
        }
        _ => {
            eprintln!("error: UNIQUERANK_THREADS must be a positive integer, got {raw:?}");
            std::process::exit(1);
        }
    }
}
