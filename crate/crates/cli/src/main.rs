mod commands;

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};
use tagsim::evalharness::Method;
use tagsim::simcore::MatrixNorm;

/// Tag similarity, expansion and retrieval over folksonomy dumps.
///
/// Corpora are UTF-8 files of `user<TAB>resource<TAB>tag` lines.
#[derive(Debug, Parser)]
#[command(name = "tagsim", version)]
struct Cli {
    /// Worker threads (default: all cores). Never changes results.
    #[arg(long, global = true)]
    threads: Option<usize>,

    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Print corpus size and usage histograms.
    Stats {
        #[arg(long, short)]
        input: PathBuf,
    },
    /// Write a synthetic corpus.
    Synth(SynthArgs),
    /// Compute tag similarities and write them as TSV.
    Sim(SimArgs),
    /// Expand a tag set using a stored similarity matrix.
    Expand {
        #[arg(long, short)]
        input: PathBuf,
        #[arg(long)]
        sim: PathBuf,
        /// Comma-separated tags.
        #[arg(long, value_delimiter = ',', required = true)]
        tags: Vec<String>,
        /// Number of tags to add instead of the size rule.
        #[arg(long)]
        k: Option<usize>,
    },
    /// Write the corpus with every bookmark's tags expanded.
    Enrich {
        #[arg(long, short)]
        input: PathBuf,
        #[arg(long)]
        sim: PathBuf,
        #[arg(long, short)]
        output: PathBuf,
    },
    /// Rank resources for a tag query.
    Query {
        #[arg(long, short)]
        input: PathBuf,
        /// Expand the query with this similarity matrix first.
        #[arg(long)]
        sim: Option<PathBuf>,
        #[arg(long, value_delimiter = ',', required = true)]
        tags: Vec<String>,
        #[arg(long, short, default_value_t = 10)]
        q: usize,
    },
    /// Run the retrieved-ratio experiment and write a JSON report.
    Eval(EvalArgs),
    /// Re-emit a stored convergence trace as plot-ready TSV.
    Trace {
        #[arg(long, short)]
        input: PathBuf,
        #[arg(long, short)]
        output: Option<PathBuf>,
    },
}

#[derive(Debug, Args)]
struct EngineArgs {
    /// Mutual reinforcement factor in [0,1].
    #[arg(long, default_value_t = 0.5)]
    psi: f64,
    /// Convergence threshold on both relative deltas.
    #[arg(long, default_value_t = 0.1)]
    epsilon: f64,
    #[arg(long, default_value_t = 30)]
    max_iters: usize,
    /// Drop similarities below this from the output.
    #[arg(long, default_value_t = 1e-4)]
    tau: f64,
    /// Largest tag or resource count allowed.
    #[arg(long, default_value_t = 5_000)]
    size_limit: usize,
    #[arg(long, default_value = "entrywise")]
    norm: MatrixNorm,
    #[arg(long, default_value_t = 0.8)]
    c1: f64,
    #[arg(long, default_value_t = 0.8)]
    c2: f64,
    #[arg(long, default_value_t = 10)]
    simrank_iters: usize,
    /// LSI latent dimension.
    #[arg(long, default_value_t = 64)]
    lsi_k: usize,
    #[arg(long, default_value_t = 8)]
    power_iters: usize,
    /// Seed for LSI's random start.
    #[arg(long, default_value_t = 0)]
    lsi_seed: u64,
}

#[derive(Debug, Args)]
struct SimArgs {
    #[arg(long, short)]
    input: PathBuf,
    #[arg(long, short)]
    output: PathBuf,
    #[arg(long, default_value = "mrs")]
    method: Method,
    /// Where to write the convergence trace (mrs only).
    #[arg(long)]
    trace: Option<PathBuf>,
    /// Where to write resource similarities (mrs and simrank).
    #[arg(long)]
    resources: Option<PathBuf>,
    #[command(flatten)]
    engine: EngineArgs,
}

#[derive(Debug, Args)]
struct EvalArgs {
    #[arg(long, short)]
    input: PathBuf,
    #[arg(long, short)]
    output: PathBuf,
    /// Also write the report as TSV.
    #[arg(long)]
    tsv: Option<PathBuf>,
    #[arg(
        long,
        value_delimiter = ',',
        default_value = "none,cosine,simrank,lsi,mrs"
    )]
    methods: Vec<Method>,
    #[arg(long, short, value_delimiter = ',', default_value = "5,10,20")]
    q: Vec<usize>,
    /// Fraction of bookmarks used for training.
    #[arg(long, default_value_t = 0.9)]
    split: f64,
    #[arg(long, default_value_t = 10)]
    repeats: usize,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    #[command(flatten)]
    engine: EngineArgs,
}

#[derive(Debug, Args)]
struct SynthArgs {
    #[arg(long, short)]
    output: PathBuf,
    #[arg(long, default_value_t = 600)]
    users: usize,
    #[arg(long, default_value_t = 3_000)]
    resources: usize,
    #[arg(long, default_value_t = 2_000)]
    tags: usize,
    #[arg(long, default_value_t = 4_000)]
    bookmarks: usize,
    /// Power-law exponent of tag popularity.
    #[arg(long, default_value_t = 2.0)]
    exponent: f64,
    #[arg(long, default_value_t = 300)]
    synonym_groups: usize,
    #[arg(long, default_value_t = 7)]
    seed: u64,
}

fn main() -> ExitCode {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("warn")).init();
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            return if e.use_stderr() {
                ExitCode::from(1)
            } else {
                ExitCode::SUCCESS
            };
        }
    };
    if let Some(n) = cli.threads {
        if n == 0 {
            eprintln!("error: --threads must be at least 1");
            return ExitCode::from(1);
        }
        if let Err(e) = rayon::ThreadPoolBuilder::new()
            .num_threads(n)
            .build_global()
        {
            eprintln!("error: {e}");
            return ExitCode::from(2);
        }
    }
    match commands::run(cli.command) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::from(e.exit_code())
        }
    }
}
