//! `hs2sd` command-line interface.
//!
//! Exit codes: 0 success, 2 usage/input problems, 3 geometry failures,
//! 4 shape mismatches. Errors print as a single stderr line prefixed with
//! the class token (`input-error:`, `geometry-error:`, `shape-mismatch:`).

use std::path::PathBuf;

use clap::{Args, Parser, Subcommand};
use hs2sd_core::{Error, ErrorClass};

mod commands;
mod synth;

#[derive(Parser)]
#[command(
    name = "hs2sd",
    version,
    about = "Hyperbolic set-to-set distances, tree-spectra surveys and delta-hyperbolicity",
    after_help = "Exit codes: 0 ok, 2 usage/input, 3 geometry, 4 shape mismatch."
)]
struct Cli {
    /// Worker threads for parallel scans (fallback: HS2SD_THREADS, then all cores)
    #[arg(long, global = true)]
    threads: Option<usize>,
    #[command(subcommand)]
    command: Command,
}

#[derive(Args, Clone)]
struct DistanceOpts {
    /// Balancing weight: a number in [0, 1], or "adapter"
    #[arg(long, default_value = "0.5")]
    lambda: String,
    /// Adapter weight file (required with --lambda adapter)
    #[arg(long)]
    adapter_weights: Option<PathBuf>,
    /// Index of the last Thue-Morse word; tm-terms + 1 words are used
    #[arg(long, default_value_t = 4)]
    tm_terms: usize,
    /// Reinterpret file coordinates under this curvature
    #[arg(long)]
    curvature: Option<f64>,
    /// Sort each set by distance to its Einstein midpoint before the
    /// order-sensitive topological term
    #[arg(long)]
    canonical_order: bool,
    /// Divide each adjacency matrix by its largest row sum before word
    /// products (magnitude control for long words)
    #[arg(long)]
    normalize_adjacency: bool,
    /// Average the adapter weight over both argument orders
    #[arg(long)]
    symmetrize_lambda: bool,
}

#[derive(Subcommand)]
enum Command {
    /// Distance between two sets of a point-set file, printed as JSON
    Dist {
        file: PathBuf,
        set_id_a: String,
        set_id_b: String,
        #[command(flatten)]
        opts: DistanceOpts,
    },
    /// Pairwise distance matrix over every set in a file, printed as CSV
    Matrix {
        file: PathBuf,
        #[command(flatten)]
        opts: DistanceOpts,
    },
    /// Nearest-prototype classification of query sets against labeled
    /// support sets. Multi-shot supports of one class are merged into a
    /// single prototype; if any query/prototype cardinality differs, lambda
    /// is forced to 1 (the topological term needs equal cardinalities).
    /// Ties go to the first class label in sorted order.
    Classify {
        support_file: PathBuf,
        query_file: PathBuf,
        #[command(flatten)]
        opts: DistanceOpts,
    },
    /// Gromov delta-hyperbolicity of a point set (.json) or a raw CSV
    /// distance matrix
    Delta {
        file: PathBuf,
        /// Set id to use when the file holds several sets
        #[arg(long)]
        set_id: Option<String>,
        /// exact | sampled
        #[arg(long, default_value = "exact")]
        mode: String,
        /// Quadruples to draw in sampled mode
        #[arg(long, default_value_t = 10000)]
        samples: usize,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        /// Reinterpret point-set coordinates under this curvature
        #[arg(long)]
        curvature: Option<f64>,
    },
    /// Collision survey of Thue-Morse trace signatures over all unlabeled
    /// trees on n vertices (n <= 9), printed as JSON
    TreeSurvey {
        n: usize,
        /// Index of the last Thue-Morse word in the survey word set
        #[arg(long, default_value_t = 4)]
        tm_terms: usize,
        /// Largest trace power per word (default: n)
        #[arg(long)]
        max_power: Option<usize>,
    },
    /// Deterministic synthetic point-set file with well-separated class
    /// anchors, written to stdout (or --out)
    Synth {
        #[arg(long)]
        classes: usize,
        #[arg(long)]
        sets_per_class: usize,
        #[arg(long)]
        points_per_set: usize,
        #[arg(long)]
        dimension: usize,
        #[arg(long)]
        curvature: f64,
        /// Root-mean-square displacement of each point from its class
        /// anchor, in absolute coordinate units
        #[arg(long)]
        spread: f64,
        #[arg(long)]
        seed: u64,
        /// Minimum pairwise anchor separation, as a fraction of the ball
        /// radius
        #[arg(long, default_value_t = 0.5)]
        min_separation: f64,
        #[arg(long, short)]
        out: Option<PathBuf>,
    },
}

fn init_threads(requested: Option<usize>) -> Result<(), Error> {
    let from_env = std::env::var("HS2SD_THREADS")
        .ok()
        .map(|v| {
            v.parse::<usize>().map_err(|_| Error::InvalidParameter {
                detail: format!("HS2SD_THREADS must be a positive integer, got {v:?}"),
            })
        })
        .transpose()?;
    if let Some(threads) = requested.or(from_env) {
        if threads == 0 {
            return Err(Error::InvalidParameter {
                detail: "--threads must be at least 1".into(),
            });
        }
        rayon::ThreadPoolBuilder::new()
            .num_threads(threads)
            .build_global()
            .map_err(|e| Error::InvalidParameter {
                detail: format!("could not configure thread pool: {e}"),
            })?;
    }
    Ok(())
}

fn run(cli: Cli) -> Result<(), Error> {
    init_threads(cli.threads)?;
    match cli.command {
        Command::Dist {
            file,
            set_id_a,
            set_id_b,
            opts,
        } => commands::dist(&file, &set_id_a, &set_id_b, &opts),
        Command::Matrix { file, opts } => commands::matrix(&file, &opts),
        Command::Classify {
            support_file,
            query_file,
            opts,
        } => commands::classify(&support_file, &query_file, &opts),
        Command::Delta {
            file,
            set_id,
            mode,
            samples,
            seed,
            curvature,
        } => commands::delta(&file, set_id.as_deref(), &mode, samples, seed, curvature),
        Command::TreeSurvey {
            n,
            tm_terms,
            max_power,
        } => commands::tree_survey(n, tm_terms, max_power),
        Command::Synth {
            classes,
            sets_per_class,
            points_per_set,
            dimension,
            curvature,
            spread,
            seed,
            min_separation,
            out,
        } => {
            let file = synth::generate(&synth::SynthParams {
                classes,
                sets_per_class,
                points_per_set,
                dimension,
                curvature,
                spread,
                seed,
                min_separation,
            })?;
            let text = file.to_json_string();
            match out {
                Some(path) => std::fs::write(path, text + "\n")?,
                None => println!("{text}"),
            }
            Ok(())
        }
    }
}

fn main() {
    let cli = Cli::parse();
    if let Err(err) = run(cli) {
        let (token, code) = match err.class() {
            ErrorClass::Input => ("input-error", 2),
            ErrorClass::Geometry => ("geometry-error", 3),
            ErrorClass::Shape => ("shape-mismatch", 4),
        };
        let message = err.to_string().replace('\n', " ");
        eprintln!("{token}: {message}");
        std::process::exit(code);
    }
}
