//! Command-line front door: ingestion → statistics → factor models, one
//! subcommand per pipeline stage, each reading and writing plain artifacts
//! so whole figures can be reproduced by a shell script.

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};

mod commands;
mod output;

#[derive(Parser)]
#[command(
    name = "lexvar",
    version,
    about = "Word-frequency burstiness statistics and latent-factor models over document corpora"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Tokenize documents and write the term-document count artifact
    Ingest(IngestArgs),
    /// Per-word cross-text moments, normalized variance and the σ² = a·x̄^κ fit
    Stats(StatsArgs),
    /// Truncated SVD of the frequency matrix with spectrum diagnostics
    Lsa(LsaArgs),
    /// Aspect topic model P(w|b) = Σ_z P(w|z)P(z|b) fit by EM
    Plsa(PlsaArgs),
    /// Dirichlet-prior topic model fit by variational EM, with rare-topic report
    Lda(LdaArgs),
    /// Generate a synthetic corpus from a JSON generator specification
    Simulate(SimulateArgs),
    /// Normalized-variance calibration against an i.i.d. null corpus
    Calibrate(CalibrateArgs),
}

#[derive(Args)]
struct IngestArgs {
    /// Manifest of `id<TAB>path` lines; paths resolve against the manifest's directory
    #[arg(long, conflicts_with = "dir", required_unless_present = "dir")]
    manifest: Option<PathBuf>,
    /// Directory whose plain files become documents, ids taken from file names
    #[arg(long)]
    dir: Option<PathBuf>,
    /// Output artifact directory
    #[arg(long)]
    out: PathBuf,
}

#[derive(Args)]
struct StatsArgs {
    /// Term-document artifact directory written by `ingest`
    #[arg(long)]
    input: PathBuf,
    #[arg(long)]
    out: PathBuf,
    /// Fit the power law over the m most frequent words
    #[arg(long, default_value_t = 1000)]
    top_words: usize,
    /// Exponent for the reduced variable y = V·x̄^(1−κ)
    #[arg(long, default_value_t = 1.25)]
    kappa: f64,
}

#[derive(Args)]
struct LsaArgs {
    #[arg(long)]
    input: PathBuf,
    #[arg(long)]
    out: PathBuf,
    /// Restrict to the m most frequent words before decomposing
    #[arg(long, default_value_t = 500)]
    top_words: usize,
    /// Number of factors to extract
    #[arg(long, default_value_t = 10)]
    rank: usize,
}

#[derive(Args)]
struct PlsaArgs {
    #[arg(long)]
    input: PathBuf,
    #[arg(long)]
    out: PathBuf,
    /// Number of topics
    #[arg(long)]
    topics: usize,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    /// Stop when the per-iteration log-likelihood gain drops to tol·|L|
    #[arg(long, default_value_t = 1e-9)]
    tol: f64,
    #[arg(long, default_value_t = 2000)]
    max_iters: usize,
}

#[derive(Args)]
struct LdaArgs {
    #[arg(long)]
    input: PathBuf,
    #[arg(long)]
    out: PathBuf,
    /// Number of topics
    #[arg(long)]
    topics: usize,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    /// Stop when the per-iteration bound gain drops to tol·|ELBO|
    #[arg(long, default_value_t = 1e-8)]
    tol: f64,
    #[arg(long, default_value_t = 200)]
    max_iters: usize,
    /// Restrict to the m most frequent words before fitting
    #[arg(long, default_value_t = 1000)]
    top_words: usize,
    /// Marker words reported per topic
    #[arg(long, default_value_t = 10)]
    markers: usize,
}

#[derive(Args)]
struct SimulateArgs {
    /// JSON generator specification
    #[arg(long)]
    spec: PathBuf,
    #[arg(long)]
    out: PathBuf,
}

#[derive(Args)]
struct CalibrateArgs {
    #[arg(long)]
    out: PathBuf,
    /// Vocabulary size of the null corpus (Zipf-weighted)
    #[arg(long, default_value_t = 100)]
    words: usize,
    #[arg(long, default_value_t = 1000)]
    docs: u32,
    /// Tokens per document
    #[arg(long, default_value_t = 10000)]
    doc_len: u32,
    #[arg(long, default_value_t = 0)]
    seed: u64,
}

fn main() -> ExitCode {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("warn")).init();
    if let Err(err) = configure_threads() {
        eprintln!("error: {err:#}");
        return ExitCode::FAILURE;
    }
    let cli = Cli::parse();
    let result = match cli.command {
        Command::Ingest(args) => commands::ingest(&args),
        Command::Stats(args) => commands::stats(&args),
        Command::Lsa(args) => commands::lsa(&args),
        Command::Plsa(args) => commands::plsa(&args),
        Command::Lda(args) => commands::lda(&args),
        Command::Simulate(args) => commands::simulate(&args),
        Command::Calibrate(args) => commands::calibrate(&args),
    };
    match result {
        Ok(()) => ExitCode::SUCCESS,
        Err(err) => {
            eprintln!("error: {err:#}");
            ExitCode::FAILURE
        }
    }
}

/// LEXVAR_THREADS caps internal parallelism; unset means rayon's default.
fn configure_threads() -> anyhow::Result<()> {
    use anyhow::Context;
    if let Ok(raw) = std::env::var("LEXVAR_THREADS") {
        let n: usize = raw
            .trim()
            .parse()
            .with_context(|| format!("LEXVAR_THREADS=`{raw}` is not a thread count"))?;
        if n > 0 {
            rayon::ThreadPoolBuilder::new()
                .num_threads(n)
                .build_global()
                .context("failed to size the thread pool")?;
        }
    }
    Ok(())
}
