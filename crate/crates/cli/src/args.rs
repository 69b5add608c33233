use std::path::PathBuf;

use clap::{Args, Parser, Subcommand};
use labelforge_core::corpus::Split;

#[derive(Debug, Parser)]
#[command(name = "labelforge", version, about = "Label prediction for image-based buttons")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Count missing labels in a capture directory.
    Audit(AuditArgs),
    /// Build crops, manifest, vocabulary and splits from captures.
    Preprocess(PreprocessArgs),
    /// Train a captioning model on a manifest.
    Train(TrainArgs),
    /// Generate labels for the crops listed in a manifest or crop index.
    Predict(PredictArgs),
    /// Score predictions against references.
    Evaluate(EvaluateArgs),
    /// Summarize a checkpoint.
    Inspect(InspectArgs),
}

#[derive(Debug, Args)]
pub struct AuditArgs {
    #[arg(long)]
    pub captures: PathBuf,
    #[arg(long)]
    pub out: PathBuf,
}

#[derive(Debug, Args)]
pub struct PreprocessArgs {
    #[arg(long)]
    pub captures: PathBuf,
    #[arg(long)]
    pub out: PathBuf,
    /// JSON preprocessing config; flags take precedence.
    #[arg(long)]
    pub config: Option<PathBuf>,
    #[arg(long)]
    pub seed: Option<u64>,
    #[arg(long)]
    pub min_count: Option<usize>,
}

#[derive(Debug, Args)]
pub struct TrainArgs {
    /// JSON run config (manifest, out, model, train); flags take precedence.
    #[arg(long)]
    pub config: Option<PathBuf>,
    #[arg(long)]
    pub manifest: Option<PathBuf>,
    #[arg(long)]
    pub out: Option<PathBuf>,
    #[arg(long)]
    pub seed: Option<u64>,
    #[arg(long)]
    pub warmup: Option<u64>,
}

#[derive(Debug, Args)]
pub struct PredictArgs {
    /// A training output directory or a checkpoint file.
    #[arg(long)]
    pub checkpoint: PathBuf,
    /// A corpus manifest or a crop index.
    #[arg(long)]
    pub manifest: PathBuf,
    /// Output JSON-lines file; stdout when absent.
    #[arg(long)]
    pub out: Option<PathBuf>,
    /// Beam width; greedy decoding when absent.
    #[arg(long)]
    pub beam: Option<usize>,
    /// Restrict a corpus manifest to one split.
    #[arg(long, value_parser = parse_split)]
    pub split: Option<Split>,
}

#[derive(Debug, Args)]
pub struct EvaluateArgs {
    /// Predictions as JSON lines with crop_id and label.
    #[arg(long)]
    pub pred: PathBuf,
    /// References as JSON lines with crop_id and label (a corpus manifest works).
    #[arg(long)]
    pub refs: PathBuf,
    /// Report file; stdout when absent.
    #[arg(long)]
    pub out: Option<PathBuf>,
}

#[derive(Debug, Args)]
pub struct InspectArgs {
    #[arg(long)]
    pub checkpoint: PathBuf,
}

pub fn parse_split(s: &str) -> Result<Split, String> {
    Split::ALL
        .into_iter()
        .find(|split| split.as_str() == s)
        .ok_or_else(|| format!("expected one of train, val, test; got {s:?}"))
}
