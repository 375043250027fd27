//! `engage`: find, code and analyse engaging messages in lesson transcripts.

mod analysis;
mod config;
mod error;
mod files;
mod pipeline;
mod serve;

use std::io::Write;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Parser, Subcommand, ValueEnum};
use engage_core::provenance::short_hash;
use serde_json::Value;

use config::PipelineConfig;
use error::CliError;

#[derive(Parser)]
#[command(name = "engage", version, about = "Keyword filtering, coding and analysis of teacher messages")]
struct Cli {
    /// TOML pipeline configuration. Flags override its values.
    #[arg(long, global = true)]
    config: Option<PathBuf>,
    /// Base directory for relative input and output paths.
    #[arg(long, global = true, env = "ENGAGE_DATA_DIR", default_value = ".")]
    data_dir: PathBuf,
    #[arg(long, global = true, value_enum, default_value_t = OutputMode::Text)]
    output: OutputMode,
    #[command(subcommand)]
    command: Command,
}

#[derive(Clone, Copy, PartialEq, Eq, ValueEnum)]
enum OutputMode {
    Text,
    Json,
}

#[derive(Subcommand)]
enum Command {
    /// Read a transcript manifest and write the normalized corpus.
    Ingest(pipeline::IngestArgs),
    /// Corpus size in transcripts, segments, tokens and pages.
    Stats(pipeline::StatsArgs),
    /// Rank message keywords against background talk and write candidate lists.
    Keywords(pipeline::KeywordsArgs),
    /// Apply one keyword list and report reduction and recall.
    Filter(pipeline::FilterArgs),
    /// Measure recall and reduction for every candidate list.
    Evaluate(pipeline::EvaluateArgs),
    /// Pick the list that keeps every message with the least text.
    Select(pipeline::SelectArgs),
    /// Percent agreement between two coders.
    Agreement(analysis::AgreementArgs),
    /// Category counts, per-group ratios, percentages and figure data.
    Analyze(analysis::AnalyzeArgs),
    /// Generate a labelled synthetic corpus.
    Synth(pipeline::SynthArgs),
    /// Run the coding service.
    Serve(serve::ServeArgs),
}

/// What a subcommand hands back for printing.
pub struct Outcome {
    pub json: Value,
    pub text: String,
}

pub struct Ctx {
    pub config: PipelineConfig,
    pub hash: String,
    data_dir: PathBuf,
    json_output: bool,
}

impl Ctx {
    /// Resolves a flag path, or the configured default, against the data
    /// directory.
    pub fn path(&self, flag: Option<&Path>, default: &Path) -> PathBuf {
        self.data_dir.join(flag.unwrap_or(default))
    }

    pub fn json_output(&self) -> bool {
        self.json_output
    }
}

fn load_config(cli: &Cli) -> Result<PipelineConfig, CliError> {
    match &cli.config {
        Some(path) => PipelineConfig::load(path),
        None => Ok(PipelineConfig::default()),
    }
}

fn run(cli: Cli) -> Result<Outcome, CliError> {
    let mut config = load_config(&cli)?;
    match &cli.command {
        Command::Ingest(_) | Command::Agreement(_) | Command::Serve(_) => {}
        Command::Stats(a) => a.apply(&mut config),
        Command::Keywords(a) => a.apply(&mut config),
        Command::Filter(a) => a.apply(&mut config),
        Command::Evaluate(a) => a.apply(&mut config),
        Command::Select(a) => a.apply(&mut config),
        Command::Analyze(_) => {}
        Command::Synth(a) => a.apply(&mut config),
    }
    config.validate()?;
    let ctx = Ctx {
        hash: config.hash(),
        config,
        data_dir: cli.data_dir,
        json_output: cli.output == OutputMode::Json,
    };
    match cli.command {
        Command::Ingest(a) => pipeline::ingest(&ctx, a),
        Command::Stats(a) => pipeline::stats(&ctx, a),
        Command::Keywords(a) => pipeline::keywords(&ctx, a),
        Command::Filter(a) => pipeline::filter(&ctx, a),
        Command::Evaluate(a) => pipeline::evaluate(&ctx, a),
        Command::Select(a) => pipeline::select(&ctx, a),
        Command::Agreement(a) => analysis::agreement(&ctx, a),
        Command::Analyze(a) => analysis::analyze(&ctx, a),
        Command::Synth(a) => pipeline::synth(&ctx, a),
        Command::Serve(a) => serve::serve(&ctx, a),
    }
    .map(|mut outcome| {
        if let Value::Object(map) = &mut outcome.json {
            map.insert("config_hash".into(), Value::String(ctx.hash.clone()));
        }
        outcome.text += &format!("config {}\n", short_hash(&ctx.hash));
        outcome
    })
}

fn main() -> ExitCode {
    // Usage errors exit with status 2 inside clap.
    let cli = Cli::parse();
    let json = cli.output == OutputMode::Json;
    match run(cli) {
        Ok(outcome) => {
            let printed = if json {
                let mut s = serde_json::to_string_pretty(&outcome.json).expect("outcome serializes");
                s.push('\n');
                s
            } else {
                outcome.text
            };
            let _ = std::io::stdout().lock().write_all(printed.as_bytes());
            ExitCode::SUCCESS
        }
        Err(e) => {
            if json {
                eprintln!("{}", serde_json::to_string_pretty(&e.to_json()).expect("error serializes"));
            } else {
                eprintln!("error: {e}");
            }
            ExitCode::from(e.exit_code())
        }
    }
}
