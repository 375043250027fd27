//! Corpus, keyword, filtering and selection subcommands.

use std::collections::BTreeMap;
use std::fmt::Write as _;
use std::num::NonZeroU64;
use std::path::{Path, PathBuf};

use clap::Args;
use engage_core::analytics::GroupKey;
use engage_core::corpus::{corpus_stats, load_corpus, write_transcript, CorpusStats, Manifest, ManifestEntry};
use engage_core::filtering::{filter_corpus, recall_report, reduction_report, FilteredSet, RecallReport, ReductionReport};
use engage_core::keyness::{build_contrast_table, candidate_lists, score_keywords, KeywordScore};
use engage_core::provenance::short_hash;
use engage_core::selection::{evaluate_lists, read_evaluation_csv, select_list, write_evaluation_csv, EvaluationTable};
use engage_core::synth::{generate_synthetic_corpus, planted_token_share};
use serde_json::json;

use crate::config::PipelineConfig;
use crate::error::CliError;
use crate::files::{self, CorpusDocument};
use crate::{Ctx, Outcome};

fn shown(flag: Option<&Path>, default: &Path) -> String {
    flag.unwrap_or(default).display().to_string()
}

fn pages(config: &PipelineConfig) -> NonZeroU64 {
    NonZeroU64::new(config.words_per_page).expect("validated positive")
}

/// Left-aligned first column, right-aligned rest.
pub(crate) fn text_table(headers: &[&str], rows: &[Vec<String>]) -> String {
    let mut widths: Vec<usize> = headers.iter().map(|h| h.len()).collect();
    for r in rows {
        for (w, cell) in widths.iter_mut().zip(r) {
            *w = (*w).max(cell.chars().count());
        }
    }
    let mut out = String::new();
    let line = |out: &mut String, cells: Vec<&str>| {
        for (i, (cell, w)) in cells.iter().zip(&widths).enumerate() {
            if i == 0 {
                let _ = write!(out, "{cell:<w$}");
            } else {
                let _ = write!(out, "  {cell:>w$}");
            }
        }
        out.push('\n');
    };
    line(&mut out, headers.to_vec());
    for r in rows {
        line(&mut out, r.iter().map(String::as_str).collect());
    }
    out
}

#[derive(Args)]
pub struct IngestArgs {
    /// Manifest JSON listing transcript files and their metadata.
    manifest: PathBuf,
    /// Where to write the corpus [default: paths.corpus].
    #[arg(long)]
    out: Option<PathBuf>,
}

pub fn ingest(ctx: &Ctx, args: IngestArgs) -> Result<Outcome, CliError> {
    let manifest = ctx.path(Some(&args.manifest), Path::new(""));
    let corpus = load_corpus(&manifest, &ctx.config.normalization).map_err(|e| CliError::module("corpus", e))?;
    let out = ctx.path(args.out.as_deref(), &ctx.config.paths.corpus);
    let (transcripts, segments, tokens) = (corpus.transcripts.len(), corpus.segment_count(), corpus.token_count());
    files::write_json(
        &out,
        &CorpusDocument {
            config_hash: ctx.hash.clone(),
            normalization: ctx.config.normalization.clone(),
            corpus,
        },
    )?;
    let out = shown(args.out.as_deref(), &ctx.config.paths.corpus);
    Ok(Outcome {
        text: format!("ingested {transcripts} transcripts, {segments} segments, {tokens} tokens into {out}\n"),
        json: json!({ "command": "ingest", "out": out, "transcripts": transcripts, "segments": segments, "tokens": tokens }),
    })
}

#[derive(Args)]
pub struct StatsArgs {
    #[arg(long)]
    corpus: Option<PathBuf>,
    #[arg(long)]
    words_per_page: Option<u64>,
}

impl StatsArgs {
    pub fn apply(&self, config: &mut PipelineConfig) {
        if let Some(w) = self.words_per_page {
            config.words_per_page = w;
        }
    }
}

pub fn stats(ctx: &Ctx, args: StatsArgs) -> Result<Outcome, CliError> {
    let corpus = files::read_corpus(&ctx.path(args.corpus.as_deref(), &ctx.config.paths.corpus), &ctx.config.normalization)?;
    let wpp = pages(&ctx.config);
    let overall: CorpusStats = corpus_stats(&corpus, wpp);
    let mut by_group: BTreeMap<GroupKey, (usize, usize, u64)> = BTreeMap::new();
    for t in &corpus.transcripts {
        for key in [GroupKey::Grade(t.grade), GroupKey::Trimester(t.trimester)] {
            let e = by_group.entry(key).or_default();
            e.0 += 1;
            e.1 += t.segments.len();
            e.2 += t.token_count();
        }
    }
    let rows: Vec<Vec<String>> = by_group
        .iter()
        .map(|(k, (t, s, n))| vec![k.to_string(), t.to_string(), s.to_string(), n.to_string(), format!("{:.1}", *n as f64 / wpp.get() as f64)])
        .chain(std::iter::once(vec![
            "all".into(),
            overall.transcript_count.to_string(),
            overall.segment_count.to_string(),
            overall.token_count.to_string(),
            format!("{:.1}", overall.page_equivalents),
        ]))
        .collect();
    let groups: BTreeMap<String, serde_json::Value> = by_group
        .iter()
        .map(|(k, (t, s, n))| (k.to_string(), json!({ "transcripts": t, "segments": s, "tokens": n })))
        .collect();
    Ok(Outcome {
        text: text_table(&["group", "transcripts", "segments", "tokens", "pages"], &rows),
        json: json!({ "command": "stats", "overall": overall, "groups": groups }),
    })
}

#[derive(Args)]
pub struct KeywordsArgs {
    #[arg(long)]
    corpus: Option<PathBuf>,
    /// Gold message annotations (CSV or JSON) [default: paths.gold].
    #[arg(long)]
    gold: Option<PathBuf>,
    /// Directory for the score table and candidate lists [default: paths.keywords_dir].
    #[arg(long)]
    out_dir: Option<PathBuf>,
    /// Smoothing pseudo-count.
    #[arg(long)]
    alpha: Option<f64>,
    /// Candidate list sizes, comma separated.
    #[arg(long, value_delimiter = ',')]
    sizes: Option<Vec<usize>>,
}

impl KeywordsArgs {
    pub fn apply(&self, config: &mut PipelineConfig) {
        if let Some(a) = self.alpha {
            config.alpha = a;
        }
        if let Some(s) = &self.sizes {
            config.size_grid = s.clone();
        }
    }
}

pub fn keywords(ctx: &Ctx, args: KeywordsArgs) -> Result<Outcome, CliError> {
    let cfg = &ctx.config;
    let corpus = files::read_corpus(&ctx.path(args.corpus.as_deref(), &cfg.paths.corpus), &cfg.normalization)?;
    let gold = files::read_annotations(&ctx.path(args.gold.as_deref(), &cfg.paths.gold))?;
    let table = build_contrast_table(&corpus, &gold, &cfg.normalization).map_err(|e| CliError::module("keyness", e))?;
    let ranked: Vec<KeywordScore> = score_keywords(&table, cfg.alpha).map_err(|e| CliError::module("keyness", e))?;
    let candidates = candidate_lists(&ranked, &cfg.size_grid);

    let out_dir = ctx.path(args.out_dir.as_deref(), &cfg.paths.keywords_dir);
    let score_lines = ranked.iter().enumerate().map(|(i, s)| {
        format!("{},{},{},{},{}", i + 1, s.token, s.score, s.message_count, s.background_count)
    });
    files::write_lines(
        &out_dir.join("scores.csv"),
        &[format!("config_hash: {}", ctx.hash)],
        std::iter::once("rank,token,score,message_count,background_count".to_owned()).chain(score_lines),
    )?;
    for list in &candidates.lists {
        files::write_keyword_list(&out_dir.join(format!("{}.txt", list.name)), list, &ctx.hash)?;
    }

    let top: Vec<Vec<String>> = ranked
        .iter()
        .take(15)
        .enumerate()
        .map(|(i, s)| vec![(i + 1).to_string(), s.token.clone(), format!("{:.4}", s.score), s.message_count.to_string(), s.background_count.to_string()])
        .collect();
    let mut text = format!(
        "{} message tokens, {} background tokens, vocabulary {}\n",
        table.message_total,
        table.background_total,
        table.vocabulary_size()
    );
    text += &text_table(&["rank", "token", "score", "in messages", "elsewhere"], &top);
    let _ = writeln!(
        text,
        "wrote scores.csv and {} candidate lists to {}",
        candidates.lists.len(),
        shown(args.out_dir.as_deref(), &cfg.paths.keywords_dir)
    );
    for w in &candidates.warnings {
        let _ = writeln!(text, "warning: {w}");
    }
    Ok(Outcome {
        text,
        json: json!({
            "command": "keywords",
            "message_tokens": table.message_total,
            "background_tokens": table.background_total,
            "vocabulary": table.vocabulary_size(),
            "lists": candidates.lists.iter().map(|l| json!({ "name": l.name, "size": l.len() })).collect::<Vec<_>>(),
            "warnings": candidates.warnings,
            "top": ranked.iter().take(15).collect::<Vec<_>>(),
        }),
    })
}

#[derive(Args)]
pub struct FilterArgs {
    /// Keyword list file [default: paths.selected].
    #[arg(long)]
    list: Option<PathBuf>,
    #[arg(long)]
    corpus: Option<PathBuf>,
    /// Gold annotations; when given, recall is reported too.
    #[arg(long)]
    gold: Option<PathBuf>,
    /// Neighbouring segments kept around each match.
    #[arg(long)]
    window: Option<usize>,
    #[arg(long)]
    words_per_page: Option<u64>,
    /// Filtered set for coders [default: paths.filtered].
    #[arg(long)]
    out: Option<PathBuf>,
}

impl FilterArgs {
    pub fn apply(&self, config: &mut PipelineConfig) {
        if let Some(w) = self.window {
            config.window = w;
        }
        if let Some(w) = self.words_per_page {
            config.words_per_page = w;
        }
    }
}

fn reduction_text(r: &ReductionReport) -> String {
    format!(
        "kept {} of {} tokens ({:.1} of {:.1} pages), retained fraction {:.4}\n",
        r.retained_tokens, r.total_tokens, r.retained_pages, r.total_pages, r.retained_fraction
    )
}

pub fn filter(ctx: &Ctx, args: FilterArgs) -> Result<Outcome, CliError> {
    let cfg = &ctx.config;
    let corpus = files::read_corpus(&ctx.path(args.corpus.as_deref(), &cfg.paths.corpus), &cfg.normalization)?;
    let list = files::read_keyword_list(&ctx.path(args.list.as_deref(), &cfg.paths.selected), &cfg.normalization)?;
    let filtered =
        filter_corpus(&corpus, &list, cfg.window, &cfg.normalization).map_err(|e| CliError::module("filtering", e))?;
    let reduction: ReductionReport = reduction_report(&corpus, &filtered, pages(cfg));
    let recall: Option<RecallReport> = match &args.gold {
        Some(g) => {
            let gold = files::read_annotations(&ctx.path(Some(g), Path::new("")))?;
            Some(recall_report(&corpus, &filtered, &gold).map_err(|e| CliError::module("filtering", e))?)
        }
        None => None,
    };
    let set = FilteredSet::build(&corpus, &filtered, &list.name, &ctx.hash, cfg.window)
        .map_err(|e| CliError::module("filtering", e))?;
    files::write_json(&ctx.path(args.out.as_deref(), &cfg.paths.filtered), &set)?;

    let out = shown(args.out.as_deref(), &cfg.paths.filtered);
    let mut text = format!(
        "list {} ({} keywords), window {}: {} segments retained\n",
        list.name,
        list.len(),
        cfg.window,
        set.retained_segment_count()
    );
    text += &reduction_text(&reduction);
    if let Some(r) = &recall {
        let _ = writeln!(text, "recall {:.4} ({} of {} gold messages)", r.recall, r.gold_retained, r.gold_total);
        for id in &r.missed {
            let _ = writeln!(text, "missed {id}");
        }
    }
    let _ = writeln!(text, "wrote {out}");
    Ok(Outcome {
        text,
        json: json!({
            "command": "filter",
            "list": list.name,
            "keywords": list.len(),
            "window": cfg.window,
            "retained_segments": set.retained_segment_count(),
            "reduction": reduction,
            "recall": recall,
            "out": out,
        }),
    })
}

#[derive(Args)]
pub struct EvaluateArgs {
    /// Keyword list files or directories of `*.txt` lists [default: paths.keywords_dir].
    #[arg(long, num_args = 1..)]
    lists: Vec<PathBuf>,
    #[arg(long)]
    corpus: Option<PathBuf>,
    #[arg(long)]
    gold: Option<PathBuf>,
    #[arg(long)]
    window: Option<usize>,
    /// Evaluation table [default: paths.evaluation].
    #[arg(long)]
    out: Option<PathBuf>,
}

impl EvaluateArgs {
    pub fn apply(&self, config: &mut PipelineConfig) {
        if let Some(w) = self.window {
            config.window = w;
        }
    }
}

fn evaluation_rows(table: &EvaluationTable) -> Vec<Vec<String>> {
    table
        .rows
        .iter()
        .map(|r| match &r.error {
            Some(e) => vec![r.list.clone(), r.size.to_string(), "failed".into(), e.clone(), String::new()],
            None => vec![
                r.list.clone(),
                r.size.to_string(),
                format!("{:.4}", r.recall),
                format!("{:.4}", r.retained_fraction),
                r.missed_count.to_string(),
            ],
        })
        .collect()
}

const EVALUATION_HEADERS: [&str; 5] = ["list", "size", "recall", "retained", "missed"];

pub fn evaluate(ctx: &Ctx, args: EvaluateArgs) -> Result<Outcome, CliError> {
    let cfg = &ctx.config;
    let corpus = files::read_corpus(&ctx.path(args.corpus.as_deref(), &cfg.paths.corpus), &cfg.normalization)?;
    let gold = files::read_annotations(&ctx.path(args.gold.as_deref(), &cfg.paths.gold))?;
    let sources = if args.lists.is_empty() {
        vec![ctx.path(None, &cfg.paths.keywords_dir)]
    } else {
        args.lists.iter().map(|p| ctx.path(Some(p), Path::new(""))).collect()
    };
    let mut candidates = Vec::new();
    for src in sources {
        let paths = if src.is_dir() { files::list_files(&src)? } else { vec![src] };
        for p in paths {
            candidates.push(files::read_keyword_list(&p, &cfg.normalization)?);
        }
    }
    if candidates.is_empty() {
        return Err(CliError::Usage("no keyword lists found to evaluate".into()));
    }
    let table: EvaluationTable =
        evaluate_lists(&corpus, &gold, &candidates, cfg.window, &cfg.normalization).map_err(|e| CliError::module("selection", e))?;
    let mut bytes = Vec::new();
    write_evaluation_csv(&table, &ctx.hash, None, &mut bytes).expect("write to memory");
    files::write_file(&ctx.path(args.out.as_deref(), &cfg.paths.evaluation), &bytes)?;

    let out = shown(args.out.as_deref(), &cfg.paths.evaluation);
    let mut text = text_table(&EVALUATION_HEADERS, &evaluation_rows(&table));
    let _ = writeln!(text, "{} lists against {} gold messages, wrote {out}", table.rows.len(), gold.len());
    Ok(Outcome {
        text,
        json: json!({ "command": "evaluate", "gold_messages": gold.len(), "rows": table.rows, "out": out }),
    })
}

#[derive(Args)]
pub struct SelectArgs {
    /// Evaluation table written by `evaluate` [default: paths.evaluation].
    #[arg(long)]
    evaluation: Option<PathBuf>,
    #[arg(long)]
    recall_threshold: Option<f64>,
    /// Where to write the table with the selection footer [default: the input].
    #[arg(long)]
    out: Option<PathBuf>,
    /// Directory holding the candidate list files [default: paths.keywords_dir].
    #[arg(long)]
    keywords_dir: Option<PathBuf>,
}

impl SelectArgs {
    pub fn apply(&self, config: &mut PipelineConfig) {
        if let Some(t) = self.recall_threshold {
            config.selection.recall_threshold = t;
        }
    }
}

pub fn select(ctx: &Ctx, args: SelectArgs) -> Result<Outcome, CliError> {
    let cfg = &ctx.config;
    let input = ctx.path(args.evaluation.as_deref(), &cfg.paths.evaluation);
    let file = std::fs::File::open(&input).map_err(|e| CliError::io(&input, e))?;
    let evaluation = read_evaluation_csv(std::io::BufReader::new(file)).map_err(|e| CliError::module("selection", e))?;
    let selection = select_list(&evaluation.table, &cfg.selection).map_err(|e| CliError::module("selection", e))?;

    let out_flag = args.out.as_deref().or(args.evaluation.as_deref());
    let mut bytes = Vec::new();
    write_evaluation_csv(&evaluation.table, &ctx.hash, Some(&selection), &mut bytes).expect("write to memory");
    files::write_file(&ctx.path(out_flag, &cfg.paths.evaluation), &bytes)?;

    // Copy the chosen list next to the data so `filter` picks it up by default.
    let list_file = ctx
        .path(args.keywords_dir.as_deref(), &cfg.paths.keywords_dir)
        .join(format!("{}.txt", selection.list));
    let copied = if list_file.is_file() {
        let list = files::read_keyword_list(&list_file, &cfg.normalization)?;
        files::write_keyword_list(&ctx.path(None, &cfg.paths.selected), &list, &ctx.hash)?;
        Some(cfg.paths.selected.display().to_string())
    } else {
        None
    };

    let r = &selection.row;
    let mut text = format!(
        "selected {} ({} keywords): recall {:.4}, retained fraction {:.4}, {} of {} lists feasible at recall >= {}\n",
        selection.list,
        selection.size,
        r.recall,
        r.retained_fraction,
        selection.feasible_rows,
        evaluation.table.rows.len(),
        cfg.selection.recall_threshold
    );
    if let Some(p) = &copied {
        let _ = writeln!(text, "wrote {p}");
    }
    if let Some(h) = evaluation.config_hash.as_deref().filter(|h| *h != ctx.hash) {
        let _ = writeln!(text, "note: table was evaluated under config {}", short_hash(h));
    }
    Ok(Outcome {
        text,
        json: json!({
            "command": "select",
            "selection": selection,
            "evaluation_config_hash": evaluation.config_hash,
            "selected_list_file": copied,
            "out": shown(out_flag, &cfg.paths.evaluation),
        }),
    })
}

#[derive(Args)]
pub struct SynthArgs {
    #[arg(long)]
    seed: Option<u64>,
    /// Output directory [default: paths.synth_dir].
    #[arg(long)]
    out_dir: Option<PathBuf>,
    #[arg(long)]
    transcripts: Option<usize>,
    #[arg(long)]
    segments: Option<usize>,
    #[arg(long)]
    message_rate: Option<f64>,
}

impl SynthArgs {
    pub fn apply(&self, config: &mut PipelineConfig) {
        let s = &mut config.synth;
        if let Some(v) = self.seed {
            s.seed = v;
        }
        if let Some(v) = self.transcripts {
            s.transcript_count = v;
        }
        if let Some(v) = self.segments {
            s.segments_per_transcript = v;
        }
        if let Some(v) = self.message_rate {
            s.message_rate = v;
        }
    }
}

/// Writes a manifest, one JSON Lines file per transcript, the gold
/// annotations and the true discriminative vocabulary.
pub fn synth(ctx: &Ctx, args: SynthArgs) -> Result<Outcome, CliError> {
    let params = &ctx.config.synth;
    let generated = generate_synthetic_corpus(params).map_err(|e| CliError::module("synth", e))?;
    let dir = ctx.path(args.out_dir.as_deref(), &ctx.config.paths.synth_dir);

    let mut entries = Vec::with_capacity(generated.corpus.transcripts.len());
    for t in &generated.corpus.transcripts {
        let rel = PathBuf::from("transcripts").join(format!("{}.jsonl", t.id));
        let mut bytes = Vec::new();
        write_transcript(t, &mut bytes).expect("write to memory");
        files::write_file(&dir.join(&rel), &bytes)?;
        entries.push(ManifestEntry { path: rel, meta: t.meta() });
    }
    let manifest = Manifest {
        group_registry: generated.corpus.group_registry.clone(),
        transcripts: entries,
    };
    files::write_json(&dir.join("manifest.json"), &manifest)?;
    files::write_annotations(&dir.join("gold.csv"), &generated.gold, &ctx.hash)?;
    files::write_lines(
        &dir.join("discriminative.txt"),
        &["true message vocabulary, most frequent first".into(), format!("config_hash: {}", ctx.hash)],
        generated.discriminative_tokens.iter().cloned(),
    )?;
    let share = planted_token_share(&generated);
    let summary = json!({
        "config_hash": ctx.hash,
        "params": params,
        "transcripts": generated.corpus.transcripts.len(),
        "segments": generated.corpus.segment_count(),
        "tokens": generated.corpus.token_count(),
        "gold_messages": generated.gold.len(),
        "planted_token_share": share,
    });
    files::write_json(&dir.join("synth.json"), &summary)?;

    let out = shown(args.out_dir.as_deref(), &ctx.config.paths.synth_dir);
    Ok(Outcome {
        text: format!(
            "seed {}: {} transcripts, {} segments, {} planted messages ({:.2}% of tokens) in {out}\n",
            params.seed,
            generated.corpus.transcripts.len(),
            generated.corpus.segment_count(),
            generated.gold.len(),
            100.0 * share
        ),
        json: json!({ "command": "synth", "summary": summary, "out": out }),
    })
}
