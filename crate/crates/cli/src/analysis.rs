//! Agreement between coders and category analytics over a coded corpus.

use std::collections::BTreeMap;
use std::fmt::Write as _;
use std::path::{Path, PathBuf};

use clap::{Args, ValueEnum};
use engage_core::analytics::{
    category_counts, export_table, figure_data, level_ratios, percentages, ExportFormat, Grouping, PercentScope,
    RenderedTable,
};
use engage_core::reliability::{align_annotations, agreement_report, DEFAULT_OVERLAP_THRESHOLD};
use engage_core::{AgreementReport, Grade, RatioTable};
use serde_json::json;

use crate::error::CliError;
use crate::files;
use crate::pipeline::text_table;
use crate::{Ctx, Outcome};

#[derive(Args)]
pub struct AgreementArgs {
    /// First coder's annotations (CSV, or JSON with `corpus_id`).
    a: PathBuf,
    /// Second coder's annotations.
    b: PathBuf,
    /// Minimum span overlap (Jaccard) for two annotations to be compared.
    #[arg(long, default_value_t = DEFAULT_OVERLAP_THRESHOLD)]
    threshold: f64,
    /// Corpus id assumed for CSV inputs, which do not carry one.
    #[arg(long, default_value = "corpus")]
    corpus_id: String,
}

fn percent(v: Option<f64>) -> String {
    v.map(|p| format!("{p:.2}")).unwrap_or_else(|| "-".into())
}

pub fn agreement(ctx: &Ctx, args: AgreementArgs) -> Result<Outcome, CliError> {
    if !(args.threshold > 0.0 && args.threshold <= 1.0) {
        return Err(CliError::Usage(format!("--threshold must be in (0, 1], got {}", args.threshold)));
    }
    let a = files::read_annotation_set(&ctx.path(Some(&args.a), Path::new("")), &args.corpus_id)?;
    let b = files::read_annotation_set(&ctx.path(Some(&args.b), Path::new("")), &args.corpus_id)?;
    let pairs = align_annotations(&a, &b, args.threshold).map_err(|e| CliError::module("reliability", e))?;
    let report: AgreementReport = agreement_report(&pairs).map_err(|e| CliError::module("reliability", e))?;

    let u = report.units;
    let mut text = format!(
        "overall agreement {:.2}% over {} units ({} agree, {} disagree, {} only in A, {} only in B)\n",
        report.overall_percent,
        u.total(),
        u.agreeing,
        u.disagreeing,
        u.unmatched_a,
        u.unmatched_b
    );
    let mut rows: Vec<Vec<String>> = report
        .per_frame
        .iter()
        .map(|(f, p)| vec![f.as_str().to_owned(), percent(*p)])
        .collect();
    rows.extend(report.per_appeal.iter().map(|(a, p)| vec![a.as_str().to_owned(), percent(*p)]));
    rows.extend(report.per_category.iter().map(|(c, p)| vec![c.to_string(), percent(*p)]));
    text += &text_table(&["label", "agreement"], &rows);
    Ok(Outcome {
        text,
        json: json!({ "command": "agreement", "threshold": args.threshold, "report": report }),
    })
}

#[derive(Clone, Copy, ValueEnum)]
enum Format {
    Csv,
    Json,
}

#[derive(Clone, Copy, ValueEnum)]
enum Scope {
    /// Each cell over the whole table.
    Table,
    /// Each cell over its own group.
    WithinGroup,
}

#[derive(Args)]
pub struct AnalyzeArgs {
    /// Adjudicated annotations (CSV or JSON).
    annotations: PathBuf,
    #[arg(long)]
    corpus: Option<PathBuf>,
    /// Directory for tables and figure data [default: paths.analysis_dir].
    #[arg(long)]
    out_dir: Option<PathBuf>,
    #[arg(long, value_enum, default_value_t = Format::Csv)]
    format: Format,
    #[arg(long, value_enum, default_value_t = Scope::Table)]
    scope: Scope,
}

fn module(e: impl std::fmt::Display) -> CliError {
    CliError::module("analytics", e)
}

pub fn analyze(ctx: &Ctx, args: AnalyzeArgs) -> Result<Outcome, CliError> {
    let cfg = &ctx.config;
    let corpus = files::read_corpus(&ctx.path(args.corpus.as_deref(), &cfg.paths.corpus), &cfg.normalization)?;
    let annotations = files::read_annotations(&ctx.path(Some(&args.annotations), Path::new("")))?;
    let scope = match args.scope {
        Scope::Table => PercentScope::Table,
        Scope::WithinGroup => PercentScope::WithinGroup,
    };
    let (format, ext) = match args.format {
        Format::Csv => (ExportFormat::Csv, "csv"),
        Format::Json => (ExportFormat::Json, "json"),
    };

    let overall = category_counts(&annotations, &corpus, Grouping::Overall).map_err(module)?;
    let by_grade = category_counts(&annotations, &corpus, Grouping::ByGrade).map_err(module)?;
    let by_trimester = category_counts(&annotations, &corpus, Grouping::ByTrimester).map_err(module)?;
    let ratios: RatioTable = level_ratios(&by_grade, &corpus.group_registry).map_err(module)?;
    let pct_overall = percentages::<f64, _>(&overall, scope).map_err(module)?;
    let pct_grade = percentages(&ratios, scope).map_err(module)?;
    let pct_trimester = percentages::<f64, _>(&by_trimester, scope).map_err(module)?;

    let tables = [
        ("counts_overall", RenderedTable::from_counts(&overall)),
        ("counts_by_grade", RenderedTable::from_counts(&by_grade)),
        ("counts_by_trimester", RenderedTable::from_counts(&by_trimester)),
        ("ratios_by_grade", RenderedTable::from_ratios(&ratios)),
        ("percent_overall", RenderedTable::from_percents(&pct_overall)),
        ("percent_by_grade", RenderedTable::from_percents(&pct_grade)),
        ("percent_by_trimester", RenderedTable::from_percents(&pct_trimester)),
    ];
    let dir = ctx.path(args.out_dir.as_deref(), &cfg.paths.analysis_dir);
    let mut written = Vec::new();
    for (name, mut t) in tables {
        t.summary.insert("config_hash".into(), ctx.hash.clone());
        let mut bytes = Vec::new();
        export_table(&t, format, &mut bytes).expect("write to memory");
        let file = format!("{name}.{ext}");
        files::write_file(&dir.join(&file), &bytes)?;
        written.push(file);
    }
    let figures = figure_data(&annotations, &corpus).map_err(module)?;
    files::write_json(&dir.join("figures.json"), &json!({ "config_hash": ctx.hash, "figures": figures }))?;
    written.push("figures.json".into());

    let grade_ratios: BTreeMap<String, f64> = Grade::ALL
        .iter()
        .filter(|g| ratios.groups().contains_key(g))
        .map(|&g| (format!("G{g}"), ratios.grade_total(g)))
        .collect();
    let share = |k| 100.0 * by_trimester.group_total(k) as f64 / by_trimester.total().max(1) as f64;
    let trimester_shares: BTreeMap<String, f64> = by_trimester.keys().iter().map(|&k| (k.to_string(), share(k))).collect();

    let mut text = format!("{} messages\n", overall.total());
    let mut rows: Vec<Vec<String>> = by_grade
        .keys()
        .iter()
        .map(|&k| {
            let ratio = grade_ratios.get(&k.to_string()).copied().unwrap_or(0.0);
            vec![k.to_string(), by_grade.group_total(k).to_string(), format!("{ratio:.3}"), String::new()]
        })
        .collect();
    rows.extend(by_trimester.keys().iter().map(|&k| {
        vec![k.to_string(), by_trimester.group_total(k).to_string(), String::new(), format!("{:.2}", share(k))]
    }));
    text += &text_table(&["group", "messages", "per group", "% of total"], &rows);
    let out = args
        .out_dir
        .as_deref()
        .unwrap_or(&cfg.paths.analysis_dir)
        .display()
        .to_string();
    let _ = writeln!(text, "wrote {} files to {out}", written.len());
    Ok(Outcome {
        text,
        json: json!({
            "command": "analyze",
            "total": overall.total(),
            "grade_ratios": grade_ratios,
            "trimester_shares": trimester_shares,
            "files": written,
            "out": out,
        }),
    })
}
