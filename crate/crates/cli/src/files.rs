//! Reading and writing the files the pipeline passes between steps.

use std::fs;
use std::io::{BufReader, Write};
use std::path::{Path, PathBuf};

use engage_core::codebook::{read_annotations_csv, write_annotations_csv};
use engage_core::keyness::KeywordList;
use engage_core::reliability::AnnotationSet;
use engage_core::{Corpus, MessageAnnotation, NormalizationConfig};
use serde::{Deserialize, Serialize};

use crate::error::CliError;

/// Normalized corpus as written by `ingest`. Token counts depend on the
/// normalization, so it travels with the corpus.
#[derive(Debug, Serialize, Deserialize)]
pub struct CorpusDocument {
    pub config_hash: String,
    pub normalization: NormalizationConfig,
    pub corpus: Corpus,
}

pub fn write_file(path: &Path, bytes: &[u8]) -> Result<(), CliError> {
    if let Some(parent) = path.parent().filter(|p| !p.as_os_str().is_empty()) {
        fs::create_dir_all(parent).map_err(|e| CliError::io(parent, e))?;
    }
    fs::write(path, bytes).map_err(|e| CliError::io(path, e))
}

pub fn write_json<T: Serialize>(path: &Path, value: &T) -> Result<(), CliError> {
    let mut bytes = serde_json::to_vec_pretty(value).expect("outputs serialize to JSON");
    bytes.push(b'\n');
    write_file(path, &bytes)
}

fn open(path: &Path) -> Result<BufReader<fs::File>, CliError> {
    fs::File::open(path).map(BufReader::new).map_err(|e| CliError::io(path, e))
}

pub fn read_json<T: for<'de> Deserialize<'de>>(path: &Path, module: &'static str) -> Result<T, CliError> {
    serde_json::from_reader(open(path)?).map_err(|e| CliError::module(module, format!("{}: {e}", path.display())))
}

pub fn read_corpus(path: &Path, normalization: &NormalizationConfig) -> Result<Corpus, CliError> {
    let doc: CorpusDocument = read_json(path, "corpus")?;
    if &doc.normalization != normalization {
        return Err(CliError::module(
            "corpus",
            format!(
                "{} was ingested with a different normalization; run ingest again",
                path.display()
            ),
        ));
    }
    doc.corpus.validate().map_err(|e| CliError::module("corpus", e))?;
    Ok(doc.corpus)
}

/// Annotation sets come as CSV exports or as JSON, either a bare array or an
/// object with `corpus_id` and `annotations`.
pub fn read_annotation_set(path: &Path, default_corpus: &str) -> Result<AnnotationSet, CliError> {
    let is_json = path.extension().is_some_and(|e| e.eq_ignore_ascii_case("json"));
    if !is_json {
        let annotations = read_annotations_csv(open(path)?)
            .map_err(|e| CliError::module("codebook", format!("{}: {e}", path.display())))?;
        return Ok(AnnotationSet {
            corpus_id: default_corpus.to_owned(),
            annotations,
        });
    }
    #[derive(Deserialize)]
    #[serde(untagged)]
    enum Shape {
        Set(AnnotationSet),
        Bare(Vec<MessageAnnotation>),
    }
    Ok(match read_json(path, "codebook")? {
        Shape::Set(s) => s,
        Shape::Bare(annotations) => AnnotationSet {
            corpus_id: default_corpus.to_owned(),
            annotations,
        },
    })
}

pub fn read_annotations(path: &Path) -> Result<Vec<MessageAnnotation>, CliError> {
    Ok(read_annotation_set(path, "")?.annotations)
}

/// Annotation CSV preceded by a `# config_hash:` comment line.
pub fn write_annotations(path: &Path, annotations: &[MessageAnnotation], hash: &str) -> Result<(), CliError> {
    let mut out = format!("# config_hash: {hash}\n").into_bytes();
    write_annotations_csv(annotations, &mut out).map_err(|e| CliError::module("codebook", e))?;
    write_file(path, &out)
}

const LIST_NAME_PREFIX: &str = "# list: ";

/// A keyword list file. The name comes from a `# list:` header line when
/// present, otherwise from the file stem.
pub fn read_keyword_list(path: &Path, config: &NormalizationConfig) -> Result<KeywordList, CliError> {
    let text = fs::read_to_string(path).map_err(|e| CliError::io(path, e))?;
    let name = text
        .lines()
        .find_map(|l| l.strip_prefix(LIST_NAME_PREFIX))
        .map(|n| n.trim().to_owned())
        .unwrap_or_else(|| path.file_stem().map(|s| s.to_string_lossy().into_owned()).unwrap_or_default());
    KeywordList::read(name, text.as_bytes(), config)
        .map_err(|e| CliError::module("keyness", format!("{}: {e}", path.display())))
}

pub fn write_keyword_list(path: &Path, list: &KeywordList, hash: &str) -> Result<(), CliError> {
    let mut out = Vec::new();
    list.write(&mut out, &[format!("list: {}", list.name), format!("config_hash: {hash}")])
        .map_err(|e| CliError::io(path, e))?;
    write_file(path, &out)
}

/// `*.txt` files directly inside `dir`, sorted by name.
pub fn list_files(dir: &Path) -> Result<Vec<PathBuf>, CliError> {
    let mut files: Vec<PathBuf> = fs::read_dir(dir)
        .map_err(|e| CliError::io(dir, e))?
        .filter_map(|e| e.ok().map(|e| e.path()))
        .filter(|p| p.is_file() && p.extension().is_some_and(|e| e == "txt"))
        .collect();
    files.sort();
    Ok(files)
}

pub fn write_lines(path: &Path, header: &[String], lines: impl IntoIterator<Item = String>) -> Result<(), CliError> {
    let mut out = Vec::new();
    for h in header {
        writeln!(out, "# {h}").expect("write to memory");
    }
    for l in lines {
        writeln!(out, "{l}").expect("write to memory");
    }
    write_file(path, &out)
}
