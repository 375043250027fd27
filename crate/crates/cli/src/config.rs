//! Pipeline configuration: one TOML document, overridable by flags.
//!
//! The hash that stamps outputs covers every setting that can change a
//! result. Paths are left out so that the same run written to two places
//! produces the same bytes.

use std::path::{Path, PathBuf};

use engage_core::keyness::{default_size_grid, DEFAULT_ALPHA};
use engage_core::normalize::NormalizationConfig;
use engage_core::provenance::config_hash;
use engage_core::selection::SelectionPolicy;
use engage_core::synth::SynthesisParams;
use engage_core::corpus::DEFAULT_WORDS_PER_PAGE;
use serde::{Deserialize, Serialize};

use crate::error::CliError;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct PipelineConfig {
    pub alpha: f64,
    pub size_grid: Vec<usize>,
    pub window: usize,
    pub words_per_page: u64,
    pub normalization: NormalizationConfig,
    pub selection: SelectionPolicy,
    pub synth: SynthesisParams,
    pub paths: Paths,
}

impl Default for PipelineConfig {
    fn default() -> Self {
        PipelineConfig {
            alpha: DEFAULT_ALPHA,
            size_grid: default_size_grid(),
            window: 0,
            words_per_page: DEFAULT_WORDS_PER_PAGE,
            normalization: NormalizationConfig::default(),
            selection: SelectionPolicy::default(),
            synth: SynthesisParams::default(),
            paths: Paths::default(),
        }
    }
}

/// Default locations, relative to the data directory.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct Paths {
    pub corpus: PathBuf,
    pub gold: PathBuf,
    pub keywords_dir: PathBuf,
    pub selected: PathBuf,
    pub filtered: PathBuf,
    pub evaluation: PathBuf,
    pub analysis_dir: PathBuf,
    pub synth_dir: PathBuf,
    pub store_dir: PathBuf,
}

impl Default for Paths {
    fn default() -> Self {
        Paths {
            corpus: "corpus.json".into(),
            gold: "gold.csv".into(),
            keywords_dir: "keywords".into(),
            selected: "selected.txt".into(),
            filtered: "filtered.json".into(),
            evaluation: "evaluation.csv".into(),
            analysis_dir: "analysis".into(),
            synth_dir: "synth".into(),
            store_dir: "store".into(),
        }
    }
}

#[derive(Serialize)]
struct Hashed<'a> {
    alpha: f64,
    size_grid: &'a [usize],
    window: usize,
    words_per_page: u64,
    normalization: &'a NormalizationConfig,
    selection: &'a SelectionPolicy,
    synth: &'a SynthesisParams,
}

impl PipelineConfig {
    pub fn load(path: &Path) -> Result<Self, CliError> {
        let text = std::fs::read_to_string(path).map_err(|e| CliError::io(path, e))?;
        toml::from_str(&text).map_err(|e| CliError::Usage(format!("{}: {e}", path.display())))
    }

    pub fn validate(&self) -> Result<(), CliError> {
        let bad = |m: String| Err(CliError::Usage(format!("invalid configuration: {m}")));
        if !(self.alpha > 0.0 && self.alpha.is_finite()) {
            return bad(format!("alpha must be positive, got {}", self.alpha));
        }
        if self.size_grid.is_empty() || self.size_grid.contains(&0) {
            return bad("size_grid needs at least one positive size".into());
        }
        if self.words_per_page == 0 {
            return bad("words_per_page must be positive".into());
        }
        self.normalization.validate().or_else(|e| bad(e.to_string()))?;
        self.selection.validate().or_else(|e| bad(e.to_string()))?;
        self.synth.validate().or_else(|e| bad(e.to_string()))
    }

    pub fn hash(&self) -> String {
        config_hash(&Hashed {
            alpha: self.alpha,
            size_grid: &self.size_grid,
            window: self.window,
            words_per_page: self.words_per_page,
            normalization: &self.normalization,
            selection: &self.selection,
            synth: &self.synth,
        })
    }

    pub fn to_toml(&self) -> String {
        toml::to_string(self).expect("configuration serializes to TOML")
    }
}
