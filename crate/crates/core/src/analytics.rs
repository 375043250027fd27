//! Descriptive tables over an adjudicated annotation set.
//!
//! Counts are exact integers. Because grades have different numbers of
//! participating groups, grade comparisons go through a per-group ratio
//! (`count / groups at that grade`) before percentages are taken. All
//! arithmetic stays at full precision; rounding happens only in
//! [`RenderedTable`].

use std::collections::{BTreeMap, HashMap};
use std::fmt;
use std::io::Write;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::codebook::{Category, MessageAnnotation, Span};
use crate::corpus::{Corpus, Grade, GroupRegistry, Trimester};
use crate::scalar::{render_fixed, Scalar};

#[derive(Debug, Error, PartialEq, Eq)]
pub enum AnalyticsError {
    #[error("annotations {first:?} and {second:?} cover the same span of {transcript:?}; adjudicate first")]
    UnresolvedDuplicates {
        transcript: String,
        first: String,
        second: String,
    },
    #[error("annotation {annotation:?} references unknown transcript {transcript:?}")]
    UnknownTranscript { annotation: String, transcript: String },
    #[error("group registry has no entry for grade {0}")]
    MissingRegistryEntry(Grade),
    #[error("group registry lists zero groups for grade {0}")]
    ZeroGroups(Grade),
    #[error("ratios need a table grouped by grade, got {0}")]
    WrongGrouping(Grouping),
    #[error("table total is zero")]
    ZeroTotal,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Grouping {
    Overall,
    ByGrade,
    ByTrimester,
}

impl fmt::Display for Grouping {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Grouping::Overall => "overall",
            Grouping::ByGrade => "by_grade",
            Grouping::ByTrimester => "by_trimester",
        })
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub enum GroupKey {
    All,
    Grade(Grade),
    Trimester(Trimester),
}

impl fmt::Display for GroupKey {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            GroupKey::All => f.write_str("all"),
            GroupKey::Grade(g) => write!(f, "G{g}"),
            GroupKey::Trimester(t) => write!(f, "T{t}"),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct CountTable {
    pub grouping: Grouping,
    keys: Vec<GroupKey>,
    cells: BTreeMap<(Category, GroupKey), u64>,
    total: u64,
}

impl CountTable {
    /// Builds a table from explicit cells. Every category × key cell not
    /// given is zero.
    pub fn from_cells(
        grouping: Grouping,
        keys: Vec<GroupKey>,
        given: impl IntoIterator<Item = ((Category, GroupKey), u64)>,
    ) -> Self {
        let mut cells: BTreeMap<(Category, GroupKey), u64> =
            Category::all().flat_map(|c| keys.iter().map(move |&k| ((c, k), 0))).collect();
        let mut keys = keys;
        for ((c, k), n) in given {
            if !keys.contains(&k) {
                keys.push(k);
                for cat in Category::all() {
                    cells.entry((cat, k)).or_insert(0);
                }
            }
            *cells.entry((c, k)).or_insert(0) += n;
        }
        keys.sort();
        let total = cells.values().sum();
        CountTable {
            grouping,
            keys,
            cells,
            total,
        }
    }

    pub fn keys(&self) -> &[GroupKey] {
        &self.keys
    }

    pub fn get(&self, category: Category, key: GroupKey) -> u64 {
        self.cells.get(&(category, key)).copied().unwrap_or(0)
    }

    pub fn total(&self) -> u64 {
        self.total
    }

    pub fn group_total(&self, key: GroupKey) -> u64 {
        Category::all().map(|c| self.get(c, key)).sum()
    }

    pub fn category_total(&self, category: Category) -> u64 {
        self.keys.iter().map(|&k| self.get(category, k)).sum()
    }
}

fn group_keys(grouping: Grouping, corpus: &Corpus) -> Vec<GroupKey> {
    match grouping {
        Grouping::Overall => vec![GroupKey::All],
        Grouping::ByGrade => corpus.group_registry.keys().map(|&g| GroupKey::Grade(g)).collect(),
        Grouping::ByTrimester => Trimester::ALL.into_iter().map(GroupKey::Trimester).collect(),
    }
}

/// Counts message annotations per category and group. Not-a-message
/// decisions are skipped. Two annotations on the same transcript span from
/// different coders mean the set was not adjudicated and are rejected.
pub fn category_counts(
    annotations: &[MessageAnnotation],
    corpus: &Corpus,
    grouping: Grouping,
) -> Result<CountTable, AnalyticsError> {
    let transcripts: HashMap<&str, (Grade, Trimester)> = corpus
        .transcripts
        .iter()
        .map(|t| (t.id.as_str(), (t.grade, t.trimester)))
        .collect();
    let mut seen: HashMap<(&str, Span), &MessageAnnotation> = HashMap::new();
    let mut given = Vec::new();
    for a in annotations {
        let Some(category) = a.decision.category() else { continue };
        let &(grade, trimester) =
            transcripts
                .get(a.transcript_id.as_str())
                .ok_or_else(|| AnalyticsError::UnknownTranscript {
                    annotation: a.id.clone(),
                    transcript: a.transcript_id.clone(),
                })?;
        if let Some(prev) = seen.insert((a.transcript_id.as_str(), a.span), a) {
            if prev.coder_id != a.coder_id {
                return Err(AnalyticsError::UnresolvedDuplicates {
                    transcript: a.transcript_id.clone(),
                    first: prev.id.clone(),
                    second: a.id.clone(),
                });
            }
        }
        let key = match grouping {
            Grouping::Overall => GroupKey::All,
            Grouping::ByGrade => GroupKey::Grade(grade),
            Grouping::ByTrimester => GroupKey::Trimester(trimester),
        };
        given.push(((category, key), 1));
    }
    Ok(CountTable::from_cells(grouping, group_keys(grouping, corpus), given))
}

#[derive(Debug, Clone, PartialEq)]
pub struct RatioTable<S = f64> {
    keys: Vec<GroupKey>,
    cells: BTreeMap<(Category, GroupKey), S>,
    groups: BTreeMap<Grade, u32>,
}

impl<S: Scalar> RatioTable<S> {
    pub fn get(&self, category: Category, grade: Grade) -> S {
        self.cells
            .get(&(category, GroupKey::Grade(grade)))
            .cloned()
            .unwrap_or_else(S::zero)
    }

    pub fn keys(&self) -> &[GroupKey] {
        &self.keys
    }

    /// All messages at `grade` divided by its group count.
    pub fn grade_total(&self, grade: Grade) -> S {
        Category::all().fold(S::zero(), |acc, c| acc + self.get(c, grade))
    }

    pub fn groups(&self) -> &BTreeMap<Grade, u32> {
        &self.groups
    }
}

/// Divides every by-grade count by the number of groups at that grade.
pub fn level_ratios<S: Scalar>(counts: &CountTable, registry: &GroupRegistry) -> Result<RatioTable<S>, AnalyticsError> {
    if counts.grouping != Grouping::ByGrade {
        return Err(AnalyticsError::WrongGrouping(counts.grouping));
    }
    let mut cells = BTreeMap::new();
    let mut groups = BTreeMap::new();
    for &key in counts.keys() {
        let GroupKey::Grade(grade) = key else {
            return Err(AnalyticsError::WrongGrouping(counts.grouping));
        };
        let n = *registry.get(&grade).ok_or(AnalyticsError::MissingRegistryEntry(grade))?;
        if n == 0 {
            return Err(AnalyticsError::ZeroGroups(grade));
        }
        groups.insert(grade, n);
        for c in Category::all() {
            cells.insert((c, key), S::ratio(counts.get(c, key), n as u64));
        }
    }
    Ok(RatioTable {
        keys: counts.keys().to_vec(),
        cells,
        groups,
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Basis {
    Counts,
    Ratios,
}

/// What a percentage is taken of.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum PercentScope {
    /// Each cell over the sum of the whole table (all categories, all groups).
    #[default]
    Table,
    /// Each cell over the sum of its own group.
    WithinGroup,
}

/// A category × group table that percentages can be taken over.
pub trait PercentSource<S: Scalar> {
    fn basis(&self) -> Basis;
    fn grouping(&self) -> Grouping;
    fn group_keys(&self) -> Vec<GroupKey>;
    fn value(&self, category: Category, key: GroupKey) -> S;
}

impl<S: Scalar> PercentSource<S> for CountTable {
    fn basis(&self) -> Basis {
        Basis::Counts
    }
    fn grouping(&self) -> Grouping {
        self.grouping
    }
    fn group_keys(&self) -> Vec<GroupKey> {
        self.keys.clone()
    }
    fn value(&self, category: Category, key: GroupKey) -> S {
        S::from_count(self.get(category, key))
    }
}

impl<S: Scalar> PercentSource<S> for RatioTable<S> {
    fn basis(&self) -> Basis {
        Basis::Ratios
    }
    fn grouping(&self) -> Grouping {
        Grouping::ByGrade
    }
    fn group_keys(&self) -> Vec<GroupKey> {
        self.keys.clone()
    }
    fn value(&self, category: Category, key: GroupKey) -> S {
        self.cells.get(&(category, key)).cloned().unwrap_or_else(S::zero)
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct PercentTable<S = f64> {
    pub basis: Basis,
    pub scope: PercentScope,
    pub grouping: Grouping,
    keys: Vec<GroupKey>,
    cells: BTreeMap<(Category, GroupKey), S>,
    /// Each group's share of the table total.
    pub group_shares: BTreeMap<GroupKey, S>,
    /// Groups left out of a within-group table because their total is zero.
    pub empty_groups: Vec<GroupKey>,
}

impl<S: Scalar> PercentTable<S> {
    pub fn get(&self, category: Category, key: GroupKey) -> Option<S> {
        self.cells.get(&(category, key)).cloned()
    }

    pub fn keys(&self) -> &[GroupKey] {
        &self.keys
    }

    /// Sum of the cells belonging to `key`.
    pub fn group_sum(&self, key: GroupKey) -> S {
        Category::all()
            .filter_map(|c| self.get(c, key))
            .fold(S::zero(), |a, b| a + b)
    }

    pub fn table_sum(&self) -> S {
        self.cells.values().cloned().fold(S::zero(), |a, b| a + b)
    }
}

pub fn percentages<S: Scalar, T: PercentSource<S>>(table: &T, scope: PercentScope) -> Result<PercentTable<S>, AnalyticsError> {
    let hundred = S::from_count(100);
    let keys = table.group_keys();
    let group_sums: Vec<(GroupKey, S)> = keys
        .iter()
        .map(|&k| (k, Category::all().fold(S::zero(), |acc, c| acc + table.value(c, k))))
        .collect();
    let grand = group_sums.iter().fold(S::zero(), |acc, (_, s)| acc + s.clone());
    if grand.is_zero() {
        return Err(AnalyticsError::ZeroTotal);
    }
    let group_shares = group_sums
        .iter()
        .map(|(k, s)| (*k, s.clone() / grand.clone() * hundred.clone()))
        .collect();
    let mut cells = BTreeMap::new();
    let mut kept = Vec::new();
    let mut empty_groups = Vec::new();
    for (k, sum) in &group_sums {
        let denominator = match scope {
            PercentScope::Table => grand.clone(),
            PercentScope::WithinGroup if sum.is_zero() => {
                empty_groups.push(*k);
                continue;
            }
            PercentScope::WithinGroup => sum.clone(),
        };
        kept.push(*k);
        for c in Category::all() {
            cells.insert((c, *k), table.value(c, *k) / denominator.clone() * hundred.clone());
        }
    }
    Ok(PercentTable {
        basis: table.basis(),
        scope,
        grouping: table.grouping(),
        keys: kept,
        cells,
        group_shares,
        empty_groups,
    })
}

/// A table flattened to strings: one row per category in codebook order,
/// one column per group key in ascending order, plus summary pairs.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct RenderedTable {
    pub kind: String,
    pub grouping: Grouping,
    pub columns: Vec<String>,
    pub rows: Vec<RenderedRow>,
    pub summary: BTreeMap<String, String>,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct RenderedRow {
    pub category: String,
    pub values: Vec<String>,
}

fn render_rows(keys: &[GroupKey], mut value: impl FnMut(Category, GroupKey) -> String) -> Vec<RenderedRow> {
    Category::all()
        .map(|c| RenderedRow {
            category: c.to_string(),
            values: keys.iter().map(|&k| value(c, k)).collect(),
        })
        .collect()
}

impl RenderedTable {
    pub fn from_counts(t: &CountTable) -> Self {
        let mut summary: BTreeMap<String, String> = t
            .keys()
            .iter()
            .map(|k| (format!("total_{k}"), t.group_total(*k).to_string()))
            .collect();
        summary.insert("total".into(), t.total().to_string());
        RenderedTable {
            kind: "counts".into(),
            grouping: t.grouping,
            columns: t.keys().iter().map(ToString::to_string).collect(),
            rows: render_rows(t.keys(), |c, k| t.get(c, k).to_string()),
            summary,
        }
    }

    pub fn from_ratios<S: Scalar>(t: &RatioTable<S>) -> Self {
        let summary = t
            .groups()
            .iter()
            .flat_map(|(&g, &n)| {
                [
                    (format!("groups_G{g}"), n.to_string()),
                    (format!("ratio_total_G{g}"), render_fixed(&t.grade_total(g), 4)),
                ]
            })
            .collect();
        RenderedTable {
            kind: "ratios".into(),
            grouping: Grouping::ByGrade,
            columns: t.keys().iter().map(ToString::to_string).collect(),
            rows: render_rows(t.keys(), |c, k| {
                render_fixed(&t.cells.get(&(c, k)).cloned().unwrap_or_else(S::zero), 4)
            }),
            summary,
        }
    }

    pub fn from_percents<S: Scalar>(t: &PercentTable<S>) -> Self {
        let mut summary: BTreeMap<String, String> = t
            .group_shares
            .iter()
            .map(|(k, s)| (format!("share_{k}"), render_fixed(s, 2)))
            .collect();
        for k in &t.empty_groups {
            summary.insert(format!("empty_{k}"), "true".into());
        }
        let scope = match t.scope {
            PercentScope::Table => "table",
            PercentScope::WithinGroup => "within_group",
        };
        let basis = match t.basis {
            Basis::Counts => "counts",
            Basis::Ratios => "ratios",
        };
        RenderedTable {
            kind: format!("percent_{basis}_{scope}"),
            grouping: t.grouping,
            columns: t.keys().iter().map(ToString::to_string).collect(),
            rows: render_rows(t.keys(), |c, k| {
                t.get(c, k).map(|v| render_fixed(&v, 2)).unwrap_or_default()
            }),
            summary,
        }
    }

    /// CSV with a `category` column followed by one column per group key.
    /// Summary pairs follow as `# key: value` comment lines.
    pub fn write_csv<W: Write>(&self, mut out: W) -> std::io::Result<()> {
        writeln!(out, "category,{}", self.columns.join(","))?;
        for r in &self.rows {
            writeln!(out, "{},{}", r.category, r.values.join(","))?;
        }
        for (k, v) in &self.summary {
            writeln!(out, "# {k}: {v}")?;
        }
        Ok(())
    }

    pub fn write_json<W: Write>(&self, mut out: W) -> std::io::Result<()> {
        serde_json::to_writer_pretty(&mut out, self).map_err(std::io::Error::other)?;
        out.write_all(b"\n")
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ExportFormat {
    Csv,
    Json,
}

pub fn export_table<W: Write>(table: &RenderedTable, format: ExportFormat, out: W) -> std::io::Result<()> {
    match format {
        ExportFormat::Csv => table.write_csv(out),
        ExportFormat::Json => table.write_json(out),
    }
}

/// One plotted series: a category's percentage in each group.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FigureSeries {
    pub category: String,
    pub label: String,
    pub values: Vec<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FigureData {
    pub name: String,
    pub groups: Vec<String>,
    pub series: Vec<FigureSeries>,
}

impl FigureData {
    pub fn from_percents<S: Scalar>(name: &str, t: &PercentTable<S>) -> Self {
        FigureData {
            name: name.into(),
            groups: t.keys().iter().map(ToString::to_string).collect(),
            series: Category::all()
                .map(|c| FigureSeries {
                    category: c.to_string(),
                    label: c.short_label(),
                    values: t
                        .keys()
                        .iter()
                        .map(|&k| t.get(c, k).map(|v| v.to_f64_lossy()).unwrap_or(0.0))
                        .collect(),
                })
                .collect(),
        }
    }
}

/// Series for the three standard figures: overall category shares, ratio
/// based shares across grades, and shares across trimesters. Each takes
/// percentages of the whole table.
pub fn figure_data(annotations: &[MessageAnnotation], corpus: &Corpus) -> Result<Vec<FigureData>, AnalyticsError> {
    let overall = category_counts(annotations, corpus, Grouping::Overall)?;
    let by_grade = category_counts(annotations, corpus, Grouping::ByGrade)?;
    let by_trimester = category_counts(annotations, corpus, Grouping::ByTrimester)?;
    let ratios: RatioTable<f64> = level_ratios(&by_grade, &corpus.group_registry)?;
    Ok(vec![
        FigureData::from_percents("overall", &percentages::<f64, _>(&overall, PercentScope::Table)?),
        FigureData::from_percents("by_grade", &percentages(&ratios, PercentScope::Table)?),
        FigureData::from_percents("by_trimester", &percentages::<f64, _>(&by_trimester, PercentScope::Table)?),
    ])
}
