//! Sensitivity lexicon and the fixed-order syntactic risk signals.

use std::collections::{BTreeMap, BTreeSet};
use std::fmt;
use std::path::Path;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::embed::EmbeddingVector;
use crate::error::{Error, Result};
use crate::sql::QuerySummary;

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "SCREAMING_SNAKE_CASE")]
pub enum Category {
    Dob,
    Gender,
    Zip,
    Diagnosis,
    Role,
    Name,
    NationalId,
}

impl Category {
    /// Canonical order; also the order of the per-category feature flags.
    pub const ALL: [Category; 7] = [
        Category::Dob,
        Category::Gender,
        Category::Zip,
        Category::Diagnosis,
        Category::Role,
        Category::Name,
        Category::NationalId,
    ];

    pub fn as_str(self) -> &'static str {
        match self {
            Category::Dob => "DOB",
            Category::Gender => "GENDER",
            Category::Zip => "ZIP",
            Category::Diagnosis => "DIAGNOSIS",
            Category::Role => "ROLE",
            Category::Name => "NAME",
            Category::NationalId => "NATIONAL_ID",
        }
    }

    pub fn index(self) -> usize {
        self as usize
    }

    fn default_synonyms(self) -> &'static [&'static str] {
        match self {
            Category::Dob => &["dob", "date_of_birth", "birthdate", "birth_date"],
            Category::Gender => &["gender", "sex"],
            Category::Zip => &["zip", "zipcode", "zip_code", "postal_code", "postcode"],
            Category::Diagnosis => &["diagnosis_code", "icd_code", "diagnosis", "icd10_code"],
            Category::Role => &["role", "job_title"],
            Category::Name => &["name", "first_name", "last_name", "full_name"],
            Category::NationalId => &["ssn", "national_id", "social_security_number"],
        }
    }
}

impl fmt::Display for Category {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for Category {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, String> {
        let upper = s.trim().to_ascii_uppercase();
        Category::ALL
            .into_iter()
            .find(|c| c.as_str() == upper)
            .ok_or_else(|| format!("unknown category `{}`", s.trim()))
    }
}

/// Category -> column-name synonyms. Immutable once built; synonym sets are
/// pairwise disjoint.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct SensitiveLexicon {
    synonyms: BTreeMap<Category, BTreeSet<String>>,
}

impl Default for SensitiveLexicon {
    fn default() -> Self {
        let synonyms = Category::ALL
            .into_iter()
            .map(|c| (c, c.default_synonyms().iter().map(|s| s.to_string()).collect()))
            .collect();
        SensitiveLexicon { synonyms }
    }
}

impl SensitiveLexicon {
    /// A lexicon that matches nothing.
    pub fn empty() -> Self {
        SensitiveLexicon { synonyms: Category::ALL.into_iter().map(|c| (c, BTreeSet::new())).collect() }
    }

    pub fn synonyms(&self, category: Category) -> &BTreeSet<String> {
        &self.synonyms[&category]
    }

    /// Replace one category's synonym set, checking disjointness.
    pub fn with_category<I, S>(mut self, category: Category, names: I) -> Result<Self>
    where
        I: IntoIterator<Item = S>,
        S: AsRef<str>,
    {
        let set = names.into_iter().map(|n| n.as_ref().trim().to_lowercase()).collect();
        self.synonyms.insert(category, set);
        self.check_disjoint(0)?;
        Ok(self)
    }

    /// Parse `CATEGORY = a, b, c` lines; categories absent from the text keep
    /// their defaults.
    pub fn parse(text: &str) -> Result<Self> {
        let mut lexicon = SensitiveLexicon::default();
        let mut seen = BTreeSet::new();
        let mut last_line = 0;
        for (idx, raw) in text.lines().enumerate() {
            let line_no = idx + 1;
            last_line = line_no;
            let line = raw.split('#').next().unwrap_or("").trim();
            if line.is_empty() {
                continue;
            }
            let err = |message: String| Error::Lexicon { line: line_no, message };
            let (key, values) =
                line.split_once('=').ok_or_else(|| err("expected `CATEGORY = name, ...`".into()))?;
            let category: Category = key.parse().map_err(err)?;
            if !seen.insert(category) {
                return Err(err(format!("category {category} listed twice")));
            }
            let mut set = BTreeSet::new();
            for name in values.split(',').map(str::trim).filter(|n| !n.is_empty()) {
                let name = name.to_lowercase();
                if !name.chars().all(|c| c.is_ascii_alphanumeric() || c == '_') {
                    return Err(err(format!("`{name}` is not a column identifier")));
                }
                set.insert(name);
            }
            lexicon.synonyms.insert(category, set);
        }
        lexicon.check_disjoint(last_line)?;
        Ok(lexicon)
    }

    pub fn load(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
        Self::parse(&text)
    }

    fn check_disjoint(&self, line: usize) -> Result<()> {
        let mut owner: BTreeMap<&str, Category> = BTreeMap::new();
        for (&category, names) in &self.synonyms {
            for name in names {
                if let Some(prev) = owner.insert(name, category) {
                    return Err(Error::Lexicon {
                        line,
                        message: format!("`{name}` assigned to both {prev} and {category}"),
                    });
                }
            }
        }
        Ok(())
    }

    /// Exact-match lookup of a lowercase column name.
    pub fn classify_column(&self, column_name: &str) -> Option<Category> {
        self.synonyms.iter().find(|(_, names)| names.contains(column_name)).map(|(&c, _)| c)
    }
}

/// Free-function form of [`SensitiveLexicon::classify_column`].
pub fn classify_column(column_name: &str, lexicon: &SensitiveLexicon) -> Option<Category> {
    lexicon.classify_column(column_name)
}

pub const FEATURE_COUNT: usize = 17;

/// Slot names in vector order.
pub const FEATURE_NAMES: [&str; FEATURE_COUNT] = [
    "group_by_count",
    "join_count",
    "table_count",
    "select_column_count",
    "subquery_depth",
    "cte_count",
    "window_fn_count",
    "has_aggregate",
    "sensitive_groupby_count",
    "sensitive_select_count",
    "groupby_dob",
    "groupby_gender",
    "groupby_zip",
    "groupby_diagnosis",
    "groupby_role",
    "groupby_name",
    "groupby_national_id",
];

pub const GROUP_BY_COUNT: usize = 0;
pub const JOIN_COUNT: usize = 1;
pub const TABLE_COUNT: usize = 2;
pub const SELECT_COLUMN_COUNT: usize = 3;
pub const SUBQUERY_DEPTH: usize = 4;
pub const CTE_COUNT: usize = 5;
pub const WINDOW_FN_COUNT: usize = 6;
pub const HAS_AGGREGATE: usize = 7;
pub const SENSITIVE_GROUPBY_COUNT: usize = 8;
pub const SENSITIVE_SELECT_COUNT: usize = 9;
pub const FIRST_CATEGORY_FLAG: usize = 10;

#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub struct SyntacticFeatures(pub [f64; FEATURE_COUNT]);

impl SyntacticFeatures {
    pub fn get(&self, slot: usize) -> f64 {
        self.0[slot]
    }

    pub fn category_flag(&self, category: Category) -> bool {
        self.0[FIRST_CATEGORY_FLAG + category.index()] > 0.0
    }

    pub fn group_by_count(&self) -> usize {
        self.0[GROUP_BY_COUNT] as usize
    }

    pub fn join_count(&self) -> usize {
        self.0[JOIN_COUNT] as usize
    }

    pub fn sensitive_groupby_count(&self) -> usize {
        self.0[SENSITIVE_GROUPBY_COUNT] as usize
    }

    pub fn named(&self) -> impl Iterator<Item = (&'static str, f64)> + '_ {
        FEATURE_NAMES.iter().copied().zip(self.0.iter().copied())
    }
}

pub fn extract_features(summary: &QuerySummary, lexicon: &SensitiveLexicon) -> SyntacticFeatures {
    let mut f = [0.0; FEATURE_COUNT];
    f[GROUP_BY_COUNT] = summary.group_by_columns.len() as f64;
    f[JOIN_COUNT] = summary.join_count as f64;
    f[TABLE_COUNT] = summary.tables.len() as f64;
    f[SELECT_COLUMN_COUNT] = summary.select_columns.len() as f64;
    f[SUBQUERY_DEPTH] = summary.subquery_depth as f64;
    f[CTE_COUNT] = summary.cte_count as f64;
    f[WINDOW_FN_COUNT] = summary.window_fn_count as f64;
    f[HAS_AGGREGATE] = if summary.aggregate_functions.is_empty() { 0.0 } else { 1.0 };

    let grouped: BTreeSet<Category> =
        summary.group_by_columns.iter().filter_map(|c| lexicon.classify_column(c)).collect();
    let selected: BTreeSet<Category> = summary
        .select_columns
        .iter()
        .chain(&summary.where_columns)
        .filter_map(|c| lexicon.classify_column(c))
        .collect();

    f[SENSITIVE_GROUPBY_COUNT] = grouped.len() as f64;
    f[SENSITIVE_SELECT_COUNT] = selected.len() as f64;
    for category in grouped {
        f[FIRST_CATEGORY_FLAG + category.index()] = 1.0;
    }
    SyntacticFeatures(f)
}

/// Classifier input: embedding slots followed by the 17 syntactic slots.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FusedVector(pub Vec<f64>);

impl FusedVector {
    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    pub fn as_slice(&self) -> &[f64] {
        &self.0
    }
}

/// Concatenate without scaling. `expected_dim` is the embedding width the
/// model was trained with.
pub fn fuse(
    embedding: &EmbeddingVector,
    features: &SyntacticFeatures,
    expected_dim: usize,
) -> Result<FusedVector> {
    if embedding.values.len() != expected_dim {
        return Err(Error::DimensionMismatch { expected: expected_dim, found: embedding.values.len() });
    }
    let mut values = Vec::with_capacity(expected_dim + FEATURE_COUNT);
    values.extend_from_slice(&embedding.values);
    values.extend_from_slice(&features.0);
    Ok(FusedVector(values))
}
