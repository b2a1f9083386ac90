//! Template-based explanations read off the query structure.
//!
//! Rules look only at the summary and its syntactic features, never at the
//! classifier score. Codes are stable; report consumers may key on them.

use std::fmt;

use serde::{Deserialize, Serialize};

use crate::features::{Category, SensitiveLexicon, SyntacticFeatures};
use crate::sql::QuerySummary;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum RuleCode {
    #[serde(rename = "R_ZIP")]
    Zip,
    #[serde(rename = "R_DOB")]
    Dob,
    #[serde(rename = "R_HEALTH_COMBO")]
    HealthCombo,
    #[serde(rename = "R_SMALL_GROUPS")]
    SmallGroups,
    #[serde(rename = "R_SENSITIVE_JOIN")]
    SensitiveJoin,
    #[serde(rename = "R_OK_NOTE")]
    OkNote,
    /// Emitted only when a query is blocked and no template matched.
    #[serde(rename = "R_MODEL_FLAG")]
    ModelFlag,
}

impl RuleCode {
    /// Evaluation order of the rule table.
    pub const TABLE: [RuleCode; 6] = [
        RuleCode::Zip,
        RuleCode::Dob,
        RuleCode::HealthCombo,
        RuleCode::SmallGroups,
        RuleCode::SensitiveJoin,
        RuleCode::OkNote,
    ];

    pub fn as_str(self) -> &'static str {
        match self {
            RuleCode::Zip => "R_ZIP",
            RuleCode::Dob => "R_DOB",
            RuleCode::HealthCombo => "R_HEALTH_COMBO",
            RuleCode::SmallGroups => "R_SMALL_GROUPS",
            RuleCode::SensitiveJoin => "R_SENSITIVE_JOIN",
            RuleCode::OkNote => "R_OK_NOTE",
            RuleCode::ModelFlag => "R_MODEL_FLAG",
        }
    }

    pub fn template(self) -> &'static str {
        match self {
            RuleCode::Zip => {
                "ZIP code is a quasi-identifier and may expose individual locations if group size is small."
            }
            RuleCode::Dob => "Date of birth in grouping can uniquely identify individuals.",
            RuleCode::HealthCombo => {
                "Grouping by gender and medical code may leak health-related sensitive segments."
            }
            RuleCode::SmallGroups => {
                "Metric groups by multiple attributes including sensitive fields; group sizes could be too small."
            }
            RuleCode::SensitiveJoin => {
                "Sensitive grouping combined with multiple joins increases linkage risk."
            }
            RuleCode::OkNote => {
                "While a sensitive attribute is grouped, group sizes are likely sufficient to prevent leakage."
            }
            RuleCode::ModelFlag => {
                "Risk model flagged this query; no specific template rule matched — review grouping granularity."
            }
        }
    }
}

impl fmt::Display for RuleCode {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct RiskReason {
    pub code: RuleCode,
    pub message: String,
    pub columns: Vec<String>,
    pub category: Option<Category>,
}

impl RiskReason {
    fn new(code: RuleCode, columns: Vec<String>, category: Option<Category>) -> Self {
        RiskReason { code, message: code.template().to_string(), columns, category }
    }

    pub fn fallback() -> Self {
        RiskReason::new(RuleCode::ModelFlag, Vec::new(), None)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "SCREAMING_SNAKE_CASE")]
pub enum Status {
    Approved,
    Blocked,
}

impl fmt::Display for Status {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Status::Approved => "APPROVED",
            Status::Blocked => "BLOCKED",
        })
    }
}

/// Evaluate the rule table in order. `lexicon` is the one the features
/// were extracted with; it names the implicated columns.
pub fn match_rules(
    summary: &QuerySummary,
    features: &SyntacticFeatures,
    lexicon: &SensitiveLexicon,
) -> Vec<RiskReason> {
    let grouped_in = |cats: &[Category]| -> Vec<String> {
        summary
            .group_by_columns
            .iter()
            .filter(|c| lexicon.classify_column(c).is_some_and(|k| cats.contains(&k)))
            .cloned()
            .collect()
    };
    let sensitive_grouped = || grouped_in(&Category::ALL);

    let sensitive = features.sensitive_groupby_count();
    let mut reasons = Vec::new();
    for code in RuleCode::TABLE {
        let reason = match code {
            RuleCode::Zip if features.category_flag(Category::Zip) => {
                Some(RiskReason::new(code, grouped_in(&[Category::Zip]), Some(Category::Zip)))
            }
            RuleCode::Dob if features.category_flag(Category::Dob) => {
                Some(RiskReason::new(code, grouped_in(&[Category::Dob]), Some(Category::Dob)))
            }
            RuleCode::HealthCombo
                if features.category_flag(Category::Gender)
                    && features.category_flag(Category::Diagnosis) =>
            {
                Some(RiskReason::new(code, grouped_in(&[Category::Gender, Category::Diagnosis]), None))
            }
            RuleCode::SmallGroups if features.group_by_count() >= 3 && sensitive >= 1 => {
                Some(RiskReason::new(code, summary.group_by_columns.clone(), None))
            }
            RuleCode::SensitiveJoin if sensitive >= 1 && features.join_count() >= 2 => {
                Some(RiskReason::new(code, sensitive_grouped(), None))
            }
            RuleCode::OkNote if sensitive >= 1 && reasons.is_empty() => {
                Some(RiskReason::new(code, sensitive_grouped(), None))
            }
            _ => None,
        };
        reasons.extend(reason);
    }
    reasons
}

/// One sentence per reason, in rule-table order. A blocked query with no
/// matched rule gets the fallback sentence.
pub fn render_explanation(reasons: &[RiskReason], status: Status) -> String {
    if reasons.is_empty() {
        return match status {
            Status::Blocked => RuleCode::ModelFlag.template().to_string(),
            Status::Approved => String::new(),
        };
    }
    reasons.iter().map(|r| r.message.as_str()).collect::<Vec<_>>().join(" ")
}
