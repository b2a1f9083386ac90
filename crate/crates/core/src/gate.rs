//! End-to-end scoring: parse, embed, extract, fuse, score, threshold,
//! explain. Also holds batch analysis and the report formats.

use std::path::{Path, PathBuf};

use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use serde_json::value::RawValue;

use crate::corpus::CorpusEntry;
use crate::embed::{BuiltinEmbedder, Embedder, ExternalEmbedder, DEFAULT_DIM};
use crate::error::{Error, Result};
use crate::explain::{match_rules, render_explanation, RiskReason, Status};
use crate::features::{extract_features, fuse, FusedVector, SensitiveLexicon, SyntacticFeatures};
use crate::gbdt::{FeatureSchema, GbdtModel, LabeledExample};
use crate::sql::{normalize_query, parse_sql, NormalizedTokens, QuerySummary};

pub const DEFAULT_THRESHOLD: f64 = 0.85;
pub const REDUCED_CONFIDENCE_NOTE: &str = "(reduced confidence: advanced SQL constructs present)";

#[derive(Debug, Clone, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum EmbedderKind {
    #[default]
    Builtin,
    External,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum OutputFormat {
    #[default]
    Json,
    Text,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GateConfig {
    pub threshold: f64,
    pub model_path: Option<PathBuf>,
    pub lexicon_path: Option<PathBuf>,
    pub embedder: EmbedderKind,
    pub embedder_cmd: Option<PathBuf>,
    pub embed_dim: usize,
    pub format: OutputFormat,
}

impl Default for GateConfig {
    fn default() -> Self {
        GateConfig {
            threshold: DEFAULT_THRESHOLD,
            model_path: None,
            lexicon_path: None,
            embedder: EmbedderKind::Builtin,
            embedder_cmd: None,
            embed_dim: DEFAULT_DIM,
            format: OutputFormat::Json,
        }
    }
}

pub fn validate_threshold(threshold: f64) -> Result<()> {
    if threshold > 0.0 && threshold < 1.0 {
        Ok(())
    } else {
        Err(Error::Config(format!("threshold {threshold} must lie strictly between 0 and 1")))
    }
}

impl GateConfig {
    pub fn build_pipeline(&self) -> Result<Pipeline> {
        let lexicon = match &self.lexicon_path {
            Some(p) => SensitiveLexicon::load(p)?,
            None => SensitiveLexicon::default(),
        };
        let embedder: Box<dyn Embedder> = match self.embedder {
            EmbedderKind::Builtin => Box::new(BuiltinEmbedder::new(self.embed_dim)?),
            EmbedderKind::External => {
                let cmd = self.embedder_cmd.as_ref().ok_or_else(|| {
                    Error::Config("the external embedder needs --embedder-cmd".into())
                })?;
                Box::new(ExternalEmbedder::new(cmd, self.embed_dim)?)
            }
        };
        Ok(Pipeline::new(lexicon, embedder))
    }

    pub fn load_gate(&self) -> Result<Gate> {
        let path = self
            .model_path
            .as_ref()
            .ok_or_else(|| Error::Config("no model given (use --model or the config file)".into()))?;
        let model = GbdtModel::load(path)?;
        Gate::new(self.build_pipeline()?, model, self.threshold)
    }
}

/// Everything the classifier and the explanation engine need for one query.
#[derive(Debug, Clone, PartialEq)]
pub struct Analysis {
    pub summary: QuerySummary,
    pub features: SyntacticFeatures,
    pub tokens: NormalizedTokens,
}

pub struct Pipeline {
    lexicon: SensitiveLexicon,
    embedder: Box<dyn Embedder>,
}

impl Default for Pipeline {
    fn default() -> Self {
        Pipeline::new(SensitiveLexicon::default(), Box::new(BuiltinEmbedder::default()))
    }
}

impl Pipeline {
    pub fn new(lexicon: SensitiveLexicon, embedder: Box<dyn Embedder>) -> Self {
        Pipeline { lexicon, embedder }
    }

    pub fn lexicon(&self) -> &SensitiveLexicon {
        &self.lexicon
    }

    pub fn embedder(&self) -> &dyn Embedder {
        self.embedder.as_ref()
    }

    pub fn schema(&self) -> FeatureSchema {
        FeatureSchema::new(self.embedder.dim(), self.embedder.provider_id())
    }

    pub fn analyze(&self, sql: &str) -> Result<Analysis> {
        let summary = parse_sql(sql)?;
        let tokens = normalize_query(sql);
        let features = extract_features(&summary, &self.lexicon);
        Ok(Analysis { summary, features, tokens })
    }

    /// Embeds all analyses in one provider call and fuses each.
    pub fn fuse_batch(&self, analyses: &[&Analysis]) -> Result<Vec<FusedVector>> {
        let tokens: Vec<NormalizedTokens> = analyses.iter().map(|a| a.tokens.clone()).collect();
        let embeddings = self.embedder.embed_batch(&tokens)?;
        if embeddings.len() != analyses.len() {
            return Err(Error::Provider("provider returned the wrong number of vectors".into()));
        }
        embeddings
            .iter()
            .zip(analyses)
            .map(|(e, a)| fuse(e, &a.features, self.embedder.dim()))
            .collect()
    }

    pub fn vectorize(&self, sql: &str) -> Result<(Analysis, FusedVector)> {
        let analysis = self.analyze(sql)?;
        let fused = self.fuse_batch(&[&analysis])?.pop().expect("one vector per analysis");
        Ok((analysis, fused))
    }

    /// Turn corpus entries into training examples.
    pub fn examples(&self, entries: &[CorpusEntry]) -> Result<Vec<LabeledExample>> {
        let analyses =
            entries.par_iter().map(|e| self.analyze(&e.sql)).collect::<Result<Vec<Analysis>>>()?;
        let refs: Vec<&Analysis> = analyses.iter().collect();
        let vectors = self.fuse_batch(&refs)?;
        Ok(entries
            .iter()
            .zip(vectors)
            .map(|(e, vector)| LabeledExample { vector, label: e.label, query_id: e.query_id.clone() })
            .collect())
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Verdict {
    pub query_id: String,
    pub status: Status,
    pub risk_score: f64,
    pub threshold: f64,
    pub reasons: Vec<RiskReason>,
    pub features: SyntacticFeatures,
    pub reduced_confidence: bool,
    pub model_id: String,
}

impl Verdict {
    pub fn explanation(&self) -> String {
        render_explanation(&self.reasons, self.status)
    }

    pub fn exit_code(&self) -> i32 {
        match self.status {
            Status::Approved => 0,
            Status::Blocked => 2,
        }
    }
}

impl Serialize for SyntacticFeatures {
    fn serialize<S: serde::Serializer>(&self, serializer: S) -> std::result::Result<S::Ok, S::Error> {
        use serde::ser::SerializeMap;
        let mut map = serializer.serialize_map(Some(self.0.len()))?;
        for (name, value) in self.named() {
            map.serialize_entry(name, &(value as u64))?;
        }
        map.end()
    }
}

/// An analyzed query with its fused vector, or the reason it has none.
type Prepared<'a> = std::result::Result<(&'a Analysis, &'a FusedVector), String>;

/// A loaded, schema-checked model plus the pipeline that feeds it.
pub struct Gate {
    pipeline: Pipeline,
    model: GbdtModel,
    threshold: f64,
    model_id: String,
}

/// One input of a batch run.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct BatchInput {
    pub query_id: String,
    pub path: PathBuf,
}

#[derive(Debug, Clone, PartialEq)]
pub enum BatchOutcome {
    Verdict(Verdict),
    Error { query_id: String, message: String },
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize)]
pub struct BatchCounts {
    pub approved: usize,
    pub blocked: usize,
    pub errors: usize,
}

#[derive(Debug, Clone, PartialEq)]
pub struct BatchReport {
    pub outcomes: Vec<BatchOutcome>,
    pub counts: BatchCounts,
}

impl Gate {
    pub fn new(pipeline: Pipeline, model: GbdtModel, threshold: f64) -> Result<Self> {
        validate_threshold(threshold)?;
        model.check_schema(&pipeline.schema())?;
        let model_id = model.model_id();
        Ok(Gate { pipeline, model, threshold, model_id })
    }

    pub fn threshold(&self) -> f64 {
        self.threshold
    }

    pub fn model(&self) -> &GbdtModel {
        &self.model
    }

    pub fn pipeline(&self) -> &Pipeline {
        &self.pipeline
    }

    pub fn model_id(&self) -> &str {
        &self.model_id
    }

    /// Score one query. A score equal to the threshold is approved.
    pub fn detect_overexposure(&self, query_id: &str, sql: &str) -> Result<Verdict> {
        let (analysis, fused) = self.pipeline.vectorize(sql)?;
        self.decide(query_id, &analysis, &fused)
    }

    fn decide(&self, query_id: &str, analysis: &Analysis, fused: &FusedVector) -> Result<Verdict> {
        let risk_score = self.model.predict_proba(fused)?;
        let status = if risk_score > self.threshold { Status::Blocked } else { Status::Approved };
        let mut reasons = match_rules(&analysis.summary, &analysis.features, &self.pipeline.lexicon);
        if status == Status::Blocked && reasons.is_empty() {
            reasons.push(RiskReason::fallback());
        }
        Ok(Verdict {
            query_id: query_id.to_string(),
            status,
            risk_score,
            threshold: self.threshold,
            reasons,
            features: analysis.features,
            reduced_confidence: analysis.summary.reduced_confidence,
            model_id: self.model_id.clone(),
        })
    }

    /// Analyze files; per-file failures are recorded, never fatal. Output
    /// order follows input order.
    pub fn analyze_batch(&self, inputs: &[BatchInput]) -> BatchReport {
        let texts: Vec<(String, Result<String>)> = inputs
            .par_iter()
            .map(|input| {
                let text = std::fs::read_to_string(&input.path).map_err(|e| Error::io(&input.path, e));
                (input.query_id.clone(), text)
            })
            .collect();
        self.analyze_texts(texts)
    }

    /// Batch over in-memory `(query_id, sql)` pairs.
    pub fn analyze_sources(&self, sources: &[(String, String)]) -> BatchReport {
        self.analyze_texts(sources.iter().map(|(id, sql)| (id.clone(), Ok(sql.clone()))).collect())
    }

    fn analyze_texts(&self, texts: Vec<(String, Result<String>)>) -> BatchReport {
        let analyses: Vec<Result<Analysis>> = texts
            .par_iter()
            .map(|(_, text)| match text {
                Ok(sql) => self.pipeline.analyze(sql),
                Err(e) => Err(Error::Config(e.to_string())),
            })
            .collect();

        let ok: Vec<&Analysis> = analyses.iter().filter_map(|a| a.as_ref().ok()).collect();
        let fused = self.pipeline.fuse_batch(&ok);

        let mut fused_iter = match &fused {
            Ok(v) => Some(v.iter()),
            Err(_) => None,
        };
        let jobs: Vec<(&str, Prepared<'_>)> = texts
            .iter()
            .zip(&analyses)
            .map(|((id, _), analysis)| {
                let item = match analysis {
                    Err(e) => Err(e.to_string()),
                    Ok(a) => match (&mut fused_iter, &fused) {
                        (Some(it), _) => Ok((a, it.next().expect("one vector per analysis"))),
                        (None, Err(e)) => Err(e.to_string()),
                        (None, Ok(_)) => unreachable!(),
                    },
                };
                (id.as_str(), item)
            })
            .collect();

        let outcomes: Vec<BatchOutcome> = jobs
            .par_iter()
            .map(|(id, item)| match item {
                Ok((a, v)) => match self.decide(id, a, v) {
                    Ok(verdict) => BatchOutcome::Verdict(verdict),
                    Err(e) => BatchOutcome::Error { query_id: id.to_string(), message: e.to_string() },
                },
                Err(message) => BatchOutcome::Error { query_id: id.to_string(), message: message.clone() },
            })
            .collect();

        let mut counts = BatchCounts::default();
        for o in &outcomes {
            match o {
                BatchOutcome::Verdict(v) if v.status == Status::Blocked => counts.blocked += 1,
                BatchOutcome::Verdict(_) => counts.approved += 1,
                BatchOutcome::Error { .. } => counts.errors += 1,
            }
        }
        BatchReport { outcomes, counts }
    }
}

/// Free-function form of [`Gate::detect_overexposure`].
pub fn detect_overexposure(query_text: &str, config: &GateConfig, model: GbdtModel) -> Result<Verdict> {
    let gate = Gate::new(config.build_pipeline()?, model, config.threshold)?;
    gate.detect_overexposure("query", query_text)
}

/// Expand directories (non-recursively, `.sql` files in name order) and
/// keep explicit files as given. Ids are paths relative to the directory
/// argument, or the path as written for explicit files.
pub fn collect_inputs(paths: &[PathBuf]) -> Result<Vec<BatchInput>> {
    let mut inputs = Vec::new();
    for path in paths {
        if path.is_dir() {
            let mut files: Vec<PathBuf> = std::fs::read_dir(path)
                .map_err(|e| Error::io(path, e))?
                .filter_map(|entry| entry.ok().map(|e| e.path()))
                .filter(|p| p.is_file() && p.extension().is_some_and(|x| x == "sql"))
                .collect();
            files.sort();
            for file in files {
                let id = file.strip_prefix(path).unwrap_or(&file).to_string_lossy().into_owned();
                inputs.push(BatchInput { query_id: id, path: file });
            }
        } else {
            inputs.push(BatchInput { query_id: path.to_string_lossy().into_owned(), path: path.clone() });
        }
    }
    Ok(inputs)
}

fn score_raw(x: f64) -> Box<RawValue> {
    RawValue::from_string(format!("{x:.6}")).expect("formatted float is valid JSON")
}

#[derive(Serialize)]
struct ReasonReport<'a> {
    code: &'a str,
    message: &'a str,
    columns: &'a [String],
}

#[derive(Serialize)]
struct VerdictReport<'a> {
    query_id: &'a str,
    status: Status,
    risk_score: Box<RawValue>,
    threshold: Box<RawValue>,
    reasons: Vec<ReasonReport<'a>>,
    features: &'a SyntacticFeatures,
    reduced_confidence: bool,
    model_id: &'a str,
}

impl<'a> From<&'a Verdict> for VerdictReport<'a> {
    fn from(v: &'a Verdict) -> Self {
        VerdictReport {
            query_id: &v.query_id,
            status: v.status,
            risk_score: score_raw(v.risk_score),
            threshold: score_raw(v.threshold),
            reasons: v
                .reasons
                .iter()
                .map(|r| ReasonReport { code: r.code.as_str(), message: &r.message, columns: &r.columns })
                .collect(),
            features: &v.features,
            reduced_confidence: v.reduced_confidence,
            model_id: &v.model_id,
        }
    }
}

#[derive(Serialize)]
struct ErrorReport<'a> {
    query_id: &'a str,
    status: &'static str,
    error: &'a str,
}

#[derive(Serialize)]
#[serde(untagged)]
enum OutcomeReport<'a> {
    Verdict(VerdictReport<'a>),
    Error(ErrorReport<'a>),
}

#[derive(Serialize)]
struct BatchJson<'a> {
    summary: BatchCounts,
    results: Vec<OutcomeReport<'a>>,
}

/// Pretty JSON with fixed key order and six-decimal scores.
pub fn verdict_json(verdict: &Verdict) -> String {
    serde_json::to_string_pretty(&VerdictReport::from(verdict)).expect("report serializes")
}

pub fn verdict_text(verdict: &Verdict) -> String {
    let mut out = format!(
        "{}: {} (risk_score {:.6}, threshold {:.6})",
        verdict.query_id, verdict.status, verdict.risk_score, verdict.threshold
    );
    let explanation = verdict.explanation();
    if !explanation.is_empty() {
        out.push_str("\n  ");
        out.push_str(&explanation);
    }
    if verdict.reduced_confidence {
        out.push_str("\n  ");
        out.push_str(REDUCED_CONFIDENCE_NOTE);
    }
    out
}

pub fn batch_json(report: &BatchReport) -> String {
    let results = report
        .outcomes
        .iter()
        .map(|o| match o {
            BatchOutcome::Verdict(v) => OutcomeReport::Verdict(v.into()),
            BatchOutcome::Error { query_id, message } => {
                OutcomeReport::Error(ErrorReport { query_id, status: "ERROR", error: message })
            }
        })
        .collect();
    serde_json::to_string_pretty(&BatchJson { summary: report.counts, results }).expect("report serializes")
}

pub fn batch_text(report: &BatchReport) -> String {
    let mut out = String::new();
    for o in &report.outcomes {
        match o {
            BatchOutcome::Verdict(v) => out.push_str(&verdict_text(v)),
            BatchOutcome::Error { query_id, message } => {
                out.push_str(&format!("{query_id}: ERROR ({message})"))
            }
        }
        out.push('\n');
    }
    let c = report.counts;
    out.push_str(&format!("approved: {}, blocked: {}, errors: {}", c.approved, c.blocked, c.errors));
    out
}

/// Path-free convenience for tests and embedding callers.
pub fn read_query(path: &Path) -> Result<String> {
    std::fs::read_to_string(path).map_err(|e| Error::io(path, e))
}
