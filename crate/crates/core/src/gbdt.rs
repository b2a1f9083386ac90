//! Gradient-boosted decision trees for binary classification.
//!
//! Newton boosting on the logistic loss with exact greedy split search.
//! Trees grow level by level; every feature column is sorted once up front
//! and each level makes one pass per feature over that order, accumulating
//! left-child statistics for all open nodes at the same time.

use std::path::Path;

use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use crate::error::{Error, Result};
use crate::features::{Category, FusedVector, FEATURE_NAMES};

pub const FORMAT_VERSION: u32 = 1;

const BASE_RATE_CLAMP: f64 = 1e-4;
const PROB_CLAMP: f64 = 1e-15;
/// Relative margin under which two split gains count as equal.
pub const GAIN_TIE_EPS: f64 = 1e-12;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GbdtHyperparams {
    pub rounds: usize,
    pub max_depth: usize,
    pub learning_rate: f64,
    pub l2_lambda: f64,
    pub gamma: f64,
    pub min_child_weight: f64,
    pub seed: u64,
}

impl Default for GbdtHyperparams {
    fn default() -> Self {
        GbdtHyperparams {
            rounds: 50,
            max_depth: 3,
            learning_rate: 0.1,
            l2_lambda: 1.0,
            gamma: 0.0,
            min_child_weight: 1.0,
            seed: 0,
        }
    }
}

impl GbdtHyperparams {
    pub fn validate(&self) -> Result<()> {
        let bad = |m: &str| Err(Error::InvalidHyperparams(m.to_string()));
        if self.rounds < 1 {
            return bad("rounds must be at least 1");
        }
        if self.max_depth < 1 {
            return bad("max_depth must be at least 1");
        }
        if !(self.learning_rate > 0.0 && self.learning_rate <= 1.0) {
            return bad("learning_rate must lie in (0, 1]");
        }
        if !(self.l2_lambda >= 0.0 && self.l2_lambda.is_finite()) {
            return bad("l2_lambda must be a finite value >= 0");
        }
        if !(self.gamma >= 0.0 && self.gamma.is_finite()) {
            return bad("gamma must be a finite value >= 0");
        }
        if !(self.min_child_weight >= 0.0 && self.min_child_weight.is_finite()) {
            return bad("min_child_weight must be a finite value >= 0");
        }
        Ok(())
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct LabeledExample {
    pub vector: FusedVector,
    pub label: u8,
    pub query_id: String,
}

/// Describes the layout of the vectors a model consumes. Its fingerprint
/// changes whenever the embedder, its width, the slot order or the category
/// order changes.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct FeatureSchema {
    pub embed_dim: usize,
    pub provider_id: String,
    pub slots: Vec<String>,
    pub categories: Vec<String>,
}

impl FeatureSchema {
    pub fn new(embed_dim: usize, provider_id: &str) -> Self {
        FeatureSchema {
            embed_dim,
            provider_id: provider_id.to_string(),
            slots: FEATURE_NAMES.iter().map(|s| s.to_string()).collect(),
            categories: Category::ALL.iter().map(|c| c.as_str().to_string()).collect(),
        }
    }

    pub fn input_dim(&self) -> usize {
        self.embed_dim + self.slots.len()
    }

    pub fn fingerprint(&self) -> String {
        let canonical = format!(
            "embed_dim={};provider={};slots={};categories={}",
            self.embed_dim,
            self.provider_id,
            self.slots.join(","),
            self.categories.join(",")
        );
        hex::encode(Sha256::digest(canonical.as_bytes()))
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum Node {
    Split { feature: usize, threshold: f64, left: usize, right: usize },
    Leaf { weight: f64 },
}

/// Binary tree stored as a node array rooted at index 0. Rows with
/// `x[feature] < threshold` go left.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Tree {
    pub nodes: Vec<Node>,
}

impl Tree {
    pub fn predict(&self, x: &[f64]) -> f64 {
        let mut i = 0;
        loop {
            match self.nodes[i] {
                Node::Leaf { weight } => return weight,
                Node::Split { feature, threshold, left, right } => {
                    i = if x[feature] < threshold { left } else { right };
                }
            }
        }
    }

    /// Index of the leaf a row lands in.
    pub fn leaf_index(&self, x: &[f64]) -> usize {
        let mut i = 0;
        while let Node::Split { feature, threshold, left, right } = self.nodes[i] {
            i = if x[feature] < threshold { left } else { right };
        }
        i
    }

    /// Number of edges on the longest root-to-leaf path.
    pub fn depth(&self) -> usize {
        fn walk(nodes: &[Node], i: usize) -> usize {
            match nodes[i] {
                Node::Leaf { .. } => 0,
                Node::Split { left, right, .. } => 1 + walk(nodes, left).max(walk(nodes, right)),
            }
        }
        walk(&self.nodes, 0)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TrainingMeta {
    pub hyperparams: GbdtHyperparams,
    pub corpus_checksum: String,
    pub n_examples: usize,
    pub n_positive: usize,
}

#[derive(Debug, Clone, PartialEq)]
pub struct GbdtModel {
    pub schema: FeatureSchema,
    pub schema_fingerprint: String,
    pub training_meta: TrainingMeta,
    pub base_score: f64,
    pub trees: Vec<Tree>,
}

/// On-disk layout. Field order is the serialization order.
#[derive(Serialize, Deserialize)]
struct ModelFile {
    format_version: u32,
    schema_fingerprint: String,
    schema: FeatureSchema,
    training_meta: TrainingMeta,
    base_score: f64,
    trees: Vec<Tree>,
    checksum: String,
}

pub fn sigmoid(x: f64) -> f64 {
    1.0 / (1.0 + (-x).exp())
}

impl GbdtModel {
    pub fn input_dim(&self) -> usize {
        self.schema.input_dim()
    }

    pub fn learning_rate(&self) -> f64 {
        self.training_meta.hyperparams.learning_rate
    }

    pub fn margin(&self, x: &[f64]) -> f64 {
        let sum: f64 = self.trees.iter().map(|t| t.predict(x)).sum();
        self.base_score + self.learning_rate() * sum
    }

    /// Risk probability, strictly inside (0, 1).
    pub fn predict_proba(&self, vector: &FusedVector) -> Result<f64> {
        if vector.len() != self.input_dim() {
            return Err(Error::DimensionMismatch { expected: self.input_dim(), found: vector.len() });
        }
        if let Some(i) = vector.0.iter().position(|v| !v.is_finite()) {
            return Err(Error::NonFiniteInput(format!("slot {i}")));
        }
        Ok(sigmoid(self.margin(&vector.0)).clamp(PROB_CLAMP, 1.0 - PROB_CLAMP))
    }

    /// Fails with `SchemaMismatch` when `active` differs from the training
    /// schema.
    pub fn check_schema(&self, active: &FeatureSchema) -> Result<()> {
        let found = active.fingerprint();
        if found != self.schema_fingerprint {
            return Err(Error::SchemaMismatch { expected: self.schema_fingerprint.clone(), found });
        }
        Ok(())
    }

    pub fn predict_checked(&self, vector: &FusedVector, active: &FeatureSchema) -> Result<f64> {
        self.check_schema(active)?;
        self.predict_proba(vector)
    }

    fn to_file(&self) -> ModelFile {
        let mut file = ModelFile {
            format_version: FORMAT_VERSION,
            schema_fingerprint: self.schema_fingerprint.clone(),
            schema: self.schema.clone(),
            training_meta: self.training_meta.clone(),
            base_score: self.base_score,
            trees: self.trees.clone(),
            checksum: String::new(),
        };
        file.checksum = file_checksum(&file);
        file
    }

    /// SHA-256 over the canonical (compact, checksum-blank) serialization.
    pub fn checksum(&self) -> String {
        self.to_file().checksum
    }

    /// Short identifier derived from the checksum.
    pub fn model_id(&self) -> String {
        self.checksum()[..12].to_string()
    }

    pub fn to_json(&self) -> String {
        let mut text = serde_json::to_string_pretty(&self.to_file()).expect("model serializes");
        text.push('\n');
        text
    }

    pub fn from_json(text: &str) -> Result<Self> {
        let value: serde_json::Value =
            serde_json::from_str(text).map_err(|e| Error::CorruptModel(format!("not JSON: {e}")))?;
        let version = value
            .get("format_version")
            .and_then(|v| v.as_u64())
            .ok_or_else(|| Error::CorruptModel("missing format_version".into()))?;
        if version != u64::from(FORMAT_VERSION) {
            return Err(Error::FormatVersionMismatch { expected: FORMAT_VERSION, found: version });
        }
        let mut file: ModelFile = serde_json::from_str(text)
            .map_err(|e| Error::CorruptModel(format!("malformed model document: {e}")))?;
        let stored = std::mem::take(&mut file.checksum);
        if file_checksum(&file) != stored {
            return Err(Error::CorruptModel("checksum does not match contents".into()));
        }
        let model = GbdtModel {
            schema: file.schema,
            schema_fingerprint: file.schema_fingerprint,
            training_meta: file.training_meta,
            base_score: file.base_score,
            trees: file.trees,
        };
        model.validate_structure()?;
        Ok(model)
    }

    fn validate_structure(&self) -> Result<()> {
        let dim = self.input_dim();
        for (t, tree) in self.trees.iter().enumerate() {
            if tree.nodes.is_empty() {
                return Err(Error::CorruptModel(format!("tree {t} is empty")));
            }
            let n = tree.nodes.len();
            for (i, node) in tree.nodes.iter().enumerate() {
                if let Node::Split { feature, left, right, .. } = *node {
                    // children always follow their parent, which rules out cycles
                    if feature >= dim || left >= n || right >= n || left <= i || right <= i {
                        return Err(Error::CorruptModel(format!("tree {t} has an out-of-range node")));
                    }
                }
            }
        }
        Ok(())
    }

    pub fn save(&self, path: &Path) -> Result<()> {
        std::fs::write(path, self.to_json()).map_err(|e| Error::io(path, e))
    }

    pub fn load(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
        Self::from_json(&text)
    }
}

pub fn save_model(model: &GbdtModel, path: &Path) -> Result<()> {
    model.save(path)
}

pub fn load_model(path: &Path) -> Result<GbdtModel> {
    GbdtModel::load(path)
}

pub fn predict_proba(model: &GbdtModel, vector: &FusedVector) -> Result<f64> {
    model.predict_proba(vector)
}

fn file_checksum(file: &ModelFile) -> String {
    debug_assert!(file.checksum.is_empty());
    let canonical = serde_json::to_vec(file).expect("model serializes");
    hex::encode(Sha256::digest(&canonical))
}

/// SHA-256 over query ids, labels and the exact bits of every vector.
pub fn examples_checksum(examples: &[LabeledExample]) -> String {
    let mut hasher = Sha256::new();
    for ex in examples {
        hasher.update(ex.query_id.as_bytes());
        hasher.update([0, ex.label]);
        for v in &ex.vector.0 {
            hasher.update(v.to_bits().to_le_bytes());
        }
    }
    hex::encode(hasher.finalize())
}

pub fn train(
    examples: &[LabeledExample],
    hp: &GbdtHyperparams,
    schema: &FeatureSchema,
) -> Result<GbdtModel> {
    hp.validate()?;
    if examples.is_empty() {
        return Err(Error::EmptyDataset);
    }
    let dim = schema.input_dim();
    for ex in examples {
        if ex.vector.len() != dim {
            return Err(Error::DimensionMismatch { expected: dim, found: ex.vector.len() });
        }
        if ex.vector.0.iter().any(|v| !v.is_finite()) {
            return Err(Error::NonFiniteInput(ex.query_id.clone()));
        }
        if ex.label > 1 {
            return Err(Error::InvalidLabel { query_id: ex.query_id.clone(), label: ex.label });
        }
    }

    let n = examples.len();
    let rows: Vec<&[f64]> = examples.iter().map(|e| e.vector.as_slice()).collect();
    let labels: Vec<f64> = examples.iter().map(|e| f64::from(e.label)).collect();
    let n_positive = examples.iter().filter(|e| e.label == 1).count();

    let rate = (n_positive as f64 / n as f64).clamp(BASE_RATE_CLAMP, 1.0 - BASE_RATE_CLAMP);
    let base_score = (rate / (1.0 - rate)).ln();

    // Stable sort keeps ties in row order.
    let sorted: Vec<Vec<u32>> = (0..dim)
        .map(|f| {
            let mut idx: Vec<u32> = (0..n as u32).collect();
            idx.sort_by(|&a, &b| rows[a as usize][f].total_cmp(&rows[b as usize][f]));
            idx
        })
        .collect();

    let mut margins = vec![base_score; n];
    let mut grad = vec![0.0; n];
    let mut hess = vec![0.0; n];
    let mut trees = Vec::with_capacity(hp.rounds);
    for _ in 0..hp.rounds {
        for i in 0..n {
            let p = sigmoid(margins[i]).clamp(PROB_CLAMP, 1.0 - PROB_CLAMP);
            grad[i] = p - labels[i];
            hess[i] = p * (1.0 - p);
        }
        let tree = TreeBuilder { rows: &rows, sorted: &sorted, grad: &grad, hess: &hess, hp }.build();
        for (m, x) in margins.iter_mut().zip(&rows) {
            *m += hp.learning_rate * tree.predict(x);
        }
        trees.push(tree);
    }

    Ok(GbdtModel {
        schema: schema.clone(),
        schema_fingerprint: schema.fingerprint(),
        training_meta: TrainingMeta {
            hyperparams: hp.clone(),
            corpus_checksum: examples_checksum(examples),
            n_examples: n,
            n_positive,
        },
        base_score,
        trees,
    })
}

/// Structure score gain of splitting (G, H) into (gl, hl) and the rest.
pub fn split_gain(gl: f64, hl: f64, g: f64, h: f64, lambda: f64, gamma: f64) -> f64 {
    let gr = g - gl;
    let hr = h - hl;
    0.5 * (gl * gl / (hl + lambda) + gr * gr / (hr + lambda) - g * g / (h + lambda)) - gamma
}

/// True when `gain` beats `best` by more than the tie margin.
pub fn beats(gain: f64, best: f64) -> bool {
    gain > best + GAIN_TIE_EPS * best.abs().max(1.0)
}

#[derive(Clone, Copy)]
struct Candidate {
    gain: f64,
    feature: usize,
    threshold: f64,
}

struct TreeBuilder<'a> {
    rows: &'a [&'a [f64]],
    sorted: &'a [Vec<u32>],
    grad: &'a [f64],
    hess: &'a [f64],
    hp: &'a GbdtHyperparams,
}

const CLOSED: u32 = u32::MAX;

impl TreeBuilder<'_> {
    fn build(&self) -> Tree {
        let n = self.rows.len();
        let dim = self.sorted.len();
        let lambda = self.hp.l2_lambda;
        let mut nodes = vec![Node::Leaf { weight: 0.0 }];
        // node index per row
        let mut node_of = vec![0usize; n];
        // frontier slot per row, CLOSED once the row's node is final
        let mut slot_of = vec![0u32; n];
        let mut frontier: Vec<usize> = vec![0];

        for _depth in 0..self.hp.max_depth {
            if frontier.is_empty() {
                break;
            }
            let k = frontier.len();
            let mut g_tot = vec![0.0; k];
            let mut h_tot = vec![0.0; k];
            for (r, &s) in slot_of.iter().enumerate() {
                if s != CLOSED {
                    g_tot[s as usize] += self.grad[r];
                    h_tot[s as usize] += self.hess[r];
                }
            }

            let mut best: Vec<Option<Candidate>> = vec![None; k];
            let mut gl = vec![0.0; k];
            let mut hl = vec![0.0; k];
            let mut last: Vec<Option<f64>> = vec![None; k];
            for f in 0..dim {
                gl.iter_mut().for_each(|v| *v = 0.0);
                hl.iter_mut().for_each(|v| *v = 0.0);
                last.iter_mut().for_each(|v| *v = None);
                for &r in &self.sorted[f] {
                    let r = r as usize;
                    let s = slot_of[r];
                    if s == CLOSED {
                        continue;
                    }
                    let s = s as usize;
                    let v = self.rows[r][f];
                    if let Some(prev) = last[s] {
                        if v > prev {
                            let left_h = hl[s];
                            let right_h = h_tot[s] - left_h;
                            if left_h >= self.hp.min_child_weight
                                && right_h >= self.hp.min_child_weight
                                && left_h + lambda > 0.0
                                && right_h + lambda > 0.0
                            {
                                let gain =
                                    split_gain(gl[s], left_h, g_tot[s], h_tot[s], lambda, self.hp.gamma);
                                let better = match best[s] {
                                    None => gain > 0.0,
                                    Some(b) => beats(gain, b.gain),
                                };
                                if better {
                                    best[s] = Some(Candidate { gain, feature: f, threshold: midpoint(prev, v) });
                                }
                            }
                        }
                    }
                    gl[s] += self.grad[r];
                    hl[s] += self.hess[r];
                    last[s] = Some(v);
                }
            }

            let mut next_frontier = Vec::new();
            let mut remap = vec![CLOSED; k];
            let mut children = vec![(0usize, 0usize); k];
            for (s, cand) in best.iter().enumerate() {
                if let Some(c) = cand {
                    let left = nodes.len();
                    let right = left + 1;
                    nodes.push(Node::Leaf { weight: 0.0 });
                    nodes.push(Node::Leaf { weight: 0.0 });
                    nodes[frontier[s]] =
                        Node::Split { feature: c.feature, threshold: c.threshold, left, right };
                    children[s] = (left, right);
                    remap[s] = next_frontier.len() as u32;
                    next_frontier.push(left);
                    next_frontier.push(right);
                }
            }
            for r in 0..n {
                let s = slot_of[r];
                if s == CLOSED {
                    continue;
                }
                let s = s as usize;
                match best[s] {
                    None => slot_of[r] = CLOSED,
                    Some(c) => {
                        let go_left = self.rows[r][c.feature] < c.threshold;
                        let (l, rt) = children[s];
                        node_of[r] = if go_left { l } else { rt };
                        slot_of[r] = remap[s] + if go_left { 0 } else { 1 };
                    }
                }
            }
            frontier = next_frontier;
        }

        let mut g_leaf = vec![0.0; nodes.len()];
        let mut h_leaf = vec![0.0; nodes.len()];
        for r in 0..n {
            g_leaf[node_of[r]] += self.grad[r];
            h_leaf[node_of[r]] += self.hess[r];
        }
        for (i, node) in nodes.iter_mut().enumerate() {
            if let Node::Leaf { weight } = node {
                let denom = h_leaf[i] + lambda;
                *weight = if denom > 0.0 { -g_leaf[i] / denom } else { 0.0 };
            }
        }
        Tree { nodes }
    }
}

fn midpoint(a: f64, b: f64) -> f64 {
    let m = (a + b) / 2.0;
    if m > a && m <= b {
        m
    } else {
        b
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn schema1() -> FeatureSchema {
        // one raw feature, no syntactic slots
        FeatureSchema { embed_dim: 1, provider_id: "test".into(), slots: vec![], categories: vec![] }
    }

    fn ex(x: &[f64], y: u8) -> LabeledExample {
        LabeledExample { vector: FusedVector(x.to_vec()), label: y, query_id: format!("q{}", x[0]) }
    }

    fn four_points() -> Vec<LabeledExample> {
        vec![ex(&[0.0], 0), ex(&[1.0], 0), ex(&[2.0], 1), ex(&[3.0], 1)]
    }

    fn stump_hp() -> GbdtHyperparams {
        GbdtHyperparams {
            rounds: 1,
            max_depth: 1,
            learning_rate: 1.0,
            l2_lambda: 0.0,
            gamma: 0.0,
            min_child_weight: 0.0,
            seed: 0,
        }
    }

    #[test]
    fn four_point_stump_matches_hand_newton_step() {
        // p = 0.5 everywhere: g = ±0.5, h = 0.25. Left {0,1}: G = 1, H = 0.5,
        // w = -2; right w = +2; gain = ½(2 + 2 - 0) = 2.
        let m = train(&four_points(), &stump_hp(), &schema1()).unwrap();
        assert_eq!(m.base_score, 0.0);
        assert_eq!(
            m.trees[0].nodes,
            vec![
                Node::Split { feature: 0, threshold: 1.5, left: 1, right: 2 },
                Node::Leaf { weight: -2.0 },
                Node::Leaf { weight: 2.0 },
            ]
        );
        let p0 = m.predict_proba(&FusedVector(vec![0.0])).unwrap();
        let p3 = m.predict_proba(&FusedVector(vec![3.0])).unwrap();
        assert!((p0 - 0.11920292202211755).abs() < 1e-15);
        assert!((p3 - 0.8807970779778823).abs() < 1e-15);
        assert!((split_gain(1.0, 0.5, 0.0, 1.0, 0.0, 0.0) - 2.0).abs() < 1e-15);
    }

    #[test]
    fn min_child_weight_blocks_light_children() {
        let hp = GbdtHyperparams { min_child_weight: 1.0, ..stump_hp() };
        let m = train(&four_points(), &hp, &schema1()).unwrap();
        assert_eq!(m.trees[0].nodes.len(), 1);
    }

    #[test]
    fn all_negative_data_scores_low() {
        let data: Vec<_> = (0..20).map(|i| ex(&[i as f64], 0)).collect();
        let m = train(&data, &GbdtHyperparams::default(), &schema1()).unwrap();
        for e in &data {
            assert!(m.predict_proba(&e.vector).unwrap() <= 0.01);
        }
    }

    #[test]
    fn gainless_data_predicts_base_rate() {
        let data: Vec<_> = (0..6).map(|i| ex(&[1.0], (i % 2) as u8)).collect();
        let m = train(&data, &GbdtHyperparams::default(), &schema1()).unwrap();
        assert!(m.trees.iter().all(|t| t.nodes == vec![Node::Leaf { weight: 0.0 }]));
        for x in [-5.0, 1.0, 7.0] {
            assert_eq!(m.predict_proba(&FusedVector(vec![x])).unwrap(), sigmoid(m.base_score));
        }
    }

    #[test]
    fn tie_breaking_prefers_lowest_feature() {
        // both features induce the same partition
        let schema = FeatureSchema { embed_dim: 2, ..schema1() };
        let data = vec![ex(&[0.0, 0.0], 0), ex(&[1.0, 1.0], 1)];
        let m = train(&data, &stump_hp(), &schema).unwrap();
        assert!(matches!(m.trees[0].nodes[0], Node::Split { feature: 0, .. }));
    }

    #[test]
    fn rejects_bad_input() {
        let s = schema1();
        assert!(matches!(train(&[], &GbdtHyperparams::default(), &s), Err(Error::EmptyDataset)));
        assert!(matches!(
            train(&[ex(&[1.0, 2.0], 0)], &GbdtHyperparams::default(), &s),
            Err(Error::DimensionMismatch { .. })
        ));
        assert!(matches!(
            train(&[ex(&[f64::NAN], 0)], &GbdtHyperparams::default(), &s),
            Err(Error::NonFiniteInput(_))
        ));
        let hp = GbdtHyperparams { learning_rate: 0.0, ..Default::default() };
        assert!(matches!(train(&four_points(), &hp, &s), Err(Error::InvalidHyperparams(_))));
        let hp = GbdtHyperparams { max_depth: 0, ..Default::default() };
        assert!(hp.validate().is_err());
    }

    #[test]
    fn serialization_round_trip_and_tamper_detection() {
        let m = train(&four_points(), &GbdtHyperparams { min_child_weight: 0.0, ..Default::default() }, &schema1())
            .unwrap();
        let text = m.to_json();
        let back = GbdtModel::from_json(&text).unwrap();
        assert_eq!(back, m);
        assert_eq!(back.to_json(), text);

        let tampered = text.replacen("\"threshold\": 1.5", "\"threshold\": 1.25", 1);
        assert_ne!(tampered, text);
        assert!(matches!(GbdtModel::from_json(&tampered), Err(Error::CorruptModel(_))));

        let bumped = text.replacen("\"format_version\": 1", "\"format_version\": 2", 1);
        assert!(matches!(
            GbdtModel::from_json(&bumped),
            Err(Error::FormatVersionMismatch { expected: 1, found: 2 })
        ));
        assert!(matches!(GbdtModel::from_json("{"), Err(Error::CorruptModel(_))));
    }

    #[test]
    fn schema_fingerprint_guards_prediction() {
        let m = train(&four_points(), &stump_hp(), &schema1()).unwrap();
        let other = FeatureSchema { provider_id: "other".into(), ..schema1() };
        assert!(matches!(
            m.predict_checked(&FusedVector(vec![0.0]), &other),
            Err(Error::SchemaMismatch { .. })
        ));
        assert!(m.predict_checked(&FusedVector(vec![0.0]), &schema1()).is_ok());
        assert!(matches!(
            m.predict_proba(&FusedVector(vec![0.0, 1.0])),
            Err(Error::DimensionMismatch { expected: 1, found: 2 })
        ));
    }

    #[test]
    fn default_schema_fingerprint_is_stable() {
        let a = FeatureSchema::new(64, "builtin-fnv1a-v1");
        assert_eq!(a.input_dim(), 64 + crate::features::FEATURE_COUNT);
        assert_eq!(a.fingerprint(), FeatureSchema::new(64, "builtin-fnv1a-v1").fingerprint());
        assert_ne!(a.fingerprint(), FeatureSchema::new(32, "builtin-fnv1a-v1").fingerprint());
    }
}
