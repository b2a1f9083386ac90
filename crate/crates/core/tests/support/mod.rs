//! Shared helpers for the integration tests.
#![allow(dead_code)]

pub mod embed_fixtures;
pub mod fixtures;
pub mod gbdt_cases;
pub mod oracle;

use std::sync::OnceLock;

use metric_gate::corpus::{generate_corpus, is_held_out, CorpusEntry, SchemaDef};
use metric_gate::gate::{Gate, Pipeline, DEFAULT_THRESHOLD};
use metric_gate::gbdt::{train, GbdtHyperparams, GbdtModel};

pub const CORPUS_N: usize = 2000;
pub const CORPUS_SEED: u64 = 1;

pub struct Trained {
    pub corpus: Vec<CorpusEntry>,
    pub model: GbdtModel,
}

/// Default corpus (n=2000, seed 1) and a default-hyperparameter model
/// trained on its training split. Built once per test binary.
pub fn trained() -> &'static Trained {
    static CELL: OnceLock<Trained> = OnceLock::new();
    CELL.get_or_init(|| {
        let corpus = generate_corpus(CORPUS_N, CORPUS_SEED, &SchemaDef::patient_data()).unwrap();
        let pipeline = Pipeline::default();
        let training: Vec<CorpusEntry> =
            corpus.iter().filter(|e| !is_held_out(&e.query_id)).cloned().collect();
        let examples = pipeline.examples(&training).unwrap();
        let model = train(&examples, &GbdtHyperparams::default(), &pipeline.schema()).unwrap();
        Trained { corpus, model }
    })
}

pub fn default_gate() -> Gate {
    Gate::new(Pipeline::default(), trained().model.clone(), DEFAULT_THRESHOLD).unwrap()
}

pub fn gate_at(threshold: f64) -> Gate {
    Gate::new(Pipeline::default(), trained().model.clone(), threshold).unwrap()
}
