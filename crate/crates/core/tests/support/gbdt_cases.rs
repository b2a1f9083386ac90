//! Training-vs-oracle comparison helpers.

use metric_gate::features::FusedVector;
use metric_gate::gbdt::{train, FeatureSchema, GbdtHyperparams, LabeledExample};
use rand::Rng;
use rand_chacha::ChaCha8Rng;

use super::oracle::{self, Params};

pub fn raw_schema(dim: usize) -> FeatureSchema {
    FeatureSchema { embed_dim: dim, provider_id: "raw".into(), slots: vec![], categories: vec![] }
}

pub fn examples(xs: &[Vec<f64>], ys: &[u8]) -> Vec<LabeledExample> {
    xs.iter()
        .zip(ys)
        .enumerate()
        .map(|(i, (x, &y))| LabeledExample { vector: FusedVector(x.clone()), label: y, query_id: format!("r{i}") })
        .collect()
}

pub fn hyper(p: &Params) -> GbdtHyperparams {
    GbdtHyperparams {
        rounds: p.rounds,
        max_depth: p.depth,
        learning_rate: p.eta,
        l2_lambda: p.lambda,
        gamma: p.gamma,
        min_child_weight: p.min_child_weight,
        seed: 0,
    }
}

/// Largest probability gap between trainer and oracle over the training
/// points and a probe grid.
pub fn max_gap(xs: &[Vec<f64>], ys: &[u8], p: &Params) -> f64 {
    let model = train(&examples(xs, ys), &hyper(p), &raw_schema(xs[0].len())).unwrap();
    let reference = oracle::fit(xs, ys, p);
    let mut probes: Vec<Vec<f64>> = xs.to_vec();
    for a in -2..=8 {
        for b in -2..=8 {
            let v = [f64::from(a) * 0.37, f64::from(b) * 0.41];
            probes.push(v[..xs[0].len()].to_vec());
        }
    }
    probes
        .iter()
        .map(|x| (model.predict_proba(&FusedVector(x.clone())).unwrap() - reference.proba(x)).abs())
        .fold(0.0, f64::max)
}

pub fn random_case(rng: &mut ChaCha8Rng) -> (Vec<Vec<f64>>, Vec<u8>, Params) {
    let n = rng.gen_range(2..=8);
    let d = rng.gen_range(1..=2);
    // coarse grid values so equal feature values and equal gains occur
    let xs: Vec<Vec<f64>> = (0..n)
        .map(|_| (0..d).map(|_| if rng.gen_bool(0.5) { f64::from(rng.gen_range(0..4)) * 0.5 } else { rng.gen::<f64>() * 3.0 }).collect())
        .collect();
    let ys: Vec<u8> = (0..n).map(|_| rng.gen_range(0..2)).collect();
    let p = Params {
        rounds: rng.gen_range(1..=2),
        depth: rng.gen_range(1..=2),
        eta: [1.0, 0.5, 0.3][rng.gen_range(0..3)],
        lambda: [0.0, 0.5, 1.0][rng.gen_range(0..3)],
        gamma: [0.0, 0.0, 0.05][rng.gen_range(0..3)],
        min_child_weight: [0.0, 0.1, 0.3][rng.gen_range(0..3)],
    };
    (xs, ys, p)
}
