mod support;

use metric_gate::corpus::{generate_corpus, reference_queries, SchemaDef};
use metric_gate::embed::DEFAULT_DIM;
use metric_gate::features::{extract_features, fuse, SensitiveLexicon, FEATURE_COUNT};
use metric_gate::embed::embed;
use metric_gate::sql::{normalize_query, parse_sql};

#[test]
fn advanced_fixtures_match_hand_derived_summaries() {
    let fixtures = support::fixtures::advanced();
    assert!(fixtures.len() >= 20);
    let failures: Vec<String> = fixtures
        .iter()
        .filter_map(|f| support::fixtures::check(f).err().map(|e| format!("{}: {e}", f.name)))
        .collect();
    assert!(failures.is_empty(), "{failures:#?}");
}

#[test]
fn advanced_fixtures_cover_the_hard_constructs() {
    let fixtures = support::fixtures::advanced();
    let has = |k: &str, pred: &dyn Fn(&str) -> bool| fixtures.iter().any(|f| f.expect.get(k).is_some_and(|v| pred(v)));
    assert!(has("ctes", &|v| v != "0"));
    assert!(has("windows", &|v| v != "0"));
    assert!(has("depth", &|v| v == "3"));
    assert!(has("error", &|v| v == "syntax"));
    assert!(has("error", &|v| v == "unsupported"));
}

#[test]
fn reference_query_columns() {
    let expected: [(&[&str], usize); 3] =
        [(&["zip"], 0), (&["gender", "diagnosis_code"], 0), (&["gender"], 0)];
    for ((_, sql, _), (cols, joins)) in reference_queries().iter().zip(expected) {
        let s = parse_sql(sql).unwrap();
        assert_eq!(s.group_by_columns, cols, "{sql}");
        assert_eq!(s.join_count, joins);
        assert_eq!(s.tables, ["patient_data"]);
        assert!(!s.reduced_confidence);
    }
}

#[test]
fn every_corpus_query_parses() {
    for e in generate_corpus(2000, 1, &SchemaDef::patient_data()).unwrap() {
        let s = parse_sql(&e.sql).unwrap_or_else(|err| panic!("{}: {err}", e.sql));
        assert!(!s.tables.is_empty());
    }
}

#[test]
fn normalization_is_idempotent_on_corpus() {
    let corpus = generate_corpus(100, 5, &SchemaDef::patient_data()).unwrap();
    for e in &corpus {
        let once = normalize_query(&e.sql);
        assert_eq!(normalize_query(&once.detokenize()), once, "{}", e.sql);
    }
}

#[test]
fn fused_slots_follow_the_embedding() {
    let lex = SensitiveLexicon::default();
    let corpus = generate_corpus(100, 9, &SchemaDef::patient_data()).unwrap();
    for e in &corpus {
        let s = parse_sql(&e.sql).unwrap();
        let f = extract_features(&s, &lex);
        let emb = embed(&normalize_query(&e.sql));
        let v = fuse(&emb, &f, DEFAULT_DIM).unwrap();
        assert_eq!(v.len(), DEFAULT_DIM + FEATURE_COUNT);
        assert_eq!(v.0[DEFAULT_DIM], s.group_by_columns.len() as f64);
        assert_eq!(&v.0[..DEFAULT_DIM], emb.values.as_slice());
        assert_eq!(&v.0[DEFAULT_DIM..], f.0.as_slice());
    }
}
