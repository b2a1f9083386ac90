//! Loader for `fixtures/advanced/*.sql`. The first line of each file is
//! `-- expect: key=value ...` with hand-derived parse results.

use std::collections::BTreeMap;
use std::path::PathBuf;

use metric_gate::sql::{parse_sql, QuerySummary};
use metric_gate::Error;

pub struct Fixture {
    pub name: String,
    pub sql: String,
    pub expect: BTreeMap<String, String>,
}

pub fn advanced() -> Vec<Fixture> {
    let dir = PathBuf::from(env!("CARGO_MANIFEST_DIR")).join("fixtures/advanced");
    let mut paths: Vec<PathBuf> = std::fs::read_dir(&dir)
        .unwrap()
        .map(|e| e.unwrap().path())
        .filter(|p| p.extension().is_some_and(|x| x == "sql"))
        .collect();
    paths.sort();
    paths
        .into_iter()
        .map(|p| {
            let sql = std::fs::read_to_string(&p).unwrap();
            let header = sql.lines().next().unwrap().strip_prefix("-- expect:").expect("expect header");
            let expect = header
                .split_whitespace()
                .map(|kv| {
                    let (k, v) = kv.split_once('=').unwrap();
                    (k.to_string(), v.to_string())
                })
                .collect();
            Fixture { name: p.file_name().unwrap().to_string_lossy().into_owned(), sql, expect }
        })
        .collect()
}

fn list(v: &str) -> Vec<String> {
    v.split(',').filter(|s| !s.is_empty()).map(String::from).collect()
}

fn check_summary(s: &QuerySummary, expect: &BTreeMap<String, String>) -> Result<(), String> {
    for (k, v) in expect {
        let ok = match k.as_str() {
            "tables" => s.tables == list(v),
            "group_by" => s.group_by_columns == list(v),
            "joins" => s.join_count.to_string() == *v,
            "depth" => s.subquery_depth.to_string() == *v,
            "ctes" => s.cte_count.to_string() == *v,
            "windows" => s.window_fn_count.to_string() == *v,
            "reduced" => s.reduced_confidence.to_string() == *v,
            other => return Err(format!("unknown key {other}")),
        };
        if !ok {
            return Err(format!("{k}: expected {v}, got {s:?}"));
        }
    }
    Ok(())
}

/// Parse the fixture (catching panics) and compare with its header.
pub fn check(f: &Fixture) -> Result<(), String> {
    let sql = f.sql.clone();
    let outcome = std::panic::catch_unwind(move || parse_sql(&sql)).map_err(|_| "parser panicked".to_string())?;
    match (f.expect.get("error").map(String::as_str), outcome) {
        (Some("syntax"), Err(Error::Syntax { offset, .. })) if offset <= f.sql.len() => Ok(()),
        (Some("unsupported"), Err(Error::UnsupportedStatement(_))) => Ok(()),
        (Some(kind), other) => Err(format!("expected {kind} error, got {other:?}")),
        (None, Ok(s)) => check_summary(&s, &f.expect),
        (None, Err(e)) => Err(format!("unexpected error {e}")),
    }
}
