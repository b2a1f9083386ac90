//! Labeled query corpus over the `patient_data` schema.
//!
//! Ground truth comes from [`label_oracle`], a deterministic rule over the
//! parsed structure. The generator composes seeded random metric queries,
//! labels each one through the parser and the oracle, and caps either class
//! at 70% of the corpus.

use std::fmt::Write as _;
use std::path::Path;

use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::embed::fnv1a64;
use crate::error::{Error, Result};
use crate::features::{extract_features, Category, SensitiveLexicon, SyntacticFeatures};
use crate::sql::{parse_sql, QuerySummary};

pub const MIN_CORPUS: usize = 10;
const MAX_CLASS_SHARE: f64 = 0.70;

pub const REFERENCE_Q1: &str = include_str!("../fixtures/reference/q1.sql");
pub const REFERENCE_Q2: &str = include_str!("../fixtures/reference/q2.sql");
pub const REFERENCE_Q3: &str = include_str!("../fixtures/reference/q3.sql");

/// The three evaluation queries with their corpus ids and oracle labels.
pub fn reference_queries() -> [(&'static str, &'static str, u8); 3] {
    [("P-Q1", REFERENCE_Q1.trim(), 1), ("P-Q2", REFERENCE_Q2.trim(), 1), ("P-Q3", REFERENCE_Q3.trim(), 0)]
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct ColumnDef {
    pub name: String,
    pub sql_type: String,
    pub sensitive: bool,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct SchemaDef {
    pub table: String,
    pub columns: Vec<ColumnDef>,
}

impl SchemaDef {
    pub fn patient_data() -> Self {
        let col = |name: &str, sql_type: &str, sensitive: bool| ColumnDef {
            name: name.into(),
            sql_type: sql_type.into(),
            sensitive,
        };
        SchemaDef {
            table: "patient_data".into(),
            columns: vec![
                col("patient_id", "INTEGER", false),
                col("dob", "DATE", true),
                col("gender", "TEXT", true),
                col("zip", "TEXT", true),
                col("department", "TEXT", false),
                col("diagnosis_code", "TEXT", true),
                col("wait_time", "INTEGER", false),
            ],
        }
    }

    pub fn sensitive_columns(&self) -> impl Iterator<Item = &str> {
        self.columns.iter().filter(|c| c.sensitive).map(|c| c.name.as_str())
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct CorpusEntry {
    pub query_id: String,
    pub label: u8,
    pub template_id: String,
    pub sql: String,
}

/// Ground-truth risk label, computed from group-by category flags and the
/// join count only.
pub fn label_oracle(summary: &QuerySummary, lexicon: &SensitiveLexicon) -> u8 {
    label_from_features(&extract_features(summary, lexicon))
}

pub fn label_from_features(f: &SyntacticFeatures) -> u8 {
    let sensitive = f.sensitive_groupby_count();
    let risky = f.category_flag(Category::Zip)
        || f.category_flag(Category::Dob)
        || sensitive >= 2
        || (sensitive >= 1 && f.join_count() >= 2);
    u8::from(risky)
}

/// Static blacklist baseline: flags every query grouping by any listed
/// sensitive column, with no regard for context.
pub fn baseline_flag(f: &SyntacticFeatures) -> u8 {
    u8::from(f.sensitive_groupby_count() >= 1)
}

/// Deterministic 80/20 split; reference queries always stay in training.
pub fn is_held_out(query_id: &str) -> bool {
    !query_id.starts_with("P-") && fnv1a64(query_id.as_bytes()).is_multiple_of(5)
}

#[derive(Clone, Copy)]
struct AuxTable {
    name: &'static str,
    alias: &'static str,
    group_columns: &'static [&'static str],
    predicates: &'static [&'static str],
}

const AUX_TABLES: [AuxTable; 3] = [
    AuxTable {
        name: "visits",
        alias: "v",
        group_columns: &["visit_month", "ward"],
        predicates: &["v.visit_date >= '2024-01-01'", "v.length_of_stay > 3"],
    },
    AuxTable {
        name: "donations",
        alias: "d",
        group_columns: &["campaign"],
        predicates: &["d.amount > 100", "d.campaign = 'spring'"],
    },
    AuxTable {
        name: "billing",
        alias: "b",
        group_columns: &["payer"],
        predicates: &["b.payer = 'medicare'", "b.total_charge > 5000"],
    },
];

const BASE_PREDICATES: [&str; 6] = [
    "p.department = 'cardiology'",
    "p.wait_time > 30",
    "p.dob >= '1980-01-01'",
    "p.gender = 'F'",
    "p.zip LIKE '021%'",
    "p.diagnosis_code IN ('E11', 'I10')",
];

const AGGREGATES: [&str; 6] = [
    "COUNT(*)",
    "AVG(p.wait_time)",
    "SUM(p.wait_time)",
    "MIN(p.wait_time)",
    "MAX(p.wait_time)",
    "COUNT(DISTINCT p.patient_id)",
];

#[derive(Clone, Copy, PartialEq, Eq)]
enum Shape {
    Flat,
    Ordinal,
    Cte,
    Subquery,
}

/// A grouping column: (table alias, column name).
type Col = (&'static str, String);

fn pick_weighted(rng: &mut ChaCha8Rng, weights: &[u32]) -> usize {
    let total: u32 = weights.iter().sum();
    let mut roll = rng.gen_range(0..total);
    for (i, &w) in weights.iter().enumerate() {
        if roll < w {
            return i;
        }
        roll -= w;
    }
    weights.len() - 1
}

/// Which clause of the labeling oracle a composed query is aimed at. The
/// generator picks a stratum first so every region of the oracle, risky or
/// safe, is well represented; the label still comes from the oracle.
#[derive(Clone, Copy, PartialEq, Eq)]
enum Stratum {
    /// No sensitive grouping column.
    Plain,
    /// One contextual sensitive column, fewer than two joins.
    SingleContextual,
    /// Groups by a column that identifies on its own (ZIP or DOB).
    Standalone,
    /// Two or more contextual sensitive columns.
    Combination,
    /// One contextual sensitive column and at least two joins.
    Linked,
}

const STRATA: [(Stratum, u32); 5] = [
    (Stratum::Plain, 25),
    (Stratum::SingleContextual, 20),
    (Stratum::Standalone, 25),
    (Stratum::Combination, 15),
    (Stratum::Linked, 15),
];

/// Base-table grouping columns split by how the lexicon classifies them.
struct ColumnPools {
    standalone: Vec<String>,
    contextual: Vec<String>,
    plain: Vec<String>,
}

impl ColumnPools {
    fn new(schema: &SchemaDef, lexicon: &SensitiveLexicon) -> Self {
        let mut pools = ColumnPools { standalone: Vec::new(), contextual: Vec::new(), plain: Vec::new() };
        for c in &schema.columns {
            if c.name == "patient_id" || c.name == "wait_time" {
                continue;
            }
            let pool = match lexicon.classify_column(&c.name) {
                Some(Category::Zip | Category::Dob) => &mut pools.standalone,
                Some(_) => &mut pools.contextual,
                None => &mut pools.plain,
            };
            pool.push(c.name.clone());
        }
        pools
    }
}

/// Compose one random metric query and its template id.
fn compose(rng: &mut ChaCha8Rng, schema: &SchemaDef, pools: &ColumnPools) -> (String, &'static str) {
    let weights: Vec<u32> = STRATA.iter().map(|s| s.1).collect();
    let mut stratum = STRATA[pick_weighted(rng, &weights)].0;
    if pools.contextual.is_empty() && stratum != Stratum::Plain {
        stratum = Stratum::Standalone;
    }
    if pools.standalone.is_empty() && stratum == Stratum::Standalone {
        stratum = Stratum::Plain;
    }

    let n_joins = match stratum {
        Stratum::SingleContextual => pick_weighted(rng, &[60, 40]),
        Stratum::Linked => 2 + pick_weighted(rng, &[55, 45]),
        _ => pick_weighted(rng, &[45, 20, 20, 15]),
    };
    let mut aux = AUX_TABLES.to_vec();
    aux.shuffle(rng);
    aux.truncate(n_joins);

    let mut extras: Vec<Col> = pools.plain.iter().map(|c| ("p", c.clone())).collect();
    for t in &aux {
        extras.extend(t.group_columns.iter().map(|c| (t.alias, c.to_string())));
    }
    extras.shuffle(rng);
    let pick = |rng: &mut ChaCha8Rng, pool: &[String], k: usize| -> Vec<Col> {
        pool.choose_multiple(rng, k).map(|c| ("p", c.clone())).collect()
    };

    let mut group: Vec<Col> = match stratum {
        Stratum::Plain => Vec::new(),
        Stratum::SingleContextual | Stratum::Linked => pick(rng, &pools.contextual, 1),
        Stratum::Combination => {
            let k = rng.gen_range(2..=pools.contextual.len().max(2));
            pick(rng, &pools.contextual, k)
        }
        Stratum::Standalone => {
            let mut g = pick(rng, &pools.standalone, 1);
            // other sensitive columns may ride along
            let mut rest: Vec<String> =
                pools.standalone.iter().chain(&pools.contextual).filter(|c| *c != &g[0].1).cloned().collect();
            rest.shuffle(rng);
            let k = pick_weighted(rng, &[60, 30, 10]).min(rest.len());
            g.extend(rest.into_iter().take(k).map(|c| ("p", c)));
            g
        }
    };
    let n_extra = match stratum {
        Stratum::Plain => pick_weighted(rng, &[30, 40, 20, 10]),
        _ => pick_weighted(rng, &[55, 30, 15]),
    };
    group.extend(extras.into_iter().take(n_extra));
    group.shuffle(rng);

    let mut aggs: Vec<&str> = AGGREGATES.to_vec();
    aggs.shuffle(rng);
    aggs.truncate(if rng.gen_bool(0.25) { 2 } else { 1 });

    let mut predicates: Vec<&str> = Vec::new();
    if rng.gen_bool(0.5) {
        let mut choices: Vec<&str> = BASE_PREDICATES.to_vec();
        for t in &aux {
            choices.extend_from_slice(t.predicates);
        }
        choices.shuffle(rng);
        predicates.extend(choices.into_iter().take(rng.gen_range(1..=2)));
    }

    let shape = if group.is_empty() {
        Shape::Flat
    } else {
        match pick_weighted(rng, &[76, 10, 7, 7]) {
            0 => Shape::Flat,
            1 => Shape::Ordinal,
            2 => Shape::Cte,
            _ => Shape::Subquery,
        }
    };
    let qualify = rng.gen_bool(0.5);
    let having = !group.is_empty() && rng.gen_bool(0.15);
    let semicolon = rng.gen_bool(0.5);

    let mut from = format!("{} p", schema.table);
    for t in &aux {
        let _ = write!(from, " JOIN {} {} ON {}.patient_id = p.patient_id", t.name, t.alias, t.alias);
    }
    let where_clause =
        if predicates.is_empty() { String::new() } else { format!(" WHERE {}", predicates.join(" AND ")) };

    let render_col = |(alias, name): &Col| {
        if *alias != "p" || qualify {
            format!("{alias}.{name}")
        } else {
            name.clone()
        }
    };

    let (sql, template) = match shape {
        Shape::Flat | Shape::Ordinal => {
            let cols: Vec<String> = group.iter().map(render_col).collect();
            let mut select: Vec<String> = cols.clone();
            select.extend(aggs.iter().map(|a| a.to_string()));
            let mut sql = format!("SELECT {} FROM {from}{where_clause}", select.join(", "));
            let template = if group.is_empty() {
                "total"
            } else if shape == Shape::Ordinal {
                let ordinals: Vec<String> = (1..=cols.len()).map(|i| i.to_string()).collect();
                let _ = write!(sql, " GROUP BY {}", ordinals.join(", "));
                "ordinal"
            } else {
                let _ = write!(sql, " GROUP BY {}", cols.join(", "));
                "grouped"
            };
            (sql, template)
        }
        Shape::Cte | Shape::Subquery => {
            let mut inner_cols: Vec<String> = group.iter().map(|c| format!("{}.{}", c.0, c.1)).collect();
            inner_cols.push("p.patient_id".into());
            inner_cols.push("p.wait_time".into());
            let inner = format!("SELECT {} FROM {from}{where_clause}", inner_cols.join(", "));
            let outer_cols: Vec<String> = group.iter().map(|c| c.1.clone()).collect();
            let outer_aggs: Vec<String> = aggs.iter().map(|a| a.replace("p.", "")).collect();
            let mut select = outer_cols.clone();
            select.extend(outer_aggs);
            let group_by = outer_cols.join(", ");
            if shape == Shape::Cte {
                (
                    format!("WITH base AS ({inner}) SELECT {} FROM base GROUP BY {group_by}", select.join(", ")),
                    "cte",
                )
            } else {
                (format!("SELECT {} FROM ({inner}) s GROUP BY {group_by}", select.join(", ")), "subquery")
            }
        }
    };
    let mut sql = sql;
    if having {
        sql.push_str(" HAVING COUNT(*) >= 11");
    }
    if semicolon {
        sql.push(';');
    }
    (sql, template)
}

/// Seeded corpus of `n` entries: the three reference queries followed by
/// generated queries.
pub fn generate_corpus(n: usize, seed: u64, schema: &SchemaDef) -> Result<Vec<CorpusEntry>> {
    generate_corpus_with(n, seed, schema, &SensitiveLexicon::default())
}

pub fn generate_corpus_with(
    n: usize,
    seed: u64,
    schema: &SchemaDef,
    lexicon: &SensitiveLexicon,
) -> Result<Vec<CorpusEntry>> {
    if n < MIN_CORPUS {
        return Err(Error::InvalidCount(n));
    }
    let cap = (MAX_CLASS_SHARE * n as f64).floor() as usize;
    let mut class_counts = [0usize; 2];
    let mut entries = Vec::with_capacity(n);

    for (id, sql, _) in reference_queries() {
        let label = label_oracle(&parse_sql(sql)?, lexicon);
        class_counts[label as usize] += 1;
        entries.push(CorpusEntry { query_id: id.into(), label, template_id: "reference".into(), sql: sql.into() });
    }

    let pools = ColumnPools::new(schema, lexicon);
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut next_id = 0usize;
    while entries.len() < n {
        let (sql, template) = compose(&mut rng, schema, &pools);
        let summary = parse_sql(&sql)?;
        let label = label_oracle(&summary, lexicon);
        if class_counts[label as usize] >= cap {
            continue;
        }
        class_counts[label as usize] += 1;
        entries.push(CorpusEntry {
            query_id: format!("G-{next_id:05}"),
            label,
            template_id: template.into(),
            sql,
        });
        next_id += 1;
    }
    Ok(entries)
}

/// One JSON object per line: `query_id`, `label`, `template_id`, `sql`.
pub fn corpus_to_string(entries: &[CorpusEntry]) -> String {
    let mut out = String::new();
    for e in entries {
        out.push_str(&serde_json::to_string(e).expect("corpus entry serializes"));
        out.push('\n');
    }
    out
}

pub fn parse_corpus(text: &str) -> Result<Vec<CorpusEntry>> {
    let mut entries = Vec::new();
    for (i, line) in text.lines().enumerate() {
        if line.trim().is_empty() {
            continue;
        }
        let entry: CorpusEntry = serde_json::from_str(line)
            .map_err(|e| Error::Corpus { line: i + 1, message: e.to_string() })?;
        if entry.label > 1 {
            return Err(Error::Corpus { line: i + 1, message: format!("label {} is not 0/1", entry.label) });
        }
        entries.push(entry);
    }
    Ok(entries)
}

pub fn write_corpus(entries: &[CorpusEntry], path: &Path) -> Result<()> {
    std::fs::write(path, corpus_to_string(entries)).map_err(|e| Error::io(path, e))
}

pub fn read_corpus(path: &Path) -> Result<Vec<CorpusEntry>> {
    let text = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
    parse_corpus(&text)
}
