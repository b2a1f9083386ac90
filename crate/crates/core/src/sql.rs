//! SQL frontend: parses a metric definition into a [`QuerySummary`] and
//! produces the literal-masked token stream consumed by the embedder.
//!
//! Parsing targets the PostgreSQL dialect. Columns found inside CTE bodies
//! and subqueries are folded into the outermost summary, in order of first
//! appearance in the query text.

use std::collections::HashSet;
use std::ops::ControlFlow;

use serde::{Deserialize, Serialize};
use sqlparser::ast::{
    Expr, GroupByExpr, ObjectName, Query, Select, SelectItem, Statement, TableFactor,
    Value, Visit, Visitor,
};
use sqlparser::dialect::PostgreSqlDialect;
use sqlparser::parser::{Parser, ParserError};

use crate::error::{Error, Result};

/// Synthetic select column emitted for `SELECT *` and `t.*`.
pub const STAR_COLUMN: &str = "<star>";
/// Mask token for string literals.
pub const STR_TOKEN: &str = "<str>";
/// Mask token for numeric literals.
pub const NUM_TOKEN: &str = "<num>";

const AGGREGATES: [&str; 5] = ["COUNT", "SUM", "AVG", "MIN", "MAX"];

/// Structural digest of one parsed SELECT query.
#[derive(Debug, Clone, PartialEq, Eq, Default, Serialize, Deserialize)]
pub struct QuerySummary {
    pub tables: Vec<String>,
    pub join_count: usize,
    pub group_by_columns: Vec<String>,
    pub select_columns: Vec<String>,
    pub aggregate_functions: Vec<String>,
    pub where_columns: Vec<String>,
    pub subquery_depth: usize,
    pub cte_count: usize,
    pub window_fn_count: usize,
    pub reduced_confidence: bool,
}

impl QuerySummary {
    /// Every column name mentioned anywhere in the summary.
    pub fn all_columns(&self) -> impl Iterator<Item = &str> {
        self.group_by_columns
            .iter()
            .chain(&self.select_columns)
            .chain(&self.where_columns)
            .map(String::as_str)
    }
}

/// Parse one SELECT statement into its structural digest.
pub fn parse_sql(query_text: &str) -> Result<QuerySummary> {
    if query_text.trim().is_empty() {
        return Err(Error::EmptyQuery);
    }
    let statements = Parser::parse_sql(&PostgreSqlDialect {}, query_text)
        .map_err(|e| syntax_error(query_text, e))?;
    let statement = match statements.as_slice() {
        [] => {
            return Err(Error::Syntax { offset: 0, message: "no statement found".into() });
        }
        [one] => one,
        _ => {
            return Err(Error::UnsupportedStatement(
                "multiple statements; one metric definition per input".into(),
            ))
        }
    };
    let query = match statement {
        Statement::Query(q) => q,
        other => return Err(Error::UnsupportedStatement(statement_keyword(other))),
    };

    let mut walker = StructureWalker::default();
    let _ = query.visit(&mut walker);
    let summary = walker.finish();
    if summary.tables.is_empty() {
        return Err(Error::UnsupportedStatement("query reads no table".into()));
    }
    Ok(summary)
}

fn statement_keyword(statement: &Statement) -> String {
    let text = statement.to_string();
    let word = text.split_whitespace().next().unwrap_or("statement").to_uppercase();
    format!("{word} (only SELECT metric definitions are analyzed)")
}

fn syntax_error(text: &str, err: ParserError) -> Error {
    let message = match err {
        ParserError::TokenizerError(m) | ParserError::ParserError(m) => m,
        ParserError::RecursionLimitExceeded => "nesting exceeds parser recursion limit".into(),
    };
    // errors raised at end of input carry no location
    let offset = location_offset(text, &message).unwrap_or(text.trim_end().len());
    Error::Syntax { offset, message }
}

/// Converts the parser's trailing "at Line: L, Column: C" into a byte offset.
fn location_offset(text: &str, message: &str) -> Option<usize> {
    let tail = &message[message.rfind("Line: ")? + "Line: ".len()..];
    let (line, rest) = tail.split_once(", Column: ")?;
    let line: usize = line.trim().parse().ok()?;
    let column: usize = rest.trim().parse().ok()?;

    let mut offset = 0;
    for (i, l) in text.split_inclusive('\n').enumerate() {
        if i + 1 == line {
            let within = l
                .char_indices()
                .nth(column.saturating_sub(1))
                .map(|(b, _)| b)
                .unwrap_or(l.len());
            return Some(offset + within);
        }
        offset += l.len();
    }
    Some(text.len())
}

fn ident_name(name: &ObjectName) -> Option<String> {
    name.0.last().and_then(|p| p.as_ident()).map(|i| i.value.to_lowercase())
}

fn function_name(name: &ObjectName) -> String {
    ident_name(name).unwrap_or_default().to_uppercase()
}

fn push_unique(list: &mut Vec<String>, item: String) {
    if !item.is_empty() && !list.contains(&item) {
        list.push(item);
    }
}

fn bare_column(expr: &Expr) -> Option<String> {
    match expr {
        Expr::Identifier(ident) => Some(ident.value.to_lowercase()),
        Expr::CompoundIdentifier(parts) => parts.last().map(|i| i.value.to_lowercase()),
        Expr::Nested(inner) => bare_column(inner),
        _ => None,
    }
}

/// Walks the whole statement. Function counts are global; column sets are
/// collected per SELECT block.
#[derive(Default)]
struct StructureWalker {
    depth_stack: Vec<usize>,
    cte_bodies: HashSet<*const Query>,
    cte_names: HashSet<String>,
    max_depth: usize,
    summary: QuerySummary,
}

impl StructureWalker {
    fn finish(mut self) -> QuerySummary {
        let cte_names = &self.cte_names;
        self.summary.tables.retain(|t| !cte_names.contains(t));
        self.summary.subquery_depth = self.max_depth;
        let s = &mut self.summary;
        s.reduced_confidence = s.cte_count > 0 || s.window_fn_count > 0 || s.subquery_depth > 1;
        self.summary
    }

    fn analyze_select(&mut self, select: &Select) {
        let s = &mut self.summary;

        s.join_count += select.from.len().saturating_sub(1);
        for twj in &select.from {
            s.join_count += count_joins(&twj.relation) + twj.joins.len();
            for join in &twj.joins {
                s.join_count += count_joins(&join.relation);
            }
        }

        for item in &select.projection {
            match item {
                SelectItem::UnnamedExpr(e) | SelectItem::ExprWithAlias { expr: e, .. } => {
                    for col in columns_of(e, true) {
                        push_unique(&mut s.select_columns, col);
                    }
                }
                SelectItem::ExprWithAliases { expr, .. } => {
                    for col in columns_of(expr, true) {
                        push_unique(&mut s.select_columns, col);
                    }
                }
                SelectItem::Wildcard(_) | SelectItem::QualifiedWildcard(..) => {
                    push_unique(&mut s.select_columns, STAR_COLUMN.to_string());
                }
            }
        }

        for predicate in select.selection.iter().chain(select.having.iter()) {
            for col in columns_of(predicate, false) {
                push_unique(&mut s.where_columns, col);
            }
        }

        if let GroupByExpr::Expressions(exprs, _) = &select.group_by {
            for expr in exprs {
                for col in group_by_columns(expr, &select.projection) {
                    push_unique(&mut s.group_by_columns, col);
                }
            }
        }
    }
}

impl Visitor for StructureWalker {
    type Break = ();

    fn pre_visit_query(&mut self, query: &Query) -> ControlFlow<()> {
        let ptr = query as *const Query;
        let depth = match self.depth_stack.last() {
            None => 0,
            // CTE bodies sit beside the main query, not beneath it.
            Some(&parent) if self.cte_bodies.contains(&ptr) => parent,
            Some(&parent) => parent + 1,
        };
        self.max_depth = self.max_depth.max(depth);
        self.depth_stack.push(depth);
        if let Some(with) = &query.with {
            self.summary.cte_count += with.cte_tables.len();
            for cte in &with.cte_tables {
                self.cte_bodies.insert(&*cte.query as *const Query);
                self.cte_names.insert(cte.alias.name.value.to_lowercase());
            }
        }
        ControlFlow::Continue(())
    }

    fn post_visit_query(&mut self, _query: &Query) -> ControlFlow<()> {
        self.depth_stack.pop();
        ControlFlow::Continue(())
    }

    fn pre_visit_select(&mut self, select: &Select) -> ControlFlow<()> {
        self.analyze_select(select);
        ControlFlow::Continue(())
    }

    fn pre_visit_relation(&mut self, relation: &ObjectName) -> ControlFlow<()> {
        if let Some(name) = ident_name(relation) {
            push_unique(&mut self.summary.tables, name);
        }
        ControlFlow::Continue(())
    }

    fn pre_visit_expr(&mut self, expr: &Expr) -> ControlFlow<()> {
        if let Expr::Function(f) = expr {
            if f.over.is_some() {
                self.summary.window_fn_count += 1;
            } else {
                let name = function_name(&f.name);
                if AGGREGATES.contains(&name.as_str()) {
                    push_unique(&mut self.summary.aggregate_functions, name);
                }
            }
        }
        ControlFlow::Continue(())
    }
}

fn count_joins(factor: &TableFactor) -> usize {
    match factor {
        TableFactor::NestedJoin { table_with_joins, .. } => {
            table_with_joins.joins.len()
                + count_joins(&table_with_joins.relation)
                + table_with_joins.joins.iter().map(|j| count_joins(&j.relation)).sum::<usize>()
        }
        _ => 0,
    }
}

fn group_by_columns(expr: &Expr, projection: &[SelectItem]) -> Vec<String> {
    if let Expr::Value(v) = expr {
        if let Value::Number(n, _) = &v.value {
            if let Ok(k) = n.parse::<usize>() {
                let target = k.checked_sub(1).and_then(|i| projection.get(i)).and_then(|item| {
                    match item {
                        SelectItem::UnnamedExpr(e) | SelectItem::ExprWithAlias { expr: e, .. } => {
                            bare_column(e)
                        }
                        _ => None,
                    }
                });
                return vec![target.unwrap_or_else(|| format!("expr_{k}"))];
            }
        }
    }
    if let Expr::Identifier(ident) = expr {
        let name = ident.value.to_lowercase();
        let aliased = projection.iter().find_map(|item| match item {
            SelectItem::ExprWithAlias { expr, alias } if alias.value.to_lowercase() == name => {
                Some(expr)
            }
            _ => None,
        });
        if let Some(aliased) = aliased {
            return columns_of(aliased, false);
        }
    }
    columns_of(expr, false)
}

/// Column identifiers referenced by `expr` outside any nested query. With
/// `skip_aggregated`, identifiers inside aggregate calls are ignored.
fn columns_of(expr: &Expr, skip_aggregated: bool) -> Vec<String> {
    let mut scan = ColumnScan { skip_aggregated, query_depth: 0, agg_depth: 0, columns: Vec::new() };
    let _ = expr.visit(&mut scan);
    scan.columns
}

struct ColumnScan {
    skip_aggregated: bool,
    query_depth: usize,
    agg_depth: usize,
    columns: Vec<String>,
}

impl ColumnScan {
    fn is_aggregate(expr: &Expr) -> bool {
        matches!(expr, Expr::Function(f)
            if f.over.is_none() && AGGREGATES.contains(&function_name(&f.name).as_str()))
    }
}

impl Visitor for ColumnScan {
    type Break = ();

    fn pre_visit_query(&mut self, _query: &Query) -> ControlFlow<()> {
        self.query_depth += 1;
        ControlFlow::Continue(())
    }

    fn post_visit_query(&mut self, _query: &Query) -> ControlFlow<()> {
        self.query_depth -= 1;
        ControlFlow::Continue(())
    }

    fn pre_visit_expr(&mut self, expr: &Expr) -> ControlFlow<()> {
        if self.query_depth > 0 {
            return ControlFlow::Continue(());
        }
        if Self::is_aggregate(expr) {
            self.agg_depth += 1;
        } else if !(self.skip_aggregated && self.agg_depth > 0) {
            if let Some(col) = match expr {
                Expr::Identifier(_) | Expr::CompoundIdentifier(_) => bare_column(expr),
                _ => None,
            } {
                push_unique(&mut self.columns, col);
            }
        }
        ControlFlow::Continue(())
    }

    fn post_visit_expr(&mut self, expr: &Expr) -> ControlFlow<()> {
        if self.query_depth == 0 && Self::is_aggregate(expr) {
            self.agg_depth -= 1;
        }
        ControlFlow::Continue(())
    }
}

/// Lowercased, literal-masked token stream of a query.
#[derive(Debug, Clone, PartialEq, Eq, Default, Serialize, Deserialize)]
pub struct NormalizedTokens {
    pub tokens: Vec<String>,
}

impl NormalizedTokens {
    /// Tokens joined by single spaces; normalizing this text again yields
    /// the same stream.
    pub fn detokenize(&self) -> String {
        self.tokens.join(" ")
    }

    pub fn is_empty(&self) -> bool {
        self.tokens.is_empty()
    }
}

/// Tokenize raw query text: lowercase, split on non-`[a-z0-9_]` boundaries,
/// mask string and numeric literals, drop comments. Never fails.
pub fn normalize_query(query_text: &str) -> NormalizedTokens {
    let lower = query_text.to_lowercase();
    let chars: Vec<char> = lower.chars().collect();
    let mut tokens = Vec::new();
    let mut i = 0;
    let is_word = |c: char| c.is_ascii_lowercase() || c.is_ascii_digit() || c == '_';

    while i < chars.len() {
        let c = chars[i];
        if c.is_whitespace() || c == '"' || c == '`' {
            i += 1;
        } else if c == '-' && chars.get(i + 1) == Some(&'-') {
            while i < chars.len() && chars[i] != '\n' {
                i += 1;
            }
        } else if c == '/' && chars.get(i + 1) == Some(&'*') {
            i += 2;
            while i < chars.len() && !(chars[i] == '*' && chars.get(i + 1) == Some(&'/')) {
                i += 1;
            }
            i = (i + 2).min(chars.len());
        } else if c == '\'' {
            i += 1;
            loop {
                match chars.get(i) {
                    None => break,
                    Some('\'') if chars.get(i + 1) == Some(&'\'') => i += 2,
                    Some('\'') => {
                        i += 1;
                        break;
                    }
                    Some(_) => i += 1,
                }
            }
            tokens.push(STR_TOKEN.to_string());
        } else if c == '<' && matches_mask(&chars[i..]) {
            tokens.push(chars[i..i + 5].iter().collect());
            i += 5;
        } else if c.is_ascii_digit() {
            while i < chars.len() && (is_word(chars[i]) || chars[i] == '.') {
                i += 1;
            }
            tokens.push(NUM_TOKEN.to_string());
        } else if is_word(c) {
            let start = i;
            while i < chars.len() && is_word(chars[i]) {
                i += 1;
            }
            tokens.push(chars[start..i].iter().collect());
        } else {
            tokens.push(c.to_string());
            i += 1;
        }
    }
    NormalizedTokens { tokens }
}

fn matches_mask(rest: &[char]) -> bool {
    [STR_TOKEN, NUM_TOKEN].iter().any(|mask| {
        rest.len() >= mask.len() && mask.chars().zip(rest).all(|(a, &b)| a == b)
    })
}
