//! Deterministic report serialization. Floats are written with six
//! significant digits so identical inputs give byte-identical files.

use std::io::Write;
use std::path::Path;

use serde::Serialize;
use serde_json::Value;

use crate::cooccur::{FrequentItemset, Transaction};
use crate::error::PipelineError;
use crate::model::ElementKind;
use crate::pipeline::{GroupSummary, MapMetrics};
use crate::stats::{CorrelationResult, TestResult};

/// `%g`-style formatting with six significant digits.
pub fn fmt_sig(v: f64) -> String {
    if v == 0.0 {
        return "0".into();
    }
    if !v.is_finite() {
        return if v.is_nan() { "nan".into() } else if v > 0.0 { "inf".into() } else { "-inf".into() };
    }
    let sci = format!("{v:.5e}");
    let (mantissa, exp) = sci.split_once('e').expect("exponent present");
    let exp: i32 = exp.parse().expect("integer exponent");
    if !(-4..6).contains(&exp) {
        let mantissa = trim_zeros(mantissa);
        return format!("{mantissa}e{exp}");
    }
    let decimals = (5 - exp).max(0) as usize;
    trim_zeros(&format!("{v:.decimals$}")).to_string()
}

fn trim_zeros(s: &str) -> &str {
    if s.contains('.') {
        s.trim_end_matches('0').trim_end_matches('.')
    } else {
        s
    }
}

fn round_floats(value: &mut Value) {
    match value {
        Value::Number(n) if n.is_f64() => {
            let v = n.as_f64().expect("f64");
            let rounded: f64 = fmt_sig(v).parse().unwrap_or(v);
            if let Some(num) = serde_json::Number::from_f64(rounded) {
                *n = num;
            }
        }
        Value::Array(items) => items.iter_mut().for_each(round_floats),
        Value::Object(map) => map.values_mut().for_each(round_floats),
        _ => {}
    }
}

/// One compact JSON object per line, floats rounded.
pub fn to_jsonl<T: Serialize>(rows: &[T]) -> String {
    let mut out = String::new();
    for row in rows {
        let mut value = serde_json::to_value(row).expect("report rows serialize");
        round_floats(&mut value);
        out.push_str(&value.to_string());
        out.push('\n');
    }
    out
}

pub fn to_pretty_json<T: Serialize>(value: &T) -> String {
    let mut v = serde_json::to_value(value).expect("serializable");
    round_floats(&mut v);
    let mut s = serde_json::to_string_pretty(&v).expect("serializable");
    s.push('\n');
    s
}

pub fn metrics_jsonl(metrics: &[MapMetrics]) -> String {
    to_jsonl(metrics)
}

pub fn parse_metrics_jsonl(text: &str) -> Result<Vec<MapMetrics>, PipelineError> {
    text.lines()
        .enumerate()
        .filter(|(_, l)| !l.trim().is_empty())
        .map(|(i, l)| {
            serde_json::from_str(l).map_err(|e| PipelineError::SchemaViolation { line: i + 1, message: e.to_string() })
        })
        .collect()
}

fn opt(v: Option<f64>) -> String {
    v.map(fmt_sig).unwrap_or_default()
}

fn csv_bytes(header: &[String], rows: &[Vec<String>]) -> Vec<u8> {
    let mut w = csv::WriterBuilder::new().terminator(csv::Terminator::Any(b'\n')).from_writer(Vec::new());
    w.write_record(header).expect("in-memory write");
    for row in rows {
        w.write_record(row).expect("in-memory write");
    }
    w.into_inner().expect("in-memory flush")
}

fn key_cells(s: &GroupSummary) -> [String; 3] {
    [
        s.key.language.map_or("*".into(), |l| l.to_string()),
        s.key.year.map_or("*".into(), |y| y.to_string()),
        s.key.journal.clone().unwrap_or_else(|| "*".into()),
    ]
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum SummaryFormat {
    /// One row per group, one column per statistic.
    #[default]
    Wide,
    /// One row per group and indicator.
    Long,
    Jsonl,
}

pub const STAT_COLUMNS: [&str; 5] = ["n", "mean", "median", "q1", "q3"];

/// Column order: `language, year, journal, count, failed`, then for every
/// summarized indicator `<name>_{n,mean,median,q1,q3}`, then
/// `presence_<kind>` for the ten kinds, then `map_to_article_ratio`.
pub fn summaries_wide_csv(summaries: &[GroupSummary]) -> Vec<u8> {
    let mut header: Vec<String> = ["language", "year", "journal", "count", "failed"].map(String::from).to_vec();
    if let Some(first) = summaries.first() {
        for ind in &first.indicators {
            header.extend(STAT_COLUMNS.iter().map(|c| format!("{}_{c}", ind.indicator)));
        }
    }
    header.extend(ElementKind::ALL.iter().map(|k| format!("presence_{k}")));
    header.push("map_to_article_ratio".into());

    let rows: Vec<Vec<String>> = summaries
        .iter()
        .map(|s| {
            let mut row: Vec<String> = key_cells(s).to_vec();
            row.push(s.count.to_string());
            row.push(s.failed.to_string());
            for ind in &s.indicators {
                row.push(ind.n.to_string());
                row.extend([ind.mean, ind.median, ind.q1, ind.q3].map(opt));
            }
            row.extend(s.presence.iter().map(|&p| fmt_sig(p)));
            row.push(opt(s.map_to_article_ratio));
            row
        })
        .collect();
    csv_bytes(&header, &rows)
}

/// Tidy layout: `language, year, journal, indicator, n, mean, median, q1, q3`.
/// Presence ratios appear as indicators `presence_<kind>` with `n` = count.
pub fn summaries_long_csv(summaries: &[GroupSummary]) -> Vec<u8> {
    let header: Vec<String> = ["language", "year", "journal", "indicator"]
        .iter()
        .chain(STAT_COLUMNS.iter())
        .map(|s| s.to_string())
        .collect();
    let mut rows = Vec::new();
    for s in summaries {
        let key = key_cells(s);
        for ind in &s.indicators {
            let mut row = key.to_vec();
            row.push(ind.indicator.clone());
            row.push(ind.n.to_string());
            row.extend([ind.mean, ind.median, ind.q1, ind.q3].map(opt));
            rows.push(row);
        }
        for (kind, p) in ElementKind::ALL.iter().zip(s.presence) {
            let mut row = key.to_vec();
            row.push(format!("presence_{kind}"));
            row.push(s.count.to_string());
            row.push(fmt_sig(p));
            row.extend([String::new(), String::new(), String::new()]);
            rows.push(row);
        }
    }
    csv_bytes(&header, &rows)
}

pub fn emit_summaries(summaries: &[GroupSummary], format: SummaryFormat) -> Vec<u8> {
    match format {
        SummaryFormat::Wide => summaries_wide_csv(summaries),
        SummaryFormat::Long => summaries_long_csv(summaries),
        SummaryFormat::Jsonl => to_jsonl(summaries).into_bytes(),
    }
}

/// A labelled group of frequent itemsets with the transactions they came from.
pub struct ItemsetGroup<'a> {
    pub label: &'a str,
    pub transactions: &'a [Transaction],
    pub itemsets: &'a [FrequentItemset],
}

/// Columns: `group, size, items, support_count, support, multi_element_rate`.
/// `items` joins kinds with `+`; `multi_element_rate` is the share of maps
/// with at least two element kinds that hold the itemset.
pub fn itemsets_csv(groups: &[ItemsetGroup<'_>]) -> Vec<u8> {
    let header: Vec<String> = ["group", "size", "items", "support_count", "support", "multi_element_rate"]
        .map(String::from)
        .to_vec();
    let mut rows = Vec::new();
    for g in groups {
        let multi: Vec<&Transaction> = g.transactions.iter().filter(|t| t.items.len() >= 2).collect();
        for s in g.itemsets {
            let hits = multi.iter().filter(|t| s.items.is_subset_of(t.items)).count();
            let items: Vec<&str> = s.items.kinds().into_iter().map(ElementKind::as_str).collect();
            rows.push(vec![
                g.label.to_string(),
                s.items.len().to_string(),
                items.join("+"),
                s.support_count.to_string(),
                fmt_sig(s.support),
                if multi.is_empty() { String::new() } else { fmt_sig(hits as f64 / multi.len() as f64) },
            ]);
        }
    }
    csv_bytes(&header, &rows)
}

pub enum CompareOutcome {
    Tested(TestResult),
    /// The test could not run; the message says why.
    Skipped { n1: usize, n2: usize, p_value: Option<f64>, reason: String },
}

/// Columns: `indicator, n_zh, n_en, u, p_value, method, note`.
pub fn compare_csv(rows: &[(String, CompareOutcome)]) -> Vec<u8> {
    let header: Vec<String> = ["indicator", "n_zh", "n_en", "u", "p_value", "method", "note"].map(String::from).to_vec();
    let body = rows
        .iter()
        .map(|(name, outcome)| match outcome {
            CompareOutcome::Tested(t) => vec![
                name.clone(),
                t.n1.to_string(),
                t.n2.to_string(),
                fmt_sig(t.u_statistic),
                fmt_sig(t.p_value),
                serde_plain(&t.method),
                String::new(),
            ],
            CompareOutcome::Skipped { n1, n2, p_value, reason } => vec![
                name.clone(),
                n1.to_string(),
                n2.to_string(),
                String::new(),
                opt(*p_value),
                String::new(),
                reason.clone(),
            ],
        })
        .collect::<Vec<_>>();
    csv_bytes(&header, &body)
}

/// Columns: `language, indicator, n, rho, p_value, method, note`.
pub fn trend_csv(rows: &[(String, String, Result<CorrelationResult, String>)]) -> Vec<u8> {
    let header: Vec<String> = ["language", "indicator", "n", "rho", "p_value", "method", "note"].map(String::from).to_vec();
    let body = rows
        .iter()
        .map(|(lang, name, outcome)| match outcome {
            Ok(c) => vec![
                lang.clone(),
                name.clone(),
                c.n.to_string(),
                fmt_sig(c.rho),
                fmt_sig(c.p_value),
                serde_plain(&c.method),
                String::new(),
            ],
            Err(reason) => vec![lang.clone(), name.clone(), String::new(), String::new(), String::new(), String::new(), reason.clone()],
        })
        .collect::<Vec<_>>();
    csv_bytes(&header, &body)
}

fn serde_plain<T: Serialize>(v: &T) -> String {
    match serde_json::to_value(v) {
        Ok(Value::String(s)) => s,
        Ok(other) => other.to_string(),
        Err(_) => String::new(),
    }
}

/// Write through a temporary file in the target directory, then rename.
pub fn write_atomic(path: &Path, bytes: &[u8]) -> Result<(), PipelineError> {
    let dir = path.parent().filter(|p| !p.as_os_str().is_empty()).unwrap_or(Path::new("."));
    let io = |source| PipelineError::Io { path: path.to_path_buf(), source };
    std::fs::create_dir_all(dir).map_err(io)?;
    let mut tmp = tempfile::NamedTempFile::new_in(dir).map_err(io)?;
    tmp.write_all(bytes).map_err(io)?;
    tmp.as_file().sync_all().map_err(io)?;
    tmp.persist(path).map_err(|e| io(e.error))?;
    Ok(())
}
