//! Experiment records and their CSV / JSON forms.

use super::HarnessError;
use crate::oracles::QueryCounts;
use crate::graph::Vertex;
use serde::{Deserialize, Serialize};
use std::fmt::Write as _;

/// One trial. Field order is the CSV column order.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ExperimentRecord {
    pub trial: u64,
    pub seed: u64,
    pub searcher: String,
    pub n: usize,
    pub p1: Option<f64>,
    pub epsilon: f64,
    pub rho: f64,
    pub queries_total: u64,
    /// `kind=count` pairs joined by `;`, e.g. `direction=12;edge=40`.
    pub queries_by_type: String,
    pub success: bool,
    /// Found vertices joined by `;`.
    pub found: String,
    /// Closed-form cap, or the floor for adversary games.
    pub bound_cap: u64,
    pub bound_ok: bool,
    pub millis: u64,
}

impl ExperimentRecord {
    /// Equality ignoring wall time.
    pub fn same_outcome(&self, other: &ExperimentRecord) -> bool {
        ExperimentRecord { millis: 0, ..self.clone() } == ExperimentRecord { millis: 0, ..other.clone() }
    }

    pub fn found_vertices(&self) -> Vec<Vertex> {
        self.found.split(';').filter(|s| !s.is_empty()).filter_map(|s| s.parse().ok()).collect()
    }
}

pub fn join_counts(counts: &QueryCounts) -> String {
    counts.nonzero().map(|(k, c)| format!("{}={c}", k.name())).collect::<Vec<_>>().join(";")
}

pub fn join_vertices(vs: &[Vertex]) -> String {
    vs.iter().map(|v| v.to_string()).collect::<Vec<_>>().join(";")
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Summary {
    pub trials: usize,
    pub successes: usize,
    pub success_rate: f64,
    pub bound_violations: usize,
    pub queries_min: u64,
    pub queries_median: u64,
    pub queries_p90: u64,
    pub queries_max: u64,
    pub queries_mean: f64,
}

/// Nearest-rank quantile of a sorted slice.
fn quantile(sorted: &[u64], q: f64) -> u64 {
    if sorted.is_empty() {
        return 0;
    }
    let rank = ((q * sorted.len() as f64).ceil() as usize).clamp(1, sorted.len());
    sorted[rank - 1]
}

pub fn summarize(records: &[ExperimentRecord]) -> Summary {
    let mut q: Vec<u64> = records.iter().map(|r| r.queries_total).collect();
    q.sort_unstable();
    let successes = records.iter().filter(|r| r.success).count();
    let trials = records.len();
    Summary {
        trials,
        successes,
        success_rate: if trials == 0 { 0.0 } else { successes as f64 / trials as f64 },
        bound_violations: records.iter().filter(|r| !r.bound_ok).count(),
        queries_min: q.first().copied().unwrap_or(0),
        queries_median: quantile(&q, 0.5),
        queries_p90: quantile(&q, 0.9),
        queries_max: q.last().copied().unwrap_or(0),
        queries_mean: if trials == 0 { 0.0 } else { q.iter().sum::<u64>() as f64 / trials as f64 },
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum OutputFormat {
    Csv,
    Json,
}

impl std::str::FromStr for OutputFormat {
    type Err = HarnessError;
    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s {
            "csv" => Ok(OutputFormat::Csv),
            "json" => Ok(OutputFormat::Json),
            _ => Err(HarnessError::UnknownName { what: "format", name: s.to_string() }),
        }
    }
}

#[derive(Serialize, Deserialize)]
struct JsonDoc {
    records: Vec<ExperimentRecord>,
    summary: Summary,
}

/// Records as CSV, followed by the summary as `# key=value` lines.
pub fn to_csv(records: &[ExperimentRecord]) -> Result<String, HarnessError> {
    let mut w = csv::Writer::from_writer(Vec::new());
    for r in records {
        w.serialize(r)?;
    }
    if records.is_empty() {
        w.write_record(CSV_COLUMNS)?;
    }
    let bytes = w.into_inner().map_err(|e| HarnessError::Io(e.to_string()))?;
    let mut out = String::from_utf8(bytes).expect("csv output is utf-8");
    let s = summarize(records);
    let value = serde_json::to_value(&s)?;
    for (k, v) in value.as_object().expect("summary is an object") {
        let _ = writeln!(out, "# {k}={v}");
    }
    Ok(out)
}

pub const CSV_COLUMNS: [&str; 14] = [
    "trial",
    "seed",
    "searcher",
    "n",
    "p1",
    "epsilon",
    "rho",
    "queries_total",
    "queries_by_type",
    "success",
    "found",
    "bound_cap",
    "bound_ok",
    "millis",
];

pub fn to_json(records: &[ExperimentRecord]) -> Result<String, HarnessError> {
    let doc = JsonDoc { records: records.to_vec(), summary: summarize(records) };
    Ok(serde_json::to_string_pretty(&doc)?)
}

pub fn render(records: &[ExperimentRecord], format: OutputFormat) -> Result<String, HarnessError> {
    match format {
        OutputFormat::Csv => to_csv(records),
        OutputFormat::Json => to_json(records),
    }
}

/// Reads either format back; JSON is recognised by a leading `{`.
pub fn parse_records(text: &str) -> Result<Vec<ExperimentRecord>, HarnessError> {
    if text.trim_start().starts_with('{') {
        let doc: JsonDoc = serde_json::from_str(text)?;
        return Ok(doc.records);
    }
    let mut rdr = csv::ReaderBuilder::new().comment(Some(b'#')).from_reader(text.as_bytes());
    let mut out = Vec::new();
    for r in rdr.deserialize() {
        out.push(r?);
    }
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn rec(trial: u64, q: u64, ok: bool) -> ExperimentRecord {
        ExperimentRecord {
            trial,
            seed: 99,
            searcher: "gamma".into(),
            n: 64,
            p1: if trial % 2 == 0 { None } else { Some(0.75) },
            epsilon: 0.5,
            rho: 1.0,
            queries_total: q,
            queries_by_type: format!("direction={q}"),
            success: ok,
            found: "3;17".into(),
            bound_cap: 7,
            bound_ok: q <= 7,
            millis: 3,
        }
    }

    #[test]
    fn csv_and_json_carry_the_same_records() {
        let rs: Vec<_> = (0..5).map(|i| rec(i, i + 4, i != 2)).collect();
        let csv = to_csv(&rs).unwrap();
        assert!(csv.starts_with(&CSV_COLUMNS.join(",")));
        assert!(csv.contains("# success_rate=0.8"));
        assert_eq!(parse_records(&csv).unwrap(), rs);
        assert_eq!(parse_records(&to_json(&rs).unwrap()).unwrap(), rs);
        assert_eq!(rs[0].found_vertices(), vec![3, 17]);
    }

    #[test]
    fn summary_quantiles() {
        let rs: Vec<_> = (0..10).map(|i| rec(i, i + 1, true)).collect();
        let s = summarize(&rs);
        assert_eq!((s.queries_min, s.queries_median, s.queries_p90, s.queries_max), (1, 5, 9, 10));
        assert_eq!(s.bound_violations, 3);
        assert!(parse_records(&to_csv(&[]).unwrap()).unwrap().is_empty());
    }
}
