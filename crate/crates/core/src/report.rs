//! Summary statistics over per-utterance metric reports.

use std::collections::{BTreeMap, BTreeSet};
use std::fmt;
use std::io::Write;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::metrics::{MetricReport, FLAG_CAPPED};

/// Summary of one metric over the utterances where it succeeded.
/// `std` is the population standard deviation.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SummaryRow {
    pub mean: f64,
    pub std: f64,
    pub median: f64,
    pub count: usize,
    pub capped_count: usize,
    /// Utterances where the metric was requested but failed.
    #[serde(default)]
    pub error_count: usize,
}

#[derive(Debug, Clone, PartialEq, Default, Serialize, Deserialize)]
pub struct SummaryMetadata {
    pub dataset: Option<String>,
    pub model: Option<String>,
    pub toolkit_version: String,
}

impl SummaryMetadata {
    pub fn new(dataset: Option<String>, model: Option<String>) -> Self {
        SummaryMetadata {
            dataset,
            model,
            toolkit_version: env!("CARGO_PKG_VERSION").to_string(),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SummaryTable {
    pub metadata: SummaryMetadata,
    pub rows: BTreeMap<String, SummaryRow>,
    /// Mean STOI ×100, the scale benchmark tables usually print.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub stoi_pct: Option<f64>,
}

fn percent(v: f64) -> f64 {
    (v * 100.0 * 1e9).round() / 1e9
}

fn summarize(mut values: Vec<f64>, capped_count: usize, error_count: usize) -> SummaryRow {
    // Sorting first makes every statistic independent of input order.
    values.sort_by(f64::total_cmp);
    let n = values.len();
    if n == 0 {
        return SummaryRow {
            mean: f64::NAN,
            std: f64::NAN,
            median: f64::NAN,
            count: 0,
            capped_count,
            error_count,
        };
    }
    let mean = values.iter().sum::<f64>() / n as f64;
    let var = values.iter().map(|v| (v - mean) * (v - mean)).sum::<f64>() / n as f64;
    let median = if n % 2 == 1 {
        values[n / 2]
    } else {
        (values[n / 2 - 1] + values[n / 2]) / 2.0
    };
    SummaryRow {
        mean,
        std: var.sqrt(),
        median,
        count: n,
        capped_count,
        error_count,
    }
}

/// Per-metric mean, population std and median, sorted by metric name.
pub fn aggregate(reports: &[MetricReport], metadata: SummaryMetadata) -> Result<SummaryTable> {
    if reports.is_empty() {
        return Err(Error::EmptyInput);
    }
    let mut values: BTreeMap<&str, (Vec<f64>, usize, usize)> = BTreeMap::new();
    for r in reports {
        for (name, &v) in &r.scores {
            let slot = values.entry(name).or_default();
            if v.is_finite() {
                slot.0.push(v);
                if r.has_flag(name, FLAG_CAPPED) {
                    slot.1 += 1;
                }
            }
        }
        for name in r.errors.keys() {
            values.entry(name).or_default().2 += 1;
        }
    }
    let rows: BTreeMap<String, SummaryRow> = values
        .into_iter()
        .map(|(name, (v, capped, errors))| (name.to_string(), summarize(v, capped, errors)))
        .collect();
    let stoi_pct = rows
        .get("stoi")
        .filter(|r| r.count > 0)
        .map(|r| percent(r.mean));
    Ok(SummaryTable {
        metadata,
        rows,
        stoi_pct,
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum ReportFormat {
    #[default]
    Csv,
    Json,
    Markdown,
}

impl fmt::Display for ReportFormat {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            ReportFormat::Csv => "csv",
            ReportFormat::Json => "json",
            ReportFormat::Markdown => "markdown",
        })
    }
}

impl FromStr for ReportFormat {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "csv" => Ok(ReportFormat::Csv),
            "json" => Ok(ReportFormat::Json),
            "markdown" | "md" => Ok(ReportFormat::Markdown),
            other => Err(Error::InvalidSpec(format!(
                "unknown report format {other:?}"
            ))),
        }
    }
}

fn csv_err(e: csv::Error) -> std::io::Error {
    std::io::Error::other(e)
}

/// Up to this many metrics, markdown puts metrics in columns.
pub const MARKDOWN_MAX_COLUMNS: usize = 6;

fn write_csv<W: Write>(table: &SummaryTable, out: W) -> std::io::Result<()> {
    let mut w = csv::Writer::from_writer(out);
    w.write_record(["metric", "mean", "std", "median", "count", "capped_count"])
        .map_err(csv_err)?;
    let mut row = |name: &str, r: &SummaryRow, scale: f64| {
        w.write_record([
            name.to_string(),
            (r.mean * scale).to_string(),
            (r.std * scale).to_string(),
            (r.median * scale).to_string(),
            r.count.to_string(),
            r.capped_count.to_string(),
        ])
        .map_err(csv_err)
    };
    for (name, r) in &table.rows {
        row(name, r, 1.0)?;
    }
    if let (Some(r), Some(_)) = (table.rows.get("stoi"), table.stoi_pct) {
        row("stoi_pct", r, 100.0)?;
    }
    w.flush()
}

fn write_markdown<W: Write>(table: &SummaryTable, mut out: W) -> std::io::Result<()> {
    let label = table.metadata.model.as_deref().unwrap_or("estimate");
    if let Some(d) = &table.metadata.dataset {
        writeln!(out, "Dataset: {d}\n")?;
    }
    let cell = |name: &str, r: &SummaryRow| {
        if name == "stoi" {
            format!("{:.2}", r.mean * 100.0)
        } else {
            format!("{:.2}", r.mean)
        }
    };
    if table.rows.len() <= MARKDOWN_MAX_COLUMNS {
        let names: Vec<String> = table
            .rows
            .keys()
            .map(|n| {
                if n == "stoi" {
                    "stoi (×100)".to_string()
                } else {
                    n.clone()
                }
            })
            .collect();
        writeln!(out, "| model | {} |", names.join(" | "))?;
        writeln!(out, "|---|{}", "---|".repeat(names.len()))?;
        let cells: Vec<String> = table.rows.iter().map(|(n, r)| cell(n, r)).collect();
        writeln!(out, "| {label} | {} |", cells.join(" | "))?;
    } else {
        writeln!(out, "| metric | mean | std | median | count | capped |")?;
        writeln!(out, "|---|---|---|---|---|---|")?;
        for (n, r) in &table.rows {
            writeln!(
                out,
                "| {n} | {:.4} | {:.4} | {:.4} | {} | {} |",
                r.mean, r.std, r.median, r.count, r.capped_count
            )?;
        }
    }
    Ok(())
}

/// Serializes `table` as CSV, pretty JSON or a markdown table.
///
/// CSV has the columns `metric,mean,std,median,count,capped_count` and, when
/// STOI is present, an extra `stoi_pct` row on the ×100 scale.
pub fn emit<W: Write>(
    table: &SummaryTable,
    format: ReportFormat,
    mut out: W,
) -> std::io::Result<()> {
    match format {
        ReportFormat::Csv => write_csv(table, out),
        ReportFormat::Json => {
            serde_json::to_writer_pretty(&mut out, table)?;
            out.write_all(b"\n")
        }
        ReportFormat::Markdown => write_markdown(table, out),
    }
}

pub fn emit_to_string(table: &SummaryTable, format: ReportFormat) -> String {
    let mut buf = Vec::new();
    emit(table, format, &mut buf).expect("writing to memory");
    String::from_utf8(buf).expect("UTF-8 output")
}

/// One CSV row per utterance: `utterance_id`, one column per metric (empty
/// when it failed), then `;`-joined flags and errors.
pub fn write_per_utterance_csv<W: Write>(reports: &[MetricReport], out: W) -> std::io::Result<()> {
    let metrics: BTreeSet<&str> = reports
        .iter()
        .flat_map(|r| r.scores.keys().chain(r.errors.keys()).map(String::as_str))
        .collect();
    let mut w = csv::Writer::from_writer(out);
    let mut header = vec!["utterance_id"];
    header.extend(metrics.iter().copied());
    header.extend(["flags", "errors"]);
    w.write_record(&header).map_err(csv_err)?;
    for r in reports {
        let mut rec = vec![r.utterance_id.clone()];
        rec.extend(
            metrics
                .iter()
                .map(|m| r.scores.get(*m).map(f64::to_string).unwrap_or_default()),
        );
        rec.push(r.flags.join(";"));
        rec.push(
            r.errors
                .iter()
                .map(|(m, e)| format!("{m}: {e}"))
                .collect::<Vec<_>>()
                .join(";"),
        );
        w.write_record(&rec).map_err(csv_err)?;
    }
    w.flush()
}
