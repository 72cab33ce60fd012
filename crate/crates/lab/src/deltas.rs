//! Paired condition deltas against a baseline condition.

use std::collections::BTreeMap;
use std::path::Path;

use hrisk_core::stats::{bca_mean, IntervalFlag};

use crate::config::AnalysisOptions;
use crate::csvio::{fmt_f64, Table};
use crate::error::{LabError, Result};

pub const INPUT_COLUMNS: [&str; 9] =
    ["domain", "qid", "condition", "prompt", "confidence", "correct", "brier", "logloss", "halluc_rate"];
pub const METRICS: [&str; 3] = ["brier", "logloss", "halluc_rate"];

pub const SUMMARY_HEADER: [&str; 11] =
    ["model", "prompt", "condition", "metric", "n_pairs", "delta", "ci_lo", "ci_hi", "method", "n_boot", "seed"];
pub const LONG_HEADER: [&str; 7] = ["domain", "qid", "condition", "metric", "baseline_value", "value", "delta"];
pub const TABLE_HEADER: [&str; 6] = ["model", "prompt", "condition", "brier", "logloss", "halluc_rate"];
pub const POOLED_HEADER: [&str; 4] = ["n", "mean_confidence", "correctness", "overconfident_rate"];

/// The input carries no model or prompt grouping, so every summary row is
/// labelled with these placeholders.
const MODEL_LABEL: &str = "(unspecified)";
const PROMPT_LABEL: &str = "(no-prompt)";

#[derive(Debug, Clone, PartialEq)]
pub struct PairedItem {
    pub domain: String,
    pub qid: String,
    pub condition: String,
    pub confidence: Option<f64>,
    pub correct: Option<bool>,
    /// brier, logloss, halluc_rate; `None` where the field was empty.
    pub metrics: [Option<f64>; 3],
}

fn optional_f64(field: &str) -> std::result::Result<Option<f64>, String> {
    let f = field.trim();
    if f.is_empty() || f == "-" || f == "–" {
        return Ok(None);
    }
    f.parse().map(Some).map_err(|_| format!("invalid number {f:?}"))
}

fn optional_bool(field: &str) -> std::result::Result<Option<bool>, String> {
    match field.trim().to_ascii_lowercase().as_str() {
        "" | "-" | "–" => Ok(None),
        "1" | "true" => Ok(Some(true)),
        "0" | "false" => Ok(Some(false)),
        other => Err(format!("invalid correctness flag {other:?}")),
    }
}

pub fn parse_items(text: &str, origin: &Path) -> Result<Vec<PairedItem>> {
    let table = Table::parse(text, origin)?;
    let cols = table.columns(&INPUT_COLUMNS, origin)?;
    let mut seen = std::collections::HashSet::new();
    let mut items = Vec::with_capacity(table.rows.len());
    for (line, rec) in &table.rows {
        let bad = |m: String| LabError::parse(origin, *line, m);
        let field = |i: usize| rec.get(cols[i]).unwrap_or("");
        let item = PairedItem {
            domain: field(0).to_string(),
            qid: field(1).to_string(),
            condition: field(2).to_string(),
            confidence: optional_f64(field(4)).map_err(bad)?,
            correct: optional_bool(field(5)).map_err(bad)?,
            metrics: [
                optional_f64(field(6)).map_err(bad)?,
                optional_f64(field(7)).map_err(bad)?,
                optional_f64(field(8)).map_err(bad)?,
            ],
        };
        if item.condition.is_empty() || item.qid.is_empty() {
            return Err(bad("qid and condition must be non-empty".to_string()));
        }
        if !seen.insert((item.domain.clone(), item.qid.clone(), item.condition.clone())) {
            return Err(bad(format!(
                "duplicate item ({}, {}, {})",
                item.domain, item.qid, item.condition
            )));
        }
        items.push(item);
    }
    Ok(items)
}

pub fn load_items(path: &Path) -> Result<Vec<PairedItem>> {
    let text = std::fs::read_to_string(path).map_err(|e| LabError::io(path, e))?;
    parse_items(&text, path)
}

#[derive(Debug, Clone, PartialEq)]
pub struct DeltaSummary {
    pub condition: String,
    pub metric: &'static str,
    pub n_pairs: usize,
    pub delta: f64,
    pub ci_lo: f64,
    pub ci_hi: f64,
    pub method: String,
    pub n_boot: usize,
    pub seed: u64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct DeltaPair {
    pub domain: String,
    pub qid: String,
    pub condition: String,
    pub metric: &'static str,
    pub baseline_value: f64,
    pub value: f64,
    pub delta: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct DeltaReport {
    pub summary: Vec<DeltaSummary>,
    pub long: Vec<DeltaPair>,
    /// Non-baseline items with no baseline counterpart; excluded.
    pub unpaired: usize,
}

/// Δ = condition − baseline per item, paired on (domain, qid), with a BCa
/// interval for the mean Δ of every (condition, metric).
pub fn analyze_condition_deltas(items: &[PairedItem], opts: &AnalysisOptions) -> Result<DeltaReport> {
    let mut baseline: BTreeMap<(&str, &str), &PairedItem> = BTreeMap::new();
    let mut by_condition: BTreeMap<&str, BTreeMap<(&str, &str), &PairedItem>> = BTreeMap::new();
    for it in items {
        let key = (it.domain.as_str(), it.qid.as_str());
        if it.condition == opts.baseline {
            baseline.insert(key, it);
        } else {
            by_condition.entry(it.condition.as_str()).or_default().insert(key, it);
        }
    }
    if baseline.is_empty() {
        return Err(LabError::Input(format!("baseline condition {:?} not present", opts.baseline)));
    }
    let unpaired = by_condition.values().flat_map(|m| m.keys()).filter(|k| !baseline.contains_key(*k)).count();

    let mut summary = Vec::new();
    let mut long = Vec::new();
    for (condition, group) in &by_condition {
        for (m, metric) in METRICS.iter().enumerate() {
            let mut deltas = Vec::new();
            for (key, item) in group {
                let Some(base) = baseline.get(key) else { continue };
                let (Some(b), Some(v)) = (base.metrics[m], item.metrics[m]) else { continue };
                deltas.push(v - b);
                long.push(DeltaPair {
                    domain: key.0.to_string(),
                    qid: key.1.to_string(),
                    condition: condition.to_string(),
                    metric,
                    baseline_value: b,
                    value: v,
                    delta: v - b,
                });
            }
            if deltas.len() < 3 {
                return Err(LabError::Input(format!(
                    "condition {condition} has {} paired items for {metric}; at least 3 are needed",
                    deltas.len()
                )));
            }
            let ci = bca_mean(&deltas, opts.level, opts.n_boot, opts.boot_seed)?;
            let method = match ci.flag {
                None => "BCa",
                Some(IntervalFlag::ZeroWidth) => "BCa:zero-width",
                Some(IntervalFlag::PointOutside) => "BCa:point-outside",
            };
            summary.push(DeltaSummary {
                condition: condition.to_string(),
                metric,
                n_pairs: deltas.len(),
                delta: ci.point,
                ci_lo: ci.lo,
                ci_hi: ci.hi,
                method: method.to_string(),
                n_boot: ci.n_boot,
                seed: ci.seed,
            });
        }
    }
    Ok(DeltaReport { summary, long, unpaired })
}

impl DeltaReport {
    pub fn summary_rows(&self) -> Vec<Vec<String>> {
        self.summary
            .iter()
            .map(|s| {
                vec![
                    MODEL_LABEL.to_string(),
                    PROMPT_LABEL.to_string(),
                    s.condition.clone(),
                    s.metric.to_string(),
                    s.n_pairs.to_string(),
                    fmt_f64(s.delta),
                    fmt_f64(s.ci_lo),
                    fmt_f64(s.ci_hi),
                    s.method.clone(),
                    s.n_boot.to_string(),
                    s.seed.to_string(),
                ]
            })
            .collect()
    }

    pub fn long_rows(&self) -> Vec<Vec<String>> {
        self.long
            .iter()
            .map(|p| {
                vec![
                    p.domain.clone(),
                    p.qid.clone(),
                    p.condition.clone(),
                    p.metric.to_string(),
                    fmt_f64(p.baseline_value),
                    fmt_f64(p.value),
                    fmt_f64(p.delta),
                ]
            })
            .collect()
    }

    /// One row per condition, each metric as `Δ [lo, hi]` to three decimals.
    pub fn table_rows(&self) -> Vec<Vec<String>> {
        let mut conditions: Vec<&str> = self.summary.iter().map(|s| s.condition.as_str()).collect();
        conditions.dedup();
        conditions
            .into_iter()
            .map(|c| {
                let mut row = vec![MODEL_LABEL.to_string(), PROMPT_LABEL.to_string(), c.to_string()];
                for metric in METRICS {
                    let cell = self
                        .summary
                        .iter()
                        .find(|s| s.condition == c && s.metric == metric)
                        .map(|s| format!("{:.3} [{:.3}, {:.3}]", s.delta, s.ci_lo, s.ci_hi))
                        .unwrap_or_default();
                    row.push(cell);
                }
                row
            })
            .collect()
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PooledSummary {
    pub n: usize,
    pub mean_confidence: f64,
    pub correctness: f64,
    pub overconfident_rate: f64,
}

impl PooledSummary {
    pub fn rows(&self) -> Vec<Vec<String>> {
        vec![vec![
            self.n.to_string(),
            fmt_f64(self.mean_confidence),
            fmt_f64(self.correctness),
            fmt_f64(self.overconfident_rate),
        ]]
    }
}

/// Pooled over every item that has both a confidence and a correctness flag.
pub fn pooled_summary(items: &[PairedItem], opts: &AnalysisOptions) -> Result<PooledSummary> {
    let scored: Vec<(f64, bool)> = items.iter().filter_map(|i| Some((i.confidence?, i.correct?))).collect();
    if scored.is_empty() {
        return Err(LabError::Input("no items carry both confidence and correctness".to_string()));
    }
    let n = scored.len() as f64;
    let mean_confidence = scored.iter().map(|s| s.0).sum::<f64>() / n;
    let correctness = scored.iter().filter(|s| s.1).count() as f64 / n;
    let over = scored.iter().filter(|s| !s.1 && s.0 >= opts.overconfidence_threshold).count() as f64 / n;
    Ok(PooledSummary { n: scored.len(), mean_confidence, correctness, overconfident_rate: over })
}
