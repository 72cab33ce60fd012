//! Calibration metrics per condition over a prediction CSV.

use std::collections::BTreeMap;

use hrisk_core::calibration::{brier, ece, log_loss, mce, BinMode, BinScheme, PredictionRecord};

use crate::config::AnalysisOptions;
use crate::csvio::fmt_f64;
use crate::deltas::PairedItem;
use crate::error::Result;

pub const HEADER: [&str; 11] = [
    "condition",
    "n",
    "accuracy",
    "mean_confidence",
    "overconfident_rate",
    "ece_equal_width",
    "ece_equal_frequency",
    "ece_debiased",
    "mce",
    "brier",
    "log_loss",
];

/// Label of the row pooling every condition.
pub const POOLED_LABEL: &str = "ALL";

#[derive(Debug, Clone, PartialEq)]
pub struct CalibrationRow {
    pub condition: String,
    pub n: usize,
    pub accuracy: f64,
    pub mean_confidence: f64,
    pub overconfident_rate: f64,
    pub ece_equal_width: f64,
    pub ece_equal_frequency: f64,
    pub ece_debiased: f64,
    pub mce: f64,
    pub brier: f64,
    pub log_loss: f64,
}

impl CalibrationRow {
    pub fn cells(&self) -> Vec<String> {
        vec![
            self.condition.clone(),
            self.n.to_string(),
            fmt_f64(self.accuracy),
            fmt_f64(self.mean_confidence),
            fmt_f64(self.overconfident_rate),
            fmt_f64(self.ece_equal_width),
            fmt_f64(self.ece_equal_frequency),
            fmt_f64(self.ece_debiased),
            fmt_f64(self.mce),
            fmt_f64(self.brier),
            fmt_f64(self.log_loss),
        ]
    }
}

/// Binary records `(confidence, 1 − confidence)`; rows lacking either field are skipped.
fn records(items: &[&PairedItem]) -> Result<Vec<PredictionRecord>> {
    items
        .iter()
        .filter_map(|i| Some((i.confidence?, i.correct?)))
        .map(|(p, ok)| Ok(PredictionRecord::binary(p, ok)?))
        .collect()
}

fn row(label: &str, items: &[&PairedItem], opts: &AnalysisOptions) -> Result<Option<CalibrationRow>> {
    let recs = records(items)?;
    if recs.is_empty() {
        return Ok(None);
    }
    let n = recs.len() as f64;
    let scored: Vec<(f64, bool)> = items.iter().filter_map(|i| Some((i.confidence?, i.correct?))).collect();
    let width = BinScheme::new(BinMode::EqualWidth, opts.bins, false)?;
    // Equal-frequency bins need at least one record each.
    let freq = BinScheme::new(BinMode::EqualFrequency, opts.bins.min(recs.len()), false)?;
    Ok(Some(CalibrationRow {
        condition: label.to_string(),
        n: recs.len(),
        accuracy: scored.iter().filter(|s| s.1).count() as f64 / n,
        mean_confidence: scored.iter().map(|s| s.0).sum::<f64>() / n,
        overconfident_rate: scored.iter().filter(|s| !s.1 && s.0 >= opts.overconfidence_threshold).count() as f64
            / n,
        ece_equal_width: ece(&recs, &width)?,
        ece_equal_frequency: ece(&recs, &freq)?,
        ece_debiased: ece(&recs, &freq.debiased())?,
        mce: mce(&recs, &width)?,
        brier: brier(&recs)?,
        log_loss: log_loss(&recs, opts.log_epsilon)?,
    }))
}

/// One row per condition (sorted) and a pooled row.
pub fn calibration_table(items: &[PairedItem], opts: &AnalysisOptions) -> Result<Vec<CalibrationRow>> {
    let mut groups: BTreeMap<&str, Vec<&PairedItem>> = BTreeMap::new();
    for it in items {
        groups.entry(it.condition.as_str()).or_default().push(it);
    }
    let mut out = Vec::new();
    for (cond, group) in &groups {
        out.extend(row(cond, group, opts)?);
    }
    let all: Vec<&PairedItem> = items.iter().collect();
    out.extend(row(POOLED_LABEL, &all, opts)?);
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn pooled_row_and_skips() {
        let mk = |qid: &str, cond: &str, conf: Option<f64>, ok: bool| PairedItem {
            domain: "d".into(),
            qid: qid.into(),
            condition: cond.into(),
            confidence: conf,
            correct: Some(ok),
            metrics: [None; 3],
        };
        let items = vec![
            mk("1", "C0", Some(0.9), true),
            mk("2", "C0", Some(0.6), false),
            mk("1", "C1", None, true),
            mk("2", "C1", Some(0.8), true),
        ];
        let table = calibration_table(&items, &AnalysisOptions::default()).unwrap();
        assert_eq!(table.len(), 3);
        assert_eq!(table[2].condition, POOLED_LABEL);
        assert_eq!(table[2].n, 3);
        assert!((table[0].overconfident_rate - 0.5).abs() < 1e-15);
        // Two-record hand case in one bin.
        let one_bin = AnalysisOptions { bins: 1, ..Default::default() };
        let t = calibration_table(&items[..2], &one_bin).unwrap();
        assert!((t[0].ece_equal_width - 0.25).abs() < 1e-15);
    }
}
