//! Calibration metrics for probabilistic classifiers.

use alloc::vec::Vec;

#[cfg(not(feature = "std"))]
use num_traits::Float;

use crate::error::{invalid, Result};

pub const DEFAULT_BINS: usize = 10;
pub const DEFAULT_LOG_EPSILON: f64 = 1e-15;
const SUM_TOLERANCE: f64 = 1e-9;

#[derive(Debug, Clone, PartialEq)]
pub struct PredictionRecord {
    probs: Vec<f64>,
    label: usize,
}

impl PredictionRecord {
    pub fn new(probs: Vec<f64>, label: usize) -> Result<Self> {
        if probs.len() < 2 {
            return Err(invalid("a prediction needs at least two classes"));
        }
        if label >= probs.len() {
            return Err(invalid("label outside the class range"));
        }
        if probs.iter().any(|p| !(0.0..=1.0).contains(p)) {
            return Err(invalid("class probabilities must lie in [0, 1]"));
        }
        if (probs.iter().sum::<f64>() - 1.0).abs() > SUM_TOLERANCE {
            return Err(invalid("class probabilities must sum to 1"));
        }
        Ok(Self { probs, label })
    }

    /// Binary record `(p, 1 − p)`; label 0 when the answer was correct.
    pub fn binary(p: f64, correct: bool) -> Result<Self> {
        Self::new(alloc::vec![p, 1.0 - p], if correct { 0 } else { 1 })
    }

    pub fn probs(&self) -> &[f64] {
        &self.probs
    }

    pub fn label(&self) -> usize {
        self.label
    }

    /// Index of the largest probability (first on ties).
    pub fn predicted(&self) -> usize {
        let mut best = 0;
        for (k, &p) in self.probs.iter().enumerate() {
            if p > self.probs[best] {
                best = k;
            }
        }
        best
    }

    pub fn confidence(&self) -> f64 {
        self.probs[self.predicted()]
    }

    pub fn is_correct(&self) -> bool {
        self.predicted() == self.label
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum BinMode {
    EqualWidth,
    EqualFrequency,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct BinScheme {
    pub mode: BinMode,
    pub bins: usize,
    pub debias: bool,
}

impl BinScheme {
    pub fn new(mode: BinMode, bins: usize, debias: bool) -> Result<Self> {
        if bins == 0 {
            return Err(invalid("bin count must be at least 1"));
        }
        Ok(Self { mode, bins, debias })
    }

    pub fn equal_width(bins: usize) -> Self {
        Self { mode: BinMode::EqualWidth, bins: bins.max(1), debias: false }
    }

    pub fn equal_frequency(bins: usize) -> Self {
        Self { mode: BinMode::EqualFrequency, bins: bins.max(1), debias: false }
    }

    pub fn debiased(self) -> Self {
        Self { debias: true, ..self }
    }
}

impl Default for BinScheme {
    fn default() -> Self {
        Self::equal_frequency(DEFAULT_BINS)
    }
}

/// Per-bin summary; empty bins are omitted.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct BinStat {
    pub count: usize,
    pub accuracy: f64,
    pub confidence: f64,
}

impl BinStat {
    /// `|acc − conf|`, or its noise-corrected version.
    pub fn gap(&self, debias: bool) -> f64 {
        let raw = self.accuracy - self.confidence;
        if !debias {
            return raw.abs();
        }
        let noise = self.accuracy * (1.0 - self.accuracy) / self.count as f64;
        (raw * raw - noise).max(0.0).sqrt()
    }
}

pub fn bin_stats(records: &[PredictionRecord], scheme: &BinScheme) -> Result<Vec<BinStat>> {
    if records.is_empty() {
        return Err(invalid("calibration metrics need at least one record"));
    }
    if scheme.bins == 0 {
        return Err(invalid("bin count must be at least 1"));
    }
    let n = records.len();
    let b = scheme.bins;
    let mut groups: Vec<Vec<usize>> = (0..b).map(|_| Vec::new()).collect();
    match scheme.mode {
        BinMode::EqualWidth => {
            for (i, r) in records.iter().enumerate() {
                let c = r.confidence();
                let idx = ((c * b as f64).floor() as usize).min(b - 1);
                groups[idx].push(i);
            }
        }
        BinMode::EqualFrequency => {
            if b > n {
                return Err(invalid("more equal-frequency bins than records"));
            }
            let mut order: Vec<usize> = (0..n).collect();
            order.sort_by(|&i, &j| records[i].confidence().total_cmp(&records[j].confidence()));
            let (base, extra) = (n / b, n % b);
            let mut start = 0;
            for (k, group) in groups.iter_mut().enumerate() {
                let size = base + usize::from(k < extra);
                group.extend_from_slice(&order[start..start + size]);
                start += size;
            }
        }
    }
    Ok(groups
        .iter()
        .filter(|g| !g.is_empty())
        .map(|g| {
            let count = g.len();
            let correct = g.iter().filter(|&&i| records[i].is_correct()).count();
            let conf = g.iter().map(|&i| records[i].confidence()).sum::<f64>();
            BinStat { count, accuracy: correct as f64 / count as f64, confidence: conf / count as f64 }
        })
        .collect())
}

pub fn ece(records: &[PredictionRecord], scheme: &BinScheme) -> Result<f64> {
    let n = records.len() as f64;
    Ok(bin_stats(records, scheme)?.iter().map(|s| s.count as f64 / n * s.gap(scheme.debias)).sum())
}

pub fn mce(records: &[PredictionRecord], scheme: &BinScheme) -> Result<f64> {
    Ok(bin_stats(records, scheme)?.iter().map(|s| s.gap(scheme.debias)).fold(0.0, f64::max))
}

/// Mean squared distance to the one-hot label, in `[0, 2]`.
pub fn brier(records: &[PredictionRecord]) -> Result<f64> {
    if records.is_empty() {
        return Err(invalid("Brier score needs at least one record"));
    }
    let total: f64 = records
        .iter()
        .map(|r| {
            r.probs
                .iter()
                .enumerate()
                .map(|(k, &p)| {
                    let d = p - if k == r.label { 1.0 } else { 0.0 };
                    d * d
                })
                .sum::<f64>()
        })
        .sum();
    Ok(total / records.len() as f64)
}

/// Mean negative log probability of the true class, clipped below at `epsilon`.
pub fn log_loss(records: &[PredictionRecord], epsilon: f64) -> Result<f64> {
    if records.is_empty() {
        return Err(invalid("log loss needs at least one record"));
    }
    if !(epsilon > 0.0 && epsilon < 1.0) {
        return Err(invalid("log-loss clip must lie in (0, 1)"));
    }
    let total: f64 = records.iter().map(|r| -r.probs[r.label].clamp(epsilon, 1.0).ln()).sum();
    Ok(total / records.len() as f64)
}

#[cfg(test)]
mod tests {
    use super::*;
    use alloc::vec;

    fn rec(p: &[f64], label: usize) -> PredictionRecord {
        PredictionRecord::new(p.to_vec(), label).unwrap()
    }

    #[test]
    fn record_validation() {
        assert!(PredictionRecord::new(vec![1.0], 0).is_err());
        assert!(PredictionRecord::new(vec![0.5, 0.5], 2).is_err());
        assert!(PredictionRecord::new(vec![0.6, 0.6], 0).is_err());
        assert!(PredictionRecord::new(vec![1.2, -0.2], 0).is_err());
        assert!(PredictionRecord::new(vec![0.5, 0.5 + 1e-10], 0).is_ok());
    }

    #[test]
    fn two_record_hand_case() {
        let rs = [rec(&[0.9, 0.1], 0), rec(&[0.6, 0.4], 1)];
        for mode in [BinMode::EqualWidth, BinMode::EqualFrequency] {
            let s = BinScheme::new(mode, 1, false).unwrap();
            assert!((ece(&rs, &s).unwrap() - 0.25).abs() < 1e-15);
            assert!((mce(&rs, &s).unwrap() - 0.25).abs() < 1e-15);
        }
    }

    #[test]
    fn calibrated_set_has_zero_ece() {
        // Five items at 0.8 with four correct, five at 0.6 with three correct.
        let mut rs = Vec::new();
        for i in 0..5 {
            rs.push(rec(&[0.8, 0.2], usize::from(i == 4)));
            rs.push(rec(&[0.6, 0.4], usize::from(i >= 3)));
        }
        for s in [BinScheme::equal_width(10), BinScheme::equal_frequency(2)] {
            assert!(ece(&rs, &s).unwrap().abs() < 1e-12);
            assert!(mce(&rs, &s).unwrap().abs() < 1e-12);
        }
    }

    #[test]
    fn identical_predictions_agree_across_modes() {
        let rs: Vec<_> = (0..12).map(|i| rec(&[0.7, 0.3], usize::from(i % 3 == 0))).collect();
        let w = ece(&rs, &BinScheme::equal_width(10)).unwrap();
        let f = ece(&rs, &BinScheme::equal_frequency(1)).unwrap();
        assert!((w - f).abs() < 1e-15);
        // Single-bin reliability: accuracy 2/3 against confidence 0.7.
        assert!((w - (0.7 - 2.0 / 3.0)).abs() < 1e-12);
    }

    #[test]
    fn equal_frequency_sizes() {
        let rs: Vec<_> = (0..23).map(|i| rec(&[0.5 + i as f64 / 50.0, 0.5 - i as f64 / 50.0], 0)).collect();
        let stats = bin_stats(&rs, &BinScheme::equal_frequency(5)).unwrap();
        let sizes: Vec<_> = stats.iter().map(|s| s.count).collect();
        assert_eq!(sizes, vec![5, 5, 5, 4, 4]);
        assert!(bin_stats(&rs[..3], &BinScheme::equal_frequency(5)).is_err());
    }

    #[test]
    fn edge_confidence_goes_to_last_bin() {
        let rs = [rec(&[1.0, 0.0], 0), rec(&[0.5, 0.5], 0)];
        let stats = bin_stats(&rs, &BinScheme::equal_width(10)).unwrap();
        assert_eq!(stats.len(), 2);
        assert_eq!(stats[1].confidence, 1.0);
    }

    #[test]
    fn brier_examples() {
        assert_eq!(brier(&[rec(&[0.0, 1.0], 1)]).unwrap(), 0.0);
        assert_eq!(brier(&[rec(&[1.0, 0.0], 1)]).unwrap(), 2.0);
        assert_eq!(brier(&[rec(&[0.5, 0.5], 0), rec(&[0.5, 0.5], 1)]).unwrap(), 0.5);
        assert!(brier(&[]).is_err());
    }

    #[test]
    fn log_loss_examples() {
        assert_eq!(log_loss(&[rec(&[1.0, 0.0], 0)], DEFAULT_LOG_EPSILON).unwrap(), 0.0);
        let inv_e = (-1.0f64).exp();
        let l = log_loss(&[rec(&[inv_e, 1.0 - inv_e], 0)], DEFAULT_LOG_EPSILON).unwrap();
        assert!((l - 1.0).abs() < 1e-15);
        let clipped = log_loss(&[rec(&[0.0, 1.0], 0)], DEFAULT_LOG_EPSILON).unwrap();
        assert_eq!(clipped, -DEFAULT_LOG_EPSILON.ln());
    }

    #[test]
    fn debiasing_shrinks_small_bins() {
        let st = BinStat { count: 4, accuracy: 0.5, confidence: 0.7 };
        assert!((st.gap(false) - 0.2).abs() < 1e-15);
        // 0.04 − 0.0625 < 0
        assert_eq!(st.gap(true), 0.0);
    }
}
