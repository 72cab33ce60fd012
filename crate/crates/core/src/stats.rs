//! Correlation, robust slope, bootstrap intervals, FDR control and effect sizes.

use alloc::vec::Vec;

#[cfg(not(feature = "std"))]
use num_traits::Float;

use crate::error::{invalid, Error, Result};
use crate::rng::NoiseSource;
use crate::sim::quantile_sorted;
use crate::special::{normal_cdf, normal_quantile};

pub const DEFAULT_N_BOOT: usize = 1000;
pub const DEFAULT_LEVEL: f64 = 0.95;

#[derive(Debug, Clone, PartialEq)]
pub struct PairedSample {
    x: Vec<f64>,
    y: Vec<f64>,
}

impl PairedSample {
    pub fn new(x: Vec<f64>, y: Vec<f64>) -> Result<Self> {
        if x.len() != y.len() {
            return Err(Error::Dimension {
                op: "paired sample",
                detail: alloc::format!("{} x values vs {} y values", x.len(), y.len()),
            });
        }
        if x.len() < 2 {
            return Err(invalid("a paired sample needs at least two pairs"));
        }
        if x.iter().chain(&y).any(|v| !v.is_finite()) {
            return Err(Error::NonFinite("paired sample"));
        }
        Ok(Self { x, y })
    }

    pub fn x(&self) -> &[f64] {
        &self.x
    }

    pub fn y(&self) -> &[f64] {
        &self.y
    }

    pub fn len(&self) -> usize {
        self.x.len()
    }

    pub fn is_empty(&self) -> bool {
        self.x.is_empty()
    }

    /// The sample restricted to `idx` (repeats allowed).
    pub fn select(&self, idx: &[usize]) -> (Vec<f64>, Vec<f64>) {
        (idx.iter().map(|&i| self.x[i]).collect(), idx.iter().map(|&i| self.y[i]).collect())
    }
}

fn mean(v: &[f64]) -> f64 {
    v.iter().sum::<f64>() / v.len() as f64
}

fn pearson_raw(x: &[f64], y: &[f64]) -> Result<f64> {
    let (mx, my) = (mean(x), mean(y));
    let (mut sxy, mut sxx, mut syy) = (0.0, 0.0, 0.0);
    for (a, b) in x.iter().zip(y) {
        let (dx, dy) = (a - mx, b - my);
        sxy += dx * dy;
        sxx += dx * dx;
        syy += dy * dy;
    }
    if sxx == 0.0 || syy == 0.0 {
        return Err(Error::Degenerate("correlation with zero variance"));
    }
    Ok((sxy / (sxx.sqrt() * syy.sqrt())).clamp(-1.0, 1.0))
}

pub fn pearson(s: &PairedSample) -> Result<f64> {
    pearson_raw(&s.x, &s.y)
}

/// 1-based ranks with ties sharing their average rank.
pub fn mid_ranks(v: &[f64]) -> Vec<f64> {
    let mut order: Vec<usize> = (0..v.len()).collect();
    order.sort_by(|&i, &j| v[i].total_cmp(&v[j]));
    let mut ranks = alloc::vec![0.0; v.len()];
    let mut start = 0;
    while start < order.len() {
        let mut end = start + 1;
        while end < order.len() && v[order[end]] == v[order[start]] {
            end += 1;
        }
        let rank = (start + end + 1) as f64 / 2.0;
        for &i in &order[start..end] {
            ranks[i] = rank;
        }
        start = end;
    }
    ranks
}

pub fn spearman(s: &PairedSample) -> Result<f64> {
    pearson_raw(&mid_ranks(&s.x), &mid_ranks(&s.y))
}

/// Median of all pairwise slopes; pairs with equal x are skipped.
pub fn theil_sen(s: &PairedSample) -> Result<f64> {
    theil_sen_raw(&s.x, &s.y)
}

fn theil_sen_raw(x: &[f64], y: &[f64]) -> Result<f64> {
    let mut slopes = Vec::with_capacity(x.len() * (x.len() - 1) / 2);
    for i in 0..x.len() {
        for j in i + 1..x.len() {
            if x[j] != x[i] {
                slopes.push((y[j] - y[i]) / (x[j] - x[i]));
            }
        }
    }
    if slopes.is_empty() {
        return Err(Error::Degenerate("all x values are equal"));
    }
    slopes.sort_by(f64::total_cmp);
    let m = slopes.len();
    Ok(if m % 2 == 1 { slopes[m / 2] } else { 0.5 * (slopes[m / 2 - 1] + slopes[m / 2]) })
}

/// Statistics available for paired bootstrap intervals.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum PairStatistic {
    Pearson,
    Spearman,
    TheilSen,
}

impl PairStatistic {
    pub fn label(self) -> &'static str {
        match self {
            PairStatistic::Pearson => "pearson",
            PairStatistic::Spearman => "spearman",
            PairStatistic::TheilSen => "theil_sen",
        }
    }

    pub fn eval(self, s: &PairedSample) -> Result<f64> {
        match self {
            PairStatistic::Pearson => pearson(s),
            PairStatistic::Spearman => spearman(s),
            PairStatistic::TheilSen => theil_sen(s),
        }
    }

    fn eval_raw(self, x: &[f64], y: &[f64]) -> Option<f64> {
        match self {
            PairStatistic::Pearson => pearson_raw(x, y).ok(),
            PairStatistic::Spearman => pearson_raw(&mid_ranks(x), &mid_ranks(y)).ok(),
            PairStatistic::TheilSen => theil_sen_raw(x, y).ok(),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum IntervalFlag {
    /// Every usable replicate equalled the point estimate.
    ZeroWidth,
    /// The point estimate fell outside its own interval.
    PointOutside,
}

#[derive(Debug, Clone, PartialEq)]
pub struct IntervalEstimate {
    pub point: f64,
    pub lo: f64,
    pub hi: f64,
    pub level: f64,
    pub method: &'static str,
    pub statistic: &'static str,
    pub n: usize,
    pub n_boot: usize,
    /// Replicates on which the statistic was defined.
    pub n_used: usize,
    pub seed: u64,
    pub z0: f64,
    pub acceleration: f64,
    pub flag: Option<IntervalFlag>,
}

impl IntervalEstimate {
    pub fn excludes_zero(&self) -> bool {
        self.lo > 0.0 || self.hi < 0.0
    }
}

/// Bias-corrected and accelerated bootstrap interval.
///
/// `statistic` receives resampled indices into the `n` units and returns
/// `None` where it is undefined; such replicates are dropped. Replicate `i`
/// draws its indices from a generator seeded with `seed + i`.
pub fn bca_ci<F>(
    n: usize,
    statistic: F,
    label: &'static str,
    level: f64,
    n_boot: usize,
    seed: u64,
) -> Result<IntervalEstimate>
where
    F: Fn(&[usize]) -> Option<f64>,
{
    if n < 3 {
        return Err(invalid("bootstrap intervals need at least three units"));
    }
    if n_boot < 100 {
        return Err(invalid("bootstrap needs at least 100 resamples"));
    }
    if !(level > 0.0 && level < 1.0) {
        return Err(invalid("confidence level must lie in (0, 1)"));
    }
    let all: Vec<usize> = (0..n).collect();
    let point = statistic(&all).ok_or(Error::Degenerate("statistic undefined on the full sample"))?;

    let mut idx = alloc::vec![0usize; n];
    let mut reps = Vec::with_capacity(n_boot);
    for b in 0..n_boot {
        let mut src = NoiseSource::new(seed.wrapping_add(b as u64));
        for slot in idx.iter_mut() {
            *slot = src.index(n);
        }
        if let Some(v) = statistic(&idx).filter(|v| v.is_finite()) {
            reps.push(v);
        }
    }
    let n_used = reps.len();
    let mut est = IntervalEstimate {
        point,
        lo: point,
        hi: point,
        level,
        method: "BCa",
        statistic: label,
        n,
        n_boot,
        n_used,
        seed,
        z0: 0.0,
        acceleration: 0.0,
        flag: Some(IntervalFlag::ZeroWidth),
    };
    if n_used == 0 || reps.iter().all(|&v| v == reps[0]) {
        if let Some(&v) = reps.first() {
            est.lo = v.min(point);
            est.hi = v.max(point);
        }
        return Ok(est);
    }
    reps.sort_by(f64::total_cmp);

    // Ties count half so a symmetric statistic gives z0 = 0 exactly.
    let below = reps.iter().filter(|&&v| v < point).count() as f64;
    let equal = reps.iter().filter(|&&v| v == point).count() as f64;
    let m = n_used as f64;
    let frac = ((below + 0.5 * equal) / m).clamp(0.5 / m, 1.0 - 0.5 / m);
    let z0 = normal_quantile(frac);

    let mut jack = Vec::with_capacity(n);
    let mut loo = Vec::with_capacity(n - 1);
    for i in 0..n {
        loo.clear();
        loo.extend((0..n).filter(|&j| j != i));
        if let Some(v) = statistic(&loo).filter(|v| v.is_finite()) {
            jack.push(v);
        }
    }
    let acceleration = if jack.len() < 2 {
        0.0
    } else {
        let jm = mean(&jack);
        let (mut s2, mut s3) = (0.0, 0.0);
        for v in &jack {
            let d = jm - v;
            s2 += d * d;
            s3 += d * d * d;
        }
        if s2 > 0.0 {
            s3 / (6.0 * s2.powf(1.5))
        } else {
            0.0
        }
    };

    let tail = 0.5 * (1.0 - level);
    let adjust = |z: f64| {
        let num = z0 + z;
        normal_cdf(z0 + num / (1.0 - acceleration * num))
    };
    let p_lo = adjust(normal_quantile(tail)).clamp(0.0, 1.0);
    let p_hi = adjust(normal_quantile(1.0 - tail)).clamp(0.0, 1.0);
    est.lo = quantile_sorted(&reps, p_lo);
    est.hi = quantile_sorted(&reps, p_hi);
    est.z0 = z0;
    est.acceleration = acceleration;
    est.flag = if point < est.lo || point > est.hi { Some(IntervalFlag::PointOutside) } else { None };
    Ok(est)
}

/// BCa interval for the mean of `data`.
pub fn bca_mean(data: &[f64], level: f64, n_boot: usize, seed: u64) -> Result<IntervalEstimate> {
    bca_ci(data.len(), |idx| Some(idx.iter().map(|&i| data[i]).sum::<f64>() / idx.len() as f64), "mean", level, n_boot, seed)
}

/// BCa interval for a paired statistic, resampling whole pairs.
pub fn bca_paired(
    s: &PairedSample,
    stat: PairStatistic,
    level: f64,
    n_boot: usize,
    seed: u64,
) -> Result<IntervalEstimate> {
    bca_ci(
        s.len(),
        |idx| {
            let (x, y) = s.select(idx);
            stat.eval_raw(&x, &y)
        },
        stat.label(),
        level,
        n_boot,
        seed,
    )
}

#[derive(Debug, Clone, PartialEq)]
pub struct FdrResult {
    /// In input order.
    pub rejected: Vec<bool>,
    /// BH-adjusted p-values in input order.
    pub adjusted: Vec<f64>,
}

/// Benjamini–Hochberg step-up procedure at target FDR `q`.
pub fn bh_fdr(p_values: &[f64], q: f64) -> Result<FdrResult> {
    if p_values.iter().any(|p| !(0.0..=1.0).contains(p)) {
        return Err(invalid("p-values must lie in [0, 1]"));
    }
    if !(q > 0.0 && q <= 1.0) {
        return Err(invalid("target FDR must lie in (0, 1]"));
    }
    let m = p_values.len();
    let mut order: Vec<usize> = (0..m).collect();
    order.sort_by(|&i, &j| p_values[i].total_cmp(&p_values[j]));
    let cutoff = (1..=m).rev().find(|&k| p_values[order[k - 1]] <= k as f64 * q / m as f64).unwrap_or(0);

    let mut rejected = alloc::vec![false; m];
    for &i in &order[..cutoff] {
        rejected[i] = true;
    }
    let mut adjusted = alloc::vec![0.0; m];
    let mut running = 1.0f64;
    for k in (1..=m).rev() {
        let i = order[k - 1];
        running = running.min(p_values[i] * (m as f64 / k as f64));
        adjusted[i] = running;
    }
    Ok(FdrResult { rejected, adjusted })
}

pub fn cliffs_delta(a: &[f64], b: &[f64]) -> Result<f64> {
    if a.is_empty() || b.is_empty() {
        return Err(invalid("Cliff's delta needs two non-empty samples"));
    }
    let mut score: i64 = 0;
    for x in a {
        for y in b {
            score += (x > y) as i64 - (x < y) as i64;
        }
    }
    Ok(score as f64 / (a.len() * b.len()) as f64)
}

/// Small-sample correction factor for `n` total observations.
pub fn hedges_correction(n_total: usize) -> f64 {
    1.0 - 3.0 / (4.0 * n_total as f64 - 9.0)
}

pub fn hedges_g(a: &[f64], b: &[f64]) -> Result<f64> {
    if a.len() < 2 || b.len() < 2 {
        return Err(invalid("Hedges' g needs at least two values per group"));
    }
    let var = |v: &[f64]| {
        let m = mean(v);
        v.iter().map(|x| (x - m) * (x - m)).sum::<f64>() / (v.len() - 1) as f64
    };
    let (na, nb) = (a.len() as f64, b.len() as f64);
    let pooled = ((na - 1.0) * var(a) + (nb - 1.0) * var(b)) / (na + nb - 2.0);
    if !(pooled > 0.0) {
        return Err(Error::Degenerate("zero pooled variance"));
    }
    Ok((mean(a) - mean(b)) / pooled.sqrt() * hedges_correction(a.len() + b.len()))
}
