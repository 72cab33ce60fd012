//! Parameter sweeps over the gain ray (B1) and the observation angle (B2).
//!
//! A sweep is split into pure stages so callers can run the per-seed
//! simulations in any order or in parallel: [`prepare_points`] analyzes each
//! grid point, [`simulate_seed`] runs one (point, seed) pair and
//! [`assemble`] sorts and summarizes.

use alloc::format;
use alloc::string::String;
use alloc::vec;
use alloc::vec::Vec;

#[cfg(not(feature = "std"))]
use num_traits::Float;

use crate::error::{invalid, Error, Result};
use crate::hrisk::{calibrate_constants, hrisk_factors, hrisk_index, Factor, FactorSet, HRiskConfig, HRiskFactors};
use crate::lti::{dare_gain, ClosedLoopAnalysis, FilterSpec, GainPolicy, LtiSystem};
use crate::matrix::{spectral_radius, Mat};
use crate::sim::{simulate_nis, RunConfig, DEFAULT_BURN_IN, DEFAULT_GATE_PROBABILITY, DEFAULT_QUANTILE, DEFAULT_STEPS};
use crate::stats::{bca_paired, PairStatistic, PairedSample, DEFAULT_LEVEL, DEFAULT_N_BOOT};

pub const SIGMA_W: f64 = 3e-2;
pub const SIGMA_V: f64 = 1e-2;
pub const Q_SCALE: f64 = 0.12;
pub const R_SCALE: f64 = 0.30;
pub const B2_EPSILON_GRID: [f64; 12] = [1.0, 0.7, 0.5, 0.35, 0.25, 0.18, 0.12, 0.08, 0.05, 0.03, 0.02, 0.01];
pub const DEFAULT_SEEDS: [u64; 5] = [1, 2, 3, 4, 5];
pub const DEFAULT_BOOT_SEED: u64 = 20_240_601;

pub fn b1_a() -> Mat {
    Mat::from_rows(&[[0.92, 0.20], [0.0, 0.95]]).expect("constant matrix")
}

pub fn b1_h() -> Mat {
    Mat::from_rows(&[[1.0, 0.0]]).expect("constant matrix")
}

pub fn b2_a(a12: f64) -> Mat {
    Mat::from_rows(&[[0.95, a12], [0.0, 0.97]]).expect("constant matrix")
}

pub fn b2_h(epsilon: f64) -> Mat {
    Mat::from_rows(&[[1.0, epsilon]]).expect("constant matrix")
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum SweepKind {
    B1AlphaRay,
    B2Epsilon,
}

impl SweepKind {
    pub fn param_name(self) -> &'static str {
        match self {
            SweepKind::B1AlphaRay => "alpha",
            SweepKind::B2Epsilon => "epsilon",
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum PolicyKind {
    FixedRef,
    DarePerConfig,
}

impl PolicyKind {
    pub fn name(self) -> &'static str {
        match self {
            PolicyKind::FixedRef => "fixed_ref",
            PolicyKind::DarePerConfig => "dare_per_config",
        }
    }

    pub fn parse(s: &str) -> Option<Self> {
        match s {
            "fixed_ref" => Some(PolicyKind::FixedRef),
            "dare_per_config" => Some(PolicyKind::DarePerConfig),
            _ => None,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub enum Grid {
    Explicit(Vec<f64>),
    /// Log-spaced from 1 to `fraction·α_crit` (gain-ray sweeps only).
    LogToCritical { points: usize, fraction: f64 },
}

#[derive(Debug, Clone, PartialEq)]
pub struct SweepSpec {
    pub kind: SweepKind,
    pub grid: Grid,
    /// Off-diagonal entry of the B2 dynamics.
    pub a12: f64,
    pub sigma_w: f64,
    pub sigma_v: f64,
    /// Filter beliefs as multiples of the true covariances.
    pub q_scale: f64,
    pub r_scale: f64,
    pub policy: PolicyKind,
    /// Observation angle at which the B2 reference gain is tuned.
    pub ref_eps: f64,
    pub seeds: Vec<u64>,
    pub steps: usize,
    pub burn_in: usize,
    pub quantile: f64,
    pub gate_probability: f64,
    pub n_boot: usize,
    pub boot_seed: u64,
    pub level: f64,
    pub ablations: Vec<FactorSet>,
}

impl SweepSpec {
    fn defaults(kind: SweepKind, grid: Grid) -> Self {
        Self {
            kind,
            grid,
            a12: 0.60,
            sigma_w: SIGMA_W,
            sigma_v: SIGMA_V,
            q_scale: Q_SCALE,
            r_scale: R_SCALE,
            policy: PolicyKind::FixedRef,
            ref_eps: B2_EPSILON_GRID[0],
            seeds: DEFAULT_SEEDS.to_vec(),
            steps: DEFAULT_STEPS,
            burn_in: DEFAULT_BURN_IN,
            quantile: DEFAULT_QUANTILE,
            gate_probability: DEFAULT_GATE_PROBABILITY,
            n_boot: DEFAULT_N_BOOT,
            boot_seed: DEFAULT_BOOT_SEED,
            level: DEFAULT_LEVEL,
            ablations: single_factor_ablations(),
        }
    }

    pub fn b1_default() -> Self {
        Self::defaults(SweepKind::B1AlphaRay, Grid::LogToCritical { points: 12, fraction: 0.98 })
    }

    pub fn b2_default() -> Self {
        Self::defaults(SweepKind::B2Epsilon, Grid::Explicit(B2_EPSILON_GRID.to_vec()))
    }

    pub fn true_q(&self) -> Mat {
        Mat::identity(2).scale(self.sigma_w * self.sigma_w)
    }

    pub fn true_r(&self) -> Mat {
        Mat::scalar(self.sigma_v * self.sigma_v)
    }

    fn validate(&self) -> Result<()> {
        if let Grid::Explicit(g) = &self.grid {
            if g.is_empty() || g.iter().any(|v| !v.is_finite()) {
                return Err(invalid("sweep grid must be non-empty and finite"));
            }
        }
        if let Grid::LogToCritical { points, fraction } = self.grid {
            if self.kind != SweepKind::B1AlphaRay {
                return Err(invalid("a critical-point grid only applies to gain-ray sweeps"));
            }
            if points == 0 || !(fraction > 0.0 && fraction < 1.0) {
                return Err(invalid("critical-point grid needs points ≥ 1 and fraction in (0, 1)"));
            }
        }
        if self.seeds.is_empty() {
            return Err(invalid("at least one seed is required"));
        }
        if !(self.sigma_w >= 0.0 && self.sigma_v > 0.0 && self.q_scale >= 0.0 && self.r_scale > 0.0) {
            return Err(invalid("noise levels and belief scales must be nonnegative (sensor noise positive)"));
        }
        Ok(())
    }
}

/// The empty set followed by each single-factor removal.
pub fn single_factor_ablations() -> Vec<FactorSet> {
    let mut v = vec![FactorSet::EMPTY];
    v.extend(Factor::ALL.map(FactorSet::single));
    v
}

/// Label such as `hrisk` or `hrisk[-kappa]`.
pub fn ablation_label(set: FactorSet) -> String {
    if set.is_empty() {
        return String::from("hrisk");
    }
    let removed: Vec<&str> = Factor::ALL.into_iter().filter(|f| set.contains(*f)).map(Factor::name).collect();
    format!("hrisk[-{}]", removed.join(","))
}

/// The reference configuration the index is unit-scaled at: B1 with the
/// DARE gain for the true noise (α = 1).
#[derive(Debug, Clone, PartialEq)]
pub struct BaseCalibration {
    pub k0: Mat,
    pub factors: HRiskFactors,
    pub config: HRiskConfig,
}

pub fn base_calibration(sigma_w: f64, sigma_v: f64) -> Result<BaseCalibration> {
    let q = Mat::identity(2).scale(sigma_w * sigma_w);
    let r = Mat::scalar(sigma_v * sigma_v);
    let sys = LtiSystem::new(b1_a(), b1_h(), q, r)?;
    let k0 = dare_gain(&sys.a, &sys.h, &sys.q, &sys.r)?.predictor_gain;
    let analysis = ClosedLoopAnalysis::of(&sys, &k0).map_err(|e| match e {
        Error::Unstable { rho } => Error::Calibration(format!("base point is unstable (rho = {rho})")),
        other => other,
    })?;
    let factors = hrisk_factors(&analysis)?;
    let config = calibrate_constants(&factors, "B1 alpha=1 DARE gain")?;
    Ok(BaseCalibration { k0, factors, config })
}

/// Smallest α with ρ(A − αKH) ≥ 1, found by a ×1.01 scan from 1 and bisection.
pub fn locate_alpha_crit(a: &Mat, h: &Mat, k0: &Mat) -> Result<f64> {
    let rho = |alpha: f64| -> Result<f64> { spectral_radius(&(a - &(&k0.scale(alpha) * h))) };
    if rho(1.0)? >= 1.0 {
        return Err(Error::Unstable { rho: rho(1.0)? });
    }
    let mut lo = 1.0;
    let mut hi = 1.01;
    while rho(hi)? < 1.0 {
        lo = hi;
        hi *= 1.01;
        if hi > 1e6 {
            return Err(Error::Search);
        }
    }
    for _ in 0..100 {
        let mid = 0.5 * (lo + hi);
        if mid <= lo || mid >= hi {
            break;
        }
        if rho(mid)? < 1.0 {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    Ok(hi)
}

/// Analysis of one grid point, shared by all its seeds.
#[derive(Debug, Clone, PartialEq)]
pub struct PreparedPoint {
    pub index: usize,
    pub param: f64,
    pub system: LtiSystem,
    pub filter: FilterSpec,
    /// `None` when the closed loop is unstable at this point.
    pub metrics: Option<PointMetrics>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct PointMetrics {
    pub gain: Mat,
    pub rho: f64,
    pub factors: HRiskFactors,
    pub hrisk: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct SweepContext {
    pub base: BaseCalibration,
    pub grid: Vec<f64>,
    /// Gain-ray boundary, for B1 sweeps.
    pub alpha_crit: Option<f64>,
    pub reference_gain: Option<Mat>,
}

pub fn sweep_context(spec: &SweepSpec) -> Result<SweepContext> {
    spec.validate()?;
    let base = base_calibration(spec.sigma_w, spec.sigma_v)?;
    let (grid, alpha_crit, reference_gain) = match spec.kind {
        SweepKind::B1AlphaRay => {
            let crit = locate_alpha_crit(&b1_a(), &b1_h(), &base.k0)?;
            let grid = match &spec.grid {
                Grid::Explicit(g) => g.clone(),
                Grid::LogToCritical { points, fraction } => log_grid(1.0, fraction * crit, *points),
            };
            (grid, Some(crit), Some(base.k0.clone()))
        }
        SweepKind::B2Epsilon => {
            let Grid::Explicit(g) = &spec.grid else {
                return Err(invalid("observation-angle sweeps need an explicit grid"));
            };
            let reference = match spec.policy {
                PolicyKind::FixedRef => {
                    let (qf, rf) = (spec.true_q().scale(spec.q_scale), spec.true_r().scale(spec.r_scale));
                    Some(dare_gain(&b2_a(spec.a12), &b2_h(spec.ref_eps), &qf, &rf)?.predictor_gain)
                }
                PolicyKind::DarePerConfig => None,
            };
            (g.clone(), None, reference)
        }
    };
    Ok(SweepContext { base, grid, alpha_crit, reference_gain })
}

/// `n` points from `lo` to `hi`, evenly spaced in log scale.
pub fn log_grid(lo: f64, hi: f64, n: usize) -> Vec<f64> {
    if n == 1 {
        return vec![lo];
    }
    let (a, b) = (lo.ln(), hi.ln());
    (0..n).map(|i| (a + (b - a) * i as f64 / (n - 1) as f64).exp()).collect()
}

pub fn prepare_points(spec: &SweepSpec, ctx: &SweepContext) -> Result<Vec<PreparedPoint>> {
    ctx.grid.iter().enumerate().map(|(i, &p)| prepare_point(spec, ctx, i, p)).collect()
}

fn prepare_point(spec: &SweepSpec, ctx: &SweepContext, index: usize, param: f64) -> Result<PreparedPoint> {
    let (a, h) = match spec.kind {
        SweepKind::B1AlphaRay => (b1_a(), b1_h()),
        SweepKind::B2Epsilon => (b2_a(spec.a12), b2_h(param)),
    };
    let system = LtiSystem::new(a, h, spec.true_q(), spec.true_r())?;
    let policy = match (spec.kind, spec.policy, &ctx.reference_gain) {
        (_, PolicyKind::DarePerConfig, _) => GainPolicy::DarePerConfig,
        (SweepKind::B1AlphaRay, PolicyKind::FixedRef, Some(k0)) => GainPolicy::GainRay { base: k0.clone(), alpha: param },
        (SweepKind::B2Epsilon, PolicyKind::FixedRef, Some(k)) => GainPolicy::FixedRef(k.clone()),
        _ => return Err(invalid("fixed reference gain missing from the sweep context")),
    };
    let filter = FilterSpec::scaled(&system, spec.q_scale, spec.r_scale, policy)?;
    let gain = filter.resolve_gain(&system)?;
    let metrics = match ClosedLoopAnalysis::of(&system, &gain) {
        Ok(analysis) => {
            let factors = hrisk_factors(&analysis)?;
            let hrisk = hrisk_index(&factors, &ctx.base.config, FactorSet::EMPTY)?;
            Some(PointMetrics { gain: gain.clone(), rho: analysis.rho, factors, hrisk })
        }
        Err(Error::Unstable { .. }) => None,
        Err(e) => return Err(e),
    };
    // Freeze the resolved gain so every seed simulates exactly this loop.
    let filter = FilterSpec::new(filter.q, filter.r, GainPolicy::FixedRef(gain))?;
    Ok(PreparedPoint { index, param, system, filter, metrics })
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SeedOutcome {
    pub point: usize,
    pub seed: u64,
    pub nis_mean: f64,
    pub nis_q: f64,
    pub gated_fraction: f64,
}

/// Simulates one seed at a prepared point; `None` for unstable points.
pub fn simulate_seed(spec: &SweepSpec, point: &PreparedPoint, seed: u64) -> Result<Option<SeedOutcome>> {
    if point.metrics.is_none() {
        return Ok(None);
    }
    let mut cfg = RunConfig::new(point.system.clone(), point.filter.clone(), seed);
    cfg.steps = spec.steps;
    cfg.burn_in = spec.burn_in;
    cfg.quantile = spec.quantile;
    cfg.gate_probability = spec.gate_probability;
    let nis = simulate_nis(&cfg)?;
    Ok(Some(SeedOutcome {
        point: point.index,
        seed,
        nis_mean: nis.nis_mean,
        nis_q: nis.nis_q,
        gated_fraction: nis.gated_fraction,
    }))
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SweepRow {
    pub param_kind: &'static str,
    pub param_value: f64,
    pub seed: u64,
    pub rho: f64,
    pub kappa: f64,
    pub int_sens: f64,
    pub ia: f64,
    pub hrisk: f64,
    pub nis_mean: f64,
    pub nis_q: f64,
    pub gated_fraction: f64,
    pub stable: bool,
}

#[derive(Debug, Clone, PartialEq)]
pub struct SummaryRow {
    pub pair_label: String,
    pub statistic: String,
    pub point: f64,
    pub ci_lo: f64,
    pub ci_hi: f64,
    pub method: String,
    pub n: usize,
    pub n_boot: usize,
    pub seed: u64,
}

impl SummaryRow {
    pub fn excludes_zero(&self) -> bool {
        self.ci_lo > 0.0 || self.ci_hi < 0.0
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct SweepOutput {
    pub rows: Vec<SweepRow>,
    pub summary: Vec<SummaryRow>,
    pub ablation_summary: Vec<SummaryRow>,
    /// Grid points excluded from correlations because the loop was unstable.
    pub excluded_points: usize,
    pub context: SweepContext,
}

impl SweepOutput {
    pub fn find(&self, pair_label: &str, statistic: &str) -> Option<&SummaryRow> {
        self.summary.iter().chain(&self.ablation_summary).find(|r| r.pair_label == pair_label && r.statistic == statistic)
    }
}

/// Builds rows sorted by (grid index, seed) and all summary statistics.
pub fn assemble(
    spec: &SweepSpec,
    ctx: SweepContext,
    points: &[PreparedPoint],
    outcomes: &[SeedOutcome],
) -> Result<SweepOutput> {
    let mut seeds = spec.seeds.clone();
    seeds.sort_unstable();
    seeds.dedup();
    let mut rows = Vec::with_capacity(points.len() * seeds.len());
    for p in points {
        for &seed in &seeds {
            let outcome = outcomes.iter().find(|o| o.point == p.index && o.seed == seed);
            rows.push(match (&p.metrics, outcome) {
                (Some(m), Some(o)) => SweepRow {
                    param_kind: spec.kind.param_name(),
                    param_value: p.param,
                    seed,
                    rho: m.rho,
                    kappa: m.factors.kappa.value(),
                    int_sens: m.factors.int_sens,
                    ia: m.factors.ia,
                    hrisk: m.hrisk,
                    nis_mean: o.nis_mean,
                    nis_q: o.nis_q,
                    gated_fraction: o.gated_fraction,
                    stable: true,
                },
                (Some(_), None) => return Err(invalid(format!("missing simulation for point {} seed {seed}", p.index))),
                (None, _) => SweepRow {
                    param_kind: spec.kind.param_name(),
                    param_value: p.param,
                    seed,
                    rho: f64::NAN,
                    kappa: f64::NAN,
                    int_sens: f64::NAN,
                    ia: f64::NAN,
                    hrisk: f64::NAN,
                    nis_mean: f64::NAN,
                    nis_q: f64::NAN,
                    gated_fraction: f64::NAN,
                    stable: false,
                },
            });
        }
    }

    let stable: Vec<&PreparedPoint> = points.iter().filter(|p| p.metrics.is_some()).collect();
    let excluded_points = points.len() - stable.len();
    let options = SummaryOptions::from(spec);
    let summary = summarize_rows(&rows, &options)?;
    let nis_mean: Vec<f64> = stable.iter().map(|p| seed_mean(&rows, p.param, |r| r.nis_mean)).collect();
    let index_for = |ablate: FactorSet| -> Result<Vec<f64>> {
        stable
            .iter()
            .map(|p| hrisk_index(&p.metrics.as_ref().expect("stable point").factors, &ctx.base.config, ablate))
            .collect()
    };

    let mut ablation_summary = Vec::new();
    for &set in &spec.ablations {
        let x = index_for(set)?;
        let label = format!("{}~nis_mean", ablation_label(set));
        ablation_summary.extend(pair_summary(&options, &label, &x, &nis_mean)?);
    }

    Ok(SweepOutput { rows, summary, ablation_summary, excluded_points, context: ctx })
}

/// Settings for the correlation summary of a set of rows.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SummaryOptions {
    pub quantile: f64,
    pub n_boot: usize,
    pub boot_seed: u64,
    pub level: f64,
}

impl From<&SweepSpec> for SummaryOptions {
    fn from(spec: &SweepSpec) -> Self {
        Self { quantile: spec.quantile, n_boot: spec.n_boot, boot_seed: spec.boot_seed, level: spec.level }
    }
}

fn seed_mean(rows: &[SweepRow], param: f64, pick: fn(&SweepRow) -> f64) -> f64 {
    let vals: Vec<f64> = rows.iter().filter(|r| r.param_value == param && r.stable).map(pick).collect();
    vals.iter().sum::<f64>() / vals.len() as f64
}

/// Correlations of H-Risk against mean and tail NIS over stable rows.
///
/// Rows are averaged over seeds per parameter value (in first-seen order);
/// per-seed correlations follow when more than one seed is present.
pub fn summarize_rows(rows: &[SweepRow], options: &SummaryOptions) -> Result<Vec<SummaryRow>> {
    let mut params: Vec<f64> = Vec::new();
    let mut seeds: Vec<u64> = Vec::new();
    for r in rows.iter().filter(|r| r.stable) {
        if !params.contains(&r.param_value) {
            params.push(r.param_value);
        }
        if !seeds.contains(&r.seed) {
            seeds.push(r.seed);
        }
    }
    seeds.sort_unstable();
    let hrisk: Vec<f64> = params.iter().map(|&p| seed_mean(rows, p, |r| r.hrisk)).collect();
    let nis_mean: Vec<f64> = params.iter().map(|&p| seed_mean(rows, p, |r| r.nis_mean)).collect();
    let nis_q: Vec<f64> = params.iter().map(|&p| seed_mean(rows, p, |r| r.nis_q)).collect();

    let mut summary = pair_summary(options, "hrisk~nis_mean", &hrisk, &nis_mean)?;
    summary.extend(pair_summary(options, &format!("hrisk~{}", quantile_label(options.quantile)), &hrisk, &nis_q)?);
    if seeds.len() > 1 {
        for &seed in &seeds {
            let mut x = Vec::new();
            let mut y = Vec::new();
            for r in rows.iter().filter(|r| r.stable && r.seed == seed) {
                x.push(r.hrisk);
                y.push(r.nis_mean);
            }
            summary.extend(point_only(&format!("hrisk~nis_mean@seed={seed}"), &x, &y, seed));
        }
    }
    Ok(summary)
}

fn quantile_label(q: f64) -> String {
    let pct = q * 100.0;
    if (pct - pct.round()).abs() < 1e-9 {
        format!("nis_q{}", pct.round() as i64)
    } else {
        format!("nis_q{q}")
    }
}

const PAIR_STATISTICS: [PairStatistic; 3] = [PairStatistic::Pearson, PairStatistic::Spearman, PairStatistic::TheilSen];

/// Pearson, Spearman and Theil–Sen (y on x) with BCa intervals.
fn pair_summary(spec: &SummaryOptions, label: &str, x: &[f64], y: &[f64]) -> Result<Vec<SummaryRow>> {
    let n = x.len();
    let mut out = Vec::with_capacity(3);
    let sample = if n >= 2 { PairedSample::new(x.to_vec(), y.to_vec()).ok() } else { None };
    for stat in PAIR_STATISTICS {
        let mut row = SummaryRow {
            pair_label: String::from(label),
            statistic: String::from(stat.label()),
            point: f64::NAN,
            ci_lo: f64::NAN,
            ci_hi: f64::NAN,
            method: String::from("degenerate"),
            n,
            n_boot: 0,
            seed: spec.boot_seed,
        };
        if let Some(s) = &sample {
            match stat.eval(s) {
                Ok(point) => {
                    row.point = point;
                    row.method = String::from("none");
                    if n >= 3 {
                        let ci = bca_paired(s, stat, spec.level, spec.n_boot, spec.boot_seed)?;
                        row.ci_lo = ci.lo;
                        row.ci_hi = ci.hi;
                        row.n_boot = spec.n_boot;
                        row.method = match ci.flag {
                            None => String::from("BCa"),
                            Some(crate::stats::IntervalFlag::ZeroWidth) => String::from("BCa:zero-width"),
                            Some(crate::stats::IntervalFlag::PointOutside) => String::from("BCa:point-outside"),
                        };
                    }
                }
                Err(Error::Degenerate(_)) => {}
                Err(e) => return Err(e),
            }
        }
        out.push(row);
    }
    Ok(out)
}

fn point_only(label: &str, x: &[f64], y: &[f64], seed: u64) -> Vec<SummaryRow> {
    let sample = PairedSample::new(x.to_vec(), y.to_vec()).ok();
    [PairStatistic::Pearson, PairStatistic::Spearman]
        .into_iter()
        .map(|stat| {
            let point = sample.as_ref().and_then(|s| stat.eval(s).ok()).unwrap_or(f64::NAN);
            SummaryRow {
                pair_label: String::from(label),
                statistic: String::from(stat.label()),
                point,
                ci_lo: f64::NAN,
                ci_hi: f64::NAN,
                method: String::from(if point.is_nan() { "degenerate" } else { "none" }),
                n: x.len(),
                n_boot: 0,
                seed,
            }
        })
        .collect()
}

/// Serial reference runner; the CLI runs the same stages in parallel.
pub fn run_sweep(spec: &SweepSpec) -> Result<SweepOutput> {
    let ctx = sweep_context(spec)?;
    let points = prepare_points(spec, &ctx)?;
    let mut outcomes = Vec::new();
    for p in &points {
        for &seed in &spec.seeds {
            if let Some(o) = simulate_seed(spec, p, seed)? {
                outcomes.push(o);
            }
        }
    }
    assemble(spec, ctx, &points, &outcomes)
}

/// Summary rows for each configured ablation set.
pub fn run_ablation(spec: &SweepSpec) -> Result<Vec<SummaryRow>> {
    Ok(run_sweep(spec)?.ablation_summary)
}
