//! The composite instability index and the critique gain search.

use alloc::string::String;
use alloc::vec::Vec;

use crate::error::{invalid, Error, Result};
use crate::lti::{dare_gain, ClosedLoopAnalysis, FilterSpec, GainPolicy, LtiSystem};
use crate::matrix::{Conditioning, Mat};
use crate::sim::{simulate_run, RunConfig};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Factor {
    Margin,
    Kappa,
    IntSens,
    Ia,
}

impl Factor {
    pub const ALL: [Factor; 4] = [Factor::Margin, Factor::Kappa, Factor::IntSens, Factor::Ia];

    pub fn index(self) -> usize {
        self as usize
    }

    pub fn name(self) -> &'static str {
        match self {
            Factor::Margin => "margin",
            Factor::Kappa => "kappa",
            Factor::IntSens => "int_sens",
            Factor::Ia => "ia",
        }
    }

    pub fn parse(s: &str) -> Option<Factor> {
        Factor::ALL.into_iter().find(|f| f.name() == s)
    }
}

/// A set of factors, used for ablations.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Hash)]
pub struct FactorSet(u8);

impl FactorSet {
    pub const EMPTY: FactorSet = FactorSet(0);

    pub fn single(f: Factor) -> Self {
        FactorSet(1 << f.index())
    }

    pub fn with(self, f: Factor) -> Self {
        FactorSet(self.0 | 1 << f.index())
    }

    pub fn contains(self, f: Factor) -> bool {
        self.0 & (1 << f.index()) != 0
    }

    pub fn is_empty(self) -> bool {
        self.0 == 0
    }

    pub fn is_full(self) -> bool {
        self.0 == 0b1111
    }
}

impl FromIterator<Factor> for FactorSet {
    fn from_iter<I: IntoIterator<Item = Factor>>(iter: I) -> Self {
        iter.into_iter().fold(FactorSet::EMPTY, FactorSet::with)
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct HRiskFactors {
    pub margin: f64,
    pub kappa: Conditioning,
    pub int_sens: f64,
    pub ia: f64,
}

impl HRiskFactors {
    /// Numeric value of one factor; NaN for an undefined condition number.
    pub fn get(&self, f: Factor) -> f64 {
        match f {
            Factor::Margin => self.margin,
            Factor::Kappa => self.kappa.value(),
            Factor::IntSens => self.int_sens,
            Factor::Ia => self.ia,
        }
    }

    pub fn values(&self) -> [f64; 4] {
        Factor::ALL.map(|f| self.get(f))
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct HRiskConfig {
    pub c: [f64; 4],
    pub base_label: String,
}

impl HRiskConfig {
    pub fn new(c: [f64; 4], base_label: impl Into<String>) -> Result<Self> {
        if c.iter().any(|&ci| !(ci > 0.0 && ci.is_finite())) {
            return Err(invalid("scaling constants must be positive and finite"));
        }
        Ok(Self { c, base_label: base_label.into() })
    }

    /// All constants one: the raw, unscaled product.
    pub fn unit() -> Self {
        Self { c: [1.0; 4], base_label: String::from("unscaled") }
    }
}

pub fn hrisk_factors(analysis: &ClosedLoopAnalysis) -> Result<HRiskFactors> {
    if !(analysis.rho < 1.0) {
        return Err(Error::Unstable { rho: analysis.rho });
    }
    Ok(HRiskFactors {
        margin: 1.0 / (1.0 - analysis.rho),
        kappa: analysis.kappa,
        int_sens: analysis.int_sens,
        ia: analysis.ia,
    })
}

/// Constants `cᵢ = 1/factorᵢ(base)`, so the index is exactly 1 at the base.
pub fn calibrate_constants(base: &HRiskFactors, base_label: impl Into<String>) -> Result<HRiskConfig> {
    let mut c = [0.0; 4];
    for f in Factor::ALL {
        let v = base.get(f);
        if !(v > 0.0 && v.is_finite()) {
            return Err(Error::Calibration(alloc::format!("base factor {} is {v}", f.name())));
        }
        c[f.index()] = 1.0 / v;
    }
    HRiskConfig::new(c, base_label)
}

/// Product of `cᵢ·factorᵢ` over the factors not in `ablate`.
pub fn hrisk_index(factors: &HRiskFactors, config: &HRiskConfig, ablate: FactorSet) -> Result<f64> {
    if ablate.is_full() {
        return Err(invalid("cannot ablate every factor"));
    }
    let mut index = 1.0;
    for f in Factor::ALL {
        if ablate.contains(f) {
            continue;
        }
        let v = factors.get(f);
        if !v.is_finite() {
            return Err(Error::NonFinite(f.name()));
        }
        index *= config.c[f.index()] * v;
    }
    Ok(index)
}

/// How the search estimates the mean-square innovation `L(K)`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum LossEstimator {
    /// `tr(S)` of the steady innovation covariance under the true noise.
    Analytic,
    /// Sample mean of `‖r_t‖²` from one seeded run.
    Simulated { seed: u64, steps: usize },
}

#[derive(Debug, Clone, PartialEq)]
pub struct CritiqueResult {
    pub alpha: f64,
    pub gain: Mat,
    pub objective: f64,
    pub loss: f64,
    pub hrisk: f64,
}

/// Ray direction `K₀` implied by a filter's policy.
pub fn ray_base(sys: &LtiSystem, filter: &FilterSpec) -> Result<Mat> {
    match &filter.policy {
        GainPolicy::FixedRef(k) => Ok(k.clone()),
        GainPolicy::GainRay { base, .. } => Ok(base.clone()),
        GainPolicy::DarePerConfig => Ok(dare_gain(&sys.a, &sys.h, &filter.q, &filter.r)?.predictor_gain),
    }
}

/// Grid search of `L(αK₀) + λ·H-Risk` over `alpha_grid`. Unstable grid
/// points are skipped; ties go to the smaller α.
pub fn critique_gain_search(
    sys: &LtiSystem,
    filter: &FilterSpec,
    config: &HRiskConfig,
    lambda: f64,
    alpha_grid: &[f64],
    loss: LossEstimator,
) -> Result<CritiqueResult> {
    if alpha_grid.is_empty() {
        return Err(invalid("alpha grid is empty"));
    }
    if !(lambda >= 0.0) {
        return Err(invalid("lambda must be nonnegative"));
    }
    let k0 = ray_base(sys, filter)?;
    let mut best: Option<CritiqueResult> = None;
    for &alpha in alpha_grid {
        let Some(candidate) = evaluate_candidate(sys, filter, config, lambda, &k0, alpha, loss)? else {
            continue;
        };
        let better = match &best {
            None => true,
            Some(b) => {
                candidate.objective < b.objective || (candidate.objective == b.objective && candidate.alpha < b.alpha)
            }
        };
        if better {
            best = Some(candidate);
        }
    }
    best.ok_or(Error::Search)
}

/// Objective value at every grid point (None where unstable).
pub fn critique_objective_curve(
    sys: &LtiSystem,
    filter: &FilterSpec,
    config: &HRiskConfig,
    lambda: f64,
    alpha_grid: &[f64],
    loss: LossEstimator,
) -> Result<Vec<Option<CritiqueResult>>> {
    let k0 = ray_base(sys, filter)?;
    alpha_grid
        .iter()
        .map(|&alpha| evaluate_candidate(sys, filter, config, lambda, &k0, alpha, loss))
        .collect()
}

fn evaluate_candidate(
    sys: &LtiSystem,
    filter: &FilterSpec,
    config: &HRiskConfig,
    lambda: f64,
    k0: &Mat,
    alpha: f64,
    loss: LossEstimator,
) -> Result<Option<CritiqueResult>> {
    let gain = k0.scale(alpha);
    let analysis = match ClosedLoopAnalysis::of(sys, &gain) {
        Ok(a) => a,
        Err(Error::Unstable { .. }) | Err(Error::Singular { .. }) => return Ok(None),
        Err(e) => return Err(e),
    };
    let hrisk = match hrisk_index(&hrisk_factors(&analysis)?, config, FactorSet::EMPTY) {
        Ok(v) => v,
        // A zero loop (α = 0 with ρ(A) = 0) has no condition number; it can
        // still win at λ = 0.
        Err(Error::NonFinite(_)) if lambda == 0.0 => 0.0,
        Err(Error::NonFinite(_)) => return Ok(None),
        Err(e) => return Err(e),
    };
    let loss_value = match loss {
        LossEstimator::Analytic => analysis.s.trace(),
        LossEstimator::Simulated { seed, steps } => {
            let fixed = FilterSpec::new(filter.q.clone(), filter.r.clone(), GainPolicy::FixedRef(gain.clone()))?;
            let mut cfg = RunConfig::new(sys.clone(), fixed, seed);
            cfg.steps = steps;
            let out = simulate_run(&cfg)?;
            let r = &out.trajectory.innovations;
            r.iter().map(|v| v * v).sum::<f64>() / out.trajectory.len() as f64
        }
    };
    let objective = if lambda == 0.0 { loss_value } else { loss_value + lambda * hrisk };
    Ok(Some(CritiqueResult { alpha, gain, objective, loss: loss_value, hrisk }))
}
