//! Flat `key = value` configuration files with `#` comments.

use std::path::Path;

use hrisk_core::hrisk::{Factor, FactorSet};
use hrisk_core::stats::{DEFAULT_LEVEL, DEFAULT_N_BOOT};
use hrisk_core::sweep::{ablation_label, Grid, PolicyKind, SweepContext, SweepSpec, DEFAULT_BOOT_SEED};

use crate::error::{LabError, Result};

pub const SWEEP_KEYS: &[&str] = &[
    "label",
    "grid",
    "grid_points",
    "grid_fraction",
    "a12",
    "sigma_w",
    "sigma_v",
    "q_scale",
    "r_scale",
    "policy",
    "ref_eps",
    "seeds",
    "steps",
    "burn_in",
    "quantile",
    "gate_probability",
    "ablations",
];
pub const ANALYSIS_KEYS: &[&str] =
    &["n_boot", "boot_seed", "level", "baseline", "bins", "log_epsilon", "overconfidence_threshold"];

#[derive(Debug, Clone, Default, PartialEq)]
pub struct ConfigFile {
    entries: Vec<(usize, String, String)>,
}

impl ConfigFile {
    pub fn parse(text: &str) -> Result<Self> {
        let mut entries: Vec<(usize, String, String)> = Vec::new();
        for (i, raw) in text.lines().enumerate() {
            let line = i + 1;
            let content = raw.split('#').next().unwrap_or("").trim();
            if content.is_empty() {
                continue;
            }
            let Some((key, value)) = content.split_once('=') else {
                return Err(LabError::Config { line, message: format!("expected key = value, got {content:?}") });
            };
            let key = key.trim().to_string();
            if !SWEEP_KEYS.contains(&key.as_str()) && !ANALYSIS_KEYS.contains(&key.as_str()) {
                return Err(LabError::Config { line, message: format!("unknown key {key:?}") });
            }
            if entries.iter().any(|(_, k, _)| *k == key) {
                return Err(LabError::Config { line, message: format!("duplicate key {key:?}") });
            }
            entries.push((line, key, value.trim().to_string()));
        }
        Ok(Self { entries })
    }

    pub fn load(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path).map_err(|e| LabError::io(path, e))?;
        Self::parse(&text)
    }

    fn get(&self, key: &str) -> Option<(usize, &str)> {
        self.entries.iter().find(|(_, k, _)| k == key).map(|(l, _, v)| (*l, v.as_str()))
    }

    fn value<T: std::str::FromStr>(&self, key: &str) -> Result<Option<T>> {
        match self.get(key) {
            None => Ok(None),
            Some((line, v)) => v
                .parse()
                .map(Some)
                .map_err(|_| LabError::Config { line, message: format!("invalid value {v:?} for {key}") }),
        }
    }

    fn list<T: std::str::FromStr>(&self, key: &str) -> Result<Option<Vec<T>>> {
        match self.get(key) {
            None => Ok(None),
            Some((line, v)) => parse_list(v)
                .map(Some)
                .map_err(|bad| LabError::Config { line, message: format!("invalid list item {bad:?} for {key}") }),
        }
    }

    pub fn label(&self) -> Option<&str> {
        self.get("label").map(|(_, v)| v)
    }

    /// Applies every sweep key present to `spec`.
    pub fn apply_sweep(&self, spec: &mut SweepSpec) -> Result<()> {
        if let Some(g) = self.list::<f64>("grid")? {
            spec.grid = Grid::Explicit(g);
        }
        let points = self.value::<usize>("grid_points")?;
        let fraction = self.value::<f64>("grid_fraction")?;
        if points.is_some() || fraction.is_some() {
            let (mut p, mut f) = (12, 0.98);
            if let Grid::LogToCritical { points, fraction } = spec.grid {
                (p, f) = (points, fraction);
            }
            spec.grid = Grid::LogToCritical { points: points.unwrap_or(p), fraction: fraction.unwrap_or(f) };
        }
        set(&mut spec.a12, self.value("a12")?);
        set(&mut spec.sigma_w, self.value("sigma_w")?);
        set(&mut spec.sigma_v, self.value("sigma_v")?);
        set(&mut spec.q_scale, self.value("q_scale")?);
        set(&mut spec.r_scale, self.value("r_scale")?);
        if let Some((line, v)) = self.get("policy") {
            spec.policy = PolicyKind::parse(v)
                .ok_or_else(|| LabError::Config { line, message: format!("unknown gain policy {v:?}") })?;
        }
        set(&mut spec.ref_eps, self.value("ref_eps")?);
        set(&mut spec.seeds, self.list("seeds")?);
        set(&mut spec.steps, self.value("steps")?);
        set(&mut spec.burn_in, self.value("burn_in")?);
        set(&mut spec.quantile, self.value("quantile")?);
        set(&mut spec.gate_probability, self.value("gate_probability")?);
        set(&mut spec.n_boot, self.value("n_boot")?);
        set(&mut spec.boot_seed, self.value("boot_seed")?);
        set(&mut spec.level, self.value("level")?);
        if let Some((line, v)) = self.get("ablations") {
            spec.ablations = parse_ablations(v).map_err(|message| LabError::Config { line, message })?;
        }
        Ok(())
    }

    pub fn analysis_options(&self) -> Result<AnalysisOptions> {
        let mut o = AnalysisOptions::default();
        set(&mut o.n_boot, self.value("n_boot")?);
        set(&mut o.boot_seed, self.value("boot_seed")?);
        set(&mut o.level, self.value("level")?);
        set(&mut o.baseline, self.value("baseline")?);
        set(&mut o.bins, self.value("bins")?);
        set(&mut o.log_epsilon, self.value("log_epsilon")?);
        set(&mut o.overconfidence_threshold, self.value("overconfidence_threshold")?);
        Ok(o)
    }
}

fn set<T>(slot: &mut T, value: Option<T>) {
    if let Some(v) = value {
        *slot = v;
    }
}

pub fn parse_list<T: std::str::FromStr>(v: &str) -> std::result::Result<Vec<T>, String> {
    v.split(',')
        .map(str::trim)
        .filter(|s| !s.is_empty())
        .map(|s| s.parse().map_err(|_| s.to_string()))
        .collect()
}

/// `none, kappa, margin+ia` → factor sets.
pub fn parse_ablations(v: &str) -> std::result::Result<Vec<FactorSet>, String> {
    v.split(',')
        .map(str::trim)
        .filter(|s| !s.is_empty())
        .map(|item| {
            if item == "none" {
                return Ok(FactorSet::EMPTY);
            }
            item.split('+')
                .map(|name| Factor::parse(name.trim()).ok_or_else(|| format!("unknown factor {name:?}")))
                .collect::<std::result::Result<FactorSet, String>>()
        })
        .collect()
}

#[derive(Debug, Clone, PartialEq)]
pub struct AnalysisOptions {
    pub n_boot: usize,
    pub boot_seed: u64,
    pub level: f64,
    pub baseline: String,
    pub bins: usize,
    pub log_epsilon: f64,
    /// A wrong answer at or above this confidence counts as overconfident.
    pub overconfidence_threshold: f64,
}

impl Default for AnalysisOptions {
    fn default() -> Self {
        Self {
            n_boot: DEFAULT_N_BOOT,
            boot_seed: DEFAULT_BOOT_SEED,
            level: DEFAULT_LEVEL,
            baseline: "C0".to_string(),
            bins: hrisk_core::calibration::DEFAULT_BINS,
            log_epsilon: hrisk_core::calibration::DEFAULT_LOG_EPSILON,
            overconfidence_threshold: 0.5,
        }
    }
}

impl AnalysisOptions {
    pub fn resolved_lines(&self) -> Vec<String> {
        vec![
            format!("n_boot={}", self.n_boot),
            format!("boot_seed={}", self.boot_seed),
            format!("level={}", self.level),
            format!("baseline={}", self.baseline),
            format!("bins={}", self.bins),
            format!("log_epsilon={:e}", self.log_epsilon),
            format!("overconfidence_threshold={}", self.overconfidence_threshold),
        ]
    }
}

fn join<T: ToString>(v: &[T]) -> String {
    v.iter().map(ToString::to_string).collect::<Vec<_>>().join(",")
}

/// Every sweep setting, with the grid as actually run.
pub fn resolved_sweep_lines(spec: &SweepSpec, ctx: &SweepContext) -> Vec<String> {
    let mut lines = vec![
        format!("kind={}", spec.kind.param_name()),
        format!("grid={}", join(&ctx.grid)),
    ];
    if let Some(crit) = ctx.alpha_crit {
        lines.push(format!("alpha_crit={crit}"));
    }
    lines.extend([
        format!("a12={}", spec.a12),
        format!("sigma_w={}", spec.sigma_w),
        format!("sigma_v={}", spec.sigma_v),
        format!("q_scale={}", spec.q_scale),
        format!("r_scale={}", spec.r_scale),
        format!("policy={}", spec.policy.name()),
        format!("ref_eps={}", spec.ref_eps),
        format!("seeds={}", join(&spec.seeds)),
        format!("steps={}", spec.steps),
        format!("quantile={}", spec.quantile),
        format!("gate_probability={}", spec.gate_probability),
        format!("n_boot={}", spec.n_boot),
        format!("boot_seed={}", spec.boot_seed),
        format!("level={}", spec.level),
        format!(
            "ablations={}",
            spec.ablations.iter().map(|s| ablation_label(*s)).collect::<Vec<_>>().join(",")
        ),
        format!("hrisk_constants={}", join(&ctx.base.config.c)),
        format!("hrisk_base={}", ctx.base.config.base_label),
    ]);
    lines
}
