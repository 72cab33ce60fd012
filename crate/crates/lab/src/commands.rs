//! One function per CLI subcommand. Each returns the files it wrote.

use std::path::{Path, PathBuf};

use hrisk_core::sweep::{summarize_rows, PolicyKind, SummaryOptions, SummaryRow, SweepKind, SweepOutput, SweepSpec};

use crate::calib::{self, calibration_table};
use crate::config::{resolved_sweep_lines, AnalysisOptions, ConfigFile};
use crate::csvio::{emit_results, emit_summary, load_results, run_metadata, write_table};
use crate::deltas::{self, analyze_condition_deltas, load_items, pooled_summary};
use crate::error::Result;
use crate::runner::run_sweep_parallel;

/// Flags shared by every subcommand.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct CommonArgs {
    pub config: Option<PathBuf>,
    /// Simulation seed for sweeps; bootstrap seed for the analysis commands.
    pub seed: Option<u64>,
    pub seeds: Option<Vec<u64>>,
    pub out: PathBuf,
    pub quantile: Option<f64>,
}

impl CommonArgs {
    fn config(&self) -> Result<ConfigFile> {
        match &self.config {
            Some(p) => ConfigFile::load(p),
            None => Ok(ConfigFile::default()),
        }
    }

    fn out(&self, name: &str) -> PathBuf {
        self.out.join(name)
    }
}

/// Sweep spec from defaults, then the config file, then the flags.
pub fn sweep_spec(kind: SweepKind, args: &CommonArgs) -> Result<(SweepSpec, String)> {
    let cfg = args.config()?;
    let mut spec = match kind {
        SweepKind::B1AlphaRay => SweepSpec::b1_default(),
        SweepKind::B2Epsilon => SweepSpec::b2_default(),
    };
    cfg.apply_sweep(&mut spec)?;
    if let Some(s) = args.seed {
        spec.seeds = vec![s];
    }
    if let Some(s) = &args.seeds {
        spec.seeds = s.clone();
    }
    if let Some(q) = args.quantile {
        spec.quantile = q;
    }
    let default_label = match kind {
        SweepKind::B1AlphaRay => "b1",
        SweepKind::B2Epsilon => "b2",
    };
    Ok((spec, cfg.label().unwrap_or(default_label).to_string()))
}

fn analysis_options(args: &CommonArgs) -> Result<AnalysisOptions> {
    let mut o = args.config()?.analysis_options()?;
    if let Some(s) = args.seed {
        o.boot_seed = s;
    }
    Ok(o)
}

fn sweep_metadata(spec: &SweepSpec, out: &SweepOutput, label: &str) -> Vec<String> {
    let mut resolved = vec![format!("label={label}")];
    resolved.extend(resolved_sweep_lines(spec, &out.context));
    resolved.push(format!("excluded_unstable_points={}", out.excluded_points));
    run_metadata(Some(spec.burn_in), &resolved)
}

pub fn sweep(kind: SweepKind, args: &CommonArgs) -> Result<Vec<PathBuf>> {
    let (spec, label) = sweep_spec(kind, args)?;
    let out = run_sweep_parallel(&spec)?;
    let meta = sweep_metadata(&spec, &out, &label);
    let results = args.out(&format!("lti_results_{label}.csv"));
    let summary = args.out(&format!("lti_summary_{label}.csv"));
    emit_results(&results, &out.rows, &meta)?;
    emit_summary(&summary, &out.summary, &meta)?;
    Ok(vec![results, summary])
}

pub fn ablate(kind: SweepKind, args: &CommonArgs) -> Result<Vec<PathBuf>> {
    let (spec, label) = sweep_spec(kind, args)?;
    let out = run_sweep_parallel(&spec)?;
    let meta = sweep_metadata(&spec, &out, &label);
    let path = args.out(&format!("lti_ablation_{label}.csv"));
    emit_summary(&path, &out.ablation_summary, &meta)?;
    Ok(vec![path])
}

/// Runs the same sweep under both gain policies and compares the slopes.
pub fn gain_control(kind: SweepKind, args: &CommonArgs) -> Result<Vec<PathBuf>> {
    let (base, label) = sweep_spec(kind, args)?;
    let mut written = Vec::new();
    let mut combined: Vec<SummaryRow> = Vec::new();
    let mut slopes = Vec::new();
    let mut meta = Vec::new();
    for policy in [PolicyKind::FixedRef, PolicyKind::DarePerConfig] {
        let spec = SweepSpec { policy, ..base.clone() };
        let out = run_sweep_parallel(&spec)?;
        let m = sweep_metadata(&spec, &out, &label);
        let results = args.out(&format!("lti_results_{label}_{}.csv", policy.name()));
        emit_results(&results, &out.rows, &m)?;
        written.push(results);
        slopes.push(out.find("hrisk~nis_mean", "theil_sen").map_or(f64::NAN, |r| r.point));
        for r in &out.summary {
            combined.push(SummaryRow { pair_label: format!("{}:{}", policy.name(), r.pair_label), ..r.clone() });
        }
        meta = m;
    }
    combined.push(SummaryRow {
        pair_label: "dare_per_config/fixed_ref:hrisk~nis_mean".to_string(),
        statistic: "theil_sen_ratio".to_string(),
        point: slopes[1] / slopes[0],
        ci_lo: f64::NAN,
        ci_hi: f64::NAN,
        method: "ratio".to_string(),
        n: combined.first().map_or(0, |r| r.n),
        n_boot: 0,
        seed: base.boot_seed,
    });
    meta.retain(|l| !l.starts_with("policy=") && !l.starts_with("excluded_unstable_points="));
    meta.push("policy=fixed_ref,dare_per_config".to_string());
    let summary = args.out(&format!("lti_gain_control_{label}.csv"));
    emit_summary(&summary, &combined, &meta)?;
    written.push(summary);
    Ok(written)
}

pub fn deltas(input: &Path, args: &CommonArgs) -> Result<(Vec<PathBuf>, usize)> {
    let opts = analysis_options(args)?;
    let items = load_items(input)?;
    let report = analyze_condition_deltas(&items, &opts)?;
    let pooled = pooled_summary(&items, &opts)?;
    let mut resolved = opts.resolved_lines();
    resolved.push(format!("unpaired_items_excluded={}", report.unpaired));
    let meta = run_metadata(None, &resolved);
    let files = [
        ("condition_deltas_summary.csv", &deltas::SUMMARY_HEADER[..], report.summary_rows()),
        ("condition_deltas_long.csv", &deltas::LONG_HEADER[..], report.long_rows()),
        ("condition_deltas_table.csv", &deltas::TABLE_HEADER[..], report.table_rows()),
        ("pooled_summary.csv", &deltas::POOLED_HEADER[..], pooled.rows()),
    ];
    let mut written = Vec::new();
    for (name, header, rows) in files {
        let path = args.out(name);
        write_table(&path, &meta, header, &rows)?;
        written.push(path);
    }
    Ok((written, report.unpaired))
}

pub fn calib(input: &Path, args: &CommonArgs) -> Result<Vec<PathBuf>> {
    let opts = analysis_options(args)?;
    let items = load_items(input)?;
    let table = calibration_table(&items, &opts)?;
    let rows: Vec<Vec<String>> = table.iter().map(calib::CalibrationRow::cells).collect();
    let path = args.out("calibration_summary.csv");
    write_table(&path, &run_metadata(None, &opts.resolved_lines()), &calib::HEADER, &rows)?;
    Ok(vec![path])
}

/// Recomputes the correlation summary from an emitted results CSV.
pub fn report(input: &Path, args: &CommonArgs) -> Result<Vec<PathBuf>> {
    let opts = analysis_options(args)?;
    let rows = load_results(input)?;
    let options = SummaryOptions {
        quantile: args.quantile.unwrap_or(hrisk_core::sim::DEFAULT_QUANTILE),
        n_boot: opts.n_boot,
        boot_seed: opts.boot_seed,
        level: opts.level,
    };
    let summary = summarize_rows(&rows, &options)?;
    let stem = input.file_stem().and_then(|s| s.to_str()).unwrap_or("results");
    let path = args.out(&format!("{stem}_report.csv"));
    let mut resolved = vec![format!("input={}", input.display()), format!("quantile={}", options.quantile)];
    resolved.extend(opts.resolved_lines().into_iter().filter(|l| {
        ["n_boot=", "boot_seed=", "level="].iter().any(|p| l.starts_with(p))
    }));
    emit_summary(&path, &summary, &run_metadata(None, &resolved))?;
    Ok(vec![path])
}
