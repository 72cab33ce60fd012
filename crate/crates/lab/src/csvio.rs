//! CSV emission and loading. Every file starts with `#` metadata lines,
//! then a header row. Floats use 17 significant digits; NaN is an empty field.

use std::path::Path;

use hrisk_core::rng::GENERATOR_NAME;
use hrisk_core::sim::QUANTILE_CONVENTION;
use hrisk_core::sweep::{SummaryRow, SweepRow};

use crate::error::{LabError, Result};

pub const RESULTS_HEADER: [&str; 12] = [
    "param_kind",
    "param_value",
    "seed",
    "rho",
    "kappa",
    "int_sens",
    "ia",
    "hrisk",
    "nis_mean",
    "nis_q",
    "gated_fraction",
    "stable_flag",
];

pub const SUMMARY_HEADER: [&str; 9] =
    ["pair_label", "statistic", "point", "ci_lo", "ci_hi", "method", "n", "n_boot", "seed"];

/// Standard metadata block: tool, generator, burn-in, quantile convention,
/// then the caller's resolved settings.
pub fn run_metadata(burn_in: Option<usize>, resolved: &[String]) -> Vec<String> {
    let mut lines = vec![
        format!("tool=hrisk-lab {}", env!("CARGO_PKG_VERSION")),
        format!("generator={GENERATOR_NAME}"),
    ];
    if let Some(b) = burn_in {
        lines.push(format!("burn_in={b}"));
    }
    lines.push(format!("quantile_convention={QUANTILE_CONVENTION}"));
    lines.extend(resolved.iter().cloned());
    lines
}

pub fn fmt_f64(v: f64) -> String {
    if v.is_nan() {
        String::new()
    } else {
        format!("{v:.16e}")
    }
}

fn parse_f64(field: &str) -> std::result::Result<f64, String> {
    if field.is_empty() {
        return Ok(f64::NAN);
    }
    field.parse().map_err(|_| format!("invalid number {field:?}"))
}

/// Renders metadata comments, header and rows to a string.
pub fn render_table(metadata: &[String], header: &[&str], rows: &[Vec<String>]) -> String {
    let mut out = String::new();
    for line in metadata {
        out.push_str("# ");
        out.push_str(line);
        out.push('\n');
    }
    let mut w = csv::WriterBuilder::new().terminator(csv::Terminator::Any(b'\n')).from_writer(Vec::new());
    w.write_record(header).expect("in-memory write");
    for r in rows {
        w.write_record(r).expect("in-memory write");
    }
    out.push_str(&String::from_utf8(w.into_inner().expect("in-memory flush")).expect("utf-8 fields"));
    out
}

pub fn write_table(path: &Path, metadata: &[String], header: &[&str], rows: &[Vec<String>]) -> Result<()> {
    if let Some(dir) = path.parent().filter(|d| !d.as_os_str().is_empty()) {
        std::fs::create_dir_all(dir).map_err(|e| LabError::io(dir, e))?;
    }
    std::fs::write(path, render_table(metadata, header, rows)).map_err(|e| LabError::io(path, e))
}

/// Rows of a `#`-commented CSV keyed by header, with 1-based line numbers.
pub struct Table {
    pub header: Vec<String>,
    pub rows: Vec<(u64, csv::StringRecord)>,
}

impl Table {
    pub fn parse(text: &str, origin: &Path) -> Result<Self> {
        let mut r = csv::ReaderBuilder::new().comment(Some(b'#')).trim(csv::Trim::All).from_reader(text.as_bytes());
        let header: Vec<String> = r
            .headers()
            .map_err(|e| LabError::Csv { path: origin.to_path_buf(), source: e })?
            .iter()
            .map(str::to_string)
            .collect();
        if header.iter().all(String::is_empty) {
            return Err(LabError::parse(origin, 1, "missing header row"));
        }
        let mut rows = Vec::new();
        for rec in r.records() {
            let rec = rec.map_err(|e| {
                let line = e.position().map(|p| p.line()).unwrap_or(0);
                LabError::parse(origin, line, e.to_string())
            })?;
            let line = rec.position().map(|p| p.line()).unwrap_or(0);
            rows.push((line, rec));
        }
        Ok(Self { header, rows })
    }

    pub fn load(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path).map_err(|e| LabError::io(path, e))?;
        Self::parse(&text, path)
    }

    /// Column positions of `names`; errors list every absent column.
    pub fn columns(&self, names: &[&str], origin: &Path) -> Result<Vec<usize>> {
        let missing: Vec<&str> = names.iter().copied().filter(|n| !self.header.iter().any(|h| h == n)).collect();
        if !missing.is_empty() {
            return Err(LabError::parse(origin, 1, format!("missing columns: {}", missing.join(", "))));
        }
        Ok(names.iter().map(|n| self.header.iter().position(|h| h == n).expect("checked")).collect())
    }
}

pub fn results_rows(rows: &[SweepRow]) -> Vec<Vec<String>> {
    rows.iter()
        .map(|r| {
            vec![
                r.param_kind.to_string(),
                fmt_f64(r.param_value),
                r.seed.to_string(),
                fmt_f64(r.rho),
                fmt_f64(r.kappa),
                fmt_f64(r.int_sens),
                fmt_f64(r.ia),
                fmt_f64(r.hrisk),
                fmt_f64(r.nis_mean),
                fmt_f64(r.nis_q),
                fmt_f64(r.gated_fraction),
                u8::from(r.stable).to_string(),
            ]
        })
        .collect()
}

pub fn emit_results(path: &Path, rows: &[SweepRow], metadata: &[String]) -> Result<()> {
    write_table(path, metadata, &RESULTS_HEADER, &results_rows(rows))
}

pub fn parse_results(text: &str, origin: &Path) -> Result<Vec<SweepRow>> {
    let table = Table::parse(text, origin)?;
    if table.header != RESULTS_HEADER {
        return Err(LabError::parse(origin, 1, format!("expected header {}", RESULTS_HEADER.join(","))));
    }
    table
        .rows
        .iter()
        .map(|(line, rec)| {
            let bad = |m: String| LabError::parse(origin, *line, m);
            if rec.len() != RESULTS_HEADER.len() {
                return Err(bad(format!("expected {} fields, found {}", RESULTS_HEADER.len(), rec.len())));
            }
            let num = |i: usize| parse_f64(&rec[i]).map_err(|m| bad(format!("{}: {m}", RESULTS_HEADER[i])));
            let param_kind = match &rec[0] {
                "alpha" => "alpha",
                "epsilon" => "epsilon",
                other => return Err(bad(format!("unknown param_kind {other:?}"))),
            };
            let stable = match &rec[11] {
                "1" => true,
                "0" => false,
                other => return Err(bad(format!("stable_flag must be 0 or 1, got {other:?}"))),
            };
            Ok(SweepRow {
                param_kind,
                param_value: num(1)?,
                seed: rec[2].parse().map_err(|_| bad(format!("invalid seed {:?}", &rec[2])))?,
                rho: num(3)?,
                kappa: num(4)?,
                int_sens: num(5)?,
                ia: num(6)?,
                hrisk: num(7)?,
                nis_mean: num(8)?,
                nis_q: num(9)?,
                gated_fraction: num(10)?,
                stable,
            })
        })
        .collect()
}

pub fn load_results(path: &Path) -> Result<Vec<SweepRow>> {
    let text = std::fs::read_to_string(path).map_err(|e| LabError::io(path, e))?;
    parse_results(&text, path)
}

pub fn summary_rows(rows: &[SummaryRow]) -> Vec<Vec<String>> {
    rows.iter()
        .map(|r| {
            vec![
                r.pair_label.clone(),
                r.statistic.clone(),
                fmt_f64(r.point),
                fmt_f64(r.ci_lo),
                fmt_f64(r.ci_hi),
                r.method.clone(),
                r.n.to_string(),
                r.n_boot.to_string(),
                r.seed.to_string(),
            ]
        })
        .collect()
}

pub fn emit_summary(path: &Path, rows: &[SummaryRow], metadata: &[String]) -> Result<()> {
    write_table(path, metadata, &SUMMARY_HEADER, &summary_rows(rows))
}

pub fn parse_summary(text: &str, origin: &Path) -> Result<Vec<SummaryRow>> {
    let table = Table::parse(text, origin)?;
    if table.header != SUMMARY_HEADER {
        return Err(LabError::parse(origin, 1, format!("expected header {}", SUMMARY_HEADER.join(","))));
    }
    table
        .rows
        .iter()
        .map(|(line, rec)| {
            let bad = |m: String| LabError::parse(origin, *line, m);
            if rec.len() != SUMMARY_HEADER.len() {
                return Err(bad(format!("expected {} fields, found {}", SUMMARY_HEADER.len(), rec.len())));
            }
            let num = |i: usize| parse_f64(&rec[i]).map_err(bad);
            let int = |i: usize| rec[i].parse::<u64>().map_err(|_| bad(format!("invalid integer {:?}", &rec[i])));
            Ok(SummaryRow {
                pair_label: rec[0].to_string(),
                statistic: rec[1].to_string(),
                point: num(2)?,
                ci_lo: num(3)?,
                ci_hi: num(4)?,
                method: rec[5].to_string(),
                n: int(6)? as usize,
                n_boot: int(7)? as usize,
                seed: int(8)?,
            })
        })
        .collect()
}

pub fn load_summary(path: &Path) -> Result<Vec<SummaryRow>> {
    let text = std::fs::read_to_string(path).map_err(|e| LabError::io(path, e))?;
    parse_summary(&text, path)
}
