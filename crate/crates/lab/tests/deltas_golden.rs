use std::path::{Path, PathBuf};

use hrisk_lab::commands::{deltas, CommonArgs};

fn fixture(name: &str) -> PathBuf {
    Path::new(env!("CARGO_MANIFEST_DIR")).join("tests/fixtures").join(name)
}

/// File contents without the tool-version line.
fn body(path: &Path) -> String {
    std::fs::read_to_string(path).unwrap().lines().filter(|l| !l.starts_with("# tool=")).collect::<Vec<_>>().join("\n")
}

fn run(input: &str) -> (tempfile::TempDir, usize) {
    let dir = tempfile::tempdir().unwrap();
    let args = CommonArgs { out: dir.path().to_path_buf(), ..Default::default() };
    let (_, unpaired) = deltas(&fixture(input), &args).unwrap();
    (dir, unpaired)
}

#[test]
fn paired_fixture_matches_golden_table() {
    let (dir, unpaired) = run("paired_deltas.csv");
    assert_eq!(unpaired, 0);
    for name in ["condition_deltas_summary.csv", "condition_deltas_table.csv"] {
        assert_eq!(body(&dir.path().join(name)), body(&fixture(&format!("golden/{name}"))), "{name}");
    }
}

#[test]
fn paired_fixture_has_the_expected_shape() {
    let (dir, _) = run("paired_deltas.csv");
    let text = std::fs::read_to_string(dir.path().join("condition_deltas_table.csv")).unwrap();
    let rows: Vec<&str> = text.lines().filter(|l| !l.starts_with('#')).skip(1).collect();
    assert_eq!(rows.len(), 2);
    // C1 is a null effect with a CI straddling zero; C2 is a positive effect.
    assert!(rows[0].contains(",C1,\"0.010 [-0.020, 0.050]\""), "{}", rows[0]);
    assert!(rows[1].contains(",C2,\"0.100 ["), "{}", rows[1]);
    let long = std::fs::read_to_string(dir.path().join("condition_deltas_long.csv")).unwrap();
    assert_eq!(long.lines().filter(|l| !l.starts_with('#')).count(), 1 + 2 * 100 * 3);
}

#[test]
fn pooled_fixture_reproduces_the_note() {
    let (dir, _) = run("pooled_summary.csv");
    let produced = dir.path().join("pooled_summary.csv");
    assert_eq!(body(&produced), body(&fixture("golden/pooled_summary.csv")));
    let text = std::fs::read_to_string(produced).unwrap();
    let row: Vec<f64> = text.lines().last().unwrap().split(',').map(|v| v.parse().unwrap()).collect();
    assert_eq!(row[0], 30.0);
    assert!((row[1] - 0.929).abs() < 5e-4);
    assert!((row[2] - 0.70).abs() < 1e-12);
    assert!((row[3] - 7.0 / 30.0).abs() < 1e-12);
}

#[test]
fn repeated_runs_are_byte_identical() {
    let (a, _) = run("paired_deltas.csv");
    let (b, _) = run("paired_deltas.csv");
    for name in ["condition_deltas_summary.csv", "condition_deltas_long.csv", "condition_deltas_table.csv", "pooled_summary.csv"] {
        assert_eq!(std::fs::read(a.path().join(name)).unwrap(), std::fs::read(b.path().join(name)).unwrap(), "{name}");
    }
}

#[test]
fn missing_baseline_is_an_error() {
    let dir = tempfile::tempdir().unwrap();
    let input = dir.path().join("in.csv");
    std::fs::write(
        &input,
        "domain,qid,condition,prompt,confidence,correct,brier,logloss,halluc_rate\n\
         d,1,C1,p,0.9,1,0,0,0\nd,2,C1,p,0.9,1,0,0,0\nd,3,C1,p,0.9,0,1,1,1\n",
    )
    .unwrap();
    let args = CommonArgs { out: dir.path().to_path_buf(), ..Default::default() };
    assert!(deltas(&input, &args).is_err());
}
