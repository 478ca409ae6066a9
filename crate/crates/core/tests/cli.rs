use std::process::{Command, Output};

use casimir_core::scenarios::{read_sweep_csv, DIFF_CSV_HEADER, SWEEP_CSV_HEADER};

fn casimir(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_casimir"))
        .args(args)
        .output()
        .expect("spawn casimir")
}

fn stdout(o: &Output) -> String {
    String::from_utf8_lossy(&o.stdout).into_owned()
}

fn stderr(o: &Output) -> String {
    String::from_utf8_lossy(&o.stderr).into_owned()
}

#[test]
fn pressure_text_reports_mpa() {
    let o = casimir(&["pressure", "--pair", "Au,Au", "--gap", "1um", "--temp", "300K"]);
    assert_eq!(o.status.code(), Some(0), "{}", stderr(&o));
    let out = stdout(&o);
    let line = out.lines().find(|l| l.starts_with("|F| =")).expect(&out);
    let value: f64 = line.split_whitespace().nth(2).unwrap().parse().unwrap();
    assert!((value - 0.96).abs() / 0.96 < 0.03, "{line}");
    assert!(line.contains("mPa"));
}

#[test]
fn zero_gap_is_usage_error() {
    let o = casimir(&["pressure", "--pair", "Au,Au", "--gap", "0nm", "--temp", "300K"]);
    assert_eq!(o.status.code(), Some(1));
    assert!(stderr(&o).contains("--gap"));
}

#[test]
fn bad_unit_and_preset_name_the_flag() {
    let o = casimir(&["pressure", "--pair", "Au,Au", "--gap", "1um", "--temp", "300C"]);
    assert_eq!(o.status.code(), Some(1));
    assert!(stderr(&o).contains("--temp"));
    let o = casimir(&["pressure", "--pair", "Au,Pt", "--gap", "1um", "--temp", "300K"]);
    assert_eq!(o.status.code(), Some(1));
    assert!(stderr(&o).contains("--pair"));
    let o = casimir(&[
        "pressure",
        "--pair",
        "Au,Au",
        "--gap",
        "1um",
        "--temp",
        "300K",
        "--frobnicate",
    ]);
    assert_eq!(o.status.code(), Some(1));
    assert!(stderr(&o).contains("--frobnicate"));
}

#[test]
fn help_exits_zero() {
    for sub in ["pressure", "sweep", "diff", "materials", "import-table"] {
        let o = casimir(&[sub, "--help"]);
        assert_eq!(o.status.code(), Some(0), "{sub}");
        assert!(stdout(&o).contains("Usage"));
    }
}

#[test]
fn diff_csv_single_row() {
    let o = casimir(&[
        "diff", "--pair", "Au,Au", "--gaps", "200nm", "--temps", "300,350", "--format", "csv",
    ]);
    assert_eq!(o.status.code(), Some(0), "{}", stderr(&o));
    let out = stdout(&o);
    let mut data = out.lines().filter(|l| !l.starts_with('#'));
    assert_eq!(data.next(), Some(DIFF_CSV_HEADER));
    let row: Vec<&str> = data.next().unwrap().split(',').collect();
    assert!(data.next().is_none());
    let delta: f64 = row[8].parse().unwrap();
    assert!((delta - 2.0e-3).abs() / 2.0e-3 < 0.15, "{delta}");
}

#[test]
fn sweep_csv_to_file_round_trips() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("sweep.csv");
    let o = casimir(&[
        "sweep",
        "--pairs",
        "Au,Au;Al,Cu",
        "--gaps",
        "100nm:1um:log:3",
        "--temps",
        "300,1",
        "--format",
        "csv",
        "--jobs",
        "2",
        "--output",
        path.to_str().unwrap(),
    ]);
    assert_eq!(o.status.code(), Some(0), "{}", stderr(&o));
    let text = std::fs::read_to_string(&path).unwrap();
    assert!(text.lines().any(|l| l == SWEEP_CSV_HEADER));
    let rows = read_sweep_csv(text.as_bytes()).unwrap();
    assert_eq!(rows.len(), 12);
    assert_eq!(rows[0].pair, "Au-Au");
    assert_eq!(rows[0].temperature, 1.0);

    let seq = casimir(&[
        "sweep",
        "--pairs",
        "Au,Au;Al,Cu",
        "--gaps",
        "100nm:1um:log:3",
        "--temps",
        "300,1",
        "--format",
        "csv",
        "--sequential",
    ]);
    assert_eq!(read_sweep_csv(seq.stdout.as_slice()).unwrap(), rows);
}

#[test]
fn materials_lists_presets() {
    let o = casimir(&["materials"]);
    assert_eq!(o.status.code(), Some(0));
    let out = stdout(&o);
    for name in ["Au", "Cu", "Al"] {
        assert!(out.contains(name));
    }
}

#[test]
fn import_table_validates() {
    let dir = tempfile::tempdir().unwrap();
    let good = dir.path().join("good.csv");
    std::fs::write(&good, "# gold\nzeta_rad_per_s,eps\n1e13,1e5\n1e14,1e4\n1e15,80\n").unwrap();
    let o = casimir(&["import-table", good.to_str().unwrap()]);
    assert_eq!(o.status.code(), Some(0), "{}", stderr(&o));
    assert!(stdout(&o).contains("3 points"));

    let bad = dir.path().join("bad.csv");
    std::fs::write(&bad, "zeta_rad_per_s,eps\n1e13,1e5\n1e12,1e4\n").unwrap();
    let o = casimir(&["import-table", bad.to_str().unwrap()]);
    assert_eq!(o.status.code(), Some(1));
    assert!(stderr(&o).contains("line 3"), "{}", stderr(&o));
}

#[test]
fn table_with_fallback_runs() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("au.csv");
    std::fs::write(&path, "zeta_rad_per_s,eps\n1e14,2e4\n1e16,1.5\n").unwrap();
    let spec = format!("table:{}@Au,Au", path.display());
    let o = casimir(&[
        "pressure", "--pair", &spec, "--gap", "1um", "--temp", "300K", "--format", "csv",
    ]);
    assert_eq!(o.status.code(), Some(0), "{}", stderr(&o));
    assert_eq!(read_sweep_csv(o.stdout.as_slice()).unwrap().len(), 1);
}
