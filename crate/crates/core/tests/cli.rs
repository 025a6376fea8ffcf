use std::path::Path;
use std::process::Command;

use reram_correct::report::ReportRow;
use reram_correct::{DefectKind, EvalReport, ExperimentConfig, ExperimentKind};

fn cli() -> Command {
    Command::new(env!("CARGO_BIN_EXE_reram-correct"))
}

fn write(path: &Path, text: &str) {
    std::fs::write(path, text).unwrap();
}

#[test]
fn config_errors_exit_with_code_2() {
    let dir = tempfile::tempdir().unwrap();
    let bad = dir.path().join("bad.json");
    write(&bad, r#"{"experiment": "same_defect", "bogus": 1}"#);
    let status = cli().args(["same-defect", "--config"]).arg(&bad).status().unwrap();
    assert_eq!(status.code(), Some(2));

    write(&bad, r#"{"experiment": "same_defect", "corrector": "MLP(7,7)"}"#);
    let status = cli().args(["same-defect", "--config"]).arg(&bad).status().unwrap();
    assert_eq!(status.code(), Some(2));

    let status = cli()
        .args(["train-base", "--config"])
        .arg(dir.path().join("missing.json"))
        .status()
        .unwrap();
    assert_eq!(status.code(), Some(2));
}

#[test]
fn data_errors_exit_with_code_3() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = dir.path().join("cfg.json");
    let digits = dir.path().join("digits.csv");
    write(&digits, "0,1,2\n");
    write(
        &cfg,
        &format!(
            r#"{{"experiment": "layer_sweep", "digits_path": {:?}, "output_dir": {:?}}}"#,
            digits,
            dir.path().join("out")
        ),
    );
    let status = cli().args(["layer-sweep", "--config"]).arg(&cfg).status().unwrap();
    assert_eq!(status.code(), Some(3));
}

#[test]
fn train_base_writes_weights() {
    let dir = tempfile::tempdir().unwrap();
    let out = cli()
        .args(["train-base", "--seed", "1", "--output-dir"])
        .arg(dir.path())
        .output()
        .unwrap();
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
    assert!(dir.path().join("baseline.json").exists());
    assert!(String::from_utf8_lossy(&out.stdout).contains("baseline test accuracy"));
}

#[test]
fn report_subcommand_re_emits_csv() {
    let dir = tempfile::tempdir().unwrap();
    let row = ReportRow {
        experiment: ExperimentKind::SameDefect,
        kind_train: Some(DefectKind::Row),
        kind_test: DefectKind::Row,
        size: Some(2),
        layer: 1,
        severity_pairs: 20,
        coverage: 20.0 / 1020.0,
        acc_faulty: 0.5,
        acc_corrected: None,
        delta_pp: None,
        n_samples: 250,
        seed: 9,
        architecture: Some("MLP(10,10)".into()),
    }
    .with_correction(0.75);
    let report = EvalReport::new(ExperimentKind::SameDefect, vec![row]);
    let json = dir.path().join("r.json");
    write(&json, &report.to_json_string().unwrap());
    let csv = dir.path().join("r.csv");
    let status = cli()
        .args(["report", "--format", "csv", "--input"])
        .arg(&json)
        .arg("--output")
        .arg(&csv)
        .status()
        .unwrap();
    assert!(status.success());
    assert_eq!(std::fs::read(&csv).unwrap(), report.to_csv_bytes().unwrap());
    let text = String::from_utf8(std::fs::read(&csv).unwrap()).unwrap();
    assert_eq!(text.lines().count(), 2);
    assert!(text.starts_with("experiment,kind_train,kind_test,size,layer,severity_pairs,coverage"));
}

#[test]
fn shipped_configs_parse() {
    let dir = Path::new(env!("CARGO_MANIFEST_DIR")).join("configs");
    let mut n = 0;
    for entry in std::fs::read_dir(dir).unwrap() {
        let path = entry.unwrap().path();
        ExperimentConfig::load(&path).unwrap_or_else(|e| panic!("{}: {e}", path.display()));
        n += 1;
    }
    assert!(n >= 4);
}
