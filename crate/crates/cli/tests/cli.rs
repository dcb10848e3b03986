use std::fs;
use std::path::Path;
use std::process::{Command, Output};

fn ttorder(dir: &Path, args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_ttorder"))
        .current_dir(dir)
        .env_remove("TTORDER_THREADS")
        .args(args)
        .output()
        .expect("binary runs")
}

fn stderr(o: &Output) -> String {
    String::from_utf8_lossy(&o.stderr).into_owned()
}

fn h2_csv(dir: &Path, c: f64, s: f64, cp: f64, sp: f64) -> String {
    let path = dir.join("h2.csv");
    fs::write(&path, format!("a_up,a_dn,b_up,b_dn\n{c},0,{s},0\n0,{cp},0,{sp}\n")).unwrap();
    path.to_string_lossy().into_owned()
}

#[test]
fn spectrum_to_stdout_has_one_row_per_value() {
    let dir = tempfile::tempdir().unwrap();
    let o = ttorder(dir.path(), &["spectrum", "--seed", "3", "--n", "3", "--l", "6", "--cut", "3", "--stdout"]);
    assert!(o.status.success(), "{}", stderr(&o));
    let text = String::from_utf8(o.stdout).unwrap();
    let lines: Vec<&str> = text.lines().collect();
    assert_eq!(lines[0], "cut,index,sigma,prefactor");
    assert_eq!(lines.len(), 1 + 8);
    let sum: f64 = lines[1..].iter().map(|l| l.split(',').nth(2).unwrap().parse::<f64>().unwrap().powi(2)).sum();
    assert!((sum - 1.0).abs() < 1e-10);
    assert!(!dir.path().join("spectrum.csv").exists());
}

#[test]
fn spectrum_writes_all_cuts_to_file() {
    let dir = tempfile::tempdir().unwrap();
    let o = ttorder(dir.path(), &["spectrum", "--seed", "1", "--n", "2", "--l", "5", "--all-cuts", "--method", "block"]);
    assert!(o.status.success(), "{}", stderr(&o));
    let text = fs::read_to_string(dir.path().join("spectrum.csv")).unwrap();
    // 2 + 4 + 4 + 2 values over the four cuts.
    assert_eq!(text.lines().count(), 1 + 12);
}

#[test]
fn h2_fiedler_order_pairs_same_spin_orbitals() {
    let dir = tempfile::tempdir().unwrap();
    let input = h2_csv(dir.path(), 0.8, 0.6, 0.6, 0.8);
    let o = ttorder(dir.path(), &["order", "--input", &input, "--method", "fiedler", "--stdout"]);
    assert!(o.status.success(), "{}", stderr(&o));
    let v: serde_json::Value = serde_json::from_slice(&o.stdout).unwrap();
    assert_eq!(v["method"], "fiedler");
    assert_eq!(v["permutation"], serde_json::json!([0, 2, 1, 3]));
}

#[test]
fn order_compare_writes_before_and_after_spectra() {
    let dir = tempfile::tempdir().unwrap();
    let input = h2_csv(dir.path(), 0.8, 0.6, 0.6, 0.8);
    let o = ttorder(dir.path(), &["order", "--input", &input, "--method", "prefactor", "--compare", "-o", "h2.json"]);
    assert!(o.status.success(), "{}", stderr(&o));
    let v: serde_json::Value = serde_json::from_str(&fs::read_to_string(dir.path().join("h2.json")).unwrap()).unwrap();
    assert_eq!(v["objective"], 0.0);
    assert!(dir.path().join("h2.before.csv").exists());
    let after = fs::read_to_string(dir.path().join("h2.after.csv")).unwrap();
    let mid: Vec<f64> = after
        .lines()
        .skip(1)
        .filter(|l| l.starts_with("2,"))
        .map(|l| l.split(',').nth(2).unwrap().parse().unwrap())
        .collect();
    assert_eq!(mid.len(), 4);
    assert!((mid[0] - 1.0).abs() < 1e-14);
    assert!(mid[1..].iter().all(|&s| s < 1e-14));
}

#[test]
fn rdm_pair_reports_entropies() {
    let dir = tempfile::tempdir().unwrap();
    let o = ttorder(dir.path(), &["rdm", "--seed", "2", "--n", "2", "--l", "4", "--closed-form", "--stdout"]);
    assert!(o.status.success(), "{}", stderr(&o));
    let text = String::from_utf8(o.stdout).unwrap();
    assert_eq!(text.lines().count(), 5);
}

#[test]
fn missing_input_exits_with_2() {
    let dir = tempfile::tempdir().unwrap();
    let o = ttorder(dir.path(), &["spectrum", "--input", "absent.csv", "--cut", "1", "--stdout"]);
    assert_eq!(o.status.code(), Some(2));
    assert!(stderr(&o).contains("absent.csv"));
}

#[test]
fn malformed_csv_names_line_and_column() {
    let dir = tempfile::tempdir().unwrap();
    fs::write(dir.path().join("bad.csv"), "a,b,c\n1,0,0\n0,oops,1\n").unwrap();
    let o = ttorder(dir.path(), &["spectrum", "--input", "bad.csv", "--cut", "1", "--stdout"]);
    assert_eq!(o.status.code(), Some(2));
    let e = stderr(&o);
    assert!(e.contains("line 3") && e.contains("column 2"), "{e}");
}

#[test]
fn non_orthonormal_rows_are_rejected() {
    let dir = tempfile::tempdir().unwrap();
    fs::write(dir.path().join("u.csv"), "a,b\n1,1\n").unwrap();
    let o = ttorder(dir.path(), &["spectrum", "--input", "u.csv", "--cut", "1", "--stdout"]);
    assert_eq!(o.status.code(), Some(2));
}

#[test]
fn rank_deficient_block_exits_with_3() {
    let dir = tempfile::tempdir().unwrap();
    fs::write(dir.path().join("u.csv"), "a,b,c,d\n1,0,0,0\n").unwrap();
    let o = ttorder(dir.path(), &["spectrum", "--input", "u.csv", "--cut", "2", "--method", "block", "--stdout"]);
    assert_eq!(o.status.code(), Some(3), "{}", stderr(&o));
}

#[test]
fn oversized_exhaustive_search_exits_with_4_unless_annealing() {
    let dir = tempfile::tempdir().unwrap();
    let base = ["order", "--n", "4", "--l", "8", "--method", "prefactor", "--cap", "10", "--stdout"];
    let o = ttorder(dir.path(), &base);
    assert_eq!(o.status.code(), Some(4));
    let mut args = base.to_vec();
    args.push("--anneal");
    let o = ttorder(dir.path(), &args);
    assert!(o.status.success(), "{}", stderr(&o));
    let v: serde_json::Value = serde_json::from_slice(&o.stdout).unwrap();
    assert_eq!(v["method"], "prefactor_anneal");
}

#[test]
fn experiment_writes_manifest_and_csvs() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = dir.path().join("cfg.json");
    fs::write(
        &cfg,
        r#"{"family":"weak","particles":3,"modes":8,"trials":4,"seed":5,
            "methods":["canonical","fiedler","weighted_prefactor"]}"#,
    )
    .unwrap();
    let o = ttorder(
        dir.path(),
        &["experiment", "--config", cfg.to_str().unwrap(), "--out-dir", "out", "--plot"],
    );
    assert!(o.status.success(), "{}", stderr(&o));
    let out = dir.path().join("out");
    for f in ["canonical.csv", "fiedler.csv", "weighted_prefactor.csv", "manifest.json", "plot.svg"] {
        assert!(out.join(f).exists(), "{f}");
    }
    let m: serde_json::Value = serde_json::from_str(&fs::read_to_string(out.join("manifest.json")).unwrap()).unwrap();
    assert_eq!(m["seed"], 5);
    assert_eq!(m["trial_seeds"].as_array().unwrap().len(), 4);
}

#[test]
fn invalid_experiment_config_exits_with_2() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = dir.path().join("cfg.json");
    fs::write(&cfg, r#"{"family":"slater","particles":9,"modes":8,"trials":1,"seed":0}"#).unwrap();
    let o = ttorder(dir.path(), &["experiment", "--config", cfg.to_str().unwrap()]);
    assert_eq!(o.status.code(), Some(2));
}

#[test]
fn selftest_passes() {
    let dir = tempfile::tempdir().unwrap();
    let o = ttorder(dir.path(), &["selftest", "--seed", "11"]);
    assert!(o.status.success(), "{}", stderr(&o));
    let text = String::from_utf8(o.stdout).unwrap();
    assert!(text.lines().count() >= 4 && !text.contains("FAIL"), "{text}");
}

#[test]
fn fiedler_ordered_h2_has_mid_cut_rank_one() {
    let dir = tempfile::tempdir().unwrap();
    let input = h2_csv(dir.path(), 0.6, 0.8, 0.8, 0.6);
    let o = ttorder(
        dir.path(),
        &["spectrum", "--input", &input, "--permutation", "0,2,1,3", "--all-cuts", "--stdout"],
    );
    assert!(o.status.success(), "{}", stderr(&o));
    let text = String::from_utf8(o.stdout).unwrap();
    let mid: Vec<f64> = text
        .lines()
        .skip(1)
        .filter(|l| l.starts_with("2,"))
        .map(|l| l.split(',').nth(2).unwrap().parse().unwrap())
        .collect();
    assert_eq!(mid.iter().filter(|s| **s > 1e-12).count(), 1);
}
