//! Exercises the command line surface end to end: exit codes, the structured
//! stdout records, and the table cache files.

use serde_json::Value;
use std::path::Path;
use std::process::{Command, Output};

fn pegg(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_pegg"))
        .args(args)
        .env_remove("PEGG_TABLES_DIR")
        .output()
        .expect("binary runs")
}

fn stdout_json(out: &Output) -> Value {
    let text = String::from_utf8_lossy(&out.stdout);
    let line = text
        .lines()
        .next()
        .unwrap_or_else(|| panic!("no stdout: {out:?}"));
    serde_json::from_str(line).unwrap_or_else(|e| panic!("bad json {line}: {e}"))
}

fn code(out: &Output) -> i32 {
    out.status.code().unwrap()
}

#[test]
fn convert_record_equation() {
    let out = pegg(&["convert", "23^3 + 9*14^4 = 71^3"]);
    assert_eq!(code(&out), 0);
    let v = stdout_json(&out);
    assert_eq!(v["pegg_value"], "14");
    assert_eq!(v["resultant"], "207^3 + 126^4 = 639^3");
    assert_eq!(v["N"], "729");
}

#[test]
fn convert_largest_record() {
    let out = pegg(&["convert", "2192137^3 + 20440855^3 = 518*63742^4"]);
    assert_eq!(code(&out), 0);
    let v = stdout_json(&out);
    assert_eq!(v["pegg_value"], "63742");
    assert!((v["log2_size"].as_f64().unwrap() - 99.91).abs() < 0.01);
    assert_eq!(v["resultant"], "1135526966^3 + 10588362890^3 = 33018356^4");
}

#[test]
fn convert_error_paths() {
    // shared exponent factor: no multiplier exists
    let out = pegg(&["convert", "1^3 + 1^3 = 2*1^3"]);
    assert_eq!(code(&out), 3);
    // unparseable text
    let out = pegg(&["convert", "not an equation"]);
    assert_eq!(code(&out), 2);
    // bad flags
    let out = pegg(&["convert"]);
    assert_eq!(code(&out), 2);
}

#[test]
fn verify_checks_identity() {
    let out = pegg(&["verify", "23^3 + 9*14^4 = 71^3"]);
    assert_eq!(code(&out), 0);
    assert_eq!(stdout_json(&out)["ok"], true);
    let out = pegg(&["verify", "23^3 + 9*14^4 = 72^3"]);
    assert_eq!(code(&out), 1);
    assert_eq!(stdout_json(&out)["ok"], false);
}

#[test]
fn identity_command() {
    let out = pegg(&["identity", "--pegg", "2", "--x", "3"]);
    assert_eq!(code(&out), 0);
    let v = stdout_json(&out);
    assert_eq!(v["W"], "31");
    assert_eq!(v["pegg_value"], "2");
    assert_eq!(v["C"], "59582"); // 31^3 * 2

    let out = pegg(&["identity", "--pegg", "60000"]);
    assert_eq!(code(&out), 0);
    let v = stdout_json(&out);
    assert!((v["log2_size"].as_f64().unwrap() - 1269.8).abs() < 1.0);

    let out = pegg(&["identity", "--pegg", "1", "--x", "3"]);
    assert_eq!(code(&out), 2);
}

#[test]
fn rates_desk_scale() {
    let out = pegg(&["rates", "--exps", "3,3,4", "--f-limit", "1000"]);
    assert_eq!(code(&out), 0);
    let v = stdout_json(&out);
    assert!((v["elimination_pct"].as_f64().unwrap() - 47.111).abs() < 0.01);
    assert!((v["skipahead_pct"].as_f64().unwrap() - 97.601).abs() < 0.01);
    assert!((v["combined_pct"].as_f64().unwrap() - 98.733).abs() < 0.01);
}

#[test]
fn search_and_ladder_with_cached_tables() {
    let dir = tempfile::tempdir().unwrap();
    let tables = dir.path().to_str().unwrap();
    // reduced skip-ahead factors keep the cache build instant
    let base = [
        "--exps",
        "3,3,4",
        "--skip-factors",
        "13,19",
        "--tables-dir",
        tables,
    ];

    let mut args = vec!["search"];
    args.extend_from_slice(&base);
    args.extend_from_slice(&["--smax-log2", "28", "--min-pegg", "2"]);
    let out = pegg(&args);
    assert_eq!(code(&out), 0, "{out:?}");
    let v = stdout_json(&out);
    assert_eq!(v["pegg_value"], "14");
    assert_eq!(v["f"], 9);
    assert_eq!(v["a"], 71);
    assert_eq!(v["A"], "639");

    // the cache file exists and reloads on the second run
    let cached: Vec<_> = std::fs::read_dir(dir.path()).unwrap().collect();
    assert!(!cached.is_empty());
    let out = pegg(&args);
    assert_eq!(code(&out), 0);

    // exhausted range exits 1
    let mut args = vec!["search"];
    args.extend_from_slice(&base);
    args.extend_from_slice(&["--smax-log2", "28", "--min-pegg", "15"]);
    assert_eq!(code(&pegg(&args)), 1);

    // ladder emits one json record per row
    let mut args = vec!["ladder"];
    args.extend_from_slice(&base);
    args.extend_from_slice(&["--smax-log2", "34"]);
    let out = pegg(&args);
    assert_eq!(code(&out), 0);
    let text = String::from_utf8_lossy(&out.stdout);
    let rows: Vec<Value> = text
        .lines()
        .map(|l| serde_json::from_str(l).unwrap())
        .collect();
    assert_eq!(rows.len(), 2);
    assert_eq!(rows[0]["pegg_value"], "14");
    assert_eq!(rows[1]["pegg_value"], "21");
    assert_eq!(rows[1]["b"], 163);
}

#[test]
fn tables_build_info_and_budget() {
    let dir = tempfile::tempdir().unwrap();
    let tables = dir.path().to_str().unwrap();

    // a quintic single-coefficient table blows the 4 GiB budget
    let out = pegg(&[
        "tables",
        "build",
        "--exps",
        "3,3,5",
        "--single-coeff",
        "4",
        "--tables-dir",
        tables,
    ]);
    assert_eq!(code(&out), 3, "{out:?}");
    let err = String::from_utf8_lossy(&out.stderr);
    assert!(err.contains("exceeds"), "{err}");

    // info on a real cache file round-trips the header
    let out = pegg(&[
        "search",
        "--exps",
        "3,3,4",
        "--skip-factors",
        "13,19",
        "--tables-dir",
        tables,
        "--smax-log2",
        "20",
        "--min-pegg",
        "2",
    ]);
    assert_eq!(code(&out), 1); // nothing that small exists
    let file = std::fs::read_dir(dir.path())
        .unwrap()
        .map(|e| e.unwrap().path())
        .find(|p| p.extension().map_or(false, |e| e == "pggt"))
        .expect("cache file written");
    let out = pegg(&["tables", "info", file.to_str().unwrap()]);
    assert_eq!(code(&out), 0);
    let v = stdout_json(&out);
    assert_eq!(v["modulus"], 247);
    assert_eq!(v["entry_width"], 2);

    // corrupting the cache is detected on reload
    let mut bytes = std::fs::read(&file).unwrap();
    let mid = bytes.len() / 2;
    bytes[mid] ^= 0x80;
    std::fs::write(&file, &bytes).unwrap();
    let out = pegg(&["tables", "info", file.to_str().unwrap()]);
    assert_eq!(code(&out), 3);
}

#[test]
fn distinct_exponents_require_placement() {
    let out = pegg(&[
        "search",
        "--exps",
        "3,4,5",
        "--smax-log2",
        "24",
        "--min-pegg",
        "2",
    ]);
    assert_eq!(code(&out), 2);
    let err = String::from_utf8_lossy(&out.stderr);
    assert!(err.contains("--coeff-on"), "{err}");

    // with a placement the three reordered runs execute
    let dir = tempfile::tempdir().unwrap();
    let out = pegg(&[
        "search",
        "--exps",
        "3,4,5",
        "--coeff-on",
        "5",
        "--smax-log2",
        "24",
        "--min-pegg",
        "2",
        "--tables-dir",
        dir.path().to_str().unwrap(),
    ]);
    assert!(code(&out) == 0 || code(&out) == 1, "{out:?}");
}

#[test]
fn spec_mismatch_is_a_cache_error() {
    let dir = tempfile::tempdir().unwrap();
    let tables = dir.path().to_str().unwrap();
    let out = pegg(&[
        "search",
        "--exps",
        "3,3,4",
        "--skip-factors",
        "13,19",
        "--tables-dir",
        tables,
        "--smax-log2",
        "20",
    ]);
    assert_eq!(code(&out), 1);
    // swap the cached file under a name claiming other factors
    let file = std::fs::read_dir(dir.path())
        .unwrap()
        .map(|e| e.unwrap().path())
        .find(|p: &std::path::PathBuf| p.extension().map_or(false, |e| e == "pggt"))
        .unwrap();
    let forged = Path::new(tables).join("skip_3_3_4_cz_minus_ax_0_m323.pggt");
    std::fs::rename(&file, &forged).unwrap();
    let out = pegg(&[
        "search",
        "--exps",
        "3,3,4",
        "--skip-factors",
        "17,19",
        "--tables-dir",
        tables,
        "--smax-log2",
        "20",
    ]);
    assert_eq!(code(&out), 3, "{out:?}");
    let err = String::from_utf8_lossy(&out.stderr);
    assert!(err.contains("does not match"), "{err}");
}
