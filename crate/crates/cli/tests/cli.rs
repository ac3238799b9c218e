use std::process::{Command, Output};

use serde_json::Value;

fn regmaps(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_regmaps")).args(args).output().expect("binary runs")
}

fn json(args: &[&str]) -> (Value, i32) {
    let out = regmaps(args);
    let v: Value = serde_json::from_slice(&out.stdout).unwrap_or_else(|e| {
        panic!("bad json from {args:?}: {e}\n{}", String::from_utf8_lossy(&out.stderr))
    });
    (v, out.status.code().unwrap())
}

#[test]
fn verify_pgl27() {
    let (v, code) = json(&["verify", "pgl2:7", "--type", "3,8", "--label", "N9.1"]);
    assert_eq!(code, 0);
    assert_eq!(v["schema"], 1);
    let cert = &v["results"][0]["certificate"];
    assert_eq!(cert["chi"], -7);
    assert_eq!(cert["non_orientable"], true);
    assert_eq!(cert["census_label"], "N9.1");
    assert_eq!((cert["V"].as_u64(), cert["E"].as_u64(), cert["F"].as_u64()), (Some(21), Some(84), Some(56)));
}

#[test]
fn verify_missing_type_fails() {
    let (v, code) = json(&["verify", "psl2:7", "--type", "7,3"]);
    assert_eq!(code, 1);
    assert_eq!(v["pass"], false);
}

#[test]
fn verify_cell() {
    let (v, code) = json(&["verify", "cell:pgl2:7,5", "--type", "3,8"]);
    assert_eq!(code, 0);
    let cert = &v["results"][0]["certificate"];
    assert_eq!(cert["order"], 1680);
    assert_eq!((cert["m"].as_u64(), cert["n"].as_u64()), (Some(15), Some(8)));
}

#[test]
fn census_psl25() {
    let (v, code) = json(&["census", "psl2:5"]);
    assert_eq!(code, 0);
    let classes = v["results"].as_array().unwrap();
    let five: Vec<_> = classes.iter().filter(|c| c["m"] == 5 && c["n"] == 5).collect();
    assert_eq!(five.len(), 1);
    assert_eq!(five[0]["chi"], -3);
}

#[test]
fn cover_rank_pgl29() {
    let (v, code) = json(&["cover-rank", "--group", "pgl2:9", "--type", "5,8", "--r", "3"]);
    assert_eq!(code, 0);
    assert_eq!(v["results"][0]["expected"], 181);
    assert_eq!(v["results"][0]["computed"], 181);
}

#[test]
fn family_tsv_header_matches_json_keys() {
    let out = regmaps(&["family", "--row", "B3", "--max", "100", "--format", "tsv"]);
    assert_eq!(out.status.code(), Some(0));
    let text = String::from_utf8(out.stdout).unwrap();
    let header: Vec<&str> = text.lines().next().unwrap().split('\t').collect();
    let (v, _) = json(&["family", "--row", "B3", "--max", "100"]);
    let mut keys: Vec<String> = v["results"][0].as_object().unwrap().keys().cloned().collect();
    keys.sort();
    let mut h: Vec<String> = header.iter().map(|s| s.to_string()).collect();
    h.sort();
    assert_eq!(h, keys);
}

#[test]
fn family_b6_reports_mismatch() {
    let (v, code) = json(&["family", "--row", "B6"]);
    assert_eq!(code, 1);
    assert_eq!(v["results"][0]["pass"], false);
}

#[test]
fn family_param_evaluation() {
    let (v, code) = json(&["family", "--row", "B3", "--param", "ell=13073", "--param", "s=0"]);
    assert_eq!(code, 0);
    assert_eq!(v["results"][0]["neg_chi"], "823543");
    assert_eq!(regmaps(&["family", "--row", "C5", "--param", "ell=8"]).status.code(), Some(2));
}

#[test]
fn tables_scan_corollary_pass() {
    for args in [&["tables", "--all"][..], &["scan-pgl", "--q-bound", "200"], &["corollary", "--budget", "3000"]] {
        let (v, code) = json(args);
        assert_eq!(code, 0, "{args:?}");
        assert_eq!(v["pass"], true);
    }
    let (v, _) = json(&["scan-pgl"]);
    assert_eq!(v["results"].as_array().unwrap().len(), 3);
}

#[test]
fn snf_from_file() {
    let path = std::env::temp_dir().join(format!("regmaps-snf-{}.txt", std::process::id()));
    std::fs::write(&path, "# a 3x3 example\n2 4 4\n-6 6 12\n10 -4 -16\n").unwrap();
    let (v, code) = json(&["snf", path.to_str().unwrap()]);
    std::fs::remove_file(&path).ok();
    assert_eq!(code, 0);
    assert_eq!(v["results"][0]["invariant_factors"], serde_json::json!([2, 6, 12]));
}

#[test]
fn usage_errors() {
    assert_eq!(regmaps(&["verify", "nope:3", "--type", "3,8"]).status.code(), Some(2));
    assert_eq!(regmaps(&["verify", "pgl2:7", "--type", "3"]).status.code(), Some(2));
    assert_eq!(regmaps(&["family", "--row", "Z1"]).status.code(), Some(2));
    assert_eq!(regmaps(&["bogus"]).status.code(), Some(2));
    assert_eq!(regmaps(&["snf", "/nonexistent/matrix.txt"]).status.code(), Some(2));
}

#[test]
fn reports_are_deterministic() {
    let mask = |args: &[&str]| {
        let (mut v, _) = json(args);
        v["elapsed_ms"] = Value::Null;
        serde_json::to_string(&v).unwrap()
    };
    for args in [&["census", "pgl2:5"][..], &["family", "--row", "C4", "--r", "3", "--max", "12"], &["tables"]] {
        assert_eq!(mask(args), mask(args), "{args:?}");
    }
    let a = regmaps(&["--threads", "1", "scan-pgl", "--format", "tsv"]).stdout;
    let b = regmaps(&["--threads", "4", "scan-pgl", "--format", "tsv"]).stdout;
    assert_eq!(a, b);
}
