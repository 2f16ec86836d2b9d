use std::fs;
use std::path::Path;
use std::process::{Command, Output};

use serde_json::Value;
use shiftcode::blockcode::SlidingBlockCode;
use shiftcode::io::{code_to_value, to_pretty};
use shiftcode::shiftspace::Presentation;
use shiftcode::Limits;

fn shiftcode(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_shiftcode")).args(args).output().expect("binary runs")
}

fn json(out: &Output) -> Value {
    serde_json::from_slice(&out.stdout).expect("JSON on stdout")
}

fn read_json(p: &Path) -> Value {
    serde_json::from_str(&fs::read_to_string(p).unwrap()).unwrap()
}

fn status(out: &Output) -> i32 {
    out.status.code().expect("exited")
}

const FAIR: &str = r#"{"order":0,"alphabet":["0","1"],"contexts":[""],"transitions":[[0.5,0.5]],"stationary":[1.0]}"#;

#[test]
fn analyze_merge_and_xor() {
    let out = shiftcode(&["analyze", "--fixture", "merge"]);
    assert_eq!(status(&out), 0);
    let r = json(&out);
    assert_eq!(r["result"]["finite_to_one"]["finite_to_one"], false);
    assert_eq!(r["result"]["class_degree"]["class_degree"], 1);
    assert_eq!(r["result"]["class_degree"]["status"], "exact");
    assert_eq!(r["version"], env!("CARGO_PKG_VERSION"));
    assert_eq!(r["config"]["word_len_cap"], 12);

    let r = json(&shiftcode(&["analyze", "--fixture", "xor"]));
    assert_eq!(r["result"]["finite_to_one"]["finite_to_one"], true);
    assert_eq!(r["result"]["degree"]["degree"], 2);
}

#[test]
fn malformed_edge_list_names_the_record() {
    let dir = tempfile::tempdir().unwrap();
    let code = dir.path().join("bad.json");
    fs::write(
        &code,
        r#"{"domain":{"alphabet":["0","1"],"states":["A"],"edges":[[0,0,0],[0,0]],"kind":"labeled-sofic"},
            "codomain":["0"],"memory":0,"anticipation":0,"table":{"0":0,"1":0}}"#,
    )
    .unwrap();
    let out = shiftcode(&["analyze", "--code", code.to_str().unwrap()]);
    assert_eq!(status(&out), 2);
    let err = String::from_utf8_lossy(&out.stderr);
    assert!(err.contains("edge 1"), "{err}");
}

#[test]
fn decompose_writes_a_verified_directory() {
    let dir = tempfile::tempdir().unwrap();
    let merge = dir.path().join("merge");
    let out = shiftcode(&["decompose", "--fixture", "merge", "--out", merge.to_str().unwrap()]);
    assert_eq!(status(&out), 0, "{}", String::from_utf8_lossy(&out.stderr));
    for f in ["ytilde.json", "pi1.json", "pi2.json", "report.json"] {
        assert!(merge.join(f).exists(), "{f}");
    }
    assert_eq!(read_json(&merge.join("report.json"))["result"]["verification"]["all_passed"], true);

    let xor = dir.path().join("xor");
    let out = shiftcode(&["decompose", "--fixture", "xor", "--out", xor.to_str().unwrap()]);
    assert_eq!(status(&out), 0);
    let r = read_json(&xor.join("report.json"));
    assert_eq!(r["result"]["verification"]["pi2_degree"]["degree"], 2);
}

#[test]
fn reducible_domain_is_a_precondition_failure() {
    let dir = tempfile::tempdir().unwrap();
    let x = Presentation::vertex_sft(["a", "b"], &[(0, 0), (1, 1)]).unwrap();
    let pi = SlidingBlockCode::one_block(x, vec!["0".into()], &[0, 0], &Limits::default()).unwrap();
    let path = dir.path().join("code.json");
    fs::write(&path, to_pretty(&code_to_value(&pi))).unwrap();
    let out = shiftcode(&["decompose", "--code", path.to_str().unwrap(), "--out", dir.path().join("d").to_str().unwrap()]);
    assert_eq!(status(&out), 2);
    assert!(String::from_utf8_lossy(&out.stderr).contains("not irreducible"));
}

#[test]
fn reports_are_byte_identical_on_rerun() {
    for args in [
        &["analyze", "--fixture", "xor"][..],
        &["class-degree", "--fixture", "merge"][..],
        &["pressure", "--fixture", "golden-mean-identity"][..],
        &["lift", "--fixture", "even-shift-cover"][..],
    ] {
        let a = shiftcode(args);
        let b = shiftcode(args);
        assert_eq!(status(&a), 0, "{args:?}");
        assert_eq!(a.stdout, b.stdout, "{args:?}");
    }
    let dir = tempfile::tempdir().unwrap();
    let nu = dir.path().join("nu.json");
    fs::write(&nu, FAIR).unwrap();
    let args = ["mmre", "--fixture", "merge", "--nu", nu.to_str().unwrap(), "--order", "2", "--seeds", "3"];
    assert_eq!(shiftcode(&args).stdout, shiftcode(&args).stdout);
}

#[test]
fn random_corpus_is_deterministic_and_bounded() {
    let dir = tempfile::tempdir().unwrap();
    let (a, b) = (dir.path().join("a"), dir.path().join("b"));
    for d in [&a, &b] {
        let out = shiftcode(&["random-corpus", "--seed", "1", "--count", "10", "--out", d.to_str().unwrap()]);
        assert_eq!(status(&out), 0);
    }
    let mut names: Vec<_> = fs::read_dir(&a).unwrap().map(|e| e.unwrap().file_name()).collect();
    names.sort();
    assert_eq!(names.len(), 11);
    for n in &names {
        assert_eq!(fs::read(a.join(n)).unwrap(), fs::read(b.join(n)).unwrap(), "{n:?}");
    }
    let code = a.join("random-1-0.json");
    assert_eq!(status(&shiftcode(&["analyze", "--code", code.to_str().unwrap()])), 0);

    let out = shiftcode(&["random-corpus", "--max-symbols", "7", "--out", dir.path().join("c").to_str().unwrap()]);
    assert_eq!(status(&out), 2);
}

#[test]
fn resource_limit_exits_with_three() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = dir.path().join("cfg.json");
    fs::write(&cfg, r#"{"limits":{"max_words":20}}"#).unwrap();
    let out = shiftcode(&["--config", cfg.to_str().unwrap(), "lift", "--fixture", "xor"]);
    assert_eq!(status(&out), 3);
    let out = shiftcode(&["--config", cfg.to_str().unwrap(), "analyze", "--fixture", "xor"]);
    assert_eq!(status(&out), 0);
    assert_eq!(json(&out)["config"]["limits"]["max_words"], 20);
}

#[test]
fn mmre_with_crosscheck() {
    let dir = tempfile::tempdir().unwrap();
    let nu = dir.path().join("nu.json");
    fs::write(&nu, FAIR).unwrap();
    let dec = dir.path().join("merge");
    assert_eq!(status(&shiftcode(&["decompose", "--fixture", "merge", "--out", dec.to_str().unwrap()])), 0);
    let report = dir.path().join("mmre.json");
    let out = shiftcode(&[
        "mmre",
        "--fixture",
        "merge",
        "--nu",
        nu.to_str().unwrap(),
        "--order",
        "2",
        "--crosscheck",
        dec.to_str().unwrap(),
        "--report",
        report.to_str().unwrap(),
    ]);
    assert_eq!(status(&out), 0, "{}", String::from_utf8_lossy(&out.stderr));
    let r = read_json(&report);
    let v = r["result"]["solve"]["value"].as_f64().unwrap();
    assert!((v - 1.5 * 2f64.ln()).abs() < 1e-6);
    assert_eq!(r["result"]["solve"]["value_kind"], "upper bound at order 2");
    assert_eq!(r["result"]["crosscheck"]["agree"], true);
    assert_eq!(r["config"]["order"], 2);

    // factors of another code are refused
    let xor = dir.path().join("xor");
    shiftcode(&["decompose", "--fixture", "xor", "--out", xor.to_str().unwrap()]);
    let out = shiftcode(&["mmre", "--fixture", "merge", "--nu", nu.to_str().unwrap(), "--crosscheck", xor.to_str().unwrap()]);
    assert_eq!(status(&out), 2);
}

#[test]
fn equilibrium_of_the_golden_mean_is_parry() {
    let r = json(&shiftcode(&["equilibrium", "--fixture", "golden-mean-identity"]));
    let phi = (1.0 + 5f64.sqrt()) / 2.0;
    let m = &r["result"]["measure"];
    let ctx: Vec<&str> = m["contexts"].as_array().unwrap().iter().map(|c| c.as_str().unwrap()).collect();
    let i = ctx.iter().position(|&c| c == "0").unwrap();
    let p00 = m["transitions"][i][0].as_f64().unwrap();
    assert!((p00 - 1.0 / phi).abs() < 1e-10, "{p00}");
}
