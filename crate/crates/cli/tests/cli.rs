use std::fs;
use std::path::Path;
use std::process::Command;

use serde_json::Value;

fn run(args: &[&str]) -> (i32, String, String) {
    let mut out = Vec::new();
    let mut err = Vec::new();
    let argv = std::iter::once("twt").chain(args.iter().copied());
    let code = twt_cli::run(argv, &mut out, &mut err);
    (code, String::from_utf8(out).unwrap(), String::from_utf8(err).unwrap())
}

fn small_corpus(dir: &Path) -> String {
    fs::write(dir.join("a.txt"), "<T1><c1>Ann</c1> went to <p1>Rome</p1>.</T1> <T2><s>Then</s> slept.</T2>").unwrap();
    fs::write(dir.join("b.txt"), "<T1><c1>Ann</c1> went to <p1>Rome</p1>. <s>Then</s> slept.</T1>").unwrap();
    fs::write(dir.join("c.txt"), "<T1><c2>Ann</c2> went to Rome.</T1> <T2><s>Then</s> <t>slept</t>.</T2>").unwrap();
    let manifest = dir.join("m.toml");
    fs::write(
        &manifest,
        "[[annotators]]\nid = \"a\"\npath = \"a.txt\"\n\n[[annotators]]\nid = \"b\"\npath = \"b.txt\"\n\n\
         [[annotators]]\nid = \"c\"\npath = \"c.txt\"\n",
    )
    .unwrap();
    manifest.to_str().unwrap().to_string()
}

fn json(s: &str) -> Value {
    serde_json::from_str(s).unwrap()
}

#[test]
fn every_command_succeeds_on_a_small_corpus() {
    let dir = tempfile::tempdir().unwrap();
    let m = small_corpus(dir.path());
    for args in [
        vec!["validate", &m],
        vec!["stats", &m],
        vec!["match", &m, "--pair", "a,c"],
        vec!["elements", &m, "--kind", "character"],
        vec!["switches", &m],
        vec!["consensus", &m],
        vec!["select", &m, "--k", "2"],
    ] {
        let (code, out, err) = run(&args);
        assert_eq!(code, 0, "{args:?}: {err}");
        let report = json(&out);
        assert_eq!(report["command"], args[0]);
        assert_eq!(report["tool"], "twt");
        assert!(report["manifest_digest"].as_str().unwrap().starts_with("sha256:"));
    }
}

#[test]
fn csv_and_json_carry_the_same_numbers() {
    let dir = tempfile::tempdir().unwrap();
    let m = small_corpus(dir.path());
    let (_, out, _) = run(&["stats", &m]);
    let (_, csv, _) = run(&["stats", &m, "--csv"]);
    let report = json(&out);
    let digest = report["manifest_digest"].as_str().unwrap();
    let mut lines = csv.lines();
    assert!(lines.next().unwrap().ends_with(digest));
    assert_eq!(lines.next().unwrap(), "annotator,text_world,switch,character,place,time");
    for a in report["payload"]["data"]["annotators"].as_array().unwrap() {
        let row = lines.next().unwrap();
        let want = format!(
            "{},{},{},{},{},{}",
            a["annotator_id"].as_str().unwrap(),
            a["text_worlds"],
            a["switches"],
            a["characters"],
            a["places"],
            a["times"]
        );
        assert_eq!(row, want);
    }

    let (_, out, _) = run(&["consensus", &m, "--round", "3"]);
    let (_, csv, _) = run(&["consensus", &m, "--csv", "--round", "3"]);
    let report = json(&out);
    let tokens = report["payload"]["data"]["tokens"].as_array().unwrap();
    let section: Vec<&str> = csv.lines().skip(2).take_while(|l| !l.is_empty()).collect();
    assert_eq!(section.len(), tokens.len());
    for (row, t) in section.iter().zip(tokens) {
        let degrees = &t["degrees"];
        let want = format!(
            "{},{},{},{},{},{},{}",
            t["index"],
            t["surface"].as_str().unwrap(),
            degrees["text_world"].as_f64().unwrap(),
            degrees["character"].as_f64().unwrap(),
            degrees["place"].as_f64().unwrap(),
            degrees["time"].as_f64().unwrap(),
            degrees["switch"].as_f64().unwrap()
        );
        assert_eq!(*row, want);
    }
    assert!(out.contains("0.667"));
}

#[test]
fn missing_annotation_file_names_the_path() {
    let dir = tempfile::tempdir().unwrap();
    let m = small_corpus(dir.path());
    fs::remove_file(dir.path().join("b.txt")).unwrap();
    let (code, out, err) = run(&["stats", &m]);
    assert_eq!(code, 1);
    assert!(out.is_empty());
    assert!(err.contains("b.txt"), "{err}");
}

#[test]
fn parse_errors_exit_one_with_json_diagnostics() {
    let dir = tempfile::tempdir().unwrap();
    let m = small_corpus(dir.path());
    fs::write(dir.path().join("c.txt"), "<T1>Ann went</T2> to Rome. Then slept.").unwrap();
    let (code, out, err) = run(&["stats", &m]);
    assert_eq!(code, 1);
    assert!(out.is_empty());
    let first = json(err.lines().next().unwrap());
    assert_eq!(first["annotator_id"], "c");
    assert_eq!(first["path"], "c.txt");
    assert_eq!(first["severity"], "error");

    let (code, out, _) = run(&["validate", &m]);
    assert_eq!(code, 1);
    let report = json(&out);
    assert!(!report["payload"]["data"]["diagnostics"].as_array().unwrap().is_empty());
}

#[test]
fn misaligned_texts_fail_validation_with_a_report() {
    let dir = tempfile::tempdir().unwrap();
    let m = small_corpus(dir.path());
    fs::write(dir.path().join("c.txt"), "<T1>Ann went to Paris.</T1> Then slept.").unwrap();
    let (code, out, err) = run(&["validate", &m]);
    assert_eq!(code, 1);
    let divergence = &json(&out)["payload"]["data"]["alignment"]["first_divergence"];
    assert_eq!(divergence["first"], "a");
    assert_eq!(divergence["second"], "c");
    assert_eq!(divergence["offset"], 12);
    assert!(err.contains("differ"));
    let (code, _, _) = run(&["consensus", &m]);
    assert_eq!(code, 1);
}

#[test]
fn usage_errors_exit_two() {
    let dir = tempfile::tempdir().unwrap();
    let m = small_corpus(dir.path());
    assert_eq!(run(&["frobnicate", &m]).0, 2);
    assert_eq!(run(&["elements", &m]).0, 2);
    assert_eq!(run(&["match", &m, "--pair", "a"]).0, 2);
    assert_eq!(run(&["match", &m, "--pair", "a,zz"]).0, 2);
    assert_eq!(run(&["consensus", &m, "--threshold", "0"]).0, 2);
    assert_eq!(run(&["select", &m, "--k", "9"]).0, 2);
    let (code, out, _) = run(&["--help"]);
    assert_eq!(code, 0);
    assert!(out.contains("Usage"));
}

#[test]
fn digest_tracks_file_contents() {
    let dir = tempfile::tempdir().unwrap();
    let m = small_corpus(dir.path());
    let digest = |m: &str| json(&run(&["stats", m]).1)["manifest_digest"].as_str().unwrap().to_string();
    let before = digest(&m);
    assert_eq!(before, digest(&m));
    fs::write(dir.path().join("c.txt"), "<T1><c2>Ann</c2> went to Rome.</T1> <T2>Then <t>slept</t>.</T2>").unwrap();
    assert_ne!(before, digest(&m));
}

#[test]
fn flags_override_manifest_settings() {
    let dir = tempfile::tempdir().unwrap();
    let m = small_corpus(dir.path());
    let text = fs::read_to_string(&m).unwrap();
    fs::write(&m, format!("threshold = 1.0\n\n{text}")).unwrap();
    let threshold = |args: &[&str]| json(&run(args).1)["payload"]["data"]["threshold"].as_f64().unwrap();
    assert_eq!(threshold(&["consensus", &m]), 1.0);
    assert_eq!(threshold(&["consensus", &m, "--threshold", "0.3"]), 0.3);
}

#[test]
fn parallel_and_serial_reports_are_identical() {
    let dir = tempfile::tempdir().unwrap();
    let m = small_corpus(dir.path());
    fs::write(dir.path().join("pos.tsv"), "5\tThen\tADV\n").unwrap();
    for args in [
        vec!["elements", &m, "--kind", "character", "--annotators", "c,a"],
        vec!["switches", &m, "--pos", dir.path().join("pos.tsv").to_str().unwrap(), "--csv"],
        vec!["match", &m, "--pair", "b,a"],
        vec!["consensus", &m, "--threshold", "0.6"],
    ] {
        let parallel = run(&args);
        let serial = run(&[args.as_slice(), &["--serial"]].concat());
        assert_eq!(parallel.0, 0, "{}", parallel.2);
        assert_eq!(parallel, serial);
        assert_eq!(parallel, run(&args));
    }
}

#[test]
fn binary_reports_exit_status() {
    let dir = tempfile::tempdir().unwrap();
    let m = small_corpus(dir.path());
    let twt = |args: &[&str]| Command::new(env!("CARGO_BIN_EXE_twt")).args(args).output().unwrap();
    let ok = twt(&["stats", &m]);
    assert_eq!(ok.status.code(), Some(0));
    assert_eq!(String::from_utf8(ok.stdout).unwrap(), run(&["stats", &m]).1);
    assert_eq!(twt(&["stats", "/nonexistent/m.toml"]).status.code(), Some(1));
    assert_eq!(twt(&["stats"]).status.code(), Some(2));
}
