use std::path::{Path, PathBuf};
use std::process::{Command, Output};

fn seeds() -> PathBuf {
    Path::new(env!("CARGO_MANIFEST_DIR")).join("../core/fixtures/seeds")
}

fn optaudit(args: &[&str], cwd: &Path) -> Output {
    Command::new(env!("CARGO_BIN_EXE_optaudit"))
        .args(args)
        .current_dir(cwd)
        .env_remove("LLM_API_KEY")
        .env_remove("LLM_BASE_URL")
        .output()
        .unwrap()
}

fn stdout(o: &Output) -> String {
    String::from_utf8_lossy(&o.stdout).into_owned()
}

#[test]
fn inject_audit_score_round_trip() {
    let dir = tempfile::tempdir().unwrap();
    let seeds = seeds();
    let inj = optaudit(
        &[
            "inject",
            seeds.to_str().unwrap(),
            "--per-type",
            "2",
            "--seed",
            "9",
            "--family",
            "constraint",
            "--out",
            "bench.jsonl",
            "--coverage",
            "cov.json",
        ],
        dir.path(),
    );
    assert!(inj.status.success(), "{}", String::from_utf8_lossy(&inj.stderr));
    let bench = std::fs::read_to_string(dir.path().join("bench.jsonl")).unwrap();
    assert!(bench.lines().count() > 0);
    assert!(bench.lines().all(|l| l.contains("\"numeric_code\":\"3.")));
    let cov: serde_json::Value =
        serde_json::from_str(&std::fs::read_to_string(dir.path().join("cov.json")).unwrap()).unwrap();
    assert_eq!(cov.as_array().unwrap().len(), 83);

    let audit = optaudit(&["audit", "bench.jsonl", "--out", "out"], dir.path());
    assert!(audit.status.success(), "{}", String::from_utf8_lossy(&audit.stderr));
    for f in ["out/predictions.jsonl", "out/manifest.json"] {
        assert!(dir.path().join(f).is_file(), "{f}");
    }
    let reports = std::fs::read_dir(dir.path().join("out/reports")).unwrap().count();
    assert_eq!(reports, bench.lines().count());

    let score = optaudit(
        &["bench", "score", "out/predictions.jsonl", "bench.jsonl", "--kind", "injected", "--json"],
        dir.path(),
    );
    assert!(score.status.success(), "{}", String::from_utf8_lossy(&score.stderr));
    let v: serde_json::Value = serde_json::from_str(&stdout(&score)).unwrap();
    assert_eq!(v["benchmark_kind"], "injected");
    assert_eq!(v["metrics"]["Top1SpecificTypeHit"]["value"], 1.0, "{v}");
}

#[test]
fn bench_run_is_reproducible() {
    let dir = tempfile::tempdir().unwrap();
    let seeds = seeds();
    for out in ["a", "b"] {
        let o = optaudit(&["bench", "run", seeds.to_str().unwrap(), "--out", out], dir.path());
        assert!(o.status.success());
        assert!(!dir.path().join(out).join("reports").exists());
    }
    let a = std::fs::read(dir.path().join("a/predictions.jsonl")).unwrap();
    let b = std::fs::read(dir.path().join("b/predictions.jsonl")).unwrap();
    assert_eq!(a, b);
}

#[test]
fn validate_and_taxonomy_list() {
    let dir = tempfile::tempdir().unwrap();
    let o = optaudit(&["validate", seeds().to_str().unwrap()], dir.path());
    assert!(o.status.success());
    assert_eq!(stdout(&o).lines().filter(|l| l.ends_with(": ok")).count(), 12);

    let o = optaudit(&["taxonomy", "list", "--json"], dir.path());
    let rows: Vec<serde_json::Value> = serde_json::from_str(&stdout(&o)).unwrap();
    assert_eq!(rows.len(), 83);
    let o = optaudit(&["taxonomy", "list", "--family", "implementation"], dir.path());
    assert_eq!(stdout(&o).lines().count(), 16);
}

#[test]
fn exit_codes_distinguish_input_and_backend_errors() {
    let dir = tempfile::tempdir().unwrap();
    let seeds = seeds();
    let s = seeds.to_str().unwrap();
    std::fs::write(dir.path().join("broken.json"), "{\"case_id\": 1}").unwrap();
    std::fs::create_dir(dir.path().join("empty")).unwrap();
    let cases: [(&[&str], i32); 7] = [
        (&["audit", "missing.json"], 1),
        (&["validate", "broken.json"], 1),
        (&["inject", s, "--recipe", "9.9.9"], 1),
        (&["audit", s, "--detector", "single_agent"], 1),
        (&["--backend", "nonsense", "audit", s], 2),
        (&["--backend", "remote", "audit", s], 2),
        (&["--backend", "replay", "--fixture-dir", "empty", "audit", s], 2),
    ];
    for (args, code) in cases {
        let o = optaudit(args, dir.path());
        assert_eq!(o.status.code(), Some(code), "{args:?}: {}", String::from_utf8_lossy(&o.stderr));
    }
}

#[test]
fn config_file_is_honoured() {
    let dir = tempfile::tempdir().unwrap();
    std::fs::write(dir.path().join("bad.toml"), "[consolidate]\ntau = 4.0\n").unwrap();
    let o = optaudit(&["--config", "bad.toml", "audit", seeds().to_str().unwrap()], dir.path());
    assert_eq!(o.status.code(), Some(1));
    assert!(String::from_utf8_lossy(&o.stderr).contains("tau"));
}

#[test]
fn score_dispatch_covers_kinds_and_mismatch() {
    let dir = tempfile::tempdir().unwrap();
    let seeds = seeds();
    let s = seeds.to_str().unwrap();
    assert_eq!(optaudit(&["inject", s, "--per-type", "0", "--out", "x.jsonl"], dir.path()).status.code(), Some(1));
    assert!(optaudit(&["inject", s, "--per-type", "1", "--out", "bench.jsonl"], dir.path()).status.success());
    assert!(optaudit(&["bench", "run", "bench.jsonl", "--out", "inj"], dir.path()).status.success());
    assert!(optaudit(&["bench", "run", s, "--out", "clean"], dir.path()).status.success());

    // Clean predictions scored against injected golds.
    let o = optaudit(&["bench", "score", "clean/predictions.jsonl", "bench.jsonl", "--kind", "clean"], dir.path());
    assert_eq!(o.status.code(), Some(1));

    let table = stdout(&optaudit(&["bench", "score", "inj/predictions.jsonl", "bench.jsonl"], dir.path()));
    for row in ["Top1MajorCategoryHit", "Top1SubcategoryHit", "Top1SpecificTypeHit", "MeanFindings"] {
        assert!(table.contains(row), "{table}");
    }

    // Natural golds: every injected case is incorrect in its gold family.
    let natural: String = std::fs::read_to_string(dir.path().join("bench.jsonl"))
        .unwrap()
        .lines()
        .map(|l| {
            let v: serde_json::Value = serde_json::from_str(l).unwrap();
            let fam = v["gold"]["family"].clone();
            let mut cats = serde_json::Map::new();
            cats.insert(fam.as_str().unwrap().to_string(), true.into());
            serde_json::json!({"case_id": v["case_id"], "is_incorrect": true, "category_positives": cats}).to_string()
                + "\n"
        })
        .collect();
    std::fs::write(dir.path().join("natural.jsonl"), natural).unwrap();
    let o = optaudit(&["bench", "score", "inj/predictions.jsonl", "natural.jsonl", "--kind", "natural"], dir.path());
    assert!(o.status.success(), "{}", String::from_utf8_lossy(&o.stderr));
    let f1_rows: Vec<String> = stdout(&o).lines().filter(|l| l.contains("-F1 ")).map(str::to_string).collect();
    assert_eq!(f1_rows.len(), 7, "{f1_rows:?}");
    assert!(f1_rows.iter().all(|r| r.contains("1.0000")), "{f1_rows:?}");
}

#[test]
fn malformed_case_writes_no_report() {
    let dir = tempfile::tempdir().unwrap();
    std::fs::write(dir.path().join("bad.jsonl"), "{not json}\n").unwrap();
    let o = optaudit(&["audit", "bad.jsonl", "--out", "out"], dir.path());
    assert_eq!(o.status.code(), Some(1));
    assert!(!dir.path().join("out").exists());
}
