use std::path::Path;
use std::process::{Command, Output};

fn odstream(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_odstream")).args(args).env_remove("ODSTREAM_SEED").output().unwrap()
}

fn stdout(o: &Output) -> String {
    String::from_utf8_lossy(&o.stdout).into_owned()
}

fn path(p: &Path) -> &str {
    p.to_str().unwrap()
}

#[test]
fn no_arguments_prints_usage_and_fails() {
    let o = odstream(&[]);
    assert!(!o.status.success());
    let text = String::from_utf8_lossy(&o.stderr).to_lowercase() + &stdout(&o).to_lowercase();
    assert!(text.contains("usage"), "{text}");
}

#[test]
fn list_names_every_detector_and_its_keys() {
    let o = odstream(&["list"]);
    assert!(o.status.success());
    let out = stdout(&o);
    for name in ["ocsvm", "iforest-asd", "lof", "abod", "exact-storm", "kitnet", "knn-cad"] {
        assert!(out.lines().any(|l| l.starts_with(name)), "missing {name}:\n{out}");
    }
    assert!(out.contains("lof.k="), "{out}");
    assert!(out.contains("ocsvm.nu="), "{out}");
}

#[test]
fn gen_is_deterministic_and_counts_outliers() {
    let dir = tempfile::tempdir().unwrap();
    let a = dir.path().join("a.csv");
    let b = dir.path().join("b.csv");
    for p in [&a, &b] {
        let o = odstream(&["gen", "--n", "1000", "--contamination", "0.05", "--seed", "3", "--out", path(p)]);
        assert!(o.status.success(), "{}", String::from_utf8_lossy(&o.stderr));
    }
    let text = std::fs::read_to_string(&a).unwrap();
    assert_eq!(text, std::fs::read_to_string(&b).unwrap());
    let rows: Vec<&str> = text.lines().skip(1).collect();
    assert_eq!(rows.len(), 1000);
    assert_eq!(rows.iter().filter(|r| r.ends_with(",1")).count(), 50);
}

#[test]
fn gen_seed_comes_from_the_environment() {
    let dir = tempfile::tempdir().unwrap();
    let a = dir.path().join("a.csv");
    let b = dir.path().join("b.csv");
    let with_env = |p: &Path| {
        Command::new(env!("CARGO_BIN_EXE_odstream"))
            .args(["gen", "--n", "50", "--out", path(p)])
            .env("ODSTREAM_SEED", "17")
            .output()
            .unwrap()
    };
    assert!(with_env(&a).status.success());
    assert!(odstream(&["gen", "--n", "50", "--seed", "17", "--out", path(&b)]).status.success());
    assert_eq!(std::fs::read(&a).unwrap(), std::fs::read(&b).unwrap());
}

#[test]
fn gen_rejects_heavy_contamination() {
    let dir = tempfile::tempdir().unwrap();
    let o = odstream(&["gen", "--contamination", "0.9", "--out", path(&dir.path().join("x.csv"))]);
    assert!(!o.status.success());
    assert!(!dir.path().join("x.csv").exists());
}

#[test]
fn run_then_report() {
    let dir = tempfile::tempdir().unwrap();
    let data = dir.path().join("s.csv");
    let report = dir.path().join("r.csv");
    assert!(odstream(&["gen", "--n", "400", "--d", "3", "--seed", "1", "--out", path(&data)]).status.success());
    let o = odstream(&[
        "run",
        "--data",
        path(&data),
        "--detectors",
        "lof,iforest-asd",
        "--scenarios",
        "1,2",
        "--window",
        "64",
        "--stride",
        "32",
        "--seed",
        "1,2",
        "--out",
        path(&report),
    ]);
    assert!(o.status.success(), "{}", String::from_utf8_lossy(&o.stderr));
    let out = stdout(&o);
    assert_eq!(out.lines().count(), 8, "{out}");
    assert!(out.lines().all(|l| l.contains("auc=")), "{out}");

    let csv = std::fs::read_to_string(&report).unwrap();
    assert_eq!(csv.lines().count(), 9);
    assert!(csv.starts_with("dataset,detector,scenario,seed,auc"), "{csv}");

    let o = odstream(&["report", path(&report)]);
    assert!(o.status.success());
    let table = stdout(&o);
    assert!(table.contains("lof") && table.contains("iforest-asd"), "{table}");
    assert!(table.contains("offline") && table.contains("incremental"), "{table}");
}

#[test]
fn bad_detector_name_is_an_error() {
    let dir = tempfile::tempdir().unwrap();
    let data = dir.path().join("s.csv");
    assert!(odstream(&["gen", "--n", "100", "--out", path(&data)]).status.success());
    let o = odstream(&["run", "--data", path(&data), "--detectors", "nope", "--out", path(&dir.path().join("r.csv"))]);
    assert!(!o.status.success());
    assert!(String::from_utf8_lossy(&o.stderr).contains("nope"));
}

#[test]
fn shipped_configs_parse() {
    let root = Path::new(env!("CARGO_MANIFEST_DIR")).join("../../configs");
    let mut files = vec![root.join("synthetic.toml"), root.join("drift.toml")];
    for entry in std::fs::read_dir(root.join("datasets")).unwrap() {
        let p = entry.unwrap().path();
        if p.extension().is_some_and(|e| e == "toml") {
            files.push(p);
        }
    }
    assert_eq!(files.len(), 9);
    for f in files {
        let cfg =
            odstream_cli::RunConfig::resolve(odstream_cli::Overrides { config: Some(f.clone()), ..Default::default() });
        assert!(cfg.is_ok(), "{}: {:?}", f.display(), cfg.err());
    }
}

#[test]
fn report_directory_is_created() {
    let dir = tempfile::tempdir().unwrap();
    let report = dir.path().join("nested/deeper/r.jsonl");
    let o = odstream(&[
        "run",
        "--detectors",
        "ocsvm",
        "--scenarios",
        "1",
        "--config",
        path(&synthetic_config(dir.path())),
        "--out",
        path(&report),
    ]);
    assert!(o.status.success(), "{}", String::from_utf8_lossy(&o.stderr));
    let text = std::fs::read_to_string(&report).unwrap();
    assert_eq!(text.lines().count(), 1);
    assert!(text.starts_with('{'), "{text}");
}

fn synthetic_config(dir: &Path) -> std::path::PathBuf {
    let p = dir.join("grid.toml");
    std::fs::write(
        &p,
        "[[dataset]]\nname = \"s\"\nsynthetic = { n = 300, d = 2, contamination = 0.05, drift = false, seed = 1 }\n",
    )
    .unwrap();
    p
}
