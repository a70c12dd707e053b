use std::path::Path;
use std::process::{Command, Output};

fn kbc(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_kbc")).args(args).output().unwrap()
}

fn stdout(out: &Output) -> String {
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
    String::from_utf8(out.stdout.clone()).unwrap()
}

fn path(dir: &Path, name: &str) -> String {
    dir.join(name).display().to_string()
}

fn synth(dir: &Path) {
    stdout(&kbc(&[
        "--seed",
        "3",
        "gen-synth",
        "--scenario",
        "pca-functional",
        "--entities",
        "200",
        "--out",
        &path(dir, "pf"),
    ]));
}

#[test]
fn usage_errors_exit_with_two() {
    assert_eq!(kbc(&["mine"]).status.code(), Some(2));
    assert_eq!(kbc(&["eval", "--gold", "g.tsv"]).status.code(), Some(2));
    assert_eq!(kbc(&["gen-synth", "--out", "x"]).status.code(), Some(2));
}

#[test]
fn runtime_errors_exit_with_one() {
    let dir = tempfile::tempdir().unwrap();
    let out = kbc(&["eval", "--kb", &path(dir.path(), "missing.tsv"), "--gold", "g.tsv"]);
    assert_eq!(out.status.code(), Some(1));
    assert!(String::from_utf8_lossy(&out.stderr).starts_with("error:"));

    synth(dir.path());
    let kb = path(dir.path(), "pf/observed.tsv");
    let gold = path(dir.path(), "pf/gold.tsv");
    let out = kbc(&["eval", "--kb", &kb, "--gold", &gold, "--oracle", "nonsense"]);
    assert_eq!(out.status.code(), Some(1));
    assert!(String::from_utf8_lossy(&out.stderr).contains("unknown oracle"));
}

#[test]
fn eval_selects_columns() {
    let dir = tempfile::tempdir().unwrap();
    synth(dir.path());
    let kb = path(dir.path(), "pf/observed.tsv");
    let gold = path(dir.path(), "pf/gold.tsv");
    let text = stdout(&kbc(&[
        "eval",
        "--kb",
        &kb,
        "--gold",
        &gold,
        "--oracle",
        "pca,cwa",
        "--relation",
        "hasNationality",
    ]));
    assert!(text.contains("| Relation | CWA | PCA |"), "{text}");
    assert!(text.contains("| hasNationality |"));
    assert!(!text.contains("bornIn"));

    let tsv = stdout(&kbc(&["eval", "--kb", &kb, "--gold", &gold, "--format", "tsv"]));
    assert_eq!(tsv.lines().next(), Some("oracle\trelation\tprecision\trecall\tf1"));
}

#[test]
fn config_file_and_flags_combine() {
    let dir = tempfile::tempdir().unwrap();
    synth(dir.path());
    let config = path(dir.path(), "mine.toml");
    std::fs::write(
        &config,
        "min-support = 20\nmin-confidence = 0.9\noperators = [\"add-cardinality\"]\n",
    )
    .unwrap();
    let kb = path(dir.path(), "pf/observed.tsv");
    let gold = path(dir.path(), "pf/gold.tsv");
    let rules = stdout(&kbc(&[
        "mine",
        "--kb",
        &kb,
        "--gold",
        &gold,
        "--config",
        &config,
        "--support",
        "30",
    ]));
    let header = rules.lines().next().unwrap();
    assert!(header.contains("min-support=30"), "{header}");
    assert!(header.contains("min-confidence=0.9"), "{header}");
    assert!(header.contains("operators=add-cardinality"), "{header}");
    assert!(rules.lines().skip(1).all(|l| !l.contains("type(")));

    std::fs::write(&config, "min-suport = 20\n").unwrap();
    let out = kbc(&["mine", "--kb", &kb, "--gold", &gold, "--config", &config]);
    assert_eq!(out.status.code(), Some(1));
}

#[test]
fn relations_file_derives_labels() {
    let dir = tempfile::tempdir().unwrap();
    stdout(&kbc(&[
        "--seed",
        "1",
        "gen-synth",
        "--scenario",
        "has-parent",
        "--entities",
        "200",
        "--out",
        &path(dir.path(), "hp"),
    ]));
    let decls = path(dir.path(), "relations.tsv");
    std::fs::write(&decls, "hasParent\texactly-two\tPerson\n").unwrap();
    let text = stdout(&kbc(&[
        "eval",
        "--kb",
        &path(dir.path(), "hp/observed.tsv"),
        "--relations",
        &decls,
        "--oracle",
        "card_2",
        "--format",
        "tsv",
    ]));
    assert!(text.contains("card_2\thasParent\t1.0000\t1.0000\t1.0000"), "{text}");
}

#[test]
fn prediction_pipeline() {
    let dir = tempfile::tempdir().unwrap();
    let d = dir.path();
    stdout(&kbc(&[
        "--seed",
        "2",
        "gen-synth",
        "--scenario",
        "co-residence",
        "--entities",
        "400",
        "--out",
        &path(d, "co"),
    ]));
    let kb = path(d, "co/observed.tsv");
    stdout(&kbc(&[
        "predict-facts",
        "--kb",
        &kb,
        "--support",
        "5",
        "--rules-out",
        &path(d, "fr.rules"),
        "--out",
        &path(d, "p.tsv"),
    ]));
    let rules = std::fs::read_to_string(d.join("fr.rules")).unwrap();
    assert!(
        rules.contains("livesIn(?z,?y) ∧ marriedTo(?x,?z) ⇒ livesIn(?x,?y)"),
        "{rules}"
    );
    let preds = std::fs::read_to_string(d.join("p.tsv")).unwrap();
    assert!(!preds.is_empty() && preds.lines().all(|l| l.ends_with("\tkept")));

    stdout(&kbc(&[
        "mine",
        "--kb",
        &kb,
        "--gold",
        &path(d, "co/gold.tsv"),
        "--support",
        "5",
        "--out",
        &path(d, "m.rules"),
    ]));
    let filtered = stdout(&kbc(&[
        "filter-facts",
        "--kb",
        &kb,
        "--predictions",
        &path(d, "p.tsv"),
        "--model",
        &path(d, "m.rules"),
    ]));
    assert_eq!(filtered.lines().count(), preds.lines().count());
    assert!(filtered.lines().any(|l| l.ends_with("\tfiltered")));
    std::fs::write(d.join("f.tsv"), &filtered).unwrap();

    let report = stdout(&kbc(&[
        "report",
        "--predictions",
        &path(d, "f.tsv"),
        "--ideal",
        &path(d, "co/ideal.tsv"),
    ]));
    assert!(report.contains("| [0.9,1.0] |"), "{report}");
    assert!(report.contains("Correct predictions removed by the filter"));
    let counts_only = stdout(&kbc(&["report", "--predictions", &path(d, "f.tsv"), "--format", "tsv"]));
    assert!(counts_only.lines().nth(1).unwrap().contains("NA"));
}

#[test]
fn grid_writes_models_and_reports() {
    let dir = tempfile::tempdir().unwrap();
    synth(dir.path());
    let out = dir.path().join("grid");
    let text = stdout(&kbc(&[
        "--seed",
        "4",
        "grid",
        "--kb",
        &path(dir.path(), "pf/observed.tsv"),
        "--gold",
        &path(dir.path(), "pf/gold.tsv"),
        "--folds",
        "3",
        "--supports",
        "5,20",
        "--confidences",
        "0.5,0.9",
        "--out",
        &out.display().to_string(),
    ]));
    assert!(text.contains("## F1"));
    for f in [
        "report.md",
        "report.tsv",
        "selected.tsv",
        "models/hasNationality.amie.rules",
        "models/bornIn.class.rules",
        "test/bornIn.tsv",
    ] {
        assert!(out.join(f).is_file(), "missing {f}");
    }
    let selected = std::fs::read_to_string(out.join("selected.tsv")).unwrap();
    assert_eq!(selected.lines().count(), 1 + 2 * 3);
    assert!(selected
        .lines()
        .skip(1)
        .all(|l| l.split('\t').nth(2).is_some_and(|s| s == "5" || s == "20")));
}
