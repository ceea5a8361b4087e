use std::fs;
use std::path::Path;
use std::process::{Command, Output};

use serde_json::Value;
use tempfile::TempDir;

fn bin() -> Command {
    Command::new(env!("CARGO_BIN_EXE_translit-norm"))
}

fn run(args: &[&str], dir: &Path) -> Output {
    bin().args(args).current_dir(dir).output().unwrap()
}

fn stdout(o: &Output) -> String {
    String::from_utf8(o.stdout.clone()).unwrap()
}

fn json_lines(o: &Output) -> Vec<Value> {
    stdout(o)
        .lines()
        .map(|l| serde_json::from_str(l).unwrap())
        .collect()
}

fn dict_dir(dict: &str) -> TempDir {
    let dir = TempDir::new().unwrap();
    fs::write(dir.path().join("dict.tsv"), dict).unwrap();
    dir
}

/// Small corpus and a checkpoint trained on it for a couple of epochs.
fn trained() -> TempDir {
    let dir = TempDir::new().unwrap();
    let p = dir.path();
    let o = run(
        &[
            "generate",
            "--out-dir",
            ".",
            "--size",
            "60",
            "--dict-size",
            "30",
            "--test-size",
            "20",
        ],
        p,
    );
    assert!(o.status.success());
    let o = run(
        &[
            "train",
            "--lexicon",
            "lexicon.tsv",
            "--checkpoint",
            "m.ckpt",
            "--epochs",
            "2",
            "--hidden-dim",
            "8",
            "--seed",
            "3",
        ],
        p,
    );
    assert!(o.status.success(), "{}", String::from_utf8_lossy(&o.stderr));
    dir
}

#[test]
fn generate_is_deterministic_and_sized() {
    let dir = TempDir::new().unwrap();
    let p = dir.path();
    for out in ["a", "b"] {
        assert!(run(
            &["generate", "--out-dir", out, "--seed", "11", "--size", "37"],
            p
        )
        .status
        .success());
    }
    for f in ["dictionary.tsv", "lexicon.tsv", "testset.tsv"] {
        assert_eq!(
            fs::read(p.join("a").join(f)).unwrap(),
            fs::read(p.join("b").join(f)).unwrap()
        );
    }
    let lexicon = fs::read_to_string(p.join("a/lexicon.tsv")).unwrap();
    assert_eq!(lexicon.lines().count(), 37);
}

#[test]
fn zero_noise_test_inputs_equal_golds() {
    let dir = TempDir::new().unwrap();
    assert!(run(
        &["generate", "--out-dir", ".", "--noise-rate", "0"],
        dir.path()
    )
    .status
    .success());
    let test = fs::read_to_string(dir.path().join("testset.tsv")).unwrap();
    for line in test.lines() {
        let (input, gold) = line.split_once('\t').unwrap();
        assert_eq!(input, gold);
    }
}

#[test]
fn train_writes_checkpoint_and_trace() {
    let dir = trained();
    let trace = fs::read_to_string(dir.path().join("m.ckpt.trace.jsonl")).unwrap();
    let records: Vec<Value> = trace
        .lines()
        .map(|l| serde_json::from_str(l).unwrap())
        .collect();
    assert_eq!(records.len(), 2);
    assert_eq!(records[1]["epoch"], 2);
    assert!(records[0]["loss"].as_f64().unwrap() > 0.0);
    assert!(fs::read(dir.path().join("m.ckpt"))
        .unwrap()
        .starts_with(b"TNORMCKP"));
}

#[test]
fn missing_lexicon_is_an_io_error() {
    let dir = TempDir::new().unwrap();
    let o = run(
        &["train", "--lexicon", "nope.tsv", "--checkpoint", "m.ckpt"],
        dir.path(),
    );
    assert_eq!(o.status.code(), Some(3));
    assert!(String::from_utf8_lossy(&o.stderr).contains("nope.tsv"));
}

#[test]
fn malformed_lexicon_is_a_data_error() {
    let dir = dict_dir("");
    fs::write(dir.path().join("bad.tsv"), "kal\n").unwrap();
    let o = run(
        &["train", "--lexicon", "bad.tsv", "--checkpoint", "m.ckpt"],
        dir.path(),
    );
    assert_eq!(o.status.code(), Some(4));
}

#[test]
fn setup_2_worked_example() {
    let dir = dict_dir("চলা\tchala\n");
    let o = run(
        &[
            "normalize",
            "--dict",
            "dict.tsv",
            "--setup",
            "2",
            "--format",
            "structured",
            "chalo",
        ],
        dir.path(),
    );
    assert!(o.status.success());
    let r = &json_lines(&o)[0];
    assert_eq!(r["final"], "chala");
    assert_eq!(r["distance"], 0);
    assert_eq!(r["back_transliterations"][0], "চলা");
    assert_eq!(r["setup"], "setup_2");
    assert_eq!(r["mode"], "modified");
}

#[test]
fn setup_1_dictionary_word_is_a_fixed_point() {
    let dir = dict_dir("কাল\tkal\nকল\tkol\n");
    let o = run(
        &["normalize", "--dict", "dict.tsv", "--setup", "1", "kol"],
        dir.path(),
    );
    assert_eq!(stdout(&o), "kol\tkol\tকল\n");
}

#[test]
fn structured_record_has_every_stage() {
    let dir = dict_dir("বাদ\tbad\nবিদ\tbid\n");
    let o = run(
        &[
            "normalize",
            "--dict",
            "dict.tsv",
            "--mode",
            "standard",
            "--format",
            "structured",
            "baaaad",
        ],
        dir.path(),
    );
    let r = &json_lines(&o)[0];
    for key in [
        "input",
        "prenormalized",
        "first_degree",
        "query",
        "final",
        "distance",
        "tie_break_score",
        "dictionary_index",
        "back_transliterations",
        "mode",
        "setup",
    ] {
        assert!(r.get(key).is_some(), "missing {key}");
    }
    assert_eq!(r["prenormalized"], "baad");
    assert_eq!(r["final"], "bad");
    assert_eq!(r["setup"], "setup_1");
}

#[test]
fn input_file_and_empty_input() {
    let dir = dict_dir("চলা\tchala\n");
    fs::write(dir.path().join("words.txt"), "chalo\nchala\n").unwrap();
    let o = run(
        &["normalize", "--dict", "dict.tsv", "--input", "words.txt"],
        dir.path(),
    );
    assert_eq!(stdout(&o).lines().count(), 2);

    fs::write(dir.path().join("empty.txt"), "").unwrap();
    let o = run(
        &["normalize", "--dict", "dict.tsv", "--input", "empty.txt"],
        dir.path(),
    );
    assert_eq!(o.status.code(), Some(0));
    assert!(o.stdout.is_empty());
}

#[test]
fn conflicting_flags_are_argument_errors() {
    let dir = dict_dir("চলা\tchala\n");
    let p = dir.path();
    let o = run(
        &[
            "normalize",
            "--dict",
            "dict.tsv",
            "--setup",
            "2",
            "--mode",
            "standard",
            "x",
        ],
        p,
    );
    assert_eq!(o.status.code(), Some(2));
    let o = run(&["normalize", "--dict", "dict.tsv", "--setup", "3", "x"], p);
    assert_eq!(o.status.code(), Some(2));
    let o = run(&["normalize", "--dict", "dict.tsv", "--setup", "9", "x"], p);
    assert_eq!(o.status.code(), Some(2));
    let o = run(
        &["normalize", "--dict", "dict.tsv", "--input", "w.txt", "x"],
        p,
    );
    assert_eq!(o.status.code(), Some(2));
    let o = run(
        &[
            "evaluate",
            "--dict",
            "dict.tsv",
            "--testset",
            "t.tsv",
            "--setup",
            "all",
        ],
        p,
    );
    assert_eq!(o.status.code(), Some(2));
}

#[test]
fn unknown_characters_per_word_or_fail_fast() {
    let dir = trained();
    let p = dir.path();
    let args = [
        "normalize",
        "--dict",
        "dictionary.tsv",
        "--checkpoint",
        "m.ckpt",
        "--format",
        "structured",
    ];
    let o = run(&[&args[..], &["ka!", "kal"]].concat(), p);
    assert_eq!(o.status.code(), Some(0));
    let lines = json_lines(&o);
    assert_eq!(lines.len(), 2);
    assert!(lines[0]["error"].as_str().unwrap().contains('!'));
    assert!(lines[1].get("final").is_some());

    let o = run(&[&args[..], &["--fail-fast", "ka!", "kal"]].concat(), p);
    assert_eq!(o.status.code(), Some(4));

    let o = run(&[&args[..], &["--skip-unknown", "ka!"]].concat(), p);
    assert!(json_lines(&o)[0].get("final").is_some());
}

#[test]
fn evaluate_all_structured_and_text() {
    let dir = trained();
    let p = dir.path();
    let mut test = fs::read_to_string(p.join("testset.tsv")).unwrap();
    let gold = test
        .lines()
        .next()
        .unwrap()
        .split('\t')
        .nth(1)
        .unwrap()
        .to_owned();
    test.push_str(&format!("ka!\t{gold}\n"));
    fs::write(p.join("testset.tsv"), test).unwrap();

    let base = [
        "evaluate",
        "--dict",
        "dictionary.tsv",
        "--testset",
        "testset.tsv",
        "--checkpoint",
        "m.ckpt",
    ];
    let o = run(&[&base[..], &["--format", "structured"]].concat(), p);
    assert!(o.status.success(), "{}", String::from_utf8_lossy(&o.stderr));
    let reports = json_lines(&o);
    let setups: Vec<&str> = reports
        .iter()
        .map(|r| r["setup"].as_str().unwrap())
        .collect();
    assert_eq!(setups, ["setup_1", "setup_2", "setup_3", "setup_4"]);
    for r in &reports {
        assert_eq!(r["total"], 21);
        let acc = r["accuracy"].as_f64().unwrap();
        assert_eq!(acc, r["correct"].as_f64().unwrap() / 21.0);
    }
    // the model cannot encode '!', so the word fails in the model setups
    assert_eq!(reports[2]["failures"], 1);
    assert_eq!(reports[0]["failures"], 0);

    let o = run(&base, p);
    let text = stdout(&o);
    assert!(text.starts_with("Model"));
    assert!(text.contains("setup_4"));
    assert!(text.contains("pipeline failures"));

    let o = run(
        &[
            &base[..],
            &[
                "--setup",
                "all",
                "--mode",
                "standard",
                "--format",
                "structured",
            ],
        ]
        .concat(),
        p,
    );
    let setups: Vec<String> = json_lines(&o)
        .iter()
        .map(|r| r["setup"].as_str().unwrap().to_owned())
        .collect();
    assert_eq!(setups, ["setup_1", "setup_3"]);
}

#[test]
fn back_transliterate() {
    let dir = dict_dir("ভালো\tbhAlo\nভাল\tbhAlo\n");
    let o = run(
        &["back-transliterate", "--dict", "dict.tsv", "bhAlo", "bhalo"],
        dir.path(),
    );
    assert_eq!(stdout(&o), "bhAlo\tভালো,ভাল\nbhalo\t\n");
    let o = run(
        &[
            "back-transliterate",
            "--dict",
            "dict.tsv",
            "--format",
            "structured",
            "bhAlo",
        ],
        dir.path(),
    );
    assert_eq!(json_lines(&o)[0]["native"].as_array().unwrap().len(), 2);
}
