use std::fs;
use std::path::{Path, PathBuf};
use std::process::{Command, Output};

use ideation_core::container::ModelContainer;
use ideation_core::corpus::{class_balance, load_csv};
use ideation_core::explain::records_from_jsonl;
use ideation_core::metrics::{report_from_json, REPORT_KEYS};
use ideation_core::textprep::read_encoded;
use ideation_core::{trainer, Parallelism};
use tempfile::TempDir;

const POSITIVE: [&str; 6] = [
    "i want to end my life",
    "nobody would miss me if i died",
    "i feel hopeless and want to die",
    "tired of living every single day",
    "thinking about killing myself tonight",
    "i cannot go on anymore",
];
const NEGATIVE: [&str; 6] = [
    "just finished a great game with friends",
    "my cat knocked over the coffee",
    "school was boring today lol",
    "anyone want to play minecraft later",
    "pizza for dinner again yay",
    "the new movie was awesome",
];

const TOY_CONFIG: &str = "\
vocab_size = 200
max_len = 16
embed_dim = 6
conv_filters = 6
kernel_size = 3
gru_units = 6
attention_width = 4
dropout = 0.2
learning_rate = 0.01
batch_size = 16
epochs = 4
";

fn ideation(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_ideation"))
        .args(args)
        .output()
        .expect("binary runs")
}

fn ok(args: &[&str]) -> String {
    let out = ideation(args);
    assert!(
        out.status.success(),
        "{args:?} failed:\n{}\n{}",
        String::from_utf8_lossy(&out.stdout),
        String::from_utf8_lossy(&out.stderr)
    );
    String::from_utf8(out.stdout).unwrap()
}

fn p(path: &Path) -> &str {
    path.to_str().unwrap()
}

struct Fixture {
    dir: TempDir,
}

impl Fixture {
    fn new() -> Self {
        let dir = tempfile::tempdir().unwrap();
        let mut csv = String::from(",text,class\n");
        for i in 0..120 {
            let (a, b, class) = if i % 2 == 1 {
                (POSITIVE[i % 6], POSITIVE[(i / 2) % 6], "suicide")
            } else {
                (NEGATIVE[i % 6], NEGATIVE[(i / 3) % 6], "non-suicide")
            };
            csv.push_str(&format!("{i},{a} {b},{class}\n"));
        }
        fs::write(dir.path().join("toy.csv"), csv).unwrap();
        fs::write(dir.path().join("toy.toml"), TOY_CONFIG).unwrap();
        Fixture { dir }
    }

    fn path(&self, name: &str) -> PathBuf {
        self.dir.path().join(name)
    }

    fn prepare(&self, out: &str) -> String {
        ok(&[
            "prepare",
            "--data",
            p(&self.path("toy.csv")),
            "--config",
            p(&self.path("toy.toml")),
            "--out",
            p(&self.path(out)),
            "--seed",
            "3",
        ])
    }

    fn train(&self, out: &str, extra: &[&str]) -> String {
        let (config, data, out) = (self.path("toy.toml"), self.path("prep"), self.path(out));
        let mut args = vec![
            "--sequential",
            "train",
            "--config",
            p(&config),
            "--data",
            p(&data),
            "--out",
            p(&out),
            "--seed",
            "5",
        ];
        args.extend_from_slice(extra);
        ok(&args)
    }
}

#[test]
fn prepare_reports_balance_and_is_deterministic() {
    let f = Fixture::new();
    let stdout = f.prepare("prep");
    let records = load_csv(&f.path("toy.csv")).unwrap().records;
    let (pos, neg) = class_balance(&records);
    assert!(stdout.contains(&format!("class balance: suicide={pos} non-suicide={neg}")));
    assert!(stdout.contains("split sizes: train=96 validation=12 test=12"));

    f.prepare("prep2");
    for name in ["train.tsv", "validation.tsv", "test.tsv", "vocab.txt", "prepare.json"] {
        assert_eq!(fs::read(f.path("prep").join(name)).unwrap(), fs::read(f.path("prep2").join(name)).unwrap());
    }
    let manifest = fs::read_to_string(f.path("prep").join("manifest.json")).unwrap();
    assert!(manifest.contains("train.tsv") && manifest.contains("vocab.txt"));
}

#[test]
fn train_evaluate_predict_explain() {
    let f = Fixture::new();
    f.prepare("prep");

    f.train("one", &["--epochs", "1"]);
    let history: serde_json::Value =
        serde_json::from_str(&fs::read_to_string(f.path("one/history.json")).unwrap()).unwrap();
    assert_eq!(history["epochs"].as_array().unwrap().len(), 1);

    let stdout = f.train("model", &["--epochs", "30"]);
    assert!(stdout.contains("epoch   1"));
    f.train("again", &["--epochs", "30"]);
    let model_path = f.path("model/model.sidm");
    assert_eq!(fs::read(&model_path).unwrap(), fs::read(f.path("again/model.sidm")).unwrap());

    let container = ModelContainer::load(&model_path).unwrap();
    let validation = read_encoded(&f.path("prep/validation.tsv")).unwrap();
    let (loss, _) = trainer::evaluate(&container.model, &validation, Parallelism::Sequential).unwrap();
    assert!((loss - container.metadata.best_val_loss.unwrap()).abs() <= 1e-6);

    // Evaluate on the training split of the fitted toy model.
    ok(&[
        "evaluate",
        "--model",
        p(&model_path),
        "--data",
        p(&f.path("prep")),
        "--split",
        "train",
        "--out",
        p(&f.path("eval")),
    ]);
    let text = fs::read_to_string(f.path("eval/metrics.json")).unwrap();
    let report = report_from_json(&text).unwrap();
    assert_eq!(report.accuracy, 1.0);
    assert!((report.rmse * report.rmse - report.mse).abs() <= 4.0 * f64::EPSILON * report.mse);
    let value: serde_json::Value = serde_json::from_str(&text).unwrap();
    let mut keys: Vec<String> = value.as_object().unwrap().keys().cloned().collect();
    let mut want: Vec<String> = REPORT_KEYS.iter().map(|k| k.to_string()).collect();
    keys.sort();
    want.sort();
    assert_eq!(keys, want);
    let roc = fs::read_to_string(f.path("eval/roc.csv")).unwrap();
    assert_eq!(roc.lines().next(), Some("fpr,tpr"));

    let predict = |text: &str| {
        let out = ideation(&["predict", "--model", p(&model_path), "--text", text]);
        assert!(out.status.success());
        (String::from_utf8(out.stdout).unwrap(), String::from_utf8(out.stderr).unwrap())
    };
    let (a, _) = predict("I feel hopeless and want to die");
    let (b, _) = predict("I feel hopeless and want to die");
    assert_eq!(a, b);
    assert!(a.contains("label suicide"), "{a}");
    let prob: f64 = a.lines().next().unwrap().trim_start_matches("probability ").parse().unwrap();
    assert!(prob > 0.0 && prob < 1.0);
    let (_, warn) = predict("the and of it was");
    assert!(warn.contains("all-PAD"), "{warn}");

    ok(&[
        "explain",
        "--model",
        p(&model_path),
        "--text",
        "cat knocked coffee hopeless tonight",
        "--out",
        p(&f.path("exact")),
    ]);
    let records = records_from_jsonl(&fs::read_to_string(f.path("exact/explanations.jsonl")).unwrap()).unwrap();
    assert_eq!(records[0].tokens.len(), 5);
    assert!(records[0].efficiency_gap <= 1e-10);

    let sampled = |out: &str| {
        ok(&[
            "explain",
            "--model",
            p(&model_path),
            "--row",
            "2",
            "--data",
            p(&f.path("prep")),
            "--mode",
            "sampled",
            "--samples",
            "300",
            "--seed",
            "9",
            "--out",
            p(&f.path(out)),
        ]);
        fs::read(f.path(out).join("explanations.jsonl")).unwrap()
    };
    assert_eq!(sampled("s1"), sampled("s2"));

    let long = "alpha bravo charlie delta echo foxtrot golf hotel india juliet kilo lima mike";
    let out = ideation(&["explain", "--model", p(&model_path), "--text", long, "--out", p(&f.path("x"))]);
    assert!(!out.status.success());
    let err = String::from_utf8(out.stderr).unwrap();
    assert!(err.contains("got 13") && err.contains("sampled mode"), "{err}");
}

#[test]
fn gradcheck_passes() {
    let stdout = ok(&["gradcheck", "--configs", "3"]);
    assert_eq!(stdout.matches("PASS").count(), 11);
}

#[test]
fn errors_exit_nonzero_and_name_the_input() {
    let out = ideation(&["prepare", "--data", "/nonexistent/file.csv", "--out", "/tmp/unused"]);
    assert!(!out.status.success());
    assert!(String::from_utf8_lossy(&out.stderr).contains("/nonexistent/file.csv"));

    let dir = tempfile::tempdir().unwrap();
    let bogus = dir.path().join("model.sidm");
    fs::write(&bogus, b"not a model").unwrap();
    let out = ideation(&["predict", "--model", p(&bogus), "--text", "hello"]);
    assert!(!out.status.success());
    assert!(String::from_utf8_lossy(&out.stderr).contains("magic"));
}
