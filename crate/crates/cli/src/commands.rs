use std::fs;
use std::path::{Path, PathBuf};

use anyhow::{anyhow, bail, Context, Result};
use serde_json::json;

use ideation_core::config::{Preset, RunConfig};
use ideation_core::container::{Metadata, ModelContainer};
use ideation_core::corpus::{self, label_name};
use ideation_core::explain::{self, ExplainMode};
use ideation_core::textprep::{
    read_encoded, write_encoded, EncodedExample, EncodedSplit, Preprocessor, StopList, Vocabulary,
    DEFAULT_STOPWORDS_SHA256, PAD_ID,
};
use ideation_core::trainer::{self, SearchGrid, TrainConfig};
use ideation_core::{gradcheck, metrics, Model, Parallelism};

use crate::output::OutDir;
use crate::{EvaluateArgs, ExplainArgs, GradcheckArgs, ModeArg, PredictArgs, PrepareArgs, PresetArg, SplitArg, TrainArgs};

const SPLIT_FILES: [&str; 3] = ["train.tsv", "validation.tsv", "test.tsv"];
const VOCAB_FILE: &str = "vocab.txt";
const PREPARE_FILE: &str = "prepare.json";

fn load_config(path: Option<&Path>) -> Result<RunConfig> {
    match path {
        Some(p) => Ok(RunConfig::load(p)?),
        None => Ok(RunConfig::default()),
    }
}

fn split_file(split: SplitArg) -> &'static str {
    match split {
        SplitArg::Train => SPLIT_FILES[0],
        SplitArg::Validation => SPLIT_FILES[1],
        SplitArg::Test => SPLIT_FILES[2],
    }
}

pub fn prepare(args: PrepareArgs) -> Result<()> {
    let mut cfg = load_config(args.config.as_deref())?;
    if let Some(d) = args.data {
        cfg.data = d;
    }
    if let Some(s) = args.seed {
        cfg.seed = s;
    }
    if let Some(r) = args.ratios {
        cfg.ratios = [r[0], r[1], r[2]];
    }
    if let Some(v) = args.vocab_size {
        cfg.vocab_size = v;
    }
    if let Some(m) = args.max_len {
        cfg.max_len = m;
    }
    cfg.validate()?;
    let out_path = args.out.unwrap_or_else(|| cfg.out.join("prepared"));

    let loaded = corpus::load_csv(&cfg.data)?;
    let (pos, neg) = corpus::class_balance(&loaded.records);
    println!(
        "loaded {} records from {} ({} empty rows skipped)",
        loaded.records.len(),
        cfg.data.display(),
        loaded.skipped_empty
    );
    println!("class balance: suicide={pos} non-suicide={neg}");

    let split = corpus::split(&loaded.records, cfg.ratios(), cfg.seed)?;
    let (n_train, n_val, n_test) = split.sizes();
    println!("split sizes: train={n_train} validation={n_val} test={n_test}");

    let pre = Preprocessor::fit(&split.train, StopList::default(), cfg.vocab_size, cfg.max_len)?;
    println!("vocabulary: {} tokens (+ PAD, OOV)", pre.vocab.len());

    let mut out = OutDir::create(&out_path)?;
    let mut split_stats = serde_json::Map::new();
    for (name, records) in SPLIT_FILES.iter().zip([&split.train, &split.validation, &split.test]) {
        let path = out.path(name);
        write_encoded(&path, &pre.encode(records))?;
        out.record(path);
        let (p, n) = corpus::class_balance(records);
        split_stats.insert(
            name.trim_end_matches(".tsv").to_string(),
            json!({ "size": records.len(), "suicide": p, "non_suicide": n }),
        );
    }
    out.write(VOCAB_FILE, pre.vocab.to_text())?;
    let summary = json!({
        "total": loaded.records.len(),
        "skipped_empty": loaded.skipped_empty,
        "suicide": pos,
        "non_suicide": neg,
        "seed": cfg.seed,
        "ratios": cfg.ratios,
        "vocab_size": cfg.vocab_size,
        "max_len": cfg.max_len,
        "stopwords_sha256": DEFAULT_STOPWORDS_SHA256,
        "splits": split_stats,
    });
    out.write(PREPARE_FILE, serde_json::to_string_pretty(&summary)? + "\n")?;
    out.write("run.toml", cfg.to_toml())?;
    out.finish("prepare")
}

struct Prepared {
    split: EncodedSplit,
    vocab: Vocabulary,
    max_len: usize,
}

fn read_prepared(dir: &Path) -> Result<Prepared> {
    let summary_path = dir.join(PREPARE_FILE);
    let summary: serde_json::Value = serde_json::from_str(
        &fs::read_to_string(&summary_path)
            .with_context(|| format!("reading {} (run `prepare` first)", summary_path.display()))?,
    )
    .with_context(|| format!("parsing {}", summary_path.display()))?;
    let field = |k: &str| {
        summary[k]
            .as_u64()
            .map(|v| v as usize)
            .ok_or_else(|| anyhow!("{} lacks `{k}`", summary_path.display()))
    };
    let vocab_size = field("vocab_size")?;
    let max_len = field("max_len")?;
    let vocab_path = dir.join(VOCAB_FILE);
    let vocab = Vocabulary::from_text(
        &fs::read_to_string(&vocab_path).with_context(|| format!("reading {}", vocab_path.display()))?,
        vocab_size,
    )?;
    let read = |name: &str| read_encoded(&dir.join(name));
    Ok(Prepared {
        split: EncodedSplit {
            train: read(SPLIT_FILES[0])?,
            validation: read(SPLIT_FILES[1])?,
            test: read(SPLIT_FILES[2])?,
        },
        vocab,
        max_len,
    })
}

pub fn train(args: TrainArgs, sequential: bool) -> Result<()> {
    let mut cfg = load_config(args.config.as_deref())?;
    if let Some(p) = args.preset {
        match p {
            PresetArg::PaperIii => Preset::PaperIii,
            PresetArg::PaperIv => Preset::PaperIv,
        }
        .apply(&mut cfg);
    }
    if let Some(e) = args.epochs {
        cfg.epochs = e;
    }
    if let Some(b) = args.batch {
        cfg.batch_size = b;
    }
    if let Some(s) = args.seed {
        cfg.seed = s;
    }
    if let Some(p) = args.patience {
        cfg.patience = p;
    }
    if sequential {
        cfg.parallelism = Parallelism::Sequential;
    }
    let data_dir = args.data.unwrap_or_else(|| cfg.out.join("prepared"));
    let out_path = args.out.unwrap_or_else(|| cfg.out.join("model"));
    let prepared = read_prepared(&data_dir)?;
    if cfg.vocab_size != prepared.vocab.max_size() || cfg.max_len != prepared.max_len {
        log::info!(
            "using vocab_size={} max_len={} from {}",
            prepared.vocab.max_size(),
            prepared.max_len,
            data_dir.display()
        );
        cfg.vocab_size = prepared.vocab.max_size();
        cfg.max_len = prepared.max_len;
    }
    cfg.validate()?;

    let mut out = OutDir::create(&out_path)?;
    let train_cfg = cfg.train_config();
    if args.search {
        let budget = TrainConfig {
            epochs: args.search_epochs,
            ..train_cfg
        };
        let outcome = trainer::hyper_search(&cfg.model_config(), &SearchGrid::default(), &prepared.split, &budget)?;
        for e in &outcome.log {
            println!(
                "search gru_units={:<4} dropout={:<4} val_loss={:.6} params={}",
                e.gru_units, e.dropout, e.val_loss, e.param_count
            );
        }
        println!("selected gru_units={} dropout={}", outcome.best.gru_units, outcome.best.dropout);
        cfg.gru_units = outcome.best.gru_units;
        cfg.dropout = outcome.best.dropout;
        out.write("search.json", serde_json::to_string_pretty(&outcome)? + "\n")?;
    }

    let model = Model::<f32>::new(cfg.model_config(), cfg.seed)?;
    println!("training {} parameters for up to {} epochs", model.param_count(), cfg.epochs);
    let (model, history) = trainer::train(model, &prepared.split, &train_cfg, |r| {
        println!(
            "epoch {:>3}  train_loss {:.6}  val_loss {:.6}  val_acc {:.4}  elapsed {:.1}s",
            r.epoch, r.train_loss, r.val_loss, r.val_accuracy, r.elapsed_secs
        );
    })?;
    println!(
        "best epoch {} (val_loss {:.6}), stop reason: {:?}",
        history.best_epoch, history.best_val_loss, history.stop_reason
    );

    let container = ModelContainer {
        metadata: Metadata {
            model: model.config,
            vocabulary: prepared.vocab.tokens().to_vec(),
            vocab_max_size: prepared.vocab.max_size(),
            stopwords_sha256: DEFAULT_STOPWORDS_SHA256.to_string(),
            seed: cfg.seed,
            history_digest: Some(history.digest()),
            best_val_loss: Some(history.best_val_loss),
            train: Some(train_cfg),
        },
        model,
    };
    let model_path = out.path("model.sidm");
    container.save(&model_path)?;
    out.record(model_path);
    out.write("history.json", serde_json::to_string_pretty(&history)? + "\n")?;
    out.write("run.toml", cfg.to_toml())?;
    out.finish("train")
}

fn load_model(path: &Path) -> Result<(ModelContainer, Preprocessor)> {
    let container = ModelContainer::load(path)?;
    let meta = &container.metadata;
    if meta.stopwords_sha256 != DEFAULT_STOPWORDS_SHA256 {
        bail!("{} was built with a different stop-word list", path.display());
    }
    let vocab = Vocabulary::from_tokens(meta.vocabulary.clone(), meta.vocab_max_size)?;
    let pre = Preprocessor {
        stoplist: StopList::default(),
        vocab,
        max_len: meta.model.max_len,
    };
    Ok((container, pre))
}

pub fn evaluate(args: EvaluateArgs, par: Parallelism) -> Result<()> {
    let (container, _) = load_model(&args.model)?;
    let path = args.data.join(split_file(args.split));
    let data = read_encoded(&path)?;
    let probs = trainer::predict_all(&container.model, &data, par).with_context(|| format!("scoring {}", path.display()))?;
    let labels: Vec<u8> = data.iter().map(|e| e.label).collect();
    let (report, roc) = metrics::evaluate(&labels, &probs, args.threshold)?;
    println!("examples   {}", data.len());
    for (k, v) in [
        ("accuracy", report.accuracy),
        ("precision", report.precision),
        ("recall", report.recall),
        ("f1", report.f1),
        ("auc_roc", report.auc_roc),
        ("mse", report.mse),
        ("rmse", report.rmse),
    ] {
        println!("{k:<10} {v:.4}");
    }
    let mut out = OutDir::create(&args.out)?;
    for p in metrics::emit_report(&report, &roc, &args.out)? {
        out.record(p);
    }
    out.finish("evaluate")
}

fn encode_with_warning(pre: &Preprocessor, text: &str) -> Vec<u32> {
    let ids = pre.encode_text(text);
    if ids.iter().all(|&id| id == PAD_ID) {
        log::warn!("no tokens left after cleaning; scoring the all-PAD sequence");
    }
    ids
}

pub fn predict(args: PredictArgs) -> Result<()> {
    let (container, pre) = load_model(&args.model)?;
    let ids = encode_with_warning(&pre, &args.text);
    let p = container.model.predict(&ids)? as f64;
    println!("probability {p:.6}");
    println!("label {}", label_name((p >= args.threshold) as u8));
    Ok(())
}

pub fn explain(args: ExplainArgs, par: Parallelism) -> Result<()> {
    let (container, pre) = load_model(&args.model)?;
    let mut inputs: Vec<(String, Vec<u32>)> = Vec::new();
    if let Some(row) = args.row {
        let dir: PathBuf = args.data.clone().expect("clap enforces --data with --row");
        let path = dir.join(split_file(args.split));
        let data: Vec<EncodedExample> = read_encoded(&path)?;
        let ex = data
            .get(row)
            .ok_or_else(|| anyhow!("row {row} is out of range: {} has {} rows", path.display(), data.len()))?;
        inputs.push((format!("row {row}"), ex.ids.clone()));
    }
    if let Some(text) = &args.text {
        inputs.push(("text".to_string(), encode_with_warning(&pre, text)));
    }
    if let Some(file) = &args.text_file {
        let body = fs::read_to_string(file).with_context(|| format!("reading {}", file.display()))?;
        for (i, line) in body.lines().enumerate().filter(|(_, l)| !l.trim().is_empty()) {
            inputs.push((format!("line {}", i + 1), encode_with_warning(&pre, line)));
        }
        if inputs.is_empty() {
            bail!("{} contains no texts", file.display());
        }
    }
    let mode = match args.mode {
        ModeArg::Exact => ExplainMode::Exact,
        ModeArg::Sampled => ExplainMode::Sampled {
            samples: args.samples,
            seed: args.seed,
        },
    };

    let mut attributions = Vec::new();
    let mut attention = String::new();
    for (label, ids) in &inputs {
        let a = explain::explain(&container.model, ids, &pre.vocab, mode, label.clone(), par)
            .with_context(|| format!("explaining {label}"))?;
        println!(
            "{label}: prediction {:.6}  base {:.6}  efficiency gap {:.2e}",
            a.prediction, a.base_value, a.efficiency_gap
        );
        for t in &a.tokens {
            println!("  {:>3} {:<20} {:+.6}", t.position, t.token, t.shap_value);
        }
        let steps = explain::attention_export(&container.model, ids)?;
        attention.push_str(&serde_json::to_string(&json!({ "example": label, "steps": steps }))?);
        attention.push('\n');
        attributions.push(a);
    }
    let mut out = OutDir::create(&args.out)?;
    for p in explain::explanation_report(&attributions, &args.out)? {
        out.record(p);
    }
    out.write("attention.jsonl", attention)?;
    out.finish("explain")
}

pub fn gradcheck(args: GradcheckArgs) -> Result<()> {
    let outcomes = gradcheck::run_suite(args.seed, args.configs);
    let mut failed = 0;
    for o in &outcomes {
        let status = if o.passed() { "PASS" } else { "FAIL" };
        println!("{status} {:<16} max_rel_err {:.3e} over {} configs", o.name, o.max_rel_err, o.configs);
        failed += !o.passed() as usize;
    }
    if failed > 0 {
        bail!("{failed} gradient checks exceeded tolerance {:e}", gradcheck::TOLERANCE);
    }
    println!("all {} gradient checks within {:e}", outcomes.len(), gradcheck::TOLERANCE);
    Ok(())
}
