//! Token attributions: exact and permutation-sampled Shapley values over
//! the non-PAD positions of an input, plus export of the attention weights.
//!
//! A position that is absent from a coalition has its token replaced by
//! PAD. Attributions are always computed in evaluation mode.

use std::collections::BTreeMap;
use std::fs;
use std::path::{Path, PathBuf};

use rand::seq::SliceRandom;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::exec::{map_range, Parallelism};
use crate::model::Model;
use crate::num::{Real, RngState, Stream};
use crate::textprep::{Vocabulary, PAD_ID};

/// Largest player count for exact enumeration (4,096 coalitions).
pub const EXACT_CAP: usize = 12;
pub const MIN_SAMPLES: usize = 100;

/// A cooperative game over `players()` players. `present[i]` says whether
/// player `i` is in the coalition.
pub trait CoalitionGame: Sync {
    fn players(&self) -> usize;
    fn value(&self, present: &[bool]) -> Result<f64>;
}

/// Wraps a closure as a game; handy for constructed examples.
pub struct FnGame<Fun> {
    pub players: usize,
    pub f: Fun,
}

impl<Fun: Fn(&[bool]) -> f64 + Sync> CoalitionGame for FnGame<Fun> {
    fn players(&self) -> usize {
        self.players
    }

    fn value(&self, present: &[bool]) -> Result<f64> {
        Ok((self.f)(present))
    }
}

/// Which positions can be masked and what replaces them.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct CoalitionSpec {
    pub positions: Vec<usize>,
    pub baseline_id: u32,
}

impl CoalitionSpec {
    /// Every non-PAD position, masked to PAD.
    pub fn for_ids(ids: &[u32]) -> Self {
        CoalitionSpec {
            positions: ids
                .iter()
                .enumerate()
                .filter(|(_, &id)| id != PAD_ID)
                .map(|(i, _)| i)
                .collect(),
            baseline_id: PAD_ID,
        }
    }
}

/// The model's probability as a function of which positions keep their
/// token.
pub struct ModelGame<'a, F> {
    pub model: &'a Model<F>,
    pub ids: &'a [u32],
    pub spec: CoalitionSpec,
}

impl<F: Real> CoalitionGame for ModelGame<'_, F> {
    fn players(&self) -> usize {
        self.spec.positions.len()
    }

    fn value(&self, present: &[bool]) -> Result<f64> {
        let mut ids = self.ids.to_vec();
        for (&pos, &keep) in self.spec.positions.iter().zip(present) {
            if !keep {
                ids[pos] = self.spec.baseline_id;
            }
        }
        Ok(self.model.predict(&ids)?.f64())
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct ShapleyValues {
    pub phi: Vec<f64>,
    /// Standard error per player; `None` for exact values.
    pub std_error: Option<Vec<f64>>,
    /// Value of the grand coalition.
    pub full: f64,
    /// Value of the empty coalition.
    pub empty: f64,
}

impl ShapleyValues {
    /// |Σφ − (v(N) − v(∅))|.
    pub fn efficiency_gap(&self) -> f64 {
        (self.phi.iter().sum::<f64>() - (self.full - self.empty)).abs()
    }
}

fn mask_to_present(mask: usize, n: usize) -> Vec<bool> {
    (0..n).map(|i| mask >> i & 1 == 1).collect()
}

/// Exact Shapley values by evaluating all 2ⁿ coalitions.
pub fn exact_shapley<G: CoalitionGame>(game: &G, par: Parallelism) -> Result<ShapleyValues> {
    let n = game.players();
    if n > EXACT_CAP {
        return Err(Error::TooManyPlayers { got: n, cap: EXACT_CAP });
    }
    let values: Vec<f64> = map_range(1 << n, par, |mask| game.value(&mask_to_present(mask, n)))
        .into_iter()
        .collect::<Result<_>>()?;

    // |S|!(n−|S|−1)!/n! = 1 / (n · C(n−1, |S|))
    let mut weight = vec![0.0; n.max(1)];
    let mut binom = 1.0;
    for (s, w) in weight.iter_mut().enumerate().take(n) {
        *w = 1.0 / (n as f64 * binom);
        binom = binom * (n - 1 - s) as f64 / (s + 1) as f64;
    }
    let phi = (0..n)
        .map(|i| {
            let bit = 1usize << i;
            (0..1usize << n)
                .filter(|m| m & bit == 0)
                .map(|m| weight[m.count_ones() as usize] * (values[m | bit] - values[m]))
                .sum()
        })
        .collect();
    Ok(ShapleyValues {
        phi,
        std_error: None,
        full: values[(1 << n) - 1],
        empty: values[0],
    })
}

/// Permutation-sampling estimate: the mean marginal contribution of each
/// player over `samples` random orderings, with its standard error.
/// Permutation `k` is drawn from the `Sampling` substream `k` of `seed`,
/// so the result does not depend on the thread count.
pub fn sampled_shapley<G: CoalitionGame>(
    game: &G,
    samples: usize,
    seed: u64,
    par: Parallelism,
) -> Result<ShapleyValues> {
    if samples < MIN_SAMPLES {
        return Err(Error::InvalidArgument(format!(
            "sampled Shapley needs at least {MIN_SAMPLES} permutations, got {samples}"
        )));
    }
    let n = game.players();
    let empty = game.value(&vec![false; n])?;
    let full = game.value(&vec![true; n])?;
    let rng = RngState::new(seed);
    let marginals = map_range(samples, par, |k| -> Result<Vec<f64>> {
        let mut order: Vec<usize> = (0..n).collect();
        order.shuffle(&mut rng.substream(Stream::Sampling, k as u64));
        let mut present = vec![false; n];
        let mut prev = empty;
        let mut out = vec![0.0; n];
        for (step, &player) in order.iter().enumerate() {
            present[player] = true;
            let v = if step + 1 == n { full } else { game.value(&present)? };
            out[player] = v - prev;
            prev = v;
        }
        Ok(out)
    });
    let mut sum = vec![0.0; n];
    let mut sum_sq = vec![0.0; n];
    for m in marginals {
        for (i, d) in m?.into_iter().enumerate() {
            sum[i] += d;
            sum_sq[i] += d * d;
        }
    }
    let count = samples as f64;
    let phi: Vec<f64> = sum.iter().map(|s| s / count).collect();
    let std_error = phi
        .iter()
        .zip(&sum_sq)
        .map(|(mean, sq)| {
            let var = ((sq - count * mean * mean) / (count - 1.0)).max(0.0);
            (var / count).sqrt()
        })
        .collect();
    Ok(ShapleyValues {
        phi,
        std_error: Some(std_error),
        full,
        empty,
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum SignClass {
    /// Pushes toward the positive class.
    Supports,
    Opposes,
    Neutral,
}

impl SignClass {
    pub fn of(phi: f64) -> Self {
        if phi > 0.0 {
            SignClass::Supports
        } else if phi < 0.0 {
            SignClass::Opposes
        } else {
            SignClass::Neutral
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase", tag = "mode")]
pub enum ExplainMode {
    Exact,
    Sampled { samples: usize, seed: u64 },
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TokenAttribution {
    pub token: String,
    pub token_id: u32,
    pub position: usize,
    pub shap_value: f64,
    #[serde(skip_serializing_if = "Option::is_none", default)]
    pub std_error: Option<f64>,
    pub sign: SignClass,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Attribution {
    /// Caller-chosen label, e.g. a row index.
    pub example: String,
    #[serde(flatten)]
    pub mode: ExplainMode,
    /// Model output with every maskable position replaced by PAD.
    pub base_value: f64,
    pub prediction: f64,
    pub efficiency_gap: f64,
    pub tokens: Vec<TokenAttribution>,
}

/// Attributes the model's probability for `ids` to its non-PAD positions.
pub fn explain<F: Real>(
    model: &Model<F>,
    ids: &[u32],
    vocab: &Vocabulary,
    mode: ExplainMode,
    example: impl Into<String>,
    par: Parallelism,
) -> Result<Attribution> {
    let game = ModelGame {
        model,
        ids,
        spec: CoalitionSpec::for_ids(ids),
    };
    let values = match mode {
        ExplainMode::Exact => exact_shapley(&game, par)?,
        ExplainMode::Sampled { samples, seed } => sampled_shapley(&game, samples, seed, par)?,
    };
    let tokens = game
        .spec
        .positions
        .iter()
        .enumerate()
        .map(|(k, &position)| TokenAttribution {
            token: vocab.token(ids[position]).to_string(),
            token_id: ids[position],
            position,
            shap_value: values.phi[k],
            std_error: values.std_error.as_ref().map(|se| se[k]),
            sign: SignClass::of(values.phi[k]),
        })
        .collect();
    Ok(Attribution {
        example: example.into(),
        mode,
        base_value: values.empty,
        prediction: values.full,
        efficiency_gap: values.efficiency_gap(),
        tokens,
    })
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AttentionStep {
    pub step: usize,
    pub weight: f64,
    /// Inclusive range of input positions feeding this step through the
    /// convolution and pooling windows.
    pub first_token: usize,
    pub last_token: usize,
}

/// Attention weights over the pooled time axis in evaluation mode.
pub fn attention_export<F: Real>(model: &Model<F>, ids: &[u32]) -> Result<Vec<AttentionStep>> {
    let trace = model.forward(ids, None)?;
    let pool = model.config.pool_size;
    let kernel = model.config.kernel_size;
    Ok(trace
        .attention
        .weights
        .iter()
        .enumerate()
        .map(|(j, w)| AttentionStep {
            step: j,
            weight: w.f64(),
            first_token: j * pool,
            last_token: j * pool + pool - 1 + kernel - 1,
        })
        .collect())
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TokenSummary {
    pub token: String,
    pub occurrences: usize,
    pub mean_abs_shap: f64,
    pub mean_shap: f64,
}

/// Per-token aggregate over many attributions, sorted by mean |φ|
/// descending, then by token.
pub fn summarize(attributions: &[Attribution]) -> Vec<TokenSummary> {
    let mut acc: BTreeMap<&str, (usize, f64, f64)> = BTreeMap::new();
    for a in attributions {
        for t in &a.tokens {
            let e = acc.entry(&t.token).or_default();
            e.0 += 1;
            e.1 += t.shap_value.abs();
            e.2 += t.shap_value;
        }
    }
    let mut rows: Vec<TokenSummary> = acc
        .into_iter()
        .map(|(token, (count, abs, signed))| TokenSummary {
            token: token.to_string(),
            occurrences: count,
            mean_abs_shap: abs / count as f64,
            mean_shap: signed / count as f64,
        })
        .collect();
    rows.sort_by(|a, b| b.mean_abs_shap.total_cmp(&a.mean_abs_shap).then_with(|| a.token.cmp(&b.token)));
    rows
}

pub fn records_to_jsonl(attributions: &[Attribution]) -> String {
    let mut out = String::new();
    for a in attributions {
        out.push_str(&serde_json::to_string(a).expect("attribution serialises"));
        out.push('\n');
    }
    out
}

pub fn records_from_jsonl(text: &str) -> Result<Vec<Attribution>> {
    text.lines()
        .filter(|l| !l.trim().is_empty())
        .enumerate()
        .map(|(i, l)| {
            serde_json::from_str(l).map_err(|e| Error::Parse(format!("explanation record {}: {e}", i + 1)))
        })
        .collect()
}

/// Writes `explanations.jsonl` (one record per example) and
/// `token_summary.csv` under `dir`.
pub fn explanation_report(attributions: &[Attribution], dir: &Path) -> Result<Vec<PathBuf>> {
    if attributions.is_empty() {
        return Err(Error::InvalidArgument("no attributions to report".into()));
    }
    fs::create_dir_all(dir).map_err(|e| Error::io(dir, e))?;
    let records = dir.join("explanations.jsonl");
    fs::write(&records, records_to_jsonl(attributions)).map_err(|e| Error::io(&records, e))?;

    let summary = dir.join("token_summary.csv");
    let mut w = csv::Writer::from_path(&summary).map_err(|e| Error::Csv {
        path: summary.clone(),
        message: e.to_string(),
    })?;
    let csv_err = |e: csv::Error| Error::Csv {
        path: summary.clone(),
        message: e.to_string(),
    };
    for row in summarize(attributions) {
        w.serialize(&row).map_err(csv_err)?;
    }
    w.flush().map_err(|e| Error::io(&summary, e))?;
    Ok(vec![records, summary])
}
