//! Bag-of-words logistic regression, used as a reference point for the
//! neural model on real data.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::textprep::{EncodedExample, PAD_ID};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct UnigramLogistic {
    pub weights: Vec<f64>,
    pub bias: f64,
}

/// Distinct non-PAD ids of one example, sorted.
fn features(ex: &EncodedExample, vocab_size: usize) -> Result<Vec<usize>> {
    let mut ids = Vec::with_capacity(ex.ids.len());
    for &id in &ex.ids {
        if id as usize >= vocab_size {
            return Err(Error::TokenOutOfRange { id, vocab_size });
        }
        if id != PAD_ID {
            ids.push(id as usize);
        }
    }
    ids.sort_unstable();
    ids.dedup();
    Ok(ids)
}

fn sigmoid(x: f64) -> f64 {
    1.0 / (1.0 + (-x).exp())
}

impl UnigramLogistic {
    /// Full-batch gradient descent on mean BCE over binary token-presence
    /// features, with L2 penalty `l2` on the weights.
    pub fn fit(train: &[EncodedExample], vocab_size: usize, epochs: usize, lr: f64, l2: f64) -> Result<Self> {
        if train.is_empty() {
            return Err(Error::InvalidArgument("baseline needs training data".into()));
        }
        let feats: Vec<Vec<usize>> = train.iter().map(|e| features(e, vocab_size)).collect::<Result<_>>()?;
        let mut model = UnigramLogistic {
            weights: vec![0.0; vocab_size],
            bias: 0.0,
        };
        let n = train.len() as f64;
        for _ in 0..epochs {
            let mut gw = vec![0.0; vocab_size];
            let mut gb = 0.0;
            for (f, ex) in feats.iter().zip(train) {
                let d = model.score(f) - ex.label as f64;
                gb += d;
                for &i in f {
                    gw[i] += d;
                }
            }
            for (w, g) in model.weights.iter_mut().zip(&gw) {
                *w -= lr * (g / n + l2 * *w);
            }
            model.bias -= lr * gb / n;
        }
        Ok(model)
    }

    fn score(&self, feats: &[usize]) -> f64 {
        sigmoid(self.bias + feats.iter().map(|&i| self.weights[i]).sum::<f64>())
    }

    pub fn predict(&self, ex: &EncodedExample) -> Result<f64> {
        Ok(self.score(&features(ex, self.weights.len())?))
    }

    pub fn accuracy(&self, data: &[EncodedExample]) -> Result<f64> {
        let mut correct = 0;
        for ex in data {
            if (self.predict(ex)? >= 0.5) == (ex.label == 1) {
                correct += 1;
            }
        }
        Ok(correct as f64 / data.len().max(1) as f64)
    }
}
