/// Halts after `patience` consecutive epochs without a strictly lower
/// validation loss.
#[derive(Debug, Clone)]
pub struct EarlyStopping {
    patience: usize,
    best: Option<(usize, f64)>,
    stale: usize,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Verdict {
    Improved,
    Continue,
    Stop,
}

impl EarlyStopping {
    pub fn new(patience: usize) -> Self {
        EarlyStopping {
            patience,
            best: None,
            stale: 0,
        }
    }

    /// Records the validation loss of `epoch` (1-based).
    pub fn observe(&mut self, epoch: usize, val_loss: f64) -> Verdict {
        match self.best {
            Some((_, best)) if val_loss >= best => {
                self.stale += 1;
                if self.stale >= self.patience {
                    Verdict::Stop
                } else {
                    Verdict::Continue
                }
            }
            _ => {
                self.best = Some((epoch, val_loss));
                self.stale = 0;
                Verdict::Improved
            }
        }
    }

    /// `(epoch, loss)` of the best epoch so far.
    pub fn best(&self) -> Option<(usize, f64)> {
        self.best
    }
}

/// Replays a sequence of validation losses and reports
/// `(last epoch run, best epoch)`.
pub fn replay(val_losses: &[f64], patience: usize) -> (usize, usize) {
    let mut es = EarlyStopping::new(patience);
    for (i, &loss) in val_losses.iter().enumerate() {
        if es.observe(i + 1, loss) == Verdict::Stop {
            return (i + 1, es.best().map(|b| b.0).unwrap_or(0));
        }
    }
    (val_losses.len(), es.best().map(|b| b.0).unwrap_or(0))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn crafted_losses_stop_after_sixth_epoch() {
        assert_eq!(replay(&[3.0, 2.0, 2.1, 2.2, 2.3, 2.4], 4), (6, 2));
    }

    #[test]
    fn improvement_resets_patience() {
        assert_eq!(replay(&[3.0, 3.1, 3.2, 2.9, 3.0, 3.0, 3.0], 3), (7, 4));
        assert_eq!(replay(&[1.0, 0.9, 0.8], 1), (3, 3));
    }

    #[test]
    fn equal_loss_is_not_an_improvement() {
        assert_eq!(replay(&[1.0, 1.0, 1.0], 2), (3, 1));
    }
}
