/// Probabilities are clamped to `[ε, 1-ε]` before the logarithm.
pub const LOSS_CLAMP: f64 = 1e-7;

/// Binary cross-entropy on a clamped probability. Returns
/// `(loss, dL/dp)` with the gradient evaluated at the clamped value.
pub fn bce_loss<F: crate::num::Real>(p: F, y: F) -> (F, F) {
    let eps = F::of(LOSS_CLAMP);
    let pc = p.max(eps).min(F::one() - eps);
    let one = F::one();
    let loss = -(y * pc.ln() + (one - y) * (one - pc).ln());
    let grad = (pc - y) / (pc * (one - pc));
    (loss, grad)
}

/// `dL/dlogit` for a sigmoid output: chains [`bce_loss`]'s gradient through
/// `σ'(logit) = p(1-p)`.
pub fn bce_logit_grad<F: crate::num::Real>(p: F, y: F) -> F {
    let (_, dp) = bce_loss(p, y);
    dp * p * (F::one() - p)
}
