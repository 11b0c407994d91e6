//! Closed-form Gibbs updates for the nuisance parameters
//! (μ_α, σ_α², μ_β, σ_β², and the per-covariate analogues).

use rand::Rng;

use crate::model::{Hyperparameters, ParameterState};
use crate::stats::{sample_inverse_gamma, sample_truncated_normal};
use crate::Result;

/// Inverse-gamma full-conditional parameters (r, R) for a variance given the
/// K values it governs:
/// r = (ν + K + 1)/2, R = (τ + τ·Σ(x − μ)² + μ²)/(2τ).
pub fn invgamma_conditional_params(values: &[f64], mu: f64, tau: f64, nu: f64) -> (f64, f64) {
    let k = values.len() as f64;
    let ssq: f64 = values.iter().map(|v| (v - mu) * (v - mu)).sum();
    let r = (nu + k + 1.0) / 2.0;
    let big_r = (tau + tau * ssq + mu * mu) / (2.0 * tau);
    (r, big_r)
}

/// Truncated-normal full-conditional (mean, variance) for a hyper-mean:
/// N_[0,∞)((τ·Σx + m)/(1 + Kτ), τσ²/(1 + Kτ)).
pub fn mu_conditional_params(values: &[f64], sigma2: f64, tau: f64, m: f64) -> (f64, f64) {
    let k = values.len() as f64;
    let denom = 1.0 + k * tau;
    let mean = (tau * values.iter().sum::<f64>() + m) / denom;
    let var = tau * sigma2 / denom;
    (mean, var)
}

/// One Gibbs pass over σ_α², μ_α, σ_β², μ_β and the λ nuisances (each λ_f is
/// a K = 1 instance of the same conjugate pair).
pub fn update_nuisance<R: Rng>(
    st: &mut ParameterState,
    hyper: &Hyperparameters,
    rng: &mut R,
) -> Result<()> {
    let (r, big_r) =
        invgamma_conditional_params(&st.alpha, st.mu_alpha, hyper.tau_alpha, hyper.nu_alpha);
    st.sigma2_alpha = sample_inverse_gamma(r, big_r, rng)?;
    let (mean, var) =
        mu_conditional_params(&st.alpha, st.sigma2_alpha, hyper.tau_alpha, hyper.m_alpha);
    st.mu_alpha = sample_truncated_normal(mean, var, 0.0, f64::INFINITY, rng)?;

    let (r, big_r) =
        invgamma_conditional_params(&st.beta, st.mu_beta, hyper.tau_beta, hyper.nu_beta);
    st.sigma2_beta = sample_inverse_gamma(r, big_r, rng)?;
    let (mean, var) =
        mu_conditional_params(&st.beta, st.sigma2_beta, hyper.tau_beta, hyper.m_beta);
    st.mu_beta = sample_truncated_normal(mean, var, 0.0, f64::INFINITY, rng)?;

    for f in 0..st.lambda.len() {
        let lam = [st.lambda[f]];
        let (r, big_r) = invgamma_conditional_params(
            &lam,
            st.mu_lambda[f],
            hyper.tau_lambda,
            hyper.nu_lambda,
        );
        st.sigma2_lambda[f] = sample_inverse_gamma(r, big_r, rng)?;
        let (mean, var) =
            mu_conditional_params(&lam, st.sigma2_lambda[f], hyper.tau_lambda, hyper.m_lambda);
        st.mu_lambda[f] = sample_truncated_normal(mean, var, 0.0, f64::INFINITY, rng)?;
    }
    Ok(())
}
