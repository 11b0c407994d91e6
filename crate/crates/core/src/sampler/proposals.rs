//! Proposal-distribution moments for the Metropolis–Hastings blocks.
//!
//! Every proposal is a normal (possibly truncated) whose mean and variance
//! come from a second-order expansion of the log-posterior: intercepts expand
//! at μ_α, distance coefficients at μ_β, covariate coefficients at λ_f = 0,
//! node effects at their previous value, and latent coordinates use the
//! hinge lower bound of the log-sum-exp term. Variances are the inverse of
//! the local curvature plus the prior precision where the prior is normal.

use ndarray::Array2;
use rand::Rng;

use crate::model::{combined_effect_at, ModelSpec, ParameterState};
use crate::multiplex::Multiplex;
use crate::stats::logistic;

/// Which effect column a proposal targets. Undirected models route their
/// shared effect δ through `Sender`.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum EffectSide {
    Sender,
    Receiver,
}

/// Constant effects pool information across all views; variable effects
/// update one view at a time.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum EffectScope {
    Constant,
    Variable(usize),
}

/// Read-only snapshot of everything a moment computation needs.
pub(crate) struct Ctx<'a> {
    pub m: &'a Multiplex,
    pub spec: &'a ModelSpec,
    pub st: &'a ParameterState,
    pub dist: &'a Array2<f64>,
    pub covsum: &'a Array2<f64>,
}

impl Ctx<'_> {
    #[inline]
    pub fn eta(&self, k: usize, i: usize, j: usize) -> f64 {
        self.st.alpha[k] * combined_effect_at(self.spec, self.st, k, i, j)
            - self.st.beta[k] * self.dist[[i, j]]
            - self.covsum[[i, j]]
    }
}

/// Squared-distance matrix of the latent configuration.
pub fn build_sq_dist(st: &ParameterState) -> Array2<f64> {
    let n = st.z.nrows();
    let mut d = Array2::zeros((n, n));
    for i in 0..n {
        for j in (i + 1)..n {
            let v = st.sq_dist(i, j);
            d[[i, j]] = v;
            d[[j, i]] = v;
        }
    }
    d
}

/// Σ_f λ_f·x_f as a dyad matrix (zeros when there are no covariates).
pub fn build_covariate_sum(m: &Multiplex, st: &ParameterState) -> Array2<f64> {
    let n = m.n_nodes();
    let mut c = Array2::zeros((n, n));
    for (f, x) in m.covariates().iter().enumerate() {
        let lf = st.lambda[f];
        for i in 0..n {
            for j in 0..n {
                c[[i, j]] += lf * x[[i, j]];
            }
        }
    }
    c
}

pub(crate) fn alpha_moments(ctx: &Ctx, k: usize, beta_k: f64) -> (f64, f64) {
    let mu_a = ctx.st.mu_alpha;
    let mut grad = 0.0;
    let mut curv = 0.0;
    for (i, j) in ctx.m.dyads() {
        if !ctx.m.observed(k, i, j) {
            continue;
        }
        let phi = combined_effect_at(ctx.spec, ctx.st, k, i, j);
        let eta = mu_a * phi - beta_k * ctx.dist[[i, j]] - ctx.covsum[[i, j]];
        let p = logistic(eta);
        let y = f64::from(ctx.m.edge(k, i, j));
        grad += phi * (y - p);
        curv += phi * phi * p * (1.0 - p);
    }
    let var = 1.0 / (curv + 1.0 / ctx.st.sigma2_alpha);
    (var * grad + mu_a, var)
}

pub(crate) fn beta_moments(ctx: &Ctx, k: usize, alpha_k: f64) -> (f64, f64) {
    let mu_b = ctx.st.mu_beta;
    let mut grad = 0.0;
    let mut curv = 0.0;
    for (i, j) in ctx.m.dyads() {
        if !ctx.m.observed(k, i, j) {
            continue;
        }
        let phi = combined_effect_at(ctx.spec, ctx.st, k, i, j);
        let d = ctx.dist[[i, j]];
        let eta = alpha_k * phi - mu_b * d - ctx.covsum[[i, j]];
        let p = logistic(eta);
        let y = f64::from(ctx.m.edge(k, i, j));
        grad += d * (p - y);
        curv += d * d * p * (1.0 - p);
    }
    let var = 1.0 / (curv + 1.0 / ctx.st.sigma2_beta);
    (var * grad + mu_b, var)
}

/// Per-coordinate means and the shared variance for the latent-position
/// proposal of node `i`. Sums run over the outgoing row of each view, with
/// the sign pattern (y − w) in the mean and |y − w| in the variance.
pub(crate) fn latent_moments(ctx: &Ctx, i: usize) -> (Vec<f64>, f64) {
    let p = ctx.spec.p;
    let n = ctx.m.n_nodes();
    let mut signed = vec![0.0; p];
    let mut absolute = 0.0;
    for k in 0..ctx.m.n_views() {
        let beta = ctx.st.beta[k];
        for j in 0..n {
            if j == i || !ctx.m.observed(k, i, j) {
                continue;
            }
            let w = if ctx.eta(k, i, j) > 0.0 { 1.0 } else { 0.0 };
            let diff = f64::from(ctx.m.edge(k, i, j)) - w;
            if diff != 0.0 {
                for (c, s) in signed.iter_mut().enumerate() {
                    *s += beta * diff * ctx.st.z[[j, c]];
                }
            }
            absolute += beta * diff.abs();
        }
    }
    let var = 1.0 / (1.0 + 2.0 * absolute);
    let means = signed.iter().map(|&s| var * 2.0 * s).collect();
    (means, var)
}

/// Mean/variance of the effect proposal for node `i`, expanded at the
/// current value. Returns `None` when the curvature vanishes (no observed
/// incident dyad, or probabilities saturated to 0/1), in which case the
/// caller falls back to a uniform draw on (−1, 1).
pub(crate) fn effect_moments(
    ctx: &Ctx,
    side: EffectSide,
    scope: EffectScope,
    i: usize,
) -> Option<(f64, f64)> {
    let x = ctx.spec.effect_slope_factor();
    let n = ctx.m.n_nodes();
    let views: Vec<usize> = match scope {
        EffectScope::Variable(k) => vec![k],
        EffectScope::Constant => (0..ctx.m.n_views()).collect(),
    };
    let mut grad = 0.0;
    let mut curv = 0.0;
    for &k in &views {
        let a = ctx.st.alpha[k] * x;
        for other in 0..n {
            if other == i {
                continue;
            }
            let (from, to) = match side {
                EffectSide::Sender => (i, other),
                EffectSide::Receiver => (other, i),
            };
            if !ctx.m.observed(k, from, to) {
                continue;
            }
            let p = logistic(ctx.eta(k, from, to));
            let y = f64::from(ctx.m.edge(k, from, to));
            grad += a * (y - p);
            curv += a * a * p * (1.0 - p);
        }
    }
    if curv > 0.0 && curv.is_finite() {
        let var = 1.0 / curv;
        let current = current_effect(ctx.st, ctx.spec, side, scope, i);
        Some((var * grad + current, var))
    } else {
        None
    }
}

pub(crate) fn current_effect(
    st: &ParameterState,
    spec: &ModelSpec,
    side: EffectSide,
    scope: EffectScope,
    i: usize,
) -> f64 {
    let k = match scope {
        EffectScope::Variable(k) => k,
        EffectScope::Constant => 0,
    };
    match side {
        EffectSide::Sender => st.theta[[i, k]],
        EffectSide::Receiver => {
            if spec.directed {
                st.gamma[[i, k]]
            } else {
                st.theta[[i, k]]
            }
        }
    }
}

/// Moments of the covariate-coefficient proposal, expanded with the f-th
/// covariate removed from the linear predictor (so they do not depend on the
/// current λ_f, making this an independence proposal).
pub(crate) fn lambda_moments(ctx: &Ctx, f: usize) -> (f64, f64) {
    let xf = &ctx.m.covariates()[f];
    let lf = ctx.st.lambda[f];
    let mut grad = 0.0;
    let mut curv = 0.0;
    for k in 0..ctx.m.n_views() {
        for (i, j) in ctx.m.dyads() {
            if !ctx.m.observed(k, i, j) {
                continue;
            }
            let x = xf[[i, j]];
            let eta = ctx.eta(k, i, j) + lf * x;
            let p = logistic(eta);
            let y = f64::from(ctx.m.edge(k, i, j));
            grad += x * (p - y);
            curv += x * x * p * (1.0 - p);
        }
    }
    let var = 1.0 / (curv + 1.0 / ctx.st.sigma2_lambda[f]);
    (var * grad + ctx.st.mu_lambda[f], var)
}

fn ctx_for<'a>(
    m: &'a Multiplex,
    spec: &'a ModelSpec,
    st: &'a ParameterState,
    dist: &'a Array2<f64>,
    covsum: &'a Array2<f64>,
) -> Ctx<'a> {
    Ctx {
        m,
        spec,
        st,
        dist,
        covsum,
    }
}

/// Standalone mean/variance of the α^(k) proposal (B-series expansion at
/// μ_α, conditioned on the current β^(k)).
pub fn alpha_proposal_moments(
    m: &Multiplex,
    spec: &ModelSpec,
    st: &ParameterState,
    k: usize,
) -> (f64, f64) {
    let dist = build_sq_dist(st);
    let covsum = build_covariate_sum(m, st);
    alpha_moments(&ctx_for(m, spec, st, &dist, &covsum), k, st.beta[k])
}

/// Standalone mean/variance of the β^(k) proposal (expansion at μ_β).
pub fn beta_proposal_moments(
    m: &Multiplex,
    spec: &ModelSpec,
    st: &ParameterState,
    k: usize,
) -> (f64, f64) {
    let dist = build_sq_dist(st);
    let covsum = build_covariate_sum(m, st);
    beta_moments(&ctx_for(m, spec, st, &dist, &covsum), k, st.alpha[k])
}

/// Standalone latent-position proposal moments for node `i`.
pub fn latent_proposal_moments(
    m: &Multiplex,
    spec: &ModelSpec,
    st: &ParameterState,
    i: usize,
) -> (Vec<f64>, f64) {
    let dist = build_sq_dist(st);
    let covsum = build_covariate_sum(m, st);
    latent_moments(&ctx_for(m, spec, st, &dist, &covsum), i)
}

/// Standalone effect proposal moments; `None` signals the uniform fallback.
pub fn effect_proposal_moments(
    m: &Multiplex,
    spec: &ModelSpec,
    st: &ParameterState,
    side: EffectSide,
    scope: EffectScope,
    i: usize,
) -> Option<(f64, f64)> {
    let dist = build_sq_dist(st);
    let covsum = build_covariate_sum(m, st);
    effect_moments(&ctx_for(m, spec, st, &dist, &covsum), side, scope, i)
}

/// Standalone λ_f proposal moments.
pub fn lambda_proposal_moments(
    m: &Multiplex,
    spec: &ModelSpec,
    st: &ParameterState,
    f: usize,
) -> (f64, f64) {
    let dist = build_sq_dist(st);
    let covsum = build_covariate_sum(m, st);
    lambda_moments(&ctx_for(m, spec, st, &dist, &covsum), f)
}

/// Metropolis–Hastings acceptance with the full asymmetric-proposal
/// correction: accept with probability
/// min(1, exp(lp_new − lp_old + lq_reverse − lq_forward)). A candidate with
/// −∞ posterior is always rejected.
pub fn mh_accept<R: Rng>(
    log_post_old: f64,
    log_post_new: f64,
    log_q_forward: f64,
    log_q_reverse: f64,
    rng: &mut R,
) -> bool {
    debug_assert!(log_post_old.is_finite(), "current state must be in support");
    if log_post_new == f64::NEG_INFINITY {
        return false;
    }
    let log_ratio = log_post_new - log_post_old + log_q_reverse - log_q_forward;
    if log_ratio >= 0.0 {
        true
    } else {
        rng.gen::<f64>().ln() < log_ratio
    }
}
