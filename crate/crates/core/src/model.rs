//! Model taxonomy, parameter state, edge probabilities, log-likelihood and
//! log-posterior for the latent space multiplex model family.

use ndarray::Array2;
use serde::{Deserialize, Serialize};

use crate::multiplex::Multiplex;
use crate::stats::{log1p_exp, logistic};
use crate::{Error, Result};

/// Assumption on a node-specific effect: absent, constant across views, or
/// view-specific.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum EffectType {
    Null,
    Constant,
    Variable,
}

impl EffectType {
    fn from_letter(c: char) -> Result<Self> {
        match c {
            'N' => Ok(EffectType::Null),
            'C' => Ok(EffectType::Constant),
            'V' => Ok(EffectType::Variable),
            _ => Err(Error::invalid(format!("unknown effect letter '{c}'"))),
        }
    }

    fn letter(self) -> char {
        match self {
            EffectType::Null => 'N',
            EffectType::Constant => 'C',
            EffectType::Variable => 'V',
        }
    }
}

/// One cell of the model family: sender/receiver effect types, directedness,
/// latent dimension and covariate count.
///
/// Undirected models constrain the two effects to a single shared effect δ,
/// so only the symmetric codes N, C, V are meaningful there.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct ModelSpec {
    pub sender: EffectType,
    pub receiver: EffectType,
    pub directed: bool,
    pub p: usize,
    pub f: usize,
}

impl ModelSpec {
    pub fn new(
        sender: EffectType,
        receiver: EffectType,
        directed: bool,
        p: usize,
        f: usize,
    ) -> Result<Self> {
        let spec = ModelSpec {
            sender,
            receiver,
            directed,
            p,
            f,
        };
        spec.validate()?;
        Ok(spec)
    }

    /// Parse a directed two-letter code ("NN" … "VV") or an undirected
    /// single-letter code ("N", "C", "V").
    pub fn parse(code: &str, directed: bool, p: usize, f: usize) -> Result<Self> {
        let chars: Vec<char> = code.chars().collect();
        match (directed, chars.as_slice()) {
            (true, [s, r]) => ModelSpec::new(
                EffectType::from_letter(*s)?,
                EffectType::from_letter(*r)?,
                true,
                p,
                f,
            ),
            (false, [d]) => {
                let e = EffectType::from_letter(*d)?;
                ModelSpec::new(e, e, false, p, f)
            }
            (true, _) => Err(Error::invalid(format!(
                "'{code}' is not a directed model code; expected two letters from {{N,C,V}}"
            ))),
            (false, _) => Err(Error::invalid(format!(
                "'{code}' is not an undirected model code; undirected models take a single \
                 effect letter N, C or V (the two-letter cells are directed-only)"
            ))),
        }
    }

    pub fn code(&self) -> String {
        if self.directed {
            format!("{}{}", self.sender.letter(), self.receiver.letter())
        } else {
            self.sender.letter().to_string()
        }
    }

    pub fn validate(&self) -> Result<()> {
        if self.p < 1 {
            return Err(Error::invalid("latent dimension p must be ≥ 1"));
        }
        if !self.directed && self.sender != self.receiver {
            return Err(Error::invalid(
                "undirected models share one effect: sender and receiver types must match",
            ));
        }
        Ok(())
    }

    pub fn sender_active(&self) -> bool {
        self.sender != EffectType::Null
    }

    pub fn receiver_active(&self) -> bool {
        self.receiver != EffectType::Null
    }

    /// The x factor of the effect-proposal expansion: 1 when only one effect
    /// type is present, 0.5 when both are. Undirected models use 0.5 (the
    /// shared effect enters φ through (δ_i + δ_j)/2).
    pub fn effect_slope_factor(&self) -> f64 {
        if !self.directed || (self.sender_active() && self.receiver_active()) {
            0.5
        } else {
            1.0
        }
    }
}

/// One full point in parameter space.
///
/// Constant effects are stored as n×K matrices with identical columns so that
/// every sampler branch sees one memory layout. Undirected models keep the
/// shared effect δ in `theta`; `gamma` is left empty.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ParameterState {
    pub alpha: Vec<f64>,
    pub beta: Vec<f64>,
    pub theta: Array2<f64>,
    pub gamma: Array2<f64>,
    pub z: Array2<f64>,
    pub lambda: Vec<f64>,
    pub mu_alpha: f64,
    pub mu_beta: f64,
    pub sigma2_alpha: f64,
    pub sigma2_beta: f64,
    pub mu_lambda: Vec<f64>,
    pub sigma2_lambda: Vec<f64>,
}

impl ParameterState {
    /// A valid zero-effect state: effects 0, λ 0, z 0, unit variances.
    pub fn zeros(n: usize, k: usize, spec: &ModelSpec, hyper: &Hyperparameters) -> Self {
        let gamma = if spec.directed {
            Array2::zeros((n, k))
        } else {
            Array2::zeros((0, 0))
        };
        ParameterState {
            alpha: vec![hyper.reference_alpha; k],
            beta: vec![hyper.reference_beta; k],
            theta: Array2::zeros((n, k)),
            gamma,
            z: Array2::zeros((n, spec.p)),
            lambda: vec![0.0; spec.f],
            mu_alpha: hyper.m_alpha,
            mu_beta: hyper.m_beta,
            sigma2_alpha: 1.0,
            sigma2_beta: 1.0,
            mu_lambda: vec![hyper.m_lambda; spec.f],
            sigma2_lambda: vec![1.0; spec.f],
        }
    }

    /// Squared Euclidean distance between latent positions i and j.
    #[inline]
    pub fn sq_dist(&self, i: usize, j: usize) -> f64 {
        let mut d = 0.0;
        for c in 0..self.z.ncols() {
            let t = self.z[[i, c]] - self.z[[j, c]];
            d += t * t;
        }
        d
    }

    /// Sender effect value entering φ for dyad (i→j) in view k.
    #[inline]
    pub fn sender_value(&self, i: usize, k: usize) -> f64 {
        self.theta[[i, k]]
    }

    /// Receiver effect value entering φ for dyad (i→j) in view k. Undirected
    /// models read the shared δ from `theta`.
    #[inline]
    pub fn receiver_value(&self, spec: &ModelSpec, j: usize, k: usize) -> f64 {
        if spec.directed {
            self.gamma[[j, k]]
        } else {
            self.theta[[j, k]]
        }
    }
}

/// Fixed user-supplied quantities: hyperprior parameters and the pinned
/// reference-view values.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Hyperparameters {
    pub m_alpha: f64,
    pub m_beta: f64,
    pub tau_alpha: f64,
    pub tau_beta: f64,
    pub nu_alpha: f64,
    pub nu_beta: f64,
    pub m_lambda: f64,
    pub tau_lambda: f64,
    pub nu_lambda: f64,
    pub reference_alpha: f64,
    pub reference_beta: f64,
}

impl Hyperparameters {
    /// The defaults used throughout the simulation studies: ν = 3,
    /// m_α = 2, m_β = 0, τ = (K−1)/K, references (α, β) = (2, 1).
    ///
    /// τ = (K−1)/K degenerates at K = 1; a single-view multiplex falls back
    /// to τ = 0.5 (with one view everything is pinned to the reference
    /// anyway).
    pub fn defaults_for(k: usize) -> Self {
        let tau = if k > 1 {
            (k as f64 - 1.0) / k as f64
        } else {
            0.5
        };
        Hyperparameters {
            m_alpha: 2.0,
            m_beta: 0.0,
            tau_alpha: tau,
            tau_beta: tau,
            nu_alpha: 3.0,
            nu_beta: 3.0,
            m_lambda: 0.0,
            tau_lambda: 1.0,
            nu_lambda: 3.0,
            reference_alpha: 2.0,
            reference_beta: 1.0,
        }
    }

    pub fn validate(&self) -> Result<()> {
        let positive = [
            ("tau_alpha", self.tau_alpha),
            ("tau_beta", self.tau_beta),
            ("nu_alpha", self.nu_alpha),
            ("nu_beta", self.nu_beta),
            ("tau_lambda", self.tau_lambda),
            ("nu_lambda", self.nu_lambda),
        ];
        for (name, v) in positive {
            if !(v > 0.0) || !v.is_finite() {
                return Err(Error::invalid(format!("{name} must be > 0, got {v}")));
            }
        }
        let nonneg = [
            ("m_alpha", self.m_alpha),
            ("m_beta", self.m_beta),
            ("m_lambda", self.m_lambda),
            ("reference_alpha", self.reference_alpha),
            ("reference_beta", self.reference_beta),
        ];
        for (name, v) in nonneg {
            if !(v >= 0.0) || !v.is_finite() {
                return Err(Error::invalid(format!("{name} must be ≥ 0, got {v}")));
            }
        }
        Ok(())
    }
}

/// Combined sender/receiver effect φ for one dyad:
/// 1 when both effects are absent, the single effect when only one is
/// present, and the average when both are.
#[inline]
pub fn combined_effect(spec: &ModelSpec, theta_ik: f64, gamma_jk: f64) -> f64 {
    match (spec.sender_active(), spec.receiver_active()) {
        (false, false) => 1.0,
        (true, false) => theta_ik,
        (false, true) => gamma_jk,
        (true, true) => 0.5 * (theta_ik + gamma_jk),
    }
}

/// φ for dyad (i→j) in view k evaluated at a parameter state.
#[inline]
pub fn combined_effect_at(spec: &ModelSpec, state: &ParameterState, k: usize, i: usize, j: usize) -> f64 {
    match (spec.sender_active(), spec.receiver_active()) {
        (false, false) => 1.0,
        (true, false) => state.sender_value(i, k),
        (false, true) => state.receiver_value(spec, j, k),
        (true, true) => 0.5 * (state.sender_value(i, k) + state.receiver_value(spec, j, k)),
    }
}

/// Linear predictor η = α^(k)·φ_ij^(k) − β^(k)·d_ij − Σ_f λ_f·x_ijf, with
/// d_ij the squared Euclidean distance between the latent positions.
#[inline]
pub fn linear_predictor(
    state: &ParameterState,
    spec: &ModelSpec,
    covariates: &[Array2<f64>],
    k: usize,
    i: usize,
    j: usize,
) -> f64 {
    debug_assert_ne!(i, j);
    let phi = combined_effect_at(spec, state, k, i, j);
    let mut eta = state.alpha[k] * phi - state.beta[k] * state.sq_dist(i, j);
    for (f, x) in covariates.iter().enumerate() {
        eta -= state.lambda[f] * x[[i, j]];
    }
    eta
}

/// Edge probability logistic(η), strictly inside (0, 1).
#[inline]
pub fn edge_probability(
    state: &ParameterState,
    spec: &ModelSpec,
    covariates: &[Array2<f64>],
    k: usize,
    i: usize,
    j: usize,
) -> f64 {
    logistic(linear_predictor(state, spec, covariates, k, i, j))
}

/// Binary indicator w = 1 iff the linear predictor is strictly positive
/// (η = 0 falls in the zero branch).
#[inline]
pub fn w_indicator(
    state: &ParameterState,
    spec: &ModelSpec,
    covariates: &[Array2<f64>],
    k: usize,
    i: usize,
    j: usize,
) -> u8 {
    if linear_predictor(state, spec, covariates, k, i, j) > 0.0 {
        1
    } else {
        0
    }
}

/// Per-dyad log-likelihood contribution y·η − log(1 + e^η).
#[inline]
pub fn bernoulli_ll_term(y: u8, eta: f64) -> f64 {
    f64::from(y) * eta - log1p_exp(eta)
}

/// Mask-weighted log-likelihood. Directed multiplexes sum over ordered
/// pairs; undirected ones over unordered pairs (each dyad once).
pub fn log_likelihood(m: &Multiplex, state: &ParameterState, spec: &ModelSpec) -> f64 {
    let cov = m.covariates();
    let mut ll = 0.0;
    for k in 0..m.n_views() {
        for (i, j) in m.dyads() {
            if !m.observed(k, i, j) {
                continue;
            }
            let eta = linear_predictor(state, spec, cov, k, i, j);
            ll += bernoulli_ll_term(m.edge(k, i, j), eta);
        }
    }
    ll
}

/// True iff the state satisfies all support constraints: α, β, μ_α, μ_β ≥ 0,
/// active effects in [−1, 1], λ and μ_λ ≥ 0, variances > 0, coordinates
/// finite.
pub fn in_support(state: &ParameterState, spec: &ModelSpec) -> bool {
    let ok_nonneg = |v: f64| v >= 0.0 && v.is_finite();
    if !state.alpha.iter().all(|&a| ok_nonneg(a)) || !state.beta.iter().all(|&b| ok_nonneg(b)) {
        return false;
    }
    if !ok_nonneg(state.mu_alpha) || !ok_nonneg(state.mu_beta) {
        return false;
    }
    if !(state.sigma2_alpha > 0.0 && state.sigma2_alpha.is_finite()) {
        return false;
    }
    if !(state.sigma2_beta > 0.0 && state.sigma2_beta.is_finite()) {
        return false;
    }
    if spec.sender_active() && state.theta.iter().any(|&t| !(-1.0..=1.0).contains(&t)) {
        return false;
    }
    if spec.directed
        && spec.receiver_active()
        && state.gamma.iter().any(|&g| !(-1.0..=1.0).contains(&g))
    {
        return false;
    }
    if !state.lambda.iter().all(|&l| ok_nonneg(l)) {
        return false;
    }
    if !state.mu_lambda.iter().all(|&l| ok_nonneg(l)) {
        return false;
    }
    if !state
        .sigma2_lambda
        .iter()
        .all(|&s| s > 0.0 && s.is_finite())
    {
        return false;
    }
    state.z.iter().all(|&v| v.is_finite())
}

/// Unnormalized log-posterior: log-likelihood plus every state-dependent
/// prior and hyperprior term; −∞ for states outside the support.
pub fn log_posterior(
    m: &Multiplex,
    state: &ParameterState,
    spec: &ModelSpec,
    hyper: &Hyperparameters,
) -> f64 {
    if !in_support(state, spec) {
        return f64::NEG_INFINITY;
    }
    let mut lp = log_likelihood(m, state, spec);

    // Latent positions: z_i ~ MVN(0, I).
    lp -= 0.5 * state.z.iter().map(|v| v * v).sum::<f64>();

    let k = state.alpha.len() as f64;
    for (label, values, mu, sigma2, tau, nu) in [
        (
            'a',
            &state.alpha,
            state.mu_alpha,
            state.sigma2_alpha,
            hyper.tau_alpha,
            hyper.nu_alpha,
        ),
        (
            'b',
            &state.beta,
            state.mu_beta,
            state.sigma2_beta,
            hyper.tau_beta,
            hyper.nu_beta,
        ),
    ] {
        let _ = label;
        let ssq: f64 = values.iter().map(|v| (v - mu) * (v - mu)).sum();
        lp -= 0.5 * (ssq / sigma2 + k * sigma2.ln());
        lp -= 0.5 * ((tau * sigma2).ln() + mu * mu / (tau * sigma2) + 1.0 / sigma2);
        lp += (-nu / 2.0 - 1.0) * sigma2.ln();
    }

    for f in 0..state.lambda.len() {
        let lam = state.lambda[f];
        let mu = state.mu_lambda[f];
        let s2 = state.sigma2_lambda[f];
        lp -= 0.5
            * ((lam - mu) * (lam - mu) / s2
                + s2.ln()
                + (hyper.tau_lambda * s2).ln()
                + (mu - hyper.m_lambda) * (mu - hyper.m_lambda) / (hyper.tau_lambda * s2)
                + 1.0 / s2);
        lp += (-hyper.nu_lambda / 2.0 - 1.0) * s2.ln();
    }
    lp
}
