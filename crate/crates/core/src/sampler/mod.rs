//! Metropolis–Hastings-within-Gibbs estimation engine.
//!
//! One sweep updates, in order: (1) the nuisance parameters by exact Gibbs
//! draws; (2) per non-reference view, a joint MH move of (α^(k), β^(k));
//! (3) the latent coordinates node by node, followed by a Procrustes check
//! that discards configurations equal to the previous one up to a rigid
//! motion; (4) the sender/receiver effects node by node, jointly over views;
//! (5) the covariate coefficients. Pinned reference parameters are never
//! proposed.

mod gibbs;
pub mod proposals;

pub use gibbs::{invgamma_conditional_params, mu_conditional_params, update_nuisance};
pub use proposals::{
    alpha_proposal_moments, beta_proposal_moments, build_covariate_sum, build_sq_dist,
    effect_proposal_moments, lambda_proposal_moments, latent_proposal_moments, mh_accept,
    EffectScope, EffectSide,
};

use std::collections::BTreeMap;

use ndarray::Array2;
use rand::Rng;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;
use serde::{Deserialize, Serialize};

use crate::init::{initial_state, ReferenceAssignment};
use crate::model::{
    bernoulli_ll_term, combined_effect_at, in_support, EffectType, Hyperparameters, ModelSpec,
    ParameterState,
};
use crate::multiplex::Multiplex;
use crate::procrustes::align_rigid;
use crate::stats::{norm_ln_pdf, sample_truncated_normal, truncnorm_ln_pdf};
use crate::{Error, Result};

use proposals::{
    alpha_moments, beta_moments, current_effect, effect_moments, lambda_moments, latent_moments,
    Ctx,
};

/// Chain configuration. Defaults mirror the reference study: 60000 sweeps
/// with a 15000-sweep burn-in, no thinning.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct McmcConfig {
    pub iterations: usize,
    pub burn_in: usize,
    pub thin: usize,
    pub seed: u64,
    pub procrustes_tolerance: f64,
    pub store_latent: bool,
}

impl Default for McmcConfig {
    fn default() -> Self {
        McmcConfig {
            iterations: 60_000,
            burn_in: 15_000,
            thin: 1,
            seed: 0,
            procrustes_tolerance: 1e-8,
            store_latent: true,
        }
    }
}

impl McmcConfig {
    pub fn validate(&self) -> Result<()> {
        if self.thin == 0 {
            return Err(Error::invalid("thin must be ≥ 1"));
        }
        if self.burn_in > self.iterations {
            return Err(Error::invalid("burn-in cannot exceed iterations"));
        }
        if !(self.procrustes_tolerance >= 0.0) {
            return Err(Error::invalid("procrustes tolerance must be ≥ 0"));
        }
        Ok(())
    }
}

/// Stored values of one effect family at one sweep.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub enum EffectDraw {
    Null,
    Constant(Vec<f64>),
    Variable(Array2<f64>),
}

/// One thinned post-burn-in state.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct StoredState {
    pub sweep: usize,
    pub alpha: Vec<f64>,
    pub beta: Vec<f64>,
    pub theta: EffectDraw,
    pub gamma: EffectDraw,
    pub lambda: Vec<f64>,
    pub z: Option<Array2<f64>>,
    pub mu_alpha: f64,
    pub mu_beta: f64,
    pub sigma2_alpha: f64,
    pub sigma2_beta: f64,
    pub mu_lambda: Vec<f64>,
    pub sigma2_lambda: Vec<f64>,
}

/// Everything a finished chain exposes: thinned samples, acceptance rates
/// per parameter block, and the final state.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ChainOutput {
    pub spec: ModelSpec,
    pub n_nodes: usize,
    pub n_views: usize,
    pub config: McmcConfig,
    pub pins: ReferenceAssignment,
    pub samples: Vec<StoredState>,
    pub acceptance: BTreeMap<String, f64>,
    pub final_state: ParameterState,
}

impl ChainOutput {
    /// Posterior-mean parameter state. Latent configurations are aligned to
    /// the first stored sample before averaging (rigid motions carry no
    /// information, so averaging raw coordinates would mix orientations).
    pub fn posterior_mean_state(&self) -> Result<ParameterState> {
        if self.samples.is_empty() {
            return Err(Error::invalid("chain holds no stored samples"));
        }
        let n = self.n_nodes;
        let k = self.n_views;
        let m = self.samples.len() as f64;
        let mut mean = self.final_state.clone();
        mean.alpha = vec![0.0; k];
        mean.beta = vec![0.0; k];
        mean.theta.fill(0.0);
        if self.spec.directed {
            mean.gamma.fill(0.0);
        }
        mean.lambda = vec![0.0; self.spec.f];
        mean.mu_alpha = 0.0;
        mean.mu_beta = 0.0;
        mean.sigma2_alpha = 0.0;
        mean.sigma2_beta = 0.0;
        mean.mu_lambda = vec![0.0; self.spec.f];
        mean.sigma2_lambda = vec![0.0; self.spec.f];

        let mut z_sum: Option<Array2<f64>> = if self.config.store_latent {
            Some(Array2::zeros((n, self.spec.p)))
        } else {
            None
        };
        let z_ref = self.samples[0].z.clone();

        for s in &self.samples {
            for v in 0..k {
                mean.alpha[v] += s.alpha[v] / m;
                mean.beta[v] += s.beta[v] / m;
            }
            accumulate_effect(&mut mean.theta, &s.theta, k, m);
            if self.spec.directed {
                accumulate_effect(&mut mean.gamma, &s.gamma, k, m);
            }
            for f in 0..self.spec.f {
                mean.lambda[f] += s.lambda[f] / m;
                mean.mu_lambda[f] += s.mu_lambda[f] / m;
                mean.sigma2_lambda[f] += s.sigma2_lambda[f] / m;
            }
            mean.mu_alpha += s.mu_alpha / m;
            mean.mu_beta += s.mu_beta / m;
            mean.sigma2_alpha += s.sigma2_alpha / m;
            mean.sigma2_beta += s.sigma2_beta / m;
            if let (Some(sum), Some(z), Some(zr)) = (&mut z_sum, &s.z, &z_ref) {
                let aligned = align_rigid(z, zr);
                sum.zip_mut_with(&aligned, |a, b| *a += b / m);
            }
        }
        match z_sum {
            Some(z) => mean.z = z,
            None => {
                return Err(Error::invalid(
                    "latent coordinates were not stored; rerun with store_latent",
                ))
            }
        }
        Ok(mean)
    }
}

fn accumulate_effect(target: &mut Array2<f64>, draw: &EffectDraw, k: usize, m: f64) {
    match draw {
        EffectDraw::Null => {}
        EffectDraw::Constant(v) => {
            for (i, &val) in v.iter().enumerate() {
                for col in 0..k {
                    target[[i, col]] += val / m;
                }
            }
        }
        EffectDraw::Variable(mat) => {
            target.zip_mut_with(mat, |a, b| *a += b / m);
        }
    }
}

/// Outcome of the per-sweep Procrustes check on the latent configuration.
#[derive(Debug, Clone, PartialEq)]
pub enum GuardOutcome {
    /// The new configuration is the previous one up to a rigid motion;
    /// keep the previous one.
    Discard,
    /// Genuinely new configuration, returned aligned onto the previous one.
    Keep(Array2<f64>),
}

/// Align `z_new` onto `z_prev` (translation + rotation/reflection, no
/// scaling). If the aligned configuration matches `z_prev` within `tol` in
/// every coordinate the move is a pure rigid motion and gets discarded.
pub fn procrustes_guard(z_new: &Array2<f64>, z_prev: &Array2<f64>, tol: f64) -> GuardOutcome {
    let aligned = align_rigid(z_new, z_prev);
    let max_dev = aligned
        .iter()
        .zip(z_prev.iter())
        .map(|(a, b)| (a - b).abs())
        .fold(0.0_f64, f64::max);
    if max_dev <= tol {
        GuardOutcome::Discard
    } else {
        GuardOutcome::Keep(aligned)
    }
}

/// Run a chain from the standard initialization pipeline.
pub fn run_chain(
    m: &Multiplex,
    spec: &ModelSpec,
    hyper: &Hyperparameters,
    cfg: &McmcConfig,
) -> Result<ChainOutput> {
    let (state, pins, _) = initial_state(m, spec, hyper)?;
    run_chain_from(m, spec, hyper, cfg, state, pins)
}

/// Run a chain from an explicit starting state and reference assignment.
pub fn run_chain_from(
    m: &Multiplex,
    spec: &ModelSpec,
    hyper: &Hyperparameters,
    cfg: &McmcConfig,
    state: ParameterState,
    pins: ReferenceAssignment,
) -> Result<ChainOutput> {
    cfg.validate()?;
    spec.validate()?;
    hyper.validate()?;
    if !in_support(&state, spec) {
        return Err(Error::invalid("initial state violates support constraints"));
    }
    if state.z.dim() != (m.n_nodes(), spec.p) {
        return Err(Error::invalid("initial z has wrong shape"));
    }
    let mut engine = Engine::new(m, spec, hyper, &pins, state, cfg);
    let mut samples = Vec::new();
    for sweep in 0..cfg.iterations {
        engine.sweep()?;
        if sweep >= cfg.burn_in && (sweep - cfg.burn_in) % cfg.thin == 0 {
            samples.push(engine.stored(sweep));
        }
    }
    let acceptance = engine.acceptance_rates();
    let final_state = engine.st;
    Ok(ChainOutput {
        spec: *spec,
        n_nodes: m.n_nodes(),
        n_views: m.n_views(),
        config: cfg.clone(),
        pins,
        samples,
        acceptance,
        final_state,
    })
}

struct Engine<'a> {
    m: &'a Multiplex,
    spec: &'a ModelSpec,
    hyper: &'a Hyperparameters,
    pins: &'a ReferenceAssignment,
    st: ParameterState,
    dist: Array2<f64>,
    covsum: Array2<f64>,
    rng: ChaCha8Rng,
    tol: f64,
    store_latent: bool,
    counters: BTreeMap<&'static str, (u64, u64)>,
}

impl<'a> Engine<'a> {
    fn new(
        m: &'a Multiplex,
        spec: &'a ModelSpec,
        hyper: &'a Hyperparameters,
        pins: &'a ReferenceAssignment,
        st: ParameterState,
        cfg: &McmcConfig,
    ) -> Self {
        let dist = build_sq_dist(&st);
        let covsum = build_covariate_sum(m, &st);
        Engine {
            m,
            spec,
            hyper,
            pins,
            st,
            dist,
            covsum,
            rng: ChaCha8Rng::seed_from_u64(cfg.seed),
            tol: cfg.procrustes_tolerance,
            store_latent: cfg.store_latent,
            counters: BTreeMap::new(),
        }
    }

    fn ctx(&self) -> Ctx<'_> {
        Ctx {
            m: self.m,
            spec: self.spec,
            st: &self.st,
            dist: &self.dist,
            covsum: &self.covsum,
        }
    }

    #[inline]
    fn eta(&self, k: usize, i: usize, j: usize) -> f64 {
        self.st.alpha[k] * combined_effect_at(self.spec, &self.st, k, i, j)
            - self.st.beta[k] * self.dist[[i, j]]
            - self.covsum[[i, j]]
    }

    fn bump(&mut self, block: &'static str, accepted: bool) {
        let e = self.counters.entry(block).or_insert((0, 0));
        e.1 += 1;
        if accepted {
            e.0 += 1;
        }
    }

    fn acceptance_rates(&self) -> BTreeMap<String, f64> {
        self.counters
            .iter()
            .map(|(k, (acc, tot))| (k.to_string(), *acc as f64 / (*tot).max(1) as f64))
            .collect()
    }

    fn std_normal(&mut self) -> f64 {
        self.rng.sample(StandardNormal)
    }

    fn sweep(&mut self) -> Result<()> {
        update_nuisance(&mut self.st, self.hyper, &mut self.rng)?;
        for k in 0..self.m.n_views() {
            if k != self.pins.view {
                self.update_alpha_beta(k);
            }
        }
        self.update_latent_block()?;
        if self.spec.sender_active() {
            self.update_effect_side(EffectSide::Sender)?;
        }
        if self.spec.directed && self.spec.receiver_active() {
            self.update_effect_side(EffectSide::Receiver)?;
        }
        for f in 0..self.spec.f {
            self.update_lambda(f)?;
        }
        Ok(())
    }

    fn accept_delta(&mut self, delta_lp: f64, lq_fwd: f64, lq_rev: f64) -> bool {
        if delta_lp == f64::NEG_INFINITY {
            return false;
        }
        let log_ratio = delta_lp + lq_rev - lq_fwd;
        if log_ratio >= 0.0 {
            true
        } else {
            self.rng.gen::<f64>().ln() < log_ratio
        }
    }

    /// Joint MH move for (α^(k), β^(k)). Each coordinate proposes from its
    /// Taylor-expansion normal conditioned on the other's current value; the
    /// reverse density swaps the conditioning onto the candidates. Negative
    /// candidates are rejected through the truncated prior support.
    fn update_alpha_beta(&mut self, k: usize) {
        let (ma_f, va_f, mb_f, vb_f) = {
            let ctx = self.ctx();
            let (ma, va) = alpha_moments(&ctx, k, self.st.beta[k]);
            let (mb, vb) = beta_moments(&ctx, k, self.st.alpha[k]);
            (ma, va, mb, vb)
        };
        let cand_a = ma_f + va_f.sqrt() * self.std_normal();
        let cand_b = mb_f + vb_f.sqrt() * self.std_normal();
        if cand_a < 0.0 || cand_b < 0.0 {
            self.bump("alpha_beta", false);
            return;
        }
        let (old_a, old_b) = (self.st.alpha[k], self.st.beta[k]);
        let mut delta_ll = 0.0;
        for (i, j) in self.m.dyads() {
            if !self.m.observed(k, i, j) {
                continue;
            }
            let phi = combined_effect_at(self.spec, &self.st, k, i, j);
            let eta_old = self.eta(k, i, j);
            let eta_new = eta_old + (cand_a - old_a) * phi - (cand_b - old_b) * self.dist[[i, j]];
            let y = self.m.edge(k, i, j);
            delta_ll += bernoulli_ll_term(y, eta_new) - bernoulli_ll_term(y, eta_old);
        }
        let dp = |v: f64, mu: f64, s2: f64| -(v - mu) * (v - mu) / (2.0 * s2);
        let delta_prior = dp(cand_a, self.st.mu_alpha, self.st.sigma2_alpha)
            - dp(old_a, self.st.mu_alpha, self.st.sigma2_alpha)
            + dp(cand_b, self.st.mu_beta, self.st.sigma2_beta)
            - dp(old_b, self.st.mu_beta, self.st.sigma2_beta);
        let (ma_r, va_r, mb_r, vb_r) = {
            let ctx = self.ctx();
            let (ma, va) = alpha_moments(&ctx, k, cand_b);
            let (mb, vb) = beta_moments(&ctx, k, cand_a);
            (ma, va, mb, vb)
        };
        let lq_fwd = norm_ln_pdf(cand_a, ma_f, va_f) + norm_ln_pdf(cand_b, mb_f, vb_f);
        let lq_rev = norm_ln_pdf(old_a, ma_r, va_r) + norm_ln_pdf(old_b, mb_r, vb_r);
        let accepted = self.accept_delta(delta_ll + delta_prior, lq_fwd, lq_rev);
        if accepted {
            self.st.alpha[k] = cand_a;
            self.st.beta[k] = cand_b;
        }
        self.bump("alpha_beta", accepted);
    }

    /// Sequential MH over latent coordinates, then the Procrustes check on
    /// the full configuration against the sweep's starting configuration.
    fn update_latent_block(&mut self) -> Result<()> {
        let z_start = self.st.z.clone();
        let dist_start = self.dist.clone();
        for i in 0..self.m.n_nodes() {
            self.update_latent(i);
        }
        match procrustes_guard(&self.st.z, &z_start, self.tol) {
            GuardOutcome::Discard => {
                self.st.z = z_start;
                self.dist = dist_start;
            }
            GuardOutcome::Keep(aligned) => {
                self.st.z = aligned;
                self.dist = build_sq_dist(&self.st);
            }
        }
        Ok(())
    }

    fn update_latent(&mut self, i: usize) {
        let p = self.spec.p;
        let n = self.m.n_nodes();
        let (means, var) = {
            let ctx = self.ctx();
            latent_moments(&ctx, i)
        };
        let sd = var.sqrt();
        let cand: Vec<f64> = means.iter().map(|&mu| mu + sd * self.std_normal()).collect();
        let lq_fwd: f64 = cand
            .iter()
            .zip(&means)
            .map(|(&c, &mu)| norm_ln_pdf(c, mu, var))
            .sum();

        // Likelihood delta over every dyad involving node i.
        let mut d_new = vec![0.0; n];
        for j in 0..n {
            if j == i {
                continue;
            }
            let mut d = 0.0;
            for c in 0..p {
                let t = cand[c] - self.st.z[[j, c]];
                d += t * t;
            }
            d_new[j] = d;
        }
        let mut delta_ll = 0.0;
        for k in 0..self.m.n_views() {
            for j in 0..n {
                if j == i {
                    continue;
                }
                let dd = d_new[j] - self.dist[[i, j]];
                if self.m.observed(k, i, j) {
                    let eta_old = self.eta(k, i, j);
                    let y = self.m.edge(k, i, j);
                    delta_ll += bernoulli_ll_term(y, eta_old - self.st.beta[k] * dd)
                        - bernoulli_ll_term(y, eta_old);
                }
                if self.m.directed() && self.m.observed(k, j, i) {
                    let eta_old = self.eta(k, j, i);
                    let y = self.m.edge(k, j, i);
                    delta_ll += bernoulli_ll_term(y, eta_old - self.st.beta[k] * dd)
                        - bernoulli_ll_term(y, eta_old);
                }
            }
        }
        let old_norm: f64 = (0..p).map(|c| self.st.z[[i, c]].powi(2)).sum();
        let new_norm: f64 = cand.iter().map(|c| c * c).sum();
        let delta_prior = -0.5 * (new_norm - old_norm);

        // Apply the candidate, then evaluate the reverse density at the
        // updated state (the proposal moments depend on z through w).
        let old_row: Vec<f64> = (0..p).map(|c| self.st.z[[i, c]]).collect();
        let old_dist_row: Vec<f64> = (0..n).map(|j| self.dist[[i, j]]).collect();
        for c in 0..p {
            self.st.z[[i, c]] = cand[c];
        }
        for j in 0..n {
            if j != i {
                self.dist[[i, j]] = d_new[j];
                self.dist[[j, i]] = d_new[j];
            }
        }
        let (r_means, r_var) = {
            let ctx = self.ctx();
            latent_moments(&ctx, i)
        };
        let lq_rev: f64 = old_row
            .iter()
            .zip(&r_means)
            .map(|(&o, &mu)| norm_ln_pdf(o, mu, r_var))
            .sum();
        let accepted = self.accept_delta(delta_ll + delta_prior, lq_fwd, lq_rev);
        if !accepted {
            for c in 0..p {
                self.st.z[[i, c]] = old_row[c];
            }
            for j in 0..n {
                if j != i {
                    self.dist[[i, j]] = old_dist_row[j];
                    self.dist[[j, i]] = old_dist_row[j];
                }
            }
        }
        self.bump("latent", accepted);
    }

    fn effect_block_name(&self, side: EffectSide) -> &'static str {
        if !self.spec.directed {
            "delta"
        } else if side == EffectSide::Sender {
            "sender"
        } else {
            "receiver"
        }
    }

    fn effect_type(&self, side: EffectSide) -> EffectType {
        match side {
            EffectSide::Sender => self.spec.sender,
            EffectSide::Receiver => self.spec.receiver,
        }
    }

    fn update_effect_side(&mut self, side: EffectSide) -> Result<()> {
        match self.effect_type(side) {
            EffectType::Null => Ok(()),
            EffectType::Constant => self.update_effect_constant(side),
            EffectType::Variable => self.update_effect_variable(side),
        }
    }

    fn pin_for(&self, side: EffectSide) -> &crate::init::EffectPin {
        match side {
            EffectSide::Sender => &self.pins.sender,
            EffectSide::Receiver => &self.pins.receiver,
        }
    }

    /// Draw one effect candidate: the Taylor-expansion truncated normal, or
    /// a uniform independence draw when the curvature degenerates. Returns
    /// the candidate and the forward log-density.
    fn draw_effect(&mut self, moments: Option<(f64, f64)>) -> Result<(f64, f64)> {
        match moments {
            Some((mu, var)) => {
                let cand = sample_truncated_normal(mu, var, -1.0, 1.0, &mut self.rng)?;
                Ok((cand, truncnorm_ln_pdf(cand, mu, var, -1.0, 1.0)))
            }
            None => {
                let cand = self.rng.gen_range(-1.0..1.0);
                Ok((cand, 0.5_f64.ln()))
            }
        }
    }

    fn effect_reverse_density(&self, moments: Option<(f64, f64)>, old: f64) -> f64 {
        match moments {
            Some((mu, var)) => truncnorm_ln_pdf(old, mu, var, -1.0, 1.0),
            None => 0.5_f64.ln(),
        }
    }

    /// Likelihood delta when the effect of node i on one side shifts by
    /// `delta` in view k (the effect enters the linear predictor linearly
    /// with slope α^(k)·x).
    fn effect_delta_ll(&self, side: EffectSide, k: usize, i: usize, delta: f64) -> f64 {
        let slope = self.st.alpha[k] * self.spec.effect_slope_factor() * delta;
        let mut total = 0.0;
        for other in 0..self.m.n_nodes() {
            if other == i {
                continue;
            }
            let (from, to) = match side {
                EffectSide::Sender => (i, other),
                EffectSide::Receiver => (other, i),
            };
            if !self.m.observed(k, from, to) {
                continue;
            }
            let eta_old = self.eta(k, from, to);
            let y = self.m.edge(k, from, to);
            total += bernoulli_ll_term(y, eta_old + slope) - bernoulli_ll_term(y, eta_old);
        }
        total
    }

    fn write_effect(&mut self, side: EffectSide, i: usize, views: &[usize], value: f64) {
        for &k in views {
            match side {
                EffectSide::Sender => self.st.theta[[i, k]] = value,
                EffectSide::Receiver => {
                    if self.spec.directed {
                        self.st.gamma[[i, k]] = value;
                    } else {
                        self.st.theta[[i, k]] = value;
                    }
                }
            }
        }
    }

    fn update_effect_constant(&mut self, side: EffectSide) -> Result<()> {
        let name = self.effect_block_name(side);
        let all_views: Vec<usize> = (0..self.m.n_views()).collect();
        for i in 0..self.m.n_nodes() {
            if self.pin_for(side).is_pinned(i, 0) {
                continue;
            }
            let fwd = {
                let ctx = self.ctx();
                effect_moments(&ctx, side, EffectScope::Constant, i)
            };
            let (cand, lq_fwd) = self.draw_effect(fwd)?;
            let old = current_effect(&self.st, self.spec, side, EffectScope::Constant, i);
            let mut delta_ll = 0.0;
            for k in 0..self.m.n_views() {
                delta_ll += self.effect_delta_ll(side, k, i, cand - old);
            }
            self.write_effect(side, i, &all_views, cand);
            let rev = {
                let ctx = self.ctx();
                effect_moments(&ctx, side, EffectScope::Constant, i)
            };
            let lq_rev = self.effect_reverse_density(rev, old);
            let accepted = self.accept_delta(delta_ll, lq_fwd, lq_rev);
            if !accepted {
                self.write_effect(side, i, &all_views, old);
            }
            self.bump(name, accepted);
        }
        Ok(())
    }

    fn update_effect_variable(&mut self, side: EffectSide) -> Result<()> {
        let name = self.effect_block_name(side);
        for i in 0..self.m.n_nodes() {
            let views: Vec<usize> = (0..self.m.n_views())
                .filter(|&k| !self.pin_for(side).is_pinned(i, k))
                .collect();
            if views.is_empty() {
                continue;
            }
            let mut cands = Vec::with_capacity(views.len());
            let mut olds = Vec::with_capacity(views.len());
            let mut lq_fwd = 0.0;
            let mut delta_ll = 0.0;
            for &k in &views {
                let fwd = {
                    let ctx = self.ctx();
                    effect_moments(&ctx, side, EffectScope::Variable(k), i)
                };
                let (cand, lq) = self.draw_effect(fwd)?;
                let old = current_effect(&self.st, self.spec, side, EffectScope::Variable(k), i);
                delta_ll += self.effect_delta_ll(side, k, i, cand - old);
                lq_fwd += lq;
                cands.push(cand);
                olds.push(old);
            }
            for (idx, &k) in views.iter().enumerate() {
                self.write_effect(side, i, &[k], cands[idx]);
            }
            let mut lq_rev = 0.0;
            for (idx, &k) in views.iter().enumerate() {
                let rev = {
                    let ctx = self.ctx();
                    effect_moments(&ctx, side, EffectScope::Variable(k), i)
                };
                lq_rev += self.effect_reverse_density(rev, olds[idx]);
            }
            let accepted = self.accept_delta(delta_ll, lq_fwd, lq_rev);
            if !accepted {
                for (idx, &k) in views.iter().enumerate() {
                    self.write_effect(side, i, &[k], olds[idx]);
                }
            }
            self.bump(name, accepted);
        }
        Ok(())
    }

    fn update_lambda(&mut self, f: usize) -> Result<()> {
        let (mu, var) = {
            let ctx = self.ctx();
            lambda_moments(&ctx, f)
        };
        let cand = sample_truncated_normal(mu, var, 0.0, f64::INFINITY, &mut self.rng)?;
        let lq_fwd = truncnorm_ln_pdf(cand, mu, var, 0.0, f64::INFINITY);
        // The expansion excludes λ_f, so the reverse moments are identical.
        let lq_rev = truncnorm_ln_pdf(self.st.lambda[f], mu, var, 0.0, f64::INFINITY);
        let old = self.st.lambda[f];
        let shift = cand - old;
        let xf = &self.m.covariates()[f];
        let mut delta_ll = 0.0;
        for k in 0..self.m.n_views() {
            for (i, j) in self.m.dyads() {
                if !self.m.observed(k, i, j) {
                    continue;
                }
                let eta_old = self.eta(k, i, j);
                let y = self.m.edge(k, i, j);
                delta_ll += bernoulli_ll_term(y, eta_old - shift * xf[[i, j]])
                    - bernoulli_ll_term(y, eta_old);
            }
        }
        let mu_l = self.st.mu_lambda[f];
        let s2_l = self.st.sigma2_lambda[f];
        let delta_prior =
            (-(cand - mu_l) * (cand - mu_l) + (old - mu_l) * (old - mu_l)) / (2.0 * s2_l);
        let accepted = self.accept_delta(delta_ll + delta_prior, lq_fwd, lq_rev);
        if accepted {
            self.st.lambda[f] = cand;
            let n = self.m.n_nodes();
            for i in 0..n {
                for j in 0..n {
                    self.covsum[[i, j]] += shift * xf[[i, j]];
                }
            }
        }
        self.bump("lambda", accepted);
        Ok(())
    }

    fn stored(&self, sweep: usize) -> StoredState {
        let theta = match self.spec.sender {
            EffectType::Null => EffectDraw::Null,
            EffectType::Constant => EffectDraw::Constant(self.st.theta.column(0).to_vec()),
            EffectType::Variable => EffectDraw::Variable(self.st.theta.clone()),
        };
        let gamma = if self.spec.directed {
            match self.spec.receiver {
                EffectType::Null => EffectDraw::Null,
                EffectType::Constant => EffectDraw::Constant(self.st.gamma.column(0).to_vec()),
                EffectType::Variable => EffectDraw::Variable(self.st.gamma.clone()),
            }
        } else {
            EffectDraw::Null
        };
        StoredState {
            sweep,
            alpha: self.st.alpha.clone(),
            beta: self.st.beta.clone(),
            theta,
            gamma,
            lambda: self.st.lambda.clone(),
            z: if self.store_latent {
                Some(self.st.z.clone())
            } else {
                None
            },
            mu_alpha: self.st.mu_alpha,
            mu_beta: self.st.mu_beta,
            sigma2_alpha: self.st.sigma2_alpha,
            sigma2_beta: self.st.sigma2_beta,
            mu_lambda: self.st.mu_lambda.clone(),
            sigma2_lambda: self.st.sigma2_lambda.clone(),
        }
    }
}
