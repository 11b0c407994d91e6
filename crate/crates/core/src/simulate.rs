//! Synthetic multiplex generation for simulation studies and for the
//! model-selection heuristic's training pools.

use ndarray::Array2;
use rand::Rng;
use rand_distr::StandardNormal;
use serde::{Deserialize, Serialize};

use crate::model::{edge_probability, EffectType, Hyperparameters, ModelSpec, ParameterState};
use crate::multiplex::Multiplex;
use crate::stats::sample_truncated_normal;
use crate::{Error, Result};

/// Generating law for a synthetic multiplex. The reference view gets the
/// fixed (α, β); the other views draw from half-normals around those values.
/// Effects are uniform on (−1, 1) with one randomly chosen node per
/// constraint pinned at 1, matching the constraint family of the fitted
/// models. Latent coordinates are iid standard normal.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TruthConfig {
    pub n: usize,
    pub k: usize,
    pub spec: ModelSpec,
    pub reference_alpha: f64,
    pub reference_beta: f64,
    pub alpha_sd: f64,
    pub beta_sd: f64,
    pub missing_rate: f64,
}

impl TruthConfig {
    pub fn new(n: usize, k: usize, spec: ModelSpec) -> Self {
        TruthConfig {
            n,
            k,
            spec,
            reference_alpha: 2.0,
            reference_beta: 1.0,
            alpha_sd: 0.5,
            beta_sd: 0.5,
            missing_rate: 0.0,
        }
    }

    pub fn validate(&self) -> Result<()> {
        self.spec.validate()?;
        if self.n < 2 || self.k < 1 {
            return Err(Error::invalid("need n ≥ 2 and K ≥ 1"));
        }
        if self.spec.f != 0 {
            return Err(Error::invalid(
                "covariate simulation is not supported; supply covariates with real data",
            ));
        }
        if !(0.0..1.0).contains(&self.missing_rate) {
            return Err(Error::invalid("missing rate must lie in [0, 1)"));
        }
        if !(self.reference_alpha >= 0.0) || !(self.reference_beta >= 0.0) {
            return Err(Error::invalid("reference values must be ≥ 0"));
        }
        Ok(())
    }
}

/// Draw a ground-truth parameter state from the generating law.
pub fn draw_truth<R: Rng>(cfg: &TruthConfig, rng: &mut R) -> Result<ParameterState> {
    cfg.validate()?;
    let spec = &cfg.spec;
    let hyper = Hyperparameters {
        reference_alpha: cfg.reference_alpha,
        reference_beta: cfg.reference_beta,
        ..Hyperparameters::defaults_for(cfg.k)
    };
    let mut st = ParameterState::zeros(cfg.n, cfg.k, spec, &hyper);
    st.alpha[0] = cfg.reference_alpha;
    st.beta[0] = cfg.reference_beta;
    for k in 1..cfg.k {
        st.alpha[k] = sample_truncated_normal(
            cfg.reference_alpha,
            cfg.alpha_sd * cfg.alpha_sd,
            0.0,
            f64::INFINITY,
            rng,
        )?;
        st.beta[k] = sample_truncated_normal(
            cfg.reference_beta,
            cfg.beta_sd * cfg.beta_sd,
            0.0,
            f64::INFINITY,
            rng,
        )?;
    }
    for i in 0..cfg.n {
        for c in 0..spec.p {
            st.z[[i, c]] = rng.sample(StandardNormal);
        }
    }
    if spec.sender_active() {
        draw_effect_matrix(&mut st.theta, spec.sender, cfg, rng);
    }
    if spec.directed && spec.receiver_active() {
        draw_effect_matrix(&mut st.gamma, spec.receiver, cfg, rng);
    }
    st.mu_alpha = cfg.reference_alpha;
    st.mu_beta = cfg.reference_beta;
    st.sigma2_alpha = cfg.alpha_sd * cfg.alpha_sd;
    st.sigma2_beta = cfg.beta_sd * cfg.beta_sd;
    Ok(st)
}

fn draw_effect_matrix<R: Rng>(
    target: &mut Array2<f64>,
    effect: EffectType,
    cfg: &TruthConfig,
    rng: &mut R,
) {
    match effect {
        EffectType::Null => {}
        EffectType::Constant => {
            for i in 0..cfg.n {
                let v = rng.gen_range(-1.0..1.0);
                for k in 0..cfg.k {
                    target[[i, k]] = v;
                }
            }
            // The fitted model pins one node at 1; make the truth a member
            // of the same constraint family.
            let pin = rng.gen_range(0..cfg.n);
            for k in 0..cfg.k {
                target[[pin, k]] = 1.0;
            }
        }
        EffectType::Variable => {
            for i in 0..cfg.n {
                for k in 0..cfg.k {
                    target[[i, k]] = rng.gen_range(-1.0..1.0);
                }
            }
            for k in 0..cfg.k {
                let pin = rng.gen_range(0..cfg.n);
                target[[pin, k]] = 1.0;
            }
        }
    }
}

/// Draw one multiplex from a truth state: every off-diagonal cell is an
/// independent Bernoulli with the model's edge probability; undirected
/// specs fill the upper triangle and mirror it. A positive missing rate
/// knocks out cells (pairs, when undirected) at random.
pub fn simulate_multiplex<R: Rng>(
    truth: &ParameterState,
    spec: &ModelSpec,
    missing_rate: f64,
    rng: &mut R,
) -> Result<Multiplex> {
    let n = truth.z.nrows();
    let k = truth.alpha.len();
    let mut ys = Vec::with_capacity(k);
    let mut hs = Vec::with_capacity(k);
    for view in 0..k {
        let mut y = Array2::zeros((n, n));
        let mut h = Array2::ones((n, n));
        for i in 0..n {
            for j in 0..n {
                if i == j || (!spec.directed && j < i) {
                    continue;
                }
                let p = edge_probability(truth, spec, &[], view, i, j);
                let bit = rng.gen_bool(p) as u8;
                y[[i, j]] = bit;
                if !spec.directed {
                    y[[j, i]] = bit;
                }
                if missing_rate > 0.0 && rng.gen_bool(missing_rate) {
                    h[[i, j]] = 0;
                    if !spec.directed {
                        h[[j, i]] = 0;
                    }
                }
            }
        }
        ys.push(y);
        hs.push(h);
    }
    Multiplex::new(
        ys,
        hs,
        vec![],
        (1..=n).map(|i| format!("n{i}")).collect(),
        (1..=k).map(|i| format!("k{i}")).collect(),
        spec.directed,
    )
}

/// Convenience wrapper drawing a truth and one multiplex from it.
pub fn simulate_from_config<R: Rng>(
    cfg: &TruthConfig,
    rng: &mut R,
) -> Result<(ParameterState, Multiplex)> {
    let truth = draw_truth(cfg, rng)?;
    let m = simulate_multiplex(&truth, &cfg.spec, cfg.missing_rate, rng)?;
    Ok((truth, m))
}
