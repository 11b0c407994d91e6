//! Evaluation statistics: distance correlation, Spearman correlation,
//! Procrustes correlation, posterior summaries, and recovery reports for
//! simulation studies.

use serde::{Deserialize, Serialize};

use crate::init::EffectPin;
use crate::model::{edge_probability, ModelSpec, ParameterState};
use crate::multiplex::Multiplex;
use crate::sampler::{ChainOutput, EffectDraw};
use crate::{Error, Result};

pub use crate::procrustes::procrustes_correlation;

/// Pearson correlation with a zero-variance guard: a constant vector
/// contributes correlation 0 rather than NaN.
pub(crate) fn pearson(u: &[f64], v: &[f64]) -> f64 {
    let n = u.len() as f64;
    let mu = u.iter().sum::<f64>() / n;
    let mv = v.iter().sum::<f64>() / n;
    let mut suu = 0.0;
    let mut svv = 0.0;
    let mut suv = 0.0;
    for (a, b) in u.iter().zip(v) {
        let da = a - mu;
        let db = b - mv;
        suu += da * da;
        svv += db * db;
        suv += da * db;
    }
    if suu <= 0.0 || svv <= 0.0 {
        return 0.0;
    }
    suv / (suu * svv).sqrt()
}

/// Székely's empirical (V-statistic) distance correlation between two real
/// samples of equal length. Zero-variance inputs give 0 by convention.
///
/// Two passes over the n² pairs keep memory at O(n): the first accumulates
/// row means of the pairwise-distance matrices, the second the products of
/// the double-centered entries.
pub fn distance_correlation(u: &[f64], v: &[f64]) -> Result<f64> {
    let n = u.len();
    if n != v.len() || n < 2 {
        return Err(Error::invalid(
            "distance correlation needs two equal-length samples of size ≥ 2",
        ));
    }
    let nf = n as f64;
    let mut row_u = vec![0.0; n];
    let mut row_v = vec![0.0; n];
    for i in 0..n {
        for j in 0..n {
            row_u[i] += (u[i] - u[j]).abs();
            row_v[i] += (v[i] - v[j]).abs();
        }
    }
    for r in row_u.iter_mut().chain(row_v.iter_mut()) {
        *r /= nf;
    }
    let grand_u = row_u.iter().sum::<f64>() / nf;
    let grand_v = row_v.iter().sum::<f64>() / nf;
    let mut cov = 0.0;
    let mut var_u = 0.0;
    let mut var_v = 0.0;
    for i in 0..n {
        for j in 0..n {
            let a = (u[i] - u[j]).abs() - row_u[i] - row_u[j] + grand_u;
            let b = (v[i] - v[j]).abs() - row_v[i] - row_v[j] + grand_v;
            cov += a * b;
            var_u += a * a;
            var_v += b * b;
        }
    }
    if var_u <= 0.0 || var_v <= 0.0 {
        return Ok(0.0);
    }
    let r2 = cov / (var_u * var_v).sqrt();
    Ok(r2.max(0.0).sqrt().min(1.0))
}

/// Mid-ranks with ties averaged.
fn midranks(values: &[f64]) -> Vec<f64> {
    let n = values.len();
    let mut idx: Vec<usize> = (0..n).collect();
    idx.sort_by(|&a, &b| values[a].partial_cmp(&values[b]).unwrap());
    let mut ranks = vec![0.0; n];
    let mut i = 0;
    while i < n {
        let mut j = i;
        while j + 1 < n && values[idx[j + 1]] == values[idx[i]] {
            j += 1;
        }
        let avg = (i + j) as f64 / 2.0 + 1.0;
        for &id in &idx[i..=j] {
            ranks[id] = avg;
        }
        i = j + 1;
    }
    ranks
}

/// Spearman rank correlation (Pearson correlation of mid-ranks, average
/// ranks for ties; zero rank variance gives 0).
pub fn spearman(u: &[f64], v: &[f64]) -> Result<f64> {
    if u.len() != v.len() || u.len() < 2 {
        return Err(Error::invalid(
            "spearman needs two equal-length samples of size ≥ 2",
        ));
    }
    Ok(pearson(&midranks(u), &midranks(v)))
}

/// Posterior summary for one scalar parameter. Pinned parameters report no
/// spread.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct ParamSummary {
    pub name: String,
    pub mean: f64,
    pub sd: Option<f64>,
    pub q025: f64,
    pub q975: f64,
    pub pinned: bool,
}

fn summarize(name: String, values: &[f64], pinned: bool) -> ParamSummary {
    let n = values.len() as f64;
    let mean = values.iter().sum::<f64>() / n;
    let sd = if pinned {
        None
    } else if values.len() > 1 {
        Some(
            (values.iter().map(|v| (v - mean) * (v - mean)).sum::<f64>() / (n - 1.0)).sqrt(),
        )
    } else {
        Some(0.0)
    };
    let mut sorted = values.to_vec();
    sorted.sort_by(|a, b| a.partial_cmp(b).unwrap());
    ParamSummary {
        name,
        mean,
        sd,
        q025: quantile(&sorted, 0.025),
        q975: quantile(&sorted, 0.975),
        pinned,
    }
}

/// Linear-interpolation quantile of a sorted sample.
fn quantile(sorted: &[f64], q: f64) -> f64 {
    let n = sorted.len();
    if n == 1 {
        return sorted[0];
    }
    let pos = q * (n - 1) as f64;
    let lo = pos.floor() as usize;
    let hi = pos.ceil() as usize;
    let frac = pos - lo as f64;
    sorted[lo] * (1.0 - frac) + sorted[hi] * frac
}

/// Mean, sd and central 95% interval for every stored parameter. Reference
/// parameters (the pinned view's α/β and the pinned effect nodes) are
/// reported with the spread marked absent.
pub fn posterior_summaries(chain: &ChainOutput) -> Result<Vec<ParamSummary>> {
    if chain.samples.is_empty() {
        return Err(Error::invalid("chain holds no stored samples"));
    }
    let mut out = Vec::new();
    let pull = |get: &dyn Fn(&crate::sampler::StoredState) -> f64| -> Vec<f64> {
        chain.samples.iter().map(get).collect()
    };
    for k in 0..chain.n_views {
        let pinned = k == chain.pins.view;
        out.push(summarize
            (format!("alpha.{}", k + 1), &pull(&|s| s.alpha[k]), pinned));
    }
    for k in 0..chain.n_views {
        let pinned = k == chain.pins.view;
        out.push(summarize(format!("beta.{}", k + 1), &pull(&|s| s.beta[k]), pinned));
    }
    let effect_names = |side: &EffectPin, base: &str, draw0: &EffectDraw| -> Vec<(String, usize, usize, bool)> {
        // (name, node, view-or-0, pinned)
        match draw0 {
            EffectDraw::Null => vec![],
            EffectDraw::Constant(v) => (0..v.len())
                .map(|i| (format!("{base}.{}", i + 1), i, 0, side.is_pinned(i, 0)))
                .collect(),
            EffectDraw::Variable(mat) => {
                let (n, kk) = mat.dim();
                let mut names = Vec::with_capacity(n * kk);
                for i in 0..n {
                    for k in 0..kk {
                        names.push((
                            format!("{base}.{}.{}", i + 1, k + 1),
                            i,
                            k,
                            side.is_pinned(i, k),
                        ));
                    }
                }
                names
            }
        }
    };
    let theta_base = if chain.spec.directed { "theta" } else { "delta" };
    for (name, i, k, pinned) in effect_names(&chain.pins.sender, theta_base, &chain.samples[0].theta)
    {
        let vals = pull(&|s| match &s.theta {
            EffectDraw::Null => 0.0,
            EffectDraw::Constant(v) => v[i],
            EffectDraw::Variable(m) => m[[i, k]],
        });
        out.push(summarize(name, &vals, pinned));
    }
    if chain.spec.directed {
        for (name, i, k, pinned) in
            effect_names(&chain.pins.receiver, "gamma", &chain.samples[0].gamma)
        {
            let vals = pull(&|s| match &s.gamma {
                EffectDraw::Null => 0.0,
                EffectDraw::Constant(v) => v[i],
                EffectDraw::Variable(m) => m[[i, k]],
            });
            out.push(summarize(name, &vals, pinned));
        }
    }
    for f in 0..chain.spec.f {
        out.push(summarize(format!("lambda.{}", f + 1), &pull(&|s| s.lambda[f]), false));
        out.push(summarize(
            format!("mu_lambda.{}", f + 1),
            &pull(&|s| s.mu_lambda[f]),
            false,
        ));
        out.push(summarize(
            format!("sigma2_lambda.{}", f + 1),
            &pull(&|s| s.sigma2_lambda[f]),
            false,
        ));
    }
    out.push(summarize("mu_alpha".into(), &pull(&|s| s.mu_alpha), false));
    out.push(summarize("mu_beta".into(), &pull(&|s| s.mu_beta), false));
    out.push(summarize(
        "sigma2_alpha".into(),
        &pull(&|s| s.sigma2_alpha),
        false,
    ));
    out.push(summarize(
        "sigma2_beta".into(),
        &pull(&|s| s.sigma2_beta),
        false,
    ));
    Ok(out)
}

/// How edge probabilities are estimated from a chain.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum ProbEstimator {
    /// Probabilities evaluated at the posterior-mean parameters.
    PlugIn,
    /// Mean of the per-sample probabilities (needs stored latents).
    MeanOfSamples,
}

/// Per-view recovery quality of a fitted chain against a known truth.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct ViewRecovery {
    pub view: usize,
    pub dcor_probabilities: f64,
    pub spearman_sender: Option<f64>,
    pub spearman_receiver: Option<f64>,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct RecoveryReport {
    pub per_view: Vec<ViewRecovery>,
    pub procrustes_z: f64,
    pub estimator: ProbEstimator,
}

/// Edge probabilities over the observed off-diagonal cells of one view.
fn view_probabilities(
    m: &Multiplex,
    st: &ParameterState,
    spec: &ModelSpec,
    k: usize,
) -> Vec<f64> {
    m.dyads()
        .filter(|&(i, j)| m.observed(k, i, j))
        .map(|(i, j)| edge_probability(st, spec, m.covariates(), k, i, j))
        .collect()
}

fn effect_column(st: &ParameterState, spec: &ModelSpec, side: EffectSide, k: usize) -> Vec<f64> {
    match side {
        EffectSide::Sender => st.theta.column(k).to_vec(),
        EffectSide::Receiver => {
            if spec.directed {
                st.gamma.column(k).to_vec()
            } else {
                st.theta.column(k).to_vec()
            }
        }
    }
}

use crate::sampler::EffectSide;

/// Compare a chain against the generating truth: per-view distance
/// correlation of edge probabilities, per-view Spearman correlation of the
/// active effects, and the Procrustes correlation of the latent
/// configuration.
pub fn recovery_report(
    truth: &ParameterState,
    chain: &ChainOutput,
    m: &Multiplex,
    estimator: ProbEstimator,
) -> Result<RecoveryReport> {
    let spec = &chain.spec;
    if truth.z.dim() != (m.n_nodes(), spec.p) || truth.alpha.len() != m.n_views() {
        return Err(Error::invalid(
            "truth dimensions do not match the chain/multiplex",
        ));
    }
    let mean_state = chain.posterior_mean_state()?;
    let mut per_view = Vec::new();
    for k in 0..m.n_views() {
        let true_probs = view_probabilities(m, truth, spec, k);
        let est_probs = match estimator {
            ProbEstimator::PlugIn => view_probabilities(m, &mean_state, spec, k),
            ProbEstimator::MeanOfSamples => {
                let mut acc = vec![0.0; true_probs.len()];
                let mm = chain.samples.len() as f64;
                for s in &chain.samples {
                    let st = sample_to_state(s, &mean_state, spec)?;
                    for (a, p) in acc.iter_mut().zip(view_probabilities(m, &st, spec, k)) {
                        *a += p / mm;
                    }
                }
                acc
            }
        };
        let dcor = distance_correlation(&true_probs, &est_probs)?;
        let spearman_sender = if spec.sender_active() {
            Some(spearman(
                &effect_column(truth, spec, EffectSide::Sender, k),
                &effect_column(&mean_state, spec, EffectSide::Sender, k),
            )?)
        } else {
            None
        };
        let spearman_receiver = if spec.receiver_active() {
            Some(spearman(
                &effect_column(truth, spec, EffectSide::Receiver, k),
                &effect_column(&mean_state, spec, EffectSide::Receiver, k),
            )?)
        } else {
            None
        };
        per_view.push(ViewRecovery {
            view: k,
            dcor_probabilities: dcor,
            spearman_sender,
            spearman_receiver,
        });
    }
    let procrustes_z = procrustes_correlation(&truth.z, &mean_state.z)?;
    Ok(RecoveryReport {
        per_view,
        procrustes_z,
        estimator,
    })
}

/// Materialize one stored sample as a full parameter state (template
/// supplies anything not stored, e.g. z when latents were not kept).
fn sample_to_state(
    s: &crate::sampler::StoredState,
    template: &ParameterState,
    spec: &ModelSpec,
) -> Result<ParameterState> {
    let mut st = template.clone();
    st.alpha = s.alpha.clone();
    st.beta = s.beta.clone();
    st.lambda = s.lambda.clone();
    let (n, k) = st.theta.dim();
    match &s.theta {
        EffectDraw::Null => st.theta.fill(0.0),
        EffectDraw::Constant(v) => {
            for i in 0..n {
                for col in 0..k {
                    st.theta[[i, col]] = v[i];
                }
            }
        }
        EffectDraw::Variable(mat) => st.theta = mat.clone(),
    }
    if spec.directed {
        match &s.gamma {
            EffectDraw::Null => st.gamma.fill(0.0),
            EffectDraw::Constant(v) => {
                for i in 0..n {
                    for col in 0..k {
                        st.gamma[[i, col]] = v[i];
                    }
                }
            }
            EffectDraw::Variable(mat) => st.gamma = mat.clone(),
        }
    }
    if let Some(z) = &s.z {
        st.z = z.clone();
    }
    Ok(st)
}
