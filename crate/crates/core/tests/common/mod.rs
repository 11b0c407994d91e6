//! Shared oracle implementations for the acceptance gates. Everything here
//! is assembled independently of the library's internal code paths: naive
//! per-entry sums, explicit matrices, finite differences.

#![allow(dead_code)]

use lsmplex::model::{Hyperparameters, ModelSpec, ParameterState};
use lsmplex::multiplex::Multiplex;
use ndarray::Array2;
use rand::Rng;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

/// Brute-force per-entry log-likelihood.
pub fn oracle_log_likelihood(m: &Multiplex, st: &ParameterState, spec: &ModelSpec) -> f64 {
    let mut total = 0.0;
    for k in 0..m.n_views() {
        for i in 0..m.n_nodes() {
            for j in 0..m.n_nodes() {
                if i == j || (!m.directed() && j < i) {
                    continue;
                }
                if m.mask(k)[[i, j]] == 0 {
                    continue;
                }
                let eta = oracle_eta(m, st, spec, k, i, j);
                let p = 1.0 / (1.0 + (-eta).exp());
                let y = f64::from(m.adjacency(k)[[i, j]]);
                total += y * p.ln() + (1.0 - y) * (1.0 - p).ln();
            }
        }
    }
    total
}

/// Linear predictor assembled from scratch.
pub fn oracle_eta(
    m: &Multiplex,
    st: &ParameterState,
    spec: &ModelSpec,
    k: usize,
    i: usize,
    j: usize,
) -> f64 {
    let mut d = 0.0;
    for c in 0..spec.p {
        d += (st.z[[i, c]] - st.z[[j, c]]).powi(2);
    }
    let sender = spec.sender != lsmplex::model::EffectType::Null;
    let receiver = spec.receiver != lsmplex::model::EffectType::Null;
    let th = if sender { st.theta[[i, k]] } else { 0.0 };
    let ga = if receiver {
        if spec.directed {
            st.gamma[[j, k]]
        } else {
            st.theta[[j, k]]
        }
    } else {
        0.0
    };
    let phi = match (sender, receiver) {
        (false, false) => 1.0,
        (true, false) => th,
        (false, true) => ga,
        (true, true) => 0.5 * (th + ga),
    };
    let mut eta = st.alpha[k] * phi - st.beta[k] * d;
    for (f, x) in m.covariates().iter().enumerate() {
        eta -= st.lambda[f] * x[[i, j]];
    }
    eta
}

/// Term-by-term log-posterior (no support clamping; used for finite
/// differences across support boundaries too).
pub fn oracle_log_posterior(
    m: &Multiplex,
    st: &ParameterState,
    spec: &ModelSpec,
    hyper: &Hyperparameters,
) -> f64 {
    let k = st.alpha.len() as f64;
    let mut lp = oracle_log_likelihood(m, st, spec);
    lp += -0.5 * st.z.iter().map(|v| v * v).sum::<f64>();
    lp += -0.5
        * (st
            .alpha
            .iter()
            .map(|a| (a - st.mu_alpha).powi(2))
            .sum::<f64>()
            / st.sigma2_alpha
            + st
                .beta
                .iter()
                .map(|b| (b - st.mu_beta).powi(2))
                .sum::<f64>()
                / st.sigma2_beta
            + k * st.sigma2_alpha.ln()
            + k * st.sigma2_beta.ln()
            + (hyper.tau_alpha * st.sigma2_alpha).ln()
            + (hyper.tau_beta * st.sigma2_beta).ln()
            + st.mu_alpha.powi(2) / (hyper.tau_alpha * st.sigma2_alpha)
            + st.mu_beta.powi(2) / (hyper.tau_beta * st.sigma2_beta)
            + 1.0 / st.sigma2_alpha
            + 1.0 / st.sigma2_beta);
    lp += (-hyper.nu_alpha / 2.0 - 1.0) * st.sigma2_alpha.ln()
        + (-hyper.nu_beta / 2.0 - 1.0) * st.sigma2_beta.ln();
    for f in 0..st.lambda.len() {
        lp += -0.5
            * ((st.lambda[f] - st.mu_lambda[f]).powi(2) / st.sigma2_lambda[f]
                + st.sigma2_lambda[f].ln()
                + (hyper.tau_lambda * st.sigma2_lambda[f]).ln()
                + (st.mu_lambda[f] - hyper.m_lambda).powi(2)
                    / (hyper.tau_lambda * st.sigma2_lambda[f])
                + 1.0 / st.sigma2_lambda[f]);
        lp += (-hyper.nu_lambda / 2.0 - 1.0) * st.sigma2_lambda[f].ln();
    }
    lp
}

/// Fourth-order central second derivative.
pub fn fd_second_derivative(f: impl Fn(f64) -> f64, x: f64, h: f64) -> f64 {
    (-f(x + 2.0 * h) + 16.0 * f(x + h) - 30.0 * f(x) + 16.0 * f(x - h) - f(x - 2.0 * h))
        / (12.0 * h * h)
}

/// KS distance between a sample and a CDF.
pub fn ks_statistic(mut draws: Vec<f64>, cdf: impl Fn(f64) -> f64) -> f64 {
    draws.sort_by(|a, b| a.partial_cmp(b).unwrap());
    let n = draws.len() as f64;
    let mut ks: f64 = 0.0;
    for (i, &x) in draws.iter().enumerate() {
        let f = cdf(x);
        ks = ks.max((f - i as f64 / n).abs());
        ks = ks.max((f - (i + 1) as f64 / n).abs());
    }
    ks
}

/// Random observed multiplex with the given directedness.
pub fn random_multiplex(n: usize, k: usize, f: usize, directed: bool, seed: u64) -> Multiplex {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut ys = Vec::new();
    let mut hs = Vec::new();
    for _ in 0..k {
        let mut y = Array2::zeros((n, n));
        let mut h = Array2::ones((n, n));
        for i in 0..n {
            for j in 0..n {
                if i == j {
                    continue;
                }
                if directed || i < j {
                    y[[i, j]] = rng.gen_bool(0.45) as u8;
                    h[[i, j]] = rng.gen_bool(0.92) as u8;
                    if !directed {
                        y[[j, i]] = y[[i, j]];
                        h[[j, i]] = h[[i, j]];
                    }
                }
            }
        }
        ys.push(y);
        hs.push(h);
    }
    let xs = (0..f)
        .map(|_| {
            let mut x = Array2::zeros((n, n));
            for i in 0..n {
                for j in 0..n {
                    if i != j && (directed || i < j) {
                        x[[i, j]] = rng.gen_range(0.0..1.5);
                        if !directed {
                            x[[j, i]] = x[[i, j]];
                        }
                    }
                }
            }
            x
        })
        .collect();
    Multiplex::new(
        ys,
        hs,
        xs,
        (0..n).map(|i| format!("n{i}")).collect(),
        (0..k).map(|i| format!("k{i}")).collect(),
        directed,
    )
    .unwrap()
}

/// Random in-support parameter state for a spec.
pub fn random_state(n: usize, k: usize, spec: &ModelSpec, seed: u64) -> ParameterState {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let hyper = Hyperparameters::defaults_for(k.max(2));
    let mut st = ParameterState::zeros(n, k, spec, &hyper);
    for v in st.alpha.iter_mut() {
        *v = rng.gen_range(0.5..3.0);
    }
    for v in st.beta.iter_mut() {
        *v = rng.gen_range(0.2..1.8);
    }
    for v in st.theta.iter_mut() {
        *v = rng.gen_range(-0.95..0.95);
    }
    for v in st.gamma.iter_mut() {
        *v = rng.gen_range(-0.95..0.95);
    }
    for v in st.z.iter_mut() {
        *v = rng.gen_range(-1.4..1.4);
    }
    for v in st.lambda.iter_mut() {
        *v = rng.gen_range(0.1..0.8);
    }
    st.mu_alpha = rng.gen_range(0.8..2.5);
    st.mu_beta = rng.gen_range(0.2..1.2);
    st.sigma2_alpha = rng.gen_range(0.4..1.5);
    st.sigma2_beta = rng.gen_range(0.4..1.5);
    for v in st.mu_lambda.iter_mut() {
        *v = rng.gen_range(0.1..0.6);
    }
    for v in st.sigma2_lambda.iter_mut() {
        *v = rng.gen_range(0.5..1.5);
    }
    // constant effects must hold identical columns
    if spec.sender == lsmplex::model::EffectType::Constant {
        for i in 0..n {
            let v = st.theta[[i, 0]];
            for col in 1..k {
                st.theta[[i, col]] = v;
            }
        }
    }
    if spec.directed && spec.receiver == lsmplex::model::EffectType::Constant {
        for i in 0..n {
            let v = st.gamma[[i, 0]];
            for col in 1..k {
                st.gamma[[i, col]] = v;
            }
        }
    }
    st
}
