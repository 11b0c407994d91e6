//! Heuristic model selection: summarize a multiplex by its degree
//! correlations, train a linear discriminant classifier on multiplexes
//! simulated from each of the nine model types at the observed (n, K), and
//! predict which type generated the data.

use std::fmt;
use std::path::{Path, PathBuf};

use nalgebra::DMatrix;
use rand::seq::SliceRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::metrics::pearson;
use crate::model::ModelSpec;
use crate::multiplex::{degrees, Multiplex};
use crate::simulate::{simulate_from_config, TruthConfig};
use crate::{Error, Result};

const FEATURES: usize = 8;
const CACHE_FORMAT_VERSION: u32 = 1;

/// The nine directed model types, in the fixed order used for tie-breaking.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Serialize, Deserialize)]
pub enum ModelType {
    NN,
    CN,
    NC,
    CC,
    VN,
    NV,
    VC,
    CV,
    VV,
}

impl ModelType {
    pub const ALL: [ModelType; 9] = [
        ModelType::NN,
        ModelType::CN,
        ModelType::NC,
        ModelType::CC,
        ModelType::VN,
        ModelType::NV,
        ModelType::VC,
        ModelType::CV,
        ModelType::VV,
    ];

    pub fn code(self) -> &'static str {
        match self {
            ModelType::NN => "NN",
            ModelType::CN => "CN",
            ModelType::NC => "NC",
            ModelType::CC => "CC",
            ModelType::VN => "VN",
            ModelType::NV => "NV",
            ModelType::VC => "VC",
            ModelType::CV => "CV",
            ModelType::VV => "VV",
        }
    }

    pub fn parse(code: &str) -> Result<Self> {
        ModelType::ALL
            .iter()
            .copied()
            .find(|m| m.code() == code)
            .ok_or_else(|| Error::invalid(format!("unknown model type '{code}'")))
    }

    /// Directed model spec for this type.
    pub fn spec(self, p: usize) -> ModelSpec {
        ModelSpec::parse(self.code(), true, p, 0).expect("taxonomy codes are valid")
    }

    /// True if either effect is view-specific.
    pub fn has_variable_effect(self) -> bool {
        self.code().contains('V')
    }
}

impl fmt::Display for ModelType {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.code())
    }
}

/// The eight degree-correlation summary statistics: means and standard
/// deviations of the between-view (K×K) and between-node (n×n) correlation
/// matrices of the out-degree matrix S and the in-degree matrix R.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SummaryStats {
    pub mean_cs_k: f64,
    pub mean_cr_k: f64,
    pub mean_cs_i: f64,
    pub mean_cr_i: f64,
    pub sd_cs_k: f64,
    pub sd_cr_k: f64,
    pub sd_cs_i: f64,
    pub sd_cr_i: f64,
}

impl SummaryStats {
    pub fn to_array(self) -> [f64; FEATURES] {
        [
            self.mean_cs_k,
            self.mean_cr_k,
            self.mean_cs_i,
            self.mean_cr_i,
            self.sd_cs_k,
            self.sd_cr_k,
            self.sd_cs_i,
            self.sd_cr_i,
        ]
    }
}

/// Mean and population sd over the off-diagonal cells of a symmetric
/// correlation structure, visiting each unordered pair once.
fn offdiag_mean_sd(values: &[f64]) -> (f64, f64) {
    let n = values.len() as f64;
    let mean = values.iter().sum::<f64>() / n;
    let var = values.iter().map(|v| (v - mean) * (v - mean)).sum::<f64>() / n;
    (mean, var.sqrt())
}

/// Correlations between the columns (K×K, pooled over nodes) and between the
/// rows (n×n, pooled over views) of a degree matrix, summarized by mean/sd
/// over the off-diagonal cells.
fn degree_correlation_summary(mat: &ndarray::Array2<f64>) -> (f64, f64, f64, f64) {
    let (n, k) = mat.dim();
    let mut between_views = Vec::with_capacity(k * (k - 1) / 2);
    for a in 0..k {
        for b in (a + 1)..k {
            between_views.push(pearson(
                &mat.column(a).to_vec(),
                &mat.column(b).to_vec(),
            ));
        }
    }
    let mut between_nodes = Vec::with_capacity(n * (n - 1) / 2);
    for a in 0..n {
        for b in (a + 1)..n {
            between_nodes.push(pearson(&mat.row(a).to_vec(), &mat.row(b).to_vec()));
        }
    }
    let (mk, sk) = offdiag_mean_sd(&between_views);
    let (mi, si) = offdiag_mean_sd(&between_nodes);
    (mk, sk, mi, si)
}

/// Degree-correlation summary statistics of a multiplex. Needs n ≥ 3 and
/// K ≥ 2 (row correlations are over K-dimensional vectors).
pub fn summary_statistics(m: &Multiplex) -> Result<SummaryStats> {
    if m.n_nodes() < 3 || m.n_views() < 2 {
        return Err(Error::invalid(
            "summary statistics need at least 3 nodes and 2 views",
        ));
    }
    let (s, r) = degrees(m);
    let (mean_cs_k, sd_cs_k, mean_cs_i, sd_cs_i) = degree_correlation_summary(&s);
    let (mean_cr_k, sd_cr_k, mean_cr_i, sd_cr_i) = degree_correlation_summary(&r);
    Ok(SummaryStats {
        mean_cs_k,
        mean_cr_k,
        mean_cs_i,
        mean_cr_i,
        sd_cs_k,
        sd_cr_k,
        sd_cs_i,
        sd_cr_i,
    })
}

/// Gaussian classifier with one shared (pooled, regularized) covariance:
/// class means in the 8-dimensional feature space plus class priors.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct LdaModel {
    pub labels: Vec<ModelType>,
    pub means: Vec<[f64; FEATURES]>,
    pub covariance: Vec<Vec<f64>>,
    pub priors: Vec<f64>,
}

/// Default ridge added to the pooled covariance.
pub fn default_regularization(trace: f64) -> f64 {
    1e-6 * trace / FEATURES as f64
}

/// Fit the classifier: per-class feature means, pooled within-class
/// covariance plus `reg`·I, priors from class frequencies. Deterministic.
pub fn lda_train(examples: &[(SummaryStats, ModelType)], reg: Option<f64>) -> Result<LdaModel> {
    let mut labels: Vec<ModelType> = ModelType::ALL
        .iter()
        .copied()
        .filter(|l| examples.iter().any(|(_, e)| e == l))
        .collect();
    if labels.len() < 2 {
        return Err(Error::invalid("LDA needs at least two classes"));
    }
    labels.sort();
    let counts: Vec<usize> = labels
        .iter()
        .map(|l| examples.iter().filter(|(_, e)| e == l).count())
        .collect();
    if counts.iter().any(|&c| c < 2) {
        return Err(Error::invalid("LDA needs at least two examples per class"));
    }
    let total: usize = counts.iter().sum();
    let mut means = vec![[0.0; FEATURES]; labels.len()];
    for (stats, label) in examples {
        let c = labels.iter().position(|l| l == label).unwrap();
        for (m, v) in means[c].iter_mut().zip(stats.to_array()) {
            *m += v / counts[c] as f64;
        }
    }
    let mut cov = vec![vec![0.0; FEATURES]; FEATURES];
    for (stats, label) in examples {
        let c = labels.iter().position(|l| l == label).unwrap();
        let x = stats.to_array();
        for a in 0..FEATURES {
            for b in 0..FEATURES {
                cov[a][b] += (x[a] - means[c][a]) * (x[b] - means[c][b]);
            }
        }
    }
    let denom = (total - labels.len()) as f64;
    let trace: f64 = (0..FEATURES).map(|a| cov[a][a] / denom).sum();
    let ridge = reg.unwrap_or_else(|| default_regularization(trace));
    for a in 0..FEATURES {
        for b in 0..FEATURES {
            cov[a][b] /= denom;
        }
        cov[a][a] += ridge;
    }
    let model = LdaModel {
        labels: labels.clone(),
        means,
        covariance: cov,
        priors: counts
            .iter()
            .map(|&c| c as f64 / total as f64)
            .collect(),
    };
    // Fail now rather than at prediction time if the covariance is singular.
    model.cholesky()?;
    Ok(model)
}

impl LdaModel {
    fn cholesky(&self) -> Result<nalgebra::Cholesky<f64, nalgebra::Dyn>> {
        let m = DMatrix::from_fn(FEATURES, FEATURES, |a, b| self.covariance[a][b]);
        nalgebra::Cholesky::new(m).ok_or_else(|| {
            Error::numerical(
                "pooled covariance is singular after regularization; increase reg",
            )
        })
    }
}

/// Class posteriors under the shared-covariance Gaussian model. Returns the
/// argmax label (ties broken by the fixed taxonomy order) and one
/// probability per class in the model's label order.
pub fn lda_predict(model: &LdaModel, s: &SummaryStats) -> Result<(ModelType, Vec<f64>)> {
    let chol = model.cholesky()?;
    let x = s.to_array();
    let mut scores = Vec::with_capacity(model.labels.len());
    for (c, mean) in model.means.iter().enumerate() {
        let d = nalgebra::DVector::from_fn(FEATURES, |r, _| x[r] - mean[r]);
        let solved = chol.solve(&d);
        let maha = d.dot(&solved);
        scores.push(model.priors[c].ln() - 0.5 * maha);
    }
    let max = scores.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    let mut probs: Vec<f64> = scores.iter().map(|s| (s - max).exp()).collect();
    let z: f64 = probs.iter().sum();
    for p in probs.iter_mut() {
        *p /= z;
    }
    let mut best = 0;
    for (i, &p) in probs.iter().enumerate() {
        if p > probs[best] {
            best = i;
        }
    }
    Ok((model.labels[best], probs))
}

/// Result of the heuristic selection procedure.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct SelectionReport {
    pub label: ModelType,
    /// (model, posterior probability), sorted by probability descending with
    /// the taxonomy order breaking ties.
    pub ranked: Vec<(ModelType, f64)>,
    pub cv_error: f64,
    pub n: usize,
    pub k: usize,
    pub t: usize,
    pub seed: u64,
    pub cache_hit: bool,
    pub model: LdaModel,
}

#[derive(Serialize, Deserialize)]
struct CachedClassifier {
    format_version: u32,
    n: usize,
    k: usize,
    t: usize,
    seed: u64,
    cv_error: f64,
    model: LdaModel,
}

fn cache_path(dir: &Path, n: usize, k: usize, t: usize, seed: u64) -> PathBuf {
    dir.join(format!("lda-n{n}-k{k}-t{t}-seed{seed}.json"))
}

/// Simulate the training pool: `t` multiplexes per model type at (n, K),
/// with per-task RNG streams so the pool is reproducible regardless of the
/// parallel schedule.
pub fn simulate_training_pool(
    n: usize,
    k: usize,
    t: usize,
    seed: u64,
) -> Result<Vec<(SummaryStats, ModelType)>> {
    let tasks: Vec<(usize, usize)> = (0..ModelType::ALL.len())
        .flat_map(|m| (0..t).map(move |r| (m, r)))
        .collect();
    let features: Result<Vec<(SummaryStats, ModelType)>> = tasks
        .par_iter()
        .map(|&(mi, rep)| {
            let label = ModelType::ALL[mi];
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            rng.set_stream((mi * t + rep) as u64 + 1);
            let cfg = TruthConfig::new(n, k, label.spec(2));
            let (_, m) = simulate_from_config(&cfg, &mut rng)?;
            Ok((summary_statistics(&m)?, label))
        })
        .collect();
    features
}

/// 10-fold cross-validation error of the classifier on a labelled pool.
pub fn cross_validation_error(
    pool: &[(SummaryStats, ModelType)],
    reg: Option<f64>,
    seed: u64,
) -> Result<f64> {
    let folds = 10usize;
    let mut order: Vec<usize> = (0..pool.len()).collect();
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(u64::MAX);
    order.shuffle(&mut rng);
    let mut errors = 0usize;
    let mut total = 0usize;
    for fold in 0..folds {
        let test: Vec<usize> = order
            .iter()
            .copied()
            .enumerate()
            .filter(|(pos, _)| pos % folds == fold)
            .map(|(_, idx)| idx)
            .collect();
        let train: Vec<(SummaryStats, ModelType)> = order
            .iter()
            .copied()
            .enumerate()
            .filter(|(pos, _)| pos % folds != fold)
            .map(|(_, idx)| pool[idx])
            .collect();
        let model = lda_train(&train, reg)?;
        for idx in test {
            let (pred, _) = lda_predict(&model, &pool[idx].0)?;
            total += 1;
            if pred != pool[idx].1 {
                errors += 1;
            }
        }
    }
    Ok(errors as f64 / total as f64)
}

/// Full heuristic: simulate `t` multiplexes per model type at the observed
/// dimensions, train the classifier (or load it from the cache), and rank
/// the nine models for the observed multiplex.
pub fn heuristic_select(
    m: &Multiplex,
    t: usize,
    seed: u64,
    cache_dir: Option<&Path>,
) -> Result<SelectionReport> {
    if !m.directed() {
        return Err(Error::invalid(
            "heuristic selection covers the nine directed model types; undirected multiplexes are not supported",
        ));
    }
    if t < 9 {
        return Err(Error::invalid("insufficient training replicates (need T ≥ 9)"));
    }
    let n = m.n_nodes();
    let k = m.n_views();
    if n < 3 || k < 2 {
        return Err(Error::invalid(
            "heuristic selection needs at least 3 nodes and 2 views",
        ));
    }

    let mut cache_hit = false;
    let cached: Option<CachedClassifier> = cache_dir.and_then(|dir| {
        let path = cache_path(dir, n, k, t, seed);
        std::fs::read_to_string(path)
            .ok()
            .and_then(|text| serde_json::from_str::<CachedClassifier>(&text).ok())
            .filter(|c| {
                c.format_version == CACHE_FORMAT_VERSION
                    && c.n == n
                    && c.k == k
                    && c.t == t
                    && c.seed == seed
            })
    });

    let (model, cv_error) = match cached {
        Some(c) => {
            cache_hit = true;
            (c.model, c.cv_error)
        }
        None => {
            let pool = simulate_training_pool(n, k, t, seed)?;
            let model = lda_train(&pool, None)?;
            let cv_error = cross_validation_error(&pool, None, seed)?;
            if let Some(dir) = cache_dir {
                std::fs::create_dir_all(dir)?;
                let payload = CachedClassifier {
                    format_version: CACHE_FORMAT_VERSION,
                    n,
                    k,
                    t,
                    seed,
                    cv_error,
                    model: model.clone(),
                };
                std::fs::write(
                    cache_path(dir, n, k, t, seed),
                    serde_json::to_string_pretty(&payload)?,
                )?;
            }
            (model, cv_error)
        }
    };

    let stats = summary_statistics(m)?;
    let (label, probs) = lda_predict(&model, &stats)?;
    let mut ranked: Vec<(ModelType, f64)> = model
        .labels
        .iter()
        .copied()
        .zip(probs)
        .collect();
    ranked.sort_by(|a, b| b.1.partial_cmp(&a.1).unwrap().then(a.0.cmp(&b.0)));
    Ok(SelectionReport {
        label,
        ranked,
        cv_error,
        n,
        k,
        t,
        seed,
        cache_hit,
        model,
    })
}
