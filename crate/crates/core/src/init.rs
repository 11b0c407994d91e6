//! Identifiability constraints and chain initialization: average geodesic
//! distances, classical multidimensional scaling, per-view logistic
//! regression starts, and reference view/node selection.

use std::collections::VecDeque;

use nalgebra::DMatrix;
use ndarray::Array2;
use serde::{Deserialize, Serialize};

use crate::model::{Hyperparameters, ModelSpec, ParameterState};
use crate::multiplex::{degrees, Multiplex};
use crate::{Error, Result};

/// Which node(s) carry the pinned effect value 1 for one side.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub enum EffectPin {
    /// Effect absent; nothing pinned.
    None,
    /// Constant effect: one node pinned across all views.
    Constant(usize),
    /// Variable effect: one pinned node per view.
    PerView(Vec<usize>),
}

impl EffectPin {
    pub fn is_pinned(&self, node: usize, view: usize) -> bool {
        match self {
            EffectPin::None => false,
            EffectPin::Constant(i) => *i == node,
            EffectPin::PerView(v) => v[view] == node,
        }
    }
}

/// The reference view plus the pinned sender/receiver nodes. Undirected
/// multiplexes carry the shared-effect pin in `sender` and mirror it in
/// `receiver`.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct ReferenceAssignment {
    pub view: usize,
    pub sender: EffectPin,
    pub receiver: EffectPin,
}

impl ReferenceAssignment {
    pub fn sender_pinned(&self, node: usize, view: usize) -> bool {
        self.sender.is_pinned(node, view)
    }

    pub fn receiver_pinned(&self, node: usize, view: usize) -> bool {
        self.receiver.is_pinned(node, view)
    }
}

/// Summary of the initialization pipeline, serializable for inspection.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct InitReport {
    pub z0: Array2<f64>,
    pub alpha0: Vec<f64>,
    pub beta0: Vec<f64>,
    pub reference_view: usize,
    pub reference_sender: EffectPin,
    pub reference_receiver: EffectPin,
    pub disconnected_pairs: usize,
    pub irls_converged: Vec<bool>,
}

/// Average geodesic distance matrix across views.
pub fn geodesic_average(m: &Multiplex) -> Array2<f64> {
    geodesic_average_counting(m).0
}

/// As [`geodesic_average`], also returning the number of (view, pair)
/// combinations whose geodesic was imputed because the pair is disconnected.
///
/// Each view is symmetrized (an observed arc in either direction counts as
/// adjacency) before running breadth-first searches. Unreachable pairs are
/// imputed at (max finite geodesic in that view) + 1, keeping disconnected
/// nodes peripheral without destroying the overall scale.
pub fn geodesic_average_counting(m: &Multiplex) -> (Array2<f64>, usize) {
    let n = m.n_nodes();
    let k = m.n_views();
    let mut avg = Array2::zeros((n, n));
    let mut imputed = 0usize;
    for v in 0..k {
        let y = m.adjacency(v);
        let h = m.mask(v);
        let mut adj = vec![Vec::new(); n];
        for i in 0..n {
            for j in (i + 1)..n {
                let fwd = y[[i, j]] == 1 && h[[i, j]] == 1;
                let bwd = y[[j, i]] == 1 && h[[j, i]] == 1;
                if fwd || bwd {
                    adj[i].push(j);
                    adj[j].push(i);
                }
            }
        }
        let mut dist = vec![vec![usize::MAX; n]; n];
        for (start, row) in dist.iter_mut().enumerate() {
            row[start] = 0;
            let mut queue = VecDeque::from([start]);
            while let Some(u) = queue.pop_front() {
                for &w in &adj[u] {
                    if row[w] == usize::MAX {
                        row[w] = row[u] + 1;
                        queue.push_back(w);
                    }
                }
            }
        }
        let max_finite = dist
            .iter()
            .flatten()
            .filter(|&&d| d != usize::MAX)
            .max()
            .copied()
            .unwrap_or(0);
        let fill = (max_finite + 1) as f64;
        for i in 0..n {
            for j in (i + 1)..n {
                let d = if dist[i][j] == usize::MAX {
                    imputed += 1;
                    fill
                } else {
                    dist[i][j] as f64
                };
                avg[[i, j]] += d;
                avg[[j, i]] += d;
            }
        }
    }
    avg.mapv_inplace(|d| d / k as f64);
    (avg, imputed)
}

/// Classical (Torgerson) multidimensional scaling of a distance matrix.
///
/// Double-centers B = −½ J D² J and returns the top-p eigenvectors scaled by
/// √max(eigenvalue, 0). Deterministic sign convention: the first loading of
/// each axis with magnitude above 1e-12 is made positive.
pub fn classical_mds(d: &Array2<f64>, p: usize) -> Result<Array2<f64>> {
    let n = d.nrows();
    if d.ncols() != n {
        return Err(Error::invalid("distance matrix must be square"));
    }
    if p > n.saturating_sub(1) {
        return Err(Error::invalid(format!(
            "embedding dimension {p} exceeds n-1 = {}",
            n - 1
        )));
    }
    // b_ij = −½ (d²_ij − rowmean_i − rowmean_j + grand mean)
    let d2 = d.mapv(|v| v * v);
    let row_means: Vec<f64> = (0..n).map(|i| d2.row(i).sum() / n as f64).collect();
    let grand = row_means.iter().sum::<f64>() / n as f64;
    let mut b = DMatrix::<f64>::zeros(n, n);
    for i in 0..n {
        for j in 0..n {
            b[(i, j)] = -0.5 * (d2[[i, j]] - row_means[i] - row_means[j] + grand);
        }
    }
    let eig = b.symmetric_eigen();
    let mut order: Vec<usize> = (0..n).collect();
    order.sort_by(|&a, &bb| {
        eig.eigenvalues[bb]
            .partial_cmp(&eig.eigenvalues[a])
            .unwrap()
            .then(a.cmp(&bb))
    });
    let mut coords = Array2::zeros((n, p));
    for (axis, &idx) in order.iter().take(p).enumerate() {
        let scale = eig.eigenvalues[idx].max(0.0).sqrt();
        let col = eig.eigenvectors.column(idx);
        let flip = col
            .iter()
            .find(|v| v.abs() > 1e-12)
            .map_or(1.0, |v| if *v < 0.0 { -1.0 } else { 1.0 });
        for i in 0..n {
            coords[[i, axis]] = flip * col[i] * scale;
        }
    }
    Ok(coords)
}

/// Intercept/slope logistic regression of binary responses on distances,
/// logit p = a − b·d, fitted by iteratively reweighted least squares with a
/// small ridge on the normal equations. Returns (a, b) unclamped.
///
/// Separation cannot diverge: the iteration caps at 25 rounds or a relative
/// deviance change below 1e-8.
pub fn fit_logistic_distance(pairs: &[(f64, u8)]) -> (f64, f64, bool) {
    const RIDGE: f64 = 1e-6;
    const MAX_ITER: usize = 25;
    let mut a = 0.0;
    let mut b = 0.0;
    if pairs.is_empty() {
        return (a, b, true);
    }
    let mut last_dev = f64::INFINITY;
    let mut converged = false;
    for _ in 0..MAX_ITER {
        // Weighted least squares on design (1, −d).
        let mut s_ww = RIDGE;
        let mut s_wx = 0.0;
        let mut s_xx = RIDGE;
        let mut g1 = 0.0;
        let mut g2 = 0.0;
        let mut dev = 0.0;
        for &(d, y) in pairs {
            let eta = a - b * d;
            let p = crate::stats::logistic(eta).clamp(1e-10, 1.0 - 1e-10);
            let w = p * (1.0 - p);
            let x2 = -d;
            s_ww += w;
            s_wx += w * x2;
            s_xx += w * x2 * x2;
            let r = f64::from(y) - p;
            g1 += r;
            g2 += r * x2;
            dev -= 2.0 * (f64::from(y) * p.ln() + (1.0 - f64::from(y)) * (1.0 - p).ln());
        }
        // Newton step: solve [s_ww s_wx; s_wx s_xx] δ = (g1, g2).
        let det = s_ww * s_xx - s_wx * s_wx;
        if det.abs() < 1e-300 {
            break;
        }
        let da = (g1 * s_xx - g2 * s_wx) / det;
        let db2 = (g2 * s_ww - g1 * s_wx) / det;
        a += da;
        b += db2; // coefficient on x₂ = −d is b itself
        if (dev - last_dev).abs() < 1e-8 * (last_dev.abs() + 1e-10) {
            converged = true;
            break;
        }
        last_dev = dev;
    }
    (a, b, converged)
}

/// Per-view logistic starts for (α, β) from the MDS coordinates: regress
/// observed entries on squared distances, then clamp both to [0, ∞).
pub fn logistic_init(m: &Multiplex, z0: &Array2<f64>) -> (Vec<f64>, Vec<f64>, Vec<bool>) {
    let n = m.n_nodes();
    let mut alpha0 = Vec::with_capacity(m.n_views());
    let mut beta0 = Vec::with_capacity(m.n_views());
    let mut flags = Vec::with_capacity(m.n_views());
    let p = z0.ncols();
    let sqd = |i: usize, j: usize| -> f64 {
        (0..p).map(|c| (z0[[i, c]] - z0[[j, c]]).powi(2)).sum()
    };
    for k in 0..m.n_views() {
        let mut pairs = Vec::with_capacity(n * n);
        for (i, j) in m.dyads() {
            if m.observed(k, i, j) {
                pairs.push((sqd(i, j), m.edge(k, i, j)));
            }
        }
        let (a, b, ok) = fit_logistic_distance(&pairs);
        alpha0.push(a.max(0.0));
        beta0.push(b.max(0.0));
        flags.push(ok);
    }
    (alpha0, beta0, flags)
}

/// Pick the reference view and pinned nodes. The reference view is view 1
/// with (α, β) fixed at the reference values. For a Variable effect the
/// per-view highest out-degree (in-degree) node is pinned at 1; for a
/// Constant effect the highest mean degree node is. Ties break toward the
/// lowest node index. Undirected multiplexes pin the shared effect by
/// degree.
pub fn select_references(m: &Multiplex, spec: &ModelSpec) -> ReferenceAssignment {
    let (s, r) = degrees(m);
    let pin_for = |mat: &Array2<f64>, effect: crate::model::EffectType| -> EffectPin {
        match effect {
            crate::model::EffectType::Null => EffectPin::None,
            crate::model::EffectType::Constant => {
                let means: Vec<f64> = (0..m.n_nodes())
                    .map(|i| mat.row(i).sum() / m.n_views() as f64)
                    .collect();
                EffectPin::Constant(argmax_first(&means))
            }
            crate::model::EffectType::Variable => EffectPin::PerView(
                (0..m.n_views())
                    .map(|k| argmax_first(&mat.column(k).to_vec()))
                    .collect(),
            ),
        }
    };
    let sender = pin_for(&s, spec.sender);
    let receiver = if spec.directed {
        pin_for(&r, spec.receiver)
    } else {
        sender.clone()
    };
    ReferenceAssignment {
        view: 0,
        sender,
        receiver,
    }
}

fn argmax_first(values: &[f64]) -> usize {
    let mut best = 0;
    for (i, &v) in values.iter().enumerate() {
        if v > values[best] {
            best = i;
        }
    }
    let _ = values;
    best
}

/// Full initialization pipeline: coordinates from MDS on average geodesics,
/// (α, β) starts from logistic regressions (reference view overridden with
/// the fixed reference values), effects at 0 except the pinned nodes at 1.
pub fn initial_state(
    m: &Multiplex,
    spec: &ModelSpec,
    hyper: &Hyperparameters,
) -> Result<(ParameterState, ReferenceAssignment, InitReport)> {
    spec.validate()?;
    hyper.validate()?;
    if spec.f != m.n_covariates() {
        return Err(Error::invalid(format!(
            "spec declares {} covariates but the multiplex carries {}",
            spec.f,
            m.n_covariates()
        )));
    }
    if spec.directed != m.directed() {
        return Err(Error::invalid(
            "spec directedness does not match the multiplex",
        ));
    }
    let (geo, disconnected) = geodesic_average_counting(m);
    let z0 = classical_mds(&geo, spec.p)?;
    let (alpha0, beta0, irls_flags) = logistic_init(m, &z0);
    let pins = select_references(m, spec);

    let n = m.n_nodes();
    let k = m.n_views();
    let mut state = ParameterState::zeros(n, k, spec, hyper);
    state.z = z0.clone();
    state.alpha = alpha0.clone();
    state.beta = beta0.clone();
    state.alpha[pins.view] = hyper.reference_alpha;
    state.beta[pins.view] = hyper.reference_beta;
    if spec.sender_active() {
        for view in 0..k {
            for node in 0..n {
                state.theta[[node, view]] =
                    if pins.sender_pinned(node, view) { 1.0 } else { 0.0 };
            }
        }
    }
    if spec.directed && spec.receiver_active() {
        for view in 0..k {
            for node in 0..n {
                state.gamma[[node, view]] =
                    if pins.receiver_pinned(node, view) { 1.0 } else { 0.0 };
            }
        }
    }

    let report = InitReport {
        z0,
        alpha0,
        beta0,
        reference_view: pins.view,
        reference_sender: pins.sender.clone(),
        reference_receiver: pins.receiver.clone(),
        disconnected_pairs: disconnected,
        irls_converged: irls_flags,
    };
    Ok((state, pins, report))
}
