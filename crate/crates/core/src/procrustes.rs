//! Procrustes machinery shared by the sampler's alignment guard and the
//! configuration-similarity metric.

use nalgebra::DMatrix;
use ndarray::Array2;

use crate::{Error, Result};

fn column_means(a: &Array2<f64>) -> Vec<f64> {
    let n = a.nrows() as f64;
    (0..a.ncols()).map(|c| a.column(c).sum() / n).collect()
}

fn centered(a: &Array2<f64>) -> Array2<f64> {
    let means = column_means(a);
    let mut out = a.clone();
    for mut row in out.rows_mut() {
        for (c, v) in row.iter_mut().enumerate() {
            *v -= means[c];
        }
    }
    out
}

/// Singular values of Aᵀ·B for two centered n×p configurations.
fn cross_singular_values(a: &Array2<f64>, b: &Array2<f64>) -> (Vec<f64>, DMatrix<f64>, DMatrix<f64>) {
    let p = a.ncols();
    let mut m = DMatrix::<f64>::zeros(p, p);
    for r in 0..p {
        for c in 0..p {
            let mut s = 0.0;
            for i in 0..a.nrows() {
                s += a[[i, r]] * b[[i, c]];
            }
            m[(r, c)] = s;
        }
    }
    let svd = m.svd(true, true);
    (
        svd.singular_values.iter().copied().collect(),
        svd.u.expect("svd u"),
        svd.v_t.expect("svd v_t"),
    )
}

/// Rigidly align `source` onto `target`: translation plus rotation/reflection
/// (no scaling). Pairwise distances of the result equal those of `source`.
pub fn align_rigid(source: &Array2<f64>, target: &Array2<f64>) -> Array2<f64> {
    debug_assert_eq!(source.dim(), target.dim());
    let (n, p) = source.dim();
    let sc = centered(source);
    let tc = centered(target);
    let t_means = column_means(target);
    let (_, u, v_t) = cross_singular_values(&sc, &tc);
    // rotation R = U Vᵀ minimizing |Sc·R − Tc|; reflections allowed
    let r = u * v_t;
    let mut out = Array2::zeros((n, p));
    for i in 0..n {
        for c in 0..p {
            let mut v = 0.0;
            for d in 0..p {
                v += sc[[i, d]] * r[(d, c)];
            }
            out[[i, c]] = v + t_means[c];
        }
    }
    out
}

/// Procrustes correlation between two configurations: √(1 − m²) where m² is
/// the standardized residual after optimal translation, rotation/reflection
/// and scaling. 1 for configurations equal up to such a similarity
/// transform; 0 for a degenerate (zero-spread) configuration.
pub fn procrustes_correlation(a: &Array2<f64>, b: &Array2<f64>) -> Result<f64> {
    if a.dim() != b.dim() {
        return Err(Error::invalid(format!(
            "configurations differ in shape: {:?} vs {:?}",
            a.dim(),
            b.dim()
        )));
    }
    if a.nrows() < a.ncols() {
        return Err(Error::invalid("need at least as many points as dimensions"));
    }
    let ac = centered(a);
    let bc = centered(b);
    let ss_a: f64 = ac.iter().map(|v| v * v).sum();
    let ss_b: f64 = bc.iter().map(|v| v * v).sum();
    if ss_a <= 0.0 || ss_b <= 0.0 {
        return Ok(0.0);
    }
    let (sv, _, _) = cross_singular_values(&ac, &bc);
    let trace: f64 = sv.iter().sum();
    Ok((trace / (ss_a * ss_b).sqrt()).clamp(0.0, 1.0))
}
