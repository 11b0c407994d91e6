//! Scalar distribution utilities used by the likelihood and the sampler:
//! stable logistic/softplus evaluation, normal CDF/quantile wrappers, exact
//! truncated-normal sampling and log-density, and inverse-gamma sampling.

use rand::Rng;
use rand_distr::Distribution;
use statrs::distribution::{ContinuousCDF, Normal};

use crate::{Error, Result};

const LN_2PI: f64 = 1.837877066409345483560659472811;

/// Standardized bound beyond which inverse-CDF sampling loses resolution and
/// the exponential-rejection tail sampler takes over.
const TAIL_SPLIT: f64 = 5.0;

/// logistic(x) = exp(x) / (1 + exp(x)), overflow-safe on both sides.
#[inline]
pub fn logistic(x: f64) -> f64 {
    if x >= 0.0 {
        1.0 / (1.0 + (-x).exp())
    } else {
        let e = x.exp();
        e / (1.0 + e)
    }
}

/// log(1 + exp(x)) with the stable branch for |x| > 35.
#[inline]
pub fn log1p_exp(x: f64) -> f64 {
    if x > 35.0 {
        // log(1+e^x) = x + log(1+e^-x) ≈ x + e^-x
        x + (-x).exp()
    } else if x < -35.0 {
        x.exp()
    } else {
        x.exp().ln_1p()
    }
}

#[inline]
fn std_normal() -> Normal {
    Normal::new(0.0, 1.0).expect("unit normal")
}

/// Standard normal CDF Φ(x).
#[inline]
pub fn norm_cdf(x: f64) -> f64 {
    std_normal().cdf(x)
}

/// Standard normal quantile Φ⁻¹(p).
#[inline]
pub fn norm_quantile(p: f64) -> f64 {
    std_normal().inverse_cdf(p)
}

/// Log of the standard normal density.
#[inline]
pub fn ln_norm_pdf_std(z: f64) -> f64 {
    -0.5 * (LN_2PI + z * z)
}

/// log Φ(−x) for x ≥ 0, accurate far beyond the f64 underflow of Φ(−x).
///
/// Uses the CDF directly while Φ(−x) has full relative precision and the
/// Laplace continued fraction Q(x) = φ(x)/(x + 1/(x + 2/(x + ...))) above.
pub fn ln_norm_sf(x: f64) -> f64 {
    debug_assert!(x >= 0.0);
    if x <= 8.0 {
        norm_cdf(-x).ln()
    } else {
        let mut t = 0.0;
        for k in (1..=60).rev() {
            t = k as f64 / (x + t);
        }
        ln_norm_pdf_std(x) - (x + t).ln()
    }
}

/// log(Φ(b) − Φ(a)) for standardized bounds a < b, stable when the interval
/// lies deep in either tail.
pub fn ln_norm_mass(a: f64, b: f64) -> f64 {
    debug_assert!(a < b);
    if a >= 0.0 {
        // Upper tail: Φ(b) − Φ(a) = Q(a) − Q(b).
        let ln_qa = ln_norm_sf(a);
        let ln_qb = if b.is_finite() {
            ln_norm_sf(b)
        } else {
            f64::NEG_INFINITY
        };
        ln_qa + ln_sub_exp(ln_qb - ln_qa)
    } else if b <= 0.0 {
        // Lower tail: mirror of the upper-tail case.
        let ln_qb = ln_norm_sf(-b);
        let ln_qa = if a.is_finite() {
            ln_norm_sf(-a)
        } else {
            f64::NEG_INFINITY
        };
        ln_qb + ln_sub_exp(ln_qa - ln_qb)
    } else {
        // Interval straddles zero; direct evaluation is well conditioned.
        let pa = if a.is_finite() { norm_cdf(a) } else { 0.0 };
        let pb = if b.is_finite() { norm_cdf(b) } else { 1.0 };
        (pb - pa).ln()
    }
}

/// log(1 − exp(d)) for d ≤ 0.
#[inline]
fn ln_sub_exp(d: f64) -> f64 {
    if d == f64::NEG_INFINITY {
        0.0
    } else {
        (-d.exp()).ln_1p()
    }
}

/// Draw from an inverse gamma with density ∝ x^(−shape−1) exp(−rate/x).
pub fn sample_inverse_gamma<R: Rng>(shape: f64, rate: f64, rng: &mut R) -> Result<f64> {
    if !(shape > 0.0) || !(rate > 0.0) {
        return Err(Error::invalid(format!(
            "inverse gamma requires positive shape and rate, got ({shape}, {rate})"
        )));
    }
    // 1/X ~ Gamma(shape, rate) when X ~ InvGamma(shape, rate).
    let gamma = rand_distr::Gamma::new(shape, 1.0 / rate)
        .map_err(|e| Error::invalid(format!("gamma parameters: {e}")))?;
    for _ in 0..1000 {
        let y = gamma.sample(rng);
        if y > 0.0 && y.is_finite() {
            return Ok(1.0 / y);
        }
    }
    Err(Error::numerical(
        "inverse gamma sampler produced no positive finite draw",
    ))
}

/// Draw from N(mean, var) restricted to [low, high]. Support is exact: the
/// returned value always lies in the interval. `low`/`high` may be infinite.
pub fn sample_truncated_normal<R: Rng>(
    mean: f64,
    var: f64,
    low: f64,
    high: f64,
    rng: &mut R,
) -> Result<f64> {
    if !(var > 0.0) || !var.is_finite() || !mean.is_finite() {
        return Err(Error::invalid(format!(
            "truncated normal requires finite mean and positive variance, got ({mean}, {var})"
        )));
    }
    if !(low < high) {
        return Err(Error::invalid(format!(
            "truncated normal requires low < high, got [{low}, {high}]"
        )));
    }
    let sd = var.sqrt();
    let a = (low - mean) / sd;
    let b = (high - mean) / sd;
    let z = sample_std_truncated(a, b, rng);
    Ok((mean + sd * z).clamp(low, high))
}

fn sample_std_truncated<R: Rng>(a: f64, b: f64, rng: &mut R) -> f64 {
    if a >= TAIL_SPLIT {
        sample_upper_tail(a, b, rng)
    } else if b <= -TAIL_SPLIT {
        -sample_upper_tail(-b, -a, rng)
    } else if a >= 0.0 {
        // Mirror so the inverse CDF works on the lower half, where f64
        // resolution of the CDF values is best.
        -sample_central(-b, -a, rng)
    } else {
        sample_central(a, b, rng)
    }
}

/// Inverse-CDF draw for an interval that is not deep in the upper tail.
fn sample_central<R: Rng>(a: f64, b: f64, rng: &mut R) -> f64 {
    let pa = if a.is_finite() { norm_cdf(a) } else { 0.0 };
    let pb = if b.is_finite() { norm_cdf(b) } else { 1.0 };
    let u: f64 = rng.gen();
    let p = (pa + u * (pb - pa)).clamp(f64::MIN_POSITIVE, 1.0 - 1e-16);
    norm_quantile(p).clamp(a, b)
}

/// Rejection sampler for [a, b] with a ≥ TAIL_SPLIT (Robert's exponential
/// proposal, plus a uniform proposal when the interval is very narrow).
fn sample_upper_tail<R: Rng>(a: f64, b: f64, rng: &mut R) -> f64 {
    let alpha = 0.5 * (a + (a * a + 4.0).sqrt());
    if b.is_finite() && (b - a) * alpha < 1.0 {
        // Narrow interval: uniform proposal, accept with exp((a²−x²)/2).
        for _ in 0..100_000 {
            let x = a + rng.gen::<f64>() * (b - a);
            let u: f64 = rng.gen();
            if u.ln() <= 0.5 * (a * a - x * x) {
                return x;
            }
        }
    } else {
        // Shifted exponential proposal with the optimal rate.
        for _ in 0..100_000 {
            let e: f64 = rng.gen();
            let x = a - e.ln() / alpha;
            if x > b {
                continue;
            }
            let u: f64 = rng.gen();
            if u.ln() <= -0.5 * (x - alpha) * (x - alpha) {
                return x;
            }
        }
    }
    // Unreachable in practice; both proposals have bounded rejection rates.
    if b.is_finite() {
        0.5 * (a + b)
    } else {
        a
    }
}

/// Log-density of N(mean, var) truncated to [low, high] at `x`.
///
/// Returns −∞ outside the support. The normalizing mass is computed on a log
/// scale so densities stay usable when the interval sits many standard
/// deviations from the mean.
pub fn truncnorm_ln_pdf(x: f64, mean: f64, var: f64, low: f64, high: f64) -> f64 {
    if x < low || x > high {
        return f64::NEG_INFINITY;
    }
    let sd = var.sqrt();
    let a = (low - mean) / sd;
    let b = (high - mean) / sd;
    let z = (x - mean) / sd;
    ln_norm_pdf_std(z) - sd.ln() - ln_norm_mass(a, b)
}

/// Log-density of the untruncated N(mean, var) at `x`.
#[inline]
pub fn norm_ln_pdf(x: f64, mean: f64, var: f64) -> f64 {
    let d = x - mean;
    -0.5 * (LN_2PI + var.ln() + d * d / var)
}
