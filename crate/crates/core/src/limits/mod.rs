//! Conditional layer statistics, normalization for the normal and stable
//! regimes, variance estimation and distributional diagnostics.

mod stats;
mod variance;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::layer_model::{LawError, LayerTypeLaw};
use crate::motif::{density_functionals, Motif, MotifError};
use crate::special::{binomial, falling_factorial, factorial};
use crate::Real;

pub use stats::{
    default_hill_k, hill_estimator, ks_one_sample_normal, ks_two_sample, qq_points_normal, qq_points_two_sample,
    sample_positive_stable, tail_diagnostics, TailDiagnostics,
};
pub use variance::{overlap_profile, sigma_f_squared, sigma_f_squared_truncated, VarianceEstimate, VarianceMethod};

#[derive(Debug, Error, Clone, PartialEq)]
pub enum LimitsError {
    #[error("normalization scale must be positive and finite")]
    ZeroScale,
    #[error("alpha = {0} outside (0, 2)")]
    AlphaOutOfRange(f64),
    #[error("alpha = 1 is not supported")]
    AlphaOneUnsupported,
    #[error("need at least {needed} positive samples, got {got}")]
    InsufficientSamples { needed: usize, got: usize },
    #[error("upper order statistics are all equal")]
    DegenerateSample,
    #[error("empty sample")]
    EmptySample,
    #[error("variance of the layer count is infinite")]
    InfiniteVariance,
    #[error("variance method budget exceeded: {0}")]
    MethodBudgetExceeded(String),
    #[error(transparent)]
    Law(#[from] LawError),
    #[error(transparent)]
    Motif(#[from] MotifError),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Regime {
    Normal,
    Stable,
    None,
}

/// `N_F* = a_F C(x, v_F) q^{e_F}`, the expected copy count of a layer of type `(x, q)`.
pub fn n_f_star<T: Real>(motif: &Motif, x: u64, q: T) -> T {
    let v = motif.vertex_count() as u64;
    if x < v {
        return T::zero();
    }
    T::of(motif.copies_in_complete() as f64 * binomial(x, v)) * q.powi(motif.edge_count() as i32)
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ConditionalStats<T> {
    pub n_f_star: T,
    /// `x^{v_F} q^{e_F}`.
    pub psi: T,
    /// Minimum of `x^{v_H} q^{e_H}` over subgraphs with an edge.
    pub phi: T,
}

pub fn conditional_stats<T: Real>(motif: &Motif, x: u64, q: T) -> ConditionalStats<T> {
    let d = density_functionals(motif, T::of(x as f64), q);
    ConditionalStats { n_f_star: n_f_star(motif, x, q), psi: d.psi, phi: d.phi }
}

/// `E N_F*` for layers on `min(X, n)` vertices (no truncation when `n` is `None`).
pub fn mean_n_f_star(motif: &Motif, law: &LayerTypeLaw, n: Option<u64>) -> Result<f64, LawError> {
    let v = motif.vertex_count() as u64;
    let e = motif.edge_count() as f64;
    let falling = match n {
        Some(n) => law.truncated_falling_moment(n, v, e)?,
        None => law.falling_moment(v, e)?,
    };
    Ok(motif.copies_in_complete() as f64 * falling / factorial(v) as f64)
}

/// Expected number of polychromatic colored copies, `C(n, v_F) a_F h_F`.
pub fn expected_polychromatic(motif: &Motif, n: u64, h_f: f64) -> f64 {
    let v = motif.vertex_count() as u64;
    falling_factorial(n, v) / factorial(v) as f64 * motif.copies_in_complete() as f64 * h_f
}

/// Centering and scaling of the flat copy count.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Normalization<T> {
    pub regime: Regime,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub alpha: Option<T>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub sigma_f: Option<T>,
    pub b_m: T,
    pub scale: T,
}

impl<T: Real> Normalization<T> {
    /// Scale `sigma_f sqrt(m)`, centering `m E N_F*`.
    pub fn normal(sigma_f: T, m: u64, mean_n_f_star: T) -> Result<Self, LimitsError> {
        let mt = T::of(m as f64);
        let scale = sigma_f * mt.sqrt();
        if !(scale > T::zero() && scale.is_finite()) {
            return Err(LimitsError::ZeroScale);
        }
        Ok(Normalization { regime: Regime::Normal, alpha: None, sigma_f: Some(sigma_f), b_m: mt * mean_n_f_star, scale })
    }

    /// Scale `m^{1/alpha}`; centering `m E N_F*` for `alpha > 1` and zero below.
    pub fn stable(alpha: T, m: u64, mean_n_f_star: T) -> Result<Self, LimitsError> {
        check_alpha(alpha.as_f64())?;
        let mt = T::of(m as f64);
        let b_m = if alpha > T::one() { mt * mean_n_f_star } else { T::zero() };
        Ok(Normalization { regime: Regime::Stable, alpha: Some(alpha), sigma_f: None, b_m, scale: mt.powf(alpha.recip()) })
    }
}

pub(crate) fn check_alpha(alpha: f64) -> Result<(), LimitsError> {
    if alpha == 1.0 {
        Err(LimitsError::AlphaOneUnsupported)
    } else if !(alpha > 0.0 && alpha < 2.0) {
        Err(LimitsError::AlphaOutOfRange(alpha))
    } else {
        Ok(())
    }
}

/// `(c - b_m) / scale` elementwise.
pub fn normalize<T: Real>(counts: &[T], norm: &Normalization<T>) -> Result<Vec<T>, LimitsError> {
    if !(norm.scale > T::zero() && norm.scale.is_finite()) {
        return Err(LimitsError::ZeroScale);
    }
    Ok(counts.iter().map(|&c| (c - norm.b_m) / norm.scale).collect())
}
