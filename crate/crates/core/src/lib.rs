//! Superpositions of Bernoulli random graphs.
//!
//! A superposition `G[n,m]` is the union of `m` independent layers. Layer `i`
//! draws a type `(X_i, Q_i)`, picks `min(X_i, n)` vertices of `[n]` uniformly
//! at random and connects each pair inside that set with probability `Q_i`.
//! This crate samples such graphs, counts copies of small 2-connected motifs
//! (cliques, cycles and general patterns), evaluates the overlap quantities
//! that control the normal and alpha-stable limits of those counts, and runs
//! reproducible replicate campaigns with distributional diagnostics.
//!
//! Statistical routines are generic over the floating-point type through
//! [`Real`]; the `*64` aliases below pin the common `f64` instantiations.

pub mod combinatorics;
pub mod fmt;
pub mod graph_core;
pub mod harness;
pub mod layer_model;
pub mod limits;
pub mod motif;
pub mod special;

use std::fmt::Debug;

use num_traits::{Float, FromPrimitive, ToPrimitive};

/// Floating-point scalar used by the statistical routines: `f32` or `f64`.
pub trait Real: Float + FromPrimitive + ToPrimitive + Debug + Send + Sync + 'static {
    /// Lossy conversion from `f64`; panics only for non-representable input,
    /// which cannot occur for `f32`/`f64`.
    fn of(x: f64) -> Self {
        Self::from_f64(x).expect("f64 is representable")
    }

    fn as_f64(self) -> f64 {
        self.to_f64().expect("real is representable as f64")
    }
}

impl Real for f32 {}
impl Real for f64 {}

pub use combinatorics::{b_star, BStar, PartitionSkeleton};
pub use graph_core::{ColoredMultigraph, LayerRealization, SimpleGraph};
pub use harness::{CampaignConfig, CampaignResult, ReplicateRecord};
pub use layer_model::{ConditionReport, LayerTypeLaw, MomentSpec, QLaw, XLaw};
pub use motif::{CountReport, Motif};

pub type DensityFunctionals64 = motif::DensityFunctionals<f64>;
pub type DensityFunctionals32 = motif::DensityFunctionals<f32>;
pub type Normalization64 = limits::Normalization<f64>;
pub type Normalization32 = limits::Normalization<f32>;
pub type TailDiagnostics64 = limits::TailDiagnostics<f64>;
pub type ConditionalStats64 = limits::ConditionalStats<f64>;

/// Deterministic random source used throughout the crate.
pub type Rng = rand_chacha::ChaCha8Rng;
