//! Weakly supervised video object segmentation from region proposals.
//!
//! Proposals are scored by appearance and motion, pooled into per-frame
//! confidence maps, regenerated and linked into tracks, a subset of tracks
//! is chosen by greedy submodular maximization, and the pooled selection is
//! refined by a superpixel CRF solved with alpha-expansion.
//!
//! The numeric core is generic over [`Scalar`] (and [`Real`] where logs and
//! exponentials are needed). The aliases below fix the scalar type for the
//! common cases; the file-based [`pipeline`] works in `f64`.

// `!(x >= 0)` is used on purpose: it also rejects NaN.
#![allow(clippy::neg_cmp_op_on_partial_ord)]
// Index loops read better in the small dense matrix code.
#![allow(clippy::needless_range_loop)]

pub mod error;
pub mod geometry;
pub mod mining;
pub mod pipeline;
pub mod pooling;
pub mod proposal;
pub mod scalar;
pub mod scoring;
pub mod segmentation;
pub mod selection;
pub mod superpixels;

pub use error::{Error, Result};
pub use scalar::{Real, Scalar};

/// Exact rational scalar for oracle-style checks.
pub type Rational = num_rational::Ratio<i64>;

pub type Proposal = proposal::RegionProposal<f64>;
pub type Proposal32 = proposal::RegionProposal<f32>;
pub type ConfidenceMap = geometry::DenseMap<f64>;
pub type ConfidenceMap32 = geometry::DenseMap<f32>;
pub type Frame = geometry::RgbFrame<f64>;
pub type Track = mining::Track<f64>;
pub type Selection = selection::SelectionInstance<f64>;
pub type RationalSelection = selection::SelectionInstance<Rational>;
pub type Energy = segmentation::EnergyModel<f64>;
pub type RationalEnergy = segmentation::EnergyModel<Rational>;
pub type Mixture = segmentation::GaussianMixture<f64>;
pub type Mixture32 = segmentation::GaussianMixture<f32>;
