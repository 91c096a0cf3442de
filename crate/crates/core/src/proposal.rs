use crate::error::{Error, Result};
use crate::geometry::{BinaryMask, BoundingBox};
use crate::scalar::Scalar;

/// A per-frame candidate object region with its scores and feature vector.
///
/// `motion_score`, `combined_score` and `rescored` start at zero and are
/// filled in by [`crate::scoring`].
#[derive(Debug, Clone, PartialEq)]
pub struct RegionProposal<T> {
    pub frame_index: usize,
    pub mask: BinaryMask,
    pub bbox: BoundingBox,
    pub appearance_score: T,
    pub motion_score: T,
    pub combined_score: T,
    pub classifier_confidence: T,
    pub rescored: T,
    pub feature: Vec<T>,
}

impl<T: Scalar> RegionProposal<T> {
    /// Validates the proposal and L2-normalizes its feature vector.
    pub fn new(
        frame_index: usize,
        mask: BinaryMask,
        appearance_score: T,
        classifier_confidence: T,
        feature: Vec<T>,
    ) -> Result<Self> {
        let bbox = mask.tight_box().ok_or(Error::EmptyProposal)?;
        if !(classifier_confidence >= T::zero() && classifier_confidence <= T::one()) {
            return Err(Error::InvalidValue(format!(
                "classifier confidence {classifier_confidence:?} outside [0, 1]"
            )));
        }
        if !appearance_score.is_finite_value() {
            return Err(Error::InvalidValue("non-finite appearance score".into()));
        }
        Ok(RegionProposal {
            frame_index,
            mask,
            bbox,
            appearance_score,
            motion_score: T::zero(),
            combined_score: T::zero(),
            classifier_confidence,
            rescored: T::zero(),
            feature: l2_normalized(feature)?,
        })
    }
}

/// Scales a vector to unit L2 norm. The zero vector, and vectors already of
/// unit norm up to rounding, are returned unchanged so that re-reading a
/// written feature is the identity.
pub fn l2_normalized<T: Scalar>(v: Vec<T>) -> Result<Vec<T>> {
    if v.iter().any(|x| !x.is_finite_value()) {
        return Err(Error::InvalidValue("non-finite feature component".into()));
    }
    let norm = v.iter().map(|x| x.as_f64().powi(2)).sum::<f64>().sqrt();
    if norm == 0.0 || (norm - 1.0).abs() <= 4.0 * f64::EPSILON {
        return Ok(v);
    }
    let inv = T::of(norm);
    Ok(v.into_iter().map(|x| x / inv).collect())
}
