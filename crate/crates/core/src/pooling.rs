//! Weighted spatial average pooling of proposal confidences into dense
//! per-frame maps, and reduction of those maps onto superpixels.

use crate::error::{Error, Result};
use crate::geometry::{BinaryMask, DenseMap, FrameSize};
use crate::mining::Track;
use crate::scalar::Scalar;
use crate::superpixels::SuperpixelMap;

#[derive(Debug, Clone, PartialEq)]
pub struct PooledFrame<T> {
    pub frame_index: usize,
    pub map: DenseMap<T>,
}

/// Pools `(mask, confidence)` pairs of one frame:
/// `value(p) = Σ_{i : p ∈ mask_i} c_i / Σ_i c_i`.
///
/// The denominator runs over every proposal of the frame, so pixels covered
/// by all proposals get exactly 1 and uncovered pixels 0. An empty list or
/// zero total confidence gives the all-zero map.
pub fn pool_frame<T: Scalar>(
    size: FrameSize,
    proposals: &[(&BinaryMask, T)],
) -> Result<DenseMap<T>> {
    let mut acc = vec![T::zero(); size.pixel_count()];
    let mut total = T::zero();
    for (mask, c) in proposals {
        size.check_same(mask.size())?;
        if !(*c >= T::zero()) || !c.is_finite_value() {
            return Err(Error::InvalidValue(format!(
                "pooling confidence {c:?} must be >= 0"
            )));
        }
        for i in mask.pixel_indices() {
            acc[i] = acc[i] + *c;
        }
        total = total + *c;
    }
    if total == T::zero() {
        return Ok(DenseMap::zeros(size));
    }
    DenseMap::new(size, acc.into_iter().map(|a| a / total).collect())
}

/// Pools the absorbed proposals of the given tracks frame by frame, each
/// weighted by its regenerated confidence. Frames `0..frame_count` are
/// produced; frames no track reaches get the all-zero map.
pub fn pool_tracks<T: Scalar>(
    tracks: &[&Track<T>],
    frame_count: usize,
    size: FrameSize,
) -> Result<Vec<PooledFrame<T>>> {
    let mut per_frame: Vec<Vec<(&BinaryMask, T)>> = vec![Vec::new(); frame_count];
    for track in tracks {
        for entry in &track.entries {
            if let Some(slot) = per_frame.get_mut(entry.frame_index) {
                slot.extend(entry.absorbed.iter().map(|p| (&p.mask, p.confidence)));
            }
        }
    }
    per_frame
        .iter()
        .enumerate()
        .map(|(frame_index, props)| {
            Ok(PooledFrame {
                frame_index,
                map: pool_frame(size, props)?,
            })
        })
        .collect()
}

/// Mean of the map over each superpixel.
pub fn reduce_to_superpixels<T: Scalar>(
    map: &DenseMap<T>,
    superpixels: &SuperpixelMap,
) -> Result<Vec<T>> {
    map.size().check_same(superpixels.size())?;
    let mut sums = vec![T::zero(); superpixels.count()];
    let mut counts = vec![0usize; superpixels.count()];
    for (i, &v) in map.values().iter().enumerate() {
        let l = superpixels.label_at(i);
        sums[l] = sums[l] + v;
        counts[l] += 1;
    }
    Ok(sums
        .into_iter()
        .zip(counts)
        .map(|(s, n)| s / T::of_usize(n))
        .collect())
}
