//! Per-frame proposal scoring: motion score, normalized combined score and
//! classifier rescoring.

use crate::error::{Error, Result};
use crate::geometry::{BinaryMask, DenseMap};
use crate::proposal::RegionProposal;
use crate::scalar::Scalar;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Normalization {
    /// Divide by the frame maximum; all-zero frames stay zero.
    PerFrameMax,
    /// Affine map of `[min, max]` onto `[0, 1]`.
    PerFrameMinMax,
}

impl std::str::FromStr for Normalization {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "per_frame_max" => Ok(Normalization::PerFrameMax),
            "per_frame_minmax" => Ok(Normalization::PerFrameMinMax),
            other => Err(Error::parse("normalization", other.to_string())),
        }
    }
}

impl std::fmt::Display for Normalization {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(match self {
            Normalization::PerFrameMax => "per_frame_max",
            Normalization::PerFrameMinMax => "per_frame_minmax",
        })
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ScoringConfig {
    pub normalization: Normalization,
    pub epsilon: f64,
}

impl Default for ScoringConfig {
    fn default() -> Self {
        ScoringConfig {
            normalization: Normalization::PerFrameMax,
            epsilon: 1e-12,
        }
    }
}

/// Motion score: mean motion cue over the mask times the total motion cue.
pub fn motion_score<T: Scalar>(mask: &BinaryMask, motion: &DenseMap<T>) -> Result<T> {
    mask.size().check_same(motion.size())?;
    let area = mask.area();
    if area == 0 {
        return Err(Error::EmptyProposal);
    }
    let sum = motion.sum_over(mask);
    Ok(sum / T::from_u64(area).unwrap() * sum)
}

fn normalize<T: Scalar>(values: &mut [T], cfg: &ScoringConfig) {
    if values.is_empty() {
        return;
    }
    let eps = T::of(cfg.epsilon);
    match cfg.normalization {
        Normalization::PerFrameMax => {
            for v in values.iter_mut() {
                *v = v.max_of(T::zero());
            }
            let max = values.iter().fold(T::zero(), |m, &v| m.max_of(v));
            if max <= eps {
                values.iter_mut().for_each(|v| *v = T::zero());
            } else {
                values.iter_mut().for_each(|v| *v = *v / max);
            }
        }
        Normalization::PerFrameMinMax => {
            let min = values.iter().fold(values[0], |m, &v| m.min_of(v));
            let max = values.iter().fold(values[0], |m, &v| m.max_of(v));
            let range = max - min;
            if range <= eps {
                let tie = if max == T::zero() {
                    T::zero()
                } else {
                    T::one()
                };
                values.iter_mut().for_each(|v| *v = tie);
            } else {
                values.iter_mut().for_each(|v| *v = (*v - min) / range);
            }
        }
    }
}

/// Normalizes appearance and motion scores over one frame's proposals, sums
/// them into `combined_score` and normalizes that too.
pub fn combine_scores<T: Scalar>(frame_proposals: &mut [RegionProposal<T>], cfg: &ScoringConfig) {
    let mut appearance: Vec<T> = frame_proposals.iter().map(|p| p.appearance_score).collect();
    let mut motion: Vec<T> = frame_proposals.iter().map(|p| p.motion_score).collect();
    normalize(&mut appearance, cfg);
    normalize(&mut motion, cfg);
    let mut combined: Vec<T> = appearance
        .iter()
        .zip(&motion)
        .map(|(&a, &c)| a + c)
        .collect();
    normalize(&mut combined, cfg);
    for (p, s) in frame_proposals.iter_mut().zip(combined) {
        p.combined_score = s;
    }
}

/// Combined score times classifier confidence.
pub fn rescore<T: Scalar>(proposal: &RegionProposal<T>) -> T {
    proposal.combined_score * proposal.classifier_confidence
}

/// Scores every proposal of a video in place. `motion_maps[t]` is the motion
/// cue map of frame `t`.
pub fn score_video<T: Scalar>(
    proposals: &mut [RegionProposal<T>],
    motion_maps: &[DenseMap<T>],
    cfg: &ScoringConfig,
) -> Result<()> {
    for p in proposals.iter_mut() {
        let map = motion_maps.get(p.frame_index).ok_or_else(|| {
            Error::InvalidValue(format!("no motion map for frame {}", p.frame_index))
        })?;
        p.motion_score = motion_score(&p.mask, map)?;
    }
    let mut order: Vec<usize> = (0..proposals.len()).collect();
    order.sort_by_key(|&i| proposals[i].frame_index);
    let mut start = 0;
    while start < order.len() {
        let frame = proposals[order[start]].frame_index;
        let end = order[start..]
            .iter()
            .position(|&i| proposals[i].frame_index != frame)
            .map_or(order.len(), |k| start + k);
        let mut frame_props: Vec<RegionProposal<T>> = order[start..end]
            .iter()
            .map(|&i| proposals[i].clone())
            .collect();
        combine_scores(&mut frame_props, cfg);
        for (&i, p) in order[start..end].iter().zip(frame_props) {
            proposals[i].combined_score = p.combined_score;
            proposals[i].rescored = rescore(&proposals[i]);
        }
        start = end;
    }
    Ok(())
}


#[cfg(test)]
mod props {
    use super::*;
    use crate::geometry::FrameSize;
    use proptest::prelude::*;

    proptest! {
        #[test]
        fn max_normalization_hits_one(scores in prop::collection::vec((0.0f64..10.0, 0.0f64..10.0), 1..12)) {
            let f = FrameSize::new(2, 2).unwrap();
            let mut ps: Vec<RegionProposal<f64>> = scores.iter().map(|&(a, c)| {
                let mut p = RegionProposal::new(0, BinaryMask::full(f), a, 0.5, vec![]).unwrap();
                p.motion_score = c;
                p
            }).collect();
            combine_scores(&mut ps, &ScoringConfig::default());
            let max = ps.iter().map(|p| p.combined_score).fold(0.0, f64::max);
            prop_assert!(ps.iter().all(|p| (0.0..=1.0).contains(&p.combined_score)));
            let all_zero = scores.iter().all(|&(a, c)| a <= 1e-12 && c <= 1e-12);
            prop_assert_eq!(max, if all_zero { 0.0 } else { 1.0 });
        }

        #[test]
        fn motion_score_depends_on_covered_values_only(vals in prop::collection::vec(0.0f64..=1.0, 16), perm_seed in any::<u64>()) {
            use rand::seq::SliceRandom;
            use rand::SeedableRng;
            let f = FrameSize::new(4, 4).unwrap();
            let mask = BinaryMask::from_sorted_indices(f, &[0, 1, 2, 3, 4, 5]).unwrap();
            let map = DenseMap::new(f, vals.clone()).unwrap();
            let mut covered: Vec<f64> = vals[..6].to_vec();
            covered.shuffle(&mut rand_chacha::ChaCha8Rng::seed_from_u64(perm_seed));
            let mut permuted = vals.clone();
            permuted[10..16].copy_from_slice(&covered);
            let moved = BinaryMask::from_sorted_indices(f, &[10, 11, 12, 13, 14, 15]).unwrap();
            let a = motion_score(&mask, &map).unwrap();
            let b = motion_score(&moved, &DenseMap::new(f, permuted).unwrap()).unwrap();
            prop_assert!((a - b).abs() <= 1e-12 * a.max(1.0));
        }
    }
}
