use std::collections::{HashSet, VecDeque};

use super::{Connectivity, MiningConfig};
use crate::geometry::{BinaryMask, BoundingBox, DenseMap, FrameSize};
use crate::proposal::RegionProposal;
use crate::scalar::Scalar;

/// A proposal regenerated from a pooled confidence map.
#[derive(Debug, Clone, PartialEq)]
pub struct RegeneratedProposal<T> {
    pub frame_index: usize,
    pub mask: BinaryMask,
    pub bbox: BoundingBox,
    /// Mean confidence-map value inside the mask.
    pub confidence: T,
    /// Lowest threshold at which this exact region appeared.
    pub source_level: T,
    /// Inherited from the input proposal with the largest mask overlap.
    pub feature: Vec<T>,
}

/// Labels the connected components of `on`, returning each component's
/// pixel indices in raster order. Components are ordered by their first
/// pixel in raster order.
pub fn connected_components(
    size: FrameSize,
    on: &[bool],
    connectivity: Connectivity,
) -> Vec<Vec<usize>> {
    const N4: [(i64, i64); 4] = [(1, 0), (-1, 0), (0, 1), (0, -1)];
    const N8: [(i64, i64); 8] = [
        (1, 0),
        (-1, 0),
        (0, 1),
        (0, -1),
        (1, 1),
        (1, -1),
        (-1, 1),
        (-1, -1),
    ];
    let offsets: &[(i64, i64)] = match connectivity {
        Connectivity::Four => &N4,
        Connectivity::Eight => &N8,
    };
    let (w, h) = (i64::from(size.width), i64::from(size.height));
    let mut visited = vec![false; on.len()];
    let mut components = Vec::new();
    let mut queue = VecDeque::new();
    for seed in 0..on.len() {
        if !on[seed] || visited[seed] {
            continue;
        }
        visited[seed] = true;
        queue.push_back(seed);
        let mut pixels = Vec::new();
        while let Some(p) = queue.pop_front() {
            pixels.push(p);
            let (x, y) = ((p as i64) % w, (p as i64) / w);
            for &(dx, dy) in offsets {
                let (nx, ny) = (x + dx, y + dy);
                if nx < 0 || ny < 0 || nx >= w || ny >= h {
                    continue;
                }
                let q = (ny * w + nx) as usize;
                if on[q] && !visited[q] {
                    visited[q] = true;
                    queue.push_back(q);
                }
            }
        }
        pixels.sort_unstable();
        components.push(pixels);
    }
    components
}

/// Threshold sweep over a confidence map: the connected components of each
/// superlevel set `{map >= level}` become proposals. Regions that reappear
/// unchanged at a higher level are kept once, at their lowest level.
pub fn regenerate<T: Scalar>(
    map: &DenseMap<T>,
    frame_index: usize,
    cfg: &MiningConfig,
) -> Vec<RegeneratedProposal<T>> {
    let size = map.size();
    let mut seen: HashSet<BinaryMask> = HashSet::new();
    let mut out = Vec::new();
    for level in cfg.thresholds::<T>() {
        let on: Vec<bool> = map.values().iter().map(|&v| v >= level).collect();
        for pixels in connected_components(size, &on, cfg.connectivity) {
            if (pixels.len() as u64) < cfg.min_region_area.max(1) {
                continue;
            }
            let mask = BinaryMask::from_sorted_indices(size, &pixels)
                .expect("component pixels are sorted");
            if seen.contains(&mask) {
                continue;
            }
            let confidence = map.mean_over(&mask).expect("component is non-empty");
            let bbox = mask.tight_box().expect("component is non-empty");
            seen.insert(mask.clone());
            out.push(RegeneratedProposal {
                frame_index,
                mask,
                bbox,
                confidence,
                source_level: level,
                feature: Vec::new(),
            });
        }
    }
    out
}

/// Copies onto each regenerated proposal the feature of the same-frame input
/// proposal whose mask overlaps it most (first such proposal on ties). With
/// no overlapping input the feature is the zero vector of dimension `dim`.
pub fn inherit_features<T: Scalar>(
    regenerated: &mut [RegeneratedProposal<T>],
    inputs: &[RegionProposal<T>],
    dim: usize,
) {
    for r in regenerated.iter_mut() {
        let mut best: Option<(u64, &RegionProposal<T>)> = None;
        for p in inputs.iter().filter(|p| p.frame_index == r.frame_index) {
            let overlap = r.mask.intersection_area(&p.mask);
            if overlap > 0 && best.is_none_or(|(b, _)| overlap > b) {
                best = Some((overlap, p));
            }
        }
        r.feature = match best {
            Some((_, p)) => p.feature.clone(),
            None => vec![T::zero(); dim],
        };
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn cfg(levels: u32) -> MiningConfig {
        MiningConfig {
            levels,
            min_region_area: 1,
            ..Default::default()
        }
    }

    #[test]
    fn plateau_yields_single_region() {
        let f = FrameSize::new(8, 8).unwrap();
        let map = DenseMap::from_fn(f, |x, y| {
            if (2..5).contains(&x) && (2..5).contains(&y) {
                0.9
            } else {
                0.0
            }
        })
        .unwrap();
        let out = regenerate(&map, 3, &cfg(9));
        assert_eq!(out.len(), 1);
        assert_eq!(out[0].mask.area(), 9);
        assert!((out[0].confidence - 0.9f64).abs() < 1e-12);
        assert_eq!(out[0].frame_index, 3);
        assert!((out[0].source_level - 0.1f64).abs() < 1e-15);
        assert_eq!(out[0].bbox, BoundingBox::new(2, 2, 5, 5).unwrap());
    }

    #[test]
    fn levels_select_plateaus() {
        let f = FrameSize::new(10, 4).unwrap();
        let map = DenseMap::from_fn(f, |x, _| match x {
            0..=2 => 0.8,
            6..=8 => 0.3,
            _ => 0.0,
        })
        .unwrap();
        // single level 0.5
        let at_half = regenerate(&map, 0, &cfg(1));
        assert_eq!(at_half.len(), 1);
        assert!((at_half[0].confidence - 0.8f64).abs() < 1e-12);
        // levels 0.2, 0.4, 0.6, 0.8: both plateaus appear at 0.2
        let sweep = regenerate(&map, 0, &cfg(4));
        let at_low: Vec<_> = sweep.iter().filter(|p| p.source_level < 0.25).collect();
        assert_eq!(at_low.len(), 2);
        assert_eq!(sweep.len(), 2);
    }

    #[test]
    fn zero_map_is_empty() {
        let f = FrameSize::new(5, 5).unwrap();
        assert!(regenerate(&DenseMap::<f64>::zeros(f), 0, &cfg(10)).is_empty());
    }

    #[test]
    fn min_area_filters_speckle() {
        let f = FrameSize::new(5, 5).unwrap();
        let map = DenseMap::from_fn(f, |x, y| if x == 2 && y == 2 { 1.0 } else { 0.0 }).unwrap();
        let c = MiningConfig {
            min_region_area: 2,
            ..cfg(3)
        };
        assert!(regenerate(&map, 0, &c).is_empty());
    }

    #[test]
    fn connectivity_matters_on_diagonals() {
        let f = FrameSize::new(2, 2).unwrap();
        let on = [true, false, false, true];
        assert_eq!(connected_components(f, &on, Connectivity::Four).len(), 2);
        assert_eq!(connected_components(f, &on, Connectivity::Eight).len(), 1);
    }

    #[test]
    fn features_follow_max_overlap() {
        let f = FrameSize::new(6, 6).unwrap();
        let bx = |x0, y0, x1, y1| BoundingBox::new(x0, y0, x1, y1).unwrap();
        let a = RegionProposal::new(
            0,
            BinaryMask::from_box(f, &bx(0, 0, 2, 2)),
            0.0,
            0.5,
            vec![1.0, 0.0],
        )
        .unwrap();
        let b = RegionProposal::new(
            0,
            BinaryMask::from_box(f, &bx(0, 0, 4, 4)),
            0.0,
            0.5,
            vec![0.0, 1.0],
        )
        .unwrap();
        let c = RegionProposal::new(
            1,
            BinaryMask::from_box(f, &bx(0, 0, 6, 6)),
            0.0,
            0.5,
            vec![1.0, 0.0],
        )
        .unwrap();
        let mask = BinaryMask::from_box(f, &bx(0, 0, 3, 3));
        let mut regen = vec![
            RegeneratedProposal {
                frame_index: 0,
                bbox: mask.tight_box().unwrap(),
                mask: mask.clone(),
                confidence: 0.5,
                source_level: 0.1,
                feature: vec![],
            },
            RegeneratedProposal {
                frame_index: 2,
                bbox: mask.tight_box().unwrap(),
                mask,
                confidence: 0.5,
                source_level: 0.1,
                feature: vec![],
            },
        ];
        inherit_features(&mut regen, &[a, b, c], 2);
        assert_eq!(regen[0].feature, vec![0.0, 1.0]);
        assert_eq!(regen[1].feature, vec![0.0, 0.0]);
    }
}

#[cfg(test)]
mod props {
    use super::*;
    use proptest::prelude::*;

    proptest! {
        /// Superlevel sets nest: every region at a higher level lies inside
        /// some region at a lower level.
        #[test]
        fn superlevel_sets_nest(vals in prop::collection::vec(0.0f64..=1.0, 64), levels in 1u32..8) {
            let f = FrameSize::new(8, 8).unwrap();
            let map = DenseMap::new(f, vals).unwrap();
            let c = MiningConfig { levels, min_region_area: 1, ..Default::default() };
            let thresholds = c.thresholds::<f64>();
            let per_level: Vec<Vec<Vec<usize>>> = thresholds.iter().map(|&t| {
                let on: Vec<bool> = map.values().iter().map(|&v| v >= t).collect();
                connected_components(f, &on, c.connectivity)
            }).collect();
            for k in 1..per_level.len() {
                for region in &per_level[k] {
                    let contained = per_level[k - 1].iter().any(|outer| {
                        region.iter().all(|p| outer.binary_search(p).is_ok())
                    });
                    prop_assert!(contained);
                }
            }
            // every regenerated proposal is one of those components, deduplicated
            let regen = regenerate(&map, 0, &c);
            let unique: HashSet<_> = regen.iter().map(|r| r.mask.clone()).collect();
            prop_assert_eq!(unique.len(), regen.len());
            for r in &regen {
                prop_assert!(r.confidence >= r.source_level - 1e-12);
                prop_assert!(r.confidence <= 1.0);
            }
        }
    }
}
