use std::collections::BTreeMap;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use super::{MiningConfig, RegeneratedProposal, TrackerPort};
use crate::geometry::BoundingBox;
use crate::scalar::Scalar;

#[derive(Debug, Clone, PartialEq)]
pub struct TrackEntry<T> {
    pub frame_index: usize,
    /// Tracked box on this frame.
    pub bbox: BoundingBox,
    pub absorbed: Vec<RegeneratedProposal<T>>,
}

/// A chain of proposals linked across consecutive frames.
#[derive(Debug, Clone, PartialEq)]
pub struct Track<T> {
    pub id: usize,
    /// Contiguous frames from the seed frame to the last frame with an
    /// absorbed proposal. Entries may have nothing absorbed.
    pub entries: Vec<TrackEntry<T>>,
    /// Mean feature of all absorbed proposals.
    pub feature: Vec<T>,
    /// Mean confidence of all absorbed proposals.
    pub phi: T,
}

impl<T: Scalar> Track<T> {
    pub fn proposals(&self) -> impl Iterator<Item = &RegeneratedProposal<T>> {
        self.entries.iter().flat_map(|e| e.absorbed.iter())
    }

    pub fn first_frame(&self) -> usize {
        self.entries[0].frame_index
    }

    pub fn last_frame(&self) -> usize {
        self.entries[self.entries.len() - 1].frame_index
    }

    /// Recomputes `feature` and `phi` from the absorbed proposals.
    pub fn refresh_summary(&mut self) {
        let (feature, phi) = summarize(self.proposals());
        self.feature = feature;
        self.phi = phi;
    }
}

fn summarize<'a, T: Scalar>(
    props: impl Iterator<Item = &'a RegeneratedProposal<T>>,
) -> (Vec<T>, T) {
    let mut feature: Vec<T> = Vec::new();
    let mut conf = T::zero();
    let mut n = 0usize;
    for p in props {
        if feature.len() < p.feature.len() {
            feature.resize(p.feature.len(), T::zero());
        }
        for (f, &x) in feature.iter_mut().zip(&p.feature) {
            *f = *f + x;
        }
        conf = conf + p.confidence;
        n += 1;
    }
    if n == 0 {
        return (feature, T::zero());
    }
    let count = T::of_usize(n);
    (
        feature.into_iter().map(|f| f / count).collect(),
        conf / count,
    )
}

/// Result of track mining.
#[derive(Debug, Clone)]
pub struct Mining<T> {
    pub tracks: Vec<Track<T>>,
    /// For every input proposal: the index into `tracks` that absorbed it,
    /// or `None` when its track spanned a single frame and was discarded.
    pub assignment: Vec<Option<usize>>,
}

/// Iterative tracking and eliminating.
///
/// Each round seeds a track with a uniformly random proposal from the
/// earliest frame still in the pool, tracks its box forward to
/// `frame_count - 1`, and absorbs (removes from the pool) every pooled
/// proposal whose box IoU with the tracked box reaches `cfg.iou_absorb`.
/// Rounds continue until the pool is empty. Tracks whose absorbed proposals
/// cover fewer than two frames are discarded.
pub fn mine_tracks<T: Scalar>(
    proposals: &[RegeneratedProposal<T>],
    tracker: &dyn TrackerPort,
    frame_count: usize,
    cfg: &MiningConfig,
) -> Mining<T> {
    let frame_count = proposals
        .iter()
        .map(|p| p.frame_index + 1)
        .max()
        .unwrap_or(0)
        .max(frame_count);
    // frame -> indices still in the pool, in input order
    let mut pool: BTreeMap<usize, Vec<usize>> = BTreeMap::new();
    for (i, p) in proposals.iter().enumerate() {
        pool.entry(p.frame_index).or_default().push(i);
    }
    let mut rng = ChaCha8Rng::seed_from_u64(cfg.rng_seed);
    let mut assignment = vec![None; proposals.len()];
    let mut tracks = Vec::new();

    while let Some((&seed_frame, candidates)) = pool.iter().next() {
        let seed = candidates[rng.random_range(0..candidates.len())];
        let mut bbox = proposals[seed].bbox;
        let mut entries = Vec::new();
        let mut members: Vec<usize> = Vec::new();
        for frame in seed_frame..frame_count {
            if frame > seed_frame {
                bbox = tracker.predict(frame - 1, &bbox);
            }
            let mut absorbed = Vec::new();
            if let Some(ids) = pool.get_mut(&frame) {
                ids.retain(|&i| {
                    let hit = i == seed || proposals[i].bbox.iou::<f64>(&bbox) >= cfg.iou_absorb;
                    if hit {
                        absorbed.push(i);
                    }
                    !hit
                });
                if ids.is_empty() {
                    pool.remove(&frame);
                }
            }
            members.extend(&absorbed);
            entries.push((frame, bbox, absorbed));
        }
        let distinct_frames = entries.iter().filter(|(_, _, a)| !a.is_empty()).count();
        if distinct_frames < 2 {
            continue;
        }
        while entries.last().is_some_and(|(_, _, a)| a.is_empty()) {
            entries.pop();
        }
        let id = tracks.len();
        for &i in &members {
            assignment[i] = Some(id);
        }
        let mut track = Track {
            id,
            entries: entries
                .into_iter()
                .map(|(frame_index, bbox, absorbed)| TrackEntry {
                    frame_index,
                    bbox,
                    absorbed: absorbed.iter().map(|&i| proposals[i].clone()).collect(),
                })
                .collect(),
            feature: Vec::new(),
            phi: T::zero(),
        };
        track.refresh_summary();
        tracks.push(track);
    }
    Mining { tracks, assignment }
}
