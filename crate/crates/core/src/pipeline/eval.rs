//! Intersection-over-union evaluation of label maps against ground truth.
//!
//! Label `0` is background and `k + 1` is class `k` of the video; ground
//! truth pixels with a negative label are unannotated and ignored.

use std::collections::BTreeMap;
use std::fmt::Write as _;

use crate::error::{Error, Result};
use crate::geometry::LabelMap;

/// Predictions and ground truth of one video.
#[derive(Debug, Clone)]
pub struct VideoLabels {
    pub video: String,
    pub classes: Vec<String>,
    pub predicted: Vec<LabelMap>,
    /// `None` for frames without annotation.
    pub ground_truth: Vec<Option<LabelMap>>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct FrameIou {
    pub video: String,
    pub frame_index: usize,
    /// Mean over the video's classes with a non-empty union on this frame;
    /// `None` when every union is empty.
    pub iou: Option<f64>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct EvalReport {
    /// IoU per class name, pixels pooled over every annotated frame of
    /// every video tagged with the class. Classes with an empty union are
    /// left out.
    pub per_class: BTreeMap<String, f64>,
    /// Mean of the video's per-class IoUs, in input order.
    pub per_video: Vec<(String, f64)>,
    pub class_average: f64,
    pub video_average: f64,
    pub per_frame: Vec<FrameIou>,
}

#[derive(Debug, Clone, Copy, Default)]
struct Counts {
    intersection: u64,
    union: u64,
}

impl Counts {
    fn add(&mut self, other: Counts) {
        self.intersection += other.intersection;
        self.union += other.union;
    }

    fn iou(&self) -> Option<f64> {
        (self.union > 0).then(|| self.intersection as f64 / self.union as f64)
    }
}

fn frame_counts(pred: &LabelMap, gt: &LabelMap, classes: usize) -> Result<Vec<Counts>> {
    pred.size().check_same(gt.size())?;
    let mut counts = vec![Counts::default(); classes];
    for (&p, &g) in pred.labels().iter().zip(gt.labels()) {
        if g < 0 {
            continue;
        }
        for (k, c) in counts.iter_mut().enumerate() {
            let id = k as i32 + 1;
            let (in_p, in_g) = (p == id, g == id);
            c.intersection += u64::from(in_p && in_g);
            c.union += u64::from(in_p || in_g);
        }
    }
    Ok(counts)
}

fn mean(xs: impl IntoIterator<Item = f64>) -> Option<f64> {
    let (sum, n) = xs
        .into_iter()
        .fold((0.0, 0usize), |(s, n), x| (s + x, n + 1));
    (n > 0).then(|| sum / n as f64)
}

/// Evaluates any number of videos. Errors when no frame of any video is
/// annotated or when sizes or frame counts disagree.
pub fn evaluate(videos: &[VideoLabels]) -> Result<EvalReport> {
    let mut per_class: BTreeMap<String, Counts> = BTreeMap::new();
    let mut per_video = Vec::new();
    let mut per_frame = Vec::new();
    let mut annotated = 0usize;
    for v in videos {
        if v.predicted.len() != v.ground_truth.len() {
            return Err(Error::Dimension(v.predicted.len(), v.ground_truth.len()));
        }
        let mut video_counts = vec![Counts::default(); v.classes.len()];
        for (t, (pred, gt)) in v.predicted.iter().zip(&v.ground_truth).enumerate() {
            let Some(gt) = gt else { continue };
            annotated += 1;
            let counts = frame_counts(pred, gt, v.classes.len())?;
            per_frame.push(FrameIou {
                video: v.video.clone(),
                frame_index: t,
                iou: mean(counts.iter().filter_map(Counts::iou)),
            });
            for (acc, c) in video_counts.iter_mut().zip(counts) {
                acc.add(c);
            }
        }
        for (name, c) in v.classes.iter().zip(&video_counts) {
            per_class.entry(name.clone()).or_default().add(*c);
        }
        if let Some(m) = mean(video_counts.iter().filter_map(Counts::iou)) {
            per_video.push((v.video.clone(), m));
        }
    }
    if annotated == 0 {
        return Err(Error::NoAnnotatedFrames);
    }
    let per_class: BTreeMap<String, f64> = per_class
        .into_iter()
        .filter_map(|(k, c)| c.iou().map(|i| (k, i)))
        .collect();
    Ok(EvalReport {
        class_average: mean(per_class.values().copied()).unwrap_or(0.0),
        video_average: mean(per_video.iter().map(|(_, i)| *i)).unwrap_or(0.0),
        per_class,
        per_video,
        per_frame,
    })
}

impl EvalReport {
    /// Smallest per-frame IoU over frames with a non-empty union.
    pub fn min_frame_iou(&self) -> Option<f64> {
        self.per_frame
            .iter()
            .filter_map(|f| f.iou)
            .min_by(f64::total_cmp)
    }

    pub fn render(&self) -> String {
        let mut s = String::new();
        for (k, v) in &self.per_class {
            let _ = writeln!(s, "class.{k} = {v}");
        }
        for (k, v) in &self.per_video {
            let _ = writeln!(s, "video.{k} = {v}");
        }
        let _ = writeln!(s, "class_average = {}", self.class_average);
        let _ = writeln!(s, "video_average = {}", self.video_average);
        for f in &self.per_frame {
            let iou = f.iou.map_or_else(|| "none".to_string(), |i| i.to_string());
            let _ = writeln!(s, "frame.{}.{} = {iou}", f.video, f.frame_index);
        }
        s
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::geometry::FrameSize;

    fn size() -> FrameSize {
        FrameSize::new(4, 4).unwrap()
    }

    fn square(x0: u32, y0: u32, x1: u32, y1: u32, label: i32) -> LabelMap {
        let mut m = LabelMap::filled(size(), 0);
        for y in y0..y1 {
            for x in x0..x1 {
                m.labels_mut()[size().index(x, y)] = label;
            }
        }
        m
    }

    fn one(pred: LabelMap, gt: Option<LabelMap>) -> VideoLabels {
        VideoLabels {
            video: "v".into(),
            classes: vec!["a".into()],
            predicted: vec![pred],
            ground_truth: vec![gt],
        }
    }

    #[test]
    fn exact_prediction() {
        let gt = square(0, 0, 2, 2, 1);
        let r = evaluate(&[one(gt.clone(), Some(gt))]).unwrap();
        assert_eq!(r.per_class["a"], 1.0);
        assert_eq!(r.class_average, 1.0);
        assert_eq!(r.video_average, 1.0);
        assert_eq!(r.min_frame_iou(), Some(1.0));
    }

    #[test]
    fn all_background_prediction() {
        let r = evaluate(&[one(
            LabelMap::filled(size(), 0),
            Some(square(0, 0, 2, 2, 1)),
        )])
        .unwrap();
        assert_eq!(r.per_class["a"], 0.0);
    }

    #[test]
    fn half_overlap_is_one_third() {
        // gt: 2x2 at the origin; pred: its right half plus an equal area outside
        let gt = square(0, 0, 2, 2, 1);
        let pred = square(1, 0, 3, 2, 1);
        let r = evaluate(&[one(pred, Some(gt))]).unwrap();
        assert!((r.per_class["a"] - 1.0 / 3.0).abs() < 1e-15);
    }

    #[test]
    fn unannotated_frames_and_pixels_are_skipped() {
        assert!(matches!(
            evaluate(&[one(LabelMap::filled(size(), 1), None)]),
            Err(Error::NoAnnotatedFrames)
        ));
        let mut gt = square(0, 0, 2, 2, 1);
        for l in gt.labels_mut().iter_mut().skip(8) {
            *l = -1;
        }
        // prediction differs only where gt is unannotated
        let pred = square(0, 0, 2, 4, 1);
        assert_eq!(
            evaluate(&[one(pred, Some(gt))]).unwrap().per_class["a"],
            1.0
        );
    }

    #[test]
    fn relabeling_classes_consistently() {
        let pred = square(0, 0, 2, 2, 1);
        let mut pred2 = pred.clone();
        for l in pred2.labels_mut() {
            if *l == 0 {
                *l = 2;
            }
        }
        let gt = square(0, 0, 3, 3, 1);
        let mut gt2 = gt.clone();
        for l in gt2.labels_mut() {
            if *l == 0 {
                *l = 2;
            }
        }
        let v = VideoLabels {
            video: "v".into(),
            classes: vec!["a".into(), "b".into()],
            predicted: vec![pred2],
            ground_truth: vec![Some(gt2)],
        };
        let swapped = VideoLabels {
            classes: vec!["b".into(), "a".into()],
            predicted: vec![LabelMap::new(
                size(),
                v.predicted[0].labels().iter().map(|&l| 3 - l).collect(),
            )
            .unwrap()],
            ground_truth: vec![Some(
                LabelMap::new(
                    size(),
                    v.ground_truth[0]
                        .as_ref()
                        .unwrap()
                        .labels()
                        .iter()
                        .map(|&l| 3 - l)
                        .collect(),
                )
                .unwrap(),
            )],
            ..v.clone()
        };
        assert_eq!(evaluate(&[v]).unwrap(), evaluate(&[swapped]).unwrap());
    }

    #[test]
    fn averages_over_videos() {
        let gt = square(0, 0, 2, 2, 1);
        let mut a = one(gt.clone(), Some(gt.clone()));
        a.video = "a".into();
        let mut b = one(LabelMap::filled(size(), 0), Some(gt));
        b.video = "b".into();
        let r = evaluate(&[a, b]).unwrap();
        assert_eq!(r.video_average, 0.5);
        assert_eq!(r.per_class["a"], 0.5);
    }
}
