//! Synthetic moving-object videos with known ground truth.
//!
//! Frames show coloured squares moving over a noisy background, optionally
//! with a static clutter patch. Proposals are jittered true boxes plus
//! distractors: jittered boxes around the clutter and random background
//! boxes. True proposals share a feature prototype; every distractor gets an
//! independent random unit feature.
//!
//! On "miss" frames the proposal source mostly fails: the object gets a
//! few weak proposals among clutter and random distractors, which is where
//! pooling every mined track goes wrong.

use std::collections::HashMap;
use std::path::Path;

use rand::seq::index::sample;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Normal, StandardNormal};

use super::formats::{render_proposals, write_file, write_fmap, write_frame, write_imap};
use super::manifest::{expand_pattern, VideoManifest};
use crate::error::{Error, Result};
use crate::geometry::{
    BinaryMask, BoundingBox, DenseMap, FlowField, FrameSize, LabelMap, RgbFrame,
};
use crate::proposal::RegionProposal;

#[derive(Debug, Clone, PartialEq)]
pub struct MovingObject {
    /// Top-left corner on frame 0; may start partly outside the frame.
    pub start: (i64, i64),
    pub size: (u32, u32),
    /// Pixels per frame.
    pub velocity: (i64, i64),
    pub colour: [f64; 3],
}

#[derive(Debug, Clone, PartialEq)]
pub struct StaticPatch {
    pub corner: (u32, u32),
    pub size: (u32, u32),
    pub colour: [f64; 3],
}

#[derive(Debug, Clone, PartialEq)]
pub struct SyntheticScene {
    pub video: String,
    pub class: String,
    pub width: u32,
    pub height: u32,
    pub frames: usize,
    pub background: [f64; 3],
    /// Standard deviation of per-pixel, per-channel Gaussian noise.
    pub pixel_noise: f64,
    pub objects: Vec<MovingObject>,
    pub clutter: Option<StaticPatch>,
    /// Fraction of each frame's proposals that are distractors (rounded).
    pub noise_rate: f64,
    /// Fraction of interior frames on which the proposal source misses.
    pub miss_rate: f64,
    /// Fraction of a frame's distractors placed around the clutter patch
    /// (rounded); the rest are random background boxes.
    pub clutter_share: f64,
    /// Classifier confidence range of distractors.
    pub distractor_confidence: (f64, f64),
    /// Weak true proposals and random distractors on a miss frame.
    pub miss_true: usize,
    /// Classifier confidence range of the weak true proposals.
    pub miss_true_confidence: (f64, f64),
    pub miss_clutter: usize,
    pub miss_random: usize,
    pub slots_per_frame: usize,
    /// Maximum per-side displacement of proposal box edges.
    pub jitter: u32,
    pub feature_dim: usize,
    /// Per-component noise added to the prototype of true proposals.
    pub feature_noise: f64,
    pub superpixel_cell: u32,
    /// Annotate every `gt_every`-th frame.
    pub gt_every: usize,
}

impl Default for SyntheticScene {
    fn default() -> Self {
        SyntheticScene {
            video: "square".into(),
            class: "object".into(),
            width: 64,
            height: 64,
            frames: 10,
            background: [0.5, 0.5, 0.5],
            pixel_noise: 0.03,
            objects: vec![MovingObject {
                start: (8, 24),
                size: (16, 16),
                velocity: (2, 0),
                colour: [0.85, 0.15, 0.1],
            }],
            clutter: Some(StaticPatch {
                corner: (42, 4),
                size: (16, 16),
                colour: [0.85, 0.15, 0.1],
            }),
            noise_rate: 0.3,
            miss_rate: 0.1,
            clutter_share: 0.67,
            distractor_confidence: (0.35, 0.5),
            miss_true: 2,
            miss_true_confidence: (0.3, 0.4),
            miss_clutter: 2,
            miss_random: 5,
            slots_per_frame: 10,
            jitter: 2,
            feature_dim: 64,
            feature_noise: 0.1,
            superpixel_cell: 8,
            gt_every: 1,
        }
    }
}

fn parse<T: std::str::FromStr>(key: &str, value: &str) -> Result<T> {
    value
        .parse()
        .map_err(|_| Error::parse("scene", format!("`{key}` = `{value}`")))
}

impl SyntheticScene {
    /// The scene without clutter or proposal noise.
    pub fn clean() -> Self {
        SyntheticScene {
            clutter: None,
            noise_rate: 0.0,
            miss_rate: 0.0,
            ..Self::default()
        }
    }

    pub fn set(&mut self, key: &str, value: &str) -> Result<()> {
        match key {
            "video" => self.video = value.to_string(),
            "class" => self.class = value.to_string(),
            "width" => self.width = parse(key, value)?,
            "height" => self.height = parse(key, value)?,
            "frames" => self.frames = parse(key, value)?,
            "pixel_noise" => self.pixel_noise = parse(key, value)?,
            "noise_rate" => self.noise_rate = parse(key, value)?,
            "miss_rate" => self.miss_rate = parse(key, value)?,
            "clutter_share" => self.clutter_share = parse(key, value)?,
            "distractor_confidence_min" => self.distractor_confidence.0 = parse(key, value)?,
            "distractor_confidence_max" => self.distractor_confidence.1 = parse(key, value)?,
            "miss_true" => self.miss_true = parse(key, value)?,
            "miss_true_confidence_min" => self.miss_true_confidence.0 = parse(key, value)?,
            "miss_true_confidence_max" => self.miss_true_confidence.1 = parse(key, value)?,
            "miss_clutter" => self.miss_clutter = parse(key, value)?,
            "miss_random" => self.miss_random = parse(key, value)?,
            "slots_per_frame" => self.slots_per_frame = parse(key, value)?,
            "jitter" => self.jitter = parse(key, value)?,
            "feature_dim" => self.feature_dim = parse(key, value)?,
            "feature_noise" => self.feature_noise = parse(key, value)?,
            "superpixel_cell" => self.superpixel_cell = parse(key, value)?,
            "gt_every" => self.gt_every = parse(key, value)?,
            "clutter" => match value {
                "none" => self.clutter = None,
                _ => return Err(Error::parse("scene", "only `clutter = none` is supported")),
            },
            other => return Err(Error::parse("scene", format!("unknown key `{other}`"))),
        }
        Ok(())
    }

    fn validate(&self) -> Result<()> {
        let size = FrameSize::new(self.width, self.height)?;
        let ok = self.frames > 0
            && (0.0..=1.0).contains(&self.noise_rate)
            && (0.0..=1.0).contains(&self.miss_rate)
            && (0.0..=1.0).contains(&self.clutter_share)
            && 0.0 <= self.distractor_confidence.0
            && self.distractor_confidence.0 < self.distractor_confidence.1
            && self.distractor_confidence.1 <= 1.0
            && 0.0 <= self.miss_true_confidence.0
            && self.miss_true_confidence.0 < self.miss_true_confidence.1
            && self.miss_true_confidence.1 <= 1.0
            && self.pixel_noise >= 0.0
            && self.feature_noise >= 0.0
            && self.feature_dim > 0
            && self.superpixel_cell > 0
            && self.gt_every > 0
            && !self.objects.is_empty()
            && self.objects.iter().all(|o| o.size.0 > 0 && o.size.1 > 0);
        if !ok {
            return Err(Error::InvalidValue(
                "synthetic scene parameters out of range".into(),
            ));
        }
        if let Some(c) = &self.clutter {
            BoundingBox::new(
                c.corner.0,
                c.corner.1,
                c.corner.0 + c.size.0,
                c.corner.1 + c.size.1,
            )?;
            if c.corner.0 + c.size.0 > size.width || c.corner.1 + c.size.1 > size.height {
                return Err(Error::InvalidValue(
                    "clutter patch outside the frame".into(),
                ));
            }
        }
        Ok(())
    }

    pub fn size(&self) -> FrameSize {
        FrameSize::new(self.width, self.height).expect("validated scene")
    }

    /// Visible box of object `i` on frame `t`, if any of it is in view.
    pub fn object_box(&self, i: usize, t: usize) -> Option<BoundingBox> {
        let o = &self.objects[i];
        let x0 = o.start.0 + o.velocity.0 * t as i64;
        let y0 = o.start.1 + o.velocity.1 * t as i64;
        clip_box(
            x0,
            y0,
            x0 + i64::from(o.size.0),
            y0 + i64::from(o.size.1),
            self.size(),
        )
    }

    fn clutter_box(&self) -> Option<BoundingBox> {
        self.clutter.as_ref().map(|c| {
            BoundingBox::new(
                c.corner.0,
                c.corner.1,
                c.corner.0 + c.size.0,
                c.corner.1 + c.size.1,
            )
            .expect("validated scene")
        })
    }

    /// Region id of every pixel of frame `t`: 0 background, 1 clutter,
    /// `2 + i` object `i`. Later objects paint over earlier ones.
    fn regions(&self, t: usize) -> Vec<u32> {
        let size = self.size();
        let mut ids = vec![0u32; size.pixel_count()];
        let mut paint = |b: BoundingBox, id: u32| {
            for y in b.y0..b.y1 {
                for x in b.x0..b.x1 {
                    ids[size.index(x, y)] = id;
                }
            }
        };
        if let Some(b) = self.clutter_box() {
            paint(b, 1);
        }
        for i in 0..self.objects.len() {
            if let Some(b) = self.object_box(i, t) {
                paint(b, 2 + i as u32);
            }
        }
        ids
    }

    fn colour_of(&self, region: u32) -> [f64; 3] {
        match region {
            0 => self.background,
            1 => self.clutter.as_ref().expect("clutter region").colour,
            r => self.objects[(r - 2) as usize].colour,
        }
    }
}

fn clip_box(x0: i64, y0: i64, x1: i64, y1: i64, size: FrameSize) -> Option<BoundingBox> {
    let (w, h) = (i64::from(size.width), i64::from(size.height));
    let (x0, y0, x1, y1) = (
        x0.clamp(0, w),
        y0.clamp(0, h),
        x1.clamp(0, w),
        y1.clamp(0, h),
    );
    BoundingBox::new(x0 as u32, y0 as u32, x1 as u32, y1 as u32).ok()
}

/// In-memory result of [`synthesize`].
#[derive(Debug, Clone)]
pub struct SyntheticVideo {
    pub scene: SyntheticScene,
    pub frames: Vec<RgbFrame<f64>>,
    pub proposals: Vec<RegionProposal<f64>>,
    /// Whether each proposal is a true object proposal.
    pub is_true: Vec<bool>,
    pub motion: Vec<DenseMap<f64>>,
    pub flows: Vec<FlowField<f64>>,
    pub superpixels: Vec<LabelMap>,
    pub ground_truth: Vec<Option<LabelMap>>,
    pub miss_frames: Vec<usize>,
}

fn unit_gaussian(rng: &mut ChaCha8Rng, dim: usize) -> Vec<f64> {
    loop {
        let v: Vec<f64> = (0..dim).map(|_| StandardNormal.sample(rng)).collect();
        let n = v.iter().map(|x| x * x).sum::<f64>().sqrt();
        if n > 1e-9 {
            return v.into_iter().map(|x| x / n).collect();
        }
    }
}

fn jittered(b: BoundingBox, jitter: u32, size: FrameSize, rng: &mut ChaCha8Rng) -> BoundingBox {
    let j = i64::from(jitter);
    let mut d = || rng.random_range(-j..=j);
    let (x0, y0) = (i64::from(b.x0) + d(), i64::from(b.y0) + d());
    let (x1, y1) = (i64::from(b.x1) + d(), i64::from(b.y1) + d());
    clip_box(x0, y0, x1.max(x0 + 1), y1.max(y0 + 1), size).unwrap_or(b)
}

/// Generates the whole video in memory. Identical scene and seed give
/// identical output.
pub fn synthesize(scene: &SyntheticScene, seed: u64) -> Result<SyntheticVideo> {
    scene.validate()?;
    let size = scene.size();
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let pixel_noise =
        Normal::new(0.0, scene.pixel_noise).map_err(|e| Error::InvalidValue(e.to_string()))?;
    let feature_noise =
        Normal::new(0.0, scene.feature_noise).map_err(|e| Error::InvalidValue(e.to_string()))?;
    let prototype = unit_gaussian(&mut rng, scene.feature_dim);

    let interior = scene.frames.saturating_sub(2);
    let misses = ((scene.miss_rate * scene.frames as f64).round() as usize).min(interior);
    let mut miss_frames: Vec<usize> = sample(&mut rng, interior, misses)
        .into_iter()
        .map(|i| i + 1)
        .collect();
    miss_frames.sort_unstable();

    let mut out = SyntheticVideo {
        scene: scene.clone(),
        frames: Vec::new(),
        proposals: Vec::new(),
        is_true: Vec::new(),
        motion: Vec::new(),
        flows: Vec::new(),
        superpixels: Vec::new(),
        ground_truth: Vec::new(),
        miss_frames: miss_frames.clone(),
    };
    let clutter = scene.clutter_box();
    let (dc_lo, dc_hi) = scene.distractor_confidence;
    let (wc_lo, wc_hi) = scene.miss_true_confidence;

    for t in 0..scene.frames {
        let regions = scene.regions(t);
        let pixels = regions
            .iter()
            .map(|&r| {
                scene
                    .colour_of(r)
                    .map(|c| (c + pixel_noise.sample(&mut rng)).clamp(0.0, 1.0))
            })
            .collect();
        out.frames.push(RgbFrame::new(size, pixels)?);

        let on_object: Vec<bool> = regions.iter().map(|&r| r >= 2).collect();
        out.motion.push(DenseMap::new(
            size,
            regions
                .iter()
                .map(|&r| {
                    if r >= 2 && scene.objects[(r - 2) as usize].velocity != (0, 0) {
                        1.0
                    } else {
                        0.0
                    }
                })
                .collect(),
        )?);
        if t + 1 < scene.frames {
            let flow = |axis: usize| -> Result<DenseMap<f64>> {
                DenseMap::new(
                    size,
                    regions
                        .iter()
                        .map(|&r| {
                            if r < 2 {
                                return 0.0;
                            }
                            let v = scene.objects[(r - 2) as usize].velocity;
                            (if axis == 0 { v.0 } else { v.1 }) as f64
                        })
                        .collect(),
                )
            };
            out.flows.push((flow(0)?, flow(1)?));
        }
        out.superpixels
            .push(grid_superpixels(size, scene.superpixel_cell, &regions)?);
        out.ground_truth.push(if t % scene.gt_every == 0 {
            Some(LabelMap::new(
                size,
                on_object.iter().map(|&o| i32::from(o)).collect(),
            )?)
        } else {
            None
        });

        let objects: Vec<BoundingBox> = (0..scene.objects.len())
            .filter_map(|i| scene.object_box(i, t))
            .collect();
        // random boxes stay clear of the object and clutter proposals
        let keep_out: Vec<BoundingBox> = objects
            .iter()
            .chain(&clutter)
            .map(|o| o.expand(scene.jitter + 2, size))
            .collect();
        let random_box = |rng: &mut ChaCha8Rng| -> BoundingBox {
            let mut last = size.full_box();
            for _ in 0..100 {
                let w = rng.random_range(8..=20u32).min(size.width);
                let h = rng.random_range(8..=20u32).min(size.height);
                let x = rng.random_range(0..=size.width - w);
                let y = rng.random_range(0..=size.height - h);
                last = BoundingBox::new(x, y, x + w, y + h).expect("non-empty box");
                if keep_out.iter().all(|o| o.intersection_area(&last) == 0) {
                    break;
                }
            }
            last
        };
        let mut push =
            |rng: &mut ChaCha8Rng, b: BoundingBox, truth: bool, weak: bool| -> Result<()> {
                let (appearance, confidence, feature) = if truth && !weak {
                    let f = prototype
                        .iter()
                        .map(|p| p + feature_noise.sample(rng))
                        .collect();
                    (rng.random_range(0.6..1.0), rng.random_range(0.7..0.95), f)
                } else if truth {
                    let f = prototype
                        .iter()
                        .map(|p| p + feature_noise.sample(rng))
                        .collect();
                    (
                        rng.random_range(0.2..0.4),
                        rng.random_range(wc_lo..wc_hi),
                        f,
                    )
                } else {
                    (
                        rng.random_range(0.2..0.6),
                        rng.random_range(dc_lo..dc_hi),
                        unit_gaussian(rng, scene.feature_dim),
                    )
                };
                out.proposals.push(RegionProposal::new(
                    t,
                    BinaryMask::from_box(size, &b),
                    appearance,
                    confidence,
                    feature,
                )?);
                out.is_true.push(truth);
                Ok(())
            };

        if miss_frames.contains(&t) {
            if let Some(&o) = objects.first() {
                for _ in 0..scene.miss_true {
                    let b = jittered(o, scene.jitter, size, &mut rng);
                    push(&mut rng, b, true, true)?;
                }
            }
            if let Some(c) = clutter {
                for _ in 0..scene.miss_clutter {
                    let b = jittered(c, scene.jitter, size, &mut rng);
                    push(&mut rng, b, false, false)?;
                }
            }
            for _ in 0..scene.miss_random {
                let b = random_box(&mut rng);
                push(&mut rng, b, false, false)?;
            }
            continue;
        }
        let distractors = if objects.is_empty() {
            scene.slots_per_frame
        } else {
            (scene.noise_rate * scene.slots_per_frame as f64).round() as usize
        };
        let around_clutter = if clutter.is_some() {
            (scene.clutter_share * distractors as f64).round() as usize
        } else {
            0
        };
        for _ in 0..scene.slots_per_frame - distractors {
            let o = objects[rng.random_range(0..objects.len())];
            let b = jittered(o, scene.jitter, size, &mut rng);
            push(&mut rng, b, true, false)?;
        }
        for k in 0..distractors {
            let b = match clutter {
                Some(c) if k < around_clutter => jittered(c, scene.jitter, size, &mut rng),
                _ => random_box(&mut rng),
            };
            push(&mut rng, b, false, false)?;
        }
    }
    Ok(out)
}

/// Grid cells split along region boundaries, numbered in raster order of
/// their first pixel.
fn grid_superpixels(size: FrameSize, cell: u32, regions: &[u32]) -> Result<LabelMap> {
    let cols = size.width.div_ceil(cell);
    let mut ids: HashMap<(u32, u32), i32> = HashMap::new();
    let mut labels = Vec::with_capacity(size.pixel_count());
    for y in 0..size.height {
        for x in 0..size.width {
            let key = ((y / cell) * cols + x / cell, regions[size.index(x, y)]);
            let next = ids.len() as i32;
            labels.push(*ids.entry(key).or_insert(next));
        }
    }
    LabelMap::new(size, labels)
}

const FRAME_PATTERN: &str = "frames/{:04}.png";
const MOTION_PATTERN: &str = "motion/{:04}.fmap";
const FLOW_U_PATTERN: &str = "flow/{:04}.u.fmap";
const FLOW_V_PATTERN: &str = "flow/{:04}.v.fmap";
const SUPERPIXEL_PATTERN: &str = "superpixels/{:04}.imap";
const GT_PATTERN: &str = "gt/{:04}.imap";
pub const MANIFEST_NAME: &str = "manifest.txt";

/// Writes a synthesized video under `dir` and returns its manifest, which is
/// also saved as `dir/manifest.txt`.
pub fn write_synthetic(video: &SyntheticVideo, dir: &Path) -> Result<VideoManifest> {
    let scene = &video.scene;
    let manifest = VideoManifest {
        base_dir: dir.to_path_buf(),
        video: scene.video.clone(),
        frames: scene.frames,
        size: scene.size(),
        classes: vec![scene.class.clone()],
        feature_dim: scene.feature_dim,
        frame_pattern: FRAME_PATTERN.into(),
        motion_pattern: MOTION_PATTERN.into(),
        proposals: vec!["proposals.tsv".into()],
        flow_patterns: Some((FLOW_U_PATTERN.into(), FLOW_V_PATTERN.into())),
        superpixel_pattern: Some(SUPERPIXEL_PATTERN.into()),
        gt_pattern: Some(GT_PATTERN.into()),
    };
    let path =
        |pattern: &str, t: usize| dir.join(expand_pattern(pattern, t).expect("fixed pattern"));
    for t in 0..scene.frames {
        write_frame(&path(FRAME_PATTERN, t), &video.frames[t])?;
        write_fmap(&path(MOTION_PATTERN, t), &video.motion[t])?;
        write_imap(&path(SUPERPIXEL_PATTERN, t), &video.superpixels[t])?;
        if let Some(gt) = &video.ground_truth[t] {
            write_imap(&path(GT_PATTERN, t), gt)?;
        }
    }
    for (t, (u, v)) in video.flows.iter().enumerate() {
        write_fmap(&path(FLOW_U_PATTERN, t), u)?;
        write_fmap(&path(FLOW_V_PATTERN, t), v)?;
    }
    write_file(
        &dir.join("proposals.tsv"),
        render_proposals(&video.proposals, false),
    )?;
    write_file(&dir.join(MANIFEST_NAME), manifest.render())?;
    Ok(manifest)
}

/// [`synthesize`] followed by [`write_synthetic`].
pub fn generate_synthetic(scene: &SyntheticScene, seed: u64, dir: &Path) -> Result<VideoManifest> {
    write_synthetic(&synthesize(scene, seed)?, dir)
}
