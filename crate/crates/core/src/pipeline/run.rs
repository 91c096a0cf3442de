//! Stage orchestration.
//!
//! Output layout of one video directory:
//!
//! ```text
//! config.txt                   resolved configuration
//! scored.<class>.tsv           scored proposals
//! pooled/<class>/NNNN.fmap     first pooled confidence maps
//! regen.<class>.tsv            regenerated proposals
//! tracks.<class>.txt           mined tracks
//! instance.<class>.txt         selection instance built from the tracks
//! selection.<class>.txt        selected track indices
//! confidence/<class>/NNNN.fmap map fed to segmentation
//! labels/NNNN.imap             final labeling (0 background, k+1 class k)
//! segmentation.txt             final energy and expansion trace
//! eval.txt                     IoU report, when ground truth exists
//! ```

use std::fmt;
use std::path::{Path, PathBuf};
use std::str::FromStr;

use rayon::prelude::*;

use super::config::{PipelineConfig, PoolingWeight};
use super::eval::{evaluate, EvalReport, VideoLabels};
use super::formats::{
    parse_proposals, parse_regenerated, parse_selection, parse_tracks, read_fmap, read_imap,
    read_text, render_instance, render_proposals, render_regenerated, render_selection,
    render_tracks, write_file, write_fmap, write_imap,
};
use super::manifest::VideoManifest;
use crate::error::{Error, Result};
use crate::geometry::{DenseMap, FlowField, FrameSize, LabelMap, RgbFrame};
use crate::mining::{
    inherit_features, mine_tracks, regenerate, FlowShiftTracker, Mining, RegeneratedProposal, Track,
};
use crate::pooling::{pool_frame, pool_tracks, reduce_to_superpixels};
use crate::proposal::RegionProposal;
use crate::scoring::score_video;
use crate::segmentation::{build_graph, segment, to_label_maps, Segmentation};
use crate::selection::{lazy_greedy_select, SelectionInstance, SelectionResult};
use crate::superpixels::SuperpixelMap;

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord)]
pub enum Stage {
    Score,
    Pool,
    Regen,
    Track,
    Select,
    Segment,
}

impl Stage {
    pub const ALL: [Stage; 6] = [
        Stage::Score,
        Stage::Pool,
        Stage::Regen,
        Stage::Track,
        Stage::Select,
        Stage::Segment,
    ];

    pub fn name(self) -> &'static str {
        match self {
            Stage::Score => "score",
            Stage::Pool => "pool",
            Stage::Regen => "regen",
            Stage::Track => "track",
            Stage::Select => "select",
            Stage::Segment => "segment",
        }
    }
}

impl FromStr for Stage {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        Stage::ALL
            .into_iter()
            .find(|st| st.name() == s)
            .ok_or_else(|| Error::parse("stage", format!("unknown stage `{s}`")))
    }
}

impl fmt::Display for Stage {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

/// Which confidence map segmentation starts from.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum Ablation {
    /// Pooled selected tracks.
    #[default]
    None,
    /// First pooled map; mining and selection are skipped.
    Pool,
    /// Pooled mined tracks without selection.
    Track,
}

impl FromStr for Ablation {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "none" => Ok(Ablation::None),
            "pool" => Ok(Ablation::Pool),
            "track" => Ok(Ablation::Track),
            other => Err(Error::parse(
                "ablation",
                format!("unknown ablation `{other}`"),
            )),
        }
    }
}

impl fmt::Display for Ablation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Ablation::None => "none",
            Ablation::Pool => "pool",
            Ablation::Track => "track",
        })
    }
}

#[derive(Debug, Clone, Copy, Default, PartialEq, Eq)]
pub struct RunOptions {
    pub stop_after: Option<Stage>,
    pub ablation: Ablation,
}

/// Every input of one video, loaded and checked against the manifest.
#[derive(Debug, Clone)]
pub struct VideoData {
    pub manifest: VideoManifest,
    pub frames: Vec<RgbFrame<f64>>,
    /// Proposals per class, in manifest class order.
    pub proposals: Vec<Vec<RegionProposal<f64>>>,
    pub motion: Vec<DenseMap<f64>>,
    pub flows: Vec<Option<FlowField<f64>>>,
    pub superpixels: Vec<SuperpixelMap>,
    pub ground_truth: Vec<Option<LabelMap>>,
}

impl VideoData {
    pub fn load(manifest: &VideoManifest, cfg: &PipelineConfig) -> Result<Self> {
        let proposals = (0..manifest.classes.len())
            .map(|c| {
                let path = manifest.proposals_path(c);
                parse_proposals(
                    &read_text(&path)?,
                    manifest.size,
                    manifest.frames,
                    manifest.feature_dim,
                    &path.display().to_string(),
                )
            })
            .collect::<Result<_>>()?;
        Ok(VideoData {
            manifest: manifest.clone(),
            frames: manifest.load_frames()?,
            proposals,
            motion: manifest.load_motion()?,
            flows: manifest.load_flows()?,
            superpixels: manifest.load_superpixels(cfg.superpixel_cell)?,
            ground_truth: manifest.load_ground_truth()?,
        })
    }

    pub fn size(&self) -> FrameSize {
        self.manifest.size
    }

    pub fn frame_count(&self) -> usize {
        self.manifest.frames
    }
}

pub fn score_proposals(
    proposals: &[RegionProposal<f64>],
    motion: &[DenseMap<f64>],
    cfg: &PipelineConfig,
) -> Result<Vec<RegionProposal<f64>>> {
    let mut scored = proposals.to_vec();
    score_video(&mut scored, motion, &cfg.scoring)?;
    Ok(scored)
}

/// First pooling: every proposal of a frame weighted by the configured
/// per-proposal value. Values are rounded to `f32`, the precision of the
/// map files, so a full run and a stage-by-stage run agree bit for bit.
pub fn pool_proposals(
    scored: &[RegionProposal<f64>],
    weight: PoolingWeight,
    frames: usize,
    size: FrameSize,
) -> Result<Vec<DenseMap<f64>>> {
    let mut per_frame = vec![Vec::new(); frames];
    for p in scored {
        let w = match weight {
            PoolingWeight::Classifier => p.classifier_confidence,
            PoolingWeight::Rescored => p.rescored,
        };
        per_frame[p.frame_index].push((&p.mask, w));
    }
    per_frame
        .iter()
        .map(|props| pool_frame(size, props)?.map(|v| v as f32 as f64))
        .collect()
}

pub fn regenerate_proposals(
    pooled: &[DenseMap<f64>],
    scored: &[RegionProposal<f64>],
    cfg: &PipelineConfig,
    feature_dim: usize,
) -> Vec<RegeneratedProposal<f64>> {
    let mut out: Vec<RegeneratedProposal<f64>> = pooled
        .iter()
        .enumerate()
        .flat_map(|(t, map)| regenerate(map, t, &cfg.mining))
        .collect();
    inherit_features(&mut out, scored, feature_dim);
    out
}

pub fn mine(
    regenerated: &[RegeneratedProposal<f64>],
    flows: &[Option<FlowField<f64>>],
    frames: usize,
    size: FrameSize,
    cfg: &PipelineConfig,
) -> Mining<f64> {
    let tracker = FlowShiftTracker::new(size, flows.to_vec());
    mine_tracks(regenerated, &tracker, frames, &cfg.mining)
}

pub fn selection_instance(
    tracks: &[Track<f64>],
    cfg: &PipelineConfig,
) -> Result<SelectionInstance<f64>> {
    let s = &cfg.selection;
    SelectionInstance::from_tracks(tracks, s.delta, s.lambda, s.budget)
}

pub fn select_tracks(instance: &SelectionInstance<f64>) -> SelectionResult<f64> {
    lazy_greedy_select(instance)
}

/// Pools the given tracks (all of them for `None`).
pub fn pool_track_set(
    tracks: &[Track<f64>],
    selected: Option<&[usize]>,
    frames: usize,
    size: FrameSize,
) -> Result<Vec<DenseMap<f64>>> {
    let chosen: Vec<&Track<f64>> = match selected {
        Some(ids) => ids
            .iter()
            .map(|&i| {
                tracks.get(i).ok_or_else(|| {
                    Error::InvalidValue(format!("selected track {i} does not exist"))
                })
            })
            .collect::<Result<_>>()?,
        None => tracks.iter().collect(),
    };
    Ok(pool_tracks(&chosen, frames, size)?
        .into_iter()
        .map(|p| p.map)
        .collect())
}

/// Segments the video from per-class, per-frame confidence maps.
pub fn segment_video(
    data: &VideoData,
    confidence: &[Vec<DenseMap<f64>>],
    cfg: &PipelineConfig,
) -> Result<(Segmentation<f64>, Vec<LabelMap>)> {
    let graph = build_graph(&data.superpixels, &data.frames, &data.flows)?;
    let per_node: Vec<Vec<f64>> = confidence
        .iter()
        .map(|maps| {
            let mut v = Vec::with_capacity(graph.node_count());
            for (map, sp) in maps.iter().zip(&data.superpixels) {
                v.extend(reduce_to_superpixels(map, sp)?);
            }
            Ok(v)
        })
        .collect::<Result<_>>()?;
    let seg = segment(&graph, &per_node, &cfg.segmentation)?;
    let labels = to_label_maps(&graph, &seg.node_labels, data.size());
    Ok((seg, labels))
}

/// Intermediate results of one class.
#[derive(Debug, Clone, Default)]
pub struct ClassRun {
    pub scored: Vec<RegionProposal<f64>>,
    pub pooled: Vec<DenseMap<f64>>,
    pub regenerated: Vec<RegeneratedProposal<f64>>,
    pub tracks: Vec<Track<f64>>,
    pub selection: Option<SelectionResult<f64>>,
    /// The map segmentation starts from.
    pub confidence: Vec<DenseMap<f64>>,
}

#[derive(Debug, Clone)]
pub struct VideoRun {
    pub video: String,
    pub classes: Vec<ClassRun>,
    pub segmentation: Option<Segmentation<f64>>,
    pub labels: Option<Vec<LabelMap>>,
    pub report: Option<EvalReport>,
}

/// Optional output directory; every write is a no-op without one.
struct Sink<'a>(Option<&'a Path>);

impl Sink<'_> {
    fn text(&self, name: &str, text: &str) -> Result<()> {
        match self.0 {
            Some(d) => write_file(&d.join(name), text),
            None => Ok(()),
        }
    }

    fn fmaps(&self, dir: &str, class: &str, maps: &[DenseMap<f64>]) -> Result<()> {
        if let Some(d) = self.0 {
            for (t, m) in maps.iter().enumerate() {
                write_fmap(&map_path(d, dir, class, t), m)?;
            }
        }
        Ok(())
    }
}

fn map_path(root: &Path, dir: &str, class: &str, t: usize) -> PathBuf {
    root.join(dir).join(class).join(format!("{t:04}.fmap"))
}

fn label_path(root: &Path, t: usize) -> PathBuf {
    root.join("labels").join(format!("{t:04}.imap"))
}

fn render_segmentation(seg: &Segmentation<f64>) -> String {
    let trace: Vec<String> = seg.trace.iter().map(f64::to_string).collect();
    format!(
        "energy {}\ncolour_used {}\ntrace {}\n",
        seg.energy,
        seg.colour_used,
        trace.join(",")
    )
}

fn stage<T>(st: Stage, f: impl FnOnce() -> Result<T>) -> Result<T> {
    f().map_err(|e| e.in_stage(st.name()))
}

fn write_labels(sink: &Sink, labels: &[LabelMap]) -> Result<()> {
    if let Some(d) = sink.0 {
        for (t, l) in labels.iter().enumerate() {
            write_imap(&label_path(d, t), l)?;
        }
    }
    Ok(())
}

fn evaluate_video(data: &VideoData, labels: &[LabelMap]) -> Result<Option<EvalReport>> {
    if data.ground_truth.iter().all(Option::is_none) {
        return Ok(None);
    }
    evaluate(&[video_labels(data, labels.to_vec())]).map(Some)
}

fn video_labels(data: &VideoData, predicted: Vec<LabelMap>) -> VideoLabels {
    VideoLabels {
        video: data.manifest.video.clone(),
        classes: data.manifest.classes.clone(),
        predicted,
        ground_truth: data.ground_truth.clone(),
    }
}

/// Runs the pipeline on one video, writing every intermediate result under
/// `out` when given. A failing stage aborts the run; whatever was written
/// before it stays on disk.
pub fn run_video(
    data: &VideoData,
    cfg: &PipelineConfig,
    opts: RunOptions,
    out: Option<&Path>,
) -> Result<VideoRun> {
    cfg.validate()?;
    let sink = Sink(out);
    sink.text("config.txt", &cfg.render())?;
    let (frames, size) = (data.frame_count(), data.size());
    let past = |st: Stage| opts.stop_after.is_some_and(|s| s < st);
    let mut classes = Vec::new();
    for (c, name) in data.manifest.classes.iter().enumerate() {
        let mut run = ClassRun {
            scored: stage(Stage::Score, || {
                score_proposals(&data.proposals[c], &data.motion, cfg)
            })?,
            ..ClassRun::default()
        };
        sink.text(
            &format!("scored.{name}.tsv"),
            &render_proposals(&run.scored, true),
        )?;
        if past(Stage::Pool) {
            classes.push(run);
            continue;
        }
        run.pooled = stage(Stage::Pool, || {
            pool_proposals(&run.scored, cfg.pooling_weight, frames, size)
        })?;
        sink.fmaps("pooled", name, &run.pooled)?;
        if opts.ablation == Ablation::Pool {
            run.confidence = run.pooled.clone();
            classes.push(run);
            continue;
        }
        if past(Stage::Regen) {
            classes.push(run);
            continue;
        }
        run.regenerated = stage(Stage::Regen, || {
            Ok(regenerate_proposals(
                &run.pooled,
                &run.scored,
                cfg,
                data.manifest.feature_dim,
            ))
        })?;
        sink.text(
            &format!("regen.{name}.tsv"),
            &render_regenerated(&run.regenerated),
        )?;
        if past(Stage::Track) {
            classes.push(run);
            continue;
        }
        run.tracks = stage(Stage::Track, || {
            Ok(mine(&run.regenerated, &data.flows, frames, size, cfg).tracks)
        })?;
        sink.text(&format!("tracks.{name}.txt"), &render_tracks(&run.tracks))?;
        if opts.ablation == Ablation::Track {
            run.confidence = stage(Stage::Track, || {
                pool_track_set(&run.tracks, None, frames, size)
            })?;
            classes.push(run);
            continue;
        }
        if past(Stage::Select) {
            classes.push(run);
            continue;
        }
        let (instance, selection) = stage(Stage::Select, || {
            let inst = selection_instance(&run.tracks, cfg)?;
            let sel = select_tracks(&inst);
            Ok((inst, sel))
        })?;
        sink.text(&format!("instance.{name}.txt"), &render_instance(&instance))?;
        sink.text(
            &format!("selection.{name}.txt"),
            &render_selection(&selection),
        )?;
        run.confidence = stage(Stage::Select, || {
            pool_track_set(&run.tracks, Some(&selection.selected), frames, size)
        })?;
        run.selection = Some(selection);
        classes.push(run);
    }

    let mut result = VideoRun {
        video: data.manifest.video.clone(),
        classes,
        segmentation: None,
        labels: None,
        report: None,
    };
    if past(Stage::Segment) {
        return Ok(result);
    }
    for (run, name) in result.classes.iter().zip(&data.manifest.classes) {
        sink.fmaps("confidence", name, &run.confidence)?;
    }
    let confidence: Vec<Vec<DenseMap<f64>>> = result
        .classes
        .iter()
        .map(|r| r.confidence.clone())
        .collect();
    let (seg, labels) = stage(Stage::Segment, || segment_video(data, &confidence, cfg))?;
    write_labels(&sink, &labels)?;
    sink.text("segmentation.txt", &render_segmentation(&seg))?;
    result.report = evaluate_video(data, &labels)?;
    if let Some(r) = &result.report {
        sink.text("eval.txt", &r.render())?;
    }
    result.segmentation = Some(seg);
    result.labels = Some(labels);
    Ok(result)
}

/// Runs several videos, `jobs` at a time. With one manifest its outputs go
/// straight into `out`; with several, each video gets `out/<video>/` and a
/// combined `out/eval.txt` is written.
pub fn run_videos(
    manifests: &[VideoManifest],
    cfg: &PipelineConfig,
    opts: RunOptions,
    out: &Path,
    jobs: usize,
) -> Result<(Vec<VideoRun>, Option<EvalReport>)> {
    let single = manifests.len() == 1;
    let dir_of = |m: &VideoManifest| {
        if single {
            out.to_path_buf()
        } else {
            out.join(&m.video)
        }
    };
    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(jobs.max(1))
        .build()
        .map_err(|e| Error::InvalidValue(e.to_string()))?;
    let runs: Vec<(VideoData, VideoRun)> = pool.install(|| {
        manifests
            .par_iter()
            .map(|m| {
                let data = VideoData::load(m, cfg)?;
                let run = run_video(&data, cfg, opts, Some(&dir_of(m)))?;
                Ok((data, run))
            })
            .collect::<Result<_>>()
    })?;
    let combined = if single {
        runs[0].1.report.clone()
    } else {
        let labelled: Vec<VideoLabels> = runs
            .iter()
            .filter(|(d, _)| d.ground_truth.iter().any(Option::is_some))
            .filter_map(|(d, r)| r.labels.clone().map(|l| video_labels(d, l)))
            .collect();
        let report = if labelled.is_empty() {
            None
        } else {
            Some(evaluate(&labelled)?)
        };
        if let Some(r) = &report {
            write_file(&out.join("eval.txt"), r.render())?;
        }
        write_file(&out.join("config.txt"), cfg.render())?;
        report
    };
    Ok((runs.into_iter().map(|(_, r)| r).collect(), combined))
}

fn read_maps(dir: &Path, sub: &str, class: &str, frames: usize) -> Result<Vec<DenseMap<f64>>> {
    (0..frames)
        .map(|t| read_fmap(&map_path(dir, sub, class, t)))
        .collect()
}

fn read_scored(dir: &Path, data: &VideoData, class: &str) -> Result<Vec<RegionProposal<f64>>> {
    let path = dir.join(format!("scored.{class}.tsv"));
    let m = &data.manifest;
    parse_proposals(
        &read_text(&path)?,
        m.size,
        m.frames,
        m.feature_dim,
        &path.display().to_string(),
    )
}

fn read_tracks(dir: &Path, data: &VideoData, class: &str) -> Result<Vec<Track<f64>>> {
    let path = dir.join(format!("tracks.{class}.txt"));
    parse_tracks(&read_text(&path)?, data.size(), &path.display().to_string())
}

/// Runs a single stage inside `dir`, reading the previous stage's outputs
/// from the same directory. `segment` also evaluates when ground truth
/// exists.
pub fn run_stage(
    data: &VideoData,
    cfg: &PipelineConfig,
    st: Stage,
    ablation: Ablation,
    dir: &Path,
) -> Result<()> {
    cfg.validate()?;
    let sink = Sink(Some(dir));
    sink.text("config.txt", &cfg.render())?;
    let (frames, size) = (data.frame_count(), data.size());
    let classes = &data.manifest.classes;
    if st == Stage::Segment {
        let mut confidence = Vec::new();
        for name in classes {
            let maps = match ablation {
                Ablation::Pool => read_maps(dir, "pooled", name, frames)?,
                Ablation::Track => {
                    pool_track_set(&read_tracks(dir, data, name)?, None, frames, size)?
                }
                Ablation::None => {
                    let path = dir.join(format!("selection.{name}.txt"));
                    let selected =
                        parse_selection(&read_text(&path)?, &path.display().to_string())?;
                    pool_track_set(
                        &read_tracks(dir, data, name)?,
                        Some(&selected),
                        frames,
                        size,
                    )?
                }
            };
            sink.fmaps("confidence", name, &maps)?;
            confidence.push(maps);
        }
        let (seg, labels) = stage(st, || segment_video(data, &confidence, cfg))?;
        write_labels(&sink, &labels)?;
        sink.text("segmentation.txt", &render_segmentation(&seg))?;
        if let Some(r) = evaluate_video(data, &labels)? {
            sink.text("eval.txt", &r.render())?;
        }
        return Ok(());
    }
    for (c, name) in classes.iter().enumerate() {
        match st {
            Stage::Score => {
                let scored = stage(st, || {
                    score_proposals(&data.proposals[c], &data.motion, cfg)
                })?;
                sink.text(
                    &format!("scored.{name}.tsv"),
                    &render_proposals(&scored, true),
                )?;
            }
            Stage::Pool => {
                let scored = read_scored(dir, data, name)?;
                let pooled = stage(st, || {
                    pool_proposals(&scored, cfg.pooling_weight, frames, size)
                })?;
                sink.fmaps("pooled", name, &pooled)?;
            }
            Stage::Regen => {
                let scored = read_scored(dir, data, name)?;
                let pooled = read_maps(dir, "pooled", name, frames)?;
                let regen = regenerate_proposals(&pooled, &scored, cfg, data.manifest.feature_dim);
                sink.text(&format!("regen.{name}.tsv"), &render_regenerated(&regen))?;
            }
            Stage::Track => {
                let path = dir.join(format!("regen.{name}.tsv"));
                let regen =
                    parse_regenerated(&read_text(&path)?, size, &path.display().to_string())?;
                let mining = mine(&regen, &data.flows, frames, size, cfg);
                sink.text(
                    &format!("tracks.{name}.txt"),
                    &render_tracks(&mining.tracks),
                )?;
            }
            Stage::Select => {
                let tracks = read_tracks(dir, data, name)?;
                let inst = stage(st, || selection_instance(&tracks, cfg))?;
                sink.text(&format!("instance.{name}.txt"), &render_instance(&inst))?;
                sink.text(
                    &format!("selection.{name}.txt"),
                    &render_selection(&select_tracks(&inst)),
                )?;
            }
            Stage::Segment => unreachable!("handled above"),
        }
    }
    Ok(())
}

/// Reads the labels written by a previous run and evaluates them.
pub fn evaluate_dir(data: &VideoData, dir: &Path) -> Result<EvalReport> {
    let labels = (0..data.frame_count())
        .map(|t| read_imap(&label_path(dir, t)))
        .collect::<Result<Vec<_>>>()?;
    evaluate(&[video_labels(data, labels)])
}
