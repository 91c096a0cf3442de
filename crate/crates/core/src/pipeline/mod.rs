//! The runnable pipeline: manifests, configuration, file formats, stage
//! orchestration, evaluation and synthetic test videos.

pub mod config;
pub mod eval;
pub mod formats;
pub mod kv;
pub mod manifest;
pub mod run;
pub mod synth;

pub use config::{PipelineConfig, PoolingWeight, SelectionConfig, SEED_ENV};
pub use eval::{evaluate, EvalReport, FrameIou, VideoLabels};
pub use manifest::VideoManifest;
pub use run::{
    evaluate_dir, run_stage, run_video, run_videos, Ablation, RunOptions, Stage, VideoData,
    VideoRun,
};
pub use synth::{generate_synthetic, synthesize, SyntheticScene, SyntheticVideo};
