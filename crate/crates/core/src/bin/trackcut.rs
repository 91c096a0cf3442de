use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};

use trackcut::pipeline::formats::{parse_instance, read_text, render_selection, write_file};
use trackcut::pipeline::kv::KvFile;
use trackcut::pipeline::run::select_tracks;
use trackcut::pipeline::synth::{generate_synthetic, SyntheticScene};
use trackcut::pipeline::{
    evaluate_dir, run_stage, run_videos, Ablation, PipelineConfig, RunOptions, Stage, VideoData,
    VideoManifest,
};
use trackcut::Error;

/// Video object segmentation from region proposals.
#[derive(Parser)]
#[command(name = "trackcut", version)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Args)]
struct ConfigArgs {
    /// Key-value config file; keys not given keep their defaults.
    #[arg(long)]
    config: Option<PathBuf>,
    /// Override one config key, e.g. `--set selection.delta=0.2`.
    #[arg(long = "set", value_name = "KEY=VALUE")]
    overrides: Vec<String>,
}

#[derive(Args)]
struct StageArgs {
    #[arg(long)]
    manifest: PathBuf,
    /// Working directory holding the artifacts of earlier stages.
    #[arg(long)]
    dir: PathBuf,
    #[command(flatten)]
    config: ConfigArgs,
}

#[derive(Subcommand)]
enum Command {
    /// Score proposals by appearance and motion.
    Score(StageArgs),
    /// Pool scored proposals into per-frame confidence maps.
    Pool(StageArgs),
    /// Regenerate proposals from the pooled maps.
    Regen(StageArgs),
    /// Link regenerated proposals into tracks.
    Track(StageArgs),
    /// Select a subset of tracks.
    Select {
        /// Solve a standalone instance file instead of a pipeline stage.
        #[arg(long, conflicts_with_all = ["manifest", "dir"])]
        instance: Option<PathBuf>,
        /// Where to write the selection of `--instance`; stdout if absent.
        #[arg(long, requires = "instance")]
        out: Option<PathBuf>,
        #[arg(long, required_unless_present = "instance")]
        manifest: Option<PathBuf>,
        #[arg(long, required_unless_present = "instance")]
        dir: Option<PathBuf>,
        #[command(flatten)]
        config: ConfigArgs,
    },
    /// Segment from the selected tracks, or from an ablation's map.
    Segment {
        #[command(flatten)]
        stage: StageArgs,
        /// `none`, `pool` or `track`.
        #[arg(long, default_value = "none")]
        ablation: Ablation,
    },
    /// Evaluate the labels in a run directory against ground truth.
    Eval {
        #[arg(long)]
        manifest: PathBuf,
        #[arg(long)]
        dir: PathBuf,
    },
    /// Run every stage on one or more videos.
    Run {
        #[arg(required = true)]
        manifests: Vec<PathBuf>,
        #[arg(long)]
        out: PathBuf,
        #[arg(long, default_value_t = 1)]
        jobs: usize,
        #[arg(long)]
        stop_after: Option<Stage>,
        #[arg(long, default_value = "none")]
        ablation: Ablation,
        #[command(flatten)]
        config: ConfigArgs,
    },
    /// Write a synthetic moving-square video with ground truth.
    Synth {
        #[arg(long)]
        out: PathBuf,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        /// Override one scene parameter, e.g. `--set noise_rate=0.5`.
        #[arg(long = "set", value_name = "KEY=VALUE")]
        overrides: Vec<String>,
    },
}

fn split_override(s: &str) -> Result<(&str, &str), Error> {
    s.split_once('=')
        .map(|(k, v)| (k.trim(), v.trim()))
        .ok_or_else(|| Error::InvalidValue(format!("expected KEY=VALUE, got `{s}`")))
}

fn load_config(args: &ConfigArgs) -> Result<PipelineConfig, Error> {
    let mut cfg = match &args.config {
        Some(path) => PipelineConfig::from_kv(&KvFile::parse(
            &read_text(path)?,
            path.display().to_string(),
        )?)?,
        None => PipelineConfig::default(),
    };
    for o in &args.overrides {
        let (k, v) = split_override(o)?;
        cfg.set(k, v)?;
    }
    cfg.apply_env()?;
    cfg.validate()?;
    Ok(cfg)
}

fn stage_cmd(args: &StageArgs, st: Stage, ablation: Ablation) -> Result<(), Error> {
    let cfg = load_config(&args.config)?;
    let data = VideoData::load(&VideoManifest::load(&args.manifest)?, &cfg)?;
    run_stage(&data, &cfg, st, ablation, &args.dir)
}

fn solve_instance(path: &Path, out: Option<&Path>) -> Result<(), Error> {
    let inst = parse_instance(&read_text(path)?, &path.display().to_string())?;
    let text = render_selection(&select_tracks(&inst));
    match out {
        Some(o) => write_file(o, text),
        None => {
            print!("{text}");
            Ok(())
        }
    }
}

fn execute(cmd: Command) -> Result<(), Error> {
    match cmd {
        Command::Score(a) => stage_cmd(&a, Stage::Score, Ablation::None),
        Command::Pool(a) => stage_cmd(&a, Stage::Pool, Ablation::None),
        Command::Regen(a) => stage_cmd(&a, Stage::Regen, Ablation::None),
        Command::Track(a) => stage_cmd(&a, Stage::Track, Ablation::None),
        Command::Select {
            instance: Some(path),
            out,
            ..
        } => solve_instance(&path, out.as_deref()),
        Command::Select {
            manifest,
            dir,
            config,
            ..
        } => {
            // clap guarantees both when --instance is absent
            let args = StageArgs {
                manifest: manifest.expect("required"),
                dir: dir.expect("required"),
                config,
            };
            stage_cmd(&args, Stage::Select, Ablation::None)
        }
        Command::Segment { stage, ablation } => stage_cmd(&stage, Stage::Segment, ablation),
        Command::Eval { manifest, dir } => {
            let cfg = PipelineConfig::default();
            let data = VideoData::load(&VideoManifest::load(&manifest)?, &cfg)?;
            print!("{}", evaluate_dir(&data, &dir)?.render());
            Ok(())
        }
        Command::Run {
            manifests,
            out,
            jobs,
            stop_after,
            ablation,
            config,
        } => {
            let cfg = load_config(&config)?;
            let manifests = manifests
                .iter()
                .map(|p| VideoManifest::load(p))
                .collect::<Result<Vec<_>, _>>()?;
            let (_, report) = run_videos(
                &manifests,
                &cfg,
                RunOptions {
                    stop_after,
                    ablation,
                },
                &out,
                jobs,
            )?;
            if let Some(r) = report {
                println!("class_average = {}", r.class_average);
                println!("video_average = {}", r.video_average);
            }
            Ok(())
        }
        Command::Synth {
            out,
            seed,
            overrides,
        } => {
            let mut scene = SyntheticScene::default();
            for o in &overrides {
                let (k, v) = split_override(o)?;
                scene.set(k, v)?;
            }
            generate_synthetic(&scene, seed, &out)?;
            Ok(())
        }
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match execute(cli.command) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("trackcut: {e}");
            ExitCode::from(if e.is_validation() { 2 } else { 3 })
        }
    }
}
