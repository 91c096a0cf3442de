use std::fs;

use trackcut::pipeline::synth::{generate_synthetic, synthesize};
use trackcut::pipeline::{
    run_video, Ablation, PipelineConfig, RunOptions, SyntheticScene, VideoData,
};
use trackcut::selection::similarity;

#[test]
fn distractor_share_follows_noise_rate() {
    let scene = SyntheticScene::default();
    let (mut normal, mut normal_false, mut all, mut all_false) = (0, 0, 0, 0);
    for seed in 0..20 {
        let v = synthesize(&scene, seed).unwrap();
        for (p, &is_true) in v.proposals.iter().zip(&v.is_true) {
            all += 1;
            all_false += usize::from(!is_true);
            if !v.miss_frames.contains(&p.frame_index) {
                normal += 1;
                normal_false += usize::from(!is_true);
            }
        }
    }
    assert_eq!(normal_false as f64 / normal as f64, 0.3);
    // miss frames are mostly distractors
    let share = all_false as f64 / all as f64;
    assert!((0.3..0.4).contains(&share), "{share}");
}

#[test]
fn true_features_agree_and_distractors_do_not() {
    let v = synthesize(&SyntheticScene::default(), 1).unwrap();
    let mean = |pairs: Vec<f64>| pairs.iter().sum::<f64>() / pairs.len() as f64;
    let (mut tt, mut tf) = (Vec::new(), Vec::new());
    for (i, a) in v.proposals.iter().enumerate() {
        for (j, b) in v.proposals.iter().enumerate().skip(i + 1) {
            let s = similarity(&a.feature, &b.feature).unwrap();
            match (v.is_true[i], v.is_true[j]) {
                (true, true) => tt.push(s),
                (true, false) | (false, true) => tf.push(s),
                _ => {}
            }
        }
    }
    let (tt, tf) = (mean(tt), mean(tf));
    assert!(
        tt > 0.6 && tf.abs() < 0.1,
        "true-true {tt}, true-distractor {tf}"
    );
}

#[test]
fn written_video_is_reproducible() {
    let (a, b) = (tempfile::tempdir().unwrap(), tempfile::tempdir().unwrap());
    generate_synthetic(&SyntheticScene::default(), 9, a.path()).unwrap();
    generate_synthetic(&SyntheticScene::default(), 9, b.path()).unwrap();
    for name in [
        "proposals.tsv",
        "manifest.txt",
        "frames/0003.png",
        "gt/0003.imap",
        "flow/0003.u.fmap",
    ] {
        assert_eq!(
            fs::read(a.path().join(name)).unwrap(),
            fs::read(b.path().join(name)).unwrap(),
            "{name}"
        );
    }
}

/// Seed 0 is the acceptance scene; this checks that it is not a lucky draw.
/// Known failure modes on other seeds: a weak object proposal set on a miss
/// frame that leaves a superpixel strip uncovered, a clutter track pulled in
/// by a negative cross similarity, and a clutter share on the miss frame too
/// small to flip the ablation.
#[test]
fn most_seeds_show_the_selection_gain() {
    let cfg = PipelineConfig::default();
    let mut passed = Vec::new();
    for seed in 0..20 {
        let dir = tempfile::tempdir().unwrap();
        let manifest = generate_synthetic(&SyntheticScene::default(), seed, dir.path()).unwrap();
        let data = VideoData::load(&manifest, &cfg).unwrap();
        let report = |ablation| {
            run_video(
                &data,
                &cfg,
                RunOptions {
                    stop_after: None,
                    ablation,
                },
                None,
            )
            .unwrap()
            .report
            .unwrap()
        };
        let (full, ablated) = (report(Ablation::None), report(Ablation::Track));
        if full.min_frame_iou().unwrap() >= 0.9 && ablated.class_average < full.class_average {
            passed.push(seed);
        }
    }
    assert!(passed.len() >= 16, "only seeds {passed:?} passed");
}
