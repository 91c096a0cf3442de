//! Final labeling on a space-time superpixel graph: colour and semantic
//! unaries, contrast-sensitive Potts pairwise terms, alpha-expansion.

mod expansion;
mod gmm;
mod graph;
pub mod linalg3;
mod maxflow;
mod potentials;

pub use expansion::{alpha_expansion, energy_of, exhaustive_minimum, EnergyModel, Expansion};
pub use gmm::{fit_gmm, GaussianComponent, GaussianMixture, GmmConfig, GmmFit};
pub use graph::{build_graph, GraphNode, SuperpixelGraph};
pub use maxflow::{cut_capacity, max_flow, FlowNetwork, MaxFlow};
pub use potentials::{colour_unary, mean_sq_distance, pairwise_weight, semantic_unary};

use crate::error::{Error, Result};
use crate::geometry::LabelMap;
use crate::scalar::Real;

#[derive(Debug, Clone, PartialEq)]
pub struct SegmentationConfig {
    /// Weight of the semantic unary.
    pub lambda_o: f64,
    /// Weight of the pairwise term.
    pub lambda_p: f64,
    /// Superpixels with confidence at or above this feed the foreground
    /// colour model.
    pub fg_threshold: f64,
    /// Superpixels whose highest class confidence is below this feed the
    /// background colour model.
    pub bg_threshold: f64,
    pub eps_prob: f64,
    pub gmm: GmmConfig,
}

impl Default for SegmentationConfig {
    fn default() -> Self {
        SegmentationConfig {
            lambda_o: 1.0,
            lambda_p: 0.5,
            fg_threshold: 0.5,
            bg_threshold: 0.5,
            eps_prob: 1e-8,
            gmm: GmmConfig::default(),
        }
    }
}

impl SegmentationConfig {
    pub fn validate(&self) -> Result<()> {
        let ok = self.lambda_o >= 0.0
            && self.lambda_p >= 0.0
            && (0.0..=1.0).contains(&self.fg_threshold)
            && (0.0..=1.0).contains(&self.bg_threshold)
            && self.eps_prob > 0.0
            && self.eps_prob < 1.0;
        if ok {
            Ok(())
        } else {
            Err(Error::InvalidValue(
                "segmentation config out of range".into(),
            ))
        }
    }
}

#[derive(Debug, Clone)]
pub struct Segmentation<T> {
    /// Per node: 0 for background, `k + 1` for class `k`.
    pub node_labels: Vec<usize>,
    pub energy: T,
    pub trace: Vec<T>,
    /// False when a colour model could not be fitted and only the semantic
    /// unary was used.
    pub colour_used: bool,
}

/// Assembles the energy for `graph` given per-class, per-node confidences
/// (`confidence[k][i]` for class `k`, node `i`). Returns the model and
/// whether the colour term is included.
pub fn build_energy<T: Real>(
    graph: &SuperpixelGraph<T>,
    confidence: &[Vec<T>],
    cfg: &SegmentationConfig,
) -> Result<(EnergyModel<T>, bool)> {
    cfg.validate()?;
    let n = graph.node_count();
    if confidence.is_empty() {
        return Err(Error::InvalidValue(
            "segmentation needs at least one class".into(),
        ));
    }
    if let Some(c) = confidence.iter().find(|c| c.len() != n) {
        return Err(Error::SizeMismatch {
            expected: format!("{n} node confidences"),
            actual: format!("{}", c.len()),
        });
    }
    let eps = T::of(cfg.eps_prob);
    let max_conf: Vec<T> = (0..n)
        .map(|i| confidence.iter().fold(T::zero(), |m, c| m.max(c[i])))
        .collect();

    let colours: Vec<_> = graph.nodes.iter().map(|nd| nd.colour).collect();
    let fg_thr = T::of(cfg.fg_threshold);
    let bg_thr = T::of(cfg.bg_threshold);
    let fit = |samples: Vec<_>| -> Option<GaussianMixture<T>> {
        if samples.is_empty() {
            return None;
        }
        fit_gmm(&samples, &cfg.gmm).ok().map(|f| f.model)
    };
    let bg_model = fit((0..n)
        .filter(|&i| max_conf[i] < bg_thr)
        .map(|i| (colours[i], T::one() - max_conf[i]))
        .collect());
    let fg_models: Option<Vec<GaussianMixture<T>>> = confidence
        .iter()
        .map(|c| {
            fit((0..n)
                .filter(|&i| c[i] >= fg_thr)
                .map(|i| (colours[i], c[i]))
                .collect())
        })
        .collect();
    let colour_models = match (bg_model, fg_models) {
        (Some(bg), Some(fg)) => Some((bg, fg)),
        _ => None,
    };

    let lambda_o = T::of(cfg.lambda_o);
    let labels = confidence.len() + 1;
    let unary: Vec<Vec<T>> = (0..n)
        .map(|i| {
            let mut row = Vec::with_capacity(labels);
            row.push(lambda_o * semantic_unary(max_conf[i], false, eps));
            for c in confidence {
                row.push(lambda_o * semantic_unary(c[i], true, eps));
            }
            if let Some((bg, fg)) = &colour_models {
                row[0] += colour_unary(&fg[0], bg, colours[i], eps).1;
                for (k, model) in fg.iter().enumerate() {
                    row[k + 1] += colour_unary(model, bg, colours[i], eps).0;
                }
            }
            row
        })
        .collect();

    let mean_sq = mean_sq_distance(&colours, graph.edges(), T::of(1e-12));
    let lambda_p = T::of(cfg.lambda_p);
    let edges = graph
        .edges()
        .map(|(i, j)| {
            (
                i,
                j,
                lambda_p * pairwise_weight(colours[i], colours[j], mean_sq),
            )
        })
        .collect();
    Ok((
        EnergyModel::new(labels, unary, edges)?,
        colour_models.is_some(),
    ))
}

/// Labels every node of `graph`, starting expansion from the per-node
/// unary argmin.
pub fn segment<T: Real>(
    graph: &SuperpixelGraph<T>,
    confidence: &[Vec<T>],
    cfg: &SegmentationConfig,
) -> Result<Segmentation<T>> {
    let (model, colour_used) = build_energy(graph, confidence, cfg)?;
    let result = alpha_expansion(&model, &model.unary_argmin())?;
    Ok(Segmentation {
        node_labels: result.labeling,
        energy: result.energy,
        trace: result.trace,
        colour_used,
    })
}

/// Paints node labels back onto per-frame pixel label maps.
pub fn to_label_maps<T>(
    graph: &SuperpixelGraph<T>,
    node_labels: &[usize],
    size: crate::geometry::FrameSize,
) -> Vec<LabelMap> {
    (0..graph.frame_count())
        .map(|t| {
            let mut map = LabelMap::filled(size, 0);
            for id in graph.frame_offsets[t]..graph.frame_offsets[t + 1] {
                for &p in &graph.nodes[id].pixels {
                    map.labels_mut()[p] = node_labels[id] as i32;
                }
            }
            map
        })
        .collect()
}
