use std::collections::BTreeSet;

use super::linalg3::Vec3;
use crate::error::{Error, Result};
use crate::geometry::{FlowField, RgbFrame};
use crate::scalar::Real;
use crate::superpixels::SuperpixelMap;

#[derive(Debug, Clone, PartialEq)]
pub struct GraphNode<T> {
    pub frame_index: usize,
    /// Superpixel id within its frame.
    pub label: usize,
    /// Mean RGB colour of the member pixels.
    pub colour: Vec3<T>,
    pub pixels: Vec<usize>,
}

/// Space-time superpixel graph. Node ids are frame-major: the nodes of
/// frame `t` occupy `frame_offsets[t]..frame_offsets[t + 1]`.
#[derive(Debug, Clone, PartialEq)]
pub struct SuperpixelGraph<T> {
    pub nodes: Vec<GraphNode<T>>,
    pub frame_offsets: Vec<usize>,
    /// Same-frame adjacency, `(i, j)` with `i < j`, sorted.
    pub spatial_edges: Vec<(usize, usize)>,
    /// Links between consecutive frames, `(i, j)` with `i` on the earlier
    /// frame, sorted.
    pub temporal_edges: Vec<(usize, usize)>,
}

impl<T> SuperpixelGraph<T> {
    pub fn node_count(&self) -> usize {
        self.nodes.len()
    }

    pub fn frame_count(&self) -> usize {
        self.frame_offsets.len().saturating_sub(1)
    }

    pub fn node_id(&self, frame: usize, label: usize) -> usize {
        self.frame_offsets[frame] + label
    }

    pub fn edges(&self) -> impl Iterator<Item = (usize, usize)> + Clone + '_ {
        self.spatial_edges
            .iter()
            .chain(&self.temporal_edges)
            .copied()
    }
}

/// Builds the graph from per-frame superpixels, frames and the flow field
/// of each transition `t -> t + 1` (`None` = zero flow).
///
/// Spatial edges join superpixels that touch under 8-connectivity. A
/// temporal edge joins `s` on frame `t` and `s'` on frame `t + 1` when some
/// pixel of `s`, displaced by its rounded flow vector, lands inside `s'`.
pub fn build_graph<T: Real>(
    superpixels: &[SuperpixelMap],
    frames: &[RgbFrame<T>],
    flows: &[Option<FlowField<T>>],
) -> Result<SuperpixelGraph<T>> {
    if superpixels.len() != frames.len() {
        return Err(Error::SizeMismatch {
            expected: format!("{} superpixel maps", frames.len()),
            actual: format!("{}", superpixels.len()),
        });
    }
    let mut nodes = Vec::new();
    let mut frame_offsets = vec![0];
    let mut spatial = BTreeSet::new();
    for (t, (sp, frame)) in superpixels.iter().zip(frames).enumerate() {
        let size = frame.size();
        size.check_same(sp.size())?;
        let offset = nodes.len();
        for (label, pixels) in sp.members().into_iter().enumerate() {
            let mut sum = [T::zero(); 3];
            for &p in &pixels {
                for d in 0..3 {
                    sum[d] += frame.pixels()[p][d];
                }
            }
            let n = T::of_usize(pixels.len());
            nodes.push(GraphNode {
                frame_index: t,
                label,
                colour: sum.map(|s| s / n),
                pixels,
            });
        }
        frame_offsets.push(nodes.len());
        let (w, h) = (size.width, size.height);
        let at = |x: u32, y: u32| sp.label_at(size.index(x, y));
        for y in 0..h {
            for x in 0..w {
                let a = at(x, y);
                let mut link = |b: usize| {
                    if a != b {
                        spatial.insert((offset + a.min(b), offset + a.max(b)));
                    }
                };
                if x + 1 < w {
                    link(at(x + 1, y));
                }
                if y + 1 < h {
                    link(at(x, y + 1));
                    if x + 1 < w {
                        link(at(x + 1, y + 1));
                    }
                    if x > 0 {
                        link(at(x - 1, y + 1));
                    }
                }
            }
        }
    }
    let mut temporal = BTreeSet::new();
    for t in 0..frames.len().saturating_sub(1) {
        let size = frames[t].size();
        size.check_same(frames[t + 1].size())?;
        let flow = flows.get(t).and_then(Option::as_ref);
        if let Some((u, v)) = flow {
            size.check_same(u.size())?;
            size.check_same(v.size())?;
        }
        let (sp, next) = (&superpixels[t], &superpixels[t + 1]);
        for p in 0..size.pixel_count() {
            let (x, y) = size.coords(p);
            let (dx, dy) = match flow {
                Some((u, v)) => (
                    u.values()[p].round().to_i64().unwrap_or(0),
                    v.values()[p].round().to_i64().unwrap_or(0),
                ),
                None => (0, 0),
            };
            let (nx, ny) = (i64::from(x) + dx, i64::from(y) + dy);
            if nx < 0 || ny < 0 || nx >= i64::from(size.width) || ny >= i64::from(size.height) {
                continue;
            }
            let q = size.index(nx as u32, ny as u32);
            temporal.insert((
                frame_offsets[t] + sp.label_at(p),
                frame_offsets[t + 1] + next.label_at(q),
            ));
        }
    }
    Ok(SuperpixelGraph {
        nodes,
        frame_offsets,
        spatial_edges: spatial.into_iter().collect(),
        temporal_edges: temporal.into_iter().collect(),
    })
}
