use crate::geometry::{BoundingBox, FlowField, FrameSize};
use crate::scalar::Scalar;

/// Propagates a box from frame `t` to frame `t + 1`.
pub trait TrackerPort {
    fn predict(&self, frame: usize, bbox: &BoundingBox) -> BoundingBox;
}

/// Default tracker: shifts the box by the median optical-flow vector over
/// its pixels, rounded to whole pixels.
#[derive(Debug, Clone)]
pub struct FlowShiftTracker<T> {
    size: FrameSize,
    /// `flows[t]` holds the `(u, v)` field for the transition `t -> t + 1`.
    flows: Vec<Option<FlowField<T>>>,
}

impl<T: Scalar> FlowShiftTracker<T> {
    pub fn new(size: FrameSize, flows: Vec<Option<FlowField<T>>>) -> Self {
        FlowShiftTracker { size, flows }
    }

    /// Tracker that never moves the box.
    pub fn stationary(size: FrameSize) -> Self {
        Self::new(size, Vec::new())
    }
}

fn median(mut xs: Vec<f64>) -> f64 {
    if xs.is_empty() {
        return 0.0;
    }
    xs.sort_by(|a, b| a.total_cmp(b));
    let n = xs.len();
    if n % 2 == 1 {
        xs[n / 2]
    } else {
        0.5 * (xs[n / 2 - 1] + xs[n / 2])
    }
}

impl<T: Scalar> TrackerPort for FlowShiftTracker<T> {
    fn predict(&self, frame: usize, bbox: &BoundingBox) -> BoundingBox {
        let b = bbox.clamp_to(self.size);
        let Some(Some((u, v))) = self.flows.get(frame) else {
            return b;
        };
        if u.size() != self.size || v.size() != self.size {
            return b;
        }
        let mut us = Vec::with_capacity(b.area() as usize);
        let mut vs = Vec::with_capacity(b.area() as usize);
        for y in b.y0..b.y1 {
            for x in b.x0..b.x1 {
                us.push(u.get(x, y).as_f64());
                vs.push(v.get(x, y).as_f64());
            }
        }
        let dx = median(us).round() as i64;
        let dy = median(vs).round() as i64;
        b.translate_within(dx, dy, self.size)
    }
}
