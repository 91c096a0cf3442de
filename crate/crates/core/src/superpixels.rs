use crate::error::{Error, Result};
use crate::geometry::{FrameSize, LabelMap};

/// A validated superpixel partition of one frame: labels `0..count` with
/// every label owning at least one pixel.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct SuperpixelMap {
    map: LabelMap,
    count: usize,
}

impl SuperpixelMap {
    pub fn new(map: LabelMap) -> Result<Self> {
        let mut max = -1i32;
        for &l in map.labels() {
            if l < 0 {
                return Err(Error::Superpixels(format!("negative label {l}")));
            }
            max = max.max(l);
        }
        let count = (max + 1) as usize;
        let mut seen = vec![false; count];
        for &l in map.labels() {
            seen[l as usize] = true;
        }
        if let Some(missing) = seen.iter().position(|s| !s) {
            return Err(Error::Superpixels(format!(
                "label {missing} has no pixels (labels must be contiguous 0..{count})"
            )));
        }
        Ok(SuperpixelMap { map, count })
    }

    /// Regular grid of `cell`×`cell` blocks; the fallback when no
    /// oversegmentation is supplied.
    pub fn grid(size: FrameSize, cell: u32) -> Self {
        let cell = cell.max(1);
        let cols = size.width.div_ceil(cell);
        let mut labels = Vec::with_capacity(size.pixel_count());
        for y in 0..size.height {
            for x in 0..size.width {
                labels.push(((y / cell) * cols + x / cell) as i32);
            }
        }
        Self::new(LabelMap::new(size, labels).unwrap()).unwrap()
    }

    pub fn count(&self) -> usize {
        self.count
    }

    pub fn size(&self) -> FrameSize {
        self.map.size()
    }

    pub fn label_map(&self) -> &LabelMap {
        &self.map
    }

    #[inline]
    pub fn label_at(&self, index: usize) -> usize {
        self.map.labels()[index] as usize
    }

    /// Pixel indices of each superpixel, in raster order.
    pub fn members(&self) -> Vec<Vec<usize>> {
        let mut out = vec![Vec::new(); self.count];
        for (i, &l) in self.map.labels().iter().enumerate() {
            out[l as usize].push(i);
        }
        out
    }
}
