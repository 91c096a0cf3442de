//! Raster and geometric primitives shared by every stage: frame sizes,
//! half-open boxes, run-length encoded masks and dense per-pixel maps.

use std::fmt;
use std::str::FromStr;

use crate::error::{Error, Result};
use crate::scalar::Scalar;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub struct FrameSize {
    pub width: u32,
    pub height: u32,
}

impl FrameSize {
    pub fn new(width: u32, height: u32) -> Result<Self> {
        if width == 0 || height == 0 {
            return Err(Error::FrameSize { width, height });
        }
        Ok(FrameSize { width, height })
    }

    pub fn pixel_count(&self) -> usize {
        self.width as usize * self.height as usize
    }

    #[inline]
    pub fn index(&self, x: u32, y: u32) -> usize {
        y as usize * self.width as usize + x as usize
    }

    #[inline]
    pub fn coords(&self, index: usize) -> (u32, u32) {
        let w = self.width as usize;
        ((index % w) as u32, (index / w) as u32)
    }

    pub fn full_box(&self) -> BoundingBox {
        BoundingBox {
            x0: 0,
            y0: 0,
            x1: self.width,
            y1: self.height,
        }
    }

    pub(crate) fn check_same(&self, other: FrameSize) -> Result<()> {
        if *self != other {
            return Err(Error::SizeMismatch {
                expected: self.to_string(),
                actual: other.to_string(),
            });
        }
        Ok(())
    }
}

impl fmt::Display for FrameSize {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}x{}", self.width, self.height)
    }
}

/// Axis-aligned box in half-open pixel coordinates `[x0, x1) × [y0, y1)`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub struct BoundingBox {
    pub x0: u32,
    pub y0: u32,
    pub x1: u32,
    pub y1: u32,
}

impl BoundingBox {
    pub fn new(x0: u32, y0: u32, x1: u32, y1: u32) -> Result<Self> {
        if x0 >= x1 || y0 >= y1 {
            return Err(Error::BoundingBox {
                x0: x0.into(),
                y0: y0.into(),
                x1: x1.into(),
                y1: y1.into(),
            });
        }
        Ok(BoundingBox { x0, y0, x1, y1 })
    }

    pub fn width(&self) -> u32 {
        self.x1 - self.x0
    }

    pub fn height(&self) -> u32 {
        self.y1 - self.y0
    }

    pub fn area(&self) -> u64 {
        u64::from(self.width()) * u64::from(self.height())
    }

    pub fn contains(&self, x: u32, y: u32) -> bool {
        x >= self.x0 && x < self.x1 && y >= self.y0 && y < self.y1
    }

    pub fn intersection_area(&self, other: &BoundingBox) -> u64 {
        let w = self.x1.min(other.x1).saturating_sub(self.x0.max(other.x0));
        let h = self.y1.min(other.y1).saturating_sub(self.y0.max(other.y0));
        u64::from(w) * u64::from(h)
    }

    /// Intersection over union of two boxes.
    pub fn iou<T: Scalar>(&self, other: &BoundingBox) -> T {
        let inter = self.intersection_area(other);
        let union = self.area() + other.area() - inter;
        T::from_u64(inter).unwrap() / T::from_u64(union).unwrap()
    }

    /// Grows every side by `margin` pixels, clamped to the frame.
    pub fn expand(&self, margin: u32, frame: FrameSize) -> BoundingBox {
        let clamped = self.clamp_to(frame);
        BoundingBox {
            x0: clamped.x0.saturating_sub(margin),
            y0: clamped.y0.saturating_sub(margin),
            x1: clamped.x1.saturating_add(margin).min(frame.width),
            y1: clamped.y1.saturating_add(margin).min(frame.height),
        }
    }

    /// Clamps to the frame, keeping at least one pixel.
    pub fn clamp_to(&self, frame: FrameSize) -> BoundingBox {
        let x0 = self.x0.min(frame.width - 1);
        let y0 = self.y0.min(frame.height - 1);
        BoundingBox {
            x0,
            y0,
            x1: self.x1.min(frame.width).max(x0 + 1),
            y1: self.y1.min(frame.height).max(y0 + 1),
        }
    }

    /// Translates by `(dx, dy)`, limiting the shift so the box stays inside
    /// the frame with its size preserved (when it fits at all).
    pub fn translate_within(&self, dx: i64, dy: i64, frame: FrameSize) -> BoundingBox {
        let b = self.clamp_to(frame);
        let dx = dx.clamp(-i64::from(b.x0), i64::from(frame.width - b.x1));
        let dy = dy.clamp(-i64::from(b.y0), i64::from(frame.height - b.y1));
        BoundingBox {
            x0: (i64::from(b.x0) + dx) as u32,
            y0: (i64::from(b.y0) + dy) as u32,
            x1: (i64::from(b.x1) + dx) as u32,
            y1: (i64::from(b.y1) + dy) as u32,
        }
    }
}

pub fn iou<T: Scalar>(a: &BoundingBox, b: &BoundingBox) -> T {
    a.iou(b)
}

pub fn expand_box(b: &BoundingBox, margin: u32, frame: FrameSize) -> BoundingBox {
    b.expand(margin, frame)
}

pub fn mask_area(m: &BinaryMask) -> u64 {
    m.area()
}

/// One run of set pixels in row-major order.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct Run {
    pub start: u32,
    pub len: u32,
}

impl Run {
    pub fn end(&self) -> u32 {
        self.start + self.len
    }
}

/// Binary mask stored as sorted, disjoint, non-touching row-major runs.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct BinaryMask {
    size: FrameSize,
    runs: Vec<Run>,
}

impl BinaryMask {
    pub fn empty(size: FrameSize) -> Self {
        BinaryMask {
            size,
            runs: Vec::new(),
        }
    }

    pub fn full(size: FrameSize) -> Self {
        BinaryMask {
            size,
            runs: vec![Run {
                start: 0,
                len: size.pixel_count() as u32,
            }],
        }
    }

    /// Builds a mask from runs. Runs must be sorted and non-overlapping;
    /// touching runs are merged and zero-length runs dropped.
    pub fn from_runs(size: FrameSize, runs: impl IntoIterator<Item = Run>) -> Result<Self> {
        let total = size.pixel_count() as u64;
        let mut out: Vec<Run> = Vec::new();
        for run in runs {
            if run.len == 0 {
                continue;
            }
            if u64::from(run.start) + u64::from(run.len) > total {
                return Err(Error::Mask(format!(
                    "run {}:{} exceeds {} pixels",
                    run.start, run.len, total
                )));
            }
            match out.last_mut() {
                Some(last) if run.start < last.end() => {
                    return Err(Error::Mask(format!(
                        "run {}:{} overlaps or precedes {}:{}",
                        run.start, run.len, last.start, last.len
                    )));
                }
                Some(last) if run.start == last.end() => last.len += run.len,
                _ => out.push(run),
            }
        }
        Ok(BinaryMask { size, runs: out })
    }

    pub fn from_bitmap(size: FrameSize, bits: &[bool]) -> Result<Self> {
        if bits.len() != size.pixel_count() {
            return Err(Error::SizeMismatch {
                expected: format!("{} pixels", size.pixel_count()),
                actual: format!("{} pixels", bits.len()),
            });
        }
        let mut runs = Vec::new();
        let mut i = 0;
        while i < bits.len() {
            if bits[i] {
                let start = i;
                while i < bits.len() && bits[i] {
                    i += 1;
                }
                runs.push(Run {
                    start: start as u32,
                    len: (i - start) as u32,
                });
            } else {
                i += 1;
            }
        }
        Ok(BinaryMask { size, runs })
    }

    /// Builds a mask from pixel indices, which must be strictly increasing.
    pub fn from_sorted_indices(size: FrameSize, indices: &[usize]) -> Result<Self> {
        let mut runs: Vec<Run> = Vec::new();
        for &idx in indices {
            match runs.last_mut() {
                Some(last) if idx as u32 == last.end() => last.len += 1,
                Some(last) if (idx as u32) < last.end() => {
                    return Err(Error::Mask("pixel indices not strictly increasing".into()))
                }
                _ => runs.push(Run {
                    start: idx as u32,
                    len: 1,
                }),
            }
        }
        Self::from_runs(size, runs)
    }

    pub fn from_box(size: FrameSize, b: &BoundingBox) -> Self {
        let b = b.clamp_to(size);
        let runs = (b.y0..b.y1).map(|y| Run {
            start: size.index(b.x0, y) as u32,
            len: b.width(),
        });
        Self::from_runs(size, runs).expect("box rows are ordered")
    }

    pub fn size(&self) -> FrameSize {
        self.size
    }

    pub fn runs(&self) -> &[Run] {
        &self.runs
    }

    pub fn area(&self) -> u64 {
        self.runs.iter().map(|r| u64::from(r.len)).sum()
    }

    pub fn is_empty(&self) -> bool {
        self.runs.is_empty()
    }

    pub fn to_bitmap(&self) -> Vec<bool> {
        let mut bits = vec![false; self.size.pixel_count()];
        for idx in self.pixel_indices() {
            bits[idx] = true;
        }
        bits
    }

    pub fn pixel_indices(&self) -> impl Iterator<Item = usize> + '_ {
        self.runs
            .iter()
            .flat_map(|r| (r.start as usize)..(r.end() as usize))
    }

    pub fn contains(&self, index: usize) -> bool {
        let i = index as u32;
        match self.runs.binary_search_by(|r| r.start.cmp(&i)) {
            Ok(_) => true,
            Err(0) => false,
            Err(pos) => i < self.runs[pos - 1].end(),
        }
    }

    /// Number of pixels set in both masks.
    pub fn intersection_area(&self, other: &BinaryMask) -> u64 {
        let (mut i, mut j, mut total) = (0, 0, 0u64);
        while i < self.runs.len() && j < other.runs.len() {
            let (a, b) = (self.runs[i], other.runs[j]);
            let lo = a.start.max(b.start);
            let hi = a.end().min(b.end());
            if hi > lo {
                total += u64::from(hi - lo);
            }
            if a.end() < b.end() {
                i += 1;
            } else {
                j += 1;
            }
        }
        total
    }

    /// Tight bounding box of the set pixels; `None` for an empty mask.
    pub fn tight_box(&self) -> Option<BoundingBox> {
        if self.runs.is_empty() {
            return None;
        }
        let w = self.size.width;
        let (mut x0, mut y0, mut x1, mut y1) = (u32::MAX, u32::MAX, 0, 0);
        for r in &self.runs {
            let first = r.start;
            let last = r.end() - 1;
            let (ya, yb) = (first / w, last / w);
            y0 = y0.min(ya);
            y1 = y1.max(yb + 1);
            if ya == yb {
                x0 = x0.min(first % w);
                x1 = x1.max(last % w + 1);
            } else {
                // the run wraps a row boundary, so it spans every column
                x0 = 0;
                x1 = w;
            }
        }
        Some(BoundingBox { x0, y0, x1, y1 })
    }
}

impl fmt::Display for BinaryMask {
    /// RLE text form: `"w h; start:len start:len ..."`.
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{} {};", self.size.width, self.size.height)?;
        for r in &self.runs {
            write!(f, " {}:{}", r.start, r.len)?;
        }
        Ok(())
    }
}

impl FromStr for BinaryMask {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        let err = |m: &str| Error::parse("rle mask", format!("{m}: {s:?}"));
        let (head, body) = s.split_once(';').ok_or_else(|| err("missing ';'"))?;
        let mut dims = head.split_whitespace();
        let w: u32 = dims
            .next()
            .and_then(|t| t.parse().ok())
            .ok_or_else(|| err("bad width"))?;
        let h: u32 = dims
            .next()
            .and_then(|t| t.parse().ok())
            .ok_or_else(|| err("bad height"))?;
        if dims.next().is_some() {
            return Err(err("trailing header tokens"));
        }
        let size = FrameSize::new(w, h)?;
        let mut runs = Vec::new();
        for tok in body.split_whitespace() {
            let (a, b) = tok.split_once(':').ok_or_else(|| err("run without ':'"))?;
            let start = a.parse().map_err(|_| err("bad run start"))?;
            let len = b.parse().map_err(|_| err("bad run length"))?;
            runs.push(Run { start, len });
        }
        BinaryMask::from_runs(size, runs)
    }
}

/// Optical flow `(u, v)` from one frame to the next.
pub type FlowField<T> = (DenseMap<T>, DenseMap<T>);

/// Dense row-major map of finite values (motion cues, confidences, flow).
#[derive(Debug, Clone, PartialEq)]
pub struct DenseMap<T> {
    size: FrameSize,
    values: Vec<T>,
}

impl<T: Scalar> DenseMap<T> {
    pub fn new(size: FrameSize, values: Vec<T>) -> Result<Self> {
        if values.len() != size.pixel_count() {
            return Err(Error::SizeMismatch {
                expected: format!("{} values", size.pixel_count()),
                actual: format!("{} values", values.len()),
            });
        }
        if let Some(i) = values.iter().position(|v| !v.is_finite_value()) {
            return Err(Error::InvalidValue(format!("non-finite map value at {i}")));
        }
        Ok(DenseMap { size, values })
    }

    pub fn zeros(size: FrameSize) -> Self {
        Self::filled(size, T::zero())
    }

    pub fn filled(size: FrameSize, v: T) -> Self {
        DenseMap {
            size,
            values: vec![v; size.pixel_count()],
        }
    }

    pub fn from_fn(size: FrameSize, mut f: impl FnMut(u32, u32) -> T) -> Result<Self> {
        let mut values = Vec::with_capacity(size.pixel_count());
        for y in 0..size.height {
            for x in 0..size.width {
                values.push(f(x, y));
            }
        }
        Self::new(size, values)
    }

    pub fn size(&self) -> FrameSize {
        self.size
    }

    pub fn values(&self) -> &[T] {
        &self.values
    }

    pub fn into_values(self) -> Vec<T> {
        self.values
    }

    pub fn get(&self, x: u32, y: u32) -> T {
        self.values[self.size.index(x, y)]
    }

    pub fn sum_over(&self, mask: &BinaryMask) -> T {
        mask.pixel_indices()
            .fold(T::zero(), |acc, i| acc + self.values[i])
    }

    /// Mean over the mask's pixels; `None` for an empty mask.
    pub fn mean_over(&self, mask: &BinaryMask) -> Option<T> {
        let n = mask.area();
        (n > 0).then(|| self.sum_over(mask) / T::from_u64(n).unwrap())
    }

    pub fn map<U: Scalar>(&self, f: impl Fn(T) -> U) -> Result<DenseMap<U>> {
        DenseMap::new(self.size, self.values.iter().map(|&v| f(v)).collect())
    }
}

/// Integer label map: superpixels, labelings and ground truth.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct LabelMap {
    size: FrameSize,
    labels: Vec<i32>,
}

impl LabelMap {
    pub fn new(size: FrameSize, labels: Vec<i32>) -> Result<Self> {
        if labels.len() != size.pixel_count() {
            return Err(Error::SizeMismatch {
                expected: format!("{} labels", size.pixel_count()),
                actual: format!("{} labels", labels.len()),
            });
        }
        Ok(LabelMap { size, labels })
    }

    pub fn filled(size: FrameSize, label: i32) -> Self {
        LabelMap {
            size,
            labels: vec![label; size.pixel_count()],
        }
    }

    pub fn size(&self) -> FrameSize {
        self.size
    }

    pub fn labels(&self) -> &[i32] {
        &self.labels
    }

    pub fn labels_mut(&mut self) -> &mut [i32] {
        &mut self.labels
    }

    pub fn get(&self, x: u32, y: u32) -> i32 {
        self.labels[self.size.index(x, y)]
    }
}

/// RGB frame with channel values in `[0, 1]`.
#[derive(Debug, Clone, PartialEq)]
pub struct RgbFrame<T> {
    size: FrameSize,
    pixels: Vec<[T; 3]>,
}

impl<T: Scalar> RgbFrame<T> {
    pub fn new(size: FrameSize, pixels: Vec<[T; 3]>) -> Result<Self> {
        if pixels.len() != size.pixel_count() {
            return Err(Error::SizeMismatch {
                expected: format!("{} pixels", size.pixel_count()),
                actual: format!("{} pixels", pixels.len()),
            });
        }
        Ok(RgbFrame { size, pixels })
    }

    pub fn size(&self) -> FrameSize {
        self.size
    }

    pub fn pixels(&self) -> &[[T; 3]] {
        &self.pixels
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use num_rational::Ratio;

    fn bx(x0: u32, y0: u32, x1: u32, y1: u32) -> BoundingBox {
        BoundingBox::new(x0, y0, x1, y1).unwrap()
    }

    #[test]
    fn iou_cases() {
        let a = bx(0, 0, 2, 2);
        assert_eq!(iou::<f64>(&a, &a), 1.0);
        assert_eq!(iou::<f64>(&a, &bx(5, 5, 7, 7)), 0.0);
        // [0,2)x[0,2) vs [1,3)x[0,2): intersection 2, union 6
        let b = bx(1, 0, 3, 2);
        assert_eq!(iou::<Ratio<i64>>(&a, &b), Ratio::new(1, 3));
        assert!((iou::<f64>(&a, &b) - 1.0 / 3.0).abs() < 1e-15);
        // four-pixel-square variant of the same geometry
        let c = bx(0, 0, 4, 4);
        let d = bx(2, 0, 6, 4);
        assert_eq!(iou::<Ratio<i64>>(&c, &d), Ratio::new(1, 3));
    }

    #[test]
    fn degenerate_boxes_rejected() {
        assert!(BoundingBox::new(3, 0, 3, 4).is_err());
        assert!(BoundingBox::new(0, 5, 4, 1).is_err());
    }

    #[test]
    fn expand_cases() {
        let f = FrameSize::new(64, 64).unwrap();
        let b = bx(5, 5, 10, 10);
        assert_eq!(expand_box(&b, 0, f), b);
        assert_eq!(expand_box(&b, 10, f), bx(0, 0, 20, 20));
        let small = FrameSize::new(4, 4).unwrap();
        assert_eq!(expand_box(&bx(0, 0, 4, 4), 2, small), bx(0, 0, 4, 4));
    }

    #[test]
    fn mask_area_cases() {
        let f = FrameSize::new(4, 4).unwrap();
        assert_eq!(mask_area(&BinaryMask::empty(f)), 0);
        assert_eq!(mask_area(&BinaryMask::full(f)), 16);
        let m =
            BinaryMask::from_runs(f, [Run { start: 0, len: 3 }, Run { start: 8, len: 5 }]).unwrap();
        assert_eq!(mask_area(&m), 8);
    }

    #[test]
    fn runs_validated() {
        let f = FrameSize::new(4, 4).unwrap();
        assert!(BinaryMask::from_runs(f, [Run { start: 14, len: 3 }]).is_err());
        assert!(
            BinaryMask::from_runs(f, [Run { start: 4, len: 3 }, Run { start: 5, len: 1 }]).is_err()
        );
        let merged =
            BinaryMask::from_runs(f, [Run { start: 0, len: 2 }, Run { start: 2, len: 2 }]).unwrap();
        assert_eq!(merged.runs(), &[Run { start: 0, len: 4 }]);
    }

    #[test]
    fn rle_text_form() {
        let m: BinaryMask = "4 3; 1:2 5:3".parse().unwrap();
        assert_eq!(m.area(), 5);
        assert_eq!(m.to_string(), "4 3; 1:2 5:3");
        let e: BinaryMask = "4 3;".parse().unwrap();
        assert!(e.is_empty());
        assert_eq!(e.to_string(), "4 3;");
        assert!("4 3 1:2".parse::<BinaryMask>().is_err());
        assert!("0 3;".parse::<BinaryMask>().is_err());
    }

    #[test]
    fn tight_box_and_contains() {
        let f = FrameSize::new(5, 5).unwrap();
        let b = bx(1, 2, 4, 4);
        let m = BinaryMask::from_box(f, &b);
        assert_eq!(m.area(), 6);
        assert_eq!(m.tight_box(), Some(b));
        assert!(m.contains(f.index(1, 2)));
        assert!(!m.contains(f.index(0, 2)));
        assert!(!m.contains(f.index(4, 3)));
        let wrap = BinaryMask::from_runs(f, [Run { start: 3, len: 4 }]).unwrap();
        assert_eq!(wrap.tight_box(), Some(bx(0, 0, 5, 2)));
    }

    #[test]
    fn intersection_area_matches_bitmaps() {
        let f = FrameSize::new(6, 6).unwrap();
        let a = BinaryMask::from_box(f, &bx(0, 0, 4, 4));
        let b = BinaryMask::from_box(f, &bx(2, 1, 6, 5));
        let (ba, bb) = (a.to_bitmap(), b.to_bitmap());
        let brute = ba.iter().zip(&bb).filter(|(x, y)| **x && **y).count() as u64;
        assert_eq!(a.intersection_area(&b), brute);
    }

    #[test]
    fn translate_stays_inside() {
        let f = FrameSize::new(10, 10).unwrap();
        let b = bx(6, 6, 9, 9);
        assert_eq!(b.translate_within(5, -20, f), bx(7, 0, 10, 3));
        assert_eq!(b.translate_within(-1, 1, f), bx(5, 7, 8, 10));
    }

    #[test]
    fn dense_map_rejects_nan() {
        let f = FrameSize::new(2, 1).unwrap();
        assert!(DenseMap::new(f, vec![0.0, f64::NAN]).is_err());
        assert!(DenseMap::new(f, vec![0.0]).is_err());
        let m = DenseMap::new(f, vec![0.25, 0.75]).unwrap();
        assert_eq!(m.mean_over(&BinaryMask::full(f)), Some(0.5));
    }
}
