use std::path::{Path, PathBuf};

use super::formats::{read_fmap, read_frame, read_imap, read_text};
use super::kv::{render, KvFile};
use crate::error::{Error, Result};
use crate::geometry::{DenseMap, FlowField, FrameSize, LabelMap, RgbFrame};
use crate::superpixels::SuperpixelMap;

/// Description of one video and where its inputs live.
///
/// Keys: `video`, `frames`, `width`, `height`, `classes` (comma-separated),
/// `feature_dim`, `frame_pattern`, `motion_pattern`, `proposals` (single
/// class) or `proposals.<class>`, and optionally `flow_u_pattern` +
/// `flow_v_pattern`, `superpixel_pattern`, `gt_pattern`.
///
/// Patterns contain `{}` or a zero-padded `{:0N}` placeholder for the frame
/// index (the transition index `t` for flow `t -> t + 1`). Relative paths are
/// resolved against the manifest's directory.
#[derive(Debug, Clone, PartialEq)]
pub struct VideoManifest {
    pub base_dir: PathBuf,
    pub video: String,
    pub frames: usize,
    pub size: FrameSize,
    pub classes: Vec<String>,
    pub feature_dim: usize,
    pub frame_pattern: String,
    pub motion_pattern: String,
    /// One proposal file per class, in class order.
    pub proposals: Vec<String>,
    pub flow_patterns: Option<(String, String)>,
    pub superpixel_pattern: Option<String>,
    pub gt_pattern: Option<String>,
}

/// Substitutes `index` into the first `{}` or `{:0N}` placeholder.
pub fn expand_pattern(pattern: &str, index: usize) -> Result<String> {
    let start = pattern
        .find('{')
        .ok_or_else(|| Error::parse("pattern", format!("`{pattern}` has no index placeholder")))?;
    let end = pattern[start..]
        .find('}')
        .map(|e| start + e)
        .ok_or_else(|| Error::parse("pattern", format!("unclosed placeholder in `{pattern}`")))?;
    let inner = &pattern[start + 1..end];
    let formatted = match inner {
        "" => index.to_string(),
        s if s.starts_with(":0") => {
            let width: usize = s[2..]
                .parse()
                .map_err(|_| Error::parse("pattern", format!("bad width in `{pattern}`")))?;
            format!("{index:0width$}")
        }
        _ => {
            return Err(Error::parse(
                "pattern",
                format!("unsupported placeholder in `{pattern}`"),
            ))
        }
    };
    Ok(format!(
        "{}{}{}",
        &pattern[..start],
        formatted,
        &pattern[end + 1..]
    ))
}

impl VideoManifest {
    pub fn load(path: &Path) -> Result<Self> {
        let text = read_text(path)?;
        let base = path.parent().map(Path::to_path_buf).unwrap_or_default();
        let m = Self::parse(&text, &base, &path.display().to_string())?;
        m.check_files()?;
        Ok(m)
    }

    pub fn parse(text: &str, base_dir: &Path, context: &str) -> Result<Self> {
        let kv = KvFile::parse(text, context)?;
        let classes: Vec<String> = kv
            .require("classes")?
            .split(',')
            .map(|c| c.trim().to_string())
            .filter(|c| !c.is_empty())
            .collect();
        if classes.is_empty() {
            return Err(Error::parse(context, "`classes` is empty"));
        }
        // class names end up in output file names
        if let Some(c) = classes.iter().find(|c| {
            !c.chars()
                .all(|ch| ch.is_ascii_alphanumeric() || ch == '_' || ch == '-')
        }) {
            return Err(Error::parse(
                context,
                format!("class name `{c}` must be [A-Za-z0-9_-]"),
            ));
        }
        let proposals = if classes.len() == 1 && kv.get("proposals").is_some() {
            vec![kv.require("proposals")?.to_string()]
        } else {
            classes
                .iter()
                .map(|c| kv.require(&format!("proposals.{c}")).map(str::to_string))
                .collect::<Result<_>>()?
        };
        let required = |key: &str| -> Result<usize> {
            kv.parsed::<usize>(key)?
                .ok_or_else(|| Error::parse(context, format!("missing key `{key}`")))
        };
        let frames = required("frames")?;
        if frames == 0 {
            return Err(Error::parse(context, "`frames` must be >= 1"));
        }
        let size = FrameSize::new(
            u32::try_from(required("width")?)
                .map_err(|_| Error::parse(context, "width too large"))?,
            u32::try_from(required("height")?)
                .map_err(|_| Error::parse(context, "height too large"))?,
        )?;
        let flow_patterns = match (kv.get("flow_u_pattern"), kv.get("flow_v_pattern")) {
            (Some(u), Some(v)) => Some((u.to_string(), v.to_string())),
            (None, None) => None,
            _ => {
                return Err(Error::parse(
                    context,
                    "flow_u_pattern and flow_v_pattern go together",
                ))
            }
        };
        let known = [
            "video",
            "frames",
            "width",
            "height",
            "classes",
            "feature_dim",
            "frame_pattern",
            "motion_pattern",
            "proposals",
            "flow_u_pattern",
            "flow_v_pattern",
            "superpixel_pattern",
            "gt_pattern",
        ];
        if let Some(k) = kv
            .keys()
            .find(|k| !known.contains(k) && !k.starts_with("proposals."))
        {
            return Err(Error::parse(context, format!("unknown key `{k}`")));
        }
        let m = VideoManifest {
            base_dir: base_dir.to_path_buf(),
            video: kv.require("video")?.to_string(),
            frames,
            size,
            classes,
            feature_dim: required("feature_dim")?,
            frame_pattern: kv.require("frame_pattern")?.to_string(),
            motion_pattern: kv.require("motion_pattern")?.to_string(),
            proposals,
            flow_patterns,
            superpixel_pattern: kv.get("superpixel_pattern").map(str::to_string),
            gt_pattern: kv.get("gt_pattern").map(str::to_string),
        };
        // surface placeholder errors early
        for p in [&m.frame_pattern, &m.motion_pattern]
            .into_iter()
            .chain(m.flow_patterns.iter().flat_map(|(u, v)| [u, v]))
            .chain(&m.superpixel_pattern)
            .chain(&m.gt_pattern)
        {
            expand_pattern(p, 0)?;
        }
        Ok(m)
    }

    pub fn render(&self) -> String {
        let mut entries = vec![
            ("video", self.video.clone()),
            ("frames", self.frames.to_string()),
            ("width", self.size.width.to_string()),
            ("height", self.size.height.to_string()),
            ("classes", self.classes.join(",")),
            ("feature_dim", self.feature_dim.to_string()),
            ("frame_pattern", self.frame_pattern.clone()),
            ("motion_pattern", self.motion_pattern.clone()),
        ];
        let mut text = String::new();
        if let Some((u, v)) = &self.flow_patterns {
            entries.push(("flow_u_pattern", u.clone()));
            entries.push(("flow_v_pattern", v.clone()));
        }
        if let Some(s) = &self.superpixel_pattern {
            entries.push(("superpixel_pattern", s.clone()));
        }
        if let Some(g) = &self.gt_pattern {
            entries.push(("gt_pattern", g.clone()));
        }
        text.push_str(&render(entries));
        if self.classes.len() == 1 {
            text.push_str(&render([("proposals", self.proposals[0].clone())]));
        } else {
            for (c, p) in self.classes.iter().zip(&self.proposals) {
                text.push_str(&format!("proposals.{c} = {p}\n"));
            }
        }
        text
    }

    fn resolve(&self, p: &str) -> PathBuf {
        self.base_dir.join(p)
    }

    fn indexed(&self, pattern: &str, t: usize) -> PathBuf {
        self.resolve(&expand_pattern(pattern, t).expect("pattern validated at parse time"))
    }

    pub fn frame_path(&self, t: usize) -> PathBuf {
        self.indexed(&self.frame_pattern, t)
    }

    pub fn motion_path(&self, t: usize) -> PathBuf {
        self.indexed(&self.motion_pattern, t)
    }

    pub fn flow_paths(&self, t: usize) -> Option<(PathBuf, PathBuf)> {
        self.flow_patterns
            .as_ref()
            .map(|(u, v)| (self.indexed(u, t), self.indexed(v, t)))
    }

    pub fn superpixel_path(&self, t: usize) -> Option<PathBuf> {
        self.superpixel_pattern.as_ref().map(|p| self.indexed(p, t))
    }

    pub fn gt_path(&self, t: usize) -> Option<PathBuf> {
        self.gt_pattern.as_ref().map(|p| self.indexed(p, t))
    }

    pub fn proposals_path(&self, class: usize) -> PathBuf {
        self.resolve(&self.proposals[class])
    }

    /// Required inputs must exist. Missing flow files fall back to zero
    /// flow and missing ground-truth files mark unannotated frames.
    pub fn check_files(&self) -> Result<()> {
        let mut required: Vec<PathBuf> = (0..self.proposals.len())
            .map(|c| self.proposals_path(c))
            .collect();
        for t in 0..self.frames {
            required.push(self.frame_path(t));
            required.push(self.motion_path(t));
            required.extend(self.superpixel_path(t));
        }
        match required.into_iter().find(|p| !p.is_file()) {
            Some(p) => Err(Error::io(
                p,
                std::io::Error::from(std::io::ErrorKind::NotFound),
            )),
            None => Ok(()),
        }
    }

    fn checked<T>(&self, item: T, size: FrameSize, what: &str, t: usize) -> Result<T> {
        if size != self.size {
            return Err(Error::SizeMismatch {
                expected: format!("{what} {t} of size {}", self.size),
                actual: size.to_string(),
            });
        }
        Ok(item)
    }

    pub fn load_frames(&self) -> Result<Vec<RgbFrame<f64>>> {
        (0..self.frames)
            .map(|t| {
                let f = read_frame(&self.frame_path(t))?;
                let s = f.size();
                self.checked(f, s, "frame", t)
            })
            .collect()
    }

    pub fn load_motion(&self) -> Result<Vec<DenseMap<f64>>> {
        (0..self.frames)
            .map(|t| {
                let m = read_fmap(&self.motion_path(t))?;
                let s = m.size();
                self.checked(m, s, "motion map", t)
            })
            .collect()
    }

    /// Flow of each transition `t -> t + 1`; `None` where no file exists.
    pub fn load_flows(&self) -> Result<Vec<Option<FlowField<f64>>>> {
        (0..self.frames.saturating_sub(1))
            .map(|t| match self.flow_paths(t) {
                Some((u, v)) if u.is_file() && v.is_file() => {
                    let (u, v) = (read_fmap(&u)?, read_fmap(&v)?);
                    self.checked((), u.size(), "flow", t)?;
                    self.checked((), v.size(), "flow", t)?;
                    Ok(Some((u, v)))
                }
                _ => Ok(None),
            })
            .collect()
    }

    /// Superpixel maps from the manifest, or `cell`-sized grids.
    pub fn load_superpixels(&self, cell: u32) -> Result<Vec<SuperpixelMap>> {
        (0..self.frames)
            .map(|t| match self.superpixel_path(t) {
                Some(p) => {
                    let l = read_imap(&p)?;
                    let s = l.size();
                    SuperpixelMap::new(self.checked(l, s, "superpixel map", t)?)
                }
                None => Ok(SuperpixelMap::grid(self.size, cell)),
            })
            .collect()
    }

    /// Ground truth per frame; `None` for frames without a file.
    pub fn load_ground_truth(&self) -> Result<Vec<Option<LabelMap>>> {
        (0..self.frames)
            .map(|t| match self.gt_path(t) {
                Some(p) if p.is_file() => {
                    let l = read_imap(&p)?;
                    let s = l.size();
                    Ok(Some(self.checked(l, s, "ground truth", t)?))
                }
                _ => Ok(None),
            })
            .collect()
    }
}
