//! On-disk formats.
//!
//! * Dense real maps: `FMAP w h\n` then `w·h` little-endian `f32`, row-major.
//! * Integer label maps: `IMAP w h\n` then `w·h` little-endian `i32`.
//! * Proposals: one tab-separated record per line,
//!   `frame  rle  appearance  confidence  f1,f2,...`, optionally followed by
//!   `motion  combined  rescored` once scored.
//! * Regenerated proposals: `frame  rle  confidence  source_level  f1,f2,...`.
//! * Tracks: `track id phi f1,...` header lines, each followed by its
//!   `entry frame x0,y0,x1,y1` lines and `prop <regenerated record>` lines.
//! * Selection instances and results: small line-oriented text files.

use std::fmt::Write as _;
use std::fs;
use std::path::Path;

use crate::error::{Error, Result};
use crate::geometry::{BinaryMask, BoundingBox, DenseMap, FrameSize, LabelMap, RgbFrame};
use crate::mining::{RegeneratedProposal, Track, TrackEntry};
use crate::proposal::RegionProposal;
use crate::selection::{SelectionInstance, SelectionResult};

pub fn read_bytes(path: &Path) -> Result<Vec<u8>> {
    fs::read(path).map_err(|e| Error::io(path, e))
}

pub fn read_text(path: &Path) -> Result<String> {
    fs::read_to_string(path).map_err(|e| Error::io(path, e))
}

/// Writes a file, creating parent directories.
pub fn write_file(path: &Path, data: impl AsRef<[u8]>) -> Result<()> {
    if let Some(dir) = path.parent() {
        fs::create_dir_all(dir).map_err(|e| Error::io(dir, e))?;
    }
    fs::write(path, data).map_err(|e| Error::io(path, e))
}

fn split_header<'a>(bytes: &'a [u8], magic: &str, context: &Path) -> Result<(FrameSize, &'a [u8])> {
    let ctx = context.display().to_string();
    let nl = bytes
        .iter()
        .position(|&b| b == b'\n')
        .ok_or_else(|| Error::parse(&ctx, "missing header line"))?;
    let header =
        std::str::from_utf8(&bytes[..nl]).map_err(|_| Error::parse(&ctx, "header is not text"))?;
    let mut parts = header.split_whitespace();
    if parts.next() != Some(magic) {
        return Err(Error::parse(&ctx, format!("expected `{magic}` header")));
    }
    let mut dim = || -> Result<u32> {
        parts
            .next()
            .and_then(|s| s.parse().ok())
            .ok_or_else(|| Error::parse(&ctx, "bad dimensions in header"))
    };
    let size = FrameSize::new(dim()?, dim()?)?;
    let body = &bytes[nl + 1..];
    if body.len() != size.pixel_count() * 4 {
        return Err(Error::parse(
            &ctx,
            format!(
                "expected {} payload bytes, found {}",
                size.pixel_count() * 4,
                body.len()
            ),
        ));
    }
    Ok((size, body))
}

pub fn encode_fmap(map: &DenseMap<f64>) -> Vec<u8> {
    let size = map.size();
    let mut out = format!("FMAP {} {}\n", size.width, size.height).into_bytes();
    for &v in map.values() {
        out.extend_from_slice(&(v as f32).to_le_bytes());
    }
    out
}

pub fn decode_fmap(bytes: &[u8], context: &Path) -> Result<DenseMap<f64>> {
    let (size, body) = split_header(bytes, "FMAP", context)?;
    let values = body
        .chunks_exact(4)
        .map(|c| f64::from(f32::from_le_bytes([c[0], c[1], c[2], c[3]])))
        .collect();
    DenseMap::new(size, values)
}

pub fn read_fmap(path: &Path) -> Result<DenseMap<f64>> {
    decode_fmap(&read_bytes(path)?, path)
}

pub fn write_fmap(path: &Path, map: &DenseMap<f64>) -> Result<()> {
    write_file(path, encode_fmap(map))
}

pub fn encode_imap(map: &LabelMap) -> Vec<u8> {
    let size = map.size();
    let mut out = format!("IMAP {} {}\n", size.width, size.height).into_bytes();
    for &v in map.labels() {
        out.extend_from_slice(&v.to_le_bytes());
    }
    out
}

pub fn decode_imap(bytes: &[u8], context: &Path) -> Result<LabelMap> {
    let (size, body) = split_header(bytes, "IMAP", context)?;
    let labels = body
        .chunks_exact(4)
        .map(|c| i32::from_le_bytes([c[0], c[1], c[2], c[3]]))
        .collect();
    LabelMap::new(size, labels)
}

pub fn read_imap(path: &Path) -> Result<LabelMap> {
    decode_imap(&read_bytes(path)?, path)
}

pub fn write_imap(path: &Path, map: &LabelMap) -> Result<()> {
    write_file(path, encode_imap(map))
}

/// Loads an RGB image (any format the `image` crate decodes) with channels
/// scaled to `[0, 1]`.
pub fn read_frame(path: &Path) -> Result<RgbFrame<f64>> {
    let img = image::open(path)
        .map_err(|e| Error::Image {
            path: path.to_path_buf(),
            message: e.to_string(),
        })?
        .to_rgb8();
    let size = FrameSize::new(img.width(), img.height())?;
    let pixels = img
        .pixels()
        .map(|p| p.0.map(|c| f64::from(c) / 255.0))
        .collect();
    RgbFrame::new(size, pixels)
}

pub fn write_frame(path: &Path, frame: &RgbFrame<f64>) -> Result<()> {
    let size = frame.size();
    let raw: Vec<u8> = frame
        .pixels()
        .iter()
        .flat_map(|p| p.map(|c| (c.clamp(0.0, 1.0) * 255.0).round() as u8))
        .collect();
    let img =
        image::RgbImage::from_raw(size.width, size.height, raw).expect("buffer matches frame size");
    if let Some(dir) = path.parent() {
        fs::create_dir_all(dir).map_err(|e| Error::io(dir, e))?;
    }
    img.save(path).map_err(|e| Error::Image {
        path: path.to_path_buf(),
        message: e.to_string(),
    })
}

fn csv(values: &[f64]) -> String {
    let mut s = String::new();
    for (i, v) in values.iter().enumerate() {
        if i > 0 {
            s.push(',');
        }
        write!(s, "{v}").unwrap();
    }
    s
}

fn parse_f64(field: &str, what: &str, ctx: &str) -> Result<f64> {
    field
        .trim()
        .parse()
        .map_err(|_| Error::parse(ctx, format!("bad {what} `{field}`")))
}

fn parse_csv(field: &str, ctx: &str) -> Result<Vec<f64>> {
    if field.trim().is_empty() {
        return Ok(Vec::new());
    }
    field
        .split(',')
        .map(|v| parse_f64(v, "vector component", ctx))
        .collect()
}

fn parse_mask(field: &str, size: FrameSize, ctx: &str) -> Result<BinaryMask> {
    let mask: BinaryMask = field
        .parse()
        .map_err(|e: Error| Error::parse(ctx, e.to_string()))?;
    if mask.size() != size {
        return Err(Error::parse(
            ctx,
            format!("mask size {} differs from frame size {size}", mask.size()),
        ));
    }
    Ok(mask)
}

fn records(text: &str) -> impl Iterator<Item = (usize, &str)> {
    text.lines()
        .enumerate()
        .filter(|(_, l)| !l.trim().is_empty() && !l.starts_with('#'))
        .map(|(i, l)| (i + 1, l))
}

pub fn render_proposals(props: &[RegionProposal<f64>], scored: bool) -> String {
    let mut out = String::new();
    for p in props {
        write!(
            out,
            "{}\t{}\t{}\t{}\t{}",
            p.frame_index,
            p.mask,
            p.appearance_score,
            p.classifier_confidence,
            csv(&p.feature)
        )
        .unwrap();
        if scored {
            write!(
                out,
                "\t{}\t{}\t{}",
                p.motion_score, p.combined_score, p.rescored
            )
            .unwrap();
        }
        out.push('\n');
    }
    out
}

/// Parses a proposal file. Proposals must lie on frames `< frames` and
/// carry `feature_dim` features.
pub fn parse_proposals(
    text: &str,
    size: FrameSize,
    frames: usize,
    feature_dim: usize,
    context: &str,
) -> Result<Vec<RegionProposal<f64>>> {
    let mut out = Vec::new();
    for (line_no, line) in records(text) {
        let ctx = format!("{context}:{line_no}");
        let fields: Vec<&str> = line.split('\t').collect();
        if fields.len() != 5 && fields.len() != 8 {
            return Err(Error::parse(
                &ctx,
                format!("expected 5 or 8 fields, found {}", fields.len()),
            ));
        }
        let frame: usize = fields[0]
            .trim()
            .parse()
            .map_err(|_| Error::parse(&ctx, "bad frame index"))?;
        if frame >= frames {
            return Err(Error::parse(
                &ctx,
                format!("frame {frame} beyond {frames} frames"),
            ));
        }
        let mask = parse_mask(fields[1], size, &ctx)?;
        let feature = parse_csv(fields[4], &ctx)?;
        if feature.len() != feature_dim {
            return Err(Error::parse(
                &ctx,
                format!("expected {feature_dim} features, found {}", feature.len()),
            ));
        }
        let mut p = RegionProposal::new(
            frame,
            mask,
            parse_f64(fields[2], "appearance score", &ctx)?,
            parse_f64(fields[3], "confidence", &ctx)?,
            feature,
        )
        .map_err(|e| Error::parse(&ctx, e.to_string()))?;
        if fields.len() == 8 {
            p.motion_score = parse_f64(fields[5], "motion score", &ctx)?;
            p.combined_score = parse_f64(fields[6], "combined score", &ctx)?;
            p.rescored = parse_f64(fields[7], "rescored", &ctx)?;
        }
        out.push(p);
    }
    Ok(out)
}

fn regen_record(p: &RegeneratedProposal<f64>) -> String {
    format!(
        "{}\t{}\t{}\t{}\t{}",
        p.frame_index,
        p.mask,
        p.confidence,
        p.source_level,
        csv(&p.feature)
    )
}

fn parse_regen_record(line: &str, size: FrameSize, ctx: &str) -> Result<RegeneratedProposal<f64>> {
    let fields: Vec<&str> = line.split('\t').collect();
    if fields.len() != 5 {
        return Err(Error::parse(
            ctx,
            format!("expected 5 fields, found {}", fields.len()),
        ));
    }
    let mask = parse_mask(fields[1], size, ctx)?;
    let bbox = mask
        .tight_box()
        .ok_or_else(|| Error::parse(ctx, "empty mask"))?;
    Ok(RegeneratedProposal {
        frame_index: fields[0]
            .trim()
            .parse()
            .map_err(|_| Error::parse(ctx, "bad frame index"))?,
        mask,
        bbox,
        confidence: parse_f64(fields[2], "confidence", ctx)?,
        source_level: parse_f64(fields[3], "source level", ctx)?,
        feature: parse_csv(fields[4], ctx)?,
    })
}

pub fn render_regenerated(props: &[RegeneratedProposal<f64>]) -> String {
    props.iter().map(|p| regen_record(p) + "\n").collect()
}

pub fn parse_regenerated(
    text: &str,
    size: FrameSize,
    context: &str,
) -> Result<Vec<RegeneratedProposal<f64>>> {
    records(text)
        .map(|(n, line)| parse_regen_record(line, size, &format!("{context}:{n}")))
        .collect()
}

pub fn render_tracks(tracks: &[Track<f64>]) -> String {
    let mut out = String::new();
    for t in tracks {
        writeln!(out, "track\t{}\t{}\t{}", t.id, t.phi, csv(&t.feature)).unwrap();
        for e in &t.entries {
            let b = e.bbox;
            writeln!(
                out,
                "entry\t{}\t{},{},{},{}",
                e.frame_index, b.x0, b.y0, b.x1, b.y1
            )
            .unwrap();
            for p in &e.absorbed {
                writeln!(out, "prop\t{}", regen_record(p)).unwrap();
            }
        }
    }
    out
}

pub fn parse_tracks(text: &str, size: FrameSize, context: &str) -> Result<Vec<Track<f64>>> {
    let mut tracks: Vec<Track<f64>> = Vec::new();
    for (n, line) in records(text) {
        let ctx = format!("{context}:{n}");
        let (kind, rest) = line.split_once('\t').unwrap_or((line, ""));
        match kind {
            "track" => {
                let f: Vec<&str> = rest.split('\t').collect();
                if f.len() != 3 {
                    return Err(Error::parse(&ctx, "track line needs id, phi, feature"));
                }
                tracks.push(Track {
                    id: f[0]
                        .parse()
                        .map_err(|_| Error::parse(&ctx, "bad track id"))?,
                    entries: Vec::new(),
                    feature: parse_csv(f[2], &ctx)?,
                    phi: parse_f64(f[1], "phi", &ctx)?,
                });
            }
            "entry" => {
                let track = tracks
                    .last_mut()
                    .ok_or_else(|| Error::parse(&ctx, "entry before track"))?;
                let (frame, b) = rest
                    .split_once('\t')
                    .ok_or_else(|| Error::parse(&ctx, "entry needs frame and box"))?;
                let c: Vec<u32> = b
                    .split(',')
                    .map(|v| v.trim().parse().map_err(|_| Error::parse(&ctx, "bad box")))
                    .collect::<Result<_>>()?;
                if c.len() != 4 {
                    return Err(Error::parse(&ctx, "box needs 4 coordinates"));
                }
                track.entries.push(TrackEntry {
                    frame_index: frame.parse().map_err(|_| Error::parse(&ctx, "bad frame"))?,
                    bbox: BoundingBox::new(c[0], c[1], c[2], c[3])?,
                    absorbed: Vec::new(),
                });
            }
            "prop" => {
                let entry = tracks
                    .last_mut()
                    .and_then(|t| t.entries.last_mut())
                    .ok_or_else(|| Error::parse(&ctx, "prop before entry"))?;
                entry.absorbed.push(parse_regen_record(rest, size, &ctx)?);
            }
            other => return Err(Error::parse(&ctx, format!("unknown record `{other}`"))),
        }
    }
    Ok(tracks)
}

/// `n`, `delta`, `lambda`, `budget`, `phi` lines, then `n` rows of `w`.
pub fn render_instance(inst: &SelectionInstance<f64>) -> String {
    let n = inst.len();
    let mut out = format!(
        "n {n}\ndelta {}\nlambda {}\nbudget {}\nphi {}\n",
        inst.delta(),
        inst.lambda(),
        inst.budget(),
        csv(inst.phi())
    );
    for i in 0..n {
        let row: Vec<f64> = (0..n).map(|j| inst.w(i, j)).collect();
        writeln!(out, "w {}", csv(&row)).unwrap();
    }
    out
}

pub fn parse_instance(text: &str, context: &str) -> Result<SelectionInstance<f64>> {
    let mut n = None;
    let (mut delta, mut lambda, mut budget) = (None, None, None);
    let mut phi = Vec::new();
    let mut w = Vec::new();
    for (line_no, line) in records(text) {
        let ctx = format!("{context}:{line_no}");
        let (key, value) = line.split_once(' ').unwrap_or((line, ""));
        match key {
            "n" => {
                n = Some(
                    value
                        .trim()
                        .parse::<usize>()
                        .map_err(|_| Error::parse(&ctx, "bad n"))?,
                )
            }
            "delta" => delta = Some(parse_f64(value, "delta", &ctx)?),
            "lambda" => lambda = Some(parse_f64(value, "lambda", &ctx)?),
            "budget" => {
                budget = Some(
                    value
                        .trim()
                        .parse::<usize>()
                        .map_err(|_| Error::parse(&ctx, "bad budget"))?,
                )
            }
            "phi" => phi = parse_csv(value, &ctx)?,
            "w" => w.push(parse_csv(value, &ctx)?),
            other => return Err(Error::parse(&ctx, format!("unknown key `{other}`"))),
        }
    }
    let n = n.ok_or_else(|| Error::parse(context, "missing n"))?;
    if phi.len() != n {
        return Err(Error::parse(
            context,
            format!("phi has {} entries, expected {n}", phi.len()),
        ));
    }
    SelectionInstance::new(
        w,
        phi,
        delta.unwrap_or(0.3),
        lambda.unwrap_or(1.0),
        budget.filter(|&k| k > 0).unwrap_or(n),
    )
}

pub fn render_selection(result: &SelectionResult<f64>) -> String {
    let sel: Vec<String> = result.selected.iter().map(|i| i.to_string()).collect();
    format!(
        "selected {}\nobjective {}\ngains {}\n",
        sel.join(","),
        result.objective_value,
        csv(&result.gain_trace)
    )
}

pub fn parse_selection(text: &str, context: &str) -> Result<Vec<usize>> {
    for (n, line) in records(text) {
        if let Some(rest) = line.strip_prefix("selected") {
            let rest = rest.trim();
            if rest.is_empty() {
                return Ok(Vec::new());
            }
            return rest
                .split(',')
                .map(|v| {
                    v.trim()
                        .parse()
                        .map_err(|_| Error::parse(format!("{context}:{n}"), "bad index"))
                })
                .collect();
        }
    }
    Err(Error::parse(context, "missing `selected` line"))
}
