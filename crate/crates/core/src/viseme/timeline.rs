use std::io::Write;
use std::path::Path;

use serde::{Deserialize, Serialize};

use super::closure::{force_labial_closure, ClosureParams, DEFAULT_CLOSURE_FRACTION};
use super::morph::{blend_expression, channel_names, MorphTargetRef, MorphWeights};
use super::smoothing::{VisemeTrack, DEFAULT_BANDWIDTH_SCALE};
use super::table::VisemeTable;
use super::transcript::Transcript;
use crate::error::{Error, Result};
use crate::expression::Expression;
use crate::kinematics::{frame_count, DEFAULT_FRAME_RATE};

/// From `time` on, show `expression` at intensity `lambda` (until the next key).
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ExpressionKey {
    pub time: f64,
    pub expression: Expression,
    pub lambda: f64,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct RenderParams {
    pub frame_rate: f64,
    pub bandwidth_scale: f64,
    pub closure_fraction: f64,
}

impl Default for RenderParams {
    fn default() -> Self {
        RenderParams {
            frame_rate: DEFAULT_FRAME_RATE,
            bandwidth_scale: DEFAULT_BANDWIDTH_SCALE,
            closure_fraction: DEFAULT_CLOSURE_FRACTION,
        }
    }
}

/// Renders an utterance into mouth frames at a fixed rate.
///
/// Labial closure is forced first, then each frame gets smoothed viseme weights and
/// the expression key active at its timestamp. Frames start at the first segment
/// and run through the last one. Neutral keys leave every expression channel at 0.
pub fn render_timeline(
    transcript: &Transcript,
    expression_track: &[ExpressionKey],
    table: &VisemeTable,
    params: RenderParams,
) -> Result<Vec<MorphWeights>> {
    if !(params.frame_rate > 0.0 && params.frame_rate.is_finite()) {
        return Err(Error::InvalidArgument(format!(
            "frame rate must be > 0, got {}",
            params.frame_rate
        )));
    }
    if expression_track.windows(2).any(|w| w[0].time > w[1].time) {
        return Err(Error::InvalidArgument(
            "expression track must be sorted by time".into(),
        ));
    }
    let Some((start, end)) = transcript.span() else {
        return Ok(Vec::new());
    };

    let closed = force_labial_closure(
        transcript,
        table,
        ClosureParams {
            fraction: params.closure_fraction,
            bandwidth_scale: params.bandwidth_scale,
        },
    )?;
    let track = VisemeTrack::new(&closed, table)?;

    let n = frame_count(end - start, params.frame_rate);
    let mut frames = Vec::with_capacity(n);
    for i in 0..n {
        let t = start + i as f64 / params.frame_rate;
        let mut frame = track.weights_at(t, params.bandwidth_scale);
        let active = expression_track.iter().take_while(|k| k.time <= t).last();
        if let Some(key) = active.filter(|k| !k.expression.is_neutral()) {
            frame = blend_expression(&frame, &MorphTargetRef::expression(key.expression), key.lambda)?.value;
        }
        frames.push(frame);
    }
    Ok(frames)
}

/// Writes frames as CSV: `timestamp` followed by one column per morph channel.
pub fn write_csv<W: Write>(frames: &[MorphWeights], classes: usize, mut out: W) -> std::io::Result<()> {
    let mut header = vec!["timestamp".to_string()];
    header.extend(channel_names(classes));
    writeln!(out, "{}", header.join(","))?;
    for f in frames {
        let mut row = vec![f.timestamp.to_string()];
        row.extend(f.channels().map(|v| v.to_string()));
        writeln!(out, "{}", row.join(","))?;
    }
    Ok(())
}

#[derive(Serialize)]
struct FrameRecord<'a> {
    timestamp: f64,
    visemes: &'a [f64],
    expressions: std::collections::BTreeMap<&'static str, f64>,
}

/// Writes one JSON object per line.
pub fn write_jsonl<W: Write>(frames: &[MorphWeights], mut out: W) -> std::io::Result<()> {
    for f in frames {
        let record = FrameRecord {
            timestamp: f.timestamp,
            visemes: &f.viseme_weights,
            expressions: Expression::BASIC
                .iter()
                .map(|&e| (e.name(), f.offset(e)))
                .collect(),
        };
        serde_json::to_writer(&mut out, &record)?;
        out.write_all(b"\n")?;
    }
    Ok(())
}

const BAR_WIDTH: u32 = 6;
const BAR_HEIGHT: u32 = 64;

/// Bar-chart rendering of one frame: one white bar per channel, height
/// proportional to its weight.
pub fn preview_image(frame: &MorphWeights) -> image::GrayImage {
    let values: Vec<f64> = frame.channels().collect();
    let width = values.len() as u32 * BAR_WIDTH;
    image::GrayImage::from_fn(width, BAR_HEIGHT, |x, y| {
        let v = values[(x / BAR_WIDTH) as usize].clamp(0.0, 1.0);
        let filled = (v * BAR_HEIGHT as f64).round() as u32;
        let lit = BAR_HEIGHT - y <= filled && x % BAR_WIDTH != BAR_WIDTH - 1;
        image::Luma([if lit { 255 } else { 0 }])
    })
}

/// Saves `frame_00000.pgm`, `frame_00001.pgm`, ... into `dir`.
pub fn write_previews(frames: &[MorphWeights], dir: &Path) -> Result<()> {
    std::fs::create_dir_all(dir).map_err(|e| Error::io(dir, e))?;
    for (i, f) in frames.iter().enumerate() {
        let path = dir.join(format!("frame_{i:05}.pgm"));
        preview_image(f)
            .save_with_format(&path, image::ImageFormat::Pnm)
            .map_err(|e| Error::Format(format!("{}: {e}", path.display())))?;
    }
    Ok(())
}
