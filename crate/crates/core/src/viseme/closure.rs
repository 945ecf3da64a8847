use super::smoothing::{check_scale, DEFAULT_BANDWIDTH_SCALE};
use super::table::VisemeTable;
use super::transcript::{PhonemeSegment, Transcript};
use crate::error::{Error, Result};

/// Default extension of each labial segment per side, as a fraction of its duration.
pub const DEFAULT_CLOSURE_FRACTION: f64 = 0.4;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ClosureParams {
    /// Per-side extension as a fraction of the labial segment's duration.
    pub fraction: f64,
    /// Bandwidth scale the transcript will be smoothed with.
    pub bandwidth_scale: f64,
}

impl Default for ClosureParams {
    fn default() -> Self {
        ClosureParams {
            fraction: DEFAULT_CLOSURE_FRACTION,
            bandwidth_scale: DEFAULT_BANDWIDTH_SCALE,
        }
    }
}

/// Lengthens labial segments into their neighbours so the lips fully close.
///
/// Each side of a labial segment grows by `fraction * duration`, or further if
/// needed so the neighbour's smoothing kernel no longer reaches the original
/// labial interval. Growth on a side never removes more than half of the
/// neighbour's current duration, and neighbours are trimmed so the result
/// still has no overlaps. Sides facing the utterance boundary or another labial
/// segment are left alone.
///
/// Any other segment whose kernel would still reach into an original labial
/// interval is split into consecutive pieces of the same phoneme, each short
/// enough to stay clear. Inside every labial interval the labial class then has
/// weight 1. Transcripts without labials come back unchanged.
pub fn force_labial_closure(
    transcript: &Transcript,
    table: &VisemeTable,
    params: ClosureParams,
) -> Result<Transcript> {
    check_scale(params.bandwidth_scale)?;
    if !(params.fraction >= 0.0 && params.fraction.is_finite()) {
        return Err(Error::InvalidArgument(format!(
            "closure fraction must be >= 0, got {}",
            params.fraction
        )));
    }
    let labial: Vec<bool> = transcript
        .segments()
        .iter()
        .map(|s| Ok(table.lookup(&s.phoneme)?.is_labial))
        .collect::<Result<_>>()?;

    let mut out = transcript.clone();
    let segs = out.segments_mut();
    let scale = params.bandwidth_scale;

    for i in 0..segs.len() {
        if !labial[i] {
            continue;
        }
        let (s, e) = (segs[i].start, segs[i].end);
        let margin = params.fraction * (e - s);

        if i > 0 && !labial[i - 1] {
            let (ps, pe) = (segs[i - 1].start, segs[i - 1].end);
            let cap = 0.5 * (pe - ps);
            // Largest neighbour end whose kernel support stops at or before `s`.
            let clear = (2.0 * s + (scale - 1.0) * ps) / (scale + 1.0);
            let desired = s - margin;
            let new_pe = clear.min(desired).clamp(pe - cap, pe);
            let new_s = if new_pe < pe { new_pe } else { desired.max(pe) };
            segs[i - 1].end = new_pe;
            segs[i].start = new_s;
        }

        if i + 1 < segs.len() && !labial[i + 1] {
            let (ns, ne) = (segs[i + 1].start, segs[i + 1].end);
            let cap = 0.5 * (ne - ns);
            let clear = (2.0 * e + (scale - 1.0) * ne) / (scale + 1.0);
            let desired = e + margin;
            let new_ns = clear.max(desired).clamp(ns, ns + cap);
            let new_e = if new_ns > ns { new_ns } else { desired.min(ns) };
            segs[i + 1].start = new_ns;
            segs[i].end = new_e;
        }
    }

    let protected: Vec<(f64, f64)> = transcript
        .segments()
        .iter()
        .zip(&labial)
        .filter(|(_, &l)| l)
        .map(|(seg, _)| (seg.start, seg.end))
        .collect();
    let reach = 0.5 * (scale - 1.0);
    let mut result = Vec::with_capacity(segs.len());
    for (seg, &is_labial) in segs.iter().zip(&labial) {
        if is_labial || reach <= 0.0 || protected.is_empty() {
            result.push(seg.clone());
            continue;
        }
        let lo = protected
            .iter()
            .map(|&(_, e)| e)
            .filter(|&e| e <= seg.start)
            .fold(f64::NEG_INFINITY, f64::max);
        let hi = protected
            .iter()
            .map(|&(s, _)| s)
            .filter(|&s| s >= seg.end)
            .fold(f64::INFINITY, f64::min);
        result.extend(split_for_reach(seg, lo, hi, reach));
    }
    Transcript::new(result)
}

/// Pieces smaller than this are not worth splitting off.
const MIN_PIECE: f64 = 1e-6;
const MAX_PIECES: usize = 64;

/// Splits `seg` so that no piece's kernel support, which extends `reach` times the
/// piece's duration past each end, crosses `lo` on the left or `hi` on the right.
fn split_for_reach(seg: &PhonemeSegment, lo: f64, hi: f64, reach: f64) -> Vec<PhonemeSegment> {
    let piece = |a: f64, b: f64| PhonemeSegment::new(seg.phoneme.clone(), a, b);
    let (mut a, mut b) = (seg.start, seg.end);
    let mut left = Vec::new();
    let mut right = Vec::new();
    while left.len() + right.len() < MAX_PIECES {
        let d = b - a;
        let clear_right = b + reach * d <= hi;
        let clear_left = a - reach * d >= lo;
        if clear_right && clear_left {
            break;
        }
        if !clear_right {
            let w = ((hi - b) / reach).min((b - lo) / (1.0 + reach));
            if w <= MIN_PIECE || w >= d - MIN_PIECE {
                break;
            }
            right.push(piece(b - w, b));
            b -= w;
        } else {
            let w = ((a - lo) / reach).min((hi - a) / (1.0 + reach));
            if w <= MIN_PIECE || w >= d - MIN_PIECE {
                break;
            }
            left.push(piece(a, a + w));
            a += w;
        }
    }
    left.push(piece(a, b));
    left.extend(right.into_iter().rev());
    left
}
