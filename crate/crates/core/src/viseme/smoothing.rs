use super::morph::MorphWeights;
use super::table::VisemeTable;
use super::transcript::Transcript;
use crate::error::{Error, Result};

/// Kernel width as a multiple of each segment's half-duration. At 1.0 a kernel
/// only covers its own segment, which leaves no overlap to smooth across.
pub const DEFAULT_BANDWIDTH_SCALE: f64 = 2.0;

/// `0.75 (1 - u^2)` on `|u| < 1`, zero elsewhere (including the support edge).
pub fn epanechnikov(u: f64) -> f64 {
    if u.abs() < 1.0 {
        0.75 * (1.0 - u * u)
    } else {
        0.0
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
struct TrackSegment {
    class: usize,
    start: f64,
    end: f64,
}

/// A transcript with every phoneme resolved to its viseme class.
#[derive(Debug, Clone)]
pub struct VisemeTrack {
    segments: Vec<TrackSegment>,
    classes: usize,
}

impl VisemeTrack {
    pub fn new(transcript: &Transcript, table: &VisemeTable) -> Result<Self> {
        let segments = transcript
            .segments()
            .iter()
            .map(|s| {
                Ok(TrackSegment {
                    class: table.lookup(&s.phoneme)?.id as usize,
                    start: s.start,
                    end: s.end,
                })
            })
            .collect::<Result<Vec<_>>>()?;
        Ok(VisemeTrack {
            segments,
            classes: table.len(),
        })
    }

    pub fn span(&self) -> Option<(f64, f64)> {
        Some((self.segments.first()?.start, self.segments.last()?.end))
    }

    /// Normalized viseme weights at time `t`.
    ///
    /// Every segment contributes `K(u)` to its class with
    /// `u = (t - midpoint) / (scale * half_duration)`; contributions of the same class
    /// add up, and the result is normalized to sum to one. Outside the utterance the
    /// frame is silent (all zero). If no kernel reaches `t` inside the utterance,
    /// the segments whose closed interval contains `t` share the weight equally;
    /// inside a pause the frame is silent.
    pub fn weights_at(&self, t: f64, bandwidth_scale: f64) -> MorphWeights {
        let mut out = MorphWeights::silence(self.classes, t);
        let Some((first, last)) = self.span() else {
            return out;
        };
        if t < first || t > last {
            return out;
        }

        let mut total = 0.0;
        for s in &self.segments {
            let half = 0.5 * (s.end - s.start);
            let mid = 0.5 * (s.start + s.end);
            let k = epanechnikov((t - mid) / (bandwidth_scale * half));
            if k > 0.0 {
                out.viseme_weights[s.class] += k;
                total += k;
            }
        }

        if total > 0.0 {
            for w in &mut out.viseme_weights {
                *w /= total;
            }
        } else {
            let containing: Vec<usize> = self
                .segments
                .iter()
                .filter(|s| s.start <= t && t <= s.end)
                .map(|s| s.class)
                .collect();
            let share = 1.0 / containing.len().max(1) as f64;
            for c in containing {
                out.viseme_weights[c] += share;
            }
        }
        out
    }
}

/// Smoothed viseme weights of `transcript` at time `t`.
pub fn smooth_weights(
    transcript: &Transcript,
    table: &VisemeTable,
    t: f64,
    bandwidth_scale: f64,
) -> Result<MorphWeights> {
    check_scale(bandwidth_scale)?;
    Ok(VisemeTrack::new(transcript, table)?.weights_at(t, bandwidth_scale))
}

pub(crate) fn check_scale(bandwidth_scale: f64) -> Result<()> {
    if bandwidth_scale > 0.0 && bandwidth_scale.is_finite() {
        Ok(())
    } else {
        Err(Error::InvalidArgument(format!(
            "bandwidth scale must be > 0, got {bandwidth_scale}"
        )))
    }
}
