use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PhonemeSegment {
    pub phoneme: String,
    pub start: f64,
    pub end: f64,
}

impl PhonemeSegment {
    pub fn new(phoneme: impl Into<String>, start: f64, end: f64) -> Self {
        PhonemeSegment {
            phoneme: phoneme.into(),
            start,
            end,
        }
    }

    pub fn duration(&self) -> f64 {
        self.end - self.start
    }

    pub fn midpoint(&self) -> f64 {
        0.5 * (self.start + self.end)
    }
}

/// Time-aligned phoneme sequence: segments are ordered and never overlap.
#[derive(Debug, Clone, PartialEq, Default, Serialize, Deserialize)]
#[serde(try_from = "Vec<PhonemeSegment>", into = "Vec<PhonemeSegment>")]
pub struct Transcript {
    segments: Vec<PhonemeSegment>,
}

impl Transcript {
    pub fn new(segments: Vec<PhonemeSegment>) -> Result<Self> {
        for (i, s) in segments.iter().enumerate() {
            if !(s.start.is_finite() && s.end.is_finite()) {
                return Err(Error::InvalidTranscript(format!("segment {i} has non-finite times")));
            }
            if s.start >= s.end {
                return Err(Error::InvalidTranscript(format!(
                    "segment {i} (`{}`) has start {} >= end {}",
                    s.phoneme, s.start, s.end
                )));
            }
            if i > 0 && segments[i - 1].end > s.start {
                return Err(Error::InvalidTranscript(format!(
                    "segment {i} (`{}`) starts at {} before the previous one ends at {}",
                    s.phoneme,
                    s.start,
                    segments[i - 1].end
                )));
            }
        }
        Ok(Transcript { segments })
    }

    /// Parses `start_seconds end_seconds IPA_symbol` lines. Blank lines and `#`
    /// comments are skipped.
    pub fn parse(text: &str, source: &str) -> Result<Self> {
        let mut segments = Vec::new();
        for (lineno, raw) in text.lines().enumerate() {
            let line = raw.split('#').next().unwrap_or("").trim();
            if line.is_empty() {
                continue;
            }
            let fields: Vec<&str> = line.split_whitespace().collect();
            let [start, end, phoneme] = fields[..] else {
                return Err(Error::parse(
                    source,
                    lineno + 1,
                    "expected `start end phoneme`",
                ));
            };
            let time = |s: &str| {
                s.parse::<f64>()
                    .map_err(|_| Error::parse(source, lineno + 1, format!("bad time `{s}`")))
            };
            segments.push(PhonemeSegment::new(phoneme, time(start)?, time(end)?));
        }
        Transcript::new(segments)
    }

    pub fn load(path: impl AsRef<Path>) -> Result<Self> {
        let path = path.as_ref();
        let text = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
        Transcript::parse(&text, &path.display().to_string())
    }

    pub fn segments(&self) -> &[PhonemeSegment] {
        &self.segments
    }

    pub fn len(&self) -> usize {
        self.segments.len()
    }

    pub fn is_empty(&self) -> bool {
        self.segments.is_empty()
    }

    /// `(first start, last end)`, or `None` for an empty transcript.
    pub fn span(&self) -> Option<(f64, f64)> {
        Some((self.segments.first()?.start, self.segments.last()?.end))
    }

    pub(crate) fn segments_mut(&mut self) -> &mut [PhonemeSegment] {
        &mut self.segments
    }
}

impl TryFrom<Vec<PhonemeSegment>> for Transcript {
    type Error = Error;

    fn try_from(v: Vec<PhonemeSegment>) -> Result<Self> {
        Transcript::new(v)
    }
}

impl From<Transcript> for Vec<PhonemeSegment> {
    fn from(t: Transcript) -> Self {
        t.segments
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn parses_alignment_lines() {
        let t = Transcript::parse("# demo\n0.0 0.1 m\n0.1 0.3 a\n\n0.35 0.4 sil\n", "t").unwrap();
        assert_eq!(t.len(), 3);
        assert_eq!(t.segments()[1].phoneme, "a");
        assert_eq!(t.span(), Some((0.0, 0.4)));
    }

    #[test]
    fn rejects_overlap_and_inverted_segments() {
        assert!(Transcript::parse("0.0 0.2 m\n0.1 0.3 a\n", "t").is_err());
        assert!(Transcript::parse("0.2 0.2 m\n", "t").is_err());
        assert!(Transcript::parse("0.0 0.2\n", "t").is_err());
        assert!(Transcript::parse("0.0 x m\n", "t").is_err());
    }

    #[test]
    fn empty_transcript_is_valid() {
        let t = Transcript::parse("", "t").unwrap();
        assert!(t.is_empty());
        assert_eq!(t.span(), None);
    }
}
