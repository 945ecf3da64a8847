//! Dataset manifests and the sequence sampling rule.

use std::collections::BTreeMap;
use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};

use robohead_core::Expression;

use crate::error::{require, CliError, CliResult};

/// One manifest row. Paths are relative to the manifest's directory unless absolute.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct ManifestEntry {
    pub image: PathBuf,
    pub landmarks: PathBuf,
    /// Expression shown by the whole sequence.
    pub label: String,
    pub subject: String,
    pub sequence: String,
    pub frame: u32,
}

#[derive(Debug, Clone, PartialEq)]
pub struct DatasetManifest {
    pub root: PathBuf,
    pub entries: Vec<ManifestEntry>,
    /// Class names in label-index order.
    pub classes: Vec<String>,
}

/// Class order used for training and labels: the six basic expressions, then Neutral.
pub fn expression_classes() -> Vec<String> {
    Expression::ALL.iter().map(|e| e.name().to_string()).collect()
}

/// Row and column order of published CK+ style confusion tables.
pub const REPORT_ORDER: [&str; 7] = ["Anger", "Surprise", "Disgust", "Fear", "Joy", "Sadness", "Neutral"];

impl DatasetManifest {
    /// Reads a CSV with header `image,landmarks,label,subject,sequence,frame`.
    pub fn load(path: &Path) -> CliResult<Self> {
        require("manifest", path)?;
        let mut reader = csv::ReaderBuilder::new()
            .trim(csv::Trim::All)
            .comment(Some(b'#'))
            .from_path(path)
            .map_err(|e| CliError::Input(format!("{}: {e}", path.display())))?;
        let entries = reader
            .deserialize()
            .collect::<Result<Vec<ManifestEntry>, _>>()
            .map_err(|e| CliError::Input(format!("{}: {e}", path.display())))?;
        let root = path.parent().unwrap_or(Path::new("")).to_path_buf();
        let manifest = DatasetManifest { root, entries, classes: expression_classes() };
        manifest.validate()?;
        Ok(manifest)
    }

    pub fn validate(&self) -> CliResult<()> {
        for (row, e) in self.entries.iter().enumerate() {
            let expression: Expression = e
                .label
                .parse()
                .map_err(|_| CliError::Input(format!("manifest row {}: unknown label `{}`", row + 1, e.label)))?;
            if !self.classes.iter().any(|c| c == expression.name()) {
                return Err(CliError::Input(format!("manifest row {}: label `{}` is not a declared class", row + 1, e.label)));
            }
            require("image", &self.resolve(&e.image))?;
            require("landmarks", &self.resolve(&e.landmarks))?;
        }
        Ok(())
    }

    pub fn resolve(&self, path: &Path) -> PathBuf {
        if path.is_absolute() {
            path.to_path_buf()
        } else {
            self.root.join(path)
        }
    }

    pub fn write(&self, path: &Path) -> CliResult<()> {
        let mut writer = csv::Writer::from_path(path).map_err(|e| CliError::Input(format!("{}: {e}", path.display())))?;
        for e in &self.entries {
            writer.serialize(e).map_err(|e| CliError::Input(format!("{}: {e}", path.display())))?;
        }
        writer.flush().map_err(|e| CliError::io(path, e))
    }
}

/// A frame picked for training, with its resolved files.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Sample {
    pub image: PathBuf,
    pub landmarks: PathBuf,
    pub label: usize,
    pub subject: String,
    pub sequence: String,
    pub frame: u32,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct SkippedSequence {
    pub subject: String,
    pub sequence: String,
    pub frames: usize,
    pub reason: String,
}

#[derive(Debug, Clone, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct Ingested {
    pub samples: Vec<Sample>,
    pub skipped: Vec<SkippedSequence>,
}

/// Number of final frames taken from each sequence as expression peaks.
pub const PEAK_FRAMES: usize = 3;

/// Keeps the first frame of each sequence as Neutral and its last three as the
/// sequence's expression. Sequences with fewer than four frames are skipped.
///
/// Sequences come out ordered by (subject, sequence id), frames by index.
pub fn ingest_sequences(manifest: &DatasetManifest) -> CliResult<Ingested> {
    let neutral = manifest
        .classes
        .iter()
        .position(|c| c == Expression::Neutral.name())
        .ok_or_else(|| CliError::Input("class list has no Neutral".into()))?;
    let mut groups: BTreeMap<(&str, &str), Vec<&ManifestEntry>> = BTreeMap::new();
    for e in &manifest.entries {
        groups.entry((&e.subject, &e.sequence)).or_default().push(e);
    }

    let mut out = Ingested::default();
    for ((subject, sequence), mut frames) in groups {
        frames.sort_by_key(|e| e.frame);
        let skip = |reason: String| SkippedSequence {
            subject: subject.to_string(),
            sequence: sequence.to_string(),
            frames: frames.len(),
            reason,
        };
        if frames.len() < PEAK_FRAMES + 1 {
            let s = skip(format!("{} frames, need at least {}", frames.len(), PEAK_FRAMES + 1));
            log::warn!("skipping sequence {subject}/{sequence}: {}", s.reason);
            out.skipped.push(s);
            continue;
        }
        if frames.windows(2).any(|w| w[0].frame == w[1].frame) {
            return Err(CliError::Input(format!("sequence {subject}/{sequence} repeats a frame index")));
        }
        let label: Expression = frames[0].label.parse().expect("validated label");
        if frames.iter().any(|e| e.label.parse::<Expression>().ok() != Some(label)) {
            return Err(CliError::Input(format!("sequence {subject}/{sequence} mixes labels")));
        }
        let class = manifest.classes.iter().position(|c| c == label.name()).expect("validated class");
        let sample = |e: &ManifestEntry, label| Sample {
            image: manifest.resolve(&e.image),
            landmarks: manifest.resolve(&e.landmarks),
            label,
            subject: subject.to_string(),
            sequence: sequence.to_string(),
            frame: e.frame,
        };
        out.samples.push(sample(frames[0], neutral));
        for e in &frames[frames.len() - PEAK_FRAMES..] {
            out.samples.push(sample(e, class));
        }
    }
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn manifest(sequences: &[(&str, &str, u32)]) -> DatasetManifest {
        let mut entries = Vec::new();
        for &(subject, label, frames) in sequences {
            for frame in 0..frames {
                entries.push(ManifestEntry {
                    image: format!("{subject}_{frame}.pgm").into(),
                    landmarks: format!("{subject}_{frame}.txt").into(),
                    label: label.into(),
                    subject: subject.into(),
                    sequence: "s1".into(),
                    frame,
                });
            }
        }
        entries.reverse();
        DatasetManifest { root: PathBuf::new(), entries, classes: expression_classes() }
    }

    #[test]
    fn ten_frames_give_one_neutral_and_three_peaks() {
        let m = manifest(&[("a", "Joy", 10)]);
        let out = ingest_sequences(&m).unwrap();
        let frames: Vec<u32> = out.samples.iter().map(|s| s.frame).collect();
        assert_eq!(frames, [0, 7, 8, 9]);
        let labels: Vec<&str> = out.samples.iter().map(|s| m.classes[s.label].as_str()).collect();
        assert_eq!(labels, ["Neutral", "Joy", "Joy", "Joy"]);
    }

    #[test]
    fn four_frames_use_every_frame() {
        let out = ingest_sequences(&manifest(&[("a", "Fear", 4)])).unwrap();
        let frames: Vec<u32> = out.samples.iter().map(|s| s.frame).collect();
        assert_eq!(frames, [0, 1, 2, 3]);
    }

    #[test]
    fn short_sequences_are_skipped_with_a_reason() {
        let out = ingest_sequences(&manifest(&[("a", "Joy", 3), ("b", "Anger", 5)])).unwrap();
        assert_eq!(out.samples.len(), 4);
        assert_eq!(out.skipped.len(), 1);
        assert_eq!(out.skipped[0].subject, "a");
        assert_eq!(out.skipped[0].frames, 3);
    }

    #[test]
    fn mixed_labels_are_an_error() {
        let mut m = manifest(&[("a", "Joy", 5)]);
        m.entries[0].label = "Anger".into();
        assert!(ingest_sequences(&m).is_err());
    }
}
