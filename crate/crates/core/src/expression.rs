use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::error::Error;

/// The six basic emotions plus the neutral face.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub enum Expression {
    Joy,
    Anger,
    Sadness,
    Disgust,
    Surprise,
    Fear,
    Neutral,
}

impl Expression {
    pub const ALL: [Expression; 7] = [
        Expression::Joy,
        Expression::Anger,
        Expression::Sadness,
        Expression::Disgust,
        Expression::Surprise,
        Expression::Fear,
        Expression::Neutral,
    ];

    /// Expressions that own a morph channel on the mouth display. Neutral is the zero point.
    pub const BASIC: [Expression; 6] = [
        Expression::Joy,
        Expression::Anger,
        Expression::Sadness,
        Expression::Disgust,
        Expression::Surprise,
        Expression::Fear,
    ];

    /// Row/column order used by confusion-matrix reports.
    pub const REPORT_ORDER: [Expression; 7] = [
        Expression::Anger,
        Expression::Surprise,
        Expression::Disgust,
        Expression::Fear,
        Expression::Joy,
        Expression::Sadness,
        Expression::Neutral,
    ];

    pub fn name(self) -> &'static str {
        match self {
            Expression::Joy => "Joy",
            Expression::Anger => "Anger",
            Expression::Sadness => "Sadness",
            Expression::Disgust => "Disgust",
            Expression::Surprise => "Surprise",
            Expression::Fear => "Fear",
            Expression::Neutral => "Neutral",
        }
    }

    /// Two-letter abbreviation used in report column headers.
    pub fn abbrev(self) -> &'static str {
        match self {
            Expression::Joy => "Jy",
            Expression::Anger => "Ag",
            Expression::Sadness => "Sd",
            Expression::Disgust => "Dg",
            Expression::Surprise => "Sp",
            Expression::Fear => "Fr",
            Expression::Neutral => "Nt",
        }
    }

    /// Index into [`Expression::BASIC`], `None` for Neutral.
    pub fn channel(self) -> Option<usize> {
        Expression::BASIC.iter().position(|&e| e == self)
    }

    pub fn is_neutral(self) -> bool {
        self == Expression::Neutral
    }
}

impl fmt::Display for Expression {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for Expression {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        let e = match s.trim().to_ascii_lowercase().as_str() {
            "joy" | "happiness" | "happy" => Expression::Joy,
            "anger" | "angry" => Expression::Anger,
            "sadness" | "sad" => Expression::Sadness,
            "disgust" => Expression::Disgust,
            "surprise" => Expression::Surprise,
            "fear" => Expression::Fear,
            "neutral" => Expression::Neutral,
            _ => return Err(Error::UnknownLabel(s.to_string())),
        };
        Ok(e)
    }
}

/// How an expression is rendered on the mechanical face.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub enum Mode {
    /// Only the DOFs that realize FACS action units.
    #[serde(rename = "au")]
    AuBased,
    /// Action units plus animal-like ear and forehead gestures.
    #[serde(rename = "au-animal")]
    #[default]
    AuAnimalBased,
}

impl Mode {
    pub const ALL: [Mode; 2] = [Mode::AuBased, Mode::AuAnimalBased];

    pub fn key(self) -> &'static str {
        match self {
            Mode::AuBased => "au",
            Mode::AuAnimalBased => "au-animal",
        }
    }
}

impl fmt::Display for Mode {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.key())
    }
}

impl FromStr for Mode {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s.trim().to_ascii_lowercase().as_str() {
            "au" | "au-based" => Ok(Mode::AuBased),
            "au-animal" | "au+animal" | "au-animal-based" => Ok(Mode::AuAnimalBased),
            other => Err(Error::InvalidArgument(format!(
                "unknown mode `{other}` (expected au or au-animal)"
            ))),
        }
    }
}
