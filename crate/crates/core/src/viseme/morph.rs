use std::fmt;

use serde::{Deserialize, Serialize};

use crate::diag::{clamp_unit, Outcome};
use crate::error::{Error, Result};
use crate::expression::Expression;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum MorphKind {
    Viseme(u8),
    Expression(Expression),
    Neutral,
}

/// A named extreme shape of the mouth model.
#[derive(Debug, Clone, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct MorphTargetRef {
    pub name: String,
    pub kind: MorphKind,
}

impl MorphTargetRef {
    pub fn neutral() -> Self {
        MorphTargetRef {
            name: "neutral".into(),
            kind: MorphKind::Neutral,
        }
    }

    pub fn expression(expression: Expression) -> Self {
        if expression.is_neutral() {
            return MorphTargetRef::neutral();
        }
        MorphTargetRef {
            name: format!("expr_{}", expression.name().to_ascii_lowercase()),
            kind: MorphKind::Expression(expression),
        }
    }

    pub fn viseme(id: u8) -> Self {
        MorphTargetRef {
            name: format!("viseme_{id:02}"),
            kind: MorphKind::Viseme(id),
        }
    }
}

impl fmt::Display for MorphTargetRef {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.name)
    }
}

/// One mouth frame: a convex mix of viseme shapes plus additive expression offsets.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MorphWeights {
    pub timestamp: f64,
    /// Indexed by viseme class id.
    pub viseme_weights: Vec<f64>,
    /// Indexed like [`Expression::BASIC`].
    pub expression_offsets: [f64; 6],
}

impl MorphWeights {
    pub fn silence(classes: usize, timestamp: f64) -> Self {
        MorphWeights {
            timestamp,
            viseme_weights: vec![0.0; classes],
            expression_offsets: [0.0; 6],
        }
    }

    pub fn viseme_sum(&self) -> f64 {
        self.viseme_weights.iter().sum()
    }

    pub fn is_silent(&self) -> bool {
        self.viseme_weights.iter().all(|&w| w == 0.0)
    }

    pub fn offset(&self, expression: Expression) -> f64 {
        expression
            .channel()
            .map_or(0.0, |c| self.expression_offsets[c])
    }

    /// Visemes first, then expression channels; matches [`channel_names`].
    pub fn channels(&self) -> impl Iterator<Item = f64> + '_ {
        self.viseme_weights
            .iter()
            .copied()
            .chain(self.expression_offsets.iter().copied())
    }
}

/// Column names for [`MorphWeights::channels`].
pub fn channel_names(classes: usize) -> Vec<String> {
    (0..classes)
        .map(|id| MorphTargetRef::viseme(id as u8).name)
        .chain(
            Expression::BASIC
                .iter()
                .map(|&e| MorphTargetRef::expression(e).name),
        )
        .collect()
}

/// Adds an expression onto a speech frame.
///
/// The expression's full-intensity shape is a unit direction away from the neutral
/// mouth, so blending reduces to setting that expression's offset channel to
/// `lambda`. Viseme weights pass through untouched.
pub fn blend_expression(
    frame: &MorphWeights,
    expression: &MorphTargetRef,
    lambda: f64,
) -> Result<Outcome<MorphWeights>> {
    let MorphKind::Expression(e) = expression.kind else {
        return Err(Error::InvalidArgument(format!(
            "`{expression}` is not an expression target"
        )));
    };
    let channel = e.channel().expect("non-neutral expression has a channel");
    let mut warnings = Vec::new();
    let lambda = clamp_unit("lambda", lambda, &mut warnings);
    let mut out = frame.clone();
    out.expression_offsets[channel] = lambda;
    Ok(Outcome::with_warnings(out, warnings))
}

#[cfg(test)]
mod tests {
    use super::*;

    fn speech_frame() -> MorphWeights {
        let mut f = MorphWeights::silence(20, 0.25);
        f.viseme_weights[1] = 0.7;
        f.viseme_weights[12] = 0.3;
        f
    }

    #[test]
    fn zero_lambda_is_identity() {
        let f = speech_frame();
        let out = blend_expression(&f, &MorphTargetRef::expression(Expression::Joy), 0.0).unwrap();
        assert_eq!(out.value, f);
    }

    #[test]
    fn full_lambda_sets_channel() {
        let f = speech_frame();
        let out = blend_expression(&f, &MorphTargetRef::expression(Expression::Anger), 1.0).unwrap();
        assert_eq!(out.value.offset(Expression::Anger), 1.0);
        assert_eq!(out.value.viseme_weights, f.viseme_weights);
    }

    #[test]
    fn silence_plus_half_joy() {
        let f = MorphWeights::silence(20, 0.0);
        let out = blend_expression(&f, &MorphTargetRef::expression(Expression::Joy), 0.5).unwrap();
        assert!(out.value.is_silent());
        assert_eq!(out.value.offset(Expression::Joy), 0.5);
        assert_eq!(out.value.offset(Expression::Fear), 0.0);
    }

    #[test]
    fn clamps_lambda_with_warning() {
        let f = speech_frame();
        let out = blend_expression(&f, &MorphTargetRef::expression(Expression::Fear), 1.4).unwrap();
        assert_eq!(out.value.offset(Expression::Fear), 1.0);
        assert_eq!(out.warnings.len(), 1);
    }

    #[test]
    fn rejects_non_expression_targets() {
        let f = speech_frame();
        assert!(blend_expression(&f, &MorphTargetRef::neutral(), 0.5).is_err());
        assert!(blend_expression(&f, &MorphTargetRef::viseme(3), 0.5).is_err());
    }

    #[test]
    fn channel_layout() {
        let names = channel_names(20);
        assert_eq!(names.len(), 26);
        assert_eq!(names[0], "viseme_00");
        assert_eq!(names[20], "expr_joy");
        assert_eq!(speech_frame().channels().count(), 26);
    }
}
