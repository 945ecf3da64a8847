//! Perceived expression to robot expression: vote count to intensity, then pose
//! trajectory and mouth frames at that intensity.

use std::io::Write;

use serde::{Deserialize, Serialize};

use crate::diag::{Outcome, Warning};
use crate::error::{Error, Result};
use crate::expression::{Expression, Mode};
use crate::kinematics::{
    trajectory_with, Easing, Pose, DOF_COUNT, TemplateSet, TimedPose, DEFAULT_FRAME_RATE, DEFAULT_TRANSITION_SECONDS,
};
use crate::mkl::VoteResult;
use crate::viseme::{blend_expression, MorphTargetRef, MorphWeights, VISEME_CLASS_COUNT};

/// Consecutive identical winners needed before the head re-targets.
pub const DEFAULT_DEBOUNCE: usize = 3;

/// `(2 votes - P + 1) / (P - 1)`, clamped to `[0, 1]`.
///
/// `(P - 1) / 2` votes map to 0 and a unanimous `P - 1` to 1. More than `P - 1`
/// votes cannot come out of one-vs-one voting and are flagged.
pub fn vote_to_intensity(votes: u32, classes: usize) -> Result<Outcome<f64>> {
    if classes < 2 {
        return Err(Error::InvalidArgument(format!("need at least 2 classes, got {classes}")));
    }
    let p = classes as f64;
    let raw = (2.0 * f64::from(votes) - p + 1.0) / (p - 1.0);
    let mut warnings = Vec::new();
    let maximum = (classes - 1) as u32;
    if votes > maximum {
        warnings.push(Warning::VotesAboveMaximum { votes, maximum });
    }
    Ok(Outcome::with_warnings(raw.clamp(0.0, 1.0), warnings))
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ImitationCommand {
    pub expression: Expression,
    /// Shared by the mechanical DOFs and the mouth expression channel.
    pub intensity: f64,
    pub mode: Mode,
    pub timestamp: f64,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct ImitationConfig {
    pub mode: Mode,
    pub frame_rate: f64,
    /// Time to move from the current pose to the new expression.
    pub transition_seconds: f64,
    /// Time the expression is held (with ear motion where applicable) after arriving.
    pub hold_seconds: f64,
    pub easing: Easing,
}

impl Default for ImitationConfig {
    fn default() -> Self {
        ImitationConfig {
            mode: Mode::default(),
            frame_rate: DEFAULT_FRAME_RATE,
            transition_seconds: DEFAULT_TRANSITION_SECONDS,
            hold_seconds: 1.0,
            easing: Easing::Linear,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Imitation {
    pub command: ImitationCommand,
    /// Static target pose at the command's intensity.
    pub target: Pose,
    /// Approach from the starting pose, then the hold; times relative to the command.
    pub trajectory: Vec<TimedPose>,
    /// One mouth frame per trajectory frame: silence plus the expression channel.
    pub frames: Vec<MorphWeights>,
}

/// The expression named by the vote's winner and its intensity.
/// Neutral winners always get intensity 0.
pub fn vote_outcome(result: &VoteResult, class_names: &[String]) -> Result<Outcome<(Expression, f64)>> {
    let name = class_names
        .get(result.winner)
        .ok_or_else(|| Error::Structure(format!("winner index {} has no class name", result.winner)))?;
    let expression: Expression = name
        .parse()
        .map_err(|_| Error::Structure(format!("class `{name}` is not an expression")))?;
    if expression.is_neutral() {
        return Ok(Outcome::clean((expression, 0.0)));
    }
    let mu = vote_to_intensity(result.votes, class_names.len())?;
    Ok(Outcome::with_warnings((expression, mu.value), mu.warnings))
}

/// Turns a vote into a command and the motion that carries it out.
///
/// `class_names[result.winner]` must name an expression. Neutral winners drive
/// the head to its neutral pose with every mouth expression channel at 0.
pub fn imitate(
    result: &VoteResult,
    class_names: &[String],
    templates: &TemplateSet,
    from: &Pose,
    config: &ImitationConfig,
    timestamp: f64,
) -> Result<Outcome<Imitation>> {
    let outcome = vote_outcome(result, class_names)?;
    let mut warnings = outcome.warnings;
    let (expression, intensity) = outcome.value;
    let command = ImitationCommand {
        expression,
        intensity,
        mode: config.mode,
        timestamp,
    };
    let template = templates.get(expression, config.mode);
    let target = template.pose_for(intensity).value;

    let arrival = template.pose_at(intensity, 0.0).value;
    let mut trajectory = trajectory_with(from, &arrival, config.transition_seconds, config.frame_rate, config.easing)?;
    let hold_frames = (config.hold_seconds * config.frame_rate + 1e-9).floor() as usize;
    for k in 1..=hold_frames {
        let t = k as f64 / config.frame_rate;
        trajectory.push(TimedPose {
            time: config.transition_seconds + t,
            pose: template.pose_at(intensity, t).value,
        });
    }

    let frames = trajectory
        .iter()
        .map(|tp| {
            let silence = MorphWeights::silence(VISEME_CLASS_COUNT, tp.time);
            if expression.is_neutral() {
                Ok(silence)
            } else {
                Ok(blend_expression(&silence, &MorphTargetRef::expression(expression), intensity)?.value)
            }
        })
        .collect::<Result<Vec<_>>>()?;

    Ok(Outcome::with_warnings(
        Imitation {
            command,
            target,
            trajectory,
            frames,
        },
        warnings,
    ))
}

/// Holds the current winner until a new one repeats `window` times in a row.
#[derive(Debug, Clone)]
pub struct Debouncer {
    window: usize,
    current: Option<usize>,
    candidate: Option<usize>,
    streak: usize,
}

impl Debouncer {
    pub fn new(window: usize) -> Self {
        Debouncer {
            window: window.max(1),
            current: None,
            candidate: None,
            streak: 0,
        }
    }

    pub fn current(&self) -> Option<usize> {
        self.current
    }

    /// Feeds one per-frame winner; returns it when the head should re-target.
    pub fn push(&mut self, winner: usize) -> Option<usize> {
        if self.candidate == Some(winner) {
            self.streak += 1;
        } else {
            self.candidate = Some(winner);
            self.streak = 1;
        }
        if self.streak >= self.window && self.current != Some(winner) {
            self.current = Some(winner);
            return Some(winner);
        }
        None
    }
}

impl Default for Debouncer {
    fn default() -> Self {
        Debouncer::new(DEFAULT_DEBOUNCE)
    }
}

/// One line of the imitation log.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct LogRecord {
    pub timestamp: f64,
    /// This frame's classifier winner and its vote count.
    pub winner: Expression,
    pub votes: u32,
    /// Intensity implied by `votes`.
    pub intensity: f64,
    /// Expression the head is currently imitating, once the debouncer has settled.
    pub target: Option<Expression>,
    /// Pose commanded at `timestamp`.
    pub pose: [f64; DOF_COUNT],
}

/// Appends `record` as one JSON line.
pub fn write_log_record<W: Write>(out: &mut W, record: &LogRecord) -> std::io::Result<()> {
    serde_json::to_writer(&mut *out, record)?;
    out.write_all(b"\n")
}
