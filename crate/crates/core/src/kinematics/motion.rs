use serde::{Deserialize, Serialize};

use super::pose::{Pose, DOF_COUNT};
use crate::error::{Error, Result};

/// Time a full expression change takes on the physical head.
pub const DEFAULT_TRANSITION_SECONDS: f64 = 1.5;

/// Mouth display refresh rate, also used for servo trajectories.
pub const DEFAULT_FRAME_RATE: f64 = 85.0;

/// Time-warping applied to the interpolation parameter.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Easing {
    #[default]
    Linear,
    /// `3s^2 - 2s^3`: zero velocity at both ends.
    Smoothstep,
}

impl Easing {
    pub fn apply(self, s: f64) -> f64 {
        match self {
            Easing::Linear => s,
            Easing::Smoothstep => s * s * (3.0 - 2.0 * s),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct TimedPose {
    pub time: f64,
    pub pose: Pose,
}

/// Number of uniformly spaced frames covering `[0, duration]`, counting both ends.
pub fn frame_count(duration: f64, frame_rate: f64) -> usize {
    // The epsilon keeps exact products such as 1 s * 85 Hz from flooring to 84.
    (duration * frame_rate + 1e-9).floor() as usize + 1
}

/// Linear trajectory from `start` to `end`, one frame every `1 / frame_rate` seconds.
///
/// The first frame is `start` and the last frame is `end`, both bit-exact.
pub fn trajectory(start: &Pose, end: &Pose, duration: f64, frame_rate: f64) -> Result<Vec<TimedPose>> {
    trajectory_with(start, end, duration, frame_rate, Easing::Linear)
}

pub fn trajectory_with(
    start: &Pose,
    end: &Pose,
    duration: f64,
    frame_rate: f64,
    easing: Easing,
) -> Result<Vec<TimedPose>> {
    if !(duration > 0.0 && duration.is_finite()) {
        return Err(Error::InvalidArgument(format!("duration must be > 0, got {duration}")));
    }
    if !(frame_rate > 0.0 && frame_rate.is_finite()) {
        return Err(Error::InvalidArgument(format!(
            "frame rate must be > 0, got {frame_rate}"
        )));
    }
    let n = frame_count(duration, frame_rate);
    let a = start.values();
    let b = end.values();
    let frames = (0..n)
        .map(|i| {
            let time = i as f64 / frame_rate;
            let pose = if i == 0 {
                *start
            } else if i + 1 == n {
                *end
            } else {
                let s = easing.apply((time / duration).min(1.0));
                let mut v = [0.0; DOF_COUNT];
                for k in 0..DOF_COUNT {
                    v[k] = ((1.0 - s) * a[k] + s * b[k]).clamp(0.0, 1.0);
                }
                Pose::from_trusted(v)
            };
            TimedPose { time, pose }
        })
        .collect();
    Ok(frames)
}

/// Trajectory from raw value slices, rejecting anything that is not a full pose.
pub fn trajectory_from_values(
    start: &[f64],
    end: &[f64],
    duration: f64,
    frame_rate: f64,
) -> Result<Vec<TimedPose>> {
    let start = Pose::from_slice(start).map_err(|e| Error::Structure(format!("start pose: {e}")))?;
    let end = Pose::from_slice(end).map_err(|e| Error::Structure(format!("end pose: {e}")))?;
    trajectory(&start, &end, duration, frame_rate)
}
