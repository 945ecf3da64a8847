//! The 10-DOF mechanical face: poses, expression templates, motion, and servo output.

mod motion;
mod pose;
mod servo;
mod template;

pub use motion::{
    frame_count, trajectory, trajectory_from_values, trajectory_with, Easing, TimedPose,
    DEFAULT_FRAME_RATE, DEFAULT_TRANSITION_SECONDS,
};
pub use pose::{DofId, DofSet, Pose, DOF_COUNT};
pub use servo::{
    decode_set_target, decode_stream, encode_set_target, to_servo_commands, ServoCalibration,
    ServoChannel, MAX_TARGET,
};
pub use template::{active_dofs, ear_period, ExpressionTemplate, TemplateSet};
