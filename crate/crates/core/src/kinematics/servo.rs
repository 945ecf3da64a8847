//! Compact-protocol "set target" commands for a USB servo controller.
//!
//! Each command is four bytes: `0x84, channel, target & 0x7F, (target >> 7) & 0x7F`,
//! with the target pulse width in quarter-microseconds.

use std::path::Path;

use serde::{Deserialize, Serialize};

use super::pose::{DofId, Pose, DOF_COUNT};
use crate::error::{Error, Result};

pub const SET_TARGET: u8 = 0x84;
pub const MAX_CHANNEL: u8 = 11;
/// Largest target representable in two 7-bit data bytes.
pub const MAX_TARGET: u16 = 0x3FFF;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct ServoChannel {
    pub channel: u8,
    /// Pulse width limits and rest position, in quarter-microseconds.
    pub min: u16,
    pub neutral: u16,
    pub max: u16,
}

/// Maps each DOF onto a controller channel and pulse range.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "CalibrationFile", into = "CalibrationFile")]
pub struct ServoCalibration {
    channels: [ServoChannel; DOF_COUNT],
}

#[derive(Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct CalibrationFile {
    dof: Vec<ServoChannel>,
}

impl TryFrom<CalibrationFile> for ServoCalibration {
    type Error = Error;

    fn try_from(file: CalibrationFile) -> Result<Self> {
        let channels: [ServoChannel; DOF_COUNT] = file.dof.try_into().map_err(|v: Vec<_>| {
            Error::InvalidCalibration(format!(
                "calibration must cover {DOF_COUNT} DOFs, got {}",
                v.len()
            ))
        })?;
        ServoCalibration::new(channels)
    }
}

impl From<ServoCalibration> for CalibrationFile {
    fn from(c: ServoCalibration) -> Self {
        CalibrationFile {
            dof: c.channels.to_vec(),
        }
    }
}

impl ServoCalibration {
    /// `channels[k]` belongs to DOF `f{k+1}`.
    pub fn new(channels: [ServoChannel; DOF_COUNT]) -> Result<Self> {
        let mut used = [false; MAX_CHANNEL as usize + 1];
        for (slot, c) in channels.iter().enumerate() {
            let dof = slot + 1;
            if c.channel > MAX_CHANNEL {
                return Err(Error::InvalidCalibration(format!(
                    "f{dof}: channel {} outside 0..={MAX_CHANNEL}",
                    c.channel
                )));
            }
            if std::mem::replace(&mut used[c.channel as usize], true) {
                return Err(Error::InvalidCalibration(format!(
                    "f{dof}: channel {} assigned twice",
                    c.channel
                )));
            }
            if !(c.min < c.neutral && c.neutral < c.max) {
                return Err(Error::InvalidCalibration(format!(
                    "f{dof}: need min < neutral < max, got {} / {} / {}",
                    c.min, c.neutral, c.max
                )));
            }
            if c.max > MAX_TARGET {
                return Err(Error::InvalidCalibration(format!(
                    "f{dof}: max {} exceeds {MAX_TARGET}",
                    c.max
                )));
            }
        }
        Ok(ServoCalibration { channels })
    }

    pub fn from_toml_str(text: &str) -> Result<Self> {
        toml::from_str(text).map_err(|e| Error::InvalidCalibration(e.to_string()))
    }

    pub fn load(path: impl AsRef<Path>) -> Result<Self> {
        let path = path.as_ref();
        let text = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
        ServoCalibration::from_toml_str(&text)
    }

    pub fn channel(&self, dof: DofId) -> &ServoChannel {
        &self.channels[dof.slot()]
    }

    /// Pulse target for a normalized position, rounded to the nearest quarter-microsecond.
    pub fn target(&self, dof: DofId, value: f64) -> u16 {
        let c = self.channel(dof);
        let span = (c.max - c.min) as f64;
        let t = (c.min as f64 + value.clamp(0.0, 1.0) * span).round();
        t.clamp(c.min as f64, c.max as f64) as u16
    }
}

impl Default for ServoCalibration {
    /// Channels 0..=9 in DOF order, 1000-2000 us pulses centred on 1500 us.
    fn default() -> Self {
        let channels = std::array::from_fn(|slot| ServoChannel {
            channel: slot as u8,
            min: 4000,
            neutral: 6000,
            max: 8000,
        });
        ServoCalibration::new(channels).expect("default calibration is valid")
    }
}

pub fn encode_set_target(channel: u8, target: u16) -> Result<[u8; 4]> {
    if channel > 0x7F {
        return Err(Error::InvalidArgument(format!("channel {channel} does not fit 7 bits")));
    }
    if target > MAX_TARGET {
        return Err(Error::InvalidArgument(format!("target {target} exceeds {MAX_TARGET}")));
    }
    Ok([
        SET_TARGET,
        channel,
        (target & 0x7F) as u8,
        ((target >> 7) & 0x7F) as u8,
    ])
}

/// Inverse of [`encode_set_target`]: `(channel, target)`.
pub fn decode_set_target(bytes: &[u8]) -> Result<(u8, u16)> {
    match bytes {
        [SET_TARGET, channel, lo, hi] if *channel <= 0x7F && *lo <= 0x7F && *hi <= 0x7F => {
            Ok((*channel, (*lo as u16) | ((*hi as u16) << 7)))
        }
        _ => Err(Error::Format(format!("not a set-target command: {bytes:02X?}"))),
    }
}

/// One 4-byte set-target command per DOF, in DOF order.
pub fn to_servo_commands(pose: &Pose, cal: &ServoCalibration) -> Vec<u8> {
    let mut out = Vec::with_capacity(4 * DOF_COUNT);
    for dof in DofId::ALL {
        let c = cal.channel(dof);
        let target = cal.target(dof, pose.get(dof));
        out.extend_from_slice(&encode_set_target(c.channel, target).expect("validated calibration"));
    }
    out
}

/// Splits a command stream back into `(channel, target)` pairs.
pub fn decode_stream(bytes: &[u8]) -> Result<Vec<(u8, u16)>> {
    if !bytes.len().is_multiple_of(4) {
        return Err(Error::Format(format!(
            "stream length {} is not a multiple of 4",
            bytes.len()
        )));
    }
    bytes.chunks_exact(4).map(decode_set_target).collect()
}
