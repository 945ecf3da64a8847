use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

pub const DOF_COUNT: usize = 10;

/// One servo-driven axis of the mechanical face, numbered 1..=10.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(try_from = "u8", into = "u8")]
pub struct DofId(u8);

impl DofId {
    pub const LEFT_BROW_ROLL: DofId = DofId(1);
    pub const RIGHT_BROW_ROLL: DofId = DofId(2);
    pub const FOREHEAD_TILT: DofId = DofId(3);
    pub const EYEBALL_YAW: DofId = DofId(4);
    pub const LEFT_EYELID_PITCH: DofId = DofId(5);
    pub const RIGHT_EYELID_PITCH: DofId = DofId(6);
    pub const LEFT_EAR_PITCH: DofId = DofId(7);
    pub const RIGHT_EAR_PITCH: DofId = DofId(8);
    pub const NECK_PITCH: DofId = DofId(9);
    pub const NECK_YAW: DofId = DofId(10);

    pub const ALL: [DofId; DOF_COUNT] = [
        DofId(1),
        DofId(2),
        DofId(3),
        DofId(4),
        DofId(5),
        DofId(6),
        DofId(7),
        DofId(8),
        DofId(9),
        DofId(10),
    ];

    pub fn new(index: u8) -> Result<Self> {
        if (1..=DOF_COUNT as u8).contains(&index) {
            Ok(DofId(index))
        } else {
            Err(Error::InvalidArgument(format!(
                "DOF index {index} outside 1..={DOF_COUNT}"
            )))
        }
    }

    /// 1-based index as printed on the face diagram.
    pub fn index(self) -> u8 {
        self.0
    }

    /// 0-based slot for array storage.
    pub fn slot(self) -> usize {
        self.0 as usize - 1
    }

    pub fn label(self) -> &'static str {
        match self.0 {
            1 => "left brow roll",
            2 => "right brow roll",
            3 => "forehead tilt",
            4 => "eyeball yaw",
            5 => "left eyelid pitch",
            6 => "right eyelid pitch",
            7 => "left ear pitch",
            8 => "right ear pitch",
            9 => "neck pitch",
            _ => "neck yaw",
        }
    }
}

impl TryFrom<u8> for DofId {
    type Error = Error;

    fn try_from(value: u8) -> Result<Self> {
        DofId::new(value)
    }
}

impl From<DofId> for u8 {
    fn from(d: DofId) -> u8 {
        d.0
    }
}

impl fmt::Display for DofId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "f{}", self.0)
    }
}

impl FromStr for DofId {
    type Err = Error;

    /// Accepts `f7` or `7`.
    fn from_str(s: &str) -> Result<Self> {
        let digits = s.trim().trim_start_matches(['f', 'F']);
        let index: u8 = digits
            .parse()
            .map_err(|_| Error::InvalidArgument(format!("bad DOF name `{s}`")))?;
        DofId::new(index)
    }
}

/// A set of DOFs stored as a bitmask.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Hash)]
pub struct DofSet(u16);

impl DofSet {
    pub const EMPTY: DofSet = DofSet(0);

    pub fn of(dofs: &[u8]) -> DofSet {
        let mut set = DofSet::EMPTY;
        for &d in dofs {
            set.insert(DofId::new(d).expect("static DOF index"));
        }
        set
    }

    pub fn insert(&mut self, dof: DofId) {
        self.0 |= 1 << dof.slot();
    }

    pub fn contains(self, dof: DofId) -> bool {
        self.0 & (1 << dof.slot()) != 0
    }

    pub fn is_subset(self, other: DofSet) -> bool {
        self.0 & !other.0 == 0
    }

    pub fn len(self) -> usize {
        self.0.count_ones() as usize
    }

    pub fn is_empty(self) -> bool {
        self.0 == 0
    }

    pub fn iter(self) -> impl Iterator<Item = DofId> {
        DofId::ALL.into_iter().filter(move |d| self.contains(*d))
    }
}

impl fmt::Display for DofSet {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let names: Vec<String> = self.iter().map(|d| d.to_string()).collect();
        write!(f, "{{{}}}", names.join(", "))
    }
}

/// Normalized positions of all ten DOFs at one instant. Every value lies in `[0, 1]`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "[f64; DOF_COUNT]", into = "[f64; DOF_COUNT]")]
pub struct Pose {
    values: [f64; DOF_COUNT],
}

impl Pose {
    pub fn new(values: [f64; DOF_COUNT]) -> Result<Self> {
        for (slot, v) in values.iter().enumerate() {
            if !(0.0..=1.0).contains(v) {
                return Err(Error::InvalidPose(format!(
                    "f{} = {v} is outside [0, 1]",
                    slot + 1
                )));
            }
        }
        Ok(Pose { values })
    }

    /// Builds a pose from a slice, rejecting anything that is not exactly ten values.
    pub fn from_slice(values: &[f64]) -> Result<Self> {
        let arr: [f64; DOF_COUNT] = values.try_into().map_err(|_| {
            Error::InvalidPose(format!(
                "expected {DOF_COUNT} DOF values, got {}",
                values.len()
            ))
        })?;
        Pose::new(arr)
    }

    pub fn uniform(value: f64) -> Result<Self> {
        Pose::new([value; DOF_COUNT])
    }

    pub fn get(&self, dof: DofId) -> f64 {
        self.values[dof.slot()]
    }

    pub fn set(&mut self, dof: DofId, value: f64) -> Result<()> {
        if !(0.0..=1.0).contains(&value) {
            return Err(Error::InvalidPose(format!("{dof} = {value} is outside [0, 1]")));
        }
        self.values[dof.slot()] = value;
        Ok(())
    }

    pub fn values(&self) -> &[f64; DOF_COUNT] {
        &self.values
    }

    /// Internal constructor for values already known to be in range.
    pub(crate) fn from_trusted(values: [f64; DOF_COUNT]) -> Self {
        debug_assert!(values.iter().all(|v| (0.0..=1.0).contains(v)));
        Pose { values }
    }
}

impl TryFrom<[f64; DOF_COUNT]> for Pose {
    type Error = Error;

    fn try_from(values: [f64; DOF_COUNT]) -> Result<Self> {
        Pose::new(values)
    }
}

impl From<Pose> for [f64; DOF_COUNT] {
    fn from(p: Pose) -> Self {
        p.values
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn ten_distinct_dofs() {
        let mut seen = std::collections::HashSet::new();
        for (slot, d) in DofId::ALL.iter().enumerate() {
            assert_eq!(d.slot(), slot);
            assert!(seen.insert(*d));
        }
        assert_eq!(seen.len(), 10);
        assert!(DofId::new(0).is_err());
        assert!(DofId::new(11).is_err());
    }

    #[test]
    fn dof_names_parse() {
        assert_eq!("f7".parse::<DofId>().unwrap(), DofId::LEFT_EAR_PITCH);
        assert_eq!("10".parse::<DofId>().unwrap(), DofId::NECK_YAW);
        assert!("f0".parse::<DofId>().is_err());
    }

    #[test]
    fn pose_rejects_out_of_range() {
        let mut v = [0.5; DOF_COUNT];
        v[3] = 1.2;
        assert!(Pose::new(v).is_err());
        assert!(Pose::from_slice(&[0.5; 9]).is_err());
        let mut p = Pose::uniform(0.5).unwrap();
        assert!(p.set(DofId::NECK_PITCH, -0.1).is_err());
        p.set(DofId::NECK_PITCH, 0.9).unwrap();
        assert_eq!(p.get(DofId::NECK_PITCH), 0.9);
    }

    #[test]
    fn dofset_ops() {
        let a = DofSet::of(&[7, 8]);
        let b = DofSet::of(&[3, 7, 8]);
        assert!(a.is_subset(b));
        assert!(!b.is_subset(a));
        assert_eq!(b.len(), 3);
        assert_eq!(b.to_string(), "{f3, f7, f8}");
    }
}
