use std::collections::BTreeMap;
use std::f64::consts::PI;
use std::path::Path;

use serde::Deserialize;

use super::pose::{DofId, DofSet, Pose, DOF_COUNT};
use crate::diag::{clamp_unit, Outcome};
use crate::error::{Error, Result};
use crate::expression::{Expression, Mode};
use crate::viseme::MorphTargetRef;

const DEFAULT_TEMPLATES: &str = include_str!("../../data/expressions.toml");

/// Which DOFs an expression drives in a given mode, and whether the mouth display
/// participates.
///
/// This is the action-unit-to-DOF table; it is fixed, only the numeric targets are
/// configurable.
pub fn active_dofs(expression: Expression, mode: Mode) -> (bool, DofSet) {
    use Expression::*;
    use Mode::*;
    match (expression, mode) {
        (Joy, AuBased) => (true, DofSet::EMPTY),
        (Joy, AuAnimalBased) => (true, DofSet::of(&[7, 8])),
        (Sadness, AuBased) | (Fear, AuBased) => (true, DofSet::of(&[1, 2, 5, 6])),
        (Sadness, AuAnimalBased) | (Fear, AuAnimalBased) => {
            (true, DofSet::of(&[1, 2, 3, 5, 6, 7, 8]))
        }
        (Disgust, AuBased) => (true, DofSet::of(&[3])),
        (Disgust, AuAnimalBased) => (true, DofSet::of(&[3, 7, 8])),
        (Anger, AuBased) => (true, DofSet::of(&[1, 2, 5, 6])),
        (Anger, AuAnimalBased) => (true, DofSet::of(&[1, 2, 5, 6, 7, 8])),
        (Surprise, AuBased) => (true, DofSet::of(&[1, 2, 5, 6])),
        (Surprise, AuAnimalBased) => (true, DofSet::of(&[1, 2, 3, 5, 6, 7, 8, 9])),
        (Neutral, _) => (false, DofSet::EMPTY),
    }
}

/// Oscillation period of the ears, in seconds. Shrinks linearly from 1.5 s toward
/// 0.5 s as intensity goes from 0 to 1.
pub fn ear_period(intensity: f64) -> f64 {
    1.5 - intensity.clamp(0.0, 1.0)
}

/// Maximal targets of one expression in one mode.
#[derive(Debug, Clone, PartialEq)]
pub struct ExpressionTemplate {
    pub expression: Expression,
    pub mode: Mode,
    pub neutral_pose: Pose,
    pub max_pose: Pose,
    pub active_dofs: DofSet,
    /// Whether the mouth display shows this expression.
    pub uses_lcd: bool,
    pub lcd_morph_max: MorphTargetRef,
    pub uses_ear_oscillation: bool,
}

impl ExpressionTemplate {
    /// Builds a template, enforcing that inactive DOFs sit at neutral in `max_pose`.
    pub fn new(
        expression: Expression,
        mode: Mode,
        neutral_pose: Pose,
        max_pose: Pose,
        active_dofs: DofSet,
        uses_ear_oscillation: bool,
    ) -> Result<Self> {
        for dof in DofId::ALL {
            if !active_dofs.contains(dof) && max_pose.get(dof) != neutral_pose.get(dof) {
                return Err(Error::InvalidTemplate(format!(
                    "{expression}/{mode}: inactive {dof} must stay at neutral {} (got {})",
                    neutral_pose.get(dof),
                    max_pose.get(dof)
                )));
            }
        }
        if uses_ear_oscillation
            && !(active_dofs.contains(DofId::LEFT_EAR_PITCH)
                && active_dofs.contains(DofId::RIGHT_EAR_PITCH))
        {
            return Err(Error::InvalidTemplate(format!(
                "{expression}/{mode}: ear oscillation needs f7 and f8 active"
            )));
        }
        let lcd_morph_max = if expression.is_neutral() {
            MorphTargetRef::neutral()
        } else {
            MorphTargetRef::expression(expression)
        };
        Ok(ExpressionTemplate {
            expression,
            mode,
            neutral_pose,
            max_pose,
            active_dofs,
            uses_lcd: !expression.is_neutral(),
            lcd_morph_max,
            uses_ear_oscillation,
        })
    }

    pub fn neutral(mode: Mode, neutral_pose: Pose) -> Self {
        ExpressionTemplate::new(
            Expression::Neutral,
            mode,
            neutral_pose,
            neutral_pose,
            DofSet::EMPTY,
            false,
        )
        .expect("neutral template is always valid")
    }

    /// Pose at `intensity`: each active DOF moves linearly from neutral toward its
    /// maximum, every other DOF stays neutral. Out-of-range intensities are clamped
    /// and reported.
    pub fn pose_for(&self, intensity: f64) -> Outcome<Pose> {
        let mut warnings = Vec::new();
        let mu = clamp_unit("intensity", intensity, &mut warnings);
        let mut values = *self.neutral_pose.values();
        for dof in self.active_dofs.iter() {
            let f0 = self.neutral_pose.get(dof);
            let fmax = self.max_pose.get(dof);
            // Written as a lerp so that mu = 0 and mu = 1 reproduce the endpoints exactly.
            values[dof.slot()] = ((1.0 - mu) * f0 + mu * fmax).clamp(0.0, 1.0);
        }
        Outcome::with_warnings(Pose::from_trusted(values), warnings)
    }

    /// Ear positions `(f7, f8)` at time `t` for an oscillating expression.
    ///
    /// Each ear swings sinusoidally between neutral and its intensity-scaled
    /// maximum; the two ears run in antiphase around the shared midline. At `t = 0`
    /// f7 is at neutral and f8 at the far end of its swing.
    pub fn ear_oscillation(&self, intensity: f64, t: f64) -> (f64, f64) {
        let left = DofId::LEFT_EAR_PITCH;
        let right = DofId::RIGHT_EAR_PITCH;
        let mu = intensity.clamp(0.0, 1.0);
        if mu <= 0.0 {
            return (self.neutral_pose.get(left), self.neutral_pose.get(right));
        }
        let phase = (2.0 * PI * t / ear_period(mu)).cos();
        let swing = |dof: DofId, sign: f64| {
            let f0 = self.neutral_pose.get(dof);
            let amplitude = mu * (self.max_pose.get(dof) - f0);
            let midline = f0 + 0.5 * amplitude;
            (midline + sign * 0.5 * amplitude * phase).clamp(0.0, 1.0)
        };
        (swing(left, -1.0), swing(right, 1.0))
    }

    /// Pose at time `t` after the expression was triggered, including ear dynamics.
    pub fn pose_at(&self, intensity: f64, t: f64) -> Outcome<Pose> {
        let mut out = self.pose_for(intensity);
        if self.uses_ear_oscillation {
            let (l, r) = self.ear_oscillation(intensity, t.max(0.0));
            let mut values = *out.value.values();
            values[DofId::LEFT_EAR_PITCH.slot()] = l;
            values[DofId::RIGHT_EAR_PITCH.slot()] = r;
            out.value = Pose::from_trusted(values);
        }
        out
    }
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
struct TemplateFile {
    version: u32,
    neutral: BTreeMap<String, f64>,
    expressions: BTreeMap<String, BTreeMap<String, ModeEntry>>,
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
struct ModeEntry {
    #[serde(default)]
    max: BTreeMap<String, f64>,
    #[serde(default)]
    ear_oscillation: bool,
}

/// Templates for every (expression, mode) pair, Neutral included.
#[derive(Debug, Clone, PartialEq)]
pub struct TemplateSet {
    neutral: Pose,
    templates: BTreeMap<(Expression, Mode), ExpressionTemplate>,
}

impl TemplateSet {
    pub fn from_toml_str(text: &str) -> Result<Self> {
        let file: TemplateFile =
            toml::from_str(text).map_err(|e| Error::InvalidTemplate(e.to_string()))?;
        if file.version != 1 {
            return Err(Error::InvalidTemplate(format!(
                "unsupported template file version {}",
                file.version
            )));
        }

        let neutral = pose_from_map(&file.neutral, None, "neutral")?;
        let mut templates = BTreeMap::new();
        for mode in Mode::ALL {
            templates.insert(
                (Expression::Neutral, mode),
                ExpressionTemplate::neutral(mode, neutral),
            );
        }

        for (name, modes) in &file.expressions {
            let expression: Expression = name
                .parse()
                .map_err(|_| Error::InvalidTemplate(format!("unknown expression `{name}`")))?;
            if expression.is_neutral() {
                return Err(Error::InvalidTemplate(
                    "neutral is defined by the [neutral] table".into(),
                ));
            }
            for (mode_key, entry) in modes {
                let mode: Mode = mode_key
                    .parse()
                    .map_err(|_| Error::InvalidTemplate(format!("unknown mode `{mode_key}`")))?;
                let (_, active) = active_dofs(expression, mode);
                let ctx = format!("{expression}/{mode}");
                for key in entry.max.keys() {
                    let dof: DofId = key
                        .parse()
                        .map_err(|_| Error::InvalidTemplate(format!("{ctx}: bad DOF `{key}`")))?;
                    if !active.contains(dof) {
                        return Err(Error::InvalidTemplate(format!(
                            "{ctx}: {dof} is not driven by this expression (active: {active})"
                        )));
                    }
                }
                for dof in active.iter() {
                    if !entry.max.keys().any(|k| k.parse::<DofId>().ok() == Some(dof)) {
                        return Err(Error::InvalidTemplate(format!(
                            "{ctx}: missing target for active {dof}"
                        )));
                    }
                }
                let max_pose = pose_from_map(&entry.max, Some(&neutral), &ctx)?;
                let template = ExpressionTemplate::new(
                    expression,
                    mode,
                    neutral,
                    max_pose,
                    active,
                    entry.ear_oscillation,
                )?;
                templates.insert((expression, mode), template);
            }
        }

        for expression in Expression::BASIC {
            for mode in Mode::ALL {
                if !templates.contains_key(&(expression, mode)) {
                    return Err(Error::InvalidTemplate(format!(
                        "missing template for {expression}/{mode}"
                    )));
                }
            }
        }
        Ok(TemplateSet { neutral, templates })
    }

    pub fn load(path: impl AsRef<Path>) -> Result<Self> {
        let path = path.as_ref();
        let text = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
        TemplateSet::from_toml_str(&text)
    }

    pub fn neutral_pose(&self) -> Pose {
        self.neutral
    }

    pub fn get(&self, expression: Expression, mode: Mode) -> &ExpressionTemplate {
        // Construction guarantees every pair is present.
        &self.templates[&(expression, mode)]
    }

    pub fn iter(&self) -> impl Iterator<Item = &ExpressionTemplate> {
        self.templates.values()
    }
}

impl Default for TemplateSet {
    fn default() -> Self {
        TemplateSet::from_toml_str(DEFAULT_TEMPLATES).expect("shipped templates are valid")
    }
}

fn pose_from_map(map: &BTreeMap<String, f64>, base: Option<&Pose>, ctx: &str) -> Result<Pose> {
    let mut values = match base {
        Some(p) => *p.values(),
        None => [f64::NAN; DOF_COUNT],
    };
    for (key, &v) in map {
        let dof: DofId = key
            .parse()
            .map_err(|_| Error::InvalidTemplate(format!("{ctx}: bad DOF `{key}`")))?;
        values[dof.slot()] = v;
    }
    if let Some(slot) = values.iter().position(|v| v.is_nan()) {
        return Err(Error::InvalidTemplate(format!(
            "{ctx}: missing value for f{}",
            slot + 1
        )));
    }
    Pose::new(values).map_err(|e| Error::InvalidTemplate(format!("{ctx}: {e}")))
}
