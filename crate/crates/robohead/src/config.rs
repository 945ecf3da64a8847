//! Run configuration: one versioned TOML file covering every stage.

use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};

use robohead_core::features::FeatureConfig;
use robohead_core::imitation::{ImitationConfig, DEFAULT_DEBOUNCE};
use robohead_core::kinematics::{Easing, ServoCalibration, TemplateSet, DEFAULT_FRAME_RATE, DEFAULT_TRANSITION_SECONDS};
use robohead_core::mkl::{CvScheme, TrainOptions};
use robohead_core::viseme::{RenderParams, VisemeTable, DEFAULT_BANDWIDTH_SCALE, DEFAULT_CLOSURE_FRACTION};
use robohead_core::Mode;

use crate::error::{require, CliError, CliResult};

pub const CONFIG_VERSION: u32 = 1;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct RunConfig {
    pub version: u32,
    /// Drives every random choice (fold assignment, synthetic data).
    pub seed: u64,
    pub output_dir: PathBuf,
    pub features: FeatureConfig,
    pub train: TrainOptions,
    /// Repeat each kernel without explicit columns once per descriptor block.
    pub kernel_per_block: bool,
    pub cv: CvConfig,
    pub animation: AnimationConfig,
    pub robot: RobotConfig,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct CvConfig {
    pub scheme: CvScheme,
    pub folds: usize,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct AnimationConfig {
    pub frame_rate: f64,
    pub bandwidth_scale: f64,
    pub closure_fraction: f64,
    /// Phoneme-to-viseme table; the built-in one when absent.
    pub viseme_table: Option<PathBuf>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct RobotConfig {
    pub mode: Mode,
    /// Expression templates; the built-in ones when absent.
    pub templates: Option<PathBuf>,
    /// Servo channel map; channels 0..=9 with 1000-2000 us pulses when absent.
    pub calibration: Option<PathBuf>,
    pub transition_seconds: f64,
    pub hold_seconds: f64,
    pub easing: Easing,
    /// Identical winners in a row before imitation switches expression.
    pub debounce: usize,
}

impl Default for RunConfig {
    fn default() -> Self {
        RunConfig {
            version: CONFIG_VERSION,
            seed: 0,
            output_dir: PathBuf::from("out"),
            features: FeatureConfig::default(),
            train: TrainOptions::default(),
            kernel_per_block: true,
            cv: CvConfig::default(),
            animation: AnimationConfig::default(),
            robot: RobotConfig::default(),
        }
    }
}

impl Default for CvConfig {
    fn default() -> Self {
        CvConfig { scheme: CvScheme::Random, folds: 10 }
    }
}

impl Default for AnimationConfig {
    fn default() -> Self {
        AnimationConfig {
            frame_rate: DEFAULT_FRAME_RATE,
            bandwidth_scale: DEFAULT_BANDWIDTH_SCALE,
            closure_fraction: DEFAULT_CLOSURE_FRACTION,
            viseme_table: None,
        }
    }
}

impl Default for RobotConfig {
    fn default() -> Self {
        RobotConfig {
            mode: Mode::default(),
            templates: None,
            calibration: None,
            transition_seconds: DEFAULT_TRANSITION_SECONDS,
            hold_seconds: 1.0,
            easing: Easing::Linear,
            debounce: DEFAULT_DEBOUNCE,
        }
    }
}

impl RunConfig {
    pub fn from_toml_str(text: &str) -> CliResult<Self> {
        let config: RunConfig = toml::from_str(text).map_err(|e| CliError::Config(e.to_string()))?;
        config.validate()?;
        Ok(config)
    }

    /// Reads `path`, resolving relative resource paths against its directory.
    pub fn load(path: &Path) -> CliResult<Self> {
        require("config", path)?;
        let text = std::fs::read_to_string(path).map_err(|e| CliError::io(path, e))?;
        let mut config =
            RunConfig::from_toml_str(&text).map_err(|e| CliError::Config(format!("{}: {e}", path.display())))?;
        let base = path.parent().unwrap_or(Path::new(""));
        for p in [
            &mut config.animation.viseme_table,
            &mut config.robot.templates,
            &mut config.robot.calibration,
        ]
        .into_iter()
        .flatten()
        {
            if p.is_relative() {
                *p = base.join(&*p);
            }
        }
        Ok(config)
    }

    pub fn validate(&self) -> CliResult<()> {
        if self.version != CONFIG_VERSION {
            return Err(CliError::Config(format!(
                "unsupported config version {} (expected {CONFIG_VERSION})",
                self.version
            )));
        }
        self.features.validate()?;
        if self.cv.folds < 2 {
            return Err(CliError::Config(format!("cv.folds must be at least 2, got {}", self.cv.folds)));
        }
        if self.train.kernels.is_empty() {
            return Err(CliError::Config("train.kernels must list at least one kernel".into()));
        }
        if !(self.train.mkl.c > 0.0) {
            return Err(CliError::Config(format!("train.mkl.c must be > 0, got {}", self.train.mkl.c)));
        }
        let a = &self.animation;
        for (name, v) in [("frame_rate", a.frame_rate), ("bandwidth_scale", a.bandwidth_scale)] {
            if !(v > 0.0 && v.is_finite()) {
                return Err(CliError::Config(format!("animation.{name} must be > 0, got {v}")));
            }
        }
        if !(a.closure_fraction >= 0.0) {
            return Err(CliError::Config(format!("animation.closure_fraction must be >= 0, got {}", a.closure_fraction)));
        }
        let r = &self.robot;
        if !(r.transition_seconds >= 0.0 && r.hold_seconds >= 0.0) {
            return Err(CliError::Config("robot.transition_seconds and robot.hold_seconds must be >= 0".into()));
        }
        if r.debounce == 0 {
            return Err(CliError::Config("robot.debounce must be at least 1".into()));
        }
        Ok(())
    }

    pub fn to_toml(&self) -> String {
        toml::to_string(self).expect("config serializes")
    }

    pub fn render_params(&self) -> RenderParams {
        RenderParams {
            frame_rate: self.animation.frame_rate,
            bandwidth_scale: self.animation.bandwidth_scale,
            closure_fraction: self.animation.closure_fraction,
        }
    }

    pub fn imitation(&self) -> ImitationConfig {
        ImitationConfig {
            mode: self.robot.mode,
            frame_rate: self.animation.frame_rate,
            transition_seconds: self.robot.transition_seconds,
            hold_seconds: self.robot.hold_seconds,
            easing: self.robot.easing,
        }
    }

    pub fn viseme_table(&self) -> CliResult<VisemeTable> {
        match &self.animation.viseme_table {
            Some(p) => {
                require("viseme table", p)?;
                Ok(VisemeTable::load(p)?)
            }
            None => Ok(VisemeTable::default()),
        }
    }

    pub fn templates(&self) -> CliResult<TemplateSet> {
        match &self.robot.templates {
            Some(p) => {
                require("expression templates", p)?;
                Ok(TemplateSet::load(p)?)
            }
            None => Ok(TemplateSet::default()),
        }
    }

    pub fn calibration(&self) -> CliResult<ServoCalibration> {
        match &self.robot.calibration {
            Some(p) => {
                require("servo calibration", p)?;
                Ok(ServoCalibration::load(p)?)
            }
            None => Ok(ServoCalibration::default()),
        }
    }
}
