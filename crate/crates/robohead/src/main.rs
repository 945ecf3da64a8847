use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand};

use robohead::commands::{self, ExpressionTrack};
use robohead::synth::{self, SynthOptions};
use robohead::{CliError, CliResult, RunConfig};
use robohead_core::mkl::CvScheme;
use robohead_core::{Expression, Mode};

/// Expression recognition, synthesis, and imitation for a 10-DOF robot head.
#[derive(Debug, Parser)]
#[command(name = "robohead", version)]
struct Cli {
    /// Run configuration (TOML). Built-in defaults when omitted.
    #[arg(long, global = true)]
    config: Option<PathBuf>,
    /// Output directory; overrides `output_dir` from the config.
    #[arg(long, global = true)]
    out: Option<PathBuf>,
    /// Overrides `seed` from the config.
    #[arg(long, global = true)]
    seed: Option<u64>,
    /// Expression mode: au or au-animal.
    #[arg(long, global = true)]
    mode: Option<Mode>,
    /// Cross-validation scheme: random or person-independent.
    #[arg(long, global = true)]
    scheme: Option<CvScheme>,
    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Generate a synthetic face dataset with a manifest.
    Synth {
        #[arg(long, default_value_t = 6)]
        subjects: usize,
        /// Frames per sequence, neutral first and peak last.
        #[arg(long, default_value_t = 6)]
        frames: u32,
        /// Image side in pixels.
        #[arg(long, default_value_t = 160)]
        size: usize,
    },
    /// Register, describe, and reduce the sampled frames of a dataset.
    Extract {
        /// CSV with columns image,landmarks,label,subject,sequence,frame.
        #[arg(long)]
        manifest: PathBuf,
    },
    /// Train the multiclass MKL model on extracted features.
    Train,
    /// Cross-validate on extracted features and write the confusion report.
    Eval,
    /// Classify one face.
    Classify {
        /// Defaults to model.json in the output directory.
        #[arg(long)]
        model: Option<PathBuf>,
        /// Grayscale PGM.
        #[arg(long)]
        image: PathBuf,
        /// 68 lines of `x y`.
        #[arg(long)]
        landmarks: PathBuf,
    },
    /// Render a phoneme transcript into mouth morph frames.
    Animate {
        /// Lines of `start end phoneme`, times in seconds.
        #[arg(long)]
        transcript: PathBuf,
        /// Expression held for the whole utterance.
        #[arg(long, conflicts_with = "track")]
        expression: Option<Expression>,
        /// Intensity of `--expression`.
        #[arg(long, default_value_t = 1.0)]
        lambda: f64,
        /// JSON list of {time, expression, lambda} keys.
        #[arg(long)]
        track: Option<PathBuf>,
        /// Also write one bar-chart PGM per frame.
        #[arg(long)]
        previews: bool,
    },
    /// Replay saved frames through the classifier and drive the head.
    Imitate {
        /// Defaults to model.json in the output directory.
        #[arg(long)]
        model: Option<PathBuf>,
        /// CSV with columns time,image,landmarks.
        #[arg(long)]
        frames: PathBuf,
    },
    /// Write the servo byte stream for one expression.
    ExportServo {
        #[arg(long)]
        expression: Expression,
        /// Intensity in [0, 1].
        #[arg(long, default_value_t = 1.0)]
        intensity: f64,
    },
}

fn resolve_config(cli: &Cli) -> CliResult<RunConfig> {
    let mut config = match &cli.config {
        Some(path) => RunConfig::load(path)?,
        None => RunConfig::default(),
    };
    if let Some(out) = &cli.out {
        config.output_dir = out.clone();
    }
    if let Some(seed) = cli.seed {
        config.seed = seed;
    }
    if let Some(mode) = cli.mode {
        config.robot.mode = mode;
    }
    if let Some(scheme) = cli.scheme {
        config.cv.scheme = scheme;
    }
    config.validate()?;
    Ok(config)
}

fn summary<T: serde::Serialize>(value: T) -> serde_json::Value {
    serde_json::to_value(value).expect("summary serializes")
}

fn run(cli: Cli) -> CliResult<serde_json::Value> {
    let config = resolve_config(&cli)?;
    let out = config.output_dir.clone();
    let model = |m: &Option<PathBuf>| m.clone().unwrap_or_else(|| commands::model_path(&out));
    let value = match &cli.command {
        Command::Synth { subjects, frames, size } => {
            let options = SynthOptions { subjects: *subjects, frames: *frames, size: *size, seed: config.seed };
            let manifest = synth::generate(&out, &options)?;
            serde_json::json!({ "manifest": out.join("manifest.csv"), "entries": manifest.entries.len() })
        }
        Command::Extract { manifest } => summary(commands::cmd_extract(&config, manifest, &out)?),
        Command::Train => {
            let report = commands::cmd_train(&config, &out)?;
            serde_json::json!({ "model": commands::model_path(&out), "pairs": report.pairs.len(), "warnings": report.warnings })
        }
        Command::Eval => {
            let report = commands::cmd_eval(&config, &out)?;
            serde_json::json!({ "report": out.join("report.json"), "overall_rate": report.overall_rate })
        }
        Command::Classify { model: m, image, landmarks } => {
            summary(commands::cmd_classify(&model(m), image, landmarks)?)
        }
        Command::Animate { transcript, expression, lambda, track, previews } => {
            let track = match (expression, track) {
                (Some(e), _) => ExpressionTrack::Constant { expression: *e, lambda: *lambda },
                (None, Some(path)) => ExpressionTrack::File(path.clone()),
                (None, None) => ExpressionTrack::None,
            };
            summary(commands::cmd_animate(&config, transcript, &track, &out, *previews)?)
        }
        Command::Imitate { model: m, frames } => summary(commands::cmd_imitate(&config, &model(m), frames, &out)?),
        Command::ExportServo { expression, intensity } => {
            summary(commands::cmd_export_servo(&config, *expression, *intensity, &out)?)
        }
    };
    Ok(value)
}

fn main() -> ExitCode {
    env_logger::Builder::from_env(env_logger::Env::new().filter_or("ROBOHEAD_LOG", "warn")).init();
    let cli = Cli::parse();
    match run(cli) {
        Ok(value) => {
            let _ = commands::print_json(std::io::stdout().lock(), &value);
            ExitCode::SUCCESS
        }
        Err(e) => {
            let _ = commands::print_json(std::io::stderr().lock(), &e.record());
            ExitCode::from(match e {
                CliError::Missing { .. } => 3,
                _ => 1,
            })
        }
    }
}
