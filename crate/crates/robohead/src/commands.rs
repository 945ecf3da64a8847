//! The subcommands. Each reads its prerequisites from the output directory (or
//! explicit paths) and writes its artifacts back there.

use std::collections::BTreeMap;
use std::io::Write;
use std::path::{Path, PathBuf};

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use robohead_core::codec;
use robohead_core::features::{describe_all, FeaturePipeline, GrayImage, LandmarkSet, CROP_SIZE};
use robohead_core::imitation::{imitate, vote_outcome, write_log_record, Debouncer, Imitation, LogRecord};
use robohead_core::kinematics::{decode_stream, to_servo_commands, trajectory_with, TimedPose};
use robohead_core::mkl::{
    cross_validate, train_multiclass, Columns, CvReport, CvScheme, CvSetup, KernelChoice, MulticlassModel,
    RejectedFold, TrainOptions,
};
use robohead_core::viseme::{render_timeline, write_csv, write_jsonl, write_previews, ExpressionKey, Transcript};
use robohead_core::{Expression, Warning};

use crate::config::RunConfig;
use crate::error::{require, CliError, CliResult};
use crate::manifest::{ingest_sequences, DatasetManifest, Sample, SkippedSequence, REPORT_ORDER};

const FEATURES_FORMAT: &str = "robohead-features";
const CLASSIFIER_FORMAT: &str = "robohead-classifier";
const FORMAT_VERSION: u32 = 1;

pub fn features_path(out: &Path) -> PathBuf {
    out.join("features.json")
}

pub fn model_path(out: &Path) -> PathBuf {
    out.join("model.json")
}

fn create_dir(dir: &Path) -> CliResult<()> {
    std::fs::create_dir_all(dir).map_err(|e| CliError::io(dir, e))
}

fn write_file(path: &Path, bytes: impl AsRef<[u8]>) -> CliResult<()> {
    if let Some(parent) = path.parent() {
        create_dir(parent)?;
    }
    std::fs::write(path, bytes).map_err(|e| CliError::io(path, e))
}

fn write_json<T: Serialize>(path: &Path, value: &T) -> CliResult<()> {
    let mut text = serde_json::to_string_pretty(value).expect("artifact serializes");
    text.push('\n');
    write_file(path, text)
}

fn read_json<T: for<'de> Deserialize<'de>>(artifact: &'static str, path: &Path) -> CliResult<T> {
    require(artifact, path)?;
    let text = std::fs::read_to_string(path).map_err(|e| CliError::io(path, e))?;
    serde_json::from_str(&text)
        .map_err(|e| CliError::Core(robohead_core::Error::Format(format!("{}: {e}", path.display()))))
}

fn warning_strings(warnings: &[Warning]) -> Vec<String> {
    warnings.iter().map(ToString::to_string).collect()
}

/// Reduced features of every ingested sample plus the pipeline that produced them.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FeatureCache {
    pub format: String,
    pub version: u32,
    pub seed: u64,
    pub config: RunConfig,
    pub classes: Vec<String>,
    pub samples: Vec<Sample>,
    pub skipped: Vec<SkippedSequence>,
    pub warnings: Vec<String>,
    pub pipeline: FeaturePipeline,
    /// One base64 row per sample.
    #[serde(with = "rows_codec")]
    pub features: Vec<Vec<f64>>,
}

mod rows_codec {
    use serde::{Deserialize, Deserializer, Serialize, Serializer};

    pub fn serialize<S: Serializer>(rows: &[Vec<f64>], s: S) -> Result<S::Ok, S::Error> {
        rows.iter().map(|r| super::codec::encode_f64s(r)).collect::<Vec<_>>().serialize(s)
    }

    pub fn deserialize<'de, D: Deserializer<'de>>(d: D) -> Result<Vec<Vec<f64>>, D::Error> {
        Vec::<String>::deserialize(d)?
            .iter()
            .map(|t| super::codec::decode_f64s(t).map_err(serde::de::Error::custom))
            .collect()
    }
}

impl FeatureCache {
    pub fn load(path: &Path) -> CliResult<Self> {
        let cache: FeatureCache = read_json("features", path)?;
        if cache.format != FEATURES_FORMAT || cache.version != FORMAT_VERSION {
            return Err(CliError::Input(format!(
                "{}: expected {FEATURES_FORMAT} v{FORMAT_VERSION}, got {} v{}",
                path.display(),
                cache.format,
                cache.version
            )));
        }
        if cache.features.len() != cache.samples.len() {
            return Err(CliError::Input(format!("{}: feature rows do not match samples", path.display())));
        }
        Ok(cache)
    }

    pub fn labels(&self) -> Vec<usize> {
        self.samples.iter().map(|s| s.label).collect()
    }
}

fn load_face(image: &Path, landmarks: &Path) -> CliResult<(GrayImage, LandmarkSet)> {
    require("image", image)?;
    require("landmarks", landmarks)?;
    Ok((GrayImage::load(image)?, LandmarkSet::load(landmarks)?))
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ExtractSummary {
    pub samples: usize,
    pub skipped: usize,
    pub dimension: usize,
    pub path: PathBuf,
}

/// Ingests the manifest, registers and describes every sampled frame, fits the
/// per-descriptor PCA, and writes `features.json`.
pub fn cmd_extract(config: &RunConfig, manifest: &Path, out: &Path) -> CliResult<ExtractSummary> {
    let manifest = DatasetManifest::load(manifest)?;
    let ingested = ingest_sequences(&manifest)?;
    if ingested.samples.is_empty() {
        return Err(CliError::Input("no usable sequences in the manifest".into()));
    }
    let faces = ingested
        .samples
        .par_iter()
        .map(|s| load_face(&s.image, &s.landmarks))
        .collect::<CliResult<Vec<_>>>()?;
    let shapes: Vec<LandmarkSet> = faces.iter().map(|(_, l)| l.clone()).collect();
    let reference = LandmarkSet::mean_reference(&shapes, CROP_SIZE)?;
    let described = describe_all(&faces, &reference, &config.features)?;

    let mut warnings = Vec::new();
    let mut raw = Vec::with_capacity(described.len());
    for (sample, d) in ingested.samples.iter().zip(described) {
        for w in &d.warnings {
            warnings.push(format!("{}: {w}", sample.image.display()));
        }
        raw.push(d.value);
    }
    let pipeline = FeaturePipeline::fit(config.features, reference, &raw)?;
    let features = raw.iter().map(|r| pipeline.reduce(r)).collect::<Result<Vec<_>, _>>()?;
    log::info!(
        "extracted {} samples, {} features, {} sequences skipped",
        features.len(),
        pipeline.dimension(),
        ingested.skipped.len()
    );

    let cache = FeatureCache {
        format: FEATURES_FORMAT.into(),
        version: FORMAT_VERSION,
        seed: config.seed,
        config: config.clone(),
        classes: manifest.classes.clone(),
        samples: ingested.samples,
        skipped: ingested.skipped,
        warnings,
        pipeline,
        features,
    };
    let path = features_path(out);
    write_json(&path, &cache)?;
    Ok(ExtractSummary {
        samples: cache.samples.len(),
        skipped: cache.skipped.len(),
        dimension: cache.pipeline.dimension(),
        path,
    })
}

/// Training options with every kernel that has no explicit column range
/// repeated once per descriptor block, so the weights can favour a descriptor.
pub fn expand_kernels(config: &RunConfig, pipeline: &FeaturePipeline) -> TrainOptions {
    let mut options = config.train.clone();
    let ranges = pipeline.block_ranges();
    if !config.kernel_per_block || ranges.len() < 2 {
        return options;
    }
    options.kernels = config
        .train
        .kernels
        .iter()
        .flat_map(|k| {
            let has_columns = match k {
                KernelChoice::Rbf { columns, .. } | KernelChoice::Polynomial { columns, .. } => columns.is_some(),
            };
            if has_columns {
                return vec![*k];
            }
            ranges
                .iter()
                .map(|r| {
                    let cols = Some(Columns { start: r.start, len: r.len });
                    match *k {
                        KernelChoice::Rbf { gamma, .. } => KernelChoice::Rbf { gamma, columns: cols },
                        KernelChoice::Polynomial { degree, offset, scale, .. } => {
                            KernelChoice::Polynomial { degree, offset, scale, columns: cols }
                        }
                    }
                })
                .collect()
        })
        .collect();
    options
}

/// Everything `classify` and `imitate` need: the feature pipeline and the model.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ClassifierFile {
    pub format: String,
    pub version: u32,
    pub seed: u64,
    pub config: RunConfig,
    pub pipeline: FeaturePipeline,
    pub model: MulticlassModel,
}

impl ClassifierFile {
    pub fn load(path: &Path) -> CliResult<Self> {
        let file: ClassifierFile = read_json("model", path)?;
        if file.format != CLASSIFIER_FORMAT || file.version != FORMAT_VERSION {
            return Err(CliError::Input(format!(
                "{}: expected {CLASSIFIER_FORMAT} v{FORMAT_VERSION}, got {} v{}",
                path.display(),
                file.format,
                file.version
            )));
        }
        file.model.validate()?;
        if file.model.dimension != file.pipeline.dimension() {
            return Err(CliError::Input(format!("{}: model and feature pipeline disagree", path.display())));
        }
        Ok(file)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct PairSummary {
    pub pair: String,
    pub kernel_weights: Vec<f64>,
    pub support_vectors: usize,
    pub objective: f64,
    pub outer_iterations: usize,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct TrainReport {
    pub seed: u64,
    pub config: RunConfig,
    pub samples: usize,
    pub kernels: Vec<String>,
    pub pairs: Vec<PairSummary>,
    pub warnings: Vec<String>,
}

/// Trains the one-vs-one MKL classifier on `features.json`; writes `model.json`
/// and `train-report.json`.
pub fn cmd_train(config: &RunConfig, out: &Path) -> CliResult<TrainReport> {
    let cache = FeatureCache::load(&features_path(out))?;
    let options = expand_kernels(config, &cache.pipeline);
    let trained = train_multiclass(&cache.features, &cache.labels(), &cache.classes, &options)?;
    let model = trained.value;
    let report = TrainReport {
        seed: config.seed,
        config: config.clone(),
        samples: cache.samples.len(),
        kernels: model
            .kernels
            .iter()
            .map(|k| match k.columns {
                Some(c) => format!("{} on columns {}..{}", k.spec, c.start, c.start + c.len),
                None => k.spec.to_string(),
            })
            .collect(),
        pairs: model
            .classifiers
            .iter()
            .map(|c| PairSummary {
                pair: format!("{}/{}", model.classes[c.a], model.classes[c.b]),
                kernel_weights: c.kernel_weights.clone(),
                support_vectors: c.support.len(),
                objective: c.objective,
                outer_iterations: c.history.len(),
            })
            .collect(),
        warnings: warning_strings(&trained.warnings),
    };
    let file = ClassifierFile {
        format: CLASSIFIER_FORMAT.into(),
        version: FORMAT_VERSION,
        seed: config.seed,
        config: config.clone(),
        pipeline: cache.pipeline,
        model,
    };
    write_json(&model_path(out), &file)?;
    write_json(&out.join("train-report.json"), &report)?;
    Ok(report)
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct EvalReport {
    pub seed: u64,
    pub config: RunConfig,
    pub scheme: CvScheme,
    pub folds: usize,
    pub samples: usize,
    pub overall_rate: f64,
    /// Classes in table order.
    pub classes: Vec<String>,
    pub counts: Vec<Vec<u64>>,
    pub row_percentages: Vec<Vec<f64>>,
    pub rejected_folds: Vec<RejectedFold>,
    pub warnings: Vec<String>,
}

impl EvalReport {
    fn new(config: &RunConfig, report: &CvReport, warnings: &[Warning]) -> Self {
        let confusion = report.confusion.reordered(&REPORT_ORDER);
        EvalReport {
            seed: config.seed,
            config: config.clone(),
            scheme: report.scheme,
            folds: report.folds,
            samples: report.assignment.len(),
            overall_rate: confusion.overall_rate(),
            row_percentages: confusion.row_percentages(),
            classes: confusion.classes.clone(),
            counts: confusion.counts.clone(),
            rejected_folds: report.rejected.clone(),
            warnings: warning_strings(warnings),
        }
    }

    /// Confusion table in percent, then the run settings and full configuration.
    pub fn to_text(&self, table: &str) -> String {
        let mut out = String::new();
        out.push_str(&format!(
            "{}-fold {} cross-validation, {} samples, seed {}\n\n",
            self.folds, self.scheme, self.samples, self.seed
        ));
        out.push_str(table);
        for r in &self.rejected_folds {
            out.push_str(&format!("rejected fold {}: {}\n", r.fold, r.reason));
        }
        out.push_str("\n# configuration\n");
        out.push_str(&self.config.to_toml());
        out
    }
}

/// Cross-validates on `features.json`; writes `report.json`, `report.txt`, and
/// `confusion.csv`.
pub fn cmd_eval(config: &RunConfig, out: &Path) -> CliResult<EvalReport> {
    let cache = FeatureCache::load(&features_path(out))?;
    let options = expand_kernels(config, &cache.pipeline);
    let subjects: Vec<String> = cache.samples.iter().map(|s| s.subject.clone()).collect();
    let setup = CvSetup {
        scheme: config.cv.scheme,
        folds: config.cv.folds,
        seed: config.seed,
        subjects: Some(&subjects),
    };
    let cv = cross_validate(&cache.features, &cache.labels(), &cache.classes, setup, &options)?;
    let report = EvalReport::new(config, &cv.value, &cv.warnings);
    let table = cv.value.confusion.reordered(&REPORT_ORDER);
    write_json(&out.join("report.json"), &report)?;
    write_file(&out.join("report.txt"), report.to_text(&table.to_text()))?;
    write_file(&out.join("confusion.csv"), table.to_csv())?;
    Ok(report)
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Classification {
    pub expression: String,
    pub votes: u32,
    pub intensity: f64,
    pub tally: BTreeMap<String, u32>,
    pub warnings: Vec<String>,
}

fn classify_face(file: &ClassifierFile, image: &GrayImage, landmarks: &LandmarkSet) -> CliResult<(Classification, robohead_core::mkl::VoteResult)> {
    let features = file.pipeline.process(image, landmarks)?;
    let result = file.model.classify(&features.value)?;
    let mut warnings = warning_strings(&features.warnings);
    let classes = &file.model.classes;
    let expression = classes[result.winner].clone();
    let intensity = if expression == Expression::Neutral.name() {
        0.0
    } else {
        let mu = robohead_core::imitation::vote_to_intensity(result.votes, classes.len())?;
        warnings.extend(warning_strings(&mu.warnings));
        mu.value
    };
    let classification = Classification {
        expression,
        votes: result.votes,
        intensity,
        tally: classes.iter().cloned().zip(result.tally.iter().copied()).collect(),
        warnings,
    };
    Ok((classification, result))
}

/// Classifies one face with a trained model.
pub fn cmd_classify(model: &Path, image: &Path, landmarks: &Path) -> CliResult<Classification> {
    let file = ClassifierFile::load(model)?;
    let (image, landmarks) = load_face(image, landmarks)?;
    Ok(classify_face(&file, &image, &landmarks)?.0)
}

/// Where the expression track for an animation comes from.
#[derive(Debug, Clone, PartialEq)]
pub enum ExpressionTrack {
    None,
    Constant { expression: Expression, lambda: f64 },
    /// JSON array of `{time, expression, lambda}` keys.
    File(PathBuf),
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct AnimateSummary {
    pub frames: usize,
    pub duration: f64,
    pub csv: PathBuf,
    pub jsonl: PathBuf,
}

/// Renders a transcript into `timeline.csv` and `timeline.jsonl`, plus one
/// preview image per frame under `previews/` when asked.
pub fn cmd_animate(
    config: &RunConfig,
    transcript: &Path,
    track: &ExpressionTrack,
    out: &Path,
    previews: bool,
) -> CliResult<AnimateSummary> {
    require("transcript", transcript)?;
    let transcript = Transcript::load(transcript)?;
    let table = config.viseme_table()?;
    let keys = match track {
        ExpressionTrack::None => Vec::new(),
        ExpressionTrack::Constant { expression, lambda } => {
            let time = transcript.span().map_or(0.0, |(s, _)| s);
            vec![ExpressionKey { time, expression: *expression, lambda: *lambda }]
        }
        ExpressionTrack::File(path) => read_json("expression track", path)?,
    };
    let frames = render_timeline(&transcript, &keys, &table, config.render_params())?;

    create_dir(out)?;
    let csv = out.join("timeline.csv");
    let mut buf = Vec::new();
    write_csv(&frames, table.len(), &mut buf).map_err(|e| CliError::io(&csv, e))?;
    write_file(&csv, buf)?;
    let jsonl = out.join("timeline.jsonl");
    let mut buf = Vec::new();
    write_jsonl(&frames, &mut buf).map_err(|e| CliError::io(&jsonl, e))?;
    write_file(&jsonl, buf)?;
    if previews {
        write_previews(&frames, &out.join("previews"))?;
    }
    Ok(AnimateSummary {
        frames: frames.len(),
        duration: transcript.span().map_or(0.0, |(s, e)| e - s),
        csv,
        jsonl,
    })
}

/// One row of a replay list: a saved video frame and when it was captured.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ReplayFrame {
    pub time: f64,
    pub image: PathBuf,
    pub landmarks: PathBuf,
}

pub fn load_replay(path: &Path) -> CliResult<Vec<ReplayFrame>> {
    require("replay list", path)?;
    let root = path.parent().unwrap_or(Path::new(""));
    let mut reader = csv::ReaderBuilder::new()
        .trim(csv::Trim::All)
        .comment(Some(b'#'))
        .from_path(path)
        .map_err(|e| CliError::Input(format!("{}: {e}", path.display())))?;
    let mut frames = reader
        .deserialize()
        .collect::<Result<Vec<ReplayFrame>, _>>()
        .map_err(|e| CliError::Input(format!("{}: {e}", path.display())))?;
    for f in &mut frames {
        f.image = root.join(&f.image);
        f.landmarks = root.join(&f.landmarks);
    }
    if frames.windows(2).any(|w| w[0].time > w[1].time) {
        return Err(CliError::Input(format!("{}: frames must be sorted by time", path.display())));
    }
    Ok(frames)
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ImitateSummary {
    pub frames: usize,
    pub commands: usize,
    pub servo_ticks: usize,
}

struct Scheduled {
    start: f64,
    imitation: Imitation,
}

impl Scheduled {
    fn index_at(&self, t: f64, frame_rate: f64) -> usize {
        let k = ((t - self.start) * frame_rate + 1e-9).floor().max(0.0) as usize;
        k.min(self.imitation.trajectory.len() - 1)
    }
}

/// Replays saved frames through the classifier and drives the head.
///
/// Each frame is classified; a debouncer decides when the expression changes.
/// Every change starts a new motion from wherever the head is at that moment.
/// Writes `imitation.jsonl` (one record per replayed frame), `servo.bin` (one
/// command set per tick at the configured frame rate), and `mouth.csv`.
pub fn cmd_imitate(config: &RunConfig, model: &Path, replay: &Path, out: &Path) -> CliResult<ImitateSummary> {
    let file = ClassifierFile::load(model)?;
    let frames = load_replay(replay)?;
    let templates = config.templates()?;
    let calibration = config.calibration()?;
    let settings = config.imitation();
    let rate = settings.frame_rate;

    let votes = frames
        .par_iter()
        .map(|f| {
            let (image, landmarks) = load_face(&f.image, &f.landmarks)?;
            Ok(classify_face(&file, &image, &landmarks)?.1)
        })
        .collect::<CliResult<Vec<_>>>()?;

    let mut debouncer = Debouncer::new(config.robot.debounce);
    let mut schedule: Vec<Scheduled> = Vec::new();
    let mut log = Vec::new();
    let neutral = templates.neutral_pose();
    for (frame, result) in frames.iter().zip(&votes) {
        let before = debouncer.current();
        let now = debouncer.push(result.winner);
        if now.is_some() && now != before {
            let from = schedule
                .last()
                .map_or(neutral, |s| s.imitation.trajectory[s.index_at(frame.time, rate)].pose);
            let imitation = imitate(result, &file.model.classes, &templates, &from, &settings, frame.time)?;
            for w in &imitation.warnings {
                log::warn!("frame at {}: {w}", frame.time);
            }
            schedule.push(Scheduled { start: frame.time, imitation: imitation.value });
        }
        let (winner, intensity) = vote_outcome(result, &file.model.classes)?.value;
        let active = schedule.last();
        let record = LogRecord {
            timestamp: frame.time,
            winner,
            votes: result.votes,
            intensity,
            target: active.map(|s| s.imitation.command.expression),
            pose: *active.map_or(neutral, |s| s.imitation.trajectory[s.index_at(frame.time, rate)].pose).values(),
        };
        write_log_record(&mut log, &record).map_err(|e| CliError::io(&out.join("imitation.jsonl"), e))?;
    }

    let mut servo = Vec::new();
    let mut mouth = Vec::new();
    if let (Some(first), Some(last)) = (schedule.first(), schedule.last()) {
        let end = last.start + last.imitation.trajectory.last().map_or(0.0, |p| p.time);
        let ticks = ((end - first.start) * rate + 1e-9).floor() as usize + 1;
        for k in 0..ticks {
            let t = first.start + k as f64 / rate;
            let active = schedule.iter().rev().find(|s| s.start <= t + 1e-12).expect("first starts at tick 0");
            let i = active.index_at(t, rate);
            servo.extend(to_servo_commands(&active.imitation.trajectory[i].pose, &calibration));
            let mut frame = active.imitation.frames[i].clone();
            frame.timestamp = t;
            mouth.push(frame);
        }
    }
    create_dir(out)?;
    write_file(&out.join("imitation.jsonl"), &log)?;
    write_file(&out.join("servo.bin"), &servo)?;
    let mut csv = Vec::new();
    let classes = mouth.first().map_or(0, |f| f.viseme_weights.len());
    write_csv(&mouth, classes, &mut csv).map_err(|e| CliError::io(&out.join("mouth.csv"), e))?;
    write_file(&out.join("mouth.csv"), csv)?;
    Ok(ImitateSummary { frames: frames.len(), commands: schedule.len(), servo_ticks: mouth.len() })
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ExportSummary {
    pub frames: usize,
    pub bytes: usize,
    pub path: PathBuf,
}

/// Moves from neutral to `expression` at `intensity` and holds it, writing
/// `servo.bin` and a readable `servo.csv` (time, channel, target).
pub fn cmd_export_servo(config: &RunConfig, expression: Expression, intensity: f64, out: &Path) -> CliResult<ExportSummary> {
    let templates = config.templates()?;
    let calibration = config.calibration()?;
    let settings = config.imitation();
    let template = templates.get(expression, settings.mode);
    let arrival = template.pose_at(intensity, 0.0);
    for w in &arrival.warnings {
        log::warn!("{w}");
    }
    let mut poses: Vec<TimedPose> = trajectory_with(
        &templates.neutral_pose(),
        &arrival.value,
        settings.transition_seconds,
        settings.frame_rate,
        settings.easing,
    )?;
    let hold = (settings.hold_seconds * settings.frame_rate + 1e-9).floor() as usize;
    for k in 1..=hold {
        let t = k as f64 / settings.frame_rate;
        poses.push(TimedPose { time: settings.transition_seconds + t, pose: template.pose_at(intensity, t).value });
    }

    let mut bytes = Vec::with_capacity(poses.len() * 40);
    let mut table = String::from("time,channel,target\n");
    for tp in &poses {
        let commands = to_servo_commands(&tp.pose, &calibration);
        for (channel, target) in decode_stream(&commands)? {
            table.push_str(&format!("{},{channel},{target}\n", tp.time));
        }
        bytes.extend(commands);
    }
    let path = out.join("servo.bin");
    write_file(&path, &bytes)?;
    write_file(&out.join("servo.csv"), table)?;
    Ok(ExportSummary { frames: poses.len(), bytes: bytes.len(), path })
}

/// Writes `value` as one JSON line.
pub fn print_json<T: Serialize, W: Write>(mut out: W, value: &T) -> std::io::Result<()> {
    serde_json::to_writer(&mut out, value)?;
    out.write_all(b"\n")
}
