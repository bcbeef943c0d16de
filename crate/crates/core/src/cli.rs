//! Command implementations behind the `avtp-ids` binary.
//!
//! Each command takes a plain argument struct, validates it before doing
//! any work, and writes its primary output to a caller-supplied writer so
//! the same code serves the binary, the examples and the tests.

use std::fs;
use std::io::{self, Write};
use std::path::{Path, PathBuf};

use thiserror::Error;

use crate::bench::{self, BenchError, BenchPlan, BenchRow, MonotonicClock};
use crate::features::{self, FeatureError, FeatureMatrix, WindowBuilder, MIN_WINDOW};
use crate::ingest::{self, IngestError, Label, RawPacket};
use crate::metrics::{MetricsError, MetricsReport};
use crate::nn::{self, compress, Architecture, Model, NnError, Scratch};

#[derive(Debug, Error)]
pub enum CliError {
    #[error("{}: {source}", path.display())]
    Io { path: PathBuf, source: io::Error },
    #[error("invalid arguments: {0}")]
    Invalid(String),
    #[error(transparent)]
    Ingest(#[from] IngestError),
    #[error(transparent)]
    Feature(#[from] FeatureError),
    #[error(transparent)]
    Model(#[from] NnError),
    #[error(transparent)]
    Metrics(#[from] MetricsError),
    #[error(transparent)]
    Bench(#[from] BenchError),
    #[error("writing output: {0}")]
    Output(#[source] io::Error),
}

fn read(path: &Path) -> Result<Vec<u8>, CliError> {
    fs::read(path).map_err(|source| CliError::Io {
        path: path.to_path_buf(),
        source,
    })
}

fn write_file(path: &Path, bytes: &[u8]) -> Result<(), CliError> {
    fs::write(path, bytes).map_err(|source| CliError::Io {
        path: path.to_path_buf(),
        source,
    })
}

fn require_file(path: &Path) -> Result<(), CliError> {
    if path.is_file() {
        Ok(())
    } else {
        Err(CliError::Invalid(format!("{} is not a readable file", path.display())))
    }
}

fn require_parent(path: &Path) -> Result<(), CliError> {
    match path.parent() {
        Some(p) if !p.as_os_str().is_empty() && !p.is_dir() => Err(CliError::Invalid(format!(
            "output directory {} does not exist",
            p.display()
        ))),
        _ => Ok(()),
    }
}

fn check_window(w: usize) -> Result<(), CliError> {
    if w < MIN_WINDOW {
        return Err(CliError::Invalid(format!("window {w} is below {MIN_WINDOW}")));
    }
    Ok(())
}

fn check_threshold(t: f64) -> Result<(), CliError> {
    if !(0.0..=1.0).contains(&t) {
        return Err(CliError::Invalid(format!("threshold {t} outside [0, 1]")));
    }
    Ok(())
}

/// Label sidecar written next to a capture: `x.pcap` → `x.labels`.
pub fn sidecar_path(pcap: &Path) -> PathBuf {
    pcap.with_extension("labels")
}

pub fn load_model_file(path: &Path) -> Result<Model, CliError> {
    let name = path
        .file_stem()
        .map(|s| s.to_string_lossy().into_owned())
        .unwrap_or_else(|| "model".into());
    Ok(nn::load_model(&read(path)?, &name)?)
}

/// Reads a capture and optional sidecar into raw frames and labels.
pub fn load_capture(
    pcap: &Path,
    labels: Option<&Path>,
) -> Result<(Vec<RawPacket>, Option<Vec<Label>>), CliError> {
    let raw = ingest::parse_pcap(&read(pcap)?)?;
    let labels = match labels {
        Some(p) => {
            let text = String::from_utf8(read(p)?)
                .map_err(|e| CliError::Invalid(format!("{}: {e}", p.display())))?;
            Some(ingest::parse_labels(&text)?)
        }
        None => None,
    };
    Ok((raw, labels))
}

#[derive(Debug, Clone)]
pub struct SynthArgs {
    pub n_benign: usize,
    pub frames: usize,
    pub seed: u64,
    /// Capture path; the sidecar goes to [`sidecar_path`].
    pub out: PathBuf,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct SynthSummary {
    pub packets: usize,
    pub benign: usize,
    pub injected: usize,
    pub pcap: PathBuf,
    pub labels: PathBuf,
}

/// Fixed capture start time so repeated runs are byte-identical.
const SYNTH_EPOCH_US: u64 = 1_700_000_000_000_000;

pub fn cmd_synth(args: &SynthArgs) -> Result<SynthSummary, CliError> {
    require_parent(&args.out)?;
    let corpus = ingest::synth_corpus(args.n_benign, args.frames, args.seed);
    let labels_path = sidecar_path(&args.out);
    write_file(&args.out, &ingest::write_pcap(&corpus.to_raw(), SYNTH_EPOCH_US))?;
    write_file(&labels_path, ingest::write_labels(&corpus.labels).as_bytes())?;
    let injected = corpus.injected_count();
    Ok(SynthSummary {
        packets: corpus.len(),
        benign: corpus.len() - injected,
        injected,
        pcap: args.out.clone(),
        labels: labels_path,
    })
}

#[derive(Debug, Clone)]
pub struct FeaturesArgs {
    pub pcap: PathBuf,
    pub labels: Option<PathBuf>,
    pub window: usize,
    pub ethertype: Option<u16>,
    pub out: PathBuf,
}

pub fn cmd_features(args: &FeaturesArgs) -> Result<usize, CliError> {
    check_window(args.window)?;
    require_file(&args.pcap)?;
    if let Some(l) = &args.labels {
        require_file(l)?;
    }
    require_parent(&args.out)?;

    let (raw, labels) = load_capture(&args.pcap, args.labels.as_deref())?;
    let packets = ingest::label_capture(&raw, labels.as_deref(), args.ethertype)?;
    let windows = features::build_windows(&packets, args.window)?;
    write_file(&args.out, &features::write_dump(&windows, args.window)?)?;
    Ok(windows.len())
}

#[derive(Debug, Clone)]
pub struct DetectArgs {
    pub model: PathBuf,
    pub pcap: PathBuf,
    pub labels: Option<PathBuf>,
    pub window: usize,
    pub threshold: f64,
    pub ethertype: Option<u16>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct DetectSummary {
    pub windows: usize,
    pub alerts: usize,
    pub report: Option<MetricsReport>,
}

/// One verdict line: `<window index>\t<score, 6 dp>\t<0|1>`.
pub fn verdict_line(index: usize, score: f32, threshold: f64) -> String {
    let alert = (score as f64 >= threshold) as u8;
    format!("{index}\t{score:.6}\t{alert}")
}

/// Scores every window of a capture, writing one verdict line per window
/// as it is produced. With labels, a metrics report is appended as a
/// `# `-prefixed JSON line.
pub fn cmd_detect(args: &DetectArgs, out: &mut dyn Write) -> Result<DetectSummary, CliError> {
    check_window(args.window)?;
    check_threshold(args.threshold)?;
    require_file(&args.model)?;
    require_file(&args.pcap)?;
    if let Some(l) = &args.labels {
        require_file(l)?;
    }

    let model = load_model_file(&args.model)?;
    if model.input_shape()[0] != args.window {
        return Err(CliError::Invalid(format!(
            "model expects windows of {} packets, --window is {}",
            model.input_shape()[0],
            args.window
        )));
    }
    let (raw, labels) = load_capture(&args.pcap, args.labels.as_deref())?;
    let packets = ingest::label_capture(&raw, labels.as_deref(), args.ethertype)?;
    if packets.len() < args.window + 1 {
        return Err(FeatureError::StreamTooShort {
            len: packets.len(),
            w: args.window,
        }
        .into());
    }

    let mut builder = WindowBuilder::new(args.window)?;
    let mut scratch = Scratch::new();
    let (mut truth, mut scores) = (Vec::new(), Vec::new());
    let mut alerts = 0;
    for p in packets {
        let Some(win) = builder.push(p) else { continue };
        let score = model.infer(&win, &mut scratch)?;
        let line = verdict_line(scores.len(), score, args.threshold);
        writeln!(out, "{line}").map_err(CliError::Output)?;
        alerts += (score as f64 >= args.threshold) as usize;
        truth.push(win.label);
        scores.push(score as f64);
    }
    let report = match labels {
        Some(_) => {
            let r = MetricsReport::evaluate(&truth, &scores, args.threshold)?;
            writeln!(out, "# {}", r.to_json()).map_err(CliError::Output)?;
            Some(r)
        }
        None => None,
    };
    out.flush().map_err(CliError::Output)?;
    Ok(DetectSummary {
        windows: scores.len(),
        alerts,
        report,
    })
}

#[derive(Debug, Clone)]
pub struct EvalArgs {
    pub model: PathBuf,
    pub features: PathBuf,
    pub threshold: f64,
    pub out: Option<PathBuf>,
}

pub fn evaluate_windows(
    model: &Model,
    windows: &[FeatureMatrix],
    threshold: f64,
) -> Result<MetricsReport, CliError> {
    let mut scratch = Scratch::new();
    let scores = windows
        .iter()
        .map(|w| model.infer(w, &mut scratch).map(f64::from))
        .collect::<Result<Vec<_>, _>>()?;
    let labels: Vec<Label> = windows.iter().map(|w| w.label).collect();
    Ok(MetricsReport::evaluate(&labels, &scores, threshold)?)
}

pub fn cmd_eval(args: &EvalArgs) -> Result<MetricsReport, CliError> {
    check_threshold(args.threshold)?;
    require_file(&args.model)?;
    require_file(&args.features)?;
    if let Some(o) = &args.out {
        require_parent(o)?;
    }
    let model = load_model_file(&args.model)?;
    let dump = features::read_dump(&read(&args.features)?)?;
    let report = evaluate_windows(&model, &dump.windows, args.threshold)?;
    if let Some(o) = &args.out {
        write_file(o, report.to_json_pretty().as_bytes())?;
    }
    Ok(report)
}

#[derive(Debug, Clone)]
pub struct BenchArgs {
    /// Model files to time; empty means the built-in variants.
    pub models: Vec<PathBuf>,
    pub host: String,
    pub tdp_w: f64,
    pub warmup: usize,
    /// Passes over the inputs; `None` uses the default call/time budget.
    pub reps: Option<usize>,
    pub threshold_us: f64,
    pub seed: u64,
    /// Time windows from this capture instead of random ones.
    pub pcap: Option<PathBuf>,
    /// Time extraction + windowing + inference per packet (needs `pcap`).
    pub end_to_end: bool,
    pub inputs: usize,
}

impl Default for BenchArgs {
    fn default() -> Self {
        BenchArgs {
            models: Vec::new(),
            host: "local".into(),
            tdp_w: 65.0,
            warmup: bench::DEFAULT_WARMUP,
            reps: None,
            threshold_us: bench::REALTIME_THRESHOLD_US,
            seed: 0,
            pcap: None,
            end_to_end: false,
            inputs: 64,
        }
    }
}

/// The five deployment variants: full baseline, 90 %-pruned baseline,
/// pruned + int8 baseline, student and ultra-light, all with seeded
/// random weights.
pub fn builtin_variants(window: usize, seed: u64) -> Result<Vec<Model>, CliError> {
    let input = [window, features::COLS, 1];
    let base = Architecture::Baseline.build(input, seed)?;
    let mut pruned = compress::prune_magnitude(&base, 0.9)?;
    pruned.set_name("baseline-pruned");
    let calibration = features::random_windows(64, window, seed ^ 0xCA1);
    let mut quant = compress::quantize_model(&pruned, &calibration)?;
    quant.set_name("baseline-pruned-int8");
    Ok(vec![
        base,
        pruned,
        quant,
        Architecture::Student.build(input, seed)?,
        Architecture::UltraLight.build(input, seed)?,
    ])
}

pub fn cmd_bench(args: &BenchArgs) -> Result<Vec<BenchRow>, CliError> {
    if !(args.tdp_w > 0.0) {
        return Err(CliError::Invalid(format!("TDP {} must be positive", args.tdp_w)));
    }
    if !(args.threshold_us > 0.0) {
        return Err(CliError::Invalid("real-time threshold must be positive".into()));
    }
    if args.reps == Some(0) || args.inputs == 0 {
        return Err(CliError::Invalid("reps and inputs must be at least 1".into()));
    }
    if args.end_to_end && args.pcap.is_none() {
        return Err(CliError::Invalid("--end-to-end needs --pcap".into()));
    }
    for p in args.models.iter().chain(args.pcap.iter()) {
        require_file(p)?;
    }

    let models = if args.models.is_empty() {
        builtin_variants(features::DEFAULT_WINDOW, args.seed)?
    } else {
        args.models
            .iter()
            .map(|p| load_model_file(p))
            .collect::<Result<Vec<_>, _>>()?
    };
    let capture = match &args.pcap {
        Some(p) => Some(load_capture(p, None)?.0),
        None => None,
    };

    let mut rows = Vec::with_capacity(models.len());
    for model in &models {
        let w = model.input_shape()[0];
        let mut clock = MonotonicClock::default();
        let stats = if args.end_to_end {
            bench::time_pipeline(model, capture.as_deref().unwrap_or(&[]), args.warmup, &mut clock)?
        } else {
            let inputs = match &capture {
                Some(raw) => {
                    let pk = ingest::label_capture(raw, None, None)?;
                    let mut wins = features::build_windows(&pk, w)?;
                    wins.truncate(args.inputs);
                    wins
                }
                None => features::random_windows(args.inputs, w, args.seed),
            };
            match args.reps {
                Some(reps) => {
                    bench::time_inference_with(model, &inputs, args.warmup, reps, &mut clock)?
                }
                None => {
                    let plan = BenchPlan {
                        warmup: args.warmup,
                        ..BenchPlan::default()
                    };
                    bench::time_planned(model, &inputs, plan, &mut clock)?
                }
            }
        };
        rows.push(BenchRow::new(
            model.name(),
            &args.host,
            stats,
            args.tdp_w,
            args.threshold_us,
        )?);
    }
    Ok(rows)
}
