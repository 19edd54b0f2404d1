//! Command-line surface: `segment`, `phantom`, `metrics`, and `compare`.
//!
//! Exit codes: 0 on success, 1 on I/O or data failures, 2 on bad flags or
//! invalid parameters.  All commands are deterministic given their flags
//! and seeds; the only non-reproducible output is the wall-time field in
//! `compare`'s stdout report, which is never written to a file.

use std::fmt::Write as _;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::error::ErrorKind;
use clap::{Args, Parser, Subcommand, ValueEnum};
use serde::Serialize;

use crate::error::{Error, Result};
use crate::image::{load_image, save_image, BinaryMask, Channel};
use crate::metrics::score;
use crate::phantom::{self, PhantomSpec, Tube};
use crate::segmenter::{run, IterationTrace, Mode, SegmenterConfig};
use crate::sure::SureMode;
use crate::tight_frame::Family;

#[derive(Parser)]
#[command(
    name = "tubeseg",
    version,
    about = "Iterative tight-frame segmentation of tubular structures"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Segment an image into a binary vessel mask.
    Segment(SegmentArgs),
    /// Render a synthetic tube phantom with its ground-truth mask.
    Phantom(PhantomArgs),
    /// Score a predicted mask against a ground-truth mask.
    Metrics(MetricsArgs),
    /// Run both modes on one input and report their differences.
    Compare(CompareArgs),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
enum ModeArg {
    Tfa,
    Tfae,
}

impl From<ModeArg> for Mode {
    fn from(m: ModeArg) -> Mode {
        match m {
            ModeArg::Tfa => Mode::Tfa,
            ModeArg::Tfae => Mode::Tfae,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
enum TransformArg {
    Framelet,
    Curvelet,
}

impl From<TransformArg> for Family {
    fn from(t: TransformArg) -> Family {
        match t {
            TransformArg::Framelet => Family::Framelet,
            TransformArg::Curvelet => Family::Curvelet,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
enum ChannelArg {
    Gray,
    Red,
    Green,
    Blue,
}

impl From<ChannelArg> for Channel {
    fn from(c: ChannelArg) -> Channel {
        match c {
            ChannelArg::Gray => Channel::Gray,
            ChannelArg::Red => Channel::Red,
            ChannelArg::Green => Channel::Green,
            ChannelArg::Blue => Channel::Blue,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
enum SureModeArg {
    Coefficients,
    Image,
}

impl From<SureModeArg> for SureMode {
    fn from(s: SureModeArg) -> SureMode {
        match s {
            SureModeArg::Coefficients => SureMode::Coefficients,
            SureModeArg::Image => SureMode::Image,
        }
    }
}

/// Segmentation settings shared by `segment` and `compare`: flags override
/// an optional key=value config file, which overrides the defaults.
#[derive(Debug, Clone, Args)]
struct SegmentSettings {
    /// Segmentation mode (ignored by `compare`, which runs both).
    #[arg(long, value_enum)]
    mode: Option<ModeArg>,
    /// Tight-frame family for the denoising step.
    #[arg(long, value_enum)]
    transform: Option<TransformArg>,
    /// Gaussian derivative scale.
    #[arg(long)]
    sigma: Option<f64>,
    /// Gradient-magnitude seeding threshold.
    #[arg(long)]
    epsilon: Option<f64>,
    /// Iteration cap.
    #[arg(long = "max-iters")]
    max_iters: Option<usize>,
    /// Channel to segment; color inputs default to green.
    #[arg(long, value_enum)]
    channel: Option<ChannelArg>,
    /// Source of the SURE threshold estimate.
    #[arg(long = "sure-mode", value_enum)]
    sure_mode: Option<SureModeArg>,
    /// key=value file mirroring these flag names; flags win on conflict.
    #[arg(long)]
    config: Option<PathBuf>,
}

/// Fully resolved settings.  `channel` stays `None` unless a flag or
/// config key picked one, so the loader can fit its default to the input.
struct Resolved {
    config: SegmenterConfig,
    channel: Option<Channel>,
}

impl SegmentSettings {
    fn resolve(&self) -> Result<Resolved> {
        let mut cfg = SegmenterConfig::default();
        let mut channel = None;

        if let Some(path) = &self.config {
            apply_config_file(path, &mut cfg, &mut channel)?;
        }
        if let Some(mode) = self.mode {
            cfg.mode = mode.into();
        }
        if let Some(transform) = self.transform {
            cfg.transform = transform.into();
        }
        if let Some(sigma) = self.sigma {
            cfg.sigma = sigma;
        }
        if let Some(epsilon) = self.epsilon {
            cfg.epsilon = epsilon;
        }
        if let Some(max_iters) = self.max_iters {
            cfg.max_iterations = max_iters;
        }
        if let Some(ch) = self.channel {
            channel = Some(ch.into());
        }
        if let Some(sure_mode) = self.sure_mode {
            cfg.sure_mode = sure_mode.into();
        }
        cfg.validate()?;
        Ok(Resolved {
            config: cfg,
            channel,
        })
    }
}

fn parse_enum<T: ValueEnum>(key: &str, value: &str) -> Result<T> {
    T::from_str(value, true)
        .map_err(|_| Error::Parameter(format!("config key {key:?} has invalid value {value:?}")))
}

fn parse_number<T: std::str::FromStr>(key: &str, value: &str) -> Result<T> {
    value
        .parse()
        .map_err(|_| Error::Parameter(format!("config key {key:?} has invalid value {value:?}")))
}

/// Applies a key=value config file.  Keys mirror the flag names; unknown
/// keys are rejected.  Blank lines and `#` comments are ignored.
fn apply_config_file(
    path: &Path,
    cfg: &mut SegmenterConfig,
    channel: &mut Option<Channel>,
) -> Result<()> {
    let text = std::fs::read_to_string(path)?;
    for (lineno, raw) in text.lines().enumerate() {
        let line = raw.trim();
        if line.is_empty() || line.starts_with('#') {
            continue;
        }
        let (key, value) = line.split_once('=').ok_or_else(|| {
            Error::Parameter(format!(
                "config line {} is not key=value: {raw:?}",
                lineno + 1
            ))
        })?;
        let (key, value) = (key.trim(), value.trim());
        match key {
            "mode" => cfg.mode = parse_enum::<ModeArg>(key, value)?.into(),
            "transform" => cfg.transform = parse_enum::<TransformArg>(key, value)?.into(),
            "sigma" => cfg.sigma = parse_number(key, value)?,
            "epsilon" => cfg.epsilon = parse_number(key, value)?,
            "max-iters" => cfg.max_iterations = parse_number(key, value)?,
            "channel" => *channel = Some(parse_enum::<ChannelArg>(key, value)?.into()),
            "sure-mode" => cfg.sure_mode = parse_enum::<SureModeArg>(key, value)?.into(),
            other => {
                return Err(Error::Parameter(format!("unknown config key {other:?}")));
            }
        }
    }
    Ok(())
}

#[derive(Args)]
struct SegmentArgs {
    /// Image to segment (PNG/PGM/JPEG).
    #[arg(long)]
    input: PathBuf,
    /// Output mask PNG (0/255).
    #[arg(long)]
    output: PathBuf,
    /// Write the iteration trace as JSON lines.
    #[arg(long)]
    trace: Option<PathBuf>,
    #[command(flatten)]
    settings: SegmentSettings,
}

#[derive(Serialize)]
struct SegmentReport<'a> {
    iterations: usize,
    reason: &'a str,
    vessel_pixels: usize,
}

fn cmd_segment(args: &SegmentArgs) -> Result<()> {
    let resolved = args.settings.resolve()?;
    let img = load_image(&args.input, resolved.channel)?;
    let (mask, trace) = run(&img, &resolved.config)?;
    mask.save_png(&args.output)?;
    if let Some(path) = &args.trace {
        std::fs::write(path, trace.to_jsonl())?;
    }
    let report = SegmentReport {
        iterations: trace.iterations(),
        reason: trace.reason().as_str(),
        vessel_pixels: mask.count(),
    };
    println!("{}", serde_json::to_string(&report).expect("report serializes"));
    Ok(())
}

#[derive(Args)]
struct PhantomArgs {
    /// Output phantom image PNG.
    #[arg(long)]
    output: PathBuf,
    /// Output ground-truth mask PNG.
    #[arg(long)]
    truth: PathBuf,
    /// Use a named spec from the built-in suite (see --list).
    #[arg(long, conflicts_with = "tube")]
    preset: Option<String>,
    /// Tube as "row,col:row,col[:...];radius;peak[;faint]"; repeatable.
    #[arg(long)]
    tube: Vec<String>,
    #[arg(long, default_value_t = 64)]
    width: usize,
    #[arg(long, default_value_t = 64)]
    height: usize,
    /// Additive Gaussian noise standard deviation.
    #[arg(long, default_value_t = 0.05)]
    noise: f64,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    /// List the built-in preset names and exit.
    #[arg(long)]
    list: bool,
}

fn builtin_specs() -> Vec<PhantomSpec> {
    let mut specs = phantom::standard_suite();
    specs.extend(phantom::quality_clean_suite());
    specs.extend(phantom::quality_noisy_suite());
    specs
}

fn parse_tube(text: &str) -> Result<Tube> {
    let err = || Error::Parameter(format!("invalid tube spec {text:?}"));
    let mut parts = text.split(';');
    let points_part = parts.next().ok_or_else(err)?;
    let radius: f64 = parts.next().ok_or_else(err)?.trim().parse().map_err(|_| err())?;
    let peak: f64 = parts.next().ok_or_else(err)?.trim().parse().map_err(|_| err())?;
    let faint = match parts.next() {
        None => false,
        Some(flag) if flag.trim() == "faint" => true,
        Some(_) => return Err(err()),
    };
    if parts.next().is_some() {
        return Err(err());
    }
    let mut points = Vec::new();
    for pair in points_part.split(':') {
        let (row, col) = pair.split_once(',').ok_or_else(err)?;
        points.push((
            row.trim().parse().map_err(|_| err())?,
            col.trim().parse().map_err(|_| err())?,
        ));
    }
    if points.is_empty() {
        return Err(err());
    }
    Ok(Tube {
        points,
        radius,
        peak,
        faint_branch: faint,
    })
}

fn cmd_phantom(args: &PhantomArgs) -> Result<()> {
    if args.list {
        let mut names = String::new();
        for spec in builtin_specs() {
            let _ = writeln!(names, "{} ({}x{})", spec.name, spec.width, spec.height);
        }
        print!("{names}");
        return Ok(());
    }
    let spec = if let Some(name) = &args.preset {
        let base = builtin_specs()
            .into_iter()
            .find(|s| &s.name == name)
            .ok_or_else(|| Error::Parameter(format!("unknown preset {name:?}")))?;
        PhantomSpec {
            rng_seed: args.seed,
            ..base
        }
    } else {
        PhantomSpec {
            name: "custom".to_string(),
            width: args.width,
            height: args.height,
            tubes: args
                .tube
                .iter()
                .map(|t| parse_tube(t))
                .collect::<Result<Vec<_>>>()?,
            noise_sigma: args.noise,
            rng_seed: args.seed,
        }
    };
    let rendered = phantom::render(&spec)?;
    save_image(&rendered.image, &args.output)?;
    rendered.truth.save_png(&args.truth)?;
    Ok(())
}

#[derive(Args)]
struct MetricsArgs {
    /// Predicted mask PNG.
    #[arg(long)]
    pred: PathBuf,
    /// Ground-truth mask PNG.
    #[arg(long)]
    truth: PathBuf,
}

fn cmd_metrics(args: &MetricsArgs) -> Result<()> {
    let pred = BinaryMask::load(&args.pred)?;
    let truth = BinaryMask::load(&args.truth)?;
    let report = score(&pred, &truth)?;
    println!("{}", serde_json::to_string(&report).expect("report serializes"));
    Ok(())
}

#[derive(Args)]
struct CompareArgs {
    /// Image to segment with both modes.
    #[arg(long)]
    input: PathBuf,
    /// Optional ground-truth mask for Dice scoring.
    #[arg(long)]
    truth: Option<PathBuf>,
    /// Write the tfae-minus-tfa difference mask PNG.
    #[arg(long)]
    diff: Option<PathBuf>,
    #[command(flatten)]
    settings: SegmentSettings,
}

#[derive(Serialize)]
struct ModeReport {
    iterations: usize,
    reason: &'static str,
    wall_seconds: f64,
    vessel_pixels: usize,
    #[serde(skip_serializing_if = "Option::is_none")]
    dice: Option<f64>,
}

#[derive(Serialize)]
struct CompareReport {
    tfa: ModeReport,
    tfae: ModeReport,
    /// Pixels vessel under tfae but not under tfa.
    tfae_minus_tfa_pixels: usize,
}

fn mode_report(
    mask: &BinaryMask,
    trace: &IterationTrace,
    truth: Option<&BinaryMask>,
) -> Result<ModeReport> {
    let dice = match truth {
        Some(t) => Some(score(mask, t)?.dice),
        None => None,
    };
    Ok(ModeReport {
        iterations: trace.iterations(),
        reason: trace.reason().as_str(),
        wall_seconds: trace.total_wall_seconds(),
        vessel_pixels: mask.count(),
        dice,
    })
}

fn cmd_compare(args: &CompareArgs) -> Result<()> {
    let resolved = args.settings.resolve()?;
    let img = load_image(&args.input, resolved.channel)?;
    let truth = match &args.truth {
        Some(path) => Some(BinaryMask::load(path)?),
        None => None,
    };

    let tfa_cfg = SegmenterConfig {
        mode: Mode::Tfa,
        ..resolved.config.clone()
    };
    let tfae_cfg = SegmenterConfig {
        mode: Mode::Tfae,
        ..resolved.config
    };
    let (tfa_mask, tfa_trace) = run(&img, &tfa_cfg)?;
    let (tfae_mask, tfae_trace) = run(&img, &tfae_cfg)?;

    let diff = BinaryMask::from_fn(img.width(), img.height(), |row, col| {
        tfae_mask.get(row, col) && !tfa_mask.get(row, col)
    });
    if let Some(path) = &args.diff {
        diff.save_png(path)?;
    }

    let report = CompareReport {
        tfa: mode_report(&tfa_mask, &tfa_trace, truth.as_ref())?,
        tfae: mode_report(&tfae_mask, &tfae_trace, truth.as_ref())?,
        tfae_minus_tfa_pixels: diff.count(),
    };
    println!("{}", serde_json::to_string(&report).expect("report serializes"));
    Ok(())
}

fn exit_code_for(e: &Error) -> u8 {
    match e {
        Error::Parameter(_) | Error::Dimension(_) => 2,
        Error::Io(_) | Error::Format(_) | Error::Data(_) => 1,
    }
}

/// Parses arguments from the environment, dispatches, and maps errors to
/// exit codes (0 success, 1 I/O, 2 usage).
pub fn main() -> ExitCode {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("warn"))
        .format_timestamp(None)
        .init();

    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let code = match e.kind() {
                ErrorKind::DisplayHelp | ErrorKind::DisplayVersion => 0,
                _ => 2,
            };
            let _ = e.print();
            return ExitCode::from(code);
        }
    };

    let outcome = match &cli.command {
        Command::Segment(args) => cmd_segment(args),
        Command::Phantom(args) => cmd_phantom(args),
        Command::Metrics(args) => cmd_metrics(args),
        Command::Compare(args) => cmd_compare(args),
    };
    match outcome {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(exit_code_for(&e))
        }
    }
}
