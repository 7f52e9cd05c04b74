//! The `diffnms` command line.
//!
//! Flags are checked before any input is read; conflicting combinations are
//! usage errors (exit code 2), failures while working exit with code 1.

use std::fs;
use std::io::Write;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};

use super::compare::compare_variants;
use super::correlation::score_iou_correlation;
use super::oracle::{with_oracle_scores, OracleOverlap};
use super::pipeline::{par_map, run_scenes, NmsSetup};
use super::random::gradcheck_random;
use super::scene::{attach_ground_truth, read_scenes, scene_to_json_line, write_scenes, DataFormat, Scene};
use super::scores::ScoreMode;
use super::synth::{synthesize, SyntheticConfig};
use crate::autodiff::GradCheckConfig;
use crate::error::{Error, Result};
use crate::nms::{NmsConfig, NmsVariant, Pruning};
use crate::ranking::{eval_table, EvalConfig, EvalImage};

#[derive(Debug, Parser)]
#[command(name = "diffnms", version, about = "Run, compare and gradient-check differentiable NMS")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Suppress every scene and write the kept, rescored boxes.
    Run(RunArgs),
    /// Run several variants and report kept sets, agreement and AP.
    Compare(CompareArgs),
    /// Check analytic gradients against finite differences.
    Gradcheck(GradcheckArgs),
    /// AP|R40 of a detection set, per difficulty.
    Eval(EvalArgs),
    /// Generate a synthetic dataset.
    Synth(SynthArgs),
    /// Replace scores by true overlaps and compare AP with the original.
    Oracle(OracleArgs),
    /// Correlate kept scores with true 3D overlap.
    Correlate(CorrelateArgs),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum FormatArg {
    Jsonl,
    Kitti,
}

impl From<FormatArg> for DataFormat {
    fn from(f: FormatArg) -> Self {
        match f {
            FormatArg::Jsonl => DataFormat::Jsonl,
            FormatArg::Kitti => DataFormat::Kitti,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum PruningArg {
    Hard,
    Linear,
    Exp,
    Sigmoid,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum ScoreModeArg {
    Product,
    Class,
    Pred,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum OverlapArg {
    Iou2d,
    Iou3d,
}

fn parse_variant(s: &str) -> std::result::Result<NmsVariant, String> {
    NmsVariant::parse(s).ok_or_else(|| {
        let names: Vec<&str> = NmsVariant::ALL.iter().map(|v| v.name()).collect();
        format!("unknown NMS variant {s:?}; expected one of {}", names.join(", "))
    })
}

/// Maximum group size; `None` is unbounded.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct GroupCap(pub Option<usize>);

/// `none` or a positive group size.
fn parse_alpha(s: &str) -> std::result::Result<GroupCap, String> {
    if s == "none" {
        return Ok(GroupCap(None));
    }
    match s.parse::<usize>() {
        Ok(0) | Err(_) => Err(format!("expected a positive group size or `none`, got {s:?}")),
        Ok(n) => Ok(GroupCap(Some(n))),
    }
}

/// Settings shared by every command that suppresses boxes.
#[derive(Debug, Clone, Args)]
pub struct NmsArgs {
    /// Pruning function.
    #[arg(long, value_enum, default_value = "linear")]
    pub pruning: PruningArg,
    /// NMS threshold on 2D IoU.
    #[arg(long, default_value_t = 0.4)]
    pub nt: f64,
    /// Temperature of exponential (default 0.5) or sigmoidal (default 0.1) pruning.
    #[arg(long)]
    pub tau: Option<f64>,
    /// Rescores at or above this value are kept.
    #[arg(long, default_value_t = 0.3)]
    pub valid: f64,
    /// Maximum group size, or `none`.
    #[arg(long, default_value = "100", value_parser = parse_alpha)]
    pub alpha: GroupCap,
    /// How class and 3D confidences combine into the NMS score.
    #[arg(long, value_enum, default_value = "product")]
    pub score_mode: ScoreModeArg,
}

impl NmsArgs {
    pub fn config(&self) -> Result<NmsConfig> {
        let pruning = match (self.pruning, self.tau) {
            (PruningArg::Hard | PruningArg::Linear, Some(_)) => {
                return Err(Error::Usage("--tau only applies to --pruning exp or sigmoid".into()))
            }
            (PruningArg::Hard, None) => Pruning::HardThreshold,
            (PruningArg::Linear, None) => Pruning::Linear,
            (PruningArg::Exp, tau) => Pruning::Exponential {
                tau: tau.unwrap_or(Pruning::DEFAULT_EXPONENTIAL_TAU),
            },
            (PruningArg::Sigmoid, tau) => Pruning::Sigmoidal {
                tau: tau.unwrap_or(Pruning::DEFAULT_SIGMOIDAL_TAU),
            },
        };
        let cfg = NmsConfig {
            nt: self.nt,
            valid_threshold: self.valid,
            max_group_size: self.alpha.0,
            pruning,
        };
        cfg.validate().map_err(|e| Error::Usage(e.to_string()))?;
        Ok(cfg)
    }

    pub fn score_mode(&self) -> ScoreMode {
        match self.score_mode {
            ScoreModeArg::Product => ScoreMode::Product,
            ScoreModeArg::Class => ScoreMode::ClassOnly,
            ScoreModeArg::Pred => ScoreMode::PredOnly,
        }
    }

    fn setup(&self, variant: NmsVariant) -> Result<NmsSetup> {
        Ok(NmsSetup {
            variant,
            config: self.config()?,
            score_mode: self.score_mode(),
        })
    }
}

/// Where scenes come from.
#[derive(Debug, Clone, Args)]
pub struct InputArgs {
    /// JSONL file, or KITTI label directory or file.
    #[arg(long)]
    pub input: PathBuf,
    #[arg(long, value_enum, default_value = "jsonl")]
    pub format: FormatArg,
    /// Ground truths to attach by scene id, in the same format.
    #[arg(long)]
    pub gt_input: Option<PathBuf>,
}

impl InputArgs {
    fn load(&self) -> Result<Vec<Scene>> {
        let format = self.format.into();
        let mut scenes = read_scenes(&self.input, format)?;
        if let Some(gt) = &self.gt_input {
            attach_ground_truth(&mut scenes, read_scenes(gt, format)?);
        }
        Ok(scenes)
    }
}

#[derive(Debug, Clone, Args)]
pub struct RunArgs {
    #[command(flatten)]
    pub input: InputArgs,
    #[arg(long, default_value = "groomed", value_parser = parse_variant)]
    pub nms: NmsVariant,
    #[command(flatten)]
    pub nms_args: NmsArgs,
    /// Output file (JSONL) or directory (KITTI); JSONL goes to stdout when absent.
    #[arg(long)]
    pub out: Option<PathBuf>,
}

#[derive(Debug, Clone, Args)]
pub struct CompareArgs {
    #[command(flatten)]
    pub input: InputArgs,
    /// Comma-separated variants.
    #[arg(long, value_delimiter = ',', value_parser = parse_variant,
          default_value = "classical,soft,groomed,full-inverse,grouped-inverse")]
    pub nms: Vec<NmsVariant>,
    #[command(flatten)]
    pub nms_args: NmsArgs,
    /// Evaluator settings (TOML).
    #[arg(long)]
    pub eval_config: Option<PathBuf>,
    /// Add wall-clock time per scene; makes the report nondeterministic.
    #[arg(long)]
    pub timing: bool,
    /// CSV report path.
    #[arg(long)]
    pub out: Option<PathBuf>,
}

#[derive(Debug, Clone, Args)]
pub struct GradcheckArgs {
    #[command(flatten)]
    pub nms_args: NmsArgs,
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
    #[arg(long, default_value_t = 100)]
    pub instances: usize,
    #[arg(long, default_value_t = 30)]
    pub max_boxes: usize,
    #[arg(long, default_value_t = 1e-6)]
    pub eps: f64,
    #[arg(long, default_value_t = 1e-4)]
    pub tolerance: f64,
}

#[derive(Debug, Clone, Args)]
pub struct EvalArgs {
    #[command(flatten)]
    pub input: InputArgs,
    /// Evaluator settings (TOML).
    #[arg(long)]
    pub eval_config: Option<PathBuf>,
    /// CSV output path.
    #[arg(long)]
    pub out: Option<PathBuf>,
}

#[derive(Debug, Clone, Args)]
pub struct SynthArgs {
    /// Base settings (TOML); the flags below override it.
    #[arg(long)]
    pub config: Option<PathBuf>,
    #[arg(long)]
    pub seed: Option<u64>,
    #[arg(long)]
    pub scenes: Option<usize>,
    #[arg(long)]
    pub objects: Option<usize>,
    #[arg(long)]
    pub proposals: Option<usize>,
    #[arg(long)]
    pub center_jitter: Option<f64>,
    #[arg(long)]
    pub size_jitter: Option<f64>,
    #[arg(long)]
    pub yaw_jitter: Option<f64>,
    #[arg(long)]
    pub score_noise: Option<f64>,
    /// Make each object's first proposal an exact copy.
    #[arg(long)]
    pub exact_proposal: bool,
    #[arg(long, value_enum, default_value = "jsonl")]
    pub format: FormatArg,
    /// Output file (JSONL) or directory (KITTI); JSONL goes to stdout when absent.
    #[arg(long)]
    pub out: Option<PathBuf>,
}

#[derive(Debug, Clone, Args)]
pub struct OracleArgs {
    #[command(flatten)]
    pub input: InputArgs,
    #[arg(long, value_enum, default_value = "iou3d")]
    pub overlap: OverlapArg,
    #[arg(long, default_value = "classical", value_parser = parse_variant)]
    pub nms: NmsVariant,
    #[command(flatten)]
    pub nms_args: NmsArgs,
    #[arg(long)]
    pub eval_config: Option<PathBuf>,
    /// Where to write the oracle-scored, suppressed scenes.
    #[arg(long)]
    pub out: Option<PathBuf>,
}

#[derive(Debug, Clone, Args)]
pub struct CorrelateArgs {
    #[command(flatten)]
    pub input: InputArgs,
    #[arg(long, default_value = "groomed", value_parser = parse_variant)]
    pub nms: NmsVariant,
    #[command(flatten)]
    pub nms_args: NmsArgs,
    /// Scatter CSV path.
    #[arg(long)]
    pub out: Option<PathBuf>,
}

fn load_eval_config(path: Option<&Path>) -> Result<EvalConfig> {
    match path {
        None => Ok(EvalConfig::default()),
        Some(p) => {
            let text = fs::read_to_string(p).map_err(|e| Error::from(e).in_file(p))?;
            EvalConfig::from_toml(&text).map_err(|e| Error::InvalidConfig(e.to_string()).in_file(p))
        }
    }
}

fn synth_config(a: &SynthArgs) -> Result<SyntheticConfig> {
    let mut cfg = match &a.config {
        None => SyntheticConfig::default(),
        Some(p) => {
            let text = fs::read_to_string(p).map_err(|e| Error::from(e).in_file(p))?;
            toml::from_str(&text).map_err(|e| Error::InvalidConfig(e.to_string()).in_file(p))?
        }
    };
    let overrides = [
        (a.center_jitter, &mut cfg.center_jitter),
        (a.size_jitter, &mut cfg.size_jitter),
        (a.yaw_jitter, &mut cfg.yaw_jitter),
        (a.score_noise, &mut cfg.score_noise),
    ];
    for (value, slot) in overrides {
        if let Some(v) = value {
            if !(v >= 0.0 && v.is_finite()) {
                return Err(Error::Usage(format!("jitter and noise must be non-negative, got {v}")));
            }
            *slot = v;
        }
    }
    cfg.seed = a.seed.unwrap_or(cfg.seed);
    cfg.scenes = a.scenes.unwrap_or(cfg.scenes);
    cfg.objects = a.objects.unwrap_or(cfg.objects);
    cfg.proposals_per_object = a.proposals.unwrap_or(cfg.proposals_per_object);
    cfg.exact_proposal |= a.exact_proposal;
    Ok(cfg)
}

fn emit_scenes(out: Option<&Path>, format: FormatArg, scenes: &[Scene], stdout: &mut dyn Write) -> Result<()> {
    match (out, format) {
        (Some(path), f) => write_scenes(path, f.into(), scenes),
        (None, FormatArg::Jsonl) => {
            for s in scenes {
                writeln!(stdout, "{}", scene_to_json_line(s))?;
            }
            Ok(())
        }
        (None, FormatArg::Kitti) => Err(Error::Usage("KITTI output needs --out <directory>".into())),
    }
}

fn ap_cell(ap: Option<f64>) -> String {
    ap.map(|v| format!("{v:.2}")).unwrap_or_else(|| "-".into())
}

fn eval_scenes(scenes: &[Scene], cfg: &EvalConfig) -> Vec<(String, Option<f64>)> {
    let images: Vec<EvalImage<'_>> = scenes
        .iter()
        .map(|s| EvalImage { detections: &s.boxes, gts: &s.gts })
        .collect();
    eval_table(&images, cfg)
}

/// Checks flag combinations without touching any input.
fn check_usage(cmd: &Command) -> Result<()> {
    match cmd {
        Command::Run(a) => {
            a.nms_args.config()?;
            if a.input.format == FormatArg::Kitti && a.out.is_none() {
                return Err(Error::Usage("KITTI output needs --out <directory>".into()));
            }
        }
        Command::Compare(a) => {
            a.nms_args.config()?;
            if a.nms.is_empty() {
                return Err(Error::Usage("--nms needs at least one variant".into()));
            }
        }
        Command::Gradcheck(a) => {
            if a.nms_args.pruning == PruningArg::Hard {
                return Err(Error::Usage(
                    "gradcheck needs a differentiable pruning; --pruning hard has no useful gradient".into(),
                ));
            }
            a.nms_args.config()?;
            if !(a.eps > 0.0) || !(a.tolerance > 0.0) {
                return Err(Error::Usage("--eps and --tolerance must be positive".into()));
            }
            if a.instances == 0 {
                return Err(Error::Usage("--instances must be positive".into()));
            }
        }
        Command::Eval(_) => {}
        Command::Synth(a) => {
            if a.format == FormatArg::Kitti && a.out.is_none() {
                return Err(Error::Usage("KITTI output needs --out <directory>".into()));
            }
        }
        Command::Oracle(a) => {
            a.nms_args.config()?;
        }
        Command::Correlate(a) => {
            a.nms_args.config()?;
        }
    }
    Ok(())
}

/// Runs one command, writing human-readable output to `stdout`. Returns
/// whether the command's own check passed (only gradcheck can fail one).
pub fn execute(cmd: &Command, stdout: &mut dyn Write) -> Result<bool> {
    check_usage(cmd)?;
    match cmd {
        Command::Run(a) => {
            let scenes = a.input.load()?;
            let out = run_scenes(&scenes, &a.nms_args.setup(a.nms)?)?;
            emit_scenes(a.out.as_deref(), a.input.format, &out, stdout)?;
        }
        Command::Compare(a) => {
            let eval = load_eval_config(a.eval_config.as_deref())?;
            let scenes = a.input.load()?;
            let base = a.nms_args.setup(NmsVariant::Groomed)?;
            let report = compare_variants(&scenes, &a.nms, &base, &eval, a.timing)?;
            write!(stdout, "{}", report.to_table())?;
            if a.nms.len() > 1 {
                writeln!(stdout, "\nkept-set agreement (Jaccard)")?;
                for (k, v) in a.nms.iter().enumerate() {
                    write!(stdout, "{:<16}", v.name())?;
                    for j in &report.jaccard[k] {
                        write!(stdout, " {j:>6.4}")?;
                    }
                    writeln!(stdout)?;
                }
            }
            if let Some(path) = &a.out {
                let file = fs::File::create(path).map_err(|e| Error::from(e).in_file(path))?;
                report.write_csv(file).map_err(|e| e.in_file(path))?;
            }
        }
        Command::Gradcheck(a) => {
            let cfg = a.nms_args.config()?;
            let check = GradCheckConfig {
                eps: a.eps,
                tolerance: a.tolerance,
                ..GradCheckConfig::default()
            };
            let report = gradcheck_random(&cfg, &check, a.seed, a.instances, a.max_boxes)?
                .expect("at least one instance");
            writeln!(stdout, "instances        {}", a.instances)?;
            writeln!(stdout, "checked          {}", report.checked)?;
            writeln!(stdout, "skipped (kinks)  {}", report.skipped)?;
            writeln!(stdout, "max rel error    {:e}", report.max_rel_error)?;
            writeln!(stdout, "tolerance        {:e}", report.tolerance)?;
            writeln!(stdout, "result           {}", if report.passed { "PASS" } else { "FAIL" })?;
            return Ok(report.passed);
        }
        Command::Eval(a) => {
            let eval = load_eval_config(a.eval_config.as_deref())?;
            let scenes = a.input.load()?;
            let table = eval_scenes(&scenes, &eval);
            writeln!(stdout, "AP|R40 @ IoU3D {}", eval.iou3d_threshold)?;
            for (name, ap) in &table {
                writeln!(stdout, "{name:<10} {:>8}", ap_cell(*ap))?;
            }
            if let Some(path) = &a.out {
                let mut w = csv::Writer::from_path(path).map_err(|e| Error::from(e).in_file(path))?;
                w.write_record(["difficulty", "ap_r40"])?;
                for (name, ap) in &table {
                    w.write_record([name.clone(), ap.map(|v| v.to_string()).unwrap_or_default()])?;
                }
                w.flush()?;
            }
        }
        Command::Synth(a) => {
            let scenes = synthesize(&synth_config(a)?)?;
            emit_scenes(a.out.as_deref(), a.format, &scenes, stdout)?;
        }
        Command::Oracle(a) => {
            let eval = load_eval_config(a.eval_config.as_deref())?;
            let scenes = a.input.load()?;
            let setup = a.nms_args.setup(a.nms)?;
            let kind = match a.overlap {
                OverlapArg::Iou2d => OracleOverlap::Iou2d,
                OverlapArg::Iou3d => OracleOverlap::Iou3d,
            };
            let oracle: Vec<Scene> = par_map(&scenes, |s| Ok(with_oracle_scores(s, kind)))?;
            let base = eval_scenes(&run_scenes(&scenes, &setup)?, &eval);
            let kept = run_scenes(&oracle, &setup)?;
            let with_oracle = eval_scenes(&kept, &eval);
            writeln!(stdout, "{:<10} {:>8} {:>8}", "AP|R40", "scores", "oracle")?;
            for ((name, b), (_, o)) in base.iter().zip(&with_oracle) {
                writeln!(stdout, "{name:<10} {:>8} {:>8}", ap_cell(*b), ap_cell(*o))?;
            }
            if let Some(path) = &a.out {
                write_scenes(path, a.input.format.into(), &kept)?;
            }
        }
        Command::Correlate(a) => {
            let scenes = a.input.load()?;
            let report = score_iou_correlation(&scenes, &a.nms_args.setup(a.nms)?)?;
            let show = |r: Option<f64>| r.map(|v| format!("{v:.4}")).unwrap_or_else(|| "undefined".into());
            writeln!(stdout, "kept boxes                {}", report.points.len())?;
            writeln!(stdout, "pearson (rotated)         {}", show(report.pearson))?;
            writeln!(stdout, "pearson (axis-aligned)    {}", show(report.pearson_axis_aligned))?;
            if let Some(path) = &a.out {
                let file = fs::File::create(path).map_err(|e| Error::from(e).in_file(path))?;
                report.write_csv(file).map_err(|e| e.in_file(path))?;
            }
        }
    }
    Ok(true)
}

/// Entry point of the binary.
pub fn main() -> ExitCode {
    let cli = Cli::parse();
    let mut stdout = std::io::stdout().lock();
    match execute(&cli.command, &mut stdout) {
        Ok(true) => ExitCode::SUCCESS,
        Ok(false) => ExitCode::FAILURE,
        Err(e @ Error::Usage(_)) => {
            eprintln!("error: {e}");
            ExitCode::from(2)
        }
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::FAILURE
        }
    }
}
