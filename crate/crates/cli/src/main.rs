//! `dlo`: dataset generation, detector evaluation, episodes and rendering.
//!
//! Exit codes: 0 success, 1 episode failure, 2 usage or config error,
//! 3 I/O error.

use std::fs;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};
use dlo_core::dataset::{generate_dataset, load_split, GenConfig, LabeledSample, Split};
use dlo_core::metrics::{chamfer, iou, l1_pixel, pixel_points, MetricReport, ReportTable};
use dlo_core::par::{map_slice, with_jobs, ExecMode};
use dlo_core::pbm::read_pbm;
use dlo_core::perception::{
    evaluate_detector, finetune_keypoints, reconstruct_from_keypoints, DetectorKind, GeometricDetector,
    KeypointDetector,
};
use dlo_core::planner::{run_episode, EpisodeLog};
use dlo_core::render::{render_svg, Overlay};
use dlo_core::scenario::{Scenario, ScenarioFile, FAMILIES};
use dlo_core::Error;

#[derive(Parser)]
#[command(
    name = "dlo",
    version,
    about = "Keypoint-based shaping of deformable linear objects around contacts"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Args, Clone)]
struct Common {
    /// Worker threads; 0 uses every core, 1 runs sequentially.
    #[arg(long, default_value_t = 0)]
    jobs: usize,
}

#[derive(Args, Clone)]
struct Overrides {
    /// Override the scenario seed.
    #[arg(long)]
    seed: Option<u64>,
    /// Override the primitive execution budget.
    #[arg(long)]
    max_steps: Option<usize>,
    /// Override the success IoU threshold.
    #[arg(long)]
    iou_threshold: Option<f64>,
}

#[derive(Subcommand)]
enum Command {
    /// Generate a synthetic keypoint dataset.
    GenDataset {
        /// Generation config (TOML); defaults when omitted.
        #[arg(long)]
        config: Option<PathBuf>,
        #[arg(long, env = "DLO_OUT_DIR", default_value = "out")]
        out: PathBuf,
        #[arg(long)]
        seed: Option<u64>,
        #[arg(long)]
        samples: Option<usize>,
        #[command(flatten)]
        common: Common,
    },
    /// Detect keypoints in a PBM image and print them as `u v` lines.
    Detect {
        #[arg(long)]
        image: PathBuf,
        #[arg(long, default_value_t = 16)]
        m: usize,
        #[arg(long)]
        finetune: bool,
    },
    /// Corner and keypoint error statistics of the geometric detector.
    EvalDetector {
        #[arg(long)]
        dataset: PathBuf,
        #[arg(long, default_value = "test")]
        split: String,
        /// Report only the finetuned detector.
        #[arg(long)]
        finetune: bool,
        /// Pass the labels through instead of detecting.
        #[arg(long)]
        oracle: bool,
        #[command(flatten)]
        common: Common,
    },
    /// Run one scenario, writing `episode.jsonl` and per-step SVG frames.
    RunEpisode {
        /// Scenario file, or the name of a bundled family.
        #[arg(long)]
        config: String,
        #[arg(long, env = "DLO_OUT_DIR", default_value = "out")]
        out: PathBuf,
        #[command(flatten)]
        overrides: Overrides,
    },
    /// Render a scenario state to SVG: the initial world, or the world before
    /// step `--step` of its (deterministic) episode.
    Render {
        #[arg(long)]
        config: String,
        #[arg(long)]
        step: Option<usize>,
        /// Output file; stdout when omitted.
        #[arg(long)]
        out: Option<PathBuf>,
        #[command(flatten)]
        overrides: Overrides,
    },
    /// Image metrics.
    Eval {
        #[command(subcommand)]
        what: EvalCommand,
    },
    /// Run several placements of scenario families and report success rates.
    Batch {
        /// Family names or scenario files; every bundled family when empty.
        configs: Vec<String>,
        /// Placements per entry, with seeds counting up from the base seed.
        #[arg(long, default_value_t = 10)]
        count: usize,
        #[arg(long, env = "DLO_OUT_DIR")]
        out: Option<PathBuf>,
        #[command(flatten)]
        overrides: Overrides,
        #[command(flatten)]
        common: Common,
    },
}

#[derive(Subcommand)]
enum EvalCommand {
    /// IoU, L1 and pixel Chamfer between two PBM images.
    Images { a: PathBuf, b: PathBuf },
    /// Reconstruct every sample of a split from its labels and compare with
    /// the source image.
    Reconstruction {
        #[arg(long)]
        dataset: PathBuf,
        #[arg(long, default_value = "test")]
        split: String,
        #[command(flatten)]
        common: Common,
    },
}

struct Failure {
    code: u8,
    message: String,
}

impl From<Error> for Failure {
    fn from(e: Error) -> Self {
        let code = match e {
            Error::Io { .. } | Error::Format { .. } => 3,
            Error::Config(_) | Error::Parameter(_) | Error::InfeasibleGoal { .. } => 2,
            _ => 1,
        };
        Failure {
            code,
            message: e.to_string(),
        }
    }
}

fn usage(message: impl Into<String>) -> Failure {
    Failure {
        code: 2,
        message: message.into(),
    }
}

fn io(path: &Path, e: std::io::Error) -> Failure {
    Failure {
        code: 3,
        message: format!("{}: {e}", path.display()),
    }
}

type Outcome = Result<u8, Failure>;

fn mode(common: &Common) -> ExecMode {
    if common.jobs == 1 {
        ExecMode::Sequential
    } else {
        ExecMode::Parallel
    }
}

fn split(name: &str) -> Result<Split, Failure> {
    match name {
        "train" => Ok(Split::Train),
        "test" => Ok(Split::Test),
        other => Err(usage(format!("unknown split {other:?}, expected train or test"))),
    }
}

fn load_scenarios(config: &str, count: usize, ov: &Overrides) -> Result<Vec<Scenario>, Failure> {
    let path = Path::new(config);
    let (file, base) = match dlo_core::scenario::family(config) {
        Some(file) if !path.exists() => (file, Path::new(".")),
        _ => (ScenarioFile::read(path)?, path.parent().unwrap_or(Path::new("."))),
    };
    let seed = ov.seed.unwrap_or(file.seed);
    let mut list = (0..count as u64)
        .map(|i| file.build_with_seed(base, seed + i))
        .collect::<dlo_core::Result<Vec<_>>>()?;
    for s in &mut list {
        if let Some(h) = ov.max_steps {
            s.planner.max_steps = h;
        }
        if let Some(t) = ov.iou_threshold {
            s.planner.iou_threshold = t;
        }
    }
    Ok(list)
}

fn frames(log: &EpisodeLog, s: &Scenario) -> Vec<String> {
    let goal = s.goal.curve.as_ref().map(|c| c.points().to_vec());
    log.frames
        .iter()
        .enumerate()
        .map(|(i, f)| {
            let title = format!("{} seed {} step {i}", s.name, s.seed);
            let overlay = Overlay {
                goal_curve: goal.as_deref(),
                keypoints: (!f.keypoints.is_empty()).then_some(f.keypoints.as_slice()),
                goal_keypoints: Some(&log.goal_keypoints),
                benchmarks: log.benchmarks.as_ref(),
                plan: f.plan.as_ref().map(|p| &p.plan),
                title: Some(&title),
            };
            render_svg(&f.world, s.observation.roi(), &overlay)
        })
        .collect()
}

fn write_episode(dir: &Path, log: &EpisodeLog, s: &Scenario) -> Result<(), Failure> {
    fs::create_dir_all(dir).map_err(|e| io(dir, e))?;
    let path = dir.join("episode.jsonl");
    fs::write(&path, log.to_jsonl()).map_err(|e| io(&path, e))?;
    for (i, svg) in frames(log, s).iter().enumerate() {
        let path = dir.join(format!("step_{i:03}.svg"));
        fs::write(&path, svg).map_err(|e| io(&path, e))?;
    }
    Ok(())
}

fn summary(log: &EpisodeLog) -> String {
    format!(
        "{} seed {}: {} after {} steps, IoU {:.3} -> {:.3}, shape error {:.2} -> {:.2} px{}",
        log.scenario,
        log.seed,
        if log.success { "success" } else { "failure" },
        log.steps.len(),
        log.iou_start,
        log.iou_final,
        log.delta_p_start,
        log.delta_p_final,
        log.failure.as_ref().map(|f| format!(" ({f})")).unwrap_or_default()
    )
}

fn gen_dataset(
    config: Option<PathBuf>,
    out: PathBuf,
    seed: Option<u64>,
    samples: Option<usize>,
    common: Common,
) -> Outcome {
    let mut cfg = match config {
        Some(path) => {
            let text = fs::read_to_string(&path).map_err(|e| io(&path, e))?;
            GenConfig::from_toml(&text)?
        }
        None => GenConfig::default(),
    };
    if let Some(s) = seed {
        cfg.seed = s;
    }
    if let Some(n) = samples {
        cfg.samples = n;
    }
    let summary = with_jobs(common.jobs, || generate_dataset(&cfg, &out, mode(&common)))?;
    if summary.skipped {
        println!("{}: identical, skipped", out.display());
    }
    println!(
        "{} samples: {} train, {} test",
        cfg.samples, summary.train, summary.test
    );
    Ok(0)
}

fn detect(image: PathBuf, m: usize, finetune: bool) -> Outcome {
    let img = read_pbm(&image)?;
    let mut kps = GeometricDetector.detect(&img, m)?;
    if finetune {
        kps = finetune_keypoints(&kps, &img)?;
    }
    for p in kps.points() {
        println!("{:.3} {:.3}", p.x, p.y);
    }
    Ok(0)
}

fn eval_detector(dataset: PathBuf, split_name: String, finetune: bool, oracle: bool, common: Common) -> Outcome {
    let samples = load_split(&dataset, split(&split_name)?)?;
    let kind = if oracle {
        DetectorKind::Oracle
    } else {
        DetectorKind::Geometric
    };
    let variants: &[bool] = if finetune { &[true] } else { &[false, true] };
    let reports: Vec<_> = with_jobs(common.jobs, || {
        variants
            .iter()
            .map(|&f| evaluate_detector(&samples, kind, f, mode(&common)))
            .collect()
    });
    for r in &reports {
        println!("{r}");
    }
    for r in &reports {
        println!("{}", r.record());
    }
    Ok(0)
}

fn print_reports(reports: &[MetricReport]) {
    print!("{}", ReportTable(reports));
    for r in reports {
        println!("{}", r.record());
    }
}

fn eval(what: EvalCommand) -> Outcome {
    match what {
        EvalCommand::Images { a, b } => {
            let (ia, ib) = (read_pbm(&a)?, read_pbm(&b)?);
            let mut reports = vec![MetricReport::single("iou", iou(&ia, &ib)?)];
            if ia.is_empty() && ib.is_empty() {
                reports[0] = reports[0].clone().with_flag("empty-union");
            }
            reports.push(MetricReport::single("l1", l1_pixel(&ia, &ib)?));
            if let Ok(c) = chamfer(&pixel_points(&ia), &pixel_points(&ib)) {
                reports.push(MetricReport::single("chamfer", c));
            }
            print_reports(&reports);
        }
        EvalCommand::Reconstruction {
            dataset,
            split: name,
            common,
        } => {
            let samples = load_split(&dataset, split(&name)?)?;
            let scores = with_jobs(common.jobs, || {
                map_slice(mode(&common), &samples, |s: &LabeledSample| {
                    let (w, h) = s.image.dims();
                    let r = reconstruct_from_keypoints(&s.keypoints, s.meta.half_thickness as f64, w, h)?;
                    Ok::<_, Error>((iou(&r, &s.image)?, l1_pixel(&r, &s.image)?))
                })
            })
            .into_iter()
            .collect::<dlo_core::Result<Vec<_>>>()?;
            let ious: Vec<f64> = scores.iter().map(|s| s.0).collect();
            let l1s: Vec<f64> = scores.iter().map(|s| s.1).collect();
            print_reports(&[
                MetricReport::from_samples("iou", &ious),
                MetricReport::from_samples("l1", &l1s),
            ]);
        }
    }
    Ok(0)
}

fn run_one(config: String, out: PathBuf, overrides: Overrides) -> Outcome {
    let s = load_scenarios(&config, 1, &overrides)?.remove(0);
    let log = run_episode(&s, &s.planner)?;
    write_episode(&out, &log, &s)?;
    println!("{}", summary(&log));
    Ok(if log.success { 0 } else { 1 })
}

fn render(config: String, step: Option<usize>, out: Option<PathBuf>, overrides: Overrides) -> Outcome {
    let s = load_scenarios(&config, 1, &overrides)?.remove(0);
    let svg = match step {
        None => render_svg(
            &s.world,
            s.observation.roi(),
            &Overlay {
                goal_curve: s.goal.curve.as_ref().map(|c| c.points()),
                ..Overlay::default()
            },
        ),
        Some(i) => {
            let log = run_episode(&s, &s.planner)?;
            let mut all = frames(&log, &s);
            if i >= all.len() {
                return Err(usage(format!(
                    "step {i} out of range, the episode has frames 0..{}",
                    all.len() - 1
                )));
            }
            all.swap_remove(i)
        }
    };
    match out {
        Some(path) => fs::write(&path, svg).map_err(|e| io(&path, e))?,
        None => print!("{svg}"),
    }
    Ok(0)
}

fn batch(configs: Vec<String>, count: usize, out: Option<PathBuf>, overrides: Overrides, common: Common) -> Outcome {
    let configs = if configs.is_empty() {
        FAMILIES.iter().map(|f| f.to_string()).collect()
    } else {
        configs
    };
    let mut list = Vec::new();
    for c in &configs {
        list.extend(load_scenarios(c, count, &overrides)?);
    }
    let logs = with_jobs(common.jobs, || {
        map_slice(mode(&common), &list, |s| run_episode(s, &s.planner))
    });
    let mut ok = 0;
    for (s, log) in list.iter().zip(&logs) {
        match log {
            Ok(log) => {
                ok += log.success as usize;
                println!("{}", summary(log));
                if let Some(dir) = &out {
                    write_episode(&dir.join(format!("{}_{}", s.name, s.seed)), log, s)?;
                }
            }
            Err(e) => println!("{} seed {}: error ({e})", s.name, s.seed),
        }
    }
    println!(
        "success {ok}/{} ({:.1}%)",
        list.len(),
        100.0 * ok as f64 / list.len().max(1) as f64
    );
    Ok(if ok == list.len() { 0 } else { 1 })
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let outcome = match cli.command {
        Command::GenDataset {
            config,
            out,
            seed,
            samples,
            common,
        } => gen_dataset(config, out, seed, samples, common),
        Command::Detect { image, m, finetune } => detect(image, m, finetune),
        Command::EvalDetector {
            dataset,
            split,
            finetune,
            oracle,
            common,
        } => eval_detector(dataset, split, finetune, oracle, common),
        Command::RunEpisode { config, out, overrides } => run_one(config, out, overrides),
        Command::Render {
            config,
            step,
            out,
            overrides,
        } => render(config, step, out, overrides),
        Command::Eval { what } => eval(what),
        Command::Batch {
            configs,
            count,
            out,
            overrides,
            common,
        } => batch(configs, count, out, overrides, common),
    };
    match outcome {
        Ok(code) => ExitCode::from(code),
        Err(f) => {
            eprintln!("dlo: {}", f.message);
            ExitCode::from(f.code)
        }
    }
}
