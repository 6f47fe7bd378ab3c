use std::fs;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};
use scanfield::entropy::EntropyMode;
use scanfield::error::{EpisodeError, PlanError, SceneError};
use scanfield::harness::{
    self, ComparisonMatrix, EpisodeConfig, EpisodeResult, PlannerMode, SceneSource, Termination,
};
use scanfield::scene::{self, GenParams};

#[derive(Parser)]
#[command(
    name = "scanfield",
    version,
    about = "Entropy-driven active scene exploration simulator"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Run one exploration episode.
    Run(RunArgs),
    /// Run a matrix of variants, scenes and seeds.
    Compare {
        /// Comparison matrix JSON.
        #[arg(long)]
        matrix: PathBuf,
        #[arg(long)]
        out: PathBuf,
    },
    /// Generate a procedural scene and write it as JSON.
    GenScene {
        #[command(flatten)]
        gen: GenArgs,
        /// Output file; stdout when omitted.
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Replay a recorded episode up to a move and export its view field.
    ExportField {
        /// Directory written by `run`.
        #[arg(long)]
        episode: PathBuf,
        /// Number of moves to replay.
        #[arg(long)]
        step: usize,
        /// Output directory; defaults to `<episode>/field_step_<step>`.
        #[arg(long)]
        out: Option<PathBuf>,
    },
}

#[derive(Args)]
struct GenArgs {
    #[arg(long, default_value_t = 2)]
    rooms: usize,
    /// Fraction of floor area covered by furniture.
    #[arg(long, default_value_t = 0.15)]
    density: f64,
    #[arg(long, default_value_t = 8.0)]
    width: f64,
    #[arg(long, default_value_t = 5.0)]
    depth: f64,
    /// Voxel size in meters.
    #[arg(long, default_value_t = 0.1)]
    resolution: f64,
    /// Layout seed; defaults to the episode seed for `run`.
    #[arg(long)]
    scene_seed: Option<u64>,
}

impl GenArgs {
    fn params(&self, fallback_seed: u64) -> GenParams {
        GenParams::new(
            self.rooms,
            self.density,
            [self.width, self.depth],
            self.scene_seed.unwrap_or(fallback_seed),
        )
        .with_resolution(self.resolution)
    }
}

#[derive(Clone, Copy, ValueEnum)]
enum PlannerArg {
    Field,
    Dijkstra,
}

#[derive(Clone, Copy, ValueEnum)]
enum EntropyArg {
    Combined,
    Geometry,
    Semantic,
}

#[derive(Args)]
struct RunArgs {
    /// Scene JSON file.
    #[arg(long, conflicts_with = "gen")]
    scene: Option<PathBuf>,
    /// Generate the scene procedurally.
    #[arg(long)]
    gen: bool,
    #[command(flatten)]
    gen_args: GenArgs,
    /// Full episode config JSON; flags below override its fields.
    #[arg(long)]
    config: Option<PathBuf>,
    #[arg(long)]
    seed: Option<u64>,
    #[arg(long, value_enum)]
    planner: Option<PlannerArg>,
    #[arg(long, value_enum)]
    entropy: Option<EntropyArg>,
    /// Maximum number of lattice moves.
    #[arg(long)]
    budget: Option<usize>,
    /// Stop once this fraction of object voxels is correctly labeled.
    #[arg(long)]
    stop_fraction: Option<f64>,
    #[arg(long)]
    out: PathBuf,
}

/// Failure carrying its process exit code.
struct Failure {
    code: u8,
    message: String,
}

impl Failure {
    fn config(message: impl Into<String>) -> Self {
        Self {
            code: 2,
            message: message.into(),
        }
    }

    fn io(path: &Path, e: impl std::fmt::Display) -> Self {
        Self {
            code: 1,
            message: format!("{}: {e}", path.display()),
        }
    }
}

impl From<EpisodeError> for Failure {
    fn from(e: EpisodeError) -> Self {
        let code = match &e {
            EpisodeError::Config(_) | EpisodeError::Field(_) => 2,
            EpisodeError::Scene(_) | EpisodeError::Sensor(_) => 3,
            EpisodeError::Plan(PlanError::NoPath { .. } | PlanError::UnsafeEndpoint { .. }) => 4,
            EpisodeError::Plan(_) => 1,
            EpisodeError::Io(_) | EpisodeError::Json(_) | EpisodeError::Csv(_) => 1,
        };
        Self {
            code,
            message: e.to_string(),
        }
    }
}

impl From<SceneError> for Failure {
    fn from(e: SceneError) -> Self {
        EpisodeError::from(e).into()
    }
}

fn main() -> ExitCode {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("warn")).init();
    let cli = Cli::parse();
    let outcome = match cli.command {
        Command::Run(args) => run(args),
        Command::Compare { matrix, out } => compare(&matrix, &out),
        Command::GenScene { gen, out } => gen_scene(&gen, out.as_deref()),
        Command::ExportField { episode, step, out } => export_field(&episode, step, out),
    };
    match outcome {
        Ok(()) => ExitCode::SUCCESS,
        Err(f) => {
            eprintln!("error: {}", f.message);
            ExitCode::from(f.code)
        }
    }
}

fn read_json<T: serde::de::DeserializeOwned>(path: &Path) -> Result<T, Failure> {
    let text = fs::read_to_string(path).map_err(|e| Failure::io(path, e))?;
    serde_json::from_str(&text).map_err(|e| Failure::config(format!("{}: {e}", path.display())))
}

fn write_file(path: &Path, contents: &str) -> Result<(), Failure> {
    fs::write(path, contents).map_err(|e| Failure::io(path, e))
}

fn episode_config(args: &RunArgs) -> Result<EpisodeConfig, Failure> {
    let seed = args.seed;
    let mut cfg = match &args.config {
        Some(p) => read_json::<EpisodeConfig>(p)?,
        None => {
            let scene = match (&args.scene, args.gen) {
                (Some(p), _) => SceneSource::Path(p.clone()),
                (None, true) => SceneSource::Generate(args.gen_args.params(seed.unwrap_or(0))),
                (None, false) => {
                    return Err(Failure::config(
                        "one of --scene, --gen or --config is required",
                    ))
                }
            };
            EpisodeConfig::new(scene, seed.unwrap_or(0))
        }
    };
    if args.config.is_some() {
        if let Some(p) = &args.scene {
            cfg.scene = SceneSource::Path(p.clone());
        } else if args.gen {
            cfg.scene = SceneSource::Generate(args.gen_args.params(seed.unwrap_or(cfg.seed)));
        }
    }
    if let Some(s) = seed {
        cfg.seed = s;
    }
    if let Some(p) = args.planner {
        cfg.planner = match p {
            PlannerArg::Field => PlannerMode::Field,
            PlannerArg::Dijkstra => PlannerMode::Dijkstra,
        };
    }
    if let Some(e) = args.entropy {
        cfg.entropy = match e {
            EntropyArg::Combined => EntropyMode::Combined,
            EntropyArg::Geometry => EntropyMode::Geometry,
            EntropyArg::Semantic => EntropyMode::Semantic,
        };
    }
    if let Some(b) = args.budget {
        cfg.step_budget = b;
    }
    if args.stop_fraction.is_some() {
        cfg.stop_at_fraction = args.stop_fraction;
    }
    cfg.validate()?;
    Ok(cfg)
}

fn run(args: RunArgs) -> Result<(), Failure> {
    let cfg = episode_config(&args)?;
    let out = &args.out;
    fs::create_dir_all(out).map_err(|e| Failure::io(out, e))?;
    let config_json =
        serde_json::to_string_pretty(&cfg).map_err(|e| Failure::config(e.to_string()))?;
    write_file(&out.join("config.json"), &config_json)?;

    let result = harness::run_episode(&cfg)?;
    write_episode(out, &result)?;
    let last = result
        .timeline
        .last()
        .expect("episodes record an initial row");
    println!(
        "{:?} after {} moves: distance {:.1} m, sim time {:.1} s, {} of {} object voxels correct",
        result.termination,
        last.step,
        last.distance,
        last.sim_time,
        last.correctly_labeled_voxels,
        result.object_voxels
    );
    if result.termination == Termination::NoReachableView {
        return Err(Failure {
            code: 4,
            message: "no remaining view is reachable; outputs were written".into(),
        });
    }
    Ok(())
}

fn write_episode(out: &Path, result: &EpisodeResult) -> Result<(), Failure> {
    write_file(&out.join("metrics.csv"), &result.timeline.to_csv_string())?;
    let plans = out.join("plans");
    fs::create_dir_all(&plans).map_err(|e| Failure::io(&plans, e))?;
    for (k, plan) in result.plans.iter().enumerate() {
        write_file(
            &plans.join(format!("plan_{:04}.json", k + 1)),
            &plan.to_json(),
        )?;
    }
    let snapshot = serde_json::to_string(&result.map.snapshot())
        .map_err(|e| Failure::config(e.to_string()))?;
    write_file(&out.join("map_final.json"), &snapshot)?;
    let mut layers = Vec::new();
    result
        .entropy
        .write_layers_csv(&result.map, &mut layers)
        .map_err(|e| Failure::io(&out.join("entropy_final.csv"), e))?;
    fs::write(out.join("entropy_final.csv"), layers).map_err(|e| Failure::io(out, e))?;
    let summary = serde_json::json!({
        "termination": result.termination,
        "moves": result.timeline.last().map(|r| r.step),
        "cycles": result.plans.len(),
        "object_voxels": result.object_voxels,
        "object_count": result.object_count,
    });
    write_file(
        &out.join("summary.json"),
        &serde_json::to_string_pretty(&summary).unwrap(),
    )
}

fn compare(matrix: &Path, out: &Path) -> Result<(), Failure> {
    let matrix: ComparisonMatrix = read_json(matrix)?;
    matrix.base.validate()?;
    if matrix.variants.is_empty() || matrix.scenes.is_empty() || matrix.seeds.is_empty() {
        return Err(Failure::config(
            "matrix needs at least one variant, scene and seed",
        ));
    }
    let result = harness::compare(&matrix);
    result.write(out)?;
    for row in result.summary().iter().filter(|r| r.scene.is_none()) {
        println!(
            "{:<16} runs {:>3}  time to target {:>8.1} s  distance to target {:>6.1} m  reached {}",
            row.variant,
            row.runs,
            row.time_to_target_s,
            row.distance_to_target_m,
            row.reached_target
        );
    }
    Ok(())
}

fn gen_scene(gen: &GenArgs, out: Option<&Path>) -> Result<(), Failure> {
    let spec = scene::gen_scene(&gen.params(0))?;
    match out {
        Some(p) => write_file(p, &spec.to_json()),
        None => {
            println!("{}", spec.to_json());
            Ok(())
        }
    }
}

fn export_field(episode: &Path, step: usize, out: Option<PathBuf>) -> Result<(), Failure> {
    if step == 0 {
        return Err(Failure::config("--step must be at least 1"));
    }
    let mut cfg: EpisodeConfig = read_json(&episode.join("config.json"))?;
    cfg.step_budget = step;
    cfg.validate()?;
    let result = harness::run_episode(&cfg)?;
    let dir = out.unwrap_or_else(|| episode.join(format!("field_step_{step}")));
    fs::create_dir_all(&dir).map_err(|e| Failure::io(&dir, e))?;
    result
        .field
        .export_slices(&dir)
        .map_err(|e| Failure::io(&dir, e))?;
    let moves = result.timeline.last().map_or(0, |r| r.step);
    if moves < step {
        log::warn!("episode ended after {moves} moves, before step {step}");
    }
    println!(
        "wrote {} theta slices after {moves} moves to {}",
        result.field.lattice.theta_bins,
        dir.display()
    );
    Ok(())
}
