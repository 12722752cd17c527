use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};

use groundzoom::gbt::AblationKind;
use groundzoom::runner::{self, GroundInput, Overrides, RunConfig, RunError};
use groundzoom::zoom::ZoomMode;

#[derive(Parser)]
#[command(name = "groundzoom", version, about = "Screen-element grounding with bidirectional ROI zoom")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Ground one instruction and print the screen point.
    Ground {
        #[command(flatten)]
        common: Common,
        /// Task id inside --dataset.
        #[arg(long, requires = "dataset")]
        task: Option<String>,
        /// Screenshot to ground on (with --instruction).
        #[arg(long, conflicts_with = "task", requires = "instruction")]
        image: Option<PathBuf>,
        #[arg(long)]
        instruction: Option<String>,
    },
    /// Run a dataset and write a result store.
    Bench(RunArgs),
    /// Run the pipeline once per ROI size.
    Sweep(RunArgs),
    /// Run a paired ablation.
    Ablate {
        #[command(flatten)]
        run: RunArgs,
        #[arg(long, value_enum)]
        kind: Option<Kind>,
    },
    /// Verify a result store and print its tables.
    Report {
        /// Store directory.
        #[arg(long)]
        out: PathBuf,
    },
}

#[derive(Args)]
struct Common {
    /// TOML run configuration.
    #[arg(long)]
    config: Option<PathBuf>,
    /// Task file (JSONL).
    #[arg(long)]
    dataset: Option<PathBuf>,
    /// Output directory.
    #[arg(long)]
    out: Option<PathBuf>,
    #[arg(long)]
    seed: Option<u64>,
    #[arg(long)]
    workers: Option<usize>,
    #[arg(long, value_enum)]
    mode: Option<Mode>,
    /// Final ROI side in pixels.
    #[arg(long)]
    roi_size: Option<f64>,
    /// Zoom-in pruning rate.
    #[arg(long)]
    pruning: Option<f64>,
    /// Stage 2 upscaling factor (1-4).
    #[arg(long)]
    scale: Option<u32>,
}

#[derive(Args)]
struct RunArgs {
    #[command(flatten)]
    common: Common,
    /// Generate this many synthetic tasks into <out>/dataset.jsonl instead of reading --dataset.
    #[arg(long, conflicts_with = "dataset")]
    synthetic: Option<usize>,
}

#[derive(Clone, Copy, ValueEnum)]
enum Mode {
    Bidirectional,
    Unidirectional,
    Symmetric,
}

#[derive(Clone, Copy, ValueEnum)]
enum Kind {
    Direction,
    Symmetry,
    Pruning,
    Scaling,
}

impl Common {
    fn resolve(&self) -> Result<RunConfig, RunError> {
        let ov = Overrides {
            dataset: self.dataset.clone(),
            out: self.out.clone(),
            seed: self.seed,
            workers: self.workers,
            mode: self.mode.map(|m| match m {
                Mode::Bidirectional => ZoomMode::Bidirectional,
                Mode::Unidirectional => ZoomMode::Unidirectional,
                Mode::Symmetric => ZoomMode::SymmetricBaseline,
            }),
            roi_size: self.roi_size,
            pruning: self.pruning,
            scale: self.scale,
        };
        runner::resolve_config(self.config.as_deref(), &ov)
    }
}

impl RunArgs {
    fn resolve(&self) -> Result<RunConfig, RunError> {
        let mut cfg = self.common.resolve()?;
        if let Some(n) = self.synthetic {
            runner::prepare_synthetic(&mut cfg, n)?;
        }
        Ok(cfg)
    }
}

fn run(cli: Cli) -> Result<ExitCode, Box<dyn std::error::Error>> {
    let summary = match cli.command {
        Command::Ground { common, task, image, instruction } => {
            let cfg = common.resolve()?;
            let input = match (task, image, instruction) {
                (Some(task_id), None, _) => {
                    GroundInput::DatasetTask { dataset: cfg.dataset.clone().ok_or("--task needs --dataset")?, task_id }
                }
                (None, Some(image), Some(instruction)) => GroundInput::Image { image, instruction },
                _ => return Err("ground needs --dataset with --task, or --image with --instruction".into()),
            };
            let report = runner::cmd_ground(&cfg, &input)?;
            print!("{}", report.render());
            if let Some(err) = report.error_json() {
                eprintln!("{err}");
                return Ok(ExitCode::from(2));
            }
            return Ok(ExitCode::SUCCESS);
        }
        Command::Bench(args) => runner::cmd_bench(&args.resolve()?)?,
        Command::Sweep(args) => runner::cmd_sweep(&args.resolve()?)?,
        Command::Ablate { run, kind } => {
            let kind = kind.map(|k| match k {
                Kind::Direction => AblationKind::BidirectionalVsUnidirectional,
                Kind::Symmetry => AblationKind::AsymmetricVsSymmetric,
                Kind::Pruning => AblationKind::PruningRates,
                Kind::Scaling => AblationKind::ScalingFactors,
            });
            runner::cmd_ablate(&run.resolve()?, kind)?
        }
        Command::Report { out } => {
            let store = runner::cmd_report(&out)?;
            println!("OK");
            if !store.dataset_checked {
                println!("note: dataset {} not found, digest not rechecked", store.manifest.dataset.path.display());
            }
            print!("{}", runner::format_summary(&store));
            return Ok(ExitCode::SUCCESS);
        }
    };
    print!("{}", runner::format_summary(&summary.store));
    println!("results in {}", summary.dir.display());
    Ok(ExitCode::SUCCESS)
}

fn main() -> ExitCode {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("warn")).init();
    match run(Cli::parse()) {
        Ok(code) => code,
        Err(e) => {
            eprintln!("{}", serde_json::json!({ "error": e.to_string() }));
            ExitCode::FAILURE
        }
    }
}
