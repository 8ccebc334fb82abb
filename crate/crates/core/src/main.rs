use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};

use junctest::analysis::Scheme;
use junctest::pipeline::{self, PipelineConfig, PipelineError};
use junctest::sim::EgoPolicy;

#[derive(Parser)]
#[command(name = "junctest", version, about = "Derive, concretize, simulate and analyze dangerous junction scenarios")]
struct Cli {
    /// Pipeline configuration (JSON). Flags below override its fields.
    #[arg(long, global = true)]
    config: Option<PathBuf>,
    /// Output directory.
    #[arg(long, global = true)]
    out: Option<PathBuf>,
    /// Worker threads (default: all cores).
    #[arg(long, global = true)]
    jobs: Option<usize>,
    /// Base simulation seed.
    #[arg(long, global = true)]
    seed: Option<u64>,
    #[command(flatten)]
    overrides: Overrides,
    #[command(subcommand)]
    command: Command,
}

#[derive(Args)]
struct Overrides {
    /// Road-map file, or builtin:T1 / builtin:X1 / builtin:Y1.
    #[arg(long, global = true)]
    map: Option<String>,
    /// Junction id within the road map.
    #[arg(long, global = true)]
    junction: Option<String>,
    /// Number of actors including the ego.
    #[arg(long, short = 'n', global = true)]
    n_actors: Option<usize>,
    /// Keep symmetric duplicates.
    #[arg(long, global = true)]
    no_symmetry_reduction: bool,
    /// Ego policy (repeatable): oblivious or reactive_brake.
    #[arg(long = "policy", global = true)]
    policies: Vec<String>,
    /// Seeds per scenario and policy.
    #[arg(long, global = true)]
    repetitions: Option<u64>,
    /// Grouping scheme (repeatable): n-actors, ego-maneuver or ego-mi.
    #[arg(long = "scheme", global = true)]
    schemes: Vec<String>,
}

#[derive(Subcommand)]
enum Command {
    /// Enumerate dangerous logical scenarios.
    Generate,
    /// Derive concrete paths and timings and run the static check.
    Concretize {
        /// Logical scenario file (default: <out>/logical/scenarios.json).
        #[arg(long)]
        input: Option<PathBuf>,
    },
    /// Simulate every eligible concrete scenario.
    Simulate {
        /// Directory of concrete scenarios (default: <out>/concrete).
        #[arg(long)]
        input: Option<PathBuf>,
    },
    /// Classify traces and write the reports.
    Analyze {
        /// Directory of traces (default: <out>/traces).
        #[arg(long)]
        input: Option<PathBuf>,
    },
    /// Rebuild the reports from existing outcomes.
    Report {
        /// Outcomes file (default: <out>/analysis/outcomes.json).
        #[arg(long)]
        input: Option<PathBuf>,
    },
    /// Run all stages.
    Pipeline,
}

fn parse_policy(name: &str) -> Result<EgoPolicy, PipelineError> {
    match name {
        "oblivious" => Ok(EgoPolicy::Oblivious),
        "reactive_brake" | "reactive-brake" => Ok(EgoPolicy::reactive()),
        _ => Err(PipelineError::Config(format!("unknown policy {name:?} (expected oblivious or reactive_brake)"))),
    }
}

fn build_config(cli: &Cli) -> Result<PipelineConfig, PipelineError> {
    let mut cfg = match &cli.config {
        Some(p) => PipelineConfig::load(p)?,
        None => PipelineConfig::default(),
    };
    let o = &cli.overrides;
    if let Some(v) = &cli.out {
        cfg.out = v.clone();
    }
    if let Some(v) = cli.seed {
        cfg.simulation.seed = v;
    }
    if let Some(v) = &o.map {
        cfg.road_map = v.clone();
    }
    if let Some(v) = &o.junction {
        cfg.junction = v.clone();
    }
    if let Some(v) = o.n_actors {
        cfg.n_actors = v;
    }
    if o.no_symmetry_reduction {
        cfg.generation.symmetry_reduction = false;
    }
    if !o.policies.is_empty() {
        cfg.simulation.policies = o.policies.iter().map(|p| parse_policy(p)).collect::<Result<_, _>>()?;
    }
    if let Some(v) = o.repetitions {
        cfg.simulation.repetitions = v;
    }
    if !o.schemes.is_empty() {
        cfg.analysis.schemes = o.schemes.iter().map(|s| s.parse::<Scheme>()).collect::<Result<_, _>>()?;
    }
    cfg.validate()?;
    Ok(cfg)
}

fn run(cli: &Cli) -> Result<(), PipelineError> {
    let cfg = build_config(cli)?;
    match &cli.command {
        Command::Generate => {
            let s = pipeline::run_generate(&cfg)?;
            s.lines().iter().for_each(|l| println!("{l}"));
            println!("wrote {}", s.path.display());
        }
        Command::Concretize { input } => println!("{}", pipeline::run_concretize(&cfg, input.as_deref())?.line()),
        Command::Simulate { input } => println!("{}", pipeline::run_simulate(&cfg, input.as_deref())?.line()),
        Command::Analyze { input } => {
            println!("{}", pipeline::run_analyze(&cfg, input.as_deref())?.line());
            println!("wrote {}", cfg.analysis_dir().join("report.md").display());
        }
        Command::Report { input } => {
            let reports = pipeline::run_report(&cfg, input.as_deref())?;
            print!("{}", junctest::analysis::render_markdown(&reports));
        }
        Command::Pipeline => {
            let s = pipeline::run_pipeline(&cfg)?;
            s.generate.lines().iter().for_each(|l| println!("{l}"));
            println!("{}", s.concretize.line());
            println!("{}", s.simulate.line());
            match s.analyze {
                Some(a) => println!("{}", a.line()),
                None => println!("no eligible scenarios; nothing to analyze"),
            }
        }
    }
    Ok(())
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    if let Some(n) = cli.jobs {
        if let Err(e) = rayon::ThreadPoolBuilder::new().num_threads(n).build_global() {
            eprintln!("error: cannot set up {n} worker threads: {e}");
            return ExitCode::from(2);
        }
    }
    match run(&cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(e.exit_code() as u8)
        }
    }
}
