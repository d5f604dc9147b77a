use std::path::{Path, PathBuf};
use std::process::ExitCode;

use anyhow::{bail, Context, Result};
use clap::{Args, Parser, Subcommand};

use pcgp::config::RunConfig;
use pcgp::dot::to_dot;
use pcgp::experiment::{run_to_dir, sweep, write_sweep};
use pcgp::Genome;

/// Evolve CGP and PCGP programs.
#[derive(Parser)]
#[command(name = "pcgp", version)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Run one evolution, writing a per-generation CSV log and the best genome.
    Run {
        #[command(flatten)]
        config: ConfigArgs,
        /// Output directory.
        #[arg(long, env = "PCGP_LOG_DIR", default_value = "runs")]
        out: PathBuf,
        /// Artifact base name; defaults to the config or preset name plus the seed.
        #[arg(long)]
        name: Option<String>,
    },
    /// Random hyperparameter search, writing a CSV ranked by final fitness.
    Sweep {
        #[command(flatten)]
        config: ConfigArgs,
        #[arg(long, default_value_t = 20)]
        trials: usize,
        /// Seed of the parameter sampler; every trial runs with the config seed.
        #[arg(long, default_value_t = 0)]
        sweep_seed: u64,
        #[arg(long, env = "PCGP_LOG_DIR", default_value = "runs")]
        out: PathBuf,
        #[arg(long, default_value = "sweep")]
        name: String,
    },
    /// Write a genome as a Graphviz digraph.
    ExportDot {
        genome: PathBuf,
        #[command(flatten)]
        config: ConfigArgs,
        /// Destination file; stdout when absent.
        #[arg(short, long)]
        output: Option<PathBuf>,
    },
    /// Check a config against the allowed ranges; without a config, check every preset.
    Validate {
        #[command(flatten)]
        config: ConfigArgs,
    },
}

#[derive(Args)]
struct ConfigArgs {
    /// Config JSON file.
    #[arg(conflicts_with = "preset")]
    config: Option<PathBuf>,
    /// Bundled preset, e.g. e0_c or e4.
    #[arg(long)]
    preset: Option<String>,
    /// Override a top-level field, e.g. --set seed=3 --set data=iris.csv.
    #[arg(long = "set", value_name = "KEY=VALUE")]
    overrides: Vec<String>,
}

impl ConfigArgs {
    fn given(&self) -> bool {
        self.config.is_some() || self.preset.is_some() || !self.overrides.is_empty()
    }

    fn load(&self) -> Result<RunConfig> {
        let base = match (&self.config, &self.preset) {
            (Some(path), _) => RunConfig::load(path)?,
            (None, Some(name)) => RunConfig::preset(name)?,
            (None, None) => RunConfig::default(),
        };
        Ok(base.with_overrides(&self.overrides)?)
    }

    fn label(&self) -> String {
        match (&self.config, &self.preset) {
            (Some(path), _) => path
                .file_stem()
                .map_or_else(|| "run".into(), |s| s.to_string_lossy().into_owned()),
            (None, Some(name)) => name.clone(),
            (None, None) => "run".into(),
        }
    }
}

fn run(config: &ConfigArgs, out: &Path, name: Option<String>) -> Result<()> {
    let cfg = config.load()?;
    cfg.validate().context("invalid configuration")?;
    let name = name.unwrap_or_else(|| format!("{}-seed{}", config.label(), cfg.seed));
    log::info!("running {name}: {} on {}", cfg.mode, cfg.problem.name());
    let a = run_to_dir(&cfg, out, &name)?;
    let last = a.result.log.last().expect("log holds the initial generation");
    println!("best_fitness {}", a.result.best_fitness);
    println!("evaluations {}", last.evaluations);
    println!("active_nodes {}", last.best_active_nodes);
    println!("log {}", a.log.display());
    println!("genome {}", a.genome.display());
    Ok(())
}

fn run_sweep(config: &ConfigArgs, trials: usize, sweep_seed: u64, out: &Path, name: &str) -> Result<()> {
    let cfg = config.load()?;
    cfg.validate().context("invalid configuration")?;
    let ranked = sweep(&cfg, trials, sweep_seed)?;
    std::fs::create_dir_all(out)?;
    let path = out.join(format!("{name}.csv"));
    let file = std::fs::File::create(&path).with_context(|| format!("creating {}", path.display()))?;
    write_sweep(&ranked, std::io::BufWriter::new(file))?;
    if let Some(best) = ranked.first() {
        println!("best_fitness {} (trial {})", best.fitness, best.index);
    }
    println!("results {}", path.display());
    Ok(())
}

fn export_dot(genome: &Path, config: &ConfigArgs, output: Option<&Path>) -> Result<()> {
    let cfg = config.load()?;
    let text = std::fs::read_to_string(genome).with_context(|| format!("reading {}", genome.display()))?;
    let g = Genome::from_json(&text).with_context(|| format!("parsing {}", genome.display()))?;
    let dot = to_dot(&g, &cfg.decode_settings(), &cfg.function_set()?)?;
    match output {
        Some(path) => std::fs::write(path, dot).with_context(|| format!("writing {}", path.display()))?,
        None => print!("{dot}"),
    }
    Ok(())
}

fn validate(config: &ConfigArgs) -> Result<()> {
    if config.given() {
        config.load()?.validate()?;
        println!("ok");
        return Ok(());
    }
    let mut failed = 0;
    for name in RunConfig::preset_names() {
        match RunConfig::preset(name).and_then(|c| c.validate()) {
            Ok(()) => println!("{name} ok"),
            Err(e) => {
                failed += 1;
                println!("{name} invalid: {e}");
            }
        }
    }
    if failed > 0 {
        bail!("{failed} preset(s) invalid");
    }
    Ok(())
}

fn main() -> ExitCode {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("warn")).init();
    let outcome = match Cli::parse().command {
        Command::Run { config, out, name } => run(&config, &out, name),
        Command::Sweep {
            config,
            trials,
            sweep_seed,
            out,
            name,
        } => run_sweep(&config, trials, sweep_seed, &out, &name),
        Command::ExportDot { genome, config, output } => export_dot(&genome, &config, output.as_deref()),
        Command::Validate { config } => validate(&config),
    };
    match outcome {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::FAILURE
        }
    }
}
