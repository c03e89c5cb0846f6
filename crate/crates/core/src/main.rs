use std::fs::{self, File};
use std::io::{self, BufWriter, Write};
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use anyhow::{bail, Context, Result};
use clap::{Parser, Subcommand};

use hacn::harness::{self, ExperimentConfig};
use hacn::metrics::Engine;
use hacn::tier1::convergence_lower_bound;

#[derive(Parser)]
#[command(name = "hacn", version, about = "Hierarchical consensus simulator")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Run one experiment and write per-task metrics.
    Run {
        #[arg(long)]
        config: Option<PathBuf>,
        #[arg(long)]
        seed: Option<u64>,
        #[arg(long)]
        agents: Option<usize>,
        #[arg(long)]
        tasks: Option<usize>,
        /// Also run the fully-connected baseline.
        #[arg(long)]
        baseline: bool,
        /// Output directory; defaults to `output.dir` or the current directory.
        #[arg(long)]
        out: Option<PathBuf>,
        /// Write global-memory and debate-transcript dumps as JSON lines.
        #[arg(long)]
        dumps: bool,
    },
    /// Run the experiment for several population sizes.
    Sweep {
        #[arg(long)]
        config: Option<PathBuf>,
        #[arg(long, value_delimiter = ',', required = true)]
        agents: Vec<usize>,
        #[arg(long)]
        seed: Option<u64>,
        #[arg(long)]
        tasks: Option<usize>,
        /// Output file; `-` or absent writes to stdout.
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Print the probability bound `1 - (1 - p)^k` for local convergence.
    Bound {
        #[arg(long)]
        p: f64,
        #[arg(long)]
        k: u32,
    },
}

fn load(config: Option<&Path>) -> Result<ExperimentConfig> {
    match config {
        Some(path) => ExperimentConfig::load(path).with_context(|| format!("loading {}", path.display())),
        None => Ok(ExperimentConfig::default()),
    }
}

fn create(path: &Path) -> Result<BufWriter<File>> {
    let f = File::create(path).with_context(|| format!("creating {}", path.display()))?;
    Ok(BufWriter::new(f))
}

fn run(cli: Cli) -> Result<()> {
    match cli.command {
        Command::Run {
            config,
            seed,
            agents,
            tasks,
            baseline,
            out,
            dumps,
        } => {
            let mut cfg = load(config.as_deref())?;
            if let Some(s) = seed {
                cfg.seed = s;
            }
            if let Some(n) = agents {
                cfg.population.agents = n;
            }
            if let Some(t) = tasks {
                cfg.task_count = t;
            }
            cfg.baseline |= baseline;
            cfg.output.dumps |= dumps;
            cfg.validate()?;

            let dir = out.or_else(|| cfg.output.dir.clone()).unwrap_or_else(|| PathBuf::from("."));
            fs::create_dir_all(&dir).with_context(|| format!("creating {}", dir.display()))?;
            let result = harness::run_experiment(&cfg)?;

            let mut w = create(&dir.join("hacn.csv"))?;
            harness::write_records_csv(&mut w, result.engine(Engine::Hacn))?;
            w.flush()?;
            if cfg.baseline {
                let mut w = create(&dir.join("baseline.csv"))?;
                harness::write_records_csv(&mut w, result.engine(Engine::Baseline))?;
                w.flush()?;
            }
            if cfg.output.dumps {
                let mut w = create(&dir.join("memory.jsonl"))?;
                result.memory.export_jsonl(&mut w)?;
                w.flush()?;
                let mut w = create(&dir.join("transcript.jsonl"))?;
                for (task, debate) in &result.transcripts {
                    for entry in &debate.transcript {
                        let line = serde_json::json!({ "task": task, "entry": entry });
                        serde_json::to_writer(&mut w, &line)?;
                        w.write_all(b"\n")?;
                    }
                }
                w.flush()?;
            }
            let decided = result.engine(Engine::Hacn).count();
            eprintln!("{decided} tasks decided; output in {}", dir.display());
        }
        Command::Sweep {
            config,
            agents,
            seed,
            tasks,
            out,
        } => {
            let mut cfg = load(config.as_deref())?;
            if let Some(s) = seed {
                cfg.seed = s;
            }
            if let Some(t) = tasks {
                cfg.task_count = t;
            }
            let rows = harness::sweep(&cfg, &agents)?;
            match out.filter(|p| p.as_os_str() != "-") {
                Some(path) => {
                    let mut w = create(&path)?;
                    harness::write_sweep_csv(&mut w, &rows)?;
                    w.flush()?;
                }
                None => harness::write_sweep_csv(io::stdout().lock(), &rows)?,
            }
        }
        Command::Bound { p, k } => {
            if !(0.0..=1.0).contains(&p) {
                bail!("--p must lie in [0, 1]");
            }
            if k == 0 {
                bail!("--k must be at least 1");
            }
            println!("{}", convergence_lower_bound(p, k));
        }
    }
    Ok(())
}

fn main() -> ExitCode {
    match run(Cli::parse()) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::FAILURE
        }
    }
}
