use std::fs;
use std::path::{Path, PathBuf};
use std::time::Duration;

use anyhow::{bail, Context};
use clap::{Args, Parser, Subcommand};

use nomdd::instance::generate_instance_on_stream;
use nomdd::oracle::oracle_report;
use nomdd::report::{self, ExperimentConfig, Measure};
use nomdd::search::{solve, SearchLimits};
use nomdd::{Instance, Model, ModelVariant};

#[derive(Parser)]
#[command(name = "nomdd", version, about = "No-Overlap MDD filtering benchmarks")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Generate just-in-time instances.
    Gen {
        #[arg(long)]
        n: usize,
        #[arg(long, default_value_t = 1)]
        count: u64,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        /// Output directory.
        #[arg(long, default_value = ".")]
        out: PathBuf,
    },
    /// Solve one instance.
    Solve {
        instance: PathBuf,
        #[arg(long, default_value = "baseline")]
        variant: String,
        #[arg(long)]
        width: Option<usize>,
        #[command(flatten)]
        limits: LimitArgs,
        /// Where to write the replay log.
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Record baseline trees and replay them under other variants.
    Experiment {
        /// Instance files; when absent, `--count` instances are generated.
        instances: Vec<PathBuf>,
        #[arg(long, default_value_t = 10)]
        n: usize,
        #[arg(long, default_value_t = 1)]
        count: u64,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        /// Variants to replay, comma separated.
        #[arg(long, value_delimiter = ',', default_value = "baseline,relaxed-bc,pe,exact-bc")]
        variant: Vec<String>,
        /// Widths for the relaxed variants, comma separated.
        #[arg(long, value_delimiter = ',', default_value = "8,16,32")]
        width: Vec<usize>,
        #[command(flatten)]
        limits: LimitArgs,
        /// Omit timings; requires `--node-limit`.
        #[arg(long)]
        deterministic: bool,
        /// Largest instance replayed with exact bound consistency.
        #[arg(long, default_value_t = report::DEFAULT_EXACT_MAX_JOBS)]
        exact_max_jobs: usize,
        /// CSV output file; standard output when absent.
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Derive performance-profile and cactus data from an experiment CSV.
    Report {
        csv: PathBuf,
        /// Output directory.
        #[arg(long, default_value = ".")]
        out: PathBuf,
    },
    /// Exhaustive earliest starts, latest ends, precedences and optimum.
    Oracle { instance: PathBuf },
}

#[derive(Args)]
struct LimitArgs {
    /// Seconds.
    #[arg(long)]
    time_limit: Option<f64>,
    #[arg(long)]
    node_limit: Option<u64>,
}

impl LimitArgs {
    fn limits(&self) -> anyhow::Result<SearchLimits> {
        let time = match self.time_limit {
            Some(t) if !(t > 0.0 && t.is_finite()) => bail!("--time-limit must be positive"),
            Some(t) => Some(Duration::from_secs_f64(t)),
            None => None,
        };
        Ok(SearchLimits {
            nodes: self.node_limit,
            time,
        })
    }
}

fn read_instance(path: &Path) -> anyhow::Result<Instance> {
    let text = fs::read_to_string(path).with_context(|| format!("reading {}", path.display()))?;
    Instance::parse(&text).with_context(|| format!("parsing {}", path.display()))
}

fn corpus_name(n: usize, seed: u64, k: u64) -> String {
    format!("jit_n{n}_s{seed}_{k}.txt")
}

fn variants(names: &[String], widths: &[usize]) -> anyhow::Result<Vec<ModelVariant>> {
    if widths.contains(&0) {
        bail!("widths must be at least 1");
    }
    let mut out = Vec::new();
    for name in names {
        match name.as_str() {
            "relaxed-bc" | "pe" => {
                for &w in widths {
                    out.push(ModelVariant::from_name(name, Some(w))?);
                }
            }
            other => out.push(other.parse()?),
        }
    }
    Ok(out)
}

fn main() -> anyhow::Result<()> {
    match Cli::parse().command {
        Command::Gen { n, count, seed, out } => {
            fs::create_dir_all(&out)?;
            for k in 0..count {
                let path = out.join(corpus_name(n, seed, k));
                fs::write(&path, generate_instance_on_stream(n, seed, k).to_text())?;
                println!("{}", path.display());
            }
        }
        Command::Solve {
            instance,
            variant,
            width,
            limits,
            out,
        } => {
            let inst = read_instance(&instance)?;
            let variant = ModelVariant::from_name(&variant, width)?;
            let mut model = Model::new(&inst, variant);
            let result = solve(&mut model, limits.limits()?);
            let s = &result.stats;
            println!("variant {variant}");
            println!("nodes {}", s.nodes);
            println!("failures {}", s.failures);
            println!("complete {}", s.complete);
            println!("time_ms {}", s.elapsed.as_millis());
            match (&result.best, s.best_cost) {
                (Some(best), Some(cost)) => {
                    println!("best_cost {cost}");
                    let starts: Vec<String> = best.start.iter().map(|x| x.to_string()).collect();
                    println!("starts {}", starts.join(" "));
                }
                _ if s.complete => println!("infeasible"),
                _ => println!("no solution found"),
            }
            if let Some(path) = out {
                fs::write(&path, result.log.to_string())?;
            }
        }
        Command::Experiment {
            instances,
            n,
            count,
            seed,
            variant,
            width,
            limits,
            deterministic,
            exact_max_jobs,
            out,
        } => {
            let corpus: Vec<(String, Instance)> = if instances.is_empty() {
                (0..count)
                    .map(|k| (corpus_name(n, seed, k), generate_instance_on_stream(n, seed, k)))
                    .collect()
            } else {
                instances
                    .iter()
                    .map(|p| {
                        let name = p.file_name().map_or_else(|| p.display().to_string(), |f| f.to_string_lossy().into());
                        read_instance(p).map(|i| (name, i))
                    })
                    .collect::<anyhow::Result<_>>()?
            };
            let mut config = ExperimentConfig::new(variants(&variant, &width)?, limits.limits()?);
            config.deterministic = deterministic;
            config.exact_max_jobs = exact_max_jobs;
            let rows = report::run_experiment(&corpus, &config)?;
            match out {
                Some(path) => report::write_csv(&rows, fs::File::create(&path)?)?,
                None => report::write_csv(&rows, std::io::stdout().lock())?,
            }
        }
        Command::Report { csv, out } => {
            let rows = report::read_csv(fs::File::open(&csv).with_context(|| format!("opening {}", csv.display()))?)?;
            fs::create_dir_all(&out)?;
            let nodes = report::performance_profile(&rows, Measure::Nodes);
            report::write_curve(&nodes, "ratio", fs::File::create(out.join("profile_nodes.csv"))?)?;
            if rows.iter().any(|r| r.time_ms.is_some()) {
                let time = report::performance_profile(&rows, Measure::TimeMs);
                report::write_curve(&time, "ratio", fs::File::create(out.join("profile_time.csv"))?)?;
            }
            let cactus = report::gap_cactus(&rows);
            report::write_curve(&cactus, "gap", fs::File::create(out.join("cactus_gap.csv"))?)?;
        }
        Command::Oracle { instance } => {
            print!("{}", oracle_report(&read_instance(&instance)?, None)?.to_text());
        }
    }
    Ok(())
}
