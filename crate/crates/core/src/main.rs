use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Parser, Subcommand};

use cdsbench::corpus::{load_topics, TopicField};
use cdsbench::eval::{
    compare_runs, deltas_to_csv, evaluate, per_query_delta, read_qrels, read_run, write_run, Metric,
    MetricConfig, RunEntry, SampledQrels,
};
use cdsbench::index::{Facet, InvertedIndex};
use cdsbench::ltr::{TrainingParams, TrainingSetParams};
use cdsbench::optimizer::{optimize_weights, WeightGrid};
use cdsbench::pipeline::{Pipeline, PipelineConfig, Resources};
use cdsbench::{write_atomic, Error, Result};

/// Benchmark clinical-literature retrieval pipelines.
#[derive(Parser)]
#[command(name = "cdsbench", version)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Build and save the index a config describes.
    Index {
        #[arg(long)]
        config: PathBuf,
        /// Defaults to the config's `index` path.
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Run a pipeline config and write a TREC run file.
    Run {
        #[arg(long)]
        config: PathBuf,
        /// Defaults to the config's `index` path; built in memory when neither is set.
        #[arg(long)]
        index: Option<PathBuf>,
        #[arg(long)]
        out: PathBuf,
    },
    /// Score a run against qrels.
    Evaluate {
        #[arg(long)]
        run: PathBuf,
        #[arg(long)]
        qrels: PathBuf,
        #[arg(long)]
        strata: Option<PathBuf>,
        /// Print every topic, not just the means.
        #[arg(long)]
        per_topic: bool,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Compare runs against a baseline with paired t-tests.
    Compare {
        #[arg(long)]
        baseline: PathBuf,
        #[arg(long = "run", required = true)]
        runs: Vec<PathBuf>,
        #[arg(long)]
        qrels: PathBuf,
        #[arg(long)]
        strata: Option<PathBuf>,
        /// Topic field the runs were built from, shown in the report.
        #[arg(long)]
        field: Option<TopicField>,
        #[arg(long)]
        out: Option<PathBuf>,
        #[arg(long)]
        csv: Option<PathBuf>,
    },
    /// Hill-climb facet weights for a config against its qrels.
    Optimize {
        #[arg(long)]
        config: PathBuf,
        #[arg(long)]
        index: Option<PathBuf>,
        #[arg(long)]
        out: PathBuf,
        #[arg(long)]
        trace: PathBuf,
        #[arg(long, default_value_t = 30)]
        epochs: usize,
        #[arg(long, default_value_t = 0.1)]
        step: f64,
        #[arg(long, value_delimiter = ',', default_value = "title,abstract,body,mesh,concepts,all")]
        facets: Vec<Facet>,
        /// Overrides the config's seed.
        #[arg(long)]
        seed: Option<u64>,
    },
    /// Train a re-ranker on judged prior topics.
    TrainLtr {
        #[arg(long)]
        config: PathBuf,
        #[arg(long)]
        index: Option<PathBuf>,
        /// Prior topics; defaults to the config's topics.
        #[arg(long)]
        topics: Option<PathBuf>,
        /// Prior qrels; defaults to the config's qrels.
        #[arg(long)]
        qrels: Option<PathBuf>,
        #[arg(long)]
        strata: Option<PathBuf>,
        #[arg(long)]
        out: PathBuf,
        #[arg(long, default_value_t = 0.1)]
        learning_rate: f64,
        #[arg(long, default_value_t = 200)]
        epochs: usize,
    },
    /// Per-topic metric differences between two runs.
    Delta {
        #[arg(long)]
        a: PathBuf,
        #[arg(long)]
        b: PathBuf,
        #[arg(long)]
        qrels: PathBuf,
        #[arg(long)]
        strata: Option<PathBuf>,
        #[arg(long, default_value = "infNDCG")]
        metric: String,
        #[arg(long)]
        out: Option<PathBuf>,
    },
}

fn emit(text: &str, out: Option<&Path>) -> Result<()> {
    match out {
        Some(p) => write_atomic(p, text.as_bytes()),
        None => {
            print!("{text}");
            Ok(())
        }
    }
}

fn open_index(config: &PipelineConfig, flag: Option<&Path>) -> Result<InvertedIndex> {
    match (flag, &config.index) {
        (Some(p), _) => InvertedIndex::load(p),
        (None, Some(p)) => InvertedIndex::load(config.resolve(p)),
        (None, None) => config.build_index(),
    }
}

fn qrels(path: &Path, strata: Option<&Path>) -> Result<SampledQrels> {
    read_qrels(path, strata)
}

fn execute(command: Command) -> Result<()> {
    let metrics = MetricConfig::default();
    match command {
        Command::Index { config, out } => {
            let cfg = PipelineConfig::load(&config)?;
            let out = match (out, &cfg.index) {
                (Some(p), _) => p,
                (None, Some(p)) => cfg.resolve(p),
                (None, None) => return Err(Error::Config("no index path given".into())),
            };
            let index = cfg.build_index()?;
            index.save(&out)?;
            eprintln!("indexed {} documents into {}", index.num_docs(), out.display());
        }
        Command::Run { config, index, out } => {
            let cfg = PipelineConfig::load(&config)?;
            let resources = Resources::load(&cfg)?;
            let index = open_index(&cfg, index.as_deref())?;
            let run = Pipeline::new(&cfg, &index, &resources)?.run()?;
            write_run(&run, &out)?;
        }
        Command::Evaluate { run, qrels: q, strata, per_topic, out } => {
            let run = read_run(&run)?;
            let qrels = qrels(&q, strata.as_deref())?;
            let eval = evaluate(&run, &qrels, &metrics)?;
            if eval.is_empty() {
                return Err(Error::Eval("no topic of the run has a judged relevant document".into()));
            }
            let mut text = String::new();
            for metric in Metric::REPORTED {
                if per_topic {
                    for (t, e) in &eval {
                        text.push_str(&format!("{:<8}\t{t}\t{:.4}\n", metric.name(), e.get(metric)));
                    }
                }
                let values: Vec<f64> = eval.values().map(|e| e.get(metric)).collect();
                text.push_str(&format!("{:<8}\tall\t{:.4}\n", metric.name(), cdsbench::eval::mean(&values)));
            }
            emit(&text, out.as_deref())?;
        }
        Command::Compare { baseline, runs, qrels: q, strata, field, out, csv } => {
            let qrels = qrels(&q, strata.as_deref())?;
            let baseline = read_run(&baseline)?;
            let runs = runs.iter().map(read_run).collect::<Result<Vec<_>>>()?;
            let entries: Vec<RunEntry<'_>> = runs.iter().map(|run| RunEntry { run, field }).collect();
            let report = compare_runs(&entries, &baseline, &qrels, &metrics)?;
            emit(&report.to_text(), out.as_deref())?;
            if let Some(p) = csv {
                write_atomic(&p, report.to_csv().as_bytes())?;
            }
        }
        Command::Optimize { config, index, out, trace, epochs, step, facets, seed } => {
            let cfg = PipelineConfig::load(&config)?;
            let resources = Resources::load(&cfg)?;
            let qrels = resources
                .qrels
                .clone()
                .ok_or_else(|| Error::Config("optimize needs qrels in the config".into()))?;
            let index = open_index(&cfg, index.as_deref())?;
            let pipeline = Pipeline::new(&cfg, &index, &resources)?;
            let grid = WeightGrid::new(facets, step)?;
            let result = optimize_weights(&pipeline, &qrels, &metrics, &grid, seed.unwrap_or(cfg.seed), epochs)?;
            let text = format!(
                "# best mean infNDCG {:.6} (seed {}, {} epochs)\nweights = {}\n",
                result.best_score, result.seed, result.epochs, result.best_weights
            );
            write_atomic(&out, text.as_bytes())?;
            write_atomic(&trace, result.trace_csv().as_bytes())?;
            eprintln!("best weights {} scoring {:.4}", result.best_weights, result.best_score);
        }
        Command::TrainLtr { config, index, topics, qrels: q, strata, out, learning_rate, epochs } => {
            let cfg = PipelineConfig::load(&config)?;
            let mut resources = Resources::load(&cfg)?;
            if let Some(t) = topics {
                resources.topics = load_topics(&std::fs::read(t)?)?;
            }
            let prior = match (q, &resources.qrels) {
                (Some(p), _) => qrels(&p, strata.as_deref())?,
                (None, Some(existing)) => existing.clone(),
                (None, None) => return Err(Error::Config("train-ltr needs qrels".into())),
            };
            let index = open_index(&cfg, index.as_deref())?;
            let pipeline = Pipeline::new(&cfg, &index, &resources)?;
            let set = TrainingSetParams { seed: cfg.seed, ..TrainingSetParams::default() };
            let params = TrainingParams { learning_rate, epochs, seed: cfg.seed };
            let model = pipeline.train_ltr(&prior, &set, &params)?;
            model.save(&out)?;
            if let Some(m) = &model.metadata {
                eprintln!("trained on {} pairs, pair accuracy {:.4}", m.pairs, m.train_accuracy);
            }
        }
        Command::Delta { a, b, qrels: q, strata, metric, out } => {
            let qrels = qrels(&q, strata.as_deref())?;
            let deltas = per_query_delta(&read_run(&a)?, &read_run(&b)?, &qrels, &metric, &metrics)?;
            emit(&deltas_to_csv(&deltas), out.as_deref())?;
        }
    }
    Ok(())
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let code = if e.use_stderr() { 1 } else { 0 };
            let _ = e.print();
            return ExitCode::from(code);
        }
    };
    if let Some(n) = std::env::var("CDSBENCH_THREADS").ok().and_then(|v| v.parse().ok()) {
        let _ = rayon::ThreadPoolBuilder::new().num_threads(n).build_global();
    }
    match execute(cli.command) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(e.exit_code() as u8)
        }
    }
}
