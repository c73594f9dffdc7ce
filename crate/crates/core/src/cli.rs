//! Command-line front end: replay and verify workloads, generate queries
//! and datasets.

use std::io::Write;
use std::path::{Path, PathBuf};
use std::sync::Arc;

use clap::{Args, Parser, Subcommand};

use crate::backend::Backend;
use crate::engine::{Engine, EngineStats};
use crate::error::{Error, Result};
use crate::query::Query;
use crate::schema::Catalog;
use crate::store::CacheConfig;
use crate::workload::{format_workload, read_workload, write_dataset, QueryGenerator};

#[derive(Debug, Parser)]
#[command(name = "semcache", version, about = "Semantic query cache over a CSV-backed relational store")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Answer every workload query through the cache and print statistics.
    Run(RunConfig),
    /// Like `run`, but also check every answer against direct execution.
    Verify(RunConfig),
    /// Write a random workload sampled from the data.
    Gen(GenConfig),
    /// Write a synthetic health-care catalog and CSV files.
    GenData(GenDataConfig),
}

#[derive(Debug, Clone, Args)]
pub struct RunConfig {
    #[arg(long)]
    pub catalog: PathBuf,
    /// Directory holding one `<class>.csv` per class (spaces as underscores).
    #[arg(long)]
    pub data: PathBuf,
    /// Query file; without it `--seed` generates `--count` random queries.
    #[arg(long)]
    pub workload: Option<PathBuf>,
    #[arg(long, default_value_t = 256)]
    pub pages: usize,
    #[arg(long, default_value_t = 4096)]
    pub page_bytes: usize,
    #[arg(long, default_value_t = crate::predicate::DEFAULT_BLOWUP_CAP)]
    pub blowup_cap: usize,
    /// Print one rewrite trace line per query.
    #[arg(long)]
    pub trace: bool,
    #[arg(long)]
    pub print_answers: bool,
    /// Stats JSON destination; stdout when absent.
    #[arg(long)]
    pub stats_out: Option<PathBuf>,
    #[arg(long)]
    pub dump_cache: Option<PathBuf>,
    /// Resume from a cache image; its page configuration takes precedence.
    #[arg(long)]
    pub load_cache: Option<PathBuf>,
    #[arg(long)]
    pub seed: Option<u64>,
    #[arg(long, default_value_t = 1000)]
    pub count: usize,
}

#[derive(Debug, Clone, Args)]
pub struct GenConfig {
    #[arg(long)]
    pub catalog: PathBuf,
    #[arg(long)]
    pub data: PathBuf,
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
    #[arg(long, default_value_t = 100)]
    pub count: usize,
    /// Comma-separated class names; all classes when absent.
    #[arg(long, value_delimiter = ',')]
    pub classes: Vec<String>,
    /// Output file; stdout when absent.
    #[arg(long)]
    pub out: Option<PathBuf>,
}

#[derive(Debug, Clone, Args)]
pub struct GenDataConfig {
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
    #[arg(long, default_value_t = 1000)]
    pub rows: usize,
    #[arg(long)]
    pub out: PathBuf,
}

impl RunConfig {
    pub fn cache_config(&self) -> Result<CacheConfig> {
        let cfg = CacheConfig {
            page_capacity_bytes: self.page_bytes,
            total_pages: self.pages,
            blowup_cap: self.blowup_cap,
        };
        cfg.validate()?;
        Ok(cfg)
    }
}

fn load_backend(catalog: &Path, data: &Path) -> Result<Backend> {
    let catalog = Arc::new(Catalog::parse(&std::fs::read_to_string(catalog)?)?);
    Backend::load_dir(catalog, data)
}

/// Dispatches a parsed command line; regular output goes to `out`.
pub fn execute(cli: Cli, out: &mut dyn Write) -> Result<()> {
    match cli.command {
        Command::Run(cfg) => replay(&cfg, false, out).map(|_| ()),
        Command::Verify(cfg) => replay(&cfg, true, out).map(|_| ()),
        Command::Gen(cfg) => gen(&cfg, out),
        Command::GenData(cfg) => write_dataset(&cfg.out, cfg.seed, cfg.rows),
    }
}

pub fn run(config: &RunConfig, out: &mut dyn Write) -> Result<EngineStats> {
    replay(config, false, out)
}

pub fn verify(config: &RunConfig, out: &mut dyn Write) -> Result<EngineStats> {
    replay(config, true, out)
}

fn workload(config: &RunConfig, backend: &Backend) -> Result<Vec<Query>> {
    match (&config.workload, config.seed) {
        (Some(path), _) => read_workload(path, backend.catalog()),
        (None, Some(seed)) => Ok(QueryGenerator::new(backend, seed, &[])?.take(config.count)),
        (None, None) => Err(Error::Config("either --workload or --seed is required".into())),
    }
}

fn replay(config: &RunConfig, check: bool, out: &mut dyn Write) -> Result<EngineStats> {
    let cache_config = config.cache_config()?;
    let backend = load_backend(&config.catalog, &config.data)?;
    let queries = workload(config, &backend)?;
    let mut engine = match &config.load_cache {
        Some(path) => Engine::load(backend, &std::fs::read(path)?)?,
        None => Engine::new(backend, cache_config)?,
    };

    for (i, q) in queries.iter().enumerate() {
        let report = engine.answer(q)?;
        if config.trace {
            writeln!(out, "{}", report.trace)?;
        }
        if config.print_answers {
            writeln!(out, "# {} ({} rows)", q, report.answer.len())?;
            for t in &report.answer {
                let cells: Vec<String> = t.iter().map(|(k, v)| format!("{k}={}", v.to_literal())).collect();
                writeln!(out, "{}", cells.join(", "))?;
            }
        }
        if check && report.answer != engine.backend().oracle(q)? {
            return Err(Error::Divergence {
                index: i + 1,
                query: q.format(),
            });
        }
    }

    let stats = engine.stats();
    let json = serde_json::to_string_pretty(&stats.to_json()).expect("stats serialize") + "\n";
    match &config.stats_out {
        Some(path) => std::fs::write(path, json)?,
        None => out.write_all(json.as_bytes())?,
    }
    if let Some(path) = &config.dump_cache {
        std::fs::write(path, engine.dump())?;
    }
    Ok(stats)
}

fn gen(config: &GenConfig, out: &mut dyn Write) -> Result<()> {
    let backend = load_backend(&config.catalog, &config.data)?;
    let queries = QueryGenerator::new(&backend, config.seed, &config.classes)?.take(config.count);
    let text = format_workload(&queries);
    match &config.out {
        Some(path) => std::fs::write(path, text)?,
        None => out.write_all(text.as_bytes())?,
    }
    Ok(())
}
