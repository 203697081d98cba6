use std::collections::BTreeMap;
use std::path::PathBuf;

use affectguard_core::annotations::{
    dataset_summary, load_annotations, nfbl_histogram, serialize_annotations, split_dataset, synthetic_corpus,
    NfblRegistry, SplitSizes, SyntheticSpec,
};
use affectguard_core::metrics::{ablation_report, EvalReport};
use affectguard_core::pipeline::{score_results, ResultRecord};
use anyhow::{Context, Result};
use clap::{Args, ValueEnum};
use serde::Serialize;

use crate::config::{set_if, RunConfig};
use crate::exit::{coded, VALIDATION};
use crate::output::{write_atomic, write_json};

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum Format {
    Text,
    Json,
    Csv,
}

#[derive(Debug, Args)]
pub struct EvaluateArgs {
    /// Directory written by `run-pipeline`.
    pub results: PathBuf,
    #[arg(long)]
    pub annotations: PathBuf,
    #[arg(long, value_enum, default_value = "text")]
    pub format: Format,
}

#[derive(Debug, Args)]
pub struct StatsArgs {
    pub annotations: PathBuf,
    #[arg(long, value_enum, default_value = "text")]
    pub format: Format,
}

#[derive(Debug, Args)]
pub struct SplitArgs {
    pub annotations: PathBuf,
    /// Split file to write (JSON with `train` and `test` id lists).
    #[arg(long)]
    pub output: PathBuf,
    #[arg(long, env = "AFFECTGUARD_SEED")]
    pub seed: Option<u64>,
    #[arg(long, default_value_t = 36)]
    pub train_per_class: usize,
    #[arg(long, default_value_t = 37)]
    pub test_per_class: usize,
}

#[derive(Debug, Args)]
pub struct SynthArgs {
    #[arg(long)]
    pub output: PathBuf,
    #[arg(long, env = "AFFECTGUARD_SEED")]
    pub seed: Option<u64>,
    #[arg(long)]
    pub videos: Option<usize>,
    #[arg(long)]
    pub negatives: Option<usize>,
    #[arg(long)]
    pub clips: Option<usize>,
}

fn read_results(dir: &std::path::Path) -> Result<Vec<ResultRecord>> {
    let path = dir.join("results.jsonl");
    let text = std::fs::read_to_string(&path).with_context(|| format!("reading {}", path.display()))?;
    text.lines()
        .enumerate()
        .filter(|(_, l)| !l.trim().is_empty())
        .map(|(i, l)| {
            serde_json::from_str(l)
                .with_context(|| format!("{}:{}", path.display(), i + 1))
                .map_err(|e| coded(VALIDATION, format!("{e:#}")))
        })
        .collect()
}

pub fn evaluate(args: EvaluateArgs) -> Result<()> {
    let registry = NfblRegistry::builtin();
    let records = load_annotations(&args.annotations, &registry)?;
    let results = read_results(&args.results)?;
    let mut by_mode: BTreeMap<_, Vec<ResultRecord>> = BTreeMap::new();
    for r in results {
        by_mode.entry(r.mode).or_default().push(r);
    }
    let mut scored = BTreeMap::new();
    for (mode, rs) in &by_mode {
        scored.insert(*mode, score_results(rs, &records)?);
    }
    let table = ablation_report(&scored)?;
    match args.format {
        Format::Text => {
            for row in &table.rows {
                println!("[{}]", row.mode.label());
                print!("{}", row.report.to_text());
                println!();
            }
            print!("{}", table.to_text());
        }
        Format::Csv => print!("{}", table.to_csv()),
        Format::Json => {
            let reports: BTreeMap<&str, &EvalReport> = table.rows.iter().map(|r| (r.mode.code(), &r.report)).collect();
            println!("{}", serde_json::to_string_pretty(&reports)?);
        }
    }
    Ok(())
}

#[derive(Serialize)]
struct HistogramRow<'a> {
    id: String,
    name: &'a str,
    category: &'a str,
    count: usize,
}

pub fn stats(args: StatsArgs) -> Result<()> {
    let registry = NfblRegistry::builtin();
    let records = load_annotations(&args.annotations, &registry)?;
    let summary = dataset_summary(&records);
    let hist = nfbl_histogram(&records, &registry);
    match args.format {
        Format::Text => {
            println!("{summary}");
            println!();
            println!("{:<5} {:>7}  class", "id", "clips");
            for (id, count) in hist.ranked() {
                let name = registry.get(id).map_or("?", |c| c.name.as_str());
                println!("{:<5} {:>7}  {}", id.to_string(), count, name);
            }
        }
        Format::Csv => print!("{}", hist.to_csv(&registry)),
        Format::Json => {
            let rows: Vec<HistogramRow> = hist
                .ranked()
                .into_iter()
                .filter_map(|(id, count)| {
                    registry.get(id).map(|c| HistogramRow {
                        id: id.to_string(),
                        name: &c.name,
                        category: c.category.as_str(),
                        count,
                    })
                })
                .collect();
            let out = serde_json::json!({ "summary": summary, "histogram": rows });
            println!("{}", serde_json::to_string_pretty(&out)?);
        }
    }
    Ok(())
}

pub fn split(args: SplitArgs, mut config: RunConfig) -> Result<()> {
    set_if(&mut config.seed, args.seed);
    let registry = NfblRegistry::builtin();
    let records = load_annotations(&args.annotations, &registry)?;
    let sizes = SplitSizes {
        train_per_class: args.train_per_class,
        test_per_class: args.test_per_class,
    };
    let split = split_dataset(&records, config.seed, sizes)?;
    write_json(&args.output, &split.to_override())?;
    tracing::info!(
        seed = config.seed,
        train = split.train.len(),
        test = split.test.len(),
        "wrote split"
    );
    Ok(())
}

pub fn synth(args: SynthArgs, mut config: RunConfig) -> Result<()> {
    set_if(&mut config.seed, args.seed);
    let mut spec = SyntheticSpec::default();
    set_if(&mut spec.videos, args.videos);
    set_if(&mut spec.negatives, args.negatives);
    set_if(&mut spec.clips, args.clips);
    if spec.negatives > spec.videos || spec.videos == 0 {
        return Err(coded(crate::exit::USAGE, "need 0 < videos and negatives <= videos"));
    }
    let registry = NfblRegistry::builtin();
    let records = synthetic_corpus(&spec, &registry, config.seed);
    write_atomic(&args.output, serialize_annotations(&records).as_bytes())?;
    tracing::info!(videos = records.len(), output = %args.output.display(), "wrote synthetic annotations");
    Ok(())
}
