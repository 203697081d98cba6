use std::collections::BTreeMap;
use std::path::{Path, PathBuf};
use std::sync::Arc;

use affectguard_core::annotations::{apply_override, load_annotations, NfblRegistry, SplitOverride, VideoRecord};
use affectguard_core::metrics::{ablation_report, EvalReport};
use affectguard_core::pipeline::{
    prepare_request, request_hash, run_batch, score_results, AblationMode, BatchOutcome, JudgeRequest, LlmClient,
    MediaRoot, MllmClient, MockClient, MockFixtures, PipelineContext, PromptTemplate, RemoteEndpoint, RemoteLlmClient,
    RemoteMllmClient,
};
use anyhow::{Context, Result};
use clap::{Args, ValueEnum};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::Serialize;

use crate::config::{set_if, RunConfig};
use crate::exit::{coded, USAGE, VALIDATION};
use crate::output::{write_atomic, write_json, write_jsonl};

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum Subset {
    All,
    Train,
    Test,
}

#[derive(Debug, Args)]
pub struct InputArgs {
    /// Annotation file (JSON Lines).
    #[arg(long)]
    pub annotations: PathBuf,
    /// Media root holding `<video_id>/frames/*.ppm` and `<video_id>/audio.wav`.
    #[arg(long)]
    pub media_root: PathBuf,
    /// Ablation modes: v (video), va (video+audio), van (video+audio+NFBL).
    #[arg(long = "mode", value_delimiter = ',', default_value = "van")]
    pub modes: Vec<String>,
    /// Split file written by `split`; restricts the run to one side.
    #[arg(long, requires = "subset")]
    pub split: Option<PathBuf>,
    #[arg(long, value_enum, requires = "split")]
    pub subset: Option<Subset>,
    /// Prompt template TOML [default: bundled v1]
    #[arg(long, env = "AFFECTGUARD_PROMPT_TEMPLATE")]
    pub prompt_template: Option<PathBuf>,
    /// Frames sampled per video [default: 32]
    #[arg(long)]
    pub frames: Option<usize>,
    /// Audio segment length in seconds [default: 2.0]
    #[arg(long)]
    pub segment_s: Option<f64>,
    /// Cap on audio segments per video [default: none]
    #[arg(long)]
    pub max_segments: Option<usize>,
}

#[derive(Debug, Args)]
pub struct RunArgs {
    #[command(flatten)]
    pub input: InputArgs,
    /// Output directory for results, failures, summary and config echo.
    #[arg(long)]
    pub output: PathBuf,
    /// Serve both model stages from a fixture file instead of remote endpoints.
    #[arg(long, env = "AFFECTGUARD_MOCK_FIXTURES")]
    pub mock_fixtures: Option<PathBuf>,
    #[arg(long, env = "AFFECTGUARD_MLLM_ENDPOINT")]
    pub mllm_endpoint: Option<String>,
    #[arg(long, env = "AFFECTGUARD_MLLM_TOKEN", hide_env_values = true)]
    pub mllm_token: Option<String>,
    #[arg(long, env = "AFFECTGUARD_JUDGE_ENDPOINT")]
    pub judge_endpoint: Option<String>,
    #[arg(long, env = "AFFECTGUARD_JUDGE_TOKEN", hide_env_values = true)]
    pub judge_token: Option<String>,
    /// Per-request timeout for both endpoints, seconds.
    #[arg(long, env = "AFFECTGUARD_TIMEOUT_S")]
    pub timeout_s: Option<f64>,
    /// Attempts per request, including the first.
    #[arg(long, env = "AFFECTGUARD_MAX_ATTEMPTS")]
    pub max_attempts: Option<u32>,
}

#[derive(Debug, Args)]
pub struct ScaffoldArgs {
    #[command(flatten)]
    pub input: InputArgs,
    /// Fixture file to write.
    #[arg(long)]
    pub output: PathBuf,
    /// Seed for the placeholder verdicts.
    #[arg(long, env = "AFFECTGUARD_SEED")]
    pub seed: Option<u64>,
}

struct Prepared {
    records: Vec<VideoRecord>,
    modes: Vec<AblationMode>,
    registry: Arc<NfblRegistry>,
    template: Arc<PromptTemplate>,
    media: Arc<MediaRoot>,
}

fn prepare(input: &InputArgs, config: &mut RunConfig) -> Result<Prepared> {
    let sampling = &mut config.pipeline.sampling;
    set_if(&mut sampling.frame_count, input.frames);
    set_if(&mut sampling.audio_segment_s, input.segment_s);
    set_if(&mut sampling.max_segments, input.max_segments.map(Some));
    config.pipeline.validate()?;

    let mut modes = input
        .modes
        .iter()
        .map(|m| m.parse::<AblationMode>())
        .collect::<affectguard_core::Result<Vec<_>>>()?;
    modes.sort();
    modes.dedup();

    let registry = NfblRegistry::builtin();
    let mut records = load_annotations(&input.annotations, &registry)?;
    if let (Some(path), Some(subset)) = (&input.split, input.subset) {
        let text = std::fs::read_to_string(path).with_context(|| format!("reading {}", path.display()))?;
        let ov: SplitOverride = serde_json::from_str(&text).with_context(|| format!("parsing {}", path.display()))?;
        let split = apply_override(&records, &ov)?;
        records = match subset {
            Subset::All => records,
            Subset::Train => split.train,
            Subset::Test => split.test,
        };
    }
    let template = match &input.prompt_template {
        Some(p) => PromptTemplate::load(p)?,
        None => PromptTemplate::builtin(),
    };
    Ok(Prepared {
        records,
        modes,
        registry: Arc::new(registry),
        template: Arc::new(template),
        media: Arc::new(MediaRoot::new(&input.media_root)),
    })
}

#[derive(Serialize)]
struct ConfigEcho<'a> {
    annotations: &'a Path,
    media_root: &'a Path,
    modes: &'a [AblationMode],
    videos: usize,
    client: &'a str,
    prompt_template_version: u32,
    config: &'a RunConfig,
}

#[derive(Serialize)]
struct ModeSummary {
    mode: AblationMode,
    results: usize,
    failures: usize,
    report: Option<EvalReport>,
}

pub fn run(args: RunArgs, mut config: RunConfig) -> Result<()> {
    let p = prepare(&args.input, &mut config)?;

    set_if(&mut config.mllm.endpoint, args.mllm_endpoint);
    set_if(&mut config.mllm.token, args.mllm_token.map(Some));
    set_if(&mut config.judge.endpoint, args.judge_endpoint);
    set_if(&mut config.judge.token, args.judge_token.map(Some));
    for remote in [&mut config.mllm, &mut config.judge] {
        set_if(&mut remote.timeout_s, args.timeout_s);
        set_if(&mut remote.max_attempts, args.max_attempts);
    }

    let mock = match &args.mock_fixtures {
        Some(path) => {
            config.pipeline.record_timing = false;
            Some(Arc::new(MockClient::new(MockFixtures::load(path)?)))
        }
        None => None,
    };
    let (mllm, judge, client): (Arc<dyn MllmClient>, Arc<dyn LlmClient>, &str) = match &mock {
        Some(m) => (m.clone(), m.clone(), "mock"),
        None => {
            if config.mllm.endpoint.is_empty() || config.judge.endpoint.is_empty() {
                return Err(coded(
                    USAGE,
                    "either --mock-fixtures or both --mllm-endpoint and --judge-endpoint are required",
                ));
            }
            (
                Arc::new(RemoteMllmClient(RemoteEndpoint::new(config.mllm.clone())?)),
                Arc::new(RemoteLlmClient(RemoteEndpoint::new(config.judge.clone())?)),
                "remote",
            )
        }
    };

    let echo = ConfigEcho {
        annotations: &args.input.annotations,
        media_root: &args.input.media_root,
        modes: &p.modes,
        videos: p.records.len(),
        client,
        prompt_template_version: p.template.version,
        config: &config,
    };
    tracing::info!(config = %serde_json::to_string(&echo)?, "effective pipeline config");
    std::fs::create_dir_all(&args.output).with_context(|| format!("creating {}", args.output.display()))?;
    write_json(&args.output.join("config.json"), &echo)?;

    let ctx = PipelineContext {
        config: Arc::new(config.pipeline.clone()),
        registry: p.registry.clone(),
        template: p.template.clone(),
        media: p.media.clone(),
        mllm,
        judge,
    };
    let runtime = tokio::runtime::Runtime::new()?;
    let mut all = BatchOutcome::default();
    let mut scored = BTreeMap::new();
    let mut summaries = Vec::new();
    for &mode in &p.modes {
        let batch = runtime.block_on(run_batch(&p.records, mode, &ctx));
        tracing::info!(mode = %mode, results = batch.results.len(), failures = batch.failures.len(), "mode finished");
        let report = if batch.results.is_empty() {
            None
        } else {
            let items = score_results(&batch.results, &p.records)?;
            let report = EvalReport::evaluate(&items)?;
            scored.insert(mode, items);
            Some(report)
        };
        summaries.push(ModeSummary {
            mode,
            results: batch.results.len(),
            failures: batch.failures.len(),
            report,
        });
        all.results.extend(batch.results);
        all.failures.extend(batch.failures);
    }

    write_jsonl(&args.output.join("results.jsonl"), &all.results)?;
    write_jsonl(&args.output.join("failures.jsonl"), &all.failures)?;
    write_json(&args.output.join("summary.json"), &summaries)?;
    let table = ablation_report(&scored)?;
    write_atomic(&args.output.join("ablation.txt"), table.to_text().as_bytes())?;
    write_atomic(&args.output.join("ablation.csv"), table.to_csv().as_bytes())?;
    if let Some(m) = &mock {
        write_jsonl(&args.output.join("mock_calls.jsonl"), &m.call_log())?;
    }
    print!("{}", table.to_text());

    if all.results.is_empty() && !all.failures.is_empty() {
        return Err(coded(
            VALIDATION,
            format!(
                "no video produced a result; see {}",
                args.output.join("failures.jsonl").display()
            ),
        ));
    }
    Ok(())
}

pub fn scaffold(args: ScaffoldArgs, mut config: RunConfig) -> Result<()> {
    set_if(&mut config.seed, args.seed);
    let p = prepare(&args.input, &mut config)?;
    let jobs: Vec<(&VideoRecord, AblationMode)> = p
        .records
        .iter()
        .flat_map(|r| p.modes.iter().map(move |&m| (r, m)))
        .collect();
    let hashes: Vec<(String, String, AblationMode)> = jobs
        .par_iter()
        .map(|&(record, mode)| {
            let req = prepare_request(record, mode, &config.pipeline, &p.registry, &p.template, &p.media)?;
            Ok((record.video_id.clone(), request_hash(&req), mode))
        })
        .collect::<affectguard_core::Result<_>>()?;

    let mut rng = ChaCha8Rng::seed_from_u64(config.seed);
    let mut fixtures = MockFixtures::default();
    for (video_id, hash, mode) in hashes {
        let text = format!("Placeholder description of video {video_id} ({} inputs).", mode.label());
        let emotion = if rng.random_bool(0.5) { "positive" } else { "negative" };
        let confidence: u32 = rng.random_range(0..=10);
        let judge = JudgeRequest {
            prompt: p.template.judge_prompt(&text),
        };
        fixtures.judge.insert(
            request_hash(&judge),
            format!("EMOTION: {emotion}\nCONFIDENCE: {confidence}"),
        );
        fixtures.mllm.insert(hash, text);
    }
    write_atomic(&args.output, fixtures.to_json().as_bytes())?;
    tracing::info!(entries = fixtures.mllm.len(), output = %args.output.display(), "wrote fixtures");
    Ok(())
}
