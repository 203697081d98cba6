use std::collections::HashMap;
use std::path::{Path, PathBuf};
use std::sync::Arc;
use std::time::Instant;

use futures::stream::{self, StreamExt};
use serde::{Deserialize, Serialize};

use super::client::{mllm_infer, LlmClient, MllmClient, MllmRequest, TensorPayload};
use super::judge::judge_emotion;
use super::prompt::{build_mllm_prompt, AblationMode, PromptContext, PromptTemplate};
use super::sampling::{sample_frames_uniform, segment_audio, SamplingConfig};
use crate::annotations::{Emotion, NfblRegistry, VideoRecord};
use crate::dsp::{mel_spectrogram, resample};
use crate::error::{Error, Result};
use crate::metrics::Scored;
use crate::video::FrameImage;

/// De-identified media laid out as `<root>/<video_id>/frames/*.ppm` plus
/// `<root>/<video_id>/audio.wav`. Frames are ordered by file name.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct MediaRoot {
    root: PathBuf,
}

impl MediaRoot {
    pub fn new(root: impl Into<PathBuf>) -> Self {
        Self { root: root.into() }
    }

    pub fn root(&self) -> &Path {
        &self.root
    }

    pub fn frames_dir(&self, video_id: &str) -> PathBuf {
        self.root.join(video_id).join("frames")
    }

    pub fn audio_path(&self, video_id: &str) -> PathBuf {
        self.root.join(video_id).join("audio.wav")
    }

    pub fn frame_paths(&self, video_id: &str) -> Result<Vec<PathBuf>> {
        list_ppm(&self.frames_dir(video_id))
    }
}

/// `*.ppm` files in `dir`, sorted by file name.
pub fn list_ppm(dir: &Path) -> Result<Vec<PathBuf>> {
    let mut paths: Vec<PathBuf> = std::fs::read_dir(dir)
        .map_err(|e| Error::io(dir, e))?
        .filter_map(|entry| entry.ok().map(|e| e.path()))
        .filter(|p| p.is_file() && p.extension().is_some_and(|x| x.eq_ignore_ascii_case("ppm")))
        .collect();
    paths.sort();
    Ok(paths)
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct PipelineConfig {
    pub sampling: SamplingConfig,
    /// Rate the audio is resampled to before feature extraction.
    pub audio_sample_rate_hz: u32,
    /// Concurrent videos in a batch.
    pub workers: usize,
    /// Wall-clock timing in result records. Off gives byte-identical reruns.
    pub record_timing: bool,
}

impl Default for PipelineConfig {
    fn default() -> Self {
        Self {
            sampling: SamplingConfig::default(),
            audio_sample_rate_hz: 16_000,
            workers: std::thread::available_parallelism().map_or(1, |n| n.get()),
            record_timing: true,
        }
    }
}

impl PipelineConfig {
    pub fn validate(&self) -> Result<()> {
        self.sampling.validate()?;
        if self.audio_sample_rate_hz == 0 || self.workers == 0 {
            return Err(Error::invalid("audio_sample_rate_hz and workers must be positive"));
        }
        Ok(())
    }
}

/// Everything a run needs besides the records. Cheap to clone.
#[derive(Clone)]
pub struct PipelineContext {
    pub config: Arc<PipelineConfig>,
    pub registry: Arc<NfblRegistry>,
    pub template: Arc<PromptTemplate>,
    pub media: Arc<MediaRoot>,
    pub mllm: Arc<dyn MllmClient>,
    pub judge: Arc<dyn LlmClient>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Timing {
    pub prepare_ms: f64,
    pub mllm_ms: f64,
    pub judge_ms: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ResultRecord {
    pub video_id: String,
    pub mode: AblationMode,
    pub emotion: Emotion,
    pub confidence: f64,
    pub confidence_clamped: bool,
    pub judge_retried: bool,
    pub mllm_text: String,
    pub timing: Option<Timing>,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct FailureRecord {
    pub video_id: String,
    pub mode: AblationMode,
    pub error: String,
}

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
pub struct BatchOutcome {
    pub results: Vec<ResultRecord>,
    pub failures: Vec<FailureRecord>,
}

/// Loads sampled frames, audio spectrograms and the prompt for one video.
pub fn prepare_request(
    record: &VideoRecord,
    mode: AblationMode,
    config: &PipelineConfig,
    registry: &NfblRegistry,
    template: &PromptTemplate,
    media: &MediaRoot,
) -> Result<MllmRequest> {
    let sampling = &config.sampling;
    let paths = media.frame_paths(&record.video_id)?;
    if paths.is_empty() {
        return Err(Error::InsufficientData(format!(
            "no frames under {}",
            media.frames_dir(&record.video_id).display()
        )));
    }
    let frame_indices = sample_frames_uniform(paths.len(), sampling.frame_count);
    let mut frames = Vec::with_capacity(frame_indices.len());
    for &i in &frame_indices {
        frames.push(TensorPayload::from_frame(&FrameImage::load_ppm(&paths[i])?));
    }

    let mut spectrograms = Vec::new();
    if mode.uses_audio() {
        let (audio, _) = crate::wav::read_wav(&media.audio_path(&record.video_id))?;
        let audio = if audio.sample_rate_hz() == config.audio_sample_rate_hz {
            audio
        } else {
            resample(&audio, config.audio_sample_rate_hz)?
        };
        let mut clips = segment_audio(&audio, sampling.audio_segment_s)?;
        if let Some(cap) = sampling.max_segments {
            clips.truncate(cap);
        }
        for clip in &clips {
            spectrograms.push(TensorPayload::from_spectrogram(&mel_spectrogram(
                clip,
                sampling.mel_bins,
            )?));
        }
    }

    let ctx = PromptContext {
        mode,
        frame_count: frames.len(),
        segment_count: spectrograms.len(),
        segment_s: sampling.audio_segment_s,
    };
    let prompt = build_mllm_prompt(&record.clips, registry, template, &ctx)?;
    Ok(MllmRequest {
        video_id: record.video_id.clone(),
        mode,
        prompt,
        frame_indices,
        frames,
        spectrograms,
    })
}

fn elapsed_ms(t: Instant) -> f64 {
    (t.elapsed().as_secs_f64() * 1e3 * 1e3).round() / 1e3
}

/// Runs both inference stages for one video.
pub async fn run_pipeline(record: &VideoRecord, mode: AblationMode, ctx: &PipelineContext) -> Result<ResultRecord> {
    let t0 = Instant::now();
    let request = {
        let (record, c) = (record.clone(), ctx.clone());
        tokio::task::spawn_blocking(move || {
            prepare_request(&record, mode, &c.config, &c.registry, &c.template, &c.media)
        })
        .await
        .map_err(|e| Error::Numerical(format!("preparation task failed: {e}")))??
    };
    let prepare_ms = elapsed_ms(t0);

    let t1 = Instant::now();
    let text = mllm_infer(ctx.mllm.as_ref(), &request).await?;
    let mllm_ms = elapsed_ms(t1);

    let t2 = Instant::now();
    let outcome = judge_emotion(ctx.judge.as_ref(), &text, &ctx.template).await?;
    let judge_ms = elapsed_ms(t2);

    Ok(ResultRecord {
        video_id: record.video_id.clone(),
        mode,
        emotion: outcome.verdict.emotion,
        confidence: outcome.verdict.confidence,
        confidence_clamped: outcome.verdict.confidence_clamped,
        judge_retried: outcome.retried,
        mllm_text: text,
        timing: ctx.config.record_timing.then_some(Timing {
            prepare_ms,
            mllm_ms,
            judge_ms,
        }),
    })
}

/// Runs every record with at most `config.workers` in flight. Each record
/// yields exactly one result or one failure; both lists are sorted by id.
pub async fn run_batch(records: &[VideoRecord], mode: AblationMode, ctx: &PipelineContext) -> BatchOutcome {
    let workers = ctx.config.workers.max(1);
    let outcomes: Vec<(String, Result<ResultRecord>)> = stream::iter(records)
        .map(|record| async move { (record.video_id.clone(), run_pipeline(record, mode, ctx).await) })
        .buffer_unordered(workers)
        .collect()
        .await;

    let mut batch = BatchOutcome::default();
    for (video_id, outcome) in outcomes {
        match outcome {
            Ok(r) => batch.results.push(r),
            Err(e) => {
                tracing::warn!(%video_id, mode = %mode, error = %e, "video failed");
                batch.failures.push(FailureRecord {
                    video_id,
                    mode,
                    error: e.to_string(),
                })
            }
        }
    }
    batch.results.sort_by(|a, b| a.video_id.cmp(&b.video_id));
    batch.failures.sort_by(|a, b| a.video_id.cmp(&b.video_id));
    batch
}

/// Pairs results with their ground-truth labels.
pub fn score_results(results: &[ResultRecord], records: &[VideoRecord]) -> Result<Vec<Scored>> {
    let labels: HashMap<&str, Emotion> = records.iter().map(|r| (r.video_id.as_str(), r.emotion)).collect();
    results
        .iter()
        .map(|r| {
            let label = labels
                .get(r.video_id.as_str())
                .ok_or_else(|| Error::InsufficientData(format!("no annotation for result `{}`", r.video_id)))?;
            Ok(Scored {
                prediction: r.emotion,
                label: *label,
                confidence: r.confidence,
            })
        })
        .collect()
}
