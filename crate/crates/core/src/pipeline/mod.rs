//! Multimodal input preparation and the two inference stages.
//!
//! A video's sampled frames, audio spectrograms and (optionally) its NFBL
//! annotations go to a multimodal model through [`MllmClient`]; the model's
//! free-text answer is then classified by a text model through [`LlmClient`].

pub mod client;
pub mod judge;
pub mod prompt;
pub mod run;
pub mod sampling;

pub use client::{
    mllm_infer, request_hash, CallLogEntry, JudgeRequest, LlmClient, MllmClient, MllmRequest, MockClient, MockFixtures,
    RemoteConfig, RemoteEndpoint, RemoteLlmClient, RemoteMllmClient, TensorPayload, TextResponse,
};
pub use judge::{judge_emotion, parse_judge_reply, JudgeOutcome, JudgeVerdict, CONFIDENCE_MAX};
pub use prompt::{build_mllm_prompt, format_seconds, render_nfbl, AblationMode, PromptContext, PromptTemplate};
pub use run::{
    list_ppm, prepare_request, run_batch, run_pipeline, score_results, BatchOutcome, FailureRecord, MediaRoot,
    PipelineConfig, PipelineContext, ResultRecord, Timing,
};
pub use sampling::{sample_frames_uniform, segment_audio, SamplingConfig};
