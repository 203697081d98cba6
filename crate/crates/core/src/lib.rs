//! De-identification, annotation handling and two-stage multimodal inference
//! for long-video emotion analysis.
//!
//! * [`dsp`] and [`anonymizer`] remove speaker identity from audio by warping
//!   LPC pole angles.
//! * [`video`] blurs detected face regions in decoded frames.
//! * [`annotations`] models non-facial body language (NFBL) clips and
//!   per-video emotion labels.
//! * [`pipeline`] prepares frames, spectrograms and NFBL text for a
//!   multimodal model and has a text model judge the answer.
//! * [`metrics`] scores binary emotion predictions.
//! * [`wav`] reads and writes 16-bit PCM and 32-bit float WAV files.

pub mod annotations;
pub mod anonymizer;
pub mod dsp;
pub mod error;
pub mod metrics;
pub mod pipeline;
pub mod video;
pub mod wav;

pub use annotations::Emotion;
pub use error::{Error, Result};
