use serde::{Deserialize, Serialize};

use crate::dsp::AudioSignal;
use crate::error::{Error, Result};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct SamplingConfig {
    pub frame_count: usize,
    pub audio_segment_s: f64,
    pub mel_bins: usize,
    /// Upper bound on audio segments passed to the model. `None` keeps all.
    pub max_segments: Option<usize>,
}

impl Default for SamplingConfig {
    fn default() -> Self {
        Self {
            frame_count: 32,
            audio_segment_s: 2.0,
            mel_bins: crate::dsp::DEFAULT_MEL_BINS,
            max_segments: None,
        }
    }
}

impl SamplingConfig {
    pub fn validate(&self) -> Result<()> {
        if self.frame_count == 0 {
            return Err(Error::invalid("frame_count must be at least 1"));
        }
        if !(self.audio_segment_s.is_finite() && self.audio_segment_s > 0.0) {
            return Err(Error::invalid(format!(
                "audio_segment_s must be positive, got {}",
                self.audio_segment_s
            )));
        }
        if self.mel_bins == 0 {
            return Err(Error::invalid("mel_bins must be at least 1"));
        }
        Ok(())
    }
}

/// Segment-center sampling: index `i` is `floor((i + 0.5) * total / m)`.
///
/// Computed in integers as `((2i + 1) * total) / (2m)`. Indices repeat when
/// `total < m`; both arguments of zero yield an empty sequence.
pub fn sample_frames_uniform(total_frames: usize, m: usize) -> Vec<usize> {
    if total_frames == 0 {
        return Vec::new();
    }
    let (total, m2) = (total_frames as u128, 2 * m as u128);
    (0..m as u128).map(|i| ((2 * i + 1) * total / m2) as usize).collect()
}

/// Consecutive non-overlapping clips of `seg_s` seconds; the remainder is dropped.
pub fn segment_audio(audio: &AudioSignal, seg_s: f64) -> Result<Vec<AudioSignal>> {
    if !(seg_s.is_finite() && seg_s > 0.0) {
        return Err(Error::invalid(format!("segment length must be positive, got {seg_s}")));
    }
    if audio.is_empty() {
        return Err(Error::EmptyInput("audio to segment"));
    }
    let seg_len = (seg_s * audio.sample_rate_hz() as f64).round() as usize;
    if seg_len == 0 {
        return Err(Error::invalid("segment shorter than one sample"));
    }
    audio
        .samples()
        .chunks_exact(seg_len)
        .map(|c| AudioSignal::new(c.to_vec(), audio.sample_rate_hz()))
        .collect()
}
