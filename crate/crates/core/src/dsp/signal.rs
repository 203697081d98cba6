use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Mono audio with its sampling rate. Samples are nominally in `[-1, 1]`.
#[derive(Debug, Clone, PartialEq)]
pub struct AudioSignal {
    samples: Vec<f64>,
    sample_rate_hz: u32,
}

impl AudioSignal {
    pub fn new(samples: Vec<f64>, sample_rate_hz: u32) -> Result<Self> {
        if sample_rate_hz == 0 {
            return Err(Error::invalid("sample rate must be positive"));
        }
        if let Some(i) = samples.iter().position(|s| !s.is_finite()) {
            return Err(Error::invalid(format!("sample {i} is not finite")));
        }
        Ok(Self {
            samples,
            sample_rate_hz,
        })
    }

    pub fn samples(&self) -> &[f64] {
        &self.samples
    }

    pub fn into_samples(self) -> Vec<f64> {
        self.samples
    }

    pub fn sample_rate_hz(&self) -> u32 {
        self.sample_rate_hz
    }

    pub fn len(&self) -> usize {
        self.samples.len()
    }

    pub fn is_empty(&self) -> bool {
        self.samples.is_empty()
    }

    pub fn duration_s(&self) -> f64 {
        self.samples.len() as f64 / f64::from(self.sample_rate_hz)
    }
}

/// Analysis framing in milliseconds plus the LPC order used per frame.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct FrameParams {
    pub win_ms: f64,
    pub shift_ms: f64,
    pub lpc_order: usize,
}

impl Default for FrameParams {
    fn default() -> Self {
        Self {
            win_ms: 20.0,
            shift_ms: 10.0,
            lpc_order: 20,
        }
    }
}

/// Frame geometry resolved to whole samples for a given rate.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct FrameLayout {
    pub win_len: usize,
    pub shift_len: usize,
}

impl FrameParams {
    pub fn new(win_ms: f64, shift_ms: f64, lpc_order: usize) -> Result<Self> {
        let params = Self {
            win_ms,
            shift_ms,
            lpc_order,
        };
        params.check()?;
        Ok(params)
    }

    fn check(&self) -> Result<()> {
        if !(self.win_ms.is_finite() && self.win_ms > 0.0) {
            return Err(Error::invalid("win_ms must be positive"));
        }
        if !(self.shift_ms.is_finite() && self.shift_ms > 0.0) {
            return Err(Error::invalid("shift_ms must be positive"));
        }
        if self.shift_ms > self.win_ms {
            return Err(Error::invalid("shift_ms must not exceed win_ms"));
        }
        if self.lpc_order == 0 {
            return Err(Error::invalid("lpc_order must be positive"));
        }
        Ok(())
    }

    /// Resolves the millisecond geometry to samples and checks the order
    /// against the frame length at this rate.
    pub fn layout(&self, sample_rate_hz: u32) -> Result<FrameLayout> {
        self.check()?;
        let rate = f64::from(sample_rate_hz);
        let win_len = (self.win_ms * rate / 1000.0).round() as usize;
        let shift_len = (self.shift_ms * rate / 1000.0).round() as usize;
        if win_len < 2 || shift_len == 0 {
            return Err(Error::invalid(format!(
                "frame of {} ms / shift {} ms is shorter than a sample at {sample_rate_hz} Hz",
                self.win_ms, self.shift_ms
            )));
        }
        if self.lpc_order >= win_len {
            return Err(Error::invalid(format!(
                "lpc_order {} must be below the frame length of {win_len} samples",
                self.lpc_order
            )));
        }
        Ok(FrameLayout { win_len, shift_len })
    }
}

impl FrameLayout {
    /// Number of frames needed to cover `n` samples, with the last one zero-padded.
    pub fn frame_count(&self, n: usize) -> usize {
        let span = (n + self.shift_len).saturating_sub(self.win_len).max(1);
        span.div_ceil(self.shift_len)
    }
}
