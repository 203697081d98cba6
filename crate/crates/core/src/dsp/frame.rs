//! Framing, Hann windowing and the overlap-add reconstruction that undoes them.

use std::f64::consts::PI;

use super::signal::{AudioSignal, FrameLayout, FrameParams};
use crate::error::{Error, Result};

/// Divisor floor used where the shifted windows barely overlap.
pub const OLA_FLOOR: f64 = 1e-6;

/// Periodic Hann window, `w[n] = 0.5 (1 - cos(2 pi n / len))`.
///
/// The periodic form makes copies shifted by `len / 2` sum to exactly one.
pub fn hann_window(len: usize) -> Result<Vec<f64>> {
    if len < 2 {
        return Err(Error::invalid(format!("window length {len} is below 2")));
    }
    let n = len as f64;
    Ok((0..len)
        .map(|i| 0.5 * (1.0 - (2.0 * PI * i as f64 / n).cos()))
        .collect())
}

/// Splits `audio` into frames of `win_len` samples starting every `shift_len`
/// samples. The final frame is zero-padded to full length.
pub fn frame_signal(audio: &AudioSignal, params: &FrameParams) -> Result<Vec<Vec<f64>>> {
    let layout = params.layout(audio.sample_rate_hz())?;
    frame_samples(audio.samples(), &layout)
}

pub fn frame_samples(samples: &[f64], layout: &FrameLayout) -> Result<Vec<Vec<f64>>> {
    if samples.is_empty() {
        return Err(Error::EmptyInput("cannot frame an empty signal"));
    }
    let count = layout.frame_count(samples.len());
    Ok((0..count)
        .map(|i| {
            let start = i * layout.shift_len;
            let mut frame = vec![0.0; layout.win_len];
            if start < samples.len() {
                let end = (start + layout.win_len).min(samples.len());
                frame[..end - start].copy_from_slice(&samples[start..end]);
            }
            frame
        })
        .collect())
}

/// Sums Hann-windowed frames back at their offsets and divides by the summed
/// window envelope (floored at [`OLA_FLOOR`]). The result is cut or
/// zero-extended to `total_length`.
pub fn overlap_add(frames: &[Vec<f64>], layout: &FrameLayout, total_length: usize) -> Result<Vec<f64>> {
    if frames.is_empty() {
        return Ok(vec![0.0; total_length]);
    }
    let window = hann_window(layout.win_len)?;
    let span = (frames.len() - 1) * layout.shift_len + layout.win_len;
    let mut acc = vec![0.0; span];
    let mut envelope = vec![0.0; span];
    for (i, frame) in frames.iter().enumerate() {
        if frame.len() != layout.win_len {
            return Err(Error::invalid(format!(
                "frame {i} has {} samples, expected {}",
                frame.len(),
                layout.win_len
            )));
        }
        let start = i * layout.shift_len;
        for (k, (&x, &w)) in frame.iter().zip(&window).enumerate() {
            acc[start + k] += x;
            envelope[start + k] += w;
        }
    }
    let mut out: Vec<f64> = acc.iter().zip(&envelope).map(|(&a, &e)| a / e.max(OLA_FLOOR)).collect();
    out.resize(total_length, 0.0);
    Ok(out)
}

pub(crate) fn apply_window(frame: &mut [f64], window: &[f64]) {
    for (x, w) in frame.iter_mut().zip(window) {
        *x *= w;
    }
}
