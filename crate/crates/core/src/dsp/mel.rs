//! Log-mel spectrogram: 25 ms Hann STFT at a 10 ms hop, triangular mel
//! filters from 0 Hz to Nyquist, `ln(x + 1e-6)` compression.

use rustfft::{num_complex::Complex, FftPlanner};

use super::frame::hann_window;
use super::signal::AudioSignal;
use crate::error::{Error, Result};

pub const STFT_WIN_MS: f64 = 25.0;
pub const STFT_HOP_MS: f64 = 10.0;
pub const FFT_SIZE: usize = 512;
pub const LOG_FLOOR: f64 = 1e-6;
pub const DEFAULT_MEL_BINS: usize = 128;

pub fn hz_to_mel(hz: f64) -> f64 {
    2595.0 * (1.0 + hz / 700.0).log10()
}

pub fn mel_to_hz(mel: f64) -> f64 {
    700.0 * (10f64.powf(mel / 2595.0) - 1.0)
}

/// Log-mel energies, `bin_count` rows by `frame_count` columns.
#[derive(Debug, Clone, PartialEq)]
pub struct MelSpectrogram {
    values: Vec<f64>,
    bin_count: usize,
    frame_count: usize,
}

impl MelSpectrogram {
    pub fn bin_count(&self) -> usize {
        self.bin_count
    }

    pub fn frame_count(&self) -> usize {
        self.frame_count
    }

    pub fn get(&self, bin: usize, frame: usize) -> f64 {
        self.values[bin * self.frame_count + frame]
    }

    /// Row-major `[bin][frame]` storage.
    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub fn frame(&self, frame: usize) -> impl Iterator<Item = f64> + '_ {
        (0..self.bin_count).map(move |b| self.get(b, frame))
    }
}

/// Triangular filters over the non-negative FFT bins.
#[derive(Debug, Clone)]
pub struct MelFilterbank {
    weights: Vec<Vec<f64>>,
    centers_hz: Vec<f64>,
}

impl MelFilterbank {
    pub fn new(bins: usize, sample_rate_hz: u32, fft_size: usize) -> Result<Self> {
        if bins == 0 {
            return Err(Error::invalid("mel bin count must be at least 1"));
        }
        let nyquist = f64::from(sample_rate_hz) / 2.0;
        let top = hz_to_mel(nyquist);
        let edges: Vec<f64> = (0..bins + 2)
            .map(|i| mel_to_hz(top * i as f64 / (bins + 1) as f64))
            .collect();
        let fft_bins = fft_size / 2 + 1;
        let bin_hz = f64::from(sample_rate_hz) / fft_size as f64;
        let weights = edges
            .windows(3)
            .map(|e| {
                let (lo, center, hi) = (e[0], e[1], e[2]);
                (0..fft_bins)
                    .map(|k| {
                        let f = k as f64 * bin_hz;
                        let rise = (f - lo) / (center - lo);
                        let fall = (hi - f) / (hi - center);
                        rise.min(fall).max(0.0)
                    })
                    .collect()
            })
            .collect();
        Ok(Self {
            weights,
            centers_hz: edges[1..=bins].to_vec(),
        })
    }

    pub fn centers_hz(&self) -> &[f64] {
        &self.centers_hz
    }

    pub fn weights(&self) -> &[Vec<f64>] {
        &self.weights
    }

    fn apply(&self, power: &[f64]) -> impl Iterator<Item = f64> + '_ {
        let power = power.to_vec();
        self.weights
            .iter()
            .map(move |w| w.iter().zip(&power).map(|(a, b)| a * b).sum())
    }
}

/// STFT geometry at a given rate; the FFT grows past 512 only when the
/// 25 ms window would not fit.
pub fn stft_geometry(sample_rate_hz: u32) -> (usize, usize, usize) {
    let rate = f64::from(sample_rate_hz);
    let win = ((STFT_WIN_MS * rate / 1000.0).round() as usize).max(2);
    let hop = ((STFT_HOP_MS * rate / 1000.0).round() as usize).max(1);
    let fft = FFT_SIZE.max(win.next_power_of_two());
    (win, hop, fft)
}

pub fn mel_spectrogram(audio: &AudioSignal, bins: usize) -> Result<MelSpectrogram> {
    if bins == 0 {
        return Err(Error::invalid("mel bin count must be at least 1"));
    }
    let (win, hop, fft_size) = stft_geometry(audio.sample_rate_hz());
    let x = audio.samples();
    if x.len() < win {
        return Err(Error::EmptyInput("audio is shorter than one STFT window"));
    }
    let frame_count = (x.len() - win) / hop + 1;
    let window = hann_window(win)?;
    let bank = MelFilterbank::new(bins, audio.sample_rate_hz(), fft_size)?;
    let fft = FftPlanner::<f64>::new().plan_fft_forward(fft_size);

    let mut values = vec![0.0; bins * frame_count];
    let mut buf = vec![Complex::new(0.0, 0.0); fft_size];
    let mut power = vec![0.0; fft_size / 2 + 1];
    for t in 0..frame_count {
        let start = t * hop;
        buf.iter_mut().for_each(|c| *c = Complex::new(0.0, 0.0));
        for (i, (s, w)) in x[start..start + win].iter().zip(&window).enumerate() {
            buf[i].re = s * w;
        }
        fft.process(&mut buf);
        for (p, c) in power.iter_mut().zip(&buf) {
            *p = c.norm_sqr();
        }
        for (b, e) in bank.apply(&power).enumerate() {
            values[b * frame_count + t] = (e + LOG_FLOOR).ln();
        }
    }
    Ok(MelSpectrogram {
        values,
        bin_count: bins,
        frame_count,
    })
}
