//! Rational-ratio resampling with a Kaiser-windowed sinc interpolator.

use std::f64::consts::PI;

use super::signal::AudioSignal;
use crate::error::{Error, Result};

pub const KAISER_BETA: f64 = 8.6;
/// Kernel taps per output phase, counted at the lower of the two rates.
pub const TAPS_PER_PHASE: usize = 64;

fn gcd(mut a: u64, mut b: u64) -> u64 {
    while b != 0 {
        (a, b) = (b, a % b);
    }
    a
}

/// Zeroth-order modified Bessel function of the first kind (power series).
pub(crate) fn bessel_i0(x: f64) -> f64 {
    let half = x / 2.0;
    let mut term = 1.0;
    let mut sum = 1.0;
    for k in 1..500 {
        term *= half / k as f64;
        let t2 = term * term;
        sum += t2;
        if t2 < sum * 1e-17 {
            break;
        }
    }
    sum
}

fn sinc(x: f64) -> f64 {
    if x == 0.0 {
        1.0
    } else {
        (PI * x).sin() / (PI * x)
    }
}

/// Output length `round(n * target / source)`.
pub fn resampled_len(n: usize, source_hz: u32, target_hz: u32) -> usize {
    let num = n as u128 * u128::from(target_hz) * 2 + u128::from(source_hz);
    (num / (2 * u128::from(source_hz))) as usize
}

/// Resamples to `target_rate_hz`. The anti-aliasing cut-off sits at
/// `min(source, target) / 2`; equal rates return the input untouched.
pub fn resample(audio: &AudioSignal, target_rate_hz: u32) -> Result<AudioSignal> {
    if target_rate_hz == 0 {
        return Err(Error::invalid("target sample rate must be positive"));
    }
    let source = audio.sample_rate_hz();
    if source == target_rate_hz {
        return Ok(audio.clone());
    }
    let g = gcd(u64::from(source), u64::from(target_rate_hz));
    let up = u64::from(target_rate_hz) / g;
    let down = u64::from(source) / g;

    // cut-off in cycles per input sample
    let cutoff = 0.5 * (up as f64 / down as f64).min(1.0);
    let half_width = (TAPS_PER_PHASE / 2) as f64 / (2.0 * cutoff);
    let reach = half_width.ceil() as i64;
    let taps = (2 * reach) as usize;
    let i0_beta = bessel_i0(KAISER_BETA);

    // Phase p covers fractional offset p / up. Tap i multiplies x[n0 - reach + 1 + i].
    let table: Vec<Vec<f64>> = (0..up)
        .map(|phase| {
            let frac = phase as f64 / up as f64;
            let mut row: Vec<f64> = (0..taps)
                .map(|i| {
                    let tau = frac + (reach - 1 - i as i64) as f64;
                    let ratio = tau / half_width;
                    if ratio.abs() >= 1.0 {
                        return 0.0;
                    }
                    let window = bessel_i0(KAISER_BETA * (1.0 - ratio * ratio).sqrt()) / i0_beta;
                    2.0 * cutoff * sinc(2.0 * cutoff * tau) * window
                })
                .collect();
            let sum: f64 = row.iter().sum();
            if sum != 0.0 {
                row.iter_mut().for_each(|h| *h /= sum);
            }
            row
        })
        .collect();

    let x = audio.samples();
    let n = x.len() as i64;
    let out_len = resampled_len(x.len(), source, target_rate_hz);
    let out: Vec<f64> = (0..out_len as u64)
        .map(|j| {
            let pos = j * down;
            let n0 = (pos / up) as i64;
            let row = &table[(pos % up) as usize];
            let first = n0 - reach + 1;
            let lo = (-first).max(0) as usize;
            let hi = ((n - first).max(0) as usize).min(taps);
            (lo..hi).map(|i| row[i] * x[(first + i as i64) as usize]).sum()
        })
        .collect();
    AudioSignal::new(out, target_rate_hz)
}
