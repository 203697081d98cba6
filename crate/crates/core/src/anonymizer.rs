//! McAdams speaker anonymization: per-frame LPC analysis, pole-angle warping
//! `theta -> theta^lambda`, and resynthesis of the unchanged residual through
//! the warped all-pole filter.

use std::f64::consts::PI;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::dsp::{
    apply_window, conjugate_partners, frame_samples, hann_window, overlap_add, synthesize, AudioSignal, FrameParams,
    LpcFrame, PoleSet, C64,
};
use crate::error::{Error, Result};

/// Upper bound on warped pole magnitudes.
pub const MAX_POLE_MAGNITUDE: f64 = 1.0 - 1e-6;
/// Peak level used when the resynthesised signal would clip.
pub const RENORMALIZED_PEAK: f64 = 0.99;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct AnonymizationParams {
    pub frame: FrameParams,
    pub mcadams_lambda: f64,
    pub complex_angle_epsilon: f64,
}

impl Default for AnonymizationParams {
    fn default() -> Self {
        Self {
            frame: FrameParams::default(),
            mcadams_lambda: 0.8,
            complex_angle_epsilon: 1e-6,
        }
    }
}

impl AnonymizationParams {
    pub fn validate(&self) -> Result<()> {
        if !(self.mcadams_lambda > 0.0 && self.mcadams_lambda < 2.0) {
            return Err(Error::invalid(format!(
                "McAdams coefficient {} is outside (0, 2)",
                self.mcadams_lambda
            )));
        }
        if !(self.complex_angle_epsilon > 0.0 && self.complex_angle_epsilon < PI / 2.0) {
            return Err(Error::invalid("complex_angle_epsilon must be in (0, pi/2)"));
        }
        FrameParams::new(self.frame.win_ms, self.frame.shift_ms, self.frame.lpc_order)?;
        Ok(())
    }
}

/// Raises the angle of every complex pole to the power `lambda`.
///
/// Poles whose angle is within `epsilon` of 0 or pi count as real and are left
/// alone. Warped angles are clamped to `[epsilon, pi - epsilon]` and
/// magnitudes to [`MAX_POLE_MAGNITUDE`]; each conjugate partner is rebuilt as
/// the exact mirror of its upper-half pole.
pub fn warp_pole_angles(poles: &PoleSet, lambda: f64, epsilon: f64) -> PoleSet {
    let src = poles.poles();
    let partners = conjugate_partners(src).expect("PoleSet is conjugate-closed");
    let mut out = src.to_vec();
    for (i, &j) in partners.iter().enumerate() {
        if j == i || src[i].im < 0.0 || (src[i].im == 0.0 && j < i) {
            continue;
        }
        let p = src[i];
        let theta = p.arg().abs();
        if theta <= epsilon || theta >= PI - epsilon {
            continue;
        }
        let warped = theta.powf(lambda).clamp(epsilon, PI - epsilon);
        let radius = p.norm().min(MAX_POLE_MAGNITUDE);
        let upper = C64::from_polar(radius, warped);
        out[i] = upper;
        out[j] = upper.conj();
    }
    PoleSet::from_parts_unchecked(out, poles.gain())
}

/// Runs one Hann-windowed frame through analysis, warping and resynthesis.
pub fn anonymize_frame(windowed: &[f64], params: &AnonymizationParams) -> Result<Vec<f64>> {
    if windowed.iter().all(|&x| x == 0.0) {
        return Ok(vec![0.0; windowed.len()]);
    }
    let lpc = LpcFrame::analyze(windowed, params.frame.lpc_order)?;
    let poles = PoleSet::from_lpc(&lpc.coefficients)?;
    let warped = warp_pole_angles(&poles, params.mcadams_lambda, params.complex_angle_epsilon);
    let coefficients = warped.to_coefficients()?;
    synthesize(&lpc.residual, &coefficients)
}

/// Anonymizes a whole signal. Output has the input's length and rate.
///
/// The signal is zero-padded by `win - shift` samples on both sides before
/// framing so every original sample sits under a full set of overlapping
/// windows; the padding is removed after overlap-add. The result is rescaled
/// to a 0.99 peak only when it would otherwise exceed 1.
pub fn anonymize_mcadams(audio: &AudioSignal, params: &AnonymizationParams) -> Result<AudioSignal> {
    if audio.is_empty() {
        return Err(Error::EmptyInput("cannot anonymize empty audio"));
    }
    params.validate()?;
    let layout = params.frame.layout(audio.sample_rate_hz())?;
    let pad = layout.win_len - layout.shift_len;
    let n = audio.len();

    let mut padded = vec![0.0; n + 2 * pad];
    padded[pad..pad + n].copy_from_slice(audio.samples());
    let window = hann_window(layout.win_len)?;

    let frames = frame_samples(&padded, &layout)?;
    let processed = frames
        .into_par_iter()
        .map(|mut frame| {
            apply_window(&mut frame, &window);
            anonymize_frame(&frame, params)
        })
        .collect::<Result<Vec<_>>>()?;

    let mut out = overlap_add(&processed, &layout, padded.len())?;
    out.truncate(pad + n);
    out.drain(..pad);

    let peak = out.iter().fold(0.0f64, |m, x| m.max(x.abs()));
    if peak > 1.0 {
        let scale = RENORMALIZED_PEAK / peak;
        out.iter_mut().for_each(|x| *x *= scale);
    }
    AudioSignal::new(out, audio.sample_rate_hz())
}
