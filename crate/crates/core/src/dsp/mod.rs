//! Numerical signal-processing primitives. Everything here is a pure function
//! of its inputs.

mod frame;
mod lpc;
mod mel;
mod resample;
mod roots;
mod signal;

pub(crate) use frame::apply_window;
pub use frame::{frame_samples, frame_signal, hann_window, overlap_add, OLA_FLOOR};
pub use lpc::{
    autocorrelation, lpc_levinson, lpc_residual, reflection_coefficients, synthesize, LpcCoefficients, LpcFrame,
};
pub use mel::{
    hz_to_mel, mel_spectrogram, mel_to_hz, stft_geometry, MelFilterbank, MelSpectrogram, DEFAULT_MEL_BINS, FFT_SIZE,
    LOG_FLOOR, STFT_HOP_MS, STFT_WIN_MS,
};
pub use resample::{resample, resampled_len, KAISER_BETA, TAPS_PER_PHASE};
pub(crate) use roots::conjugate_partners;
pub use roots::{poles_to_coeffs, poly_roots, PoleSet, C64, IMAG_RESIDUE_MAX, REAL_SNAP};
pub use signal::{AudioSignal, FrameLayout, FrameParams};
