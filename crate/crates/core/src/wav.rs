//! RIFF/WAVE reading and writing.
//!
//! Supported encodings are 16-bit integer PCM and 32-bit IEEE float, mono or
//! stereo. Multi-channel input is downmixed by averaging. Integer samples map
//! to `[-1, 1)` by dividing by 32768 and are written back with the same scale,
//! so a decode/encode round trip is lossless.

use std::io::Cursor;
use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::dsp::AudioSignal;
use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum WavEncoding {
    Pcm16,
    Float32,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct WavInfo {
    pub encoding: WavEncoding,
    pub channels: u16,
    pub sample_rate_hz: u32,
}

const I16_SCALE: f64 = 32768.0;

fn audio_err(source: &Path, e: impl std::fmt::Display) -> Error {
    Error::Audio {
        path: source.to_path_buf(),
        message: e.to_string(),
    }
}

/// Decodes a WAV byte buffer, downmixing to mono. `source` only labels errors.
pub fn decode_wav(bytes: &[u8], source: &Path) -> Result<(AudioSignal, WavInfo)> {
    let reader = hound::WavReader::new(Cursor::new(bytes)).map_err(|e| audio_err(source, e))?;
    let spec = reader.spec();
    let encoding = match (spec.sample_format, spec.bits_per_sample) {
        (hound::SampleFormat::Int, 16) => WavEncoding::Pcm16,
        (hound::SampleFormat::Float, 32) => WavEncoding::Float32,
        (fmt, bits) => {
            return Err(audio_err(source, format!("unsupported encoding {fmt:?} {bits}-bit")));
        }
    };
    let channels = spec.channels as usize;
    if channels == 0 {
        return Err(audio_err(source, "zero channels"));
    }
    let interleaved: Vec<f64> = match encoding {
        WavEncoding::Pcm16 => reader
            .into_samples::<i16>()
            .map(|s| s.map(|v| v as f64 / I16_SCALE))
            .collect::<std::result::Result<_, _>>(),
        WavEncoding::Float32 => reader
            .into_samples::<f32>()
            .map(|s| s.map(f64::from))
            .collect::<std::result::Result<_, _>>(),
    }
    .map_err(|e| audio_err(source, e))?;
    if !interleaved.len().is_multiple_of(channels) {
        return Err(audio_err(source, "truncated sample data"));
    }
    let mono: Vec<f64> = interleaved
        .chunks_exact(channels)
        .map(|c| c.iter().sum::<f64>() / channels as f64)
        .collect();
    let info = WavInfo {
        encoding,
        channels: spec.channels,
        sample_rate_hz: spec.sample_rate,
    };
    Ok((AudioSignal::new(mono, spec.sample_rate)?, info))
}

pub fn read_wav(path: &Path) -> Result<(AudioSignal, WavInfo)> {
    let bytes = std::fs::read(path).map_err(|e| Error::io(path, e))?;
    decode_wav(&bytes, path)
}

/// Encodes a mono signal. Integer output is clamped to the representable range.
pub fn encode_wav(signal: &AudioSignal, encoding: WavEncoding) -> Result<Vec<u8>> {
    let spec = hound::WavSpec {
        channels: 1,
        sample_rate: signal.sample_rate_hz(),
        bits_per_sample: match encoding {
            WavEncoding::Pcm16 => 16,
            WavEncoding::Float32 => 32,
        },
        sample_format: match encoding {
            WavEncoding::Pcm16 => hound::SampleFormat::Int,
            WavEncoding::Float32 => hound::SampleFormat::Float,
        },
    };
    let to_err = |e: hound::Error| Error::Audio {
        path: "<memory>".into(),
        message: e.to_string(),
    };
    let mut cursor = Cursor::new(Vec::new());
    {
        let mut w = hound::WavWriter::new(&mut cursor, spec).map_err(to_err)?;
        for &x in signal.samples() {
            match encoding {
                WavEncoding::Pcm16 => {
                    let v = (x * I16_SCALE).round().clamp(i16::MIN as f64, i16::MAX as f64) as i16;
                    w.write_sample(v).map_err(to_err)?;
                }
                WavEncoding::Float32 => w.write_sample(x as f32).map_err(to_err)?,
            }
        }
        w.finalize().map_err(to_err)?;
    }
    Ok(cursor.into_inner())
}
