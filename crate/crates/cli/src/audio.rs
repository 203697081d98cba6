use std::path::PathBuf;

use affectguard_core::anonymizer::anonymize_mcadams;
use affectguard_core::wav::{decode_wav, encode_wav};
use anyhow::{Context, Result};
use clap::Args;

use crate::config::{set_if, RunConfig};
use crate::output::write_atomic;

#[derive(Debug, Args)]
pub struct AnonymizeArgs {
    /// Input WAV (16-bit PCM or 32-bit float, mono or stereo).
    pub input: PathBuf,
    /// Output WAV, written in the input's encoding as mono.
    pub output: PathBuf,
    /// McAdams coefficient [default: 0.8]
    #[arg(long, env = "AFFECTGUARD_LAMBDA")]
    pub lambda: Option<f64>,
    /// Analysis window in milliseconds [default: 20]
    #[arg(long, env = "AFFECTGUARD_WIN_MS")]
    pub win_ms: Option<f64>,
    /// Frame shift in milliseconds [default: 10]
    #[arg(long, env = "AFFECTGUARD_SHIFT_MS")]
    pub shift_ms: Option<f64>,
    /// LPC order [default: 20]
    #[arg(long, env = "AFFECTGUARD_LPC_ORDER")]
    pub lpc_order: Option<usize>,
}

pub fn anonymize(args: AnonymizeArgs, mut config: RunConfig) -> Result<()> {
    let params = &mut config.anonymization;
    set_if(&mut params.mcadams_lambda, args.lambda);
    set_if(&mut params.frame.win_ms, args.win_ms);
    set_if(&mut params.frame.shift_ms, args.shift_ms);
    set_if(&mut params.frame.lpc_order, args.lpc_order);
    params.validate()?;
    tracing::info!(config = %serde_json::to_string(&params)?, "effective anonymization config");

    let bytes = std::fs::read(&args.input).with_context(|| format!("reading {}", args.input.display()))?;
    let (signal, info) = decode_wav(&bytes, &args.input)?;
    tracing::info!(
        samples = signal.len(),
        rate = info.sample_rate_hz,
        channels = info.channels,
        encoding = ?info.encoding,
        "decoded input"
    );
    let out = anonymize_mcadams(&signal, params)?;
    write_atomic(&args.output, &encode_wav(&out, info.encoding)?)?;
    tracing::info!(output = %args.output.display(), "wrote anonymized audio");
    Ok(())
}
