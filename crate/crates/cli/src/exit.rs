//! Process exit codes: 0 success, 1 usage, 2 I/O, 3 remote client, 4 validation.

use affectguard_core::Error;

pub const USAGE: u8 = 1;
pub const IO: u8 = 2;
pub const REMOTE: u8 = 3;
pub const VALIDATION: u8 = 4;

/// An error that carries its own exit code.
#[derive(Debug, thiserror::Error)]
#[error("{message}")]
pub struct Coded {
    pub code: u8,
    pub message: String,
}

pub fn coded(code: u8, message: impl Into<String>) -> anyhow::Error {
    Coded {
        code,
        message: message.into(),
    }
    .into()
}

fn core_code(e: &Error) -> u8 {
    match e {
        Error::Io { .. } | Error::Audio { .. } => IO,
        Error::DetectorUnavailable(_)
        | Error::ClientUnavailable { .. }
        | Error::ResponseEmpty
        | Error::FixtureMissing { .. } => REMOTE,
        Error::InvalidParam(_) => USAGE,
        _ => VALIDATION,
    }
}

/// First classifiable cause in the chain decides; unknown errors count as I/O.
pub fn exit_code(err: &anyhow::Error) -> u8 {
    for cause in err.chain() {
        if let Some(c) = cause.downcast_ref::<Coded>() {
            return c.code;
        }
        if let Some(e) = cause.downcast_ref::<Error>() {
            return core_code(e);
        }
        if cause.downcast_ref::<std::io::Error>().is_some() {
            return IO;
        }
        if cause.downcast_ref::<serde_json::Error>().is_some() || cause.downcast_ref::<toml::de::Error>().is_some() {
            return VALIDATION;
        }
    }
    IO
}
