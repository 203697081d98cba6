//! Versioned JSON Lines annotation documents.
//!
//! The first non-blank line is a header, every following line one video:
//!
//! ```text
//! {"format":"nfbl-annotations","version":1}
//! {"video_id":"ao-0001","emotion":"negative","duration_s":421.2,"fps":32.0,"clips":[{"class":"N9","start_s":12.0,"end_s":15.5}]}
//! ```
//!
//! Clips may also carry the optional `annotator` (string) and `confidence`
//! (number) fields. Unknown fields are rejected.

use std::collections::HashSet;
use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use super::taxonomy::{ClassId, NfblRegistry};
use crate::error::{Error, Result};

pub const FORMAT_NAME: &str = "nfbl-annotations";
pub const FORMAT_VERSION: u32 = 1;

/// Binary emotion label; the positive class for metrics is `Positive`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Emotion {
    Positive,
    Negative,
}

impl Emotion {
    /// Label implied by a match result: a win is positive, a loss negative.
    pub fn from_match_won(won: bool) -> Self {
        if won {
            Emotion::Positive
        } else {
            Emotion::Negative
        }
    }

    pub fn as_str(&self) -> &'static str {
        match self {
            Emotion::Positive => "positive",
            Emotion::Negative => "negative",
        }
    }
}

impl fmt::Display for Emotion {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for Emotion {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.trim().to_ascii_lowercase().as_str() {
            "positive" => Ok(Emotion::Positive),
            "negative" => Ok(Emotion::Negative),
            other => Err(Error::invalid(format!("unknown emotion `{other}`"))),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct NfblClip {
    pub video_id: String,
    pub class_id: ClassId,
    pub start_s: f64,
    pub end_s: f64,
    pub annotator: Option<String>,
    pub confidence: Option<f64>,
}

impl NfblClip {
    pub fn new(video_id: impl Into<String>, class_id: ClassId, start_s: f64, end_s: f64) -> Self {
        Self {
            video_id: video_id.into(),
            class_id,
            start_s,
            end_s,
            annotator: None,
            confidence: None,
        }
    }

    pub fn duration_s(&self) -> f64 {
        self.end_s - self.start_s
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct VideoRecord {
    pub video_id: String,
    pub emotion: Emotion,
    pub duration_s: f64,
    pub fps: f64,
    pub clips: Vec<NfblClip>,
}

impl VideoRecord {
    pub fn validate(&self, registry: &NfblRegistry) -> Result<()> {
        let bad = |msg: String| Err(Error::parse(format!("video {}", self.video_id), msg));
        if self.video_id.is_empty() {
            return bad("empty video_id".into());
        }
        if !(self.duration_s.is_finite() && self.duration_s > 0.0) {
            return bad(format!("duration_s {} must be positive", self.duration_s));
        }
        if !(self.fps.is_finite() && self.fps > 0.0) {
            return bad(format!("fps {} must be positive", self.fps));
        }
        for (i, c) in self.clips.iter().enumerate() {
            if !registry.contains(c.class_id) {
                return Err(Error::UnknownClass(c.class_id.to_string()));
            }
            if c.video_id != self.video_id {
                return bad(format!("clip {i} belongs to video {}", c.video_id));
            }
            if !(c.start_s.is_finite() && c.end_s.is_finite()) {
                return bad(format!("clip {i} has non-finite times"));
            }
            if !(c.start_s >= 0.0 && c.start_s < c.end_s) {
                return bad(format!(
                    "clip {i} needs 0 <= start_s < end_s, got {}..{}",
                    c.start_s, c.end_s
                ));
            }
            if c.end_s > self.duration_s {
                return bad(format!(
                    "clip {i} ends at {} past the video end {}",
                    c.end_s, self.duration_s
                ));
            }
            if let Some(conf) = c.confidence {
                if !conf.is_finite() {
                    return bad(format!("clip {i} has non-finite confidence"));
                }
            }
        }
        Ok(())
    }

    pub fn frame_count(&self) -> usize {
        (self.duration_s * self.fps).round().max(1.0) as usize
    }
}

#[derive(Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct Header {
    format: String,
    version: u32,
}

#[derive(Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct ClipLine {
    class: String,
    start_s: f64,
    end_s: f64,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    annotator: Option<String>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    confidence: Option<f64>,
}

#[derive(Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct RecordLine {
    video_id: String,
    emotion: Emotion,
    duration_s: f64,
    fps: f64,
    #[serde(default)]
    clips: Vec<ClipLine>,
}

pub fn parse_annotations(text: &str, registry: &NfblRegistry) -> Result<Vec<VideoRecord>> {
    let mut lines = text.lines().enumerate().filter(|(_, l)| !l.trim().is_empty());
    let (hline, header) = lines.next().ok_or_else(|| Error::parse("line 1", "missing header"))?;
    let header: Header = serde_json::from_str(header)
        .map_err(|e| Error::parse(format!("line {}", hline + 1), format!("bad header: {e}")))?;
    if header.format != FORMAT_NAME || header.version != FORMAT_VERSION {
        return Err(Error::parse(
            format!("line {}", hline + 1),
            format!(
                "unsupported document {} v{} (expected {FORMAT_NAME} v{FORMAT_VERSION})",
                header.format, header.version
            ),
        ));
    }

    let mut seen = HashSet::new();
    let mut records = Vec::new();
    for (i, line) in lines {
        let ctx = || format!("line {} (record {})", i + 1, records.len() + 1);
        let raw: RecordLine = serde_json::from_str(line).map_err(|e| Error::parse(ctx(), e.to_string()))?;
        if !seen.insert(raw.video_id.clone()) {
            return Err(Error::parse(ctx(), format!("duplicate video_id {}", raw.video_id)));
        }
        let record = VideoRecord {
            clips: raw
                .clips
                .into_iter()
                .map(|c| {
                    Ok(NfblClip {
                        video_id: raw.video_id.clone(),
                        class_id: c.class.parse()?,
                        start_s: c.start_s,
                        end_s: c.end_s,
                        annotator: c.annotator,
                        confidence: c.confidence,
                    })
                })
                .collect::<Result<_>>()?,
            video_id: raw.video_id,
            emotion: raw.emotion,
            duration_s: raw.duration_s,
            fps: raw.fps,
        };
        record.validate(registry).map_err(|e| match e {
            Error::Parse { message, .. } => Error::parse(ctx(), message),
            other => other,
        })?;
        records.push(record);
    }
    Ok(records)
}

pub fn serialize_annotations(records: &[VideoRecord]) -> String {
    let header = Header {
        format: FORMAT_NAME.into(),
        version: FORMAT_VERSION,
    };
    let mut out = serde_json::to_string(&header).expect("header serialises");
    out.push('\n');
    for r in records {
        let line = RecordLine {
            video_id: r.video_id.clone(),
            emotion: r.emotion,
            duration_s: r.duration_s,
            fps: r.fps,
            clips: r
                .clips
                .iter()
                .map(|c| ClipLine {
                    class: c.class_id.to_string(),
                    start_s: c.start_s,
                    end_s: c.end_s,
                    annotator: c.annotator.clone(),
                    confidence: c.confidence,
                })
                .collect(),
        };
        out.push_str(&serde_json::to_string(&line).expect("record serialises"));
        out.push('\n');
    }
    out
}

pub fn load_annotations(path: &std::path::Path, registry: &NfblRegistry) -> Result<Vec<VideoRecord>> {
    let text = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
    parse_annotations(&text, registry)
}
