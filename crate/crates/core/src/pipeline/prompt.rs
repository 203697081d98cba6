use std::cmp::Ordering;
use std::fmt;
use std::path::Path;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::annotations::{NfblClip, NfblRegistry};
use crate::error::{Error, Result};

/// Which modalities feed the multimodal model.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub enum AblationMode {
    #[serde(rename = "v")]
    Video,
    #[serde(rename = "va")]
    VideoAudio,
    #[serde(rename = "van")]
    VideoAudioNfbl,
}

impl AblationMode {
    pub const ALL: [AblationMode; 3] = [Self::Video, Self::VideoAudio, Self::VideoAudioNfbl];

    pub fn code(&self) -> &'static str {
        match self {
            Self::Video => "v",
            Self::VideoAudio => "va",
            Self::VideoAudioNfbl => "van",
        }
    }

    pub fn label(&self) -> &'static str {
        match self {
            Self::Video => "video",
            Self::VideoAudio => "video+audio",
            Self::VideoAudioNfbl => "video+audio+NFBL",
        }
    }

    pub fn uses_audio(&self) -> bool {
        !matches!(self, Self::Video)
    }

    pub fn uses_nfbl(&self) -> bool {
        matches!(self, Self::VideoAudioNfbl)
    }
}

impl fmt::Display for AblationMode {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.code())
    }
}

impl FromStr for AblationMode {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.trim().to_ascii_lowercase().as_str() {
            "v" | "video" => Ok(Self::Video),
            "va" | "video+audio" => Ok(Self::VideoAudio),
            "van" | "video+audio+nfbl" => Ok(Self::VideoAudioNfbl),
            other => Err(Error::invalid(format!(
                "unknown mode `{other}` (expected v, va or van)"
            ))),
        }
    }
}

/// Versioned prompt text for both stages, loaded from TOML.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct PromptTemplate {
    pub version: u32,
    pub mllm_instruction: String,
    pub video_section: String,
    pub audio_section: String,
    pub nfbl_header: String,
    pub nfbl_empty: String,
    pub question: String,
    pub judge_template: String,
    pub reformat_instruction: String,
}

const BUILTIN_TEMPLATE: &str = include_str!("../../assets/prompts_v1.toml");
const RESPONSE_SLOT: &str = "{response}";

impl PromptTemplate {
    pub fn builtin() -> Self {
        Self::from_toml(BUILTIN_TEMPLATE).expect("bundled prompt template is valid")
    }

    pub fn from_toml(text: &str) -> Result<Self> {
        let t: Self = toml::from_str(text).map_err(|e| Error::parse("prompt template", e.to_string()))?;
        if !t.judge_template.contains(RESPONSE_SLOT) {
            return Err(Error::parse(
                "prompt template",
                "judge_template lacks a {response} slot",
            ));
        }
        Ok(t)
    }

    pub fn load(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
        Self::from_toml(&text).map_err(|e| match e {
            Error::Parse { message, .. } => Error::parse(path.display().to_string(), message),
            other => other,
        })
    }

    pub fn judge_prompt(&self, response: &str) -> String {
        self.judge_template.replace(RESPONSE_SLOT, response)
    }

    pub fn reformat_prompt(&self, response: &str) -> String {
        format!("{}\n\n{}", self.judge_prompt(response), self.reformat_instruction)
    }
}

/// Counts substituted into the modality sections.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PromptContext {
    pub mode: AblationMode,
    pub frame_count: usize,
    pub segment_count: usize,
    pub segment_s: f64,
}

/// Seconds always carry a decimal point: `12.0`, `15.5`, `3.25`.
pub fn format_seconds(s: f64) -> String {
    format!("{s:?}")
}

fn clip_order(a: &NfblClip, b: &NfblClip) -> Ordering {
    a.start_s
        .total_cmp(&b.start_s)
        .then(a.end_s.total_cmp(&b.end_s))
        .then(a.class_id.cmp(&b.class_id))
}

/// Renders the NFBL block: the header followed by one line per clip in start order.
pub fn render_nfbl(clips: &[NfblClip], registry: &NfblRegistry, template: &PromptTemplate) -> Result<String> {
    let mut sorted: Vec<&NfblClip> = clips.iter().collect();
    sorted.sort_by(|a, b| clip_order(a, b));
    let mut out = template.nfbl_header.clone();
    if sorted.is_empty() {
        out.push('\n');
        out.push_str(&template.nfbl_empty);
    }
    for clip in sorted {
        let class = registry.resolve(clip.class_id)?;
        out.push_str(&format!(
            "\n- {} from {}s to {}s",
            class.name,
            format_seconds(clip.start_s),
            format_seconds(clip.end_s)
        ));
    }
    Ok(out)
}

fn fill(section: &str, ctx: &PromptContext) -> String {
    section
        .replace("{frame_count}", &ctx.frame_count.to_string())
        .replace("{segment_count}", &ctx.segment_count.to_string())
        .replace("{segment_s}", &format_seconds(ctx.segment_s))
}

/// Multimodal prompt for one video. Sections are additive across modes.
pub fn build_mllm_prompt(
    clips: &[NfblClip],
    registry: &NfblRegistry,
    template: &PromptTemplate,
    ctx: &PromptContext,
) -> Result<String> {
    let mut sections = vec![template.mllm_instruction.clone(), fill(&template.video_section, ctx)];
    if ctx.mode.uses_audio() {
        sections.push(fill(&template.audio_section, ctx));
    }
    if ctx.mode.uses_nfbl() {
        sections.push(render_nfbl(clips, registry, template)?);
    }
    sections.push(template.question.clone());
    Ok(sections.join("\n\n"))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::annotations::ClassId;

    fn ctx(mode: AblationMode) -> PromptContext {
        PromptContext {
            mode,
            frame_count: 32,
            segment_count: 210,
            segment_s: 2.0,
        }
    }

    #[test]
    fn renders_clip_lines() {
        let reg = NfblRegistry::builtin();
        let t = PromptTemplate::builtin();
        let clip = NfblClip::new("v1", ClassId(9), 12.0, 15.5);
        let p = build_mllm_prompt(&[clip], &reg, &t, &ctx(AblationMode::VideoAudioNfbl)).unwrap();
        assert!(p.contains("Biting nails from 12.0s to 15.5s"), "{p}");
    }

    #[test]
    fn empty_clips_line() {
        let reg = NfblRegistry::builtin();
        let t = PromptTemplate::builtin();
        let p = build_mllm_prompt(&[], &reg, &t, &ctx(AblationMode::VideoAudioNfbl)).unwrap();
        assert!(p.contains("no notable body language observed"));
    }

    #[test]
    fn sorted_by_start() {
        let reg = NfblRegistry::builtin();
        let t = PromptTemplate::builtin();
        let clips = [
            NfblClip::new("v", ClassId(5), 30.0, 31.0),
            NfblClip::new("v", ClassId(9), 2.25, 4.0),
        ];
        let block = render_nfbl(&clips, &reg, &t).unwrap();
        let lines: Vec<&str> = block.lines().skip(1).collect();
        assert_eq!(
            lines,
            [
                "- Biting nails from 2.25s to 4.0s",
                "- Covering face from 30.0s to 31.0s"
            ]
        );
    }

    #[test]
    fn unknown_class_errors() {
        let reg = NfblRegistry::builtin();
        let t = PromptTemplate::builtin();
        let clips = [NfblClip::new("v", ClassId(99), 1.0, 2.0)];
        assert!(matches!(render_nfbl(&clips, &reg, &t), Err(Error::UnknownClass(_))));
    }

    #[test]
    fn sections_are_additive() {
        let reg = NfblRegistry::builtin();
        let t = PromptTemplate::builtin();
        let clips = [NfblClip::new("v", ClassId(3), 1.0, 2.0)];
        let v = build_mllm_prompt(&clips, &reg, &t, &ctx(AblationMode::Video)).unwrap();
        let va = build_mllm_prompt(&clips, &reg, &t, &ctx(AblationMode::VideoAudio)).unwrap();
        let van = build_mllm_prompt(&clips, &reg, &t, &ctx(AblationMode::VideoAudioNfbl)).unwrap();
        assert!(!v.contains("spectrogram") && !v.contains(&t.nfbl_header));
        assert!(va.contains("210 log-mel spectrograms of consecutive 2.0-second clips"));
        assert!(!va.contains(&t.nfbl_header));
        for section in va.split("\n\n") {
            assert!(van.contains(section));
        }
        assert!(van.len() > va.len());
    }

    #[test]
    fn template_validation() {
        let bad = BUILTIN_TEMPLATE.replace("{response}", "{resp}");
        assert!(PromptTemplate::from_toml(&bad).is_err());
        let t = PromptTemplate::builtin();
        assert!(t.judge_prompt("R text").contains("R text"));
        assert!(t.reformat_prompt("R").ends_with(&t.reformat_instruction));
    }

    #[test]
    fn mode_parsing() {
        assert_eq!("VAN".parse::<AblationMode>().unwrap(), AblationMode::VideoAudioNfbl);
        assert!("x".parse::<AblationMode>().is_err());
        assert_eq!(serde_json::to_string(&AblationMode::VideoAudio).unwrap(), "\"va\"");
    }
}
