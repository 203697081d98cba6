use serde::{Deserialize, Serialize};

use super::client::{JudgeRequest, LlmClient};
use super::PromptTemplate;
use crate::annotations::Emotion;
use crate::error::{Error, Result};

pub const CONFIDENCE_MAX: f64 = 10.0;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct JudgeVerdict {
    pub emotion: Emotion,
    /// Always within `[0, 10]`.
    pub confidence: f64,
    /// The reply's confidence lay outside `[0, 10]` and was clamped.
    pub confidence_clamped: bool,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct JudgeOutcome {
    pub verdict: JudgeVerdict,
    pub retried: bool,
}

fn field<'a>(line: &'a str, key: &str) -> std::result::Result<&'a str, String> {
    let (k, v) = line
        .split_once(':')
        .ok_or_else(|| format!("expected `{key}: ...`, got `{line}`"))?;
    if !k.trim().eq_ignore_ascii_case(key) {
        return Err(format!("expected `{key}: ...`, got `{line}`"));
    }
    Ok(v.trim())
}

fn is_decimal(s: &str) -> bool {
    let digits = s.strip_prefix(['-', '+']).unwrap_or(s);
    let mut parts = digits.splitn(2, '.');
    let int = parts.next().unwrap_or("");
    let frac = parts.next();
    let all_digits = |p: &str| p.bytes().all(|b| b.is_ascii_digit());
    all_digits(int) && frac.is_none_or(all_digits) && (!int.is_empty() || frac.is_some_and(|f| !f.is_empty()))
}

/// Parses the two-line answer grammar:
///
/// ```text
/// EMOTION: <positive|negative>
/// CONFIDENCE: <decimal>
/// ```
///
/// Keys and the emotion word are case-insensitive. Surrounding blank lines
/// are ignored; any other extra line is rejected.
pub fn parse_judge_reply(reply: &str) -> std::result::Result<JudgeVerdict, String> {
    let lines: Vec<&str> = reply.trim().lines().map(str::trim).collect();
    let [emotion_line, confidence_line] = lines[..] else {
        return Err(format!("expected exactly two lines, got {}", lines.len()));
    };
    let emotion = match field(emotion_line, "EMOTION")?.to_ascii_lowercase().as_str() {
        "positive" => Emotion::Positive,
        "negative" => Emotion::Negative,
        other => return Err(format!("emotion must be positive or negative, got `{other}`")),
    };
    let raw = field(confidence_line, "CONFIDENCE")?;
    if !is_decimal(raw) {
        return Err(format!("confidence is not a decimal number: `{raw}`"));
    }
    let value: f64 = raw.parse().map_err(|e| format!("confidence `{raw}`: {e}"))?;
    let confidence = value.clamp(0.0, CONFIDENCE_MAX);
    Ok(JudgeVerdict {
        emotion,
        confidence,
        confidence_clamped: confidence != value,
    })
}

/// Has the text model classify the multimodal response, retrying once with
/// the reformat instruction if the first reply does not parse.
pub async fn judge_emotion(client: &dyn LlmClient, response: &str, template: &PromptTemplate) -> Result<JudgeOutcome> {
    if response.trim().is_empty() {
        return Err(Error::EmptyInput("response to judge"));
    }
    let first = client
        .complete(&JudgeRequest {
            prompt: template.judge_prompt(response),
        })
        .await?;
    let first_err = match parse_judge_reply(&first) {
        Ok(verdict) => {
            return Ok(JudgeOutcome {
                verdict,
                retried: false,
            })
        }
        Err(e) => e,
    };
    tracing::debug!(error = %first_err, "judge reply unparseable, retrying");
    let second = client
        .complete(&JudgeRequest {
            prompt: template.reformat_prompt(response),
        })
        .await?;
    parse_judge_reply(&second)
        .map(|verdict| JudgeOutcome { verdict, retried: true })
        .map_err(|e| Error::JudgeParse(format!("{e} (first attempt: {first_err})")))
}
