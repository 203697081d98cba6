//! Face boxes and the pluggable detectors that supply them.
//!
//! Sidecar files are JSON Lines, one box per line:
//!
//! ```text
//! {"frame_index": 0, "x": 512, "y": 140, "w": 180, "h": 220}
//! ```
//!
//! Blank lines and lines starting with `#` are ignored.

use std::collections::HashMap;
use std::path::Path;
use std::sync::Arc;
use std::time::Duration;

use async_trait::async_trait;
use base64::Engine;
use serde::{Deserialize, Serialize};
use tokio::sync::Semaphore;

use super::image::FrameImage;
use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct FaceBox {
    pub frame_index: usize,
    pub x: i64,
    pub y: i64,
    pub w: u32,
    pub h: u32,
}

impl FaceBox {
    /// Intersection with a `width` x `height` frame, or `None` when empty.
    pub fn clip(&self, width: u32, height: u32) -> Option<FaceBox> {
        let x0 = self.x.max(0);
        let y0 = self.y.max(0);
        let x1 = (self.x + i64::from(self.w)).min(i64::from(width));
        let y1 = (self.y + i64::from(self.h)).min(i64::from(height));
        (x1 > x0 && y1 > y0).then(|| FaceBox {
            frame_index: self.frame_index,
            x: x0,
            y: y0,
            w: (x1 - x0) as u32,
            h: (y1 - y0) as u32,
        })
    }

    pub fn contains(&self, x: u32, y: u32) -> bool {
        let (x, y) = (i64::from(x), i64::from(y));
        x >= self.x && y >= self.y && x < self.x + i64::from(self.w) && y < self.y + i64::from(self.h)
    }
}

#[async_trait]
pub trait FaceDetector: Send + Sync {
    /// Raw boxes for one frame; they may extend past the frame edges.
    async fn detect(&self, frame_index: usize, frame: &FrameImage) -> Result<Vec<FaceBox>>;
}

/// Runs the detector and clips its boxes to the frame, dropping empty ones.
pub async fn detect_faces(frame_index: usize, frame: &FrameImage, detector: &dyn FaceDetector) -> Result<Vec<FaceBox>> {
    let raw = detector.detect(frame_index, frame).await?;
    Ok(raw
        .iter()
        .filter_map(|b| b.clip(frame.width(), frame.height()))
        .collect())
}

/// Boxes precomputed by an external detector and stored in a sidecar file.
#[derive(Debug, Clone, Default)]
pub struct SidecarDetector {
    by_frame: HashMap<usize, Vec<FaceBox>>,
}

impl SidecarDetector {
    pub fn from_boxes(boxes: impl IntoIterator<Item = FaceBox>) -> Self {
        let mut by_frame: HashMap<usize, Vec<FaceBox>> = HashMap::new();
        for b in boxes {
            by_frame.entry(b.frame_index).or_default().push(b);
        }
        Self { by_frame }
    }

    pub fn load(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
        parse_sidecar(&text, &path.display().to_string()).map(Self::from_boxes)
    }

    pub fn boxes_for(&self, frame_index: usize) -> &[FaceBox] {
        self.by_frame.get(&frame_index).map(Vec::as_slice).unwrap_or(&[])
    }

    /// All boxes, ordered by frame index and then by file order.
    pub fn all_boxes(&self) -> Vec<FaceBox> {
        let mut frames: Vec<_> = self.by_frame.keys().copied().collect();
        frames.sort_unstable();
        frames.iter().flat_map(|f| self.by_frame[f].iter().copied()).collect()
    }
}

pub fn parse_sidecar(text: &str, source: &str) -> Result<Vec<FaceBox>> {
    text.lines()
        .enumerate()
        .filter(|(_, l)| {
            let t = l.trim();
            !t.is_empty() && !t.starts_with('#')
        })
        .map(|(i, line)| {
            let b: FaceBox =
                serde_json::from_str(line).map_err(|e| Error::parse(format!("{source}:{}", i + 1), e.to_string()))?;
            if b.w == 0 || b.h == 0 {
                return Err(Error::parse(
                    format!("{source}:{}", i + 1),
                    "box has zero width or height",
                ));
            }
            Ok(b)
        })
        .collect()
}

pub fn write_sidecar(boxes: &[FaceBox]) -> String {
    boxes
        .iter()
        .map(|b| serde_json::to_string(b).expect("FaceBox serialises") + "\n")
        .collect()
}

#[async_trait]
impl FaceDetector for SidecarDetector {
    async fn detect(&self, frame_index: usize, _frame: &FrameImage) -> Result<Vec<FaceBox>> {
        Ok(self.boxes_for(frame_index).to_vec())
    }
}

/// Request body sent to a detection service.
#[derive(Debug, Serialize, Deserialize)]
pub struct DetectRequest {
    pub frame_index: usize,
    pub width: u32,
    pub height: u32,
    /// Base64 of the binary P6 encoding of the frame.
    pub image_ppm_b64: String,
}

#[derive(Debug, Serialize, Deserialize)]
pub struct DetectResponse {
    pub boxes: Vec<RemoteBox>,
}

#[derive(Debug, Clone, Copy, Serialize, Deserialize)]
pub struct RemoteBox {
    pub x: i64,
    pub y: i64,
    pub w: u32,
    pub h: u32,
}

/// Detector backed by an HTTP service (`POST <endpoint>` with a
/// [`DetectRequest`], answered by a [`DetectResponse`]). Shareable across
/// tasks; at most `max_in_flight` requests run at once.
#[derive(Debug, Clone)]
pub struct RemoteDetector {
    client: reqwest::Client,
    endpoint: String,
    permits: Arc<Semaphore>,
}

impl RemoteDetector {
    pub fn new(endpoint: impl Into<String>, timeout: Duration, max_in_flight: usize) -> Result<Self> {
        let client = reqwest::Client::builder()
            .timeout(timeout)
            .build()
            .map_err(|e| Error::DetectorUnavailable(e.to_string()))?;
        Ok(Self {
            client,
            endpoint: endpoint.into(),
            permits: Arc::new(Semaphore::new(max_in_flight.max(1))),
        })
    }
}

#[async_trait]
impl FaceDetector for RemoteDetector {
    async fn detect(&self, frame_index: usize, frame: &FrameImage) -> Result<Vec<FaceBox>> {
        let body = DetectRequest {
            frame_index,
            width: frame.width(),
            height: frame.height(),
            image_ppm_b64: base64::engine::general_purpose::STANDARD.encode(frame.to_ppm()?),
        };
        let _permit = self
            .permits
            .acquire()
            .await
            .map_err(|e| Error::DetectorUnavailable(e.to_string()))?;
        let response = self
            .client
            .post(&self.endpoint)
            .json(&body)
            .send()
            .await
            .and_then(|r| r.error_for_status())
            .map_err(|e| Error::DetectorUnavailable(format!("{}: {e}", self.endpoint)))?;
        let text = response
            .text()
            .await
            .map_err(|e| Error::DetectorUnavailable(e.to_string()))?;
        let parsed: DetectResponse = serde_json::from_str(&text)
            .map_err(|e| Error::parse(format!("detector response for frame {frame_index}"), e.to_string()))?;
        Ok(parsed
            .boxes
            .into_iter()
            .map(|b| FaceBox {
                frame_index,
                x: b.x,
                y: b.y,
                w: b.w,
                h: b.h,
            })
            .collect())
    }
}
