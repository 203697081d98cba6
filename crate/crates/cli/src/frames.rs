use std::path::{Path, PathBuf};
use std::time::Duration;

use affectguard_core::pipeline::list_ppm;
use affectguard_core::video::{
    detect_faces, mask_frame, FaceBox, FaceDetector, FrameImage, RemoteDetector, SidecarDetector,
};
use anyhow::{Context, Result};
use clap::Args;
use futures::stream::{self, StreamExt};
use rayon::prelude::*;

use crate::config::{set_if, RunConfig};
use crate::exit::{coded, REMOTE, USAGE};
use crate::output::write_atomic;

#[derive(Debug, Args)]
pub struct MaskArgs {
    /// Directory of `*.ppm` frames; frame index is the position in name order.
    pub frames: PathBuf,
    /// Output directory; files keep their names.
    pub output: PathBuf,
    /// JSON Lines face boxes: {"frame_index","x","y","w","h"} per line.
    #[arg(long, conflicts_with = "detector_url")]
    pub boxes: Option<PathBuf>,
    /// HTTP face detector endpoint.
    #[arg(long, env = "AFFECTGUARD_DETECTOR_URL")]
    pub detector_url: Option<String>,
    /// `proportional[:divisor]` or `fixed:<sigma>` [default: proportional:4]
    #[arg(long, env = "AFFECTGUARD_SIGMA_POLICY")]
    pub sigma_policy: Option<String>,
}

enum FrameOutcome {
    Done,
    Detect(String),
    Write(anyhow::Error),
}

fn same_dir(a: &Path, b: &Path) -> bool {
    match (a.canonicalize(), b.canonicalize()) {
        (Ok(x), Ok(y)) => x == y,
        _ => false,
    }
}

fn write_frame(src: &Path, dst: &Path, boxes: &[FaceBox], frame: Option<FrameImage>, config: &RunConfig) -> Result<()> {
    if boxes.is_empty() {
        let bytes = std::fs::read(src).with_context(|| format!("reading {}", src.display()))?;
        return write_atomic(dst, &bytes);
    }
    let frame = match frame {
        Some(f) => f,
        None => FrameImage::load_ppm(src)?,
    };
    let masked = mask_frame(&frame, boxes, config.masking.sigma_policy)?;
    write_atomic(dst, &masked.to_ppm()?)
}

pub fn mask(args: MaskArgs, mut config: RunConfig) -> Result<()> {
    if let Some(p) = &args.sigma_policy {
        config.masking.sigma_policy = p.parse()?;
    }
    set_if(&mut config.masking.detector_url, args.detector_url.map(Some));
    if same_dir(&args.frames, &args.output) {
        return Err(coded(
            USAGE,
            "output directory must differ from the input frames directory",
        ));
    }
    let paths = list_ppm(&args.frames)?;
    tracing::info!(
        frames = paths.len(),
        sigma_policy = ?config.masking.sigma_policy,
        detector = ?config.masking.detector_url,
        "masking frames"
    );
    std::fs::create_dir_all(&args.output).with_context(|| format!("creating {}", args.output.display()))?;
    let dst = |p: &Path| args.output.join(p.file_name().expect("listed files have names"));

    match (&args.boxes, &config.masking.detector_url) {
        (Some(boxes), _) => {
            let sidecar = SidecarDetector::load(boxes)?;
            for b in sidecar.all_boxes().iter().filter(|b| b.frame_index >= paths.len()) {
                tracing::warn!(frame_index = b.frame_index, "box references a missing frame; skipped");
            }
            paths.par_iter().enumerate().try_for_each(|(i, src)| {
                let boxes: Vec<FaceBox> = sidecar.boxes_for(i).to_vec();
                write_frame(src, &dst(src), &boxes, None, &config)
            })
        }
        (None, Some(url)) => {
            let detector = RemoteDetector::new(
                url.clone(),
                Duration::from_secs_f64(config.masking.detector_timeout_s),
                config.masking.detector_max_in_flight,
            )?;
            let runtime = tokio::runtime::Runtime::new()?;
            let outcomes: Vec<(usize, FrameOutcome)> = runtime.block_on(async {
                stream::iter(paths.iter().enumerate())
                    .map(|(i, src)| {
                        let (detector, config, dst) = (&detector, &config, &dst);
                        async move {
                            let frame = match FrameImage::load_ppm(src) {
                                Ok(f) => f,
                                Err(e) => return (i, FrameOutcome::Write(e.into())),
                            };
                            let outcome = match detect_faces(i, &frame, detector as &dyn FaceDetector).await {
                                Ok(boxes) => match write_frame(src, &dst(src), &boxes, Some(frame), config) {
                                    Ok(()) => FrameOutcome::Done,
                                    Err(e) => FrameOutcome::Write(e),
                                },
                                Err(e) => FrameOutcome::Detect(e.to_string()),
                            };
                            (i, outcome)
                        }
                    })
                    .buffered(config.pipeline.workers.max(1))
                    .collect()
                    .await
            });
            let mut failed = Vec::new();
            for (i, outcome) in outcomes {
                match outcome {
                    FrameOutcome::Done => {}
                    FrameOutcome::Write(e) => return Err(e),
                    FrameOutcome::Detect(e) => {
                        tracing::error!(frame = %paths[i].display(), error = %e, "detection failed");
                        failed.push(paths[i].file_name().unwrap_or_default().to_string_lossy().into_owned());
                    }
                }
            }
            if failed.is_empty() {
                Ok(())
            } else {
                Err(coded(
                    REMOTE,
                    format!(
                        "face detection failed for {} frame(s): {}",
                        failed.len(),
                        failed.join(", ")
                    ),
                ))
            }
        }
        (None, None) => Err(coded(USAGE, "one of --boxes or --detector-url is required")),
    }
}
