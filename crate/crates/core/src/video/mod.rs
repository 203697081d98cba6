//! Face-region de-identification for decoded video frames.

mod blur;
mod detector;
mod image;

pub use blur::{blur_region, gaussian_kernel, mask_frame, mask_frames, SigmaPolicy};
pub use detector::{
    detect_faces, parse_sidecar, write_sidecar, DetectRequest, DetectResponse, FaceBox, FaceDetector, RemoteBox,
    RemoteDetector, SidecarDetector,
};
pub use image::FrameImage;
