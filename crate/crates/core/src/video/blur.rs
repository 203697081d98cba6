use std::str::FromStr;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::detector::FaceBox;
use super::image::FrameImage;
use crate::error::{Error, Result};

/// Normalised Gaussian taps for offsets `-r..=r` with `r = ceil(3 sigma)`.
pub fn gaussian_kernel(sigma: f64) -> Result<Vec<f64>> {
    if !(sigma.is_finite() && sigma > 0.0) {
        return Err(Error::invalid(format!("sigma must be positive, got {sigma}")));
    }
    let radius = (3.0 * sigma).ceil() as i64;
    let mut taps: Vec<f64> = (-radius..=radius)
        .map(|n| (-((n * n) as f64) / (2.0 * sigma * sigma)).exp())
        .collect();
    let sum: f64 = taps.iter().sum();
    taps.iter_mut().for_each(|t| *t /= sum);
    Ok(taps)
}

/// How the blur strength is chosen for a box.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "lowercase")]
pub enum SigmaPolicy {
    /// `sigma = max(w, h) / divisor`
    Proportional {
        divisor: f64,
    },
    Fixed {
        sigma: f64,
    },
}

impl Default for SigmaPolicy {
    fn default() -> Self {
        SigmaPolicy::Proportional { divisor: 4.0 }
    }
}

impl SigmaPolicy {
    pub fn sigma_for(&self, b: &FaceBox) -> f64 {
        match *self {
            SigmaPolicy::Proportional { divisor } => f64::from(b.w.max(b.h)) / divisor,
            SigmaPolicy::Fixed { sigma } => sigma,
        }
    }
}

impl FromStr for SigmaPolicy {
    type Err = Error;

    /// `proportional`, `proportional:<divisor>` or `fixed:<sigma>`.
    fn from_str(s: &str) -> Result<Self> {
        let (kind, value) = match s.split_once(':') {
            Some((k, v)) => (k, Some(v)),
            None => (s, None),
        };
        let number = |v: &str| {
            v.parse::<f64>()
                .ok()
                .filter(|x| x.is_finite() && *x > 0.0)
                .ok_or_else(|| Error::invalid(format!("sigma policy value `{v}` must be a positive number")))
        };
        match (kind, value) {
            ("proportional", None) => Ok(SigmaPolicy::default()),
            ("proportional", Some(v)) => Ok(SigmaPolicy::Proportional { divisor: number(v)? }),
            ("fixed", Some(v)) => Ok(SigmaPolicy::Fixed { sigma: number(v)? }),
            _ => Err(Error::invalid(format!(
                "unknown sigma policy `{s}` (expected proportional[:d] or fixed:s)"
            ))),
        }
    }
}

/// Separable Gaussian blur (horizontal, then vertical) restricted to the
/// clipped box. Taps that fall outside the box are clamped to its edge, so
/// no pixel from outside the box is read and none outside it is written.
pub fn blur_region(frame: &FrameImage, face: &FaceBox, sigma: f64) -> Result<FrameImage> {
    let mut out = frame.clone();
    blur_region_in_place(&mut out, face, sigma)?;
    Ok(out)
}

pub(crate) fn blur_region_in_place(frame: &mut FrameImage, face: &FaceBox, sigma: f64) -> Result<()> {
    let kernel = gaussian_kernel(sigma)?;
    let Some(b) = face.clip(frame.width(), frame.height()) else {
        return Ok(());
    };
    let (x0, y0) = (b.x as usize, b.y as usize);
    let (w, h) = (b.w as usize, b.h as usize);
    let radius = (kernel.len() / 2) as i64;
    let channels = frame.channels() as usize;
    let stride = frame.width() as usize * channels;

    let mut plane = vec![0.0f64; w * h];
    let mut tmp = vec![0.0f64; w * h];
    for c in 0..channels {
        let px = frame.pixels();
        for y in 0..h {
            for x in 0..w {
                plane[y * w + x] = f64::from(px[(y0 + y) * stride + (x0 + x) * channels + c]);
            }
        }
        for y in 0..h {
            let row = &plane[y * w..(y + 1) * w];
            for x in 0..w {
                tmp[y * w + x] = kernel
                    .iter()
                    .enumerate()
                    .map(|(k, t)| {
                        let sx = (x as i64 + k as i64 - radius).clamp(0, w as i64 - 1) as usize;
                        t * row[sx]
                    })
                    .sum();
            }
        }
        for y in 0..h {
            for x in 0..w {
                plane[y * w + x] = kernel
                    .iter()
                    .enumerate()
                    .map(|(k, t)| {
                        let sy = (y as i64 + k as i64 - radius).clamp(0, h as i64 - 1) as usize;
                        t * tmp[sy * w + x]
                    })
                    .sum();
            }
        }
        let px = frame.pixels_mut();
        for y in 0..h {
            for x in 0..w {
                px[(y0 + y) * stride + (x0 + x) * channels + c] = plane[y * w + x].round().clamp(0.0, 255.0) as u8;
            }
        }
    }
    Ok(())
}

/// Blurs every box of one frame, in the order given.
pub fn mask_frame(frame: &FrameImage, boxes: &[FaceBox], policy: SigmaPolicy) -> Result<FrameImage> {
    let mut out = frame.clone();
    for b in boxes {
        blur_region_in_place(&mut out, b, policy.sigma_for(b))?;
    }
    Ok(out)
}

/// Blurs each frame with the boxes whose `frame_index` is its position in
/// `frames`. Frames are processed in parallel; boxes within a frame keep their
/// listed order. Boxes pointing past the last frame are an error.
pub fn mask_frames(frames: &[FrameImage], boxes: &[FaceBox], policy: SigmaPolicy) -> Result<Vec<FrameImage>> {
    let mut grouped: Vec<Vec<FaceBox>> = vec![Vec::new(); frames.len()];
    for b in boxes {
        grouped
            .get_mut(b.frame_index)
            .ok_or_else(|| {
                Error::invalid(format!(
                    "box references frame {} but only {} frames were given",
                    b.frame_index,
                    frames.len()
                ))
            })?
            .push(*b);
    }
    frames
        .par_iter()
        .zip(grouped.par_iter())
        .map(|(frame, bs)| mask_frame(frame, bs, policy))
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;

    fn fbox(frame_index: usize, x: i64, y: i64, w: u32, h: u32) -> FaceBox {
        FaceBox {
            frame_index,
            x,
            y,
            w,
            h,
        }
    }

    fn checkerboard(w: u32, h: u32) -> FrameImage {
        let mut img = FrameImage::filled(w, h, [0, 0, 0]);
        for y in 0..h {
            for x in 0..w {
                let v = if (x / 2 + y / 2) % 2 == 0 { 230 } else { 20 };
                for c in 0..3 {
                    img.set(x, y, c, v.min(255 - c * 5));
                }
            }
        }
        img
    }

    fn channel_variance(img: &FrameImage, b: &FaceBox, c: u8) -> f64 {
        let vals: Vec<f64> = (b.y as u32..b.y as u32 + b.h)
            .flat_map(|y| (b.x as u32..b.x as u32 + b.w).map(move |x| (x, y)))
            .map(|(x, y)| f64::from(img.get(x, y, c)))
            .collect();
        let mean = vals.iter().sum::<f64>() / vals.len() as f64;
        vals.iter().map(|v| (v - mean).powi(2)).sum::<f64>() / vals.len() as f64
    }

    #[test]
    fn kernel_normalised_and_symmetric() {
        for sigma in [0.3, 1.0, 2.5, 17.0] {
            let k = gaussian_kernel(sigma).unwrap();
            assert_eq!(k.len() as i64, 2 * (3.0 * sigma).ceil() as i64 + 1);
            assert!((k.iter().sum::<f64>() - 1.0).abs() < 1e-12);
            for i in 0..k.len() {
                assert_eq!(k[i], k[k.len() - 1 - i]);
            }
        }
        let k = gaussian_kernel(1.0).unwrap();
        assert!((k[3] / k[2] - 0.5f64.exp()).abs() < 1e-12);
        assert!(gaussian_kernel(0.0).is_err());
        assert!(gaussian_kernel(-1.0).is_err());
    }

    #[test]
    fn uniform_region_unchanged() {
        let img = FrameImage::filled(40, 30, [200, 17, 99]);
        let out = blur_region(&img, &fbox(0, 5, 5, 20, 15), 3.0).unwrap();
        assert_eq!(out, img);
    }

    #[test]
    fn outside_pixels_untouched_and_variance_drops() {
        let img = checkerboard(64, 48);
        let b = fbox(0, 10, 8, 24, 20);
        let out = blur_region(&img, &b, f64::from(b.w) / 4.0).unwrap();
        for y in 0..48 {
            for x in 0..64 {
                let inside = b.contains(x, y);
                for c in 0..3 {
                    if !inside {
                        assert_eq!(out.get(x, y, c), img.get(x, y, c));
                    }
                }
            }
        }
        for c in 0..3 {
            assert!(channel_variance(&out, &b, c) < channel_variance(&img, &b, c));
        }
    }

    #[test]
    fn degenerate_box_is_noop() {
        let img = checkerboard(16, 16);
        assert_eq!(blur_region(&img, &fbox(0, 20, 20, 5, 5), 2.0).unwrap(), img);
        assert_eq!(blur_region(&img, &fbox(0, -10, 0, 5, 5), 2.0).unwrap(), img);
    }

    #[test]
    fn out_of_bounds_box_is_clipped() {
        let img = checkerboard(16, 16);
        let out = blur_region(&img, &fbox(0, 10, 10, 50, 50), 2.0).unwrap();
        for y in 0..16 {
            for x in 0..16 {
                if x < 10 || y < 10 {
                    assert_eq!(out.get(x, y, 0), img.get(x, y, 0));
                }
            }
        }
        assert_ne!(out, img);
    }

    #[test]
    fn mask_frames_without_boxes_is_identity() {
        let frames = vec![checkerboard(8, 8), FrameImage::filled(8, 8, [1, 2, 3])];
        assert_eq!(mask_frames(&frames, &[], SigmaPolicy::default()).unwrap(), frames);
    }

    #[test]
    fn mask_frames_targets_listed_frames() {
        let frames = vec![checkerboard(32, 32), checkerboard(32, 32)];
        let boxes = [fbox(1, 4, 4, 12, 12)];
        let out = mask_frames(&frames, &boxes, SigmaPolicy::default()).unwrap();
        assert_eq!(out[0], frames[0]);
        assert_ne!(out[1], frames[1]);
        assert!(mask_frames(&frames, &[fbox(2, 0, 0, 4, 4)], SigmaPolicy::default()).is_err());
    }

    #[test]
    fn overlapping_boxes_apply_in_order() {
        let frames = vec![checkerboard(48, 48)];
        let a = fbox(0, 4, 4, 24, 24);
        let b = fbox(0, 16, 16, 24, 24);
        let policy = SigmaPolicy::default();
        let ab = mask_frames(&frames, &[a, b], policy).unwrap();
        let manual = blur_region(&blur_region(&frames[0], &a, 6.0).unwrap(), &b, 6.0).unwrap();
        assert_eq!(ab[0], manual);
        assert_eq!(mask_frames(&frames, &[a, b], policy).unwrap(), ab);
        assert_ne!(mask_frames(&frames, &[b, a], policy).unwrap(), ab);
    }

    #[test]
    fn sigma_policy_parsing() {
        assert_eq!("proportional".parse::<SigmaPolicy>().unwrap(), SigmaPolicy::default());
        assert_eq!(
            "proportional:8".parse::<SigmaPolicy>().unwrap(),
            SigmaPolicy::Proportional { divisor: 8.0 }
        );
        assert_eq!(
            "fixed:2.5".parse::<SigmaPolicy>().unwrap(),
            SigmaPolicy::Fixed { sigma: 2.5 }
        );
        assert!("fixed".parse::<SigmaPolicy>().is_err());
        assert!("fixed:-1".parse::<SigmaPolicy>().is_err());
        assert!("gaussian".parse::<SigmaPolicy>().is_err());
        assert_eq!(SigmaPolicy::default().sigma_for(&fbox(0, 0, 0, 40, 100)), 25.0);
    }
}
