//! Deterministic synthetic corpus with the scale of the real interview
//! dataset (which cannot be redistributed): video count, label balance, clip
//! count, total duration and the skew towards nail biting and face covering.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use super::schema::{Emotion, NfblClip, VideoRecord};
use super::taxonomy::{ClassId, NfblRegistry};

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SyntheticSpec {
    pub videos: usize,
    pub negatives: usize,
    pub clips: usize,
    /// Sum of all video durations, in centiseconds.
    pub total_duration_cs: u64,
    pub fps: f64,
    pub min_clip_cs: u64,
    pub max_clip_cs: u64,
}

impl Default for SyntheticSpec {
    /// 275 videos (74 lost, 201 won), 16,180 clips, 32.15 h at 32 fps.
    fn default() -> Self {
        Self {
            videos: 275,
            negatives: 74,
            clips: 16_180,
            total_duration_cs: 11_575_000,
            fps: 32.0,
            min_clip_cs: 8,
            max_clip_cs: 18_450,
        }
    }
}

/// Splits `total` into integer parts proportional to `weights`
/// (largest-remainder rounding, ties to the lower index).
fn apportion(weights: &[f64], total: u64) -> Vec<u64> {
    let sum: f64 = weights.iter().sum();
    let exact: Vec<f64> = weights.iter().map(|w| w / sum * total as f64).collect();
    let mut parts: Vec<u64> = exact.iter().map(|x| x.floor() as u64).collect();
    let mut rest = total - parts.iter().sum::<u64>();
    let mut order: Vec<usize> = (0..weights.len()).collect();
    order.sort_by(|&a, &b| {
        let fa = exact[a] - exact[a].floor();
        let fb = exact[b] - exact[b].floor();
        fb.total_cmp(&fa).then(a.cmp(&b))
    });
    for &i in order.iter().cycle() {
        if rest == 0 {
            break;
        }
        parts[i] += 1;
        rest -= 1;
    }
    parts
}

fn class_weight(id: ClassId) -> f64 {
    match id.0 {
        9 => 14.0,
        5 => 11.0,
        22 | 3 | 34 => 4.0,
        7 | 11 | 19 | 28 => 3.0,
        _ => 1.0 + f64::from(id.0 % 3) * 0.5,
    }
}

pub fn synthetic_corpus(spec: &SyntheticSpec, registry: &NfblRegistry, seed: u64) -> Vec<VideoRecord> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let duration_weights: Vec<f64> = (0..spec.videos).map(|_| rng.random_range(0.35..1.65)).collect();
    let durations = apportion(&duration_weights, spec.total_duration_cs);
    let clip_counts = apportion(
        &durations.iter().map(|&d| d as f64).collect::<Vec<_>>(),
        spec.clips as u64,
    );

    let classes: Vec<ClassId> = registry.classes().iter().map(|c| c.id).collect();
    let cumulative: Vec<f64> = classes
        .iter()
        .scan(0.0, |acc, &c| {
            *acc += class_weight(c);
            Some(*acc)
        })
        .collect();
    let weight_total = cumulative.last().copied().unwrap_or(0.0);

    // negatives are spread across the id range rather than bunched at the front
    let mut negative = vec![false; spec.videos];
    for k in 0..spec.negatives {
        negative[k * spec.videos / spec.negatives.max(1)] = true;
    }

    (0..spec.videos)
        .map(|i| {
            let video_id = format!("v{:04}", i + 1);
            let dur_cs = durations[i];
            let mut clips: Vec<NfblClip> = (0..clip_counts[i])
                .map(|_| {
                    let pick = rng.random_range(0.0..weight_total);
                    let class_id = classes[cumulative.partition_point(|&c| c <= pick).min(classes.len() - 1)];
                    let cap = spec.max_clip_cs.min(dur_cs).max(spec.min_clip_cs);
                    // mostly short gestures with an occasional long posture
                    let len_cs = if rng.random_bool(0.02) {
                        rng.random_range(spec.min_clip_cs..=cap)
                    } else {
                        rng.random_range(spec.min_clip_cs..=cap.min(800).max(spec.min_clip_cs))
                    };
                    let start_cs = rng.random_range(0..=dur_cs.saturating_sub(len_cs));
                    NfblClip::new(
                        video_id.clone(),
                        class_id,
                        start_cs as f64 / 100.0,
                        (start_cs + len_cs) as f64 / 100.0,
                    )
                })
                .collect();
            clips.sort_by(|a, b| a.start_s.total_cmp(&b.start_s).then(a.class_id.cmp(&b.class_id)));
            VideoRecord {
                video_id,
                emotion: Emotion::from_match_won(!negative[i]),
                duration_s: dur_cs as f64 / 100.0,
                fps: spec.fps,
                clips,
            }
        })
        .collect()
}
