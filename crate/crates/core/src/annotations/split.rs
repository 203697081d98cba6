use std::collections::{HashMap, HashSet};

use rand::seq::SliceRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use super::schema::{Emotion, VideoRecord};
use crate::error::{Error, Result};

/// Videos drawn per class for each side of the split.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct SplitSizes {
    pub train_per_class: usize,
    pub test_per_class: usize,
}

impl Default for SplitSizes {
    /// 36 + 36 training videos, 37 + 37 test videos.
    fn default() -> Self {
        Self {
            train_per_class: 36,
            test_per_class: 37,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct DatasetSplit {
    pub train: Vec<VideoRecord>,
    pub test: Vec<VideoRecord>,
}

impl DatasetSplit {
    pub fn to_override(&self) -> SplitOverride {
        SplitOverride {
            train: self.train.iter().map(|r| r.video_id.clone()).collect(),
            test: self.test.iter().map(|r| r.video_id.clone()).collect(),
        }
    }
}

/// Explicit train/test video-id lists, stored as JSON.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct SplitOverride {
    pub train: Vec<String>,
    pub test: Vec<String>,
}

/// Class-balanced seeded split. Each class is ordered by video id, shuffled
/// with a ChaCha8 stream seeded by `seed`, and cut into train and test
/// prefixes, so the result does not depend on input order. Both sides are
/// returned sorted by video id.
pub fn split_dataset(records: &[VideoRecord], seed: u64, sizes: SplitSizes) -> Result<DatasetSplit> {
    let need = sizes.train_per_class + sizes.test_per_class;
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut train = Vec::new();
    let mut test = Vec::new();
    for emotion in [Emotion::Negative, Emotion::Positive] {
        let mut pool: Vec<&VideoRecord> = records.iter().filter(|r| r.emotion == emotion).collect();
        if pool.len() < need {
            return Err(Error::InsufficientData(format!(
                "{need} {emotion} videos requested, {} available",
                pool.len()
            )));
        }
        pool.sort_by(|a, b| a.video_id.cmp(&b.video_id));
        pool.shuffle(&mut rng);
        train.extend(pool[..sizes.train_per_class].iter().map(|r| (*r).clone()));
        test.extend(pool[sizes.train_per_class..need].iter().map(|r| (*r).clone()));
    }
    train.sort_by(|a, b| a.video_id.cmp(&b.video_id));
    test.sort_by(|a, b| a.video_id.cmp(&b.video_id));
    Ok(DatasetSplit { train, test })
}

/// Builds the split named by an override file instead of drawing one.
pub fn apply_override(records: &[VideoRecord], ov: &SplitOverride) -> Result<DatasetSplit> {
    let by_id: HashMap<&str, &VideoRecord> = records.iter().map(|r| (r.video_id.as_str(), r)).collect();
    let train_ids: HashSet<&str> = ov.train.iter().map(String::as_str).collect();
    if let Some(id) = ov.test.iter().find(|id| train_ids.contains(id.as_str())) {
        return Err(Error::invalid(format!("video {id} is in both train and test")));
    }
    let pick = |ids: &[String]| -> Result<Vec<VideoRecord>> {
        let mut seen = HashSet::new();
        ids.iter()
            .map(|id| {
                if !seen.insert(id.as_str()) {
                    return Err(Error::invalid(format!("video {id} listed twice")));
                }
                by_id
                    .get(id.as_str())
                    .map(|r| (*r).clone())
                    .ok_or_else(|| Error::invalid(format!("override names unknown video {id}")))
            })
            .collect()
    };
    Ok(DatasetSplit {
        train: pick(&ov.train)?,
        test: pick(&ov.test)?,
    })
}
