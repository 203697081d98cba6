use std::collections::BTreeMap;
use std::fmt;

use serde::Serialize;

use super::schema::{Emotion, VideoRecord};
use super::taxonomy::{ClassId, NfblRegistry};

/// Clip counts for every registered class, zero-count classes included.
#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct NfblHistogram {
    pub counts: BTreeMap<ClassId, usize>,
}

impl NfblHistogram {
    pub fn total(&self) -> usize {
        self.counts.values().sum()
    }

    pub fn count(&self, id: ClassId) -> usize {
        self.counts.get(&id).copied().unwrap_or(0)
    }

    /// Class ids ordered by descending count, ties broken by id.
    pub fn ranked(&self) -> Vec<(ClassId, usize)> {
        let mut v: Vec<_> = self.counts.iter().map(|(k, v)| (*k, *v)).collect();
        v.sort_by(|a, b| b.1.cmp(&a.1).then(a.0.cmp(&b.0)));
        v
    }

    /// `class_id,name,category,count` rows in id order.
    pub fn to_csv(&self, registry: &NfblRegistry) -> String {
        let mut out = String::from("class_id,name,category,count\n");
        for (id, n) in &self.counts {
            let (name, cat) = registry
                .get(*id)
                .map(|c| (c.name.as_str(), c.category.as_str()))
                .unwrap_or(("", ""));
            out.push_str(&format!("{id},\"{}\",{cat},{n}\n", name.replace('"', "\"\"")));
        }
        out
    }
}

pub fn nfbl_histogram(records: &[VideoRecord], registry: &NfblRegistry) -> NfblHistogram {
    let mut counts: BTreeMap<ClassId, usize> = registry.classes().iter().map(|c| (c.id, 0)).collect();
    for clip in records.iter().flat_map(|r| &r.clips) {
        *counts.entry(clip.class_id).or_insert(0) += 1;
    }
    NfblHistogram { counts }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct DatasetSummary {
    pub videos: usize,
    pub clips: usize,
    pub total_hours: f64,
    pub average_minutes: f64,
    pub positive: usize,
    pub negative: usize,
    pub shortest_clip_s: Option<f64>,
    pub longest_clip_s: Option<f64>,
}

pub fn dataset_summary(records: &[VideoRecord]) -> DatasetSummary {
    let total_s: f64 = records.iter().map(|r| r.duration_s).sum();
    let clips = records.iter().map(|r| r.clips.len()).sum();
    let durations = records.iter().flat_map(|r| &r.clips).map(|c| c.duration_s());
    let shortest = durations.clone().min_by(f64::total_cmp);
    let longest = durations.max_by(f64::total_cmp);
    let positive = records.iter().filter(|r| r.emotion == Emotion::Positive).count();
    DatasetSummary {
        videos: records.len(),
        clips,
        total_hours: total_s / 3600.0,
        average_minutes: if records.is_empty() {
            0.0
        } else {
            total_s / 60.0 / records.len() as f64
        },
        positive,
        negative: records.len() - positive,
        shortest_clip_s: shortest,
        longest_clip_s: longest,
    }
}

impl fmt::Display for DatasetSummary {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        writeln!(f, "Number of videos        {}", self.videos)?;
        writeln!(f, "Number of annotated NFBL {}", self.clips)?;
        writeln!(f, "Total duration          {:.2} hours", self.total_hours)?;
        writeln!(f, "Average duration        {:.2} mins", self.average_minutes)?;
        writeln!(
            f,
            "Labels                  {} negative, {} positive",
            self.negative, self.positive
        )?;
        if let (Some(lo), Some(hi)) = (self.shortest_clip_s, self.longest_clip_s) {
            writeln!(f, "Clip length range       {lo:.2} s .. {hi:.2} s")?;
        }
        Ok(())
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::annotations::NfblClip;

    fn record(id: &str, emotion: Emotion, duration_s: f64, clips: &[(u16, f64, f64)]) -> VideoRecord {
        VideoRecord {
            video_id: id.into(),
            emotion,
            duration_s,
            fps: 32.0,
            clips: clips
                .iter()
                .map(|&(c, s, e)| NfblClip::new(id, ClassId(c), s, e))
                .collect(),
        }
    }

    #[test]
    fn empty_histogram_is_all_zero() {
        let reg = NfblRegistry::builtin();
        let h = nfbl_histogram(&[], &reg);
        assert_eq!(h.counts.len(), 37);
        assert_eq!(h.total(), 0);
    }

    #[test]
    fn single_clip_histogram() {
        let reg = NfblRegistry::builtin();
        let h = nfbl_histogram(&[record("a", Emotion::Positive, 60.0, &[(9, 1.0, 2.0)])], &reg);
        assert_eq!(h.count(ClassId(9)), 1);
        assert_eq!(h.total(), 1);
        assert_eq!(h.ranked()[0], (ClassId(9), 1));
        let csv = h.to_csv(&reg);
        assert!(csv.contains("N9,\"Biting nails\",self-manipulation,1\n"));
        assert_eq!(csv.lines().count(), 38);
    }

    #[test]
    fn single_minute_summary() {
        let s = dataset_summary(&[record("a", Emotion::Negative, 60.0, &[])]);
        assert_eq!(s.videos, 1);
        assert!((s.total_hours - 1.0 / 60.0).abs() < 1e-15);
        assert!((s.average_minutes - 1.0).abs() < 1e-15);
        assert_eq!((s.negative, s.positive), (1, 0));
        assert_eq!(s.shortest_clip_s, None);
    }

    #[test]
    fn summary_text() {
        let s = dataset_summary(&[
            record("a", Emotion::Negative, 120.0, &[(1, 0.0, 0.08)]),
            record("b", Emotion::Positive, 60.0, &[(2, 1.0, 5.0)]),
        ]);
        let text = s.to_string();
        assert!(text.contains("Average duration        1.50 mins"));
        assert!(text.contains("0.08 s .. 4.00 s"));
    }
}
