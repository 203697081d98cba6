//! Non-facial body language (NFBL) annotations and per-video emotion labels.

mod schema;
mod split;
mod stats;
mod synthetic;
mod taxonomy;

pub use schema::{
    load_annotations, parse_annotations, serialize_annotations, Emotion, NfblClip, VideoRecord, FORMAT_NAME,
    FORMAT_VERSION,
};
pub use split::{apply_override, split_dataset, DatasetSplit, SplitOverride, SplitSizes};
pub use stats::{dataset_summary, nfbl_histogram, DatasetSummary, NfblHistogram};
pub use synthetic::{synthetic_corpus, SyntheticSpec};
pub use taxonomy::{ClassId, NfblCategory, NfblClass, NfblRegistry};
