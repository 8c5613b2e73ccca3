//! Labeled synthetic DLO images: random Fourier-segment curves, keypoint
//! labels, rigid augmentation and rasterization, plus the on-disk format.

mod config;
mod format;
mod generate;

pub use config::{GenConfig, Split};
pub use format::{
    decode_sample, encode_sample, load_dataset, load_sample, load_split, save_sample, Dataset, Manifest, ManifestEntry,
    MAGIC, MANIFEST_FILE, VERSION,
};
pub use generate::{
    generate_dataset, generate_sample, generate_samples, sample_seed, split_of, splitmix64, DatasetSummary,
    LabeledSample, SampleMeta,
};
