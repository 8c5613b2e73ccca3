use std::fs;
use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};

use super::generate::{sample_seed, split_of, LabeledSample, SampleMeta};
use super::{GenConfig, Split};
use crate::geometry::Frame;
use crate::{BinaryImage, Error, KeypointSequence, Point, Result};

pub const MAGIC: &[u8; 4] = b"DLOS";
pub const VERSION: u16 = 1;
pub const MANIFEST_FILE: &str = "manifest.txt";
const BOM: u16 = 0xFEFF;
const HEADER_LEN: usize = 40;
const SEED_SCHEME: &str = "splitmix64(seed ^ splitmix64(index))";

fn record_len(width: usize, height: usize, m: usize) -> usize {
    HEADER_LEN + width.div_ceil(8) * height + 8 * m
}

/// Serialize a sample.
///
/// Layout, little-endian: magic `DLOS`, `u16` version, `u16` byte-order mark
/// `0xFEFF`, `u32` width, `u32` height, `u32` m, `u64` seed, `u64` index,
/// `f32` half thickness (px), image rows packed MSB first and padded to whole
/// bytes, then m `(u, v)` pairs of `f32`.
pub fn encode_sample(sample: &LabeledSample) -> Vec<u8> {
    let (w, h) = sample.image.dims();
    let m = sample.keypoints.len();
    let mut out = Vec::with_capacity(record_len(w, h, m));
    out.extend_from_slice(MAGIC);
    out.extend_from_slice(&VERSION.to_le_bytes());
    out.extend_from_slice(&BOM.to_le_bytes());
    out.extend_from_slice(&(w as u32).to_le_bytes());
    out.extend_from_slice(&(h as u32).to_le_bytes());
    out.extend_from_slice(&(m as u32).to_le_bytes());
    out.extend_from_slice(&sample.meta.seed.to_le_bytes());
    out.extend_from_slice(&(sample.meta.index as u64).to_le_bytes());
    out.extend_from_slice(&sample.meta.half_thickness.to_le_bytes());
    out.extend_from_slice(&sample.image.to_packed_rows());
    for p in sample.keypoints.points() {
        out.extend_from_slice(&(p.x as f32).to_le_bytes());
        out.extend_from_slice(&(p.y as f32).to_le_bytes());
    }
    out
}

struct Reader<'a> {
    bytes: &'a [u8],
    pos: usize,
    big_endian: bool,
}

impl<'a> Reader<'a> {
    fn take<const N: usize>(&mut self, what: &str) -> Result<[u8; N]> {
        let end = self.pos + N;
        let slice = self.bytes.get(self.pos..end).ok_or_else(|| Error::Format {
            offset: self.pos,
            message: format!("truncated {what}: need {N} bytes, {} left", self.bytes.len() - self.pos),
        })?;
        self.pos = end;
        let mut buf: [u8; N] = slice.try_into().expect("length checked");
        if self.big_endian {
            buf.reverse();
        }
        Ok(buf)
    }

    fn u16(&mut self, what: &str) -> Result<u16> {
        self.take::<2>(what).map(u16::from_le_bytes)
    }

    fn u32(&mut self, what: &str) -> Result<u32> {
        self.take::<4>(what).map(u32::from_le_bytes)
    }

    fn u64(&mut self, what: &str) -> Result<u64> {
        self.take::<8>(what).map(u64::from_le_bytes)
    }

    fn f32(&mut self, what: &str) -> Result<f32> {
        self.take::<4>(what).map(f32::from_le_bytes)
    }
}

/// Parse a record written by [`encode_sample`]. A record whose byte-order
/// mark reads `0xFFFE` was written big-endian and is normalized.
pub fn decode_sample(bytes: &[u8]) -> Result<LabeledSample> {
    if bytes.len() < 4 || &bytes[..4] != MAGIC {
        return Err(Error::Format {
            offset: 0,
            message: "bad magic, expected `DLOS`".into(),
        });
    }
    let big_endian = match bytes.get(6..8) {
        Some([0xFF, 0xFE]) => false,
        Some([0xFE, 0xFF]) => true,
        Some(other) => {
            return Err(Error::Format {
                offset: 6,
                message: format!("bad byte-order mark {other:02x?}"),
            })
        }
        None => {
            return Err(Error::Format {
                offset: bytes.len().min(4),
                message: "truncated header".into(),
            })
        }
    };
    let mut r = Reader {
        bytes,
        pos: 4,
        big_endian,
    };
    let version = r.u16("version")?;
    if version != VERSION {
        return Err(Error::Format {
            offset: 4,
            message: format!("unsupported version {version}"),
        });
    }
    r.u16("byte-order mark")?;
    let width = r.u32("width")? as usize;
    let height = r.u32("height")? as usize;
    let m = r.u32("keypoint count")? as usize;
    if width == 0 || height == 0 {
        return Err(Error::Format {
            offset: 8,
            message: format!("empty image {width}x{height}"),
        });
    }
    let seed = r.u64("seed")?;
    let index = r.u64("index")? as usize;
    let half_thickness = r.f32("half thickness")?;

    let row_bytes = width.div_ceil(8) * height;
    let rows = bytes.get(r.pos..r.pos + row_bytes).ok_or_else(|| Error::Format {
        offset: r.pos,
        message: format!("truncated image: need {row_bytes} bytes, {} left", bytes.len() - r.pos),
    })?;
    let image = BinaryImage::from_packed_rows(width, height, rows).ok_or_else(|| Error::Format {
        offset: r.pos,
        message: "nonzero padding bits in image rows".into(),
    })?;
    r.pos += row_bytes;

    let mut points = Vec::with_capacity(m);
    for _ in 0..m {
        let offset = r.pos;
        let u = r.f32("keypoint")?;
        let v = r.f32("keypoint")?;
        if !u.is_finite() || !v.is_finite() {
            return Err(Error::Format {
                offset,
                message: "non-finite keypoint".into(),
            });
        }
        points.push(Point::new(u as f64, v as f64));
    }
    if r.pos != bytes.len() {
        return Err(Error::Format {
            offset: r.pos,
            message: format!("{} trailing bytes", bytes.len() - r.pos),
        });
    }
    Ok(LabeledSample {
        image,
        keypoints: KeypointSequence::new(points, Frame::Image),
        meta: SampleMeta {
            index,
            seed,
            half_thickness,
        },
    })
}

pub fn save_sample(path: &Path, sample: &LabeledSample) -> Result<()> {
    fs::write(path, encode_sample(sample)).map_err(|e| Error::io(path, e))
}

pub fn load_sample(path: &Path) -> Result<LabeledSample> {
    let bytes = fs::read(path).map_err(|e| Error::io(path, e))?;
    decode_sample(&bytes)
}

/// One manifest row.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ManifestEntry {
    pub index: usize,
    pub split: Split,
    /// Hex string; TOML integers are signed 64-bit.
    pub seed: String,
    /// Path relative to the dataset root.
    pub file: String,
}

/// Dataset index written as `manifest.txt` (TOML).
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Manifest {
    pub format: String,
    pub version: u16,
    pub seed_scheme: String,
    pub train: usize,
    pub test: usize,
    pub config: GenConfig,
    pub sample: Vec<ManifestEntry>,
}

impl Manifest {
    pub fn for_config(cfg: &GenConfig) -> Self {
        let (train, test) = cfg.split_counts();
        let sample = (0..cfg.samples)
            .map(|i| {
                let split = split_of(cfg, i);
                ManifestEntry {
                    index: i,
                    split,
                    seed: format!("{:#018x}", sample_seed(cfg.seed, i)),
                    file: format!("{}/sample_{i:06}.dlos", split.as_str()),
                }
            })
            .collect();
        Self {
            format: "dlos".into(),
            version: VERSION,
            seed_scheme: SEED_SCHEME.into(),
            train,
            test,
            config: cfg.clone(),
            sample,
        }
    }

    pub fn to_text(&self) -> String {
        toml::to_string(self).expect("manifest serializes")
    }

    pub fn from_text(text: &str) -> Result<Self> {
        toml::from_str(text).map_err(|e| Error::Config(format!("manifest: {e}")))
    }

    pub fn read(dir: &Path) -> Result<Self> {
        let path = dir.join(MANIFEST_FILE);
        let text = fs::read_to_string(&path).map_err(|e| Error::io(&path, e))?;
        Self::from_text(&text)
    }

    /// True if `dir` holds this exact manifest and every listed record with
    /// the expected size.
    pub fn matches_existing(&self, dir: &Path) -> bool {
        let Ok(text) = fs::read_to_string(dir.join(MANIFEST_FILE)) else {
            return false;
        };
        if text != self.to_text() {
            return false;
        }
        let expected = record_len(self.config.width, self.config.height, self.config.m) as u64;
        self.sample
            .iter()
            .all(|e| fs::metadata(dir.join(&e.file)).is_ok_and(|md| md.is_file() && md.len() == expected))
    }
}

pub(crate) fn write_dataset(dir: &Path, manifest: &Manifest, samples: &[LabeledSample]) -> Result<()> {
    for split in [Split::Train, Split::Test] {
        let sub = dir.join(split.as_str());
        fs::create_dir_all(&sub).map_err(|e| Error::io(&sub, e))?;
    }
    for (entry, sample) in manifest.sample.iter().zip(samples) {
        save_sample(&dir.join(&entry.file), sample)?;
    }
    // Written last so an interrupted run never looks complete.
    let path = dir.join(MANIFEST_FILE);
    fs::write(&path, manifest.to_text()).map_err(|e| Error::io(&path, e))
}

/// A dataset loaded from disk.
#[derive(Debug, Clone)]
pub struct Dataset {
    pub root: PathBuf,
    pub manifest: Manifest,
}

impl Dataset {
    pub fn entries(&self, split: Option<Split>) -> impl Iterator<Item = &ManifestEntry> {
        self.manifest
            .sample
            .iter()
            .filter(move |e| split.is_none_or(|s| e.split == s))
    }
}

pub fn load_dataset(dir: &Path) -> Result<Dataset> {
    Ok(Dataset {
        root: dir.to_path_buf(),
        manifest: Manifest::read(dir)?,
    })
}

/// Load every record of one split in index order.
pub fn load_split(dir: &Path, split: Split) -> Result<Vec<LabeledSample>> {
    let ds = load_dataset(dir)?;
    ds.entries(Some(split))
        .map(|e| load_sample(&ds.root.join(&e.file)))
        .collect()
}
