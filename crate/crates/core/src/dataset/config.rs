use serde::{Deserialize, Serialize};

use crate::geometry::DEFAULT_TAU_U;
use crate::{Error, Result};

/// Dataset generation parameters. Lengths and thicknesses are in pixels.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct GenConfig {
    pub seed: u64,
    pub samples: usize,
    /// Keypoints per sample.
    pub m: usize,
    pub width: usize,
    pub height: usize,
    /// Inclusive range of concatenated Fourier segments.
    pub segments: [usize; 2],
    /// Inclusive range of the harmonic count N.
    pub harmonics: [usize; 2],
    /// Harmonic amplitude as a fraction of segment length; harmonic `n` is
    /// drawn from `+-amplitude / n`.
    pub amplitude: [f64; 2],
    /// Fundamental frequency in cycles per segment.
    pub cycles: [f64; 2],
    pub segment_length: [f64; 2],
    pub half_thickness: [f64; 2],
    pub tau_u: f64,
    /// Distance kept between the curve and the image border.
    pub margin: f64,
    /// `train:test` ratio; with `[10, 1]` every 11th sample is a test sample.
    pub split_ratio: [usize; 2],
}

impl Default for GenConfig {
    fn default() -> Self {
        Self {
            seed: 2022,
            samples: 7040,
            m: 16,
            width: 128,
            height: 64,
            segments: [2, 5],
            harmonics: [1, 4],
            amplitude: [0.02, 0.25],
            cycles: [0.3, 1.2],
            segment_length: [18.0, 40.0],
            half_thickness: [0.5, 1.0],
            tau_u: DEFAULT_TAU_U,
            margin: 3.0,
            split_ratio: [10, 1],
        }
    }
}

/// Dataset split.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Split {
    Train,
    Test,
}

impl Split {
    pub fn as_str(self) -> &'static str {
        match self {
            Split::Train => "train",
            Split::Test => "test",
        }
    }
}

impl std::str::FromStr for Split {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "train" => Ok(Split::Train),
            "test" => Ok(Split::Test),
            other => Err(Error::Config(format!("unknown split `{other}`"))),
        }
    }
}

fn check_range<T: PartialOrd + std::fmt::Debug>(name: &str, r: &[T; 2]) -> Result<()> {
    if r[0] > r[1] {
        return Err(Error::Config(format!("{name} range {r:?} is empty")));
    }
    Ok(())
}

impl GenConfig {
    pub fn validate(&self) -> Result<()> {
        if self.samples == 0 {
            return Err(Error::Config("samples must be at least 1".into()));
        }
        if self.m < 2 {
            return Err(Error::Config("m must be at least 2".into()));
        }
        if self.width < 8 || self.height < 8 {
            return Err(Error::Config("image must be at least 8x8".into()));
        }
        check_range("segments", &self.segments)?;
        check_range("harmonics", &self.harmonics)?;
        check_range("amplitude", &self.amplitude)?;
        check_range("cycles", &self.cycles)?;
        check_range("segment_length", &self.segment_length)?;
        check_range("half_thickness", &self.half_thickness)?;
        if self.segments[0] == 0 {
            return Err(Error::Config("at least one segment is required".into()));
        }
        if !(self.segment_length[0] > 0.0) || !(self.half_thickness[0] >= 0.0) {
            return Err(Error::Config("lengths must be positive".into()));
        }
        if self.split_ratio[0] + self.split_ratio[1] == 0 {
            return Err(Error::Config("split ratio must not be 0:0".into()));
        }
        if 2.0 * self.margin >= self.height.min(self.width) as f64 {
            return Err(Error::Config("margin leaves no room for the curve".into()));
        }
        Ok(())
    }

    pub fn from_toml(text: &str) -> Result<Self> {
        let cfg: GenConfig = toml::from_str(text).map_err(|e| Error::Config(e.to_string()))?;
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn to_toml(&self) -> String {
        toml::to_string(self).expect("config serializes")
    }

    /// Number of `(train, test)` samples.
    pub fn split_counts(&self) -> (usize, usize) {
        let test = (0..self.samples)
            .filter(|&i| super::split_of(self, i) == Split::Test)
            .count();
        (self.samples - test, test)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn default_split_counts() {
        let cfg = GenConfig::default();
        assert_eq!(cfg.samples, 7040);
        assert_eq!(cfg.split_counts(), (6400, 640));
        let small = GenConfig {
            samples: 11,
            ..GenConfig::default()
        };
        assert_eq!(small.split_counts(), (10, 1));
    }

    #[test]
    fn unknown_keys_rejected() {
        assert!(GenConfig::from_toml("samples = 3\nbogus = 1\n").is_err());
        let cfg = GenConfig::from_toml("samples = 3\nsegments = [1, 1]\n").unwrap();
        assert_eq!(cfg.samples, 3);
        assert_eq!(cfg.m, 16);
        assert!(GenConfig::from_toml("segments = [3, 1]\n").is_err());
    }

    #[test]
    fn toml_round_trip() {
        let cfg = GenConfig::default();
        assert_eq!(GenConfig::from_toml(&cfg.to_toml()).unwrap(), cfg);
    }
}
