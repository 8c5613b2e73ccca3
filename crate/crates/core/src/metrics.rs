//! Image and point-set similarity metrics shared by perception evaluation and
//! episode scoring.

use std::fmt;

use crate::{BinaryImage, Error, Point, Result};

fn check_dims(a: &BinaryImage, b: &BinaryImage) -> Result<()> {
    if a.dims() != b.dims() {
        return Err(Error::DimMismatch {
            a: a.dims(),
            b: b.dims(),
        });
    }
    Ok(())
}

/// Intersection over union of the set pixels. Two empty images score 0.
pub fn iou(a: &BinaryImage, b: &BinaryImage) -> Result<f64> {
    check_dims(a, b)?;
    let (mut inter, mut union) = (0u64, 0u64);
    for (x, y) in a.words().iter().zip(b.words()) {
        inter += (x & y).count_ones() as u64;
        union += (x | y).count_ones() as u64;
    }
    Ok(if union == 0 { 0.0 } else { inter as f64 / union as f64 })
}

/// Number of differing pixels divided by the pixel count.
pub fn l1_pixel(a: &BinaryImage, b: &BinaryImage) -> Result<f64> {
    check_dims(a, b)?;
    let diff: u64 = a
        .words()
        .iter()
        .zip(b.words())
        .map(|(x, y)| (x ^ y).count_ones() as u64)
        .sum();
    Ok(diff as f64 / a.pixel_count() as f64)
}

/// Symmetric Chamfer distance with squared Euclidean terms.
pub fn chamfer(a: &[Point], b: &[Point]) -> Result<f64> {
    if a.is_empty() || b.is_empty() {
        return Err(Error::EmptyInput("chamfer distance needs non-empty point sets"));
    }
    Ok(directed_chamfer(a, b) + directed_chamfer(b, a))
}

fn directed_chamfer(from: &[Point], to: &[Point]) -> f64 {
    from.iter()
        .map(|p| to.iter().map(|q| (p - q).norm_squared()).fold(f64::INFINITY, f64::min))
        .sum()
}

/// Set pixel centers of an image, for Chamfer comparisons of rasters.
pub fn pixel_points(img: &BinaryImage) -> Vec<Point> {
    img.ones()
        .map(|(u, v)| Point::new(u as f64 + 0.5, v as f64 + 0.5))
        .collect()
}

/// A named metric with its sample statistics.
#[derive(Debug, Clone, PartialEq)]
pub struct MetricReport {
    pub name: String,
    /// Mean over samples (or the single value).
    pub value: f64,
    pub sample_count: usize,
    pub mean: f64,
    /// Population variance, never negative.
    pub variance: f64,
    pub flags: Vec<String>,
}

impl MetricReport {
    pub fn from_samples(name: impl Into<String>, samples: &[f64]) -> Self {
        let n = samples.len();
        let mean = if n == 0 {
            0.0
        } else {
            samples.iter().sum::<f64>() / n as f64
        };
        let variance = if n == 0 {
            0.0
        } else {
            (samples.iter().map(|x| (x - mean) * (x - mean)).sum::<f64>() / n as f64).max(0.0)
        };
        Self {
            name: name.into(),
            value: mean,
            sample_count: n,
            mean,
            variance,
            flags: Vec::new(),
        }
    }

    pub fn single(name: impl Into<String>, value: f64) -> Self {
        Self::from_samples(name, &[value])
    }

    pub fn with_flag(mut self, flag: impl Into<String>) -> Self {
        self.flags.push(flag.into());
        self
    }

    /// `name=value n=.. mean=.. var=..` record.
    pub fn record(&self) -> String {
        let mut s = format!(
            "name={} value={:.6} n={} mean={:.6} var={:.6}",
            self.name, self.value, self.sample_count, self.mean, self.variance
        );
        if !self.flags.is_empty() {
            s.push_str(&format!(" flags={}", self.flags.join(",")));
        }
        s
    }
}

/// Aligned text table of reports.
pub struct ReportTable<'a>(pub &'a [MetricReport]);

impl fmt::Display for ReportTable<'_> {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let w = self.0.iter().map(|r| r.name.len()).max().unwrap_or(4).max(6);
        writeln!(
            f,
            "{:<w$}  {:>12}  {:>8}  {:>12}  {:>12}",
            "metric", "value", "n", "mean", "variance"
        )?;
        for r in self.0 {
            write!(
                f,
                "{:<w$}  {:>12.6}  {:>8}  {:>12.6}  {:>12.6}",
                r.name, r.value, r.sample_count, r.mean, r.variance
            )?;
            if !r.flags.is_empty() {
                write!(f, "  [{}]", r.flags.join(", "))?;
            }
            writeln!(f)?;
        }
        Ok(())
    }
}
