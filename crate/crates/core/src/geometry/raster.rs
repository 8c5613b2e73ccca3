use super::{Point, PolylineCurve};
use crate::{Error, Result};

/// Width x height bit grid, row-major, rows packed into `u64` words
/// (bit `u % 64` of word `u / 64`).
#[derive(Clone, PartialEq, Eq, Hash)]
pub struct BinaryImage {
    width: usize,
    height: usize,
    stride: usize,
    words: Vec<u64>,
}

impl std::fmt::Debug for BinaryImage {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        writeln!(
            f,
            "BinaryImage {}x{} ({} set)",
            self.width,
            self.height,
            self.count_ones()
        )?;
        if self.width * self.height <= 64 * 64 {
            for v in 0..self.height {
                let row: String = (0..self.width)
                    .map(|u| if self.get(u, v) { '#' } else { '.' })
                    .collect();
                writeln!(f, "{row}")?;
            }
        }
        Ok(())
    }
}

impl BinaryImage {
    pub const DEFAULT_WIDTH: usize = 128;
    pub const DEFAULT_HEIGHT: usize = 64;

    pub fn new(width: usize, height: usize) -> Self {
        let stride = width.div_ceil(64);
        Self {
            width,
            height,
            stride,
            words: vec![0; stride * height],
        }
    }

    pub fn width(&self) -> usize {
        self.width
    }

    pub fn height(&self) -> usize {
        self.height
    }

    pub fn dims(&self) -> (usize, usize) {
        (self.width, self.height)
    }

    pub fn pixel_count(&self) -> usize {
        self.width * self.height
    }

    #[inline]
    pub fn get(&self, u: usize, v: usize) -> bool {
        debug_assert!(u < self.width && v < self.height);
        self.words[v * self.stride + u / 64] >> (u % 64) & 1 == 1
    }

    /// Out-of-bounds reads are background.
    #[inline]
    pub fn get_signed(&self, u: i64, v: i64) -> bool {
        u >= 0 && v >= 0 && (u as usize) < self.width && (v as usize) < self.height && self.get(u as usize, v as usize)
    }

    /// Value of the pixel containing the continuous image point `p`.
    pub fn at_point(&self, p: Point) -> bool {
        self.get_signed(p.x.floor() as i64, p.y.floor() as i64)
    }

    #[inline]
    pub fn set(&mut self, u: usize, v: usize, value: bool) {
        let w = &mut self.words[v * self.stride + u / 64];
        if value {
            *w |= 1 << (u % 64);
        } else {
            *w &= !(1 << (u % 64));
        }
    }

    pub fn set_signed(&mut self, u: i64, v: i64) {
        if u >= 0 && v >= 0 && (u as usize) < self.width && (v as usize) < self.height {
            self.set(u as usize, v as usize, true);
        }
    }

    pub fn count_ones(&self) -> usize {
        self.words.iter().map(|w| w.count_ones() as usize).sum()
    }

    pub fn is_empty(&self) -> bool {
        self.words.iter().all(|&w| w == 0)
    }

    pub(crate) fn words(&self) -> &[u64] {
        &self.words
    }

    /// Set pixels in row-major order.
    pub fn ones(&self) -> impl Iterator<Item = (usize, usize)> + '_ {
        (0..self.height).flat_map(move |v| (0..self.width).filter_map(move |u| self.get(u, v).then_some((u, v))))
    }

    /// Rows packed most-significant-bit first, `ceil(width / 8)` bytes each.
    pub fn to_packed_rows(&self) -> Vec<u8> {
        let row_bytes = self.width.div_ceil(8);
        let mut out = vec![0u8; row_bytes * self.height];
        for (u, v) in self.ones() {
            out[v * row_bytes + u / 8] |= 0x80 >> (u % 8);
        }
        out
    }

    pub fn from_packed_rows(width: usize, height: usize, bytes: &[u8]) -> Option<Self> {
        let row_bytes = width.div_ceil(8);
        if bytes.len() != row_bytes * height {
            return None;
        }
        let mut img = Self::new(width, height);
        for v in 0..height {
            for u in 0..width {
                if bytes[v * row_bytes + u / 8] & (0x80 >> (u % 8)) != 0 {
                    img.set(u, v, true);
                }
            }
        }
        Some(img)
    }
}

/// Axis-aligned world rectangle observed by the camera.
#[derive(Debug, Clone, Copy, PartialEq, serde::Serialize, serde::Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Roi {
    pub x_min: f64,
    pub y_min: f64,
    pub x_max: f64,
    pub y_max: f64,
}

impl Roi {
    pub fn new(x_min: f64, y_min: f64, x_max: f64, y_max: f64) -> Self {
        Self {
            x_min,
            y_min,
            x_max,
            y_max,
        }
    }

    pub fn width(&self) -> f64 {
        self.x_max - self.x_min
    }

    pub fn height(&self) -> f64 {
        self.y_max - self.y_min
    }

    pub fn center(&self) -> Point {
        Point::new(0.5 * (self.x_min + self.x_max), 0.5 * (self.y_min + self.y_max))
    }

    pub fn contains(&self, p: &Point) -> bool {
        p.x >= self.x_min && p.x <= self.x_max && p.y >= self.y_min && p.y <= self.y_max
    }
}

/// Affine map between a world rectangle and a pixel grid. World `y` points
/// up, image `v` points down, so the top-left pixel covers the world corner
/// `(x_min, y_max)`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct WorldImageMap {
    roi: Roi,
    width: usize,
    height: usize,
}

impl WorldImageMap {
    pub fn new(roi: Roi, width: usize, height: usize) -> Result<Self> {
        let finite = [roi.x_min, roi.x_max, roi.y_min, roi.y_max]
            .iter()
            .all(|v| v.is_finite());
        if !finite || !(roi.width() > 0.0) || !(roi.height() > 0.0) {
            return Err(Error::param(format!("degenerate roi {roi:?}")));
        }
        if width == 0 || height == 0 {
            return Err(Error::param("image dimensions must be positive"));
        }
        Ok(Self { roi, width, height })
    }

    pub fn roi(&self) -> Roi {
        self.roi
    }

    pub fn dims(&self) -> (usize, usize) {
        (self.width, self.height)
    }

    /// Pixels per world unit along `u` and `v`.
    pub fn scale(&self) -> (f64, f64) {
        (
            self.width as f64 / self.roi.width(),
            self.height as f64 / self.roi.height(),
        )
    }

    pub fn to_image(&self, p: Point) -> Point {
        let (sx, sy) = self.scale();
        Point::new((p.x - self.roi.x_min) * sx, (self.roi.y_max - p.y) * sy)
    }

    pub fn to_world(&self, q: Point) -> Point {
        let (sx, sy) = self.scale();
        Point::new(self.roi.x_min + q.x / sx, self.roi.y_max - q.y / sy)
    }
}

/// Rasterize a polyline given in continuous pixel coordinates.
///
/// The polyline is densified to < 0.5 px spacing. Every pixel containing a
/// densified point is set, and a disk (ellipse for anisotropic scales) of
/// radii `radius` pixels is stamped at each densified point by testing pixel
/// centers. A single point is accepted.
pub fn rasterize_pixels(points: &[Point], radius: (f64, f64), width: usize, height: usize) -> BinaryImage {
    let mut img = BinaryImage::new(width, height);
    let dense = densify_slice(points, 0.45);
    let (rx, ry) = radius;
    let stamp = rx > 0.0 && ry > 0.0;
    for p in &dense {
        img.set_signed(p.x.floor() as i64, p.y.floor() as i64);
        if !stamp {
            continue;
        }
        let u0 = (p.x - rx - 0.5).floor().max(0.0) as i64;
        let u1 = (p.x + rx - 0.5).ceil().min(width as f64 - 1.0) as i64;
        let v0 = (p.y - ry - 0.5).floor().max(0.0) as i64;
        let v1 = (p.y + ry - 0.5).ceil().min(height as f64 - 1.0) as i64;
        for v in v0..=v1 {
            let dy = (v as f64 + 0.5 - p.y) / ry;
            for u in u0..=u1 {
                let dx = (u as f64 + 0.5 - p.x) / rx;
                if dx * dx + dy * dy <= 1.0 {
                    img.set_signed(u, v);
                }
            }
        }
    }
    img
}

/// Rasterize a world-frame curve of the given half thickness (world units)
/// into a `width x height` image covering `roi`.
pub fn rasterize(
    curve: &PolylineCurve,
    half_thickness: f64,
    width: usize,
    height: usize,
    roi: Roi,
) -> Result<BinaryImage> {
    if !(half_thickness >= 0.0) {
        return Err(Error::param("half thickness must be non-negative"));
    }
    let map = WorldImageMap::new(roi, width, height)?;
    let (sx, sy) = map.scale();
    let pts: Vec<Point> = curve.points().iter().map(|p| map.to_image(*p)).collect();
    Ok(rasterize_pixels(
        &pts,
        (half_thickness * sx, half_thickness * sy),
        width,
        height,
    ))
}

pub(crate) fn densify_slice(points: &[Point], max_spacing: f64) -> Vec<Point> {
    let Some(&first) = points.first() else {
        return Vec::new();
    };
    let mut out = vec![first];
    for w in points.windows(2) {
        let d = (w[1] - w[0]).norm();
        let k = (d / max_spacing).floor() as usize + 1;
        for j in 1..=k {
            out.push(w[0] + (w[1] - w[0]) * (j as f64 / k as f64));
        }
    }
    out
}
