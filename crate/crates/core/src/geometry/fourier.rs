use nalgebra::Rotation2;

use super::{cross, Point, PolylineCurve};
use crate::{Error, Result};

/// A curve segment `y = f(x)` given by a truncated Fourier series
///
/// `f(x) = a0 / 2 + sum_n (a_n cos(n w x) + b_n sin(n w x))`
///
/// sampled at `sample_count` uniformly spaced abscissae over `x_span`.
#[derive(Debug, Clone, PartialEq)]
pub struct FourierSegment {
    pub a0: f64,
    /// `(a_n, b_n)` for `n = 1..=N`.
    pub harmonics: Vec<(f64, f64)>,
    pub omega: f64,
    pub x_span: (f64, f64),
    pub sample_count: usize,
}

impl FourierSegment {
    pub fn eval(&self, x: f64) -> f64 {
        self.harmonics
            .iter()
            .enumerate()
            .fold(self.a0 / 2.0, |acc, (k, &(a, b))| {
                let nwx = (k + 1) as f64 * self.omega * x;
                acc + a * nwx.cos() + b * nwx.sin()
            })
    }

    fn validate(&self) -> Result<()> {
        if self.sample_count < 2 {
            return Err(Error::param("fourier segment needs at least 2 samples"));
        }
        let (lo, hi) = self.x_span;
        if !(lo < hi) || !lo.is_finite() || !hi.is_finite() {
            return Err(Error::param(format!("invalid x span [{lo}, {hi}]")));
        }
        Ok(())
    }
}

/// Sample a Fourier segment. Abscissae are strictly increasing.
pub fn fourier_segment(seg: &FourierSegment) -> Result<PolylineCurve> {
    seg.validate()?;
    let (lo, hi) = seg.x_span;
    let last = (seg.sample_count - 1) as f64;
    let points = (0..seg.sample_count)
        .map(|i| {
            let x = if i + 1 == seg.sample_count {
                hi
            } else {
                lo + (hi - lo) * i as f64 / last
            };
            Point::new(x, seg.eval(x))
        })
        .collect();
    PolylineCurve::new(points)
}

/// Join curves end to end. Each following curve is rotated so its first
/// tangent matches the previous curve's last tangent, then translated onto
/// the previous end point; the duplicated junction point is dropped.
pub fn concatenate_segments(segments: &[PolylineCurve]) -> Result<PolylineCurve> {
    let (first, rest) = segments
        .split_first()
        .ok_or_else(|| Error::param("cannot concatenate an empty segment list"))?;
    let mut points = first.points().to_vec();
    for seg in rest {
        let n = points.len();
        let out_tangent = points[n - 1] - points[n - 2];
        let sp = seg.points();
        let in_tangent = sp[1] - sp[0];
        let angle = cross(&in_tangent, &out_tangent).atan2(in_tangent.dot(&out_tangent));
        let rot = Rotation2::new(angle);
        let anchor = points[n - 1];
        points.extend(sp[1..].iter().map(|p| anchor + rot * (p - sp[0])));
    }
    PolylineCurve::new(points)
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;
    use rand::{Rng, SeedableRng};

    #[test]
    fn constant_bias() {
        let seg = FourierSegment {
            a0: 2.0,
            harmonics: vec![],
            omega: 1.0,
            x_span: (0.0, 1.0),
            sample_count: 3,
        };
        let c = fourier_segment(&seg).unwrap();
        assert_eq!(c.len(), 3);
        assert!(c.points().iter().all(|p| p.y == 1.0));
        assert_eq!(c.points()[1].x, 0.5);
    }

    #[test]
    fn single_cosine_at_zero() {
        let seg = FourierSegment {
            a0: 0.0,
            harmonics: vec![(1.0, 0.0)],
            omega: 1.0,
            x_span: (0.0, 1.0),
            sample_count: 2,
        };
        assert_eq!(fourier_segment(&seg).unwrap().points()[0].y, 1.0);
    }

    #[test]
    fn matches_scalar_evaluation() {
        // 0.2 + 0.3 cos(1) - 0.2 sin(1), evaluated independently.
        let seg = FourierSegment {
            a0: 0.4,
            harmonics: vec![(0.3, -0.2)],
            omega: 2.0,
            x_span: (0.0, 1.0),
            sample_count: 3,
        };
        let c = fourier_segment(&seg).unwrap();
        assert_relative_eq!(c.points()[1].y, 0.19379649479886263, epsilon = 1e-15);
    }

    #[test]
    fn parameter_errors() {
        let mut seg = FourierSegment {
            a0: 0.0,
            harmonics: vec![],
            omega: 1.0,
            x_span: (1.0, 1.0),
            sample_count: 3,
        };
        assert!(fourier_segment(&seg).is_err());
        seg.x_span = (0.0, 1.0);
        seg.sample_count = 1;
        assert!(fourier_segment(&seg).is_err());
    }

    #[test]
    fn concatenation_examples() {
        let unit = PolylineCurve::new(vec![Point::new(0.0, 0.0), Point::new(1.0, 0.0)]).unwrap();
        assert_eq!(concatenate_segments(std::slice::from_ref(&unit)).unwrap(), unit);
        let joined = concatenate_segments(&[unit.clone(), unit.clone()]).unwrap();
        assert_eq!(
            joined.points(),
            &[Point::new(0.0, 0.0), Point::new(1.0, 0.0), Point::new(2.0, 0.0)]
        );
        assert!(concatenate_segments(&[]).is_err());
    }

    #[test]
    fn random_concatenation_is_continuous() {
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(11);
        let segs: Vec<PolylineCurve> = (0..3)
            .map(|_| {
                let seg = FourierSegment {
                    a0: rng.gen_range(-1.0..1.0),
                    harmonics: (0..3)
                        .map(|_| (rng.gen_range(-0.5..0.5), rng.gen_range(-0.5..0.5)))
                        .collect(),
                    omega: rng.gen_range(0.5..3.0),
                    x_span: (0.0, rng.gen_range(1.0..4.0)),
                    sample_count: rng.gen_range(5..40),
                };
                fourier_segment(&seg).unwrap()
            })
            .collect();
        let joined = concatenate_segments(&segs).unwrap();
        let total: usize = segs.iter().map(|s| s.len()).sum();
        assert_eq!(joined.len(), total - 2);
        // Junctions coincide exactly with the previous segment end and the
        // incoming tangent continues the outgoing one.
        let mut offset = 0;
        for pair in segs.windows(2) {
            offset += pair[0].len() - 1;
            let p = joined.points();
            let out_t = (p[offset] - p[offset - 1]).normalize();
            let in_t = (p[offset + 1] - p[offset]).normalize();
            assert!((out_t - in_t).norm() < 1e-9);
        }
        assert_eq!(joined.points()[segs[0].len() - 1], segs[0].last());
    }

    #[test]
    fn abscissae_strictly_increase() {
        let seg = FourierSegment {
            a0: 0.1,
            harmonics: vec![(3.0, 1.0), (0.2, 0.1)],
            omega: 7.0,
            x_span: (-2.0, 5.0),
            sample_count: 101,
        };
        let c = fourier_segment(&seg).unwrap();
        assert!(c.points().windows(2).all(|w| w[1].x > w[0].x));
    }
}
