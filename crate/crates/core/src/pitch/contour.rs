//! Syllable-level cubic smoothing and the contour decision procedure.

use serde::{Deserialize, Serialize};

use super::label::{ContourLabel, Range, Shape};
use super::polyfit::{polyfit, polyval};
use super::track::PitchTrack;
use crate::scalar::Scalar;

/// Number of evenly spaced points on [0, 1] used to measure the range.
pub const RANGE_SAMPLES: usize = 100;

/// Fitted F0 curve of one syllable over normalized time.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(bound = "T: Scalar")]
pub struct SmoothedContour<T> {
    /// `c0 + c1 t + c2 t² + c3 t³`; unused high-order terms are zero.
    pub coeffs: [T; 4],
    /// Max minus min of the curve over [0, 1], in Hz.
    pub range: T,
    pub voiced: bool,
    /// Voiced F0 samples behind the fit.
    pub samples: usize,
}

impl<T: Scalar> SmoothedContour<T> {
    pub fn unvoiced() -> Self {
        Self {
            coeffs: [T::zero(); 4],
            range: T::zero(),
            voiced: false,
            samples: 0,
        }
    }

    /// Builds a voiced contour from coefficients, computing the range.
    pub fn from_coeffs(coeffs: [T; 4], samples: usize) -> Self {
        let (lo, hi) = sample_extent(&coeffs);
        Self {
            coeffs,
            range: hi - lo,
            voiced: true,
            samples,
        }
    }

    pub fn value(&self, t: T) -> T {
        polyval(&self.coeffs, t)
    }
}

fn grid<T: Scalar>(i: usize) -> T {
    T::from_usize_lossy(i) / T::from_usize_lossy(RANGE_SAMPLES - 1)
}

fn sample_extent<T: Scalar>(coeffs: &[T; 4]) -> (T, T) {
    (0..RANGE_SAMPLES)
        .map(|i| polyval(coeffs, grid(i)))
        .fold((T::infinity(), T::neg_infinity()), |(lo, hi), v| (lo.min(v), hi.max(v)))
}

/// Least-squares fit of the voiced samples with `start <= time < end`.
/// The degree drops to 1 for two or three samples and 0 for one.
pub fn smooth_syllable_contour<T: Scalar>(track: &PitchTrack<T>, start: f64, end: f64) -> SmoothedContour<T> {
    let span = end - start;
    if span <= 0.0 {
        return SmoothedContour::unvoiced();
    }
    let (ts, fs): (Vec<T>, Vec<T>) = track
        .times
        .iter()
        .zip(&track.f0)
        .filter(|(&t, _)| t >= start && t < end)
        .filter_map(|(&t, f)| f.map(|f| (T::lit((t - start) / span), f)))
        .unzip();
    let degree = match ts.len() {
        0 => return SmoothedContour::unvoiced(),
        1 => 0,
        2 | 3 => 1,
        _ => 3,
    };
    let fitted = polyfit(&ts, &fs, degree);
    let mut coeffs = [T::zero(); 4];
    coeffs[..fitted.len()].copy_from_slice(&fitted);
    SmoothedContour::from_coeffs(coeffs, ts.len())
}

/// Thresholds of the contour decision procedure. Range limits are in Hz,
/// the rest are fractions of the contour's range.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct ContourConfig {
    pub flat_below_hz: f64,
    pub small_below_hz: f64,
    pub medium_max_hz: f64,
    pub chord_tolerance: f64,
    pub endpoint_tolerance: f64,
    /// Interior extrema rising less than this above their neighbouring
    /// critical points are treated as ripple.
    pub min_prominence: f64,
}

impl Default for ContourConfig {
    fn default() -> Self {
        Self {
            flat_below_hz: 10.0,
            small_below_hz: 60.0,
            medium_max_hz: 100.0,
            chord_tolerance: 0.15,
            endpoint_tolerance: 0.2,
            min_prominence: 0.05,
        }
    }
}

impl ContourConfig {
    /// `d` is rounded to 1e-9 Hz first so that curves meant to span
    /// exactly a limit are not pushed across it by rounding error.
    pub fn range_class(&self, d: f64) -> Option<Range> {
        let d = (d * 1e9).round() / 1e9;
        if d < self.flat_below_hz {
            None
        } else if d < self.small_below_hz {
            Some(Range::Small)
        } else if d <= self.medium_max_hz {
            Some(Range::Medium)
        } else {
            Some(Range::Big)
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
enum Extremum {
    Max(f64),
    Min(f64),
}

impl Extremum {
    fn t(self) -> f64 {
        match self {
            Extremum::Max(t) | Extremum::Min(t) => t,
        }
    }
}

/// Sign-changing roots of the derivative inside (0, 1).
fn interior_extrema(c: &[f64; 4]) -> Vec<Extremum> {
    let (a, b, k) = (3.0 * c[3], 2.0 * c[2], c[1]);
    let scale = a.abs().max(b.abs()).max(k.abs());
    if scale == 0.0 {
        return Vec::new();
    }
    let mut roots = Vec::new();
    if a.abs() <= 1e-12 * scale {
        if b != 0.0 {
            roots.push(-k / b);
        }
    } else {
        let disc = b * b - 4.0 * a * k;
        if disc > 0.0 {
            let sq = disc.sqrt();
            // Numerically stable pair.
            let q = -0.5 * (b + b.signum() * sq);
            let (r1, r2) = if q != 0.0 { (q / a, k / q) } else { (sq / (2.0 * a), -sq / (2.0 * a)) };
            roots.push(r1.min(r2));
            roots.push(r1.max(r2));
        }
    }
    let second = |t: f64| b + 2.0 * a * t;
    roots
        .into_iter()
        .filter(|&t| t > 0.0 && t < 1.0)
        .filter_map(|t| {
            let s = second(t);
            if s < 0.0 {
                Some(Extremum::Max(t))
            } else if s > 0.0 {
                Some(Extremum::Min(t))
            } else {
                None
            }
        })
        .collect()
}

/// Classifies a smoothed contour into one of the 31 labels.
pub fn classify_contour<T: Scalar>(contour: &SmoothedContour<T>, cfg: &ContourConfig) -> ContourLabel {
    if !contour.voiced {
        return ContourLabel::Flat;
    }
    let d = contour.range.as_f64();
    let Some(range) = cfg.range_class(d) else {
        return ContourLabel::Flat;
    };
    let c = contour.coeffs.map(|x| x.as_f64());
    ContourLabel::Shaped(range, shape_of(&c, d, cfg))
}

fn shape_of(c: &[f64; 4], d: f64, cfg: &ContourConfig) -> Shape {
    let v = |t: f64| polyval(c, t);
    let (lo, hi) = sample_extent(c);
    let midline = (lo + hi) / 2.0;
    let high = |x: f64| x > midline;
    let (v0, v1) = (v(0.0), v(1.0));

    // Drop ripples whose height over the neighbouring critical points is small.
    let raw = interior_extrema(c);
    let mut knots = vec![0.0];
    knots.extend(raw.iter().map(|e| e.t()));
    knots.push(1.0);
    let extrema: Vec<Extremum> = raw
        .iter()
        .enumerate()
        .filter(|(i, e)| {
            let here = v(e.t());
            let prom = (here - v(knots[*i])).abs().min((here - v(knots[i + 2])).abs());
            prom >= cfg.min_prominence * d
        })
        .map(|(_, &e)| e)
        .collect();

    let dominant = extrema.iter().copied().max_by(|a, b| {
        let chord = (v0 + v1) / 2.0;
        (v(a.t()) - chord).abs().total_cmp(&(v(b.t()) - chord).abs())
    });
    let ends_close = (v0 - v1).abs() <= cfg.endpoint_tolerance * d;
    match dominant {
        Some(Extremum::Max(_)) => {
            if !high(v0) && !high(v1) && ends_close {
                Shape::Hat
            } else {
                Shape::Lhl
            }
        }
        Some(Extremum::Min(_)) => {
            if high(v0) && high(v1) && ends_close {
                Shape::Bucket
            } else {
                Shape::Hlh
            }
        }
        None => {
            let chord_mid = (v0 + v1) / 2.0;
            if (v(0.5) - chord_mid).abs() <= cfg.chord_tolerance * d {
                if v1 < v0 {
                    Shape::L
                } else {
                    Shape::H
                }
            } else {
                match (high(v0), high(v(0.5)), high(v1)) {
                    (true, false, false) => Shape::Hll,
                    (true, true, false) => Shape::Hhl,
                    (false, false, true) => Shape::Llh,
                    (false, true, true) => Shape::Lhh,
                    // Not reachable for a monotone curve; fall back on the trend.
                    _ if v1 < v0 => Shape::L,
                    _ => Shape::H,
                }
            }
        }
    }
}

/// Cubic coefficients of a canonical contour for `label`, offset by `base`.
/// Flat contours get a 5 Hz rise; the other ranges use 30, 80 and 150 Hz.
pub fn synthesize_contour(label: ContourLabel, base: f64) -> [f64; 4] {
    let (d, shape) = match label {
        ContourLabel::Flat => return [base, 5.0, 0.0, 0.0],
        ContourLabel::Shaped(r, s) => (
            match r {
                Range::Small => 30.0,
                Range::Medium => 80.0,
                Range::Big => 150.0,
            },
            s,
        ),
    };
    // Vertex at t = 0.3 for the asymmetric single-extremum shapes.
    let k = d / 0.49;
    match shape {
        Shape::L => [base + d, -d, 0.0, 0.0],
        Shape::H => [base, d, 0.0, 0.0],
        // D(1-t)³
        Shape::Hll => [base + d, -3.0 * d, 3.0 * d, -d],
        // D(1-t³)
        Shape::Hhl => [base + d, 0.0, 0.0, -d],
        // D t³
        Shape::Llh => [base, 0.0, 0.0, d],
        // D(1-(1-t)³)
        Shape::Lhh => [base, 3.0 * d, -3.0 * d, d],
        // D - k (t-0.3)²
        Shape::Lhl => [base + d - 0.09 * k, 0.6 * k, -k, 0.0],
        // k (t-0.3)²
        Shape::Hlh => [base + 0.09 * k, -0.6 * k, k, 0.0],
        // 4D t(1-t)
        Shape::Hat => [base, 4.0 * d, -4.0 * d, 0.0],
        // D(1 - 4t(1-t))
        Shape::Bucket => [base + d, -4.0 * d, 4.0 * d, 0.0],
    }
}
