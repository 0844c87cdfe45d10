//! Glottal closure instants from the phase slope of the LP residual.
//!
//! The residual of an order-13 linear predictor is reduced to its energy
//! centroid offset `d(n)` over a window of about 1.5 pitch periods. An
//! excitation peak drives `d` from positive to negative as the window
//! passes over it, so GCI candidates sit at negative-going zero crossings.

use serde::{Deserialize, Serialize};

use crate::align::PhonemeSegment;
use crate::audio::AudioBuffer;
use crate::scalar::Scalar;

use super::track::{MAX_PERIOD, MIN_PERIOD};

/// Strictly increasing GCI times in seconds.
#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
pub struct GciSequence {
    pub times: Vec<f64>,
}

impl GciSequence {
    pub fn len(&self) -> usize {
        self.times.len()
    }

    pub fn is_empty(&self) -> bool {
        self.times.is_empty()
    }

    pub fn spacings(&self) -> impl Iterator<Item = f64> + '_ {
        self.times.windows(2).map(|w| w[1] - w[0])
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct GciConfig {
    pub lp_order: usize,
    /// LP analysis window and hop, seconds.
    pub lp_window: f64,
    pub lp_hop: f64,
    /// Relative amount added to the zero-lag autocorrelation before LP.
    pub lp_noise_correction: f64,
    /// Autocorrelation window for the running period estimate, seconds.
    pub period_window: f64,
    /// Normalized autocorrelation a frame needs to count as periodic.
    pub voicing_threshold: f64,
    /// Median filter half-width over period frames.
    pub median_half_width: usize,
    pub default_period: f64,
    /// Phase-slope window length in periods.
    pub window_periods: f64,
    /// Search radius for snapping a crossing onto a residual peak, seconds.
    pub refine_radius: f64,
    /// Candidates weaker than this fraction of the strongest residual
    /// sample within half a period are dropped.
    pub peak_ratio: f64,
    /// Candidates closer than this fraction of the local period are merged.
    pub min_period_fraction: f64,
}

impl Default for GciConfig {
    fn default() -> Self {
        Self {
            lp_order: 13,
            lp_window: 0.025,
            lp_hop: 0.010,
            lp_noise_correction: 1e-2,
            period_window: 0.040,
            voicing_threshold: 0.3,
            median_half_width: 5,
            default_period: 0.008,
            window_periods: 1.5,
            refine_radius: 0.001,
            peak_ratio: 0.3,
            min_period_fraction: 0.5,
        }
    }
}

/// Levinson-Durbin recursion. Returns `a[1..=order]` with the prediction
/// error `e[n] = x[n] + Σ a[k] x[n-k]`.
pub fn levinson(r: &[f64], order: usize) -> Vec<f64> {
    let mut a = vec![0.0; order + 1];
    a[0] = 1.0;
    let mut err = r[0];
    if err <= 0.0 {
        return vec![0.0; order];
    }
    for i in 1..=order {
        let acc: f64 = (1..i).map(|j| a[j] * r[i - j]).sum::<f64>() + r[i];
        let k = -acc / err;
        let prev = a.clone();
        for j in 1..i {
            a[j] = prev[j] + k * prev[i - j];
        }
        a[i] = k;
        err *= 1.0 - k * k;
        if err <= 0.0 {
            break;
        }
    }
    a[1..].to_vec()
}

fn hamming(n: usize) -> Vec<f64> {
    if n == 1 {
        return vec![1.0];
    }
    (0..n)
        .map(|i| 0.54 - 0.46 * (2.0 * std::f64::consts::PI * i as f64 / (n - 1) as f64).cos())
        .collect()
}

/// Inverse-filtered signal, each sample using the predictor of the analysis
/// frame whose hop cell contains it.
pub fn lp_residual(x: &[f64], rate: u32, cfg: &GciConfig) -> Vec<f64> {
    let win = ((cfg.lp_window * f64::from(rate)).round() as usize).max(cfg.lp_order + 1);
    let hop = ((cfg.lp_hop * f64::from(rate)).round() as usize).max(1);
    let w = hamming(win);
    let mut e = vec![0.0; x.len()];
    let mut start = 0;
    while start < x.len() {
        // Window centred on the hop cell [start, start + hop).
        let centre = start + hop / 2;
        let lo = centre.saturating_sub(win / 2);
        let hi = (lo + win).min(x.len());
        let seg: Vec<f64> = x[lo..hi].iter().zip(&w).map(|(a, b)| a * b).collect();
        let mut r: Vec<f64> = (0..=cfg.lp_order)
            .map(|lag| seg.iter().zip(seg.iter().skip(lag)).map(|(a, b)| a * b).sum())
            .collect();
        // White-noise correction bounds the inverse filter's gain where the
        // spectrum is weak, so background noise is not blown up.
        r[0] *= 1.0 + cfg.lp_noise_correction;
        let a = levinson(&r, cfg.lp_order);
        for n in start..(start + hop).min(x.len()) {
            let pred: f64 = a
                .iter()
                .enumerate()
                .filter(|(k, _)| n > *k)
                .map(|(k, ak)| ak * x[n - k - 1])
                .sum();
            e[n] = x[n] + pred;
        }
        start += hop;
    }
    e
}

/// Running pitch period in samples, one value per `lp_hop` frame.
fn period_track(e: &[f64], rate: u32, cfg: &GciConfig) -> (Vec<usize>, usize) {
    let hop = ((cfg.lp_hop * f64::from(rate)).round() as usize).max(1);
    let win = (cfg.period_window * f64::from(rate)).round() as usize;
    let min_lag = (MIN_PERIOD * f64::from(rate)) as usize;
    let max_lag = (MAX_PERIOD * f64::from(rate)) as usize;
    let n_frames = e.len().div_ceil(hop);
    let mut raw: Vec<Option<usize>> = Vec::with_capacity(n_frames);
    for f in 0..n_frames {
        let centre = f * hop + hop / 2;
        let lo = centre.saturating_sub(win / 2);
        let hi = (lo + win).min(e.len());
        let seg = &e[lo..hi];
        if seg.len() <= max_lag + 1 {
            raw.push(None);
            continue;
        }
        let nacf: Vec<f64> = (0..=max_lag)
            .map(|lag| {
                if lag < min_lag {
                    return 0.0;
                }
                let (a, b) = (&seg[..seg.len() - lag], &seg[lag..]);
                let num: f64 = a.iter().zip(b).map(|(x, y)| x * y).sum();
                let den = (a.iter().map(|x| x * x).sum::<f64>() * b.iter().map(|x| x * x).sum::<f64>()).sqrt();
                if den > 0.0 {
                    num / den
                } else {
                    0.0
                }
            })
            .collect();
        let peaks: Vec<usize> = (min_lag..=max_lag)
            .filter(|&l| nacf[l] > 0.0 && nacf[l] >= nacf[l - 1] && (l == max_lag || nacf[l] >= nacf[l + 1]))
            .collect();
        let best = peaks.iter().map(|&l| nacf[l]).fold(0.0, f64::max);
        if best < cfg.voicing_threshold {
            raw.push(None);
            continue;
        }
        raw.push(peaks.into_iter().find(|&l| nacf[l] >= 0.85 * best));
    }
    let mut voiced: Vec<usize> = raw.iter().flatten().copied().collect();
    let global = if voiced.is_empty() {
        (cfg.default_period * f64::from(rate)).round() as usize
    } else {
        median(&mut voiced)
    };
    let track = (0..n_frames)
        .map(|f| {
            let lo = f.saturating_sub(cfg.median_half_width);
            let hi = (f + cfg.median_half_width + 1).min(n_frames);
            let mut near: Vec<usize> = raw[lo..hi].iter().flatten().copied().collect();
            if near.is_empty() {
                global
            } else {
                median(&mut near)
            }
        })
        .collect();
    (track, hop)
}

fn median(v: &mut [usize]) -> usize {
    v.sort_unstable();
    v[v.len() / 2]
}

/// Voiced-phone sample ranges.
fn voiced_ranges(segments: &[PhonemeSegment], rate: u32, len: usize) -> Vec<(usize, usize)> {
    segments
        .iter()
        .filter(|s| s.phone.is_voiced && !s.phone.is_silence && s.end > s.start)
        .map(|s| {
            let lo = ((s.start * f64::from(rate)).round() as usize).min(len);
            let hi = ((s.end * f64::from(rate)).round() as usize).min(len);
            (lo, hi)
        })
        .collect()
}

/// GCIs inside the voiced phones of `segments`.
///
/// Candidates are snapped to the largest residual magnitude within
/// `refine_radius`, weak ones are dropped, peaks closer than half the local
/// period (and never closer than the shortest period) are merged, keeping
/// the stronger, and GCIs with no neighbour
/// within the longest period are removed.
pub fn detect_gcis<T: Scalar>(audio: &AudioBuffer<T>, segments: &[PhonemeSegment], cfg: &GciConfig) -> GciSequence {
    let rate = audio.sample_rate;
    let x: Vec<f64> = audio.samples.iter().map(|s| s.as_f64()).collect();
    let ranges = voiced_ranges(segments, rate, x.len());
    if ranges.is_empty() || x.iter().all(|&s| s == 0.0) {
        return GciSequence::default();
    }
    let e = lp_residual(&x, rate, cfg);
    let (periods, period_hop) = period_track(&e, rate, cfg);
    let period_at = |n: usize| periods[(n / period_hop).min(periods.len() - 1)];

    // Prefix sums of e² and n·e² give the centroid of any window in O(1).
    let mut p0 = vec![0.0; e.len() + 1];
    let mut p1 = vec![0.0; e.len() + 1];
    for (n, v) in e.iter().enumerate() {
        let w = v * v;
        p0[n + 1] = p0[n] + w;
        p1[n + 1] = p1[n] + n as f64 * w;
    }
    let total_energy = p0[e.len()];
    let floor = 1e-12 * total_energy / e.len() as f64;
    let slope = |n: usize| -> Option<f64> {
        let half = ((cfg.window_periods * period_at(n) as f64) / 2.0).round() as usize;
        let lo = n.saturating_sub(half);
        let hi = (n + half + 1).min(e.len());
        let energy = p0[hi] - p0[lo];
        if energy <= floor * (hi - lo) as f64 {
            return None;
        }
        Some((p1[hi] - p1[lo]) / energy - n as f64)
    };

    let radius = (cfg.refine_radius * f64::from(rate)).round() as usize;
    let mut candidates: Vec<usize> = Vec::new();
    for &(lo, hi) in &ranges {
        let mut prev = None;
        for n in lo..hi {
            let d = slope(n);
            if let (Some(a), Some(b)) = (prev, d) {
                if a > 0.0 && b <= 0.0 {
                    let s = n.saturating_sub(radius);
                    let t = (n + radius + 1).min(e.len());
                    let peak = (s..t).max_by(|&i, &j| e[i].abs().total_cmp(&e[j].abs())).unwrap_or(n);
                    let half = period_at(peak) / 2;
                    let local = e[peak.saturating_sub(half)..(peak + half + 1).min(e.len())]
                        .iter()
                        .fold(0.0f64, |m, v| m.max(v.abs()));
                    if e[peak].abs() >= cfg.peak_ratio * local && peak >= lo && peak < hi {
                        candidates.push(peak);
                    }
                }
            }
            prev = d;
        }
    }
    candidates.sort_unstable();
    candidates.dedup();

    let min_gap = (MIN_PERIOD * f64::from(rate)).round() as usize;
    let mut kept: Vec<usize> = Vec::with_capacity(candidates.len());
    for c in candidates {
        let gap = min_gap.max((cfg.min_period_fraction * period_at(c) as f64) as usize);
        match kept.last() {
            Some(&last) if c - last < gap => {
                if e[c].abs() > e[last].abs() {
                    *kept.last_mut().expect("non-empty") = c;
                }
            }
            _ => kept.push(c),
        }
    }

    let max_gap = MAX_PERIOD * f64::from(rate);
    let isolated = |i: usize| {
        let near_prev = i > 0 && ((kept[i] - kept[i - 1]) as f64) <= max_gap;
        let near_next = i + 1 < kept.len() && ((kept[i + 1] - kept[i]) as f64) <= max_gap;
        !(near_prev || near_next)
    };
    let times = (0..kept.len())
        .filter(|&i| !isolated(i))
        .map(|i| kept[i] as f64 / f64::from(rate))
        .collect();
    GciSequence { times }
}
