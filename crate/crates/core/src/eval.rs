//! Comparison of automatic annotations against reference annotations.

use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};

use crate::document::Interval;
use crate::error::{Error, Result};
use crate::events::BreakIndex;
use crate::pitch::ContourLabel;

pub const ERROR_THRESHOLDS_MS: [u32; 3] = [10, 20, 30];
pub const HISTOGRAM_BIN_MS: f64 = 10.0;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SegmentationReport {
    pub segments: usize,
    /// |hyp duration − ref duration| per segment.
    pub duration_errors_ms: Vec<f64>,
    /// |hyp time − ref time| per boundary, including both outer edges.
    pub boundary_errors_ms: Vec<f64>,
    /// Counts of duration errors in 10 ms bins, `[0,10), [10,20), ...`.
    pub duration_histogram: Vec<usize>,
    /// Percentage of segments whose duration error is at most the threshold.
    pub duration_within: BTreeMap<u32, f64>,
    /// Percentage of boundaries whose error is at most the threshold.
    pub boundary_within: BTreeMap<u32, f64>,
}

fn percent(part: usize, total: usize) -> f64 {
    if total == 0 {
        0.0
    } else {
        100.0 * part as f64 / total as f64
    }
}

fn within(errors: &[f64]) -> BTreeMap<u32, f64> {
    ERROR_THRESHOLDS_MS
        .iter()
        .map(|&t| {
            // Errors are rebuilt from microsecond times; allow for that rounding.
            let n = errors.iter().filter(|&&e| e <= f64::from(t) + 1e-6).count();
            (t, percent(n, errors.len()))
        })
        .collect()
}

/// Compares two segmentations of the same phone sequence. Zero-length
/// segments are ignored on both sides.
pub fn evaluate_segmentation(hyp: &[Interval], reference: &[Interval]) -> Result<SegmentationReport> {
    let keep = |v: &[Interval]| -> Vec<Interval> { v.iter().filter(|s| s.end > s.start).cloned().collect() };
    let (hyp, reference) = (keep(hyp), keep(reference));
    if reference.is_empty() {
        return Err(Error::EmptyInput("reference segmentation".into()));
    }
    if hyp.len() != reference.len() || hyp.iter().zip(&reference).any(|(h, r)| h.text != r.text) {
        return Err(Error::Mismatch("hypothesis and reference phone sequences differ".into()));
    }
    let duration_errors_ms: Vec<f64> = hyp
        .iter()
        .zip(&reference)
        .map(|(h, r)| ((h.end - h.start) - (r.end - r.start)).abs() * 1000.0)
        .collect();
    let edges = |v: &[Interval]| -> Vec<f64> {
        v.iter().map(|s| s.start).chain(v.last().map(|s| s.end)).collect()
    };
    let boundary_errors_ms: Vec<f64> = edges(&hyp)
        .iter()
        .zip(edges(&reference))
        .map(|(h, r)| (h - r).abs() * 1000.0)
        .collect();
    let mut duration_histogram = Vec::new();
    for &e in &duration_errors_ms {
        let bin = (e / HISTOGRAM_BIN_MS + 1e-9).floor() as usize;
        if duration_histogram.len() <= bin {
            duration_histogram.resize(bin + 1, 0);
        }
        duration_histogram[bin] += 1;
    }
    Ok(SegmentationReport {
        segments: hyp.len(),
        duration_within: within(&duration_errors_ms),
        boundary_within: within(&boundary_errors_ms),
        duration_errors_ms,
        boundary_errors_ms,
        duration_histogram,
    })
}

/// Merges per-utterance reports as if their segments had been scored together.
pub fn pool_segmentation(reports: &[SegmentationReport]) -> Result<SegmentationReport> {
    if reports.is_empty() {
        return Err(Error::EmptyInput("segmentation reports".into()));
    }
    let duration_errors_ms: Vec<f64> = reports.iter().flat_map(|r| r.duration_errors_ms.iter().copied()).collect();
    let boundary_errors_ms: Vec<f64> = reports.iter().flat_map(|r| r.boundary_errors_ms.iter().copied()).collect();
    let mut duration_histogram = vec![0; reports.iter().map(|r| r.duration_histogram.len()).max().unwrap_or(0)];
    for r in reports {
        for (total, n) in duration_histogram.iter_mut().zip(&r.duration_histogram) {
            *total += n;
        }
    }
    Ok(SegmentationReport {
        segments: reports.iter().map(|r| r.segments).sum(),
        duration_within: within(&duration_errors_ms),
        boundary_within: within(&boundary_errors_ms),
        duration_errors_ms,
        boundary_errors_ms,
        duration_histogram,
    })
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BreakReport {
    pub total: usize,
    pub correct: usize,
    pub accuracy: f64,
    /// `confusion[r][h]`: reference index `r + 1` labelled `h + 1`.
    pub confusion: [[usize; 3]; 3],
}

impl BreakReport {
    /// Count for 1-based reference and hypothesis indices.
    pub fn count(&self, reference: u8, hypothesis: u8) -> usize {
        self.confusion[usize::from(reference) - 1][usize::from(hypothesis) - 1]
    }
}

fn check_lengths(hyp: usize, reference: usize, what: &str) -> Result<()> {
    if reference == 0 {
        return Err(Error::EmptyInput(format!("{what} lists")));
    }
    if hyp != reference {
        return Err(Error::Mismatch(format!(
            "{hyp} hypothesis {what} against {reference} reference {what}"
        )));
    }
    Ok(())
}

pub fn evaluate_breaks(hyp: &[BreakIndex], reference: &[BreakIndex]) -> Result<BreakReport> {
    check_lengths(hyp.len(), reference.len(), "break")?;
    let mut confusion = [[0usize; 3]; 3];
    for (h, r) in hyp.iter().zip(reference) {
        confusion[usize::from(r.value()) - 1][usize::from(h.value()) - 1] += 1;
    }
    let correct = (0..3).map(|i| confusion[i][i]).sum();
    Ok(BreakReport {
        total: reference.len(),
        correct,
        accuracy: percent(correct, reference.len()),
        confusion,
    })
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LabelAccuracy {
    pub reference: usize,
    pub correct: usize,
    pub accuracy: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PitchReport {
    pub total: usize,
    pub correct: usize,
    pub accuracy: f64,
    /// Keyed by reference label; only labels present in the reference.
    pub per_label: BTreeMap<ContourLabel, LabelAccuracy>,
}

pub fn evaluate_pitch_labels(hyp: &[ContourLabel], reference: &[ContourLabel]) -> Result<PitchReport> {
    check_lengths(hyp.len(), reference.len(), "pitch label")?;
    let mut per_label: BTreeMap<ContourLabel, LabelAccuracy> = BTreeMap::new();
    for (h, r) in hyp.iter().zip(reference) {
        let entry = per_label.entry(*r).or_insert(LabelAccuracy {
            reference: 0,
            correct: 0,
            accuracy: 0.0,
        });
        entry.reference += 1;
        entry.correct += usize::from(h == r);
    }
    for v in per_label.values_mut() {
        v.accuracy = percent(v.correct, v.reference);
    }
    let correct = per_label.values().map(|v| v.correct).sum();
    Ok(PitchReport {
        total: reference.len(),
        correct,
        accuracy: percent(correct, reference.len()),
        per_label,
    })
}
