use serde::{Deserialize, Serialize};

use crate::phones::Phone;

/// One phone occupying `[start, end]` seconds. Only silences may have zero length.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PhonemeSegment {
    pub phone: Phone,
    pub start: f64,
    pub end: f64,
}

impl PhonemeSegment {
    pub fn duration(&self) -> f64 {
        self.end - self.start
    }

    pub fn label(&self) -> &str {
        &self.phone.label
    }
}

/// Contiguous phones around exactly one vowel nucleus.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SyllableSegment {
    pub phones: Vec<PhonemeSegment>,
    pub start: f64,
    pub end: f64,
    pub text: String,
}

impl SyllableSegment {
    pub fn from_phones(phones: Vec<PhonemeSegment>) -> Self {
        let start = phones.first().map_or(0.0, |p| p.start);
        let end = phones.last().map_or(0.0, |p| p.end);
        let text = phones.iter().map(|p| p.phone.label.as_str()).collect();
        Self {
            phones,
            start,
            end,
            text,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct WordSegment {
    pub text: String,
    pub start: f64,
    pub end: f64,
    /// Non-silence phones of the word, in order.
    pub phones: Vec<PhonemeSegment>,
    /// Filled by syllabification; empty until then.
    pub syllables: Vec<SyllableSegment>,
}

/// Checks that segments tile `[0, duration]` without gaps or overlaps.
pub fn tiles(segments: &[PhonemeSegment], duration: f64) -> bool {
    let mut cursor = 0.0;
    for s in segments {
        if s.start != cursor || s.end < s.start {
            return false;
        }
        if s.end == s.start && !s.phone.is_silence {
            return false;
        }
        cursor = s.end;
    }
    cursor == duration
}
