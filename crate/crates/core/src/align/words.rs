//! Word and syllable tiers derived from the phone alignment.

use super::segment::{PhonemeSegment, SyllableSegment, WordSegment};
use super::syllable::Syllabifier;
use crate::error::{Error, Result};

/// Orthographic word and the number of (non-silence) phones it spans.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct WordSpec {
    pub text: String,
    pub phone_count: usize,
}

/// Groups aligned phones into words. Silence segments belong to no word and
/// may sit only between words; a word spans its first phone's start to its
/// last phone's end.
pub fn derive_word_boundaries(segments: &[PhonemeSegment], words: &[WordSpec]) -> Result<Vec<WordSegment>> {
    let speech: Vec<(usize, &PhonemeSegment)> = segments
        .iter()
        .enumerate()
        .filter(|(_, s)| !s.phone.is_silence)
        .collect();
    let expected: usize = words.iter().map(|w| w.phone_count).sum();
    if speech.len() != expected {
        return Err(Error::PhoneCountMismatch(format!(
            "transcription has {expected} phones, alignment has {}",
            speech.len()
        )));
    }
    let mut out = Vec::with_capacity(words.len());
    let mut cursor = 0;
    for w in words {
        if w.phone_count == 0 {
            return Err(Error::PhoneCountMismatch(format!("word '{}' has no phones", w.text)));
        }
        let members = &speech[cursor..cursor + w.phone_count];
        cursor += w.phone_count;
        let (first_idx, first) = members[0];
        let (last_idx, last) = members[members.len() - 1];
        if last_idx - first_idx + 1 != members.len() {
            return Err(Error::PhoneCountMismatch(format!(
                "silence inside word '{}'",
                w.text
            )));
        }
        out.push(WordSegment {
            text: w.text.clone(),
            start: first.start,
            end: last.end,
            phones: members.iter().map(|(_, s)| (*s).clone()).collect(),
            syllables: Vec::new(),
        });
    }
    Ok(out)
}

/// Fills `word.syllables` by syllabifying its phones.
pub fn attach_syllables(word: &mut WordSegment, syllabifier: &Syllabifier, language: &str) -> Result<()> {
    let phones: Vec<_> = word.phones.iter().map(|s| s.phone.clone()).collect();
    let spans = syllabifier
        .spans(&phones, language)
        .map_err(|e| match e {
            Error::Vowelless(_) => Error::Vowelless(word.text.clone()),
            other => other,
        })?;
    word.syllables = spans
        .into_iter()
        .map(|r| SyllableSegment::from_phones(word.phones[r].to_vec()))
        .collect();
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::phones::Phone;

    fn seg(label: &str, start: f64, end: f64) -> PhonemeSegment {
        let phone = match label {
            "sil" => Phone::silence(),
            "a" | "i" | "u" => Phone::vowel(label),
            _ => Phone::consonant(label, true),
        };
        PhonemeSegment { phone, start, end }
    }

    fn spec(text: &str, n: usize) -> WordSpec {
        WordSpec {
            text: text.into(),
            phone_count: n,
        }
    }

    #[test]
    fn single_word_with_zero_length_silence() {
        let segs = [seg("m", 0.0, 0.1), seg("a", 0.1, 0.3), seg("sil", 0.3, 0.3)];
        let words = derive_word_boundaries(&segs, &[spec("ma", 2)]).unwrap();
        assert_eq!(words.len(), 1);
        assert_eq!((words[0].start, words[0].end), (0.0, 0.3));
    }

    #[test]
    fn silence_gap_belongs_to_no_word() {
        let segs = [
            seg("m", 0.0, 0.1),
            seg("a", 0.1, 0.3),
            seg("sil", 0.3, 0.4),
            seg("n", 0.4, 0.5),
            seg("i", 0.5, 0.6),
            seg("sil", 0.6, 0.6),
        ];
        let words = derive_word_boundaries(&segs, &[spec("ma", 2), spec("ni", 2)]).unwrap();
        assert_eq!((words[0].start, words[0].end), (0.0, 0.3));
        assert_eq!((words[1].start, words[1].end), (0.4, 0.6));
    }

    #[test]
    fn count_mismatch() {
        let segs = [seg("m", 0.0, 0.1), seg("a", 0.1, 0.3)];
        assert!(matches!(
            derive_word_boundaries(&segs, &[spec("mam", 3)]),
            Err(Error::PhoneCountMismatch(_))
        ));
    }

    #[test]
    fn syllables_nest_in_words() {
        let segs = [
            seg("k", 0.0, 0.05),
            seg("a", 0.05, 0.15),
            seg("m", 0.15, 0.2),
            seg("a", 0.2, 0.3),
            seg("l", 0.3, 0.35),
        ];
        let mut words = derive_word_boundaries(&segs, &[spec("kamal", 5)]).unwrap();
        attach_syllables(&mut words[0], &Syllabifier::default(), "ta").unwrap();
        let syl = &words[0].syllables;
        assert_eq!(syl.len(), 2);
        assert_eq!(syl[0].text, "ka");
        assert_eq!(syl[1].text, "mal");
        assert_eq!((syl[0].start, syl[0].end, syl[1].start, syl[1].end), (0.0, 0.15, 0.15, 0.35));
    }
}
