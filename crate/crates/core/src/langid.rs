//! Word-level language identification from syllable contour labels.
//!
//! Each language gets a table of label frequencies per syllable-count
//! category (words of 1 to 5 syllables). A word scores, per language, the
//! sum of its syllables' frequencies in the matching category.

use std::collections::BTreeMap;
use std::path::Path;

use rand::seq::SliceRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::pitch::ContourLabel;

pub const MAX_SYLLABLES: usize = 5;
pub const DEFAULT_EPSILON: f64 = 1e-4;
/// Seed of the train/test split used by the tools and tests.
pub const SPLIT_SEED: u64 = 0x5EED_2013;

/// Label distribution of one syllable-count category.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CategoryTable {
    /// Words that fell into this category.
    pub words: usize,
    /// Set when no word had this many syllables and the distribution is uniform.
    pub empty: bool,
    pub frequencies: BTreeMap<ContourLabel, f64>,
}

impl CategoryTable {
    pub fn frequency(&self, label: ContourLabel) -> f64 {
        self.frequencies.get(&label).copied().unwrap_or(0.0)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ContourFrequencyTable {
    pub language: String,
    pub epsilon: f64,
    /// Keyed by syllable count, 1 to 5.
    pub categories: BTreeMap<usize, CategoryTable>,
}

/// Counts labels per category and turns them into smoothed frequencies:
/// `(count / total + ε) / (1 + 31 ε)`. Words longer than five syllables
/// are ignored.
pub fn build_frequency_table(words: &[Vec<ContourLabel>], language: &str, epsilon: f64) -> ContourFrequencyTable {
    let mut counts: BTreeMap<usize, (usize, BTreeMap<ContourLabel, usize>)> =
        (1..=MAX_SYLLABLES).map(|c| (c, (0, BTreeMap::new()))).collect();
    for word in words {
        if let Some((n_words, labels)) = counts.get_mut(&word.len()) {
            *n_words += 1;
            for &l in word {
                *labels.entry(l).or_default() += 1;
            }
        }
    }
    let all = ContourLabel::all();
    let n = ContourLabel::COUNT as f64;
    let categories = counts
        .into_iter()
        .map(|(cat, (n_words, labels))| {
            let total: usize = labels.values().sum();
            let table = if total == 0 {
                CategoryTable {
                    words: n_words,
                    empty: true,
                    frequencies: all.iter().map(|&l| (l, 1.0 / n)).collect(),
                }
            } else {
                let frequencies = all
                    .iter()
                    .map(|&l| {
                        let p = labels.get(&l).copied().unwrap_or(0) as f64 / total as f64;
                        (l, (p + epsilon) / (1.0 + n * epsilon))
                    })
                    .collect();
                CategoryTable {
                    words: n_words,
                    empty: false,
                    frequencies,
                }
            };
            (cat, table)
        })
        .collect();
    ContourFrequencyTable {
        language: language.to_owned(),
        epsilon,
        categories,
    }
}

impl ContourFrequencyTable {
    pub fn category(&self, syllables: usize) -> Result<&CategoryTable> {
        if !(1..=MAX_SYLLABLES).contains(&syllables) {
            return Err(Error::SyllableCount(syllables));
        }
        self.categories
            .get(&syllables)
            .ok_or_else(|| Error::ModelFormat(format!("table '{}' lacks category {syllables}", self.language)))
    }

    /// Copy with every frequency multiplied by `factor`.
    pub fn scaled(&self, factor: f64) -> Self {
        let mut out = self.clone();
        for cat in out.categories.values_mut() {
            for f in cat.frequencies.values_mut() {
                *f *= factor;
            }
        }
        out
    }

    pub fn to_json(&self) -> Result<String> {
        Ok(serde_json::to_string_pretty(self)?)
    }

    pub fn from_json(text: &str) -> Result<Self> {
        let table: Self = serde_json::from_str(text)?;
        for cat in table.categories.keys() {
            if !(1..=MAX_SYLLABLES).contains(cat) {
                return Err(Error::ModelFormat(format!("category {cat} outside 1..=5")));
            }
        }
        Ok(table)
    }

    pub fn save(&self, path: impl AsRef<Path>) -> Result<()> {
        let path = path.as_ref();
        std::fs::write(path, self.to_json()? + "\n").map_err(|e| Error::io(path, e))
    }

    pub fn load(path: impl AsRef<Path>) -> Result<Self> {
        let path = path.as_ref();
        Self::from_json(&std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LanguageScore {
    pub language: String,
    pub score: f64,
}

pub fn score_word(tables: &[ContourFrequencyTable], labels: &[ContourLabel]) -> Result<Vec<LanguageScore>> {
    tables
        .iter()
        .map(|t| {
            let cat = t.category(labels.len())?;
            Ok(LanguageScore {
                language: t.language.clone(),
                score: labels.iter().map(|&l| cat.frequency(l)).sum(),
            })
        })
        .collect()
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Classification {
    pub language: String,
    /// Another language reached exactly the same score.
    pub tie: bool,
}

/// Highest score wins; exact ties go to the lexicographically smallest id.
pub fn classify_word(scores: &[LanguageScore]) -> Option<Classification> {
    let best = scores.iter().map(|s| s.score).fold(f64::NEG_INFINITY, f64::max);
    let mut top: Vec<&str> = scores
        .iter()
        .filter(|s| s.score == best)
        .map(|s| s.language.as_str())
        .collect();
    top.sort_unstable();
    top.dedup();
    Some(Classification {
        language: top.first()?.to_string(),
        tie: top.len() > 1,
    })
}

/// Shuffles with a seeded generator and holds out `test_fraction` of the
/// items (rounded) for testing. Returns `(train, test)`.
pub fn split_train_test<X: Clone>(items: &[X], test_fraction: f64, seed: u64) -> (Vec<X>, Vec<X>) {
    let mut order: Vec<usize> = (0..items.len()).collect();
    order.shuffle(&mut ChaCha8Rng::seed_from_u64(seed));
    let n_test = (items.len() as f64 * test_fraction).round() as usize;
    let test = order[..n_test].iter().map(|&i| items[i].clone()).collect();
    let train = order[n_test..].iter().map(|&i| items[i].clone()).collect();
    (train, test)
}

/// One word per line: `text<TAB>label label ...`. Blank lines and lines
/// starting with `#` are skipped.
pub fn parse_word_labels(text: &str) -> Result<Vec<(String, Vec<ContourLabel>)>> {
    text.lines()
        .enumerate()
        .filter(|(_, l)| !l.trim().is_empty() && !l.starts_with('#'))
        .map(|(i, line)| {
            let (word, labels) = line.split_once('\t').ok_or_else(|| Error::Parse {
                line: i + 1,
                message: "expected 'word<TAB>labels'".into(),
            })?;
            let labels = labels
                .split_whitespace()
                .map(|l| {
                    l.parse().map_err(|_| Error::Parse {
                        line: i + 1,
                        message: format!("unknown contour label '{l}'"),
                    })
                })
                .collect::<Result<Vec<_>>>()?;
            Ok((word.to_owned(), labels))
        })
        .collect()
}
