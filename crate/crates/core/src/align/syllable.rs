//! Vowel-nucleus syllabification with maximal legal onsets.

use std::collections::{BTreeMap, BTreeSet};
use std::ops::Range;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::phones::Phone;

/// Legal multi-consonant onsets per language. Single consonants are always
/// legal onsets; any cluster not listed is illegal.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct OnsetRules {
    clusters: BTreeMap<String, BTreeSet<Vec<String>>>,
}

const ENGLISH_CLUSTERS: &[&str] = &[
    "p l", "p r", "b l", "b r", "t r", "d r", "k l", "k r", "g l", "g r", "f l", "f r", "th r",
    "sh r", "s p", "s t", "s k", "s m", "s n", "s l", "s w", "t w", "d w", "k w", "s p l", "s p r",
    "s t r", "s k r", "s k w",
];

const HINDI_CLUSTERS: &[&str] = &["p r", "k r", "t r", "g r", "b r", "s t", "s w", "k y", "p y", "v y"];

impl Default for OnsetRules {
    /// Shipped defaults: a small English cluster list, a few Hindi ones,
    /// and none for Tamil.
    fn default() -> Self {
        let mut rules = Self::empty();
        for c in ENGLISH_CLUSTERS {
            rules.allow("en", c.split(' '));
        }
        for c in HINDI_CLUSTERS {
            rules.allow("hi", c.split(' '));
        }
        rules.clusters.entry("ta".to_owned()).or_default();
        rules
    }
}

impl OnsetRules {
    pub fn empty() -> Self {
        Self {
            clusters: BTreeMap::new(),
        }
    }

    pub fn allow<I, S>(&mut self, language: &str, cluster: I)
    where
        I: IntoIterator<Item = S>,
        S: Into<String>,
    {
        self.clusters
            .entry(language.to_owned())
            .or_default()
            .insert(cluster.into_iter().map(Into::into).collect());
    }

    pub fn is_legal(&self, language: &str, cluster: &[&str]) -> bool {
        match cluster.len() {
            0 | 1 => true,
            _ => self.clusters.get(language).is_some_and(|set| {
                set.iter()
                    .any(|c| c.len() == cluster.len() && c.iter().zip(cluster).all(|(a, b)| a == b))
            }),
        }
    }

    /// Parses `language<TAB>c1 c2 ...` lines.
    pub fn parse_tsv(text: &str) -> Result<Self> {
        let mut rules = Self::empty();
        for (i, line) in text.lines().enumerate() {
            let line = line.trim();
            if line.is_empty() || line.starts_with('#') {
                continue;
            }
            let (lang, cluster) = line.split_once('\t').ok_or_else(|| Error::Parse {
                line: i + 1,
                message: "expected language<TAB>cluster".into(),
            })?;
            rules.allow(lang.trim(), cluster.split_whitespace());
        }
        Ok(rules)
    }
}

#[derive(Debug, Clone, Default, PartialEq)]
pub struct Syllabifier {
    pub onsets: OnsetRules,
}

impl Syllabifier {
    pub fn new(onsets: OnsetRules) -> Self {
        Self { onsets }
    }

    /// Splits one word's non-silence phones into syllables, as index ranges.
    ///
    /// Every range holds exactly one vowel. Word-initial consonants join the
    /// first syllable and word-final ones the last. An intervocalic cluster
    /// gives the next syllable its longest legal onset and the rest stays
    /// as coda.
    pub fn spans(&self, phones: &[Phone], language: &str) -> Result<Vec<Range<usize>>> {
        let vowels: Vec<usize> = phones
            .iter()
            .enumerate()
            .filter(|(_, p)| p.is_vowel)
            .map(|(i, _)| i)
            .collect();
        if vowels.is_empty() {
            let word: Vec<&str> = phones.iter().map(|p| p.label.as_str()).collect();
            return Err(Error::Vowelless(word.join(" ")));
        }
        let mut starts = vec![0];
        for pair in vowels.windows(2) {
            let (v1, v2) = (pair[0], pair[1]);
            let cluster: Vec<&str> = phones[v1 + 1..v2].iter().map(|p| p.label.as_str()).collect();
            let onset_len = (0..=cluster.len())
                .rev()
                .find(|&k| self.onsets.is_legal(language, &cluster[cluster.len() - k..]))
                .unwrap_or(0);
            starts.push(v2 - onset_len);
        }
        let mut spans: Vec<Range<usize>> = starts.windows(2).map(|w| w[0]..w[1]).collect();
        spans.push(*starts.last().expect("non-empty")..phones.len());
        Ok(spans)
    }

    pub fn syllabify(&self, phones: &[Phone], language: &str) -> Result<Vec<Vec<Phone>>> {
        Ok(self
            .spans(phones, language)?
            .into_iter()
            .map(|r| phones[r].to_vec())
            .collect())
    }
}
