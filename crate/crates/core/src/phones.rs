//! Phone inventories and cross-language phone mappings.

use std::collections::BTreeMap;
use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Reserved silence label.
pub const SILENCE: &str = "sil";

#[derive(Debug, Clone, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct Phone {
    pub label: String,
    pub is_vowel: bool,
    pub is_silence: bool,
    pub is_voiced: bool,
}

impl Phone {
    pub fn vowel(label: &str) -> Self {
        Self {
            label: label.to_owned(),
            is_vowel: true,
            is_silence: false,
            is_voiced: true,
        }
    }

    pub fn consonant(label: &str, voiced: bool) -> Self {
        Self {
            label: label.to_owned(),
            is_vowel: false,
            is_silence: false,
            is_voiced: voiced,
        }
    }

    pub fn silence() -> Self {
        Self {
            label: SILENCE.to_owned(),
            is_vowel: false,
            is_silence: true,
            is_voiced: false,
        }
    }
}

/// Phone set of one language (or the shared set in language-independent mode).
#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
pub struct Inventory {
    phones: BTreeMap<String, Phone>,
}

impl Inventory {
    /// Builds an inventory, adding `sil` if absent.
    pub fn new(phones: impl IntoIterator<Item = Phone>) -> Result<Self> {
        let mut map = BTreeMap::new();
        for p in phones {
            if p.label.is_empty() {
                return Err(Error::Config("empty phone label in inventory".into()));
            }
            if p.is_silence && p.label != SILENCE {
                return Err(Error::Config(format!(
                    "silence phone must be labelled '{SILENCE}', got '{}'",
                    p.label
                )));
            }
            map.insert(p.label.clone(), p);
        }
        map.entry(SILENCE.to_owned()).or_insert_with(Phone::silence);
        Ok(Self { phones: map })
    }

    pub fn get(&self, label: &str) -> Option<&Phone> {
        self.phones.get(label)
    }

    pub fn lookup(&self, label: &str) -> Result<&Phone> {
        self.get(label)
            .ok_or_else(|| Error::MissingModel(label.to_owned()))
    }

    pub fn phones(&self) -> impl Iterator<Item = &Phone> {
        self.phones.values()
    }

    pub fn labels(&self) -> impl Iterator<Item = &str> {
        self.phones.keys().map(String::as_str)
    }

    pub fn len(&self) -> usize {
        self.phones.len()
    }

    pub fn is_empty(&self) -> bool {
        self.phones.is_empty()
    }

    /// Parses `label<TAB>vowel|consonant|silence[<TAB>voiced|unvoiced]` lines.
    /// Blank lines and `#` comments are skipped. Vowels default to voiced,
    /// consonants to unvoiced.
    pub fn parse_tsv(text: &str) -> Result<Self> {
        let mut phones = Vec::new();
        for (i, line) in text.lines().enumerate() {
            let line = line.trim();
            if line.is_empty() || line.starts_with('#') {
                continue;
            }
            let cols: Vec<&str> = line.split('\t').map(str::trim).collect();
            let err = |message: String| Error::Parse {
                line: i + 1,
                message,
            };
            let label = cols[0];
            let class = cols.get(1).copied().unwrap_or("consonant");
            let voiced = match cols.get(2).copied() {
                None => None,
                Some("voiced") => Some(true),
                Some("unvoiced") => Some(false),
                Some(other) => return Err(err(format!("unknown voicing '{other}'"))),
            };
            let phone = match class {
                "vowel" => Phone {
                    is_voiced: voiced.unwrap_or(true),
                    ..Phone::vowel(label)
                },
                "consonant" => Phone::consonant(label, voiced.unwrap_or(false)),
                "silence" => Phone::silence(),
                other => return Err(err(format!("unknown phone class '{other}'"))),
            };
            phones.push(phone);
        }
        Self::new(phones)
    }

    pub fn load(path: impl AsRef<Path>) -> Result<Self> {
        let path = path.as_ref();
        let text = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
        Self::parse_tsv(&text)
    }

    pub fn to_tsv(&self) -> String {
        let mut out = String::new();
        for p in self.phones.values() {
            let class = if p.is_silence {
                "silence"
            } else if p.is_vowel {
                "vowel"
            } else {
                "consonant"
            };
            let voicing = if p.is_voiced { "voiced" } else { "unvoiced" };
            out.push_str(&format!("{}\t{class}\t{voicing}\n", p.label));
        }
        out
    }
}

/// `(language, phone) → shared phone` table for language-independent models.
#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
pub struct PhoneMapping {
    table: BTreeMap<String, BTreeMap<String, String>>,
}

impl PhoneMapping {
    pub fn insert(&mut self, language: &str, phone: &str, shared: &str) {
        self.table
            .entry(language.to_owned())
            .or_default()
            .insert(phone.to_owned(), shared.to_owned());
    }

    /// Identity mapping over an inventory for one language.
    pub fn identity(language: &str, inventory: &Inventory) -> Self {
        let mut m = Self::default();
        for label in inventory.labels() {
            m.insert(language, label, label);
        }
        m
    }

    pub fn get(&self, language: &str, phone: &str) -> Option<&str> {
        self.table.get(language)?.get(phone).map(String::as_str)
    }

    pub fn languages(&self) -> impl Iterator<Item = &str> {
        self.table.keys().map(String::as_str)
    }

    /// Every distinct shared label.
    pub fn shared_labels(&self) -> std::collections::BTreeSet<&str> {
        self.table
            .values()
            .flat_map(|m| m.values().map(String::as_str))
            .collect()
    }

    /// Parses `language<TAB>phone<TAB>shared` lines.
    pub fn parse_tsv(text: &str) -> Result<Self> {
        let mut m = Self::default();
        for (i, line) in text.lines().enumerate() {
            let line = line.trim();
            if line.is_empty() || line.starts_with('#') {
                continue;
            }
            let cols: Vec<&str> = line.split('\t').map(str::trim).collect();
            if cols.len() != 3 || cols.iter().any(|c| c.is_empty()) {
                return Err(Error::Parse {
                    line: i + 1,
                    message: "expected language, phone and shared label".into(),
                });
            }
            m.insert(cols[0], cols[1], cols[2]);
        }
        Ok(m)
    }

    pub fn load(path: impl AsRef<Path>) -> Result<Self> {
        let path = path.as_ref();
        let text = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
        Self::parse_tsv(&text)
    }
}

/// Element-wise lookup of language phones into the shared label space.
pub fn map_phones<S: AsRef<str>>(mapping: &PhoneMapping, language: &str, phones: &[S]) -> Result<Vec<String>> {
    phones
        .iter()
        .map(|p| {
            let p = p.as_ref();
            if p == SILENCE {
                return Ok(mapping.get(language, p).unwrap_or(SILENCE).to_owned());
            }
            mapping
                .get(language, p)
                .map(str::to_owned)
                .ok_or_else(|| Error::UnmappedPhone {
                    language: language.to_owned(),
                    phone: p.to_owned(),
                })
        })
        .collect()
}
