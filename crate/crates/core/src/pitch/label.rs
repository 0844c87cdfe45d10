use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Deserializer, Serialize, Serializer};

use crate::error::Error;

/// Qualitative pitch trajectory of a syllable (every shape but flat).
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum Shape {
    L,
    H,
    Hll,
    Hhl,
    Llh,
    Lhh,
    Hlh,
    Lhl,
    Hat,
    Bucket,
}

impl Shape {
    pub const ALL: [Shape; 10] = [
        Shape::L,
        Shape::H,
        Shape::Hll,
        Shape::Hhl,
        Shape::Llh,
        Shape::Lhh,
        Shape::Hlh,
        Shape::Lhl,
        Shape::Hat,
        Shape::Bucket,
    ];

    pub fn as_str(self) -> &'static str {
        match self {
            Shape::L => "L",
            Shape::H => "H",
            Shape::Hll => "HLL",
            Shape::Hhl => "HHL",
            Shape::Llh => "LLH",
            Shape::Lhh => "LHH",
            Shape::Hlh => "HLH",
            Shape::Lhl => "LHL",
            Shape::Hat => "hat",
            Shape::Bucket => "bucket",
        }
    }
}

/// Size class of the pitch excursion.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum Range {
    Small,
    Medium,
    Big,
}

impl Range {
    pub const ALL: [Range; 3] = [Range::Small, Range::Medium, Range::Big];

    pub fn prefix(self) -> &'static str {
        match self {
            Range::Small => "S",
            Range::Medium => "M",
            Range::Big => "B",
        }
    }
}

/// One of 31 syllable pitch classes: flat, or a shape with a range prefix.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum ContourLabel {
    Flat,
    Shaped(Range, Shape),
}

impl ContourLabel {
    pub const COUNT: usize = 31;

    /// Every label, flat first.
    pub fn all() -> Vec<ContourLabel> {
        std::iter::once(ContourLabel::Flat)
            .chain(
                Range::ALL
                    .iter()
                    .flat_map(|&r| Shape::ALL.iter().map(move |&s| ContourLabel::Shaped(r, s))),
            )
            .collect()
    }

    /// Position in [`ContourLabel::all`].
    pub fn index(self) -> usize {
        match self {
            ContourLabel::Flat => 0,
            ContourLabel::Shaped(r, s) => {
                let ri = Range::ALL.iter().position(|&x| x == r).expect("listed");
                let si = Shape::ALL.iter().position(|&x| x == s).expect("listed");
                1 + ri * Shape::ALL.len() + si
            }
        }
    }
}

impl fmt::Display for ContourLabel {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            ContourLabel::Flat => f.write_str("flat"),
            ContourLabel::Shaped(r, s) => write!(f, "{}-{}", r.prefix(), s.as_str()),
        }
    }
}

impl FromStr for ContourLabel {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        if s == "flat" {
            return Ok(ContourLabel::Flat);
        }
        let unknown = || Error::UnknownLabel(s.to_owned());
        let (prefix, shape) = s.split_once('-').ok_or_else(unknown)?;
        let range = Range::ALL
            .into_iter()
            .find(|r| r.prefix() == prefix)
            .ok_or_else(unknown)?;
        let shape = Shape::ALL
            .into_iter()
            .find(|x| x.as_str() == shape)
            .ok_or_else(unknown)?;
        Ok(ContourLabel::Shaped(range, shape))
    }
}

impl Serialize for ContourLabel {
    fn serialize<S: Serializer>(&self, serializer: S) -> Result<S::Ok, S::Error> {
        serializer.collect_str(self)
    }
}

impl<'de> Deserialize<'de> for ContourLabel {
    fn deserialize<D: Deserializer<'de>>(deserializer: D) -> Result<Self, D::Error> {
        let s = String::deserialize(deserializer)?;
        s.parse().map_err(serde::de::Error::custom)
    }
}
