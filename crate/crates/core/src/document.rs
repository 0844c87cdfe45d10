//! Annotation documents and their TextGrid and HTK-style label files.

use std::fmt::Write as _;
use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::events::{BreakIndex, RelativeIntensity};
use crate::pitch::ContourLabel;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Interval {
    pub start: f64,
    pub end: f64,
    pub text: String,
}

impl Interval {
    pub fn new(start: f64, end: f64, text: impl Into<String>) -> Self {
        Self {
            start,
            end,
            text: text.into(),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SyllableAnnotation {
    pub start: f64,
    pub end: f64,
    pub text: String,
    pub rii: RelativeIntensity,
    pub label: ContourLabel,
    /// No F0 was found in the syllable, so `label` is flat by default.
    pub unvoiced: bool,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct BreakPoint {
    pub time: f64,
    pub index: BreakIndex,
}

/// Phones tile `[0, duration]`; syllables and words cover speech only.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AnnotationDocument {
    pub audio: String,
    pub duration: f64,
    pub phones: Vec<Interval>,
    pub syllables: Vec<SyllableAnnotation>,
    pub words: Vec<Interval>,
    pub breaks: Vec<BreakPoint>,
}

pub const TIER_NAMES: [&str; 4] = ["phones", "syllables", "words", "breaks"];
const UNVOICED_SUFFIX: &str = "/uv";

impl AnnotationDocument {
    pub fn empty(audio: impl Into<String>, duration: f64) -> Self {
        Self {
            audio: audio.into(),
            duration,
            phones: Vec::new(),
            syllables: Vec::new(),
            words: Vec::new(),
            breaks: Vec::new(),
        }
    }

    /// Checks that phones tile the document, that every syllable edge is a
    /// phone edge and that every word edge is a syllable edge.
    pub fn check_nesting(&self) -> Result<()> {
        let mut cursor = 0.0;
        for p in &self.phones {
            if p.start != cursor || p.end <= p.start {
                return Err(Error::Mismatch(format!("phone '{}' at {} breaks the tiling", p.text, p.start)));
            }
            cursor = p.end;
        }
        if !self.phones.is_empty() && cursor != self.duration {
            return Err(Error::Mismatch(format!("phones end at {cursor}, document at {}", self.duration)));
        }
        let phone_edges: Vec<f64> = self.phones.iter().flat_map(|p| [p.start, p.end]).collect();
        let syl_edges: Vec<f64> = self.syllables.iter().flat_map(|s| [s.start, s.end]).collect();
        for s in &self.syllables {
            if !phone_edges.contains(&s.start) || !phone_edges.contains(&s.end) {
                return Err(Error::Mismatch(format!("syllable '{}' cuts a phone", s.text)));
            }
        }
        for w in &self.words {
            if !syl_edges.contains(&w.start) || !syl_edges.contains(&w.end) {
                return Err(Error::Mismatch(format!("word '{}' cuts a syllable", w.text)));
            }
        }
        Ok(())
    }

    /// Each word with the contour labels of the syllables inside it.
    pub fn word_contours(&self) -> Vec<(String, Vec<ContourLabel>)> {
        self.words
            .iter()
            .map(|w| {
                let labels = self
                    .syllables
                    .iter()
                    .filter(|s| s.start >= w.start && s.end <= w.end)
                    .map(|s| s.label)
                    .collect();
                (w.text.clone(), labels)
            })
            .collect()
    }
}

fn quote(s: &str) -> String {
    format!("\"{}\"", s.replace('"', "\"\""))
}

fn syllable_text(s: &SyllableAnnotation) -> String {
    let label = if s.unvoiced {
        format!("{}{UNVOICED_SUFFIX}", s.label)
    } else {
        s.label.to_string()
    };
    format!("{}|{}|{}", s.text, s.rii.value(), label)
}

/// Pads with empty intervals so the tier covers `[0, duration]`.
fn fill_gaps(items: &[(f64, f64, String)], duration: f64) -> Vec<(f64, f64, String)> {
    let mut out = Vec::with_capacity(items.len() * 2 + 1);
    let mut cursor = 0.0;
    for (s, e, t) in items {
        if *s > cursor {
            out.push((cursor, *s, String::new()));
        }
        out.push((*s, *e, t.clone()));
        cursor = *e;
    }
    if duration > cursor || out.is_empty() {
        out.push((cursor, duration.max(cursor), String::new()));
    }
    out
}

/// Long-format TextGrid with tiers phones, syllables, words and breaks.
/// Times carry six decimals; the audio path rides in a `!` comment.
pub fn to_textgrid(doc: &AnnotationDocument) -> String {
    let mut out = String::new();
    let d = doc.duration;
    out.push_str("File type = \"ooTextFile\"\nObject class = \"TextGrid\"\n");
    let _ = writeln!(out, "! audio = {}", quote(&doc.audio));
    let _ = write!(out, "\nxmin = 0.000000\nxmax = {d:.6}\ntiers? <exists>\nsize = 4\nitem []:\n");

    let phones: Vec<_> = doc.phones.iter().map(|p| (p.start, p.end, p.text.clone())).collect();
    let syllables: Vec<_> = doc.syllables.iter().map(|s| (s.start, s.end, syllable_text(s))).collect();
    let words: Vec<_> = doc.words.iter().map(|w| (w.start, w.end, w.text.clone())).collect();
    for (i, (name, items)) in [("phones", phones), ("syllables", syllables), ("words", words)]
        .into_iter()
        .enumerate()
    {
        let filled = fill_gaps(&items, d);
        let _ = write!(
            out,
            "    item [{}]:\n        class = \"IntervalTier\"\n        name = \"{name}\"\n        xmin = 0.000000\n        xmax = {d:.6}\n        intervals: size = {}\n",
            i + 1,
            filled.len()
        );
        for (j, (s, e, t)) in filled.iter().enumerate() {
            let _ = write!(
                out,
                "        intervals [{}]:\n            xmin = {s:.6}\n            xmax = {e:.6}\n            text = {}\n",
                j + 1,
                quote(t)
            );
        }
    }
    let _ = write!(
        out,
        "    item [4]:\n        class = \"TextTier\"\n        name = \"breaks\"\n        xmin = 0.000000\n        xmax = {d:.6}\n        points: size = {}\n",
        doc.breaks.len()
    );
    for (j, b) in doc.breaks.iter().enumerate() {
        let _ = write!(
            out,
            "        points [{}]:\n            number = {:.6}\n            mark = \"{}\"\n",
            j + 1,
            b.time,
            b.index.value()
        );
    }
    out
}

pub fn write_textgrid(doc: &AnnotationDocument, path: impl AsRef<Path>) -> Result<()> {
    let path = path.as_ref();
    std::fs::write(path, to_textgrid(doc)).map_err(|e| Error::io(path, e))
}

pub fn read_textgrid(path: impl AsRef<Path>) -> Result<AnnotationDocument> {
    let path = path.as_ref();
    parse_textgrid(&std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?)
}

/// Line cursor over the `key = value` lines of a TextGrid.
struct Lines<'a> {
    lines: Vec<(usize, &'a str)>,
    pos: usize,
}

impl<'a> Lines<'a> {
    fn new(text: &'a str) -> Self {
        let lines = text
            .lines()
            .enumerate()
            .map(|(i, l)| (i + 1, l.trim()))
            .filter(|(_, l)| {
                !l.is_empty()
                    && !l.starts_with('!')
                    && !l.starts_with("item [")
                    && !l.starts_with("intervals [")
                    && !l.starts_with("points [")
                    && *l != "tiers? <exists>"
            })
            .collect();
        Self { lines, pos: 0 }
    }

    fn last_line(&self) -> usize {
        self.lines.last().map_or(1, |l| l.0)
    }

    fn err(&self, line: usize, message: impl Into<String>) -> Error {
        Error::Parse {
            line,
            message: message.into(),
        }
    }

    fn peek(&self) -> Option<(usize, &'a str)> {
        self.lines.get(self.pos).copied()
    }

    /// Next line, which must read `key = value`; returns (line, value).
    fn field(&mut self, key: &str) -> Result<(usize, &'a str)> {
        let (n, line) = self
            .peek()
            .ok_or_else(|| self.err(self.last_line(), format!("unexpected end of file, expected '{key}'")))?;
        let (k, v) = line
            .split_once('=')
            .ok_or_else(|| self.err(n, format!("expected '{key} = ...'")))?;
        if k.trim() != key {
            return Err(self.err(n, format!("expected '{key}', found '{}'", k.trim())));
        }
        self.pos += 1;
        Ok((n, v.trim()))
    }

    fn number(&mut self, key: &str) -> Result<f64> {
        let (n, v) = self.field(key)?;
        v.parse().map_err(|_| self.err(n, format!("'{v}' is not a number")))
    }

    fn count(&mut self, key: &str) -> Result<usize> {
        let (n, v) = self.field(key)?;
        v.parse().map_err(|_| self.err(n, format!("'{v}' is not a count")))
    }

    fn string(&mut self, key: &str) -> Result<(usize, String)> {
        let (n, v) = self.field(key)?;
        if v.len() < 2 || !v.starts_with('"') || !v.ends_with('"') {
            return Err(self.err(n, format!("expected a quoted string for '{key}'")));
        }
        Ok((n, v[1..v.len() - 1].replace("\"\"", "\"")))
    }
}

enum Tier {
    Intervals(Vec<(usize, Interval)>),
    Points(Vec<(usize, f64, String)>),
}

/// Parses text produced by [`to_textgrid`]. Empty intervals are dropped.
pub fn parse_textgrid(text: &str) -> Result<AnnotationDocument> {
    let mut raw = text.lines();
    let header = |line: usize, got: Option<&str>, want: &str| {
        if got.map(|g| g.trim_end()) == Some(want) {
            Ok(())
        } else {
            Err(Error::Parse {
                line,
                message: format!("expected header '{want}'"),
            })
        }
    };
    header(1, raw.next(), "File type = \"ooTextFile\"")?;
    header(2, raw.next(), "Object class = \"TextGrid\"")?;
    let audio = text
        .lines()
        .map(str::trim)
        .find_map(|l| l.strip_prefix("! audio = "))
        .and_then(|v| v.strip_prefix('"')?.strip_suffix('"').map(|v| v.replace("\"\"", "\"")))
        .unwrap_or_default();

    let mut lines = Lines::new(text);
    lines.pos = 2;
    lines.number("xmin")?;
    let duration = lines.number("xmax")?;
    let size = lines.count("size")?;
    let mut tiers: Vec<(String, Tier)> = Vec::with_capacity(size);
    for _ in 0..size {
        let (n, class) = lines.string("class")?;
        let (_, name) = lines.string("name")?;
        lines.number("xmin")?;
        lines.number("xmax")?;
        let tier = match class.as_str() {
            "IntervalTier" => {
                let k = lines.count("intervals: size")?;
                let mut items = Vec::with_capacity(k);
                for _ in 0..k {
                    let start = lines.number("xmin")?;
                    let end = lines.number("xmax")?;
                    let (line, text) = lines.string("text")?;
                    if !text.is_empty() {
                        items.push((line, Interval::new(start, end, text)));
                    }
                }
                Tier::Intervals(items)
            }
            "TextTier" => {
                let k = lines.count("points: size")?;
                let mut items = Vec::with_capacity(k);
                for _ in 0..k {
                    let t = lines.number("number")?;
                    let (line, mark) = lines.string("mark")?;
                    items.push((line, t, mark));
                }
                Tier::Points(items)
            }
            other => return Err(lines.err(n, format!("unknown tier class '{other}'"))),
        };
        tiers.push((name, tier));
    }

    let mut take = |name: &str| -> Result<Tier> {
        let i = tiers
            .iter()
            .position(|(n, _)| n == name)
            .ok_or_else(|| Error::MissingTier(name.to_owned()))?;
        Ok(tiers.remove(i).1)
    };
    let intervals = |t: Tier, name: &str| match t {
        Tier::Intervals(v) => Ok(v),
        Tier::Points(_) => Err(Error::MissingTier(format!("{name} (found a point tier)"))),
    };
    let phones = intervals(take("phones")?, "phones")?;
    let syllables = intervals(take("syllables")?, "syllables")?;
    let words = intervals(take("words")?, "words")?;
    let Tier::Points(breaks) = take("breaks")? else {
        return Err(Error::MissingTier("breaks (found an interval tier)".into()));
    };

    let bad = |line: usize, message: String| Error::Parse { line, message };
    let syllables = syllables
        .into_iter()
        .map(|(line, iv)| {
            let mut parts = iv.text.rsplitn(3, '|');
            let (label, rii, text) = match (parts.next(), parts.next(), parts.next()) {
                (Some(l), Some(r), Some(t)) => (l, r, t),
                _ => return Err(bad(line, format!("syllable '{}' is not 'text|RII|label'", iv.text))),
            };
            let rii = rii
                .parse::<u8>()
                .ok()
                .and_then(RelativeIntensity::new)
                .ok_or_else(|| bad(line, format!("bad intensity index '{rii}'")))?;
            let (label, unvoiced) = match label.strip_suffix(UNVOICED_SUFFIX) {
                Some(l) => (l, true),
                None => (label, false),
            };
            let label = label
                .parse()
                .map_err(|_| bad(line, format!("unknown contour label '{label}'")))?;
            Ok(SyllableAnnotation {
                start: iv.start,
                end: iv.end,
                text: text.to_owned(),
                rii,
                label,
                unvoiced,
            })
        })
        .collect::<Result<Vec<_>>>()?;
    let breaks = breaks
        .into_iter()
        .map(|(line, time, mark)| {
            let index = mark
                .parse::<u8>()
                .ok()
                .and_then(BreakIndex::new)
                .ok_or_else(|| bad(line, format!("bad break index '{mark}'")))?;
            Ok(BreakPoint { time, index })
        })
        .collect::<Result<Vec<_>>>()?;

    Ok(AnnotationDocument {
        audio,
        duration,
        phones: phones.into_iter().map(|(_, iv)| iv).collect(),
        syllables,
        words: words.into_iter().map(|(_, iv)| iv).collect(),
        breaks,
    })
}

/// Seconds to integer 100 ns units.
pub fn to_htk_units(t: f64) -> i64 {
    (t * 1e7).round() as i64
}

/// One `start end label` line per interval, times in 100 ns units.
pub fn to_lab(intervals: &[Interval]) -> String {
    let mut out = String::new();
    for iv in intervals {
        let _ = writeln!(out, "{} {} {}", to_htk_units(iv.start), to_htk_units(iv.end), iv.text);
    }
    out
}

pub fn parse_lab(text: &str) -> Result<Vec<Interval>> {
    text.lines()
        .enumerate()
        .filter(|(_, l)| !l.trim().is_empty())
        .map(|(i, line)| {
            let bad = |m: &str| Error::Parse {
                line: i + 1,
                message: m.to_owned(),
            };
            let mut parts = line.trim().splitn(3, char::is_whitespace);
            let start: i64 = parts
                .next()
                .and_then(|s| s.parse().ok())
                .ok_or_else(|| bad("bad start time"))?;
            let end: i64 = parts
                .next()
                .and_then(|s| s.parse().ok())
                .ok_or_else(|| bad("bad end time"))?;
            let label = parts.next().map(str::trim).filter(|l| !l.is_empty()).ok_or_else(|| bad("missing label"))?;
            if end < start {
                return Err(bad("end precedes start"));
            }
            Ok(Interval::new(start as f64 / 1e7, end as f64 / 1e7, label))
        })
        .collect()
}

pub fn write_lab(intervals: &[Interval], path: impl AsRef<Path>) -> Result<()> {
    let path = path.as_ref();
    std::fs::write(path, to_lab(intervals)).map_err(|e| Error::io(path, e))
}

pub fn read_lab(path: impl AsRef<Path>) -> Result<Vec<Interval>> {
    let path = path.as_ref();
    parse_lab(&std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?)
}
