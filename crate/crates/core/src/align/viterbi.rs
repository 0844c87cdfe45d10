//! Forced Viterbi alignment through concatenated phone models.
//!
//! Every `sil` in the phone sequence is optional. Leading and trailing
//! silences use the full three-state model; interior silences use a
//! one-state short pause tied to the middle silence state. Skipped
//! silences are reported as zero-length segments.

use std::collections::HashMap;

use rayon::prelude::*;

use super::model::ModelSet;
use super::segment::PhonemeSegment;
use crate::audio::FrameClock;
use crate::error::{Error, Result};
use crate::phones::SILENCE;
use crate::scalar::Scalar;

/// Reference to an emitting state of a model: `(label, state index)`.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct StateKey {
    pub label: String,
    pub state: usize,
}

/// One entry of the phone sequence expanded into model states.
#[derive(Debug, Clone, PartialEq)]
pub struct AlignUnit {
    pub label: String,
    pub states: Vec<usize>,
    pub skippable: bool,
}

/// Expands a phone sequence into alignment units.
pub fn expand_units<S: AsRef<str>>(phones: &[S]) -> Vec<AlignUnit> {
    let n = phones.len();
    phones
        .iter()
        .enumerate()
        .map(|(i, p)| {
            let label = p.as_ref().to_owned();
            if label == SILENCE {
                let edge = i == 0 || i + 1 == n;
                AlignUnit {
                    label,
                    states: if edge { vec![0, 1, 2] } else { vec![1] },
                    skippable: true,
                }
            } else {
                AlignUnit {
                    label,
                    states: vec![0, 1, 2],
                    skippable: false,
                }
            }
        })
        .collect()
}

/// Minimum number of frames a path through `units` needs.
pub fn min_frames(units: &[AlignUnit]) -> usize {
    units
        .iter()
        .filter(|u| !u.skippable)
        .map(|u| u.states.len())
        .sum()
}

#[derive(Debug, Clone, PartialEq)]
pub struct Alignment<T> {
    pub units: Vec<AlignUnit>,
    pub segments: Vec<PhonemeSegment>,
    /// `(unit index, model state index)` per frame.
    pub frame_states: Vec<(usize, usize)>,
    pub log_likelihood: T,
}

struct Network<T> {
    /// `(unit, model state)` per flat state.
    flat: Vec<(usize, usize)>,
    emission_col: Vec<usize>,
    log_self: Vec<T>,
    log_fwd: Vec<T>,
    first_of_unit: Vec<usize>,
    last_of_unit: Vec<usize>,
}

impl<T: Scalar> Network<T> {
    fn build(models: &ModelSet<T>, units: &[AlignUnit], keys: &mut Vec<StateKey>) -> Result<Self> {
        let mut index: HashMap<StateKey, usize> = HashMap::new();
        let mut net = Network {
            flat: Vec::new(),
            emission_col: Vec::new(),
            log_self: Vec::new(),
            log_fwd: Vec::new(),
            first_of_unit: Vec::new(),
            last_of_unit: Vec::new(),
        };
        for (u, unit) in units.iter().enumerate() {
            let model = models.model(&unit.label)?;
            net.first_of_unit.push(net.flat.len());
            for &s in &unit.states {
                let state = &model.states[s];
                let key = StateKey {
                    label: unit.label.clone(),
                    state: s,
                };
                let col = *index.entry(key.clone()).or_insert_with(|| {
                    keys.push(key);
                    keys.len() - 1
                });
                net.flat.push((u, s));
                net.emission_col.push(col);
                net.log_self.push(state.self_loop.ln());
                net.log_fwd.push(state.forward.ln());
            }
            net.last_of_unit.push(net.flat.len() - 1);
        }
        Ok(net)
    }
}

/// Best path through the left-to-right concatenation of the phone models.
///
/// The score is the sum of emission and transition log-probabilities along
/// the path; there is no entry or exit cost and skipping a silence is free.
pub fn force_align<T, F, S>(models: &ModelSet<T>, phones: &[S], features: &[F], clock: FrameClock) -> Result<Alignment<T>>
where
    T: Scalar,
    F: AsRef<[T]> + Sync,
    S: AsRef<str>,
{
    if phones.is_empty() {
        return Err(Error::NoPhones);
    }
    let units = expand_units(phones);
    let frames = features.len();
    let needed = min_frames(&units).max(1);
    if frames < needed {
        return Err(Error::NoPath {
            frames,
            min_frames: needed,
        });
    }
    let mut keys = Vec::new();
    let net = Network::build(models, &units, &mut keys)?;

    let emissions: Vec<Vec<T>> = features
        .par_iter()
        .map(|x| {
            keys.iter()
                .map(|k| {
                    // Keys were resolved when the network was built.
                    let model = &models.models[&k.label];
                    model.states[k.state].gmm.log_likelihood(x.as_ref())
                })
                .collect()
        })
        .collect();

    let n_units = units.len();
    // Units a path may start in or end in: up to and including the first
    // non-skippable unit from either side.
    let mut entry_units = Vec::new();
    for u in 0..n_units {
        entry_units.push(u);
        if !units[u].skippable {
            break;
        }
    }
    let mut exit_units = Vec::new();
    for u in (0..n_units).rev() {
        exit_units.push(u);
        if !units[u].skippable {
            break;
        }
    }
    // For each unit, the last states of earlier units that may hand over to it.
    let predecessors: Vec<Vec<usize>> = (0..n_units)
        .map(|u| {
            let mut preds = Vec::new();
            for p in (0..u).rev() {
                preds.push(net.last_of_unit[p]);
                if !units[p].skippable {
                    break;
                }
            }
            preds
        })
        .collect();

    let n_states = net.flat.len();
    let ninf = T::neg_infinity();
    let mut score = vec![ninf; n_states];
    for &u in &entry_units {
        let j = net.first_of_unit[u];
        score[j] = emissions[0][net.emission_col[j]];
    }
    let mut back = vec![u32::MAX; frames * n_states];
    let mut next = vec![ninf; n_states];
    for t in 1..frames {
        let row = &emissions[t];
        for j in 0..n_states {
            let mut best = score[j] + net.log_self[j];
            let mut arg = j;
            let (u, _) = net.flat[j];
            if j == net.first_of_unit[u] {
                for &p in &predecessors[u] {
                    let cand = score[p] + net.log_fwd[p];
                    if cand > best {
                        best = cand;
                        arg = p;
                    }
                }
            } else {
                let cand = score[j - 1] + net.log_fwd[j - 1];
                if cand > best {
                    best = cand;
                    arg = j - 1;
                }
            }
            if best > ninf {
                next[j] = best + row[net.emission_col[j]];
                back[t * n_states + j] = arg as u32;
            } else {
                next[j] = ninf;
            }
        }
        std::mem::swap(&mut score, &mut next);
    }

    let (mut state, best) = exit_units
        .iter()
        .map(|&u| net.last_of_unit[u])
        .fold((usize::MAX, ninf), |acc, j| if score[j] > acc.1 { (j, score[j]) } else { acc });
    if best == ninf || !best.is_finite() {
        return Err(Error::NoPath {
            frames,
            min_frames: needed,
        });
    }

    let mut path = vec![0usize; frames];
    for t in (0..frames).rev() {
        path[t] = state;
        if t > 0 {
            state = back[t * n_states + state] as usize;
        }
    }

    let frame_states: Vec<(usize, usize)> = path.iter().map(|&j| net.flat[j]).collect();
    let segments = segments_from_path(models, &units, &frame_states, clock)?;
    Ok(Alignment {
        units,
        segments,
        frame_states,
        log_likelihood: best,
    })
}

fn segments_from_path<T: Scalar>(
    models: &ModelSet<T>,
    units: &[AlignUnit],
    frame_states: &[(usize, usize)],
    clock: FrameClock,
) -> Result<Vec<PhonemeSegment>> {
    let mut spans = vec![(0usize, 0usize); units.len()];
    let mut seen = vec![false; units.len()];
    for (t, &(u, _)) in frame_states.iter().enumerate() {
        if !seen[u] {
            seen[u] = true;
            spans[u].0 = t;
        }
        spans[u].1 = t + 1;
    }
    let mut cursor = 0;
    let mut out = Vec::with_capacity(units.len());
    for (u, unit) in units.iter().enumerate() {
        let (start, end) = if seen[u] { spans[u] } else { (cursor, cursor) };
        cursor = end;
        let phone = models
            .inventory
            .get(&unit.label)
            .cloned()
            .unwrap_or_else(|| crate::phones::Phone::consonant(&unit.label, false));
        out.push(PhonemeSegment {
            phone,
            start: clock.time(start),
            end: clock.time(end),
        });
    }
    Ok(out)
}
