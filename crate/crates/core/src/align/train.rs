//! Seed training from hand labels and segmental k-means refinement.

use std::collections::BTreeMap;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::gmm::DiagGmm;
use super::model::{HmmState, ModelSet, MonophoneModel, MAX_MIXTURES, STATES_PER_PHONE};
use super::viterbi::{force_align, Alignment};
use crate::audio::FrameClock;
use crate::error::{Error, Result};
use crate::features::FeatureConfig;
use crate::phones::Inventory;
use crate::scalar::Scalar;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct TrainConfig {
    pub variance_floor: f64,
    /// Frames per state at which the mixture count steps to 2, 3, 4 and 5.
    pub mixture_thresholds: [usize; 4],
    pub split_em_iterations: usize,
    /// EM passes per state during each re-estimation.
    pub refine_em_iterations: usize,
    /// Transition probabilities are kept inside `[floor, 1 - floor]`.
    pub transition_floor: f64,
}

impl Default for TrainConfig {
    fn default() -> Self {
        Self {
            variance_floor: 1e-6,
            mixture_thresholds: [20, 100, 300, 600],
            split_em_iterations: 10,
            refine_em_iterations: 4,
            transition_floor: 1e-3,
        }
    }
}

impl TrainConfig {
    pub fn mixtures_for(&self, frames: usize) -> usize {
        1 + self
            .mixture_thresholds
            .iter()
            .filter(|&&t| frames >= t)
            .count()
            .min(MAX_MIXTURES - 1)
    }
}

/// Hand-labelled span in frame units, `[start, end)`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct LabeledSpan {
    pub label: String,
    pub start: usize,
    pub end: usize,
}

#[derive(Debug, Clone)]
pub struct SeedUtterance<F> {
    pub id: String,
    pub features: Vec<F>,
    pub spans: Vec<LabeledSpan>,
}

#[derive(Debug, Clone)]
pub struct CorpusUtterance<F> {
    pub id: String,
    pub features: Vec<F>,
    /// Model labels, including optional `sil` entries.
    pub phones: Vec<String>,
}

#[derive(Default)]
struct StateStats<'a, T> {
    frames: Vec<&'a [T]>,
    self_count: usize,
    forward_count: usize,
}

fn self_loop_estimate<T: Scalar>(self_count: usize, forward_count: usize, floor: f64) -> Option<T> {
    let total = self_count + forward_count;
    (total > 0).then(|| T::lit((self_count as f64 / total as f64).clamp(floor, 1.0 - floor)))
}

/// Trains one model per inventory phone from hand-labelled spans.
///
/// Each span is cut evenly into three parts, one per state. Mixtures grow by
/// splitting according to the frames available per state.
pub fn train_seed_models<T, F>(
    seed: &[SeedUtterance<F>],
    inventory: &Inventory,
    features: FeatureConfig,
    config: &TrainConfig,
) -> Result<ModelSet<T>>
where
    T: Scalar,
    F: AsRef<[T]>,
{
    let mut stats: BTreeMap<&str, Vec<StateStats<T>>> = inventory
        .labels()
        .map(|l| (l, (0..STATES_PER_PHONE).map(|_| StateStats::default()).collect()))
        .collect();

    for utt in seed {
        let n_frames = utt.features.len();
        let mut cursor = None;
        for span in &utt.spans {
            if span.end < span.start {
                return Err(Error::NonTiling(format!("{}: span '{}' ends before it starts", utt.id, span.label)));
            }
            if let Some(c) = cursor {
                if span.start != c {
                    return Err(Error::NonTiling(format!(
                        "{}: span '{}' starts at frame {} but previous ended at {c}",
                        utt.id, span.label, span.start
                    )));
                }
            }
            cursor = Some(span.end);
            let entry = stats
                .get_mut(span.label.as_str())
                .ok_or_else(|| Error::MissingModel(span.label.clone()))?;
            let start = span.start.min(n_frames);
            let end = span.end.min(n_frames);
            let n = end - start;
            for (s, st) in entry.iter_mut().enumerate() {
                let lo = start + s * n / STATES_PER_PHONE;
                let hi = start + (s + 1) * n / STATES_PER_PHONE;
                if hi > lo {
                    st.frames.extend(utt.features[lo..hi].iter().map(AsRef::as_ref));
                    st.self_count += hi - lo - 1;
                    st.forward_count += 1;
                }
            }
        }
    }

    let floor = T::lit(config.variance_floor);
    let mut set = ModelSet::new(features, inventory.clone(), floor);
    for (label, states) in &stats {
        if states.iter().all(|s| s.frames.is_empty()) {
            return Err(Error::NoExamples((*label).to_owned()));
        }
        let fitted: Vec<Option<HmmState<T>>> = states
            .iter()
            .map(|st| {
                if st.frames.is_empty() {
                    return None;
                }
                let k = config.mixtures_for(st.frames.len());
                let gmm = DiagGmm::train(&st.frames, k, config.split_em_iterations, floor);
                let p = self_loop_estimate(st.self_count, st.forward_count, config.transition_floor)
                    .unwrap_or_else(|| T::lit(0.5));
                Some(HmmState::new(gmm, p))
            })
            .collect();
        // Spans shorter than three frames can leave a state empty; borrow
        // from the nearest state that has data.
        let states: Vec<HmmState<T>> = (0..STATES_PER_PHONE)
            .map(|s| {
                let nearest = (0..STATES_PER_PHONE)
                    .filter(|&o| fitted[o].is_some())
                    .min_by_key(|&o| (o as isize - s as isize).abs())
                    .expect("at least one state has data");
                fitted[nearest].clone().expect("filtered")
            })
            .collect();
        set.models.insert(
            (*label).to_owned(),
            MonophoneModel {
                label: (*label).to_owned(),
                states,
            },
        );
    }
    set.validate()?;
    Ok(set)
}

/// Result of iterative refinement.
#[derive(Debug, Clone)]
pub struct Refinement<T> {
    pub models: ModelSet<T>,
    /// Final alignment of every corpus utterance.
    pub alignments: Vec<Alignment<T>>,
    /// Total corpus Viterbi log-likelihood of each alignment pass;
    /// `n_iterations + 1` entries, the last being the final pass.
    pub log_likelihoods: Vec<T>,
}

pub fn align_corpus<T, F>(models: &ModelSet<T>, corpus: &[CorpusUtterance<F>], clock: FrameClock) -> Result<Vec<Alignment<T>>>
where
    T: Scalar,
    F: AsRef<[T]> + Sync + Send,
{
    corpus
        .par_iter()
        .map(|u| {
            force_align(models, &u.phones, &u.features, clock).map_err(|e| Error::Utterance {
                id: u.id.clone(),
                source: Box::new(e),
            })
        })
        .collect()
}

/// Alternates corpus alignment and re-estimation `n_iterations` times,
/// then aligns once more with the final models.
pub fn iterative_refine<T, F>(
    models: &ModelSet<T>,
    corpus: &[CorpusUtterance<F>],
    n_iterations: usize,
    clock: FrameClock,
    config: &TrainConfig,
) -> Result<Refinement<T>>
where
    T: Scalar,
    F: AsRef<[T]> + Sync + Send,
{
    if corpus.is_empty() {
        return Err(Error::EmptyInput("training corpus".into()));
    }
    let mut models = models.clone();
    let mut log_likelihoods = Vec::with_capacity(n_iterations + 1);
    for _ in 0..n_iterations {
        let alignments = align_corpus(&models, corpus, clock)?;
        log_likelihoods.push(alignments.iter().map(|a| a.log_likelihood).sum());
        models = reestimate(&models, corpus, &alignments, config);
    }
    let alignments = align_corpus(&models, corpus, clock)?;
    log_likelihoods.push(alignments.iter().map(|a| a.log_likelihood).sum());
    Ok(Refinement {
        models,
        alignments,
        log_likelihoods,
    })
}

/// Viterbi re-estimation from the current parameters.
///
/// Emissions get a few EM passes over the frames each state was aligned
/// to; transitions are set from the aligned self/forward counts. Neither
/// step can lower the score of the path it was estimated from, so the next
/// alignment scores at least as well. Mixture counts are left unchanged.
pub fn reestimate<T, F>(models: &ModelSet<T>, corpus: &[CorpusUtterance<F>], alignments: &[Alignment<T>], config: &TrainConfig) -> ModelSet<T>
where
    T: Scalar,
    F: AsRef<[T]> + Sync,
{
    let mut stats: BTreeMap<(String, usize), StateStats<T>> = BTreeMap::new();
    for (utt, al) in corpus.iter().zip(alignments) {
        let key = |t: usize| {
            let (u, s) = al.frame_states[t];
            (al.units[u].label.clone(), s)
        };
        for t in 0..al.frame_states.len() {
            let st = stats.entry(key(t)).or_default();
            st.frames.push(utt.features[t].as_ref());
            if t + 1 < al.frame_states.len() {
                if al.frame_states[t + 1] == al.frame_states[t] {
                    st.self_count += 1;
                } else {
                    st.forward_count += 1;
                }
            }
        }
    }

    let floor = T::lit(config.variance_floor);
    let mut out = models.clone();
    let updates: Vec<((String, usize), HmmState<T>)> = stats
        .par_iter()
        .map(|((label, s), st)| {
            let mut state = models.models[label].states[*s].clone();
            for _ in 0..config.refine_em_iterations {
                state.gmm.em_step(&st.frames, floor);
            }
            if let Some(p) = self_loop_estimate(st.self_count, st.forward_count, config.transition_floor) {
                state.set_self_loop(p);
            }
            ((label.clone(), *s), state)
        })
        .collect();
    for ((label, s), state) in updates {
        if let Some(m) = out.models.get_mut(&label) {
            m.states[s] = state;
        }
    }
    out
}
