use alloc::vec;
use alloc::vec::Vec;

use libm::{log2, sqrt};
use rand::seq::SliceRandom;

use super::ObservationLog;
use crate::netsim::EmissionKind;
use crate::rng::{stream, Stream};
use crate::stats::{chi2_sf, chi2_uniform_statistic};

/// Fewest frames for a powered test.
pub const MIN_FRAMES: usize = 10_000;
/// Fewest frames of each class, when both classes occur.
pub const MIN_PER_CLASS: usize = 100;

const FOLDS: usize = 5;
const FEATURES: usize = 6;

#[derive(Clone, Debug, PartialEq, thiserror::Error)]
pub enum DistinguishError {
    #[error("under-powered: {frames} frames ({cover} cover, {real} real); need {MIN_FRAMES} frames and {MIN_PER_CLASS} of each class")]
    Underpowered { frames: usize, cover: usize, real: usize },
    #[error("{0} log entries carry no frame bytes")]
    MissingFrames(usize),
    #[error("frames of different sizes in one log")]
    MixedFrameSizes,
    #[error("{labels} labels for {entries} log entries")]
    LabelCount { entries: usize, labels: usize },
}

#[derive(Copy, Clone, Debug, PartialEq)]
pub enum ClassifierResult {
    /// Mean per-class recall over held-out folds; 0.5 is chance.
    BalancedAccuracy(f64),
    /// Only one class occurs, so there is nothing to tell apart.
    SingleClass,
}

impl ClassifierResult {
    pub fn accuracy(&self) -> Option<f64> {
        match self {
            ClassifierResult::BalancedAccuracy(a) => Some(*a),
            ClassifierResult::SingleClass => None,
        }
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct Distinguishability {
    pub frames: usize,
    pub cover: usize,
    pub real: usize,
    /// Per-position uniformity: Pearson statistics summed over byte positions.
    pub chi2_statistic: f64,
    pub chi2_dof: f64,
    pub chi2_p_value: f64,
    /// All bytes pooled into one histogram, 255 degrees of freedom.
    pub pooled_statistic: f64,
    pub pooled_p_value: f64,
    pub classifier: ClassifierResult,
}

/// Byte-statistics features of one frame: mean, printable fraction, zero
/// fraction, distinct values, largest bin share, entropy.
pub fn frame_features(bytes: &[u8]) -> [f64; FEATURES] {
    let mut hist = [0u32; 256];
    for &b in bytes {
        hist[b as usize] += 1;
    }
    let n = bytes.len().max(1) as f64;
    let mean = bytes.iter().map(|&b| b as f64).sum::<f64>() / n;
    let printable = bytes.iter().filter(|b| (0x20..0x7f).contains(*b)).count() as f64 / n;
    let zeros = hist[0] as f64 / n;
    let distinct = hist.iter().filter(|&&c| c > 0).count() as f64 / 256.0;
    let top = *hist.iter().max().unwrap_or(&0) as f64 / n;
    let entropy = -hist
        .iter()
        .filter(|&&c| c > 0)
        .map(|&c| {
            let p = c as f64 / n;
            p * log2(p)
        })
        .sum::<f64>();
    [mean, printable, zeros, distinct, top, entropy]
}

/// Tests whether logged frames look uniformly random, and whether a simple
/// byte-statistics classifier can tell cover from real frames. `truth` labels
/// each entry and is used only for the classifier's training and scoring;
/// garbage frames count as cover.
pub fn distinguishability_test(
    log: &ObservationLog,
    truth: &[EmissionKind],
    seed: u64,
) -> Result<Distinguishability, DistinguishError> {
    if truth.len() != log.len() {
        return Err(DistinguishError::LabelCount { entries: log.len(), labels: truth.len() });
    }
    let missing = log.entries.iter().filter(|o| o.frame.is_none()).count();
    if missing > 0 {
        return Err(DistinguishError::MissingFrames(missing));
    }
    let frames: Vec<&[u8]> = log.entries.iter().filter_map(|o| o.frame.as_ref()).map(|f| f.as_bytes()).collect();
    let is_real: Vec<bool> = truth.iter().map(EmissionKind::is_real).collect();
    let real = is_real.iter().filter(|r| **r).count();
    let cover = frames.len() - real;
    let underpowered = frames.len() < MIN_FRAMES || (real > 0 && cover > 0 && real.min(cover) < MIN_PER_CLASS);
    if underpowered {
        return Err(DistinguishError::Underpowered { frames: frames.len(), cover, real });
    }
    let size = frames[0].len();
    if frames.iter().any(|f| f.len() != size) {
        return Err(DistinguishError::MixedFrameSizes);
    }

    let mut positional = vec![[0u64; 256]; size];
    let mut pooled = [0u64; 256];
    for f in &frames {
        for (counts, &b) in positional.iter_mut().zip(f.iter()) {
            counts[b as usize] += 1;
            pooled[b as usize] += 1;
        }
    }
    let chi2_statistic: f64 = positional.iter().map(|c| chi2_uniform_statistic(c)).sum();
    let chi2_dof = 255.0 * size as f64;
    let pooled_statistic = chi2_uniform_statistic(&pooled);

    let classifier = if real == 0 || cover == 0 {
        ClassifierResult::SingleClass
    } else {
        let features: Vec<[f64; FEATURES]> = frames.iter().map(|f| frame_features(f)).collect();
        ClassifierResult::BalancedAccuracy(cross_validate(&features, &is_real, seed))
    };

    Ok(Distinguishability {
        frames: frames.len(),
        cover,
        real,
        chi2_statistic,
        chi2_dof,
        chi2_p_value: chi2_sf(chi2_statistic, chi2_dof),
        pooled_statistic,
        pooled_p_value: chi2_sf(pooled_statistic, 255.0),
        classifier,
    })
}

/// k-fold nearest-centroid classification on standardized features.
fn cross_validate(features: &[[f64; FEATURES]], labels: &[bool], seed: u64) -> f64 {
    let mut order: Vec<usize> = (0..features.len()).collect();
    order.shuffle(&mut stream(seed, Stream::Classifier));
    let mut fold = vec![0usize; features.len()];
    for (pos, &i) in order.iter().enumerate() {
        fold[i] = pos % FOLDS;
    }

    // [label][correct?]
    let mut tally = [[0u64; 2]; 2];
    for k in 0..FOLDS {
        let train = || (0..features.len()).filter(|&i| fold[i] != k);
        let count = train().count() as f64;
        let mut mean = [0.0; FEATURES];
        let mut var = [0.0; FEATURES];
        for i in train() {
            for (m, x) in mean.iter_mut().zip(features[i]) {
                *m += x / count;
            }
        }
        for i in train() {
            for d in 0..FEATURES {
                let diff = features[i][d] - mean[d];
                var[d] += diff * diff / count;
            }
        }
        let scale: [f64; FEATURES] = core::array::from_fn(|d| if var[d] > 0.0 { 1.0 / sqrt(var[d]) } else { 0.0 });
        let standardize = |x: &[f64; FEATURES]| -> [f64; FEATURES] { core::array::from_fn(|d| (x[d] - mean[d]) * scale[d]) };

        let mut centroid = [[0.0; FEATURES]; 2];
        let mut members = [0usize; 2];
        for i in train() {
            let z = standardize(&features[i]);
            let c = labels[i] as usize;
            members[c] += 1;
            for d in 0..FEATURES {
                centroid[c][d] += z[d];
            }
        }
        for (c, count) in centroid.iter_mut().zip(members) {
            c.iter_mut().for_each(|x| *x /= count.max(1) as f64);
        }
        for i in (0..features.len()).filter(|&i| fold[i] == k) {
            let z = standardize(&features[i]);
            let dist = |c: &[f64; FEATURES]| z.iter().zip(c).map(|(a, b)| (a - b) * (a - b)).sum::<f64>();
            let predicted = dist(&centroid[1]) < dist(&centroid[0]);
            let truth = labels[i];
            tally[truth as usize][(predicted == truth) as usize] += 1;
        }
    }
    let recall = |c: usize| {
        let total = tally[c][0] + tally[c][1];
        if total == 0 {
            0.5
        } else {
            tally[c][1] as f64 / total as f64
        }
    };
    (recall(0) + recall(1)) / 2.0
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::adversary::{Observation, Scope};
    use crate::netsim::Vec2;
    use crate::wire::{message_id, Frame};
    use crate::{GroupId, LinkId};

    fn log_of(frames: Vec<Vec<u8>>) -> ObservationLog {
        ObservationLog {
            scope: Scope::Global,
            entries: frames
                .into_iter()
                .map(|f| Observation {
                    tick: 0,
                    link: LinkId(0),
                    position: Vec2::new(0.0, 0.0),
                    frame: Some(Frame(f)),
                })
                .collect(),
        }
    }

    #[test]
    fn small_log_is_underpowered() {
        let log = log_of(vec![vec![0u8; 64]; 50]);
        let truth = vec![EmissionKind::Cover; 50];
        assert!(matches!(
            distinguishability_test(&log, &truth, 0),
            Err(DistinguishError::Underpowered { frames: 50, .. })
        ));
    }

    #[test]
    fn features_of_constant_frame() {
        let f = frame_features(&[b'a'; 64]);
        assert_eq!(f[0], 97.0);
        assert_eq!(f[1], 1.0);
        assert_eq!(f[4], 1.0);
        assert_eq!(f[5], 0.0);
    }

    #[test]
    fn label_mismatch_rejected() {
        let log = log_of(vec![vec![0u8; 64]; 2]);
        let real = EmissionKind::Real { id: message_id(b"x"), group: GroupId(0) };
        assert_eq!(
            distinguishability_test(&log, &[real], 0),
            Err(DistinguishError::LabelCount { entries: 2, labels: 1 })
        );
    }
}
