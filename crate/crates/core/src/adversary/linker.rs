use alloc::collections::BTreeMap;
use alloc::vec::Vec;

use super::ObservationLog;
use crate::netsim::EmissionKind;

#[derive(Clone, Debug, PartialEq)]
pub struct LinkReport {
    /// Pairs of log indices `(i, j)`, `i < j`, whose frames are byte-identical.
    pub pairs: Vec<(usize, usize)>,
    /// Pairs that really carried the same message. Only set with ground truth.
    pub true_links: Option<usize>,
    /// `true_links / pairs`; `None` when nothing was linked or truth is absent.
    pub precision: Option<f64>,
    /// Entries whose frame bytes were not retained.
    pub missing: usize,
}

/// Links observations whose frames are byte-for-byte equal.
pub fn equality_linker(log: &ObservationLog, truth: Option<&[EmissionKind]>) -> LinkReport {
    let mut buckets: BTreeMap<&[u8], Vec<usize>> = BTreeMap::new();
    let mut missing = 0;
    for (i, obs) in log.entries.iter().enumerate() {
        match &obs.frame {
            Some(f) => buckets.entry(f.as_bytes()).or_default().push(i),
            None => missing += 1,
        }
    }
    let mut pairs = Vec::new();
    for idx in buckets.values().filter(|b| b.len() > 1) {
        for (k, &i) in idx.iter().enumerate() {
            pairs.extend(idx[k + 1..].iter().map(|&j| (i, j)));
        }
    }
    pairs.sort_unstable();

    let true_links = truth.map(|kinds| {
        pairs
            .iter()
            .filter(|&&(i, j)| match (kinds[i], kinds[j]) {
                (EmissionKind::Real { id: a, .. }, EmissionKind::Real { id: b, .. }) => a == b,
                _ => false,
            })
            .count()
    });
    let precision = match true_links {
        Some(t) if !pairs.is_empty() => Some(t as f64 / pairs.len() as f64),
        _ => None,
    };
    LinkReport { pairs, true_links, precision, missing }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::adversary::{Observation, Scope};
    use crate::netsim::Vec2;
    use crate::wire::{message_id, Frame};
    use crate::LinkId;
    use alloc::vec;

    fn obs(link: u32, bytes: &[u8]) -> Observation {
        Observation {
            tick: 0,
            link: LinkId(link),
            position: Vec2::new(0.0, 0.0),
            frame: Some(Frame(bytes.to_vec())),
        }
    }

    #[test]
    fn duplicated_frame_is_linked() {
        let log = ObservationLog {
            scope: Scope::Global,
            entries: vec![obs(0, b"aaaa"), obs(1, b"bbbb"), obs(2, b"aaaa"), obs(3, b"cccc")],
        };
        let id = message_id(b"m");
        let real = EmissionKind::Real { id, group: crate::GroupId(0) };
        let truth = [real, EmissionKind::Cover, real, EmissionKind::Cover];
        let report = equality_linker(&log, Some(&truth));
        assert_eq!(report.pairs, [(0, 2)]);
        assert_eq!(report.true_links, Some(1));
        assert_eq!(report.precision, Some(1.0));
    }

    #[test]
    fn distinct_frames_give_nothing() {
        let log = ObservationLog {
            scope: Scope::Global,
            entries: vec![obs(0, b"a"), obs(1, b"b")],
        };
        let report = equality_linker(&log, None);
        assert!(report.pairs.is_empty());
        assert_eq!(report.precision, None);
    }
}
