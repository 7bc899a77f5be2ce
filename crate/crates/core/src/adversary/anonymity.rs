use alloc::collections::{BTreeMap, BTreeSet, BinaryHeap};
use alloc::vec;
use alloc::vec::Vec;
use core::cmp::Reverse;

use super::{AdversaryView, Decrypted};
use crate::keyring::TrustGroup;
use crate::netsim::SubmissionRecord;
use crate::wire::{FrameCodec, MessageId};
use crate::{GroupId, NodeId, Tick};

/// Ground-truth group structure, used to reason about who could have
/// passed a message to whom.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Membership {
    pub node_count: u32,
    pub groups: Vec<(GroupId, BTreeSet<NodeId>)>,
}

impl Membership {
    pub fn new(node_count: u32, groups: &[TrustGroup]) -> Self {
        Self {
            node_count,
            groups: groups.iter().map(|g| (g.id, g.members.clone())).collect(),
        }
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct AnonymityEntry {
    pub message: MessageId,
    /// True originator, for scoring.
    pub origin: NodeId,
    pub candidates: BTreeSet<NodeId>,
    pub sender_anonymity: f64,
    pub recipient_candidates: usize,
    pub recipient_anonymity: f64,
    /// Logged emissions the adversary could decrypt as this message.
    pub observed_emissions: usize,
}

impl AnonymityEntry {
    pub fn contains_origin(&self) -> bool {
        self.candidates.contains(&self.origin)
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct AnonymityReport {
    pub entries: Vec<AnonymityEntry>,
    pub mean_sender_anonymity: Option<f64>,
    pub recipient_anonymity: f64,
    /// Messages whose candidate set is exactly the originator.
    pub identified: usize,
    /// Every candidate set contains its true originator.
    pub sound: bool,
}

fn anonymity(set_size: usize) -> f64 {
    1.0 - 1.0 / set_size as f64
}

/// Candidate originators of `message`.
///
/// A node `e` is a candidate unless its origination contradicts the log.
/// Assuming `e` held the message from the start, the earliest tick each node
/// could hold it follows from two kinds of transfer: an observed decryptable
/// emission by `x` under group `g` at tick `s` hands it to every member of
/// `g` by `s`; a group the adversary cannot fully watch (no key, or the log
/// is not global) may hand it from a holder to any fellow member one tick
/// later. `e` is consistent if every observed emitter could already hold the
/// message before its emission.
pub fn sender_anonymity(
    view: &AdversaryView,
    decrypted: &[Decrypted],
    membership: &Membership,
    message: MessageId,
    origin: NodeId,
) -> AnonymityEntry {
    let n = membership.node_count as usize;
    let compromised: BTreeSet<GroupId> = view.compromised().collect();
    let global = view.log.scope.is_global();

    let group_index: BTreeMap<GroupId, usize> =
        membership.groups.iter().enumerate().map(|(i, (g, _))| (*g, i)).collect();
    let members: Vec<Vec<usize>> = membership
        .groups
        .iter()
        .map(|(_, m)| m.iter().map(|n| n.index()).collect())
        .collect();
    let hidden: Vec<bool> = membership
        .groups
        .iter()
        .map(|(g, _)| !(global && compromised.contains(g)))
        .collect();
    let mut node_groups = vec![Vec::new(); n];
    for (gi, m) in members.iter().enumerate() {
        for &x in m {
            node_groups[x].push(gi);
        }
    }

    // (tick, emitter, group index) of every observed copy
    let mut events: Vec<(Tick, usize, usize)> = decrypted
        .iter()
        .filter(|d| d.id == message)
        .filter_map(|d| {
            let obs = &view.log.entries[d.entry];
            let emitter = obs.link.0 as usize;
            let gi = *group_index.get(&d.group)?;
            (emitter < n).then_some((obs.tick, emitter, gi))
        })
        .collect();
    events.sort_unstable();
    let mut by_node = vec![Vec::new(); n];
    for &(s, x, gi) in &events {
        by_node[x].push((s as i64, gi));
    }

    let consistent = |e: usize| -> bool {
        let mut earliest = vec![i64::MAX; n];
        earliest[e] = -1;
        let mut heap = BinaryHeap::new();
        heap.push(Reverse((-1i64, e)));
        while let Some(Reverse((t, x))) = heap.pop() {
            if t > earliest[x] {
                continue;
            }
            let mut relax = |y: usize, at: i64, heap: &mut BinaryHeap<Reverse<(i64, usize)>>| {
                if at < earliest[y] {
                    earliest[y] = at;
                    heap.push(Reverse((at, y)));
                }
            };
            for &gi in &node_groups[x] {
                if hidden[gi] {
                    for &y in &members[gi] {
                        relax(y, t + 1, &mut heap);
                    }
                }
            }
            for &(s, gi) in by_node[x].iter().filter(|(s, _)| *s > t) {
                for &y in &members[gi] {
                    relax(y, s, &mut heap);
                }
            }
        }
        events.iter().all(|&(s, x, _)| earliest[x] < s as i64)
    };

    let candidates: BTreeSet<NodeId> = (0..n).filter(|&e| consistent(e)).map(|e| NodeId(e as u32)).collect();
    AnonymityEntry {
        message,
        origin,
        sender_anonymity: anonymity(candidates.len().max(1)),
        candidates,
        recipient_candidates: n,
        recipient_anonymity: anonymity(n),
        observed_emissions: events.len(),
    }
}

/// Sender anonymity of every submitted message (first submission per id).
pub fn anonymity_report(
    view: &AdversaryView,
    codec: &FrameCodec,
    membership: &Membership,
    submissions: &[SubmissionRecord],
) -> AnonymityReport {
    let decrypted = view.decrypt_all(codec);
    let mut seen = BTreeSet::new();
    let entries: Vec<AnonymityEntry> = submissions
        .iter()
        .filter(|s| seen.insert(s.id))
        .map(|s| sender_anonymity(view, &decrypted, membership, s.id, s.node))
        .collect();
    let mean_sender_anonymity = (!entries.is_empty())
        .then(|| entries.iter().map(|e| e.sender_anonymity).sum::<f64>() / entries.len() as f64);
    AnonymityReport {
        identified: entries
            .iter()
            .filter(|e| e.candidates.len() == 1 && e.contains_origin())
            .count(),
        sound: entries.iter().all(AnonymityEntry::contains_origin),
        recipient_anonymity: anonymity(membership.node_count as usize),
        mean_sender_anonymity,
        entries,
    }
}
