use alloc::collections::{BTreeMap, BTreeSet};
use alloc::vec::Vec;

use super::{AdversaryView, Decrypted, Membership};
use crate::{GroupId, NodeId};

#[derive(Clone, Debug, PartialEq)]
pub struct SocialGraphReport {
    /// Recovered trust edges, `(a, b)` with `a < b`.
    pub edges: BTreeSet<(NodeId, NodeId)>,
    /// Co-membership edges of the compromised groups.
    pub truth: BTreeSet<(NodeId, NodeId)>,
    /// `None` when nothing was recovered.
    pub precision: Option<f64>,
    /// Zero when there is nothing to recover.
    pub recall: f64,
}

fn pairs(nodes: &BTreeSet<NodeId>, into: &mut BTreeSet<(NodeId, NodeId)>) {
    let v: Vec<NodeId> = nodes.iter().copied().collect();
    for (i, &a) in v.iter().enumerate() {
        into.extend(v[i + 1..].iter().map(|&b| (a, b)));
    }
}

/// Nodes seen emitting frames under the same compromised key share that
/// key, so every pair of them is a trust edge.
pub fn social_graph_recovery(view: &AdversaryView, decrypted: &[Decrypted], membership: &Membership) -> SocialGraphReport {
    let mut emitters: BTreeMap<GroupId, BTreeSet<NodeId>> = BTreeMap::new();
    for d in decrypted {
        let link = view.log.entries[d.entry].link;
        if link.0 < membership.node_count {
            emitters.entry(d.group).or_default().insert(NodeId(link.0));
        }
    }
    let mut edges = BTreeSet::new();
    for nodes in emitters.values() {
        pairs(nodes, &mut edges);
    }

    let compromised: BTreeSet<GroupId> = view.compromised().collect();
    let mut truth = BTreeSet::new();
    for (g, members) in &membership.groups {
        if compromised.contains(g) {
            pairs(members, &mut truth);
        }
    }
    let hits = edges.intersection(&truth).count() as f64;
    SocialGraphReport {
        precision: (!edges.is_empty()).then(|| hits / edges.len() as f64),
        recall: if truth.is_empty() { 0.0 } else { hits / truth.len() as f64 },
        edges,
        truth,
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::adversary::{Observation, ObservationLog, Scope};
    use crate::netsim::Vec2;
    use crate::wire::{message_id, GroupKey};
    use crate::LinkId;
    use alloc::vec;

    #[test]
    fn external_recovers_nothing() {
        let view = AdversaryView::external(ObservationLog { scope: Scope::Global, entries: Vec::new() });
        let m = Membership { node_count: 2, groups: vec![(GroupId(0), [NodeId(0), NodeId(1)].into())] };
        let r = social_graph_recovery(&view, &[], &m);
        assert!(r.edges.is_empty());
        assert_eq!(r.recall, 0.0);
        assert_eq!(r.precision, None);
    }

    #[test]
    fn emitters_under_one_key_are_linked() {
        let obs = |link| Observation { tick: 0, link: LinkId(link), position: Vec2::new(0.0, 0.0), frame: None };
        let view = AdversaryView {
            keys: vec![GroupKey::new(GroupId(0), [0; 32])],
            log: ObservationLog { scope: Scope::Global, entries: vec![obs(0), obs(2), obs(1)] },
        };
        let m = Membership {
            node_count: 3,
            groups: vec![(GroupId(0), [NodeId(0), NodeId(1), NodeId(2)].into())],
        };
        let id = message_id(b"x");
        let dec: Vec<_> = (0..2).map(|entry| Decrypted { entry, group: GroupId(0), id }).collect();
        let r = social_graph_recovery(&view, &dec, &m);
        assert_eq!(r.edges, [(NodeId(0), NodeId(2))].into());
        assert_eq!(r.precision, Some(1.0));
        assert!((r.recall - 1.0 / 3.0).abs() < 1e-12);
    }
}
