//! Trust groups and per-node keyrings.
//!
//! A trust group is a set of nodes that share one symmetric key and jointly
//! act as a distributed mix. A node in several groups holds several keys and
//! bridges messages between them. Keys are distributed out of band: the
//! scenario declares the groups and the simulator hands each member its key.

use alloc::collections::{BTreeMap, BTreeSet};
use alloc::vec::Vec;

use rand_core::RngCore;

use crate::wire::GroupKey;
use crate::{GroupId, NodeId};

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
pub enum KeyringError {
    #[error("group {group} lists node {node}, but the scenario has {node_count} nodes")]
    UnknownMember { group: GroupId, node: NodeId, node_count: u32 },
    #[error("node {0} belongs to no group and could never communicate")]
    NodeWithoutGroup(NodeId),
    #[error("group {0} has fewer than two members")]
    GroupTooSmall(GroupId),
    #[error("group id {0} declared twice")]
    DuplicateGroup(GroupId),
    #[error("groups {0} and {1} share the same key")]
    DuplicateKey(GroupId, GroupId),
}

#[derive(Clone, Debug)]
pub struct TrustGroup {
    pub id: GroupId,
    pub members: BTreeSet<NodeId>,
    pub key: GroupKey,
}

impl TrustGroup {
    pub fn new(id: GroupId, members: impl IntoIterator<Item = NodeId>, key: [u8; 32]) -> Self {
        Self {
            id,
            members: members.into_iter().collect(),
            key: GroupKey::new(id, key),
        }
    }

    /// Creates a group with a fresh key drawn from `rng`.
    pub fn generate<R: RngCore + ?Sized>(
        id: GroupId,
        members: impl IntoIterator<Item = NodeId>,
        rng: &mut R,
    ) -> Self {
        Self {
            id,
            members: members.into_iter().collect(),
            key: GroupKey::generate(id, rng),
        }
    }

    pub fn contains(&self, node: NodeId) -> bool {
        self.members.contains(&node)
    }
}

/// The keys one node holds, in trial-decryption (declaration) order.
#[derive(Clone, Debug)]
pub struct Keyring {
    owner: NodeId,
    keys: Vec<GroupKey>,
}

impl Keyring {
    pub fn owner(&self) -> NodeId {
        self.owner
    }

    pub fn keys(&self) -> &[GroupKey] {
        &self.keys
    }

    pub fn len(&self) -> usize {
        self.keys.len()
    }

    pub fn is_empty(&self) -> bool {
        self.keys.is_empty()
    }

    pub fn groups(&self) -> impl Iterator<Item = GroupId> + '_ {
        self.keys.iter().map(|k| k.group)
    }

    pub fn key_for(&self, group: GroupId) -> Option<&GroupKey> {
        self.keys.iter().find(|k| k.group == group)
    }
}

/// Hands every node exactly the keys of the groups it belongs to.
///
/// Groups are processed in declaration order, which becomes each keyring's
/// trial order.
pub fn build_keyrings(
    groups: &[TrustGroup],
    node_count: u32,
) -> Result<BTreeMap<NodeId, Keyring>, KeyringError> {
    let mut seen_ids = BTreeSet::new();
    for (i, group) in groups.iter().enumerate() {
        if !seen_ids.insert(group.id) {
            return Err(KeyringError::DuplicateGroup(group.id));
        }
        if group.members.len() < 2 {
            return Err(KeyringError::GroupTooSmall(group.id));
        }
        if let Some(&node) = group.members.iter().find(|n| n.0 >= node_count) {
            return Err(KeyringError::UnknownMember {
                group: group.id,
                node,
                node_count,
            });
        }
        if let Some(other) = groups[..i]
            .iter()
            .find(|o| o.key.key_bytes() == group.key.key_bytes())
        {
            return Err(KeyringError::DuplicateKey(other.id, group.id));
        }
    }

    let mut rings: BTreeMap<NodeId, Keyring> = (0..node_count)
        .map(|n| {
            let owner = NodeId(n);
            (owner, Keyring { owner, keys: Vec::new() })
        })
        .collect();
    for group in groups {
        for member in &group.members {
            rings
                .get_mut(member)
                .expect("members validated")
                .keys
                .push(group.key.clone());
        }
    }
    if let Some(ring) = rings.values().find(|r| r.keys.is_empty()) {
        return Err(KeyringError::NodeWithoutGroup(ring.owner));
    }
    Ok(rings)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::wire::FrameCodec;
    use crate::rng::{stream, Stream};

    fn group(id: u32, members: &[u32]) -> TrustGroup {
        TrustGroup::new(GroupId(id), members.iter().map(|&m| NodeId(m)), [id as u8 + 1; 32])
    }

    #[test]
    fn bridge_node_holds_both_keys() {
        let rings = build_keyrings(&[group(0, &[1, 2]), group(1, &[2, 3])], 4);
        // node 0 is in no group
        assert_eq!(rings.unwrap_err(), KeyringError::NodeWithoutGroup(NodeId(0)));

        let rings = build_keyrings(&[group(0, &[0, 1]), group(1, &[1, 2])], 3).unwrap();
        assert_eq!(rings[&NodeId(1)].len(), 2);
        assert_eq!(rings[&NodeId(0)].len(), 1);
        assert_eq!(rings[&NodeId(2)].len(), 1);
        let order: Vec<_> = rings[&NodeId(1)].groups().collect();
        assert_eq!(order, [GroupId(0), GroupId(1)]);
    }

    #[test]
    fn single_group_network() {
        let rings = build_keyrings(&[group(0, &[0, 1, 2, 3, 4])], 5).unwrap();
        for ring in rings.values() {
            assert_eq!(ring.len(), 1);
            assert_eq!(ring.keys()[0], rings[&NodeId(0)].keys()[0]);
        }
    }

    #[test]
    fn isolated_node_is_a_config_error() {
        let err = build_keyrings(&[group(0, &[0, 1, 2])], 5).unwrap_err();
        assert_eq!(err, KeyringError::NodeWithoutGroup(NodeId(3)));
    }

    #[test]
    fn rejects_bad_groups() {
        assert_eq!(
            build_keyrings(&[group(0, &[0])], 1).unwrap_err(),
            KeyringError::GroupTooSmall(GroupId(0))
        );
        assert!(matches!(
            build_keyrings(&[group(0, &[0, 9])], 2).unwrap_err(),
            KeyringError::UnknownMember { node: NodeId(9), .. }
        ));
        assert_eq!(
            build_keyrings(&[group(0, &[0, 1]), group(0, &[1, 2])], 3).unwrap_err(),
            KeyringError::DuplicateGroup(GroupId(0))
        );
        let mut dup = group(1, &[1, 2]);
        dup.key = GroupKey::new(GroupId(1), [1; 32]);
        assert_eq!(
            build_keyrings(&[group(0, &[0, 1]), dup], 3).unwrap_err(),
            KeyringError::DuplicateKey(GroupId(0), GroupId(1))
        );
    }

    /// Exhaustive check on 4 nodes and 3 groups: a node reads a frame iff it
    /// is a member of the group the frame was encrypted for.
    #[test]
    fn possession_is_membership() {
        let mut rng = stream(11, Stream::Keys);
        let groups = [
            TrustGroup::generate(GroupId(0), [NodeId(0), NodeId(1)], &mut rng),
            TrustGroup::generate(GroupId(1), [NodeId(1), NodeId(2), NodeId(3)], &mut rng),
            TrustGroup::generate(GroupId(2), [NodeId(0), NodeId(3)], &mut rng),
        ];
        let rings = build_keyrings(&groups, 4).unwrap();
        let codec = FrameCodec::new(128).unwrap();
        for g in &groups {
            let frame = codec.encode(b"probe", &g.key, &mut rng).unwrap();
            for (node, ring) in &rings {
                let readable = ring
                    .keys()
                    .iter()
                    .any(|k| codec.try_decrypt(frame.as_bytes(), k).unwrap().is_some());
                assert_eq!(readable, g.contains(*node), "group {} node {}", g.id, node);
            }
        }
    }
}
