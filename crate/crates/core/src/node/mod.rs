//! The per-node protocol state machine.
//!
//! A node owns a keyring, an outgoing pool of plaintext entries (one per
//! message and group), a seen-log keyed by [`MessageId`] and optional
//! link-source counters. It is driven by three events:
//!
//! - [`Node::submit`]: the application hands down a message;
//! - [`Node::on_frame_received`]: the radio hands up a frame;
//! - [`Node::on_transmit_slot`]: the node's slot comes up and it must emit
//!   exactly one frame, real or cover.
//!
//! Pool entries hold plaintext and are encrypted with a fresh nonce at every
//! emission, so no two transmissions of the same message share a byte
//! pattern.

mod policy;
mod pool;
mod source_cache;

use alloc::collections::{BTreeMap, BTreeSet};
use alloc::sync::Arc;
use alloc::vec::Vec;

use rand_core::RngCore;

pub use policy::{is_stale, KeyOrder, NodePolicies, PolicyError, Scheduler, SeenRecord, SourceCachePolicy};
pub use pool::PoolEntry;
pub use source_cache::{SourceCache, SourceEntry};

use crate::keyring::Keyring;
use crate::wire::{message_id, Frame, FrameCodec, MessageId, WireError};
use crate::{GroupId, LinkId, NodeId, Tick};
use pool::Pool;

/// What happened to a received frame.
#[derive(Copy, Clone, Debug, PartialEq, Eq)]
pub enum Reception {
    /// No key produced a valid fingerprint, or the source was blacklisted.
    Unreadable,
    /// Readable, already known and now (or already) stale.
    Stale,
    /// Readable, already known, still fresh.
    Duplicate,
    /// Readable and new: handed to the application and enqueued for every
    /// owned group.
    Delivered,
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Received {
    pub reception: Reception,
    pub decrypt_attempts: u32,
    pub message: Option<MessageId>,
    pub group: Option<GroupId>,
    /// Payload handed to the application layer, present only for
    /// [`Reception::Delivered`].
    pub delivered: Option<Vec<u8>>,
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Submitted {
    pub id: MessageId,
    /// Pool entries added by this call.
    pub enqueued: usize,
}

/// Ground-truth content of an emitted frame.
#[derive(Copy, Clone, Debug, PartialEq, Eq)]
pub enum Emission {
    Cover,
    Real { id: MessageId, group: GroupId },
}

#[derive(Clone, Debug)]
pub struct Transmission {
    pub frame: Frame,
    pub emission: Emission,
}

/// Energy and behaviour counters.
#[derive(Clone, Debug, Default, PartialEq, Eq)]
pub struct NodeStats {
    pub frames_received: u64,
    pub decrypt_attempts: u64,
    pub unreadable: u64,
    /// Frames not even tried because their source was blacklisted.
    pub skipped: u64,
    pub duplicates: u64,
    pub stale_receptions: u64,
    pub deliveries: u64,
    pub emissions: u64,
    pub cover_emissions: u64,
    /// Messages dropped from the pool at a slot because they went stale.
    pub stale_drops: u64,
    pub evictions: u64,
}

#[derive(Clone, Debug)]
pub struct Node {
    id: NodeId,
    keyring: Keyring,
    trial_order: Vec<usize>,
    policies: NodePolicies,
    codec: FrameCodec,
    phase: Tick,
    seen: BTreeMap<MessageId, SeenRecord>,
    /// Ids of delivered messages whose seen record was forgotten.
    tombstones: BTreeSet<MessageId>,
    pool: Pool,
    sources: SourceCache,
    stats: NodeStats,
    first_deviation: Option<Tick>,
}

impl Node {
    /// `phase` is the node's slot offset within `[0, tx_period)`.
    pub fn new(
        keyring: Keyring,
        policies: NodePolicies,
        codec: FrameCodec,
        phase: Tick,
    ) -> Result<Self, PolicyError> {
        policies.validate()?;
        if phase >= policies.tx_period {
            return Err(PolicyError {
                field: "phase",
                reason: "must be below tx_period",
            });
        }
        Ok(Self {
            id: keyring.owner(),
            trial_order: (0..keyring.len()).collect(),
            keyring,
            sources: SourceCache::new(policies.source_cache),
            policies,
            codec,
            phase,
            seen: BTreeMap::new(),
            tombstones: BTreeSet::new(),
            pool: Pool::default(),
            stats: NodeStats::default(),
            first_deviation: None,
        })
    }

    pub fn id(&self) -> NodeId {
        self.id
    }

    pub fn keyring(&self) -> &Keyring {
        &self.keyring
    }

    pub fn policies(&self) -> &NodePolicies {
        &self.policies
    }

    pub fn phase(&self) -> Tick {
        self.phase
    }

    pub fn stats(&self) -> &NodeStats {
        &self.stats
    }

    pub fn seen(&self, id: &MessageId) -> Option<&SeenRecord> {
        self.seen.get(id)
    }

    pub fn seen_len(&self) -> usize {
        self.seen.len()
    }

    pub fn pool(&self) -> &[PoolEntry] {
        self.pool.entries()
    }

    pub fn source_cache(&self) -> &SourceCache {
        &self.sources
    }

    /// Earliest tick at which a stale drop or pool eviction changed what this
    /// node would otherwise have sent.
    pub fn first_deviation(&self) -> Option<Tick> {
        self.first_deviation
    }

    pub fn is_slot(&self, now: Tick) -> bool {
        now % self.policies.tx_period == self.phase
    }

    fn note_deviation(&mut self, now: Tick) {
        self.first_deviation.get_or_insert(now);
    }

    /// Adds one pool entry per owned group for `id`, skipping pairs already
    /// queued, then enforces the pool capacity.
    fn enqueue_everywhere(&mut self, id: MessageId, payload: Arc<[u8]>, now: Tick) -> usize {
        let mut added = 0;
        for group in self.keyring.groups() {
            if !self.pool.contains(&id, group) {
                self.pool.push(id, payload.clone(), group);
                added += 1;
            }
        }
        while self.pool.len() > self.policies.pool_capacity {
            self.pool.evict_most_popular(&self.seen);
            self.stats.evictions += 1;
            self.note_deviation(now);
        }
        added
    }

    /// Originates a message. The originator never delivers to itself.
    pub fn submit(&mut self, payload: &[u8], now: Tick) -> Result<Submitted, WireError> {
        self.codec.check_payload(payload)?;
        let id = message_id(payload);
        if self.seen.contains_key(&id) || self.tombstones.contains(&id) {
            return Ok(Submitted { id, enqueued: 0 });
        }
        let mut record = SeenRecord::new(id, now);
        record.delivered_up = true;
        self.seen.insert(id, record);
        let enqueued = self.enqueue_everywhere(id, Arc::from(payload), now);
        Ok(Submitted { id, enqueued })
    }

    /// Trial-decrypts a received frame and updates the seen-log and pool.
    pub fn on_frame_received(
        &mut self,
        frame: &[u8],
        source: LinkId,
        now: Tick,
    ) -> Result<Received, WireError> {
        if frame.len() != self.codec.frame_size() {
            return Err(WireError::FrameLength {
                expected: self.codec.frame_size(),
                actual: frame.len(),
            });
        }
        self.stats.frames_received += 1;
        let unreadable = |attempts| Received {
            reception: Reception::Unreadable,
            decrypt_attempts: attempts,
            message: None,
            group: None,
            delivered: None,
        };

        if !self.sources.should_try(source, now) {
            self.stats.skipped += 1;
            self.stats.unreadable += 1;
            return Ok(unreadable(0));
        }

        let mut attempts = 0u32;
        let mut hit = None;
        for (pos, &key_index) in self.trial_order.iter().enumerate() {
            attempts += 1;
            let key = &self.keyring.keys()[key_index];
            if let Some(plain) = self.codec.try_decrypt(frame, key)? {
                hit = Some((pos, key.group, plain));
                break;
            }
        }
        self.stats.decrypt_attempts += u64::from(attempts);

        let Some((pos, group, plain)) = hit else {
            self.sources.update(source, now, false);
            self.stats.unreadable += 1;
            return Ok(unreadable(attempts));
        };
        self.sources.update(source, now, true);
        if self.policies.key_order == KeyOrder::MostRecentFirst && pos > 0 {
            let key_index = self.trial_order.remove(pos);
            self.trial_order.insert(0, key_index);
        }

        let id = plain.id();
        let mut received = Received {
            reception: Reception::Stale,
            decrypt_attempts: attempts,
            message: Some(id),
            group: Some(group),
            delivered: None,
        };

        if self.tombstones.contains(&id) {
            self.stats.stale_receptions += 1;
            return Ok(received);
        }
        if let Some(record) = self.seen.get_mut(&id) {
            record.overheard_count = record.overheard_count.saturating_add(1);
            if is_stale(record, now, &self.policies) {
                self.stats.stale_receptions += 1;
            } else {
                received.reception = Reception::Duplicate;
                self.stats.duplicates += 1;
            }
            return Ok(received);
        }

        let mut record = SeenRecord::new(id, now);
        record.overheard_count = 1;
        record.delivered_up = true;
        self.seen.insert(id, record);
        self.enqueue_everywhere(id, Arc::from(plain.payload.as_slice()), now);
        self.stats.deliveries += 1;
        received.reception = Reception::Delivered;
        received.delivered = Some(plain.payload);
        Ok(received)
    }

    /// Emits the node's frame for this slot: the next fresh pool entry,
    /// re-encrypted with a new nonce, or cover if nothing fresh is queued.
    pub fn on_transmit_slot<R: RngCore + ?Sized>(&mut self, now: Tick, rng: &mut R) -> Transmission {
        self.stats.emissions += 1;
        while let Some(index) = self.pool.select(self.policies.scheduler, &self.seen) {
            let id = self.pool.get(index).id;
            let fresh = self
                .seen
                .get(&id)
                .is_some_and(|r| !is_stale(r, now, &self.policies));
            if !fresh {
                self.pool.remove_message(&id);
                self.stats.stale_drops += 1;
                self.note_deviation(now);
                continue;
            }

            let entry = self.pool.get(index);
            let group = entry.group;
            let key = self
                .keyring
                .key_for(group)
                .expect("pool entries only exist for owned groups");
            let frame = self
                .codec
                .encode(&entry.payload, key, rng)
                .expect("pool payloads were size-checked on entry");
            self.pool.mark_emitted(index);
            if let Some(record) = self.seen.get_mut(&id) {
                record.retransmit_count = record.retransmit_count.saturating_add(1);
            }
            return Transmission {
                frame,
                emission: Emission::Real { id, group },
            };
        }
        self.stats.cover_emissions += 1;
        Transmission {
            frame: self.codec.cover(rng),
            emission: Emission::Cover,
        }
    }

    /// Drops seen records first seen more than `seen_forget` ticks ago, and
    /// idle source-cache entries.
    pub fn forget_old_seen(&mut self, now: Tick) {
        let horizon = self.policies.seen_forget;
        let tombstones = &mut self.tombstones;
        self.seen.retain(|id, record| {
            let keep = now.saturating_sub(record.first_seen) <= horizon;
            if !keep {
                tombstones.insert(*id);
            }
            keep
        });
        self.sources.purge(now);
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use alloc::vec;
    use crate::keyring::{build_keyrings, TrustGroup};
    use crate::rng::{stream, Stream};

    fn setup(groups: &[&[u32]], nodes: u32, policies: NodePolicies) -> (Vec<Node>, Vec<TrustGroup>) {
        let mut rng = stream(99, Stream::Keys);
        let groups: Vec<_> = groups
            .iter()
            .enumerate()
            .map(|(i, m)| TrustGroup::generate(GroupId(i as u32), m.iter().map(|&n| NodeId(n)), &mut rng))
            .collect();
        let rings = build_keyrings(&groups, nodes).unwrap();
        let codec = FrameCodec::new(256).unwrap();
        let nodes = rings
            .into_values()
            .map(|ring| Node::new(ring, policies.clone(), codec, 0).unwrap())
            .collect();
        (nodes, groups)
    }

    #[test]
    fn submit_fans_out_per_group() {
        let (mut nodes, _) = setup(&[&[0, 1], &[0, 2]], 3, NodePolicies::default());
        let s = nodes[0].submit(b"m", 0).unwrap();
        assert_eq!(s.enqueued, 2);
        assert_eq!(nodes[0].pool().len(), 2);
        assert_eq!(nodes[0].seen_len(), 1);
        assert!(nodes[0].seen(&s.id).unwrap().delivered_up);

        let again = nodes[0].submit(b"m", 3).unwrap();
        assert_eq!(again.enqueued, 0);
        assert_eq!(nodes[0].pool().len(), 2);

        assert_eq!(nodes[1].submit(b"x", 0).unwrap().enqueued, 1);
    }

    #[test]
    fn oversize_submission_rejected() {
        let (mut nodes, _) = setup(&[&[0, 1]], 2, NodePolicies::default());
        let big = vec![0u8; 256 - 26 + 1];
        assert!(matches!(nodes[0].submit(&big, 0), Err(WireError::PayloadTooLarge { .. })));
        assert_eq!(nodes[0].pool().len(), 0);
    }

    #[test]
    fn empty_pool_emits_cover() {
        let (mut nodes, groups) = setup(&[&[0, 1]], 2, NodePolicies::default());
        let mut rng = stream(1, Stream::Node(0));
        let tx = nodes[0].on_transmit_slot(0, &mut rng);
        assert_eq!(tx.emission, Emission::Cover);
        assert_eq!(tx.frame.len(), 256);
        let codec = FrameCodec::new(256).unwrap();
        assert!(codec.try_decrypt(tx.frame.as_bytes(), &groups[0].key).unwrap().is_none());
    }

    #[test]
    fn receive_delivers_once_and_bridges() {
        let (mut nodes, _) = setup(&[&[0, 1], &[1, 2]], 3, NodePolicies::default());
        let mut rng = stream(2, Stream::Node(0));
        let id = nodes[0].submit(b"hello", 0).unwrap().id;
        let tx = nodes[0].on_transmit_slot(0, &mut rng);
        assert_eq!(tx.emission, Emission::Real { id, group: GroupId(0) });

        let got = nodes[1].on_frame_received(tx.frame.as_bytes(), LinkId(0), 1).unwrap();
        assert_eq!(got.reception, Reception::Delivered);
        assert_eq!(got.delivered.as_deref(), Some(&b"hello"[..]));
        assert_eq!(got.decrypt_attempts, 1);
        let groups: Vec<_> = nodes[1].pool().iter().map(|e| e.group).collect();
        assert_eq!(groups, [GroupId(0), GroupId(1)]);

        // node 2 cannot read a group-0 frame
        let miss = nodes[2].on_frame_received(tx.frame.as_bytes(), LinkId(0), 1).unwrap();
        assert_eq!(miss.reception, Reception::Unreadable);
        assert_eq!(miss.decrypt_attempts, 1);
        assert_eq!(nodes[2].seen_len(), 0);

        let again = nodes[1].on_frame_received(tx.frame.as_bytes(), LinkId(0), 2).unwrap();
        assert_eq!(again.reception, Reception::Duplicate);
        assert!(again.delivered.is_none());
        assert_eq!(nodes[1].stats().deliveries, 1);
    }

    #[test]
    fn cover_costs_every_key() {
        let (mut nodes, _) = setup(&[&[0, 1], &[0, 2], &[0, 1, 2]], 3, NodePolicies::default());
        let mut rng = stream(3, Stream::Node(1));
        let cover = nodes[1].on_transmit_slot(0, &mut rng);
        let got = nodes[0].on_frame_received(cover.frame.as_bytes(), LinkId(1), 0).unwrap();
        assert_eq!(got.reception, Reception::Unreadable);
        assert_eq!(got.decrypt_attempts, 3);
    }

    #[test]
    fn wrong_size_frame_is_an_error() {
        let (mut nodes, _) = setup(&[&[0, 1]], 2, NodePolicies::default());
        assert!(nodes[0].on_frame_received(&[0u8; 100], LinkId(1), 0).is_err());
    }

    /// Scripted replay: node 1 hears the same message from node 0 many times.
    /// It delivers once, goes stale at the overheard cap and stops sending.
    #[test]
    fn overheard_cap_stops_forwarding() {
        let policies = NodePolicies {
            overheard_cap: 3,
            retransmit_cap: 100,
            ..Default::default()
        };
        let (mut nodes, _) = setup(&[&[0, 1, 2]], 3, policies);
        let mut r0 = stream(4, Stream::Node(0));
        let mut r1 = stream(4, Stream::Node(1));
        nodes[0].submit(b"spam", 0).unwrap();
        let mut outcomes = Vec::new();
        for t in 0..5 {
            let tx = nodes[0].on_transmit_slot(t, &mut r0);
            outcomes.push(nodes[1].on_frame_received(tx.frame.as_bytes(), LinkId(0), t).unwrap().reception);
        }
        assert_eq!(
            outcomes,
            [Reception::Delivered, Reception::Duplicate, Reception::Stale, Reception::Stale, Reception::Stale]
        );
        assert_eq!(nodes[1].stats().deliveries, 1);
        let id = message_id(b"spam");
        assert_eq!(nodes[1].seen(&id).unwrap().overheard_count, 5);
        let tx = nodes[1].on_transmit_slot(10, &mut r1);
        assert_eq!(tx.emission, Emission::Cover);
        assert_eq!(nodes[1].stats().stale_drops, 1);
        assert!(nodes[1].pool().is_empty());
        assert_eq!(nodes[1].first_deviation(), Some(10));
    }

    #[test]
    fn retransmit_cap_bounds_emissions() {
        let policies = NodePolicies {
            retransmit_cap: 4,
            ..Default::default()
        };
        let (mut nodes, _) = setup(&[&[0, 1]], 2, policies);
        let mut rng = stream(5, Stream::Node(0));
        nodes[0].submit(b"m", 0).unwrap();
        let real = (0..10)
            .filter(|&t| matches!(nodes[0].on_transmit_slot(t, &mut rng).emission, Emission::Real { .. }))
            .count();
        assert_eq!(real, 4);
    }

    #[test]
    fn fifo_and_least_popular_selection() {
        let (mut nodes, _) = setup(&[&[0, 1]], 2, NodePolicies::default());
        let mut rng = stream(6, Stream::Node(0));
        let e1 = nodes[0].submit(b"e1", 0).unwrap().id;
        let _e2 = nodes[0].submit(b"e2", 0).unwrap().id;
        let first = nodes[0].on_transmit_slot(0, &mut rng);
        assert_eq!(first.emission, Emission::Real { id: e1, group: GroupId(0) });

        // least popular: m1 overheard 5 times, m2 once
        let policies = NodePolicies {
            scheduler: Scheduler::LeastPopular,
            ..Default::default()
        };
        let (mut nodes, _) = setup(&[&[0, 1]], 2, policies);
        let mut r1 = stream(7, Stream::Node(1));
        nodes[1].submit(b"m1", 0).unwrap();
        nodes[1].submit(b"m2", 0).unwrap();
        let mut m1_frame = None;
        let mut m2_frame = None;
        for t in 0..2 {
            let tx = nodes[1].on_transmit_slot(t, &mut r1);
            match tx.emission {
                Emission::Real { id, .. } if id == message_id(b"m1") => m1_frame = Some(tx.frame),
                Emission::Real { .. } => m2_frame = Some(tx.frame),
                Emission::Cover => unreachable!(),
            }
        }
        let (m1_frame, m2_frame) = (m1_frame.unwrap(), m2_frame.unwrap());
        nodes[0].on_frame_received(m1_frame.as_bytes(), LinkId(1), 2).unwrap();
        for t in 3..7 {
            nodes[0].on_frame_received(m1_frame.as_bytes(), LinkId(1), t).unwrap();
        }
        nodes[0].on_frame_received(m2_frame.as_bytes(), LinkId(1), 7).unwrap();
        assert_eq!(nodes[0].seen(&message_id(b"m1")).unwrap().overheard_count, 5);
        assert_eq!(nodes[0].seen(&message_id(b"m2")).unwrap().overheard_count, 1);
        let mut r0 = stream(8, Stream::Node(0));
        let tx = nodes[0].on_transmit_slot(8, &mut r0);
        assert!(matches!(tx.emission, Emission::Real { id, .. } if id == message_id(b"m2")));
    }

    #[test]
    fn blacklisted_source_costs_nothing() {
        let policies = NodePolicies {
            source_cache: SourceCachePolicy::On {
                fail_threshold: 2,
                expiry: 100,
            },
            ..Default::default()
        };
        let (mut nodes, _) = setup(&[&[0, 1]], 2, policies);
        let codec = FrameCodec::new(256).unwrap();
        let mut rng = stream(9, Stream::Garbage(0));
        let attacker = LinkId(50);
        let attempts: Vec<u32> = (0..4)
            .map(|t| {
                let garbage = codec.cover(&mut rng);
                nodes[0].on_frame_received(garbage.as_bytes(), attacker, t).unwrap().decrypt_attempts
            })
            .collect();
        assert_eq!(attempts, [1, 1, 0, 0]);
        assert_eq!(nodes[0].stats().skipped, 2);
    }

    #[test]
    fn most_recent_key_first() {
        let policies = NodePolicies {
            key_order: KeyOrder::MostRecentFirst,
            ..Default::default()
        };
        let (mut nodes, _) = setup(&[&[0, 1], &[0, 2]], 3, policies);
        let mut rng = stream(10, Stream::Node(2));
        nodes[2].submit(b"a", 0).unwrap();
        let tx = nodes[2].on_transmit_slot(0, &mut rng);
        assert_eq!(nodes[0].on_frame_received(tx.frame.as_bytes(), LinkId(2), 0).unwrap().decrypt_attempts, 2);
        nodes[2].submit(b"b", 1).unwrap();
        nodes[2].on_transmit_slot(1, &mut rng); // "a" again (round robin)
        let tx = nodes[2].on_transmit_slot(2, &mut rng);
        assert!(matches!(tx.emission, Emission::Real { id, .. } if id == message_id(b"b")));
        assert_eq!(nodes[0].on_frame_received(tx.frame.as_bytes(), LinkId(2), 2).unwrap().decrypt_attempts, 1);
    }

    #[test]
    fn forget_old_seen_boundary() {
        let policies = NodePolicies {
            freshness_age: 10,
            seen_forget: 20,
            ..Default::default()
        };
        let (mut nodes, _) = setup(&[&[0, 1]], 2, policies);
        nodes[0].forget_old_seen(100);
        assert_eq!(nodes[0].seen_len(), 0);

        let id = nodes[0].submit(b"old", 0).unwrap().id;
        nodes[0].forget_old_seen(20);
        assert!(nodes[0].seen(&id).is_some());
        nodes[0].forget_old_seen(21);
        assert!(nodes[0].seen(&id).is_none());
        // forgotten messages are not re-originated or re-delivered
        assert_eq!(nodes[0].submit(b"old", 22).unwrap().enqueued, 0);
    }

    #[test]
    fn pool_overflow_evicts() {
        let policies = NodePolicies {
            pool_capacity: 2,
            ..Default::default()
        };
        let (mut nodes, _) = setup(&[&[0, 1], &[0, 2]], 3, policies);
        nodes[0].submit(b"a", 0).unwrap();
        nodes[0].submit(b"b", 5).unwrap();
        assert_eq!(nodes[0].pool().len(), 2);
        assert_eq!(nodes[0].stats().evictions, 2);
        assert_eq!(nodes[0].first_deviation(), Some(5));
    }
}
