use alloc::collections::BTreeMap;
use alloc::sync::Arc;
use alloc::vec::Vec;

use super::policy::{Scheduler, SeenRecord};
use crate::wire::MessageId;
use crate::{GroupId, Tick};

/// A plaintext message waiting to be (re-)encrypted for one group.
#[derive(Clone, Debug)]
pub struct PoolEntry {
    pub id: MessageId,
    pub payload: Arc<[u8]>,
    pub group: GroupId,
    /// Position in the round-robin order; refreshed on every emission.
    seq: u64,
    pub emissions: u32,
}

/// Ordering key shared by selection (smallest first) and eviction (largest
/// first): message popularity, then age, then id, then how often this entry
/// went out, then queue position.
type Rank = (u64, Tick, MessageId, u32, u64);

#[derive(Clone, Debug, Default)]
pub(crate) struct Pool {
    entries: Vec<PoolEntry>,
    next_seq: u64,
}

impl Pool {
    pub fn len(&self) -> usize {
        self.entries.len()
    }

    pub fn entries(&self) -> &[PoolEntry] {
        &self.entries
    }

    pub fn contains(&self, id: &MessageId, group: GroupId) -> bool {
        self.entries.iter().any(|e| &e.id == id && e.group == group)
    }

    pub fn push(&mut self, id: MessageId, payload: Arc<[u8]>, group: GroupId) {
        let seq = self.bump();
        self.entries.push(PoolEntry {
            id,
            payload,
            group,
            seq,
            emissions: 0,
        });
    }

    fn bump(&mut self) -> u64 {
        let seq = self.next_seq;
        self.next_seq += 1;
        seq
    }

    pub fn get(&self, index: usize) -> &PoolEntry {
        &self.entries[index]
    }

    /// Removes every entry of `id`; returns how many were removed.
    pub fn remove_message(&mut self, id: &MessageId) -> usize {
        let before = self.entries.len();
        self.entries.retain(|e| &e.id != id);
        before - self.entries.len()
    }

    fn rank(entry: &PoolEntry, seen: &BTreeMap<MessageId, SeenRecord>) -> Rank {
        let (popularity, first_seen) = seen
            .get(&entry.id)
            .map_or((0, 0), |r| (r.popularity(), r.first_seen));
        (popularity, first_seen, entry.id, entry.emissions, entry.seq)
    }

    pub fn select(
        &self,
        scheduler: Scheduler,
        seen: &BTreeMap<MessageId, SeenRecord>,
    ) -> Option<usize> {
        let indexed = self.entries.iter().enumerate();
        match scheduler {
            Scheduler::Fifo => indexed.min_by_key(|(_, e)| e.seq).map(|(i, _)| i),
            Scheduler::LeastPopular => indexed
                .min_by_key(|(_, e)| Self::rank(e, seen))
                .map(|(i, _)| i),
        }
    }

    /// Removes the entry that would be scheduled last.
    pub fn evict_most_popular(
        &mut self,
        seen: &BTreeMap<MessageId, SeenRecord>,
    ) -> Option<PoolEntry> {
        let index = self
            .entries
            .iter()
            .enumerate()
            .max_by_key(|(_, e)| Self::rank(e, seen))
            .map(|(i, _)| i)?;
        Some(self.entries.remove(index))
    }

    /// Sends an entry to the back of the round-robin order.
    pub fn mark_emitted(&mut self, index: usize) {
        let seq = self.bump();
        let entry = &mut self.entries[index];
        entry.emissions += 1;
        entry.seq = seq;
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::wire::message_id;

    fn payload(s: &[u8]) -> Arc<[u8]> {
        Arc::from(s)
    }

    #[test]
    fn fifo_round_robin() {
        let mut pool = Pool::default();
        let (a, b) = (message_id(b"a"), message_id(b"b"));
        pool.push(a, payload(b"a"), GroupId(0));
        pool.push(b, payload(b"b"), GroupId(0));
        let seen = BTreeMap::new();
        let first = pool.select(Scheduler::Fifo, &seen).unwrap();
        assert_eq!(pool.get(first).id, a);
        pool.mark_emitted(first);
        let second = pool.select(Scheduler::Fifo, &seen).unwrap();
        assert_eq!(pool.get(second).id, b);
    }

    #[test]
    fn least_popular_rotates_groups_of_one_message() {
        let mut pool = Pool::default();
        let id = message_id(b"m");
        pool.push(id, payload(b"m"), GroupId(0));
        pool.push(id, payload(b"m"), GroupId(1));
        let mut seen = BTreeMap::new();
        seen.insert(id, SeenRecord::new(id, 0));
        let mut order = Vec::new();
        for _ in 0..4 {
            let i = pool.select(Scheduler::LeastPopular, &seen).unwrap();
            order.push(pool.get(i).group.0);
            pool.mark_emitted(i);
        }
        assert_eq!(order, [0, 1, 0, 1]);
    }

    #[test]
    fn eviction_takes_most_popular() {
        let mut pool = Pool::default();
        let (a, b) = (message_id(b"a"), message_id(b"b"));
        pool.push(a, payload(b"a"), GroupId(0));
        pool.push(b, payload(b"b"), GroupId(0));
        let mut seen = BTreeMap::new();
        seen.insert(a, SeenRecord { overheard_count: 9, ..SeenRecord::new(a, 0) });
        seen.insert(b, SeenRecord::new(b, 0));
        assert_eq!(pool.evict_most_popular(&seen).unwrap().id, a);
        assert_eq!(pool.len(), 1);
    }
}
