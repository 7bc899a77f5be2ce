use crate::wire::MessageId;
use crate::Tick;

/// Order in which pool entries are transmitted.
#[derive(Copy, Clone, Debug, Default, PartialEq, Eq)]
pub enum Scheduler {
    /// Round robin in enqueue order; an emitted entry goes to the back.
    #[default]
    Fifo,
    /// The entry whose message was overheard plus retransmitted the fewest
    /// times goes first.
    LeastPopular,
}

/// Link-source white/blacklisting in front of trial decryption.
#[derive(Copy, Clone, Debug, Default, PartialEq, Eq)]
pub enum SourceCachePolicy {
    #[default]
    Off,
    /// A source that produced `fail_threshold` consecutive unreadable frames
    /// (and never a readable one) is skipped. Entries not heard from for more
    /// than `expiry` ticks are forgotten.
    On { fail_threshold: u32, expiry: Tick },
}

/// Trial-decryption key order.
#[derive(Copy, Clone, Debug, Default, PartialEq, Eq)]
pub enum KeyOrder {
    #[default]
    Declaration,
    /// The key that last decrypted a frame is tried first.
    MostRecentFirst,
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct NodePolicies {
    /// Ticks between two transmission slots.
    pub tx_period: Tick,
    /// A message first seen more than this many ticks ago is stale.
    pub freshness_age: Tick,
    /// A message overheard this many times is stale.
    pub overheard_cap: u32,
    /// A message this node transmitted this many times is stale.
    pub retransmit_cap: u32,
    pub scheduler: Scheduler,
    pub source_cache: SourceCachePolicy,
    /// Seen-log records older than this are dropped.
    pub seen_forget: Tick,
    pub pool_capacity: usize,
    pub key_order: KeyOrder,
}

impl Default for NodePolicies {
    fn default() -> Self {
        Self {
            tx_period: 10,
            freshness_age: 2000,
            overheard_cap: 20,
            retransmit_cap: 10,
            scheduler: Scheduler::Fifo,
            source_cache: SourceCachePolicy::Off,
            seen_forget: 4000,
            pool_capacity: 256,
            key_order: KeyOrder::Declaration,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
#[error("policy `{field}`: {reason}")]
pub struct PolicyError {
    pub field: &'static str,
    pub reason: &'static str,
}

impl NodePolicies {
    pub fn validate(&self) -> Result<(), PolicyError> {
        let positive = |field, ok: bool| {
            if ok {
                Ok(())
            } else {
                Err(PolicyError {
                    field,
                    reason: "must be positive",
                })
            }
        };
        positive("tx_period", self.tx_period > 0)?;
        positive("freshness_age", self.freshness_age > 0)?;
        positive("overheard_cap", self.overheard_cap > 0)?;
        positive("retransmit_cap", self.retransmit_cap > 0)?;
        positive("seen_forget", self.seen_forget > 0)?;
        positive("pool_capacity", self.pool_capacity > 0)?;
        if let SourceCachePolicy::On { fail_threshold, expiry } = self.source_cache {
            positive("source_cache.fail_threshold", fail_threshold > 0)?;
            positive("source_cache.expiry", expiry > 0)?;
        }
        if self.seen_forget < self.freshness_age {
            return Err(PolicyError {
                field: "seen_forget",
                reason: "must be at least freshness_age",
            });
        }
        Ok(())
    }
}

/// Seen-log entry for one message.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct SeenRecord {
    pub id: MessageId,
    pub first_seen: Tick,
    pub overheard_count: u32,
    pub retransmit_count: u32,
    pub delivered_up: bool,
}

impl SeenRecord {
    pub fn new(id: MessageId, first_seen: Tick) -> Self {
        Self {
            id,
            first_seen,
            overheard_count: 0,
            retransmit_count: 0,
            delivered_up: false,
        }
    }

    pub fn popularity(&self) -> u64 {
        u64::from(self.overheard_count) + u64::from(self.retransmit_count)
    }
}

/// Whether a message should no longer be forwarded: too old, overheard too
/// often, or retransmitted too often.
pub fn is_stale(record: &SeenRecord, now: Tick, policies: &NodePolicies) -> bool {
    now.saturating_sub(record.first_seen) > policies.freshness_age
        || record.overheard_count >= policies.overheard_cap
        || record.retransmit_count >= policies.retransmit_cap
}
