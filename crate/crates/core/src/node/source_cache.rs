use alloc::collections::BTreeMap;

use super::policy::SourceCachePolicy;
use crate::{LinkId, Tick};

#[derive(Clone, Debug, Default, PartialEq, Eq)]
pub struct SourceEntry {
    /// At least one frame from this source was readable.
    pub whitelisted: bool,
    pub consecutive_failures: u32,
    pub last_heard: Tick,
}

/// Per-link-source counters. Stores link ids and counters only, never frame
/// contents.
#[derive(Clone, Debug, Default)]
pub struct SourceCache {
    policy: SourceCachePolicy,
    entries: BTreeMap<LinkId, SourceEntry>,
}

impl SourceCache {
    pub fn new(policy: SourceCachePolicy) -> Self {
        Self {
            policy,
            entries: BTreeMap::new(),
        }
    }

    pub fn entry(&self, source: LinkId) -> Option<&SourceEntry> {
        self.entries.get(&source)
    }

    pub fn len(&self) -> usize {
        self.entries.len()
    }

    pub fn is_empty(&self) -> bool {
        self.entries.is_empty()
    }

    /// Registers a frame heard from `source` at `now` and decides whether it
    /// is worth trial-decrypting.
    pub fn should_try(&mut self, source: LinkId, now: Tick) -> bool {
        let SourceCachePolicy::On { fail_threshold, expiry } = self.policy else {
            return true;
        };
        let entry = self.entries.entry(source).or_default();
        if now.saturating_sub(entry.last_heard) > expiry {
            *entry = SourceEntry::default();
        }
        entry.last_heard = now;
        entry.whitelisted || entry.consecutive_failures < fail_threshold
    }

    /// Records the result of a trial decryption of a frame from `source`.
    pub fn update(&mut self, source: LinkId, now: Tick, readable: bool) {
        if self.policy == SourceCachePolicy::Off {
            return;
        }
        let entry = self.entries.entry(source).or_default();
        entry.last_heard = now;
        if readable {
            entry.whitelisted = true;
            entry.consecutive_failures = 0;
        } else if !entry.whitelisted {
            entry.consecutive_failures = entry.consecutive_failures.saturating_add(1);
        }
    }

    /// Drops entries idle for longer than the expiry.
    pub fn purge(&mut self, now: Tick) {
        if let SourceCachePolicy::On { expiry, .. } = self.policy {
            self.entries
                .retain(|_, e| now.saturating_sub(e.last_heard) <= expiry);
        }
    }
}
