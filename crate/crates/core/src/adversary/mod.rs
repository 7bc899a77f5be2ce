//! Adversary models and evaluation.
//!
//! Adversaries only ever see an [`ObservationLog`]: which link id emitted
//! which frame, when and where, restricted to their listening scope. Internal
//! adversaries additionally hold some group keys. Ground truth (what a frame
//! really carried, who originated a message) is used only to score them.

mod anonymity;
mod distinguish;
mod linker;
mod metrics;
mod social;

use alloc::vec::Vec;

pub use anonymity::{anonymity_report, sender_anonymity, AnonymityEntry, AnonymityReport, Membership};
pub use distinguish::{
    distinguishability_test, frame_features, ClassifierResult, DistinguishError, Distinguishability,
    MIN_FRAMES, MIN_PER_CLASS,
};
pub use linker::{equality_linker, LinkReport};
pub use metrics::{performance_metrics, MessageMetrics, Performance};
pub use social::{social_graph_recovery, SocialGraphReport};

use crate::netsim::{Arena, EmissionEvent, EmissionKind, Vec2, Waypoint};
use crate::wire::{Frame, FrameCodec, GroupKey, MessageId};
use crate::{GroupId, LinkId, Tick};

/// Where an eavesdropper listens.
#[derive(Clone, Debug, PartialEq)]
pub enum Scope {
    Global,
    Disk { center: Vec2, radius: f64 },
    /// A listening disk whose center follows a timeline.
    Mobile { radius: f64, trajectory: Vec<Waypoint> },
}

impl Scope {
    pub fn is_global(&self) -> bool {
        matches!(self, Scope::Global)
    }

    /// Whether an emission at `position` and `tick` is heard.
    pub fn covers(&self, arena: &Arena, tick: Tick, position: Vec2) -> bool {
        match self {
            Scope::Global => true,
            Scope::Disk { center, radius } => arena.within(position, *center, *radius),
            Scope::Mobile { radius, trajectory } => {
                if trajectory.is_empty() {
                    return false;
                }
                let center = crate::netsim::trajectory_position(trajectory, tick);
                arena.within(position, center, *radius)
            }
        }
    }
}

/// One overheard emission.
#[derive(Clone, Debug, PartialEq)]
pub struct Observation {
    pub tick: Tick,
    pub link: LinkId,
    pub position: Vec2,
    pub frame: Option<Frame>,
}

#[derive(Clone, Debug, PartialEq)]
pub struct ObservationLog {
    pub scope: Scope,
    pub entries: Vec<Observation>,
}

impl ObservationLog {
    /// Records the emissions `scope` covers. The second vector holds the
    /// ground-truth kind of each entry, for scoring only.
    pub fn capture(events: &[EmissionEvent], scope: Scope, arena: &Arena) -> (Self, Vec<EmissionKind>) {
        let (entries, truth) = events
            .iter()
            .filter(|e| scope.covers(arena, e.tick, e.position))
            .map(|e| {
                (
                    Observation {
                        tick: e.tick,
                        link: e.emitter,
                        position: e.position,
                        frame: e.frame.clone(),
                    },
                    e.kind,
                )
            })
            .unzip();
        (Self { scope, entries }, truth)
    }

    pub fn len(&self) -> usize {
        self.entries.len()
    }

    pub fn is_empty(&self) -> bool {
        self.entries.is_empty()
    }
}

/// An entry of the log that one of the adversary's keys decrypts.
#[derive(Copy, Clone, Debug, PartialEq, Eq)]
pub struct Decrypted {
    pub entry: usize,
    pub group: GroupId,
    pub id: MessageId,
}

/// An adversary's knowledge: its log and the keys it holds. No keys means an
/// external adversary.
#[derive(Clone, Debug)]
pub struct AdversaryView {
    pub keys: Vec<GroupKey>,
    pub log: ObservationLog,
}

impl AdversaryView {
    pub fn external(log: ObservationLog) -> Self {
        Self { keys: Vec::new(), log }
    }

    pub fn is_internal(&self) -> bool {
        !self.keys.is_empty()
    }

    pub fn compromised(&self) -> impl Iterator<Item = GroupId> + '_ {
        self.keys.iter().map(|k| k.group)
    }

    /// Trial-decrypts every logged frame with every held key.
    pub fn decrypt_all(&self, codec: &FrameCodec) -> Vec<Decrypted> {
        if self.keys.is_empty() {
            return Vec::new();
        }
        self.log
            .entries
            .iter()
            .enumerate()
            .filter_map(|(i, obs)| {
                let frame = obs.frame.as_ref()?;
                self.keys.iter().find_map(|key| {
                    codec
                        .try_decrypt(frame.as_bytes(), key)
                        .ok()
                        .flatten()
                        .map(|plain| Decrypted {
                            entry: i,
                            group: key.group,
                            id: plain.id(),
                        })
                })
            })
            .collect()
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::netsim::{run_scenario, Placement, Scenario};

    #[test]
    fn scopes_filter_by_position() {
        let mut s = Scenario::single_group(4, 30);
        s.placement = Placement::Line { spacing: 100.0 };
        s.policies.tx_period = 3;
        let report = run_scenario(&s).unwrap();
        let arena = s.arena;
        let (global, kinds) = ObservationLog::capture(&report.events, Scope::Global, &arena);
        assert_eq!(global.len(), report.events.len());
        assert_eq!(kinds.len(), global.len());

        let disk = Scope::Disk { center: Vec2::new(0.0, 500.0), radius: 150.0 };
        let (local, _) = ObservationLog::capture(&report.events, disk, &arena);
        assert!(local.entries.iter().all(|o| o.link.0 <= 1));
        assert_eq!(local.len(), 20);

        let mobile = Scope::Mobile {
            radius: 10.0,
            trajectory: alloc::vec![
                Waypoint { tick: 0, position: Vec2::new(0.0, 500.0) },
                Waypoint { tick: 29, position: Vec2::new(290.0, 500.0) },
            ],
        };
        let (moving, _) = ObservationLog::capture(&report.events, mobile, &arena);
        assert!(moving.entries.iter().all(|o| (o.position.x - o.tick as f64 * 10.0).abs() <= 10.0));
    }
}
