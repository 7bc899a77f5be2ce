use alloc::format;
use alloc::string::{String, ToString};
use alloc::vec;
use alloc::vec::Vec;
use core::fmt;

use rand_core::RngCore;

use super::geometry::{Arena, Vec2};
use super::mobility::{Mobility, Placement};
use crate::keyring::KeyringError;
use crate::node::NodePolicies;
use crate::wire::{FrameCodec, DEFAULT_FRAME_SIZE};
use crate::{NodeId, Tick};

/// A validation failure, naming the offending configuration field.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ScenarioError {
    pub field: String,
    pub reason: String,
}

impl ScenarioError {
    pub fn new(field: impl Into<String>, reason: impl Into<String>) -> Self {
        Self {
            field: field.into(),
            reason: reason.into(),
        }
    }

    pub(crate) fn from_keyring(err: KeyringError) -> Self {
        let field = match &err {
            KeyringError::UnknownMember { group, .. } | KeyringError::GroupTooSmall(group) => {
                format!("groups[{}].members", group.0)
            }
            KeyringError::NodeWithoutGroup(_) => "groups".to_string(),
            KeyringError::DuplicateGroup(_) | KeyringError::DuplicateKey(..) => "groups".to_string(),
        };
        Self::new(field, err.to_string())
    }
}

impl fmt::Display for ScenarioError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "invalid `{}`: {}", self.field, self.reason)
    }
}

impl core::error::Error for ScenarioError {}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct GroupSpec {
    pub name: String,
    pub members: Vec<NodeId>,
}

/// Application payload of a scheduled submission.
#[derive(Clone, Debug, PartialEq, Eq)]
pub enum Payload {
    Literal(Vec<u8>),
    /// This many octets from the traffic stream.
    Random(usize),
}

impl Payload {
    pub fn len(&self) -> usize {
        match self {
            Payload::Literal(b) => b.len(),
            Payload::Random(n) => *n,
        }
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    pub(crate) fn resolve<R: RngCore>(&self, rng: &mut R) -> Vec<u8> {
        match self {
            Payload::Literal(b) => b.clone(),
            Payload::Random(n) => {
                let mut bytes = vec![0u8; *n];
                rng.fill_bytes(&mut bytes);
                bytes
            }
        }
    }
}

/// An application message handed to `node` at `tick`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Injection {
    pub tick: Tick,
    pub node: NodeId,
    pub payload: Payload,
    /// Intended recipient, used only for latency metrics.
    pub to: Option<NodeId>,
}

/// Receiver-side jamming: nodes inside the disk hear nothing while active.
#[derive(Clone, Debug, PartialEq)]
pub struct JamRegion {
    pub center: Vec2,
    pub radius: f64,
    pub start: Tick,
    pub end: Tick,
}

impl JamRegion {
    pub fn active_at(&self, tick: Tick) -> bool {
        (self.start..self.end).contains(&tick)
    }
}

/// A stationary active adversary broadcasting random frames.
#[derive(Clone, Debug, PartialEq)]
pub struct GarbageEmitter {
    pub position: Vec2,
    /// Frames per tick; fractional rates accumulate.
    pub rate: f64,
    pub start: Tick,
    pub end: Tick,
}

impl GarbageEmitter {
    pub fn active_at(&self, tick: Tick) -> bool {
        (self.start..self.end).contains(&tick)
    }
}

/// Replaces the default policies for some nodes.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct PolicyOverride {
    pub nodes: Vec<NodeId>,
    pub policies: NodePolicies,
}

#[derive(Clone, Debug, PartialEq)]
pub struct Scenario {
    pub seed: u64,
    pub ticks: Tick,
    pub frame_size: usize,
    pub node_count: u32,
    pub arena: Arena,
    pub radio_range: f64,
    pub placement: Placement,
    pub mobility: Mobility,
    pub groups: Vec<GroupSpec>,
    pub policies: NodePolicies,
    pub overrides: Vec<PolicyOverride>,
    pub traffic: Vec<Injection>,
    pub jammers: Vec<JamRegion>,
    pub garbage: Vec<GarbageEmitter>,
    /// Keep frame bytes in the report after each tick.
    pub keep_frames: bool,
}

impl Scenario {
    /// A static scenario with one group holding every node.
    pub fn single_group(node_count: u32, ticks: Tick) -> Self {
        Self {
            seed: 0,
            ticks,
            frame_size: DEFAULT_FRAME_SIZE,
            node_count,
            arena: Arena::default(),
            radio_range: 100.0,
            placement: Placement::Uniform,
            mobility: Mobility::Static,
            groups: vec![GroupSpec {
                name: "all".to_string(),
                members: (0..node_count).map(NodeId).collect(),
            }],
            policies: NodePolicies::default(),
            overrides: Vec::new(),
            traffic: Vec::new(),
            jammers: Vec::new(),
            garbage: Vec::new(),
            keep_frames: true,
        }
    }

    pub fn policies_for(&self, node: NodeId) -> &NodePolicies {
        self.overrides
            .iter()
            .rev()
            .find(|o| o.nodes.contains(&node))
            .map_or(&self.policies, |o| &o.policies)
    }

    pub fn validate(&self) -> Result<(), ScenarioError> {
        fn err(field: impl Into<String>, reason: impl Into<String>) -> ScenarioError {
            ScenarioError::new(field, reason)
        }
        if self.node_count == 0 {
            return Err(err("world.nodes", "must be at least 1"));
        }
        if self.ticks == 0 {
            return Err(err("ticks", "must be at least 1"));
        }
        let codec = FrameCodec::new(self.frame_size).map_err(|e| err("frame_size", e.to_string()))?;
        let finite_positive = |v: f64| v.is_finite() && v > 0.0;
        if !finite_positive(self.arena.width) || !finite_positive(self.arena.height) {
            return Err(err("world.arena", "width and height must be positive"));
        }
        if !finite_positive(self.radio_range) {
            return Err(err("world.radio_range", "must be positive"));
        }

        let n = self.node_count as usize;
        match &self.placement {
            Placement::Explicit(points) => {
                if points.len() != n {
                    return Err(err(
                        "world.positions",
                        format!("{} positions for {} nodes", points.len(), n),
                    ));
                }
                if let Some(i) = points.iter().position(|p| !self.arena.contains(*p)) {
                    return Err(err(format!("world.positions[{i}]"), "outside the arena"));
                }
            }
            Placement::Line { spacing } => {
                if !(spacing.is_finite() && *spacing >= 0.0) || (n - 1) as f64 * spacing > self.arena.width {
                    return Err(err("world.spacing", "line does not fit the arena"));
                }
            }
            Placement::Uniform => {}
        }
        match &self.mobility {
            Mobility::Static => {}
            Mobility::RandomWaypoint { speed_min, speed_max, .. } => {
                if !(speed_min.is_finite() && *speed_min >= 0.0) {
                    return Err(err("world.mobility.speed_min", "must be non-negative"));
                }
                if !(speed_max.is_finite() && speed_max >= speed_min) {
                    return Err(err("world.mobility.speed_max", "must be at least speed_min"));
                }
            }
            Mobility::Trace(traces) => {
                if traces.len() != n {
                    return Err(err(
                        "world.mobility.trace",
                        format!("{} timelines for {} nodes", traces.len(), n),
                    ));
                }
                for (i, t) in traces.iter().enumerate() {
                    if t.is_empty() || t.windows(2).any(|w| w[0].tick >= w[1].tick) {
                        return Err(err(
                            format!("world.mobility.trace[{i}]"),
                            "needs at least one point with strictly increasing ticks",
                        ));
                    }
                    if t.iter().any(|w| !self.arena.contains(w.position)) {
                        return Err(err(format!("world.mobility.trace[{i}]"), "leaves the arena"));
                    }
                }
            }
        }

        if self.groups.is_empty() {
            return Err(err("groups", "at least one group is required"));
        }
        for (i, g) in self.groups.iter().enumerate() {
            if let Some(m) = g.members.iter().find(|m| m.0 >= self.node_count) {
                return Err(err(
                    format!("groups[{i}].members"),
                    format!("node {m} does not exist ({} nodes)", self.node_count),
                ));
            }
            let mut members = g.members.clone();
            members.sort();
            members.dedup();
            if members.len() < 2 {
                return Err(err(format!("groups[{i}].members"), "a group needs at least two members"));
            }
        }
        if let Some(n) = (0..self.node_count)
            .map(NodeId)
            .find(|n| !self.groups.iter().any(|g| g.members.contains(n)))
        {
            return Err(err("groups", format!("node {n} belongs to no group")));
        }

        self.policies
            .validate()
            .map_err(|e| err(format!("node.{}", e.field), e.reason))?;
        for (i, o) in self.overrides.iter().enumerate() {
            if let Some(m) = o.nodes.iter().find(|m| m.0 >= self.node_count) {
                return Err(err(format!("node.overrides[{i}].nodes"), format!("node {m} does not exist")));
            }
            o.policies
                .validate()
                .map_err(|e| err(format!("node.overrides[{i}].{}", e.field), e.reason))?;
        }

        for (i, inj) in self.traffic.iter().enumerate() {
            if inj.node.0 >= self.node_count {
                return Err(err(format!("traffic[{i}].node"), format!("node {} does not exist", inj.node)));
            }
            if let Some(to) = inj.to.filter(|to| to.0 >= self.node_count) {
                return Err(err(format!("traffic[{i}].to"), format!("node {to} does not exist")));
            }
            if inj.payload.len() > codec.max_payload() {
                return Err(err(
                    format!("traffic[{i}].payload"),
                    format!("{} octets exceed the maximum payload of {}", inj.payload.len(), codec.max_payload()),
                ));
            }
            if inj.tick >= self.ticks {
                return Err(err(format!("traffic[{i}].tick"), "after the end of the run"));
            }
        }
        for (i, j) in self.jammers.iter().enumerate() {
            if !finite_positive(j.radius) {
                return Err(err(format!("jammers[{i}].radius"), "must be positive"));
            }
        }
        for (i, g) in self.garbage.iter().enumerate() {
            if !(g.rate.is_finite() && g.rate >= 0.0) {
                return Err(err(format!("garbage[{i}].rate"), "must be non-negative"));
            }
        }
        Ok(())
    }
}
