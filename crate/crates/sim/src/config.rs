//! Scenario configuration files: TOML or JSON, with dotted `--set`
//! overrides applied before typed parsing.

use std::collections::BTreeMap;
use std::path::Path;

use adtn_core::adversary::Scope;
use adtn_core::netsim::{
    Arena, GarbageEmitter, GroupSpec, Injection, JamRegion, Mobility, Payload, Placement, PolicyOverride, Scenario,
    Vec2, Waypoint,
};
use adtn_core::node::{KeyOrder, NodePolicies, Scheduler, SourceCachePolicy};
use adtn_core::rng::{stream, Stream};
use adtn_core::{GroupId, NodeId, Tick};
use rand::Rng;
use serde::{Deserialize, Serialize};
use serde_json::Value;

use crate::error::ConfigError;

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct ScenarioConfig {
    pub seed: u64,
    pub ticks: Tick,
    pub frame_size: usize,
    /// Wall-clock length of a tick, for labelling reports only.
    pub tick_ms: u64,
    pub world: WorldConfig,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub group_layout: Option<GroupLayout>,
    #[serde(skip_serializing_if = "Vec::is_empty")]
    pub groups: Vec<GroupConfig>,
    pub node: NodeConfig,
    #[serde(skip_serializing_if = "Vec::is_empty")]
    pub traffic: Vec<TrafficConfig>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub workload: Option<Workload>,
    #[serde(skip_serializing_if = "Vec::is_empty")]
    pub adversaries: Vec<AdversaryConfig>,
    pub output: OutputConfig,
}

impl Default for ScenarioConfig {
    fn default() -> Self {
        Self {
            seed: 0,
            ticks: 1000,
            frame_size: adtn_core::wire::DEFAULT_FRAME_SIZE,
            tick_ms: 100,
            world: WorldConfig::default(),
            group_layout: None,
            groups: Vec::new(),
            node: NodeConfig::default(),
            traffic: Vec::new(),
            workload: None,
            adversaries: Vec::new(),
            output: OutputConfig::default(),
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct WorldConfig {
    pub nodes: u32,
    /// `[width, height]` in meters.
    pub arena: [f64; 2],
    pub torus: bool,
    pub radio_range: f64,
    pub placement: PlacementKind,
    pub spacing: f64,
    #[serde(skip_serializing_if = "Vec::is_empty")]
    pub positions: Vec<[f64; 2]>,
    pub mobility: MobilityConfig,
}

impl Default for WorldConfig {
    fn default() -> Self {
        Self {
            nodes: 10,
            arena: [1000.0, 1000.0],
            torus: false,
            radio_range: 100.0,
            placement: PlacementKind::Uniform,
            spacing: 50.0,
            positions: Vec::new(),
            mobility: MobilityConfig::default(),
        }
    }
}

#[derive(Copy, Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum PlacementKind {
    Uniform,
    Line,
    Explicit,
}

#[derive(Copy, Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum MobilityKind {
    Static,
    RandomWaypoint,
    Trace,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct TracePoint {
    pub tick: Tick,
    pub x: f64,
    pub y: f64,
}

impl From<&TracePoint> for Waypoint {
    fn from(p: &TracePoint) -> Self {
        Waypoint { tick: p.tick, position: Vec2::new(p.x, p.y) }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct MobilityConfig {
    pub model: MobilityKind,
    /// Meters per tick.
    pub speed_min: f64,
    pub speed_max: f64,
    /// Ticks spent at each waypoint.
    pub pause: Tick,
    #[serde(skip_serializing_if = "Vec::is_empty")]
    pub trace: Vec<Vec<TracePoint>>,
}

impl Default for MobilityConfig {
    fn default() -> Self {
        Self {
            model: MobilityKind::Static,
            speed_min: 1.0,
            speed_max: 5.0,
            pause: 0,
            trace: Vec::new(),
        }
    }
}

/// Generated groups: windows of `size` consecutive node ids, consecutive
/// windows sharing `overlap` nodes, wrapping around so every node belongs.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct GroupLayout {
    pub size: u32,
    pub overlap: u32,
}

impl Default for GroupLayout {
    fn default() -> Self {
        Self { size: 5, overlap: 1 }
    }
}

impl GroupLayout {
    pub fn generate(&self, nodes: u32) -> Result<Vec<GroupSpec>, ConfigError> {
        if self.size < 2 {
            return Err(ConfigError::new("group_layout.size", "must be at least 2"));
        }
        if self.overlap >= self.size {
            return Err(ConfigError::new("group_layout.overlap", "must be smaller than the group size"));
        }
        if self.size >= nodes {
            return Ok(vec![GroupSpec { name: "g0".into(), members: (0..nodes).map(NodeId).collect() }]);
        }
        let stride = self.size - self.overlap;
        let count = nodes.div_ceil(stride);
        Ok((0..count)
            .map(|g| GroupSpec {
                name: format!("g{g}"),
                members: (0..self.size).map(|k| NodeId((g * stride + k) % nodes)).collect(),
            })
            .collect())
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct GroupConfig {
    pub name: String,
    pub members: Vec<u32>,
}

#[derive(Copy, Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum SchedulerKind {
    Fifo,
    LeastPopular,
}

#[derive(Copy, Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum KeyOrderKind {
    Declaration,
    MostRecentFirst,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct SourceCacheConfig {
    pub enabled: bool,
    pub fail_threshold: u32,
    pub expiry: Tick,
}

impl Default for SourceCacheConfig {
    fn default() -> Self {
        Self { enabled: false, fail_threshold: 3, expiry: 1000 }
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct NodeConfig {
    pub tx_period: Tick,
    pub freshness_age: Tick,
    pub overheard_cap: u32,
    pub retransmit_cap: u32,
    pub scheduler: SchedulerKind,
    pub source_cache: SourceCacheConfig,
    pub seen_forget: Tick,
    pub pool_capacity: usize,
    pub key_order: KeyOrderKind,
    #[serde(skip_serializing_if = "Vec::is_empty")]
    pub overrides: Vec<NodeOverride>,
}

impl Default for NodeConfig {
    fn default() -> Self {
        let p = NodePolicies::default();
        Self {
            tx_period: p.tx_period,
            freshness_age: p.freshness_age,
            overheard_cap: p.overheard_cap,
            retransmit_cap: p.retransmit_cap,
            scheduler: SchedulerKind::Fifo,
            source_cache: SourceCacheConfig::default(),
            seen_forget: p.seen_forget,
            pool_capacity: p.pool_capacity,
            key_order: KeyOrderKind::Declaration,
            overrides: Vec::new(),
        }
    }
}

impl NodeConfig {
    fn policies(&self) -> NodePolicies {
        NodePolicies {
            tx_period: self.tx_period,
            freshness_age: self.freshness_age,
            overheard_cap: self.overheard_cap,
            retransmit_cap: self.retransmit_cap,
            scheduler: match self.scheduler {
                SchedulerKind::Fifo => Scheduler::Fifo,
                SchedulerKind::LeastPopular => Scheduler::LeastPopular,
            },
            source_cache: if self.source_cache.enabled {
                SourceCachePolicy::On {
                    fail_threshold: self.source_cache.fail_threshold,
                    expiry: self.source_cache.expiry,
                }
            } else {
                SourceCachePolicy::Off
            },
            seen_forget: self.seen_forget,
            pool_capacity: self.pool_capacity,
            key_order: match self.key_order {
                KeyOrderKind::Declaration => KeyOrder::Declaration,
                KeyOrderKind::MostRecentFirst => KeyOrder::MostRecentFirst,
            },
        }
    }
}

/// Per-node policy changes on top of `[node]`.
#[derive(Clone, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct NodeOverride {
    pub nodes: Vec<u32>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub tx_period: Option<Tick>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub freshness_age: Option<Tick>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub overheard_cap: Option<u32>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub retransmit_cap: Option<u32>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub scheduler: Option<SchedulerKind>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub source_cache: Option<SourceCacheConfig>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub seen_forget: Option<Tick>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub pool_capacity: Option<usize>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub key_order: Option<KeyOrderKind>,
}

impl NodeOverride {
    fn apply(&self, base: &NodeConfig) -> NodeConfig {
        NodeConfig {
            tx_period: self.tx_period.unwrap_or(base.tx_period),
            freshness_age: self.freshness_age.unwrap_or(base.freshness_age),
            overheard_cap: self.overheard_cap.unwrap_or(base.overheard_cap),
            retransmit_cap: self.retransmit_cap.unwrap_or(base.retransmit_cap),
            scheduler: self.scheduler.unwrap_or(base.scheduler),
            source_cache: self.source_cache.clone().unwrap_or_else(|| base.source_cache.clone()),
            seen_forget: self.seen_forget.unwrap_or(base.seen_forget),
            pool_capacity: self.pool_capacity.unwrap_or(base.pool_capacity),
            key_order: self.key_order.unwrap_or(base.key_order),
            overrides: Vec::new(),
        }
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct TrafficConfig {
    pub tick: Tick,
    pub node: u32,
    /// UTF-8 payload; exclusive with `payload_size`.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub payload: Option<String>,
    /// Random payload of this many octets.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub payload_size: Option<usize>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub to: Option<u32>,
}

/// Generated traffic: `messages` random payloads, one every `interval`
/// ticks from `start`, each from a node drawn from the seed.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct Workload {
    pub messages: u32,
    pub interval: Tick,
    pub start: Tick,
    pub payload_size: usize,
}

impl Default for Workload {
    fn default() -> Self {
        Self { messages: 10, interval: 50, start: 0, payload_size: 100 }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum ScopeConfig {
    Named(ScopeName),
    Disk {
        center: [f64; 2],
        radius: f64,
        /// Makes the disk follow a timeline; `center` is then ignored.
        #[serde(default, skip_serializing_if = "Vec::is_empty")]
        trajectory: Vec<TracePoint>,
    },
}

#[derive(Copy, Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ScopeName {
    Global,
}

impl Default for ScopeConfig {
    fn default() -> Self {
        ScopeConfig::Named(ScopeName::Global)
    }
}

impl ScopeConfig {
    pub fn to_scope(&self) -> Scope {
        match self {
            ScopeConfig::Named(ScopeName::Global) => Scope::Global,
            ScopeConfig::Disk { center, radius, trajectory } if trajectory.is_empty() => {
                Scope::Disk { center: Vec2::new(center[0], center[1]), radius: *radius }
            }
            ScopeConfig::Disk { radius, trajectory, .. } => Scope::Mobile {
                radius: *radius,
                trajectory: trajectory.iter().map(Waypoint::from).collect(),
            },
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "type", rename_all = "snake_case")]
pub enum AdversaryConfig {
    /// An eavesdropper; internal if it holds keys.
    Passive {
        #[serde(default, skip_serializing_if = "Option::is_none")]
        name: Option<String>,
        #[serde(default)]
        scope: ScopeConfig,
        /// Group names, or `"all"`.
        #[serde(default, skip_serializing_if = "Vec::is_empty")]
        keys: Vec<String>,
    },
    Garbage {
        position: [f64; 2],
        /// Frames per tick.
        rate: f64,
        #[serde(default)]
        start: Tick,
        #[serde(default, skip_serializing_if = "Option::is_none")]
        end: Option<Tick>,
    },
    Jammer {
        center: [f64; 2],
        radius: f64,
        #[serde(default)]
        start: Tick,
        #[serde(default, skip_serializing_if = "Option::is_none")]
        end: Option<Tick>,
    },
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct OutputConfig {
    /// Include frame bytes in trace files.
    pub trace_frames: bool,
    /// Write `events.jsonl`, `observations.jsonl` and `ground_truth.json`.
    pub traces: bool,
}

impl Default for OutputConfig {
    fn default() -> Self {
        Self { trace_frames: false, traces: true }
    }
}

/// A passive adversary resolved against the scenario.
#[derive(Clone, Debug, PartialEq)]
pub struct ObserverSpec {
    pub name: String,
    pub scope: Scope,
    pub keys: Vec<GroupId>,
}

/// Everything a run needs.
#[derive(Clone, Debug)]
pub struct Resolved {
    pub scenario: Scenario,
    pub observers: Vec<ObserverSpec>,
    pub group_names: Vec<String>,
}

impl ScenarioConfig {
    fn group_specs(&self) -> Result<Vec<GroupSpec>, ConfigError> {
        match (&self.group_layout, self.groups.is_empty()) {
            (Some(_), false) => Err(ConfigError::new("group_layout", "conflicts with explicit [[groups]]")),
            (Some(layout), true) => layout.generate(self.world.nodes),
            (None, false) => Ok(self
                .groups
                .iter()
                .map(|g| GroupSpec { name: g.name.clone(), members: g.members.iter().copied().map(NodeId).collect() })
                .collect()),
            (None, true) => Ok(vec![GroupSpec { name: "all".into(), members: (0..self.world.nodes).map(NodeId).collect() }]),
        }
    }

    fn injections(&self) -> Result<Vec<Injection>, ConfigError> {
        let mut out = Vec::new();
        for (i, t) in self.traffic.iter().enumerate() {
            let payload = match (&t.payload, t.payload_size) {
                (Some(text), None) => Payload::Literal(text.as_bytes().to_vec()),
                (None, Some(n)) => Payload::Random(n),
                _ => {
                    return Err(ConfigError::new(
                        format!("traffic[{i}].payload"),
                        "give exactly one of `payload` and `payload_size`",
                    ))
                }
            };
            out.push(Injection { tick: t.tick, node: NodeId(t.node), payload, to: t.to.map(NodeId) });
        }
        if let Some(w) = &self.workload {
            if w.interval == 0 {
                return Err(ConfigError::new("workload.interval", "must be at least 1"));
            }
            let mut rng = stream(self.seed, Stream::Custom(0x776b));
            for k in 0..w.messages as u64 {
                let tick = w.start + k * w.interval;
                if tick >= self.ticks {
                    break;
                }
                out.push(Injection {
                    tick,
                    node: NodeId(rng.random_range(0..self.world.nodes.max(1))),
                    payload: Payload::Random(w.payload_size),
                    to: None,
                });
            }
        }
        Ok(out)
    }

    /// Builds and validates the scenario.
    pub fn resolve(&self) -> Result<Resolved, ConfigError> {
        let w = &self.world;
        let groups = self.group_specs()?;
        let group_names: Vec<String> = groups.iter().map(|g| g.name.clone()).collect();
        let mut seen = BTreeMap::new();
        for (i, name) in group_names.iter().enumerate() {
            if let Some(first) = seen.insert(name.clone(), i) {
                return Err(ConfigError::new(format!("groups[{i}].name"), format!("`{name}` already names groups[{first}]")));
            }
        }

        let placement = match w.placement {
            PlacementKind::Uniform => Placement::Uniform,
            PlacementKind::Line => Placement::Line { spacing: w.spacing },
            PlacementKind::Explicit => Placement::Explicit(w.positions.iter().map(|p| Vec2::new(p[0], p[1])).collect()),
        };
        let mobility = match w.mobility.model {
            MobilityKind::Static => Mobility::Static,
            MobilityKind::RandomWaypoint => Mobility::RandomWaypoint {
                speed_min: w.mobility.speed_min,
                speed_max: w.mobility.speed_max,
                pause: w.mobility.pause,
            },
            MobilityKind::Trace => Mobility::Trace(
                w.mobility.trace.iter().map(|t| t.iter().map(Waypoint::from).collect()).collect(),
            ),
        };

        let overrides = self
            .node
            .overrides
            .iter()
            .map(|o| PolicyOverride {
                nodes: o.nodes.iter().copied().map(NodeId).collect(),
                policies: o.apply(&self.node).policies(),
            })
            .collect();

        let mut jammers = Vec::new();
        let mut garbage = Vec::new();
        let mut observers = Vec::new();
        for (i, a) in self.adversaries.iter().enumerate() {
            match a {
                AdversaryConfig::Passive { name, scope, keys } => {
                    let keys = resolve_keys(keys, &group_names).map_err(|r| ConfigError::new(format!("adversaries[{i}].keys"), r))?;
                    if let ScopeConfig::Disk { radius, .. } = scope {
                        if !(radius.is_finite() && *radius > 0.0) {
                            return Err(ConfigError::new(format!("adversaries[{i}].scope.radius"), "must be positive"));
                        }
                    }
                    observers.push(ObserverSpec {
                        name: name.clone().unwrap_or_else(|| format!("passive{i}")),
                        scope: scope.to_scope(),
                        keys,
                    });
                }
                AdversaryConfig::Garbage { position, rate, start, end } => garbage.push(GarbageEmitter {
                    position: Vec2::new(position[0], position[1]),
                    rate: *rate,
                    start: *start,
                    end: end.unwrap_or(self.ticks),
                }),
                AdversaryConfig::Jammer { center, radius, start, end } => jammers.push(JamRegion {
                    center: Vec2::new(center[0], center[1]),
                    radius: *radius,
                    start: *start,
                    end: end.unwrap_or(self.ticks),
                }),
            }
        }

        let scenario = Scenario {
            seed: self.seed,
            ticks: self.ticks,
            frame_size: self.frame_size,
            node_count: w.nodes,
            arena: Arena { width: w.arena[0], height: w.arena[1], torus: w.torus },
            radio_range: w.radio_range,
            placement,
            mobility,
            groups,
            policies: self.node.policies(),
            overrides,
            traffic: self.injections()?,
            jammers,
            garbage,
            keep_frames: true,
        };
        scenario.validate().map_err(|e| {
            // adversary-backed lists are configured under `adversaries`
            let field = if e.field.starts_with("jammers") || e.field.starts_with("garbage") {
                format!("adversaries ({})", e.field)
            } else {
                e.field
            };
            ConfigError::new(field, e.reason)
        })?;
        Ok(Resolved { scenario, observers, group_names })
    }
}

/// Maps group names (or `"all"`) to ids.
pub fn resolve_keys(keys: &[String], group_names: &[String]) -> Result<Vec<GroupId>, String> {
    if keys.iter().any(|k| k == "all") {
        return Ok((0..group_names.len() as u32).map(GroupId).collect());
    }
    let mut out = Vec::new();
    for k in keys {
        let i = group_names
            .iter()
            .position(|n| n == k)
            .ok_or_else(|| format!("no group named `{k}`"))?;
        if !out.contains(&GroupId(i as u32)) {
            out.push(GroupId(i as u32));
        }
    }
    Ok(out)
}

/// Parses a config file into a JSON tree. A `summary.json` from an earlier
/// run yields the configuration it echoes.
pub fn load_tree(path: &Path) -> Result<Value, ConfigError> {
    let text = std::fs::read_to_string(path)
        .map_err(|e| ConfigError::new("<file>", format!("cannot read {}: {e}", path.display())))?;
    let is_json = path.extension().is_some_and(|e| e == "json");
    let tree: Value = if is_json {
        serde_json::from_str(&text).map_err(|e| ConfigError::new("<syntax>", e.to_string()))?
    } else {
        let t: toml::Table = toml::from_str(&text).map_err(|e| ConfigError::new("<syntax>", e.to_string()))?;
        serde_json::to_value(t).map_err(|e| ConfigError::new("<syntax>", e.to_string()))?
    };
    match tree {
        Value::Object(mut map) if map.contains_key("run_id") && map.contains_key("config") => {
            Ok(map.remove("config").expect("checked"))
        }
        Value::Object(_) => Ok(tree),
        _ => Err(ConfigError::new("<root>", "expected a table of settings")),
    }
}

/// Applies `path=value`, where `path` is dotted (`node.tx_period`,
/// `adversaries.0.rate`) and `value` is JSON or else a bare string.
pub fn apply_set(tree: &mut Value, assignment: &str) -> Result<(), ConfigError> {
    let (path, raw) = assignment
        .split_once('=')
        .ok_or_else(|| ConfigError::new(assignment, "expected `path=value`"))?;
    let path = path.trim();
    let value = serde_json::from_str(raw.trim()).unwrap_or_else(|_| Value::String(raw.trim().to_string()));
    set_path(tree, path, value)
}

pub fn set_path(tree: &mut Value, path: &str, value: Value) -> Result<(), ConfigError> {
    let parts: Vec<&str> = path.split('.').collect();
    if parts.iter().any(|p| p.is_empty()) {
        return Err(ConfigError::new(path, "empty path segment"));
    }
    let mut node = tree;
    for (depth, part) in parts.iter().enumerate() {
        let last = depth + 1 == parts.len();
        node = match node {
            Value::Array(items) => {
                let i: usize = part
                    .parse()
                    .map_err(|_| ConfigError::new(path, format!("`{part}` is not a list index")))?;
                let len = items.len();
                items
                    .get_mut(i)
                    .ok_or_else(|| ConfigError::new(path, format!("index {i} out of range ({len} entries)")))?
            }
            Value::Object(map) => map
                .entry(part.to_string())
                .or_insert_with(|| if last { Value::Null } else { Value::Object(Default::default()) }),
            Value::Null => {
                *node = Value::Object(Default::default());
                node.as_object_mut().expect("just set").entry(part.to_string()).or_insert(Value::Null)
            }
            _ => return Err(ConfigError::new(path, format!("`{part}` is inside a plain value"))),
        };
    }
    *node = value;
    Ok(())
}

/// Types a JSON tree, naming the offending field on failure.
pub fn from_tree(tree: Value) -> Result<ScenarioConfig, ConfigError> {
    serde_path_to_error::deserialize(tree).map_err(|e| {
        let path = e.path().to_string();
        ConfigError::new(if path == "." { "<root>".into() } else { path }, e.into_inner().to_string())
    })
}

/// Loads `path` (or defaults) and applies overrides in order.
pub fn load(path: Option<&Path>, sets: &[String]) -> Result<ScenarioConfig, ConfigError> {
    let mut tree = match path {
        Some(p) => load_tree(p)?,
        None => Value::Object(Default::default()),
    };
    for s in sets {
        apply_set(&mut tree, s)?;
    }
    from_tree(tree)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn layout_covers_every_node() {
        let groups = GroupLayout { size: 4, overlap: 1 }.generate(10).unwrap();
        assert_eq!(groups.len(), 4);
        for n in 0..10 {
            assert!(groups.iter().any(|g| g.members.contains(&NodeId(n))));
        }
        assert_eq!(groups[1].members[0], NodeId(3));
        assert_eq!(GroupLayout { size: 12, overlap: 1 }.generate(10).unwrap().len(), 1);
    }

    #[test]
    fn set_creates_and_replaces() {
        let mut tree = serde_json::json!({"node": {"tx_period": 10}, "adversaries": [{"type": "passive"}]});
        apply_set(&mut tree, "node.tx_period=5").unwrap();
        apply_set(&mut tree, "group_layout.size=3").unwrap();
        apply_set(&mut tree, "adversaries.0.name=eve").unwrap();
        assert_eq!(tree["node"]["tx_period"], 5);
        assert_eq!(tree["group_layout"]["size"], 3);
        assert_eq!(tree["adversaries"][0]["name"], "eve");
        assert!(apply_set(&mut tree, "adversaries.4.name=x").is_err());
        assert!(apply_set(&mut tree, "novalue").is_err());
    }

    #[test]
    fn unknown_field_is_named() {
        let tree = serde_json::json!({"node": {"tx_perod": 5}});
        let err = from_tree(tree).unwrap_err();
        assert!(err.field.starts_with("node"), "{err}");
        assert!(err.reason.contains("tx_perod"));
    }

    #[test]
    fn defaults_resolve() {
        let r = ScenarioConfig::default().resolve().unwrap();
        assert_eq!(r.scenario.node_count, 10);
        assert_eq!(r.group_names, ["all"]);
    }

    #[test]
    fn keys_by_name() {
        let names = vec!["a".to_string(), "b".to_string()];
        assert_eq!(resolve_keys(&["b".into()], &names).unwrap(), [GroupId(1)]);
        assert_eq!(resolve_keys(&["all".into()], &names).unwrap().len(), 2);
        assert!(resolve_keys(&["c".into()], &names).is_err());
    }
}
