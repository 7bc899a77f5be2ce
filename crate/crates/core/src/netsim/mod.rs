//! Deterministic discrete-event world.
//!
//! Time advances in ticks. Each tick: nodes move, scheduled application
//! messages are submitted, every node whose slot comes up emits one frame
//! (garbage emitters add theirs), each frame reaches every node within radio
//! range that is not inside an active jam region, and receptions are
//! processed in `(emitter, receiver)` order. The MAC is ideal: simultaneous
//! emissions never collide.

mod geometry;
mod mobility;
mod oracle;
mod scenario;

use alloc::vec::Vec;

use rand::Rng;
use rand_chacha::ChaCha20Rng;

pub use geometry::{Arena, Vec2};
pub use mobility::{trajectory_position, Mobility, Placement, Waypoint};
pub use oracle::{contact_oracle, OracleInput, OracleOutcome, OracleVerdict};
pub use scenario::{
    GarbageEmitter, GroupSpec, Injection, JamRegion, Payload, PolicyOverride, Scenario, ScenarioError,
};

use crate::keyring::{build_keyrings, TrustGroup};
use crate::node::{Emission, Node, NodeStats, Reception};
use crate::rng::{stream, Stream};
use crate::wire::{Frame, FrameCodec, MessageId};
use crate::{GroupId, LinkId, NodeId, Tick};
use mobility::MobilityModel;

/// Ground truth of what an emitted frame carried.
#[derive(Copy, Clone, Debug, PartialEq, Eq)]
pub enum EmissionKind {
    Cover,
    Real { id: MessageId, group: GroupId },
    /// Random frame from an adversarial emitter.
    Garbage,
}

impl EmissionKind {
    pub fn is_real(&self) -> bool {
        matches!(self, EmissionKind::Real { .. })
    }
}

#[derive(Clone, Debug)]
pub struct EmissionEvent {
    pub tick: Tick,
    pub emitter: LinkId,
    pub position: Vec2,
    /// Present unless the scenario disabled frame retention.
    pub frame: Option<Frame>,
    pub receivers: Vec<NodeId>,
    pub kind: EmissionKind,
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct SubmissionRecord {
    pub tick: Tick,
    pub node: NodeId,
    pub id: MessageId,
    pub to: Option<NodeId>,
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct DeliveryRecord {
    pub tick: Tick,
    pub node: NodeId,
    pub id: MessageId,
    pub group: GroupId,
}

/// Everything a run produced: the full emission log, submissions,
/// deliveries and per-node counters.
#[derive(Clone, Debug)]
pub struct RunReport {
    pub node_count: u32,
    pub ticks: Tick,
    pub frame_size: usize,
    pub periods: Vec<Tick>,
    pub phases: Vec<Tick>,
    pub groups: Vec<TrustGroup>,
    pub events: Vec<EmissionEvent>,
    pub submissions: Vec<SubmissionRecord>,
    pub deliveries: Vec<DeliveryRecord>,
    pub node_stats: Vec<NodeStats>,
    pub receptions: u64,
    /// Earliest stale drop or pool eviction at any node.
    pub first_deviation: Option<Tick>,
}

impl RunReport {
    /// Emissions by protocol nodes (garbage excluded).
    pub fn node_emissions(&self) -> impl Iterator<Item = &EmissionEvent> {
        self.events
            .iter()
            .filter(|e| e.kind != EmissionKind::Garbage)
    }
}

/// Draws each node's slot phase uniformly from `[0, period)`.
pub fn draw_phases(seed: u64, periods: &[Tick]) -> Vec<Tick> {
    let mut rng = stream(seed, Stream::Phases);
    periods.iter().map(|&p| rng.random_range(0..p)).collect()
}

/// Generates the scenario's trust groups and keys.
pub fn build_groups(scenario: &Scenario) -> Vec<TrustGroup> {
    let mut rng = stream(scenario.seed, Stream::Keys);
    scenario
        .groups
        .iter()
        .enumerate()
        .map(|(i, g)| TrustGroup::generate(GroupId(i as u32), g.members.iter().copied(), &mut rng))
        .collect()
}

/// Node positions at every tick `0..ticks`, as the world will see them.
pub fn mobility_trace(scenario: &Scenario) -> Vec<Vec<Vec2>> {
    let mut model = MobilityModel::new(
        scenario.arena,
        &scenario.placement,
        &scenario.mobility,
        scenario.node_count as usize,
        stream(scenario.seed, Stream::Mobility),
    );
    let mut trace = Vec::with_capacity(scenario.ticks as usize);
    for t in 0..scenario.ticks {
        if t > 0 {
            model.advance();
        }
        trace.push(model.positions().to_vec());
    }
    trace
}

struct GarbageState {
    spec: GarbageEmitter,
    link: LinkId,
    credit: f64,
    rng: ChaCha20Rng,
}

struct PendingInjection {
    tick: Tick,
    node: NodeId,
    payload: Vec<u8>,
    to: Option<NodeId>,
}

#[derive(Copy, Clone, Debug, Default, PartialEq, Eq)]
pub struct StepOutcome {
    pub emissions: usize,
    pub receptions: usize,
    pub deliveries: usize,
}

pub struct World {
    scenario: Scenario,
    codec: FrameCodec,
    tick: Tick,
    mobility: MobilityModel,
    nodes: Vec<Node>,
    node_rngs: Vec<ChaCha20Rng>,
    garbage: Vec<GarbageState>,
    injections: Vec<PendingInjection>,
    next_injection: usize,
    report: RunReport,
}

impl World {
    pub fn new(scenario: &Scenario) -> Result<Self, ScenarioError> {
        scenario.validate()?;
        let codec = FrameCodec::new(scenario.frame_size).expect("validated");
        let groups = build_groups(scenario);
        let rings = build_keyrings(&groups, scenario.node_count).map_err(ScenarioError::from_keyring)?;

        let policies: Vec<_> = (0..scenario.node_count)
            .map(|n| scenario.policies_for(NodeId(n)).clone())
            .collect();
        let periods: Vec<Tick> = policies.iter().map(|p| p.tx_period).collect();
        let phases = draw_phases(scenario.seed, &periods);
        let nodes = rings
            .into_values()
            .zip(policies)
            .zip(&phases)
            .map(|((ring, policy), &phase)| Node::new(ring, policy, codec, phase).expect("validated"))
            .collect();
        let node_rngs = (0..scenario.node_count)
            .map(|n| stream(scenario.seed, Stream::Node(n)))
            .collect();
        let garbage = scenario
            .garbage
            .iter()
            .enumerate()
            .map(|(i, spec)| GarbageState {
                spec: spec.clone(),
                link: LinkId(scenario.node_count + i as u32),
                credit: 0.0,
                rng: stream(scenario.seed, Stream::Garbage(i as u32)),
            })
            .collect();

        let mut traffic_rng = stream(scenario.seed, Stream::Traffic);
        let mut injections: Vec<PendingInjection> = scenario
            .traffic
            .iter()
            .map(|inj| PendingInjection {
                tick: inj.tick,
                node: inj.node,
                payload: inj.payload.resolve(&mut traffic_rng),
                to: inj.to,
            })
            .collect();
        injections.sort_by_key(|i| i.tick);

        let mobility = MobilityModel::new(
            scenario.arena,
            &scenario.placement,
            &scenario.mobility,
            scenario.node_count as usize,
            stream(scenario.seed, Stream::Mobility),
        );

        Ok(Self {
            codec,
            tick: 0,
            mobility,
            nodes,
            node_rngs,
            garbage,
            injections,
            next_injection: 0,
            report: RunReport {
                node_count: scenario.node_count,
                ticks: scenario.ticks,
                frame_size: scenario.frame_size,
                periods,
                phases,
                groups,
                events: Vec::new(),
                submissions: Vec::new(),
                deliveries: Vec::new(),
                node_stats: Vec::new(),
                receptions: 0,
                first_deviation: None,
            },
            scenario: scenario.clone(),
        })
    }

    /// The next tick [`World::step`] will simulate.
    pub fn tick(&self) -> Tick {
        self.tick
    }

    pub fn nodes(&self) -> &[Node] {
        &self.nodes
    }

    pub fn positions(&self) -> &[Vec2] {
        self.mobility.positions()
    }

    pub fn events(&self) -> &[EmissionEvent] {
        &self.report.events
    }

    pub fn deliveries(&self) -> &[DeliveryRecord] {
        &self.report.deliveries
    }

    fn jammed(&self, position: Vec2, now: Tick) -> bool {
        self.scenario
            .jammers
            .iter()
            .any(|j| j.active_at(now) && self.scenario.arena.within(position, j.center, j.radius))
    }

    fn receivers_of(&self, emitter: Option<NodeId>, at: Vec2, now: Tick) -> Vec<NodeId> {
        let positions = self.mobility.positions();
        (0..self.scenario.node_count)
            .map(NodeId)
            .filter(|&n| Some(n) != emitter)
            .filter(|&n| {
                let p = positions[n.index()];
                self.scenario.arena.within(at, p, self.scenario.radio_range) && !self.jammed(p, now)
            })
            .collect()
    }

    /// Simulates one tick.
    pub fn step(&mut self) -> StepOutcome {
        let now = self.tick;
        if now > 0 {
            self.mobility.advance();
        }

        while let Some(inj) = self.injections.get(self.next_injection).filter(|i| i.tick == now) {
            let node = &mut self.nodes[inj.node.index()];
            let submitted = node.submit(&inj.payload, now).expect("payload sizes validated");
            self.report.submissions.push(SubmissionRecord {
                tick: now,
                node: inj.node,
                id: submitted.id,
                to: inj.to,
            });
            self.next_injection += 1;
        }

        let first_event = self.report.events.len();
        for index in 0..self.nodes.len() {
            if !self.nodes[index].is_slot(now) {
                continue;
            }
            let tx = self.nodes[index].on_transmit_slot(now, &mut self.node_rngs[index]);
            let emitter = NodeId(index as u32);
            let position = self.mobility.positions()[index];
            let kind = match tx.emission {
                Emission::Cover => EmissionKind::Cover,
                Emission::Real { id, group } => EmissionKind::Real { id, group },
            };
            let receivers = self.receivers_of(Some(emitter), position, now);
            self.report.events.push(EmissionEvent {
                tick: now,
                emitter: emitter.link(),
                position,
                frame: Some(tx.frame),
                receivers,
                kind,
            });
        }
        for g in 0..self.garbage.len() {
            if !self.garbage[g].spec.active_at(now) {
                continue;
            }
            let state = &mut self.garbage[g];
            state.credit += state.spec.rate;
            let count = libm::floor(state.credit);
            state.credit -= count;
            let position = state.spec.position;
            let link = state.link;
            for _ in 0..count as u64 {
                let frame = self.codec.cover(&mut self.garbage[g].rng);
                let receivers = self.receivers_of(None, position, now);
                self.report.events.push(EmissionEvent {
                    tick: now,
                    emitter: link,
                    position,
                    frame: Some(frame),
                    receivers,
                    kind: EmissionKind::Garbage,
                });
            }
        }

        let mut outcome = StepOutcome {
            emissions: self.report.events.len() - first_event,
            ..Default::default()
        };
        for event in &self.report.events[first_event..] {
            let frame = event.frame.as_ref().expect("frames present until the step ends");
            for &receiver in &event.receivers {
                outcome.receptions += 1;
                let got = self.nodes[receiver.index()]
                    .on_frame_received(frame.as_bytes(), event.emitter, now)
                    .expect("frames have the configured size");
                if got.reception == Reception::Delivered {
                    outcome.deliveries += 1;
                    self.report.deliveries.push(DeliveryRecord {
                        tick: now,
                        node: receiver,
                        id: got.message.expect("delivered frames carry a message"),
                        group: got.group.expect("delivered frames carry a group"),
                    });
                }
            }
        }
        if !self.scenario.keep_frames {
            for event in &mut self.report.events[first_event..] {
                event.frame = None;
            }
        }
        self.report.receptions += outcome.receptions as u64;

        for node in &mut self.nodes {
            node.forget_old_seen(now);
        }
        self.tick += 1;
        outcome
    }

    /// Runs the remaining ticks and returns the report.
    pub fn run(mut self) -> RunReport {
        while self.tick < self.scenario.ticks {
            self.step();
        }
        self.into_report()
    }

    pub fn into_report(mut self) -> RunReport {
        self.report.node_stats = self.nodes.iter().map(|n| n.stats().clone()).collect();
        self.report.first_deviation = self.nodes.iter().filter_map(Node::first_deviation).min();
        self.report
    }
}

/// Validates `scenario` and runs it to completion.
pub fn run_scenario(scenario: &Scenario) -> Result<RunReport, ScenarioError> {
    Ok(World::new(scenario)?.run())
}
