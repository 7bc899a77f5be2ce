//! Brute-force earliest-arrival oracle over the time-expanded contact graph.
//!
//! The oracle knows nothing about frames, keys, pools or seen-logs. It
//! replays node positions tick by tick and lets a carrier hand the message
//! to every in-range, unjammed member of the group it transmits for at each
//! of its slots. A carrier cycles through its groups in declaration order,
//! one group per slot, starting at the first slot after it obtained the
//! message (the originator may use the slot of its submission tick).
//!
//! This matches the protocol exactly as long as only one message is in
//! flight, source caching is off, and no node drops the message as stale or
//! evicts it before the last oracle arrival.

use alloc::string::String;
use alloc::vec;
use alloc::vec::Vec;

use super::geometry::{Arena, Vec2};
use super::scenario::{JamRegion, Scenario, ScenarioError};
use super::{draw_phases, mobility_trace, run_scenario};
use crate::node::SourceCachePolicy;
use crate::{GroupId, NodeId, Tick};

#[derive(Clone, Debug)]
pub struct OracleInput {
    pub arena: Arena,
    pub radio_range: f64,
    /// Positions indexed by `[tick][node]`; its length is the horizon.
    pub trace: Vec<Vec<Vec2>>,
    pub periods: Vec<Tick>,
    pub phases: Vec<Tick>,
    /// Each node's groups in declaration order.
    pub memberships: Vec<Vec<GroupId>>,
    pub jammers: Vec<JamRegion>,
    pub origin: NodeId,
    pub start: Tick,
}

impl OracleInput {
    /// Builds the oracle input for the `injection`-th traffic entry.
    pub fn from_scenario(scenario: &Scenario, injection: usize) -> Result<Self, ScenarioError> {
        scenario.validate()?;
        let inj = scenario
            .traffic
            .get(injection)
            .ok_or_else(|| ScenarioError::new("traffic", "no such injection"))?;
        let periods: Vec<Tick> = (0..scenario.node_count)
            .map(|n| scenario.policies_for(NodeId(n)).tx_period)
            .collect();
        let memberships = (0..scenario.node_count)
            .map(|n| {
                scenario
                    .groups
                    .iter()
                    .enumerate()
                    .filter(|(_, g)| g.members.contains(&NodeId(n)))
                    .map(|(i, _)| GroupId(i as u32))
                    .collect()
            })
            .collect();
        Ok(Self {
            arena: scenario.arena,
            radio_range: scenario.radio_range,
            trace: mobility_trace(scenario),
            phases: draw_phases(scenario.seed, &periods),
            periods,
            memberships,
            jammers: scenario.jammers.clone(),
            origin: inj.node,
            start: inj.tick,
        })
    }
}

/// Earliest tick at which each node can hold the message; `None` if never
/// within the horizon. The originator holds it from the start tick.
pub fn contact_oracle(input: &OracleInput) -> Vec<Option<Tick>> {
    let n = input.memberships.len();
    let mut has: Vec<Option<Tick>> = vec![None; n];
    let mut sent = vec![0usize; n];
    if input.origin.index() >= n {
        return has;
    }
    has[input.origin.index()] = Some(input.start);

    for (t, positions) in input.trace.iter().enumerate().skip(input.start as usize) {
        let t = t as Tick;
        let mut arrivals = Vec::new();
        for carrier in 0..n {
            let Some(got) = has[carrier] else { continue };
            let may_send = if carrier == input.origin.index() { got <= t } else { got < t };
            if !may_send || t % input.periods[carrier] != input.phases[carrier] {
                continue;
            }
            let groups = &input.memberships[carrier];
            let group = groups[sent[carrier] % groups.len()];
            sent[carrier] += 1;
            for receiver in 0..n {
                if receiver == carrier || has[receiver].is_some() {
                    continue;
                }
                let p = positions[receiver];
                let in_range = input.arena.within(positions[carrier], p, input.radio_range);
                let jammed = input
                    .jammers
                    .iter()
                    .any(|j| j.active_at(t) && input.arena.within(p, j.center, j.radius));
                if in_range && !jammed && input.memberships[receiver].contains(&group) {
                    arrivals.push(receiver);
                }
            }
        }
        for r in arrivals {
            has[r].get_or_insert(t);
        }
    }
    has
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub enum OracleVerdict {
    Match,
    /// Nodes whose protocol arrival differs: `(node, oracle, protocol)`.
    Mismatch(Vec<(NodeId, Option<Tick>, Option<Tick>)>),
    /// The scenario breaks an assumption of the oracle; no comparison made.
    Invalid(String),
}

#[derive(Clone, Debug)]
pub struct OracleOutcome {
    pub oracle: Vec<Option<Tick>>,
    pub protocol: Vec<Option<Tick>>,
    pub first_deviation: Option<Tick>,
    pub verdict: OracleVerdict,
}

impl OracleOutcome {
    /// Runs the protocol and the oracle on a single-injection scenario and
    /// compares per-node arrival ticks.
    pub fn check(scenario: &Scenario) -> Result<Self, ScenarioError> {
        scenario.validate()?;
        let report = run_scenario(scenario)?;
        let n = scenario.node_count as usize;
        let mut protocol = vec![None; n];

        if scenario.traffic.len() != 1 {
            return Ok(Self {
                oracle: vec![None; n],
                protocol,
                first_deviation: report.first_deviation,
                verdict: OracleVerdict::Invalid(alloc::format!(
                    "oracle needs exactly one injection, scenario has {}",
                    scenario.traffic.len()
                )),
            });
        }
        let input = OracleInput::from_scenario(scenario, 0)?;
        let oracle = contact_oracle(&input);

        let submission = &report.submissions[0];
        protocol[submission.node.index()] = Some(submission.tick);
        for d in report.deliveries.iter().filter(|d| d.id == submission.id) {
            protocol[d.node.index()].get_or_insert(d.tick);
        }

        let caching = (0..scenario.node_count)
            .any(|i| scenario.policies_for(NodeId(i)).source_cache != SourceCachePolicy::Off);
        let last_arrival = oracle.iter().flatten().max().copied().unwrap_or(0);
        let verdict = if caching {
            OracleVerdict::Invalid("source caching can skip readable frames".into())
        } else if let Some(d) = report.first_deviation.filter(|&d| d <= last_arrival) {
            OracleVerdict::Invalid(alloc::format!(
                "a node dropped or evicted the message at tick {d}, before the last oracle arrival at {last_arrival}"
            ))
        } else {
            let diff: Vec<_> = oracle
                .iter()
                .zip(&protocol)
                .enumerate()
                .filter(|(_, (o, p))| o != p)
                .map(|(i, (o, p))| (NodeId(i as u32), *o, *p))
                .collect();
            if diff.is_empty() {
                OracleVerdict::Match
            } else {
                OracleVerdict::Mismatch(diff)
            }
        };
        Ok(Self {
            oracle,
            protocol,
            first_deviation: report.first_deviation,
            verdict,
        })
    }
}
