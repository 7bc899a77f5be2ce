use alloc::collections::BTreeMap;
use alloc::vec::Vec;

use libm::ceil;

use crate::netsim::{EmissionKind, RunReport};
use crate::wire::MessageId;
use crate::{NodeId, Tick};

#[derive(Clone, Debug, PartialEq)]
pub struct MessageMetrics {
    pub id: MessageId,
    pub origin: NodeId,
    pub submitted: Tick,
    pub to: Option<NodeId>,
    /// `(node, latency)` for every node other than the origin that
    /// delivered the message, in delivery order.
    pub latencies: Vec<(NodeId, Tick)>,
    /// Deliveries that count towards the ratio: the intended recipient if
    /// there is one, otherwise every other node.
    pub expected: usize,
    pub delivered: usize,
    /// Latency to the intended recipient; `None` if undelivered or untargeted.
    pub target_latency: Option<Tick>,
    /// Ticks at which the message had reached each node count, counting
    /// the origin: `holders[k]` is when `k + 1` nodes held it.
    pub holders: Vec<Tick>,
    node_count: u32,
}

impl MessageMetrics {
    /// First tick at which at least `p·N` nodes, origin included, held the
    /// message; `None` if that never happened.
    pub fn diffusion_tick(&self, p: f64) -> Option<Tick> {
        let need = ceil(p * self.node_count as f64 - 1e-9).max(1.0) as usize;
        self.holders.get(need - 1).copied()
    }

    pub fn diffusion_time(&self, p: f64) -> Option<Tick> {
        self.diffusion_tick(p).map(|t| t - self.submitted)
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct Performance {
    pub messages: Vec<MessageMetrics>,
    /// Delivered over expected deliveries; `None` without traffic.
    pub delivery_ratio: Option<f64>,
    /// Mean over all deliveries; undelivered copies are excluded.
    pub mean_latency: Option<f64>,
    pub emissions_total: u64,
    pub real_emissions: u64,
    pub cover_emissions: u64,
    pub garbage_emissions: u64,
    /// Cover share of node emissions.
    pub cover_fraction: f64,
    pub decrypt_attempts: Vec<u64>,
    pub deliveries_total: u64,
}

/// Metrics of a finished run, from ground truth.
pub fn performance_metrics(report: &RunReport) -> Performance {
    let mut by_id: BTreeMap<MessageId, Vec<(NodeId, Tick)>> = BTreeMap::new();
    for d in &report.deliveries {
        by_id.entry(d.id).or_default().push((d.node, d.tick));
    }
    let others = report.node_count.saturating_sub(1) as usize;

    let messages: Vec<MessageMetrics> = report
        .submissions
        .iter()
        .map(|s| {
            let got: Vec<(NodeId, Tick)> = by_id
                .get(&s.id)
                .into_iter()
                .flatten()
                .filter(|(n, t)| *n != s.node && *t >= s.tick)
                .copied()
                .collect();
            let latencies: Vec<(NodeId, Tick)> = got.iter().map(|&(n, t)| (n, t - s.tick)).collect();
            let target_latency = s
                .to
                .and_then(|to| latencies.iter().find(|(n, _)| *n == to).map(|&(_, l)| l));
            let (expected, delivered) = match s.to {
                Some(to) if to == s.node => (0, 0),
                Some(_) => (1, target_latency.is_some() as usize),
                None => (others, latencies.len()),
            };
            let mut holders: Vec<Tick> = core::iter::once(s.tick).chain(got.iter().map(|&(_, t)| t)).collect();
            holders.sort_unstable();
            MessageMetrics {
                id: s.id,
                origin: s.node,
                submitted: s.tick,
                to: s.to,
                latencies,
                expected,
                delivered,
                target_latency,
                holders,
                node_count: report.node_count,
            }
        })
        .collect();

    let expected: usize = messages.iter().map(|m| m.expected).sum();
    let delivered: usize = messages.iter().map(|m| m.delivered).sum();
    let all_latencies: Vec<Tick> = messages.iter().flat_map(|m| m.latencies.iter().map(|&(_, l)| l)).collect();

    let mut real = 0;
    let mut cover = 0;
    let mut garbage = 0;
    for e in &report.events {
        match e.kind {
            EmissionKind::Cover => cover += 1,
            EmissionKind::Real { .. } => real += 1,
            EmissionKind::Garbage => garbage += 1,
        }
    }
    let node_emissions = real + cover;
    Performance {
        delivery_ratio: (expected > 0).then(|| delivered as f64 / expected as f64),
        mean_latency: (!all_latencies.is_empty())
            .then(|| all_latencies.iter().sum::<Tick>() as f64 / all_latencies.len() as f64),
        emissions_total: real + cover + garbage,
        real_emissions: real,
        cover_emissions: cover,
        garbage_emissions: garbage,
        cover_fraction: if node_emissions == 0 { 1.0 } else { cover as f64 / node_emissions as f64 },
        decrypt_attempts: report.node_stats.iter().map(|s| s.decrypt_attempts).collect(),
        deliveries_total: report.deliveries.len() as u64,
        messages,
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::netsim::{run_scenario, Injection, Payload, Placement, Scenario};

    #[test]
    fn idle_network_is_all_cover() {
        let s = Scenario::single_group(5, 50);
        let p = performance_metrics(&run_scenario(&s).unwrap());
        assert_eq!(p.cover_fraction, 1.0);
        assert_eq!(p.delivery_ratio, None);
        assert_eq!(p.real_emissions, 0);
        assert_eq!(p.emissions_total, 25);
    }

    #[test]
    fn connected_line_delivers_everything() {
        let mut s = Scenario::single_group(10, 400);
        s.placement = Placement::Line { spacing: 50.0 };
        s.traffic.push(Injection { tick: 0, node: NodeId(0), payload: Payload::Literal(b"hi".to_vec()), to: Some(NodeId(9)) });
        let p = performance_metrics(&run_scenario(&s).unwrap());
        assert_eq!(p.delivery_ratio, Some(1.0));
        let m = &p.messages[0];
        assert_eq!(m.latencies.len(), 9);
        assert!(m.target_latency.is_some());
        assert_eq!(m.diffusion_tick(1.0), m.holders.last().copied());
        assert_eq!(m.diffusion_tick(0.1), Some(0));
        assert!(p.cover_fraction < 1.0);
    }
}
