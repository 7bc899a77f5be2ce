//! Report records written by `run` and `attack`.

use adtn_core::adversary::{
    anonymity_report, distinguishability_test, equality_linker, social_graph_recovery,
    AdversaryView, DistinguishError, Membership, ObservationLog, Performance, Scope,
};
use adtn_core::netsim::{Arena, EmissionEvent, RunReport, SubmissionRecord};
use adtn_core::node::NodeStats;
use adtn_core::{FrameCodec, TrustGroup};
use serde::{Deserialize, Serialize};

use crate::config::ObserverSpec;

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct MetricsSummary {
    pub messages: usize,
    pub delivery_ratio: Option<f64>,
    pub undelivered_messages: usize,
    pub mean_latency_ticks: Option<f64>,
    pub mean_latency_ms: Option<f64>,
    pub mean_diffusion_ticks_p50: Option<f64>,
    pub mean_diffusion_ticks_p90: Option<f64>,
    pub mean_diffusion_ticks_p100: Option<f64>,
    pub emissions_total: u64,
    pub real_emissions: u64,
    pub cover_emissions: u64,
    pub garbage_emissions: u64,
    pub cover_fraction: f64,
    pub deliveries_total: u64,
    pub mean_decrypt_attempts: f64,
    pub decrypt_attempts: Vec<u64>,
}

fn mean(values: impl Iterator<Item = f64>) -> Option<f64> {
    let (sum, n) = values.fold((0.0, 0usize), |(s, n), v| (s + v, n + 1));
    (n > 0).then(|| sum / n as f64)
}

impl MetricsSummary {
    pub fn new(p: &Performance, tick_ms: u64) -> Self {
        let diffusion = |q: f64| mean(p.messages.iter().filter_map(|m| m.diffusion_time(q)).map(|t| t as f64));
        Self {
            messages: p.messages.len(),
            delivery_ratio: p.delivery_ratio,
            undelivered_messages: p.messages.iter().filter(|m| m.expected > 0 && m.delivered == 0).count(),
            mean_latency_ticks: p.mean_latency,
            mean_latency_ms: p.mean_latency.map(|l| l * tick_ms as f64),
            mean_diffusion_ticks_p50: diffusion(0.5),
            mean_diffusion_ticks_p90: diffusion(0.9),
            mean_diffusion_ticks_p100: diffusion(1.0),
            emissions_total: p.emissions_total,
            real_emissions: p.real_emissions,
            cover_emissions: p.cover_emissions,
            garbage_emissions: p.garbage_emissions,
            cover_fraction: p.cover_fraction,
            deliveries_total: p.deliveries_total,
            mean_decrypt_attempts: mean(p.decrypt_attempts.iter().map(|&a| a as f64)).unwrap_or(0.0),
            decrypt_attempts: p.decrypt_attempts.clone(),
        }
    }
}

/// One row of `metrics.csv`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct MessageRow {
    pub message: String,
    pub origin: u32,
    pub submitted: u64,
    pub to: Option<u32>,
    pub expected: usize,
    pub delivered: usize,
    pub mean_latency: Option<f64>,
    pub target_latency: Option<u64>,
    pub diffusion_p50: Option<u64>,
    pub diffusion_p90: Option<u64>,
    pub diffusion_p100: Option<u64>,
}

pub fn message_rows(p: &Performance) -> Vec<MessageRow> {
    p.messages
        .iter()
        .map(|m| MessageRow {
            message: m.id.to_string(),
            origin: m.origin.0,
            submitted: m.submitted,
            to: m.to.map(|n| n.0),
            expected: m.expected,
            delivered: m.delivered,
            mean_latency: mean(m.latencies.iter().map(|&(_, l)| l as f64)),
            target_latency: m.target_latency,
            diffusion_p50: m.diffusion_time(0.5),
            diffusion_p90: m.diffusion_time(0.9),
            diffusion_p100: m.diffusion_time(1.0),
        })
        .collect()
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct NodeStatsRow {
    pub node: u32,
    pub frames_received: u64,
    pub decrypt_attempts: u64,
    pub unreadable: u64,
    pub skipped: u64,
    pub duplicates: u64,
    pub stale_receptions: u64,
    pub deliveries: u64,
    pub emissions: u64,
    pub cover_emissions: u64,
    pub stale_drops: u64,
    pub evictions: u64,
}

pub fn node_rows(stats: &[NodeStats]) -> Vec<NodeStatsRow> {
    stats
        .iter()
        .enumerate()
        .map(|(i, s)| NodeStatsRow {
            node: i as u32,
            frames_received: s.frames_received,
            decrypt_attempts: s.decrypt_attempts,
            unreadable: s.unreadable,
            skipped: s.skipped,
            duplicates: s.duplicates,
            stale_receptions: s.stale_receptions,
            deliveries: s.deliveries,
            emissions: s.emissions,
            cover_emissions: s.cover_emissions,
            stale_drops: s.stale_drops,
            evictions: s.evictions,
        })
        .collect()
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum ScopeSummary {
    Global,
    Disk { center: [f64; 2], radius: f64 },
    Mobile { radius: f64, waypoints: usize },
}

impl From<&Scope> for ScopeSummary {
    fn from(s: &Scope) -> Self {
        match s {
            Scope::Global => ScopeSummary::Global,
            Scope::Disk { center, radius } => ScopeSummary::Disk { center: [center.x, center.y], radius: *radius },
            Scope::Mobile { radius, trajectory } => ScopeSummary::Mobile { radius: *radius, waypoints: trajectory.len() },
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct LinkerSummary {
    pub linked_pairs: usize,
    pub true_links: Option<usize>,
    pub precision: Option<f64>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "status", rename_all = "snake_case")]
pub enum DistinguishSummary {
    Tested {
        frames: usize,
        cover: usize,
        real: usize,
        chi2_p_value: f64,
        pooled_p_value: f64,
        /// Balanced accuracy; absent when only one class was observed.
        classifier_accuracy: Option<f64>,
    },
    Underpowered { reason: String },
    Unavailable { reason: String },
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct AnonymityRow {
    pub message: String,
    pub origin: u32,
    pub candidates: Vec<u32>,
    pub sender_anonymity: f64,
    pub recipient_candidates: usize,
    pub recipient_anonymity: f64,
    pub observed_emissions: usize,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SocialSummary {
    pub edges: Vec<[u32; 2]>,
    pub truth_edges: usize,
    pub precision: Option<f64>,
    pub recall: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct AdversaryReport {
    pub name: String,
    /// `external` or `internal`.
    pub kind: String,
    pub scope: ScopeSummary,
    pub keys: Vec<String>,
    pub observed: usize,
    pub linker: LinkerSummary,
    pub distinguishability: DistinguishSummary,
    pub mean_sender_anonymity: Option<f64>,
    pub recipient_anonymity: f64,
    pub identified_originators: usize,
    pub sound: bool,
    pub social: SocialSummary,
    pub messages: Vec<AnonymityRow>,
}

/// What an attack replay needs: the ground-truth emission log and the
/// scenario facts used for scoring.
pub struct Evidence<'a> {
    pub events: &'a [EmissionEvent],
    pub submissions: &'a [SubmissionRecord],
    pub groups: &'a [TrustGroup],
    pub group_names: &'a [String],
    pub node_count: u32,
    pub arena: Arena,
    pub codec: FrameCodec,
    pub seed: u64,
}

impl<'a> Evidence<'a> {
    pub fn from_run(report: &'a RunReport, group_names: &'a [String], arena: Arena, seed: u64) -> Self {
        Self {
            events: &report.events,
            submissions: &report.submissions,
            groups: &report.groups,
            group_names,
            node_count: report.node_count,
            arena,
            codec: FrameCodec::new(report.frame_size).expect("validated frame size"),
            seed,
        }
    }
}

pub fn evaluate(evidence: &Evidence<'_>, spec: &ObserverSpec) -> AdversaryReport {
    let (log, truth) = ObservationLog::capture(evidence.events, spec.scope.clone(), &evidence.arena);
    let view = AdversaryView {
        keys: spec
            .keys
            .iter()
            .map(|g| evidence.groups[g.index()].key.clone())
            .collect(),
        log,
    };
    let has_frames = view.log.entries.iter().all(|o| o.frame.is_some());
    let linker = equality_linker(&view.log, Some(&truth));
    let distinguishability = if !has_frames {
        DistinguishSummary::Unavailable { reason: "trace carries no frame bytes".into() }
    } else {
        match distinguishability_test(&view.log, &truth, evidence.seed) {
            Ok(d) => DistinguishSummary::Tested {
                frames: d.frames,
                cover: d.cover,
                real: d.real,
                chi2_p_value: d.chi2_p_value,
                pooled_p_value: d.pooled_p_value,
                classifier_accuracy: d.classifier.accuracy(),
            },
            Err(e @ DistinguishError::Underpowered { .. }) => DistinguishSummary::Underpowered { reason: e.to_string() },
            Err(e) => DistinguishSummary::Unavailable { reason: e.to_string() },
        }
    };

    let membership = Membership::new(evidence.node_count, evidence.groups);
    let anonymity = anonymity_report(&view, &evidence.codec, &membership, evidence.submissions);
    let decrypted = view.decrypt_all(&evidence.codec);
    let social = social_graph_recovery(&view, &decrypted, &membership);

    AdversaryReport {
        name: spec.name.clone(),
        kind: if view.is_internal() { "internal" } else { "external" }.into(),
        scope: ScopeSummary::from(&spec.scope),
        keys: spec.keys.iter().map(|g| evidence.group_names[g.index()].clone()).collect(),
        observed: view.log.len(),
        linker: LinkerSummary {
            linked_pairs: linker.pairs.len(),
            true_links: linker.true_links,
            precision: linker.precision,
        },
        distinguishability,
        mean_sender_anonymity: anonymity.mean_sender_anonymity,
        recipient_anonymity: anonymity.recipient_anonymity,
        identified_originators: anonymity.identified,
        sound: anonymity.sound,
        social: SocialSummary {
            edges: social.edges.iter().map(|(a, b)| [a.0, b.0]).collect(),
            truth_edges: social.truth.len(),
            precision: social.precision,
            recall: social.recall,
        },
        messages: anonymity
            .entries
            .iter()
            .map(|e| AnonymityRow {
                message: e.message.to_string(),
                origin: e.origin.0,
                candidates: e.candidates.iter().map(|n| n.0).collect(),
                sender_anonymity: e.sender_anonymity,
                recipient_candidates: e.recipient_candidates,
                recipient_anonymity: e.recipient_anonymity,
                observed_emissions: e.observed_emissions,
            })
            .collect(),
    }
}
