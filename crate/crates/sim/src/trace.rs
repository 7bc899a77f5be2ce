//! Line-delimited trace files.
//!
//! `events.jsonl` is the ground-truth emission log; `observations.jsonl`
//! is what a global eavesdropper records (no ground truth);
//! `ground_truth.json` lists submissions and deliveries.

use std::fs::File;
use std::io::{BufRead, BufReader, BufWriter, Write};
use std::path::Path;

use adtn_core::netsim::{DeliveryRecord, EmissionEvent, EmissionKind, SubmissionRecord, Vec2};
use adtn_core::{FrameCodec, GroupId, LinkId, MessageId, NodeId};
use serde::{Deserialize, Serialize};

use crate::error::SimError;

pub const EVENTS: &str = "events.jsonl";
pub const OBSERVATIONS: &str = "observations.jsonl";
pub const GROUND_TRUTH: &str = "ground_truth.json";

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct EventRecord {
    pub tick: u64,
    pub emitter: u32,
    pub x: f64,
    pub y: f64,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub frame_hex: Option<String>,
    pub receivers: Vec<u32>,
    /// `cover`, `real` or `garbage`.
    pub kind: String,
    pub msg: Option<String>,
    pub group: Option<u32>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ObservationRecord {
    pub tick: u64,
    pub emitter: u32,
    pub x: f64,
    pub y: f64,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub frame_hex: Option<String>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SubmissionLine {
    pub tick: u64,
    pub node: u32,
    pub id: String,
    pub to: Option<u32>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct DeliveryLine {
    pub tick: u64,
    pub node: u32,
    pub id: String,
    pub group: u32,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct GroundTruth {
    pub run_id: String,
    pub submissions: Vec<SubmissionLine>,
    pub deliveries: Vec<DeliveryLine>,
}

impl GroundTruth {
    pub fn new(run_id: &str, submissions: &[SubmissionRecord], deliveries: &[DeliveryRecord]) -> Self {
        Self {
            run_id: run_id.to_string(),
            submissions: submissions
                .iter()
                .map(|s| SubmissionLine { tick: s.tick, node: s.node.0, id: s.id.to_string(), to: s.to.map(|n| n.0) })
                .collect(),
            deliveries: deliveries
                .iter()
                .map(|d| DeliveryLine { tick: d.tick, node: d.node.0, id: d.id.to_string(), group: d.group.0 })
                .collect(),
        }
    }

    pub fn submission_records(&self) -> Result<Vec<SubmissionRecord>, String> {
        self.submissions
            .iter()
            .map(|s| {
                Ok(SubmissionRecord { tick: s.tick, node: NodeId(s.node), id: parse_id(&s.id)?, to: s.to.map(NodeId) })
            })
            .collect()
    }
}

pub fn parse_id(text: &str) -> Result<MessageId, String> {
    let mut id = [0u8; 32];
    hex::decode_to_slice(text, &mut id).map_err(|e| format!("bad message id `{text}`: {e}"))?;
    Ok(MessageId(id))
}

fn event_record(e: &EmissionEvent, with_frames: bool) -> EventRecord {
    let (kind, msg, group) = match e.kind {
        EmissionKind::Cover => ("cover", None, None),
        EmissionKind::Garbage => ("garbage", None, None),
        EmissionKind::Real { id, group } => ("real", Some(id.to_string()), Some(group.0)),
    };
    EventRecord {
        tick: e.tick,
        emitter: e.emitter.0,
        x: e.position.x,
        y: e.position.y,
        frame_hex: if with_frames { e.frame.as_ref().map(|f| hex::encode(f.as_bytes())) } else { None },
        receivers: e.receivers.iter().map(|n| n.0).collect(),
        kind: kind.into(),
        msg,
        group,
    }
}

fn write_lines<T: Serialize>(path: &Path, items: impl Iterator<Item = T>) -> Result<(), SimError> {
    let file = File::create(path).map_err(|e| SimError::io(path, e))?;
    let mut out = BufWriter::new(file);
    for item in items {
        serde_json::to_writer(&mut out, &item).map_err(|e| SimError::io(path, e.into()))?;
        out.write_all(b"\n").map_err(|e| SimError::io(path, e))?;
    }
    out.flush().map_err(|e| SimError::io(path, e))
}

pub fn write_events(dir: &Path, events: &[EmissionEvent], with_frames: bool) -> Result<(), SimError> {
    write_lines(&dir.join(EVENTS), events.iter().map(|e| event_record(e, with_frames)))?;
    write_lines(
        &dir.join(OBSERVATIONS),
        events.iter().map(|e| {
            let r = event_record(e, with_frames);
            ObservationRecord { tick: r.tick, emitter: r.emitter, x: r.x, y: r.y, frame_hex: r.frame_hex }
        }),
    )
}

fn read_lines<T: for<'de> Deserialize<'de>>(path: &Path) -> Result<Vec<T>, SimError> {
    let file = File::open(path).map_err(|e| SimError::io(path, e))?;
    let mut out = Vec::new();
    for (n, line) in BufReader::new(file).lines().enumerate() {
        let line = line.map_err(|e| SimError::io(path, e))?;
        if line.trim().is_empty() {
            continue;
        }
        out.push(serde_json::from_str(&line).map_err(|e| SimError::trace(path, format!("line {}: {e}", n + 1)))?);
    }
    Ok(out)
}

/// Reads `events.jsonl` back into emission events.
pub fn read_events(dir: &Path, codec: &FrameCodec) -> Result<Vec<EmissionEvent>, SimError> {
    let path = dir.join(EVENTS);
    let records: Vec<EventRecord> = read_lines(&path)?;
    records
        .into_iter()
        .enumerate()
        .map(|(n, r)| {
            let bad = |reason: String| SimError::trace(&path, format!("line {}: {reason}", n + 1));
            let frame = r
                .frame_hex
                .map(|h| {
                    let bytes = hex::decode(&h).map_err(|e| bad(e.to_string()))?;
                    codec.frame_from_bytes(bytes).map_err(|e| bad(e.to_string()))
                })
                .transpose()?;
            let kind = match (r.kind.as_str(), r.msg, r.group) {
                ("cover", None, None) => EmissionKind::Cover,
                ("garbage", None, None) => EmissionKind::Garbage,
                ("real", Some(msg), Some(group)) => EmissionKind::Real { id: parse_id(&msg).map_err(bad)?, group: GroupId(group) },
                (kind, ..) => return Err(bad(format!("inconsistent record of kind `{kind}`"))),
            };
            Ok(EmissionEvent {
                tick: r.tick,
                emitter: LinkId(r.emitter),
                position: Vec2::new(r.x, r.y),
                frame,
                receivers: r.receivers.into_iter().map(NodeId).collect(),
                kind,
            })
        })
        .collect()
}

pub fn read_observations(dir: &Path) -> Result<Vec<ObservationRecord>, SimError> {
    read_lines(&dir.join(OBSERVATIONS))
}
