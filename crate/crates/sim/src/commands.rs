//! The four subcommands, as library functions.

use std::fs;
use std::path::Path;

use adtn_core::netsim::{build_groups, run_scenario, OracleOutcome, OracleVerdict, RunReport};
use adtn_core::adversary::performance_metrics;
use adtn_core::FrameCodec;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use serde_json::Value;
use sha2::{Digest, Sha256};

use crate::config::{self, ObserverSpec, Resolved, ScenarioConfig};
use crate::error::{ConfigError, SimError};
use crate::report::{evaluate, message_rows, node_rows, AdversaryReport, Evidence, MetricsSummary, NodeStatsRow};
use crate::trace::{self, GroundTruth};

pub const SUMMARY: &str = "summary.json";
pub const CONFIG: &str = "config.json";
pub const METRICS_CSV: &str = "metrics.csv";
pub const METRICS_MD: &str = "metrics.md";
pub const NODES_CSV: &str = "nodes.csv";
pub const SWEEP_CSV: &str = "sweep.csv";
pub const SWEEP_JSON: &str = "sweep.json";
pub const ANONYMITY_JSON: &str = "anonymity.json";
pub const ANONYMITY_CSV: &str = "anonymity.csv";

/// Parameters a sweep may vary.
pub const SWEEPABLE: &[&str] = &[
    "group_layout.size",
    "node.tx_period",
    "node.freshness_age",
    "frame_size",
    "world.nodes",
    "world.mobility.speed_max",
];

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct GroupSummary {
    pub name: String,
    pub members: Vec<u32>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Summary {
    pub run_id: String,
    pub tool: String,
    pub config: ScenarioConfig,
    pub groups: Vec<GroupSummary>,
    pub phases: Vec<u64>,
    pub metrics: MetricsSummary,
    pub nodes: Vec<NodeStatsRow>,
    pub adversaries: Vec<AdversaryReport>,
}

/// Short digest of the canonical configuration.
pub fn run_id(config: &ScenarioConfig) -> String {
    let canonical = serde_json::to_vec(config).expect("configs serialize");
    hex::encode(&Sha256::digest(&canonical)[..8])
}

/// Runs a configuration in memory.
pub fn execute(config: &ScenarioConfig) -> Result<(Summary, RunReport, Resolved), SimError> {
    let resolved = config.resolve()?;
    let report = run_scenario(&resolved.scenario).map_err(|e| ConfigError::new(e.field, e.reason))?;
    let perf = performance_metrics(&report);
    let evidence = Evidence::from_run(&report, &resolved.group_names, resolved.scenario.arena, config.seed);
    let adversaries = resolved.observers.iter().map(|o| evaluate(&evidence, o)).collect();
    let summary = Summary {
        run_id: run_id(config),
        tool: format!("adtn-sim {}", env!("CARGO_PKG_VERSION")),
        config: config.clone(),
        groups: report
            .groups
            .iter()
            .zip(&resolved.group_names)
            .map(|(g, name)| GroupSummary { name: name.clone(), members: g.members.iter().map(|n| n.0).collect() })
            .collect(),
        phases: report.phases.clone(),
        metrics: MetricsSummary::new(&perf, config.tick_ms),
        nodes: node_rows(&report.node_stats),
        adversaries,
    };
    Ok((summary, report, resolved))
}

fn write_json<T: Serialize>(path: &Path, value: &T) -> Result<(), SimError> {
    let mut text = serde_json::to_string_pretty(value).expect("reports serialize");
    text.push('\n');
    fs::write(path, text).map_err(|e| SimError::io(path, e))
}

fn read_json<T: for<'de> Deserialize<'de>>(path: &Path) -> Result<T, SimError> {
    let text = fs::read_to_string(path).map_err(|e| SimError::io(path, e))?;
    serde_json::from_str(&text).map_err(|e| SimError::trace(path, e.to_string()))
}

fn write_csv<T: Serialize>(path: &Path, rows: &[T]) -> Result<(), SimError> {
    let mut w = csv::Writer::from_path(path).map_err(|e| SimError::io(path, e.into()))?;
    for r in rows {
        w.serialize(r).map_err(|e| SimError::io(path, e.into()))?;
    }
    w.flush().map_err(|e| SimError::io(path, e))
}

fn fmt_opt(v: Option<f64>) -> String {
    v.map_or_else(|| "n/a".into(), |v| format!("{v:.4}"))
}

fn metrics_markdown(s: &Summary) -> String {
    let m = &s.metrics;
    let mut out = format!("# Run {}\n\n| metric | value |\n|---|---|\n", s.run_id);
    let rows = [
        ("messages", m.messages.to_string()),
        ("delivery ratio", fmt_opt(m.delivery_ratio)),
        ("mean latency (ticks)", fmt_opt(m.mean_latency_ticks)),
        ("mean latency (ms)", fmt_opt(m.mean_latency_ms)),
        ("mean diffusion to 90% (ticks)", fmt_opt(m.mean_diffusion_ticks_p90)),
        ("emissions", m.emissions_total.to_string()),
        ("cover fraction", format!("{:.4}", m.cover_fraction)),
        ("mean decrypt attempts per node", format!("{:.1}", m.mean_decrypt_attempts)),
    ];
    for (k, v) in rows {
        out.push_str(&format!("| {k} | {v} |\n"));
    }
    if !s.adversaries.is_empty() {
        out.push_str("\n| adversary | kind | observed | links | sender anonymity | identified | social recall |\n|---|---|---|---|---|---|---|\n");
        for a in &s.adversaries {
            out.push_str(&format!(
                "| {} | {} | {} | {} | {} | {} | {:.3} |\n",
                a.name,
                a.kind,
                a.observed,
                a.linker.linked_pairs,
                fmt_opt(a.mean_sender_anonymity),
                a.identified_originators,
                a.social.recall
            ));
        }
    }
    out
}

/// Runs a configuration and writes its report files into `out`.
pub fn cmd_run(config: &ScenarioConfig, out: &Path) -> Result<Summary, SimError> {
    let (summary, report, _) = execute(config)?;
    fs::create_dir_all(out).map_err(|e| SimError::io(out, e))?;
    write_json(&out.join(CONFIG), config)?;
    write_json(&out.join(SUMMARY), &summary)?;
    write_csv(&out.join(METRICS_CSV), &message_rows(&performance_metrics(&report)))?;
    write_csv(&out.join(NODES_CSV), &summary.nodes)?;
    fs::write(out.join(METRICS_MD), metrics_markdown(&summary)).map_err(|e| SimError::io(out.join(METRICS_MD), e))?;
    if config.output.traces {
        trace::write_events(out, &report.events, config.output.trace_frames)?;
        write_json(
            &out.join(trace::GROUND_TRUTH),
            &GroundTruth::new(&summary.run_id, &report.submissions, &report.deliveries),
        )?;
    }
    Ok(summary)
}

/// One parameter axis: `path=v1,v2,...`.
#[derive(Clone, Debug, PartialEq)]
pub struct Axis {
    pub path: String,
    pub values: Vec<Value>,
}

impl Axis {
    pub fn parse(spec: &str) -> Result<Self, SimError> {
        let (path, list) = spec
            .split_once('=')
            .ok_or_else(|| SimError::Sweep(format!("`{spec}`: expected `parameter=v1,v2,...`")))?;
        let path = path.trim().to_string();
        if !SWEEPABLE.contains(&path.as_str()) {
            return Err(SimError::Sweep(format!(
                "unknown sweep parameter `{path}`; choose from {}",
                SWEEPABLE.join(", ")
            )));
        }
        let values: Vec<Value> = list
            .split(',')
            .map(str::trim)
            .filter(|v| !v.is_empty())
            .map(|v| serde_json::from_str(v).unwrap_or_else(|_| Value::String(v.into())))
            .collect();
        if values.is_empty() {
            return Err(SimError::Sweep(format!("`{path}` has no values")));
        }
        Ok(Self { path, values })
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SweepRow {
    pub index: usize,
    pub seed: u64,
    pub run_id: String,
    pub parameters: Vec<(String, Value)>,
    pub metrics: MetricsSummary,
    pub mean_sender_anonymity: Vec<Option<f64>>,
}

/// Cartesian product of the axes, first axis varying slowest.
pub fn grid_points(axes: &[Axis]) -> Vec<Vec<(String, Value)>> {
    axes.iter().fold(vec![Vec::new()], |points, axis| {
        points
            .iter()
            .flat_map(|p| {
                axis.values.iter().map(move |v| {
                    let mut p = p.clone();
                    p.push((axis.path.clone(), v.clone()));
                    p
                })
            })
            .collect()
    })
}

/// The configuration of grid point `index`: parameters applied, seed
/// advanced by the index.
pub fn sweep_config(base: &ScenarioConfig, index: usize, point: &[(String, Value)]) -> Result<ScenarioConfig, SimError> {
    let mut tree = serde_json::to_value(base).expect("configs serialize");
    for (path, value) in point {
        config::set_path(&mut tree, path, value.clone())?;
    }
    config::set_path(&mut tree, "seed", Value::from(base.seed.wrapping_add(index as u64)))?;
    Ok(config::from_tree(tree)?)
}

/// Runs every grid point, in parallel, and writes one row per point.
pub fn cmd_sweep(base: &ScenarioConfig, axes: &[Axis], out: &Path) -> Result<Vec<SweepRow>, SimError> {
    if axes.is_empty() {
        return Err(SimError::Sweep("empty grid: give at least one --grid parameter=values".into()));
    }
    let points = grid_points(axes);
    let threads = std::env::var("ADTN_SIM_THREADS").ok().and_then(|v| v.parse().ok()).unwrap_or(0);
    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(threads)
        .build()
        .map_err(|e| SimError::Sweep(e.to_string()))?;
    let rows: Vec<SweepRow> = pool.install(|| {
        points
            .par_iter()
            .enumerate()
            .map(|(index, point)| {
                let config = sweep_config(base, index, point)?;
                let (summary, _, _) = execute(&config).map_err(|e| match e {
                    SimError::Config(c) => SimError::Sweep(format!("grid point {index}: {c}")),
                    other => other,
                })?;
                Ok(SweepRow {
                    index,
                    seed: config.seed,
                    run_id: summary.run_id,
                    parameters: point.clone(),
                    mean_sender_anonymity: summary.adversaries.iter().map(|a| a.mean_sender_anonymity).collect(),
                    metrics: summary.metrics,
                })
            })
            .collect::<Result<_, SimError>>()
    })?;

    fs::create_dir_all(out).map_err(|e| SimError::io(out, e))?;
    write_json(&out.join(SWEEP_JSON), &rows)?;
    let path = out.join(SWEEP_CSV);
    let mut w = csv::Writer::from_path(&path).map_err(|e| SimError::io(&path, e.into()))?;
    let mut header: Vec<String> = vec!["index".into(), "seed".into(), "run_id".into()];
    header.extend(axes.iter().map(|a| a.path.clone()));
    header.extend(
        [
            "messages",
            "delivery_ratio",
            "mean_latency_ticks",
            "mean_diffusion_ticks_p90",
            "emissions_total",
            "cover_fraction",
            "mean_decrypt_attempts",
        ]
        .map(String::from),
    );
    w.write_record(&header).map_err(|e| SimError::io(&path, e.into()))?;
    let opt = |v: Option<f64>| v.map(|v| v.to_string()).unwrap_or_default();
    for r in &rows {
        let mut rec = vec![r.index.to_string(), r.seed.to_string(), r.run_id.clone()];
        rec.extend(r.parameters.iter().map(|(_, v)| match v {
            Value::String(s) => s.clone(),
            other => other.to_string(),
        }));
        let m = &r.metrics;
        rec.extend([
            m.messages.to_string(),
            opt(m.delivery_ratio),
            opt(m.mean_latency_ticks),
            opt(m.mean_diffusion_ticks_p90),
            m.emissions_total.to_string(),
            m.cover_fraction.to_string(),
            m.mean_decrypt_attempts.to_string(),
        ]);
        w.write_record(&rec).map_err(|e| SimError::io(&path, e.into()))?;
    }
    w.flush().map_err(|e| SimError::io(&path, e))?;
    Ok(rows)
}

/// Replays attacks over the trace files of an earlier run. With no
/// observers given, the run's configured passive adversaries are used, or
/// a global external eavesdropper if it had none.
pub fn cmd_attack(trace_dir: &Path, observers: &[AttackSpec], out: &Path) -> Result<Vec<AdversaryReport>, SimError> {
    let summary: Value = read_json(&trace_dir.join(SUMMARY))?;
    let config: ScenarioConfig = {
        let path = trace_dir.join(CONFIG);
        let tree: Value = read_json(&path)?;
        config::from_tree(tree).map_err(|e| SimError::trace(&path, e.to_string()))?
    };
    let expected = run_id(&config);
    let recorded = summary.get("run_id").and_then(Value::as_str).unwrap_or_default();
    if recorded != expected {
        return Err(SimError::Attack(format!(
            "run id mismatch: {SUMMARY} says `{recorded}` but {CONFIG} is run `{expected}`"
        )));
    }
    let truth: GroundTruth = read_json(&trace_dir.join(trace::GROUND_TRUTH))?;
    if truth.run_id != expected {
        return Err(SimError::Attack(format!(
            "run id mismatch: {} says `{}` but {CONFIG} is run `{expected}`",
            trace::GROUND_TRUTH,
            truth.run_id
        )));
    }

    let resolved = config.resolve()?;
    let codec = FrameCodec::new(config.frame_size).map_err(|e| ConfigError::new("frame_size", e.to_string()))?;
    let events = trace::read_events(trace_dir, &codec)?;
    let observations = trace::read_observations(trace_dir)?;
    if observations.len() != events.len() {
        return Err(SimError::trace(
            trace_dir.join(trace::OBSERVATIONS),
            format!("{} observations for {} events", observations.len(), events.len()),
        ));
    }
    let submissions = truth
        .submission_records()
        .map_err(|e| SimError::trace(trace_dir.join(trace::GROUND_TRUTH), e))?;
    let groups = build_groups(&resolved.scenario);

    let specs: Vec<ObserverSpec> = if !observers.is_empty() {
        observers
            .iter()
            .map(|a| a.resolve(&resolved.group_names))
            .collect::<Result<_, _>>()?
    } else if !resolved.observers.is_empty() {
        resolved.observers.clone()
    } else {
        vec![ObserverSpec { name: "external-global".into(), scope: adtn_core::adversary::Scope::Global, keys: Vec::new() }]
    };
    let has_frames = events.iter().all(|e| e.frame.is_some());
    if !has_frames && specs.iter().any(|s| !s.keys.is_empty()) {
        return Err(SimError::Attack(
            "internal adversaries need frame bytes; rerun with --trace-frames".into(),
        ));
    }

    let evidence = Evidence {
        events: &events,
        submissions: &submissions,
        groups: &groups,
        group_names: &resolved.group_names,
        node_count: resolved.scenario.node_count,
        arena: resolved.scenario.arena,
        codec,
        seed: config.seed,
    };
    let reports: Vec<AdversaryReport> = specs.par_iter().map(|s| evaluate(&evidence, s)).collect();

    fs::create_dir_all(out).map_err(|e| SimError::io(out, e))?;
    write_json(&out.join(ANONYMITY_JSON), &reports)?;
    #[derive(Serialize)]
    struct Row<'a> {
        adversary: &'a str,
        message: &'a str,
        origin: u32,
        candidates: usize,
        sender_anonymity: f64,
        recipient_anonymity: f64,
        observed_emissions: usize,
    }
    let rows: Vec<Row> = reports
        .iter()
        .flat_map(|r| {
            r.messages.iter().map(move |m| Row {
                adversary: &r.name,
                message: &m.message,
                origin: m.origin,
                candidates: m.candidates.len(),
                sender_anonymity: m.sender_anonymity,
                recipient_anonymity: m.recipient_anonymity,
                observed_emissions: m.observed_emissions,
            })
        })
        .collect();
    write_csv(&out.join(ANONYMITY_CSV), &rows)?;
    Ok(reports)
}

/// An adversary given on the command line.
#[derive(Clone, Debug, Default, PartialEq)]
pub struct AttackSpec {
    pub name: Option<String>,
    pub keys: Vec<String>,
    /// `[x, y, radius]`; global when absent.
    pub disk: Option<[f64; 3]>,
}

impl AttackSpec {
    fn resolve(&self, group_names: &[String]) -> Result<ObserverSpec, SimError> {
        let keys = config::resolve_keys(&self.keys, group_names).map_err(|r| ConfigError::new("--keys", r))?;
        let scope = match self.disk {
            None => adtn_core::adversary::Scope::Global,
            Some([x, y, r]) if r > 0.0 => adtn_core::adversary::Scope::Disk { center: adtn_core::netsim::Vec2::new(x, y), radius: r },
            Some(_) => return Err(ConfigError::new("--disk", "radius must be positive").into()),
        };
        let kind = if keys.is_empty() { "external" } else { "internal" };
        Ok(ObserverSpec { name: self.name.clone().unwrap_or_else(|| kind.to_string()), scope, keys })
    }
}

/// Compares the protocol with the contact oracle on a single-message
/// configuration.
pub fn cmd_oracle(config: &ScenarioConfig) -> Result<OracleOutcome, SimError> {
    let resolved = config.resolve()?;
    OracleOutcome::check(&resolved.scenario).map_err(|e| ConfigError::new(e.field, e.reason).into())
}

pub fn oracle_table(outcome: &OracleOutcome) -> String {
    let show = |t: Option<u64>| t.map_or_else(|| "-".to_string(), |t| t.to_string());
    let mut out = String::from("node  oracle  protocol\n");
    for (i, (o, p)) in outcome.oracle.iter().zip(&outcome.protocol).enumerate() {
        let mark = if o == p { "" } else { "  <-- differs" };
        out.push_str(&format!("{i:>4}  {:>6}  {:>8}{mark}\n", show(*o), show(*p)));
    }
    out.push_str(&match &outcome.verdict {
        OracleVerdict::Match => "verdict: match\n".to_string(),
        OracleVerdict::Mismatch(d) => format!("verdict: mismatch at {} node(s)\n", d.len()),
        OracleVerdict::Invalid(why) => format!("verdict: not comparable ({why})\n"),
    });
    out
}
