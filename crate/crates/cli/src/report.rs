//! Serialized report shapes. Field order is the output key order.

use crate::RingArgs;
use ringcheck::ctl::Fairness;
use ringcheck::protocol::{Uid, Variant};
use ringcheck::simulate::{SimReport, SyncPhaseReport};
use ringcheck::statespace::{ExploreStats, StateGraph, Trace};
use serde::Serialize;
use std::time::Instant;

const TOOL_VERSION: &str = env!("CARGO_PKG_VERSION");

fn elapsed_ms(started: Instant) -> u64 {
    started.elapsed().as_millis() as u64
}

fn uid_string(uids: &[Uid]) -> String {
    uids.iter().map(|u| u.to_string()).collect::<Vec<_>>().join(" ")
}

#[derive(Debug, Serialize)]
pub struct ReportDocument {
    pub tool_version: &'static str,
    pub command: &'static str,
    pub variant: Variant,
    pub n: usize,
    pub uids: Vec<Uid>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub uid_seed: Option<u64>,
    pub clear_dead_temps: bool,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub properties: Option<Vec<PropertyReport>>,
    pub stats: ExploreStats,
    pub elapsed_ms: u64,
}

impl ReportDocument {
    pub fn new(
        command: &'static str,
        ring: &RingArgs,
        uids: &[Uid],
        properties: Option<Vec<PropertyReport>>,
        stats: ExploreStats,
        started: Instant,
    ) -> Self {
        ReportDocument {
            tool_version: TOOL_VERSION,
            command,
            variant: ring.variant,
            n: uids.len(),
            uids: uids.to_vec(),
            uid_seed: if ring.uids.is_none() { ring.uid_seed } else { None },
            clear_dead_temps: !ring.keep_temps,
            properties,
            stats,
            elapsed_ms: elapsed_ms(started),
        }
    }
}

#[derive(Debug, Serialize)]
pub struct PropertyReport {
    pub name: String,
    pub formula: String,
    pub fairness: Fairness,
    pub expected: bool,
    pub holds: bool,
    pub matches: bool,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub evidence: Option<Evidence>,
}

#[derive(Debug, Serialize)]
pub struct Evidence {
    /// `path` or `lasso`.
    pub kind: &'static str,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub loop_start: Option<usize>,
    pub initial: String,
    pub steps: Vec<EvidenceStep>,
}

#[derive(Debug, Serialize)]
pub struct EvidenceStep {
    pub step: usize,
    pub process: usize,
    pub delta: String,
}

impl Evidence {
    pub fn from_trace(graph: &StateGraph, trace: &Trace) -> Self {
        let mut steps = Vec::new();
        for (k, &(from, label)) in trace.steps.iter().enumerate() {
            let Some(process) = label else { continue };
            let to = match trace.steps.get(k + 1) {
                Some(&(t, _)) => t,
                None => trace.steps[trace.loop_start.expect("only a lasso labels its last step")].0,
            };
            let delta = match (graph.state(from), graph.state(to)) {
                (Some(a), Some(b)) => a.describe_delta(&b),
                (Some(_), None) => "overflow".to_string(),
                (None, _) => "stutter".to_string(),
            };
            steps.push(EvidenceStep { step: k, process, delta });
        }
        Evidence {
            kind: if trace.is_lasso() { "lasso" } else { "path" },
            loop_start: trace.loop_start,
            initial: graph.state(0).map(|g| g.to_string()).unwrap_or_default(),
            steps,
        }
    }
}

#[derive(Debug, Serialize)]
pub struct PropertyRow {
    pub name: String,
    pub formula: String,
    pub fairness: Fairness,
    pub expected: bool,
    pub holds: bool,
    pub matches: bool,
    pub evidence_steps: usize,
}

impl From<&PropertyReport> for PropertyRow {
    fn from(p: &PropertyReport) -> Self {
        PropertyRow {
            name: p.name.clone(),
            formula: p.formula.clone(),
            fairness: p.fairness,
            expected: p.expected,
            holds: p.holds,
            matches: p.matches,
            evidence_steps: p.evidence.as_ref().map_or(0, |e| e.steps.len()),
        }
    }
}

#[derive(Debug, Serialize)]
pub struct StatsRow {
    pub variant: Variant,
    pub n: usize,
    pub uids: String,
    pub reachable_states: u64,
    pub transitions: u64,
    pub self_loops: u64,
    pub quiescent_nonleader: u64,
    pub peak_frontier: u64,
    pub elapsed_ms: u64,
}

impl StatsRow {
    pub fn new(doc: &ReportDocument) -> Self {
        StatsRow {
            variant: doc.variant,
            n: doc.n,
            uids: uid_string(&doc.uids),
            reachable_states: doc.stats.reachable_states,
            transitions: doc.stats.transitions,
            self_loops: doc.stats.self_loops,
            quiescent_nonleader: doc.stats.quiescent_nonleader,
            peak_frontier: doc.stats.peak_frontier,
            elapsed_ms: doc.elapsed_ms,
        }
    }
}

#[derive(Debug, Serialize)]
pub struct SimulateRun {
    pub run: usize,
    pub seed: u64,
    #[serde(flatten)]
    pub report: SimReport,
    pub matches_oracle: bool,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub error: Option<String>,
}

#[derive(Debug, Serialize)]
pub struct SimulateDocument {
    pub tool_version: &'static str,
    pub command: &'static str,
    pub variant: Variant,
    pub n: usize,
    pub uids: Vec<Uid>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub uid_seed: Option<u64>,
    pub clear_dead_temps: bool,
    pub oracle: SyncPhaseReport,
    pub runs: Vec<SimulateRun>,
    pub elapsed_ms: u64,
}

impl SimulateDocument {
    pub fn new(ring: &RingArgs, uids: &[Uid], oracle: SyncPhaseReport, runs: Vec<SimulateRun>, started: Instant) -> Self {
        SimulateDocument {
            tool_version: TOOL_VERSION,
            command: "simulate",
            variant: ring.variant,
            n: uids.len(),
            uids: uids.to_vec(),
            uid_seed: if ring.uids.is_none() { ring.uid_seed } else { None },
            clear_dead_temps: !ring.keep_temps,
            oracle,
            runs,
            elapsed_ms: elapsed_ms(started),
        }
    }
}

#[derive(Debug, Serialize)]
pub struct SimulateRow {
    pub variant: Variant,
    pub n: usize,
    pub uids: String,
    pub run: usize,
    pub seed: u64,
    pub elected: Option<usize>,
    pub elected_vid: Option<Uid>,
    pub steps: u64,
    pub link_transmissions: u64,
    pub terminated: bool,
    pub oracle_winner: usize,
    pub matches_oracle: bool,
}

impl SimulateRow {
    pub fn new(doc: &SimulateDocument, r: &SimulateRun) -> Self {
        SimulateRow {
            variant: doc.variant,
            n: doc.n,
            uids: uid_string(&doc.uids),
            run: r.run,
            seed: r.seed,
            elected: r.report.elected,
            elected_vid: r.report.elected_vid,
            steps: r.report.steps,
            link_transmissions: r.report.link_transmissions,
            terminated: r.report.terminated,
            oracle_winner: doc.oracle.winner,
            matches_oracle: r.matches_oracle,
        }
    }
}
