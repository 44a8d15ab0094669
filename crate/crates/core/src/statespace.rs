//! Breadth-first exploration of the reachable transition graph.
//!
//! States are stored as fixed-width canonical encodings in one arena and
//! deduplicated through a hash table of state ids. Ids are handed out in BFS
//! discovery order with successors visited in ascending process order, so a
//! state's id is also its position in the BFS queue. Each state owns exactly
//! `n` outgoing edges, edge `i` being the move of process `i`; stutters are
//! kept as explicit self-loops. Overflowing sends lead to one absorbing sink
//! state.
//!
//! With more than one worker, successor generation for a block of the queue
//! runs in parallel and the results are merged sequentially in queue order,
//! which keeps ids identical to the single-worker run.

use crate::protocol::{
    EncodedState, GlobalState, Protocol, ProtocolError, StepOutcome, Uid, UNSET_BYTE,
};
use hashbrown::{DefaultHashBuilder, HashTable};
use rayon::prelude::*;
use serde::Serialize;
use std::collections::VecDeque;
use std::hash::BuildHasher;
use thiserror::Error;

pub type StateId = u32;

/// Queue positions expanded per merge round.
const BLOCK: usize = 1 << 14;

#[derive(Debug, Error)]
pub enum ExploreError {
    #[error(transparent)]
    Protocol(#[from] ProtocolError),
    #[error("state limit of {limit} exceeded")]
    StateLimitExceeded {
        limit: usize,
        partial: Box<Exploration>,
    },
    #[error("graph is truncated; exploration did not complete")]
    TruncatedGraph,
    #[error("graph is malformed: {0}")]
    Malformed(String),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct ExploreLimits {
    pub max_states: usize,
    pub max_steps_per_trace: usize,
}

impl Default for ExploreLimits {
    fn default() -> Self {
        ExploreLimits {
            max_states: 10_000_000,
            max_steps_per_trace: 100_000,
        }
    }
}

impl ExploreLimits {
    pub fn with_max_states(max_states: usize) -> Self {
        ExploreLimits {
            max_states,
            ..Self::default()
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize)]
pub struct ExploreStats {
    pub reachable_states: u64,
    /// Edges whose target differs from their source.
    pub transitions: u64,
    pub self_loops: u64,
    pub quiescent_nonleader: u64,
    /// Size of the largest BFS level.
    pub peak_frontier: u64,
}

/// Stats plus the run parameters, as exported to JSON.
#[derive(Debug, Clone, Serialize)]
pub struct StatsRecord {
    pub variant: String,
    pub n: usize,
    pub uids: Vec<Uid>,
    #[serde(flatten)]
    pub stats: ExploreStats,
}

#[derive(Debug, Clone)]
pub struct Exploration {
    pub graph: StateGraph,
    pub stats: ExploreStats,
}

/// Path through a [`StateGraph`]. Each entry is a state and the label of the
/// edge taken out of it; the last entry of a finite trace has no label. For a
/// lasso every entry has a label and the final edge returns to
/// `steps[loop_start]`.
#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct Trace {
    pub steps: Vec<(StateId, Option<usize>)>,
    pub loop_start: Option<usize>,
}

impl Trace {
    pub fn edge_count(&self) -> usize {
        self.steps.iter().filter(|(_, l)| l.is_some()).count()
    }

    pub fn is_lasso(&self) -> bool {
        self.loop_start.is_some()
    }

    /// Process labels used on the loop of a lasso, ascending.
    pub fn loop_labels(&self) -> Vec<usize> {
        let Some(start) = self.loop_start else {
            return Vec::new();
        };
        let mut labels: Vec<usize> = self.steps[start..].iter().filter_map(|(_, l)| *l).collect();
        labels.sort_unstable();
        labels.dedup();
        labels
    }

    /// Whether the trace starts at state 0 and follows edges of `graph`.
    pub fn replays_on<G: crate::ctl::Kripke>(&self, graph: &G) -> bool {
        let Some(&(first, _)) = self.steps.first() else {
            return false;
        };
        if first != graph.initial() {
            return false;
        }
        let has_edge = |from: StateId, label: usize, to: StateId| {
            graph.edges(from).any(|(l, t)| l == label && t == to)
        };
        for w in self.steps.windows(2) {
            let (from, Some(label)) = w[0] else { return false };
            if !has_edge(from, label, w[1].0) {
                return false;
            }
        }
        let &(last, last_label) = self.steps.last().unwrap();
        match (self.loop_start, last_label) {
            (None, None) => true,
            (Some(start), Some(label)) => {
                start < self.steps.len() && has_edge(last, label, self.steps[start].0)
            }
            _ => false,
        }
    }
}

/// Reachable, deduplicated transition graph of one ring instance.
#[derive(Debug, Clone)]
pub struct StateGraph {
    protocol: Protocol,
    uids: Vec<Uid>,
    width: usize,
    arena: Vec<u8>,
    /// `n` targets per state; index `state * n + label`.
    edges: Vec<StateId>,
    overflow_state: Option<StateId>,
    truncated: bool,
}

impl StateGraph {
    /// Assembles a graph from explicit states and per-state edge lists, e.g.
    /// for hand-built scenarios. `edges[s][i]` is the target of process `i`
    /// from state `s`; state 0 is initial.
    pub fn from_parts(
        protocol: Protocol,
        uids: Vec<Uid>,
        states: &[GlobalState],
        edges: &[Vec<StateId>],
    ) -> Result<Self, ExploreError> {
        let n = uids.len();
        if states.is_empty() || states.len() != edges.len() {
            return Err(ExploreError::Malformed("state and edge lists must match".into()));
        }
        let width = protocol.encoded_width(n);
        let mut arena = Vec::with_capacity(width * states.len());
        for s in states {
            if s.n() != n {
                return Err(ExploreError::Malformed("ring size mismatch".into()));
            }
            protocol.encode_into(s, &mut arena);
        }
        let mut flat = Vec::with_capacity(n * states.len());
        for list in edges {
            if list.len() != n || list.iter().any(|&t| t as usize >= states.len()) {
                return Err(ExploreError::Malformed("each state needs n valid targets".into()));
            }
            flat.extend_from_slice(list);
        }
        Ok(StateGraph {
            protocol,
            uids,
            width,
            arena,
            edges: flat,
            overflow_state: None,
            truncated: false,
        })
    }

    pub fn protocol(&self) -> Protocol {
        self.protocol
    }

    pub fn uids(&self) -> &[Uid] {
        &self.uids
    }

    /// Ring size, which is also the number of process labels.
    pub fn n(&self) -> usize {
        self.uids.len()
    }

    pub fn len(&self) -> usize {
        self.arena.len() / self.width
    }

    pub fn is_empty(&self) -> bool {
        self.arena.is_empty()
    }

    pub fn is_truncated(&self) -> bool {
        self.truncated
    }

    pub fn overflow_reached(&self) -> bool {
        self.overflow_state.is_some()
    }

    pub fn overflow_state(&self) -> Option<StateId> {
        self.overflow_state
    }

    pub fn encoding(&self, id: StateId) -> &[u8] {
        let start = id as usize * self.width;
        &self.arena[start..start + self.width]
    }

    /// Encoded view of a ring state; `None` for the overflow sink.
    pub fn view(&self, id: StateId) -> Option<EncodedState<'_>> {
        self.protocol.view(self.encoding(id))
    }

    /// Decoded ring state; `None` for the overflow sink.
    pub fn state(&self, id: StateId) -> Option<GlobalState> {
        self.protocol.decode(self.encoding(id))
    }

    pub fn targets(&self, id: StateId) -> &[StateId] {
        let n = self.n();
        let start = id as usize * n;
        &self.edges[start..start + n]
    }

    pub fn target(&self, id: StateId, label: usize) -> StateId {
        self.edges[id as usize * self.n() + label]
    }

    pub fn is_quiescent(&self, id: StateId) -> bool {
        self.targets(id).iter().all(|&t| t == id)
    }

    pub fn leader_count(&self, id: StateId) -> usize {
        self.view(id).map_or(0, |v| v.leader_count())
    }

    pub fn stats(&self) -> ExploreStats {
        let mut stats = ExploreStats {
            reachable_states: self.len() as u64,
            ..ExploreStats::default()
        };
        for id in 0..self.len() as StateId {
            let mut all_loops = true;
            for &t in self.targets(id) {
                if t == id {
                    stats.self_loops += 1;
                } else {
                    stats.transitions += 1;
                    all_loops = false;
                }
            }
            if all_loops && self.leader_count(id) == 0 {
                stats.quiescent_nonleader += 1;
            }
        }
        stats.peak_frontier = self.peak_frontier();
        stats
    }

    fn peak_frontier(&self) -> u64 {
        let mut depth = vec![u32::MAX; self.len()];
        let mut width: Vec<u64> = Vec::new();
        depth[0] = 0;
        for id in 0..self.len() as StateId {
            let d = depth[id as usize];
            if d == u32::MAX {
                continue;
            }
            if width.len() <= d as usize {
                width.resize(d as usize + 1, 0);
            }
            width[d as usize] += 1;
            for &t in self.targets(id) {
                if depth[t as usize] == u32::MAX {
                    depth[t as usize] = d + 1;
                }
            }
        }
        width.into_iter().max().unwrap_or(0)
    }

    pub fn stats_record(&self, stats: ExploreStats) -> StatsRecord {
        StatsRecord {
            variant: self.protocol.variant.name().to_string(),
            n: self.n(),
            uids: self.uids.clone(),
            stats,
        }
    }

    fn require_complete(&self) -> Result<(), ExploreError> {
        if self.truncated {
            Err(ExploreError::TruncatedGraph)
        } else {
            Ok(())
        }
    }

    /// Shortest path (by edge count) from state 0 to a state satisfying `target`.
    /// The overflow sink never satisfies a state predicate.
    pub fn find_trace_to(
        &self,
        mut target: impl FnMut(&GlobalState) -> bool,
    ) -> Result<Option<Trace>, ExploreError> {
        self.require_complete()?;
        let mut parent: Vec<Option<(StateId, usize)>> = vec![None; self.len()];
        let mut seen = vec![false; self.len()];
        let mut queue = VecDeque::from([0 as StateId]);
        seen[0] = true;
        while let Some(id) = queue.pop_front() {
            if self.state(id).is_some_and(|g| target(&g)) {
                let mut steps = vec![(id, None)];
                let mut cur = id;
                while let Some((prev, label)) = parent[cur as usize] {
                    steps.push((prev, Some(label)));
                    cur = prev;
                }
                steps.reverse();
                return Ok(Some(Trace {
                    steps,
                    loop_start: None,
                }));
            }
            for (label, &t) in self.targets(id).iter().enumerate() {
                if !seen[t as usize] {
                    seen[t as usize] = true;
                    parent[t as usize] = Some((id, label));
                    queue.push_back(t);
                }
            }
        }
        Ok(None)
    }

    /// States where every process is blocked, split by whether a leader exists.
    pub fn quiescent_states(&self) -> Result<QuiescentStates, ExploreError> {
        self.require_complete()?;
        let mut out = QuiescentStates::default();
        for id in 0..self.len() as StateId {
            if self.is_quiescent(id) {
                if self.leader_count(id) > 0 {
                    out.with_leader.push(id);
                } else {
                    out.without_leader.push(id);
                }
            }
        }
        Ok(out)
    }
}

#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct QuiescentStates {
    pub with_leader: Vec<StateId>,
    pub without_leader: Vec<StateId>,
}

/// Dedup set over arena records.
struct StateStore {
    width: usize,
    arena: Vec<u8>,
    table: HashTable<StateId>,
    hasher: DefaultHashBuilder,
}

impl StateStore {
    fn new(width: usize) -> Self {
        StateStore {
            width,
            arena: Vec::new(),
            table: HashTable::new(),
            hasher: DefaultHashBuilder::default(),
        }
    }

    fn len(&self) -> usize {
        self.arena.len() / self.width
    }

    fn record(arena: &[u8], width: usize, id: StateId) -> &[u8] {
        let start = id as usize * width;
        &arena[start..start + width]
    }

    /// Returns the id of `key`, inserting it if new.
    fn intern(&mut self, key: &[u8]) -> StateId {
        let hash = self.hasher.hash_one(key);
        let (arena, width) = (&self.arena, self.width);
        if let Some(&id) = self
            .table
            .find(hash, |&id| Self::record(arena, width, id) == key)
        {
            return id;
        }
        let id = self.len() as StateId;
        self.arena.extend_from_slice(key);
        let (arena, hasher) = (&self.arena, &self.hasher);
        self.table.insert_unique(hash, id, |&id| {
            hasher.hash_one(Self::record(arena, width, id))
        });
        id
    }
}

/// Reachable graph of `protocol` on the ring `uids`.
pub fn explore(
    protocol: impl Into<Protocol>,
    uids: &[Uid],
    limits: ExploreLimits,
) -> Result<Exploration, ExploreError> {
    explore_with_jobs(protocol, uids, limits, 1)
}

/// As [`explore`], generating successors on `jobs` worker threads. The
/// resulting graph does not depend on `jobs`.
pub fn explore_with_jobs(
    protocol: impl Into<Protocol>,
    uids: &[Uid],
    limits: ExploreLimits,
    jobs: usize,
) -> Result<Exploration, ExploreError> {
    let protocol = protocol.into();
    let init = protocol.initial_state(uids)?;
    let n = uids.len();
    let width = protocol.encoded_width(n);
    let sink_record = vec![UNSET_BYTE; width];

    let pool = if jobs > 1 {
        Some(
            rayon::ThreadPoolBuilder::new()
                .num_threads(jobs)
                .build()
                .map_err(|e| ExploreError::Malformed(e.to_string()))?,
        )
    } else {
        None
    };

    let mut store = StateStore::new(width);
    store.intern(&protocol.encode(&init));
    let mut edges: Vec<StateId> = Vec::new();
    let mut overflow_state = None;
    let mut next = 0usize;
    let mut truncated = false;

    // Successor records for queue positions [lo, hi), n records per state.
    // The sink record stands for an overflowing send; the state's own record
    // for a stutter.
    let expand = |arena: &[u8], lo: usize, hi: usize| -> Vec<u8> {
        let one = |id: usize| -> Vec<u8> {
            let bytes = &arena[id * width..(id + 1) * width];
            let mut out = Vec::with_capacity(n * width);
            match protocol.decode(bytes) {
                None => {
                    for _ in 0..n {
                        out.extend_from_slice(bytes);
                    }
                }
                Some(g) => {
                    for i in 0..n {
                        match protocol.step(&g, i).expect("states in the store are well formed") {
                            StepOutcome::Progress(s) => protocol.encode_into(&s, &mut out),
                            StepOutcome::Stutter => out.extend_from_slice(bytes),
                            StepOutcome::Overflow => out.extend_from_slice(&sink_record),
                        }
                    }
                }
            }
            out
        };
        match &pool {
            Some(pool) => pool.install(|| {
                (lo..hi)
                    .into_par_iter()
                    .map(one)
                    .collect::<Vec<_>>()
                    .concat()
            }),
            None => (lo..hi).flat_map(one).collect(),
        }
    };

    while next < store.len() {
        if store.len() > limits.max_states {
            truncated = true;
            break;
        }
        let hi = store.len().min(next + BLOCK);
        let records = expand(&store.arena, next, hi);
        for rec in records.chunks_exact(width) {
            let id = store.intern(rec);
            if rec == sink_record.as_slice() {
                overflow_state = Some(id);
            }
            edges.push(id);
        }
        next = hi;
    }

    if truncated {
        // Unexpanded states get self-loops so the edge table stays rectangular.
        for id in next..store.len() {
            edges.extend(std::iter::repeat_n(id as StateId, n));
        }
    }

    let graph = StateGraph {
        protocol,
        uids: uids.to_vec(),
        width,
        arena: store.arena,
        edges,
        overflow_state,
        truncated,
    };
    let stats = graph.stats();
    let exploration = Exploration { graph, stats };
    if truncated {
        Err(ExploreError::StateLimitExceeded {
            limit: limits.max_states,
            partial: Box::new(exploration),
        })
    } else {
        Ok(exploration)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::protocol::{identity_uids, uids_from, Inbox, Mode, Pc, Variant};

    fn graph(variant: Variant, uids: &[u8]) -> StateGraph {
        explore(variant, &uids_from(uids), ExploreLimits::default())
            .unwrap()
            .graph
    }

    #[test]
    fn modified_two_ring() {
        let g = graph(Variant::Modified, &[0, 1]);
        let stats = g.stats();
        assert_eq!(stats.quiescent_nonleader, 0);
        let counts: Vec<usize> = (0..g.len() as StateId).map(|s| g.leader_count(s)).collect();
        assert!(counts.iter().any(|&c| c == 1));
        assert!(counts.iter().all(|&c| c <= 1));
    }

    #[test]
    fn extra_is_smaller_than_modified() {
        let m = graph(Variant::Modified, &[0, 1, 2]).len();
        let e = graph(Variant::ExtraModified, &[0, 1, 2]).len();
        assert!(e < m, "extra {e} vs modified {m}");
    }

    #[test]
    fn general_single_node() {
        let g = graph(Variant::General, &[0]);
        assert_eq!(g.len(), 4);
        let q = g.quiescent_states().unwrap();
        assert_eq!(q.without_leader, Vec::<StateId>::new());
        assert_eq!(q.with_leader.len(), 1);
        assert_eq!(g.state(q.with_leader[0]).unwrap().node(0).pc, Pc::Lead);
    }

    #[test]
    fn totality_and_closure() {
        for variant in Variant::ALL {
            let g = graph(variant, &[2, 0, 1]);
            let stats = g.stats();
            let n = g.n() as u64;
            assert_eq!(stats.transitions + stats.self_loops, n * stats.reachable_states);
            let p = g.protocol();
            for id in 0..g.len() as StateId {
                let s = g.state(id).unwrap();
                for i in 0..g.n() {
                    let expected = match p.step(&s, i).unwrap() {
                        StepOutcome::Progress(next) => next,
                        StepOutcome::Stutter => s.clone(),
                        StepOutcome::Overflow => panic!("no overflow expected"),
                    };
                    assert_eq!(g.state(g.target(id, i)).unwrap(), expected);
                }
            }
        }
    }

    #[test]
    fn reproducible_and_jobs_independent() {
        let a = explore(Variant::Modified, &identity_uids(4), ExploreLimits::default()).unwrap();
        let b = explore_with_jobs(Variant::Modified, &identity_uids(4), ExploreLimits::default(), 4)
            .unwrap();
        assert_eq!(a.graph.arena, b.graph.arena);
        assert_eq!(a.graph.edges, b.graph.edges);
        assert_eq!(a.stats, b.stats);
    }

    #[test]
    fn state_limit_truncates() {
        let err = explore(Variant::General, &identity_uids(3), ExploreLimits::with_max_states(10))
            .unwrap_err();
        let ExploreError::StateLimitExceeded { partial, limit } = err else {
            panic!("expected limit error")
        };
        assert_eq!(limit, 10);
        assert!(partial.graph.is_truncated());
        assert!(matches!(
            partial.graph.quiescent_states(),
            Err(ExploreError::TruncatedGraph)
        ));
        assert!(matches!(
            partial.graph.find_trace_to(|_| true),
            Err(ExploreError::TruncatedGraph)
        ));
    }

    #[test]
    fn traces() {
        let g = graph(Variant::Modified, &[0, 1]);
        let t = g.find_trace_to(|s| !s.leader_set().is_empty()).unwrap().unwrap();
        assert!(t.replays_on(&g));
        let last = g.state(t.steps.last().unwrap().0).unwrap();
        assert_eq!(last.leader_set().len(), 1);

        let t = g.find_trace_to(|_| true).unwrap().unwrap();
        assert_eq!(t.steps, vec![(0, None)]);
        assert_eq!(t.edge_count(), 0);

        let g3 = graph(Variant::Modified, &[0, 1, 2]);
        assert_eq!(g3.find_trace_to(|s| s.leader_set().len() >= 2).unwrap(), None);
    }

    #[test]
    fn hand_built_graph_sink_is_quiescent() {
        let p = Protocol::new(Variant::Modified);
        let a = p.initial_state(&[Uid(0)]).unwrap();
        let mut b = a.clone();
        b.node_mut(0).pc = Pc::S2;
        b.node_mut(0).inbox = Inbox::Slot(None);
        let g = StateGraph::from_parts(p, vec![Uid(0)], &[a, b], &[vec![1], vec![1]]).unwrap();
        let q = g.quiescent_states().unwrap();
        assert_eq!(q.without_leader, vec![1]);
        assert!(q.with_leader.is_empty());
        assert_eq!(g.state(1).unwrap().node(0).mode, Mode::Active);
    }

    #[test]
    fn overflow_routes_to_sink() {
        // A ring whose initial queue is pre-filled, assembled by hand as a
        // one-step graph: node 0's send overflows.
        let p = Protocol::new(Variant::General);
        let mut s = p.initial_state(&identity_uids(3)).unwrap();
        s.node_mut(1).inbox = Inbox::Fifo(uids_from(&[2, 1, 0]).into());
        assert_eq!(p.step(&s, 0).unwrap(), StepOutcome::Overflow);
    }
}
