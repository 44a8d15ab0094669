//! Node programs for the three election variants.
//!
//! Every node of the ring runs the same program. A global state is the vector
//! of node-local states; node `i` only ever writes into the inbox of node
//! `(i + 1) % n`. One call to [`Protocol::step`] executes a single atomic
//! statement group of one node: a guarded wait together with the assignments
//! that follow it, up to the next program-counter marker.
//!
//! * [`Variant::General`]: unbounded-style FIFO inbox (capacity `n`), sends never
//!   wait. A send into a full queue is reported as [`StepOutcome::Overflow`].
//! * [`Variant::Modified`]: single-slot inbox, sends wait for the successor slot
//!   to drain.
//! * [`Variant::ExtraModified`]: like `Modified`, but a relay node forwards in one
//!   step and the last receive of a phase is fused with the decision.

mod encode;

pub use encode::{EncodedState, NodeView, UNSET_BYTE};

use serde::{Deserialize, Serialize};
use std::collections::{BTreeSet, VecDeque};
use std::fmt;
use std::str::FromStr;
use thiserror::Error;

/// Largest ring the byte encoding can represent (`0xFF` is the unset sentinel).
pub const MAX_RING_SIZE: usize = 254;

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum ProtocolError {
    #[error("ring must contain at least one node")]
    EmptyRing,
    #[error("ring of {0} nodes exceeds the supported maximum of {MAX_RING_SIZE}")]
    RingTooLarge(usize),
    #[error("uid {0} appears more than once")]
    DuplicateUid(Uid),
    #[error("uid {uid} is outside 0..{n}")]
    UidOutOfRange { uid: Uid, n: usize },
    #[error("process index {index} out of range for a ring of {n} nodes")]
    IndexOutOfRange { index: usize, n: usize },
    #[error("node {0} carries an inbox of the wrong kind for this variant")]
    InboxKind(usize),
}

/// Unique node identifier.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(transparent)]
pub struct Uid(pub u8);

impl fmt::Display for Uid {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.0)
    }
}

impl From<u8> for Uid {
    fn from(v: u8) -> Self {
        Uid(v)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Variant {
    General,
    Modified,
    #[serde(rename = "extra")]
    ExtraModified,
}

impl Variant {
    pub const ALL: [Variant; 3] = [Variant::General, Variant::Modified, Variant::ExtraModified];

    pub fn name(self) -> &'static str {
        match self {
            Variant::General => "general",
            Variant::Modified => "modified",
            Variant::ExtraModified => "extra",
        }
    }

    /// Program counters the variant's program can occupy.
    pub fn pcs(self) -> &'static [Pc] {
        use Pc::*;
        match self {
            Variant::General => &[S0, S1, S2, S3, S4, Lead],
            Variant::Modified => &[S0, S1, S2, S3, S4, S5, Lead],
            Variant::ExtraModified => &[S0, S2, S3, S4, Lead],
        }
    }

    pub fn uses_fifo(self) -> bool {
        self == Variant::General
    }
}

impl fmt::Display for Variant {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

#[derive(Debug, Clone, Error, PartialEq, Eq)]
#[error("unknown variant `{0}` (expected general, modified or extra)")]
pub struct UnknownVariant(pub String);

impl FromStr for Variant {
    type Err = UnknownVariant;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s.to_ascii_lowercase().as_str() {
            "general" | "alg2" => Ok(Variant::General),
            "modified" | "alg3" => Ok(Variant::Modified),
            "extra" | "extramodified" | "extra-modified" | "alg4" => Ok(Variant::ExtraModified),
            _ => Err(UnknownVariant(s.to_string())),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Mode {
    Active,
    Relay,
}

impl fmt::Display for Mode {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Mode::Active => "active",
            Mode::Relay => "relay",
        })
    }
}

/// Program counter. `Lead` is absorbing.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub enum Pc {
    S0,
    S1,
    S2,
    S3,
    S4,
    S5,
    Lead,
}

impl Pc {
    pub const ALL: [Pc; 7] = [Pc::S0, Pc::S1, Pc::S2, Pc::S3, Pc::S4, Pc::S5, Pc::Lead];

    pub(crate) fn code(self) -> u8 {
        self as u8
    }

    pub(crate) fn from_code(code: u8) -> Option<Pc> {
        Pc::ALL.get(code as usize).copied()
    }
}

impl fmt::Display for Pc {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Pc::S0 => "s0",
            Pc::S1 => "s1",
            Pc::S2 => "s2",
            Pc::S3 => "s3",
            Pc::S4 => "s4",
            Pc::S5 => "s5",
            Pc::Lead => "lead",
        })
    }
}

/// Receive buffer of one node. The writer is the ring predecessor.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub enum Inbox {
    Slot(Option<Uid>),
    /// Bounded queue; capacity is the ring size.
    Fifo(VecDeque<Uid>),
}

impl Inbox {
    fn empty_for(variant: Variant) -> Inbox {
        if variant.uses_fifo() {
            Inbox::Fifo(VecDeque::new())
        } else {
            Inbox::Slot(None)
        }
    }

    pub fn is_empty(&self) -> bool {
        match self {
            Inbox::Slot(s) => s.is_none(),
            Inbox::Fifo(q) => q.is_empty(),
        }
    }

    pub fn len(&self) -> usize {
        match self {
            Inbox::Slot(s) => usize::from(s.is_some()),
            Inbox::Fifo(q) => q.len(),
        }
    }

    /// Messages in delivery order.
    pub fn contents(&self) -> Vec<Uid> {
        match self {
            Inbox::Slot(s) => s.iter().copied().collect(),
            Inbox::Fifo(q) => q.iter().copied().collect(),
        }
    }
}

impl fmt::Display for Inbox {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Inbox::Slot(None) => f.write_str("empty"),
            Inbox::Slot(Some(v)) => write!(f, "{v}"),
            Inbox::Fifo(q) => {
                f.write_str("[")?;
                for (k, v) in q.iter().enumerate() {
                    if k > 0 {
                        f.write_str(",")?;
                    }
                    write!(f, "{v}")?;
                }
                f.write_str("]")
            }
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct LocalState {
    /// Virtual ID tag, initially the node's uid.
    pub vid: Uid,
    pub mode: Mode,
    pub pc: Pc,
    pub id2: Option<Uid>,
    pub id3: Option<Uid>,
    pub inbox: Inbox,
}

impl LocalState {
    fn initial(variant: Variant, uid: Uid) -> Self {
        LocalState {
            vid: uid,
            mode: Mode::Active,
            pc: Pc::S0,
            id2: None,
            id3: None,
            inbox: Inbox::empty_for(variant),
        }
    }
}

/// Ring configuration; node `i` sends to node `(i + 1) % n`.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct GlobalState {
    nodes: Vec<LocalState>,
}

impl GlobalState {
    /// Builds a state from explicit node records, e.g. for hand-constructed
    /// scenarios. Only the ring size is validated here.
    pub fn from_nodes(nodes: Vec<LocalState>) -> Result<Self, ProtocolError> {
        if nodes.is_empty() {
            return Err(ProtocolError::EmptyRing);
        }
        if nodes.len() > MAX_RING_SIZE {
            return Err(ProtocolError::RingTooLarge(nodes.len()));
        }
        Ok(GlobalState { nodes })
    }

    pub fn n(&self) -> usize {
        self.nodes.len()
    }

    pub fn nodes(&self) -> &[LocalState] {
        &self.nodes
    }

    pub fn node(&self, i: usize) -> &LocalState {
        &self.nodes[i]
    }

    pub fn node_mut(&mut self, i: usize) -> &mut LocalState {
        &mut self.nodes[i]
    }

    pub fn successor_of(&self, i: usize) -> usize {
        (i + 1) % self.nodes.len()
    }

    /// `{ i : pc_i = LEAD }`.
    pub fn leader_set(&self) -> BTreeSet<usize> {
        self.nodes
            .iter()
            .enumerate()
            .filter(|(_, s)| s.pc == Pc::Lead)
            .map(|(i, _)| i)
            .collect()
    }

    /// Short per-node description of every field that differs from `self` in `other`.
    pub fn describe_delta(&self, other: &GlobalState) -> String {
        let mut parts = Vec::new();
        for (i, (a, b)) in self.nodes.iter().zip(&other.nodes).enumerate() {
            let mut changes = Vec::new();
            if a.mode != b.mode {
                changes.push(format!("mode {}->{}", a.mode, b.mode));
            }
            if a.pc != b.pc {
                changes.push(format!("pc {}->{}", a.pc, b.pc));
            }
            if a.vid != b.vid {
                changes.push(format!("vid {}->{}", a.vid, b.vid));
            }
            if a.id2 != b.id2 {
                changes.push(format!("id2 {}->{}", opt(a.id2), opt(b.id2)));
            }
            if a.id3 != b.id3 {
                changes.push(format!("id3 {}->{}", opt(a.id3), opt(b.id3)));
            }
            if a.inbox != b.inbox {
                changes.push(format!("inbox {}->{}", a.inbox, b.inbox));
            }
            if !changes.is_empty() {
                parts.push(format!("node {i}: {}", changes.join(", ")));
            }
        }
        if parts.is_empty() {
            "stutter".to_string()
        } else {
            parts.join("; ")
        }
    }
}

fn opt(v: Option<Uid>) -> String {
    v.map_or_else(|| "unset".to_string(), |u| u.to_string())
}

impl fmt::Display for GlobalState {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for (i, s) in self.nodes.iter().enumerate() {
            if i > 0 {
                f.write_str(" | ")?;
            }
            write!(
                f,
                "{i}:{}/{} vid={} id2={} id3={} in={}",
                s.mode,
                s.pc,
                s.vid,
                opt(s.id2),
                opt(s.id3),
                s.inbox
            )?;
        }
        Ok(())
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum StepOutcome {
    Progress(GlobalState),
    /// The scheduled process is blocked (or has terminated); the state is unchanged.
    Stutter,
    /// A General-variant send found the successor queue full.
    Overflow,
}

impl StepOutcome {
    pub fn is_progress(&self) -> bool {
        matches!(self, StepOutcome::Progress(_))
    }
}

/// One entry of [`Protocol::successors`]: the move of process `label`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum Successor {
    State(GlobalState),
    Overflow,
}

/// Node-level atomic propositions.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Atom {
    IsLeader(usize),
    VidEquals(usize, u8),
    ModeIs(usize, Mode),
    /// Every process is blocked.
    Quiescent,
}

impl Atom {
    /// Largest node index the atom mentions.
    pub fn max_index(&self) -> Option<usize> {
        match *self {
            Atom::IsLeader(i) | Atom::VidEquals(i, _) | Atom::ModeIs(i, _) => Some(i),
            Atom::Quiescent => None,
        }
    }
}

impl fmt::Display for Atom {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Atom::IsLeader(i) => write!(f, "leader({i})"),
            Atom::VidEquals(i, k) => write!(f, "vid({i})={k}"),
            Atom::ModeIs(i, m) => write!(f, "mode({i})={m}"),
            Atom::Quiescent => f.write_str("quiescent"),
        }
    }
}

/// A protocol variant together with its modelling options.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub struct Protocol {
    pub variant: Variant,
    /// Reset `id2`/`id3` to unset when a phase ends.
    pub clear_dead_temps: bool,
}

impl From<Variant> for Protocol {
    fn from(variant: Variant) -> Self {
        Protocol::new(variant)
    }
}

impl Protocol {
    pub fn new(variant: Variant) -> Self {
        Protocol {
            variant,
            clear_dead_temps: true,
        }
    }

    pub fn with_dead_temp_clearing(mut self, on: bool) -> Self {
        self.clear_dead_temps = on;
        self
    }

    pub fn initial_state(&self, uids: &[Uid]) -> Result<GlobalState, ProtocolError> {
        validate_uids(uids)?;
        let nodes = uids
            .iter()
            .map(|&u| LocalState::initial(self.variant, u))
            .collect();
        Ok(GlobalState { nodes })
    }

    /// Executes one atomic statement of process `i`.
    pub fn step(&self, g: &GlobalState, i: usize) -> Result<StepOutcome, ProtocolError> {
        let n = g.n();
        if i >= n {
            return Err(ProtocolError::IndexOutOfRange { index: i, n });
        }
        for idx in [i, g.successor_of(i)] {
            let fifo = matches!(g.nodes[idx].inbox, Inbox::Fifo(_));
            if fifo != self.variant.uses_fifo() {
                return Err(ProtocolError::InboxKind(idx));
            }
        }
        Ok(match self.variant {
            Variant::General => self.step_fifo(g, i),
            Variant::Modified | Variant::ExtraModified => self.step_slot(g, i),
        })
    }

    /// All `n` moves from `g`, in process order. Stutters appear as `g` itself.
    pub fn successors(&self, g: &GlobalState) -> Result<Vec<(usize, Successor)>, ProtocolError> {
        (0..g.n())
            .map(|i| {
                Ok((
                    i,
                    match self.step(g, i)? {
                        StepOutcome::Progress(next) => Successor::State(next),
                        StepOutcome::Stutter => Successor::State(g.clone()),
                        StepOutcome::Overflow => Successor::Overflow,
                    },
                ))
            })
            .collect()
    }

    /// Whether process `i` can make progress.
    pub fn is_enabled(&self, g: &GlobalState, i: usize) -> Result<bool, ProtocolError> {
        Ok(!matches!(self.step(g, i)?, StepOutcome::Stutter))
    }

    pub fn is_quiescent(&self, g: &GlobalState) -> Result<bool, ProtocolError> {
        for i in 0..g.n() {
            if self.is_enabled(g, i)? {
                return Ok(false);
            }
        }
        Ok(true)
    }

    pub fn atom_eval(&self, g: &GlobalState, atom: &Atom) -> Result<bool, ProtocolError> {
        if let Some(i) = atom.max_index() {
            if i >= g.n() {
                return Err(ProtocolError::IndexOutOfRange { index: i, n: g.n() });
            }
        }
        Ok(match *atom {
            Atom::IsLeader(i) => g.nodes[i].pc == Pc::Lead,
            Atom::VidEquals(i, k) => g.nodes[i].vid.0 == k,
            Atom::ModeIs(i, m) => g.nodes[i].mode == m,
            Atom::Quiescent => self.is_quiescent(g)?,
        })
    }

    /// Whether a progress step of process `i` from `g` writes a message into
    /// the successor's inbox.
    pub fn writes_message(&self, g: &GlobalState, i: usize) -> bool {
        let me = &g.nodes[i];
        let sends_id2 = me.id2 != Some(me.vid);
        match (self.variant, me.mode, me.pc) {
            (_, _, Pc::Lead) => false,
            (_, Mode::Active, Pc::S0) => true,
            (Variant::General, Mode::Active, Pc::S2) => sends_id2,
            (Variant::Modified | Variant::ExtraModified, Mode::Active, Pc::S3) => sends_id2,
            (Variant::General | Variant::ExtraModified, Mode::Relay, Pc::S0) => true,
            (Variant::Modified, Mode::Relay, Pc::S1) => true,
            _ => false,
        }
    }

    fn end_phase(&self, me: &mut LocalState) {
        let id2 = me.id2.expect("id2 is set before the phase decision");
        let id3 = me.id3.expect("id3 is set before the phase decision");
        if id2 > me.vid.max(id3) {
            me.vid = id2;
        } else {
            me.mode = Mode::Relay;
        }
        if self.clear_dead_temps {
            me.id2 = None;
            me.id3 = None;
        }
        me.pc = Pc::S0;
    }

    fn step_fifo(&self, g: &GlobalState, i: usize) -> StepOutcome {
        let n = g.n();
        let succ = g.successor_of(i);
        let me = &g.nodes[i];
        let own_nonempty = !me.inbox.is_empty();

        let mut next = g.clone();
        // Send into the successor queue; false when the queue is full.
        let push = |state: &mut GlobalState, v: Uid| -> bool {
            let Inbox::Fifo(q) = &mut state.nodes[succ].inbox else {
                unreachable!("inbox kind checked by step")
            };
            if q.len() >= n {
                return false;
            }
            q.push_back(v);
            true
        };
        let pop = |state: &mut GlobalState| -> Uid {
            let Inbox::Fifo(q) = &mut state.nodes[i].inbox else {
                unreachable!("inbox kind checked by step")
            };
            q.pop_front().expect("pop guarded by nonempty check")
        };

        match (me.mode, me.pc) {
            (_, Pc::Lead) => StepOutcome::Stutter,
            (Mode::Relay, Pc::S0) => {
                if !own_nonempty {
                    return StepOutcome::Stutter;
                }
                let m = pop(&mut next);
                if !push(&mut next, m) {
                    return StepOutcome::Overflow;
                }
                StepOutcome::Progress(next)
            }
            (Mode::Active, Pc::S0) => {
                if !push(&mut next, me.vid) {
                    return StepOutcome::Overflow;
                }
                next.nodes[i].pc = Pc::S1;
                StepOutcome::Progress(next)
            }
            (Mode::Active, Pc::S1) => {
                if !own_nonempty {
                    return StepOutcome::Stutter;
                }
                let m = pop(&mut next);
                next.nodes[i].id2 = Some(m);
                next.nodes[i].pc = Pc::S2;
                StepOutcome::Progress(next)
            }
            (Mode::Active, Pc::S2) => {
                let id2 = me.id2.expect("id2 set at s2");
                if id2 == me.vid {
                    next.nodes[i].pc = Pc::Lead;
                } else {
                    if !push(&mut next, id2) {
                        return StepOutcome::Overflow;
                    }
                    next.nodes[i].pc = Pc::S3;
                }
                StepOutcome::Progress(next)
            }
            (Mode::Active, Pc::S3) => {
                if !own_nonempty {
                    return StepOutcome::Stutter;
                }
                let m = pop(&mut next);
                next.nodes[i].id3 = Some(m);
                next.nodes[i].pc = Pc::S4;
                StepOutcome::Progress(next)
            }
            (Mode::Active, Pc::S4) => {
                self.end_phase(&mut next.nodes[i]);
                StepOutcome::Progress(next)
            }
            // Not reachable for this variant; treated as blocked.
            _ => StepOutcome::Stutter,
        }
    }

    fn step_slot(&self, g: &GlobalState, i: usize) -> StepOutcome {
        let succ = g.successor_of(i);
        let me = &g.nodes[i];
        let own = slot(&g.nodes[i]);
        let succ_free = slot(&g.nodes[succ]).is_none();
        let fused = self.variant == Variant::ExtraModified;

        let mut next = g.clone();
        match (me.mode, me.pc) {
            (_, Pc::Lead) => StepOutcome::Stutter,
            (Mode::Relay, Pc::S0) if fused => match own {
                Some(m) if succ_free => {
                    set_slot(&mut next.nodes[succ], Some(m));
                    set_slot(&mut next.nodes[i], None);
                    StepOutcome::Progress(next)
                }
                _ => StepOutcome::Stutter,
            },
            (Mode::Relay, Pc::S0) => match own {
                Some(m) => {
                    let node = &mut next.nodes[i];
                    node.vid = m;
                    set_slot(node, None);
                    node.pc = Pc::S1;
                    StepOutcome::Progress(next)
                }
                None => StepOutcome::Stutter,
            },
            (Mode::Relay, Pc::S1) if !fused => {
                if !succ_free {
                    return StepOutcome::Stutter;
                }
                set_slot(&mut next.nodes[succ], Some(me.vid));
                next.nodes[i].pc = Pc::S0;
                StepOutcome::Progress(next)
            }
            (Mode::Active, Pc::S0) => {
                if !succ_free {
                    return StepOutcome::Stutter;
                }
                set_slot(&mut next.nodes[succ], Some(me.vid));
                next.nodes[i].pc = Pc::S2;
                StepOutcome::Progress(next)
            }
            (Mode::Active, Pc::S2) => match own {
                Some(m) => {
                    let node = &mut next.nodes[i];
                    node.id2 = Some(m);
                    set_slot(node, None);
                    node.pc = Pc::S3;
                    StepOutcome::Progress(next)
                }
                None => StepOutcome::Stutter,
            },
            (Mode::Active, Pc::S3) => {
                let id2 = me.id2.expect("id2 set at s3");
                if id2 == me.vid {
                    next.nodes[i].pc = Pc::Lead;
                } else {
                    if !succ_free {
                        return StepOutcome::Stutter;
                    }
                    set_slot(&mut next.nodes[succ], Some(id2));
                    next.nodes[i].pc = Pc::S4;
                }
                StepOutcome::Progress(next)
            }
            (Mode::Active, Pc::S4) => match own {
                Some(m) => {
                    let node = &mut next.nodes[i];
                    node.id3 = Some(m);
                    set_slot(node, None);
                    if fused {
                        self.end_phase(node);
                    } else {
                        node.pc = Pc::S5;
                    }
                    StepOutcome::Progress(next)
                }
                None => StepOutcome::Stutter,
            },
            (Mode::Active, Pc::S5) if !fused => {
                self.end_phase(&mut next.nodes[i]);
                StepOutcome::Progress(next)
            }
            _ => StepOutcome::Stutter,
        }
    }
}

fn slot(node: &LocalState) -> Option<Uid> {
    match node.inbox {
        Inbox::Slot(s) => s,
        Inbox::Fifo(_) => unreachable!("inbox kind checked by step"),
    }
}

fn set_slot(node: &mut LocalState, v: Option<Uid>) {
    node.inbox = Inbox::Slot(v);
}

pub fn validate_uids(uids: &[Uid]) -> Result<(), ProtocolError> {
    let n = uids.len();
    if n == 0 {
        return Err(ProtocolError::EmptyRing);
    }
    if n > MAX_RING_SIZE {
        return Err(ProtocolError::RingTooLarge(n));
    }
    let mut seen = vec![false; n];
    for &u in uids {
        let k = u.0 as usize;
        if k >= n {
            return Err(ProtocolError::UidOutOfRange { uid: u, n });
        }
        if seen[k] {
            return Err(ProtocolError::DuplicateUid(u));
        }
        seen[k] = true;
    }
    Ok(())
}

/// `[0, 1, .., n-1]`.
pub fn identity_uids(n: usize) -> Vec<Uid> {
    (0..n).map(|k| Uid(k as u8)).collect()
}

pub fn uids_from(values: &[u8]) -> Vec<Uid> {
    values.iter().copied().map(Uid).collect()
}

pub fn initial_state(variant: Variant, uids: &[Uid]) -> Result<GlobalState, ProtocolError> {
    Protocol::new(variant).initial_state(uids)
}

pub fn step(variant: Variant, g: &GlobalState, i: usize) -> Result<StepOutcome, ProtocolError> {
    Protocol::new(variant).step(g, i)
}

pub fn successors(
    variant: Variant,
    g: &GlobalState,
) -> Result<Vec<(usize, Successor)>, ProtocolError> {
    Protocol::new(variant).successors(g)
}

pub fn canonical_encode(variant: Variant, g: &GlobalState) -> Vec<u8> {
    Protocol::new(variant).encode(g)
}
