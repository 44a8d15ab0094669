//! SMV model text for a ring: one asynchronous process per node, process
//! fairness and the three builtin properties.
//!
//! The node program is described once as a table of guarded [`Rule`]s. The
//! same table renders the `next()` case blocks and can be executed against a
//! [`GlobalState`], which is how the text is kept in step with
//! [`Protocol::step`].

use crate::ctl::{builtin_properties, Formula, MaxUid};
use crate::protocol::{
    validate_uids, Atom, GlobalState, Inbox, Mode, Pc, Protocol, ProtocolError, StepOutcome, Uid, Variant,
};
use std::fmt::Write as _;
use thiserror::Error;

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum SmvError {
    #[error(transparent)]
    Protocol(#[from] ProtocolError),
    #[error("atom `{0}` has no SMV rendering")]
    UnsupportedAtom(Atom),
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct SmvModel {
    pub variant: Variant,
    pub n: usize,
    pub uids: Vec<Uid>,
    pub text: String,
}

impl SmvModel {
    pub fn file_name(&self) -> String {
        format!("{}_{}.smv", self.variant.name(), self.n)
    }
}

/// Value read by a rule, evaluated in the pre-state.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Val {
    Vid,
    Id2,
    Id3,
    /// Oldest message in the node's own inbox.
    Head,
    Unset,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Cond {
    Mode(Mode),
    Pc(Pc),
    OwnEmpty(bool),
    SuccHasRoom(bool),
    Id2IsVid(bool),
    /// `id2 > vid & id2 > against`, or its negation.
    Wins { against: Val, holds: bool },
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Effect {
    SetVid(Val),
    SetMode(Mode),
    SetPc(Pc),
    SetId2(Val),
    SetId3(Val),
    Send(Val),
    Consume,
    /// The send would exceed queue capacity.
    Overflow,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Rule {
    pub guard: Vec<Cond>,
    pub effects: Vec<Effect>,
}

fn rule(guard: &[Cond], effects: &[Effect]) -> Rule {
    Rule {
        guard: guard.to_vec(),
        effects: effects.to_vec(),
    }
}

/// Guarded commands of one node. Guards are pairwise exclusive; a node with
/// no enabled rule stutters.
pub fn node_rules(protocol: Protocol) -> Vec<Rule> {
    use Cond::*;
    use Effect::*;
    let active = Mode(crate::protocol::Mode::Active);
    let relay = Mode(crate::protocol::Mode::Relay);
    let clear: &[Effect] = if protocol.clear_dead_temps {
        &[SetId2(Val::Unset), SetId3(Val::Unset)]
    } else {
        &[]
    };
    let decide = |pc: crate::protocol::Pc, extra: &[Cond], against: Val, pre: &[Effect]| -> Vec<Rule> {
        let mut base = vec![active, Pc(pc)];
        base.extend_from_slice(extra);
        let mut win = base.clone();
        win.push(Wins { against, holds: true });
        let mut lose = base;
        lose.push(Wins { against, holds: false });
        let mut we = pre.to_vec();
        we.push(SetVid(Val::Id2));
        we.extend_from_slice(clear);
        we.push(SetPc(crate::protocol::Pc::S0));
        let mut le = pre.to_vec();
        le.push(SetMode(crate::protocol::Mode::Relay));
        le.extend_from_slice(clear);
        le.push(SetPc(crate::protocol::Pc::S0));
        vec![
            Rule { guard: win, effects: we },
            Rule { guard: lose, effects: le },
        ]
    };
    use crate::protocol::Pc::*;
    let mut rules = Vec::new();
    match protocol.variant {
        Variant::General => {
            rules.push(rule(&[relay, Pc(S0), OwnEmpty(false), SuccHasRoom(true)], &[Consume, Send(Val::Head)]));
            rules.push(rule(&[relay, Pc(S0), OwnEmpty(false), SuccHasRoom(false)], &[Overflow]));
            rules.push(rule(&[active, Pc(S0), SuccHasRoom(true)], &[Send(Val::Vid), SetPc(S1)]));
            rules.push(rule(&[active, Pc(S0), SuccHasRoom(false)], &[Overflow]));
            rules.push(rule(&[active, Pc(S1), OwnEmpty(false)], &[SetId2(Val::Head), Consume, SetPc(S2)]));
            rules.push(rule(&[active, Pc(S2), Id2IsVid(true)], &[SetPc(Lead)]));
            rules.push(rule(&[active, Pc(S2), Id2IsVid(false), SuccHasRoom(true)], &[Send(Val::Id2), SetPc(S3)]));
            rules.push(rule(&[active, Pc(S2), Id2IsVid(false), SuccHasRoom(false)], &[Overflow]));
            rules.push(rule(&[active, Pc(S3), OwnEmpty(false)], &[SetId3(Val::Head), Consume, SetPc(S4)]));
            rules.extend(decide(S4, &[], Val::Id3, &[]));
        }
        Variant::Modified => {
            rules.push(rule(&[relay, Pc(S0), OwnEmpty(false)], &[SetVid(Val::Head), Consume, SetPc(S1)]));
            rules.push(rule(&[relay, Pc(S1), SuccHasRoom(true)], &[Send(Val::Vid), SetPc(S0)]));
            rules.push(rule(&[active, Pc(S0), SuccHasRoom(true)], &[Send(Val::Vid), SetPc(S2)]));
            rules.push(rule(&[active, Pc(S2), OwnEmpty(false)], &[SetId2(Val::Head), Consume, SetPc(S3)]));
            rules.push(rule(&[active, Pc(S3), Id2IsVid(true)], &[SetPc(Lead)]));
            rules.push(rule(&[active, Pc(S3), Id2IsVid(false), SuccHasRoom(true)], &[Send(Val::Id2), SetPc(S4)]));
            rules.push(rule(&[active, Pc(S4), OwnEmpty(false)], &[SetId3(Val::Head), Consume, SetPc(S5)]));
            rules.extend(decide(S5, &[], Val::Id3, &[]));
        }
        Variant::ExtraModified => {
            rules.push(rule(&[relay, Pc(S0), OwnEmpty(false), SuccHasRoom(true)], &[Send(Val::Head), Consume]));
            rules.push(rule(&[active, Pc(S0), SuccHasRoom(true)], &[Send(Val::Vid), SetPc(S2)]));
            rules.push(rule(&[active, Pc(S2), OwnEmpty(false)], &[SetId2(Val::Head), Consume, SetPc(S3)]));
            rules.push(rule(&[active, Pc(S3), Id2IsVid(true)], &[SetPc(Lead)]));
            rules.push(rule(&[active, Pc(S3), Id2IsVid(false), SuccHasRoom(true)], &[Send(Val::Id2), SetPc(S4)]));
            let pre: &[Effect] = if protocol.clear_dead_temps {
                &[Consume]
            } else {
                &[SetId3(Val::Head), Consume]
            };
            rules.extend(decide(S4, &[OwnEmpty(false)], Val::Head, pre));
        }
    }
    rules
}

const UNSET: i16 = -1;

fn to_num(v: Option<Uid>) -> i16 {
    v.map_or(UNSET, |u| i16::from(u.0))
}

fn to_opt(v: i16) -> Option<Uid> {
    (v >= 0).then(|| Uid(v as u8))
}

fn capacity(variant: Variant, n: usize) -> usize {
    if variant.uses_fifo() {
        n
    } else {
        1
    }
}

impl Rule {
    fn value(g: &GlobalState, i: usize, v: Val) -> i16 {
        let me = g.node(i);
        match v {
            Val::Vid => i16::from(me.vid.0),
            Val::Id2 => to_num(me.id2),
            Val::Id3 => to_num(me.id3),
            Val::Head => to_num(me.inbox.contents().first().copied()),
            Val::Unset => UNSET,
        }
    }

    /// Whether the guard holds for process `i` in `g`.
    pub fn enabled(&self, variant: Variant, g: &GlobalState, i: usize) -> bool {
        let me = g.node(i);
        let succ = g.node(g.successor_of(i));
        self.guard.iter().all(|c| match *c {
            Cond::Mode(m) => me.mode == m,
            Cond::Pc(p) => me.pc == p,
            Cond::OwnEmpty(b) => me.inbox.is_empty() == b,
            Cond::SuccHasRoom(b) => (succ.inbox.len() < capacity(variant, g.n())) == b,
            Cond::Id2IsVid(b) => (me.id2 == Some(me.vid)) == b,
            Cond::Wins { against, holds } => {
                let id2 = Self::value(g, i, Val::Id2);
                let vid = Self::value(g, i, Val::Vid);
                (id2 > vid && id2 > Self::value(g, i, against)) == holds
            }
        })
    }

    /// Executes the effects in order, reading every value from `g`.
    pub fn apply(&self, g: &GlobalState, i: usize) -> StepOutcome {
        let succ = g.successor_of(i);
        let mut next = g.clone();
        for e in &self.effects {
            match *e {
                Effect::SetVid(v) => next.node_mut(i).vid = Uid(Self::value(g, i, v) as u8),
                Effect::SetMode(m) => next.node_mut(i).mode = m,
                Effect::SetPc(p) => next.node_mut(i).pc = p,
                Effect::SetId2(v) => next.node_mut(i).id2 = to_opt(Self::value(g, i, v)),
                Effect::SetId3(v) => next.node_mut(i).id3 = to_opt(Self::value(g, i, v)),
                Effect::Send(v) => {
                    let m = to_opt(Self::value(g, i, v)).expect("sent values are set");
                    match &mut next.node_mut(succ).inbox {
                        Inbox::Slot(s) => *s = Some(m),
                        Inbox::Fifo(q) => q.push_back(m),
                    }
                }
                Effect::Consume => match &mut next.node_mut(i).inbox {
                    Inbox::Slot(s) => *s = None,
                    Inbox::Fifo(q) => {
                        q.pop_front();
                    }
                },
                Effect::Overflow => return StepOutcome::Overflow,
            }
        }
        StepOutcome::Progress(next)
    }
}

/// Variable naming for one ring size. With a single node the own and the
/// successor inbox coincide and only the own names are used.
struct Names {
    n: usize,
    fifo: bool,
}

impl Names {
    fn merged(&self) -> bool {
        self.n == 1
    }

    fn succ(&self, own: &str) -> String {
        if self.merged() {
            own.to_string()
        } else {
            own.replacen("my", "next", 1)
        }
    }

    fn params(&self) -> Vec<String> {
        let mut p = vec!["uid".to_string()];
        if self.fifo {
            let own: Vec<String> = (0..self.n)
                .map(|k| format!("mybuf{k}"))
                .chain(["myrp".into(), "mycnt".into()])
                .collect();
            p.extend(own);
            if self.merged() {
                p.insert(p.len() - 1, "mywp".into());
            } else {
                p.extend((0..self.n).map(|k| format!("nextbuf{k}")));
                p.extend(["nextwp".into(), "nextcnt".into()]);
            }
        } else {
            p.push("myinput".into());
            if !self.merged() {
                p.push("nextinput".into());
            }
        }
        p
    }

    fn own_empty(&self, empty: bool) -> String {
        match (self.fifo, empty) {
            (true, true) => "mycnt = 0".into(),
            (true, false) => "mycnt > 0".into(),
            (false, true) => "myinput = -1".into(),
            (false, false) => "myinput != -1".into(),
        }
    }

    fn succ_room(&self, room: bool) -> String {
        match (self.fifo, room) {
            (true, true) => format!("{} < {}", self.succ("mycnt"), self.n),
            (true, false) => format!("{} = {}", self.succ("mycnt"), self.n),
            (false, true) => format!("{} = -1", self.succ("myinput")),
            (false, false) => format!("{} != -1", self.succ("myinput")),
        }
    }

    fn val(&self, v: Val) -> String {
        match v {
            Val::Vid => "vid".into(),
            Val::Id2 => "id2".into(),
            Val::Id3 => "id3".into(),
            Val::Head if self.fifo => "head".into(),
            Val::Head => "myinput".into(),
            Val::Unset => "-1".into(),
        }
    }

    fn cond(&self, c: Cond) -> String {
        match c {
            Cond::Mode(m) => format!("mode = {m}"),
            Cond::Pc(p) => format!("pc = {p}"),
            Cond::OwnEmpty(b) => self.own_empty(b),
            Cond::SuccHasRoom(b) => self.succ_room(b),
            Cond::Id2IsVid(true) => "id2 = vid".into(),
            Cond::Id2IsVid(false) => "id2 != vid".into(),
            Cond::Wins { against, holds } => {
                let w = format!("(id2 > vid & id2 > {})", self.val(against));
                if holds {
                    w
                } else {
                    format!("!{w}")
                }
            }
        }
    }

    /// `(variable, extra guard, value)` triples of one effect.
    fn assigns(&self, e: Effect) -> Vec<(String, Option<String>, String)> {
        let n = self.n;
        match e {
            Effect::SetVid(v) => vec![("vid".into(), None, self.val(v))],
            Effect::SetMode(m) => vec![("mode".into(), None, m.to_string())],
            Effect::SetPc(p) => vec![("pc".into(), None, p.to_string())],
            Effect::SetId2(v) => vec![("id2".into(), None, self.val(v))],
            Effect::SetId3(v) => vec![("id3".into(), None, self.val(v))],
            Effect::Overflow => vec![("pc".into(), None, "ovf".into())],
            Effect::Send(v) if self.fifo => {
                let wp = self.succ("mywp");
                let cnt = self.succ("mycnt");
                let mut out: Vec<_> = (0..n)
                    .map(|k| (self.succ(&format!("mybuf{k}")), Some(format!("{wp} = {k}")), self.val(v)))
                    .collect();
                out.push((wp.clone(), None, format!("({wp} + 1) mod {n}")));
                out.push((cnt.clone(), None, format!("{cnt} + 1")));
                out
            }
            Effect::Send(v) => vec![(self.succ("myinput"), None, self.val(v))],
            Effect::Consume if self.fifo => vec![
                ("myrp".into(), None, format!("(myrp + 1) mod {n}")),
                ("mycnt".into(), None, "mycnt - 1".into()),
            ],
            Effect::Consume => vec![("myinput".into(), None, "-1".into())],
        }
    }
}

fn node_module(protocol: Protocol, n: usize) -> String {
    let names = Names {
        n,
        fifo: protocol.variant.uses_fifo(),
    };
    let top = n - 1;
    let mut pcs: Vec<String> = protocol.variant.pcs().iter().map(|p| p.to_string()).collect();
    if names.fifo {
        pcs.push("ovf".into());
    }
    let mut rules = node_rules(protocol);
    if names.merged() {
        rules.retain(|r| !r.guard.contains(&Cond::Mode(Mode::Relay)));
    }

    // Case arms per assigned variable, in first-assignment order after the
    // node-local variables.
    let mut vars: Vec<String> = ["vid", "mode", "pc", "id2", "id3"].map(String::from).to_vec();
    let mut arms: Vec<Vec<(String, String)>> = vec![Vec::new(); vars.len()];
    for r in &rules {
        let guard: Vec<String> = r.guard.iter().map(|c| names.cond(*c)).collect();
        for e in &r.effects {
            for (var, extra, value) in names.assigns(*e) {
                let k = match vars.iter().position(|v| *v == var) {
                    Some(k) => k,
                    None => {
                        vars.push(var);
                        arms.push(Vec::new());
                        vars.len() - 1
                    }
                };
                let mut g = guard.clone();
                g.extend(extra);
                arms[k].push((g.join(" & "), value));
            }
        }
    }

    let mut s = String::new();
    writeln!(s, "MODULE node({})", names.params().join(", ")).unwrap();
    writeln!(s, "VAR").unwrap();
    writeln!(s, "  vid : 0..{top};").unwrap();
    writeln!(s, "  mode : {{active, relay}};").unwrap();
    writeln!(s, "  pc : {{{}}};", pcs.join(", ")).unwrap();
    writeln!(s, "  id2 : -1..{top};").unwrap();
    writeln!(s, "  id3 : -1..{top};").unwrap();
    if names.fifo {
        writeln!(s, "DEFINE").unwrap();
        if n == 1 {
            writeln!(s, "  head := mybuf0;").unwrap();
        } else {
            writeln!(s, "  head :=").unwrap();
            writeln!(s, "    case").unwrap();
            for k in 0..n - 1 {
                writeln!(s, "      myrp = {k} : mybuf{k};").unwrap();
            }
            writeln!(s, "      TRUE : mybuf{top};").unwrap();
            writeln!(s, "    esac;").unwrap();
        }
    }
    writeln!(s, "ASSIGN").unwrap();
    writeln!(s, "  init(vid) := uid;").unwrap();
    writeln!(s, "  init(mode) := active;").unwrap();
    writeln!(s, "  init(pc) := s0;").unwrap();
    writeln!(s, "  init(id2) := -1;").unwrap();
    writeln!(s, "  init(id3) := -1;").unwrap();
    for (var, cases) in vars.iter().zip(&arms) {
        if cases.is_empty() {
            writeln!(s, "  next({var}) := {var};").unwrap();
            continue;
        }
        writeln!(s, "  next({var}) :=").unwrap();
        writeln!(s, "    case").unwrap();
        for (guard, value) in cases {
            writeln!(s, "      {guard} : {value};").unwrap();
        }
        writeln!(s, "      TRUE : {var};").unwrap();
        writeln!(s, "    esac;").unwrap();
    }
    s
}

/// Renders a formula over node atoms; instance `i` is named `n{i}`.
pub fn render_formula(f: &Formula) -> Result<String, SmvError> {
    let r = render_formula;
    Ok(match f {
        Formula::True => "TRUE".into(),
        Formula::False => "FALSE".into(),
        Formula::Atom(a) => match *a {
            Atom::IsLeader(i) => format!("(n{i}.pc = lead)"),
            Atom::VidEquals(i, k) => format!("(n{i}.vid = {k})"),
            Atom::ModeIs(i, m) => format!("(n{i}.mode = {m})"),
            Atom::Quiescent => return Err(SmvError::UnsupportedAtom(*a)),
        },
        Formula::Not(a) => format!("!{}", r(a)?),
        Formula::And(a, b) => format!("({} & {})", r(a)?, r(b)?),
        Formula::Or(a, b) => format!("({} | {})", r(a)?, r(b)?),
        Formula::Implies(a, b) => format!("({} -> {})", r(a)?, r(b)?),
        Formula::EX(a) => format!("EX {}", r(a)?),
        Formula::EG(a) => format!("EG {}", r(a)?),
        Formula::EF(a) => format!("EF {}", r(a)?),
        Formula::AX(a) => format!("AX {}", r(a)?),
        Formula::AG(a) => format!("AG {}", r(a)?),
        Formula::AF(a) => format!("AF {}", r(a)?),
        Formula::EU(a, b) => format!("E [{} U {}]", r(a)?, r(b)?),
        Formula::AU(a, b) => format!("A [{} U {}]", r(a)?, r(b)?),
    })
}

fn inbox_vars(fifo: bool, n: usize, i: usize) -> Vec<String> {
    if fifo {
        (0..n)
            .map(|k| format!("q{i}_b{k}"))
            .chain([format!("q{i}_rp"), format!("q{i}_wp"), format!("q{i}_cnt")])
            .collect()
    } else {
        vec![format!("in{i}")]
    }
}

pub fn emit_smv(protocol: impl Into<Protocol>, uids: &[Uid]) -> Result<SmvModel, SmvError> {
    let protocol = protocol.into();
    validate_uids(uids)?;
    let n = uids.len();
    let top = n - 1;
    let fifo = protocol.variant.uses_fifo();
    let uid_list = uids.iter().map(|u| u.to_string()).collect::<Vec<_>>().join(",");

    let mut s = String::new();
    writeln!(s, "-- ringcheck model: variant={} n={n} uids={uid_list}", protocol.variant).unwrap();
    writeln!(s, "-- node i writes the inbox of node (i + 1) mod {n}; -1 marks an unset value").unwrap();
    if !protocol.clear_dead_temps {
        writeln!(s, "-- id2/id3 keep their values across phases").unwrap();
    }
    if n == 1 {
        writeln!(s, "-- single node: own and successor inbox coincide, relay mode is unreachable").unwrap();
    }
    writeln!(s).unwrap();
    s.push_str(&node_module(protocol, n));
    writeln!(s).unwrap();

    writeln!(s, "MODULE main").unwrap();
    writeln!(s, "VAR").unwrap();
    for i in 0..n {
        for v in inbox_vars(fifo, n, i) {
            let ty = if v.ends_with("_rp") || v.ends_with("_wp") {
                format!("0..{top}")
            } else if v.ends_with("_cnt") {
                format!("0..{n}")
            } else {
                format!("-1..{top}")
            };
            writeln!(s, "  {v} : {ty};").unwrap();
        }
    }
    for (i, uid) in uids.iter().enumerate() {
        let own = inbox_vars(fifo, n, i);
        let mut args = vec![uid.to_string()];
        if fifo {
            // own buffers, read index, [write index if merged], count
            args.extend(own[..n].iter().cloned());
            args.push(own[n].clone());
            if n == 1 {
                args.push(own[n + 1].clone());
            }
            args.push(own[n + 2].clone());
            if n > 1 {
                let next = inbox_vars(fifo, n, (i + 1) % n);
                args.extend(next[..n].iter().cloned());
                args.push(next[n + 1].clone());
                args.push(next[n + 2].clone());
            }
        } else {
            args.push(own[0].clone());
            if n > 1 {
                args.push(format!("in{}", (i + 1) % n));
            }
        }
        writeln!(s, "  n{i} : process node({});", args.join(", ")).unwrap();
    }
    writeln!(s, "ASSIGN").unwrap();
    for i in 0..n {
        for v in inbox_vars(fifo, n, i) {
            let init = if v.starts_with('q') && !v.contains("_b") { "0" } else { "-1" };
            writeln!(s, "  init({v}) := {init};").unwrap();
        }
    }
    writeln!(s).unwrap();
    for i in 0..n {
        writeln!(s, "FAIRNESS n{i}.running").unwrap();
    }
    writeln!(s).unwrap();
    let max = MaxUid::of(uids).expect("ring is nonempty");
    for p in builtin_properties(n, max) {
        writeln!(s, "-- {}: {}", p.name, p.description).unwrap();
        writeln!(s, "SPEC {}", render_formula(&p.formula)?).unwrap();
    }

    Ok(SmvModel {
        variant: protocol.variant,
        n,
        uids: uids.to_vec(),
        text: s,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::protocol::{identity_uids, uids_from};
    use crate::statespace::{explore, ExploreLimits};

    #[test]
    fn modified_three_structure() {
        let m = emit_smv(Variant::Modified, &uids_from(&[0, 1, 2])).unwrap();
        assert_eq!(m.text.matches(": process node(").count(), 3);
        assert_eq!(m.text.lines().filter(|l| l.starts_with("SPEC ")).count(), 3);
        assert_eq!(m.text.lines().filter(|l| l.starts_with("FAIRNESS ")).count(), 3);
        let p3 = m.text.lines().filter(|l| l.starts_with("SPEC AG")).next().unwrap();
        assert!(p3.contains("(n0.vid = 2)") && p3.contains("(n2.vid = 2)"));
        assert_eq!(m.file_name(), "modified_3.smv");
        assert_eq!(m, emit_smv(Variant::Modified, &uids_from(&[0, 1, 2])).unwrap());
    }

    #[test]
    fn empty_ring_rejected() {
        assert_eq!(
            emit_smv(Variant::General, &[]),
            Err(SmvError::Protocol(ProtocolError::EmptyRing))
        );
    }

    #[test]
    fn single_node_property_two_is_false() {
        for v in Variant::ALL {
            let m = emit_smv(v, &uids_from(&[0])).unwrap();
            assert!(m.text.contains("SPEC EF FALSE"));
            assert!(!m.text.contains("nextinput") && !m.text.contains("nextcnt"));
        }
    }

    fn next_block<'a>(text: &'a str, var: &str) -> Vec<&'a str> {
        let head = format!("  next({var}) :=");
        let mut lines = text.lines().skip_while(|l| *l != head).skip(2);
        let mut out = Vec::new();
        for l in lines.by_ref() {
            if l.trim() == "esac;" {
                break;
            }
            out.push(l.trim());
        }
        out
    }

    #[test]
    fn modified_two_step_table_golden() {
        let m = emit_smv(Variant::Modified, &identity_uids(2)).unwrap();
        assert_eq!(
            next_block(&m.text, "pc"),
            [
                "mode = relay & pc = s0 & myinput != -1 : s1;",
                "mode = relay & pc = s1 & nextinput = -1 : s0;",
                "mode = active & pc = s0 & nextinput = -1 : s2;",
                "mode = active & pc = s2 & myinput != -1 : s3;",
                "mode = active & pc = s3 & id2 = vid : lead;",
                "mode = active & pc = s3 & id2 != vid & nextinput = -1 : s4;",
                "mode = active & pc = s4 & myinput != -1 : s5;",
                "mode = active & pc = s5 & (id2 > vid & id2 > id3) : s0;",
                "mode = active & pc = s5 & !(id2 > vid & id2 > id3) : s0;",
                "TRUE : pc;",
            ]
        );
        assert_eq!(
            next_block(&m.text, "vid"),
            [
                "mode = relay & pc = s0 & myinput != -1 : myinput;",
                "mode = active & pc = s5 & (id2 > vid & id2 > id3) : id2;",
                "TRUE : vid;",
            ]
        );
        assert_eq!(
            next_block(&m.text, "nextinput"),
            [
                "mode = relay & pc = s1 & nextinput = -1 : vid;",
                "mode = active & pc = s0 & nextinput = -1 : vid;",
                "mode = active & pc = s3 & id2 != vid & nextinput = -1 : id2;",
                "TRUE : nextinput;",
            ]
        );
        assert!(m.text.contains("  n0 : process node(0, in0, in1);\n  n1 : process node(1, in1, in0);\n"));
    }

    /// Every reachable state and process: at most one rule fires, and it
    /// fires exactly when the step is not a stutter, with the same result.
    fn assert_mirror(protocol: Protocol, uids: &[Uid]) {
        let rules = node_rules(protocol);
        let graph = explore(protocol, uids, ExploreLimits::default()).unwrap().graph;
        for id in 0..graph.len() as u32 {
            let Some(g) = graph.state(id) else { continue };
            for i in 0..g.n() {
                let fired: Vec<&Rule> = rules.iter().filter(|r| r.enabled(protocol.variant, &g, i)).collect();
                assert!(fired.len() <= 1, "overlapping guards at {g} for {i}");
                let expected = protocol.step(&g, i).unwrap();
                match fired.first() {
                    None => assert_eq!(expected, StepOutcome::Stutter, "{g} process {i}"),
                    Some(r) => assert_eq!(r.apply(&g, i), expected, "{g} process {i}"),
                }
            }
        }
    }

    #[test]
    fn rule_table_mirrors_step() {
        for v in Variant::ALL {
            for n in 1..=4 {
                assert_mirror(Protocol::new(v), &identity_uids(n));
                let rev: Vec<Uid> = identity_uids(n).into_iter().rev().collect();
                assert_mirror(Protocol::new(v).with_dead_temp_clearing(false), &rev);
            }
        }
    }

    #[test]
    fn full_queue_rules_report_overflow() {
        let p = Protocol::new(Variant::General);
        let mut g = p.initial_state(&identity_uids(2)).unwrap();
        g.node_mut(1).inbox = Inbox::Fifo([Uid(0), Uid(1)].into_iter().collect());
        let rules = node_rules(p);
        let r = rules.iter().find(|r| r.enabled(p.variant, &g, 0)).unwrap();
        assert_eq!(r.apply(&g, 0), StepOutcome::Overflow);
        assert_eq!(p.step(&g, 0).unwrap(), StepOutcome::Overflow);
    }
}
