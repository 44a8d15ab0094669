use super::scc::{components, Components, NO_COMPONENT};
use super::{CtlError, Fairness, Formula, Kripke, StateSet};
use crate::statespace::{StateId, Trace};
use std::cell::OnceCell;
use std::collections::VecDeque;

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct CheckResult {
    /// Whether the initial state satisfies the formula.
    pub holds: bool,
    /// Finite witness or counterexample path, or a lasso for `EG`-shaped
    /// evidence (a failing `AF`, a holding `EG`).
    pub evidence: Option<Trace>,
    pub sat_count: usize,
}

/// Evaluates formulas over one graph, caching the predecessor relation and
/// the fair-state set between calls.
pub struct Checker<'g, G: Kripke> {
    graph: &'g G,
    pred_offsets: Vec<u32>,
    preds: Vec<StateId>,
    self_loops: StateSet,
    fair: OnceCell<StateSet>,
}

/// Checks `f` at the initial state of `graph`.
pub fn check<G: Kripke>(
    graph: &G,
    f: &Formula<G::Atom>,
    fairness: Fairness,
) -> Result<CheckResult, CtlError> {
    Ok(Checker::new(graph)?.check(f, fairness))
}

/// States from which some path runs every label infinitely often.
pub fn fair_states<G: Kripke>(graph: &G) -> Result<StateSet, CtlError> {
    Ok(Checker::new(graph)?.fair_states().clone())
}

impl<'g, G: Kripke> Checker<'g, G> {
    pub fn new(graph: &'g G) -> Result<Self, CtlError> {
        if !graph.is_complete() {
            return Err(CtlError::TruncatedGraph);
        }
        let n = graph.num_states();
        let mut self_loops = StateSet::with_capacity(n);
        // Distinct non-loop predecessors, in CSR form.
        let mut counts = vec![0u32; n + 1];
        let mut targets = Vec::new();
        for s in 0..n as StateId {
            distinct_targets(graph, s, &mut targets);
            for &t in &targets {
                if t == s {
                    self_loops.insert(s as usize);
                } else {
                    counts[t as usize + 1] += 1;
                }
            }
        }
        for i in 0..n {
            counts[i + 1] += counts[i];
        }
        let mut fill = counts.clone();
        let mut preds = vec![0 as StateId; counts[n] as usize];
        for s in 0..n as StateId {
            distinct_targets(graph, s, &mut targets);
            for &t in &targets {
                if t != s {
                    let slot = &mut fill[t as usize];
                    preds[*slot as usize] = s;
                    *slot += 1;
                }
            }
        }
        Ok(Checker {
            graph,
            pred_offsets: counts,
            preds,
            self_loops,
            fair: OnceCell::new(),
        })
    }

    fn n(&self) -> usize {
        self.graph.num_states()
    }

    fn preds_of(&self, t: StateId) -> &[StateId] {
        let lo = self.pred_offsets[t as usize] as usize;
        let hi = self.pred_offsets[t as usize + 1] as usize;
        &self.preds[lo..hi]
    }

    fn full(&self) -> StateSet {
        let mut s = StateSet::with_capacity(self.n());
        s.insert_range(..);
        s
    }

    fn complement(&self, s: &StateSet) -> StateSet {
        let mut c = s.clone();
        c.toggle_range(..);
        c
    }

    pub fn fair_states(&self) -> &StateSet {
        self.fair.get_or_init(|| {
            let all = self.full();
            self.eg_fair(&all)
        })
    }

    pub fn check(&self, f: &Formula<G::Atom>, fairness: Fairness) -> CheckResult {
        let sat = self.sat(f, fairness);
        let init = self.graph.initial();
        let holds = sat.contains(init as usize);
        let evidence = self.evidence(f, fairness, holds);
        CheckResult {
            holds,
            evidence,
            sat_count: sat.count_ones(..),
        }
    }

    /// States satisfying `f`.
    pub fn sat(&self, f: &Formula<G::Atom>, fairness: Fairness) -> StateSet {
        use Formula::*;
        let fair = fairness == Fairness::RunningAll;
        match f {
            True => self.full(),
            False => StateSet::with_capacity(self.n()),
            Atom(a) => {
                let mut s = StateSet::with_capacity(self.n());
                for id in 0..self.n() {
                    if self.graph.atom_holds(id as StateId, a) {
                        s.insert(id);
                    }
                }
                s
            }
            Not(x) => self.complement(&self.sat(x, fairness)),
            And(a, b) => {
                let mut s = self.sat(a, fairness);
                s.intersect_with(&self.sat(b, fairness));
                s
            }
            Or(a, b) => {
                let mut s = self.sat(a, fairness);
                s.union_with(&self.sat(b, fairness));
                s
            }
            Implies(a, b) => {
                let mut s = self.complement(&self.sat(a, fairness));
                s.union_with(&self.sat(b, fairness));
                s
            }
            EX(x) => {
                let target = self.restrict_fair(self.sat(x, fairness), fair);
                self.pre(&target)
            }
            EU(a, b) => {
                let within = self.sat(a, fairness);
                let target = self.restrict_fair(self.sat(b, fairness), fair);
                self.eu(&within, target)
            }
            EF(x) => {
                let target = self.restrict_fair(self.sat(x, fairness), fair);
                self.eu(&self.full(), target)
            }
            EG(x) => self.eg(&self.sat(x, fairness), fair),
            AX(x) => {
                let neg = self.restrict_fair(self.complement(&self.sat(x, fairness)), fair);
                self.complement(&self.pre(&neg))
            }
            AG(x) => {
                let neg = self.restrict_fair(self.complement(&self.sat(x, fairness)), fair);
                self.complement(&self.eu(&self.full(), neg))
            }
            AF(x) => {
                let neg = self.complement(&self.sat(x, fairness));
                self.complement(&self.eg(&neg, fair))
            }
            AU(a, b) => {
                // A[a U b] = !(E[!b U (!a & !b)] | EG !b)
                let not_b = self.complement(&self.sat(b, fairness));
                let mut stuck = self.complement(&self.sat(a, fairness));
                stuck.intersect_with(&not_b);
                let stuck = self.restrict_fair(stuck, fair);
                let mut bad = self.eu(&not_b, stuck);
                bad.union_with(&self.eg(&not_b, fair));
                self.complement(&bad)
            }
        }
    }

    fn restrict_fair(&self, mut s: StateSet, fair: bool) -> StateSet {
        if fair {
            s.intersect_with(self.fair_states());
        }
        s
    }

    /// States with a successor in `target`.
    fn pre(&self, target: &StateSet) -> StateSet {
        let mut out = StateSet::with_capacity(self.n());
        for t in target.ones() {
            for &s in self.preds_of(t as StateId) {
                out.insert(s as usize);
            }
        }
        let mut looped = target.clone();
        looped.intersect_with(&self.self_loops);
        out.union_with(&looped);
        out
    }

    /// Least fixpoint `Z = target | (within & pre(Z))`.
    fn eu(&self, within: &StateSet, mut reached: StateSet) -> StateSet {
        let mut queue: VecDeque<StateId> = reached.ones().map(|s| s as StateId).collect();
        while let Some(t) = queue.pop_front() {
            for &s in self.preds_of(t) {
                let si = s as usize;
                if within.contains(si) && !reached.contains(si) {
                    reached.insert(si);
                    queue.push_back(s);
                }
            }
        }
        reached
    }

    fn eg(&self, within: &StateSet, fair: bool) -> StateSet {
        if fair {
            self.eg_fair(within)
        } else {
            self.eg_plain(within)
        }
    }

    /// Greatest fixpoint `Z = within & pre(Z)`, by successor counting.
    fn eg_plain(&self, within: &StateSet) -> StateSet {
        let mut z = within.clone();
        let mut count = vec![0u32; self.n()];
        let mut targets = Vec::new();
        let mut dead = Vec::new();
        for s in within.ones() {
            distinct_targets(self.graph, s as StateId, &mut targets);
            count[s] = targets.iter().filter(|&&t| within.contains(t as usize)).count() as u32;
            if count[s] == 0 {
                dead.push(s as StateId);
            }
        }
        while let Some(t) = dead.pop() {
            if !z.contains(t as usize) {
                continue;
            }
            z.set(t as usize, false);
            for &s in self.preds_of(t) {
                let si = s as usize;
                if z.contains(si) {
                    count[si] -= 1;
                    if count[si] == 0 {
                        dead.push(s);
                    }
                }
            }
        }
        z
    }

    /// States of `within` that reach, inside `within`, a component of the
    /// induced subgraph with an internal edge for every label.
    fn eg_fair(&self, within: &StateSet) -> StateSet {
        let (comps, fair) = self.fair_components(within);
        let mut seeds = StateSet::with_capacity(self.n());
        for s in within.ones() {
            let c = comps.comp[s];
            if c != NO_COMPONENT && fair[c as usize] {
                seeds.insert(s);
            }
        }
        self.eu(within, seeds)
    }

    /// Components of the subgraph induced by `within`, flagged fair when they
    /// contain an internal edge for every label (and at least one edge).
    fn fair_components(&self, within: &StateSet) -> (Components, Vec<bool>) {
        let comps = components(self.graph, within);
        let labels = self.graph.num_labels();
        let words = labels.div_ceil(64).max(1);
        let mut covered = vec![0u64; comps.count * words];
        let mut nontrivial = vec![false; comps.count];
        for s in within.ones() {
            let c = comps.comp[s];
            for (l, t) in self.graph.edges(s as StateId) {
                if comps.comp[t as usize] == c {
                    nontrivial[c as usize] = true;
                    covered[c as usize * words + l / 64] |= 1 << (l % 64);
                }
            }
        }
        let full: Vec<u64> = (0..words)
            .map(|w| {
                let bits = labels.saturating_sub(w * 64).min(64);
                if bits == 64 {
                    u64::MAX
                } else {
                    (1u64 << bits) - 1
                }
            })
            .collect();
        let fair = (0..comps.count)
            .map(|c| nontrivial[c] && covered[c * words..(c + 1) * words] == full[..])
            .collect();
        (comps, fair)
    }

    fn evidence(&self, f: &Formula<G::Atom>, fairness: Fairness, holds: bool) -> Option<Trace> {
        use Formula::*;
        let fair = fairness == Fairness::RunningAll;
        match (f, holds) {
            (EF(x), true) => {
                let target = self.restrict_fair(self.sat(x, fairness), fair);
                self.path_to(&self.full(), &target)
            }
            (EU(a, b), true) => {
                let target = self.restrict_fair(self.sat(b, fairness), fair);
                self.path_to(&self.sat(a, fairness), &target)
            }
            (AG(x), false) => {
                let target =
                    self.restrict_fair(self.complement(&self.sat(x, fairness)), fair);
                self.path_to(&self.full(), &target)
            }
            (EG(x), true) => self.lasso(&self.eg(&self.sat(x, fairness), fair), fair),
            (AF(x), false) => {
                let neg = self.complement(&self.sat(x, fairness));
                self.lasso(&self.eg(&neg, fair), fair)
            }
            (AU(a, b), false) => {
                let not_b = self.complement(&self.sat(b, fairness));
                let looping = self.eg(&not_b, fair);
                if looping.contains(self.graph.initial() as usize) {
                    return self.lasso(&looping, fair);
                }
                let mut stuck = self.complement(&self.sat(a, fairness));
                stuck.intersect_with(&not_b);
                let stuck = self.restrict_fair(stuck, fair);
                self.path_to(&not_b, &stuck)
            }
            _ => None,
        }
    }

    /// Shortest path from the initial state through `within` to `target`.
    fn path_to(&self, within: &StateSet, target: &StateSet) -> Option<Trace> {
        let init = self.graph.initial();
        let (mut steps, end) = self.bfs(init, |s| within.contains(s as usize), |s| {
            target.contains(s as usize)
        })?;
        steps.push((end, None));
        Some(Trace {
            steps,
            loop_start: None,
        })
    }

    /// Breadth-first search from `start` to the nearest goal state, expanding
    /// only states accepted by `expand`. Returns the edges taken and the goal.
    fn bfs(
        &self,
        start: StateId,
        expand: impl Fn(StateId) -> bool,
        goal: impl Fn(StateId) -> bool,
    ) -> Option<(Vec<(StateId, Option<usize>)>, StateId)> {
        use std::collections::HashMap;
        let mut parent: HashMap<StateId, (StateId, usize)> = HashMap::new();
        let mut queue = VecDeque::from([start]);
        let mut seen = StateSet::with_capacity(self.n());
        seen.insert(start as usize);
        while let Some(s) = queue.pop_front() {
            if goal(s) {
                let mut steps = Vec::new();
                let mut cur = s;
                while let Some(&(p, l)) = parent.get(&cur) {
                    steps.push((p, Some(l)));
                    cur = p;
                }
                steps.reverse();
                return Some((steps, s));
            }
            if !expand(s) {
                continue;
            }
            for (l, t) in self.graph.edges(s) {
                if !seen.contains(t as usize) {
                    seen.insert(t as usize);
                    parent.insert(t, (s, l));
                    queue.push_back(t);
                }
            }
        }
        None
    }

    /// Lasso from the initial state staying inside `set`, where `set` is an
    /// `EG` solution (every member has a successor in it). With `fair`, the
    /// loop runs every label.
    fn lasso(&self, set: &StateSet, fair: bool) -> Option<Trace> {
        let init = self.graph.initial();
        if !set.contains(init as usize) {
            return None;
        }
        let (comps, fair_comp) = self.fair_components(set);
        let mut nontrivial = vec![false; comps.count];
        for s in set.ones() {
            let c = comps.comp[s];
            if self
                .graph
                .edges(s as StateId)
                .any(|(_, t)| comps.comp[t as usize] == c)
            {
                nontrivial[c as usize] = true;
            }
        }
        let good = |s: StateId| {
            let c = comps.comp[s as usize];
            c != NO_COMPONENT && if fair { fair_comp[c as usize] } else { nontrivial[c as usize] }
        };
        let (mut steps, entry) = self.bfs(init, |s| set.contains(s as usize), good)?;
        let loop_start = steps.len();
        let c = comps.comp[entry as usize];
        let in_comp = |s: StateId| comps.comp[s as usize] == c;

        if fair {
            let labels = self.graph.num_labels();
            let mut covered = vec![false; labels];
            let mut cur = entry;
            let mut cycle: Vec<(StateId, Option<usize>)> = Vec::new();
            for l in 0..labels {
                if covered[l] {
                    continue;
                }
                // Walk to a state with an internal edge labeled `l`, then take it.
                let has_l = |s: StateId| {
                    self.graph
                        .edges(s)
                        .any(|(el, t)| el == l && in_comp(t))
                };
                let (path, at) = self.bfs(cur, in_comp, has_l)?;
                for &(_, el) in &path {
                    covered[el.expect("bfs edges are labeled")] = true;
                }
                cycle.extend(path);
                let (_, next) = self
                    .graph
                    .edges(at)
                    .find(|&(el, t)| el == l && in_comp(t))?;
                cycle.push((at, Some(l)));
                covered[l] = true;
                cur = next;
            }
            if cur != entry || cycle.is_empty() {
                let (back, _) = self.cycle_back(cur, entry, &in_comp)?;
                cycle.extend(back);
            }
            steps.extend(cycle);
        } else {
            let (cycle, _) = self.cycle_back(entry, entry, &in_comp)?;
            steps.extend(cycle);
        }
        Some(Trace {
            steps,
            loop_start: Some(loop_start),
        })
    }

    /// Nonempty shortest path from `from` to `to` inside a component.
    fn cycle_back(
        &self,
        from: StateId,
        to: StateId,
        in_comp: &impl Fn(StateId) -> bool,
    ) -> Option<(Vec<(StateId, Option<usize>)>, StateId)> {
        if let Some((l, _)) = self.graph.edges(from).find(|&(_, t)| t == to) {
            return Some((vec![(from, Some(l))], to));
        }
        let mut best: Option<Vec<(StateId, Option<usize>)>> = None;
        for (l, t) in self.graph.edges(from) {
            if !in_comp(t) {
                continue;
            }
            if let Some((path, _)) = self.bfs(t, in_comp, |s| s == to) {
                if best.as_ref().is_none_or(|b| path.len() + 1 < b.len()) {
                    let mut p = vec![(from, Some(l))];
                    p.extend(path);
                    best = Some(p);
                }
            }
        }
        best.map(|p| (p, to))
    }
}

fn distinct_targets<G: Kripke>(graph: &G, s: StateId, out: &mut Vec<StateId>) {
    out.clear();
    out.extend(graph.edges(s).map(|(_, t)| t));
    out.sort_unstable();
    out.dedup();
}
