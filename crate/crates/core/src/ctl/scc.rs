//! Strongly connected components of an induced subgraph (iterative Tarjan).

use super::{Kripke, StateSet};
use crate::statespace::StateId;

pub(crate) const NO_COMPONENT: u32 = u32::MAX;

pub(crate) struct Components {
    /// Component of each state, `NO_COMPONENT` outside the subgraph.
    pub comp: Vec<u32>,
    pub count: usize,
}

/// Components of the subgraph induced by `within`.
pub(crate) fn components<G: Kripke>(graph: &G, within: &StateSet) -> Components {
    let n = graph.num_states();
    let mut index = vec![u32::MAX; n];
    let mut low = vec![0u32; n];
    let mut comp = vec![NO_COMPONENT; n];
    let mut on_stack = StateSet::with_capacity(n);
    let mut stack: Vec<StateId> = Vec::new();
    let mut next_index = 0u32;
    let mut count = 0usize;

    // Call stack of (state, successors, position in successors).
    let mut call: Vec<(StateId, Vec<StateId>, usize)> = Vec::new();
    let succ = |s: StateId| -> Vec<StateId> {
        graph
            .edges(s)
            .map(|(_, t)| t)
            .filter(|&t| within.contains(t as usize))
            .collect()
    };

    for root in within.ones() {
        if index[root] != u32::MAX {
            continue;
        }
        let root = root as StateId;
        index[root as usize] = next_index;
        low[root as usize] = next_index;
        next_index += 1;
        stack.push(root);
        on_stack.insert(root as usize);
        call.push((root, succ(root), 0));

        while let Some((v, targets, pos)) = call.last_mut() {
            let v = *v;
            if let Some(&w) = targets.get(*pos) {
                *pos += 1;
                let wi = w as usize;
                if index[wi] == u32::MAX {
                    index[wi] = next_index;
                    low[wi] = next_index;
                    next_index += 1;
                    stack.push(w);
                    on_stack.insert(wi);
                    let ws = succ(w);
                    call.push((w, ws, 0));
                } else if on_stack.contains(wi) {
                    low[v as usize] = low[v as usize].min(index[wi]);
                }
                continue;
            }
            call.pop();
            if let Some((parent, _, _)) = call.last() {
                let p = *parent as usize;
                low[p] = low[p].min(low[v as usize]);
            }
            if low[v as usize] == index[v as usize] {
                loop {
                    let w = stack.pop().expect("tarjan stack holds the component");
                    on_stack.remove(w as usize);
                    comp[w as usize] = count as u32;
                    if w == v {
                        break;
                    }
                }
                count += 1;
            }
        }
    }
    Components { comp, count }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::ctl::LabeledGraph;

    #[test]
    fn two_cycles_and_a_bridge() {
        // 0 <-> 1 -> 2 <-> 3, 4 -> 4
        let g = LabeledGraph::new(
            1,
            vec![
                vec![(0, 1)],
                vec![(0, 0), (0, 2)],
                vec![(0, 3)],
                vec![(0, 2)],
                vec![(0, 4)],
            ],
            vec![0; 5],
        );
        let mut all = StateSet::with_capacity(5);
        all.insert_range(..);
        let c = components(&g, &all);
        assert_eq!(c.count, 3);
        assert_eq!(c.comp[0], c.comp[1]);
        assert_eq!(c.comp[2], c.comp[3]);
        assert_ne!(c.comp[0], c.comp[2]);

        let mut part = StateSet::with_capacity(5);
        part.insert(1);
        part.insert(2);
        let c = components(&g, &part);
        assert_eq!(c.count, 2);
        assert_eq!(c.comp[0], NO_COMPONENT);
    }
}
