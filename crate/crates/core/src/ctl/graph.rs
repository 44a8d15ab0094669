use super::Kripke;
use crate::statespace::StateId;

/// Small explicit graph with numbered propositions; atom `p` holds in a state
/// when bit `p` of its valuation is set.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct LabeledGraph {
    labels: usize,
    edges: Vec<Vec<(usize, StateId)>>,
    valuation: Vec<u64>,
}

impl LabeledGraph {
    /// `edges[s]` lists the `(label, target)` pairs leaving `s`. Panics if a
    /// state has no successor or an edge is out of range.
    pub fn new(labels: usize, edges: Vec<Vec<(usize, StateId)>>, valuation: Vec<u64>) -> Self {
        assert_eq!(edges.len(), valuation.len(), "one valuation per state");
        for out in &edges {
            assert!(!out.is_empty(), "every state needs a successor");
            for &(l, t) in out {
                assert!(l < labels && (t as usize) < edges.len(), "edge out of range");
            }
        }
        LabeledGraph {
            labels,
            edges,
            valuation,
        }
    }

    pub fn out_edges(&self, s: StateId) -> &[(usize, StateId)] {
        &self.edges[s as usize]
    }

    pub fn valuation(&self, s: StateId) -> u64 {
        self.valuation[s as usize]
    }
}

impl Kripke for LabeledGraph {
    type Atom = usize;

    fn num_states(&self) -> usize {
        self.edges.len()
    }

    fn num_labels(&self) -> usize {
        self.labels
    }

    fn edges(&self, s: StateId) -> impl Iterator<Item = (usize, StateId)> + '_ {
        self.edges[s as usize].iter().copied()
    }

    fn atom_holds(&self, s: StateId, atom: &usize) -> bool {
        self.valuation[s as usize] >> atom & 1 == 1
    }
}
