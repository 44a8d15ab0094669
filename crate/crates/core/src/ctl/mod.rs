//! CTL model checking over explicit labeled transition graphs.
//!
//! Formulas are evaluated by backward labeling: `EX` through predecessor
//! images, `EU` as a least fixpoint, `EG` as a greatest fixpoint. The
//! universal operators are reduced to these by duality.
//!
//! Fairness is edge based: under [`Fairness::RunningAll`] path quantifiers
//! range only over paths on which every process label occurs infinitely often.
//! A path is fair iff it ends up in a strongly connected component that has an
//! internal edge for every label.

mod check;
mod formula;
mod graph;
mod parse;
mod scc;

pub use check::{check, fair_states, CheckResult, Checker};
pub use formula::{builtin_properties, Formula, MaxUid, Property};
pub use graph::LabeledGraph;
pub use parse::parse_formula;

use crate::protocol::Atom;
use crate::statespace::{StateGraph, StateId};
use serde::{Deserialize, Serialize};
use std::fmt;
use thiserror::Error;

pub use fixedbitset::FixedBitSet as StateSet;

#[derive(Debug, Clone, Error, PartialEq, Eq)]
pub enum CtlError {
    #[error("syntax error at {position}: {message}")]
    Syntax { position: usize, message: String },
    #[error("node index {index} out of range for a ring of {n} nodes")]
    IndexOutOfRange { index: usize, n: usize },
    #[error("graph is truncated; exploration did not complete")]
    TruncatedGraph,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Default, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Fairness {
    /// All paths.
    #[default]
    #[serde(rename = "off")]
    None,
    /// Paths on which every process label occurs infinitely often.
    #[serde(rename = "running")]
    RunningAll,
}

impl fmt::Display for Fairness {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Fairness::None => "off",
            Fairness::RunningAll => "running",
        })
    }
}

/// A finite transition graph with labeled edges and an atom valuation.
///
/// Every state must have at least one outgoing edge.
pub trait Kripke {
    type Atom;

    fn num_states(&self) -> usize;

    fn num_labels(&self) -> usize;

    fn initial(&self) -> StateId {
        0
    }

    fn is_complete(&self) -> bool {
        true
    }

    /// Outgoing `(label, target)` pairs of `s`.
    fn edges(&self, s: StateId) -> impl Iterator<Item = (usize, StateId)> + '_;

    fn atom_holds(&self, s: StateId, atom: &Self::Atom) -> bool;
}

impl Kripke for StateGraph {
    type Atom = Atom;

    fn num_states(&self) -> usize {
        self.len()
    }

    fn num_labels(&self) -> usize {
        self.n()
    }

    fn is_complete(&self) -> bool {
        !self.is_truncated()
    }

    fn edges(&self, s: StateId) -> impl Iterator<Item = (usize, StateId)> + '_ {
        self.targets(s).iter().copied().enumerate()
    }

    fn atom_holds(&self, s: StateId, atom: &Atom) -> bool {
        if let Atom::Quiescent = atom {
            return self.is_quiescent(s);
        }
        // The overflow sink satisfies no node-level atom.
        let Some(view) = self.view(s) else {
            return false;
        };
        match *atom {
            Atom::IsLeader(i) => view.is_leader(i),
            Atom::VidEquals(i, k) => view.node(i).vid() == k,
            Atom::ModeIs(i, m) => view.node(i).mode() == Some(m),
            Atom::Quiescent => unreachable!(),
        }
    }
}
