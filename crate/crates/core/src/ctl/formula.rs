use super::Fairness;
use crate::protocol::{Atom, Uid};
use std::fmt;

/// CTL formula over atoms of type `A`.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub enum Formula<A = Atom> {
    True,
    False,
    Atom(A),
    Not(Box<Formula<A>>),
    And(Box<Formula<A>>, Box<Formula<A>>),
    Or(Box<Formula<A>>, Box<Formula<A>>),
    Implies(Box<Formula<A>>, Box<Formula<A>>),
    EX(Box<Formula<A>>),
    EG(Box<Formula<A>>),
    EF(Box<Formula<A>>),
    EU(Box<Formula<A>>, Box<Formula<A>>),
    AX(Box<Formula<A>>),
    AG(Box<Formula<A>>),
    AF(Box<Formula<A>>),
    AU(Box<Formula<A>>, Box<Formula<A>>),
}

impl<A> Formula<A> {
    pub fn atom(a: A) -> Self {
        Formula::Atom(a)
    }

    #[allow(clippy::should_implement_trait)]
    pub fn not(f: Self) -> Self {
        Formula::Not(Box::new(f))
    }

    pub fn and(a: Self, b: Self) -> Self {
        Formula::And(Box::new(a), Box::new(b))
    }

    pub fn or(a: Self, b: Self) -> Self {
        Formula::Or(Box::new(a), Box::new(b))
    }

    pub fn implies(a: Self, b: Self) -> Self {
        Formula::Implies(Box::new(a), Box::new(b))
    }

    pub fn ex(f: Self) -> Self {
        Formula::EX(Box::new(f))
    }

    pub fn eg(f: Self) -> Self {
        Formula::EG(Box::new(f))
    }

    pub fn ef(f: Self) -> Self {
        Formula::EF(Box::new(f))
    }

    pub fn eu(a: Self, b: Self) -> Self {
        Formula::EU(Box::new(a), Box::new(b))
    }

    pub fn ax(f: Self) -> Self {
        Formula::AX(Box::new(f))
    }

    pub fn ag(f: Self) -> Self {
        Formula::AG(Box::new(f))
    }

    pub fn af(f: Self) -> Self {
        Formula::AF(Box::new(f))
    }

    pub fn au(a: Self, b: Self) -> Self {
        Formula::AU(Box::new(a), Box::new(b))
    }

    /// Left-nested disjunction; `False` when empty.
    pub fn any(items: impl IntoIterator<Item = Self>) -> Self {
        items.into_iter().reduce(Formula::or).unwrap_or(Formula::False)
    }

    /// Left-nested conjunction; `True` when empty.
    pub fn all(items: impl IntoIterator<Item = Self>) -> Self {
        items.into_iter().reduce(Formula::and).unwrap_or(Formula::True)
    }

    pub fn atoms(&self) -> Vec<&A> {
        let mut out = Vec::new();
        self.collect_atoms(&mut out);
        out
    }

    fn collect_atoms<'a>(&'a self, out: &mut Vec<&'a A>) {
        use Formula::*;
        match self {
            True | False => {}
            Atom(a) => out.push(a),
            Not(f) | EX(f) | EG(f) | EF(f) | AX(f) | AG(f) | AF(f) => f.collect_atoms(out),
            And(a, b) | Or(a, b) | Implies(a, b) | EU(a, b) | AU(a, b) => {
                a.collect_atoms(out);
                b.collect_atoms(out);
            }
        }
    }
}

impl<A: fmt::Display> fmt::Display for Formula<A> {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        use Formula::*;
        match self {
            True => f.write_str("true"),
            False => f.write_str("false"),
            Atom(a) => write!(f, "{a}"),
            Not(x) => write!(f, "!{x}"),
            And(a, b) => write!(f, "({a} & {b})"),
            Or(a, b) => write!(f, "({a} | {b})"),
            Implies(a, b) => write!(f, "({a} -> {b})"),
            EX(x) => write!(f, "EX {x}"),
            EG(x) => write!(f, "EG {x}"),
            EF(x) => write!(f, "EF {x}"),
            AX(x) => write!(f, "AX {x}"),
            AG(x) => write!(f, "AG {x}"),
            AF(x) => write!(f, "AF {x}"),
            EU(a, b) => write!(f, "E[{a} U {b}]"),
            AU(a, b) => write!(f, "A[{a} U {b}]"),
        }
    }
}

/// Largest uid of a ring.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct MaxUid(pub Uid);

impl MaxUid {
    pub fn of(uids: &[Uid]) -> Option<MaxUid> {
        uids.iter().max().copied().map(MaxUid)
    }
}

/// A named property with the fairness it is checked under and the verdict a
/// correct election must produce.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Property {
    pub name: String,
    pub description: String,
    pub formula: Formula,
    pub fairness: Fairness,
    pub expected: bool,
}

/// The three correctness properties of leader election on an `n`-ring:
///
/// * `P1`: a leader is eventually elected (under process fairness);
/// * `P2`: two leaders are reachable (must be false);
/// * `P3`: every leader carries the maximum uid as its vid.
pub fn builtin_properties(n: usize, max_uid: MaxUid) -> Vec<Property> {
    let leader = |i| Formula::atom(Atom::IsLeader(i));
    let p1 = Formula::af(Formula::any((0..n).map(leader)));
    let pairs = (0..n).flat_map(|i| (i + 1..n).map(move |j| (i, j)));
    let p2 = Formula::ef(Formula::any(
        pairs.map(|(i, j)| Formula::and(leader(i), leader(j))),
    ));
    let p3 = Formula::ag(Formula::all((0..n).map(|i| {
        Formula::implies(leader(i), Formula::atom(Atom::VidEquals(i, max_uid.0 .0)))
    })));
    vec![
        Property {
            name: "P1".into(),
            description: "eventually a leader is elected".into(),
            formula: p1,
            fairness: Fairness::RunningAll,
            expected: true,
        },
        Property {
            name: "P2".into(),
            description: "two leaders are reachable".into(),
            formula: p2,
            fairness: Fairness::None,
            expected: false,
        },
        Property {
            name: "P3".into(),
            description: "every leader's vid is the maximum uid".into(),
            formula: p3,
            fairness: Fairness::None,
            expected: true,
        },
    ]
}
