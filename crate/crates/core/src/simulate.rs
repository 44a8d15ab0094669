//! Randomized asynchronous runs with message accounting, and the lockstep
//! phase oracle the runs are compared against.

use crate::protocol::{validate_uids, GlobalState, Protocol, ProtocolError, StepOutcome, Uid, Variant};
use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::Serialize;
use thiserror::Error;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Scheduler {
    /// Uniform choice among processes that can make progress.
    UniformEnabled(u64),
    /// Cycles through the process indices, skipping blocked ones.
    RoundRobin,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct SimReport {
    pub elected: Option<usize>,
    pub elected_vid: Option<Uid>,
    pub steps: u64,
    /// Writes into any inbox, relay forwards included.
    pub link_transmissions: u64,
    pub terminated: bool,
}

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum SimError {
    #[error(transparent)]
    Protocol(#[from] ProtocolError),
    #[error("step budget of {budget} exhausted before quiescence")]
    StepBudgetExhausted { budget: u64, report: SimReport },
    #[error("a send hit a full queue after {} steps", report.steps)]
    OverflowEncountered { report: SimReport },
    #[error("no process can move and no leader exists after {} steps", report.steps)]
    Deadlock { report: SimReport },
    #[error("{leaders} leaders present after {} steps", report.steps)]
    MultipleLeaders { leaders: usize, report: SimReport },
    #[error("max_steps must be at least 1")]
    ZeroBudget,
}

/// Runs the protocol until a leader exists and every process is blocked.
pub fn run_async(
    protocol: impl Into<Protocol>,
    uids: &[Uid],
    sched: Scheduler,
    max_steps: u64,
) -> Result<SimReport, SimError> {
    if max_steps == 0 {
        return Err(SimError::ZeroBudget);
    }
    let protocol = protocol.into();
    let mut g = protocol.initial_state(uids)?;
    let n = g.n();
    let mut rng = match sched {
        Scheduler::UniformEnabled(seed) => Some(ChaCha8Rng::seed_from_u64(seed)),
        Scheduler::RoundRobin => None,
    };
    let mut cursor = 0usize;
    let mut report = SimReport {
        elected: None,
        elected_vid: None,
        steps: 0,
        link_transmissions: 0,
        terminated: false,
    };
    let mut moves: Vec<(usize, GlobalState)> = Vec::with_capacity(n);

    loop {
        moves.clear();
        for i in 0..n {
            match protocol.step(&g, i)? {
                StepOutcome::Progress(next) => moves.push((i, next)),
                StepOutcome::Stutter => {}
                StepOutcome::Overflow => return Err(SimError::OverflowEncountered { report }),
            }
        }
        if moves.is_empty() {
            let leaders = g.leader_set();
            return match leaders.iter().next() {
                Some(&i) => {
                    report.terminated = true;
                    report.elected = Some(i);
                    report.elected_vid = Some(g.node(i).vid);
                    Ok(report)
                }
                None => Err(SimError::Deadlock { report }),
            };
        }
        if report.steps >= max_steps {
            return Err(SimError::StepBudgetExhausted {
                budget: max_steps,
                report,
            });
        }

        let pick = match rng.as_mut() {
            Some(rng) => rng.random_range(0..moves.len()),
            None => {
                let k = moves.iter().position(|(i, _)| *i >= cursor).unwrap_or(0);
                cursor = (moves[k].0 + 1) % n;
                k
            }
        };
        let (i, next) = moves.swap_remove(pick);
        if protocol.writes_message(&g, i) {
            report.link_transmissions += 1;
        }
        report.steps += 1;
        g = next;

        let leaders = g.leader_set();
        if leaders.len() > 1 {
            return Err(SimError::MultipleLeaders {
                leaders: leaders.len(),
                report,
            });
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct SyncPhaseReport {
    pub phases: usize,
    pub survivors_per_phase: Vec<usize>,
    pub winner: usize,
    pub winner_vid: Uid,
}

/// Phase decision of an active node: the new vid if it stays active.
pub fn survives(vid: Uid, id2: Uid, id3: Uid) -> Option<Uid> {
    (id2 > vid.max(id3)).then_some(id2)
}

/// Lockstep phases over the active nodes only.
pub fn sync_oracle(uids: &[Uid]) -> Result<SyncPhaseReport, ProtocolError> {
    validate_uids(uids)?;
    // (ring position, vid) of active nodes, in ring order.
    let mut active: Vec<(usize, Uid)> = uids.iter().copied().enumerate().collect();
    let mut survivors_per_phase = Vec::new();
    while active.len() > 1 {
        let k = active.len();
        let next: Vec<(usize, Uid)> = (0..k)
            .filter_map(|j| {
                let (pos, vid) = active[j];
                let id2 = active[(j + k - 1) % k].1;
                let id3 = active[(j + k - 2) % k].1;
                survives(vid, id2, id3).map(|v| (pos, v))
            })
            .collect();
        survivors_per_phase.push(next.len());
        active = next;
    }
    let (winner, winner_vid) = active[0];
    Ok(SyncPhaseReport {
        phases: survivors_per_phase.len(),
        survivors_per_phase,
        winner,
        winner_vid,
    })
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct SweepRow {
    pub variant: Variant,
    pub n: usize,
    pub seed: u64,
    /// Space-separated permutation.
    pub uids: String,
    pub elected: usize,
    pub elected_vid: u8,
    pub steps: u64,
    pub link_transmissions: u64,
    pub oracle_winner: usize,
    pub phases: usize,
}

/// Seed of one sweep run; independent of the variant so every variant sees
/// the same permutation and schedule seed for a given `(n, run)`.
pub fn run_seed(base_seed: u64, n: usize, run: usize) -> u64 {
    let mut z = base_seed
        .wrapping_add((n as u64).wrapping_mul(0x9E37_79B9_7F4A_7C15))
        .wrapping_add((run as u64).wrapping_mul(0xD1B5_4A32_D192_ED03));
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    z ^ (z >> 31)
}

pub fn random_permutation(n: usize, seed: u64) -> Vec<Uid> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut v: Vec<Uid> = (0..n).map(|k| Uid(k as u8)).collect();
    v.shuffle(&mut rng);
    v
}

/// One row per `(variant, n, run)`, in that nesting order.
pub fn sweep(
    variants: &[Variant],
    n_range: &[usize],
    runs_per_cell: usize,
    base_seed: u64,
    max_steps: u64,
) -> Result<Vec<SweepRow>, SimError> {
    let cells: Vec<(Variant, usize, usize)> = variants
        .iter()
        .flat_map(|&v| {
            n_range
                .iter()
                .flat_map(move |&n| (0..runs_per_cell).map(move |run| (v, n, run)))
        })
        .collect();
    cells
        .into_par_iter()
        .map(|(variant, n, run)| {
            let seed = run_seed(base_seed, n, run);
            let uids = random_permutation(n, seed);
            let report = run_async(variant, &uids, Scheduler::UniformEnabled(seed), max_steps)?;
            let oracle = sync_oracle(&uids)?;
            Ok(SweepRow {
                variant,
                n,
                seed,
                uids: uids
                    .iter()
                    .map(|u| u.to_string())
                    .collect::<Vec<_>>()
                    .join(" "),
                elected: report.elected.expect("terminated runs elect"),
                elected_vid: report.elected_vid.expect("terminated runs elect").0,
                steps: report.steps,
                link_transmissions: report.link_transmissions,
                oracle_winner: oracle.winner,
                phases: oracle.phases,
            })
        })
        .collect()
}

/// Envelope on per-run link transmissions checked by the test suite.
pub fn message_envelope(n: usize) -> u64 {
    let n = n as u64;
    2 * n * (u64::from(n.ilog2()) + 2) + 2 * n
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::protocol::uids_from;

    #[test]
    fn modified_three_elects_max() {
        let r = run_async(
            Variant::Modified,
            &uids_from(&[0, 1, 2]),
            Scheduler::UniformEnabled(42),
            100_000,
        )
        .unwrap();
        assert!(r.terminated);
        assert_eq!(r.elected_vid, Some(Uid(2)));
    }

    #[test]
    fn single_node_writes_once() {
        for v in Variant::ALL {
            for sched in [Scheduler::UniformEnabled(1), Scheduler::RoundRobin] {
                let r = run_async(v, &uids_from(&[0]), sched, 100).unwrap();
                assert!(r.terminated);
                assert_eq!(r.elected, Some(0));
                assert_eq!(r.link_transmissions, 1, "{v}");
            }
        }
    }

    #[test]
    fn extra_four_matches_oracle() {
        let uids = uids_from(&[3, 1, 2, 0]);
        let r = run_async(Variant::ExtraModified, &uids, Scheduler::UniformEnabled(7), 100_000).unwrap();
        assert_eq!(r.elected, Some(3));
        assert_eq!(sync_oracle(&uids).unwrap().winner, 3);
    }

    #[test]
    fn oracle_examples() {
        let r = sync_oracle(&uids_from(&[3, 1, 2, 0])).unwrap();
        assert_eq!(r.survivors_per_phase, vec![2, 1]);
        assert_eq!(r.phases, 2);
        assert_eq!((r.winner, r.winner_vid), (3, Uid(3)));

        let r = sync_oracle(&uids_from(&[0])).unwrap();
        assert_eq!((r.phases, r.winner), (0, 0));

        assert_eq!(survives(Uid(5), Uid(7), Uid(6)), Some(Uid(7)));
        assert_eq!(survives(Uid(7), Uid(5), Uid(6)), None);
        assert_eq!(sync_oracle(&[]), Err(ProtocolError::EmptyRing));
    }

    #[test]
    fn budget_exhaustion_reports_partial_run() {
        let err = run_async(Variant::General, &uids_from(&[2, 0, 1]), Scheduler::RoundRobin, 3).unwrap_err();
        match err {
            SimError::StepBudgetExhausted { budget, report } => {
                assert_eq!(budget, 3);
                assert_eq!(report.steps, 3);
                assert!(!report.terminated);
            }
            e => panic!("unexpected {e:?}"),
        }
        assert_eq!(
            run_async(Variant::General, &uids_from(&[0]), Scheduler::RoundRobin, 0),
            Err(SimError::ZeroBudget)
        );
    }

    #[test]
    fn round_robin_terminates_everywhere() {
        for v in Variant::ALL {
            for n in 1..=7 {
                let uids: Vec<Uid> = (0..n as u8).rev().map(Uid).collect();
                let r = run_async(v, &uids, Scheduler::RoundRobin, 1_000_000).unwrap();
                assert_eq!(r.elected, Some(sync_oracle(&uids).unwrap().winner));
                assert_eq!(r.elected_vid, Some(Uid(n as u8 - 1)));
            }
        }
    }

    #[test]
    fn uniform_runs_are_seed_deterministic() {
        let uids = uids_from(&[4, 0, 3, 1, 2]);
        for v in Variant::ALL {
            let a = run_async(v, &uids, Scheduler::UniformEnabled(9), 100_000).unwrap();
            let b = run_async(v, &uids, Scheduler::UniformEnabled(9), 100_000).unwrap();
            assert_eq!(a, b);
        }
    }

    #[test]
    fn sweep_examples() {
        let rows = sweep(&[Variant::Modified], &(2..=8).collect::<Vec<_>>(), 10, 5, 1_000_000).unwrap();
        assert_eq!(rows.len(), 70);
        for r in &rows {
            assert_eq!(r.elected_vid as usize, r.n - 1);
            assert_eq!(r.elected, r.oracle_winner);
        }

        let rows = sweep(&Variant::ALL, &[2], 1, 11, 1_000_000).unwrap();
        assert_eq!(rows.len(), 3);
        assert!(rows.iter().all(|r| r.elected == rows[0].elected && r.uids == rows[0].uids));

        assert!(sweep(&Variant::ALL, &[], 3, 0, 10).unwrap().is_empty());
        assert_eq!(sweep(&[Variant::General], &[4], 3, 1, 1_000_000).unwrap(), sweep(&[Variant::General], &[4], 3, 1, 1_000_000).unwrap());
    }

    #[test]
    fn envelope_values() {
        assert_eq!(message_envelope(2), 2 * 2 * 3 + 4);
        assert_eq!(message_envelope(8), 2 * 8 * 5 + 16);
    }
}
