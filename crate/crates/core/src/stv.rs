//! Single-winner STV (instant runoff) over partial ballots.
//!
//! Each round a ballot counts for its highest-ranked active candidate. A
//! ballot with no active candidate left is exhausted and drops out of the
//! count, including the majority threshold.

use std::collections::BTreeSet;
use std::fmt;

use crate::election::{CandidateId, Election};

/// What happened at the end of a round.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum RoundOutcome {
    Eliminated(CandidateId),
    /// Strict majority of the non-exhausted weight, or last one standing.
    Elected(CandidateId),
    /// Every remaining ballot was exhausted; the tie-break policy picked the
    /// winner among the active candidates.
    ElectedByTieBreakAfterExhaustion(CandidateId),
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Round {
    pub active: BTreeSet<CandidateId>,
    /// `(candidate, first-place weight)` for every active candidate, in index
    /// order.
    pub tallies: Vec<(CandidateId, u64)>,
    pub exhausted: u64,
    pub outcome: RoundOutcome,
}

#[derive(Clone, Debug, PartialEq, Eq, Default)]
pub struct EliminationTrace {
    pub rounds: Vec<Round>,
}

impl EliminationTrace {
    /// True when the count ended because all ballots were exhausted.
    pub fn all_ballots_exhausted(&self) -> bool {
        matches!(
            self.rounds.last().map(|r| r.outcome),
            Some(RoundOutcome::ElectedByTieBreakAfterExhaustion(_))
        )
    }

    /// Candidates in elimination order.
    pub fn eliminated(&self) -> Vec<CandidateId> {
        self.rounds
            .iter()
            .filter_map(|r| match r.outcome {
                RoundOutcome::Eliminated(c) => Some(c),
                _ => None,
            })
            .collect()
    }
}

impl fmt::Display for EliminationTrace {
    /// One line per round.
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for (i, round) in self.rounds.iter().enumerate() {
            write!(f, "round {}:", i + 1)?;
            for (c, t) in &round.tallies {
                write!(f, " {}={}", c.0 + 1, t)?;
            }
            write!(f, " exhausted={}", round.exhausted)?;
            match round.outcome {
                RoundOutcome::Eliminated(c) => writeln!(f, " eliminate {}", c.0 + 1)?,
                RoundOutcome::Elected(c) => writeln!(f, " elect {}", c.0 + 1)?,
                RoundOutcome::ElectedByTieBreakAfterExhaustion(c) => {
                    writeln!(f, " all ballots exhausted, elect {} by tie-break", c.0 + 1)?
                }
            }
        }
        Ok(())
    }
}

/// First-place weight of each active candidate, plus the exhausted weight.
pub fn first_place_tally(
    election: &Election,
    active: &BTreeSet<CandidateId>,
) -> (Vec<(CandidateId, u64)>, u64) {
    let mut tallies = vec![0u64; election.num_candidates()];
    let mut exhausted = 0;
    for ballot in election.ballots() {
        match ballot.ranking().iter().find(|c| active.contains(c)) {
            Some(c) => tallies[c.0] += ballot.weight(),
            None => exhausted += ballot.weight(),
        }
    }
    let tallies = active.iter().map(|&c| (c, tallies[c.0])).collect();
    (tallies, exhausted)
}

/// Runs the count to completion.
pub fn stv_winner(election: &Election) -> (CandidateId, EliminationTrace) {
    let policy = election.tie_break();
    let mut active: BTreeSet<CandidateId> = election.candidates().collect();
    let mut trace = EliminationTrace::default();
    loop {
        let (tallies, exhausted) = first_place_tally(election, &active);
        let live: u64 = tallies.iter().map(|(_, t)| t).sum();

        let outcome = if active.len() == 1 {
            RoundOutcome::Elected(*active.iter().next().unwrap())
        } else if live == 0 {
            RoundOutcome::ElectedByTieBreakAfterExhaustion(policy.break_tie(active.iter().copied()))
        } else if let Some(&(c, _)) = tallies.iter().find(|(_, t)| 2 * t > live) {
            RoundOutcome::Elected(c)
        } else {
            let lowest = tallies.iter().map(|(_, t)| *t).min().unwrap();
            let loser = policy.least_favored(
                tallies
                    .iter()
                    .filter(|(_, t)| *t == lowest)
                    .map(|(c, _)| *c),
            );
            RoundOutcome::Eliminated(loser)
        };

        trace.rounds.push(Round {
            active: active.clone(),
            tallies,
            exhausted,
            outcome,
        });
        match outcome {
            RoundOutcome::Eliminated(c) => {
                active.remove(&c);
            }
            RoundOutcome::Elected(c) | RoundOutcome::ElectedByTieBreakAfterExhaustion(c) => {
                return (c, trace)
            }
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::election::TieBreakPolicy;

    fn set(ids: &[usize]) -> BTreeSet<CandidateId> {
        ids.iter().copied().map(CandidateId).collect()
    }

    #[test]
    fn tallies_transfer_and_exhaust() {
        let e = Election::from_rankings(2, &[(&[0, 1], 1), (&[1], 1)], TieBreakPolicy::index_order())
            .unwrap();
        assert_eq!(
            first_place_tally(&e, &set(&[0, 1])),
            (vec![(CandidateId(0), 1), (CandidateId(1), 1)], 0)
        );
        assert_eq!(first_place_tally(&e, &set(&[1])), (vec![(CandidateId(1), 2)], 0));

        let e = Election::from_rankings(2, &[(&[0], 3)], TieBreakPolicy::index_order()).unwrap();
        assert_eq!(first_place_tally(&e, &set(&[1])), (vec![(CandidateId(1), 0)], 3));
    }

    #[test]
    fn immediate_majority() {
        // p=0, a=1
        let e = Election::from_rankings(2, &[(&[0], 2), (&[1], 1)], TieBreakPolicy::index_order())
            .unwrap();
        let (w, trace) = stv_winner(&e);
        assert_eq!(w, CandidateId(0));
        assert_eq!(trace.rounds.len(), 1);
    }

    #[test]
    fn elimination_tie_goes_against_fallback_order() {
        // a=0, b=1, p=2. a and b tie on 2; b is least favored by index order
        // and goes first, then p holds 3 of the 5 live votes.
        let e = Election::from_rankings(
            3,
            &[(&[0, 1], 2), (&[1], 2), (&[2], 3)],
            TieBreakPolicy::favoring(CandidateId(2)),
        )
        .unwrap();
        let (w, trace) = stv_winner(&e);
        assert_eq!(trace.eliminated(), vec![CandidateId(1)]);
        assert_eq!(trace.rounds[1].exhausted, 2);
        assert_eq!(w, CandidateId(2));

        // Same profile with a labelled after b (b=0, a=1, p=2): a goes first,
        // its ballots transfer and b reaches 4 > 7/2.
        let e = Election::from_rankings(
            3,
            &[(&[1, 0], 2), (&[0], 2), (&[2], 3)],
            TieBreakPolicy::favoring(CandidateId(2)),
        )
        .unwrap();
        let (w, trace) = stv_winner(&e);
        assert_eq!(
            trace.rounds[0].tallies,
            vec![(CandidateId(0), 2), (CandidateId(1), 2), (CandidateId(2), 3)]
        );
        assert_eq!(trace.eliminated(), vec![CandidateId(1)]);
        assert_eq!(trace.rounds[1].tallies[0], (CandidateId(0), 4));
        assert_eq!(w, CandidateId(0));
    }

    #[test]
    fn favored_candidate_survives_elimination_ties() {
        let e = Election::from_rankings(3, &[(&[0], 1), (&[2], 1)], TieBreakPolicy::favoring(CandidateId(1)))
            .unwrap();
        let (_, trace) = stv_winner(&e);
        // b (index 1) has 0 alone, so it goes regardless of favour
        assert_eq!(trace.eliminated()[0], CandidateId(1));

        let e = Election::from_rankings(3, &[(&[0], 1), (&[1], 1), (&[2], 1)], TieBreakPolicy::favoring(CandidateId(2)))
            .unwrap();
        let (w, trace) = stv_winner(&e);
        assert!(!trace.eliminated().contains(&CandidateId(2)));
        assert_eq!(w, CandidateId(2));
    }

    #[test]
    fn unranked_candidate_goes_first() {
        // a=0, b=1, p=2
        let e = Election::from_rankings(3, &[(&[0], 1), (&[1], 1)], TieBreakPolicy::favoring(CandidateId(2)))
            .unwrap();
        let (_, trace) = stv_winner(&e);
        assert_eq!(trace.rounds[0].tallies[2], (CandidateId(2), 0));
        assert_eq!(trace.eliminated()[0], CandidateId(2));
    }

    #[test]
    fn everything_exhausted() {
        let e = Election::from_rankings(3, &[], TieBreakPolicy::favoring(CandidateId(2))).unwrap();
        let (w, trace) = stv_winner(&e);
        assert_eq!(w, CandidateId(2));
        assert!(trace.all_ballots_exhausted());
    }

    #[test]
    fn trace_report() {
        let e = Election::from_rankings(2, &[(&[0], 2), (&[1], 1)], TieBreakPolicy::index_order())
            .unwrap();
        let (_, trace) = stv_winner(&e);
        assert_eq!(trace.to_string(), "round 1: 1=2 2=1 exhausted=0 elect 1\n");
    }
}
