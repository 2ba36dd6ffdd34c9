//! Candidates, weighted top-truncated ballots and the election container.
//!
//! A ballot ranks a prefix of the voter's preferences; every candidate that
//! does not appear on it is unranked. How unranked candidates are scored is
//! left to each rule.

use std::collections::BTreeSet;
use std::fmt;

use thiserror::Error;

/// Dense candidate index in `[0, m)`.
#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct CandidateId(pub usize);

impl CandidateId {
    pub fn index(self) -> usize {
        self.0
    }
}

impl fmt::Display for CandidateId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.0)
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum ElectionError {
    #[error("an election needs at least one candidate")]
    NoCandidates,
    #[error("candidate {candidate} appears more than once in a ballot")]
    DuplicateCandidateInBallot { candidate: usize },
    #[error("candidate {candidate} is out of range for {num_candidates} candidates")]
    CandidateOutOfRange {
        candidate: usize,
        num_candidates: usize,
    },
    #[error("ballot weight must be positive")]
    NonPositiveWeight,
    #[error("ballot ranks no candidate")]
    EmptyRanking,
}

/// A strict ranking of a non-empty subset of the candidates, cast with an
/// integer multiplicity.
#[derive(Clone, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct PartialBallot {
    ranking: Vec<CandidateId>,
    weight: u64,
}

impl PartialBallot {
    /// Builds a ballot, checking only the properties that do not depend on
    /// the roster. Roster checks happen in [`Election::new`].
    pub fn new(ranking: Vec<CandidateId>, weight: u64) -> Result<Self, ElectionError> {
        if ranking.is_empty() {
            return Err(ElectionError::EmptyRanking);
        }
        if weight == 0 {
            return Err(ElectionError::NonPositiveWeight);
        }
        let mut seen = BTreeSet::new();
        for c in &ranking {
            if !seen.insert(*c) {
                return Err(ElectionError::DuplicateCandidateInBallot { candidate: c.0 });
            }
        }
        Ok(PartialBallot { ranking, weight })
    }

    /// Convenience constructor from raw indices.
    pub fn from_indices(ranking: &[usize], weight: u64) -> Result<Self, ElectionError> {
        Self::new(ranking.iter().copied().map(CandidateId).collect(), weight)
    }

    pub fn ranking(&self) -> &[CandidateId] {
        &self.ranking
    }

    pub fn weight(&self) -> u64 {
        self.weight
    }

    /// Number of ranked candidates, `k`.
    pub fn len(&self) -> usize {
        self.ranking.len()
    }

    pub fn is_empty(&self) -> bool {
        self.ranking.is_empty()
    }

    pub fn is_complete(&self, num_candidates: usize) -> bool {
        self.ranking.len() == num_candidates
    }

    pub fn with_weight(&self, weight: u64) -> Result<Self, ElectionError> {
        if weight == 0 {
            return Err(ElectionError::NonPositiveWeight);
        }
        Ok(PartialBallot {
            ranking: self.ranking.clone(),
            weight,
        })
    }

    /// 1-based position of `c`, or `None` when `c` is unranked.
    pub fn rank_of(&self, c: CandidateId) -> Option<usize> {
        self.ranking.iter().position(|&r| r == c).map(|i| i + 1)
    }

    pub fn contains(&self, c: CandidateId) -> bool {
        self.ranking.contains(&c)
    }

    /// Keeps only the candidates in `active`, preserving order. Returns `None`
    /// when nothing is left (the ballot is exhausted).
    pub fn restrict(&self, active: &BTreeSet<CandidateId>) -> Option<PartialBallot> {
        let ranking: Vec<CandidateId> = self
            .ranking
            .iter()
            .copied()
            .filter(|c| active.contains(c))
            .collect();
        if ranking.is_empty() {
            None
        } else {
            Some(PartialBallot {
                ranking,
                weight: self.weight,
            })
        }
    }

    fn check_roster(&self, num_candidates: usize) -> Result<(), ElectionError> {
        for c in &self.ranking {
            if c.0 >= num_candidates {
                return Err(ElectionError::CandidateOutOfRange {
                    candidate: c.0,
                    num_candidates,
                });
            }
        }
        Ok(())
    }
}

impl fmt::Display for PartialBallot {
    /// Same shape as a PrefLib ballot line: `weight,c1,c2,...` with 1-based
    /// candidate numbers.
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.weight)?;
        for c in &self.ranking {
            write!(f, ",{}", c.0 + 1)?;
        }
        Ok(())
    }
}

/// See [`PartialBallot::rank_of`].
pub fn rank_of(ballot: &PartialBallot, c: CandidateId) -> Option<usize> {
    ballot.rank_of(c)
}

/// See [`PartialBallot::restrict`].
pub fn restrict_ballot(
    ballot: &PartialBallot,
    active: &BTreeSet<CandidateId>,
) -> Option<PartialBallot> {
    ballot.restrict(active)
}

/// How ties between candidates are resolved.
///
/// The favored candidate (normally the manipulators' choice) wins every tie
/// it takes part in. Other ties go to the candidate with the lowest position
/// in `fallback`.
#[derive(Clone, Debug, PartialEq, Eq, Default)]
pub struct TieBreakPolicy {
    favored: Option<CandidateId>,
    /// Explicit priority order, most preferred first. `None` means ascending
    /// index order.
    fallback: Option<Vec<CandidateId>>,
}

impl TieBreakPolicy {
    /// Ascending index order, no favored candidate.
    pub fn index_order() -> Self {
        Self::default()
    }

    pub fn favoring(c: CandidateId) -> Self {
        TieBreakPolicy {
            favored: Some(c),
            fallback: None,
        }
    }

    /// Uses `order` (most preferred first) as the fallback. Candidates missing
    /// from `order` rank after it, by index.
    pub fn with_fallback(mut self, order: Vec<CandidateId>) -> Self {
        self.fallback = Some(order);
        self
    }

    pub fn with_favored(mut self, c: Option<CandidateId>) -> Self {
        self.favored = c;
        self
    }

    pub fn favored(&self) -> Option<CandidateId> {
        self.favored
    }

    /// Sort key: smaller means more preferred by the fallback order.
    fn fallback_key(&self, c: CandidateId) -> (usize, usize) {
        match &self.fallback {
            None => (0, c.0),
            Some(order) => match order.iter().position(|&o| o == c) {
                Some(pos) => (0, pos),
                None => (1, c.0),
            },
        }
    }

    /// Full priority key: the favored candidate first, then fallback order.
    fn priority_key(&self, c: CandidateId) -> (bool, (usize, usize)) {
        (self.favored != Some(c), self.fallback_key(c))
    }

    /// All `num_candidates` candidates, most favored first.
    pub fn priority_order(&self, num_candidates: usize) -> Vec<CandidateId> {
        let mut all: Vec<CandidateId> = (0..num_candidates).map(CandidateId).collect();
        all.sort_by_key(|&c| self.priority_key(c));
        all
    }

    /// Winner of a tie among `tied`.
    ///
    /// Panics if `tied` is empty.
    pub fn break_tie<I>(&self, tied: I) -> CandidateId
    where
        I: IntoIterator<Item = CandidateId>,
    {
        tied.into_iter()
            .min_by_key(|&c| self.priority_key(c))
            .expect("break_tie called with no candidates")
    }

    /// The candidate that loses a tie among `tied`: the one this policy
    /// favors least. Never the favored candidate unless it is alone.
    pub fn least_favored<I>(&self, tied: I) -> CandidateId
    where
        I: IntoIterator<Item = CandidateId>,
    {
        tied.into_iter()
            .max_by_key(|&c| self.priority_key(c))
            .expect("least_favored called with no candidates")
    }
}

/// See [`TieBreakPolicy::break_tie`].
pub fn break_tie(tied: &[CandidateId], policy: &TieBreakPolicy) -> CandidateId {
    policy.break_tie(tied.iter().copied())
}

/// Candidate roster plus a multiset of weighted partial ballots.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Election {
    num_candidates: usize,
    ballots: Vec<PartialBallot>,
    tie_break: TieBreakPolicy,
    total_weight: u64,
}

impl Election {
    pub fn new(
        num_candidates: usize,
        ballots: Vec<PartialBallot>,
        tie_break: TieBreakPolicy,
    ) -> Result<Self, ElectionError> {
        if num_candidates == 0 {
            return Err(ElectionError::NoCandidates);
        }
        for b in &ballots {
            b.check_roster(num_candidates)?;
        }
        if let Some(f) = tie_break.favored {
            if f.0 >= num_candidates {
                return Err(ElectionError::CandidateOutOfRange {
                    candidate: f.0,
                    num_candidates,
                });
            }
        }
        let total_weight = ballots.iter().map(|b| b.weight).sum();
        Ok(Election {
            num_candidates,
            ballots,
            tie_break,
            total_weight,
        })
    }

    /// Builds an election from `(ranking, weight)` pairs of raw indices.
    pub fn from_rankings(
        num_candidates: usize,
        ballots: &[(&[usize], u64)],
        tie_break: TieBreakPolicy,
    ) -> Result<Self, ElectionError> {
        let ballots = ballots
            .iter()
            .map(|(r, w)| PartialBallot::from_indices(r, *w))
            .collect::<Result<Vec<_>, _>>()?;
        Self::new(num_candidates, ballots, tie_break)
    }

    pub fn num_candidates(&self) -> usize {
        self.num_candidates
    }

    pub fn ballots(&self) -> &[PartialBallot] {
        &self.ballots
    }

    pub fn tie_break(&self) -> &TieBreakPolicy {
        &self.tie_break
    }

    /// Total weight `n`.
    pub fn total_weight(&self) -> u64 {
        self.total_weight
    }

    pub fn candidates(&self) -> impl Iterator<Item = CandidateId> {
        (0..self.num_candidates).map(CandidateId)
    }

    pub fn with_tie_break(&self, tie_break: TieBreakPolicy) -> Result<Self, ElectionError> {
        Self::new(self.num_candidates, self.ballots.clone(), tie_break)
    }

    /// A copy of this election with `extra` ballots appended.
    pub fn with_extra_ballots(&self, extra: &[PartialBallot]) -> Result<Self, ElectionError> {
        let mut ballots = self.ballots.clone();
        ballots.extend_from_slice(extra);
        Self::new(self.num_candidates, ballots, self.tie_break.clone())
    }
}

/// See [`Election::new`].
pub fn new_election(
    num_candidates: usize,
    ballots: Vec<PartialBallot>,
    tie_break: TieBreakPolicy,
) -> Result<Election, ElectionError> {
    Election::new(num_candidates, ballots, tie_break)
}
