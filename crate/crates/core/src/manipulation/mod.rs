//! Constructive manipulation: finding ballots for a coalition that make a
//! preferred candidate win, or certifying that none exist.
//!
//! Every solver checks its witness with [`verify_manipulation`] before
//! reporting success. Ties are always broken in favour of the preferred
//! candidate.

mod exact;
mod greedy;
mod round_up;
mod weighted;

use std::collections::BTreeSet;
use std::time::Duration;

use thiserror::Error;

use crate::election::{CandidateId, Election, ElectionError, PartialBallot, TieBreakPolicy};
use crate::rule::Rule;
use crate::scoring::{Rational, ScoringError};

pub use exact::{exact_min_coalition, ExactSearch};
pub use greedy::greedy_copeland;
pub use round_up::manipulate_round_up;
pub use weighted::{
    weighted_coalition_copeland_dp, weighted_coalition_copeland_dp_with,
    weighted_coalition_scoring_dp, weighted_coalition_scoring_dp_with, DpLimits,
    MAX_DP_CANDIDATES,
};

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum ManipulationError {
    #[error(transparent)]
    Election(#[from] ElectionError),
    #[error(transparent)]
    Scoring(#[from] ScoringError),
    #[error("preferred candidate {preferred} is not among {num_candidates} candidates")]
    PreferredOutOfRange {
        preferred: usize,
        num_candidates: usize,
    },
    #[error("maximum ballot length {length} must be between 1 and {num_candidates}")]
    BallotLengthOutOfRange { length: usize, num_candidates: usize },
    #[error("coalition weights must be positive")]
    NonPositiveCoalitionWeight,
    #[error("ballots do not match the coalition: {0}")]
    CoalitionShapeMismatch(String),
    #[error("this solver does not handle the rule or coalition: {0}")]
    RuleMismatch(&'static str),
    #[error("weighted solvers support at most {max} candidates, got {got}")]
    TooManyCandidates { got: usize, max: usize },
    #[error("dynamic program exceeded {cap} states")]
    StateSpaceExceeded { cap: usize },
}

/// Who manipulates.
#[derive(Clone, Debug, PartialEq, Eq)]
pub enum Coalition {
    /// `count` voters of weight 1.
    Unweighted(usize),
    Weighted(Vec<u64>),
}

impl Coalition {
    pub fn weights(&self) -> Vec<u64> {
        match self {
            Coalition::Unweighted(c) => vec![1; *c],
            Coalition::Weighted(w) => w.clone(),
        }
    }

    pub fn len(&self) -> usize {
        match self {
            Coalition::Unweighted(c) => *c,
            Coalition::Weighted(w) => w.len(),
        }
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }
}

/// Fixed (sincere) ballots, the rule, the preferred candidate `p` and the
/// coalition trying to elect `p`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct ManipulationProblem {
    fixed: Election,
    preferred: CandidateId,
    rule: Rule,
    coalition: Coalition,
    max_ballot_length: usize,
}

impl ManipulationProblem {
    pub fn new(
        fixed: Election,
        preferred: CandidateId,
        rule: Rule,
        coalition: Coalition,
        max_ballot_length: usize,
    ) -> Result<Self, ManipulationError> {
        let m = fixed.num_candidates();
        if preferred.0 >= m {
            return Err(ManipulationError::PreferredOutOfRange {
                preferred: preferred.0,
                num_candidates: m,
            });
        }
        if max_ballot_length == 0 || max_ballot_length > m {
            return Err(ManipulationError::BallotLengthOutOfRange {
                length: max_ballot_length,
                num_candidates: m,
            });
        }
        if let Coalition::Weighted(w) = &coalition {
            if w.contains(&0) {
                return Err(ManipulationError::NonPositiveCoalitionWeight);
            }
        }
        if let Rule::Scoring(r) = &rule {
            if r.num_candidates() != m {
                return Err(ScoringError::LengthMismatch {
                    vector: r.num_candidates(),
                    candidates: m,
                }
                .into());
            }
        }
        let policy = fixed.tie_break().clone().with_favored(Some(preferred));
        let fixed = fixed.with_tie_break(policy)?;
        Ok(ManipulationProblem {
            fixed,
            preferred,
            rule,
            coalition,
            max_ballot_length,
        })
    }

    /// Non-manipulator ballots; their tie-break policy favours `preferred`.
    pub fn fixed(&self) -> &Election {
        &self.fixed
    }

    pub fn preferred(&self) -> CandidateId {
        self.preferred
    }

    pub fn rule(&self) -> &Rule {
        &self.rule
    }

    pub fn coalition(&self) -> &Coalition {
        &self.coalition
    }

    pub fn max_ballot_length(&self) -> usize {
        self.max_ballot_length
    }

    pub fn num_candidates(&self) -> usize {
        self.fixed.num_candidates()
    }

    pub fn with_coalition(&self, coalition: Coalition) -> Result<Self, ManipulationError> {
        Self::new(
            self.fixed.clone(),
            self.preferred,
            self.rule.clone(),
            coalition,
            self.max_ballot_length,
        )
    }

    pub fn with_max_ballot_length(&self, length: usize) -> Result<Self, ManipulationError> {
        Self::new(
            self.fixed.clone(),
            self.preferred,
            self.rule.clone(),
            self.coalition.clone(),
            length,
        )
    }

    /// Whether `p` wins once `ballots` are added, without any shape checks.
    pub(crate) fn elects_preferred(&self, ballots: &[PartialBallot]) -> Result<bool, ManipulationError> {
        let election = self.fixed.with_extra_ballots(ballots)?;
        Ok(self.rule.winner(&election)? == self.preferred)
    }

    pub(crate) fn tie_break(&self) -> &TieBreakPolicy {
        self.fixed.tie_break()
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub enum Outcome {
    /// One ballot per coalition member, in coalition order.
    Success(Vec<PartialBallot>),
    Impossible,
    Timeout,
}

#[derive(Clone, Debug, Default, PartialEq, Eq)]
pub struct SearchStats {
    pub nodes: u64,
    pub elapsed: Duration,
    /// Coalition size of the returned witness.
    pub coalition_size: Option<usize>,
    /// Every coalition smaller than this is known to fail.
    pub lower_bound: usize,
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct ManipulationResult {
    pub outcome: Outcome,
    pub stats: SearchStats,
}

impl ManipulationResult {
    pub fn is_success(&self) -> bool {
        matches!(self.outcome, Outcome::Success(_))
    }

    pub fn witness(&self) -> Option<&[PartialBallot]> {
        match &self.outcome {
            Outcome::Success(b) => Some(b),
            _ => None,
        }
    }
}

/// True iff adding `ballots` to the fixed profile elects `p`.
///
/// `ballots` must line up with the coalition: one ballot per member with the
/// member's weight, each no longer than the problem's maximum length.
pub fn verify_manipulation(
    problem: &ManipulationProblem,
    ballots: &[PartialBallot],
) -> Result<bool, ManipulationError> {
    let weights = problem.coalition.weights();
    if weights.len() != ballots.len() {
        return Err(ManipulationError::CoalitionShapeMismatch(format!(
            "{} ballots for {} coalition members",
            ballots.len(),
            weights.len()
        )));
    }
    for (i, (b, w)) in ballots.iter().zip(&weights).enumerate() {
        if b.weight() != *w {
            return Err(ManipulationError::CoalitionShapeMismatch(format!(
                "ballot {} has weight {} but member weight is {}",
                i + 1,
                b.weight(),
                w
            )));
        }
        if b.len() > problem.max_ballot_length {
            return Err(ManipulationError::CoalitionShapeMismatch(format!(
                "ballot {} ranks {} candidates, limit is {}",
                i + 1,
                b.len(),
                problem.max_ballot_length
            )));
        }
    }
    problem.elects_preferred(ballots)
}

/// Extends every ballot to a complete one: `p` first if missing, then the
/// remaining candidates in ascending index order.
pub fn complete_stv_ballots(
    ballots: &[PartialBallot],
    preferred: CandidateId,
    num_candidates: usize,
) -> Vec<PartialBallot> {
    ballots
        .iter()
        .map(|b| {
            let mut ranking = b.ranking().to_vec();
            if !ranking.contains(&preferred) {
                ranking.push(preferred);
            }
            let present: BTreeSet<CandidateId> = ranking.iter().copied().collect();
            ranking.extend((0..num_candidates).map(CandidateId).filter(|c| !present.contains(c)));
            PartialBallot::new(ranking, b.weight()).expect("completion keeps ballots valid")
        })
        .collect()
}

/// All rankings of `1..=max_len` distinct candidates, shortest first, then
/// lexicographic.
pub fn enumerate_rankings(num_candidates: usize, max_len: usize) -> Vec<Vec<CandidateId>> {
    fn extend(
        m: usize,
        len: usize,
        prefix: &mut Vec<CandidateId>,
        used: &mut Vec<bool>,
        out: &mut Vec<Vec<CandidateId>>,
    ) {
        if prefix.len() == len {
            out.push(prefix.clone());
            return;
        }
        for c in 0..m {
            if !used[c] {
                used[c] = true;
                prefix.push(CandidateId(c));
                extend(m, len, prefix, used, out);
                prefix.pop();
                used[c] = false;
            }
        }
    }
    let mut out = Vec::new();
    for len in 1..=max_len.min(num_candidates) {
        extend(
            num_candidates,
            len,
            &mut Vec::with_capacity(len),
            &mut vec![false; num_candidates],
            &mut out,
        );
    }
    out
}

/// Scales rational vectors by the least common multiple of their
/// denominators so they can be added as integers.
pub(crate) fn scale_to_integers(vectors: &[Vec<Rational>]) -> Vec<Vec<i64>> {
    let denom = vectors
        .iter()
        .flatten()
        .fold(1i64, |acc, r| num_integer::lcm(acc, *r.denom()));
    vectors
        .iter()
        .map(|v| v.iter().map(|r| (r * denom).to_integer()).collect())
        .collect()
}

/// Indices of vectors not weakly dominated (componentwise `>=`) by an
/// earlier-kept or strictly better vector. Among equal vectors the first is
/// kept.
pub(crate) fn undominated(vectors: &[Vec<i64>]) -> Vec<usize> {
    let dominates = |a: &[i64], b: &[i64]| a.iter().zip(b).all(|(x, y)| x <= y);
    let mut keep = Vec::new();
    'outer: for (i, v) in vectors.iter().enumerate() {
        for (j, u) in vectors.iter().enumerate() {
            if i == j {
                continue;
            }
            if dominates(u, v) && (u != v || j < i) {
                continue 'outer;
            }
        }
        keep.push(i);
    }
    keep
}

fn finish(
    problem: &ManipulationProblem,
    ballots: Vec<PartialBallot>,
    stats: SearchStats,
) -> Result<ManipulationResult, ManipulationError> {
    let outcome = if verify_manipulation(problem, &ballots)? {
        Outcome::Success(ballots)
    } else {
        Outcome::Impossible
    };
    Ok(ManipulationResult { outcome, stats })
}

/// Ballots `(p)` with each member's weight.
fn singleton_ballots(problem: &ManipulationProblem) -> Vec<PartialBallot> {
    problem
        .coalition
        .weights()
        .into_iter()
        .map(|w| PartialBallot::new(vec![problem.preferred], w).expect("positive weight"))
        .collect()
}
