//! Positional scoring rules over top-truncated ballots.
//!
//! A score vector `(s_1, ..., s_m)` is defined for complete ballots. When a
//! ballot ranks only `k < m` candidates, a [`ScoringScheme`] decides which
//! scores the ranked and unranked candidates receive. All arithmetic is exact.

use std::fmt;

use num_rational::Ratio;
use num_traits::{One, Zero};
use thiserror::Error;

use crate::election::{CandidateId, Election, PartialBallot};

pub type Rational = Ratio<i64>;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum ScoringError {
    #[error("score vector is empty")]
    EmptyVector,
    #[error("score vector has a negative entry at position {position}")]
    NegativeScore { position: usize },
    #[error("score vector increases at position {position}")]
    IncreasingScores { position: usize },
    #[error("score vector has {vector} entries but the election has {candidates} candidates")]
    LengthMismatch { vector: usize, candidates: usize },
    #[error("the shifted round-down rule fixes its own vector and does not accept another one")]
    ExternalVectorForShifted,
}

/// Non-negative, non-increasing positional scores.
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct ScoreVector(Vec<Rational>);

impl ScoreVector {
    pub fn new(scores: Vec<Rational>) -> Result<Self, ScoringError> {
        if scores.is_empty() {
            return Err(ScoringError::EmptyVector);
        }
        for (i, s) in scores.iter().enumerate() {
            if *s < Rational::zero() {
                return Err(ScoringError::NegativeScore { position: i + 1 });
            }
            if i > 0 && scores[i - 1] < *s {
                return Err(ScoringError::IncreasingScores { position: i + 1 });
            }
        }
        Ok(ScoreVector(scores))
    }

    pub fn from_integers(scores: &[i64]) -> Result<Self, ScoringError> {
        Self::new(scores.iter().map(|&s| Rational::from_integer(s)).collect())
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    /// `s_i` with 1-based `i`.
    pub fn score(&self, i: usize) -> Rational {
        self.0[i - 1]
    }

    pub fn as_slice(&self) -> &[Rational] {
        &self.0
    }

    pub fn total(&self) -> Rational {
        self.0.iter().copied().sum()
    }
}

/// `(m-1, m-2, ..., 0)`.
pub fn borda_vector(m: usize) -> ScoreVector {
    ScoreVector((0..m).rev().map(|s| Rational::from_integer(s as i64)).collect())
}

/// `(1, 0, ..., 0)`.
pub fn plurality_vector(m: usize) -> ScoreVector {
    ScoreVector(
        (0..m)
            .map(|i| if i == 0 { Rational::one() } else { Rational::zero() })
            .collect(),
    )
}

/// `(m+1, m, ..., 2)`, the vector implied by the shifted round-down rule on
/// complete ballots.
pub fn shifted_vector(m: usize) -> ScoreVector {
    ScoreVector(
        (0..m)
            .map(|i| Rational::from_integer((m - i + 1) as i64))
            .collect(),
    )
}

/// How a score vector is applied to a ballot ranking `k` of `m` candidates.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum ScoringScheme {
    /// i-th ranked gets `s_i`; unranked get 0.
    RoundUp,
    /// i-th ranked gets `s_{m-(k-i)-1}`; unranked get `s_m`. Complete ballots
    /// use the plain vector.
    RoundDown,
    /// i-th ranked gets `s_i`; unranked share the mean of `s_{k+1..m}`.
    Average,
    /// i-th of `k` ranked gets `k-i+2`, unranked get 0; complete ballots use
    /// `m-i+2`.
    ShiftedRoundDownZero,
}

impl fmt::Display for ScoringScheme {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let s = match self {
            ScoringScheme::RoundUp => "roundup",
            ScoringScheme::RoundDown => "rounddown",
            ScoringScheme::Average => "average",
            ScoringScheme::ShiftedRoundDownZero => "shifted",
        };
        f.write_str(s)
    }
}

/// Per-candidate contribution of a single unit-weight ballot.
///
/// `vector.len()` is taken as the number of candidates. For
/// [`ScoringScheme::ShiftedRoundDownZero`] only that length is used.
pub fn ballot_scores(
    ballot: &PartialBallot,
    vector: &ScoreVector,
    scheme: ScoringScheme,
) -> Vec<Rational> {
    let m = vector.len();
    let k = ballot.len();
    debug_assert!(k <= m);
    let mut out = vec![Rational::zero(); m];
    let complete = k == m;
    match scheme {
        ScoringScheme::RoundUp => {
            for (i, c) in ballot.ranking().iter().enumerate() {
                out[c.0] = vector.score(i + 1);
            }
        }
        ScoringScheme::RoundDown => {
            if complete {
                for (i, c) in ballot.ranking().iter().enumerate() {
                    out[c.0] = vector.score(i + 1);
                }
            } else {
                out.iter_mut().for_each(|s| *s = vector.score(m));
                for (i, c) in ballot.ranking().iter().enumerate() {
                    let pos = i + 1;
                    out[c.0] = vector.score(m - (k - pos) - 1);
                }
            }
        }
        ScoringScheme::Average => {
            if !complete {
                let rest: Rational = vector.as_slice()[k..].iter().copied().sum();
                let avg = rest / Rational::from_integer((m - k) as i64);
                out.iter_mut().for_each(|s| *s = avg);
            }
            for (i, c) in ballot.ranking().iter().enumerate() {
                out[c.0] = vector.score(i + 1);
            }
        }
        ScoringScheme::ShiftedRoundDownZero => {
            let top = if complete { m } else { k };
            for (i, c) in ballot.ranking().iter().enumerate() {
                let pos = i + 1;
                out[c.0] = Rational::from_integer((top - pos + 2) as i64);
            }
        }
    }
    out
}

/// A score vector paired with the scheme that applies it to partial ballots.
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct ScoringRule {
    vector: ScoreVector,
    scheme: ScoringScheme,
}

impl ScoringRule {
    pub fn new(vector: ScoreVector, scheme: ScoringScheme) -> Result<Self, ScoringError> {
        if scheme == ScoringScheme::ShiftedRoundDownZero && vector != shifted_vector(vector.len()) {
            return Err(ScoringError::ExternalVectorForShifted);
        }
        Ok(ScoringRule { vector, scheme })
    }

    pub fn borda(m: usize, scheme: ScoringScheme) -> Self {
        match scheme {
            ScoringScheme::ShiftedRoundDownZero => Self::shifted(m),
            _ => ScoringRule {
                vector: borda_vector(m),
                scheme,
            },
        }
    }

    /// Modified Borda: Borda vector with round-down.
    pub fn modified_borda(m: usize) -> Self {
        Self::borda(m, ScoringScheme::RoundDown)
    }

    pub fn shifted(m: usize) -> Self {
        ScoringRule {
            vector: shifted_vector(m),
            scheme: ScoringScheme::ShiftedRoundDownZero,
        }
    }

    pub fn vector(&self) -> &ScoreVector {
        &self.vector
    }

    pub fn scheme(&self) -> ScoringScheme {
        self.scheme
    }

    pub fn num_candidates(&self) -> usize {
        self.vector.len()
    }

    pub fn ballot_scores(&self, ballot: &PartialBallot) -> Vec<Rational> {
        ballot_scores(ballot, &self.vector, self.scheme)
    }

    pub fn evaluate(&self, election: &Election) -> Result<(CandidateId, ScoreTable), ScoringError> {
        evaluate_scoring(election, &self.vector, self.scheme)
    }
}

/// Exact per-candidate totals.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct ScoreTable(Vec<Rational>);

impl ScoreTable {
    pub fn score(&self, c: CandidateId) -> Rational {
        self.0[c.0]
    }

    pub fn as_slice(&self) -> &[Rational] {
        &self.0
    }

    pub fn max(&self) -> Rational {
        self.0.iter().copied().max().unwrap_or_else(Rational::zero)
    }

    /// Candidates whose total equals the maximum.
    pub fn leaders(&self) -> Vec<CandidateId> {
        let best = self.max();
        self.0
            .iter()
            .enumerate()
            .filter(|(_, s)| **s == best)
            .map(|(i, _)| CandidateId(i))
            .collect()
    }
}

/// Totals every ballot's weighted contribution and picks the top scorer,
/// resolving ties with the election's policy.
pub fn evaluate_scoring(
    election: &Election,
    vector: &ScoreVector,
    scheme: ScoringScheme,
) -> Result<(CandidateId, ScoreTable), ScoringError> {
    let m = election.num_candidates();
    if vector.len() != m {
        return Err(ScoringError::LengthMismatch {
            vector: vector.len(),
            candidates: m,
        });
    }
    let mut totals = vec![Rational::zero(); m];
    for ballot in election.ballots() {
        let w = Rational::from_integer(ballot.weight() as i64);
        for (t, s) in totals.iter_mut().zip(ballot_scores(ballot, vector, scheme)) {
            *t += s * w;
        }
    }
    let table = ScoreTable(totals);
    let winner = election.tie_break().break_tie(table.leaders());
    Ok((winner, table))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::election::TieBreakPolicy;
    use proptest::prelude::*;

    fn r(n: i64) -> Rational {
        Rational::from_integer(n)
    }

    fn ints(v: &[i64]) -> Vec<Rational> {
        v.iter().map(|&x| r(x)).collect()
    }

    #[test]
    fn standard_vectors() {
        assert_eq!(borda_vector(3).as_slice(), ints(&[2, 1, 0]).as_slice());
        assert_eq!(borda_vector(1).as_slice(), ints(&[0]).as_slice());
        assert_eq!(borda_vector(4).as_slice(), ints(&[3, 2, 1, 0]).as_slice());
        assert_eq!(plurality_vector(3).as_slice(), ints(&[1, 0, 0]).as_slice());
        assert_eq!(plurality_vector(1).as_slice(), ints(&[1]).as_slice());
        assert_eq!(plurality_vector(2).as_slice(), ints(&[1, 0]).as_slice());
        assert_eq!(shifted_vector(3).as_slice(), ints(&[4, 3, 2]).as_slice());
    }

    #[test]
    fn vector_validation() {
        assert_eq!(
            ScoreVector::from_integers(&[1, 2]),
            Err(ScoringError::IncreasingScores { position: 2 })
        );
        assert_eq!(
            ScoreVector::from_integers(&[1, -1]),
            Err(ScoringError::NegativeScore { position: 2 })
        );
        assert_eq!(ScoreVector::from_integers(&[]), Err(ScoringError::EmptyVector));
        assert_eq!(
            ScoringRule::new(borda_vector(3), ScoringScheme::ShiftedRoundDownZero),
            Err(ScoringError::ExternalVectorForShifted)
        );
        assert!(ScoringRule::new(shifted_vector(3), ScoringScheme::ShiftedRoundDownZero).is_ok());
    }

    #[test]
    fn partial_ballot_schemes() {
        // a=0, b=1, p=2
        let only_p = PartialBallot::from_indices(&[2], 1).unwrap();
        assert_eq!(
            ballot_scores(&only_p, &borda_vector(3), ScoringScheme::RoundDown),
            ints(&[0, 0, 1])
        );
        assert_eq!(
            ballot_scores(&only_p, &borda_vector(3), ScoringScheme::RoundUp),
            ints(&[0, 0, 2])
        );
        let one_of_four = PartialBallot::from_indices(&[0], 1).unwrap();
        assert_eq!(
            ballot_scores(&one_of_four, &borda_vector(4), ScoringScheme::Average),
            ints(&[3, 1, 1, 1])
        );
        let two = PartialBallot::from_indices(&[3, 1], 1).unwrap();
        assert_eq!(
            ballot_scores(&two, &borda_vector(4), ScoringScheme::RoundDown),
            ints(&[0, 1, 0, 2])
        );
        assert_eq!(
            ballot_scores(&two, &borda_vector(4), ScoringScheme::Average),
            vec![Rational::new(1, 2), r(2), Rational::new(1, 2), r(3)]
        );
        assert_eq!(
            ballot_scores(&two, &shifted_vector(4), ScoringScheme::ShiftedRoundDownZero),
            ints(&[0, 2, 0, 3])
        );
        let full = PartialBallot::from_indices(&[3, 1, 0, 2], 1).unwrap();
        assert_eq!(
            ballot_scores(&full, &shifted_vector(4), ScoringScheme::ShiftedRoundDownZero),
            ints(&[3, 4, 2, 5])
        );
    }

    #[test]
    fn thirds_are_exact() {
        let v = ScoreVector::from_integers(&[5, 1, 1, 0]).unwrap();
        let b = PartialBallot::from_indices(&[0], 1).unwrap();
        let s = ballot_scores(&b, &v, ScoringScheme::Average);
        assert_eq!(s[1], Rational::new(2, 3));
        assert_eq!(s.iter().copied().sum::<Rational>(), r(7));
    }

    #[test]
    fn evaluation() {
        let e = Election::from_rankings(
            3,
            &[(&[0, 1, 2], 1), (&[1, 0, 2], 1)],
            TieBreakPolicy::index_order(),
        )
        .unwrap();
        let (w, t) = evaluate_scoring(&e, &borda_vector(3), ScoringScheme::RoundUp).unwrap();
        assert_eq!(t.as_slice(), ints(&[3, 3, 0]).as_slice());
        assert_eq!(w, CandidateId(0));

        // modified Borda, a:6 b:6 single-candidate votes, two manipulator
        // blocs of weight 2
        let e = Election::from_rankings(
            3,
            &[(&[0], 6), (&[1], 6), (&[2, 0, 1], 2), (&[2, 1, 0], 2)],
            TieBreakPolicy::favoring(CandidateId(2)),
        )
        .unwrap();
        let (w, t) = ScoringRule::modified_borda(3).evaluate(&e).unwrap();
        assert_eq!(t.as_slice(), ints(&[8, 8, 8]).as_slice());
        assert_eq!(w, CandidateId(2));

        let e = Election::from_rankings(1, &[(&[0], 3)], TieBreakPolicy::index_order()).unwrap();
        let (w, t) = evaluate_scoring(&e, &plurality_vector(1), ScoringScheme::RoundUp).unwrap();
        assert_eq!((w, t.score(w)), (CandidateId(0), r(3)));

        assert!(matches!(
            evaluate_scoring(&e, &borda_vector(2), ScoringScheme::RoundUp),
            Err(ScoringError::LengthMismatch { .. })
        ));
    }

    fn arb_vector(m: usize) -> impl Strategy<Value = ScoreVector> {
        proptest::collection::vec(0i64..6, m).prop_map(|mut v| {
            v.sort_unstable_by(|a, b| b.cmp(a));
            ScoreVector::from_integers(&v).unwrap()
        })
    }

    fn arb_ballot(m: usize) -> impl Strategy<Value = PartialBallot> {
        (Just((0..m).collect::<Vec<_>>()).prop_shuffle(), 1..=m).prop_map(|(perm, k)| {
            PartialBallot::from_indices(&perm[..k], 1).unwrap()
        })
    }

    fn arb_scheme() -> impl Strategy<Value = ScoringScheme> {
        prop_oneof![
            Just(ScoringScheme::RoundUp),
            Just(ScoringScheme::RoundDown),
            Just(ScoringScheme::Average),
            Just(ScoringScheme::ShiftedRoundDownZero),
        ]
    }

    proptest! {
        #[test]
        fn higher_rank_never_scores_less(
            (v, b) in (1usize..6).prop_flat_map(|m| (arb_vector(m), arb_ballot(m))),
            scheme in arb_scheme(),
        ) {
            let v = if scheme == ScoringScheme::ShiftedRoundDownZero { shifted_vector(v.len()) } else { v };
            let s = ballot_scores(&b, &v, scheme);
            let ranked: Vec<Rational> = b.ranking().iter().map(|c| s[c.0]).collect();
            for w in ranked.windows(2) {
                prop_assert!(w[0] >= w[1]);
            }
            let lowest_ranked = *ranked.last().unwrap();
            for c in 0..v.len() {
                if !b.contains(CandidateId(c)) {
                    prop_assert!(lowest_ranked >= s[c]);
                }
            }
        }
    }
}
