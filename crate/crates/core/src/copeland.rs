//! Pairwise majority tournament and Copeland scoring.
//!
//! Unranked candidates on a ballot are tied in last place: a ranked
//! candidate beats every unranked one, and two unranked candidates express
//! no preference between each other.

use std::fmt;

use crate::election::{CandidateId, Election, PartialBallot};

/// How a pairwise contest is decided.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Hash)]
pub enum PairwiseReading {
    /// `i` beats `j` when more weight ranks `i` over `j` than `j` over `i`.
    #[default]
    ExpressedMajority,
    /// `i` beats `j` when more than half of all weight ranks `i` over `j`.
    /// Coincides with the expressed reading on complete ballots only.
    HalfElectorate,
}

/// `n_over[i][j]`: total weight of ballots ranking `i` above `j`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct PairwiseMatrix {
    n: usize,
    total_weight: u64,
    n_over: Vec<u64>,
}

impl PairwiseMatrix {
    pub fn zeros(num_candidates: usize) -> Self {
        PairwiseMatrix {
            n: num_candidates,
            total_weight: 0,
            n_over: vec![0; num_candidates * num_candidates],
        }
    }

    pub fn num_candidates(&self) -> usize {
        self.n
    }

    pub fn total_weight(&self) -> u64 {
        self.total_weight
    }

    pub fn get(&self, i: CandidateId, j: CandidateId) -> u64 {
        self.n_over[i.0 * self.n + j.0]
    }

    /// `n_over(i, j) - n_over(j, i)`.
    pub fn margin(&self, i: CandidateId, j: CandidateId) -> i64 {
        self.get(i, j) as i64 - self.get(j, i) as i64
    }

    pub fn add_ballot(&mut self, ballot: &PartialBallot) {
        let w = ballot.weight();
        let n = self.n;
        let mut ranked = vec![false; n];
        for (pos, &hi) in ballot.ranking().iter().enumerate() {
            ranked[hi.0] = true;
            for &lo in &ballot.ranking()[pos + 1..] {
                self.n_over[hi.0 * n + lo.0] += w;
            }
        }
        for &hi in ballot.ranking() {
            for (lo, is_ranked) in ranked.iter().enumerate() {
                if !is_ranked {
                    self.n_over[hi.0 * n + lo] += w;
                }
            }
        }
        self.total_weight += w;
    }

    /// Adds (or with `negate`, removes) another matrix's counts.
    pub(crate) fn accumulate(&mut self, other: &PairwiseMatrix, negate: bool) {
        debug_assert_eq!(self.n, other.n);
        if negate {
            self.n_over.iter_mut().zip(&other.n_over).for_each(|(a, b)| *a -= b);
            self.total_weight -= other.total_weight;
        } else {
            self.n_over.iter_mut().zip(&other.n_over).for_each(|(a, b)| *a += b);
            self.total_weight += other.total_weight;
        }
    }

    pub fn rows(&self) -> impl Iterator<Item = &[u64]> {
        self.n_over.chunks(self.n.max(1))
    }
}

impl fmt::Display for PairwiseMatrix {
    /// Integer grid, one row per candidate.
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for row in self.rows() {
            let line: Vec<String> = row.iter().map(|x| x.to_string()).collect();
            writeln!(f, "{}", line.join(" "))?;
        }
        Ok(())
    }
}

pub fn pairwise_matrix(election: &Election) -> PairwiseMatrix {
    let mut m = PairwiseMatrix::zeros(election.num_candidates());
    for b in election.ballots() {
        m.add_ballot(b);
    }
    m
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct CopelandScores(Vec<i64>);

impl CopelandScores {
    pub fn from_margin_signs(num_candidates: usize, sign: impl Fn(usize, usize) -> i64) -> Self {
        let mut scores = vec![0i64; num_candidates];
        for i in 0..num_candidates {
            for j in i + 1..num_candidates {
                let s = sign(i, j);
                scores[i] += s;
                scores[j] -= s;
            }
        }
        CopelandScores(scores)
    }

    pub fn score(&self, c: CandidateId) -> i64 {
        self.0[c.0]
    }

    pub fn as_slice(&self) -> &[i64] {
        &self.0
    }

    pub fn leaders(&self) -> Vec<CandidateId> {
        let best = self.0.iter().copied().max().unwrap_or(0);
        (0..self.0.len())
            .filter(|&i| self.0[i] == best)
            .map(CandidateId)
            .collect()
    }
}

/// Copeland^0.5 under the default expressed-majority reading.
pub fn copeland_scores(matrix: &PairwiseMatrix) -> CopelandScores {
    copeland_scores_with(matrix, PairwiseReading::ExpressedMajority)
}

pub fn copeland_scores_with(matrix: &PairwiseMatrix, reading: PairwiseReading) -> CopelandScores {
    let n = matrix.num_candidates();
    match reading {
        PairwiseReading::ExpressedMajority => CopelandScores::from_margin_signs(n, |i, j| {
            matrix.margin(CandidateId(i), CandidateId(j)).signum()
        }),
        PairwiseReading::HalfElectorate => {
            // +1 when N(i,j) > n/2, -1 when N(i,j) < n/2; not antisymmetric
            // once ballots abstain on a pair
            let total = matrix.total_weight();
            let scores = (0..n)
                .map(|i| {
                    (0..n)
                        .filter(|&j| j != i)
                        .map(|j| (2 * matrix.get(CandidateId(i), CandidateId(j))).cmp(&total) as i64)
                        .sum()
                })
                .collect();
            CopelandScores(scores)
        }
    }
}

pub fn copeland_winner(election: &Election) -> (CandidateId, CopelandScores) {
    copeland_winner_with(election, PairwiseReading::ExpressedMajority)
}

pub fn copeland_winner_with(
    election: &Election,
    reading: PairwiseReading,
) -> (CandidateId, CopelandScores) {
    let scores = copeland_scores_with(&pairwise_matrix(election), reading);
    let winner = election.tie_break().break_tie(scores.leaders());
    (winner, scores)
}
