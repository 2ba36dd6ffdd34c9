//! Smallest unweighted coalition that can elect `p`.
//!
//! Iterative deepening over the coalition size. For each size the search
//! walks multisets of ballots (non-decreasing type indices), since identical
//! voters are interchangeable.

use std::collections::HashSet;
use std::time::{Duration, Instant};

use super::{
    enumerate_rankings, scale_to_integers, undominated, verify_manipulation, Coalition,
    ManipulationError, ManipulationProblem, ManipulationResult, Outcome, SearchStats,
};
use crate::copeland::{copeland_scores_with, PairwiseMatrix, PairwiseReading};
use crate::election::{CandidateId, PartialBallot};
use crate::rule::Rule;
use crate::scoring::{Rational, ScoringRule};

/// Options for [`exact_min_coalition`].
#[derive(Clone, Debug)]
pub struct ExactSearch {
    /// Largest coalition tried.
    pub limit: usize,
    pub timeout: Option<Duration>,
    /// Restrict to ballot types that are never worse than the ones dropped
    /// (`p` first, dominated score patterns removed). Off means plain
    /// exhaustive enumeration.
    pub prune: bool,
}

impl ExactSearch {
    pub fn new(limit: usize, timeout: Option<Duration>) -> Self {
        ExactSearch {
            limit,
            timeout,
            prune: true,
        }
    }
}

/// See [`ExactSearch`]. The problem's coalition must be unweighted; its size
/// is ignored in favour of `limit`.
pub fn exact_min_coalition(
    problem: &ManipulationProblem,
    limit: usize,
    timeout: Option<Duration>,
) -> Result<ManipulationResult, ManipulationError> {
    ExactSearch::new(limit, timeout).run(problem)
}

enum State {
    /// `gap[c] = total(c) - total(p)`, scaled to integers.
    Scoring {
        gap: Vec<i64>,
        deltas: Vec<Vec<i64>>,
        /// Smallest per-candidate delta over all types.
        best_delta: Vec<i64>,
    },
    Copeland {
        matrix: PairwiseMatrix,
        types: Vec<PairwiseMatrix>,
        reading: PairwiseReading,
    },
    Stv,
}

struct Search<'a> {
    problem: &'a ManipulationProblem,
    ballots: Vec<PartialBallot>,
    state: State,
    deadline: Option<Instant>,
    nodes: u64,
    chosen: Vec<usize>,
}

struct TimedOut;

impl ExactSearch {
    pub fn run(&self, problem: &ManipulationProblem) -> Result<ManipulationResult, ManipulationError> {
        if !matches!(problem.coalition(), Coalition::Unweighted(_)) {
            return Err(ManipulationError::RuleMismatch(
                "minimum coalition search is for unweighted voters",
            ));
        }
        let start = Instant::now();
        let mut search = Search::new(problem, self)?;
        let mut stats = SearchStats::default();
        for size in 0..=self.limit {
            stats.lower_bound = size;
            match search.level(size) {
                Err(TimedOut) => {
                    stats.nodes = search.nodes;
                    stats.elapsed = start.elapsed();
                    return Ok(ManipulationResult {
                        outcome: Outcome::Timeout,
                        stats,
                    });
                }
                Ok(Some(ballots)) => {
                    stats.nodes = search.nodes;
                    stats.elapsed = start.elapsed();
                    stats.coalition_size = Some(size);
                    let sized = problem.with_coalition(Coalition::Unweighted(size))?;
                    if !verify_manipulation(&sized, &ballots)? {
                        // incremental evaluation disagreed with the rule
                        return Ok(ManipulationResult {
                            outcome: Outcome::Impossible,
                            stats,
                        });
                    }
                    return Ok(ManipulationResult {
                        outcome: Outcome::Success(ballots),
                        stats,
                    });
                }
                Ok(None) => {}
            }
        }
        stats.lower_bound = self.limit + 1;
        stats.nodes = search.nodes;
        stats.elapsed = start.elapsed();
        Ok(ManipulationResult {
            outcome: Outcome::Impossible,
            stats,
        })
    }
}

/// Ballot rankings worth trying for `problem`.
fn candidate_rankings(problem: &ManipulationProblem, prune: bool) -> Vec<Vec<CandidateId>> {
    let m = problem.num_candidates();
    let len = problem.max_ballot_length();
    let p = problem.preferred();
    let all = enumerate_rankings(m, len);
    if !prune {
        return all;
    }
    match problem.rule() {
        // Moving p to the top never lowers p and never raises anyone else,
        // for every scheme over a non-increasing vector.
        Rule::Scoring(_) => all.into_iter().filter(|r| r[0] == p).collect(),
        // Moving p to the top keeps every other pair intact. A ballot
        // without p that is already at the length cap cannot be rewritten
        // that way unless it leaves at most one rival unranked.
        Rule::Copeland(_) => all
            .into_iter()
            .filter(|r| r[0] == p || (!r.contains(&p) && r.len() == len && len + 2 <= m))
            .collect(),
        Rule::Stv => all,
    }
}

fn scoring_state(
    problem: &ManipulationProblem,
    rule: &ScoringRule,
    rankings: &mut Vec<Vec<CandidateId>>,
    prune: bool,
) -> Result<State, ManipulationError> {
    let p = problem.preferred().0;
    let (_, table) = rule.evaluate(problem.fixed())?;
    let mut vectors: Vec<Vec<Rational>> = vec![table.as_slice().to_vec()];
    for r in rankings.iter() {
        let b = PartialBallot::new(r.clone(), 1)?;
        vectors.push(rule.ballot_scores(&b));
    }
    let scaled = scale_to_integers(&vectors);
    let rel = |v: &Vec<i64>| v.iter().map(|x| x - v[p]).collect::<Vec<i64>>();
    let gap = rel(&scaled[0]);
    let mut deltas: Vec<Vec<i64>> = scaled[1..].iter().map(rel).collect();
    if prune {
        let keep = undominated(&deltas);
        *rankings = keep.iter().map(|&i| rankings[i].clone()).collect();
        deltas = keep.iter().map(|&i| deltas[i].clone()).collect();
    }
    let m = gap.len();
    let best_delta = (0..m)
        .map(|c| deltas.iter().map(|d| d[c]).min().unwrap_or(0))
        .collect();
    Ok(State::Scoring {
        gap,
        deltas,
        best_delta,
    })
}

impl<'a> Search<'a> {
    fn new(problem: &'a ManipulationProblem, opts: &ExactSearch) -> Result<Self, ManipulationError> {
        let mut rankings = candidate_rankings(problem, opts.prune);
        let m = problem.num_candidates();
        let state = match problem.rule() {
            Rule::Scoring(rule) => scoring_state(problem, rule, &mut rankings, opts.prune)?,
            Rule::Copeland(reading) => {
                let mut matrix = PairwiseMatrix::zeros(m);
                for b in problem.fixed().ballots() {
                    matrix.add_ballot(b);
                }
                let mut types = Vec::new();
                let mut seen = HashSet::new();
                let mut kept = Vec::new();
                for r in rankings {
                    let mut t = PairwiseMatrix::zeros(m);
                    t.add_ballot(&PartialBallot::new(r.clone(), 1)?);
                    // rankings of m-1 and m candidates express the same pairs
                    if !opts.prune || seen.insert(t.to_string()) {
                        types.push(t);
                        kept.push(r);
                    }
                }
                rankings = kept;
                State::Copeland {
                    matrix,
                    types,
                    reading: *reading,
                }
            }
            Rule::Stv => State::Stv,
        };
        let ballots = rankings
            .into_iter()
            .map(|r| PartialBallot::new(r, 1))
            .collect::<Result<Vec<_>, _>>()?;
        Ok(Search {
            problem,
            ballots,
            state,
            deadline: opts.timeout.map(|t| Instant::now() + t),
            nodes: 0,
            chosen: Vec::new(),
        })
    }

    fn level(&mut self, size: usize) -> Result<Option<Vec<PartialBallot>>, TimedOut> {
        self.chosen.clear();
        if self.dfs(0, size)? {
            Ok(Some(self.chosen.iter().map(|&i| self.ballots[i].clone()).collect()))
        } else {
            Ok(None)
        }
    }

    fn tick(&mut self) -> Result<(), TimedOut> {
        self.nodes += 1;
        if self.nodes.is_multiple_of(256) {
            if let Some(d) = self.deadline {
                if Instant::now() >= d {
                    return Err(TimedOut);
                }
            }
        }
        Ok(())
    }

    /// Can `remaining` more voters still pull every rival level with `p`?
    fn feasible(&self, remaining: usize) -> bool {
        match &self.state {
            State::Scoring {
                gap, best_delta, ..
            } => gap
                .iter()
                .zip(best_delta)
                .all(|(g, d)| g + remaining as i64 * d <= 0),
            _ => true,
        }
    }

    fn elects_p(&self) -> bool {
        let p = self.problem.preferred();
        match &self.state {
            State::Scoring { gap, .. } => gap.iter().all(|&g| g <= 0),
            State::Copeland {
                matrix, reading, ..
            } => {
                let scores = copeland_scores_with(matrix, *reading);
                let best = scores.as_slice().iter().copied().max().unwrap_or(0);
                scores.score(p) == best
            }
            State::Stv => {
                let ballots: Vec<PartialBallot> =
                    self.chosen.iter().map(|&i| self.ballots[i].clone()).collect();
                self.problem.elects_preferred(&ballots).unwrap_or(false)
            }
        }
    }

    fn apply(&mut self, i: usize, undo: bool) {
        match &mut self.state {
            State::Scoring { gap, deltas, .. } => {
                for (g, d) in gap.iter_mut().zip(&deltas[i]) {
                    if undo {
                        *g -= d
                    } else {
                        *g += d
                    }
                }
            }
            State::Copeland { matrix, types, .. } => matrix.accumulate(&types[i], undo),
            State::Stv => {}
        }
        if undo {
            self.chosen.pop();
        } else {
            self.chosen.push(i);
        }
    }

    fn dfs(&mut self, from: usize, remaining: usize) -> Result<bool, TimedOut> {
        self.tick()?;
        if !self.feasible(remaining) {
            return Ok(false);
        }
        if remaining == 0 {
            return Ok(self.elects_p());
        }
        for i in from..self.ballots.len() {
            self.apply(i, false);
            let found = self.dfs(i, remaining - 1)?;
            if found {
                return Ok(true);
            }
            self.apply(i, true);
        }
        Ok(false)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::election::{Election, TieBreakPolicy};

    fn copeland_example() -> ManipulationProblem {
        let fixed = Election::from_rankings(
            4,
            &[(&[0, 1, 2, 3], 1), (&[1, 2, 0, 3], 1), (&[3, 2, 0, 1], 1)],
            TieBreakPolicy::index_order(),
        )
        .unwrap();
        ManipulationProblem::new(fixed, CandidateId(3), Rule::copeland(), Coalition::Unweighted(1), 4)
            .unwrap()
    }

    #[test]
    fn already_winning_needs_nobody() {
        let fixed = Election::from_rankings(3, &[(&[2], 1)], TieBreakPolicy::index_order()).unwrap();
        for rule in [Rule::Stv, Rule::copeland(), Rule::Scoring(ScoringRule::modified_borda(3))] {
            let pr = ManipulationProblem::new(fixed.clone(), CandidateId(2), rule, Coalition::Unweighted(0), 3)
                .unwrap();
            let r = exact_min_coalition(&pr, 3, None).unwrap();
            assert_eq!(r.outcome, Outcome::Success(vec![]));
            assert_eq!(r.stats.coalition_size, Some(0));
        }
    }

    #[test]
    fn copeland_example_needs_one_singleton() {
        let r = exact_min_coalition(&copeland_example(), 3, None).unwrap();
        assert_eq!(
            r.outcome,
            Outcome::Success(vec![PartialBallot::from_indices(&[3], 1).unwrap()])
        );
    }

    #[test]
    fn unpruned_search_finds_the_same_size() {
        let pr = copeland_example().with_max_ballot_length(4).unwrap();
        let full_only = ExactSearch {
            limit: 3,
            timeout: None,
            prune: false,
        };
        let r = full_only.run(&pr).unwrap();
        assert_eq!(r.stats.coalition_size, Some(1));
    }

    #[test]
    fn modified_borda_four_unit_voters() {
        // a:6 b:6 from single-candidate votes; four unit manipulators.
        let fixed = Election::from_rankings(3, &[(&[0], 6), (&[1], 6)], TieBreakPolicy::index_order())
            .unwrap();
        let pr = ManipulationProblem::new(
            fixed,
            CandidateId(2),
            Rule::Scoring(ScoringRule::modified_borda(3)),
            Coalition::Unweighted(4),
            3,
        )
        .unwrap();
        let r = exact_min_coalition(&pr, 6, None).unwrap();
        assert_eq!(r.stats.coalition_size, Some(4));
        assert!(r.is_success());
    }

    #[test]
    fn gives_up_past_limit() {
        let fixed = Election::from_rankings(3, &[(&[0, 1, 2], 9)], TieBreakPolicy::index_order()).unwrap();
        let pr = ManipulationProblem::new(fixed, CandidateId(2), Rule::Stv, Coalition::Unweighted(1), 3)
            .unwrap();
        let r = exact_min_coalition(&pr, 2, None).unwrap();
        assert_eq!(r.outcome, Outcome::Impossible);
        assert_eq!(r.stats.lower_bound, 3);
    }

    #[test]
    fn times_out() {
        let fixed = Election::from_rankings(6, &[(&[0, 1, 2, 3, 4, 5], 40)], TieBreakPolicy::index_order())
            .unwrap();
        let pr = ManipulationProblem::new(fixed, CandidateId(5), Rule::Stv, Coalition::Unweighted(1), 6)
            .unwrap();
        let r = exact_min_coalition(&pr, 60, Some(Duration::from_millis(50))).unwrap();
        assert_eq!(r.outcome, Outcome::Timeout);
        assert!(r.stats.lower_bound >= 1);
    }
}
