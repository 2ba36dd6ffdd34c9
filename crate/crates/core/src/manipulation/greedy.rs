use std::time::Instant;

use super::{finish, ManipulationError, ManipulationProblem, ManipulationResult, Outcome, SearchStats};
use crate::copeland::{copeland_scores_with, PairwiseMatrix};
use crate::election::{CandidateId, PartialBallot};
use crate::rule::Rule;

/// Builds one strategic Copeland ballot for a single (possibly weighted)
/// manipulator.
///
/// Starts from `(p)`. While some rival outscores `p`, appends the first
/// unplaced candidate (in tie-break order) whose placement leaves its score
/// no higher than `p`'s; fails when no such candidate exists or the ballot
/// reaches the length limit.
pub fn greedy_copeland(
    problem: &ManipulationProblem,
) -> Result<ManipulationResult, ManipulationError> {
    let reading = match problem.rule() {
        Rule::Copeland(r) => *r,
        _ => return Err(ManipulationError::RuleMismatch("greedy procedure is for Copeland")),
    };
    let weights = problem.coalition().weights();
    if weights.len() != 1 {
        return Err(ManipulationError::RuleMismatch(
            "greedy procedure builds a single manipulator's ballot",
        ));
    }
    let weight = weights[0];
    let start = Instant::now();
    let m = problem.num_candidates();
    let p = problem.preferred();

    let mut base = PairwiseMatrix::zeros(m);
    for b in problem.fixed().ballots() {
        base.add_ballot(b);
    }
    let order: Vec<CandidateId> = problem
        .tie_break()
        .priority_order(m)
        .into_iter()
        .filter(|&c| c != p)
        .collect();

    let scores_for = |ranking: &[CandidateId]| {
        let mut matrix = base.clone();
        matrix.add_ballot(&PartialBallot::new(ranking.to_vec(), weight).expect("valid ranking"));
        copeland_scores_with(&matrix, reading)
    };

    let mut ranking = vec![p];
    let mut nodes = 0u64;
    loop {
        nodes += 1;
        let scores = scores_for(&ranking);
        let p_score = scores.score(p);
        if (0..m).all(|c| scores.as_slice()[c] <= p_score) {
            let stats = SearchStats {
                nodes,
                elapsed: start.elapsed(),
                coalition_size: Some(1),
                lower_bound: 0,
            };
            let ballot = PartialBallot::new(ranking, weight)?;
            return finish(problem, vec![ballot], stats);
        }
        if ranking.len() >= problem.max_ballot_length() {
            break;
        }
        let harmless = order.iter().copied().filter(|c| !ranking.contains(c)).find(|&c| {
            nodes += 1;
            let mut trial = ranking.clone();
            trial.push(c);
            let s = scores_for(&trial);
            s.score(c) <= s.score(p)
        });
        match harmless {
            Some(c) => ranking.push(c),
            None => break,
        }
    }
    Ok(ManipulationResult {
        outcome: Outcome::Impossible,
        stats: SearchStats {
            nodes,
            elapsed: start.elapsed(),
            coalition_size: None,
            lower_bound: 0,
        },
    })
}
