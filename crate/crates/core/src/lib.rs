//! Voting rules over top-truncated ballots.
//!
//! Positional scoring under three ways of scoring unranked candidates, STV
//! and Copeland; exact and polynomial manipulation solvers; generators for
//! the hardness constructions; PrefLib input and output.

pub mod copeland;
pub mod election;
pub mod manipulation;
pub mod preflib;
pub mod reductions;
pub mod rule;
pub mod scoring;
pub mod stv;

pub use copeland::{
    copeland_scores, copeland_scores_with, copeland_winner, copeland_winner_with, pairwise_matrix,
    CopelandScores, PairwiseMatrix, PairwiseReading,
};
pub use election::{
    break_tie, new_election, rank_of, restrict_ballot, CandidateId, Election, ElectionError,
    PartialBallot, TieBreakPolicy,
};
pub use manipulation::{
    complete_stv_ballots, exact_min_coalition, greedy_copeland, manipulate_round_up,
    verify_manipulation, weighted_coalition_copeland_dp, weighted_coalition_scoring_dp,
    Coalition, ManipulationError, ManipulationProblem, ManipulationResult, Outcome, SearchStats,
};
pub use rule::{Rule, RuleSpec, UnknownRule};
pub use scoring::{
    ballot_scores, borda_vector, evaluate_scoring, plurality_vector, shifted_vector, Rational,
    ScoreTable, ScoreVector, ScoringError, ScoringRule, ScoringScheme,
};
pub use stv::{stv_winner, EliminationTrace};
