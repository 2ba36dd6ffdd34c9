use std::time::Instant;

use super::{finish, singleton_ballots, ManipulationError, ManipulationProblem, ManipulationResult, SearchStats};
use crate::rule::Rule;
use crate::scoring::ScoringScheme;

/// Round-up scoring: every member votes for `p` alone.
///
/// That ballot gives `p` the top score and nobody else anything, so no other
/// coalition profile can do better.
pub fn manipulate_round_up(
    problem: &ManipulationProblem,
) -> Result<ManipulationResult, ManipulationError> {
    match problem.rule() {
        Rule::Scoring(r) if r.scheme() == ScoringScheme::RoundUp => {}
        _ => return Err(ManipulationError::RuleMismatch("round-up needs a RoundUp scoring rule")),
    }
    let start = Instant::now();
    let ballots = singleton_ballots(problem);
    let stats = SearchStats {
        nodes: 1,
        elapsed: start.elapsed(),
        coalition_size: Some(ballots.len()),
        lower_bound: 0,
    };
    finish(problem, ballots, stats)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::election::{CandidateId, Election, PartialBallot, TieBreakPolicy};
    use crate::manipulation::{Coalition, Outcome};
    use crate::scoring::ScoringRule;

    fn problem(fixed: &[(&[usize], u64)], coalition: Coalition) -> ManipulationProblem {
        let fixed = Election::from_rankings(3, fixed, TieBreakPolicy::index_order()).unwrap();
        ManipulationProblem::new(
            fixed,
            CandidateId(2),
            Rule::Scoring(ScoringRule::borda(3, ScoringScheme::RoundUp)),
            coalition,
            3,
        )
        .unwrap()
    }

    #[test]
    fn tie_goes_to_p() {
        // a:2 b:1 p:0+2
        let r = manipulate_round_up(&problem(&[(&[0, 1], 1)], Coalition::Unweighted(1))).unwrap();
        assert_eq!(
            r.outcome,
            Outcome::Success(vec![PartialBallot::from_indices(&[2], 1).unwrap()])
        );
    }

    #[test]
    fn outnumbered() {
        // a:10 against p:5+2
        let r = manipulate_round_up(&problem(&[(&[0, 1, 2], 5)], Coalition::Unweighted(1))).unwrap();
        assert_eq!(r.outcome, Outcome::Impossible);
    }

    #[test]
    fn empty_profile() {
        let r = manipulate_round_up(&problem(&[], Coalition::Weighted(vec![4]))).unwrap();
        assert!(r.is_success());
    }

    #[test]
    fn rejects_other_rules() {
        let fixed = Election::new(3, vec![], TieBreakPolicy::index_order()).unwrap();
        let pr = ManipulationProblem::new(fixed, CandidateId(2), Rule::Stv, Coalition::Unweighted(1), 3)
            .unwrap();
        assert!(matches!(manipulate_round_up(&pr), Err(ManipulationError::RuleMismatch(_))));
    }
}
