//! Pseudo-polynomial solvers for weighted coalitions over few candidates.
//!
//! Both solvers enumerate the distinct effects a single ballot can have,
//! then run a layered dynamic program over the coalition members. A layer
//! holds every reachable summary of the election so far; summaries that can
//! no longer change the outcome are clamped so that equivalent states merge.

use std::collections::HashMap;
use std::hash::Hash;
use std::time::Instant;

use super::{
    enumerate_rankings, finish, scale_to_integers, singleton_ballots, undominated,
    ManipulationError, ManipulationProblem, ManipulationResult, Outcome, SearchStats,
};
use crate::copeland::{pairwise_matrix, PairwiseReading};
use crate::election::{CandidateId, PartialBallot};
use crate::rule::Rule;
use crate::scoring::Rational;

pub const MAX_DP_CANDIDATES: usize = 5;

#[derive(Clone, Copy, Debug)]
pub struct DpLimits {
    /// Largest number of states kept in one layer.
    pub max_states: usize,
}

impl Default for DpLimits {
    fn default() -> Self {
        DpLimits {
            max_states: 4_000_000,
        }
    }
}

/// One layer of the program: states with a back pointer into the previous
/// layer and the ballot type that led here.
struct Layer<S> {
    states: Vec<(S, u32, u32)>,
    index: HashMap<S, u32>,
}

impl<S: Clone + Eq + Hash> Layer<S> {
    fn new() -> Self {
        Layer {
            states: Vec::new(),
            index: HashMap::new(),
        }
    }

    fn insert(&mut self, state: S, parent: u32, ty: u32) {
        if !self.index.contains_key(&state) {
            self.index.insert(state.clone(), self.states.len() as u32);
            self.states.push((state, parent, ty));
        }
    }
}

/// Runs the layered program. `step(state, type, remaining_weight)` returns
/// the successor (or `None` when that branch is hopeless); `accept` tests a
/// terminal state. Returns the chosen type per member, in processing order.
fn run_layers<S, F, A>(
    start: S,
    weights: &[u64],
    num_types: usize,
    limits: DpLimits,
    nodes: &mut u64,
    mut step: F,
    accept: A,
) -> Result<Option<Vec<usize>>, ManipulationError>
where
    S: Clone + Eq + Hash,
    F: FnMut(&S, usize, usize, u64) -> Option<S>,
    A: Fn(&S) -> bool,
{
    let mut layers: Vec<Layer<S>> = Vec::with_capacity(weights.len() + 1);
    let mut first = Layer::new();
    first.insert(start, u32::MAX, u32::MAX);
    layers.push(first);
    let mut remaining: u64 = weights.iter().sum();
    for (member, &w) in weights.iter().enumerate() {
        remaining -= w;
        let mut next = Layer::new();
        let prev = layers.last().unwrap();
        for (si, (state, _, _)) in prev.states.iter().enumerate() {
            for ty in 0..num_types {
                *nodes += 1;
                if let Some(s) = step(state, member, ty, remaining) {
                    next.insert(s, si as u32, ty as u32);
                    if next.states.len() > limits.max_states {
                        return Err(ManipulationError::StateSpaceExceeded {
                            cap: limits.max_states,
                        });
                    }
                }
            }
        }
        if next.states.is_empty() {
            return Ok(None);
        }
        layers.push(next);
    }
    let last = layers.last().unwrap();
    let Some(mut at) = last.states.iter().position(|(s, _, _)| accept(s)) else {
        return Ok(None);
    };
    let mut choice = vec![0usize; weights.len()];
    for member in (0..weights.len()).rev() {
        let (_, parent, ty) = &layers[member + 1].states[at];
        choice[member] = *ty as usize;
        at = *parent as usize;
    }
    Ok(Some(choice))
}

/// Members sorted heaviest first; returns the permutation.
fn processing_order(weights: &[u64]) -> Vec<usize> {
    let mut order: Vec<usize> = (0..weights.len()).collect();
    order.sort_by(|&a, &b| weights[b].cmp(&weights[a]).then(a.cmp(&b)));
    order
}

fn check_size(problem: &ManipulationProblem) -> Result<(), ManipulationError> {
    let m = problem.num_candidates();
    if m > MAX_DP_CANDIDATES {
        return Err(ManipulationError::TooManyCandidates {
            got: m,
            max: MAX_DP_CANDIDATES,
        });
    }
    Ok(())
}

fn witness(
    rankings: &[Vec<CandidateId>],
    weights: &[u64],
    order: &[usize],
    choice: &[usize],
) -> Result<Vec<PartialBallot>, ManipulationError> {
    let mut out: Vec<Option<PartialBallot>> = vec![None; weights.len()];
    for (pos, &member) in order.iter().enumerate() {
        out[member] = Some(PartialBallot::new(
            rankings[choice[pos]].clone(),
            weights[member],
        )?);
    }
    Ok(out.into_iter().map(|b| b.expect("every member assigned")).collect())
}

fn shortcut_if_unopposed(
    problem: &ManipulationProblem,
) -> Option<Result<ManipulationResult, ManipulationError>> {
    if problem.fixed().ballots().is_empty() {
        let ballots = singleton_ballots(problem);
        let stats = SearchStats {
            nodes: 0,
            elapsed: Default::default(),
            coalition_size: Some(ballots.len()),
            lower_bound: 0,
        };
        Some(finish(problem, ballots, stats))
    } else {
        None
    }
}

/// Weighted coalition manipulation of a scoring rule with up to five
/// candidates.
///
/// Ballot types are all rankings up to the length cap, reduced to their
/// effect on `score(c) - score(p)` for every rival `c`; types that are never
/// better than another type are dropped.
pub fn weighted_coalition_scoring_dp(
    problem: &ManipulationProblem,
) -> Result<ManipulationResult, ManipulationError> {
    weighted_coalition_scoring_dp_with(problem, DpLimits::default())
}

pub fn weighted_coalition_scoring_dp_with(
    problem: &ManipulationProblem,
    limits: DpLimits,
) -> Result<ManipulationResult, ManipulationError> {
    let rule = match problem.rule() {
        Rule::Scoring(r) => r,
        _ => return Err(ManipulationError::RuleMismatch("scoring DP needs a scoring rule")),
    };
    check_size(problem)?;
    if let Some(r) = shortcut_if_unopposed(problem) {
        return r;
    }
    let start = Instant::now();
    let m = problem.num_candidates();
    let p = problem.preferred().0;

    let all = enumerate_rankings(m, problem.max_ballot_length());
    let (_, table) = rule.evaluate(problem.fixed())?;
    let mut vectors: Vec<Vec<Rational>> = vec![table.as_slice().to_vec()];
    for r in &all {
        vectors.push(rule.ballot_scores(&PartialBallot::new(r.clone(), 1)?));
    }
    let scaled = scale_to_integers(&vectors);
    let rel = |v: &Vec<i64>| v.iter().map(|x| x - v[p]).collect::<Vec<i64>>();
    let gap = rel(&scaled[0]);
    let deltas_all: Vec<Vec<i64>> = scaled[1..].iter().map(rel).collect();
    let keep = undominated(&deltas_all);
    let rankings: Vec<Vec<CandidateId>> = keep.iter().map(|&i| all[i].clone()).collect();
    let deltas: Vec<Vec<i64>> = keep.iter().map(|&i| deltas_all[i].clone()).collect();

    let weights = problem.coalition().weights();
    let order = processing_order(&weights);
    let sorted: Vec<u64> = order.iter().map(|&i| weights[i]).collect();
    let best: Vec<i64> = (0..m).map(|c| deltas.iter().map(|d| d[c]).min().unwrap()).collect();
    let worst: Vec<i64> = (0..m).map(|c| deltas.iter().map(|d| d[c]).max().unwrap()).collect();

    let mut nodes = 0u64;
    let choice = run_layers(
        gap,
        &sorted,
        deltas.len(),
        limits,
        &mut nodes,
        |state, member, ty, remaining| {
            let w = sorted[member] as i64;
            let rem = remaining as i64;
            let mut next = Vec::with_capacity(m);
            for c in 0..m {
                let g = state[c] + w * deltas[ty][c];
                // even the best remaining ballots cannot close this gap
                if g + rem * best[c] > 0 {
                    return None;
                }
                // safe whatever the rest of the coalition does
                let safe_floor = -rem * worst[c].max(0);
                next.push(g.max(safe_floor));
            }
            Some(next)
        },
        |state| state.iter().all(|&g| g <= 0),
    )?;
    let stats = |nodes| SearchStats {
        nodes,
        elapsed: start.elapsed(),
        coalition_size: Some(weights.len()),
        lower_bound: 0,
    };
    match choice {
        Some(choice) => {
            let ballots = witness(&rankings, &weights, &order, &choice)?;
            finish(problem, ballots, stats(nodes))
        }
        None => Ok(ManipulationResult {
            outcome: Outcome::Impossible,
            stats: SearchStats {
                coalition_size: None,
                ..stats(nodes)
            },
        }),
    }
}

/// Weighted coalition manipulation of Copeland with up to five candidates.
///
/// A ballot type is the sign pattern it adds to every pairwise margin. The
/// state is the vector of margins, each clamped once its sign can no longer
/// flip. Only the expressed-majority reading is supported.
pub fn weighted_coalition_copeland_dp(
    problem: &ManipulationProblem,
) -> Result<ManipulationResult, ManipulationError> {
    weighted_coalition_copeland_dp_with(problem, DpLimits::default())
}

pub fn weighted_coalition_copeland_dp_with(
    problem: &ManipulationProblem,
    limits: DpLimits,
) -> Result<ManipulationResult, ManipulationError> {
    match problem.rule() {
        Rule::Copeland(PairwiseReading::ExpressedMajority) => {}
        _ => {
            return Err(ManipulationError::RuleMismatch(
                "Copeland DP needs Copeland under the expressed-majority reading",
            ))
        }
    }
    check_size(problem)?;
    if let Some(r) = shortcut_if_unopposed(problem) {
        return r;
    }
    let start = Instant::now();
    let m = problem.num_candidates();
    let p = problem.preferred();
    let pairs: Vec<(usize, usize)> = (0..m)
        .flat_map(|i| (i + 1..m).map(move |j| (i, j)))
        .collect();

    let base = pairwise_matrix(problem.fixed());
    let start_state: Vec<i64> = pairs
        .iter()
        .map(|&(i, j)| base.margin(CandidateId(i), CandidateId(j)))
        .collect();

    // distinct sign patterns; for equal patterns on the rival pairs keep the
    // one that is best for p on every p-pair
    let involves_p = |&(i, j): &(usize, usize)| i == p.0 || j == p.0;
    let p_gain = |pattern: &[i8], k: usize| {
        let (i, _) = pairs[k];
        if i == p.0 {
            pattern[k] as i64
        } else {
            -(pattern[k] as i64)
        }
    };
    let mut by_pattern: HashMap<Vec<i8>, Vec<CandidateId>> = HashMap::new();
    let mut patterns: Vec<Vec<i8>> = Vec::new();
    for r in enumerate_rankings(m, problem.max_ballot_length()) {
        let mut t = crate::copeland::PairwiseMatrix::zeros(m);
        t.add_ballot(&PartialBallot::new(r.clone(), 1)?);
        let pattern: Vec<i8> = pairs
            .iter()
            .map(|&(i, j)| t.margin(CandidateId(i), CandidateId(j)) as i8)
            .collect();
        if !by_pattern.contains_key(&pattern) {
            by_pattern.insert(pattern.clone(), r);
            patterns.push(pattern);
        }
    }
    let dominated = |a: &[i8], b: &[i8]| {
        // b at least as good as a for p, same elsewhere, and different
        a != b
            && (0..pairs.len()).all(|k| {
                if involves_p(&pairs[k]) {
                    p_gain(b, k) >= p_gain(a, k)
                } else {
                    a[k] == b[k]
                }
            })
    };
    let kept: Vec<Vec<i8>> = patterns
        .iter()
        .filter(|a| !patterns.iter().any(|b| dominated(a, b)))
        .cloned()
        .collect();
    let rankings: Vec<Vec<CandidateId>> = kept.iter().map(|k| by_pattern[k].clone()).collect();

    let weights = problem.coalition().weights();
    let order = processing_order(&weights);
    let sorted: Vec<u64> = order.iter().map(|&i| weights[i]).collect();

    let mut nodes = 0u64;
    let choice = run_layers(
        start_state,
        &sorted,
        kept.len(),
        limits,
        &mut nodes,
        |state, member, ty, remaining| {
            let w = sorted[member] as i64;
            let band = remaining as i64 + 1;
            Some(
                state
                    .iter()
                    .zip(&kept[ty])
                    .map(|(&x, &d)| (x + w * d as i64).clamp(-band, band))
                    .collect(),
            )
        },
        |state| {
            let mut scores = vec![0i64; m];
            for (k, &(i, j)) in pairs.iter().enumerate() {
                let s = state[k].signum();
                scores[i] += s;
                scores[j] -= s;
            }
            scores.iter().all(|&s| s <= scores[p.0])
        },
    )?;
    let stats = |nodes| SearchStats {
        nodes,
        elapsed: start.elapsed(),
        coalition_size: Some(weights.len()),
        lower_bound: 0,
    };
    match choice {
        Some(choice) => {
            let ballots = witness(&rankings, &weights, &order, &choice)?;
            finish(problem, ballots, stats(nodes))
        }
        None => Ok(ManipulationResult {
            outcome: Outcome::Impossible,
            stats: SearchStats {
                coalition_size: None,
                ..stats(nodes)
            },
        }),
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::election::{Election, TieBreakPolicy};
    use crate::manipulation::{verify_manipulation, Coalition};
    use crate::scoring::{ScoringRule, ScoringScheme};

    fn mbc(bag: &[u64]) -> ManipulationProblem {
        let k: u64 = bag.iter().sum::<u64>() / 2;
        let fixed = Election::from_rankings(3, &[(&[0], 3 * k), (&[1], 3 * k)], TieBreakPolicy::index_order())
            .unwrap();
        ManipulationProblem::new(
            fixed,
            CandidateId(2),
            Rule::Scoring(ScoringRule::modified_borda(3)),
            Coalition::Weighted(bag.to_vec()),
            3,
        )
        .unwrap()
    }

    fn copeland4(bag: &[u64]) -> ManipulationProblem {
        let k: u64 = bag.iter().sum::<u64>() / 2;
        let fixed = Election::from_rankings(
            4,
            &[(&[0, 1, 2, 3], k), (&[0, 2, 1, 3], k)],
            TieBreakPolicy::index_order(),
        )
        .unwrap();
        ManipulationProblem::new(fixed, CandidateId(3), Rule::copeland(), Coalition::Weighted(bag.to_vec()), 4)
            .unwrap()
    }

    #[test]
    fn scoring_partition_cases() {
        assert!(weighted_coalition_scoring_dp(&mbc(&[1, 1])).unwrap().is_success());
        assert_eq!(
            weighted_coalition_scoring_dp(&mbc(&[3, 1])).unwrap().outcome,
            Outcome::Impossible
        );
        let r = weighted_coalition_scoring_dp(&mbc(&[2, 2, 3, 3])).unwrap();
        let w = r.witness().unwrap();
        assert_eq!(w.iter().map(|b| b.weight()).collect::<Vec<_>>(), vec![2, 2, 3, 3]);
    }

    #[test]
    fn copeland_partition_cases() {
        let pr = copeland4(&[1, 1]);
        let r = weighted_coalition_copeland_dp(&pr).unwrap();
        assert!(verify_manipulation(&pr, r.witness().unwrap()).unwrap());
        assert_eq!(
            weighted_coalition_copeland_dp(&copeland4(&[3, 1])).unwrap().outcome,
            Outcome::Impossible
        );
    }

    #[test]
    fn unopposed() {
        let fixed = Election::new(3, vec![], TieBreakPolicy::index_order()).unwrap();
        for rule in [Rule::copeland(), Rule::Scoring(ScoringRule::borda(3, ScoringScheme::Average))] {
            let pr = ManipulationProblem::new(fixed.clone(), CandidateId(1), rule.clone(), Coalition::Weighted(vec![5]), 3)
                .unwrap();
            let r = if rule.is_scoring() {
                weighted_coalition_scoring_dp(&pr)
            } else {
                weighted_coalition_copeland_dp(&pr)
            }
            .unwrap();
            assert_eq!(
                r.outcome,
                Outcome::Success(vec![PartialBallot::from_indices(&[1], 5).unwrap()])
            );
        }
    }

    #[test]
    fn size_and_rule_guards() {
        let fixed = Election::new(6, vec![], TieBreakPolicy::index_order()).unwrap();
        let pr = ManipulationProblem::new(fixed, CandidateId(0), Rule::copeland(), Coalition::Weighted(vec![1]), 6)
            .unwrap();
        assert!(matches!(
            weighted_coalition_copeland_dp(&pr),
            Err(ManipulationError::TooManyCandidates { got: 6, max: 5 })
        ));
        assert!(matches!(
            weighted_coalition_scoring_dp(&pr),
            Err(ManipulationError::RuleMismatch(_))
        ));
    }

    #[test]
    fn state_cap_is_enforced() {
        let pr = copeland4(&[1, 1, 1, 1, 2, 2]);
        assert!(matches!(
            weighted_coalition_copeland_dp_with(&pr, DpLimits { max_states: 3 }),
            Err(ManipulationError::StateSpaceExceeded { cap: 3 })
        ));
    }
}
