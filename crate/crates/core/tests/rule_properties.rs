use num_traits::Zero;
use proptest::prelude::*;
use pvote::{
    ballot_scores, copeland_scores, copeland_scores_with, pairwise_matrix, shifted_vector,
    stv_winner, CandidateId, Election, PairwiseReading, PartialBallot, Rational, ScoreVector,
    ScoringRule, ScoringScheme, TieBreakPolicy,
};

const SCHEMES: [ScoringScheme; 3] = [
    ScoringScheme::RoundUp,
    ScoringScheme::RoundDown,
    ScoringScheme::Average,
];

fn arb_ballot(m: usize, min_len: usize) -> impl Strategy<Value = PartialBallot> {
    (
        Just((0..m).collect::<Vec<_>>()).prop_shuffle(),
        min_len..=m,
        1u64..5,
    )
        .prop_map(|(perm, len, w)| PartialBallot::from_indices(&perm[..len], w).unwrap())
}

fn arb_vector(m: usize) -> impl Strategy<Value = ScoreVector> {
    prop::collection::vec(0i64..6, m).prop_map(|mut v| {
        v.sort_unstable_by(|a, b| b.cmp(a));
        ScoreVector::from_integers(&v).unwrap()
    })
}

fn arb_election(max_m: usize, complete: bool) -> impl Strategy<Value = Election> {
    (2..=max_m).prop_flat_map(move |m| {
        let min_len = if complete { m } else { 1 };
        prop::collection::vec(arb_ballot(m, min_len), 0..7).prop_map(move |ballots| {
            Election::new(m, ballots, TieBreakPolicy::index_order()).unwrap()
        })
    })
}

fn split_first(e: &Election) -> Option<Election> {
    let first = e.ballots().iter().position(|b| b.weight() >= 2)?;
    let mut ballots = e.ballots().to_vec();
    let b = ballots.remove(first);
    ballots.push(b.with_weight(1).unwrap());
    ballots.push(b.with_weight(b.weight() - 1).unwrap());
    Some(Election::new(e.num_candidates(), ballots, e.tie_break().clone()).unwrap())
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(300))]

    #[test]
    fn complete_ballots_use_the_plain_vector(
        (v, b) in (2usize..6).prop_flat_map(|m| (arb_vector(m), arb_ballot(m, m)))
    ) {
        let m = v.len();
        for scheme in SCHEMES {
            let s = ballot_scores(&b, &v, scheme);
            for (i, c) in b.ranking().iter().enumerate() {
                prop_assert_eq!(s[c.0], v.score(i + 1));
            }
        }
        let implied = shifted_vector(m);
        let s = ballot_scores(&b, &implied, ScoringScheme::ShiftedRoundDownZero);
        for (i, c) in b.ranking().iter().enumerate() {
            prop_assert_eq!(s[c.0], implied.score(i + 1));
        }
    }

    #[test]
    fn ballot_totals(
        (v, b) in (2usize..6).prop_flat_map(|m| (arb_vector(m), arb_ballot(m, 1)))
    ) {
        let m = v.len();
        let k = b.len();
        let sum = |s: Vec<Rational>| s.into_iter().fold(Rational::zero(), |a, x| a + x);
        prop_assert_eq!(sum(ballot_scores(&b, &v, ScoringScheme::Average)), v.total());
        let head: Rational = (1..=k).map(|i| v.score(i)).sum();
        prop_assert_eq!(sum(ballot_scores(&b, &v, ScoringScheme::RoundUp)), head);

        let mb = ScoringRule::modified_borda(m);
        // complete ballots fall back to the plain Borda vector
        let expect = if k < m { k * (k + 1) / 2 } else { m * (m - 1) / 2 };
        let expect = Rational::from_integer(expect as i64);
        prop_assert_eq!(sum(mb.ballot_scores(&b)), expect);
    }

    #[test]
    fn contributions_follow_the_ranking(
        (v, b) in (2usize..6).prop_flat_map(|m| (arb_vector(m), arb_ballot(m, 1)))
    ) {
        let m = v.len();
        let mut runs: Vec<(ScoringScheme, Vec<Rational>)> = SCHEMES
            .iter()
            .map(|&s| (s, ballot_scores(&b, &v, s)))
            .collect();
        runs.push((
            ScoringScheme::ShiftedRoundDownZero,
            ScoringRule::shifted(m).ballot_scores(&b),
        ));
        for (scheme, s) in runs {
            let ranked: Vec<Rational> = b.ranking().iter().map(|c| s[c.0]).collect();
            prop_assert!(ranked.windows(2).all(|w| w[0] >= w[1]), "{}", scheme);
            let lowest = *ranked.last().unwrap();
            for c in (0..m).map(CandidateId).filter(|c| !b.contains(*c)) {
                prop_assert!(s[c.0] <= lowest, "{}", scheme);
            }
        }
    }

    #[test]
    fn scoring_is_weight_linear(e in arb_election(5, false), scheme_ix in 0usize..3) {
        if let Some(split) = split_first(&e) {
            let rule = ScoringRule::borda(e.num_candidates(), SCHEMES[scheme_ix]);
            prop_assert_eq!(rule.evaluate(&e).unwrap(), rule.evaluate(&split).unwrap());
        }
    }

    #[test]
    fn copeland_scores_cancel(e in arb_election(5, false)) {
        let s = copeland_scores(&pairwise_matrix(&e));
        prop_assert_eq!(s.as_slice().iter().sum::<i64>(), 0);
    }

    #[test]
    fn copeland_on_complete_ballots_matches_majority_formula(e in arb_election(5, true)) {
        let n = e.total_weight() as i64;
        let mat = pairwise_matrix(&e);
        let s = copeland_scores(&mat);
        for i in e.candidates() {
            let expect: i64 = e
                .candidates()
                .filter(|&j| j != i)
                .map(|j| (2 * mat.get(i, j) as i64 - n).signum())
                .sum();
            prop_assert_eq!(s.score(i), expect);
        }
        let half = copeland_scores_with(&mat, PairwiseReading::HalfElectorate);
        prop_assert_eq!(half, s);
    }

    #[test]
    fn pairwise_matrix_is_weight_linear(e in arb_election(5, false)) {
        if let Some(split) = split_first(&e) {
            prop_assert_eq!(pairwise_matrix(&e), pairwise_matrix(&split));
        }
    }

    #[test]
    fn singleton_ballot_helps_only_p(e in arb_election(5, false), p_ix in 0usize..5) {
        let m = e.num_candidates();
        let p = CandidateId(p_ix % m);
        let before = copeland_scores(&pairwise_matrix(&e));
        let more = e.with_extra_ballots(&[PartialBallot::new(vec![p], 1).unwrap()]).unwrap();
        let after = copeland_scores(&pairwise_matrix(&more));
        for c in e.candidates() {
            if c == p {
                prop_assert!(after.score(c) >= before.score(c));
            } else {
                prop_assert!(after.score(c) <= before.score(c));
            }
        }
    }

    #[test]
    fn stv_exhaustion_only_grows(e in arb_election(5, false)) {
        let (w, trace) = stv_winner(&e);
        prop_assert!(trace.rounds.windows(2).all(|r| r[0].exhausted <= r[1].exhausted));
        prop_assert_eq!(stv_winner(&e), (w, trace));
    }

    #[test]
    fn stv_complete_ballots_never_exhaust_early(e in arb_election(5, true)) {
        let (_, trace) = stv_winner(&e);
        let last = trace.rounds.len().saturating_sub(1);
        for r in &trace.rounds[..last] {
            prop_assert_eq!(r.exhausted, 0);
        }
    }
}

#[test]
fn average_ties_are_exact() {
    // (a) and b>c>a: the truncated ballot splits 1 point between b and c
    let e = Election::from_rankings(
        3,
        &[(&[0], 1), (&[1, 2, 0], 1)],
        TieBreakPolicy::index_order(),
    )
    .unwrap();
    let rule = ScoringRule::borda(3, ScoringScheme::Average);
    let (_, table) = rule.evaluate(&e).unwrap();
    // a: 2 + 0, b: 1/2 + 2, c: 1/2 + 1
    assert_eq!(table.as_slice()[0], Rational::new(2, 1));
    assert_eq!(table.as_slice()[1], Rational::new(5, 2));
    assert_eq!(table.as_slice()[2], Rational::new(3, 2));
}
