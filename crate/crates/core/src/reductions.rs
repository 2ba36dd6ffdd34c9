//! Instance generators for the hardness constructions, with independent
//! subset-sum oracles to check them against.
//!
//! * number partitioning → weighted modified-Borda manipulation (3 candidates)
//! * number partitioning → weighted Copeland manipulation (4 candidates)
//! * paired subset sum → weighted average-score Borda manipulation
//! * 3-SAT → paired subset sum (decimal digit encoding)

use std::collections::BTreeSet;
use std::fmt;

use num_bigint::BigUint;
use num_traits::Zero;
use thiserror::Error;

use crate::election::{CandidateId, Election, PartialBallot, TieBreakPolicy};
use crate::manipulation::{Coalition, ManipulationError, ManipulationProblem};
use crate::rule::Rule;
use crate::scoring::{ScoringRule, ScoringScheme};

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum ReductionError {
    #[error("the bag is empty")]
    EmptyBag,
    #[error("bag entries must be positive")]
    NonPositiveEntry,
    #[error("bag sums to {0}, which is odd")]
    OddSum(u64),
    #[error("pair ({0}, {1}) is not made of two equal numbers")]
    UnequalPair(u64, u64),
    #[error("target {target} exceeds the total {total}")]
    TargetOutOfRange { target: u64, total: u64 },
    #[error("malformed clause {index}: {reason}")]
    MalformedClause { index: usize, reason: String },
    #[error(transparent)]
    Manipulation(#[from] ManipulationError),
}

/// Candidate labels used by the three-candidate constructions.
pub const A: CandidateId = CandidateId(0);
pub const B: CandidateId = CandidateId(1);
/// Preferred candidate in the three-candidate constructions.
pub const P3: CandidateId = CandidateId(2);
/// Third rival and preferred candidate in the four-candidate construction.
pub const C: CandidateId = CandidateId(2);
pub const P4: CandidateId = CandidateId(3);

/// A bag of positive integers with an even total `2K`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct PartitionInstance {
    bag: Vec<u64>,
}

impl PartitionInstance {
    pub fn new(bag: Vec<u64>) -> Result<Self, ReductionError> {
        if bag.is_empty() {
            return Err(ReductionError::EmptyBag);
        }
        if bag.contains(&0) {
            return Err(ReductionError::NonPositiveEntry);
        }
        let sum: u64 = bag.iter().sum();
        if sum % 2 == 1 {
            return Err(ReductionError::OddSum(sum));
        }
        Ok(PartitionInstance { bag })
    }

    pub fn bag(&self) -> &[u64] {
        &self.bag
    }

    /// Half the total.
    pub fn half(&self) -> u64 {
        self.bag.iter().sum::<u64>() / 2
    }
}

/// Multiset of equal pairs `(s_i, s'_i)` and a target `t1`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct SubsetSumPairsInstance {
    pairs: Vec<(u64, u64)>,
    target: u64,
}

impl SubsetSumPairsInstance {
    pub fn new(pairs: Vec<(u64, u64)>, target: u64) -> Result<Self, ReductionError> {
        for &(s, s2) in &pairs {
            if s != s2 {
                return Err(ReductionError::UnequalPair(s, s2));
            }
            if s == 0 {
                return Err(ReductionError::NonPositiveEntry);
            }
        }
        let inst = SubsetSumPairsInstance { pairs, target };
        if target > inst.total() {
            return Err(ReductionError::TargetOutOfRange {
                target,
                total: inst.total(),
            });
        }
        Ok(inst)
    }

    /// Builds pairs `(s, s)` from the given values.
    pub fn from_values(values: &[u64], target: u64) -> Result<Self, ReductionError> {
        Self::new(values.iter().map(|&s| (s, s)).collect(), target)
    }

    pub fn pairs(&self) -> &[(u64, u64)] {
        &self.pairs
    }

    /// `t1`.
    pub fn target(&self) -> u64 {
        self.target
    }

    /// `t`: sum of every number in the bag.
    pub fn total(&self) -> u64 {
        self.pairs.iter().map(|(s, s2)| s + s2).sum()
    }

    /// `t2 = t - t1`.
    pub fn complement(&self) -> u64 {
        self.total() - self.target
    }

    /// The flat bag `{s_1, s'_1, ..., s_n, s'_n}`.
    pub fn bag(&self) -> Vec<u64> {
        self.pairs.iter().flat_map(|&(s, s2)| [s, s2]).collect()
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct Literal {
    /// 1-based variable number.
    pub var: usize,
    pub negated: bool,
}

impl Literal {
    pub fn pos(var: usize) -> Self {
        Literal { var, negated: false }
    }

    pub fn neg(var: usize) -> Self {
        Literal { var, negated: true }
    }

    /// DIMACS-style signed integer.
    pub fn from_dimacs(x: i64) -> Option<Self> {
        match x {
            0 => None,
            x if x > 0 => Some(Literal::pos(x as usize)),
            x => Some(Literal::neg(x.unsigned_abs() as usize)),
        }
    }

    pub fn holds(&self, assignment: &[bool]) -> bool {
        assignment[self.var - 1] != self.negated
    }
}

impl fmt::Display for Literal {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.negated {
            write!(f, "-{}", self.var)
        } else {
            write!(f, "{}", self.var)
        }
    }
}

/// A 3-CNF formula: every clause has exactly three literals.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct CnfFormula {
    num_vars: usize,
    clauses: Vec<[Literal; 3]>,
}

impl CnfFormula {
    pub fn new(num_vars: usize, clauses: Vec<[Literal; 3]>) -> Result<Self, ReductionError> {
        for (index, clause) in clauses.iter().enumerate() {
            for lit in clause {
                if lit.var == 0 || lit.var > num_vars {
                    return Err(ReductionError::MalformedClause {
                        index,
                        reason: format!("variable {} not in 1..={}", lit.var, num_vars),
                    });
                }
            }
        }
        Ok(CnfFormula { num_vars, clauses })
    }

    /// Clauses given as DIMACS-style signed integers.
    pub fn from_dimacs(num_vars: usize, clauses: &[Vec<i64>]) -> Result<Self, ReductionError> {
        let mut out = Vec::with_capacity(clauses.len());
        for (index, c) in clauses.iter().enumerate() {
            let lits: Option<Vec<Literal>> = c.iter().map(|&x| Literal::from_dimacs(x)).collect();
            let lits = lits.ok_or_else(|| ReductionError::MalformedClause {
                index,
                reason: "literal 0".into(),
            })?;
            let arr: [Literal; 3] = lits.try_into().map_err(|v: Vec<Literal>| {
                ReductionError::MalformedClause {
                    index,
                    reason: format!("{} literals instead of 3", v.len()),
                }
            })?;
            out.push(arr);
        }
        Self::new(num_vars, out)
    }

    pub fn num_vars(&self) -> usize {
        self.num_vars
    }

    pub fn clauses(&self) -> &[[Literal; 3]] {
        &self.clauses
    }

    /// Truth-table satisfiability.
    pub fn is_satisfiable(&self) -> bool {
        let n = self.num_vars;
        (0u64..1 << n).any(|mask| {
            let assignment: Vec<bool> = (0..n).map(|i| mask & (1 << i) != 0).collect();
            self.clauses
                .iter()
                .all(|cl| cl.iter().any(|l| l.holds(&assignment)))
        })
    }
}

fn unit_election(num_candidates: usize, ballots: Vec<PartialBallot>) -> Result<Election, ReductionError> {
    Ok(Election::new(num_candidates, ballots, TieBreakPolicy::index_order())
        .map_err(ManipulationError::from)?)
}

fn ballot(ranking: &[CandidateId], weight: u64) -> PartialBallot {
    PartialBallot::new(ranking.to_vec(), weight).expect("generator ballots are valid")
}

/// Partition → modified Borda with three candidates `a, b, p`.
///
/// Fixed ballots `(a)` and `(b)` of weight `3K`; one manipulator per bag
/// entry.
pub fn gen_partition_to_mbc(inst: &PartitionInstance) -> Result<ManipulationProblem, ReductionError> {
    let k = inst.half();
    let fixed = unit_election(3, vec![ballot(&[A], 3 * k), ballot(&[B], 3 * k)])?;
    Ok(ManipulationProblem::new(
        fixed,
        P3,
        Rule::Scoring(ScoringRule::modified_borda(3)),
        Coalition::Weighted(inst.bag.clone()),
        3,
    )?)
}

/// Partition → Copeland with four candidates `a, b, c, p`.
///
/// Fixed ballots `a>b>c>p` and `a>c>b>p`, each of weight `K`.
pub fn gen_partition_to_copeland(
    inst: &PartitionInstance,
) -> Result<ManipulationProblem, ReductionError> {
    let k = inst.half();
    let fixed = unit_election(4, vec![ballot(&[A, B, C, P4], k), ballot(&[A, C, B, P4], k)])?;
    Ok(ManipulationProblem::new(
        fixed,
        P4,
        Rule::copeland(),
        Coalition::Weighted(inst.bag.clone()),
        4,
    )?)
}

/// Paired subset sum → average-score Borda with three candidates `a, b, p`.
///
/// Fixed complete ballots `a>b>p` of weight `t1` and `b>a>p` of weight
/// `t2`; a zero weight drops the ballot. One manipulator of weight
/// `s_i + s'_i` per pair.
pub fn gen_subsetsum_to_borda_av(
    inst: &SubsetSumPairsInstance,
) -> Result<ManipulationProblem, ReductionError> {
    let mut fixed = Vec::new();
    if inst.target() > 0 {
        fixed.push(ballot(&[A, B, P3], inst.target()));
    }
    if inst.complement() > 0 {
        fixed.push(ballot(&[B, A, P3], inst.complement()));
    }
    let fixed = unit_election(3, fixed)?;
    Ok(ManipulationProblem::new(
        fixed,
        P3,
        Rule::Scoring(ScoringRule::borda(3, ScoringScheme::Average)),
        Coalition::Weighted(inst.pairs.iter().map(|(s, s2)| s + s2).collect()),
        3,
    )?)
}

/// Numbers and target produced by [`gen_3sat_to_subsetsum`].
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct SubsetSumEncoding {
    /// `y_i, y'_i, z_i, z'_i` for every variable, then `g_j, g'_j` per clause.
    pub bag: Vec<BigUint>,
    pub target: BigUint,
}

/// 3-SAT → subset sum whose numbers come in identical pairs.
///
/// Every number has `n + m` decimal digits, variable digits first. `y_i`
/// has a 1 in variable digit `i` and in clause digit `j` whenever clause `j`
/// contains `x_i`; `z_i` likewise for `¬x_i`; `g_j` has only clause digit
/// `j`. The target has 1 in every variable digit and 3 in every clause
/// digit. No column can exceed 9, so sums never carry.
pub fn gen_3sat_to_subsetsum(cnf: &CnfFormula) -> SubsetSumEncoding {
    let n = cnf.num_vars();
    let m = cnf.clauses().len();
    let width = n + m;
    let ten = BigUint::from(10u32);
    // value of the digit at 1-based position `d` counted from the left
    let place = |d: usize| ten.pow((width - d) as u32);

    let mut bag = Vec::with_capacity(4 * n + 2 * m);
    for var in 1..=n {
        for negated in [false, true] {
            let lit = Literal { var, negated };
            let mut x = place(var);
            for (j, clause) in cnf.clauses().iter().enumerate() {
                if clause.contains(&lit) {
                    x += place(n + j + 1);
                }
            }
            bag.push(x.clone());
            bag.push(x);
        }
    }
    for j in 0..m {
        let g = place(n + j + 1);
        bag.push(g.clone());
        bag.push(g);
    }
    let mut target = BigUint::zero();
    for d in 1..=n {
        target += place(d);
    }
    for d in n + 1..=width {
        target += place(d) * 3u32;
    }
    SubsetSumEncoding { bag, target }
}

/// Does the bag split into two halves of equal sum?
pub fn oracle_partition(bag: &[u64]) -> bool {
    let total: u64 = bag.iter().sum();
    total.is_multiple_of(2) && oracle_subsetsum(bag, total / 2)
}

/// Does some sub-multiset of `bag` sum to `target`? Dense DP over
/// `0..=target`.
pub fn oracle_subsetsum(bag: &[u64], target: u64) -> bool {
    let t = target as usize;
    let mut reachable = vec![false; t + 1];
    reachable[0] = true;
    for &x in bag {
        let x = x as usize;
        if x > t {
            continue;
        }
        for s in (x..=t).rev() {
            if reachable[s - x] {
                reachable[s] = true;
            }
        }
    }
    reachable[t]
}

/// Arbitrary-precision subset sum: the DP keeps the set of reachable sums
/// not exceeding the target.
pub fn oracle_subsetsum_big(bag: &[BigUint], target: &BigUint) -> bool {
    let mut reachable: BTreeSet<BigUint> = BTreeSet::new();
    reachable.insert(BigUint::zero());
    for x in bag {
        let grown: Vec<BigUint> = reachable
            .iter()
            .map(|s| s + x)
            .filter(|s| s <= target)
            .collect();
        reachable.extend(grown);
        if reachable.contains(target) {
            return true;
        }
    }
    reachable.contains(target)
}

/// Inverse of the digit layout: the digits of `x` as `width` decimals, most
/// significant first.
pub fn decimal_digits(x: &BigUint, width: usize) -> Vec<u8> {
    let s = x.to_str_radix(10);
    let mut digits: Vec<u8> = s.bytes().map(|b| b - b'0').collect();
    if x.is_zero() {
        digits.clear();
    }
    let mut out = vec![0u8; width.saturating_sub(digits.len())];
    out.extend(digits);
    out
}
