//! A single handle over every implemented voting rule.

use std::fmt;
use std::str::FromStr;

use thiserror::Error;

use crate::copeland::{copeland_winner_with, PairwiseReading};
use crate::election::{CandidateId, Election};
use crate::scoring::{plurality_vector, ScoringError, ScoringRule, ScoringScheme};
use crate::stv::stv_winner;

#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub enum Rule {
    Scoring(ScoringRule),
    Stv,
    Copeland(PairwiseReading),
}

impl Rule {
    pub fn copeland() -> Self {
        Rule::Copeland(PairwiseReading::ExpressedMajority)
    }

    pub fn winner(&self, election: &Election) -> Result<CandidateId, ScoringError> {
        Ok(match self {
            Rule::Scoring(rule) => rule.evaluate(election)?.0,
            Rule::Stv => stv_winner(election).0,
            Rule::Copeland(reading) => copeland_winner_with(election, *reading).0,
        })
    }

    pub fn is_scoring(&self) -> bool {
        matches!(self, Rule::Scoring(_))
    }
}

/// A rule family that can be instantiated for any number of candidates.
///
/// Parsed from names such as `borda-roundup`, `borda-rounddown`
/// (modified Borda), `borda-average`, `plurality-roundup`, `shifted`, `stv`,
/// `copeland` and `copeland-half`.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum RuleSpec {
    Borda(ScoringScheme),
    Plurality(ScoringScheme),
    Shifted,
    Stv,
    Copeland(PairwiseReading),
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
#[error("unknown rule `{0}`")]
pub struct UnknownRule(pub String);

impl RuleSpec {
    pub fn instantiate(&self, num_candidates: usize) -> Rule {
        match *self {
            RuleSpec::Borda(scheme) => Rule::Scoring(ScoringRule::borda(num_candidates, scheme)),
            RuleSpec::Plurality(scheme) => Rule::Scoring(
                ScoringRule::new(plurality_vector(num_candidates), scheme)
                    .expect("plurality vector is valid for non-shifted schemes"),
            ),
            RuleSpec::Shifted => Rule::Scoring(ScoringRule::shifted(num_candidates)),
            RuleSpec::Stv => Rule::Stv,
            RuleSpec::Copeland(reading) => Rule::Copeland(reading),
        }
    }
}

impl FromStr for RuleSpec {
    type Err = UnknownRule;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        let scheme = |name: &str| match name {
            "roundup" => Some(ScoringScheme::RoundUp),
            "rounddown" => Some(ScoringScheme::RoundDown),
            "average" => Some(ScoringScheme::Average),
            _ => None,
        };
        let lower = s.trim().to_ascii_lowercase();
        let spec = match lower.as_str() {
            "modified-borda" => Some(RuleSpec::Borda(ScoringScheme::RoundDown)),
            "shifted" => Some(RuleSpec::Shifted),
            "stv" => Some(RuleSpec::Stv),
            "copeland" => Some(RuleSpec::Copeland(PairwiseReading::ExpressedMajority)),
            "copeland-half" => Some(RuleSpec::Copeland(PairwiseReading::HalfElectorate)),
            other => match other.split_once('-') {
                Some(("borda", sch)) => scheme(sch).map(RuleSpec::Borda),
                Some(("plurality", sch)) => scheme(sch).map(RuleSpec::Plurality),
                _ => None,
            },
        };
        spec.ok_or_else(|| UnknownRule(s.to_string()))
    }
}

impl fmt::Display for RuleSpec {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            RuleSpec::Borda(s) => write!(f, "borda-{s}"),
            RuleSpec::Plurality(s) => write!(f, "plurality-{s}"),
            RuleSpec::Shifted => f.write_str("shifted"),
            RuleSpec::Stv => f.write_str("stv"),
            RuleSpec::Copeland(PairwiseReading::ExpressedMajority) => f.write_str("copeland"),
            RuleSpec::Copeland(PairwiseReading::HalfElectorate) => f.write_str("copeland-half"),
        }
    }
}
