//! Reading and writing PrefLib strict-order files (`.soi`, tie-free `.toi`),
//! sub-election sampling and ballot-length statistics.
//!
//! Two layouts are accepted. Legacy:
//!
//! ```text
//! 3
//! 1,Alice
//! 2,Bob
//! 3,Carol
//! 5,5,2
//! 2,1,3
//! 3,2
//! ```
//!
//! Modern: `# KEY: value` header lines followed by `count: c1,c2,...`.
//! Candidates are 1-based in files and 0-based in [`RawProfile`].

use std::fmt::{self, Write as _};
use std::path::Path;

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use thiserror::Error;

use crate::election::{Election, ElectionError, PartialBallot, TieBreakPolicy};

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum PreflibError {
    #[error("line {line}: malformed header: {reason}")]
    MalformedHeader { line: usize, reason: String },
    #[error("line {line}: malformed ballot: {reason}")]
    MalformedBallot { line: usize, reason: String },
    #[error("line {line}: tied candidates are not supported")]
    TieNotSupported { line: usize },
    #[error("line {line}: candidate {index} is not in 1..={num_candidates}")]
    UnknownCandidateIndex {
        line: usize,
        index: usize,
        num_candidates: usize,
    },
    #[error("line {line}: ballot count must be positive")]
    NonPositiveCount { line: usize },
    #[error("line {line}: candidate {index} ranked twice")]
    DuplicateCandidate { line: usize, index: usize },
    #[error("profile has no ballots")]
    EmptyProfile,
    #[error("asked for {requested} ballots but the profile has {available}")]
    NotEnoughBallots { requested: u64, available: u64 },
    #[error("cannot read {path}: {message}")]
    Io { path: String, message: String },
}

/// Candidate names plus `(count, ranking)` lines, rankings 0-based.
#[derive(Clone, Debug, PartialEq, Eq, Default)]
pub struct RawProfile {
    pub candidates: Vec<String>,
    pub ballots: Vec<(u64, Vec<usize>)>,
    pub source: Option<String>,
}

impl RawProfile {
    pub fn num_candidates(&self) -> usize {
        self.candidates.len()
    }

    /// Number of voters: the sum of all counts.
    pub fn num_voters(&self) -> u64 {
        self.ballots.iter().map(|(c, _)| c).sum()
    }

    /// Distinct rankings.
    pub fn num_unique(&self) -> usize {
        let mut seen: Vec<&Vec<usize>> = self.ballots.iter().map(|(_, r)| r).collect();
        seen.sort();
        seen.dedup();
        seen.len()
    }

    pub fn with_source(mut self, source: impl Into<String>) -> Self {
        self.source = Some(source.into());
        self
    }
}

fn parse_int(s: &str) -> Option<i64> {
    s.trim().parse::<i64>().ok()
}

fn parse_ranking(
    body: &str,
    line: usize,
    num_candidates: usize,
) -> Result<Vec<usize>, PreflibError> {
    if body.contains('{') || body.contains('}') {
        return Err(PreflibError::TieNotSupported { line });
    }
    let mut ranking = Vec::new();
    for tok in body.split(',') {
        let tok = tok.trim();
        if tok.is_empty() {
            continue;
        }
        let index: usize = tok.parse().map_err(|_| PreflibError::MalformedBallot {
            line,
            reason: format!("'{tok}' is not a candidate number"),
        })?;
        if index == 0 || index > num_candidates {
            return Err(PreflibError::UnknownCandidateIndex {
                line,
                index,
                num_candidates,
            });
        }
        if ranking.contains(&(index - 1)) {
            return Err(PreflibError::DuplicateCandidate { line, index });
        }
        ranking.push(index - 1);
    }
    if ranking.is_empty() {
        return Err(PreflibError::MalformedBallot {
            line,
            reason: "no candidates ranked".into(),
        });
    }
    Ok(ranking)
}

fn parse_count(s: &str, line: usize) -> Result<u64, PreflibError> {
    match parse_int(s) {
        Some(c) if c > 0 => Ok(c as u64),
        Some(_) => Err(PreflibError::NonPositiveCount { line }),
        None => Err(PreflibError::MalformedBallot {
            line,
            reason: format!("'{}' is not a count", s.trim()),
        }),
    }
}

/// Parses either file layout; the layout is chosen by whether the first
/// non-blank line starts with `#`.
pub fn parse_election_file(text: &str) -> Result<RawProfile, PreflibError> {
    let lines: Vec<(usize, &str)> = text
        .lines()
        .enumerate()
        .map(|(i, l)| (i + 1, l.trim()))
        .filter(|(_, l)| !l.is_empty())
        .collect();
    match lines.first() {
        Some((_, l)) if l.starts_with('#') => parse_modern(&lines),
        Some(_) => parse_legacy(&lines),
        None => Err(PreflibError::MalformedHeader {
            line: 1,
            reason: "empty file".into(),
        }),
    }
}

fn parse_legacy(lines: &[(usize, &str)]) -> Result<RawProfile, PreflibError> {
    let (first, head) = lines[0];
    let m = match parse_int(head) {
        Some(m) if m > 0 => m as usize,
        _ => {
            return Err(PreflibError::MalformedHeader {
                line: first,
                reason: format!("expected a candidate count, got '{head}'"),
            })
        }
    };
    if lines.len() < m + 2 {
        let line = lines.last().map_or(first, |l| l.0);
        return Err(PreflibError::MalformedHeader {
            line,
            reason: "file ends inside the header".into(),
        });
    }
    let mut candidates = vec![String::new(); m];
    for &(line, l) in &lines[1..=m] {
        let (idx, name) = l.split_once(',').ok_or_else(|| PreflibError::MalformedHeader {
            line,
            reason: "expected 'index,name'".into(),
        })?;
        let idx = match parse_int(idx) {
            Some(i) if i >= 1 && i as usize <= m => i as usize,
            _ => {
                return Err(PreflibError::MalformedHeader {
                    line,
                    reason: format!("bad candidate index '{}'", idx.trim()),
                })
            }
        };
        candidates[idx - 1] = name.trim().to_string();
    }
    let (line, summary) = lines[m + 1];
    let fields: Vec<Option<i64>> = summary.split(',').map(parse_int).collect();
    if fields.len() != 3 || fields.iter().any(|f| f.is_none_or(|x| x < 0)) {
        return Err(PreflibError::MalformedHeader {
            line,
            reason: "expected summary 'voters,sum,unique'".into(),
        });
    }
    let mut ballots = Vec::new();
    for &(line, l) in &lines[m + 2..] {
        let (count, body) = l.split_once(',').unwrap_or((l, ""));
        let count = parse_count(count, line)?;
        ballots.push((count, parse_ranking(body, line, m)?));
    }
    Ok(RawProfile {
        candidates,
        ballots,
        source: None,
    })
}

fn parse_modern(lines: &[(usize, &str)]) -> Result<RawProfile, PreflibError> {
    let mut m: Option<usize> = None;
    let mut names: Vec<(usize, String)> = Vec::new();
    let mut body = Vec::new();
    for &(line, l) in lines {
        if let Some(h) = l.strip_prefix('#') {
            let Some((key, value)) = h.split_once(':') else {
                continue;
            };
            let key = key.trim().to_ascii_uppercase();
            if key == "NUMBER ALTERNATIVES" {
                m = match parse_int(value) {
                    Some(v) if v > 0 => Some(v as usize),
                    _ => {
                        return Err(PreflibError::MalformedHeader {
                            line,
                            reason: format!("bad alternative count '{}'", value.trim()),
                        })
                    }
                };
            } else if let Some(idx) = key.strip_prefix("ALTERNATIVE NAME") {
                let idx = parse_int(idx)
                    .filter(|&i| i >= 1)
                    .ok_or_else(|| PreflibError::MalformedHeader {
                        line,
                        reason: format!("bad alternative number in '{key}'"),
                    })?;
                names.push((idx as usize, value.trim().to_string()));
            }
        } else {
            body.push((line, l));
        }
    }
    let m = m.ok_or(PreflibError::MalformedHeader {
        line: lines[0].0,
        reason: "missing '# NUMBER ALTERNATIVES'".into(),
    })?;
    let mut candidates: Vec<String> = (1..=m).map(|i| format!("Candidate {i}")).collect();
    for (idx, name) in names {
        if idx > m {
            return Err(PreflibError::MalformedHeader {
                line: lines[0].0,
                reason: format!("alternative {idx} beyond {m}"),
            });
        }
        candidates[idx - 1] = name;
    }
    let mut ballots = Vec::new();
    for (line, l) in body {
        let (count, ranking) = l.split_once(':').ok_or_else(|| PreflibError::MalformedBallot {
            line,
            reason: "expected 'count: ranking'".into(),
        })?;
        let count = parse_count(count, line)?;
        ballots.push((count, parse_ranking(ranking, line, m)?));
    }
    Ok(RawProfile {
        candidates,
        ballots,
        source: None,
    })
}

/// Reads a file; the source is set to the file stem.
pub fn read_election_file(path: &Path) -> Result<RawProfile, PreflibError> {
    let text = std::fs::read_to_string(path).map_err(|e| PreflibError::Io {
        path: path.display().to_string(),
        message: e.to_string(),
    })?;
    let stem = path
        .file_stem()
        .map(|s| s.to_string_lossy().into_owned())
        .unwrap_or_default();
    Ok(parse_election_file(&text)?.with_source(stem))
}

/// Writes the legacy layout. The source is not stored.
pub fn serialize(profile: &RawProfile) -> String {
    let mut out = String::new();
    let _ = writeln!(out, "{}", profile.num_candidates());
    for (i, name) in profile.candidates.iter().enumerate() {
        let _ = writeln!(out, "{},{}", i + 1, name);
    }
    let _ = writeln!(
        out,
        "{},{},{}",
        profile.num_voters(),
        profile.num_voters(),
        profile.num_unique()
    );
    for (count, ranking) in &profile.ballots {
        out.push_str(&count.to_string());
        for c in ranking {
            let _ = write!(out, ",{}", c + 1);
        }
        out.push('\n');
    }
    out
}

/// Legacy-format profile of an election, with generic candidate names.
pub fn profile_of(election: &Election) -> RawProfile {
    RawProfile {
        candidates: (1..=election.num_candidates())
            .map(|i| format!("Candidate {i}"))
            .collect(),
        ballots: election
            .ballots()
            .iter()
            .map(|b| (b.weight(), b.ranking().iter().map(|c| c.0).collect()))
            .collect(),
        source: None,
    }
}

pub fn to_election(profile: &RawProfile, tie_break: TieBreakPolicy) -> Result<Election, ElectionError> {
    let ballots = profile
        .ballots
        .iter()
        .map(|(count, ranking)| PartialBallot::from_indices(ranking, *count))
        .collect::<Result<Vec<_>, _>>()?;
    Election::new(profile.num_candidates(), ballots, tie_break)
}

/// Ballot-length statistics, weighted by count.
#[derive(Clone, Debug, PartialEq)]
pub struct TruncationStats {
    pub voters: u64,
    /// Lower middle value of the sorted lengths.
    pub median: usize,
    pub mean: f64,
    /// Population standard deviation.
    pub std_dev: f64,
    pub complete_fraction: f64,
}

impl TruncationStats {
    pub const CSV_HEADER: &'static str = "voters,median,mean,std,complete_fraction";

    pub fn csv_row(&self) -> String {
        format!(
            "{},{},{:.4},{:.4},{:.4}",
            self.voters, self.median, self.mean, self.std_dev, self.complete_fraction
        )
    }
}

impl fmt::Display for TruncationStats {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        writeln!(f, "voters: {}", self.voters)?;
        writeln!(f, "median: {}", self.median)?;
        writeln!(f, "mean: {:.4}", self.mean)?;
        writeln!(f, "std: {:.4}", self.std_dev)?;
        write!(f, "complete_fraction: {:.4}", self.complete_fraction)
    }
}

pub fn truncation_stats(profile: &RawProfile) -> Result<TruncationStats, PreflibError> {
    let n = profile.num_voters();
    if n == 0 {
        return Err(PreflibError::EmptyProfile);
    }
    let m = profile.num_candidates();
    let mut by_len: Vec<(usize, u64)> = profile
        .ballots
        .iter()
        .map(|(c, r)| (r.len(), *c))
        .collect();
    by_len.sort_unstable();

    let target = (n - 1) / 2;
    let mut seen = 0u64;
    let mut median = 0;
    for &(len, c) in &by_len {
        if seen + c > target {
            median = len;
            break;
        }
        seen += c;
    }

    let sum: u128 = by_len.iter().map(|&(l, c)| l as u128 * c as u128).sum();
    let sum_sq: u128 = by_len.iter().map(|&(l, c)| (l * l) as u128 * c as u128).sum();
    let nf = n as f64;
    let mean = sum as f64 / nf;
    // n·Σl² - (Σl)² is exact in integers
    let spread = (n as u128 * sum_sq - sum * sum) as f64;
    let std_dev = spread.sqrt() / nf;
    let complete: u64 = by_len.iter().filter(|(l, _)| *l == m).map(|(_, c)| c).sum();
    Ok(TruncationStats {
        voters: n,
        median,
        mean,
        std_dev,
        complete_fraction: complete as f64 / nf,
    })
}

/// Draws `t` voters uniformly without replacement and regroups them by the
/// line they came from, keeping line order.
pub fn sample_subelection(profile: &RawProfile, t: u64, seed: u64) -> Result<RawProfile, PreflibError> {
    let n = profile.num_voters();
    if t > n {
        return Err(PreflibError::NotEnoughBallots {
            requested: t,
            available: n,
        });
    }
    let mut ends = Vec::with_capacity(profile.ballots.len());
    let mut acc = 0u64;
    for (c, _) in &profile.ballots {
        acc += c;
        ends.push(acc);
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut picked = vec![0u64; profile.ballots.len()];
    for unit in rand::seq::index::sample(&mut rng, n as usize, t as usize) {
        let line = ends.partition_point(|&e| e <= unit as u64);
        picked[line] += 1;
    }
    let ballots = profile
        .ballots
        .iter()
        .zip(picked)
        .filter(|(_, k)| *k > 0)
        .map(|((_, r), k)| (k, r.clone()))
        .collect();
    Ok(RawProfile {
        candidates: profile.candidates.clone(),
        ballots,
        source: profile.source.clone(),
    })
}
