//! Experiment driver: sample sub-elections, pick a target, find the smallest
//! manipulating coalition, aggregate per cell.
//!
//! Config files are `key = value` lines (`#` starts a comment):
//!
//! ```text
//! inputs = data/a.soi, data/b.soi
//! rules = borda-roundup, copeland
//! t = 32, 64
//! lengths = 3, 6, full
//! trials = 20
//! timeout_ms = 10000
//! seed = 7
//! coalition_limit = 12
//! ```

use std::collections::BTreeMap;
use std::fmt;
use std::path::{Path, PathBuf};
use std::time::{Duration, Instant};

use anyhow::{anyhow, bail, Context, Result};
use pvote::preflib::{read_election_file, sample_subelection, to_election, RawProfile};
use pvote::{
    copeland_scores_with, exact_min_coalition, pairwise_matrix, stv_winner, CandidateId,
    Coalition, Election, ManipulationProblem, Outcome, Rule, RuleSpec, TieBreakPolicy,
};
use rayon::prelude::*;

/// Overrides the default per-instance timeout (milliseconds).
pub const TIMEOUT_ENV: &str = "PVOTE_TIMEOUT_MS";
pub const DEFAULT_TRIALS: usize = 20;
pub const DEFAULT_TIMEOUT: Duration = Duration::from_secs(10);
pub const DEFAULT_COALITION_LIMIT: usize = 12;
pub const CSV_HEADER: [&str; 8] = [
    "dataset",
    "m",
    "t",
    "length",
    "avg_time_ms",
    "avg_coalition",
    "solved",
    "timeouts",
];

/// Maximum manipulator ballot length for a cell.
#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord)]
pub enum LengthSpec {
    Fixed(usize),
    /// As many candidates as the election has.
    Full,
}

impl LengthSpec {
    pub fn resolve(self, num_candidates: usize) -> usize {
        match self {
            LengthSpec::Fixed(l) => l.min(num_candidates),
            LengthSpec::Full => num_candidates,
        }
    }
}

impl fmt::Display for LengthSpec {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            LengthSpec::Fixed(l) => write!(f, "{l}"),
            LengthSpec::Full => f.write_str("full"),
        }
    }
}

impl std::str::FromStr for LengthSpec {
    type Err = anyhow::Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.trim() {
            "full" => Ok(LengthSpec::Full),
            x => match x.parse::<usize>() {
                Ok(l) if l > 0 => Ok(LengthSpec::Fixed(l)),
                _ => bail!("ballot length must be a positive integer or `full`, got `{x}`"),
            },
        }
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct ExperimentConfig {
    pub inputs: Vec<PathBuf>,
    pub rules: Vec<RuleSpec>,
    pub t_values: Vec<u64>,
    pub lengths: Vec<LengthSpec>,
    pub trials: usize,
    pub timeout: Duration,
    pub seed: u64,
    pub coalition_limit: usize,
    /// Worker threads; `None` lets the pool decide.
    pub threads: Option<usize>,
    /// Off leaves `avg_time_ms` blank so the CSV depends only on the config.
    pub report_time: bool,
    /// 0-based candidate to promote in every trial, instead of the weakest
    /// non-winner.
    pub preferred: Option<usize>,
}

impl ExperimentConfig {
    /// A config with the given inputs and defaults elsewhere.
    pub fn new(inputs: Vec<PathBuf>) -> Self {
        ExperimentConfig {
            inputs,
            rules: vec![RuleSpec::Borda(pvote::ScoringScheme::RoundUp)],
            t_values: vec![32],
            lengths: vec![LengthSpec::Full],
            trials: DEFAULT_TRIALS,
            timeout: default_timeout(),
            seed: 0,
            coalition_limit: DEFAULT_COALITION_LIMIT,
            threads: None,
            report_time: true,
            preferred: None,
        }
    }

    /// Parses config text. Relative input paths are resolved against
    /// `base_dir`.
    pub fn parse(text: &str, base_dir: &Path) -> Result<Self> {
        let mut kv: BTreeMap<String, (usize, String)> = BTreeMap::new();
        for (i, line) in text.lines().enumerate() {
            let line = line.split('#').next().unwrap_or("").trim();
            if line.is_empty() {
                continue;
            }
            let (k, v) = line
                .split_once('=')
                .ok_or_else(|| anyhow!("line {}: expected `key = value`", i + 1))?;
            let k = k.trim().to_string();
            if kv.insert(k.clone(), (i + 1, v.trim().to_string())).is_some() {
                bail!("line {}: `{k}` given twice", i + 1);
            }
        }
        let list = |v: &str| -> Vec<String> {
            v.split(',')
                .map(|x| x.trim().to_string())
                .filter(|x| !x.is_empty())
                .collect()
        };
        let mut cfg = ExperimentConfig::new(Vec::new());
        for (key, (line, value)) in kv {
            let ctx = || format!("line {line}: bad value for `{key}`");
            match key.as_str() {
                "inputs" => {
                    cfg.inputs = list(&value).iter().map(|p| base_dir.join(p)).collect();
                }
                "rules" => {
                    cfg.rules = list(&value)
                        .iter()
                        .map(|r| r.parse::<RuleSpec>())
                        .collect::<Result<_, _>>()
                        .with_context(ctx)?;
                }
                "t" => {
                    cfg.t_values = list(&value)
                        .iter()
                        .map(|x| x.parse::<u64>())
                        .collect::<Result<_, _>>()
                        .with_context(ctx)?;
                }
                "lengths" => {
                    cfg.lengths = list(&value)
                        .iter()
                        .map(|x| x.parse::<LengthSpec>())
                        .collect::<Result<_>>()
                        .with_context(ctx)?;
                }
                "trials" => cfg.trials = value.parse().with_context(ctx)?,
                "timeout_ms" => {
                    cfg.timeout = Duration::from_millis(value.parse().with_context(ctx)?)
                }
                "seed" => cfg.seed = value.parse().with_context(ctx)?,
                "coalition_limit" => cfg.coalition_limit = value.parse().with_context(ctx)?,
                "threads" => cfg.threads = Some(value.parse().with_context(ctx)?),
                "report_time" => cfg.report_time = value.parse().with_context(ctx)?,
                "preferred" => {
                    let p: usize = value.parse().with_context(ctx)?;
                    if p == 0 {
                        bail!("line {line}: candidates are numbered from 1");
                    }
                    cfg.preferred = Some(p - 1);
                }
                _ => bail!("line {line}: unknown key `{key}`"),
            }
        }
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn from_file(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path)
            .with_context(|| format!("cannot read config {}", path.display()))?;
        let base = path.parent().unwrap_or(Path::new("."));
        Self::parse(&text, base).with_context(|| format!("in config {}", path.display()))
    }

    pub fn validate(&self) -> Result<()> {
        if self.inputs.is_empty() {
            bail!("no inputs");
        }
        if self.rules.is_empty() || self.t_values.is_empty() || self.lengths.is_empty() {
            bail!("rules, t and lengths must each list at least one value");
        }
        if self.trials == 0 {
            bail!("trials must be at least 1");
        }
        if self.timeout.is_zero() {
            bail!("timeout must be positive");
        }
        if self.t_values.contains(&0) {
            bail!("t values must be positive");
        }
        if self.threads == Some(0) {
            bail!("threads must be at least 1");
        }
        Ok(())
    }
}

fn default_timeout() -> Duration {
    std::env::var(TIMEOUT_ENV)
        .ok()
        .and_then(|v| v.parse::<u64>().ok())
        .filter(|&ms| ms > 0)
        .map(Duration::from_millis)
        .unwrap_or(DEFAULT_TIMEOUT)
}

#[derive(Clone, Debug, PartialEq)]
pub struct ResultRow {
    /// `file stem:rule`.
    pub dataset: String,
    pub m: usize,
    pub t: u64,
    pub length: LengthSpec,
    /// Over solved instances; `None` when nothing was solved or timing is
    /// not reported.
    pub avg_time_ms: Option<f64>,
    pub avg_coalition: Option<f64>,
    pub solved: usize,
    pub timeouts: usize,
}

impl ResultRow {
    fn csv_fields(&self) -> [String; 8] {
        let opt = |x: Option<f64>| x.map(|v| format!("{v:.3}")).unwrap_or_default();
        [
            self.dataset.clone(),
            self.m.to_string(),
            self.t.to_string(),
            self.length.to_string(),
            opt(self.avg_time_ms),
            opt(self.avg_coalition),
            self.solved.to_string(),
            self.timeouts.to_string(),
        ]
    }
}

pub fn to_csv(rows: &[ResultRow]) -> Result<String> {
    let mut w = csv::Writer::from_writer(Vec::new());
    w.write_record(CSV_HEADER)?;
    for r in rows {
        w.write_record(r.csv_fields())?;
    }
    Ok(String::from_utf8(w.into_inner()?)?)
}

/// splitmix64 finaliser.
fn mix(mut z: u64) -> u64 {
    z = z.wrapping_add(0x9e37_79b9_7f4a_7c15);
    z = (z ^ (z >> 30)).wrapping_mul(0xbf58_476d_1ce4_e5b9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94d0_49bb_1331_11eb);
    z ^ (z >> 31)
}

/// Seed for one sampled sub-election. Independent of rule and length, so
/// every cell over the same file and `t` sees the same samples.
pub fn trial_seed(master: u64, file: usize, t: u64, trial: usize) -> u64 {
    [file as u64, t, trial as u64]
        .iter()
        .fold(mix(master), |acc, &x| mix(acc ^ x))
}

/// The non-winner doing worst under `rule` in the truthful election: lowest
/// score for scoring rules and Copeland, earliest eliminated under STV. Ties
/// go to the lower index. `None` when there is only one candidate.
pub fn weakest_non_winner(election: &Election, rule: &Rule) -> Result<Option<CandidateId>> {
    let winner = rule.winner(election)?;
    let lowest = |scores: Vec<(CandidateId, i128)>| {
        scores
            .into_iter()
            .filter(|(c, _)| *c != winner)
            .min_by_key(|&(c, s)| (s, c))
            .map(|(c, _)| c)
    };
    Ok(match rule {
        Rule::Scoring(r) => {
            let (_, table) = r.evaluate(election)?;
            let mut rows: Vec<(CandidateId, pvote::Rational)> = election
                .candidates()
                .map(|c| (c, table.score(c)))
                .collect();
            rows.sort_by(|a, b| a.1.cmp(&b.1).then(a.0.cmp(&b.0)));
            rows.into_iter().map(|(c, _)| c).find(|&c| c != winner)
        }
        Rule::Copeland(reading) => {
            let s = copeland_scores_with(&pairwise_matrix(election), *reading);
            lowest(election.candidates().map(|c| (c, s.score(c) as i128)).collect())
        }
        Rule::Stv => {
            let (_, trace) = stv_winner(election);
            match trace.eliminated().first() {
                Some(&c) => Some(c),
                None => match trace.rounds.last() {
                    Some(r) => lowest(r.tallies.iter().map(|&(c, t)| (c, t as i128)).collect()),
                    None => None,
                },
            }
        }
    })
}

#[derive(Clone, Debug)]
enum TrialResult {
    Solved { time: Duration, size: usize },
    Timeout,
    Unsolved,
}

#[derive(Clone, Debug)]
struct Job {
    file: usize,
    rule: usize,
    t: usize,
    length: usize,
    trial: usize,
}

struct Dataset {
    name: String,
    profile: RawProfile,
}

fn run_trial(cfg: &ExperimentConfig, data: &Dataset, job: &Job) -> Result<TrialResult> {
    let t = cfg.t_values[job.t];
    let seed = trial_seed(cfg.seed, job.file, t, job.trial);
    let sample = sample_subelection(&data.profile, t, seed)?;
    let election = to_election(&sample, TieBreakPolicy::index_order())?;
    let m = election.num_candidates();
    let rule = cfg.rules[job.rule].instantiate(m);
    let preferred = match cfg.preferred {
        Some(p) if p < m => CandidateId(p),
        Some(p) => bail!("preferred candidate {} but only {m} candidates", p + 1),
        None => match weakest_non_winner(&election, &rule)? {
            Some(c) => c,
            None => return Ok(TrialResult::Solved { time: Duration::ZERO, size: 0 }),
        },
    };
    let length = cfg.lengths[job.length].resolve(m);
    let problem =
        ManipulationProblem::new(election, preferred, rule, Coalition::Unweighted(0), length)?;
    let start = Instant::now();
    let result = exact_min_coalition(&problem, cfg.coalition_limit, Some(cfg.timeout))?;
    let time = start.elapsed();
    Ok(match result.outcome {
        Outcome::Success(_) => TrialResult::Solved {
            time,
            size: result.stats.coalition_size.unwrap_or(0),
        },
        Outcome::Timeout => TrialResult::Timeout,
        Outcome::Impossible => TrialResult::Unsolved,
    })
}

fn aggregate(
    cfg: &ExperimentConfig,
    data: &Dataset,
    job: &Job,
    results: &[TrialResult],
) -> ResultRow {
    let mut solved = 0usize;
    let mut timeouts = 0usize;
    let mut time = Duration::ZERO;
    let mut size = 0usize;
    for r in results {
        match r {
            TrialResult::Solved { time: d, size: s } => {
                solved += 1;
                time += *d;
                size += s;
            }
            TrialResult::Timeout => timeouts += 1,
            TrialResult::Unsolved => {}
        }
    }
    let avg = |x: f64| (solved > 0).then(|| x / solved as f64);
    ResultRow {
        dataset: format!("{}:{}", data.name, cfg.rules[job.rule]),
        m: data.profile.num_candidates(),
        t: cfg.t_values[job.t],
        length: cfg.lengths[job.length],
        avg_time_ms: if cfg.report_time {
            avg(time.as_secs_f64() * 1000.0)
        } else {
            None
        },
        avg_coalition: avg(size as f64),
        solved,
        timeouts,
    }
}

/// Runs every (file, rule, t, length) cell. Files that fail to load and
/// cells that cannot be sampled are reported through `warn` and skipped.
pub fn run_experiment_with(
    cfg: &ExperimentConfig,
    mut warn: impl FnMut(String),
) -> Result<Vec<ResultRow>> {
    cfg.validate()?;
    let mut datasets = Vec::new();
    for path in &cfg.inputs {
        match read_election_file(path) {
            Ok(profile) => datasets.push(Some(Dataset {
                name: profile.source.clone().unwrap_or_default(),
                profile,
            })),
            Err(e) => {
                warn(format!("skipping {}: {e}", path.display()));
                datasets.push(None);
            }
        }
    }

    let mut jobs = Vec::new();
    for (file, data) in datasets.iter().enumerate() {
        let Some(data) = data else { continue };
        for (t_ix, &t) in cfg.t_values.iter().enumerate() {
            if t > data.profile.num_voters() {
                warn(format!(
                    "skipping {} with t={t}: only {} ballots",
                    data.name,
                    data.profile.num_voters()
                ));
                continue;
            }
            for rule in 0..cfg.rules.len() {
                for length in 0..cfg.lengths.len() {
                    for trial in 0..cfg.trials {
                        jobs.push(Job { file, rule, t: t_ix, length, trial });
                    }
                }
            }
        }
    }
    // sort key: file, rule, t, length, trial
    jobs.sort_by_key(|j| (j.file, j.rule, j.t, j.length, j.trial));

    let mut builder = rayon::ThreadPoolBuilder::new();
    if let Some(n) = cfg.threads {
        builder = builder.num_threads(n);
    }
    let pool = builder.build()?;
    let results: Vec<Result<TrialResult>> = pool.install(|| {
        jobs.par_iter()
            .map(|j| run_trial(cfg, datasets[j.file].as_ref().expect("job for loaded file"), j))
            .collect()
    });

    let mut rows = Vec::new();
    let mut i = 0;
    while i < jobs.len() {
        let head = &jobs[i];
        let end = i + cfg.trials;
        let data = datasets[head.file].as_ref().expect("job for loaded file");
        let mut cell = Vec::with_capacity(cfg.trials);
        let mut failed = None;
        for r in &results[i..end] {
            match r {
                Ok(t) => cell.push(t.clone()),
                Err(e) => failed = Some(e),
            }
        }
        match failed {
            Some(e) => warn(format!(
                "skipping cell {}:{} t={} length={}: {e:#}",
                data.name,
                cfg.rules[head.rule],
                cfg.t_values[head.t],
                cfg.lengths[head.length]
            )),
            None => rows.push(aggregate(cfg, data, head, &cell)),
        }
        i = end;
    }
    Ok(rows)
}

/// [`run_experiment_with`], printing warnings to stderr.
pub fn run_experiment(cfg: &ExperimentConfig) -> Result<Vec<ResultRow>> {
    run_experiment_with(cfg, |w| eprintln!("warning: {w}"))
}
