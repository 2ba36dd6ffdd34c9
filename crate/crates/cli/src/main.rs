use std::fs;
use std::path::{Path, PathBuf};
use std::process::ExitCode;
use std::time::Duration;

use anyhow::{anyhow, Context};
use clap::{Parser, Subcommand, ValueEnum};
use pvote::preflib::{
    parse_election_file, profile_of, serialize, to_election, truncation_stats, RawProfile,
    TruncationStats,
};
use pvote::reductions::{
    gen_3sat_to_subsetsum, gen_partition_to_copeland, gen_partition_to_mbc,
    gen_subsetsum_to_borda_av, CnfFormula, PartitionInstance, SubsetSumPairsInstance,
};
use pvote::{
    copeland_scores_with, exact_min_coalition, greedy_copeland, manipulate_round_up,
    pairwise_matrix, stv_winner, weighted_coalition_copeland_dp, weighted_coalition_scoring_dp,
    CandidateId, Coalition, ManipulationProblem, ManipulationResult, Outcome, Rule,
    RuleSpec, TieBreakPolicy,
};
use pvote_cli::harness::{self, ExperimentConfig};

#[derive(Parser)]
#[command(name = "pvote", version, about = "Elections with top-truncated ballots")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Winner and score table of an election file.
    Evaluate {
        file: PathBuf,
        /// borda-roundup, borda-rounddown, borda-average, plurality-<scheme>,
        /// shifted, modified-borda, stv, copeland, copeland-half
        #[arg(long)]
        rule: RuleSpec,
        /// Candidate (1-based) that wins ties; otherwise the lowest number wins.
        #[arg(long)]
        favored: Option<usize>,
    },
    /// Strategic ballots that make a candidate win.
    Manipulate {
        file: PathBuf,
        #[arg(long)]
        rule: RuleSpec,
        /// Candidate to elect (1-based).
        #[arg(long)]
        preferred: usize,
        /// Number of unit-weight manipulators; with the exact solver, the
        /// largest coalition tried.
        #[arg(long, conflicts_with = "weights")]
        coalition: Option<usize>,
        /// Manipulator weights, comma separated.
        #[arg(long, value_delimiter = ',')]
        weights: Option<Vec<u64>>,
        /// Longest ballot a manipulator may cast (default: all candidates).
        #[arg(long)]
        length: Option<usize>,
        #[arg(long, value_enum, default_value_t = Solver::Auto)]
        solver: Solver,
        #[arg(long, default_value_t = 10_000)]
        timeout_ms: u64,
    },
    /// Builds a manipulation instance from a number problem.
    Reduce {
        #[arg(value_enum)]
        construction: Construction,
        /// Numbers, comma separated.
        #[arg(long, value_delimiter = ',')]
        bag: Option<Vec<u64>>,
        /// Target sum for subsetsum-borda-av.
        #[arg(long)]
        target: Option<u64>,
        /// Clauses for 3sat-subsetsum: `1,-2,3;2,3,-1` (DIMACS literals).
        #[arg(long)]
        cnf: Option<String>,
        /// Variable count for 3sat-subsetsum (default: largest variable used).
        #[arg(long)]
        vars: Option<usize>,
        /// Write election.soi and weights.txt here instead of printing.
        #[arg(long)]
        out_dir: Option<PathBuf>,
    },
    /// Ballot-length statistics.
    Stats {
        file: PathBuf,
        #[arg(long)]
        csv: bool,
    },
    /// Runs an experiment config and prints CSV.
    Experiment {
        config: PathBuf,
        #[arg(long)]
        threads: Option<usize>,
        /// Leave the time column blank.
        #[arg(long)]
        no_time: bool,
        #[arg(long)]
        output: Option<PathBuf>,
    },
}

#[derive(Clone, Copy, ValueEnum)]
enum Solver {
    /// Weighted DP for weights, exact search otherwise.
    Auto,
    Exact,
    Greedy,
    RoundUp,
    Dp,
}

#[derive(Clone, Copy, ValueEnum)]
enum Construction {
    PartitionMbc,
    PartitionCopeland,
    SubsetsumBordaAv,
    #[value(name = "3sat-subsetsum")]
    SatSubsetsum,
}

enum Failure {
    /// Exit status 2: bad arguments or unreadable input.
    Usage(anyhow::Error),
    /// Exit status 1: valid input, but the request could not be carried out.
    Domain(anyhow::Error),
}

fn usage<E: Into<anyhow::Error>>(e: E) -> Failure {
    Failure::Usage(e.into())
}

fn domain<E: Into<anyhow::Error>>(e: E) -> Failure {
    Failure::Domain(e.into())
}

type CliResult = Result<ExitCode, Failure>;

fn main() -> ExitCode {
    let cli = Cli::parse();
    let result = match cli.command {
        Command::Evaluate { file, rule, favored } => evaluate(&file, rule, favored),
        Command::Manipulate {
            file,
            rule,
            preferred,
            coalition,
            weights,
            length,
            solver,
            timeout_ms,
        } => manipulate(
            &file,
            rule,
            preferred,
            coalition,
            weights,
            length,
            solver,
            Duration::from_millis(timeout_ms),
        ),
        Command::Reduce {
            construction,
            bag,
            target,
            cnf,
            vars,
            out_dir,
        } => reduce(construction, bag, target, cnf, vars, out_dir),
        Command::Stats { file, csv } => stats(&file, csv),
        Command::Experiment {
            config,
            threads,
            no_time,
            output,
        } => experiment(&config, threads, no_time, output),
    };
    match result {
        Ok(code) => code,
        Err(Failure::Usage(e)) => {
            eprintln!("error: {e:#}");
            ExitCode::from(2)
        }
        Err(Failure::Domain(e)) => {
            eprintln!("error: {e:#}");
            ExitCode::from(1)
        }
    }
}

fn load(path: &Path) -> Result<RawProfile, Failure> {
    let text = fs::read_to_string(path)
        .with_context(|| format!("cannot read {}", path.display()))
        .map_err(usage)?;
    parse_election_file(&text)
        .with_context(|| format!("in {}", path.display()))
        .map_err(usage)
}

fn candidate(n: usize, m: usize, what: &str) -> Result<CandidateId, Failure> {
    if n == 0 || n > m {
        return Err(usage(anyhow!("{what} {n} is not in 1..={m}")));
    }
    Ok(CandidateId(n - 1))
}

fn name(profile: &RawProfile, c: CandidateId) -> String {
    format!("{} ({})", c.0 + 1, profile.candidates[c.0])
}

fn evaluate(file: &Path, spec: RuleSpec, favored: Option<usize>) -> CliResult {
    let profile = load(file)?;
    let m = profile.num_candidates();
    let mut policy = TieBreakPolicy::index_order();
    if let Some(f) = favored {
        policy = TieBreakPolicy::favoring(candidate(f, m, "favored candidate")?);
    }
    let election = to_election(&profile, policy).map_err(usage)?;
    let rule = spec.instantiate(m);
    println!("rule: {spec}");
    match &rule {
        Rule::Scoring(r) => {
            let (w, table) = r.evaluate(&election).map_err(domain)?;
            println!("winner: {}", name(&profile, w));
            println!("scores:");
            for c in election.candidates() {
                println!("  {}: {}", name(&profile, c), table.score(c));
            }
        }
        Rule::Copeland(reading) => {
            let w = rule.winner(&election).map_err(domain)?;
            let scores = copeland_scores_with(&pairwise_matrix(&election), *reading);
            println!("winner: {}", name(&profile, w));
            println!("scores:");
            for c in election.candidates() {
                println!("  {}: {}", name(&profile, c), scores.score(c));
            }
        }
        Rule::Stv => {
            let (w, trace) = stv_winner(&election);
            println!("winner: {}", name(&profile, w));
            print!("{trace}");
        }
    }
    Ok(ExitCode::SUCCESS)
}

#[allow(clippy::too_many_arguments)]
fn manipulate(
    file: &Path,
    spec: RuleSpec,
    preferred: usize,
    coalition: Option<usize>,
    weights: Option<Vec<u64>>,
    length: Option<usize>,
    solver: Solver,
    timeout: Duration,
) -> CliResult {
    let profile = load(file)?;
    let m = profile.num_candidates();
    let p = candidate(preferred, m, "preferred candidate")?;
    let election = to_election(&profile, TieBreakPolicy::index_order()).map_err(usage)?;
    let rule = spec.instantiate(m);
    let coalition_spec = match (&weights, coalition) {
        (Some(w), _) => Coalition::Weighted(w.clone()),
        (None, Some(n)) => Coalition::Unweighted(n),
        (None, None) => Coalition::Unweighted(harness::DEFAULT_COALITION_LIMIT),
    };
    let problem = ManipulationProblem::new(
        election,
        p,
        rule.clone(),
        coalition_spec.clone(),
        length.unwrap_or(m),
    )
    .map_err(usage)?;

    let solver = match solver {
        Solver::Auto if weights.is_some() => Solver::Dp,
        Solver::Auto => Solver::Exact,
        s => s,
    };
    let result: ManipulationResult = match solver {
        Solver::Exact => {
            let Coalition::Unweighted(limit) = coalition_spec else {
                return Err(usage(anyhow!("the exact solver takes --coalition, not --weights")));
            };
            exact_min_coalition(&problem, limit, Some(timeout)).map_err(domain)?
        }
        Solver::Greedy => greedy_copeland(&problem).map_err(domain)?,
        Solver::RoundUp => manipulate_round_up(&problem).map_err(domain)?,
        Solver::Dp => match rule {
            Rule::Copeland(_) => weighted_coalition_copeland_dp(&problem).map_err(domain)?,
            Rule::Scoring(_) => weighted_coalition_scoring_dp(&problem).map_err(domain)?,
            Rule::Stv => return Err(domain(anyhow!("no weighted solver for STV"))),
        },
        Solver::Auto => unreachable!("resolved above"),
    };

    match &result.outcome {
        Outcome::Success(ballots) => {
            println!("result: success");
            println!("coalition: {}", ballots.len());
            for b in ballots {
                println!("{b}");
            }
            Ok(ExitCode::SUCCESS)
        }
        Outcome::Impossible => {
            println!("result: impossible");
            if result.stats.lower_bound > 0 {
                println!("no coalition smaller than {} works", result.stats.lower_bound);
            }
            Ok(ExitCode::SUCCESS)
        }
        Outcome::Timeout => {
            println!("result: timeout");
            println!("no coalition smaller than {} works", result.stats.lower_bound);
            Ok(ExitCode::from(1))
        }
    }
}

fn parse_cnf(text: &str, vars: Option<usize>) -> anyhow::Result<CnfFormula> {
    let clauses: Vec<Vec<i64>> = text
        .split(';')
        .map(str::trim)
        .filter(|c| !c.is_empty())
        .map(|c| {
            c.split(',')
                .map(|x| x.trim().parse::<i64>().with_context(|| format!("bad literal `{x}`")))
                .collect()
        })
        .collect::<anyhow::Result<_>>()?;
    let used = clauses.iter().flatten().map(|x| x.unsigned_abs() as usize).max().unwrap_or(0);
    Ok(CnfFormula::from_dimacs(vars.unwrap_or(used), &clauses)?)
}

fn emit_instance(problem: &ManipulationProblem, out_dir: Option<PathBuf>) -> CliResult {
    let election_text = serialize(&profile_of(problem.fixed()));
    let weights: Vec<String> = problem.coalition().weights().iter().map(u64::to_string).collect();
    let weights = weights.join(",");
    match out_dir {
        Some(dir) => {
            fs::create_dir_all(&dir).map_err(domain)?;
            fs::write(dir.join("election.soi"), &election_text).map_err(domain)?;
            fs::write(dir.join("weights.txt"), format!("{weights}\n")).map_err(domain)?;
            println!("wrote {} and {}", dir.join("election.soi").display(), dir.join("weights.txt").display());
        }
        None => {
            print!("{election_text}");
            println!("# preferred: {}", problem.preferred().0 + 1);
            println!("# weights: {weights}");
        }
    }
    Ok(ExitCode::SUCCESS)
}

fn reduce(
    construction: Construction,
    bag: Option<Vec<u64>>,
    target: Option<u64>,
    cnf: Option<String>,
    vars: Option<usize>,
    out_dir: Option<PathBuf>,
) -> CliResult {
    let need_bag = || bag.clone().ok_or_else(|| usage(anyhow!("--bag is required")));
    match construction {
        Construction::PartitionMbc | Construction::PartitionCopeland => {
            let inst = PartitionInstance::new(need_bag()?).map_err(usage)?;
            let problem = match construction {
                Construction::PartitionMbc => gen_partition_to_mbc(&inst),
                _ => gen_partition_to_copeland(&inst),
            }
            .map_err(domain)?;
            emit_instance(&problem, out_dir)
        }
        Construction::SubsetsumBordaAv => {
            let t1 = target.ok_or_else(|| usage(anyhow!("--target is required")))?;
            let inst = SubsetSumPairsInstance::from_values(&need_bag()?, t1).map_err(usage)?;
            let problem = gen_subsetsum_to_borda_av(&inst).map_err(domain)?;
            emit_instance(&problem, out_dir)
        }
        Construction::SatSubsetsum => {
            let text = cnf.ok_or_else(|| usage(anyhow!("--cnf is required")))?;
            let f = parse_cnf(&text, vars).map_err(usage)?;
            let enc = gen_3sat_to_subsetsum(&f);
            let bag: Vec<String> = enc.bag.iter().map(|x| x.to_string()).collect();
            let text = format!("bag: {}\ntarget: {}\n", bag.join(","), enc.target);
            match out_dir {
                Some(dir) => {
                    fs::create_dir_all(&dir).map_err(domain)?;
                    fs::write(dir.join("subsetsum.txt"), text).map_err(domain)?;
                }
                None => print!("{text}"),
            }
            Ok(ExitCode::SUCCESS)
        }
    }
}

fn stats(file: &Path, csv: bool) -> CliResult {
    let profile = load(file)?;
    let s: TruncationStats = truncation_stats(&profile).map_err(domain)?;
    if csv {
        println!("{}", TruncationStats::CSV_HEADER);
        println!("{}", s.csv_row());
    } else {
        println!("{s}");
    }
    Ok(ExitCode::SUCCESS)
}

fn experiment(
    config: &Path,
    threads: Option<usize>,
    no_time: bool,
    output: Option<PathBuf>,
) -> CliResult {
    let mut cfg = ExperimentConfig::from_file(config).map_err(usage)?;
    if threads.is_some() {
        cfg.threads = threads;
    }
    if no_time {
        cfg.report_time = false;
    }
    cfg.validate().map_err(usage)?;
    let rows = harness::run_experiment(&cfg).map_err(domain)?;
    let csv = harness::to_csv(&rows).map_err(domain)?;
    match output {
        Some(path) => fs::write(&path, csv)
            .with_context(|| format!("cannot write {}", path.display()))
            .map_err(domain)?,
        None => print!("{csv}"),
    }
    Ok(ExitCode::SUCCESS)
}
