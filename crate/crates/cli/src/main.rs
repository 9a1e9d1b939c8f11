//! `beepmis` command-line interface.
//!
//! Exit codes: 0 success, 1 usage or parse error, 2 run hit its round cap,
//! 3 verification failed.

use std::fs;
use std::io::{self, Write};
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use anyhow::{bail, Context, Result};
use beepmis::engine::{run, RunConfig};
use beepmis::experiment::{
    run_experiment, run_lowerbound, Execution, ExperimentSpec, Family, GraphSpec,
};
use beepmis::graph::write_edge_list;
use beepmis::metrics::{reference_curves, summarize_by_n, write_csv, TrialRecord};
use beepmis::policy::Policy;
use beepmis::verify::{check_mis, parse_node_set, write_node_set, Witness};
use clap::{Args, Parser, Subcommand};

const EXIT_USAGE: u8 = 1;
const EXIT_NOT_TERMINATED: u8 = 2;
const EXIT_VERIFY_FAILED: u8 = 3;

/// Sizes used by the reproduction presets.
const PRESET_SIZES: [usize; 7] = [16, 32, 64, 128, 256, 512, 1024];

#[derive(Parser, Debug)]
#[command(name = "beepmis", version, about = "Beeping-model MIS simulator")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Run the protocol once and print a summary line.
    Run(RunArgs),
    /// Run many seeded trials and write one CSV row per trial.
    Experiment(ExperimentArgs),
    /// Compare policies on clique-family graphs.
    Lowerbound(LowerboundArgs),
    /// Check that a node set is a maximal independent set.
    Verify(VerifyArgs),
    /// Write a generated graph in edge-list format.
    Generate(GenerateArgs),
    /// Rounds on G(n, 1/2), feedback and sweep, 100 trials per n.
    #[command(name = "reproduce-fig3")]
    ReproduceFig3(PresetArgs),
    /// Beeps per node on G(n, 1/2) and square grids, 200 trials per n.
    #[command(name = "reproduce-fig5")]
    ReproduceFig5(PresetArgs),
}

#[derive(Args, Debug)]
struct SeedArg {
    /// Master seed; falls back to $BEEPMIS_SEED, then 1.
    #[arg(long, env = "BEEPMIS_SEED", default_value_t = 1)]
    seed: u64,
}

#[derive(Args, Debug)]
struct RunArgs {
    /// er:<n>,<p> | grid:<r>,<c> | clique:<d> | cliquefam:<m> | path:<n> | file:<path>
    #[arg(long)]
    graph: String,
    /// feedback | feedback:f=<x>,init=<x>,cap=<x> | sweep | const:<p>
    #[arg(long, default_value = "feedback")]
    policy: String,
    #[command(flatten)]
    seed: SeedArg,
    /// Round cap; defaults to 64*ceil(log2(n+2))^2 + 64.
    #[arg(long)]
    max_rounds: Option<u64>,
    /// Write the MIS, one index per line ("-" for stdout).
    #[arg(long)]
    dump_mis: Option<PathBuf>,
    /// Print every round's beepers, joiners and deactivations.
    #[arg(long)]
    trace: bool,
}

#[derive(Args, Debug)]
struct OutputArgs {
    /// CSV destination; stdout when absent.
    #[arg(long, short)]
    output: Option<PathBuf>,
    /// Worker threads; 0 uses every core, 1 runs sequentially.
    #[arg(long, default_value_t = 0)]
    jobs: usize,
}

impl OutputArgs {
    fn execution(&self) -> Execution {
        match self.jobs {
            0 => Execution::Parallel,
            1 => Execution::Sequential,
            n => Execution::ParallelJobs(n),
        }
    }
}

#[derive(Args, Debug)]
struct ExperimentArgs {
    #[arg(long, default_value = "feedback")]
    policy: String,
    /// er:<p> | grid | clique | cliquefam | path | file:<path>
    #[arg(long)]
    family: String,
    /// Comma-separated sizes (for cliquefam, the number of clique sizes m).
    #[arg(long, value_delimiter = ',', required = true)]
    n: Vec<usize>,
    #[arg(long, default_value_t = 100)]
    trials: u64,
    #[command(flatten)]
    seed: SeedArg,
    #[arg(long)]
    max_rounds: Option<u64>,
    #[command(flatten)]
    out: OutputArgs,
}

#[derive(Args, Debug)]
struct LowerboundArgs {
    #[arg(long, value_delimiter = ',', default_value = "4,6,8,10")]
    m: Vec<usize>,
    #[arg(long, value_delimiter = ',', default_value = "feedback,sweep")]
    policies: Vec<String>,
    #[arg(long, default_value_t = 100)]
    trials: u64,
    #[command(flatten)]
    seed: SeedArg,
    #[arg(long)]
    max_rounds: Option<u64>,
    #[command(flatten)]
    out: OutputArgs,
}

#[derive(Args, Debug)]
struct VerifyArgs {
    /// Edge-list file.
    #[arg(long)]
    graph: PathBuf,
    /// Node set file, one index per line.
    #[arg(long)]
    set: PathBuf,
}

#[derive(Args, Debug)]
struct GenerateArgs {
    #[arg(long)]
    graph: String,
    #[command(flatten)]
    seed: SeedArg,
    #[arg(long, short)]
    output: Option<PathBuf>,
}

#[derive(Args, Debug)]
struct PresetArgs {
    #[command(flatten)]
    seed: SeedArg,
    /// Override the sizes (default 16,32,...,1024).
    #[arg(long, value_delimiter = ',')]
    n: Option<Vec<usize>>,
    /// Override the trial count.
    #[arg(long)]
    trials: Option<u64>,
    #[command(flatten)]
    out: OutputArgs,
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(err) => {
            let _ = err.print();
            return if err.use_stderr() {
                ExitCode::from(EXIT_USAGE)
            } else {
                ExitCode::SUCCESS
            };
        }
    };
    match dispatch(cli.command) {
        Ok(code) => code,
        Err(err) => {
            eprintln!("error: {err:#}");
            ExitCode::from(EXIT_USAGE)
        }
    }
}

fn dispatch(command: Command) -> Result<ExitCode> {
    match command {
        Command::Run(args) => cmd_run(args),
        Command::Experiment(args) => cmd_experiment(args),
        Command::Lowerbound(args) => cmd_lowerbound(args),
        Command::Verify(args) => cmd_verify(args),
        Command::Generate(args) => cmd_generate(args),
        Command::ReproduceFig3(args) => cmd_reproduce(args, Figure::Rounds),
        Command::ReproduceFig5(args) => cmd_reproduce(args, Figure::Beeps),
    }
}

fn parse_policy(s: &str) -> Result<Policy> {
    s.parse::<Policy>()
        .with_context(|| format!("bad policy {s:?}"))
}

fn join(items: &[usize]) -> String {
    items
        .iter()
        .map(ToString::to_string)
        .collect::<Vec<_>>()
        .join(",")
}

fn cmd_run(args: RunArgs) -> Result<ExitCode> {
    let policy = parse_policy(&args.policy)?;
    let spec: GraphSpec = args.graph.parse()?;
    let seed = args.seed.seed;
    let graph = spec.build(seed)?;
    if args.max_rounds == Some(0) {
        bail!("--max-rounds must be positive");
    }
    let config = RunConfig {
        max_rounds: args.max_rounds,
        record_trace: args.trace,
    };
    let result = run(&graph, &policy, seed, config);

    let stdout = io::stdout();
    let mut out = stdout.lock();
    writeln!(
        out,
        "policy={policy} n={} edges={} seed={seed} terminated={} rounds={} total_beeps={} beeps_per_node={} mis_size={}",
        graph.node_count(),
        graph.edge_count(),
        result.terminated,
        result.rounds,
        result.total_beeps,
        beepmis::metrics::format_float(result.beeps_per_node()),
        result.mis.len()
    )?;
    if let Some(trace) = &result.trace {
        for (i, round) in trace.iter().enumerate() {
            writeln!(
                out,
                "round {}: beeped=[{}] joined=[{}] inactive=[{}]",
                i + 1,
                join(&round.beeped),
                join(&round.joined_mis),
                join(&round.newly_inactive)
            )?;
        }
    }
    if let Some(path) = &args.dump_mis {
        let text = write_node_set(&result.mis);
        if path == Path::new("-") {
            out.write_all(text.as_bytes())?;
        } else {
            fs::write(path, text).with_context(|| format!("writing {}", path.display()))?;
        }
    }
    Ok(if result.terminated {
        ExitCode::SUCCESS
    } else {
        ExitCode::from(EXIT_NOT_TERMINATED)
    })
}

/// Writes CSV to the output path (summary to stdout) or to stdout (summary
/// to stderr).
fn emit(records: &[TrialRecord], out: &OutputArgs) -> Result<()> {
    match &out.output {
        Some(path) => {
            let file = fs::File::create(path)
                .with_context(|| format!("cannot write {}", path.display()))?;
            write_csv(io::BufWriter::new(file), records)
                .with_context(|| format!("writing {}", path.display()))?;
            print_summary(&mut io::stdout().lock(), records)?;
        }
        None => {
            write_csv(io::stdout().lock(), records)?;
            print_summary(&mut io::stderr().lock(), records)?;
        }
    }
    Ok(())
}

fn print_summary(w: &mut impl Write, records: &[TrialRecord]) -> io::Result<()> {
    // (policy, family) groups in order of first appearance
    let mut groups: Vec<(&str, &str)> = Vec::new();
    for r in records {
        let key = (r.policy.as_str(), r.graph.as_str());
        if !groups.contains(&key) {
            groups.push(key);
        }
    }
    for (policy, graph) in groups {
        let subset: Vec<TrialRecord> = records
            .iter()
            .filter(|r| r.policy == policy && r.graph == graph)
            .cloned()
            .collect();
        for g in summarize_by_n(&subset) {
            let rounds = match g.rounds {
                Some(s) => format!("{:.2} ± {:.2} [{}, {}]", s.mean, s.stddev, s.min, s.max),
                None => "-".to_string(),
            };
            let reference = reference_curves(g.n)
                .map(|c| format!("2.5log2n={:.2} log2^2n={:.2}", c.scaled, c.log2n_squared))
                .unwrap_or_default();
            writeln!(
                w,
                "{policy:<10} {graph:<9} n={:<6} trials={:<4} non_terminated={:<3} rounds={rounds} beeps/node={:.3} ± {:.3} {reference}",
                g.n, g.trials, g.non_terminated, g.beeps_per_node.mean, g.beeps_per_node.stddev,
            )?;
        }
    }
    Ok(())
}

fn cmd_experiment(args: ExperimentArgs) -> Result<ExitCode> {
    let family: Family = args.family.parse()?;
    let spec = ExperimentSpec {
        policy: parse_policy(&args.policy)?,
        family,
        n_values: args.n,
        trials: args.trials,
        master_seed: args.seed.seed,
        max_rounds: args.max_rounds,
    };
    let records = run_experiment(&spec, args.out.execution())?;
    emit(&records, &args.out)?;
    Ok(ExitCode::SUCCESS)
}

fn cmd_lowerbound(args: LowerboundArgs) -> Result<ExitCode> {
    let policies = args
        .policies
        .iter()
        .map(|p| parse_policy(p))
        .collect::<Result<Vec<_>>>()?;
    let records = run_lowerbound(
        &args.m,
        &policies,
        args.trials,
        args.seed.seed,
        args.max_rounds,
        args.out.execution(),
    )?;
    emit(&records, &args.out)?;
    Ok(ExitCode::SUCCESS)
}

fn cmd_verify(args: VerifyArgs) -> Result<ExitCode> {
    let graph = beepmis::experiment::load_edge_list(&args.graph)?;
    let text =
        fs::read_to_string(&args.set).with_context(|| format!("reading {}", args.set.display()))?;
    let set = parse_node_set(&text).with_context(|| format!("in {}", args.set.display()))?;
    let report = check_mis(&graph, &set)?;
    match report.witness {
        None => {
            let mut distinct = set;
            distinct.sort_unstable();
            distinct.dedup();
            println!("ok: maximal independent set of size {}", distinct.len());
            Ok(ExitCode::SUCCESS)
        }
        Some(Witness::Edge(u, v)) => {
            println!("not independent: edge ({u},{v})");
            Ok(ExitCode::from(EXIT_VERIFY_FAILED))
        }
        Some(Witness::Addable(v)) => {
            println!("not maximal: vertex {v} addable");
            Ok(ExitCode::from(EXIT_VERIFY_FAILED))
        }
    }
}

fn cmd_generate(args: GenerateArgs) -> Result<ExitCode> {
    let spec: GraphSpec = args.graph.parse()?;
    let text = write_edge_list(&spec.build(args.seed.seed)?);
    match &args.output {
        Some(path) => {
            fs::write(path, text).with_context(|| format!("writing {}", path.display()))?
        }
        None => io::stdout().lock().write_all(text.as_bytes())?,
    }
    Ok(ExitCode::SUCCESS)
}

#[derive(Clone, Copy)]
enum Figure {
    Rounds,
    Beeps,
}

fn cmd_reproduce(args: PresetArgs, figure: Figure) -> Result<ExitCode> {
    let n_values = args.n.unwrap_or_else(|| PRESET_SIZES.to_vec());
    let (trials, runs): (u64, Vec<(Policy, Family)>) = match figure {
        Figure::Rounds => (
            100,
            vec![
                (Policy::feedback(), Family::ErdosRenyi(0.5)),
                (Policy::GlobalSweep, Family::ErdosRenyi(0.5)),
            ],
        ),
        Figure::Beeps => (
            200,
            vec![
                (Policy::feedback(), Family::ErdosRenyi(0.5)),
                (Policy::feedback(), Family::SquareGrid),
                (Policy::GlobalSweep, Family::ErdosRenyi(0.5)),
            ],
        ),
    };
    let trials = args.trials.unwrap_or(trials);
    let mut records = Vec::new();
    for (policy, family) in runs {
        let spec = ExperimentSpec {
            policy,
            family,
            n_values: n_values.clone(),
            trials,
            master_seed: args.seed.seed,
            max_rounds: None,
        };
        records.extend(run_experiment(&spec, args.out.execution())?);
    }
    emit(&records, &args.out)?;
    Ok(ExitCode::SUCCESS)
}
