//! Command-line front end for the synchronizing-coloring census.

use std::fs;
use std::io::{self, Write};
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};
use serde_json::json;

use sync_census::analysis::{is_strongly_connected, period, sink_reduction, SccDecomposition};
use sync_census::census::{census_with, CensusMode, CensusOptions, DEFAULT_AUTOMATA_BUDGET};
use sync_census::digraph::{format_digraph, parse_digraph};
use sync_census::enumerate::{EnumerationMode, DEFAULT_CANDIDATE_BUDGET};
use sync_census::experiments::{
    class_survey, random_experiment, write_gaps_csv, write_random_csv, write_table1_csv,
    write_table2_csv, ClassFilter, ClassSurvey, RandomModelConfig, RandomReport, SurveyOptions,
    DEFAULT_REJECTION_CAP,
};
use sync_census::families::FamilySpec;
use sync_census::runs::{run_enumeration, run_random, run_survey, RunOptions, RunOutcome};
use sync_census::{Digraph, Error};

#[derive(Parser)]
#[command(
    name = "sync-census",
    version,
    about = "Exact census of synchronizing colorings"
)]
struct Cli {
    #[command(flatten)]
    global: Global,
    #[command(subcommand)]
    command: Command,
}

#[derive(Args)]
struct Global {
    /// Worker threads.
    #[arg(long, global = true, env = "SYNC_CENSUS_WORKERS", default_value_t = 1,
          value_parser = clap::value_parser!(u16).range(1..))]
    workers: u16,
    /// Maximum number of distinct automata per digraph census.
    #[arg(long, global = true, default_value_t = DEFAULT_AUTOMATA_BUDGET)]
    budget_automata: u128,
    /// Maximum number of labeled tables scanned by direct enumeration.
    #[arg(long, global = true, default_value_t = DEFAULT_CANDIDATE_BUDGET)]
    budget_candidates: u128,
    #[arg(long, global = true, value_enum)]
    format: Option<Format>,
    /// Random seed.
    #[arg(long, global = true, default_value_t = 0)]
    seed: u64,
    /// Output file (construct) or run directory (enumerate, stats, gaps, random).
    #[arg(long, global = true)]
    out: Option<PathBuf>,
}

#[derive(Clone, Copy, PartialEq, Eq, ValueEnum)]
enum Format {
    Csv,
    Json,
    Jsonl,
}

#[derive(Clone, Copy, ValueEnum)]
enum ModeArg {
    Full,
    SymmetryReduced,
}

#[derive(Clone, Copy, ValueEnum)]
enum EnumModeArg {
    Seeded,
    Direct,
}

impl From<EnumModeArg> for EnumerationMode {
    fn from(m: EnumModeArg) -> Self {
        match m {
            EnumModeArg::Seeded => EnumerationMode::Seeded,
            EnumModeArg::Direct => EnumerationMode::Direct,
        }
    }
}

#[derive(Clone, Copy, ValueEnum)]
enum FamilyArg {
    Cerny,
    G30,
    Gnk,
    Hdnk,
}

#[derive(Clone, Copy, ValueEnum)]
enum FilterArg {
    All,
    ScAperiodic,
}

#[derive(Args)]
struct RunArgs {
    #[arg(long)]
    n: usize,
    #[arg(long)]
    k: usize,
    #[arg(long, value_enum, default_value = "seeded")]
    mode: EnumModeArg,
    /// Seeds (or class members in direct mode) per checkpoint chunk.
    #[arg(long)]
    chunk_size: Option<u64>,
    /// Stop after this many chunks; rerun to resume.
    #[arg(long, hide = true)]
    max_chunks: Option<usize>,
}

#[derive(Subcommand)]
enum Command {
    /// Structural report on a digraph file.
    Check { file: PathBuf },
    /// Synchronizing ratio of a digraph file, as JSON.
    Ratio {
        file: PathBuf,
        #[arg(long, value_enum, default_value = "symmetry-reduced")]
        mode: ModeArg,
    },
    /// Build a digraph from a parametric family.
    Construct {
        #[arg(value_enum)]
        family: FamilyArg,
        #[arg(long)]
        d: Option<usize>,
        #[arg(long)]
        n: Option<usize>,
        #[arg(long)]
        k: Option<usize>,
        /// Compare the census ratio to the closed form.
        #[arg(long)]
        self_check: bool,
    },
    /// Stream nonisomorphic primitive digraphs with their census.
    Enumerate(RunArgs),
    /// Minimum, average and standard deviation of synchronizing colorings.
    Stats(RunArgs),
    /// Histogram of synchronizing-coloring counts and its gaps.
    Gaps(RunArgs),
    /// Census statistics over uniformly random digraphs.
    Random {
        #[arg(long)]
        n: usize,
        #[arg(long)]
        k: usize,
        #[arg(long, default_value_t = 10_000)]
        samples: u64,
        #[arg(long, value_enum, default_value = "all")]
        filter: FilterArg,
        #[arg(long, default_value_t = DEFAULT_REJECTION_CAP)]
        rejection_cap: u64,
        #[arg(long)]
        chunk_size: Option<u64>,
        #[arg(long, hide = true)]
        max_chunks: Option<usize>,
    },
}

enum Failure {
    SelfCheck(String),
    Lib(Error),
}

impl From<Error> for Failure {
    fn from(e: Error) -> Self {
        Failure::Lib(e)
    }
}

impl From<io::Error> for Failure {
    fn from(e: io::Error) -> Self {
        Failure::Lib(e.into())
    }
}

impl From<serde_json::Error> for Failure {
    fn from(e: serde_json::Error) -> Self {
        Failure::Lib(e.into())
    }
}

type Outcome = Result<(), Failure>;

fn exit_code(e: &Error) -> u8 {
    match e {
        Error::Budget { .. } | Error::RejectionCap { .. } | Error::Overflow(_) => 3,
        Error::Parse { .. } | Error::Invalid(_) | Error::Domain(_) | Error::SizeLimit { .. } => 2,
        _ => 1,
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(cli.global.workers as usize)
        .build()
        .expect("thread pool");
    let result = pool.install(|| run(&cli));
    match result {
        Ok(()) => ExitCode::SUCCESS,
        Err(Failure::SelfCheck(msg)) => {
            eprintln!("self-check failed: {msg}");
            ExitCode::from(1)
        }
        Err(Failure::Lib(e)) => {
            eprintln!("error: {e}");
            ExitCode::from(exit_code(&e))
        }
    }
}

fn run(cli: &Cli) -> Outcome {
    let g = &cli.global;
    let census = CensusOptions {
        mode: CensusMode::SymmetryReduced,
        budget: g.budget_automata,
    };
    match &cli.command {
        Command::Check { file } => check(g, &read_digraph(file)?),
        Command::Ratio { file, mode } => {
            let opts = CensusOptions {
                mode: match mode {
                    ModeArg::Full => CensusMode::Full,
                    ModeArg::SymmetryReduced => CensusMode::SymmetryReduced,
                },
                ..census
            };
            let c = census_with(&read_digraph(file)?, &opts)?;
            println!("{}", serde_json::to_string_pretty(&c)?);
            Ok(())
        }
        Command::Construct {
            family,
            d,
            n,
            k,
            self_check,
        } => construct(g, *family, *d, *n, *k, *self_check, &census),
        Command::Enumerate(args) => enumerate(g, args, &census),
        Command::Stats(args) => stats(g, args, &census, false),
        Command::Gaps(args) => stats(g, args, &census, true),
        Command::Random {
            n,
            k,
            samples,
            filter,
            rejection_cap,
            chunk_size,
            max_chunks,
        } => {
            let cfg = RandomModelConfig {
                rejection_cap: *rejection_cap,
                ..RandomModelConfig::new(
                    *n,
                    *k,
                    *samples,
                    g.seed,
                    match filter {
                        FilterArg::All => ClassFilter::All,
                        FilterArg::ScAperiodic => ClassFilter::StronglyConnectedAperiodic,
                    },
                )
            };
            random(g, &cfg, &census, *chunk_size, *max_chunks)
        }
    }
}

fn read_digraph(path: &Path) -> Result<Digraph, Failure> {
    Ok(parse_digraph(&fs::read_to_string(path)?)?)
}

fn check(g: &Global, d: &Digraph) -> Outcome {
    let scc = SccDecomposition::new(d);
    let strongly = is_strongly_connected(d);
    let per = if strongly { Some(period(d)?) } else { None };
    let aperiodic = per == Some(1);
    let sink = sink_reduction(d);
    if g.format == Some(Format::Json) {
        let report = json!({
            "valid": true,
            "n": d.n(),
            "k": d.k(),
            "strongly_connected": strongly,
            "period": per,
            "aperiodic": aperiodic,
            "primitive": strongly && aperiodic,
            "components": scc.len(),
            "sink_components": scc.sinks.len(),
            "sink_vertices": sink.as_ref().map(|s| s.vertex_map.clone()),
        });
        println!("{}", serde_json::to_string_pretty(&report)?);
        return Ok(());
    }
    let mut out = io::stdout().lock();
    writeln!(out, "valid: true")?;
    writeln!(out, "vertices: {}", d.n())?;
    writeln!(out, "out-degree: {}", d.k())?;
    writeln!(out, "strongly connected: {strongly}")?;
    match per {
        Some(p) => writeln!(out, "period: {p}")?,
        None => writeln!(out, "period: undefined")?,
    }
    writeln!(out, "aperiodic: {aperiodic}")?;
    writeln!(out, "primitive: {}", strongly && aperiodic)?;
    writeln!(out, "components: {}", scc.len())?;
    match &sink {
        Some(s) => {
            let vs: Vec<String> = s.vertex_map.iter().map(|v| (v + 1).to_string()).collect();
            writeln!(
                out,
                "sink component: {} vertices [{}]",
                vs.len(),
                vs.join(" ")
            )?;
        }
        None => writeln!(
            out,
            "sink component: none unique ({} sinks)",
            scc.sinks.len()
        )?,
    }
    Ok(())
}

fn need(value: Option<usize>, name: &str, family: &str) -> Result<usize, Failure> {
    value.ok_or_else(|| Failure::Lib(Error::Domain(format!("{family} needs --{name}"))))
}

fn construct(
    g: &Global,
    family: FamilyArg,
    d: Option<usize>,
    n: Option<usize>,
    k: Option<usize>,
    self_check: bool,
    census: &CensusOptions,
) -> Outcome {
    let spec = match family {
        FamilyArg::Cerny => FamilySpec::Cerny {
            n: need(n, "n", "cerny")?,
        },
        FamilyArg::G30 => FamilySpec::G30,
        FamilyArg::Gnk => FamilySpec::Gnk {
            n: need(n, "n", "gnk")?,
            k: need(k, "k", "gnk")?,
        },
        FamilyArg::Hdnk => FamilySpec::Hdnk {
            d: need(d, "d", "hdnk")?,
            n: need(n, "n", "hdnk")?,
            k: need(k, "k", "hdnk")?,
        },
    };
    let digraph = spec.build()?;
    let text = format_digraph(&digraph);
    match &g.out {
        Some(path) => fs::write(path, &text)?,
        None => print!("{text}"),
    }
    if self_check {
        let r = spec.self_check(census)?;
        let got = format!("{}/{}", r.census.ratio.numer(), r.census.ratio.denom());
        let want = format!("{}/{}", r.expected.numer(), r.expected.denom());
        if !r.passed {
            return Err(Failure::SelfCheck(format!(
                "{spec}: ratio {got}, expected {want}"
            )));
        }
        eprintln!("self-check passed: {spec} ratio {got}");
    }
    Ok(())
}

fn run_options(
    g: &Global,
    census: &CensusOptions,
    chunk_size: Option<u64>,
    max_chunks: Option<usize>,
) -> RunOptions {
    RunOptions {
        chunk_size: chunk_size.unwrap_or(0),
        census: *census,
        candidate_budget: g.budget_candidates,
        max_chunks,
        workers: g.workers as usize,
    }
}

fn interrupted(done: usize, total: usize) -> Outcome {
    eprintln!("checkpoint: {done} of {total} chunks done; rerun the same command to resume");
    Ok(())
}

fn enumerate(g: &Global, args: &RunArgs, census: &CensusOptions) -> Outcome {
    if matches!(g.format, Some(Format::Csv) | Some(Format::Json)) {
        return Err(Error::Domain("enumerate writes JSONL only".into()).into());
    }
    let dir = g
        .out
        .clone()
        .unwrap_or_else(|| PathBuf::from(format!("enumerate-n{}-k{}", args.n, args.k)));
    let opts = run_options(g, census, args.chunk_size, args.max_chunks);
    match run_enumeration(&dir, args.n, args.k, args.mode.into(), &opts)? {
        RunOutcome::Complete(s) => {
            println!(
                "{} digraphs, {} totally synchronizing -> {}",
                s.records,
                s.totally_sync,
                s.path.display()
            );
            Ok(())
        }
        RunOutcome::Interrupted { done, total } => interrupted(done, total),
    }
}

fn write_file(dir: Option<&Path>, name: &str, bytes: &[u8]) -> Outcome {
    io::stdout().write_all(bytes)?;
    if let Some(dir) = dir {
        fs::write(dir.join(name), bytes)?;
    }
    Ok(())
}

fn stats(g: &Global, args: &RunArgs, census: &CensusOptions, gaps: bool) -> Outcome {
    let survey: ClassSurvey = match &g.out {
        Some(dir) => {
            let opts = run_options(g, census, args.chunk_size, args.max_chunks);
            match run_survey(dir, args.n, args.k, args.mode.into(), &opts)? {
                RunOutcome::Complete(s) => s,
                RunOutcome::Interrupted { done, total } => return interrupted(done, total),
            }
        }
        None => class_survey(
            args.n,
            args.k,
            &SurveyOptions {
                mode: args.mode.into(),
                candidate_budget: g.budget_candidates,
                census: *census,
            },
        )?,
    };
    let dir = g.out.as_deref();
    match (g.format.unwrap_or(Format::Csv), gaps) {
        (Format::Csv, false) => {
            let mut t1 = Vec::new();
            write_table1_csv(&mut t1, std::slice::from_ref(&survey.stats))?;
            let mut t2 = Vec::new();
            write_table2_csv(&mut t2, &[survey.stats.table2_row()])?;
            write_file(dir, "table1.csv", &t1)?;
            write_file(dir, "table2.csv", &t2)
        }
        (Format::Csv, true) => {
            let mut buf = Vec::new();
            write_gaps_csv(&mut buf, std::slice::from_ref(&survey.gaps))?;
            write_file(dir, "gaps.csv", &buf)
        }
        (_, false) => {
            let mut buf = serde_json::to_vec_pretty(&survey.stats)?;
            buf.push(b'\n');
            write_file(dir, "stats.json", &buf)
        }
        (_, true) => {
            let mut buf = serde_json::to_vec_pretty(&survey.gaps)?;
            buf.push(b'\n');
            write_file(dir, "gaps.json", &buf)
        }
    }
}

fn random(
    g: &Global,
    cfg: &RandomModelConfig,
    census: &CensusOptions,
    chunk_size: Option<u64>,
    max_chunks: Option<usize>,
) -> Outcome {
    let report: RandomReport = match &g.out {
        Some(dir) => match run_random(dir, cfg, &run_options(g, census, chunk_size, max_chunks))? {
            RunOutcome::Complete(r) => r,
            RunOutcome::Interrupted { done, total } => return interrupted(done, total),
        },
        None => random_experiment(cfg, census)?,
    };
    if matches!(g.format, Some(Format::Json) | Some(Format::Jsonl)) {
        let mut buf = serde_json::to_vec_pretty(&report)?;
        buf.push(b'\n');
        io::stdout().write_all(&buf)?;
        return Ok(());
    }
    let mut buf = Vec::new();
    write_random_csv(&mut buf, std::slice::from_ref(&report))?;
    write_file(g.out.as_deref(), "random.csv", &buf)
}
