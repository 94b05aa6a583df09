use std::ffi::OsString;
use std::fs::File;
use std::io::{self, BufRead, BufReader, BufWriter, Write};
use std::path::{Path, PathBuf};
use std::str::FromStr;

use anyhow::{bail, Context, Result};
use clap::{Args, Parser, Subcommand, ValueEnum};
use streamvote_core::format::{write_stream, StreamHeader};
use streamvote_core::generators::{
    gen_disjointness_approval, gen_disjointness_borda, gen_heavy_hitters, gen_impartial_approval,
    gen_impartial_borda, gen_polarized_approval, GadgetSpec, GadgetVariant,
};
use streamvote_core::streaming::DEFAULT_DELTA;
use streamvote_core::{
    exact_winner, streaming_winner, BallotType, Election, RuleSpec, SamplerChoice, StreamConfig,
    Vote, VoteReader,
};

use crate::experiment::{
    run_experiment, write_csv, ExperimentConfig, GeneratorSpec, SamplerKind,
};

#[derive(Debug, Parser)]
#[command(name = "streamvote", version, about = "Streaming multiwinner elections")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Write a synthetic or gadget vote stream.
    Gen(GenArgs),
    /// Compute a winning committee exactly or with the streaming sampler.
    Solve(SolveArgs),
    /// Run seeded streaming trials against the exact winner and emit CSV.
    Experiment(ExperimentArgs),
}

#[derive(Debug, Args)]
#[command(args_override_self = true)]
pub struct GenArgs {
    #[command(subcommand)]
    pub kind: GenKind,

    /// Output file; standard output when absent.
    #[arg(long, global = true)]
    pub out: Option<PathBuf>,
}

#[derive(Debug, Subcommand)]
pub enum GenKind {
    ImpartialApproval {
        #[arg(long)]
        n: usize,
        #[arg(long)]
        m: usize,
        #[arg(long)]
        p: f64,
        #[arg(long, default_value_t = 0)]
        seed: u64,
    },
    ImpartialBorda {
        #[arg(long)]
        n: usize,
        #[arg(long)]
        m: usize,
        #[arg(long, default_value_t = 0)]
        seed: u64,
    },
    PolarizedApproval {
        #[arg(long)]
        n: usize,
        #[arg(long)]
        m: usize,
        #[arg(long)]
        blocks: usize,
        #[arg(long, default_value_t = 0)]
        seed: u64,
    },
    /// Approval election deciding whether A and B (0-based elements of 0..u) intersect.
    GadgetDisjointnessApproval(GadgetArgs),
    /// Two-voter Borda election deciding whether A and B intersect.
    GadgetDisjointnessBorda(GadgetArgs),
    /// One single-approval voter per item; `--counts 3,1` gives 3 items of type 0 and 1 of type 1.
    HeavyHitters {
        #[arg(long)]
        counts: IndexList,
    },
}

#[derive(Debug, Args)]
pub struct GadgetArgs {
    #[arg(long)]
    pub u: usize,
    #[arg(long = "A", default_value = "")]
    pub a: IndexList,
    #[arg(long = "B", default_value = "")]
    pub b: IndexList,
}

/// Comma-separated non-negative integers; the empty string is the empty list.
#[derive(Clone, Debug, Default, PartialEq, Eq)]
pub struct IndexList(pub Vec<usize>);

impl FromStr for IndexList {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, String> {
        s.split(',')
            .map(str::trim)
            .filter(|t| !t.is_empty())
            .map(|t| t.parse().map_err(|_| format!("invalid index {t:?}")))
            .collect::<Result<_, _>>()
            .map(IndexList)
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum)]
pub enum Mode {
    Exact,
    Stream,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum)]
pub enum SamplerArg {
    Reservoir,
    Bernoulli,
}

impl From<SamplerArg> for SamplerKind {
    fn from(s: SamplerArg) -> Self {
        match s {
            SamplerArg::Reservoir => SamplerKind::Reservoir,
            SamplerArg::Bernoulli => SamplerKind::Bernoulli,
        }
    }
}

#[derive(Debug, Args)]
#[command(args_override_self = true)]
pub struct SolveArgs {
    /// Vote-stream file, or `-` for standard input.
    #[arg(long, default_value = "-")]
    pub input: String,
    /// approval-cc, borda-cc, approval-m or borda-m.
    #[arg(long)]
    pub rule: String,
    #[arg(long)]
    pub k: usize,
    #[arg(long, value_enum, default_value_t = Mode::Exact)]
    pub mode: Mode,
    #[arg(long, default_value_t = 0.1)]
    pub eps: f64,
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
    #[arg(long, value_enum, default_value_t = SamplerArg::Reservoir)]
    pub sampler: SamplerArg,
    #[arg(long, default_value_t = DEFAULT_DELTA)]
    pub delta: f64,
    /// Stream length for the Bernoulli sampler; counted from the file when absent.
    #[arg(long)]
    pub n: Option<usize>,
    /// Override the formula's draw size.
    #[arg(long)]
    pub draw_size: Option<u64>,
    /// Print a JSON report instead of text.
    #[arg(long)]
    pub json: bool,
    #[arg(long)]
    pub out: Option<PathBuf>,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum)]
pub enum GeneratorArg {
    ImpartialApproval,
    ImpartialBorda,
    PolarizedApproval,
}

#[derive(Debug, Args)]
#[command(args_override_self = true)]
pub struct ExperimentArgs {
    #[arg(long)]
    pub rule: String,
    #[arg(long)]
    pub k: usize,
    #[arg(long)]
    pub eps: f64,
    #[arg(long, default_value_t = 50)]
    pub trials: usize,
    #[arg(long, default_value_t = 0)]
    pub seed_base: u64,
    #[arg(long, value_enum)]
    pub generator: GeneratorArg,
    #[arg(long)]
    pub n: usize,
    #[arg(long)]
    pub m: usize,
    /// Approval probability for impartial-approval.
    #[arg(long, default_value_t = 0.3)]
    pub p: f64,
    /// Group count for polarized-approval.
    #[arg(long, default_value_t = 2)]
    pub blocks: usize,
    #[arg(long, value_enum, default_value_t = SamplerArg::Reservoir)]
    pub sampler: SamplerArg,
    #[arg(long, default_value_t = DEFAULT_DELTA)]
    pub delta: f64,
    #[arg(long)]
    pub draw_size: Option<u64>,
    /// Retain every vote (draw size = n).
    #[arg(long)]
    pub full_retention: bool,
    /// Fill the wall_time_ms column; without it the column is 0 and output is reproducible.
    #[arg(long)]
    pub timing: bool,
    #[arg(long)]
    pub out: Option<PathBuf>,
}

impl ExperimentArgs {
    pub fn to_config(&self) -> ExperimentConfig {
        let generator = match self.generator {
            GeneratorArg::ImpartialApproval => GeneratorSpec::ImpartialApproval { p: self.p },
            GeneratorArg::ImpartialBorda => GeneratorSpec::ImpartialBorda,
            GeneratorArg::PolarizedApproval => GeneratorSpec::PolarizedApproval {
                blocks: self.blocks,
            },
        };
        ExperimentConfig {
            rule: self.rule.clone(),
            k: self.k,
            eps: self.eps,
            trials: self.trials,
            seed_base: self.seed_base,
            generator,
            sampler: self.sampler.into(),
            delta: self.delta,
            n: self.n,
            m: self.m,
            draw_size: self.draw_size,
            full_retention: self.full_retention,
            timing: self.timing,
        }
    }
}

/// A usage mistake detected after argument parsing; exits with code 2.
#[derive(Debug, thiserror::Error)]
#[error("{0}")]
pub struct UsageError(pub String);

/// Exit code for an error: 2 for usage and parameter errors, 1 otherwise.
pub fn exit_code(err: &anyhow::Error) -> i32 {
    use streamvote_core::Error as E;
    for cause in err.chain() {
        if cause.is::<UsageError>() {
            return 2;
        }
        if let Some(e) = cause.downcast_ref::<E>() {
            return match e {
                E::Parameter(_) | E::InvalidCommittee(_) | E::InvalidScoreVector(_) => 2,
                _ => 1,
            };
        }
    }
    1
}

/// Replaces `--config FILE` with the `key = value` pairs it holds, inserted
/// right after the subcommand so flags given on the command line win.
/// Blank lines and `#` comments are skipped; `key = true` becomes a bare
/// flag and `key = false` is dropped.
pub fn expand_config(args: Vec<OsString>) -> Result<Vec<OsString>> {
    let Some(pos) = args.iter().position(|a| a == "--config") else {
        return Ok(args);
    };
    let path = args
        .get(pos + 1)
        .ok_or_else(|| UsageError("--config needs a file argument".into()))?;
    let text = std::fs::read_to_string(path)
        .with_context(|| format!("reading config {}", Path::new(path).display()))?;
    let mut injected = Vec::new();
    for (i, line) in text.lines().enumerate() {
        let line = line.trim();
        if line.is_empty() || line.starts_with('#') {
            continue;
        }
        let (key, value) = line
            .split_once('=')
            .ok_or_else(|| UsageError(format!("config line {}: expected key = value", i + 1)))?;
        let key = key.trim().replace('_', "-");
        let value = value.trim();
        match value {
            "true" => injected.push(format!("--{key}").into()),
            "false" => {}
            _ => {
                injected.push(format!("--{key}").into());
                injected.push(value.into());
            }
        }
    }
    let mut out: Vec<OsString> = Vec::with_capacity(args.len() + injected.len());
    out.extend(args[..pos].iter().cloned());
    out.extend(args[pos + 2..].iter().cloned());
    // After the binary name and subcommand; for `gen` also after the kind.
    let mut at = 2.min(out.len());
    if out.get(1).is_some_and(|s| s == "gen") {
        at = 3.min(out.len());
    }
    out.splice(at..at, injected);
    Ok(out)
}

fn open_output(path: Option<&Path>) -> Result<Box<dyn Write>> {
    Ok(match path {
        Some(p) => Box::new(BufWriter::new(
            File::create(p).with_context(|| format!("creating {}", p.display()))?,
        )),
        None => Box::new(BufWriter::new(io::stdout().lock())),
    })
}

fn open_input(input: &str) -> Result<Box<dyn BufRead>> {
    Ok(if input == "-" {
        Box::new(BufReader::new(io::stdin().lock()))
    } else {
        Box::new(BufReader::new(
            File::open(input).with_context(|| format!("opening {input}"))?,
        ))
    })
}

pub fn run(cli: Cli) -> Result<()> {
    match cli.command {
        Command::Gen(args) => cmd_gen(args),
        Command::Solve(args) => cmd_solve(args),
        Command::Experiment(args) => cmd_experiment(args),
    }
}

pub fn cmd_gen(args: GenArgs) -> Result<()> {
    let out = open_output(args.out.as_deref())?;
    let approval = |m| StreamHeader { m, ballot: BallotType::Approval };
    match args.kind {
        GenKind::ImpartialApproval { n, m, p, seed } => {
            check_m(m)?;
            write_stream(out, approval(m), gen_impartial_approval(n, m, p, seed)?)?
        }
        GenKind::ImpartialBorda { n, m, seed } => {
            check_m(m)?;
            let header = StreamHeader { m, ballot: BallotType::Borda };
            write_stream(out, header, gen_impartial_borda(n, m, seed)?)?
        }
        GenKind::PolarizedApproval { n, m, blocks, seed } => {
            check_m(m)?;
            write_stream(out, approval(m), gen_polarized_approval(n, m, blocks, seed)?)?
        }
        GenKind::GadgetDisjointnessApproval(g) => {
            let spec = GadgetSpec::new(g.u, g.a.0, g.b.0, GadgetVariant::ApprovalDisjointness)?;
            write_election(out, gen_disjointness_approval(&spec)?)?
        }
        GenKind::GadgetDisjointnessBorda(g) => {
            let spec = GadgetSpec::new(g.u, g.a.0, g.b.0, GadgetVariant::BordaDisjointness)?;
            write_election(out, gen_disjointness_borda(&spec)?)?
        }
        GenKind::HeavyHitters { counts } => {
            let hh = gen_heavy_hitters(&counts.0)?;
            write_election(out, hh.election)?
        }
    }
    Ok(())
}

fn check_m(m: usize) -> Result<()> {
    if m == 0 {
        bail!(UsageError("--m must be at least 1".into()));
    }
    Ok(())
}

fn write_election(out: impl Write, e: Election) -> io::Result<()> {
    let header = StreamHeader { m: e.m(), ballot: e.ballot_type() };
    write_stream(out, header, e.into_votes())
}

pub fn cmd_solve(args: SolveArgs) -> Result<()> {
    let reader = VoteReader::new(open_input(&args.input)?)?;
    let header = reader.header();
    let rule = RuleSpec::by_name(&args.rule, header.m)?;
    if args.k == 0 || args.k > header.m {
        bail!(streamvote_core::Error::Parameter(format!(
            "k = {} must satisfy 1 <= k <= m = {}",
            args.k, header.m
        )));
    }
    let report = match args.mode {
        Mode::Exact => {
            let votes = reader.collect::<streamvote_core::Result<Vec<Vote>>>()?;
            let election = Election::new(header.m, header.ballot, votes)?;
            let result = exact_winner(&election, &rule, args.k)?;
            serde_json::json!({
                "mode": "exact",
                "rule": rule.name(),
                "k": args.k,
                "m": header.m,
                "n": election.n(),
                "committee": result.first(),
                "score": result.opt_score,
                "winners": result.winners,
            })
        }
        Mode::Stream => {
            let sampler = match args.sampler {
                SamplerArg::Reservoir => SamplerChoice::Reservoir,
                SamplerArg::Bernoulli => {
                    let n = match args.n {
                        Some(n) => n,
                        None => count_votes(&args.input)?,
                    };
                    SamplerChoice::Bernoulli { n, delta: args.delta }
                }
            };
            let cfg = StreamConfig {
                sampler,
                seed: args.seed,
                draw_size_override: args.draw_size,
            };
            let out = streaming_winner(reader, header, &rule, args.k, args.eps, &cfg)?;
            serde_json::json!({
                "mode": "stream",
                "rule": rule.name(),
                "k": args.k,
                "m": header.m,
                "eps": args.eps,
                "committee": out.committee,
                "sample_score": out.sample_score,
                "t": out.params.t,
                "draw_size": out.draw_size,
                "sampler": sampler,
                "stats": out.stats,
            })
        }
    };

    let mut out = open_output(args.out.as_deref())?;
    if args.json {
        serde_json::to_writer_pretty(&mut out, &report)?;
        writeln!(out)?;
    } else {
        write_text_report(&mut out, &report)?;
    }
    out.flush()?;
    Ok(())
}

fn committee_text(v: &serde_json::Value) -> String {
    let members: Vec<String> = v
        .as_array()
        .map(|a| a.iter().map(|c| c.to_string()).collect())
        .unwrap_or_default();
    format!("{{{}}}", members.join(", "))
}

fn write_text_report(out: &mut dyn Write, r: &serde_json::Value) -> Result<()> {
    writeln!(out, "rule: {}  k: {}  m: {}", r["rule"].as_str().unwrap_or(""), r["k"], r["m"])?;
    writeln!(out, "committee: {}", committee_text(&r["committee"]))?;
    if r["mode"] == "exact" {
        writeln!(out, "voters: {}", r["n"])?;
        writeln!(out, "score: {}", r["score"])?;
        let all: Vec<String> = r["winners"]
            .as_array()
            .map(|w| w.iter().map(committee_text).collect())
            .unwrap_or_default();
        writeln!(out, "winners ({} tied): {}", all.len(), all.join(" "))?;
    } else {
        let s = &r["stats"];
        writeln!(out, "sample score: {}", r["sample_score"])?;
        writeln!(out, "eps: {}  t: {}  draw size: {}", r["eps"], r["t"], r["draw_size"])?;
        writeln!(
            out,
            "votes seen: {}  stored: {}  peak stored: {}  stored cells: {}",
            s["votes_seen"], s["votes_stored"], s["peak_stored_votes"], s["stored_ballot_cells"]
        )?;
    }
    Ok(())
}

/// Counts votes with a separate pass over a file, for the Bernoulli sampler.
fn count_votes(input: &str) -> Result<usize> {
    if input == "-" {
        bail!(UsageError(
            "the Bernoulli sampler needs --n when reading standard input".into()
        ));
    }
    let reader = VoteReader::new(open_input(input)?)?;
    let mut n = 0;
    for v in reader {
        v?;
        n += 1;
    }
    Ok(n)
}

pub fn cmd_experiment(args: ExperimentArgs) -> Result<()> {
    let cfg = args.to_config();
    let report = run_experiment(&cfg)?;
    let out = open_output(args.out.as_deref())?;
    write_csv(&report, out)?;
    if args.out.is_some() {
        eprintln!(
            "{} trials, success rate {}, mean peak stored votes {}",
            report.records.len(),
            report.success_rate,
            report.mean_peak_stored_votes
        );
    }
    Ok(())
}

/// Parses `argv` (including `--config` expansion) and runs the command,
/// returning the process exit code.
pub fn main_with_args(argv: Vec<OsString>) -> i32 {
    let argv = match expand_config(argv) {
        Ok(a) => a,
        Err(e) => {
            eprintln!("error: {e:#}");
            return exit_code(&e);
        }
    };
    let cli = match Cli::try_parse_from(argv) {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            return if e.use_stderr() { 2 } else { 0 };
        }
    };
    match run(cli) {
        Ok(()) => 0,
        Err(e) => {
            eprintln!("error: {e:#}");
            exit_code(&e)
        }
    }
}
