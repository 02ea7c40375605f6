mod codec_io;
mod config;

use std::fs;
use std::io::{self, Read, Write};
use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};
use num_bigint::BigUint;
use pragrate::approximations::achievability_constant;
use pragrate::limits::{length_distribution, optimal_rate_log2, OptimalRate};
use pragrate::report;
use pragrate::types::{entropy_slab_count, low_entropy_count, type_count};
use pragrate::{
    converse_constants, decode, encode, ladder_row, CodeMode, CodeOrdering, Codeword, NType,
    OrderingMode, RateLadder, SourcePmf,
};
use serde::Serialize;

use crate::codec_io::Header;
use crate::config::{parse_list, Format, NSpec, RunConfig, SourceSpec};

/// Failure classes, one per exit code.
#[derive(Debug)]
pub enum Failure {
    Input(String),
    Resource(String),
    Internal(String),
}

impl Failure {
    fn exit_code(&self) -> u8 {
        match self {
            Failure::Input(_) => 2,
            Failure::Resource(_) => 3,
            Failure::Internal(_) => 4,
        }
    }
}

impl std::fmt::Display for Failure {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            Failure::Input(m) => write!(f, "invalid input: {m}"),
            Failure::Resource(m) => write!(f, "resource limit: {m}"),
            Failure::Internal(m) => write!(f, "internal error: {m}"),
        }
    }
}

impl From<pragrate::Error> for Failure {
    fn from(e: pragrate::Error) -> Self {
        use pragrate::Error::*;
        match e {
            Resource(_) => Failure::Resource(e.to_string()),
            Internal(_) => Failure::Internal(e.to_string()),
            _ => Failure::Input(e.to_string()),
        }
    }
}

type CliResult<T> = Result<T, Failure>;

#[derive(Parser)]
#[command(
    name = "pragrate",
    version,
    about = "Finite-blocklength limits of almost-lossless compression"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Args, Clone, Default)]
struct Common {
    /// Source pmf: `0.2,0.8`, a JSON array, or a file holding either.
    #[arg(long)]
    source: Option<String>,
    /// Block length(s): `50`, `10,20`, `a..b` or `a..b:step`.
    #[arg(long)]
    n: Option<String>,
    /// Excess-rate probabilities, comma separated.
    #[arg(long)]
    eps: Option<String>,
    /// Exponents in bits, comma separated; eps = 2^(-n delta).
    #[arg(long)]
    delta: Option<String>,
    /// Fundamental limit reported: one-to-one or prefix.
    #[arg(long, value_parser = parse_code_mode)]
    mode: Option<CodeMode>,
    #[arg(long, value_enum)]
    format: Option<Format>,
    /// Largest number of types to enumerate for exact computations.
    #[arg(long)]
    cap_types: Option<u64>,
    /// JSON run configuration; flags override its fields.
    #[arg(long)]
    config: Option<PathBuf>,
}

fn parse_code_mode(s: &str) -> Result<CodeMode, String> {
    match s {
        "one-to-one" => Ok(CodeMode::OneToOne),
        "prefix" => Ok(CodeMode::Prefix),
        _ => Err(format!("expected one-to-one or prefix, got {s:?}")),
    }
}

impl Common {
    fn resolve(&self) -> CliResult<RunConfig> {
        let mut c = match &self.config {
            Some(p) => RunConfig::load(p)?,
            None => RunConfig::default(),
        };
        if let Some(s) = &self.source {
            c.source = Some(SourceSpec::Text(s.clone()));
        }
        if let Some(n) = &self.n {
            c.n = Some(NSpec::Text(n.clone()));
        }
        if let Some(e) = &self.eps {
            c.eps = Some(parse_list(e)?);
            if self.delta.is_none() {
                c.delta = None;
            }
        }
        if let Some(d) = &self.delta {
            c.delta = Some(parse_list(d)?);
            if self.eps.is_none() {
                c.eps = None;
            }
        }
        c.mode = self.mode.or(c.mode);
        c.format = self.format.or(c.format);
        c.cap_types = self.cap_types.or(c.cap_types);
        Ok(c)
    }
}

#[derive(Subcommand)]
enum Command {
    /// Exact limit and its approximations for each (n, eps).
    Ladder(Common),
    /// Achievability and converse constants as JSON.
    Constants(Common),
    /// Low-entropy string counts over a range of n.
    Census {
        #[command(flatten)]
        common: Common,
        /// Alphabet size; defaults to the source's.
        #[arg(long)]
        m: Option<usize>,
        /// Entropy threshold in bits; defaults to H(source).
        #[arg(long)]
        h: Option<f64>,
    },
    /// Exact optimal rates for each (n, eps).
    Limits(Common),
    /// One-to-one encoder and decoder.
    Codec {
        #[command(subcommand)]
        op: CodecOp,
    },
}

#[derive(Args)]
struct CodecArgs {
    /// Source pmf; required by the known-source code, ignored by the universal one.
    #[arg(long)]
    source: Option<String>,
    /// Block length; defaults to the length of the first input string.
    #[arg(long)]
    n: Option<u32>,
    /// known-source or universal.
    #[arg(long, default_value = "universal")]
    mode: String,
    #[arg(long)]
    cap_types: Option<u64>,
    /// Symbols of the alphabet in order, e.g. `ab`.
    #[arg(long)]
    alphabet: Option<String>,
    /// Input file; standard input when absent.
    #[arg(long)]
    input: Option<PathBuf>,
    /// Output file; standard output when absent.
    #[arg(long)]
    output: Option<PathBuf>,
}

#[derive(Subcommand)]
enum CodecOp {
    /// Encode one string per line.
    Encode {
        #[command(flatten)]
        args: CodecArgs,
        /// Emit per-string lengths and empirical entropies as CSV instead.
        #[arg(long)]
        audit: bool,
    },
    /// Decode a codeword file.
    Decode {
        #[command(flatten)]
        args: CodecArgs,
    },
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(cli.command) {
        Ok(out) => {
            let mut stdout = io::stdout().lock();
            if let Err(e) = stdout.write_all(out.as_bytes()) {
                eprintln!("error: {e}");
                return ExitCode::from(4);
            }
            ExitCode::SUCCESS
        }
        Err(f) => {
            eprintln!("error: {f}");
            ExitCode::from(f.exit_code())
        }
    }
}

fn run(cmd: Command) -> CliResult<String> {
    match cmd {
        Command::Ladder(c) => cmd_ladder(&c.resolve()?),
        Command::Constants(c) => cmd_constants(&c.resolve()?),
        Command::Census { common, m, h } => cmd_census(&common.resolve()?, m, h),
        Command::Limits(c) => cmd_limits(&c.resolve()?),
        Command::Codec { op } => cmd_codec(op),
    }
}

fn to_json<T: Serialize + ?Sized>(v: &T) -> CliResult<String> {
    serde_json::to_string_pretty(v)
        .map(|s| s + "\n")
        .map_err(|e| Failure::Internal(e.to_string()))
}

fn within_cap(n: u32, m: usize, cap: u64) -> bool {
    type_count(n, m) <= BigUint::from(cap)
}

fn cmd_ladder(c: &RunConfig) -> CliResult<String> {
    let p = c.source()?;
    let ns = c.ns()?;
    let targets = c.targets()?;
    let mode = c.mode.unwrap_or_default();
    let mut rows: Vec<RateLadder> = Vec::new();
    for &n in &ns {
        let feasible = within_cap(n, p.alphabet_size(), c.cap());
        let dist = if feasible {
            Some(length_distribution(&p, n)?)
        } else {
            None
        };
        for (eps, _) in targets.at(n)? {
            let mut row = ladder_row(&p, n, eps, mode, dist.as_ref(), false)?;
            if !feasible {
                row.notes
                    .push(format!("exact: more than {} types at n = {n}", c.cap()));
            }
            rows.push(row);
        }
    }
    let mut notes: Vec<String> = Vec::new();
    if ns.len() > 1 && matches!(targets, config::Targets::Epsilon(_)) {
        notes.push("epsilon is fixed across n, so delta varies per row".into());
    }
    for r in &rows {
        for note in &r.notes {
            let line = format!("n={} eps={}: {note}", r.n, r.epsilon);
            if !notes.contains(&line) {
                notes.push(line);
            }
        }
    }
    Ok(match c.format.unwrap_or_default() {
        Format::Json => to_json(&rows)?,
        Format::Csv => {
            for note in &notes {
                eprintln!("note: {note}");
            }
            report::ladder_csv(&rows)
        }
        Format::Markdown => {
            let mut out = report::ladder_markdown(&rows);
            for note in &notes {
                out.push_str(&format!("\nNote: {note}"));
            }
            if !notes.is_empty() {
                out.push('\n');
            }
            out
        }
    })
}

#[derive(Serialize)]
struct ConstantsReport {
    delta: f64,
    n: Option<u32>,
    achievability_c: f64,
    converse: pragrate::ConverseConstants,
}

fn cmd_constants(c: &RunConfig) -> CliResult<String> {
    let p = c.source()?;
    let deltas: Vec<(Option<u32>, f64)> = match c.targets()? {
        config::Targets::Delta(d) => d.into_iter().map(|d| (None, d)).collect(),
        t @ config::Targets::Epsilon(_) => {
            let mut v = Vec::new();
            for n in c.ns()? {
                v.extend(t.at(n)?.into_iter().map(|(_, d)| (Some(n), d)));
            }
            v
        }
    };
    let reports = deltas
        .into_iter()
        .map(|(n, delta)| {
            Ok(ConstantsReport {
                delta,
                n,
                achievability_c: achievability_constant(&p, delta)?,
                converse: converse_constants(&p, delta)?,
            })
        })
        .collect::<CliResult<Vec<_>>>()?;
    if reports.len() == 1 {
        to_json(&reports[0])
    } else {
        to_json(&reports)
    }
}

#[derive(Serialize)]
struct CensusRow {
    #[serde(flatten)]
    report: pragrate::CensusReport,
    slab_count: u64,
}

fn cmd_census(c: &RunConfig, m: Option<usize>, h: Option<f64>) -> CliResult<String> {
    let source = match &c.source {
        Some(_) => Some(c.source()?),
        None => None,
    };
    let m = m
        .or(source.as_ref().map(|p| p.alphabet_size()))
        .ok_or_else(|| Failure::Input("census needs --m or --source".into()))?;
    let h = h
        .or(source.as_ref().map(|p| p.entropy()))
        .ok_or_else(|| Failure::Input("census needs --h or --source".into()))?;
    let mut rows = Vec::new();
    for n in c.ns()? {
        if !within_cap(n, m, c.cap()) {
            eprintln!(
                "warning: sweep truncated at n = {n}: more than {} types",
                c.cap()
            );
            break;
        }
        rows.push(CensusRow {
            report: low_entropy_count(n, m, h)?,
            slab_count: entropy_slab_count(n, m, h)?,
        });
    }
    Ok(match c.format.unwrap_or_default() {
        Format::Json => to_json(&rows)?,
        _ => report::census_csv(&rows.into_iter().map(|r| r.report).collect::<Vec<_>>()),
    })
}

#[derive(Serialize)]
struct LimitRow {
    epsilon: f64,
    delta: f64,
    mode: CodeMode,
    #[serde(flatten)]
    rate: OptimalRate,
}

fn cmd_limits(c: &RunConfig) -> CliResult<String> {
    let p = c.source()?;
    let targets = c.targets()?;
    let mode = c.mode.unwrap_or_default();
    let mut rows = Vec::new();
    for n in c.ns()? {
        if !within_cap(n, p.alphabet_size(), c.cap()) {
            return Err(Failure::Resource(format!(
                "more than {} types at n = {n}",
                c.cap()
            )));
        }
        for (eps, delta) in targets.at(n)? {
            let mut rate = optimal_rate_log2(&p, n, eps.log2())?;
            if mode == CodeMode::Prefix {
                rate.rate = pragrate::approximations::prefix_adjust(rate.rate, n);
            }
            rows.push(LimitRow {
                epsilon: eps,
                delta,
                mode,
                rate,
            });
        }
    }
    Ok(match c.format.unwrap_or_default() {
        Format::Json => to_json(&rows)?,
        _ => report::limits_csv(
            &rows
                .into_iter()
                .map(|r| (r.epsilon, r.rate))
                .collect::<Vec<_>>(),
        ),
    })
}

fn read_input(path: &Option<PathBuf>) -> CliResult<String> {
    match path {
        Some(p) => fs::read_to_string(p)
            .map_err(|e| Failure::Input(format!("cannot read {}: {e}", p.display()))),
        None => {
            let mut s = String::new();
            io::stdin()
                .read_to_string(&mut s)
                .map_err(|e| Failure::Input(format!("cannot read standard input: {e}")))?;
            Ok(s)
        }
    }
}

impl CodecArgs {
    fn source(&self) -> CliResult<Option<SourcePmf>> {
        self.source
            .as_ref()
            .map(|s| SourceSpec::Text(s.clone()).resolve())
            .transpose()
    }

    fn cap(&self) -> u64 {
        self.cap_types.unwrap_or(pragrate::types::DEFAULT_TYPE_CAP)
    }
}

fn default_alphabet(m: usize) -> CliResult<Vec<char>> {
    if m > 26 {
        return Err(Failure::Input(
            "give --alphabet for alphabets larger than 26".into(),
        ));
    }
    Ok((b'a'..b'a' + m as u8).map(char::from).collect())
}

fn cmd_codec(op: CodecOp) -> CliResult<String> {
    match op {
        CodecOp::Encode { args, audit } => {
            let mode: OrderingMode = args.mode.parse()?;
            let cap = args.cap();
            let source = args.source()?;
            let alphabet: Option<Vec<char>> = args.alphabet.as_ref().map(|a| a.chars().collect());
            let m = match (&alphabet, &source) {
                (Some(a), _) => a.len(),
                (None, Some(p)) => p.alphabet_size(),
                (None, None) => {
                    return Err(Failure::Input("codec needs --alphabet or --source".into()))
                }
            };
            let alphabet = match alphabet {
                Some(a) => a,
                None => default_alphabet(m)?,
            };
            if let Some(p) = &source {
                if mode == OrderingMode::KnownSource && p.alphabet_size() != m {
                    return Err(Failure::Input(
                        "alphabet size disagrees with the source".into(),
                    ));
                }
            }
            let input = read_input(&args.input)?;
            let strings: Vec<Vec<u8>> = input
                .lines()
                .map(|l| codec_io::symbols(&alphabet, l.trim_end_matches('\r')))
                .collect::<CliResult<_>>()?;
            let n = match (args.n, strings.first()) {
                (Some(n), _) => n,
                (None, Some(s)) => s.len() as u32,
                (None, None) => {
                    return Err(Failure::Input("no strings to encode and no --n".into()))
                }
            };
            if !within_cap(n, m, cap) {
                return Err(Failure::Resource(format!(
                    "more than {cap} types at n = {n}"
                )));
            }
            let ordering = CodeOrdering::new(mode, source.as_ref(), n, Some(m))?;
            let codewords = strings
                .iter()
                .map(|x| encode(&ordering, x).map_err(Failure::from))
                .collect::<CliResult<Vec<_>>>()?;
            if audit {
                return Ok(audit_csv(&alphabet, &strings, &codewords, m));
            }
            let header = Header {
                mode,
                m,
                n,
                alphabet,
                source: (mode == OrderingMode::KnownSource).then(|| source.unwrap()),
                count: codewords.len(),
            };
            emit(&args.output, codec_io::write_file(&header, &codewords))
        }
        CodecOp::Decode { args } => {
            let cap = args.cap();
            let (header, codewords) = codec_io::read_file(&read_input(&args.input)?)?;
            let source = match args.source()? {
                Some(p) => Some(p),
                None => header.source.clone(),
            };
            if !within_cap(header.n, header.m, cap) {
                return Err(Failure::Resource(format!(
                    "more than {cap} types at n = {}",
                    header.n
                )));
            }
            let ordering =
                CodeOrdering::new(header.mode, source.as_ref(), header.n, Some(header.m))?;
            let mut out = String::new();
            for cw in &codewords {
                out.push_str(&codec_io::chars(&header.alphabet, &decode(&ordering, cw)?));
                out.push('\n');
            }
            emit(&args.output, out)
        }
    }
}

fn audit_csv(alphabet: &[char], strings: &[Vec<u8>], codewords: &[Codeword], m: usize) -> String {
    let mut out = String::from("string,index,length,empirical_entropy,neg_log2_ml_prob\n");
    for (x, c) in strings.iter().zip(codewords) {
        let t = NType::of_string(x, m).expect("validated symbols");
        let h = t.entropy();
        out.push_str(&format!(
            "{},{},{},{:.9},{:.9}\n",
            codec_io::chars(alphabet, x),
            c.index(),
            c.len(),
            h,
            h * x.len() as f64
        ));
    }
    out
}

fn emit(path: &Option<PathBuf>, text: String) -> CliResult<String> {
    match path {
        Some(p) => {
            fs::write(p, text)
                .map_err(|e| Failure::Input(format!("cannot write {}: {e}", p.display())))?;
            Ok(String::new())
        }
        None => Ok(text),
    }
}
