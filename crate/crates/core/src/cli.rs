//! The `qkdsec` command-line frontend.

use std::ffi::OsString;
use std::fmt::Write as _;
use std::io::Write as _;
use std::path::PathBuf;

use clap::{ArgGroup, Args, Parser, Subcommand, ValueEnum};
use serde::{Deserialize, Serialize};

use crate::analyzers::{b92_rate_depolarizing, bell_rate, threshold, Protocol, RateReport, ThresholdReport};
use crate::bounds::BoundReport;
use crate::cinfo::{renyi_entropy, smooth_renyi, Order, ProbDist};
use crate::engine::{eve_distance_exact, run_protocol, AttackModel, ProtocolConfig, SamplingPath, Transcript};
use crate::error::{Error, Result};
use crate::qcore::{bell_diagonal_state, q_entropy, DensityOperator};
use crate::randkit::parse_seed;
use crate::suites::{run_suite, Suite, SuiteOptions};

/// Environment variable consulted when `--seed` is absent.
pub const SEED_ENV: &str = "QKDSEC_SEED";

pub const EXIT_OK: i32 = 0;
pub const EXIT_VIOLATION: i32 = 1;
pub const EXIT_USAGE: i32 = 2;

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum Format {
    Json,
    Csv,
    Table,
}

#[derive(Debug, Parser)]
#[command(name = "qkdsec", version, about = "Key rates, thresholds, protocol simulation and bound verification for QKD")]
pub struct Cli {
    #[arg(long, global = true, value_enum, default_value_t = Format::Table)]
    pub format: Format,
    /// Write output here instead of standard output.
    #[arg(long, global = true)]
    pub out: Option<PathBuf>,
    /// Master seed, decimal or 0x-hex. Defaults to $QKDSEC_SEED, then 0.
    #[arg(long, global = true, value_parser = seed_arg)]
    pub seed: Option<u64>,
    #[command(subcommand)]
    pub command: Command,
}

fn seed_arg(s: &str) -> std::result::Result<u64, String> {
    parse_seed(s).map_err(|e| e.to_string())
}

fn protocol_arg(s: &str) -> std::result::Result<Protocol, String> {
    s.parse().map_err(|e: Error| e.to_string())
}

fn order_arg(s: &str) -> std::result::Result<Order, String> {
    s.parse().map_err(|e: Error| e.to_string())
}

fn suite_arg(s: &str) -> std::result::Result<Suite, String> {
    s.parse().map_err(|e: Error| e.to_string())
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Asymptotic key rate for given noise (sweeps as start:stop:step).
    Rate(RateArgs),
    /// Noise level at which the rate vanishes.
    Threshold(ThresholdArgs),
    /// Run the protocol once and emit its transcript.
    Simulate(SimulateArgs),
    /// Run a verification suite; exits 1 if any bound is violated.
    Verify(VerifyArgs),
    /// Rényi entropy of a distribution or density operator.
    Entropy(EntropyArgs),
}

#[derive(Debug, Args)]
#[command(group(ArgGroup::new("noise").required(true).args(["qber", "depol"])))]
pub struct RateArgs {
    #[arg(long, value_parser = protocol_arg)]
    pub protocol: Protocol,
    /// Bit error rate (bb84, six-state).
    #[arg(long)]
    pub qber: Option<String>,
    /// Depolarizing probability; for bb84 and six-state the error rate is 2p/3.
    #[arg(long)]
    pub depol: Option<String>,
    /// B92 signal amplitude.
    #[arg(long, default_value_t = 0.38)]
    pub alpha: f64,
    /// Subtract Eve's entropy conditioned on the error pattern.
    #[arg(long)]
    pub conditioned: bool,
}

#[derive(Debug, Args)]
pub struct ThresholdArgs {
    #[arg(long, value_parser = protocol_arg)]
    pub protocol: Protocol,
    #[arg(long)]
    pub conditioned: bool,
}

#[derive(Debug, Args)]
#[command(group(ArgGroup::new("attack_source").required(true).args(["lambdas", "depol", "attack", "config"])))]
pub struct SimulateArgs {
    #[arg(long, value_parser = protocol_arg, required_unless_present = "config")]
    pub protocol: Option<Protocol>,
    #[arg(long, required_unless_present = "config")]
    pub n: Option<usize>,
    /// Bell-diagonal attack weights λ1,λ2,λ3,λ4.
    #[arg(long, value_delimiter = ',')]
    pub lambdas: Option<Vec<f64>>,
    /// Depolarizing channel with probability p.
    #[arg(long)]
    pub depol: Option<f64>,
    /// Attack model as JSON.
    #[arg(long)]
    pub attack: Option<PathBuf>,
    /// Full protocol configuration as JSON; other protocol flags are ignored.
    #[arg(long)]
    pub config: Option<PathBuf>,
    #[arg(long)]
    pub sampling_rate: Option<f64>,
    /// B92 signal amplitude.
    #[arg(long)]
    pub b92_alpha: Option<f64>,
    /// Use the unconditioned entropy bound.
    #[arg(long)]
    pub basic: bool,
    /// Sample outcomes from the measurement statistics instead of Pauli labels.
    #[arg(long)]
    pub povm: bool,
    /// Keep Eve's purification and report the exact key distance (n ≤ 6).
    #[arg(long)]
    pub exact_eve: bool,
    #[arg(long)]
    pub key_length: Option<usize>,
    /// Fixed number of syndrome bits.
    #[arg(long)]
    pub ir_bits: Option<usize>,
    #[arg(long)]
    pub verify_bits: Option<usize>,
    /// Smoothing parameter used for ε, ε′ and ε″.
    #[arg(long)]
    pub eps: Option<f64>,
}

#[derive(Debug, Args)]
pub struct VerifyArgs {
    #[arg(long, value_parser = suite_arg, default_value = "all")]
    pub suite: Suite,
    #[arg(long, default_value_t = 1000)]
    pub trials: usize,
}

#[derive(Debug, Args)]
#[command(group(ArgGroup::new("source").required(true).args(["input", "dist", "bell"])))]
pub struct EntropyArgs {
    /// JSON file ("-" for stdin): a probability list, a distribution, a
    /// density operator, or {"bell_diagonal": [..]}.
    #[arg(long)]
    pub input: Option<PathBuf>,
    #[arg(long, value_delimiter = ',')]
    pub dist: Option<Vec<f64>>,
    #[arg(long, value_delimiter = ',')]
    pub bell: Option<Vec<f64>>,
    /// Rényi order: a non-negative number or "inf".
    #[arg(long, value_parser = order_arg, default_value = "1")]
    pub alpha: Order,
    #[arg(long, default_value_t = 0.0)]
    pub eps: f64,
}

/// Accepted shapes of an entropy input.
#[derive(Debug, Clone, Deserialize)]
#[serde(untagged)]
pub enum EntropyInput {
    Probs(Vec<f64>),
    Dist(ProbDist),
    Density(DensityOperator),
    Bell { bell_diagonal: [f64; 4] },
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EntropyReport {
    pub kind: String,
    pub order: String,
    pub eps: f64,
    pub entropy: f64,
}

/// Summary of a simulation, printed in table and csv form.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SimulationSummary {
    pub protocol: Protocol,
    pub n: usize,
    pub seed: u64,
    pub aborted: bool,
    pub abort_reason: Option<String>,
    pub n_prime: usize,
    pub r_prime: Option<usize>,
    pub s_prime: usize,
    pub keys_agree: bool,
    pub eve_distance: Option<f64>,
    pub eve_bound: Option<f64>,
}

/// A rendered result: JSON text plus a flat table.
struct Rendered {
    json: String,
    headers: Vec<&'static str>,
    rows: Vec<Vec<Cell>>,
}

enum Cell {
    Num(f64),
    Int(i64),
    Text(String),
    Empty,
}

impl From<f64> for Cell {
    fn from(x: f64) -> Self {
        Cell::Num(x)
    }
}

impl From<Option<f64>> for Cell {
    fn from(x: Option<f64>) -> Self {
        x.map_or(Cell::Empty, Cell::Num)
    }
}

impl From<usize> for Cell {
    fn from(x: usize) -> Self {
        Cell::Int(x as i64)
    }
}

impl From<bool> for Cell {
    fn from(x: bool) -> Self {
        Cell::Text(x.to_string())
    }
}

impl From<&str> for Cell {
    fn from(x: &str) -> Self {
        Cell::Text(x.to_string())
    }
}

impl From<String> for Cell {
    fn from(x: String) -> Self {
        Cell::Text(x)
    }
}

/// Six significant digits.
pub fn sig6(x: f64) -> String {
    if x == 0.0 {
        return "0".into();
    }
    if !x.is_finite() {
        return x.to_string();
    }
    let exp = x.abs().log10().floor() as i32;
    if (-4..6).contains(&exp) {
        format!("{:.*}", (5 - exp).max(0) as usize, x)
    } else {
        format!("{x:.5e}")
    }
}

impl Cell {
    fn table(&self) -> String {
        match self {
            Cell::Num(x) => sig6(x + 0.0),
            Cell::Int(i) => i.to_string(),
            Cell::Text(s) => s.clone(),
            Cell::Empty => "-".into(),
        }
    }

    fn csv(&self) -> String {
        match self {
            Cell::Num(x) => format!("{:?}", x + 0.0),
            Cell::Int(i) => i.to_string(),
            Cell::Text(s) if s.contains([',', '"', '\n']) => format!("\"{}\"", s.replace('"', "\"\"")),
            Cell::Text(s) => s.clone(),
            Cell::Empty => String::new(),
        }
    }
}

impl Rendered {
    fn format(&self, format: Format) -> String {
        match format {
            Format::Json => format!("{}\n", self.json),
            Format::Csv => {
                let mut out = self.headers.join(",");
                out.push('\n');
                for row in &self.rows {
                    out.push_str(&row.iter().map(Cell::csv).collect::<Vec<_>>().join(","));
                    out.push('\n');
                }
                out
            }
            Format::Table => {
                let cells: Vec<Vec<String>> = self.rows.iter().map(|r| r.iter().map(Cell::table).collect()).collect();
                let widths: Vec<usize> = self
                    .headers
                    .iter()
                    .enumerate()
                    .map(|(i, h)| cells.iter().map(|r| r[i].chars().count()).chain([h.len()]).max().unwrap_or(0))
                    .collect();
                let mut out = String::new();
                let line = |out: &mut String, items: Vec<&str>| {
                    let padded: Vec<String> =
                        items.iter().zip(&widths).map(|(s, w)| format!("{s:<w$}", w = *w)).collect();
                    let _ = writeln!(out, "{}", padded.join("  ").trim_end());
                };
                line(&mut out, self.headers.clone());
                for row in &cells {
                    line(&mut out, row.iter().map(String::as_str).collect());
                }
                out
            }
        }
    }
}

fn to_json<T: Serialize>(value: &T) -> Result<String> {
    serde_json::to_string_pretty(value).map_err(|e| Error::Parse(e.to_string()))
}

/// Values of `start:stop:step` (stop included within step/2) or a single number.
pub fn parse_sweep(text: &str) -> Result<Vec<f64>> {
    let num = |s: &str| s.trim().parse::<f64>().map_err(|_| Error::Parse(format!("bad number {s:?} in {text:?}")));
    let parts: Vec<&str> = text.split(':').collect();
    match parts.as_slice() {
        [v] => Ok(vec![num(v)?]),
        [a, b, s] => {
            let (start, stop, step) = (num(a)?, num(b)?, num(s)?);
            if !(step > 0.0) || !start.is_finite() || !stop.is_finite() || stop < start {
                return Err(Error::Parse(format!("sweep {text:?} needs start ≤ stop and step > 0")));
            }
            let count = ((stop - start) / step + 0.5).floor() as usize + 1;
            if count > 1_000_000 {
                return Err(Error::TooLarge(format!("sweep {text:?} has {count} points")));
            }
            // drop the accumulated rounding noise of start + k·step
            let clean = |v: f64| format!("{v:.11e}").parse::<f64>().unwrap_or(v);
            Ok((0..count).map(|k| clean(start + k as f64 * step)).collect())
        }
        _ => Err(Error::Parse(format!("expected a number or start:stop:step, got {text:?}"))),
    }
}

fn rate_rows(reports: &[RateReport]) -> Result<Rendered> {
    let rows = reports
        .iter()
        .map(|r| {
            vec![
                r.protocol.name().into(),
                format!("{:?}", r.noise_kind).to_lowercase().into(),
                r.noise.into(),
                r.alpha.into(),
                r.conditioned.into(),
                r.rate.into(),
                r.mutual_information.into(),
                r.max_entropy.into(),
            ]
        })
        .collect();
    Ok(Rendered {
        json: to_json(&reports)?,
        headers: vec!["protocol", "noise_kind", "noise", "alpha", "conditioned", "rate", "mutual_information", "max_entropy"],
        rows,
    })
}

fn cmd_rate(args: &RateArgs) -> Result<Rendered> {
    let mut reports = Vec::new();
    match args.protocol {
        Protocol::B92 => {
            if args.qber.is_some() {
                return Err(Error::Unsupported("b92 takes --depol, not --qber".into()));
            }
            for p in parse_sweep(args.depol.as_deref().unwrap_or_default())? {
                reports.push(b92_rate_depolarizing(p, args.alpha)?);
            }
        }
        protocol => {
            let qbers = match (&args.qber, &args.depol) {
                (Some(q), _) => parse_sweep(q)?,
                (None, Some(d)) => parse_sweep(d)?.into_iter().map(|p| 2.0 * p / 3.0).collect(),
                (None, None) => unreachable!("clap requires a noise flag"),
            };
            for q in qbers {
                reports.push(bell_rate(protocol, q, args.conditioned)?);
            }
        }
    }
    rate_rows(&reports)
}

fn cmd_threshold(args: &ThresholdArgs) -> Result<Rendered> {
    let r: ThresholdReport = threshold(args.protocol, args.conditioned)?;
    let rows = vec![vec![
        r.protocol.name().into(),
        r.conditioned.into(),
        format!("{:?}", r.noise_kind).to_lowercase().into(),
        r.threshold.into(),
        r.alpha.into(),
        r.tolerance.into(),
    ]];
    Ok(Rendered {
        json: to_json(&r)?,
        headers: vec!["protocol", "conditioned", "noise_kind", "threshold", "alpha", "tolerance"],
        rows,
    })
}

fn read_text(path: &PathBuf) -> Result<String> {
    if path.as_os_str() == "-" {
        let mut s = String::new();
        std::io::Read::read_to_string(&mut std::io::stdin(), &mut s).map_err(|e| Error::Parse(e.to_string()))?;
        return Ok(s);
    }
    std::fs::read_to_string(path).map_err(|e| Error::Parse(format!("{}: {e}", path.display())))
}

fn read_json<T: for<'de> Deserialize<'de>>(path: &PathBuf) -> Result<T> {
    serde_json::from_str(&read_text(path)?).map_err(|e| Error::Parse(format!("{}: {e}", path.display())))
}

fn four(v: &[f64], flag: &str) -> Result<[f64; 4]> {
    v.try_into().map_err(|_| Error::Parse(format!("{flag} takes four comma-separated weights, got {}", v.len())))
}

/// The protocol configuration described by the simulate flags.
pub fn simulate_config(args: &SimulateArgs, seed: u64) -> Result<ProtocolConfig> {
    if let Some(path) = &args.config {
        let mut config: ProtocolConfig = read_json(path)?;
        config.seed = seed;
        return Ok(config);
    }
    let protocol = args.protocol.expect("clap requires --protocol");
    let n = args.n.expect("clap requires --n");
    let attack = if let Some(l) = &args.lambdas {
        AttackModel::BellDiagonal { lambdas: four(l, "--lambdas")? }
    } else if let Some(p) = args.depol {
        AttackModel::Depolarizing { p }
    } else if let Some(path) = &args.attack {
        read_json(path)?
    } else {
        unreachable!("clap requires an attack source")
    };
    let mut config = ProtocolConfig::new(protocol, n, attack, seed);
    config.sampling_rate = args.sampling_rate;
    if let Some(a) = args.b92_alpha {
        config.b92_alpha = a;
    }
    config.conditioned = !args.basic;
    config.exact_eve = args.exact_eve;
    if args.povm {
        config.sampling = SamplingPath::Povm;
    }
    config.key_length = args.key_length;
    config.reconciliation.bits = args.ir_bits;
    if let Some(v) = args.verify_bits {
        config.reconciliation.verify_bits = v;
    }
    if let Some(e) = args.eps {
        config.eps = e;
        config.eps1 = e;
        config.eps2 = e;
    }
    Ok(config)
}

/// Runs the protocol and, with exact Eve tracking, the key distance.
pub fn simulate(config: &ProtocolConfig) -> Result<(Transcript, SimulationSummary)> {
    config.validate()?;
    let t = run_protocol(config)?;
    let eve = if config.exact_eve && !t.aborted { Some(eve_distance_exact(&t, &config.attack)?) } else { None };
    let summary = SimulationSummary {
        protocol: config.protocol,
        n: config.n,
        seed: config.seed,
        aborted: t.aborted,
        abort_reason: t.abort_reason.map(|r| r.to_string()),
        n_prime: t.n_prime,
        r_prime: t.r_prime,
        s_prime: t.s_prime(),
        keys_agree: t.keys_agree(),
        eve_distance: eve.as_ref().map(|e| e.distance),
        eve_bound: eve.as_ref().map(|e| e.bound.bound),
    };
    Ok((t, summary))
}

fn cmd_simulate(args: &SimulateArgs, seed: u64) -> Result<(Rendered, String)> {
    let config = simulate_config(args, seed)?;
    let (t, s) = simulate(&config)?;
    let note = format!(
        "n'={} r'={} s'={} {}",
        s.n_prime,
        s.r_prime.map_or("-".to_string(), |r| r.to_string()),
        s.s_prime,
        s.abort_reason.as_deref().map_or("completed".to_string(), |r| format!("aborted: {r}")),
    );
    let rows = vec![vec![
        s.protocol.name().into(),
        s.n.into(),
        Cell::Text(s.seed.to_string()),
        s.aborted.into(),
        s.abort_reason.clone().map_or(Cell::Empty, Cell::Text),
        s.n_prime.into(),
        s.r_prime.map_or(Cell::Empty, Cell::from),
        s.s_prime.into(),
        s.keys_agree.into(),
        s.eve_distance.into(),
        s.eve_bound.into(),
    ]];
    let rendered = Rendered {
        json: t.to_json()?,
        headers: vec![
            "protocol",
            "n",
            "seed",
            "aborted",
            "abort_reason",
            "n_prime",
            "r_prime",
            "s_prime",
            "keys_agree",
            "eve_distance",
            "eve_bound",
        ],
        rows,
    };
    Ok((rendered, note))
}

fn cmd_verify(args: &VerifyArgs, seed: u64) -> Result<(Rendered, Vec<BoundReport>)> {
    let reports = run_suite(args.suite, SuiteOptions { trials: args.trials, seed })?;
    let rows = reports
        .iter()
        .map(|r| {
            vec![
                r.lemma.clone().into(),
                format!("{:?}", r.direction).to_lowercase().into(),
                r.reported.into(),
                r.empirical.into(),
                r.satisfied.into(),
            ]
        })
        .collect();
    let failing = reports.iter().filter(|r| !r.satisfied).cloned().collect();
    Ok((
        Rendered { json: to_json(&reports)?, headers: vec!["check", "direction", "bound", "empirical", "satisfied"], rows },
        failing,
    ))
}

/// Entropy of the given input at `order`, smoothed by `eps`.
pub fn entropy_of(input: &EntropyInput, order: Order, eps: f64) -> Result<(&'static str, f64)> {
    let classical = |p: &ProbDist| -> Result<f64> {
        if eps == 0.0 {
            renyi_entropy(p, order)
        } else {
            smooth_renyi(p, order, eps)
        }
    };
    match input {
        EntropyInput::Probs(v) => Ok(("distribution", classical(&ProbDist::from_probs(v.clone())?)?)),
        EntropyInput::Dist(p) => Ok(("distribution", classical(p)?)),
        EntropyInput::Density(rho) => Ok(("density", q_entropy(rho, order, eps)?)),
        EntropyInput::Bell { bell_diagonal } => Ok(("density", q_entropy(&bell_diagonal_state(*bell_diagonal)?, order, eps)?)),
    }
}

fn cmd_entropy(args: &EntropyArgs) -> Result<Rendered> {
    let input = if let Some(path) = &args.input {
        read_json::<EntropyInput>(path)?
    } else if let Some(d) = &args.dist {
        EntropyInput::Probs(d.clone())
    } else if let Some(b) = &args.bell {
        EntropyInput::Bell { bell_diagonal: four(b, "--bell")? }
    } else {
        unreachable!("clap requires an input")
    };
    let (kind, entropy) = entropy_of(&input, args.alpha, args.eps)?;
    let report = EntropyReport { kind: kind.into(), order: args.alpha.to_string(), eps: args.eps, entropy };
    let rows = vec![vec![kind.into(), report.order.clone().into(), args.eps.into(), entropy.into()]];
    Ok(Rendered { json: to_json(&report)?, headers: vec!["kind", "order", "eps", "entropy"], rows })
}

fn emit(cli: &Cli, text: &str) -> Result<()> {
    match &cli.out {
        Some(path) => std::fs::write(path, text).map_err(|e| Error::Parse(format!("{}: {e}", path.display()))),
        None => {
            let mut out = std::io::stdout().lock();
            out.write_all(text.as_bytes()).and_then(|_| out.flush()).map_err(|e| Error::Parse(e.to_string()))
        }
    }
}

fn execute(cli: &Cli) -> Result<i32> {
    let seed = match cli.seed {
        Some(s) => s,
        None => match std::env::var(SEED_ENV) {
            Ok(v) => parse_seed(&v)?,
            Err(_) => 0,
        },
    };
    match &cli.command {
        Command::Rate(a) => emit(cli, &cmd_rate(a)?.format(cli.format))?,
        Command::Threshold(a) => emit(cli, &cmd_threshold(a)?.format(cli.format))?,
        Command::Simulate(a) => {
            let (rendered, note) = cmd_simulate(a, seed)?;
            emit(cli, &rendered.format(cli.format))?;
            eprintln!("{note}");
        }
        Command::Verify(a) => {
            let (rendered, failing) = cmd_verify(a, seed)?;
            emit(cli, &rendered.format(cli.format))?;
            if !failing.is_empty() {
                for r in &failing {
                    eprintln!("violated: {}", serde_json::to_string(r).unwrap_or_else(|_| r.lemma.clone()));
                }
                return Ok(EXIT_VIOLATION);
            }
        }
        Command::Entropy(a) => emit(cli, &cmd_entropy(a)?.format(cli.format))?,
    }
    Ok(EXIT_OK)
}

/// Parses `args` (including the program name) and runs the command,
/// returning the process exit code.
pub fn run<I, T>(args: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            return if e.use_stderr() { EXIT_USAGE } else { EXIT_OK };
        }
    };
    match execute(&cli) {
        Ok(code) => code,
        Err(e) => {
            eprintln!("error: {e}");
            EXIT_USAGE
        }
    }
}
