//! Command-line front end. Every command builds a [`Report`]; the report is
//! printed as text and optionally written as CSV and JSON.

use std::ffi::OsString;
use std::io::Write as _;
use std::path::{Path, PathBuf};

use clap::{Args, Parser, Subcommand, ValueEnum};
use oneway_core::bench::{benchmark, noisy_partial_matching, BenchmarkKind};
use oneway_core::checks::{CheckConfig, Suite};
use oneway_core::dimensions::{pseudo_dimension_with, vc_dimension_with, DimensionLimits};
use oneway_core::extractors::{
    audit, audit_all, prefix_leak, side_info_experiment, SearchOptions,
};
use oneway_core::information::{conditional_mutual_information, min_entropy, mutual_information};
use oneway_core::protocols::{
    optimal_oneway, OutputKind, ProtocolParams, ProtocolSetup, SamplingMode, DEFAULT_MAX_M,
};
use oneway_core::rectangles::{rec_exact, rec_greedy};
use oneway_core::JointDistribution;

use crate::io::{self, AnyDistribution};
use crate::report::{index_list, Cell, Report};
use crate::{runner, Error, Result};

#[derive(Debug, Parser)]
#[command(name = "oneway", version, about = "One-way communication complexity toolkit")]
pub struct Cli {
    /// Also write the report as CSV.
    #[arg(long, global = true, value_name = "PATH")]
    pub csv: Option<PathBuf>,
    /// Also write the report (or the error) as JSON.
    #[arg(long, global = true, value_name = "PATH")]
    pub json: Option<PathBuf>,
    /// Worker threads for Monte Carlo runs and suites.
    #[arg(long, global = true, value_name = "N", value_parser = clap::value_parser!(u64).range(1..))]
    pub threads: Option<u64>,
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Benchmark generators.
    #[command(subcommand)]
    Bench(BenchCommand),
    /// Complexity measures of a function or distribution.
    #[command(subcommand)]
    Measure(MeasureCommand),
    /// Learning-based one-way protocols.
    #[command(subcommand)]
    Protocol(ProtocolCommand),
    /// Strong-extractor audits.
    #[command(subcommand)]
    Extractor(ExtractorCommand),
    /// Randomized verification suites.
    #[command(subcommand)]
    Quantum(QuantumCommand),
}

#[derive(Debug, Subcommand)]
pub enum BenchCommand {
    /// Writes a benchmark function table. CSV columns: kind, n, x_size,
    /// y_size, z_size, out, dist_out.
    Gen(GenArgs),
}

#[derive(Debug, Clone, Copy, ValueEnum)]
pub enum Kind {
    Gt,
    Ip,
    Disj,
    Npm,
}

#[derive(Debug, Args)]
pub struct GenArgs {
    #[arg(long, value_enum)]
    pub kind: Kind,
    #[arg(long)]
    pub n: u32,
    #[arg(long)]
    pub out: PathBuf,
    /// Input distribution: uniform for gt, ip and disj; the correlated
    /// distribution for npm.
    #[arg(long)]
    pub dist_out: Option<PathBuf>,
}

#[derive(Debug, Subcommand)]
pub enum MeasureCommand {
    /// VC dimension of a boolean table. CSV columns: vc, witness.
    Vc {
        #[arg(long = "fn", value_name = "PATH")]
        f: PathBuf,
        /// Column cap of the exact search.
        #[arg(long, default_value_t = DimensionLimits::default().max_columns)]
        max_columns: usize,
    },
    /// γ-pseudo-dimension of the scaled table. CSV columns: pdim, witness,
    /// thresholds.
    Pdim {
        #[arg(long = "fn", value_name = "PATH")]
        f: PathBuf,
        #[arg(long, allow_negative_numbers = true)]
        gamma: f64,
        #[arg(long, default_value_t = DimensionLimits::default().max_columns)]
        max_columns: usize,
    },
    /// Mutual information in bits. CSV columns: mi_bits.
    ///
    /// For a labeled joint, computes I(A:B|C) over axis groups; A defaults
    /// to axis 0 and B to the remaining axes.
    Mi {
        #[arg(long, value_name = "PATH")]
        dist: PathBuf,
        #[arg(long, value_delimiter = ',')]
        a: Vec<usize>,
        #[arg(long, value_delimiter = ',')]
        b: Vec<usize>,
        #[arg(long, value_delimiter = ',')]
        given: Vec<usize>,
    },
    /// Min-entropy of a marginal in bits. CSV columns: minentropy_bits.
    Minentropy {
        #[arg(long, value_name = "PATH")]
        dist: PathBuf,
        #[arg(long, value_enum, default_value = "x")]
        axis: Axis,
    },
    /// One-way rectangle bound with its certificate. CSV columns: rec_bits,
    /// exact, mass, error, rows, g.
    Rec {
        #[arg(long = "fn", value_name = "PATH")]
        f: PathBuf,
        #[arg(long, value_name = "PATH")]
        dist: PathBuf,
        #[arg(long, allow_negative_numbers = true)]
        eps: f64,
        /// Exhaustive search (the default).
        #[arg(long, conflicts_with = "greedy")]
        exact: bool,
        /// Seeded greedy search; an upper bound on the exact value.
        #[arg(long)]
        greedy: bool,
    },
    /// Optimal deterministic one-way cost. CSV columns: dopt_bits, blocks,
    /// error, assignment.
    Dopt {
        #[arg(long = "fn", value_name = "PATH")]
        f: PathBuf,
        #[arg(long, value_name = "PATH")]
        dist: PathBuf,
        #[arg(long, allow_negative_numbers = true)]
        eps: f64,
    },
}

#[derive(Debug, Clone, Copy, ValueEnum)]
pub enum Axis {
    X,
    Y,
}

#[derive(Debug, Clone, Copy, ValueEnum)]
pub enum Mode {
    Independent,
    Joint,
}

#[derive(Debug, Args)]
pub struct ProtocolArgs {
    #[arg(long = "fn", value_name = "PATH")]
    pub f: PathBuf,
    #[arg(long, value_name = "PATH")]
    pub dist: PathBuf,
    #[arg(long, allow_negative_numbers = true)]
    pub eps: f64,
    #[arg(long, default_value_t = 1000)]
    pub trials: u64,
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
    /// Constant of the learning sample-size bound.
    #[arg(long, default_value_t = 1.0)]
    pub c0: f64,
    /// Per-run overhead constant of correlation sampling, in bits.
    #[arg(long = "l", default_value_t = 16.0)]
    pub l_const: f64,
    /// Abort when Alice's first message exceeds its Markov threshold.
    #[arg(long)]
    pub truncate: bool,
    #[arg(long, value_enum, default_value = "independent")]
    pub mode: Mode,
    /// Empirical-L1 learner with fixed-width answers.
    #[arg(long)]
    pub nonboolean: bool,
    /// Overrides the VC or pseudo-dimension used for the sample size.
    #[arg(long)]
    pub dim: Option<usize>,
}

#[derive(Debug, Subcommand)]
pub enum ProtocolCommand {
    /// Runs Monte Carlo trials. CSV columns: fn, dist, eps, m, mode,
    /// truncate, mean_m1_bits, max_m1_bits, m2_bits, error_rate, abort_rate,
    /// mi_bits, vc_or_pdim.
    Run {
        #[command(flatten)]
        args: ProtocolArgs,
        /// Sample count; derived from the learning bound when omitted.
        #[arg(long)]
        m: Option<u64>,
    },
    /// Finds the smallest m meeting an error target. CSV columns: fn, dist,
    /// eps, mode, target, trials, m, error_rate.
    Calibrate {
        #[command(flatten)]
        args: ProtocolArgs,
        /// Error target; defaults to eps, or 3·eps with --nonboolean.
        #[arg(long, allow_negative_numbers = true)]
        target: Option<f64>,
        #[arg(long, default_value_t = 4096)]
        max_m: u64,
    },
}

#[derive(Debug, Subcommand)]
pub enum ExtractorCommand {
    /// Worst-case bias per min-entropy. CSV columns: k, bias, is_strong,
    /// exact, rec_value, margin.
    Audit {
        #[arg(long = "fn", value_name = "PATH")]
        f: PathBuf,
        #[arg(long, allow_negative_numbers = true)]
        eps: f64,
        /// Audit a single min-entropy instead of every k.
        #[arg(long)]
        k: Option<u32>,
        /// Compute the rectangle bound at ½ − ε under the uniform input.
        #[arg(long)]
        rec: bool,
        /// Side-information experiment leaking the first t bits of x.
        #[arg(long, value_name = "T")]
        leak: Option<u32>,
        /// Coordinate ascent beyond the exact search range.
        #[arg(long)]
        greedy: bool,
        #[arg(long, default_value_t = 0)]
        seed: u64,
    },
}

#[derive(Debug, Subcommand)]
pub enum QuantumCommand {
    /// Runs a verification suite. CSV columns: suite, instances, violations,
    /// worst_margin.
    Check {
        #[arg(long, value_parser = parse_suite)]
        suite: Suite,
        #[arg(long, default_value_t = 500)]
        trials: u64,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        /// Random competing measurements per Helstrom instance.
        #[arg(long, default_value_t = 1000)]
        measurements: u32,
    },
}

fn parse_suite(s: &str) -> std::result::Result<Suite, String> {
    Suite::from_name(s).ok_or_else(|| {
        let names: Vec<&str> = Suite::ALL.iter().map(|s| s.name()).collect();
        format!("unknown suite {s:?}; expected one of {}", names.join(", "))
    })
}

impl Command {
    pub fn name(&self) -> &'static str {
        match self {
            Command::Bench(_) => "bench gen",
            Command::Measure(m) => match m {
                MeasureCommand::Vc { .. } => "measure vc",
                MeasureCommand::Pdim { .. } => "measure pdim",
                MeasureCommand::Mi { .. } => "measure mi",
                MeasureCommand::Minentropy { .. } => "measure minentropy",
                MeasureCommand::Rec { .. } => "measure rec",
                MeasureCommand::Dopt { .. } => "measure dopt",
            },
            Command::Protocol(ProtocolCommand::Run { .. }) => "protocol run",
            Command::Protocol(ProtocolCommand::Calibrate { .. }) => "protocol calibrate",
            Command::Extractor(_) => "extractor audit",
            Command::Quantum(_) => "quantum check",
        }
    }
}

fn display(p: &Path) -> Cell {
    Cell::Text(p.display().to_string())
}

fn bench_gen(a: &GenArgs) -> Result<Report> {
    let (f, mu) = match a.kind {
        Kind::Gt | Kind::Ip | Kind::Disj => {
            let kind = match a.kind {
                Kind::Gt => BenchmarkKind::GreaterThan,
                Kind::Ip => BenchmarkKind::InnerProduct,
                _ => BenchmarkKind::Disjointness,
            };
            let f = benchmark(kind, a.n)?;
            let mu = match a.dist_out {
                Some(_) => Some(JointDistribution::uniform(f.x_size(), f.y_size())?),
                None => None,
            };
            (f, mu)
        }
        Kind::Npm => {
            let npm = noisy_partial_matching(a.n)?;
            (npm.table, Some(npm.distribution))
        }
    };
    io::save_function(&a.out, &f)?;
    if let (Some(path), Some(mu)) = (&a.dist_out, &mu) {
        io::save_distribution(path, mu)?;
    }
    let mut r = Report::new(
        "bench gen",
        &["kind", "n", "x_size", "y_size", "z_size", "out", "dist_out"],
    );
    let kind = format!("{:?}", a.kind).to_lowercase();
    r.push(vec![
        kind.into(),
        a.n.into(),
        f.x_size().into(),
        f.y_size().into(),
        f.z_size().into(),
        display(&a.out),
        a.dist_out.as_deref().map_or(Cell::Empty, display),
    ]);
    Ok(r)
}

fn measure(m: &MeasureCommand) -> Result<Report> {
    match m {
        MeasureCommand::Vc { f, max_columns } => {
            let f = io::load_function(f)?;
            let limits = DimensionLimits {
                max_columns: *max_columns,
                ..DimensionLimits::default()
            };
            let (d, w) = vc_dimension_with(&f, &limits)?;
            let mut r = Report::new("measure vc", &["vc", "witness"]);
            r.push(vec![d.into(), index_list(&w.columns)]);
            Ok(r)
        }
        MeasureCommand::Pdim { f, gamma, max_columns } => {
            let f = io::load_function(f)?;
            let limits = DimensionLimits {
                max_columns: *max_columns,
                ..DimensionLimits::default()
            };
            let (d, w) = pseudo_dimension_with(&f, *gamma, &limits)?;
            let mut r = Report::new("measure pdim", &["pdim", "witness", "thresholds"]);
            let thresholds: Vec<String> = w
                .thresholds
                .unwrap_or_default()
                .iter()
                .map(|t| format!("{t:?}"))
                .collect();
            r.push(vec![d.into(), index_list(&w.columns), index_list(&thresholds)]);
            Ok(r)
        }
        MeasureCommand::Mi { dist, a, b, given } => {
            let mi = match io::load_any_distribution(dist)? {
                AnyDistribution::Joint(mu) => {
                    if !(a.is_empty() && b.is_empty() && given.is_empty()) {
                        return Err(Error::Usage(
                            "--a, --b and --given apply to labeled joints only".into(),
                        ));
                    }
                    mutual_information(&mu)
                }
                AnyDistribution::Labeled(j) => {
                    let a = if a.is_empty() { vec![0] } else { a.clone() };
                    let b = if b.is_empty() {
                        (0..j.axes().len())
                            .filter(|i| !a.contains(i) && !given.contains(i))
                            .collect()
                    } else {
                        b.clone()
                    };
                    conditional_mutual_information(&j, &a, &b, given)?
                }
            };
            let mut r = Report::new("measure mi", &["mi_bits"]);
            r.push(vec![mi.into()]);
            Ok(r)
        }
        MeasureCommand::Minentropy { dist, axis } => {
            let mu = io::load_distribution(dist)?;
            let p = match axis {
                Axis::X => mu.x_marginal(),
                Axis::Y => mu.y_marginal(),
            };
            let mut r = Report::new("measure minentropy", &["minentropy_bits"]);
            r.push(vec![min_entropy(&p).into()]);
            Ok(r)
        }
        MeasureCommand::Rec { f, dist, eps, greedy, .. } => {
            let f = io::load_function(f)?;
            let mu = io::load_distribution(dist)?;
            let cert = if *greedy {
                rec_greedy(&f, &mu, *eps)?
            } else {
                rec_exact(&f, &mu, *eps)?
            };
            let mut r = Report::new("measure rec", &["rec_bits", "exact", "mass", "error", "rows", "g"]);
            r.push(vec![
                cert.value.into(),
                (!*greedy).into(),
                cert.mass.into(),
                cert.error.into(),
                index_list(&cert.rows),
                index_list(&cert.g),
            ]);
            Ok(r)
        }
        MeasureCommand::Dopt { f, dist, eps } => {
            let f = io::load_function(f)?;
            let mu = io::load_distribution(dist)?;
            let opt = optimal_oneway(&f, &mu, *eps)?;
            let mut r = Report::new("measure dopt", &["dopt_bits", "blocks", "error", "assignment"]);
            r.push(vec![
                opt.bits.into(),
                opt.blocks.into(),
                opt.error.into(),
                index_list(&opt.assignment),
            ]);
            Ok(r)
        }
    }
}

fn protocol_params(a: &ProtocolArgs, m: Option<u64>) -> ProtocolParams {
    ProtocolParams {
        m,
        c0: a.c0,
        l_const: a.l_const,
        eps: a.eps,
        truncate: a.truncate,
        mode: match a.mode {
            Mode::Independent => SamplingMode::Independent,
            Mode::Joint => SamplingMode::Joint,
        },
        trials: a.trials,
        seed: a.seed,
        dimension: a.dim,
    }
}

fn output_kind(a: &ProtocolArgs) -> OutputKind {
    if a.nonboolean {
        OutputKind::NonBoolean
    } else {
        OutputKind::Boolean
    }
}

fn mode_name(a: &ProtocolArgs) -> &'static str {
    match a.mode {
        Mode::Independent => "independent",
        Mode::Joint => "joint",
    }
}

fn protocol(p: &ProtocolCommand, threads: Option<usize>) -> Result<Report> {
    match p {
        ProtocolCommand::Run { args, m } => {
            let f = io::load_function(&args.f)?;
            let mu = io::load_distribution(&args.dist)?;
            let setup = ProtocolSetup::new(&f, &mu, &protocol_params(args, *m), output_kind(args))?;
            let stats = runner::with_threads(threads, || runner::run_protocol(&setup))?;
            let mut r = Report::new(
                "protocol run",
                &[
                    "fn", "dist", "eps", "m", "mode", "truncate", "mean_m1_bits", "max_m1_bits",
                    "m2_bits", "error_rate", "abort_rate", "mi_bits", "vc_or_pdim",
                ],
            );
            r.push(vec![
                display(&args.f),
                display(&args.dist),
                args.eps.into(),
                setup.m().into(),
                mode_name(args).into(),
                args.truncate.into(),
                stats.mean_m1_bits.into(),
                stats.max_m1_bits.into(),
                stats.m2_bits.into(),
                stats.error_rate.into(),
                stats.abort_rate.into(),
                setup.mi_bits().into(),
                setup.dimension().into(),
            ]);
            r.note("trials", stats.trials);
            r.note("errors", stats.errors);
            r.note("aborts", stats.aborts);
            r.note("abort_threshold", setup.abort_threshold());
            Ok(r)
        }
        ProtocolCommand::Calibrate { args, target, max_m } => {
            let f = io::load_function(&args.f)?;
            let mu = io::load_distribution(&args.dist)?;
            let kind = output_kind(args);
            let target = target.unwrap_or(match kind {
                OutputKind::Boolean => args.eps,
                OutputKind::NonBoolean => 3.0 * args.eps,
            });
            if !(0.0..=1.0).contains(&target) {
                return Err(Error::Usage(format!("target {target} outside [0, 1]")));
            }
            if *max_m > DEFAULT_MAX_M {
                return Err(Error::Core(oneway_core::Error::cap("max_m", *max_m, DEFAULT_MAX_M)));
            }
            let params = protocol_params(args, None);
            let (m, rate) = runner::with_threads(threads, || {
                runner::calibrate(&f, &mu, &params, kind, target, *max_m)
            })??;
            let mut r = Report::new(
                "protocol calibrate",
                &["fn", "dist", "eps", "mode", "target", "trials", "m", "error_rate"],
            );
            r.push(vec![
                display(&args.f),
                display(&args.dist),
                args.eps.into(),
                mode_name(args).into(),
                target.into(),
                args.trials.into(),
                m.into(),
                rate.into(),
            ]);
            Ok(r)
        }
    }
}

fn extractor(e: &ExtractorCommand) -> Result<Report> {
    let ExtractorCommand::Audit { f, eps, k, rec, leak, greedy, seed } = e;
    let h = io::load_function(f)?;
    let opts = SearchOptions {
        allow_greedy: *greedy,
        seed: *seed,
        ..SearchOptions::default()
    };
    let audits = match k {
        Some(k) => vec![audit(&h, *k, *eps, &opts)?],
        None => audit_all(&h, *eps, &opts)?,
    };
    let n = audits[0].n;
    let rec_value = if *rec {
        let mu = JointDistribution::uniform(h.x_size(), h.y_size())?;
        Some(rec_exact(&h, &mu, 0.5 - eps)?.value)
    } else {
        None
    };
    let mut r = Report::new(
        "extractor audit",
        &["k", "bias", "is_strong", "exact", "rec_value", "margin"],
    );
    let mut holds = true;
    for a in &audits {
        let margin = rec_value.map(|v| v - (n - a.k) as f64);
        if a.is_strong && margin.is_some_and(|m| m <= 0.0) {
            holds = false;
        }
        r.push(vec![
            a.k.into(),
            a.bias.into(),
            a.is_strong.into(),
            a.exact.into(),
            rec_value.into(),
            margin.into(),
        ]);
    }
    if rec_value.is_some() {
        r.note("largerec_holds", holds);
    }
    if let Some(t) = leak {
        if *t > n {
            return Err(Error::Usage(format!("leak of {t} bits exceeds n = {n}")));
        }
        let s = side_info_experiment(&h, *eps, &prefix_leak(n, *t), &opts)?;
        r.note("leak_bits", *t);
        r.note("leak_information", s.information);
        r.note("leak_dist", s.dist);
        r.note("a", s.a);
        r.note("b", s.b);
        r.note("threshold_k", s.k);
        r.note("distinguishable", s.distinguishable);
        r.note("implication_ok", s.implication_ok);
    }
    Ok(r)
}

fn quantum(q: &QuantumCommand, threads: Option<usize>) -> Result<Report> {
    let QuantumCommand::Check { suite, trials, seed, measurements } = q;
    let cfg = CheckConfig {
        seed: *seed,
        helstrom_measurements: *measurements,
    };
    let rep = runner::with_threads(threads, || runner::run_suite(*suite, *trials, &cfg))??;
    let mut r = Report::new("quantum check", &["suite", "instances", "violations", "worst_margin"]);
    r.push(vec![
        rep.suite.into(),
        rep.instances.into(),
        rep.violations.into(),
        rep.worst_margin.into(),
    ]);
    Ok(r)
}

pub fn execute(cli: &Cli) -> Result<Report> {
    let threads = cli.threads.map(|n| n as usize);
    match &cli.command {
        Command::Bench(BenchCommand::Gen(a)) => bench_gen(a),
        Command::Measure(m) => measure(m),
        Command::Protocol(p) => protocol(p, threads),
        Command::Extractor(e) => extractor(e),
        Command::Quantum(q) => quantum(q, threads),
    }
}

/// Parses `args`, runs the command and returns the process exit code.
pub fn run<I, T>(args: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            return if e.use_stderr() { 1 } else { 0 };
        }
    };
    let command = cli.command.name();
    let outcome = execute(&cli).and_then(|report| {
        if let Some(path) = &cli.csv {
            report.write_csv(path)?;
        }
        if let Some(path) = &cli.json {
            report.write_json(path)?;
        }
        Ok(report)
    });
    match outcome {
        Ok(report) => {
            let mut out = std::io::stdout().lock();
            let _ = out.write_all(report.human().as_bytes());
            0
        }
        Err(e) => {
            eprintln!("error: {e}");
            if let Some(path) = &cli.json {
                if let Err(w) = crate::report::write_error_json(path, command, &e) {
                    eprintln!("error: {w}");
                }
            }
            e.exit_code()
        }
    }
}
