//! Command line harness for sliced error correction.
//!
//! Subcommands: `design` (optimize a slice system and write it to JSON),
//! `rates` (leakage levels and net rates), `simulate` (end-to-end protocol
//! run with transcript and privacy amplification), `sweep` (CSV grids of
//! mutual information and error rates), `lemmas` (empirical checks of the
//! identification and typicality arguments).
//!
//! Exit codes: 0 success, 2 invalid configuration or I/O, 3 numerical
//! failure, 4 residual key mismatch under --require-equal.

use std::fmt::Write as _;
use std::fs;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};
use serde::Serialize;

use sliced_ec::distill::{privacy_amplify, rate_report, PaParams, TypicalityExperiment};
use sliced_ec::quantizer::{
    mutual_information, optimize_partition, MutualInfoReport, OptimizerSettings,
};
use sliced_ec::reconcile::{practical_leakage, run_sec, AccountingMode, BcpKind, CascadeConfig};
use sliced_ec::rng::derive_seed;
use sliced_ec::slicing::{DesignFile, SliceDesign, SliceSystem};
use sliced_ec::{lemma1_check, sample_pairs, ChannelParams, Error as CoreError};

#[derive(Parser)]
#[command(
    name = "sliced-ec",
    version,
    about = "Reconciliation of correlated Gaussian sequences by sliced error correction"
)]
struct Cli {
    /// Directory where output files are written.
    #[arg(long, global = true, env = "SLICED_EC_OUT_DIR", default_value = ".")]
    outdir: PathBuf,
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Optimize interval thresholds, build estimators and write the design.
    Design(DesignArgs),
    /// Report entropy, leakage levels and net rates for a design.
    Rates(RatesArgs),
    /// Run the full protocol on sampled data and amplify the key.
    Simulate(SimulateArgs),
    /// Write CSV grids: mutual information vs t, error rates vs SNR.
    Sweep(SweepArgs),
    /// Empirical checks of the identification and typicality bounds.
    Lemmas(LemmasArgs),
}

#[derive(Args, Clone)]
struct ChannelArgs {
    /// Signal-to-noise ratio Sigma^2 / sigma^2.
    #[arg(long, default_value_t = 3.0)]
    snr: f64,
    /// Source standard deviation Sigma.
    #[arg(long, default_value_t = 1.0)]
    sigma_source: f64,
    /// Noise standard deviation; overrides --snr when given (0 is allowed).
    #[arg(long)]
    sigma_noise: Option<f64>,
    /// Number of slices (t = 2^m intervals).
    #[arg(short, long, default_value_t = 4)]
    m: usize,
    /// Number of intervals; must equal 2^m when both are given.
    #[arg(short, long)]
    t: Option<usize>,
}

#[derive(Args)]
struct DesignArgs {
    #[command(flatten)]
    channel: ChannelArgs,
    /// Output path for the design JSON (relative to --outdir).
    #[arg(long, default_value = "design.json")]
    out: PathBuf,
}

#[derive(Args)]
struct RatesArgs {
    #[command(flatten)]
    channel: ChannelArgs,
    /// Load a design file instead of optimizing from the channel flags.
    #[arg(long)]
    design: Option<PathBuf>,
    /// Optional output path for the rate report JSON.
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Copy, Clone, PartialEq, Eq, ValueEnum)]
enum AccountingArg {
    BothParties,
    MarkovBsc,
}

impl From<AccountingArg> for AccountingMode {
    fn from(a: AccountingArg) -> Self {
        match a {
            AccountingArg::BothParties => AccountingMode::BothParties,
            AccountingArg::MarkovBsc => AccountingMode::MarkovBsc,
        }
    }
}

#[derive(Args)]
struct SimulateArgs {
    #[command(flatten)]
    channel: ChannelArgs,
    /// Load a design file instead of optimizing from the channel flags.
    #[arg(long)]
    design: Option<PathBuf>,
    /// Number of raw key elements.
    #[arg(short, long, default_value_t = 10_000)]
    l: usize,
    /// Master seed; sampling, shuffles and hashing derive from it.
    #[arg(long, default_value_t = 1)]
    seed: u64,
    /// Per-slice correction protocols, comma separated (all | none |
    /// cascade); a single token applies to every slice.
    #[arg(long, default_value = "cascade")]
    bcp: String,
    /// Leakage accounting convention.
    #[arg(long, value_enum, default_value_t = AccountingArg::MarkovBsc)]
    accounting: AccountingArg,
    /// Cascade passes.
    #[arg(long, default_value_t = 4)]
    cascade_passes: u32,
    /// Cascade initial block factor: k1 = ceil(factor / e).
    #[arg(long, default_value_t = 1.0)]
    cascade_k1_factor: f64,
    /// Eavesdropper information bound, bits per key element.
    #[arg(long, default_value_t = 0.0)]
    eve_information: f64,
    /// Privacy amplification safety margin in bits.
    #[arg(long, default_value_t = 30.0)]
    security_margin: f64,
    /// Exit with code 4 when the final keys differ.
    #[arg(long)]
    require_equal: bool,
    /// Transcript output path (JSON lines).
    #[arg(long, default_value = "transcript.jsonl")]
    transcript_out: PathBuf,
    /// Summary output path.
    #[arg(long, default_value = "summary.json")]
    summary_out: PathBuf,
}

#[derive(Args)]
struct SweepArgs {
    /// SNR grid, comma separated.
    #[arg(long, default_value = "1,3,7,15")]
    snr_list: String,
    /// Interval-count grid for the mutual information table.
    #[arg(long, default_value = "2,4,8,16")]
    t_list: String,
    /// Slice count for the error-rate table.
    #[arg(short, long, default_value_t = 4)]
    m: usize,
    /// Source standard deviation.
    #[arg(long, default_value_t = 1.0)]
    sigma_source: f64,
    /// Mutual information CSV path.
    #[arg(long, default_value = "sweep_mi.csv")]
    mi_out: PathBuf,
    /// Error rate CSV path.
    #[arg(long, default_value = "sweep_errors.csv")]
    errors_out: PathBuf,
}

#[derive(Args)]
struct LemmasArgs {
    /// Trials for the unique-identification check.
    #[arg(long, default_value_t = 100_000)]
    identification_trials: usize,
    /// Trials for the typicality experiment.
    #[arg(long, default_value_t = 10_000)]
    typicality_trials: usize,
    /// Crossover probability of the binary symmetric experiment.
    #[arg(long, default_value_t = 0.11)]
    flip: f64,
    /// Sequence length d.
    #[arg(short, long, default_value_t = 12)]
    dimension: usize,
    /// Typicality slack.
    #[arg(long, default_value_t = 0.2)]
    epsilon: f64,
    #[arg(long, default_value_t = 1)]
    seed: u64,
    /// Optional output path for the report JSON.
    #[arg(long)]
    out: Option<PathBuf>,
}

/// Errors mapped to process exit codes.
enum CliError {
    Config(String),
    Numerical(String),
    KeyMismatch,
}

impl CliError {
    fn code(&self) -> u8 {
        match self {
            CliError::Config(_) => 2,
            CliError::Numerical(_) => 3,
            CliError::KeyMismatch => 4,
        }
    }
}

impl From<CoreError> for CliError {
    fn from(e: CoreError) -> Self {
        match e {
            CoreError::NonFiniteIntegrand { .. } | CoreError::OptimizerNonConvergence { .. } => {
                CliError::Numerical(e.to_string())
            }
            other => CliError::Config(other.to_string()),
        }
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let result = match &cli.command {
        Command::Design(args) => cmd_design(&cli.outdir, args),
        Command::Rates(args) => cmd_rates(&cli.outdir, args),
        Command::Simulate(args) => cmd_simulate(&cli.outdir, args),
        Command::Sweep(args) => cmd_sweep(&cli.outdir, args),
        Command::Lemmas(args) => cmd_lemmas(&cli.outdir, args),
    };
    match result {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            match &e {
                CliError::Config(msg) => eprintln!("error: {msg}"),
                CliError::Numerical(msg) => eprintln!("numerical error: {msg}"),
                CliError::KeyMismatch => eprintln!("error: final keys differ"),
            }
            ExitCode::from(e.code())
        }
    }
}

fn channel_of(args: &ChannelArgs) -> Result<ChannelParams, CliError> {
    match args.sigma_noise {
        Some(noise) => Ok(ChannelParams::new(args.sigma_source, noise)?),
        None => Ok(ChannelParams::from_snr_with_source(
            args.snr,
            args.sigma_source,
        )?),
    }
}

fn slice_count_of(args: &ChannelArgs) -> Result<usize, CliError> {
    if let Some(t) = args.t {
        if t != 1usize << args.m {
            return Err(CliError::Config(format!(
                "t = {t} contradicts m = {} (need t = 2^m = {})",
                args.m,
                1usize << args.m
            )));
        }
    }
    if args.m == 0 || args.m > 20 {
        return Err(CliError::Config(format!(
            "slice count m = {} out of range",
            args.m
        )));
    }
    Ok(args.m)
}

/// Optimizes a partition and builds the full slice system for the channel.
fn build_system(
    params: &ChannelParams,
    m: usize,
) -> Result<(SliceSystem, Option<MutualInfoReport>), CliError> {
    let partition = optimize_partition(params, 1 << m, &OptimizerSettings::default())?;
    let mi = if params.sigma_noise() > 0.0 {
        Some(mutual_information(params, &partition)?)
    } else {
        None
    };
    let system = SliceSystem::build(SliceDesign::new(*params, partition)?)?;
    Ok((system, mi))
}

fn load_system(path: &Path) -> Result<(SliceSystem, Option<MutualInfoReport>), CliError> {
    let text = fs::read_to_string(path)
        .map_err(|e| CliError::Config(format!("cannot read {}: {e}", path.display())))?;
    let file: DesignFile = serde_json::from_str(&text)
        .map_err(|e| CliError::Config(format!("cannot parse {}: {e}", path.display())))?;
    let mi = file.partition.mi_report;
    Ok((file.instantiate()?, mi))
}

fn resolve(outdir: &Path, path: &Path) -> PathBuf {
    if path.is_absolute() {
        path.to_path_buf()
    } else {
        outdir.join(path)
    }
}

fn write_file(path: &Path, contents: &str) -> Result<(), CliError> {
    if let Some(parent) = path.parent() {
        if !parent.as_os_str().is_empty() {
            fs::create_dir_all(parent).map_err(|e| {
                CliError::Config(format!("cannot create {}: {e}", parent.display()))
            })?;
        }
    }
    fs::write(path, contents)
        .map_err(|e| CliError::Config(format!("cannot write {}: {e}", path.display())))
}

fn to_pretty_json<T: Serialize>(value: &T) -> String {
    let mut s = serde_json::to_string_pretty(value).expect("reports always serialize");
    s.push('\n');
    s
}

fn print_design(system: &SliceSystem, mi: Option<&MutualInfoReport>) {
    let design = &system.design;
    let t = design.interval_count();
    println!(
        "channel: snr = {:.6}, sigma_source = {}, sigma_noise = {:.6}",
        design.params().snr(),
        design.params().sigma_source(),
        design.params().sigma_noise()
    );
    println!("intervals: t = {t}, slices: m = {}", design.slice_count());
    println!("thresholds (upper half; the ladder is symmetric):");
    for (k, tau) in design
        .partition()
        .thresholds()
        .iter()
        .enumerate()
        .skip(t / 2 - 1)
    {
        println!("  tau_{:<3} {:+.6}", k + 1, tau);
    }
    if let Some(report) = mi {
        println!(
            "I(T(X);X') = {:.6} bits  (H(T) = {:.6}, H(X') = {:.6}, H(T,X') = {:.6})",
            report.mi, report.h_intervals, report.h_observation, report.h_joint
        );
    }
    print!("slice error rates:");
    for (i, e) in system.profile.error_rates.iter().enumerate() {
        print!("  e_{} = {:.5}", i + 1, e);
    }
    println!();
    println!(
        "bsc leakage sum h(e_i) = {:.6} bits/element",
        system.profile.leakage_bits
    );
}

fn cmd_design(outdir: &Path, args: &DesignArgs) -> Result<(), CliError> {
    let params = channel_of(&args.channel)?;
    let m = slice_count_of(&args.channel)?;
    let (system, mi) = build_system(&params, m)?;
    print_design(&system, mi.as_ref());
    let file = DesignFile::assemble(
        &system.design,
        mi,
        system.estimators.clone(),
        system.profile.clone(),
    );
    let path = resolve(outdir, &args.out);
    write_file(&path, &to_pretty_json(&file))?;
    println!("design written to {}", path.display());
    Ok(())
}

fn cmd_rates(outdir: &Path, args: &RatesArgs) -> Result<(), CliError> {
    let (system, mi) = match &args.design {
        Some(path) => load_system(&resolve(outdir, path))?,
        None => {
            let params = channel_of(&args.channel)?;
            build_system(&params, slice_count_of(&args.channel)?)?
        }
    };
    let report = rate_report(&system)?;
    print_design(&system, mi.as_ref());
    println!("H(key)            = {:.6} bits/element", report.h_key);
    println!("leak (Slepian-Wolf) = {:.6}", report.leak_slepian_wolf);
    match report.leak_slicewise {
        Some(v) => println!("leak (slicewise)    = {v:.6}"),
        None => println!("leak (slicewise)    = skipped (m > 4)"),
    }
    println!("leak (BSC)          = {:.6}", report.leak_bsc);
    println!("net (ideal)         = {:.6}", report.net_ideal);
    println!("net (BSC)           = {:.6}", report.net_bsc);
    if let Some(out) = &args.out {
        let path = resolve(outdir, out);
        write_file(&path, &to_pretty_json(&report))?;
        println!("rates written to {}", path.display());
    }
    Ok(())
}

fn parse_bcps(
    list: &str,
    m: usize,
    passes: u32,
    k1_factor: f64,
    seed: u64,
) -> Result<Vec<BcpKind>, CliError> {
    let tokens: Vec<&str> = list.split(',').map(str::trim).collect();
    let tokens: Vec<&str> = if tokens.len() == 1 {
        vec![tokens[0]; m]
    } else {
        tokens
    };
    if tokens.len() != m {
        return Err(CliError::Config(format!(
            "--bcp lists {} protocols for {m} slices",
            tokens.len()
        )));
    }
    tokens
        .iter()
        .enumerate()
        .map(|(i, tok)| match *tok {
            "all" | "disclose-all" => Ok(BcpKind::DiscloseAll),
            "none" | "disclose-none" => Ok(BcpKind::DiscloseNone),
            "cascade" => Ok(BcpKind::Cascade(CascadeConfig {
                passes,
                k1_factor,
                seed: derive_seed(seed, 0x1000 + i as u64),
            })),
            other => Err(CliError::Config(format!("unknown BCP '{other}'"))),
        })
        .collect()
}

#[derive(Serialize)]
struct SimulationSummary<'a> {
    config: SimulationConfig<'a>,
    keys_equal: bool,
    residual_errors: Vec<usize>,
    leakage: LeakageSummary,
    rates: sliced_ec::RateReport,
    practical: sliced_ec::PracticalLeakage,
    privacy_amplification: PaSummary,
}

#[derive(Serialize)]
struct SimulationConfig<'a> {
    snr: f64,
    sigma_source: f64,
    sigma_noise: f64,
    m: usize,
    t: usize,
    l: usize,
    seed: u64,
    bcp: Vec<&'a str>,
    accounting_mode: AccountingMode,
}

#[derive(Serialize)]
struct LeakageSummary {
    alice_bits: u64,
    bob_bits: u64,
    both_parties_total: u64,
    markov_bsc_total: u64,
    accounted_total: u64,
}

#[derive(Serialize)]
struct PaSummary {
    eve_information: f64,
    security_margin: f64,
    input_bits: usize,
    output_bits: usize,
    hash_seed: u64,
}

fn cmd_simulate(outdir: &Path, args: &SimulateArgs) -> Result<(), CliError> {
    let (system, _mi) = match &args.design {
        Some(path) => load_system(&resolve(outdir, path))?,
        None => {
            let params = channel_of(&args.channel)?;
            build_system(&params, slice_count_of(&args.channel)?)?
        }
    };
    let m = system.slice_count();
    if args.l == 0 {
        return Err(CliError::Config("need l >= 1 key elements".into()));
    }
    let bcps = parse_bcps(
        &args.bcp,
        m,
        args.cascade_passes,
        args.cascade_k1_factor,
        args.seed,
    )?;
    let mode: AccountingMode = args.accounting.into();

    let pairs = sample_pairs(system.design.params(), args.l, derive_seed(args.seed, 1))?;
    let alice: Vec<f64> = pairs.iter().map(|p| p.x).collect();
    let bob: Vec<f64> = pairs.iter().map(|p| p.x_prime).collect();
    let outcome = run_sec(&system, &alice, &bob, &bcps, mode)?;
    let practical = practical_leakage(&system, args.l, &bcps, &outcome.transcript)?;

    let accounted_total = outcome.transcript.ledger.total();
    let rates = rate_report(&system)?.with_practical(accounted_total, args.l);

    let pa = PaParams {
        eve_information: args.eve_information,
        transcript_bits: accounted_total,
        security_margin: args.security_margin,
    };
    let hash_seed = derive_seed(args.seed, 2);
    let amplified = privacy_amplify(&outcome.alice_key, &pa, args.l, rates.h_key, hash_seed)?;

    let transcript_path = resolve(outdir, &args.transcript_out);
    write_file(&transcript_path, &outcome.transcript.to_jsonl())?;

    let summary = SimulationSummary {
        config: SimulationConfig {
            snr: system.design.params().snr(),
            sigma_source: system.design.params().sigma_source(),
            sigma_noise: system.design.params().sigma_noise(),
            m,
            t: system.design.interval_count(),
            l: args.l,
            seed: args.seed,
            bcp: bcps
                .iter()
                .map(|b| match b {
                    BcpKind::DiscloseAll => "all",
                    BcpKind::DiscloseNone => "none",
                    BcpKind::Cascade(_) => "cascade",
                })
                .collect(),
            accounting_mode: mode,
        },
        keys_equal: outcome.keys_equal(),
        residual_errors: outcome
            .transcript
            .summary
            .as_ref()
            .map(|s| s.residual_errors.clone())
            .unwrap_or_default(),
        leakage: LeakageSummary {
            alice_bits: outcome.transcript.ledger.alice_bits,
            bob_bits: outcome.transcript.ledger.bob_bits,
            both_parties_total: outcome
                .transcript
                .ledger
                .total_for(AccountingMode::BothParties),
            markov_bsc_total: outcome
                .transcript
                .ledger
                .total_for(AccountingMode::MarkovBsc),
            accounted_total,
        },
        rates,
        practical,
        privacy_amplification: PaSummary {
            eve_information: args.eve_information,
            security_margin: args.security_margin,
            input_bits: outcome.alice_key.len(),
            output_bits: amplified.len(),
            hash_seed,
        },
    };
    let summary_path = resolve(outdir, &args.summary_out);
    write_file(&summary_path, &to_pretty_json(&summary))?;

    println!("keys equal: {}", summary.keys_equal);
    println!(
        "leaked bits: alice {}, bob {}, accounted ({:?}) {}",
        summary.leakage.alice_bits, summary.leakage.bob_bits, mode, accounted_total
    );
    println!(
        "net rates: ideal {:.4}, bsc {:.4}, practical {:.4} bits/element",
        summary.rates.net_ideal,
        summary.rates.net_bsc,
        summary.rates.net_practical.unwrap_or(f64::NAN)
    );
    for cost in &summary.practical.per_slice {
        if let Some(xi) = cost.xi_hat {
            println!(
                "slice {}: cascade xi_hat = {:.4} ({} alice bits, e = {:.4})",
                cost.slice, xi, cost.actual_alice_bits, cost.error_rate
            );
        }
    }
    println!(
        "privacy amplification: {} -> {} bits",
        summary.privacy_amplification.input_bits, summary.privacy_amplification.output_bits
    );
    println!("transcript written to {}", transcript_path.display());
    println!("summary written to {}", summary_path.display());

    if args.require_equal && !summary.keys_equal {
        return Err(CliError::KeyMismatch);
    }
    Ok(())
}

fn parse_list<T: std::str::FromStr>(text: &str, what: &str) -> Result<Vec<T>, CliError> {
    text.split(',')
        .map(str::trim)
        .filter(|s| !s.is_empty())
        .map(|s| {
            s.parse::<T>()
                .map_err(|_| CliError::Config(format!("cannot parse {what} entry '{s}'")))
        })
        .collect()
}

fn cmd_sweep(outdir: &Path, args: &SweepArgs) -> Result<(), CliError> {
    let snrs: Vec<f64> = parse_list(&args.snr_list, "--snr-list")?;
    let ts: Vec<usize> = parse_list(&args.t_list, "--t-list")?;
    if snrs.is_empty() || ts.is_empty() {
        return Err(CliError::Config("empty sweep grid".into()));
    }
    let settings = OptimizerSettings::default();
    let mut failed = false;

    // Mutual information grid.
    let mut mi_csv = String::from(
        "# optimized I(T(X);X') in bits per element for symmetric partitions\n\
         # columns: t (intervals), snr, mi_bits\n\
         t,snr,mi_bits\n",
    );
    for &t in &ts {
        for &snr in &snrs {
            let point = ChannelParams::from_snr_with_source(snr, args.sigma_source)
                .map_err(CliError::from)
                .and_then(|params| {
                    let partition = optimize_partition(&params, t, &settings)?;
                    Ok(mutual_information(&params, &partition)?.mi)
                });
            match point {
                Ok(mi) => {
                    let _ = writeln!(mi_csv, "{t},{snr},{mi:.9}");
                }
                Err(e) => {
                    failed = true;
                    let msg = match e {
                        CliError::Config(m) | CliError::Numerical(m) => m,
                        CliError::KeyMismatch => unreachable!("sweep never compares keys"),
                    };
                    let _ = writeln!(mi_csv, "{t},{snr},ERROR: {msg}");
                }
            }
        }
    }
    let mi_path = resolve(outdir, &args.mi_out);
    write_file(&mi_path, &mi_csv)?;

    // Error rate grid at fixed m.
    let m = args.m;
    let mut err_csv = String::from(
        "# per-slice error rates of the maximum likelihood estimators\n\
         # columns: snr, capacity_bits = log2(1+snr)/2, e_1..e_m\n",
    );
    let _ = write!(err_csv, "snr,capacity_bits");
    for i in 1..=m {
        let _ = write!(err_csv, ",e_{i}");
    }
    err_csv.push('\n');
    for &snr in &snrs {
        let point = ChannelParams::from_snr_with_source(snr, args.sigma_source)
            .map_err(CliError::from)
            .and_then(|params| {
                let partition = optimize_partition(&params, 1 << m, &settings)?;
                let system = SliceSystem::build(SliceDesign::new(params, partition)?)?;
                Ok((params.capacity_bits(), system.profile.error_rates))
            });
        match point {
            Ok((cap, rates)) => {
                let _ = write!(err_csv, "{snr},{cap:.9}");
                for e in rates {
                    let _ = write!(err_csv, ",{e:.9}");
                }
                err_csv.push('\n');
            }
            Err(e) => {
                failed = true;
                let msg = match e {
                    CliError::Config(m) | CliError::Numerical(m) => m,
                    CliError::KeyMismatch => unreachable!("sweep never compares keys"),
                };
                let _ = writeln!(err_csv, "{snr},ERROR: {msg}");
            }
        }
    }
    let err_path = resolve(outdir, &args.errors_out);
    write_file(&err_path, &err_csv)?;

    println!("mutual information grid written to {}", mi_path.display());
    println!("error rate grid written to {}", err_path.display());
    if failed {
        return Err(CliError::Numerical(
            "one or more sweep points failed; partial CSV retained with ERROR markers".into(),
        ));
    }
    Ok(())
}

#[derive(Serialize)]
struct IdentificationCheck {
    strings: usize,
    prefix_bits: u32,
    trials: usize,
    empirical: f64,
    expected: f64,
    binomial_sd: f64,
}

#[derive(Serialize)]
struct LemmasReport {
    identification: Vec<IdentificationCheck>,
    typicality: sliced_ec::TypicalityReport,
}

fn cmd_lemmas(outdir: &Path, args: &LemmasArgs) -> Result<(), CliError> {
    let mut identification = Vec::new();
    for &(n, r) in &[(2usize, 1u32), (9, 3), (100, 7)] {
        let empirical = lemma1_check(n, r, args.identification_trials, args.seed)?;
        let expected = (1.0 - 2f64.powi(-(r as i32))).powi(n as i32 - 1);
        let binomial_sd = (expected * (1.0 - expected) / args.identification_trials as f64).sqrt();
        println!(
            "identification n={n:<3} r={r}: empirical {empirical:.5} vs (1-2^-r)^(n-1) = \
             {expected:.5} (sd {binomial_sd:.5})"
        );
        identification.push(IdentificationCheck {
            strings: n,
            prefix_bits: r,
            trials: args.identification_trials,
            empirical,
            expected,
            binomial_sd,
        });
    }

    let exp = TypicalityExperiment::binary_symmetric(
        args.flip,
        args.dimension,
        args.epsilon,
        args.typicality_trials,
    )?;
    let report = exp.run(derive_seed(args.seed, 3))?;
    println!(
        "typicality (flip {}, d {}, eps {}): r = {}, failure rates {:?}",
        args.flip, args.dimension, args.epsilon, exp.disclosed, report.failure_rates
    );
    println!(
        "  typical trials {} / {}, max list {} (bound {:.1}), failure bound {:.4}",
        report.typical_trials,
        args.typicality_trials,
        report.max_list_size,
        report.list_size_bound,
        report.lemma3_failure_bound
    );

    let full = LemmasReport {
        identification,
        typicality: report,
    };
    if let Some(out) = &args.out {
        let path = resolve(outdir, out);
        write_file(&path, &to_pretty_json(&full))?;
        println!("report written to {}", path.display());
    }
    Ok(())
}
