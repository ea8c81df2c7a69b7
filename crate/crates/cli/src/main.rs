//! `cpolar`: construct, simulate, verify and analyze compound polar codes.
//!
//! Exit status is 0 on success, 1 when `verify` finds a failing check and 2
//! for configuration, input or I/O errors.

mod config;

use std::fs;
use std::io::Write;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use anyhow::{bail, Context, Result};
use clap::{Args, Parser, Subcommand};

use compound_polar::bicm::{construct_compound, construct_separated, CompoundScheme, LinkConfig, SeparatedScheme};
use compound_polar::channel::Dmc;
use compound_polar::reliability::{
    bec_z_profile, brute_force_bit_channel, select_information_set, threshold_good_set, union_bound,
    ProfileKind, ReliabilityProfile,
};
use compound_polar::sim::{derive_seed, SchemeKind, SimRecord};
use compound_polar::transform::CompoundSpec;
use compound_polar::verify::{self, Level, VerifyOptions};

use config::{env_overrides, Construction, Overrides, RunConfig};

const CONSTRUCT_DOMAIN: u64 = 1;
const SIMULATE_DOMAIN: u64 = 2;

const PROFILE_FILE: &str = "profile.csv";
const SPEC_FILE: &str = "spec.txt";
const FIRST_SPEC_FILE: &str = "spec1.txt";
const SECOND_SPEC_FILE: &str = "spec2.txt";

#[derive(Parser)]
#[command(name = "cpolar", version, about = "Compound polar codes over multi-channels")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Build a reliability profile and frozen set, written to the spec directory.
    Construct(RunArgs),
    /// Sweep Eb/N0 over the 16-QAM link and emit one CSV row per point.
    Simulate(RunArgs),
    /// Run the oracle suite.
    Verify(VerifyArgs),
    /// Print Z / I tables for a channel or an erasure-channel spec.
    Analyze(AnalyzeArgs),
}

#[derive(Args, Default)]
struct RunArgs {
    /// `key = value` configuration file; flags override it.
    #[arg(long)]
    config: Option<PathBuf>,
    /// compound or separated.
    #[arg(long)]
    scheme: Option<String>,
    /// Block length N = l * 2^n.
    #[arg(short = 'N', long)]
    block_length: Option<String>,
    #[arg(long)]
    rate: Option<String>,
    /// Number of sub-channels.
    #[arg(short, long)]
    l: Option<String>,
    /// Comma-separated Eb/N0 points in dB.
    #[arg(long, allow_hyphen_values = true)]
    ebn0: Option<String>,
    /// exact_bec or mc_genie.
    #[arg(long)]
    construction: Option<String>,
    /// Eb/N0 (mc_genie) or erasure rate (exact_bec) used for construction.
    #[arg(long, allow_hyphen_values = true)]
    construction_point: Option<String>,
    /// Comma-separated erasure rates, one per sub-channel (exact_bec).
    #[arg(long)]
    epsilons: Option<String>,
    #[arg(long)]
    construction_trials: Option<String>,
    /// Maximum trials per Eb/N0 point.
    #[arg(long)]
    trials: Option<String>,
    /// Stop a point after this many frame errors ("none" to disable).
    #[arg(long)]
    target_errors: Option<String>,
    #[arg(long)]
    seed: Option<String>,
    /// Directory holding profile and spec files.
    #[arg(long)]
    spec_dir: Option<String>,
    /// CSV output path for `simulate` (stdout when absent).
    #[arg(short, long)]
    output: Option<String>,
}

#[derive(Args)]
struct VerifyArgs {
    #[arg(long, default_value = "fast")]
    level: String,
    #[arg(long)]
    seed: Option<u64>,
    /// Also write the report as JSON.
    #[arg(long)]
    json: Option<PathBuf>,
}

#[derive(Args)]
struct AnalyzeArgs {
    /// Channel table file: "M" then two rows of M probabilities.
    #[arg(long, conflicts_with_all = ["bec", "bsc", "spec"])]
    channel: Option<PathBuf>,
    #[arg(long, conflicts_with_all = ["bsc", "spec"])]
    bec: Option<f64>,
    #[arg(long, conflicts_with = "spec")]
    bsc: Option<f64>,
    /// Spec file, analysed over erasure sub-channels given by --epsilons.
    #[arg(long, requires = "epsilons")]
    spec: Option<PathBuf>,
    /// Comma-separated erasure rates, one per sub-channel.
    #[arg(long)]
    epsilons: Option<String>,
    /// Polarize the channel to this depth (exact enumeration, depth <= 3).
    #[arg(long, default_value_t = 0)]
    depth: u32,
    /// Exponent for the good-set threshold 2^(-N^beta) / N.
    #[arg(long, default_value_t = 0.45)]
    beta: f64,
}

enum Outcome {
    Success,
    Failed,
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let result = match cli.command {
        Command::Construct(args) => load_config(&args).and_then(|c| construct(&c)),
        Command::Simulate(args) => load_config(&args).and_then(|c| simulate(&c)),
        Command::Verify(args) => run_verify(&args),
        Command::Analyze(args) => analyze(&args),
    };
    match result {
        Ok(Outcome::Success) => ExitCode::SUCCESS,
        Ok(Outcome::Failed) => ExitCode::from(1),
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::from(2)
        }
    }
}

fn load_config(args: &RunArgs) -> Result<RunConfig> {
    let file = match &args.config {
        Some(path) => {
            let text = fs::read_to_string(path).with_context(|| format!("reading {}", path.display()))?;
            Overrides::parse_file(&text).with_context(|| format!("in {}", path.display()))?
        }
        None => Overrides::default(),
    };
    let mut flags = Overrides::default();
    let pairs = [
        ("scheme", &args.scheme),
        ("block_length", &args.block_length),
        ("rate", &args.rate),
        ("l", &args.l),
        ("ebn0", &args.ebn0),
        ("construction", &args.construction),
        ("construction_point", &args.construction_point),
        ("epsilons", &args.epsilons),
        ("construction_trials", &args.construction_trials),
        ("trials", &args.trials),
        ("target_errors", &args.target_errors),
        ("seed", &args.seed),
        ("spec_dir", &args.spec_dir),
        ("output", &args.output),
    ];
    for (key, value) in pairs {
        if let Some(v) = value {
            flags.set(key, v)?;
        }
    }
    file.merge(env_overrides()?).merge(flags).build()
}

fn write_file(path: &Path, contents: &str) -> Result<()> {
    fs::write(path, contents).with_context(|| format!("writing {}", path.display()))
}

fn read_spec(path: &Path) -> Result<CompoundSpec> {
    let text = fs::read_to_string(path).with_context(|| format!("reading {}", path.display()))?;
    CompoundSpec::from_text(&text).with_context(|| format!("parsing {}", path.display()))
}

fn construct(c: &RunConfig) -> Result<Outcome> {
    fs::create_dir_all(&c.spec_dir).with_context(|| format!("creating {}", c.spec_dir.display()))?;
    let seed = derive_seed(c.seed, CONSTRUCT_DOMAIN);
    let n = c.block_length;
    match (c.construction, c.scheme) {
        (Construction::ExactBec, SchemeKind::Compound) => {
            let depth = (n / c.l).trailing_zeros();
            let spec = if c.l == 1 {
                CompoundSpec::polar(depth)
            } else if c.l.is_power_of_two() {
                CompoundSpec::power_of_two(c.l.trailing_zeros(), depth)?
            } else {
                bail!("exact_bec construction needs l to be a power of two");
            };
            let eps = spec.per_position(&c.erasure_rates())?;
            let profile = bec_z_profile(&eps, &spec)?;
            let info = select_information_set(&profile, c.dimension())?;
            let bound = union_bound(&profile, &info);
            let spec = spec.with_information_set(&info)?;
            write_file(&c.spec_dir.join(PROFILE_FILE), &profile.to_csv())?;
            write_file(&c.spec_dir.join(SPEC_FILE), &spec.to_text())?;
            println!("N = {n}, k = {}, union bound {bound:.6e}", spec.dimension());
        }
        (Construction::ExactBec, SchemeKind::Separated) => {
            bail!("the separated scheme is built by mc_genie construction over 16-QAM")
        }
        (Construction::McGenie, SchemeKind::Compound) => {
            if c.l != 2 {
                bail!("the 16-QAM compound scheme needs l = 2");
            }
            let (profile, spec) = construct_compound(n, c.rate, c.construction_point, c.construction_trials, seed)?;
            write_file(&c.spec_dir.join(PROFILE_FILE), &profile.to_csv())?;
            write_file(&c.spec_dir.join(SPEC_FILE), &spec.to_text())?;
            println!(
                "N = {n}, k = {}, estimated error sum {:.6e}",
                spec.dimension(),
                union_bound(&profile, &spec.information_set())
            );
        }
        (Construction::McGenie, SchemeKind::Separated) => {
            let design = construct_separated(n, c.rate, c.construction_point, c.construction_trials, seed)?;
            write_file(&c.spec_dir.join(PROFILE_FILE), &design.profile.to_csv())?;
            write_file(&c.spec_dir.join(FIRST_SPEC_FILE), &design.first.to_text())?;
            write_file(&c.spec_dir.join(SECOND_SPEC_FILE), &design.second.to_text())?;
            let (k1, k2) = design.dimensions();
            let (r1, r2) = design.rates();
            println!("N = {n}, k1 = {k1}, k2 = {k2}, rates ({r1:.4}, {r2:.4})");
        }
    }
    Ok(Outcome::Success)
}

fn simulate(c: &RunConfig) -> Result<Outcome> {
    let seed = derive_seed(c.seed, SIMULATE_DOMAIN);
    let rule = c.stopping_rule();
    let mut records = Vec::new();
    match c.scheme {
        SchemeKind::Compound => {
            let spec = read_spec(&c.spec_dir.join(SPEC_FILE))?;
            let n = spec.block_length();
            let rate = spec.dimension() as f64 / n as f64;
            for &db in &c.ebn0_db {
                let scheme = CompoundScheme::new(spec.clone(), LinkConfig::new(db, rate)?)?;
                let counts = scheme.simulate(rule, seed)?;
                records.push(SimRecord::new(c.scheme, n, rate, db, counts, c.seed));
                report_point(records.last().unwrap());
            }
        }
        SchemeKind::Separated => {
            let first = read_spec(&c.spec_dir.join(FIRST_SPEC_FILE))?;
            let second = read_spec(&c.spec_dir.join(SECOND_SPEC_FILE))?;
            let n = first.block_length() + second.block_length();
            let rate = (first.dimension() + second.dimension()) as f64 / n as f64;
            for &db in &c.ebn0_db {
                let scheme = SeparatedScheme::new(first.clone(), second.clone(), LinkConfig::new(db, rate)?)?;
                let counts = scheme.simulate(rule, seed)?;
                records.push(SimRecord::new(c.scheme, n, rate, db, counts, c.seed));
                report_point(records.last().unwrap());
            }
        }
    }
    let mut csv = String::from(SimRecord::CSV_HEADER);
    csv.push('\n');
    for r in &records {
        csv.push_str(&r.to_csv_row());
        csv.push('\n');
    }
    match &c.output {
        Some(path) => write_file(path, &csv)?,
        None => std::io::stdout().write_all(csv.as_bytes())?,
    }
    Ok(Outcome::Success)
}

fn report_point(r: &SimRecord) {
    eprintln!(
        "{} {:.2} dB: {} / {} frames, BLER {:.3e} [{:.3e}, {:.3e}]",
        r.scheme, r.ebn0_db, r.frame_errors, r.trials, r.bler, r.ci95.0, r.ci95.1
    );
}

fn run_verify(args: &VerifyArgs) -> Result<Outcome> {
    let level: Level = args.level.parse()?;
    let seed = match args.seed {
        Some(s) => s,
        None => env_overrides()?.build()?.seed,
    };
    let report = verify::run(&VerifyOptions {
        level,
        seed,
        ..VerifyOptions::default()
    });
    print!("{}", report.to_text());
    if let Some(path) = &args.json {
        write_file(path, &serde_json::to_string_pretty(&report)?)?;
    }
    Ok(if report.passed() { Outcome::Success } else { Outcome::Failed })
}

fn parse_rates(list: &str) -> Result<Vec<f64>> {
    list.split(',')
        .map(|v| v.trim().parse::<f64>().with_context(|| format!("invalid erasure rate {v:?}")))
        .collect()
}

fn analyze(args: &AnalyzeArgs) -> Result<Outcome> {
    if let Some(path) = &args.spec {
        let spec = read_spec(path)?;
        let rates = parse_rates(args.epsilons.as_deref().unwrap_or_default())?;
        let profile = bec_z_profile(&spec.per_position(&rates)?, &spec)?;
        print_profile(&profile, &spec.frozen_set(), args.beta)?;
        println!(
            "information set size {}, union bound {:.6e}",
            spec.dimension(),
            union_bound(&profile, &spec.information_set())
        );
        return Ok(Outcome::Success);
    }
    let w = if let Some(path) = &args.channel {
        let text = fs::read_to_string(path).with_context(|| format!("reading {}", path.display()))?;
        text.parse::<Dmc>().with_context(|| format!("parsing {}", path.display()))?
    } else if let Some(e) = args.bec {
        Dmc::bec(e)?
    } else if let Some(p) = args.bsc {
        Dmc::bsc(p)?
    } else {
        bail!("give one of --channel, --bec, --bsc or --spec");
    };
    let stats = w.stats();
    println!(
        "outputs {}, Z {:.12}, I {:.12}, symmetric {}, Z-I bounds hold {}",
        w.num_outputs(),
        stats.z,
        stats.capacity,
        w.is_symmetric(),
        stats.satisfies_z_capacity_bounds(1e-9)
    );
    if args.depth > 0 {
        if args.depth > 3 {
            bail!("exact polarization is limited to depth 3");
        }
        let spec = CompoundSpec::polar(args.depth);
        let channels = vec![w; spec.block_length()];
        let mut z = Vec::new();
        println!("index,Z,I");
        for i in 0..spec.block_length() {
            let s = brute_force_bit_channel(&channels, &spec, i)?.stats();
            println!("{i},{:.12},{:.12}", s.z, s.capacity);
            z.push(s.z.clamp(0.0, 1.0));
        }
        let profile = ReliabilityProfile::new(z, ProfileKind::ExactZ, stats.z)?;
        let good = threshold_good_set(&profile, args.beta)?;
        println!("good set (beta = {}): {good:?}", args.beta);
    }
    Ok(Outcome::Success)
}

fn print_profile(profile: &ReliabilityProfile, frozen: &[usize], beta: f64) -> Result<()> {
    println!("index,Z,frozen");
    for (i, z) in profile.scores.iter().enumerate() {
        println!("{i},{z:.12e},{}", frozen.binary_search(&i).is_ok());
    }
    println!("good set (beta = {beta}): {:?}", threshold_good_set(profile, beta)?);
    Ok(())
}
