//! Command-line front end for the `illposed` toolkit.
//!
//! Subcommands: `bench` runs a seeded Monte-Carlo comparison of
//! regularization methods and emits a CSV or markdown report, `props`
//! verifies the method-comparison claims on seeded random spectra,
//! `filters` dumps filter factors for a test problem, and `problem`
//! exports a test problem's matrices as plain text.
//!
//! Exit codes: 0 on success, 2 for usage errors (unknown flags or
//! malformed values, handled by the parser), 1 with a one-line
//! diagnostic for configuration or runtime errors.

use std::collections::BTreeMap;
use std::fs;
use std::path::{Path, PathBuf};

use anyhow::{anyhow, bail, Context, Result};
use clap::{Args, Parser, Subcommand};

use illposed::analysis::verify_proposition_suite;
use illposed::bench::{
    emit_report, run_experiment, BasisKind, ExperimentConfig, NoiseKind, ReportFormat,
    SelectionMode,
};
use illposed::filters::{cut_truncation_index, filter_factors_csv, MethodFamily, RegMethod};
use illposed::linalg::svd;
use illposed::problems::{matrix_to_text, vector_to_text, ProblemKind};

#[derive(Parser)]
#[command(
    name = "illposed",
    version,
    about = "Regularization methods for discrete ill-posed least-squares problems"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Run a seeded Monte-Carlo benchmark and emit a report
    Bench(BenchArgs),
    /// Check the method-comparison claims on seeded random spectra
    Props(PropsArgs),
    /// Dump filter factors for a test problem at a given mu
    Filters(FiltersArgs),
    /// Export a test problem's matrix, exact solution, and right-hand side
    Problem(ProblemArgs),
}

#[derive(Args)]
struct BenchArgs {
    /// Flat `key = value` config file mirroring the flags below; explicit
    /// flags override file entries
    #[arg(long, value_name = "PATH")]
    config: Option<PathBuf>,
    /// Test problem to benchmark
    #[arg(long, value_parser = parse_problem)]
    problem: Option<ProblemKind>,
    /// Problem size
    #[arg(long)]
    n: Option<usize>,
    /// Comma-separated relative noise levels, each in (0, 1)
    #[arg(long, value_name = "L1,L2,...", value_delimiter = ',')]
    noise_levels: Option<Vec<f64>>,
    /// Noise model: white or colored
    #[arg(long, value_parser = parse_noise_token)]
    noise: Option<NoiseToken>,
    /// Colored-noise decay exponent (colored noise only)
    #[arg(long)]
    alpha: Option<f64>,
    /// Colored-noise basis: svd, randorth, or dct (colored noise only)
    #[arg(long, value_parser = parse_basis)]
    basis: Option<BasisKind>,
    /// Comma-separated methods: tsvd, tik, frmod, shiftk, cutk, scaled,
    /// scaledk, theta:<value>
    #[arg(long, value_name = "M1,M2,...", value_delimiter = ',', value_parser = parse_family)]
    methods: Option<Vec<MethodFamily>>,
    /// Monte-Carlo trials per noise level
    #[arg(long)]
    runs: Option<usize>,
    /// Discrepancy-principle safety factor (at least 1)
    #[arg(long)]
    eta: Option<f64>,
    /// Base RNG seed
    #[arg(long)]
    seed: Option<u64>,
    /// Parameter selection: discrepancy or optimal
    #[arg(long, value_parser = parse_mode)]
    mode: Option<SelectionMode>,
    /// Report format: csv or md
    #[arg(long, value_parser = parse_format)]
    format: Option<ReportFormat>,
    /// Output file (stdout when absent)
    #[arg(long, value_name = "PATH")]
    out: Option<PathBuf>,
}

#[derive(Args)]
struct PropsArgs {
    /// Base RNG seed
    #[arg(long, default_value_t = 0)]
    seed: u64,
    /// Number of random spectra to check
    #[arg(long, default_value_t = 100)]
    trials: usize,
    /// Singular values per spectrum
    #[arg(long, default_value_t = 30)]
    n: usize,
}

#[derive(Args)]
struct FiltersArgs {
    /// Test problem whose spectrum to use
    #[arg(long, value_parser = parse_problem, default_value = "phillips")]
    problem: ProblemKind,
    /// Problem size
    #[arg(long, default_value_t = 200)]
    n: usize,
    /// Regularization parameter
    #[arg(long)]
    mu: f64,
    /// Comma-separated methods (defaults to every family); tsvd truncates
    /// at the number of singular values above mu
    #[arg(long, value_name = "M1,M2,...", value_delimiter = ',', value_parser = parse_family)]
    methods: Option<Vec<MethodFamily>>,
    /// Output file (stdout when absent)
    #[arg(long, value_name = "PATH")]
    out: Option<PathBuf>,
}

#[derive(Args)]
struct ProblemArgs {
    /// Test problem to export
    #[arg(long, value_parser = parse_problem)]
    problem: ProblemKind,
    /// Problem size
    #[arg(long, default_value_t = 200)]
    n: usize,
    /// Directory for the exported text files
    #[arg(long, value_name = "DIR", default_value = ".")]
    out_dir: PathBuf,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
enum NoiseToken {
    White,
    Colored,
}

fn parse_problem(s: &str) -> Result<ProblemKind, String> {
    ProblemKind::parse(s)
        .ok_or_else(|| format!("unknown problem '{s}' (expected phillips, shaw, deriv2, or heat)"))
}

fn parse_noise_token(s: &str) -> Result<NoiseToken, String> {
    match s {
        "white" => Ok(NoiseToken::White),
        "colored" => Ok(NoiseToken::Colored),
        _ => Err(format!(
            "unknown noise model '{s}' (expected white or colored)"
        )),
    }
}

fn parse_basis(s: &str) -> Result<BasisKind, String> {
    BasisKind::parse(s)
        .ok_or_else(|| format!("unknown basis '{s}' (expected svd, randorth, or dct)"))
}

fn parse_family(s: &str) -> Result<MethodFamily, String> {
    MethodFamily::parse(s).ok_or_else(|| {
        format!(
            "unknown method '{s}' (expected tsvd, tik, frmod, shiftk, cutk, scaled, scaledk, \
             or theta:<value> with value in [0, 1])"
        )
    })
}

fn parse_mode(s: &str) -> Result<SelectionMode, String> {
    match s {
        "discrepancy" => Ok(SelectionMode::Discrepancy),
        "optimal" => Ok(SelectionMode::Optimal),
        _ => Err(format!(
            "unknown mode '{s}' (expected discrepancy or optimal)"
        )),
    }
}

fn parse_format(s: &str) -> Result<ReportFormat, String> {
    ReportFormat::parse(s).ok_or_else(|| format!("unknown format '{s}' (expected csv or md)"))
}

// Flat `key = value` file; `#` starts a comment, later entries win.
fn read_config_file(path: &Path) -> Result<BTreeMap<String, String>> {
    let text = fs::read_to_string(path)
        .with_context(|| format!("cannot read config file {}", path.display()))?;
    let mut map = BTreeMap::new();
    for (lineno, raw) in text.lines().enumerate() {
        let line = raw.split('#').next().unwrap_or("").trim();
        if line.is_empty() {
            continue;
        }
        let (key, value) = line.split_once('=').ok_or_else(|| {
            anyhow!(
                "{}:{}: expected 'key = value', got '{raw}'",
                path.display(),
                lineno + 1
            )
        })?;
        map.insert(key.trim().to_string(), value.trim().to_string());
    }
    const KNOWN: [&str; 13] = [
        "problem",
        "n",
        "noise-levels",
        "noise",
        "alpha",
        "basis",
        "methods",
        "runs",
        "eta",
        "seed",
        "mode",
        "format",
        "out",
    ];
    for key in map.keys() {
        if !KNOWN.contains(&key.as_str()) {
            bail!("{}: unknown config key '{key}'", path.display());
        }
    }
    Ok(map)
}

// Fills each unset flag from the config map, parsing values with the same
// parsers the flags use.
fn apply_config_file(args: &mut BenchArgs, map: &BTreeMap<String, String>) -> Result<()> {
    fn fill<T>(
        slot: &mut Option<T>,
        map: &BTreeMap<String, String>,
        key: &str,
        parse: impl Fn(&str) -> Result<T>,
    ) -> Result<()> {
        if slot.is_none() {
            if let Some(raw) = map.get(key) {
                *slot = Some(parse(raw).with_context(|| format!("config key '{key}'"))?);
            }
        }
        Ok(())
    }
    fn numeric<T: std::str::FromStr>(raw: &str) -> Result<T>
    where
        T::Err: std::error::Error + Send + Sync + 'static,
    {
        raw.parse::<T>().map_err(|e| anyhow!("{e}: '{raw}'"))
    }

    fill(&mut args.problem, map, "problem", |s| {
        parse_problem(s).map_err(|e| anyhow!(e))
    })?;
    fill(&mut args.n, map, "n", numeric::<usize>)?;
    fill(&mut args.noise_levels, map, "noise-levels", |s| {
        s.split(',').map(|t| numeric::<f64>(t.trim())).collect()
    })?;
    fill(&mut args.noise, map, "noise", |s| {
        parse_noise_token(s).map_err(|e| anyhow!(e))
    })?;
    fill(&mut args.alpha, map, "alpha", numeric::<f64>)?;
    fill(&mut args.basis, map, "basis", |s| {
        parse_basis(s).map_err(|e| anyhow!(e))
    })?;
    fill(&mut args.methods, map, "methods", |s| {
        s.split(',')
            .map(|t| parse_family(t.trim()).map_err(|e| anyhow!(e)))
            .collect()
    })?;
    fill(&mut args.runs, map, "runs", numeric::<usize>)?;
    fill(&mut args.eta, map, "eta", numeric::<f64>)?;
    fill(&mut args.seed, map, "seed", numeric::<u64>)?;
    fill(&mut args.mode, map, "mode", |s| {
        parse_mode(s).map_err(|e| anyhow!(e))
    })?;
    fill(&mut args.format, map, "format", |s| {
        parse_format(s).map_err(|e| anyhow!(e))
    })?;
    fill(&mut args.out, map, "out", |s| Ok(PathBuf::from(s)))?;
    Ok(())
}

fn write_or_print(out: Option<&Path>, text: &str) -> Result<()> {
    match out {
        Some(path) => {
            fs::write(path, text).with_context(|| format!("cannot write {}", path.display()))?
        }
        None => print!("{text}"),
    }
    Ok(())
}

fn run_bench(mut args: BenchArgs) -> Result<()> {
    if let Some(path) = args.config.take() {
        let map = read_config_file(&path)?;
        apply_config_file(&mut args, &map)?;
    }

    let problem = args.problem.unwrap_or(ProblemKind::Phillips);
    let mut config = ExperimentConfig::new(problem);
    if let Some(n) = args.n {
        config.n = n;
    }
    if let Some(levels) = args.noise_levels {
        config.noise_levels = levels;
    }
    let noise_token = args.noise.unwrap_or(NoiseToken::White);
    config.noise = match noise_token {
        NoiseToken::White => {
            if args.alpha.is_some() || args.basis.is_some() {
                bail!("--alpha and --basis require --noise colored");
            }
            NoiseKind::White
        }
        NoiseToken::Colored => NoiseKind::Colored {
            alpha: args.alpha.unwrap_or(1.0),
            basis: args.basis.unwrap_or(BasisKind::Svd),
        },
    };
    if let Some(methods) = args.methods {
        config.methods = methods;
    }
    if let Some(runs) = args.runs {
        config.runs = runs;
    }
    if let Some(eta) = args.eta {
        config.eta = eta;
    }
    if let Some(seed) = args.seed {
        config.seed = seed;
    }
    if let Some(mode) = args.mode {
        config.mode = mode;
    }

    let report = run_experiment(&config)?;
    let text = emit_report(&report, args.format.unwrap_or(ReportFormat::Csv));
    write_or_print(args.out.as_deref(), &text)
}

fn run_props(args: PropsArgs) -> Result<()> {
    let outcome = verify_proposition_suite(args.seed, args.trials, args.n)?;
    println!("claim,pass,fail,na");
    for (id, tally) in &outcome.tallies {
        println!(
            "{id},{},{},{}",
            tally.pass, tally.fail, tally.not_applicable
        );
    }
    let (pass, fail, na) = outcome.tallies.iter().fold((0, 0, 0), |acc, (_, t)| {
        (acc.0 + t.pass, acc.1 + t.fail, acc.2 + t.not_applicable)
    });
    println!(
        "# trials {} checks {} pass {pass} fail {fail} na {na}",
        outcome.trials,
        pass + fail + na
    );
    if !outcome.all_pass() {
        for (trial, mu, theta, check) in &outcome.failures {
            eprintln!(
                "failed: {} at trial {trial} (mu {mu:e}, theta {theta}): lhs {:e} rhs {:e}",
                check.id, check.lhs, check.rhs
            );
        }
        bail!("{} claim check(s) failed", outcome.failures.len());
    }
    Ok(())
}

fn run_filters(args: FiltersArgs) -> Result<()> {
    let problem = args.problem.build(args.n)?;
    let f = svd(&problem.a)?;
    let sigma = f.sigma.as_slice();
    let families = args.methods.unwrap_or_else(|| {
        vec![
            MethodFamily::TikhonovIdentity,
            MethodFamily::Tsvd,
            MethodFamily::FrMod,
            MethodFamily::ShiftK,
            MethodFamily::CutK,
            MethodFamily::Scaled,
            MethodFamily::ScaledK,
        ]
    });
    let tsvd_k = cut_truncation_index(sigma, args.mu);
    let methods: Vec<RegMethod> = families
        .iter()
        .map(|fam| fam.instantiate(args.mu, tsvd_k))
        .collect();
    let csv = filter_factors_csv(sigma, &methods)?;
    write_or_print(args.out.as_deref(), &csv)
}

fn run_problem(args: ProblemArgs) -> Result<()> {
    let problem = args.problem.build(args.n)?;
    fs::create_dir_all(&args.out_dir)
        .with_context(|| format!("cannot create {}", args.out_dir.display()))?;
    let stem = args.out_dir.join(problem.name);
    let files = [
        ("a", matrix_to_text(&problem.a)),
        ("x", vector_to_text(&problem.x_true)),
        ("b", vector_to_text(&problem.b_true)),
    ];
    for (suffix, text) in files {
        let path = stem.with_file_name(format!("{}_{suffix}.txt", problem.name));
        fs::write(&path, text).with_context(|| format!("cannot write {}", path.display()))?;
        println!("{}", path.display());
    }
    Ok(())
}

fn main() {
    let cli = Cli::parse();
    let result = match cli.command {
        Command::Bench(args) => run_bench(args),
        Command::Props(args) => run_props(args),
        Command::Filters(args) => run_filters(args),
        Command::Problem(args) => run_problem(args),
    };
    if let Err(err) = result {
        eprintln!("error: {err:#}");
        std::process::exit(1);
    }
}
