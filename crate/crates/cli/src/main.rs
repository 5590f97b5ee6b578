use std::path::PathBuf;
use std::process::ExitCode;

use anyhow::{bail, Context, Result};
use clap::{Args, Parser, Subcommand};

use lepage_core::distributions::DistributionSpec;
use lepage_core::io;
use lepage_core::permutation::{self, Mode, NullStatistic, DEFAULT_ENUMERATION_CAP};
use lepage_core::report::{self, Method, ReportFormat, TestInput};
use lepage_core::simulation;
use lepage_core::{lepage_suite, Statistic};

#[derive(Parser)]
#[command(name = "lepage", version, about = "Lepage-type two-sample location-scale tests")]
struct Cli {
    /// Worker threads (defaults to the number of CPUs).
    #[arg(long, global = true)]
    threads: Option<usize>,

    /// Output format: table, csv or json.
    #[arg(long, global = true, default_value = "table")]
    format: ReportFormat,

    /// Decimal places in table and csv output.
    #[arg(long, global = true, default_value_t = report::DEFAULT_PRECISION)]
    precision: usize,

    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Test one dataset with L0..L5.
    Test(TestArgs),
    /// Permutation critical values for continuous data of sizes m, n.
    Critvals(CritArgs),
    /// Size/power study described by a config file.
    Simulate(SimulateArgs),
    /// Monte Carlo mean of the empirical variance of C against its null value.
    ValidateVarc(VarcArgs),
    /// Empirical null quantiles of a statistic against its limiting reference.
    NullQuantiles(QuantileArgs),
}

#[derive(Args)]
struct SeedArg {
    #[arg(long, env = "LEPAGE_SEED", default_value_t = 1)]
    seed: u64,
}

#[derive(Args)]
struct TestArgs {
    /// Built-in dataset: platelet, hormone, thyroid or sleep.
    #[arg(long, conflicts_with = "input", required_unless_present = "input")]
    dataset: Option<String>,

    /// Two-column `group,value` file.
    #[arg(long)]
    input: Option<PathBuf>,

    /// Group label to treat as X (input files only).
    #[arg(long, requires = "input")]
    x_label: Option<String>,

    /// perm, asymptotic or both.
    #[arg(long, default_value = "both")]
    method: Method,

    #[arg(long, default_value_t = 100_000)]
    perms: usize,

    /// Enumerate every label assignment instead of sampling.
    #[arg(long)]
    exact: bool,

    /// Comma-separated subset of L0..L5.
    #[arg(long, value_delimiter = ',', default_values_t = Statistic::ALL.map(|s| s.name().to_string()))]
    stats: Vec<String>,

    #[command(flatten)]
    seed: SeedArg,
}

#[derive(Args)]
struct CritArgs {
    #[arg(long)]
    m: usize,
    #[arg(long)]
    n: usize,
    #[arg(long, default_value_t = 0.05)]
    alpha: f64,
    #[arg(long, default_value_t = 100_000)]
    perms: usize,
    #[arg(long)]
    exact: bool,
    /// Comma-separated subset of L0..L5, Cstar, CstarP.
    #[arg(long, value_delimiter = ',', default_values_t = Statistic::ALL.map(|s| s.name().to_string()))]
    stats: Vec<String>,
    #[command(flatten)]
    seed: SeedArg,
}

#[derive(Args)]
struct SimulateArgs {
    /// Flat TOML config file.
    #[arg(long)]
    config: PathBuf,
}

#[derive(Args)]
struct VarcArgs {
    #[arg(long)]
    m: usize,
    #[arg(long)]
    n: usize,
    #[arg(long, default_value = "logistic")]
    family: String,
    /// Comma-separated family parameters; family defaults when omitted.
    #[arg(long, value_delimiter = ',', allow_hyphen_values = true)]
    params: Vec<f64>,
    #[arg(long, default_value_t = 10_000)]
    reps: usize,
    #[command(flatten)]
    seed: SeedArg,
}

#[derive(Args)]
struct QuantileArgs {
    /// L0..L5, Cstar or CstarP.
    #[arg(long, default_value = "CstarP")]
    stat: String,
    #[arg(long)]
    m: usize,
    #[arg(long)]
    n: usize,
    #[arg(long, default_value = "normal")]
    family: String,
    #[arg(long, value_delimiter = ',', allow_hyphen_values = true)]
    params: Vec<f64>,
    #[arg(long, default_value_t = 10_000)]
    reps: usize,
    #[command(flatten)]
    seed: SeedArg,
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(&cli) {
        Ok(out) => {
            print!("{out}");
            ExitCode::SUCCESS
        }
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::FAILURE
        }
    }
}

fn run(cli: &Cli) -> Result<String> {
    if let Some(threads) = cli.threads {
        if threads == 0 {
            bail!("--threads must be at least 1");
        }
        rayon::ThreadPoolBuilder::new()
            .num_threads(threads)
            .build_global()
            .context("configuring the worker pool")?;
    }
    let report = match &cli.command {
        Command::Test(args) => cmd_test(args)?,
        Command::Critvals(args) => cmd_critvals(args)?,
        Command::Simulate(args) => {
            let config = io::load_sim_config(&args.config)
                .with_context(|| format!("reading {}", args.config.display()))?;
            let result = simulation::run_study(&config)?;
            eprintln!("elapsed: {:.2?}", result.elapsed);
            report::simulate_report(&result)
        }
        Command::ValidateVarc(args) => {
            let spec = DistributionSpec::from_family(&args.family, &args.params)?;
            let v = simulation::validate_var_c(args.m, args.n, &spec, args.reps, args.seed.seed)?;
            report::varc_report(&v, args.seed.seed)
        }
        Command::NullQuantiles(args) => {
            let spec = DistributionSpec::from_family(&args.family, &args.params)?;
            let stat: NullStatistic = args.stat.parse()?;
            let q = simulation::null_quantile_check(stat, args.m, args.n, &spec, args.reps, args.seed.seed)?;
            report::quantile_check_report(&q, args.seed.seed)
        }
    };
    Ok(report.render(cli.format, cli.precision))
}

fn permutation_mode(exact: bool, perms: usize, seed: u64) -> Result<Mode> {
    if exact {
        return Ok(Mode::Exact {
            cap: DEFAULT_ENUMERATION_CAP.max(perms as u64),
        });
    }
    if perms == 0 {
        bail!("--perms must be at least 1");
    }
    Ok(Mode::MonteCarlo {
        replications: perms,
        seed,
    })
}

fn cmd_test(args: &TestArgs) -> Result<report::Report> {
    let (source, x_label, y_label, sample) = match (&args.dataset, &args.input) {
        (Some(name), _) => {
            let d = io::builtin_dataset(name)?;
            let sample = d.sample();
            (format!("{}: {}", d.name, d.note), d.x_label.to_string(), d.y_label.to_string(), sample)
        }
        (None, Some(path)) => {
            let l = io::load_two_column(path, args.x_label.as_deref())?;
            (path.display().to_string(), l.x_label, l.y_label, l.sample)
        }
        (None, None) => bail!("either --dataset or --input is required"),
    };
    let stats = args
        .stats
        .iter()
        .map(|s| s.parse::<Statistic>())
        .collect::<lepage_core::Result<Vec<_>>>()?;
    let suite = lepage_suite(&sample);
    let nulls = if args.method.permutation() {
        let targets: Vec<NullStatistic> = stats.iter().map(|&s| s.into()).collect();
        let mode = permutation_mode(args.exact, args.perms, args.seed.seed)?;
        Some(permutation::permutation_nulls(&sample, &targets, mode)?)
    } else {
        None
    };
    Ok(report::test_report(&TestInput {
        source: &source,
        x_label: &x_label,
        y_label: &y_label,
        sample: &sample,
        suite: &suite,
        stats: &stats,
        method: args.method,
        nulls: nulls.as_deref(),
    }))
}

fn cmd_critvals(args: &CritArgs) -> Result<report::Report> {
    let stats = args
        .stats
        .iter()
        .map(|s| s.parse::<NullStatistic>())
        .collect::<lepage_core::Result<Vec<_>>>()?;
    let mode = permutation_mode(args.exact, args.perms, args.seed.seed)?;
    let nulls = permutation::untied_nulls(args.m, args.n, &stats, mode)?;
    Ok(report::critvals_report(args.m, args.n, args.alpha, &nulls)?)
}
