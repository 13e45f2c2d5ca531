//! `ksdrift`: goodness-of-fit testing for partitioned datasets from the
//! command line.
//!
//! Exit codes are scriptable: 0 means the run completed and the null was
//! kept, 1 means the null was rejected, 2 is an I/O failure, 3 is a data
//! parse failure, 64 is a usage error.

mod ingest;
mod report;

use std::fmt;
use std::fs::File;
use std::io::{self, Write};
use std::path::PathBuf;
use std::time::Instant;

use clap::{Args, Parser, Subcommand};

use ksdrift::{
    estimate_power, ks_one_sample, ks_one_sample_uniform, write_power_csv, ContinuousDist,
    EmpiricalCdf, Method, SimulationConfig,
};

use ingest::{ingest, DatasetSpec, FileFormat, MissingPolicy};
use report::RunReport;

const EXIT_KEPT: i32 = 0;
const EXIT_REJECTED: i32 = 1;
const EXIT_IO: i32 = 2;
const EXIT_PARSE: i32 = 3;
const EXIT_USAGE: i32 = 64;

#[derive(Debug)]
pub enum CliError {
    Usage(String),
    Io {
        path: PathBuf,
        source: io::Error,
    },
    Parse {
        path: PathBuf,
        line: u64,
        message: String,
    },
    Core(ksdrift::Error),
}

impl fmt::Display for CliError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            CliError::Usage(msg) => write!(f, "{msg}"),
            CliError::Io { path, source } => write!(f, "{}: {source}", path.display()),
            CliError::Parse {
                path,
                line,
                message,
            } => write!(f, "{}:{line}: {message}", path.display()),
            CliError::Core(e) => write!(f, "{e}"),
        }
    }
}

impl From<ksdrift::Error> for CliError {
    fn from(e: ksdrift::Error) -> Self {
        CliError::Core(e)
    }
}

impl CliError {
    fn exit_code(&self) -> i32 {
        match self {
            CliError::Usage(_) => EXIT_USAGE,
            CliError::Io { .. } => EXIT_IO,
            CliError::Parse { .. } => EXIT_PARSE,
            CliError::Core(e) => match e {
                ksdrift::Error::Io(_) => EXIT_IO,
                ksdrift::Error::MalformedFile { .. }
                | ksdrift::Error::EmptySample
                | ksdrift::Error::NonFiniteValue { .. } => EXIT_PARSE,
                _ => EXIT_USAGE,
            },
        }
    }
}

#[derive(Parser)]
#[command(
    name = "ksdrift",
    version,
    about = "Kolmogorov-Smirnov drift checks over partitioned data",
    long_about = "Build a reference distribution once from partitioned data, persist it, and \
                  test comparison windows against it without re-sorting the reference. Also \
                  ships the classic one- and two-sample KS tests and a Monte-Carlo power \
                  simulator."
)]
struct Cli {
    /// Worker threads for ingestion and simulation (default: all cores).
    #[arg(long, global = true)]
    threads: Option<usize>,

    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Build a reference ecdf from partition files and persist it.
    Build(BuildArgs),
    /// Run a hypothesis test; exit code 1 signals rejection.
    #[command(subcommand)]
    Test(TestCommand),
    /// Estimate empirical power curves by Monte-Carlo simulation.
    Simulate(SimulateArgs),
}

#[derive(Args)]
struct IngestOpts {
    /// Input file format.
    #[arg(long, value_enum, default_value = "lines")]
    format: FileFormat,
    /// CSV column: header name, or all-digits positional index (then the
    /// file is read without a header row).
    #[arg(long)]
    column: Option<String>,
    /// What to do with non-numeric tokens.
    #[arg(long, value_enum, default_value = "error")]
    missing: MissingPolicy,
}

impl IngestOpts {
    fn spec(&self, paths: &[PathBuf]) -> DatasetSpec {
        DatasetSpec {
            paths: paths.to_vec(),
            format: self.format,
            column: self.column.clone(),
            missing: self.missing,
        }
    }
}

#[derive(Args)]
struct BuildArgs {
    /// Partition files; each is parsed and sorted independently.
    #[arg(required = true)]
    inputs: Vec<PathBuf>,
    /// Destination for the persisted `ecdf v1` file.
    #[arg(long)]
    out: PathBuf,
    #[command(flatten)]
    ingest: IngestOpts,
}

#[derive(Subcommand)]
enum TestCommand {
    /// Test one dataset against a fully specified distribution.
    OneSample(OneSampleArgs),
    /// Classic two-sample test of two datasets.
    TwoSample(TwoSampleArgs),
    /// Transform a comparison dataset through a reference ecdf and test
    /// the mapped values for uniformity.
    Transform(TransformArgs),
}

#[derive(Args)]
struct OneSampleArgs {
    /// Dataset files.
    #[arg(required = true)]
    inputs: Vec<PathBuf>,
    /// Null distribution: uniform01, normal:MU,SIGMA or exponential:RATE.
    #[arg(long)]
    f0: String,
    #[arg(long, default_value_t = 0.05)]
    alpha: f64,
    #[command(flatten)]
    ingest: IngestOpts,
}

#[derive(Args)]
struct TwoSampleArgs {
    /// Files of the first sample.
    #[arg(long = "x", required = true, num_args = 1..)]
    x: Vec<PathBuf>,
    /// Files of the second sample.
    #[arg(long = "y", required = true, num_args = 1..)]
    y: Vec<PathBuf>,
    #[arg(long, default_value_t = 0.05)]
    alpha: f64,
    #[command(flatten)]
    ingest: IngestOpts,
}

#[derive(Args)]
struct TransformArgs {
    /// Raw reference partition files (mutually exclusive with
    /// --reference-ecdf).
    #[arg(long = "reference", num_args = 1.., conflicts_with = "reference_ecdf")]
    reference: Vec<PathBuf>,
    /// A persisted `ecdf v1` reference file.
    #[arg(long)]
    reference_ecdf: Option<PathBuf>,
    /// Comparison dataset files.
    #[arg(long = "comparison", required = true, num_args = 1..)]
    comparison: Vec<PathBuf>,
    #[arg(long, default_value_t = 0.05)]
    alpha: f64,
    /// Break ecdf-step ties by dithering the mapped values.
    #[arg(long)]
    dither: bool,
    /// Dithering seed; omitted means one is drawn and reported.
    #[arg(long)]
    seed: Option<u64>,
    #[command(flatten)]
    ingest: IngestOpts,
}

#[derive(Args)]
struct SimulateArgs {
    /// Reference sample size per trial.
    #[arg(long)]
    n: usize,
    /// Comparison sample size per trial.
    #[arg(long)]
    m: usize,
    /// Replications per grid point (at least 100).
    #[arg(long, default_value_t = 10_000)]
    reps: usize,
    #[arg(long, default_value_t = 0.05)]
    alpha: f64,
    /// Alternative grid: comma-separated values, or LO:HI:COUNT. Means for
    /// a normal null, rate multipliers for an exponential null.
    #[arg(long)]
    mu_grid: Option<String>,
    /// Comma-separated subset of {two_sample, transform}.
    #[arg(long, default_value = "two_sample,transform")]
    methods: String,
    /// Null family.
    #[arg(long, default_value = "normal", value_parser = ["normal", "exponential"])]
    null: String,
    /// Rate of the exponential null.
    #[arg(long, default_value_t = 1.0)]
    rate: f64,
    /// Master seed; omitted means one is drawn and printed.
    #[arg(long)]
    seed: Option<u64>,
    /// Dither inside the transform method.
    #[arg(long)]
    dither: bool,
    /// Share one reference sample per grid point across replications.
    #[arg(long)]
    shared_reference: bool,
    /// CSV destination (stdout when omitted).
    #[arg(long)]
    out: Option<PathBuf>,
}

fn main() {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            // --help/--version land here too and must stay exit code 0.
            let code = if e.use_stderr() { EXIT_USAGE } else { 0 };
            let _ = e.print();
            std::process::exit(code);
        }
    };
    if let Some(threads) = cli.threads {
        if let Err(e) = rayon::ThreadPoolBuilder::new()
            .num_threads(threads)
            .build_global()
        {
            eprintln!("error: --threads: {e}");
            std::process::exit(EXIT_USAGE);
        }
    }
    let outcome = match cli.command {
        Command::Build(args) => cmd_build(args),
        Command::Test(sub) => cmd_test(sub),
        Command::Simulate(args) => cmd_simulate(args),
    };
    match outcome {
        Ok(code) => std::process::exit(code),
        Err(e) => {
            eprintln!("error: {e}");
            std::process::exit(e.exit_code());
        }
    }
}

fn cmd_build(args: BuildArgs) -> Result<i32, CliError> {
    let spec = args.ingest.spec(&args.inputs);
    let ingest_start = Instant::now();
    let data = ingest(&spec)?;
    let ingest_time = ingest_start.elapsed();

    let merge_start = Instant::now();
    let ecdf = EmpiricalCdf::merge_partitions(&data.partitions)?;
    let merge_time = merge_start.elapsed();

    let write_start = Instant::now();
    let file = File::create(&args.out).map_err(|source| CliError::Io {
        path: args.out.clone(),
        source,
    })?;
    ecdf.write_text(file)?;
    let write_time = write_start.elapsed();

    let mut report = RunReport::new("ksdrift.build.v1");
    report.field("out", args.out.display());
    report.field("n", ecdf.n());
    report.field("partitions", data.partitions.len());
    report.field("inputs.paths", spec.describe_paths());
    report.field("skipped", data.skipped);
    if data.skipped > 0 {
        report.warn(format!(
            "skipped {} non-numeric token(s) during ingest",
            data.skipped
        ));
    }
    report.time("ingest", ingest_time);
    report.time("merge", merge_time);
    report.time("write", write_time);
    print!("{report}");
    Ok(EXIT_KEPT)
}

fn parse_f0(spec: &str) -> Result<ContinuousDist, CliError> {
    let bad = |msg: &str| {
        Err(CliError::Usage(format!(
            "--f0 `{spec}`: {msg} (expected uniform01, normal:MU,SIGMA or exponential:RATE)"
        )))
    };
    if spec == "uniform01" || spec == "uniform" {
        return Ok(ContinuousDist::uniform01());
    }
    if let Some(params) = spec.strip_prefix("normal:") {
        let parts: Vec<&str> = params.split(',').collect();
        if parts.len() != 2 {
            return bad("normal takes MU,SIGMA");
        }
        let (mu, sigma) = match (parts[0].trim().parse(), parts[1].trim().parse()) {
            (Ok(mu), Ok(sigma)) => (mu, sigma),
            _ => return bad("could not parse normal parameters"),
        };
        return ContinuousDist::normal(mu, sigma).map_err(CliError::Core);
    }
    if let Some(param) = spec
        .strip_prefix("exponential:")
        .or_else(|| spec.strip_prefix("exp:"))
    {
        return match param.trim().parse() {
            Ok(rate) => ContinuousDist::exponential(rate).map_err(CliError::Core),
            Err(_) => bad("could not parse exponential rate"),
        };
    }
    bad("unknown family")
}

fn verdict_exit(reject: bool) -> i32 {
    if reject {
        EXIT_REJECTED
    } else {
        EXIT_KEPT
    }
}

fn cmd_test(sub: TestCommand) -> Result<i32, CliError> {
    match sub {
        TestCommand::OneSample(args) => {
            let f0 = parse_f0(&args.f0)?;
            let spec = args.ingest.spec(&args.inputs);
            let ingest_start = Instant::now();
            let data = ingest(&spec)?;
            let ingest_time = ingest_start.elapsed();
            let sample = data.concat();

            let test_start = Instant::now();
            let result = ks_one_sample(&sample, &f0, args.alpha)?;
            let test_time = test_start.elapsed();

            let mut report = RunReport::new("ksdrift.test.one-sample.v1");
            report.field("f0", &args.f0);
            report.verdict(&result);
            report.field("inputs.data.paths", spec.describe_paths());
            report.field("inputs.data.count", sample.len());
            report.field("inputs.data.skipped", data.skipped);
            if data.skipped > 0 {
                report.warn(format!("skipped {} non-numeric token(s)", data.skipped));
            }
            report.time("ingest", ingest_time);
            report.time("test", test_time);
            print!("{report}");
            Ok(verdict_exit(result.reject))
        }
        TestCommand::TwoSample(args) => {
            let spec_x = args.ingest.spec(&args.x);
            let spec_y = args.ingest.spec(&args.y);
            let ingest_start = Instant::now();
            let data_x = ingest(&spec_x)?;
            let data_y = ingest(&spec_y)?;
            let ingest_time = ingest_start.elapsed();
            let (x, y) = (data_x.concat(), data_y.concat());

            let test_start = Instant::now();
            let result = ksdrift::ks_two_sample(&x, &y, args.alpha)?;
            let test_time = test_start.elapsed();

            let mut report = RunReport::new("ksdrift.test.two-sample.v1");
            report.verdict(&result);
            report.field("inputs.x.paths", spec_x.describe_paths());
            report.field("inputs.x.count", x.len());
            report.field("inputs.y.paths", spec_y.describe_paths());
            report.field("inputs.y.count", y.len());
            let skipped = data_x.skipped + data_y.skipped;
            report.field("inputs.skipped", skipped);
            if skipped > 0 {
                report.warn(format!("skipped {skipped} non-numeric token(s)"));
            }
            report.time("ingest", ingest_time);
            report.time("test", test_time);
            print!("{report}");
            Ok(verdict_exit(result.reject))
        }
        TestCommand::Transform(args) => cmd_test_transform(args),
    }
}

fn cmd_test_transform(args: TransformArgs) -> Result<i32, CliError> {
    let comparison_spec = args.ingest.spec(&args.comparison);
    let ingest_start = Instant::now();
    let comparison_data = ingest(&comparison_spec)?;
    let comparison = comparison_data.concat();
    let ingest_time = ingest_start.elapsed();

    let build_start = Instant::now();
    let (reference, reference_desc) = match (&args.reference_ecdf, args.reference.is_empty()) {
        (Some(path), _) => {
            let file = File::open(path).map_err(|source| CliError::Io {
                path: path.clone(),
                source,
            })?;
            (EmpiricalCdf::read_text(file)?, path.display().to_string())
        }
        (None, false) => {
            let spec = args.ingest.spec(&args.reference);
            let data = ingest(&spec)?;
            (
                EmpiricalCdf::merge_partitions(&data.partitions)?,
                spec.describe_paths(),
            )
        }
        (None, true) => {
            return Err(CliError::Usage(
                "transform needs --reference-ecdf FILE or --reference FILE...".to_owned(),
            ))
        }
    };
    let build_time = build_start.elapsed();

    let transform_start = Instant::now();
    let transform = reference.transform(&comparison, args.dither, args.seed)?;
    let transform_time = transform_start.elapsed();

    let test_start = Instant::now();
    let result = ks_one_sample_uniform(&transform.transformed, args.alpha)?;
    let test_time = test_start.elapsed();

    let mut report = RunReport::new("ksdrift.test.transform.v1");
    report.verdict(&result);
    report.transform(&transform);
    report.field("inputs.reference", reference_desc);
    report.field("inputs.comparison.paths", comparison_spec.describe_paths());
    report.field("inputs.comparison.count", comparison.len());
    report.field("inputs.comparison.skipped", comparison_data.skipped);
    if comparison_data.skipped > 0 {
        report.warn(format!(
            "skipped {} non-numeric token(s)",
            comparison_data.skipped
        ));
    }
    report.time("ingest", ingest_time);
    report.time("build", build_time);
    report.time("transform", transform_time);
    report.time("test", test_time);
    print!("{report}");
    Ok(verdict_exit(result.reject))
}

fn parse_mu_grid(spec: &str) -> Result<Vec<f64>, CliError> {
    let bad = |msg: String| Err(CliError::Usage(format!("--mu-grid `{spec}`: {msg}")));
    if spec.contains(':') {
        let parts: Vec<&str> = spec.split(':').collect();
        if parts.len() != 3 {
            return bad("range form is LO:HI:COUNT".to_owned());
        }
        let (lo, hi): (f64, f64) = match (parts[0].parse(), parts[1].parse()) {
            (Ok(lo), Ok(hi)) => (lo, hi),
            _ => return bad("could not parse bounds".to_owned()),
        };
        let count: usize = parts[2]
            .parse()
            .map_err(|_| CliError::Usage(format!("--mu-grid `{spec}`: bad COUNT")))?;
        if count < 1 {
            return bad("COUNT must be at least 1".to_owned());
        }
        if count == 1 {
            return Ok(vec![lo]);
        }
        return Ok((0..count)
            .map(|i| lo + (hi - lo) * i as f64 / (count - 1) as f64)
            .collect());
    }
    spec.split(',')
        .map(|tok| {
            tok.trim()
                .parse::<f64>()
                .map_err(|_| CliError::Usage(format!("--mu-grid: `{tok}` is not a number")))
        })
        .collect()
}

fn cmd_simulate(args: SimulateArgs) -> Result<i32, CliError> {
    let seed = args.seed.unwrap_or_else(ksdrift::distributions::fresh_seed);
    let mut config = SimulationConfig::new(args.n, args.m, seed);
    config.replications = args.reps;
    config.alpha = args.alpha;
    config.dither = args.dither;
    config.shared_reference = args.shared_reference;
    config.methods = args
        .methods
        .split(',')
        .map(|tok| tok.trim().parse::<Method>())
        .collect::<ksdrift::Result<Vec<Method>>>()
        .map_err(|e| CliError::Usage(format!("--methods: {e}")))?;
    match args.null.as_str() {
        "normal" => {} // the default config is already the standard normal
        "exponential" => {
            config.null_family = ContinuousDist::exponential(args.rate)?;
            // Default multiplier grid: 41 hundredth-exact steps over [0.2, 3].
            config.mu_grid = (0..41).map(|i| (20 + 7 * i) as f64 / 100.0).collect();
        }
        other => return Err(CliError::Usage(format!("--null: unknown family `{other}`"))),
    }
    if let Some(grid) = &args.mu_grid {
        config.mu_grid = parse_mu_grid(grid)?;
    }
    config
        .validate()
        .map_err(|e| CliError::Usage(e.to_string()))?;

    println!("seed = {seed}");
    let start = Instant::now();
    let curves = estimate_power(&config)?;
    let elapsed = start.elapsed();
    for curve in &curves {
        let rates: Vec<f64> = curve.points.iter().map(|p| p.rejection_rate).collect();
        let lo = rates.iter().cloned().fold(f64::INFINITY, f64::min);
        let hi = rates.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
        println!(
            "curve {}: {} points, n={} m={} reps={} alpha={}, rejection {:.4}..{:.4}",
            curve.method,
            curve.points.len(),
            config.n_reference,
            config.m_comparison,
            config.replications,
            config.alpha,
            lo,
            hi
        );
    }
    println!("elapsed_ms = {}", elapsed.as_millis());

    match &args.out {
        Some(path) => {
            let file = File::create(path).map_err(|source| CliError::Io {
                path: path.clone(),
                source,
            })?;
            write_power_csv(&curves, file)?;
            println!("wrote {}", path.display());
        }
        None => {
            let mut stdout = io::stdout().lock();
            write_power_csv(&curves, &mut stdout)?;
            stdout.flush().map_err(ksdrift::Error::Io)?;
        }
    }
    Ok(EXIT_KEPT)
}
