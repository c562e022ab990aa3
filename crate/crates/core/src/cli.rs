//! The `hdnr` command line: `twosample | glht | size-sim | oracle | bench`.
//!
//! Exit codes: 0 on success, 1 on data or numerical failure, 2 on usage
//! errors.

use std::ffi::OsString;
use std::io::Write;
use std::path::{Path, PathBuf};
use std::time::Instant;

use clap::{Args, Parser, Subcommand, ValueEnum};
use nalgebra::DVector;
use serde::Serialize;

use crate::chi2mix::{pvalue, threec_match, ws_match, ChiSquareMixture};
use crate::error::{Error, Result};
use crate::glht::{glht_z3, DesignSpec, GlhtTest};
use crate::io::{load_matrix, read_matrix, LoadOptions};
use crate::matrix::{center, tr_cov_sq, DataMatrix};
use crate::report::TestReport;
use crate::sim::{
    empirical_size, icm_generate, mixture_mc_draws, with_threads, IcmSpec, Innovation, Mixing,
    SizeProcedure, SizeSource, SizeStudyConfig,
};
use crate::two_sample::{TwoSampleInput, TwoSampleOptions, TwoSampleTest, DEFAULT_CUTOFF};

#[derive(Debug, Parser)]
#[command(name = "hdnr", version, about = "High-dimensional normal-reference mean tests")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Two-sample test of equal mean vectors.
    Twosample(TwosampleArgs),
    /// General linear hypothesis test for k groups or a regression design.
    Glht(GlhtArgs),
    /// Empirical size under random splits or generated null data.
    SizeSim(SizeSimArgs),
    /// Monte Carlo tail of a chi-square-type mixture next to its approximations.
    Oracle(OracleArgs),
    /// Average wall time of a kernel or test on generated data.
    Bench(BenchArgs),
}

#[derive(Debug, Args)]
pub struct CsvArgs {
    /// Field delimiter.
    #[arg(long, default_value_t = ',')]
    pub delimiter: char,
    /// Header handling.
    #[arg(long, value_enum, default_value_t = HeaderMode::Auto)]
    pub header: HeaderMode,
    /// Leave all-zero columns untouched.
    #[arg(long)]
    pub no_stabilize: bool,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum HeaderMode {
    Auto,
    Yes,
    No,
}

impl CsvArgs {
    fn options(&self) -> CliResult<LoadOptions> {
        if !self.delimiter.is_ascii() {
            return usage(format!(
                "delimiter must be a single ASCII character, got `{}`",
                self.delimiter
            ));
        }
        Ok(LoadOptions {
            delimiter: self.delimiter as u8,
            header: match self.header {
                HeaderMode::Auto => None,
                HeaderMode::Yes => Some(true),
                HeaderMode::No => Some(false),
            },
            stabilize: if self.no_stabilize {
                None
            } else {
                LoadOptions::default().stabilize
            },
        })
    }
}

#[derive(Debug, Args)]
pub struct TwosampleArgs {
    #[arg(long, value_enum)]
    pub test: TwoSampleTest,
    #[arg(long)]
    pub group1: PathBuf,
    #[arg(long)]
    pub group2: PathBuf,
    /// Cutoff of the zzz2023 adjustment rule.
    #[arg(long, default_value_t = DEFAULT_CUTOFF)]
    pub cutoff: f64,
    /// Also write the report as JSON.
    #[arg(long)]
    pub json: Option<PathBuf>,
    #[command(flatten)]
    pub csv: CsvArgs,
}

#[derive(Debug, Args)]
pub struct GlhtArgs {
    #[arg(long, value_enum)]
    pub test: GlhtTest,
    /// One CSV per group, or a single stacked response with --design/--coef.
    #[arg(long, num_args = 1.., required = true)]
    pub data: Vec<PathBuf>,
    /// q×k coefficient matrix G (multi-group form; default: all means equal).
    #[arg(long, conflicts_with_all = ["design", "coef"])]
    pub contrast: Option<PathBuf>,
    /// n×f design matrix X (regression form, z3 only).
    #[arg(long, requires = "coef")]
    pub design: Option<PathBuf>,
    /// q×f hypothesis matrix C (regression form, z3 only).
    #[arg(long, requires = "design")]
    pub coef: Option<PathBuf>,
    #[arg(long)]
    pub json: Option<PathBuf>,
    #[command(flatten)]
    pub csv: CsvArgs,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum InnovationKind {
    Normal,
    Exponential,
    T,
}

#[derive(Debug, Args)]
pub struct SizeSimArgs {
    /// Tests to study (default: all two-sample tests).
    #[arg(long = "test", value_enum, value_delimiter = ',')]
    pub tests: Vec<TwoSampleTest>,
    #[arg(long, default_value_t = 1000)]
    pub nrep: usize,
    #[arg(long = "alpha", value_delimiter = ',', default_values_t = [0.1, 0.05, 0.01])]
    pub alphas: Vec<f64>,
    #[arg(long, default_value_t = 1)]
    pub seed: u64,
    #[arg(long, env = "HDNR_THREADS")]
    pub threads: Option<usize>,
    /// Pooled sample to split at random (split mode).
    #[arg(long)]
    pub data: Option<PathBuf>,
    /// Size of the first group (split mode: default half; generator mode: 30).
    #[arg(long)]
    pub n1: Option<usize>,
    /// Size of the second group (generator mode).
    #[arg(long, default_value_t = 30)]
    pub n2: usize,
    /// Dimension (generator mode).
    #[arg(long, default_value_t = 200)]
    pub p: usize,
    /// AR(1) correlation (generator mode).
    #[arg(long, default_value_t = 0.5)]
    pub rho: f64,
    #[arg(long, value_enum, default_value_t = InnovationKind::Normal)]
    pub innovation: InnovationKind,
    /// Degrees of freedom of t innovations.
    #[arg(long, default_value_t = 6.0)]
    pub df: f64,
    #[arg(long)]
    pub json: Option<PathBuf>,
    #[command(flatten)]
    pub csv: CsvArgs,
}

#[derive(Debug, Args)]
pub struct OracleArgs {
    /// CSV with columns `coefficient,df`, one row per term.
    #[arg(long)]
    pub mixture: PathBuf,
    /// Points at which to evaluate the upper tail.
    #[arg(long = "t", value_delimiter = ',', required = true, allow_negative_numbers = true)]
    pub t: Vec<f64>,
    #[arg(long, default_value_t = 1_000_000)]
    pub draws: usize,
    #[arg(long, default_value_t = 1)]
    pub seed: u64,
    #[arg(long, env = "HDNR_THREADS")]
    pub threads: Option<usize>,
    #[arg(long)]
    pub json: Option<PathBuf>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum BenchTarget {
    TrCovSq,
    Bs1996,
    Cq2010,
    Sd2008,
    Skk2013,
    Zgzc2020,
    Zzgz2021,
    Zwz2023,
    Zzz2020,
    Zzz2023,
    #[value(name = "zz2022-ts")]
    Zz2022Ts,
    #[value(name = "zz2022-tsbf")]
    Zz2022Tsbf,
}

impl BenchTarget {
    fn test(self) -> Option<TwoSampleTest> {
        Some(match self {
            BenchTarget::TrCovSq => return None,
            BenchTarget::Bs1996 => TwoSampleTest::Bs1996,
            BenchTarget::Cq2010 => TwoSampleTest::Cq2010,
            BenchTarget::Sd2008 => TwoSampleTest::Sd2008,
            BenchTarget::Skk2013 => TwoSampleTest::Skk2013,
            BenchTarget::Zgzc2020 => TwoSampleTest::Zgzc2020,
            BenchTarget::Zzgz2021 => TwoSampleTest::Zzgz2021,
            BenchTarget::Zwz2023 => TwoSampleTest::Zwz2023,
            BenchTarget::Zzz2020 => TwoSampleTest::Zzz2020,
            BenchTarget::Zzz2023 => TwoSampleTest::Zzz2023,
            BenchTarget::Zz2022Ts => TwoSampleTest::Zz2022Ts,
            BenchTarget::Zz2022Tsbf => TwoSampleTest::Zz2022Tsbf,
        })
    }
}

#[derive(Debug, Args)]
pub struct BenchArgs {
    #[arg(long, value_enum)]
    pub target: BenchTarget,
    /// Total sample size, split evenly between the groups for tests.
    #[arg(long, default_value_t = 36)]
    pub n: usize,
    #[arg(long, value_delimiter = ',', default_values_t = [54675])]
    pub p: Vec<usize>,
    #[arg(long, default_value_t = 10)]
    pub reps: usize,
    #[arg(long, default_value_t = 1)]
    pub seed: u64,
}

/// Failure of a subcommand: bad flag combinations (exit 2) or a data or
/// numerical error from the library (exit 1).
#[derive(Debug, thiserror::Error)]
pub enum CliError {
    #[error("{0}")]
    Usage(String),
    #[error(transparent)]
    Data(#[from] Error),
}

impl From<std::io::Error> for CliError {
    fn from(e: std::io::Error) -> Self {
        CliError::Data(e.into())
    }
}

impl CliError {
    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Usage(_) => 2,
            CliError::Data(_) => 1,
        }
    }
}

type CliResult<T> = std::result::Result<T, CliError>;

fn usage<T>(msg: impl Into<String>) -> CliResult<T> {
    Err(CliError::Usage(msg.into()))
}

/// Parses `args` (including the program name), runs the command and returns
/// the process exit code.
pub fn run_from<I, T>(args: I, out: &mut dyn Write, err: &mut dyn Write) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(cli) => cli,
        Err(e) => {
            let code = if e.use_stderr() { 2 } else { 0 };
            let text = e.render().to_string();
            let _ = if code == 0 {
                write!(out, "{text}")
            } else {
                write!(err, "{text}")
            };
            return code;
        }
    };
    match run(&cli, out) {
        Ok(()) => 0,
        Err(e) => {
            let _ = writeln!(err, "error: {e}");
            e.exit_code()
        }
    }
}

pub fn run(cli: &Cli, out: &mut dyn Write) -> CliResult<()> {
    match &cli.command {
        Command::Twosample(a) => twosample(a, out),
        Command::Glht(a) => glht(a, out),
        Command::SizeSim(a) => size_sim(a, out),
        Command::Oracle(a) => oracle(a, out),
        Command::Bench(a) => bench(a, out),
    }
}

fn write_json<T: Serialize>(path: &Path, value: &T) -> CliResult<()> {
    let text = serde_json::to_string_pretty(value)
        .map_err(|e| Error::Numerical {
            test: "json".into(),
            detail: e.to_string(),
        })?;
    std::fs::write(path, text + "\n")?;
    Ok(())
}

fn stem(path: &Path) -> String {
    path.file_stem()
        .map(|s| s.to_string_lossy().into_owned())
        .unwrap_or_else(|| path.display().to_string())
}

fn emit(report: &TestReport, json: Option<&PathBuf>, out: &mut dyn Write) -> CliResult<()> {
    write!(out, "{report}")?;
    if let Some(path) = json {
        write_json(path, report)?;
    }
    Ok(())
}

fn twosample(a: &TwosampleArgs, out: &mut dyn Write) -> CliResult<()> {
    let opts = a.csv.options()?;
    let y1 = load_matrix(&a.group1, &opts)?;
    let y2 = load_matrix(&a.group2, &opts)?;
    let input = TwoSampleInput::new(&y1, &y2)?;
    let report = a.test.run_with(
        &input,
        &TwoSampleOptions {
            cutoff: a.cutoff,
            data_name: format!("{} and {}", stem(&a.group1), stem(&a.group2)),
        },
    )?;
    emit(&report, a.json.as_ref(), out)
}

fn glht(a: &GlhtArgs, out: &mut dyn Write) -> CliResult<()> {
    let opts = a.csv.options()?;
    let raw = LoadOptions {
        stabilize: None,
        ..opts.clone()
    };
    let mut report = match (&a.contrast, &a.design, &a.coef) {
        (g, None, None) => {
            if a.data.len() < 2 {
                return usage("the multi-group form needs one --data file per group");
            }
            let groups = a
                .data
                .iter()
                .map(|p| load_matrix(p, &opts))
                .collect::<Result<Vec<_>>>()?;
            let g = match g {
                Some(g) => read_matrix(g, &raw)?,
                None => crate::glht::one_way_contrast(groups.len())?,
            };
            let refs: Vec<&DataMatrix> = groups.iter().collect();
            a.test.run(&refs, &g)?
        }
        (None, Some(x), Some(c)) => {
            if a.test != GlhtTest::Z3 {
                return usage("the regression form (--design/--coef) is only available for z3");
            }
            if a.data.len() != 1 {
                return usage("the regression form takes exactly one stacked --data file");
            }
            let y = load_matrix(&a.data[0], &opts)?;
            let design = DesignSpec::new(read_matrix(x, &raw)?, read_matrix(c, &raw)?)?;
            glht_z3(&y, &design)?
        }
        _ => {
            return usage("give --contrast, or both --design and --coef")
        }
    };
    report.data_name = "Y".into();
    emit(&report, a.json.as_ref(), out)
}

fn size_sim(a: &SizeSimArgs, out: &mut dyn Write) -> CliResult<()> {
    let tests: Vec<TwoSampleTest> = if a.tests.is_empty() {
        TwoSampleTest::ALL.to_vec()
    } else {
        a.tests.clone()
    };
    let procs: Vec<&dyn SizeProcedure> = tests.iter().map(|t| t as &dyn SizeProcedure).collect();
    let cfg = SizeStudyConfig {
        nrep: a.nrep,
        alphas: a.alphas.clone(),
        seed: a.seed,
        threads: a.threads,
    };
    let pooled;
    let source = match &a.data {
        Some(path) => {
            pooled = load_matrix(path, &a.csv.options()?)?;
            SizeSource::Split {
                data: &pooled,
                n1: a.n1.unwrap_or(pooled.nrows() / 2),
            }
        }
        None => {
            let innovation = match a.innovation {
                InnovationKind::Normal => Innovation::Normal,
                InnovationKind::Exponential => Innovation::Exponential,
                InnovationKind::T => Innovation::StudentT { df: a.df },
            };
            let mixing = if a.rho == 0.0 {
                Mixing::Identity
            } else {
                Mixing::Ar1 { rho: a.rho }
            };
            SizeSource::Generator {
                spec: IcmSpec::centered(a.p, mixing, innovation),
                n1: a.n1.unwrap_or(30),
                n2: a.n2,
            }
        }
    };
    if let Err(e) = cfg.validate() {
        return usage(e.to_string());
    }
    if a.threads == Some(0) {
        return usage("--threads must be at least 1");
    }
    let table = empirical_size(&source, &procs, &cfg)?;
    write!(out, "{table}")?;
    if let Some(path) = &a.json {
        write_json(path, &table)?;
    }
    Ok(())
}

#[derive(Debug, Serialize)]
struct OracleRow {
    t: f64,
    mc: f64,
    se: f64,
    ws: Option<f64>,
    three_c: Option<f64>,
}

fn oracle(a: &OracleArgs, out: &mut dyn Write) -> CliResult<()> {
    let m = read_matrix(&a.mixture, &LoadOptions::raw())?;
    if m.ncols() != 2 {
        return Err(Error::Parse {
            path: a.mixture.display().to_string(),
            msg: format!("expected 2 columns (coefficient, df), found {}", m.ncols()),
        }
        .into());
    }
    let mut dfs = Vec::with_capacity(m.nrows());
    for i in 0..m.nrows() {
        let d = m[(i, 1)];
        if !(d >= 1.0 && d.fract() == 0.0 && d <= u32::MAX as f64) {
            return Err(Error::Parse {
                path: a.mixture.display().to_string(),
                msg: format!("line {}: df must be a positive integer, got {d}", i + 1),
            }
            .into());
        }
        dfs.push(d as u32);
    }
    let mix = ChiSquareMixture::new(m.column(0).iter().cloned().collect(), dfs)?;
    if a.draws < 10_000 {
        return usage(format!("at least 10000 draws required, got {}", a.draws));
    }
    if a.threads == Some(0) {
        return usage("--threads must be at least 1");
    }
    let draws = with_threads(a.threads, || mixture_mc_draws(&mix, a.draws, a.seed))??;
    let k = mix.cumulants();
    let ws = if mix.coeffs().iter().all(|&c| c >= 0.0) {
        Some(ws_match(k.k1, k.k2)?)
    } else {
        None
    };
    let tc = threec_match(k).ok();
    let rows = a
        .t
        .iter()
        .map(|&t| -> Result<OracleRow> {
            let hits = draws.iter().filter(|&&x| x >= t).count();
            let p = hits as f64 / draws.len() as f64;
            Ok(OracleRow {
                t,
                mc: p,
                se: (p * (1.0 - p) / draws.len() as f64).sqrt(),
                ws: ws.as_ref().map(|w| pvalue(t, w)).transpose()?,
                three_c: tc.as_ref().map(|w| pvalue(t, w)).transpose()?,
            })
        })
        .collect::<Result<Vec<_>>>()?;
    writeln!(
        out,
        "Mixture with {} terms, K1 = {:.6}, K2 = {:.6}, K3 = {:.6}; {} draws",
        mix.len(),
        k.k1,
        k.k2,
        k.k3,
        draws.len()
    )?;
    writeln!(out, "{:>14} {:>10} {:>10} {:>10} {:>10}", "t", "MC", "se", "2-c", "3-c")?;
    let show = |v: Option<f64>| v.map_or("-".to_string(), |x| format!("{x:.6}"));
    for r in &rows {
        writeln!(
            out,
            "{:>14.6} {:>10.6} {:>10.6} {:>10} {:>10}",
            r.t,
            r.mc,
            r.se,
            show(r.ws),
            show(r.three_c)
        )?;
    }
    if let Some(path) = &a.json {
        write_json(path, &rows)?;
    }
    Ok(())
}

fn bench(a: &BenchArgs, out: &mut dyn Write) -> CliResult<()> {
    if a.reps == 0 {
        return usage("--reps must be at least 1");
    }
    if a.n < 4 {
        return usage(format!("--n must be at least 4, got {}", a.n));
    }
    writeln!(out, "{:<14} {:>6} {:>8} {:>12}", "target", "n", "p", "seconds")?;
    for &p in &a.p {
        let spec = IcmSpec {
            mu: DVector::zeros(p),
            mixing: Mixing::Ar1 { rho: 0.5 },
            innovation: Innovation::Normal,
        };
        let name = a.target.to_possible_value().map(|v| v.get_name().to_string());
        let mut total = 0.0;
        match a.target.test() {
            None => {
                let x = icm_generate(&spec, a.n, a.seed)?;
                let zc = center(&x)?;
                for _ in 0..a.reps {
                    let t0 = Instant::now();
                    std::hint::black_box(tr_cov_sq(&zc));
                    total += t0.elapsed().as_secs_f64();
                }
            }
            Some(test) => {
                let n1 = a.n / 2;
                let y1 = icm_generate(&spec, n1, a.seed)?;
                let y2 = icm_generate(&spec, a.n - n1, a.seed.wrapping_add(1))?;
                let input = TwoSampleInput::new(&y1, &y2)?;
                for _ in 0..a.reps {
                    let t0 = Instant::now();
                    std::hint::black_box(test.run(&input)?);
                    total += t0.elapsed().as_secs_f64();
                }
            }
        }
        writeln!(
            out,
            "{:<14} {:>6} {:>8} {:>12.6}",
            name.unwrap_or_default(),
            a.n,
            p,
            total / a.reps as f64
        )?;
    }
    Ok(())
}

/// Entry point of the binary.
pub fn main_from_env() -> i32 {
    let stdout = std::io::stdout();
    let stderr = std::io::stderr();
    run_from(std::env::args_os(), &mut stdout.lock(), &mut stderr.lock())
}
