//! `gaussdiv` command-line harness.
//!
//! Exit codes: 0 success, 1 a Monte-Carlo check failed, 2 invalid input,
//! 3 the pair is mutually singular and the requested quantity is infinite.

use std::fs::File;
use std::io::{self, BufWriter, Write};
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use anyhow::{bail, Context};
use clap::{Args, Parser, Subcommand, ValueEnum};
use gaussdiv::lab::{
    gen_measure, geometric_grid, linear_grid, rn_check, sweep_gamma, sweep_r, write_csv,
    DivergenceKind, RngSeed, SpectrumFamily,
};
use gaussdiv::{
    exact_kl, kl_posterior_prior, posterior, Divergence, GaussianMeasure, LinearGaussianModel,
    ToleranceConfig,
};

#[derive(Parser)]
#[command(
    name = "gaussdiv",
    version,
    about = "Divergences between Gaussian measures"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Evaluate one divergence between two measures.
    Div(DivArgs),
    /// Regularized vs exact divergence over a geometric gamma grid.
    SweepGamma(SweepGammaArgs),
    /// Renyi divergence over a linear grid of orders.
    SweepR(SweepRArgs),
    /// KL(posterior || prior) of a linear-Gaussian model, closed form and generic.
    Bayes {
        #[arg(long)]
        model: PathBuf,
    },
    /// Monte-Carlo check of the Radon-Nikodym log-density.
    RnCheck(RnCheckArgs),
    /// Generate a random Gaussian measure with a prescribed spectrum.
    Gen(GenArgs),
}

#[derive(Clone, Copy, ValueEnum)]
enum Kind {
    Kl,
    Renyi,
    Bhatt,
    Hellinger,
}

#[derive(Args)]
struct PairArgs {
    /// First measure (JSON).
    #[arg(long)]
    nu: PathBuf,
    /// Second (reference) measure (JSON).
    #[arg(long)]
    mu: PathBuf,
}

#[derive(Args)]
struct KindArgs {
    #[arg(long, value_enum)]
    kind: Kind,
    /// Renyi order, required with `--kind renyi`.
    #[arg(long)]
    r: Option<f64>,
}

impl KindArgs {
    fn resolve(&self) -> anyhow::Result<DivergenceKind> {
        Ok(match (self.kind, self.r) {
            (Kind::Kl, _) => DivergenceKind::Kl,
            (Kind::Renyi, Some(r)) => DivergenceKind::Renyi(r),
            (Kind::Renyi, None) => bail!(gaussdiv::Error::InvalidParameter(
                "--kind renyi requires --r".into()
            )),
            (Kind::Bhatt, _) => DivergenceKind::Bhattacharyya,
            (Kind::Hellinger, _) => DivergenceKind::Hellinger,
        })
    }
}

#[derive(Args)]
struct DivArgs {
    #[command(flatten)]
    kind: KindArgs,
    #[arg(long, conflicts_with = "exact", required_unless_present = "exact")]
    gamma: Option<f64>,
    #[arg(long)]
    exact: bool,
    #[command(flatten)]
    pair: PairArgs,
}

#[derive(Args)]
struct SweepGammaArgs {
    #[command(flatten)]
    kind: KindArgs,
    #[command(flatten)]
    pair: PairArgs,
    #[arg(long, default_value_t = 1e-1)]
    from: f64,
    #[arg(long, default_value_t = 1e-8)]
    to: f64,
    #[arg(long, default_value_t = 8)]
    points: usize,
    /// CSV output; stdout if absent.
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Args)]
struct SweepRArgs {
    #[command(flatten)]
    pair: PairArgs,
    /// Regularization; 0 evaluates the exact divergence.
    #[arg(long, default_value_t = 0.0)]
    gamma: f64,
    #[arg(long, default_value_t = 0.05)]
    from: f64,
    #[arg(long, default_value_t = 0.95)]
    to: f64,
    #[arg(long, default_value_t = 19)]
    points: usize,
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Args)]
struct RnCheckArgs {
    #[arg(long, default_value_t = 100_000)]
    n: usize,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    /// Defaults to N(0, 0.5) against N(0, 1) when neither file is given.
    #[arg(long, requires = "mu")]
    nu: Option<PathBuf>,
    #[arg(long, requires = "nu")]
    mu: Option<PathBuf>,
}

#[derive(Clone, Copy, ValueEnum)]
enum Family {
    Powerlaw,
    Exp,
    Explicit,
}

#[derive(Args)]
struct GenArgs {
    #[arg(long, value_enum)]
    family: Family,
    /// Required except for `explicit`, where it defaults to the number of values.
    #[arg(long)]
    dim: Option<usize>,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    /// Power-law exponent (default 2) or exponential decay rate (default 1).
    #[arg(long)]
    param: Option<f64>,
    /// Comma-separated eigenvalues for `explicit`.
    #[arg(long, value_delimiter = ',')]
    values: Vec<f64>,
    /// Standard deviation of the i.i.d. mean entries.
    #[arg(long, default_value_t = 0.0)]
    mean_scale: f64,
    /// JSON output; stdout if absent.
    #[arg(long)]
    out: Option<PathBuf>,
}

enum Outcome {
    Done,
    Singular,
    CheckFailed,
}

fn read_json<T: serde::de::DeserializeOwned>(path: &Path) -> anyhow::Result<T> {
    let file = File::open(path).with_context(|| format!("opening {}", path.display()))?;
    serde_json::from_reader(io::BufReader::new(file))
        .with_context(|| format!("parsing {}", path.display()))
}

fn read_pair(pair: &PairArgs) -> anyhow::Result<(GaussianMeasure, GaussianMeasure)> {
    Ok((read_json(&pair.nu)?, read_json(&pair.mu)?))
}

fn output(path: Option<&Path>) -> anyhow::Result<Box<dyn Write>> {
    Ok(match path {
        Some(p) => Box::new(BufWriter::new(
            File::create(p).with_context(|| format!("creating {}", p.display()))?,
        )),
        None => Box::new(io::stdout().lock()),
    })
}

fn div(args: &DivArgs, tol: &ToleranceConfig) -> anyhow::Result<Outcome> {
    let kind = args.kind.resolve()?;
    let (nu, mu) = read_pair(&args.pair)?;
    let value = match args.gamma {
        Some(g) => Divergence::Finite(kind.regularized(&nu, &mu, g, tol)?),
        None => kind.exact(&nu, &mu, tol)?,
    };
    match value {
        Divergence::Finite(v) => {
            println!("{v}");
            Ok(Outcome::Done)
        }
        Divergence::Infinite { max_alpha } => {
            println!("inf");
            eprintln!("measures are mutually singular (max eigenvalue of S = {max_alpha})");
            Ok(Outcome::Singular)
        }
    }
}

fn sweep_gamma_cmd(args: &SweepGammaArgs, tol: &ToleranceConfig) -> anyhow::Result<Outcome> {
    let kind = args.kind.resolve()?;
    let (nu, mu) = read_pair(&args.pair)?;
    let grid = geometric_grid(args.from, args.to, args.points)?;
    let records = sweep_gamma(&nu, &mu, kind, &grid, tol)?;
    write_csv(&records, output(args.out.as_deref())?)?;
    Ok(Outcome::Done)
}

fn sweep_r_cmd(args: &SweepRArgs, tol: &ToleranceConfig) -> anyhow::Result<Outcome> {
    let (nu, mu) = read_pair(&args.pair)?;
    let grid = linear_grid(args.from, args.to, args.points)?;
    let sweep = sweep_r(&nu, &mu, args.gamma, &grid, tol)?;
    write_csv(&sweep.records, output(args.out.as_deref())?)?;
    eprintln!("kl_forward {}", sweep.kl_forward);
    eprintln!("kl_reverse {}", sweep.kl_reverse);
    Ok(Outcome::Done)
}

fn bayes(path: &Path, tol: &ToleranceConfig) -> anyhow::Result<Outcome> {
    let model: LinearGaussianModel = read_json(path)?;
    let closed = kl_posterior_prior(&model)?;
    let post = posterior(&model)?;
    let generic = exact_kl(&post, model.prior(), tol)?.finite()?;
    println!("closed_form {closed}");
    println!("generic     {generic}");
    println!(
        "rel_diff    {:e}",
        (closed - generic).abs() / generic.abs().max(f64::MIN_POSITIVE)
    );
    Ok(Outcome::Done)
}

fn rn_check_cmd(args: &RnCheckArgs, tol: &ToleranceConfig) -> anyhow::Result<Outcome> {
    let (nu, mu) = match (&args.nu, &args.mu) {
        (Some(nu), Some(mu)) => (read_json(nu)?, read_json(mu)?),
        _ => (
            GaussianMeasure::scalar(0.0, 0.5)?,
            GaussianMeasure::scalar(0.0, 1.0)?,
        ),
    };
    let report = rn_check(&nu, &mu, args.n, RngSeed(args.seed), tol)?;
    for (k, c) in report.gate.iter().enumerate() {
        println!(
            "moment4[{k}]   mc {:.8} closed {:.8} stderr {:.2e}",
            c.mc, c.closed, c.stderr
        );
    }
    let kl = report.kl;
    println!(
        "log-rn mean  {:.8} exact_kl {:.8} stderr {:.2e} z {:+.2}",
        kl.estimate,
        report.exact_kl,
        kl.stderr,
        kl.z_score(report.exact_kl)
    );
    let mass = report.mass;
    println!(
        "rn mass      {:.8} target 1 stderr {:.2e} z {:+.2}",
        mass.estimate,
        mass.stderr,
        mass.z_score(1.0)
    );
    let passed = report.passed();
    println!("{}", if passed { "PASS" } else { "FAIL" });
    Ok(if passed {
        Outcome::Done
    } else {
        Outcome::CheckFailed
    })
}

fn gen(args: &GenArgs) -> anyhow::Result<Outcome> {
    let invalid = |msg: String| gaussdiv::Error::InvalidParameter(msg);
    let family = match args.family {
        Family::Explicit => {
            if args.values.is_empty() {
                bail!(invalid("--family explicit requires --values".into()));
            }
            if let Some(d) = args.dim.filter(|&d| d != args.values.len()) {
                bail!(invalid(format!(
                    "--dim {d} but {} values given",
                    args.values.len()
                )));
            }
            SpectrumFamily::explicit(args.values.clone())
        }
        Family::Powerlaw | Family::Exp => {
            let dim = args
                .dim
                .ok_or_else(|| invalid("--dim is required for this family".into()))?;
            if matches!(args.family, Family::Powerlaw) {
                SpectrumFamily::power_law(args.param.unwrap_or(2.0), dim)
            } else {
                SpectrumFamily::exponential(args.param.unwrap_or(1.0), dim)
            }
        }
    };
    let measure = gen_measure(&family, RngSeed(args.seed), args.mean_scale)?;
    let mut out = output(args.out.as_deref())?;
    serde_json::to_writer_pretty(&mut out, &measure)?;
    writeln!(out)?;
    out.flush()?;
    Ok(Outcome::Done)
}

fn run(cli: &Cli) -> anyhow::Result<Outcome> {
    let tol = ToleranceConfig::default();
    match &cli.command {
        Command::Div(a) => div(a, &tol),
        Command::SweepGamma(a) => sweep_gamma_cmd(a, &tol),
        Command::SweepR(a) => sweep_r_cmd(a, &tol),
        Command::Bayes { model } => bayes(model, &tol),
        Command::RnCheck(a) => rn_check_cmd(a, &tol),
        Command::Gen(a) => gen(a),
    }
}

fn main() -> ExitCode {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("warn")).init();
    let cli = Cli::parse();
    match run(&cli) {
        Ok(Outcome::Done) => ExitCode::SUCCESS,
        Ok(Outcome::CheckFailed) => ExitCode::from(1),
        Ok(Outcome::Singular) => ExitCode::from(3),
        Err(err) => {
            eprintln!("error: {err:#}");
            match err.downcast_ref::<gaussdiv::Error>() {
                Some(gaussdiv::Error::SingularPair { .. }) => ExitCode::from(3),
                _ => ExitCode::from(2),
            }
        }
    }
}
