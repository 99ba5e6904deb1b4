use std::fs;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Parser, Subcommand, ValueEnum};

use weighted_tv::bounds::{certificate_lemma1, certificate_lemma2, certificate_pointwise, BoundParams};
use weighted_tv::distributions::{GaussianMixture, GridSpec};
use weighted_tv::error::{Error, Result};
use weighted_tv::harness::{emit_report, parse_formats, run_sweep, Scenario};
use weighted_tv::spectral::{char_fn_sampled, poly_envelope_char, poly_envelope_density};
use weighted_tv::transport::{rho_p, tv_mass, wasserstein, RHO_TOLERANCE};

const EXIT_PRECONDITION: u8 = 2;
const EXIT_NUMERICAL: u8 = 3;
const EXIT_VIOLATED: u8 = 4;

#[derive(Parser)]
#[command(name = "wtv", version, about = "Weighted total variation, Wasserstein distances and rate certificates")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Clone, Copy, ValueEnum)]
enum Metric {
    #[value(name = "rho_p")]
    RhoP,
    Tv,
    Wq,
}

#[derive(Clone, Copy, ValueEnum)]
enum SideArg {
    Density,
    Frequency,
}

#[derive(Clone, Copy, ValueEnum)]
enum RegimeArg {
    Lemma1,
    Lemma2,
    Pointwise,
}

#[derive(Subcommand)]
enum Command {
    /// One distance between two mixtures.
    Dist {
        #[arg(long)]
        a: PathBuf,
        #[arg(long)]
        b: PathBuf,
        #[arg(long, value_enum)]
        metric: Metric,
        #[arg(long, default_value_t = 2.0)]
        p: f64,
        #[arg(long, default_value_t = 2.0)]
        q: f64,
        /// Sample size per law for W_q when d > 1.
        #[arg(long, default_value_t = 400)]
        samples: usize,
        #[arg(long, default_value_t = 0)]
        seed: u64,
    },
    /// Polynomial decay envelope table of one mixture.
    Envelope {
        #[arg(long)]
        input: PathBuf,
        #[arg(long, value_enum)]
        side: SideArg,
        /// Largest derivative order.
        #[arg(long = "K", default_value_t = 4)]
        max_order: usize,
        /// Largest power of (1 + |x|).
        #[arg(long = "L", default_value_t = 6)]
        max_power: usize,
        /// Grid nodes per axis.
        #[arg(long, default_value_t = 4096)]
        n: usize,
    },
    /// Certificate for one pair of mixtures.
    Certify {
        #[arg(long)]
        a: PathBuf,
        #[arg(long)]
        b: PathBuf,
        #[arg(long, default_value_t = 2.0)]
        p: f64,
        #[arg(long, default_value_t = 2.0)]
        q: f64,
        #[arg(long, default_value_t = 0.1)]
        eps: f64,
        #[arg(long, value_enum)]
        regime: RegimeArg,
        /// Derivative multi-index for the pointwise regime, comma separated.
        #[arg(long, value_delimiter = ',')]
        alpha: Option<Vec<usize>>,
    },
    /// Sweep a scenario over its perturbation scales and write reports.
    Sweep {
        #[arg(long, required_unless_present = "preset", conflicts_with = "preset")]
        scenario: Option<PathBuf>,
        /// Built-in scenario name instead of a file.
        #[arg(long)]
        preset: Option<String>,
        #[arg(long)]
        out: PathBuf,
        #[arg(long, default_value = "csv,json")]
        formats: String,
    },
}

fn read_mixture(path: &Path) -> Result<GaussianMixture<f64>> {
    GaussianMixture::from_json(&fs::read_to_string(path)?)
}

fn run(cli: Cli) -> Result<u8> {
    match cli.command {
        Command::Dist { a, b, metric, p, q, samples, seed } => {
            let (a, b) = (read_mixture(&a)?, read_mixture(&b)?);
            let result = match metric {
                Metric::RhoP => rho_p(&a, &b, p, RHO_TOLERANCE)?,
                Metric::Tv => tv_mass(&a, &b, RHO_TOLERANCE)?,
                Metric::Wq => wasserstein(&a, &b, q, samples, seed)?,
            };
            println!("{}", result.to_json());
        }
        Command::Envelope { input, side, max_order, max_power, n } => {
            let dist = read_mixture(&input)?;
            let region = dist.auto_box(1e-20);
            let spec = GridSpec::cube(&region, n)?;
            let table = match side {
                SideArg::Density => poly_envelope_density(&dist.discretize(&spec)?, max_order, max_power)?,
                SideArg::Frequency => poly_envelope_char(&char_fn_sampled(&dist, &spec)?, max_order, max_power)?,
            };
            println!("{}", table.to_json());
        }
        Command::Certify { a, b, p, q, eps, regime, alpha } => {
            let (a, b) = (read_mixture(&a)?, read_mixture(&b)?);
            let params = BoundParams::new(p, q, eps, a.dim())?;
            let cert = match regime {
                RegimeArg::Lemma1 => certificate_lemma1(&a, &b, &params, None)?,
                RegimeArg::Lemma2 => certificate_lemma2(&a, &b, &params, None)?,
                RegimeArg::Pointwise => {
                    let alpha = alpha.unwrap_or_else(|| vec![0; a.dim()]);
                    certificate_pointwise(&a, &b, &params, &alpha, None)?
                }
            };
            println!("{}", cert.to_json());
        }
        Command::Sweep { scenario, preset, out, formats } => {
            let sc: Scenario<f64> = match (scenario, preset) {
                (Some(path), _) => Scenario::from_json(&fs::read_to_string(path)?)?,
                (None, Some(name)) => Scenario::preset(&name)?,
                (None, None) => return Err(Error::InvalidParameter("either --scenario or --preset is required".into())),
            };
            let formats = parse_formats(&formats)?;
            let report = run_sweep(&sc)?;
            for path in emit_report(&report, &out, &formats)? {
                println!("{}", path.display());
            }
            for f in &report.failures {
                eprintln!("row h={:e} failed: {}", f.h, f.error);
            }
            if let Some(fit) = &report.fit {
                eprintln!("slope {:.4} ± {:.4} over {} rows", fit.slope, fit.stderr, fit.points);
            }
            if !report.all_satisfied() {
                eprintln!("certificate violated in at least one row");
                return Ok(EXIT_VIOLATED);
            }
        }
    }
    Ok(0)
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(cli) {
        Ok(code) => ExitCode::from(code),
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(if e.is_numerical() { EXIT_NUMERICAL } else { EXIT_PRECONDITION })
        }
    }
}
