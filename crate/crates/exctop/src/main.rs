use anyhow::{bail, Context, Result};
use clap::{ArgGroup, Args, Parser, Subcommand, ValueEnum};
use exctop::experiment::{self, ExperimentConfig};
use exctop::io::{self, manifest, netpbm, tables, PbmFormat, RawConfig, RunManifest};
use exctop::synthesis::FieldSampler;
use exctop_core::closed_form::{expected_functionals, paper_phi, GaussianDensities, PhiConvention};
use exctop_core::excursion::digitize;
use exctop_core::{BoundaryMode, CovarianceKind, CovarianceModel, Rect, TopologyReport, Window};
use serde_json::json;
use std::path::{Path, PathBuf};
use std::process::ExitCode;
use std::time::Instant;

/// Excursion-set topology of 2-D random fields.
#[derive(Debug, Parser)]
#[command(name = "exctop", version)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Sample one field, digitize it at a level and measure the excursion.
    Simulate(SimulateArgs),
    /// Measure a PBM image.
    Analyze(AnalyzeArgs),
    /// Closed-form densities and expected window functionals.
    Predict(PredictArgs),
    /// Monte Carlo comparison of measured and predicted functionals.
    Experiment(RunArgs),
    /// Resolution sweep over coarsened copies of the same realizations.
    Sweep(RunArgs),
}

#[derive(Debug, Args)]
struct SimulateArgs {
    #[arg(long, default_value = "squared-exponential")]
    model: CovarianceKind,
    /// Correlation length.
    #[arg(long)]
    ell: f64,
    /// `N` or `ROWSxCOLS`.
    #[arg(long, default_value = "256", value_parser = parse_dims)]
    dims: (usize, usize),
    /// Lattice spacing; defaults to `1 / cols`.
    #[arg(long)]
    eps: Option<f64>,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    #[arg(long, default_value_t = 0.0, allow_hyphen_values = true)]
    lambda: f64,
    #[arg(long, default_value = "bounded")]
    mode: BoundaryMode,
    /// Lower-left corner `X,Y` of the field extent.
    #[arg(long, default_value = "0,0", value_parser = parse_point, allow_hyphen_values = true)]
    origin: (f64, f64),
    #[arg(long, value_enum, default_value_t = PbmKind::Raw)]
    pbm_format: PbmKind,
    /// Also write the field as a CSV matrix.
    #[arg(long)]
    field_csv: bool,
    /// Output directory.
    #[arg(long)]
    out: PathBuf,
}

#[derive(Debug, Clone, Copy, ValueEnum)]
enum PbmKind {
    Plain,
    Raw,
}

impl From<PbmKind> for PbmFormat {
    fn from(k: PbmKind) -> Self {
        match k {
            PbmKind::Plain => PbmFormat::Plain,
            PbmKind::Raw => PbmFormat::Raw,
        }
    }
}

#[derive(Debug, Args)]
struct AnalyzeArgs {
    image: PathBuf,
    #[arg(long, default_value_t = 1.0)]
    eps: f64,
    #[arg(long, default_value = "bounded")]
    mode: BoundaryMode,
    /// Print a CSV header and row instead of JSON.
    #[arg(long)]
    csv: bool,
}

#[derive(Debug, Args)]
#[command(group(ArgGroup::new("moment").required(true).args(["mu", "ell"])))]
struct PredictArgs {
    /// Second spectral moment.
    #[arg(long, conflicts_with_all = ["model", "ell"])]
    mu: Option<f64>,
    #[arg(long)]
    model: Option<CovarianceKind>,
    #[arg(long, requires = "model")]
    ell: Option<f64>,
    /// Use the moment of models whose paths are not C^{1,1}.
    #[arg(long)]
    allow_irregular: bool,
    /// Levels, comma separated or repeated.
    #[arg(
        long,
        required = true,
        value_delimiter = ',',
        allow_hyphen_values = true
    )]
    lambda: Vec<f64>,
    /// Window rectangle `X0,X1,Y0,Y1`; repeat for a polyrectangle.
    #[arg(long, value_parser = parse_rect, allow_hyphen_values = true)]
    window: Vec<Rect>,
    /// Report the centred normalization, `Φ(λ) - 1/2`, as the primary prediction.
    #[arg(long, conflicts_with = "cdf_phi")]
    paper_phi: bool,
    /// Report the normal CDF as the primary prediction (default).
    #[arg(long)]
    cdf_phi: bool,
}

#[derive(Debug, Args)]
struct RunArgs {
    config: PathBuf,
    /// Output directory.
    #[arg(long)]
    out: PathBuf,
}

fn parse_dims(s: &str) -> Result<(usize, usize), String> {
    let parse = |t: &str| {
        t.trim()
            .parse::<usize>()
            .map_err(|_| format!("invalid dimension `{t}`"))
    };
    match s.split_once(['x', 'X']) {
        Some((r, c)) => Ok((parse(r)?, parse(c)?)),
        None => parse(s).map(|n| (n, n)),
    }
}

fn parse_floats<const N: usize>(s: &str) -> Result<[f64; N], String> {
    let vals: Vec<f64> = s
        .split(',')
        .map(|t| {
            t.trim()
                .parse::<f64>()
                .map_err(|_| format!("invalid number `{t}`"))
        })
        .collect::<Result<_, _>>()?;
    vals.try_into()
        .map_err(|v: Vec<f64>| format!("expected {N} comma-separated numbers, got {}", v.len()))
}

fn parse_point(s: &str) -> Result<(f64, f64), String> {
    parse_floats::<2>(s).map(|[x, y]| (x, y))
}

fn parse_rect(s: &str) -> Result<Rect, String> {
    let [x0, x1, y0, y1] = parse_floats::<4>(s)?;
    if !(x0 < x1 && y0 < y1) {
        return Err(format!("rectangle `{s}` needs x0 < x1 and y0 < y1"));
    }
    Ok(Rect::new(x0, x1, y0, y1))
}

fn write(dir: &Path, name: &str, bytes: impl AsRef<[u8]>, outputs: &mut Vec<String>) -> Result<()> {
    let path = dir.join(name);
    std::fs::write(&path, bytes).with_context(|| format!("writing {}", path.display()))?;
    outputs.push(name.into());
    Ok(())
}

fn json_text<T: serde::Serialize>(value: &T) -> Result<String> {
    let mut s = serde_json::to_string_pretty(value)?;
    s.push('\n');
    Ok(s)
}

fn simulate(a: SimulateArgs) -> Result<()> {
    let start = Instant::now();
    if !(a.ell.is_finite() && a.ell > 0.0) {
        bail!("--ell must be positive, got {}", a.ell);
    }
    let eps = a.eps.unwrap_or(1.0 / a.dims.1 as f64);
    let model = CovarianceModel::new(a.model, a.ell);
    let centre = (a.origin.0 + eps / 2.0, a.origin.1 + eps / 2.0);
    let field = FieldSampler::new(model, a.dims.0, a.dims.1, eps, a.mode)?
        .with_origin(centre)
        .sample(a.seed);
    let img = digitize(&field, a.lambda);
    let report = TopologyReport::measure(&img);

    std::fs::create_dir_all(&a.out).with_context(|| format!("creating {}", a.out.display()))?;
    let mut outputs = Vec::new();
    let (pgm, sidecar) = netpbm::write_pgm(&field);
    write(&a.out, "field.pgm", pgm, &mut outputs)?;
    write(&a.out, "field.json", json_text(&sidecar)?, &mut outputs)?;
    if a.field_csv {
        write(&a.out, "field.csv", netpbm::field_csv(&field), &mut outputs)?;
    }
    write(
        &a.out,
        "excursion.pbm",
        io::write_pbm(&img, a.pbm_format.into()),
        &mut outputs,
    )?;
    write(&a.out, "report.json", json_text(&report)?, &mut outputs)?;
    write(
        &a.out,
        "report.csv",
        tables::report_csv(&report),
        &mut outputs,
    )?;

    let config = json!({
        "model": model,
        "dims": [a.dims.0, a.dims.1],
        "eps": eps,
        "seed": a.seed,
        "lambda": a.lambda,
        "mode": a.mode,
        "origin": [a.origin.0, a.origin.1],
    });
    let mut m = RunManifest::new("simulate", config, a.seed);
    m.seed_rule =
        "field drawn directly from --seed; streams are ChaCha8 keyed by SplitMix64 expansion"
            .into();
    m.outputs = outputs;
    m.wall_seconds = start.elapsed().as_secs_f64();
    m.write_last(&a.out)?;
    Ok(())
}

fn analyze(a: AnalyzeArgs) -> Result<()> {
    if !(a.eps.is_finite() && a.eps > 0.0) {
        bail!("--eps must be positive, got {}", a.eps);
    }
    let data = std::fs::read(&a.image).with_context(|| format!("reading {}", a.image.display()))?;
    let img = io::read_pbm(&data, a.eps, a.mode).with_context(|| a.image.display().to_string())?;
    let report = TopologyReport::measure(&img);
    if a.csv {
        print!("{}", tables::report_csv(&report));
    } else {
        print!("{}", json_text(&report)?);
    }
    Ok(())
}

fn predict(a: PredictArgs) -> Result<()> {
    let (mu, model) = match (a.mu, a.model, a.ell) {
        (Some(mu), _, _) => (mu, None),
        (None, Some(kind), Some(ell)) => {
            if !(ell.is_finite() && ell > 0.0) {
                bail!("--ell must be positive, got {ell}");
            }
            let m = CovarianceModel::new(kind, ell);
            let mu = if a.allow_irregular {
                m.spectral_moment_unchecked()
            } else {
                m.spectral_moment()
                    .context("pass --allow-irregular to use its spectral moment anyway")?
            };
            (mu, Some(m))
        }
        _ => bail!("give either --mu or both --model and --ell"),
    };
    if !(mu.is_finite() && mu > 0.0) {
        bail!("spectral moment must be positive, got {mu}");
    }
    let rects = if a.window.is_empty() {
        vec![Rect::new(0.0, 1.0, 0.0, 1.0)]
    } else {
        a.window
    };
    let window = Window::new(rects)?;
    let primary = if a.paper_phi {
        PhiConvention::Centered
    } else {
        PhiConvention::Cdf
    };
    let mut levels = Vec::new();
    for &lambda in &a.lambda {
        let densities = GaussianDensities::new(mu, lambda)?;
        let cdf = expected_functionals(&window, mu, lambda, PhiConvention::Cdf)?;
        let paper = expected_functionals(&window, mu, lambda, PhiConvention::Centered)?;
        let expected = if primary == PhiConvention::Centered {
            paper
        } else {
            cdf
        };
        levels.push(json!({
            "lambda": lambda,
            "densities": densities,
            "paper_phi": paper_phi(lambda),
            "expected": expected,
            "expected_cdf_phi": cdf,
            "expected_paper_phi": paper,
        }));
    }
    let out = json!({
        "mu": mu,
        "model": model,
        "phi_convention": primary,
        "window": {
            "rects": window.rects(),
            "vol": window.vol(),
            "per_u1": window.per_u(1),
            "per_u2": window.per_u(2),
            "per_inf": window.per_inf(),
            "euler": window.euler(),
        },
        "levels": levels,
    });
    print!("{}", json_text(&out)?);
    Ok(())
}

fn load_config(path: &Path) -> Result<(ExperimentConfig, RawConfig, Vec<u8>)> {
    let bytes = std::fs::read(path).with_context(|| format!("reading {}", path.display()))?;
    let text = std::str::from_utf8(&bytes).context("config is not UTF-8")?;
    let raw = RawConfig::parse(text).with_context(|| path.display().to_string())?;
    let config = raw.resolve().with_context(|| path.display().to_string())?;
    Ok((config, raw, bytes))
}

fn run_experiment(a: RunArgs, sweep: bool) -> Result<()> {
    let start = Instant::now();
    let (config, raw, bytes) = load_config(&a.config)?;
    std::fs::create_dir_all(&a.out).with_context(|| format!("creating {}", a.out.display()))?;
    let mut outputs = Vec::new();
    let mut adjudication = Vec::new();
    let command = if sweep {
        let rows = experiment::convergence_sweep(&config)?;
        write(&a.out, "sweep.csv", tables::sweep_csv(&rows), &mut outputs)?;
        "sweep"
    } else {
        let stats = if config.windows.len() >= 2 {
            experiment::window_term_experiment(&config)?
        } else {
            experiment::run(&config)?
        };
        write(
            &a.out,
            "summary.csv",
            tables::summary_csv(&stats),
            &mut outputs,
        )?;
        write(
            &a.out,
            "alternatives.csv",
            tables::alternatives_csv(&stats),
            &mut outputs,
        )?;
        adjudication = manifest::adjudicate(&stats);
        "experiment"
    };
    let mut m = RunManifest::new(command, serde_json::to_value(&raw)?, config.seed);
    m.config_sha256 = Some(manifest::sha256_hex(&bytes));
    m.outputs = outputs;
    m.adjudication = adjudication;
    m.wall_seconds = start.elapsed().as_secs_f64();
    m.write_last(&a.out)?;
    Ok(())
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let result = match cli.command {
        Command::Simulate(a) => simulate(a),
        Command::Analyze(a) => analyze(a),
        Command::Predict(a) => predict(a),
        Command::Experiment(a) => run_experiment(a, false),
        Command::Sweep(a) => run_experiment(a, true),
    };
    match result {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::FAILURE
        }
    }
}
