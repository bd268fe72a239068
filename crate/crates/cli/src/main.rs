use std::path::PathBuf;
use std::process::ExitCode;

use ars_cli::config::{Equation, FrameVariant, FrontStartKind};
use ars_cli::{run, CliError, Command, RunConfig};
use clap::{Args, Parser, Subcommand};

/// Almost-Riemannian numerics. Settings come from `--config` (TOML), then
/// command-line flags override them. Without a subcommand the config's
/// `command` is run (default: `metric`).
#[derive(Parser, Debug)]
#[command(name = "ars", version)]
struct Cli {
    #[arg(long, global = true)]
    config: Option<PathBuf>,
    /// Output directory.
    #[arg(long, global = true)]
    out: Option<PathBuf>,
    #[arg(long, global = true, value_enum)]
    frame: Option<FrameArg>,
    /// Exponent for the alpha-Grushin frame.
    #[arg(long, global = true)]
    frame_alpha: Option<f64>,
    #[command(subcommand)]
    command: Option<Cmd>,
}

#[derive(Clone, Copy, Debug, clap::ValueEnum)]
enum FrameArg {
    Grushin,
    F1,
    F2,
    AlphaGrushin,
    Martinet,
}

#[derive(Subcommand, Debug)]
enum Cmd {
    /// Integrate one geodesic.
    Geodesic(GeodesicArgs),
    /// Front of unit-speed geodesics at time t.
    Front(FrontArgs),
    /// Merged mode spectrum of the gauge-transformed Laplacian.
    Spectrum(SpectrumArgs),
    /// Self-adjointness of -d^2/dx^2 + c/x^2.
    Classify(ClassifyArgs),
    /// Heat or Schrodinger runs over an eps sweep.
    Evolve(EvolveArgs),
    /// Martinet mode eigenvalues.
    Martinet(MartinetArgs),
    /// Metric and curvature at points.
    Metric(MetricArgs),
}

#[derive(Args, Debug)]
struct GeodesicArgs {
    #[arg(long, allow_hyphen_values = true)]
    x: Option<f64>,
    #[arg(long, allow_hyphen_values = true)]
    y: Option<f64>,
    #[arg(long, allow_hyphen_values = true)]
    lambda1: Option<f64>,
    #[arg(long, allow_hyphen_values = true)]
    lambda2: Option<f64>,
    #[arg(long)]
    t: Option<f64>,
    #[arg(long)]
    dt: Option<f64>,
}

#[derive(Args, Debug)]
struct FrontArgs {
    /// Start on the singular set at (0, y) instead of at (x, y).
    #[arg(long)]
    singular: bool,
    #[arg(long, allow_hyphen_values = true)]
    x: Option<f64>,
    #[arg(long, allow_hyphen_values = true)]
    y: Option<f64>,
    #[arg(long)]
    t: Option<f64>,
    #[arg(long)]
    n: Option<usize>,
    #[arg(long)]
    a_max: Option<f64>,
}

#[derive(Args, Debug)]
struct SpectrumArgs {
    #[arg(long)]
    alpha: Option<f64>,
    #[arg(long)]
    k_max: Option<u32>,
    #[arg(long)]
    n: Option<usize>,
    #[arg(long)]
    x_max: Option<f64>,
    #[arg(long)]
    m_per_mode: Option<usize>,
}

#[derive(Args, Debug)]
struct ClassifyArgs {
    #[arg(long, allow_hyphen_values = true)]
    c: Option<f64>,
    #[arg(long)]
    alpha: Option<f64>,
}

#[derive(Args, Debug)]
struct EvolveArgs {
    #[arg(long)]
    alpha: Option<f64>,
    /// Comma-separated regularization scales, largest first.
    #[arg(long, value_delimiter = ',')]
    eps: Option<Vec<f64>>,
    #[arg(long, value_enum)]
    equation: Option<EquationArg>,
    #[arg(long)]
    dt: Option<f64>,
    #[arg(long)]
    t: Option<f64>,
    #[arg(long)]
    n_x: Option<usize>,
    #[arg(long)]
    n_y: Option<usize>,
    #[arg(long, allow_hyphen_values = true)]
    bump_x: Option<f64>,
    #[arg(long)]
    bump_width: Option<f64>,
    #[arg(long, allow_hyphen_values = true)]
    k0: Option<f64>,
    #[arg(long)]
    margin: Option<f64>,
}

#[derive(Clone, Copy, Debug, clap::ValueEnum)]
enum EquationArg {
    Heat,
    Schrodinger,
}

#[derive(Args, Debug)]
struct MartinetArgs {
    #[arg(long, allow_hyphen_values = true)]
    k_min: Option<i64>,
    #[arg(long, allow_hyphen_values = true)]
    k_max: Option<i64>,
    #[arg(long, allow_hyphen_values = true)]
    l_min: Option<i64>,
    #[arg(long, allow_hyphen_values = true)]
    l_max: Option<i64>,
    #[arg(long)]
    n: Option<usize>,
    #[arg(long)]
    y_max: Option<f64>,
    #[arg(long)]
    m: Option<usize>,
}

#[derive(Args, Debug)]
struct MetricArgs {
    #[arg(long, allow_hyphen_values = true)]
    x: Option<f64>,
    #[arg(long, allow_hyphen_values = true)]
    y: Option<f64>,
}

fn set<T>(slot: &mut T, value: Option<T>) {
    if let Some(v) = value {
        *slot = v;
    }
}

fn build_config(cli: Cli) -> Result<RunConfig, CliError> {
    let mut cfg = match &cli.config {
        Some(path) => {
            let text = std::fs::read_to_string(path).map_err(|e| CliError::Validation(format!("config {}: {e}", path.display())))?;
            RunConfig::from_toml(&text)?
        }
        None => RunConfig::default(),
    };
    set(&mut cfg.output_dir, cli.out);
    if let Some(f) = cli.frame {
        cfg.frame.variant = match f {
            FrameArg::Grushin => FrameVariant::Grushin,
            FrameArg::F1 => FrameVariant::F1,
            FrameArg::F2 => FrameVariant::F2,
            FrameArg::AlphaGrushin => FrameVariant::AlphaGrushin,
            FrameArg::Martinet => FrameVariant::Martinet,
        };
    }
    set(&mut cfg.frame.alpha, cli.frame_alpha);
    match cli.command {
        None => {}
        Some(Cmd::Geodesic(a)) => {
            cfg.command = Command::Geodesic;
            let g = &mut cfg.geodesic;
            set(&mut g.x, a.x);
            set(&mut g.y, a.y);
            set(&mut g.lambda1, a.lambda1);
            set(&mut g.lambda2, a.lambda2);
            set(&mut g.t, a.t);
            set(&mut g.dt, a.dt);
        }
        Some(Cmd::Front(a)) => {
            cfg.command = Command::Front;
            let f = &mut cfg.front;
            if a.singular {
                f.start = FrontStartKind::Singular;
            } else if a.x.is_some() {
                f.start = FrontStartKind::Point;
            }
            set(&mut f.x, a.x);
            set(&mut f.y, a.y);
            set(&mut f.t, a.t);
            set(&mut f.n, a.n);
            set(&mut f.a_max, a.a_max);
        }
        Some(Cmd::Spectrum(a)) => {
            cfg.command = Command::Spectrum;
            let s = &mut cfg.spectrum;
            set(&mut s.alpha, a.alpha);
            set(&mut s.k_max, a.k_max);
            set(&mut s.n, a.n);
            set(&mut s.x_max, a.x_max);
            set(&mut s.m_per_mode, a.m_per_mode);
        }
        Some(Cmd::Classify(a)) => {
            cfg.command = Command::Classify;
            // an explicit flag replaces whichever of c / alpha the config chose
            if a.c.is_some() || a.alpha.is_some() {
                cfg.classify.c = a.c;
            }
            set(&mut cfg.classify.alpha, a.alpha);
        }
        Some(Cmd::Evolve(a)) => {
            cfg.command = Command::Evolve;
            let e = &mut cfg.evolve;
            set(&mut e.alpha, a.alpha);
            set(&mut e.eps, a.eps);
            if let Some(eq) = a.equation {
                e.equation = match eq {
                    EquationArg::Heat => Equation::Heat,
                    EquationArg::Schrodinger => Equation::Schrodinger,
                };
            }
            set(&mut e.dt, a.dt);
            set(&mut e.t, a.t);
            set(&mut e.n_x, a.n_x);
            set(&mut e.n_y, a.n_y);
            set(&mut e.bump_x, a.bump_x);
            set(&mut e.bump_width, a.bump_width);
            set(&mut e.k0, a.k0);
            set(&mut e.margin, a.margin);
        }
        Some(Cmd::Martinet(a)) => {
            cfg.command = Command::Martinet;
            let m = &mut cfg.martinet;
            set(&mut m.k_min, a.k_min);
            set(&mut m.k_max, a.k_max);
            set(&mut m.l_min, a.l_min);
            set(&mut m.l_max, a.l_max);
            set(&mut m.n, a.n);
            set(&mut m.y_max, a.y_max);
            set(&mut m.m, a.m);
        }
        Some(Cmd::Metric(a)) => {
            cfg.command = Command::Metric;
            if a.x.is_some() || a.y.is_some() {
                cfg.metric.points = vec![[a.x.unwrap_or(1.0), a.y.unwrap_or(0.0)]];
            }
        }
    }
    Ok(cfg)
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let result = build_config(cli).and_then(|cfg| run(&cfg));
    match result {
        Ok(manifest) => {
            println!("{}: wrote {} to {}", manifest.command.name(), manifest.files.join(", "), manifest.config.output_dir.display());
            ExitCode::SUCCESS
        }
        Err(e) => {
            eprintln!("ars: {e}");
            ExitCode::from(e.exit_code() as u8)
        }
    }
}
