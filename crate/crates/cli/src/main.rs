use std::path::PathBuf;
use std::str::FromStr;

use clap::{Args, Parser, Subcommand};

use curved_dirac::DerivativeScheme;
use curved_dirac_cli::config::{
    parse_config_file, parse_grid_spec, parse_param, parse_singular_list, simulate_defaults,
    verify_defaults, Method, OutputFormat, PartialConfig, RunConfig,
};
use curved_dirac_cli::verify::VerifyOptions;
use curved_dirac_cli::{fig1, output, simulate, svg, verify, CliError};

/// Dirac wavepackets on static curved 1+1D backgrounds.
#[derive(Parser)]
#[command(name = "curved-dirac", version, about)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Evolve a Gaussian packet and write flat + curved density frames.
    Simulate(SimulateArgs),
    /// Cross-check the conformal map against the direct curved integrator.
    Verify(VerifyArgs),
    /// Render the built-in six-panel wavepacket figure.
    Fig1(Fig1Args),
}

/// Scenario flags shared by `simulate` and `verify`. Values omitted here
/// fall back to the config file (if any), then to the subcommand defaults.
#[derive(Args, Default)]
struct ScenarioArgs {
    /// Read defaults from a key=value config file.
    #[arg(long)]
    config: Option<PathBuf>,
    /// Background metric: `wormhole` or `flat`.
    #[arg(long)]
    metric: Option<String>,
    /// Wormhole throat radius.
    #[arg(long)]
    b0: Option<f64>,
    /// Conformal factor Omega(x) as an expression, e.g. `sqrt(x^2/(x^2+b0^2))`.
    #[arg(long)]
    omega_expr: Option<String>,
    /// Expression parameter binding, NAME=VALUE (repeatable).
    #[arg(long = "param")]
    params: Vec<String>,
    /// Comma-separated singular points of the expression metric.
    #[arg(long, allow_hyphen_values = true)]
    singular: Option<String>,
    /// Initial packet center.
    #[arg(long, allow_negative_numbers = true)]
    x0: Option<f64>,
    /// Initial packet width.
    #[arg(long)]
    sigma: Option<f64>,
    /// Spatial grid, XMIN:XMAX:N.
    #[arg(long, allow_hyphen_values = true)]
    grid: Option<String>,
    /// Final time.
    #[arg(long = "t-end")]
    t_end: Option<f64>,
    /// Output a frame every this many internal steps.
    #[arg(long)]
    stride: Option<usize>,
    /// Flat evolution method: `closed` or `spectral`.
    #[arg(long)]
    method: Option<String>,
    /// Output format: `csv` or `json`.
    #[arg(long)]
    format: Option<String>,
    /// Output path.
    #[arg(long)]
    out: Option<PathBuf>,
    /// Verification tolerance (relative max norm).
    #[arg(long)]
    tol: Option<f64>,
}

#[derive(Args)]
struct SimulateArgs {
    #[command(flatten)]
    scenario: ScenarioArgs,
    /// Also write an SVG heat map of the curved density to this path.
    #[arg(long)]
    svg: Option<PathBuf>,
}

#[derive(Args)]
struct VerifyArgs {
    #[command(flatten)]
    scenario: ScenarioArgs,
    /// Compare against the unmapped flat solution (negative control; a
    /// correct implementation must then report FAIL).
    #[arg(long)]
    skip_map: bool,
    /// Spatial derivative of the direct integrator: `spectral` or `fd4`.
    #[arg(long)]
    scheme: Option<String>,
}

#[derive(Args)]
struct Fig1Args {
    /// Directory for the panel CSVs, SVGs, and summary.json.
    #[arg(long, default_value = "fig1")]
    out_dir: PathBuf,
    /// Wormhole throat radius for the curved panels.
    #[arg(long, default_value_t = 10.0)]
    b0: f64,
}

impl ScenarioArgs {
    fn to_partial(&self) -> Result<PartialConfig, CliError> {
        let mut partial = PartialConfig {
            metric: self.metric.clone(),
            b0: self.b0,
            omega_expr: self.omega_expr.clone(),
            x0: self.x0,
            sigma: self.sigma,
            t_end: self.t_end,
            stride: self.stride,
            out: self.out.clone(),
            tol: self.tol,
            ..Default::default()
        };
        for p in &self.params {
            partial.params.push(parse_param(p)?);
        }
        if let Some(s) = &self.singular {
            partial.singular = Some(parse_singular_list(s)?);
        }
        if let Some(g) = &self.grid {
            partial.grid = Some(parse_grid_spec(g)?);
        }
        if let Some(m) = &self.method {
            partial.method = Some(Method::from_str(m)?);
        }
        if let Some(f) = &self.format {
            partial.format = Some(OutputFormat::from_str(f)?);
        }
        Ok(partial)
    }

    /// Flags over config file over defaults, then validate.
    fn resolve(&self, defaults: &RunConfig) -> Result<RunConfig, CliError> {
        let flags = self.to_partial()?;
        let base = match &self.config {
            Some(path) => {
                let text = std::fs::read_to_string(path).map_err(|e| {
                    CliError::Config(format!("cannot read config file {}: {e}", path.display()))
                })?;
                parse_config_file(&text)?
            }
            None => PartialConfig::default(),
        };
        flags.over(base).resolve(defaults)
    }
}

fn write_frames(config: &RunConfig, frames: &output::FrameSet) -> Result<(), CliError> {
    match config.format {
        curved_dirac_cli::config::OutputFormat::Csv => {
            output::write_csv(&config.out, frames)?;
            output::write_config_sidecar(&config.out, &config.to_key_values())?;
        }
        curved_dirac_cli::config::OutputFormat::Json => {
            output::write_json(&config.out, &config.to_key_values(), frames)?;
        }
    }
    Ok(())
}

fn run_simulate(args: &SimulateArgs) -> Result<i32, CliError> {
    let config = args.scenario.resolve(&simulate_defaults())?;
    let frames = simulate::run(&config)?;
    write_frames(&config, &frames)?;
    if let Some(svg_path) = &args.svg {
        let times: Vec<f64> = frames.frames.iter().map(|f| f.t).collect();
        let rows: Vec<_> = frames
            .frames
            .iter()
            .map(|f| f.density_curved.clone())
            .collect();
        let title = format!("curved density, {}", config.metric_name());
        svg::density_heatmap(svg_path, &title, &frames.grid, &times, &rows)?;
    }
    println!(
        "wrote {} frames ({} grid points each) to {}",
        frames.frames.len(),
        frames.grid.n(),
        config.out.display()
    );
    Ok(0)
}

fn run_verify(args: &VerifyArgs) -> Result<i32, CliError> {
    let config = args.scenario.resolve(&verify_defaults())?;
    let scheme = match args.scheme.as_deref() {
        None | Some("spectral") => DerivativeScheme::Spectral,
        Some("fd4") => DerivativeScheme::FourthOrderCentral,
        Some(other) => {
            return Err(CliError::Config(format!(
                "unknown scheme `{other}` (expected spectral|fd4)"
            )))
        }
    };
    let opts = VerifyOptions {
        skip_map: args.skip_map,
        scheme,
    };
    let (report, frames) = verify::run(&config, &opts)?;
    print!("{}", report.render());
    // only write the integrator snapshot when a destination was requested
    if args.scenario.out.is_some() {
        write_frames(&config, &frames)?;
    }
    if report.passed() {
        println!("verification PASSED ({} checks)", report.checks.len());
        Ok(0)
    } else {
        let failed = report.checks.iter().filter(|c| !c.passed).count();
        println!(
            "verification FAILED ({failed} of {} checks)",
            report.checks.len()
        );
        Ok(1)
    }
}

fn run_fig1(args: &Fig1Args) -> Result<i32, CliError> {
    if !(args.b0 > 0.0) {
        return Err(CliError::Config(format!(
            "throat radius b0 = {} must be strictly positive",
            args.b0
        )));
    }
    fig1::run(&args.out_dir, args.b0)?;
    println!(
        "wrote 6 panels and summary.json to {}",
        args.out_dir.display()
    );
    Ok(0)
}

fn main() {
    env_logger::init();
    let cli = Cli::parse();
    let result = match &cli.command {
        Command::Simulate(args) => run_simulate(args),
        Command::Verify(args) => run_verify(args),
        Command::Fig1(args) => run_fig1(args),
    };
    let code = match result {
        Ok(code) => code,
        Err(e) => {
            eprintln!("error[{}]: {e}", e.tag());
            e.exit_code()
        }
    };
    std::process::exit(code);
}
