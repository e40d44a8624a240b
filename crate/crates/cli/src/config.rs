//! Run configuration: CLI flags, flat key=value config files, and the merge
//! between them. Flags override config-file values which override defaults.

use std::collections::HashMap;
use std::fmt;
use std::path::PathBuf;
use std::str::FromStr;

use curved_dirac::flat::{GaussianPacket, GridSpec};
use curved_dirac::metric::ConformalFactor;
use curved_dirac::{dsl, metric};

use crate::CliError;

#[derive(Debug, Clone, PartialEq)]
pub enum MetricSpec {
    Wormhole { b0: f64 },
    Expression {
        source: String,
        params: Vec<(String, f64)>,
        singular: Vec<f64>,
    },
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Method {
    ClosedForm,
    Spectral,
}

impl Method {
    pub fn provenance(self) -> &'static str {
        match self {
            Method::ClosedForm => "closed-form",
            Method::Spectral => "spectral",
        }
    }
}

impl FromStr for Method {
    type Err = CliError;
    fn from_str(s: &str) -> Result<Self, CliError> {
        match s {
            "closed" => Ok(Method::ClosedForm),
            "spectral" => Ok(Method::Spectral),
            other => Err(CliError::Config(format!(
                "unknown method `{other}` (expected closed|spectral)"
            ))),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum OutputFormat {
    Csv,
    Json,
}

impl FromStr for OutputFormat {
    type Err = CliError;
    fn from_str(s: &str) -> Result<Self, CliError> {
        match s {
            "csv" => Ok(OutputFormat::Csv),
            "json" => Ok(OutputFormat::Json),
            other => Err(CliError::Config(format!(
                "unknown format `{other}` (expected csv|json)"
            ))),
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct RunConfig {
    pub metric: MetricSpec,
    pub x0: f64,
    pub sigma: f64,
    pub x_min: f64,
    pub x_max: f64,
    pub n: usize,
    pub t_end: f64,
    pub stride: usize,
    pub method: Method,
    pub format: OutputFormat,
    pub out: PathBuf,
    pub tol: f64,
}

impl RunConfig {
    /// Fail-fast validation of every module-level precondition reachable
    /// from the config alone.
    pub fn validate(&self) -> Result<(), CliError> {
        if let MetricSpec::Wormhole { b0 } = self.metric {
            if !(b0 > 0.0) {
                return Err(CliError::Config(format!(
                    "throat radius b0 = {b0} must be strictly positive"
                )));
            }
        }
        if let MetricSpec::Expression { source, .. } = &self.metric {
            if source.trim().is_empty() {
                return Err(CliError::Config("empty --omega-expr".into()));
            }
        }
        if !(self.sigma > 0.0) {
            return Err(CliError::Config(format!(
                "sigma = {} must be strictly positive",
                self.sigma
            )));
        }
        if !(self.x_min < self.x_max) {
            return Err(CliError::Config(format!(
                "grid x_min = {} must be below x_max = {}",
                self.x_min, self.x_max
            )));
        }
        if self.n < 16 {
            return Err(CliError::Config(format!(
                "grid n = {} is below the minimum of 16",
                self.n
            )));
        }
        if self.t_end < 0.0 {
            return Err(CliError::Config(format!(
                "t_end = {} must be non-negative",
                self.t_end
            )));
        }
        if self.stride == 0 {
            return Err(CliError::Config("stride must be at least 1".into()));
        }
        if !(self.tol > 0.0) {
            return Err(CliError::Config(format!(
                "tolerance {} must be strictly positive",
                self.tol
            )));
        }
        Ok(())
    }

    pub fn conformal_factor(&self) -> Result<ConformalFactor, CliError> {
        match &self.metric {
            MetricSpec::Wormhole { b0 } => {
                metric::wormhole_conformal_factor(*b0).map_err(CliError::from)
            }
            MetricSpec::Expression {
                source,
                params,
                singular,
            } => {
                let bindings: HashMap<String, f64> = params.iter().cloned().collect();
                dsl::compile_conformal_factor(
                    source,
                    &bindings,
                    singular,
                    (self.x_min, self.x_max),
                )
                .map_err(CliError::from)
            }
        }
    }

    pub fn grid(&self) -> Result<GridSpec, CliError> {
        GridSpec::new(self.x_min, self.x_max, self.n).map_err(CliError::from)
    }

    pub fn packet(&self) -> Result<GaussianPacket, CliError> {
        GaussianPacket::new(self.x0, self.sigma).map_err(CliError::from)
    }

    pub fn metric_name(&self) -> String {
        match &self.metric {
            MetricSpec::Wormhole { b0 } => format!("wormhole(b0={b0})"),
            MetricSpec::Expression { source, .. } => source.clone(),
        }
    }

    /// Flat key=value echo of the configuration; re-reading it reproduces
    /// this config (the output path is included so a re-run overwrites the
    /// same file).
    pub fn to_key_values(&self) -> String {
        let mut lines = Vec::new();
        match &self.metric {
            MetricSpec::Wormhole { b0 } => {
                lines.push("metric=wormhole".to_string());
                lines.push(format!("b0={b0}"));
            }
            MetricSpec::Expression {
                source,
                params,
                singular,
            } => {
                lines.push(format!("omega-expr={source}"));
                for (name, value) in params {
                    lines.push(format!("param={name}={value}"));
                }
                if !singular.is_empty() {
                    let list: Vec<String> =
                        singular.iter().map(|s| format!("{s}")).collect();
                    lines.push(format!("singular={}", list.join(",")));
                }
            }
        }
        lines.push(format!("x0={}", self.x0));
        lines.push(format!("sigma={}", self.sigma));
        lines.push(format!("grid={}:{}:{}", self.x_min, self.x_max, self.n));
        lines.push(format!("t-end={}", self.t_end));
        lines.push(format!("stride={}", self.stride));
        lines.push(format!(
            "method={}",
            match self.method {
                Method::ClosedForm => "closed",
                Method::Spectral => "spectral",
            }
        ));
        lines.push(format!(
            "format={}",
            match self.format {
                OutputFormat::Csv => "csv",
                OutputFormat::Json => "json",
            }
        ));
        lines.push(format!("out={}", self.out.display()));
        lines.push(format!("tol={}", self.tol));
        lines.join("\n") + "\n"
    }
}

impl fmt::Display for RunConfig {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.to_key_values())
    }
}

/// Partial configuration; `None` means "not specified at this layer".
#[derive(Debug, Default, Clone)]
pub struct PartialConfig {
    pub metric: Option<String>,
    pub b0: Option<f64>,
    pub omega_expr: Option<String>,
    pub params: Vec<(String, f64)>,
    pub singular: Option<Vec<f64>>,
    pub x0: Option<f64>,
    pub sigma: Option<f64>,
    pub grid: Option<(f64, f64, usize)>,
    pub t_end: Option<f64>,
    pub stride: Option<usize>,
    pub method: Option<Method>,
    pub format: Option<OutputFormat>,
    pub out: Option<PathBuf>,
    pub tol: Option<f64>,
}

impl PartialConfig {
    /// Overlays `self` on top of `base`: values present here win.
    pub fn over(self, base: PartialConfig) -> PartialConfig {
        PartialConfig {
            metric: self.metric.or(base.metric),
            b0: self.b0.or(base.b0),
            omega_expr: self.omega_expr.or(base.omega_expr),
            params: if self.params.is_empty() {
                base.params
            } else {
                self.params
            },
            singular: self.singular.or(base.singular),
            x0: self.x0.or(base.x0),
            sigma: self.sigma.or(base.sigma),
            grid: self.grid.or(base.grid),
            t_end: self.t_end.or(base.t_end),
            stride: self.stride.or(base.stride),
            method: self.method.or(base.method),
            format: self.format.or(base.format),
            out: self.out.or(base.out),
            tol: self.tol.or(base.tol),
        }
    }

    /// Resolves against the given defaults into a validated [`RunConfig`].
    pub fn resolve(self, defaults: &RunConfig) -> Result<RunConfig, CliError> {
        let metric = if let Some(expr) = self.omega_expr {
            MetricSpec::Expression {
                source: expr,
                params: self.params,
                singular: self.singular.unwrap_or_default(),
            }
        } else {
            match self.metric.as_deref() {
                None => {
                    if let Some(b0) = self.b0 {
                        MetricSpec::Wormhole { b0 }
                    } else {
                        defaults.metric.clone()
                    }
                }
                Some("wormhole") => MetricSpec::Wormhole {
                    b0: self.b0.unwrap_or(10.0),
                },
                Some("flat") => MetricSpec::Expression {
                    source: "1".into(),
                    params: vec![],
                    singular: vec![],
                },
                Some(other) => {
                    return Err(CliError::Config(format!(
                        "unknown metric `{other}` (expected wormhole|flat, or use --omega-expr)"
                    )))
                }
            }
        };
        let (x_min, x_max, n) = self
            .grid
            .unwrap_or((defaults.x_min, defaults.x_max, defaults.n));
        let config = RunConfig {
            metric,
            x0: self.x0.unwrap_or(defaults.x0),
            sigma: self.sigma.unwrap_or(defaults.sigma),
            x_min,
            x_max,
            n,
            t_end: self.t_end.unwrap_or(defaults.t_end),
            stride: self.stride.unwrap_or(defaults.stride),
            method: self.method.unwrap_or(defaults.method),
            format: self.format.unwrap_or(defaults.format),
            out: self.out.unwrap_or_else(|| defaults.out.clone()),
            tol: self.tol.unwrap_or(defaults.tol),
        };
        config.validate()?;
        Ok(config)
    }
}

pub fn parse_grid_spec(text: &str) -> Result<(f64, f64, usize), CliError> {
    let parts: Vec<&str> = text.split(':').collect();
    if parts.len() != 3 {
        return Err(CliError::Config(format!(
            "grid `{text}` must have the form xmin:xmax:n"
        )));
    }
    let x_min: f64 = parts[0]
        .parse()
        .map_err(|_| CliError::Config(format!("bad grid x_min `{}`", parts[0])))?;
    let x_max: f64 = parts[1]
        .parse()
        .map_err(|_| CliError::Config(format!("bad grid x_max `{}`", parts[1])))?;
    let n: usize = parts[2]
        .parse()
        .map_err(|_| CliError::Config(format!("bad grid point count `{}`", parts[2])))?;
    Ok((x_min, x_max, n))
}

pub fn parse_param(text: &str) -> Result<(String, f64), CliError> {
    let (name, value) = text
        .split_once('=')
        .ok_or_else(|| CliError::Config(format!("parameter `{text}` must be NAME=VALUE")))?;
    let value: f64 = value
        .parse()
        .map_err(|_| CliError::Config(format!("bad parameter value in `{text}`")))?;
    Ok((name.to_string(), value))
}

pub fn parse_singular_list(text: &str) -> Result<Vec<f64>, CliError> {
    text.split(',')
        .filter(|s| !s.trim().is_empty())
        .map(|s| {
            s.trim()
                .parse()
                .map_err(|_| CliError::Config(format!("bad singular point `{s}`")))
        })
        .collect()
}

/// Parses the flat key=value config-file format (the same keys as the CLI
/// flags; `#` starts a comment).
pub fn parse_config_file(text: &str) -> Result<PartialConfig, CliError> {
    let mut partial = PartialConfig::default();
    for (lineno, raw) in text.lines().enumerate() {
        let line = raw.trim();
        if line.is_empty() || line.starts_with('#') {
            continue;
        }
        let (key, value) = line.split_once('=').ok_or_else(|| {
            CliError::Config(format!("config line {}: expected key=value", lineno + 1))
        })?;
        let bad = |what: &str| {
            CliError::Config(format!("config line {}: bad {what} `{value}`", lineno + 1))
        };
        match key.trim() {
            "metric" => partial.metric = Some(value.trim().to_string()),
            "b0" => partial.b0 = Some(value.trim().parse().map_err(|_| bad("b0"))?),
            "omega-expr" => partial.omega_expr = Some(value.to_string()),
            "param" => partial.params.push(parse_param(value)?),
            "singular" => partial.singular = Some(parse_singular_list(value)?),
            "x0" => partial.x0 = Some(value.trim().parse().map_err(|_| bad("x0"))?),
            "sigma" => partial.sigma = Some(value.trim().parse().map_err(|_| bad("sigma"))?),
            "grid" => partial.grid = Some(parse_grid_spec(value.trim())?),
            "t-end" => partial.t_end = Some(value.trim().parse().map_err(|_| bad("t-end"))?),
            "stride" => partial.stride = Some(value.trim().parse().map_err(|_| bad("stride"))?),
            "method" => partial.method = Some(value.trim().parse()?),
            "format" => partial.format = Some(value.trim().parse()?),
            "out" => partial.out = Some(PathBuf::from(value.trim())),
            "tol" => partial.tol = Some(value.trim().parse().map_err(|_| bad("tol"))?),
            other => {
                return Err(CliError::Config(format!(
                    "config line {}: unknown key `{other}`",
                    lineno + 1
                )))
            }
        }
    }
    Ok(partial)
}

/// Defaults for `simulate`: the first wormhole scenario of the built-in
/// figure (b0 = 10, x0 = -10, sigma = 5).
pub fn simulate_defaults() -> RunConfig {
    RunConfig {
        metric: MetricSpec::Wormhole { b0: 10.0 },
        x0: -10.0,
        sigma: 5.0,
        x_min: -60.0,
        x_max: 60.0,
        n: 512,
        t_end: 20.0,
        stride: 64,
        method: Method::ClosedForm,
        format: OutputFormat::Csv,
        out: PathBuf::from("simulation.csv"),
        tol: 1e-6,
    }
}

/// Defaults for `verify`: one-branch wormhole run well clear of the throat.
pub fn verify_defaults() -> RunConfig {
    RunConfig {
        metric: MetricSpec::Wormhole { b0: 10.0 },
        x0: 30.0,
        sigma: 5.0,
        x_min: 2.0,
        x_max: 130.0,
        n: 4096,
        t_end: 10.0,
        stride: 1,
        method: Method::ClosedForm,
        format: OutputFormat::Csv,
        out: PathBuf::from("verify.csv"),
        tol: 5e-6,
    }
}
