//! Command-line and config-file parsing into a validated [`RunConfig`].

use clap::{Args, Parser, Subcommand};
use dqsd::bridge::BRIDGE_SCALE_RATIO;
use dqsd::dqop_flow::{DqopOptions, MobilityAverage};
use dqsd::DiskDomain;
use std::collections::BTreeMap;
use std::fmt::Display;
use std::path::{Path, PathBuf};
use std::str::FromStr;

/// Environment variable naming the default output directory.
pub const OUTPUT_DIR_ENV: &str = "DQSD_OUTPUT_DIR";
pub const DEFAULT_OUTPUT_DIR: &str = "dqsd-out";

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
#[error("{0}")]
pub struct ConfigError(pub String);

fn bad(msg: impl Into<String>) -> ConfigError {
    ConfigError(msg.into())
}

#[derive(Parser, Debug)]
#[command(name = "dqsd", version, about = "Deep quench obstacle problem and surface diffusion on a disk")]
#[command(arg_required_else_help = true)]
pub struct Cli {
    /// Plain-text `key = value` file; flags override its values.
    #[arg(long, global = true)]
    pub config: Option<PathBuf>,
    /// Directory for the written artifacts [default: $DQSD_OUTPUT_DIR, then dqsd-out].
    #[arg(long, global = true)]
    pub output_dir: Option<PathBuf>,
    #[command(subcommand)]
    pub command: CliCommand,
}

#[derive(Subcommand, Debug)]
pub enum CliCommand {
    /// Annular steady state for a rescaled radius q0.
    SteadyAnnular(AnnularFlags),
    /// Dimple steady state from u(0), the mean mass or the radius.
    SteadyDimple(DimpleFlags),
    /// Surface diffusion of a perturbed circle.
    EvolveSd(SdFlags),
    /// Radial DQOP flow.
    EvolveDqop(DqopFlags),
    /// Lift and project circles over a range of epsilon.
    BridgeSweep(BridgeFlags),
    /// Identity residuals of the Bessel routines.
    #[command(hide = true)]
    SpecfunCheck(SpecfunFlags),
}

#[derive(Args, Debug, Default)]
pub struct DomainFlags {
    #[arg(long)]
    pub epsilon: Option<f64>,
    #[arg(long = "R0")]
    pub radius: Option<f64>,
    #[arg(long)]
    pub delta: Option<f64>,
}

#[derive(Args, Debug)]
pub struct AnnularFlags {
    #[arg(long)]
    pub q0: Option<f64>,
    /// Target radius; used when q0 is absent.
    #[arg(long)]
    pub r0: Option<f64>,
    #[arg(long)]
    pub grid_n: Option<usize>,
    #[command(flatten)]
    pub domain: DomainFlags,
}

#[derive(Args, Debug)]
pub struct DimpleFlags {
    #[arg(long)]
    pub u_center: Option<f64>,
    #[arg(long)]
    pub u_bar: Option<f64>,
    #[arg(long)]
    pub r0: Option<f64>,
    #[arg(long)]
    pub grid_n: Option<usize>,
    #[command(flatten)]
    pub domain: DomainFlags,
}

#[derive(Args, Debug)]
pub struct SdFlags {
    /// semi_implicit or minmove.
    #[arg(long)]
    pub scheme: Option<String>,
    /// circle or cos<k>, for r = radius (1 + amp cos kθ).
    #[arg(long)]
    pub shape: Option<String>,
    #[arg(long)]
    pub amp: Option<f64>,
    #[arg(long)]
    pub radius: Option<f64>,
    #[arg(long = "T")]
    pub horizon: Option<f64>,
    #[arg(long = "N")]
    pub markers: Option<usize>,
    #[arg(long)]
    pub dt: Option<f64>,
    #[arg(long)]
    pub output_cadence: Option<usize>,
    /// Disk radius for the domain-exit check; no check when absent.
    #[arg(long = "R0")]
    pub disk_radius: Option<f64>,
    #[arg(long)]
    pub delta: Option<f64>,
}

#[derive(Args, Debug)]
pub struct DqopFlags {
    /// lift, stretched, dimple or constant.
    #[arg(long)]
    pub init: Option<String>,
    #[arg(long)]
    pub r0: Option<f64>,
    #[arg(long)]
    pub stretch: Option<f64>,
    #[arg(long)]
    pub u_center: Option<f64>,
    #[arg(long)]
    pub u_bar: Option<f64>,
    #[arg(long)]
    pub grid_n: Option<usize>,
    #[arg(long)]
    pub tau: Option<f64>,
    #[arg(long = "T")]
    pub horizon: Option<f64>,
    #[arg(long)]
    pub output_cadence: Option<usize>,
    #[arg(long)]
    pub active_set_tol: Option<f64>,
    /// midpoint or harmonic.
    #[arg(long)]
    pub mobility: Option<String>,
    #[command(flatten)]
    pub domain: DomainFlags,
}

#[derive(Args, Debug)]
pub struct BridgeFlags {
    /// Comma-separated list.
    #[arg(long)]
    pub epsilons: Option<String>,
    #[arg(long)]
    pub r0: Option<f64>,
    #[arg(long = "R0")]
    pub radius: Option<f64>,
    #[arg(long)]
    pub delta: Option<f64>,
    #[arg(long)]
    pub grid_n: Option<usize>,
}

#[derive(Args, Debug)]
pub struct SpecfunFlags {
    #[arg(long)]
    pub points: Option<usize>,
    #[arg(long)]
    pub x_min: Option<f64>,
    #[arg(long)]
    pub x_max: Option<f64>,
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub enum SdScheme {
    SemiImplicit,
    MinMove,
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub enum DimpleTarget {
    Center(f64),
    Mean(f64),
    Radius(f64),
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub enum DqopInit {
    Lift { r0: f64 },
    Stretched { r0: f64, factor: f64 },
    Dimple { u_center: f64 },
    Constant { u_bar: f64 },
}

#[derive(Clone, Debug, PartialEq)]
pub struct AnnularConfig {
    pub q0: f64,
    pub domain: DiskDomain,
    pub grid_n: usize,
}

#[derive(Clone, Debug, PartialEq)]
pub struct DimpleConfig {
    pub target: DimpleTarget,
    pub domain: DiskDomain,
    pub grid_n: usize,
}

#[derive(Clone, Debug, PartialEq)]
pub struct SdConfig {
    pub scheme: SdScheme,
    /// Mode number; 0 is the unperturbed circle.
    pub mode: u32,
    pub amp: f64,
    pub radius: f64,
    pub horizon: f64,
    pub markers: usize,
    pub dt: f64,
    pub cadence: usize,
    pub domain: Option<DiskDomain>,
}

#[derive(Clone, Debug, PartialEq)]
pub struct DqopConfig {
    pub init: DqopInit,
    pub domain: DiskDomain,
    pub grid_n: usize,
    pub tau: f64,
    pub horizon: f64,
    pub cadence: usize,
    pub options: DqopOptions,
}

#[derive(Clone, Debug, PartialEq)]
pub struct BridgeConfig {
    pub epsilons: Vec<f64>,
    pub r0: f64,
    pub radius: f64,
    pub delta: f64,
    pub grid_n: usize,
}

#[derive(Clone, Debug, PartialEq)]
pub struct SpecfunConfig {
    pub points: usize,
    pub x_min: f64,
    pub x_max: f64,
}

#[derive(Clone, Debug, PartialEq)]
pub enum Command {
    SteadyAnnular(AnnularConfig),
    SteadyDimple(DimpleConfig),
    EvolveSd(SdConfig),
    EvolveDqop(DqopConfig),
    BridgeSweep(BridgeConfig),
    SpecfunCheck(SpecfunConfig),
}

impl Command {
    pub fn name(&self) -> &'static str {
        match self {
            Command::SteadyAnnular(_) => "steady-annular",
            Command::SteadyDimple(_) => "steady-dimple",
            Command::EvolveSd(_) => "evolve-sd",
            Command::EvolveDqop(_) => "evolve-dqop",
            Command::BridgeSweep(_) => "bridge-sweep",
            Command::SpecfunCheck(_) => "specfun-check",
        }
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct RunConfig {
    pub command: Command,
    pub output_dir: PathBuf,
}

/// Parses `key = value` lines; `#` starts a comment.
pub fn parse_config_text(text: &str) -> Result<BTreeMap<String, String>, ConfigError> {
    let mut map = BTreeMap::new();
    for (no, raw) in text.lines().enumerate() {
        let line = raw.split('#').next().unwrap_or("").trim();
        if line.is_empty() {
            continue;
        }
        let (key, value) = line
            .split_once('=')
            .ok_or_else(|| bad(format!("config line {}: expected `key = value`", no + 1)))?;
        let key = key.trim().replace('-', "_");
        let value = value.trim();
        if key.is_empty() || value.is_empty() {
            return Err(bad(format!("config line {}: empty key or value", no + 1)));
        }
        if map.insert(key.clone(), value.to_string()).is_some() {
            return Err(bad(format!("config line {}: duplicate key `{key}`", no + 1)));
        }
    }
    Ok(map)
}

/// File values for one command; each key is consumed once, and leftovers
/// are reported as unknown.
struct Source {
    file: BTreeMap<String, String>,
}

impl Source {
    fn get<T>(&mut self, key: &str, flag: Option<T>) -> Result<Option<T>, ConfigError>
    where
        T: FromStr,
        T::Err: Display,
    {
        let from_file = self.file.remove(key);
        if flag.is_some() {
            return Ok(flag);
        }
        match from_file {
            None => Ok(None),
            Some(v) => v.parse().map(Some).map_err(|e| bad(format!("invalid value `{v}` for `{key}`: {e}"))),
        }
    }

    fn or<T>(&mut self, key: &str, flag: Option<T>, default: T) -> Result<T, ConfigError>
    where
        T: FromStr,
        T::Err: Display,
    {
        Ok(self.get(key, flag)?.unwrap_or(default))
    }

    fn finish(self, command: &str) -> Result<(), ConfigError> {
        match self.file.keys().next() {
            Some(k) => Err(bad(format!("unknown key `{k}` for {command}"))),
            None => Ok(()),
        }
    }
}

fn positive(key: &str, v: f64) -> Result<f64, ConfigError> {
    if v > 0.0 && v.is_finite() {
        Ok(v)
    } else {
        Err(bad(format!("`{key}` must be positive and finite, got {v}")))
    }
}

fn at_least(key: &str, v: usize, min: usize) -> Result<usize, ConfigError> {
    if v >= min {
        Ok(v)
    } else {
        Err(bad(format!("`{key}` must be at least {min}, got {v}")))
    }
}

fn domain(src: &mut Source, flags: &DomainFlags) -> Result<DiskDomain, ConfigError> {
    let epsilon = src.or("epsilon", flags.epsilon, 0.01)?;
    let radius = src.or("R0", flags.radius, 1.0)?;
    let delta = src.or("delta", flags.delta, 0.1)?;
    DiskDomain::new(radius, delta, epsilon).map_err(|e| bad(e.to_string()))
}

fn annular(src: &mut Source, f: AnnularFlags) -> Result<Command, ConfigError> {
    let domain = domain(src, &f.domain)?;
    let q0 = src.get("q0", f.q0)?;
    let r0 = src.get("r0", f.r0)?;
    let q0 = match (q0, r0) {
        (Some(q), _) => q,
        (None, Some(r)) => r / domain.epsilon,
        (None, None) => return Err(bad("missing required key `q0` (or `r0`)")),
    };
    let grid_n = at_least("grid_n", src.or("grid_n", f.grid_n, 2048)?, 2)?;
    Ok(Command::SteadyAnnular(AnnularConfig { q0: positive("q0", q0)?, domain, grid_n }))
}

fn dimple(src: &mut Source, f: DimpleFlags) -> Result<Command, ConfigError> {
    let domain = domain(src, &f.domain)?;
    let given = [
        src.get("u_center", f.u_center)?.map(DimpleTarget::Center),
        src.get("u_bar", f.u_bar)?.map(DimpleTarget::Mean),
        src.get("r0", f.r0)?.map(DimpleTarget::Radius),
    ];
    let mut set = given.iter().flatten();
    let target = match (set.next(), set.next()) {
        (Some(t), None) => *t,
        (None, _) => return Err(bad("missing required key: one of `u_center`, `u_bar`, `r0`")),
        (Some(_), Some(_)) => return Err(bad("give only one of `u_center`, `u_bar`, `r0`")),
    };
    let grid_n = at_least("grid_n", src.or("grid_n", f.grid_n, 2048)?, 2)?;
    Ok(Command::SteadyDimple(DimpleConfig { target, domain, grid_n }))
}

fn sd(src: &mut Source, f: SdFlags) -> Result<Command, ConfigError> {
    let scheme = match src.or("scheme", f.scheme, "semi_implicit".into())?.as_str() {
        "semi_implicit" => SdScheme::SemiImplicit,
        "minmove" => SdScheme::MinMove,
        other => return Err(bad(format!("`scheme` must be semi_implicit or minmove, got `{other}`"))),
    };
    let shape = src.or("shape", f.shape, "cos2".into())?;
    let mode = if shape == "circle" {
        0
    } else {
        shape
            .strip_prefix("cos")
            .and_then(|k| k.parse::<u32>().ok())
            .filter(|&k| k >= 1)
            .ok_or_else(|| bad(format!("`shape` must be circle or cos<k>, got `{shape}`")))?
    };
    let amp = src.or("amp", f.amp, 0.05)?;
    if !(amp.abs() < 1.0) {
        return Err(bad(format!("`amp` must lie in (-1, 1), got {amp}")));
    }
    let radius = positive("radius", src.or("radius", f.radius, 1.0)?)?;
    let horizon = src.or("T", f.horizon, 1.0)?;
    if !(horizon >= 0.0 && horizon.is_finite()) {
        return Err(bad(format!("`T` must be non-negative, got {horizon}")));
    }
    let markers = at_least("N", src.or("N", f.markers, 256)?, 16)?;
    if scheme == SdScheme::MinMove && markers % 2 == 1 {
        return Err(bad("`N` must be even for the minmove scheme"));
    }
    let dt = positive("dt", src.or("dt", f.dt, 1e-3)?)?;
    let cadence = at_least("output_cadence", src.or("output_cadence", f.output_cadence, 10)?, 1)?;
    let disk = src.get("R0", f.disk_radius)?;
    let delta = src.get("delta", f.delta)?;
    let domain = match disk {
        None if delta.is_some() => return Err(bad("`delta` needs `R0`")),
        None => None,
        Some(r) => {
            let delta = delta.unwrap_or(0.1 * r);
            let eps = delta / dqsd::domain::DEFAULT_SCALE_RATIO;
            Some(DiskDomain::new(r, delta, eps).map_err(|e| bad(e.to_string()))?)
        }
    };
    Ok(Command::EvolveSd(SdConfig { scheme, mode, amp, radius, horizon, markers, dt, cadence, domain }))
}

fn dqop(src: &mut Source, f: DqopFlags) -> Result<Command, ConfigError> {
    let domain = domain(src, &f.domain)?;
    let init_name = src.or("init", f.init, "lift".into())?;
    let r0 = src.or("r0", f.r0, 0.5)?;
    let factor = src.or("stretch", f.stretch, 1.05)?;
    let u_center = src.or("u_center", f.u_center, 1.0)?;
    let u_bar = src.or("u_bar", f.u_bar, -0.5)?;
    let init = match init_name.as_str() {
        "lift" => DqopInit::Lift { r0 },
        "stretched" => DqopInit::Stretched { r0, factor },
        "dimple" => DqopInit::Dimple { u_center },
        "constant" => DqopInit::Constant { u_bar },
        other => return Err(bad(format!("`init` must be lift, stretched, dimple or constant, got `{other}`"))),
    };
    let grid_n = at_least("grid_n", src.or("grid_n", f.grid_n, 1024)?, 4)?;
    let tau = positive("tau", src.or("tau", f.tau, 1e-3)?)?;
    let horizon = src.or("T", f.horizon, 1.0)?;
    if !(horizon >= 0.0 && horizon.is_finite()) {
        return Err(bad(format!("`T` must be non-negative, got {horizon}")));
    }
    let cadence = at_least("output_cadence", src.or("output_cadence", f.output_cadence, 10)?, 1)?;
    let mut options = DqopOptions::default();
    options.active_set_tol = positive("active_set_tol", src.or("active_set_tol", f.active_set_tol, options.active_set_tol)?)?;
    options.mobility = match src.or("mobility", f.mobility, "midpoint".into())?.as_str() {
        "midpoint" => MobilityAverage::Midpoint,
        "harmonic" => MobilityAverage::Harmonic,
        other => return Err(bad(format!("`mobility` must be midpoint or harmonic, got `{other}`"))),
    };
    Ok(Command::EvolveDqop(DqopConfig { init, domain, grid_n, tau, horizon, cadence, options }))
}

fn bridge(src: &mut Source, f: BridgeFlags) -> Result<Command, ConfigError> {
    let list = src.or("epsilons", f.epsilons, "0.04,0.02,0.01".into())?;
    let epsilons = list
        .split(',')
        .map(|s| s.trim().parse::<f64>().map_err(|e| bad(format!("invalid epsilon `{s}`: {e}"))))
        .collect::<Result<Vec<_>, _>>()?;
    let r0 = positive("r0", src.or("r0", f.r0, 0.5)?)?;
    let radius = src.or("R0", f.radius, 1.0)?;
    let delta = src.or("delta", f.delta, 0.1)?;
    for &eps in &epsilons {
        DiskDomain::with_ratio(radius, delta, eps, BRIDGE_SCALE_RATIO).map_err(|e| bad(e.to_string()))?;
    }
    let grid_n = at_least("grid_n", src.or("grid_n", f.grid_n, 4096)?, 2)?;
    Ok(Command::BridgeSweep(BridgeConfig { epsilons, r0, radius, delta, grid_n }))
}

fn specfun(src: &mut Source, f: SpecfunFlags) -> Result<Command, ConfigError> {
    let points = at_least("points", src.or("points", f.points, 200)?, 2)?;
    let x_min = positive("x_min", src.or("x_min", f.x_min, 0.1)?)?;
    let x_max = positive("x_max", src.or("x_max", f.x_max, 500.0)?)?;
    if !(x_max > x_min) {
        return Err(bad("`x_max` must exceed `x_min`"));
    }
    Ok(Command::SpecfunCheck(SpecfunConfig { points, x_min, x_max }))
}

fn read_file(path: &Path) -> Result<BTreeMap<String, String>, ConfigError> {
    let text = std::fs::read_to_string(path).map_err(|e| bad(format!("cannot read {}: {e}", path.display())))?;
    parse_config_text(&text)
}

/// Merges the parsed flags with the optional config file and validates the
/// result.
pub fn resolve(cli: Cli) -> Result<RunConfig, ConfigError> {
    let file = match &cli.config {
        Some(p) => read_file(p)?,
        None => BTreeMap::new(),
    };
    let mut src = Source { file };
    let command = match cli.command {
        CliCommand::SteadyAnnular(f) => annular(&mut src, f)?,
        CliCommand::SteadyDimple(f) => dimple(&mut src, f)?,
        CliCommand::EvolveSd(f) => sd(&mut src, f)?,
        CliCommand::EvolveDqop(f) => dqop(&mut src, f)?,
        CliCommand::BridgeSweep(f) => bridge(&mut src, f)?,
        CliCommand::SpecfunCheck(f) => specfun(&mut src, f)?,
    };
    let output_dir = src
        .get::<PathBuf>("output_dir", cli.output_dir)?
        .or_else(|| std::env::var_os(OUTPUT_DIR_ENV).filter(|v| !v.is_empty()).map(PathBuf::from))
        .unwrap_or_else(|| PathBuf::from(DEFAULT_OUTPUT_DIR));
    src.finish(command.name())?;
    Ok(RunConfig { command, output_dir })
}

/// Parses a full argument list, program name first.
pub fn parse_config<I, T>(args: I) -> Result<RunConfig, ParseOutcome>
where
    I: IntoIterator<Item = T>,
    T: Into<std::ffi::OsString> + Clone,
{
    let cli = Cli::try_parse_from(args).map_err(ParseOutcome::Clap)?;
    resolve(cli).map_err(ParseOutcome::Invalid)
}

/// Why parsing stopped: a clap diagnostic (including help and version) or a
/// rejected configuration.
#[derive(Debug)]
pub enum ParseOutcome {
    Clap(clap::Error),
    Invalid(ConfigError),
}
