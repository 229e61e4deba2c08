use std::path::PathBuf;

use clap::{Args, Parser, Subcommand, ValueEnum};
use serde::Serialize;

use ldg_core::conformal::Orientation;
use ldg_core::Domain;

#[derive(Parser, Debug)]
#[command(name = "ldg", version, about = "Conformal director fields and Landau-de Gennes minimizers on planar domains")]
#[command(args_override_self = true)]
pub struct Cli {
    /// key=value file supplying any long flag of the subcommand; flags given on the command line win.
    #[arg(long, global = true, value_name = "FILE")]
    pub config: Option<PathBuf>,
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Subcommand, Debug)]
pub enum Command {
    /// Write the conformal director field of an escape configuration.
    Conformal(ConformalArgs),
    /// Minimize the Landau-de Gennes energy at one eps.
    Minimize(MinimizeArgs),
    /// Solve an eps ladder and check the first-order energy expansion.
    VerifyExpansion(VerifyArgs),
    /// Tabulate energies as escape points move.
    Sweep(SweepArgs),
    /// Render a crossed-polarizer texture of a field file.
    Schlieren(SchlierenArgs),
}

#[derive(Clone, Copy, Debug, ValueEnum, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum OrientationArg {
    North,
    South,
}

impl From<OrientationArg> for Orientation {
    fn from(o: OrientationArg) -> Self {
        match o {
            OrientationArg::North => Orientation::North,
            OrientationArg::South => Orientation::South,
        }
    }
}

/// `disk`, `square` or `ellipse:RX,RY`.
pub fn parse_domain(s: &str) -> Result<Domain, String> {
    match s {
        "disk" => Ok(Domain::Disk),
        "square" => Ok(Domain::Square),
        _ => {
            let rest = s.strip_prefix("ellipse:").ok_or_else(|| format!("unknown domain '{s}'"))?;
            let v = reals(rest)?;
            match v[..] {
                [rx, ry] => Ok(Domain::Ellipse { rx, ry }),
                _ => Err(format!("ellipse needs two semi-axes, got '{rest}'")),
            }
        }
    }
}

/// Escape points from `x1,y1;x2,y2;...`.
#[derive(Clone, Debug, PartialEq, Serialize)]
#[serde(transparent)]
pub struct Points(pub Vec<[f64; 2]>);

/// Comma-separated reals, or a start:stop:step range.
#[derive(Clone, Debug, PartialEq, Serialize)]
#[serde(transparent)]
pub struct Reals(pub Vec<f64>);

fn reals(s: &str) -> Result<Vec<f64>, String> {
    s.split(',').map(|t| t.trim().parse::<f64>().map_err(|e| format!("'{t}': {e}"))).collect()
}

pub fn parse_list(s: &str) -> Result<Reals, String> {
    reals(s).map(Reals)
}

/// `x1,y1;x2,y2;...`
pub fn parse_points(s: &str) -> Result<Points, String> {
    if s.trim().is_empty() {
        return Ok(Points(Vec::new()));
    }
    s.split(';')
        .map(|p| match reals(p)?[..] {
            [x, y] => Ok([x, y]),
            _ => Err(format!("escape point '{p}' needs two coordinates")),
        })
        .collect::<Result<_, _>>()
        .map(Points)
}

/// `start:stop:step`, inclusive of stop up to rounding.
pub fn parse_range(s: &str) -> Result<Reals, String> {
    let v: Vec<f64> = s.split(':').map(|t| t.trim().parse::<f64>().map_err(|e| format!("'{t}': {e}"))).collect::<Result<_, _>>()?;
    let [a, b, step] = v[..] else {
        return Err(format!("range '{s}' must be start:stop:step"));
    };
    if !(step > 0.0) || b < a {
        return Err(format!("range '{s}' must have stop >= start and a positive step"));
    }
    let n = ((b - a) / step + 1e-9).floor() as usize;
    Ok(Reals((0..=n).map(|k| a + step * k as f64).collect()))
}

#[derive(Args, Debug, Clone, Serialize)]
pub struct ProblemArgs {
    #[arg(long, default_value = "disk", value_parser = parse_domain)]
    pub domain: Domain,
    /// Nodes per unit length.
    #[arg(long, default_value_t = 256)]
    pub grid: usize,
    #[arg(long, default_value_t = 1, allow_negative_numbers = true)]
    pub m: i32,
    #[arg(long, default_value = "0,0", value_parser = parse_points, allow_hyphen_values = true)]
    pub escape: Points,
    #[arg(long, default_value_t = 0.0, allow_negative_numbers = true)]
    pub alpha: f64,
    #[arg(long, value_enum, default_value_t = OrientationArg::North)]
    pub orientation: OrientationArg,
}

#[derive(Args, Debug, Clone, Serialize)]
pub struct MaterialArgs {
    #[arg(long, default_value_t = 1.0)]
    pub a2: f64,
    #[arg(long, default_value_t = 1.0)]
    pub b2: f64,
    #[arg(long, default_value_t = 1.0)]
    pub c2: f64,
}

#[derive(Clone, Copy, Debug, ValueEnum, Serialize, PartialEq, Eq)]
#[serde(rename_all = "snake_case")]
pub enum BoundaryArg {
    /// Boundary values of the conformal field given by --m/--escape.
    Conformal,
    /// Planar angle theta + amplitude sin(2 theta) on the disk.
    Perturbed,
}

#[derive(Args, Debug, Clone, Serialize)]
pub struct B0Args {
    /// Degree of the c-field boundary data when --b2 0.
    #[arg(long, default_value_t = 1, allow_negative_numbers = true)]
    pub k: i32,
    /// Poles of the c-field map when --b2 0 (defaults to --escape).
    #[arg(long, value_parser = parse_points, allow_hyphen_values = true)]
    pub poles: Option<Points>,
    /// Boundary normalization of the c-field map.
    #[arg(long, default_value_t = ldg_core::conformal::KAPPA_PLANAR)]
    pub kappa: f64,
}

#[derive(Args, Debug, Clone, Serialize)]
pub struct SolverArgs {
    #[arg(long, default_value_t = 20_000)]
    pub max_iterations: usize,
    #[arg(long, default_value_t = 1e-10)]
    pub energy_tol: f64,
    #[arg(long, default_value_t = 1e-6)]
    pub residual_tol: f64,
    /// Explicit steps of this size instead of conjugate gradients.
    #[arg(long)]
    pub tau: Option<f64>,
    /// With --tau: halve the step whenever the energy would rise.
    #[arg(long)]
    pub backtracking: bool,
}

#[derive(Args, Debug, Clone, Serialize)]
pub struct ConformalArgs {
    #[command(flatten)]
    pub problem: ProblemArgs,
    #[arg(long)]
    pub out: PathBuf,
    /// Also write the uniaxial Q field s+ (n n - I/3) for these material flags.
    #[arg(long)]
    pub q_out: Option<PathBuf>,
    #[command(flatten)]
    pub material: MaterialArgs,
}

#[derive(Clone, Copy, Debug, ValueEnum, Serialize, PartialEq, Eq)]
#[serde(rename_all = "snake_case")]
pub enum InitArg {
    /// s+ (n0 n0 - I/3) plus the eps^2 transverse correction.
    Corrected,
    /// s+ (n0 n0 - I/3).
    Uniaxial,
}

#[derive(Args, Debug, Clone, Serialize)]
pub struct MinimizeArgs {
    #[command(flatten)]
    pub problem: ProblemArgs,
    #[command(flatten)]
    pub material: MaterialArgs,
    #[command(flatten)]
    pub b0: B0Args,
    #[arg(long, value_enum, default_value_t = BoundaryArg::Conformal)]
    pub boundary: BoundaryArg,
    #[arg(long, default_value_t = 0.5, allow_negative_numbers = true)]
    pub amplitude: f64,
    #[arg(long)]
    pub eps: f64,
    #[arg(long, value_enum, default_value_t = InitArg::Corrected)]
    pub init: InitArg,
    #[command(flatten)]
    pub solver: SolverArgs,
    #[arg(long)]
    pub out: PathBuf,
}

#[derive(Args, Debug, Clone, Serialize)]
pub struct VerifyArgs {
    #[command(flatten)]
    pub problem: ProblemArgs,
    #[command(flatten)]
    pub material: MaterialArgs,
    #[command(flatten)]
    pub b0: B0Args,
    #[arg(long, value_enum, default_value_t = BoundaryArg::Conformal)]
    pub boundary: BoundaryArg,
    #[arg(long, default_value_t = 0.5, allow_negative_numbers = true)]
    pub amplitude: f64,
    #[arg(long, default_value = "0.2,0.1414,0.1,0.0707,0.05", value_parser = parse_list)]
    pub eps_list: Reals,
    /// Start each solve from the previous minimizer.
    #[arg(long)]
    pub warm_start: bool,
    #[command(flatten)]
    pub solver: SolverArgs,
    /// JSON report with every measured quantity.
    #[arg(long)]
    pub report: Option<PathBuf>,
}

#[derive(Clone, Copy, Debug, ValueEnum, Serialize, PartialEq, Eq)]
#[serde(rename_all = "kebab-case")]
pub enum ModeArg {
    Formula,
    FullSolve,
}

#[derive(Args, Debug, Clone, Serialize)]
pub struct SweepArgs {
    #[arg(long, default_value = "disk", value_parser = parse_domain)]
    pub domain: Domain,
    #[arg(long, default_value_t = 256)]
    pub grid: usize,
    /// Single escape point at radii start:stop:step on the x axis.
    #[arg(long, value_parser = parse_range)]
    pub radius_range: Option<Reals>,
    /// Two escape points at +-d/2 for separations start:stop:step.
    #[arg(long, value_parser = parse_range)]
    pub separation_range: Option<Reals>,
    /// JSON array of escape configurations {m, points, alpha, orientation}.
    #[arg(long)]
    pub configs: Option<PathBuf>,
    #[arg(long, value_enum, default_value_t = ModeArg::Formula)]
    pub mode: ModeArg,
    #[arg(long, default_value = "0.2,0.1414,0.1,0.0707,0.05", value_parser = parse_list)]
    pub eps_list: Reals,
    #[command(flatten)]
    pub material: MaterialArgs,
    #[command(flatten)]
    pub solver: SolverArgs,
    /// CSV output; stdout when absent.
    #[arg(long)]
    pub out: Option<PathBuf>,
}

#[derive(Clone, Copy, Debug, ValueEnum, Serialize, PartialEq, Eq)]
#[serde(rename_all = "snake_case")]
pub enum ColormapArg {
    Gray,
    Hue,
}

#[derive(Args, Debug, Clone, Serialize)]
pub struct SchlierenArgs {
    /// Director (3 components) or Q (5 components) field file.
    #[arg(long = "in")]
    pub input: PathBuf,
    #[arg(long)]
    pub out: PathBuf,
    #[arg(long, value_enum, default_value_t = ColormapArg::Gray)]
    pub colormap: ColormapArg,
}
