use std::path::PathBuf;

use clap::{Args, Parser, Subcommand, ValueEnum};
use cuspdeform::bending::Target;
use cuspdeform::Angle;
use num_rational::Rational64;

#[derive(Debug, Parser)]
#[command(name = "cuspdeform", version, about = "Verify deformations of cusped hyperbolic lattices")]
pub struct Cli {
    /// Numerical tolerance.
    #[arg(long, global = true, env = "CUSPDEFORM_TOL", default_value = "1e-9", value_parser = parse_tol)]
    pub tol: f64,

    /// Write output here instead of stdout.
    #[arg(short, long, global = true)]
    pub output: Option<PathBuf>,

    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Run a verification suite and emit a JSON report.
    Verify {
        #[command(subcommand)]
        family: VerifyFamily,
    },
    /// Classify or check signatures over a parameter grid (CSV).
    Sweep {
        #[command(subcommand)]
        family: SweepFamily,
    },
    /// Dump a cusp group orbit on the boundary (CSV).
    Orbit(OrbitArgs),
    /// Classify a matrix read from a JSON file.
    Classify(ClassifyArgs),
}

#[derive(Debug, Subcommand)]
pub enum VerifyFamily {
    Figure8(Fig8VerifyArgs),
    Bianchi(BianchiVerifyArgs),
}

#[derive(Debug, Args)]
pub struct Fig8VerifyArgs {
    /// Parameter angle, `u = e^{i alpha}` (e.g. `2/3pi`, `1rad`, `0.5`).
    #[arg(long, allow_hyphen_values = true, value_parser = parse_angle)]
    pub alpha: Angle,

    /// Extra trace words, one per line.
    #[arg(long)]
    pub words: Option<PathBuf>,
}

#[derive(Debug, Args)]
pub struct BianchiVerifyArgs {
    #[arg(long)]
    pub d: u32,

    #[arg(long, value_enum)]
    pub target: TargetArg,

    /// Keep `u` symbolic (SU(3,1)).
    #[arg(long, conflicts_with_all = ["alpha", "theta", "pythagorean"])]
    pub u_exact: bool,

    /// `u = e^{i alpha}` (SU(3,1)).
    #[arg(long, allow_hyphen_values = true, value_parser = parse_angle)]
    pub alpha: Option<Angle>,

    /// Rotation angle (SO(4,1)).
    #[arg(long, allow_hyphen_values = true, value_parser = parse_angle, conflicts_with = "pythagorean")]
    pub theta: Option<Angle>,

    /// Exact rotation `((1-s^2)/(1+s^2), 2s/(1+s^2))` (SO(4,1)).
    #[arg(long, allow_hyphen_values = true, value_parser = parse_rational)]
    pub pythagorean: Option<Rational64>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum TargetArg {
    Su31,
    So41,
}

impl From<TargetArg> for Target {
    fn from(t: TargetArg) -> Self {
        match t {
            TargetArg::Su31 => Target::Su31,
            TargetArg::So41 => Target::So41,
        }
    }
}

#[derive(Debug, Args)]
pub struct Grid {
    /// Left end of the open parameter interval.
    #[arg(long, allow_hyphen_values = true, value_parser = parse_angle, default_value = "-pi")]
    pub start: Angle,

    /// Right end of the open parameter interval.
    #[arg(long, allow_hyphen_values = true, value_parser = parse_angle, default_value = "pi")]
    pub end: Angle,

    /// Number of grid points (cell midpoints).
    #[arg(long, default_value_t = 360, value_parser = clap::value_parser!(u32).range(1..))]
    pub count: u32,
}

impl Grid {
    /// Midpoints of `count` equal cells of `(start, end)`.
    pub fn points(&self) -> Vec<f64> {
        let (a, b) = (self.start.to_radians(), self.end.to_radians());
        let h = (b - a) / self.count as f64;
        (0..self.count).map(|k| a + (k as f64 + 0.5) * h).collect()
    }
}

#[derive(Debug, Subcommand)]
pub enum SweepFamily {
    Figure8 {
        #[command(flatten)]
        grid: Grid,

        /// Skip points within this distance of `±2pi/3` and `pi`.
        #[arg(long, default_value_t = 0.01)]
        exclude: f64,
    },
    Bianchi {
        #[arg(long)]
        d: u32,

        #[arg(long, value_enum)]
        target: TargetArg,

        #[command(flatten)]
        grid: Grid,
    },
}

#[derive(Debug, Args)]
pub struct OrbitArgs {
    #[arg(long)]
    pub d: u32,

    #[arg(long, value_enum)]
    pub target: TargetArg,

    /// `u = e^{i alpha}` (SU(3,1)).
    #[arg(long, allow_hyphen_values = true, value_parser = parse_angle)]
    pub alpha: Option<Angle>,

    /// Rotation angle (SO(4,1)).
    #[arg(long, allow_hyphen_values = true, value_parser = parse_angle)]
    pub theta: Option<Angle>,

    /// Word radius R: all `T^m U^n` with `|m|, |n| <= R`.
    #[arg(long)]
    pub radius: u32,

    /// Base point as comma-separated reals: `re z1, im z1, re z2, im z2, t`
    /// for SU(3,1), `x, y, w` for SO(4,1). Defaults to the origin.
    #[arg(long, allow_hyphen_values = true, value_delimiter = ',')]
    pub base: Option<Vec<f64>>,
}

#[derive(Debug, Args)]
pub struct ClassifyArgs {
    /// JSON file with `"matrix"` and optionally `"form"`.
    #[arg(long)]
    pub matrix: PathBuf,

    /// Invariance convention of the form.
    #[arg(long, value_enum, default_value_t = ConventionArg::ConjTranspose)]
    pub convention: ConventionArg,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum ConventionArg {
    /// `g* J g = J`
    ConjTranspose,
    /// `g^T J conj(g) = J`
    TransposeConj,
}

fn parse_tol(s: &str) -> Result<f64, String> {
    let x: f64 = s.trim().parse().map_err(|_| format!("invalid tolerance {s:?}"))?;
    if x > 0.0 && x.is_finite() {
        Ok(x)
    } else {
        Err(format!("tolerance must be positive, got {s}"))
    }
}

fn parse_angle(s: &str) -> Result<Angle, String> {
    s.parse::<Angle>().map_err(|e| e.to_string())
}

fn parse_rational(s: &str) -> Result<Rational64, String> {
    s.trim().parse::<Rational64>().map_err(|_| format!("invalid rational {s:?}"))
}
