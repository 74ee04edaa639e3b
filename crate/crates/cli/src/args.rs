use std::path::PathBuf;

use clap::{Args, Parser, Subcommand, ValueEnum};
use serde::Serialize;

#[derive(Debug, Parser, Serialize)]
#[command(name = "fractalconv", version, about = "Batch tools for complex self-similar measures")]
pub struct Cli {
    #[command(flatten)]
    pub global: GlobalOpts,
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Args, Serialize)]
pub struct GlobalOpts {
    /// Output directory (created if missing).
    #[arg(long, global = true, default_value = "out")]
    pub out: PathBuf,
    /// Seed for every random stream.
    #[arg(long, global = true, default_value_t = 0)]
    pub seed: u64,
    /// Truncation tolerance for infinite sums and products.
    #[arg(long, global = true, default_value_t = 1e-9)]
    pub tol: f64,
    /// Worker threads (default: all cores).
    #[arg(long, global = true)]
    pub threads: Option<usize>,
    /// Tabular output format.
    #[arg(long, global = true, value_enum, default_value_t = Format::Csv)]
    pub format: Format,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum Format {
    Csv,
    Json,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum DeltaMode {
    Auto,
    Brute,
    Pruned,
    ClosestPair,
    /// Brute force and pruned search side by side.
    Both,
}

#[derive(Debug, Subcommand, Serialize)]
#[serde(rename_all = "kebab-case", tag = "command")]
pub enum Command {
    /// Check an IFS document and echo it in canonical form.
    Validate(SpecArg),
    /// Chaos-game sample and density raster.
    Render(RenderArgs),
    /// Fourier transform at given frequencies.
    FourierEval(FourierEvalArgs),
    /// Power-decay fit of annulus suprema.
    Decay(DecayArgs),
    /// Cylinder separation Delta_n.
    Delta(DeltaArgs),
    /// Separation profile Delta_1..Delta_n with classification.
    Concentration(ConcentrationArgs),
    /// Roots of difference polynomials in an annulus.
    Overlap(OverlapArgs),
    /// Integer and error sequences of Re(theta^n t).
    EkSeq(EkSeqArgs),
    /// Reconstruct theta from real parts or from an integer window.
    EkReconstruct(EkReconstructArgs),
    /// Calibrate constants and enumerate covering balls.
    EkCover(EkCoverArgs),
    /// Paired sequences and u-balls for the translation parameter.
    EkU(EkUArgs),
    /// Classify one integer polynomial.
    PisotCheck(PisotCheckArgs),
    /// Search small integer polynomials for complex Pisot numbers.
    PisotScan(PisotScanArgs),
    /// Decimation-based absolute-continuity diagnostic.
    AcReport(AcReportArgs),
    /// Gasket system and its rotated copy, compared in Fourier space.
    Gasket(GasketArgs),
}

#[derive(Debug, Args, Serialize)]
pub struct SpecArg {
    /// IFS JSON file.
    #[arg(long)]
    pub spec: PathBuf,
}

#[derive(Debug, Args, Serialize)]
pub struct RenderArgs {
    #[arg(long)]
    pub spec: PathBuf,
    #[arg(long, default_value_t = 200_000)]
    pub points: usize,
    #[arg(long, default_value_t = 512)]
    pub resolution: usize,
    /// Raster window RE_MIN RE_MAX IM_MIN IM_MAX (default: attractor disk).
    #[arg(long, num_args = 4, allow_negative_numbers = true, value_names = ["RE_MIN", "RE_MAX", "IM_MIN", "IM_MAX"])]
    pub bounds: Option<Vec<f64>>,
    /// Also write the sampled points.
    #[arg(long)]
    pub write_points: bool,
}

#[derive(Debug, Args, Serialize)]
pub struct FourierEvalArgs {
    #[arg(long)]
    pub spec: PathBuf,
    /// Frequency RE IM; repeat for several.
    #[arg(long, num_args = 2, required = true, action = clap::ArgAction::Append, allow_negative_numbers = true, value_names = ["RE", "IM"])]
    pub xi: Vec<f64>,
}

#[derive(Debug, Args, Serialize)]
pub struct DecayArgs {
    #[arg(long)]
    pub spec: PathBuf,
    #[arg(long, default_value_t = 1.0)]
    pub r_min: f64,
    #[arg(long, default_value_t = 256.0)]
    pub r_max: f64,
    #[arg(long, default_value_t = 12)]
    pub annuli: usize,
    #[arg(long, default_value_t = 1024)]
    pub samples: usize,
}

#[derive(Debug, Args, Serialize)]
pub struct DeltaArgs {
    #[arg(long)]
    pub spec: PathBuf,
    #[arg(long = "n")]
    pub n: usize,
    #[arg(long, value_enum, default_value_t = DeltaMode::Auto)]
    pub mode: DeltaMode,
    /// Split the pruned search over threads (node counts then vary by run).
    #[arg(long)]
    pub parallel: bool,
}

#[derive(Debug, Args, Serialize)]
pub struct ConcentrationArgs {
    #[arg(long)]
    pub spec: PathBuf,
    #[arg(long, default_value_t = 8)]
    pub n_max: usize,
    #[arg(long, default_value_t = 1e-10)]
    pub overlap_tol: f64,
    #[arg(long, default_value_t = -0.15, allow_negative_numbers = true)]
    pub slope_threshold: f64,
}

#[derive(Debug, Args, Serialize)]
pub struct OverlapArgs {
    /// Digits are the differences of this system's translations.
    #[arg(long)]
    pub spec: PathBuf,
    #[arg(long, default_value_t = 8)]
    pub max_degree: usize,
    /// Inner radius of the lambda annulus.
    #[arg(long, default_value_t = 0.5)]
    pub rho: f64,
    /// Outer radius of the lambda annulus.
    #[arg(long, default_value_t = 1.0)]
    pub r: f64,
}

#[derive(Debug, Args, Serialize)]
pub struct EkSeqArgs {
    #[arg(long, num_args = 2, allow_negative_numbers = true, value_names = ["RE", "IM"])]
    pub theta: Vec<f64>,
    #[arg(long, num_args = 2, allow_negative_numbers = true, value_names = ["RE", "IM"])]
    pub t: Vec<f64>,
    #[arg(long = "n")]
    pub n: usize,
    /// Double-double arithmetic beyond the 53-bit range.
    #[arg(long)]
    pub wide: bool,
}

#[derive(Debug, Args, Serialize)]
pub struct EkReconstructArgs {
    /// Four real parts x0..x3.
    #[arg(long, num_args = 4, allow_negative_numbers = true, conflicts_with = "window")]
    pub x: Option<Vec<f64>>,
    /// Five integers K_{N-3}..K_{N+1}.
    #[arg(long, num_args = 5, allow_negative_numbers = true)]
    pub window: Option<Vec<i64>>,
    #[arg(long, default_value_t = 1.1)]
    pub b1: f64,
    /// Index N of the window.
    #[arg(long = "n", default_value_t = 12)]
    pub n: usize,
    #[arg(long, default_value_t = 10.0)]
    pub c4: f64,
}

#[derive(Debug, Args, Serialize)]
pub struct EkCoverArgs {
    #[arg(long, default_value_t = 1.1)]
    pub b1: f64,
    #[arg(long, default_value_t = 1.3)]
    pub b2: f64,
    #[arg(long, default_value_t = 0.1)]
    pub eta: f64,
    #[arg(long = "n", default_value_t = 12)]
    pub n: usize,
    #[arg(long, default_value_t = 0.1)]
    pub delta: f64,
    #[arg(long, default_value_t = 8)]
    pub seed_grid: usize,
    /// Forward sequences for the calibration pre-run.
    #[arg(long, default_value_t = 10_000)]
    pub calibration_samples: usize,
    /// Override the calibrated rho, M and C4_hat.
    #[arg(long)]
    pub rho: Option<f64>,
    #[arg(long)]
    pub m: Option<u64>,
    #[arg(long)]
    pub c4: Option<f64>,
    /// Also scan a GRID x GRID lattice for uncovered qualifying points.
    #[arg(long)]
    pub scan_grid: Option<usize>,
}

#[derive(Debug, Args, Serialize)]
pub struct EkUArgs {
    #[arg(long, num_args = 2, allow_negative_numbers = true, value_names = ["RE", "IM"])]
    pub lambda: Vec<f64>,
    #[arg(long, num_args = 2, allow_negative_numbers = true, value_names = ["RE", "IM"])]
    pub u: Vec<f64>,
    #[arg(long, num_args = 2, allow_negative_numbers = true, value_names = ["RE", "IM"], default_values_t = [1.0, 0.0])]
    pub t: Vec<f64>,
    #[arg(long = "n")]
    pub n: usize,
    #[arg(long, default_value_t = 10.0)]
    pub c2: f64,
}

#[derive(Debug, Args, Serialize)]
pub struct PisotCheckArgs {
    /// Coefficients from the leading one down to the constant term.
    #[arg(long, num_args = 2.., required = true, allow_negative_numbers = true)]
    pub coeffs: Vec<i64>,
}

#[derive(Debug, Args, Serialize)]
pub struct PisotScanArgs {
    #[arg(long, default_value_t = 4)]
    pub max_degree: usize,
    #[arg(long, default_value_t = 2)]
    pub coeff_bound: i64,
    /// Inner radius of the theta annulus.
    #[arg(long, default_value_t = 1.0)]
    pub rho: f64,
    /// Outer radius of the theta annulus.
    #[arg(long, default_value_t = std::f64::consts::SQRT_2)]
    pub r: f64,
}

#[derive(Debug, Args, Serialize)]
pub struct AcReportArgs {
    #[arg(long)]
    pub spec: PathBuf,
    #[arg(long, default_value_t = 3)]
    pub k: usize,
}

#[derive(Debug, Args, Serialize)]
pub struct GasketArgs {
    #[arg(long, default_value_t = 0.62)]
    pub lambda: f64,
    /// Rotation angle in degrees.
    #[arg(long, default_value_t = 60.0, allow_negative_numbers = true)]
    pub angle: f64,
    /// Random frequencies for the comparison.
    #[arg(long, default_value_t = 20)]
    pub samples: usize,
}
