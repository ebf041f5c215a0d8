use std::path::PathBuf;

use aquastretch::contrast::CoefficientStrategy;
use aquastretch::pipeline::ConfigSettings;
use clap::{Args, Parser, Subcommand};

#[derive(Debug, Parser)]
#[command(name = "aquastretch", version, about = "Underwater image enhancement by adaptive histogram stretching")]
pub struct Cli {
    /// Log progress at info level (RUST_LOG overrides).
    #[arg(short, long, global = true)]
    pub verbose: bool,

    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Enhance one image or every png/jpg/jpeg file in a directory.
    Enhance(EnhanceArgs),
    /// Run the CBAM attention block on a weight file and a feature tensor.
    Cbam(CbamArgs),
}

#[derive(Debug, Args)]
pub struct EnhanceArgs {
    /// Input image or directory.
    pub input: PathBuf,

    /// Directory for `<stem>.enhanced.png` outputs; created if missing.
    #[arg(short, long)]
    pub output_dir: PathBuf,

    /// TOML file with the same keys as the pipeline flags. Flags win.
    #[arg(long)]
    pub config: Option<PathBuf>,

    /// Write a JSON report with per-image traces and metrics.
    #[arg(long)]
    pub report: Option<PathBuf>,

    /// Worker threads.
    #[arg(short, long, default_value_t = 1, value_parser = clap::value_parser!(u32).range(1..))]
    pub jobs: u32,

    /// Also measure Harris corner repeatability at this rotation (degrees).
    #[arg(long)]
    pub repeatability_rotation: Option<f64>,

    #[command(flatten)]
    pub pipeline: PipelineFlags,
}

#[derive(Debug, Default, Args)]
pub struct PipelineFlags {
    /// Fraction clipped from each side of the histogram beyond the mode.
    #[arg(long)]
    pub clip: Option<f64>,
    /// Global attenuation constant.
    #[arg(long)]
    pub kappa: Option<f64>,
    /// Red transmission.
    #[arg(long)]
    pub t_red: Option<f64>,
    /// Green transmission.
    #[arg(long)]
    pub t_green: Option<f64>,
    /// Blue transmission.
    #[arg(long)]
    pub t_blue: Option<f64>,
    /// Chroma S-curve strength, in [1.2, 2.0].
    #[arg(long)]
    pub phi: Option<f64>,
    /// Bilateral window radius in pixels.
    #[arg(long)]
    pub bilateral_radius: Option<usize>,
    /// Bilateral spatial sigma.
    #[arg(long)]
    pub bilateral_sigma_s: Option<f64>,
    /// Bilateral range sigma.
    #[arg(long)]
    pub bilateral_sigma_r: Option<f64>,
    /// Skip the bilateral filter.
    #[arg(long)]
    pub no_bilateral: bool,
    /// How to pick beta and mu inside their feasible intervals.
    #[arg(long, value_parser = parse_strategy)]
    pub coeff_strategy: Option<CoefficientStrategy>,
}

fn parse_strategy(s: &str) -> Result<CoefficientStrategy, String> {
    s.parse().map_err(|e| format!("{e}"))
}

impl From<&PipelineFlags> for ConfigSettings {
    fn from(f: &PipelineFlags) -> Self {
        ConfigSettings {
            clip: f.clip,
            kappa: f.kappa,
            t_red: f.t_red,
            t_green: f.t_green,
            t_blue: f.t_blue,
            phi: f.phi,
            bilateral_radius: f.bilateral_radius,
            bilateral_sigma_s: f.bilateral_sigma_s,
            bilateral_sigma_r: f.bilateral_sigma_r,
            no_bilateral: f.no_bilateral.then_some(true),
            coeff_strategy: f.coeff_strategy,
        }
    }
}

#[derive(Debug, Args)]
pub struct CbamArgs {
    /// Weight file `{C, r, w0, w1, conv7, bias}`.
    #[arg(long)]
    pub weights: PathBuf,
    /// Input tensor `{C, H, W, data}`.
    #[arg(long)]
    pub tensor: PathBuf,
    /// Where to write the refined tensor.
    #[arg(short, long)]
    pub output: PathBuf,
}
