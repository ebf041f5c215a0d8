//! The two-stage enhancement: contrast correction in RGB followed by color
//! correction in CIE-Lab.

use std::path::Path;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::color::{self, ColorCorrectConfig, LightnessStretch};
use crate::contrast::{
    self, BilateralParams, CoefficientStrategy, GrayWorldGains, StretchParams,
};
use crate::error::{Error, Result};
use crate::histogram::{self, Channel, DEFAULT_CLIP};
use crate::imgio::RgbImage;
use crate::metrics::{compute_metrics, MetricsReport};

pub const DEFAULT_KAPPA: f64 = 1.0;
/// Default transmissions for R, G, B.
pub const DEFAULT_TRANSMISSION: [f64; 3] = [0.83, 0.95, 0.97];

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PipelineConfig {
    /// Fraction clipped on each side of the mode when picking `I_min`/`I_max`.
    pub clip: f64,
    pub kappa: f64,
    /// Per-channel transmission, R, G, B.
    pub t: [f64; 3],
    pub color: ColorCorrectConfig,
    /// `None` disables denoising.
    pub bilateral: Option<BilateralParams>,
    pub coefficient_strategy: CoefficientStrategy,
}

impl Default for PipelineConfig {
    fn default() -> Self {
        PipelineConfig {
            clip: DEFAULT_CLIP,
            kappa: DEFAULT_KAPPA,
            t: DEFAULT_TRANSMISSION,
            color: ColorCorrectConfig::default(),
            bilateral: Some(BilateralParams::default()),
            coefficient_strategy: CoefficientStrategy::Midpoint,
        }
    }
}

impl PipelineConfig {
    pub fn validate(&self) -> Result<()> {
        if !(self.clip > 0.0 && self.clip < 0.5) {
            return Err(Error::Config(format!("clip {} outside (0, 0.5)", self.clip)));
        }
        if !(self.kappa > 0.0 && self.kappa.is_finite()) {
            return Err(Error::Config(format!("kappa {} must be positive", self.kappa)));
        }
        for (t, ch) in self.t.iter().zip(Channel::ALL) {
            if !(*t > 0.0 && *t <= 1.0) {
                return Err(Error::Config(format!("t for channel {ch} is {t}, expected (0, 1]")));
            }
        }
        self.color.validate()?;
        if let Some(b) = &self.bilateral {
            b.validate()?;
        }
        Ok(())
    }

    /// Flat key/value view, keyed like the command-line flags.
    pub fn to_settings(&self) -> ConfigSettings {
        let b = self.bilateral.unwrap_or_default();
        ConfigSettings {
            clip: Some(self.clip),
            kappa: Some(self.kappa),
            t_red: Some(self.t[0]),
            t_green: Some(self.t[1]),
            t_blue: Some(self.t[2]),
            phi: Some(self.color.phi),
            bilateral_radius: Some(b.radius),
            bilateral_sigma_s: Some(b.spatial_sigma),
            bilateral_sigma_r: Some(b.range_sigma),
            no_bilateral: Some(self.bilateral.is_none()),
            coeff_strategy: Some(self.coefficient_strategy),
        }
    }

    /// Reads a TOML file of [`ConfigSettings`] on top of the defaults.
    pub fn from_file(path: impl AsRef<Path>) -> Result<Self> {
        ConfigSettings::from_file(path)?.apply(PipelineConfig::default())
    }
}

/// Pipeline settings as flat, optional keys. The key names match the
/// command-line flags (`clip`, `kappa`, `t-red`, `t-green`, `t-blue`, `phi`,
/// `bilateral-radius`, `bilateral-sigma-s`, `bilateral-sigma-r`,
/// `no-bilateral`, `coeff-strategy`).
#[derive(Debug, Clone, Copy, Default, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case", deny_unknown_fields)]
pub struct ConfigSettings {
    #[serde(skip_serializing_if = "Option::is_none")]
    pub clip: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub kappa: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub t_red: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub t_green: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub t_blue: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub phi: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub bilateral_radius: Option<usize>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub bilateral_sigma_s: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub bilateral_sigma_r: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub no_bilateral: Option<bool>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub coeff_strategy: Option<CoefficientStrategy>,
}

impl ConfigSettings {
    pub fn from_toml_str(s: &str) -> Result<Self> {
        toml::from_str(s).map_err(|e| Error::Config(e.to_string()))
    }

    pub fn from_file(path: impl AsRef<Path>) -> Result<Self> {
        let path = path.as_ref();
        let text = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
        Self::from_toml_str(&text).map_err(|e| Error::Config(format!("{}: {e}", path.display())))
    }

    /// Keys set in `other` win.
    pub fn merged_with(self, other: ConfigSettings) -> ConfigSettings {
        ConfigSettings {
            clip: other.clip.or(self.clip),
            kappa: other.kappa.or(self.kappa),
            t_red: other.t_red.or(self.t_red),
            t_green: other.t_green.or(self.t_green),
            t_blue: other.t_blue.or(self.t_blue),
            phi: other.phi.or(self.phi),
            bilateral_radius: other.bilateral_radius.or(self.bilateral_radius),
            bilateral_sigma_s: other.bilateral_sigma_s.or(self.bilateral_sigma_s),
            bilateral_sigma_r: other.bilateral_sigma_r.or(self.bilateral_sigma_r),
            no_bilateral: other.no_bilateral.or(self.no_bilateral),
            coeff_strategy: other.coeff_strategy.or(self.coeff_strategy),
        }
    }

    /// Overrides the fields of `base` that are set here, then validates.
    pub fn apply(&self, base: PipelineConfig) -> Result<PipelineConfig> {
        let mut cfg = base;
        let mut bilateral = base.bilateral.unwrap_or_default();
        cfg.clip = self.clip.unwrap_or(cfg.clip);
        cfg.kappa = self.kappa.unwrap_or(cfg.kappa);
        cfg.t[0] = self.t_red.unwrap_or(cfg.t[0]);
        cfg.t[1] = self.t_green.unwrap_or(cfg.t[1]);
        cfg.t[2] = self.t_blue.unwrap_or(cfg.t[2]);
        cfg.color.phi = self.phi.unwrap_or(cfg.color.phi);
        bilateral.radius = self.bilateral_radius.unwrap_or(bilateral.radius);
        bilateral.spatial_sigma = self.bilateral_sigma_s.unwrap_or(bilateral.spatial_sigma);
        bilateral.range_sigma = self.bilateral_sigma_r.unwrap_or(bilateral.range_sigma);
        let disabled = self.no_bilateral.unwrap_or(base.bilateral.is_none());
        cfg.bilateral = (!disabled).then_some(bilateral);
        cfg.coefficient_strategy = self.coeff_strategy.unwrap_or(cfg.coefficient_strategy);
        cfg.validate()?;
        Ok(cfg)
    }
}

/// Which gray-world gains could not be computed (zero-mean channel).
#[derive(Debug, Clone, Copy, Default, PartialEq, Serialize)]
pub struct GainFlags {
    pub g_degenerate: bool,
    pub b_degenerate: bool,
}

/// Everything the pipeline decided for one image.
///
/// Stage fields are `None` when the image never reached that stage.
#[derive(Debug, Clone, Default, PartialEq, Serialize)]
pub struct EnhancementTrace {
    pub gains: Option<GrayWorldGains>,
    pub gain_flags: GainFlags,
    pub stretch: Vec<StretchParams>,
    pub bilateral: Option<BilateralParams>,
    pub lightness: Option<LightnessStretch>,
    pub phi: Option<f64>,
    pub metrics_before: Option<MetricsReport>,
    pub metrics_after: Option<MetricsReport>,
}

impl EnhancementTrace {
    /// Any stage fell back or passed a channel through unchanged.
    pub fn has_degeneracy(&self) -> bool {
        self.gain_flags.g_degenerate
            || self.gain_flags.b_degenerate
            || self.stretch.iter().any(|p| p.degenerate || p.fallback)
            || self.lightness.is_some_and(|l| l.degenerate)
    }
}

/// Stretch parameters for one gain-corrected channel. Constant or collapsed
/// channels pass through.
pub fn channel_params(values: &[f64], channel: Channel, cfg: &PipelineConfig) -> Result<StretchParams> {
    let kappa = cfg.kappa;
    let t = cfg.t[channel.index()];
    let stats = histogram::stats_from_values(values, channel);
    if stats.degenerate {
        return Ok(StretchParams::passthrough(channel, values[0], kappa, t));
    }
    let sorted = histogram::sorted_values(values);
    match histogram::clipped_range(&stats, &sorted, cfg.clip) {
        Ok(range) => contrast::solve_stretch_params(&stats, range.i_min, range.i_max, kappa, t, cfg.coefficient_strategy),
        Err(Error::DegenerateChannel(_)) => {
            let (lo, _) = histogram::clip_indices(sorted.len(), stats.mode_rank, cfg.clip);
            Ok(StretchParams::passthrough(channel, sorted[lo], kappa, t))
        }
        Err(e) => Err(e),
    }
}

/// Gray-world gains and per-channel adaptive stretch, without denoising.
pub fn contrast_stage(img: &RgbImage, cfg: &PipelineConfig) -> Result<(RgbImage, EnhancementTrace)> {
    let (gains, [g_degenerate, b_degenerate]) = contrast::gray_world_gains_lenient(img);
    let balanced = contrast::apply_gain(img, gains);

    let per_channel: Vec<(StretchParams, Vec<f64>)> = Channel::ALL
        .par_iter()
        .map(|&ch| {
            let values = balanced.channel(ch);
            let params = channel_params(&values, ch, cfg)?;
            let stretched = contrast::stretch_channel(&values, &params);
            Ok((params, stretched))
        })
        .collect::<Result<_>>()?;

    let planes = [&per_channel[0].1[..], &per_channel[1].1[..], &per_channel[2].1[..]];
    let out = RgbImage::from_planes(img.width(), img.height(), planes)?;
    let trace = EnhancementTrace {
        gains: Some(gains),
        gain_flags: GainFlags { g_degenerate, b_degenerate },
        stretch: per_channel.into_iter().map(|(p, _)| p).collect(),
        ..Default::default()
    };
    Ok((out, trace))
}

/// Enhancement result.
#[derive(Debug, Clone)]
pub struct Enhanced {
    pub image: RgbImage,
    pub trace: EnhancementTrace,
}

/// Runs the full pipeline:
/// gray-world gains on G and B, adaptive stretch per channel, bilateral
/// filter, RGB to Lab, lightness stretch, chroma S-curve, Lab to RGB.
///
/// Degenerate channels are passed through and flagged in the trace. Only an
/// invalid configuration is an error.
pub fn enhance(img: &RgbImage, cfg: &PipelineConfig) -> Result<Enhanced> {
    cfg.validate()?;
    let (stretched, mut trace) = contrast_stage(img, cfg)?;
    trace.metrics_before = Some(compute_metrics(img));

    let denoised = match &cfg.bilateral {
        Some(b) => contrast::bilateral_filter(&stretched, b)?,
        None => stretched,
    };
    trace.bilateral = cfg.bilateral;

    let lab = color::rgb_to_lab(&denoised);
    let (lab, lightness) = color::stretch_l(&lab, cfg.color.l_clip)?;
    let lab = color::s_curve_ab(&lab, cfg.color.phi)?;
    let image = color::lab_to_rgb(&lab);
    trace.lightness = Some(lightness);
    trace.phi = Some(cfg.color.phi);
    trace.metrics_after = Some(compute_metrics(&image));
    Ok(Enhanced { image, trace })
}
