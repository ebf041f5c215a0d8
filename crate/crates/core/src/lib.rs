//! Underwater image enhancement by two-stage adaptive histogram stretching.
//!
//! Stage one works in RGB: gray-world gains on the green and blue channels,
//! a per-channel stretch whose input range is clipped around the histogram
//! mode and whose output range follows Rayleigh statistics of the channel,
//! then bilateral denoising. Stage two works in CIE-Lab: a percentile
//! stretch of lightness and an S-curve on both chroma axes.
//!
//! ```
//! use aquastretch::{enhance, PipelineConfig, RgbImage};
//!
//! let img = RgbImage::from_fn(32, 32, |x, y| {
//!     let v = (x + y) as f64;
//!     [40.0 + v * 0.6, 80.0 + v, 120.0 + v * 1.2]
//! });
//! let out = enhance(&img, &PipelineConfig::default()).unwrap();
//! assert_eq!(out.trace.stretch.len(), 3);
//! ```
//!
//! The crate also carries [`cbam`], a plain forward-pass reference of a
//! convolutional block attention module, and [`metrics`] for judging the
//! enhancement.

pub mod cbam;
pub mod color;
pub mod contrast;
pub mod error;
pub mod histogram;
pub mod imgio;
pub mod metrics;
pub mod pipeline;
pub mod synth;

pub use error::{Error, Result};
pub use histogram::Channel;
pub use imgio::{load_image, save_image, LabImage, RgbImage};
pub use metrics::{compute_metrics, MetricsReport};
pub use pipeline::{enhance, EnhancementTrace, PipelineConfig};

// Code blocks in the guide under book/ run as doc tests.
#[cfg(doctest)]
mod book {
    #[doc = include_str!("../../../book/src/introduction.md")]
    mod introduction {}
    #[doc = include_str!("../../../book/src/contrast.md")]
    mod contrast {}
    #[doc = include_str!("../../../book/src/color.md")]
    mod color {}
    #[doc = include_str!("../../../book/src/pipeline.md")]
    mod pipeline {}
    #[doc = include_str!("../../../book/src/cbam.md")]
    mod cbam {}
    #[doc = include_str!("../../../book/src/metrics.md")]
    mod metrics {}
    #[doc = include_str!("../../../book/src/cli.md")]
    mod cli {}
}
