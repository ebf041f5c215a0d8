//! Per-channel histogram statistics: the histogram mode used as the
//! Rayleigh scale parameter, and the clipped input range derived from it.

use std::fmt;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::imgio::RgbImage;

/// Ratio between the Rayleigh standard deviation and its mode.
pub const RAYLEIGH_SIGMA_RATIO: f64 = 0.655;

/// Default fraction clipped off each side of the mode when choosing the
/// input stretch range.
pub const DEFAULT_CLIP: f64 = 0.005;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum Channel {
    R,
    G,
    B,
}

impl Channel {
    pub const ALL: [Channel; 3] = [Channel::R, Channel::G, Channel::B];

    pub fn index(self) -> usize {
        match self {
            Channel::R => 0,
            Channel::G => 1,
            Channel::B => 2,
        }
    }
}

impl fmt::Display for Channel {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Channel::R => "R",
            Channel::G => "G",
            Channel::B => "B",
        })
    }
}

/// 256-bin histogram of rounded channel values.
pub type Histogram = [u64; 256];

#[derive(Debug, Clone, PartialEq)]
pub struct ChannelStats {
    pub channel: Channel,
    pub hist: Histogram,
    /// Histogram mode `a`, the Rayleigh scale parameter.
    pub mode_value: f64,
    /// `0.655 * mode_value`.
    pub sigma: f64,
    /// Number of pixels in the channel.
    pub sorted_len: usize,
    /// Index of the first pixel belonging to the mode bin in ascending order.
    pub mode_rank: usize,
    /// Every pixel of the channel has the same value.
    pub degenerate: bool,
}

/// Histogram bin for a real channel value: nearest integer, clamped to 0..=255.
pub fn bin_of(v: f64) -> usize {
    crate::imgio::quantize_channel(v) as usize
}

pub fn histogram(values: &[f64]) -> Histogram {
    let mut hist = [0u64; 256];
    for &v in values {
        hist[bin_of(v)] += 1;
    }
    hist
}

/// Statistics of one channel of `img`.
pub fn channel_stats(img: &RgbImage, channel: Channel) -> ChannelStats {
    stats_from_values(&img.channel(channel), channel)
}

/// Statistics of a planar channel buffer. Panics on an empty slice.
pub fn stats_from_values(values: &[f64], channel: Channel) -> ChannelStats {
    assert!(!values.is_empty(), "channel statistics need at least one pixel");
    let hist = histogram(values);
    // Ties resolve to the lowest bin: max_by_key keeps the last maximum, so
    // scan in reverse.
    let mode_bin = (0..256).rev().max_by_key(|&b| hist[b]).unwrap_or(0);
    // Rounding is monotone, so the first pixel of the mode bin in ascending
    // order sits right after every pixel of the lower bins.
    let mode_rank = hist[..mode_bin].iter().sum::<u64>() as usize;
    let first = values[0];
    let degenerate = values.iter().all(|&v| v == first);
    let mode_value = mode_bin as f64;
    ChannelStats {
        channel,
        hist,
        mode_value,
        sigma: RAYLEIGH_SIGMA_RATIO * mode_value,
        sorted_len: values.len(),
        mode_rank,
        degenerate,
    }
}

/// Ascending copy of a channel.
pub fn sorted_values(values: &[f64]) -> Vec<f64> {
    let mut sorted = values.to_vec();
    sorted.sort_by(f64::total_cmp);
    sorted
}

/// Input stretch range selected around the histogram mode.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct ClipRange {
    pub i_min: f64,
    pub i_max: f64,
    pub lo_index: usize,
    pub hi_index: usize,
}

impl ClipRange {
    pub fn is_degenerate(&self) -> bool {
        self.i_min >= self.i_max
    }
}

/// Index pair `(lo, hi)` into the ascending pixel array.
///
/// `lo = floor(mode_rank * clip)` counts from the front; `hi` counts
/// `floor((len - mode_rank) * clip)` back from the end, the same way a
/// negative index would, with a floor of one so that no clipping selects
/// the last element.
pub fn clip_indices(len: usize, mode_rank: usize, clip: f64) -> (usize, usize) {
    let lo = (mode_rank as f64 * clip).floor() as usize;
    let back = ((len - mode_rank) as f64 * clip).floor() as usize;
    let hi = len - back.max(1);
    (lo.min(hi), hi)
}

/// Clipped input range `(I_min, I_max)` of a channel.
///
/// Returns [`Error::DegenerateChannel`] when the clipped range collapses to
/// a single value.
pub fn clipped_range(stats: &ChannelStats, sorted: &[f64], clip: f64) -> Result<ClipRange> {
    if !(clip > 0.0 && clip < 0.5) {
        return Err(Error::Config(format!("clip fraction {clip} outside (0, 0.5)")));
    }
    if sorted.len() != stats.sorted_len {
        return Err(Error::shape(
            "sorted_pixels",
            format!("length {} does not match channel size {}", sorted.len(), stats.sorted_len),
        ));
    }
    let (lo_index, hi_index) = clip_indices(sorted.len(), stats.mode_rank, clip);
    let range = ClipRange { i_min: sorted[lo_index], i_max: sorted[hi_index], lo_index, hi_index };
    if range.is_degenerate() {
        return Err(Error::DegenerateChannel(stats.channel));
    }
    Ok(range)
}

/// Shannon entropy in bits of a histogram. Zero for an empty histogram.
pub fn entropy(hist: &Histogram) -> f64 {
    let total: u64 = hist.iter().sum();
    if total == 0 {
        return 0.0;
    }
    let total = total as f64;
    let h: f64 = hist
        .iter()
        .filter(|&&c| c > 0)
        .map(|&c| {
            let p = c as f64 / total;
            -p * p.log2()
        })
        .sum();
    // -0.0 for a single bin
    h.max(0.0)
}
