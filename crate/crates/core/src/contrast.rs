//! Contrast correction in RGB: gray-world equalization of the green and blue
//! channels, self-adaptive global histogram stretching, and bilateral
//! denoising.
//!
//! The stretch is the affine map
//!
//! ```text
//! P_out = (P_in - I_min) * (O_max - O_min) / (I_max - I_min) + O_min
//! ```
//!
//! where `[I_min, I_max]` is the clipped input range around the histogram
//! mode and the desired output range is parameterized by the Rayleigh
//! statistics of the channel:
//!
//! ```text
//! O_min = a - beta * sigma
//! O_max = (a + mu * sigma) / (kappa * t)
//! ```
//!
//! `beta` is chosen so that `O_min` falls in `(0, I_min)`, and `mu` from
//! `kappa*t*I_max/sigma - 1.526 <= mu <= kappa*t*255/sigma - 1.526`.

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::histogram::{Channel, ChannelStats};
use crate::imgio::{clamp_channel, RgbImage};

/// Gray value targeted by the gray-world correction, as a fraction of 255.
pub const GRAY_WORLD_K: f64 = 0.5;

/// Offset on the `mu` bounds, the mode-to-sigma ratio `1 / 0.655` as used
/// in the coefficient constraint.
pub const MU_OFFSET: f64 = 1.526;

/// Margin keeping solved output bounds strictly outside the input range.
pub const RANGE_EPSILON: f64 = 1e-6;

/// Fraction of the input range used to widen it when a coefficient has no
/// feasible value.
pub const FALLBACK_EXPANSION: f64 = 0.1;

/// Multiplicative gains for the green and blue channels. Red is never scaled.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct GrayWorldGains {
    pub g_gain: f64,
    pub b_gain: f64,
}

impl GrayWorldGains {
    pub const IDENTITY: GrayWorldGains = GrayWorldGains { g_gain: 1.0, b_gain: 1.0 };
}

fn channel_mean(img: &RgbImage, channel: Channel) -> f64 {
    let sum: f64 = img.data().iter().skip(channel.index()).step_by(3).sum();
    sum / img.len() as f64
}

fn gray_world_gain(img: &RgbImage, channel: Channel) -> Result<f64> {
    let mean = channel_mean(img, channel);
    if mean <= 0.0 {
        return Err(Error::DegenerateChannel(channel));
    }
    Ok(GRAY_WORLD_K * 255.0 / mean)
}

/// Gains that bring the mean of G and B to `0.5 * 255`.
///
/// Fails with [`Error::DegenerateChannel`] if either channel has zero mean.
pub fn gray_world_gains(img: &RgbImage) -> Result<GrayWorldGains> {
    Ok(GrayWorldGains {
        g_gain: gray_world_gain(img, Channel::G)?,
        b_gain: gray_world_gain(img, Channel::B)?,
    })
}

/// Per-channel variant used by the pipeline: a zero-mean channel keeps gain
/// 1 instead of failing the whole image.
pub(crate) fn gray_world_gains_lenient(img: &RgbImage) -> (GrayWorldGains, [bool; 2]) {
    let g = gray_world_gain(img, Channel::G);
    let b = gray_world_gain(img, Channel::B);
    let flags = [g.is_err(), b.is_err()];
    (GrayWorldGains { g_gain: g.unwrap_or(1.0), b_gain: b.unwrap_or(1.0) }, flags)
}

/// Scales G and B by their gains and clamps to `[0, 255]`.
pub fn apply_gain(img: &RgbImage, gains: GrayWorldGains) -> RgbImage {
    let mut data = img.data().to_vec();
    for px in data.chunks_exact_mut(3) {
        px[1] = clamp_channel(px[1] * gains.g_gain);
        px[2] = clamp_channel(px[2] * gains.b_gain);
    }
    RgbImage::new(img.width(), img.height(), data).expect("clamped samples are valid")
}

/// How a coefficient is picked from its feasibility interval.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum CoefficientStrategy {
    #[default]
    Midpoint,
    Lower,
    Upper,
}

impl CoefficientStrategy {
    fn pick(self, lo: f64, hi: f64) -> f64 {
        match self {
            CoefficientStrategy::Midpoint => 0.5 * (lo + hi),
            CoefficientStrategy::Lower => lo,
            CoefficientStrategy::Upper => hi,
        }
    }
}

impl std::str::FromStr for CoefficientStrategy {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "midpoint" => Ok(CoefficientStrategy::Midpoint),
            "lower" => Ok(CoefficientStrategy::Lower),
            "upper" => Ok(CoefficientStrategy::Upper),
            other => Err(Error::Config(format!("unknown coefficient strategy `{other}`"))),
        }
    }
}

/// Solved stretch of one channel.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct StretchParams {
    pub channel: Channel,
    pub i_min: f64,
    pub i_max: f64,
    pub o_min: f64,
    pub o_max: f64,
    /// Minimum-side coefficient; `None` if its interval was empty.
    pub beta: Option<f64>,
    /// Maximum-side coefficient; `None` if its interval was empty.
    pub mu: Option<f64>,
    /// Open interval `beta` was drawn from.
    pub beta_bounds: Option<(f64, f64)>,
    /// Closed interval `mu` was drawn from.
    pub mu_bounds: Option<(f64, f64)>,
    pub kappa: f64,
    pub t: f64,
    /// At least one side used the fixed-expansion fallback.
    pub fallback: bool,
    /// Constant channel; the stretch is the identity.
    pub degenerate: bool,
}

impl StretchParams {
    /// Identity parameters for a channel that cannot be stretched.
    pub fn passthrough(channel: Channel, value: f64, kappa: f64, t: f64) -> Self {
        StretchParams {
            channel,
            i_min: value,
            i_max: value,
            o_min: value,
            o_max: value,
            beta: None,
            mu: None,
            beta_bounds: None,
            mu_bounds: None,
            kappa,
            t,
            fallback: false,
            degenerate: true,
        }
    }

    /// The affine stretch before clamping. Identity for degenerate params.
    pub fn map_unclamped(&self, p_in: f64) -> f64 {
        if self.degenerate {
            return p_in;
        }
        (p_in - self.i_min) * (self.o_max - self.o_min) / (self.i_max - self.i_min) + self.o_min
    }

    pub fn map(&self, p_in: f64) -> f64 {
        clamp_channel(self.map_unclamped(p_in))
    }
}

/// Solves the desired output range `(O_min, O_max)` of one channel.
///
/// An empty coefficient interval (mode 0, `I_min = 0`, or `I_max = 255`)
/// falls back to widening the input range by 10% on that side and sets
/// `fallback`.
pub fn solve_stretch_params(
    stats: &ChannelStats,
    i_min: f64,
    i_max: f64,
    kappa: f64,
    t: f64,
    strategy: CoefficientStrategy,
) -> Result<StretchParams> {
    if stats.degenerate || !(i_min < i_max) {
        return Err(Error::DegenerateChannel(stats.channel));
    }
    if !(kappa > 0.0 && kappa.is_finite()) {
        return Err(Error::Config(format!("kappa must be positive, got {kappa}")));
    }
    if !(t > 0.0 && t <= 1.0) {
        return Err(Error::Config(format!("transmission must lie in (0, 1], got {t}")));
    }

    let a = stats.mode_value;
    let sigma = stats.sigma;
    let spread = FALLBACK_EXPANSION * (i_max - i_min);

    let (beta, beta_bounds, o_min) = if sigma > 0.0 && i_min > 0.0 {
        let bounds = ((a - i_min) / sigma, a / sigma);
        let beta = strategy.pick(bounds.0, bounds.1);
        let o_min = (a - beta * sigma).min(i_min - RANGE_EPSILON).max(0.0);
        (Some(beta), Some(bounds), o_min)
    } else {
        (None, None, (i_min - spread).max(0.0))
    };

    let kt = kappa * t;
    let (mu, mu_bounds, o_max) = if sigma > 0.0 && i_max < 255.0 {
        let bounds = (kt * i_max / sigma - MU_OFFSET, kt * 255.0 / sigma - MU_OFFSET);
        let mu = strategy.pick(bounds.0, bounds.1);
        let o_max = ((a + mu * sigma) / kt).max(i_max + RANGE_EPSILON).min(255.0);
        (Some(mu), Some(bounds), o_max)
    } else {
        (None, None, (i_max + spread).min(255.0))
    };

    Ok(StretchParams {
        channel: stats.channel,
        i_min,
        i_max,
        o_min,
        o_max,
        beta,
        mu,
        beta_bounds,
        mu_bounds,
        kappa,
        t,
        fallback: beta.is_none() || mu.is_none(),
        degenerate: false,
    })
}

/// Applies the stretch to every pixel and clamps to `[0, 255]`.
pub fn stretch_channel(pixels: &[f64], params: &StretchParams) -> Vec<f64> {
    pixels.iter().map(|&p| params.map(p)).collect()
}

/// Bilateral filter settings.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct BilateralParams {
    /// Window half-width; the window is `(2 * radius + 1)` pixels square.
    pub radius: usize,
    /// Spatial Gaussian sigma in pixels.
    pub spatial_sigma: f64,
    /// Range Gaussian sigma in channel units.
    pub range_sigma: f64,
}

impl Default for BilateralParams {
    fn default() -> Self {
        BilateralParams { radius: 3, spatial_sigma: 3.0, range_sigma: 10.0 }
    }
}

impl BilateralParams {
    pub fn validate(&self) -> Result<()> {
        if self.radius < 1 {
            return Err(Error::Config("bilateral radius must be at least 1".into()));
        }
        if !(self.spatial_sigma > 0.0) || !(self.range_sigma > 0.0) {
            return Err(Error::Config("bilateral sigmas must be positive".into()));
        }
        Ok(())
    }
}

/// Edge-preserving smoothing applied independently to each channel, with
/// replicated borders.
///
/// Rows are filtered in parallel; each output sample is accumulated in a
/// fixed order, so results do not depend on the thread count.
pub fn bilateral_filter(img: &RgbImage, params: &BilateralParams) -> Result<RgbImage> {
    params.validate()?;
    let (w, h) = (img.width(), img.height());
    let planes: Vec<Vec<f64>> = Channel::ALL
        .par_iter()
        .map(|&ch| bilateral_plane(&img.channel(ch), w, h, params))
        .collect();
    let data = (0..w * h).flat_map(|i| [planes[0][i], planes[1][i], planes[2][i]]).collect();
    RgbImage::from_raw_clamped(w, h, data)
}

/// One channel. The range weight of a pixel pair is symmetric, so each pair
/// is weighted once and credited to whichever of its two ends is an output
/// pixel. Working on a replicate-padded plane makes border pairs behave the
/// same way. The summation order is fixed, so results do not depend on the
/// thread count.
fn bilateral_plane(plane: &[f64], w: usize, h: usize, params: &BilateralParams) -> Vec<f64> {
    let r = params.radius;
    let inv_2s = 1.0 / (2.0 * params.spatial_sigma * params.spatial_sigma);
    let inv_2r = 1.0 / (2.0 * params.range_sigma * params.range_sigma);
    let pw = w + 2 * r;
    let padded: Vec<f64> = (0..h + 2 * r)
        .flat_map(|py| {
            let y = py.saturating_sub(r).min(h - 1);
            (0..pw).map(move |px| plane[y * w + px.saturating_sub(r).min(w - 1)])
        })
        .collect();

    // The center tap has weight exactly 1.
    let mut acc = plane.to_vec();
    let mut norm = vec![1.0; w * h];
    let inside = |py: usize, px: usize| py >= r && py < r + h && px >= r && px < r + w;
    let out_idx = |py: usize, px: usize| (py - r) * w + (px - r);

    let (ri, wi, hi) = (r as isize, w as isize, h as isize);
    for dy in 0..=ri {
        for dx in -ri..=ri {
            if dy == 0 && dx <= 0 {
                continue;
            }
            let kw = (-((dx * dx + dy * dy) as f64) * inv_2s).exp();
            let x_lo = ri.min(ri - dx) as usize;
            let x_hi = (ri + wi).max(ri + wi - dx) as usize;
            for py in (ri - dy) as usize..(ri + hi) as usize {
                let qy = py + dy as usize;
                for px in x_lo..x_hi {
                    let qx = (px as isize + dx) as usize;
                    let (p_in, q_in) = (inside(py, px), inside(qy, qx));
                    if !p_in && !q_in {
                        continue;
                    }
                    let (vp, vq) = (padded[py * pw + px], padded[qy * pw + qx]);
                    let d = vq - vp;
                    let wgt = kw * (-d * d * inv_2r).exp();
                    if p_in {
                        let i = out_idx(py, px);
                        acc[i] += wgt * vq;
                        norm[i] += wgt;
                    }
                    if q_in {
                        let i = out_idx(qy, qx);
                        acc[i] += wgt * vp;
                        norm[i] += wgt;
                    }
                }
            }
        }
    }
    acc.iter().zip(&norm).map(|(a, n)| a / n).collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::histogram::stats_from_values;
    use proptest::prelude::*;

    fn stats_with_mode(mode: f64) -> ChannelStats {
        // a channel whose mode is `mode` and which is not constant
        let mut v = vec![mode; 10];
        v.push(if mode < 128.0 { 250.0 } else { 1.0 });
        stats_from_values(&v, Channel::R)
    }

    #[test]
    fn gray_world_examples() {
        let g = gray_world_gains(&RgbImage::filled(4, 4, [10.0, 127.5, 255.0])).unwrap();
        assert_eq!(g.g_gain, 1.0);
        assert_eq!(g.b_gain, 0.5);

        let img = RgbImage::filled(3, 3, [10.0, 64.0, 90.0]);
        let g = gray_world_gains(&img).unwrap();
        assert_eq!(g.g_gain, 127.5 / 64.0);
        assert_eq!(g.g_gain, 1.9921875);
        let out = apply_gain(&img, g);
        assert!(out.channel(Channel::G).iter().all(|&v| (v - 127.5).abs() < 1e-12));
        assert!(out.channel(Channel::R).iter().all(|&v| v == 10.0));
    }

    #[test]
    fn gray_world_zero_mean_is_degenerate() {
        let err = gray_world_gains(&RgbImage::filled(2, 2, [5.0, 0.0, 10.0])).unwrap_err();
        assert!(matches!(err, Error::DegenerateChannel(Channel::G)));
    }

    #[test]
    fn apply_gain_examples() {
        let img = RgbImage::from_fn(2, 1, |x, _| if x == 0 { [1.0, 200.0, 3.0] } else { [4.0, 100.0, 6.0] });
        assert_eq!(apply_gain(&img, GrayWorldGains::IDENTITY), img);
        let out = apply_gain(&img, GrayWorldGains { g_gain: 1.5, b_gain: 1.0 });
        assert_eq!(out.pixel(0, 0)[1], 255.0);
        let out = apply_gain(&img, GrayWorldGains { g_gain: 1.275, b_gain: 1.0 });
        assert!((out.pixel(1, 0)[1] - 127.5).abs() < 1e-12);
    }

    #[test]
    fn beta_midpoint_example() {
        let stats = stats_with_mode(100.0);
        assert_eq!(stats.sigma, 65.5);
        let p = solve_stretch_params(&stats, 40.0, 180.0, 1.0, 0.95, CoefficientStrategy::Midpoint).unwrap();
        let (lo, hi) = p.beta_bounds.unwrap();
        assert!((lo - 60.0 / 65.5).abs() < 1e-12);
        assert!((hi - 100.0 / 65.5).abs() < 1e-12);
        assert!((p.beta.unwrap() - 1.2213740458).abs() < 1e-9);
        assert!((p.o_min - 20.0).abs() < 1e-9);
    }

    #[test]
    fn mu_midpoint_example() {
        let stats = stats_with_mode(100.0);
        let p = solve_stretch_params(&stats, 40.0, 180.0, 1.0, 0.95, CoefficientStrategy::Midpoint).unwrap();
        let (lo, hi) = p.mu_bounds.unwrap();
        // 0.95 * 180 / 65.5 - 1.526 and 0.95 * 255 / 65.5 - 1.526
        assert!((lo - 1.084687).abs() < 1e-5);
        assert!((hi - 2.172473).abs() < 1e-5);
        let mu = p.mu.unwrap();
        assert!((mu - 1.628580).abs() < 1e-5);
        assert!((p.o_max - 217.5495).abs() < 1e-3);
        assert!(p.o_max > 180.0 && p.o_max <= 255.0);
        let inverse = (p.kappa * p.t * p.o_max - stats.mode_value) / stats.sigma;
        assert!((inverse - mu).abs() < 1e-12);
        assert!(!p.fallback);
    }

    #[test]
    fn strategies_and_clamps() {
        let stats = stats_with_mode(100.0);
        let lower = solve_stretch_params(&stats, 40.0, 180.0, 1.0, 0.95, CoefficientStrategy::Lower).unwrap();
        // beta at its lower bound would give O_min = I_min; clamped just below
        assert!(lower.o_min < 40.0 && lower.o_min > 40.0 - 1e-5);
        let upper = solve_stretch_params(&stats, 40.0, 180.0, 1.0, 0.95, CoefficientStrategy::Upper).unwrap();
        assert_eq!(upper.o_min, 0.0);
        assert_eq!(upper.o_max, 255.0);
    }

    #[test]
    fn empty_intervals_fall_back() {
        let stats = stats_with_mode(100.0);
        let p = solve_stretch_params(&stats, 0.0, 255.0, 1.0, 0.9, CoefficientStrategy::Midpoint).unwrap();
        assert!(p.fallback && p.beta.is_none() && p.mu.is_none());
        assert_eq!((p.o_min, p.o_max), (0.0, 255.0));

        let zero_mode = stats_with_mode(0.0);
        let p = solve_stretch_params(&zero_mode, 10.0, 110.0, 1.0, 0.9, CoefficientStrategy::Midpoint).unwrap();
        assert!(p.fallback);
        assert_eq!((p.o_min, p.o_max), (0.0, 120.0));
    }

    #[test]
    fn solve_rejects_bad_inputs() {
        let stats = stats_with_mode(100.0);
        let solve = |i_min, i_max, kappa, t| {
            solve_stretch_params(&stats, i_min, i_max, kappa, t, CoefficientStrategy::Midpoint)
        };
        assert!(matches!(solve(50.0, 50.0, 1.0, 0.9), Err(Error::DegenerateChannel(_))));
        assert!(matches!(solve(10.0, 50.0, 0.0, 0.9), Err(Error::Config(_))));
        assert!(matches!(solve(10.0, 50.0, 1.0, 1.5), Err(Error::Config(_))));
        let constant = stats_from_values(&[3.0; 4], Channel::B);
        let err = solve_stretch_params(&constant, 1.0, 2.0, 1.0, 0.9, CoefficientStrategy::Midpoint);
        assert!(matches!(err, Err(Error::DegenerateChannel(Channel::B))));
    }

    fn params(i_min: f64, i_max: f64, o_min: f64, o_max: f64) -> StretchParams {
        StretchParams {
            o_min,
            o_max,
            i_min,
            i_max,
            degenerate: false,
            ..StretchParams::passthrough(Channel::R, 0.0, 1.0, 1.0)
        }
    }

    #[test]
    fn stretch_examples() {
        let p = params(50.0, 200.0, 0.0, 255.0);
        assert_eq!(stretch_channel(&[100.0], &p), vec![85.0]);
        assert_eq!(p.map(50.0), 0.0);
        assert_eq!(p.map(200.0), 255.0);
        let id = params(30.0, 90.0, 30.0, 90.0);
        for v in [30.0, 42.5, 77.0, 90.0] {
            assert!((id.map(v) - v).abs() < 1e-12);
        }
        // below I_min maps below O_min, then clamps
        assert!(p.map_unclamped(20.0) < 0.0);
        assert_eq!(p.map(20.0), 0.0);
    }

    #[test]
    fn bilateral_constant_image() {
        let img = RgbImage::filled(9, 7, [12.0, 99.0, 200.0]);
        let out = bilateral_filter(&img, &BilateralParams::default()).unwrap();
        for (a, b) in out.data().iter().zip(img.data()) {
            assert!((a - b).abs() < 1e-9);
        }
    }

    #[test]
    fn bilateral_preserves_impulse() {
        let img = RgbImage::from_fn(7, 7, |x, y| if (x, y) == (3, 3) { [255.0; 3] } else { [0.0; 3] });
        let p = BilateralParams { radius: 1, spatial_sigma: 3.0, range_sigma: 5.0 };
        let out = bilateral_filter(&img, &p).unwrap();
        for y in 0..7 {
            for x in 0..7 {
                let v = out.pixel(x, y)[0];
                if (x, y) == (3, 3) {
                    assert!((v - 255.0).abs() <= 1.0);
                } else {
                    assert!(v < 1.0);
                }
            }
        }
    }

    #[test]
    fn bilateral_rejects_bad_params() {
        let img = RgbImage::filled(2, 2, [0.0; 3]);
        let bad = [
            BilateralParams { radius: 0, ..Default::default() },
            BilateralParams { spatial_sigma: 0.0, ..Default::default() },
            BilateralParams { range_sigma: -1.0, ..Default::default() },
        ];
        for p in bad {
            assert!(matches!(bilateral_filter(&img, &p), Err(Error::Config(_))));
        }
    }

    fn direct_bilateral(img: &RgbImage, p: &BilateralParams) -> Vec<f64> {
        let (w, h, r) = (img.width() as isize, img.height() as isize, p.radius as isize);
        let mut out = Vec::new();
        for y in 0..h {
            for x in 0..w {
                for c in 0..3 {
                    let center = img.pixel(x as usize, y as usize)[c];
                    let (mut acc, mut norm) = (0.0, 0.0);
                    for dy in -r..=r {
                        for dx in -r..=r {
                            let yy = (y + dy).clamp(0, h - 1) as usize;
                            let xx = (x + dx).clamp(0, w - 1) as usize;
                            let v = img.pixel(xx, yy)[c];
                            let ws = (-((dx * dx + dy * dy) as f64) / (2.0 * p.spatial_sigma.powi(2))).exp();
                            let wr = (-(v - center).powi(2) / (2.0 * p.range_sigma.powi(2))).exp();
                            acc += ws * wr * v;
                            norm += ws * wr;
                        }
                    }
                    out.push(acc / norm);
                }
            }
        }
        out
    }

    #[test]
    fn bilateral_matches_direct_window_sum() {
        let mut s = 9u64;
        for (w, h, radius) in [(7, 5, 2), (1, 1, 3), (2, 9, 3), (13, 11, 1)] {
            let img = RgbImage::from_fn(w, h, |_, _| {
                [0; 3].map(|_| {
                    s = s.wrapping_mul(6364136223846793005).wrapping_add(1442695040888963407);
                    (s >> 11) as f64 / (1u64 << 53) as f64 * 255.0
                })
            });
            let p = BilateralParams { radius, spatial_sigma: 2.0, range_sigma: 40.0 };
            let got = bilateral_filter(&img, &p).unwrap();
            for (a, b) in got.data().iter().zip(direct_bilateral(&img, &p)) {
                assert!((a - b).abs() < 1e-9, "{w}x{h} r{radius}: {a} vs {b}");
            }
        }
    }

    proptest! {
        #[test]
        fn stretch_is_strictly_increasing(
            i_min in 0.0f64..200.0, span in 1.0f64..55.0,
            o_min in 0.0f64..100.0, o_span in 1.0f64..155.0,
            x in 0.0f64..1.0, y in 0.0f64..1.0,
        ) {
            let p = params(i_min, i_min + span, o_min, o_min + o_span);
            let (x, y) = (i_min + x.min(y) * span, i_min + x.max(y) * span);
            prop_assume!(x < y);
            prop_assert!(p.map_unclamped(x) < p.map_unclamped(y));
        }

        #[test]
        fn bilateral_stays_within_window(seed in 0u64..1000) {
            let img = RgbImage::from_fn(6, 5, |x, y| {
                let h = (seed.wrapping_mul(6364136223846793005).wrapping_add((x * 31 + y * 17) as u64) >> 33) % 256;
                [h as f64, (h * 7 % 256) as f64, (255 - h) as f64]
            });
            let p = BilateralParams { radius: 1, spatial_sigma: 1.5, range_sigma: 20.0 };
            let out = bilateral_filter(&img, &p).unwrap();
            for y in 0..5usize {
                for x in 0..6usize {
                    for c in 0..3 {
                        let mut lo = f64::INFINITY;
                        let mut hi = f64::NEG_INFINITY;
                        for yy in y.saturating_sub(1)..=(y + 1).min(4) {
                            for xx in x.saturating_sub(1)..=(x + 1).min(5) {
                                let v = img.pixel(xx, yy)[c];
                                lo = lo.min(v);
                                hi = hi.max(v);
                            }
                        }
                        let v = out.pixel(x, y)[c];
                        prop_assert!(v >= lo - 1e-9 && v <= hi + 1e-9);
                    }
                }
            }
        }
    }
}
