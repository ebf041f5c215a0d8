//! Color correction in CIE-Lab: a percentile-clipped linear stretch of
//! lightness and an S-curve on the two chroma axes.
//!
//! Conversions assume sRGB primaries, the piecewise sRGB transfer function
//! and a D65 white point.

use std::sync::LazyLock;

use rayon::prelude::*;
use serde::Serialize;

use crate::error::{Error, Result};
use crate::imgio::{LabImage, RgbImage};

pub const DEFAULT_PHI: f64 = 1.3;
pub const PHI_RANGE: (f64, f64) = (1.2, 2.0);
pub const DEFAULT_L_CLIP: (f64, f64) = (0.01, 0.99);

const RGB_TO_XYZ: [[f64; 3]; 3] = [
    [0.4124564, 0.3575761, 0.1804375],
    [0.2126729, 0.7151522, 0.0721750],
    [0.0193339, 0.1191920, 0.9503041],
];

const WHITE: [f64; 3] = [0.95047, 1.0, 1.08883];

const LAB_EPSILON: f64 = 216.0 / 24389.0;
const LAB_KAPPA: f64 = 24389.0 / 27.0;

static XYZ_TO_RGB: LazyLock<[[f64; 3]; 3]> = LazyLock::new(|| invert3(&RGB_TO_XYZ));

fn invert3(m: &[[f64; 3]; 3]) -> [[f64; 3]; 3] {
    let cof = |r0: usize, r1: usize, c0: usize, c1: usize| m[r0][c0] * m[r1][c1] - m[r0][c1] * m[r1][c0];
    let det = m[0][0] * cof(1, 2, 1, 2) - m[0][1] * cof(1, 2, 0, 2) + m[0][2] * cof(1, 2, 0, 1);
    let inv_det = 1.0 / det;
    [
        [cof(1, 2, 1, 2) * inv_det, -cof(0, 2, 1, 2) * inv_det, cof(0, 1, 1, 2) * inv_det],
        [-cof(1, 2, 0, 2) * inv_det, cof(0, 2, 0, 2) * inv_det, -cof(0, 1, 0, 2) * inv_det],
        [cof(1, 2, 0, 1) * inv_det, -cof(0, 2, 0, 1) * inv_det, cof(0, 1, 0, 1) * inv_det],
    ]
}

fn mul3(m: &[[f64; 3]; 3], v: [f64; 3]) -> [f64; 3] {
    m.map(|row| row[0] * v[0] + row[1] * v[1] + row[2] * v[2])
}

fn srgb_to_linear(c: f64) -> f64 {
    if c <= 0.04045 {
        c / 12.92
    } else {
        ((c + 0.055) / 1.055).powf(2.4)
    }
}

fn linear_to_srgb(c: f64) -> f64 {
    if c <= 0.0031308 {
        c * 12.92
    } else {
        1.055 * c.powf(1.0 / 2.4) - 0.055
    }
}

fn lab_f(t: f64) -> f64 {
    if t > LAB_EPSILON {
        t.cbrt()
    } else {
        (LAB_KAPPA * t + 16.0) / 116.0
    }
}

fn lab_f_inv(f: f64) -> f64 {
    let t = f * f * f;
    if t > LAB_EPSILON {
        t
    } else {
        (116.0 * f - 16.0) / LAB_KAPPA
    }
}

/// One sRGB pixel (0..=255 per channel) to unclamped `(L, a, b)`.
pub fn rgb_pixel_to_lab(rgb: [f64; 3]) -> [f64; 3] {
    let linear = rgb.map(|c| srgb_to_linear(c / 255.0));
    let xyz = mul3(&RGB_TO_XYZ, linear);
    let [fx, fy, fz] = [0, 1, 2].map(|i| lab_f(xyz[i] / WHITE[i]));
    [116.0 * fy - 16.0, 500.0 * (fx - fy), 200.0 * (fy - fz)]
}

/// One `(L, a, b)` triple to unclamped sRGB on the 0..=255 scale.
pub fn lab_pixel_to_rgb(lab: [f64; 3]) -> [f64; 3] {
    let fy = (lab[0] + 16.0) / 116.0;
    let fx = fy + lab[1] / 500.0;
    let fz = fy - lab[2] / 200.0;
    let xyz = [lab_f_inv(fx) * WHITE[0], lab_f_inv(fy) * WHITE[1], lab_f_inv(fz) * WHITE[2]];
    mul3(&XYZ_TO_RGB, xyz).map(|c| 255.0 * linear_to_srgb(c))
}

pub fn rgb_to_lab(img: &RgbImage) -> LabImage {
    let data: Vec<f64> = img.data().par_chunks(3).flat_map_iter(|px| rgb_pixel_to_lab([px[0], px[1], px[2]])).collect();
    LabImage::new(img.width(), img.height(), data).expect("dimensions come from a valid image")
}

/// Inverse of [`rgb_to_lab`]; out-of-gamut colors are clamped to `[0, 255]`.
pub fn lab_to_rgb(lab: &LabImage) -> RgbImage {
    let data: Vec<f64> = lab.data().par_chunks(3).flat_map_iter(|px| lab_pixel_to_rgb([px[0], px[1], px[2]])).collect();
    RgbImage::from_raw_clamped(lab.width(), lab.height(), data).expect("dimensions come from a valid image")
}

/// Lightness range used by [`stretch_l`].
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct LightnessStretch {
    pub v_lo: f64,
    pub v_hi: f64,
    /// `v_lo == v_hi`; lightness was left unchanged.
    pub degenerate: bool,
}

impl LightnessStretch {
    pub fn map_unclamped(&self, l: f64) -> f64 {
        if self.degenerate {
            l
        } else {
            100.0 * (l - self.v_lo) / (self.v_hi - self.v_lo)
        }
    }
}

/// Nearest-rank percentile of an ascending slice.
pub fn percentile(sorted: &[f64], p: f64) -> f64 {
    let idx = (p.clamp(0.0, 1.0) * (sorted.len() - 1) as f64).round() as usize;
    sorted[idx]
}

/// Linear stretch of `L` so that its `clip.0` and `clip.1` percentiles map
/// to 0 and 100.
pub fn stretch_l(lab: &LabImage, clip: (f64, f64)) -> Result<(LabImage, LightnessStretch)> {
    if !(0.0 <= clip.0 && clip.0 < clip.1 && clip.1 <= 1.0) {
        return Err(Error::Config(format!("lightness clip {clip:?} must satisfy 0 <= lo < hi <= 1")));
    }
    let mut l = lab.lightness();
    l.sort_by(f64::total_cmp);
    let v_lo = percentile(&l, clip.0);
    let v_hi = percentile(&l, clip.1);
    let info = LightnessStretch { v_lo, v_hi, degenerate: v_hi <= v_lo };
    if info.degenerate {
        return Ok((lab.clone(), info));
    }
    let mut data = lab.data().to_vec();
    for px in data.chunks_exact_mut(3) {
        px[0] = info.map_unclamped(px[0]);
    }
    Ok((LabImage::new(lab.width(), lab.height(), data)?, info))
}

/// `x * phi^(1 - |x / 128|)` without clamping.
pub fn s_curve(x: f64, phi: f64) -> f64 {
    x * phi.powf(1.0 - (x / 128.0).abs())
}

/// Applies [`s_curve`] to `a` and `b`; `L` is untouched. Results are
/// clamped to `[-128, 127]`.
pub fn s_curve_ab(lab: &LabImage, phi: f64) -> Result<LabImage> {
    check_phi(phi)?;
    let mut data = lab.data().to_vec();
    for px in data.chunks_exact_mut(3) {
        px[1] = s_curve(px[1], phi);
        px[2] = s_curve(px[2], phi);
    }
    LabImage::new(lab.width(), lab.height(), data)
}

fn check_phi(phi: f64) -> Result<()> {
    if !(PHI_RANGE.0..=PHI_RANGE.1).contains(&phi) {
        return Err(Error::Config(format!("phi {phi} outside [{}, {}]", PHI_RANGE.0, PHI_RANGE.1)));
    }
    Ok(())
}

/// Checks that [`s_curve`] is non-decreasing on `[-128, 128]` by sampling a
/// `1e-3` grid.
pub fn s_curve_is_monotone(phi: f64) -> bool {
    let mut prev = s_curve(-128.0, phi);
    (1..=256_000).all(|i| {
        let x = -128.0 + i as f64 * 1e-3;
        let y = s_curve(x, phi);
        let ok = y >= prev;
        prev = y;
        ok
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct ColorCorrectConfig {
    pub phi: f64,
    pub l_clip: (f64, f64),
}

impl Default for ColorCorrectConfig {
    fn default() -> Self {
        ColorCorrectConfig { phi: DEFAULT_PHI, l_clip: DEFAULT_L_CLIP }
    }
}

impl ColorCorrectConfig {
    pub fn new(phi: f64, l_clip: (f64, f64)) -> Result<Self> {
        let cfg = ColorCorrectConfig { phi, l_clip };
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn validate(&self) -> Result<()> {
        check_phi(self.phi)?;
        if !s_curve_is_monotone(self.phi) {
            return Err(Error::Config(format!("s-curve is not monotone for phi {}", self.phi)));
        }
        if !(0.0 <= self.l_clip.0 && self.l_clip.0 < self.l_clip.1 && self.l_clip.1 <= 1.0) {
            return Err(Error::Config(format!("lightness clip {:?} is not an increasing fraction pair", self.l_clip)));
        }
        Ok(())
    }
}
