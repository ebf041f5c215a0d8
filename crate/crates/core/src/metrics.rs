//! Image quality measures: per-channel entropy, RMS contrast and means,
//! channel imbalance, and a Harris-corner repeatability score under
//! rotation.

use serde::Serialize;

use crate::error::{Error, Result};
use crate::histogram::{entropy, histogram, Channel};
use crate::imgio::RgbImage;

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct MetricsReport {
    /// Shannon entropy in bits of each channel, R, G, B order.
    pub entropy: [f64; 3],
    /// Population standard deviation of each channel.
    pub rms_contrast: [f64; 3],
    pub mean: [f64; 3],
    /// Largest pairwise difference between channel means.
    pub channel_imbalance: f64,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub corner_repeatability: Option<f64>,
}

impl MetricsReport {
    pub fn mean_entropy(&self) -> f64 {
        self.entropy.iter().sum::<f64>() / 3.0
    }

    pub fn mean_rms_contrast(&self) -> f64 {
        self.rms_contrast.iter().sum::<f64>() / 3.0
    }
}

pub fn compute_metrics(img: &RgbImage) -> MetricsReport {
    let mut entropy_per = [0.0; 3];
    let mut contrast = [0.0; 3];
    let mut mean = [0.0; 3];
    for ch in Channel::ALL {
        let values = img.channel(ch);
        let n = values.len() as f64;
        let m = values.iter().sum::<f64>() / n;
        let var = values.iter().map(|v| (v - m) * (v - m)).sum::<f64>() / n;
        let i = ch.index();
        entropy_per[i] = entropy(&histogram(&values));
        contrast[i] = var.sqrt();
        mean[i] = m;
    }
    let channel_imbalance = [(0, 1), (0, 2), (1, 2)]
        .iter()
        .map(|&(i, j)| (mean[i] - mean[j]).abs())
        .fold(0.0, f64::max);
    MetricsReport { entropy: entropy_per, rms_contrast: contrast, mean, channel_imbalance, corner_repeatability: None }
}

/// Harris detector settings.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct HarrisConfig {
    pub k: f64,
    pub top_n: usize,
    /// Responses below this fraction of the strongest are discarded.
    pub relative_threshold: f64,
    /// Gaussian sigma of the structure-tensor window.
    pub window_sigma: f64,
}

impl Default for HarrisConfig {
    fn default() -> Self {
        HarrisConfig { k: 0.04, top_n: 200, relative_threshold: 0.01, window_sigma: 1.0 }
    }
}

/// Distance in pixels within which a re-detected corner counts as repeated.
pub const MATCH_RADIUS: f64 = 2.0;
/// Corners closer than this to the valid image area are ignored.
pub const BORDER_MARGIN: f64 = 4.0;
pub const MIN_CORNERS: usize = 10;

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct Corner {
    pub x: f64,
    pub y: f64,
    pub response: f64,
}

/// Single-channel float image used by the detector.
#[derive(Debug, Clone)]
struct Plane {
    w: usize,
    h: usize,
    data: Vec<f64>,
}

impl Plane {
    fn at(&self, x: isize, y: isize) -> f64 {
        let x = x.clamp(0, self.w as isize - 1) as usize;
        let y = y.clamp(0, self.h as isize - 1) as usize;
        self.data[y * self.w + x]
    }

    fn bilinear(&self, x: f64, y: f64) -> f64 {
        let x0 = x.floor();
        let y0 = y.floor();
        let (fx, fy) = (x - x0, y - y0);
        let (x0, y0) = (x0 as isize, y0 as isize);
        let top = self.at(x0, y0) * (1.0 - fx) + self.at(x0 + 1, y0) * fx;
        let bottom = self.at(x0, y0 + 1) * (1.0 - fx) + self.at(x0 + 1, y0 + 1) * fx;
        top * (1.0 - fy) + bottom * fy
    }
}

fn luma(img: &RgbImage) -> Plane {
    let data = img.data().chunks_exact(3).map(|p| 0.299 * p[0] + 0.587 * p[1] + 0.114 * p[2]).collect();
    Plane { w: img.width(), h: img.height(), data }
}

fn gaussian_smooth(p: &Plane, sigma: f64) -> Plane {
    let r = (3.0 * sigma).ceil() as isize;
    let kernel: Vec<f64> = (-r..=r).map(|d| (-(d * d) as f64 / (2.0 * sigma * sigma)).exp()).collect();
    let norm: f64 = kernel.iter().sum();
    let kernel: Vec<f64> = kernel.iter().map(|k| k / norm).collect();
    let pass = |src: &Plane, horizontal: bool| {
        let mut data = vec![0.0; src.data.len()];
        for y in 0..src.h as isize {
            for x in 0..src.w as isize {
                let mut acc = 0.0;
                for (i, k) in kernel.iter().enumerate() {
                    let d = i as isize - r;
                    acc += k * if horizontal { src.at(x + d, y) } else { src.at(x, y + d) };
                }
                data[y as usize * src.w + x as usize] = acc;
            }
        }
        Plane { w: src.w, h: src.h, data }
    };
    pass(&pass(p, true), false)
}

/// Harris response `det(M) - k * trace(M)^2` with Sobel gradients.
fn harris_response(p: &Plane, cfg: &HarrisConfig) -> Plane {
    let n = p.data.len();
    let (mut xx, mut yy, mut xy) = (vec![0.0; n], vec![0.0; n], vec![0.0; n]);
    for y in 0..p.h as isize {
        for x in 0..p.w as isize {
            let gx = (p.at(x + 1, y - 1) + 2.0 * p.at(x + 1, y) + p.at(x + 1, y + 1))
                - (p.at(x - 1, y - 1) + 2.0 * p.at(x - 1, y) + p.at(x - 1, y + 1));
            let gy = (p.at(x - 1, y + 1) + 2.0 * p.at(x, y + 1) + p.at(x + 1, y + 1))
                - (p.at(x - 1, y - 1) + 2.0 * p.at(x, y - 1) + p.at(x + 1, y - 1));
            let i = y as usize * p.w + x as usize;
            xx[i] = gx * gx;
            yy[i] = gy * gy;
            xy[i] = gx * gy;
        }
    }
    let smooth = |data| gaussian_smooth(&Plane { w: p.w, h: p.h, data }, cfg.window_sigma).data;
    let (sxx, syy, sxy) = (smooth(xx), smooth(yy), smooth(xy));
    let data = (0..n)
        .map(|i| {
            let det = sxx[i] * syy[i] - sxy[i] * sxy[i];
            let tr = sxx[i] + syy[i];
            det - cfg.k * tr * tr
        })
        .collect();
    Plane { w: p.w, h: p.h, data }
}

/// Local maxima of the response over a 3x3 neighborhood, strongest first.
/// Pixels where `valid` is false are never reported.
fn detect(p: &Plane, valid: &[bool], cfg: &HarrisConfig) -> Vec<Corner> {
    let resp = harris_response(p, cfg);
    let max = resp
        .data
        .iter()
        .zip(valid)
        .filter(|(_, &ok)| ok)
        .map(|(&r, _)| r)
        .fold(0.0, f64::max);
    if max <= 0.0 {
        return Vec::new();
    }
    let floor = cfg.relative_threshold * max;
    let (w, h) = (p.w as isize, p.h as isize);
    let mut corners = Vec::new();
    for y in 0..h {
        for x in 0..w {
            let i = (y * w + x) as usize;
            let r = resp.data[i];
            if !valid[i] || r <= floor {
                continue;
            }
            // Plateaus keep only their first pixel in scan order.
            let is_max = (-1..=1).all(|dy| {
                (-1..=1).all(|dx| {
                    let (nx, ny) = (x + dx, y + dy);
                    if (dx, dy) == (0, 0) || nx < 0 || ny < 0 || nx >= w || ny >= h {
                        return true;
                    }
                    let o = resp.data[(ny * w + nx) as usize];
                    let earlier = (dy, dx) < (0, 0);
                    if earlier { r > o } else { r >= o }
                })
            });
            if is_max {
                corners.push(Corner { x: x as f64, y: y as f64, response: r });
            }
        }
    }
    corners.sort_by(|a, b| b.response.total_cmp(&a.response));
    corners.truncate(cfg.top_n);
    corners
}

fn inside(x: f64, y: f64, w: usize, h: usize, margin: f64) -> bool {
    x >= margin && y >= margin && x <= w as f64 - 1.0 - margin && y <= h as f64 - 1.0 - margin
}

/// Harris corners of `img`, ignoring a border of [`BORDER_MARGIN`] pixels.
pub fn harris_corners(img: &RgbImage, cfg: &HarrisConfig) -> Vec<Corner> {
    let p = luma(img);
    let valid: Vec<bool> = (0..p.h)
        .flat_map(|y| (0..p.w).map(move |x| (x, y)))
        .map(|(x, y)| inside(x as f64, y as f64, p.w, p.h, BORDER_MARGIN))
        .collect();
    detect(&p, &valid, cfg)
}

/// Rotation by `deg` about the image center, same canvas size.
#[derive(Debug, Clone, Copy)]
struct Rotation {
    cos: f64,
    sin: f64,
    cx: f64,
    cy: f64,
}

impl Rotation {
    fn new(deg: f64, w: usize, h: usize) -> Self {
        let (sin, cos) = deg.to_radians().sin_cos();
        Rotation { cos, sin, cx: (w as f64 - 1.0) / 2.0, cy: (h as f64 - 1.0) / 2.0 }
    }

    fn forward(&self, x: f64, y: f64) -> (f64, f64) {
        let (dx, dy) = (x - self.cx, y - self.cy);
        (self.cx + self.cos * dx - self.sin * dy, self.cy + self.sin * dx + self.cos * dy)
    }

    fn inverse(&self, x: f64, y: f64) -> (f64, f64) {
        let (dx, dy) = (x - self.cx, y - self.cy);
        (self.cx + self.cos * dx + self.sin * dy, self.cy - self.sin * dx + self.cos * dy)
    }
}

/// Rotated copy with bilinear sampling, plus a mask of pixels whose source
/// lies at least [`BORDER_MARGIN`] inside the original.
fn rotate(p: &Plane, rot: &Rotation) -> (Plane, Vec<bool>) {
    let mut data = vec![0.0; p.data.len()];
    let mut valid = vec![false; p.data.len()];
    for y in 0..p.h {
        for x in 0..p.w {
            let (sx, sy) = rot.inverse(x as f64, y as f64);
            let i = y * p.w + x;
            if inside(sx, sy, p.w, p.h, 0.0) {
                data[i] = p.bilinear(sx, sy);
            }
            valid[i] = inside(sx, sy, p.w, p.h, BORDER_MARGIN) && inside(x as f64, y as f64, p.w, p.h, BORDER_MARGIN);
        }
    }
    (Plane { w: p.w, h: p.h, data }, valid)
}

/// Outcome of one repeatability measurement.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct Repeatability {
    /// Corners detected in the unrotated image.
    pub detected: usize,
    /// Detected corners whose rotated position stays inside the valid area.
    pub total: usize,
    /// Of `total`, corners re-detected within [`MATCH_RADIUS`].
    pub repeated: usize,
}

impl Repeatability {
    /// `repeated / total`, or `None` when fewer than [`MIN_CORNERS`] were found.
    pub fn fraction(&self) -> Option<f64> {
        if self.detected < MIN_CORNERS || self.total == 0 {
            None
        } else {
            Some(self.repeated as f64 / self.total as f64)
        }
    }

    pub fn insufficient(&self) -> bool {
        self.fraction().is_none()
    }
}

/// Fraction of Harris corners of `img` that are re-detected after rotating
/// the image by `rotation_deg` about its center.
pub fn repeatability(img: &RgbImage, rotation_deg: f64, cfg: &HarrisConfig) -> Repeatability {
    let p = luma(img);
    let corners = harris_corners(img, cfg);
    let rot = Rotation::new(rotation_deg, p.w, p.h);
    let (rotated, valid) = rotate(&p, &rot);
    let found = detect(&rotated, &valid, cfg);

    let mut total = 0;
    let mut repeated = 0;
    for c in &corners {
        let (x, y) = rot.forward(c.x, c.y);
        if !inside(x, y, p.w, p.h, BORDER_MARGIN) {
            continue;
        }
        total += 1;
        let hit = found.iter().any(|f| (f.x - x).hypot(f.y - y) <= MATCH_RADIUS);
        if hit {
            repeated += 1;
        }
    }
    Repeatability { detected: corners.len(), total, repeated }
}

/// Repeatability of the original and the enhanced image under the same
/// rotation.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct RepeatabilityComparison {
    pub rotation_deg: f64,
    pub original: Repeatability,
    pub enhanced: Repeatability,
}

pub fn corner_repeatability(original: &RgbImage, enhanced: &RgbImage, rotation_deg: f64) -> Result<RepeatabilityComparison> {
    if (original.width(), original.height()) != (enhanced.width(), enhanced.height()) {
        return Err(Error::shape("enhanced", "dimensions differ from the original"));
    }
    if !(rotation_deg > 0.0 && rotation_deg <= 45.0) {
        return Err(Error::Config(format!("rotation {rotation_deg} outside (0, 45] degrees")));
    }
    let cfg = HarrisConfig::default();
    Ok(RepeatabilityComparison {
        rotation_deg,
        original: repeatability(original, rotation_deg, &cfg),
        enhanced: repeatability(enhanced, rotation_deg, &cfg),
    })
}
