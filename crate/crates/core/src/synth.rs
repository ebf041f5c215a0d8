//! Synthetic low-contrast, blue-tinted test scenes.
//!
//! Each scene is a structure map `s(x, y)` in `[0, 1]`, a diagonal ramp
//! perturbed by rectangles, a checker patch and mild noise, mapped linearly
//! into narrow blue-heavy channel ranges (R 40..80, G 80..140, B 120..200)
//! and rounded to whole values like a decoded 8-bit file.

use crate::imgio::RgbImage;

pub const RED_RANGE: (f64, f64) = (40.0, 80.0);
pub const GREEN_RANGE: (f64, f64) = (80.0, 140.0);
pub const BLUE_RANGE: (f64, f64) = (120.0, 200.0);

/// Small deterministic generator so scenes are stable across platforms and
/// dependency versions.
struct SplitMix(u64);

impl SplitMix {
    fn next_u64(&mut self) -> u64 {
        self.0 = self.0.wrapping_add(0x9e37_79b9_7f4a_7c15);
        let mut z = self.0;
        z = (z ^ (z >> 30)).wrapping_mul(0xbf58_476d_1ce4_e5b9);
        z = (z ^ (z >> 27)).wrapping_mul(0x94d0_49bb_1331_11eb);
        z ^ (z >> 31)
    }

    fn unit(&mut self) -> f64 {
        (self.next_u64() >> 11) as f64 / (1u64 << 53) as f64
    }

    fn range(&mut self, lo: f64, hi: f64) -> f64 {
        lo + (hi - lo) * self.unit()
    }
}

/// Maps a structure value in `[0, 1]` into the bluish channel ranges.
pub fn tint(s: f64) -> [f64; 3] {
    let s = s.clamp(0.0, 1.0);
    [RED_RANGE, GREEN_RANGE, BLUE_RANGE].map(|(lo, hi)| lo + (hi - lo) * s)
}

/// Plain diagonal ramp.
pub fn bluish_ramp(width: usize, height: usize) -> RgbImage {
    let span = (width + height - 2).max(1) as f64;
    RgbImage::from_fn(width, height, |x, y| tint((x + y) as f64 / span))
}

/// Uniform noise amplitude of [`bluish_scene`], in structure-map units.
pub const DEFAULT_NOISE: f64 = 0.02;

/// A ramp with random rectangles, a checker patch and mild noise.
pub fn bluish_scene(width: usize, height: usize, seed: u64) -> RgbImage {
    bluish_scene_with_noise(width, height, seed, DEFAULT_NOISE)
}

/// [`bluish_scene`] with a chosen noise amplitude.
pub fn bluish_scene_with_noise(width: usize, height: usize, seed: u64, noise: f64) -> RgbImage {
    let mut rng = SplitMix(seed);
    let span = (width + height - 2).max(1) as f64;
    let flip = rng.unit() < 0.5;
    let mut s: Vec<f64> = (0..height)
        .flat_map(|y| {
            (0..width).map(move |x| {
                let x = if flip { width - 1 - x } else { x };
                (x + y) as f64 / span
            })
        })
        .collect();

    let (wf, hf) = (width as f64, height as f64);
    for _ in 0..6 {
        let x0 = rng.range(0.0, wf * 0.8) as usize;
        let y0 = rng.range(0.0, hf * 0.8) as usize;
        let x1 = (x0 + rng.range(wf * 0.1, wf * 0.3) as usize).min(width);
        let y1 = (y0 + rng.range(hf * 0.1, hf * 0.3) as usize).min(height);
        let shift = rng.range(-0.2, 0.2);
        for y in y0..y1 {
            for x in x0..x1 {
                s[y * width + x] += shift;
            }
        }
    }

    let cell = rng.range(6.0, 12.0) as usize;
    let cx0 = rng.range(0.1 * wf, 0.5 * wf) as usize;
    let cy0 = rng.range(0.1 * hf, 0.5 * hf) as usize;
    for y in cy0..(cy0 + 4 * cell).min(height) {
        for x in cx0..(cx0 + 4 * cell).min(width) {
            let dark = ((x - cx0) / cell + (y - cy0) / cell) % 2 == 0;
            s[y * width + x] += if dark { -0.2 } else { 0.2 };
        }
    }

    for v in &mut s {
        *v += rng.range(-noise, noise);
    }
    RgbImage::from_fn(width, height, |x, y| tint(s[y * width + x]).map(f64::round))
}

/// `n` scenes with consecutive seeds.
pub fn bluish_corpus(n: usize, width: usize, height: usize) -> Vec<RgbImage> {
    (0..n as u64).map(|i| bluish_scene(width, height, 0x5eed + i)).collect()
}
